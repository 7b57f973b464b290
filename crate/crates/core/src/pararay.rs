//! Parameter rays `G_s(t)`: the parameters κ with `g_{κ,s}(t) = κ`.

use std::f64::consts::TAU;

use crate::dynray::{RayConfig, NOISE_FLOOR};
use crate::family::singular_orbit_with_derivative;
use crate::fractaldim::ParabolaRegion;
use crate::polyline::geometric_ladder;
use crate::{
    ComplexPoint, Error, ExternalAddress, RayEntry, RayKind, RayPolyline, Result, SampleFailure,
    OVERFLOW_GUARD,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamConfig {
    pub ray: RayConfig,
    /// Smallest potential accepted by the solver.
    pub t_floor: f64,
    pub step_cap: usize,
    /// Halvings tried before a damped step is given up.
    pub max_halvings: u32,
}

impl Default for ParamConfig {
    fn default() -> Self {
        Self { ray: RayConfig::default(), t_floor: 1.0, step_cap: 50, max_halvings: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRayPoint {
    pub kappa: ComplexPoint,
    pub t: f64,
    /// `|g_{κ,s}(t) - κ|`.
    pub residual: f64,
    /// Residual evaluations at accepted iterates, the certifying one included.
    pub newton_steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParabolaMembership {
    /// Smallest `N` such that every scanned `E^n(κ)` with `n ≥ N` lies in
    /// the region.
    pub first_inside: Option<usize>,
    /// The scan ended inside the region.
    pub all_inside_after: bool,
    /// Number of orbit points examined.
    pub scanned: usize,
}

/// Initial guess `t + 2πi s_1`.
pub fn initial_guess(s: &ExternalAddress, t: f64) -> ComplexPoint {
    ComplexPoint::new(t, TAU * s.at(1) as f64)
}

impl ParamConfig {
    /// `(g_{κ,s}(t) - κ, ∂g/∂κ)` at the full guarded depth.
    fn evaluate(&self, kappa: ComplexPoint, s: &ExternalAddress, t: f64) -> Result<(ComplexPoint, ComplexPoint)> {
        let d = self.ray.ray_derivative_kappa_with_margin(kappa, s, t, self.ray.max_depth)?;
        let g = self.ray.ray_point(kappa, s, t, self.ray.max_depth)?;
        Ok((g - kappa, d.value))
    }

    pub fn solve_parameter_ray_point(&self, s: &ExternalAddress, t: f64, tol: f64) -> Result<ParamRayPoint> {
        self.solve_from(s, t, tol, initial_guess(s, t))
    }

    /// Newton iteration on `h(κ) = g_{κ,s}(t) - κ` started at `start`.
    /// A step that does not reduce `|h|` is halved until it does.
    pub fn solve_from(&self, s: &ExternalAddress, t: f64, tol: f64, start: ComplexPoint) -> Result<ParamRayPoint> {
        if !t.is_finite() || t < self.t_floor {
            return Err(Error::BelowFloor { t, floor: self.t_floor });
        }
        if !(tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
        }
        s.check_admissible(self.ray.gate)?;
        let mut kappa = start;
        let (mut h, mut dg) = self.evaluate(kappa, s, t)?;
        let mut steps = 1;
        loop {
            let residual = h.norm();
            if residual < tol {
                return Ok(ParamRayPoint { kappa, t, residual, newton_steps: steps });
            }
            if steps >= self.step_cap {
                return Err(Error::NoConvergence { steps, residual });
            }
            let full = -h / (dg - 1.0);
            let mut accepted = None;
            let mut lambda = 1.0;
            let mut last_error = None;
            for _ in 0..=self.max_halvings {
                let candidate = kappa + full * lambda;
                match self.evaluate(candidate, s, t) {
                    Ok((h_new, dg_new)) if h_new.norm() < residual => {
                        accepted = Some((candidate, h_new, dg_new));
                        break;
                    }
                    Ok(_) => {}
                    Err(e) => last_error = Some(e),
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((k, h_new, dg_new)) => {
                    kappa = k;
                    h = h_new;
                    dg = dg_new;
                    steps += 1;
                }
                None => {
                    return Err(match last_error {
                        Some(e @ Error::SingularValueHit { .. }) => e,
                        _ => Error::NoConvergence { steps, residual },
                    })
                }
            }
        }
    }

    /// Continuation from `t_max` down to `t_min`, each solve seeded with
    /// the previous parameter. Entries are returned in increasing `t`.
    /// A failed solve stops the trace and marks it truncated.
    pub fn trace_parameter_ray(
        &self,
        s: &ExternalAddress,
        t_min: f64,
        t_max: f64,
        samples: usize,
        tol: f64,
    ) -> Result<RayPolyline> {
        if !t_min.is_finite() || t_min < self.t_floor {
            return Err(Error::BelowFloor { t: t_min, floor: self.t_floor });
        }
        if !(t_max > t_min) || !t_max.is_finite() {
            return Err(Error::invalid(format!("need t_min < t_max, got {t_min} and {t_max}")));
        }
        if samples < 2 {
            return Err(Error::invalid("at least two samples are required"));
        }
        s.check_admissible(self.ray.gate)?;
        let mut polyline = RayPolyline {
            entries: Vec::with_capacity(samples),
            address: s.clone(),
            kind: RayKind::Parameter,
            truncated: false,
            failures: Vec::new(),
        };
        let mut seed = None;
        for t in geometric_ladder(t_min, t_max, samples).into_iter().rev() {
            let fresh = || self.solve_from(s, t, tol, initial_guess(s, t));
            // A continued seed can land outside the basin on a coarse ladder.
            let solved = match seed {
                Some(start) => self.solve_from(s, t, tol, start).or_else(|_| fresh()),
                None => fresh(),
            };
            match solved {
                Ok(point) => {
                    seed = Some(point.kappa);
                    polyline.entries.push(RayEntry { t, value: point.kappa, residual: point.residual });
                }
                Err(error) => {
                    polyline.failures.push(SampleFailure { t, error });
                    polyline.truncated = true;
                    break;
                }
            }
        }
        polyline.entries.reverse();
        Ok(polyline)
    }
}

/// Singular orbit of a solved parameter with the rounding error of each
/// value: the solve residual amplified by `|(E^n)'(κ)|`, plus one rounding
/// of the value itself. Ends at `n_max` or just past the overflow guard.
fn orbit_with_noise(point: &ParamRayPoint, n_max: usize) -> (Vec<ComplexPoint>, Vec<f64>) {
    let orbit = singular_orbit_with_derivative(point.kappa, n_max);
    let seed_error = point.residual + f64::EPSILON * (point.kappa.norm() + 1.0);
    let noise = orbit.values.iter().zip(&orbit.derivs).map(|(z, d)| d.norm() * seed_error + f64::EPSILON * z.norm()).collect();
    (orbit.values, noise)
}

/// `δ_n = |E^n(κ) - F^{∘n}(t) - 2πi s_{n+1}|` while the rounding error of
/// `E^n(κ)` stays under [`NOISE_FLOOR`]. For `n ≥ 1` the list also stops at
/// the first `δ_n` that does not exceed that error.
pub fn singular_asymptotics_profile(point: &ParamRayPoint, s: &ExternalAddress, n_max: usize) -> Vec<f64> {
    let (values, noise) = orbit_with_noise(point, n_max);
    let mut u = point.t;
    let mut out = Vec::with_capacity(values.len());
    for (n, (z, e)) in values.iter().zip(&noise).enumerate() {
        if u > OVERFLOW_GUARD && n > 0 {
            break;
        }
        let delta = (z - ComplexPoint::new(u, TAU * s.at(n + 1) as f64)).norm();
        if n > 0 && (delta <= *e || *e > NOISE_FLOOR) {
            break;
        }
        out.push(delta);
        if u > OVERFLOW_GUARD {
            break;
        }
        u = u.exp() - u;
    }
    out
}

/// `|(E^n)'(κ)|` for `n = 0, 1, …` until the overflow guard or `n_max`.
pub fn derivative_growth_profile(point: &ParamRayPoint, n_max: usize) -> Vec<f64> {
    singular_orbit_with_derivative(point.kappa, n_max).derivs.iter().map(|d| d.norm()).collect()
}

/// Scans the singular orbit for membership in `P_{p,ξ}`. The scan stops at
/// the first value whose rounding error could move it across the boundary.
pub fn classify_parabola_membership(point: &ParamRayPoint, p: f64, xi: f64, n_max: usize) -> Result<ParabolaMembership> {
    let region = ParabolaRegion::new(p, xi)?;
    let (values, noise) = orbit_with_noise(point, n_max);
    let inside: Vec<bool> = values
        .iter()
        .zip(&noise)
        .map_while(|(&z, &e)| {
            let margin = (z.re - xi).min(region.half_width(z.re.max(0.0)) - z.im.abs());
            (e < margin.abs()).then(|| region.contains(z))
        })
        .collect();
    let count = inside.len();
    let first_inside = match inside.iter().rposition(|&b| !b) {
        None if count > 0 => Some(0),
        None => None,
        Some(last_out) if last_out + 1 < count => Some(last_out + 1),
        Some(_) => None,
    };
    Ok(ParabolaMembership { first_inside, all_inside_after: first_inside.is_some(), scanned: count })
}

pub fn solve_parameter_ray_point(s: &ExternalAddress, t: f64, tol: f64) -> Result<ParamRayPoint> {
    ParamConfig::default().solve_parameter_ray_point(s, t, tol)
}

pub fn trace_parameter_ray(s: &ExternalAddress, t_min: f64, t_max: f64, samples: usize, tol: f64) -> Result<RayPolyline> {
    ParamConfig::default().trace_parameter_ray(s, t_min, t_max, samples, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn addr(text: &str) -> ExternalAddress {
        text.parse().unwrap()
    }

    #[test]
    fn zeros_address_gives_real_parameter() {
        let p = solve_parameter_ray_point(&ExternalAddress::zeros(), 10.0, 1e-10).unwrap();
        assert!(p.kappa.im.abs() < 1e-9);
        assert!(p.residual < 1e-10);
    }

    #[test]
    fn coarse_ladder_reaches_t_min() {
        let line = trace_parameter_ray(&ExternalAddress::zeros(), 2.0, 30.0, 4, 1e-10).unwrap();
        assert!(!line.truncated, "{:?}", line.failures);
        assert_eq!(line.entries.len(), 4);
        assert_eq!(line.entries[0].t, 2.0);
    }

    #[test]
    fn newton_is_fast_and_self_consistent() {
        let s = addr("1");
        let p = solve_parameter_ray_point(&s, 6.0, 1e-10).unwrap();
        assert!(p.newton_steps <= 8, "{}", p.newton_steps);
        let again = ParamConfig::default().solve_from(&s, 6.0, 1e-10, p.kappa).unwrap();
        assert_eq!(again.newton_steps, 1);
        assert_eq!(again.kappa, p.kappa);
    }

    #[test]
    fn conjugate_address_gives_conjugate_parameter() {
        let s = addr("2,-1|1");
        let a = solve_parameter_ray_point(&s, 4.0, 1e-10).unwrap();
        let b = solve_parameter_ray_point(&s.negate(), 4.0, 1e-10).unwrap();
        assert!((a.kappa.conj() - b.kappa).norm() < 1e-9);
    }

    #[test]
    fn refuses_low_potential() {
        assert!(matches!(
            solve_parameter_ray_point(&addr("1"), 0.5, 1e-10),
            Err(Error::BelowFloor { .. })
        ));
    }

    #[test]
    fn profiles_on_a_solved_point() {
        let s = ExternalAddress::zeros();
        let p = solve_parameter_ray_point(&s, 5.0, 1e-10).unwrap();
        let delta = singular_asymptotics_profile(&p, &s, 100);
        assert!((delta[0] - (p.kappa - initial_guess(&s, 5.0)).norm()).abs() < 1e-15);
        assert!(delta.iter().all(|&d| d < 2.0));
        assert!(delta[1..].windows(2).all(|w| w[1] <= w[0]), "{delta:?}");

        let growth = derivative_growth_profile(&p, 100);
        assert_eq!(growth[0], 1.0);
        assert!(*growth.last().unwrap() > 1e6);

        let m = classify_parabola_membership(&p, 2.0, 1.0, 100).unwrap();
        assert_eq!(m.first_inside, Some(0));
        assert!(m.all_inside_after);
    }

    #[test]
    fn trace_is_ordered_and_escapes() {
        let line = trace_parameter_ray(&addr("1"), 2.0, 25.0, 30, 1e-10).unwrap();
        assert!(!line.truncated);
        assert_eq!(line.entries.len(), 30);
        assert!(line.entries.windows(2).all(|w| w[0].t < w[1].t));
        assert!(line.entries.last().unwrap().value.re > line.entries[0].value.re);
        assert!(line.max_residual() < 1e-10);
    }
}
