//! Dynamic rays `g_{κ,s}(t)` built from the logarithm branches
//! `L_s(z) = log(z - κ) + 2πi s`.
//!
//! `g^m_{κ,s}(t)` is evaluated inside out: the potentials
//! `u_j = F^{∘j}(t)` are computed first, then `w_m = u_m` and
//! `w_{j-1} = L_{s_j}(w_j)` down to `w_0 = g^m_{κ,s}(t)`.
//!
//! Once some `u_k` exceeds [`OVERFLOW_GUARD`], `u_{k+1}` is no longer
//! representable. The chain is then seeded in log space with
//! `w_k = u_k + 2πi s_{k+1}`, which equals `L_{s_{k+1}}(u_{k+1})` to the last
//! bit because `log(e^u - u - κ) = u` in double precision for `u > 700`.
//! Every deeper level produces the same seed, so `g^m` is constant in `m`
//! from `m = k + 1` on.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::address::DEFAULT_GATE;
use crate::family::{apply_map, potential_step};
use crate::polyline::geometric_ladder;
use crate::{
    ComplexPoint, Error, ExternalAddress, RayEntry, RayKind, RayPolyline, Result, SampleFailure,
    OVERFLOW_GUARD,
};

/// `|z - κ|` below this raises [`Error::SingularValueHit`].
pub const SINGULAR_EPS: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayConfig {
    /// Smallest potential accepted.
    pub t_floor: f64,
    /// `Re g^m(t') > t' - b_check` is checked at every level.
    pub b_check: f64,
    /// Admissibility gate on `sup_j |s_j|`.
    pub gate: u64,
    pub max_depth: usize,
    /// Threshold `C` of the κ-derivative bound `|∂g/∂κ| < 2/C`.
    pub c_bound: f64,
    pub tol: f64,
}

impl Default for RayConfig {
    fn default() -> Self {
        Self { t_floor: 0.05, b_check: 2.0, gate: DEFAULT_GATE, max_depth: 256, c_bound: 10.0, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayPointResult {
    pub value: ComplexPoint,
    pub depth_used: usize,
    /// `|g^m - g^{m-1}|` at the final depth.
    pub cauchy_gap: f64,
    /// The tolerance was not reached within `max_depth`.
    pub clamped: bool,
    /// Level at which the chain was seeded in log space, if any.
    pub guard_level: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaDerivative {
    pub value: ComplexPoint,
    /// `min_{j ≥ 1} Re(w_j - κ)` along the chain. The bound
    /// `|value| < 2/C` is guaranteed when this exceeds `C`.
    pub margin: f64,
}

struct Chain {
    value: ComplexPoint,
    dkappa: ComplexPoint,
    margin: f64,
    guard_level: Option<usize>,
}

/// `L_branch(z) = log(z - κ) + 2πi·branch` with the principal logarithm,
/// imaginary part in `(-π, π]`.
pub fn inverse_branch(kappa: ComplexPoint, branch: i64, z: ComplexPoint) -> Result<ComplexPoint> {
    log_shifted(z - kappa, branch, 0)
}

fn log_shifted(diff: ComplexPoint, branch: i64, level: usize) -> Result<ComplexPoint> {
    let modulus = diff.re.hypot(diff.im);
    if !(modulus >= SINGULAR_EPS) {
        return Err(Error::SingularValueHit { level });
    }
    let mut arg = diff.im.atan2(diff.re);
    if arg == -std::f64::consts::PI {
        arg = std::f64::consts::PI;
    }
    Ok(ComplexPoint::new(modulus.ln(), arg + TAU * branch as f64))
}

/// `a / b` without forming `|b|²`, which overflows for the potentials
/// seeded past the guard.
fn div(a: ComplexPoint, b: ComplexPoint) -> ComplexPoint {
    let n = b.norm();
    a * (b.conj() / n) / n
}

impl RayConfig {
    fn check_inputs(&self, s: &ExternalAddress, t: f64, floor: f64) -> Result<()> {
        if !t.is_finite() || t < floor {
            return Err(Error::BelowFloor { t, floor });
        }
        s.check_admissible(self.gate)
    }

    fn chain(&self, kappa: ComplexPoint, s: &ExternalAddress, t: f64, depth: usize) -> Result<Chain> {
        let mut u = Vec::with_capacity(depth.min(16) + 1);
        u.push(t);
        let mut guard_level = None;
        for j in 1..=depth {
            let prev = u[j - 1];
            if prev > OVERFLOW_GUARD {
                guard_level = Some(j - 1);
                break;
            }
            u.push(prev.exp() - prev);
        }
        let top = u.len() - 1;
        let mut w = match guard_level {
            Some(k) => ComplexPoint::new(u[k], TAU * s.at(k + 1) as f64),
            None => ComplexPoint::new(u[top], 0.0),
        };
        let mut dkappa = ComplexPoint::new(0.0, 0.0);
        let mut margin = f64::INFINITY;
        self.lower_bound(w, u[top], top)?;
        for j in (1..=top).rev() {
            let diff = w - kappa;
            margin = margin.min(diff.re);
            dkappa = div(dkappa - 1.0, diff);
            w = log_shifted(diff, s.at(j), j)?;
            self.lower_bound(w, u[j - 1], j - 1)?;
        }
        Ok(Chain { value: w, dkappa, margin, guard_level })
    }

    fn lower_bound(&self, w: ComplexPoint, potential: f64, level: usize) -> Result<()> {
        // Written as a difference: `potential - b_check` rounds to `potential`
        // once the potential is large.
        let bound = potential - self.b_check;
        if !(w.re - potential > -self.b_check) {
            return Err(Error::LowerBoundViolated { level, re: w.re, bound });
        }
        Ok(())
    }

    /// `g^{depth}_{κ,s}(t)`.
    pub fn ray_point(&self, kappa: ComplexPoint, s: &ExternalAddress, t: f64, depth: usize) -> Result<ComplexPoint> {
        self.check_inputs(s, t, self.t_floor)?;
        Ok(self.chain(kappa, s, t, depth)?.value)
    }

    /// Deepens the construction until two consecutive depths agree to `tol`.
    pub fn ray_point_adaptive(
        &self,
        kappa: ComplexPoint,
        s: &ExternalAddress,
        t: f64,
        tol: f64,
    ) -> Result<RayPointResult> {
        self.check_inputs(s, t, self.t_floor)?;
        if !(tol > 0.0) {
            return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
        }
        let mut previous = ComplexPoint::new(t, 0.0);
        let mut result = RayPointResult {
            value: previous,
            depth_used: 0,
            cauchy_gap: f64::INFINITY,
            clamped: true,
            guard_level: None,
        };
        for depth in 1..=self.max_depth {
            let chain = self.chain(kappa, s, t, depth)?;
            let gap = (chain.value - previous).norm();
            result = RayPointResult {
                value: chain.value,
                depth_used: depth,
                cauchy_gap: gap,
                clamped: gap >= tol,
                guard_level: chain.guard_level,
            };
            if gap < tol {
                break;
            }
            previous = chain.value;
        }
        Ok(result)
    }

    /// `g'_{κ,s}(t)` from the product
    /// `∏_{m ≥ 1} (e^{u_{m-1}} - 1) / (g_{κ,σ^m s}(u_m) - κ)` truncated after
    /// `terms` factors. Factors with `u_{m-1}` above the guard equal 1 in
    /// double precision and end the product.
    pub fn ray_derivative_t(&self, kappa: ComplexPoint, s: &ExternalAddress, t: f64, terms: usize) -> Result<ComplexPoint> {
        self.check_inputs(s, t, self.t_floor)?;
        if terms == 0 {
            return Err(Error::invalid("at least one product term is required"));
        }
        let mut product = ComplexPoint::new(1.0, 0.0);
        let mut u = t;
        for m in 1..=terms {
            if u > OVERFLOW_GUARD {
                break;
            }
            let next = u.exp() - u;
            let inner = self.ray_point_adaptive(kappa, &s.shift_by(m), next, self.tol)?;
            product *= div(u.exp_m1().into(), inner.value - kappa);
            u = next;
        }
        Ok(product)
    }

    /// `∂/∂κ g^{depth}_{κ,s}(t)` with its validity margin.
    pub fn ray_derivative_kappa_with_margin(
        &self,
        kappa: ComplexPoint,
        s: &ExternalAddress,
        t: f64,
        depth: usize,
    ) -> Result<KappaDerivative> {
        self.check_inputs(s, t, self.t_floor)?;
        let chain = self.chain(kappa, s, t, depth)?;
        Ok(KappaDerivative { value: chain.dkappa, margin: chain.margin })
    }

    /// `∂/∂κ g^{depth}_{κ,s}(t)`, seeded with 0 at the innermost level.
    pub fn ray_derivative_kappa(&self, kappa: ComplexPoint, s: &ExternalAddress, t: f64, depth: usize) -> Result<ComplexPoint> {
        Ok(self.ray_derivative_kappa_with_margin(kappa, s, t, depth)?.value)
    }

    /// `|E_κ(g_{κ,s}(t)) - g_{κ,σ(s)}(F(t))|` at tolerance `tol`.
    pub fn functional_equation_residual(&self, kappa: ComplexPoint, s: &ExternalAddress, t: f64, tol: f64) -> Result<f64> {
        let g = self.ray_point_adaptive(kappa, s, t, tol)?.value;
        self.residual_at(kappa, s, t, g, tol)
    }

    fn residual_at(&self, kappa: ComplexPoint, s: &ExternalAddress, t: f64, g: ComplexPoint, tol: f64) -> Result<f64> {
        let image = apply_map(kappa, g).ok_or(Error::Overflow(g.re))?;
        let next = self.ray_point_adaptive(kappa, &s.shift(), potential_step(t)?, tol)?.value;
        Ok((image - next).norm())
    }

    /// Samples `g_{κ,s}` at `samples` geometrically spaced potentials.
    /// Samples are computed in parallel; failures are recorded, not raised.
    pub fn trace_dynamic_ray(
        &self,
        kappa: ComplexPoint,
        s: &ExternalAddress,
        t_min: f64,
        t_max: f64,
        samples: usize,
        tol: f64,
    ) -> Result<RayPolyline> {
        self.check_inputs(s, t_min, self.t_floor)?;
        if !(t_max > t_min) || !t_max.is_finite() {
            return Err(Error::invalid(format!("need t_min < t_max, got {t_min} and {t_max}")));
        }
        if samples < 2 {
            return Err(Error::invalid("at least two samples are required"));
        }
        let outcomes: Vec<(f64, Result<RayEntry>)> = geometric_ladder(t_min, t_max, samples)
            .into_par_iter()
            .map(|t| {
                let entry = self.ray_point_adaptive(kappa, s, t, tol).and_then(|point| {
                    let residual = self.residual_at(kappa, s, t, point.value, tol)?;
                    Ok(RayEntry { t, value: point.value, residual })
                });
                (t, entry)
            })
            .collect();
        let mut polyline = RayPolyline {
            entries: Vec::with_capacity(samples),
            address: s.clone(),
            kind: RayKind::Dynamic,
            truncated: false,
            failures: Vec::new(),
        };
        for (t, outcome) in outcomes {
            match outcome {
                Ok(entry) => polyline.entries.push(entry),
                Err(error) => polyline.failures.push(SampleFailure { t, error }),
            }
        }
        polyline.truncated = !polyline.failures.is_empty();
        Ok(polyline)
    }

    /// `δ_n = |E_κ^{∘n}(g_{κ,s}(t)) - F^{∘n}(t) - 2πi s_{n+1}|` along the
    /// forward orbit of the ray point.
    ///
    /// The orbit is cut at the precision horizon: the rounding error of the
    /// starting value is amplified by `|(E^n)'(g)| = ∏ |e^{z_j}|`. For
    /// `n ≥ 1`, `δ_n` is only reported while that amplified error stays below
    /// [`NOISE_FLOOR`] and below `δ_n` itself. The list also ends at `n_max`
    /// and at the overflow guard.
    pub fn orbit_deviation_profile(
        &self,
        kappa: ComplexPoint,
        s: &ExternalAddress,
        t: f64,
        n_max: usize,
    ) -> Result<Vec<f64>> {
        let g = self.ray_point_adaptive(kappa, s, t, self.tol)?.value;
        let mut z = g;
        let mut u = t;
        let mut noise = f64::EPSILON * (g.norm() + kappa.norm());
        let mut out = Vec::new();
        for n in 0..=n_max {
            let delta = (z - ComplexPoint::new(u, TAU * s.at(n + 1) as f64)).norm();
            if n > 0 && delta <= noise {
                break;
            }
            out.push(delta);
            if n == n_max || z.re > OVERFLOW_GUARD || u > OVERFLOW_GUARD {
                break;
            }
            noise *= z.re.exp();
            z = z.exp() + kappa;
            u = u.exp() - u;
            noise += f64::EPSILON * (z.norm() + kappa.norm());
            if noise > NOISE_FLOOR {
                break;
            }
        }
        Ok(out)
    }
}

/// Largest propagated rounding error at which an orbit deviation is still
/// reported.
pub const NOISE_FLOOR: f64 = 1e-2;

pub fn ray_point(kappa: ComplexPoint, s: &ExternalAddress, t: f64, depth: usize) -> Result<ComplexPoint> {
    RayConfig::default().ray_point(kappa, s, t, depth)
}

pub fn ray_point_adaptive(kappa: ComplexPoint, s: &ExternalAddress, t: f64, tol: f64) -> Result<RayPointResult> {
    RayConfig::default().ray_point_adaptive(kappa, s, t, tol)
}

pub fn ray_derivative_t(kappa: ComplexPoint, s: &ExternalAddress, t: f64, terms: usize) -> Result<ComplexPoint> {
    RayConfig::default().ray_derivative_t(kappa, s, t, terms)
}

pub fn ray_derivative_kappa(kappa: ComplexPoint, s: &ExternalAddress, t: f64, depth: usize) -> Result<ComplexPoint> {
    RayConfig::default().ray_derivative_kappa(kappa, s, t, depth)
}

pub fn trace_dynamic_ray(
    kappa: ComplexPoint,
    s: &ExternalAddress,
    t_min: f64,
    t_max: f64,
    samples: usize,
    tol: f64,
) -> Result<RayPolyline> {
    RayConfig::default().trace_dynamic_ray(kappa, s, t_min, t_max, samples, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    fn addr(text: &str) -> ExternalAddress {
        text.parse().unwrap()
    }

    #[test]
    fn inverse_branch_examples() {
        assert_eq!(inverse_branch(c(0.0, 0.0), 0, c(1.0, 0.0)).unwrap(), c(0.0, 0.0));
        let v = inverse_branch(c(0.0, 0.0), 2, c(E, 0.0)).unwrap();
        assert!((v - c(1.0, 4.0 * PI)).norm() < 1e-15);
        assert_eq!(
            inverse_branch(c(0.0, 1.0), 0, c(0.0, 1.0)),
            Err(Error::SingularValueHit { level: 0 })
        );
    }

    #[test]
    fn branch_cut_resolves_to_plus_pi() {
        let up = inverse_branch(c(0.0, 0.0), 0, c(-1.0, 0.0)).unwrap();
        let down = inverse_branch(c(0.0, 0.0), 0, c(-1.0, -0.0)).unwrap();
        assert_eq!(up.im, PI);
        assert_eq!(down.im, PI);
    }

    #[test]
    fn depth_zero_is_the_potential() {
        assert_eq!(ray_point(c(0.3, 0.2), &addr("1,2"), 2.5, 0).unwrap(), c(2.5, 0.0));
        assert_eq!(ray_derivative_kappa(c(0.3, 0.2), &addr("1,2"), 2.5, 0).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn real_data_gives_real_ray() {
        let v = ray_point(c(1.0, 0.0), &ExternalAddress::zeros(), 5.0, 20).unwrap();
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn consecutive_depths_agree() {
        let s = addr("1,0,-1");
        let kappa = c(0.2, 0.1);
        let a = ray_point(kappa, &s, 4.0, 12).unwrap();
        let b = ray_point(kappa, &s, 4.0, 11).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn guard_seed_matches_explicit_branch() {
        // u = 710 cannot be pushed through F, but L_s(F(u)) is u + 2πi s.
        let kappa = c(0.7, -1.3);
        let u: f64 = 650.0;
        let explicit = inverse_branch(kappa, 3, c(u.exp() - u, 0.0)).unwrap();
        assert_eq!(explicit, c(u, TAU * 3.0));
    }

    #[test]
    fn adaptive_certifies_quickly_for_large_potentials() {
        let cfg = RayConfig::default();
        for t in [3.0, 5.0, 20.0, 100.0] {
            let r = cfg.ray_point_adaptive(c(-1.5, 2.0), &addr("2,-3|1"), t, 1e-10).unwrap();
            assert!(!r.clamped);
            assert!(r.depth_used <= 64);
            assert!(r.cauchy_gap < 1e-10);
        }
    }

    #[test]
    fn refusals() {
        let cfg = RayConfig::default();
        assert!(matches!(cfg.ray_point(c(0.0, 0.0), &addr("1"), 0.01, 3), Err(Error::BelowFloor { .. })));
        assert!(matches!(cfg.ray_point(c(0.0, 0.0), &addr("65"), 3.0, 3), Err(Error::Inadmissible { .. })));
        assert!(cfg.ray_point_adaptive(c(0.0, 0.0), &addr("1"), 3.0, 0.0).is_err());
        assert!(cfg.ray_derivative_t(c(0.0, 0.0), &addr("1"), 3.0, 0).is_err());
    }

    #[test]
    fn lower_bound_is_checked() {
        let cfg = RayConfig { b_check: -1e9, ..RayConfig::default() };
        assert!(matches!(
            cfg.ray_point(c(0.0, 0.0), &addr("1"), 3.0, 2),
            Err(Error::LowerBoundViolated { .. })
        ));
    }

    #[test]
    fn singular_value_on_the_chain() {
        // w_1 = F(t) lies on the chain; putting κ there forces a hit.
        let t = 2.0_f64;
        let kappa = c(t.exp() - t, 0.0);
        assert_eq!(
            ray_point(kappa, &ExternalAddress::zeros(), t, 1),
            Err(Error::SingularValueHit { level: 1 })
        );
    }

    #[test]
    fn derivative_t_tail_and_symmetry() {
        let s = addr("1,-2|3");
        let kappa = c(0.5, -0.5);
        let a = ray_derivative_t(kappa, &s, 20.0, 3).unwrap();
        let b = ray_derivative_t(kappa, &s, 20.0, 6).unwrap();
        assert!((a - b).norm() < 1e-8);
        let devs: Vec<f64> = [10.0, 15.0, 20.0]
            .iter()
            .map(|&t| (ray_derivative_t(kappa, &s, t, 8).unwrap() - 1.0).norm())
            .collect();
        assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
        let real = ray_derivative_t(c(1.0, 0.0), &ExternalAddress::zeros(), 5.0, 8).unwrap();
        assert!(real.im.abs() < 1e-10);
    }

    #[test]
    fn trace_records_failures_and_matches_adaptive() {
        let s = ExternalAddress::zeros();
        let kappa = c(1.0, 0.0);
        let line = trace_dynamic_ray(kappa, &s, 3.0, 12.0, 40, 1e-10).unwrap();
        assert_eq!(line.entries.len(), 40);
        assert!(!line.truncated);
        assert!(line.max_residual() < 1e-8);
        assert!(line.entries.windows(2).all(|w| w[1].value.re > w[0].value.re));
        let first = ray_point_adaptive(kappa, &s, 3.0, 1e-10).unwrap().value;
        assert_eq!(line.entries[0].value, first);

        // F(t) is not representable past the guard: those samples fail.
        let line = trace_dynamic_ray(kappa, &s, 500.0, 800.0, 5, 1e-10).unwrap();
        assert!(line.truncated);
        assert!(!line.failures.is_empty());
        assert!(line.entries.windows(2).all(|w| w[0].t < w[1].t));
    }
}
