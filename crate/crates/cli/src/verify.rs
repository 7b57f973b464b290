//! Seeded verification suites.
//!
//! Trial `k` of a run with seed `S` draws from `ChaCha8Rng::seed_from_u64(S)`
//! on stream `k`, so every trial can be reproduced on its own and the
//! outcome does not depend on how trials are scheduled.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::fmt;

use expray_core::dynray::RayConfig;
use expray_core::family::singular_orbit_with_derivative;
use expray_core::pararay::{singular_asymptotics_profile, ParamConfig};
use expray_core::{ComplexPoint, Error, ExternalAddress};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Lemma21,
    Asymptotics,
    Derivatives,
    DkappaBound,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Lemma21 => "lemma21",
            Suite::Asymptotics => "asymptotics",
            Suite::Derivatives => "derivatives",
            Suite::DkappaBound => "dkappa-bound",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The sample fell outside the suite's hypotheses.
    Skip,
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub index: usize,
    pub verdict: Verdict,
    /// The quantity the suite bounds; its meaning depends on the suite.
    pub metric: f64,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: Vec<Trial>,
}

impl SuiteReport {
    pub fn count(&self, v: Verdict) -> usize {
        self.trials.iter().filter(|t| t.verdict == v).count()
    }

    pub fn passed(&self) -> bool {
        self.count(Verdict::Fail) == 0
    }

    /// Largest metric over trials that were not skipped.
    pub fn max_metric(&self) -> f64 {
        self.trials.iter().filter(|t| t.verdict != Verdict::Skip).map(|t| t.metric).fold(0.0, f64::max)
    }

    pub fn metric_name(&self) -> &'static str {
        match self.suite {
            Suite::Lemma21 => "worst inequality ratio",
            Suite::Asymptotics => "max delta_n",
            Suite::Derivatives => "max relative error",
            Suite::DkappaBound => "max |dg/dkappa| * C",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    /// `C` of the ∂κ bound.
    pub c_bound: f64,
}

pub fn run_suite(suite: Suite, cfg: SuiteConfig) -> SuiteReport {
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|index| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(index as u64);
            let (verdict, metric, detail) = match suite {
                Suite::Lemma21 => lemma21(&mut rng),
                Suite::Asymptotics => asymptotics(&mut rng),
                Suite::Derivatives => derivatives(&mut rng),
                Suite::DkappaBound => dkappa_bound(&mut rng, cfg.c_bound),
            };
            Trial { index, verdict, metric, detail }
        })
        .collect();
    SuiteReport { suite, seed: cfg.seed, trials }
}

type Outcome = (Verdict, f64, String);

pub fn random_kappa(rng: &mut ChaCha8Rng, radius: f64) -> ComplexPoint {
    ComplexPoint::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))
}

/// Up to three leading entries, then zeros or a period of one or two, all
/// with `|entry| ≤ bound`.
pub fn random_address(rng: &mut ChaCha8Rng, bound: i64) -> ExternalAddress {
    fn entries(rng: &mut ChaCha8Rng, bound: i64, n: usize) -> Vec<i64> {
        (0..n).map(|_| rng.gen_range(-bound..=bound)).collect()
    }
    let n = rng.gen_range(0..=3);
    let prefix = entries(rng, bound, n);
    if rng.gen_bool(0.5) {
        ExternalAddress::finite(prefix).expect("bounded entries")
    } else {
        let n = rng.gen_range(1..=2);
        ExternalAddress::periodic(prefix, entries(rng, bound, n)).expect("non-empty period")
    }
}

const STRIP_PAIRS: usize = 100;

/// Derivative growth along one singular orbit and strip expansion on
/// [`STRIP_PAIRS`] point pairs. The metric is the largest of
/// `bound / |(E^{n+1})'|` and `(|z1 - z2|/√2) / |e^{z1} - e^{z2}|`; any value
/// ≥ 1 is a violation.
fn lemma21(rng: &mut ChaCha8Rng) -> Outcome {
    let kappa = ComplexPoint::new(rng.gen_range(-2.0..6.0), rng.gen_range(-8.0..8.0));
    let orbit = singular_orbit_with_derivative(kappa, 40);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut failed = false;
    for k in 0..orbit.values.len() - 1 {
        let x = orbit.values[k].re;
        let d = orbit.derivs[k].norm();
        if x > 1.0 && d > 2.0 {
            let xi = 1.0 + rng.gen_range(0.0..0.999) * (x - 1.0);
            let bound = xi.exp() * d - 1.0;
            let next = orbit.derivs[k + 1].norm();
            failed |= !(next > bound && bound > 2.0 * d);
            worst = worst.max(bound / next);
            checked += 1;
        }
    }
    for _ in 0..STRIP_PAIRS {
        let (x0, width) = (rng.gen_range(1.0..12.0), rng.gen_range(1e-3..6.0));
        let (y0, height) = (rng.gen_range(-20.0..20.0), rng.gen_range(1e-3..FRAC_PI_2));
        let mut point = || ComplexPoint::new(x0 + rng.gen::<f64>() * width, y0 + rng.gen::<f64>() * height);
        let (z1, z2) = (point(), point());
        let ratio = ((z1 - z2).norm() / SQRT_2) / (z1.exp() - z2.exp()).norm();
        failed |= !(ratio <= 1.0);
        worst = worst.max(ratio);
    }
    let verdict = if failed { Verdict::Fail } else { Verdict::Pass };
    (verdict, worst, format!("kappa={kappa:.4} orbit checks={checked} strip pairs={STRIP_PAIRS}"))
}

/// Parameter-ray singular orbit with `t ≥ 5`: `δ_n < 2` throughout and
/// non-increasing from `n = 1`. Also the orbit of a dynamic-ray point with
/// `t ≥ 3`, whose deviation must decrease.
fn asymptotics(rng: &mut ChaCha8Rng) -> Outcome {
    let s = random_address(rng, 8);
    let t = rng.gen_range(5.0..30.0);
    let point = match ParamConfig::default().solve_parameter_ray_point(&s, t, 1e-10) {
        Ok(p) => p,
        Err(e) => return (Verdict::Fail, f64::NAN, format!("s={s} t={t:.4}: {e}")),
    };
    let delta = singular_asymptotics_profile(&point, &s, 100);
    let max = delta.iter().copied().fold(0.0, f64::max);
    let mut ok = max < 2.0 && !delta.is_empty() && delta[1..].windows(2).all(|w| w[1] <= w[0]);

    let kappa = random_kappa(rng, 5.0);
    let s_dyn = random_address(rng, 8);
    let t_dyn = rng.gen_range(3.0..12.0);
    let dynamic = match RayConfig::default().orbit_deviation_profile(kappa, &s_dyn, t_dyn, 50) {
        Ok(d) => {
            ok &= d.windows(2).all(|w| w[1] < w[0]);
            format!("{} dynamic deviations", d.len())
        }
        Err(Error::SingularValueHit { .. }) => "dynamic ray hits the singular value".to_string(),
        Err(e) => {
            ok = false;
            format!("dynamic: {e}")
        }
    };
    let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    let profile: Vec<String> = delta.iter().map(|d| format!("{d:.3e}")).collect();
    (verdict, max, format!("s={s} t={t:.4} profile=[{}]; {dynamic}", profile.join(" ")))
}

fn rel(a: ComplexPoint, b: ComplexPoint) -> f64 {
    (a - b).norm() / b.norm()
}

/// `∂g/∂t` and `∂g/∂κ` against central differences with `h = 10⁻⁶` at a
/// fixed depth of 60.
fn derivatives(rng: &mut ChaCha8Rng) -> Outcome {
    let cfg = RayConfig::default();
    let kappa = random_kappa(rng, 5.0);
    let s = random_address(rng, 8);
    let t = rng.gen_range(3.0..8.0);
    let (h, depth) = (1e-6, 60);
    let run = || -> expray_core::Result<(f64, f64)> {
        let dt = cfg.ray_derivative_t(kappa, &s, t, 40)?;
        let fd_t = (cfg.ray_point(kappa, &s, t + h, depth)? - cfg.ray_point(kappa, &s, t - h, depth)?) / (2.0 * h);
        let dk = cfg.ray_derivative_kappa(kappa, &s, t, depth)?;
        let mut err_k: f64 = 0.0;
        for dir in [ComplexPoint::new(h, 0.0), ComplexPoint::new(0.0, h)] {
            let fd = (cfg.ray_point(kappa + dir, &s, t, depth)? - cfg.ray_point(kappa - dir, &s, t, depth)?) / (2.0 * dir);
            err_k = err_k.max(rel(dk, fd));
        }
        Ok((rel(dt, fd_t), err_k))
    };
    let where_ = format!("kappa={kappa:.4} s={s} t={t:.4}");
    match run() {
        Ok((et, ek)) => {
            let verdict = if et < 1e-4 && ek < 1e-4 { Verdict::Pass } else { Verdict::Fail };
            (verdict, et.max(ek), format!("{where_} rel_t={et:.2e} rel_kappa={ek:.2e}"))
        }
        Err(Error::SingularValueHit { level }) => (Verdict::Skip, 0.0, format!("{where_} singular value at level {level}")),
        Err(e) => (Verdict::Fail, f64::NAN, format!("{where_}: {e}")),
    }
}

/// `|∂g/∂κ| < 2/C` wherever every level satisfies `Re(g - κ) > C`. The
/// metric is `|∂g/∂κ|·C`, which must stay below 2. Since level 1 sits near
/// `F(t)`, potentials close to `ln C` probe the edge of the regime.
fn dkappa_bound(rng: &mut ChaCha8Rng, c: f64) -> Outcome {
    let cfg = RayConfig { c_bound: c, ..RayConfig::default() };
    let kappa = random_kappa(rng, 5.0);
    let s = random_address(rng, 8);
    let t = rng.gen_range(1.0..c.ln().max(1.0) + 3.0);
    let where_ = format!("kappa={kappa:.4} s={s} t={t:.4}");
    match cfg.ray_derivative_kappa_with_margin(kappa, &s, t, cfg.max_depth) {
        Ok(d) if d.margin > c => {
            let m = d.value.norm() * c;
            let verdict = if m < 2.0 { Verdict::Pass } else { Verdict::Fail };
            (verdict, m, format!("{where_} |dg/dkappa|={:.3e} margin={:.3}", d.value.norm(), d.margin))
        }
        Ok(d) => (Verdict::Skip, 0.0, format!("{where_} margin {:.3} not above C", d.margin)),
        Err(Error::SingularValueHit { level }) => (Verdict::Skip, 0.0, format!("{where_} singular value at level {level}")),
        Err(e @ Error::LowerBoundViolated { .. }) => (Verdict::Skip, 0.0, format!("{where_}: {e}")),
        Err(e) => (Verdict::Fail, f64::NAN, format!("{where_}: {e}")),
    }
}
