//! The exponential family itself: map evaluation, the singular orbit with
//! escape classification, its κ-derivative, and the potential-growth
//! function `F(t) = e^t - t`.

use crate::{ComplexPoint, Error, Result, OVERFLOW_GUARD};

/// Default real-part threshold for escape certification.
pub const DEFAULT_ESCAPE_RE: f64 = 50.0;

/// Default iteration budget for escape classification.
pub const DEFAULT_CLASSIFY_BUDGET: usize = 100;

/// `e^z + κ`, or `None` when `Re z` exceeds [`OVERFLOW_GUARD`].
pub fn apply_map(kappa: ComplexPoint, z: ComplexPoint) -> Option<ComplexPoint> {
    (z.re <= OVERFLOW_GUARD).then(|| z.exp() + kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EscapeStatus {
    /// Two consecutive iterates above the threshold with increasing real part.
    Escaped,
    /// Budget exhausted without certification. A budget verdict only.
    Bounded,
    /// An iterate passed the overflow guard. Counted as escaping.
    Overflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeResult {
    pub status: EscapeStatus,
    /// Index of the certifying (or overflowing) iterate.
    pub escape_index: Option<usize>,
    pub final_value: ComplexPoint,
    pub orbit: Option<Vec<ComplexPoint>>,
}

impl EscapeResult {
    /// True for both `Escaped` and `Overflow`.
    pub fn escaped(&self) -> bool {
        self.status != EscapeStatus::Bounded
    }
}

/// Iterate `κ, E_κ(κ), E_κ²(κ), …` and classify the orbit.
pub fn singular_orbit(kappa: ComplexPoint, n_max: usize, escape_re: f64) -> EscapeResult {
    iterate_singular(kappa, n_max, escape_re, false)
}

/// Like [`singular_orbit`], additionally returning the visited iterates.
pub fn singular_orbit_recorded(
    kappa: ComplexPoint,
    n_max: usize,
    escape_re: f64,
) -> EscapeResult {
    iterate_singular(kappa, n_max, escape_re, true)
}

fn iterate_singular(kappa: ComplexPoint, n_max: usize, escape_re: f64, record: bool) -> EscapeResult {
    let mut orbit = record.then(|| Vec::with_capacity(n_max.min(1024) + 1));
    let mut z = kappa;
    let mut previous_hit: Option<f64> = None;
    let mut n = 0;
    let (status, escape_index) = loop {
        if let Some(o) = orbit.as_mut() {
            o.push(z);
        }
        if z.re > escape_re {
            if matches!(previous_hit, Some(prev) if z.re > prev) {
                break (EscapeStatus::Escaped, Some(n));
            }
            previous_hit = Some(z.re);
        } else {
            previous_hit = None;
        }
        if z.re > OVERFLOW_GUARD {
            break (EscapeStatus::Overflow, Some(n));
        }
        if n == n_max {
            break (EscapeStatus::Bounded, None);
        }
        z = z.exp() + kappa;
        n += 1;
    };
    EscapeResult { status, escape_index, final_value: z, orbit }
}

/// Values `E^0(κ) … E^n(κ)` with their κ-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitWithDerivative {
    pub values: Vec<ComplexPoint>,
    pub derivs: Vec<ComplexPoint>,
    /// Set when the overflow guard (or a non-finite derivative) stopped the
    /// recursion before `n_max`.
    pub clamped: bool,
}

/// Singular orbit together with `(E^n)'(κ)` via
/// `(E^{n+1})' = exp(E^n)·(E^n)' + 1`, seeded with `(E^0)' = 1`.
pub fn singular_orbit_with_derivative(kappa: ComplexPoint, n_max: usize) -> OrbitWithDerivative {
    let mut values = vec![kappa];
    let mut derivs = vec![ComplexPoint::new(1.0, 0.0)];
    let mut clamped = false;
    for k in 0..n_max {
        let z = values[k];
        if z.re > OVERFLOW_GUARD {
            clamped = true;
            break;
        }
        let e = z.exp();
        let next = e * derivs[k] + 1.0;
        if !(next.re.is_finite() && next.im.is_finite()) {
            clamped = true;
            break;
        }
        values.push(e + kappa);
        derivs.push(next);
    }
    OrbitWithDerivative { values, derivs, clamped }
}

/// `F(t) = e^t - t`.
pub fn potential_step(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::NegativePotential(t));
    }
    if t > OVERFLOW_GUARD {
        return Err(Error::Overflow(t));
    }
    Ok(t.exp() - t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialIterate {
    /// The last iterate that could be computed.
    pub value: f64,
    /// `Some(k)` when `F^{∘k}(t)` would have required exponentiating a
    /// value above the guard.
    pub clamped_at: Option<usize>,
}

/// `F^{∘n}(t)`, stopping at the overflow guard.
pub fn potential_iter(t: f64, n: usize) -> Result<PotentialIterate> {
    if !(t >= 0.0) {
        return Err(Error::NegativePotential(t));
    }
    let mut value = t;
    for k in 1..=n {
        if value > OVERFLOW_GUARD {
            return Ok(PotentialIterate { value, clamped_at: Some(k) });
        }
        value = value.exp() - value;
    }
    Ok(PotentialIterate { value, clamped_at: None })
}
