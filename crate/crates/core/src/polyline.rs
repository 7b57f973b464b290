use crate::{ComplexPoint, Error, ExternalAddress};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayKind {
    Dynamic,
    Parameter,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayEntry {
    pub t: f64,
    pub value: ComplexPoint,
    /// Functional-equation residual for dynamic rays, `|g_{κ,s}(t) - κ|`
    /// for parameter rays.
    pub residual: f64,
}

/// A sample that could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFailure {
    pub t: f64,
    pub error: Error,
}

/// Samples of a ray ordered by increasing `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPolyline {
    pub entries: Vec<RayEntry>,
    pub address: ExternalAddress,
    pub kind: RayKind,
    /// Set when failed samples were dropped (dynamic rays) or when the
    /// continuation stopped early (parameter rays).
    pub truncated: bool,
    pub failures: Vec<SampleFailure>,
}

impl RayPolyline {
    pub fn points(&self) -> Vec<ComplexPoint> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }
}

/// `samples` values from `t_min` to `t_max` in geometric progression, with
/// both endpoints exact.
pub(crate) fn geometric_ladder(t_min: f64, t_max: f64, samples: usize) -> Vec<f64> {
    let ratio = (t_max / t_min).ln();
    (0..samples)
        .map(|i| match i {
            0 => t_min,
            _ if i + 1 == samples => t_max,
            _ => t_min * (ratio * i as f64 / (samples - 1) as f64).exp(),
        })
        .collect()
}
