use rayon::prelude::*;

use crate::{ComplexPoint, Error, Result};

/// Counts and log-log fit of a box-counting ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountFit {
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    pub counts: Vec<usize>,
    /// Least-squares slope of `ln N(ε)` against `ln(1/ε)`.
    pub slope: f64,
    pub r_squared: f64,
}

/// Occupied cells of the `ε`-grid anchored at the origin. A point on a
/// cell boundary belongs to the cell whose lower-left corner it is.
pub fn box_count(points: &[ComplexPoint], epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::invalid(format!("box size must be positive, got {epsilon}")));
    }
    if points.is_empty() {
        return Err(Error::invalid("box counting needs at least one point"));
    }
    let mut cells: Vec<(i64, i64)> = points
        .par_iter()
        .map(|z| ((z.re / epsilon).floor() as i64, (z.im / epsilon).floor() as i64))
        .collect();
    cells.par_sort_unstable();
    cells.dedup();
    Ok(cells.len())
}

/// Box counts on `levels` geometrically spaced sizes from `eps_hi` down to
/// `eps_lo`, with a least-squares fit.
pub fn box_dimension(points: &[ComplexPoint], eps_hi: f64, eps_lo: f64, levels: usize) -> Result<BoxCountFit> {
    if !(eps_hi > eps_lo && eps_lo > 0.0) || !eps_hi.is_finite() {
        return Err(Error::invalid(format!("need eps_hi > eps_lo > 0, got {eps_hi} and {eps_lo}")));
    }
    if levels < 3 {
        return Err(Error::invalid(format!("at least 3 levels are required, got {levels}")));
    }
    let ratio = (eps_lo / eps_hi).ln();
    let epsilons: Vec<f64> = (0..levels)
        .map(|i| match i {
            0 => eps_hi,
            _ if i + 1 == levels => eps_lo,
            _ => eps_hi * (ratio * i as f64 / (levels - 1) as f64).exp(),
        })
        .collect();
    let counts = epsilons.iter().map(|&e| box_count(points, e)).collect::<Result<Vec<_>>>()?;
    if counts.iter().all(|&n| n == counts[0]) {
        return Err(Error::DegenerateFit(format!("all {levels} levels have {} boxes", counts[0])));
    }
    let xs: Vec<f64> = epsilons.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&n| (n as f64).ln()).collect();
    let (slope, r_squared) = least_squares(&xs, &ys);
    Ok(BoxCountFit { epsilons, counts, slope, r_squared })
}

/// Slope and coefficient of determination of the least-squares line.
fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r_squared)
}
