//! Standard-square covering tree.
//!
//! A parent square `Q` is pushed forward by `z ↦ e^z + κ'` with `|κ'| ≤ M`.
//! The image lies in real parts `(e^{min Re Q}/2, e^{max Re Q} + M)`; its
//! intersection with `P_{p,ξ}` is covered by the lattice squares of side
//! `π/2` anchored at the origin that meet it. A child's chain derivative is
//! the parent's times `Re(center)`, a lower bound for `|e^{z_S}|` at the
//! preimage of the child's center, and its diameter estimate is
//! `K·(π√2/2)/chain`.
//!
//! Children of one lattice column share their real range and chain
//! derivative, so elements are blocks: runs of consecutive columns with the
//! same number of rows, optionally repeated `multiplicity` times. Hausdorff
//! sums are evaluated in log space with an Euler-Maclaurin tail.

use std::f64::consts::LN_2;

use rayon::prelude::*;

use super::geometry::{ParabolaRegion, StandardSquare, STANDARD_SIDE};
use super::tower::Tower;
use crate::{ComplexPoint, Error, Result, OVERFLOW_GUARD};

const H: f64 = STANDARD_SIDE;

pub const DEFAULT_K_KOEBE: f64 = 4.0;
pub const DEFAULT_KAPPA_BOUND: f64 = 10.0;

/// Largest lattice column index handled exactly (`2^53`).
const MAX_COLUMN: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverConfig {
    /// Distortion allowance applied to every diameter estimate.
    pub k_koebe: f64,
    /// Refinement stops with [`Error::GenerationCap`] beyond this many blocks.
    pub block_budget: usize,
}

impl Default for CoverConfig {
    fn default() -> Self {
        Self { k_koebe: DEFAULT_K_KOEBE, block_budget: 1_000_000 }
    }
}

/// `columns × rows` lattice squares, repeated `multiplicity` times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverElement {
    /// First column, row closest to the real axis from above.
    pub square: StandardSquare,
    pub columns: u64,
    pub rows: u64,
    pub multiplicity: u128,
    /// Infimum of the real parts actually covered.
    pub min_re: f64,
    /// `ln` of the parent's chain derivative.
    pub ln_chain_base: f64,
    /// Whether the chain derivative of a column is `e^{ln_chain_base}·Re(center)`
    /// (children) or just `e^{ln_chain_base}` (root).
    pub scales: bool,
}

impl CoverElement {
    pub fn count(&self) -> Option<u128> {
        self.multiplicity.checked_mul(self.columns as u128 * self.rows as u128)
    }

    fn column_center(&self, c: u64) -> f64 {
        self.square.center.re + c as f64 * H
    }

    fn ln_chain_at(&self, c: u64) -> f64 {
        if self.scales {
            self.ln_chain_base + self.column_center(c).ln()
        } else {
            self.ln_chain_base
        }
    }

    /// Chain derivative of the anchor square.
    pub fn chain_derivative(&self) -> f64 {
        self.ln_chain_at(0).exp()
    }

    /// Diameter estimate of the anchor square.
    pub fn diam_estimate(&self, k_koebe: f64) -> f64 {
        k_koebe * self.square.diameter() / self.chain_derivative()
    }

    fn right_edge(&self) -> f64 {
        self.column_center(self.columns - 1) + H / 2.0
    }

    /// `ln Σ diam^d` over the squares of this element.
    fn ln_sum(&self, d: f64, k_koebe: f64) -> f64 {
        let ln_scale = (self.multiplicity as f64).ln() + (self.rows as f64).ln()
            + d * ((k_koebe * self.square.diameter()).ln() - self.ln_chain_base);
        if self.scales {
            let x0 = self.square.center.re / H - 0.5;
            ln_scale - d * H.ln() + ln_power_sum(x0, self.columns, d)
        } else {
            ln_scale + (self.columns as f64).ln()
        }
    }
}

/// One generation of the covering tree.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverGeneration {
    pub generation: usize,
    pub elements: Vec<CoverElement>,
    pub config: CoverConfig,
    /// Largest `children(Q) / N(min Re Q)` over the parents of this
    /// generation; absent for the root.
    pub max_children_ratio: Option<f64>,
}

impl CoverGeneration {
    /// Minimal real part `ξ_n` over the generation.
    pub fn min_re(&self) -> f64 {
        self.elements.iter().map(|e| e.min_re).fold(f64::INFINITY, f64::min)
    }

    /// Total number of squares, `None` past `u128`.
    pub fn square_count(&self) -> Option<u128> {
        self.elements.iter().try_fold(0u128, |acc, e| acc.checked_add(e.count()?))
    }

    pub fn ln_hausdorff_sum(&self, d: f64) -> f64 {
        let terms: Vec<f64> = self.elements.par_iter().map(|e| e.ln_sum(d, self.config.k_koebe)).collect();
        log_sum_exp(&terms)
    }

    /// `Σ diam^d` over all squares.
    pub fn hausdorff_sum(&self, d: f64) -> f64 {
        self.ln_hausdorff_sum(d).exp()
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `ln Σ_{c=0}^{n-1} (x0 + c + 1/2)^{-d}` for `x0 ≥ 0`, `n ≥ 1`.
///
/// The first 32 terms are summed directly, the rest by Euler-Maclaurin with
/// the `B_2` and `B_4` corrections. Everything is scaled by
/// `a^{-d}`, `a = x0 + 1/2`, to stay in range.
pub(crate) fn ln_power_sum(x0: f64, n: u64, d: f64) -> f64 {
    let a = x0 + 0.5;
    let f = |x: f64| (x / a).powf(-d);
    let direct = n.min(32);
    let mut sum: f64 = (0..direct).map(|c| f(a + c as f64)).sum();
    if n > direct {
        let lo = a + direct as f64;
        let hi = a + (n - 1) as f64;
        let ratio_ln = (hi / lo).ln();
        let ul = lo / a;
        let integral = if d == 1.0 {
            a * ratio_ln
        } else {
            a * ul.powf(1.0 - d) * ((1.0 - d) * ratio_ln).exp_m1() / (1.0 - d)
        };
        let d1 = |x: f64| -d / a * (x / a).powf(-d - 1.0);
        let d3 = |x: f64| -d * (d + 1.0) * (d + 2.0) / a.powi(3) * (x / a).powf(-d - 3.0);
        sum += integral + 0.5 * (f(lo) + f(hi)) + (d1(hi) - d1(lo)) / 12.0 - (d3(hi) - d3(lo)) / 720.0;
    }
    sum.ln() - d * a.ln()
}

/// `N(ξ0) = (e^{π/2}e^{ξ0} + M - e^{ξ0}/2)·2(e^{π/(2p)}e^{ξ0/p} + 1)/(π/2)²`,
/// rounded up.
pub fn count_covering_squares(p: f64, xi0: f64, m: f64) -> Result<u64> {
    check_count_args(p, xi0, m)?;
    if xi0 + H > OVERFLOW_GUARD {
        return Err(Error::Overflow(xi0 + H));
    }
    let e = xi0.exp();
    let value = (H.exp() * e + m - e / 2.0) * 2.0 * ((H / p).exp() * (xi0 / p).exp() + 1.0) / (H * H);
    let rounded = value.ceil();
    if !(rounded < u64::MAX as f64) {
        return Err(Error::Overflow(rounded));
    }
    Ok(rounded as u64)
}

/// `ln N(ξ0)` without the overflow guard.
pub fn count_covering_squares_ln(p: f64, xi0: f64, m: f64) -> Result<f64> {
    check_count_args(p, xi0, m)?;
    let first = xi0 + (H.exp() - 0.5 + m * (-xi0).exp()).ln();
    let second = LN_2 + xi0 / p + ((H / p).exp() + (-xi0 / p).exp()).ln();
    Ok(first + second - 2.0 * H.ln())
}

fn check_count_args(p: f64, xi0: f64, m: f64) -> Result<()> {
    if !(p > 1.0) || !(xi0 > 0.0) || !(m >= 0.0) || !(p.is_finite() && xi0.is_finite() && m.is_finite()) {
        return Err(Error::invalid(format!("need p > 1, xi0 > 0, M >= 0; got {p}, {xi0}, {m}")));
    }
    Ok(())
}

pub fn build_cover_root(xi0: f64) -> Result<CoverGeneration> {
    build_cover_root_with(xi0, CoverConfig::default())
}

/// Generation 0: the standard square with real parts `(ξ0, ξ0 + π/2)` on
/// the real axis, chain derivative 1.
pub fn build_cover_root_with(xi0: f64, config: CoverConfig) -> Result<CoverGeneration> {
    if !(xi0 > 0.0) || !xi0.is_finite() {
        return Err(Error::invalid(format!("xi0 must be positive, got {xi0}")));
    }
    if !(config.k_koebe >= 1.0) {
        return Err(Error::invalid(format!("distortion allowance must be at least 1, got {}", config.k_koebe)));
    }
    let root = CoverElement {
        square: StandardSquare::new(ComplexPoint::new(xi0 + H / 2.0, 0.0)),
        columns: 1,
        rows: 1,
        multiplicity: 1,
        min_re: xi0,
        ln_chain_base: 0.0,
        scales: false,
    };
    Ok(CoverGeneration { generation: 0, elements: vec![root], config, max_children_ratio: None })
}

/// Maximal runs `(first, last, half_rows)` of lattice columns meeting the
/// region `{A < x < B, |y| < x^{1/p}}`.
fn column_blocks(a: f64, b: f64, p: f64) -> Vec<(u64, u64, u64)> {
    let first = (a / H).floor() as u64;
    let last = (b / H).ceil() as u64 - 1;
    let half_rows = |i: u64| (((i + 1) as f64 * H).min(b).powf(1.0 / p) / H).ceil() as u64;
    let mut blocks = Vec::new();
    let mut i = first;
    while i <= last {
        let k = half_rows(i);
        // Gallop, then bisect, for the last column with the same row count.
        let mut good = i;
        let mut step = 1;
        while good + step <= last && half_rows(good + step) == k {
            good += step;
            step *= 2;
        }
        let mut bad = (good + step).min(last + 1);
        while bad - good > 1 {
            let mid = good + (bad - good) / 2;
            if half_rows(mid) == k {
                good = mid;
            } else {
                bad = mid;
            }
        }
        blocks.push((i, good, k));
        i = good + 1;
    }
    blocks
}

fn estimated_blocks(a: f64, b: f64, p: f64) -> f64 {
    (b.powf(1.0 / p) / H).ceil() - (a.powf(1.0 / p) / H).floor() + 1.0
}

struct ColumnRefinement {
    children: Vec<CoverElement>,
    ratio: f64,
}

/// Children of every square in column `c` of `parent`.
fn refine_column(
    parent: &CoverElement,
    c: u64,
    region: &ParabolaRegion,
    m: f64,
    multiplicity: u128,
) -> Result<ColumnRefinement> {
    let left = parent.column_center(c) - H / 2.0;
    let min_re = if c == 0 { parent.min_re.max(left) } else { left };
    let a = (min_re.exp() / 2.0).max(region.xi());
    let b = (left + H).exp() + m;
    let ln_chain = parent.ln_chain_at(c);
    let mut children = Vec::new();
    let mut count = 0u128;
    if a < b {
        for (first, last, k) in column_blocks(a, b, region.p()) {
            let child = CoverElement {
                square: StandardSquare::new(ComplexPoint::new((first as f64 + 0.5) * H, H / 2.0)),
                columns: last - first + 1,
                rows: 2 * k,
                multiplicity,
                min_re: (first as f64 * H).max(a),
                ln_chain_base: ln_chain,
                scales: true,
            };
            count += child.columns as u128 * child.rows as u128;
            children.push(child);
        }
    }
    let ratio = ((count as f64).ln() - count_covering_squares_ln(region.p(), min_re, m)?).exp();
    Ok(ColumnRefinement { children, ratio })
}

/// Pulls every element of `gen` back one step (see the module docs).
pub fn refine_cover(gen: &CoverGeneration, region: &ParabolaRegion, kappa_bound: f64) -> Result<CoverGeneration> {
    let m = kappa_bound;
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::invalid(format!("kappa bound must be non-negative, got {m}")));
    }
    let mut estimate = 0.0;
    for e in &gen.elements {
        if !(e.min_re > region.xi()) {
            return Err(Error::invalid(format!(
                "element with real parts from {} is not inside the region floor {}",
                e.min_re,
                region.xi()
            )));
        }
        let right = e.right_edge();
        if right > OVERFLOW_GUARD {
            return Err(Error::GenerationCap(format!("parent real part {right:e} exceeds the overflow guard")));
        }
        let b = right.exp() + m;
        if b / H > MAX_COLUMN {
            return Err(Error::GenerationCap(format!("child real part {b:e} is beyond exact lattice indexing")));
        }
        for c in 0..e.columns {
            let left = e.column_center(c) - H / 2.0;
            estimate += estimated_blocks((left.exp() / 2.0).max(region.xi()), (left + H).exp() + m, region.p());
        }
        if estimate > gen.config.block_budget as f64 {
            return Err(Error::GenerationCap(format!(
                "more than {} blocks needed for generation {}",
                gen.config.block_budget,
                gen.generation + 1
            )));
        }
    }
    let per_parent: Vec<Result<Vec<ColumnRefinement>>> = gen
        .elements
        .par_iter()
        .map(|e| {
            let multiplicity = e
                .multiplicity
                .checked_mul(e.rows as u128)
                .ok_or_else(|| Error::GenerationCap("multiplicity overflow".into()))?;
            (0..e.columns).map(|c| refine_column(e, c, region, m, multiplicity)).collect()
        })
        .collect();
    let mut elements = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for columns in per_parent {
        for column in columns? {
            max_ratio = max_ratio.max(column.ratio);
            elements.extend(column.children);
        }
    }
    if elements.is_empty() {
        return Err(Error::EmptyRefinement);
    }
    Ok(CoverGeneration {
        generation: gen.generation + 1,
        elements,
        config: gen.config,
        max_children_ratio: Some(max_ratio),
    })
}

pub fn hausdorff_sum(gen: &CoverGeneration, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::invalid(format!("exponent must be positive, got {d}")));
    }
    Ok(gen.hausdorff_sum(d))
}

/// Square count of a report row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SquareCount {
    Exact(u128),
    /// Analytic upper bound.
    AtMost(Tower),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverRow {
    pub generation: usize,
    pub count: SquareCount,
    /// `ξ_n`.
    pub min_re: Tower,
    /// `ln S_n(d)`, one per requested exponent.
    pub ln_sums: Vec<Tower>,
    pub analytic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverReport {
    pub p: f64,
    pub xi0: f64,
    pub kappa_bound: f64,
    pub ds: Vec<f64>,
    pub region: ParabolaRegion,
    pub rows: Vec<CoverRow>,
    /// Largest children-to-`N` ratio over the explicit refinements.
    pub max_children_ratio: Option<f64>,
    /// Why explicit refinement stopped, if it did.
    pub cap: Option<String>,
}

impl CoverReport {
    /// `S_0(d) > S_1(d) > …` over all rows, for the `i`-th exponent.
    pub fn strictly_decreasing(&self, i: usize) -> bool {
        self.rows.windows(2).all(|w| w[1].ln_sums[i] < w[0].ln_sums[i])
    }

    pub fn strictly_increasing(&self, i: usize) -> bool {
        self.rows.windows(2).all(|w| w[1].ln_sums[i] > w[0].ln_sums[i])
    }
}

/// `ln` of the analytic bound on `Σ_children diam^d / diam(parent)^d` for a
/// parent whose children have real parts above `A`, given `ln A`.
///
/// For `d > 1 + 1/p` this is an upper bound,
/// `(2/h²)A^e/(-e) + (2/h)A^{1-d}/(d-1) + 2(A^{1/p}/h + 1)A^{-d}`;
/// otherwise the lower bound `(2/h²)A^e(2^e - 1)/e` from the first doubling
/// of the real range, with `e = 1 + 1/p - d`.
pub fn ln_analytic_ratio(ln_a: Tower, p: f64, d: f64) -> Tower {
    let e = 1.0 + 1.0 / p - d;
    let l = ln_a.to_f64();
    if !l.is_finite() {
        return ln_a.scale(e);
    }
    let v = if e < 0.0 {
        let t1 = (2.0 / (H * H * -e)).ln() + e * l;
        let t2 = (2.0 / (H * (d - 1.0))).ln() + (1.0 - d) * l;
        let t3 = LN_2 + log_sum_exp(&[l / p - H.ln(), 0.0]) - d * l;
        log_sum_exp(&[t1, t2, t3])
    } else {
        let factor = if e == 0.0 { LN_2 } else { (2f64.powf(e) - 1.0) / e };
        (2.0 / (H * H)).ln() + e * l + factor.ln()
    };
    Tower::new(v)
}

/// Root, explicit refinements while the double-precision lattice allows,
/// then analytic rows up to `generations`.
pub fn run_cover_experiment(
    p: f64,
    xi0: f64,
    kappa_bound: f64,
    ds: &[f64],
    generations: usize,
    region_xi: Option<f64>,
    config: CoverConfig,
) -> Result<CoverReport> {
    if ds.is_empty() || ds.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::invalid("exponents must be positive"));
    }
    let region = ParabolaRegion::new(p, region_xi.unwrap_or(xi0 / 2.0))?;
    let mut gen = build_cover_root_with(xi0, config)?;
    let explicit_row = |g: &CoverGeneration| CoverRow {
        generation: g.generation,
        count: match g.square_count() {
            Some(n) => SquareCount::Exact(n),
            None => SquareCount::AtMost(Tower::new(f64::INFINITY)),
        },
        min_re: Tower::new(g.min_re()),
        ln_sums: ds.iter().map(|&d| Tower::new(g.ln_hausdorff_sum(d))).collect(),
        analytic: false,
    };
    let mut rows = vec![explicit_row(&gen)];
    let mut max_ratio: Option<f64> = None;
    let mut cap = None;
    for _ in 0..generations {
        if cap.is_none() {
            match refine_cover(&gen, &region, kappa_bound) {
                Ok(next) => {
                    if let Some(r) = next.max_children_ratio {
                        max_ratio = Some(max_ratio.map_or(r, |m| m.max(r)));
                    }
                    rows.push(explicit_row(&next));
                    gen = next;
                    continue;
                }
                Err(Error::GenerationCap(reason)) => cap = Some(reason),
                Err(e) => return Err(e),
            }
        }
        let prev = rows.last().expect("root row");
        let ln_a = prev.min_re.plus(Tower::new(-LN_2));
        let ln_prev_count = match prev.count {
            SquareCount::Exact(n) => Tower::new((n as f64).ln()),
            SquareCount::AtMost(t) => t.ln(),
        };
        let ln_n = match prev.min_re.to_f64() {
            x if x.is_finite() => Tower::new(count_covering_squares_ln(p, x, kappa_bound)?),
            _ => prev.min_re.scale(1.0 + 1.0 / p),
        };
        let ln_count = ln_prev_count.plus(ln_n);
        let row = CoverRow {
            generation: prev.generation + 1,
            count: SquareCount::AtMost(ln_count.plus(Tower::new(-LN_2)).exp_half()),
            min_re: prev.min_re.exp_half(),
            ln_sums: prev.ln_sums.iter().zip(ds).map(|(s, &d)| s.plus(ln_analytic_ratio(ln_a, p, d))).collect(),
            analytic: true,
        };
        rows.push(row);
    }
    Ok(CoverReport {
        p,
        xi0,
        kappa_bound,
        ds: ds.to_vec(),
        region,
        rows,
        max_children_ratio: max_ratio,
        cap,
    })
}
