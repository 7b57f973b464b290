use rayon::prelude::*;

use crate::family::singular_orbit;
use crate::{ComplexPoint, Error, Result};

/// `grid` evenly spaced values from `lo` to `hi`, endpoints exact.
///
/// Value `j` is `((g-1-j)·lo + j·hi)/(g-1)`, so reflecting the interval
/// negates the values exactly.
fn lattice(lo: f64, hi: f64, grid: usize) -> impl Fn(usize) -> f64 {
    let g = (grid - 1) as f64;
    move |j| ((g - j as f64) * lo + j as f64 * hi) / g
}

fn check_rect(lo: ComplexPoint, hi: ComplexPoint, grid: usize) -> Result<()> {
    if grid < 2 {
        return Err(Error::invalid(format!("grid must be at least 2, got {grid}")));
    }
    let ok = lo.re < hi.re && lo.im < hi.im && [lo.re, lo.im, hi.re, hi.im].iter().all(|v| v.is_finite());
    if !ok {
        return Err(Error::invalid(format!("degenerate rectangle {lo} .. {hi}")));
    }
    Ok(())
}

/// Escape index of every lattice parameter, row-major with the first row
/// at the largest imaginary part. `None` marks a bounded verdict.
pub fn escape_index_grid(
    lo: ComplexPoint,
    hi: ComplexPoint,
    grid: usize,
    n_max: usize,
    escape_re: f64,
) -> Result<Vec<Option<usize>>> {
    check_rect(lo, hi, grid)?;
    let re = lattice(lo.re, hi.re, grid);
    let im = lattice(lo.im, hi.im, grid);
    let rows: Vec<Vec<Option<usize>>> = (0..grid)
        .into_par_iter()
        .map(|row| {
            let y = im(grid - 1 - row);
            (0..grid)
                .map(|col| singular_orbit(ComplexPoint::new(re(col), y), n_max, escape_re).escape_index)
                .collect()
        })
        .collect();
    Ok(rows.concat())
}

/// Lattice parameters in the rectangle whose singular orbit escapes,
/// ordered by imaginary then real index.
pub fn escape_set_sample(
    lo: ComplexPoint,
    hi: ComplexPoint,
    grid: usize,
    n_max: usize,
    escape_re: f64,
) -> Result<Vec<ComplexPoint>> {
    check_rect(lo, hi, grid)?;
    let re = lattice(lo.re, hi.re, grid);
    let im = lattice(lo.im, hi.im, grid);
    let rows: Vec<Vec<ComplexPoint>> = (0..grid)
        .into_par_iter()
        .map(|j| {
            let y = im(j);
            (0..grid)
                .map(|i| ComplexPoint::new(re(i), y))
                .filter(|&kappa| singular_orbit(kappa, n_max, escape_re).escaped())
                .collect()
        })
        .collect();
    Ok(rows.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::DEFAULT_ESCAPE_RE;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    #[test]
    fn lattice_endpoints_and_reflection() {
        let f = lattice(-0.3, 0.7, 11);
        assert_eq!(f(0), -0.3);
        assert_eq!(f(10), 0.7);
        let g = lattice(-0.7, 0.3, 11);
        for j in 0..11 {
            assert_eq!(g(j), -f(10 - j));
        }
    }

    #[test]
    fn hyperbolic_neighbourhood_is_empty() {
        let pts = escape_set_sample(c(-2.1, -0.1), c(-1.9, 0.1), 20, 100, DEFAULT_ESCAPE_RE).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn unit_square_sample_reverifies() {
        let pts = escape_set_sample(c(0.0, 0.0), c(1.0, 1.0), 100, 100, DEFAULT_ESCAPE_RE).unwrap();
        assert!(!pts.is_empty());
        assert!(pts.iter().all(|&k| singular_orbit(k, 100, DEFAULT_ESCAPE_RE).escaped()));
    }

    #[test]
    fn reflected_rectangle_gives_conjugates() {
        let a = escape_set_sample(c(-1.0, 0.2), c(1.0, 3.1), 60, 60, DEFAULT_ESCAPE_RE).unwrap();
        let b = escape_set_sample(c(-1.0, -3.1), c(1.0, -0.2), 60, 60, DEFAULT_ESCAPE_RE).unwrap();
        let mut a: Vec<(u64, u64)> = a.iter().map(|z| (z.re.to_bits(), (-z.im).to_bits())).collect();
        let mut b: Vec<(u64, u64)> = b.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_rectangles() {
        assert!(escape_set_sample(c(1.0, 0.0), c(0.0, 1.0), 10, 10, 50.0).is_err());
        assert!(escape_index_grid(c(0.0, 0.0), c(1.0, 1.0), 1, 10, 50.0).is_err());
    }

    #[test]
    fn grid_top_row_is_max_imaginary() {
        let (lo, hi) = (c(-2.1, -0.1), c(0.5, 0.3));
        let g = escape_index_grid(lo, hi, 3, 100, DEFAULT_ESCAPE_RE).unwrap();
        assert_eq!(g.len(), 9);
        let re = [-2.1, -0.8, 0.5];
        for (row, im) in [0.3, 0.1, -0.1].into_iter().enumerate() {
            for (col, &x) in re.iter().enumerate() {
                let direct = singular_orbit(c(x, im), 100, DEFAULT_ESCAPE_RE).escape_index;
                assert_eq!(g[row * 3 + col], direct);
            }
        }
        assert!(g[0].is_none());
    }
}
