use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::{ComplexPoint, Error, Result};

/// Side of a standard square.
pub const STANDARD_SIDE: f64 = FRAC_PI_2;

/// Open axis-parallel square of side `π/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardSquare {
    pub center: ComplexPoint,
}

impl StandardSquare {
    pub fn new(center: ComplexPoint) -> Self {
        Self { center }
    }

    pub fn side(&self) -> f64 {
        STANDARD_SIDE
    }

    /// Length of the diagonal, `π√2/2`.
    pub fn diameter(&self) -> f64 {
        STANDARD_SIDE * SQRT_2
    }

    pub fn min_re(&self) -> f64 {
        self.center.re - STANDARD_SIDE / 2.0
    }

    pub fn max_re(&self) -> f64 {
        self.center.re + STANDARD_SIDE / 2.0
    }

    pub fn corners(&self) -> [ComplexPoint; 4] {
        corners(self.center, STANDARD_SIDE)
    }

    pub fn contains(&self, z: ComplexPoint) -> bool {
        inside(self.center, STANDARD_SIDE, z)
    }

    pub fn double(&self) -> DoubleSquare {
        DoubleSquare { center: self.center }
    }
}

/// Open square of side `π` around a standard square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleSquare {
    pub center: ComplexPoint,
}

impl DoubleSquare {
    pub fn side(&self) -> f64 {
        PI
    }

    pub fn corners(&self) -> [ComplexPoint; 4] {
        corners(self.center, PI)
    }

    pub fn contains(&self, z: ComplexPoint) -> bool {
        inside(self.center, PI, z)
    }
}

fn corners(c: ComplexPoint, side: f64) -> [ComplexPoint; 4] {
    let r = side / 2.0;
    [
        ComplexPoint::new(c.re - r, c.im - r),
        ComplexPoint::new(c.re + r, c.im - r),
        ComplexPoint::new(c.re + r, c.im + r),
        ComplexPoint::new(c.re - r, c.im + r),
    ]
}

fn inside(c: ComplexPoint, side: f64, z: ComplexPoint) -> bool {
    let r = side / 2.0;
    (z.re - c.re).abs() < r && (z.im - c.im).abs() < r
}

/// Truncated parabola `P_{p,ξ} = {x + iy : x > ξ, |y| < x^{1/p}}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolaRegion {
    p: f64,
    xi: f64,
}

impl ParabolaRegion {
    pub fn new(p: f64, xi: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::invalid(format!("parabola exponent must exceed 1, got {p}")));
        }
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::invalid(format!("parabola floor must be positive, got {xi}")));
        }
        Ok(Self { p, xi })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Half-width `x^{1/p}` at real part `x`.
    pub fn half_width(&self, x: f64) -> f64 {
        x.powf(1.0 / self.p)
    }

    pub fn contains(&self, z: ComplexPoint) -> bool {
        z.re > self.xi && z.im.abs() < self.half_width(z.re)
    }

    /// The region is convex, so a square lies inside when its corners do.
    pub fn contains_square(&self, square: &StandardSquare) -> bool {
        square.corners().iter().all(|&z| self.contains(z))
    }
}

pub fn parabola_contains(region: &ParabolaRegion, z: ComplexPoint) -> bool {
    region.contains(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> ComplexPoint {
        ComplexPoint::new(re, im)
    }

    #[test]
    fn parabola_examples() {
        let r = ParabolaRegion::new(2.0, 1.0).unwrap();
        assert!(r.contains(c(10.0, 3.0)));
        assert!(!r.contains(c(10.0, 4.0)));
        assert!(!r.contains(c(1.0, 0.0)));
        assert!(!r.contains(c(0.5, 0.0)));
        assert!(ParabolaRegion::new(1.0, 1.0).is_err());
        assert!(ParabolaRegion::new(2.0, 0.0).is_err());
    }

    #[test]
    fn squares() {
        let q = StandardSquare::new(c(5.0 + FRAC_PI_2 / 2.0, 0.0));
        assert!((q.diameter() - 2.2214).abs() < 1e-4);
        assert_eq!(q.min_re(), 5.0);
        assert!(q.contains(q.center));
        assert!(!q.contains(c(5.0, 0.0)));
        let d = q.double();
        assert!(d.contains(c(5.0, 0.0)));
        assert_eq!(d.center, q.center);
        assert_eq!(d.side(), 2.0 * q.side());
    }

    #[test]
    fn root_square_inside_parabola() {
        let q = StandardSquare::new(c(20.0 + FRAC_PI_2 / 2.0, 0.0));
        assert!(ParabolaRegion::new(2.0, 4.0).unwrap().contains_square(&q));
    }
}
