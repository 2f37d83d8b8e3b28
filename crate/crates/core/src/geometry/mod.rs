//! Computational domains, grids, discrete fields, the signed distance to the
//! boundary and homology loops.

mod calculus;
mod distance;
mod field;
mod grid;
mod interp;
mod loops;

pub use calculus::Jacobian;
pub use distance::{SignedDistance, SymTensor, S_MAX};
pub use field::{BoundaryTrace, ScalarField, VectorField};
pub use grid::{make_grid, make_grid_with, Grid2D, GridOptions, Radial};
pub use interp::PointEvaluator;
pub use loops::{circulation, HomologyLoop};

use crate::{Error, Result};
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

/// The three supported domains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Square torus `[0, period)²`.
    Torus { period: f64 },
    /// Disk of the given radius centred at the origin.
    Disk { radius: f64 },
    /// Annulus `r_in < |x| < r_out` centred at the origin.
    Annulus { r_in: f64, r_out: f64 },
}

impl Domain {
    pub fn torus(period: f64) -> Result<Self> {
        let d = Domain::Torus { period };
        d.validate()?;
        Ok(d)
    }

    pub fn disk(radius: f64) -> Result<Self> {
        let d = Domain::Disk { radius };
        d.validate()?;
        Ok(d)
    }

    pub fn annulus(r_in: f64, r_out: f64) -> Result<Self> {
        let d = Domain::Annulus { r_in, r_out };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Domain::Torus { period } if !(period > 0.0 && period.is_finite()) => {
                Err(Error::InvalidDomain("torus period must be positive"))
            }
            Domain::Disk { radius } if !(radius > 0.0 && radius.is_finite()) => {
                Err(Error::InvalidDomain("disk radius must be positive"))
            }
            Domain::Annulus { r_in, r_out } if !(r_in > 0.0 && r_in < r_out && r_out.is_finite()) => {
                Err(Error::InvalidDomain("annulus needs 0 < r_in < r_out"))
            }
            _ => Ok(()),
        }
    }

    /// Number of independent homology loops (the torus is handled by means).
    pub fn genus(&self) -> usize {
        match self {
            Domain::Annulus { .. } => 1,
            _ => 0,
        }
    }

    /// Length of the circulation / mean-value vector `c`.
    pub fn constraint_count(&self) -> usize {
        match self {
            Domain::Torus { .. } => 2,
            Domain::Disk { .. } => 0,
            Domain::Annulus { .. } => 1,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Domain::Torus { .. })
    }

    pub fn area(&self) -> f64 {
        match *self {
            Domain::Torus { period } => period * period,
            Domain::Disk { radius } => PI * radius * radius,
            Domain::Annulus { r_in, r_out } => PI * (r_out * r_out - r_in * r_in),
        }
    }

    /// Half the inradius; zero on the torus.
    pub fn collar_width(&self) -> f64 {
        match *self {
            Domain::Torus { .. } => 0.0,
            Domain::Disk { radius } => 0.5 * radius,
            Domain::Annulus { r_in, r_out } => 0.25 * (r_out - r_in),
        }
    }

    /// Whether `p` lies in the closed domain (always true on the torus).
    pub fn contains(&self, p: [f64; 2], slack: f64) -> bool {
        let r = p[0].hypot(p[1]);
        match *self {
            Domain::Torus { .. } => true,
            Domain::Disk { radius } => r <= radius + slack,
            Domain::Annulus { r_in, r_out } => r >= r_in - slack && r <= r_out + slack,
        }
    }

    /// The canonical loops: the mid-circle of the annulus, none otherwise.
    pub fn loops(&self, nodes: usize) -> alloc::vec::Vec<HomologyLoop> {
        match *self {
            Domain::Annulus { r_in, r_out } => {
                alloc::vec![HomologyLoop { center: [0.0, 0.0], radius: 0.5 * (r_in + r_out), orientation: 1.0, nodes }]
            }
            _ => alloc::vec::Vec::new(),
        }
    }

    /// `C_Γ = (Σ |Γ_i|²)^{1/2}` over the canonical loops.
    pub fn loop_length_norm(&self) -> f64 {
        let s = self.loops(8).iter().fold(0.0, |a, l| a + l.length() * l.length());
        s.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Domain::annulus(1.0, 0.5).is_err());
        assert!(Domain::disk(0.0).is_err());
        assert!(Domain::torus(-1.0).is_err());
        assert_eq!(Domain::annulus(0.5, 1.5).unwrap().genus(), 1);
        assert_eq!(Domain::disk(1.0).unwrap().constraint_count(), 0);
        assert_eq!(Domain::torus(1.0).unwrap().constraint_count(), 2);
    }

    #[test]
    fn loop_norm() {
        let a = Domain::annulus(0.5, 1.5).unwrap();
        assert!((a.loop_length_norm() - 2.0 * PI).abs() < 1e-14);
        assert_eq!(Domain::disk(1.0).unwrap().loop_length_norm(), 0.0);
    }
}
