//! Named, seeded initial data.

use crate::geometry::{Domain, Grid2D, ScalarField, VectorField};
use crate::{Error, Result};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Density profiles for the porous-medium embedding `y = −(0, ρ0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmProfile {
    /// Stably stratified layers with a tilted perturbation.
    Layers,
    /// A heavy smooth blob above lighter fluid.
    Bubble,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    /// A gradient field, hence a steady state.
    GradientSteady,
    /// `y0 = R_θ x` (disk and annulus).
    Rotation { theta: f64 },
    IpmEmbed { profile: IpmProfile },
    RandomSmooth { seed: u64, decay: f64 },
    /// [`random_tangent_field`].
    RandomTangent { seed: u64, decay: f64 },
    /// A divergence-free field tangent to the boundary.
    Solenoidal,
}

/// Wavenumber scale: one period across the torus, one half-wave across the
/// outer diameter otherwise.
fn base_wavenumber(domain: &Domain) -> f64 {
    match *domain {
        Domain::Torus { period } => 2.0 * PI / period,
        Domain::Disk { radius } => PI / (2.0 * radius),
        Domain::Annulus { r_out, .. } => PI / (2.0 * r_out),
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// A random smooth trigonometric vector field with `|k|_∞ ≤ 3` and
/// amplitudes `exp(−decay |k|)`, scaled to unit sup-norm on the grid.
pub fn random_smooth_field(grid: &Arc<Grid2D>, seed: u64, decay: f64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = base_wavenumber(grid.domain());
    let mut modes: Vec<([f64; 2], [f64; 4])> = Vec::new();
    for k1 in -3i32..=3 {
        for k2 in -3i32..=3 {
            let kk = ((k1 * k1 + k2 * k2) as f64).sqrt();
            let amp = (-decay * kk).exp();
            let c = [normal(&mut rng) * amp, normal(&mut rng) * amp, normal(&mut rng) * amp, normal(&mut rng) * amp];
            modes.push(([s * k1 as f64, s * k2 as f64], c));
        }
    }
    let v = VectorField::from_fn(grid, |x, y| {
        let mut out = [0.0; 2];
        for (k, c) in &modes {
            let ph = k[0] * x + k[1] * y;
            out[0] += c[0] * ph.cos() + c[1] * ph.sin();
            out[1] += c[2] * ph.cos() + c[3] * ph.sin();
        }
        out
    });
    let m = v.max_component();
    if m > 0.0 {
        v.scale(1.0 / m)
    } else {
        v
    }
}

/// A random smooth field with vanishing normal trace: the normal part is
/// removed with a weight `w(r²)` that equals `1/r²` on every boundary circle.
/// On the torus this is [`random_smooth_field`].
pub fn random_tangent_field(grid: &Arc<Grid2D>, seed: u64, decay: f64) -> VectorField {
    let g = random_smooth_field(grid, seed, decay);
    let (w0, w1, r0) = match *grid.domain() {
        Domain::Torus { .. } => return g,
        Domain::Disk { radius } => (1.0 / (radius * radius), 0.0, 0.0),
        Domain::Annulus { r_in, r_out } => {
            let (a, b) = (r_in * r_in, r_out * r_out);
            (1.0 / a, (1.0 / b - 1.0 / a) / (b - a), a)
        }
    };
    let (c1, c2) = (g.comp(0), g.comp(1));
    let (mut u1, mut u2) = (c1.to_vec(), c2.to_vec());
    for k in 0..grid.len() {
        let [x, y] = grid.point(k);
        let w = w0 + w1 * (x * x + y * y - r0);
        let gx = w * (c1[k] * x + c2[k] * y);
        u1[k] -= gx * x;
        u2[k] -= gx * y;
    }
    VectorField::new(grid, u1, u2)
}

/// A random smooth scalar potential, same construction as the fields.
pub fn random_smooth_scalar(grid: &Arc<Grid2D>, seed: u64, decay: f64) -> ScalarField {
    random_smooth_field(grid, seed, decay).component(0)
}

pub fn initial_field(grid: &Arc<Grid2D>, preset: Preset) -> Result<VectorField> {
    let s = base_wavenumber(grid.domain());
    let torus = grid.domain().is_torus();
    match preset {
        Preset::GradientSteady => Ok(if torus {
            // ∇[cos(s x) sin(2 s y) + 0.3 sin(s x + s y)]
            VectorField::from_fn(grid, move |x, y| {
                let c = 0.3 * (s * x + s * y).cos();
                [-s * (s * x).sin() * (2.0 * s * y).sin() + s * c, 2.0 * s * (s * x).cos() * (2.0 * s * y).cos() + s * c]
            })
        } else {
            // ∇ of a quadratic potential, reproduced exactly by the solvers
            VectorField::from_fn(grid, |x, y| [1.2 * x + 0.1 * y, 0.8 * y + 0.1 * x])
        }),
        Preset::Rotation { theta } => {
            if torus {
                return Err(Error::WrongDomain("rotation data need a bounded domain"));
            }
            let (c, sn) = (theta.cos(), theta.sin());
            Ok(VectorField::from_fn(grid, move |x, y| [c * x - sn * y, sn * x + c * y]))
        }
        Preset::IpmEmbed { profile } => Ok(VectorField::from_fn(grid, move |x, y| {
            let rho = match profile {
                IpmProfile::Layers => -(s * y).cos() + 0.4 * (s * x).sin() * (s * y).sin(),
                IpmProfile::Bubble => {
                    let (a, b) = ((s * x).cos(), (s * y - 0.5).cos());
                    ((a + b) * 1.5).exp() / 20.0
                }
            };
            [0.0, -rho]
        })),
        Preset::RandomSmooth { seed, decay } => Ok(random_smooth_field(grid, seed, decay)),
        Preset::RandomTangent { seed, decay } => Ok(random_tangent_field(grid, seed, decay)),
        Preset::Solenoidal => Ok(if torus {
            // ∇⊥ of sin(s x) sin(s y) + cos(2 s y)
            VectorField::from_fn(grid, move |x, y| {
                [-(s * (s * x).sin() * (s * y).cos() - 2.0 * s * (2.0 * s * y).sin()), s * (s * x).cos() * (s * y).sin()]
            })
        } else {
            // ∇⊥ψ with ψ = (r_out² − r²)(r² − r_in²)(1 + x/2): constant on each
            // boundary circle
            let (a2, b2) = match *grid.domain() {
                Domain::Disk { radius } => (radius * radius, 0.0),
                Domain::Annulus { r_in, r_out } => (r_out * r_out, r_in * r_in),
                Domain::Torus { .. } => unreachable!(),
            };
            let bounded = matches!(grid.domain(), Domain::Annulus { .. });
            VectorField::from_fn(grid, move |x, y| {
                let r2 = x * x + y * y;
                let (q, dq) = if bounded {
                    ((a2 - r2) * (r2 - b2), a2 + b2 - 2.0 * r2)
                } else {
                    (a2 - r2, -1.0)
                };
                // ∂ψ/∂x, ∂ψ/∂y with ∂q/∂x = 2x·dq
                let g = 1.0 + 0.5 * x;
                let px = 2.0 * x * dq * g + q * 0.5;
                let py = 2.0 * y * dq * g;
                [-py, px]
            })
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_grid;

    #[test]
    fn seeded_reproducible() {
        let g = make_grid(Domain::torus(2.0 * PI).unwrap(), (16, 16)).unwrap();
        let a = random_smooth_field(&g, 7, 0.5);
        let b = random_smooth_field(&g, 7, 0.5);
        let c = random_smooth_field(&g, 8, 0.5);
        assert_eq!(a.comp(0), b.comp(0));
        assert_ne!(a.comp(0), c.comp(0));
        assert!((a.max_component() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn solenoidal_is_tangent_and_divergence_free() {
        for d in [Domain::disk(1.0).unwrap(), Domain::annulus(0.5, 1.5).unwrap()] {
            let g = make_grid(d, (32, 32)).unwrap();
            let v = initial_field(&g, Preset::Solenoidal).unwrap();
            assert!(v.normal_trace().unwrap().max_abs() < 1e-12);
            assert!(v.divergence().max_abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_needs_boundary() {
        let g = make_grid(Domain::torus(1.0).unwrap(), (8, 8)).unwrap();
        assert!(initial_field(&g, Preset::Rotation { theta: 0.3 }).is_err());
    }

    #[test]
    fn ipm_first_component_zero() {
        let g = make_grid(Domain::torus(2.0 * PI).unwrap(), (16, 16)).unwrap();
        let v = initial_field(&g, Preset::IpmEmbed { profile: IpmProfile::Bubble }).unwrap();
        assert!(v.comp(0).iter().all(|&x| x == 0.0));
    }
}
