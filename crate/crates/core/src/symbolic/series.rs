//! The material-derivative rules and the series they generate.
//!
//! With `D = ∂_t + u·∇` and `Dy = 0`:
//! - `D(∇D^j u) = ∇D^{j+1}u − ∇D^j u·∇u`, `D(∇y) = −∇y·∇u`
//! - `div(Df) = D div f + tr(∇f·∇u)`, `as(∇Df) = D as(∇f) + as(∇f·∇u)`
//! - `D(∇^s ρ{v…}) = ∇^{s+1}ρ{u, v…} + Σ ∇^s ρ{…, Dv_i, …}`

use super::{Factor, Monomial, Shape, SymbolicExpr};
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use Factor::*;

/// Order cap for the matrix and boundary series (term count grows like 2^k).
pub const SERIES_CAP: usize = 8;
/// Order cap for the circulation kernel (linear growth).
pub const KERNEL_CAP: usize = 20;

fn check_order(k: usize, cap: usize) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidArgument("series order must be at least 1"))
    } else if k > cap {
        Err(Error::OrderTooLarge { order: k, cap })
    } else {
        Ok(())
    }
}

fn push(out: &mut SymbolicExpr, c: &BigInt, shape: Shape, f: Vec<Factor>) {
    out.add_term(c.clone(), Monomial::new(shape, f));
}

fn splice(f: &[Factor], i: usize, with: &[Factor]) -> Vec<Factor> {
    let mut v = Vec::with_capacity(f.len() + with.len());
    v.extend_from_slice(&f[..i]);
    v.extend_from_slice(with);
    v.extend_from_slice(&f[i + 1..]);
    v
}

fn d_vector(x: Factor) -> Factor {
    match x {
        DU(j) => DU(j + 1),
        Psi(j) => Psi(j + 1),
        other => other,
    }
}

/// Applies `D` termwise by the product rule.
pub fn material_derivative(expr: &SymbolicExpr) -> Result<SymbolicExpr> {
    expr.validate()?;
    let mut out = SymbolicExpr::new();
    for (m, c) in expr.terms() {
        let f = &m.factors;
        let neg = -c;
        match m.shape {
            Shape::Trace | Shape::Asym | Shape::Matrix => {
                for (i, &x) in f.iter().enumerate() {
                    match x {
                        GradY => push(&mut out, &neg, m.shape, splice(f, i, &[GradY, GradDU(0)])),
                        GradDU(j) => {
                            push(&mut out, c, m.shape, splice(f, i, &[GradDU(j + 1)]));
                            push(&mut out, &neg, m.shape, splice(f, i, &[GradDU(j), GradDU(0)]));
                        }
                        _ => unreachable!("validated"),
                    }
                }
            }
            Shape::Vector => {
                // Aᵀ factors: D(Aᵀ) = (DA)ᵀ, and (A·∇u)ᵀ = ∇uᵀ·Aᵀ
                let last = f.len() - 1;
                for (i, &x) in f.iter().enumerate() {
                    match x {
                        GradY => push(&mut out, &neg, m.shape, splice(f, i, &[GradDU(0), GradY])),
                        GradDU(j) => {
                            push(&mut out, c, m.shape, splice(f, i, &[GradDU(j + 1)]));
                            push(&mut out, &neg, m.shape, splice(f, i, &[GradDU(0), GradDU(j)]));
                        }
                        v if i == last => push(&mut out, c, m.shape, splice(f, i, &[d_vector(v)])),
                        _ => unreachable!("validated"),
                    }
                }
            }
            Shape::Boundary => {
                let HessRho(s) = f[0] else { unreachable!("validated") };
                let mut grown = vec![HessRho(s + 1), DU(0)];
                grown.extend_from_slice(&f[1..]);
                push(&mut out, c, m.shape, grown);
                for i in 1..f.len() {
                    push(&mut out, c, m.shape, splice(f, i, &[d_vector(f[i])]));
                }
            }
        }
    }
    Ok(out)
}

/// `div D^k u` as traced products of `∇D^j u`, built from `div u = 0`.
pub fn div_series(k: usize) -> Result<SymbolicExpr> {
    check_order(k, SERIES_CAP)?;
    let mut e = SymbolicExpr::new();
    for j in 0..k {
        e = material_derivative(&e)?;
        push(&mut e, &BigInt::one(), Shape::Trace, vec![GradDU(j), GradDU(0)]);
    }
    Ok(e)
}

/// `curl D^k u` as antisymmetrised products, built from `as ∇u = as ∇y`.
pub fn curl_series(k: usize) -> Result<SymbolicExpr> {
    check_order(k, SERIES_CAP)?;
    let mut e = SymbolicExpr::single(1, Shape::Asym, vec![GradY]);
    for j in 0..k {
        e = material_derivative(&e)?;
        push(&mut e, &BigInt::one(), Shape::Asym, vec![GradDU(j), GradDU(0)]);
    }
    Ok(e)
}

/// `n·D^k u` on the boundary, from `D^k(∇ρ·u) = 0` solved for the
/// `∇ρ·D^k u` term.
pub fn normal_trace_series(k: usize) -> Result<SymbolicExpr> {
    check_order(k, SERIES_CAP)?;
    let mut e = SymbolicExpr::single(1, Shape::Boundary, vec![HessRho(1), DU(0)]);
    for _ in 0..k {
        e = material_derivative(&e)?;
    }
    let lead = Monomial::new(Shape::Boundary, vec![HessRho(1), DU(k)]);
    if !e.coefficient(&lead).is_one() {
        return Err(Error::MalformedExpr("leading normal term lost".into()));
    }
    let mut out = SymbolicExpr::new();
    for (m, c) in e.terms() {
        if *m != lead {
            out.add_term(-c, m.clone());
        }
    }
    Ok(out)
}

/// `K^k[u, y−u]` with `Π D^k u = Π K^k`: from `Du = ∇P + ∇uᵀ(y−u)`, each
/// step differentiates, commutes `D` past the gradient part
/// (`D∇P = ∇DP − ∇uᵀ∇P`, `∇P = D^k u − K^k`) and rewrites
/// `D^j u = −D^j(y−u)` for `j ≥ 1`. Products of two or more matrices cancel;
/// that is checked rather than assumed.
pub fn kernel_series(k: usize) -> Result<SymbolicExpr> {
    check_order(k, KERNEL_CAP)?;
    let mut e = SymbolicExpr::single(1, Shape::Vector, vec![GradDU(0), Psi(0)]);
    for j in 1..k {
        let mut next = material_derivative(&e)?;
        push(&mut next, &-BigInt::one(), Shape::Vector, vec![GradDU(0), DU(j)]);
        for (m, c) in e.terms() {
            let mut f = vec![GradDU(0)];
            f.extend_from_slice(&m.factors);
            push(&mut next, c, Shape::Vector, f);
        }
        e = SymbolicExpr::new();
        for (m, c) in next.terms() {
            let mut f = m.factors.clone();
            let last = f.len() - 1;
            let mut c = c.clone();
            if let DU(i) = f[last] {
                if i >= 1 {
                    f[last] = Psi(i);
                    c = -c;
                }
            }
            if f.len() != 2 {
                return Err(Error::MalformedExpr("kernel closure failed".into()));
            }
            e.add_term(c, Monomial::new(Shape::Vector, f));
        }
    }
    Ok(e)
}

/// `c_{k,r}` for `r = 1..=k` in `K^k = Σ c_{k,r} ∇(D^{r−1}u)ᵀ D^{k−r}(y−u)`.
pub fn circulation_kernel(k: usize) -> Result<Vec<BigInt>> {
    let e = kernel_series(k)?;
    let coeffs: Vec<BigInt> =
        (1..=k).map(|r| e.coefficient(&Monomial::new(Shape::Vector, vec![GradDU(r - 1), Psi(k - r)]))).collect();
    let total = coeffs.iter().filter(|c| !c.is_zero()).count();
    if total != e.len() {
        return Err(Error::MalformedExpr("unexpected kernel term".into()));
    }
    Ok(coeffs)
}
