//! Exact term rewriting for iterated material derivatives.
//!
//! Terms are products over the alphabet `∇y, ∇D^j u, D^j u, D^j(y−u),
//! ∇^s ρ` with arbitrary-precision integer coefficients. Expressions are kept
//! in *ordered* form (factor lists exactly as produced by the product rule,
//! equal lists merged); [`SymbolicExpr::canonical`] additionally identifies
//! cyclic rotations under a trace and permutations of the slots of a
//! symmetric tensor. Coefficient bounds indexed by ordered multi-indices are
//! stated for the ordered form.

mod series;

pub use series::{
    circulation_kernel, curl_series, div_series, kernel_series, material_derivative, normal_trace_series, KERNEL_CAP,
    SERIES_CAP,
};

use crate::{Error, Result};
use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// One symbol of the alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    /// `∇y` (a matrix).
    GradY,
    /// `∇D^j u` (a matrix).
    GradDU(usize),
    /// `D^j u` (a vector).
    DU(usize),
    /// `D^j (y − u)` (a vector; only in kernel terms).
    Psi(usize),
    /// `∇^s ρ` (a symmetric `s`-tensor; `s = 1` is the normal).
    HessRho(usize),
}

impl Factor {
    pub fn is_matrix(self) -> bool {
        matches!(self, Factor::GradY | Factor::GradDU(_))
    }

    pub fn is_vector(self) -> bool {
        matches!(self, Factor::DU(_) | Factor::Psi(_))
    }

    /// Largest `D`-order this factor references (`None` for `∇y`, `∇^s ρ`).
    pub fn order(self) -> Option<usize> {
        match self {
            Factor::GradDU(j) | Factor::DU(j) | Factor::Psi(j) => Some(j),
            _ => None,
        }
    }

    pub fn token(self) -> String {
        match self {
            Factor::GradY => "GradY".into(),
            Factor::GradDU(j) => format!("GradDU({j})"),
            Factor::DU(j) => format!("DU({j})"),
            Factor::Psi(j) => format!("Psi({j})"),
            Factor::HessRho(s) => format!("HessRho({s})"),
        }
    }

    pub fn parse(tok: &str) -> Result<Self> {
        let bad = || Error::MalformedExpr(format!("unknown factor {tok}"));
        if tok == "GradY" {
            return Ok(Factor::GradY);
        }
        let open = tok.find('(').ok_or_else(bad)?;
        let arg: usize = tok[open + 1..].strip_suffix(')').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        match &tok[..open] {
            "GradDU" => Ok(Factor::GradDU(arg)),
            "DU" => Ok(Factor::DU(arg)),
            "Psi" => Ok(Factor::Psi(arg)),
            "HessRho" => Ok(Factor::HessRho(arg)),
            _ => Err(bad()),
        }
    }
}

/// How the factors of a term combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Shape {
    /// `tr(A1·A2···)`.
    Trace,
    /// `as(A1·A2···) = M − Mᵀ`.
    Asym,
    /// `A1·A2···`.
    Matrix,
    /// `∇^s ρ{v1, …, vs}`: first factor `HessRho(s)`, then `s` vectors.
    Boundary,
    /// `A1ᵀ·A2ᵀ···v`: matrices followed by one vector.
    Vector,
}

impl Shape {
    pub fn token(self) -> &'static str {
        match self {
            Shape::Trace => "trace",
            Shape::Asym => "asym",
            Shape::Matrix => "matrix",
            Shape::Boundary => "boundary",
            Shape::Vector => "vector",
        }
    }

    pub fn parse(tok: &str) -> Result<Self> {
        Ok(match tok {
            "trace" => Shape::Trace,
            "asym" => Shape::Asym,
            "matrix" => Shape::Matrix,
            "boundary" => Shape::Boundary,
            "vector" => Shape::Vector,
            _ => return Err(Error::MalformedExpr(format!("unknown shape {tok}"))),
        })
    }
}

/// Shape plus ordered factor list: the merge key of a term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub shape: Shape,
    pub factors: Vec<Factor>,
}

impl Monomial {
    pub fn new(shape: Shape, factors: Vec<Factor>) -> Self {
        Self { shape, factors }
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.factors;
        let bad = |why: &str| Err(Error::MalformedExpr(format!("{why}: {}", self.text())));
        match self.shape {
            Shape::Trace | Shape::Asym | Shape::Matrix => {
                if f.is_empty() || !f.iter().all(|x| x.is_matrix()) {
                    return bad("matrix product needs matrix factors");
                }
            }
            Shape::Boundary => match f.first() {
                Some(Factor::HessRho(s)) if *s >= 1 && f.len() == s + 1 && f[1..].iter().all(|x| x.is_vector()) => {}
                _ => return bad("boundary form needs HessRho(s) and s vector slots"),
            },
            Shape::Vector => match f.split_last() {
                Some((v, m)) if v.is_vector() && m.iter().all(|x| x.is_matrix()) => {}
                _ => return bad("vector product needs matrices then one vector"),
            },
        }
        Ok(())
    }

    /// Orders `α` of the `D`-dependent factors, in order.
    pub fn alpha(&self) -> Vec<usize> {
        self.factors.iter().filter_map(|f| f.order()).collect()
    }

    pub fn leads_with_grad_y(&self) -> bool {
        self.factors.first() == Some(&Factor::GradY)
    }

    /// Canonical representative: minimal cyclic rotation under a trace,
    /// sorted slots of a boundary form.
    pub fn canonical(&self) -> Monomial {
        match self.shape {
            Shape::Trace => {
                let n = self.factors.len();
                let best = (0..n)
                    .map(|r| {
                        let mut v = self.factors.clone();
                        v.rotate_left(r);
                        v
                    })
                    .min()
                    .unwrap_or_default();
                Monomial::new(Shape::Trace, best)
            }
            Shape::Boundary => {
                let mut v = self.factors.clone();
                v[1..].sort();
                Monomial::new(Shape::Boundary, v)
            }
            _ => self.clone(),
        }
    }

    pub fn text(&self) -> String {
        let mut s = String::from(self.shape.token());
        for f in &self.factors {
            s.push(' ');
            s.push_str(&f.token());
        }
        s
    }
}

/// A finite sum of monomials with non-zero exact integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolicExpr {
    terms: BTreeMap<Monomial, BigInt>,
}

impl SymbolicExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(coeff: impl Into<BigInt>, shape: Shape, factors: Vec<Factor>) -> Self {
        let mut e = Self::new();
        e.add_term(coeff.into(), Monomial::new(shape, factors));
        e
    }

    pub fn add_term(&mut self, coeff: BigInt, m: Monomial) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&mut self, other: &SymbolicExpr, scale: &BigInt) {
        for (m, c) in &other.terms {
            self.add_term(c * scale, m.clone());
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn validate(&self) -> Result<()> {
        self.terms.keys().try_for_each(|m| m.validate())
    }

    /// Like terms merged modulo trace cyclicity and slot symmetry.
    pub fn canonical(&self) -> SymbolicExpr {
        let mut e = SymbolicExpr::new();
        for (m, c) in &self.terms {
            e.add_term(c.clone(), m.canonical());
        }
        e
    }

    /// Highest `D`-order referenced by any factor.
    pub fn max_order(&self) -> Option<usize> {
        self.terms.keys().flat_map(|m| m.factors.iter().filter_map(|f| f.order())).max()
    }

    /// Deterministic text form, one term per line: coefficient, shape,
    /// factors.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (m, c) in &self.terms {
            let sign = if c.is_negative() { "" } else { "+" };
            s.push_str(&format!("{sign}{c} {}\n", m.text()));
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut e = SymbolicExpr::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let mut it = line.split_whitespace();
            let c: BigInt = it
                .next()
                .and_then(|t| t.trim_start_matches('+').parse().ok())
                .ok_or_else(|| Error::MalformedExpr(format!("bad coefficient in {line}")))?;
            let shape = Shape::parse(it.next().unwrap_or(""))?;
            let factors = it.map(Factor::parse).collect::<Result<Vec<_>>>()?;
            let m = Monomial::new(shape, factors);
            m.validate()?;
            e.add_term(c, m);
        }
        Ok(e)
    }
}

impl fmt::Display for SymbolicExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Which family a coefficient pattern refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    /// Products led by `∇y`, then `∇D^{α_i} u`.
    GradYLed,
    /// Products of `∇D^{α_i} u` only.
    Pure,
    /// `∇^s ρ{D^{α_1}u, …, D^{α_s}u}`.
    Boundary,
}

/// Coefficient of the (ordered) term with orders `alpha` in `group`; `s` is
/// the number of `D`-dependent factors and must equal `alpha.len()`. Summed
/// over shapes; zero if absent.
pub fn extract_coefficient(expr: &SymbolicExpr, s: usize, alpha: &[usize], group: Group) -> BigInt {
    if alpha.len() != s {
        return BigInt::zero();
    }
    let factors: Vec<Factor> = match group {
        Group::GradYLed => core::iter::once(Factor::GradY).chain(alpha.iter().map(|&j| Factor::GradDU(j))).collect(),
        Group::Pure => alpha.iter().map(|&j| Factor::GradDU(j)).collect(),
        Group::Boundary => core::iter::once(Factor::HessRho(s)).chain(alpha.iter().map(|&j| Factor::DU(j))).collect(),
    };
    expr.terms().filter(|(m, _)| m.factors == factors).map(|(_, c)| c.clone()).fold(BigInt::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use Factor::*;

    #[test]
    fn text_round_trip() {
        let mut e = SymbolicExpr::single(-3, Shape::Boundary, vec![HessRho(2), DU(1), DU(0)]);
        e.add_term(BigInt::from(2), Monomial::new(Shape::Trace, vec![GradDU(1), GradDU(0)]));
        let t = e.to_text();
        assert_eq!(t, "+2 trace GradDU(1) GradDU(0)\n-3 boundary HessRho(2) DU(1) DU(0)\n");
        assert_eq!(SymbolicExpr::parse_text(&t).unwrap(), e);
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut e = SymbolicExpr::single(1, Shape::Asym, vec![GradY, GradDU(0)]);
        e.add_term(BigInt::from(-1), Monomial::new(Shape::Asym, vec![GradY, GradDU(0)]));
        assert!(e.is_empty());
    }

    #[test]
    fn malformed_rejected() {
        assert!(Monomial::new(Shape::Trace, vec![DU(0)]).validate().is_err());
        assert!(Monomial::new(Shape::Boundary, vec![HessRho(2), DU(0)]).validate().is_err());
        assert!(Monomial::new(Shape::Vector, vec![GradDU(0)]).validate().is_err());
        assert!(SymbolicExpr::parse_text("+1 trace Foo(1)").is_err());
    }

    #[test]
    fn absent_pattern_is_zero() {
        let e = SymbolicExpr::single(1, Shape::Trace, vec![GradDU(0), GradDU(0)]);
        assert!(extract_coefficient(&e, 3, &[0, 0, 0], Group::Pure).is_zero());
        assert!(extract_coefficient(&e, 2, &[0], Group::Pure).is_zero());
        assert_eq!(extract_coefficient(&e, 2, &[0, 0], Group::Pure), BigInt::from(1));
    }

    #[test]
    fn slots_sorted_in_canonical_form() {
        let mut e = SymbolicExpr::single(1, Shape::Boundary, vec![HessRho(2), DU(1), DU(0)]);
        e.add_term(BigInt::from(2), Monomial::new(Shape::Boundary, vec![HessRho(2), DU(0), DU(1)]));
        let c = e.canonical();
        assert_eq!(c.len(), 1);
        assert_eq!(c.coefficient(&Monomial::new(Shape::Boundary, vec![HessRho(2), DU(0), DU(1)])), BigInt::from(3));
    }
}
