//! Exact checks of Chemin's lemma and of the coefficient bounds, and the
//! smallness function γ(L) with the search for `L_star`.

use crate::geometry::{Domain, Grid2D, SignedDistance};
use crate::hodge::{estimate_projector_norm, estimate_regularity_constant};
use crate::symbolic::{circulation_kernel, curl_series, div_series, normal_trace_series, Factor, SymbolicExpr, KERNEL_CAP, SERIES_CAP};
use crate::{Error, Result};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Largest number of compositions [`upsilon_sum`] accepts.
pub const UPSILON_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Upsilon {
    pub s: usize,
    pub m: usize,
    /// `Σ_{|α| = m} Π 1/(1+α_i)²`.
    pub value: BigRational,
    /// `20^s/(m+1)²`.
    pub bound: BigRational,
}

impl Upsilon {
    pub fn holds(&self) -> bool {
        self.value <= self.bound
    }
}

fn compositions(s: usize, m: usize) -> u128 {
    binomial((m + s - 1) as u128, (s - 1) as u128)
}

/// Exact sum over `α ∈ N^s` with `|α| = m`, computed as the coefficient of
/// `x^m` in `(Σ_a x^a/(1+a)²)^s`.
pub fn upsilon_sum(s: usize, m: usize) -> Result<Upsilon> {
    if s == 0 {
        return Err(Error::InvalidArgument("s must be at least 1"));
    }
    let count = compositions(s, m);
    if count > UPSILON_LIMIT {
        return Err(Error::TooLarge(count));
    }
    let base: Vec<BigRational> = (0..=m).map(|a| BigRational::new(BigInt::one(), BigInt::from((a + 1) * (a + 1)))).collect();
    let mut acc = base.clone();
    for _ in 1..s {
        let mut next = vec![BigRational::zero(); m + 1];
        for (i, x) in acc.iter().enumerate() {
            for (j, y) in base[..=m - i].iter().enumerate() {
                next[i + j] += x * y;
            }
        }
        acc = next;
    }
    let bound = BigRational::new(BigInt::from(20).pow(s as u32), BigInt::from((m + 1) * (m + 1)));
    Ok(Upsilon { s, m, value: acc.swap_remove(m), bound })
}

/// Coefficient families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    /// Divergence series.
    C1,
    /// Normal-trace series (negative).
    C2,
    /// Curl series, `∇y`-led products.
    C3,
    /// Curl series, pure products.
    C4,
    /// Circulation kernel `c_{k,r}`.
    Ckr,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::C1, Family::C2, Family::C3, Family::C4, Family::Ckr];

    pub fn name(self) -> &'static str {
        match self {
            Family::C1 => "c1",
            Family::C2 => "c2",
            Family::C3 => "c3",
            Family::C4 => "c4",
            Family::Ckr => "ckr",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientEntry {
    pub family: Family,
    pub k: usize,
    pub s: usize,
    /// Orders of the `D`-dependent factors in product order; `[r]` for the
    /// kernel.
    pub alpha: Vec<usize>,
    pub value: BigInt,
    /// Bound on `|value|`.
    pub bound: BigRational,
}

impl CoefficientEntry {
    /// `|value| / bound`.
    pub fn ratio(&self) -> BigRational {
        BigRational::from_integer(self.value.abs()) / &self.bound
    }

    pub fn ratio_f64(&self) -> f64 {
        self.ratio().to_f64().unwrap_or(f64::NAN)
    }

    pub fn passes(&self) -> bool {
        let sign_ok = self.family != Family::C2 || self.value.is_negative();
        sign_ok && self.ratio() <= BigRational::one()
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, i| a * BigInt::from(i))
}

fn alpha_factorial(alpha: &[usize]) -> BigInt {
    alpha.iter().fold(BigInt::one(), |a, &j| a * factorial(j))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientTable {
    pub entries: Vec<CoefficientEntry>,
}

impl CoefficientTable {
    /// Every coefficient of the series for `k ≤ series_max` and of the
    /// kernel for `k ≤ kernel_max`.
    pub fn generate(series_max: usize, kernel_max: usize) -> Result<Self> {
        if series_max > SERIES_CAP {
            return Err(Error::OrderTooLarge { order: series_max, cap: SERIES_CAP });
        }
        if kernel_max > KERNEL_CAP {
            return Err(Error::OrderTooLarge { order: kernel_max, cap: KERNEL_CAP });
        }
        let mut t = Self::default();
        for k in 1..=series_max {
            t.push_series(k, &div_series(k)?)?;
            t.push_series(k, &curl_series(k)?)?;
            t.push_series(k, &normal_trace_series(k)?)?;
        }
        for k in 1..=kernel_max {
            for (r, c) in circulation_kernel(k)?.into_iter().enumerate() {
                let r = r + 1;
                t.entries.push(CoefficientEntry {
                    family: Family::Ckr,
                    k,
                    s: 1,
                    alpha: vec![r],
                    value: c,
                    bound: BigRational::from_integer(binomial(BigInt::from(k), BigInt::from(r))),
                });
            }
        }
        Ok(t)
    }

    fn push_series(&mut self, k: usize, expr: &SymbolicExpr) -> Result<()> {
        let kf = factorial(k);
        for (m, c) in expr.terms() {
            let (family, alpha): (Family, Vec<usize>) = match (m.shape, m.factors.first()) {
                (crate::symbolic::Shape::Trace, _) => (Family::C1, orders(&m.factors)?),
                (crate::symbolic::Shape::Asym, Some(Factor::GradY)) => (Family::C3, orders(&m.factors[1..])?),
                (crate::symbolic::Shape::Asym, _) => (Family::C4, orders(&m.factors)?),
                (crate::symbolic::Shape::Boundary, _) => (Family::C2, orders(&m.factors[1..])?),
                _ => return Err(Error::MalformedExpr("unexpected term shape in a series".into())),
            };
            let s = alpha.len();
            let mut den = alpha_factorial(&alpha);
            if family == Family::C2 {
                den *= factorial(s - 1);
            }
            self.entries.push(CoefficientEntry { family, k, s, alpha, value: c.clone(), bound: BigRational::new(kf.clone(), den) });
        }
        Ok(())
    }

    pub fn family(&self, f: Family) -> impl Iterator<Item = &CoefficientEntry> {
        self.entries.iter().filter(move |e| e.family == f)
    }

    /// Coefficient with the given family, order and multi-index.
    pub fn get(&self, f: Family, k: usize, alpha: &[usize]) -> Option<&BigInt> {
        self.family(f).find(|e| e.k == k && e.alpha == alpha).map(|e| &e.value)
    }
}

fn orders(fs: &[Factor]) -> Result<Vec<usize>> {
    fs.iter()
        .map(|f| match f {
            Factor::GradDU(j) | Factor::DU(j) => Ok(*j),
            _ => Err(Error::MalformedExpr("unexpected factor in a series term".into())),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub family: Family,
    pub checked: usize,
    /// Indices into the table of failing entries.
    pub failures: Vec<usize>,
    pub worst_ratio: BigRational,
    /// Index of the entry with the worst ratio.
    pub worst: Option<usize>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub families: Vec<FamilyReport>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.families.iter().all(FamilyReport::passed)
    }

    pub fn family(&self, f: Family) -> Option<&FamilyReport> {
        self.families.iter().find(|r| r.family == f)
    }
}

/// Checks every entry against its bound (and the sign of `c2`).
pub fn verify_bounds(table: &CoefficientTable) -> BoundReport {
    let families = Family::ALL
        .iter()
        .map(|&family| {
            let mut r = FamilyReport { family, checked: 0, failures: Vec::new(), worst_ratio: BigRational::zero(), worst: None };
            for (i, e) in table.entries.iter().enumerate().filter(|(_, e)| e.family == family) {
                r.checked += 1;
                if !e.passes() {
                    r.failures.push(i);
                }
                let q = e.ratio();
                if r.worst.is_none() || q > r.worst_ratio {
                    r.worst_ratio = q;
                    r.worst = Some(i);
                }
            }
            r
        })
        .collect();
    BoundReport { families }
}

/// Constants entering γ(L) and the radius bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Surrogate operator norm of the projector.
    pub c_omega: f64,
    /// Regularity constant of the div–curl reconstruction.
    pub c_r: f64,
    /// Analyticity constant of the signed distance (0 on the torus).
    pub c_rho: f64,
    /// `(Σ |Γ_i|²)^{1/2}`.
    pub c_gamma: f64,
}

impl Constants {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.c_omega, self.c_r, self.c_rho, self.c_gamma].iter().all(|v| v.is_finite());
        if !finite || !(self.c_omega > 0.0) || !(self.c_r > 0.0) || self.c_rho < 0.0 || self.c_gamma < 0.0 {
            return Err(Error::InvalidArgument("constants must be finite, C_Ω and c_r positive"));
        }
        Ok(())
    }

    /// Loop norm of the domain; on the torus the two generating circles.
    pub fn loop_norm(domain: &Domain) -> f64 {
        match *domain {
            Domain::Torus { period } => (2.0 * period * period).sqrt(),
            _ => domain.loop_length_norm(),
        }
    }

    /// Measured constants for a grid: `C_Ω` and `c_r` from `trials` random
    /// fields, `c_ρ` from the signed distance.
    pub fn measure(grid: &Arc<Grid2D>, trials: usize, seed: u64) -> Result<Self> {
        let d = *grid.domain();
        let c_rho = if d.is_torus() { 0.0 } else { SignedDistance::new(d)?.c_rho() };
        let c = Self {
            c_omega: estimate_projector_norm(grid, trials, seed)?,
            c_r: estimate_regularity_constant(grid, trials, seed)?,
            c_rho,
            c_gamma: Self::loop_norm(&d),
        };
        c.validate()?;
        Ok(c)
    }

    /// Smallest `L` for which γ is certified: `L > 20 c_ρ` and `L > 1/C_Ω`.
    pub fn l_min(&self) -> f64 {
        (20.0 * self.c_rho).max(1.0 / self.c_omega)
    }
}

/// Upper bound on `sup_k Σ_{r=1}^k (k+1)²/(r³(k−r+1)²)`.
///
/// Split at `r = (k+1)/2`: below, `(k+1)/(k−r+1) ≤ 2` gives `4ζ(3) < 4.81`;
/// above, `(k+1)²/r³ ≤ 8/(k+1) ≤ 4` and `Σ 1/(k−r+1)² < ζ(2)` give `< 6.58`.
pub const CIRCULATION_SUM_BOUND: f64 = 13.0;

/// Smallest `K_max` accepted by [`gamma`].
pub const K_MIN: usize = 10;

/// The two summands of the bracket at order `k`.
pub fn gamma_terms(l: f64, c: &Constants, k: usize) -> (f64, f64) {
    let kk = (k + 1) as f64;
    // c_ρ^s L^{1−s} 20^s = L q^s, kept in this form against overflow
    let q = 20.0 * c.c_rho / l;
    let mut geo = 0.0;
    for s in 2..=k + 1 {
        geo += s as f64 * l * q.powi(s as i32) * kk * kk / ((k + 2 - s) as f64).powi(2);
    }
    let circ: f64 = (1..=k).map(|r| kk * kk / ((r as f64).powi(3) * ((k - r + 1) as f64).powi(2))).sum();
    (4.0 * geo, c.c_gamma * (c.c_omega + 1.0) / (c.c_omega * l) * circ)
}

/// Bound on the bracket for every `k > k_max`. With `q = 20c_ρ/L` and
/// `(k+1)/(k+2−s)` decreasing in `k`, each `s ≤ K+2` term is at most its
/// value with ratio `(K+2)/(K+3−s)`, and each `s > K+2` term at most
/// `s³ q^s` (ratio `≤ s`).
pub fn gamma_tail(l: f64, c: &Constants, k_max: usize) -> f64 {
    let q = 20.0 * c.c_rho / l;
    let circ = c.c_gamma * (c.c_omega + 1.0) / (c.c_omega * l) * CIRCULATION_SUM_BOUND;
    if q == 0.0 {
        return circ;
    }
    let kk = (k_max + 2) as f64;
    let mut sum = 0.0;
    for s in 2..=k_max + 2 {
        sum += s as f64 * q.powi(s as i32) * (kk / (kk + 1.0 - s as f64)).powi(2);
    }
    // s > K+2: terms s³q^s with ratio ((s+1)/s)³ q, which decreases to q;
    // once it is below one the remainder is dominated by a geometric series
    let mut s = k_max + 3;
    let mut term = (s as f64).powi(3) * q.powi(s as i32);
    loop {
        let rho = ((s + 1) as f64 / s as f64).powi(3) * q;
        if rho < 1.0 && term <= 1e-18 * sum {
            sum += term / (1.0 - rho);
            break;
        }
        if s > k_max + TAIL_TERMS {
            return f64::INFINITY;
        }
        sum += term;
        term *= rho;
        s += 1;
    }
    4.0 * l * sum + circ
}

/// Explicit tail terms summed before giving up (`L` too close to `20c_ρ`).
const TAIL_TERMS: usize = 10_000_000;

/// `sup_k` of the bracket: exact terms for `k ≤ K_max`, then the tail
/// bound.
pub fn gamma(l: f64, c: &Constants, k_max: usize) -> Result<f64> {
    c.validate()?;
    if k_max < K_MIN {
        return Err(Error::InvalidArgument("K_max must be at least 10"));
    }
    if !(l > 20.0 * c.c_rho) || !l.is_finite() {
        return Err(Error::LTooSmall { l, min: 20.0 * c.c_rho });
    }
    let mut best = gamma_tail(l, c, k_max);
    for k in 1..=k_max {
        let (a, b) = gamma_terms(l, c, k);
        best = best.max(a + b);
    }
    Ok(best)
}

/// Truncation order used by [`find_l`].
pub const GAMMA_K_MAX: usize = 50;
const SEARCH_CAP: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LStar {
    pub l: f64,
    pub gamma: f64,
    /// `1/(C_Ω L)`; the radius bound is this over `‖y‖_surrogate`.
    pub radius_factor: f64,
}

impl LStar {
    pub fn radius_bound(&self, y_norm: f64) -> f64 {
        self.radius_factor / y_norm
    }
}

/// Smallest certified `L` (to relative precision 1e-9) with
/// `γ(L) ≤ 1/c_r`, by doubling then bisection.
pub fn find_l(c: &Constants) -> Result<LStar> {
    c.validate()?;
    let target = 1.0 / c.c_r;
    let lo0 = c.l_min();
    let ok = |l: f64| -> Result<bool> { Ok(l > lo0 && gamma(l, c, GAMMA_K_MAX)? <= target) };
    let mut lo = lo0;
    let mut hi = (2.0 * lo0).max(f64::MIN_POSITIVE);
    let mut it = 0;
    while !ok(hi)? {
        lo = hi;
        hi *= 2.0;
        it += 1;
        if it > SEARCH_CAP {
            return Err(Error::NotFound);
        }
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        it += 1;
        if it > SEARCH_CAP {
            return Err(Error::NotFound);
        }
    }
    Ok(LStar { l: hi, gamma: gamma(hi, c, GAMMA_K_MAX)?, radius_factor: 1.0 / (c.c_omega * hi) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    /// Brute-force enumeration of compositions.
    fn brute(s: usize, m: usize) -> BigRational {
        fn go(s: usize, m: usize, acc: BigRational) -> BigRational {
            if s == 1 {
                return acc / BigInt::from((m + 1) * (m + 1));
            }
            (0..=m).map(|a| go(s - 1, m - a, acc.clone() / BigInt::from((a + 1) * (a + 1)))).fold(BigRational::zero(), |x, y| x + y)
        }
        go(s, m, BigRational::one())
    }

    #[test]
    fn upsilon_examples() {
        let u = upsilon_sum(1, 0).unwrap();
        assert_eq!((u.value.clone(), u.bound.clone()), (ratio(1, 1), ratio(20, 1)));
        let u = upsilon_sum(1, 5).unwrap();
        assert_eq!(u.value, ratio(1, 36));
        let u = upsilon_sum(2, 2).unwrap();
        assert_eq!(u.value, ratio(41, 144));
        assert_eq!(u.bound, ratio(400, 9));
        assert!(matches!(upsilon_sum(30, 40), Err(Error::TooLarge(_))));
        assert!(upsilon_sum(0, 1).is_err());
    }

    #[test]
    fn chemin_lemma_in_range() {
        for s in 1..=6 {
            for m in 0..=12 {
                let u = upsilon_sum(s, m).unwrap();
                assert!(u.holds(), "s={s} m={m}");
                if s <= 4 && m <= 8 {
                    assert_eq!(u.value, brute(s, m));
                }
            }
        }
    }

    #[test]
    fn base_coefficients() {
        let t = CoefficientTable::generate(2, 3).unwrap();
        assert_eq!(t.get(Family::Ckr, 1, &[1]), Some(&BigInt::from(1)));
        assert_eq!(t.get(Family::C1, 1, &[0, 0]), Some(&BigInt::from(1)));
        assert_eq!(t.get(Family::C3, 1, &[0]), Some(&BigInt::from(-1)));
        assert_eq!(t.get(Family::C4, 1, &[0, 0]), Some(&BigInt::from(1)));
        assert_eq!(t.get(Family::C2, 1, &[0, 0]), Some(&BigInt::from(-1)));
        let r = verify_bounds(&t);
        assert!(r.all_pass());
        // c_{1,1} = 1 = binom(1,1)
        let e = t.family(Family::Ckr).find(|e| e.k == 1).unwrap();
        assert_eq!(e.ratio(), BigRational::one());
    }

    #[test]
    fn all_families_pass_to_caps() {
        let t = CoefficientTable::generate(SERIES_CAP, KERNEL_CAP).unwrap();
        let r = verify_bounds(&t);
        assert!(r.all_pass());
        for f in &r.families {
            assert!(f.checked > 0);
        }
        // Pascal's triangle for the kernel
        for e in t.family(Family::Ckr) {
            assert_eq!(BigRational::from_integer(e.value.clone()), e.bound);
        }
    }

    #[test]
    fn violations_are_reported() {
        let mut t = CoefficientTable::generate(1, 1).unwrap();
        t.entries.push(CoefficientEntry { family: Family::C2, k: 1, s: 2, alpha: vec![0, 0], value: BigInt::from(1), bound: ratio(1, 1) });
        t.entries.push(CoefficientEntry { family: Family::C1, k: 1, s: 2, alpha: vec![0, 0], value: BigInt::from(-3), bound: ratio(1, 1) });
        let r = verify_bounds(&t);
        assert!(!r.all_pass());
        assert_eq!(r.family(Family::C2).unwrap().failures.len(), 1);
        assert_eq!(r.family(Family::C1).unwrap().worst_ratio, ratio(3, 1));
    }

    fn disk() -> Constants {
        Constants { c_omega: 1.3, c_r: 2.0, c_rho: 2.0, c_gamma: 0.0 }
    }

    #[test]
    fn circulation_sum_constant() {
        // the split argument, checked numerically well past the maximum
        let f = |k: usize| -> f64 {
            let kk = (k + 1) as f64;
            (1..=k).map(|r| kk * kk / ((r as f64).powi(3) * ((k - r + 1) as f64).powi(2))).sum()
        };
        let zeta3: f64 = (1..100_000).map(|r| 1.0 / (r as f64).powi(3)).sum();
        let zeta2 = core::f64::consts::PI.powi(2) / 6.0;
        assert!(4.0 * zeta3 + 4.0 * zeta2 < CIRCULATION_SUM_BOUND);
        let sup = (1..2000).map(f).fold(0.0, f64::max);
        assert!(sup < CIRCULATION_SUM_BOUND);
        assert_eq!(f(1), 4.0);
    }

    #[test]
    fn tail_bounds_the_terms() {
        let c = Constants { c_gamma: 3.0, ..disk() };
        for l in [41.0, 60.0, 200.0] {
            let tail = gamma_tail(l, &c, 10);
            for k in 11..400 {
                let (a, b) = gamma_terms(l, &c, k);
                assert!(a + b <= tail, "L={l} k={k}");
            }
        }
    }

    #[test]
    fn gamma_properties() {
        let c = disk();
        assert!(matches!(gamma(40.0, &c, 50), Err(Error::LTooSmall { .. })));
        assert!(gamma(100.0, &c, 5).is_err());
        let g50 = gamma(100.0, &c, 50).unwrap();
        let g100 = gamma(100.0, &c, 100).unwrap();
        assert!((g50 - g100).abs() <= 1e-12 * g50);
        let mut prev = f64::INFINITY;
        let mut l = 50.0;
        for _ in 0..30 {
            let g = gamma(l, &c, 50).unwrap();
            assert!(g.is_finite() && g <= prev);
            prev = g;
            l *= 2.0;
        }
        assert!(prev < 1e-6 * gamma(50.0, &c, 50).unwrap());
        // circulation summand is linear in 1/L
        let a = Constants { c_gamma: 2.0, c_rho: 0.0, ..c };
        let (_, b1) = gamma_terms(10.0, &a, 7);
        let (_, b2) = gamma_terms(20.0, &a, 7);
        assert_eq!(b1, 2.0 * b2);
    }

    #[test]
    fn find_l_brackets() {
        let c = disk();
        let ls = find_l(&c).unwrap();
        assert!(ls.gamma <= 1.0 / c.c_r);
        let half = 0.5 * ls.l;
        assert!(half <= c.l_min() || gamma(half, &c, GAMMA_K_MAX).unwrap() > 1.0 / c.c_r);
        let loose = find_l(&Constants { c_r: 2.0 * c.c_r, ..c }).unwrap();
        assert!(loose.l >= ls.l);
        let ann = find_l(&Constants { c_gamma: 6.0, ..c }).unwrap();
        assert!(ls.l <= ann.l);
        assert!((ls.radius_factor - 1.0 / (c.c_omega * ls.l)).abs() < 1e-15);
    }
}
