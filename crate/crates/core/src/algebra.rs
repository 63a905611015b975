//! Exact polynomial, Hermite and cumulant algebra.
//!
//! Everything here works over arbitrary-precision rationals. Hermite
//! polynomials follow the probabilists' (monic) convention,
//! `H_{k+1}(x) = x H_k(x) - k H_{k-1}(x)`, so that
//! `∫ H_j H_k φ = k! δ_{jk}` for the standard normal density `φ`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// `n / d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact rational value of a finite `f64`.
pub fn rat_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Dense univariate polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::from_coeffs(vec![c])
    }

    pub fn monomial(c: Rational, degree: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); degree + 1];
        coeffs[degree] = c;
        Poly::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Poly::from_coeffs(coeffs)
    }

    pub fn add_scaled(&mut self, other: &Poly, scale: &Rational) {
        if scale.is_zero() {
            return;
        }
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), Rational::zero());
        }
        for (dst, src) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *dst += src * scale;
        }
        let trimmed = std::mem::take(&mut self.coeffs);
        *self = Poly::from_coeffs(trimmed);
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Poly::from_coeffs(out)
    }

    /// `x · self`
    pub fn shift(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Rational::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { coeffs }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c))
    }

    /// `E[p(Z)]` for `Z ~ N(0, 1)`, exactly.
    pub fn gaussian_expectation(&self) -> Rational {
        self.coeffs
            .iter()
            .enumerate()
            .step_by(2)
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| c * gaussian_moment(k))
            .fold(Rational::zero(), |acc, t| acc + t)
    }
}

/// Monic probabilists' Hermite polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermitePoly {
    order: usize,
    poly: Poly,
}

impl HermitePoly {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Monomial coefficients, lowest degree first; length is `order + 1`.
    pub fn coeffs(&self) -> Vec<Rational> {
        (0..=self.order).map(|i| self.poly.coeff(i)).collect()
    }

    pub fn as_poly(&self) -> &Poly {
        &self.poly
    }

    pub fn eval(&self, x: f64) -> f64 {
        hermite_eval(self.order, x)
    }
}

/// `H_k` built by the three-term recurrence.
pub fn hermite_poly(k: usize) -> HermitePoly {
    let mut prev = Poly::zero();
    let mut cur = Poly::one();
    for i in 0..k {
        let next = cur.shift().add(&prev.scale(&rat_int(-(i as i64))));
        prev = cur;
        cur = next;
    }
    HermitePoly { order: k, poly: cur }
}

/// `H_k(x)` in floating point via the recurrence.
pub fn hermite_eval(k: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (0.0, 1.0);
    for i in 0..k {
        let next = x * cur - i as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_0(x), …, H_kmax(x)`.
pub fn hermite_eval_all(kmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(1.0);
    if kmax >= 1 {
        out.push(x);
    }
    for i in 1..kmax {
        let next = x * out[i] - i as f64 * out[i - 1];
        out.push(next);
    }
    out
}

/// `E Z^k` for standard normal `Z`: zero for odd `k`, `(k-1)!!` otherwise.
pub fn gaussian_moment(k: usize) -> Rational {
    if k % 2 == 1 {
        return Rational::zero();
    }
    let mut acc = BigInt::one();
    let mut i = k as i64 - 1;
    while i > 1 {
        acc *= i;
        i -= 2;
    }
    Rational::from_integer(acc)
}

/// Exact `∫ Π H_{r_i}(x) φ(x) dx`, by monomial expansion.
pub fn hermite_product_expectation(orders: &[usize]) -> Rational {
    orders
        .iter()
        .fold(Poly::one(), |acc, &k| acc.mul(hermite_poly(k).as_poly()))
        .gaussian_expectation()
}

/// Standardized cumulants `γ_3, …, γ_m` (with `γ_1 = 0`, `γ_2 = 1` implied).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulantSet {
    gammas: Vec<Rational>,
}

impl CumulantSet {
    /// Cumulants `γ_3..γ_m` given in order; `max_order = 2 + gammas.len()`.
    pub fn new(gammas: Vec<Rational>) -> Self {
        CumulantSet { gammas }
    }

    /// All-zero cumulants up to order `max_order` (a normal law).
    pub fn gaussian(max_order: usize) -> Self {
        CumulantSet::new(vec![Rational::zero(); max_order.saturating_sub(2)])
    }

    /// Builds from `(order, value)` pairs; unspecified orders up to `max_order` are zero.
    pub fn from_pairs(max_order: usize, pairs: &[(usize, Rational)]) -> Result<Self> {
        let mut set = CumulantSet::gaussian(max_order);
        for (order, value) in pairs {
            if *order < 3 || *order > max_order {
                return Err(Error::OrderOutOfRange {
                    order: *order,
                    max: max_order,
                });
            }
            set.gammas[order - 3] = value.clone();
        }
        Ok(set)
    }

    pub fn from_f64(gammas: &[f64]) -> Self {
        CumulantSet::new(gammas.iter().map(|&g| rat_from_f64(g)).collect())
    }

    pub fn max_order(&self) -> usize {
        self.gammas.len() + 2
    }

    /// `γ_r`, including the implied `γ_1 = 0` and `γ_2 = 1`; `None` above `max_order`.
    pub fn gamma(&self, r: usize) -> Option<Rational> {
        match r {
            0 => None,
            1 => Some(Rational::zero()),
            2 => Some(Rational::one()),
            _ => self.gammas.get(r - 3).cloned(),
        }
    }

    pub fn gamma_f64(&self, r: usize) -> f64 {
        self.gamma(r).map(|g| to_f64(&g)).unwrap_or(f64::NAN)
    }

    pub fn gammas(&self) -> &[Rational] {
        &self.gammas
    }

    /// Same law with cumulants above `max_order` dropped.
    pub fn truncated(&self, max_order: usize) -> Self {
        let keep = max_order.saturating_sub(2).min(self.gammas.len());
        CumulantSet::new(self.gammas[..keep].to_vec())
    }
}

fn moments_to_cumulants_raw(moments: &[Rational]) -> Vec<Rational> {
    // mu[0] = 1, mu[k] = E X^k
    let mut mu = Vec::with_capacity(moments.len() + 1);
    mu.push(Rational::one());
    mu.extend(moments.iter().cloned());
    let mut kappa = vec![Rational::zero(); mu.len()];
    for n in 1..mu.len() {
        let mut acc = mu[n].clone();
        for m in 1..n {
            acc -= Rational::from_integer(binomial(n - 1, m - 1)) * &kappa[m] * &mu[n - m];
        }
        kappa[n] = acc;
    }
    kappa
}

/// Cumulants of a standardized law from its raw moments `μ_1, …, μ_m`.
pub fn moments_to_cumulants(moments: &[Rational]) -> Result<CumulantSet> {
    if moments.len() < 2 {
        return Err(Error::Invalid(format!(
            "need at least two moments, got {}",
            moments.len()
        )));
    }
    if !moments[0].is_zero() || !moments[1].is_one() {
        return Err(Error::NonStandardized(format!(
            "mu_1 = {}, mu_2 = {}",
            moments[0], moments[1]
        )));
    }
    let kappa = moments_to_cumulants_raw(moments);
    Ok(CumulantSet::new(kappa[3..].to_vec()))
}

/// Floating-point variant; `μ_1`, `μ_2` must be standardized within `1e-12`.
pub fn moments_to_cumulants_f64(moments: &[f64]) -> Result<CumulantSet> {
    const TOL: f64 = 1e-12;
    if moments.len() < 2 {
        return Err(Error::Invalid(format!(
            "need at least two moments, got {}",
            moments.len()
        )));
    }
    if moments[0].abs() > TOL || (moments[1] - 1.0).abs() > TOL {
        return Err(Error::NonStandardized(format!(
            "mu_1 = {}, mu_2 = {}",
            moments[0], moments[1]
        )));
    }
    let mut exact: Vec<Rational> = moments.iter().map(|&m| rat_from_f64(m)).collect();
    exact[0] = Rational::zero();
    exact[1] = Rational::one();
    moments_to_cumulants(&exact)
}

/// Raw moments `μ_1, …, μ_m` of a standardized law with the given cumulants.
pub fn cumulants_to_moments(c: &CumulantSet) -> Vec<Rational> {
    let m = c.max_order();
    let mut mu = vec![Rational::one()];
    for n in 1..=m {
        let mut acc = Rational::zero();
        for k in 1..=n {
            let g = c.gamma(k).expect("order within range");
            if g.is_zero() {
                continue;
            }
            acc += Rational::from_integer(binomial(n - 1, k - 1)) * g * &mu[n - k];
        }
        mu.push(acc);
    }
    mu.split_off(1)
}

/// Multi-index `ν = (ν_1, …, ν_d)`; ordering is lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        assert!(!components.is_empty(), "multi-index dimension must be >= 1");
        MultiIndex(components)
    }

    pub fn zeros(d: usize) -> Self {
        MultiIndex::new(vec![0; d])
    }

    /// `k` in coordinate `axis`, zero elsewhere.
    pub fn axis(d: usize, axis: usize, k: u32) -> Self {
        let mut c = vec![0; d];
        c[axis] = k;
        MultiIndex::new(c)
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|ν| = Σ ν_i`
    pub fn order(&self) -> usize {
        self.0.iter().map(|&v| v as usize).sum()
    }

    /// `ν! = Π ν_i!`
    pub fn factorial(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, &v| acc * factorial(v as usize))
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            return write!(f, "{}", self.0[0]);
        }
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// All `ν` of dimension `d` with `|ν| = k`, lexicographically ascending.
pub fn multiindex_enumerate(d: usize, k: usize) -> Vec<MultiIndex> {
    fn rec(d: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if d == 1 {
            prefix.push(k);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in 0..=k {
            prefix.push(first);
            rec(d - 1, k - first, prefix, out);
            prefix.pop();
        }
    }
    assert!(d >= 1, "dimension must be >= 1");
    let mut out = Vec::new();
    rec(d, k as u32, &mut Vec::with_capacity(d), &mut out);
    out
}

/// `H_ν(x) = Π H_{ν_i}(x_i)`.
pub fn hermite_multi_eval(nu: &MultiIndex, x: &[f64]) -> Result<f64> {
    if nu.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: nu.dim(),
            got: x.len(),
        });
    }
    Ok(nu
        .components()
        .iter()
        .zip(x)
        .map(|(&k, &xi)| hermite_eval(k as usize, xi))
        .product())
}

/// Exact `E[Π_i H_{ν^(i)}(Z)]` for a standard normal vector `Z`.
pub fn hermite_multi_product_expectation(indices: &[&MultiIndex]) -> Rational {
    let Some(first) = indices.first() else {
        return Rational::one();
    };
    let d = first.dim();
    let mut acc = Rational::one();
    for axis in 0..d {
        let orders: Vec<usize> = indices
            .iter()
            .map(|nu| nu.components()[axis] as usize)
            .filter(|&k| k > 0)
            .collect();
        let e = hermite_product_expectation(&orders);
        if e.is_zero() {
            return e;
        }
        acc *= e;
    }
    acc
}

/// Cumulants `γ_ν`, `3 ≤ |ν| ≤ m`, of a mean-zero identity-covariance random vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulantTensor {
    dim: usize,
    max_order: usize,
    entries: BTreeMap<MultiIndex, Rational>,
}

impl CumulantTensor {
    pub fn new(dim: usize, max_order: usize) -> Self {
        assert!(dim >= 1);
        CumulantTensor {
            dim,
            max_order,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn set(&mut self, nu: MultiIndex, value: Rational) -> Result<()> {
        if nu.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: nu.dim(),
            });
        }
        let order = nu.order();
        if order < 3 || order > self.max_order {
            return Err(Error::OrderOutOfRange {
                order,
                max: self.max_order,
            });
        }
        if value.is_zero() {
            self.entries.remove(&nu);
        } else {
            self.entries.insert(nu, value);
        }
        Ok(())
    }

    /// `γ_ν`, zero when absent.
    pub fn get(&self, nu: &MultiIndex) -> Rational {
        self.entries.get(nu).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.entries.iter()
    }

    /// One-dimensional law viewed as a tensor of dimension 1.
    pub fn from_set(c: &CumulantSet) -> Self {
        CumulantTensor::gaussian_padded(c, 1)
    }

    /// `(Y, Z_2, …, Z_d)` with `Y` carrying `c` and independent standard normal padding.
    pub fn gaussian_padded(c: &CumulantSet, d: usize) -> Self {
        let mut t = CumulantTensor::new(d, c.max_order());
        for r in 3..=c.max_order() {
            let g = c.gamma(r).expect("in range");
            t.set(MultiIndex::axis(d, 0, r as u32), g).expect("valid");
        }
        t
    }

    /// `(Y_1, …, Y_d)` with independent coordinates all carrying `c`.
    pub fn iid_product(c: &CumulantSet, d: usize) -> Self {
        let mut t = CumulantTensor::new(d, c.max_order());
        for axis in 0..d {
            for r in 3..=c.max_order() {
                let g = c.gamma(r).expect("in range");
                t.set(MultiIndex::axis(d, axis, r as u32), g).expect("valid");
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite_poly(0).coeffs(), vec![rat_int(1)]);
        assert_eq!(
            hermite_poly(3).coeffs(),
            vec![rat_int(0), rat_int(-3), rat_int(0), rat_int(1)]
        );
        // H_4 = x H_3 - 3 H_2 with H_2 = x^2 - 1
        let h3 = Poly::from_coeffs(vec![rat_int(0), rat_int(-3), rat_int(0), rat_int(1)]);
        let h2 = Poly::from_coeffs(vec![rat_int(-1), rat_int(0), rat_int(1)]);
        let oracle = h3.shift().add(&h2.scale(&rat_int(-3)));
        assert_eq!(hermite_poly(4).as_poly(), &oracle);
        assert_eq!(
            hermite_poly(4).coeffs(),
            vec![rat_int(3), rat_int(0), rat_int(-6), rat_int(0), rat_int(1)]
        );
    }

    #[test]
    fn recurrence_and_monic() {
        for k in 1..=12usize {
            let lhs = hermite_poly(k + 1);
            let rhs = hermite_poly(k)
                .as_poly()
                .shift()
                .add(&hermite_poly(k - 1).as_poly().scale(&rat_int(-(k as i64))));
            assert_eq!(lhs.as_poly(), &rhs);
            assert!(lhs.coeffs().last().unwrap().is_one());
        }
    }

    #[test]
    fn float_eval_matches_exact() {
        for k in 0..=10 {
            let h = hermite_poly(k);
            for &x in &[-2.5, -1.0, 0.0, 0.3, 1.7] {
                let a = h.as_poly().eval_f64(x);
                assert!((a - hermite_eval(k, x)).abs() < 1e-9 * (1.0 + a.abs()));
            }
        }
        let all = hermite_eval_all(6, 0.7);
        for (k, v) in all.iter().enumerate() {
            assert_eq!(*v, hermite_eval(k, 0.7));
        }
    }

    #[test]
    fn gaussian_moments() {
        assert_eq!(gaussian_moment(0), rat_int(1));
        assert_eq!(gaussian_moment(3), rat_int(0));
        assert_eq!(gaussian_moment(6), rat_int(15));
        assert_eq!(gaussian_moment(8), rat_int(105));
    }

    #[test]
    fn product_expectations() {
        assert_eq!(hermite_product_expectation(&[3, 3]), rat_int(6));
        assert_eq!(hermite_product_expectation(&[1, 2]), rat_int(0));
        assert_eq!(hermite_product_expectation(&[2, 2, 2]), rat_int(8));
        assert_eq!(hermite_product_expectation(&[]), rat_int(1));
    }

    #[test]
    fn orthogonality() {
        for j in 0..=10 {
            for k in 0..=10 {
                let expected = if j == k {
                    Rational::from_integer(factorial(k))
                } else {
                    Rational::zero()
                };
                assert_eq!(hermite_product_expectation(&[j, k]), expected, "{j},{k}");
            }
        }
    }

    #[test]
    fn cumulants_from_moments() {
        let normal = moments_to_cumulants(&[rat_int(0), rat_int(1), rat_int(0), rat_int(3)]).unwrap();
        assert_eq!(normal.gammas(), &[rat_int(0), rat_int(0)]);

        let expo = moments_to_cumulants(&[rat_int(0), rat_int(1), rat_int(2), rat_int(9)]).unwrap();
        assert_eq!(expo.gamma(3), Some(rat_int(2)));
        assert_eq!(expo.gamma(4), Some(rat_int(6)));

        let skew = moments_to_cumulants(&[rat_int(0), rat_int(1), rat(7, 5)]).unwrap();
        assert_eq!(skew.gamma(3), Some(rat(7, 5)));
    }

    #[test]
    fn non_standardized_moments_rejected() {
        let err = moments_to_cumulants(&[rat_int(1), rat_int(2), rat_int(0)]).unwrap_err();
        assert!(matches!(err, Error::NonStandardized(_)));
        let err = moments_to_cumulants_f64(&[0.0, 1.0 + 1e-9, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonStandardized(_)));
        let ok = moments_to_cumulants_f64(&[1e-14, 1.0, 0.5, 3.0]).unwrap();
        assert_eq!(ok.gamma(3), Some(rat(1, 2)));
        assert_eq!(ok.gamma(4), Some(rat_int(0)));
    }

    #[test]
    fn multiindex_enumeration() {
        assert_eq!(multiindex_enumerate(1, 3), vec![MultiIndex::new(vec![3])]);
        assert_eq!(
            multiindex_enumerate(2, 2),
            vec![
                MultiIndex::new(vec![0, 2]),
                MultiIndex::new(vec![1, 1]),
                MultiIndex::new(vec![2, 0])
            ]
        );
        let all = multiindex_enumerate(3, 3);
        assert_eq!(all.len(), 10);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert!(all.iter().all(|nu| nu.order() == 3));
        assert_eq!(MultiIndex::new(vec![2, 3]).factorial(), BigInt::from(12));
    }

    #[test]
    fn multi_hermite_eval() {
        let x = [0.4, -1.3];
        assert_eq!(hermite_multi_eval(&MultiIndex::new(vec![0, 0]), &x).unwrap(), 1.0);
        assert_eq!(
            hermite_multi_eval(&MultiIndex::new(vec![1, 2]), &[2.0, 1.0]).unwrap(),
            0.0
        );
        assert_eq!(
            hermite_multi_eval(&MultiIndex::new(vec![3, 1]), &[1.0, 1.0]).unwrap(),
            -2.0
        );
        assert!(matches!(
            hermite_multi_eval(&MultiIndex::new(vec![1, 1]), &[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn tensor_validation() {
        let mut t = CumulantTensor::new(2, 4);
        assert!(t.set(MultiIndex::new(vec![1, 1]), rat_int(1)).is_err());
        assert!(t.set(MultiIndex::new(vec![3, 2]), rat_int(1)).is_err());
        assert!(t.set(MultiIndex::new(vec![3]), rat_int(1)).is_err());
        t.set(MultiIndex::new(vec![2, 1]), rat(1, 3)).unwrap();
        assert_eq!(t.get(&MultiIndex::new(vec![2, 1])), rat(1, 3));
        assert_eq!(t.get(&MultiIndex::new(vec![0, 3])), rat_int(0));
    }
}
