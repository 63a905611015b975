//! Edgeworth correction terms and approximants.
//!
//! The density correction of order `k` is
//!
//! ```text
//! q_k(x) = φ(x) Σ H_{k+2j}(x) Π_i (γ_{i+2}/(i+2)!)^{r_i} / r_i!
//! ```
//!
//! summed over the weighted partitions `r_1 + 2 r_2 + … + k r_k = k`,
//! `j = Σ r_i`. The distribution-function correction `Q_k` uses the same
//! weights on `-φ H_{k+2j-1}`, so that `Q_k' = q_k`. Both are stored as
//! coefficients in the Hermite basis.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::algebra::{
    factorial, hermite_eval_all, hermite_poly, multiindex_enumerate, to_f64, CumulantSet, CumulantTensor, MultiIndex,
    Poly, Rational,
};
use crate::error::{Error, Result};
use crate::special::{std_normal_cdf, std_normal_pdf};

/// A non-negative solution of `r_1 + 2 r_2 + … + k r_k = k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedPartition {
    r: Vec<u32>,
}

impl WeightedPartition {
    pub fn new(r: Vec<u32>) -> Self {
        WeightedPartition { r }
    }

    pub fn k(&self) -> usize {
        self.r.len()
    }

    /// `j = r_1 + … + r_k`
    pub fn j(&self) -> usize {
        self.r.iter().map(|&v| v as usize).sum()
    }

    pub fn parts(&self) -> &[u32] {
        &self.r
    }

    /// `Σ i · r_i`
    pub fn weight(&self) -> usize {
        self.r.iter().enumerate().map(|(i, &v)| (i + 1) * v as usize).sum()
    }
}

/// All weighted partitions of `k`, with `r_1` descending first (then `r_2`, …).
pub fn weighted_partitions(k: usize) -> Vec<WeightedPartition> {
    fn rec(i: usize, k: usize, remaining: usize, cur: &mut Vec<u32>, out: &mut Vec<WeightedPartition>) {
        if i > k {
            if remaining == 0 {
                out.push(WeightedPartition::new(cur.clone()));
            }
            return;
        }
        for count in (0..=remaining / i).rev() {
            cur.push(count as u32);
            rec(i + 1, k, remaining - count * i, cur, out);
            cur.pop();
        }
    }
    assert!(k >= 1, "k must be >= 1");
    let mut out = Vec::new();
    rec(1, k, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// `Π_i (γ_{i+2}/(i+2)!)^{r_i} / r_i!`
fn partition_weight(c: &CumulantSet, p: &WeightedPartition) -> Rational {
    let mut w = Rational::one();
    for (i, &ri) in p.parts().iter().enumerate() {
        if ri == 0 {
            continue;
        }
        let order = i + 3;
        let g = c.gamma(order).expect("order checked by caller") / Rational::from_integer(factorial(order));
        w *= num_traits::pow(g, ri as usize) / Rational::from_integer(factorial(ri as usize));
        if w.is_zero() {
            break;
        }
    }
    w
}

/// `f(x) = φ(x) Σ a_I H_I(x)` with finitely many nonzero coefficients `a_I`.
///
/// `I` is a Hermite order (`usize`) in one dimension or a [`MultiIndex`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermiteBasisFunction<I: Ord> {
    coeffs: BTreeMap<I, Rational>,
}

pub type HermiteSeries = HermiteBasisFunction<usize>;
pub type MultiHermiteSeries = HermiteBasisFunction<MultiIndex>;

impl<I: Ord + Clone> Default for HermiteBasisFunction<I> {
    fn default() -> Self {
        HermiteBasisFunction {
            coeffs: BTreeMap::new(),
        }
    }
}

impl<I: Ord + Clone> HermiteBasisFunction<I> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_map(coeffs: BTreeMap<I, Rational>) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        HermiteBasisFunction { coeffs }
    }

    /// Adds `value` to the coefficient of `index`, dropping it when it cancels.
    pub fn accumulate(&mut self, index: I, value: Rational) {
        if value.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(index.clone()).or_insert_with(Rational::zero);
        *entry += value;
        if entry.is_zero() {
            self.coeffs.remove(&index);
        }
    }

    pub fn coeff(&self, index: &I) -> Rational {
        self.coeffs.get(index).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &BTreeMap<I, Rational> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_map(self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect())
    }
}

impl HermiteSeries {
    /// Highest Hermite order present.
    pub fn max_order(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn min_order(&self) -> Option<usize> {
        self.coeffs.keys().next().copied()
    }

    /// `N(x) = Σ a_r H_r(x)` as a monomial polynomial, so that `f = φ N`.
    pub fn to_poly(&self) -> Poly {
        let mut out = Poly::zero();
        for (&r, a) in &self.coeffs {
            out.add_scaled(hermite_poly(r).as_poly(), a);
        }
        out
    }

    /// `Σ a_r H_r(x)` in floating point.
    pub fn eval_polynomial(&self, x: f64) -> f64 {
        let Some(max) = self.max_order() else {
            return 0.0;
        };
        let h = hermite_eval_all(max, x);
        self.coeffs.iter().map(|(&r, a)| to_f64(a) * h[r]).sum()
    }

    /// `f(x) = φ(x) Σ a_r H_r(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        std_normal_pdf(x) * self.eval_polynomial(x)
    }

    /// Dense `f64` coefficient vector indexed by Hermite order.
    pub fn dense_f64(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.max_order().map_or(0, |m| m + 1)];
        for (&r, a) in &self.coeffs {
            out[r] = to_f64(a);
        }
        out
    }

    /// Fourier transform `∫ e^{itx} f(x) dx = Σ a_r (it)^r e^{-t²/2}`.
    pub fn fourier(&self, t: f64) -> Complex64 {
        let it = Complex64::new(0.0, t);
        let poly: Complex64 = self.coeffs.iter().map(|(&r, a)| it.powu(r as u32) * to_f64(a)).sum();
        poly * (-0.5 * t * t).exp()
    }
}

impl MultiHermiteSeries {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (nu, a) in &self.coeffs {
            acc += to_f64(a) * crate::algebra::hermite_multi_eval(nu, x)?;
        }
        let norm: f64 = x.iter().map(|&xi| std_normal_pdf(xi)).product();
        Ok(norm * acc)
    }
}

fn check_order(c_max: usize, k: usize) -> Result<()> {
    if k < 1 || k + 2 > c_max {
        return Err(Error::OrderOutOfRange {
            order: k,
            max: c_max.saturating_sub(2),
        });
    }
    Ok(())
}

/// Density correction `q_k` in the Hermite basis.
pub fn density_correction(c: &CumulantSet, k: usize) -> Result<HermiteSeries> {
    check_order(c.max_order(), k)?;
    let mut out = HermiteSeries::zero();
    for p in weighted_partitions(k) {
        out.accumulate(k + 2 * p.j(), partition_weight(c, &p));
    }
    Ok(out)
}

/// Distribution-function correction `Q_k` in the Hermite basis (note the sign).
pub fn cdf_correction(c: &CumulantSet, k: usize) -> Result<HermiteSeries> {
    check_order(c.max_order(), k)?;
    let mut out = HermiteSeries::zero();
    for p in weighted_partitions(k) {
        out.accumulate(k + 2 * p.j() - 1, -partition_weight(c, &p));
    }
    Ok(out)
}

/// Signed Edgeworth approximant of order `m` for the density and distribution
/// function of `Z_n`.
///
/// The density approximant can be negative far in the tails; it is not clipped.
#[derive(Clone, Debug)]
pub struct EdgeworthApproximant {
    m: usize,
    density_terms: Vec<HermiteSeries>,
    cdf_terms: Vec<HermiteSeries>,
    density_f64: Vec<Vec<f64>>,
    cdf_f64: Vec<Vec<f64>>,
    max_order: usize,
}

impl EdgeworthApproximant {
    pub fn new(c: &CumulantSet, m: usize) -> Result<Self> {
        if m < 2 || m > c.max_order().max(2) {
            return Err(Error::OrderOutOfRange {
                order: m,
                max: c.max_order(),
            });
        }
        let density_terms = (1..=m - 2)
            .map(|k| density_correction(c, k))
            .collect::<Result<Vec<_>>>()?;
        let cdf_terms = (1..=m - 2).map(|k| cdf_correction(c, k)).collect::<Result<Vec<_>>>()?;
        let density_f64: Vec<Vec<f64>> = density_terms.iter().map(|q| q.dense_f64()).collect();
        let cdf_f64: Vec<Vec<f64>> = cdf_terms.iter().map(|q| q.dense_f64()).collect();
        let max_order = density_f64.iter().map(|v| v.len()).max().unwrap_or(0);
        Ok(EdgeworthApproximant {
            m,
            density_terms,
            cdf_terms,
            density_f64,
            cdf_f64,
            max_order,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `q_1, …, q_{m-2}`; empty when `m = 2`.
    pub fn density_terms(&self) -> &[HermiteSeries] {
        &self.density_terms
    }

    pub fn cdf_terms(&self) -> &[HermiteSeries] {
        &self.cdf_terms
    }

    fn weighted_sum(&self, terms: &[Vec<f64>], n: u64, x: f64) -> f64 {
        if terms.is_empty() {
            return 0.0;
        }
        let h = hermite_eval_all(self.max_order, x);
        let scale = (n as f64).powf(-0.5);
        let mut factor = 1.0;
        let mut acc = 0.0;
        for coeffs in terms {
            factor *= scale;
            let s: f64 = coeffs.iter().zip(&h).map(|(a, hr)| a * hr).sum();
            acc += s * factor;
        }
        acc
    }

    /// `φ_m(x) - φ(x) = Σ q_k(x) n^{-k/2}`.
    pub fn density_correction(&self, n: u64, x: f64) -> f64 {
        std_normal_pdf(x) * self.weighted_sum(&self.density_f64, n, x)
    }

    /// `φ_m(x)`.
    pub fn density(&self, n: u64, x: f64) -> f64 {
        assert!(n >= 1, "n must be >= 1");
        std_normal_pdf(x) * (1.0 + self.weighted_sum(&self.density_f64, n, x))
    }

    /// `Φ_m(x) = Φ(x) + Σ Q_k(x) n^{-k/2}`.
    pub fn cdf(&self, n: u64, x: f64) -> f64 {
        assert!(n >= 1, "n must be >= 1");
        let corr = if x.is_finite() {
            std_normal_pdf(x) * self.weighted_sum(&self.cdf_f64, n, x)
        } else {
            0.0
        };
        std_normal_cdf(x) + corr
    }
}

/// Polynomial `P_k(it) = Σ_ν a_ν (it)^ν` in the formal vector variable `it`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CumulantPolynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

type MultiPoly = BTreeMap<MultiIndex, Rational>;

fn multi_poly_mul(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let mut out = MultiPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e = ea.add(eb);
            let entry = out.entry(e).or_insert_with(Rational::zero);
            *entry += ca * cb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

impl CumulantPolynomial {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Rational> {
        &self.terms
    }

    pub fn coeff(&self, nu: &MultiIndex) -> Rational {
        self.terms.get(nu).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `P_k(it)` at a real vector `t`.
    pub fn eval_at(&self, t: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(nu, a)| {
                let mono: Complex64 = nu
                    .components()
                    .iter()
                    .zip(t)
                    .map(|(&k, &ti)| Complex64::new(0.0, ti).powu(k))
                    .product();
                mono * to_f64(a)
            })
            .sum()
    }
}

/// `P_k(it)` for a random vector with the given cumulant tensor.
pub fn cumulant_polynomial(c: &CumulantTensor, k: usize) -> Result<CumulantPolynomial> {
    check_order(c.max_order(), k)?;
    let d = c.dim();
    // building blocks Σ_{|ν| = i+2} γ_ν z^ν / ν!
    let blocks: Vec<MultiPoly> = (1..=k)
        .map(|i| {
            multiindex_enumerate(d, i + 2)
                .into_iter()
                .filter_map(|nu| {
                    let g = c.get(&nu);
                    if g.is_zero() {
                        None
                    } else {
                        let f = Rational::from_integer(nu.factorial());
                        Some((nu, g / f))
                    }
                })
                .collect()
        })
        .collect();
    let mut terms = MultiPoly::new();
    for p in weighted_partitions(k) {
        let mut prod: MultiPoly = [(MultiIndex::zeros(d), Rational::one())].into_iter().collect();
        let mut denom = Rational::one();
        for (i, &li) in p.parts().iter().enumerate() {
            for _ in 0..li {
                prod = multi_poly_mul(&prod, &blocks[i]);
            }
            denom *= Rational::from_integer(factorial(li as usize));
        }
        for (nu, v) in prod {
            *terms.entry(nu).or_insert_with(Rational::zero) += v / &denom;
        }
    }
    terms.retain(|_, v| !v.is_zero());
    Ok(CumulantPolynomial { dim: d, terms })
}

/// Multidimensional density correction `q_k(x) = φ(x) Σ a_ν H_ν(x)`, where
/// `a_ν` is the coefficient of `(it)^ν` in `P_k(it)`.
pub fn density_correction_multi(c: &CumulantTensor, k: usize) -> Result<MultiHermiteSeries> {
    let p = cumulant_polynomial(c, k)?;
    Ok(MultiHermiteSeries::from_map(p.terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rat_int};

    fn cum(gs: &[Rational]) -> CumulantSet {
        CumulantSet::new(gs.to_vec())
    }

    #[test]
    fn partitions_small() {
        let p = |k| -> Vec<Vec<u32>> { weighted_partitions(k).into_iter().map(|w| w.parts().to_vec()).collect() };
        assert_eq!(p(1), vec![vec![1]]);
        assert_eq!(p(2), vec![vec![2, 0], vec![0, 1]]);
        assert_eq!(p(3), vec![vec![3, 0, 0], vec![1, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn partitions_match_brute_force() {
        for k in 1..=7usize {
            // enumerate every r with 0 <= r_i <= k/i
            let mut brute = Vec::new();
            let bounds: Vec<usize> = (1..=k).map(|i| k / i).collect();
            let mut r = vec![0usize; k];
            'outer: loop {
                if r.iter().enumerate().map(|(i, v)| (i + 1) * v).sum::<usize>() == k {
                    brute.push(r.iter().map(|&v| v as u32).collect::<Vec<_>>());
                }
                for i in 0..k {
                    if r[i] < bounds[i] {
                        r[i] += 1;
                        continue 'outer;
                    }
                    r[i] = 0;
                }
                break;
            }
            let mut ours: Vec<Vec<u32>> = weighted_partitions(k).into_iter().map(|w| w.parts().to_vec()).collect();
            assert!(weighted_partitions(k).iter().all(|w| w.weight() == k));
            ours.sort();
            brute.sort();
            assert_eq!(ours, brute, "k = {k}");
        }
    }

    #[test]
    fn first_density_terms() {
        let g = rat(3, 7);
        let q1 = density_correction(&cum(std::slice::from_ref(&g)), 1).unwrap();
        assert_eq!(q1.coeffs().len(), 1);
        assert_eq!(q1.coeff(&3), &g / rat_int(6));

        let (g3, g4) = (rat(-2, 5), rat(5, 3));
        let q2 = density_correction(&cum(&[g3.clone(), g4.clone()]), 2).unwrap();
        assert_eq!(q2.coeff(&4), &g4 / rat_int(24));
        assert_eq!(q2.coeff(&6), &g3 * &g3 / rat_int(72));
        assert_eq!(q2.coeffs().len(), 2);

        assert!(density_correction(&CumulantSet::gaussian(6), 3).unwrap().is_zero());
    }

    #[test]
    fn first_cdf_terms() {
        let g = rat(1, 2);
        let big_q1 = cdf_correction(&cum(std::slice::from_ref(&g)), 1).unwrap();
        assert_eq!(big_q1.coeff(&2), -&g / rat_int(6));

        let (g3, g4) = (rat(1, 3), rat(-1, 4));
        let big_q2 = cdf_correction(&cum(&[g3.clone(), g4.clone()]), 2).unwrap();
        assert_eq!(big_q2.coeff(&3), -&g4 / rat_int(24));
        assert_eq!(big_q2.coeff(&5), -(&g3 * &g3) / rat_int(72));
        assert!(cdf_correction(&CumulantSet::gaussian(5), 2).unwrap().is_zero());
    }

    #[test]
    fn order_out_of_range() {
        let c = cum(&[rat_int(1)]);
        assert!(matches!(density_correction(&c, 2), Err(Error::OrderOutOfRange { .. })));
        assert!(matches!(cdf_correction(&c, 0), Err(Error::OrderOutOfRange { .. })));
    }

    #[test]
    fn approximant_values() {
        let phi0 = std_normal_pdf(0.0);
        let a2 = EdgeworthApproximant::new(&CumulantSet::gaussian(2), 2).unwrap();
        assert!(a2.density_terms().is_empty());
        assert_eq!(a2.density(7, 0.0), phi0);
        assert!((phi0 - 0.398_942_280_401_432_7).abs() < 1e-16);

        let c = cum(&[rat_int(1)]);
        let a3 = EdgeworthApproximant::new(&c, 3).unwrap();
        assert_eq!(a3.density(1, 0.0), phi0);
        let expected = std_normal_pdf(1.0) * 5.0 / 6.0;
        assert!((a3.density(4, 1.0) - expected).abs() < 1e-16);

        assert_eq!(a2.cdf(3, 0.4), std_normal_cdf(0.4));
        assert!((a3.cdf(4, 0.0) - (0.5 + phi0 / 12.0)).abs() < 1e-16);
        assert_eq!(a3.cdf(4, f64::NEG_INFINITY), 0.0);
        assert_eq!(a3.cdf(4, f64::INFINITY), 1.0);
        assert!(a3.cdf(4, -40.0).abs() < 1e-300);
        assert!((a3.cdf(4, 40.0) - 1.0).abs() < 1e-16);
    }

    #[test]
    fn cumulant_polynomial_one_dimensional() {
        let c = cum(&[rat(1, 2), rat(-3, 4), rat(2, 5), rat(1, 7)]);
        let t = CumulantTensor::from_set(&c);
        for k in 1..=4 {
            let p = cumulant_polynomial(&t, k).unwrap();
            let q = density_correction(&c, k).unwrap();
            let from_p: BTreeMap<usize, Rational> = p
                .terms()
                .iter()
                .map(|(nu, v)| (nu.components()[0] as usize, v.clone()))
                .collect();
            assert_eq!(&from_p, q.coeffs(), "k = {k}");
        }
    }

    #[test]
    fn cumulant_polynomial_k1_and_zero() {
        let mut t = CumulantTensor::new(2, 4);
        t.set(MultiIndex::new(vec![2, 1]), rat(1, 3)).unwrap();
        t.set(MultiIndex::new(vec![0, 3]), rat(-1, 2)).unwrap();
        let p1 = cumulant_polynomial(&t, 1).unwrap();
        assert_eq!(p1.coeff(&MultiIndex::new(vec![2, 1])), rat(1, 6));
        assert_eq!(p1.coeff(&MultiIndex::new(vec![0, 3])), rat(-1, 12));
        assert_eq!(p1.terms().len(), 2);

        assert!(cumulant_polynomial(&CumulantTensor::new(3, 5), 2).unwrap().is_zero());

        let mut only = CumulantTensor::new(2, 3);
        only.set(MultiIndex::new(vec![3, 0]), rat(4, 5)).unwrap();
        let q = density_correction_multi(&only, 1).unwrap();
        assert_eq!(q.coeffs().len(), 1);
        assert_eq!(q.coeff(&MultiIndex::new(vec![3, 0])), rat(4, 30));
    }

    #[test]
    fn multi_eval_factorizes() {
        let mut t = CumulantTensor::new(2, 3);
        t.set(MultiIndex::new(vec![3, 0]), rat_int(1)).unwrap();
        let q = density_correction_multi(&t, 1).unwrap();
        let one_d = density_correction(&cum(&[rat_int(1)]), 1).unwrap();
        let x = [0.8, -0.3];
        let lhs = q.eval(&x).unwrap();
        let rhs = one_d.eval(0.8) * std_normal_pdf(-0.3);
        assert!((lhs - rhs).abs() < 1e-15);
    }
}
