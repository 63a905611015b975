//! Coefficients `c_j` of the expansion `D(Z_n) = c_1/n + c_2/n² + …`.
//!
//! With `q_r = N_r φ`,
//!
//! ```text
//! c_j = Σ_{k=2}^{2j} (-1)^k / (k(k-1)) Σ_{r_1+…+r_k = 2j} E[N_{r_1}(Z) ⋯ N_{r_k}(Z)].
//! ```
//!
//! The inner sum is the coefficient of `u^{2j}` in `E[(Σ_r N_r u^r)^k]`, which is
//! how every routine here evaluates it.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::algebra::{
    factorial, gaussian_moment, hermite_eval_all, hermite_poly, multiindex_enumerate, to_f64, CumulantSet,
    CumulantTensor, MultiIndex, Poly, Rational,
};
use crate::edgeworth::{density_correction, weighted_partitions};
use crate::error::{Error, Result};
use crate::quadrature::GaussHermite;

fn outer_weight(k: usize) -> Rational {
    let sign = if k.is_multiple_of(2) { 1 } else { -1 };
    Rational::new(sign.into(), ((k * (k - 1)) as i64).into())
}

fn check_cumulants(c: &CumulantSet, j: usize) -> Result<()> {
    assert!(j >= 1, "j must be >= 1");
    if c.max_order() < 2 * j + 1 {
        return Err(Error::InsufficientCumulants {
            j,
            needed: 2 * j + 1,
            have: c.max_order(),
        });
    }
    Ok(())
}

/// `N_1, …, N_r` as monomial polynomials (index 0 unused).
fn correction_polys(c: &CumulantSet, rmax: usize) -> Result<Vec<Poly>> {
    let mut out = vec![Poly::zero()];
    for r in 1..=rmax {
        out.push(density_correction(c, r)?.to_poly());
    }
    Ok(out)
}

/// `A_k[t] = Σ_{r_1+…+r_k = t} N_{r_1} ⋯ N_{r_k}` for `t ≤ tmax`, one step of the
/// power recursion `A_{k} = A_{k-1} · (Σ N_r u^r)`.
fn power_step(prev: &[Poly], n: &[Poly], tmax: usize) -> Vec<Poly> {
    let mut next = vec![Poly::zero(); tmax + 1];
    for (t0, a) in prev.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (r, nr) in n.iter().enumerate().skip(1) {
            if t0 + r > tmax {
                break;
            }
            if nr.is_zero() {
                continue;
            }
            let prod = a.mul(nr);
            next[t0 + r].add_scaled(&prod, &Rational::one());
        }
    }
    next
}

/// Exact `c_j`.
pub fn cj_exact(c: &CumulantSet, j: usize) -> Result<Rational> {
    check_cumulants(c, j)?;
    let t = 2 * j;
    let n = correction_polys(c, t - 1)?;
    let mut power: Vec<Poly> = vec![Poly::zero(); t + 1];
    for (r, nr) in n.iter().enumerate().skip(1) {
        power[r] = nr.clone();
    }
    let mut total = Rational::zero();
    for k in 2..=t {
        power = power_step(&power, &n, t);
        total += outer_weight(k) * power[t].gaussian_expectation();
    }
    Ok(total)
}

/// All compositions of `total` into `k` positive parts.
pub fn compositions(total: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if left < parts {
            return;
        }
        for first in 1..=left - (parts - 1) {
            cur.push(first);
            rec(left - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k >= 1 {
        rec(total, k, &mut Vec::new(), &mut out);
    }
    out
}

/// `∫ q_{r_1} ⋯ q_{r_k} φ^{1-k} dx = E[N_{r_1}(Z) ⋯ N_{r_k}(Z)]`, exactly.
pub fn mixed_integral(c: &CumulantSet, orders: &[usize]) -> Result<Rational> {
    let mut prod = Poly::one();
    for &r in orders {
        prod = prod.mul(&density_correction(c, r)?.to_poly());
    }
    Ok(prod.gaussian_expectation())
}

/// Minimum Gauss–Hermite nodes for which [`cj_quadrature`] is exact: the
/// integrand has degree `6j`.
pub fn required_nodes(j: usize) -> usize {
    3 * j + 1
}

/// `c_j` by Gauss–Hermite quadrature in `f64`.
pub fn cj_quadrature(c: &CumulantSet, j: usize, nodes: usize) -> Result<f64> {
    check_cumulants(c, j)?;
    if nodes < required_nodes(j) {
        return Err(Error::InsufficientNodes {
            needed: required_nodes(j),
            got: nodes,
        });
    }
    let t = 2 * j;
    let series: Vec<Vec<f64>> = (1..t)
        .map(|r| density_correction(c, r).map(|q| q.dense_f64()))
        .collect::<Result<_>>()?;
    let gh = GaussHermite::new(nodes);
    let weights: Vec<f64> = (2..=t).map(|k| to_f64(&outer_weight(k))).collect();
    let integrand = |x: f64| {
        let h = hermite_eval_all(3 * t, x);
        // nr[r] = N_r(x)
        let mut nr = vec![0.0; t];
        for (i, s) in series.iter().enumerate() {
            nr[i + 1] = s.iter().zip(&h).map(|(a, hv)| a * hv).sum();
        }
        let mut power = nr.clone();
        let mut acc = 0.0;
        for w in &weights {
            let mut next = vec![0.0; t + 1];
            for (t0, a) in power.iter().enumerate() {
                for (r, v) in nr.iter().enumerate().skip(1) {
                    if t0 + r <= t {
                        next[t0 + r] += a * v;
                    }
                }
            }
            acc += w * next[t];
            power = next;
        }
        acc
    };
    Ok(gh.integrate(integrand))
}

/// Monomial `Π γ_ν^{e_ν}` in cumulant symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CumulantMonomial(BTreeMap<MultiIndex, u32>);

impl CumulantMonomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn symbol(nu: MultiIndex) -> Self {
        CumulantMonomial([(nu, 1)].into_iter().collect())
    }

    pub fn powers(&self) -> &BTreeMap<MultiIndex, u32> {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = self.0.clone();
        for (k, e) in &other.0 {
            *out.entry(k.clone()).or_insert(0) += e;
        }
        CumulantMonomial(out)
    }

    /// Highest cumulant order `|ν|` present.
    pub fn max_order(&self) -> usize {
        self.0.keys().map(|nu| nu.order()).max().unwrap_or(0)
    }
}

impl fmt::Display for CumulantMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(nu, e)| {
                if *e == 1 {
                    format!("γ{nu}")
                } else {
                    format!("γ{nu}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" * "))
    }
}

type SymPoly = BTreeMap<CumulantMonomial, Rational>;

fn sym_add_scaled(acc: &mut SymPoly, other: &SymPoly, scale: &Rational) {
    for (m, v) in other {
        let entry = acc.entry(m.clone()).or_insert_with(Rational::zero);
        *entry += v * scale;
        if entry.is_zero() {
            acc.remove(m);
        }
    }
}

fn sym_mul(a: &SymPoly, b: &SymPoly) -> SymPoly {
    let mut out = SymPoly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let entry = out.entry(ma.mul(mb)).or_insert_with(Rational::zero);
            *entry += ca * cb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Polynomial in `x ∈ R^d` whose coefficients are symbolic.
type XPoly = BTreeMap<MultiIndex, SymPoly>;

fn xpoly_mul(a: &XPoly, b: &XPoly) -> XPoly {
    let mut out = XPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let prod = sym_mul(ca, cb);
            if prod.is_empty() {
                continue;
            }
            let entry = out.entry(ea.add(eb)).or_default();
            sym_add_scaled(entry, &prod, &Rational::one());
        }
    }
    out.retain(|_, v| !v.is_empty());
    out
}

fn xpoly_add(acc: &mut XPoly, other: &XPoly) {
    for (e, c) in other {
        let entry = acc.entry(e.clone()).or_default();
        sym_add_scaled(entry, c, &Rational::one());
    }
    acc.retain(|_, v| !v.is_empty());
}

fn xpoly_expectation(p: &XPoly) -> SymPoly {
    let mut out = SymPoly::new();
    for (e, c) in p {
        let mut m = Rational::one();
        for &k in e.components() {
            m *= gaussian_moment(k as usize);
            if m.is_zero() {
                break;
            }
        }
        if !m.is_zero() {
            sym_add_scaled(&mut out, c, &m);
        }
    }
    out
}

/// Symbolic `P_r(it)` coefficients: `(it)^ν ↦ polynomial in γ`.
fn symbolic_pk(d: usize, r: usize) -> BTreeMap<MultiIndex, SymPoly> {
    let blocks: Vec<BTreeMap<MultiIndex, SymPoly>> = (1..=r)
        .map(|i| {
            multiindex_enumerate(d, i + 2)
                .into_iter()
                .map(|nu| {
                    let coef = Rational::one() / Rational::from_integer(nu.factorial());
                    let sym: SymPoly = [(CumulantMonomial::symbol(nu.clone()), coef)].into_iter().collect();
                    (nu, sym)
                })
                .collect()
        })
        .collect();
    let mut out: BTreeMap<MultiIndex, SymPoly> = BTreeMap::new();
    for p in weighted_partitions(r) {
        let mut prod: BTreeMap<MultiIndex, SymPoly> = [(
            MultiIndex::zeros(d),
            [(CumulantMonomial::one(), Rational::one())].into_iter().collect(),
        )]
        .into_iter()
        .collect();
        let mut denom = Rational::one();
        for (i, &li) in p.parts().iter().enumerate() {
            for _ in 0..li {
                prod = xpoly_mul(&prod, &blocks[i]);
            }
            denom *= Rational::from_integer(factorial(li as usize));
        }
        let inv = Rational::one() / denom;
        for (nu, s) in prod {
            let entry = out.entry(nu).or_default();
            sym_add_scaled(entry, &s, &inv);
        }
    }
    out.retain(|_, v| !v.is_empty());
    out
}

/// `H_ν(x)` expanded into monomials in `x`.
fn hermite_multi_xpoly(nu: &MultiIndex) -> Vec<(MultiIndex, Rational)> {
    let d = nu.dim();
    let mut terms = vec![(MultiIndex::zeros(d), Rational::one())];
    for (axis, &k) in nu.components().iter().enumerate() {
        let h = hermite_poly(k as usize);
        let mut next = Vec::new();
        for (e, c) in &terms {
            for (p, hc) in h.as_poly().coeffs().iter().enumerate() {
                if hc.is_zero() {
                    continue;
                }
                next.push((e.add(&MultiIndex::axis(d, axis, p as u32)), c * hc));
            }
        }
        terms = next;
    }
    terms
}

/// Symbolic `N_r(x)` in monomials of `x`.
fn symbolic_correction(d: usize, r: usize) -> XPoly {
    let mut out = XPoly::new();
    for (nu, coef) in symbolic_pk(d, r) {
        for (e, c) in hermite_multi_xpoly(&nu) {
            let entry = out.entry(e).or_default();
            sym_add_scaled(entry, &coef, &c);
        }
    }
    out.retain(|_, v| !v.is_empty());
    out
}

/// `c_j` as an exact polynomial in the cumulant symbols `γ_ν`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffPolynomial {
    j: usize,
    dim: usize,
    terms: BTreeMap<CumulantMonomial, Rational>,
}

impl CoeffPolynomial {
    pub fn new(j: usize, dim: usize, terms: BTreeMap<CumulantMonomial, Rational>) -> Self {
        let terms = terms.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        CoeffPolynomial { j, dim, terms }
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<CumulantMonomial, Rational> {
        &self.terms
    }

    pub fn coeff(&self, m: &CumulantMonomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Highest cumulant order appearing in any term.
    pub fn max_cumulant_order(&self) -> usize {
        self.terms.keys().map(|m| m.max_order()).max().unwrap_or(0)
    }

    /// Evaluates with `γ_ν` looked up by `lookup`.
    pub fn evaluate_with<F: Fn(&MultiIndex) -> Rational>(&self, lookup: F) -> Rational {
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (nu, &e) in m.powers() {
                v *= num_traits::pow(lookup(nu), e as usize);
                if v.is_zero() {
                    break;
                }
            }
            total += v;
        }
        total
    }

    /// One-dimensional evaluation; symbols of order above `c.max_order()` count as 0.
    pub fn evaluate(&self, c: &CumulantSet) -> Result<Rational> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: 1,
            });
        }
        Ok(self.evaluate_with(|nu| c.gamma(nu.components()[0] as usize).unwrap_or_else(Rational::zero)))
    }

    pub fn evaluate_tensor(&self, c: &CumulantTensor) -> Result<Rational> {
        if self.dim != c.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: c.dim(),
            });
        }
        Ok(self.evaluate_with(|nu| c.get(nu)))
    }

    /// Sets the listed symbols to zero.
    pub fn restrict_zero(&self, zero: &[MultiIndex]) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| !zero.iter().any(|z| m.powers().contains_key(z)))
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        CoeffPolynomial::new(self.j, self.dim, terms)
    }
}

impl fmt::Display for CoeffPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if c.is_negative() {
                write!(f, "{m} * ({c})")?;
            } else {
                write!(f, "{m} * {c}")?;
            }
        }
        Ok(())
    }
}

/// Limits for the multidimensional symbolic computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SymbolicCap {
    pub max_dim: usize,
    pub max_j: usize,
}

impl Default for SymbolicCap {
    fn default() -> Self {
        SymbolicCap { max_dim: 3, max_j: 2 }
    }
}

/// Symbolic `c_j` in dimension `d`, with the default cap for `d ≥ 2`.
pub fn cj_symbolic(j: usize, d: usize) -> Result<CoeffPolynomial> {
    cj_symbolic_capped(j, d, SymbolicCap::default())
}

pub fn cj_symbolic_capped(j: usize, d: usize, cap: SymbolicCap) -> Result<CoeffPolynomial> {
    if j == 0 || d == 0 {
        return Err(Error::Invalid("j and d must be positive".into()));
    }
    if d >= 2 && (d > cap.max_dim || j > cap.max_j) {
        return Err(Error::Invalid(format!(
            "symbolic c_{j} in dimension {d} exceeds the cap (d <= {}, j <= {})",
            cap.max_dim, cap.max_j
        )));
    }
    let t = 2 * j;
    let n: Vec<XPoly> = std::iter::once(XPoly::new())
        .chain((1..t).map(|r| symbolic_correction(d, r)))
        .collect();
    let mut power: Vec<XPoly> = vec![XPoly::new(); t + 1];
    for (r, nr) in n.iter().enumerate().skip(1) {
        power[r] = nr.clone();
    }
    let mut total = SymPoly::new();
    for k in 2..=t {
        let mut next: Vec<XPoly> = vec![XPoly::new(); t + 1];
        for (t0, a) in power.iter().enumerate() {
            if a.is_empty() {
                continue;
            }
            for (r, nr) in n.iter().enumerate().skip(1) {
                if t0 + r > t {
                    break;
                }
                // the last power only contributes through its top slot
                if k == t && t0 + r != t {
                    continue;
                }
                let prod = xpoly_mul(a, nr);
                xpoly_add(&mut next[t0 + r], &prod);
            }
        }
        power = next;
        sym_add_scaled(&mut total, &xpoly_expectation(&power[t]), &outer_weight(k));
    }
    Ok(CoeffPolynomial::new(j, d, total))
}

/// `γ_k²/(2·k!)`, the value of `c_{k-2}` when `γ_3 = … = γ_{k-1} = 0`.
pub fn special_case_coefficient(k: usize) -> CoeffPolynomial {
    assert!(k >= 3, "k must be >= 3");
    let m = CumulantMonomial([(MultiIndex::new(vec![k as u32]), 2)].into_iter().collect());
    let c = Rational::one() / (Rational::from_integer(factorial(k)) * Rational::from_integer(2.into()));
    CoeffPolynomial::new(k - 2, 1, [(m, c)].into_iter().collect())
}

/// `m = ⌊s⌋`, the number of moments the functional uses.
fn moment_order(s: f64) -> usize {
    s.floor() as usize
}

/// Exact expansion of the finite-`n` functional
/// `Σ_{k=2}^{m-2} (-1)^k/(k(k-1)) ∫ (φ_m - φ)^k φ^{1-k}` in powers of `1/n`.
///
/// Entry `i` is the coefficient of `n^{-i}`; odd powers of `n^{-1/2}` vanish.
pub fn functional_series(c: &CumulantSet, s: f64) -> Result<Vec<Rational>> {
    let m = moment_order(s);
    if m < 4 {
        return Ok(Vec::new());
    }
    if c.max_order() < m {
        return Err(Error::InsufficientCumulants {
            j: (m - 2) / 2,
            needed: m,
            have: c.max_order(),
        });
    }
    let rmax = m - 2;
    let kmax = m - 2;
    let n = correction_polys(c, rmax)?;
    let tmax = kmax * rmax;
    let mut power: Vec<Poly> = vec![Poly::zero(); tmax + 1];
    for (r, nr) in n.iter().enumerate().skip(1) {
        power[r] = nr.clone();
    }
    let mut by_u = vec![Rational::zero(); tmax + 1];
    for k in 2..=kmax {
        power = power_step(&power, &n, tmax);
        let w = outer_weight(k);
        for (t, p) in power.iter().enumerate() {
            if !p.is_zero() {
                by_u[t] += &w * p.gaussian_expectation();
            }
        }
    }
    for (t, v) in by_u.iter().enumerate() {
        assert!(t % 2 == 0 || v.is_zero(), "odd power {t} did not vanish");
    }
    let mut series: Vec<Rational> = by_u.into_iter().step_by(2).collect();
    while series.last().is_some_and(|v| v.is_zero()) {
        series.pop();
    }
    Ok(series)
}

/// The functional at a given `n`, exactly.
pub fn theorem51_functional_exact(c: &CumulantSet, s: f64, n: u64) -> Result<Rational> {
    assert!(n >= 1, "n must be >= 1");
    let series = functional_series(c, s)?;
    let x = Rational::new(1.into(), n.into());
    let mut acc = Rational::zero();
    for v in series.iter().rev() {
        acc = acc * &x + v;
    }
    Ok(acc)
}

pub fn theorem51_functional(c: &CumulantSet, s: f64, n: u64) -> Result<f64> {
    theorem51_functional_exact(c, s, n).map(|v| to_f64(&v))
}

/// Solves `Σ_i a_i x_k^i = y_k` exactly (square Vandermonde system).
pub fn vandermonde_solve(xs: &[Rational], ys: &[Rational]) -> Result<Vec<Rational>> {
    let n = xs.len();
    if ys.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: ys.len(),
        });
    }
    let mut a: Vec<Vec<Rational>> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let mut row = Vec::with_capacity(n + 1);
            let mut p = Rational::one();
            for _ in 0..n {
                row.push(p.clone());
                p *= x;
            }
            row.push(y.clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Invalid("repeated Vandermonde nodes".into()))?;
        a.swap(col, pivot);
        let inv = Rational::one() / &a[col][col];
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (v, p) in a[r].iter_mut().zip(&pivot_row) {
                    *v -= &f * p;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n].clone()).collect())
}

/// Recovers the `1/n` coefficients of the functional from exact evaluations at
/// `max(4, degree+1)` distinct `n`, starting at `n_start`.
pub fn recover_functional_coefficients(c: &CumulantSet, s: f64, n_start: u64) -> Result<(Vec<u64>, Vec<Rational>)> {
    let degree = functional_series(c, s)?.len().saturating_sub(1);
    let points = (degree + 1).max(4);
    let ns: Vec<u64> = (0..points as u64).map(|i| n_start + i).collect();
    let xs: Vec<Rational> = ns.iter().map(|&n| Rational::new(1.into(), n.into())).collect();
    let ys: Vec<Rational> = ns
        .iter()
        .map(|&n| theorem51_functional_exact(c, s, n))
        .collect::<Result<_>>()?;
    Ok((ns, vandermonde_solve(&xs, &ys)?))
}

/// `Σ_{j ≤ ⌊(s-2)/2⌋} c_j n^{-j}` and the remainder scale.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionPrediction {
    pub s: f64,
    pub n: u64,
    pub coefficients: Vec<Rational>,
    pub value: f64,
    pub delta_n: f64,
}

/// `Δ_n = n^{-(s-2)/2} (log n)^{-(s - max(d,2))/2}`; `1` when `s = 2`.
pub fn remainder_scale(s: f64, n: u64, d: usize) -> f64 {
    if s <= 2.0 {
        return 1.0;
    }
    let nf = n as f64;
    let dd = d.max(2) as f64;
    nf.powf(-(s - 2.0) / 2.0) * nf.ln().powf(-(s - dd) / 2.0)
}

pub fn expansion_order(s: f64) -> usize {
    if s < 4.0 {
        0
    } else {
        ((s - 2.0) / 2.0).floor() as usize
    }
}

pub fn expansion_prediction(c: &CumulantSet, s: f64, n: u64) -> Result<ExpansionPrediction> {
    if n < 2 {
        return Err(Error::Invalid("prediction needs n >= 2".into()));
    }
    let coefficients: Vec<Rational> = (1..=expansion_order(s))
        .map(|j| cj_exact(c, j))
        .collect::<Result<_>>()?;
    let nf = n as f64;
    let value = coefficients
        .iter()
        .enumerate()
        .map(|(i, cj)| to_f64(cj) * nf.powi(-(i as i32 + 1)))
        .sum();
    Ok(ExpansionPrediction {
        s,
        n,
        coefficients,
        value,
        delta_n: remainder_scale(s, n, 1),
    })
}
