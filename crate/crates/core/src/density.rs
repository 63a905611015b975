//! Grid densities, characteristic-function convolution powers and the
//! truncation construction.

use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rustfft::{Fft, FftPlanner};

use crate::algebra::{
    binomial, factorial, gaussian_moment, moments_to_cumulants, moments_to_cumulants_f64, CumulantSet, Rational,
};
use crate::error::{Error, Result};
use crate::mixture::MixingMeasure;
use crate::special::{binomial_pmf, ln_binomial, std_normal_pdf};

/// Mass clamped away from negative ringing above which a transform is rejected.
pub const CLAMP_LIMIT: f64 = 1e-6;

/// A density sampled at `x_i = lo + i·h`, `h = (hi - lo)/n_points`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    clamped_mass: f64,
}

impl GridDensity {
    pub fn new(lo: f64, hi: f64, values: Vec<f64>) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Invalid(format!("bad support [{lo}, {hi}]")));
        }
        if !values.len().is_power_of_two() || values.len() < 2 {
            return Err(Error::Invalid(format!(
                "grid size {} is not a power of two",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Invalid(format!("grid value {v} is not a non-negative number")));
        }
        Ok(GridDensity {
            lo,
            hi,
            values,
            clamped_mass: 0.0,
        })
    }

    /// Samples `f` at the grid points and normalizes.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: &Grid, f: F) -> Result<Self> {
        let h = grid.step();
        let values = (0..grid.n_points)
            .map(|i| f(grid.lo() + i as f64 * h).max(0.0))
            .collect();
        let mut g = GridDensity::new(grid.lo(), grid.hi(), values)?;
        g.normalize()?;
        Ok(g)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.x(i))
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.lo, self.hi, self.values.len())
    }

    /// Mass removed when negative ringing was clamped (0 for direct samples).
    pub fn clamped_mass(&self) -> f64 {
        self.clamped_mass
    }

    pub fn mass(&self) -> f64 {
        self.step() * self.values.iter().sum::<f64>()
    }

    pub fn normalization_defect(&self) -> f64 {
        (1.0 - self.mass()).abs()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let m = self.mass();
        if !(m > 0.0) {
            return Err(Error::Invalid("density has zero mass".into()));
        }
        for v in &mut self.values {
            *v /= m;
        }
        Ok(())
    }

    pub fn moment(&self, k: i32) -> f64 {
        let h = self.step();
        self.xs().zip(&self.values).map(|(x, v)| x.powi(k) * v).sum::<f64>() * h
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.moment(2) - m * m
    }

    /// `h Σ |p_i - q_i|` on a common grid.
    pub fn l1_distance(&self, other: &GridDensity) -> Result<f64> {
        if self.grid() != other.grid() {
            return Err(Error::Invalid("densities live on different grids".into()));
        }
        Ok(self.step()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    pub fn max_abs_diff<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.xs()
            .zip(&self.values)
            .map(|(x, v)| (v - f(x)).abs())
            .fold(0.0, f64::max)
    }

    /// Linear interpolation; 0 outside the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let h = self.step();
        let pos = (x - self.lo) / h;
        if pos < 0.0 || pos > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return self.values[i];
        }
        let f = pos - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        let mut out = String::new();
        writeln!(
            out,
            "# lo={:.17e} hi={:.17e} n_points={}",
            self.lo,
            self.hi,
            self.values.len()
        )
        .expect("write to string");
        for (x, v) in self.xs().zip(&self.values) {
            writeln!(out, "{x:.17e} {v:.17e}").expect("write to string");
        }
        w.write_all(out.as_bytes())?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty density file".into()))??;
        let mut lo = None;
        let mut hi = None;
        let mut n = None;
        for tok in header.trim_start_matches('#').split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
            let parse_f = |v: &str| v.parse::<f64>().map_err(|e| Error::Parse(format!("{k}: {e}")));
            match k {
                "lo" => lo = Some(parse_f(v)?),
                "hi" => hi = Some(parse_f(v)?),
                "n_points" => n = Some(v.parse::<usize>().map_err(|e| Error::Parse(format!("n_points: {e}")))?),
                _ => return Err(Error::Parse(format!("unknown header key {k:?}"))),
            }
        }
        let (lo, hi, n) = match (lo, hi, n) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return Err(Error::Parse("header needs lo, hi and n_points".into())),
        };
        let mut values = Vec::with_capacity(n);
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v = line
                .split_whitespace()
                .nth(1)
                .ok_or_else(|| Error::Parse(format!("expected two columns: {line:?}")))?;
            values.push(v.parse::<f64>().map_err(|e| Error::Parse(format!("{v:?}: {e}")))?);
        }
        if values.len() != n {
            return Err(Error::Parse(format!("header says {n} points, found {}", values.len())));
        }
        GridDensity::new(lo, hi, values)
    }
}

/// Uniform grid `[lo, hi)` with `n_points` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    lo: f64,
    hi: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n_points: usize) -> Self {
        assert!(lo < hi, "empty grid");
        assert!(
            n_points.is_power_of_two() && n_points >= 2,
            "grid size must be a power of two"
        );
        Grid { lo, hi, n_points }
    }

    pub fn symmetric(half_width: f64, n_points: usize) -> Self {
        Grid::new(-half_width, half_width, n_points)
    }

    /// `[-L, L]` with `L = max(12, 8 + √(2 log n))` and `2^14` points.
    pub fn default_for(n: u64) -> Self {
        Grid::symmetric(default_half_width(n), 1 << 14)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.n_points as f64
    }

    /// Frequency spacing `2π/(N h)` of the matching transform.
    pub fn dt(&self) -> f64 {
        2.0 * PI / (self.hi - self.lo)
    }

    /// Frequencies `t_k = kΔt`, `k = -N/2 … N/2-1`.
    pub fn frequencies(&self) -> Vec<f64> {
        let half = (self.n_points / 2) as i64;
        let dt = self.dt();
        (-half..half).map(|k| k as f64 * dt).collect()
    }
}

pub fn default_half_width(n: u64) -> f64 {
    12f64.max(8.0 + (2.0 * (n.max(1) as f64).ln()).sqrt())
}

/// Summand laws with mean 0 and variance 1.
#[derive(Clone, Debug)]
pub enum DistributionSpec {
    Gaussian,
    /// Uniform on `[-√3, √3]`.
    Uniform,
    /// `Exp(1) - 1`.
    CenteredExponential,
    /// Density `e^{-√2|x|}/√2`.
    Laplace,
    /// Components `(weight, mean, sd)`, standardized on construction.
    GaussianMixture(Vec<(f64, f64, f64)>),
    NormalScaleMixture(Arc<MixingMeasure>),
    Table(Arc<GridDensity>),
}

impl DistributionSpec {
    /// Rescales the mixture so it has mean 0 and variance 1.
    pub fn gaussian_mixture(components: Vec<(f64, f64, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("mixture needs at least one component".into()));
        }
        let wsum: f64 = components.iter().map(|c| c.0).sum();
        if components.iter().any(|c| !(c.0 > 0.0) || !(c.2 > 0.0)) || !(wsum > 0.0) {
            return Err(Error::Invalid("mixture weights and sds must be positive".into()));
        }
        let mean: f64 = components.iter().map(|c| c.0 * c.1).sum::<f64>() / wsum;
        let second: f64 = components
            .iter()
            .map(|c| c.0 * ((c.1 - mean).powi(2) + c.2 * c.2))
            .sum::<f64>()
            / wsum;
        let sd = second.sqrt();
        Ok(DistributionSpec::GaussianMixture(
            components
                .into_iter()
                .map(|(w, m, s)| (w / wsum, (m - mean) / sd, s / sd))
                .collect(),
        ))
    }

    /// Four-component symmetric mixture with `γ_3 = γ_4 = γ_5 = 0`.
    pub fn zero_kurtosis_mixture() -> Self {
        let a = 0.3f64.sqrt();
        let d = 0.06f64.sqrt();
        let (s1, s2) = ((0.7 - d).sqrt(), (0.7 + d).sqrt());
        DistributionSpec::GaussianMixture(vec![(0.25, a, s1), (0.25, -a, s1), (0.25, a, s2), (0.25, -a, s2)])
    }

    pub fn table(g: GridDensity) -> Result<Self> {
        let (m, v) = (g.mean(), g.variance());
        if m.abs() > 1e-6 || (v - 1.0).abs() > 1e-6 {
            return Err(Error::NonStandardized(format!("table has mean {m:e} and variance {v}")));
        }
        Ok(DistributionSpec::Table(Arc::new(g)))
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistributionSpec::Gaussian => "gaussian",
            DistributionSpec::Uniform => "uniform",
            DistributionSpec::CenteredExponential => "centered_exponential",
            DistributionSpec::Laplace => "laplace",
            DistributionSpec::GaussianMixture(_) => "gaussian_mixture",
            DistributionSpec::NormalScaleMixture(_) => "normal_scale_mixture",
            DistributionSpec::Table(_) => "table",
        }
    }

    /// Density, when known in closed form (or by quadrature for scale mixtures).
    pub fn pdf(&self, x: f64) -> Option<f64> {
        let s3 = 3f64.sqrt();
        Some(match self {
            DistributionSpec::Gaussian => std_normal_pdf(x),
            DistributionSpec::Uniform => {
                if x.abs() <= s3 {
                    1.0 / (2.0 * s3)
                } else {
                    0.0
                }
            }
            DistributionSpec::CenteredExponential => {
                if x >= -1.0 {
                    (-(x + 1.0)).exp()
                } else {
                    0.0
                }
            }
            DistributionSpec::Laplace => (-SQRT_2 * x.abs()).exp() / SQRT_2,
            DistributionSpec::GaussianMixture(c) => {
                c.iter().map(|&(w, m, s)| w * std_normal_pdf((x - m) / s) / s).sum()
            }
            DistributionSpec::NormalScaleMixture(p) => p.pdf(x).ok()?,
            DistributionSpec::Table(g) => g.eval(x),
        })
    }

    /// Characteristic function `E e^{itX}`, for families that have one registered.
    pub fn cf(&self, t: f64) -> Option<Complex64> {
        Some(match self {
            DistributionSpec::Gaussian => Complex64::new((-0.5 * t * t).exp(), 0.0),
            DistributionSpec::Uniform => {
                let a = 3f64.sqrt() * t;
                let v = if a.abs() < 1e-4 {
                    1.0 - a * a / 6.0 + a.powi(4) / 120.0
                } else {
                    a.sin() / a
                };
                Complex64::new(v, 0.0)
            }
            DistributionSpec::CenteredExponential => Complex64::from_polar(1.0, -t) / Complex64::new(1.0, -t),
            DistributionSpec::Laplace => Complex64::new(1.0 / (1.0 + 0.5 * t * t), 0.0),
            DistributionSpec::GaussianMixture(c) => c
                .iter()
                .map(|&(w, m, s)| Complex64::from_polar(w * (-0.5 * s * s * t * t).exp(), m * t))
                .sum(),
            DistributionSpec::NormalScaleMixture(p) => Complex64::new(p.cf(t).ok()?, 0.0),
            DistributionSpec::Table(_) => return None,
        })
    }

    pub fn has_analytic_cf(&self) -> bool {
        !matches!(self, DistributionSpec::Table(_))
    }

    /// Exact moments `μ_1 … μ_m` for the fixed families.
    pub fn exact_moments(&self, m: usize) -> Option<Vec<Rational>> {
        let moments = (1..=m).map(|k| -> Rational {
            match self {
                DistributionSpec::Gaussian => gaussian_moment(k),
                DistributionSpec::Uniform => {
                    if k % 2 == 1 {
                        Rational::zero()
                    } else {
                        Rational::new(BigInt::from(3).pow((k / 2) as u32), BigInt::from(k + 1))
                    }
                }
                DistributionSpec::Laplace => {
                    if k % 2 == 1 {
                        Rational::zero()
                    } else {
                        Rational::new(factorial(k), BigInt::from(2).pow((k / 2) as u32))
                    }
                }
                DistributionSpec::CenteredExponential => {
                    let mut acc = BigInt::zero();
                    for i in 0..=k {
                        let term = binomial(k, i) * factorial(i);
                        if (k - i) % 2 == 0 {
                            acc += term;
                        } else {
                            acc -= term;
                        }
                    }
                    Rational::from_integer(acc)
                }
                _ => unreachable!(),
            }
        });
        match self {
            DistributionSpec::Gaussian
            | DistributionSpec::Uniform
            | DistributionSpec::Laplace
            | DistributionSpec::CenteredExponential => Some(moments.collect()),
            _ => None,
        }
    }

    /// Moments in floating point.
    pub fn moments_f64(&self, m: usize) -> Result<Vec<f64>> {
        if let Some(ex) = self.exact_moments(m) {
            return Ok(ex.iter().map(crate::algebra::to_f64).collect());
        }
        match self {
            DistributionSpec::GaussianMixture(c) => Ok((1..=m)
                .map(|k| {
                    c.iter()
                        .map(|&(w, mu, s)| {
                            (0..=k)
                                .map(|i| {
                                    let b = crate::algebra::to_f64(&Rational::from_integer(binomial(k, i)));
                                    b * mu.powi((k - i) as i32)
                                        * s.powi(i as i32)
                                        * crate::algebra::to_f64(&gaussian_moment(i))
                                })
                                .sum::<f64>()
                                * w
                        })
                        .sum()
                })
                .collect()),
            DistributionSpec::NormalScaleMixture(p) => (1..=m)
                .map(|k| {
                    if k % 2 == 1 {
                        Ok(0.0)
                    } else {
                        Ok(p.moment(k as f64)? * crate::algebra::to_f64(&gaussian_moment(k)))
                    }
                })
                .collect(),
            DistributionSpec::Table(g) => Ok((1..=m).map(|k| g.moment(k as i32)).collect()),
            _ => unreachable!(),
        }
    }

    /// Cumulants `γ_3 … γ_m`: exact for the fixed families, rounded otherwise.
    pub fn cumulants(&self, m: usize) -> Result<CumulantSet> {
        if let Some(mom) = self.exact_moments(m) {
            return moments_to_cumulants(&mom);
        }
        let mut mom = self.moments_f64(m)?;
        // standardization holds analytically; clean the rounding
        mom[0] = 0.0;
        if m >= 2 {
            mom[1] = 1.0;
        }
        moments_to_cumulants_f64(&mom)
    }
}

/// Negative values clamped to zero, then normalized. Returns the clamped mass.
fn clamp_normalize(raw: &mut [f64], h: f64) -> Result<f64> {
    let mut clamped = 0.0;
    for v in raw.iter_mut() {
        if *v < 0.0 {
            clamped -= *v;
            *v = 0.0;
        }
    }
    clamped *= h;
    let mass = h * raw.iter().sum::<f64>();
    if !(mass > 0.0) {
        return Err(Error::GridTooCoarse {
            clamped,
            limit: CLAMP_LIMIT,
        });
    }
    for v in raw.iter_mut() {
        *v /= mass;
    }
    Ok(clamped)
}

/// Inverts characteristic-function samples `v(t_k)`, `t_k` from [`Grid::frequencies`].
pub fn invert_cf(v: &[Complex64], grid: &Grid) -> Result<GridDensity> {
    let n = grid.n_points;
    assert_eq!(v.len(), n, "one CF sample per grid point");
    let half = n / 2;
    let dt = grid.dt();
    let lo = grid.lo();
    let mut a = vec![Complex64::zero(); n];
    for (i, vk) in v.iter().enumerate() {
        let k = i as i64 - half as i64;
        let idx = k.rem_euclid(n as i64) as usize;
        a[idx] = vk * Complex64::from_polar(1.0, -(k as f64) * dt * lo);
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut a);
    let scale = 1.0 / (grid.hi() - grid.lo());
    let mut raw: Vec<f64> = a.iter().map(|c| c.re * scale).collect();
    let clamped = clamp_normalize(&mut raw, grid.step())?;
    if clamped > CLAMP_LIMIT {
        return Err(Error::GridTooCoarse {
            clamped,
            limit: CLAMP_LIMIT,
        });
    }
    let mut g = GridDensity::new(grid.lo(), grid.hi(), raw)?;
    g.clamped_mass = clamped;
    Ok(g)
}

/// Discrete characteristic function `h Σ_j p_j e^{iω x_j}` of grid values at
/// `ω_m = ω_0 + m·dω`, `m < count`, by the chirp-z transform.
pub fn grid_cf(g: &GridDensity, omega0: f64, domega: f64, count: usize) -> Vec<Complex64> {
    let n = g.n_points();
    let h = g.step();
    let beta = domega * h;
    let len = (n + count - 1).next_power_of_two();
    let chirp = |k: f64| Complex64::from_polar(1.0, 0.5 * beta * k * k);
    let mut a = vec![Complex64::zero(); len];
    for (j, &p) in g.values().iter().enumerate() {
        let jf = j as f64;
        a[j] = Complex64::from_polar(p, omega0 * h * jf) * chirp(jf);
    }
    let mut b = vec![Complex64::zero(); len];
    for (l, v) in b.iter_mut().enumerate().take(count) {
        *v = chirp(l as f64).conj();
    }
    for l in 1..n {
        b[len - l] = chirp(l as f64).conj();
    }
    let mut planner = FftPlanner::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(len);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(len);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inv.process(&mut a);
    let norm = 1.0 / len as f64;
    (0..count)
        .map(|m| {
            let mf = m as f64;
            let omega = omega0 + mf * domega;
            a[m] * norm * chirp(mf) * Complex64::from_polar(h, omega * g.lo())
        })
        .collect()
}

/// `u(t_k/√n)` on the frequency grid of `out`, where `u` is the discrete CF of `g`.
fn scaled_grid_cf(g: &GridDensity, out: &Grid, n: u64) -> Vec<Complex64> {
    let sn = (n as f64).sqrt();
    let dt = out.dt() / sn;
    let half = (out.n_points / 2) as f64;
    grid_cf(g, -half * dt, dt, out.n_points)
}

/// Grid representation of a summand law (`n = 1`).
pub fn density_from_spec(spec: &DistributionSpec, grid: &Grid) -> Result<GridDensity> {
    match spec {
        DistributionSpec::Table(g) => {
            if g.grid() == *grid {
                Ok((**g).clone())
            } else {
                GridDensity::from_fn(grid, |x| g.eval(x))
            }
        }
        DistributionSpec::NormalScaleMixture(p) => match &**p {
            MixingMeasure::Atoms(_) => GridDensity::from_fn(grid, |x| p.pdf(x).unwrap_or(0.0)),
            _ => convolve_power(spec, 1, grid),
        },
        _ => GridDensity::from_fn(grid, |x| spec.pdf(x).expect("closed-form density")),
    }
}

/// Density of `Z_n = (X_1 + … + X_n)/√n` on `grid`.
///
/// Uses `v(t/√n)^n` when the family has a registered characteristic function,
/// the discrete transform of the sampled density otherwise.
pub fn convolve_power(spec: &DistributionSpec, n: u64, grid: &Grid) -> Result<GridDensity> {
    if n == 0 {
        return Err(Error::Invalid("n must be >= 1".into()));
    }
    let direct_n1 = !matches!(
        spec,
        DistributionSpec::NormalScaleMixture(p) if !matches!(**p, MixingMeasure::Atoms(_))
    );
    if n == 1 && direct_n1 {
        return density_from_spec(spec, grid);
    }
    if let DistributionSpec::Table(g) = spec {
        return convolve_power_grid(g, n, grid);
    }
    if let DistributionSpec::NormalScaleMixture(p) = spec {
        return crate::mixture::mixture_pn(p, n, grid);
    }
    let sn = (n as f64).sqrt();
    let v: Vec<Complex64> = grid
        .frequencies()
        .iter()
        .map(|&t| spec.cf(t / sn).expect("registered CF").powu(n as u32))
        .collect();
    invert_cf(&v, grid)
}

/// `n`-fold normalized convolution of a grid density via its discrete CF.
pub fn convolve_power_grid(g: &GridDensity, n: u64, grid: &Grid) -> Result<GridDensity> {
    if n == 0 {
        return Err(Error::Invalid("n must be >= 1".into()));
    }
    let u = scaled_grid_cf(g, grid, n);
    let v: Vec<Complex64> = u.iter().map(|c| c.powu(n as u32)).collect();
    invert_cf(&v, grid)
}

/// `p = (1-b) ρ_1 + b ρ_2` split at the level `M`.
#[derive(Clone, Debug)]
pub struct TruncationDecomposition {
    pub threshold: f64,
    pub b: f64,
    pub m0: usize,
    pub parent: GridDensity,
    pub rho1: GridDensity,
    pub rho2: GridDensity,
}

pub fn truncate_decompose(p: &GridDensity, threshold: f64, m0: usize) -> Result<TruncationDecomposition> {
    let h = p.step();
    let b = h * p.values().iter().filter(|&&v| v > threshold).sum::<f64>();
    if b == 0.0 {
        return Err(Error::DensityBounded);
    }
    if b >= 0.5 {
        return Err(Error::ThresholdTooLow { b });
    }
    let lower: Vec<f64> = p
        .values()
        .iter()
        .map(|&v| if v > threshold { 0.0 } else { v / (1.0 - b) })
        .collect();
    let upper: Vec<f64> = p
        .values()
        .iter()
        .map(|&v| if v > threshold { v / b } else { 0.0 })
        .collect();
    Ok(TruncationDecomposition {
        threshold,
        b,
        m0,
        parent: p.clone(),
        rho1: GridDensity::new(p.lo(), p.hi(), lower)?,
        rho2: GridDensity::new(p.lo(), p.hi(), upper)?,
    })
}

impl TruncationDecomposition {
    /// Largest deviation of `(1-b)ρ_1 + bρ_2` from `p` on the grid.
    pub fn reconstruction_error(&self) -> f64 {
        self.parent
            .values()
            .iter()
            .zip(self.rho1.values().iter().zip(self.rho2.values()))
            .map(|(p, (r1, r2))| (p - ((1.0 - self.b) * r1 + self.b * r2)).abs())
            .fold(0.0, f64::max)
    }

    pub fn epsilon(&self, n: u64) -> f64 {
        epsilon_n(self.b, self.m0, n)
    }
}

/// `ε_n = Σ_{k ≤ m0} C(n,k)(1-b)^k b^{n-k}`.
pub fn epsilon_n(b: f64, m0: usize, n: u64) -> f64 {
    (0..=(m0 as u64).min(n)).map(|k| binomial_pmf(n, k, 1.0 - b)).sum()
}

pub fn epsilon_n_exact(b: &Rational, m0: usize, n: u64) -> Rational {
    let one_minus = Rational::one() - b;
    (0..=(m0 as u64).min(n))
        .map(|k| {
            Rational::from_integer(binomial(n as usize, k as usize))
                * num_traits::pow(one_minus.clone(), k as usize)
                * num_traits::pow(b.clone(), (n - k) as usize)
        })
        .fold(Rational::zero(), |a, x| a + x)
}

/// `n^{m0} b^{n-m0}`.
pub fn epsilon_bound_exact(b: &Rational, m0: usize, n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n).pow(m0 as u32)) * num_traits::pow(b.clone(), (n as usize).saturating_sub(m0))
}

/// CF of the surrogate `p̃_n` at frequency `t` (unscaled), given `u`, `u_1`, `u_2`
/// at `t/√n`: `(u^n - Σ_{k ≤ m0} C(n,k)((1-b)u_1)^k (b u_2)^{n-k}) / (1 - ε_n)`.
fn tilde_cf_value(u: Complex64, u1: Complex64, u2: Complex64, b: f64, m0: usize, n: u64, eps: f64) -> Complex64 {
    let mut low = Complex64::zero();
    for k in 0..=(m0 as u64).min(n) {
        let c = ln_binomial(n, k).exp();
        low += ((1.0 - b) * u1).powu(k as u32) * (b * u2).powu((n - k) as u32) * c;
    }
    (u.powu(n as u32) - low) / (1.0 - eps)
}

/// Explicit sum `Σ_{k > m0} C(n,k)((1-b)u_1)^k (b u_2)^{n-k} / (1 - ε_n)`.
pub fn tilde_cf_explicit(u1: Complex64, u2: Complex64, b: f64, m0: usize, n: u64) -> Complex64 {
    let eps = epsilon_n(b, m0, n);
    let mut acc = Complex64::zero();
    for k in (m0 as u64 + 1)..=n {
        let c = ln_binomial(n, k).exp();
        acc += ((1.0 - b) * u1).powu(k as u32) * (b * u2).powu((n - k) as u32) * c;
    }
    acc / (1.0 - eps)
}

/// Density of the bounded surrogate `p̃_n` on `grid`.
pub fn tilde_density(dec: &TruncationDecomposition, n: u64, grid: &Grid) -> Result<GridDensity> {
    if n < dec.m0 as u64 + 1 {
        return Err(Error::Invalid(format!("n = {n} must exceed m0 = {}", dec.m0)));
    }
    let eps = dec.epsilon(n);
    let u = scaled_grid_cf(&dec.parent, grid, n);
    let u1 = scaled_grid_cf(&dec.rho1, grid, n);
    let u2 = scaled_grid_cf(&dec.rho2, grid, n);
    let v: Vec<Complex64> = (0..grid.n_points)
        .map(|i| tilde_cf_value(u[i], u1[i], u2[i], dec.b, dec.m0, n, eps))
        .collect();
    invert_cf(&v, grid)
}

/// Same as [`tilde_density`] with the sum over `k > m0` taken term by term.
pub fn tilde_density_explicit(dec: &TruncationDecomposition, n: u64, grid: &Grid) -> Result<GridDensity> {
    let u1 = scaled_grid_cf(&dec.rho1, grid, n);
    let u2 = scaled_grid_cf(&dec.rho2, grid, n);
    let v: Vec<Complex64> = (0..grid.n_points)
        .map(|i| tilde_cf_explicit(u1[i], u2[i], dec.b, dec.m0, n))
        .collect();
    invert_cf(&v, grid)
}

/// `(2πe σ²)^{-d/2} e^{(D_1 + 1)/b}`.
pub fn remark24_m_bound(d1: f64, b: f64, sigma2: f64, d: usize) -> f64 {
    (2.0 * PI * std::f64::consts::E * sigma2).powf(-(d as f64) / 2.0) * ((d1 + 1.0) / b).exp()
}

/// Closed-form mass of `{e^{-(x+1)} > M}` for the centered exponential.
pub fn exponential_mass_above(threshold: f64) -> f64 {
    if threshold >= 1.0 {
        0.0
    } else {
        1.0 - threshold
    }
}
