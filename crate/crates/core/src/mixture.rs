//! Normal scale mixtures `p(x) = ∫ φ_σ(x) dP(σ)`.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density::{invert_cf, Grid, GridDensity};
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::special::{normal_pdf, std_normal_pdf};

/// Relative tolerance for integrals against a parametric mixing density.
pub const MIXING_REL_TOL: f64 = 1e-10;

/// Allowed slack in `Eρ² = 1` for atom measures.
pub const UNIT_MOMENT_TOL: f64 = 1e-10;

/// The mixing law of `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub enum MixingMeasure {
    /// Atoms `(σ_i, w_i)`.
    Atoms(Vec<(f64, f64)>),
    HeavyTail(HeavyTailMeasure),
}

/// Mixing density with the polynomial-logarithmic tail
/// `c σ^{-(s+1)} (log σ)^{-η}` on `σ > 2` carrying mass `w`, and the remaining
/// mass spread uniformly over `[σ_0, 1]`, with `σ_0` chosen so that `Eρ² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeavyTailMeasure {
    pub s: f64,
    pub eta: f64,
    pub tail_mass: f64,
    pub sigma0: f64,
    /// `∫_2^∞ σ^{-(s+1)} (log σ)^{-η} dσ`
    pub tail_norm: f64,
    /// `∫_2^∞ σ^{1-s} (log σ)^{-η} dσ`
    pub tail_second: f64,
}

pub const TAIL_START: f64 = 2.0;

/// `∫_{log 2}^{∞} g(y) dy` through `y = log 2 + τ/(1-τ)`.
fn integrate_log_tail<F: Fn(f64) -> f64>(g: F, y_lo: f64, rel: f64) -> Result<f64> {
    integrate_adaptive(
        |tau| {
            let one = 1.0 - tau;
            let y = y_lo + tau / one;
            let v = g(y) / (one * one);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        rel,
        0.0,
    )
}

impl HeavyTailMeasure {
    pub fn new(s: f64, eta: f64, tail_mass: f64) -> Result<Self> {
        if !(s > 2.0 && s < 4.0) {
            return Err(Error::Invalid(format!("s = {s} must lie in (2, 4)")));
        }
        if !(eta > 1.0) {
            return Err(Error::Invalid(format!("eta = {eta} must exceed 1")));
        }
        if !(tail_mass > 0.0 && tail_mass < 1.0) {
            return Err(Error::Invalid(format!("tail mass {tail_mass} must lie in (0, 1)")));
        }
        let y0 = TAIL_START.ln();
        // σ = e^y: dσ = e^y dy
        let tail_norm = integrate_log_tail(|y| (-s * y).exp() * y.powf(-eta), y0, 1e-12)?;
        let tail_second = integrate_log_tail(|y| ((2.0 - s) * y).exp() * y.powf(-eta), y0, 1e-12)?;
        let m2_tail = tail_second / tail_norm;
        let m2_segment = (1.0 - tail_mass * m2_tail) / (1.0 - tail_mass);
        // uniform on [σ0, 1] has second moment (1 + σ0 + σ0²)/3
        if !(m2_segment > 1.0 / 3.0 && m2_segment < 1.0) {
            return Err(Error::CalibrationFailure(format!(
                "tail mass {tail_mass} leaves segment second moment {m2_segment}, outside (1/3, 1)"
            )));
        }
        let sigma0 = 0.5 * (-1.0 + (12.0 * m2_segment - 3.0).sqrt());
        Ok(HeavyTailMeasure {
            s,
            eta,
            tail_mass,
            sigma0,
            tail_norm,
            tail_second,
        })
    }

    /// Largest tail mass for which calibration succeeds.
    pub fn max_tail_mass(s: f64, eta: f64) -> Result<f64> {
        let m = HeavyTailMeasure::new(s, eta, 0.01)?;
        let ratio = m.tail_second / m.tail_norm;
        // (1 - wR)/(1 - w) = 1/3
        Ok(2.0 / (3.0 * ratio - 1.0))
    }

    fn segment_density(&self) -> f64 {
        (1.0 - self.tail_mass) / (1.0 - self.sigma0)
    }

    /// `c_η` in `dP/dσ = c_η σ^{-(s+1)} (log σ)^{-η}` on `σ > 2`.
    pub fn tail_constant(&self) -> f64 {
        self.tail_mass / self.tail_norm
    }

    pub fn density(&self, sigma: f64) -> f64 {
        if sigma >= self.sigma0 && sigma <= 1.0 {
            self.segment_density()
        } else if sigma > TAIL_START {
            self.tail_constant() * sigma.powf(-(self.s + 1.0)) * sigma.ln().powf(-self.eta)
        } else {
            0.0
        }
    }

    /// `∫_{σ ≥ max(u, 2)} f(σ) dP(σ)` with an optional upper cut on `log σ`.
    fn tail_integral<F: Fn(f64) -> f64>(&self, f: F, u: f64, y_cut: Option<f64>) -> Result<f64> {
        let y0 = u.max(TAIL_START).ln();
        let (s, eta) = (self.s, self.eta);
        let g = |y: f64| {
            let sigma = y.exp();
            f(sigma) * (-s * y).exp() * y.powf(-eta)
        };
        let raw = match y_cut {
            Some(yc) if yc <= y0 => 0.0,
            Some(yc) => integrate_adaptive(g, y0, yc, MIXING_REL_TOL, 0.0)?,
            None => integrate_log_tail(g, y0, MIXING_REL_TOL)?,
        };
        Ok(self.tail_constant() * raw)
    }

    fn segment_integral<F: Fn(f64) -> f64>(&self, f: F, u: f64) -> Result<f64> {
        let a = u.max(self.sigma0);
        if a >= 1.0 {
            return Ok(0.0);
        }
        Ok(self.segment_density() * integrate_adaptive(f, a, 1.0, MIXING_REL_TOL, 0.0)?)
    }

    /// `E f(ρ)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        Ok(self.segment_integral(&f, 0.0)? + self.tail_integral(&f, 0.0, None)?)
    }

    pub fn cf(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        let seg = if t < 1e-6 {
            let (a, b) = (self.sigma0, 1.0f64);
            (b - a) - t * t * (b.powi(3) - a.powi(3)) / 6.0
        } else {
            segment_cf_closed_form(self.sigma0, t)
        };
        let seg = seg * self.segment_density();
        if t == 0.0 {
            return Ok(seg + self.tail_mass);
        }
        // e^{-σ²t²/2} < e^{-750} beyond this
        let y_cut = 0.5 * (1500.0 / (t * t)).ln();
        let tail = if y_cut > 60.0 {
            self.tail_integral(|sg| (-0.5 * sg * sg * t * t).exp(), 0.0, None)?
        } else {
            self.tail_integral(|sg| (-0.5 * sg * sg * t * t).exp(), 0.0, Some(y_cut))?
        };
        Ok(seg + tail)
    }
}

impl MixingMeasure {
    /// Atoms with weights normalized to 1.
    pub fn atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() || atoms.iter().any(|&(s, w)| !(s > 0.0) || !(w >= 0.0)) {
            return Err(Error::Invalid("atoms need positive σ and non-negative weights".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0) {
            return Err(Error::Invalid("atom weights sum to zero".into()));
        }
        let atoms: Vec<(f64, f64)> = atoms.into_iter().map(|(s, w)| (s, w / total)).collect();
        let m2: f64 = atoms.iter().map(|&(s, w)| w * s * s).sum();
        if !((m2 - 1.0).abs() <= UNIT_MOMENT_TOL) {
            return Err(Error::Invalid(format!("atoms have E ρ² = {m2}, need 1")));
        }
        Ok(MixingMeasure::Atoms(atoms))
    }

    /// `ρ ≡ 1`.
    pub fn degenerate() -> Self {
        MixingMeasure::Atoms(vec![(1.0, 1.0)])
    }

    /// Two equally weighted atoms `{σ_a, σ_b}` with `σ_b` set by `Eρ² = 1`.
    pub fn two_point(sigma_a: f64) -> Result<Self> {
        let b2 = 2.0 - sigma_a * sigma_a;
        if !(b2 > 0.0) {
            return Err(Error::CalibrationFailure(format!(
                "σ = {sigma_a} leaves no partner atom"
            )));
        }
        MixingMeasure::atoms(vec![(sigma_a, 0.5), (b2.sqrt(), 0.5)])
    }

    pub fn heavy_tail(s: f64, eta: f64, tail_mass: f64) -> Result<Self> {
        Ok(MixingMeasure::HeavyTail(HeavyTailMeasure::new(s, eta, tail_mass)?))
    }

    /// Smallest point of the support.
    pub fn sigma0(&self) -> f64 {
        match self {
            MixingMeasure::Atoms(a) => a
                .iter()
                .filter(|x| x.1 > 0.0)
                .map(|x| x.0)
                .fold(f64::INFINITY, f64::min),
            MixingMeasure::HeavyTail(h) => h.sigma0,
        }
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        match self {
            MixingMeasure::Atoms(a) => Ok(a.iter().map(|&(s, w)| w * f(s)).sum()),
            MixingMeasure::HeavyTail(h) => h.expect(f),
        }
    }

    /// `E ρ^s`.
    pub fn moment(&self, s: f64) -> Result<f64> {
        match self {
            MixingMeasure::HeavyTail(h) if s >= h.s => Ok(f64::INFINITY),
            _ => self.expect(|sg| sg.powf(s)),
        }
    }

    /// `v(t) = E e^{-ρ²t²/2}`.
    pub fn cf(&self, t: f64) -> Result<f64> {
        match self {
            MixingMeasure::Atoms(a) => Ok(a.iter().map(|&(s, w)| w * (-0.5 * s * s * t * t).exp()).sum()),
            MixingMeasure::HeavyTail(h) => h.cf(t),
        }
    }

    /// `ψ(t) = e^{t²/2} v(t) - 1`.
    pub fn psi(&self, t: f64) -> Result<f64> {
        match self {
            MixingMeasure::Atoms(a) => {
                // Σ w (e^x - 1) = Σ w g(x) + Σ w x with g(x) = e^x - 1 - x
                let half = 0.5 * t * t;
                let mut acc = 0.0;
                let mut lin = 1.0;
                for &(s, w) in a {
                    let x = (1.0 - s * s) * half;
                    acc += w * exp_minus_one_minus_x(x);
                    lin -= w * s * s;
                }
                Ok(acc + lin * half)
            }
            MixingMeasure::HeavyTail(h) => Ok((0.5 * t * t).exp() * h.cf(t)? - 1.0),
        }
    }

    /// `∫ φ_σ(x) dP(σ)`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        self.expect(|s| normal_pdf(x, s))
    }

    /// `P{ρ ≥ u}`.
    pub fn tail_prob(&self, u: f64) -> Result<f64> {
        match self {
            MixingMeasure::Atoms(a) => Ok(a.iter().filter(|x| x.0 >= u).map(|x| x.1).sum()),
            MixingMeasure::HeavyTail(h) => Ok(h.segment_integral(|_| 1.0, u)? + h.tail_integral(|_| 1.0, u, None)?),
        }
    }

    /// `∫_u^∞ σ^{-1} dP(σ)`.
    pub fn inverse_tail_integral(&self, u: f64) -> Result<f64> {
        match self {
            MixingMeasure::Atoms(a) => Ok(a.iter().filter(|x| x.0 >= u).map(|x| x.1 / x.0).sum()),
            MixingMeasure::HeavyTail(h) => {
                Ok(h.segment_integral(|s| 1.0 / s, u)? + h.tail_integral(|s| 1.0 / s, u, None)?)
            }
        }
    }
}

/// `e^x - 1 - x` without cancellation for small `x`.
fn exp_minus_one_minus_x(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let mut term = x * x / 2.0;
        let mut acc = 0.0;
        for k in 3..20 {
            acc += term;
            term *= x / k as f64;
            if term.abs() < 1e-18 * acc.abs() {
                break;
            }
        }
        acc
    } else {
        x.exp_m1() - x
    }
}

/// `v(t)` for `ψ` checks.
pub fn mixture_cf(p: &MixingMeasure, t: f64) -> Result<f64> {
    p.cf(t)
}

pub fn mixture_psi(p: &MixingMeasure, t: f64) -> Result<f64> {
    p.psi(t)
}

/// Density of `Z_n` for the scale mixture, from `v(t/√n)^n`.
pub fn mixture_pn(p: &MixingMeasure, n: u64, grid: &Grid) -> Result<GridDensity> {
    if n == 0 {
        return Err(Error::Invalid("n must be >= 1".into()));
    }
    let sn = (n as f64).sqrt();
    // v(t/√n)^n ≤ e^{-σ0² t²/2}
    let cutoff = (1500.0f64).sqrt() / p.sigma0();
    let v: Vec<Complex64> = grid
        .frequencies()
        .iter()
        .map(|&t| {
            if t.abs() > cutoff {
                Ok(Complex64::new(0.0, 0.0))
            } else {
                let base = p.cf(t / sn)?;
                Ok(Complex64::new(base.powi(n as i32), 0.0))
            }
        })
        .collect::<Result<_>>()?;
    invert_cf(&v, grid)
}

/// `φ(x) + n ∫ (φ_{σ_n}(x) - φ(x)) dP(σ)` with `σ_n = √(1 + (σ² - 1)/n)`.
pub fn prop71_approx(p: &MixingMeasure, n: u64, x: f64) -> Result<f64> {
    let nf = n as f64;
    let phi = std_normal_pdf(x);
    let corr = p.expect(|s| normal_pdf(x, (1.0 + (s * s - 1.0) / nf).sqrt()) - phi)?;
    Ok(phi + nf * corr)
}

/// Inverse-CDF sampler for `ρ`.
#[derive(Clone, Debug)]
pub struct RhoSampler {
    kind: SamplerKind,
}

#[derive(Clone, Debug)]
enum SamplerKind {
    Atoms {
        cum: Vec<f64>,
        sigma: Vec<f64>,
    },
    HeavyTail {
        sigma0: f64,
        tail_mass: f64,
        ys: Vec<f64>,
        cum: Vec<f64>,
    },
}

impl RhoSampler {
    pub fn new(p: &MixingMeasure) -> Result<Self> {
        let kind = match p {
            MixingMeasure::Atoms(a) => {
                let mut acc = 0.0;
                let cum = a
                    .iter()
                    .map(|x| {
                        acc += x.1;
                        acc
                    })
                    .collect();
                SamplerKind::Atoms {
                    cum,
                    sigma: a.iter().map(|x| x.0).collect(),
                }
            }
            MixingMeasure::HeavyTail(h) => {
                // conditional tail CDF on a log-σ table
                let y0 = TAIL_START.ln();
                let steps = 4000;
                let ymax = y0 + 60.0;
                let dy = (ymax - y0) / steps as f64;
                let (s, eta) = (h.s, h.eta);
                let g = |y: f64| (-s * y).exp() * y.powf(-eta);
                let mut ys = vec![y0];
                let mut cum = vec![0.0];
                let mut acc = 0.0;
                for i in 0..steps {
                    let a = y0 + i as f64 * dy;
                    acc += integrate_adaptive(g, a, a + dy, 1e-12, 0.0)?;
                    ys.push(a + dy);
                    cum.push(acc);
                }
                let total = h.tail_norm;
                let cum = cum.into_iter().map(|c| c / total).collect();
                SamplerKind::HeavyTail {
                    sigma0: h.sigma0,
                    tail_mass: h.tail_mass,
                    ys,
                    cum,
                }
            }
        };
        Ok(RhoSampler { kind })
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        match &self.kind {
            SamplerKind::Atoms { cum, sigma } => {
                let i = cum.partition_point(|&c| c <= u).min(sigma.len() - 1);
                sigma[i]
            }
            SamplerKind::HeavyTail {
                sigma0,
                tail_mass,
                ys,
                cum,
            } => {
                if u >= *tail_mass {
                    let v = (u - tail_mass) / (1.0 - tail_mass);
                    sigma0 + v * (1.0 - sigma0)
                } else {
                    let v = u / tail_mass;
                    let i = cum.partition_point(|&c| c <= v).clamp(1, cum.len() - 1);
                    let (c0, c1) = (cum[i - 1], cum[i]);
                    let f = if c1 > c0 { (v - c0) / (c1 - c0) } else { 0.0 };
                    (ys[i - 1] + f * (ys[i] - ys[i - 1])).exp()
                }
            }
        }
    }
}

/// Monte-Carlo estimate of `p_n(x) = E φ_{σ̄}(x)`, `σ̄² = (ρ_1² + … + ρ_n²)/n`.
/// Returns the estimate and its standard error.
pub fn mc_density(p: &MixingMeasure, n: u64, x: f64, draws: usize, seed: u64) -> Result<(f64, f64)> {
    let sampler = RhoSampler::new(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..draws {
        let mut s2 = 0.0;
        for _ in 0..n {
            let r = sampler.sample(&mut rng);
            s2 += r * r;
        }
        let v = normal_pdf(x, (s2 / n as f64).sqrt());
        sum += v;
        sum2 += v * v;
    }
    let d = draws as f64;
    let mean = sum / d;
    let var = (sum2 / d - mean * mean).max(0.0);
    Ok((mean, (var / d).sqrt()))
}

/// `√(π/2)/t · (erf(t/√2) - erf(tσ_0/√2))`, the closed-form segment integral.
pub fn segment_cf_closed_form(sigma0: f64, t: f64) -> f64 {
    let t = t.abs();
    let (a, b) = (t * sigma0 / SQRT_2, t / SQRT_2);
    // erfc keeps the difference accurate once both arguments are large
    let diff = if a > 0.5 {
        libm::erfc(a) - libm::erfc(b)
    } else {
        libm::erf(b) - libm::erf(a)
    };
    (PI / 2.0).sqrt() / t * diff
}
