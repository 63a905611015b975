//! Relative entropy against the standard normal on grid densities.

use serde::Serialize;

use crate::density::GridDensity;
use crate::error::{Error, Result};
use crate::special::std_normal_ln_pdf;

/// Values below this are treated as exact zeros (`0·log 0 = 0`).
pub const DENSITY_FLOOR: f64 = 1e-300;
/// Most negative entropy accepted as rounding noise.
pub const NEGATIVE_FLOOR: f64 = -1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub d_total: f64,
    /// Contribution of `|x| ≤ T`.
    pub d_core: f64,
    pub tail_mass: f64,
    pub tail_second_moment: f64,
    pub t_used: f64,
}

impl EntropyReport {
    /// `key=value` lines in field order.
    pub fn to_key_values(&self) -> String {
        format!(
            "d_total={:.16e}\nd_core={:.16e}\ntail_mass={:.16e}\ntail_second_moment={:.16e}\nt_used={:.16e}\n",
            self.d_total, self.d_core, self.tail_mass, self.tail_second_moment, self.t_used
        )
    }
}

/// Slowly growing offset `ρ_n` in the tail-split radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RhoChoice {
    Constant(f64),
    LogLog,
}

impl Default for RhoChoice {
    fn default() -> Self {
        RhoChoice::Constant(3.0)
    }
}

impl RhoChoice {
    pub fn value(&self, n: u64) -> f64 {
        match *self {
            RhoChoice::Constant(c) => c,
            RhoChoice::LogLog => (n as f64).ln().ln().max(0.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailSplit {
    pub s: f64,
    pub n: u64,
    pub rho_n: f64,
}

impl TailSplit {
    pub fn new(s: f64, n: u64, rho: RhoChoice) -> Self {
        TailSplit {
            s,
            n,
            rho_n: rho.value(n),
        }
    }

    pub fn radius(&self) -> f64 {
        tail_split_radius(self.s, self.n, self.rho_n)
    }
}

/// `T_n = √((s-2) log n + s log log n + ρ_n)`, and `√ρ_n` when `s = 2`.
pub fn tail_split_radius(s: f64, n: u64, rho_n: f64) -> f64 {
    assert!(s >= 2.0, "s must be >= 2");
    if s == 2.0 {
        return rho_n.sqrt();
    }
    assert!(n >= 3, "n must be >= 3");
    let ln = (n as f64).ln();
    ((s - 2.0) * ln + s * ln.ln() + rho_n).sqrt()
}

/// Default radius: the `s = 2` convention with `ρ_n = 3`.
pub fn default_radius() -> f64 {
    tail_split_radius(2.0, 3, RhoChoice::default().value(3))
}

/// Fraction of the cell around `x_i` lying outside `[-T, T]`. Cells are
/// `[x - h/2, x + h/2]` clipped to the span of the grid points.
fn outside_fractions(p: &GridDensity, t: f64) -> impl Iterator<Item = f64> + '_ {
    let h = p.step();
    let (first, last) = (p.lo(), p.hi() - h);
    p.xs().map(move |x| {
        let (a, b) = ((x - 0.5 * h).max(first), (x + 0.5 * h).min(last));
        let inside = (b.min(t) - a.max(-t)).max(0.0);
        1.0 - inside / (b - a)
    })
}

/// `∫_{|x| > T} x² p(x) dx`, each grid value standing for its cell.
pub fn tail_second_moment(p: &GridDensity, t: f64) -> f64 {
    outside_fractions(p, t)
        .zip(p.xs().zip(p.values()))
        .map(|(f, (x, &v))| f * x * x * v)
        .sum::<f64>()
        * p.step()
}

fn tail_mass(p: &GridDensity, t: f64) -> f64 {
    outside_fractions(p, t)
        .zip(p.values())
        .map(|(f, &v)| f * v)
        .sum::<f64>()
        * p.step()
}

/// `∫ p log(p/g)` with `log g` given pointwise; returns (total, core over |x| ≤ T).
fn kl_sum<F: Fn(f64) -> f64>(p: &GridDensity, ln_ref: F, t: f64) -> (f64, f64) {
    let h = p.step();
    let mut total = 0.0;
    let mut core = 0.0;
    for (f, (x, &v)) in outside_fractions(p, t).zip(p.xs().zip(p.values())) {
        if v < DENSITY_FLOOR {
            continue;
        }
        let term = v * (v.ln() - ln_ref(x));
        total += term;
        core += (1.0 - f) * term;
    }
    (total * h, core * h)
}

/// `D(p ‖ φ)` with the default split radius.
pub fn relative_entropy_std(p: &GridDensity) -> Result<EntropyReport> {
    relative_entropy_std_with(p, default_radius())
}

pub fn relative_entropy_std_with(p: &GridDensity, t: f64) -> Result<EntropyReport> {
    let (d_total, d_core) = kl_sum(p, std_normal_ln_pdf, t);
    if d_total < NEGATIVE_FLOOR {
        return Err(Error::NegativeEntropyBeyondFloor { value: d_total });
    }
    Ok(EntropyReport {
        d_total,
        d_core,
        tail_mass: tail_mass(p, t),
        tail_second_moment: tail_second_moment(p, t),
        t_used: t,
    })
}

/// `D(R)` against the normal with matching mean and variance, and the
/// reconstruction `D(R) - log σ + (E R² - 1)/2` of `D(R ‖ Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MatchedMoment {
    pub d_matched: f64,
    pub reconstruction: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn matched_moment_identity(p: &GridDensity) -> Result<MatchedMoment> {
    let mean = p.mean();
    let variance = p.variance();
    if !(variance > 0.0) {
        return Err(Error::Invalid(format!("grid variance {variance} is not positive")));
    }
    let sd = variance.sqrt();
    let ln_ref = |x: f64| std_normal_ln_pdf((x - mean) / sd) - sd.ln();
    let (d_matched, _) = kl_sum(p, ln_ref, f64::INFINITY);
    if d_matched < NEGATIVE_FLOOR {
        return Err(Error::NegativeEntropyBeyondFloor { value: d_matched });
    }
    let second = p.moment(2);
    Ok(MatchedMoment {
        d_matched,
        reconstruction: d_matched - sd.ln() + 0.5 * (second - 1.0),
        mean,
        variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{density_from_spec, DistributionSpec, Grid};
    use crate::quadrature::integrate_adaptive;
    use crate::special::{normal_pdf, std_normal_cdf, std_normal_pdf};

    fn grid() -> Grid {
        Grid::symmetric(12.0, 1 << 14)
    }

    #[test]
    fn gaussian_is_zero() {
        let p = GridDensity::from_fn(&grid(), std_normal_pdf).unwrap();
        let r = relative_entropy_std(&p).unwrap();
        assert!(r.d_total.abs() < 1e-10);
        assert!((r.t_used - 3f64.sqrt()).abs() < 1e-15);
        let m = matched_moment_identity(&p).unwrap();
        assert!(m.d_matched.abs() < 1e-10 && m.reconstruction.abs() < 1e-10);
    }

    #[test]
    fn wide_gaussian() {
        let g = Grid::symmetric(24.0, 1 << 15);
        let p = GridDensity::from_fn(&g, |x| normal_pdf(x, 2.0)).unwrap();
        let exact = 1.5 - 2f64.ln();
        let r = relative_entropy_std(&p).unwrap();
        assert!((r.d_total - exact).abs() < 1e-8);
        let m = matched_moment_identity(&p).unwrap();
        assert!(m.d_matched.abs() < 1e-10);
        assert!((m.reconstruction - exact).abs() < 1e-8);
    }

    #[test]
    fn uniform_entropy() {
        let p = density_from_spec(&DistributionSpec::Uniform, &grid()).unwrap();
        let exact = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln() - (2.0 * 3f64.sqrt()).ln();
        let r = relative_entropy_std(&p).unwrap();
        // the jump costs O(h) in the grid variance
        assert!((r.d_total - exact).abs() < 1e-3, "{} vs {exact}", r.d_total);
        let m = matched_moment_identity(&p).unwrap();
        assert!((m.reconstruction - r.d_total).abs() < 1e-8);
    }

    #[test]
    fn core_and_tail_split() {
        let p = GridDensity::from_fn(&grid(), |x| normal_pdf(x, 1.3)).unwrap();
        let r = relative_entropy_std_with(&p, 2.0).unwrap();
        assert!(r.d_core < r.d_total);
        let exact_mass = 2.0 * (1.0 - std_normal_cdf(2.0 / 1.3));
        assert!(
            (r.tail_mass - exact_mass).abs() < 1e-7,
            "{} vs {exact_mass}",
            r.tail_mass
        );
    }

    #[test]
    fn tail_moments() {
        let p = GridDensity::from_fn(&grid(), std_normal_pdf).unwrap();
        assert!((tail_second_moment(&p, 0.0) - 1.0).abs() < 1e-12);
        let exact = 2.0 * (4.0 * std_normal_pdf(4.0) + (1.0 - std_normal_cdf(4.0)));
        let quad = 2.0 * integrate_adaptive(|x| x * x * std_normal_pdf(x), 4.0, 40.0, 1e-13, 0.0).unwrap();
        assert!((exact - quad).abs() < 1e-14);
        assert!((tail_second_moment(&p, 4.0) - quad).abs() < 1e-9);
        assert_eq!(tail_second_moment(&p, 12.0), 0.0);
    }

    #[test]
    fn split_radius() {
        assert_eq!(tail_split_radius(2.0, 10, 3.0), 3f64.sqrt());
        let l = 16f64.ln();
        let expect = (2.0 * l + 4.0 * l.ln()).sqrt();
        assert!((tail_split_radius(4.0, 16, 0.0) - expect).abs() < 1e-15);
        let mut prev = 0.0;
        for n in 3..200u64 {
            let t = tail_split_radius(4.0, n, 3.0);
            assert!(t > prev && t >= 1.0);
            prev = t;
        }
        assert!(RhoChoice::LogLog.value(1000) > 1.9);
    }

    #[test]
    fn negative_entropy_flagged() {
        // a sub-normalized density makes ∫ p log(p/φ) negative
        let g = grid();
        let mut vals: Vec<f64> = g
            .frequencies()
            .iter()
            .enumerate()
            .map(|(i, _)| std_normal_pdf(g.lo() + i as f64 * g.step()) * 0.9)
            .collect();
        vals[0] = 0.0;
        let p = GridDensity::new(g.lo(), g.hi(), vals).unwrap();
        assert!(matches!(
            relative_entropy_std(&p),
            Err(Error::NegativeEntropyBeyondFloor { .. })
        ));
    }

    #[test]
    fn key_values() {
        let p = GridDensity::from_fn(&grid(), std_normal_pdf).unwrap();
        let kv = relative_entropy_std(&p).unwrap().to_key_values();
        assert_eq!(kv.lines().count(), 5);
        assert!(kv.starts_with("d_total="));
    }
}
