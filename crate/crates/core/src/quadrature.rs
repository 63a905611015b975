//! Gauss–Hermite rules for the weight `φ` and adaptive Gauss–Kronrod integration.

use crate::error::{Error, Result};

/// Nodes and weights with `Σ w_i f(x_i) ≈ ∫ f(x) φ(x) dx`, exact for polynomials
/// of degree `< 2n`.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Newton iteration on the orthonormal physicists' recurrence, rescaled to the
    /// standard normal weight.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        const PIM4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * x[0],
                3 => 1.91 * z - 0.91 * x[1],
                _ => 2.0 * z - x[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = PIM4;
                let mut p2 = 0.0;
                for jj in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let j = jj as f64 + 1.0;
                    p1 = z * (2.0 / j).sqrt() * p2 - ((j - 1.0) / j).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            x[i] = z;
            x[n - 1 - i] = -z;
            w[i] = 2.0 / (pp * pp);
            w[n - 1 - i] = w[i];
        }
        if n % 2 == 1 {
            x[m - 1] = 0.0;
        }
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let nodes = x.iter().rev().map(|v| v * std::f64::consts::SQRT_2).collect();
        let weights = w.iter().rev().map(|v| v / sqrt_pi).collect();
        GaussHermite { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ f φ`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let hl = 0.5 * (b - a);
    let fc = f(c);
    let mut kr = WGK[7] * fc;
    let mut ga = WG[3] * fc;
    for i in 0..7 {
        let dx = hl * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kr += WGK[i] * s;
        if i % 2 == 1 {
            ga += WG[i / 2] * s;
        }
    }
    (kr * hl, ((kr - ga) * hl).abs())
}

/// Adaptive Gauss–Kronrod (7/15) on a finite interval.
///
/// Stops once the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    const MAX_INTERVALS: usize = 2000;
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if !total.is_finite() {
            return Err(Error::QuadratureFailure(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailure(format!(
                "error estimate {err:e} after {MAX_INTERVALS} subintervals on [{a}, {b}]"
            )));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{gaussian_moment, to_f64};

    #[test]
    fn hermite_rule_moments() {
        for n in [1usize, 2, 5, 10, 20, 40, 80] {
            let gh = GaussHermite::new(n);
            assert_eq!(gh.len(), n);
            for k in 0..2 * n {
                let exact = to_f64(&gaussian_moment(k));
                let got = gh.integrate(|x| x.powi(k as i32));
                let scale = gh.integrate(|x| x.abs().powi(k as i32)).max(1.0);
                assert!((got - exact).abs() <= 1e-10 * scale, "n={n} k={k}: {got} vs {exact}");
                if k > 30 {
                    break;
                }
            }
        }
    }

    #[test]
    fn hermite_rule_sorted_symmetric() {
        let gh = GaussHermite::new(9);
        assert!(gh.nodes.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(gh.nodes[4], 0.0);
        for i in 0..9 {
            assert!((gh.nodes[i] + gh.nodes[8 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_smooth_and_peaked() {
        let v = integrate_adaptive(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate_adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10, 0.0).unwrap();
        let exact = 2.0 * (1.0 / 1e-4f64.sqrt()) * (1.0 / 1e-4f64.sqrt()).atan();
        assert!((v - exact).abs() < 1e-8 * exact);
        assert_eq!(integrate_adaptive(|x| x, 3.0, 3.0, 1e-10, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = integrate_adaptive(|x| 1.0 / x, 0.0, 1.0, 1e-14, 0.0);
        assert!(matches!(r, Err(Error::QuadratureFailure(_))));
    }
}
