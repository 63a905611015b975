//! Experiment drivers and report output.

use std::io::Write;

use crate::algebra::{factorial, rat_from_f64, to_f64, CumulantSet, Rational};
use crate::coeffs::{expansion_order, expansion_prediction};
use crate::density::{
    convolve_power, convolve_power_grid, density_from_spec, epsilon_bound_exact, epsilon_n_exact, tilde_density,
    truncate_decompose, DistributionSpec, Grid,
};
use crate::entropy::relative_entropy_std;
use crate::error::{Error, Result};
use crate::mixture::{mixture_pn, prop71_approx, MixingMeasure};

/// One output cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format_float(*v),
            Cell::Float(_) => "null".into(),
            Cell::Text(s) => serde_json::to_string(s).expect("string serializes"),
        }
    }
}

/// Seventeen significant digits.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub trait ReportRow {
    fn columns() -> &'static [&'static str];
    fn cells(&self) -> Vec<Cell>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    JsonLines,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json-lines" | "jsonl" => Ok(ReportFormat::JsonLines),
            other => Err(Error::Invalid(format!("unknown report format {other:?}"))),
        }
    }
}

/// Writes rows in input order with a fixed column order and `\n` line endings.
pub fn emit_report<R: ReportRow, W: Write>(rows: &[R], format: ReportFormat, mut w: W) -> Result<()> {
    let cols = R::columns();
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            out.push_str(&cols.join(","));
            out.push('\n');
            for r in rows {
                let line: Vec<String> = r.cells().iter().map(Cell::csv).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
        }
        ReportFormat::JsonLines => {
            for r in rows {
                let fields: Vec<String> = cols
                    .iter()
                    .zip(r.cells())
                    .map(|(c, v)| format!("{}:{}", serde_json::to_string(c).expect("key"), v.json()))
                    .collect();
                out.push('{');
                out.push_str(&fields.join(","));
                out.push_str("}\n");
            }
        }
    }
    w.write_all(out.as_bytes())?;
    Ok(())
}

fn status_cell(status: &Option<String>) -> Cell {
    Cell::Text(status.clone().unwrap_or_else(|| "ok".into()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: u64,
    pub d_n: f64,
    pub prediction: f64,
    pub residual: f64,
    pub scaled_residual: f64,
    /// Change in `D_n` when the grid is refined twofold.
    pub grid_delta: f64,
    /// `None` when the row is valid.
    pub status: Option<String>,
}

impl ReportRow for ConvergenceRow {
    fn columns() -> &'static [&'static str] {
        &[
            "n",
            "D_n",
            "prediction",
            "residual",
            "scaled_residual",
            "grid_delta",
            "status",
        ]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.n),
            Cell::Float(self.d_n),
            Cell::Float(self.prediction),
            Cell::Float(self.residual),
            Cell::Float(self.scaled_residual),
            Cell::Float(self.grid_delta),
            status_cell(&self.status),
        ]
    }
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentOptions {
    /// Fixed grid for every row; the size-dependent default otherwise.
    pub grid: Option<Grid>,
    /// Point count for the size-dependent default grid.
    pub points: Option<usize>,
    /// Recompute each row on a grid with twice the points.
    pub check_grid: bool,
}

impl ExperimentOptions {
    fn grid_for(&self, n: u64) -> Grid {
        self.grid.unwrap_or_else(|| {
            let g = Grid::default_for(n);
            Grid::new(g.lo(), g.hi(), self.points.unwrap_or(g.n_points))
        })
    }
}

/// `D(Z_n)` for a summand law.
pub fn entropy_of_sum(spec: &DistributionSpec, n: u64, grid: &Grid) -> Result<f64> {
    let p = convolve_power(spec, n, grid)?;
    Ok(relative_entropy_std(&p)?.d_total)
}

fn refined(grid: &Grid) -> Grid {
    Grid::new(grid.lo(), grid.hi(), grid.n_points * 2)
}

/// `D_n` against `Σ_{j ≤ ⌊(s-2)/2⌋} c_j n^{-j}`.
pub fn converge_experiment(
    spec: &DistributionSpec,
    s: f64,
    n_list: &[u64],
    opts: &ExperimentOptions,
) -> Result<Vec<ConvergenceRow>> {
    if !(s >= 2.0) {
        return Err(Error::Invalid(format!("s = {s} must be >= 2")));
    }
    let order = (2 * expansion_order(s) + 1).max(3);
    let cumulants = spec.cumulants(order)?;
    let expo = (s - 2.0) / 2.0;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let grid = opts.grid_for(n);
        let prediction = if n >= 2 {
            expansion_prediction(&cumulants, s, n)?.value
        } else {
            f64::NAN
        };
        let computed = entropy_of_sum(spec, n, &grid).and_then(|d| {
            let delta = if opts.check_grid {
                entropy_of_sum(spec, n, &refined(&grid))? - d
            } else {
                f64::NAN
            };
            Ok((d, delta))
        });
        let row = match computed {
            Ok((d_n, grid_delta)) => {
                let residual = d_n - prediction;
                let ln = (n as f64).ln();
                ConvergenceRow {
                    n,
                    d_n,
                    prediction,
                    residual,
                    scaled_residual: residual * (n as f64).powf(expo) * ln.powf(expo),
                    grid_delta,
                    status: None,
                }
            }
            Err(e) if e.is_numerical() => ConvergenceRow {
                n,
                d_n: f64::NAN,
                prediction,
                residual: f64::NAN,
                scaled_residual: f64::NAN,
                grid_delta: f64::NAN,
                status: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Corollary12Row {
    pub n: u64,
    pub d_n: f64,
    /// `n^{k-2} D_n`
    pub scaled: f64,
    /// `γ_k²/(2·k!)`
    pub limit: f64,
    pub ratio: f64,
    pub status: Option<String>,
}

impl ReportRow for Corollary12Row {
    fn columns() -> &'static [&'static str] {
        &["n", "D_n", "scaled", "limit", "ratio", "status"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.n),
            Cell::Float(self.d_n),
            Cell::Float(self.scaled),
            Cell::Float(self.limit),
            Cell::Float(self.ratio),
            status_cell(&self.status),
        ]
    }
}

/// Checks `γ_3 … γ_{k-1}` vanish and returns `γ_k²/(2·k!)`.
pub fn corollary12_limit(c: &CumulantSet, k: usize) -> Result<f64> {
    if k < 3 {
        return Err(Error::Invalid(format!("k = {k} must be >= 3")));
    }
    for r in 3..k {
        let g = c.gamma_f64(r);
        if g.abs() > 1e-12 {
            return Err(Error::CumulantAssumptionViolated { order: r, value: g });
        }
    }
    let gk = c.gamma(k).ok_or(Error::OrderOutOfRange {
        order: k,
        max: c.max_order(),
    })?;
    let limit: Rational = &gk * &gk / (Rational::from_integer(factorial(k)) * Rational::from_integer(2.into()));
    Ok(to_f64(&limit))
}

pub fn corollary12_experiment(
    spec: &DistributionSpec,
    k: usize,
    n_list: &[u64],
    opts: &ExperimentOptions,
) -> Result<Vec<Corollary12Row>> {
    let c = spec.cumulants(k.max(3))?;
    let limit = corollary12_limit(&c, k)?;
    let mut rows = Vec::new();
    for &n in n_list {
        let grid = opts.grid_for(n);
        rows.push(match entropy_of_sum(spec, n, &grid) {
            Ok(d_n) => {
                let scaled = d_n * (n as f64).powi(k as i32 - 2);
                Corollary12Row {
                    n,
                    d_n,
                    scaled,
                    limit,
                    ratio: scaled / limit,
                    status: None,
                }
            }
            Err(e) if e.is_numerical() => Corollary12Row {
                n,
                d_n: f64::NAN,
                scaled: f64::NAN,
                limit,
                ratio: f64::NAN,
                status: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundRow {
    pub n: u64,
    pub d_n: f64,
    /// `n log n · P{ρ ≥ √(n log n)}`
    pub bound: f64,
    pub ratio: f64,
    /// `D_n (n log n)^{(s-2)/2} (log n)^η`
    pub theorem13_scale: f64,
    pub status: Option<String>,
}

impl ReportRow for LowerBoundRow {
    fn columns() -> &'static [&'static str] {
        &["n", "D_n", "bound", "ratio", "theorem13_scale", "status"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.n),
            Cell::Float(self.d_n),
            Cell::Float(self.bound),
            Cell::Float(self.ratio),
            Cell::Float(self.theorem13_scale),
            status_cell(&self.status),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundReport {
    pub rows: Vec<LowerBoundRow>,
    pub sigma0: f64,
    /// `D_n / bound` at the smallest `n`.
    pub fitted_c: f64,
    pub metadata: Vec<(String, String)>,
}

impl LowerBoundReport {
    /// `min / max` of the scaled column over valid rows.
    pub fn scale_spread(&self) -> f64 {
        let vals: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.status.is_none())
            .map(|r| r.theorem13_scale)
            .collect();
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        min / max
    }
}

/// `[-400, 400]` with `2^16` points: the mixture has polynomial tails.
pub fn lowerbound_default_grid() -> Grid {
    Grid::symmetric(400.0, 1 << 16)
}

pub fn lowerbound_with_measure(
    p: &MixingMeasure,
    s: f64,
    eta: f64,
    n_list: &[u64],
    grid: &Grid,
) -> Result<LowerBoundReport> {
    let mut rows = Vec::new();
    for &n in n_list {
        if n < 2 {
            return Err(Error::Invalid("lower-bound rows need n >= 2".into()));
        }
        let nf = n as f64;
        let ln = nf.ln();
        let bound = nf * ln * p.tail_prob((nf * ln).sqrt())?;
        let computed = mixture_pn(p, n, grid).and_then(|pn| relative_entropy_std(&pn));
        rows.push(match computed {
            Ok(rep) => {
                let d_n = rep.d_total;
                LowerBoundRow {
                    n,
                    d_n,
                    bound,
                    ratio: if bound > 0.0 { d_n / bound } else { f64::NAN },
                    theorem13_scale: d_n * (nf * ln).powf((s - 2.0) / 2.0) * ln.powf(eta),
                    status: None,
                }
            }
            Err(e) if e.is_numerical() => LowerBoundRow {
                n,
                d_n: f64::NAN,
                bound,
                ratio: f64::NAN,
                theorem13_scale: f64::NAN,
                status: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        });
    }
    let fitted_c = rows.first().map_or(f64::NAN, |r| r.ratio);
    let metadata = match p {
        MixingMeasure::HeavyTail(h) => vec![
            ("mixing".into(), "heavy_tail".into()),
            ("s".into(), format_float(h.s)),
            ("eta".into(), format_float(h.eta)),
            ("tail_mass".into(), format_float(h.tail_mass)),
            ("sigma0".into(), format_float(h.sigma0)),
            ("tail_constant".into(), format_float(h.tail_constant())),
            (
                "extension".into(),
                "uniform on [sigma0, 1] carrying 1 - tail_mass; no mass on (1, 2]".into(),
            ),
            ("fitted_c".into(), format_float(fitted_c)),
        ],
        MixingMeasure::Atoms(a) => vec![
            ("mixing".into(), "atoms".into()),
            ("atoms".into(), a.len().to_string()),
            ("fitted_c".into(), format_float(fitted_c)),
        ],
    };
    Ok(LowerBoundReport {
        rows,
        sigma0: p.sigma0(),
        fitted_c,
        metadata,
    })
}

/// Default tail mass of the heavy-tailed mixing density.
pub const DEFAULT_TAIL_MASS: f64 = 0.05;

pub fn lowerbound_experiment(
    s: f64,
    eta: f64,
    tail_mass: f64,
    n_list: &[u64],
    grid: &Grid,
) -> Result<LowerBoundReport> {
    let p = MixingMeasure::heavy_tail(s, eta, tail_mass)?;
    lowerbound_with_measure(&p, s, eta, n_list, grid)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Condition81Row {
    pub n: u64,
    pub value: f64,
}

impl ReportRow for Condition81Row {
    fn columns() -> &'static [&'static str] {
        &["n", "value"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![Cell::Int(self.n), Cell::Float(self.value)]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Condition81Report {
    pub rows: Vec<Condition81Row>,
    pub min: f64,
    /// Least-squares slope of `log value` against `log n` (NaN if any value is 0).
    pub log_slope: f64,
    /// `0 < γ ≤ (s-2)/(2s)`
    pub admissible: bool,
    /// Power of `n` in the sequence for the heavy-tailed measure, ignoring logarithms.
    pub predicted_exponent: Option<f64>,
}

/// `n^{s-1/2} ∫_{n^{1/2+γ}}^∞ σ^{-1} dP(σ)` over `n_list`.
pub fn condition81_check(p: &MixingMeasure, s: f64, gamma: f64, n_list: &[u64]) -> Result<Condition81Report> {
    let rows: Vec<Condition81Row> = n_list
        .iter()
        .map(|&n| {
            let nf = n as f64;
            let u = nf.powf(0.5 + gamma);
            Ok(Condition81Row {
                n,
                value: nf.powf(s - 0.5) * p.inverse_tail_integral(u)?,
            })
        })
        .collect::<Result<_>>()?;
    let min = rows.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let log_slope = if rows.len() >= 2 && rows.iter().all(|r| r.value > 0.0) {
        let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.value.ln()).collect();
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    Ok(Condition81Report {
        rows,
        min,
        log_slope,
        admissible: gamma > 0.0 && gamma <= (s - 2.0) / (2.0 * s) * (1.0 + 1e-12),
        predicted_exponent: match p {
            MixingMeasure::HeavyTail(h) => Some(h.s - 0.5 - (0.5 + gamma) * (h.s + 1.0)),
            MixingMeasure::Atoms(_) => None,
        },
    })
}

/// `max_x |p_n(x) - approximant(x)|` on the grid.
pub fn prop71_max_error(p: &MixingMeasure, n: u64, grid: &Grid) -> Result<f64> {
    let pn = mixture_pn(p, n, grid)?;
    let mut worst: f64 = 0.0;
    for (x, &v) in pn.xs().zip(pn.values()) {
        worst = worst.max((v - prop71_approx(p, n, x)?).abs());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationRow {
    pub n: u64,
    pub epsilon: f64,
    /// `ε_n ≤ n^{m0} b^{n-m0}` in exact arithmetic at the rounded `b`.
    pub epsilon_bound_holds: bool,
    pub l1: f64,
    /// `2ε_n/(1-ε_n)`
    pub l1_bound: f64,
}

impl ReportRow for TruncationRow {
    fn columns() -> &'static [&'static str] {
        &["n", "epsilon", "epsilon_bound_holds", "l1", "l1_bound"]
    }

    fn cells(&self) -> Vec<Cell> {
        vec![
            Cell::Int(self.n),
            Cell::Float(self.epsilon),
            Cell::Text(self.epsilon_bound_holds.to_string()),
            Cell::Float(self.l1),
            Cell::Float(self.l1_bound),
        ]
    }
}

/// Compares `p̃_n` with `p_n` for `n` in `n_list` (each `> m0`).
pub fn truncation_experiment(
    spec: &DistributionSpec,
    threshold: f64,
    m0: usize,
    n_list: &[u64],
    grid: &Grid,
) -> Result<(f64, Vec<TruncationRow>)> {
    let p = density_from_spec(spec, grid)?;
    let dec = truncate_decompose(&p, threshold, m0)?;
    let b_exact = rat_from_f64(dec.b);
    let mut rows = Vec::new();
    for &n in n_list {
        let plain = convolve_power_grid(&p, n, grid)?;
        let tilde = tilde_density(&dec, n, grid)?;
        let eps_exact = epsilon_n_exact(&b_exact, m0, n);
        let epsilon = to_f64(&eps_exact);
        rows.push(TruncationRow {
            n,
            epsilon,
            epsilon_bound_holds: eps_exact <= epsilon_bound_exact(&b_exact, m0, n),
            l1: tilde.l1_distance(&plain)?,
            l1_bound: 2.0 * epsilon / (1.0 - epsilon),
        });
    }
    Ok((dec.b, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_layout() {
        let rows = vec![ConvergenceRow {
            n: 16,
            d_n: 0.0,
            prediction: 0.0,
            residual: 0.0,
            scaled_residual: 0.0,
            grid_delta: f64::NAN,
            status: None,
        }];
        let mut csv = Vec::new();
        emit_report(&rows, ReportFormat::Csv, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(
            text,
            "n,D_n,prediction,residual,scaled_residual,grid_delta,status\n\
             16,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,NaN,ok\n"
        );
        let mut js = Vec::new();
        emit_report(&rows, ReportFormat::JsonLines, &mut js).unwrap();
        let line = String::from_utf8(js).unwrap();
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(v["n"], 16);
        assert!(v["grid_delta"].is_null());
        assert!(line.starts_with("{\"n\":16,\"D_n\":"));
    }

    #[test]
    fn empty_table_is_header_only() {
        let mut out = Vec::new();
        emit_report::<LowerBoundRow, _>(&[], ReportFormat::Csv, &mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "n,D_n,bound,ratio,theorem13_scale,status\n"
        );
    }

    #[test]
    fn text_cells_are_quoted() {
        assert_eq!(Cell::Text("a,b".into()).csv(), "\"a,b\"");
        assert_eq!(Cell::Text("say \"x\"".into()).csv(), "\"say \"\"x\"\"\"");
    }

    #[test]
    fn gaussian_converges_to_zero() {
        let opts = ExperimentOptions::default();
        let rows = converge_experiment(&DistributionSpec::Gaussian, 4.0, &[4, 16], &opts).unwrap();
        for r in rows {
            assert!(r.d_n.abs() < 1e-9);
            assert_eq!(r.prediction, 0.0);
        }
    }

    #[test]
    fn cumulant_assumption_checked() {
        let r = corollary12_experiment(&DistributionSpec::CenteredExponential, 4, &[8], &Default::default());
        assert!(matches!(r, Err(Error::CumulantAssumptionViolated { order: 3, .. })));
    }

    #[test]
    fn degenerate_lower_bound_control() {
        let p = MixingMeasure::degenerate();
        let rep = lowerbound_with_measure(&p, 3.0, 1.5, &[16, 64], &Grid::symmetric(12.0, 1 << 12)).unwrap();
        for r in &rep.rows {
            assert!(r.d_n.abs() < 1e-9);
            assert_eq!(r.bound, 0.0);
        }
    }

    #[test]
    fn condition81_compact_support() {
        let p = MixingMeasure::two_point(0.8).unwrap();
        let rep = condition81_check(&p, 3.0, 1.0 / 6.0, &[16, 64, 256]).unwrap();
        assert!(rep.rows.iter().all(|r| r.value == 0.0));
        assert!(rep.admissible);
        assert!(rep.log_slope.is_nan());
        assert!(!condition81_check(&p, 3.0, 0.3, &[16]).unwrap().admissible);
    }
}
