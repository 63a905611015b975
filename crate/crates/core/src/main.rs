use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use entropic_clt::coeffs::{cj_exact, cj_quadrature, cj_symbolic, required_nodes};
use entropic_clt::config::{
    cumulants_from_config, mixing_from_config, parse_grid, parse_n_list, powers_of_two, spec_from_config, Config,
};
use entropic_clt::density::{DistributionSpec, Grid, GridDensity};
use entropic_clt::edgeworth::EdgeworthApproximant;
use entropic_clt::entropy::{relative_entropy_std, relative_entropy_std_with};
use entropic_clt::harness::{
    condition81_check, converge_experiment, corollary12_experiment, emit_report, format_float, lowerbound_default_grid,
    lowerbound_experiment, ExperimentOptions, ReportFormat, ReportRow, DEFAULT_TAIL_MASS,
};
use entropic_clt::mixture::MixingMeasure;
use entropic_clt::{Error, Result};

#[derive(Parser)]
#[command(
    name = "entropic-clt",
    version,
    about = "Entropic distance to normality for normalized sums"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Symbolic,
    Quadrature,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    JsonLines,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::JsonLines => ReportFormat::JsonLines,
        }
    }
}

#[derive(clap::Args)]
struct Output {
    /// Report file (stdout when omitted). Metadata goes to `<out>.meta`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Expansion coefficient c_j from a cumulant file.
    Coeffs {
        #[arg(long)]
        cumulants: Option<PathBuf>,
        #[arg(long)]
        j: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        /// Dimension for symbolic mode.
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Gauss-Hermite nodes for quadrature mode.
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Edgeworth approximant of order m for Z_n, tabulated on a grid.
    Edgeworth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: u64,
        /// `L=..,N=..` or `lo=..,hi=..,N=..`
        #[arg(long, default_value = "L=6,N=256")]
        grid: String,
        #[command(flatten)]
        output: Output,
    },
    /// Relative entropy of a tabulated density against N(0,1).
    Entropy {
        #[arg(long)]
        density: PathBuf,
        /// Core/tail split radius.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// D_n against the truncated expansion.
    Converge {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        grid: Option<String>,
        /// Skip the doubled-grid recomputation.
        #[arg(long)]
        no_grid_check: bool,
        #[command(flatten)]
        output: Output,
    },
    /// n^{k-2} D_n against gamma_k^2/(2 k!).
    Corollary12 {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Heavy-tailed scale mixture against n log n P{rho >= sqrt(n log n)}.
    Lowerbound {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        n_list: Option<String>,
        #[arg(long, default_value_t = DEFAULT_TAIL_MASS)]
        tail_mass: f64,
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// The tail sequence n^{s-1/2} int_{n^{1/2+gamma}}^inf sigma^{-1} dP.
    Check81 {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        gamma: f64,
        /// Heavy-tail log exponent (ignored with --mixing).
        #[arg(long, default_value_t = 1.5)]
        eta: f64,
        #[arg(long, default_value_t = DEFAULT_TAIL_MASS)]
        tail_mass: f64,
        /// Mixing measure config; the heavy-tailed measure for s and eta otherwise.
        #[arg(long)]
        mixing: Option<PathBuf>,
        #[arg(long)]
        n_list: Option<String>,
        #[command(flatten)]
        output: Output,
    },
}

fn n_list_or_default(text: &Option<String>) -> Result<Vec<u64>> {
    match text {
        Some(t) => parse_n_list(t),
        None => Ok(powers_of_two(4, 10)),
    }
}

fn load_spec(path: &Path) -> Result<DistributionSpec> {
    let cfg = Config::load(path)?;
    spec_from_config(&cfg, path.parent())
}

/// `--grid` with explicit bounds fixes the grid; `N=..` alone only sets the point count.
fn experiment_options(grid: &Option<String>, n_list: &[u64], check_grid: bool) -> Result<ExperimentOptions> {
    let mut opts = ExperimentOptions {
        check_grid,
        ..Default::default()
    };
    if let Some(text) = grid {
        let g = parse_grid(text, n_list[0])?;
        if text.contains("L=") || text.contains("lo=") {
            opts.grid = Some(g);
        } else {
            opts.points = Some(g.n_points);
        }
    }
    Ok(opts)
}

fn write_report<R: ReportRow>(rows: &[R], meta: &[(String, String)], output: &Output) -> Result<()> {
    match &output.out {
        Some(path) => {
            emit_report(rows, output.format.into(), io::BufWriter::new(File::create(path)?))?;
            if !meta.is_empty() {
                let mut side = path.clone().into_os_string();
                side.push(".meta");
                let text: String = meta.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
                std::fs::write(side, text)?;
            }
        }
        None => {
            emit_report(rows, output.format.into(), io::stdout().lock())?;
            for (k, v) in meta {
                eprintln!("{k}={v}");
            }
        }
    }
    Ok(())
}

fn check_rows(bad: usize) -> Result<()> {
    if bad > 0 {
        return Err(Error::QuadratureFailure(format!(
            "{bad} row(s) failed numerical diagnostics"
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Coeffs {
            cumulants,
            j,
            mode,
            dim,
            nodes,
        } => {
            let load = || -> Result<_> {
                let path = cumulants
                    .as_ref()
                    .ok_or_else(|| Error::Invalid("--cumulants is required in this mode".into()))?;
                cumulants_from_config(&Config::load(path)?)
            };
            let mut out = io::stdout().lock();
            writeln!(out, "j={j}")?;
            match mode {
                Mode::Exact => {
                    let v = cj_exact(&load()?, j)?;
                    writeln!(
                        out,
                        "mode=exact\nvalue={v}\nvalue_f64={}",
                        format_float(entropic_clt::algebra::to_f64(&v))
                    )?;
                }
                Mode::Quadrature => {
                    let nodes = nodes.unwrap_or_else(|| required_nodes(j));
                    let v = cj_quadrature(&load()?, j, nodes)?;
                    writeln!(out, "mode=quadrature\nnodes={nodes}\nvalue_f64={}", format_float(v))?;
                }
                Mode::Symbolic => {
                    let poly = cj_symbolic(j, dim)?;
                    writeln!(out, "mode=symbolic\ndim={dim}\npolynomial={poly}")?;
                    if cumulants.is_some() {
                        let v = poly.evaluate(&load()?)?;
                        writeln!(out, "value={v}")?;
                    }
                }
            }
        }
        Command::Edgeworth {
            spec,
            m,
            n,
            grid,
            output,
        } => {
            let spec = load_spec(&spec)?;
            let approx = EdgeworthApproximant::new(&spec.cumulants(m.max(3))?, m)?;
            let grid: Grid = parse_grid(&grid, n)?;
            let rows: Vec<EdgeworthRow> = (0..grid.n_points)
                .map(|i| {
                    let x = grid.lo() + i as f64 * grid.step();
                    EdgeworthRow {
                        x,
                        density: approx.density(n, x),
                        cdf: approx.cdf(n, x),
                    }
                })
                .collect();
            write_report(&rows, &[], &output)?;
        }
        Command::Entropy { density, radius } => {
            let p = GridDensity::read_text(BufReader::new(File::open(&density)?))?;
            let report = match radius {
                Some(t) => relative_entropy_std_with(&p, t)?,
                None => relative_entropy_std(&p)?,
            };
            print!("{}", report.to_key_values());
        }
        Command::Converge {
            spec,
            s,
            n_list,
            grid,
            no_grid_check,
            output,
        } => {
            let ns = n_list_or_default(&n_list)?;
            let opts = experiment_options(&grid, &ns, !no_grid_check)?;
            let dist = load_spec(&spec)?;
            let rows = converge_experiment(&dist, s, &ns, &opts)?;
            let meta = vec![
                ("family".to_string(), dist.name().to_string()),
                ("s".to_string(), format_float(s)),
            ];
            write_report(&rows, &meta, &output)?;
            check_rows(rows.iter().filter(|r| r.status.is_some()).count())?;
        }
        Command::Corollary12 {
            spec,
            k,
            n_list,
            grid,
            output,
        } => {
            let ns = n_list_or_default(&n_list)?;
            let opts = experiment_options(&grid, &ns, false)?;
            let dist = load_spec(&spec)?;
            let rows = corollary12_experiment(&dist, k, &ns, &opts)?;
            let meta = vec![
                ("family".to_string(), dist.name().to_string()),
                ("k".to_string(), k.to_string()),
            ];
            write_report(&rows, &meta, &output)?;
            check_rows(rows.iter().filter(|r| r.status.is_some()).count())?;
        }
        Command::Lowerbound {
            s,
            eta,
            n_list,
            tail_mass,
            grid,
            output,
        } => {
            let ns = n_list_or_default(&n_list)?;
            let grid = match grid {
                Some(t) => parse_grid(&t, ns[0])?,
                None => lowerbound_default_grid(),
            };
            let report = lowerbound_experiment(s, eta, tail_mass, &ns, &grid)?;
            write_report(&report.rows, &report.metadata, &output)?;
            check_rows(report.rows.iter().filter(|r| r.status.is_some()).count())?;
        }
        Command::Check81 {
            s,
            gamma,
            eta,
            tail_mass,
            mixing,
            n_list,
            output,
        } => {
            let ns = n_list_or_default(&n_list)?;
            let p = match mixing {
                Some(path) => mixing_from_config(&Config::load(&path)?)?,
                None => MixingMeasure::heavy_tail(s, eta, tail_mass)?,
            };
            let report = condition81_check(&p, s, gamma, &ns)?;
            let mut meta = vec![
                ("min".to_string(), format_float(report.min)),
                ("log_slope".to_string(), format_float(report.log_slope)),
                ("admissible".to_string(), report.admissible.to_string()),
            ];
            if let Some(e) = report.predicted_exponent {
                meta.push(("predicted_exponent".to_string(), format_float(e)));
            }
            write_report(&report.rows, &meta, &output)?;
        }
    }
    Ok(())
}

struct EdgeworthRow {
    x: f64,
    density: f64,
    cdf: f64,
}

impl ReportRow for EdgeworthRow {
    fn columns() -> &'static [&'static str] {
        &["x", "density", "cdf"]
    }

    fn cells(&self) -> Vec<entropic_clt::harness::Cell> {
        use entropic_clt::harness::Cell::Float;
        vec![Float(self.x), Float(self.density), Float(self.cdf)]
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}
