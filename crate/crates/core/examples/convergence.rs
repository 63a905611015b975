//! D(Z_n) for the centered exponential against c_1/n + c_2/n^2.

use entropic_clt::algebra::to_f64;
use entropic_clt::coeffs::cj_exact;
use entropic_clt::density::DistributionSpec;
use entropic_clt::harness::{converge_experiment, emit_report, ExperimentOptions, ReportFormat};

fn main() -> entropic_clt::Result<()> {
    let spec = DistributionSpec::CenteredExponential;
    let c = spec.cumulants(5)?;
    let (c1, c2) = (to_f64(&cj_exact(&c, 1)?), to_f64(&cj_exact(&c, 2)?));
    let opts = ExperimentOptions {
        check_grid: true,
        ..Default::default()
    };
    let ns: Vec<u64> = (4..=10).map(|k| 1 << k).collect();
    let rows = converge_experiment(&spec, 6.0, &ns, &opts)?;
    emit_report(&rows, ReportFormat::Csv, std::io::stdout().lock())?;
    println!();
    for r in &rows {
        let n = r.n as f64;
        println!(
            "n = {:5}: n D_n = {:.6}  n^2 (D_n - c_1/n) = {:.5}  (c_2 = {c2:.5})",
            r.n,
            n * r.d_n,
            n * n * (r.d_n - c1 / n)
        );
    }
    Ok(())
}
