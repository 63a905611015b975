//! Normal scale mixtures: psi bounds, the n-fold density and its
//! one-term approximation.

use entropic_clt::density::Grid;
use entropic_clt::harness::prop71_max_error;
use entropic_clt::mixture::{mc_density, mixture_pn, MixingMeasure};

fn main() -> entropic_clt::Result<()> {
    let p = MixingMeasure::two_point(0.8)?;
    for t in [0.25, 0.5, 1.0] {
        println!(
            "psi({t}) = {:.6e}  M_4 t^4 = {:.6e}",
            p.psi(t)?,
            p.moment(4.0)? * t.powi(4)
        );
    }
    let grid = Grid::symmetric(12.0, 1 << 12);
    let mut prev: Option<f64> = None;
    for n in [4u64, 8, 16, 32, 64] {
        let err = prop71_max_error(&p, n, &grid)?;
        match prev {
            Some(e) => println!("n = {n:3}: max error {err:.4e}  ratio {:.3}", e / err),
            None => println!("n = {n:3}: max error {err:.4e}"),
        }
        prev = Some(err);
    }

    let heavy = MixingMeasure::heavy_tail(3.0, 1.5, 0.05)?;
    let pn = mixture_pn(&heavy, 16, &Grid::symmetric(400.0, 1 << 16))?;
    for x in [0.0, 1.0, 3.0] {
        let (est, se) = mc_density(&heavy, 16, x, 100_000, 7)?;
        println!(
            "heavy tail, n = 16, x = {x}: grid {:.6}  monte carlo {est:.6} +- {se:.1e}",
            pn.eval(x)
        );
    }
    Ok(())
}
