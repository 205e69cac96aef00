//! RMS distance between the coarse-grid estimate and the fine-grid estimate of
//! the same path, along a ladder of halving `h_max`.
//!
//! cargo run --release --example convergence_ladder -- [paths]

use carma_spectral::mc::{convergence_study, ConvergenceConfig};
use carma_spectral::{CarmaSpec, DriverSpec};

fn main() -> carma_spectral::Result<()> {
    let paths = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let config = ConvergenceConfig {
        spec: CarmaSpec::car1(1.0, 2.0, 1.0)?,
        driver: DriverSpec::brownian(1.0),
        horizon: 10.0,
        ladder: vec![0.1, 0.05, 0.025],
        mesh: 0.001,
        paths,
        frequencies: vec![0.0, 1.0],
        master_seed: 2024,
        stream_base: 0,
    };
    let table = convergence_study(&config)?;
    println!("{:>8} {:>6} {:>14} {:>8} {:>14} {:>8}", "h_max", "N", "rms(w=0)", "ratio", "rms(w=1)", "ratio");
    for row in &table.rows {
        let r = |k: usize| row.ratio[k].map_or("-".to_string(), |x| format!("{x:.3}"));
        println!(
            "{:>8} {:>6} {:>14.6e} {:>8} {:>14.6e} {:>8}",
            row.h_max, row.n_points, row.rms[0], r(0), row.rms[1], r(1)
        );
    }
    Ok(())
}
