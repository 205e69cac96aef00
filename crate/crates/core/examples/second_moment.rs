//! Finite-horizon second moment `E|T_T(omega)|^2` against its limit, for a
//! range of horizons, with a Monte Carlo check at the shortest one.
//!
//! cargo run --release --example second_moment

use carma_spectral::fourier::{theoretical_product_mean, KFormula};
use carma_spectral::mc::{self, covariance_check, MCConfig};
use carma_spectral::{CarmaSpec, DriverSpec};

fn main() -> carma_spectral::Result<()> {
    let spec = CarmaSpec::car1(1.0, 2.0, 1.0)?;
    let omega = 0.5;
    println!("{:>7} {:>12} {:>12}", "T", "E|T|^2", "limit");
    for horizon in [2.0, 5.0, 10.0, 50.0, 200.0, 1000.0] {
        let m = theoretical_product_mean(&spec, horizon, omega, -omega, KFormula::Derived)?;
        let limit = 2.0 * std::f64::consts::PI * spec.spectral_density(omega);
        println!("{horizon:>7} {:>12.6} {:>12.6}", m.re, limit);
    }

    let config = MCConfig {
        spec: spec.clone(),
        driver: DriverSpec::brownian(1.0),
        horizon: 2.0,
        h_max: 0.01,
        mesh: 0.001,
        paths: 4000,
        frequencies: vec![omega],
        master_seed: 5,
        stream_base: 0,
        freeze_grid: false,
        alpha: mc::DEFAULT_ALPHA,
    };
    let samples = mc::run_mc(&config)?;
    let e = covariance_check(&samples.column(0), &spec, 2.0, omega, KFormula::Derived)?;
    println!(
        "T=2 Monte Carlo: {:.4} +- {:.4}, theory {:.4}, limit {:.4}, z = {:.2}",
        e.empirical, e.standard_error, e.theoretical, e.limit, e.z
    );
    Ok(())
}
