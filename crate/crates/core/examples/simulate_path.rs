//! One Euler path on a randomised grid, printed at a handful of times, and
//! its truncated Fourier transform at a few frequencies.
//!
//! cargo run --release --example simulate_path -- [seed]

use carma_spectral::fourier::truncated_ft_many;
use carma_spectral::grid::ObservationGrid;
use carma_spectral::simulate::simulate_path;
use carma_spectral::{CarmaSpec, DriverSpec, RngStream};

fn main() -> carma_spectral::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let spec = CarmaSpec::car1(1.0, 2.0, 32.0)?;
    let driver = DriverSpec::variance_gamma(1.0, 4.0);
    let mut rng = RngStream::new(seed, 0);
    let grid = ObservationGrid::non_equidistant(20.0, 0.05, &mut rng)?;
    let path = simulate_path(&spec, &driver, &grid, 0.001, &mut rng, false)?;

    let obs = &path.observed;
    println!("{} points, max gap {:.4}, fine grid {} points", obs.grid.len(), obs.grid.max_gap(), path.fine.times.len());
    for j in (0..obs.y.len()).step_by(obs.y.len() / 8) {
        println!("  Y({:8.4}) = {:+.5}", obs.grid.times()[j], obs.y[j]);
    }
    for ft in truncated_ft_many(obs, &[0.0, 0.1, 1.0, 10.0])? {
        println!("  T(omega = {:>4}) = {:+.5} {:+.5}i", ft.omega, ft.value.re, ft.value.im);
    }
    if let Some(m) = &obs.metadata {
        println!("metadata: {}", serde_json::to_string(m).expect("serialisable"));
    }
    Ok(())
}
