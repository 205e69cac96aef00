//! Spectral density of a CARMA(2,1) model next to the limit laws it implies
//! for the truncated Fourier transform.
//!
//! cargo run --example spectral_density

use carma_spectral::model::Statistic;
use carma_spectral::CarmaSpec;

fn main() -> carma_spectral::Result<()> {
    // a(z) = z^2 + z + 2, b(z) = 1 + z
    let spec = CarmaSpec::new(vec![1.0, 2.0], vec![1.0, 1.0], 1.0)?;
    println!("AR roots: {:?}", spec.ar_roots()?);
    println!("gamma(0) = {:.6}", spec.autocovariance(0.0)?);
    println!();
    println!("{:>6} {:>12} {:>14}", "omega", "f(omega)", "E|T|^2 limit");
    for omega in [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 5.0, 10.0] {
        let stat = if omega == 0.0 { Statistic::ZeroFreq } else { Statistic::ModulusSquared };
        let law = spec.limit_law(omega, stat)?;
        println!("{omega:>6} {:>12.6} {:>14?}", spec.spectral_density(omega), law.kind);
    }
    Ok(())
}
