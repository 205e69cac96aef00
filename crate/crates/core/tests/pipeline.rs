use carma_spectral::driver::DriverSpec;
use carma_spectral::fourier::KFormula;
use carma_spectral::linalg::RealMatrix;
use carma_spectral::mc::{self, MCConfig, MCReport};
use carma_spectral::simulate::burn_in_horizon;
use carma_spectral::CarmaSpec;

/// Second moment of the Euler scheme, propagated exactly from zero over the
/// burn-in: `V <- (I + dA) V (I + dA)^T + sigma2 d e e^T`.
fn euler_stationary_variance(spec: &CarmaSpec, mesh: f64) -> f64 {
    let n = spec.p();
    let step = RealMatrix::identity(n).add(&spec.state_matrix().scaled(mesh));
    let mut noise = RealMatrix::zeros(n, n);
    noise[(n - 1, n - 1)] = spec.sigma2() * mesh;
    let mut v = RealMatrix::zeros(n, n);
    let steps = (burn_in_horizon(spec).unwrap() / mesh).ceil() as usize;
    for _ in 0..steps {
        v = step.matmul(&v).matmul(&step.transpose()).add(&noise);
    }
    let b = spec.ma_coeffs();
    let vb = v.mul_vec(b);
    b.iter().zip(&vb).map(|(x, y)| x * y).sum()
}

#[test]
fn euler_weak_error_below_one_percent() {
    for spec in [
        CarmaSpec::car1(1.0, 2.0, 1.0).unwrap(),
        CarmaSpec::new(vec![1.0, 2.0], vec![1.0, 1.0], 1.0).unwrap(),
    ] {
        let euler = euler_stationary_variance(&spec, 0.001);
        let exact = spec.autocovariance(0.0).unwrap();
        assert!((euler / exact - 1.0).abs() <= 0.01, "{euler} vs {exact}");
    }
}

fn config(driver: DriverSpec, sigma2: f64) -> MCConfig {
    MCConfig {
        spec: CarmaSpec::car1(1.0, 2.0, sigma2).unwrap(),
        driver,
        horizon: 5.0,
        h_max: 0.05,
        mesh: 0.005,
        paths: 60,
        frequencies: mc::DEFAULT_FREQUENCIES.to_vec(),
        master_seed: 11,
        stream_base: 0,
        freeze_grid: false,
        alpha: 0.01,
    }
}

#[test]
fn report_is_identical_across_runs() {
    for (driver, s2) in [
        (DriverSpec::brownian(1.0), 1.0),
        (DriverSpec::variance_gamma(1.0, 4.0), 32.0),
        (DriverSpec::two_sided_poisson(10.0, 1.0), 20.0),
    ] {
        let cfg = config(driver, s2);
        let a = MCReport::analyse(&cfg, &mc::run_mc(&cfg).unwrap(), KFormula::Derived).unwrap();
        let b = MCReport::analyse(&cfg, &mc::run_mc(&cfg).unwrap(), KFormula::Derived).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let back: MCReport = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(back, a);
    }
}

#[test]
fn report_json_keys() {
    let cfg = config(DriverSpec::brownian(1.0), 1.0);
    let r = MCReport::analyse(&cfg, &mc::run_mc(&cfg).unwrap(), KFormula::Derived).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(v["report_version"], 1);
    for key in ["config", "suites", "correlations", "covariance_checks", "convergence"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let entry = &v["suites"][2][0];
    for key in ["sample_count", "mean", "variance", "ks_d", "ks_critical", "pass"] {
        assert!(entry.get(key).is_some(), "{key}");
    }
    assert_eq!(v["config"]["M"], 60);
}

#[test]
fn finite_horizon_mean_tracks_simulation_at_short_horizon() {
    // T = 5 makes K/T large enough to matter: 0.2 + K/T vs the limit 0.2
    let mut cfg = config(DriverSpec::brownian(1.0), 1.0);
    cfg.paths = 2000;
    cfg.h_max = 0.01;
    cfg.mesh = 0.001;
    cfg.frequencies = vec![0.0];
    let m = mc::run_mc(&cfg).unwrap();
    let e = mc::covariance_check(&m.column(0), &cfg.spec, 5.0, 0.0, KFormula::Derived).unwrap();
    assert!(e.z.abs() <= 4.0, "{e:?}");
    // the limit alone is off by several standard errors here
    assert!((e.limit - e.theoretical).abs() > 3.0 * e.standard_error, "{e:?}");
}
