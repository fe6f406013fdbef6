use risctl_core::metrics::{min_nonnull_frame, simulate_trials};
use risctl_core::*;

fn setup(n_trials: usize, seed: u64) -> SimulationSetup {
    SimulationSetup {
        n_trials,
        seed,
        ..SimulationSetup::default()
    }
}

fn frames() -> Vec<f64> {
    (2..=20).map(|k| f64::from(k) * 5.0).collect()
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn sweep_is_identical_across_pool_sizes() {
    let s = setup(2000, 5);
    for scheme in Scheme::ALL {
        let p = SchemeParams::new(scheme);
        let a = in_pool(1, || {
            goodput_sweep(&p, ControlMode::InBand, &frames(), &s).unwrap()
        });
        let b = in_pool(3, || {
            goodput_sweep(&p, ControlMode::InBand, &frames(), &s).unwrap()
        });
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.goodput_mbps.to_bits(), y.goodput_mbps.to_bits());
            assert_eq!(x.std_err_mbps.to_bits(), y.std_err_mbps.to_bits());
        }
    }
}

#[test]
fn oce_curve_rises_and_eventually_leads() {
    let s = setup(5000, 2);
    for mode in ControlMode::ALL {
        let oce = goodput_sweep(&SchemeParams::new(Scheme::Oce), mode, &frames(), &s).unwrap();
        let bsw = goodput_sweep(&SchemeParams::new(Scheme::Bsw), mode, &frames(), &s).unwrap();
        for w in oce.windows(2) {
            assert!(w[1].goodput_mbps >= w[0].goodput_mbps - 2.0 * w[1].std_err_mbps);
        }
        let (o, b) = (oce.last().unwrap(), bsw.last().unwrap());
        let se = (o.std_err_mbps.powi(2) + b.std_err_mbps.powi(2)).sqrt();
        assert!(o.goodput_mbps > b.goodput_mbps + 2.0 * se, "{mode}");
        let x = crossover_frame(&oce, &bsw).unwrap().expect("curves cross");
        assert!(x > min_nonnull_frame(&oce).unwrap());
    }
}

#[test]
fn bsw_goodput_never_exceeds_target_rate() {
    let s = setup(3000, 9);
    let p = SchemeParams::new(Scheme::Bsw);
    let cap = s.bandwidth_hz * (1.0 + p.target_snr).log2() / 1e6;
    for mode in ControlMode::ALL {
        for r in goodput_sweep(&p, mode, &frames(), &s).unwrap() {
            assert!(r.goodput_mbps <= cap * (1.0 - r.overhead_ms / r.frame_ms) + 1e-12);
        }
    }
}

#[test]
fn early_stopping_shares_outcomes_with_full_sweep() {
    let s = setup(3000, 4);
    let bsw = simulate_trials(&SchemeParams::new(Scheme::Bsw), &s).unwrap();
    let es = simulate_trials(&SchemeParams::new(Scheme::BswEs), &s).unwrap();
    for (a, b) in bsw.iter().zip(&es) {
        assert_eq!(a.success, b.success);
        assert_eq!(a.first_qualifying, b.first_qualifying);
    }
}

#[test]
fn oce_control_is_never_more_reliable_in_band() {
    let s = SimulationSetup::default();
    let axis: Vec<f64> = (0..=30).map(f64::from).collect();
    let oce = s.catalog(&SchemeParams::new(Scheme::Oce)).unwrap();
    let bsw = s.catalog(&SchemeParams::new(Scheme::Bsw)).unwrap();
    let go = reliability_grid(&oce, ControlMode::InBand, &axis, &axis, 84).unwrap();
    let gb = reliability_grid(&bsw, ControlMode::InBand, &axis, &axis, 84).unwrap();
    for (a, b) in go.iter().flatten().zip(gb.iter().flatten()) {
        assert!(a.reliability <= b.reliability + 1e-15);
    }
}
