//! Prints the goodput curves of all schemes with their crossover and
//! first non-null frame. Run with `cargo run --release --example curves`.

use risctl_core::metrics::{frame_grid, min_nonnull_frame};
use risctl_core::*;

fn main() {
    let setup = SimulationSetup {
        n_trials: 100_000,
        seed: 1,
        ..SimulationSetup::default()
    };
    let grid = frame_grid(10.0, 100.0, 5.0).unwrap();
    for mode in ControlMode::ALL {
        let curves: Vec<_> = Scheme::ALL
            .iter()
            .map(|&s| goodput_sweep(&SchemeParams::new(s), mode, &grid, &setup).unwrap())
            .collect();
        for i in 0..grid.len() {
            println!(
                "{mode} {:5} {:.4} {:.4} {:.4}",
                grid[i], curves[0][i].goodput_mbps, curves[1][i].goodput_mbps, curves[2][i].goodput_mbps
            );
        }
        println!(
            "crossover {:?} nonnull {:?}",
            crossover_frame(&curves[0], &curves[1]).unwrap(),
            curves.iter().map(|c| min_nonnull_frame(c)).collect::<Vec<_>>()
        );
    }
}
