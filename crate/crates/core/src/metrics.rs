//! Monte Carlo goodput estimation and control-reliability grids.
//!
//! Channel outcomes do not depend on the frame length, so a sweep draws
//! every trial once and then evaluates each frame on the same outcomes.
//! Trial `i` always draws from ChaCha8 stream `i` of the master seed, which
//! makes results independent of the worker count; per-trial values are
//! collected in trial order and reduced sequentially.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    effective_snr_unchecked, make_codebook_with, optimal_config, sample_realization, BswConstruction,
    CodebookRole,
};
use crate::control::{
    control_reliability, db_to_linear, message_catalog, CatalogParams, ControlChannelState, ControlMessage,
    ControlMode, Scheme, DEFAULT_BITS_PER_TTI, DEFAULT_HEADER_BITS, DEFAULT_SYMBOLS_PER_TTI,
};
use crate::error::{Error, Result};
use crate::protocol::{build_frame, frame_ttis, overhead_ms, SchemeParams, TTI_MS};

/// One PRB at numerology 0: 12 × 15 kHz.
pub const DEFAULT_BANDWIDTH_HZ: f64 = 180_000.0;

/// Per-element reference SNR, calibrated with [`calibrate_rho`] so that the
/// default 32-entry BSW codebook meets the 10 dB target with probability in
/// [0.3, 0.7] (seed 0, 10⁵ trials; value from [`calibrate_rho`]).
pub const DEFAULT_RHO: f64 = 0.027_384_196_342_643_614;

/// Acceptable BSW success-probability window for the calibrated rho.
pub const CALIBRATION_WINDOW: (f64, f64) = (0.3, 0.7);

/// Everything a goodput run needs besides the scheme and control mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSetup {
    pub rho: f64,
    pub bandwidth_hz: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub header_bits: u32,
    pub bits_per_tti: u32,
    pub ini_carries_full_codebook: bool,
    pub bsw_construction: BswConstruction,
    /// Skip control errors entirely.
    pub assume_perfect_control: bool,
    /// Control links used when `assume_perfect_control` is off.
    pub control: ControlChannelState,
}

impl Default for SimulationSetup {
    fn default() -> Self {
        Self {
            rho: DEFAULT_RHO,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            n_trials: 10_000,
            seed: 0,
            header_bits: DEFAULT_HEADER_BITS,
            bits_per_tti: DEFAULT_BITS_PER_TTI,
            ini_carries_full_codebook: false,
            bsw_construction: BswConstruction::RandomGrid,
            assume_perfect_control: true,
            control: ControlChannelState {
                avg_snr_ue: db_to_linear(30.0),
                avg_snr_ris: db_to_linear(30.0),
                symbols_per_tti: DEFAULT_SYMBOLS_PER_TTI,
            },
        }
    }
}

impl SimulationSetup {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::invalid(
                "rho",
                format!("must be finite and > 0, got {}", self.rho),
            ));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::invalid("bandwidth_hz", "must be finite and > 0"));
        }
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials", "must be at least 1"));
        }
        if self.bits_per_tti == 0 {
            return Err(Error::invalid("bits_per_tti", "must be at least 1"));
        }
        self.control.validate()
    }

    pub fn catalog_params(&self, params: &SchemeParams) -> CatalogParams {
        CatalogParams {
            scheme: params.scheme,
            n_elements: params.n_elements,
            quant_bits: params.quant_bits,
            codebook_size: params.bsw_codebook_size,
            header_bits: self.header_bits,
            bits_per_tti: self.bits_per_tti,
            ini_carries_full_codebook: self.ini_carries_full_codebook,
        }
    }

    pub fn catalog(&self, params: &SchemeParams) -> Result<Vec<ControlMessage>> {
        message_catalog(&self.catalog_params(params))
    }

    /// Seed of the BSW codebook, decorrelated from the trial streams.
    pub fn codebook_seed(&self) -> u64 {
        splitmix64(self.seed ^ 0xC0DE_B00C)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent RNG of trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Frame-independent result of one channel realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub success: bool,
    /// Shannon rate of the payload, bit/s.
    pub rate_bps: f64,
    /// 1-based index of the first qualifying BSW entry.
    pub first_qualifying: Option<u32>,
    /// 1-based index of the highest-SNR qualifying BSW entry.
    pub chosen: Option<u32>,
    /// SNR of the configuration used for payload (linear).
    pub snr: f64,
}

/// Draws `setup.n_trials` realizations and resolves each under `params.scheme`.
pub fn simulate_trials(params: &SchemeParams, setup: &SimulationSetup) -> Result<Vec<TrialOutcome>> {
    params.validate()?;
    setup.validate()?;
    let n = params.n_elements as usize;
    let bandwidth = setup.bandwidth_hz;
    match params.scheme {
        Scheme::Oce => {
            let bits = params.quant_bits;
            (0..setup.n_trials as u64)
                .into_par_iter()
                .map(|i| {
                    let ch = sample_realization(n, setup.rho, &mut trial_rng(setup.seed, i))?;
                    let cfg = optimal_config(&ch, bits)?;
                    let snr = effective_snr_unchecked(&ch, &cfg);
                    Ok(TrialOutcome {
                        success: true,
                        rate_bps: bandwidth * (1.0 + snr).log2(),
                        first_qualifying: None,
                        chosen: None,
                        snr,
                    })
                })
                .collect()
        }
        Scheme::Bsw | Scheme::BswEs => {
            let codebook = make_codebook_with(
                CodebookRole::Bsw,
                n,
                params.bsw_codebook_size as usize,
                params.quant_bits,
                setup.codebook_seed(),
                setup.bsw_construction,
            )?;
            let target = params.target_snr;
            let rate = bandwidth * (1.0 + target).log2();
            (0..setup.n_trials as u64)
                .into_par_iter()
                .map(|i| {
                    let ch = sample_realization(n, setup.rho, &mut trial_rng(setup.seed, i))?;
                    let mut first = None;
                    let mut best: Option<(u32, f64)> = None;
                    for (k, cfg) in codebook.entries().iter().enumerate() {
                        let snr = effective_snr_unchecked(&ch, cfg);
                        if snr >= target {
                            let idx = k as u32 + 1;
                            first.get_or_insert(idx);
                            if best.is_none_or(|(_, s)| snr > s) {
                                best = Some((idx, snr));
                            }
                        }
                    }
                    Ok(TrialOutcome {
                        success: first.is_some(),
                        rate_bps: if first.is_some() { rate } else { 0.0 },
                        first_qualifying: first,
                        chosen: best.map(|(k, _)| k),
                        snr: best.map_or(0.0, |(_, s)| s),
                    })
                })
                .collect()
        }
    }
}

/// Mean goodput and overhead of one scheme at one frame length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodputResult {
    pub frame_ms: f64,
    pub scheme: Scheme,
    pub mode: ControlMode,
    pub goodput_mbps: f64,
    /// Standard error of `goodput_mbps`.
    pub std_err_mbps: f64,
    pub overhead_ms: f64,
    pub success_prob: f64,
    pub n_trials: usize,
    pub seed: u64,
}

/// Goodput at one frame length.
pub fn goodput(
    params: &SchemeParams,
    mode: ControlMode,
    frame_ms: f64,
    setup: &SimulationSetup,
) -> Result<GoodputResult> {
    Ok(goodput_sweep(params, mode, &[frame_ms], setup)?.remove(0))
}

/// Goodput over a grid of frame lengths, sharing trials across the grid.
pub fn goodput_sweep(
    params: &SchemeParams,
    mode: ControlMode,
    frame_grid: &[f64],
    setup: &SimulationSetup,
) -> Result<Vec<GoodputResult>> {
    for &f in frame_grid {
        frame_ttis(f)?;
    }
    let catalog = setup.catalog(params)?;
    let outcomes = simulate_trials(params, setup)?;
    let control_factor = if setup.assume_perfect_control {
        1.0
    } else {
        control_reliability(&catalog, &setup.control, mode)?
    };
    frame_grid
        .iter()
        .map(|&frame_ms| evaluate_frame(params, mode, frame_ms, setup, &catalog, &outcomes, control_factor))
        .collect()
}

fn evaluate_frame(
    params: &SchemeParams,
    mode: ControlMode,
    frame_ms: f64,
    setup: &SimulationSetup,
    catalog: &[ControlMessage],
    outcomes: &[TrialOutcome],
    control_factor: f64,
) -> Result<GoodputResult> {
    // payload_ms[k] for stop index k (0 = exhausted / no early stop)
    let stops = if params.scheme == Scheme::BswEs {
        params.bsw_codebook_size as usize
    } else {
        0
    };
    let payload_ms = (0..=stops)
        .map(|k| {
            let stop = (k > 0).then_some(k as u32);
            build_frame(params, mode, frame_ms, catalog, stop).map(|p| (p.payload_ms(), overhead_ms(&p)))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut overhead = 0.0;
    let mut success = 0.0;
    for o in outcomes {
        let slot = if params.scheme == Scheme::BswEs {
            o.first_qualifying.map_or(0, |k| k as usize)
        } else {
            0
        };
        let (pay_ms, ovh_ms) = payload_ms[slot];
        let p_ok = if o.success { control_factor } else { 0.0 };
        let g = o.rate_bps * p_ok * pay_ms / frame_ms / 1e6;
        sum += g;
        sum_sq += g * g;
        overhead += ovh_ms;
        success += p_ok;
    }
    let n = outcomes.len() as f64;
    let mean = sum / n;
    let var = if outcomes.len() > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(GoodputResult {
        frame_ms,
        scheme: params.scheme,
        mode,
        goodput_mbps: mean,
        std_err_mbps: (var / n).sqrt(),
        overhead_ms: overhead / n,
        success_prob: success / n,
        n_trials: outcomes.len(),
        seed: setup.seed,
    })
}

/// Frame grid `start, start+step, …` up to and including `stop`.
pub fn frame_grid(start_ms: f64, stop_ms: f64, step_ms: f64) -> Result<Vec<f64>> {
    if !(step_ms > 0.0 && start_ms > 0.0 && stop_ms >= start_ms) {
        return Err(Error::invalid(
            "frame_grid",
            "need 0 < start <= stop and step > 0",
        ));
    }
    let start = frame_ttis(start_ms)?;
    let stop = frame_ttis(stop_ms)?;
    let step = frame_ttis(step_ms)?;
    Ok((start..=stop)
        .step_by(step as usize)
        .map(|t| f64::from(t) * TTI_MS)
        .collect())
}

fn check_common_grid(a: &[GoodputResult], b: &[GoodputResult]) -> Result<()> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.frame_ms != y.frame_ms) {
        return Err(Error::invalid(
            "curves",
            "goodput curves are not on a common frame grid",
        ));
    }
    Ok(())
}

/// Smallest grid frame from which OCE goodput stays at or above BSW goodput
/// (ties favor OCE).
pub fn crossover_frame(oce: &[GoodputResult], bsw: &[GoodputResult]) -> Result<Option<f64>> {
    check_common_grid(oce, bsw)?;
    let mut crossover = None;
    for (o, b) in oce.iter().zip(bsw).rev() {
        if o.goodput_mbps >= b.goodput_mbps {
            crossover = Some(o.frame_ms);
        } else {
            break;
        }
    }
    Ok(crossover)
}

/// Shortest grid frame with non-zero goodput.
pub fn min_nonnull_frame(curve: &[GoodputResult]) -> Option<f64> {
    curve.iter().find(|r| r.goodput_mbps > 0.0).map(|r| r.frame_ms)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityCell {
    pub snr_ris_db: f64,
    pub snr_ue_db: f64,
    pub reliability: f64,
}

/// Control reliability over a UE × RIS SNR grid; row `i` holds `ue_db[i]`,
/// column `j` holds `ris_db[j]`.
pub fn reliability_grid(
    catalog: &[ControlMessage],
    mode: ControlMode,
    ris_db: &[f64],
    ue_db: &[f64],
    symbols_per_tti: u32,
) -> Result<Vec<Vec<ReliabilityCell>>> {
    for (name, axis) in [("snr_ris_db", ris_db), ("snr_ue_db", ue_db)] {
        if axis.is_empty()
            || axis
                .windows(2)
                .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::invalid(
                name,
                "grid must be non-empty and strictly increasing",
            ));
        }
    }
    ue_db
        .iter()
        .map(|&ue| {
            ris_db
                .iter()
                .map(|&ris| {
                    let state =
                        ControlChannelState::new(db_to_linear(ue), db_to_linear(ris), symbols_per_tti)?;
                    Ok(ReliabilityCell {
                        snr_ris_db: ris,
                        snr_ue_db: ue,
                        reliability: control_reliability(catalog, &state, mode)?,
                    })
                })
                .collect()
        })
        .collect()
}

/// Bisects rho (log scale) toward the middle of `window` and stops once the
/// BSW success probability of `params` lies in the central half of it.
///
/// The SNR of every codebook entry scales linearly with rho, so the best
/// entry gain of each trial is computed once at rho = 1.
pub fn calibrate_rho(params: &SchemeParams, setup: &SimulationSetup, window: (f64, f64)) -> Result<f64> {
    if !(0.0 < window.0 && window.0 < window.1 && window.1 < 1.0) {
        return Err(Error::invalid("window", "need 0 < low < high < 1"));
    }
    let mut unit = *setup;
    unit.rho = 1.0;
    let mut sweep = params.with_scheme(Scheme::Bsw);
    // every entry qualifies at a vanishing target; keep the peak gains
    sweep.target_snr = f64::MIN_POSITIVE;
    let peaks: Vec<f64> = simulate_trials(&sweep, &unit)?.iter().map(|o| o.snr).collect();
    let success = |rho: f64| {
        peaks.iter().filter(|&&g| rho * g >= params.target_snr).count() as f64 / peaks.len() as f64
    };

    let centre = 0.5 * (window.0 + window.1);
    let slack = 0.25 * (window.1 - window.0);
    let (mut lo, mut hi) = (-8.0f64, 8.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let rho = 10f64.powf(mid);
        let p = success(rho);
        if (p - centre).abs() <= slack {
            return Ok(rho);
        }
        if p < centre {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::invalid(
        "window",
        "no rho reaches the requested success window",
    ))
}
