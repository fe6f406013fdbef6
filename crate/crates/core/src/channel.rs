//! Cascaded UE–RIS–BS channel model.
//!
//! A [`ChannelRealization`] holds the per-element gains of the UE→RIS link
//! (`f`) and the RIS→BS link (`g`) for one coherence block. The received SNR
//! under a phase configuration `θ` is
//!
//! ```text
//!     snr(θ) = rho · |Σ_n f_n · e^{jθ_n} · g_n|²
//! ```
//!
//! Configurations are always stored on the `b_q`-bit phase grid, i.e. as
//! integer levels `l_n ∈ [0, 2^b_q)` with `θ_n = 2π · l_n / 2^b_q`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest supported per-element resolution.
pub const MAX_QUANT_BITS: u32 = 16;

fn check_quant_bits(quant_bits: u32) -> Result<()> {
    if quant_bits == 0 || quant_bits > MAX_QUANT_BITS {
        return Err(Error::invalid(
            "quant_bits",
            format!("must be in 1..={MAX_QUANT_BITS}, got {quant_bits}"),
        ));
    }
    Ok(())
}

/// A quantized RIS phase configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RisConfiguration {
    levels: Vec<u32>,
    quant_bits: u32,
    phasors: Vec<Complex64>,
}

impl RisConfiguration {
    /// Builds a configuration from integer phase levels.
    pub fn from_levels(levels: Vec<u32>, quant_bits: u32) -> Result<Self> {
        check_quant_bits(quant_bits)?;
        if levels.is_empty() {
            return Err(Error::invalid(
                "levels",
                "configuration must have at least one element",
            ));
        }
        let n_levels = 1u32 << quant_bits;
        if let Some(&bad) = levels.iter().find(|&&l| l >= n_levels) {
            return Err(Error::invalid(
                "levels",
                format!("level {bad} outside the {quant_bits}-bit grid"),
            ));
        }
        let step = TAU / f64::from(n_levels);
        let phasors = levels
            .iter()
            .map(|&l| Complex64::from_polar(1.0, step * f64::from(l)))
            .collect();
        Ok(Self {
            levels,
            quant_bits,
            phasors,
        })
    }

    /// Rounds arbitrary phases (radians) to the nearest grid level.
    pub fn quantize(phases: &[f64], quant_bits: u32) -> Result<Self> {
        check_quant_bits(quant_bits)?;
        let levels = phases.iter().map(|&p| quantize_phase(p, quant_bits)).collect();
        Self::from_levels(levels, quant_bits)
    }

    /// All-zero configuration.
    pub fn zeros(n_elements: usize, quant_bits: u32) -> Result<Self> {
        Self::from_levels(vec![0; n_elements], quant_bits)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn quant_bits(&self) -> u32 {
        self.quant_bits
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Grid spacing `2π / 2^b_q`.
    pub fn phase_step(&self) -> f64 {
        TAU / f64::from(1u32 << self.quant_bits)
    }

    /// Phases in radians, each in `[0, 2π)`.
    pub fn phases(&self) -> Vec<f64> {
        let step = self.phase_step();
        self.levels.iter().map(|&l| step * f64::from(l)).collect()
    }

    /// Unit-modulus reflection coefficients `e^{jθ_n}`.
    pub fn phasors(&self) -> &[Complex64] {
        &self.phasors
    }
}

/// Nearest `quant_bits`-bit level for a phase in radians (any range).
pub fn quantize_phase(phase: f64, quant_bits: u32) -> u32 {
    let n_levels = 1u32 << quant_bits;
    let wrapped = phase.rem_euclid(TAU);
    let level = (wrapped / TAU * f64::from(n_levels)).round() as u64;
    (level % u64::from(n_levels)) as u32
}

/// Purpose of a codebook within the control procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodebookRole {
    /// Channel-estimation sweep, one entry per element.
    Ce,
    /// Beam-sweeping codebook.
    Bsw,
    /// The single wide-coverage configuration loaded while idle.
    Ctrl,
}

/// How BSW codebook entries are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BswConstruction {
    /// Independent uniform levels on the phase grid.
    #[default]
    RandomGrid,
    /// Evenly spaced columns of an (oversampled) DFT matrix.
    DftSubset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub role: CodebookRole,
    pub id: u64,
    entries: Vec<RisConfiguration>,
}

impl Codebook {
    pub fn entries(&self) -> &[RisConfiguration] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&RisConfiguration> {
        self.entries.get(index)
    }
}

/// Builds a codebook; BSW entries use [`BswConstruction::RandomGrid`].
pub fn make_codebook(
    role: CodebookRole,
    n_elements: usize,
    size: usize,
    quant_bits: u32,
    seed: u64,
) -> Result<Codebook> {
    make_codebook_with(
        role,
        n_elements,
        size,
        quant_bits,
        seed,
        BswConstruction::RandomGrid,
    )
}

pub fn make_codebook_with(
    role: CodebookRole,
    n_elements: usize,
    size: usize,
    quant_bits: u32,
    seed: u64,
    construction: BswConstruction,
) -> Result<Codebook> {
    check_quant_bits(quant_bits)?;
    if n_elements == 0 {
        return Err(Error::invalid("n_elements", "must be at least 1"));
    }
    if size == 0 {
        return Err(Error::invalid("size", "codebook must have at least one entry"));
    }
    let entries = match role {
        CodebookRole::Ce => {
            if size != n_elements {
                return Err(Error::invalid(
                    "size",
                    format!("CE codebook needs one entry per element ({n_elements}), got {size}"),
                ));
            }
            (0..size)
                .map(|k| dft_column(n_elements, n_elements, k, quant_bits))
                .collect::<Result<Vec<_>>>()?
        }
        CodebookRole::Ctrl => {
            if size != 1 {
                return Err(Error::invalid(
                    "size",
                    format!("CTRL codebook holds exactly one entry, got {size}"),
                ));
            }
            vec![RisConfiguration::zeros(n_elements, quant_bits)?]
        }
        CodebookRole::Bsw => match construction {
            BswConstruction::RandomGrid => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let n_levels = 1u32 << quant_bits;
                (0..size)
                    .map(|_| {
                        let levels = (0..n_elements).map(|_| rng.random_range(0..n_levels)).collect();
                        RisConfiguration::from_levels(levels, quant_bits)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            BswConstruction::DftSubset => {
                let points = n_elements.max(size);
                (0..size)
                    .map(|i| dft_column(n_elements, points, i * points / size, quant_bits))
                    .collect::<Result<Vec<_>>>()?
            }
        },
    };
    Ok(Codebook {
        role,
        id: seed,
        entries,
    })
}

/// Column `k` of a `points`-point DFT restricted to the first `n_elements`
/// rows: `θ_n = 2π·k·n / points`, quantized.
fn dft_column(n_elements: usize, points: usize, k: usize, quant_bits: u32) -> Result<RisConfiguration> {
    let n_levels = 1u64 << quant_bits;
    let levels = (0..n_elements)
        .map(|n| {
            // Exact rational arithmetic: level = round(((k·n) mod P) · 2^b / P).
            let r = ((k as u64) * (n as u64)) % points as u64;
            let scaled = r * n_levels;
            let p = points as u64;
            let level = (scaled + p / 2) / p;
            (level % n_levels) as u32
        })
        .collect();
    RisConfiguration::from_levels(levels, quant_bits)
}

/// Per-element gains of the cascaded channel for one coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    f: Vec<Complex64>,
    g: Vec<Complex64>,
    rho: f64,
    cascade: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn new(f: Vec<Complex64>, g: Vec<Complex64>, rho: f64) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::invalid("n_elements", "must be at least 1"));
        }
        if f.len() != g.len() {
            return Err(Error::DimensionMismatch {
                expected: f.len(),
                actual: g.len(),
            });
        }
        check_rho(rho)?;
        let cascade = f.iter().zip(&g).map(|(a, b)| a * b).collect();
        Ok(Self { f, g, rho, cascade })
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn f(&self) -> &[Complex64] {
        &self.f
    }

    pub fn g(&self) -> &[Complex64] {
        &self.g
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `f_n · g_n` for each element.
    pub fn cascade(&self) -> &[Complex64] {
        &self.cascade
    }

    /// Coherent-combining bound `rho · (Σ|f_n||g_n|)²`.
    pub fn coherent_bound(&self) -> f64 {
        let amp: f64 = self.cascade.iter().map(|c| c.norm()).sum();
        self.rho * amp * amp
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::invalid(
            "rho",
            format!("must be finite and > 0, got {rho}"),
        ));
    }
    Ok(())
}

/// Draws i.i.d. unit-variance Rayleigh gains for both hops: all of `f` first,
/// then all of `g`.
pub fn sample_realization<R: Rng + ?Sized>(
    n_elements: usize,
    rho: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if n_elements == 0 {
        return Err(Error::invalid("n_elements", "must be at least 1"));
    }
    check_rho(rho)?;
    let f = (0..n_elements).map(|_| complex_gaussian(rng)).collect();
    let g = (0..n_elements).map(|_| complex_gaussian(rng)).collect();
    ChannelRealization::new(f, g, rho)
}

/// One CN(0, 1) draw.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Received SNR (linear) with the RIS loaded with `cfg`.
pub fn effective_snr(ch: &ChannelRealization, cfg: &RisConfiguration) -> Result<f64> {
    if cfg.len() != ch.len() {
        return Err(Error::DimensionMismatch {
            expected: ch.len(),
            actual: cfg.len(),
        });
    }
    Ok(effective_snr_unchecked(ch, cfg))
}

#[inline]
pub(crate) fn effective_snr_unchecked(ch: &ChannelRealization, cfg: &RisConfiguration) -> f64 {
    let sum: Complex64 = ch.cascade.iter().zip(cfg.phasors()).map(|(h, p)| h * p).sum();
    ch.rho * sum.norm_sqr()
}

/// Phase-compensating configuration rounded to the `quant_bits` grid.
pub fn optimal_config(ch: &ChannelRealization, quant_bits: u32) -> Result<RisConfiguration> {
    check_quant_bits(quant_bits)?;
    let levels = ch
        .cascade
        .iter()
        .map(|h| quantize_phase(-h.arg(), quant_bits))
        .collect();
    RisConfiguration::from_levels(levels, quant_bits)
}

/// Guaranteed SNR fraction of the coherent bound after rounding each phase
/// to the nearest level: every residual is at most half a grid step, so
/// `|Σ|h_n|e^{jδ_n}| ≥ cos(π/2^b_q) · Σ|h_n|`, giving `cos²(π / 2^b_q)`.
pub fn quantization_loss_bound(quant_bits: u32) -> f64 {
    let c = (std::f64::consts::PI / f64::from(1u32 << quant_bits)).cos();
    c * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_elements_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_realization(0, 1.0, &mut rng),
            Err(Error::InvalidParameter {
                name: "n_elements",
                ..
            })
        ));
        assert!(sample_realization(4, 0.0, &mut rng).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_realization(4, 1.0, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = sample_realization(4, 1.0, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unit_variance_gains() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| sample_realization(1, 1.0, &mut rng).unwrap().f()[0].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "E|f|^2 = {mean}");
    }

    #[test]
    fn snr_single_element_and_coherent_pair() {
        let ch = ChannelRealization::new(vec![c(1.0, 0.0)], vec![c(1.0, 0.0)], 1.0).unwrap();
        let cfg = RisConfiguration::zeros(1, 2).unwrap();
        assert_eq!(effective_snr(&ch, &cfg).unwrap(), 1.0);

        let ch = ChannelRealization::new(vec![c(1.0, 0.0); 2], vec![c(1.0, 0.0); 2], 1.0).unwrap();
        let cfg = RisConfiguration::zeros(2, 2).unwrap();
        assert_eq!(effective_snr(&ch, &cfg).unwrap(), 4.0);
    }

    #[test]
    fn snr_dimension_mismatch() {
        let ch = ChannelRealization::new(vec![c(1.0, 0.0); 2], vec![c(1.0, 0.0); 2], 1.0).unwrap();
        let cfg = RisConfiguration::zeros(3, 2).unwrap();
        assert_eq!(
            effective_snr(&ch, &cfg),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 3
            })
        );
    }

    #[test]
    fn real_positive_channel_gives_zero_phases() {
        let ch = ChannelRealization::new(
            vec![c(0.3, 0.0), c(1.2, 0.0), c(2.0, 0.0)],
            vec![c(0.7, 0.0), c(0.1, 0.0), c(5.0, 0.0)],
            2.0,
        )
        .unwrap();
        for bits in 1..=4 {
            assert!(optimal_config(&ch, bits)
                .unwrap()
                .levels()
                .iter()
                .all(|&l| l == 0));
        }
    }

    #[test]
    fn single_element_is_exact_under_any_resolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for bits in 1..=4 {
            let ch = sample_realization(1, 0.7, &mut rng).unwrap();
            let snr = effective_snr(&ch, &optimal_config(&ch, bits).unwrap()).unwrap();
            let exact = 0.7 * ch.f()[0].norm_sqr() * ch.g()[0].norm_sqr();
            assert!((snr - exact).abs() <= 1e-12 * exact);
        }
    }

    #[test]
    fn multi_element_quantization_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for bits in 1..=4 {
            for _ in 0..200 {
                let ch = sample_realization(6, 1.5, &mut rng).unwrap();
                let snr = effective_snr(&ch, &optimal_config(&ch, bits).unwrap()).unwrap();
                let full = ch.coherent_bound();
                assert!(snr <= full * (1.0 + 1e-12));
                assert!(snr >= full * quantization_loss_bound(bits) * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn quantize_wraps() {
        assert_eq!(quantize_phase(-FRAC_PI_2, 2), 3);
        assert_eq!(quantize_phase(TAU - 1e-9, 2), 0);
        assert_eq!(quantize_phase(FRAC_PI_2 + 0.1, 2), 1);
    }

    #[test]
    fn ce_codebook_is_exact_dft_for_four_elements() {
        let cb = make_codebook(CodebookRole::Ce, 4, 4, 2, 0).unwrap();
        assert_eq!(cb.len(), 4);
        for (k, entry) in cb.entries().iter().enumerate() {
            let expected: Vec<u32> = (0..4).map(|n| ((k * n) % 4) as u32).collect();
            assert_eq!(entry.levels(), expected.as_slice());
            for (n, phase) in entry.phases().iter().enumerate() {
                let exact = (TAU * (k * n) as f64 / 4.0).rem_euclid(TAU);
                assert!((phase - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ctrl_codebook_is_all_zero() {
        let cb = make_codebook(CodebookRole::Ctrl, 16, 1, 2, 0).unwrap();
        assert_eq!(cb.len(), 1);
        assert!(cb.entries()[0].levels().iter().all(|&l| l == 0));
    }

    #[test]
    fn role_size_contradictions() {
        assert!(make_codebook(CodebookRole::Ce, 4, 5, 2, 0).is_err());
        assert!(make_codebook(CodebookRole::Ctrl, 4, 2, 2, 0).is_err());
        assert!(make_codebook(CodebookRole::Bsw, 4, 0, 2, 0).is_err());
        assert!(make_codebook(CodebookRole::Bsw, 4, 4, 0, 0).is_err());
    }

    #[test]
    fn bsw_codebook_deterministic() {
        let a = make_codebook(CodebookRole::Bsw, 16, 32, 2, 7).unwrap();
        let b = make_codebook(CodebookRole::Bsw, 16, 32, 2, 7).unwrap();
        assert_eq!(a, b);
        let other = make_codebook(CodebookRole::Bsw, 16, 32, 2, 8).unwrap();
        assert_ne!(a, other);
        assert!(a.entries().iter().all(|e| e.len() == 16 && e.quant_bits() == 2));
    }

    #[test]
    fn dft_subset_codebook() {
        let cb = make_codebook_with(CodebookRole::Bsw, 8, 4, 3, 0, BswConstruction::DftSubset).unwrap();
        assert_eq!(cb.len(), 4);
        // column k = 2i of the 8-point DFT at 3-bit resolution is exact
        for (i, e) in cb.entries().iter().enumerate() {
            let expected: Vec<u32> = (0..8).map(|n| ((2 * i * n) % 8) as u32).collect();
            assert_eq!(e.levels(), expected.as_slice());
        }
    }
}
