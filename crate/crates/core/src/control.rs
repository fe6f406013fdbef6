//! Control-message catalog and control-channel reliability.
//!
//! Every frame exchanges four explicit control messages: an initialization
//! (INI) and a setup (SET) message to each of the UE and the RIS controller.
//! Each message is decoded in a single quasi-static Rayleigh block and fails
//! when the instantaneous capacity of its allocation drops below its rate.

use std::fmt;

use crate::error::{Error, Result};

/// Fixed field sizes of the message bodies (bits).
pub const INI_UE_DESCRIPTOR_BITS: u32 = 32;
pub const INI_RISC_DESCRIPTOR_BITS: u32 = 16;
pub const SET_UE_DESCRIPTOR_BITS: u32 = 16;

pub const DEFAULT_HEADER_BITS: u32 = 16;
/// 12 subcarriers × 7 OFDM symbols in one 0.5 ms TTI.
pub const DEFAULT_SYMBOLS_PER_TTI: u32 = 84;
/// Nominal control capacity used to size messages in TTIs (2 bits per RE).
pub const DEFAULT_BITS_PER_TTI: u32 = 2 * DEFAULT_SYMBOLS_PER_TTI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Channel estimation followed by an optimized configuration.
    Oce,
    /// Beam sweeping over a fixed codebook.
    Bsw,
    /// Beam sweeping that stops at the first qualifying configuration.
    BswEs,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Oce, Scheme::Bsw, Scheme::BswEs];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Oce => "oce",
            Scheme::Bsw => "bsw",
            Scheme::BswEs => "bsw-es",
        }
    }

    pub fn is_sweep(self) -> bool {
        matches!(self, Scheme::Bsw | Scheme::BswEs)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Recipient {
    Ue,
    Risc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignalingPhase {
    Ini,
    Set,
}

/// Whether RIS-controller traffic shares the data band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControlMode {
    /// In-band: RISC messages use frame TTIs and see a fading channel.
    InBand,
    /// Out-of-band: RISC messages travel on an error-free orthogonal channel.
    OutOfBand,
}

impl ControlMode {
    pub const ALL: [ControlMode; 2] = [ControlMode::InBand, ControlMode::OutOfBand];

    pub fn as_str(self) -> &'static str {
        match self {
            ControlMode::InBand => "ib",
            ControlMode::OutOfBand => "ob",
        }
    }
}

impl fmt::Display for ControlMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ControlMessage {
    pub recipient: Recipient,
    pub phase: SignalingPhase,
    pub payload_bits: u32,
    /// TTIs the message occupies on its channel (at least one).
    pub tti_cost: u32,
}

impl ControlMessage {
    pub fn new(
        recipient: Recipient,
        phase: SignalingPhase,
        payload_bits: u32,
        tti_cost: u32,
    ) -> Result<Self> {
        if tti_cost == 0 {
            return Err(Error::invalid("tti_cost", "a message occupies at least one TTI"));
        }
        Ok(Self {
            recipient,
            phase,
            payload_bits,
            tti_cost,
        })
    }

    /// TTIs this message takes from the in-band frame under `mode`.
    pub fn in_band_ttis(&self, mode: ControlMode) -> u32 {
        match (mode, self.recipient) {
            (ControlMode::OutOfBand, Recipient::Risc) => 0,
            _ => self.tti_cost,
        }
    }
}

/// Inputs to [`message_catalog`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogParams {
    pub scheme: Scheme,
    pub n_elements: u32,
    pub quant_bits: u32,
    pub codebook_size: u32,
    pub header_bits: u32,
    pub bits_per_tti: u32,
    /// INI→RISC carries every BSW codebook entry instead of a codebook id.
    pub ini_carries_full_codebook: bool,
}

impl CatalogParams {
    pub fn new(scheme: Scheme, n_elements: u32, quant_bits: u32, codebook_size: u32) -> Self {
        Self {
            scheme,
            n_elements,
            quant_bits,
            codebook_size,
            header_bits: DEFAULT_HEADER_BITS,
            bits_per_tti: DEFAULT_BITS_PER_TTI,
            ini_carries_full_codebook: false,
        }
    }
}

/// `ceil(log2(n))`, with `index_bits(1) == 0`.
pub fn index_bits(n: u32) -> u32 {
    if n <= 1 {
        0
    } else {
        u32::BITS - (n - 1).leading_zeros()
    }
}

/// Builds the four messages `[INI→UE, INI→RISC, SET→UE, SET→RISC]`.
pub fn message_catalog(p: &CatalogParams) -> Result<Vec<ControlMessage>> {
    for (name, v) in [
        ("n_elements", p.n_elements),
        ("quant_bits", p.quant_bits),
        ("codebook_size", p.codebook_size),
        ("bits_per_tti", p.bits_per_tti),
    ] {
        if v == 0 {
            return Err(Error::invalid(name, "must be at least 1"));
        }
    }
    let config_bits = p
        .n_elements
        .checked_mul(p.quant_bits)
        .ok_or_else(|| Error::invalid("n_elements", "configuration size overflows"))?;
    let set_risc_body = match p.scheme {
        Scheme::Oce => config_bits,
        Scheme::Bsw | Scheme::BswEs => index_bits(p.codebook_size),
    };
    let ini_risc_body = if p.scheme.is_sweep() && p.ini_carries_full_codebook {
        config_bits
            .checked_mul(p.codebook_size)
            .and_then(|b| b.checked_add(INI_RISC_DESCRIPTOR_BITS))
            .ok_or_else(|| Error::invalid("codebook_size", "codebook payload overflows"))?
    } else {
        INI_RISC_DESCRIPTOR_BITS
    };
    let sized = |recipient, phase, body: u32| {
        let bits = p.header_bits + body;
        let ttis = bits.div_ceil(p.bits_per_tti).max(1);
        ControlMessage::new(recipient, phase, bits, ttis)
    };
    Ok(vec![
        sized(Recipient::Ue, SignalingPhase::Ini, INI_UE_DESCRIPTOR_BITS)?,
        sized(Recipient::Risc, SignalingPhase::Ini, ini_risc_body)?,
        sized(Recipient::Ue, SignalingPhase::Set, SET_UE_DESCRIPTOR_BITS)?,
        sized(Recipient::Risc, SignalingPhase::Set, set_risc_body)?,
    ])
}

/// Average SNRs (linear) of the two control links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlChannelState {
    pub avg_snr_ue: f64,
    pub avg_snr_ris: f64,
    pub symbols_per_tti: u32,
}

impl ControlChannelState {
    pub fn new(avg_snr_ue: f64, avg_snr_ris: f64, symbols_per_tti: u32) -> Result<Self> {
        let state = Self {
            avg_snr_ue,
            avg_snr_ris,
            symbols_per_tti,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("avg_snr_ue", self.avg_snr_ue), ("avg_snr_ris", self.avg_snr_ris)] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if self.symbols_per_tti == 0 {
            return Err(Error::invalid("symbols_per_tti", "must be at least 1"));
        }
        Ok(())
    }
}

/// Probability that a Rayleigh block with mean SNR `avg_snr` supports
/// `payload_bits` over `symbols` channel uses:
/// `exp(−(2^{bits/symbols} − 1) / avg_snr)`.
pub fn msg_success_prob(payload_bits: u32, symbols: u32, avg_snr: f64) -> f64 {
    debug_assert!(symbols >= 1);
    if payload_bits == 0 {
        return 1.0;
    }
    let rate = f64::from(payload_bits) / f64::from(symbols.max(1));
    let threshold = (rate * std::f64::consts::LN_2).exp_m1();
    (-threshold / avg_snr).exp()
}

/// Success probability of one message under `mode`.
pub fn message_reliability(msg: &ControlMessage, state: &ControlChannelState, mode: ControlMode) -> f64 {
    let symbols = msg.tti_cost * state.symbols_per_tti;
    match (msg.recipient, mode) {
        (Recipient::Risc, ControlMode::OutOfBand) => 1.0,
        (Recipient::Risc, ControlMode::InBand) => {
            msg_success_prob(msg.payload_bits, symbols, state.avg_snr_ris)
        }
        (Recipient::Ue, _) => msg_success_prob(msg.payload_bits, symbols, state.avg_snr_ue),
    }
}

/// Probability that all four messages are decoded.
pub fn control_reliability(
    catalog: &[ControlMessage],
    state: &ControlChannelState,
    mode: ControlMode,
) -> Result<f64> {
    if catalog.len() != 4 {
        return Err(Error::invalid(
            "catalog",
            format!("expected 4 control messages, got {}", catalog.len()),
        ));
    }
    state.validate()?;
    Ok(catalog
        .iter()
        .map(|m| message_reliability(m, state, mode))
        .product())
}

/// Control link whose SNR is searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SnrAxis {
    Ue,
    Ris,
}

impl SnrAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SnrAxis::Ue => "ue",
            SnrAxis::Ris => "ris",
        }
    }
}

/// Search window and resolution for [`min_snr_for_reliability`], in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrSearch {
    pub min_db: f64,
    pub max_db: f64,
    pub tol_db: f64,
}

impl Default for SnrSearch {
    fn default() -> Self {
        Self {
            min_db: -20.0,
            max_db: 60.0,
            tol_db: 0.01,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Smallest SNR (dB) on `axis` reaching `target` reliability with the other
/// link fixed at `fixed_other_snr` (linear).
///
/// Returns `search.min_db` when the lower edge already qualifies and
/// `f64::INFINITY` when even `search.max_db` does not.
pub fn min_snr_for_reliability(
    catalog: &[ControlMessage],
    target: f64,
    fixed_other_snr: f64,
    symbols_per_tti: u32,
    axis: SnrAxis,
    mode: ControlMode,
    search: SnrSearch,
) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(
            "target",
            format!("must lie in (0, 1), got {target}"),
        ));
    }
    if !(search.min_db < search.max_db && search.tol_db > 0.0) {
        return Err(Error::invalid("search", "need min_db < max_db and tol_db > 0"));
    }
    let reliability_at = |db: f64| -> Result<f64> {
        let searched = db_to_linear(db);
        let state = match axis {
            SnrAxis::Ue => ControlChannelState::new(searched, fixed_other_snr, symbols_per_tti)?,
            SnrAxis::Ris => ControlChannelState::new(fixed_other_snr, searched, symbols_per_tti)?,
        };
        control_reliability(catalog, &state, mode)
    };
    if reliability_at(search.min_db)? >= target {
        return Ok(search.min_db);
    }
    if reliability_at(search.max_db)? < target {
        return Ok(f64::INFINITY);
    }
    let (mut lo, mut hi) = (search.min_db, search.max_db);
    while hi - lo > search.tol_db {
        let mid = 0.5 * (lo + hi);
        if reliability_at(mid)? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
