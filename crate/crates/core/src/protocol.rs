//! TTI-granular frame timelines.
//!
//! A frame runs INI → ALG → SET → PAY. Phases are laid out back to back on
//! the in-band timeline; RISC messages carried out of band are listed next
//! to their in-band counterpart but do not consume frame TTIs. When the
//! control procedure does not fit, the timeline is cut at the frame end and
//! PAY gets zero TTIs (null rate).

use std::fmt;

use crate::control::{ControlMessage, ControlMode, Recipient, Scheme, SignalingPhase};
use crate::error::{Error, Result};

/// Duration of one TTI (numerology 0, half a subframe).
pub const TTI_MS: f64 = 0.5;

pub const DEFAULT_PROC_TTIS: u32 = 2;
pub const DEFAULT_SWITCH_TTIS: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseKind {
    Ini,
    Alg,
    Set,
    Pay,
}

impl PhaseKind {
    fn rank(self) -> u8 {
        self as u8
    }

    fn predecessor(self) -> Option<PhaseKind> {
        match self {
            PhaseKind::Ini => None,
            PhaseKind::Alg => Some(PhaseKind::Ini),
            PhaseKind::Set => Some(PhaseKind::Alg),
            PhaseKind::Pay => Some(PhaseKind::Set),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PhaseKind::Ini => "INI",
            PhaseKind::Alg => "ALG",
            PhaseKind::Set => "SET",
            PhaseKind::Pay => "PAY",
        }
    }
}

impl fmt::Display for PhaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelUsage {
    InBand,
    /// Overlaps in-band time; not part of the frame's TTI budget.
    OutOfBand,
    /// Elapses on the timeline without using a channel (RIS loading).
    None,
}

impl ChannelUsage {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelUsage::InBand => "in-band",
            ChannelUsage::OutOfBand => "out-of-band",
            ChannelUsage::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase {
    pub kind: PhaseKind,
    pub tti_span: u32,
    pub usage: ChannelUsage,
}

impl Phase {
    pub fn new(kind: PhaseKind, tti_span: u32, usage: ChannelUsage) -> Self {
        Self {
            kind,
            tti_span,
            usage,
        }
    }

    pub fn on_timeline(&self) -> bool {
        self.usage != ChannelUsage::OutOfBand
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FramePlan {
    pub tti_ms: f64,
    pub phases: Vec<Phase>,
    pub total_ttis: u32,
    /// Timeline TTIs the control procedure needs, before clipping.
    pub required_overhead_ttis: u32,
}

impl FramePlan {
    /// Timeline TTIs of all phases of `kind`.
    pub fn span(&self, kind: PhaseKind) -> u32 {
        self.phases
            .iter()
            .filter(|p| p.kind == kind && p.on_timeline())
            .map(|p| p.tti_span)
            .sum()
    }

    pub fn payload_ttis(&self) -> u32 {
        self.span(PhaseKind::Pay)
    }

    pub fn payload_ms(&self) -> f64 {
        f64::from(self.payload_ttis()) * self.tti_ms
    }

    pub fn frame_ms(&self) -> f64 {
        f64::from(self.total_ttis) * self.tti_ms
    }

    pub fn is_null_rate(&self) -> bool {
        self.payload_ttis() == 0
    }

    /// Σ timeline spans equals the frame length.
    pub fn is_conserved(&self) -> bool {
        self.phases
            .iter()
            .filter(|p| p.on_timeline())
            .map(|p| u64::from(p.tti_span))
            .sum::<u64>()
            == u64::from(self.total_ttis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub scheme: Scheme,
    pub n_elements: u32,
    pub bsw_codebook_size: u32,
    pub quant_bits: u32,
    /// Linear SNR a BSW configuration must reach.
    pub target_snr: f64,
    pub proc_ttis: u32,
    pub switch_ttis: u32,
    /// Early stopping reserves a SET slot after every evaluation.
    pub es_reservation: bool,
}

impl SchemeParams {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            n_elements: 100,
            bsw_codebook_size: 32,
            quant_bits: 2,
            target_snr: 10.0,
            proc_ttis: DEFAULT_PROC_TTIS,
            switch_ttis: DEFAULT_SWITCH_TTIS,
            es_reservation: true,
        }
    }

    pub fn with_scheme(&self, scheme: Scheme) -> Self {
        Self { scheme, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_elements", self.n_elements),
            ("bsw_codebook_size", self.bsw_codebook_size),
            ("quant_bits", self.quant_bits),
            ("switch_ttis", self.switch_ttis),
        ] {
            if v == 0 {
                return Err(Error::invalid(name, "must be at least 1"));
            }
        }
        if !(self.target_snr > 0.0 && self.target_snr.is_finite()) {
            return Err(Error::invalid(
                "target_snr",
                format!("must be finite and > 0, got {}", self.target_snr),
            ));
        }
        Ok(())
    }

    /// ALG span in TTIs; `stop_index` is the 1-based early-stopping point.
    pub fn alg_ttis(&self, stop_index: Option<u32>) -> u32 {
        match self.scheme {
            Scheme::Oce => self.n_elements + self.proc_ttis,
            Scheme::Bsw => self.bsw_codebook_size + self.proc_ttis,
            Scheme::BswEs => {
                let evaluations = stop_index.unwrap_or(self.bsw_codebook_size);
                let per_eval = if self.es_reservation { 2 } else { 1 };
                per_eval * evaluations
            }
        }
    }
}

/// Converts a frame length to whole TTIs.
pub fn frame_ttis(frame_ms: f64) -> Result<u32> {
    if !(frame_ms.is_finite() && frame_ms > 0.0) {
        return Err(Error::invalid(
            "frame_ms",
            format!("must be positive, got {frame_ms}"),
        ));
    }
    let ttis = frame_ms / TTI_MS;
    let rounded = ttis.round();
    if (ttis - rounded).abs() > 1e-9 || rounded > f64::from(u32::MAX) {
        return Err(Error::invalid(
            "frame_ms",
            format!("{frame_ms} ms is not a multiple of the {TTI_MS} ms TTI"),
        ));
    }
    Ok(rounded as u32)
}

fn signaling_phases(catalog: &[ControlMessage], phase: SignalingPhase, mode: ControlMode) -> (u32, u32) {
    let mut in_band = 0;
    let mut out_of_band = 0;
    for m in catalog.iter().filter(|m| m.phase == phase) {
        match (mode, m.recipient) {
            (ControlMode::OutOfBand, Recipient::Risc) => out_of_band += m.tti_cost,
            _ => in_band += m.tti_cost,
        }
    }
    (in_band, out_of_band)
}

/// Lays out one frame.
pub fn build_frame(
    params: &SchemeParams,
    mode: ControlMode,
    frame_ms: f64,
    catalog: &[ControlMessage],
    stop_index: Option<u32>,
) -> Result<FramePlan> {
    params.validate()?;
    let total = frame_ttis(frame_ms)?;
    if let Some(k) = stop_index {
        if params.scheme != Scheme::BswEs {
            return Err(Error::invalid(
                "stop_index",
                "only meaningful for early-stopping BSW",
            ));
        }
        if k == 0 || k > params.bsw_codebook_size {
            return Err(Error::invalid(
                "stop_index",
                format!("must lie in 1..={}, got {k}", params.bsw_codebook_size),
            ));
        }
    }

    let (ini_ib, ini_ob) = signaling_phases(catalog, SignalingPhase::Ini, mode);
    let (set_ib, set_ob) = signaling_phases(catalog, SignalingPhase::Set, mode);
    let alg = params.alg_ttis(stop_index);

    let mut nominal = vec![Phase::new(PhaseKind::Ini, ini_ib, ChannelUsage::InBand)];
    if ini_ob > 0 {
        nominal.push(Phase::new(PhaseKind::Ini, ini_ob, ChannelUsage::OutOfBand));
    }
    nominal.push(Phase::new(PhaseKind::Alg, alg, ChannelUsage::InBand));
    nominal.push(Phase::new(PhaseKind::Set, set_ib, ChannelUsage::InBand));
    if set_ob > 0 {
        nominal.push(Phase::new(PhaseKind::Set, set_ob, ChannelUsage::OutOfBand));
    }
    nominal.push(Phase::new(PhaseKind::Set, params.switch_ttis, ChannelUsage::None));

    let required: u32 = nominal
        .iter()
        .filter(|p| p.on_timeline())
        .map(|p| p.tti_span)
        .sum();

    // Clip to the frame end.
    let mut left = total;
    let mut phases = Vec::with_capacity(nominal.len() + 1);
    for mut p in nominal {
        if p.on_timeline() {
            p.tti_span = p.tti_span.min(left);
            left -= p.tti_span;
        }
        phases.push(p);
    }
    phases.push(Phase::new(PhaseKind::Pay, left, ChannelUsage::InBand));

    Ok(FramePlan {
        tti_ms: TTI_MS,
        phases,
        total_ttis: total,
        required_overhead_ttis: required,
    })
}

/// A phase scheduled ahead of one it depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CausalityViolation {
    /// The phase that ran too early.
    pub phase: PhaseKind,
    /// The phase it needed to follow.
    pub prerequisite: PhaseKind,
}

impl CausalityViolation {
    /// The offending pair in protocol order.
    pub fn pair(&self) -> (PhaseKind, PhaseKind) {
        if self.phase < self.prerequisite {
            (self.phase, self.prerequisite)
        } else {
            (self.prerequisite, self.phase)
        }
    }
}

impl fmt::Display for CausalityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} scheduled before {}", self.phase, self.prerequisite)
    }
}

impl std::error::Error for CausalityViolation {}

/// Checks that configuration and MCS are produced and signaled before the
/// payload that uses them.
pub fn validate_causality(plan: &FramePlan) -> Result<(), CausalityViolation> {
    let mut seen = [false; 4];
    let mut latest: Option<PhaseKind> = None;
    for p in &plan.phases {
        if let Some(prev) = latest {
            if p.kind.rank() < prev.rank() {
                // e.g. ALG emitting after its SET slot
                return Err(CausalityViolation {
                    phase: prev,
                    prerequisite: p.kind,
                });
            }
        }
        if let Some(pre) = p.kind.predecessor() {
            if !seen[pre.rank() as usize] {
                return Err(CausalityViolation {
                    phase: p.kind,
                    prerequisite: pre,
                });
            }
        }
        seen[p.kind.rank() as usize] = true;
        latest = Some(latest.map_or(p.kind, |l| l.max(p.kind)));
    }
    Ok(())
}

/// Frame time not spent on payload.
pub fn overhead_ms(plan: &FramePlan) -> f64 {
    f64::from(plan.total_ttis - plan.payload_ttis()) * plan.tti_ms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{message_catalog, CatalogParams};
    use proptest::prelude::*;

    fn catalog(p: &SchemeParams) -> Vec<ControlMessage> {
        message_catalog(&CatalogParams::new(
            p.scheme,
            p.n_elements,
            p.quant_bits,
            p.bsw_codebook_size,
        ))
        .unwrap()
    }

    fn plan(scheme: Scheme, mode: ControlMode, frame_ms: f64, stop: Option<u32>) -> FramePlan {
        let p = SchemeParams::new(scheme);
        build_frame(&p, mode, frame_ms, &catalog(&p), stop).unwrap()
    }

    #[test]
    fn oce_default_in_band_timeline() {
        let plan = plan(Scheme::Oce, ControlMode::InBand, 60.0, None);
        assert_eq!(plan.total_ttis, 120);
        assert_eq!(plan.span(PhaseKind::Ini), 2);
        assert_eq!(plan.span(PhaseKind::Alg), 102);
        assert_eq!(plan.span(PhaseKind::Set), 4);
        assert_eq!(plan.payload_ttis(), 12);
        assert_eq!(plan.payload_ms(), 6.0);
        assert!(plan.is_conserved());
        assert!(validate_causality(&plan).is_ok());
    }

    #[test]
    fn out_of_band_messages_overlap() {
        let plan = plan(Scheme::Oce, ControlMode::OutOfBand, 60.0, None);
        assert_eq!(plan.span(PhaseKind::Ini), 1);
        // SET→UE plus the RIS load time
        assert_eq!(plan.span(PhaseKind::Set), 2);
        assert_eq!(plan.payload_ttis(), 120 - 105);
        let oob: u32 = plan
            .phases
            .iter()
            .filter(|p| p.usage == ChannelUsage::OutOfBand)
            .map(|p| p.tti_span)
            .sum();
        assert_eq!(oob, 3);
        assert!(plan.is_conserved());
    }

    #[test]
    fn bsw_default_overhead() {
        let ib = plan(Scheme::Bsw, ControlMode::InBand, 100.0, None);
        // INI 2 + ALG 32+2 + SET 2+1
        assert_eq!(overhead_ms(&ib), 19.5);
        let ob = plan(Scheme::Bsw, ControlMode::OutOfBand, 100.0, None);
        assert_eq!(overhead_ms(&ob), 18.5);
    }

    #[test]
    fn null_rate_clamps_and_conserves() {
        for scheme in Scheme::ALL {
            let plan = plan(scheme, ControlMode::InBand, 2.0, None);
            assert!(plan.is_null_rate());
            assert!(plan.is_conserved());
            assert_eq!(overhead_ms(&plan), 2.0);
            assert!(validate_causality(&plan).is_ok());
        }
    }

    #[test]
    fn early_stop_at_first_entry() {
        let es = plan(Scheme::BswEs, ControlMode::InBand, 50.0, Some(1));
        assert_eq!(es.span(PhaseKind::Alg), 2);
        let bsw = plan(Scheme::Bsw, ControlMode::InBand, 50.0, None);
        assert!(es.span(PhaseKind::Alg) < bsw.span(PhaseKind::Alg));
        let exhausted = plan(Scheme::BswEs, ControlMode::InBand, 50.0, None);
        assert_eq!(exhausted.span(PhaseKind::Alg), 64);

        let mut p = SchemeParams::new(Scheme::BswEs);
        p.es_reservation = false;
        let optimistic = build_frame(&p, ControlMode::InBand, 50.0, &catalog(&p), Some(5)).unwrap();
        assert_eq!(optimistic.span(PhaseKind::Alg), 5);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = SchemeParams::new(Scheme::Bsw);
        let cat = catalog(&p);
        assert!(build_frame(&p, ControlMode::InBand, 0.3, &cat, None).is_err());
        assert!(build_frame(&p, ControlMode::InBand, 0.0, &cat, None).is_err());
        assert!(build_frame(&p, ControlMode::InBand, 10.0, &cat, Some(1)).is_err());
        let es = SchemeParams::new(Scheme::BswEs);
        assert!(build_frame(&es, ControlMode::InBand, 10.0, &cat, Some(0)).is_err());
        assert!(build_frame(&es, ControlMode::InBand, 10.0, &cat, Some(33)).is_err());
    }

    #[test]
    fn hand_built_violations() {
        let mk = |kinds: &[PhaseKind]| FramePlan {
            tti_ms: TTI_MS,
            phases: kinds
                .iter()
                .map(|&k| Phase::new(k, 1, ChannelUsage::InBand))
                .collect(),
            total_ttis: kinds.len() as u32,
            required_overhead_ttis: 0,
        };
        use PhaseKind::*;
        let v = validate_causality(&mk(&[Ini, Alg, Pay, Set])).unwrap_err();
        assert_eq!((v.phase, v.prerequisite), (Pay, Set));
        let v = validate_causality(&mk(&[Ini, Set, Alg, Pay])).unwrap_err();
        assert_eq!((v.phase, v.prerequisite), (Set, Alg));
        assert_eq!(v.pair(), (Alg, Set));
        let v = validate_causality(&mk(&[Ini, Alg, Set, Pay, Alg])).unwrap_err();
        assert_eq!(v.pair(), (Alg, Pay));
        assert!(validate_causality(&mk(&[Ini, Alg, Set, Pay])).is_ok());
    }

    proptest! {
        #[test]
        fn generated_plans_are_valid(
            scheme in prop::sample::select(Scheme::ALL.to_vec()),
            ob in any::<bool>(),
            n in 1u32..300,
            c in 1u32..128,
            bits in 1u32..4,
            proc_ttis in 0u32..6,
            switch_ttis in 1u32..6,
            frame_ttis in 1u32..800,
            stop_frac in 0.0f64..1.0,
        ) {
            let mut p = SchemeParams::new(scheme);
            p.n_elements = n;
            p.bsw_codebook_size = c;
            p.quant_bits = bits;
            p.proc_ttis = proc_ttis;
            p.switch_ttis = switch_ttis;
            let mode = if ob { ControlMode::OutOfBand } else { ControlMode::InBand };
            let stop = (scheme == Scheme::BswEs).then(|| 1 + (stop_frac * f64::from(c)) as u32).map(|k| k.min(c));
            let frame = f64::from(frame_ttis) * TTI_MS;
            let plan = build_frame(&p, mode, frame, &catalog(&p), stop).unwrap();
            prop_assert!(plan.is_conserved());
            prop_assert!(validate_causality(&plan).is_ok());

            let longer = build_frame(&p, mode, frame + TTI_MS, &catalog(&p), stop).unwrap();
            prop_assert!(longer.payload_ttis() >= plan.payload_ttis());

            let ib = build_frame(&p, ControlMode::InBand, frame, &catalog(&p), stop).unwrap();
            let obp = build_frame(&p, ControlMode::OutOfBand, frame, &catalog(&p), stop).unwrap();
            prop_assert!(obp.payload_ttis() >= ib.payload_ttis());

            if let Some(k) = stop {
                let es_alg = p.alg_ttis(Some(k));
                let bsw_alg = p.with_scheme(Scheme::Bsw).alg_ttis(None);
                prop_assert!(es_alg <= bsw_alg + c);
                prop_assert_eq!(p.alg_ttis(None), 2 * c);
            }
        }
    }
}
