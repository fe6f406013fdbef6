//! `key = value` run configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use risctl_core::control::{db_to_linear, SnrSearch};
use risctl_core::metrics::frame_grid;
use risctl_core::protocol::frame_ttis;
use risctl_core::{BswConstruction, ControlChannelState, Scheme, SchemeParams, SimulationSetup};

use crate::CliError;

/// The committed default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../config/default.conf");

/// Inclusive `start:stop:step` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    /// Accepts `START:STOP:STEP` or a single value.
    pub fn parse(field: &'static str, s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::config(field, format!("`{p}` is not a number")))
        };
        let grid = match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                GridSpec {
                    start: v,
                    stop: v,
                    step: 1.0,
                }
            }
            [a, b, c] => GridSpec {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            },
            _ => {
                return Err(CliError::config(
                    field,
                    format!("expected START:STOP:STEP, got `{s}`"),
                ))
            }
        };
        if !(grid.step > 0.0 && grid.stop >= grid.start) {
            return Err(CliError::config(field, "need STOP >= START and STEP > 0"));
        }
        Ok(grid)
    }

    fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + self.step * i as f64).collect()
    }

    fn render(&self) -> String {
        format!("{}:{}:{}", self.start, self.stop, self.step)
    }
}

/// Fully resolved parameters of one CLI run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rho: f64,
    pub n_elements: u32,
    pub quant_bits: u32,
    pub bsw_codebook_size: u32,
    pub bsw_codebook: BswConstruction,
    pub target_snr_db: f64,
    pub proc_ttis: u32,
    pub switch_ttis: u32,
    pub es_reservation: bool,
    pub header_bits: u32,
    pub bits_per_tti: u32,
    pub ini_carries_full_codebook: bool,
    pub symbols_per_tti: u32,
    pub perfect_control: bool,
    pub snr_ue_db: f64,
    pub snr_ris_db: f64,
    pub bandwidth_hz: f64,
    pub master_seed: u64,
    pub n_trials: usize,
    pub frame_grid: GridSpec,
    pub snr_grid_db: GridSpec,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::parse(DEFAULT_CONFIG).expect("committed default config parses")
    }
}

fn parse_bool(field: &'static str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(CliError::config(field, format!("expected true/false, got `{v}`"))),
    }
}

fn parse_num<T: std::str::FromStr>(field: &'static str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| CliError::config(field, format!("cannot parse `{v}`")))
}

fn parse_f64(field: &'static str, v: &str) -> Result<f64, CliError> {
    let x: f64 = parse_num(field, v)?;
    if !x.is_finite() {
        return Err(CliError::config(field, format!("`{v}` is not finite")));
    }
    Ok(x)
}

impl RunConfig {
    /// Parses a complete configuration; every key must be present.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::blank();
        let mut seen = Vec::new();
        cfg.apply(text, &mut seen)?;
        for key in KEYS {
            if !seen.contains(key) && *key != "output_path" {
                return Err(CliError::config(key, "missing from configuration"));
            }
        }
        Ok(cfg)
    }

    /// Defaults overridden by the keys present in `text`.
    pub fn parse_overrides(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        cfg.apply(text, &mut Vec::new())?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse_overrides(&text)
    }

    fn blank() -> Self {
        let unit = GridSpec {
            start: 0.0,
            stop: 0.0,
            step: 1.0,
        };
        Self {
            rho: 0.0,
            n_elements: 0,
            quant_bits: 0,
            bsw_codebook_size: 0,
            bsw_codebook: BswConstruction::RandomGrid,
            target_snr_db: 0.0,
            proc_ttis: 0,
            switch_ttis: 0,
            es_reservation: true,
            header_bits: 0,
            bits_per_tti: 0,
            ini_carries_full_codebook: false,
            symbols_per_tti: 0,
            perfect_control: true,
            snr_ue_db: 0.0,
            snr_ris_db: 0.0,
            bandwidth_hz: 0.0,
            master_seed: 0,
            n_trials: 0,
            frame_grid: unit,
            snr_grid_db: unit,
            output_path: None,
        }
    }

    fn apply(&mut self, text: &str, seen: &mut Vec<&'static str>) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(
                    "config",
                    format!("line {}: expected `key = value`, got `{line}`", lineno + 1),
                ));
            };
            let key = key.trim();
            let value = value.trim();
            let field = KEYS.iter().copied().find(|k| *k == key).ok_or_else(|| {
                CliError::config("config", format!("line {}: unknown key `{key}`", lineno + 1))
            })?;
            self.set(field, value)?;
            seen.push(field);
        }
        Ok(())
    }

    fn set(&mut self, field: &'static str, v: &str) -> Result<(), CliError> {
        match field {
            "rho" => self.rho = parse_f64(field, v)?,
            "n_elements" => self.n_elements = parse_num(field, v)?,
            "quant_bits" => self.quant_bits = parse_num(field, v)?,
            "bsw_codebook_size" => self.bsw_codebook_size = parse_num(field, v)?,
            "bsw_codebook" => {
                self.bsw_codebook = match v {
                    "random" => BswConstruction::RandomGrid,
                    "dft" => BswConstruction::DftSubset,
                    _ => {
                        return Err(CliError::config(
                            field,
                            format!("expected random or dft, got `{v}`"),
                        ))
                    }
                }
            }
            "target_snr_db" => self.target_snr_db = parse_f64(field, v)?,
            "proc_ttis" => self.proc_ttis = parse_num(field, v)?,
            "switch_ttis" => self.switch_ttis = parse_num(field, v)?,
            "es_reservation" => self.es_reservation = parse_bool(field, v)?,
            "header_bits" => self.header_bits = parse_num(field, v)?,
            "bits_per_tti" => self.bits_per_tti = parse_num(field, v)?,
            "ini_carries_full_codebook" => self.ini_carries_full_codebook = parse_bool(field, v)?,
            "symbols_per_tti" => self.symbols_per_tti = parse_num(field, v)?,
            "perfect_control" => self.perfect_control = parse_bool(field, v)?,
            "snr_ue_db" => self.snr_ue_db = parse_f64(field, v)?,
            "snr_ris_db" => self.snr_ris_db = parse_f64(field, v)?,
            "bandwidth_hz" => self.bandwidth_hz = parse_f64(field, v)?,
            "master_seed" => self.master_seed = parse_num(field, v)?,
            "n_trials" => self.n_trials = parse_num(field, v)?,
            "frame_grid" => self.frame_grid = GridSpec::parse(field, v)?,
            "snr_grid_db" => self.snr_grid_db = GridSpec::parse(field, v)?,
            "output_path" => self.output_path = Some(PathBuf::from(v)),
            _ => unreachable!("key list and setter disagree on `{field}`"),
        }
        Ok(())
    }

    pub fn scheme_params(&self, scheme: Scheme) -> SchemeParams {
        SchemeParams {
            scheme,
            n_elements: self.n_elements,
            bsw_codebook_size: self.bsw_codebook_size,
            quant_bits: self.quant_bits,
            target_snr: db_to_linear(self.target_snr_db),
            proc_ttis: self.proc_ttis,
            switch_ttis: self.switch_ttis,
            es_reservation: self.es_reservation,
        }
    }

    pub fn control_state(&self) -> ControlChannelState {
        ControlChannelState {
            avg_snr_ue: db_to_linear(self.snr_ue_db),
            avg_snr_ris: db_to_linear(self.snr_ris_db),
            symbols_per_tti: self.symbols_per_tti,
        }
    }

    pub fn setup(&self) -> SimulationSetup {
        SimulationSetup {
            rho: self.rho,
            bandwidth_hz: self.bandwidth_hz,
            n_trials: self.n_trials,
            seed: self.master_seed,
            header_bits: self.header_bits,
            bits_per_tti: self.bits_per_tti,
            ini_carries_full_codebook: self.ini_carries_full_codebook,
            bsw_construction: self.bsw_codebook,
            assume_perfect_control: self.perfect_control,
            control: self.control_state(),
        }
    }

    pub fn frames(&self) -> Result<Vec<f64>, CliError> {
        let g = self.frame_grid;
        frame_grid(g.start, g.stop, g.step).map_err(|e| CliError::config("frame_grid", e.to_string()))
    }

    pub fn snr_axis_db(&self) -> Vec<f64> {
        self.snr_grid_db.points()
    }

    /// Search window for reliability thresholds: the SNR grid bounds.
    pub fn snr_search(&self) -> SnrSearch {
        SnrSearch {
            min_db: self.snr_grid_db.start,
            max_db: self.snr_grid_db.stop,
            tol_db: 0.01,
        }
    }

    /// Checks every parameter against the simulator's preconditions.
    pub fn validate(&self) -> Result<(), CliError> {
        let map = |e: risctl_core::Error| match e {
            risctl_core::Error::InvalidParameter { name, reason } => CliError::config(name, reason),
            other => CliError::config("config", other.to_string()),
        };
        for scheme in Scheme::ALL {
            let p = self.scheme_params(scheme);
            p.validate().map_err(map)?;
            self.setup().catalog(&p).map_err(map)?;
        }
        self.setup().validate().map_err(map)?;
        if self.n_elements > 1 << 16 {
            return Err(CliError::config(
                "n_elements",
                "at most 65536 elements are supported",
            ));
        }
        if self.quant_bits > risctl_core::channel::MAX_QUANT_BITS {
            return Err(CliError::config("quant_bits", "too many bits per element"));
        }
        for f in self.frames()? {
            frame_ttis(f).map_err(|e| CliError::config("frame_grid", e.to_string()))?;
        }
        let snr = self.snr_grid_db;
        if snr.start == snr.stop {
            return Err(CliError::config("snr_grid_db", "grid needs at least two points"));
        }
        Ok(())
    }

    /// The configuration in its own file format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let bsw = match self.bsw_codebook {
            BswConstruction::RandomGrid => "random",
            BswConstruction::DftSubset => "dft",
        };
        let pairs: Vec<(&str, String)> = vec![
            ("rho", self.rho.to_string()),
            ("n_elements", self.n_elements.to_string()),
            ("quant_bits", self.quant_bits.to_string()),
            ("bsw_codebook_size", self.bsw_codebook_size.to_string()),
            ("bsw_codebook", bsw.to_string()),
            ("target_snr_db", self.target_snr_db.to_string()),
            ("proc_ttis", self.proc_ttis.to_string()),
            ("switch_ttis", self.switch_ttis.to_string()),
            ("es_reservation", self.es_reservation.to_string()),
            ("header_bits", self.header_bits.to_string()),
            ("bits_per_tti", self.bits_per_tti.to_string()),
            (
                "ini_carries_full_codebook",
                self.ini_carries_full_codebook.to_string(),
            ),
            ("symbols_per_tti", self.symbols_per_tti.to_string()),
            ("perfect_control", self.perfect_control.to_string()),
            ("snr_ue_db", self.snr_ue_db.to_string()),
            ("snr_ris_db", self.snr_ris_db.to_string()),
            ("bandwidth_hz", self.bandwidth_hz.to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("n_trials", self.n_trials.to_string()),
            ("frame_grid", self.frame_grid.render()),
            ("snr_grid_db", self.snr_grid_db.render()),
        ];
        for (k, v) in pairs {
            let _ = writeln!(out, "{k} = {v}");
        }
        if let Some(p) = &self.output_path {
            let _ = writeln!(out, "output_path = {}", p.display());
        }
        out
    }
}

const KEYS: &[&str] = &[
    "rho",
    "n_elements",
    "quant_bits",
    "bsw_codebook_size",
    "bsw_codebook",
    "target_snr_db",
    "proc_ttis",
    "switch_ttis",
    "es_reservation",
    "header_bits",
    "bits_per_tti",
    "ini_carries_full_codebook",
    "symbols_per_tti",
    "perfect_control",
    "snr_ue_db",
    "snr_ris_db",
    "bandwidth_hz",
    "master_seed",
    "n_trials",
    "frame_grid",
    "snr_grid_db",
    "output_path",
];

#[cfg(test)]
mod tests {
    use super::*;
    use risctl_core::metrics::DEFAULT_RHO;

    #[test]
    fn default_file_matches_library_defaults() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.rho, DEFAULT_RHO);
        assert_eq!(cfg.scheme_params(Scheme::Oce), SchemeParams::new(Scheme::Oce));
        assert_eq!(cfg.frames().unwrap().len(), 19);
        assert_eq!(cfg.snr_axis_db().len(), 31);
        cfg.validate().unwrap();
    }

    #[test]
    fn render_round_trips() {
        let cfg = RunConfig {
            output_path: Some("x.csv".into()),
            bsw_codebook: BswConstruction::DftSubset,
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&cfg.render()).unwrap(), cfg);
    }

    #[test]
    fn errors_name_the_field() {
        let err = RunConfig::parse_overrides("n_trials = many").unwrap_err();
        assert!(err.to_string().contains("n_trials"), "{err}");
        let err = RunConfig::parse_overrides("colour = blue").unwrap_err();
        assert!(err.to_string().contains("colour"));
        let err = RunConfig::parse_overrides("just some words").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        let err = RunConfig::parse("rho = 1").unwrap_err();
        assert!(err.to_string().contains("n_elements"));

        let cfg = RunConfig::parse_overrides("quant_bits = 0").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("quant_bits"));
        let cfg = RunConfig::parse_overrides("frame_grid = 10:20:0.3").unwrap();
        assert!(cfg.validate().unwrap_err().to_string().contains("frame_grid"));
    }

    #[test]
    fn grid_forms() {
        assert_eq!(GridSpec::parse("g", "4").unwrap().points(), vec![4.0]);
        assert_eq!(
            GridSpec::parse("g", "0:1:0.5").unwrap().points(),
            vec![0.0, 0.5, 1.0]
        );
        assert!(GridSpec::parse("g", "1:0:1").is_err());
        assert!(GridSpec::parse("g", "1:2").is_err());
        assert!(GridSpec::parse("g", "a:b:c").is_err());
    }
}
