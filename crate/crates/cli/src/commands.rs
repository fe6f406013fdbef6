use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use risctl_core::control::{db_to_linear, SnrAxis};
use risctl_core::{
    build_frame, goodput_sweep, min_snr_for_reliability, overhead_ms, reliability_grid, validate_causality,
    ControlMode, GoodputResult,
};

use crate::{CliError, Command, CommonArgs, RunConfig};

pub const GOODPUT_HEADER: &str = "frame_ms,scheme,mode,goodput_mbps,overhead_ms,success_prob,n_trials,seed";
pub const RELIABILITY_HEADER: &str = "snr_ris_db,snr_ue_db,scheme,mode,reliability";
pub const THRESHOLD_HEADER: &str = "scheme,mode,axis,fixed_other_snr_db,threshold,min_snr_db";

type Runner = fn(&CommonArgs, &RunConfig, &mut dyn Write) -> Result<(), CliError>;

pub fn dispatch(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (args, run): (&CommonArgs, Runner) = match command {
        Command::Goodput(a) => (a, cmd_goodput),
        Command::Reliability(a) => (a, cmd_reliability),
        Command::Validate(a) => (a, cmd_validate),
    };
    let cfg = args.resolve()?;
    log_config(&cfg, err);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let mut buffer = Vec::new();
    let result = pool.install(|| run(args, &cfg, &mut buffer));
    out.write_all(&buffer)
        .and_then(|()| out.flush())
        .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
    result
}

fn log_config(cfg: &RunConfig, err: &mut dyn Write) {
    let _ = writeln!(err, "# resolved configuration");
    for line in cfg.render().lines() {
        let _ = writeln!(err, "#   {line}");
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes `body` to `path`, or to `fallback` when no path is set.
fn emit(path: Option<&PathBuf>, body: &str, fallback: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_err(p, e))?;
            let mut w = BufWriter::new(file);
            w.write_all(body.as_bytes()).map_err(|e| io_err(p, e))?;
            w.flush().map_err(|e| io_err(p, e))
        }
        None => fallback
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn core_err(e: risctl_core::Error) -> CliError {
    match e {
        risctl_core::Error::InvalidParameter { name, reason } => CliError::config(name, reason),
        other => CliError::config("config", other.to_string()),
    }
}

pub fn goodput_row(r: &GoodputResult) -> String {
    format!(
        "{},{},{},{:.6},{:.4},{:.6},{},{}",
        r.frame_ms, r.scheme, r.mode, r.goodput_mbps, r.overhead_ms, r.success_prob, r.n_trials, r.seed
    )
}

pub fn cmd_goodput(args: &CommonArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let frames = cfg.frames()?;
    let setup = cfg.setup();
    let mut curves = Vec::new();
    for scheme in args.scheme.schemes() {
        for mode in args.mode.modes() {
            let curve = goodput_sweep(&cfg.scheme_params(scheme), mode, &frames, &setup).map_err(core_err)?;
            curves.push(curve);
        }
    }
    let mut body = String::from(GOODPUT_HEADER);
    body.push('\n');
    for i in 0..frames.len() {
        for curve in &curves {
            body.push_str(&goodput_row(&curve[i]));
            body.push('\n');
        }
    }
    emit(cfg.output_path.as_ref(), &body, out)
}

pub fn cmd_reliability(args: &CommonArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let axis = cfg.snr_axis_db();
    let setup = cfg.setup();
    let mut body = String::from(RELIABILITY_HEADER);
    body.push('\n');
    let mut summary = String::from(THRESHOLD_HEADER);
    summary.push('\n');
    let top = *axis.last().expect("validated grid is non-empty");
    for scheme in args.scheme.schemes() {
        let catalog = setup.catalog(&cfg.scheme_params(scheme)).map_err(core_err)?;
        for mode in args.mode.modes() {
            let grid =
                reliability_grid(&catalog, mode, &axis, &axis, cfg.symbols_per_tti).map_err(core_err)?;
            for cell in grid.iter().flatten() {
                body.push_str(&format!(
                    "{},{},{},{},{:.9}\n",
                    cell.snr_ris_db, cell.snr_ue_db, scheme, mode, cell.reliability
                ));
            }
            if let Some(target) = args.threshold {
                for axis_kind in [SnrAxis::Ue, SnrAxis::Ris] {
                    let min = min_snr_for_reliability(
                        &catalog,
                        target,
                        db_to_linear(top),
                        cfg.symbols_per_tti,
                        axis_kind,
                        mode,
                        cfg.snr_search(),
                    )
                    .map_err(core_err)?;
                    summary.push_str(&format!(
                        "{scheme},{mode},{},{top},{target},{min:.2}\n",
                        axis_kind.as_str()
                    ));
                }
            }
        }
    }
    emit(cfg.output_path.as_ref(), &body, out)?;
    if args.threshold.is_some() {
        match &cfg.output_path {
            Some(p) => {
                let mut side = p.clone().into_os_string();
                side.push(".threshold.csv");
                emit(Some(&PathBuf::from(side)), &summary, out)?;
            }
            None => emit(None, &format!("\n{summary}"), out)?,
        }
    }
    Ok(())
}

pub fn cmd_validate(args: &CommonArgs, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let frame_ms = cfg.frames()?.into_iter().fold(f64::MIN, f64::max);
    let setup = cfg.setup();
    let mut report = String::new();
    let mut failures = 0;
    for scheme in args.scheme.schemes() {
        let params = cfg.scheme_params(scheme);
        let catalog = setup.catalog(&params).map_err(core_err)?;
        for mode in args.mode.modes() {
            // early stopping is shown with an exhausted sweep
            let plan = build_frame(&params, mode, frame_ms, &catalog, None).map_err(core_err)?;
            report.push_str(&format!(
                "{scheme} {} frame {frame_ms} ms ({} TTIs)\n",
                mode_name(mode),
                plan.total_ttis
            ));
            for p in &plan.phases {
                report.push_str(&format!(
                    "  {:<4}{:>6} TTI  {}\n",
                    p.kind,
                    p.tti_span,
                    p.usage.as_str()
                ));
            }
            report.push_str(&format!(
                "  overhead {} ms, payload {} ms\n",
                overhead_ms(&plan),
                plan.payload_ms()
            ));
            if plan.is_null_rate() {
                report.push_str(&format!(
                    "  warning: null rate, control needs {} TTIs but the frame has {}\n",
                    plan.required_overhead_ttis, plan.total_ttis
                ));
            }
            match validate_causality(&plan) {
                Ok(()) => report.push_str("  causality: ok\n"),
                Err(v) => {
                    failures += 1;
                    report.push_str(&format!("  causality: FAILED ({v})\n"));
                }
            }
            if plan.is_conserved() {
                report.push_str("  conservation: ok\n");
            } else {
                failures += 1;
                report.push_str("  conservation: FAILED\n");
            }
        }
    }
    emit(None, &report, out)?;
    if failures > 0 {
        return Err(CliError::config(
            "frame",
            format!("{failures} timeline check(s) failed"),
        ));
    }
    Ok(())
}

fn mode_name(mode: ControlMode) -> &'static str {
    match mode {
        ControlMode::InBand => "in-band",
        ControlMode::OutOfBand => "out-of-band",
    }
}
