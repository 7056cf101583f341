use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, ValueEnum};
use serde_json::{json, Value};

use qnd_core::constants::*;
use qnd_core::inference::{
    discrimination_threshold, fidelity_report, min_repetitions, misclassification, simulate_timetrace, StateLabel,
    SuccessSource, TimeTraceConfig,
};
use qnd_core::io;
use qnd_core::motion::{
    calibrate_coupling, coherent_cutoff, fock_distribution_coherent, fock_distribution_thermal, odf_displacement,
    sideband_signal, FockDistribution, OdfConfig, SidebandParams, DEFAULT_N_MAX,
};
use qnd_core::specfit::{
    build_calibration, extract_avib, fit_line_center_with, fit_rabi_trace_with, stark_from_trace_with, CalibrationModel,
    LmOptions, TraceMeta,
};
use qnd_core::stark::{
    ac_stark_shift, ca_d_five_half, ca_s_half, hyperfine_validity_with, n2_bright_state, n2_other_states,
    operating_point_shift, scattering_budget, stark_spectrum, LaserField, LineCatalog, RoVibronicState,
    TransitionLine, DEFAULT_POLE_GUARD, R11_HALF,
};

use crate::config::RunConfig;
use crate::envelope::{InputDigest, ResultEnvelope};
use crate::CliError;

pub struct Context {
    pub config: RunConfig,
    pub out: PathBuf,
}

impl Context {
    fn digest(&self, command: &str, args: &impl std::fmt::Debug) -> InputDigest {
        let mut d = InputDigest::default();
        d.add(command.as_bytes());
        d.add(format!("{args:?}").as_bytes());
        d.add(
            serde_json::to_string(&self.config.snapshot())
                .expect("string map serializes")
                .as_bytes(),
        );
        if let Some(path) = &self.config.catalog_path {
            if let Ok(bytes) = std::fs::read(path) {
                d.add(&bytes);
            }
        }
        d
    }

    fn envelope(&self, command: &str, digest: InputDigest, outputs: Value) -> ResultEnvelope {
        ResultEnvelope {
            command: command.to_string(),
            input_digest: digest.finish(),
            config: self.config.snapshot(),
            outputs,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    fn write_csv(&self, name: &str, body: &str) -> Result<String, CliError> {
        std::fs::create_dir_all(&self.out)
            .map_err(|e| CliError::input(format!("cannot create {}: {e}", self.out.display())))?;
        let path = self.out.join(name);
        io::write_text(&path, body)?;
        Ok(path.display().to_string())
    }

    fn read_input(&self, path: &Path, digest: &mut InputDigest) -> Result<String, CliError> {
        let text = io::read_text(path)?;
        digest.add(text.as_bytes());
        Ok(text)
    }

    fn params(&self) -> Result<SidebandParams, CliError> {
        let c = &self.config;
        Ok(SidebandParams::new(c.eta, c.omega0_hz, 0.0, c.t2_s, OPERATING_MODE_FREQUENCY)?)
    }

    fn meta(&self) -> Result<TraceMeta, CliError> {
        Ok(TraceMeta {
            params: self.params()?,
            odf_pulse_time: self.config.t_odf_s,
        })
    }

    fn target_line(&self, catalog: &LineCatalog, branch: &str) -> Result<TransitionLine, CliError> {
        catalog
            .find_branch(branch)
            .cloned()
            .ok_or_else(|| CliError::input(format!("branch {branch} not in catalog {}", catalog.name)))
    }
}

fn finite_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::input(format!("--{name} must be positive, got {v}")))
    }
}

/// `start, start+step, …` up to `stop` inclusive.
fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    finite_positive("step", step)?;
    if !(start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(CliError::input(format!("empty range [{start}, {stop}]")));
    }
    let n = ((stop - start) / step * (1.0 + 1e-12)).floor();
    if n > 1e7 {
        return Err(CliError::input(format!("range holds {n} points, more than 10^7")));
    }
    Ok((0..=n as usize).map(|i| start + i as f64 * step).collect())
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    /// First laser frequency, Hz [default: R11(1/2) − 150 GHz].
    #[arg(long)]
    start: Option<f64>,
    /// Last laser frequency, Hz [default: R11(1/2) + 150 GHz].
    #[arg(long)]
    stop: Option<f64>,
    /// Grid step, Hz.
    #[arg(long, default_value_t = 0.5e9)]
    step: f64,
    /// Half-width of the masked band around each line, Hz.
    #[arg(long, default_value_t = DEFAULT_POLE_GUARD)]
    pole_guard: f64,
    /// Add the Ca⁺ S1/2 and D5/2 shifts at the operating point.
    #[arg(long)]
    ca_reference: bool,
}

pub fn spectrum(ctx: &Context, args: &SpectrumArgs) -> Result<ResultEnvelope, CliError> {
    let digest = ctx.digest("spectrum", args);
    let catalog = ctx.config.catalog()?;
    let center = ctx.target_line(&catalog, R11_HALF)?.frequency;
    let frequencies = grid(
        args.start.unwrap_or(center - 150e9),
        args.stop.unwrap_or(center + 150e9),
        args.step,
    )?;
    let others = n2_other_states(&catalog);
    let rows = stark_spectrum(
        &n2_bright_state(),
        &others,
        ctx.config.intensity_w_m2,
        &frequencies,
        &catalog,
        args.pole_guard,
    )?;
    let csv = ctx.write_csv("spectrum.csv", &io::spectrum_to_csv(&rows))?;
    let peak = rows
        .iter()
        .filter_map(|r| r.bright_shift.map(|s| (r.frequency, s)))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()));
    let operating_frequency = center + OPERATING_DETUNING;
    let mut outputs = json!({
        "csv": csv,
        "rows": rows.len(),
        "masked_rows": rows.iter().filter(|r| r.bright_shift.is_none() || r.other_shift.is_none()).count(),
        "peak_frequency_hz": peak.map(|p| p.0),
        "peak_bright_shift_hz": peak.map(|p| p.1),
        "operating_frequency_hz": operating_frequency,
    });
    if args.ca_reference {
        let ca = LineCatalog::ca_plus();
        let laser = LaserField::pi(ctx.config.intensity_w_m2, operating_frequency)?;
        outputs["ca_reference"] = json!({
            "s_half_shift_hz": ac_stark_shift(&ca_s_half(), &laser, &ca)?,
            "d_five_half_shift_hz": ac_stark_shift(&ca_d_five_half(), &laser, &ca)?,
        });
    }
    Ok(ctx.envelope("spectrum", digest, outputs))
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("drive").required(true).args(["alpha", "stark_shift"])))]
pub struct RabiArgs {
    /// Coherent amplitude |α|.
    #[arg(long)]
    alpha: Option<f64>,
    /// Molecular Stark shift driving the ODF pulse, Hz.
    #[arg(long, allow_hyphen_values = true)]
    stark_shift: Option<f64>,
    /// Last pulse time, s.
    #[arg(long, default_value_t = 200e-6)]
    t_stop: f64,
    /// Pulse-time step, s.
    #[arg(long, default_value_t = 1e-6)]
    t_step: f64,
    /// Add the thermal-only and dark-state curves.
    #[arg(long)]
    background: bool,
    /// Also write the Fock distribution.
    #[arg(long)]
    distribution: bool,
}

pub fn rabi(ctx: &Context, args: &RabiArgs) -> Result<ResultEnvelope, CliError> {
    let digest = ctx.digest("rabi", args);
    let params = ctx.params()?;
    let c = &ctx.config;
    let catalog = c.catalog()?;
    let coupling = calibrate_coupling(
        OPERATING_P_BRIGHT,
        OPERATING_T_729,
        &params,
        operating_point_shift(&catalog)?,
        c.t_odf_s,
        c.mass_correction,
    )?;
    let displacement = |shift: f64| -> Result<f64, CliError> {
        let odf = OdfConfig::new(shift, c.t_odf_s, coupling.coupling_constant, c.mass_correction)?;
        Ok(odf_displacement(&odf, params.eta))
    };
    let alpha = match (args.alpha, args.stark_shift) {
        (Some(a), None) if a >= 0.0 && a.is_finite() => a,
        (Some(a), None) => return Err(CliError::input(format!("--alpha must be non-negative, got {a}"))),
        (None, Some(s)) => displacement(s)?,
        _ => return Err(CliError::input("give exactly one of --alpha and --stark-shift")),
    };
    let coherent = |a: f64| -> Result<FockDistribution, CliError> {
        Ok(fock_distribution_coherent(a, coherent_cutoff(a * a).max(DEFAULT_N_MAX))?)
    };
    let bright = coherent(alpha)?;
    let times = grid(0.0, args.t_stop, args.t_step)?;

    let mut header = vec!["t_s", "p_excite"];
    let mut extra: Vec<FockDistribution> = Vec::new();
    let mut outputs = json!({});
    if args.background {
        header.extend(["background", "dark"]);
        extra.push(fock_distribution_thermal(c.nbar_background, 256)?);
        let laser = LaserField::pi(
            c.intensity_w_m2,
            ctx.target_line(&catalog, R11_HALF)?.frequency + OPERATING_DETUNING,
        )?;
        let mut dark_shift = 0.0f64;
        for s in n2_other_states(&catalog) {
            dark_shift = dark_shift.max(ac_stark_shift(&s, &laser, &catalog)?.abs());
        }
        let dark_alpha = displacement(dark_shift)?;
        extra.push(coherent(dark_alpha)?);
        outputs["dark_alpha"] = json!(dark_alpha);
        outputs["dark_stark_shift_hz"] = json!(dark_shift);
    }
    let rows = times.iter().map(|&t| {
        std::iter::once(t.to_string())
            .chain(std::iter::once(sideband_signal(&bright, t, &params).to_string()))
            .chain(extra.iter().map(move |d| sideband_signal(d, t, &params).to_string()))
            .collect::<Vec<_>>()
    });
    outputs["csv"] = json!(ctx.write_csv("rabi.csv", &io::format_table(&header, rows))?);
    if args.distribution {
        outputs["distribution_csv"] = json!(ctx.write_csv("distribution.csv", &io::distribution_to_csv(&bright))?);
    }
    outputs["alpha"] = json!(alpha);
    outputs["coupling_constant"] = json!(coupling.coupling_constant);
    outputs["signal_at_t729"] = json!(sideband_signal(&bright, OPERATING_T_729, &params));
    Ok(ctx.envelope("rabi", digest, outputs))
}

#[derive(Args, Debug)]
pub struct DiscriminateArgs {
    /// Target fidelities for the minimum-repetition search.
    #[arg(long, value_delimiter = ',', default_values_t = [0.99, 0.995, 0.999])]
    targets: Vec<f64>,
}

pub fn discriminate(ctx: &Context, args: &DiscriminateArgs) -> Result<ResultEnvelope, CliError> {
    let digest = ctx.digest("discriminate", args);
    let model = ctx.config.model()?;
    let report = fidelity_report(&model);
    let optimal_k = discrimination_threshold(model.p_alpha, model.p_beta, model.n_rep)?;
    let mut targets = Vec::new();
    for &t in &args.targets {
        let n = match min_repetitions(model.p_alpha, model.p_beta, t) {
            Ok(n) => Some(n),
            Err(e) if e.is_numerical() => None,
            Err(e) => return Err(e.into()),
        };
        targets.push(json!({"target": t, "min_repetitions": n}));
    }
    let outputs = json!({
        "k_t": optimal_k,
        "threshold_k": model.threshold_k,
        "threshold_p": model.threshold_p,
        "error_dark": report.error_dark,
        "error_bright": report.error_bright,
        "fidelity_dark": report.fidelity_dark,
        "fidelity_bright": report.fidelity_bright,
        "fidelity_overall": report.fidelity_overall,
        "min_repetitions": targets,
    });
    Ok(ctx.envelope("discriminate", digest, outputs))
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum StartState {
    Bright,
    Dark,
}

#[derive(Args, Debug)]
pub struct TimetraceArgs {
    #[arg(long, default_value_t = 268)]
    attempts: usize,
    /// Per-attempt bright→dark jump probability.
    #[arg(long, default_value_t = 0.0)]
    jump_probability: f64,
    /// Force the jump so that attempts from this index on are dark.
    #[arg(long)]
    jump_at: Option<usize>,
    #[arg(long, value_enum, default_value_t = StartState::Bright)]
    start: StartState,
    /// Histogram bins over p̂ [default: n_rep + 1].
    #[arg(long)]
    bins: Option<usize>,
}

pub fn timetrace(ctx: &Context, args: &TimetraceArgs) -> Result<ResultEnvelope, CliError> {
    let digest = ctx.digest("timetrace", args);
    let c = &ctx.config;
    let model = c.model()?;
    let mut config = TimeTraceConfig::new(args.attempts, args.jump_probability, c.prep_success, c.seed)?.starting(
        match args.start {
            StartState::Bright => StateLabel::Bright,
            StartState::Dark => StateLabel::Dark,
        },
    );
    if let Some(at) = args.jump_at {
        config = config.with_forced_jump(at);
    }
    let records = simulate_timetrace(&model, &SuccessSource::Analytic, &config);
    let bins = io::p_hat_histogram(&records, args.bins.unwrap_or(model.n_rep + 1))?;
    let count = |label| records.iter().filter(|r| r.classification == Some(label)).count();
    let (bright_total, bright_wrong) = misclassification(&records, StateLabel::Bright);
    let (dark_total, dark_wrong) = misclassification(&records, StateLabel::Dark);
    let outputs = json!({
        "csv": ctx.write_csv("timetrace.csv", &io::timetrace_to_csv(&records))?,
        "histogram_csv": ctx.write_csv("histogram.csv", &io::histogram_to_csv(&bins))?,
        "attempts": records.len(),
        "classified_bright": count(StateLabel::Bright),
        "classified_dark": count(StateLabel::Dark),
        "indeterminate": records.iter().filter(|r| r.classification.is_none()).count(),
        "true_bright": bright_total,
        "true_dark": dark_total,
        "misclassified_bright": bright_wrong,
        "misclassified_dark": dark_wrong,
        "first_dark_attempt": records.iter().position(|r| r.true_state == StateLabel::Dark),
    });
    Ok(ctx.envelope("timetrace", digest, outputs))
}

#[derive(Args, Debug)]
pub struct SolverArgs {
    /// Iteration cap per fit start.
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
}

impl SolverArgs {
    fn options(&self) -> LmOptions {
        LmOptions {
            max_iterations: self.max_iterations,
            ..LmOptions::default()
        }
    }
}

#[derive(Args, Debug)]
pub struct FitRabiArgs {
    /// Trace CSV `t_s,p_excite,n_shots`.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

pub fn fit_rabi(ctx: &Context, args: &FitRabiArgs) -> Result<ResultEnvelope, CliError> {
    let mut digest = ctx.digest("fit rabi", args);
    let text = ctx.read_input(&args.input, &mut digest)?;
    let trace = io::parse_rabi_trace(&text, &args.input.display().to_string(), ctx.meta()?)?;
    let fit = fit_rabi_trace_with(&trace, &args.solver.options())?;
    let s = fit.sigmas();
    let mut outputs = serde_json::to_value(&fit).map_err(|e| CliError::input(e.to_string()))?;
    outputs["sigma_nbar"] = json!(s[0]);
    outputs["sigma_delta"] = json!(s[1]);
    outputs["sigma_t2"] = json!(s[2]);
    Ok(ctx.envelope("fit rabi", digest, outputs))
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("calib").required(true).args(["calibration", "calibrate"])))]
pub struct FitStarkArgs {
    /// Trace CSV to convert.
    #[arg(long)]
    input: PathBuf,
    /// Calibration model JSON, as emitted under `outputs.calibration`.
    #[arg(long)]
    calibration: Option<PathBuf>,
    /// Calibration trace at a known shift, `SHIFT_HZ=PATH`; repeat at least four times.
    #[arg(long, value_name = "SHIFT_HZ=PATH", value_parser = parse_calibration_point)]
    calibrate: Vec<(f64, PathBuf)>,
    #[command(flatten)]
    solver: SolverArgs,
}

fn parse_calibration_point(s: &str) -> Result<(f64, PathBuf), String> {
    let (shift, path) = s.split_once('=').ok_or_else(|| format!("expected SHIFT_HZ=PATH, got {s:?}"))?;
    let shift = shift.trim().parse().map_err(|_| format!("bad shift {shift:?}"))?;
    Ok((shift, PathBuf::from(path.trim())))
}

pub fn fit_stark(ctx: &Context, args: &FitStarkArgs) -> Result<ResultEnvelope, CliError> {
    let mut digest = ctx.digest("fit stark", args);
    let meta = ctx.meta()?;
    let calib: CalibrationModel = match &args.calibration {
        Some(path) => {
            let text = ctx.read_input(path, &mut digest)?;
            serde_json::from_str(&text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
        }
        None => {
            let mut points = Vec::with_capacity(args.calibrate.len());
            for (shift, path) in &args.calibrate {
                let text = ctx.read_input(path, &mut digest)?;
                let trace = io::parse_rabi_trace(&text, &path.display().to_string(), meta)?;
                points.push((*shift, fit_rabi_trace_with(&trace, &args.solver.options())?));
            }
            build_calibration(&points, &meta.params)?
        }
    };
    let text = ctx.read_input(&args.input, &mut digest)?;
    let trace = io::parse_rabi_trace(&text, &args.input.display().to_string(), meta)?;
    let est = stark_from_trace_with(&trace, &calib, &args.solver.options())?;
    let outputs = json!({
        "stark_shift_hz": est.stark_shift,
        "sigma_hz": est.sigma,
        "at_boundary": est.at_boundary,
        "chi2": est.chi2,
        "iterations": est.iterations,
        "calibration": calib,
    });
    Ok(ctx.envelope("fit stark", digest, outputs))
}

#[derive(Args, Debug)]
pub struct FitLineArgs {
    /// Stark points CSV `frequency_hz,intensity_w_m2,stark_over_intensity,sigma`.
    #[arg(long)]
    input: PathBuf,
    /// Frequency systematic added in quadrature to the f₀ uncertainty, Hz.
    #[arg(long, default_value_t = WAVEMETER_ACCURACY)]
    systematic_hz: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

pub fn fit_line(ctx: &Context, args: &FitLineArgs) -> Result<ResultEnvelope, CliError> {
    let mut digest = ctx.digest("fit line", args);
    let text = ctx.read_input(&args.input, &mut digest)?;
    let points = io::parse_stark_points(&text, &args.input.display().to_string(), None)?;
    let fit = fit_line_center_with(&points, args.systematic_hz, &args.solver.options())?;
    let outputs = serde_json::to_value(&fit).map_err(|e| CliError::input(e.to_string()))?;
    Ok(ctx.envelope("fit line", digest, outputs))
}

#[derive(Args, Debug)]
pub struct FitAvibArgs {
    /// Stark points CSV `frequency_hz,intensity_w_m2,stark_over_intensity,sigma`.
    #[arg(long)]
    input: PathBuf,
    /// Catalog branch the points were taken on.
    #[arg(long, default_value = R11_HALF)]
    branch: String,
    /// Twice the m quantum number of the probed sublevel [default: stretched, m = J].
    #[arg(long, allow_hyphen_values = true)]
    twice_m: Option<i32>,
}

fn probed_state(catalog: &LineCatalog, line: &TransitionLine, twice_m: Option<i32>) -> Result<RoVibronicState, CliError> {
    let twice_m = twice_m.unwrap_or(line.lower.twice_j);
    std::iter::once(n2_bright_state())
        .chain(n2_other_states(catalog))
        .find(|s| s.is_level(&line.lower) && s.twice_m == twice_m)
        .ok_or_else(|| {
            CliError::input(format!(
                "no sublevel 2m = {twice_m} of {} among the known N2+ states",
                line.lower
            ))
        })
}

pub fn fit_avib(ctx: &Context, args: &FitAvibArgs) -> Result<ResultEnvelope, CliError> {
    let mut digest = ctx.digest("fit avib", args);
    let catalog = ctx.config.catalog()?;
    let line = ctx.target_line(&catalog, &args.branch)?;
    let state = probed_state(&catalog, &line, args.twice_m)?;
    let text = ctx.read_input(&args.input, &mut digest)?;
    let points = io::parse_stark_points(&text, &args.input.display().to_string(), Some(line.frequency))?;
    if points.is_empty() {
        return Err(CliError::input(format!("{}: no data rows", args.input.display())));
    }
    let mut per_point = Vec::with_capacity(points.len());
    let mut values = Vec::with_capacity(points.len());
    for p in &points {
        let a = extract_avib(p, &line, &state, &catalog, ctx.config.mass_correction)?;
        values.push(a);
        per_point.push(json!({"frequency_hz": p.frequency, "detuning_hz": p.detuning, "a_vib": a}));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        f64::NAN
    };
    let outputs = json!({
        "branch": line.branch,
        "state": state.label,
        "twice_m": state.twice_m,
        "mass_correction": ctx.config.mass_correction,
        "mean_a_vib": mean,
        "std_a_vib": std,
        "sem_a_vib": std / n.sqrt(),
        "points": per_point,
    });
    Ok(ctx.envelope("fit avib", digest, outputs))
}

#[derive(Args, Debug)]
pub struct BudgetArgs {
    /// Laser detuning from the line, Hz.
    #[arg(long, allow_hyphen_values = true)]
    detuning: f64,
    /// Stark shift at that detuning, Hz.
    #[arg(long, allow_hyphen_values = true)]
    stark_shift: f64,
    /// Hyperfine spacing for the validity check, Hz.
    #[arg(long, default_value_t = DEFAULT_HFS_SPACING)]
    hfs_spacing: f64,
}

pub fn budget(ctx: &Context, args: &BudgetArgs) -> Result<ResultEnvelope, CliError> {
    let digest = ctx.digest("budget", args);
    let b = scattering_budget(args.detuning, args.stark_shift)?;
    let v = hyperfine_validity_with(args.detuning, args.hfs_spacing);
    let outputs = json!({
        "cycles": b.cycles,
        "bsb_pulses": b.bsb_pulses,
        "hyperfine_valid": v.valid,
        "hyperfine_message": v.message,
    });
    Ok(ctx.envelope("budget", digest, outputs))
}
