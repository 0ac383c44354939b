//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use crate::cpa::{cpa_detuning_solutions, cpa_residuals, find_absorption_minima};
use crate::dressed::{numeric_ladder, polariton_eigensystem, EmitterSpace, MAX_MANIFOLD};
use crate::error::{Error, Result};
use crate::io::{read_params, ParamFile};
use crate::langevin::{integrate, relax_to_steady, MeanFieldState};
use crate::model::{ddi_from_geometry, separation_from_ddi, DetuningAxis, GeometryInput};
use crate::steady_state::solve_steady_state;
use crate::sweep::{run_sweep, DriveMode, SweepSpec, SweepVariable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "tavis-cpa", version, about = "Coherent perfect absorption with two coupled emitters in a two-sided cavity")]
struct Cli {
    /// JSON parameter file.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Suppress informational messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Per-field overrides applied on top of the parameter file.
#[derive(Debug, Args)]
struct Overrides {
    /// Coupling of both emitters.
    #[arg(long, global = true, allow_negative_numbers = true)]
    g: Option<f64>,
    /// Decay rate of both emitters.
    #[arg(long, global = true, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Decay rate through each mirror.
    #[arg(long, global = true, allow_negative_numbers = true)]
    kappa: Option<f64>,
    /// Dipole-dipole exchange strength.
    #[arg(long = "J", global = true, allow_negative_numbers = true)]
    j: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta_c: Option<f64>,
    /// Detuning of both emitters.
    #[arg(long, global = true, allow_negative_numbers = true)]
    delta_eg: Option<f64>,
    /// Amplitude of both inputs.
    #[arg(long, global = true, allow_negative_numbers = true)]
    amp: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detuning sweep of the normalized observables.
    Spectrum(SpectrumArgs),
    /// Relative-phase sweep at equal input amplitudes.
    Phase(RangeArgs),
    /// Dipole-dipole strength sweep at fixed detunings.
    Ddi(ModeRangeArgs),
    /// Analytic CPA solutions and numerical minima.
    #[command(subcommand)]
    Cpa(CpaCommand),
    /// Polariton eigensystem and numerically diagonalized ladder.
    Dressed(DressedArgs),
    /// Relax the mean-field equations to steady state.
    Relax(RelaxArgs),
    /// Dipole-dipole strength from emitter geometry, or the inverse.
    Geometry(GeometryArgs),
}

#[derive(Debug, Args)]
struct RangeArgs {
    #[arg(long, allow_negative_numbers = true)]
    start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    TwoInputEqual,
    SingleInputLeft,
    SingleInputRight,
}

impl From<ModeArg> for DriveMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::TwoInputEqual => DriveMode::TwoInputEqual,
            ModeArg::SingleInputLeft => DriveMode::SingleInputLeft,
            ModeArg::SingleInputRight => DriveMode::SingleInputRight,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AxisArg {
    Cavity,
    Emitter,
}

impl From<AxisArg> for DetuningAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Cavity => DetuningAxis::Cavity,
            AxisArg::Emitter => DetuningAxis::Emitter,
        }
    }
}

#[derive(Debug, Args)]
struct ModeRangeArgs {
    #[command(flatten)]
    range: RangeArgs,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    inner: ModeRangeArgs,
    /// Keep the emitter-cavity offset fixed while scanning.
    #[arg(long)]
    lock: bool,
    /// Detuning that labels a locked scan.
    #[arg(long, value_enum)]
    axis: Option<AxisArg>,
}

#[derive(Debug, Subcommand)]
enum CpaCommand {
    /// Closed-form detuning pairs of the CPA conditions.
    Solve,
    /// Local minima of the equal-drive output along a detuning scan.
    Scan {
        #[arg(long, allow_negative_numbers = true, default_value_t = -50.0)]
        start: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 50.0)]
        stop: f64,
        #[arg(long, default_value_t = 10_000)]
        points: usize,
        #[arg(long, value_enum, default_value_t = AxisArg::Cavity)]
        axis: AxisArg,
    },
}

#[derive(Debug, Args)]
struct DressedArgs {
    /// Highest manifold index.
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    /// Include the doubly excited emitter state in the numeric ladder.
    #[arg(long)]
    full: bool,
}

#[derive(Debug, Args)]
struct RelaxArgs {
    /// Convergence threshold on the scaled derivative norm.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write a trajectory up to this time instead of relaxing.
    #[arg(long)]
    trace: Option<f64>,
    /// Sampling interval of the trajectory.
    #[arg(long, default_value_t = 0.1)]
    stride: f64,
}

#[derive(Debug, Args)]
struct GeometryArgs {
    #[arg(long)]
    gamma0: f64,
    #[arg(long)]
    omega_eg: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Separation; prints J.
    #[arg(long, required_unless_present = "target_j", conflicts_with = "target_j")]
    r12: Option<f64>,
    /// Dipole angle to the separation axis.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    phi: f64,
    /// DDI strength; prints the separation for perpendicular dipoles.
    #[arg(long = "target-J")]
    target_j: Option<f64>,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_VALIDATION
            }
        }
    }
}

fn load(cli: &Cli) -> Result<ParamFile> {
    let mut f = match &cli.params {
        Some(path) => read_params(path)?,
        None => ParamFile::default(),
    };
    let o = &cli.overrides;
    let p = &mut f.params;
    if let Some(g) = o.g {
        p.g1 = Complex64::new(g, 0.0);
        p.g2 = p.g1;
    }
    if let Some(v) = o.gamma {
        p.gamma1 = v;
        p.gamma2 = v;
    }
    if let Some(v) = o.kappa {
        p.kappa_l = v;
        p.kappa_r = v;
    }
    if let Some(v) = o.j {
        p.j = v;
    }
    if let Some(v) = o.delta_c {
        p.delta_c = v;
    }
    if let Some(v) = o.delta_eg {
        p.delta_eg1 = v;
        p.delta_eg2 = v;
    }
    if let Some(a) = o.amp {
        f.drive = crate::model::DriveConfig::new(a, a, f.drive.phase_l, f.drive.phase_r)?;
    }
    Ok(f)
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text)?;
            if !cli.quiet {
                eprintln!("wrote {}", path.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Sweep spec from the parameter file when it matches `variable`, else defaults.
fn base_spec(file: &ParamFile, variable: SweepVariable, range: &RangeArgs, default: (f64, f64, usize)) -> SweepSpec {
    let mut spec = match file.sweep {
        Some(s) if s.variable == variable => s,
        _ => SweepSpec::new(variable, default.0, default.1, default.2),
    };
    if let Some(v) = range.start {
        spec.start = v;
    }
    if let Some(v) = range.stop {
        spec.stop = v;
    }
    if let Some(v) = range.points {
        spec.points = v;
    }
    spec
}

fn table_output(cli: &Cli, file: &ParamFile, spec: &SweepSpec) -> Result<i32> {
    let table = run_sweep(&file.params, &file.drive, spec)?;
    if let Some(m) = table.max_channel_mismatch {
        if m > 1e-12 && !cli.quiet {
            eprintln!("warning: channels differ under phase reflection by {m:e}");
        }
    }
    let text = match cli.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json()? + "\n",
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}

fn json_text<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn execute(cli: &Cli) -> Result<i32> {
    let file = load(cli)?;
    match &cli.command {
        Command::Spectrum(a) => {
            let mut spec = base_spec(&file, SweepVariable::Detuning, &a.inner.range, (-30.0, 30.0, 601));
            if let Some(m) = a.inner.mode {
                spec.mode = m.into();
            }
            if a.lock {
                spec.coupling_lock = true;
            }
            if let Some(ax) = a.axis {
                spec.axis = ax.into();
            }
            table_output(cli, &file, &spec)
        }
        Command::Phase(r) => {
            let two_pi = 2.0 * std::f64::consts::PI;
            let spec = base_spec(&file, SweepVariable::Phase, r, (-two_pi, two_pi, 401));
            table_output(cli, &file, &spec)
        }
        Command::Ddi(a) => {
            let mut spec = base_spec(&file, SweepVariable::Ddi, &a.range, (0.0, 15.0, 4));
            if let Some(m) = a.mode {
                spec.mode = m.into();
            }
            table_output(cli, &file, &spec)
        }
        Command::Cpa(CpaCommand::Solve) => cpa_solve(cli, &file),
        Command::Cpa(CpaCommand::Scan {
            start,
            stop,
            points,
            axis,
        }) => {
            let minima = find_absorption_minima(&file.params, &file.drive, (*start, *stop), *points, (*axis).into())?;
            let text = match cli.format {
                Format::Json => json_text(&minima)?,
                Format::Csv => {
                    let mut s = String::from("delta,depth,merged\n");
                    for m in &minima {
                        let _ = writeln!(s, "{:.16e},{:.16e},{}", m.delta, m.depth, m.merged);
                    }
                    s
                }
            };
            emit(cli, &text)?;
            Ok(EXIT_OK)
        }
        Command::Dressed(a) => dressed(cli, &file, a),
        Command::Relax(a) => relax(cli, &file, a),
        Command::Geometry(a) => geometry(cli, a),
    }
}

fn cpa_solve(cli: &Cli, file: &ParamFile) -> Result<i32> {
    let p = &file.params;
    let g = p.require_symmetric_real("cpa solve")?;
    p.check()?;
    let (gamma, kappa, j) = (p.gamma1, p.kappa_l, p.j);
    let sols = cpa_detuning_solutions(g, gamma, kappa, j);
    if sols.is_empty() && !cli.quiet {
        eprintln!("no real CPA solution: needs 2g^2 >= max(gamma*kappa, kappa*gamma)");
    }
    let mut rows = Vec::new();
    for s in &sols {
        let sp = s.params(g, gamma, kappa, j);
        let r = cpa_residuals(&sp)?;
        let out = solve_steady_state(&sp, &crate::model::DriveConfig::equal(1.0))?;
        rows.push((s, r.max_abs(), out.a_out_l.norm_sqr()));
    }
    let text = match cli.format {
        Format::Json => json_text(
            &rows
                .iter()
                .map(|(s, r, o)| json!({"solution": s, "residual": r, "output": o}))
                .collect::<Vec<_>>(),
        )?,
        Format::Csv => {
            let mut t = String::from("branch,delta_eg,delta_c,delta_ac,residual,output\n");
            for (s, r, o) in &rows {
                let _ = writeln!(t, "\"{}\",{},{},{},{:e},{:e}", s.branch.label(), s.delta_eg, s.delta_c, s.delta_ac, r, o);
            }
            t
        }
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}

fn dressed(cli: &Cli, file: &ParamFile, a: &DressedArgs) -> Result<i32> {
    if a.n_max == 0 || a.n_max > MAX_MANIFOLD {
        return Err(Error::Argument(format!("n-max must lie in 1..={MAX_MANIFOLD}")));
    }
    let space = if a.full {
        EmitterSpace::Full
    } else {
        EmitterSpace::SingleExcitation
    };
    let levels = (1..=a.n_max)
        .map(|n| polariton_eigensystem(n, &file.params))
        .collect::<Result<Vec<_>>>()?;
    let ladder = numeric_ladder(&file.params, a.n_max, space)?;
    let text = match cli.format {
        Format::Json => json_text(&json!({"polaritons": levels, "ladder": ladder}))?,
        Format::Csv => {
            let mut t = String::from("n,source,index,energy\n");
            for l in &levels {
                let _ = writeln!(t, "{},closed-form,0,{:.16e}", l.n, l.lambda_minus);
                let _ = writeln!(t, "{},closed-form,1,{:.16e}", l.n, l.lambda_plus);
            }
            for m in &ladder {
                for (k, e) in m.eigenvalues.iter().enumerate() {
                    let _ = writeln!(t, "{},numeric,{},{:.16e}", m.n, k, e);
                }
            }
            t
        }
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}

fn relax(cli: &Cli, file: &ParamFile, a: &RelaxArgs) -> Result<i32> {
    if let Some(t_end) = a.trace {
        let tr = integrate(&file.params, &file.drive, t_end, 1e-10, 1e-13, &MeanFieldState::ground(), a.stride)?;
        if !cli.quiet && tr.weak_excitation_broken(1e-4) {
            eprintln!(
                "warning: inversion departs from -1 by {:.3e}; the linear solution does not apply",
                tr.max_inversion_deviation
            );
        }
        let mut buf = Vec::new();
        tr.write_csv(&mut buf)?;
        emit(cli, &String::from_utf8_lossy(&buf))?;
        return Ok(EXIT_OK);
    }
    let report = relax_to_steady(&file.params, &file.drive, a.tol)?;
    let linear = solve_steady_state(&file.params, &file.drive).ok();
    let deviation = linear.map(|l| (report.final_state.a - l.a).norm() / l.a.norm());
    let text = match cli.format {
        Format::Json => json_text(&json!({"report": report, "relative_deviation": deviation}))?,
        Format::Csv => {
            let s = &report.final_state;
            let mut t = String::from("t,converged,residual_norm,steps,re_a,im_a,re_sigma1,im_sigma1,re_sigma2,im_sigma2,sz1,sz2,relative_deviation\n");
            let _ = writeln!(
                t,
                "{:.16e},{},{:e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                s.t,
                report.converged,
                report.residual_norm,
                report.steps,
                s.a.re,
                s.a.im,
                s.sigma1.re,
                s.sigma1.im,
                s.sigma2.re,
                s.sigma2.im,
                s.sz1,
                s.sz2,
                deviation.map(|d| format!("{d:e}")).unwrap_or_default()
            );
            t
        }
    };
    emit(cli, &text)?;
    if report.converged {
        Ok(EXIT_OK)
    } else {
        if !cli.quiet {
            eprintln!("error: no convergence (residual {:e})", report.residual_norm);
        }
        Ok(EXIT_NUMERICAL)
    }
}

fn geometry(cli: &Cli, a: &GeometryArgs) -> Result<i32> {
    let (name, value) = match (a.r12, a.target_j) {
        (Some(r12), _) => (
            "J",
            ddi_from_geometry(&GeometryInput {
                gamma0: a.gamma0,
                omega_eg: a.omega_eg,
                r12,
                phi: a.phi,
                c: a.c,
            })?,
        ),
        (None, Some(j)) => ("r12", separation_from_ddi(j, a.gamma0, a.omega_eg, a.c)?),
        (None, None) => return Err(Error::Argument("give --r12 or --target-J".into())),
    };
    let text = match cli.format {
        Format::Json => json_text(&json!({ name: value }))?,
        Format::Csv => format!("{name}\n{value:.16e}\n"),
    };
    emit(cli, &text)?;
    Ok(EXIT_OK)
}
