//! Parameter sweeps and their tabular form.

use std::fmt::Write as _;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpa::uniform_grid;
use crate::error::{Error, Result};
use crate::model::{DetuningAxis, DriveConfig, SystemParams};
use crate::steady_state::observables;

/// Environment variable that caps the sweep worker pool.
pub const THREADS_ENV: &str = "TAVIS_CPA_THREADS";

pub const CSV_HEADER: &str = "x,out_l,out_r,cavity,atoms";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    Detuning,
    Phase,
    Ddi,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveMode {
    #[default]
    TwoInputEqual,
    SingleInputLeft,
    SingleInputRight,
}

impl DriveMode {
    /// Reshapes `drive` to the mode, keeping its largest amplitude.
    pub fn apply(&self, drive: &DriveConfig) -> DriveConfig {
        let amp = drive.amp_l.max(drive.amp_r);
        match self {
            DriveMode::TwoInputEqual => DriveConfig {
                amp_l: amp,
                amp_r: amp,
                ..*drive
            },
            DriveMode::SingleInputLeft => DriveConfig {
                amp_l: amp,
                amp_r: 0.0,
                ..*drive
            },
            DriveMode::SingleInputRight => DriveConfig {
                amp_l: 0.0,
                amp_r: amp,
                ..*drive
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub mode: DriveMode,
    /// Detuning sweeps only: keep the emitter-cavity offset of the base
    /// parameters instead of forcing both detunings to the grid value.
    #[serde(default)]
    pub coupling_lock: bool,
    /// With `coupling_lock`, which detuning the grid value labels.
    #[serde(default)]
    pub axis: DetuningAxis,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, start: f64, stop: f64, points: usize) -> Self {
        Self {
            variable,
            start,
            stop,
            points,
            mode: DriveMode::TwoInputEqual,
            coupling_lock: false,
            axis: DetuningAxis::Cavity,
        }
    }

    pub fn with_mode(self, mode: DriveMode) -> Self {
        Self { mode, ..self }
    }

    /// Locked detuning sweep labelled by `axis`.
    pub fn locked(self, axis: DetuningAxis) -> Self {
        Self {
            coupling_lock: true,
            axis,
            ..self
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Argument("sweep bounds must be finite".into()));
        }
        if !(self.start < self.stop) {
            return Err(Error::Argument(format!(
                "sweep start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.points < 2 {
            return Err(Error::Argument(format!("sweep needs >= 2 points, got {}", self.points)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.start, self.stop, self.points)
    }

    fn require(&self, variable: SweepVariable) -> Result<()> {
        self.check()?;
        if self.variable != variable {
            return Err(Error::Argument(format!(
                "sweep variable is {:?}, expected {:?}",
                self.variable, variable
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub out_l: f64,
    pub out_r: f64,
    pub cavity: f64,
    pub atoms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub spec: SweepSpec,
    pub params: SystemParams,
    pub rows: Vec<SweepRow>,
    /// Phase sweeps: largest |out_l(ΔΦ) − out_r(−ΔΦ)| over the grid.
    pub max_channel_mismatch: Option<f64>,
}

fn pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let n = std::env::var(THREADS_ENV).ok()?.trim().parse::<usize>().ok()?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()
    })
    .as_ref()
}

/// Evaluates `f` on every grid point, in parallel, preserving order.
fn evaluate<F>(grid: &[f64], f: F) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<SweepRow> + Sync + Send,
{
    let run = || grid.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>();
    match pool() {
        Some(p) => p.install(run),
        None => run(),
    }
}

fn row(x: f64, params: &SystemParams, drive: &DriveConfig) -> Result<SweepRow> {
    let o = observables(params, drive)?;
    Ok(SweepRow {
        x,
        out_l: o.out_l,
        out_r: o.out_r,
        cavity: o.cavity,
        atoms: o.atoms,
    })
}

/// Laser-frequency scan. Unlocked, both detunings equal the grid value;
/// locked, all offsets of `params` are kept and `spec.axis` labels the grid.
pub fn sweep_detuning(params: &SystemParams, drive: &DriveConfig, spec: &SweepSpec) -> Result<SweepTable> {
    spec.require(SweepVariable::Detuning)?;
    params.check()?;
    let drive = spec.mode.apply(drive);
    let rows = evaluate(&spec.grid(), |x| {
        let p = if spec.coupling_lock {
            params.at_detuning(x, spec.axis)
        } else {
            params.on_resonance(x)
        };
        row(x, &p, &drive)
    })?;
    Ok(SweepTable {
        spec: *spec,
        params: *params,
        rows,
        max_channel_mismatch: None,
    })
}

/// Relative-phase scan at equal amplitudes; the grid value is φ_l − φ_r.
pub fn sweep_phase(params: &SystemParams, drive: &DriveConfig, spec: &SweepSpec) -> Result<SweepTable> {
    spec.require(SweepVariable::Phase)?;
    params.check()?;
    if drive.amp_l != drive.amp_r {
        return Err(Error::Precondition(format!(
            "phase sweep needs equal amplitudes, got {} and {}",
            drive.amp_l, drive.amp_r
        )));
    }
    let limit = 2.0 * std::f64::consts::PI;
    if spec.start < -limit || spec.stop > limit {
        return Err(Error::Argument("phase sweep range must lie within [-2π, 2π]".into()));
    }
    let amp = drive.amp_l;
    let at = |dphi: f64| row(dphi, params, &DriveConfig::with_relative_phase(amp, dphi));
    let rows = evaluate(&spec.grid(), at)?;
    // Reflection partner of each row: out_l(ΔΦ) against out_r(−ΔΦ).
    let mut mismatch = 0.0f64;
    for r in &rows {
        let mirror = at(-r.x)?;
        mismatch = mismatch.max((r.out_l - mirror.out_r).abs());
    }
    Ok(SweepTable {
        spec: *spec,
        params: *params,
        rows,
        max_channel_mismatch: Some(mismatch),
    })
}

/// DDI scan at the detunings of `params`.
pub fn sweep_ddi(params: &SystemParams, drive: &DriveConfig, spec: &SweepSpec) -> Result<SweepTable> {
    spec.require(SweepVariable::Ddi)?;
    params.check()?;
    let drive = spec.mode.apply(drive);
    let rows = evaluate(&spec.grid(), |j| row(j, &params.with_j(j), &drive))?;
    Ok(SweepTable {
        spec: *spec,
        params: *params,
        rows,
        max_channel_mismatch: None,
    })
}

/// Dispatches on `spec.variable`.
pub fn run_sweep(params: &SystemParams, drive: &DriveConfig, spec: &SweepSpec) -> Result<SweepTable> {
    match spec.variable {
        SweepVariable::Detuning => sweep_detuning(params, drive, spec),
        SweepVariable::Phase => sweep_phase(params, drive, spec),
        SweepVariable::Ddi => sweep_ddi(params, drive, spec),
    }
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Grid value of the smallest left output.
    pub fn argmin_out_l(&self) -> Option<&SweepRow> {
        self.rows.iter().min_by(|a, b| a.out_l.total_cmp(&b.out_l))
    }
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::with_capacity(96 * (rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.x, r.out_l, r.out_r, r.cavity, r.atoms
        );
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => return Err(Error::Parse(format!("unexpected header {h:?}"))),
        None => return Err(Error::Parse("empty table".into())),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let v = line
                .split(',')
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 2)))?;
            if v.len() != 5 {
                return Err(Error::Parse(format!("line {}: expected 5 fields, got {}", i + 2, v.len())));
            }
            Ok(SweepRow {
                x: v[0],
                out_l: v[1],
                out_r: v[2],
                cavity: v[3],
                atoms: v[4],
            })
        })
        .collect()
}
