//! Parameter files.
//!
//! A parameter file is a JSON object holding any subset of the
//! [`SystemParams`] and [`DriveConfig`] fields. The shorthands `g`, `gamma`,
//! `kappa`, `delta_eg` and `amp` set both members of a pair. Couplings are a
//! number or a `[re, im]` pair. Omitted fields keep the defaults. An optional `sweep` object carries a [`SweepSpec`].
//!
//! ```json
//! { "g": 10, "gamma": 1, "kappa": 1, "J": 15,
//!   "sweep": { "variable": "detuning", "start": -30, "stop": 30, "points": 601 } }
//! ```

use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{DriveConfig, SystemParams};
use crate::sweep::SweepSpec;

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum Coupling {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Coupling> for Complex64 {
    fn from(c: Coupling) -> Self {
        match c {
            Coupling::Real(re) => Complex64::new(re, 0.0),
            Coupling::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    g: Option<Coupling>,
    g1: Option<Coupling>,
    g2: Option<Coupling>,
    gamma: Option<f64>,
    gamma1: Option<f64>,
    gamma2: Option<f64>,
    kappa: Option<f64>,
    kappa_l: Option<f64>,
    kappa_r: Option<f64>,
    #[serde(rename = "J")]
    j: Option<f64>,
    delta_c: Option<f64>,
    delta_eg: Option<f64>,
    delta_eg1: Option<f64>,
    delta_eg2: Option<f64>,
    amp: Option<f64>,
    amp_l: Option<f64>,
    amp_r: Option<f64>,
    phase_l: Option<f64>,
    phase_r: Option<f64>,
    sweep: Option<SweepSpec>,
}

/// Contents of a parameter file with defaults filled in.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamFile {
    pub params: SystemParams,
    pub drive: DriveConfig,
    pub sweep: Option<SweepSpec>,
}

fn pick<T: Copy>(specific: Option<T>, shared: Option<T>, default: T) -> T {
    specific.or(shared).unwrap_or(default)
}

pub fn parse_params(text: &str) -> Result<ParamFile> {
    let raw: RawFile = serde_json::from_str(text)?;
    let d = SystemParams::default();
    let g = raw.g.map(Complex64::from);
    let params = SystemParams {
        gamma1: pick(raw.gamma1, raw.gamma, d.gamma1),
        gamma2: pick(raw.gamma2, raw.gamma, d.gamma2),
        kappa_l: pick(raw.kappa_l, raw.kappa, d.kappa_l),
        kappa_r: pick(raw.kappa_r, raw.kappa, d.kappa_r),
        g1: pick(raw.g1.map(Complex64::from), g, d.g1),
        g2: pick(raw.g2.map(Complex64::from), g, d.g2),
        j: raw.j.unwrap_or(d.j),
        delta_c: raw.delta_c.unwrap_or(d.delta_c),
        delta_eg1: pick(raw.delta_eg1, raw.delta_eg, d.delta_eg1),
        delta_eg2: pick(raw.delta_eg2, raw.delta_eg, d.delta_eg2),
    };
    let dd = DriveConfig::default();
    let drive = DriveConfig::new(
        pick(raw.amp_l, raw.amp, dd.amp_l),
        pick(raw.amp_r, raw.amp, dd.amp_r),
        raw.phase_l.unwrap_or(dd.phase_l),
        raw.phase_r.unwrap_or(dd.phase_r),
    )?;
    Ok(ParamFile {
        params,
        drive,
        sweep: raw.sweep,
    })
}

pub fn read_params(path: &Path) -> Result<ParamFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    parse_params(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::SweepVariable;

    #[test]
    fn empty_object_gives_defaults() {
        assert_eq!(parse_params("{}").unwrap(), ParamFile::default());
    }

    #[test]
    fn shorthands_and_overrides() {
        let f = parse_params(r#"{"g": 10, "g2": [3, -4], "gamma": 2, "kappa_r": 0.5, "J": 15, "delta_eg": -1, "amp": 0.1}"#).unwrap();
        assert_eq!(f.params.g1, Complex64::new(10.0, 0.0));
        assert_eq!(f.params.g2, Complex64::new(3.0, -4.0));
        assert_eq!((f.params.gamma1, f.params.gamma2), (2.0, 2.0));
        assert_eq!((f.params.kappa_l, f.params.kappa_r), (1.0, 0.5));
        assert_eq!(f.params.j, 15.0);
        assert_eq!((f.params.delta_eg1, f.params.delta_eg2), (-1.0, -1.0));
        assert_eq!((f.drive.amp_l, f.drive.amp_r), (0.1, 0.1));
    }

    #[test]
    fn sweep_section() {
        let f = parse_params(r#"{"sweep": {"variable": "detuning", "start": -50, "stop": 10, "points": 11, "mode": "single-input-left", "coupling_lock": true, "axis": "emitter"}}"#).unwrap();
        let s = f.sweep.unwrap();
        assert_eq!(s.variable, SweepVariable::Detuning);
        assert!(s.coupling_lock);
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(matches!(parse_params(r#"{"gama": 1}"#), Err(Error::Json(_))));
        assert!(parse_params(r#"{"amp_l": -1}"#).is_err());
    }
}
