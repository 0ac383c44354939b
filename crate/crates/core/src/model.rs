//! Parameter model for two emitters in a driven two-sided cavity.
//!
//! Every rate and detuning in [`SystemParams`] is dimensionless, measured in
//! units of a common reference decay rate. Energies are angular frequencies
//! (ħ = 1) in the frame rotating at the laser frequency, so
//! `delta_c = ω_c − ω_l` and `delta_eg_j = ω_eg,j − ω_l`.
//! [`GeometryInput`] is the only type that carries physical units.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates and detunings of the two-emitter cavity model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub kappa_l: f64,
    pub kappa_r: f64,
    pub g1: Complex64,
    pub g2: Complex64,
    /// Dipole-dipole exchange strength, symmetric between the emitters.
    #[serde(rename = "J")]
    pub j: f64,
    pub delta_c: f64,
    pub delta_eg1: f64,
    pub delta_eg2: f64,
}

impl Default for SystemParams {
    /// Strong-coupling reference set: γ = κ = 1, g = 10, no DDI, all on resonance.
    fn default() -> Self {
        Self::symmetric(10.0, 1.0, 1.0, 0.0, 0.0, 0.0)
    }
}

impl SystemParams {
    /// Identical emitters with real coupling `g` in a symmetric cavity.
    pub fn symmetric(g: f64, gamma: f64, kappa: f64, j: f64, delta_c: f64, delta_eg: f64) -> Self {
        Self {
            gamma1: gamma,
            gamma2: gamma,
            kappa_l: kappa,
            kappa_r: kappa,
            g1: Complex64::new(g, 0.0),
            g2: Complex64::new(g, 0.0),
            j,
            delta_c,
            delta_eg1: delta_eg,
            delta_eg2: delta_eg,
        }
    }

    /// A single emitter: the second one is decoupled from both cavity and partner.
    pub fn single_emitter(g: f64, gamma: f64, kappa: f64, delta_c: f64, delta_eg: f64) -> Self {
        Self {
            g2: Complex64::new(0.0, 0.0),
            j: 0.0,
            ..Self::symmetric(g, gamma, kappa, 0.0, delta_c, delta_eg)
        }
    }

    pub fn with_j(self, j: f64) -> Self {
        Self { j, ..self }
    }

    /// Sets the cavity and both emitter detunings to `delta` (ω_eg = ω_c).
    pub fn on_resonance(self, delta: f64) -> Self {
        Self {
            delta_c: delta,
            delta_eg1: delta,
            delta_eg2: delta,
            ..self
        }
    }

    /// Atom-cavity detuning Δ_eg − Δ_c, defined only when the emitters share a detuning.
    pub fn delta_ac(&self) -> Option<f64> {
        (self.delta_eg1 == self.delta_eg2).then_some(self.delta_eg1 - self.delta_c)
    }

    pub fn kappa_total(&self) -> f64 {
        self.kappa_l + self.kappa_r
    }

    pub fn has_identical_emitters(&self) -> bool {
        self.gamma1 == self.gamma2 && self.g1 == self.g2 && self.delta_eg1 == self.delta_eg2
    }

    pub fn has_symmetric_cavity(&self) -> bool {
        self.kappa_l == self.kappa_r
    }

    /// Shifts the laser frequency so the chosen axis detuning equals `delta`.
    ///
    /// All detunings move together, so every emitter-cavity offset is preserved.
    pub fn at_detuning(&self, delta: f64, axis: DetuningAxis) -> Self {
        let shift = match axis {
            DetuningAxis::Cavity => delta - self.delta_c,
            DetuningAxis::Emitter => delta - self.delta_eg1,
        };
        Self {
            delta_c: self.delta_c + shift,
            delta_eg1: self.delta_eg1 + shift,
            delta_eg2: self.delta_eg2 + shift,
            ..*self
        }
    }

    /// Checks every invariant and returns the diagnostics, or `Ok` when all hold.
    pub fn check(&self) -> Result<()> {
        let diags = validate(self);
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(diags))
        }
    }

    /// Symmetric-regime precondition shared by the analytic formulas:
    /// identical emitters, real coupling, symmetric cavity.
    pub(crate) fn require_symmetric_real(&self, what: &str) -> Result<f64> {
        if self.gamma1 != self.gamma2 {
            return Err(Error::Precondition(format!("{what}: gamma1 != gamma2")));
        }
        if self.kappa_l != self.kappa_r {
            return Err(Error::Precondition(format!("{what}: kappa_l != kappa_r")));
        }
        if self.g1 != self.g2 {
            return Err(Error::Precondition(format!("{what}: g1 != g2")));
        }
        if self.g1.im != 0.0 {
            return Err(Error::Precondition(format!("{what}: g1 is not real")));
        }
        if self.delta_eg1 != self.delta_eg2 {
            return Err(Error::Precondition(format!("{what}: delta_eg1 != delta_eg2")));
        }
        Ok(self.g1.re)
    }
}

/// Which detuning labels the horizontal axis of a laser-frequency scan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetuningAxis {
    /// Δ = ω_c − ω_l.
    #[default]
    Cavity,
    /// Δ = ω_eg − ω_l.
    Emitter,
}

/// A violated invariant of [`SystemParams`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Diagnostic {
    NonFinite { field: &'static str },
    NegativeDecayRate { field: &'static str, value: f64 },
    ZeroEmitterDecay { field: &'static str },
    NoOutputChannel,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::NonFinite { field } => write!(f, "non-finite value in {field}"),
            Diagnostic::NegativeDecayRate { field, value } => {
                write!(f, "negative decay rate: {field} = {value}")
            }
            Diagnostic::ZeroEmitterDecay { field } => {
                write!(f, "emitter decay rate {field} must be positive")
            }
            Diagnostic::NoOutputChannel => {
                write!(f, "no output channel: kappa_l + kappa_r must be positive")
            }
        }
    }
}

/// Lists every violated invariant; an empty list means the parameters are usable.
pub fn validate(params: &SystemParams) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let reals = [
        ("gamma1", params.gamma1),
        ("gamma2", params.gamma2),
        ("kappa_l", params.kappa_l),
        ("kappa_r", params.kappa_r),
        ("g1", params.g1.re),
        ("g1", params.g1.im),
        ("g2", params.g2.re),
        ("g2", params.g2.im),
        ("J", params.j),
        ("delta_c", params.delta_c),
        ("delta_eg1", params.delta_eg1),
        ("delta_eg2", params.delta_eg2),
    ];
    for (field, value) in reals {
        if !value.is_finite() && !diags.contains(&Diagnostic::NonFinite { field }) {
            diags.push(Diagnostic::NonFinite { field });
        }
    }

    for (field, value) in [
        ("gamma1", params.gamma1),
        ("gamma2", params.gamma2),
        ("kappa_l", params.kappa_l),
        ("kappa_r", params.kappa_r),
    ] {
        if value < 0.0 {
            diags.push(Diagnostic::NegativeDecayRate { field, value });
        }
    }
    for (field, value) in [("gamma1", params.gamma1), ("gamma2", params.gamma2)] {
        if value == 0.0 {
            diags.push(Diagnostic::ZeroEmitterDecay { field });
        }
    }
    if params.kappa_l.max(0.0) + params.kappa_r.max(0.0) <= 0.0 {
        diags.push(Diagnostic::NoOutputChannel);
    }
    diags
}

/// Cooperativity g²/(2κγ) for identical emitters in a symmetric cavity.
pub fn cooperativity(params: &SystemParams) -> Result<f64> {
    let g = params.require_symmetric_real("cooperativity")?;
    params.check()?;
    Ok(g * g / (2.0 * params.kappa_l * params.gamma1))
}

/// Geometry of the emitter pair in physical units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryInput {
    /// Free-space decay rate Γ₀.
    pub gamma0: f64,
    /// Transition angular frequency ω_eg.
    pub omega_eg: f64,
    /// Inter-emitter separation.
    pub r12: f64,
    /// Angle between dipole moment and inter-emitter axis, in [0, π].
    pub phi: f64,
    /// Speed of light in the same length/time units.
    pub c: f64,
}

impl GeometryInput {
    fn check(&self) -> Result<()> {
        let fields = [
            ("gamma0", self.gamma0),
            ("omega_eg", self.omega_eg),
            ("r12", self.r12),
            ("phi", self.phi),
            ("c", self.c),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!("{name} is not finite")));
        }
        if self.r12 == 0.0 {
            return Err(Error::Domain("r12 = 0 is a singular separation".into()));
        }
        if self.r12 < 0.0 {
            return Err(Error::Domain("r12 must be positive".into()));
        }
        if self.gamma0 <= 0.0 || self.omega_eg <= 0.0 || self.c <= 0.0 {
            return Err(Error::Domain("gamma0, omega_eg and c must be positive".into()));
        }
        if !(0.0..=PI).contains(&self.phi) {
            return Err(Error::Domain(format!("phi = {} outside [0, pi]", self.phi)));
        }
        Ok(())
    }
}

fn ddi_prefactor(gamma0: f64, omega_eg: f64, c: f64) -> f64 {
    3.0 * gamma0 * c.powi(3) / (4.0 * omega_eg.powi(3))
}

/// Dipole-dipole strength J = 3Γ₀c³/(4ω³r³)·(1 − 3cos²φ).
pub fn ddi_from_geometry(geom: &GeometryInput) -> Result<f64> {
    geom.check()?;
    let angular = 1.0 - 3.0 * geom.phi.cos().powi(2);
    Ok(ddi_prefactor(geom.gamma0, geom.omega_eg, geom.c) / geom.r12.powi(3) * angular)
}

/// Separation that produces DDI strength `j` for dipoles perpendicular to the axis.
pub fn separation_from_ddi(j: f64, gamma0: f64, omega_eg: f64, c: f64) -> Result<f64> {
    if !(j.is_finite() && j > 0.0) {
        return Err(Error::Domain(format!(
            "J = {j}: perpendicular dipoles only produce a positive coupling"
        )));
    }
    if !(gamma0 > 0.0 && omega_eg > 0.0 && c > 0.0) {
        return Err(Error::Domain("gamma0, omega_eg and c must be positive".into()));
    }
    Ok((ddi_prefactor(gamma0, omega_eg, c) / j).cbrt())
}

/// Amplitudes and phases of the two coherent inputs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    pub amp_l: f64,
    pub amp_r: f64,
    pub phase_l: f64,
    pub phase_r: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self::equal(1.0)
    }
}

impl DriveConfig {
    /// Builds a drive, rejecting negative or non-finite amplitudes and
    /// reducing both phases to (−π, π].
    pub fn new(amp_l: f64, amp_r: f64, phase_l: f64, phase_r: f64) -> Result<Self> {
        for (name, v) in [("amp_l", amp_l), ("amp_r", amp_r)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Argument(format!("{name} = {v} must be finite and >= 0")));
            }
        }
        for (name, v) in [("phase_l", phase_l), ("phase_r", phase_r)] {
            if !v.is_finite() {
                return Err(Error::Argument(format!("{name} is not finite")));
            }
        }
        Ok(Self {
            amp_l,
            amp_r,
            phase_l: reduce_phase(phase_l),
            phase_r: reduce_phase(phase_r),
        })
    }

    /// Equal in-phase inputs on both mirrors.
    pub fn equal(amp: f64) -> Self {
        Self {
            amp_l: amp,
            amp_r: amp,
            phase_l: 0.0,
            phase_r: 0.0,
        }
    }

    pub fn left_only(amp: f64) -> Self {
        Self {
            amp_r: 0.0,
            ..Self::equal(amp)
        }
    }

    pub fn right_only(amp: f64) -> Self {
        Self {
            amp_l: 0.0,
            ..Self::equal(amp)
        }
    }

    /// Equal amplitudes with φ_l − φ_r = `dphi` (φ_r = 0).
    pub fn with_relative_phase(amp: f64, dphi: f64) -> Self {
        Self {
            phase_l: reduce_phase(dphi),
            ..Self::equal(amp)
        }
    }

    pub fn a_in_l(&self) -> Complex64 {
        self.amp_l * unit_phasor(self.phase_l)
    }

    pub fn a_in_r(&self) -> Complex64 {
        self.amp_r * unit_phasor(self.phase_r)
    }

    pub fn relative_phase(&self) -> f64 {
        reduce_phase(self.phase_l - self.phase_r)
    }

    /// Multiplies both complex input amplitudes by `lambda`.
    pub fn scaled(&self, lambda: Complex64) -> Self {
        let (l, r) = (self.a_in_l() * lambda, self.a_in_r() * lambda);
        Self {
            amp_l: l.norm(),
            amp_r: r.norm(),
            phase_l: if l.norm() > 0.0 { l.arg() } else { self.phase_l },
            phase_r: if r.norm() > 0.0 { r.arg() } else { self.phase_r },
        }
    }

    /// Left and right inputs exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            amp_l: self.amp_r,
            amp_r: self.amp_l,
            phase_l: self.phase_r,
            phase_r: self.phase_l,
        }
    }
}

/// Reduces an angle to (−π, π].
pub fn reduce_phase(theta: f64) -> f64 {
    let r = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        PI
    } else {
        r
    }
}

/// e^{iθ}, exact at the quarter turns so opposed inputs cancel to zero.
fn unit_phasor(theta: f64) -> Complex64 {
    if theta == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if theta == PI || theta == -PI {
        Complex64::new(-1.0, 0.0)
    } else if theta == PI / 2.0 {
        Complex64::new(0.0, 1.0)
    } else if theta == -PI / 2.0 {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::from_polar(1.0, theta)
    }
}
