//! Mean-field equations of motion with dynamical population inversion.
//!
//! ```text
//! da/dt   = −(iΔ_c + (κ_l+κ_r)/2) a − i(g₁* σ₁ + g₂* σ₂) − √κ_l a_in,l − √κ_r a_in,r
//! dσ_j/dt = −(iΔ_j + γ_j) σ_j + i g_j s_j a + iJ s_j σ_k
//! ds_j/dt = −2γ_j (s_j + 1) − 2i(g_j a σ_j* − g_j* σ_j a*) − 2iJ(σ_j* σ_k − σ_k* σ_j)
//! ```
//!
//! Holding `s_j = −1` recovers the linear system solved in
//! [`crate::steady_state`]; integrating it in time checks that reduction.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DriveConfig, SystemParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Slack allowed on Bloch-sphere bounds before a sample is flagged.
pub const BLOCH_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub a: Complex64,
    pub sigma1: Complex64,
    pub sigma2: Complex64,
    pub sz1: f64,
    pub sz2: f64,
    pub t: f64,
}

impl MeanFieldState {
    pub fn ground() -> Self {
        Self {
            a: Complex64::default(),
            sigma1: Complex64::default(),
            sigma2: Complex64::default(),
            sz1: -1.0,
            sz2: -1.0,
            t: 0.0,
        }
    }

    fn to_vec(self) -> [f64; DIM] {
        [
            self.a.re,
            self.a.im,
            self.sigma1.re,
            self.sigma1.im,
            self.sigma2.re,
            self.sigma2.im,
            self.sz1,
            self.sz2,
        ]
    }

    fn from_vec(y: &[f64; DIM], t: f64) -> Self {
        Self {
            a: Complex64::new(y[0], y[1]),
            sigma1: Complex64::new(y[2], y[3]),
            sigma2: Complex64::new(y[4], y[5]),
            sz1: y[6],
            sz2: y[7],
            t,
        }
    }

    /// Largest |s_j + 1|.
    pub fn inversion_deviation(&self) -> f64 {
        (self.sz1 + 1.0).abs().max((self.sz2 + 1.0).abs())
    }

    /// True when both emitters lie inside the Bloch sphere, 4|σ|² + s² ≤ 1.
    pub fn within_bloch(&self) -> bool {
        [(self.sigma1, self.sz1), (self.sigma2, self.sz2)]
            .iter()
            .all(|(s, z)| 4.0 * s.norm_sqr() + z * z <= 1.0 + BLOCH_SLACK && z.abs() <= 1.0 + BLOCH_SLACK)
    }
}

impl Default for MeanFieldState {
    fn default() -> Self {
        Self::ground()
    }
}

/// Time derivatives. Inversion rates are returned complex so that their
/// imaginary residue can be inspected; it vanishes identically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanFieldRates {
    pub a: Complex64,
    pub sigma1: Complex64,
    pub sigma2: Complex64,
    pub sz1: Complex64,
    pub sz2: Complex64,
}

pub fn mean_field_derivatives(state: &MeanFieldState, params: &SystemParams, drive: &DriveConfig) -> MeanFieldRates {
    let p = params;
    let MeanFieldState {
        a,
        sigma1: s1,
        sigma2: s2,
        sz1: z1,
        sz2: z2,
        ..
    } = *state;
    let half_kappa = 0.5 * (p.kappa_l + p.kappa_r);
    let da = -(I * p.delta_c + half_kappa) * a
        - I * (p.g1.conj() * s1 + p.g2.conj() * s2)
        - p.kappa_l.sqrt() * drive.a_in_l()
        - p.kappa_r.sqrt() * drive.a_in_r();
    let ds1 = -(I * p.delta_eg1 + p.gamma1) * s1 + I * p.g1 * z1 * a + I * p.j * z1 * s2;
    let ds2 = -(I * p.delta_eg2 + p.gamma2) * s2 + I * p.g2 * z2 * a + I * p.j * z2 * s1;
    let exchange = s1.conj() * s2 - s2.conj() * s1;
    let dz1 = -2.0 * p.gamma1 * (z1 + 1.0)
        - 2.0 * I * (p.g1 * a * s1.conj() - p.g1.conj() * s1 * a.conj())
        - 2.0 * I * p.j * exchange;
    let dz2 = -2.0 * p.gamma2 * (z2 + 1.0)
        - 2.0 * I * (p.g2 * a * s2.conj() - p.g2.conj() * s2 * a.conj())
        + 2.0 * I * p.j * exchange;
    MeanFieldRates {
        a: da,
        sigma1: ds1,
        sigma2: ds2,
        sz1: dz1,
        sz2: dz2,
    }
}

const DIM: usize = 8;

fn rhs(params: &SystemParams, drive: &DriveConfig, y: &[f64; DIM]) -> [f64; DIM] {
    let r = mean_field_derivatives(&MeanFieldState::from_vec(y, 0.0), params, drive);
    [
        r.a.re, r.a.im, r.sigma1.re, r.sigma1.im, r.sigma2.re, r.sigma2.im, r.sz1.re, r.sz2.re,
    ]
}

// Dormand-Prince 5(4) tableau; the system is autonomous so the nodes are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Largest step, in units of the inverse spectral bound.
const MAX_STEP_FACTOR: f64 = 1.0;

/// Adaptive Dormand-Prince stepper over the mean-field vector field.
struct Stepper<'a> {
    params: &'a SystemParams,
    drive: &'a DriveConfig,
    rel_tol: f64,
    abs_tol: f64,
    t: f64,
    y: [f64; DIM],
    k1: [f64; DIM],
    h: f64,
    h_max: f64,
    accepted: usize,
    rejected: usize,
}

fn combine(y: &[f64; DIM], h: f64, terms: &[(f64, &[f64; DIM])]) -> [f64; DIM] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..DIM {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl<'a> Stepper<'a> {
    fn new(params: &'a SystemParams, drive: &'a DriveConfig, rel_tol: f64, abs_tol: f64, initial: &MeanFieldState) -> Self {
        let y = initial.to_vec();
        let k1 = rhs(params, drive, &y);
        // Gershgorin bound on the linearized spectrum
        let rho = [params.delta_c, params.delta_eg1, params.delta_eg2]
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()))
            + params.g1.norm()
            + params.g2.norm()
            + params.j.abs()
            + (0.5 * params.kappa_total()).max(2.0 * params.gamma1.max(params.gamma2));
        let rho = rho.max(1e-3);
        Self {
            params,
            drive,
            rel_tol,
            abs_tol,
            t: initial.t,
            y,
            k1,
            h: 0.01 / rho,
            h_max: MAX_STEP_FACTOR / rho,
            accepted: 0,
            rejected: 0,
        }
    }

    fn state(&self) -> MeanFieldState {
        MeanFieldState::from_vec(&self.y, self.t)
    }

    fn fail(&self, reason: String) -> Error {
        Error::Integration {
            t: self.t,
            reason,
            last: Box::new(self.state()),
        }
    }

    /// Advances to exactly `t_target`.
    fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target {
            let remaining = t_target - self.t;
            if remaining <= 1e-14 * t_target.abs().max(1.0) {
                self.t = t_target;
                break;
            }
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            if h < 1e-14 * self.t.abs().max(1.0) {
                return Err(self.fail(format!("step size underflow (h = {h:e})")));
            }
            let (p, d) = (self.params, self.drive);
            let y = &self.y;
            let k1 = self.k1;
            let k2 = rhs(p, d, &combine(y, h, &[(A21, &k1)]));
            let k3 = rhs(p, d, &combine(y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(p, d, &combine(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(p, d, &combine(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = rhs(
                p,
                d,
                &combine(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combine(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = rhs(p, d, &y_new);
            let mut err = 0.0;
            for i in 0..DIM {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / DIM as f64).sqrt();
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                self.rejected += 1;
                self.h = 0.1 * h;
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                self.t = if last { t_target } else { self.t + h };
                self.y = y_new;
                self.k1 = k7;
                self.accepted += 1;
                if !last || factor < 1.0 {
                    self.h = (h * factor).min(self.h_max);
                }
            } else {
                self.rejected += 1;
                self.h = h * factor.min(1.0);
            }
        }
        Ok(())
    }
}

fn check_tolerances(rel_tol: f64, abs_tol: f64) -> Result<()> {
    for (name, v) in [("rel_tol", rel_tol), ("abs_tol", abs_tol)] {
        if !(1e-13..=1e-3).contains(&v) {
            return Err(Error::Argument(format!("{name} = {v:e} outside [1e-13, 1e-3]")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub samples: Vec<MeanFieldState>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest |s_j + 1| over the samples.
    pub max_inversion_deviation: f64,
    /// Samples that left the Bloch sphere by more than [`BLOCH_SLACK`].
    pub bloch_violations: usize,
}

impl Trajectory {
    pub fn last(&self) -> &MeanFieldState {
        self.samples.last().expect("trajectory holds at least the initial state")
    }

    /// True when the linear (weak-excitation) reduction is in doubt.
    pub fn weak_excitation_broken(&self, threshold: f64) -> bool {
        self.max_inversion_deviation > threshold
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,re_a,im_a,re_sigma1,im_sigma1,re_sigma2,im_sigma2,sz1,sz2")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t, s.a.re, s.a.im, s.sigma1.re, s.sigma1.im, s.sigma2.re, s.sigma2.im, s.sz1, s.sz2
            )?;
        }
        Ok(())
    }
}

/// Integrates from `initial` to `initial.t + t_end`, recording a sample
/// every `stride` time units (the final time is always recorded).
pub fn integrate(
    params: &SystemParams,
    drive: &DriveConfig,
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
    initial: &MeanFieldState,
    stride: f64,
) -> Result<Trajectory> {
    params.check()?;
    check_tolerances(rel_tol, abs_tol)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Argument(format!("t_end = {t_end} must be positive")));
    }
    if !(stride > 0.0 && stride.is_finite()) {
        return Err(Error::Argument(format!("stride = {stride} must be positive")));
    }
    let mut stepper = Stepper::new(params, drive, rel_tol, abs_tol, initial);
    let mut samples = vec![*initial];
    let t0 = initial.t;
    let n = (t_end / stride).ceil() as usize;
    for k in 1..=n {
        let t = if k == n { t0 + t_end } else { t0 + k as f64 * stride };
        stepper.advance_to(t)?;
        samples.push(stepper.state());
    }
    let max_inversion_deviation = samples.iter().map(|s| s.inversion_deviation()).fold(0.0, f64::max);
    let bloch_violations = samples.iter().filter(|s| !s.within_bloch()).count();
    Ok(Trajectory {
        samples,
        accepted_steps: stepper.accepted,
        rejected_steps: stepper.rejected,
        max_inversion_deviation,
        bloch_violations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RelaxationReport {
    #[serde(rename = "final")]
    pub final_state: MeanFieldState,
    pub converged: bool,
    pub residual_norm: f64,
    pub steps: usize,
}

fn scaled_residual(state: &MeanFieldState, params: &SystemParams, drive: &DriveConfig) -> f64 {
    let r = mean_field_derivatives(state, params, drive);
    let rate = (r.a.norm_sqr()
        + r.sigma1.norm_sqr()
        + r.sigma2.norm_sqr()
        + r.sz1.re * r.sz1.re
        + r.sz2.re * r.sz2.re)
        .sqrt();
    let size = (state.a.norm_sqr()
        + state.sigma1.norm_sqr()
        + state.sigma2.norm_sqr()
        + (state.sz1 + 1.0).powi(2)
        + (state.sz2 + 1.0).powi(2))
    .sqrt();
    rate / (size + 1.0)
}

/// Tolerances used by [`relax_to_steady`].
pub const RELAX_REL_TOL: f64 = 1e-11;
pub const RELAX_ABS_TOL: f64 = 1e-13;

/// Integrates from the ground state until the scaled derivative norm stays
/// below `tol` for a window of 5/γ_ref, or until 10³/min(γ, κ).
pub fn relax_to_steady(params: &SystemParams, drive: &DriveConfig, tol: f64) -> Result<RelaxationReport> {
    params.check()?;
    if !(tol >= 1e-10) {
        return Err(Error::Argument(format!("tol = {tol:e} below 1e-10")));
    }
    let slowest = params
        .gamma1
        .min(params.gamma2)
        .min(params.kappa_total());
    let t_max = 1e3 / slowest;
    let window = 5.0;
    let check_every = 0.25;

    let ground = MeanFieldState::ground();
    let mut stepper = Stepper::new(params, drive, RELAX_REL_TOL, RELAX_ABS_TOL, &ground);
    let mut quiet_since: Option<f64> = None;
    let mut residual = scaled_residual(&ground, params, drive);
    if residual <= tol {
        quiet_since = Some(0.0);
    }
    loop {
        let t_next = (stepper.t + check_every).min(t_max);
        stepper.advance_to(t_next)?;
        let state = stepper.state();
        residual = scaled_residual(&state, params, drive);
        if residual <= tol {
            let since = *quiet_since.get_or_insert(stepper.t);
            if stepper.t - since >= window {
                return Ok(RelaxationReport {
                    final_state: state,
                    converged: true,
                    residual_norm: residual,
                    steps: stepper.accepted,
                });
            }
        } else {
            quiet_since = None;
        }
        if stepper.t >= t_max {
            return Ok(RelaxationReport {
                final_state: state,
                converged: false,
                residual_norm: residual,
                steps: stepper.accepted,
            });
        }
    }
}
