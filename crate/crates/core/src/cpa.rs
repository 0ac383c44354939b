//! Coherent perfect absorption: conditions, analytic detunings, single-port
//! scattering and numerical absorption minima.
//!
//! For identical emitters with real coupling `g` in a symmetric cavity, both
//! outputs vanish under equal inputs iff
//!
//! ```text
//! r1 = κ(γ² + J² − Δ_eg²) + 2Δ_cΔ_egγ − 2g²γ            = 0
//! r2 = 2κγΔ_eg − Δ_c(γ² + J² − Δ_eg²) − 2g²(Δ_eg − J)    = 0
//! ```
//!
//! The real solutions are Δ_eg = −J ± √(2g²γ/κ − γ²), Δ_c = ±√(2g²κ/γ − κ²)
//! with matching signs. The remaining pair of roots of the quartic system is
//! complex and is not returned.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DetuningAxis, DriveConfig, SystemParams};
use crate::optimize::golden_section;
use crate::steady_state::{observables, solve_steady_state};

/// Refined minima closer than this (in γ_ref) are reported once.
pub const MERGE_TOLERANCE: f64 = 1e-6;
/// Golden-section bracket width at which refinement stops.
pub const REFINE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CpaResidual {
    pub r1: f64,
    pub r2: f64,
}

impl CpaResidual {
    pub fn max_abs(&self) -> f64 {
        self.r1.abs().max(self.r2.abs())
    }
}

/// Sign pattern of Δ_ac = −J ± √(…) ∓ √(…).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// Δ_eg and Δ_c above the −J / 0 reference: label (+,−).
    Upper,
    /// Label (−,+).
    Lower,
}

impl Branch {
    pub fn label(&self) -> &'static str {
        match self {
            Branch::Upper => "(+,-)",
            Branch::Lower => "(-,+)",
        }
    }

    fn sign(&self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CpaSolution {
    pub delta_eg: f64,
    pub delta_c: f64,
    pub delta_ac: f64,
    pub branch: Branch,
}

impl CpaSolution {
    /// Parameters realizing this solution for the given couplings and rates.
    pub fn params(&self, g: f64, gamma: f64, kappa: f64, j: f64) -> SystemParams {
        SystemParams::symmetric(g, gamma, kappa, j, self.delta_c, self.delta_eg)
    }
}

/// Evaluates both CPA residuals; zero residuals mean equal inputs are fully absorbed.
pub fn cpa_residuals(params: &SystemParams) -> Result<CpaResidual> {
    let g = params.require_symmetric_real("cpa_residuals")?;
    let kappa = params.kappa_l;
    let gamma = params.gamma1;
    let j = params.j;
    let de = params.delta_eg1;
    let dc = params.delta_c;
    let bracket = gamma * gamma + j * j - de * de;
    Ok(CpaResidual {
        r1: kappa * bracket + 2.0 * dc * de * gamma - 2.0 * g * g * gamma,
        r2: 2.0 * kappa * gamma * de - dc * bracket - 2.0 * g * g * (de - j),
    })
}

/// Real detuning pairs satisfying both CPA conditions (0, 1 or 2 of them).
pub fn cpa_detuning_solutions(g: f64, gamma: f64, kappa: f64, j: f64) -> Vec<CpaSolution> {
    let emitter_radicand = 2.0 * g * g * gamma / kappa - gamma * gamma;
    let cavity_radicand = 2.0 * g * g * kappa / gamma - kappa * kappa;
    if !(emitter_radicand >= 0.0 && cavity_radicand >= 0.0) {
        return Vec::new();
    }
    let (re, rc) = (emitter_radicand.sqrt(), cavity_radicand.sqrt());
    let branches: &[Branch] = if re == 0.0 && rc == 0.0 {
        &[Branch::Upper]
    } else {
        &[Branch::Upper, Branch::Lower]
    };
    branches
        .iter()
        .map(|&branch| {
            let s = branch.sign();
            let delta_eg = -j + s * re;
            let delta_c = s * rc;
            CpaSolution {
                delta_eg,
                delta_c,
                delta_ac: delta_eg - delta_c,
                branch,
            }
        })
        .collect()
}

/// Which mirror carries the single input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Port {
    Left,
    Right,
}

/// Reflection and transmission amplitudes for a unit input on one port.
///
/// For `Port::Left` returns (a_out,l, a_out,r)/a_in,l; for `Port::Right`
/// returns (a_out,r, a_out,l)/a_in,r.
pub fn single_input_scattering(params: &SystemParams, port: Port) -> Result<(Complex64, Complex64)> {
    if !params.has_symmetric_cavity() {
        return Err(Error::Precondition(
            "single_input_scattering: kappa_l != kappa_r".into(),
        ));
    }
    match port {
        Port::Left => {
            let s = solve_steady_state(params, &DriveConfig::left_only(1.0))?;
            Ok((s.a_out_l, s.a_out_r))
        }
        Port::Right => {
            let s = solve_steady_state(params, &DriveConfig::right_only(1.0))?;
            Ok((s.a_out_r, s.a_out_l))
        }
    }
}

/// A local minimum of the normalized left output along a detuning scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AbsorptionMinimum {
    pub delta: f64,
    pub depth: f64,
    /// Two grid minima refined onto the same point.
    pub merged: bool,
}

/// Scans the left output intensity over `range` on `n_grid` uniform points and
/// refines each interior local minimum by golden-section search.
///
/// The laser frequency is swept with every emitter-cavity offset of `params`
/// held fixed; `axis` selects which detuning the returned `delta` refers to.
pub fn find_absorption_minima(
    params: &SystemParams,
    drive: &DriveConfig,
    range: (f64, f64),
    n_grid: usize,
    axis: DetuningAxis,
) -> Result<Vec<AbsorptionMinimum>> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Argument("detuning range must be finite".into()));
    }
    if !(lo < hi) {
        return Err(Error::Argument(format!("empty detuning range [{lo}, {hi}]")));
    }
    if n_grid < 64 {
        return Err(Error::Argument(format!("n_grid = {n_grid} < 64")));
    }
    if drive.a_in_l() != drive.a_in_r() {
        return Err(Error::Precondition(
            "find_absorption_minima: inputs must be equal".into(),
        ));
    }
    params.check()?;

    let out = |x: f64| -> Result<f64> { Ok(observables(&params.at_detuning(x, axis), drive)?.out_l) };
    let grid = uniform_grid(lo, hi, n_grid);
    let values = grid.par_iter().map(|&x| out(x)).collect::<Result<Vec<f64>>>()?;

    let mut minima: Vec<AbsorptionMinimum> = Vec::new();
    for i in 1..n_grid - 1 {
        if values[i] < values[i - 1] && values[i] <= values[i + 1] {
            let f = |x: f64| out(x).unwrap_or(f64::INFINITY);
            let (delta, depth) = golden_section(f, grid[i - 1], grid[i + 1], REFINE_TOLERANCE, 200);
            match minima.last_mut() {
                Some(prev) if (delta - prev.delta).abs() < MERGE_TOLERANCE => {
                    prev.merged = true;
                    if depth < prev.depth {
                        prev.delta = delta;
                        prev.depth = depth;
                    }
                }
                _ => minima.push(AbsorptionMinimum {
                    delta,
                    depth,
                    merged: false,
                }),
            }
        }
    }
    Ok(minima)
}

/// Inclusive uniform grid; symmetric ranges give exactly antisymmetric points.
pub fn uniform_grid(start: f64, stop: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    let mid = 0.5 * (start + stop);
    let half = 0.5 * (stop - start);
    let span = (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i == 0 {
                start
            } else if i == points - 1 {
                stop
            } else {
                mid + half * ((2 * i) as f64 - span) / span
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(g: f64, j: f64, dc: f64, de: f64) -> SystemParams {
        SystemParams::symmetric(g, 1.0, 1.0, j, dc, de)
    }

    #[test]
    fn residuals_vanish_at_two_emitter_cpa() {
        let r = 199f64.sqrt();
        let res = cpa_residuals(&sym(10.0, 0.0, r, r)).unwrap();
        assert!(res.max_abs() <= 1e-12, "{res:?}");
    }

    #[test]
    fn residuals_at_line_center() {
        let res = cpa_residuals(&sym(10.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(res.r1, -199.0);
        assert_eq!(res.r2, 0.0);
    }

    #[test]
    fn residuals_without_coupling() {
        let res = cpa_residuals(&sym(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!((res.r1, res.r2), (1.0, 0.0));
    }

    #[test]
    fn residuals_reject_asymmetry() {
        let p = SystemParams {
            gamma2: 2.0,
            ..sym(10.0, 0.0, 0.0, 0.0)
        };
        let err = cpa_residuals(&p).unwrap_err();
        assert!(err.to_string().contains("gamma"));
        let p = SystemParams {
            g1: Complex64::new(0.0, 10.0),
            g2: Complex64::new(0.0, 10.0),
            ..sym(10.0, 0.0, 0.0, 0.0)
        };
        assert!(cpa_residuals(&p).unwrap_err().to_string().contains("real"));
    }

    #[test]
    fn solutions_without_ddi() {
        let sols = cpa_detuning_solutions(10.0, 1.0, 1.0, 0.0);
        assert_eq!(sols.len(), 2);
        let r = 199f64.sqrt();
        assert!((sols[0].delta_eg - r).abs() < 1e-12 && (sols[0].delta_c - r).abs() < 1e-12);
        assert!((sols[1].delta_eg + r).abs() < 1e-12 && (sols[1].delta_c + r).abs() < 1e-12);
        for s in &sols {
            assert_eq!(s.delta_ac, 0.0);
            let res = cpa_residuals(&s.params(10.0, 1.0, 1.0, 0.0)).unwrap();
            assert!(res.max_abs() <= 1e-9);
        }
    }

    #[test]
    fn solutions_with_ddi_shift_emitter_detuning() {
        let sols = cpa_detuning_solutions(10.0, 1.0, 1.0, 20.0);
        let r = 199f64.sqrt();
        assert_eq!(sols.len(), 2);
        assert!((sols[0].delta_eg - (-20.0 + r)).abs() < 1e-12);
        assert!((sols[1].delta_eg - (-20.0 - r)).abs() < 1e-12);
        assert!((sols[0].delta_c - r).abs() < 1e-12);
        assert!((sols[1].delta_c + r).abs() < 1e-12);
        for s in &sols {
            assert!((s.delta_ac + 20.0).abs() < 1e-12);
        }
    }

    #[test]
    fn weak_coupling_has_no_cpa() {
        assert!(cpa_detuning_solutions(0.5, 1.0, 1.0, 0.0).is_empty());
    }

    #[test]
    fn threshold_coupling_gives_single_solution() {
        // 2g²γ/κ = γ² at g = 1/√2
        let sols = cpa_detuning_solutions(0.5f64.sqrt(), 1.0, 1.0, 0.0);
        assert!(sols.len() <= 2 && !sols.is_empty());
        for s in &sols {
            assert!(s.delta_c.abs() < 1e-7);
        }
    }

    #[test]
    fn half_amplitude_scattering_at_cpa() {
        let r = 199f64.sqrt();
        let p = sym(10.0, 0.0, r, r);
        let (sll, srl) = single_input_scattering(&p, Port::Left).unwrap();
        assert!((sll - 0.5).norm() < 1e-10);
        assert!((srl + 0.5).norm() < 1e-10);
        let (srr, slr) = single_input_scattering(&p, Port::Right).unwrap();
        assert!((srr - 0.5).norm() < 1e-10);
        assert!((slr + 0.5).norm() < 1e-10);
    }

    #[test]
    fn empty_resonant_cavity_transmits_with_phase_flip() {
        let (sll, srl) = single_input_scattering(&sym(0.0, 0.0, 0.0, 0.0), Port::Left).unwrap();
        assert!(sll.norm() < 1e-15);
        assert!((srl + 1.0).norm() < 1e-15);
    }

    #[test]
    fn minima_at_exact_cpa_roots() {
        let p = sym(10.0, 0.0, 0.0, 0.0);
        let m = find_absorption_minima(&p, &DriveConfig::equal(1.0), (-40.0, 40.0), 801, DetuningAxis::Cavity)
            .unwrap();
        assert_eq!(m.len(), 2);
        let r = 199f64.sqrt();
        assert!((m[0].delta + r).abs() <= 1e-6);
        assert!((m[1].delta - r).abs() <= 1e-6);
        assert!(m.iter().all(|x| x.depth <= 1e-10 && !x.merged));
        assert!((m[0].delta + m[1].delta).abs() <= 1e-9);
    }

    #[test]
    fn ddi_lifts_the_minima() {
        let p = sym(10.0, 15.0, 0.0, 0.0);
        let m = find_absorption_minima(&p, &DriveConfig::equal(1.0), (-40.0, 40.0), 801, DetuningAxis::Cavity)
            .unwrap();
        assert_eq!(m.len(), 2);
        assert!((m[0].delta + 23.5).abs() < 0.1);
        assert!((m[1].delta - 8.5).abs() < 0.1);
        assert!(m.iter().all(|x| x.depth > 0.2));
    }

    #[test]
    fn minima_argument_errors() {
        let p = sym(10.0, 0.0, 0.0, 0.0);
        let d = DriveConfig::equal(1.0);
        assert!(matches!(
            find_absorption_minima(&p, &d, (1.0, 1.0), 100, DetuningAxis::Cavity),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            find_absorption_minima(&p, &d, (f64::NEG_INFINITY, 1.0), 100, DetuningAxis::Cavity),
            Err(Error::Argument(_))
        ));
        assert!(find_absorption_minima(&p, &d, (-1.0, 1.0), 10, DetuningAxis::Cavity).is_err());
        assert!(matches!(
            find_absorption_minima(&p, &DriveConfig::left_only(1.0), (-1.0, 1.0), 100, DetuningAxis::Cavity),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn grid_is_inclusive_and_antisymmetric() {
        let g = uniform_grid(-2.0, 2.0, 9);
        assert_eq!(g.first(), Some(&-2.0));
        assert_eq!(g.last(), Some(&2.0));
        for i in 0..9 {
            assert_eq!(g[i], -g[8 - i]);
        }
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
