//! Weak-excitation steady state and input-output scattering.
//!
//! With ⟨σ_z,j⟩ = −1 and no direct emitter drive, the stationary mean-field
//! equations are linear in (⟨a⟩, ⟨σ₁⟩, ⟨σ₂⟩):
//!
//! ```text
//! (iΔ_c + (κ_l+κ_r)/2)·a + i g₁*·σ₁ + i g₂*·σ₂ = −√κ_l·a_in,l − √κ_r·a_in,r
//! (iΔ_eg,j + γ_j)·σ_j + i J·σ_k               = −i g_j·a
//! ```
//!
//! and the outputs follow from `a_out = a_in + √κ·a` at each mirror.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DriveConfig, SystemParams};

/// Above this 1-norm condition number the stationary system is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteadyState {
    pub a: Complex64,
    pub sigma1: Complex64,
    pub sigma2: Complex64,
    pub a_out_l: Complex64,
    pub a_out_r: Complex64,
}

/// Intensities normalized to the reference input |a_in|².
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Observables {
    pub out_l: f64,
    pub out_r: f64,
    pub cavity: f64,
    /// |⟨σ₁⟩ + ⟨σ₂⟩|², without a symmetrization factor.
    pub atoms: f64,
}

fn stationary_matrix(p: &SystemParams) -> Matrix3<Complex64> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    Matrix3::new(
        c(0.5 * p.kappa_total(), p.delta_c),
        I * p.g1.conj(),
        I * p.g2.conj(),
        I * p.g1,
        c(p.gamma1, p.delta_eg1),
        c(0.0, p.j),
        I * p.g2,
        c(0.0, p.j),
        c(p.gamma2, p.delta_eg2),
    )
}

fn norm1(m: &Matrix3<Complex64>) -> f64 {
    (0..3)
        .map(|col| m.column(col).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves the stationary 3×3 system and attaches the output fields.
pub fn solve_steady_state(params: &SystemParams, drive: &DriveConfig) -> Result<SteadyState> {
    params.check()?;
    if drive.amp_l == 0.0 && drive.amp_r == 0.0 {
        return Err(Error::UndefinedNormalization);
    }
    let m = stationary_matrix(params);
    let lu = m.lu();
    let det = lu.determinant();
    let inv = lu.try_inverse().ok_or(Error::Singular {
        det: det.norm(),
        cond: f64::INFINITY,
    })?;
    let cond = norm1(&m) * norm1(&inv);
    if !(cond <= CONDITION_LIMIT) {
        return Err(Error::Singular {
            det: det.norm(),
            cond,
        });
    }
    let rhs = Vector3::new(-drive_term(params, drive), Complex64::default(), Complex64::default());
    let x = lu.solve(&rhs).ok_or(Error::Singular {
        det: det.norm(),
        cond,
    })?;
    let a = x[0];
    let (a_out_l, a_out_r) = output_fields(a, params, drive);
    Ok(SteadyState {
        a,
        sigma1: x[1],
        sigma2: x[2],
        a_out_l,
        a_out_r,
    })
}

/// √κ_l·a_in,l + √κ_r·a_in,r, the net cavity forcing.
fn drive_term(p: &SystemParams, d: &DriveConfig) -> Complex64 {
    p.kappa_l.sqrt() * d.a_in_l() + p.kappa_r.sqrt() * d.a_in_r()
}

/// Cavity self-energy from eliminating both emitters.
///
/// Σ = [|g₁|²(iΔ₂+γ₂) + |g₂|²(iΔ₁+γ₁) − 2iJ·Re(g₁*g₂)] / [(iΔ₁+γ₁)(iΔ₂+γ₂) + J²]
fn emitter_self_energy(p: &SystemParams) -> Result<Complex64> {
    let e1 = Complex64::new(p.gamma1, p.delta_eg1);
    let e2 = Complex64::new(p.gamma2, p.delta_eg2);
    let den = e1 * e2 + p.j * p.j;
    if den.norm() == 0.0 {
        return Err(Error::Singular {
            det: 0.0,
            cond: f64::INFINITY,
        });
    }
    let cross = (p.g1.conj() * p.g2).re;
    let num = p.g1.norm_sqr() * e2 + p.g2.norm_sqr() * e1 - 2.0 * I * p.j * cross;
    Ok(num / den)
}

/// Intracavity amplitude from the eliminated-emitter closed form.
///
/// Independent of the matrix solve; used as its cross-check.
pub fn closed_form_intracavity(params: &SystemParams, drive: &DriveConfig) -> Result<Complex64> {
    params.check()?;
    let sigma = emitter_self_energy(params)?;
    let z = Complex64::new(0.5 * params.kappa_total(), params.delta_c) + sigma;
    Ok(-drive_term(params, drive) / z)
}

/// Input-output relations at the two mirrors.
pub fn output_fields(a: Complex64, params: &SystemParams, drive: &DriveConfig) -> (Complex64, Complex64) {
    (
        drive.a_in_l() + params.kappa_l.sqrt() * a,
        drive.a_in_r() + params.kappa_r.sqrt() * a,
    )
}

fn require_symmetric_equal_drive(params: &SystemParams, drive: &DriveConfig, what: &str) -> Result<()> {
    if !params.has_symmetric_cavity() {
        return Err(Error::Precondition(format!("{what}: kappa_l != kappa_r")));
    }
    if drive.a_in_l() != drive.a_in_r() {
        return Err(Error::Precondition(format!("{what}: inputs must be equal")));
    }
    Ok(())
}

/// Output of a single emitter (emitter 1) in a symmetric cavity with equal inputs.
pub fn single_qe_output(params: &SystemParams, drive: &DriveConfig) -> Result<Complex64> {
    params.check()?;
    require_symmetric_equal_drive(params, drive, "single_qe_output")?;
    let kappa = params.kappa_l;
    let a_in = drive.a_in_l();
    let emitter = Complex64::new(params.gamma1, params.delta_eg1);
    let z = Complex64::new(kappa, params.delta_c) + params.g1.norm_sqr() / emitter;
    Ok(a_in - 2.0 * kappa * a_in / z)
}

/// Output of two identical emitters on resonance with the cavity, equal inputs.
pub fn two_qe_output(params: &SystemParams, drive: &DriveConfig) -> Result<Complex64> {
    params.check()?;
    require_symmetric_equal_drive(params, drive, "two_qe_output")?;
    if !params.has_identical_emitters() {
        return Err(Error::Precondition("two_qe_output: emitters differ".into()));
    }
    if params.delta_eg1 != params.delta_c {
        return Err(Error::Precondition(
            "two_qe_output: requires delta_eg = delta_c".into(),
        ));
    }
    let kappa = params.kappa_l;
    let a_in = drive.a_in_l();
    let delta = params.delta_c;
    let g2 = params.g1.norm_sqr();
    let e = Complex64::new(params.gamma1, delta);
    let den = e * e + params.j * params.j;
    if den.norm() == 0.0 {
        return Err(Error::Singular {
            det: 0.0,
            cond: f64::INFINITY,
        });
    }
    let sigma = (2.0 * g2 * e - 2.0 * I * g2 * params.j) / den;
    let z = Complex64::new(kappa, delta) + sigma;
    Ok(a_in - 2.0 * kappa * a_in / z)
}

/// Normalized intensities; the reference is the left input when nonzero, else the right.
pub fn observables(params: &SystemParams, drive: &DriveConfig) -> Result<Observables> {
    let reference = if drive.amp_l > 0.0 {
        drive.amp_l * drive.amp_l
    } else if drive.amp_r > 0.0 {
        drive.amp_r * drive.amp_r
    } else {
        return Err(Error::UndefinedNormalization);
    };
    let s = solve_steady_state(params, drive)?;
    Ok(Observables {
        out_l: s.a_out_l.norm_sqr() / reference,
        out_r: s.a_out_r.norm_sqr() / reference,
        cavity: s.a.norm_sqr() / reference,
        atoms: (s.sigma1 + s.sigma2).norm_sqr() / reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn resonant(delta: f64) -> SystemParams {
        SystemParams::symmetric(10.0, 1.0, 1.0, 0.0, delta, delta)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn opposed_inputs_leave_cavity_empty() {
        let drive = DriveConfig::with_relative_phase(1.0, PI);
        for p in [resonant(0.0), resonant(3.7).with_j(12.0), SystemParams::single_emitter(4.0, 2.0, 0.5, -1.0, 2.0)] {
            let s = solve_steady_state(&p, &drive).unwrap();
            assert_eq!(s.a, Complex64::default());
            assert_eq!(s.a_out_l, drive.a_in_l());
            assert_eq!(s.a_out_r, drive.a_in_r());
        }
    }

    #[test]
    fn two_emitter_cpa_point_absorbs_everything() {
        let s = solve_steady_state(&resonant(199f64.sqrt()), &DriveConfig::equal(1.0)).unwrap();
        assert!(s.a_out_l.norm_sqr() <= 1e-20, "{}", s.a_out_l.norm_sqr());
        assert!(s.a_out_r.norm_sqr() <= 1e-20);
        // back-substitution: √κ·a = −a_in
        assert!((s.a + 1.0).norm() < 1e-10);
    }

    #[test]
    fn single_emitter_limit_matches_reduced_formula() {
        let p = SystemParams::single_emitter(7.0, 1.3, 0.8, 2.5, -1.5);
        let d = DriveConfig::new(1.0, 0.6, 0.3, -1.1).unwrap();
        let s = solve_steady_state(&p, &d).unwrap();
        let kappa = p.kappa_l;
        let z = Complex64::new(kappa, p.delta_c) + 49.0 / Complex64::new(1.3, -1.5);
        let a = -kappa.sqrt() * (d.a_in_l() + d.a_in_r()) / z;
        assert!(rel(s.a, a) < 1e-12);
    }

    #[test]
    fn closed_form_reduces_to_collective_form() {
        let (g, gamma, kappa, delta) = (10.0, 1.0, 1.0, 3.0);
        let p = SystemParams::symmetric(g, gamma, kappa, 0.0, delta, delta);
        let d = DriveConfig::equal(1.0);
        let z = Complex64::new(kappa, delta) + 2.0 * g * g / Complex64::new(gamma, delta);
        let expected = -2.0 * kappa.sqrt() / z;
        assert!(rel(closed_form_intracavity(&p, &d).unwrap(), expected) < 1e-14);
    }

    #[test]
    fn closed_form_at_cpa_point() {
        let a = closed_form_intracavity(&resonant(199f64.sqrt()), &DriveConfig::equal(1.0)).unwrap();
        assert!((a + 1.0).norm() < 1e-12);
    }

    #[test]
    fn equal_inputs_give_equal_outputs() {
        let p = resonant(4.2).with_j(6.0);
        let d = DriveConfig::new(0.7, 0.7, 0.4, 0.4).unwrap();
        let s = solve_steady_state(&p, &d).unwrap();
        assert_eq!(s.a_out_l, s.a_out_r);
    }

    #[test]
    fn output_fields_pass_through_when_empty() {
        let d = DriveConfig::new(0.3, 1.2, 1.0, -2.0).unwrap();
        let (l, r) = output_fields(Complex64::default(), &resonant(0.0), &d);
        assert_eq!((l, r), (d.a_in_l(), d.a_in_r()));
    }

    #[test]
    fn single_qe_output_examples() {
        let d = DriveConfig::equal(1.0);
        for root in [99f64.sqrt(), -99f64.sqrt()] {
            let p = SystemParams::single_emitter(10.0, 1.0, 1.0, root, root);
            assert!(single_qe_output(&p, &d).unwrap().norm() < 1e-12);
        }
        let far = SystemParams::single_emitter(10.0, 1.0, 1.0, 1e7, 1e7);
        assert!((single_qe_output(&far, &d).unwrap() - 1.0).norm() < 1e-6);
        let empty = SystemParams::single_emitter(0.0, 1.0, 1.0, 0.0, 0.0);
        assert!((single_qe_output(&empty, &d).unwrap() + 1.0).norm() < 1e-15);
    }

    #[test]
    fn single_qe_grid_oracle_locates_roots() {
        // dense scan of |1 − 2κ/(iΔ + κ + g²/(iΔ + γ))|² with κ = γ = 1, g = 10
        let f = |x: f64| {
            let z = Complex64::new(1.0, x) + 100.0 / Complex64::new(1.0, x);
            (1.0 - 2.0 / z).norm_sqr()
        };
        let xs: Vec<f64> = (0..=200_000).map(|i| -20.0 + 40.0 * i as f64 / 200_000.0).collect();
        let mut minima = vec![];
        for w in 1..xs.len() - 1 {
            if f(xs[w]) < f(xs[w - 1]) && f(xs[w]) <= f(xs[w + 1]) {
                minima.push(xs[w]);
            }
        }
        assert_eq!(minima.len(), 2);
        assert!((minima[0] + 9.9499).abs() < 2e-4);
        assert!((minima[1] - 9.9499).abs() < 2e-4);
    }

    #[test]
    fn two_qe_output_examples() {
        let d = DriveConfig::equal(1.0);
        let root = 199f64.sqrt();
        for x in [root, -root] {
            assert!(two_qe_output(&resonant(x), &d).unwrap().norm() < 1e-12);
        }
        assert!((two_qe_output(&resonant(1e7), &d).unwrap() - 1.0).norm() < 1e-6);
        // J = 15: dips sit near the polariton roots and do not reach zero
        let p = resonant(8.477).with_j(15.0);
        assert!(two_qe_output(&p, &d).unwrap().norm_sqr() > 0.2);
        let asym = SystemParams {
            delta_eg1: 1.0,
            delta_eg2: 1.0,
            ..resonant(0.0)
        };
        assert!(matches!(two_qe_output(&asym, &d), Err(Error::Precondition(_))));
    }

    #[test]
    fn observables_examples() {
        let cpa = observables(&resonant(199f64.sqrt()), &DriveConfig::equal(1.0)).unwrap();
        assert!(cpa.out_l < 1e-20 && cpa.out_r < 1e-20);
        assert!(cpa.cavity > 0.1 && cpa.atoms > 0.1);

        let anti = observables(&resonant(2.0), &DriveConfig::with_relative_phase(1.0, PI)).unwrap();
        assert_eq!((anti.out_l, anti.out_r, anti.cavity, anti.atoms), (1.0, 1.0, 0.0, 0.0));

        let p = resonant(5.0).with_j(3.0);
        let o1 = observables(&p, &DriveConfig::new(1.0, 1.0, 0.2, -0.4).unwrap()).unwrap();
        let o3 = observables(&p, &DriveConfig::new(3.0, 3.0, 0.2, -0.4).unwrap()).unwrap();
        for (x, y) in [(o1.out_l, o3.out_l), (o1.out_r, o3.out_r), (o1.cavity, o3.cavity), (o1.atoms, o3.atoms)] {
            assert!((x - y).abs() <= 1e-12 * x.max(1.0));
        }

        let none = DriveConfig::equal(0.0);
        assert!(matches!(observables(&p, &none), Err(Error::UndefinedNormalization)));
    }

    #[test]
    fn right_only_normalizes_to_right_input() {
        let p = resonant(1.0);
        let o = observables(&p, &DriveConfig::right_only(2.0)).unwrap();
        let s = solve_steady_state(&p, &DriveConfig::right_only(2.0)).unwrap();
        assert!((o.out_r - s.a_out_r.norm_sqr() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = SystemParams {
            gamma1: -1.0,
            ..resonant(0.0)
        };
        assert!(matches!(solve_steady_state(&p, &DriveConfig::equal(1.0)), Err(Error::Invalid(_))));
    }

    #[test]
    fn huge_detuning_trips_condition_guard() {
        let p = SystemParams {
            delta_eg2: 1e15,
            ..resonant(0.0)
        };
        assert!(matches!(
            solve_steady_state(&p, &DriveConfig::equal(1.0)),
            Err(Error::Singular { .. })
        ));
    }
}
