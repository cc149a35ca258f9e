//! Total, dynamical and geometric phases of a single driven two-level system.
//!
//! The total phase is the argument of the initial-state overlap
//! `arg<psi(0)|psi(t)>`. The dynamical phase is `i * integral <psi|dpsi/dt>`,
//! assembled from the matrix elements `a11`, `a12` of `U^dag dU/dt` with all
//! time integrals carried out analytically term by term -- numerical
//! quadrature of these highly oscillatory integrands lives only in the test
//! oracle. The geometric phase is stored as the raw difference of the two.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::floquet::{solve_floquet, Backend, Cutoff, Drive, FloquetSolution, TwoLevelParams};
use crate::qpseries::{QPSeries, ZERO_FREQ_TOL};
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

/// Reality tolerance for the dynamical phase: above this imaginary residue a
/// result is flagged suspect.
pub const REALITY_TOL: f64 = 1e-8;

/// Rotated-frame components of the initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    alpha: C64,
    beta: C64,
}

impl InitialState {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain { field: "state", reason: "must be normalized" });
        }
        Ok(InitialState { alpha, beta })
    }

    /// Lab-frame `|0>` rotated by `R_y(pi/2)`: `alpha = beta = 1/sqrt(2)`.
    pub fn lab_frame_zero() -> Self {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        InitialState { alpha: C64::new(s, 0.0), beta: C64::new(s, 0.0) }
    }

    /// Rotated-frame image of a lab-frame basis vector (`0 -> |0>`, `1 -> |1>`).
    pub fn lab_frame_basis(which: u8) -> Self {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        if which == 0 {
            InitialState { alpha: C64::new(s, 0.0), beta: C64::new(s, 0.0) }
        } else {
            InitialState { alpha: C64::new(-s, 0.0), beta: C64::new(s, 0.0) }
        }
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn as_vec(&self) -> [C64; 2] {
        [self.alpha, self.beta]
    }
}

/// Matrix elements of `U^dag dU/dt` as quasi-periodic series.
#[derive(Debug, Clone)]
pub struct OverlapDerivative {
    pub a11: QPSeries,
    pub a12: QPSeries,
}

/// Phase triple at a stated evaluation time. `geometric` is stored as the
/// raw difference `total - dynamical` before any re-wrapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseReport {
    pub total: f64,
    pub dynamical: f64,
    pub geometric: f64,
    /// Magnitude of the imaginary part discarded from the dynamical phase.
    pub dyn_imag_residue: f64,
    pub eval_time: f64,
}

/// Build `a11 = conj(U11) U11' + U12 conj(U12)'` and
/// `a12 = conj(U11) U12' - U12 conj(U11)'` from the series representation.
pub fn overlap_derivative(sol: &FloquetSolution) -> OverlapDerivative {
    let u11 = sol.u11();
    let u12 = sol.u12();
    let u11c = u11.conj();
    let u12c = u12.conj();
    let du11 = u11.derivative();
    let du12 = u12.derivative();
    let a11 = u11c
        .mul(&du11)
        .and_then(|x| x.add(&u12.mul(&du12.conj()).unwrap()))
        .expect("same base");
    let a12 = u11c
        .mul(&du12)
        .and_then(|x| x.sub(&u12.mul(&du11.conj()).unwrap()))
        .expect("same base");
    let _ = u12c;
    OverlapDerivative { a11, a12 }
}

/// Complex initial-state overlap `<psi2(0)|psi2(t)>`.
pub fn overlap(sol: &FloquetSolution, state: &InitialState, t: f64) -> C64 {
    let u = sol.evolution_operator_at(t);
    let v = state.as_vec();
    let uv = crate::mat::matvec2(&u, &v);
    crate::mat::inner2(&v, &uv)
}

/// Total phase `arg<psi2(0)|psi2(t)>` in `(-pi, pi]`.
pub fn total_phase(sol: &FloquetSolution, state: &InitialState, t: f64) -> Result<f64> {
    let ov = overlap(sol, state, t);
    if ov.norm() < 1e-12 {
        return Err(Error::UndefinedPhase { magnitude: ov.norm() });
    }
    Ok(ov.arg())
}

/// Dynamical phase via analytic antiderivatives of `a11`, `a12`, evaluated at
/// `t`. Returns the real part and the magnitude of the imaginary residue.
pub fn dynamical_phase(sol: &FloquetSolution, state: &InitialState, t: f64) -> (f64, f64) {
    let od = overlap_derivative(sol);
    dynamical_phase_from(&od, state, t)
}

pub(crate) fn dynamical_phase_from(
    od: &OverlapDerivative,
    state: &InitialState,
    t: f64,
) -> (f64, f64) {
    let a11_int = od.a11.antiderivative(ZERO_FREQ_TOL).eval(t);
    let a12_int = od.a12.antiderivative(ZERO_FREQ_TOL).eval(t);
    let alpha = state.alpha();
    let beta = state.beta();
    let cross = alpha.conj() * beta * a12_int;
    // i * integral <psi0| U^dag dU |psi0>
    let val = C64::new(0.0, 1.0)
        * (alpha.norm_sqr() * a11_int
            + beta.norm_sqr() * a11_int.conj()
            + (cross - cross.conj()));
    (val.re, val.im.abs())
}

/// Total, dynamical and geometric phases at `t` (defaulting to `t_omega`).
pub fn phase_report(
    sol: &FloquetSolution,
    state: &InitialState,
    t: Option<f64>,
) -> Result<PhaseReport> {
    let t = t.unwrap_or_else(|| sol.params().drive.t_omega());
    let total = total_phase(sol, state, t)?;
    let (dynamical, residue) = dynamical_phase(sol, state, t);
    Ok(PhaseReport {
        total,
        dynamical,
        geometric: total - dynamical,
        dyn_imag_residue: residue,
        eval_time: t,
    })
}

/// One sweep point: parameters plus per-point outcome.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub omega: f64,
    pub residual: f64,
    pub omega_rabi: f64,
    pub report: Result<PhaseReport>,
}

/// Evaluate `phase_report` at each point's own `t_omega` over the grid
/// `eps_range x omega_range`. Per-point failures are recorded in the table,
/// never aborting the sweep.
pub fn sweep_grid(
    eps_range: &[f64],
    omega_range: &[f64],
    state: &InitialState,
    cutoff: Cutoff,
    backend: Backend,
) -> Vec<SweepPoint> {
    let mut out = Vec::with_capacity(eps_range.len() * omega_range.len());
    for &eps in eps_range {
        for &omega in omega_range {
            let point = Drive::default_with_omega(omega)
                .and_then(|d| TwoLevelParams::new(eps, d))
                .and_then(|p| solve_floquet(p, cutoff, backend));
            match point {
                Ok(sol) => out.push(SweepPoint {
                    epsilon: eps,
                    omega,
                    residual: sol.residual(),
                    omega_rabi: sol.omega_rabi(),
                    report: phase_report(&sol, state, None),
                }),
                Err(e) => out.push(SweepPoint {
                    epsilon: eps,
                    omega,
                    residual: f64::NAN,
                    omega_rabi: f64::NAN,
                    report: Err(e),
                }),
            }
        }
    }
    out
}

/// Inclusive range with fixed step, tolerant of floating accumulation.
pub fn range_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 0.5).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}
