//! Two driven systems coupled at first order in the interaction strength.
//!
//! The coupling `kappa * v(t) * s1(x)s1` is treated in the interaction
//! picture: `U(t) = (U_a (x) U_b) * U_I(t)` with `U_I = 1 - i*kappa*V1(t)`
//! and `V1` the time integral of the kernel `(U_a^dag s1 U_a)(x)(U_b^dag s1
//! U_b) * v(t)`. A delta coupling makes `V1` piecewise constant, so the phase
//! corrections reduce to analytic integrals of quasi-periodic series; a
//! general periodic `v` is supported through adaptive quadrature only.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::floquet::{solve_floquet, Backend, Cutoff, FloquetSolution, TwoLevelParams};
use crate::mat::{
    adjoint2, identity4, inner4, kron2, kron_vec, matmul4, matvec2, matvec4, trace4, Mat2, Mat4,
};
use crate::phases::{self, InitialState, OverlapDerivative, PhaseReport};
use crate::qpseries::{QPSeries, ZERO_FREQ_TOL};
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

/// Coupling strength above which the first-order truncation is dubious.
pub const KAPPA_VALIDITY_CEILING: f64 = 0.2;

/// Target for the adaptive quadrature used by the periodic-coupling path.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Maximum number of stroboscopic samples scanned for the composite
/// recurrence before giving up.
pub const MAX_STROBES: usize = 20_000;

/// Shape of the two-system coupling `kappa * v(t) * s1(x)s1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Interaction {
    /// `v = 0`: a plain tensor product of the two subsystems.
    None,
    /// `v(t) = delta(t - t0)`, applied in closed form.
    Delta { t0: f64 },
    /// `v(t) = sum_j cos_coeffs[j] * cos(j * omega * t)`.
    Periodic { omega: f64, cos_coeffs: Vec<f64> },
}

/// Two subsystem parameter sets plus the coupling specification.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeParams {
    pub sys_a: TwoLevelParams,
    pub sys_b: TwoLevelParams,
    pub kappa: f64,
    pub interaction: Interaction,
}

impl CompositeParams {
    pub fn new(
        sys_a: TwoLevelParams,
        sys_b: TwoLevelParams,
        kappa: f64,
        interaction: Interaction,
    ) -> Result<Self> {
        if !kappa.is_finite() {
            return Err(Error::Domain { field: "kappa", reason: "must be finite" });
        }
        if let Interaction::Delta { t0 } = interaction {
            if !(t0 > 0.0) {
                return Err(Error::Domain { field: "t0", reason: "must be positive" });
            }
        }
        Ok(CompositeParams { sys_a, sys_b, kappa, interaction })
    }

    /// True when `|kappa|` exceeds the first-order validity ceiling.
    pub fn kappa_out_of_validity(&self) -> bool {
        self.kappa.abs() > KAPPA_VALIDITY_CEILING
    }
}

/// Computational-basis states of the pair, defined in the lab frame and
/// rotated factor-wise into the frame the propagators live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisState {
    B00,
    B01,
    B10,
    B11,
}

impl BasisState {
    pub const ALL: [BasisState; 4] = [
        BasisState::B00,
        BasisState::B01,
        BasisState::B10,
        BasisState::B11,
    ];

    fn bits(self) -> (u8, u8) {
        match self {
            BasisState::B00 => (0, 0),
            BasisState::B01 => (0, 1),
            BasisState::B10 => (1, 0),
            BasisState::B11 => (1, 1),
        }
    }

    /// Rotated-frame factor states `(phi_a, phi_b)`.
    pub fn factors(self) -> (InitialState, InitialState) {
        let (a, b) = self.bits();
        (InitialState::lab_frame_basis(a), InitialState::lab_frame_basis(b))
    }

    /// Rotated-frame 4-vector `phi_a (x) phi_b`.
    pub fn state_vec(self) -> [C64; 4] {
        let (a, b) = self.factors();
        kron_vec(&a.as_vec(), &b.as_vec())
    }
}

/// First-order Dyson kernel: the interaction-picture image of `s1` for each
/// subsystem, as quasi-periodic series.
#[derive(Debug, Clone)]
pub struct DysonKernel {
    pub v11_a: QPSeries,
    pub v12_a: QPSeries,
    pub v11_b: QPSeries,
    pub v12_b: QPSeries,
}

impl DysonKernel {
    /// Per-subsystem kernel factor `W(t) = U(t)^dag s1 U(t)`.
    fn w_at(v11: &QPSeries, v12: &QPSeries, t: f64) -> Mat2 {
        let w11 = v11.eval(t);
        let w12 = v12.eval(t);
        [[w11, w12], [w12.conj(), -w11]]
    }

    pub fn w_a(&self, t: f64) -> Mat2 {
        Self::w_at(&self.v11_a, &self.v12_a, t)
    }

    pub fn w_b(&self, t: f64) -> Mat2 {
        Self::w_at(&self.v11_b, &self.v12_b, t)
    }

    /// The 4x4 integrand matrix `W_a(t) (x) W_b(t)` of the Dyson integral.
    pub fn kernel_at(&self, t: f64) -> Mat4 {
        kron2(&self.w_a(t), &self.w_b(t))
    }
}

/// Build the kernel series `V11 = -conj(U11)conj(U12) - U11*U12` and
/// `V12 = conj(U11)^2 - U12^2` for each subsystem.
pub fn dyson_kernel(sol_a: &FloquetSolution, sol_b: &FloquetSolution) -> DysonKernel {
    fn pair(sol: &FloquetSolution) -> (QPSeries, QPSeries) {
        let u11 = sol.u11();
        let u12 = sol.u12();
        let u11c = u11.conj();
        let v11 = u11c
            .mul(&u12.conj())
            .and_then(|x| x.add(&u11.mul(u12).unwrap()))
            .expect("same base")
            .neg();
        let v12 = u11c
            .mul(&u11c)
            .and_then(|x| x.sub(&u12.mul(u12).unwrap()))
            .expect("same base");
        (v11, v12)
    }
    let (v11_a, v12_a) = pair(sol_a);
    let (v11_b, v12_b) = pair(sol_b);
    DysonKernel { v11_a, v12_a, v11_b, v12_b }
}

fn zero4() -> Mat4 {
    [[C64::new(0.0, 0.0); 4]; 4]
}

/// First-order Dyson operator `V1(t) = integral_0^t kernel(s) v(s) ds`.
///
/// For the delta coupling this is the Heaviside step
/// `theta(t - t0) * kernel(t0)`; for a periodic `v` it is evaluated by
/// adaptive quadrature to [`QUADRATURE_TOL`].
pub fn v1_operator(kernel: &DysonKernel, interaction: &Interaction, t: f64) -> Result<Mat4> {
    match interaction {
        Interaction::None => Ok(zero4()),
        Interaction::Delta { t0 } => {
            if t < *t0 {
                Ok(zero4())
            } else {
                Ok(kernel.kernel_at(*t0))
            }
        }
        Interaction::Periodic { omega, cos_coeffs } => {
            let f = |s: f64| {
                let v: f64 = cos_coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * (j as f64 * omega * s).cos())
                    .sum();
                let mut m = kernel.kernel_at(s);
                for row in m.iter_mut() {
                    for e in row.iter_mut() {
                        *e = *e * v;
                    }
                }
                m
            };
            adaptive_simpson4(&f, 0.0, t, QUADRATURE_TOL)
        }
    }
}

/// `U_I(t) = 1 - i*kappa*V1(t)`: the first-order interaction-picture
/// propagator. Deliberately non-unitary; the defect is O(kappa^2).
pub fn ui_first_order(
    kernel: &DysonKernel,
    interaction: &Interaction,
    kappa: f64,
    t: f64,
) -> Result<Mat4> {
    let v1 = v1_operator(kernel, interaction, t)?;
    let mut out = identity4();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] += C64::new(0.0, -kappa) * v1[i][j];
        }
    }
    Ok(out)
}

/// Both subsystems solved once, with the kernel series prebuilt.
#[derive(Debug, Clone)]
pub struct CompositeSystem {
    params: CompositeParams,
    sol_a: FloquetSolution,
    sol_b: FloquetSolution,
    kernel: DysonKernel,
}

impl CompositeSystem {
    pub fn new(params: CompositeParams, cutoff: Cutoff, backend: Backend) -> Result<Self> {
        let sol_a = solve_floquet(params.sys_a, cutoff, backend)?;
        let sol_b = solve_floquet(params.sys_b, cutoff, backend)?;
        let kernel = dyson_kernel(&sol_a, &sol_b);
        Ok(CompositeSystem { params, sol_a, sol_b, kernel })
    }

    pub fn params(&self) -> &CompositeParams {
        self.params_ref()
    }

    fn params_ref(&self) -> &CompositeParams {
        &self.params
    }

    pub fn sol_a(&self) -> &FloquetSolution {
        &self.sol_a
    }

    pub fn sol_b(&self) -> &FloquetSolution {
        &self.sol_b
    }

    pub fn kernel(&self) -> &DysonKernel {
        &self.kernel
    }

    /// Free propagator `U_a(t) (x) U_b(t)`.
    pub fn free_propagator_at(&self, t: f64) -> Mat4 {
        kron2(
            &self.sol_a.evolution_operator_at(t),
            &self.sol_b.evolution_operator_at(t),
        )
    }

    /// First-order composite propagator `(U_a (x) U_b) * U_I`.
    pub fn propagator_at(&self, t: f64) -> Result<Mat4> {
        let ui = ui_first_order(&self.kernel, &self.params.interaction, self.params.kappa, t)?;
        Ok(matmul4(&self.free_propagator_at(t), &ui))
    }

    /// Stroboscopic sampling interval: one period of the slower drive.
    pub fn t_omega_max(&self) -> f64 {
        self.params.sys_a.drive.t_omega().max(self.params.sys_b.drive.t_omega())
    }
}

/// Composite initial-state overlap `<psi(0)|U(t)psi(0)>` to first order:
/// the product of subsystem overlaps minus `i*kappa` times the kernel term.
pub fn composite_overlap(sys: &CompositeSystem, basis: BasisState, t: f64) -> Result<C64> {
    let (fa, fb) = basis.factors();
    let ov_a = phases::overlap(&sys.sol_a, &fa, t);
    let ov_b = phases::overlap(&sys.sol_b, &fb, t);
    let free = ov_a * ov_b;
    if sys.params.kappa == 0.0 || matches!(sys.params.interaction, Interaction::None) {
        return Ok(free);
    }
    let v1 = v1_operator(&sys.kernel, &sys.params.interaction, t)?;
    let psi0 = basis.state_vec();
    let uf = sys.free_propagator_at(t);
    let corr = inner4(&psi0, &matvec4(&matmul4(&uf, &v1), &psi0));
    Ok(free + C64::new(0.0, -sys.params.kappa) * corr)
}

/// `<phi| A(t) chi>` as a series, with `A = U^dag dU/dt` reassembled from its
/// two independent elements: `A = [[a11, a12], [-conj(a12), conj(a11)]]`.
fn bilinear_series(od: &OverlapDerivative, phi: &[C64; 2], chi: &[C64; 2]) -> QPSeries {
    od.a11
        .scale(phi[0].conj() * chi[0])
        .add(&od.a11.conj().scale(phi[1].conj() * chi[1]))
        .and_then(|s| s.add(&od.a12.scale(phi[0].conj() * chi[1])))
        .and_then(|s| s.add(&od.a12.conj().scale(-(phi[1].conj() * chi[0]))))
        .expect("same base")
}

/// The two cross integrals of one subsystem's contribution to the dynamical
/// correction: `integral <phi|A W phi>` and `integral <phi|W A phi>` over
/// `[t0, t]`, plus the constant expectation `<phi|W phi>`.
fn subsystem_correction(
    sol: &FloquetSolution,
    w: &Mat2,
    phi: &[C64; 2],
    t0: f64,
    t: f64,
) -> (C64, C64, C64) {
    let od = phases::overlap_derivative(sol);
    let w_phi = matvec2(w, phi);
    let wdag_phi = matvec2(&adjoint2(w), phi);
    let aw = bilinear_series(&od, phi, &w_phi)
        .antiderivative(ZERO_FREQ_TOL)
        .definite(t0, t);
    let wa = bilinear_series(&od, &wdag_phi, phi)
        .antiderivative(ZERO_FREQ_TOL)
        .definite(t0, t);
    let expect_w = crate::mat::inner2(phi, &w_phi);
    (aw, wa, expect_w)
}

/// Total, dynamical and geometric phases of the composite system for one
/// computational-basis state, to first order in the coupling.
///
/// Supported couplings: none and delta. The delta case keeps every time
/// integral analytic: the dynamical correction is
/// `-kappa * integral <[V1, U^dag dU]>` over `[t0, t]` with constant `V1`,
/// and the `<dV1/dt>` term vanishes identically there.
pub fn composite_phases(sys: &CompositeSystem, basis: BasisState, t: f64) -> Result<PhaseReport> {
    if matches!(sys.params.interaction, Interaction::Periodic { .. }) {
        return Err(Error::Domain {
            field: "interaction",
            reason: "periodic coupling is only supported through v1_operator",
        });
    }

    let ov = composite_overlap(sys, basis, t)?;
    if ov.norm() < 1e-12 {
        return Err(Error::UndefinedPhase { magnitude: ov.norm() });
    }
    let total = ov.arg();

    let (fa, fb) = basis.factors();
    let (dyn_a, res_a) = phases::dynamical_phase(&sys.sol_a, &fa, t);
    let (dyn_b, res_b) = phases::dynamical_phase(&sys.sol_b, &fb, t);
    let mut dynamical = dyn_a + dyn_b;
    let mut residue = res_a + res_b;

    let kappa = sys.params.kappa;
    if kappa != 0.0 {
        if let Interaction::Delta { t0 } = sys.params.interaction {
            if t >= t0 {
                let wa = sys.kernel.w_a(t0);
                let wb = sys.kernel.w_b(t0);
                let (aw_a, wa_a, ca) =
                    subsystem_correction(&sys.sol_a, &wa, &fa.as_vec(), t0, t);
                let (aw_b, wa_b, cb) =
                    subsystem_correction(&sys.sol_b, &wb, &fb.as_vec(), t0, t);
                // <A_free V1> and <V1 A_free> factorize over the tensor product
                let av = aw_a * cb + ca * aw_b;
                let va = wa_a * cb + ca * wa_b;
                let corr = -kappa * (va - av);
                dynamical += corr.re;
                residue += corr.im.abs();
            }
        }
    }

    Ok(PhaseReport {
        total,
        dynamical,
        geometric: total - dynamical,
        dyn_imag_residue: residue,
        eval_time: t,
    })
}

/// Survival probability `|<psi(0)|U(t)psi(0)>|^2`, clipped to `[0, 1]`.
/// First-order truncation can push the raw value slightly outside by
/// O(kappa^2); larger excursions indicate the coupling is out of validity.
pub fn survival_probability(sys: &CompositeSystem, basis: BasisState, t: f64) -> Result<f64> {
    let p = composite_overlap(sys, basis, t)?.norm_sqr();
    Ok(p.clamp(0.0, 1.0))
}

/// Trace fidelity `|tr U(t)| / 4` of the first-order propagator: 1 exactly
/// when the composite evolution is a global phase, i.e. at a full recurrence.
fn trace_fidelity(sys: &CompositeSystem, t: f64) -> Result<f64> {
    let tr_free = trace2_prod(sys, t);
    let kappa = sys.params.kappa;
    let tr = if kappa == 0.0 || matches!(sys.params.interaction, Interaction::None) {
        tr_free
    } else {
        let uf = sys.free_propagator_at(t);
        let v1 = v1_operator(&sys.kernel, &sys.params.interaction, t)?;
        tr_free + C64::new(0.0, -kappa) * trace4(&matmul4(&uf, &v1))
    };
    Ok(tr.norm() / 4.0)
}

fn trace2_prod(sys: &CompositeSystem, t: f64) -> C64 {
    // tr(U_a (x) U_b) = tr(U_a) tr(U_b); each trace is 2 Re u11
    let ta = 2.0 * sys.sol_a.u11().eval(t).re;
    let tb = 2.0 * sys.sol_b.u11().eval(t).re;
    C64::new(ta * tb, 0.0)
}

/// Composite Rabi frequency and period from the first near-unity recurrence
/// of the trace fidelity, scanned stroboscopically (multiples of the slower
/// drive period) and refined by a fine local scan.
pub fn composite_rabi(sys: &CompositeSystem) -> Result<(f64, f64)> {
    let dt = sys.t_omega_max();
    let mut f = Vec::with_capacity(MAX_STROBES + 1);
    f.push(1.0_f64);
    let mut fmin = 1.0_f64;
    let mut below = false;
    let mut coarse = None;
    for n in 1..=MAX_STROBES {
        let t = n as f64 * dt;
        let val = trace_fidelity(sys, t)?;
        f.push(val);
        fmin = fmin.min(val);
        let dip = 1.0 - fmin;
        if val < 1.0 - 0.5 * dip {
            below = true;
        }
        // local maximum test is one sample behind the scan front
        if below && n >= 2 {
            let (a, b, c) = (f[n - 2], f[n - 1], f[n]);
            if b >= a && b >= c && b >= 0.95 {
                coarse = Some(n - 1);
                break;
            }
        }
    }
    let n = match coarse {
        Some(n) => n,
        Option::None => return Err(Error::RecurrenceNotFound { horizon: MAX_STROBES as f64 * dt }),
    };
    // refine inside [t(n-1), t(n+1)]
    let (mut best_t, mut best_f) = (n as f64 * dt, f[n]);
    let lo = (n - 1) as f64 * dt;
    let hi = (n + 1) as f64 * dt;
    let steps = 400;
    for k in 0..=steps {
        let t = lo + (hi - lo) * k as f64 / steps as f64;
        let val = trace_fidelity(sys, t)?;
        if val > best_f {
            best_f = val;
            best_t = t;
        }
    }
    let t_omega = best_t;
    Ok((2.0 * core::f64::consts::PI / t_omega, t_omega))
}

/// Per-basis-state total phases at the gate time, with the B-form test and
/// the basis-independent conditional phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateReport {
    /// Total phases of |00>, |01>, |10>, |11> in that order.
    pub phases: [f64; 4],
    /// Whether the diagonal matches diag(e^{i phi}, 1, 1, e^{-i phi}).
    pub is_b_form: bool,
    /// The B-form angle phi when `is_b_form` holds.
    pub b_phi: Option<f64>,
    /// `phi00 - phi01 - phi10 + phi11`: invariant under global and
    /// single-qubit phase offsets.
    pub conditional_phase: f64,
    pub eval_time: f64,
}

/// Tolerance for the B-form pattern test, matched to 3-decimal phase data.
pub const B_FORM_TOL: f64 = 0.01;

impl GateReport {
    pub fn from_phases(phases: [f64; 4], eval_time: f64) -> Self {
        let [p00, p01, p10, p11] = phases;
        let is_b_form =
            p01.abs() <= B_FORM_TOL && p10.abs() <= B_FORM_TOL && (p00 + p11).abs() <= B_FORM_TOL;
        GateReport {
            phases,
            is_b_form,
            b_phi: if is_b_form { Some(p00) } else { Option::None },
            conditional_phase: p00 - p01 - p10 + p11,
            eval_time,
        }
    }
}

/// Extract the conditional-phase-gate report at `t` (defaulting to the
/// composite Rabi period).
pub fn gate_extract(sys: &CompositeSystem, t: Option<f64>) -> Result<GateReport> {
    let t = match t {
        Some(t) => t,
        Option::None => composite_rabi(sys)?.1,
    };
    let mut phases = [0.0_f64; 4];
    for (i, b) in BasisState::ALL.iter().enumerate() {
        phases[i] = composite_phases(sys, *b, t)?.total;
    }
    Ok(GateReport::from_phases(phases, t))
}

/// Adaptive Simpson quadrature of a 4x4 matrix-valued integrand, with the
/// error measured entrywise.
fn adaptive_simpson4<F: Fn(f64) -> Mat4>(f: &F, a: f64, b: f64, tol: f64) -> Result<Mat4> {
    fn axpy(out: &mut Mat4, m: &Mat4, w: f64) {
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += m[i][j] * w;
            }
        }
    }
    fn simpson(fa: &Mat4, fm: &Mat4, fb: &Mat4, h: f64) -> Mat4 {
        let mut s = zero4();
        axpy(&mut s, fa, h / 6.0);
        axpy(&mut s, fm, 4.0 * h / 6.0);
        axpy(&mut s, fb, h / 6.0);
        s
    }
    fn diff(a: &Mat4, b: &Mat4) -> f64 {
        crate::mat::max_diff4(a, b)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> Mat4>(
        f: &F,
        a: f64,
        b: f64,
        fa: &Mat4,
        fm: &Mat4,
        fb: &Mat4,
        whole: &Mat4,
        tol: f64,
        depth: u32,
        worst: &mut f64,
    ) -> Mat4 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, &flm, fm, m - a);
        let right = simpson(fm, &frm, fb, b - m);
        let mut sum = left;
        for i in 0..4 {
            for j in 0..4 {
                sum[i][j] += right[i][j];
            }
        }
        let err = diff(&sum, whole) / 15.0;
        if err <= tol || depth == 0 {
            *worst = worst.max(err);
            // Richardson extrapolation of the two estimates
            let mut out = sum;
            for i in 0..4 {
                for j in 0..4 {
                    out[i][j] += (sum[i][j] - whole[i][j]) / 15.0;
                }
            }
            return out;
        }
        let lhs = recurse(f, a, m, fa, &flm, fm, &left, 0.5 * tol, depth - 1, worst);
        let rhs = recurse(f, m, b, fm, &frm, fb, &right, 0.5 * tol, depth - 1, worst);
        let mut out = lhs;
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += rhs[i][j];
            }
        }
        out
    }

    if a == b {
        return Ok(zero4());
    }
    let fa_ = f(a);
    let fb_ = f(b);
    let fm_ = f(0.5 * (a + b));
    let whole = simpson(&fa_, &fm_, &fb_, b - a);
    let mut worst = 0.0_f64;
    let out = recurse(f, a, b, &fa_, &fm_, &fb_, &whole, tol, 24, &mut worst);
    if worst > 100.0 * tol {
        return Err(Error::QuadratureFailure { achieved: worst });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::sigma1_sigma1;
    use crate::floquet::Drive;
    use crate::mat::max_diff4;

    fn params(eps: f64, omega: f64) -> TwoLevelParams {
        TwoLevelParams::new(eps, Drive::default_with_omega(omega).unwrap()).unwrap()
    }

    fn solve(eps: f64, omega: f64) -> FloquetSolution {
        solve_floquet(params(eps, omega), Cutoff::Fixed(32), Backend::HillMatrix).unwrap()
    }

    fn system(kappa: f64, interaction: Interaction) -> CompositeSystem {
        let cp = CompositeParams::new(params(0.01, 1.0), params(0.01, 2.0), kappa, interaction)
            .unwrap();
        CompositeSystem::new(cp, Cutoff::Fixed(32), Backend::HillMatrix).unwrap()
    }

    #[test]
    fn kernel_at_zero_is_sigma1_sigma1() {
        let (sa, sb) = (solve(0.1, 1.0), solve(0.2, 2.0));
        let k = dyson_kernel(&sa, &sb);
        assert!(max_diff4(&k.kernel_at(0.0), &sigma1_sigma1()) < 1e-10);
    }

    #[test]
    fn kernel_closed_form_at_zero_epsilon() {
        // eps = 0, F0 = 0: V12(t) = exp(2i (A/omega) sin(omega t)), V11 = 0
        let s = solve(0.0, 2.0);
        let k = dyson_kernel(&s, &s);
        for t in [0.3, 1.1, 4.9] {
            let want = C64::cis(2.0 * (1.0 / 2.0) * (2.0 * t).sin());
            assert!((k.v12_a.eval(t) - want).norm() < 1e-10, "t={t}");
            assert!(k.v11_a.eval(t).norm() < 1e-10);
        }
    }

    #[test]
    fn kernel_is_self_adjoint_at_samples() {
        let (sa, sb) = (solve(0.1, 1.0), solve(0.3, 2.5));
        let k = dyson_kernel(&sa, &sb);
        for i in 0..24 {
            let t = 0.47 * i as f64;
            let m = k.kernel_at(t);
            assert!(max_diff4(&m, &crate::mat::adjoint4(&m)) < 1e-10, "t={t}");
        }
    }

    #[test]
    fn delta_v1_is_a_heaviside_step() {
        let sys = system(0.1, Interaction::Delta { t0: 0.5 });
        let v_before = v1_operator(sys.kernel(), &sys.params().interaction, 0.3).unwrap();
        assert!(max_diff4(&v_before, &zero4()) == 0.0);
        let v_at = v1_operator(sys.kernel(), &sys.params().interaction, 0.5).unwrap();
        let v_later = v1_operator(sys.kernel(), &sys.params().interaction, 40.0).unwrap();
        assert!(max_diff4(&v_at, &v_later) < 1e-14);
        assert!(max_diff4(&v_at, &sys.kernel().kernel_at(0.5)) == 0.0);
    }

    #[test]
    fn delta_v1_at_early_t0_is_sigma1_sigma1() {
        let sys = system(0.1, Interaction::Delta { t0: 1e-9 });
        let v = v1_operator(sys.kernel(), &sys.params().interaction, 1.0).unwrap();
        assert!(max_diff4(&v, &sigma1_sigma1()) < 1e-7);
    }

    #[test]
    fn periodic_v1_matches_series_antiderivative() {
        // same drive frequency on both factors, so the kernel entries are
        // series over a single fundamental and integrate in closed form
        let s = solve(0.1, 2.0);
        let k = dyson_kernel(&s, &s);
        let omega = 2.0;
        let interaction = Interaction::Periodic { omega, cos_coeffs: alloc::vec![0.3, 1.0] };
        let t = 3.7;
        let got = v1_operator(&k, &interaction, t).unwrap();

        let wa = [
            [k.v11_a.clone(), k.v12_a.clone()],
            [k.v12_a.conj(), k.v11_a.neg()],
        ];
        let cosine = QPSeries::from_terms(
            omega,
            0.0,
            1,
            [
                (0, 0, C64::new(0.3, 0.0)),
                (0, 1, C64::new(0.5, 0.0)),
                (0, -1, C64::new(0.5, 0.0)),
            ],
        );
        for i in 0..4 {
            for j in 0..4 {
                let entry = wa[i / 2][j / 2]
                    .mul(&wa[i % 2][j % 2])
                    .and_then(|p| p.mul(&cosine))
                    .unwrap();
                let want = entry.antiderivative(ZERO_FREQ_TOL).definite(0.0, t);
                assert!((got[i][j] - want).norm() < 1e-8, "({i},{j})");
            }
        }
    }

    #[test]
    fn periodic_v1_is_self_adjoint() {
        let sys = system(0.1, Interaction::None);
        let interaction = Interaction::Periodic { omega: 1.0, cos_coeffs: alloc::vec![1.0] };
        let v = v1_operator(sys.kernel(), &interaction, 5.0).unwrap();
        assert!(max_diff4(&v, &crate::mat::adjoint4(&v)) < 1e-10);
    }

    #[test]
    fn ui_reduces_to_identity_at_zero_kappa() {
        let sys = system(0.0, Interaction::Delta { t0: 0.5 });
        let ui = ui_first_order(sys.kernel(), &sys.params().interaction, 0.0, 2.0).unwrap();
        assert!(max_diff4(&ui, &identity4()) == 0.0);
    }

    #[test]
    fn ui_unitarity_defect_is_second_order() {
        let sys = system(0.1, Interaction::Delta { t0: 0.5 });
        for kappa in [0.05, 0.1, 0.2] {
            let ui = ui_first_order(sys.kernel(), &sys.params().interaction, kappa, 10.0).unwrap();
            let defect = max_diff4(&matmul4(&crate::mat::adjoint4(&ui), &ui), &identity4());
            assert!(defect <= 2.0 * kappa * kappa + 1e-8, "kappa={kappa}: {defect}");
        }
    }

    #[test]
    fn zero_kappa_phases_are_subsystem_sums() {
        let sys = system(0.0, Interaction::None);
        let t = 17.0;
        for b in BasisState::ALL {
            let r = composite_phases(&sys, b, t).unwrap();
            let (fa, fb) = b.factors();
            let ra = phases::phase_report(sys.sol_a(), &fa, Some(t)).unwrap();
            let rb = phases::phase_report(sys.sol_b(), &fb, Some(t)).unwrap();
            let mut want = ra.total + rb.total;
            // arg of a product wraps; compare on the circle
            let wrap = (r.total - want) / (2.0 * core::f64::consts::PI);
            want += wrap.round() * 2.0 * core::f64::consts::PI;
            assert!((r.total - want).abs() < 1e-10, "{b:?}");
            assert!((r.dynamical - (ra.dynamical + rb.dynamical)).abs() < 1e-10);
        }
    }

    #[test]
    fn noninteracting_antisymmetry_of_total_phases() {
        let sys = system(0.0, Interaction::None);
        let t = 23.0;
        let p: Vec<f64> = BasisState::ALL
            .iter()
            .map(|b| composite_phases(&sys, *b, t).unwrap().total)
            .collect();
        assert!((p[0] + p[3]).abs() < 1e-8);
        assert!((p[1] + p[2]).abs() < 1e-8);
    }

    #[test]
    fn periodic_coupling_rejected_by_composite_phases() {
        let sys = system(0.1, Interaction::Periodic { omega: 1.0, cos_coeffs: alloc::vec![1.0] });
        assert!(composite_phases(&sys, BasisState::B00, 1.0).is_err());
    }

    #[test]
    fn survival_starts_at_one_and_factorizes_at_zero_kappa() {
        let sys = system(0.0, Interaction::None);
        for b in BasisState::ALL {
            assert!((survival_probability(&sys, b, 0.0).unwrap() - 1.0).abs() < 1e-12);
        }
        let t = 9.0;
        let (fa, fb) = BasisState::B01.factors();
        let pa = phases::overlap(sys.sol_a(), &fa, t).norm_sqr();
        let pb = phases::overlap(sys.sol_b(), &fb, t).norm_sqr();
        let p = survival_probability(&sys, BasisState::B01, t).unwrap();
        assert!((p - pa * pb).abs() < 1e-10);
    }

    #[test]
    fn identical_factors_recur_with_the_single_system() {
        let cp = CompositeParams::new(
            params(0.1, 2.0),
            params(0.1, 2.0),
            0.0,
            Interaction::None,
        )
        .unwrap();
        let sys = CompositeSystem::new(cp, Cutoff::Fixed(32), Backend::HillMatrix).unwrap();
        let (omega, t_omega) = composite_rabi(&sys).unwrap();
        assert!((t_omega * omega - 2.0 * core::f64::consts::PI).abs() < 1e-12);
        let single = sys.sol_a().rabi_period().unwrap();
        // the trace realigns every half single-system Rabi period
        let ratio = t_omega / (0.5 * single);
        let near_int = (ratio - ratio.round()).abs();
        assert!(near_int < 0.05, "ratio={ratio}");
    }

    #[test]
    fn gate_report_conditional_phase_is_offset_invariant() {
        let base = [0.4, -0.2, 0.7, 0.1];
        let r0 = GateReport::from_phases(base, 1.0);
        // add a global phase g and single-qubit offsets (a on qubit 1, b on 2)
        let (g, a, b) = (0.3, -0.9, 0.55);
        let shifted = [
            base[0] + g + a + b,
            base[1] + g + a,
            base[2] + g + b,
            base[3] + g,
        ];
        let r1 = GateReport::from_phases(shifted, 1.0);
        assert!((r0.conditional_phase - r1.conditional_phase).abs() < 1e-12);
    }

    #[test]
    fn gate_report_b_form_detection() {
        let r = GateReport::from_phases([0.027, 0.0, 0.0, -0.027], 1.0);
        assert!(r.is_b_form);
        assert!((r.b_phi.unwrap() - 0.027).abs() < 1e-12);
        let r = GateReport::from_phases([-1.816, 1.843, -1.843, 1.816], 1.0);
        assert!(!r.is_b_form);
    }

    #[test]
    fn rejects_nonpositive_delta_time() {
        assert!(CompositeParams::new(
            params(0.1, 1.0),
            params(0.1, 2.0),
            0.1,
            Interaction::Delta { t0: 0.0 },
        )
        .is_err());
    }

    #[test]
    fn kappa_validity_flag() {
        let cp = CompositeParams::new(params(0.1, 1.0), params(0.1, 2.0), 0.25, Interaction::None)
            .unwrap();
        assert!(cp.kappa_out_of_validity());
    }
}
