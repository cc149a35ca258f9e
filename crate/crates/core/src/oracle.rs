//! Brute-force reference propagator.
//!
//! Adaptive Dormand-Prince 5(4) integration of `i dU/dt = H(t) U` for the
//! single 2x2 system and the composite 4x4 system. The delta interaction is
//! never integrated as a narrow bump: it is applied as the exact unitary kick
//! `exp(-i*kappa*s1(x)s1)`, giving an all-orders-in-kappa reference. This
//! module exists for cross-validation only and is never used by the series
//! pipeline.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::floquet::TwoLevelParams;
use crate::mat::{identity4, Mat2, Mat4};
use crate::twoqubit::{CompositeParams, Interaction};
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size; clamped to `t_omega/20` internally.
    pub max_step: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { rel_tol: 1e-12, abs_tol: 1e-14, max_step: f64::INFINITY }
    }
}

// Dormand-Prince 5(4) tableau
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Dopri<'a> {
    rhs: &'a dyn Fn(f64, &[C64], &mut [C64]),
    cfg: OracleConfig,
    t: f64,
    y: Vec<C64>,
    h: f64,
    k1: Vec<C64>,
    fresh_k1: bool,
}

impl<'a> Dopri<'a> {
    fn new(rhs: &'a dyn Fn(f64, &[C64], &mut [C64]), cfg: OracleConfig, y0: Vec<C64>) -> Self {
        let n = y0.len();
        Dopri {
            rhs,
            cfg,
            t: 0.0,
            y: y0,
            h: cfg.max_step.min(1e-3),
            k1: vec![C64::new(0.0, 0.0); n],
            fresh_k1: false,
        }
    }

    /// Advance to exactly `t_end`.
    fn advance_to(&mut self, t_end: f64) -> Result<()> {
        let n = self.y.len();
        let mut stages = vec![vec![C64::new(0.0, 0.0); n]; 7];
        let mut ytmp = vec![C64::new(0.0, 0.0); n];
        let mut y5 = vec![C64::new(0.0, 0.0); n];

        while self.t < t_end {
            let mut h = self.h.min(self.cfg.max_step).min(t_end - self.t);
            if h < 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::IntegrationFailure { t: self.t });
            }
            if !self.fresh_k1 {
                (self.rhs)(self.t, &self.y, &mut self.k1);
                self.fresh_k1 = true;
            }
            stages[0].copy_from_slice(&self.k1);

            loop {
                for s in 1..7 {
                    for i in 0..n {
                        let mut acc = C64::new(0.0, 0.0);
                        for (j, st) in stages.iter().take(s).enumerate() {
                            let a = if s < 6 { A[s - 1][j] } else { B5[j] };
                            if a != 0.0 {
                                acc += st[i] * a;
                            }
                        }
                        ytmp[i] = self.y[i] + acc * h;
                    }
                    let ts = self.t + if s < 6 { C[s - 1] * h } else { h };
                    let (head, tail) = stages.split_at_mut(s);
                    let _ = head;
                    (self.rhs)(ts, &ytmp, &mut tail[0]);
                }
                // 5th-order solution and embedded error estimate
                let mut err = 0.0_f64;
                for i in 0..n {
                    let mut acc5 = C64::new(0.0, 0.0);
                    let mut acc4 = C64::new(0.0, 0.0);
                    for j in 0..7 {
                        if B5[j] != 0.0 {
                            acc5 += stages[j][i] * B5[j];
                        }
                        if B4[j] != 0.0 {
                            acc4 += stages[j][i] * B4[j];
                        }
                    }
                    y5[i] = self.y[i] + acc5 * h;
                    let sc = self.cfg.abs_tol
                        + self.cfg.rel_tol * self.y[i].norm().max(y5[i].norm());
                    let e = ((acc5 - acc4) * h).norm() / sc;
                    err += e * e;
                }
                let err = (err / n as f64).sqrt();
                if err <= 1.0 {
                    self.t += h;
                    self.y.copy_from_slice(&y5);
                    // FSAL: stage 7 is k1 of the next step
                    self.k1.copy_from_slice(&stages[6]);
                    self.fresh_k1 = true;
                    let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
                    self.h = h * fac;
                    break;
                }
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                h *= fac;
                if h < 1e-14 * self.t.abs().max(1.0) {
                    return Err(Error::IntegrationFailure { t: self.t });
                }
            }
        }
        Ok(())
    }
}

fn single_rhs(params: TwoLevelParams) -> impl Fn(f64, &[C64], &mut [C64]) {
    move |t, y, dy| {
        let f = params.drive.eval(t);
        let e = params.epsilon;
        // dU = -i H U, row-major 2x2; H = [[f, e], [e, -f]]
        for col in 0..2 {
            let u0 = y[col];
            let u1 = y[2 + col];
            dy[col] = C64::new(0.0, -1.0) * (u0 * f + u1 * e);
            dy[2 + col] = C64::new(0.0, -1.0) * (u0 * e - u1 * f);
        }
    }
}

fn composite_rhs(params: CompositeParams) -> impl Fn(f64, &[C64], &mut [C64]) {
    move |t, y, dy| {
        let fa = params.sys_a.drive.eval(t);
        let fb = params.sys_b.drive.eval(t);
        let ea = params.sys_a.epsilon;
        let eb = params.sys_b.epsilon;
        let kv = match &params.interaction {
            Interaction::Periodic { omega, cos_coeffs } => {
                let v: f64 = cos_coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * (j as f64 * omega * t).cos())
                    .sum();
                params.kappa * v
            }
            _ => 0.0,
        };
        // H = Ha(x)I + I(x)Hb + kv*s1(x)s1, rotated frame
        let diag = [fa + fb, fa - fb, -fa + fb, -fa - fb];
        for col in 0..4 {
            let u: [C64; 4] = [y[col], y[4 + col], y[8 + col], y[12 + col]];
            let h_u = [
                u[0] * diag[0] + u[1] * eb + u[2] * ea + u[3] * kv,
                u[0] * eb + u[1] * diag[1] + u[2] * kv + u[3] * ea,
                u[0] * ea + u[1] * kv + u[2] * diag[2] + u[3] * eb,
                u[0] * kv + u[1] * ea + u[2] * eb + u[3] * diag[3],
            ];
            for row in 0..4 {
                dy[4 * row + col] = C64::new(0.0, -1.0) * h_u[row];
            }
        }
    }
}

fn clamp_cfg(cfg: OracleConfig, t_omega_min: f64) -> OracleConfig {
    OracleConfig { max_step: cfg.max_step.min(t_omega_min / 20.0), ..cfg }
}

/// Exact delta-kick unitary `exp(-i*kappa*s1(x)s1) = cos(kappa)*I - i*sin(kappa)*s1(x)s1`.
pub fn kick_matrix(kappa: f64) -> Mat4 {
    let mut out = identity4();
    let (s, c) = kappa.sin_cos();
    let ss = crate::mat::sigma1_sigma1();
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = out[i][j] * c + ss[i][j] * C64::new(0.0, -s);
        }
    }
    out
}

/// Propagator of the single system sampled on `t_grid` (ascending, from 0).
pub fn integrate_single(
    params: TwoLevelParams,
    t_grid: &[f64],
    cfg: OracleConfig,
) -> Result<Vec<Mat2>> {
    let cfg = clamp_cfg(cfg, params.drive.t_omega());
    let rhs = single_rhs(params);
    let y0 = vec![
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
    ];
    let mut solver = Dopri::new(&rhs, cfg, y0);
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        solver.advance_to(t)?;
        out.push([
            [solver.y[0], solver.y[1]],
            [solver.y[2], solver.y[3]],
        ]);
    }
    Ok(out)
}

/// Propagator of the composite system sampled on `t_grid`; the delta
/// interaction is applied as the exact kick at `t0`.
pub fn integrate_composite(
    params: CompositeParams,
    t_grid: &[f64],
    cfg: OracleConfig,
) -> Result<Vec<Mat4>> {
    let t_omega_min = params.sys_a.drive.t_omega().min(params.sys_b.drive.t_omega());
    let cfg = clamp_cfg(cfg, t_omega_min);
    let t_end = t_grid.last().copied().unwrap_or(0.0);
    let kick_at = match params.interaction {
        Interaction::Delta { t0 } => {
            if !(t0 > 0.0 && t0 < t_end) {
                return Err(Error::Domain { field: "t0", reason: "must satisfy 0 < t0 < t_end" });
            }
            Some(t0)
        }
        _ => None,
    };
    let kick = kick_matrix(params.kappa);
    let rhs = composite_rhs(params);
    let mut y0 = vec![C64::new(0.0, 0.0); 16];
    for i in 0..4 {
        y0[4 * i + i] = C64::new(1.0, 0.0);
    }
    let mut solver = Dopri::new(&rhs, cfg, y0);
    let mut kicked = kick_at.is_none();
    let mut out = Vec::with_capacity(t_grid.len());
    let apply_kick = |y: &mut [C64]| {
        let mut u = [[C64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                u[i][j] = y[4 * i + j];
            }
        }
        let ku = crate::mat::matmul4(&kick, &u);
        for i in 0..4 {
            for j in 0..4 {
                y[4 * i + j] = ku[i][j];
            }
        }
    };
    for &t in t_grid {
        if let Some(t0) = kick_at {
            if !kicked && t >= t0 {
                solver.advance_to(t0)?;
                apply_kick(&mut solver.y);
                solver.fresh_k1 = false;
                kicked = true;
            }
        }
        solver.advance_to(t)?;
        let mut u = [[C64::new(0.0, 0.0); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                u[i][j] = solver.y[4 * i + j];
            }
        }
        out.push(u);
    }
    Ok(out)
}
