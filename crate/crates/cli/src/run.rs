//! Mode orchestration: compute tables, write CSVs, emit plot data.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;

use qphase_core::floquet::{solve_floquet, Drive, TwoLevelParams};
use qphase_core::mat::max_diff2;
use qphase_core::oracle::{integrate_single, OracleConfig};
use qphase_core::phases::{self, range_grid, InitialState, PhaseReport};
use qphase_core::twoqubit::{
    composite_phases, composite_rabi, gate_extract, survival_probability, BasisState,
    CompositeParams, CompositeSystem, Interaction,
};
use qphase_core::FloquetSolution;

use crate::config::{Coupling, Mode, RunConfig};
use crate::plot::{emit_plot_data, PlotKind};
use crate::table::{fmt_f64, Cell, Table};

/// Environment variable selecting the worker-thread count.
pub const WORKERS_ENV: &str = "QPHASE_WORKERS";

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .with_context(|| format!("{WORKERS_ENV} must be a positive integer, got '{v}'"))?;
        builder = builder.num_threads(n);
    }
    Ok(builder.build()?)
}

/// Execute a validated config, writing all artifacts under `out_dir`.
/// Returns the paths written. Per-point failures are recorded in-band;
/// an error return is a systemic failure.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let pool = thread_pool()?;
    pool.install(|| dispatch(config, out_dir))
}

fn dispatch(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    match config.mode {
        Mode::SingleSweep => single_sweep(config, out_dir),
        Mode::SinglePoint => single_point(config, out_dir),
        Mode::Composite => composite(config, out_dir),
        Mode::KappaSweep => kappa_sweep(config, out_dir),
        Mode::T0Sweep => t0_sweep(config, out_dir),
        Mode::Gate => gate(config, out_dir),
        Mode::OracleCheck => oracle_check(config, out_dir),
    }
}

fn base_meta(table: &mut Table, config: &RunConfig) {
    table.meta("artifact", format!("qphase {}", env!("CARGO_PKG_VERSION")));
    table.meta("mode", config.mode.to_string());
    table.meta(
        "backend",
        match config.numerics.backend {
            crate::config::BackendSetting::Hill => "hill",
            crate::config::BackendSetting::Series => "series",
        },
    );
    table.meta(
        "cutoff",
        match &config.numerics.cutoff {
            crate::config::CutoffSetting::Fixed(m) => m.to_string(),
            crate::config::CutoffSetting::Named(s) => s.clone(),
        },
    );
    table.meta("f0", fmt_f64(config.drive.f0));
    table.meta("amplitude", fmt_f64(config.drive.amplitude));
    table.meta("seed", config.seed.to_string());
    table.meta("angles", "radians");
}

fn solve_point(
    config: &RunConfig,
    epsilon: f64,
    omega: f64,
) -> qphase_core::error::Result<FloquetSolution> {
    let drive = Drive::new(config.drive.f0, config.drive.amplitude, omega)?;
    let params = TwoLevelParams::new(epsilon, drive)?;
    solve_floquet(
        params,
        config.numerics.cutoff.to_cutoff(),
        config.numerics.backend.to_backend(),
    )
}

fn phase_columns() -> Vec<&'static str> {
    vec![
        "epsilon",
        "omega",
        "omega_rabi",
        "residual",
        "total",
        "dynamical",
        "geometric",
        "dyn_imag_residue",
        "status",
    ]
}

fn phase_row(epsilon: f64, omega: f64, outcome: &qphase_core::error::Result<(FloquetSolution, PhaseReport)>) -> Vec<Cell> {
    match outcome {
        Ok((sol, r)) => vec![
            epsilon.into(),
            omega.into(),
            sol.omega_rabi().into(),
            sol.residual().into(),
            r.total.into(),
            r.dynamical.into(),
            r.geometric.into(),
            r.dyn_imag_residue.into(),
            "ok".into(),
        ],
        Err(e) => vec![
            epsilon.into(),
            omega.into(),
            f64::NAN.into(),
            f64::NAN.into(),
            f64::NAN.into(),
            f64::NAN.into(),
            f64::NAN.into(),
            f64::NAN.into(),
            Cell::Text(e.to_string()),
        ],
    }
}

fn evaluate_point(
    config: &RunConfig,
    epsilon: f64,
    omega: f64,
) -> qphase_core::error::Result<(FloquetSolution, PhaseReport)> {
    let sol = solve_point(config, epsilon, omega)?;
    let report = phases::phase_report(&sol, &InitialState::lab_frame_zero(), None)?;
    Ok((sol, report))
}

fn single_sweep(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let g = &config.grid;
    let eps = range_grid(g.eps_start, g.eps_stop, g.eps_step);
    let omegas = range_grid(g.omega_start, g.omega_stop, g.omega_step);
    let grid: Vec<(f64, f64)> = eps
        .iter()
        .flat_map(|&e| omegas.iter().map(move |&w| (e, w)))
        .collect();
    // row order follows grid order regardless of completion order
    let rows: Vec<Vec<Cell>> = grid
        .par_iter()
        .map(|&(e, w)| phase_row(e, w, &evaluate_point(config, e, w)))
        .collect();

    let mut table = Table::new(phase_columns());
    base_meta(&mut table, config);
    table.meta("eval_time", "t_omega per point");
    for row in rows {
        table.push(row);
    }
    let csv = out_dir.join("sweep.csv");
    table.write_csv(&csv)?;
    let mut written = vec![csv];
    written.extend(emit_plot_data(&table, PlotKind::PhaseVsEps, out_dir)?);
    written.extend(emit_plot_data(&table, PlotKind::PhaseVsOmega, out_dir)?);
    written.extend(emit_plot_data(&table, PlotKind::Surface, out_dir)?);
    Ok(written)
}

fn single_point(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (e, w) = (config.point.epsilon, config.point.omega);
    let outcome = evaluate_point(config, e, w);
    let mut table = Table::new(phase_columns());
    base_meta(&mut table, config);
    if let Ok((sol, _)) = &outcome {
        if let Ok(t) = sol.rabi_period() {
            table.meta("rabi_period", fmt_f64(t));
        }
    }
    table.push(phase_row(e, w, &outcome));
    let csv = out_dir.join("point.csv");
    table.write_csv(&csv)?;
    Ok(vec![csv])
}

fn composite_system(config: &RunConfig, kappa: f64, t0: f64) -> Result<CompositeSystem> {
    let c = &config.composite;
    let da = Drive::new(config.drive.f0, config.drive.amplitude, c.omega_a)?;
    let db = Drive::new(config.drive.f0, config.drive.amplitude, c.omega_b)?;
    let pa = TwoLevelParams::new(c.eps_a, da)?;
    let pb = TwoLevelParams::new(c.eps_b, db)?;
    let interaction = match c.coupling {
        Coupling::None => Interaction::None,
        Coupling::Delta => {
            if kappa == 0.0 {
                Interaction::None
            } else {
                Interaction::Delta { t0 }
            }
        }
    };
    let cp = CompositeParams::new(pa, pb, kappa, interaction)?;
    Ok(CompositeSystem::new(
        cp,
        config.numerics.cutoff.to_cutoff(),
        config.numerics.backend.to_backend(),
    )?)
}

fn composite_meta(table: &mut Table, config: &RunConfig) {
    let c = &config.composite;
    table.meta("eps_a", fmt_f64(c.eps_a));
    table.meta("eps_b", fmt_f64(c.eps_b));
    table.meta("omega_a", fmt_f64(c.omega_a));
    table.meta("omega_b", fmt_f64(c.omega_b));
    table.meta("kappa", fmt_f64(c.kappa));
    table.meta("t0", fmt_f64(c.t0));
    if c.kappa.abs() > qphase_core::twoqubit::KAPPA_VALIDITY_CEILING {
        table.meta("warning", "kappa exceeds the first-order validity ceiling 0.2");
    }
}

fn composite(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let sys = composite_system(config, config.composite.kappa, config.composite.t0)?;
    let (omega_rabi, t_rabi) = composite_rabi(&sys)?;
    let dt = sys.t_omega_max();
    let n = (1.15 * t_rabi / dt).ceil() as usize;
    let mut table = Table::new(vec!["t", "t_over_tw", "p00", "p01", "p10", "p11"]);
    base_meta(&mut table, config);
    composite_meta(&mut table, config);
    table.meta("omega_rabi", fmt_f64(omega_rabi));
    table.meta("rabi_period", fmt_f64(t_rabi));
    let rows: Vec<Vec<Cell>> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 * dt;
            let mut row: Vec<Cell> = vec![t.into(), (t / dt).into()];
            for b in BasisState::ALL {
                let p = survival_probability(&sys, b, t).unwrap_or(f64::NAN);
                row.push(p.into());
            }
            row
        })
        .collect();
    for row in rows {
        table.push(row);
    }
    let csv = out_dir.join("composite.csv");
    table.write_csv(&csv)?;
    let mut written = vec![csv];
    written.extend(emit_plot_data(&table, PlotKind::ProbabilityVsTime, out_dir)?);
    Ok(written)
}

fn composite_phase_row(
    sys_or_err: &Result<CompositeSystem>,
    x: f64,
    t: f64,
) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![x.into()];
    match sys_or_err {
        Ok(sys) => {
            let mut status = "ok".to_string();
            let mut phis = [f64::NAN; 4];
            for (i, b) in BasisState::ALL.iter().enumerate() {
                match composite_phases(sys, *b, t) {
                    Ok(r) => phis[i] = r.total,
                    Err(e) => status = e.to_string(),
                }
            }
            for p in phis {
                row.push(p.into());
            }
            let cond = phis[0] - phis[1] - phis[2] + phis[3];
            row.push(cond.into());
            row.push(Cell::Text(status));
        }
        Err(e) => {
            for _ in 0..5 {
                row.push(f64::NAN.into());
            }
            row.push(Cell::Text(e.to_string()));
        }
    }
    row
}

fn kappa_sweep(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    // evaluation time fixed by the configured coupling so rows are comparable
    let reference = composite_system(config, config.composite.kappa, config.composite.t0)?;
    let (_, t_rabi) = composite_rabi(&reference)?;
    let kappas = range_grid(
        config.kappa_sweep.start,
        config.kappa_sweep.stop,
        config.kappa_sweep.step,
    );
    let rows: Vec<Vec<Cell>> = kappas
        .par_iter()
        .map(|&k| {
            let sys = composite_system(config, k, config.composite.t0);
            composite_phase_row(&sys, k, t_rabi)
        })
        .collect();
    let mut table = Table::new(vec![
        "kappa",
        "phi00",
        "phi01",
        "phi10",
        "phi11",
        "conditional_phase",
        "status",
    ]);
    base_meta(&mut table, config);
    composite_meta(&mut table, config);
    table.meta("eval_time", fmt_f64(t_rabi));
    for row in rows {
        table.push(row);
    }
    let csv = out_dir.join("kappa_sweep.csv");
    table.write_csv(&csv)?;
    let mut written = vec![csv];
    written.extend(emit_plot_data(&table, PlotKind::PhaseVsKappa, out_dir)?);
    Ok(written)
}

fn t0_sweep(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let reference = composite_system(config, config.composite.kappa, config.composite.t0)?;
    let (_, t_rabi) = composite_rabi(&reference)?;
    let t0s = range_grid(config.t0_sweep.start, config.t0_sweep.stop, config.t0_sweep.step);
    let rows: Vec<Vec<Cell>> = t0s
        .par_iter()
        .map(|&t0| {
            let sys = composite_system(config, config.composite.kappa, t0);
            composite_phase_row(&sys, t0, t_rabi)
        })
        .collect();
    let mut table = Table::new(vec![
        "t0",
        "phi00",
        "phi01",
        "phi10",
        "phi11",
        "conditional_phase",
        "status",
    ]);
    base_meta(&mut table, config);
    composite_meta(&mut table, config);
    table.meta("eval_time", fmt_f64(t_rabi));
    for row in rows {
        table.push(row);
    }
    let csv = out_dir.join("t0_sweep.csv");
    table.write_csv(&csv)?;
    let mut written = vec![csv];
    written.extend(emit_plot_data(&table, PlotKind::PhaseVsT0, out_dir)?);
    Ok(written)
}

fn gate(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let sys = composite_system(config, config.composite.kappa, config.composite.t0)?;
    let report = gate_extract(&sys, None)?;
    let mut table = Table::new(vec![
        "omega_a",
        "omega_b",
        "kappa",
        "t0",
        "eval_time",
        "phi00",
        "phi01",
        "phi10",
        "phi11",
        "is_b_form",
        "b_phi",
        "conditional_phase",
    ]);
    base_meta(&mut table, config);
    composite_meta(&mut table, config);
    table.push(vec![
        config.composite.omega_a.into(),
        config.composite.omega_b.into(),
        config.composite.kappa.into(),
        config.composite.t0.into(),
        report.eval_time.into(),
        report.phases[0].into(),
        report.phases[1].into(),
        report.phases[2].into(),
        report.phases[3].into(),
        (if report.is_b_form { 1.0 } else { 0.0 }).into(),
        report.b_phi.unwrap_or(f64::NAN).into(),
        report.conditional_phase.into(),
    ]);
    let csv = out_dir.join("gate.csv");
    table.write_csv(&csv)?;
    Ok(vec![csv])
}

fn oracle_check(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let (e, w) = (config.point.epsilon, config.point.omega);
    let sol = solve_point(config, e, w)?;
    let tw = sol.params().drive.t_omega();
    let ts: Vec<f64> = (1..=100).map(|i| 50.0 * tw * i as f64 / 100.0).collect();
    let cfg = OracleConfig { rel_tol: config.numerics.oracle_tol, ..OracleConfig::default() };
    let us = integrate_single(*sol.params(), &ts, cfg)?;
    let mut table = Table::new(vec!["t", "deviation"]);
    base_meta(&mut table, config);
    table.meta("epsilon", fmt_f64(e));
    table.meta("omega", fmt_f64(w));
    table.meta("oracle_tol", fmt_f64(config.numerics.oracle_tol));
    let mut worst = 0.0_f64;
    for (t, u) in ts.iter().zip(&us) {
        let d = max_diff2(&sol.evolution_operator_at(*t), u);
        worst = worst.max(d);
        table.push(vec![(*t).into(), d.into()]);
    }
    table.meta("max_deviation", fmt_f64(worst));
    let csv = out_dir.join("oracle_check.csv");
    table.write_csv(&csv)?;
    Ok(vec![csv])
}
