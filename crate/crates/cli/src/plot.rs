//! Plot-ready data files: plain space-delimited columns with `#` headers,
//! suitable for gnuplot or numpy.loadtxt.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};

use crate::table::{fmt_f64, Cell, Table};

/// The slice of a results table a plot file should carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Phases against epsilon, one file per omega value.
    PhaseVsEps,
    /// Phases against omega, one file per epsilon value.
    PhaseVsOmega,
    /// The full (epsilon, omega, total) grid in one file.
    Surface,
    /// Survival probabilities against time.
    ProbabilityVsTime,
    /// Composite phases against the coupling strength.
    PhaseVsKappa,
    /// Composite phases against the kick time.
    PhaseVsT0,
}

impl PlotKind {
    fn stem(self) -> &'static str {
        match self {
            PlotKind::PhaseVsEps => "phase_vs_eps",
            PlotKind::PhaseVsOmega => "phase_vs_omega",
            PlotKind::Surface => "surface",
            PlotKind::ProbabilityVsTime => "probability_vs_time",
            PlotKind::PhaseVsKappa => "phase_vs_kappa",
            PlotKind::PhaseVsT0 => "phase_vs_t0",
        }
    }

    /// Columns copied into the data file, in order.
    fn columns(self) -> &'static [&'static str] {
        match self {
            PlotKind::PhaseVsEps => &["epsilon", "total", "dynamical", "geometric"],
            PlotKind::PhaseVsOmega => &["omega", "total", "dynamical", "geometric"],
            PlotKind::Surface => &["epsilon", "omega", "total"],
            PlotKind::ProbabilityVsTime => &["t_over_tw", "p00", "p01", "p10", "p11"],
            PlotKind::PhaseVsKappa => &["kappa", "phi00", "phi01", "phi10", "phi11", "conditional_phase"],
            PlotKind::PhaseVsT0 => &["t0", "phi00", "phi01", "phi10", "phi11", "conditional_phase"],
        }
    }

    /// Column whose distinct values split the table into separate files.
    fn group_by(self) -> Option<&'static str> {
        match self {
            PlotKind::PhaseVsEps => Some("omega"),
            PlotKind::PhaseVsOmega => Some("epsilon"),
            _ => None,
        }
    }
}

fn header(kind: PlotKind) -> String {
    let mut s = String::from("#");
    for c in kind.columns() {
        let _ = write!(s, " {c}");
    }
    s.push('\n');
    s
}

/// A compact label for a grouping value, safe in a file name.
fn group_label(v: f64) -> String {
    format!("{v}").replace('-', "m").replace('.', "p")
}

/// Extract the numeric columns `kind` needs from `table` and write them
/// under `dir`. Rows carrying a non-numeric cell in a needed column
/// (failed points) are skipped. Returns the paths written.
pub fn emit_plot_data(table: &Table, kind: PlotKind, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut indices = Vec::new();
    for name in kind.columns() {
        match table.column_index(name) {
            Some(i) => indices.push(i),
            None => bail!("table lacks column '{name}' required for {} data", kind.stem()),
        }
    }
    let group_idx = match kind.group_by() {
        Some(name) => match table.column_index(name) {
            Some(i) => Some(i),
            None => bail!("table lacks column '{name}' required for {} data", kind.stem()),
        },
        None => None,
    };

    // (group value or NaN-free key, body) in first-seen order
    let mut groups: Vec<(Option<f64>, String)> = Vec::new();
    'rows: for row in &table.rows {
        let key = match group_idx {
            Some(gi) => match &row[gi] {
                Cell::Num(v) if v.is_finite() => Some(*v),
                _ => continue,
            },
            None => None,
        };
        let mut line = String::new();
        for (pos, &ci) in indices.iter().enumerate() {
            let v = match &row[ci] {
                Cell::Num(v) => *v,
                Cell::Text(_) => continue 'rows,
            };
            if pos > 0 {
                line.push(' ');
            }
            line.push_str(&fmt_f64(v));
        }
        line.push('\n');
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, body)) => body.push_str(&line),
            None => {
                let mut body = header(kind);
                body.push_str(&line);
                groups.push((key, body));
            }
        }
    }
    if groups.is_empty() {
        // nothing survived filtering: still leave a header-only file behind
        groups.push((None, header(kind)));
    }

    let mut written = Vec::new();
    for (key, body) in groups {
        let name = match key {
            Some(v) => format!("{}_{}_{}.dat", kind.stem(), kind.group_by().unwrap(), group_label(v)),
            None => format!("{}.dat", kind.stem()),
        };
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
