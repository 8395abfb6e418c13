//! Plot-ready series: one two-column CSV per curve (policy), with the x and y
//! columns named after the figure's axes.

use std::fmt;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{AggregateRow, HarnessError, ResultTable};
use crate::policies::PolicyId;

/// Figures with a fixed series schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    /// Fig. 6 analogue: `n_tasks` vs `c_drop`.
    Fig6,
    /// Fig. 7 analogue: `n_bs` vs `c_drop`.
    Fig7,
    /// Fig. 8 analogue: `slack` vs `c_drop`.
    Fig8,
    /// Fig. 9 analogue: `hard_ratio` vs `c_drop`.
    Fig9,
    /// Trace analogue of the tasks/BS combinations: `n_tasks` vs `c_total`.
    TraceTasks,
    /// Trace slack figure: `slack` vs `c_total`.
    TraceSlack,
    /// Trace hard-proportion figure: `hard_ratio` vs `c_total`.
    TraceRatio,
    /// The four proposed `(Û^max, D̂^max)` variants: `u_hat_x_d_hat` vs `c_total`.
    TraceVariants,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
        FigureId::Fig9,
        FigureId::TraceTasks,
        FigureId::TraceSlack,
        FigureId::TraceRatio,
        FigureId::TraceVariants,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
            FigureId::TraceTasks => "trace_tasks",
            FigureId::TraceSlack => "trace_slack",
            FigureId::TraceRatio => "trace_ratio",
            FigureId::TraceVariants => "trace_variants",
        }
    }

    /// Name of the x column; equals the plan axis the figure needs.
    pub fn x_column(self) -> &'static str {
        match self {
            FigureId::Fig6 | FigureId::TraceTasks => "n_tasks",
            FigureId::Fig7 => "n_bs",
            FigureId::Fig8 | FigureId::TraceSlack => "slack",
            FigureId::Fig9 | FigureId::TraceRatio => "hard_ratio",
            FigureId::TraceVariants => "u_hat_x_d_hat",
        }
    }

    /// Name of the y column.
    pub fn y_column(self) -> &'static str {
        match self {
            FigureId::Fig6 | FigureId::Fig7 | FigureId::Fig8 | FigureId::Fig9 => "c_drop",
            _ => "c_total",
        }
    }

    fn y(self, a: &AggregateRow) -> f64 {
        match self.y_column() {
            "c_drop" => a.c_drop,
            _ => a.c_total,
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                HarnessError::Plan(format!(
                    "unknown figure id `{s}` (expected one of {})",
                    FigureId::ALL.map(|f| f.name()).join(", ")
                ))
            })
    }
}

/// One curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub figure: FigureId,
    pub policy: PolicyId,
    /// `<figure>_<policy>.csv`.
    pub file_name: String,
    pub csv: String,
}

impl PlotSeries {
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, HarnessError> {
        std::fs::create_dir_all(dir)?;
        let p = dir.join(&self.file_name);
        std::fs::write(&p, &self.csv)?;
        Ok(p)
    }
}

/// Mean-over-seeds series for `figure_id`, one per policy in the table.
pub fn emit_plot_data(
    table: &ResultTable,
    figure_id: &str,
) -> Result<Vec<PlotSeries>, HarnessError> {
    let figure: FigureId = figure_id.parse()?;
    if table.axis != figure.x_column() {
        return Err(HarnessError::Plan(format!(
            "figure {figure} needs a {} sweep, table sweeps {}",
            figure.x_column(),
            table.axis
        )));
    }
    let agg = table.aggregate();
    Ok(table
        .policies()
        .into_iter()
        .map(|policy| {
            let mut csv = format!("{},{}\n", figure.x_column(), figure.y_column());
            for a in agg.iter().filter(|a| a.policy == policy) {
                let _ = writeln!(csv, "{},{}", a.value, figure.y(a));
            }
            PlotSeries {
                figure,
                policy,
                file_name: format!("{}_{}.csv", figure.name(), policy.name()),
                csv,
            }
        })
        .collect())
}
