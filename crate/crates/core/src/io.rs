//! CSV formats for trajectories, risk reports, baselines, sweeps and plot data.
//!
//! Reals are written in scientific notation with 17 significant digits, which
//! parses back to the identical `f64`. An undefined Chair-Varshney risk is an
//! empty cell.

use std::io::{BufRead, Write};

use crate::dynamics::Population;
use crate::error::{Error, Result};
use crate::experiments::SweepRecord;
use crate::fusion::{BaselineRisks, RiskReport};

pub const TRAJECTORY_HEADER: &[&str] = &["step", "agent_index", "weight"];
pub const RISK_REPORT_HEADER: &[&str] = &[
    "sigma",
    "aggregate_risk",
    "centralized_risk",
    "optimal_majority_risk",
    "chair_varshney_risk",
    "aggregate_bre",
];
pub const BASELINE_HEADER: &[&str] = &[
    "sigma",
    "centralized_risk",
    "optimal_majority_risk",
    "chair_varshney_risk",
];
pub const SWEEP_HEADER: &[&str] = &[
    "sigma",
    "mean_clusters",
    "std_clusters",
    "mean_steps",
    "std_steps",
    "mean_aggregate_risk",
    "std_aggregate_risk",
    "centralized_risk",
    "optimal_majority_risk",
    "chair_varshney_risk",
    "mean_aggregate_bre",
    "std_aggregate_bre",
];
pub const PLOT_HEADER: &[&str] = &["sigma", "mean", "std"];
pub const DIVERGENCE_HEADER: &[&str] = &["p", "a", "divergence"];

/// 17 significant digits, e.g. `4.5000000000000000e-1`.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_optional(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

fn write_row<W: Write + ?Sized>(w: &mut W, cells: &[String]) -> Result<()> {
    writeln!(w, "{}", cells.join(","))?;
    Ok(())
}

fn write_header<W: Write + ?Sized>(w: &mut W, header: &[&str]) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    Ok(())
}

struct Row {
    line: usize,
    cells: Vec<String>,
}

impl Row {
    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::Csv {
            line: self.line,
            reason: reason.into(),
        }
    }

    fn real(&self, col: usize) -> Result<f64> {
        let s = &self.cells[col];
        s.parse::<f64>()
            .map_err(|_| self.fail(format!("column {} is not a number: `{s}`", col + 1)))
    }

    fn optional_real(&self, col: usize) -> Result<Option<f64>> {
        if self.cells[col].is_empty() {
            Ok(None)
        } else {
            self.real(col).map(Some)
        }
    }

    fn index(&self, col: usize) -> Result<usize> {
        let s = &self.cells[col];
        s.parse::<usize>()
            .map_err(|_| self.fail(format!("column {} is not an index: `{s}`", col + 1)))
    }
}

fn read_table<R: BufRead>(reader: R, header: &[&str]) -> Result<Vec<Row>> {
    let mut lines = reader.lines();
    let first = lines.next().transpose()?.ok_or_else(|| Error::Csv {
        line: 1,
        reason: "missing header".into(),
    })?;
    if first.trim_end() != header.join(",") {
        return Err(Error::Csv {
            line: 1,
            reason: format!("expected header `{}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
        let row = Row {
            line: idx + 2,
            cells,
        };
        if row.cells.len() != header.len() {
            return Err(row.fail(format!(
                "expected {} columns, found {}",
                header.len(),
                row.cells.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// One row per agent per step.
pub fn write_trajectory<W: Write + ?Sized>(w: &mut W, snapshots: &[Population]) -> Result<()> {
    write_header(w, TRAJECTORY_HEADER)?;
    for (step, pop) in snapshots.iter().enumerate() {
        for (agent, &weight) in pop.weights().iter().enumerate() {
            write_row(
                w,
                &[step.to_string(), agent.to_string(), format_real(weight)],
            )?;
        }
    }
    Ok(())
}

pub fn read_trajectory<R: BufRead>(reader: R) -> Result<Vec<Population>> {
    let mut snapshots: Vec<Vec<f64>> = Vec::new();
    for row in read_table(reader, TRAJECTORY_HEADER)? {
        let step = row.index(0)?;
        let agent = row.index(1)?;
        let weight = row.real(2)?;
        if step == snapshots.len() {
            snapshots.push(Vec::new());
        }
        if step + 1 != snapshots.len() || agent != snapshots[step].len() {
            return Err(row.fail("rows must be ordered by step, then agent index"));
        }
        snapshots[step].push(weight);
    }
    snapshots
        .into_iter()
        .map(Population::new)
        .collect::<Result<Vec<_>>>()
}

pub fn write_risk_reports<W: Write + ?Sized>(w: &mut W, rows: &[(f64, RiskReport)]) -> Result<()> {
    write_header(w, RISK_REPORT_HEADER)?;
    for (sigma, r) in rows {
        write_row(
            w,
            &[
                format_real(*sigma),
                format_real(r.aggregate_risk),
                format_real(r.centralized_risk),
                format_real(r.optimal_majority_risk),
                format_optional(r.chair_varshney_risk),
                format_real(r.aggregate_bre),
            ],
        )?;
    }
    Ok(())
}

pub fn read_risk_reports<R: BufRead>(reader: R) -> Result<Vec<(f64, RiskReport)>> {
    read_table(reader, RISK_REPORT_HEADER)?
        .iter()
        .map(|row| {
            Ok((
                row.real(0)?,
                RiskReport {
                    aggregate_risk: row.real(1)?,
                    centralized_risk: row.real(2)?,
                    optimal_majority_risk: row.real(3)?,
                    chair_varshney_risk: row.optional_real(4)?,
                    aggregate_bre: row.real(5)?,
                },
            ))
        })
        .collect()
}

pub fn write_baselines<W: Write + ?Sized>(w: &mut W, rows: &[(f64, BaselineRisks)]) -> Result<()> {
    write_header(w, BASELINE_HEADER)?;
    for (sigma, b) in rows {
        write_row(
            w,
            &[
                format_real(*sigma),
                format_real(b.centralized_risk),
                format_real(b.optimal_majority_risk),
                format_optional(b.chair_varshney_risk),
            ],
        )?;
    }
    Ok(())
}

pub fn read_baselines<R: BufRead>(reader: R) -> Result<Vec<(f64, BaselineRisks)>> {
    read_table(reader, BASELINE_HEADER)?
        .iter()
        .map(|row| {
            Ok((
                row.real(0)?,
                BaselineRisks {
                    centralized_risk: row.real(1)?,
                    optimal_majority_risk: row.real(2)?,
                    chair_varshney_risk: row.optional_real(3)?,
                },
            ))
        })
        .collect()
}

pub fn write_sweep<W: Write + ?Sized>(w: &mut W, records: &[SweepRecord]) -> Result<()> {
    write_header(w, SWEEP_HEADER)?;
    for r in records {
        write_row(
            w,
            &[
                format_real(r.sigma),
                format_real(r.mean_clusters),
                format_real(r.std_clusters),
                format_real(r.mean_steps),
                format_real(r.std_steps),
                format_real(r.mean_aggregate_risk),
                format_real(r.std_aggregate_risk),
                format_real(r.centralized_risk),
                format_real(r.optimal_majority_risk),
                format_optional(r.chair_varshney_risk),
                format_real(r.mean_aggregate_bre),
                format_real(r.std_aggregate_bre),
            ],
        )?;
    }
    Ok(())
}

pub fn read_sweep<R: BufRead>(reader: R) -> Result<Vec<SweepRecord>> {
    read_table(reader, SWEEP_HEADER)?
        .iter()
        .map(|row| {
            Ok(SweepRecord {
                sigma: row.real(0)?,
                mean_clusters: row.real(1)?,
                std_clusters: row.real(2)?,
                mean_steps: row.real(3)?,
                std_steps: row.real(4)?,
                mean_aggregate_risk: row.real(5)?,
                std_aggregate_risk: row.real(6)?,
                centralized_risk: row.real(7)?,
                optimal_majority_risk: row.real(8)?,
                chair_varshney_risk: row.optional_real(9)?,
                mean_aggregate_bre: row.real(10)?,
                std_aggregate_bre: row.real(11)?,
            })
        })
        .collect()
}

/// A plotted quantity: x = σ, y = mean, yerr = standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotPoint {
    pub sigma: f64,
    pub mean: f64,
    pub std: f64,
}

/// Splits sweep records into one series per plotted quantity, keyed by a
/// file-name-friendly name. Baselines carry zero spread; an undefined
/// Chair-Varshney point is left out of its series.
pub fn plot_series(records: &[SweepRecord]) -> Vec<(&'static str, Vec<PlotPoint>)> {
    let series = |f: &dyn Fn(&SweepRecord) -> Option<(f64, f64)>| -> Vec<PlotPoint> {
        records
            .iter()
            .filter_map(|r| {
                f(r).map(|(mean, std)| PlotPoint {
                    sigma: r.sigma,
                    mean,
                    std,
                })
            })
            .collect()
    };
    vec![
        (
            "clusters",
            series(&|r| Some((r.mean_clusters, r.std_clusters))),
        ),
        ("steps", series(&|r| Some((r.mean_steps, r.std_steps)))),
        (
            "aggregate_risk",
            series(&|r| Some((r.mean_aggregate_risk, r.std_aggregate_risk))),
        ),
        (
            "centralized_risk",
            series(&|r| Some((r.centralized_risk, 0.0))),
        ),
        (
            "optimal_majority_risk",
            series(&|r| Some((r.optimal_majority_risk, 0.0))),
        ),
        (
            "chair_varshney_risk",
            series(&|r| r.chair_varshney_risk.map(|v| (v, 0.0))),
        ),
        (
            "aggregate_bre",
            series(&|r| Some((r.mean_aggregate_bre, r.std_aggregate_bre))),
        ),
    ]
}

pub fn write_plot_data<W: Write + ?Sized>(w: &mut W, points: &[PlotPoint]) -> Result<()> {
    write_header(w, PLOT_HEADER)?;
    for p in points {
        write_row(
            w,
            &[
                format_real(p.sigma),
                format_real(p.mean),
                format_real(p.std),
            ],
        )?;
    }
    Ok(())
}

pub fn read_plot_data<R: BufRead>(reader: R) -> Result<Vec<PlotPoint>> {
    read_table(reader, PLOT_HEADER)?
        .iter()
        .map(|row| {
            Ok(PlotPoint {
                sigma: row.real(0)?,
                mean: row.real(1)?,
                std: row.real(2)?,
            })
        })
        .collect()
}

pub fn write_divergence_grid<W: Write + ?Sized>(w: &mut W, rows: &[(f64, f64, f64)]) -> Result<()> {
    write_header(w, DIVERGENCE_HEADER)?;
    for &(p, a, d) in rows {
        write_row(w, &[format_real(p), format_real(a), format_real(d)])?;
    }
    Ok(())
}

pub fn read_divergence_grid<R: BufRead>(reader: R) -> Result<Vec<(f64, f64, f64)>> {
    read_table(reader, DIVERGENCE_HEADER)?
        .iter()
        .map(|row| Ok((row.real(0)?, row.real(1)?, row.real(2)?)))
        .collect()
}
