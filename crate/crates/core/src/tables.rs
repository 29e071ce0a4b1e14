//! The six bundled benchmark tables over the reference sets: both
//! derivative estimators on a fine grid, value curves reconstructed by
//! integration, the directly simulated value, and (where applicable) the
//! large-beta limit column and adjusted values.

use crate::curves::integrate_row;
use crate::error::{Error, Result};
use crate::estimators::{adjusted_value, Functional};
use crate::model::{ComparisonInstance, EstimatorResult};
use crate::montecarlo::{estimate_curve, SamplerConfig};
use crate::report::{CsvReport, SCHEMA_VERSION};

/// Spacing of the fine derivative grid used for curve reconstruction. The
/// coarse 0.1 steps of the emitted rows sit on this grid.
pub const FINE_STEP_DEN: usize = 100;

/// Default lifting exponent of the lifted tables.
pub const TABLE_C3: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TablePreset {
    pub id: u8,
    pub beta: f64,
    pub s: f64,
    pub c3: Option<f64>,
    pub n_samples: usize,
    pub has_limit: bool,
}

impl TablePreset {
    pub fn lifted(&self) -> bool {
        self.c3.is_some()
    }
}

/// Parameters of tables 1 through 6.
pub fn preset(id: u8) -> Result<TablePreset> {
    let p = match id {
        1 => TablePreset { id, beta: 3.0, s: 1.0, c3: None, n_samples: 50_000, has_limit: false },
        2 => TablePreset { id, beta: 3.0, s: -1.0, c3: None, n_samples: 50_000, has_limit: false },
        3 => TablePreset { id, beta: 10.0, s: 1.0, c3: None, n_samples: 50_000, has_limit: true },
        4 => TablePreset { id, beta: 10.0, s: -1.0, c3: None, n_samples: 50_000, has_limit: true },
        5 => TablePreset { id, beta: 10.0, s: 1.0, c3: Some(TABLE_C3), n_samples: 80_000, has_limit: true },
        6 => TablePreset { id, beta: 10.0, s: -1.0, c3: Some(TABLE_C3), n_samples: 50_000, has_limit: true },
        _ => {
            return Err(Error::Parameter(format!(
                "table id must be 1..=6, got {id}"
            )))
        }
    };
    Ok(p)
}

/// The nine emitted t values 0.1 .. 0.9.
pub fn coarse_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

fn fine_interior() -> Vec<f64> {
    (1..FINE_STEP_DEN)
        .map(|k| k as f64 / FINE_STEP_DEN as f64)
        .collect()
}

/// All columns of one table, aligned to [`coarse_grid`], plus the curve
/// endpoints and the fine-grid derivative data they were built from.
#[derive(Debug, Clone)]
pub struct TableData {
    pub preset: TablePreset,
    pub seed: u64,
    pub t: Vec<f64>,
    pub deriv_standard: Vec<EstimatorResult>,
    pub deriv_closed: Vec<EstimatorResult>,
    pub value_from_standard: Vec<EstimatorResult>,
    pub value_from_closed: Vec<EstimatorResult>,
    pub value_direct: Vec<EstimatorResult>,
    pub limit: Option<Vec<EstimatorResult>>,
    pub value_at_0: EstimatorResult,
    pub value_at_1: EstimatorResult,
    /// Standard-form derivative on the fine interior grid.
    pub fine_standard: Vec<EstimatorResult>,
    /// Closed-form derivative on the fine interior grid.
    pub fine_closed: Vec<EstimatorResult>,
}

fn pick(grid: &[f64], row: &[EstimatorResult], t: f64) -> EstimatorResult {
    let idx = grid
        .iter()
        .position(|&g| (g - t).abs() <= 1e-12)
        .expect("coarse point lies on the fine grid");
    row[idx]
}

/// Runs one table preset. Fully deterministic in (id, seed); the worker
/// count only affects wall time. All estimates share the seed family, so
/// every column sees the same draws (common random numbers).
pub fn run_table(id: u8, seed: u64, workers: usize) -> Result<TableData> {
    run_table_with(id, seed, workers, None)
}

/// Like [`run_table`] with an optional sample-count override, for quick
/// shape checks.
pub fn run_table_with(
    id: u8,
    seed: u64,
    workers: usize,
    n_samples: Option<usize>,
) -> Result<TableData> {
    let mut preset = preset(id)?;
    if let Some(n) = n_samples {
        preset.n_samples = n;
    }
    let mut inst = ComparisonInstance::builtin(preset.beta, preset.s)?;
    if let Some(c3) = preset.c3 {
        inst = inst.with_c3(c3)?;
    }
    let cfg = SamplerConfig {
        seed,
        n_samples: preset.n_samples,
        workers,
        ..Default::default()
    };

    let (d_std, d_clo, value_f) = if preset.lifted() {
        (
            Functional::DpsiStarStandard,
            Functional::DpsiStarClosed,
            Functional::PsiStar,
        )
    } else {
        (
            Functional::DpsiStandard,
            Functional::DpsiClosed,
            Functional::Psi,
        )
    };

    let interior = fine_interior();
    let deriv_curve = estimate_curve(&inst, &[d_std, d_clo], &interior, &cfg)?;
    let endpoint_curve = estimate_curve(&inst, &[d_clo], &[0.0, 1.0], &cfg)?;

    let mut direct_fs = vec![value_f];
    if preset.has_limit {
        direct_fs.push(if preset.lifted() {
            // The limit column of the lifted tables uses the scaled
            // exponent c3s = beta * c3 so the comparison is like for like.
            Functional::LiftedLimit {
                c3s: preset.beta * preset.c3.unwrap(),
            }
        } else {
            Functional::Limit
        });
    }
    let mut direct_grid = vec![0.0];
    direct_grid.extend(coarse_grid());
    direct_grid.push(1.0);
    let direct_curve = estimate_curve(&inst, &direct_fs, &direct_grid, &cfg)?;

    let fine_standard = deriv_curve.estimates[0].clone();
    let fine_closed = deriv_curve.estimates[1].clone();
    let closed_at_0 = endpoint_curve.estimates[0][0];
    let closed_at_1 = endpoint_curve.estimates[0][1];

    // Full-grid derivative rows: the standard estimator is singular at the
    // endpoints, so both reconstructions use the closed form there.
    let mut full_grid = vec![0.0];
    full_grid.extend_from_slice(&interior);
    full_grid.push(1.0);
    let splice = |row: &[EstimatorResult]| -> Vec<EstimatorResult> {
        let mut out = Vec::with_capacity(row.len() + 2);
        out.push(closed_at_0);
        out.extend_from_slice(row);
        out.push(closed_at_1);
        out
    };

    let value_at_0 = direct_curve.estimates[0][0];
    let value_at_1 = *direct_curve.estimates[0].last().unwrap();
    let int_std = integrate_row(&value_at_0, &full_grid, &splice(&fine_standard))?;
    let int_clo = integrate_row(&value_at_0, &full_grid, &splice(&fine_closed))?;

    let t = coarse_grid();
    let table = TableData {
        preset,
        seed,
        deriv_standard: t.iter().map(|&tt| pick(&interior, &fine_standard, tt)).collect(),
        deriv_closed: t.iter().map(|&tt| pick(&interior, &fine_closed, tt)).collect(),
        value_from_standard: t.iter().map(|&tt| pick(&full_grid, &int_std, tt)).collect(),
        value_from_closed: t.iter().map(|&tt| pick(&full_grid, &int_clo, tt)).collect(),
        value_direct: t
            .iter()
            .map(|&tt| pick(&direct_grid, &direct_curve.estimates[0], tt))
            .collect(),
        limit: if preset.has_limit {
            Some(
                t.iter()
                    .map(|&tt| pick(&direct_grid, &direct_curve.estimates[1], tt))
                    .collect(),
            )
        } else {
            None
        },
        value_at_0,
        value_at_1,
        fine_standard,
        fine_closed,
        t,
    };
    Ok(table)
}

/// Renders a table as CSV. Lifted tables pair every value column with its
/// adjusted companion, computed with the same transform the text alongside
/// the bundled sets uses.
pub fn table_csv(data: &TableData) -> Result<CsvReport> {
    let p = &data.preset;
    let config_echo = format!(
        "gcomp table id={} beta={} s={} c3={} samples={} seed={} t=0.1:0.9:0.1 schema={}",
        p.id,
        p.beta,
        p.s,
        p.c3.map_or("none".to_string(), |v| v.to_string()),
        p.n_samples,
        data.seed,
        SCHEMA_VERSION,
    );
    let prefix = if p.lifted() { "dpsistar" } else { "dpsi" };
    let vname = if p.lifted() { "psistar" } else { "psi" };
    let mut columns = vec![
        "t".to_string(),
        format!("{prefix}_dt_standard"),
        format!("{prefix}_dt_closed"),
        format!("{vname}_int_standard"),
        format!("{vname}_int_closed"),
        format!("{vname}_direct"),
    ];
    let value_cols = 3usize;
    if p.lifted() {
        columns.insert(4, format!("{vname}_int_standard_adj"));
        columns.insert(6, format!("{vname}_int_closed_adj"));
        columns.insert(8, format!("{vname}_direct_adj"));
    }
    if data.limit.is_some() {
        columns.push(format!("{vname}_limit"));
        if p.lifted() {
            columns.push(format!("{vname}_limit_adj"));
        }
    }

    let n = ComparisonInstance::builtin(p.beta, p.s)?.n();
    let adj = |v: f64| adjusted_value(v, p.beta, p.s, p.c3.unwrap_or(TABLE_C3), n);
    let mut rows = Vec::with_capacity(data.t.len());
    for (k, &t) in data.t.iter().enumerate() {
        let mut row = vec![
            t,
            data.deriv_standard[k].mean,
            data.deriv_closed[k].mean,
        ];
        let values = [
            data.value_from_standard[k].mean,
            data.value_from_closed[k].mean,
            data.value_direct[k].mean,
        ];
        debug_assert_eq!(values.len(), value_cols);
        for v in values {
            row.push(v);
            if p.lifted() {
                row.push(adj(v)?);
            }
        }
        if let Some(lim) = &data.limit {
            row.push(lim[k].mean);
            if p.lifted() {
                row.push(adj(lim[k].mean)?);
            }
        }
        rows.push(row);
    }
    Ok(CsvReport {
        config_echo,
        columns,
        rows,
    })
}
