//! Reconstruction of the value curve from derivative estimates, and the
//! comparison-principle verdicts.

use crate::error::{Error, Result};
use crate::model::EstimatorResult;
use crate::montecarlo::CurveResult;

/// How derivative values at t=0 and t=1 are obtained when reconstructing
/// a value curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointRule {
    /// The caller supplies endpoint derivative estimates (in practice from
    /// the closed form, which is evaluable there).
    ClosedFormAtEndpoints,
    /// Constant extrapolation from the first and last interior values.
    OneSided,
}

/// A uniform interior grid in (0,1) plus an endpoint rule.
#[derive(Debug, Clone)]
pub struct IntegrationScheme {
    /// Strictly increasing interior points t_1 < .. < t_K in (0,1).
    pub interior: Vec<f64>,
    pub endpoint_rule: EndpointRule,
    /// Grid spacing; informational for uniform schemes.
    pub step: f64,
}

impl IntegrationScheme {
    /// Uniform grid with spacing `step`: step, 2*step, .., 1-step.
    pub fn uniform(step: f64, endpoint_rule: EndpointRule) -> Result<Self> {
        if !(step > 0.0 && step < 0.5) {
            return Err(Error::Parameter(format!(
                "integration step must be in (0, 0.5), got {step}"
            )));
        }
        let count = (1.0 / step).round() as usize;
        if ((count as f64) * step - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!(
                "integration step {step} does not divide the unit interval"
            )));
        }
        let interior: Vec<f64> = (1..count).map(|k| k as f64 / count as f64).collect();
        Ok(IntegrationScheme {
            interior,
            endpoint_rule,
            step,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.interior.is_empty() {
            return Err(Error::Parameter("integration grid is empty".into()));
        }
        for w in self.interior.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Parameter("integration grid must be strictly increasing".into()));
            }
        }
        if self.interior[0] <= 0.0 || *self.interior.last().unwrap() >= 1.0 {
            return Err(Error::Parameter("integration grid must lie inside (0,1)".into()));
        }
        if !(self.step > 0.0) {
            return Err(Error::Parameter("integration step must be positive".into()));
        }
        Ok(())
    }

    /// The full grid [0, interior.., 1].
    pub fn full_grid(&self) -> Vec<f64> {
        let mut g = Vec::with_capacity(self.interior.len() + 2);
        g.push(0.0);
        g.extend_from_slice(&self.interior);
        g.push(1.0);
        g
    }
}

/// Cumulative trapezoidal reconstruction of the value curve on `grid`
/// (which must start at 0) from derivative estimates aligned to `grid`.
///
/// The reported standard error treats grid points as independent,
/// `sqrt(se0^2 + sum (w_k se_k)^2)` with trapezoid weights; under common
/// random numbers this overstates the error and is a conservative bound.
pub fn integrate_row(
    value_at_0: &EstimatorResult,
    grid: &[f64],
    deriv: &[EstimatorResult],
) -> Result<Vec<EstimatorResult>> {
    if grid.len() != deriv.len() {
        return Err(Error::GridMismatch(format!(
            "{} grid points vs {} derivative estimates",
            grid.len(),
            deriv.len()
        )));
    }
    if grid.is_empty() || grid[0] != 0.0 {
        return Err(Error::GridMismatch(
            "integration grid must start at t=0".into(),
        ));
    }
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::GridMismatch(
                "integration grid must be strictly increasing".into(),
            ));
        }
    }

    let k = grid.len();
    // Trapezoid weight of each node in the integral up to index j.
    let mut node_weight = vec![0.0; k];
    let mut integral = 0.0;
    let mut out = Vec::with_capacity(k);
    out.push(EstimatorResult {
        mean: value_at_0.mean,
        std_error: value_at_0.std_error,
        n_samples: value_at_0.n_samples,
        seed: value_at_0.seed,
        t: grid[0],
    });
    for j in 1..k {
        let dt = grid[j] - grid[j - 1];
        integral += 0.5 * dt * (deriv[j - 1].mean + deriv[j].mean);
        node_weight[j - 1] += 0.5 * dt;
        node_weight[j] += 0.5 * dt;
        let var: f64 = value_at_0.std_error.powi(2)
            + (0..=j)
                .map(|i| (node_weight[i] * deriv[i].std_error).powi(2))
                .sum::<f64>();
        out.push(EstimatorResult {
            mean: value_at_0.mean + integral,
            std_error: var.sqrt(),
            n_samples: value_at_0.n_samples,
            seed: value_at_0.seed,
            t: grid[j],
        });
    }
    Ok(out)
}

/// Integrates every functional row of a derivative curve under the scheme.
/// With [`EndpointRule::ClosedFormAtEndpoints`] the curve's grid must equal
/// the scheme's full grid (endpoint values included); with
/// [`EndpointRule::OneSided`] it must equal the interior grid and endpoint
/// derivatives are extrapolated as constants.
pub fn integrate_curve(
    value_at_0: &EstimatorResult,
    deriv: &CurveResult,
    scheme: &IntegrationScheme,
) -> Result<CurveResult> {
    scheme.validate()?;
    let full = scheme.full_grid();
    let grids_equal = |a: &[f64], b: &[f64]| {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
    };
    let rows: Vec<Vec<EstimatorResult>> = match scheme.endpoint_rule {
        EndpointRule::ClosedFormAtEndpoints => {
            if !grids_equal(&deriv.grid, &full) {
                return Err(Error::GridMismatch(
                    "derivative grid must be [0, interior.., 1] for closed-form endpoints".into(),
                ));
            }
            deriv
                .estimates
                .iter()
                .map(|row| integrate_row(value_at_0, &full, row))
                .collect::<Result<_>>()?
        }
        EndpointRule::OneSided => {
            if !grids_equal(&deriv.grid, &scheme.interior) {
                return Err(Error::GridMismatch(
                    "derivative grid must equal the interior grid for one-sided endpoints".into(),
                ));
            }
            deriv
                .estimates
                .iter()
                .map(|row| {
                    let mut padded = Vec::with_capacity(row.len() + 2);
                    padded.push(EstimatorResult {
                        t: 0.0,
                        ..row[0]
                    });
                    padded.extend_from_slice(row);
                    padded.push(EstimatorResult {
                        t: 1.0,
                        ..*row.last().unwrap()
                    });
                    integrate_row(value_at_0, &full, &padded)
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(CurveResult {
        grid: full,
        functionals: deriv.functionals.clone(),
        estimates: rows,
    })
}

/// Which way the value curve is expected to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    NonIncreasing,
    NonDecreasing,
}

/// Verdict for one inequality at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PointVerdict {
    /// Inequality holds outright.
    Holds,
    /// Nominally violated, but within `sigmas` (< 3) combined standard
    /// errors.
    WithinNoise { sigmas: f64 },
    /// Violated beyond 3 combined standard errors.
    Violated { sigmas: f64 },
}

impl PointVerdict {
    fn from_gap(gap: f64, se: f64) -> Self {
        if gap <= 0.0 {
            PointVerdict::Holds
        } else {
            let sigmas = if se > 0.0 { gap / se } else { f64::INFINITY };
            if sigmas <= 3.0 {
                PointVerdict::WithinNoise { sigmas }
            } else {
                PointVerdict::Violated { sigmas }
            }
        }
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, PointVerdict::Violated { .. })
    }
}

#[derive(Debug, Clone)]
pub struct SandwichPoint {
    pub t: f64,
    /// value(t) against value(0).
    pub against_start: PointVerdict,
    /// value(1) against value(t).
    pub against_end: PointVerdict,
}

#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub direction: Direction,
    pub points: Vec<SandwichPoint>,
    pub pass: bool,
}

/// Checks the two-sided comparison `value(0) >= value(t) >= value(1)` (or
/// the reversed ordering) at every curve point, with 3-sigma noise
/// allowances from the combined standard errors. Estimates are assumed to
/// share the seed family, so gaps are low-variance.
pub fn check_sandwich(
    value_at_0: &EstimatorResult,
    curve: &[EstimatorResult],
    value_at_1: &EstimatorResult,
    direction: Direction,
) -> SandwichReport {
    let orient = match direction {
        Direction::NonIncreasing => 1.0,
        Direction::NonDecreasing => -1.0,
    };
    let points: Vec<SandwichPoint> = curve
        .iter()
        .map(|est| {
            let gap_start = orient * (est.mean - value_at_0.mean);
            let se_start = est.std_error.hypot(value_at_0.std_error);
            let gap_end = orient * (value_at_1.mean - est.mean);
            let se_end = est.std_error.hypot(value_at_1.std_error);
            SandwichPoint {
                t: est.t,
                against_start: PointVerdict::from_gap(gap_start, se_start),
                against_end: PointVerdict::from_gap(gap_end, se_end),
            }
        })
        .collect();
    let pass = !points
        .iter()
        .any(|p| p.against_start.is_violated() || p.against_end.is_violated());
    SandwichReport {
        direction,
        points,
        pass,
    }
}
