//! The property suite behind the `check` command: per-draw sign laws,
//! comparison sandwich, estimator equivalence, degenerate-set zeros, the
//! lifted sign flip, a quadrature cross-check, and log-domain robustness
//! at large beta.

use crate::curves::{check_sandwich, Direction};
use crate::error::Result;
use crate::estimators::{
    dpsi_closed_sample, dpsistar_closed_sample, Functional, Prepared,
};
use crate::kernel::{BilinearField, SampleWorkspace};
use crate::model::{ComparisonInstance, VectorSet};
use crate::montecarlo::{draw_gaussians, estimate_curve, SamplerConfig};
use crate::quadrature::expect_quadrature;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CheckConfig {
    pub seed: u64,
    pub workers: usize,
    /// Draws per per-draw sign scan.
    pub sign_draws: usize,
    /// Samples for the Monte Carlo curve checks.
    pub curve_samples: usize,
    /// Test hook: negate the closed-form integrand before the sign check.
    /// Exists so the failure path of the suite is itself testable.
    pub negate_closed: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 42,
            workers: crate::montecarlo::default_workers(),
            sign_draws: 100_000,
            curve_samples: 50_000,
            negate_closed: false,
        }
    }
}

/// Scans per-draw values of `f` over `n_draws` draws and returns
/// (min, max). Deterministic for any worker count: min/max commute.
pub fn per_draw_extrema(
    inst: &ComparisonInstance,
    t: f64,
    n_draws: usize,
    seed: u64,
    workers: usize,
    f: impl Fn(&Prepared, &BilinearField, &SampleWorkspace) -> f64 + Sync,
) -> Result<(f64, f64)> {
    let pre = Prepared::new(inst);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::error::Error::Parameter(format!("worker pool: {e}")))?;
    const CHUNK: usize = 4096;
    let n_chunks = n_draws.div_ceil(CHUNK);
    let partials: Result<Vec<(f64, f64)>> = pool.install(|| {
        (0..n_chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut field = BilinearField::for_instance(inst);
                let mut ws = SampleWorkspace::sized(pre.l1, pre.l2);
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for i in chunk * CHUNK..((chunk + 1) * CHUNK).min(n_draws) {
                    let draw = draw_gaussians(seed, i as u64, pre.m, pre.n);
                    field.fill(inst, &draw)?;
                    ws.rebuild(&field, inst.beta, inst.s, t)?;
                    let v = f(&pre, &field, &ws);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                Ok((lo, hi))
            })
            .collect()
    });
    let partials = partials?;
    Ok(partials.into_iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(alo, ahi), (lo, hi)| (alo.min(lo), ahi.max(hi)),
    ))
}

fn outcome(name: &str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Runs the full suite. An `Err` is an infrastructure failure; property
/// violations come back as failed outcomes.
pub fn run_checks(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut outcomes = Vec::new();
    let sign_flip = if cfg.negate_closed { -1.0 } else { 1.0 };

    // 1. Per-draw nonpositivity of the closed-form derivative integrand.
    for (beta, s) in [(3.0, 1.0), (3.0, -1.0), (10.0, 1.0), (10.0, -1.0)] {
        let inst = ComparisonInstance::builtin(beta, s)?;
        for t in [0.1, 0.5, 0.9] {
            let (_, hi) = per_draw_extrema(
                &inst,
                t,
                cfg.sign_draws,
                cfg.seed,
                cfg.workers,
                |pre, _field, ws| sign_flip * dpsi_closed_sample(pre, ws),
            )?;
            outcomes.push(outcome(
                "per_draw_sign",
                hi <= 0.0,
                format!("beta={beta} s={s} t={t}: max integrand {hi:.3e} (must be <= 0)"),
            ));
        }
    }

    // 2. Lifted sign law: nonpositive inside (0,1), nonnegative outside.
    for s in [1.0, -1.0] {
        for (c3, nonpositive) in [(0.1, true), (2.0, false), (-0.5, false)] {
            let inst = ComparisonInstance::builtin(10.0, s)?.with_c3(c3)?;
            for t in [0.1, 0.5, 0.9] {
                let (lo, hi) = per_draw_extrema(
                    &inst,
                    t,
                    cfg.sign_draws / 5,
                    cfg.seed,
                    cfg.workers,
                    |pre, _field, ws| {
                        sign_flip * dpsistar_closed_sample(pre, ws).expect("c3 is set")
                    },
                )?;
                let (passed, bound) = if nonpositive {
                    (hi <= 0.0, hi)
                } else {
                    (lo >= 0.0, lo)
                };
                outcomes.push(outcome(
                    "lifted_sign_law",
                    passed,
                    format!("s={s} c3={c3} t={t}: offending extremum {bound:.3e}"),
                ));
            }
        }
    }

    // 3/4. Sandwich and estimator equivalence on the reference preset,
    // plain and lifted, under common random numbers.
    for lifted in [false, true] {
        let (beta, s) = if lifted { (10.0, 1.0) } else { (3.0, 1.0) };
        let mut inst = ComparisonInstance::builtin(beta, s)?;
        if lifted {
            inst = inst.with_c3(0.1)?;
        }
        let mc = SamplerConfig {
            seed: cfg.seed,
            n_samples: cfg.curve_samples,
            workers: cfg.workers,
            ..Default::default()
        };
        let (d_std, d_clo, value_f) = if lifted {
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
        let grid: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let curve = estimate_curve(&inst, &[d_std, d_clo], &grid, &mc)?;
        let mut worst = 0.0f64;
        for k in 0..grid.len() {
            let a = curve.estimates[0][k];
            let b = curve.estimates[1][k];
            let sigma = a.std_error.hypot(b.std_error);
            let z = (a.mean - b.mean).abs() / sigma.max(1e-300);
            worst = worst.max(z);
        }
        outcomes.push(outcome(
            if lifted {
                "estimator_equivalence_lifted"
            } else {
                "estimator_equivalence"
            },
            worst <= 3.0,
            format!("max |standard - closed| = {worst:.2} combined sigmas (limit 3)"),
        ));

        let value_curve = estimate_curve(&inst, &[value_f], &[0.0, 1.0], &mc)?;
        let coarse = estimate_curve(&inst, &[value_f], &grid, &mc)?;
        let report = check_sandwich(
            &value_curve.estimates[0][0],
            &coarse.estimates[0],
            &value_curve.estimates[0][1],
            Direction::NonIncreasing,
        );
        outcomes.push(outcome(
            if lifted { "sandwich_lifted" } else { "sandwich" },
            report.pass,
            format!(
                "value(0) >= value(t) >= value(1) at {} grid points",
                report.points.len()
            ),
        ));
    }

    // 5. Degenerate sets: duplicated x and single pair.
    {
        let x = vec![0.5, -0.5, 0.5, 0.5, 0.0];
        let xset = VectorSet::new(vec![x.clone(), x.clone(), x])?;
        let (_, yset) = crate::model::builtin_sets();
        let inst = ComparisonInstance::new(xset, yset, 3.0, 1.0)?;
        let (lo, hi) = per_draw_extrema(
            &inst,
            0.5,
            cfg.sign_draws / 10,
            cfg.seed,
            cfg.workers,
            |pre, _f, ws| dpsi_closed_sample(pre, ws),
        )?;
        outcomes.push(outcome(
            "degenerate_duplicated_x",
            lo == 0.0 && hi == 0.0,
            format!("closed integrand range [{lo:.3e}, {hi:.3e}] (must be exactly 0)"),
        ));

        let single = ComparisonInstance::new(
            VectorSet::new(vec![vec![1.0, 0.0]])?,
            VectorSet::new(vec![vec![0.6, 0.8]])?,
            2.0,
            -1.0,
        )?;
        let mc = SamplerConfig {
            seed: cfg.seed,
            n_samples: cfg.curve_samples / 5,
            workers: cfg.workers,
            ..Default::default()
        };
        let psi = crate::montecarlo::estimate(&single, Functional::Psi, 0.5, &mc)?;
        let within = psi.mean.abs() <= 3.0 * psi.std_error;
        outcomes.push(outcome(
            "degenerate_single_pair",
            within,
            format!(
                "psi mean {:.4e} vs 3 SE {:.4e} (zero-mean integrand)",
                psi.mean,
                3.0 * psi.std_error
            ),
        ));
    }

    // 6. Quadrature cross-check on a tiny instance.
    {
        let tiny = ComparisonInstance::new(
            VectorSet::new(vec![vec![1.0], vec![-1.0]])?,
            VectorSet::new(vec![vec![1.0], vec![0.5]])?,
            1.0,
            1.0,
        )?;
        let mc = SamplerConfig {
            seed: cfg.seed,
            n_samples: cfg.curve_samples * 4,
            workers: cfg.workers,
            ..Default::default()
        };
        let t = 0.5;
        let exact = expect_quadrature(&tiny, Functional::Psi, t, 40)?;
        let sampled = crate::montecarlo::estimate(&tiny, Functional::Psi, t, &mc)?;
        let gap = (sampled.mean - exact).abs();
        let passed = gap <= 3.0 * sampled.std_error;
        outcomes.push(outcome(
            "quadrature_cross_check",
            passed,
            format!(
                "MC {:.6} vs quadrature {:.6}, gap {:.2e}, 3 SE {:.2e}",
                sampled.mean,
                exact,
                gap,
                3.0 * sampled.std_error
            ),
        ));
    }

    // 7. Log-domain robustness at beta=50. A weight or finiteness fault is
    // folded into the scanned value as +inf, which also fails the sign test.
    for s in [1.0, -1.0] {
        let inst = ComparisonInstance::builtin(50.0, s)?;
        let (_, hi) = per_draw_extrema(&inst, 0.5, 1000, cfg.seed, cfg.workers, |pre, _f, ws| {
            let mut e = (ws.p.iter().sum::<f64>() - 1.0).abs();
            for i1 in 0..ws.l1() {
                e = e.max((ws.q.row(i1).iter().sum::<f64>() - 1.0).abs());
            }
            let psi = crate::kernel::psi_sample(ws, pre.n);
            let v = dpsi_closed_sample(pre, ws);
            if !v.is_finite() || !psi.is_finite() || e > 1e-12 {
                f64::INFINITY
            } else {
                v
            }
        })?;
        outcomes.push(outcome(
            "log_domain_beta50",
            hi <= 0.0,
            format!("s={s}: max scanned value {hi:.3e} (inf marks a weight/finiteness fault)"),
        ));
    }

    Ok(CheckReport { outcomes })
}
