//! Per-draw integrands: the two derivative forms (standard interpolation
//! and closed form), their lifted counterparts, the large-beta limit
//! functionals, and the adjusted-value transform.
//!
//! The closed forms are evaluated through softmax weights and two
//! instance-level defect matrices
//!
//! ```text
//! x_defect[i][p] = |x_i||x_p| - x_i'x_p = ||n_p x_i - n_i x_p||^2 / (2 n_i n_p)
//! ```
//!
//! (same for y). The squared-difference form keeps every entry nonnegative
//! in floating point and makes it exactly zero for identical vectors, so
//! the per-draw sign laws and the degenerate-set zeros hold literally, not
//! just up to rounding.

use crate::error::{Error, Result};
use crate::kernel::{psi_sample, psistar_sample, BilinearField, SampleWorkspace};
use crate::mat::{dot, Mat};
use crate::model::ComparisonInstance;

/// Standard-form derivatives carry 1/(2 sqrt(t)) and 1/(2 sqrt(1-t))
/// factors; they are only evaluated for t in
/// [MIN_INTERIOR_T, 1 - MIN_INTERIOR_T].
pub const MIN_INTERIOR_T: f64 = 1e-4;

fn require_interior(t: f64) -> Result<()> {
    if !(MIN_INTERIOR_T..=1.0 - MIN_INTERIOR_T).contains(&t) {
        return Err(Error::EndpointT(t));
    }
    Ok(())
}

/// Instance-level precomputation shared by all estimators: defect matrices,
/// dimensions and parameters.
#[derive(Debug, Clone)]
pub struct Prepared {
    x_defect: Mat,
    y_defect: Mat,
    pub l1: usize,
    pub l2: usize,
    pub m: usize,
    pub n: usize,
    pub beta: f64,
    pub s: f64,
    pub c3: Option<f64>,
    sqrt_n: f64,
}

fn defect_matrix(set: &crate::model::VectorSet) -> Mat {
    let l = set.count();
    let d = set.dim();
    let mut out = Mat::zeros(l, l);
    for i in 0..l {
        for p in 0..l {
            let (vi, vp) = (set.vector(i), set.vector(p));
            let (ni, np) = (set.norm(i), set.norm(p));
            let mut ss = 0.0;
            for k in 0..d {
                let diff = np * vi[k] - ni * vp[k];
                ss += diff * diff;
            }
            out.set(i, p, ss / (2.0 * ni * np));
        }
    }
    out
}

impl Prepared {
    pub fn new(inst: &ComparisonInstance) -> Self {
        Prepared {
            x_defect: defect_matrix(&inst.xset),
            y_defect: defect_matrix(&inst.yset),
            l1: inst.xset.count(),
            l2: inst.yset.count(),
            m: inst.m(),
            n: inst.n(),
            beta: inst.beta,
            s: inst.s,
            c3: inst.c3,
            sqrt_n: (inst.n() as f64).sqrt(),
        }
    }

    fn c3(&self) -> Result<f64> {
        self.c3.ok_or(Error::MissingC3)
    }
}

/// sum over (i1,i2) of p[i1] q[i1][i2] dF/dt, the weighted field slope
/// shared by both standard-form derivatives.
fn weighted_slope(ws: &SampleWorkspace, field: &BilinearField, t: f64) -> f64 {
    let inv2st = 1.0 / (2.0 * t.sqrt());
    let inv2s1t = 1.0 / (2.0 * (1.0 - t).sqrt());
    let mut total = 0.0;
    for i1 in 0..ws.l1() {
        let q = ws.q.row(i1);
        let c = field.coupled().row(i1);
        let d = field.decoupled().row(i1);
        let mut row = 0.0;
        for i2 in 0..ws.l2() {
            row += q[i2] * (c[i2] * inv2st - d[i2] * inv2s1t);
        }
        total += ws.p[i1] * row;
    }
    total
}

/// Double sum of the closed forms:
/// sum over (i1,p1) of p[i1] p[p1] x_defect[i1][p1] * (q_i1' Yd q_p1).
/// Every factor is nonnegative, so the result is nonnegative in floating
/// point and exactly zero when either defect matrix vanishes.
fn closed_double_sum(pre: &Prepared, ws: &SampleWorkspace) -> f64 {
    let l1 = pre.l1;
    let l2 = pre.l2;
    // yv[i1] = Yd * q_i1
    let mut yv = Mat::zeros(l1, l2);
    for i1 in 0..l1 {
        let q = ws.q.row(i1);
        let row = yv.row_mut(i1);
        for (a, &qa) in q.iter().enumerate() {
            if qa == 0.0 {
                continue;
            }
            let yd = pre.y_defect.row(a);
            for b in 0..l2 {
                row[b] += qa * yd[b];
            }
        }
    }
    // x_defect has an exactly zero diagonal; sum the off-diagonal pairs.
    let mut total = 0.0;
    for i1 in 0..l1 {
        for p1 in (i1 + 1)..l1 {
            let xd = pre.x_defect.at(i1, p1);
            if xd == 0.0 {
                continue;
            }
            let yfac = dot(ws.q.row(p1), yv.row(i1));
            total += 2.0 * ws.p[i1] * ws.p[p1] * xd * yfac;
        }
    }
    total
}

/// Standard-interpolation derivative integrand:
/// `sign(s)/sqrt(n) * sum p q dF/dt`. Interior t only.
pub fn dpsi_standard_sample(
    pre: &Prepared,
    field: &BilinearField,
    ws: &SampleWorkspace,
    t: f64,
) -> Result<f64> {
    require_interior(t)?;
    Ok(pre.s.signum() / pre.sqrt_n * weighted_slope(ws, field, t))
}

/// Closed-form derivative integrand:
/// `-|s| beta / (2 sqrt(n)) * S` with S the nonnegative double sum.
/// Nonpositive on every draw.
pub fn dpsi_closed_sample(pre: &Prepared, ws: &SampleWorkspace) -> f64 {
    -(pre.s.abs() * pre.beta / (2.0 * pre.sqrt_n)) * closed_double_sum(pre, ws)
}

/// Lifted standard-form derivative integrand:
/// `s c3 exp(c3 log_z) beta * sum p q dF/dt`. Interior t only.
pub fn dpsistar_standard_sample(
    pre: &Prepared,
    field: &BilinearField,
    ws: &SampleWorkspace,
    t: f64,
) -> Result<f64> {
    require_interior(t)?;
    let c3 = pre.c3()?;
    let zc3 = psistar_sample(ws, c3)?;
    Ok(pre.s * c3 * zc3 * pre.beta * weighted_slope(ws, field, t))
}

/// Lifted closed-form derivative integrand:
/// `-(s^2 beta^2 c3 (1-c3) / 2) exp(c3 log_z) * S`.
/// Sign is `-sign(c3 (1-c3))` (or zero) on every draw.
pub fn dpsistar_closed_sample(pre: &Prepared, ws: &SampleWorkspace) -> Result<f64> {
    let c3 = pre.c3()?;
    let zc3 = psistar_sample(ws, c3)?;
    let prefactor = pre.s * pre.s * pre.beta * pre.beta * c3 * (1.0 - c3) / 2.0;
    Ok(-prefactor * zc3 * closed_double_sum(pre, ws))
}

fn signed_outer_max(pre: &Prepared, field: &BilinearField, t: f64) -> f64 {
    let sign = pre.s.signum();
    let mut outer = f64::NEG_INFINITY;
    for i1 in 0..pre.l1 {
        let mut inner = f64::NEG_INFINITY;
        for i2 in 0..pre.l2 {
            inner = inner.max(field.value(i1, i2, t));
        }
        outer = outer.max(sign * inner);
    }
    outer
}

/// Large-beta limit integrand: `max_i1 (sign(s) max_i2 f) / sqrt(n)`.
/// For s < 0 this equals `-min_i1 max_i2 f / sqrt(n)`. Endpoints allowed.
pub fn limit_sample(pre: &Prepared, field: &BilinearField, t: f64) -> f64 {
    signed_outer_max(pre, field, t) / pre.sqrt_n
}

/// Lifted large-beta limit integrand:
/// `exp(c3s * max_i1 sign(s) max_i2 f)`. Endpoints allowed; c3s > 0.
pub fn lifted_limit_sample(pre: &Prepared, field: &BilinearField, t: f64, c3s: f64) -> f64 {
    (c3s * signed_outer_max(pre, field, t)).exp()
}

/// The deterministic transform relating a lifted value back to the direct
/// scale for unit-norm sets:
/// `(log(v) / (beta |s| c3) - beta |s| c3 / 2) / sqrt(n)`.
/// Strictly increasing in v.
pub fn adjusted_value(v: f64, beta: f64, s: f64, c3: f64, n: usize) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::Parameter(format!(
            "adjusted_value needs a positive value, got {v}"
        )));
    }
    let bsc = beta * s.abs() * c3;
    Ok((v.ln() / bsc - bsc / 2.0) / (n as f64).sqrt())
}

/// Named per-draw integrands driven by the Monte Carlo and quadrature
/// layers and by the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// Direct value integrand `log_z / (beta |s| sqrt(n))`.
    Psi,
    /// Lifted value integrand `exp(c3 log_z)`; needs c3 on the instance.
    PsiStar,
    /// Standard-interpolation derivative; interior t only.
    DpsiStandard,
    /// Closed-form derivative; valid at the endpoints.
    DpsiClosed,
    /// Lifted standard-form derivative; interior t only, needs c3.
    DpsiStarStandard,
    /// Lifted closed-form derivative; needs c3.
    DpsiStarClosed,
    /// Large-beta limit (max / minmax) integrand.
    Limit,
    /// Lifted large-beta limit integrand with scaled exponent c3s > 0.
    LiftedLimit { c3s: f64 },
}

impl Functional {
    pub fn label(&self) -> &'static str {
        match self {
            Functional::Psi => "psi",
            Functional::PsiStar => "psistar",
            Functional::DpsiStandard => "dpsi_standard",
            Functional::DpsiClosed => "dpsi_closed",
            Functional::DpsiStarStandard => "dpsistar_standard",
            Functional::DpsiStarClosed => "dpsistar_closed",
            Functional::Limit => "limit",
            Functional::LiftedLimit { .. } => "lifted_limit",
        }
    }

    pub fn needs_workspace(&self) -> bool {
        !matches!(self, Functional::Limit | Functional::LiftedLimit { .. })
    }

    pub fn interior_only(&self) -> bool {
        matches!(
            self,
            Functional::DpsiStandard | Functional::DpsiStarStandard
        )
    }

    pub fn requires_c3(&self) -> bool {
        matches!(
            self,
            Functional::PsiStar | Functional::DpsiStarStandard | Functional::DpsiStarClosed
        )
    }

    /// Checks this functional against an instance and a t grid before a run.
    pub fn validate(&self, inst: &ComparisonInstance, grid: &[f64]) -> Result<()> {
        if self.requires_c3() && inst.c3.is_none() {
            return Err(Error::MissingC3);
        }
        if let Functional::LiftedLimit { c3s } = self {
            if !(c3s.is_finite() && *c3s > 0.0) {
                return Err(Error::Parameter(format!(
                    "lifted limit exponent c3s must be positive, got {c3s}"
                )));
            }
        }
        if self.interior_only() {
            for &t in grid {
                require_interior(t)?;
            }
        }
        Ok(())
    }

    /// Evaluates the integrand for one draw. `ws` must be provided when
    /// [`needs_workspace`](Functional::needs_workspace) is true.
    pub fn evaluate(
        &self,
        pre: &Prepared,
        field: &BilinearField,
        ws: Option<&SampleWorkspace>,
        t: f64,
    ) -> Result<f64> {
        let need_ws = || {
            ws.ok_or_else(|| Error::Parameter("workspace required for this functional".into()))
        };
        match self {
            Functional::Psi => Ok(psi_sample(need_ws()?, pre.n)),
            Functional::PsiStar => psistar_sample(need_ws()?, pre.c3()?),
            Functional::DpsiStandard => dpsi_standard_sample(pre, field, need_ws()?, t),
            Functional::DpsiClosed => Ok(dpsi_closed_sample(pre, need_ws()?)),
            Functional::DpsiStarStandard => dpsistar_standard_sample(pre, field, need_ws()?, t),
            Functional::DpsiStarClosed => dpsistar_closed_sample(pre, need_ws()?),
            Functional::Limit => Ok(limit_sample(pre, field, t)),
            Functional::LiftedLimit { c3s } => Ok(lifted_limit_sample(pre, field, t, *c3s)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::f1h;
    use crate::model::VectorSet;
    use crate::montecarlo::draw_gaussians;
    use approx::assert_abs_diff_eq;

    fn instance(xs: Vec<Vec<f64>>, ys: Vec<Vec<f64>>, beta: f64, s: f64) -> ComparisonInstance {
        ComparisonInstance::new(
            VectorSet::new(xs).unwrap(),
            VectorSet::new(ys).unwrap(),
            beta,
            s,
        )
        .unwrap()
    }

    fn eval_parts(
        inst: &ComparisonInstance,
        seed: u64,
        t: f64,
    ) -> (Prepared, BilinearField, SampleWorkspace) {
        let draw = draw_gaussians(seed, 0, inst.m(), inst.n());
        let pre = Prepared::new(inst);
        let field = BilinearField::new(inst, &draw).unwrap();
        let ws = SampleWorkspace::from_field(&field, inst.beta, inst.s, t).unwrap();
        (pre, field, ws)
    }

    #[test]
    fn standard_derivative_collapses_for_single_pair() {
        // Weights are 1, so the value is sign(s)/sqrt(n) times the slope of
        // the two bilinear groups.
        for s in [2.0, -0.5] {
            let inst = instance(vec![vec![0.6, -0.8, 0.1]], vec![vec![1.5, 0.2]], 2.0, s);
            let draw = draw_gaussians(7, 0, 2, 3);
            let pre = Prepared::new(&inst);
            let field = BilinearField::new(&inst, &draw).unwrap();
            let t = 0.3;
            let ws = SampleWorkspace::from_field(&field, inst.beta, inst.s, t).unwrap();
            let v = dpsi_standard_sample(&pre, &field, &ws, t).unwrap();
            let coupled = field.coupled().at(0, 0);
            let decoupled = field.decoupled().at(0, 0);
            let hand = s.signum() / (3.0f64).sqrt()
                * (coupled / (2.0 * t.sqrt()) - decoupled / (2.0 * (1.0 - t).sqrt()));
            assert_abs_diff_eq!(v, hand, epsilon = 1e-14);
        }
    }

    #[test]
    fn standard_derivative_rejects_endpoints() {
        let inst = instance(vec![vec![1.0]], vec![vec![1.0]], 1.0, 1.0);
        let (pre, field, ws) = eval_parts(&inst, 1, 0.5);
        assert!(dpsi_standard_sample(&pre, &field, &ws, 0.0).is_err());
        assert!(dpsi_standard_sample(&pre, &field, &ws, 1.0).is_err());
        assert!(dpsi_standard_sample(&pre, &field, &ws, 0.5 * MIN_INTERIOR_T).is_err());
    }

    #[test]
    fn closed_derivative_is_zero_for_single_x() {
        let inst = instance(
            vec![vec![0.7, 0.7]],
            vec![vec![1.0, 0.0], vec![0.0, -2.0], vec![0.5, 0.5]],
            3.0,
            -1.0,
        );
        let (pre, _field, ws) = eval_parts(&inst, 3, 0.4);
        assert_eq!(dpsi_closed_sample(&pre, &ws), 0.0);
    }

    #[test]
    fn closed_derivative_is_zero_for_duplicated_x() {
        let x = vec![0.3, -0.4, 0.8];
        let inst = instance(
            vec![x.clone(), x.clone(), x],
            vec![vec![1.0, 0.0], vec![0.0, -2.0]],
            3.0,
            1.0,
        );
        for seed in 0..20 {
            let (pre, _field, ws) = eval_parts(&inst, seed, 0.6);
            assert_eq!(dpsi_closed_sample(&pre, &ws), 0.0);
        }
    }

    #[test]
    fn closed_derivative_is_zero_for_identical_y() {
        let y = vec![0.9, -0.1];
        let inst = instance(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![y.clone(), y.clone(), y],
            2.0,
            -1.0,
        );
        for seed in 0..20 {
            let (pre, _field, ws) = eval_parts(&inst, seed, 0.25);
            assert_eq!(dpsi_closed_sample(&pre, &ws), 0.0);
        }
    }

    #[test]
    fn closed_derivative_is_nonpositive_per_draw() {
        let (xs, ys) = crate::model::builtin_sets();
        for (beta, s) in [(3.0, 1.0), (3.0, -1.0), (10.0, 1.0), (10.0, -1.0)] {
            let inst =
                ComparisonInstance::new(xs.clone(), ys.clone(), beta, s).unwrap();
            let pre = Prepared::new(&inst);
            let mut field = BilinearField::for_instance(&inst);
            let mut ws = SampleWorkspace::sized(pre.l1, pre.l2);
            for seed in 0..50 {
                let draw = draw_gaussians(seed, 0, 5, 5);
                field.fill(&inst, &draw).unwrap();
                for t in [0.1, 0.5, 0.9] {
                    ws.rebuild(&field, inst.beta, inst.s, t).unwrap();
                    assert!(dpsi_closed_sample(&pre, &ws) <= 0.0);
                }
            }
        }
    }

    #[test]
    fn closed_matches_naive_quadruple_sum() {
        // Reference: direct four-index evaluation of the factorized form.
        let inst = instance(
            vec![vec![0.8, -0.3], vec![-0.1, 1.2], vec![0.5, 0.5]],
            vec![vec![1.0, 0.2], vec![-0.4, 0.9]],
            2.0,
            -1.5,
        );
        let (pre, _field, ws) = eval_parts(&inst, 17, 0.7);
        let xs = &inst.xset;
        let ys = &inst.yset;
        let mut total = 0.0;
        for i1 in 0..3 {
            for p1 in 0..3 {
                let xd = xs.norm(i1) * xs.norm(p1) - dot(xs.vector(i1), xs.vector(p1));
                let mut yfac = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        let yd = ys.norm(a) * ys.norm(b) - dot(ys.vector(a), ys.vector(b));
                        yfac += ws.q.at(i1, a) * ws.q.at(p1, b) * yd;
                    }
                }
                total += ws.p[i1] * ws.p[p1] * xd * yfac;
            }
        }
        let naive = -(inst.s.abs() * inst.beta / (2.0 * (2.0f64).sqrt())) * total;
        assert_abs_diff_eq!(dpsi_closed_sample(&pre, &ws), naive, epsilon = 1e-13);
    }

    #[test]
    fn lifted_standard_collapses_for_single_pair() {
        let inst = instance(vec![vec![0.6, -0.8]], vec![vec![1.5]], 2.0, 1.0)
            .with_c3(0.1)
            .unwrap();
        let draw = draw_gaussians(9, 0, 1, 2);
        let pre = Prepared::new(&inst);
        let field = BilinearField::new(&inst, &draw).unwrap();
        let t = 0.45;
        let ws = SampleWorkspace::from_field(&field, inst.beta, inst.s, t).unwrap();
        let v = dpsistar_standard_sample(&pre, &field, &ws, t).unwrap();
        let f = f1h(inst.xset.vector(0), inst.yset.vector(0), &draw, t).unwrap();
        let slope = field.coupled().at(0, 0) / (2.0 * t.sqrt())
            - field.decoupled().at(0, 0) / (2.0 * (1.0 - t).sqrt());
        let hand = inst.s * 0.1 * (0.1 * inst.s * inst.beta * f).exp() * inst.beta * slope;
        assert_abs_diff_eq!(v, hand, epsilon = 1e-12 * hand.abs().max(1.0));
    }

    #[test]
    fn lifted_and_plain_standard_integrands_are_proportional() {
        // dpsistar = c3 * Z^c3 * beta * |s| * sqrt(n) * dpsi, draw by draw.
        let (xs, ys) = crate::model::builtin_sets();
        let inst = ComparisonInstance::new(xs, ys, 10.0, -1.0)
            .unwrap()
            .with_c3(0.1)
            .unwrap();
        let pre = Prepared::new(&inst);
        for seed in 0..10 {
            let draw = draw_gaussians(seed, 0, 5, 5);
            let field = BilinearField::new(&inst, &draw).unwrap();
            for t in [0.2, 0.5, 0.8] {
                let ws = SampleWorkspace::from_field(&field, inst.beta, inst.s, t).unwrap();
                let plain = dpsi_standard_sample(&pre, &field, &ws, t).unwrap();
                let lifted = dpsistar_standard_sample(&pre, &field, &ws, t).unwrap();
                let zc3 = psistar_sample(&ws, 0.1).unwrap();
                let predicted =
                    0.1 * zc3 * inst.beta * inst.s.abs() * (5.0f64).sqrt() * plain;
                assert_abs_diff_eq!(
                    lifted,
                    predicted,
                    epsilon = 1e-10 * predicted.abs().max(1.0)
                );
            }
        }
    }

    #[test]
    fn lifted_closed_sign_follows_c3() {
        let (xs, ys) = crate::model::builtin_sets();
        for (c3, expect_nonpositive) in [(0.1, true), (2.0, false), (-0.5, false)] {
            let inst = ComparisonInstance::new(xs.clone(), ys.clone(), 10.0, 1.0)
                .unwrap()
                .with_c3(c3)
                .unwrap();
            let pre = Prepared::new(&inst);
            for seed in 0..30 {
                let draw = draw_gaussians(seed, 0, 5, 5);
                let field = BilinearField::new(&inst, &draw).unwrap();
                let ws = SampleWorkspace::from_field(&field, inst.beta, inst.s, 0.5).unwrap();
                let v = dpsistar_closed_sample(&pre, &ws).unwrap();
                if expect_nonpositive {
                    assert!(v <= 0.0, "c3={c3} seed={seed} gave {v}");
                } else {
                    assert!(v >= 0.0, "c3={c3} seed={seed} gave {v}");
                }
            }
        }
    }

    #[test]
    fn lifted_closed_is_zero_for_single_x() {
        let inst = instance(vec![vec![1.0, 1.0]], vec![vec![1.0], vec![-0.5]], 5.0, 1.0)
            .with_c3(0.3)
            .unwrap();
        let (pre, _field, ws) = eval_parts(&inst, 4, 0.5);
        assert_eq!(dpsistar_closed_sample(&pre, &ws).unwrap(), 0.0);
    }

    #[test]
    fn limit_degenerates_to_psi_for_single_pair() {
        let inst = instance(vec![vec![0.6, -0.8]], vec![vec![1.5]], 4.0, -1.0);
        let draw = draw_gaussians(12, 0, 1, 2);
        let pre = Prepared::new(&inst);
        let field = BilinearField::new(&inst, &draw).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let ws = SampleWorkspace::from_field(&field, inst.beta, inst.s, t).unwrap();
            assert_abs_diff_eq!(
                limit_sample(&pre, &field, t),
                psi_sample(&ws, 2),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn limit_is_minus_min_max_for_negative_s() {
        let inst = instance(
            vec![vec![0.8, -0.3], vec![-0.1, 1.2]],
            vec![vec![1.0, 0.2], vec![-0.4, 0.9]],
            2.0,
            -1.0,
        );
        let draw = draw_gaussians(6, 0, 2, 2);
        let pre = Prepared::new(&inst);
        let field = BilinearField::new(&inst, &draw).unwrap();
        let t = 0.6;
        let mut minmax = f64::INFINITY;
        for i1 in 0..2 {
            let mut inner = f64::NEG_INFINITY;
            for i2 in 0..2 {
                inner = inner.max(field.value(i1, i2, t));
            }
            minmax = minmax.min(inner);
        }
        assert_abs_diff_eq!(
            limit_sample(&pre, &field, t),
            -minmax / (2.0f64).sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn lifted_limit_of_zero_draw_is_one() {
        let inst = instance(
            vec![vec![0.8, -0.3], vec![-0.1, 1.2]],
            vec![vec![1.0, 0.2], vec![-0.4, 0.9]],
            2.0,
            1.0,
        );
        let pre = Prepared::new(&inst);
        let draw = crate::model::GaussianDraw::zeros(2, 2);
        let field = BilinearField::new(&inst, &draw).unwrap();
        assert_eq!(lifted_limit_sample(&pre, &field, 0.7, 1.0), 1.0);
    }

    #[test]
    fn adjusted_value_reference_points() {
        // Values and their adjusted companions from the bundled tables.
        let a = adjusted_value(26.9459, 10.0, 1.0, 0.1, 5).unwrap();
        assert!((a - 1.2494).abs() <= 1.5e-4, "got {a}");
        let b = adjusted_value(1.3708, 10.0, -1.0, 0.1, 5).unwrap();
        assert!((b + 0.0826).abs() <= 1.5e-4, "got {b}");
        // Exact cancellation point.
        let bsc: f64 = 10.0 * 0.1;
        let v = (bsc * bsc / 2.0).exp();
        assert_abs_diff_eq!(adjusted_value(v, 10.0, 1.0, 0.1, 5).unwrap(), 0.0, epsilon = 1e-12);
        // Monotone increasing in v.
        let lo = adjusted_value(10.0, 10.0, 1.0, 0.1, 5).unwrap();
        let hi = adjusted_value(10.5, 10.0, 1.0, 0.1, 5).unwrap();
        assert!(hi > lo);
        // Domain errors.
        assert!(adjusted_value(0.0, 10.0, 1.0, 0.1, 5).is_err());
        assert!(adjusted_value(-1.0, 10.0, 1.0, 0.1, 5).is_err());
    }

    #[test]
    fn functional_validation() {
        let inst = instance(vec![vec![1.0]], vec![vec![1.0]], 1.0, 1.0);
        assert!(matches!(
            Functional::PsiStar.validate(&inst, &[0.5]),
            Err(Error::MissingC3)
        ));
        assert!(Functional::DpsiStandard.validate(&inst, &[0.0, 0.5]).is_err());
        assert!(Functional::DpsiStandard.validate(&inst, &[0.1, 0.5]).is_ok());
        assert!(Functional::LiftedLimit { c3s: 0.0 }.validate(&inst, &[0.5]).is_err());
        assert!(Functional::LiftedLimit { c3s: 1.0 }.validate(&inst, &[0.0]).is_ok());
    }
}
