//! Gauss-Hermite tensor-product oracle: deterministic expectations of any
//! per-draw functional on tiny instances, used to cross-check the Monte
//! Carlo estimators.
//!
//! Nodes and weights come from the symmetric tridiagonal eigenproblem
//! (Golub-Welsch) in the probabilists' convention, so the weights form a
//! probability measure and no pi factors appear at call sites. Rules are
//! cached per order.

use crate::error::{Error, Result};
use crate::estimators::{Functional, Prepared};
use crate::kernel::{BilinearField, SampleWorkspace};
use crate::model::{ComparisonInstance, GaussianDraw};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Largest total Gaussian dimension (m*n + 1 + m + n) the tensor grid
/// accepts.
pub const MAX_TOTAL_DIM: usize = 8;

/// Hard ceiling on tensor grid points; the per-dimension order is reduced
/// until the grid fits.
pub const MAX_TOTAL_NODES: u64 = 10_000_000;

/// One-dimensional Gauss-Hermite rule for standard-normal expectations:
/// nodes symmetric about zero, positive weights summing to one.
#[derive(Debug, Clone)]
pub struct HermiteRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl HermiteRule {
    pub fn new(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::Parameter("quadrature order must be >= 1".into()));
        }
        // Jacobi matrix of the (monic, probabilists') Hermite recurrence:
        // zero diagonal, off-diagonal sqrt(k).
        let jacobi = nalgebra::DMatrix::<f64>::from_fn(order, order, |r, c| {
            if r + 1 == c {
                (c as f64).sqrt()
            } else if c + 1 == r {
                (r as f64).sqrt()
            } else {
                0.0
            }
        });
        let eig = jacobi.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = (0..order)
            .map(|i| {
                let w = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], w * w)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        // Exact symmetrization: eigen solvers break the +-x pairing in the
        // last ulp.
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -x;
            nodes[j] = x;
            let w = 0.5 * (weights[i] + weights[j]);
            weights[i] = w;
            weights[j] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        let total: f64 = weights.iter().sum();
        for w in weights.iter_mut() {
            *w /= total;
        }
        Ok(HermiteRule {
            order,
            nodes,
            weights,
        })
    }

    /// Shared rule for the given order, computed once.
    pub fn cached(order: usize) -> Result<Arc<HermiteRule>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<HermiteRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("rule cache poisoned");
        if let Some(rule) = map.get(&order) {
            return Ok(rule.clone());
        }
        let rule = Arc::new(HermiteRule::new(order)?);
        map.insert(order, rule.clone());
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Largest per-dimension order whose tensor grid stays within
/// [`MAX_TOTAL_NODES`], capped at `order`.
pub fn effective_order(order: usize, dim: usize) -> usize {
    let fits = |k: usize| -> bool {
        let mut total: u128 = 1;
        for _ in 0..dim {
            total = total.saturating_mul(k as u128);
            if total > MAX_TOTAL_NODES as u128 {
                return false;
            }
        }
        true
    };
    let mut k = order.max(1);
    while k > 1 && !fits(k) {
        k -= 1;
    }
    k
}

fn total_dim(m: usize, n: usize) -> usize {
    m * n + 1 + m + n
}

/// Writes the coordinates of one tensor grid point into a draw, using the
/// same variable layout as the sampler: g row by row, u4, u2, h.
fn set_draw_coords(draw: &mut GaussianDraw, nodes: &[f64], idx: &[usize], m: usize, n: usize) {
    let mut d = 0;
    for r in 0..m {
        for c in 0..n {
            draw.g.set(r, c, nodes[idx[d]]);
            d += 1;
        }
    }
    draw.u4 = nodes[idx[d]];
    d += 1;
    for r in 0..m {
        draw.u2[r] = nodes[idx[d]];
        d += 1;
    }
    for c in 0..n {
        draw.h[c] = nodes[idx[d]];
        d += 1;
    }
}

fn check_budget(m: usize, n: usize, order: usize) -> Result<(usize, usize)> {
    let dim = total_dim(m, n);
    if dim > MAX_TOTAL_DIM {
        return Err(Error::DimensionBudget {
            dim,
            max: MAX_TOTAL_DIM,
        });
    }
    if order < 2 {
        return Err(Error::Parameter("quadrature order must be >= 2".into()));
    }
    Ok((dim, effective_order(order, dim)))
}

/// Tensor-product expectation of `eval` over the (m, n) Gaussian ensemble.
/// Parallel over the first dimension; each outer slice is summed
/// sequentially and the slices are merged in index order, so the result
/// does not depend on thread count.
fn tensor_expect<G>(
    m: usize,
    n: usize,
    rule: &HermiteRule,
    dim: usize,
    eval_factory: impl Fn() -> G + Sync,
) -> Result<f64>
where
    G: FnMut(&GaussianDraw) -> Result<f64>,
{
    let k = rule.order();
    let inner_points: u64 = (k as u64).pow((dim - 1) as u32);
    let per_outer: Result<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|outer| {
            let mut eval = eval_factory();
            let mut draw = GaussianDraw::zeros(m, n);
            let mut idx = vec![0usize; dim];
            idx[0] = outer;
            let mut slice_sum = 0.0;
            let mut slice_c = 0.0;
            for _ in 0..inner_points {
                set_draw_coords(&mut draw, rule.nodes(), &idx, m, n);
                let mut w = rule.weights()[outer];
                for &i in &idx[1..] {
                    w *= rule.weights()[i];
                }
                let v = w * eval(&draw)?;
                // compensated accumulation
                let y = v - slice_c;
                let t = slice_sum + y;
                slice_c = (t - slice_sum) - y;
                slice_sum = t;
                // odometer over idx[1..]
                for d in (1..dim).rev() {
                    idx[d] += 1;
                    if idx[d] < k {
                        break;
                    }
                    idx[d] = 0;
                }
            }
            Ok(slice_sum)
        })
        .collect();
    let per_outer = per_outer?;
    let mut total = 0.0;
    let mut c = 0.0;
    for v in per_outer {
        let y = v - c;
        let t = total + y;
        c = (t - total) - y;
        total = t;
    }
    Ok(total)
}

/// Deterministic expectation of a named functional at interpolation point
/// t. The total Gaussian dimension m*n + 1 + m + n must be at most
/// [`MAX_TOTAL_DIM`]; the order is auto-capped to keep the grid under
/// [`MAX_TOTAL_NODES`] points.
pub fn expect_quadrature(
    inst: &ComparisonInstance,
    functional: Functional,
    t: f64,
    order: usize,
) -> Result<f64> {
    let (m, n) = (inst.m(), inst.n());
    let (dim, k) = check_budget(m, n, order)?;
    functional.validate(inst, &[t])?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!("t={t} outside [0,1]")));
    }
    let rule = HermiteRule::cached(k)?;
    let pre = &Prepared::new(inst);
    let needs_ws = functional.needs_workspace();
    tensor_expect(m, n, &rule, dim, || {
        let mut field = BilinearField::for_instance(inst);
        let mut ws = SampleWorkspace::sized(pre.l1, pre.l2);
        move |draw: &GaussianDraw| {
            field.fill(inst, draw)?;
            if needs_ws {
                ws.rebuild(&field, inst.beta, inst.s, t)?;
            }
            functional.evaluate(pre, &field, needs_ws.then_some(&ws), t)
        }
    })
}

/// Deterministic expectation of an arbitrary draw integrand over the
/// (m, n) ensemble. Test and diagnostic oracle.
pub fn expect_raw(
    m: usize,
    n: usize,
    order: usize,
    f: impl Fn(&GaussianDraw) -> f64 + Sync,
) -> Result<f64> {
    let (dim, k) = check_budget(m, n, order)?;
    let rule = HermiteRule::cached(k)?;
    tensor_expect(m, n, &rule, dim, || |draw: &GaussianDraw| Ok(f(draw)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::f1h;
    use crate::model::VectorSet;
    use approx::assert_abs_diff_eq;

    fn tiny_instance(y2: f64) -> ComparisonInstance {
        ComparisonInstance::new(
            VectorSet::new(vec![vec![1.0], vec![-1.0]]).unwrap(),
            VectorSet::new(vec![vec![1.0], vec![y2]]).unwrap(),
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn rule_invariants() {
        for order in [1, 2, 7, 40, 80] {
            let rule = HermiteRule::new(order).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert!((total - 1.0).abs() <= 1e-13);
            for i in 0..order {
                assert_eq!(rule.nodes()[i], -rule.nodes()[order - 1 - i]);
                assert!(rule.weights()[i] > 0.0);
            }
        }
    }

    #[test]
    fn rule_matches_low_order_closed_forms() {
        // Probabilists' order-2 rule: nodes +-1, weights 1/2.
        let rule = HermiteRule::new(2).unwrap();
        assert_abs_diff_eq!(rule.nodes()[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.nodes()[1], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.weights()[0], 0.5, epsilon = 1e-14);
        // Order-3: nodes -sqrt(3), 0, sqrt(3); weights 1/6, 2/3, 1/6.
        let rule = HermiteRule::new(3).unwrap();
        assert_abs_diff_eq!(rule.nodes()[2], 3.0f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(rule.weights()[1], 2.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn gaussian_second_moment() {
        for order in [2, 5, 11] {
            let v = expect_raw(1, 1, order, |d| d.u4 * d.u4).unwrap();
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn odd_integrand_vanishes() {
        let x = vec![1.0];
        let y = vec![1.0];
        let v = expect_raw(1, 1, 21, |d| f1h(&x, &y, d, 0.5).unwrap()).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dimension_budget_is_enforced() {
        let inst = ComparisonInstance::new(
            VectorSet::new(vec![vec![1.0, 0.0]]).unwrap(),
            VectorSet::new(vec![vec![1.0, 0.0]]).unwrap(),
            1.0,
            1.0,
        )
        .unwrap();
        // m=n=2: total dimension 4+1+2+2 = 9 > 8
        let err = expect_quadrature(&inst, Functional::Psi, 0.5, 10).unwrap_err();
        assert!(matches!(err, Error::DimensionBudget { dim: 9, max: 8 }));
    }

    #[test]
    fn order_is_capped_by_node_budget() {
        // dim 4: 56^4 < 1e7 < 57^4
        assert_eq!(effective_order(60, 4), 56);
        assert_eq!(effective_order(40, 4), 40);
        assert_eq!(effective_order(3, 2), 3);
    }

    #[test]
    fn order_doubling_is_stable_on_the_tiny_instance() {
        let inst = tiny_instance(0.5);
        let a = expect_quadrature(&inst, Functional::Psi, 0.5, 40).unwrap();
        let b = expect_quadrature(&inst, Functional::Psi, 0.5, 80).unwrap();
        assert!((a - b).abs() <= 1e-8, "order 40 vs capped 80: {a} vs {b}");
    }

    #[test]
    fn quadrature_psi_is_non_increasing_in_t() {
        // Monotonicity on a 21-point grid with no MC noise. The slack is
        // the quadrature truncation floor, which dominates near the
        // endpoints where the max kinks: order 32 keeps it under 1e-9.
        for y2 in [0.5, -0.5] {
            let inst = tiny_instance(y2);
            let mut prev = f64::INFINITY;
            for k in 0..=20 {
                let t = k as f64 / 20.0;
                let v = expect_quadrature(&inst, Functional::Psi, t, 32).unwrap();
                assert!(
                    v <= prev + 1e-9,
                    "psi increased at t={t} for y2={y2}: {prev} -> {v}"
                );
                prev = v;
            }
        }
    }
}
