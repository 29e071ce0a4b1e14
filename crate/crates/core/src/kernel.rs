//! Per-draw, log-domain evaluation of the interpolated bilinear field and
//! the partition quantities behind every estimator.
//!
//! The field of one draw splits into a coupled group (the `g` matrix and
//! `u4` terms, weight `sqrt(t)`) and a decoupled group (the `u2` and `h`
//! terms, weight `sqrt(1-t)`). Both groups are t-independent, so one
//! [`BilinearField`] serves every interpolation point and every estimator
//! of a draw; this is what makes common random numbers across a t-grid
//! cheap.
//!
//! Exponents are handled as `beta * F[i1][i2]` rather than the normalized
//! per-row parametrization: algebraically identical, no divisions by vector
//! norms, one shared field matrix. All powers and ratios downstream are
//! exponentials of log-domain quantities.

use crate::error::{Error, Result};
use crate::mat::{dot, Mat};
use crate::model::{ComparisonInstance, GaussianDraw};

/// Stable log(sum(exp(x))) with max subtraction. Empty input is -inf.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let sum: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + sum.ln()
}

/// The interpolated field for one (x, y) pair:
/// `sqrt(t) * (y' g x + |x||y| u4) + sqrt(1-t) * (|x| y'u2 + |y| h'x)`.
///
/// At t=1 this is the coupled-form exponent, at t=0 the decoupled one.
pub fn f1h(x: &[f64], y: &[f64], draw: &GaussianDraw, t: f64) -> Result<f64> {
    if x.len() != draw.n() || y.len() != draw.m() {
        return Err(Error::Dimension(format!(
            "f1h: x has {}, y has {}, draw is {}x{}",
            x.len(),
            y.len(),
            draw.m(),
            draw.n()
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!("t={t} outside [0,1]")));
    }
    let xn = crate::mat::norm(x);
    let yn = crate::mat::norm(y);
    let mut ygx = 0.0;
    for (j, &yj) in y.iter().enumerate() {
        ygx += yj * dot(draw.g.row(j), x);
    }
    let coupled = ygx + xn * yn * draw.u4;
    let decoupled = xn * dot(y, &draw.u2) + yn * dot(&draw.h, x);
    Ok(t.sqrt() * coupled + (1.0 - t).sqrt() * decoupled)
}

/// The two t-independent groups of the field, tabulated over all
/// (i1, i2) pairs of an instance for one draw.
#[derive(Debug, Clone)]
pub struct BilinearField {
    coupled: Mat,
    decoupled: Mat,
    gx: Mat, // scratch: g * x_i1 rows
}

impl BilinearField {
    /// Empty field sized for an instance, to be populated with [`fill`].
    ///
    /// [`fill`]: BilinearField::fill
    pub fn for_instance(inst: &ComparisonInstance) -> Self {
        let l1 = inst.xset.count();
        let l2 = inst.yset.count();
        BilinearField {
            coupled: Mat::zeros(l1, l2),
            decoupled: Mat::zeros(l1, l2),
            gx: Mat::zeros(l1, inst.m()),
        }
    }

    pub fn new(inst: &ComparisonInstance, draw: &GaussianDraw) -> Result<Self> {
        let mut field = BilinearField::for_instance(inst);
        field.fill(inst, draw)?;
        Ok(field)
    }

    /// Recomputes both groups for a new draw, reusing the buffers.
    pub fn fill(&mut self, inst: &ComparisonInstance, draw: &GaussianDraw) -> Result<()> {
        let (m, n) = (inst.m(), inst.n());
        if draw.m() != m || draw.n() != n {
            return Err(Error::Dimension(format!(
                "draw is {}x{}, instance needs {}x{}",
                draw.m(),
                draw.n(),
                m,
                n
            )));
        }
        let xs = &inst.xset;
        let ys = &inst.yset;
        for i1 in 0..xs.count() {
            let x = xs.vector(i1);
            let row = self.gx.row_mut(i1);
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = dot(draw.g.row(j), x);
            }
        }
        for i1 in 0..xs.count() {
            let xn = xs.norm(i1);
            let hx = dot(&draw.h, xs.vector(i1));
            let gx = self.gx.row(i1);
            for i2 in 0..ys.count() {
                let y = ys.vector(i2);
                let yn = ys.norm(i2);
                self.coupled.set(i1, i2, dot(y, gx) + xn * yn * draw.u4);
                self.decoupled
                    .set(i1, i2, xn * dot(y, &draw.u2) + yn * hx);
            }
        }
        Ok(())
    }

    pub fn l1(&self) -> usize {
        self.coupled.rows()
    }

    pub fn l2(&self) -> usize {
        self.coupled.cols()
    }

    /// Field value `f1h` for the (i1, i2) pair at interpolation point t.
    #[inline]
    pub fn value(&self, i1: usize, i2: usize, t: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&t));
        t.sqrt() * self.coupled.at(i1, i2) + (1.0 - t).sqrt() * self.decoupled.at(i1, i2)
    }

    /// d/dt of the field value; singular at the endpoints.
    #[inline]
    pub fn derivative(&self, i1: usize, i2: usize, t: f64) -> f64 {
        self.coupled.at(i1, i2) / (2.0 * t.sqrt())
            - self.decoupled.at(i1, i2) / (2.0 * (1.0 - t).sqrt())
    }

    pub fn coupled(&self) -> &Mat {
        &self.coupled
    }

    pub fn decoupled(&self) -> &Mat {
        &self.decoupled
    }
}

/// Per-draw log-domain quantities shared by every estimator.
///
/// `log_c[i1]` is the log of the inner sum of exponentials over i2,
/// `log_z` the outer log-sum of `s*log_c`, `p` the outer softmax weights
/// and `q` the per-row inner softmax weights. `p` sums to one and so does
/// every row of `q`.
#[derive(Debug, Clone)]
pub struct SampleWorkspace {
    pub f: Mat,
    pub log_c: Vec<f64>,
    pub log_z: f64,
    pub p: Vec<f64>,
    pub q: Mat,
    pub t: f64,
    pub beta: f64,
    pub s: f64,
}

impl SampleWorkspace {
    /// Empty workspace sized l1 x l2, to be populated with [`rebuild`].
    ///
    /// [`rebuild`]: SampleWorkspace::rebuild
    pub fn sized(l1: usize, l2: usize) -> Self {
        SampleWorkspace {
            f: Mat::zeros(l1, l2),
            log_c: vec![0.0; l1],
            log_z: f64::NAN,
            p: vec![0.0; l1],
            q: Mat::zeros(l1, l2),
            t: f64::NAN,
            beta: f64::NAN,
            s: f64::NAN,
        }
    }

    /// Builds the workspace for one draw of an instance at interpolation
    /// point t.
    pub fn build(inst: &ComparisonInstance, draw: &GaussianDraw, t: f64) -> Result<Self> {
        let field = BilinearField::new(inst, draw)?;
        SampleWorkspace::from_field(&field, inst.beta, inst.s, t)
    }

    pub fn from_field(field: &BilinearField, beta: f64, s: f64, t: f64) -> Result<Self> {
        let mut ws = SampleWorkspace::sized(field.l1(), field.l2());
        ws.rebuild(field, beta, s, t)?;
        Ok(ws)
    }

    /// Recomputes everything in place for a new (field, t) combination.
    pub fn rebuild(&mut self, field: &BilinearField, beta: f64, s: f64, t: f64) -> Result<()> {
        let (l1, l2) = (field.l1(), field.l2());
        debug_assert_eq!(self.f.rows(), l1);
        debug_assert_eq!(self.f.cols(), l2);
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Parameter(format!("t={t} outside [0,1]")));
        }
        self.t = t;
        self.beta = beta;
        self.s = s;

        let st = t.sqrt();
        let s1t = (1.0 - t).sqrt();
        for i1 in 0..l1 {
            let c = field.coupled.row(i1);
            let d = field.decoupled.row(i1);
            let f = self.f.row_mut(i1);
            for i2 in 0..l2 {
                f[i2] = st * c[i2] + s1t * d[i2];
            }
        }

        // Inner softmax per row: log_c[i1] = logsumexp(beta * f_row) and
        // q_row = softmax(beta * f_row), sharing one exp pass.
        for i1 in 0..l1 {
            let f = self.f.row(i1);
            let mut mx = f64::NEG_INFINITY;
            for &v in f {
                mx = mx.max(beta * v);
            }
            let q = self.q.row_mut(i1);
            let mut sum = 0.0;
            for (i2, &v) in f.iter().enumerate() {
                let e = (beta * v - mx).exp();
                q[i2] = e;
                sum += e;
            }
            for slot in q.iter_mut() {
                *slot /= sum;
            }
            self.log_c[i1] = mx + sum.ln();
        }

        // Outer softmax over s * log_c.
        let mut mz = f64::NEG_INFINITY;
        for &lc in &self.log_c {
            mz = mz.max(s * lc);
        }
        let mut zsum = 0.0;
        for (i1, &lc) in self.log_c.iter().enumerate() {
            let e = (s * lc - mz).exp();
            self.p[i1] = e;
            zsum += e;
        }
        for slot in self.p.iter_mut() {
            *slot /= zsum;
        }
        self.log_z = mz + zsum.ln();

        if !self.log_z.is_finite() {
            return Err(Error::Overflow(format!(
                "log_z = {} at beta={beta}, s={s}, t={t}",
                self.log_z
            )));
        }
        Ok(())
    }

    pub fn l1(&self) -> usize {
        self.f.rows()
    }

    pub fn l2(&self) -> usize {
        self.f.cols()
    }
}

/// Per-draw integrand of the direct value: `log_z / (beta |s| sqrt(n))`
/// where n is the dimension of the x vectors.
pub fn psi_sample(ws: &SampleWorkspace, n: usize) -> f64 {
    ws.log_z / (ws.beta * ws.s.abs() * (n as f64).sqrt())
}

/// Per-draw integrand of the lifted value: `exp(c3 * log_z)`.
pub fn psistar_sample(ws: &SampleWorkspace, c3: f64) -> Result<f64> {
    let v = (c3 * ws.log_z).exp();
    if v.is_infinite() {
        return Err(Error::Overflow(format!(
            "exp({c3} * {}) overflows",
            ws.log_z
        )));
    }
    Ok(v)
}
