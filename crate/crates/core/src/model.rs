//! Domain types: validated vector sets, comparison instances, Gaussian
//! draws, and estimator results, plus CSV/JSON ingestion and the bundled
//! reference sets used by the table presets.

use crate::error::{Error, Result};
use crate::mat::{norm, Mat};
use serde::Deserialize;
use std::io::Read;

/// Relative tolerance for the cached-norm consistency invariant.
pub const NORM_CACHE_RTOL: f64 = 1e-12;

/// Input format for [`load_vector_set`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetFormat {
    /// Comma-separated values, columns are vectors (d rows, l columns).
    /// An optional header row is detected by a non-numeric first row.
    Csv,
    /// `{"vectors": [[..],[..]]}` with vectors as rows. The row/column
    /// asymmetry with CSV is intentional: rows read better in JSON.
    Json,
}

/// An ordered collection of real vectors of common dimension, with cached
/// Euclidean norms. Zero vectors are rejected at construction: every
/// downstream formula divides by or multiplies with a vector norm.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    vectors: Vec<Vec<f64>>,
    norms: Vec<f64>,
    dim: usize,
}

impl VectorSet {
    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Parameter("vector set must contain at least one vector".into()));
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(Error::Parameter("vectors must have dimension >= 1".into()));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Dimension(format!(
                    "vector {} has dimension {}, expected {}",
                    i + 1,
                    v.len(),
                    dim
                )));
            }
            for (k, &x) in v.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFinite { row: k + 1, col: i + 1 });
                }
            }
        }
        let norms: Vec<f64> = vectors.iter().map(|v| norm(v)).collect();
        if let Some(i) = norms.iter().position(|&n| n == 0.0) {
            return Err(Error::ZeroNorm { col: i + 1 });
        }
        Ok(VectorSet { vectors, norms, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// Recomputes every norm and checks it against the cache within
    /// [`NORM_CACHE_RTOL`] relative.
    pub fn norm_cache_consistent(&self) -> bool {
        self.vectors
            .iter()
            .zip(&self.norms)
            .all(|(v, &n)| (norm(v) - n).abs() <= NORM_CACHE_RTOL * n.max(1.0))
    }

    /// Returns a set with every vector scaled to unit Euclidean norm.
    /// Directions are preserved; idempotent up to rounding.
    pub fn normalized(&self) -> VectorSet {
        let vectors: Vec<Vec<f64>> = self
            .vectors
            .iter()
            .zip(&self.norms)
            .map(|(v, &n)| v.iter().map(|x| x / n).collect())
            .collect();
        VectorSet::new(vectors).expect("normalizing a valid set keeps it valid")
    }

    /// Canonical CSV emission: columns are vectors, entries printed with six
    /// decimal places. `load` of the emitted text reproduces the set exactly
    /// at that precision, and re-emission is byte-identical.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.dim {
            for (i, v) in self.vectors.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{:.6}", v[r]));
            }
            out.push('\n');
        }
        out
    }
}

/// Loads a vector set from a byte stream in the declared format.
pub fn load_vector_set(mut source: impl Read, format: SetFormat) -> Result<VectorSet> {
    match format {
        SetFormat::Csv => {
            let mut text = String::new();
            source.read_to_string(&mut text)?;
            parse_csv(&text)
        }
        SetFormat::Json => {
            #[derive(Deserialize)]
            struct JsonVectors {
                vectors: Vec<Vec<f64>>,
            }
            let parsed: JsonVectors = serde_json::from_reader(source)?;
            VectorSet::new(parsed.vectors)
        }
    }
}

fn parse_csv(text: &str) -> Result<VectorSet> {
    let lines: Vec<&str> = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .collect();
    if lines.is_empty() {
        return Err(Error::Parse {
            row: 1,
            col: 1,
            message: "empty input".into(),
        });
    }
    // Header detection: a first row with any non-numeric cell is skipped.
    let has_header = lines[0]
        .split(',')
        .any(|cell| cell.trim().parse::<f64>().is_err());
    let data_lines = if has_header { &lines[1..] } else { &lines[..] };
    if data_lines.is_empty() {
        return Err(Error::Parse {
            row: 1,
            col: 1,
            message: "no data rows after header".into(),
        });
    }

    let cols = data_lines[0].split(',').count();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(data_lines.len());
    for (r, line) in data_lines.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != cols {
            return Err(Error::Parse {
                row: r + 1,
                col: cells.len().min(cols) + 1,
                message: format!("ragged row: {} cells, expected {}", cells.len(), cols),
            });
        }
        let mut row = Vec::with_capacity(cols);
        for (c, cell) in cells.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row: r + 1,
                col: c + 1,
                message: format!("not a number: {:?}", cell.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { row: r + 1, col: c + 1 });
            }
            row.push(v);
        }
        rows.push(row);
    }

    // Transpose: columns of the file are the vectors.
    let vectors: Vec<Vec<f64>> = (0..cols)
        .map(|c| rows.iter().map(|row| row[c]).collect())
        .collect();
    VectorSet::new(vectors)
}

/// A pair of vector sets plus the comparison parameters. `xset` vectors live
/// in dimension `n`, `yset` vectors in dimension `m`; the coupling matrix of
/// a draw is then `m x n`. The two sets may have different cardinalities.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonInstance {
    pub xset: VectorSet,
    pub yset: VectorSet,
    pub beta: f64,
    pub s: f64,
    pub c3: Option<f64>,
}

impl ComparisonInstance {
    pub fn new(xset: VectorSet, yset: VectorSet, beta: f64, s: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::Parameter(format!("beta must be positive, got {beta}")));
        }
        if !s.is_finite() || s == 0.0 {
            return Err(Error::Parameter(format!("s must be nonzero, got {s}")));
        }
        Ok(ComparisonInstance {
            xset,
            yset,
            beta,
            s,
            c3: None,
        })
    }

    /// Sets the lifting exponent. The values 0 and 1 make the lifted
    /// derivative identically zero and are rejected to avoid silent no-ops.
    pub fn with_c3(mut self, c3: f64) -> Result<Self> {
        if !c3.is_finite() || c3 == 0.0 || c3 == 1.0 {
            return Err(Error::Parameter(format!(
                "c3 must be finite and different from 0 and 1, got {c3}"
            )));
        }
        self.c3 = Some(c3);
        Ok(self)
    }

    /// Instance over the bundled reference sets.
    pub fn builtin(beta: f64, s: f64) -> Result<Self> {
        let (xset, yset) = builtin_sets();
        ComparisonInstance::new(xset, yset, beta, s)
    }

    /// Dimension of the x vectors.
    pub fn n(&self) -> usize {
        self.xset.dim()
    }

    /// Dimension of the y vectors.
    pub fn m(&self) -> usize {
        self.yset.dim()
    }
}

/// One joint realization of the Gaussian ensemble: the coupling matrix `g`
/// (m x n), the scalar `u4`, and the decoupled vectors `u2` (dimension m)
/// and `h` (dimension n).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianDraw {
    pub g: Mat,
    pub u4: f64,
    pub u2: Vec<f64>,
    pub h: Vec<f64>,
}

impl GaussianDraw {
    pub fn new(g: Mat, u4: f64, u2: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        if g.rows() != u2.len() || g.cols() != h.len() {
            return Err(Error::Dimension(format!(
                "draw dimensions disagree: g is {}x{}, u2 has {}, h has {}",
                g.rows(),
                g.cols(),
                u2.len(),
                h.len()
            )));
        }
        let finite = g.is_finite()
            && u4.is_finite()
            && u2.iter().all(|v| v.is_finite())
            && h.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::Parameter("draw contains non-finite entries".into()));
        }
        Ok(GaussianDraw { g, u4, u2, h })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        GaussianDraw {
            g: Mat::zeros(m, n),
            u4: 0.0,
            u2: vec![0.0; m],
            h: vec![0.0; n],
        }
    }

    pub fn m(&self) -> usize {
        self.g.rows()
    }

    pub fn n(&self) -> usize {
        self.g.cols()
    }
}

/// Monte Carlo summary for one functional at one interpolation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorResult {
    pub mean: f64,
    /// Sample standard deviation divided by sqrt(n_samples); 0 for a single
    /// sample.
    pub std_error: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Interpolation parameter the estimate was taken at.
    pub t: f64,
}

const XREF: [[f64; 10]; 5] = [
    [-0.7998, 0.1004, -0.7599, 0.6616, 0.5864, -0.4010, -0.0148, -0.8320, 0.3187, -0.4861],
    [0.1760, 0.0704, 0.1056, -0.1369, -0.6259, -0.5289, -0.3740, 0.3140, 0.6299, -0.5494],
    [0.0806, -0.9085, -0.3381, -0.1970, -0.1438, 0.4863, 0.5832, 0.0840, -0.2299, -0.2647],
    [0.5487, -0.3120, -0.5447, 0.5673, 0.4870, -0.5239, 0.0407, -0.2955, 0.3913, 0.5113],
    [-0.1476, 0.2497, -0.0208, 0.4276, 0.0808, -0.2202, -0.7198, 0.3389, 0.5438, -0.3611],
];

const YREF: [[f64; 10]; 5] = [
    [-0.4639, 0.7324, -0.4828, 0.0280, -0.4016, -0.6764, 0.6161, 0.4281, -0.3831, 0.0699],
    [0.0416, -0.3678, 0.0144, -0.4856, 0.4880, -0.6861, 0.1266, 0.5132, 0.0350, -0.0308],
    [-0.6522, 0.1775, 0.2449, -0.2417, -0.1255, 0.2355, 0.0859, -0.1498, 0.2410, -0.7208],
    [-0.5981, -0.1078, 0.4879, -0.3456, 0.5796, -0.0856, 0.6892, 0.1325, 0.8628, -0.1637],
    [-0.0037, 0.5340, 0.6846, 0.7652, -0.4989, -0.0946, -0.3492, -0.7165, -0.2225, -0.6692],
];

fn columns_of(rows: &[[f64; 10]; 5]) -> VectorSet {
    let vectors: Vec<Vec<f64>> = (0..10).map(|c| rows.iter().map(|r| r[c]).collect()).collect();
    VectorSet::new(vectors).expect("reference sets are valid")
}

/// The bundled reference sets: two collections of ten vectors in dimension
/// five, printed to four decimals with columns scaled to unit norm (the
/// rounding leaves norms within 1e-3 of one).
pub fn builtin_sets() -> (VectorSet, VectorSet) {
    (columns_of(&XREF), columns_of(&YREF))
}
