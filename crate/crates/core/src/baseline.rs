//! Conventional norm-maximizing SPCA baselines: simple thresholding of the
//! first PC and, for small `p`, the exhaustive optimal subset.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use thiserror::Error;

use crate::data::DataMatrix;
use crate::eigen::{self, EigenError, PowerOptions};
use crate::linalg::{apply_sign_rule, sq_norm};
use crate::metrics;

/// Largest `p` accepted by [`optimal_norm_subset`].
pub const MAX_EXHAUSTIVE_P: usize = 20;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("cardinality {c} outside 1..={p}")]
    Cardinality { c: usize, p: usize },
    #[error("exhaustive search needs p <= {MAX_EXHAUSTIVE_P}, got {0}")]
    TooLarge(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormComponent {
    /// Increasing variable indices.
    pub indices: Vec<usize>,
    /// Unit-norm loadings aligned with `indices`.
    pub unit_loadings: Array1<f64>,
    /// `a'Sa`.
    pub norm: f64,
    /// `a'Sa / λ₁`.
    pub rel_norm: f64,
}

impl NormComponent {
    pub fn full_loadings(&self, p: usize) -> Array1<f64> {
        let mut a = Array1::zeros(p);
        for (&j, &v) in self.indices.iter().zip(self.unit_loadings.iter()) {
            a[j] = v;
        }
        a
    }
}

/// Indices of the `c` largest `|v_i|`, lowest index first on ties, returned
/// in increasing order.
pub fn largest_entries(v: ArrayView1<'_, f64>, c: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    // stable sort keeps lower indices ahead of equal magnitudes
    order.sort_by(|&i, &j| v[j].abs().partial_cmp(&v[i].abs()).unwrap_or(std::cmp::Ordering::Equal));
    let mut keep = order[..c.min(order.len())].to_vec();
    keep.sort_unstable();
    keep
}

/// Keeps the `c` largest-magnitude PC loadings of `v` and renormalizes.
/// The norm `a'X'Xa` is computed as `‖Xa‖²`.
pub fn threshold_spca(
    x: ArrayView2<'_, f64>,
    v: ArrayView1<'_, f64>,
    c: usize,
    lambda1: f64,
) -> Result<NormComponent, BaselineError> {
    let p = v.len();
    if c == 0 || c > p {
        return Err(BaselineError::Cardinality { c, p });
    }
    if x.ncols() != p {
        return Err(BaselineError::Dimension(format!("X has {} columns, v has {p}", x.ncols())));
    }
    let indices = largest_entries(v, c);
    let mut loadings: Array1<f64> = indices.iter().map(|&j| v[j]).collect();
    let len = sq_norm(loadings.view()).sqrt();
    if len > 0.0 {
        loadings /= len;
    } else {
        loadings.fill(1.0 / (c as f64).sqrt());
    }
    let mut full = Array1::zeros(p);
    for (&j, &a) in indices.iter().zip(loadings.iter()) {
        full[j] = a;
    }
    let cn = metrics::component_norm_scores(x, full.view(), lambda1);
    Ok(NormComponent { indices, unit_loadings: loadings, norm: cn.norm, rel_norm: cn.rel_norm })
}

fn dominant_pair(s: &Array2<f64>, opts: &PowerOptions) -> Result<(Array1<f64>, f64), EigenError> {
    let d = s.nrows();
    let k = (0..d).fold(0, |best, i| if s[[i, i]] > s[[best, best]] { i } else { best });
    if !(s[[k, k]] > 0.0) {
        let mut v = Array1::zeros(d);
        v[0] = 1.0;
        return Ok((v, 0.0));
    }
    let init = s.column(k).to_owned();
    match eigen::leading_eigenpair(s, init.view(), opts) {
        Ok(pair) => Ok((pair.vector, pair.value)),
        // near-degenerate leading pair: the eigenvalue is still accurate
        Err(EigenError::NoConvergence { best }) => Ok((best.vector, best.value)),
        Err(e) => Err(e),
    }
}

/// Exhaustive search over all `C(p, c)` subsets for the unit-norm loadings
/// maximizing `a'Sa`. Subsets are visited in lexicographic order and a later
/// subset replaces the incumbent only on strict improvement.
pub fn optimal_norm_subset(s: ArrayView2<'_, f64>, c: usize) -> Result<NormComponent, BaselineError> {
    let p = s.nrows();
    if s.ncols() != p {
        return Err(BaselineError::Dimension(format!("S is {:?}", s.dim())));
    }
    if p > MAX_EXHAUSTIVE_P {
        return Err(BaselineError::TooLarge(p));
    }
    if c == 0 || c > p {
        return Err(BaselineError::Cardinality { c, p });
    }
    let opts = PowerOptions { tol: 1e-12, max_iter: Some(20_000) };
    let (_, lambda1) = dominant_pair(&s.to_owned(), &opts)?;

    let mut idx: Vec<usize> = (0..c).collect();
    let mut best: Option<(Vec<usize>, Array1<f64>, f64)> = None;
    loop {
        let sub = Array2::from_shape_fn((c, c), |(i, j)| s[[idx[i], idx[j]]]);
        let (vec, val) = dominant_pair(&sub, &opts)?;
        let improves = match &best {
            None => true,
            Some((_, _, b)) => val > b + 1e-12 * b.abs().max(f64::MIN_POSITIVE),
        };
        if improves {
            best = Some((idx.clone(), vec, val));
        }
        if !next_combination(&mut idx, p) {
            break;
        }
    }
    let (indices, mut unit_loadings, norm) = best.expect("at least one subset");
    apply_sign_rule(&mut unit_loadings);
    let rel_norm = if lambda1 > 0.0 { norm / lambda1 } else { 0.0 };
    Ok(NormComponent { indices, unit_loadings, norm, rel_norm })
}

fn next_combination(idx: &mut [usize], p: usize) -> bool {
    let c = idx.len();
    let mut i = c;
    while i > 0 {
        i -= 1;
        if idx[i] < p - c + i {
            idx[i] += 1;
            for k in (i + 1)..c {
                idx[k] = idx[k - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// One row of a norm / variance-explained curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub cardinality: usize,
    pub norm: f64,
    pub rel_norm: f64,
    /// `vexp(t) / λ₁` for the single component `t`.
    pub rcvexp: f64,
    pub pc_correlation: f64,
}

/// Evaluates a unit-norm loading vector as a single first component.
pub fn evaluate_first_component(
    x: ArrayView2<'_, f64>,
    full_loadings: ArrayView1<'_, f64>,
    cardinality: usize,
    lambda1: f64,
    pc_scores: ArrayView1<'_, f64>,
) -> CurvePoint {
    let t = x.dot(&full_loadings);
    let norm = sq_norm(t.view());
    let vexp = metrics::vexp_single(x, t.view()).unwrap_or(0.0);
    CurvePoint {
        cardinality,
        norm,
        rel_norm: norm / lambda1,
        rcvexp: vexp / lambda1,
        pc_correlation: metrics::pc_correlation(t.view(), pc_scores),
    }
}

/// Thresholded first-PC components at each cardinality.
pub fn baseline_curve(
    x: &DataMatrix,
    cardinalities: &[usize],
    opts: &PowerOptions,
) -> Result<Vec<CurvePoint>, BaselineError> {
    let xv = x.values().view();
    let pc = eigen::leading_pc(xv, opts)?;
    cardinalities
        .iter()
        .map(|&c| {
            let comp = threshold_spca(xv, pc.loadings.view(), c, pc.lambda)?;
            let full = comp.full_loadings(x.p());
            Ok(evaluate_first_component(xv, full.view(), c, pc.lambda, pc.scores.view()))
        })
        .collect()
}
