//! Variance-explained measures and diagnostics for (sparse) components.
//!
//! All quadratic forms go through `n`-vectors: `t'XX't` is evaluated as
//! `‖X't‖²`, never by forming `X'X`.

use ndarray::{Array1, ArrayView1, ArrayView2};
use thiserror::Error;

use crate::linalg::{self, sq_norm};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("component set is numerically singular at column {index}")]
    Singular { index: usize },
    #[error("component is zero")]
    ZeroComponent,
    #[error("component is fully explained by the previous ones")]
    Degenerate,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Relative squared-norm threshold under which a column of a component set
/// counts as dependent on the preceding ones.
const SINGULAR_TOL: f64 = 1e-12;

/// `trace(X'T(T'T)⁻¹T'X)`: total variance of the projection of `X` onto the
/// span of the columns of `T`.
pub fn vexp(x: ArrayView2<'_, f64>, t: ArrayView2<'_, f64>) -> Result<f64, MetricsError> {
    if t.nrows() != x.nrows() {
        return Err(MetricsError::Dimension("T and X row counts differ".into()));
    }
    let basis = linalg::orthonormal_columns(t, SINGULAR_TOL).map_err(|index| MetricsError::Singular { index })?;
    Ok(basis.iter().map(|q| sq_norm(x.t().dot(q).view())).sum())
}

/// Variance explained by a single component `t`: `t'XX't / t't`.
pub fn vexp_single(x: ArrayView2<'_, f64>, t: ArrayView1<'_, f64>) -> Result<f64, MetricsError> {
    let tt = sq_norm(t);
    if !(tt > 0.0) {
        return Err(MetricsError::ZeroComponent);
    }
    Ok(sq_norm(x.t().dot(&t).view()) / tt)
}

/// Extra variance explained by the component `Xa`, given the matrix `Q`
/// deflated by all previously accepted components: `‖X'Qa‖² / ‖Qa‖²`.
///
/// `loadings` is the full `p`-vector `a`.
pub fn evexp(
    x: ArrayView2<'_, f64>,
    q: ArrayView2<'_, f64>,
    loadings: ArrayView1<'_, f64>,
) -> Result<f64, MetricsError> {
    if loadings.len() != q.ncols() || q.dim() != x.dim() {
        return Err(MetricsError::Dimension("X, Q and loadings disagree".into()));
    }
    let full = x.dot(&loadings);
    let deflated = q.dot(&loadings);
    evexp_deflated(x, full.view(), deflated.view())
}

/// [`evexp`] from the component `t = Xa` and its deflated version `Qa`.
pub fn evexp_deflated(
    x: ArrayView2<'_, f64>,
    full: ArrayView1<'_, f64>,
    deflated: ArrayView1<'_, f64>,
) -> Result<f64, MetricsError> {
    let tt = sq_norm(full);
    if !(tt > 0.0) {
        return Err(MetricsError::ZeroComponent);
    }
    let dd = sq_norm(deflated);
    if !(dd > 1e-24 * tt) {
        return Err(MetricsError::Degenerate);
    }
    Ok(sq_norm(x.t().dot(&deflated).view()) / dd)
}

/// Variance of `Q` explained by `t`: `t'QQ't / t't`. A lower bound for evexp.
pub fn vexp_q(q: ArrayView2<'_, f64>, t: ArrayView1<'_, f64>) -> Result<f64, MetricsError> {
    vexp_single(q, t)
}

/// Relative cumulative variance explained: `Σ evexp_j / Σ λ_j` over a prefix.
pub fn rcvexp(evexps: &[f64], pc_lambdas: &[f64]) -> f64 {
    let num: f64 = evexps.iter().sum();
    let den: f64 = pc_lambdas[..evexps.len()].iter().sum();
    num / den
}

/// Pearson correlation of two score vectors.
pub fn pc_correlation(t: ArrayView1<'_, f64>, u: ArrayView1<'_, f64>) -> f64 {
    let n = t.len() as f64;
    let mt = t.sum() / n;
    let mu = u.sum() / n;
    let (mut stu, mut stt, mut suu) = (0.0, 0.0, 0.0);
    for (a, b) in t.iter().zip(u.iter()) {
        let (da, db) = (a - mt, b - mu);
        stu += da * db;
        stt += da * da;
        suu += db * db;
    }
    if stt == 0.0 || suu == 0.0 {
        return 0.0;
    }
    (stu / (stt * suu).sqrt()).clamp(-1.0, 1.0)
}

/// `R²_j` of each column regressed on all the other columns.
///
/// Uses `R²_j = 1 − 1/(s_jj (S⁻¹)_jj)` when `S = X'X` factors cleanly and
/// falls back to projecting each column on an orthonormal basis of the
/// others (skipping dependent columns) otherwise. Perfectly collinear columns get `R² = 1`.
pub fn squared_multiple_correlations(x: ArrayView2<'_, f64>) -> Vec<f64> {
    let p = x.ncols();
    if p == 1 {
        return vec![0.0];
    }
    let s = x.t().dot(&x);
    let diag_max = s.diag().iter().copied().fold(0.0, f64::max);
    let min_pivot = 1e-10 * diag_max;
    if let Ok(l) = linalg::cholesky(s.view(), min_pivot) {
        return (0..p)
            .map(|j| {
                if s[[j, j]] == 0.0 {
                    return 0.0;
                }
                let e = Array1::from_shape_fn(p, |i| if i == j { 1.0 } else { 0.0 });
                let y = linalg::solve_lower(l.view(), e.view());
                let inv_jj = sq_norm(y.view());
                (1.0 - 1.0 / (s[[j, j]] * inv_jj)).clamp(0.0, 1.0)
            })
            .collect();
    }
    (0..p).map(|j| smc_by_projection(x, j)).collect()
}

fn smc_by_projection(x: ArrayView2<'_, f64>, j: usize) -> f64 {
    let xj = x.column(j);
    let sjj = sq_norm(xj);
    if sjj == 0.0 {
        return 0.0;
    }
    let mut basis: Vec<Array1<f64>> = Vec::new();
    for (k, col) in x.columns().into_iter().enumerate() {
        if k == j {
            continue;
        }
        let orig = sq_norm(col);
        let mut v = col.to_owned();
        linalg::orthogonalize(&basis, &mut v);
        let res = sq_norm(v.view());
        if orig == 0.0 || res <= 1e-10 * orig {
            continue;
        }
        v /= res.sqrt();
        basis.push(v);
    }
    (linalg::projected_sq_norm(&basis, xj) / sjj).clamp(0.0, 1.0)
}

/// `R²` of the (centered) response `y` regressed on the given score vectors.
pub fn response_r2(scores: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<f64, MetricsError> {
    if scores.nrows() != y.len() {
        return Err(MetricsError::Dimension("scores and response lengths differ".into()));
    }
    let mean = y.sum() / y.len() as f64;
    let yc = y.mapv(|v| v - mean);
    let yy = sq_norm(yc.view());
    if !(yy > 0.0) {
        return Err(MetricsError::ZeroComponent);
    }
    let basis =
        linalg::orthonormal_columns(scores, SINGULAR_TOL).map_err(|index| MetricsError::Singular { index })?;
    Ok(linalg::projected_sq_norm(&basis, yc.view()) / yy)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentNorm {
    /// `a'Sa` for unit-norm `a`.
    pub norm: f64,
    /// `norm / λ₁`.
    pub rel_norm: f64,
}

/// Norm `a'Sa` of a component with unit-norm loadings, relative to `λ₁(S)`.
pub fn component_norm(s: ArrayView2<'_, f64>, a: ArrayView1<'_, f64>, lambda1: f64) -> ComponentNorm {
    let norm = a.dot(&s.dot(&a));
    ComponentNorm { norm, rel_norm: norm / lambda1 }
}

/// Same as [`component_norm`] evaluated in score space as `‖Xa‖²`.
pub fn component_norm_scores(x: ArrayView2<'_, f64>, a: ArrayView1<'_, f64>, lambda1: f64) -> ComponentNorm {
    let norm = sq_norm(x.dot(&a).view());
    ComponentNorm { norm, rel_norm: norm / lambda1 }
}

/// All per-component measures in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentMetrics {
    pub vexp: f64,
    pub evexp: f64,
    pub vexp_q: f64,
    /// `a'Sa` after rescaling the loadings to unit norm.
    pub norm: f64,
    pub rel_norm: f64,
    pub pc_correlation: f64,
    pub cardinality: usize,
}

/// Evaluates a component with full loadings `a` against `X`, the deflated `Q`
/// of its step, the first eigenvalue `λ₁` of `X'X`, and the PC it approximates.
pub fn component_metrics(
    x: ArrayView2<'_, f64>,
    q: ArrayView2<'_, f64>,
    loadings: ArrayView1<'_, f64>,
    lambda1: f64,
    pc_scores: ArrayView1<'_, f64>,
) -> Result<ComponentMetrics, MetricsError> {
    let t = x.dot(&loadings);
    let a_norm = sq_norm(loadings).sqrt();
    if !(a_norm > 0.0) {
        return Err(MetricsError::ZeroComponent);
    }
    let deflated = q.dot(&loadings);
    let norm = sq_norm(t.view()) / (a_norm * a_norm);
    Ok(ComponentMetrics {
        vexp: vexp_single(x, t.view())?,
        evexp: evexp_deflated(x, t.view(), deflated.view())?,
        vexp_q: vexp_q(q, t.view())?,
        norm,
        rel_norm: norm / lambda1,
        pc_correlation: pc_correlation(t.view(), pc_scores),
        cardinality: loadings.iter().filter(|v| **v != 0.0).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{random_matrix, trace_vexp};
    use ndarray::{array, Array2};

    #[test]
    fn full_span_explains_everything() {
        let x = random_matrix(10, 4, 1);
        let total: f64 = x.iter().map(|v| v * v).sum();
        let v = vexp(x.view(), x.view()).unwrap();
        assert!((v - total).abs() < 1e-10 * total);
    }

    #[test]
    fn vexp_agrees_with_trace_formula() {
        let x = random_matrix(12, 5, 2);
        let t = random_matrix(12, 2, 3);
        let want = trace_vexp(&x, &t);
        assert!((vexp(x.view(), t.view()).unwrap() - want).abs() < 1e-10 * want);
    }

    #[test]
    fn vexp_is_span_invariant() {
        let x = random_matrix(9, 4, 4);
        let t = random_matrix(9, 2, 5);
        let mix = array![[2.0, 1.0], [-0.5, 3.0]];
        let a = vexp(x.view(), t.view()).unwrap();
        let b = vexp(x.view(), t.dot(&mix).view()).unwrap();
        assert!((a - b).abs() < 1e-10 * a);
    }

    #[test]
    fn singular_component_set() {
        let x = random_matrix(6, 3, 6);
        let mut t = Array2::<f64>::zeros((6, 2));
        t.column_mut(0).assign(&x.column(0));
        t.column_mut(1).assign(&(x.column(0).to_owned() * 2.0));
        assert_eq!(vexp(x.view(), t.view()), Err(MetricsError::Singular { index: 1 }));
    }

    #[test]
    fn vexp_q_of_orthogonal_component_is_zero() {
        let q = array![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
        assert_eq!(vexp_q(q.view(), array![0.0, 0.0, 2.0].view()).unwrap(), 0.0);
    }

    #[test]
    fn evexp_equals_vexp_on_first_step() {
        let x = random_matrix(10, 4, 7);
        let a = array![0.5, 0.0, -1.0, 0.25];
        let e = evexp(x.view(), x.view(), a.view()).unwrap();
        let v = vexp_single(x.view(), x.dot(&a).view()).unwrap();
        assert!((e - v).abs() < 1e-12 * v);
    }

    #[test]
    fn correlation_edge_cases() {
        let t = array![1.0, -2.0, 0.5, 0.5];
        assert!((pc_correlation(t.view(), t.view()) - 1.0).abs() < 1e-15);
        let u = array![1.0, 1.0, -1.0, -1.0];
        let v = array![1.0, -1.0, 1.0, -1.0];
        assert_eq!(pc_correlation(u.view(), v.view()), 0.0);
    }

    #[test]
    fn smc_orthogonal_and_duplicated() {
        let x = array![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let r = squared_multiple_correlations(x.view());
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        let d = array![[1.0, 1.0, 0.3], [-1.0, -1.0, 0.2], [2.0, 2.0, -1.0], [-2.0, -2.0, 0.5]];
        let r = squared_multiple_correlations(d.view());
        assert!((r[0] - 1.0).abs() < 1e-9 && (r[1] - 1.0).abs() < 1e-9);
        assert!(r[2] < 1.0);
    }

    #[test]
    fn smc_matches_direct_regression() {
        let x = random_matrix(30, 4, 8);
        let r = squared_multiple_correlations(x.view());
        for (j, &rj) in r.iter().enumerate() {
            let others: Vec<usize> = (0..4).filter(|&k| k != j).collect();
            let block = crate::oracles::columns(x.view(), &others);
            let xj = x.column(j);
            let want = crate::oracles::fitted_sq_norm(&block, xj) / xj.dot(&xj);
            assert!((rj - want).abs() < 1e-10, "{j}: {rj} vs {want}");
        }
    }

    #[test]
    fn response_r2_edges() {
        let t = array![[1.0], [-1.0], [2.0], [-2.0]];
        assert!((response_r2(t.view(), t.column(0)).unwrap() - 1.0).abs() < 1e-12);
        let y = array![1.0, 1.0, -0.5, -1.5];
        let y_perp = {
            // remove the component along t
            let tc = t.column(0);
            let c = y.dot(&tc) / tc.dot(&tc);
            &y - &(tc.to_owned() * c)
        };
        assert!(response_r2(t.view(), y_perp.view()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn eigenvector_has_full_norm() {
        let s = array![[2.0, 1.0], [1.0, 2.0]];
        let h = 0.5f64.sqrt();
        let n = component_norm(s.view(), array![h, h].view(), 3.0);
        assert!((n.norm - 3.0).abs() < 1e-12);
        assert!((n.rel_norm - 1.0).abs() < 1e-12);
    }
}
