//! Leading eigenpairs by power iteration.
//!
//! Only the dominant eigenvector is ever needed per component, so nothing
//! here computes a full spectral decomposition. [`leading_pc`] forms the
//! smaller of the two Gram matrices of `Q` once and iterates on it.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use thiserror::Error;

use crate::linalg::{self, apply_sign_rule, sq_norm};

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("power iteration did not converge in {} iterations (relative residual {:.3e})", best.iterations, best.relative_residual())]
    NoConvergence { best: EigenPair },
    #[error("initial vector is zero")]
    ZeroInit,
    #[error("matrix is zero")]
    ZeroMatrix,
    #[error("metric matrix is numerically singular at pivot {index}")]
    SingularMetric { index: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    /// Relative residual `‖Mv − λv‖ ≤ tol·λ` at which iteration stops.
    pub tol: f64,
    /// Iteration cap; `None` means [`PowerOptions::max_iter_for`].
    pub max_iter: Option<usize>,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: None }
    }
}

impl PowerOptions {
    /// Default cap for a `d`-dimensional operator: `10·d + 1000`, raised for
    /// small `d` up to roughly 1e9 multiply-adds so near-tied leading
    /// eigenvalues still converge.
    pub fn max_iter_for(&self, dim: usize) -> usize {
        const WORK_BUDGET: usize = 1_000_000_000;
        const MAX_DEFAULT: usize = 1_000_000;
        let budget = (WORK_BUDGET / dim.max(1).pow(2)).min(MAX_DEFAULT);
        self.max_iter.unwrap_or((10 * dim + 1000).max(budget))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    /// Unit norm for ordinary problems; `B`-normalized (`a'Ba = 1`) for
    /// generalized ones.
    pub vector: Array1<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Absolute residual norm of the returned pair.
    pub residual: f64,
}

impl EigenPair {
    pub fn relative_residual(&self) -> f64 {
        if self.value > 0.0 {
            self.residual / self.value
        } else {
            self.residual
        }
    }
}

/// A symmetric positive semidefinite linear map.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64>;
}

impl SymmetricOperator for Array2<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.dot(&x)
    }
}

impl SymmetricOperator for ArrayView2<'_, f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.dot(&x)
    }
}

/// Wraps a closure as a [`SymmetricOperator`]. The caller vouches for symmetry.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(ArrayView1<'_, f64>) -> Array1<f64>,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> SymmetricOperator for FnOperator<F>
where
    F: Fn(ArrayView1<'_, f64>) -> Array1<f64>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        (self.f)(x)
    }
}

/// Dominant eigenpair of a symmetric PSD operator by plain power iteration.
///
/// The returned vector has its largest-magnitude entry positive. A zero
/// operator yields the normalized `init` with value 0.
pub fn leading_eigenpair<Op: SymmetricOperator + ?Sized>(
    op: &Op,
    init: ArrayView1<'_, f64>,
    opts: &PowerOptions,
) -> Result<EigenPair, EigenError> {
    let d = op.dim();
    if init.len() != d {
        return Err(EigenError::Dimension(format!("init has length {}, operator is {d}", init.len())));
    }
    let init_norm = sq_norm(init).sqrt();
    if !(init_norm > 0.0) {
        return Err(EigenError::ZeroInit);
    }
    let mut v = init.to_owned() / init_norm;
    let max_iter = opts.max_iter_for(d);
    let mut best: Option<EigenPair> = None;
    let mut prev_rayleigh = f64::NEG_INFINITY;

    for it in 1..=max_iter {
        let w = op.apply(v.view());
        let lambda = linalg::dot(v.view(), w.view());
        let w_norm = sq_norm(w.view()).sqrt();
        if w_norm == 0.0 {
            apply_sign_rule(&mut v);
            return Ok(EigenPair { vector: v, value: 0.0, iterations: it, residual: 0.0 });
        }
        let mut r = w.clone();
        r.scaled_add(-lambda, &v);
        let residual = sq_norm(r.view()).sqrt();
        debug_assert!(
            lambda >= prev_rayleigh - 1e-10 * lambda.abs().max(1e-300),
            "Rayleigh quotient decreased: {prev_rayleigh} -> {lambda}"
        );
        prev_rayleigh = lambda;
        if residual <= opts.tol * lambda {
            apply_sign_rule(&mut v);
            return Ok(EigenPair { vector: v, value: lambda, iterations: it, residual });
        }
        if best.as_ref().is_none_or(|b| residual / lambda < b.relative_residual()) {
            best = Some(EigenPair { vector: v.clone(), value: lambda, iterations: it, residual });
        }
        v = w / w_norm;
    }
    let mut best = best.expect("at least one iteration");
    best.iterations = max_iter;
    apply_sign_rule(&mut best.vector);
    Err(EigenError::NoConvergence { best })
}

/// Leading principal component of a data-like matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalComponent {
    /// `u = Q v`, with `u'u = lambda`.
    pub scores: Array1<f64>,
    /// Unit-norm loadings `v`.
    pub loadings: Array1<f64>,
    pub lambda: f64,
    pub iterations: usize,
}

impl PrincipalComponent {
    /// Completes a PC from unit-norm variable-space loadings.
    pub fn from_loadings(q: ArrayView2<'_, f64>, mut loadings: Array1<f64>, iterations: usize) -> Self {
        apply_sign_rule(&mut loadings);
        let scores = q.dot(&loadings);
        let lambda = sq_norm(scores.view());
        Self { scores, loadings, lambda, iterations }
    }

    /// Completes a PC from an eigenvector of `QQ'`.
    pub fn from_observation_vector(
        q: ArrayView2<'_, f64>,
        w: ArrayView1<'_, f64>,
        iterations: usize,
    ) -> Result<Self, EigenError> {
        let mut v = q.t().dot(&w);
        let norm = sq_norm(v.view()).sqrt();
        if !(norm > 0.0) {
            return Err(EigenError::ZeroMatrix);
        }
        v /= norm;
        Ok(Self::from_loadings(q, v, iterations))
    }
}

/// Which Gram matrix the power iteration runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramSide {
    /// Pick the smaller one: `Q'Q` when `p ≤ n`, `QQ'` otherwise.
    Auto,
    /// Variable space, `p × p`.
    Variables,
    /// Observation space, `n × n`.
    Observations,
}

/// First PC of `q` (`n × p`).
pub fn leading_pc(q: ArrayView2<'_, f64>, opts: &PowerOptions) -> Result<PrincipalComponent, EigenError> {
    leading_pc_on(q, opts, GramSide::Auto)
}

pub fn leading_pc_on(
    q: ArrayView2<'_, f64>,
    opts: &PowerOptions,
    side: GramSide,
) -> Result<PrincipalComponent, EigenError> {
    let (n, p) = q.dim();
    let col_norms: Vec<f64> = q.axis_iter(Axis(1)).map(sq_norm).collect();
    let (k, max_norm) = col_norms
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
    if !(max_norm > 0.0) {
        return Err(EigenError::ZeroMatrix);
    }
    let side = match side {
        GramSide::Auto if p <= n => GramSide::Variables,
        GramSide::Auto => GramSide::Observations,
        s => s,
    };
    let seed = q.column(k);
    match side {
        GramSide::Variables => {
            let gram = q.t().dot(&q);
            leading_pc_with_gram(q, gram.view(), opts)
        }
        _ => {
            let gram = q.dot(&q.t());
            let pair = leading_eigenpair(&gram, seed, opts)?;
            PrincipalComponent::from_observation_vector(q, pair.vector.view(), pair.iterations)
        }
    }
}

/// Variable-side [`leading_pc`] with a precomputed `Q'Q`. The start vector
/// is the Gram column of the largest-norm column of `q`, i.e. `Q'q_k`.
pub fn leading_pc_with_gram(
    q: ArrayView2<'_, f64>,
    gram: ArrayView2<'_, f64>,
    opts: &PowerOptions,
) -> Result<PrincipalComponent, EigenError> {
    let p = q.ncols();
    if gram.dim() != (p, p) {
        return Err(EigenError::Dimension(format!("Gram is {:?}, Q has {p} columns", gram.dim())));
    }
    let diag = gram.diag();
    let (k, max_norm) =
        diag.iter().copied().enumerate().fold((0, 0.0), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
    if !(max_norm > 0.0) {
        return Err(EigenError::ZeroMatrix);
    }
    let pair = leading_eigenpair(&gram, gram.column(k), opts)?;
    Ok(PrincipalComponent::from_loadings(q, pair.vector, pair.iterations))
}

/// Largest generalized eigenpair of `A a = γ B a` with `A` PSD and `B` PD.
///
/// Iterates on the symmetrized operator `L⁻¹ A L⁻ᵀ` with `B = L Lᵀ` factored
/// once. The vector is normalized so that `a'Ba = 1`; convergence is judged
/// on `‖A a − γ B a‖ ≤ tol·γ·‖B a‖`.
pub fn leading_generalized_eigenpair(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    opts: &PowerOptions,
) -> Result<EigenPair, EigenError> {
    let c = a.nrows();
    if a.ncols() != c || b.dim() != (c, c) {
        return Err(EigenError::Dimension(format!(
            "A is {:?}, B is {:?}",
            a.dim(),
            b.dim()
        )));
    }
    if c == 0 {
        return Err(EigenError::Dimension("empty problem".into()));
    }
    let trace: f64 = b.diag().sum();
    let min_pivot = 1e-10 * trace / c as f64;
    let l = linalg::cholesky(b, min_pivot).map_err(|index| EigenError::SingularMetric { index })?;

    let k = (0..c)
        .max_by(|&i, &j| {
            let ri = a[[i, i]] / b[[i, i]];
            let rj = a[[j, j]] / b[[j, j]];
            // lowest index on ties
            ri.partial_cmp(&rj).unwrap_or(std::cmp::Ordering::Equal).then(j.cmp(&i))
        })
        .unwrap_or(0);
    let mut y = l.row(k).to_owned();
    y /= sq_norm(y.view()).sqrt();

    let max_iter = opts.max_iter_for(c);
    let mut best: Option<EigenPair> = None;
    for it in 1..=max_iter {
        let av = linalg::solve_lower_transposed(l.view(), y.view());
        let a_av = a.dot(&av);
        let z = linalg::solve_lower(l.view(), a_av.view());
        let gamma = linalg::dot(y.view(), z.view());
        let z_norm = sq_norm(z.view()).sqrt();
        let mut pair_vec = av;
        if z_norm == 0.0 {
            apply_sign_rule(&mut pair_vec);
            return Ok(EigenPair { vector: pair_vec, value: 0.0, iterations: it, residual: 0.0 });
        }
        let b_av = l.dot(&y);
        let mut r = a_av;
        r.scaled_add(-gamma, &b_av);
        let residual = sq_norm(r.view()).sqrt();
        let scale = sq_norm(b_av.view()).sqrt();
        if residual <= opts.tol * gamma * scale {
            apply_sign_rule(&mut pair_vec);
            return Ok(EigenPair { vector: pair_vec, value: gamma, iterations: it, residual });
        }
        let rel = residual / (gamma * scale);
        if best.as_ref().is_none_or(|bp| rel < bp.relative_residual()) {
            best = Some(EigenPair { vector: pair_vec, value: gamma, iterations: it, residual: rel * gamma });
        }
        y = z / z_norm;
    }
    let mut best = best.expect("at least one iteration");
    best.iterations = max_iter;
    apply_sign_rule(&mut best.vector);
    Err(EigenError::NoConvergence { best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{jacobi_eigen, random_matrix, random_psd};
    use ndarray::{array, Array2};

    #[test]
    fn identity_converges_immediately() {
        let id = Array2::<f64>::eye(4);
        let pair = leading_eigenpair(&id, array![0.3, -1.0, 2.0, 0.1].view(), &PowerOptions::default()).unwrap();
        assert!((pair.value - 1.0).abs() < 1e-15);
        assert!(pair.residual < 1e-15);
        assert!(pair.iterations <= 1);
    }

    #[test]
    fn dominant_axis() {
        let m = array![[3.0, 0.0], [0.0, 1.0]];
        let s = 0.5f64.sqrt();
        let pair = leading_eigenpair(&m, array![s, s].view(), &PowerOptions::default()).unwrap();
        assert!((pair.value - 3.0).abs() < 1e-9);
        assert!((pair.vector[0] - 1.0).abs() < 1e-9);
        assert!(pair.vector[1].abs() < 1e-9);
    }

    #[test]
    fn zero_operator_returns_init() {
        let m = Array2::<f64>::zeros((3, 3));
        let pair = leading_eigenpair(&m, array![0.0, -2.0, 0.0].view(), &PowerOptions::default()).unwrap();
        assert_eq!(pair.value, 0.0);
        assert_eq!(pair.vector, array![0.0, 1.0, 0.0]);
    }

    #[test]
    fn zero_init_rejected() {
        let m = Array2::<f64>::eye(2);
        assert!(matches!(
            leading_eigenpair(&m, array![0.0, 0.0].view(), &PowerOptions::default()),
            Err(EigenError::ZeroInit)
        ));
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let m = array![[1.0, 0.0], [0.0, 0.999]];
        let opts = PowerOptions { tol: 1e-12, max_iter: Some(5) };
        match leading_eigenpair(&m, array![1.0, 1.0].view(), &opts) {
            Err(EigenError::NoConvergence { best }) => {
                assert_eq!(best.iterations, 5);
                assert!(best.value > 0.99);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn random_psd_matches_jacobi() {
        for seed in 0..5 {
            let m = random_psd(8, seed);
            let (vals, vecs) = jacobi_eigen(&m);
            let init = Array1::from_elem(8, 1.0);
            let pair = leading_eigenpair(&m, init.view(), &PowerOptions { tol: 1e-12, max_iter: Some(200_000) }).unwrap();
            assert!((pair.value - vals[0]).abs() <= 1e-6 * vals[0].max(1.0));
            let dot = pair.vector.dot(&vecs.column(0)).abs();
            assert!((1.0 - dot).abs() < 1e-10, "seed {seed}: {dot}");
        }
    }

    #[test]
    fn single_nonzero_column_pc() {
        let mut q = Array2::<f64>::zeros((5, 3));
        q.column_mut(1).assign(&array![1.0, -2.0, 0.5, 0.0, 3.0]);
        let pc = leading_pc(q.view(), &PowerOptions::default()).unwrap();
        assert_eq!(pc.loadings, array![0.0, 1.0, 0.0]);
        assert!((pc.lambda - 14.25).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_pc_is_error() {
        let q = Array2::<f64>::zeros((4, 2));
        assert!(matches!(leading_pc(q.view(), &PowerOptions::default()), Err(EigenError::ZeroMatrix)));
    }

    #[test]
    fn random_pc_matches_jacobi() {
        let q = random_matrix(20, 6, 11);
        let (vals, vecs) = jacobi_eigen(&q.t().dot(&q));
        let pc = leading_pc(q.view(), &PowerOptions { tol: 1e-12, max_iter: None }).unwrap();
        assert!((pc.lambda - vals[0]).abs() < 1e-6 * vals[0]);
        let dot = pc.loadings.dot(&vecs.column(0)).abs();
        assert!(1.0 - dot < 1e-6);
        let u = q.dot(&pc.loadings);
        assert!((&u - &pc.scores).iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn both_gram_sides_agree() {
        let q = random_matrix(7, 15, 3);
        let opts = PowerOptions { tol: 1e-12, max_iter: None };
        let a = leading_pc_on(q.view(), &opts, GramSide::Observations).unwrap();
        let b = leading_pc_on(q.view(), &opts, GramSide::Variables).unwrap();
        assert!((a.lambda - b.lambda).abs() <= 1e-8 * b.lambda);
        assert!(a.loadings.dot(&b.loadings) > 1.0 - 1e-8);
    }

    #[test]
    fn generalized_identical_matrices() {
        let b = random_psd(4, 9) + Array2::<f64>::eye(4);
        let pair = leading_generalized_eigenpair(b.view(), b.view(), &PowerOptions::default()).unwrap();
        assert!((pair.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn generalized_reduces_to_ordinary() {
        let a = array![[4.0, 0.0], [0.0, 1.0]];
        let b = Array2::<f64>::eye(2);
        let pair = leading_generalized_eigenpair(a.view(), b.view(), &PowerOptions::default()).unwrap();
        assert!((pair.value - 4.0).abs() < 1e-9);
        assert!((pair.vector[0] - 1.0).abs() < 1e-9);
        assert!(pair.vector[1].abs() < 1e-9);
    }

    #[test]
    fn generalized_singular_metric() {
        let a = Array2::<f64>::eye(2);
        let b = array![[1.0, 1.0], [1.0, 1.0]];
        assert!(matches!(
            leading_generalized_eigenpair(a.view(), b.view(), &PowerOptions::default()),
            Err(EigenError::SingularMetric { index: 1 })
        ));
    }

    #[test]
    fn generalized_matches_symmetrized_jacobi() {
        let a = random_psd(5, 21);
        let b = random_psd(5, 22) + Array2::<f64>::eye(5) * 0.5;
        let l = crate::linalg::cholesky(b.view(), 0.0).unwrap();
        // L⁻¹ A L⁻ᵀ built column by column
        let mut c = Array2::<f64>::zeros((5, 5));
        let mut linv = Array2::<f64>::zeros((5, 5));
        for j in 0..5 {
            let e = Array1::from_shape_fn(5, |i| if i == j { 1.0 } else { 0.0 });
            linv.column_mut(j).assign(&crate::linalg::solve_lower(l.view(), e.view()));
        }
        c.assign(&linv.dot(&a).dot(&linv.t()));
        let (vals, _) = jacobi_eigen(&c);
        let pair = leading_generalized_eigenpair(a.view(), b.view(), &PowerOptions { tol: 1e-12, max_iter: None }).unwrap();
        assert!((pair.value - vals[0]).abs() < 1e-6 * vals[0]);
        let bnorm = pair.vector.dot(&b.dot(&pair.vector));
        assert!((bnorm - 1.0).abs() < 1e-10);
    }
}
