//! Forward selection of data columns that explain a target component.
//!
//! Each step adds the column whose residual (after projection on the columns
//! already chosen) has the largest squared correlation with the residual of
//! the target. This is a QR factorization in which the pivot is chosen by the
//! target rather than by column norm; the factor is grown one column at a
//! time and every candidate statistic is downdated instead of recomputed.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use thiserror::Error;

use crate::linalg::{self, sq_norm};

/// Below this many units of `‖u‖²`, two candidate gains count as tied.
const TIE_TOL: f64 = 1e-12;
/// A step must raise the explained fraction by more than this.
const MIN_GAIN: f64 = 1e-14;
/// Slack on the stopping test `R² ≥ α`.
const ALPHA_SLACK: f64 = 1e-12;
/// Basis orthonormality drift that triggers a full rebuild.
const DRIFT_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum SelectError {
    #[error("target vector is zero")]
    ZeroTarget,
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("selected block is singular at column {index}")]
    SingularBlock { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectConfig {
    /// Fraction of the target's squared norm the block must explain.
    pub alpha: f64,
    /// Cardinality cap; `None` means `min(n − 1, p, 2000)`.
    pub max_card: Option<usize>,
    /// Candidates whose residual squared norm drops below this fraction of
    /// their original squared norm are excluded for good.
    pub collinearity_tol: f64,
}

impl Default for SelectConfig {
    fn default() -> Self {
        Self { alpha: 0.95, max_card: None, collinearity_tol: 1e-10 }
    }
}

impl SelectConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        Self { alpha, ..Self::default() }
    }

    pub fn effective_max_card(&self, n: usize, p: usize) -> usize {
        self.max_card
            .unwrap_or_else(|| n.saturating_sub(1).min(p).min(2000))
            .max(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub indices: Vec<usize>,
    /// Cumulative `R²` after each accepted column.
    pub r2_path: Vec<f64>,
    pub achieved_r2: f64,
    /// `false` when selection ran out of columns (cap, rank) below `alpha`.
    pub reached: bool,
}

/// Incremental QR state of the selected block `Ẋ = Q_b R` against one target.
#[derive(Debug, Clone)]
pub struct SelectionState {
    selected: Vec<usize>,
    basis: Vec<Array1<f64>>,
    /// Column `k` of the upper-triangular factor, `k + 1` entries.
    r_cols: Vec<Vec<f64>>,
    target: Array1<f64>,
    target_sq_norm: f64,
    target_residual: Array1<f64>,
    explained: f64,
    /// `X' r` for the current target residual `r`.
    xtr: Array1<f64>,
    residual_col_norms: Array1<f64>,
    orig_col_norms: Array1<f64>,
    excluded: Vec<bool>,
    collinearity_tol: f64,
}

impl SelectionState {
    pub fn new(
        x: ArrayView2<'_, f64>,
        target: ArrayView1<'_, f64>,
        collinearity_tol: f64,
    ) -> Result<Self, SelectError> {
        if target.len() != x.nrows() {
            return Err(SelectError::Dimension(format!(
                "target has length {}, data has {} rows",
                target.len(),
                x.nrows()
            )));
        }
        let target_sq_norm = sq_norm(target);
        if !(target_sq_norm > 0.0) {
            return Err(SelectError::ZeroTarget);
        }
        let orig: Array1<f64> = x.columns().into_iter().map(sq_norm).collect();
        let excluded = orig.iter().map(|&o| o == 0.0).collect();
        Ok(Self {
            selected: Vec::new(),
            basis: Vec::new(),
            r_cols: Vec::new(),
            target: target.to_owned(),
            target_sq_norm,
            target_residual: target.to_owned(),
            explained: 0.0,
            xtr: x.t().dot(&target),
            residual_col_norms: orig.clone(),
            orig_col_norms: orig,
            excluded,
            collinearity_tol,
        })
    }

    /// State for a given block, built column by column in the given order.
    pub fn from_columns(
        x: ArrayView2<'_, f64>,
        indices: &[usize],
        target: ArrayView1<'_, f64>,
        collinearity_tol: f64,
    ) -> Result<Self, SelectError> {
        let mut state = Self::new(x, target, collinearity_tol)?;
        for &j in indices {
            if j >= x.ncols() {
                return Err(SelectError::Dimension(format!("column {j} out of range")));
            }
            if !state.add_column(x, j) {
                return Err(SelectError::SingularBlock { index: j });
            }
        }
        Ok(state)
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn cardinality(&self) -> usize {
        self.selected.len()
    }

    /// Squared norm of the target's projection on the block.
    pub fn explained(&self) -> f64 {
        self.explained
    }

    pub fn r2(&self) -> f64 {
        self.explained / self.target_sq_norm
    }

    pub fn target_residual(&self) -> &Array1<f64> {
        &self.target_residual
    }

    pub fn residual_col_norms(&self) -> &Array1<f64> {
        &self.residual_col_norms
    }

    /// Orthonormal basis of the block as an `n × k` matrix.
    pub fn orthonormal_basis(&self) -> Array2<f64> {
        let n = self.target.len();
        let mut out = Array2::zeros((n, self.basis.len()));
        for (k, q) in self.basis.iter().enumerate() {
            out.column_mut(k).assign(q);
        }
        out
    }

    /// Upper-triangular `R` with `Ẋ = Q_b R`.
    pub fn r_factor(&self) -> Array2<f64> {
        let k = self.r_cols.len();
        let mut r = Array2::zeros((k, k));
        for (j, col) in self.r_cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                r[[i, j]] = v;
            }
        }
        r
    }

    fn is_candidate(&self, j: usize) -> bool {
        !self.excluded[j] && !self.selected.contains(&j)
    }

    /// Appends column `j` to the block. Returns `false` (and excludes the
    /// column) when it is numerically dependent on the block.
    pub fn add_column(&mut self, x: ArrayView2<'_, f64>, j: usize) -> bool {
        let orig = self.orig_col_norms[j];
        let mut v = x.column(j).to_owned();
        let mut coeffs = linalg::orthogonalize(&self.basis, &mut v);
        let res = sq_norm(v.view());
        if orig == 0.0 || !(res > self.collinearity_tol * orig) {
            self.excluded[j] = true;
            self.residual_col_norms[j] = res.max(0.0);
            return false;
        }
        let norm = res.sqrt();
        v /= norm;
        coeffs.push(norm);

        let c = v.dot(&self.target_residual);
        self.target_residual.scaled_add(-c, &v);
        self.explained += c * c;
        let xq = x.t().dot(&v);
        self.xtr.scaled_add(-c, &xq);
        for (d, w) in self.residual_col_norms.iter_mut().zip(xq.iter()) {
            *d = (*d - w * w).max(0.0);
        }
        self.residual_col_norms[j] = 0.0;

        let drift = self.basis.iter().map(|b| b.dot(&v).abs()).fold(0.0, f64::max);
        self.basis.push(v);
        self.r_cols.push(coeffs);
        self.selected.push(j);
        if drift > DRIFT_TOL {
            log::debug!("basis drift {drift:.2e}; rebuilding factorization");
            self.rebuild(x);
        }
        true
    }

    /// Recomputes the factorization and every downdated quantity from scratch.
    fn rebuild(&mut self, x: ArrayView2<'_, f64>) {
        let selected = std::mem::take(&mut self.selected);
        self.basis.clear();
        self.r_cols.clear();
        for &j in &selected {
            let mut v = x.column(j).to_owned();
            let mut coeffs = linalg::orthogonalize(&self.basis, &mut v);
            let norm = sq_norm(v.view()).sqrt();
            v /= norm;
            coeffs.push(norm);
            self.basis.push(v);
            self.r_cols.push(coeffs);
        }
        self.selected = selected;
        let mut r = self.target.clone();
        linalg::orthogonalize(&self.basis, &mut r);
        self.explained = linalg::projected_sq_norm(&self.basis, self.target.view());
        self.xtr = x.t().dot(&r);
        self.target_residual = r;
        let mut d = self.orig_col_norms.clone();
        for q in &self.basis {
            let xq = x.t().dot(q);
            for (dj, w) in d.iter_mut().zip(xq.iter()) {
                *dj -= w * w;
            }
        }
        d.mapv_inplace(|v| v.max(0.0));
        self.residual_col_norms = d;
    }

    /// Best admissible candidate: largest gain in explained target variance,
    /// lowest index among near-ties. Excludes collinear candidates on the way.
    fn best_candidate(&mut self) -> Option<(usize, f64)> {
        let tie = TIE_TOL * self.target_sq_norm;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.orig_col_norms.len() {
            if !self.is_candidate(j) {
                continue;
            }
            let d = self.residual_col_norms[j];
            if !(d > self.collinearity_tol * self.orig_col_norms[j]) {
                self.excluded[j] = true;
                continue;
            }
            let gain = self.xtr[j] * self.xtr[j] / d;
            match best {
                Some((_, g)) if gain <= g + tie => {}
                _ => best = Some((j, gain)),
            }
        }
        best
    }

    /// Least-squares loadings of `target` on the block and its fitted values.
    pub fn project(&self, target: ArrayView1<'_, f64>) -> Result<(Array1<f64>, Array1<f64>), SelectError> {
        self.project_prefix(self.basis.len(), target)
    }

    /// Same as [`project`](Self::project) restricted to the first `k` selected columns.
    pub fn project_prefix(
        &self,
        k: usize,
        target: ArrayView1<'_, f64>,
    ) -> Result<(Array1<f64>, Array1<f64>), SelectError> {
        if k == 0 || k > self.basis.len() {
            return Err(SelectError::Dimension(format!(
                "prefix {k} out of range 1..={}",
                self.basis.len()
            )));
        }
        if target.len() != self.target.len() {
            return Err(SelectError::Dimension("target length".into()));
        }
        for i in 0..k {
            let pivot = self.r_cols[i][i];
            if !(pivot * pivot > self.collinearity_tol * self.orig_col_norms[self.selected[i]]) {
                return Err(SelectError::SingularBlock { index: self.selected[i] });
            }
        }
        let coeffs: Array1<f64> = self.basis[..k].iter().map(|q| q.dot(&target)).collect();
        let mut fitted = Array1::zeros(target.len());
        for (q, &c) in self.basis[..k].iter().zip(coeffs.iter()) {
            fitted.scaled_add(c, q);
        }
        let r = self.r_factor();
        let r = r.slice(ndarray::s![..k, ..k]);
        let loadings = linalg::solve_upper(r, coeffs.view());
        Ok((loadings, fitted))
    }
}

/// Output of [`forward_select`]: the summary plus the factorization it built.
#[derive(Debug, Clone)]
pub struct Selection {
    pub result: SelectionResult,
    pub state: SelectionState,
}

/// Greedily selects columns of `x` until they explain at least `alpha` of
/// `‖target‖²`, the cap is hit, or no admissible column is left.
pub fn forward_select(
    x: ArrayView2<'_, f64>,
    target: ArrayView1<'_, f64>,
    cfg: &SelectConfig,
) -> Result<Selection, SelectError> {
    if !(cfg.alpha > 0.0 && cfg.alpha <= 1.0) {
        return Err(SelectError::InvalidAlpha(cfg.alpha));
    }
    let mut state = SelectionState::new(x, target, cfg.collinearity_tol)?;
    let max_card = cfg.effective_max_card(x.nrows(), x.ncols());
    let mut r2_path = Vec::new();

    while state.cardinality() < max_card && state.r2() < cfg.alpha - ALPHA_SLACK {
        let Some((j, gain)) = state.best_candidate() else {
            break;
        };
        if !(gain > MIN_GAIN * state.target_sq_norm) {
            break;
        }
        if state.add_column(x, j) {
            r2_path.push(state.r2());
        }
    }
    let achieved_r2 = state.r2();
    let reached = achieved_r2 >= cfg.alpha - ALPHA_SLACK;
    Ok(Selection {
        result: SelectionResult { indices: state.selected.clone(), r2_path, achieved_r2, reached },
        state,
    })
}

/// Loadings `(Ẋ'Ẋ)⁻¹Ẋ'y` via back-substitution through `R`, and the fitted
/// values `Ẋ·loadings`.
pub fn project_onto_block(
    state: &SelectionState,
    target: ArrayView1<'_, f64>,
) -> Result<(Array1<f64>, Array1<f64>), SelectError> {
    state.project(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{columns, naive_greedy, normal_equations, random_matrix, random_vector};
    use ndarray::{array, Array2};

    #[test]
    fn exact_single_column_fit() {
        let x = random_matrix(12, 5, 1);
        let u = x.column(3).to_owned() * 2.0;
        let sel = forward_select(x.view(), u.view(), &SelectConfig::with_alpha(0.95)).unwrap();
        assert_eq!(sel.result.indices, vec![3]);
        assert!((sel.result.achieved_r2 - 1.0).abs() < 1e-12);
        assert!(sel.result.reached);
    }

    #[test]
    fn matches_naive_refit_oracle() {
        let x = random_matrix(30, 10, 5);
        let u = random_vector(30, 6);
        let cfg = SelectConfig::with_alpha(0.99);
        let sel = forward_select(x.view(), u.view(), &cfg).unwrap();
        let naive = naive_greedy(x.view(), u.view(), 0.99, cfg.effective_max_card(30, 10), 1e-10);
        assert_eq!(sel.result.indices, naive.indices);
        for (a, b) in sel.result.r2_path.iter().zip(&naive.r2_path) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn unreachable_alpha_is_flagged() {
        // random target outside the span of 3 columns in R^10
        let x = random_matrix(10, 3, 2);
        let u = random_vector(10, 3);
        let sel = forward_select(x.view(), u.view(), &SelectConfig::with_alpha(1.0)).unwrap();
        assert!(!sel.result.reached);
        assert_eq!(sel.result.indices.len(), 3);
        assert!(sel.result.achieved_r2 < 1.0);
    }

    #[test]
    fn invalid_inputs() {
        let x = random_matrix(5, 2, 0);
        let z = Array1::<f64>::zeros(5);
        assert_eq!(
            forward_select(x.view(), z.view(), &SelectConfig::default()).unwrap_err(),
            SelectError::ZeroTarget
        );
        let u = random_vector(5, 1);
        assert_eq!(
            forward_select(x.view(), u.view(), &SelectConfig::with_alpha(0.0)).unwrap_err(),
            SelectError::InvalidAlpha(0.0)
        );
        assert_eq!(
            forward_select(x.view(), u.view(), &SelectConfig::with_alpha(1.5)).unwrap_err(),
            SelectError::InvalidAlpha(1.5)
        );
    }

    #[test]
    fn projection_of_vector_in_span() {
        let x = random_matrix(8, 4, 7);
        let state = SelectionState::from_columns(x.view(), &[0, 2], x.column(0), 1e-10).unwrap();
        let target = &x.column(0) * 1.5 - &x.column(2) * 0.25;
        let (loadings, fitted) = project_onto_block(&state, target.view()).unwrap();
        assert!((loadings[0] - 1.5).abs() < 1e-12);
        assert!((loadings[1] + 0.25).abs() < 1e-12);
        assert!((&fitted - &target).iter().all(|d| d.abs() < 1e-9));
    }

    #[test]
    fn projection_of_orthogonal_target_is_zero() {
        let x = array![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]];
        let state = SelectionState::from_columns(x.view(), &[0, 1], x.column(0), 1e-10).unwrap();
        let (loadings, fitted) = project_onto_block(&state, array![0.0, 0.0, 3.0].view()).unwrap();
        assert!(loadings.iter().all(|&v| v == 0.0));
        assert!(fitted.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn projection_matches_normal_equations() {
        let x = random_matrix(6, 3, 4);
        let y = random_vector(6, 5);
        let state = SelectionState::from_columns(x.view(), &[0, 1, 2], y.view(), 1e-10).unwrap();
        let (loadings, fitted) = project_onto_block(&state, y.view()).unwrap();
        let block = columns(x.view(), &[0, 1, 2]);
        let want = normal_equations(&block, y.view());
        for (a, b) in loadings.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
        let fit_want = block.dot(&want);
        assert!((&fitted - &fit_want).iter().all(|d| d.abs() < 1e-10));
    }

    #[test]
    fn dependent_block_is_rejected() {
        let mut x = random_matrix(6, 3, 8);
        let c0 = x.column(0).to_owned();
        x.column_mut(2).assign(&(c0 * 3.0));
        let err = SelectionState::from_columns(x.view(), &[0, 2], x.column(1), 1e-10).unwrap_err();
        assert_eq!(err, SelectError::SingularBlock { index: 2 });
    }

    #[test]
    fn duplicate_column_never_selected() {
        let x = random_matrix(20, 6, 9);
        let mut aug = Array2::<f64>::zeros((20, 7));
        aug.slice_mut(ndarray::s![.., ..6]).assign(&x);
        aug.column_mut(6).assign(&x.column(2));
        let u = random_vector(20, 10);
        let cfg = SelectConfig::with_alpha(0.999);
        let a = forward_select(x.view(), u.view(), &cfg).unwrap();
        let b = forward_select(aug.view(), u.view(), &cfg).unwrap();
        assert_eq!(a.result.indices, b.result.indices);
    }

    #[test]
    fn state_invariants_hold() {
        let x = random_matrix(25, 12, 12);
        let u = random_vector(25, 13);
        let sel = forward_select(x.view(), u.view(), &SelectConfig::with_alpha(0.999)).unwrap();
        let q = sel.state.orthonormal_basis();
        let g = q.t().dot(&q);
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g[[i, j]] - want).abs() < 1e-9);
            }
        }
        let total = sel.state.explained() + sel.state.target_residual().dot(sel.state.target_residual());
        assert!((total - u.dot(&u)).abs() < 1e-9 * u.dot(&u));
        // Q_b R reproduces the selected columns
        let qr = q.dot(&sel.state.r_factor());
        let block = columns(x.view(), sel.state.selected());
        assert!((&qr - &block).iter().all(|d| d.abs() < 1e-10));
        assert!(sel.result.r2_path.windows(2).all(|w| w[1] > w[0]));
    }
}
