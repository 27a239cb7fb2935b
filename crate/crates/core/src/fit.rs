//! Sequential sparse component extraction.
//!
//! Each step takes the first PC `u` of the deflated matrix `Q`, selects a
//! block of original columns whose span captures at least `α·‖u‖²`, builds
//! the sparse component from that block, and deflates `Q` by it. The
//! projection method uses the least-squares projection of `u` on the block;
//! the LS method uses the block combination that maximizes the variance of `Q`
//! it explains. Either way `evexp ≥ α·λ_max` holds at every step.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{evaluate_first_component, CurvePoint};
use crate::data::DataMatrix;
use crate::eigen::{self, EigenError, EigenPair, GramSide, PowerOptions, PrincipalComponent};
use crate::linalg::{apply_sign_rule, sq_norm};
use crate::metrics::{self, MetricsError};
use crate::select::{self, SelectConfig, SelectError};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("step {step}: eigen solver failed: {source}")]
    Eigen {
        step: usize,
        #[source]
        source: EigenError,
        partial: Box<FitResult>,
    },
    #[error("step {step}: selection failed: {source}")]
    Select {
        step: usize,
        #[source]
        source: SelectError,
    },
    #[error("step {step}: {source}")]
    Metrics {
        step: usize,
        #[source]
        source: MetricsError,
    },
    #[error("deflating component is degenerate (squared norm {norm:.3e})")]
    DegenerateComponent { norm: f64 },
}

impl FitError {
    /// Components computed before the failure, when available.
    pub fn partial(&self) -> Option<&FitResult> {
        match self {
            FitError::Eigen { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Projection,
    Lsspca,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    NComponents(usize),
    /// Stop once the cumulative variance explained reaches this fraction of
    /// the total variance.
    TotalVexpFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub alpha: f64,
    pub method: Method,
    pub stop: StopRule,
    pub power: PowerOptions,
    pub collinearity_tol: f64,
    pub max_card: Option<usize>,
    /// Residual variance of `Q`, relative to the total, below which the data
    /// counts as exhausted.
    pub rank_tol: f64,
    /// Gram matrix the PC power iteration runs on.
    pub gram_side: GramSide,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            alpha: 0.95,
            method: Method::Projection,
            stop: StopRule::NComponents(10),
            power: PowerOptions::default(),
            collinearity_tol: 1e-10,
            max_card: None,
            rank_tol: 1e-9,
            gram_side: GramSide::Auto,
        }
    }
}

impl FitConfig {
    pub fn new(alpha: f64, method: Method, stop: StopRule) -> Self {
        Self { alpha, method, stop, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), FitError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(FitError::Config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        match self.stop {
            StopRule::NComponents(0) => Err(FitError::Config("need at least one component".into())),
            StopRule::TotalVexpFraction(f) if !(f > 0.0 && f <= 1.0) => {
                Err(FitError::Config(format!("vexp fraction must lie in (0, 1], got {f}")))
            }
            _ if !(self.power.tol > 0.0) => Err(FitError::Config("eigen tolerance must be positive".into())),
            _ => Ok(()),
        }
    }

    fn select_config(&self) -> SelectConfig {
        SelectConfig { alpha: self.alpha, max_card: self.max_card, collinearity_tol: self.collinearity_tol }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseComponent {
    /// Selected columns, in order of entry.
    pub indices: Vec<usize>,
    /// Loadings aligned with `indices`, scaled so that `scores` has unit norm.
    pub sparse_loadings: Array1<f64>,
    pub full_loadings: Array1<f64>,
    /// Unit-norm score vector `X·full_loadings`.
    pub scores: Array1<f64>,
    pub evexp: f64,
    pub vexp_q: f64,
    /// Largest eigenvalue of `Q'Q` at this step.
    pub ref_lambda: f64,
    /// Correlation with the PC of `Q` this component approximates.
    pub pc_correlation: f64,
    /// `R²` of that PC on the selected block.
    pub block_r2: f64,
    /// `false` when the block could not reach `alpha`.
    pub alpha_reached: bool,
    pub method: Method,
}

impl SparseComponent {
    pub fn cardinality(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    NComponents,
    VexpThreshold,
    RankExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub components: Vec<SparseComponent>,
    pub alpha: f64,
    /// `λ_j` of the PC used at each step.
    pub pc_lambdas: Vec<f64>,
    /// Score vectors of those PCs (`‖u_j‖² = λ_j`).
    pub pc_scores: Vec<Array1<f64>>,
    pub cum_vexp: Vec<f64>,
    pub rcvexp: Vec<f64>,
    /// `‖Q‖²` after deflating by each component.
    pub residual_variance: Vec<f64>,
    pub total_variance: f64,
    pub stop_reason: StopReason,
}

impl FitResult {
    fn empty(alpha: f64, total_variance: f64) -> Self {
        Self {
            components: Vec::new(),
            alpha,
            pc_lambdas: Vec::new(),
            pc_scores: Vec::new(),
            cum_vexp: Vec::new(),
            rcvexp: Vec::new(),
            residual_variance: Vec::new(),
            total_variance,
            stop_reason: StopReason::NComponents,
        }
    }

    /// Steps at which the block fell short of `alpha`.
    pub fn unreachable_steps(&self) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.alpha_reached)
            .map(|(j, _)| j)
            .collect()
    }

    /// `n × k` matrix of component scores.
    pub fn scores(&self) -> Array2<f64> {
        stack_columns(self.components.iter().map(|c| c.scores.view()), self.pc_scores.first().map_or(0, |u| u.len()))
    }

    /// `p × k` matrix of full loadings.
    pub fn loadings(&self, p: usize) -> Array2<f64> {
        stack_columns(self.components.iter().map(|c| c.full_loadings.view()), p)
    }

    /// `n × k` matrix of the PC scores used as targets.
    pub fn pc_score_matrix(&self) -> Array2<f64> {
        let n = self.pc_scores.first().map_or(0, |u| u.len());
        stack_columns(self.pc_scores.iter().map(|u| u.view()), n)
    }
}

fn stack_columns<'a>(cols: impl Iterator<Item = ArrayView1<'a, f64>>, rows: usize) -> Array2<f64> {
    let cols: Vec<_> = cols.collect();
    let mut out = Array2::zeros((rows, cols.len()));
    for (k, c) in cols.into_iter().enumerate() {
        out.column_mut(k).assign(&c);
    }
    out
}

/// `Q − t(t'Q)/(t't)`.
pub fn deflate(q: ArrayView2<'_, f64>, t: ArrayView1<'_, f64>) -> Result<Array2<f64>, FitError> {
    let mut out = q.to_owned();
    deflate_in_place(&mut out, t, 0.0)?;
    Ok(out)
}

/// In-place [`deflate`]. Fails when `t't ≤ min_sq_norm` or `t` is zero.
pub fn deflate_in_place(q: &mut Array2<f64>, t: ArrayView1<'_, f64>, min_sq_norm: f64) -> Result<(), FitError> {
    let tt = sq_norm(t);
    if !(tt > min_sq_norm) || tt == 0.0 {
        return Err(FitError::DegenerateComponent { norm: tt });
    }
    let coef = q.t().dot(&t) / tt;
    for (mut row, &ti) in q.axis_iter_mut(Axis(0)).zip(t.iter()) {
        row.scaled_add(-ti, &coef);
    }
    Ok(())
}

/// LS SPCA loadings on a block: the leading solution of
/// `Ẋ'QQ'Ẋ a = γ Ẋ'Ẋ a`, scaled so that `‖Ẋa‖ = 1`.
pub fn lsspca_loadings(
    block: ArrayView2<'_, f64>,
    q: ArrayView2<'_, f64>,
    opts: &PowerOptions,
) -> Result<(Array1<f64>, f64), EigenError> {
    let m = q.t().dot(&block);
    let a = m.t().dot(&m);
    let b = block.t().dot(&block);
    let pair = eigen::leading_generalized_eigenpair(a.view(), b.view(), opts)
        .or_else(|e| accept_stalled(None, e, opts))?;
    // a'Ba = 1 already makes the component unit norm
    let mut loadings = pair.vector;
    let t = block.dot(&loadings);
    let norm = sq_norm(t.view()).sqrt();
    if norm > 0.0 {
        loadings /= norm;
    }
    apply_sign_rule(&mut loadings);
    Ok((loadings, pair.value))
}

/// Iteration stalls when the leading eigenvalues nearly tie. Any vector in
/// that dominant subspace keeps the per-step guarantees, which are stated
/// against the achieved `u'u`, so an iterate this close is kept.
fn accept_stalled(step: Option<usize>, err: EigenError, opts: &PowerOptions) -> Result<EigenPair, EigenError> {
    match err {
        EigenError::NoConvergence { best } if best.relative_residual() <= opts.tol.sqrt() => {
            match step {
                Some(j) => log::warn!("step {j}: leading PC stalled at relative residual {:.3e}", best.relative_residual()),
                None => log::warn!("generalized eigenpair stalled at relative residual {:.3e}", best.relative_residual()),
            }
            Ok(best)
        }
        other => Err(other),
    }
}

fn gather_columns(x: ArrayView2<'_, f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((x.nrows(), idx.len()));
    for (k, &j) in idx.iter().enumerate() {
        out.column_mut(k).assign(&x.column(j));
    }
    out
}

/// Progress hook called after each accepted component.
pub trait FitObserver {
    fn component_done(&mut self, _step: usize, _component: &SparseComponent) {}
}

impl FitObserver for () {}

impl<F: FnMut(usize, &SparseComponent)> FitObserver for F {
    fn component_done(&mut self, step: usize, component: &SparseComponent) {
        self(step, component)
    }
}

pub fn fit(x: &DataMatrix, cfg: &FitConfig) -> Result<FitResult, FitError> {
    fit_observed(x, cfg, &mut ())
}

pub fn fit_observed(x: &DataMatrix, cfg: &FitConfig, observer: &mut dyn FitObserver) -> Result<FitResult, FitError> {
    fit_matrix(x.values().view(), cfg, observer)
}

/// [`fit`] on a raw (already centered) matrix.
pub fn fit_matrix(
    x: ArrayView2<'_, f64>,
    cfg: &FitConfig,
    observer: &mut dyn FitObserver,
) -> Result<FitResult, FitError> {
    cfg.validate()?;
    let total_variance: f64 = x.iter().map(|v| v * v).sum();
    let mut result = FitResult::empty(cfg.alpha, total_variance);
    if !(total_variance > 0.0) {
        result.stop_reason = StopReason::RankExhausted;
        return Ok(result);
    }
    let mut q = x.to_owned();
    let select_cfg = cfg.select_config();
    let mut cum = 0.0;
    let mut cum_lambda = 0.0;
    // Q'Q is kept up to date by rank-one downdates when iterating on the variable side
    let variables_side = match cfg.gram_side {
        GramSide::Variables => true,
        GramSide::Observations => false,
        GramSide::Auto => x.ncols() <= x.nrows(),
    };
    let mut gram = variables_side.then(|| x.t().dot(&x));

    loop {
        let step = result.components.len();
        let pc_result = match gram.as_ref() {
            Some(g) => eigen::leading_pc_with_gram(q.view(), g.view(), &cfg.power).or_else(|e| {
                accept_stalled(Some(step), e, &cfg.power).map(|b| PrincipalComponent::from_loadings(q.view(), b.vector, b.iterations))
            }),
            None => eigen::leading_pc_on(q.view(), &cfg.power, GramSide::Observations).or_else(|e| {
                accept_stalled(Some(step), e, &cfg.power)
                    .and_then(|b| PrincipalComponent::from_observation_vector(q.view(), b.vector.view(), b.iterations))
            }),
        };
        let pc = match pc_result {
            Ok(pc) => pc,
            Err(EigenError::ZeroMatrix) => {
                result.stop_reason = StopReason::RankExhausted;
                break;
            }
            Err(source) => {
                return Err(FitError::Eigen { step, source, partial: Box::new(result) });
            }
        };
        let u = pc.scores;
        let lambda = pc.lambda;

        let selection =
            select::forward_select(x, u.view(), &select_cfg).map_err(|source| FitError::Select { step, source })?;
        if !selection.result.reached {
            log::warn!(
                "step {step}: block explains {:.6} of the PC, below alpha = {}",
                selection.result.achieved_r2,
                cfg.alpha
            );
        }

        let (indices, mut loadings) = match cfg.method {
            Method::Projection => {
                let (v, _) = select::project_onto_block(&selection.state, u.view())
                    .map_err(|source| FitError::Select { step, source })?;
                (selection.result.indices.clone(), v)
            }
            Method::Lsspca => {
                let mut idx = selection.result.indices.clone();
                loop {
                    let block = gather_columns(x, &idx);
                    match lsspca_loadings(block.view(), q.view(), &cfg.power) {
                        Ok((a, _)) => break (idx, a),
                        Err(EigenError::SingularMetric { index }) if index > 0 => {
                            log::warn!("step {step}: LS block singular at {index}; shrinking");
                            idx.truncate(index);
                        }
                        Err(source) => {
                            return Err(FitError::Eigen { step, source, partial: Box::new(result) });
                        }
                    }
                }
            }
        };

        let block = gather_columns(x, &indices);
        let mut scores = block.dot(&loadings);
        let t_norm = sq_norm(scores.view()).sqrt();
        if !(t_norm > 0.0) {
            return Err(FitError::DegenerateComponent { norm: 0.0 });
        }
        scores /= t_norm;
        loadings /= t_norm;
        if scores.dot(&u) < 0.0 {
            scores.mapv_inplace(|v| -v);
            loadings.mapv_inplace(|v| -v);
        }

        let q_block = gather_columns(q.view(), &indices);
        let deflated = q_block.dot(&loadings);
        let evexp = metrics::evexp_deflated(x, scores.view(), deflated.view())
            .map_err(|source| FitError::Metrics { step, source })?;
        let vexp_q = metrics::vexp_q(q.view(), scores.view()).map_err(|source| FitError::Metrics { step, source })?;
        let pc_correlation = metrics::pc_correlation(scores.view(), u.view());

        let mut full_loadings = Array1::zeros(x.ncols());
        for (&j, &a) in indices.iter().zip(loadings.iter()) {
            full_loadings[j] = a;
        }

        if let Some(g) = gram.as_mut() {
            let w = q.t().dot(&deflated);
            let dd = sq_norm(deflated.view());
            if dd > 0.0 {
                for ((i, j), v) in g.indexed_iter_mut() {
                    *v -= w[i] * w[j] / dd;
                }
            }
        }
        deflate_in_place(&mut q, deflated.view(), 0.0)?;
        let residual = q.iter().map(|v| v * v).sum::<f64>();

        cum += evexp;
        cum_lambda += lambda;
        let component = SparseComponent {
            indices,
            sparse_loadings: loadings,
            full_loadings,
            scores,
            evexp,
            vexp_q,
            ref_lambda: lambda,
            pc_correlation,
            block_r2: selection.result.achieved_r2,
            alpha_reached: selection.result.reached,
            method: cfg.method,
        };
        observer.component_done(step, &component);
        result.components.push(component);
        result.pc_lambdas.push(lambda);
        result.pc_scores.push(u);
        result.cum_vexp.push(cum);
        result.rcvexp.push(cum / cum_lambda);
        result.residual_variance.push(residual);

        if residual < cfg.rank_tol * total_variance {
            result.stop_reason = StopReason::RankExhausted;
            break;
        }
        match cfg.stop {
            StopRule::NComponents(k) if result.components.len() >= k => {
                result.stop_reason = StopReason::NComponents;
                break;
            }
            StopRule::TotalVexpFraction(f) if cum >= f * total_variance => {
                result.stop_reason = StopReason::VexpThreshold;
                break;
            }
            _ => {}
        }
    }
    Ok(result)
}

/// Deflated matrices `Q_0 = X, Q_1, …` implied by a fitted component sequence.
/// Used for diagnostics; the fit itself deflates incrementally.
pub fn deflation_sequence(x: ArrayView2<'_, f64>, result: &FitResult) -> Vec<Array2<f64>> {
    let mut qs = vec![x.to_owned()];
    let mut q = x.to_owned();
    for c in &result.components {
        let d = q.dot(&c.full_loadings);
        if deflate_in_place(&mut q, d.view(), 0.0).is_err() {
            break;
        }
        qs.push(q.clone());
    }
    qs
}

/// First-component curves of the sparse methods against cardinality.
///
/// A single `alpha = 1` selection path is grown against the first PC and each
/// prefix of length `c ≤ max_card` gives one block; the projection and LS
/// components are formed on that block and evaluated as unit-loading
/// components. The path stops early when the columns run out of rank.
pub fn first_component_curves(
    x: ArrayView2<'_, f64>,
    max_card: usize,
    opts: &PowerOptions,
) -> Result<Vec<(Method, CurvePoint)>, FitError> {
    let pc = eigen::leading_pc(x, opts)
        .map_err(|source| FitError::Eigen { step: 0, source, partial: Box::new(FitResult::empty(1.0, 0.0)) })?;
    let cfg = SelectConfig { alpha: 1.0, max_card: Some(max_card), ..SelectConfig::with_alpha(1.0) };
    let sel = select::forward_select(x, pc.scores.view(), &cfg).map_err(|source| FitError::Select { step: 0, source })?;
    let path = &sel.result.indices;
    let mut out = Vec::new();
    for c in 1..=path.len() {
        let (v, _) =
            sel.state.project_prefix(c, pc.scores.view()).map_err(|source| FitError::Select { step: 0, source })?;
        let block = gather_columns(x, &path[..c]);
        let lsspca = lsspca_loadings(block.view(), x, opts)
            .or_else(|e| match e {
                EigenError::NoConvergence { best } => Ok((best.vector, best.value)),
                e => Err(e),
            })
            .map_err(|source| FitError::Eigen { step: 0, source, partial: Box::new(FitResult::empty(1.0, 0.0)) })?
            .0;
        for (method, loadings) in [(Method::Projection, v), (Method::Lsspca, lsspca)] {
            let mut full = Array1::zeros(x.ncols());
            for (&j, &a) in path[..c].iter().zip(loadings.iter()) {
                full[j] = a;
            }
            let len = sq_norm(full.view()).sqrt();
            full /= len;
            if x.dot(&full).dot(&pc.scores) < 0.0 {
                full.mapv_inplace(|v| -v);
            }
            out.push((method, evaluate_first_component(x, full.view(), c, pc.lambda, pc.scores.view())));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Scaling;
    use crate::oracles::{dense_projector_deflate, jacobi_eigen, random_matrix, random_vector};
    use ndarray::array;

    #[test]
    fn deflate_by_orthogonal_vector_is_identity() {
        let q = array![[1.0, 2.0], [0.0, 0.0], [3.0, -1.0]];
        let t = array![0.0, 5.0, 0.0];
        assert_eq!(deflate(q.view(), t.view()).unwrap(), q);
    }

    #[test]
    fn deflate_by_own_column_zeroes_it() {
        let q = random_matrix(6, 3, 1);
        let t = q.column(1).to_owned();
        let out = deflate(q.view(), t.view()).unwrap();
        assert!(out.column(1).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn deflate_matches_dense_projector() {
        let q = random_matrix(10, 4, 2);
        let t = random_vector(10, 3);
        let got = deflate(q.view(), t.view()).unwrap();
        let want = dense_projector_deflate(&q, &t);
        assert!((&got - &want).iter().all(|d| d.abs() < 1e-12));
        let ortho = t.dot(&got);
        assert!(ortho.iter().all(|v| v.abs() < 1e-9 * t.dot(&t).sqrt() * 10.0));
    }

    #[test]
    fn deflate_rejects_zero_vector() {
        let q = random_matrix(3, 2, 4);
        assert!(matches!(deflate(q.view(), Array1::zeros(3).view()), Err(FitError::DegenerateComponent { .. })));
    }

    #[test]
    fn lsspca_on_all_columns_is_the_pc() {
        let raw = random_matrix(15, 4, 5);
        let x = DataMatrix::from_array(raw, Scaling::Covariance).unwrap();
        let xv = x.values();
        let (a, gamma) = lsspca_loadings(xv.view(), xv.view(), &PowerOptions { tol: 1e-12, max_iter: None }).unwrap();
        let (vals, _) = jacobi_eigen(&xv.t().dot(xv));
        assert!((gamma - vals[0]).abs() < 1e-8 * vals[0]);
        let t = xv.dot(&a);
        assert!((t.dot(&t) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lsspca_single_column() {
        let x = random_matrix(12, 3, 6);
        let q = random_matrix(12, 3, 7);
        let block = x.slice(ndarray::s![.., 1..2]).to_owned();
        let (a, gamma) = lsspca_loadings(block.view(), q.view(), &PowerOptions::default()).unwrap();
        let xk = x.column(1);
        let want = q.t().dot(&xk).mapv(|v| v * v).sum() / xk.dot(&xk);
        assert!((gamma - want).abs() < 1e-9 * want);
        assert_eq!(a.len(), 1);
    }

    #[test]
    fn invalid_config_rejected() {
        let x = DataMatrix::from_array(random_matrix(5, 2, 0), Scaling::Covariance).unwrap();
        let bad = FitConfig { alpha: 0.0, ..FitConfig::default() };
        assert!(matches!(fit(&x, &bad), Err(FitError::Config(_))));
        let bad = FitConfig { stop: StopRule::NComponents(0), ..FitConfig::default() };
        assert!(matches!(fit(&x, &bad), Err(FitError::Config(_))));
    }

    #[test]
    fn alpha_one_first_component_is_the_pc() {
        let x = DataMatrix::from_array(random_matrix(25, 6, 8), Scaling::Covariance).unwrap();
        let cfg = FitConfig::new(1.0, Method::Projection, StopRule::NComponents(1));
        let res = fit(&x, &cfg).unwrap();
        let (vals, _) = jacobi_eigen(&x.gram());
        let c = &res.components[0];
        assert!((c.evexp - vals[0]).abs() < 1e-8 * vals[0]);
        assert!(c.pc_correlation > 1.0 - 1e-9);
        assert_eq!(res.stop_reason, StopReason::NComponents);
    }

    #[test]
    fn vexp_fraction_stop_rule() {
        let x = DataMatrix::from_array(random_matrix(30, 8, 9), Scaling::Correlation).unwrap();
        let cfg = FitConfig::new(0.9, Method::Projection, StopRule::TotalVexpFraction(0.5));
        let res = fit(&x, &cfg).unwrap();
        assert_eq!(res.stop_reason, StopReason::VexpThreshold);
        let last = *res.cum_vexp.last().unwrap();
        assert!(last >= 0.5 * x.total_variance());
        if res.cum_vexp.len() > 1 {
            assert!(res.cum_vexp[res.cum_vexp.len() - 2] < 0.5 * x.total_variance());
        }
    }

    #[test]
    fn observer_sees_every_component() {
        let x = DataMatrix::from_array(random_matrix(20, 5, 10), Scaling::Covariance).unwrap();
        let mut seen = Vec::new();
        let mut obs = |step: usize, c: &SparseComponent| seen.push((step, c.cardinality()));
        let res = fit_observed(&x, &FitConfig::new(0.9, Method::Projection, StopRule::NComponents(3)), &mut obs).unwrap();
        assert_eq!(seen.len(), res.components.len());
        assert_eq!(seen[0].0, 0);
    }
}
