//! Synthetic data, the timing harness, and the log-log complexity model
//! `log T(c, p) = log k + α log c + β log p + η`.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::data::{DataError, DataMatrix, Scaling};
use crate::eigen::GramSide;
use crate::fit::{fit_observed, FitConfig, Method, SparseComponent, StopRule};
use crate::linalg;
use crate::numfmt::format_sig;

/// Distinct levels of `p` and of `c` needed to identify the exponents.
pub const MIN_LEVELS: usize = 2;
/// Distinct levels below which the exponents are poorly determined.
pub const RECOMMENDED_LEVELS: usize = 3;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("need at least {MIN_LEVELS} distinct values of both p and c, got {p} and {c}")]
    TooFewLevels { p: usize, c: usize },
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("non-positive timing for p={p}, c={c}")]
    NonPositive { p: usize, c: usize },
    #[error("timing file: {0}")]
    Format(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// `x_ij = (−1)^i √j` with 1-based `i` and `j`: every column is a multiple of
/// the same alternating vector, so the matrix has rank one.
pub fn collinear_values(n: usize, p: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, p), |(i, j)| {
        let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
        sign * ((j + 1) as f64).sqrt()
    })
}

/// [`collinear_values`] as a centered covariance-scaled matrix. Centering is
/// a no-op for even `n`.
pub fn gen_collinear(n: usize, p: usize) -> DataMatrix {
    DataMatrix::from_array(collinear_values(n, p), Scaling::Covariance).expect("collinear data has no constant columns")
}

/// `F·diag(s)·L + noise·E`, centered, with standard normal `F` (`n × rank`),
/// `L` (`rank × p`) and `E`, and factor scales `s_k = 0.85^k` so that the
/// leading eigenvalues are well separated.
pub fn lowrank_values(n: usize, p: usize, rank: usize, noise: f64, seed: u64) -> Array2<f64> {
    assert!(rank <= n.min(p), "rank {rank} exceeds min({n}, {p})");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let factors = Array2::from_shape_fn((n, rank), |(_, k)| draw() * 0.85f64.powi(k as i32));
    let loadings = Array2::from_shape_fn((rank, p), |_| draw());
    let mut x = factors.dot(&loadings);
    if noise > 0.0 {
        x.mapv_inplace(|v| v + noise * draw());
    }
    x
}

pub fn gen_random_lowrank(n: usize, p: usize, rank: usize, noise: f64, seed: u64) -> DataMatrix {
    DataMatrix::from_array(lowrank_values(n, p, rank, noise, seed), Scaling::Covariance)
        .expect("generated columns are not constant")
}

pub struct BenchDataset {
    pub label: String,
    pub data: DataMatrix,
}

/// One timed repetition: elapsed seconds until component `c` was accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingSample {
    pub dataset: String,
    pub p: usize,
    pub c: usize,
    pub rep: usize,
    pub elapsed: f64,
}

/// Median and spread over repetitions for one dataset and component count.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingRecord {
    pub dataset: String,
    pub p: usize,
    pub c: usize,
    pub elapsed: f64,
    pub p10: f64,
    pub p90: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub dataset: String,
    pub rep: usize,
    /// Components completed before the failure or early stop.
    pub completed: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub components: usize,
    pub repetitions: usize,
    pub alpha: f64,
    pub warmup: bool,
    /// The default times the plain `p × p` power method, without switching
    /// to the `n × n` Gram matrix when `p > n`.
    pub gram_side: GramSide,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { components: 10, repetitions: 20, alpha: 0.95, warmup: true, gram_side: GramSide::Variables }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub samples: Vec<TimingSample>,
    pub records: Vec<TimingRecord>,
    pub failures: Vec<CellFailure>,
}

/// Times projection SPCA on each dataset. Each repetition runs one fit of
/// `components` components and records the elapsed time at every prefix, so
/// `elapsed(c)` is nondecreasing in `c` within a repetition. Fits run one at
/// a time on the calling thread.
pub fn run_benchmark(datasets: &[BenchDataset], cfg: &BenchConfig) -> BenchReport {
    let fit_cfg = FitConfig {
        gram_side: cfg.gram_side,
        ..FitConfig::new(cfg.alpha, Method::Projection, StopRule::NComponents(cfg.components))
    };
    let mut report = BenchReport::default();
    for ds in datasets {
        if cfg.warmup {
            let _ = fit_observed(&ds.data, &fit_cfg, &mut ());
        }
        let mut per_c: Vec<Vec<f64>> = vec![Vec::new(); cfg.components];
        for rep in 0..cfg.repetitions {
            let mut marks: Vec<f64> = Vec::with_capacity(cfg.components);
            let start = Instant::now();
            let outcome = {
                let mut obs = |_: usize, _: &SparseComponent| marks.push(start.elapsed().as_secs_f64());
                fit_observed(&ds.data, &fit_cfg, &mut obs)
            };
            let message = match &outcome {
                Err(e) => Some(e.to_string()),
                Ok(res) if res.components.len() < cfg.components => {
                    Some(format!("stopped after {} components ({:?})", res.components.len(), res.stop_reason))
                }
                Ok(_) => None,
            };
            if let Some(message) = message {
                report.failures.push(CellFailure { dataset: ds.label.clone(), rep, completed: marks.len(), message });
            }
            for (k, &t) in marks.iter().enumerate() {
                per_c[k].push(t);
                report.samples.push(TimingSample {
                    dataset: ds.label.clone(),
                    p: ds.data.p(),
                    c: k + 1,
                    rep,
                    elapsed: t,
                });
            }
        }
        for (k, times) in per_c.into_iter().enumerate() {
            if let Some(rec) = summarize(&ds.label, ds.data.p(), k + 1, times) {
                report.records.push(rec);
            }
        }
    }
    report
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summarize(dataset: &str, p: usize, c: usize, mut times: Vec<f64>) -> Option<TimingRecord> {
    if times.is_empty() {
        return None;
    }
    times.sort_by(f64::total_cmp);
    Some(TimingRecord {
        dataset: dataset.to_string(),
        p,
        c,
        elapsed: quantile(&times, 0.5),
        p10: quantile(&times, 0.1),
        p90: quantile(&times, 0.9),
        reps: times.len(),
    })
}

/// Groups samples by `(dataset, p, c)` and takes medians.
pub fn aggregate(samples: &[TimingSample]) -> Vec<TimingRecord> {
    let mut groups: Vec<((String, usize, usize), Vec<f64>)> = Vec::new();
    for s in samples {
        let key = (s.dataset.clone(), s.p, s.c);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(s.elapsed),
            None => groups.push((key, vec![s.elapsed])),
        }
    }
    groups.into_iter().filter_map(|((d, p, c), t)| summarize(&d, p, c, t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityFit {
    /// Intercept on the log₁₀ scale.
    pub log_k: f64,
    /// Exponent of the component count.
    pub alpha_exp: f64,
    /// Exponent of the variable count.
    pub beta_exp: f64,
    pub r_squared: f64,
    pub residual_se: f64,
    pub observations: usize,
}

/// OLS of `log₁₀ T` on `log₁₀ c` and `log₁₀ p`.
pub fn fit_complexity(records: &[TimingRecord]) -> Result<ComplexityFit, BenchError> {
    let ps: BTreeSet<usize> = records.iter().map(|r| r.p).collect();
    let cs: BTreeSet<usize> = records.iter().map(|r| r.c).collect();
    if ps.len() < MIN_LEVELS || cs.len() < MIN_LEVELS {
        return Err(BenchError::TooFewLevels { p: ps.len(), c: cs.len() });
    }
    if let Some(r) = records.iter().find(|r| !(r.elapsed > 0.0)) {
        return Err(BenchError::NonPositive { p: r.p, c: r.c });
    }
    let m = records.len();
    let design = Array2::from_shape_fn((m, 3), |(i, k)| match k {
        0 => 1.0,
        1 => (records[i].c as f64).log10(),
        _ => (records[i].p as f64).log10(),
    });
    let y: Array1<f64> = records.iter().map(|r| r.elapsed.log10()).collect();
    let coef = linalg::least_squares(design.view(), y.view(), 1e-12).map_err(|_| BenchError::RankDeficient)?;
    let fitted = design.dot(&coef);
    let mean = y.mean().unwrap_or(0.0);
    let ss_res: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 };
    let residual_se = if m > 3 { (ss_res / (m - 3) as f64).sqrt() } else { 0.0 };
    Ok(ComplexityFit {
        log_k: coef[0],
        alpha_exp: coef[1],
        beta_exp: coef[2],
        r_squared,
        residual_se,
        observations: m,
    })
}

pub const TIMING_HEADER: [&str; 5] = ["dataset", "p", "c", "rep", "elapsed_seconds"];

/// Writes `dataset,p,c,rep,elapsed_seconds` with 6 significant digits.
pub fn write_timings<W: Write>(out: W, samples: &[TimingSample]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TIMING_HEADER)?;
    for s in samples {
        w.write_record([
            s.dataset.clone(),
            s.p.to_string(),
            s.c.to_string(),
            s.rep.to_string(),
            format_sig(s.elapsed, 6),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_timings<R: Read>(input: R) -> Result<Vec<TimingSample>, BenchError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != TIMING_HEADER {
        return Err(BenchError::Format(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let bad = |what: &str| BenchError::Format(format!("row {}: bad {what}", i + 1));
        out.push(TimingSample {
            dataset: row[0].to_string(),
            p: row[1].parse().map_err(|_| bad("p"))?,
            c: row[2].parse().map_err(|_| bad("c"))?,
            rep: row[3].parse().map_err(|_| bad("rep"))?,
            elapsed: row[4].parse().map_err(|_| bad("elapsed_seconds"))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{columns, jacobi_eigen, normal_equations, ols_normal};

    fn synthetic(alpha: f64, beta: f64, k: f64) -> Vec<TimingRecord> {
        let mut out = Vec::new();
        for &p in &[100usize, 300, 1000, 3000] {
            for c in 1..=5 {
                let t = k * (c as f64).powf(alpha) * (p as f64).powf(beta);
                out.push(TimingRecord { dataset: format!("p{p}"), p, c, elapsed: t, p10: t, p90: t, reps: 1 });
            }
        }
        out
    }

    #[test]
    fn collinear_trace_and_entries() {
        let x = gen_collinear(100, 5);
        let s = x.gram();
        assert!((s.diag().sum() - 1500.0).abs() < 1e-9);
        assert!((s[[4, 4]] - 500.0).abs() < 1e-9);
        let (vals, _) = jacobi_eigen(&s);
        assert!(vals[1].abs() < 1e-8);
    }

    #[test]
    fn lowrank_is_reproducible_and_has_rank() {
        let a = lowrank_values(30, 12, 3, 0.0, 7);
        let b = lowrank_values(30, 12, 3, 0.0, 7);
        assert_eq!(a, b);
        // σ₄ is bounded by the residual after projecting on three columns
        let block = columns(a.view(), &[0, 1, 2]);
        let mut resid_sq = 0.0;
        for col in a.columns() {
            let coef = normal_equations(&block, col);
            let r = &col - &block.dot(&coef);
            resid_sq += r.dot(&r);
        }
        let (vals, _) = jacobi_eigen(&a.t().dot(&a));
        assert!(resid_sq.sqrt() < 1e-9 * vals[0].sqrt());
        assert!(vals[2] > 1e-6 * vals[0]);
    }

    #[test]
    fn noiseless_inversion() {
        let fit = fit_complexity(&synthetic(1.46, 2.03, 3e-7)).unwrap();
        assert!((fit.alpha_exp - 1.46).abs() < 1e-6);
        assert!((fit.beta_exp - 2.03).abs() < 1e-6);
        assert!((fit.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let mut recs = synthetic(1.0, 2.0, 1e-6);
        for (i, r) in recs.iter_mut().enumerate() {
            r.elapsed *= 1.0 + 0.1 * ((i * 7 % 5) as f64 - 2.0) / 2.0;
        }
        let fit = fit_complexity(&recs).unwrap();
        let design = Array2::from_shape_fn((recs.len(), 3), |(i, k)| match k {
            0 => 1.0,
            1 => (recs[i].c as f64).log10(),
            _ => (recs[i].p as f64).log10(),
        });
        let y: Array1<f64> = recs.iter().map(|r| r.elapsed.log10()).collect();
        let want = ols_normal(&design, &y);
        assert!((fit.log_k - want[0]).abs() < 1e-10);
        assert!((fit.alpha_exp - want[1]).abs() < 1e-10);
        assert!((fit.beta_exp - want[2]).abs() < 1e-10);
    }

    #[test]
    fn too_few_levels() {
        let recs: Vec<_> = synthetic(1.0, 2.0, 1.0).into_iter().filter(|r| r.p == 300).collect();
        assert!(matches!(fit_complexity(&recs), Err(BenchError::TooFewLevels { .. })));
    }

    #[test]
    fn timings_round_trip() {
        let samples = vec![TimingSample { dataset: "a".into(), p: 10, c: 2, rep: 0, elapsed: 0.00123456 }];
        let mut buf = Vec::new();
        write_timings(&mut buf, &samples).unwrap();
        assert_eq!(read_timings(buf.as_slice()).unwrap(), samples);
    }

    #[test]
    fn benchmark_prefix_times_monotone() {
        let ds = vec![BenchDataset { label: "small".into(), data: gen_random_lowrank(40, 15, 4, 0.3, 1) }];
        let cfg = BenchConfig { components: 3, repetitions: 3, alpha: 0.9, ..BenchConfig::default() };
        let report = run_benchmark(&ds, &cfg);
        assert_eq!(report.records.len(), 3);
        assert!(report.records[2].elapsed >= report.records[0].elapsed);
        assert!(report.failures.is_empty());
    }
}
