//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain strings and numbers and returns a JSON string, so
//! the same functions run natively in tests.

use serde::Serialize;
use spca_core::baseline;
use spca_core::bench;
use spca_core::cli::compare_curves;
use spca_core::data::{load_csv_reader, preprocess, CsvOptions, DataMatrix, MissingPolicy, Scaling};
use spca_core::fit::{fit, FitConfig, Method, StopRule};
use wasm_bindgen::prelude::*;

fn parse_scaling(s: &str) -> Result<Scaling, String> {
    match s {
        "cov" => Ok(Scaling::Covariance),
        "cor" => Ok(Scaling::Correlation),
        other => Err(format!("unknown scaling {other:?}")),
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "projection" => Ok(Method::Projection),
        "lsspca" => Ok(Method::Lsspca),
        other => Err(format!("unknown method {other:?}")),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Parses CSV text with a header row, drops incomplete columns and scales.
pub fn load_text(csv: &str, scaling: &str) -> Result<DataMatrix, String> {
    let table = load_csv_reader(csv.as_bytes(), &CsvOptions::default()).map_err(|e| e.to_string())?;
    preprocess(&table, parse_scaling(scaling)?, MissingPolicy::DropColumns).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
struct ComponentJson {
    variables: Vec<String>,
    loadings: Vec<f64>,
    evexp: f64,
    pc_lambda: f64,
    pc_correlation: f64,
    alpha_reached: bool,
}

#[derive(Debug, Serialize)]
struct FitJson {
    n: usize,
    p: usize,
    total_variance: f64,
    stop_reason: String,
    cum_vexp_pct: Vec<f64>,
    rcvexp_pct: Vec<f64>,
    components: Vec<ComponentJson>,
}

pub fn fit_json(csv: &str, scaling: &str, method: &str, alpha: f64, components: usize) -> Result<String, String> {
    let x = load_text(csv, scaling)?;
    let cfg = FitConfig::new(alpha, parse_method(method)?, StopRule::NComponents(components));
    let res = fit(&x, &cfg).map_err(|e| e.to_string())?;
    let total = x.total_variance();
    to_json(&FitJson {
        n: x.n(),
        p: x.p(),
        total_variance: total,
        stop_reason: format!("{:?}", res.stop_reason),
        cum_vexp_pct: res.cum_vexp.iter().map(|v| 100.0 * v / total).collect(),
        rcvexp_pct: res.rcvexp.iter().map(|v| 100.0 * v).collect(),
        components: res
            .components
            .iter()
            .map(|c| ComponentJson {
                variables: c.indices.iter().map(|&j| x.column_names()[j].clone()).collect(),
                loadings: c.sparse_loadings.to_vec(),
                evexp: c.evexp,
                pc_lambda: c.ref_lambda,
                pc_correlation: c.pc_correlation,
                alpha_reached: c.alpha_reached,
            })
            .collect(),
    })
}

#[derive(Debug, Serialize)]
struct SweepPoint {
    alpha: f64,
    cardinalities: Vec<usize>,
    rcvexp_pct: Vec<f64>,
    cum_vexp_pct: Vec<f64>,
}

/// Fits `components` components at each `alpha` in `alphas` (comma-separated).
pub fn alpha_sweep_json(csv: &str, scaling: &str, components: usize, alphas: &str) -> Result<String, String> {
    let x = load_text(csv, scaling)?;
    let total = x.total_variance();
    let mut out = Vec::new();
    for a in alphas.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let alpha: f64 = a.parse().map_err(|_| format!("bad alpha {a:?}"))?;
        let res = fit(&x, &FitConfig::new(alpha, Method::Projection, StopRule::NComponents(components)))
            .map_err(|e| e.to_string())?;
        out.push(SweepPoint {
            alpha,
            cardinalities: res.components.iter().map(|c| c.cardinality()).collect(),
            rcvexp_pct: res.rcvexp.iter().map(|v| 100.0 * v).collect(),
            cum_vexp_pct: res.cum_vexp.iter().map(|v| 100.0 * v / total).collect(),
        });
    }
    to_json(&out)
}

#[derive(Debug, Serialize)]
struct CurveJson {
    method: &'static str,
    cardinality: usize,
    norm: f64,
    rel_norm: f64,
    rcvexp: f64,
    pc_correlation: f64,
}

pub fn curves_json(csv: &str, scaling: &str, max_card: usize) -> Result<String, String> {
    let x = load_text(csv, scaling)?;
    let rows = compare_curves(&x, max_card).map_err(|e| e.to_string())?;
    to_json(
        &rows
            .into_iter()
            .map(|r| CurveJson {
                method: r.method,
                cardinality: r.point.cardinality,
                norm: r.point.norm,
                rel_norm: r.point.rel_norm,
                rcvexp: r.point.rcvexp,
                pc_correlation: r.point.pc_correlation,
            })
            .collect::<Vec<_>>(),
    )
}

#[derive(Debug, Serialize)]
struct NormRow {
    cardinality: usize,
    variables: Vec<usize>,
    loadings: Vec<f64>,
    norm: f64,
    rel_norm: f64,
}

#[derive(Debug, Serialize)]
struct CollinearJson {
    covariance: Vec<NormRow>,
    correlation: Vec<NormRow>,
    projection_cardinality: usize,
    projection_rcvexp: f64,
}

/// Optimal norm-maximizing subsets on the collinear example, for covariance
/// and correlation scaling, next to the single projection component.
pub fn collinear_json(n: usize, p: usize) -> Result<String, String> {
    if p > baseline::MAX_EXHAUSTIVE_P {
        return Err(format!("p must be at most {}", baseline::MAX_EXHAUSTIVE_P));
    }
    let raw = bench::collinear_values(n, p);
    let mut tables = Vec::new();
    for scaling in [Scaling::Covariance, Scaling::Correlation] {
        let x = DataMatrix::from_array(raw.clone(), scaling).map_err(|e| e.to_string())?;
        let s = x.gram();
        let rows = (1..=p)
            .map(|c| {
                baseline::optimal_norm_subset(s.view(), c).map(|nc| NormRow {
                    cardinality: c,
                    variables: nc.indices.iter().map(|j| j + 1).collect(),
                    loadings: nc.unit_loadings.to_vec(),
                    norm: nc.norm,
                    rel_norm: nc.rel_norm,
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        tables.push(rows);
    }
    let x = bench::gen_collinear(n, p);
    let res = fit(&x, &FitConfig::new(0.95, Method::Projection, StopRule::NComponents(p))).map_err(|e| e.to_string())?;
    let correlation = tables.pop().unwrap_or_default();
    let covariance = tables.pop().unwrap_or_default();
    to_json(&CollinearJson {
        covariance,
        correlation,
        projection_cardinality: res.components.first().map_or(0, |c| c.cardinality()),
        projection_rcvexp: res.rcvexp.last().copied().unwrap_or(0.0),
    })
}

/// Synthetic low-rank data as CSV text, for the demo's "generate" button.
pub fn synthetic_csv(n: usize, p: usize, rank: usize, noise: f64, seed: u64) -> Result<String, String> {
    if rank == 0 || rank > n.min(p) {
        return Err(format!("rank must lie in 1..={}", n.min(p)));
    }
    let x = bench::lowrank_values(n, p, rank, noise, seed);
    let mut out = (1..=p).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for row in x.rows() {
        out.push_str(&row.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn fit_csv(csv: &str, scaling: &str, method: &str, alpha: f64, components: usize) -> Result<String, JsValue> {
    fit_json(csv, scaling, method, alpha, components).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn alpha_sweep(csv: &str, scaling: &str, components: usize, alphas: &str) -> Result<String, JsValue> {
    alpha_sweep_json(csv, scaling, components, alphas).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn curves(csv: &str, scaling: &str, max_card: usize) -> Result<String, JsValue> {
    curves_json(csv, scaling, max_card).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn collinear_table(n: usize, p: usize) -> Result<String, JsValue> {
    collinear_json(n, p).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn synthetic(n: usize, p: usize, rank: usize, noise: f64, seed: u32) -> Result<String, JsValue> {
    synthetic_csv(n, p, rank, noise, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}
