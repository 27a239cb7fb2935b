use serde_json::Value;
use spca_demo::{alpha_sweep_json, collinear_json, curves_json, fit_json, load_text, synthetic_csv};

fn parse(s: &str) -> Value {
    serde_json::from_str(s).expect("valid JSON")
}

fn sample_csv() -> String {
    synthetic_csv(60, 12, 3, 0.3, 7).unwrap()
}

#[test]
fn synthetic_csv_loads_back() {
    let csv = sample_csv();
    let x = load_text(&csv, "cor").unwrap();
    assert_eq!((x.n(), x.p()), (60, 12));
    assert_eq!(x.column_names()[0], "x1");
    assert_eq!(synthetic_csv(60, 12, 3, 0.3, 7).unwrap(), csv);
    assert!(synthetic_csv(10, 5, 0, 0.1, 1).is_err());
    assert!(synthetic_csv(10, 5, 6, 0.1, 1).is_err());
}

#[test]
fn fit_reports_components() {
    let v = parse(&fit_json(&sample_csv(), "cor", "projection", 0.95, 3).unwrap());
    assert_eq!(v["n"], 60);
    assert_eq!(v["p"], 12);
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 3);
    for (j, r) in v["rcvexp_pct"].as_array().unwrap().iter().enumerate() {
        assert!(r.as_f64().unwrap() >= 95.0 - 1e-7, "component {j}");
    }
    let first = &comps[0];
    assert_eq!(first["variables"].as_array().unwrap().len(), first["loadings"].as_array().unwrap().len());
    assert!(first["variables"][0].as_str().unwrap().starts_with('x'));
}

#[test]
fn fit_rejects_bad_arguments() {
    let csv = sample_csv();
    assert!(fit_json(&csv, "zscore", "projection", 0.9, 2).unwrap_err().contains("scaling"));
    assert!(fit_json(&csv, "cor", "lasso", 0.9, 2).unwrap_err().contains("method"));
    assert!(fit_json(&csv, "cor", "projection", 1.5, 2).is_err());
    assert!(fit_json("a,b\n1,x\n", "cov", "projection", 0.9, 1).is_err());
}

#[test]
fn sweep_is_monotone_in_cardinality() {
    let v = parse(&alpha_sweep_json(&sample_csv(), "cor", 1, "0.5, 0.9,0.99").unwrap());
    let pts = v.as_array().unwrap();
    assert_eq!(pts.len(), 3);
    let cards: Vec<u64> = pts.iter().map(|p| p["cardinalities"][0].as_u64().unwrap()).collect();
    assert!(cards.windows(2).all(|w| w[0] <= w[1]), "{cards:?}");
    assert!(alpha_sweep_json(&sample_csv(), "cor", 1, "0.5,abc").is_err());
}

#[test]
fn curves_cover_three_methods() {
    let v = parse(&curves_json(&sample_csv(), "cor", 5).unwrap());
    let rows = v.as_array().unwrap();
    for m in ["projection", "lsspca", "threshold"] {
        assert!(rows.iter().any(|r| r["method"] == m), "{m} missing");
    }
    let thr: Vec<&Value> = rows.iter().filter(|r| r["method"] == "threshold").collect();
    assert_eq!(thr.len(), 5);
}

#[test]
fn collinear_tables_match_the_closed_form() {
    let v = parse(&collinear_json(100, 5).unwrap());
    let cov: Vec<f64> = v["covariance"].as_array().unwrap().iter().map(|r| r["norm"].as_f64().unwrap()).collect();
    let want = [500.0, 900.0, 1200.0, 1400.0, 1500.0];
    assert!(cov.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-8), "{cov:?}");
    let cor: Vec<f64> = v["correlation"].as_array().unwrap().iter().map(|r| r["norm"].as_f64().unwrap()).collect();
    assert!(cor.iter().enumerate().all(|(i, a)| (a - (i + 1) as f64).abs() < 1e-8), "{cor:?}");
    assert_eq!(v["projection_cardinality"], 1);
    assert!((v["projection_rcvexp"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!(collinear_json(10, 25).is_err());
}
