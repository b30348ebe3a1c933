//! Browser bindings for the qkmirror toolkit.
//!
//! Three interactive operations are exposed to the demo page, each
//! returning a JSON string ready for plotting:
//! - [`compare_kth`]: both sides of the K-theoretic comparison identity
//!   (Jackson integral vs q-gamma-class pairing) at one parameter point;
//! - [`compare_coh`]: both sides of the classical comparison identity
//!   (oscillatory integral vs Gamma-class pairing);
//! - [`confluence_curve`]: the series-mode confluence error table, one row
//!   per (q, Novikov degree, basis monomial), for error-vs-(q-1) curves.
//!
//! Models are passed as the family data (N, a) of the rank-2 normal form;
//! an empty a-list with `rank1 = true` selects the projective-space mode.

use qkmirror::confluence::stripped_limit_table;
use qkmirror::oscillatory;
use qkmirror::scalar::{parse_rational, Scalar};
use qkmirror::toric::RankTwoModel;
use wasm_bindgen::prelude::wasm_bindgen;

fn model(n: usize, a: &[i64], rank1: bool) -> Result<RankTwoModel, String> {
    if rank1 {
        RankTwoModel::rank1(n).map_err(|e| e.to_string())
    } else {
        RankTwoModel::rank2(n, a.to_vec()).map_err(|e| e.to_string())
    }
}

fn err_json(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}

/// K-theoretic comparison at Q_i = q^{b_i}. `q` accepts "2", "3/2" (exact
/// cancellation-free path) or "1.7" (float path). Returns the
/// ComparisonReport as JSON.
#[wasm_bindgen]
pub fn compare_kth(n: usize, a: Vec<i64>, rank1: bool, q: String, b1: i64, b2: i64) -> String {
    let m = match model(n, &a, rank1) {
        Ok(m) => m,
        Err(e) => return err_json(&e),
    };
    let b = if m.rank() == 1 {
        vec![b1]
    } else {
        vec![b1, b2]
    };
    let report = if q.contains('.') {
        match q.parse::<f64>() {
            Ok(qv) => oscillatory::compare_kth(&m, qv, &b, 12, 1e-8),
            Err(_) => return err_json("bad q"),
        }
    } else {
        match parse_rational(&q) {
            Some(qr) if Scalar::to_f64(&qr) > 1.0 => oscillatory::KthPairingContext::new(&m, &qr)
                .and_then(|mut ctx| ctx.compare(&b, 12, 1e-8)),
            _ => return err_json("q must be a rational or decimal above 1"),
        }
    };
    match report {
        Ok(r) => serde_json::json!({
            "model": m.label(),
            "lhs": r.lhs,
            "rhs": r.rhs,
            "abs_err": r.abs_err,
            "rel_err": r.rel_err,
            "pass": r.pass,
            "support_points": r.meta.support_points,
            "empty_support": r.meta.empty_support,
            "series_degree": r.meta.series_degree,
            "gross_scale": r.meta.gross_scale,
        })
        .to_string(),
        Err(e) => err_json(&e.to_string()),
    }
}

/// Classical comparison at (z, Q). Returns the ComparisonReport as JSON.
#[wasm_bindgen]
pub fn compare_coh(n: usize, a: Vec<i64>, rank1: bool, z: f64, q1: f64, q2: f64) -> String {
    let m = match model(n, &a, rank1) {
        Ok(m) => m,
        Err(e) => return err_json(&e),
    };
    let q_values = if m.rank() == 1 {
        vec![q1]
    } else {
        vec![q1, q2]
    };
    match oscillatory::compare_coh(&m, z, &q_values, 16, 1e-6) {
        Ok(r) => serde_json::json!({
            "model": m.label(),
            "lhs": r.lhs,
            "rhs": r.rhs,
            "abs_err": r.abs_err,
            "rel_err": r.rel_err,
            "pass": r.pass,
        })
        .to_string(),
        Err(e) => err_json(&e.to_string()),
    }
}

/// Series-mode confluence error table over q = 1 + 10^{-1 - s/2},
/// s = 0..steps. Rows: {q, d1, d2, basis, value, target, error}.
#[wasm_bindgen]
pub fn confluence_curve(n: usize, a: Vec<i64>, rank1: bool, degree: u32, steps: u32) -> String {
    let m = match model(n, &a, rank1) {
        Ok(m) => m,
        Err(e) => return err_json(&e),
    };
    let q_list: Vec<f64> = (0..steps.max(2))
        .map(|s| 1.0 + 10f64.powf(-1.0 - s as f64 / 2.0))
        .collect();
    match stripped_limit_table(&m, degree.min(6), &q_list) {
        Ok(table) => {
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "q": r.q,
                        "d1": r.d1,
                        "d2": r.d2,
                        "basis": r.basis,
                        "value": r.value,
                        "target": r.target,
                        "error": r.error,
                    })
                })
                .collect();
            serde_json::json!({ "model": m.label(), "rows": rows }).to_string()
        }
        Err(e) => err_json(&e.to_string()),
    }
}
