//! WebAssembly bindings for the demo page in `www/`. Every export returns a
//! JSON string; the plain functions behind them are usable natively.

use halfcube_core::morse::inverse_rule;
use halfcube_core::subcomplex::homology_basis;
use halfcube_core::{
    betti_eq11, betti_eq12, build_matching, build_subcomplex, enumerate_faces, match_face,
    parse_seq, ChainComplex, FaceSeq,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest ambient dimension the page will build a complex for.
pub const MAX_N: usize = 7;
/// Largest `n` in the Betti table.
pub const MAX_TABLE_N: usize = 30;

fn texts(faces: &[FaceSeq]) -> Vec<String> {
    faces.iter().map(ToString::to_string).collect()
}

/// Classification, vertices, facets and matched partner of one face.
/// `n` is only used for the empty face.
pub fn face_report(text: &str, n: usize) -> Result<Value, String> {
    let text = text.trim();
    let face = if text.eq_ignore_ascii_case("empty") {
        FaceSeq::Empty
    } else {
        parse_seq(text, text.chars().count()).map_err(|e| e.to_string())?
    };
    let n = match &face {
        FaceSeq::Empty => n,
        seq => seq.symbols().len(),
    };
    if n < 4 {
        return Err(format!("ambient dimension {n} is below 4"));
    }
    let kind = face.kind();
    let (partner, rule) = match_face(&face, n);
    let (back, _) = match_face(&partner, n);
    let mut report = json!({
        "face": face.to_string(),
        "n": n,
        "kind": kind.label(),
        "dim": kind.dim(),
        "mask": face.mask().iter().map(|p| p + 1).collect::<Vec<_>>(),
        "vertices": texts(&face.vertices()),
        "facets": texts(&face.facets()),
        "partner": partner.to_string(),
        "rule": rule,
        "partner_rule": inverse_rule(rule),
        "direction": if partner.dim() > face.dim() { "up" } else { "down" },
        "involution": back == face,
    });
    if let Ok((t, u)) = face.total_and_u() {
        report["t"] = json!(t);
        report["u"] = json!(u);
    }
    Ok(report)
}

/// The subcomplex `C(n, k)`: its critical faces and the boundary chains
/// that form a basis of its homology.
pub fn subcomplex_report(n: usize, k: usize) -> Result<Value, String> {
    if !(4..=MAX_N).contains(&n) {
        return Err(format!("n must lie in 4..={MAX_N}"));
    }
    let table = enumerate_faces(n).map_err(|e| e.to_string())?;
    let cx = ChainComplex::new(&table).map_err(|e| e.to_string())?;
    let full = build_matching(&table).map_err(|e| e.to_string())?;
    let spec = build_subcomplex(&table, &full, k).map_err(|e| e.to_string())?;
    let basis = homology_basis(&spec, &cx).map_err(|e| e.to_string())?;
    let removed = spec.members.iter().filter(|&&m| !m).count();
    let faces_per_dim: Vec<usize> = (0..=n as i32)
        .map(|d| table.ids_of_dim(d).filter(|&id| spec.members[id]).count())
        .collect();
    Ok(json!({
        "label": spec.label(),
        "n": n,
        "k": k,
        "faces_per_dim": faces_per_dim,
        "removed": removed,
        "critical": spec.unmatched.iter().map(|&id| table.face(id).to_string()).collect::<Vec<_>>(),
        "betti": betti_eq12(n, k).to_string(),
        "degree": k - 1,
        "basis": basis.records(&table),
    }))
}

/// Both closed forms for every `3 <= k <= n <= n_max`.
pub fn betti_rows(n_max: usize) -> Result<Value, String> {
    if !(3..=MAX_TABLE_N).contains(&n_max) {
        return Err(format!("n_max must lie in 3..={MAX_TABLE_N}"));
    }
    let rows: Vec<Value> = (3..=n_max)
        .flat_map(|n| (3..=n).map(move |k| (n, k)))
        .map(|(n, k)| {
            let (a, b) = (betti_eq11(n, k), betti_eq12(n, k));
            json!({ "n": n, "k": k, "eq11": a.to_string(), "eq12": b.to_string(), "agree": a == b })
        })
        .collect();
    Ok(Value::Array(rows))
}

fn to_js(result: Result<Value, String>) -> Result<String, JsError> {
    result.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn face_info(seq: &str, n: usize) -> Result<String, JsError> {
    to_js(face_report(seq, n))
}

#[wasm_bindgen]
pub fn subcomplex(n: usize, k: usize) -> Result<String, JsError> {
    to_js(subcomplex_report(n, k))
}

#[wasm_bindgen]
pub fn betti_table(n_max: usize) -> Result<String, JsError> {
    to_js(betti_rows(n_max))
}
