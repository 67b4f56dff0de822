//! Browser bindings: solve a model, evaluate the result, sample a plot grid.
//!
//! Each export wraps a plain function returning `Result<String, String>` so
//! the same code is tested natively.

use permissive_core::document::{plot_csv, PafDocument, PlotRange};
use permissive_core::engine::compute_permissiveness;
use permissive_core::model::parse_model;
use wasm_bindgen::prelude::*;

/// Solves a model given as text and returns the JSON document.
pub fn solve_text(model: &str) -> Result<String, String> {
    let spec = parse_model(model).map_err(|e| e.to_string())?;
    let sol = compute_permissiveness(&spec).map_err(|e| e.to_string())?;
    Ok(PafDocument::from_solution(&spec, model, &sol).to_json())
}

/// Value at `valuation` (such as `x=1/2,y=0`), followed by the move on a
/// second line when one is stored.
pub fn eval_text(doc: &str, location: &str, valuation: &str) -> Result<String, String> {
    let doc = PafDocument::from_json(doc).map_err(|e| e.to_string())?;
    let f = doc.function(location).map_err(|e| e.to_string())?;
    let v = doc.parse_valuation(valuation).map_err(|e| e.to_string())?;
    let value = f.eval(&v).map_err(|e| e.to_string())?;
    let mut out = value.to_string();
    if let Some(a) = f.cell_at(&v).and_then(|p| p.annotation.as_ref()) {
        if value.is_finite() {
            out += &format!("\nmove {} [{}, {}]", a.action, a.alpha.eval(&v), a.beta.eval(&v));
        }
    }
    Ok(out)
}

/// CSV grid over the first two clocks (or the only one).
pub fn plot_text(doc: &str, location: &str, range: &str) -> Result<String, String> {
    let doc = PafDocument::from_json(doc).map_err(|e| e.to_string())?;
    let f = doc.function(location).map_err(|e| e.to_string())?;
    let range: PlotRange = range.parse().map_err(|e: permissive_core::document::DocumentError| e.to_string())?;
    let base = doc.parse_valuation("").map_err(|e| e.to_string())?;
    let cy = (doc.clocks.len() > 1).then_some(1);
    plot_csv(&f, &base, 0, cy, &range).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn solve(model: &str) -> Result<String, JsValue> {
    solve_text(model).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn evaluate(doc: &str, location: &str, valuation: &str) -> Result<String, JsValue> {
    eval_text(doc, location, valuation).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn plot(doc: &str, location: &str, range: &str) -> Result<String, JsValue> {
    plot_text(doc, location, range).map_err(|e| JsValue::from_str(&e))
}
