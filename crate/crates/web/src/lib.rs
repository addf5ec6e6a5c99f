//! Browser bindings for the demo page. Every export takes a JSON view
//! description and returns a JSON string, so the page needs no glue types.

pub mod demo;

use wasm_bindgen::prelude::*;

/// Image-plane outline of the ellipsoid.
#[wasm_bindgen]
pub fn project(view_json: &str, outline_points: usize) -> Result<String, JsError> {
    demo::project(view_json, outline_points).map_err(|e| JsError::new(&e))
}

/// World camera centers of the pose locus explaining the projected ellipse.
#[wasm_bindgen]
pub fn sample_locus(view_json: &str, samples: usize) -> Result<String, JsError> {
    demo::sample_locus(view_json, samples).map_err(|e| JsError::new(&e))
}

/// The three squared position components of the triaxial case against `m`.
#[wasm_bindgen]
pub fn feasibility_curves(view_json: &str, points: usize) -> Result<String, JsError> {
    demo::feasibility_curves(view_json, points).map_err(|e| JsError::new(&e))
}
