use wasm_bindgen::prelude::*;

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn spectrum(omega: f64, omega_d: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(crate::spectrum(omega, omega_d, n))
}

#[wasm_bindgen]
pub fn dynamics(omega: f64, omega_d: f64, n: usize, beta: f64, span: f64) -> Result<Vec<f64>, JsError> {
    js(crate::dynamics(omega, omega_d, n, beta, span))
}

#[wasm_bindgen(js_name = detuningCurve)]
pub fn detuning_curve(omega_d: f64, from: f64, to: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    js(crate::detuning_curve(omega_d, from, to, steps))
}
