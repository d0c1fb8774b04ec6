//! Browser bindings for three views: model B time series, momentum parity
//! at the end of the sweep, and the model B spectrum against γ.
//!
//! Every function returns a flat `Float64Array` with a fixed stride so the
//! page can plot without any parsing.

use nonherm::experiments::{run_scenario, MethodName, Scenario, ScenarioConfig};
use nonherm::linalg::eig;
use nonherm::symmetry::{parity_scan, LZModel};
use nonherm::{c64, CMatrix, Error, TimeGrid};
use wasm_bindgen::prelude::*;

fn js(e: Error) -> String {
    e.to_string()
}

/// `⟨σ_component⟩(t)` of model B for the metric, no-jump and master-equation
/// methods, from the Bloch vector `(x0, y0, z0)` on the sphere.
///
/// Stride 4: `t, metric, nj, me`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn model_b_series(
    omega: f64,
    gamma: f64,
    t_max: f64,
    dt: f64,
    x0: f64,
    y0: f64,
    z0: f64,
    component: usize,
) -> Result<Vec<f64>, String> {
    if component > 2 {
        return Err("component must be 0 (x), 1 (y) or 2 (z)".into());
    }
    let r = (x0 * x0 + y0 * y0 + z0 * z0).sqrt();
    if !(r > 0.0) {
        return Err("initial Bloch vector must be nonzero".into());
    }
    let mut cfg = ScenarioConfig::defaults(Scenario::ModelB);
    cfg.omega = omega;
    cfg.gamma = gamma;
    cfg.t_max = t_max;
    cfg.dt = dt;
    cfg.initial = format!("bloch:{},{},{}", x0 / r, y0 / r, z0 / r).parse().map_err(js)?;
    cfg.methods = vec![MethodName::Metric, MethodName::Me, MethodName::Nj];
    cfg.sample_every = ((t_max / dt) / 400.0).ceil().max(1.0) as usize;
    let out = run_scenario(&cfg).map_err(js)?;

    let pick = |row: &nonherm::experiments::ResultRow| [row.sx, row.sy, row.sz][component];
    let mut flat = Vec::new();
    // rows are sorted by (t, method): me, metric, nj
    for chunk in out.rows.chunks(3) {
        let by = |m: &str| chunk.iter().find(|r| r.method == m).map(pick).unwrap_or(f64::NAN);
        flat.extend([chunk[0].t, by("metric"), by("nj"), by("me")]);
    }
    Ok(flat)
}

/// Final-time `⟨σz⟩` per momentum for the sweep `Δ(t) = t` on
/// `[-t_end, t_end]`, starting from the excited state.
///
/// Stride 3: `k, metric, nj`.
#[wasm_bindgen]
pub fn parity_vs_k(gamma: f64, t_end: f64, dt: f64, k_max: f64, n_k: usize) -> Result<Vec<f64>, String> {
    if n_k == 0 || !(k_max > 0.0) {
        return Err("need at least one positive momentum".into());
    }
    let mut ks = Vec::new();
    for i in 1..=n_k {
        let k = k_max * i as f64 / n_k as f64;
        // |k| = γ is an exceptional line of the sweep
        if (k - gamma.abs()).abs() > 1e-6 {
            ks.extend([k, -k]);
        }
    }
    let grid = TimeGrid::new(-t_end, t_end, dt).map_err(js)?;
    let psi0 = [c64(1.0, 0.0), c64(0.0, 0.0)];
    let modes = parity_scan(&LZModel::ramp(0.0, gamma, 1.0), &ks, grid, &psi0, grid.steps()).map_err(js)?;
    Ok(modes
        .iter()
        .flat_map(|m| [m.k, m.metric.last().unwrap().z, m.nj.last().unwrap().z])
        .collect())
}

/// Eigenvalues of `ωσx - iγσz` for `n` values of `γ` in `[0, gamma_max]`.
/// At the exceptional point both eigenvalues are reported as zero.
///
/// Stride 5: `γ, Re E+, Im E+, Re E-, Im E-`.
#[wasm_bindgen]
pub fn spectrum_vs_gamma(omega: f64, gamma_max: f64, n: usize) -> Result<Vec<f64>, String> {
    if n < 2 {
        return Err("need at least two samples".into());
    }
    let mut flat = Vec::with_capacity(5 * n);
    for i in 0..n {
        let gamma = gamma_max * i as f64 / (n - 1) as f64;
        let h = &CMatrix::sigma_x().scale_re(omega) - &CMatrix::sigma_z().scale(c64(0.0, gamma));
        let (plus, minus) = match eig(&h) {
            Ok(s) => {
                let key = |z: &nonherm::C64| z.re + z.im;
                let (a, b) = (s.eigenvalues[0], s.eigenvalues[1]);
                if key(&a) >= key(&b) {
                    (a, b)
                } else {
                    (b, a)
                }
            }
            Err(Error::NearDegenerate { .. }) => (c64(0.0, 0.0), c64(0.0, 0.0)),
            Err(e) => return Err(js(e)),
        };
        flat.extend([gamma, plus.re, plus.im, minus.re, minus.im]);
    }
    Ok(flat)
}
