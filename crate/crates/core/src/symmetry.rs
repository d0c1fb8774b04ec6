//! Left/right transformations between momentum modes `k` and `-k`, the
//! parity of spin observables, and the particle-hole duality check.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::biorthogonal::build_basis;
use crate::dissipative::{norm_expectation, BlochVector};
use crate::error::{Error, Result};
use crate::integrate::{HamiltonianFn, TimeGrid};
use crate::linalg::{c64, fix_phase, hermitian_eigen, inner, CMatrix, Spectrum, C64};
use crate::metric::{evolve_metric, hermitian_map, metric_expectation, MetricTrajectory};

/// Tolerance for matching the spectra of `H_k` and `H_{-k}`.
pub const SPECTRUM_MATCH_TOL: f64 = 1e-8;

/// `H_k = kσx + iγ(t)σy + Δ(t)σz`.
#[derive(Clone)]
pub struct LZModel {
    pub k: f64,
    gamma: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    delta: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for LZModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LZModel")
            .field("k", &self.k)
            .field("gamma(0)", &(self.gamma)(0.0))
            .field("delta(0)", &(self.delta)(0.0))
            .finish()
    }
}

impl LZModel {
    pub fn new(
        k: f64,
        gamma: impl Fn(f64) -> f64 + Send + Sync + 'static,
        delta: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        LZModel {
            k,
            gamma: Arc::new(gamma),
            delta: Arc::new(delta),
        }
    }

    /// Constant `γ` and linear sweep `Δ(t) = rate·t`.
    pub fn ramp(k: f64, gamma: f64, rate: f64) -> Self {
        LZModel::new(k, move |_| gamma, move |t| rate * t)
    }

    /// Same `γ(t)` and `Δ(t)` at another momentum.
    pub fn with_k(&self, k: f64) -> Self {
        LZModel {
            k,
            ..self.clone()
        }
    }

    pub fn gamma(&self, t: f64) -> f64 {
        (self.gamma)(t)
    }

    pub fn delta(&self, t: f64) -> f64 {
        (self.delta)(t)
    }

    pub fn hamiltonian_fn(&self) -> HamiltonianFn {
        let model = self.clone();
        HamiltonianFn::new(2, move |t| lz_hamiltonian(&model, t))
    }
}

pub fn lz_hamiltonian(model: &LZModel, t: f64) -> CMatrix {
    lz_matrix(model.k, model.gamma(t), model.delta(t))
}

/// `kσx + iγσy + Δσz = [[Δ, k + γ], [k - γ, -Δ]]`.
pub fn lz_matrix(k: f64, gamma: f64, delta: f64) -> CMatrix {
    CMatrix::from_real_rows([[delta, k + gamma], [k - gamma, -delta]])
}

/// `E_k`, the principal root of `k² - γ² + Δ²`.
pub fn lz_energy(k: f64, gamma: f64, delta: f64) -> C64 {
    c64(k * k - gamma * gamma + delta * delta, 0.0).sqrt()
}

/// Generalised unitaries between the biorthogonal bases of `H_k` and
/// `H_{-k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumMaps {
    pub k: f64,
    pub u_r: CMatrix,
    pub u_l: CMatrix,
}

impl MomentumMaps {
    /// Largest of `‖U_L U_R† - 1‖` and `‖U_L† U_R - 1‖`.
    pub fn pseudo_unitarity_residual(&self) -> f64 {
        let id = CMatrix::identity(self.u_r.dim());
        let a = (&(&self.u_l * &self.u_r.adjoint()) - &id).max_abs();
        let b = (&(&self.u_l.adjoint() * &self.u_r) - &id).max_abs();
        a.max(b)
    }

    /// Largest of `‖U_R H_k U_L† - H_{-k}‖` and `‖U_L H_k† U_R† - H_{-k}†‖`.
    pub fn conjugation_residual(&self, hk: &CMatrix, hmk: &CMatrix) -> f64 {
        let a = (&(&(&self.u_r * hk) * &self.u_l.adjoint()) - hmk).max_abs();
        let b = (&(&(&self.u_l * &hk.adjoint()) * &self.u_r.adjoint()) - &hmk.adjoint()).max_abs();
        a.max(b)
    }
}

/// `U_R = Σ|-k,n⟩_R⟨k,n|_L` and `U_L = Σ|-k,n⟩_L⟨k,n|_R`, with the bases
/// in the gauge of [`build_basis`].
pub fn build_momentum_maps(k: f64, hk: &CMatrix, hmk: &CMatrix) -> Result<MomentumMaps> {
    let bk = build_basis(hk)?;
    let bmk = build_basis(hmk)?;
    momentum_maps_from_bases(k, &bk, &bmk)
}

/// As [`build_momentum_maps`] but with caller-chosen biorthonormal bases.
pub fn momentum_maps_from_bases(k: f64, bk: &Spectrum, bmk: &Spectrum) -> Result<MomentumMaps> {
    let pairing = pair_eigenvalues(&bk.eigenvalues, &bmk.eigenvalues)?;
    let n = bk.dim();
    let mut u_r = CMatrix::zeros(n);
    let mut u_l = CMatrix::zeros(n);
    for (a, &b) in pairing.iter().enumerate() {
        u_r = &u_r + &CMatrix::outer(&bmk.right[b], &bk.left[a]);
        u_l = &u_l + &CMatrix::outer(&bmk.left[b], &bk.right[a]);
    }
    Ok(MomentumMaps { k, u_r, u_l })
}

/// For each eigenvalue of `a`, the index of the closest one in `b`.
fn pair_eigenvalues(a: &[C64], b: &[C64]) -> Result<Vec<usize>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let scale = a.iter().map(|e| e.norm()).fold(1.0, f64::max);
    let mut used = vec![false; b.len()];
    let mut pairing = Vec::with_capacity(a.len());
    let mut worst = 0.0_f64;
    for ea in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, eb)| (j, (ea - eb).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("as many candidates as eigenvalues");
        used[j] = true;
        worst = worst.max(d);
        pairing.push(j);
    }
    if worst > SPECTRUM_MATCH_TOL * scale {
        return Err(Error::SpectrumMismatch { residual: worst });
    }
    Ok(pairing)
}

/// `U_R = (γ - kσz)/(γ + k)`, `U_L = (γ + kσz)/(γ - k)`.
pub fn closed_form_maps(k: f64, gamma: f64) -> Result<MomentumMaps> {
    if (k.abs() - gamma.abs()).abs() < 1e-12 {
        return Err(Error::AtExceptionalPoint);
    }
    let u_r = CMatrix::from_real_rows([[(gamma - k) / (gamma + k), 0.0], [0.0, 1.0]]);
    let u_l = CMatrix::from_real_rows([[(gamma + k) / (gamma - k), 0.0], [0.0, 1.0]]);
    Ok(MomentumMaps { k, u_r, u_l })
}

/// Biorthonormal basis of `kσx + iγσy + Δσz` with right vectors scaled to
/// `(k + γ, E_n - Δ)`; index 0 is `-E_k`, index 1 is `+E_k`. In this gauge
/// the maps of [`momentum_maps_from_bases`] coincide with
/// [`closed_form_maps`].
pub fn lz_basis(k: f64, gamma: f64, delta: f64) -> Result<Spectrum> {
    let spec = build_basis(&lz_matrix(k, gamma, delta))?;
    let e = lz_energy(k, gamma, delta);
    let mut ordered = spec.clone();
    for (slot, target) in [-e, e].into_iter().enumerate() {
        let n = (0..2)
            .min_by(|&a, &b| {
                (spec.eigenvalues[a] - target)
                    .norm()
                    .total_cmp(&(spec.eigenvalues[b] - target).norm())
            })
            .expect("two eigenvalues");
        ordered.eigenvalues[slot] = spec.eigenvalues[n];
        ordered.right[slot] = spec.right[n].clone();
        ordered.left[slot] = spec.left[n].clone();
    }
    let scales: Vec<C64> = ordered
        .right
        .iter()
        .map(|r| c64(k + gamma, 0.0) / r[0])
        .collect();
    if scales.iter().any(|s| !s.is_finite()) {
        return Err(Error::AtExceptionalPoint);
    }
    Ok(ordered.regauge(&scales))
}

/// `V = Σ|-k,n⟩⟨k,n|` from the eigenvectors of two Hermitian matrices with
/// equal spectra. Each eigenvector has its first sizeable component made
/// real and positive.
pub fn build_v(hk: &CMatrix, hmk: &CMatrix) -> Result<CMatrix> {
    build_v_with(hk, hmk, 1e-9, SPECTRUM_MATCH_TOL)
}

/// [`build_v`] with explicit relative tolerances on Hermiticity and on the
/// spectrum match, for matrices known only approximately (e.g. finite
/// difference mappings).
pub fn build_v_with(hk: &CMatrix, hmk: &CMatrix, herm_tol: f64, match_tol: f64) -> Result<CMatrix> {
    for h in [hk, hmk] {
        let residual = h.hermitian_residual();
        if residual > herm_tol * h.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
    }
    let (ek, vk) = hermitian_eigen(&hk.hermitian_part());
    let (emk, vmk) = hermitian_eigen(&hmk.hermitian_part());
    let scale = ek.iter().map(|e| e.abs()).fold(1.0, f64::max);
    let worst = ek
        .iter()
        .zip(&emk)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if worst > match_tol * scale {
        return Err(Error::SpectrumMismatch { residual: worst });
    }
    let n = hk.dim();
    let column = |m: &CMatrix, j: usize| {
        let mut v: Vec<C64> = (0..n).map(|i| m[(i, j)]).collect();
        fix_phase(&mut v);
        v
    };
    let mut v = CMatrix::zeros(n);
    for j in 0..n {
        v = &v + &CMatrix::outer(&column(&vmk, j), &column(&vk, j));
    }
    Ok(v)
}

/// The coefficients `φ_x`, `φ_y` with
/// `U_L σz Ψ̂ σz U_R = φ_x σx + φ_y σy + Ψ̂` for the closed-form maps.
pub fn phi_coefficients(k: f64, gamma: f64, bloch: (f64, f64)) -> Result<(C64, C64)> {
    let d = k * k - gamma * gamma;
    if d.abs() < 1e-12 {
        return Err(Error::AtExceptionalPoint);
    }
    let (sx, sy) = bloch;
    let i = c64(0.0, 1.0);
    let phi_x = (c64(gamma * sx, 0.0) - i * k * sy) * (gamma / d);
    let phi_y = (c64(gamma * sy, 0.0) + i * k * sx) * (gamma / d);
    Ok((phi_x, phi_y))
}

fn pure_density(psi: &[C64]) -> CMatrix {
    let n = inner(psi, psi).re;
    CMatrix::outer(psi, psi).scale_re(1.0 / n)
}

/// `‖U_L σz Ψ̂ σz U_R - (φ_x σx + φ_y σy + Ψ̂)‖` for the pure state `psi`.
pub fn phi_identity_residual(k: f64, gamma: f64, psi: &[C64]) -> Result<f64> {
    let maps = closed_form_maps(k, gamma)?;
    let rho = pure_density(psi);
    let b = BlochVector::from_density(&rho)?;
    let (px, py) = phi_coefficients(k, gamma, (b.x, b.y))?;
    let sz = CMatrix::sigma_z();
    let lhs = &(&(&(&maps.u_l * &sz) * &rho) * &sz) * &maps.u_r;
    let rhs = &(&CMatrix::sigma_x().scale(px) + &CMatrix::sigma_y().scale(py)) + &rho;
    Ok((&lhs - &rhs).max_abs())
}

/// `σz Ψ̂ σz` against `½(1 + ⟨σz⟩σz - ⟨σx⟩σx - ⟨σy⟩σy)`.
pub fn mirror_density_residual(psi: &[C64]) -> Result<f64> {
    let rho = pure_density(psi);
    let b = BlochVector::from_density(&rho)?;
    let sz = CMatrix::sigma_z();
    let lhs = &(&sz * &rho) * &sz;
    let rhs = BlochVector::new(-b.x, -b.y, b.z).to_density();
    Ok((&lhs - &rhs).max_abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::X => CMatrix::sigma_x(),
            Pauli::Y => CMatrix::sigma_y(),
            Pauli::Z => CMatrix::sigma_z(),
        }
    }
}

/// Branch `±E_k` of the two-level spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn index(self) -> usize {
        match self {
            Branch::Minus => 0,
            Branch::Plus => 1,
        }
    }
}

/// Tabulated ratio `⟨n_L|U_L F U_R|m⟩_R / ⟨n_L|F|m⟩_R` for the closed-form
/// maps.
pub fn table1_coefficients(f: Pauli, n: Branch, m: Branch, k: f64, gamma: f64, delta: f64) -> Result<C64> {
    let e = lz_energy(k, gamma, delta);
    let one = c64(1.0, 0.0);
    let ratio = |num: C64, den: C64| {
        if den.norm() < 1e-14 {
            Err(Error::DenominatorUnderflow)
        } else {
            Ok(num / den)
        }
    };
    match (f, n == m) {
        (Pauli::Z, _) => Ok(one),
        (Pauli::X, true) => Ok(-one),
        (Pauli::Y, true) => Ok(one),
        (Pauli::X, false) => {
            let (a, b) = (gamma * e + k * delta, gamma * e - k * delta);
            if n == Branch::Plus { ratio(a, b) } else { ratio(b, a) }
        }
        (Pauli::Y, false) => {
            let (a, b) = (gamma * delta + k * e, gamma * delta - k * e);
            if n == Branch::Plus { ratio(a, b) } else { ratio(b, a) }
        }
    }
}

/// Largest relative deviation between the tabulated coefficients and the
/// defining ratio, skipping elements whose denominator `|⟨n_L|F|m⟩_R|` is
/// below `1e-10`.
pub fn table1_residual(k: f64, gamma: f64, delta: f64) -> Result<f64> {
    let basis = lz_basis(k, gamma, delta)?;
    let maps = closed_form_maps(k, gamma)?;
    let mut worst = 0.0_f64;
    for f in Pauli::ALL {
        let fm = f.matrix();
        let mapped = &(&maps.u_l * &fm) * &maps.u_r;
        for n in [Branch::Plus, Branch::Minus] {
            for m in [Branch::Plus, Branch::Minus] {
                let (l, r) = (&basis.left[n.index()], &basis.right[m.index()]);
                let den = fm.sandwich(l, r);
                if den.norm() < 1e-10 {
                    continue;
                }
                let measured = mapped.sandwich(l, r) / den;
                let tabulated = match table1_coefficients(f, n, m, k, gamma, delta) {
                    Ok(c) => c,
                    Err(Error::DenominatorUnderflow) => continue,
                    Err(e) => return Err(e),
                };
                worst = worst.max((measured - tabulated).norm() / tabulated.norm().max(1.0));
            }
        }
    }
    Ok(worst)
}

/// `⟨F⟩_{-k}` assembled in the biorthogonal basis of `H_k` from `φ_x`,
/// `φ_y` and the tabulated coefficients, for the pure state `psi` of mode
/// `k`. Elements with an underflowing table denominator fall back to the
/// mapped matrix element itself.
pub fn mirrored_expectation(f: Pauli, k: f64, gamma: f64, delta: f64, psi: &[C64]) -> Result<f64> {
    let basis = lz_basis(k, gamma, delta)?;
    let maps = closed_form_maps(k, gamma)?;
    let rho = pure_density(psi);
    let b = BlochVector::from_density(&rho)?;
    let (px, py) = phi_coefficients(k, gamma, (b.x, b.y))?;
    let phi = &(&CMatrix::sigma_x().scale(px) + &CMatrix::sigma_y().scale(py)) + &rho;
    let fm = f.matrix();
    let mapped = &(&maps.u_l * &fm) * &maps.u_r;
    let mut total = C64::default();
    for n in [Branch::Plus, Branch::Minus] {
        for m in [Branch::Plus, Branch::Minus] {
            let (ln, rm) = (&basis.left[n.index()], &basis.right[m.index()]);
            let first = phi.sandwich(&basis.left[m.index()], &basis.right[n.index()]);
            let element = match table1_coefficients(f, n, m, k, gamma, delta) {
                Ok(c) if fm.sandwich(ln, rm).norm() >= 1e-10 => c * fm.sandwich(ln, rm),
                Ok(_) | Err(Error::DenominatorUnderflow) => mapped.sandwich(ln, rm),
                Err(e) => return Err(e),
            };
            total += first * element;
        }
    }
    Ok(total.re)
}

/// Metric and division-by-norm Bloch vectors of one momentum mode.
#[derive(Debug, Clone)]
pub struct ModeSeries {
    pub k: f64,
    pub times: Vec<f64>,
    pub metric: Vec<BlochVector>,
    pub metric_norm: Vec<f64>,
    pub nj: Vec<BlochVector>,
    pub nj_norm: Vec<f64>,
    /// `|Ψ(t)⟩` at the sampled times.
    pub states: Vec<Vec<C64>>,
}

/// Checks that `k_grid` is symmetric about zero and avoids `|k| = γ`.
pub fn validate_k_grid(k_grid: &[f64], gamma: f64) -> Result<()> {
    if k_grid.is_empty() {
        return Err(Error::InvalidGrid("empty k grid".into()));
    }
    for &k in k_grid {
        if !k.is_finite() {
            return Err(Error::InvalidGrid(format!("non-finite k = {k}")));
        }
        if (k.abs() - gamma.abs()).abs() < 1e-9 {
            return Err(Error::InvalidGrid(format!("k = {k} sits on |k| = gamma")));
        }
        if !k_grid.iter().any(|&q| (q + k).abs() < 1e-12) {
            return Err(Error::InvalidGrid(format!("k grid lacks -{k}")));
        }
    }
    Ok(())
}

fn run_mode(template: &LZModel, k: f64, grid: TimeGrid, psi0: &[C64], sample_every: usize) -> Result<ModeSeries> {
    let model = template.with_k(k);
    let traj = evolve_metric(&model.hamiltonian_fn(), &CMatrix::identity(2), psi0, grid)?;
    let mut out = ModeSeries {
        k,
        times: Vec::new(),
        metric: Vec::new(),
        metric_norm: Vec::new(),
        nj: Vec::new(),
        nj_norm: Vec::new(),
        states: Vec::new(),
    };
    let last = traj.len() - 1;
    let every = sample_every.max(1);
    for i in (0..traj.len()).filter(|i| i % every == 0 || *i == last) {
        out.times.push(traj.time(i));
        out.metric.push(metric_bloch(&traj, i)?);
        out.metric_norm.push(traj.mapped_norm(i));
        let psi = traj.psi(i);
        let nj = |o: &CMatrix| norm_expectation(psi, o).map_err(|_| Error::NormUnderflow { t: traj.time(i) });
        out.nj.push(BlochVector::new(
            nj(&CMatrix::sigma_x())?,
            nj(&CMatrix::sigma_y())?,
            nj(&CMatrix::sigma_z())?,
        ));
        out.nj_norm.push(inner(psi, psi).re);
        out.states.push(traj.big_psi(i).to_vec());
    }
    Ok(out)
}

/// Bloch vector of `|Ψ(t_i)⟩`.
pub fn metric_bloch(traj: &MetricTrajectory, i: usize) -> Result<BlochVector> {
    Ok(BlochVector::new(
        metric_expectation(traj, &CMatrix::sigma_x(), i)?,
        metric_expectation(traj, &CMatrix::sigma_y(), i)?,
        metric_expectation(traj, &CMatrix::sigma_z(), i)?,
    ))
}

/// Evolves every mode of `k_grid` from `psi0` with `ρ(t0) = 1` and
/// tabulates metric and division-by-norm Bloch vectors every
/// `sample_every` steps (the last step is always kept).
///
/// Modes run concurrently when the `parallel` feature is on; the result is
/// in ascending `k` either way.
pub fn parity_scan(
    template: &LZModel,
    k_grid: &[f64],
    grid: TimeGrid,
    psi0: &[C64],
    sample_every: usize,
) -> Result<Vec<ModeSeries>> {
    validate_k_grid(k_grid, template.gamma(grid.t0))?;
    let mut ks = k_grid.to_vec();
    ks.sort_by(f64::total_cmp);
    ks.dedup();

    #[cfg(feature = "parallel")]
    let modes: Vec<Result<ModeSeries>> = {
        use rayon::prelude::*;
        ks.par_iter()
            .map(|&k| run_mode(template, k, grid, psi0, sample_every))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let modes: Vec<Result<ModeSeries>> = ks
        .iter()
        .map(|&k| run_mode(template, k, grid, psi0, sample_every))
        .collect();

    modes.into_iter().collect()
}

/// Per-`|k|` parity diagnostics of a [`parity_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityEntry {
    pub k: f64,
    /// Max over sampled times of `|⟨σz⟩_k - ⟨σz⟩_{-k}|` (metric).
    pub metric_even_z: f64,
    /// Max over sampled times of `|⟨σx,y⟩_k + ⟨σx,y⟩_{-k}|` (metric).
    pub metric_odd_xy: f64,
    /// Max over sampled times of `‖Ψ_{-k} - σzΨ_k‖`.
    pub state_mirror: f64,
    /// Final-time `|⟨σz⟩_k + ⟨σz⟩_{-k}|` (division by norm).
    pub nj_odd_z: f64,
    /// Final-time `|⟨σz⟩_k - ⟨σz⟩_{-k}|` (division by norm).
    pub nj_even_z: f64,
    /// Final-time `max_±k |⟨σz⟩_nj - ⟨σz⟩_metric|`.
    pub nj_metric_gap: f64,
}

/// Pairs each positive `k` with `-k` and measures the parity residuals.
pub fn parity_report(modes: &[ModeSeries]) -> Vec<ParityEntry> {
    let mut out = Vec::new();
    for plus in modes.iter().filter(|m| m.k > 0.0) {
        let Some(minus) = modes.iter().find(|m| (m.k + plus.k).abs() < 1e-12) else {
            continue;
        };
        let mut entry = ParityEntry {
            k: plus.k,
            metric_even_z: 0.0,
            metric_odd_xy: 0.0,
            state_mirror: 0.0,
            nj_odd_z: 0.0,
            nj_even_z: 0.0,
            nj_metric_gap: 0.0,
        };
        for (i, (a, b)) in plus.metric.iter().zip(&minus.metric).enumerate() {
            entry.metric_even_z = entry.metric_even_z.max((a.z - b.z).abs());
            entry.metric_odd_xy = entry.metric_odd_xy.max((a.x + b.x).abs()).max((a.y + b.y).abs());
            let mirrored = CMatrix::sigma_z().matvec(&plus.states[i]);
            let d: f64 = mirrored
                .iter()
                .zip(&minus.states[i])
                .map(|(p, q)| (p - q).norm_sqr())
                .sum::<f64>()
                .sqrt();
            entry.state_mirror = entry.state_mirror.max(d);
        }
        let (np, nm) = (plus.nj.last().unwrap(), minus.nj.last().unwrap());
        let (mp, mm) = (plus.metric.last().unwrap(), minus.metric.last().unwrap());
        entry.nj_odd_z = (np.z + nm.z).abs();
        entry.nj_even_z = (np.z - nm.z).abs();
        entry.nj_metric_gap = (np.z - mp.z).abs().max((nm.z - mm.z).abs());
        out.push(entry);
    }
    out
}

/// `h_k(t)` for an LZ mode evolved from `psi0` with `ρ(t0) = 1`, via the
/// finite-difference Hermitian mapping at spacing `grid.dt`.
pub fn lz_hermitian_map(model: &LZModel, grid: TimeGrid, psi0: &[C64], t: f64) -> Result<CMatrix> {
    let h = model.hamiltonian_fn();
    let traj = evolve_metric(&h, &CMatrix::identity(2), psi0, grid)?;
    hermitian_map(&traj, &h, t, grid.dt)
}

/// Result of the particle-hole duality check.
#[derive(Debug, Clone, PartialEq)]
pub struct PhsReport {
    /// `‖H + P_R Hᵀ P_R⁻¹‖`.
    pub precondition_residual: f64,
    pub p_l: CMatrix,
    /// `‖H† + P_L (H†)ᵀ P_L⁻¹‖`.
    pub left_residual: f64,
    /// `‖P_L⁻¹ - P_R†‖`.
    pub duality_residual: f64,
}

/// With `H = -P_R Hᵀ P_R⁻¹`, builds `P_L = (P_R†)⁻¹` and checks that it is
/// the left symmetry operator, `H† = -P_L (H†)ᵀ P_L⁻¹`.
pub fn verify_phs_duality(h: &CMatrix, p_r: &CMatrix) -> Result<PhsReport> {
    let tol = 1e-9 * h.frobenius_norm().max(1.0);
    let p_r_inv = p_r.inverse()?;
    let pre = (h + &(&(p_r * &h.transpose()) * &p_r_inv)).max_abs();
    if pre > tol {
        return Err(Error::NotPhSymmetric { residual: pre });
    }
    let p_l = p_r.adjoint().inverse()?;
    let p_l_inv = p_l.inverse()?;
    let hd = h.adjoint();
    let left = (&hd + &(&(&p_l * &hd.transpose()) * &p_l_inv)).max_abs();
    let duality = (&p_l_inv - &p_r.adjoint()).max_abs();
    Ok(PhsReport {
        precondition_residual: pre,
        p_l,
        left_residual: left,
        duality_residual: duality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lz_examples() {
        let m = LZModel::ramp(1.0, 0.0, 0.0);
        assert_eq!(lz_hamiltonian(&m, 3.0), CMatrix::sigma_x());
        let h = lz_matrix(0.5, 1.0, 2.0);
        let s = crate::linalg::eig(&h).unwrap();
        let e = 3.25_f64.sqrt();
        assert!((s.eigenvalues[1] - e).norm() < 1e-12 && (s.eigenvalues[0] + e).norm() < 1e-12);
        let s = crate::linalg::eig(&lz_matrix(0.5, 1.0, 0.3)).unwrap();
        assert!(s.eigenvalues.iter().all(|z| z.re.abs() < 1e-12 && z.im.abs() > 0.1));
        let direct = &(&CMatrix::sigma_x().scale_re(0.5) + &CMatrix::sigma_y().scale(c64(0.0, 1.0)))
            + &CMatrix::sigma_z().scale_re(2.0);
        assert_eq!(h, direct);
    }

    #[test]
    fn maps_at_zero_momentum_are_trivial() {
        let h = lz_matrix(0.0, 1.0, 2.0);
        let maps = build_momentum_maps(0.0, &h, &h).unwrap();
        assert!((&maps.u_r - &CMatrix::identity(2)).max_abs() < 1e-12);
        assert!((&maps.u_l - &CMatrix::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn constructed_maps_match_closed_form_in_lz_gauge() {
        let (k, gamma) = (0.5, 1.0);
        for delta in [0.3, 2.0, -1.1] {
            let bk = lz_basis(k, gamma, delta).unwrap();
            let bmk = lz_basis(-k, gamma, delta).unwrap();
            let built = momentum_maps_from_bases(k, &bk, &bmk).unwrap();
            let closed = closed_form_maps(k, gamma).unwrap();
            assert!((&built.u_r - &closed.u_r).max_abs() < 1e-10, "delta {delta}");
            assert!((&built.u_l - &closed.u_l).max_abs() < 1e-10);
            let expected = CMatrix::from_real_rows([[1.0 / 3.0, 0.0], [0.0, 1.0]]);
            assert!((&closed.u_r - &expected).max_abs() < 1e-15);
            let (hk, hmk) = (lz_matrix(k, gamma, delta), lz_matrix(-k, gamma, delta));
            assert!(closed.conjugation_residual(&hk, &hmk) <= 1e-9);
            assert!(closed.pseudo_unitarity_residual() <= 1e-10);
        }
    }

    #[test]
    fn default_gauge_maps_conjugate() {
        for (k, delta) in [(0.5, 0.3), (1.5, -0.7), (0.25, 2.0)] {
            let (hk, hmk) = (lz_matrix(k, 1.0, delta), lz_matrix(-k, 1.0, delta));
            let maps = build_momentum_maps(k, &hk, &hmk).unwrap();
            assert!(maps.conjugation_residual(&hk, &hmk) <= 1e-9);
            assert!(maps.pseudo_unitarity_residual() <= 1e-10);
        }
        let r = build_momentum_maps(0.5, &lz_matrix(0.5, 1.0, 0.3), &lz_matrix(0.5, 1.0, 0.9));
        assert!(matches!(r, Err(Error::SpectrumMismatch { .. })));
    }

    #[test]
    fn v_for_hermitian_pairs() {
        let hk = lz_matrix(0.7, 0.0, 0.4);
        let hmk = &(&CMatrix::sigma_z() * &hk) * &CMatrix::sigma_z();
        let v = build_v(&hk, &hmk).unwrap();
        assert!((&v - &CMatrix::sigma_z()).max_abs() < 1e-10);
        let back = &(&v * &hk) * &v.adjoint();
        assert!((&back - &hmk).max_abs() <= 1e-9);
        let same = build_v(&hk, &hk).unwrap();
        assert!(same.commutator(&hk).max_abs() < 1e-10);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_coefficients(0.5, 1.0, (0.0, 0.0)).unwrap(), (c64(0.0, 0.0), c64(0.0, 0.0)));
        let (a, b) = phi_coefficients(0.5, 0.0, (0.3, 0.4)).unwrap();
        assert!(a.norm() == 0.0 && b.norm() == 0.0);
        assert!(phi_coefficients(1.0, 1.0, (0.3, 0.4)).is_err());
        let psi = [c64(0.3, -0.5), c64(0.8, 0.1)];
        assert!(phi_identity_residual(0.5, 1.0, &psi).unwrap() <= 1e-9);
        assert!(mirror_density_residual(&psi).unwrap() <= 1e-12);
    }

    #[test]
    fn table1_examples() {
        let (k, g, d) = (0.5, 1.0, 0.7);
        for n in [Branch::Plus, Branch::Minus] {
            for m in [Branch::Plus, Branch::Minus] {
                assert_eq!(table1_coefficients(Pauli::Z, n, m, k, g, d).unwrap(), c64(1.0, 0.0));
            }
        }
        assert_eq!(table1_coefficients(Pauli::X, Branch::Plus, Branch::Plus, k, g, d).unwrap(), c64(-1.0, 0.0));
        let e = lz_energy(k, g, d);
        let y = table1_coefficients(Pauli::Y, Branch::Plus, Branch::Minus, k, g, d).unwrap();
        assert!((y - (g * d + k * e) / (g * d - k * e)).norm() < 1e-15);
        for (k, d) in [(0.5, 0.7), (0.5, 2.0), (1.5, 0.3), (0.3, 0.1), (-0.75, -1.2)] {
            assert!(table1_residual(k, 1.0, d).unwrap() <= 1e-8, "k {k} delta {d}");
        }
    }

    #[test]
    fn mirrored_expectation_matches_direct() {
        let psi = [c64(0.6, 0.2), c64(-0.3, 0.7)];
        let rho = pure_density(&psi);
        let sz = CMatrix::sigma_z();
        let mirrored = &(&sz * &rho) * &sz;
        for (k, d) in [(0.5, 0.7), (1.5, 0.3), (0.25, -2.0)] {
            for f in Pauli::ALL {
                let via = mirrored_expectation(f, k, 1.0, d, &psi).unwrap();
                let direct = (&mirrored * &f.matrix()).trace().re;
                assert!((via - direct).abs() <= 1e-8, "{f:?} k {k}: {via} vs {direct}");
            }
            let z = mirrored_expectation(Pauli::Z, k, 1.0, d, &psi).unwrap();
            assert!((z - (&rho * &sz).trace().re).abs() <= 1e-8);
        }
    }

    #[test]
    fn phs_duality() {
        let h = lz_matrix(0.5, 1.0, 0.8);
        let rep = verify_phs_duality(&h, &CMatrix::sigma_y()).unwrap();
        assert!(rep.precondition_residual < 1e-12);
        assert!(rep.left_residual < 1e-12 && rep.duality_residual < 1e-12);
        assert!((&rep.p_l - &CMatrix::sigma_y()).max_abs() < 1e-15);
        assert!(matches!(
            verify_phs_duality(&h, &CMatrix::sigma_x()),
            Err(Error::NotPhSymmetric { .. })
        ));
        let random = CMatrix::from_rows([[c64(0.3, 0.1), c64(1.2, 0.0)], [c64(-0.4, 0.5), c64(0.9, -0.2)]]);
        assert!(verify_phs_duality(&random, &CMatrix::sigma_y()).is_err());
    }

    #[test]
    fn k_grid_validation() {
        assert!(validate_k_grid(&[-0.5, 0.5, 0.25, -0.25], 1.0).is_ok());
        assert!(validate_k_grid(&[-0.5, 0.25], 1.0).is_err());
        assert!(validate_k_grid(&[-1.0, 1.0], 1.0).is_err());
        assert!(validate_k_grid(&[], 1.0).is_err());
    }

    #[test]
    fn short_scan_metric_parity() {
        let template = LZModel::ramp(0.0, 1.0, 1.0);
        let grid = TimeGrid::new(-4.0, 4.0, 1e-3).unwrap();
        let psi0 = [c64(1.0, 0.0), c64(0.0, 0.0)];
        let modes = parity_scan(&template, &[0.5, -0.5, 1.5, -1.5], grid, &psi0, 50).unwrap();
        assert_eq!(modes.iter().map(|m| m.k).collect::<Vec<_>>(), vec![-1.5, -0.5, 0.5, 1.5]);
        for e in parity_report(&modes) {
            assert!(e.metric_even_z <= 1e-6 && e.metric_odd_xy <= 1e-6, "{e:?}");
            assert!(e.state_mirror <= 1e-8, "{e:?}");
        }
    }

    #[test]
    fn v_is_sigma_z_for_lz_hermitian_maps() {
        let grid = TimeGrid::new(-4.0, 1.0, 1e-3).unwrap();
        let psi0 = [c64(1.0, 0.0), c64(0.0, 0.0)];
        for k in [0.5, 1.5] {
            let m = LZModel::ramp(k, 1.0, 1.0);
            for t in [-2.0, 0.5] {
                let hk = lz_hermitian_map(&m, grid, &psi0, t).unwrap();
                let hmk = lz_hermitian_map(&m.with_k(-k), grid, &psi0, t).unwrap();
                let v = build_v_with(&hk, &hmk, 1e-5, 1e-5).unwrap();
                assert!((&v - &CMatrix::sigma_z()).max_abs() <= 1e-5, "k {k} t {t}: {v:?}");
            }
        }
    }
}
