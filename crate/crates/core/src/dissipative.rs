//! Lindblad master equation, its no-jump limit and the closed forms of the
//! two-level decay models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{rk4_step, HamiltonianFn, TimeGrid};
use crate::linalg::{c64, inner, min_hermitian_eigenvalue, normalized, CMatrix, C64};

/// Eigenvalue floor below which a master-equation state counts as
/// non-positive.
pub const ME_POSITIVITY_FLOOR: f64 = -1e-8;

/// No-jump traces at or below this are treated as fully decayed.
pub const NJ_TRACE_FLOOR: f64 = 1e-14;

/// Hermitian system Hamiltonian plus time-independent jump operators.
#[derive(Debug, Clone)]
pub struct DissipativeModel {
    pub h: HamiltonianFn,
    pub jumps: Vec<CMatrix>,
    pub omega: f64,
    pub gamma: f64,
}

/// `Γ = √γ(σx - iσy)`, which sends the excited state `(1, 0)` to twice the
/// ground state `(0, 1)`.
pub fn decay_operator(gamma: f64) -> CMatrix {
    let s = gamma.sqrt();
    CMatrix::from_real_rows([[0.0, 0.0], [2.0 * s, 0.0]])
}

impl DissipativeModel {
    pub fn new(h: HamiltonianFn, jumps: Vec<CMatrix>, omega: f64, gamma: f64) -> Result<Self> {
        let h0 = h.at(0.0);
        let residual = h0.hermitian_residual();
        if residual > 1e-12 * h0.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        for j in &jumps {
            if j.dim() != h.dim() {
                return Err(Error::DimensionMismatch {
                    expected: h.dim(),
                    found: j.dim(),
                });
            }
        }
        Ok(DissipativeModel {
            h,
            jumps,
            omega,
            gamma,
        })
    }

    /// `H = ωσz` decaying through [`decay_operator`].
    pub fn model_a(omega: f64, gamma: f64) -> Self {
        DissipativeModel {
            h: HamiltonianFn::constant(CMatrix::sigma_z().scale_re(omega)),
            jumps: vec![decay_operator(gamma)],
            omega,
            gamma,
        }
    }

    /// `H = ωσx` decaying through [`decay_operator`].
    pub fn model_b(omega: f64, gamma: f64) -> Self {
        DissipativeModel {
            h: HamiltonianFn::constant(CMatrix::sigma_x().scale_re(omega)),
            jumps: vec![decay_operator(gamma)],
            omega,
            gamma,
        }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    fn decay_sum(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim());
        for j in &self.jumps {
            acc = &acc + &(&j.adjoint() * j);
        }
        acc
    }

    /// `H - (i/2)ΣΓ†Γ`, trace part included.
    pub fn effective_hamiltonian(&self, t: f64) -> CMatrix {
        &self.h.at(t) - &self.decay_sum().scale(c64(0.0, 0.5))
    }

    pub fn effective_fn(&self) -> HamiltonianFn {
        let decay = self.decay_sum().scale(c64(0.0, 0.5));
        let h = self.h.clone();
        HamiltonianFn::new(self.dim(), move |t| &h.at(t) - &decay)
    }

    /// `-i[H, ρ] + Σ(ΓρΓ† - ½{ρ, Γ†Γ})`.
    pub fn lindblad_rhs(&self, t: f64, rho: &CMatrix) -> Result<CMatrix> {
        self.check_dim(rho)?;
        let mut out = self.h.at(t).commutator(rho).scale(c64(0.0, -1.0));
        for j in &self.jumps {
            let jd = j.adjoint();
            let recycle = &(j * rho) * &jd;
            let loss = rho.anticommutator(&(&jd * j)).scale_re(0.5);
            out = &out + &(&recycle - &loss);
        }
        Ok(out)
    }

    /// `-i(H_eff ρ - ρ H_eff†)`: the master equation without the jump term.
    pub fn nojump_rhs(&self, t: f64, rho: &CMatrix) -> Result<CMatrix> {
        self.check_dim(rho)?;
        let heff = self.effective_hamiltonian(t);
        let d = &(&heff * rho) - &(rho * &heff.adjoint());
        Ok(d.scale(c64(0.0, -1.0)))
    }

    fn check_dim(&self, rho: &CMatrix) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    FullMe,
    NoJump,
}

/// Density matrices on a time grid.
#[derive(Debug, Clone)]
pub struct DensityTrajectory {
    pub grid: TimeGrid,
    pub kind: DensityKind,
    pub rho: Vec<CMatrix>,
}

impl DensityTrajectory {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.grid.time(i)
    }

    pub fn trace(&self, i: usize) -> f64 {
        self.rho[i].trace().re
    }
}

fn check_density(rho0: &CMatrix) -> Result<()> {
    let residual = rho0.hermitian_residual();
    if residual > 1e-10 {
        return Err(Error::NotHermitian { residual });
    }
    let min = min_hermitian_eigenvalue(rho0);
    if min < ME_POSITIVITY_FLOOR {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    Ok(())
}

fn evolve_density(
    model: &DissipativeModel,
    rho0: &CMatrix,
    grid: TimeGrid,
    kind: DensityKind,
) -> Result<DensityTrajectory> {
    model.check_dim(rho0)?;
    check_density(rho0)?;
    let rhs = |t: f64, r: &CMatrix| match kind {
        DensityKind::FullMe => model.lindblad_rhs(t, r),
        DensityKind::NoJump => model.nojump_rhs(t, r),
    }
    .expect("dimension checked above");
    let mut rho = Vec::with_capacity(grid.len());
    rho.push(rho0.clone());
    for i in 0..grid.steps() {
        let t = grid.time(i);
        let next = rk4_step(rhs, t, &rho[i], grid.time(i + 1) - t).hermitian_part();
        if !next.is_finite() {
            return Err(Error::NonFinite);
        }
        if kind == DensityKind::FullMe && min_hermitian_eigenvalue(&next) < ME_POSITIVITY_FLOOR {
            return Err(Error::PositivityLost {
                t: grid.time(i + 1),
            });
        }
        rho.push(next);
    }
    Ok(DensityTrajectory { grid, kind, rho })
}

/// Full Lindblad evolution with fixed-step RK4.
pub fn evolve_me(model: &DissipativeModel, rho0: &CMatrix, grid: TimeGrid) -> Result<DensityTrajectory> {
    evolve_density(model, rho0, grid, DensityKind::FullMe)
}

/// No-jump evolution; the trace decays.
pub fn evolve_nojump(
    model: &DissipativeModel,
    rho0: &CMatrix,
    grid: TimeGrid,
) -> Result<DensityTrajectory> {
    evolve_density(model, rho0, grid, DensityKind::NoJump)
}

/// `Tr(ρO)/Tr(ρ)`.
pub fn nj_expectation(traj: &DensityTrajectory, o: &CMatrix, i: usize) -> Result<f64> {
    let tr = traj.trace(i);
    if tr <= NJ_TRACE_FLOOR {
        return Err(Error::NormUnderflow { t: traj.time(i) });
    }
    Ok((&traj.rho[i] * o).trace().re / tr)
}

/// `Tr(ρO)` for a trace-one state.
pub fn me_expectation(traj: &DensityTrajectory, o: &CMatrix, i: usize) -> f64 {
    (&traj.rho[i] * o).trace().re
}

/// Division by norm, `⟨ψ|O|ψ⟩/⟨ψ|ψ⟩`.
pub fn norm_expectation(psi: &[C64], o: &CMatrix) -> Result<f64> {
    let n = inner(psi, psi).re;
    if n <= NJ_TRACE_FLOOR {
        return Err(Error::NormUnderflow { t: f64::NAN });
    }
    Ok(o.sandwich(psi, psi).re / n)
}

/// Real Bloch vector `r` of `½(1 + r·σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    /// Bloch vector of `ρ/Tr ρ`.
    pub fn from_density(rho: &CMatrix) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: rho.dim(),
            });
        }
        let tr = rho.trace().re;
        if tr <= NJ_TRACE_FLOOR {
            return Err(Error::NormUnderflow { t: f64::NAN });
        }
        let [sx, sy, sz] = CMatrix::paulis();
        let c = |s: &CMatrix| (rho * s).trace().re / tr;
        Ok(BlochVector::new(c(&sx), c(&sy), c(&sz)))
    }

    pub fn from_state(psi: &[C64]) -> Result<Self> {
        let v = normalized(psi)?;
        BlochVector::from_density(&CMatrix::outer(&v, &v))
    }

    /// `½(1 + r·σ)`.
    pub fn to_density(&self) -> CMatrix {
        CMatrix::from_rows([
            [c64(0.5 * (1.0 + self.z), 0.0), c64(0.5 * self.x, -0.5 * self.y)],
            [c64(0.5 * self.x, 0.5 * self.y), c64(0.5 * (1.0 - self.z), 0.0)],
        ])
    }

    /// A state vector with this Bloch vector; requires `|r| = 1`.
    pub fn to_state(&self) -> Result<Vec<C64>> {
        if (self.length() - 1.0).abs() > 1e-10 {
            return Err(Error::UnsupportedInitialState);
        }
        // ρ₁₀ = a b* = (x - iy)/2; put the phase on the smaller amplitude so
        // that the poles come out exact
        let off = c64(self.x, -self.y) * 0.5;
        if self.z >= 0.0 {
            let a = (0.5 * (1.0 + self.z)).sqrt();
            Ok(vec![c64(a, 0.0), off.conj() / a])
        } else {
            let b = (0.5 * (1.0 - self.z)).sqrt();
            Ok(vec![off / b, c64(b, 0.0)])
        }
    }

    pub fn length(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn as_tuple(&self) -> (f64, f64, f64) {
        (self.x, self.y, self.z)
    }
}

/// Steady state of the Lindblad dynamics of `H = ωσx` with [`decay_operator`].
pub fn steady_state_model_b(omega: f64, gamma: f64) -> BlochVector {
    let d = 2.0 * gamma * gamma + omega * omega;
    BlochVector::new(0.0, 2.0 * gamma * omega / d, -2.0 * gamma * gamma / d)
}

/// Long-time no-jump Bloch vector of model B in the PT-broken regime.
pub fn nojump_asymptotics_model_b(omega: f64, gamma: f64) -> Result<BlochVector> {
    if gamma * gamma <= omega * omega {
        return Err(Error::NotPtBroken);
    }
    Ok(BlochVector::new(
        0.0,
        omega / gamma,
        -(gamma * gamma - omega * omega).sqrt() / gamma,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Me,
    Nj,
    Metric,
}

/// Initial states of model A with known closed-form dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelAInitial {
    Ground,
    Excited,
    /// `(|0⟩ - |1⟩)/√2`.
    Superposition,
}

impl ModelAInitial {
    pub fn state(&self) -> Vec<C64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            ModelAInitial::Ground => vec![c64(0.0, 0.0), c64(1.0, 0.0)],
            ModelAInitial::Excited => vec![c64(1.0, 0.0), c64(0.0, 0.0)],
            ModelAInitial::Superposition => vec![c64(-r, 0.0), c64(r, 0.0)],
        }
    }

    /// Matches `psi` against the three cases up to normalisation and a
    /// global phase.
    pub fn identify(psi: &[C64]) -> Result<Self> {
        if psi.len() != 2 {
            return Err(Error::UnsupportedInitialState);
        }
        let v = normalized(psi)?;
        for case in [ModelAInitial::Ground, ModelAInitial::Excited, ModelAInitial::Superposition] {
            if (inner(&case.state(), &v).norm() - 1.0).abs() < 1e-10 {
                return Ok(case);
            }
        }
        Err(Error::UnsupportedInitialState)
    }
}

/// Closed-form `⟨O⟩(t)` for model A, `H = ωσz` with [`decay_operator`].
pub fn closed_form_model_a(
    method: Method,
    o: &CMatrix,
    psi0: &[C64],
    omega: f64,
    gamma: f64,
    t: f64,
) -> Result<f64> {
    if o.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: o.dim(),
        });
    }
    // |1⟩ is the first basis vector, |0⟩ the second
    let o11 = o[(0, 0)].re;
    let o00 = o[(1, 1)].re;
    let o10 = o[(0, 1)];
    let half_tr = 0.5 * (o00 + o11);
    let fast = (-4.0 * gamma * t).exp();
    let slow = (-2.0 * gamma * t).exp();
    let (c, s) = ((2.0 * omega * t).cos(), (2.0 * omega * t).sin());
    let oscillation = -c * o10.re + s * o10.im;
    let value = match (ModelAInitial::identify(psi0)?, method) {
        (ModelAInitial::Ground, _) => o00,
        (ModelAInitial::Excited, Method::Metric | Method::Nj) => o11,
        (ModelAInitial::Excited, Method::Me) => o00 * (1.0 - fast) + fast * o11,
        (ModelAInitial::Superposition, Method::Metric) => half_tr + oscillation,
        (ModelAInitial::Superposition, Method::Me) => {
            half_tr + slow * oscillation + 0.5 * (fast - 1.0) * (o11 - o00)
        }
        (ModelAInitial::Superposition, Method::Nj) => {
            let w = 1.0 + fast;
            half_tr + 2.0 * slow * oscillation / w + (fast - 1.0) / (2.0 * w) * (o11 - o00)
        }
    };
    Ok(value)
}

/// Residual of `⟨O⟩_me - ½TrO = (⟨O⟩_metric - ½TrO)e^{-2γt} +
/// ½(e^{-4γt} - 1)(⟨1|O|1⟩ - ⟨0|O|0⟩)` for the superposition start.
pub fn model_a_relation_residual(o: &CMatrix, omega: f64, gamma: f64, t: f64) -> Result<f64> {
    let psi = ModelAInitial::Superposition.state();
    let me = closed_form_model_a(Method::Me, o, &psi, omega, gamma, t)?;
    let metric = closed_form_model_a(Method::Metric, o, &psi, omega, gamma, t)?;
    let half_tr = 0.5 * o.trace().re;
    let rhs = (metric - half_tr) * (-2.0 * gamma * t).exp()
        + 0.5 * ((-4.0 * gamma * t).exp() - 1.0) * (o[(0, 0)].re - o[(1, 1)].re);
    Ok((me - half_tr - rhs).abs())
}
