//! Time-dependent metric `ρ(t)`, the Hermitian mapping `h(t)` and metric
//! expectation values.

use crate::error::{Error, Result};
use crate::integrate::{rk4_step, schrodinger_step_matrix, HamiltonianFn, TimeGrid};
use crate::linalg::{
    c64, herm_sqrt, min_hermitian_eigenvalue, norm, polar_unitary, CMatrix, PauliCoeffs, C64,
};

/// A stored `ρ(t_i)` with `λ_min < -POSITIVITY_FLOOR·λ_max` is reported as
/// [`Error::PositivityLost`].
pub const POSITIVITY_FLOOR: f64 = 1e-8;

/// `ρ̇ = -i(H†ρ - ρH)`.
pub fn metric_rhs(h: &CMatrix, rho: &CMatrix) -> Result<CMatrix> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: rho.dim(),
        });
    }
    let diff = &(&h.adjoint() * rho) - &(rho * h);
    Ok(diff.scale(c64(0.0, -1.0)))
}

/// Jointly integrated metric and state.
///
/// Alongside `ρ` and `ψ` the trajectory keeps `|Ψ⟩ = η|ψ⟩`, computed from
/// the accumulated RK4 propagator `U` rather than by multiplying `η` into
/// `ψ`. Because `ηU η0⁻¹` is unitary, `Ψ(t) = Q η0 ψ0` where `Q` is the
/// unitary polar factor of `U η0⁻¹`; this stays accurate when `ρ` becomes
/// exponentially ill-conditioned.
#[derive(Debug, Clone)]
pub struct MetricTrajectory {
    grid: TimeGrid,
    rho: Vec<CMatrix>,
    psi: Vec<Vec<C64>>,
    big_psi: Vec<Vec<C64>>,
}

impl MetricTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.grid.time(i)
    }

    pub fn rho(&self, i: usize) -> &CMatrix {
        &self.rho[i]
    }

    pub fn psi(&self, i: usize) -> &[C64] {
        &self.psi[i]
    }

    pub fn big_psi(&self, i: usize) -> &[C64] {
        &self.big_psi[i]
    }

    /// `η(t_i) = √ρ(t_i)`. Fails once `ρ` is too ill-conditioned to have a
    /// representable positive-definite root.
    pub fn eta(&self, i: usize) -> Result<CMatrix> {
        herm_sqrt(&self.rho[i])
    }

    /// `⟨ψ|ρ|ψ⟩`, conserved by the exact dynamics.
    pub fn norm(&self, i: usize) -> f64 {
        self.rho[i].sandwich(&self.psi[i], &self.psi[i]).re
    }

    /// `⟨Ψ|Ψ⟩`, the same quantity evaluated on the stable state.
    pub fn mapped_norm(&self, i: usize) -> f64 {
        norm(&self.big_psi[i]).powi(2)
    }
}

/// Integrates `ρ̇ = -i(H†ρ - ρH)` and `ψ̇ = -iHψ` with fixed-step RK4.
///
/// `ρ` is re-Hermitised after every step.
pub fn evolve_metric(
    h: &HamiltonianFn,
    rho0: &CMatrix,
    psi0: &[C64],
    grid: TimeGrid,
) -> Result<MetricTrajectory> {
    let dim = h.dim();
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho0.dim(),
        });
    }
    if psi0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi0.len(),
        });
    }
    let eta0 = herm_sqrt(rho0)?;
    let eta0_inv = eta0.inverse()?;
    let eta0_det = eta0.det();
    let mapped0 = eta0.matvec(psi0);

    let n = grid.len();
    let mut rho = Vec::with_capacity(n);
    let mut psi = Vec::with_capacity(n);
    let mut big_psi = Vec::with_capacity(n);
    rho.push(rho0.clone());
    psi.push(psi0.to_vec());
    big_psi.push(mapped0.clone());

    let mut u = CMatrix::identity(dim);
    let mut log_det = C64::default();
    for i in 0..grid.steps() {
        let t = grid.time(i);
        let dt = grid.time(i + 1) - t;
        let step = schrodinger_step_matrix(h, t, dt);
        log_det += step.det().ln();
        u = &step * &u;
        psi.push(step.matvec(&psi[i]));

        let next = rk4_step(
            |s, r: &CMatrix| metric_rhs(&h.at(s), r).expect("dimension checked above"),
            t,
            &rho[i],
            dt,
        )
        .hermitian_part();
        if !next.is_finite() {
            return Err(Error::NonFinite);
        }
        check_positive(&next, grid.time(i + 1))?;
        rho.push(next);

        let a = &u * &eta0_inv;
        let q = polar_unitary(&a, Some(log_det.exp() / eta0_det))?;
        big_psi.push(q.matvec(&mapped0));
    }
    Ok(MetricTrajectory {
        grid,
        rho,
        psi,
        big_psi,
    })
}

fn check_positive(rho: &CMatrix, t: f64) -> Result<()> {
    let lo = min_hermitian_eigenvalue(rho);
    let hi = rho.frobenius_norm();
    if lo < -POSITIVITY_FLOOR * hi || lo.is_nan() {
        return Err(Error::PositivityLost { t });
    }
    Ok(())
}

fn check_observable(o: &CMatrix) -> Result<()> {
    let residual = o.hermitian_residual();
    if residual > 1e-10 * o.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitianObservable { residual });
    }
    Ok(())
}

/// `⟨Ψ(t_i)|O|Ψ(t_i)⟩`.
pub fn metric_expectation(traj: &MetricTrajectory, o: &CMatrix, i: usize) -> Result<f64> {
    check_observable(o)?;
    let v = traj.big_psi(i);
    Ok(o.sandwich(v, v).re)
}

/// `⟨ψ|ρ·(η⁻¹Oη)|ψ⟩`, the second form of the metric expectation value.
/// Only usable while `η` is well conditioned.
pub fn metric_expectation_via_rho(traj: &MetricTrajectory, o: &CMatrix, i: usize) -> Result<C64> {
    check_observable(o)?;
    let eta = traj.eta(i)?;
    let mapped = &(&eta.inverse()? * o) * &eta;
    let psi = traj.psi(i);
    Ok((traj.rho(i) * &mapped).sandwich(psi, psi))
}

/// `h(t) = ηHη⁻¹ + iη̇η⁻¹` with `η̇` from finite differences of stored
/// metrics at spacing `delta` (a multiple of the grid step).
///
/// Central differences are used in the interior; at either end of the grid
/// a second-order one-sided stencil takes over.
pub fn hermitian_map(
    traj: &MetricTrajectory,
    h: &HamiltonianFn,
    t: f64,
    delta: f64,
) -> Result<CMatrix> {
    let grid = traj.grid();
    let i = grid.index_of(t).ok_or(Error::OffGrid { t })?;
    let ratio = delta / grid.dt;
    let stride = ratio.round();
    if stride < 1.0 || (ratio - stride).abs() > 1e-6 {
        return Err(Error::InvalidGrid(format!(
            "delta = {delta} is not a positive multiple of dt = {}",
            grid.dt
        )));
    }
    let s = stride as usize;
    let last = traj.len() - 1;
    if 2 * s > last {
        return Err(Error::InvalidGrid(format!("delta = {delta} exceeds the grid span")));
    }
    let eta_at = |j: usize| traj.eta(j);
    let eta_dot = if i >= s && i + s <= last {
        (&eta_at(i + s)? - &eta_at(i - s)?).scale_re(0.5 / delta)
    } else if i < s {
        let sum = &(&eta_at(i + s)?.scale_re(4.0) - &eta_at(i)?.scale_re(3.0)) - &eta_at(i + 2 * s)?;
        sum.scale_re(0.5 / delta)
    } else {
        let sum = &(&eta_at(i)?.scale_re(3.0) - &eta_at(i - s)?.scale_re(4.0)) + &eta_at(i - 2 * s)?;
        sum.scale_re(0.5 / delta)
    };
    let eta = eta_at(i)?;
    let eta_inv = eta.inverse()?;
    let hermitian = &(&(&eta * &h.at(t)) * &eta_inv) + &(&eta_dot * &eta_inv).scale(c64(0.0, 1.0));
    Ok(hermitian)
}

/// `ρ(t) = cosh(2γt)·1 + sinh(2γt)·σz`, the metric for `H = (ω - iγ)σz`
/// with `ρ(0) = 1`.
pub fn metric_model_a_analytic(gamma: f64, t: f64) -> CMatrix {
    let x = 2.0 * gamma * t;
    PauliCoeffs::new(c64(x.cosh(), 0.0), C64::default(), C64::default(), c64(x.sinh(), 0.0))
        .compose()
}

/// Closed-form metric for `H = ωσx - iγσz` with `ρ(0) = 1`.
///
/// Written as `ρ = (1 + 2γ²S₂)·1 - 2γωS₂·σy + γS_c·σz` with
/// `S₂ = sin²(√s t)/s`, `S_c = sin(2√s t)/√s`, `s = ω² - γ²`; hyperbolic
/// functions take over for `s < 0`. At `ω = γ` use
/// [`metric_model_b_exceptional`].
pub fn metric_model_b_analytic(omega: f64, gamma: f64, t: f64) -> Result<CMatrix> {
    if (omega - gamma).abs() < 1e-10 {
        return Err(Error::AtExceptionalPoint);
    }
    let s = omega * omega - gamma * gamma;
    let (s2, sc) = if s > 0.0 {
        let r = s.sqrt();
        ((r * t).sin().powi(2) / s, (2.0 * r * t).sin() / r)
    } else {
        let r = (-s).sqrt();
        ((r * t).sinh().powi(2) / -s, (2.0 * r * t).sinh() / r)
    };
    Ok(model_b_from_parts(omega, gamma, s2, sc))
}

/// The `ω → γ` limit of [`metric_model_b_analytic`]: `S₂ = t²`, `S_c = 2t`,
/// giving `ρ = (1 + 2γ²t²)·1 - 2γωt²·σy + 2γt·σz`.
pub fn metric_model_b_exceptional(omega: f64, gamma: f64, t: f64) -> CMatrix {
    model_b_from_parts(omega, gamma, t * t, 2.0 * t)
}

fn model_b_from_parts(omega: f64, gamma: f64, s2: f64, sc: f64) -> CMatrix {
    PauliCoeffs::new(
        c64(1.0 + 2.0 * gamma * gamma * s2, 0.0),
        C64::default(),
        c64(-2.0 * gamma * omega * s2, 0.0),
        c64(gamma * sc, 0.0),
    )
    .compose()
}

/// Long-time limits of the metric Bloch components for `H = ωσx - iγσz`
/// in the PT-broken regime, from the initial Bloch vector `(x0, y0, z0)`.
pub fn metric_asymptotics_model_b(
    omega: f64,
    gamma: f64,
    bloch0: (f64, f64, f64),
) -> Result<(f64, f64, f64)> {
    let (x0, y0, z0) = bloch0;
    let g2 = gamma * gamma;
    let w2 = omega * omega;
    if g2 <= w2 {
        return Err(Error::NotPtBroken);
    }
    let kappa = (g2 - w2).sqrt();
    let y = (-2.0 * omega * kappa * z0 + (g2 - 2.0 * w2) * y0) / g2;
    let z = (2.0 * omega * kappa * y0 + (g2 - 2.0 * w2) * z0) / g2;
    Ok((x0, y, z))
}

/// The closed-form Hermitian mapping `(2ω + 2γρ_y/(1 + ρ_0))·σx` built from
/// the model B metric. Kept for comparison with [`hermitian_map`]: at `t = 0`
/// it gives `2ωσx` whereas the definition gives `ωσx`.
pub fn closed_form_hermitian_map_model_b(omega: f64, gamma: f64, t: f64) -> Result<CMatrix> {
    let rho = metric_model_b_analytic(omega, gamma, t)?;
    let p = PauliCoeffs::decompose(&rho)?;
    let coeff = 2.0 * omega + 2.0 * gamma * p.ay.re / (1.0 + p.a0.re);
    Ok(CMatrix::sigma_x().scale_re(coeff))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_a(omega: f64, gamma: f64) -> HamiltonianFn {
        HamiltonianFn::constant(CMatrix::sigma_z().scale(c64(omega, -gamma)))
    }

    fn model_b(omega: f64, gamma: f64) -> HamiltonianFn {
        HamiltonianFn::constant(
            &CMatrix::sigma_x().scale_re(omega) - &CMatrix::sigma_z().scale(c64(0.0, gamma)),
        )
    }

    fn ket(a: f64, b: f64) -> Vec<C64> {
        vec![c64(a, 0.0), c64(b, 0.0)]
    }

    #[test]
    fn rhs_examples() {
        let id = CMatrix::identity(2);
        assert_eq!(metric_rhs(&CMatrix::sigma_x(), &id).unwrap(), CMatrix::zeros(2));
        let expected = CMatrix::sigma_z().scale_re(1.0);
        let r = metric_rhs(&model_a(1.0, 0.5).at(0.0), &id).unwrap();
        assert!((&r - &expected).max_abs() < 1e-15);
        let r = metric_rhs(&model_b(1.0, 0.5).at(0.0), &id).unwrap();
        assert!((&r - &expected).max_abs() < 1e-15);
        assert!(metric_rhs(&CMatrix::identity(3), &id).is_err());
    }

    #[test]
    fn model_a_metric_at_one() {
        let grid = TimeGrid::new(0.0, 1.0, 1e-3).unwrap();
        let traj = evolve_metric(&model_a(1.0, 0.5), &CMatrix::identity(2), &ket(1.0, 0.0), grid)
            .unwrap();
        let end = traj.rho(traj.len() - 1);
        let e = std::f64::consts::E;
        assert!((end[(0, 0)].re - e).abs() < 1e-10);
        assert!((end[(1, 1)].re - 1.0 / e).abs() < 1e-10);
        assert!((&metric_model_a_analytic(0.5, 1.0) - end).max_abs() < 1e-10);
    }

    #[test]
    fn hermitian_h_keeps_unit_metric() {
        let grid = TimeGrid::new(0.0, 2.0, 1e-2).unwrap();
        let h = HamiltonianFn::constant(CMatrix::sigma_x());
        let traj = evolve_metric(&h, &CMatrix::identity(2), &ket(1.0, 0.0), grid).unwrap();
        for i in 0..traj.len() {
            assert!((traj.rho(i) - &CMatrix::identity(2)).max_abs() < 1e-14);
        }
        let hm = hermitian_map(&traj, &h, 1.0, 1e-2).unwrap();
        assert!((&hm - &CMatrix::sigma_x()).max_abs() < 1e-12);
    }

    #[test]
    fn model_a_observables() {
        let grid = TimeGrid::new(0.0, 5.0, 1e-3).unwrap();
        let h = model_a(1.0, 0.5);
        let excited = evolve_metric(&h, &CMatrix::identity(2), &ket(1.0, 0.0), grid).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let sup = evolve_metric(&h, &CMatrix::identity(2), &ket(-r, r), grid).unwrap();
        for i in (0..excited.len()).step_by(250) {
            let t = excited.time(i);
            let z = metric_expectation(&excited, &CMatrix::sigma_z(), i).unwrap();
            assert!((z - 1.0).abs() < 1e-9);
            let x = metric_expectation(&sup, &CMatrix::sigma_x(), i).unwrap();
            assert!((x + (2.0 * t).cos()).abs() < 1e-8, "t = {t}: {x}");
            let one = metric_expectation(&sup, &CMatrix::identity(2), i).unwrap();
            assert!((one - 1.0).abs() < 1e-9);
            assert!((sup.norm(i) - 1.0).abs() < 1e-9);
        }
        assert!(matches!(
            metric_expectation(&sup, &h.at(0.0), 0),
            Err(Error::NotHermitianObservable { .. })
        ));
    }

    #[test]
    fn model_a_hermitian_map_is_omega_sigma_z() {
        let grid = TimeGrid::new(0.0, 2.0, 1e-3).unwrap();
        let h = model_a(1.0, 0.5);
        let traj = evolve_metric(&h, &CMatrix::identity(2), &ket(1.0, 0.0), grid).unwrap();
        for t in [0.0, 0.5, 1.0, 2.0] {
            let hm = hermitian_map(&traj, &h, t, 1e-3).unwrap();
            assert!((&hm - &CMatrix::sigma_z()).max_abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn model_b_hermitian_map_at_zero() {
        let grid = TimeGrid::new(0.0, 1.0, 1e-3).unwrap();
        let h = model_b(1.0, 0.5);
        let traj = evolve_metric(&h, &CMatrix::identity(2), &ket(0.0, 1.0), grid).unwrap();
        let hm = hermitian_map(&traj, &h, 0.0, 1e-3).unwrap();
        assert!((&hm - &CMatrix::sigma_x()).max_abs() < 1e-4);
        let a2 = closed_form_hermitian_map_model_b(1.0, 0.5, 0.0).unwrap();
        assert!((&a2 - &CMatrix::sigma_x().scale_re(2.0)).max_abs() < 1e-15);
        let mid = hermitian_map(&traj, &h, 0.5, 1e-3).unwrap();
        assert!(mid.hermitian_residual() < 1e-6);
    }

    #[test]
    fn model_b_analytic_matches_integrator() {
        for (omega, gamma) in [(1.0, 0.5), (1.0, 1.5)] {
            let grid = TimeGrid::new(0.0, 4.0, 1e-3).unwrap();
            let traj =
                evolve_metric(&model_b(omega, gamma), &CMatrix::identity(2), &ket(0.0, 1.0), grid)
                    .unwrap();
            for i in (0..traj.len()).step_by(100) {
                let exact = metric_model_b_analytic(omega, gamma, traj.time(i)).unwrap();
                let err = (&exact - traj.rho(i)).max_abs() / exact.max_abs().max(1.0);
                assert!(err < 1e-9, "({omega}, {gamma}) t = {}: {err}", traj.time(i));
            }
        }
    }

    #[test]
    fn model_b_analytic_examples() {
        assert!((&metric_model_b_analytic(1.0, 0.5, 0.0).unwrap() - &CMatrix::identity(2)).max_abs() < 1e-15);
        let period = std::f64::consts::PI / 0.75_f64.sqrt();
        for t in [0.1, 0.7, 2.3] {
            let a = metric_model_b_analytic(1.0, 0.5, t).unwrap();
            let b = metric_model_b_analytic(1.0, 0.5, t + period).unwrap();
            assert!((&a - &b).max_abs() < 1e-10);
        }
        assert!(matches!(metric_model_b_analytic(1.0, 1.0, 1.0), Err(Error::AtExceptionalPoint)));
        let near = metric_model_b_analytic(1.0, 1.0 + 1e-6, 0.8).unwrap();
        let ep = metric_model_b_exceptional(1.0, 1.0, 0.8);
        assert!((&near - &ep).max_abs() < 1e-4);
    }

    #[test]
    fn asymptotics_examples() {
        let (x, y, z) = metric_asymptotics_model_b(1.0, 1.5, (0.0, 0.0, -1.0)).unwrap();
        assert!(x.abs() < 1e-15);
        assert!((y - 2.0 * 1.25_f64.sqrt() / 2.25).abs() < 1e-12);
        assert!((z + 0.25 / 2.25).abs() < 1e-12);
        assert_eq!(metric_asymptotics_model_b(1.0, 1.5, (1.0, 0.0, 0.0)).unwrap(), (1.0, 0.0, 0.0));
        assert!(matches!(
            metric_asymptotics_model_b(1.0, 0.5, (0.0, 0.0, 1.0)),
            Err(Error::NotPtBroken)
        ));
    }

    #[test]
    fn broken_regime_reaches_limits() {
        let grid = TimeGrid::new(0.0, 20.0, 1e-3).unwrap();
        let traj =
            evolve_metric(&model_b(1.0, 1.5), &CMatrix::identity(2), &ket(0.0, 1.0), grid).unwrap();
        let end = traj.len() - 1;
        let (_, y, z) = metric_asymptotics_model_b(1.0, 1.5, (0.0, 0.0, -1.0)).unwrap();
        let sy = metric_expectation(&traj, &CMatrix::sigma_y(), end).unwrap();
        let sz = metric_expectation(&traj, &CMatrix::sigma_z(), end).unwrap();
        assert!((sy - y).abs() < 1e-3 && (sz - z).abs() < 1e-3, "{sy} {sz}");
        assert!((traj.mapped_norm(end) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_forms_agree() {
        let grid = TimeGrid::new(0.0, 3.0, 1e-3).unwrap();
        let psi0 = crate::linalg::normalized(&[c64(0.56, 0.014), c64(-0.466, -0.685)]).unwrap();
        let traj = evolve_metric(&model_b(1.0, 0.5), &CMatrix::identity(2), &psi0, grid).unwrap();
        for i in [0, 700, 3000] {
            for o in CMatrix::paulis() {
                let a = metric_expectation(&traj, &o, i).unwrap();
                let b = metric_expectation_via_rho(&traj, &o, i).unwrap();
                assert!((b - a).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn large_step_breaks_norm_conservation() {
        let grid = TimeGrid::new(0.0, 20.0, 0.5).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let traj = evolve_metric(&model_b(1.0, 0.5), &CMatrix::identity(2), &ket(r, r), grid);
        let drift = traj.map(|t| (0..t.len()).map(|i| (t.norm(i) - 1.0).abs()).fold(0.0, f64::max));
        assert!(drift.map_or(true, |d| d > 1e-6));
    }
}
