//! Fixed-step RK4 and the time grids it runs on.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};

/// Uniform grid `t0, t0 + dt, ..., t1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
}

impl TimeGrid {
    /// `t1 - t0` must be an integer multiple of `dt` to within 1e-9 steps.
    pub fn new(t0: f64, t1: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidGrid(format!("need t0 < t1, got [{t0}, {t1}]")));
        }
        let steps = (t1 - t0) / dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "span {} is not a multiple of dt = {dt}",
                t1 - t0
            )));
        }
        Ok(TimeGrid { t0, t1, dt })
    }

    pub fn steps(&self) -> usize {
        ((self.t1 - self.t0) / self.dt).round() as usize
    }

    /// Number of stored samples, `steps() + 1`.
    pub fn len(&self) -> usize {
        self.steps() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps() {
            self.t1
        } else {
            self.t0 + i as f64 * self.dt
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    /// Index of the sample at time `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt;
        let i = x.round();
        if i < 0.0 || i as usize >= self.len() || (x - i).abs() > 1e-6 {
            return None;
        }
        Some(i as usize)
    }
}

/// Time-dependent operator `t ↦ H(t)` of fixed dimension.
#[derive(Clone)]
pub struct HamiltonianFn {
    dim: usize,
    f: Arc<dyn Fn(f64) -> CMatrix + Send + Sync>,
}

impl fmt::Debug for HamiltonianFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianFn").field("dim", &self.dim).finish()
    }
}

impl HamiltonianFn {
    pub fn new(dim: usize, f: impl Fn(f64) -> CMatrix + Send + Sync + 'static) -> Self {
        HamiltonianFn {
            dim,
            f: Arc::new(f),
        }
    }

    pub fn constant(h: CMatrix) -> Self {
        HamiltonianFn::new(h.dim(), move |_| h.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, t: f64) -> CMatrix {
        let h = (self.f)(t);
        debug_assert_eq!(h.dim(), self.dim);
        h
    }

    /// `H(t) + c·1`.
    pub fn shifted(&self, c: C64) -> Self {
        let base = self.clone();
        HamiltonianFn::new(self.dim, move |t| {
            let h = base.at(t);
            &h + &CMatrix::identity(h.dim()).scale(c)
        })
    }

    /// `H(t) - tr H(t)/dim · 1`.
    pub fn traceless(&self) -> Self {
        let base = self.clone();
        HamiltonianFn::new(self.dim, move |t| {
            let h = base.at(t);
            let shift = h.trace() / h.dim() as f64;
            &h - &CMatrix::identity(h.dim()).scale(shift)
        })
    }
}

/// Linear-space operations RK4 needs.
pub trait OdeState: Clone {
    /// `self + h·k`.
    fn add_scaled(&self, k: &Self, h: f64) -> Self;
}

impl OdeState for CMatrix {
    fn add_scaled(&self, k: &Self, h: f64) -> Self {
        self + &k.scale_re(h)
    }
}

impl OdeState for Vec<C64> {
    fn add_scaled(&self, k: &Self, h: f64) -> Self {
        self.iter().zip(k).map(|(a, b)| a + b * h).collect()
    }
}

/// One classical fourth-order Runge-Kutta step of `y' = f(t, y)`.
pub fn rk4_step<S: OdeState>(f: impl Fn(f64, &S) -> S, t: f64, y: &S, dt: f64) -> S {
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * dt, &y.add_scaled(&k1, 0.5 * dt));
    let k3 = f(t + 0.5 * dt, &y.add_scaled(&k2, 0.5 * dt));
    let k4 = f(t + dt, &y.add_scaled(&k3, dt));
    let sum = k1
        .add_scaled(&k2, 2.0)
        .add_scaled(&k3, 2.0)
        .add_scaled(&k4, 1.0);
    y.add_scaled(&sum, dt / 6.0)
}

/// Matrix `M` with `rk4_step` of `ψ' = -i H(t) ψ` equal to `M ψ` for every
/// `ψ` (the step is linear in the state).
pub fn schrodinger_step_matrix(h: &HamiltonianFn, t: f64, dt: f64) -> CMatrix {
    let minus_i = C64::new(0.0, -1.0);
    let id = CMatrix::identity(h.dim());
    let a0 = h.at(t).scale(minus_i);
    let a_mid = h.at(t + 0.5 * dt).scale(minus_i);
    let a1 = h.at(t + dt).scale(minus_i);
    let k1 = a0;
    let k2 = &a_mid * &id.add_scaled(&k1, 0.5 * dt);
    let k3 = &a_mid * &id.add_scaled(&k2, 0.5 * dt);
    let k4 = &a1 * &id.add_scaled(&k3, dt);
    let sum = k1
        .add_scaled(&k2, 2.0)
        .add_scaled(&k3, 2.0)
        .add_scaled(&k4, 1.0);
    id.add_scaled(&sum, dt / 6.0)
}
