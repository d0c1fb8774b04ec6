//! Dense small complex matrices.
//!
//! Everything here is sized for the two-level models the crate studies, with
//! general support up to 4x4. Matrices are immutable values stored row-major.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest dimension handled by the eigensolver.
pub const MAX_DIM: usize = 4;

pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ZERO: C64 = c64(0.0, 0.0);
const ONE: C64 = c64(1.0, 0.0);
const I: C64 = c64(0.0, 1.0);

/// Configurable numerical thresholds used by the eigensolver and the
/// positive-definite square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative gap (in units of the Frobenius norm) below which a spectrum is
    /// treated as degenerate.
    pub eps_ep: f64,
    /// Smallest eigenvalue accepted as positive.
    pub eps_pd: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_ep: 1e-8,
            eps_pd: 1e-12,
        }
    }
}

/// Square complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, ", ")?;
                }
                let z = self[(i, j)];
                write!(f, "{}{:+}i", z.re, z.im)?;
            }
        }
        write!(f, "]")
    }
}

impl CMatrix {
    /// Builds a matrix from row-major entries, rejecting wrong lengths and
    /// non-finite values.
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::UnsupportedDimension(0));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(CMatrix { dim, data })
    }

    /// Builds a matrix from rows. Panics on non-finite input; use
    /// [`CMatrix::new`] for untrusted data.
    pub fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        CMatrix::new(N, data).expect("non-finite matrix entry")
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows<const N: usize>(rows: [[f64; N]; N]) -> Self {
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| C64::from(x)))
            .collect();
        CMatrix::new(N, data).expect("non-finite matrix entry")
    }

    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = CMatrix::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = z;
        }
        m
    }

    pub fn sigma_x() -> Self {
        CMatrix::from_rows([[ZERO, ONE], [ONE, ZERO]])
    }

    pub fn sigma_y() -> Self {
        CMatrix::from_rows([[ZERO, -I], [I, ZERO]])
    }

    pub fn sigma_z() -> Self {
        CMatrix::from_rows([[ONE, ZERO], [ZERO, -ONE]])
    }

    /// The three Pauli matrices in x, y, z order.
    pub fn paulis() -> [CMatrix; 3] {
        [Self::sigma_x(), Self::sigma_y(), Self::sigma_z()]
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len(), "outer product of unequal vectors");
        let n = a.len();
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = a[i] * b[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    fn zip(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    fn check_dim(&self, other: &CMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_dim(other)?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_dim(other)?;
        Ok(self - other)
    }

    pub fn try_mul(&self, other: &CMatrix) -> Result<CMatrix> {
        self.check_dim(other)?;
        Ok(self * other)
    }

    pub fn try_matvec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(self.matvec(v))
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: f64) -> CMatrix {
        self.map(|z| z * s)
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.dim;
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> CMatrix {
        let n = self.dim;
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[j * n + i] = self.data[i * n + j];
            }
        }
        m
    }

    pub fn conj(&self) -> CMatrix {
        self.map(|z| z.conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M - M†|` entrywise.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                r = r.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> CMatrix {
        (self + &self.adjoint()).scale_re(0.5)
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum())
            .collect()
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        &(self * other) - &(other * self)
    }

    /// `{A, B} = AB + BA`.
    pub fn anticommutator(&self, other: &CMatrix) -> CMatrix {
        &(self * other) + &(other * self)
    }

    /// `⟨a|M|b⟩`.
    pub fn sandwich(&self, a: &[C64], b: &[C64]) -> C64 {
        inner(a, &self.matvec(b))
    }

    /// LU factorisation with partial pivoting. Returns the packed factors,
    /// the row permutation and its sign.
    fn lu(&self) -> (Vec<C64>, Vec<usize>, f64) {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
                .unwrap();
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[k * n + k];
            if pivot == ZERO {
                continue;
            }
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                for j in k + 1..n {
                    let u = a[k * n + j];
                    a[i * n + j] -= f * u;
                }
            }
        }
        (a, perm, sign)
    }

    pub fn det(&self) -> C64 {
        match self.dim {
            1 => self.data[0],
            2 => self.data[0] * self.data[3] - self.data[1] * self.data[2],
            n => {
                let (lu, _, sign) = self.lu();
                (0..n).map(|i| lu[i * n + i]).product::<C64>() * sign
            }
        }
    }

    /// Inverse by Gauss-Jordan elimination. Fails when
    /// `|det| <= 1e-14 * ‖M‖^dim`.
    pub fn inverse(&self) -> Result<CMatrix> {
        let n = self.dim;
        let scale = self.frobenius_norm();
        if self.det().norm() <= 1e-14 * scale.powi(n as i32) || scale == 0.0 {
            return Err(Error::SingularMatrix);
        }
        if n == 2 {
            let d = self.det();
            let [a, b, c, e] = [self.data[0], self.data[1], self.data[2], self.data[3]];
            return Ok(CMatrix {
                dim: 2,
                data: vec![e / d, -b / d, -c / d, a / d],
            });
        }
        let mut a = self.data.clone();
        let mut inv = CMatrix::identity(n).data;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i * n + k].norm().total_cmp(&a[j * n + k].norm()))
                .unwrap();
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                    inv.swap(k * n + j, p * n + j);
                }
            }
            let pivot = a[k * n + k];
            if pivot == ZERO {
                return Err(Error::SingularMatrix);
            }
            for j in 0..n {
                a[k * n + j] /= pivot;
                inv[k * n + j] /= pivot;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[i * n + k];
                if f == ZERO {
                    continue;
                }
                for j in 0..n {
                    let (u, w) = (a[k * n + j], inv[k * n + j]);
                    a[i * n + j] -= f * u;
                    inv[i * n + j] -= f * w;
                }
            }
        }
        CMatrix::new(n, inv).map_err(|_| Error::SingularMatrix)
    }

    /// Solves `M x = b`, replacing vanishing pivots by `floor`. Used for
    /// inverse iteration on deliberately singular shifts.
    fn solve_regularised(&self, b: &[C64], floor: f64) -> Vec<C64> {
        let n = self.dim;
        let (mut lu, perm, _) = self.lu();
        for k in 0..n {
            if lu[k * n + k].norm() < floor {
                lu[k * n + k] = C64::from(floor);
            }
        }
        let mut y: Vec<C64> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = lu[i * n + j];
                y[i] = y[i] - l * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = lu[i * n + j];
                y[i] = y[i] - u * y[j];
            }
            y[i] /= lu[i * n + i];
        }
        y
    }

    /// Adjugate (classical adjoint), `adj(M) M = det(M) 1`.
    pub fn adjugate(&self) -> CMatrix {
        let n = self.dim;
        if n == 1 {
            return CMatrix::identity(1);
        }
        if n == 2 {
            let [a, b, c, d] = [self.data[0], self.data[1], self.data[2], self.data[3]];
            return CMatrix {
                dim: 2,
                data: vec![d, -b, -c, a],
            };
        }
        let mut adj = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let minor = self.minor(j, i);
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                adj.data[i * n + j] = minor.det() * sign;
            }
        }
        adj
    }

    fn minor(&self, row: usize, col: usize) -> CMatrix {
        let n = self.dim;
        let mut data = Vec::with_capacity((n - 1) * (n - 1));
        for i in (0..n).filter(|&i| i != row) {
            for j in (0..n).filter(|&j| j != col) {
                data.push(self.data[i * n + j]);
            }
        }
        CMatrix { dim: n - 1, data }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.zip(rhs, |a, b| a - b)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        CMatrix { dim: n, data: out }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for CMatrix {
            type Output = CMatrix;
            fn $m(self, rhs: CMatrix) -> CMatrix {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $m(self, rhs: &CMatrix) -> CMatrix {
                (&self).$m(rhs)
            }
        }
        impl $tr<CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $m(self, rhs: CMatrix) -> CMatrix {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// `⟨a|b⟩`, antilinear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(v: &[C64]) -> Result<Vec<C64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|z| z / n).collect())
}

pub fn scale_vec(v: &[C64], s: C64) -> Vec<C64> {
    v.iter().map(|z| z * s).collect()
}

/// Rotates `v` so that its first non-negligible component is real and
/// positive.
pub fn fix_phase(v: &mut [C64]) {
    let n = norm(v);
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-10 * n) {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// Coefficients of `a0·1 + ax·σx + ay·σy + az·σz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliCoeffs {
    pub a0: C64,
    pub ax: C64,
    pub ay: C64,
    pub az: C64,
}

impl PauliCoeffs {
    pub fn new(a0: C64, ax: C64, ay: C64, az: C64) -> Self {
        PauliCoeffs { a0, ax, ay, az }
    }

    /// `a0 = tr(M)/2`, `ai = tr(σi M)/2`.
    pub fn decompose(m: &CMatrix) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim(),
            });
        }
        let [m00, m01, m10, m11] = [m.data[0], m.data[1], m.data[2], m.data[3]];
        Ok(PauliCoeffs {
            a0: (m00 + m11) * 0.5,
            ax: (m01 + m10) * 0.5,
            ay: (m01 - m10) * I * 0.5,
            az: (m00 - m11) * 0.5,
        })
    }

    pub fn compose(&self) -> CMatrix {
        CMatrix {
            dim: 2,
            data: vec![
                self.a0 + self.az,
                self.ax - I * self.ay,
                self.ax + I * self.ay,
                self.a0 - self.az,
            ],
        }
    }

    /// Whether all four coefficients are real within `tol`; equivalent to
    /// the composed matrix being Hermitian.
    pub fn is_real(&self, tol: f64) -> bool {
        [self.a0, self.ax, self.ay, self.az]
            .iter()
            .all(|z| z.im.abs() <= tol)
    }
}

/// Eigenvalues with paired right and left eigenvectors.
///
/// `H|n⟩_R = E_n|n⟩_R` and `H†|n⟩_L = E_n*|n⟩_L`. As returned by [`eig`]
/// both vector sets have unit norm; [`crate::biorthogonal::build_basis`]
/// rescales the left vectors to make the pair biorthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    pub right: Vec<Vec<C64>>,
    pub left: Vec<Vec<C64>>,
    /// `min_{m≠n} |E_m - E_n|`.
    pub gap: f64,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Rescales each right vector by `s_n` and each left vector by
    /// `1/conj(s_n)`, leaving `⟨n_L|n_R⟩` unchanged. Observables built from
    /// the basis are invariant under this gauge freedom.
    pub fn regauge(&self, scales: &[C64]) -> Spectrum {
        assert_eq!(scales.len(), self.dim(), "one scale per eigenvector");
        let mut out = self.clone();
        for (n, &s) in scales.iter().enumerate() {
            out.right[n] = scale_vec(&self.right[n], s);
            out.left[n] = scale_vec(&self.left[n], ONE / s.conj());
        }
        out
    }

    /// `Σ_n E_n |n⟩_R⟨n_L|`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n);
        for k in 0..n {
            m = &m + &CMatrix::outer(&self.right[k], &self.left[k]).scale(self.eigenvalues[k]);
        }
        m
    }
}

/// Eigen-decomposition with default tolerances.
pub fn eig(h: &CMatrix) -> Result<Spectrum> {
    eig_with(h, &Tolerances::default())
}

/// Left/right eigen-decomposition of a non-Hermitian matrix of dimension at
/// most [`MAX_DIM`].
///
/// Eigenvalues are sorted by real part, then imaginary part. Dimension 2 uses
/// the closed-form quadratic; dimensions 3 and 4 find the roots of the
/// characteristic polynomial and polish them with a two-sided Rayleigh
/// quotient.
pub fn eig_with(h: &CMatrix, tol: &Tolerances) -> Result<Spectrum> {
    let n = h.dim();
    if n > MAX_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let scale = h.frobenius_norm();
    let mut eigenvalues = match n {
        1 => vec![h.data[0]],
        2 => {
            let half_tr = (h.data[0] + h.data[3]) * 0.5;
            let half_diff = (h.data[0] - h.data[3]) * 0.5;
            let s = (half_diff * half_diff + h.data[1] * h.data[2]).sqrt();
            vec![half_tr - s, half_tr + s]
        }
        _ => polynomial_roots(&characteristic_polynomial(h)),
    };
    sort_eigenvalues(&mut eigenvalues, scale);

    // Characteristic-polynomial roots of a cluster spread like eps^(1/m), so
    // for n > 2 the gap is judged after the Rayleigh polish.
    let h_adj = h.adjoint();
    let mut pairs = Vec::with_capacity(n);
    for mut e in eigenvalues {
        let mut r = null_vector(h, e, scale);
        let mut l = null_vector(&h_adj, e.conj(), scale);
        if n > 2 {
            let denom = inner(&l, &r);
            if denom.norm() > 1e-300 {
                e = h.sandwich(&l, &r) / denom;
            }
            r = null_vector(h, e, scale);
            l = null_vector(&h_adj, e.conj(), scale);
        }
        fix_phase(&mut r);
        fix_phase(&mut l);
        pairs.push((e, r, l));
    }
    let mut eigenvalues: Vec<C64> = pairs.iter().map(|p| p.0).collect();
    sort_eigenvalues(&mut eigenvalues, scale);
    let gap = spectral_gap(&eigenvalues);
    if n > 1 && gap <= tol.eps_ep * scale {
        return Err(Error::NearDegenerate { gap });
    }
    let mut right = Vec::with_capacity(n);
    let mut left = Vec::with_capacity(n);
    for e in &eigenvalues {
        let k = pairs
            .iter()
            .position(|p| p.0 == *e)
            .expect("sorted values come from the same list");
        let (_, r, l) = pairs.swap_remove(k);
        right.push(r);
        left.push(l);
    }
    Ok(Spectrum {
        eigenvalues,
        right,
        left,
        gap,
    })
}

fn sort_eigenvalues(values: &mut [C64], scale: f64) {
    let tie = 1e-12 * scale.max(1.0);
    // insertion sort: the tolerance-aware order is not a strict total order
    for i in 1..values.len() {
        let mut j = i;
        while j > 0 && eigen_before(values[j], values[j - 1], tie) {
            values.swap(j, j - 1);
            j -= 1;
        }
    }
}

fn eigen_before(a: C64, b: C64, tie: f64) -> bool {
    if (a.re - b.re).abs() > tie {
        a.re < b.re
    } else {
        a.im < b.im
    }
}

fn spectral_gap(values: &[C64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            gap = gap.min((values[i] - values[j]).norm());
        }
    }
    gap
}

/// Unit vector spanning the (numerical) kernel of `m - e·1`.
fn null_vector(m: &CMatrix, e: C64, scale: f64) -> Vec<C64> {
    let n = m.dim();
    let shifted = m - &CMatrix::identity(n).scale(e);
    let candidate = if n == 1 {
        vec![ONE]
    } else {
        let adj = shifted.adjugate();
        let col = (0..n)
            .max_by(|&a, &b| {
                let na: f64 = (0..n).map(|i| adj[(i, a)].norm_sqr()).sum();
                let nb: f64 = (0..n).map(|i| adj[(i, b)].norm_sqr()).sum();
                na.total_cmp(&nb)
            })
            .unwrap();
        let v: Vec<C64> = (0..n).map(|i| adj[(i, col)]).collect();
        if norm(&v) > 0.0 {
            v
        } else {
            // m - e·1 vanishes entirely; any vector is an eigenvector
            let mut v = vec![ZERO; n];
            v[0] = ONE;
            v
        }
    };
    let mut v = normalized(&candidate).unwrap_or_else(|_| {
        let mut v = vec![ZERO; n];
        v[0] = ONE;
        v
    });
    if n > 2 {
        let floor = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        for _ in 0..2 {
            let next = shifted.solve_regularised(&v, floor);
            match normalized(&next) {
                Ok(w) => v = w,
                Err(_) => break,
            }
        }
    }
    v
}

/// Characteristic polynomial `det(λ1 - M)` by Faddeev-LeVerrier; returns
/// coefficients in ascending powers.
fn characteristic_polynomial(m: &CMatrix) -> Vec<C64> {
    let n = m.dim();
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[n] = ONE;
    let mut mk = CMatrix::zeros(n);
    for k in 1..=n {
        mk = &(m * &mk) + &CMatrix::identity(n).scale(coeffs[n - k + 1]);
        coeffs[n - k] = -(m * &mk).trace() / k as f64;
    }
    coeffs
}

fn eval_poly(coeffs: &[C64], z: C64) -> (C64, C64) {
    let mut p = ZERO;
    let mut dp = ZERO;
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Roots of a monic polynomial by Aberth-Ehrlich iteration followed by
/// Newton polishing.
fn polynomial_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let radius = 1.0
        + coeffs[..n]
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max);
    let centre = -coeffs[n - 1] / n as f64;
    let mut roots: Vec<C64> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            centre + C64::from_polar(0.5 * radius, angle)
        })
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let (p, dp) = eval_poly(coeffs, roots[i]);
            if p == ZERO {
                continue;
            }
            let ratio = p / dp;
            let repulsion: C64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| ONE / (roots[i] - roots[j]))
                .sum();
            let step = ratio / (ONE - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                roots[i] -= step;
                max_step = max_step.max(step.norm());
            }
        }
        if max_step <= 1e-16 * radius {
            break;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval_poly(coeffs, *r);
            if dp == ZERO {
                break;
            }
            let step = p / dp;
            if !(step.re.is_finite() && step.im.is_finite()) {
                break;
            }
            *r -= step;
        }
    }
    roots
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Returns ascending real eigenvalues and the unitary whose
/// columns are the eigenvectors.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius_norm();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mut g = CMatrix::identity(n);
                g.data[p * n + p] = C64::from(c);
                g.data[p * n + q] = C64::from(s);
                g.data[q * n + p] = -phase.conj() * s;
                g.data[q * n + q] = phase.conj() * c;
                a = &(&g.adjoint() * &a) * &g;
                v = &v * &g;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vecs = CMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        let mut column: Vec<C64> = (0..n).map(|i| v[(i, src)]).collect();
        fix_phase(&mut column);
        for i in 0..n {
            vecs.data[i * n + col] = column[i];
        }
    }
    (values, vecs)
}

/// Hermitian positive-definite square root with default tolerances.
pub fn herm_sqrt(p: &CMatrix) -> Result<CMatrix> {
    herm_sqrt_with(p, &Tolerances::default())
}

/// The unique Hermitian positive-definite `η` with `η² = P`.
pub fn herm_sqrt_with(p: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let residual = p.hermitian_residual();
    if residual > 1e-10 * p.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    let (values, vecs) = hermitian_eigen(p);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= tol.eps_pd {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    let roots: Vec<C64> = values.iter().map(|&x| C64::from(x.sqrt())).collect();
    let eta = &(&vecs * &CMatrix::diag(&roots)) * &vecs.adjoint();
    Ok(eta.hermitian_part())
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0[0]
}

/// Unitary factor `W` of the polar decomposition `A = P·W` (equivalently
/// `A = W·P'`), with `P = (A A†)^{1/2}`.
///
/// For 2x2 matrices the closed form
/// `W = (A + e^{iφ} adj(A)†) / (σ1 + σ2)`, `e^{iφ} = det A / |det A|` is used.
/// Its only ill-conditioned ingredient is the determinant, which callers
/// that track it analytically can pass in as `det`. Larger matrices use the
/// scaled Newton iteration.
pub fn polar_unitary(a: &CMatrix, det: Option<C64>) -> Result<CMatrix> {
    let n = a.dim();
    if n == 2 {
        let d = det.unwrap_or_else(|| a.det());
        if d.norm() == 0.0 || !d.norm().is_finite() {
            return Err(Error::SingularMatrix);
        }
        let phase = d / d.norm();
        let adj_dag = a.adjugate().adjoint();
        let denom = (a.frobenius_norm().powi(2) + 2.0 * d.norm()).sqrt();
        return Ok((a + &adj_dag.scale(phase)).scale_re(1.0 / denom));
    }
    let mut x = a.clone();
    for _ in 0..100 {
        let inv = x.inverse()?;
        let zeta = (inv.frobenius_norm() / x.frobenius_norm()).sqrt();
        let next = (&x.scale_re(zeta) + &inv.adjoint().scale_re(1.0 / zeta)).scale_re(0.5);
        let change = (&next - &x).frobenius_norm();
        x = next;
        if change <= 1e-14 * (n as f64).sqrt() {
            break;
        }
    }
    Ok(x)
}

/// `exp(A)` for a 2×2 matrix: with `B = A - (tr A/2)·1` one has
/// `B² = -det(B)·1`, so `exp(A) = e^{tr A/2}(cosh s·1 + sinh(s)/s·B)`,
/// `s² = -det B`.
pub fn expm2(a: &CMatrix) -> Result<CMatrix> {
    if a.dim() != 2 {
        return Err(Error::UnsupportedDimension(a.dim()));
    }
    let m = a.trace() * 0.5;
    let b = a - &CMatrix::identity(2).scale(m);
    let s = (-b.det()).sqrt();
    let sinhc = if s.norm() < 1e-4 {
        ONE + s * s / 6.0
    } else {
        s.sinh() / s
    };
    let e = &CMatrix::identity(2).scale(s.cosh()) + &b.scale(sinhc);
    Ok(e.scale(m.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn pauli_decompose_examples() {
        let id = PauliCoeffs::decompose(&CMatrix::identity(2)).unwrap();
        assert_eq!(id, PauliCoeffs::new(ONE, ZERO, ZERO, ZERO));
        let z = PauliCoeffs::decompose(&CMatrix::sigma_z()).unwrap();
        assert_eq!(z, PauliCoeffs::new(ZERO, ZERO, ZERO, ONE));
        let h = &CMatrix::sigma_x() - &CMatrix::sigma_z().scale(c64(0.0, 1.5));
        let p = PauliCoeffs::decompose(&h).unwrap();
        assert_eq!(p, PauliCoeffs::new(ZERO, ONE, ZERO, c64(0.0, -1.5)));
        assert!(matches!(
            PauliCoeffs::decompose(&CMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            CMatrix::new(2, vec![ONE; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert_eq!(
            CMatrix::new(1, vec![c64(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn algebra_examples() {
        let (w, g) = (1.0, 0.7);
        let h = &CMatrix::sigma_x().scale_re(w) - &CMatrix::sigma_z().scale(c64(0.0, g));
        let expected = &CMatrix::sigma_x().scale_re(w) + &CMatrix::sigma_z().scale(c64(0.0, g));
        assert!(close(&h.adjoint(), &expected, 0.0));
        for s in CMatrix::paulis() {
            assert_eq!(s.trace(), ZERO);
        }
        // (γ1 - kσz)/(γ+k) at k = 0.5, γ = 1 is diag(1/3, 1)
        let u = (&CMatrix::identity(2) - &CMatrix::sigma_z().scale_re(0.5)).scale_re(1.0 / 1.5);
        let inv = u.inverse().unwrap();
        assert!(close(&inv, &CMatrix::diag(&[c64(3.0, 0.0), ONE]), 1e-14));
        assert_eq!(
            CMatrix::zeros(2).inverse(),
            Err(Error::SingularMatrix)
        );
        assert!(CMatrix::identity(2).try_mul(&CMatrix::identity(3)).is_err());
    }

    #[test]
    fn inverse_three_by_three() {
        let m = CMatrix::from_rows([
            [c64(2.0, 1.0), c64(0.5, 0.0), c64(0.0, -1.0)],
            [c64(0.0, 0.3), c64(1.0, 0.0), c64(0.2, 0.2)],
            [c64(-1.0, 0.0), c64(0.0, 0.0), c64(3.0, 0.5)],
        ]);
        let inv = m.inverse().unwrap();
        assert!(close(&(&m * &inv), &CMatrix::identity(3), 1e-14));
        assert!(close(&(&m.adjugate() * &m), &CMatrix::identity(3).scale(m.det()), 1e-13));
    }

    #[test]
    fn eig_hermitian_diagonal() {
        let s = eig(&CMatrix::sigma_z()).unwrap();
        assert_eq!(s.eigenvalues, vec![c64(-1.0, 0.0), ONE]);
        assert_eq!(s.right[0], vec![ZERO, ONE]);
        assert_eq!(s.right[1], vec![ONE, ZERO]);
        assert_eq!(s.left, s.right);
        assert_eq!(s.gap, 2.0);
    }

    #[test]
    fn eig_pt_broken_pair() {
        let h = &CMatrix::sigma_x() - &CMatrix::sigma_z().scale(c64(0.0, 1.5));
        let s = eig(&h).unwrap();
        let e = 1.25_f64.sqrt();
        assert!((s.eigenvalues[0] - c64(0.0, -e)).norm() < 1e-14);
        assert!((s.eigenvalues[1] - c64(0.0, e)).norm() < 1e-14);
    }

    #[test]
    fn eig_momentum_mode() {
        // kσx + iγσy with k = 0.5, γ = 1
        let h = &CMatrix::sigma_x().scale_re(0.5) + &CMatrix::sigma_y().scale(c64(0.0, 1.0));
        let s = eig(&h).unwrap();
        let e = 0.75_f64.sqrt();
        assert!((s.eigenvalues[0] - c64(0.0, -e)).norm() < 1e-14);
        assert!((s.eigenvalues[1] - c64(0.0, e)).norm() < 1e-14);
    }

    #[test]
    fn eig_rejects_exceptional_point() {
        let h = &CMatrix::sigma_x() - &CMatrix::sigma_z().scale(c64(0.0, 1.0));
        assert!(matches!(eig(&h), Err(Error::NearDegenerate { .. })));
        assert!(matches!(
            eig(&CMatrix::identity(3)),
            Err(Error::NearDegenerate { .. })
        ));
        assert!(matches!(
            eig(&CMatrix::identity(5)),
            Err(Error::UnsupportedDimension(5))
        ));
    }

    #[test]
    fn eig_residuals_three_and_four() {
        let m3 = CMatrix::from_rows([
            [c64(1.0, 0.2), c64(0.5, -0.1), c64(0.0, 0.7)],
            [c64(0.3, 0.0), c64(-0.4, 0.0), c64(0.2, 0.2)],
            [c64(-0.6, 0.1), c64(0.1, 0.0), c64(0.9, -0.5)],
        ]);
        let m4 = CMatrix::from_rows([
            [c64(1.0, 0.0), c64(0.2, 0.1), c64(0.0, 0.0), c64(0.4, 0.0)],
            [c64(0.0, 0.3), c64(-1.0, 0.5), c64(0.6, 0.0), c64(0.0, -0.2)],
            [c64(0.1, 0.0), c64(0.0, 0.0), c64(2.0, 0.0), c64(0.3, 0.3)],
            [c64(0.0, -0.7), c64(0.5, 0.0), c64(0.0, 0.1), c64(-2.0, -0.3)],
        ]);
        for m in [m3, m4] {
            let s = eig(&m).unwrap();
            let scale = m.frobenius_norm();
            for n in 0..m.dim() {
                let e = s.eigenvalues[n];
                let r = &s.right[n];
                let l = &s.left[n];
                let res_r: Vec<C64> = m
                    .matvec(r)
                    .iter()
                    .zip(r)
                    .map(|(a, b)| a - e * b)
                    .collect();
                let res_l: Vec<C64> = m
                    .adjoint()
                    .matvec(l)
                    .iter()
                    .zip(l)
                    .map(|(a, b)| a - e.conj() * b)
                    .collect();
                assert!(norm(&res_r) <= 1e-10 * scale, "right residual {}", norm(&res_r));
                assert!(norm(&res_l) <= 1e-10 * scale, "left residual {}", norm(&res_l));
            }
            for w in s.eigenvalues.windows(2) {
                assert!(w[0].re <= w[1].re + 1e-12);
            }
        }
    }

    #[test]
    fn herm_sqrt_examples() {
        assert!(close(
            &herm_sqrt(&CMatrix::identity(2)).unwrap(),
            &CMatrix::identity(2),
            1e-15
        ));
        let c2 = 2.0_f64.cosh();
        let s2 = 2.0_f64.sinh();
        let p = &CMatrix::identity(2).scale_re(c2) + &CMatrix::sigma_z().scale_re(s2);
        let expected =
            &CMatrix::identity(2).scale_re(1.0_f64.cosh()) + &CMatrix::sigma_z().scale_re(1.0_f64.sinh());
        let eta = herm_sqrt(&p).unwrap();
        assert!(close(&eta, &expected, 1e-14));
        assert!(close(&(&eta * &eta), &p, 1e-13));
    }

    #[test]
    fn herm_sqrt_errors() {
        assert!(matches!(
            herm_sqrt(&CMatrix::sigma_z()),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let skew = CMatrix::from_rows([[ONE, ONE], [ZERO, ONE]]);
        assert!(matches!(herm_sqrt(&skew), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn expm2_examples() {
        let t = 0.7;
        let u = expm2(&CMatrix::sigma_x().scale(c64(0.0, -t))).unwrap();
        let expected = &CMatrix::identity(2).scale_re(t.cos()) - &CMatrix::sigma_x().scale(c64(0.0, t.sin()));
        assert!((&u - &expected).max_abs() < 1e-15);
        let d = expm2(&CMatrix::diag(&[c64(1.0, 0.0), c64(-2.0, 0.5)])).unwrap();
        assert!((d[(0, 0)] - c64(1.0, 0.0).exp()).norm() < 1e-14);
        assert!((d[(1, 1)] - c64(-2.0, 0.5).exp()).norm() < 1e-14);
        let nil = expm2(&CMatrix::from_real_rows([[0.0, 1.0], [0.0, 0.0]])).unwrap();
        assert_eq!(nil, CMatrix::from_real_rows([[1.0, 1.0], [0.0, 1.0]]));
    }

    #[test]
    fn polar_factor_is_unitary() {
        let a = CMatrix::from_rows([[c64(3.0, 1.0), c64(0.2, 0.0)], [c64(0.0, -1.0), c64(0.5, 0.5)]]);
        let w = polar_unitary(&a, None).unwrap();
        assert!(close(&(&w * &w.adjoint()), &CMatrix::identity(2), 1e-14));
        // P = A W† must be Hermitian positive definite
        let p = &a * &w.adjoint();
        assert!(p.hermitian_residual() < 1e-14);
        assert!(min_hermitian_eigenvalue(&p) > 0.0);

        let b = CMatrix::from_rows([
            [c64(1.0, 0.0), c64(2.0, 0.0), c64(0.0, 1.0)],
            [c64(0.0, 0.0), c64(1.0, 0.5), c64(0.0, 0.0)],
            [c64(0.3, 0.0), c64(0.0, 0.0), c64(2.0, 0.0)],
        ]);
        let w3 = polar_unitary(&b, None).unwrap();
        assert!(close(&(&w3 * &w3.adjoint()), &CMatrix::identity(3), 1e-12));
        let p3 = &b * &w3.adjoint();
        assert!(p3.hermitian_residual() < 1e-12);
    }
}
