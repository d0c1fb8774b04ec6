//! Biorthogonal bases, associated states and the pseudo-Hermiticity
//! operator `S`.

use crate::error::{Error, Result};
use crate::linalg::{
    c64, eig_with, herm_sqrt, inner, norm, scale_vec, CMatrix, Spectrum, Tolerances, C64,
};

/// Tolerance used when checking `f_mn = f_nm*`.
pub const BIORTH_HERMITIAN_TOL: f64 = 1e-10;

/// Relative tolerance on `Im E_n` (in units of `‖H‖`) for a spectrum to
/// count as real.
pub const REAL_SPECTRUM_TOL: f64 = 1e-8;

/// Biorthonormal eigenbasis of `h`.
///
/// Right vectors keep unit 2-norm and the phase fixed by [`eig_with`]; all of
/// the normalisation goes into the left vectors, so `⟨n_L|n_R⟩ = 1`.
pub fn build_basis(h: &CMatrix) -> Result<Spectrum> {
    build_basis_with(h, &Tolerances::default())
}

pub fn build_basis_with(h: &CMatrix, tol: &Tolerances) -> Result<Spectrum> {
    let mut spec = eig_with(h, tol)?;
    for n in 0..spec.dim() {
        let overlap = inner(&spec.left[n], &spec.right[n]);
        if overlap.norm() == 0.0 {
            return Err(Error::NearDegenerate { gap: spec.gap });
        }
        // ⟨L/c*|R⟩ = ⟨L|R⟩/c, so rescaling by 1/conj(overlap) gives 1
        spec.left[n] = scale_vec(&spec.left[n], c64(1.0, 0.0) / overlap.conj());
    }
    Ok(spec)
}

/// Largest `|⟨m_L|n_R⟩ - δ_mn|` over all pairs.
pub fn biorthonormality_residual(basis: &Spectrum) -> f64 {
    let n = basis.dim();
    let mut worst = 0.0_f64;
    for m in 0..n {
        for k in 0..n {
            let target = if m == k { 1.0 } else { 0.0 };
            let r = (inner(&basis.left[m], &basis.right[k]) - target).norm();
            worst = worst.max(r);
        }
    }
    worst
}

/// `Σ_m |m⟩_R⟨m_L|`, the identity for a complete biorthonormal basis.
pub fn completeness(basis: &Spectrum) -> CMatrix {
    let mut acc = CMatrix::zeros(basis.dim());
    for (r, l) in basis.right.iter().zip(&basis.left) {
        acc = &acc + &CMatrix::outer(r, l);
    }
    acc
}

/// A state expanded in the right eigenvectors, `|ψ⟩ = Σ_n c_n |n⟩_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiorthState {
    coefficients: Vec<C64>,
    basis: Spectrum,
}

impl BiorthState {
    /// Builds a state directly from coefficients, normalised so that
    /// `Σ|c_n|² = 1`.
    pub fn from_coefficients(coefficients: Vec<C64>, basis: &Spectrum) -> Result<Self> {
        if coefficients.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: coefficients.len(),
            });
        }
        let size = norm(&coefficients);
        if size == 0.0 || !size.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(BiorthState {
            coefficients: scale_vec(&coefficients, c64(1.0 / size, 0.0)),
            basis: basis.clone(),
        })
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn basis(&self) -> &Spectrum {
        &self.basis
    }

    /// `|ψ⟩ = Σ_n c_n |n⟩_R`.
    pub fn ket(&self) -> Vec<C64> {
        combine(&self.coefficients, &self.basis.right)
    }
}

fn combine(coefficients: &[C64], vectors: &[Vec<C64>]) -> Vec<C64> {
    let dim = vectors.first().map_or(0, Vec::len);
    let mut out = vec![C64::default(); dim];
    for (c, v) in coefficients.iter().zip(vectors) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out
}

/// `c_n = ⟨n_L|ψ⟩`, globally rescaled to `Σ|c_n|² = 1`.
pub fn decompose(psi: &[C64], basis: &Spectrum) -> Result<BiorthState> {
    if psi.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: psi.len(),
        });
    }
    if norm(psi) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let c = basis.left.iter().map(|l| inner(l, psi)).collect();
    BiorthState::from_coefficients(c, basis)
}

/// `|ψ̃⟩ = Σ_n c_n |n⟩_L`.
pub fn associated_state(state: &BiorthState) -> Vec<C64> {
    combine(&state.coefficients, &state.basis.left)
}

/// `⟨ψ̃|F|ψ⟩`.
pub fn biorth_expectation(f: &CMatrix, state: &BiorthState) -> Result<C64> {
    if f.dim() != state.basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.basis.dim(),
            found: f.dim(),
        });
    }
    Ok(f.sandwich(&associated_state(state), &state.ket()))
}

/// Matrix elements `f_mn = ⟨m_L|F|n⟩_R`.
pub fn biorth_elements(f: &CMatrix, basis: &Spectrum) -> Vec<Vec<C64>> {
    basis
        .left
        .iter()
        .map(|l| basis.right.iter().map(|r| f.sandwich(l, r)).collect())
        .collect()
}

/// `F = Σ_mn f_mn |m⟩_R⟨n_L|`, the inverse of [`biorth_elements`].
pub fn from_biorth_elements(f: &[Vec<C64>], basis: &Spectrum) -> CMatrix {
    let n = basis.dim();
    let mut acc = CMatrix::zeros(n);
    for m in 0..n {
        for k in 0..n {
            let term = CMatrix::outer(&basis.right[m], &basis.left[k]).scale(f[m][k]);
            acc = &acc + &term;
        }
    }
    acc
}

/// Whether `f_mn = f_nm*` within [`BIORTH_HERMITIAN_TOL`], i.e. whether every
/// biorthogonal expectation value of `f` is real.
pub fn is_biorth_hermitian(f: &CMatrix, basis: &Spectrum) -> bool {
    let e = biorth_elements(f, basis);
    let n = basis.dim();
    (0..n).all(|m| (0..n).all(|k| (e[m][k] - e[k][m].conj()).norm() <= BIORTH_HERMITIAN_TOL))
}

/// `S`, its inverse and its Hermitian square root.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoHermitianPair {
    pub s: CMatrix,
    pub s_inv: CMatrix,
    pub s_sqrt: CMatrix,
}

/// `S = Σ|n⟩_L⟨n_L|` and `S⁻¹ = Σ|n⟩_R⟨n_R|` for a biorthonormal basis with
/// real spectrum; `SHS⁻¹ = H†`.
pub fn pseudo_s(basis: &Spectrum) -> Result<PseudoHermitianPair> {
    let scale = basis.reconstruct().frobenius_norm().max(f64::MIN_POSITIVE);
    let max_imag = basis
        .eigenvalues
        .iter()
        .map(|e| e.im.abs())
        .fold(0.0, f64::max);
    if max_imag > REAL_SPECTRUM_TOL * scale {
        return Err(Error::NoRealSpectrum { max_imag });
    }
    let n = basis.dim();
    let mut s = CMatrix::zeros(n);
    let mut s_inv = CMatrix::zeros(n);
    for (r, l) in basis.right.iter().zip(&basis.left) {
        s = &s + &CMatrix::outer(l, l);
        s_inv = &s_inv + &CMatrix::outer(r, r);
    }
    let s_sqrt = herm_sqrt(&s)?;
    Ok(PseudoHermitianPair { s, s_inv, s_sqrt })
}

/// `F̃ = √S⁻¹ F √S`, so that `⟨Ψ|F|Ψ⟩ = ⟨ψ̃|F̃|ψ⟩` with `|Ψ⟩ = √S|ψ⟩`.
pub fn map_to_hermitian_static(f: &CMatrix, pair: &PseudoHermitianPair) -> Result<CMatrix> {
    let root_inv = pair.s_sqrt.inverse()?;
    Ok(&(&root_inv * f) * &pair.s_sqrt)
}

/// `√S H √S⁻¹`, Hermitian for a pseudo-Hermitian `H`.
pub fn hermitian_image(h: &CMatrix, pair: &PseudoHermitianPair) -> Result<CMatrix> {
    let root_inv = pair.s_sqrt.inverse()?;
    Ok(&(&pair.s_sqrt * h) * &root_inv)
}
