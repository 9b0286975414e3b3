//! Gaussian-state algebra in natural units.
//!
//! Conventions: ħ = 1, quadratures ordered `(x₁, p₁, x₂, p₂, …)` with
//! `a = (x + i p)/√2`, so the vacuum covariance is `I/2` and a coherent
//! state `|α⟩` has mean `√2 (Re α, Im α)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative tolerance on covariance symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Symplectic eigenvalues may dip this far below 1/2 and still count as physical.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Symplectic eigenvalues within this distance of 1/2 count as pure.
pub const PURITY_TOL: f64 = 1e-8;
/// Tolerance on `S Ω Sᵀ = Ω`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// Block-diagonal symplectic form with 2×2 blocks `[[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Symplectic eigenvalues of a covariance matrix, ascending.
///
/// With `M = σ^{1/2} Ω σ^{1/2}` (antisymmetric), `MᵀM` has eigenvalues
/// `ν_k²`, each twice.
pub fn symplectic_eigenvalues(cov: &DMatrix<f64>) -> Vec<f64> {
    let n = cov.nrows() / 2;
    let eig = SymmetricEigen::new(cov.clone());
    let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let sqrt_cov = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
    let m = &sqrt_cov * symplectic_form(n) * &sqrt_cov;
    let mtm = m.transpose() * &m;
    let mut squares: Vec<f64> = SymmetricEigen::new(mtm).eigenvalues.iter().copied().collect();
    squares.sort_by(|a, b| a.total_cmp(b));
    squares.iter().step_by(2).map(|v| v.max(0.0).sqrt()).collect()
}

/// Mean quadrature vector and covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    /// Validates symmetry and physicality (all symplectic eigenvalues ≥ 1/2).
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::param(
                "mean",
                format!("length {dim} is not a positive even number"),
            ));
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: cov.nrows(),
            });
        }
        let scale = cov.amax().max(1.0);
        if (&cov - cov.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(Error::param("cov", "covariance matrix is not symmetric"));
        }
        let nu_min = symplectic_eigenvalues(&cov)[0];
        if nu_min < 0.5 - PHYSICALITY_TOL {
            return Err(Error::Unphysical { nu: nu_min, time: 0.0 });
        }
        Ok(Self { mean, cov })
    }

    /// Skips the physicality check. Callers guarantee the invariants.
    pub(crate) fn from_parts_unchecked(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self { mean, cov }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        assert!(n_modes >= 1, "vacuum needs at least one mode");
        let dim = 2 * n_modes;
        Self {
            mean: DVector::zeros(dim),
            cov: DMatrix::identity(dim, dim) * 0.5,
        }
    }

    pub fn coherent(alpha: Complex64) -> Self {
        let r2 = std::f64::consts::SQRT_2;
        Self {
            mean: DVector::from_vec(vec![r2 * alpha.re, r2 * alpha.im]),
            cov: DMatrix::identity(2, 2) * 0.5,
        }
    }

    pub fn thermal(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::param("nbar", format!("{nbar} must be finite and non-negative")));
        }
        Ok(Self {
            mean: DVector::zeros(2),
            cov: DMatrix::identity(2, 2) * (nbar + 0.5),
        })
    }

    /// Squeezed vacuum with variance `e^{-2s}/2` along the direction at
    /// angle `φ/2` in the `(x, p)` plane.
    pub fn squeezed_vacuum(spec: SqueezingSpec) -> Self {
        let rot = rotation(spec.phi / 2.0);
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![
            0.5 * (-2.0 * spec.s).exp(),
            0.5 * (2.0 * spec.s).exp(),
        ]));
        let cov = &rot * diag * rot.transpose();
        Self {
            mean: DVector::zeros(2),
            cov: symmetrize(cov),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (a, b) = (self.mean.len(), other.mean.len());
        let mut mean = DVector::zeros(a + b);
        mean.rows_mut(0, a).copy_from(&self.mean);
        mean.rows_mut(a, b).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(a + b, a + b);
        cov.view_mut((0, 0), (a, a)).copy_from(&self.cov);
        cov.view_mut((a, a), (b, b)).copy_from(&other.cov);
        GaussianState { mean, cov }
    }

    /// Adds the phase-space shift of the displacement `D(β)` on `mode`.
    pub fn displace(&self, mode: usize, beta: Complex64) -> Result<GaussianState> {
        self.check_mode(mode)?;
        let mut out = self.clone();
        out.mean[2 * mode] += std::f64::consts::SQRT_2 * beta.re;
        out.mean[2 * mode + 1] += std::f64::consts::SQRT_2 * beta.im;
        Ok(out)
    }

    /// Coherent amplitude `(x + i p)/√2` of the given mode's mean.
    pub fn amplitude(&self, mode: usize) -> Result<Complex64> {
        self.check_mode(mode)?;
        let r2 = std::f64::consts::SQRT_2;
        Ok(Complex64::new(self.mean[2 * mode] / r2, self.mean[2 * mode + 1] / r2))
    }

    pub fn apply(&self, map: &SymplecticMap) -> Result<GaussianState> {
        if map.dim() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: map.dim(),
            });
        }
        let s = &map.matrix;
        Ok(GaussianState {
            mean: s * &self.mean + &map.displacement,
            cov: symmetrize(s * &self.cov * s.transpose()),
        })
    }

    /// Reduced single-mode state of `keep`.
    pub fn partial_trace(&self, keep: usize) -> Result<GaussianState> {
        self.check_mode(keep)?;
        let i = 2 * keep;
        Ok(GaussianState {
            mean: self.mean.rows(i, 2).into_owned(),
            cov: self.cov.view((i, i), (2, 2)).into_owned(),
        })
    }

    /// Smallest variance over all rotated quadratures of `mode`.
    pub fn min_quadrature_variance(&self, mode: usize) -> Result<f64> {
        self.check_mode(mode)?;
        let i = 2 * mode;
        let (a, b, c) = (self.cov[(i, i)], self.cov[(i, i + 1)], self.cov[(i + 1, i + 1)]);
        let half_diff = 0.5 * (a - c);
        Ok(0.5 * (a + c) - half_diff.hypot(b))
    }

    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        symplectic_eigenvalues(&self.cov)
    }

    pub fn is_pure(&self) -> bool {
        self.symplectic_eigenvalues()
            .iter()
            .all(|nu| (nu - 0.5).abs() <= PURITY_TOL)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(Error::param(
                "mode",
                format!("index {mode} out of range for {} modes", self.n_modes()),
            ));
        }
        Ok(())
    }
}

pub(crate) fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Single-mode squeezing parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingSpec {
    pub s: f64,
    pub phi: f64,
}

impl SqueezingSpec {
    pub fn new(s: f64, phi: f64) -> Self {
        Self { s, phi }
    }
}

/// Affine symplectic map `r ↦ S r + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMap {
    matrix: DMatrix<f64>,
    displacement: DVector<f64>,
}

impl SymplecticMap {
    pub fn new(matrix: DMatrix<f64>, displacement: DVector<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || !dim.is_multiple_of(2) || dim == 0 {
            return Err(Error::param("matrix", "must be square with even dimension"));
        }
        if displacement.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: displacement.len(),
            });
        }
        let map = Self { matrix, displacement };
        let err = map.symplectic_error();
        if err > SYMPLECTIC_TOL {
            return Err(Error::param(
                "matrix",
                format!("not symplectic (|SΩSᵀ − Ω| = {err:.3e})"),
            ));
        }
        Ok(map)
    }

    pub fn identity(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        Self {
            matrix: DMatrix::identity(dim, dim),
            displacement: DVector::zeros(dim),
        }
    }

    /// Phase-space rotation `e^{-iθ n̂}` on one mode of an `n_modes` system.
    pub fn phase_rotation(n_modes: usize, mode: usize, theta: f64) -> Self {
        let mut map = Self::identity(n_modes);
        let i = 2 * mode;
        // a -> a e^{-iθ}: (x, p) rotates clockwise by θ.
        map.matrix.view_mut((i, i), (2, 2)).copy_from(&rotation(-theta));
        map
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &SymplecticMap) -> Result<SymplecticMap> {
        if self.dim() != first.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: first.dim(),
            });
        }
        Ok(SymplecticMap {
            matrix: &self.matrix * &first.matrix,
            displacement: &self.matrix * &first.displacement + &self.displacement,
        })
    }

    pub fn symplectic_error(&self) -> f64 {
        let omega = symplectic_form(self.dim() / 2);
        (&self.matrix * &omega * self.matrix.transpose() - omega).amax()
    }
}

/// Interaction-frame beam splitter `exp(-iθ(a₁a₂† + a₁†a₂))` on two modes.
///
/// Heisenberg action: `a₁ ↦ a₁ cos θ − i a₂ sin θ`, `a₂ ↦ a₂ cos θ − i a₁ sin θ`.
pub fn beamsplitter_map(theta: f64) -> SymplecticMap {
    let (s, c) = theta.sin_cos();
    #[rustfmt::skip]
    let matrix = DMatrix::from_row_slice(4, 4, &[
        c,   0.0, 0.0, s,
        0.0, c,   -s,  0.0,
        0.0, s,   c,   0.0,
        -s,  0.0, 0.0, c,
    ]);
    SymplecticMap {
        matrix,
        displacement: DVector::zeros(4),
    }
}

/// Result of a Gaussian overlap, flagging when neither input is pure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    /// `Tr[ρ₁ρ₂]`.
    pub value: f64,
    /// True when at least one input is pure, i.e. `value` is the fidelity.
    pub is_fidelity: bool,
}

/// `Tr[ρ₁ρ₂] = det(σ₁+σ₂)^{-1/2} exp(-½ δᵀ(σ₁+σ₂)⁻¹δ)`, `δ = r̄₁ − r̄₂`.
pub fn overlap_report(a: &GaussianState, b: &GaussianState) -> Result<Overlap> {
    if a.mean.len() != b.mean.len() {
        return Err(Error::DimensionMismatch {
            expected: a.mean.len(),
            actual: b.mean.len(),
        });
    }
    let sum = &a.cov + &b.cov;
    let delta = &a.mean - &b.mean;
    let chol = sum
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NotPositiveDefinite(sum.determinant()))?;
    let det: f64 = chol.l().diagonal().iter().map(|d| d * d).product();
    let quad = delta.dot(&chol.solve(&delta));
    Ok(Overlap {
        value: (-0.5 * quad).exp() / det.sqrt(),
        is_fidelity: a.is_pure() || b.is_pure(),
    })
}

/// Overlap `Tr[ρ₁ρ₂]`; equals the fidelity when one state is pure.
pub fn overlap(a: &GaussianState, b: &GaussianState) -> Result<f64> {
    overlap_report(a, b).map(|o| o.value)
}
