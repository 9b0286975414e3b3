//! Truncated Fock-space brute force, independent of the Gaussian formalism.
//!
//! Everything here works on dense complex matrices in the number basis.
//! Two-mode operators use the index `n₁·dim + n₂` (mode 1 major), matching
//! the Kronecker product `A ⊗ B`.
//!
//! Operators that conserve the total photon number (beam splitters, the
//! classical-threshold operator `A_τ`) are built block by block in that
//! number, which keeps the cost polynomial in `dim` rather than `dim⁶`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::gaussian::SqueezingSpec;
use crate::quadrature::GaussLaguerre;
use crate::{Error, Result};

/// Largest admissible truncated tail weight for state constructors.
pub const TAIL_TOL: f64 = 1e-8;
/// Largest imaginary residue accepted from `Tr[ab]`.
pub const IMAG_TOL: f64 = 1e-10;
/// Minimum node count for either quadrature direction.
pub const MIN_NODES: usize = 32;
/// Largest change tolerated when the node counts are doubled.
pub const CONVERGENCE_TOL: f64 = 1e-4;

type C = Complex64;

/// Dense operator on one or two truncated modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub dim: usize,
    pub modes: usize,
    pub matrix: DMatrix<C>,
}

impl FockOperator {
    pub fn new(dim: usize, modes: usize, matrix: DMatrix<C>) -> Result<Self> {
        let size = dim.pow(modes as u32);
        if matrix.nrows() != size || matrix.ncols() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                actual: matrix.nrows(),
            });
        }
        Ok(Self { dim, modes, matrix })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_ket(ket: &DVector<C>, dim: usize, modes: usize) -> Result<Self> {
        Self::new(dim, modes, ket * ket.adjoint())
    }

    pub fn identity(dim: usize, modes: usize) -> Self {
        let size = dim.pow(modes as u32);
        Self {
            dim,
            modes,
            matrix: DMatrix::identity(size, size),
        }
    }

    pub fn trace(&self) -> C {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()) * C::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    pub fn tensor(&self, other: &FockOperator) -> Result<FockOperator> {
        if self.modes != 1 || other.modes != 1 || self.dim != other.dim {
            return Err(Error::param("tensor", "needs two single-mode operators of equal dim"));
        }
        Ok(FockOperator {
            dim: self.dim,
            modes: 2,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, unitary: &FockOperator) -> Result<FockOperator> {
        if unitary.matrix.shape() != self.matrix.shape() {
            return Err(Error::DimensionMismatch {
                expected: self.matrix.nrows(),
                actual: unitary.matrix.nrows(),
            });
        }
        Ok(FockOperator {
            dim: self.dim,
            modes: self.modes,
            matrix: &unitary.matrix * &self.matrix * unitary.matrix.adjoint(),
        })
    }

    /// Reduced single-mode operator of a two-mode operator.
    pub fn partial_trace(&self, keep: usize) -> Result<FockOperator> {
        if self.modes != 2 || keep > 1 {
            return Err(Error::param(
                "keep",
                "partial trace needs a two-mode operator and keep ∈ {0, 1}",
            ));
        }
        let d = self.dim;
        let mut out = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = C::new(0.0, 0.0);
                for k in 0..d {
                    let (r, c) = if keep == 0 {
                        (i * d + k, j * d + k)
                    } else {
                        (k * d + i, k * d + j)
                    };
                    acc += self.matrix[(r, c)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(FockOperator {
            dim: d,
            modes: 1,
            matrix: out,
        })
    }

    /// Diagonal in the number basis.
    pub fn photon_distribution(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|z| z.re).collect()
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// `⟨n|β⟩` for `n < dim`, no truncation check.
pub fn coherent_ket(beta: C, dim: usize) -> DVector<C> {
    let mut ket = DVector::zeros(dim);
    if dim == 0 {
        return ket;
    }
    ket[0] = C::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 1..dim {
        ket[n] = ket[n - 1] * beta / (n as f64).sqrt();
    }
    ket
}

/// Squeezed vacuum `S(ξ)|0⟩`, `ξ = s e^{iφ}`:
/// `c_{2n} = (−e^{iφ} tanh s)ⁿ √((2n)!) / (2ⁿ n! √(cosh s))`.
pub fn squeezed_ket(spec: SqueezingSpec, dim: usize) -> DVector<C> {
    let mut ket = DVector::zeros(dim);
    if dim == 0 {
        return ket;
    }
    let ratio = -C::from_polar(1.0, spec.phi) * spec.s.tanh();
    ket[0] = C::new(1.0 / spec.s.cosh().sqrt(), 0.0);
    let mut n = 0;
    while 2 * n + 2 < dim {
        let nf = n as f64;
        let factor = ((2.0 * nf + 1.0) * (2.0 * nf + 2.0)).sqrt() / (2.0 * (nf + 1.0));
        ket[2 * n + 2] = ket[2 * n] * ratio * factor;
        n += 1;
    }
    ket
}

fn check_tail(dim: usize, tail: f64) -> Result<()> {
    if !(tail < TAIL_TOL) {
        return Err(Error::Truncation { dim, tail });
    }
    Ok(())
}

fn ket_tail(ket: &DVector<C>) -> f64 {
    (1.0 - ket.norm_squared()).max(0.0)
}

/// Reduced single-mode state of a two-mode pure state `|ψ⟩`, without
/// forming `|ψ⟩⟨ψ|`.
pub fn reduced_from_ket(ket: &DVector<C>, dim: usize, keep: usize) -> Result<FockOperator> {
    if ket.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            actual: ket.len(),
        });
    }
    // psi[(n1, n2)] = ⟨n1, n2|ψ⟩.
    let psi = DMatrix::from_row_slice(dim, dim, ket.as_slice());
    let matrix = match keep {
        0 => &psi * psi.adjoint(),
        1 => psi.transpose() * psi.conjugate(),
        _ => return Err(Error::param("keep", "must be 0 or 1")),
    };
    FockOperator::new(dim, 1, matrix)
}

/// Smallest `dim` the coherent-state rule `|α|² + 6|α| + 12` recommends.
pub fn coherent_min_dim(alpha: C) -> usize {
    let a = alpha.norm();
    (a * a + 6.0 * a + 12.0).ceil() as usize
}

pub fn fock_coherent(alpha: C, dim: usize) -> Result<FockOperator> {
    let ket = coherent_ket(alpha, dim);
    check_tail(dim, ket_tail(&ket))?;
    FockOperator::from_ket(&ket, dim, 1)
}

/// Geometric number distribution `n̄ⁿ/(1+n̄)ⁿ⁺¹`.
pub fn fock_thermal(nbar: f64, dim: usize) -> Result<FockOperator> {
    if !(nbar >= 0.0) {
        return Err(Error::param("nbar", format!("{nbar} must be non-negative")));
    }
    let q = nbar / (1.0 + nbar);
    check_tail(dim, q.powi(dim as i32))?;
    let diag = DVector::from_iterator(dim, (0..dim).map(|n| C::new(q.powi(n as i32) / (1.0 + nbar), 0.0)));
    FockOperator::new(dim, 1, DMatrix::from_diagonal(&diag))
}

pub fn fock_squeezed(spec: SqueezingSpec, dim: usize) -> Result<FockOperator> {
    let ket = squeezed_ket(spec, dim);
    check_tail(dim, ket_tail(&ket))?;
    FockOperator::from_ket(&ket, dim, 1)
}

/// `exp(c_down b₁b₂† + c_up b₁†b₂)` on two modes, exponentiated block by
/// block in the total photon number.
fn number_conserving_unitary(dim: usize, c_down: C, c_up: C) -> FockOperator {
    let size = dim * dim;
    let mut out = DMatrix::<C>::zeros(size, size);
    for total in 0..=2 * (dim - 1) {
        let lo = total.saturating_sub(dim - 1);
        let hi = total.min(dim - 1);
        let len = hi - lo + 1;
        let mut gen = DMatrix::<C>::zeros(len, len);
        for (j, n1) in (lo..=hi).enumerate() {
            let n2 = total - n1;
            // b₁b₂†: n1 → n1 − 1.
            if n1 > lo {
                gen[(j - 1, j)] += c_down * ((n1 * (n2 + 1)) as f64).sqrt();
            }
            // b₁†b₂: n1 → n1 + 1.
            if n1 < hi {
                gen[(j + 1, j)] += c_up * (((n1 + 1) * n2) as f64).sqrt();
            }
        }
        let block = gen.exp();
        for (a, m1) in (lo..=hi).enumerate() {
            for (b, n1) in (lo..=hi).enumerate() {
                out[(m1 * dim + (total - m1), n1 * dim + (total - n1))] = block[(a, b)];
            }
        }
    }
    FockOperator {
        dim,
        modes: 2,
        matrix: out,
    }
}

/// `B_θ = exp(θ(b₁b₂† − b₁†b₂))`.
pub fn fock_beamsplitter(theta: f64, dim: usize) -> Result<FockOperator> {
    if dim < 2 {
        return Err(Error::param("dim", "beam splitter needs dim ≥ 2"));
    }
    Ok(number_conserving_unitary(dim, C::new(theta, 0.0), C::new(-theta, 0.0)))
}

/// `exp(−iθ(a₁a₂† + a₁†a₂))`, the interaction-frame coupling unitary.
pub fn fock_rwa_unitary(theta: f64, dim: usize) -> Result<FockOperator> {
    if dim < 2 {
        return Err(Error::param("dim", "coupling unitary needs dim ≥ 2"));
    }
    let c = C::new(0.0, -theta);
    Ok(number_conserving_unitary(dim, c, c))
}

/// `max |U†U − I|` restricted to states with total photon number below
/// `dim/2`, where truncation does not act.
pub fn low_photon_unitarity_error(unitary: &FockOperator) -> f64 {
    let d = unitary.dim;
    let utu = unitary.matrix.adjoint() * &unitary.matrix;
    let mut worst: f64 = 0.0;
    for n1 in 0..d {
        for n2 in 0..d {
            if 2 * (n1 + n2) >= d {
                continue;
            }
            for m1 in 0..d {
                for m2 in 0..d {
                    if 2 * (m1 + m2) >= d {
                        continue;
                    }
                    let expected = if (n1, n2) == (m1, m2) { 1.0 } else { 0.0 };
                    let z = utu[(m1 * d + m2, n1 * d + n2)] - expected;
                    worst = worst.max(z.norm());
                }
            }
        }
    }
    worst
}

/// `Tr[ab]`, real up to [`IMAG_TOL`].
pub fn fock_overlap(a: &FockOperator, b: &FockOperator) -> Result<f64> {
    if a.dim != b.dim || a.modes != b.modes {
        return Err(Error::DimensionMismatch {
            expected: a.matrix.nrows(),
            actual: b.matrix.nrows(),
        });
    }
    let tr: C = a
        .matrix
        .iter()
        .zip(b.matrix.transpose().iter())
        .map(|(x, y)| x * y)
        .sum();
    if tr.im.abs() > IMAG_TOL {
        return Err(Error::Consistency(format!("Tr[ab] has imaginary part {:.3e}", tr.im)));
    }
    Ok(tr.re)
}

/// Total-variation distance `½ Σ|p − q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Prior-averaged input `τ = λ/(1+λ) Σ (1+λ)⁻ⁿ |n⟩⟨n|`, truncated.
pub fn average_input_state(lambda: f64, dim: usize) -> Result<FockOperator> {
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", format!("{lambda} must be positive")));
    }
    let q = 1.0 / (1.0 + lambda);
    let diag = DVector::from_iterator(dim, (0..dim).map(|n| C::new(lambda * q * q.powi(n as i32), 0.0)));
    FockOperator::new(dim, 1, DMatrix::from_diagonal(&diag))
}

/// One total-photon-number block of `A_τ`; basis `|n₁, N − n₁⟩`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumberBlock {
    pub total: usize,
    pub first_n1: usize,
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
}

/// Quadrature-assembled `A_τ = χ ∫ d²α/π |gα⟩⟨gα| ⊗ |√χ α⟩⟨√χ α|`, `χ = 1+λ`.
///
/// The integrand is invariant under a common phase rotation of both modes,
/// so `A_τ` only couples states of equal total photon number. Within a
/// block the angular average is exactly one, and the radial integral
/// `∫₀^∞ e^{−(g²+χ)u} u^N du` is evaluated by Gauss–Laguerre.
#[derive(Debug, Clone, PartialEq)]
pub struct ATau {
    pub lambda: f64,
    pub g: f64,
    pub dim: usize,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    pub blocks: Vec<NumberBlock>,
}

impl ATau {
    /// `⟨0,0|A_τ|0,0⟩`.
    pub fn vacuum_element(&self) -> f64 {
        self.blocks[0].matrix[(0, 0)]
    }

    /// Largest eigenvalue over all blocks, i.e. the operator norm.
    pub fn max_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| SymmetricEigen::new(b.matrix.clone()).eigenvalues.max())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest eigenvalue over the blocks with `N < dim`, which truncation
    /// leaves complete.
    pub fn max_eigenvalue_complete_blocks(&self) -> f64 {
        self.blocks
            .iter()
            .filter(|b| b.total < self.dim)
            .map(|b| SymmetricEigen::new(b.matrix.clone()).eigenvalues.max())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_dense(&self) -> FockOperator {
        let d = self.dim;
        let mut m = DMatrix::<C>::zeros(d * d, d * d);
        for block in &self.blocks {
            let len = block.matrix.nrows();
            for a in 0..len {
                for b in 0..len {
                    let (m1, n1) = (block.first_n1 + a, block.first_n1 + b);
                    m[(m1 * d + block.total - m1, n1 * d + block.total - n1)] = C::new(block.matrix[(a, b)], 0.0);
                }
            }
        }
        FockOperator {
            dim: d,
            modes: 2,
            matrix: m,
        }
    }

    fn max_abs_diff(&self, other: &ATau) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (&a.matrix - &b.matrix).amax())
            .fold(0.0, f64::max)
    }
}

fn validate_a_tau_args(lambda: f64, g: f64, dim: usize, radial: usize, angular: usize) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", format!("{lambda} must be positive")));
    }
    if !(0.0..=1.0).contains(&g) {
        return Err(Error::param("g", format!("{g} outside [0, 1]")));
    }
    if dim < 1 {
        return Err(Error::param("dim", "must be at least 1"));
    }
    if radial < MIN_NODES || angular < MIN_NODES {
        return Err(Error::param(
            "nodes",
            format!("need at least {MIN_NODES} radial and angular nodes, got {radial}×{angular}"),
        ));
    }
    Ok(())
}

fn assemble_a_tau(lambda: f64, g: f64, dim: usize, radial: usize, angular: usize) -> Result<ATau> {
    let chi = 1.0 + lambda;
    let c = g * g + chi;
    let rule = GaussLaguerre::new(radial)?;
    let lnf = ln_factorials(2 * dim);
    let ln_chi = chi.ln();
    let ln_c = c.ln();
    let ln_nodes: Vec<f64> = rule.nodes.iter().map(|x| x.ln()).collect();
    // ln ∫₀^∞ e^{−cu} u^N du by log-sum-exp over the rule.
    let ln_radial: Vec<f64> = (0..=2 * (dim - 1))
        .map(|total| {
            let terms: Vec<f64> = rule
                .log_weights
                .iter()
                .zip(&ln_nodes)
                .map(|(lw, lx)| lw + total as f64 * lx)
                .collect();
            let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = terms.iter().map(|t| (t - peak).exp()).sum();
            peak + sum.ln() - (total as f64 + 1.0) * ln_c
        })
        .collect();
    let g_power = |k: usize| if k == 0 { 1.0 } else { g.powi(k as i32) };

    let blocks = (0..=2 * (dim - 1))
        .map(|total| {
            let lo = total.saturating_sub(dim - 1);
            let hi = total.min(dim - 1);
            let len = hi - lo + 1;
            let mut m = DMatrix::<f64>::zeros(len, len);
            for a in 0..len {
                for b in a..len {
                    let (m1, n1) = (lo + a, lo + b);
                    let (m2, n2) = (total - m1, total - n1);
                    let ln_mag = ln_chi + 0.5 * (m2 + n2) as f64 * ln_chi
                        - 0.5 * (lnf[m1] + lnf[n1] + lnf[m2] + lnf[n2])
                        + ln_radial[total];
                    let v = g_power(m1 + n1) * ln_mag.exp();
                    m[(a, b)] = v;
                    m[(b, a)] = v;
                }
            }
            NumberBlock {
                total,
                first_n1: lo,
                matrix: m,
            }
        })
        .collect();
    Ok(ATau {
        lambda,
        g,
        dim,
        radial_nodes: radial,
        angular_nodes: angular,
        blocks,
    })
}

/// Builds `A_τ` and checks that doubling both node counts changes no matrix
/// element by more than [`CONVERGENCE_TOL`].
pub fn build_a_tau(lambda: f64, g: f64, dim: usize, radial_nodes: usize, angular_nodes: usize) -> Result<ATau> {
    validate_a_tau_args(lambda, g, dim, radial_nodes, angular_nodes)?;
    let a = assemble_a_tau(lambda, g, dim, radial_nodes, angular_nodes)?;
    let refined_radial = (2 * radial_nodes).min(crate::quadrature::MAX_NODES);
    if refined_radial > radial_nodes {
        let b = assemble_a_tau(lambda, g, dim, refined_radial, 2 * angular_nodes)?;
        let change = a.max_abs_diff(&b);
        if !(change <= CONVERGENCE_TOL) {
            return Err(Error::Convergence { change });
        }
    }
    Ok(a)
}

/// `A_τ` as a literal sum of rank-one terms over the full radial × angular
/// product grid. Cost grows like `nodes · dim⁴`; meant for small `dim`.
pub fn a_tau_rank_one_sum(
    lambda: f64,
    g: f64,
    dim: usize,
    radial_nodes: usize,
    angular_nodes: usize,
) -> Result<FockOperator> {
    validate_a_tau_args(lambda, g, dim, radial_nodes, angular_nodes)?;
    let chi = 1.0 + lambda;
    let c = g * g + chi;
    let rule = GaussLaguerre::new(radial_nodes)?;
    let size = dim * dim;
    let mut acc = DMatrix::<C>::zeros(size, size);
    // Unnormalised kets β^n/√n!; the Gaussian factors of both coherent
    // states combine into the e^{−cu} Laguerre weight.
    let raw_ket = |beta: C| {
        let mut k = DVector::<C>::zeros(dim);
        k[0] = C::new(1.0, 0.0);
        for n in 1..dim {
            k[n] = k[n - 1] * beta / (n as f64).sqrt();
        }
        k
    };
    for (&x, &lw) in rule.nodes.iter().zip(&rule.log_weights) {
        let radius = (x / c).sqrt();
        let weight = chi * lw.exp() / c / angular_nodes as f64;
        for j in 0..angular_nodes {
            let alpha = C::from_polar(radius, std::f64::consts::TAU * j as f64 / angular_nodes as f64);
            let v = raw_ket(alpha * g).kronecker(&raw_ket(alpha * chi.sqrt()));
            acc += &v * v.adjoint() * C::new(weight, 0.0);
        }
    }
    FockOperator::new(dim, 2, acc)
}
