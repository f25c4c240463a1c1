//! Reduction of the strongly measured spin-star model to an effective
//! ancilla master equation, both symbolically (biorthogonal expansion of the
//! Hamiltonian, Kossakowski matrix, Lamb shift) and numerically (projection
//! of the full generator onto the Zeno subspace). The two routes are
//! independent and must agree; tests hold them to each other.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::liouville::{dissipator_superoperator, SuperOp};
use crate::operators::{
    central_ground_projector, central_lowering, dagger, identity, kron, max_abs, max_abs_diff,
    partial_trace_central, trace,
};
use crate::params::SpinStarParams;

/// Eigensystem of the unit-rate measurement dissipator on the central spin:
/// four triples `(λ_k, ρ_k, π_k)` of eigenvalue, right and left eigenvector,
/// biorthonormalized as `Tr(π_j† ρ_k) = δ_jk`.
#[derive(Debug, Clone)]
pub struct DissipatorEigensystem {
    eigenvalues: [f64; 4],
    right: [Array2<C64>; 4],
    left: [Array2<C64>; 4],
}

impl DissipatorEigensystem {
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k]
    }

    pub fn right(&self, k: usize) -> &Array2<C64> {
        &self.right[k]
    }

    pub fn left(&self, k: usize) -> &Array2<C64> {
        &self.left[k]
    }
}

/// The four eigentriples of `D[S⁻]` at unit rate.
///
/// The right eigenvectors are the standard set
/// `{|0⟩⟨0|, |0⟩⟨1|, |1⟩⟨0|, |1⟩⟨1| - |0⟩⟨0|}`; every eigenvalue is
/// recomputed here by applying the dissipator rather than hard-coding it.
/// Direct application gives `λ_3 = -1` (the decaying population mode).
pub fn dissipator_eigensystem() -> DissipatorEigensystem {
    let one = C64::new(1.0, 0.0);

    // basis index 0 = |1⟩ (excited), 1 = |0⟩ (ground)
    let ket0_bra0 = central_ground_projector();
    let mut ket0_bra1 = Array2::<C64>::zeros((2, 2));
    ket0_bra1[[1, 0]] = one;
    let mut ket1_bra0 = Array2::<C64>::zeros((2, 2));
    ket1_bra0[[0, 1]] = one;
    let mut ket1_bra1 = Array2::<C64>::zeros((2, 2));
    ket1_bra1[[0, 0]] = one;

    let right = [
        ket0_bra0.clone(),
        ket0_bra1.clone(),
        ket1_bra0.clone(),
        &ket1_bra1 - &ket0_bra0,
    ];
    let left = [identity(2), ket0_bra1, ket1_bra0, ket1_bra1];

    let dissipator = dissipator_superoperator(&central_lowering(), 1.0);
    let mut eigenvalues = [0.0; 4];
    for k in 0..4 {
        let image = dissipator.apply(&right[k]);
        // eigenvalue from the biorthogonal pairing, then verified
        let lambda = pairing(&left[k], &image);
        debug_assert!(lambda.im.abs() < 1e-14);
        let rebuilt = right[k].mapv(|z| z * lambda);
        debug_assert!(
            max_abs_diff(&image, &rebuilt) < 1e-12,
            "dissipator eigenvector {k} failed to reproduce"
        );
        eigenvalues[k] = lambda.re;
    }

    DissipatorEigensystem { eigenvalues, right, left }
}

/// `Tr(π† ρ)`.
fn pairing(pi: &Array2<C64>, rho: &Array2<C64>) -> C64 {
    trace(&dagger(pi).dot(rho))
}

/// Expand a composite Hamiltonian over the dissipator's left basis:
/// `H = Σ_k π_k† ⊗ L_k` with `L_k = Tr_c[(ρ_k ⊗ 1)·H]`.
///
/// The reconstruction identity is the defining contract and is asserted; a
/// failure signals a basis-convention bug, not a numerical issue.
pub fn hamiltonian_components(
    h_total: &Array2<C64>,
    eig: &DissipatorEigensystem,
) -> Result<[Array2<C64>; 4]> {
    let dim = h_total.nrows();
    if !dim.is_multiple_of(2) || h_total.ncols() != dim {
        return Err(Error::DimensionMismatch(
            "composite hamiltonian must be square with even dimension".into(),
        ));
    }
    let d_anc = dim / 2;
    let id_anc = identity(d_anc);

    let components: [Array2<C64>; 4] = std::array::from_fn(|k| {
        let weighted = kron(eig.right(k), &id_anc).dot(h_total);
        partial_trace_central(&weighted).expect("dimension checked above")
    });

    let mut rebuilt = Array2::<C64>::zeros((dim, dim));
    for (k, component) in components.iter().enumerate() {
        rebuilt = rebuilt + kron(&dagger(eig.left(k)), component);
    }
    let dev = max_abs_diff(&rebuilt, h_total);
    let scale = max_abs(h_total).max(1.0);
    if dev > 1e-10 * scale {
        return Err(Error::Reconstruction(dev));
    }
    Ok(components)
}

/// The coherent generator inside the Zeno subspace: `L_0` with its
/// identity (global-phase) part discarded.
pub fn effective_hamiltonian(components: &[Array2<C64>; 4]) -> Array2<C64> {
    let l0 = &components[0];
    let d = l0.nrows();
    let offset = trace(l0) / C64::new(d as f64, 0.0);
    l0 - &(identity(d) * offset)
}

/// Second-order coefficients of the reduction:
/// `A_mn = -Tr(π_m π_n† ρ_0)/λ_m*`, the Kossakowski matrix
/// `k_mn = A_mn + A_nm*`, and the Lamb shift
/// `H_L = Σ h_mn L_m† L_n` with `h_mn = (A_mn - A_nm*)/2i`.
///
/// For this dissipator the formula yields `A_11 = 2` (hence `k_11 = 4`) and
/// a vanishing Lamb shift.
pub fn kossakowski_and_lamb_shift(
    eig: &DissipatorEigensystem,
    components: &[Array2<C64>; 4],
) -> Result<(Array2<C64>, Array2<C64>, Array2<C64>)> {
    let rho0 = eig.right(0);
    let mut a = Array2::<C64>::zeros((3, 3));
    for m in 1..4 {
        let lambda = eig.eigenvalue(m);
        if lambda.abs() < 1e-14 {
            return Err(Error::InvalidParams(
                "nonzero dissipator eigenvalue required for the reduction".into(),
            ));
        }
        for n in 1..4 {
            let product = eig.left(m).dot(&dagger(eig.left(n))).dot(rho0);
            a[[m - 1, n - 1]] = -trace(&product) / C64::new(lambda, 0.0).conj();
        }
    }

    let a_dag = dagger(&a);
    let kossakowski = &a + &a_dag;
    let h_coeff = (&a - &a_dag) * C64::new(0.0, -0.5); // (A - A†)/2i

    let d_anc = components[0].nrows();
    let mut lamb = Array2::<C64>::zeros((d_anc, d_anc));
    for m in 1..4 {
        for n in 1..4 {
            let coeff = h_coeff[[m - 1, n - 1]];
            if coeff.norm() > 0.0 {
                lamb = lamb + dagger(&components[m]).dot(&components[n]) * coeff;
            }
        }
    }
    Ok((a, kossakowski, lamb))
}

/// Bookkeeping for the dropped higher-order corrections: the reduction is
/// second order in `1/Γ` and trustworthy only for `γ ≫ γ₀`.
#[derive(Debug, Clone)]
pub struct TruncationNote {
    pub gamma_reduced: f64,
    pub gamma_big: f64,
    /// Largest Hamiltonian scale `max{|J_ab|, |ω_c|, |ω_a|}`.
    pub gamma0: f64,
    /// Set when `γ ≤ 10·γ₀`.
    pub validity_warning: bool,
}

/// Effective ancilla master equation assembled from the reduction.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    /// Zeno Hamiltonian `H_Z` (dimension N+1).
    pub h_z: Array2<C64>,
    /// Lamb shift `H_L` (enters as `H_L/Γ`; identically zero here).
    pub lamb_shift: Array2<C64>,
    /// `H_Z + H_L/Γ`.
    pub h_eff: Array2<C64>,
    /// Canonical jump operators with their rates (already divided by Γ).
    pub jump_terms: Vec<(Array2<C64>, f64)>,
    /// 3×3 coefficient matrix `A_mn`.
    pub a_matrix: Array2<C64>,
    /// 3×3 Kossakowski matrix `k_mn = A_mn + A_nm*`.
    pub kossakowski: Array2<C64>,
    pub truncation: TruncationNote,
}

impl EffectiveModel {
    /// Assembled generator on the ancilla space, dimension `(N+1)²`.
    pub fn superoperator(&self) -> Result<SuperOp> {
        crate::liouville::build_superoperator(&self.h_eff, &self.jump_terms)
    }
}

/// Build the effective ancilla master equation for the given parameters.
///
/// The Kossakowski matrix is diagonalized even though only one entry is
/// nonzero for this model; the canonical channels it yields are the jump
/// operators, with rates `k̃_p/Γ`.
pub fn effective_lindbladian(params: &SpinStarParams) -> Result<EffectiveModel> {
    params.validate()?;
    let h_total = crate::operators::spin_star_hamiltonian(params)?;
    let eig = dissipator_eigensystem();
    let components = hamiltonian_components(&h_total, &eig)?;
    let h_z = effective_hamiltonian(&components);
    let (a_matrix, kossakowski, lamb_shift) = kossakowski_and_lamb_shift(&eig, &components)?;

    let (k_values, k_vectors) = linalg::eig_hermitian(&kossakowski)?;
    if let Some(min) = k_values.iter().cloned().reduce(f64::min) {
        if min < -1e-10 {
            return Err(Error::InvalidKossakowski(min));
        }
    }

    let gamma_big = params.gamma_big();
    // descending rate order for a deterministic channel list
    let mut order: Vec<usize> = (0..k_values.len()).collect();
    order.sort_by(|&p, &q| k_values[q].partial_cmp(&k_values[p]).unwrap());
    let d_anc = h_z.nrows();
    let component_scale = components.iter().map(max_abs).fold(0.0, f64::max);
    let mut jump_terms = Vec::new();
    for p in order {
        let strength = k_values[p];
        if strength <= 1e-12 {
            continue;
        }
        let mut op = Array2::<C64>::zeros((d_anc, d_anc));
        for n in 0..3 {
            let weight = k_vectors[[n, p]].conj();
            if weight.norm() > 0.0 {
                op = op + &components[n + 1] * weight;
            }
        }
        // a channel whose operator vanishes contributes nothing
        if max_abs(&op) < 1e-14 * (1.0 + component_scale) {
            continue;
        }
        jump_terms.push((op, strength / gamma_big));
    }

    let h_eff = &h_z + &(&lamb_shift * C64::new(1.0 / gamma_big, 0.0));
    let gamma0 = params.gamma0();
    Ok(EffectiveModel {
        h_z,
        lamb_shift,
        h_eff,
        jump_terms,
        a_matrix,
        kossakowski,
        truncation: TruncationNote {
            gamma_reduced: params.gamma_reduced,
            gamma_big,
            gamma0,
            validity_warning: params.gamma_reduced <= 10.0 * gamma0,
        },
    })
}

/// Superoperator form of the Zeno-subspace projector `P(X) = ρ_0 ⊗ Tr_c(X)`
/// on the vectorized composite space.
pub fn zeno_projector(d_anc: usize) -> SuperOp {
    let d_full = 2 * d_anc;
    let n_full = d_full * d_full;
    let mut p = Array2::<C64>::zeros((n_full, n_full));
    // P maps E_{(s a),(s b)} to E_{(g a),(g b)} and kills the s ≠ s' blocks
    let g = crate::operators::GROUND;
    for s in 0..2 {
        for a in 0..d_anc {
            for b in 0..d_anc {
                let src = (s * d_anc + b) * d_full + (s * d_anc + a);
                let dst = (g * d_anc + b) * d_full + (g * d_anc + a);
                p[[dst, src]] = C64::new(1.0, 0.0);
            }
        }
    }
    SuperOp { hilbert_dim: d_full, matrix: p }
}

/// Partial-trace map `T: vec(X) ↦ vec(Tr_c X)` and the embedding
/// `E: vec(Y) ↦ vec(ρ_0 ⊗ Y)`, with `T·E = 1` on the ancilla space.
fn trace_and_embed(d_anc: usize) -> (Array2<C64>, Array2<C64>) {
    let d_full = 2 * d_anc;
    let n_full = d_full * d_full;
    let n_anc = d_anc * d_anc;
    let mut t = Array2::<C64>::zeros((n_anc, n_full));
    let mut e = Array2::<C64>::zeros((n_full, n_anc));
    let g = crate::operators::GROUND;
    for a in 0..d_anc {
        for b in 0..d_anc {
            let anc = b * d_anc + a;
            for s in 0..2 {
                let full = (s * d_anc + b) * d_full + (s * d_anc + a);
                t[[anc, full]] = C64::new(1.0, 0.0);
            }
            let full_ground = (g * d_anc + b) * d_full + (g * d_anc + a);
            e[[full_ground, anc]] = C64::new(1.0, 0.0);
        }
    }
    (t, e)
}

/// Second-order projection of the full generator onto the Zeno subspace,
/// returning the `(N+1)²`-dimensional effective generator
/// `T·(K + (1/Γ)·K·S·K)·E` where `K` is the coherent part.
///
/// `S` is the reduced resolvent of the unit-rate measurement dissipator at
/// zero: the inverse of `D` on the range of `Q = 1 - P`, extended by zero
/// and taken with the sign of `∫_0^∞ e^{D t} Q dt`, so `S·D = -Q`. That sign
/// makes the second-order term dissipative, matching the Kossakowski route.
///
/// Serves as the independent numerical oracle for [`effective_lindbladian`].
pub fn numerical_zeno_projection(l_full: &SuperOp, gamma_big: f64) -> Result<SuperOp> {
    if gamma_big <= 0.0 || gamma_big.is_nan() {
        return Err(Error::InvalidParams("gamma must be positive".into()));
    }
    let d_full = l_full.hilbert_dim;
    if !d_full.is_multiple_of(2) {
        return Err(Error::DimensionMismatch(
            "composite space must factor into central spin ⊗ ancilla".into(),
        ));
    }
    let d_anc = d_full / 2;
    let n_full = d_full * d_full;

    let jump = kron(&central_lowering(), &identity(d_anc));
    let dissipator = dissipator_superoperator(&jump, 1.0);
    let coherent = &l_full.matrix - &(&dissipator.matrix * C64::new(gamma_big, 0.0));

    let projector = zeno_projector(d_anc).matrix;
    let complement = identity(n_full) - &projector;

    // orthonormal basis of range(Q); D is invertible there
    let basis = linalg::orthonormal_range(&complement, 1e-10)?;
    let expected_rank = n_full - d_anc * d_anc;
    if basis.ncols() != expected_rank {
        return Err(Error::RankDeficient {
            expected: d_anc * d_anc,
            found: n_full - basis.ncols(),
        });
    }
    let basis_dag = dagger(&basis);
    let restricted = basis_dag.dot(&dissipator.matrix).dot(&basis);
    let inv_block = linalg::solve(&restricted, &identity(expected_rank))
        .map_err(|_| Error::RankDeficient { expected: d_anc * d_anc, found: 0 })?;
    let resolvent =
        basis.dot(&inv_block).dot(&basis_dag).dot(&complement) * C64::new(-1.0, 0.0);

    // resolvent contract: S·D = -Q, and S vanishes on the Zeno subspace
    let contract = resolvent.dot(&dissipator.matrix) + &complement;
    let dev = max_abs(&contract);
    if dev > 1e-10 {
        return Err(Error::RankDeficient { expected: d_anc * d_anc, found: usize::MAX });
    }

    let (trace_map, embed) = trace_and_embed(d_anc);
    let second = coherent.dot(&resolvent).dot(&coherent) * C64::new(1.0 / gamma_big, 0.0);
    let generator = trace_map.dot(&(&coherent + &second)).dot(&embed);
    SuperOp::new(d_anc, generator)
}
