//! Vectorized Lindblad superoperators and their non-Hermitian spectra.
//!
//! Vectorization is column-stacking throughout: entry `(i, j)` of a `d × d`
//! operator maps to component `j·d + i`. Under that convention
//! `vec(AXB) = (Bᵀ ⊗ A)·vec(X)`.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{dagger, identity, kron, one_norm};

/// Column-stacking vectorization.
pub fn vectorize(rho: &Array2<C64>) -> Array1<C64> {
    let d = rho.nrows();
    assert_eq!(d, rho.ncols(), "vectorize needs a square matrix");
    let mut v = Array1::<C64>::zeros(d * d);
    for j in 0..d {
        for i in 0..d {
            v[j * d + i] = rho[[i, j]];
        }
    }
    v
}

/// Inverse of [`vectorize`]; rejects lengths that are not perfect squares.
pub fn devectorize(v: &Array1<C64>) -> Result<Array2<C64>> {
    let len = v.len();
    let d = (len as f64).sqrt().round() as usize;
    if d * d != len {
        return Err(Error::DimensionMismatch(format!(
            "vector length {len} is not a perfect square"
        )));
    }
    let mut m = Array2::<C64>::zeros((d, d));
    for j in 0..d {
        for i in 0..d {
            m[[i, j]] = v[j * d + i];
        }
    }
    Ok(m)
}

/// Dense superoperator on vectorized `d × d` operators.
#[derive(Debug, Clone)]
pub struct SuperOp {
    pub hilbert_dim: usize,
    pub matrix: Array2<C64>,
}

impl SuperOp {
    pub fn new(hilbert_dim: usize, matrix: Array2<C64>) -> Result<Self> {
        let want = hilbert_dim * hilbert_dim;
        if matrix.dim() != (want, want) {
            return Err(Error::DimensionMismatch(format!(
                "superoperator for dimension {hilbert_dim} must be {want}×{want}, got {:?}",
                matrix.dim()
            )));
        }
        Ok(Self { hilbert_dim, matrix })
    }

    pub fn zeros(hilbert_dim: usize) -> Self {
        let n = hilbert_dim * hilbert_dim;
        Self { hilbert_dim, matrix: Array2::zeros((n, n)) }
    }

    /// Apply to an operator: `devec(M · vec(rho))`.
    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let v = vectorize(rho);
        let out = self.matrix.dot(&v);
        devectorize(&out).expect("dimension preserved")
    }

    /// Largest component of `vec(1)† · M`, scaled by the matrix 1-norm:
    /// zero for trace-preserving generators.
    pub fn trace_defect(&self) -> f64 {
        let d = self.hilbert_dim;
        let scale = one_norm(&self.matrix).max(1e-300);
        let mut worst: f64 = 0.0;
        for col in 0..d * d {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..d {
                acc += self.matrix[[i * d + i, col]];
            }
            worst = worst.max(acc.norm());
        }
        worst / scale
    }
}

/// `-i[H, ·]` as a superoperator.
pub fn hamiltonian_superoperator(h: &Array2<C64>) -> SuperOp {
    let d = h.nrows();
    let id = identity(d);
    let minus_i = C64::new(0.0, -1.0);
    let m = (kron(&id, h) - kron(&h.t().to_owned(), &id)) * minus_i;
    SuperOp { hilbert_dim: d, matrix: m }
}

/// `γ·(O · O† - ½{O†O, ·})` as a superoperator.
pub fn dissipator_superoperator(op: &Array2<C64>, rate: f64) -> SuperOp {
    let d = op.nrows();
    let id = identity(d);
    let half = C64::new(0.5, 0.0);
    let od_o = dagger(op).dot(op);
    let m = (kron(&op.mapv(|z| z.conj()), op)
        - kron(&id, &od_o) * half
        - kron(&od_o.t().to_owned(), &id) * half)
        * C64::new(rate, 0.0);
    SuperOp { hilbert_dim: d, matrix: m }
}

/// Full Lindblad generator `-i[H, ·] + Σ_k γ_k D[O_k]`.
pub fn build_superoperator(h: &Array2<C64>, jumps: &[(Array2<C64>, f64)]) -> Result<SuperOp> {
    let d = h.nrows();
    if h.ncols() != d {
        return Err(Error::DimensionMismatch("hamiltonian must be square".into()));
    }
    let mut total = hamiltonian_superoperator(h);
    for (op, rate) in jumps {
        if op.dim() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "jump operator is {:?}, hamiltonian is {d}×{d}",
                op.dim()
            )));
        }
        if *rate < 0.0 {
            return Err(Error::NegativeRate(*rate));
        }
        total.matrix = total.matrix + dissipator_superoperator(op, *rate).matrix;
    }
    Ok(total)
}

/// Stripe classification of a Liouvillian spectrum.
///
/// The stripe position index is `s = round(-2 Re λ / Γ)` clipped to
/// `{0, 1, 2}`; the reported label is `μ ∈ {0, 1, 3}` since the two
/// dissipator branches at `-Γ/2` coincide on the real axis and are merged
/// into `μ = 1` with their degeneracy noted.
#[derive(Debug, Clone)]
pub struct StripeClassification {
    pub mu: Vec<u8>,
    /// True when every eigenvalue sits within 0.25 (in units of Γ/2) of a
    /// stripe center; false signals that Γ is too small to separate stripes.
    pub valid: bool,
    pub max_deviation: f64,
    /// Count of eigenvalues carrying the merged `μ = 1` label, which covers
    /// both `-Γ/2` dissipator branches.
    pub merged_count: usize,
}

/// Full eigensystem of a Liouvillian.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors, one per column.
    pub right: Array2<C64>,
    /// Left eigenvectors, one per column, with `left†·right = 1`.
    pub left: Array2<C64>,
    /// Per-pair eigenvalue equation residuals.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub defective: bool,
    /// 1-norm of the decomposed matrix; zero tests scale with it.
    pub operator_norm: f64,
    pub stripes: Option<StripeClassification>,
}

impl SpectralData {
    /// Threshold below which an eigenvalue counts as zero.
    pub fn zero_threshold(&self) -> f64 {
        1e-8 * self.operator_norm.max(1e-300)
    }

    /// Indices of eigenvalues within a given stripe label.
    pub fn stripe_indices(&self, mu: u8) -> Vec<usize> {
        match &self.stripes {
            Some(s) => s
                .mu
                .iter()
                .enumerate()
                .filter(|(_, m)| **m == mu)
                .map(|(k, _)| k)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Largest real part over the whole spectrum.
    pub fn max_real_part(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Complete non-Hermitian eigendecomposition with biorthonormalized
/// left/right pairs.
pub fn eigendecompose(op: &SuperOp) -> Result<SpectralData> {
    let pairs = linalg::eig(&op.matrix)?;
    let norm = one_norm(&op.matrix);
    if pairs.max_residual > 1e-8 * norm.max(1.0) {
        let worst = pairs
            .residuals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(k, _)| k)
            .unwrap_or(0);
        return Err(Error::EigConvergence(worst));
    }
    Ok(SpectralData {
        eigenvalues: pairs.values,
        right: pairs.right,
        left: pairs.left,
        residuals: pairs.residuals,
        max_residual: pairs.max_residual,
        defective: pairs.defective,
        operator_norm: norm,
        stripes: None,
    })
}

/// Assign stripe labels for measurement rate `Γ`; stores the classification
/// on the spectral data and returns a copy of it.
pub fn classify_stripes(spec: &mut SpectralData, gamma_big: f64) -> Result<StripeClassification> {
    if gamma_big <= 0.0 || gamma_big.is_nan() {
        return Err(Error::InvalidParams("gamma must be positive".into()));
    }
    let mut mu = Vec::with_capacity(spec.eigenvalues.len());
    let mut max_dev: f64 = 0.0;
    let mut merged = 0usize;
    for lambda in &spec.eigenvalues {
        let position = -2.0 * lambda.re / gamma_big;
        let s = position.round().clamp(0.0, 2.0);
        max_dev = max_dev.max((position - s).abs());
        let label = match s as u8 {
            0 => 0,
            1 => {
                merged += 1;
                1
            }
            _ => 3,
        };
        mu.push(label);
    }
    let classification = StripeClassification {
        mu,
        valid: max_dev < 0.25,
        max_deviation: max_dev,
        merged_count: merged,
    };
    spec.stripes = Some(classification.clone());
    Ok(classification)
}

/// Extract the steady state from the kernel of the decomposed generator:
/// Hermitized, unit trace, verified positive semidefinite.
pub fn steady_state(spec: &SpectralData) -> Result<Array2<C64>> {
    let tol = spec.zero_threshold();
    let kernel: Vec<usize> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() < tol)
        .map(|(k, _)| k)
        .collect();
    match kernel.len() {
        0 => Err(Error::NoSteadyState),
        1 => {
            let rho = normalize_kernel_vector(&spec.right.column(kernel[0]).to_owned())?;
            let min_eig = linalg::min_eigenvalue_hermitian(&rho)?;
            if min_eig < -1e-8 {
                return Err(Error::NonPhysicalState(format!(
                    "steady state has negative eigenvalue {min_eig:.3e}"
                )));
            }
            Ok(rho)
        }
        _ => {
            let vectors = kernel
                .iter()
                .map(|&k| devectorize(&spec.right.column(k).to_owned()))
                .collect::<Result<Vec<_>>>()?;
            Err(Error::DegenerateSteadyState(vectors))
        }
    }
}

fn normalize_kernel_vector(v: &Array1<C64>) -> Result<Array2<C64>> {
    let raw = devectorize(v)?;
    let herm = (&raw + &dagger(&raw)) * C64::new(0.5, 0.0);
    let tr = crate::operators::trace(&herm);
    if tr.norm() < 1e-14 {
        return Err(Error::NonPhysicalState("kernel vector is traceless".into()));
    }
    Ok(herm.mapv(|z| z / tr))
}
