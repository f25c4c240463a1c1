//! Collective spin operators, the spin-star Hamiltonian, and tensor-product
//! utilities on dense complex matrices.
//!
//! Basis conventions used everywhere in this crate:
//! * Spin-`I` matrices live in the `I_z` eigenbasis ordered from `m = +I`
//!   down to `m = -I`, so row/column 0 is the highest-weight state.
//! * Composite operators put the central-spin factor first,
//!   `A_central ⊗ B_ancilla`. Central index 0 is the excited state `|1⟩`
//!   (`S_z = +1/2`) and index 1 the ground state `|0⟩`, so the lowering
//!   operator `S⁻ = |0⟩⟨1|` has its single entry at row 1, column 0.

use ndarray::{Array2, Axis};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::SpinStarParams;

/// Central-spin basis index of the excited state `|1⟩`.
pub const EXCITED: usize = 0;
/// Central-spin basis index of the ground state `|0⟩`.
pub const GROUND: usize = 1;

/// The spin-`I` irreducible representation, `I = N/2`, on `N+1` levels.
#[derive(Debug, Clone)]
pub struct CollectiveSpin {
    pub total_spin: f64,
    pub i_x: Array2<C64>,
    pub i_y: Array2<C64>,
    pub i_z: Array2<C64>,
    pub i_plus: Array2<C64>,
    pub i_minus: Array2<C64>,
}

impl CollectiveSpin {
    pub fn dim(&self) -> usize {
        self.i_z.nrows()
    }

    /// `I² = I_x² + I_y² + I_z²`.
    pub fn total_spin_squared(&self) -> Array2<C64> {
        self.i_x.dot(&self.i_x) + self.i_y.dot(&self.i_y) + self.i_z.dot(&self.i_z)
    }
}

/// Collective spin operators of `n` spin-1/2 ancillas in the symmetric
/// (maximal-spin) subspace.
///
/// Ladder matrix elements are `⟨m±1|I_±|m⟩ = sqrt(I(I+1) - m(m±1))`.
pub fn collective_spin_operators(n: u32) -> Result<CollectiveSpin> {
    if n < 1 {
        return Err(Error::InvalidParams("need at least one spin".into()));
    }
    let dim = n as usize + 1;
    let total = f64::from(n) / 2.0;

    let mut i_z = Array2::<C64>::zeros((dim, dim));
    let mut i_plus = Array2::<C64>::zeros((dim, dim));
    for row in 0..dim {
        let m = total - row as f64;
        i_z[[row, row]] = C64::new(m, 0.0);
        if row + 1 < dim {
            // raises m-1 (column row+1) to m (row)
            let m_lower = m - 1.0;
            let amp = (total * (total + 1.0) - m_lower * (m_lower + 1.0)).sqrt();
            i_plus[[row, row + 1]] = C64::new(amp, 0.0);
        }
    }
    let i_minus = dagger(&i_plus);
    let half = C64::new(0.5, 0.0);
    let i_x = (&i_plus + &i_minus) * half;
    let i_y = (&i_plus - &i_minus) * C64::new(0.0, -0.5);

    Ok(CollectiveSpin { total_spin: total, i_x, i_y, i_z, i_plus, i_minus })
}

/// Spin operators of the central spin-1/2, `S_α = σ_α/2`.
pub fn central_spin_operators() -> CollectiveSpin {
    collective_spin_operators(1).expect("spin-1/2 always exists")
}

/// Lowering operator `S⁻ = |0⟩⟨1|` of the central spin.
pub fn central_lowering() -> Array2<C64> {
    let mut s = Array2::<C64>::zeros((2, 2));
    s[[GROUND, EXCITED]] = C64::new(1.0, 0.0);
    s
}

/// Ground-state projector `|0⟩⟨0|` of the central spin.
pub fn central_ground_projector() -> Array2<C64> {
    let mut p = Array2::<C64>::zeros((2, 2));
    p[[GROUND, GROUND]] = C64::new(1.0, 0.0);
    p
}

/// `H_T = ω_c S_z⊗1 + ω_a 1⊗I_z + Σ_ab J_ab S_a⊗I_b` on `2(N+1)` levels.
pub fn spin_star_hamiltonian(params: &SpinStarParams) -> Result<Array2<C64>> {
    params.validate()?;
    let central = central_spin_operators();
    let ancilla = collective_spin_operators(params.n_ancilla)?;
    let id_c = identity(2);
    let id_a = identity(ancilla.dim());

    let mut h = kron(&central.i_z, &id_a) * C64::new(params.omega_c, 0.0)
        + kron(&id_c, &ancilla.i_z) * C64::new(params.omega_a, 0.0);

    let s_ops = [&central.i_x, &central.i_y, &central.i_z];
    let i_ops = [&ancilla.i_x, &ancilla.i_y, &ancilla.i_z];
    for (a, s_op) in s_ops.iter().enumerate() {
        for (b, i_op) in i_ops.iter().enumerate() {
            let c = params.j[a][b];
            if c != 0.0 {
                h = h + kron(s_op, i_op) * C64::new(c, 0.0);
            }
        }
    }

    let dev = hermiticity_defect(&h);
    debug_assert!(dev < 1e-12, "hamiltonian assembly lost hermiticity: {dev:e}");
    Ok(h)
}

/// Trace over the central-spin factor of a `2d × 2d` operator;
/// returns the `d × d` ancilla block sum.
pub fn partial_trace_central(state: &Array2<C64>) -> Result<Array2<C64>> {
    let dim = state.nrows();
    if state.ncols() != dim {
        return Err(Error::DimensionMismatch("state must be square".into()));
    }
    if !dim.is_multiple_of(2) || dim == 0 {
        return Err(Error::DimensionMismatch(format!(
            "central partial trace needs even dimension, got {dim}"
        )));
    }
    let d = dim / 2;
    let mut out = Array2::<C64>::zeros((d, d));
    for s in 0..2 {
        for a in 0..d {
            for b in 0..d {
                out[[a, b]] += state[[s * d + a, s * d + b]];
            }
        }
    }
    Ok(out)
}

/// Kronecker product, first factor outer.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::<C64>::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[[i, j]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn identity(dim: usize) -> Array2<C64> {
    Array2::from_diag_elem(dim, C64::new(1.0, 0.0))
}

/// `Tr(op · rho)`.
pub fn expectation(op: &Array2<C64>, rho: &Array2<C64>) -> C64 {
    let d = op.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += op[[i, k]] * rho[[k, i]];
        }
    }
    acc
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// Largest entrywise magnitude.
pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise magnitude of `M - M†`, normalized by the largest entry
/// of `M` when that exceeds 1.
pub fn hermiticity_defect(m: &Array2<C64>) -> f64 {
    let scale = max_abs(m).max(1.0);
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dev = dev.max((m[[i, j]] - m[[j, i]].conj()).norm());
        }
    }
    dev / scale
}

/// Largest entrywise magnitude of `A - B`.
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    let mut dev: f64 = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        dev = dev.max((x - y).norm());
    }
    dev
}

/// Column-sum (1-)norm.
pub fn one_norm(m: &Array2<C64>) -> f64 {
    m.axis_iter(Axis(1))
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn commutator(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
        a.dot(b) - b.dot(a)
    }

    #[test]
    fn single_spin_matches_pauli_over_two() {
        let s = collective_spin_operators(1).unwrap();
        assert_abs_diff_eq!(s.i_z[[0, 0]].re, 0.5);
        assert_abs_diff_eq!(s.i_z[[1, 1]].re, -0.5);
        assert_abs_diff_eq!(s.i_plus[[0, 1]].re, 1.0);
        assert_eq!(s.i_plus[[1, 0]], C64::new(0.0, 0.0));
    }

    #[test]
    fn spin_one_ladder_amplitudes() {
        let s = collective_spin_operators(2).unwrap();
        let sqrt2 = 2.0_f64.sqrt();
        assert_abs_diff_eq!(s.i_z[[0, 0]].re, 1.0);
        assert_abs_diff_eq!(s.i_z[[1, 1]].re, 0.0);
        assert_abs_diff_eq!(s.i_z[[2, 2]].re, -1.0);
        assert_abs_diff_eq!(s.i_plus[[0, 1]].re, sqrt2, epsilon = 1e-15);
        assert_abs_diff_eq!(s.i_plus[[1, 2]].re, sqrt2, epsilon = 1e-15);
    }

    #[test]
    fn angular_momentum_algebra() {
        for n in 1..=12 {
            let s = collective_spin_operators(n).unwrap();
            let i = C64::new(0.0, 1.0);
            let checks = [
                (commutator(&s.i_x, &s.i_y), &s.i_z),
                (commutator(&s.i_y, &s.i_z), &s.i_x),
                (commutator(&s.i_z, &s.i_x), &s.i_y),
            ];
            for (lhs, rhs) in checks {
                let dev = max_abs_diff(&lhs, &(rhs * i));
                assert!(dev < 1e-12, "algebra violated at n={n}: {dev:e}");
            }
            let casimir = s.total_spin_squared();
            let expect = identity(s.dim())
                * C64::new(s.total_spin * (s.total_spin + 1.0), 0.0);
            assert!(max_abs_diff(&casimir, &expect) < 1e-12);
        }
    }

    #[test]
    fn ladder_identities() {
        let s = collective_spin_operators(5).unwrap();
        let i = C64::new(0.0, 1.0);
        let plus = &s.i_x + &(&s.i_y * i);
        let minus = &s.i_x - &(&s.i_y * i);
        assert_eq!(max_abs_diff(&plus, &s.i_plus), 0.0);
        assert_eq!(max_abs_diff(&minus, &s.i_minus), 0.0);
    }

    #[test]
    fn rejects_zero_spins() {
        assert!(collective_spin_operators(0).is_err());
    }

    #[test]
    fn hamiltonian_pure_central_splitting() {
        let n = 3;
        let p = SpinStarParams::new(0.7, 0.0, [[0.0; 3]; 3], 1.0, n).unwrap();
        let h = spin_star_hamiltonian(&p).unwrap();
        // ω_c S_z ⊗ 1: eigenvalues ±ω_c/2, each (N+1)-fold
        for a in 0..=n as usize {
            assert_abs_diff_eq!(h[[a, a]].re, 0.35);
            let g = (n as usize + 1) + a;
            assert_abs_diff_eq!(h[[g, g]].re, -0.35);
        }
        assert!(hermiticity_defect(&h) < 1e-12);
    }

    #[test]
    fn hamiltonian_two_qubit_hand_expansion() {
        // N=1, J = diag(1,1,0): H = S_x⊗S_x + S_y⊗S_y = (S⁺⊗S⁻ + S⁻⊗S⁺)/2,
        // a 1/2 swap block on the inner two basis states.
        let mut j = [[0.0; 3]; 3];
        j[0][0] = 1.0;
        j[1][1] = 1.0;
        let p = SpinStarParams::new(0.0, 0.0, j, 1.0, 1).unwrap();
        let h = spin_star_hamiltonian(&p).unwrap();
        let mut expect = Array2::<C64>::zeros((4, 4));
        expect[[1, 2]] = C64::new(0.5, 0.0);
        expect[[2, 1]] = C64::new(0.5, 0.0);
        assert!(max_abs_diff(&h, &expect) < 1e-15);
    }

    #[test]
    fn hamiltonian_reference_dimensions() {
        let mut j = [[0.0; 3]; 3];
        j[0][0] = 1.0;
        j[1][1] = 1.0;
        j[2][0] = 0.01;
        let p = SpinStarParams::new(0.1, 0.01, j, 15.0, 20).unwrap();
        let h = spin_star_hamiltonian(&p).unwrap();
        assert_eq!(h.dim(), (42, 42));
        assert!(hermiticity_defect(&h) < 1e-12);
    }

    #[test]
    fn hamiltonian_rejects_nonfinite() {
        let p = SpinStarParams {
            omega_c: f64::INFINITY,
            omega_a: 0.0,
            j: [[0.0; 3]; 3],
            gamma_reduced: 1.0,
            n_ancilla: 2,
        };
        assert!(spin_star_hamiltonian(&p).is_err());
    }

    #[test]
    fn partial_trace_product_state() {
        let sigma = Array2::from_diag(&ndarray::arr1(&[
            C64::new(0.25, 0.0),
            C64::new(0.75, 0.0),
        ]));
        let mut rho = Array2::<C64>::zeros((3, 3));
        rho[[0, 1]] = C64::new(0.3, 0.1);
        rho[[1, 0]] = C64::new(0.3, -0.1);
        rho[[2, 2]] = C64::new(1.0, 0.0);
        let combined = kron(&sigma, &rho);
        let reduced = partial_trace_central(&combined).unwrap();
        // Tr(σ) = 1, so the reduction returns rho itself.
        assert!(max_abs_diff(&reduced, &rho) < 1e-15);
    }

    #[test]
    fn partial_trace_bell_state() {
        // (|00⟩ + |11⟩)/√2 reduces to 1/2 on either side.
        let mut rho = Array2::<C64>::zeros((4, 4));
        for (a, b) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            rho[[a, b]] = C64::new(0.5, 0.0);
        }
        let reduced = partial_trace_central(&rho).unwrap();
        let expect = identity(2) * C64::new(0.5, 0.0);
        assert!(max_abs_diff(&reduced, &expect) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_odd_dimension() {
        let m = Array2::<C64>::zeros((3, 3));
        assert!(partial_trace_central(&m).is_err());
    }
}
