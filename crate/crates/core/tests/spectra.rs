//! Spectral structure of the full spin-star Liouvillian: stripe geometry and
//! its response to the measurement strength.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use spinstar::liouville::{build_superoperator, classify_stripes, eigendecompose, SpectralData};
use spinstar::operators::{central_lowering, identity, kron, spin_star_hamiltonian};
use spinstar::params::SpinStarParams;

fn reference_params(n: u32, gamma: f64) -> SpinStarParams {
    let mut j = [[0.0; 3]; 3];
    j[0][0] = 1.0;
    j[1][1] = 1.0;
    j[2][0] = 0.01;
    SpinStarParams::new(0.1, 0.01, j, gamma, n).unwrap()
}

fn full_liouvillian(params: &SpinStarParams) -> spinstar::liouville::SuperOp {
    let h = spin_star_hamiltonian(params).unwrap();
    let d_anc = params.n_ancilla as usize + 1;
    let jump = kron(&central_lowering(), &identity(d_anc));
    build_superoperator(&h, &[(jump, params.gamma_big())]).unwrap()
}

fn classified_spectrum(params: &SpinStarParams) -> SpectralData {
    let gen = full_liouvillian(params);
    let mut spec = eigendecompose(&gen).unwrap();
    classify_stripes(&mut spec, params.gamma_big()).unwrap();
    spec
}

#[test]
fn stripe_populations_match_dissipator_degeneracies() {
    let params = reference_params(5, 40.0);
    let spec = classified_spectrum(&params);
    let stripes = spec.stripes.as_ref().unwrap();
    assert!(stripes.valid, "max deviation {}", stripes.max_deviation);
    let d_anc_sq = (params.n_ancilla as usize + 1).pow(2);
    assert_eq!(spec.stripe_indices(0).len(), d_anc_sq);
    assert_eq!(spec.stripe_indices(1).len(), 2 * d_anc_sq);
    assert_eq!(spec.stripe_indices(3).len(), d_anc_sq);
}

#[test]
fn no_positive_real_parts_and_identity_annihilates() {
    let params = reference_params(4, 15.0);
    let gen = full_liouvillian(&params);
    assert!(gen.trace_defect() < 1e-10);
    let spec = eigendecompose(&gen).unwrap();
    assert!(spec.max_real_part() < 1e-8 * spec.operator_norm);
}

#[test]
fn stripe_zero_spread_shrinks_when_gamma_doubles() {
    // the steady-state stripe tightens as 1/Γ
    let n = 4;
    let spread = |gamma: f64| -> f64 {
        let spec = classified_spectrum(&reference_params(n, gamma));
        spec.stripe_indices(0)
            .iter()
            .map(|&k| spec.eigenvalues[k].re.abs())
            .fold(0.0, f64::max)
    };
    let s1 = spread(30.0);
    let s2 = spread(60.0);
    let ratio = s1 / s2;
    assert!(
        (1.5..=2.5).contains(&ratio),
        "spread ratio {ratio} out of the 1/Γ window (s1={s1:e}, s2={s2:e})"
    );
}

#[test]
fn vertical_spread_is_independent_of_gamma() {
    let n = 4;
    let vertical = |gamma: f64| -> f64 {
        let spec = classified_spectrum(&reference_params(n, gamma));
        let max = spec.eigenvalues.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
        let min = spec.eigenvalues.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
        max - min
    };
    let v1 = vertical(30.0);
    let v2 = vertical(60.0);
    assert!((v1 - v2).abs() / v1 < 0.05, "vertical spread moved: {v1} vs {v2}");
}

#[test]
fn classification_degrades_gracefully_at_small_gamma() {
    // well below stripe separation the windows overlap and the
    // classification must flag itself invalid rather than lie
    let params = reference_params(3, 0.2);
    let spec = classified_spectrum(&params);
    assert!(!spec.stripes.as_ref().unwrap().valid);
}

#[test]
fn steady_state_of_reference_system_is_physical() {
    let params = reference_params(4, 20.0);
    let gen = full_liouvillian(&params);
    let spec = eigendecompose(&gen).unwrap();
    let rho = spinstar::liouville::steady_state(&spec).unwrap();
    let d = rho.nrows();
    assert_eq!(d, 2 * (params.n_ancilla as usize + 1));
    let tr: C64 = rho.diag().sum();
    assert!((tr.re - 1.0).abs() < 1e-10);
    assert!(tr.im.abs() < 1e-12);
    let min = spinstar::linalg::min_eigenvalue_hermitian(&rho).unwrap();
    assert!(min > -1e-8);
    let _: Array2<C64> = rho;
}
