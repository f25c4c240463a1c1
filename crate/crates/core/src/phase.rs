//! Phase-diagram scans over measurement strength and system size: order
//! parameters, spectral gaps, oscillation lifetimes, and operational phase
//! labels.
//!
//! Label thresholds are operational choices (the underlying boundaries are
//! soft): an order parameter above `op_threshold` marks the oscillating
//! phase, a spectral gap within `1e-6` of zero (in units of the largest
//! Hamiltonian scale) marks effectively unitary Zeno dynamics, and the rest
//! is the stationary regime — reported as melted for mean-field points and
//! dissipative for finite sizes.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_lindblad, polarized_dicke_state, EvolveOptions, StateSpace, Trajectory};
use crate::error::{Error, Result};
use crate::liouville::{eigendecompose, SpectralData};
use crate::meanfield::{integrate_meanfield, MeanFieldOptions, MeanFieldState, MeanFieldSystem, ReducedParams};
use crate::params::SpinStarParams;
use crate::signal::fit_damped_cosine;
use crate::zeno::effective_lindbladian;

/// Critical reduced measurement strength `γ_c = J_xx²/Ω` of the anisotropic
/// coupling pattern; at `γ = γ_c` the drive and the effective dissipation
/// balance (`Ω/κ = 1`).
pub fn critical_gamma(params: &SpinStarParams) -> Result<f64> {
    let omega = params.omega_drive();
    if omega <= 0.0 {
        return Err(Error::InvalidParams(format!("drive must be positive, got {omega}")));
    }
    Ok(params.j[0][0] * params.j[0][0] / omega)
}

/// Late-window oscillation amplitude of an observable.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrderParameter {
    /// `(max - min)/2` over the final window.
    pub value: f64,
    /// Set when the window holds fewer than two extrema, i.e. less than
    /// about one period.
    pub low_confidence: bool,
}

/// Order parameter of `m_z` over the trailing `window_fraction` of the
/// trajectory.
pub fn order_parameter(traj: &Trajectory, window_fraction: f64) -> Result<OrderParameter> {
    if !(0.0 < window_fraction && window_fraction <= 1.0) {
        return Err(Error::InvalidParams("window fraction must be in (0, 1]".into()));
    }
    let n = traj.times.len();
    if n < 4 {
        return Err(Error::InvalidParams("trajectory too short".into()));
    }
    let start = ((n as f64) * (1.0 - window_fraction)).floor() as usize;
    let window = &traj.m[2][start.min(n - 2)..];
    let max = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = window.iter().cloned().fold(f64::INFINITY, f64::min);
    let value = 0.5 * (max - min);

    let mut extrema = 0usize;
    for i in 1..window.len().saturating_sub(1) {
        if (window[i] > window[i - 1] && window[i] >= window[i + 1])
            || (window[i] < window[i - 1] && window[i] <= window[i + 1])
        {
            extrema += 1;
        }
    }
    Ok(OrderParameter { value, low_confidence: value > 1e-10 && extrema < 2 })
}

/// System size at a scan point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanSize {
    Finite(u32),
    /// Thermodynamic-limit sentinel: the point is evaluated with the reduced
    /// mean-field flow.
    MeanField,
}

impl ScanSize {
    fn order_key(&self) -> u64 {
        match self {
            ScanSize::Finite(n) => u64::from(*n),
            ScanSize::MeanField => u64::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseLabel {
    Dissipative,
    UnitaryZenoLike,
    Melted,
    Ztc,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhasePoint {
    pub gamma_reduced: f64,
    pub size: ScanSize,
    pub order_parameter: f64,
    /// Relaxation rate of the slowest nonstationary mode: `-max Re λ` over
    /// nonzero eigenvalues of the effective generator, or the linearized
    /// attraction rate `sqrt(max(κ²-Ω², 0))` for mean-field points.
    pub spectral_gap: f64,
    /// Envelope decay rate of the `m_z` oscillation fit.
    pub lifetime_decay_rate: f64,
    pub label: PhaseLabel,
    pub low_confidence: bool,
    pub validity_warning: bool,
    /// Populated when the point failed; the numeric fields are then zero.
    pub error: Option<String>,
}

/// Scan specification. Hamiltonian parameters follow the anisotropic
/// coupling pattern (drive `Ω`, `J_yy = J_xx`, `J_zz = 2ω_a`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanConfig {
    pub gammas: Vec<f64>,
    pub sizes: Vec<ScanSize>,
    #[serde(default = "default_j_xx")]
    pub j_xx: f64,
    #[serde(default)]
    pub omega_a: f64,
    #[serde(default)]
    pub omega_c: f64,
    pub omega_drive: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_window_fraction")]
    pub window_fraction: f64,
    #[serde(default = "default_op_threshold")]
    pub op_threshold: f64,
    #[serde(default = "default_initial")]
    pub initial_direction: [f64; 3],
    #[serde(default = "default_rtol")]
    pub rtol: f64,
}

fn default_j_xx() -> f64 {
    1.0
}
fn default_t_end() -> f64 {
    400.0
}
fn default_samples() -> usize {
    2000
}
fn default_window_fraction() -> f64 {
    0.25
}
fn default_op_threshold() -> f64 {
    0.05
}
fn default_initial() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn default_rtol() -> f64 {
    1e-8
}

impl ScanConfig {
    fn hamiltonian_scale(&self) -> f64 {
        self.j_xx
            .abs()
            .max(self.omega_a.abs())
            .max(self.omega_c.abs())
            .max(self.omega_drive.abs())
            .max(2.0 * self.omega_a.abs())
            .max(2.0 * self.omega_drive.abs())
    }

    fn grid(&self, t_scale: f64) -> Vec<f64> {
        let t_end = self.t_end * t_scale;
        (0..=self.samples).map(|k| k as f64 * t_end / self.samples as f64).collect()
    }
}

fn evaluate_meanfield(config: &ScanConfig, gamma: f64) -> Result<(f64, f64, f64, bool)> {
    let kappa = config.j_xx * config.j_xx / gamma;
    let rp = ReducedParams::new(config.omega_drive, kappa)?;
    // time axis in units of 1/κ so slow dissipation is still resolved
    let grid = config.grid(1.0_f64.max(1.0 / kappa).min(1e6));
    let opts = MeanFieldOptions { rtol: config.rtol.min(1e-10), ..Default::default() };
    let traj = integrate_meanfield(
        MeanFieldSystem::Reduced(&rp),
        &MeanFieldState::polarized(config.initial_direction),
        &grid,
        &opts,
    )?;
    let op = order_parameter(&traj, config.window_fraction)?;
    let fit = fit_damped_cosine(&traj.times, &traj.m[2])?;
    let gap = (kappa * kappa - config.omega_drive * config.omega_drive).max(0.0).sqrt();
    Ok((op.value, gap, fit.decay_rate.max(0.0), op.low_confidence))
}

fn evaluate_finite(config: &ScanConfig, gamma: f64, n: u32) -> Result<(f64, f64, f64, bool, bool)> {
    let params = SpinStarParams::dicke(
        config.j_xx,
        config.omega_a,
        config.omega_c,
        config.omega_drive,
        gamma,
        n,
    )?;
    let model = effective_lindbladian(&params)?;
    let sup = model.superoperator()?;
    let spec = eigendecompose(&sup)?;
    let tol = spec.zero_threshold();
    let gap = -spec
        .eigenvalues
        .iter()
        .filter(|z| z.norm() > tol)
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);

    let kappa = params.kappa();
    let grid = config.grid(1.0_f64.max(1.0 / kappa).min(1e6));
    let rho0 = polarized_dicke_state(n, config.initial_direction)?;
    let traj = evolve_lindblad(
        &model.h_eff,
        &model.jump_terms,
        &rho0,
        &grid,
        StateSpace::Ancilla { n_ancilla: n },
        &EvolveOptions { rtol: config.rtol, atol: config.rtol * 1e-2, checkpoint_times: vec![] },
    )?;
    let op = order_parameter(&traj, config.window_fraction)?;
    let fit = fit_damped_cosine(&traj.times, &traj.m[2])?;
    Ok((
        op.value,
        gap.max(0.0),
        fit.decay_rate.max(0.0),
        op.low_confidence,
        model.truncation.validity_warning,
    ))
}

fn label_point(
    config: &ScanConfig,
    op_value: f64,
    gap: f64,
    size: ScanSize,
) -> PhaseLabel {
    if op_value > config.op_threshold {
        return PhaseLabel::Ztc;
    }
    if gap < 1e-6 * config.hamiltonian_scale() {
        return PhaseLabel::UnitaryZenoLike;
    }
    match size {
        ScanSize::MeanField => PhaseLabel::Melted,
        ScanSize::Finite(_) => PhaseLabel::Dissipative,
    }
}

/// Evaluate every `(γ, size)` grid point concurrently. Point failures are
/// recorded on the point, not raised; output is ordered by `(γ, N)` with the
/// mean-field sentinel last.
pub fn scan_grid(config: &ScanConfig) -> Result<Vec<PhasePoint>> {
    if config.gammas.is_empty() || config.sizes.is_empty() {
        return Err(Error::InvalidParams("scan grids must be non-empty".into()));
    }
    if config.gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::InvalidParams("gammas must be positive and finite".into()));
    }

    let mut points: Vec<(f64, ScanSize)> = Vec::new();
    for gamma in &config.gammas {
        for size in &config.sizes {
            points.push((*gamma, *size));
        }
    }
    points.sort_by(|a, b| {
        a.0.partial_cmp(&b.0).unwrap().then(a.1.order_key().cmp(&b.1.order_key()))
    });

    let mut results: Vec<PhasePoint> = points
        .par_iter()
        .map(|(gamma, size)| {
            let outcome = match size {
                ScanSize::MeanField => evaluate_meanfield(config, *gamma)
                    .map(|(op, gap, lt, lc)| (op, gap, lt, lc, false)),
                ScanSize::Finite(n) => evaluate_finite(config, *gamma, *n),
            };
            match outcome {
                Ok((op, gap, lifetime, low_confidence, validity_warning)) => PhasePoint {
                    gamma_reduced: *gamma,
                    size: *size,
                    order_parameter: op.min(1.0),
                    spectral_gap: gap,
                    lifetime_decay_rate: lifetime,
                    label: label_point(config, op, gap, *size),
                    low_confidence,
                    validity_warning,
                    error: None,
                },
                Err(err) => PhasePoint {
                    gamma_reduced: *gamma,
                    size: *size,
                    order_parameter: 0.0,
                    spectral_gap: 0.0,
                    lifetime_decay_rate: 0.0,
                    label: PhaseLabel::Dissipative,
                    low_confidence: true,
                    validity_warning: false,
                    error: Some(err.to_string()),
                },
            }
        })
        .collect();
    // par_iter preserves input order; keep the explicit sort for clarity
    results.sort_by(|a, b| {
        a.gamma_reduced
            .partial_cmp(&b.gamma_reduced)
            .unwrap()
            .then(a.size.order_key().cmp(&b.size.order_key()))
    });
    Ok(results)
}

/// The near-imaginary conjugate eigenvalue pair of an effective spectrum:
/// smallest `|Re|` among eigenvalues with nonzero imaginary part below the
/// collective drive scale. Tracks the mode that turns into the limit cycle.
pub fn stripe0_imaginary_pair(
    spec: &SpectralData,
    rp: &ReducedParams,
    n_ancilla: u32,
) -> Result<(C64, C64)> {
    let scale = spec.operator_norm.max(1e-300);
    let im_floor = 1e-10 * scale;
    let drive_cap = 4.0 * rp.omega.abs().max(rp.kappa) * f64::from(n_ancilla + 1);
    let mut candidates: Vec<C64> = spec
        .eigenvalues
        .iter()
        .copied()
        .filter(|z| z.im > im_floor && z.im < drive_cap)
        .collect();
    if candidates.is_empty() {
        return Err(Error::NonOscillatory("no candidate eigenvalue pair".into()));
    }
    candidates.sort_by(|a, b| {
        a.re.abs()
            .partial_cmp(&b.re.abs())
            .unwrap()
            .then(b.im.abs().partial_cmp(&a.im.abs()).unwrap())
    });
    let top = candidates[0];
    let partner = spec
        .eigenvalues
        .iter()
        .copied()
        .min_by(|a, b| {
            (*a - top.conj()).norm().partial_cmp(&(*b - top.conj()).norm()).unwrap()
        })
        .ok_or_else(|| Error::NonOscillatory("no conjugate partner".into()))?;
    if (partner - top.conj()).norm() > 1e-6 * scale {
        return Err(Error::NonOscillatory("conjugate partner missing".into()));
    }
    Ok((top, partner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::OdeStats;

    fn synthetic_trajectory(f: impl Fn(f64) -> f64, t_end: f64, n: usize) -> Trajectory {
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * t_end / n as f64).collect();
        let m_z: Vec<f64> = times.iter().map(|t| f(*t)).collect();
        let zero = vec![0.0; times.len()];
        Trajectory {
            times,
            m: [zero.clone(), zero, m_z],
            central: None,
            trace_re: None,
            min_eigenvalue: None,
            total_spin_sq: None,
            total_spin: f64::NAN,
            checkpoints: Vec::new(),
            stats: OdeStats::default(),
        }
    }

    #[test]
    fn critical_gamma_values() {
        let p = SpinStarParams::dicke(1.0, 0.0, 0.0, 0.5, 1.0, 2).unwrap();
        assert_eq!(critical_gamma(&p).unwrap(), 2.0);
        let p = SpinStarParams::dicke(2.0, 0.0, 0.0, 1.0, 1.0, 2).unwrap();
        assert_eq!(critical_gamma(&p).unwrap(), 4.0);
        // at γ = γ_c the drive equals the effective dissipation
        let p = SpinStarParams::dicke(1.3, 0.0, 0.0, 0.4, 1.3 * 1.3 / 0.4, 2).unwrap();
        assert!((p.kappa() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn critical_gamma_rejects_nonpositive_drive() {
        let p = SpinStarParams::dicke(1.0, 0.0, 0.0, -0.2, 1.0, 2).unwrap();
        assert!(critical_gamma(&p).is_err());
    }

    #[test]
    fn order_parameter_constant_and_cosine() {
        let flat = synthetic_trajectory(|_| 0.3, 50.0, 1000);
        assert_eq!(order_parameter(&flat, 0.25).unwrap().value, 0.0);

        let wave = synthetic_trajectory(|t| (2.0 * t).cos(), 50.0, 2000);
        let op = order_parameter(&wave, 0.25).unwrap();
        assert!((op.value - 1.0).abs() < 0.01, "value {}", op.value);
        assert!(!op.low_confidence);
    }

    #[test]
    fn order_parameter_flags_short_window() {
        // window of 25% holds only a fraction of one period
        let wave = synthetic_trajectory(|t| (0.05 * t).cos(), 20.0, 400);
        let op = order_parameter(&wave, 0.25).unwrap();
        assert!(op.low_confidence);
    }

    fn quick_config(gammas: Vec<f64>, sizes: Vec<ScanSize>) -> ScanConfig {
        ScanConfig {
            gammas,
            sizes,
            j_xx: 1.0,
            omega_a: 0.0,
            omega_c: 0.0,
            omega_drive: 0.15,
            t_end: 300.0,
            samples: 1500,
            window_fraction: 0.25,
            op_threshold: 0.05,
            initial_direction: [0.0, 0.0, 1.0],
            rtol: 1e-8,
        }
    }

    #[test]
    fn meanfield_point_above_critical_is_ztc() {
        // γ_c = 1/0.15 ≈ 6.67; γ = 10 puts Ω/κ = 1.5
        let config = quick_config(vec![10.0], vec![ScanSize::MeanField]);
        let points = scan_grid(&config).unwrap();
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].label, PhaseLabel::Ztc, "{:?}", points[0]);
        assert!(points[0].order_parameter > 0.1);
        assert!(points[0].error.is_none());
    }

    #[test]
    fn meanfield_point_below_critical_is_melted() {
        // γ = 5 puts Ω/κ = 0.75 < 1
        let config = quick_config(vec![5.0], vec![ScanSize::MeanField]);
        let points = scan_grid(&config).unwrap();
        assert_eq!(points[0].label, PhaseLabel::Melted, "{:?}", points[0]);
        assert!(points[0].order_parameter < 1e-4);
        assert!(points[0].spectral_gap > 0.0);
    }

    #[test]
    fn scan_orders_points_and_is_deterministic() {
        let config = quick_config(
            vec![8.0, 4.0],
            vec![ScanSize::MeanField, ScanSize::Finite(4)],
        );
        let a = scan_grid(&config).unwrap();
        let b = scan_grid(&config).unwrap();
        assert_eq!(a.len(), 4);
        let order: Vec<(f64, ScanSize)> =
            a.iter().map(|p| (p.gamma_reduced, p.size)).collect();
        assert_eq!(
            order,
            vec![
                (4.0, ScanSize::Finite(4)),
                (4.0, ScanSize::MeanField),
                (8.0, ScanSize::Finite(4)),
                (8.0, ScanSize::MeanField),
            ]
        );
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.order_parameter.to_bits(), y.order_parameter.to_bits());
            assert_eq!(x.spectral_gap.to_bits(), y.spectral_gap.to_bits());
            assert_eq!(x.label, y.label);
        }
    }

    #[test]
    fn effective_gap_shrinks_inversely_with_gamma() {
        // the drive is kept far below κ over the whole sweep so the model
        // stays in the dissipative regime where the gap tracks 1/γ
        let n = 6;
        let gap_at = |gamma: f64| -> f64 {
            let params = SpinStarParams::dicke(1.0, 0.01, 0.1, 0.001, gamma, n).unwrap();
            let model = effective_lindbladian(&params).unwrap();
            let spec = eigendecompose(&model.superoperator().unwrap()).unwrap();
            let tol = spec.zero_threshold();
            -spec
                .eigenvalues
                .iter()
                .filter(|z| z.norm() > tol)
                .map(|z| z.re)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let gaps = [gap_at(20.0), gap_at(80.0), gap_at(320.0)];
        for w in gaps.windows(2) {
            let ratio = w[0] / w[1];
            assert!(
                (3.0..=5.0).contains(&ratio),
                "gap ratio {ratio} per 4x step in γ, gaps {gaps:?}"
            );
        }
    }

    #[test]
    fn melted_phase_pair_has_no_near_imaginary_mode() {
        // below the critical drive the slowest oscillating mode decays on
        // the same scale as the gap itself
        let n = 8;
        let gamma = 10.0;
        let params = SpinStarParams::dicke(1.0, 0.0, 0.0, 0.05, gamma, n).unwrap(); // Ω/κ = 0.5
        let model = effective_lindbladian(&params).unwrap();
        let spec = eigendecompose(&model.superoperator().unwrap()).unwrap();
        let tol = spec.zero_threshold();
        let gap = -spec
            .eigenvalues
            .iter()
            .filter(|z| z.norm() > tol)
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        let rp = ReducedParams::from_params(&params).unwrap();
        let (top, _) = stripe0_imaginary_pair(&spec, &rp, n).unwrap();
        assert!(
            top.re.abs() > 0.3 * gap,
            "melted-phase pair |Re| {:.3e} should be comparable to the gap {gap:.3e}",
            top.re.abs()
        );
    }

    #[test]
    fn unitary_spectrum_pair_is_purely_imaginary() {
        let n = 4;
        let spin = crate::operators::collective_spin_operators(n).unwrap();
        let gen = crate::liouville::build_superoperator(
            &(&spin.i_x * num_complex::Complex64::new(0.3, 0.0)),
            &[],
        )
        .unwrap();
        let spec = eigendecompose(&gen).unwrap();
        let rp = ReducedParams::new(0.3, 0.1).unwrap();
        let (top, partner) = stripe0_imaginary_pair(&spec, &rp, n).unwrap();
        assert!(top.re.abs() < 1e-10);
        assert!(partner.re.abs() < 1e-10);
    }

    #[test]
    fn label_flips_within_one_grid_step_of_critical_gamma() {
        // γ_c = J²/Ω = 1/0.15 ≈ 6.67
        let config = quick_config(vec![5.0, 6.0, 7.0, 8.0], vec![ScanSize::MeanField]);
        let points = scan_grid(&config).unwrap();
        let labels: Vec<PhaseLabel> = points.iter().map(|p| p.label).collect();
        assert_eq!(
            labels,
            vec![PhaseLabel::Melted, PhaseLabel::Melted, PhaseLabel::Ztc, PhaseLabel::Ztc]
        );
    }

    #[test]
    fn labels_are_robust_to_length_and_tolerance() {
        let base = quick_config(vec![10.0], vec![ScanSize::MeanField]);
        let mut longer = base.clone();
        longer.t_end *= 2.0;
        longer.samples *= 2;
        longer.rtol /= 2.0;
        let a = scan_grid(&base).unwrap();
        let b = scan_grid(&longer).unwrap();
        assert_eq!(a[0].label, b[0].label);
    }

    #[test]
    fn stripe0_pair_found_for_oscillating_effective_model() {
        let n = 8;
        let gamma = 10.0; // Ω/κ = 1.5 with Ω = 0.15
        let params = SpinStarParams::dicke(1.0, 0.0, 0.0, 0.15, gamma, n).unwrap();
        let model = effective_lindbladian(&params).unwrap();
        let spec = eigendecompose(&model.superoperator().unwrap()).unwrap();
        let rp = ReducedParams::from_params(&params).unwrap();
        let (a, b) = stripe0_imaginary_pair(&spec, &rp, n).unwrap();
        assert!((a.conj() - b).norm() < 1e-8);
        assert!(a.im > 0.0);
        assert!(a.re <= 0.0);
    }
}
