//! Mean-field dynamics of the spin star: the six coupled equations for the
//! rescaled ancilla magnetization and the central spin, the adiabatic
//! elimination of the central spin, the reduced three-variable flow, its
//! fixed-point families with stability, and limit-cycle frequency
//! measurement.
//!
//! The fixed points and their physicality windows are solved from the flow
//! equations themselves rather than transcribed: for drive `Ω > 0` the
//! `m_z = 0` family has `m_y = +κ/Ω` and exists on the sphere for `Ω ≥ κ`,
//! while the `m_x = 0` family has `m_y = +Ω/κ` and exists for `Ω ≤ κ`.

use ndarray::{arr1, Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::ode::{integrate_to_grid, OdeOptions, OdeStats};
use crate::params::SpinStarParams;
use crate::signal;

/// Rescaled ancilla magnetization `m_α = ⟨I_α⟩/I` and central-spin
/// expectations `⟨S_α⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub m: [f64; 3],
    pub s: [f64; 3],
}

impl MeanFieldState {
    pub fn new(m: [f64; 3], s: [f64; 3]) -> Self {
        Self { m, s }
    }

    /// Fully polarized ancillas with the central spin in its ground state.
    pub fn polarized(direction: [f64; 3]) -> Self {
        Self { m: direction, s: [0.0, 0.0, -0.5] }
    }
}

/// Parameters of the reduced flow: drive `Ω` (from `J_zx = -2Ω`) and
/// collective dissipation `κ = J_xx²/γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub omega: f64,
    pub kappa: f64,
}

impl ReducedParams {
    pub fn new(omega: f64, kappa: f64) -> Result<Self> {
        if kappa <= 0.0 || !kappa.is_finite() || !omega.is_finite() {
            return Err(Error::InvalidParams(format!(
                "need kappa > 0 and finite omega, got kappa={kappa}, omega={omega}"
            )));
        }
        Ok(Self { omega, kappa })
    }

    pub fn from_params(params: &SpinStarParams) -> Result<Self> {
        Self::new(params.omega_drive(), params.kappa())
    }
}

/// Time derivative of the six mean-field variables.
///
/// The ancilla block is expressed in the rescaled `m` variables (every
/// interaction term carries exactly one ancilla factor, so the rescaling is
/// exact); the central block keeps `⟨I_α⟩ = I·m_α` and `Γ = γ·I` explicit.
pub fn full_rhs(state: &MeanFieldState, params: &SpinStarParams) -> MeanFieldState {
    let j = &params.j;
    let (w_a, w_c) = (params.omega_a, params.omega_c);
    let total_spin = params.total_spin();
    let gamma_big = params.gamma_big();
    let [mx, my, mz] = state.m;
    let [sx, sy, sz] = state.s;
    let (ix, iy, iz) = (total_spin * mx, total_spin * my, total_spin * mz);

    let dm = [
        -w_a * my + j[1][1] * sy * mz - j[2][2] * sz * my,
        w_a * mx + j[2][2] * sz * mx - j[0][0] * sx * mz - j[2][0] * sz * mz,
        j[0][0] * sx * my - j[1][1] * sy * mx + j[2][0] * sz * my,
    ];
    let ds = [
        -w_c * sy + j[1][1] * sz * iy + j[2][0] * sy * ix - j[2][2] * sy * iz
            - 0.5 * gamma_big * sx,
        -w_c * sx - j[0][0] * sz * ix + j[2][0] * sx * ix + j[2][2] * sx * iz
            - 0.5 * gamma_big * sy,
        j[0][0] * sy * ix - j[1][1] * sx * iy - gamma_big * (sz + 0.5),
    ];
    MeanFieldState { m: dm, s: ds }
}

/// Large-Γ fixed point of the central spin slaved to the magnetization:
/// `(-J_yy·m_y/γ, J_xx·m_x/γ, -1/2)`.
pub fn adiabatic_central_spin(m: [f64; 3], params: &SpinStarParams) -> [f64; 3] {
    let gamma = params.gamma_reduced;
    [-params.j[1][1] * m[1] / gamma, params.j[0][0] * m[0] / gamma, -0.5]
}

/// Reduced flow on the magnetization sphere:
/// `(κ m_x m_z, κ m_y m_z - Ω m_z, -κ(m_x² + m_y²) + Ω m_y)`.
pub fn reduced_rhs(m: [f64; 3], rp: &ReducedParams) -> [f64; 3] {
    let (k, w) = (rp.kappa, rp.omega);
    [k * m[0] * m[2], k * m[1] * m[2] - w * m[2], -k * (m[0] * m[0] + m[1] * m[1]) + w * m[1]]
}

/// Analytic Jacobian of [`reduced_rhs`].
pub fn reduced_jacobian(m: [f64; 3], rp: &ReducedParams) -> [[f64; 3]; 3] {
    let (k, w) = (rp.kappa, rp.omega);
    [
        [k * m[2], 0.0, k * m[0]],
        [0.0, k * m[2], k * m[1] - w],
        [-2.0 * k * m[0], -2.0 * k * m[1] + w, 0.0],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// Real nonzero stability eigenvalues.
    Saddle,
    /// Purely imaginary eigenvalue pair; neighborhoods orbit the point.
    Center,
    /// All eigenvalues vanish or the family itself degenerates.
    Degenerate,
}

/// One fixed point of the reduced flow.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    /// 1: the `m_z = 0` family; 2: the `m_x = 0` family.
    pub family: u8,
    /// Components on the sphere; `NaN` marks a component that is not real
    /// for these parameters (unphysical family).
    pub m: [f64; 3],
    pub physical: bool,
    pub jacobian_eigenvalues: [C64; 3],
    pub classification: Classification,
}

fn classify(eigs: &[C64; 3], scale: f64) -> Classification {
    let tol = 1e-9 * scale.max(1e-12);
    let nonzero: Vec<&C64> = eigs.iter().filter(|z| z.norm() > tol).collect();
    if nonzero.is_empty() {
        return Classification::Degenerate;
    }
    if nonzero.iter().all(|z| z.im.abs() <= tol && z.re.abs() > tol) {
        return Classification::Saddle;
    }
    if nonzero.iter().all(|z| z.re.abs() <= tol && z.im.abs() > tol) {
        return Classification::Center;
    }
    Classification::Degenerate
}

/// Eigenvalues of the analytic Jacobian at a point on the sphere.
fn jacobian_eigenvalues(m: [f64; 3], rp: &ReducedParams) -> Result<[C64; 3]> {
    let j = reduced_jacobian(m, rp);
    let a = Array2::from_shape_fn((3, 3), |(r, c)| C64::new(j[r][c], 0.0));
    let pairs = crate::linalg::eig(&a)?;
    let mut eigs: Vec<C64> = pairs.values;
    eigs.sort_by(|p, q| {
        p.re.partial_cmp(&q.re).unwrap().then(p.im.partial_cmp(&q.im).unwrap())
    });
    Ok([eigs[0], eigs[1], eigs[2]])
}

/// Both fixed-point families of the reduced flow, each with its two sphere
/// branches, solved from the equations with physicality and stability.
pub fn fixed_points(rp: &ReducedParams) -> Result<Vec<FixedPoint>> {
    let (k, w) = (rp.kappa, rp.omega);
    if k <= 0.0 || k.is_nan() {
        return Err(Error::InvalidParams("kappa must be positive".into()));
    }
    let scale = k.max(w.abs());
    let mut out = Vec::with_capacity(4);

    // family 1: m_z = 0, m_y = κ/Ω, m_x = ±sqrt(1 - (κ/Ω)²)
    if w.abs() > 1e-300 {
        let my = k / w;
        let disc = 1.0 - my * my;
        for sign in [1.0, -1.0] {
            if disc >= 0.0 {
                let m = [sign * disc.sqrt(), my, 0.0];
                let eigs = jacobian_eigenvalues(m, rp)?;
                let classification = classify(&eigs, scale);
                out.push(FixedPoint {
                    family: 1,
                    m,
                    physical: true,
                    jacobian_eigenvalues: eigs,
                    classification,
                });
            } else {
                // off the sphere: closed-form eigenvalues {0, ±sqrt(κ²-Ω²)}
                let root = C64::new(k * k - w * w, 0.0).sqrt();
                let eigs = [C64::new(0.0, 0.0), root, -root];
                out.push(FixedPoint {
                    family: 1,
                    m: [f64::NAN, my, 0.0],
                    physical: false,
                    jacobian_eigenvalues: eigs,
                    classification: classify(&eigs, scale),
                });
            }
        }
    } else {
        // Ω = 0: the m_z = 0 family has no solution on the sphere
        out.push(FixedPoint {
            family: 1,
            m: [f64::NAN, f64::NAN, 0.0],
            physical: false,
            jacobian_eigenvalues: [C64::new(0.0, 0.0); 3],
            classification: Classification::Degenerate,
        });
    }

    // family 2: m_x = 0, m_y = Ω/κ, m_z = ±sqrt(1 - (Ω/κ)²)
    let my = w / k;
    let disc = 1.0 - my * my;
    for sign in [1.0, -1.0] {
        if disc >= 0.0 {
            let m = [0.0, my, sign * disc.sqrt()];
            let eigs = jacobian_eigenvalues(m, rp)?;
            let classification = classify(&eigs, scale);
            out.push(FixedPoint {
                family: 2,
                m,
                physical: true,
                jacobian_eigenvalues: eigs,
                classification,
            });
        } else {
            let mz = C64::new(disc, 0.0).sqrt() * C64::new(sign, 0.0);
            let eig = mz * k;
            let eigs = [C64::new(0.0, 0.0), eig, eig];
            out.push(FixedPoint {
                family: 2,
                m: [0.0, my, f64::NAN],
                physical: false,
                jacobian_eigenvalues: eigs,
                classification: classify(&eigs, scale),
            });
        }
    }
    Ok(out)
}

/// Which mean-field system to integrate.
#[derive(Debug, Clone, Copy)]
pub enum MeanFieldSystem<'a> {
    Reduced(&'a ReducedParams),
    Full(&'a SpinStarParams),
}

#[derive(Debug, Clone)]
pub struct MeanFieldOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for MeanFieldOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12 }
    }
}

/// Integrate the mean-field flow on a time grid.
///
/// The reduced flow conserves `|m|` identically; the recorded trajectory is
/// checked against drift at the integrator tolerance.
pub fn integrate_meanfield(
    system: MeanFieldSystem<'_>,
    initial: &MeanFieldState,
    grid: &[f64],
    opts: &MeanFieldOptions,
) -> Result<Trajectory> {
    let m_norm = initial.m.iter().map(|v| v * v).sum::<f64>().sqrt();
    if m_norm > 1.0 + 1e-6 {
        return Err(Error::InvalidParams(format!("|m| = {m_norm} exceeds 1")));
    }
    let ode = OdeOptions { rtol: opts.rtol, atol: opts.atol, ..Default::default() };

    let mut times = Vec::with_capacity(grid.len());
    let mut m: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(grid.len()));
    let stats: OdeStats;
    let mut central: Option<[Vec<f64>; 3]> = None;
    let total_spin;

    match system {
        MeanFieldSystem::Reduced(rp) => {
            rp.validate_positive()?;
            total_spin = f64::NAN;
            let y0 = arr1(&initial.m);
            stats = integrate_to_grid(
                |_t, y: &Array1<f64>| {
                    let d = reduced_rhs([y[0], y[1], y[2]], rp);
                    arr1(&d)
                },
                y0,
                grid,
                &ode,
                |_, t, y| {
                    times.push(t);
                    for a in 0..3 {
                        m[a].push(y[a]);
                    }
                },
            )?;
        }
        MeanFieldSystem::Full(params) => {
            params.validate()?;
            let s_norm = initial.s.iter().map(|v| v * v).sum::<f64>().sqrt();
            if s_norm > 0.5 + 1e-6 {
                return Err(Error::InvalidParams(format!("|s| = {s_norm} exceeds 1/2")));
            }
            total_spin = params.total_spin();
            let mut c: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(grid.len()));
            let y0 = arr1(&[
                initial.m[0],
                initial.m[1],
                initial.m[2],
                initial.s[0],
                initial.s[1],
                initial.s[2],
            ]);
            stats = integrate_to_grid(
                |_t, y: &Array1<f64>| {
                    let state = MeanFieldState {
                        m: [y[0], y[1], y[2]],
                        s: [y[3], y[4], y[5]],
                    };
                    let d = full_rhs(&state, params);
                    arr1(&[d.m[0], d.m[1], d.m[2], d.s[0], d.s[1], d.s[2]])
                },
                y0,
                grid,
                &ode,
                |_, t, y| {
                    times.push(t);
                    for a in 0..3 {
                        m[a].push(y[a]);
                        c[a].push(y[3 + a]);
                    }
                },
            )?;
            central = Some(c);
        }
    }

    Ok(Trajectory {
        times,
        m,
        central,
        trace_re: None,
        min_eigenvalue: None,
        total_spin_sq: None,
        total_spin,
        checkpoints: Vec::new(),
        stats,
    })
}

impl ReducedParams {
    fn validate_positive(&self) -> Result<()> {
        if self.kappa <= 0.0 || self.kappa.is_nan() {
            return Err(Error::InvalidParams("kappa must be positive".into()));
        }
        Ok(())
    }
}

/// Dominant oscillation frequency of a recorded observable over the second
/// half of the trajectory.
pub fn limit_cycle_frequency(traj: &Trajectory, observable: &str) -> Result<f64> {
    let series = traj
        .series(observable)
        .ok_or_else(|| Error::InvalidParams(format!("unknown observable `{observable}`")))?;
    let start = traj.times.len() / 2;
    signal::dominant_frequency(&traj.times[start..], &series[start..])
}
