//! Time integration of full and effective master equations, with observable
//! recording.
//!
//! Two equivalent drivers share the adaptive integrator: [`evolve`] steps the
//! dense superoperator on the vectorized state, and [`evolve_lindblad`] steps
//! the same equation in matrix form from its `(H, jumps)` pieces, which is
//! much faster at large ancilla numbers. They are cross-checked in tests.

use faer::{c64, Mat};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, from_faer, to_faer};
use crate::liouville::{vectorize, SuperOp};
use crate::ode::{integrate_to_grid, OdeOptions, OdeStats};
use crate::operators::{
    collective_spin_operators, dagger, expectation, hermiticity_defect, identity, kron, trace,
};
use crate::signal::{fit_damped_cosine, OscillationFit};

/// Which tensor structure the evolving state lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSpace {
    /// Central spin ⊗ ancilla, dimension `2(N+1)`.
    Full { n_ancilla: u32 },
    /// Ancilla only, dimension `N+1`.
    Ancilla { n_ancilla: u32 },
}

impl StateSpace {
    pub fn dim(&self) -> usize {
        match self {
            StateSpace::Full { n_ancilla } => 2 * (*n_ancilla as usize + 1),
            StateSpace::Ancilla { n_ancilla } => *n_ancilla as usize + 1,
        }
    }

    pub fn n_ancilla(&self) -> u32 {
        match self {
            StateSpace::Full { n_ancilla } | StateSpace::Ancilla { n_ancilla } => *n_ancilla,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Times at which the full density matrix is stored; each must coincide
    /// with a grid time.
    pub checkpoint_times: Vec<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, checkpoint_times: Vec::new() }
    }
}

/// Recorded observable series along a trajectory.
///
/// Magnetizations are rescaled by the total spin, `m_α = ⟨I_α⟩/I` with
/// `I = N/2`; the per-spin normalization `⟨I_α⟩/N = m_α/2` is derived on
/// export. Central-spin expectations and density-matrix diagnostics are only
/// present for runs that have them.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub m: [Vec<f64>; 3],
    pub central: Option<[Vec<f64>; 3]>,
    pub trace_re: Option<Vec<f64>>,
    pub min_eigenvalue: Option<Vec<f64>>,
    /// `Tr(ρ Î²)`, conserved whenever the generator commutes with `Î²`.
    pub total_spin_sq: Option<Vec<f64>>,
    pub total_spin: f64,
    pub checkpoints: Vec<(f64, Array2<C64>)>,
    pub stats: OdeStats,
}

impl Trajectory {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        match name {
            "m_x" => Some(&self.m[0]),
            "m_y" => Some(&self.m[1]),
            "m_z" => Some(&self.m[2]),
            "s_x" => self.central.as_ref().map(|c| c[0].as_slice()),
            "s_y" => self.central.as_ref().map(|c| c[1].as_slice()),
            "s_z" => self.central.as_ref().map(|c| c[2].as_slice()),
            "trace" => self.trace_re.as_deref(),
            "min_eig" => self.min_eigenvalue.as_deref(),
            "i2" => self.total_spin_sq.as_deref(),
            _ => None,
        }
    }
}

struct ObservableSet {
    i_ops: [Array2<C64>; 3],
    s_ops: Option<[Array2<C64>; 3]>,
    i_sq: Array2<C64>,
    total_spin: f64,
}

impl ObservableSet {
    fn build(space: StateSpace) -> Result<Self> {
        let n = space.n_ancilla();
        let spin = collective_spin_operators(n)?;
        let i_sq_bare = spin.total_spin_squared();
        match space {
            StateSpace::Ancilla { .. } => Ok(Self {
                i_ops: [spin.i_x, spin.i_y, spin.i_z],
                s_ops: None,
                i_sq: i_sq_bare,
                total_spin: spin.total_spin,
            }),
            StateSpace::Full { .. } => {
                let central = crate::operators::central_spin_operators();
                let id_c = identity(2);
                let id_a = identity(spin.dim());
                Ok(Self {
                    i_ops: [
                        kron(&id_c, &spin.i_x),
                        kron(&id_c, &spin.i_y),
                        kron(&id_c, &spin.i_z),
                    ],
                    s_ops: Some([
                        kron(&central.i_x, &id_a),
                        kron(&central.i_y, &id_a),
                        kron(&central.i_z, &id_a),
                    ]),
                    i_sq: kron(&id_c, &i_sq_bare),
                    total_spin: spin.total_spin,
                })
            }
        }
    }
}

fn check_physical(rho: &Array2<C64>) -> Result<()> {
    let dev = hermiticity_defect(rho);
    if dev > 1e-8 {
        return Err(Error::NonPhysicalState(format!("hermiticity deviation {dev:.3e}")));
    }
    let tr = trace(rho);
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::NonPhysicalState(format!("trace {tr}")));
    }
    let min = linalg::min_eigenvalue_hermitian(rho)?;
    if min < -1e-8 {
        return Err(Error::NonPhysicalState(format!("negative eigenvalue {min:.3e}")));
    }
    Ok(())
}

struct Recorder {
    obs: ObservableSet,
    traj: Trajectory,
    checkpoint_times: Vec<f64>,
}

impl Recorder {
    fn new(obs: ObservableSet, n_samples: usize, checkpoint_times: Vec<f64>) -> Self {
        let has_central = obs.s_ops.is_some();
        let total_spin = obs.total_spin;
        Self {
            obs,
            traj: Trajectory {
                times: Vec::with_capacity(n_samples),
                m: std::array::from_fn(|_| Vec::with_capacity(n_samples)),
                central: if has_central {
                    Some(std::array::from_fn(|_| Vec::with_capacity(n_samples)))
                } else {
                    None
                },
                trace_re: Some(Vec::with_capacity(n_samples)),
                min_eigenvalue: Some(Vec::with_capacity(n_samples)),
                total_spin_sq: Some(Vec::with_capacity(n_samples)),
                total_spin,
                checkpoints: Vec::new(),
                stats: OdeStats::default(),
            },
            checkpoint_times,
        }
    }

    fn record(&mut self, t: f64, rho: &Array2<C64>) {
        self.traj.times.push(t);
        for a in 0..3 {
            let val = expectation(&self.obs.i_ops[a], rho).re / self.obs.total_spin;
            self.traj.m[a].push(val);
        }
        if let (Some(series), Some(ops)) = (self.traj.central.as_mut(), self.obs.s_ops.as_ref()) {
            for a in 0..3 {
                series[a].push(expectation(&ops[a], rho).re);
            }
        }
        if let Some(tr) = self.traj.trace_re.as_mut() {
            tr.push(trace(rho).re);
        }
        if let Some(me) = self.traj.min_eigenvalue.as_mut() {
            let herm = (rho + &dagger(rho)) * C64::new(0.5, 0.0);
            me.push(linalg::min_eigenvalue_hermitian(&herm).unwrap_or(f64::NAN));
        }
        if let Some(isq) = self.traj.total_spin_sq.as_mut() {
            isq.push(expectation(&self.obs.i_sq, rho).re);
        }
        if self
            .checkpoint_times
            .iter()
            .any(|ct| (ct - t).abs() <= 1e-12 * t.abs().max(1.0))
        {
            self.traj.checkpoints.push((t, rho.clone()));
        }
    }
}

/// Integrate `d|ρ⟩⟩/dt = L|ρ⟩⟩` for a dense superoperator, recording
/// observables on the given time grid.
pub fn evolve(
    generator: &SuperOp,
    rho0: &Array2<C64>,
    grid: &[f64],
    space: StateSpace,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if rho0.nrows() != generator.hilbert_dim || rho0.nrows() != space.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state {}×{} vs generator dimension {} vs space {}",
            rho0.nrows(),
            rho0.ncols(),
            generator.hilbert_dim,
            space.dim()
        )));
    }
    check_physical(rho0)?;
    let obs = ObservableSet::build(space)?;
    let mut rec = Recorder::new(obs, grid.len(), opts.checkpoint_times.clone());

    let y0: Array1<C64> = vectorize(rho0);
    let ode = OdeOptions { rtol: opts.rtol, atol: opts.atol, ..Default::default() };
    let stats = integrate_to_grid(
        |_t, v: &Array1<C64>| generator.matrix.dot(v),
        y0,
        grid,
        &ode,
        |_, t, v| {
            let rho = crate::liouville::devectorize(v).expect("square by construction");
            rec.record(t, &rho);
        },
    )?;
    rec.traj.stats = stats;
    Ok(rec.traj)
}

/// Integrate the same master equation in matrix form,
/// `ρ̇ = -i[H, ρ] + Σ_k γ_k (O_k ρ O_k† - ½{O_k†O_k, ρ})`.
pub fn evolve_lindblad(
    h: &Array2<C64>,
    jumps: &[(Array2<C64>, f64)],
    rho0: &Array2<C64>,
    grid: &[f64],
    space: StateSpace,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let d = h.nrows();
    if rho0.nrows() != d || space.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "state {} vs hamiltonian {} vs space {}",
            rho0.nrows(),
            d,
            space.dim()
        )));
    }
    for (op, rate) in jumps {
        if op.nrows() != d {
            return Err(Error::DimensionMismatch("jump dimension".into()));
        }
        if *rate < 0.0 {
            return Err(Error::NegativeRate(*rate));
        }
    }
    check_physical(rho0)?;
    let obs = ObservableSet::build(space)?;
    let mut rec = Recorder::new(obs, grid.len(), opts.checkpoint_times.clone());

    struct Channel {
        jump: Mat<c64>,
        jump_dag: Mat<c64>,
        weight: Mat<c64>, // L†L
        rate: f64,
    }
    let h_f = to_faer(h);
    let channels: Vec<Channel> = jumps
        .iter()
        .map(|(op, rate)| {
            let jump = to_faer(op);
            let jump_dag = to_faer(&dagger(op));
            let weight = &jump_dag * &jump;
            Channel { jump, jump_dag, weight, rate: *rate }
        })
        .collect();

    let minus_i = c64::new(0.0, -1.0);
    let rhs = |_t: f64, rho: &Mat<c64>| -> Mat<c64> {
        let mut out = (&h_f * rho - rho * &h_f) * faer::Scale(minus_i);
        for ch in &channels {
            let gain = &ch.jump * rho * &ch.jump_dag;
            let loss = &ch.weight * rho + rho * &ch.weight;
            out += (gain - loss * faer::Scale(c64::new(0.5, 0.0)))
                * faer::Scale(c64::new(ch.rate, 0.0));
        }
        out
    };

    let ode = OdeOptions { rtol: opts.rtol, atol: opts.atol, ..Default::default() };
    let stats = integrate_to_grid(rhs, to_faer(rho0), grid, &ode, |_, t, state| {
        let rho = from_faer(state);
        rec.record(t, &rho);
    })?;
    rec.traj.stats = stats;
    Ok(rec.traj)
}

/// Spin-coherent state of the `I = N/2` representation polarized along a
/// direction: the rotated highest-weight `I_z` eigenstate, as a density
/// matrix.
pub fn polarized_dicke_state(n: u32, direction: [f64; 3]) -> Result<Array2<C64>> {
    let norm = (direction.iter().map(|v| v * v).sum::<f64>()).sqrt();
    if norm < 1e-12 {
        return Err(Error::InvalidParams("direction must be a nonzero vector".into()));
    }
    let (x, y, z) = (direction[0] / norm, direction[1] / norm, direction[2] / norm);
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);

    let spin = collective_spin_operators(n)?;
    let dim = spin.dim();
    let mut psi = Array1::<C64>::zeros(dim);
    psi[0] = C64::new(1.0, 0.0);

    let rot_y = linalg::hermitian_exponential(&spin.i_y, C64::new(0.0, -theta))?;
    let rot_z = linalg::hermitian_exponential(&spin.i_z, C64::new(0.0, -phi))?;
    let psi = rot_z.dot(&rot_y.dot(&psi));

    let mut rho = Array2::<C64>::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            rho[[i, j]] = psi[i] * psi[j].conj();
        }
    }
    Ok(rho)
}

/// Fit `A·e^{-κt}·cos(ωt+φ) + C` to a recorded observable; returns the fit
/// with `(frequency, decay rate)` and a confidence flag.
pub fn oscillation_lifetime(traj: &Trajectory, observable: &str) -> Result<OscillationFit> {
    let series = traj
        .series(observable)
        .ok_or_else(|| Error::InvalidParams(format!("unknown observable `{observable}`")))?;
    fit_damped_cosine(&traj.times, series)
}
