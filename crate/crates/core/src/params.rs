//! Physical parameters of the dissipative spin-star model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coupling constants of the spin-star model and the measurement channel.
///
/// All frequencies are expressed in units of the `j[0][0]` coupling, which is
/// 1 in the standard configurations. The measurement strength is stored in
/// reduced form; the bare rate is `Γ = γ·I` with total ancilla spin
/// `I = N/2`, so `Γ` and `I` are always derived, never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinStarParams {
    /// Central-spin frequency ω_c.
    pub omega_c: f64,
    /// Ancilla frequency ω_a.
    pub omega_a: f64,
    /// Real coupling matrix; `j[a][b]` couples the central component `a` to
    /// the collective ancilla component `b`, with (0, 1, 2) = (x, y, z).
    pub j: [[f64; 3]; 3],
    /// Reduced measurement strength γ > 0.
    pub gamma_reduced: f64,
    /// Number of ancilla spins N ≥ 1.
    pub n_ancilla: u32,
}

impl SpinStarParams {
    pub fn new(
        omega_c: f64,
        omega_a: f64,
        j: [[f64; 3]; 3],
        gamma_reduced: f64,
        n_ancilla: u32,
    ) -> Result<Self> {
        let p = Self { omega_c, omega_a, j, gamma_reduced, n_ancilla };
        p.validate()?;
        Ok(p)
    }

    /// Anisotropic coupling pattern `J_yy = J_xx`, `J_zz = 2ω_a`,
    /// `J_zx = -2Ω` under which the ancilla master equation reduces to the
    /// driven Dicke model with drive `Ω` and collective decay `κ/I`,
    /// `κ = J_xx²/γ`.
    pub fn dicke(
        j_xx: f64,
        omega_a: f64,
        omega_c: f64,
        omega_drive: f64,
        gamma_reduced: f64,
        n_ancilla: u32,
    ) -> Result<Self> {
        let mut j = [[0.0; 3]; 3];
        j[0][0] = j_xx;
        j[1][1] = j_xx;
        j[2][2] = 2.0 * omega_a;
        j[2][0] = -2.0 * omega_drive;
        Self::new(omega_c, omega_a, j, gamma_reduced, n_ancilla)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ancilla < 1 {
            return Err(Error::InvalidParams("n_ancilla must be at least 1".into()));
        }
        if self.gamma_reduced <= 0.0 || self.gamma_reduced.is_nan() {
            return Err(Error::InvalidParams(format!(
                "gamma_reduced must be positive, got {}",
                self.gamma_reduced
            )));
        }
        let mut all = vec![self.omega_c, self.omega_a, self.gamma_reduced];
        all.extend(self.j.iter().flatten());
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Total ancilla spin `I = N/2`.
    pub fn total_spin(&self) -> f64 {
        f64::from(self.n_ancilla) / 2.0
    }

    /// Bare measurement rate `Γ = γ·I`.
    pub fn gamma_big(&self) -> f64 {
        self.gamma_reduced * self.total_spin()
    }

    /// Validity threshold of the reduced description:
    /// the largest Hamiltonian scale `max{|J_ab|, |ω_c|, |ω_a|}`.
    pub fn gamma0(&self) -> f64 {
        self.j
            .iter()
            .flatten()
            .map(|v| v.abs())
            .fold(self.omega_c.abs().max(self.omega_a.abs()), f64::max)
    }

    /// Effective drive `Ω = -J_zx/2` of the anisotropic coupling pattern.
    pub fn omega_drive(&self) -> f64 {
        -self.j[2][0] / 2.0
    }

    /// Effective collective dissipation rate `κ = J_xx²/γ`.
    pub fn kappa(&self) -> f64 {
        self.j[0][0] * self.j[0][0] / self.gamma_reduced
    }
}
