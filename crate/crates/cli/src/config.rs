//! Run configuration: one JSON file drives one command. An emitted manifest
//! is itself a valid configuration, so any run can be reproduced from its
//! manifest alone.

use serde::{Deserialize, Serialize};

use spinstar::params::SpinStarParams;
use spinstar::phase::ScanConfig;

pub const MANIFEST_SCHEMA: &str = "spinstar-run/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Full Liouvillian spectrum with stripe labels (plus the effective one).
    Spectrum,
    /// Effective ancilla master equation as a JSON record.
    Reduce,
    /// Integrate the full master equation.
    Evolve,
    /// Integrate the effective ancilla master equation.
    EvolveEffective,
    /// Integrate mean-field equations and measure frequencies.
    Meanfield,
    /// Stability report for the reduced-flow fixed points.
    FixedPoints,
    /// Sweep the (γ, N) grid and label phases.
    PhaseScan,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_end: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanFieldKind {
    Reduced,
    Full,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanFieldSection {
    pub system: MeanFieldKind,
    /// Drive Ω; defaults to the value implied by `params`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Rate κ; defaults to the value implied by `params`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m0: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s0: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<SpinStarParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeGrid>,
    /// Ancilla polarization direction of the initial state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_direction: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meanfield: Option<MeanFieldSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_prefix: Option<String>,
    /// Integrator relative tolerance; the CLI flag overrides this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// For `spectrum`: also emit the effective-model spectrum (default true).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_effective: Option<bool>,
    /// Run report carried by manifests; ignored (and regenerated) on replay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<serde_json::Value>,
}

impl RunConfig {
    /// Fill every optional knob with its default so the manifest is a
    /// complete, replayable record.
    pub fn resolved(mut self, flag_tolerance: Option<f64>) -> Self {
        self.schema = Some(MANIFEST_SCHEMA.to_string());
        self.report = None;
        if flag_tolerance.is_some() {
            self.tolerance = flag_tolerance;
        }
        self.output_prefix.get_or_insert_with(|| "run".to_string());
        match self.command {
            Command::Evolve | Command::EvolveEffective => {
                self.time.get_or_insert(TimeGrid { t_end: 50.0, samples: 500 });
                self.initial_direction.get_or_insert([0.0, 0.0, 1.0]);
                self.checkpoint_times.get_or_insert_with(Vec::new);
                self.tolerance.get_or_insert(1e-8);
            }
            Command::Meanfield => {
                self.time.get_or_insert(TimeGrid { t_end: 400.0, samples: 4000 });
                self.tolerance.get_or_insert(1e-10);
                if let Some(mf) = self.meanfield.as_mut() {
                    mf.m0.get_or_insert([0.0, 0.0, 1.0]);
                    if mf.system == MeanFieldKind::Full {
                        mf.s0.get_or_insert([0.0, 0.0, -0.5]);
                    }
                }
            }
            Command::Spectrum => {
                self.include_effective.get_or_insert(true);
            }
            _ => {}
        }
        self
    }

    pub fn time_grid(&self) -> Vec<f64> {
        let tg = self.time.unwrap_or(TimeGrid { t_end: 50.0, samples: 500 });
        (0..=tg.samples).map(|k| k as f64 * tg.t_end / tg.samples as f64).collect()
    }
}
