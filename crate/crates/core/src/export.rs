//! Plot-ready CSV and JSON serialization.
//!
//! Floats are rendered with 12 significant digits in scientific notation so
//! identical runs produce byte-identical files.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde_json::{json, Value};

use crate::dynamics::Trajectory;
use crate::liouville::SpectralData;
use crate::meanfield::{Classification, FixedPoint};
use crate::phase::{PhaseLabel, PhasePoint, ScanSize};
use crate::zeno::EffectiveModel;

/// Fixed-width float rendering: 12 significant digits, scientific notation.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{:.11e}", x)
    }
}

/// Spectrum CSV with columns `re,im,stripe,residual`. Unclassified spectra
/// (e.g. effective generators, which live entirely in the steady-state
/// stripe) report stripe 0.
pub fn spectrum_csv(spec: &SpectralData) -> String {
    let mut out = String::from("re,im,stripe,residual\n");
    for (k, lambda) in spec.eigenvalues.iter().enumerate() {
        let stripe = spec.stripes.as_ref().map_or(0, |s| s.mu[k]);
        let residual = spec.residuals.get(k).copied().unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_sig(lambda.re),
            format_sig(lambda.im),
            stripe,
            format_sig(residual)
        ));
    }
    out
}

/// Trajectory CSV: time, both magnetization normalizations (`m_α = ⟨I_α⟩/I`
/// and `⟨I_α⟩/N = m_α/2`), then whichever of the central-spin and
/// density-matrix diagnostics the run recorded.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut header = String::from("t,m_x,m_y,m_z,m_x_over_N,m_y_over_N,m_z_over_N");
    if traj.central.is_some() {
        header.push_str(",s_x,s_y,s_z");
    }
    if traj.trace_re.is_some() {
        header.push_str(",trace");
    }
    if traj.min_eigenvalue.is_some() {
        header.push_str(",min_eig");
    }
    if traj.total_spin_sq.is_some() {
        header.push_str(",i2");
    }
    let mut out = header;
    out.push('\n');

    for k in 0..traj.times.len() {
        let mut row = vec![format_sig(traj.times[k])];
        for a in 0..3 {
            row.push(format_sig(traj.m[a][k]));
        }
        for a in 0..3 {
            row.push(format_sig(traj.m[a][k] / 2.0));
        }
        if let Some(c) = &traj.central {
            for series in c {
                row.push(format_sig(series[k]));
            }
        }
        if let Some(tr) = &traj.trace_re {
            row.push(format_sig(tr[k]));
        }
        if let Some(me) = &traj.min_eigenvalue {
            row.push(format_sig(me[k]));
        }
        if let Some(isq) = &traj.total_spin_sq {
            row.push(format_sig(isq[k]));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn size_field(size: &ScanSize) -> String {
    match size {
        ScanSize::Finite(n) => n.to_string(),
        ScanSize::MeanField => "inf".to_string(),
    }
}

fn label_field(label: PhaseLabel) -> &'static str {
    match label {
        PhaseLabel::Dissipative => "dissipative",
        PhaseLabel::UnitaryZenoLike => "unitary-zeno-like",
        PhaseLabel::Melted => "melted",
        PhaseLabel::Ztc => "ztc",
    }
}

/// Phase-scan CSV with columns `gamma,n,order_parameter,gap,lifetime,label`.
pub fn phase_csv(points: &[PhasePoint]) -> String {
    let mut out = String::from("gamma,n,order_parameter,gap,lifetime,label\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_sig(p.gamma_reduced),
            size_field(&p.size),
            format_sig(p.order_parameter),
            format_sig(p.spectral_gap),
            format_sig(p.lifetime_decay_rate),
            label_field(p.label)
        ));
    }
    out
}

/// Complex matrix as nested `[re, im]` pairs.
pub fn complex_matrix_json(m: &Array2<C64>) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            let row: Vec<Value> =
                (0..m.ncols()).map(|j| json!([m[[i, j]].re, m[[i, j]].im])).collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

/// JSON record of an effective model: Hamiltonians, channels, coefficient
/// matrices, and the validity bookkeeping.
pub fn effective_model_json(model: &EffectiveModel) -> Value {
    json!({
        "schema": "spinstar-effective-model/1",
        "h_eff": complex_matrix_json(&model.h_eff),
        "h_z": complex_matrix_json(&model.h_z),
        "lamb_shift": complex_matrix_json(&model.lamb_shift),
        "jump_terms": model
            .jump_terms
            .iter()
            .map(|(op, rate)| json!({"operator": complex_matrix_json(op), "rate": rate}))
            .collect::<Vec<_>>(),
        "a_matrix": complex_matrix_json(&model.a_matrix),
        "kossakowski": complex_matrix_json(&model.kossakowski),
        "truncation": {
            "gamma_reduced": model.truncation.gamma_reduced,
            "gamma_big": model.truncation.gamma_big,
            "gamma0": model.truncation.gamma0,
            "validity_warning": model.truncation.validity_warning,
            "neglected_order": "O(1/Gamma^2)",
        },
    })
}

fn classification_field(c: Classification) -> &'static str {
    match c {
        Classification::Saddle => "saddle",
        Classification::Center => "center",
        Classification::Degenerate => "degenerate",
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() { json!(x) } else { Value::Null }
}

/// JSON stability report for the reduced-flow fixed points.
pub fn fixed_points_json(points: &[FixedPoint]) -> Value {
    let entries: Vec<Value> = points
        .iter()
        .map(|f| {
            json!({
                "family": f.family,
                "m": f.m.iter().map(|v| finite_or_null(*v)).collect::<Vec<_>>(),
                "physical": f.physical,
                "jacobian_eigenvalues": f
                    .jacobian_eigenvalues
                    .iter()
                    .map(|z| json!([z.re, z.im]))
                    .collect::<Vec<_>>(),
                "classification": classification_field(f.classification),
            })
        })
        .collect();
    json!({ "schema": "spinstar-fixed-points/1", "fixed_points": entries })
}
