//! Signal analysis on recorded observables: damped-cosine fits via peak
//! envelopes, and dominant-frequency extraction from the periodogram.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Result of fitting `A·e^{-κt}·cos(ωt + φ) + C` to a series.
///
/// Overdamped or constant signals report `omega = 0`; `decay_rate` then comes
/// from a plain exponential fit of the approach to the terminal value.
#[derive(Debug, Clone)]
pub struct OscillationFit {
    pub omega: f64,
    pub decay_rate: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// rms fit residual over the signal amplitude.
    pub residual_fraction: f64,
    /// Set when the residual exceeds 10% of the amplitude, or when too few
    /// oscillations are present to trust the fit.
    pub low_confidence: bool,
}

/// Interior local extrema as `(index, time, value)` triples.
fn local_extrema(times: &[f64], values: &[f64]) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let v = values[i];
        if (v > values[i - 1] && v >= values[i + 1]) || (v < values[i - 1] && v <= values[i + 1]) {
            out.push((i, times[i], v));
        }
    }
    out
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y.iter()) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Fit a decaying oscillation by envelope extraction.
///
/// Peaks of the centered signal give the envelope (log-linear in time, slope
/// `-κ`) and the half-period spacing (frequency). Amplitude and phase then
/// come from a linear least-squares solve at fixed `(ω, κ)`, which also
/// yields the residual used for the confidence flag.
pub fn fit_damped_cosine(times: &[f64], values: &[f64]) -> Result<OscillationFit> {
    if times.len() != values.len() || times.len() < 8 {
        return Err(Error::InvalidParams("need at least 8 samples to fit".into()));
    }

    // terminal offset from the tail of the series
    let tail = values.len() - (values.len() / 10).max(2);
    let offset = values[tail..].iter().sum::<f64>() / (values.len() - tail) as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - offset).collect();

    let span: f64 = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < 1e-13 {
        // constant signal
        return Ok(OscillationFit {
            omega: 0.0,
            decay_rate: 0.0,
            amplitude: 0.0,
            offset,
            residual_fraction: 0.0,
            low_confidence: false,
        });
    }

    let extrema = local_extrema(times, &centered);
    let significant: Vec<_> =
        extrema.into_iter().filter(|(_, _, v)| v.abs() > 1e-3 * span).collect();

    if significant.len() < 3 {
        // overdamped: exponential relaxation toward the offset; only points
        // well above the offset-estimation error are usable in the log fit
        let usable: Vec<(f64, f64)> = times
            .iter()
            .zip(centered.iter())
            .filter(|(_, v)| v.abs() > 1e-3 * span)
            .map(|(t, v)| (*t, v.abs().ln()))
            .collect();
        if usable.len() < 2 {
            return Ok(OscillationFit {
                omega: 0.0,
                decay_rate: 0.0,
                amplitude: 0.0,
                offset,
                residual_fraction: 0.0,
                low_confidence: false,
            });
        }
        let xs: Vec<f64> = usable.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = usable.iter().map(|p| p.1).collect();
        let (slope, intercept) = linear_fit(&xs, &ys);
        return Ok(OscillationFit {
            omega: 0.0,
            decay_rate: -slope,
            amplitude: intercept.exp(),
            offset,
            residual_fraction: 0.0,
            low_confidence: significant.len() < 2,
        });
    }

    // envelope: log of |extremum| against time
    let env_t: Vec<f64> = significant.iter().map(|p| p.1).collect();
    let env_v: Vec<f64> = significant.iter().map(|p| p.2.abs().ln()).collect();
    let (env_slope, _) = linear_fit(&env_t, &env_v);
    let decay_rate = -env_slope;

    // frequency: extrema are spaced by half a period
    let ks: Vec<f64> = (0..env_t.len()).map(|k| k as f64).collect();
    let (half_period, _) = linear_fit(&ks, &env_t);
    if half_period <= 0.0 {
        return Err(Error::NonOscillatory("extrema are not ordered in time".into()));
    }
    let omega = std::f64::consts::PI / half_period;

    // amplitude and phase: y - C ≈ e^{-κt}(a·cos ωt + b·sin ωt)
    let mut m11 = 0.0;
    let mut m12 = 0.0;
    let mut m22 = 0.0;
    let mut r1 = 0.0;
    let mut r2 = 0.0;
    for (t, v) in times.iter().zip(centered.iter()) {
        let e = (-decay_rate * t).exp();
        let c = e * (omega * t).cos();
        let s = e * (omega * t).sin();
        m11 += c * c;
        m12 += c * s;
        m22 += s * s;
        r1 += c * v;
        r2 += s * v;
    }
    let det = m11 * m22 - m12 * m12;
    let (a, b) = if det.abs() > 1e-300 {
        ((m22 * r1 - m12 * r2) / det, (m11 * r2 - m12 * r1) / det)
    } else {
        (0.0, 0.0)
    };
    let amplitude = (a * a + b * b).sqrt();
    let phase = (-b).atan2(a);

    let mut rss = 0.0;
    for (t, v) in times.iter().zip(centered.iter()) {
        let model = amplitude * (-decay_rate * t).exp() * (omega * t + phase).cos();
        rss += (v - model) * (v - model);
    }
    let rms = (rss / times.len() as f64).sqrt();
    let residual_fraction = rms / amplitude.max(1e-300);

    Ok(OscillationFit {
        omega,
        decay_rate,
        amplitude,
        offset,
        residual_fraction,
        low_confidence: residual_fraction > 0.10 || significant.len() < 5,
    })
}

/// Windowed discrete Fourier magnitude at angular frequency `omega`.
fn periodogram(times: &[f64], values: &[f64], omega: f64) -> f64 {
    let n = times.len() as f64;
    let t0 = times[0];
    let span = times[times.len() - 1] - t0;
    let mut acc = C64::new(0.0, 0.0);
    for (idx, (t, v)) in times.iter().zip(values.iter()).enumerate() {
        // Hann window suppresses leakage from the finite record
        let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * idx as f64 / (n - 1.0)).cos();
        acc += C64::new(0.0, -omega * (t - t0)).exp() * (w * v);
    }
    let _ = span;
    acc.norm()
}

/// Dominant angular frequency of a series: coarse DFT scan over the natural
/// grid, quadratic interpolation at the peak, then a golden-section polish of
/// the continuous periodogram.
///
/// Fails with [`Error::NonOscillatory`] when the peak does not rise at least
/// 10× above the median spectral background.
pub fn dominant_frequency(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 16 {
        return Err(Error::InvalidParams("need at least 16 samples".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let value_span = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);
    if value_span < 1e-12 * (mean.abs() + 1.0) {
        return Err(Error::NonOscillatory("signal is constant".into()));
    }
    let span = times[times.len() - 1] - times[0];
    if span <= 0.0 {
        return Err(Error::InvalidParams("empty time span".into()));
    }

    let bins = (times.len() / 2).min(4096);
    let d_omega = 2.0 * std::f64::consts::PI / span;
    let mags: Vec<f64> =
        (1..bins).map(|k| periodogram(times, &centered, k as f64 * d_omega)).collect();
    if mags.is_empty() {
        return Err(Error::NonOscillatory("record too short".into()));
    }

    let (peak_idx, peak_mag) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, m)| (i, *m))
        .unwrap();

    let mut sorted = mags.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let background = sorted[sorted.len() / 2].max(1e-300);
    if peak_mag < 10.0 * background {
        return Err(Error::NonOscillatory(format!(
            "spectral peak only {:.2}x above background",
            peak_mag / background
        )));
    }

    // quadratic interpolation around the peak bin
    let omega_peak = (peak_idx + 1) as f64 * d_omega;
    let mut omega = omega_peak;
    if peak_idx > 0 && peak_idx + 1 < mags.len() {
        let (ym, y0, yp) = (mags[peak_idx - 1], mags[peak_idx], mags[peak_idx + 1]);
        let denom = ym - 2.0 * y0 + yp;
        if denom.abs() > 1e-300 {
            let delta = 0.5 * (ym - yp) / denom;
            omega = omega_peak + delta.clamp(-0.5, 0.5) * d_omega;
        }
    }

    // golden-section refinement within ±1 bin
    let gr = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut lo = (omega - d_omega).max(d_omega * 0.25);
    let mut hi = omega + d_omega;
    let mut x1 = hi - gr * (hi - lo);
    let mut x2 = lo + gr * (hi - lo);
    let mut f1 = periodogram(times, &centered, x1);
    let mut f2 = periodogram(times, &centered, x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = periodogram(times, &centered, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = periodogram(times, &centered, x1);
        }
        if hi - lo < 1e-10 * omega {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
