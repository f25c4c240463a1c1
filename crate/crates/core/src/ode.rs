//! Adaptive Dormand–Prince 5(4) integrator.
//!
//! One embedded Runge–Kutta pair drives everything that evolves in this
//! crate: vectorized density matrices, density matrices in matrix form, and
//! mean-field variables. Steps are clamped so every requested output time is
//! hit exactly; there is no interpolation.

use faer::{c64, Mat};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// State vector the integrator can advance: needs linear updates and a
/// weighted error norm.
pub trait OdeState: Clone {
    /// `self += a·other`.
    fn scaled_add(&mut self, a: f64, other: &Self);
    /// Weighted rms of `err` against `atol + rtol·max(|y0|, |y1|)`.
    fn error_ratio(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64;
    /// Largest component magnitude (used for the initial step heuristic).
    fn max_abs(&self) -> f64;
}

fn weighted_rms(iter: impl Iterator<Item = (f64, f64, f64)>, rtol: f64, atol: f64) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for (e, a, b) in iter {
        let scale = atol + rtol * a.max(b);
        let r = e / scale;
        acc += r * r;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        (acc / count as f64).sqrt()
    }
}

impl OdeState for Array1<f64> {
    fn scaled_add(&mut self, a: f64, other: &Self) {
        self.zip_mut_with(other, |x, y| *x += a * y);
    }

    fn error_ratio(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64 {
        weighted_rms(
            err.iter()
                .zip(y0.iter())
                .zip(y1.iter())
                .map(|((e, a), b)| (e.abs(), a.abs(), b.abs())),
            rtol,
            atol,
        )
    }

    fn max_abs(&self) -> f64 {
        self.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

impl OdeState for Array1<C64> {
    fn scaled_add(&mut self, a: f64, other: &Self) {
        self.zip_mut_with(other, |x, y| *x += y * a);
    }

    fn error_ratio(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64 {
        weighted_rms(
            err.iter()
                .zip(y0.iter())
                .zip(y1.iter())
                .map(|((e, a), b)| (e.norm(), a.norm(), b.norm())),
            rtol,
            atol,
        )
    }

    fn max_abs(&self) -> f64 {
        self.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

impl OdeState for Array2<C64> {
    fn scaled_add(&mut self, a: f64, other: &Self) {
        self.zip_mut_with(other, |x, y| *x += y * a);
    }

    fn error_ratio(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64 {
        weighted_rms(
            err.iter()
                .zip(y0.iter())
                .zip(y1.iter())
                .map(|((e, a), b)| (e.norm(), a.norm(), b.norm())),
            rtol,
            atol,
        )
    }

    fn max_abs(&self) -> f64 {
        self.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }
}

impl OdeState for Mat<c64> {
    fn scaled_add(&mut self, a: f64, other: &Self) {
        let s = c64::new(a, 0.0);
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                self[(i, j)] += other[(i, j)] * s;
            }
        }
    }

    fn error_ratio(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64 {
        let mut acc = 0.0;
        let mut count = 0usize;
        for j in 0..err.ncols() {
            for i in 0..err.nrows() {
                let scale = atol + rtol * y0[(i, j)].norm().max(y1[(i, j)].norm());
                let r = err[(i, j)].norm() / scale;
                acc += r * r;
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            (acc / count as f64).sqrt()
        }
    }

    fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for j in 0..self.ncols() {
            for i in 0..self.nrows() {
                m = m.max(self[(i, j)].norm());
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: u64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, max_steps: 50_000_000 }
    }
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct OdeStats {
    pub steps: u64,
    pub rejected: u64,
    pub rhs_evaluations: u64,
    pub min_step: f64,
    pub max_step: f64,
}

// Dormand–Prince coefficients (5th-order solution, 4th-order embedded).
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `dy/dt = rhs(t, y)` from `grid[0]`, invoking `on_sample` at
/// every grid time (including the first). Grid times must be strictly
/// increasing.
pub fn integrate_to_grid<S, F, O>(
    mut rhs: F,
    y0: S,
    grid: &[f64],
    opts: &OdeOptions,
    mut on_sample: O,
) -> Result<OdeStats>
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
    O: FnMut(usize, f64, &S),
{
    if grid.is_empty() {
        return Ok(OdeStats::default());
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("time grid must be strictly increasing".into()));
    }

    let mut t = grid[0];
    let mut y = y0;
    on_sample(0, t, &y);

    let t_end = *grid.last().unwrap();
    if grid.len() == 1 {
        return Ok(OdeStats::default());
    }

    let mut stats = OdeStats { min_step: f64::INFINITY, ..Default::default() };
    let mut k1 = rhs(t, &y);
    stats.rhs_evaluations += 1;

    // initial step from the scale of y and dy
    let span = t_end - t;
    let y_scale = y.max_abs().max(opts.atol);
    let f_scale = k1.max_abs();
    let mut h = if f_scale > 0.0 { (0.01 * y_scale / f_scale).min(span / 10.0) } else { span / 100.0 };
    h = h.max(span * 1e-12);

    let mut next_sample = 1usize;
    let mut k = Vec::with_capacity(7);

    while next_sample < grid.len() {
        let target = grid[next_sample];
        let mut step = h.min(target - t);
        let clamped = step >= target - t - 1e-14 * target.abs().max(1.0);
        if clamped {
            step = target - t;
        }
        if step <= f64::EPSILON * t.abs().max(1.0) * 16.0 {
            return Err(Error::StepUnderflow(t));
        }

        // stages
        k.clear();
        k.push(k1.clone());
        for stage in 1..7 {
            let mut yi = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[stage - 1][j];
                if a != 0.0 {
                    yi.scaled_add(step * a, kj);
                }
            }
            let ki = rhs(t + C[stage] * step, &yi);
            stats.rhs_evaluations += 1;
            k.push(ki);
        }

        let mut y5 = y.clone();
        for i in 0..7 {
            if B5[i] != 0.0 {
                y5.scaled_add(step * B5[i], &k[i]);
            }
        }
        // err = h·Σ (b5 - b4)_i k_i, assembled in place starting from k1
        let mut err = k[0].clone();
        err.scaled_add(step * (B5[0] - B4[0]) - 1.0, &k[0]);
        for i in 1..7 {
            let d = B5[i] - B4[i];
            if d != 0.0 {
                err.scaled_add(step * d, &k[i]);
            }
        }

        let ratio = S::error_ratio(&err, &y, &y5, opts.rtol, opts.atol);
        if ratio <= 1.0 {
            t += step;
            y = y5;
            // FSAL: stage 7 is the rhs at the accepted point
            k1 = k[6].clone();
            stats.steps += 1;
            stats.min_step = stats.min_step.min(step);
            stats.max_step = stats.max_step.max(step);
            if clamped {
                on_sample(next_sample, t, &y);
                next_sample += 1;
            }
        } else {
            stats.rejected += 1;
        }

        let factor = if ratio > 0.0 { 0.9 * ratio.powf(-0.2) } else { 5.0 };
        h = (step * factor.clamp(0.2, 5.0)).max(f64::MIN_POSITIVE);

        if stats.steps + stats.rejected > opts.max_steps {
            return Err(Error::StepBudget(t));
        }
    }
    if stats.min_step == f64::INFINITY {
        stats.min_step = 0.0;
    }
    Ok(stats)
}
