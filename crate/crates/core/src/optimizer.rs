//! Derivative-free minimization with linear models inside a trust region.
//!
//! The method keeps `n + 1` interpolation points, fits the affine model
//! through them, and steps from the best point along the negative model
//! gradient by the trust radius, projected onto the box. A failed step
//! halves the radius and rebuilds the interpolation set around the best
//! point. The best point ever evaluated is returned.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrustRegionConfig {
    pub initial_radius: f64,
    pub final_radius: f64,
    pub max_evaluations: usize,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        TrustRegionConfig {
            initial_radius: 0.5,
            final_radius: 1e-4,
            max_evaluations: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub trace: Vec<Evaluation>,
}

struct Tracked<'f, F> {
    f: &'f mut F,
    trace: Vec<Evaluation>,
    budget: usize,
}

impl<F: FnMut(&[f64]) -> f64> Tracked<'_, F> {
    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.trace.len() >= self.budget {
            return None;
        }
        let value = (self.f)(x);
        self.trace.push(Evaluation {
            point: x.to_vec(),
            value,
        });
        Some(value)
    }
}

fn clamp(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Minimizes `f` over the box `[lower, upper]` starting at `start`.
pub fn minimize<F>(
    mut f: F,
    start: &[f64],
    lower: &[f64],
    upper: &[f64],
    cfg: &TrustRegionConfig,
) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut best = start.to_vec();
    clamp(&mut best, lower, upper);
    let mut tracked = Tracked {
        f: &mut f,
        trace: Vec::new(),
        budget: cfg.max_evaluations.max(1),
    };
    let mut best_value = tracked.eval(&best).expect("budget allows one evaluation");
    let mut radius = cfg.initial_radius;

    'outer: while radius >= cfg.final_radius {
        // Interpolation set: the best point plus one displaced point per axis.
        let mut offsets = DMatrix::<f64>::zeros(n, n);
        let mut diffs = DVector::<f64>::zeros(n);
        for i in 0..n {
            let mut p = best.clone();
            let step = if best[i] + radius <= upper[i] { radius } else { -radius };
            p[i] += step;
            clamp(&mut p, lower, upper);
            let Some(v) = tracked.eval(&p) else { break 'outer };
            if v < best_value {
                best_value = v;
                best = p;
                continue 'outer;
            }
            for k in 0..n {
                offsets[(i, k)] = p[k] - best[k];
            }
            diffs[i] = v - best_value;
        }

        let gradient = match offsets.clone().lu().solve(&diffs) {
            Some(g) if g.iter().all(|x| x.is_finite()) => g,
            _ => {
                radius *= 0.5;
                continue;
            }
        };
        let norm = gradient.norm();
        if norm == 0.0 {
            radius *= 0.5;
            continue;
        }

        let mut improved = true;
        while improved {
            improved = false;
            let mut trial: Vec<f64> = best
                .iter()
                .zip(gradient.iter())
                .map(|(x, g)| x - radius * g / norm)
                .collect();
            clamp(&mut trial, lower, upper);
            if trial == best {
                break;
            }
            let Some(v) = tracked.eval(&trial) else { break 'outer };
            if v < best_value {
                best_value = v;
                best = trial;
                improved = true;
            }
        }
        radius *= 0.5;
    }

    Minimum {
        point: best,
        value: best_value,
        trace: tracked.trace,
    }
}
