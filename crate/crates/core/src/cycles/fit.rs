use serde::{Deserialize, Serialize};

use super::{dot, CycleModel, CycleRecord, CyclesError, Encoding};
use crate::tabular::Schema;

/// Armijo sufficient-increase constant.
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub max_cycles: usize,
    /// Ridge penalty on the feature weights; intercepts are not penalized.
    pub lambda: f64,
    /// Convergence when the gradient's max-norm falls to this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_cycles: 6,
            lambda: 1e-4,
            tol: 1e-6,
            max_iter: 10_000,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<(), CyclesError> {
        if self.max_cycles == 0 {
            return Err(CyclesError::InvalidConfig("max_cycles must be at least 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(CyclesError::InvalidConfig("lambda must be finite and >= 0".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(CyclesError::InvalidConfig("tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub iterations: usize,
    pub gradient_max_norm: f64,
    /// Penalized objective after each accepted step, starting from zero parameters.
    pub objective_trace: Vec<f64>,
}

/// Encoded person-period rows. Parameters are laid out as
/// `[α_1, …, α_T, w_1, …, w_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub max_cycles: usize,
    pub x: Vec<Vec<f64>>,
    /// Zero-based cycle index per row.
    pub cycle: Vec<usize>,
    pub y: Vec<bool>,
}

impl Design {
    pub fn new(schema: &Schema, encoding: &Encoding, records: &[CycleRecord], max_cycles: usize) -> Result<Self, CyclesError> {
        let mut x = Vec::with_capacity(records.len());
        let mut cycle = Vec::with_capacity(records.len());
        let mut y = Vec::with_capacity(records.len());
        for r in records {
            if r.cycle == 0 || r.cycle > max_cycles {
                return Err(CyclesError::CycleOutOfRange {
                    cycle: r.cycle,
                    max: max_cycles,
                });
            }
            schema.check_instance(&r.features)?;
            x.push(encoding.encode(schema, &r.features));
            cycle.push(r.cycle - 1);
            y.push(r.outcome);
        }
        Ok(Self { max_cycles, x, cycle, y })
    }

    pub fn num_params(&self) -> usize {
        self.max_cycles + self.x.first().map_or(0, Vec::len)
    }

    fn eta(&self, theta: &[f64], row: usize) -> f64 {
        let (alpha, w) = theta.split_at(self.max_cycles);
        alpha[self.cycle[row]] + dot(w, &self.x[row])
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// `Σ [y log p + (1-y) log(1-p)] - λ‖w‖²`.
pub fn objective(design: &Design, theta: &[f64], lambda: f64) -> f64 {
    let ll = compensated_sum((0..design.y.len()).map(|i| {
        let z = design.eta(theta, i);
        if design.y[i] {
            z - softplus(z)
        } else {
            -softplus(z)
        }
    }));
    let w = &theta[design.max_cycles..];
    ll - lambda * dot(w, w)
}

pub fn gradient(design: &Design, theta: &[f64], lambda: f64) -> Vec<f64> {
    let t = design.max_cycles;
    let mut g = vec![0.0; theta.len()];
    for i in 0..design.y.len() {
        let r = f64::from(u8::from(design.y[i])) - super::logistic(design.eta(theta, i));
        g[design.cycle[i]] += r;
        for (gj, xj) in g[t..].iter_mut().zip(&design.x[i]) {
            *gj += r * xj;
        }
    }
    for (gj, wj) in g[t..].iter_mut().zip(&theta[t..]) {
        *gj -= 2.0 * lambda * wj;
    }
    g
}

/// Neumaier summation, so small parameter changes still show up in the objective.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for x in terms {
        let t = sum + x;
        carry += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + carry
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gradient ascent from zero with a backtracking (Armijo) line search.
///
/// Each iteration's trial step is the Barzilai–Borwein length from the last
/// two iterates, halved until the objective rises enough, so the objective
/// never decreases. Numeric features are standardized on `records`.
pub fn fit(schema: &Schema, records: &[CycleRecord], config: FitConfig) -> Result<(CycleModel, FitReport), CyclesError> {
    config.validate()?;
    if records.is_empty() {
        return Err(CyclesError::NoData);
    }
    let t = config.max_cycles;
    for cycle in 1..=t {
        if !records.iter().any(|r| r.cycle == cycle) {
            return Err(CyclesError::EmptyCycle { cycle });
        }
    }
    let encoding = Encoding::fit(schema, records.iter().map(|r| r.features.as_slice()));
    let design = Design::new(schema, &encoding, records, t)?;

    let mut theta = vec![0.0; design.num_params()];
    let mut f = objective(&design, &theta, config.lambda);
    let mut g = gradient(&design, &theta, config.lambda);
    let mut trace = vec![f];
    let mut step = 1.0 / design.y.len() as f64;
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;

    while max_norm(&g) > config.tol {
        if iterations >= config.max_iter {
            return Err(CyclesError::NotConverged { iterations });
        }
        iterations += 1;
        if let Some((theta_prev, g_prev)) = &previous {
            let s: Vec<f64> = theta.iter().zip(theta_prev).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = g.iter().zip(g_prev).map(|(a, b)| a - b).collect();
            let curvature = -dot(&s, &yv);
            let bb = dot(&s, &s) / curvature;
            // Never shrink below the last accepted step: once steps get tiny
            // the curvature estimate is buried in rounding noise and would
            // keep them tiny. Backtracking still shortens overlong steps.
            step = if curvature > 0.0 && bb.is_finite() && bb > 0.0 {
                bb.max(step)
            } else {
                step * 2.0
            };
        }
        let gg = dot(&g, &g);
        let (next, f_next, g_next) = loop {
            let candidate: Vec<f64> = theta.iter().zip(&g).map(|(p, d)| p + step * d).collect();
            let fc = objective(&design, &candidate, config.lambda);
            if fc.is_finite() && fc >= f + ARMIJO * step * gg {
                let gc = gradient(&design, &candidate, config.lambda);
                break (candidate, fc, gc);
            }
            // Close to the optimum the gain falls below the resolution of `f`.
            // The objective is concave, so a step whose far end still slopes
            // upward along the search direction has increased it.
            if fc.is_finite() && fc >= f {
                let gc = gradient(&design, &candidate, config.lambda);
                if dot(&gc, &g) >= 0.0 {
                    break (candidate, fc, gc);
                }
            }
            step *= 0.5;
            if step < MIN_STEP {
                return Err(CyclesError::NotConverged { iterations });
            }
        };
        previous = Some((std::mem::replace(&mut theta, next), std::mem::replace(&mut g, g_next)));
        f = f_next;
        trace.push(f);
    }

    let weights = theta.split_off(t);
    let model = CycleModel::new(schema.clone(), encoding, weights, theta)?;
    Ok((
        model,
        FitReport {
            iterations,
            gradient_max_norm: max_norm(&g),
            objective_trace: trace,
        },
    ))
}
