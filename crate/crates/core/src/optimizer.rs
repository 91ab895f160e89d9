//! Unconstrained COBYLA: linear interpolation models over a simplex of
//! `n + 1` points inside a trust region whose radius only shrinks.
//!
//! The simplex is stored as a pole (best vertex) plus the matrix `S` of
//! displacements to the other vertices and its inverse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
const GAMMA: f64 = 0.5;
const DELTA: f64 = 1.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub initial_radius: f64,
    pub final_radius: f64,
    pub max_evaluations: usize,
    pub record_trajectory: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            initial_radius: 1.0,
            final_radius: 1e-4,
            max_evaluations: 1000,
            record_trajectory: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.final_radius > 0.0 && self.final_radius < self.initial_radius)
            || !self.initial_radius.is_finite()
        {
            return Err(Error::invalid(format!(
                "radii must satisfy 0 < final ({}) < initial ({})",
                self.final_radius, self.initial_radius
            )));
        }
        if self.max_evaluations < dim + 2 {
            return Err(Error::invalid(format!(
                "budget {} below dim + 2 = {}",
                self.max_evaluations,
                dim + 2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Termination {
    RadiusConverged,
    BudgetExhausted,
    /// The objective returned a non-finite value at this (1-based) evaluation.
    NonFinite { evaluation: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `(evaluation index, loss)`, 1-based; empty unless recording is on.
    pub evaluations: Vec<(usize, f64)>,
    pub num_evaluations: usize,
    pub best_params: Vec<f64>,
    pub best_loss: f64,
    pub termination: Termination,
}

struct Run<'a, F> {
    objective: F,
    config: &'a OptimizerConfig,
    count: usize,
    evaluations: Vec<(usize, f64)>,
    best: Option<(Vec<f64>, f64)>,
}

enum Eval {
    Value(f64),
    Stop(Termination),
}

impl<F: FnMut(&[f64]) -> f64> Run<'_, F> {
    fn eval(&mut self, x: &[f64]) -> Eval {
        if self.count >= self.config.max_evaluations {
            return Eval::Stop(Termination::BudgetExhausted);
        }
        self.count += 1;
        let f = (self.objective)(x);
        if !f.is_finite() {
            return Eval::Stop(Termination::NonFinite { evaluation: self.count });
        }
        if self.config.record_trajectory {
            self.evaluations.push((self.count, f));
        }
        if self.best.as_ref().map_or(true, |(_, b)| f < *b) {
            self.best = Some((x.to_vec(), f));
        }
        Eval::Value(f)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Simplex {
    pole: Vec<f64>,
    pole_f: f64,
    /// `cols[j]` is vertex j minus the pole.
    cols: Vec<Vec<f64>>,
    f: Vec<f64>,
    /// Rows of `S^{-1}`.
    inv: Vec<Vec<f64>>,
}

impl Simplex {
    fn dim(&self) -> usize {
        self.pole.len()
    }

    /// Makes vertex `b` the pole.
    fn swap_pole(&mut self, b: usize) {
        let n = self.dim();
        let shift = self.cols[b].clone();
        for j in 0..n {
            if j == b {
                for v in &mut self.cols[j] {
                    *v = -*v;
                }
            } else {
                for (v, s) in self.cols[j].iter_mut().zip(&shift) {
                    *v -= s;
                }
            }
        }
        for (p, s) in self.pole.iter_mut().zip(&shift) {
            *p += s;
        }
        let mut row = vec![0.0; n];
        for r in &self.inv {
            for (acc, v) in row.iter_mut().zip(r) {
                *acc -= v;
            }
        }
        self.inv[b] = row;
        std::mem::swap(&mut self.f[b], &mut self.pole_f);
    }

    fn make_pole_best(&mut self) {
        let best = (0..self.dim())
            .filter(|&j| self.f[j] < self.pole_f)
            .min_by(|&a, &b| self.f[a].total_cmp(&self.f[b]));
        if let Some(b) = best {
            self.swap_pole(b);
        }
    }

    /// Replaces vertex `j` by `pole + d`.
    fn replace(&mut self, j: usize, d: Vec<f64>, value: f64) {
        let pivot = dot(&self.inv[j], &d);
        for v in &mut self.inv[j] {
            *v /= pivot;
        }
        let row_j = self.inv[j].clone();
        for (k, row) in self.inv.iter_mut().enumerate() {
            if k != j {
                let t = dot(row, &d);
                for (v, r) in row.iter_mut().zip(&row_j) {
                    *v -= t * r;
                }
            }
        }
        self.cols[j] = d;
        self.f[j] = value;
    }

    fn gradient(&self) -> Vec<f64> {
        let n = self.dim();
        let mut g = vec![0.0; n];
        for (row, fj) in self.inv.iter().zip(&self.f) {
            let df = fj - self.pole_f;
            for (gi, r) in g.iter_mut().zip(row) {
                *gi += df * r;
            }
        }
        g
    }
}

/// Minimizes `objective` from `x0`. Deterministic in its inputs.
pub fn minimize<F>(objective: F, x0: &[f64], config: &OptimizerConfig) -> Result<Trajectory>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::EmptyInput("no parameters to optimize".into()));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("starting point is not finite"));
    }
    config.validate(n)?;

    let mut run = Run {
        objective,
        config,
        count: 0,
        evaluations: Vec::new(),
        best: None,
    };
    let termination = iterate(&mut run, x0);
    let (best_params, best_loss) = run.best.unwrap_or_else(|| (x0.to_vec(), f64::NAN));
    Ok(Trajectory {
        evaluations: run.evaluations,
        num_evaluations: run.count,
        best_params,
        best_loss,
        termination,
    })
}

fn iterate<F: FnMut(&[f64]) -> f64>(run: &mut Run<'_, F>, x0: &[f64]) -> Termination {
    let n = x0.len();
    let mut rho = run.config.initial_radius;
    let rhoend = run.config.final_radius;

    let pole_f = match run.eval(x0) {
        Eval::Value(f) => f,
        Eval::Stop(t) => return t,
    };
    let mut f = Vec::with_capacity(n);
    let mut x = x0.to_vec();
    for j in 0..n {
        x[j] += rho;
        match run.eval(&x) {
            Eval::Value(v) => f.push(v),
            Eval::Stop(t) => return t,
        }
        x[j] = x0[j];
    }
    let mut sx = Simplex {
        pole: x0.to_vec(),
        pole_f,
        cols: (0..n)
            .map(|j| (0..n).map(|i| if i == j { rho } else { 0.0 }).collect())
            .collect(),
        f,
        inv: (0..n)
            .map(|j| (0..n).map(|i| if i == j { 1.0 / rho } else { 0.0 }).collect())
            .collect(),
    };

    let mut want_geometry = false;
    loop {
        sx.make_pole_best();
        let g = sx.gradient();
        let parsig = ALPHA * rho;
        let pareta = BETA * rho;
        let vsig: Vec<f64> = sx.inv.iter().map(|r| 1.0 / dot(r, r).sqrt()).collect();
        let veta: Vec<f64> = sx.cols.iter().map(|c| dot(c, c).sqrt()).collect();
        let acceptable = vsig.iter().all(|&s| s >= parsig) && veta.iter().all(|&e| e <= pareta);

        if want_geometry && !acceptable {
            want_geometry = false;
            let j = match (0..n).filter(|&j| veta[j] > pareta).max_by(|&a, &b| veta[a].total_cmp(&veta[b])) {
                Some(j) => j,
                None => (0..n).min_by(|&a, &b| vsig[a].total_cmp(&vsig[b])).unwrap_or(0),
            };
            let scale = GAMMA * rho * vsig[j];
            let mut d: Vec<f64> = sx.inv[j].iter().map(|v| scale * v).collect();
            if dot(&g, &d) > 0.0 {
                for v in &mut d {
                    *v = -*v;
                }
            }
            let trial: Vec<f64> = sx.pole.iter().zip(&d).map(|(p, v)| p + v).collect();
            match run.eval(&trial) {
                Eval::Value(v) => sx.replace(j, d, v),
                Eval::Stop(t) => return t,
            }
            continue;
        }
        want_geometry = false;

        let gnorm = dot(&g, &g).sqrt();
        let step_taken = gnorm > 0.0 && gnorm.is_finite();
        let mut keep_rho = false;
        if step_taken {
            let d: Vec<f64> = g.iter().map(|v| -rho * v / gnorm).collect();
            let trial: Vec<f64> = sx.pole.iter().zip(&d).map(|(p, v)| p + v).collect();
            let value = match run.eval(&trial) {
                Eval::Value(v) => v,
                Eval::Stop(t) => return t,
            };
            let predicted = rho * gnorm;
            let actual = sx.pole_f - value;

            let mut ratio = if actual <= 0.0 { 1.0 } else { 0.0 };
            let mut drop = None;
            let mut sigbar = vec![0.0; n];
            for j in 0..n {
                let t = dot(&sx.inv[j], &d).abs();
                if t > ratio {
                    drop = Some(j);
                    ratio = t;
                }
                sigbar[j] = t * vsig[j];
            }
            let mut edgmax = DELTA * rho;
            let mut far = None;
            for j in 0..n {
                if sigbar[j] >= parsig || sigbar[j] >= vsig[j] {
                    let t = if actual > 0.0 {
                        d.iter().zip(&sx.cols[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
                    } else {
                        veta[j]
                    };
                    if t > edgmax {
                        far = Some(j);
                        edgmax = t;
                    }
                }
            }
            if far.is_some() {
                drop = far;
            }
            if let Some(j) = drop {
                sx.replace(j, d, value);
                keep_rho = actual > 0.0 && actual >= 0.1 * predicted;
            }
        }
        if keep_rho {
            continue;
        }
        if !acceptable {
            want_geometry = true;
            continue;
        }
        if rho <= rhoend {
            return Termination::RadiusConverged;
        }
        rho *= 0.5;
        if rho <= 1.5 * rhoend {
            rho = rhoend;
        }
    }
}
