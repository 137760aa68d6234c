//! One-vs-rest logistic regression with an L1 or L2 penalty.
//!
//! Each class gets a binary model fitted by minimising
//! `mean NLL + λ · penalty(w)`, where the intercept is not penalised. L2 uses
//! `penalty(w) = Σ w²`, L1 uses `Σ |w|`. Both are solved with an accelerated
//! proximal gradient method and backtracking; for L2 the proximal step is the
//! identity, so it reduces to plain gradient descent with momentum. A step is
//! only accepted if it lowers the objective, so the recorded history never
//! increases.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::samples::Samples;
use crate::tree::{argmax, Classifier};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinearError {
    #[error("penalty strength must be positive and finite, got {0}")]
    Strength(f64),
    #[error("logistic regression needs at least two classes present, found {0}")]
    Classes(usize),
    #[error("invalid fit parameter: {0}")]
    Param(String),
    #[error("coefficient shape mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PenaltyKind {
    L1,
    L2,
}

impl PenaltyKind {
    pub fn name(self) -> &'static str {
        match self {
            PenaltyKind::L1 => "l1",
            PenaltyKind::L2 => "l2",
        }
    }
}

impl std::str::FromStr for PenaltyKind {
    type Err = LinearError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(PenaltyKind::L1),
            "l2" => Ok(PenaltyKind::L2),
            other => Err(LinearError::Param(format!("unknown penalty `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Penalty {
    pub kind: PenaltyKind,
    pub lambda: f64,
}

impl Penalty {
    pub fn new(kind: PenaltyKind, lambda: f64) -> Result<Self, LinearError> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(LinearError::Strength(lambda));
        }
        Ok(Penalty { kind, lambda })
    }

    pub fn l1(lambda: f64) -> Result<Self, LinearError> {
        Self::new(PenaltyKind::L1, lambda)
    }

    pub fn l2(lambda: f64) -> Result<Self, LinearError> {
        Self::new(PenaltyKind::L2, lambda)
    }

    /// `λ · penalty(w)`.
    pub fn value(&self, weights: &[f64]) -> f64 {
        let p: f64 = match self.kind {
            PenaltyKind::L1 => weights.iter().map(|w| w.abs()).sum(),
            PenaltyKind::L2 => weights.iter().map(|w| w * w).sum(),
        };
        self.lambda * p
    }

    /// Penalised norm of a weight vector: `Σ|w|` for L1, `Σw²` for L2.
    pub fn norm(&self, weights: &[f64]) -> f64 {
        self.value(weights) / self.lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub max_iter: usize,
    /// Stop once an accepted step lowers the objective by less than this.
    pub tol: f64,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams { max_iter: 3000, tol: 1e-8 }
    }
}

/// Optimiser trace of one binary fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
    /// Objective after initialisation and after every accepted step.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    /// `weights[c]` has one entry per feature.
    pub weights: Vec<Vec<f64>>,
    pub intercepts: Vec<f64>,
    pub penalty: Penalty,
    /// One record per class; empty for models built from coefficients.
    pub convergence: Vec<Convergence>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean negative log-likelihood of a binary logistic model with parameters
/// `theta = [w_1 .. w_d, b]` and 0/1 targets `y`.
pub fn mean_nll(x: &Samples, y: &[f64], theta: &[f64]) -> f64 {
    let d = x.n_features();
    let (w, b) = theta.split_at(d);
    let mut total = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let z = dot(x.row(i), w) + b[0];
        total += softplus(z) - yi * z;
    }
    total / y.len() as f64
}

/// Smooth part of the objective and its gradient with respect to `theta`.
/// For L2 the smooth part includes the penalty; for L1 it is the NLL alone.
pub fn smooth_objective(x: &Samples, y: &[f64], penalty: &Penalty, theta: &[f64]) -> (f64, Vec<f64>) {
    let d = x.n_features();
    let n = y.len() as f64;
    let (w, b) = theta.split_at(d);
    let mut grad = vec![0.0; d + 1];
    let mut total = 0.0;
    for (i, &yi) in y.iter().enumerate() {
        let row = x.row(i);
        let z = dot(row, w) + b[0];
        total += softplus(z) - yi * z;
        let r = sigmoid(z) - yi;
        for (g, v) in grad.iter_mut().zip(row) {
            *g += r * v;
        }
        grad[d] += r;
    }
    let mut f = total / n;
    grad.iter_mut().for_each(|g| *g /= n);
    if penalty.kind == PenaltyKind::L2 {
        f += penalty.value(w);
        for (g, wj) in grad.iter_mut().zip(w) {
            *g += 2.0 * penalty.lambda * wj;
        }
    }
    (f, grad)
}

/// Full penalised objective.
pub fn objective(x: &Samples, y: &[f64], penalty: &Penalty, theta: &[f64]) -> f64 {
    let d = x.n_features();
    mean_nll(x, y, theta) + penalty.value(&theta[..d])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn prox(v: &[f64], d: usize, penalty: &Penalty, step: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    if penalty.kind == PenaltyKind::L1 {
        for w in &mut out[..d] {
            *w = soft_threshold(*w, step * penalty.lambda);
        }
    }
    out
}

/// Fits one binary model, `y` holding 0/1 targets.
pub fn fit_binary(x: &Samples, y: &[f64], penalty: &Penalty, params: &FitParams) -> (Vec<f64>, f64, Convergence) {
    let d = x.n_features();
    let pos = y.iter().sum::<f64>() / y.len() as f64;
    let p = pos.clamp(1e-6, 1.0 - 1e-6);
    let mut theta = vec![0.0; d + 1];
    theta[d] = (p / (1.0 - p)).ln();

    let full = |t: &[f64]| objective(x, y, penalty, t);
    let mut f_theta = full(&theta);
    let mut history = vec![f_theta];
    let mut momentum_point = theta.clone();
    let mut t_k = 1.0f64;
    let mut step = 1.0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < params.max_iter {
        iterations += 1;
        let (candidate, f_candidate) = prox_step(x, y, penalty, &momentum_point, &mut step, d);
        let (next, f_next, restarted) = if f_candidate <= f_theta {
            (candidate, f_candidate, false)
        } else {
            // Momentum overshot: restart from the last accepted point.
            let (c, fc) = prox_step(x, y, penalty, &theta, &mut step, d);
            (c, fc, true)
        };
        if f_next > f_theta {
            // No descent is possible from here at machine precision.
            converged = true;
            break;
        }
        let decrease = f_theta - f_next;
        let t_next = if restarted { 1.0 } else { (1.0 + (1.0 + 4.0 * t_k * t_k).sqrt()) / 2.0 };
        let beta = if restarted { 0.0 } else { (t_k - 1.0) / t_next };
        momentum_point = next.iter().zip(&theta).map(|(a, b)| a + beta * (a - b)).collect();
        t_k = t_next;
        theta = next;
        f_theta = f_next;
        history.push(f_theta);
        if decrease < params.tol && !restarted || decrease == 0.0 {
            converged = true;
            break;
        }
        step *= 1.25;
    }

    let b = theta.pop().expect("intercept");
    (theta, b, Convergence { iterations, final_objective: f_theta, converged, history })
}

/// One proximal gradient step from `y0` with backtracking on `step`.
fn prox_step(x: &Samples, y: &[f64], penalty: &Penalty, y0: &[f64], step: &mut f64, d: usize) -> (Vec<f64>, f64) {
    let (f0, g0) = smooth_objective(x, y, penalty, y0);
    loop {
        let moved: Vec<f64> = y0.iter().zip(&g0).map(|(v, g)| v - *step * g).collect();
        let cand = prox(&moved, d, penalty, *step);
        let diff: Vec<f64> = cand.iter().zip(y0).map(|(a, b)| a - b).collect();
        let f_smooth = smooth_value(x, y, penalty, &cand);
        let bound = f0 + dot(&g0, &diff) + dot(&diff, &diff) / (2.0 * *step);
        if f_smooth <= bound + 1e-15 * f0.abs().max(1.0) || *step < 1e-12 {
            let nonsmooth = if penalty.kind == PenaltyKind::L1 { penalty.value(&cand[..d]) } else { 0.0 };
            return (cand, f_smooth + nonsmooth);
        }
        *step *= 0.5;
    }
}

fn smooth_value(x: &Samples, y: &[f64], penalty: &Penalty, theta: &[f64]) -> f64 {
    let d = x.n_features();
    let mut f = mean_nll(x, y, theta);
    if penalty.kind == PenaltyKind::L2 {
        f += penalty.value(&theta[..d]);
    }
    f
}

/// Fits one binary model per class present in `0..n_classes`.
pub fn fit_logreg(samples: &Samples, penalty: &Penalty, params: &FitParams) -> Result<LogRegModel, LinearError> {
    if params.max_iter == 0 {
        return Err(LinearError::Param("max_iter must be >= 1".into()));
    }
    if !(params.tol >= 0.0) {
        return Err(LinearError::Param("tol must be non-negative".into()));
    }
    let k = samples.n_classes();
    let mut present = vec![false; k];
    for &l in samples.labels() {
        present[l] = true;
    }
    let n_present = present.iter().filter(|p| **p).count();
    if n_present < 2 {
        return Err(LinearError::Classes(n_present));
    }
    let fits: Vec<_> = (0..k)
        .into_par_iter()
        .map(|c| {
            let y: Vec<f64> = samples.labels().iter().map(|&l| if l == c { 1.0 } else { 0.0 }).collect();
            fit_binary(samples, &y, penalty, params)
        })
        .collect();
    let mut model = LogRegModel { weights: Vec::new(), intercepts: Vec::new(), penalty: *penalty, convergence: Vec::new() };
    for (w, b, conv) in fits {
        model.weights.push(w);
        model.intercepts.push(b);
        model.convergence.push(conv);
    }
    Ok(model)
}

impl LogRegModel {
    /// Builds a model from known coefficients.
    pub fn from_coefficients(weights: Vec<Vec<f64>>, intercepts: Vec<f64>, penalty: Penalty) -> Result<Self, LinearError> {
        if weights.len() != intercepts.len() || weights.is_empty() {
            return Err(LinearError::Shape(format!("{} weight rows, {} intercepts", weights.len(), intercepts.len())));
        }
        let d = weights[0].len();
        if weights.iter().any(|w| w.len() != d) {
            return Err(LinearError::Shape("weight rows differ in length".into()));
        }
        Ok(LogRegModel { weights, intercepts, penalty, convergence: Vec::new() })
    }

    pub fn n_classes(&self) -> usize {
        self.weights.len()
    }

    pub fn n_features(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    /// True when any per-class fit hit the iteration cap.
    pub fn warning(&self) -> bool {
        self.convergence.iter().any(|c| !c.converged)
    }

    /// Unnormalised per-class scores `σ(w_c · x + b_c)`.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        self.weights.iter().zip(&self.intercepts).map(|(w, b)| sigmoid(dot(w, x) + b)).collect()
    }

    /// Per-class scores normalised to sum to 1.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let s = self.scores(x);
        let total: f64 = s.iter().sum();
        if total > 0.0 && total.is_finite() {
            s.iter().map(|v| v / total).collect()
        } else {
            vec![1.0 / s.len() as f64; s.len()]
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialises")
    }
}

impl Classifier for LogRegModel {
    fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.predict_proba(x))
    }
}

/// Coefficient matrix: one row per class, one column per feature plus the
/// intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub features: Vec<String>,
    pub class_names: Vec<String>,
    /// `rows[c]` = weights of class `c` followed by its intercept.
    pub rows: Vec<Vec<f64>>,
}

pub fn coefficient_report(model: &LogRegModel, features: &[String], class_names: &[String]) -> CoefficientTable {
    assert_eq!(features.len(), model.n_features(), "one name per feature");
    assert_eq!(class_names.len(), model.n_classes(), "one name per class");
    let rows = model
        .weights
        .iter()
        .zip(&model.intercepts)
        .map(|(w, b)| w.iter().copied().chain(std::iter::once(*b)).collect())
        .collect();
    CoefficientTable { features: features.to_vec(), class_names: class_names.to_vec(), rows }
}

impl CoefficientTable {
    pub fn n_columns(&self) -> usize {
        self.features.len() + 1
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("class");
        for f in &self.features {
            out.push(',');
            out.push_str(f);
        }
        out.push_str(",intercept\n");
        for (name, row) in self.class_names.iter().zip(&self.rows) {
            out.push_str(name);
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn planted(n: usize, seed: u64) -> Samples {
        let mut rng = rng_from_seed(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let noise: f64 = rng.sample(StandardNormal);
            let label = if a + 0.3 * rng.sample::<f64, _>(StandardNormal) > 0.5 {
                2
            } else if b > 0.0 {
                1
            } else {
                0
            };
            rows.push(vec![a, b, noise]);
            labels.push(label);
        }
        Samples::new(&rows, &labels, 3).unwrap()
    }

    #[test]
    fn penalty_validation() {
        assert!(Penalty::l1(0.0).is_err());
        assert!(Penalty::l2(-1.0).is_err());
        assert!(Penalty::l2(f64::NAN).is_err());
        assert!(Penalty::l2(1e-3).is_ok());
        assert_eq!("L1".parse::<PenaltyKind>().unwrap(), PenaltyKind::L1);
    }

    #[test]
    fn huge_penalty_zeroes_weights() {
        let s = planted(200, 1);
        for kind in [PenaltyKind::L1, PenaltyKind::L2] {
            let m = fit_logreg(&s, &Penalty::new(kind, 1e6).unwrap(), &FitParams::default()).unwrap();
            for w in m.weights.iter().flatten() {
                assert!(w.abs() <= 1e-6, "{kind:?} {w}");
            }
            let p0 = m.predict_proba(&[5.0, -5.0, 3.0]);
            let p1 = m.predict_proba(&[-5.0, 5.0, -3.0]);
            for (a, b) in p0.iter().zip(&p1) {
                assert!((a - b).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_from_seed(3);
        let s = planted(50, 2);
        let y: Vec<f64> = s.labels().iter().map(|&l| (l == 1) as u8 as f64).collect();
        let pen = Penalty::l2(0.1).unwrap();
        let theta: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
        let (_, g) = smooth_objective(&s, &y, &pen, &theta);
        let h = 1e-5;
        for j in 0..4 {
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[j] += h;
            dn[j] -= h;
            let fd = (smooth_value(&s, &y, &pen, &up) - smooth_value(&s, &y, &pen, &dn)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-6 * g[j].abs().max(1.0), "{j}: {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn l1_zeroes_noise_feature() {
        let s = planted(400, 4);
        let m = fit_logreg(&s, &Penalty::l1(0.05).unwrap(), &FitParams::default()).unwrap();
        for w in &m.weights {
            assert_eq!(w[2], 0.0);
        }
        assert!(m.weights[2][0] > 0.0);
        let names: Vec<String> = ["a", "b", "noise"].iter().map(|s| s.to_string()).collect();
        let classes: Vec<String> = ["0", "1", "2"].iter().map(|s| s.to_string()).collect();
        let table = coefficient_report(&m, &names, &classes);
        assert_eq!(table.rows.len(), 3);
        assert!(table.rows.iter().all(|r| r.len() == table.n_columns() && r[2] == 0.0));
    }

    #[test]
    fn history_non_increasing_and_converges() {
        let s = planted(300, 5);
        for pen in [Penalty::l1(1e-3).unwrap(), Penalty::l2(1e-3).unwrap()] {
            let m = fit_logreg(&s, &pen, &FitParams::default()).unwrap();
            assert!(!m.warning());
            for c in &m.convergence {
                assert!(c.history.windows(2).all(|w| w[1] <= w[0]));
                assert_eq!(*c.history.last().unwrap(), c.final_objective);
            }
        }
    }

    #[test]
    fn iteration_cap_sets_warning() {
        let s = planted(300, 6);
        let m = fit_logreg(&s, &Penalty::l2(1e-4).unwrap(), &FitParams { max_iter: 2, tol: 1e-8 }).unwrap();
        assert!(m.warning());
        assert!(m.convergence.iter().all(|c| c.iterations == 2));
    }

    #[test]
    fn stronger_penalty_smaller_norm() {
        let s = planted(300, 7);
        for kind in [PenaltyKind::L1, PenaltyKind::L2] {
            let mut prev = f64::INFINITY;
            for lambda in [1e-3, 1e-2, 1e-1, 1.0] {
                let pen = Penalty::new(kind, lambda).unwrap();
                let m = fit_logreg(&s, &pen, &FitParams::default()).unwrap();
                let norm: f64 = m.weights.iter().map(|w| pen.norm(w)).sum();
                assert!(norm <= prev + 1e-9, "{kind:?} {lambda}");
                prev = norm;
            }
        }
    }

    #[test]
    fn proba_properties() {
        let zero = LogRegModel::from_coefficients(vec![vec![0.0; 2]; 3], vec![0.0; 3], Penalty::l2(1.0).unwrap()).unwrap();
        assert_eq!(zero.predict_proba(&[1.0, -2.0]), vec![1.0 / 3.0; 3]);
        assert_eq!(zero.predict(&[1.0, -2.0]), 0);
        let m = LogRegModel::from_coefficients(
            vec![vec![1.0, -2.0], vec![0.5, 0.5], vec![-1.0, 0.0]],
            vec![0.1, -0.2, 0.3],
            Penalty::l1(1.0).unwrap(),
        )
        .unwrap();
        let mut rng = rng_from_seed(8);
        for _ in 0..100 {
            let x = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            assert!((m.predict_proba(&x).iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let bumped = [x[0] + 1.0, x[1]];
            assert!(m.scores(&bumped)[0] >= m.scores(&x)[0]);
        }
        let names = vec!["x".to_string(), "y".to_string()];
        let classes: Vec<String> = (0..3).map(|c| c.to_string()).collect();
        let t = coefficient_report(&m, &names, &classes);
        assert_eq!(t.rows[0], vec![1.0, -2.0, 0.1]);
        assert!(t.to_csv().starts_with("class,x,y,intercept\n0,1,-2,0.1\n"));
    }

    #[test]
    fn deterministic_and_rejects_single_class() {
        let s = planted(150, 9);
        let pen = Penalty::l2(1e-2).unwrap();
        assert_eq!(fit_logreg(&s, &pen, &FitParams::default()), fit_logreg(&s, &pen, &FitParams::default()));
        let one = Samples::new(&[vec![1.0], vec![2.0]], &[1, 1], 3).unwrap();
        assert_eq!(fit_logreg(&one, &pen, &FitParams::default()), Err(LinearError::Classes(1)));
    }
}
