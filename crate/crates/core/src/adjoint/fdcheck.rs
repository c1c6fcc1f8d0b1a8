//! Central finite-difference audit of adjoint gradients.

use serde::{Deserialize, Serialize};

use super::sensitivity::grad_logits;
use crate::error::{Error, Result};
use crate::gsm::{gsm_soft_sample, soft_sample_jacobian, Logits};
use crate::problem::{DesignProblem, Evaluation, FunctionGradient};

/// One compared derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdEntry {
    /// `objective` or the constraint label.
    pub function: String,
    /// `x[i]`, `attr[m][i]` or `logit[m][j]`.
    pub coordinate: String,
    pub adjoint: f64,
    pub fd: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FdReport {
    pub entries: Vec<FdEntry>,
    pub max_rel_error: f64,
}

impl FdReport {
    /// The entry with the largest relative error.
    pub fn worst(&self) -> Option<&FdEntry> {
        self.entries.iter().max_by(|a, b| a.rel_error.total_cmp(&b.rel_error))
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error < tol
    }
}

fn step(v: f64, h: f64) -> f64 {
    if v == 0.0 {
        h
    } else {
        h * v.abs()
    }
}

fn function_values(e: &Evaluation) -> Vec<f64> {
    std::iter::once(e.objective).chain(e.constraints.iter().copied()).collect()
}

/// Differences in the report, column by column (one column per coordinate).
#[derive(Default)]
struct Columns {
    coords: Vec<String>,
    adjoint: Vec<Vec<f64>>,
    fd: Vec<Vec<f64>>,
    noise: Vec<Vec<f64>>,
}

impl Columns {
    /// Central differences at `h` and `2h`. The disagreement between the two
    /// quotients, or the ε-level round-off model if larger, is taken as the
    /// noise of the difference.
    fn difference<F>(&mut self, coord: String, h: f64, adjoint: Vec<f64>, eval: F) -> Result<()>
    where
        F: Fn(f64) -> Result<Vec<f64>>,
    {
        let (p1, m1, p2, m2) = (eval(h)?, eval(-h)?, eval(2.0 * h)?, eval(-2.0 * h)?);
        let mut fd = Vec::with_capacity(p1.len());
        let mut noise = Vec::with_capacity(p1.len());
        for f in 0..p1.len() {
            let d1 = (p1[f] - m1[f]) / (2.0 * h);
            let d2 = (p2[f] - m2[f]) / (4.0 * h);
            // constraints are ratios offset by one, so they carry an absolute
            // round-off of order ε
            let magnitude = p1[f].abs().max(m1[f].abs()) + if f > 0 { 1.0 } else { 0.0 };
            fd.push(d1);
            noise.push((4.0 * f64::EPSILON * magnitude / (2.0 * h)).max((d1 - d2).abs()));
        }
        self.fd.push(fd);
        self.noise.push(noise);
        self.adjoint.push(adjoint);
        self.coords.push(coord);
        Ok(())
    }

    /// Relative error per entry. The denominator has two floors: a
    /// per-function one, so derivatives that vanish in exact arithmetic do
    /// not dominate, and the noise of the difference quotient
    /// scaled by `1/NOISE_REL`, so unresolvable discrepancies count as at
    /// most `NOISE_REL`.
    fn report(self, names: &[String]) -> FdReport {
        const NOISE_REL: f64 = 1e-6;
        let mut entries = Vec::new();
        let mut max_rel_error = 0.0f64;
        for (f, name) in names.iter().enumerate() {
            let scale = self.fd.iter().chain(&self.adjoint).fold(0.0f64, |m, c| m.max(c[f].abs()));
            let floor = 1e-6 * scale;
            for (k, coord) in self.coords.iter().enumerate() {
                let (a, d) = (self.adjoint[k][f], self.fd[k][f]);
                let denom = a.abs().max(d.abs()).max(floor).max(self.noise[k][f] / NOISE_REL);
                let rel_error = if denom == 0.0 { 0.0 } else { (a - d).abs() / denom };
                max_rel_error = max_rel_error.max(rel_error);
                entries.push(FdEntry { function: name.clone(), coordinate: coord.clone(), adjoint: a, fd: d, rel_error });
            }
        }
        FdReport { entries, max_rel_error }
    }
}

fn names<P: DesignProblem + ?Sized>(problem: &P) -> Vec<String> {
    std::iter::once("objective".to_string()).chain(problem.constraint_labels()).collect()
}

/// Compares adjoint gradients with respect to continuous variables and
/// attribute values against central differences with relative step `h`.
pub fn fd_check<P: DesignProblem + ?Sized>(problem: &P, attributes: &[Vec<f64>], x: &[f64], h: f64) -> Result<FdReport> {
    let (_, grads) = problem.evaluate_with_gradients(attributes, x)?;
    let all: Vec<&FunctionGradient> = std::iter::once(&grads.objective).chain(&grads.constraints).collect();

    let mut cols = Columns::default();

    for i in 0..x.len() {
        let hs = step(x[i], h);
        let eval = |d: f64| -> Result<Vec<f64>> {
            let mut xp = x.to_vec();
            xp[i] += d;
            Ok(function_values(&problem.evaluate(attributes, &xp)?))
        };
        cols.difference(format!("x[{i}]"), hs, all.iter().map(|g| g.continuous[i]).collect(), eval)?;
    }
    for (m, a) in attributes.iter().enumerate() {
        for i in 0..a.len() {
            let hs = step(a[i], h);
            let eval = |d: f64| -> Result<Vec<f64>> {
                let mut ap = attributes.to_vec();
                ap[m][i] += d;
                Ok(function_values(&problem.evaluate(&ap, x)?))
            };
            let adjoint = all.iter().map(|g| g.attributes[m][i]).collect();
            cols.difference(format!("attr[{m}][{i}]"), hs, adjoint, eval)?;
        }
    }
    Ok(cols.report(&names(problem)))
}

/// Audits the chain to the logits on the soft-relaxed surrogate
/// `J(A·s̃(θ))` with frozen noises: the attribute vector of each categorical
/// variable is the soft mixture of its choices.
pub fn fd_check_logits<P: DesignProblem + ?Sized>(
    problem: &P,
    logits: &[Logits],
    noises: &[Vec<f64>],
    tau: f64,
    x: &[f64],
    h: f64,
) -> Result<FdReport> {
    let space = problem.space();
    if logits.len() != space.n_categorical() || noises.len() != logits.len() {
        return Err(Error::Config("logit audit needs one logit and noise vector per categorical variable".into()));
    }
    let mixed = |ls: &[Logits]| -> Result<Vec<Vec<f64>>> {
        space
            .categorical
            .iter()
            .zip(ls.iter().zip(noises))
            .map(|(c, (l, g))| Ok(c.matrix.mix(&gsm_soft_sample(l, g, tau)?.values())))
            .collect()
    };
    let attrs = mixed(logits)?;
    let (_, grads) = problem.evaluate_with_gradients(&attrs, x)?;
    let all: Vec<&FunctionGradient> = std::iter::once(&grads.objective).chain(&grads.constraints).collect();

    let mut cols = Columns::default();
    for (m, c) in space.categorical.iter().enumerate() {
        let soft = gsm_soft_sample(&logits[m], &noises[m], tau)?;
        let jac = soft_sample_jacobian(&soft, tau, true);
        let per_fn = all
            .iter()
            .map(|g| grad_logits(&g.attributes[m], &c.matrix, &jac))
            .collect::<Result<Vec<_>>>()?;
        for j in 0..c.n_choices() {
            let eval = |d: f64| -> Result<Vec<f64>> {
                let mut ls = logits.to_vec();
                let mut v = ls[m].as_slice().to_vec();
                v[j] += d;
                ls[m] = Logits::new(v)?;
                Ok(function_values(&problem.evaluate(&mixed(&ls)?, x)?))
            };
            cols.difference(format!("logit[{m}][{j}]"), h, per_fn.iter().map(|g| g[j]).collect(), eval)?;
        }
    }
    Ok(cols.report(&names(problem)))
}

/// Both audits at a random interior design drawn from `seed`: random hard
/// choices for the attribute audit, random logits and Gumbel noise (τ = 1)
/// for the logit audit. Continuous values are drawn from the middle 80% of
/// their bounds.
pub fn random_audit<P: DesignProblem + ?Sized>(problem: &P, seed: u64, h: f64) -> Result<(FdReport, FdReport)> {
    use rand::Rng;
    let space = problem.space();
    let mut rng = crate::gsm::run_rng(seed);
    let x: Vec<f64> = space
        .continuous
        .iter()
        .map(|v| v.lower + (0.1 + 0.8 * rng.random::<f64>()) * (v.upper - v.lower))
        .collect();
    let choices: Vec<usize> = space.categorical.iter().map(|c| rng.random_range(0..c.n_choices())).collect();
    let attributes = fd_check(problem, &space.hard_attributes(&choices), &x, h)?;
    let logits = space
        .categorical
        .iter()
        .map(|c| Logits::new((0..c.n_choices()).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect::<Result<Vec<_>>>()?;
    let noises: Vec<Vec<f64>> =
        space.categorical.iter().map(|c| crate::gsm::sample_gumbel(&mut rng, c.n_choices())).collect();
    let chain = fd_check_logits(problem, &logits, &noises, 1.0, &x, h)?;
    Ok((attributes, chain))
}
