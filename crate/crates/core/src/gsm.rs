//! Differentiable sampling from categorical distributions.
//!
//! A categorical variable with `N` choices is parameterized by a vector of
//! unnormalized log-probabilities (logits). Samples are drawn with the
//! Gumbel-Max trick, relaxed with the Gumbel-Softmax for differentiation, and
//! hardened again with the straight-through argmax so the physics is always
//! evaluated on a real catalog entry.
//!
//! Choice indices are zero-based throughout. All argmax operations break exact
//! ties in favor of the lowest index.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The random stream owned by one optimization run.
pub type RunRng = ChaCha8Rng;

/// Creates the run generator for `seed`.
pub fn run_rng(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent child stream, e.g. for one of several repeat runs.
pub fn split_rng(parent: &RunRng, stream: u64) -> RunRng {
    let mut child = parent.clone();
    child.set_stream(stream.wrapping_add(1));
    child.set_word_pos(0);
    child
}

/// Unnormalized log-probabilities of one categorical variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Logits(Vec<f64>);

impl Logits {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "a categorical variable needs at least 2 choices, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite logit {bad}")));
        }
        Ok(Self(values))
    }

    /// All-zero logits: equal probability for every choice.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        softmax(&self.0)
    }

    /// Gradient step `θ ← θ − step·grad`. No renormalization is applied.
    pub fn descend(&mut self, grad: &[f64], step: f64) -> Result<()> {
        if grad.len() != self.0.len() {
            return Err(Error::Config(format!(
                "logit gradient has length {}, expected {}",
                grad.len(),
                self.0.len()
            )));
        }
        for (t, g) in self.0.iter_mut().zip(grad) {
            *t -= step * g;
        }
        if self.0.iter().any(|t| !t.is_finite()) {
            return Err(Error::Numerical("logit update produced a non-finite value".into()));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Logits {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Logits> for Vec<f64> {
    fn from(l: Logits) -> Self {
        l.0
    }
}

/// Relaxed ("soft one-hot") sample: a point on the probability simplex.
///
/// Entries may underflow to exactly zero at very low temperature; they always
/// sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftSample(Vec<f64>);

impl SoftSample {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

/// A single selected choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardSample {
    pub index: usize,
    pub len: usize,
}

impl HardSample {
    pub fn new(index: usize, len: usize) -> Self {
        debug_assert!(index < len);
        Self { index, len }
    }

    pub fn onehot(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len];
        v[self.index] = 1.0;
        v
    }
}

/// Geometric temperature annealing, floored at `min_temp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub initial_temp: f64,
    pub decay: f64,
    pub min_temp: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self { initial_temp: 100.0, decay: 0.9, min_temp: 0.01 }
    }
}

impl AnnealSchedule {
    pub fn new(initial_temp: f64, decay: f64, min_temp: f64) -> Result<Self> {
        let s = Self { initial_temp, decay, min_temp };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.initial_temp > 0.0 && self.min_temp > 0.0) {
            return Err(Error::Config("temperatures must be positive".into()));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::Config(format!("decay {} outside (0, 1]", self.decay)));
        }
        Ok(())
    }

    /// Temperature at iteration `k` (zero-based).
    pub fn temperature(&self, iteration: usize) -> f64 {
        let k = i32::try_from(iteration).unwrap_or(i32::MAX);
        (self.initial_temp * self.decay.powi(k)).max(self.min_temp)
    }
}

/// Log-odds `ln(p / (1 − p))`.
pub fn logit(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("logit needs 0 < p < 1, got {p}")));
    }
    Ok((p / (1.0 - p)).ln())
}

/// Numerically stable softmax.
pub fn softmax(theta: &[f64]) -> Vec<f64> {
    let max = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = theta.iter().map(|t| (t - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Maps a uniform draw to a standard Gumbel variate, clamping away from {0, 1}.
pub fn gumbel_from_uniform(r: f64) -> f64 {
    let r = r.clamp(f64::EPSILON, 1.0 - f64::EPSILON);
    -(-r.ln()).ln()
}

/// `n` independent standard Gumbel variates.
pub fn sample_gumbel<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| gumbel_from_uniform(rng.random::<f64>())).collect()
}

/// Gumbel-Max with caller-supplied noise.
pub fn gm_sample_with_noise(theta: &Logits, noises: &[f64]) -> HardSample {
    let perturbed: Vec<f64> = theta.as_slice().iter().zip(noises).map(|(t, g)| t + g).collect();
    HardSample::new(argmax(&perturbed), theta.len())
}

/// Gumbel-Max sample: argmax of logits perturbed by fresh Gumbel noise.
pub fn gm_sample<R: Rng + ?Sized>(theta: &Logits, rng: &mut R) -> HardSample {
    let noises = sample_gumbel(rng, theta.len());
    gm_sample_with_noise(theta, &noises)
}

/// Inverse-CDF sampling: pick the largest index whose cumulative
/// probability lower edge does not exceed a uniform draw.
pub fn cdf_sample<R: Rng + ?Sized>(theta: &Logits, rng: &mut R) -> HardSample {
    let p = theta.probabilities();
    let r: f64 = rng.random();
    let mut lower = 0.0;
    let mut chosen = 0;
    for (i, pi) in p.iter().enumerate() {
        if lower <= r {
            chosen = i;
        } else {
            break;
        }
        lower += pi;
    }
    HardSample::new(chosen, p.len())
}

/// Gumbel-Softmax relaxation `softmax((θ + G) / τ)`.
pub fn gsm_soft_sample(theta: &Logits, noises: &[f64], tau: f64) -> Result<SoftSample> {
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("temperature must be positive, got {tau}")));
    }
    if noises.len() != theta.len() {
        return Err(Error::Domain(format!(
            "{} noises for {} logits",
            noises.len(),
            theta.len()
        )));
    }
    let scaled: Vec<f64> =
        theta.as_slice().iter().zip(noises).map(|(t, g)| (t + g) / tau).collect();
    Ok(SoftSample(softmax(&scaled)))
}

/// Straight-through hard sample: one-hot at the argmax of the soft sample.
pub fn straight_through(soft: &SoftSample) -> HardSample {
    HardSample::new(soft.argmax(), soft.len())
}

/// Jacobian `∂s̃_i/∂θ_j` of the soft sample.
///
/// With `temperature_scaling` the entries carry the `1/τ` factor that follows
/// from differentiating `softmax((θ + G)/τ)`; without it the bare softmax
/// Jacobian is returned.
pub fn soft_sample_jacobian(soft: &SoftSample, tau: f64, temperature_scaling: bool) -> DMatrix<f64> {
    let s = soft.values();
    let n = s.len();
    let scale = if temperature_scaling { 1.0 / tau } else { 1.0 };
    DMatrix::from_fn(n, n, |i, j| {
        let v = if i == j { (1.0 - s[i]) * s[i] } else { -s[i] * s[j] };
        scale * v
    })
}

/// Soft and hard samples drawn for one categorical variable in one iteration.
#[derive(Debug, Clone)]
pub struct SampleState {
    pub noises: Vec<Vec<f64>>,
    pub soft: SoftSample,
    pub hard: HardSample,
    pub jacobian: DMatrix<f64>,
}

/// Draws `samples` Gumbel perturbations for one variable.
///
/// With a single sample this is the plain straight-through estimator. With
/// several, the hard choice is the most frequent argmax (lowest index on ties)
/// and the soft sample and Jacobian are averaged over the draws.
pub fn draw_sample<R: Rng + ?Sized>(
    theta: &Logits,
    tau: f64,
    samples: usize,
    temperature_scaling: bool,
    rng: &mut R,
) -> Result<SampleState> {
    let n = theta.len();
    let samples = samples.max(1);
    let mut noises = Vec::with_capacity(samples);
    let mut soft_sum = vec![0.0; n];
    let mut jac_sum = DMatrix::zeros(n, n);
    let mut votes = vec![0usize; n];
    for _ in 0..samples {
        let g = sample_gumbel(rng, n);
        let soft = gsm_soft_sample(theta, &g, tau)?;
        votes[soft.argmax()] += 1;
        jac_sum += soft_sample_jacobian(&soft, tau, temperature_scaling);
        for (acc, v) in soft_sum.iter_mut().zip(soft.values()) {
            *acc += v;
        }
        noises.push(g);
    }
    let m = samples as f64;
    let soft = SoftSample(soft_sum.into_iter().map(|v| v / m).collect());
    let hard = if samples == 1 {
        straight_through(&soft)
    } else {
        let mut best = 0;
        for i in 1..n {
            if votes[i] > votes[best] {
                best = i;
            }
        }
        HardSample::new(best, n)
    };
    Ok(SampleState { noises, soft, hard, jacobian: jac_sum / m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn logits(v: &[f64]) -> Logits {
        Logits::new(v.to_vec()).unwrap()
    }

    #[test]
    fn logit_values() {
        assert_eq!(logit(0.5).unwrap(), 0.0);
        assert_relative_eq!(logit(0.9).unwrap(), 9f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(logit(0.9).unwrap(), 2.1972, epsilon = 1e-4);
        assert!(logit(1.0).is_err());
        assert!(logit(0.0).is_err());
        assert!(logit(f64::NAN).is_err());
    }

    #[test]
    fn softmax_uniform_and_shift() {
        let p = softmax(&[0.0, 0.0, 0.0]);
        for v in &p {
            assert_relative_eq!(*v, 1.0 / 3.0, epsilon = 1e-15);
        }
        let a = softmax(&[1.0, 2.0, 3.0]);
        let b = softmax(&[1001.0, 1002.0, 1003.0]);
        for (x, y) in a.iter().zip(&b) {
            assert_relative_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn softmax_reference_values() {
        // exp(k) / (e + e^2 + e^3), evaluated independently
        let e = std::f64::consts::E;
        let z = e + e * e + e * e * e;
        let p = softmax(&[1.0, 2.0, 3.0]);
        assert_relative_eq!(p[0], e / z, epsilon = 1e-15);
        assert_relative_eq!(p[0], 0.09003, epsilon = 1e-5);
        assert_relative_eq!(p[1], 0.24473, epsilon = 1e-5);
        assert_relative_eq!(p[2], 0.66524, epsilon = 1e-5);
        assert_relative_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn logits_validation() {
        assert!(Logits::new(vec![1.0]).is_err());
        assert!(Logits::new(vec![1.0, f64::INFINITY]).is_err());
        let l: Logits = serde_json::from_str("[0.5, 1.5]").unwrap();
        assert_eq!(l.len(), 2);
        assert!(serde_json::from_str::<Logits>("[0.5]").is_err());
    }

    #[test]
    fn gumbel_location() {
        assert_relative_eq!(gumbel_from_uniform((-1.0f64).exp()), 0.0, epsilon = 1e-15);
        assert!(gumbel_from_uniform(0.0).is_finite());
        assert!(gumbel_from_uniform(1.0).is_finite());
    }

    #[test]
    fn gumbel_mean_is_euler_gamma() {
        let mut rng = run_rng(7);
        let n = 1_000_000;
        let mean = sample_gumbel(&mut rng, n).iter().sum::<f64>() / n as f64;
        assert!((mean - 0.577_215_664_9).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn gumbel_stream_is_deterministic() {
        let a = sample_gumbel(&mut run_rng(3), 50);
        let b = sample_gumbel(&mut run_rng(3), 50);
        assert_eq!(a, b);
        let c = sample_gumbel(&mut split_rng(&run_rng(3), 1), 50);
        assert_ne!(a, c);
    }

    #[test]
    fn dominant_logit_wins() {
        let theta = logits(&[50.0, -50.0]);
        let mut rng = run_rng(1);
        for _ in 0..1000 {
            assert_eq!(gm_sample(&theta, &mut rng).index, 0);
        }
        let hits = (0..10_000).filter(|_| cdf_sample(&theta, &mut rng).index == 0).count();
        assert!(hits as f64 / 1e4 > 0.999);
    }

    #[test]
    fn cdf_symmetric_case() {
        let theta = logits(&[0.0, 0.0]);
        let mut rng = run_rng(11);
        let n = 100_000;
        let hits = (0..n).filter(|_| cdf_sample(&theta, &mut rng).index == 0).count();
        assert!((hits as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn gm_uniform_frequencies() {
        let theta = logits(&[0.0, 0.0, 0.0]);
        let mut rng = run_rng(5);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[gm_sample(&theta, &mut rng).index] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.01);
        }
    }

    #[test]
    fn soft_sample_limits() {
        let theta = logits(&[1.0, 2.0, 3.0]);
        let g = [0.0; 3];
        let hot = gsm_soft_sample(&theta, &g, 1e6).unwrap();
        for v in hot.values() {
            assert!((v - 1.0 / 3.0).abs() < 1e-5);
        }
        let cold = gsm_soft_sample(&theta, &g, 0.01).unwrap();
        assert_eq!(cold.argmax(), 2);
        assert!(cold.values()[2] > 1.0 - 1e-6);
        assert!(gsm_soft_sample(&theta, &g, 0.0).is_err());
        assert!(gsm_soft_sample(&theta, &g, -1.0).is_err());
        assert!(gsm_soft_sample(&theta, &[0.0; 2], 1.0).is_err());
    }

    #[test]
    fn straight_through_argmax_and_ties() {
        let s = SoftSample(vec![0.2, 0.5, 0.3]);
        let h = straight_through(&s);
        assert_eq!(h.index, 1);
        assert_eq!(h.onehot(), vec![0.0, 1.0, 0.0]);
        assert_eq!(straight_through(&SoftSample(vec![0.5, 0.5])).index, 0);
    }

    #[test]
    fn straight_through_matches_gumbel_max_at_low_temperature() {
        let mut rng = run_rng(9);
        let theta = logits(&[0.3, -0.2, 1.1, 0.0]);
        for _ in 0..200 {
            let g = sample_gumbel(&mut rng, 4);
            let soft = gsm_soft_sample(&theta, &g, 0.01).unwrap();
            assert_eq!(straight_through(&soft), gm_sample_with_noise(&theta, &g));
        }
    }

    #[test]
    fn jacobian_structure() {
        let theta = logits(&[0.4, -1.0, 2.0]);
        let soft = gsm_soft_sample(&theta, &[0.1, 0.7, -0.3], 0.5).unwrap();
        let j = soft_sample_jacobian(&soft, 0.5, true);
        for i in 0..3 {
            assert!(j.row(i).sum().abs() < 1e-15);
            for k in 0..3 {
                assert_eq!(j[(i, k)], j[(k, i)]);
            }
        }
        let literal = soft_sample_jacobian(&soft, 0.5, false);
        assert_relative_eq!(literal * 2.0, j, epsilon = 1e-15);
    }

    // entries close to 1 are differenced through their complement
    fn stable_entry(s: &SoftSample, i: usize) -> f64 {
        let v = s.values();
        if v[i] > 0.5 {
            -v.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, x)| x).sum::<f64>()
        } else {
            v[i]
        }
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let theta = logits(&[0.4, -1.0, 2.0, 0.3]);
        let g = [0.1, 0.7, -0.3, 1.2];
        for tau in [100.0, 1.0, 0.1] {
            let soft = gsm_soft_sample(&theta, &g, tau).unwrap();
            let jac = soft_sample_jacobian(&soft, tau, true);
            let h = 1e-6;
            for j in 0..4 {
                let mut up = theta.as_slice().to_vec();
                let mut dn = up.clone();
                up[j] += h;
                dn[j] -= h;
                let su = gsm_soft_sample(&logits(&up), &g, tau).unwrap();
                let sd = gsm_soft_sample(&logits(&dn), &g, tau).unwrap();
                for i in 0..4 {
                    let v = stable_entry(&soft, i);
                    let fd = (stable_entry(&su, i) - stable_entry(&sd, i)) / (2.0 * h);
                    let a = jac[(i, j)];
                    // round-off floor of the difference quotient itself
                    let noise = 1e6 * 4.0 * f64::EPSILON * v.abs() / h;
                    let err = (fd - a).abs() / (a.abs().max(fd.abs()) + noise);
                    assert!(err < 1e-6, "tau {tau} ({i},{j}): {fd} vs {a}");
                }
            }
        }
    }

    #[test]
    fn temperature_schedule() {
        let s = AnnealSchedule::default();
        assert_eq!(s.temperature(0), 100.0);
        assert_relative_eq!(s.temperature(1), 90.0, epsilon = 1e-12);
        assert!(100.0 * 0.9f64.powi(200) < 0.01);
        assert_eq!(s.temperature(200), 0.01);
        assert!(AnnealSchedule::new(1.0, 1.5, 0.1).is_err());
        assert!(AnnealSchedule::new(0.0, 0.9, 0.1).is_err());
    }

    #[test]
    fn multi_sample_majority_vote() {
        let theta = logits(&[0.0, 3.0, 0.0]);
        let mut rng = run_rng(2);
        let st = draw_sample(&theta, 1.0, 25, true, &mut rng).unwrap();
        assert_eq!(st.noises.len(), 25);
        assert_eq!(st.hard.index, 1);
        assert_relative_eq!(st.soft.values().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn theta() -> impl Strategy<Value = Vec<f64>> {
            prop::collection::vec(-20.0..20.0f64, 2..7)
        }

        proptest! {
            #[test]
            fn softmax_is_a_distribution_and_shift_invariant(t in theta(), c in -100.0..100.0f64) {
                let p = softmax(&t);
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let shifted: Vec<f64> = t.iter().map(|v| v + c).collect();
                for (a, b) in p.iter().zip(softmax(&shifted)) {
                    prop_assert!((a - b).abs() < 1e-12);
                }
            }

            #[test]
            fn soft_sample_is_interior_and_normalized(t in theta(), seed in 0u64..1000, tau in 0.05..100.0f64) {
                let mut rng = run_rng(seed);
                let g = sample_gumbel(&mut rng, t.len());
                let s = gsm_soft_sample(&Logits::new(t.clone()).unwrap(), &g, tau).unwrap();
                prop_assert!((s.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
                prop_assert!(s.values().iter().all(|v| *v >= 0.0 && *v <= 1.0));
                let shifted: Vec<f64> = t.iter().map(|v| v + 3.0).collect();
                let h = gm_sample_with_noise(&Logits::new(shifted).unwrap(), &g);
                prop_assert_eq!(h, gm_sample_with_noise(&Logits::new(t).unwrap(), &g));
            }

            #[test]
            fn jacobian_rows_sum_to_zero(t in theta(), seed in 0u64..1000, tau in 0.1..100.0f64) {
                let mut rng = run_rng(seed);
                let g = sample_gumbel(&mut rng, t.len());
                let s = gsm_soft_sample(&Logits::new(t).unwrap(), &g, tau).unwrap();
                let j = soft_sample_jacobian(&s, tau, true);
                for r in 0..j.nrows() {
                    prop_assert!(j.row(r).sum().abs() < 1e-12 / tau.min(1.0));
                }
                prop_assert!((&j - j.transpose()).amax() == 0.0);
            }

            #[test]
            fn cooling_sharpens_without_changing_the_winner(t in theta(), seed in 0u64..1000) {
                let mut rng = run_rng(seed);
                let g = sample_gumbel(&mut rng, t.len());
                let theta = Logits::new(t).unwrap();
                let mut last_max = 0.0;
                let mut winner = None;
                for tau in [100.0, 10.0, 1.0, 0.1, 0.01] {
                    let s = gsm_soft_sample(&theta, &g, tau).unwrap();
                    let m = s.values()[s.argmax()];
                    prop_assert!(m >= last_max - 1e-15);
                    last_max = m;
                    prop_assert_eq!(*winner.get_or_insert(s.argmax()), s.argmax());
                }
            }

            #[test]
            fn temperature_is_nonincreasing_and_floored(t0 in 0.01..1000.0f64, d in 0.01..=1.0f64, k in 0usize..500) {
                let s = AnnealSchedule::new(t0, d, 0.01).unwrap();
                prop_assert!(s.temperature(k + 1) <= s.temperature(k));
                prop_assert!(s.temperature(k) >= 0.01);
            }
        }
    }
}
