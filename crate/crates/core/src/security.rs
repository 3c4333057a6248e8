//! Monogamy of steering correlations, key-rate bounds and the two-level
//! baseline constants.
//!
//! Tripartite states order their modes Alice, Bob, Charlie; Bob is steered
//! by both of the others with the same pair of settings.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{parity_projector, probability, MultiModeState, ParitySetting};
use crate::fur::{FUR_LOWER, FUR_UPPER};
use crate::sampling::{sample_paired_setting, MixtureSpec};
use crate::steering::condition;

pub const MONOGAMY_LOWER: f64 = 0.5;
pub const MONOGAMY_UPPER: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonogamyReport {
    pub sigma_ba: f64,
    pub sigma_bc: f64,
    /// `½(Σ_BA + Σ_BC)`.
    pub combined: f64,
    pub within_bounds: bool,
    pub tolerance: f64,
}

/// `P(b|x)` on a three-mode state, with the conditioning party `x` on
/// `party` (0 or 2) and the remaining mode traced out.
fn tripartite_conditional(
    state: &MultiModeState,
    party: usize,
    x: ParitySetting,
    b: ParitySetting,
) -> Result<f64> {
    let px = parity_projector(x, state.dims()[party])?;
    let pb = parity_projector(b, state.dims()[1])?;
    let mut marginal_ops = [None, None, None];
    marginal_ops[party] = Some(&px);
    let marginal = probability(state, &marginal_ops)?;
    if marginal < crate::steering::CONDITIONING_THRESHOLD {
        return condition(0.0, marginal);
    }
    let mut joint_ops = marginal_ops;
    joint_ops[1] = Some(&pb);
    condition(probability(state, &joint_ops)?, marginal)
}

pub fn monogamy_check(
    state: &MultiModeState,
    alice: [ParitySetting; 2],
    bob: [ParitySetting; 2],
    charlie: [ParitySetting; 2],
    tolerance: f64,
) -> Result<MonogamyReport> {
    if state.modes() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "monogamy needs a three-mode state, got {} modes",
            state.modes()
        )));
    }
    let mut sigma_ba = 0.0;
    let mut sigma_bc = 0.0;
    for k in 0..2 {
        sigma_ba += tripartite_conditional(state, 0, alice[k], bob[k])?;
        sigma_bc += tripartite_conditional(state, 2, charlie[k], bob[k])?;
    }
    let combined = 0.5 * (sigma_ba + sigma_bc);
    Ok(MonogamyReport {
        sigma_ba,
        sigma_bc,
        combined,
        within_bounds: (MONOGAMY_LOWER - tolerance..=MONOGAMY_UPPER + tolerance)
            .contains(&combined),
        tolerance,
    })
}

/// One random tripartite draw: mixture amplitudes plus paired settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonogamySample {
    pub index: usize,
    pub weights: Vec<f64>,
    /// `gammas[term][mode]`.
    pub gammas: Vec<Vec<f64>>,
    pub alice: [ParitySetting; 2],
    pub bob: [ParitySetting; 2],
    pub charlie: [ParitySetting; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonogamySamplerConfig {
    pub max_terms: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub displacement_min: f64,
    pub displacement_max: f64,
    pub dim: usize,
}

impl Default for MonogamySamplerConfig {
    fn default() -> Self {
        Self {
            max_terms: 4,
            gamma_min: 1.0,
            gamma_max: 2.5,
            displacement_min: crate::fur::DEFAULT_BETA_MIN,
            displacement_max: 2.0,
            dim: crate::fock::auto_dim(2.5, 2.0),
        }
    }
}

impl MonogamySamplerConfig {
    fn spec(&self) -> Result<MixtureSpec> {
        MixtureSpec::new(3, self.max_terms, self.gamma_min, self.gamma_max, self.dim)
    }
}

/// Draws `count` samples in order from `rng`.
pub fn draw_monogamy_samples<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    config: &MonogamySamplerConfig,
) -> Result<Vec<MonogamySample>> {
    let spec = config.spec()?;
    let (lo, hi) = (config.displacement_min, config.displacement_max);
    Ok((0..count)
        .map(|index| {
            let (weights, gammas) = spec.sample_amplitudes(rng);
            MonogamySample {
                index,
                weights,
                gammas,
                alice: sample_paired_setting(rng, lo, hi),
                bob: sample_paired_setting(rng, lo, hi),
                charlie: sample_paired_setting(rng, lo, hi),
            }
        })
        .collect())
}

/// Evaluates every sample (in parallel); reports keep sample order.
pub fn evaluate_monogamy_samples(
    samples: &[MonogamySample],
    config: &MonogamySamplerConfig,
    tolerance: f64,
) -> Result<Vec<MonogamyReport>> {
    let spec = config.spec()?;
    samples
        .par_iter()
        .map(|s| {
            let state = spec.build(s.weights.clone(), &s.gammas)?;
            monogamy_check(&state, s.alice, s.bob, s.charlie, tolerance)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KeyRateResult {
    pub delta: f64,
    /// Bits per shared state.
    pub rate_lower_bound: f64,
}

/// `log₂((¾ + δ)/(¾ − δ))` for a violation `δ ∈ (0, ¼]`.
pub fn key_rate_lower_bound(delta: f64) -> Result<KeyRateResult> {
    if !(delta > 0.0 && delta <= 0.25) {
        return Err(Error::OutOfRange {
            what: "delta",
            value: delta,
            range: "(0, 1/4]",
        });
    }
    Ok(KeyRateResult {
        delta,
        rate_lower_bound: ((FUR_UPPER + delta) / (FUR_UPPER - delta)).log2(),
    })
}

/// Amount `δ = value − ¾` by which a functional value exceeds the upper bound.
pub fn delta_from_violation(value: f64) -> Result<f64> {
    if !(value > FUR_UPPER && value <= 1.0) {
        return Err(Error::OutOfRange {
            what: "steering functional",
            value,
            range: "(3/4, 1]",
        });
    }
    Ok(value - FUR_UPPER)
}

const DISTRIBUTION_TOLERANCE: f64 = 1e-10;

/// `I(A:B)` in bits for a 2×2 joint table `joint[a][b]`.
pub fn mutual_information(joint: [[f64; 2]; 2]) -> Result<f64> {
    let flat = joint.iter().flatten();
    if let Some(p) = flat.clone().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "entry {p} is not a probability"
        )));
    }
    let total: f64 = flat.sum();
    if (total - 1.0).abs() > DISTRIBUTION_TOLERANCE {
        return Err(Error::InvalidDistribution(format!(
            "entries sum to {total}"
        )));
    }
    let pa = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
    let pb = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
    let mut info = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let p = joint[a][b];
            if p > 0.0 {
                info += p * (p / (pa[a] * pb[b])).log2();
            }
        }
    }
    Ok(info.clamp(0.0, 1.0))
}

/// Reference constants for the qubit relation alongside the displaced-parity ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiscreteBaseline {
    pub lower: f64,
    pub upper: f64,
    pub steering_threshold_upper: f64,
    pub discrete_key_rate_lower_bound: f64,
    pub continuous_upper: f64,
    pub continuous_lower: f64,
}

pub fn discrete_baseline() -> DiscreteBaseline {
    let half_width = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
    DiscreteBaseline {
        lower: 0.5 - half_width,
        upper: 0.5 + half_width,
        steering_threshold_upper: 0.5 + half_width,
        discrete_key_rate_lower_bound: 0.5,
        continuous_upper: FUR_UPPER,
        continuous_lower: FUR_LOWER,
    }
}
