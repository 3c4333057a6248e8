//! Seeded random mixtures of product coherent states and random parity
//! settings. Every draw comes from the caller's generator, in a fixed order.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{auto_dim, coherent_state, MultiModeState, Parity, ParitySetting};

/// Shape of a random separable mixture: `terms` product coherent states with
/// amplitudes `±[gamma_min, gamma_max]` on every mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixtureSpec {
    pub modes: usize,
    pub max_terms: usize,
    /// When set every mixture has exactly `max_terms` terms; otherwise the
    /// count is uniform on `1..=max_terms`.
    pub fixed_terms: bool,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub dim: usize,
}

impl MixtureSpec {
    pub fn new(
        modes: usize,
        max_terms: usize,
        gamma_min: f64,
        gamma_max: f64,
        dim: usize,
    ) -> Result<Self> {
        if modes == 0 || max_terms == 0 {
            return Err(Error::InvalidParameter(
                "mixtures need at least one mode and one term".into(),
            ));
        }
        if !(gamma_min.is_finite()
            && gamma_max.is_finite()
            && 0.0 <= gamma_min
            && gamma_min <= gamma_max)
        {
            return Err(Error::InvalidParameter(format!(
                "amplitude range [{gamma_min}, {gamma_max}] is not a valid interval"
            )));
        }
        Ok(Self {
            modes,
            max_terms,
            fixed_terms: false,
            gamma_min,
            gamma_max,
            dim,
        })
    }

    pub fn with_fixed_terms(mut self) -> Self {
        self.fixed_terms = true;
        self
    }

    /// Smallest automatic truncation that holds every amplitude and a
    /// displacement up to `displacement_max`.
    pub fn auto_dim(gamma_max: f64, displacement_max: f64) -> usize {
        auto_dim(gamma_max, displacement_max)
    }

    pub fn sample_amplitudes<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, Vec<Vec<f64>>) {
        let terms = if self.fixed_terms {
            self.max_terms
        } else {
            rng.random_range(1..=self.max_terms)
        };
        let mut weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let gammas = (0..terms)
            .map(|_| {
                (0..self.modes)
                    .map(|_| signed(rng, self.gamma_min, self.gamma_max))
                    .collect()
            })
            .collect();
        (weights, gammas)
    }

    pub fn build(&self, weights: Vec<f64>, gammas: &[Vec<f64>]) -> Result<MultiModeState> {
        let components = gammas
            .iter()
            .map(|term| term.iter().map(|&g| coherent_state(g, self.dim)).collect())
            .collect::<Result<Vec<_>>>()?;
        MultiModeState::separable(weights, components)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MultiModeState> {
        let (w, g) = self.sample_amplitudes(rng);
        self.build(w, &g)
    }
}

fn signed<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let magnitude = if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    };
    if rng.random::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

/// Displacement with magnitude uniform on `[min, max]` and random sign.
pub fn sample_displacement<R: Rng + ?Sized>(rng: &mut R, min: f64, max: f64) -> f64 {
    signed(rng, min, max)
}

pub fn sample_parity<R: Rng + ?Sized>(rng: &mut R) -> Parity {
    if rng.random::<bool>() {
        Parity::Odd
    } else {
        Parity::Even
    }
}

/// A setting and its mirror image `(x, −x)` with one random outcome.
pub fn sample_paired_setting<R: Rng + ?Sized>(
    rng: &mut R,
    min: f64,
    max: f64,
) -> [ParitySetting; 2] {
    let outcome = sample_parity(rng);
    let s = ParitySetting {
        outcome,
        displacement: sample_displacement(rng, min, max),
    };
    [s, s.mirrored()]
}
