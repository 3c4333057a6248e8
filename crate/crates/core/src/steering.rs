//! Conditional parity statistics between two modes and the steering
//! functional `½[P(b_{β₁}|a_{α₁}) + P(b_{β₂}|a_{α₂})]`.
//!
//! Mode 0 belongs to Alice (the conditioning side), mode 1 to Bob.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{
    clamp_probability, parity_projector, probability, reduced_operator, MultiModeState, Parity,
    ParitySetting, Truncation, C64,
};
use crate::fur::{DEFAULT_BOUND_TOLERANCE, FUR_LOWER, FUR_UPPER};
use crate::scan::{check_grid, Axis, ExtremumKind, ScanMeta, ScanResult};

/// Conditioning marginals below this are treated as undefined.
pub const CONDITIONING_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteeringSettings {
    pub alice: [ParitySetting; 2],
    pub bob: [ParitySetting; 2],
}

impl SteeringSettings {
    pub fn new(alice: [ParitySetting; 2], bob: [ParitySetting; 2]) -> Self {
        Self { alice, bob }
    }

    /// `((α, −α), (β, −β))` with fixed outcomes.
    pub fn paired(a: Parity, alpha: f64, b: Parity, beta: f64) -> Result<Self> {
        let alice = ParitySetting::new(a, alpha)?;
        let bob = ParitySetting::new(b, beta)?;
        Ok(Self {
            alice: [alice, alice.mirrored()],
            bob: [bob, bob.mirrored()],
        })
    }

    /// Every displacement negated.
    pub fn mirrored(self) -> Self {
        Self {
            alice: self.alice.map(ParitySetting::mirrored),
            bob: self.bob.map(ParitySetting::mirrored),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationSide {
    Upper,
    Lower,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SteeringReport {
    pub value: f64,
    pub violated: bool,
    pub side: ViolationSide,
    /// Distance outside `[¼, ¾]`; negative while inside.
    pub margin: f64,
    pub tolerance: f64,
    pub settings: SteeringSettings,
}

impl SteeringReport {
    fn classify(value: f64, tolerance: f64, settings: SteeringSettings) -> Self {
        let side = if value > FUR_UPPER + tolerance {
            ViolationSide::Upper
        } else if value < FUR_LOWER - tolerance {
            ViolationSide::Lower
        } else {
            ViolationSide::None
        };
        Self {
            value,
            violated: side != ViolationSide::None,
            side,
            margin: (value - FUR_UPPER).max(FUR_LOWER - value),
            tolerance,
            settings,
        }
    }
}

/// `(|N,0⟩ − |0,N⟩)/√2` with both modes truncated at `dim`.
pub fn noon_state(n: usize, dim: usize) -> Result<MultiModeState> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "photon number N must be positive".into(),
        ));
    }
    if dim <= n {
        return Err(Error::InvalidDim {
            dim,
            reason: format!("must exceed N = {n}"),
        });
    }
    let mut amps = vec![C64::new(0.0, 0.0); dim * dim];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amps[n * dim] = C64::new(h, 0.0);
    amps[n] = C64::new(-h, 0.0);
    MultiModeState::pure(vec![dim, dim], amps)
}

/// Automatic truncation for N00N scans: the `N`-photon component is treated
/// like a coherent amplitude `√N`.
pub fn noon_dim(n: usize, truncation: Truncation, displacement_max: f64) -> usize {
    truncation
        .resolve((n as f64).sqrt(), displacement_max)
        .max(n + 1)
}

fn two_mode(state: &MultiModeState) -> Result<usize> {
    if state.modes() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "steering needs a two-mode state, got {} modes",
            state.modes()
        )));
    }
    Ok(state.dims()[0])
}

/// `Tr[ρ (Π^a(α) ⊗ Π^b(β))]`.
pub fn joint_parity_prob(
    state: &MultiModeState,
    a: ParitySetting,
    b: ParitySetting,
) -> Result<f64> {
    two_mode(state)?;
    let pa = parity_projector(a, state.dims()[0])?;
    let pb = parity_projector(b, state.dims()[1])?;
    probability(state, &[Some(&pa), Some(&pb)])
}

/// Alice's outcome probability `Tr[ρ (Π^a(α) ⊗ I)]`.
pub fn alice_marginal(state: &MultiModeState, a: ParitySetting) -> Result<f64> {
    two_mode(state)?;
    let pa = parity_projector(a, state.dims()[0])?;
    probability(state, &[Some(&pa), None])
}

pub(crate) fn condition(joint: f64, marginal: f64) -> Result<f64> {
    if marginal < CONDITIONING_THRESHOLD {
        return Err(Error::DegenerateConditioning {
            probability: marginal,
            threshold: CONDITIONING_THRESHOLD,
        });
    }
    clamp_probability(joint / marginal)
}

/// `P(b_β | a_α)`.
pub fn conditional_prob(state: &MultiModeState, b: ParitySetting, a: ParitySetting) -> Result<f64> {
    let marginal = alice_marginal(state, a)?;
    if marginal < CONDITIONING_THRESHOLD {
        return condition(0.0, marginal);
    }
    condition(joint_parity_prob(state, a, b)?, marginal)
}

pub fn steering_functional(
    state: &MultiModeState,
    settings: SteeringSettings,
) -> Result<SteeringReport> {
    steering_functional_with_tolerance(state, settings, DEFAULT_BOUND_TOLERANCE)
}

pub fn steering_functional_with_tolerance(
    state: &MultiModeState,
    settings: SteeringSettings,
    tolerance: f64,
) -> Result<SteeringReport> {
    let p1 = conditional_prob(state, settings.bob[0], settings.alice[0])?;
    let p2 = conditional_prob(state, settings.bob[1], settings.alice[1])?;
    Ok(SteeringReport::classify(
        0.5 * (p1 + p2),
        tolerance,
        settings,
    ))
}

/// Bob's conditional operator given Alice's outcome, with its trace.
struct Conditioned {
    x: DMatrix<C64>,
    marginal: f64,
}

impl Conditioned {
    fn new(state: &MultiModeState, a: ParitySetting) -> Result<Self> {
        let pa = parity_projector(a, state.dims()[0])?;
        let x = reduced_operator(state, &[Some(&pa), None], &[1])?;
        let marginal = clamp_probability(x.trace().re)?;
        Ok(Self { x, marginal })
    }

    /// `P(b|a)` for a real symmetric Bob projector.
    fn conditional(&self, pb: &DMatrix<f64>) -> Result<f64> {
        let joint: f64 = self.x.iter().zip(pb.iter()).map(|(x, p)| x.re * p).sum();
        condition(clamp_probability(joint)?, self.marginal)
    }
}

fn real_projector(setting: ParitySetting, dim: usize) -> Result<DMatrix<f64>> {
    Ok(parity_projector(setting, dim)?.matrix().map(|z| z.re))
}

/// Steering functional over `alpha × beta` with paired settings
/// `((α, −α), (β, −β))`. Cells whose conditioning is degenerate are `None`.
/// Axes are `[alpha, beta]`, row-major.
pub fn violation_search(
    state: &MultiModeState,
    alpha_grid: &[f64],
    beta_grid: &[f64],
    b: Parity,
    a: Parity,
) -> Result<ScanResult> {
    two_mode(state)?;
    check_grid(alpha_grid, "alpha grid")?;
    check_grid(beta_grid, "beta grid")?;
    let dim_b = state.dims()[1];
    let bob: Vec<(DMatrix<f64>, DMatrix<f64>)> = beta_grid
        .par_iter()
        .map(|&beta| {
            let s = ParitySetting::new(b, beta)?;
            Ok((
                real_projector(s, dim_b)?,
                real_projector(s.mirrored(), dim_b)?,
            ))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<Option<f64>>> = alpha_grid
        .par_iter()
        .map(|&alpha| {
            let s = ParitySetting::new(a, alpha)?;
            let plus = Conditioned::new(state, s)?;
            let minus = Conditioned::new(state, s.mirrored())?;
            bob.iter()
                .map(|(pb, pb_m)| {
                    let cell = plus
                        .conditional(pb)
                        .and_then(|p1| Ok(0.5 * (p1 + minus.conditional(pb_m)?)));
                    match cell {
                        Ok(v) => Ok(Some(v)),
                        Err(Error::DegenerateConditioning { .. }) => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    ScanResult::new(
        "noon-scan",
        vec![
            Axis::new("alpha", alpha_grid.to_vec()),
            Axis::new("beta", beta_grid.to_vec()),
        ],
        rows.into_iter().flatten().collect(),
        ExtremumKind::Max,
        ScanMeta::new(state.dims().to_vec(), 0.0, DEFAULT_BOUND_TOLERANCE),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NoonCase {
    pub b: Parity,
    pub a: Parity,
    pub side: ViolationSide,
}

/// Outcome pairs `(b, a)` at which the N00N state violates the bound
/// maximally, and on which side.
pub fn noon_case_table(n: usize) -> Vec<NoonCase> {
    use Parity::{Even, Odd};
    use ViolationSide::{Lower, Upper};
    let case = |b, a, side| NoonCase { b, a, side };
    if n.is_multiple_of(2) {
        vec![
            case(Even, Even, Upper),
            case(Even, Odd, Upper),
            case(Odd, Even, Lower),
            case(Odd, Odd, Lower),
        ]
    } else {
        vec![
            case(Even, Odd, Upper),
            case(Odd, Even, Upper),
            case(Even, Even, Lower),
            case(Odd, Odd, Lower),
        ]
    }
}
