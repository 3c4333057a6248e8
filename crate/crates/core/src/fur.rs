//! Fine-grained uncertainty for displaced parity measurements.
//!
//! The average certainty of outcome `b` over the mirrored displacements
//! `±β` is `½[P(b_β) + P(b_−β)]`; for coherent states away from the
//! excluded small-`β`, small-`γ` corner it stays within `[¼, ¾]`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{parity_projector, probability, MultiModeState, Parity, ParitySetting};
use crate::oracles::average_certainty_value;
use crate::scan::{check_grid, Axis, ExtremumKind, ScanMeta, ScanResult};

pub const FUR_LOWER: f64 = 0.25;
pub const FUR_UPPER: f64 = 0.75;
pub const DEFAULT_BOUND_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_BETA_MIN: f64 = 0.05;
pub const DEFAULT_PHOTON_FLOOR: f64 = 1.0;

/// Where the uncertainty bound is asserted: `|β| ≥ beta_min` or mean photon
/// number at least `photon_floor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValidityRegion {
    pub beta_min: f64,
    pub photon_floor: f64,
}

impl Default for ValidityRegion {
    fn default() -> Self {
        Self {
            beta_min: DEFAULT_BETA_MIN,
            photon_floor: DEFAULT_PHOTON_FLOOR,
        }
    }
}

impl ValidityRegion {
    pub fn new(beta_min: f64, photon_floor: f64) -> Result<Self> {
        if !(beta_min > 0.0 && beta_min.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta_min must be positive, got {beta_min}"
            )));
        }
        if !(photon_floor >= 0.0 && photon_floor.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "photon_floor must be non-negative, got {photon_floor}"
            )));
        }
        Ok(Self {
            beta_min,
            photon_floor,
        })
    }

    pub fn contains(&self, beta: f64, mean_photons: f64) -> bool {
        beta.abs() >= self.beta_min || mean_photons >= self.photon_floor
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FurReport {
    pub value: f64,
    pub parity: Parity,
    pub beta: f64,
    pub in_validity_region: bool,
    /// `¼ − tolerance ≤ value ≤ ¾ + tolerance`.
    pub within_bounds: bool,
    pub tolerance: f64,
}

pub fn within_fur_bounds(value: f64, tolerance: f64) -> bool {
    (FUR_LOWER - tolerance..=FUR_UPPER + tolerance).contains(&value)
}

fn single_mode(state: &MultiModeState) -> Result<usize> {
    if state.modes() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "average certainty needs a single-mode state, got {} modes",
            state.modes()
        )));
    }
    Ok(state.dims()[0])
}

/// `½[⟨Π^b(β)⟩ + ⟨Π^b(−β)⟩]` evaluated numerically on the state's truncation.
pub fn average_certainty(state: &MultiModeState, beta: f64, outcome: Parity) -> Result<f64> {
    let dim = single_mode(state)?;
    let plus = parity_projector(ParitySetting::new(outcome, beta)?, dim)?;
    let minus = parity_projector(ParitySetting::new(outcome, -beta)?, dim)?;
    let p = probability(state, &[Some(&plus)])?;
    let m = probability(state, &[Some(&minus)])?;
    Ok(0.5 * (p + m))
}

pub fn check_fur(
    state: &MultiModeState,
    beta: f64,
    outcome: Parity,
    region: &ValidityRegion,
    tolerance: f64,
) -> Result<FurReport> {
    let value = average_certainty(state, beta, outcome)?;
    let photons = state.mean_photon_number(0)?;
    Ok(FurReport {
        value,
        parity: outcome,
        beta,
        in_validity_region: region.contains(beta, photons),
        within_bounds: within_fur_bounds(value, tolerance),
        tolerance,
    })
}

/// One `γ` row of the extremal certainty curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Fig1Row {
    pub gamma: f64,
    pub even_sup: f64,
    pub even_argmax_beta: f64,
    pub odd_inf: f64,
    pub odd_argmin_beta: f64,
    pub in_validity_region: bool,
}

const GOLDEN_TOLERANCE: f64 = 1e-10;
const REFINE_GAIN: f64 = 1e-14;

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > GOLDEN_TOLERANCE {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Maximizes `f` over the grid, then refines on the bracket around the best
/// grid point. Ties prefer the smallest `|β|`, then the positive sign.
fn extremize(f: &dyn Fn(f64) -> f64, grid: &[f64]) -> (f64, f64) {
    let mut best = 0usize;
    for i in 1..grid.len() {
        let (v, b) = (f(grid[i]), f(grid[best]));
        let closer = grid[i].abs() < grid[best].abs()
            || (grid[i].abs() == grid[best].abs() && grid[i] > grid[best]);
        if v > b || (v == b && closer) {
            best = i;
        }
    }
    let (mut arg, mut val) = (grid[best], f(grid[best]));
    if grid.len() > 1 {
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(grid.len() - 1)];
        let (x, fx) = golden_max(f, lo.min(hi), lo.max(hi));
        // flat maxima: keep the grid point unless refinement clearly improves
        if fx > val + REFINE_GAIN * val.abs().max(1.0) {
            arg = x;
            val = fx;
        }
    }
    // The objective is even in β: report the mirror image if it lies in range.
    let (gmin, gmax) = grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    if arg < 0.0 && -arg <= gmax && -arg >= gmin {
        arg = -arg;
    }
    (arg, val)
}

/// Even-parity supremum and odd-parity infimum over `beta_grid` for each `γ`,
/// from the closed forms.
pub fn fig1_rows(
    gamma_grid: &[f64],
    beta_grid: &[f64],
    region: &ValidityRegion,
) -> Result<Vec<Fig1Row>> {
    check_grid(gamma_grid, "gamma grid")?;
    check_grid(beta_grid, "beta grid")?;
    Ok(gamma_grid
        .par_iter()
        .map(|&gamma| {
            let even = |b: f64| average_certainty_value(gamma, b, Parity::Even);
            let odd = |b: f64| -average_certainty_value(gamma, b, Parity::Odd);
            let (even_arg, even_sup) = extremize(&even, beta_grid);
            let (odd_arg, neg_inf) = extremize(&odd, beta_grid);
            let photons = gamma * gamma;
            Fig1Row {
                gamma,
                even_sup,
                even_argmax_beta: even_arg,
                odd_inf: -neg_inf,
                odd_argmin_beta: odd_arg,
                in_validity_region: region.contains(even_arg, photons)
                    && region.contains(odd_arg, photons),
            }
        })
        .collect())
}

/// [`fig1_rows`] packaged as a scan over `γ` whose primary values are the
/// even-parity suprema.
pub fn fig1_scan(
    gamma_grid: &[f64],
    beta_grid: &[f64],
    region: &ValidityRegion,
) -> Result<ScanResult> {
    let rows = fig1_rows(gamma_grid, beta_grid, region)?;
    let col = |f: fn(&Fig1Row) -> f64| rows.iter().map(|r| Some(f(r))).collect::<Vec<_>>();
    let scan = ScanResult::new(
        "fig1",
        vec![Axis::new("gamma", gamma_grid.to_vec())],
        col(|r| r.even_sup),
        ExtremumKind::Max,
        ScanMeta::new(vec![], 0.0, DEFAULT_BOUND_TOLERANCE),
    )?;
    Ok(scan
        .with_column("even_argmax_beta", col(|r| r.even_argmax_beta))
        .with_column("odd_inf", col(|r| r.odd_inf))
        .with_column("odd_argmin_beta", col(|r| r.odd_argmin_beta))
        .with_column(
            "in_validity_region",
            col(|r| if r.in_validity_region { 1.0 } else { 0.0 }),
        ))
}
