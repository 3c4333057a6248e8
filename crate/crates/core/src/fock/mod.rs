//! Truncated Fock-space linear algebra.
//!
//! A mode is represented on the number basis `|0⟩..|dim−1⟩`. Every state or
//! operator constructor records how much probability mass the truncation
//! discards so callers can decide whether a cutoff is adequate.

mod contract;
mod io;
mod state;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use contract::{
    clamp_probability, expectation, marginal, probability, reduced_operator, PROBABILITY_SLACK,
};
pub use io::{
    read_state_file, state_from_json, state_to_json, write_state_file, STATE_SCHEMA_VERSION,
};
pub use state::{MultiModeState, StateKind};

pub type C64 = Complex64;

/// Default bound on discarded probability mass for state constructors.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Hermiticity tolerance for operators and density matrices.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Photon-number headroom, in standard deviations of the coherent amplitude.
const AUTO_DIM_HEADROOM: f64 = 6.0;
const AUTO_DIM_FLOOR: usize = 32;

/// Truncation dimension chosen from the largest amplitude and displacement
/// a computation will touch: `max(32, ⌈(|amp| + |disp| + 6)²⌉)`.
pub fn auto_dim(amplitude_max: f64, displacement_max: f64) -> usize {
    let r = amplitude_max.abs() + displacement_max.abs() + AUTO_DIM_HEADROOM;
    AUTO_DIM_FLOOR.max((r * r).ceil() as usize)
}

/// How a computation picks its truncation dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Truncation {
    Auto,
    Explicit(usize),
}

impl Truncation {
    pub fn resolve(self, amplitude_max: f64, displacement_max: f64) -> usize {
        match self {
            Truncation::Auto => auto_dim(amplitude_max, displacement_max),
            Truncation::Explicit(d) => d,
        }
    }
}

impl std::fmt::Display for Truncation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Truncation::Auto => f.write_str("auto"),
            Truncation::Explicit(d) => write!(f, "{d}"),
        }
    }
}

impl std::str::FromStr for Truncation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Truncation::Auto);
        }
        let dim: usize = s.parse().map_err(|_| {
            Error::InvalidParameter(format!(
                "truncation must be 'auto' or an integer, got {s:?}"
            ))
        })?;
        check_dim(dim)?;
        Ok(Truncation::Explicit(dim))
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDim {
            dim,
            reason: "truncation dimension must be at least 2".into(),
        });
    }
    Ok(())
}

/// Outcome of a dichotomic parity measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even = 0,
    Odd = 1,
}

impl Parity {
    pub fn from_outcome(outcome: u8) -> Result<Self> {
        match outcome {
            0 => Ok(Parity::Even),
            1 => Ok(Parity::Odd),
            other => Err(Error::InvalidParameter(format!(
                "parity outcome must be 0 or 1, got {other}"
            ))),
        }
    }

    pub fn outcome(self) -> u8 {
        self as u8
    }

    pub fn flipped(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// Whether the number state `|n⟩` carries this parity.
    pub fn contains(self, n: usize) -> bool {
        (n % 2) as u8 == self.outcome()
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "0" | "even" => Ok(Parity::Even),
            "1" | "odd" => Ok(Parity::Odd),
            _ => Err(Error::InvalidParameter(format!(
                "parity must be even|odd|0|1, got {s:?}"
            ))),
        }
    }
}

/// A parity outcome paired with the real displacement it is measured at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParitySetting {
    pub outcome: Parity,
    pub displacement: f64,
}

impl ParitySetting {
    pub fn new(outcome: Parity, displacement: f64) -> Result<Self> {
        if !displacement.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "displacement must be finite, got {displacement}"
            )));
        }
        Ok(Self {
            outcome,
            displacement,
        })
    }

    pub fn even(displacement: f64) -> Result<Self> {
        Self::new(Parity::Even, displacement)
    }

    pub fn odd(displacement: f64) -> Result<Self> {
        Self::new(Parity::Odd, displacement)
    }

    /// Same outcome at the mirrored displacement.
    pub fn mirrored(self) -> Self {
        Self {
            outcome: self.outcome,
            displacement: -self.displacement,
        }
    }
}

/// Normalized single-mode pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amps: DVector<C64>,
    tail: f64,
}

impl FockVector {
    /// Normalizes `amps`; the recorded tail estimate is zero.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        Self::with_tail(DVector::from_vec(amps), 0.0)
    }

    fn with_tail(mut amps: DVector<C64>, tail: f64) -> Result<Self> {
        check_dim(amps.len())?;
        let norm = amps.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState(format!("amplitudes have norm {norm}")));
        }
        amps.unscale_mut(norm);
        Ok(Self { amps, tail })
    }

    /// Number state `|n⟩`.
    pub fn basis(n: usize, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::InvalidDim {
                dim,
                reason: format!("number state |{n}⟩ needs dim > {n}"),
            });
        }
        let mut amps = DVector::zeros(dim);
        amps[n] = C64::new(1.0, 0.0);
        Ok(Self { amps, tail: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    /// Probability mass the truncation discarded before renormalization.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum()
    }

    /// `⟨ψ|O|ψ⟩`.
    pub fn expectation(&self, op: &DenseOperator) -> Result<C64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator dim {} vs state dim {}",
                op.dim(),
                self.dim()
            )));
        }
        let applied = &op.mat * &self.amps;
        Ok(self.amps.dotc(&applied))
    }
}

/// Square operator on one truncated mode, with the truncation tail of its
/// construction (zero for operators that are exact on the truncated space).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    mat: DMatrix<C64>,
    tail: f64,
}

impl DenseOperator {
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "operator must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        check_dim(mat.nrows())?;
        Ok(Self { mat, tail: 0.0 })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            mat: DMatrix::identity(dim, dim),
            tail: 0.0,
        })
    }

    /// Photon-number operator `diag(0, 1, …, dim−1)`.
    pub fn number(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            mat: DMatrix::from_diagonal(&DVector::from_fn(dim, |n, _| C64::new(n as f64, 0.0))),
            tail: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn adjoint(&self) -> Self {
        Self {
            mat: self.mat.adjoint(),
            tail: self.tail,
        }
    }

    /// Largest entry of `|O − O†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.hermiticity_deviation() <= tolerance
    }
}

/// Poisson mass beyond index `dim − 1` for mean photon number `mean`.
pub fn poisson_tail(mean: f64, dim: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    // ln p_m = −μ + m ln μ − ln m!
    let mut ln_fact = 0.0;
    for k in 2..=dim {
        ln_fact += (k as f64).ln();
    }
    let mut ln_p = -mean + dim as f64 * ln_mean - ln_fact;
    let mut tail = 0.0;
    let mut m = dim;
    loop {
        let term = ln_p.exp();
        tail += term;
        if m as f64 > mean && (term <= tail * 1e-17 || term == 0.0) {
            break;
        }
        m += 1;
        ln_p += ln_mean - (m as f64).ln();
        if m > dim + 100_000 {
            break;
        }
    }
    tail
}

/// Coherent state `|γ⟩` truncated to `dim` levels, using the default tail tolerance.
pub fn coherent_state(gamma: f64, dim: usize) -> Result<FockVector> {
    coherent_state_with_tolerance(gamma, dim, TAIL_TOLERANCE)
}

pub fn coherent_state_with_tolerance(gamma: f64, dim: usize, tolerance: f64) -> Result<FockVector> {
    check_dim(dim)?;
    if !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "coherent amplitude must be finite, got {gamma}"
        )));
    }
    let tail = poisson_tail(gamma * gamma, dim);
    if tail >= tolerance {
        return Err(Error::Truncation {
            tail,
            tolerance,
            dim,
        });
    }
    let mut amps = DVector::zeros(dim);
    let mut a = (-0.5 * gamma * gamma).exp();
    amps[0] = C64::new(a, 0.0);
    for m in 1..dim {
        a *= gamma / (m as f64).sqrt();
        amps[m] = C64::new(a, 0.0);
    }
    FockVector::with_tail(amps, tail)
}

/// Real matrix of `⟨m|D(β)|n⟩` for real `β`.
///
/// Each subdiagonal `k = m − n` follows the normalized Laguerre recurrence
///
/// `√((n+1)(n+k+1)) g[n+1] = (2n+1+k−β²) g[n] − √(n(n+k)) g[n−1]`,
///
/// seeded with `g[0] = e^{−β²/2} βᵏ / √k!`. The upper triangle follows from
/// `⟨n|D(β)|n+k⟩ = (−1)ᵏ ⟨n+k|D(β)|n⟩`. Forward recurrence along a
/// diagonal keeps full precision where stepping row by row does not.
pub(crate) fn displacement_real(beta: f64, dim: usize) -> DMatrix<f64> {
    let mut d = DMatrix::<f64>::zeros(dim, dim);
    let x = beta * beta;
    let mut ln_fact = 0.0;
    for k in 0..dim {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        let seed = if k == 0 {
            (-0.5 * x).exp()
        } else if beta == 0.0 {
            0.0
        } else {
            let mag = (-0.5 * x + k as f64 * beta.abs().ln() - 0.5 * ln_fact).exp();
            if beta < 0.0 && k % 2 == 1 {
                -mag
            } else {
                mag
            }
        };
        let kf = k as f64;
        let (mut prev, mut cur) = (0.0, seed);
        for n in 0..dim - k {
            d[(n + k, n)] = cur;
            if k > 0 {
                d[(n, n + k)] = if k % 2 == 1 { -cur } else { cur };
            }
            let nf = n as f64;
            let next = ((2.0 * nf + 1.0 + kf - x) * cur - (nf * (nf + kf)).sqrt() * prev)
                / ((nf + 1.0) * (nf + kf + 1.0)).sqrt();
            prev = cur;
            cur = next;
        }
    }
    d
}

/// Largest probability mass that displacement by `beta` pushes beyond the
/// cutoff, over the low-index block `n < ⌈dim/2⌉`.
pub fn truncation_tail(beta: f64, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    Ok(low_block_tail(&displacement_real(beta, dim)))
}

/// Truncation tail of a displaced parity projector. Since
/// `D(β) P D(β)† ∝ D(2β) P`, low rows reach as far as a `2β` displacement
/// does, so this is the larger of the `β` and `2β` low-block tails.
pub fn projector_tail(beta: f64, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    Ok(low_block_tail(&displacement_real(beta, dim))
        .max(low_block_tail(&displacement_real(2.0 * beta, dim))))
}

fn low_block_tail(d: &DMatrix<f64>) -> f64 {
    let dim = d.nrows();
    (0..dim.div_ceil(2))
        .map(|n| (1.0 - d.column(n).norm_squared()).max(0.0))
        .fold(0.0, f64::max)
}

fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Largest mass that displacement by `beta` pushes beyond the cutoff from
/// any number state `|n⟩` with `n ≤ n_max`.
pub fn displaced_number_tail(beta: f64, n_max: usize, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    if n_max >= dim {
        return Ok(1.0);
    }
    let d = displacement_real(beta, dim);
    Ok((0..=n_max)
        .map(|n| (1.0 - d.column(n).norm_squared()).max(0.0))
        .fold(0.0, f64::max))
}

/// Displacement operator `D(β)` for real `β` on a `dim`-level mode.
pub fn displacement_operator(beta: f64, dim: usize) -> Result<DenseOperator> {
    check_dim(dim)?;
    if !beta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "displacement must be finite, got {beta}"
        )));
    }
    let d = displacement_real(beta, dim);
    let tail = low_block_tail(&d);
    Ok(DenseOperator {
        mat: to_complex(&d),
        tail,
    })
}

/// Even-parity projector displaced by `beta`, as a real symmetric matrix.
fn even_projector_real(beta: f64, dim: usize) -> (DMatrix<f64>, f64) {
    let d = displacement_real(beta, dim);
    let tail = low_block_tail(&d).max(low_block_tail(&displacement_real(2.0 * beta, dim)));
    let even_cols: Vec<usize> = (0..dim).step_by(2).collect();
    let de = d.select_columns(&even_cols);
    let mut p = &de * de.transpose();
    for i in 0..dim {
        for j in i + 1..dim {
            let s = 0.5 * (p[(i, j)] + p[(j, i)]);
            p[(i, j)] = s;
            p[(j, i)] = s;
        }
    }
    (p, tail)
}

/// Displaced parity projector `D(β) P D(β)†`. The odd projector is built as
/// `I − Π⁺(β)`, so the pair sums to the identity on the truncated space.
pub fn parity_projector(setting: ParitySetting, dim: usize) -> Result<DenseOperator> {
    check_dim(dim)?;
    if !setting.displacement.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "displacement must be finite, got {}",
            setting.displacement
        )));
    }
    let (even, tail) = even_projector_real(setting.displacement, dim);
    let mat = match setting.outcome {
        Parity::Even => even,
        Parity::Odd => DMatrix::identity(dim, dim) - even,
    };
    Ok(DenseOperator {
        mat: to_complex(&mat),
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_is_coherent_zero() {
        let v = coherent_state(0.0, 16).unwrap();
        assert_eq!(v.amps()[0], C64::new(1.0, 0.0));
        assert!(v.amps().iter().skip(1).all(|a| *a == C64::new(0.0, 0.0)));
    }

    #[test]
    fn coherent_vacuum_amplitude() {
        let v = coherent_state(1.0, 32).unwrap();
        assert!((v.amps()[0].re - (-0.5f64).exp()).abs() < 1e-14);
        assert!((v.amps().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_rejects_short_truncation() {
        assert!(matches!(
            coherent_state(2.0, 8),
            Err(Error::Truncation { .. })
        ));
        assert!(matches!(
            coherent_state(0.0, 1),
            Err(Error::InvalidDim { .. })
        ));
    }

    #[test]
    fn poisson_tail_matches_complement_sum() {
        // P(X ≥ 8), X ~ Poisson(4), summed directly from the pmf.
        let mut head = 0.0;
        let mut p = (-4.0f64).exp();
        for m in 0..8 {
            if m > 0 {
                p *= 4.0 / m as f64;
            }
            head += p;
        }
        assert!((poisson_tail(4.0, 8) - (1.0 - head)).abs() < 1e-14);
        assert!(poisson_tail(4.0, 8) > 0.05);
    }

    #[test]
    fn displacement_zero_is_identity() {
        let d = displacement_operator(0.0, 16).unwrap();
        assert_eq!(d.matrix(), &DMatrix::<C64>::identity(16, 16));
    }

    #[test]
    fn displacement_vacuum_element() {
        let d = displacement_operator(0.5, 32).unwrap();
        assert!((d.matrix()[(0, 0)].re - (-0.125f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn displacement_column_zero_is_coherent() {
        let d = displacement_operator(1.0, 32).unwrap();
        let c = coherent_state(1.0, 32).unwrap();
        for m in 0..32 {
            assert!((d.matrix()[(m, 0)] - c.amps()[m]).norm() < 1e-10);
        }
    }

    #[test]
    fn displacement_transpose_symmetry() {
        // For real β: ⟨m|D(β)|n⟩ = (−1)^{m+n} ⟨n|D(β)|m⟩.
        let d = displacement_real(0.8, 24);
        for m in 0..24 {
            for n in 0..24 {
                let sign = if (m + n) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((d[(m, n)] - sign * d[(n, m)]).abs() < 1e-13, "({m},{n})");
            }
        }
    }

    #[test]
    fn undisplaced_even_projector() {
        let p = parity_projector(ParitySetting::even(0.0).unwrap(), 6).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(
            [1.0, 0.0, 1.0, 0.0, 1.0, 0.0]
                .map(|x| C64::new(x, 0.0))
                .to_vec(),
        ));
        assert_eq!(p.matrix(), &expected);
    }

    #[test]
    fn parity_pair_completes_identity() {
        for &beta in &[0.0, 0.3, -1.1, 2.0] {
            let e = parity_projector(ParitySetting::even(beta).unwrap(), 20).unwrap();
            let o = parity_projector(ParitySetting::odd(beta).unwrap(), 20).unwrap();
            let sum = e.matrix() + o.matrix();
            let id = DMatrix::<C64>::identity(20, 20);
            assert!((sum - id).iter().all(|z| z.norm() <= 1e-12));
            assert!(e.is_hermitian(1e-12));
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(matches!(
            displacement_operator(0.1, 1),
            Err(Error::InvalidDim { .. })
        ));
        assert!(ParitySetting::even(f64::NAN).is_err());
        assert!(Parity::from_outcome(2).is_err());
        assert!("auto".parse::<Truncation>().unwrap() == Truncation::Auto);
        assert!("1".parse::<Truncation>().is_err());
    }

    #[test]
    fn auto_dim_policy() {
        assert_eq!(auto_dim(0.0, 0.0), 36);
        assert_eq!(auto_dim(3.0, 3.0), 144);
        assert_eq!(auto_dim(-1.0, 0.5), 57);
    }
}
