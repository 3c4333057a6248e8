//! Per-mode contractions. Joint operators are never formed as Kronecker
//! products; each single-mode factor is applied to its own tensor leg.

use nalgebra::{DMatrix, DVector};

use super::state::{MultiModeState, Repr};
use super::{DenseOperator, C64, HERMITIAN_TOLERANCE};
use crate::error::{Error, Result};

/// Slack allowed outside `[0, 1]` before a probability counts as inconsistent.
pub const PROBABILITY_SLACK: f64 = 1e-10;

const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// Clamps floating-point noise in `[−1e−10, 0)` and `(1, 1+1e−10]`; larger
/// excursions are reported as errors.
pub fn clamp_probability(p: f64) -> Result<f64> {
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
        return Err(Error::NumericalConsistency(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    Ok(p.clamp(0.0, 1.0))
}

fn check_ops(state: &MultiModeState, ops: &[Option<&DenseOperator>]) -> Result<()> {
    if ops.len() != state.modes() {
        return Err(Error::DimensionMismatch(format!(
            "{} operators for {} modes",
            ops.len(),
            state.modes()
        )));
    }
    for (mode, (op, &dim)) in ops.iter().zip(state.dims()).enumerate() {
        if let Some(op) = op {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "operator on mode {mode} has dim {}, mode has dim {dim}",
                    op.dim()
                )));
            }
        }
    }
    Ok(())
}

/// `(I ⊗ … ⊗ O ⊗ … ⊗ I) v` with `O` on `mode`, for a row-major vector.
fn apply_on_mode(v: &[C64], dims: &[usize], mode: usize, op: &DMatrix<C64>) -> Vec<C64> {
    let d = dims[mode];
    let right: usize = dims[mode + 1..].iter().product();
    let left = v.len() / (d * right);
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for l in 0..left {
        let base = l * d * right;
        for i in 0..d {
            let dst = base + i * right;
            for j in 0..d {
                let o = op[(i, j)];
                if o == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = base + j * right;
                for r in 0..right {
                    out[dst + r] += o * v[src + r];
                }
            }
        }
    }
    out
}

fn apply_all(v: &[C64], dims: &[usize], ops: &[Option<&DenseOperator>]) -> Vec<C64> {
    let mut cur = v.to_vec();
    for (mode, op) in ops.iter().enumerate() {
        if let Some(op) = op {
            cur = apply_on_mode(&cur, dims, mode, op.matrix());
        }
    }
    cur
}

fn raw_expectation(state: &MultiModeState, ops: &[Option<&DenseOperator>]) -> Result<C64> {
    check_ops(state, ops)?;
    let dims = state.dims();
    Ok(match &state.repr {
        Repr::Pure(psi) => {
            let phi = apply_all(psi.as_slice(), dims, ops);
            psi.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum()
        }
        Repr::Density(rho) => {
            // Tr[O ρ] = Σ_col (O ρ_col)[col]
            let n = rho.nrows();
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..n {
                let col: Vec<C64> = rho.column(c).iter().copied().collect();
                acc += apply_all(&col, dims, ops)[c];
            }
            acc
        }
        Repr::Separable {
            weights,
            components,
        } => {
            let mut acc = C64::new(0.0, 0.0);
            for (w, term) in weights.iter().zip(components) {
                let mut prod = C64::new(*w, 0.0);
                for (factor, op) in term.iter().zip(ops) {
                    if let Some(op) = op {
                        prod *= factor.expectation(op)?;
                    }
                }
                acc += prod;
            }
            acc
        }
    })
}

/// `Tr[ρ (⊗ₖ Oₖ)]` with identity on modes whose entry is `None`.
pub fn expectation(state: &MultiModeState, ops: &[Option<&DenseOperator>]) -> Result<f64> {
    let z = raw_expectation(state, ops)?;
    if z.im.abs() > IMAGINARY_TOLERANCE * z.re.abs().max(1.0) {
        return Err(Error::NumericalConsistency(format!(
            "expectation {z} has a non-negligible imaginary part"
        )));
    }
    Ok(z.re)
}

/// Like [`expectation`], for operators that form a measurement outcome. Each
/// operator must be Hermitian; the result is clamped into `[0, 1]`.
pub fn probability(state: &MultiModeState, ops: &[Option<&DenseOperator>]) -> Result<f64> {
    check_ops(state, ops)?;
    for (mode, op) in ops.iter().enumerate() {
        if let Some(op) = op {
            let deviation = op.hermiticity_deviation();
            if deviation > HERMITIAN_TOLERANCE {
                return Err(Error::NonHermitianOperator { mode, deviation });
            }
        }
    }
    clamp_probability(expectation(state, ops)?)
}

/// Flat-index decomposition of a joint index into (kept, traced) parts.
struct Split {
    kept: Vec<usize>,
    traced: Vec<usize>,
    n_kept: usize,
    n_traced: usize,
}

fn split_indices(dims: &[usize], keep: &[usize]) -> Split {
    let m = dims.len();
    let is_kept: Vec<bool> = (0..m).map(|k| keep.contains(&k)).collect();
    let n_kept: usize = (0..m).filter(|&k| is_kept[k]).map(|k| dims[k]).product();
    let n_traced: usize = (0..m).filter(|&k| !is_kept[k]).map(|k| dims[k]).product();
    let total: usize = dims.iter().product();
    let mut kept = Vec::with_capacity(total);
    let mut traced = Vec::with_capacity(total);
    let mut digits = vec![0usize; m];
    for _ in 0..total {
        let (mut ki, mut ti) = (0usize, 0usize);
        for k in 0..m {
            if is_kept[k] {
                ki = ki * dims[k] + digits[k];
            } else {
                ti = ti * dims[k] + digits[k];
            }
        }
        kept.push(ki);
        traced.push(ti);
        for k in (0..m).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    Split {
        kept,
        traced,
        n_kept,
        n_traced,
    }
}

fn normalize_keep(state: &MultiModeState, keep: &[usize]) -> Result<Vec<usize>> {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() {
        return Err(Error::DimensionMismatch(
            "must keep at least one mode".into(),
        ));
    }
    if let Some(&k) = keep.iter().find(|&&k| k >= state.modes()) {
        return Err(Error::DimensionMismatch(format!(
            "mode {k} of {}",
            state.modes()
        )));
    }
    Ok(keep)
}

/// Unnormalized operator on the kept modes,
/// `X = Tr_{traced}[(⊗_{traced} Oₖ ⊗ I_kept) ρ]`.
///
/// With Hermitian positive `Oₖ` this is the (unnormalized) conditional state
/// of the kept modes given the traced-mode outcomes, and `Tr X` is their
/// joint probability. Entries of `ops` at kept modes must be `None`.
pub fn reduced_operator(
    state: &MultiModeState,
    ops: &[Option<&DenseOperator>],
    keep: &[usize],
) -> Result<DMatrix<C64>> {
    check_ops(state, ops)?;
    let keep = normalize_keep(state, keep)?;
    if let Some(&k) = keep.iter().find(|&&k| ops[k].is_some()) {
        return Err(Error::InvalidParameter(format!(
            "mode {k} is kept and cannot carry an operator"
        )));
    }
    let dims = state.dims();
    match &state.repr {
        Repr::Pure(psi) => {
            let phi = apply_all(psi.as_slice(), dims, ops);
            let s = split_indices(dims, &keep);
            let mut phi_m = DMatrix::<C64>::zeros(s.n_traced, s.n_kept);
            let mut psi_m = DMatrix::<C64>::zeros(s.n_traced, s.n_kept);
            for i in 0..psi.len() {
                phi_m[(s.traced[i], s.kept[i])] = phi[i];
                psi_m[(s.traced[i], s.kept[i])] = psi[i].conj();
            }
            Ok(phi_m.transpose() * psi_m)
        }
        Repr::Density(rho) => {
            let n = rho.nrows();
            let mut sigma = DMatrix::<C64>::zeros(n, n);
            for c in 0..n {
                let col: Vec<C64> = rho.column(c).iter().copied().collect();
                sigma.set_column(c, &DVector::from_vec(apply_all(&col, dims, ops)));
            }
            let s = split_indices(dims, &keep);
            // group joint indices by traced part
            let mut by_traced: Vec<Vec<usize>> = vec![Vec::new(); s.n_traced];
            for i in 0..n {
                by_traced[s.traced[i]].push(i);
            }
            let mut x = DMatrix::<C64>::zeros(s.n_kept, s.n_kept);
            for group in &by_traced {
                for &i in group {
                    for &j in group {
                        x[(s.kept[i], s.kept[j])] += sigma[(i, j)];
                    }
                }
            }
            Ok(x)
        }
        Repr::Separable {
            weights,
            components,
        } => {
            let n_kept: usize = keep.iter().map(|&k| dims[k]).product();
            let mut x = DMatrix::<C64>::zeros(n_kept, n_kept);
            for (w, term) in weights.iter().zip(components) {
                let mut scale = C64::new(*w, 0.0);
                for (k, (factor, op)) in term.iter().zip(ops).enumerate() {
                    if keep.contains(&k) {
                        continue;
                    }
                    if let Some(op) = op {
                        scale *= factor.expectation(op)?;
                    }
                }
                let mut v = DVector::from_element(1, C64::new(1.0, 0.0));
                for &k in &keep {
                    v = v.kronecker(term[k].amps());
                }
                x += (v.clone() * v.adjoint()) * scale;
            }
            Ok(x)
        }
    }
}

/// Partial trace onto `keep` (output modes in ascending order). Separable
/// inputs stay separable; everything else becomes a density operator.
pub fn marginal(state: &MultiModeState, keep: &[usize]) -> Result<MultiModeState> {
    let keep = normalize_keep(state, keep)?;
    let dims: Vec<usize> = keep.iter().map(|&k| state.dims()[k]).collect();
    if let Repr::Separable {
        weights,
        components,
    } = &state.repr
    {
        let components = components
            .iter()
            .map(|term| keep.iter().map(|&k| term[k].clone()).collect())
            .collect();
        return MultiModeState::separable(weights.clone(), components);
    }
    let ops = vec![None; state.modes()];
    let mut x = reduced_operator(state, &ops, &keep)?;
    // exact Hermitian symmetrization of round-off
    let n = x.nrows();
    for i in 0..n {
        x[(i, i)].im = 0.0;
        for j in i + 1..n {
            let s = (x[(i, j)] + x[(j, i)].conj()) * 0.5;
            x[(i, j)] = s;
            x[(j, i)] = s.conj();
        }
    }
    MultiModeState::density(dims, x)
}
