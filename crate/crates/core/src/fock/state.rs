use nalgebra::{DMatrix, DVector};

use super::{check_dim, FockVector, C64};
use crate::error::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-12;
const TRACE_TOLERANCE: f64 = 1e-12;
const EIGENVALUE_FLOOR: f64 = -1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Pure,
    Density,
    /// Convex mixture of product pure states, kept factorized.
    Separable,
}

impl StateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StateKind::Pure => "pure",
            StateKind::Density => "density",
            StateKind::Separable => "separable",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Repr {
    /// Row-major over mode indices, mode 0 slowest.
    Pure(DVector<C64>),
    Density(DMatrix<C64>),
    Separable {
        weights: Vec<f64>,
        components: Vec<Vec<FockVector>>,
    },
}

/// Pure state, density operator, or separable ensemble over a tensor product
/// of truncated modes.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiModeState {
    dims: Vec<usize>,
    pub(crate) repr: Repr,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidState("state needs at least one mode".into()));
    }
    for &d in dims {
        check_dim(d)?;
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::InvalidState("joint dimension overflows".into()))
}

impl MultiModeState {
    /// Pure state from row-major amplitudes; the norm must already be 1.
    pub fn pure(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amps.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for joint dimension {total}",
                amps.len()
            )));
        }
        let v = DVector::from_vec(amps);
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "pure state norm {norm} is not 1"
            )));
        }
        Ok(Self {
            dims,
            repr: Repr::Pure(v),
        })
    }

    /// Pure state from row-major amplitudes, rescaled to unit norm.
    pub fn pure_normalized(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amps.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for joint dimension {total}",
                amps.len()
            )));
        }
        let mut v = DVector::from_vec(amps);
        let norm = v.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState(format!("amplitudes have norm {norm}")));
        }
        v.unscale_mut(norm);
        Ok(Self {
            dims,
            repr: Repr::Pure(v),
        })
    }

    /// Density operator; must be Hermitian, unit trace and positive semidefinite.
    pub fn density(dims: Vec<usize>, rho: DMatrix<C64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if rho.nrows() != total || rho.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "density matrix {}x{} for joint dimension {total}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let mut herm = 0.0f64;
        for i in 0..total {
            for j in i..total {
                herm = herm.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
            }
        }
        if herm > 1e-12 {
            return Err(Error::InvalidState(format!(
                "density matrix is not Hermitian (deviation {herm:e})"
            )));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > TRACE_TOLERANCE || trace.im.abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "density matrix trace {trace} is not 1"
            )));
        }
        let eig = rho.clone().symmetric_eigenvalues();
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        if min < EIGENVALUE_FLOOR {
            return Err(Error::InvalidState(format!(
                "density matrix has eigenvalue {min:e}"
            )));
        }
        Ok(Self {
            dims,
            repr: Repr::Density(rho),
        })
    }

    /// Convex mixture `Σᵢ wᵢ ⊗ⱼ |ψᵢⱼ⟩⟨ψᵢⱼ|`.
    pub fn separable(weights: Vec<f64>, components: Vec<Vec<FockVector>>) -> Result<Self> {
        if weights.is_empty() || weights.len() != components.len() {
            return Err(Error::InvalidState(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidState(
                "mixture weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "mixture weights sum to {total}"
            )));
        }
        let dims: Vec<usize> = components[0].iter().map(FockVector::dim).collect();
        check_dims(&dims)?;
        for term in &components {
            let term_dims: Vec<usize> = term.iter().map(FockVector::dim).collect();
            if term_dims != dims {
                return Err(Error::DimensionMismatch(format!(
                    "mixture component dims {term_dims:?} differ from {dims:?}"
                )));
            }
        }
        Ok(Self {
            dims,
            repr: Repr::Separable {
                weights,
                components,
            },
        })
    }

    pub fn single(v: FockVector) -> Self {
        Self {
            dims: vec![v.dim()],
            repr: Repr::Pure(v.amps().clone()),
        }
    }

    /// Pure product state `|ψ₀⟩⊗|ψ₁⟩⊗…`, materialized.
    pub fn product(factors: &[FockVector]) -> Result<Self> {
        let dims: Vec<usize> = factors.iter().map(FockVector::dim).collect();
        check_dims(&dims)?;
        let mut amps = DVector::from_element(1, C64::new(1.0, 0.0));
        for f in factors {
            amps = amps.kronecker(f.amps());
        }
        Ok(Self {
            dims,
            repr: Repr::Pure(amps),
        })
    }

    pub fn modes(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn kind(&self) -> StateKind {
        match self.repr {
            Repr::Pure(_) => StateKind::Pure,
            Repr::Density(_) => StateKind::Density,
            Repr::Separable { .. } => StateKind::Separable,
        }
    }

    pub fn amplitudes(&self) -> Option<&DVector<C64>> {
        match &self.repr {
            Repr::Pure(v) => Some(v),
            _ => None,
        }
    }

    pub fn mixture(&self) -> Option<(&[f64], &[Vec<FockVector>])> {
        match &self.repr {
            Repr::Separable {
                weights,
                components,
            } => Some((weights, components)),
            _ => None,
        }
    }

    /// Materialized density matrix over the joint space.
    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Pure(v) => v * v.adjoint(),
            Repr::Density(rho) => rho.clone(),
            Repr::Separable {
                weights,
                components,
            } => {
                let n = self.total_dim();
                let mut rho = DMatrix::zeros(n, n);
                for (w, term) in weights.iter().zip(components) {
                    let mut v = DVector::from_element(1, C64::new(1.0, 0.0));
                    for f in term {
                        v = v.kronecker(f.amps());
                    }
                    rho += (v.clone() * v.adjoint()).scale(*w);
                }
                rho
            }
        }
    }

    /// `Tr[ρ n̂_mode]`.
    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        if mode >= self.modes() {
            return Err(Error::DimensionMismatch(format!(
                "mode {mode} of {}",
                self.modes()
            )));
        }
        let number = super::DenseOperator::number(self.dims[mode])?;
        let mut ops = vec![None; self.modes()];
        ops[mode] = Some(&number);
        super::expectation(self, &ops)
    }

    /// Same state with modes reordered so that output mode `k` is input mode `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let m = self.modes();
        let mut seen = vec![false; m];
        if order.len() != m
            || order
                .iter()
                .any(|&k| k >= m || std::mem::replace(&mut seen[k], true))
        {
            return Err(Error::InvalidParameter(format!(
                "{order:?} is not a permutation of {m} modes"
            )));
        }
        let dims: Vec<usize> = order.iter().map(|&k| self.dims[k]).collect();
        let map = permutation_map(&self.dims, order);
        let repr = match &self.repr {
            Repr::Pure(v) => Repr::Pure(DVector::from_fn(v.len(), |i, _| v[map[i]])),
            Repr::Density(rho) => {
                let n = rho.nrows();
                Repr::Density(DMatrix::from_fn(n, n, |i, j| rho[(map[i], map[j])]))
            }
            Repr::Separable {
                weights,
                components,
            } => Repr::Separable {
                weights: weights.clone(),
                components: components
                    .iter()
                    .map(|term| order.iter().map(|&k| term[k].clone()).collect())
                    .collect(),
            },
        };
        Ok(Self { dims, repr })
    }
}

/// For each flat index of the permuted layout, the flat index it came from.
fn permutation_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let m = dims.len();
    let mut in_strides = vec![1usize; m];
    for k in (0..m.saturating_sub(1)).rev() {
        in_strides[k] = in_strides[k + 1] * dims[k + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&k| dims[k]).collect();
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; m];
    for _ in 0..total {
        out.push(
            digits
                .iter()
                .zip(order)
                .map(|(&d, &k)| d * in_strides[k])
                .sum(),
        );
        for k in (0..m).rev() {
            digits[k] += 1;
            if digits[k] < new_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::coherent_state;

    #[test]
    fn pure_requires_unit_norm() {
        let amps = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(MultiModeState::pure(vec![2], amps.clone()).is_err());
        let s = MultiModeState::pure_normalized(vec![2], amps).unwrap();
        assert!((s.amplitudes().unwrap().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn density_rejects_negative_eigenvalue() {
        let rho = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.5, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(-0.5, 0.0),
            ],
        );
        assert!(MultiModeState::density(vec![2], rho).is_err());
    }

    #[test]
    fn density_rejects_non_hermitian() {
        let rho = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5, 0.0),
                C64::new(0.1, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.5, 0.0),
            ],
        );
        assert!(MultiModeState::density(vec![2], rho).is_err());
    }

    #[test]
    fn product_layout_is_row_major() {
        let a = FockVector::basis(1, 3).unwrap();
        let b = FockVector::basis(2, 4).unwrap();
        let s = MultiModeState::product(&[a, b]).unwrap();
        let v = s.amplitudes().unwrap();
        assert_eq!(v.len(), 12);
        assert_eq!(v[4 + 2], C64::new(1.0, 0.0));
    }

    #[test]
    fn permutation_swaps_modes() {
        let a = coherent_state(0.5, 12).unwrap();
        let b = coherent_state(-0.3, 9).unwrap();
        let ab = MultiModeState::product(&[a.clone(), b.clone()]).unwrap();
        let ba = MultiModeState::product(&[b, a]).unwrap();
        let swapped = ab.permuted(&[1, 0]).unwrap();
        assert_eq!(swapped.dims(), ba.dims());
        let diff = swapped.amplitudes().unwrap() - ba.amplitudes().unwrap();
        assert!(diff.norm() < 1e-15);
        assert!(ab.permuted(&[0, 0]).is_err());
    }

    #[test]
    fn mean_photons_of_coherent() {
        let s = MultiModeState::single(coherent_state(1.5, 40).unwrap());
        assert!((s.mean_photon_number(0).unwrap() - 2.25).abs() < 1e-9);
    }
}
