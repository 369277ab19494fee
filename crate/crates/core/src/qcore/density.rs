use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{eigh, qubits_for_dim, OperatorMatrix, Role, StateVector};
use crate::error::{Error, Result};
use crate::num::Real;

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DensityMatrix<T> {
    dim: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(dim: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        qubits_for_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        let rho = Self { dim, entries };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_unchecked(dim: usize, entries: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    pub fn validate(&self) -> Result<()> {
        let op = self.as_operator();
        let dev = op.hermiticity_defect();
        if dev > T::tol(1e-12) {
            return Err(Error::NotHermitian(dev.as_f64()));
        }
        let tr = self.trace();
        if (tr - T::one()).abs() > T::tol(1e-10) {
            return Err(Error::BadTrace(tr.as_f64()));
        }
        let lowest = self.eigenvalues()?[0];
        if lowest < -T::tol(1e-10) {
            return Err(Error::NotPositive(lowest.as_f64()));
        }
        Ok(())
    }

    pub fn from_pure(state: &StateVector<T>) -> Self {
        let a = state.amplitudes();
        let d = a.len();
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for col in 0..d {
                entries.push(a[r] * a[col].conj());
            }
        }
        Self { dim: d, entries }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        qubits_for_dim(dim)?;
        let w = T::one() / T::lit(dim as f64);
        let diag: Vec<T> = vec![w; dim];
        Ok(Self::from_unchecked(dim, OperatorMatrix::real_diagonal(&diag).entries().to_vec()))
    }

    /// `alpha·self + (1 - alpha)·other`.
    pub fn mix(&self, other: &Self, alpha: T) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if alpha < T::zero() || alpha > T::one() {
            return Err(Error::InvalidParameter(format!("mixing weight {alpha} outside [0, 1]")));
        }
        let beta = T::one() - alpha;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a * alpha + b * beta).collect();
        Ok(Self::from_unchecked(self.dim, entries))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.dim + col]
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.entries
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.entries[i * self.dim + i].re).sum()
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> T {
        // Tr(ρρ) = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ
        self.entries.iter().map(|x| x.norm_sqr()).sum()
    }

    /// `Tr(ρ M)`.
    pub fn expectation(&self, op: &OperatorMatrix<T>) -> Result<Complex<T>> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: op.dim() });
        }
        let d = self.dim;
        let mut acc = Complex::new(T::zero(), T::zero());
        for r in 0..d {
            for k in 0..d {
                acc += self.entries[r * d + k] * op.get(k, r);
            }
        }
        Ok(acc)
    }

    /// `⟨ψ|ρ|ψ⟩` (real part).
    pub fn population(&self, state: &StateVector<T>) -> Result<T> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: state.dim() });
        }
        Ok(self.as_operator().sandwich(state.amplitudes()).re)
    }

    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        let op = OperatorMatrix::from_parts(self.dim, self.hermitized(), Role::Hermitian);
        Ok(eigh(&op)?.values)
    }

    fn hermitized(&self) -> Vec<Complex<T>> {
        let d = self.dim;
        let half = T::lit(0.5);
        let mut out = self.entries.clone();
        for r in 0..d {
            for col in 0..d {
                out[r * d + col] = (self.entries[r * d + col] + self.entries[col * d + r].conj()) * half;
            }
        }
        out
    }

    pub fn as_operator(&self) -> OperatorMatrix<T> {
        OperatorMatrix::from_parts(self.dim, self.entries.clone(), Role::General)
    }

    /// `U ρ U†`.
    pub fn evolve(&self, u: &OperatorMatrix<T>) -> Result<Self> {
        if u.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: u.dim() });
        }
        let out = u.matmul(&self.as_operator())?.matmul(&u.adjoint())?;
        Ok(Self::from_unchecked(self.dim, out.entries().to_vec()))
    }

    /// `ρ ⊗ σ` with `self` as the most significant factor.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        use super::Tensor;
        let op = self.as_operator().tensor(&other.as_operator())?;
        Ok(Self::from_unchecked(op.dim(), op.entries().to_vec()))
    }

    /// Reduced density matrix on the qubits in `keep`, listed in register order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let n = self.n_qubits();
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        if let Some(&bad) = kept.iter().find(|&&q| q >= n) {
            return Err(Error::QubitOutOfRange { index: bad, n_qubits: n });
        }
        let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
        let kd = 1usize << kept.len();
        let td = 1usize << traced.len();

        let compose = |k_bits: usize, t_bits: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &q) in kept.iter().enumerate() {
                let bit = (k_bits >> (kept.len() - 1 - pos)) & 1;
                idx |= bit << (n - 1 - q);
            }
            for (pos, &q) in traced.iter().enumerate() {
                let bit = (t_bits >> (traced.len() - 1 - pos)) & 1;
                idx |= bit << (n - 1 - q);
            }
            idx
        };

        let mut out = vec![Complex::new(T::zero(), T::zero()); kd * kd];
        for r in 0..kd {
            for col in 0..kd {
                let mut acc = Complex::new(T::zero(), T::zero());
                for t in 0..td {
                    acc += self.entries[compose(r, t) * self.dim + compose(col, t)];
                }
                out[r * kd + col] = acc;
            }
        }
        Ok(Self::from_unchecked(kd, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::c;

    fn bell() -> StateVector<f64> {
        StateVector::from_real(&[1.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = bell().density();
        let a = rho.partial_trace(&[0]).unwrap();
        let mm = DensityMatrix::maximally_mixed(2).unwrap();
        for (x, y) in a.entries().iter().zip(mm.entries()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn product_state_factorizes() {
        let ra = StateVector::<f64>::from_real(&[0.6, 0.8]).unwrap().density();
        let rb =
            StateVector::new(vec![c(0.0, std::f64::consts::FRAC_1_SQRT_2), c(std::f64::consts::FRAC_1_SQRT_2, 0.0)])
                .unwrap()
                .density();
        let ab = ra.tensor(&rb).unwrap();
        let back_a = ab.partial_trace(&[0]).unwrap();
        let back_b = ab.partial_trace(&[1]).unwrap();
        for (x, y) in back_a.entries().iter().zip(ra.entries()) {
            assert!((x - y).norm() < 1e-15);
        }
        for (x, y) in back_b.entries().iter().zip(rb.entries()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn empty_keep_and_out_of_range() {
        let rho = bell().density();
        assert_eq!(rho.partial_trace(&[]), Err(Error::EmptyKeepSet));
        assert!(matches!(rho.partial_trace(&[2]), Err(Error::QubitOutOfRange { .. })));
    }

    #[test]
    fn validation_catches_bad_matrices() {
        let neg = vec![c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)];
        assert!(matches!(DensityMatrix::<f64>::new(2, neg), Err(Error::NotPositive(_))));
        let tr = vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)];
        assert!(matches!(DensityMatrix::<f64>::new(2, tr), Err(Error::BadTrace(_))));
        let nh = vec![c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)];
        assert!(matches!(DensityMatrix::<f64>::new(2, nh), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn purity_of_pure_and_mixed() {
        assert!((bell().density().purity() - 1.0).abs() < 1e-15);
        assert!((DensityMatrix::<f64>::maximally_mixed(4).unwrap().purity() - 0.25).abs() < 1e-15);
    }
}
