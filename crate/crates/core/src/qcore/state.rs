use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{check_product_dim, qubits_for_dim, DensityMatrix, OperatorMatrix, Tensor};
use crate::error::{Error, Result};
use crate::num::Real;

/// Normalized amplitude vector over `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StateVector<T> {
    n_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Wraps `amplitudes`, which must already be normalized to within `1e-12`.
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let norm = norm_of(&amplitudes);
        if (norm - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::NotNormalized(norm.as_f64()));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Normalizes `amplitudes` and wraps them.
    pub fn normalized(mut amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let norm = norm_of(&amplitudes);
        if norm <= T::min_positive_value() {
            return Err(Error::ZeroVector);
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn from_real(amplitudes: &[T]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| Complex::new(x, T::zero())).collect())
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidParameter(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(Self { n_qubits, amplitudes })
    }

    pub(crate) fn from_unchecked(amplitudes: Vec<Complex<T>>) -> Self {
        let n_qubits = amplitudes.len().trailing_zeros() as usize;
        Self { n_qubits, amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        norm_of(&self.amplitudes)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Applies a unitary operator.
    pub fn apply(&self, op: &OperatorMatrix<T>) -> Result<Self> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: op.dim() });
        }
        if !op.is_unitary(T::tol(1e-10)) {
            return Err(Error::NotUnitary(op.unitarity_defect().as_f64()));
        }
        Ok(Self::from_unchecked(op.apply_to(&self.amplitudes)))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix::from_pure(self)
    }

    /// Multiplies every amplitude by a unit-modulus phase.
    pub fn with_phase(&self, phase: Complex<T>) -> Self {
        Self::from_unchecked(self.amplitudes.iter().map(|a| a * phase).collect())
    }
}

impl<T: Real> Tensor for StateVector<T> {
    fn tensor_bounded(&self, other: &Self, max_dim: usize) -> Result<Self> {
        check_product_dim(self.dim(), other.dim(), max_dim)?;
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                out.push(a * b);
            }
        }
        Ok(Self::from_unchecked(out))
    }
}

fn norm_of<T: Real>(amplitudes: &[Complex<T>]) -> T {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn rejects_unnormalized_and_bad_length() {
        let v = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        assert!(matches!(StateVector::new(v.clone()), Err(Error::NotNormalized(_))));
        assert!(StateVector::normalized(v).is_ok());
        let three = vec![Complex64::new(1.0, 0.0); 3];
        assert_eq!(StateVector::normalized(three), Err(Error::NotPowerOfTwo(3)));
        let zero = vec![Complex64::new(0.0, 0.0); 2];
        assert_eq!(StateVector::normalized(zero), Err(Error::ZeroVector));
    }

    #[test]
    fn single_precision_states_work() {
        let s = StateVector::<f32>::from_real(&[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-6);
        assert!((s.overlap(&s).unwrap() - 1.0).abs() < 1e-6);
    }
}
