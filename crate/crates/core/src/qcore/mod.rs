//! Dense complex linear algebra for registers of at most a handful of qubits.
//!
//! # Bit convention
//!
//! Composite registers are ordered with the leftmost tensor factor as the most
//! significant qubit. For the three-qubit simulator this is `|q_a q_b q_probe⟩`:
//! system spin `a` is qubit 0 (most significant), system spin `b` is qubit 1
//! and the probe is qubit 2 (least significant). Basis index `k` therefore
//! holds qubit `q` in bit `n - 1 - q` of `k`.

mod density;
mod eigen;
mod operator;
mod state;

pub use density::DensityMatrix;
pub use eigen::{eigh, Eigen, SpectralGenerator};
pub use operator::{expm_hermitian, OperatorMatrix, Role};
pub use state::StateVector;

use crate::error::{Error, Result};

/// Largest Hilbert-space dimension produced by [`tensor_product`] unless a
/// different bound is requested explicitly.
pub const DEFAULT_MAX_DIM: usize = 1 << 6;

/// Index of system spin `a` in the three-qubit register.
pub const QUBIT_A: usize = 0;
/// Index of system spin `b` in the three-qubit register.
pub const QUBIT_B: usize = 1;
/// Index of the probe qubit in the three-qubit register.
pub const PROBE: usize = 2;

/// Kronecker product for states and operators.
pub trait Tensor: Sized {
    fn tensor_bounded(&self, other: &Self, max_dim: usize) -> Result<Self>;

    fn tensor(&self, other: &Self) -> Result<Self> {
        self.tensor_bounded(other, DEFAULT_MAX_DIM)
    }
}

/// `a ⊗ b` with `a` as the most significant factor.
pub fn tensor_product<K: Tensor>(a: &K, b: &K) -> Result<K> {
    a.tensor(b)
}

pub(crate) fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

pub(crate) fn check_product_dim(a: usize, b: usize, max_dim: usize) -> Result<usize> {
    let dim = a.checked_mul(b).ok_or(Error::DimensionOverflow { dim: usize::MAX, max: max_dim })?;
    if dim > max_dim {
        return Err(Error::DimensionOverflow { dim, max: max_dim });
    }
    Ok(dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn basis_composition() {
        let zero = StateVector::<f64>::basis(1, 0).unwrap();
        let one = StateVector::<f64>::basis(1, 1).unwrap();
        let s = tensor_product(&zero, &one).unwrap();
        let expect = [0.0, 1.0, 0.0, 0.0];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert_eq!(*a, Complex64::new(e, 0.0));
        }
    }

    #[test]
    fn identity_product() {
        let i2 = OperatorMatrix::<f64>::identity(2);
        let i4 = tensor_product(&i2, &i2).unwrap();
        assert_eq!(i4, OperatorMatrix::identity(4));
    }

    #[test]
    fn superposition_times_basis() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::new(vec![Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
        let zero = StateVector::<f64>::basis(1, 0).unwrap();
        let s = plus.tensor(&zero).unwrap();
        let expect = [h, 0.0, h, 0.0];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!((a - Complex64::new(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn overflow_is_rejected() {
        let a = OperatorMatrix::<f64>::identity(8);
        let b = OperatorMatrix::<f64>::identity(16);
        assert!(matches!(a.tensor(&b), Err(Error::DimensionOverflow { dim: 128, max: 64 })));
        assert!(a.tensor_bounded(&b, 128).is_ok());
    }
}
