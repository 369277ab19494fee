use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{check_product_dim, eigh, qubits_for_dim, Tensor};
use crate::error::{Error, Result};
use crate::num::{c, cis, re, Real};

/// What an [`OperatorMatrix`] is known to be.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Unitary,
    Hermitian,
    General,
}

/// Dense square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OperatorMatrix<T> {
    dim: usize,
    entries: Vec<Complex<T>>,
    role: Role,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![Complex::new(T::zero(), T::zero()); dim * dim], role: Role::General }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = Complex::new(T::one(), T::zero());
        }
        m.role = Role::Unitary;
        m
    }

    /// Builds a matrix with `role`, validating the role's defining identity.
    pub fn new(dim: usize, entries: Vec<Complex<T>>, role: Role) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: entries.len() });
        }
        Self { dim, entries, role: Role::General }.with_role(role)
    }

    pub fn general(dim: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        Self::new(dim, entries, Role::General)
    }

    pub fn hermitian(dim: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        Self::new(dim, entries, Role::Hermitian)
    }

    pub fn unitary(dim: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        Self::new(dim, entries, Role::Unitary)
    }

    /// Builds a diagonal matrix.
    pub fn diagonal(diag: &[Complex<T>]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, d) in diag.iter().enumerate() {
            m.entries[i * dim + i] = *d;
        }
        m
    }

    /// Re-tags the matrix after checking the role's identity.
    pub fn with_role(mut self, role: Role) -> Result<Self> {
        match role {
            Role::Hermitian => {
                let dev = self.hermiticity_defect();
                if dev > T::tol(1e-12) {
                    return Err(Error::NotHermitian(dev.as_f64()));
                }
            }
            Role::Unitary => {
                let dev = self.unitarity_defect();
                if dev > T::tol(1e-10) {
                    return Err(Error::NotUnitary(dev.as_f64()));
                }
            }
            Role::General => {}
        }
        self.role = role;
        Ok(self)
    }

    pub(crate) fn from_parts(dim: usize, entries: Vec<Complex<T>>, role: Role) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries, role }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for col in 0..d {
                entries.push(self.entries[col * d + r].conj());
            }
        }
        Self { dim: d, entries, role: self.role }
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let d = self.dim;
        let mut entries = vec![Complex::new(T::zero(), T::zero()); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for col in 0..d {
                    entries[r * d + col] += a * other.entries[k * d + col];
                }
            }
        }
        let role =
            if self.role == Role::Unitary && other.role == Role::Unitary { Role::Unitary } else { Role::General };
        Ok(Self { dim: d, entries, role })
    }

    /// Entry-wise sum; Hermitian inputs give a Hermitian result.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        let role =
            if self.role == Role::Hermitian && other.role == Role::Hermitian { Role::Hermitian } else { Role::General };
        Ok(Self { dim: self.dim, entries, role })
    }

    /// Multiplies by a real scalar, keeping Hermiticity.
    pub fn scale(&self, k: T) -> Self {
        let role = if self.role == Role::Hermitian { Role::Hermitian } else { Role::General };
        Self { dim: self.dim, entries: self.entries.iter().map(|a| a * k).collect(), role }
    }

    /// Multiplies by a unit-modulus phase, keeping unitarity.
    pub fn with_phase(&self, phase: Complex<T>) -> Self {
        let role = if self.role == Role::Unitary { Role::Unitary } else { Role::General };
        Self { dim: self.dim, entries: self.entries.iter().map(|a| a * phase).collect(), role }
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).map(|i| self.entries[i * self.dim + i]).sum()
    }

    pub(crate) fn apply_to(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let d = self.dim;
        (0..d).map(|r| (0..d).map(|k| self.entries[r * d + k] * v[k]).sum()).collect()
    }

    /// `max |M - M†|`.
    pub fn hermiticity_defect(&self) -> T {
        let d = self.dim;
        let mut worst = T::zero();
        for r in 0..d {
            for col in r..d {
                let dev = (self.entries[r * d + col] - self.entries[col * d + r].conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }

    /// `max |U†U - I|`.
    pub fn unitarity_defect(&self) -> T {
        let d = self.dim;
        let mut worst = T::zero();
        for r in 0..d {
            for col in 0..d {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..d {
                    acc += self.entries[k * d + r].conj() * self.entries[k * d + col];
                }
                if r == col {
                    acc -= Complex::new(T::one(), T::zero());
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max))
    }

    pub fn pauli_x() -> Self {
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        Self::from_parts(2, vec![z, o, o, z], Role::Hermitian)
    }

    pub fn pauli_y() -> Self {
        let z = c(0.0, 0.0);
        Self::from_parts(2, vec![z, c(0.0, -1.0), c(0.0, 1.0), z], Role::Hermitian)
    }

    pub fn pauli_z() -> Self {
        let z = c(0.0, 0.0);
        Self::from_parts(2, vec![c(1.0, 0.0), z, z, c(-1.0, 0.0)], Role::Hermitian)
    }

    /// `R_α(θ) = e^{-iθ I_α} = cos(θ/2) - i sin(θ/2) σ_α`.
    pub fn rotation(axis: usize, theta: T) -> Self {
        let half = theta / T::lit(2.0);
        let (s, co) = half.sin_cos();
        let sigma = match axis {
            0 => Self::pauli_x(),
            1 => Self::pauli_y(),
            _ => Self::pauli_z(),
        };
        let mut m = Self::identity(2).scale(co);
        for (e, p) in m.entries.iter_mut().zip(&sigma.entries) {
            *e += p * Complex::new(T::zero(), -s);
        }
        m.role = Role::Unitary;
        m
    }

    /// Places a single-qubit operator on `qubit` of an `n_qubits` register.
    pub fn on_qubit(single: &Self, qubit: usize, n_qubits: usize) -> Result<Self> {
        if single.dim != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: single.dim });
        }
        if qubit >= n_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, n_qubits });
        }
        let dim = 1usize << n_qubits;
        let shift = n_qubits - 1 - qubit;
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            let rb = (r >> shift) & 1;
            for cb in 0..2 {
                let col = (r & !(1 << shift)) | (cb << shift);
                m.entries[r * dim + col] = single.entries[rb * 2 + cb];
            }
        }
        m.role = single.role;
        Ok(m)
    }

    /// `|0⟩⟨0| ⊗ … + U ⊗ |1⟩⟨1|` with the control on a new least significant
    /// qubit. `active_on` selects which control state applies `self`.
    pub fn controlled_by_last(&self, active_on: u8) -> Self {
        let d = self.dim;
        let dim = 2 * d;
        let mut m = Self::zeros(dim);
        for r in 0..d {
            for col in 0..d {
                for bit in 0..2usize {
                    let v = if bit == active_on as usize {
                        self.entries[r * d + col]
                    } else if r == col {
                        Complex::new(T::one(), T::zero())
                    } else {
                        continue;
                    };
                    m.entries[(2 * r + bit) * dim + 2 * col + bit] = v;
                }
            }
        }
        m.role = if self.role == Role::Unitary { Role::Unitary } else { Role::General };
        m
    }

    /// Spin operator `I_α = σ_α / 2` for `axis` in `{0: x, 1: y, 2: z}`.
    pub fn spin(axis: usize) -> Self {
        let p = match axis {
            0 => Self::pauli_x(),
            1 => Self::pauli_y(),
            _ => Self::pauli_z(),
        };
        p.scale(T::lit(0.5))
    }

    pub fn n_qubits_checked(&self) -> Result<usize> {
        qubits_for_dim(self.dim)
    }
}

impl<T: Real> Tensor for OperatorMatrix<T> {
    fn tensor_bounded(&self, other: &Self, max_dim: usize) -> Result<Self> {
        let dim = check_product_dim(self.dim, other.dim, max_dim)?;
        let (da, db) = (self.dim, other.dim);
        let mut entries = vec![Complex::new(T::zero(), T::zero()); dim * dim];
        for ar in 0..da {
            for ac in 0..da {
                let a = self.entries[ar * da + ac];
                for br in 0..db {
                    for bc in 0..db {
                        entries[(ar * db + br) * dim + ac * db + bc] = a * other.entries[br * db + bc];
                    }
                }
            }
        }
        let role = if self.role == other.role { self.role } else { Role::General };
        Ok(Self { dim, entries, role })
    }
}

/// `e^{-iht}` via eigendecomposition of the Hermitian generator `h`.
pub fn expm_hermitian<T: Real>(h: &OperatorMatrix<T>, t: T) -> Result<OperatorMatrix<T>> {
    let dev = h.hermiticity_defect();
    if dev > T::tol(1e-12) {
        return Err(Error::NotHermitian(dev.as_f64()));
    }
    let eig = eigh(h)?;
    let phases: Vec<Complex<T>> = eig.values.iter().map(|&l| cis(-l * t)).collect();
    let u = eig.reconstruct_with(&phases);
    u.with_role(Role::Unitary)
}

impl<T: Real> OperatorMatrix<T> {
    /// Expectation `⟨ψ|M|ψ⟩` for a raw amplitude slice.
    pub(crate) fn sandwich(&self, v: &[Complex<T>]) -> Complex<T> {
        let mv = self.apply_to(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum()
    }

    pub(crate) fn real_diagonal(diag: &[T]) -> Self {
        let d: Vec<Complex<T>> = diag.iter().map(|&x| re(x)).collect();
        let mut m = Self::diagonal(&d);
        m.role = Role::Hermitian;
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_generator_gives_identity() {
        let u = expm_hermitian(&OperatorMatrix::<f64>::real_diagonal(&[0.0; 4]), 3.7).unwrap();
        assert!(u.max_abs_diff(&OperatorMatrix::identity(4)).unwrap() < 1e-15);
    }

    #[test]
    fn half_sigma_z_full_turn_is_minus_identity() {
        let h = OperatorMatrix::<f64>::spin(2);
        let u = expm_hermitian(&h, 2.0 * PI).unwrap();
        let minus = OperatorMatrix::identity(2).scale(-1.0);
        assert!(u.max_abs_diff(&minus).unwrap() < 1e-12);
    }

    #[test]
    fn non_hermitian_generator_is_rejected() {
        let m = OperatorMatrix::<f64>::general(2, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(expm_hermitian(&m, 1.0), Err(Error::NotHermitian(_))));
        assert!(matches!(m.clone().with_role(Role::Unitary), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn rotation_matches_exponential() {
        for axis in 0..3 {
            let r = OperatorMatrix::<f64>::rotation(axis, 0.731);
            let e = expm_hermitian(&OperatorMatrix::spin(axis), 0.731).unwrap();
            assert!(r.max_abs_diff(&e).unwrap() < 1e-14);
        }
    }

    #[test]
    fn on_qubit_matches_kron() {
        let x = OperatorMatrix::<f64>::pauli_x();
        let i2 = OperatorMatrix::identity(2);
        let direct = OperatorMatrix::on_qubit(&x, 1, 3).unwrap();
        let kron = i2.tensor(&x).unwrap().tensor(&i2).unwrap();
        assert_eq!(direct.max_abs_diff(&kron).unwrap(), 0.0);
    }

    #[test]
    fn controlled_layout() {
        let x = OperatorMatrix::<f64>::pauli_x();
        let cx = x.controlled_by_last(1);
        // |q c⟩: |0 1⟩ (index 1) -> |1 1⟩ (index 3); |0 0⟩ untouched
        assert_eq!(cx.get(3, 1), c(1.0, 0.0));
        assert_eq!(cx.get(0, 0), c(1.0, 0.0));
        assert_eq!(cx.get(2, 2), c(1.0, 0.0));
        assert!(cx.is_unitary(1e-15));
    }
}
