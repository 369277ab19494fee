use num_complex::Complex;

use super::{OperatorMatrix, Role};
use crate::error::{Error, Result};
use crate::num::{cis, Real};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    /// Eigenvectors as columns.
    pub vectors: OperatorMatrix<T>,
}

impl<T: Real> Eigen<T> {
    /// Column `k` as an amplitude vector.
    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        let d = self.vectors.dim();
        (0..d).map(|r| self.vectors.get(r, k)).collect()
    }

    /// `V diag(f) V†`.
    pub fn reconstruct_with(&self, f: &[Complex<T>]) -> OperatorMatrix<T> {
        let d = self.vectors.dim();
        let v = self.vectors.entries();
        let mut out = vec![Complex::new(T::zero(), T::zero()); d * d];
        for r in 0..d {
            for col in 0..d {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..d {
                    acc += v[r * d + k] * f[k] * v[col * d + k].conj();
                }
                out[r * d + col] = acc;
            }
        }
        OperatorMatrix::from_parts(d, out, Role::General)
    }
}

/// Cyclic complex Jacobi diagonalization of a Hermitian matrix.
pub fn eigh<T: Real>(h: &OperatorMatrix<T>) -> Result<Eigen<T>> {
    let dev = h.hermiticity_defect();
    if dev > T::tol(1e-12) {
        return Err(Error::NotHermitian(dev.as_f64()));
    }
    let n = h.dim();
    let mut a: Vec<Complex<T>> = h.entries().to_vec();
    let mut v = OperatorMatrix::<T>::identity(n).entries().to_vec();
    let scale = a.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt().max(T::min_positive_value());
    let threshold = T::epsilon() * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a, n);
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a, n) > threshold * T::lit(16.0) {
        return Err(Error::NoConvergence { what: "Jacobi eigensolver", iterations: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.partial_cmp(&a[j * n + j].re).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = vec![Complex::new(T::zero(), T::zero()); n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_col] = v[r * n + old_col];
        }
    }
    Ok(Eigen { values, vectors: OperatorMatrix::from_parts(n, vectors, Role::Unitary) })
}

fn off_diagonal_norm<T: Real>(a: &[Complex<T>], n: usize) -> T {
    let mut s = T::zero();
    for r in 0..n {
        for col in 0..n {
            if r != col {
                s += a[r * n + col].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Zeroes `a[p][q]` with the unitary `G = D·P`, where `D` removes the phase of
/// `a[p][q]` and `P` is the real Jacobi rotation of the resulting symmetric block.
fn rotate<T: Real>(a: &mut [Complex<T>], v: &mut [Complex<T>], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let b = apq.norm();
    if b <= T::min_positive_value() {
        return;
    }
    let phase = apq / b;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (T::lit(2.0) * b);
    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
    let cs = T::one() / (t * t + T::one()).sqrt();
    let sn = t * cs;

    let g_pp = Complex::new(cs, T::zero());
    let g_pq = Complex::new(sn, T::zero());
    let g_qp = phase.conj() * (-sn);
    let g_qq = phase.conj() * cs;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * g_pp + akq * g_qp;
        a[k * n + q] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[q * n + k] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[p * n + q] = Complex::new(T::zero(), T::zero());
    a[q * n + p] = Complex::new(T::zero(), T::zero());
    a[p * n + p] = Complex::new(a[p * n + p].re, T::zero());
    a[q * n + q] = Complex::new(a[q * n + q].re, T::zero());

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * g_pp + vkq * g_qp;
        v[k * n + q] = vkp * g_pq + vkq * g_qq;
    }
}

/// A Hermitian generator with its eigendecomposition cached, so that
/// `e^{-iht}` can be produced for many `t` without re-diagonalizing.
#[derive(Clone, Debug)]
pub struct SpectralGenerator<T> {
    eig: Eigen<T>,
}

impl<T: Real> SpectralGenerator<T> {
    pub fn new(h: &OperatorMatrix<T>) -> Result<Self> {
        Ok(Self { eig: eigh(h)? })
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eig.values
    }

    /// `e^{-iht}`.
    pub fn propagator(&self, t: T) -> OperatorMatrix<T> {
        let phases: Vec<Complex<T>> = self.eig.values.iter().map(|&l| cis(-l * t)).collect();
        let u = self.eig.reconstruct_with(&phases);
        OperatorMatrix::from_parts(u.dim(), u.entries().to_vec(), Role::Unitary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::c;

    #[test]
    fn diagonalizes_complex_hermitian() {
        // [[2, 1-i], [1+i, 3]] has eigenvalues 1 and 4
        let m = OperatorMatrix::<f64>::hermitian(2, vec![c(2.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(3.0, 0.0)]).unwrap();
        let e = eigh(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-13);
        assert!((e.values[1] - 4.0).abs() < 1e-13);
        for k in 0..2 {
            let v = e.vector(k);
            let mv = m.apply_to(&v);
            for (x, y) in mv.iter().zip(&v) {
                assert!((x - y * e.values[k]).norm() < 1e-12);
            }
        }
        assert!(e.vectors.is_unitary(1e-13));
    }

    #[test]
    fn reconstruction_roundtrip() {
        let m = OperatorMatrix::<f64>::spin(0)
            .tensor(&OperatorMatrix::spin(1))
            .unwrap()
            .add(&OperatorMatrix::spin(2).tensor(&OperatorMatrix::spin(2)).unwrap())
            .unwrap();
        let e = eigh(&m).unwrap();
        let vals: Vec<_> = e.values.iter().map(|&x| c::<f64>(x, 0.0)).collect();
        let back = e.reconstruct_with(&vals);
        assert!(back.max_abs_diff(&m).unwrap() < 1e-14);
    }

    use crate::qcore::Tensor;
}
