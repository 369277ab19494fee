//! NMR pulse programs: primitives, their unitaries, durations and a verifier.
//!
//! Two primitive kinds exist. `R_α^j(θ) = e^{-iθ I_α^j}` is a hard rotation on
//! one spin, idealized as instantaneous. `U^{jk}(θ) = e^{-iθ I_z^j I_z^k}` is
//! free evolution under the scalar coupling of a pair and lasts
//! `|θ / (2π J_jk)|` seconds. Programs are listed in time order.

mod compile;
mod text;

pub use compile::{
    compile_controlled_evolution, compile_controlled_local_field, compile_controlled_v, compile_controlled_w,
    compile_local_field, compile_state_prep, compile_v_half, refine_state_prep_angles, state_prep_fidelity, PrepAngles,
    VTerm,
};
pub use text::parse_program;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{cis, Real};
use crate::qcore::{OperatorMatrix, Role};

/// Register size of every pulse program: two system spins and the probe.
pub const N_QUBITS: usize = 3;
/// Programs matching their oracle within this deviation are accepted.
pub const EQUIVALENCE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Qubit {
    A,
    B,
    C,
}

impl Qubit {
    pub fn index(self) -> usize {
        match self {
            Qubit::A => 0,
            Qubit::B => 1,
            Qubit::C => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pair {
    Ab,
    Bc,
    Ac,
}

impl Pair {
    pub fn qubits(self) -> (Qubit, Qubit) {
        match self {
            Pair::Ab => (Qubit::A, Qubit::B),
            Pair::Bc => (Qubit::B, Qubit::C),
            Pair::Ac => (Qubit::A, Qubit::C),
        }
    }
}

macro_rules! label_text {
    ($ty:ty, $($variant:path => $s:literal),+) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $s),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($s => Ok($variant),)+
                    other => Err(Error::InvalidParameter(format!(
                        "unknown {} label {other:?}", stringify!($ty).to_lowercase()
                    ))),
                }
            }
        }
    };
}

label_text!(Qubit, Qubit::A => "a", Qubit::B => "b", Qubit::C => "c");
label_text!(Axis, Axis::X => "x", Axis::Y => "y", Axis::Z => "z");
label_text!(Pair, Pair::Ab => "ab", Pair::Bc => "bc", Pair::Ac => "ac");

/// Maps an angle into `(-2π, 2π]`. Rotations are unchanged by a shift of
/// `4π`; coupling evolutions pick up a global sign.
pub fn canonical_angle<T: Real>(theta: T) -> T {
    let period = T::lit(4.0) * T::PI();
    let half = T::TAU();
    let mut y = theta - period * ((theta + half) / period).floor();
    if y <= -half {
        y += period;
    }
    y
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", tag = "kind", rename_all = "lowercase")]
pub enum PulsePrimitive<T> {
    Rot { qubit: Qubit, axis: Axis, angle: T },
    Zz { pair: Pair, angle: T },
}

impl<T: Real> PulsePrimitive<T> {
    pub fn rot(qubit: Qubit, axis: Axis, angle: T) -> Self {
        PulsePrimitive::Rot { qubit, axis, angle: canonical_angle(angle) }
    }

    pub fn zz(pair: Pair, angle: T) -> Self {
        PulsePrimitive::Zz { pair, angle: canonical_angle(angle) }
    }

    pub fn angle(&self) -> T {
        match *self {
            PulsePrimitive::Rot { angle, .. } | PulsePrimitive::Zz { angle, .. } => angle,
        }
    }

    /// Unitary on the three-qubit register.
    pub fn unitary(&self) -> OperatorMatrix<T> {
        match *self {
            PulsePrimitive::Rot { qubit, axis, angle } => {
                OperatorMatrix::on_qubit(&OperatorMatrix::rotation(axis.index(), angle), qubit.index(), N_QUBITS)
                    .expect("qubit inside register")
            }
            PulsePrimitive::Zz { pair, angle } => {
                let (j, k) = pair.qubits();
                let (sj, sk) = (N_QUBITS - 1 - j.index(), N_QUBITS - 1 - k.index());
                let quarter = angle / T::lit(4.0);
                let diag: Vec<Complex<T>> = (0..1usize << N_QUBITS)
                    .map(|idx| {
                        let same = ((idx >> sj) & 1) == ((idx >> sk) & 1);
                        cis(if same { -quarter } else { quarter })
                    })
                    .collect();
                OperatorMatrix::diagonal(&diag)
            }
        }
    }
}

/// Scalar couplings in Hz and the fixed cost of one rotation in seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Couplings<T> {
    pub ab: T,
    pub bc: T,
    pub ac: T,
    pub rotation_cost: T,
}

impl<T: Real> Default for Couplings<T> {
    fn default() -> Self {
        Self { ab: T::lit(160.7), bc: T::lit(-194.4), ac: T::lit(47.6), rotation_cost: T::zero() }
    }
}

impl<T: Real> Couplings<T> {
    pub fn get(&self, pair: Pair) -> T {
        match pair {
            Pair::Ab => self.ab,
            Pair::Bc => self.bc,
            Pair::Ac => self.ac,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PulseProgram<T> {
    pub steps: Vec<PulsePrimitive<T>>,
    pub couplings: Couplings<T>,
}

impl<T: Real> PulseProgram<T> {
    pub fn new(steps: Vec<PulsePrimitive<T>>) -> Self {
        Self { steps, couplings: Couplings::default() }
    }

    pub fn with_couplings(mut self, couplings: Couplings<T>) -> Self {
        self.couplings = couplings;
        self
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `self` followed by `other`.
    pub fn then(mut self, other: PulseProgram<T>) -> Self {
        self.steps.extend(other.steps);
        self
    }

    pub fn push(&mut self, step: PulsePrimitive<T>) {
        self.steps.push(step);
    }
}

/// Time-ordered product of the primitive unitaries.
pub fn program_unitary<T: Real>(prog: &PulseProgram<T>) -> Result<OperatorMatrix<T>> {
    let mut u = OperatorMatrix::identity(1 << N_QUBITS);
    for step in &prog.steps {
        u = step.unitary().matmul(&u)?;
    }
    u.with_role(Role::Unitary)
}

/// Total free-evolution time plus the per-rotation cost, in seconds.
pub fn program_duration<T: Real>(prog: &PulseProgram<T>) -> Result<T> {
    let mut total = T::zero();
    for step in &prog.steps {
        match *step {
            PulsePrimitive::Rot { .. } => total += prog.couplings.rotation_cost,
            PulsePrimitive::Zz { pair, angle } => {
                let j = prog.couplings.get(pair);
                if j == T::zero() {
                    return Err(Error::ZeroCoupling(pair.to_string()));
                }
                total += (angle / (T::TAU() * j)).abs();
            }
        }
    }
    Ok(total)
}

/// Whether `u1` and `u2` agree up to a global phase, and the largest
/// elementwise deviation of `u1†u2` from `phase·I`.
pub fn verify_equivalence<T: Real>(u1: &OperatorMatrix<T>, u2: &OperatorMatrix<T>) -> Result<(bool, T)> {
    for u in [u1, u2] {
        let defect = u.unitarity_defect();
        if defect > T::tol(1e-8) {
            return Err(Error::NotUnitary(defect.as_f64()));
        }
    }
    let m = u1.adjoint().matmul(u2)?;
    let pivot = m
        .entries()
        .iter()
        .copied()
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).expect("finite entries"))
        .expect("non-empty matrix");
    let phase = pivot / pivot.norm();
    let d = m.dim();
    let mut deviation = T::zero();
    for r in 0..d {
        for col in 0..d {
            let ideal = if r == col { phase } else { Complex::new(T::zero(), T::zero()) };
            deviation = deviation.max((m.get(r, col) - ideal).norm());
        }
    }
    Ok((deviation < T::lit(EQUIVALENCE_TOL), deviation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::exchange_term;
    use crate::qcore::{expm_hermitian, Tensor};
    use std::f64::consts::PI;

    #[test]
    fn canonical_angles() {
        assert_eq!(canonical_angle(PI), PI);
        assert_eq!(canonical_angle(2.0 * PI), 2.0 * PI);
        assert!((canonical_angle(-2.0 * PI) - 2.0 * PI).abs() < 1e-15);
        assert!((canonical_angle(5.0 * PI) - PI).abs() < 1e-14);
        assert!((canonical_angle(-3.0 * PI) - PI).abs() < 1e-14);
    }

    #[test]
    fn empty_and_inverse_pair() {
        let empty = PulseProgram::<f64>::new(vec![]);
        assert!(program_unitary(&empty).unwrap().max_abs_diff(&OperatorMatrix::identity(8)).unwrap() < 1e-15);
        assert_eq!(program_duration(&empty).unwrap(), 0.0);
        let pair = PulseProgram::new(vec![
            PulsePrimitive::rot(Qubit::A, Axis::Y, PI),
            PulsePrimitive::rot(Qubit::A, Axis::Y, -PI),
        ]);
        assert!(program_unitary(&pair).unwrap().max_abs_diff(&OperatorMatrix::identity(8)).unwrap() < 1e-12);
    }

    #[test]
    fn zz_matches_exponential() {
        for pair in [Pair::Ab, Pair::Bc, Pair::Ac] {
            let (j, k) = pair.qubits();
            let iz = OperatorMatrix::<f64>::spin(2);
            let g = OperatorMatrix::on_qubit(&iz, j.index(), 3)
                .unwrap()
                .matmul(&OperatorMatrix::on_qubit(&iz, k.index(), 3).unwrap())
                .unwrap()
                .with_role(Role::Hermitian)
                .unwrap();
            let exact = expm_hermitian(&g, 0.77).unwrap();
            assert!(PulsePrimitive::zz(pair, 0.77).unitary().max_abs_diff(&exact).unwrap() < 1e-14);
        }
    }

    #[test]
    fn basis_change_gives_xx_coupling() {
        let t = 1.3;
        let prog = PulseProgram::new(vec![
            PulsePrimitive::rot(Qubit::A, Axis::Y, -PI / 2.0),
            PulsePrimitive::rot(Qubit::B, Axis::Y, -PI / 2.0),
            PulsePrimitive::zz(Pair::Ab, t / 2.0),
            PulsePrimitive::rot(Qubit::A, Axis::Y, PI / 2.0),
            PulsePrimitive::rot(Qubit::B, Axis::Y, PI / 2.0),
        ]);
        let exact = expm_hermitian(&exchange_term::<f64>(&[0]).unwrap(), t / 2.0)
            .unwrap()
            .tensor(&OperatorMatrix::identity(2))
            .unwrap();
        assert!(program_unitary(&prog).unwrap().max_abs_diff(&exact).unwrap() < 1e-10);
    }

    #[test]
    fn durations() {
        let prog = PulseProgram::new(vec![PulsePrimitive::zz(Pair::Ab, PI)]);
        assert!((program_duration(&prog).unwrap() - 0.5 / 160.7).abs() < 1e-15);
        let neg = PulseProgram::new(vec![PulsePrimitive::zz(Pair::Bc, PI)]);
        assert!((program_duration(&neg).unwrap() - 0.5 / 194.4).abs() < 1e-15);
        let zero = neg.clone().with_couplings(Couplings { bc: 0.0, ..Couplings::default() });
        assert!(matches!(program_duration(&zero), Err(Error::ZeroCoupling(_))));
        let both = prog.clone().then(neg.clone());
        let sum = program_duration(&prog).unwrap() + program_duration(&neg).unwrap();
        assert!((program_duration(&both).unwrap() - sum).abs() < 1e-15);
    }

    #[test]
    fn verifier_examples() {
        let u = expm_hermitian(&exchange_term::<f64>(&[0, 1]).unwrap(), 0.4).unwrap();
        let (eq, dev) = verify_equivalence(&u, &u.with_phase(cis(PI / 7.0))).unwrap();
        assert!(eq && dev < 1e-14);
        let x = OperatorMatrix::on_qubit(&OperatorMatrix::<f64>::pauli_x(), 0, 1).unwrap();
        let (eq, _) = verify_equivalence(&OperatorMatrix::identity(2), &x).unwrap();
        assert!(!eq);
        let bad = OperatorMatrix::identity(2).scale(2.0);
        assert!(matches!(verify_equivalence(&bad, &bad), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn labels_round_trip() {
        for q in [Qubit::A, Qubit::B, Qubit::C] {
            assert_eq!(q.to_string().parse::<Qubit>().unwrap(), q);
        }
        assert!("d".parse::<Qubit>().is_err());
        assert_eq!("bc".parse::<Pair>().unwrap(), Pair::Bc);
        assert_eq!("z".parse::<Axis>().unwrap(), Axis::Z);
    }
}
