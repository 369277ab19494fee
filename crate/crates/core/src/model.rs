//! Two-spin Heisenberg model in a longitudinal field, its labeled spectrum and
//! the two-angle variational trial family.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::optim::{grid_minima, grid_points, refine_newton, wrap_to_window};
use crate::qcore::{OperatorMatrix, Role, StateVector, Tensor};

/// Coupling `J` and field `h`, both in the same energy unit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct HeisenbergParams<T> {
    pub j: T,
    pub h: T,
}

impl<T: Real> HeisenbergParams<T> {
    pub fn new(j: T, h: T) -> Result<Self> {
        let p = Self { j, h };
        p.validate()?;
        Ok(p)
    }

    /// Field expressed as a multiple of the critical field `h_c = J`.
    pub fn at_critical_ratio(j: T, ratio: T) -> Result<Self> {
        let p = Self::new(j, T::zero())?;
        Self::new(j, ratio * critical_field(&p)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j > T::zero()) || !self.j.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling J must be positive, got {}", self.j)));
        }
        if !self.h.is_finite() {
            return Err(Error::InvalidParameter(format!("field h must be finite, got {}", self.h)));
        }
        Ok(())
    }

    pub fn with_field(&self, h: T) -> Result<Self> {
        Self::new(self.j, h)
    }

    /// Converts an energy in model units to units of `2πJ`.
    pub fn to_two_pi_j(&self, energy: T) -> T {
        energy / (T::TAU() * self.j)
    }

    pub fn from_two_pi_j(&self, value: T) -> T {
        value * T::TAU() * self.j
    }
}

/// Total-spin labels of the two-spin eigenstates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "S")]
    Singlet,
    #[serde(rename = "T-1")]
    TripletMinus,
    #[serde(rename = "T0")]
    TripletZero,
    #[serde(rename = "T+1")]
    TripletPlus,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Singlet, Label::TripletMinus, Label::TripletZero, Label::TripletPlus];

    /// Eigenvector in the `|q_a q_b⟩` basis.
    pub fn state<T: Real>(self) -> StateVector<T> {
        let r = T::FRAC_1_SQRT_2();
        let (o, z) = (T::one(), T::zero());
        let amps = match self {
            Label::Singlet => [z, r, -r, z],
            Label::TripletZero => [z, r, r, z],
            Label::TripletPlus => [o, z, z, z],
            Label::TripletMinus => [z, z, z, o],
        };
        StateVector::new(amps.iter().map(|&x| Complex::new(x, z)).collect()).expect("label states are normalized")
    }

    /// `⟨I_z^a + I_z^b⟩` of the eigenvector.
    pub fn magnetization(self) -> i8 {
        match self {
            Label::Singlet | Label::TripletZero => 0,
            Label::TripletPlus => 1,
            Label::TripletMinus => -1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Singlet => "S",
            Label::TripletMinus => "T-1",
            Label::TripletZero => "T0",
            Label::TripletPlus => "T+1",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Label::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown level label {s:?}")))
    }
}

/// `J(I_x I_x + I_y I_y + I_z I_z) + h(I_z ⊗ 1 + 1 ⊗ I_z)` on the two system spins.
pub fn build_hamiltonian<T: Real>(p: &HeisenbergParams<T>) -> Result<OperatorMatrix<T>> {
    p.validate()?;
    let coupling = exchange_term(&[0, 1, 2])?.scale(p.j);
    let field = zeeman_term()?.scale(p.h);
    coupling.add(&field)?.with_role(Role::Hermitian)
}

/// `Σ_α I_α^a I_α^b` over the listed axes (0: x, 1: y, 2: z), without the `J` prefactor.
pub fn exchange_term<T: Real>(axes: &[usize]) -> Result<OperatorMatrix<T>> {
    let mut acc = OperatorMatrix::<T>::real_diagonal(&[T::zero(); 4]);
    for &axis in axes {
        let s = OperatorMatrix::spin(axis);
        acc = acc.add(&s.tensor(&s)?)?;
    }
    Ok(acc)
}

/// `I_z^a + I_z^b`.
pub fn zeeman_term<T: Real>() -> Result<OperatorMatrix<T>> {
    Ok(OperatorMatrix::real_diagonal(&[T::one(), T::zero(), T::zero(), -T::one()]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Level<T> {
    pub label: Label,
    pub energy: T,
    pub vector: StateVector<T>,
}

/// The four labeled levels sorted by energy; exact ties are ordered by label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectrumTable<T> {
    pub levels: Vec<Level<T>>,
}

impl<T: Real> SpectrumTable<T> {
    pub fn ground(&self) -> &Level<T> {
        &self.levels[0]
    }

    pub fn level(&self, label: Label) -> &Level<T> {
        self.levels.iter().find(|l| l.label == label).expect("all four labels present")
    }

    pub fn energies(&self) -> Vec<T> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    /// Number of levels sharing the ground energy within `tol`.
    pub fn ground_degeneracy(&self, tol: T) -> usize {
        let e0 = self.ground().energy;
        self.levels.iter().filter(|l| (l.energy - e0).abs() <= tol).count()
    }

    /// Squared overlaps `|⟨e_k|ψ⟩|²` of a two-spin state with every level.
    pub fn decompose(&self, psi: &StateVector<T>) -> Result<Vec<(Label, T)>> {
        self.levels.iter().map(|l| Ok((l.label, l.vector.overlap(psi)?))).collect()
    }
}

/// Exact spectrum in the total-spin basis, which diagonalizes `H` for every `(J, h)`.
pub fn diagonalize<T: Real>(p: &HeisenbergParams<T>) -> Result<SpectrumTable<T>> {
    let hmat = build_hamiltonian(p)?;
    let mut levels = Vec::with_capacity(4);
    for label in Label::ALL {
        let vector = label.state::<T>();
        let hv = OperatorMatrix::apply_to_state(&hmat, &vector);
        let energy = hmat.sandwich(vector.amplitudes()).re;
        let residual = hv.iter().zip(vector.amplitudes()).map(|(a, b)| (a - b * energy).norm()).fold(T::zero(), T::max);
        if residual > T::tol(1e-10) * (T::one() + p.j.abs() + p.h.abs()) {
            return Err(Error::InvalidParameter(format!("level {label} is not an eigenvector (residual {residual})")));
        }
        levels.push(Level { label, energy, vector });
    }
    // Label::ALL is already in tie-break order; insertion sort keeps it for near-equal energies.
    let tie = T::tol(1e-12) * (T::one() + p.j.abs() + p.h.abs());
    for i in 1..levels.len() {
        let mut k = i;
        while k > 0 && levels[k - 1].energy > levels[k].energy + tie {
            levels.swap(k - 1, k);
            k -= 1;
        }
    }
    Ok(SpectrumTable { levels })
}

/// Field at which the singlet and `T-1` levels cross.
pub fn critical_field<T: Real>(p: &HeisenbergParams<T>) -> Result<T> {
    let zero_field = diagonalize(&p.with_field(T::zero())?)?;
    let gap = zero_field.level(Label::TripletMinus).energy - zero_field.level(Label::Singlet).energy;
    let slope = T::lit(Label::TripletMinus.magnetization().abs() as f64);
    Ok(gap / slope)
}

/// Angles of the trial family `(|θ⟩ + |φ⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TrialParams<T> {
    pub theta: T,
    pub phi: T,
}

impl<T: Real> TrialParams<T> {
    /// `(-π/4, π/2)`, the minimizer for every `J > 0`, `h ≥ 0`.
    pub fn optimal() -> Self {
        Self { theta: -T::FRAC_PI_4(), phi: T::FRAC_PI_2() }
    }
}

/// `(cosθ|10⟩ + sinθ|01⟩)/√2 + (cosφ|00⟩ + sinφ|11⟩)/√2`.
pub fn build_trial_state<T: Real>(tp: &TrialParams<T>) -> StateVector<T> {
    let r = T::FRAC_1_SQRT_2();
    let amps = [tp.phi.cos() * r, tp.theta.sin() * r, tp.theta.cos() * r, tp.phi.sin() * r];
    StateVector::new(amps.iter().map(|&x| Complex::new(x, T::zero())).collect()).expect("trial family is normalized")
}

pub fn variational_energy<T: Real>(tp: &TrialParams<T>, p: &HeisenbergParams<T>) -> Result<T> {
    let hmat = build_hamiltonian(p)?;
    Ok(hmat.sandwich(build_trial_state(tp).amplitudes()).re)
}

/// Minimizes the variational energy over a 1° grid of the `π`-periodic angle
/// window `(-π/2, π/2]²`, then refines by Newton steps.
///
/// Ties on the grid go to the smallest `θ` and the largest `φ`; with `h = 0`
/// the energy does not depend on `φ` and this returns `φ = π/2`.
pub fn optimize_trial<T: Real>(p: &HeisenbergParams<T>) -> Result<TrialParams<T>> {
    p.validate()?;
    if p.h < T::zero() {
        return Err(Error::InvalidParameter(format!("optimizer expects h >= 0, got {}", p.h)));
    }
    let hmat = build_hamiltonian(p)?;
    let energy = |theta: T, phi: T| hmat.sandwich(build_trial_state(&TrialParams { theta, phi }).amplitudes()).re;

    let pi = T::PI();
    let axis = grid_points(-pi / T::lit(2.0), pi, 180);
    let scale = p.j.abs() + p.h.abs();
    let ties = grid_minima(&energy, &axis, &axis, T::tol(1e-12) * scale);
    let start = ties
        .iter()
        .map(|(x, _)| *x)
        .reduce(|best, cand| if cand[0] < best[0] || (cand[0] == best[0] && cand[1] > best[1]) { cand } else { best })
        .ok_or(Error::NoConvergence { what: "trial grid search", iterations: 0 })?;

    let refined = refine_newton(&energy, start, 100)?;
    Ok(TrialParams { theta: wrap_to_window(refined[0], T::zero(), pi), phi: wrap_to_window(refined[1], T::zero(), pi) })
}

impl<T: Real> OperatorMatrix<T> {
    pub(crate) fn apply_to_state(&self, s: &StateVector<T>) -> Vec<Complex<T>> {
        self.apply_to(s.amplitudes())
    }
}
