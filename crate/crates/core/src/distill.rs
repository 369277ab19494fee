//! Ground-state distillation by probe tagging.
//!
//! With `τ = π/(E1 - E0)` and the probe prepared as `(|0⟩ + e^{iE0τ}|1⟩)/√2`,
//! a controlled `U(τ)` followed by `R_y(-π/2)` on the probe maps
//! `a0|e0⟩ + a1|e1⟩` to `a0|e0⟩|0⟩ - a1|e1⟩|1⟩`. Measuring the probe in `|0⟩`
//! leaves the ground state.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ipea::{run_ipea, IpeaConfig, Refinement, WrappedEvolution};
use crate::model::{diagonalize, HeisenbergParams};
use crate::num::{cis, Real};
use crate::qcore::{DensityMatrix, OperatorMatrix, StateVector, Tensor};

/// Gaps smaller than this many units of `J` cannot be tagged.
pub const MIN_GAP_J: f64 = 1e-6;
/// Branches with smaller Born probability are rejected.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DistillationPlan<T> {
    pub e0: T,
    pub e1: T,
    pub tau: T,
    /// `E0·τ`, the phase loaded onto the probe's `|1⟩` branch.
    pub preload_phase: T,
}

impl<T: Real> DistillationPlan<T> {
    pub fn new(e0: T, e1: T, j: T) -> Result<Self> {
        let gap = e1 - e0;
        if gap.abs() < T::lit(MIN_GAP_J) * j.abs() {
            return Err(Error::GapUnresolvable(gap.as_f64()));
        }
        if gap < T::zero() {
            return Err(Error::InvalidParameter(format!("tagged level {e1} lies below reference {e0}")));
        }
        let tau = T::PI() / gap;
        Ok(Self { e0, e1, tau, preload_phase: e0 * tau })
    }

    /// Lowest and highest measured eigenvalues.
    pub fn from_refinements(refinements: &[Refinement<T>], j: T) -> Result<Self> {
        let energies: Vec<T> = refinements.iter().map(|r| r.energy(j)).collect();
        let lo = energies.iter().copied().fold(T::infinity(), T::min);
        let hi = energies.iter().copied().fold(T::neg_infinity(), T::max);
        if energies.len() < 2 {
            return Err(Error::GapUnresolvable(0.0));
        }
        Self::new(lo, hi, j)
    }
}

/// Where the energies that define each plan come from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum EnergySource<T> {
    Measured(IpeaConfig<T>),
    Exact,
}

/// Distinct energies present in `system`, ascending. Levels closer than
/// [`MIN_GAP_J`] are merged.
pub fn captured_levels<T: Real>(
    system: &StateVector<T>,
    p: &HeisenbergParams<T>,
    source: &EnergySource<T>,
) -> Result<Vec<T>> {
    let mut energies: Vec<T> = match source {
        EnergySource::Measured(config) => run_ipea(system, p, config)?.iter().map(|r| r.energy(p.j)).collect(),
        EnergySource::Exact => {
            let table = diagonalize(p)?;
            let weights = table.decompose(system)?;
            table
                .levels
                .iter()
                .zip(weights)
                .filter(|(_, (_, w))| *w > T::lit(1e-6))
                .map(|(level, _)| level.energy)
                .collect()
        }
    };
    energies.sort_by(|a, b| a.partial_cmp(b).expect("finite energies"));
    let tol = T::lit(MIN_GAP_J) * p.j;
    energies.dedup_by(|b, a| (*b - *a).abs() < tol);
    Ok(energies)
}

/// Probe state `(|0⟩ + e^{iE0τ}|1⟩)/√2`.
pub fn probe_preparation<T: Real>(plan: &DistillationPlan<T>) -> StateVector<T> {
    let r = T::FRAC_1_SQRT_2();
    StateVector::new(vec![Complex::new(r, T::zero()), cis(plan.preload_phase) * r]).expect("normalized probe")
}

/// `U(τ)` on the system, active when the probe is `|1⟩`.
pub fn controlled_evolution<T: Real>(p: &HeisenbergParams<T>, tau: T) -> Result<OperatorMatrix<T>> {
    Ok(WrappedEvolution::new(p)?.unitary(tau)?.controlled_by_last(1))
}

/// `R_y(-π/2)` on the probe.
pub fn probe_readout<T: Real>() -> OperatorMatrix<T> {
    OperatorMatrix::identity(4).tensor(&OperatorMatrix::rotation(1, -T::FRAC_PI_2())).expect("8-dimensional register")
}

/// Full tagging unitary after probe preparation.
pub fn distillation_unitary<T: Real>(p: &HeisenbergParams<T>, plan: &DistillationPlan<T>) -> Result<OperatorMatrix<T>> {
    probe_readout().matmul(&controlled_evolution(p, plan.tau)?)
}

pub fn build_final_state<T: Real>(
    system: &StateVector<T>,
    p: &HeisenbergParams<T>,
    plan: &DistillationPlan<T>,
) -> Result<StateVector<T>> {
    if system.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: system.dim() });
    }
    system.tensor(&probe_preparation(plan))?.apply(&distillation_unitary(p, plan)?)
}

pub fn build_final_density<T: Real>(
    rho: &DensityMatrix<T>,
    p: &HeisenbergParams<T>,
    plan: &DistillationPlan<T>,
) -> Result<DensityMatrix<T>> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho.dim() });
    }
    rho.tensor(&probe_preparation(plan).density())?.evolve(&distillation_unitary(p, plan)?)
}

/// Post-measurement system state and Born probability for probe `outcome`.
/// The probe is the last qubit.
pub fn project_probe<T: Real>(rho: &DensityMatrix<T>, outcome: u8) -> Result<(DensityMatrix<T>, T)> {
    if outcome > 1 {
        return Err(Error::InvalidParameter(format!("probe outcome must be 0 or 1, got {outcome}")));
    }
    if rho.dim() < 4 {
        return Err(Error::DimensionMismatch { expected: 8, got: rho.dim() });
    }
    let o = outcome as usize;
    let d = rho.dim() / 2;
    let probability: T = (0..d).map(|k| rho.get(2 * k + o, 2 * k + o).re).sum();
    if probability < T::lit(MIN_BRANCH_PROBABILITY) {
        return Err(Error::ImpossibleBranch(probability.as_f64()));
    }
    let mut entries = Vec::with_capacity(d * d);
    for r in 0..d {
        for col in 0..d {
            entries.push(rho.get(2 * r + o, 2 * col + o) / probability);
        }
    }
    Ok((DensityMatrix::from_unchecked(d, entries), probability))
}

pub fn project_probe_state<T: Real>(state: &StateVector<T>, outcome: u8) -> Result<(DensityMatrix<T>, T)> {
    project_probe(&state.density(), outcome)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EliminationConfig<T> {
    pub max_rounds: usize,
    pub source: EnergySource<T>,
}

impl<T: Real> Default for EliminationConfig<T> {
    fn default() -> Self {
        Self { max_rounds: 8, source: EnergySource::Measured(IpeaConfig::default()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Elimination<T> {
    pub state: DensityMatrix<T>,
    /// One plan per completed round, in order.
    pub plans: Vec<DistillationPlan<T>>,
    /// Weight of the exact ground state after each round.
    pub ground_weights: Vec<T>,
}

impl<T: Real> Elimination<T> {
    pub fn rounds(&self) -> usize {
        self.plans.len()
    }
}

/// Tags and discards the highest remaining captured level, one per round,
/// until only the lowest is left.
pub fn eliminate_iteratively<T: Real>(
    system: &StateVector<T>,
    p: &HeisenbergParams<T>,
    config: &EliminationConfig<T>,
) -> Result<Elimination<T>> {
    let mut levels = captured_levels(system, p, &config.source)?;
    let ground = diagonalize(p)?.ground().vector.clone();
    let mut state = system.density();
    let mut plans = Vec::new();
    let mut ground_weights = Vec::new();
    while levels.len() > 1 && plans.len() < config.max_rounds {
        let e1 = levels.pop().expect("at least two levels");
        let plan = DistillationPlan::new(levels[0], e1, p.j)?;
        let (next, _) = project_probe(&build_final_density(&state, p, &plan)?, 0)?;
        let weight = next.population(&ground)?;
        if weight < T::lit(1e-3) {
            return Err(Error::GroundLost { weight: weight.as_f64(), rounds: plans.len() + 1 });
        }
        log::debug!("round {}: tagged E1 = {e1}, ground weight {weight}", plans.len() + 1);
        state = next;
        plans.push(plan);
        ground_weights.push(weight);
    }
    Ok(Elimination { state, plans, ground_weights })
}

/// Real and imaginary parts as nested row vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixExport {
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl MatrixExport {
    pub fn from_density<T: Real>(rho: &DensityMatrix<T>) -> Self {
        let d = rho.dim();
        let part = |f: fn(Complex<T>) -> T| -> Vec<Vec<f64>> {
            (0..d).map(|r| (0..d).map(|col| f(rho.get(r, col)).as_f64()).collect()).collect()
        };
        Self { real: part(|z| z.re), imag: part(|z| z.im) }
    }
}
