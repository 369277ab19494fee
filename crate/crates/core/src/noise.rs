//! Dephasing, coupling jitter and tomography error.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distill::{
    captured_levels, controlled_evolution, probe_preparation, probe_readout, project_probe, DistillationPlan,
    EnergySource,
};
use crate::error::{Error, Result};
use crate::ipea::{run_ipea_with, IpeaConfig};
use crate::model::{diagonalize, HeisenbergParams};
use crate::num::Real;
use crate::pulsec::{compile_controlled_evolution, program_duration, Qubit};
use crate::qcore::{DensityMatrix, StateVector};
use crate::tomo::StateReport;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", default)]
pub struct NoiseConfig<T> {
    /// Dephasing time per qubit in seconds; absent qubits do not dephase.
    pub t2: BTreeMap<Qubit, T>,
    /// Half-width of the uniform relative error on `J`.
    pub delta_j_rel: T,
    /// Weight of a random state mixed into the reconstructed density matrix.
    pub tomography_scale: T,
    pub seed: u64,
}

impl<T: Real> Default for NoiseConfig<T> {
    fn default() -> Self {
        Self {
            t2: [Qubit::A, Qubit::B, Qubit::C].into_iter().map(|q| (q, T::one())).collect(),
            delta_j_rel: T::lit(1e-4),
            tomography_scale: T::zero(),
            seed: 0,
        }
    }
}

impl<T: Real> NoiseConfig<T> {
    pub fn noiseless() -> Self {
        Self { t2: BTreeMap::new(), delta_j_rel: T::zero(), tomography_scale: T::zero(), seed: 0 }
    }

    /// The same `T2` on all three qubits.
    pub fn with_uniform_t2(mut self, t2: T) -> Self {
        self.t2 = [Qubit::A, Qubit::B, Qubit::C].into_iter().map(|q| (q, t2)).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((q, t)) = self.t2.iter().find(|(_, t)| !(**t > T::zero())) {
            return Err(Error::InvalidParameter(format!("T2 of qubit {q} must be positive, got {t}")));
        }
        if !(self.delta_j_rel >= T::zero()) {
            return Err(Error::InvalidParameter(format!("δJ/J must be non-negative, got {}", self.delta_j_rel)));
        }
        if !(self.tomography_scale >= T::zero() && self.tomography_scale <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "tomography scale must lie in [0, 1], got {}",
                self.tomography_scale
            )));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Scales every element whose row and column differ on `qubit` by `e^{-duration/t2}`.
pub fn dephase<T: Real>(rho: &DensityMatrix<T>, qubit: usize, duration: T, t2: T) -> Result<DensityMatrix<T>> {
    if !(t2 > T::zero()) {
        return Err(Error::InvalidParameter(format!("T2 must be positive, got {t2}")));
    }
    if !(duration >= T::zero()) {
        return Err(Error::InvalidParameter(format!("duration must be non-negative, got {duration}")));
    }
    let n = rho.n_qubits();
    if qubit >= n {
        return Err(Error::QubitOutOfRange { index: qubit, n_qubits: n });
    }
    let decay = (-duration / t2).exp();
    let bit = 1usize << (n - 1 - qubit);
    let d = rho.dim();
    let mut out = rho.clone();
    for (k, e) in out.entries_mut().iter_mut().enumerate() {
        if ((k / d) ^ (k % d)) & bit != 0 {
            *e *= decay;
        }
    }
    Ok(out)
}

/// `J' = J(1 + ε)` with `ε` uniform in `[-δ, δ]`.
pub fn jitter_j<T: Real, R: Rng + ?Sized>(p: &HeisenbergParams<T>, delta_j_rel: T, rng: &mut R) -> HeisenbergParams<T> {
    if delta_j_rel == T::zero() {
        return *p;
    }
    let d = delta_j_rel.as_f64();
    let eps = T::lit(rng.random_range(-d..=d));
    HeisenbergParams { j: p.j * (T::one() + eps), h: p.h }
}

/// `(1 - s)ρ + s·σ` with `σ` a random density matrix drawn from the
/// Ginibre ensemble.
pub fn perturb_tomography<T: Real, R: Rng + ?Sized>(
    rho: &DensityMatrix<T>,
    scale: T,
    rng: &mut R,
) -> Result<DensityMatrix<T>> {
    if scale == T::zero() {
        return Ok(rho.clone());
    }
    let d = rho.dim();
    let g: Vec<Complex<T>> = (0..d * d)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect();
    let mut sigma = vec![Complex::new(T::zero(), T::zero()); d * d];
    for r in 0..d {
        for col in 0..d {
            sigma[r * d + col] = (0..d).map(|k| g[r * d + k] * g[col * d + k].conj()).sum();
        }
    }
    let tr: T = (0..d).map(|k| sigma[k * d + k].re).sum();
    let sigma = DensityMatrix::from_unchecked(d, sigma.into_iter().map(|z| z / tr).collect());
    rho.mix(&sigma, T::one() - scale)
}

/// Everything a noisy distillation run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct NoisyRun<T> {
    pub plan: DistillationPlan<T>,
    /// Coupling the circuit actually evolved under.
    pub actual: HeisenbergParams<T>,
    /// Length of the compiled controlled evolution in seconds.
    pub duration: T,
    pub final_state: DensityMatrix<T>,
    pub projected: DensityMatrix<T>,
    pub probability: T,
    pub report: StateReport<T>,
}

/// Distillation with measured energies and the noise in `cfg`.
pub fn noisy_pipeline<T: Real>(
    trial: &StateVector<T>,
    p: &HeisenbergParams<T>,
    cfg: &NoiseConfig<T>,
) -> Result<NoisyRun<T>> {
    noisy_pipeline_with(trial, p, cfg, &EnergySource::Measured(IpeaConfig::default()))
}

/// Distillation under noise. The coupling is drawn once per run. Energies
/// come from `source`, measured under the same drawn coupling. Dephasing acts
/// once per qubit between the controlled evolution and the probe readout,
/// for the duration of the compiled controlled evolution.
pub fn noisy_pipeline_with<T: Real>(
    trial: &StateVector<T>,
    p: &HeisenbergParams<T>,
    cfg: &NoiseConfig<T>,
    source: &EnergySource<T>,
) -> Result<NoisyRun<T>> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    let actual = jitter_j(p, cfg.delta_j_rel, &mut rng);
    let levels = match source {
        EnergySource::Measured(config) => {
            let mut e: Vec<T> = run_ipea_with(trial, p, &actual, config)?.iter().map(|r| r.energy(p.j)).collect();
            e.sort_by(|a, b| a.partial_cmp(b).expect("finite energies"));
            e
        }
        EnergySource::Exact => captured_levels(trial, p, source)?,
    };
    let (Some(&e0), Some(&e1)) = (levels.first(), levels.last()) else {
        return Err(Error::NoPeak);
    };
    let plan = DistillationPlan::new(e0, e1, p.j)?;
    let duration = program_duration(&compile_controlled_evolution(plan.tau, p)?)?;

    let mut rho = trial.density().tensor(&probe_preparation(&plan).density())?;
    rho = rho.evolve(&controlled_evolution(&actual, plan.tau)?)?;
    for (qubit, &t2) in &cfg.t2 {
        rho = dephase(&rho, qubit.index(), duration, t2)?;
    }
    let final_state = rho.evolve(&probe_readout())?;
    let (projected, probability) = project_probe(&final_state, 0)?;
    let projected = perturb_tomography(&projected, cfg.tomography_scale, &mut rng)?;
    let report = StateReport::new(&projected, &diagonalize(p)?)?;
    Ok(NoisyRun { plan, actual, duration, final_state, projected, probability, report })
}
