//! Metrics on reconstructed density matrices.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{zeeman_term, Label, SpectrumTable};
use crate::num::Real;
use crate::qcore::{DensityMatrix, StateVector};

/// `⟨target|ρ|target⟩`, clamped to `[0, 1]`.
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, target: &StateVector<T>) -> Result<T> {
    Ok(rho.population(target)?.max(T::zero()).min(T::one()))
}

/// Purity `Q = Tr ρ²` and, with a target, projection `P = F/√Q`.
pub fn purity_projection<T: Real>(rho: &DensityMatrix<T>, target: Option<&StateVector<T>>) -> Result<(T, Option<T>)> {
    let q = rho.purity();
    let p = match target {
        Some(t) => Some(fidelity(rho, t)? / q.sqrt()),
        None => None,
    };
    Ok((q, p))
}

/// `Tr[ρ(I_z ⊗ 1 + 1 ⊗ I_z)]` on a two-spin state.
pub fn magnetization<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: rho.dim() });
    }
    Ok(rho.expectation(&zeeman_term()?)?.re)
}

/// Population of every labelled eigenvector.
pub fn spectral_weights<T: Real>(rho: &DensityMatrix<T>, spectrum: &SpectrumTable<T>) -> Result<BTreeMap<Label, T>> {
    spectrum.levels.iter().map(|level| Ok((level.label, rho.population(&level.vector)?))).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StateReport<T> {
    pub fidelity: T,
    pub purity: T,
    pub projection: T,
    pub magnetization: T,
    pub weights: BTreeMap<Label, T>,
}

impl<T: Real> StateReport<T> {
    /// Metrics of a two-spin state against the ground vector of `spectrum`.
    pub fn new(rho: &DensityMatrix<T>, spectrum: &SpectrumTable<T>) -> Result<Self> {
        let target = &spectrum.ground().vector;
        let fidelity = fidelity(rho, target)?;
        let (purity, projection) = purity_projection(rho, Some(target))?;
        Ok(Self {
            fidelity,
            purity,
            projection: projection.expect("target supplied"),
            magnetization: magnetization(rho)?,
            weights: spectral_weights(rho, spectrum)?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV with columns `label,weight`.
    pub fn weights_csv(&self) -> String {
        let mut out = String::from("label,weight\n");
        for (label, w) in &self.weights {
            let _ = writeln!(out, "{label},{w}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_trial_state, diagonalize, HeisenbergParams, TrialParams};
    use crate::qcore::OperatorMatrix;

    fn psi_star() -> StateVector<f64> {
        build_trial_state(&TrialParams::optimal())
    }

    fn table(h: f64) -> SpectrumTable<f64> {
        diagonalize(&HeisenbergParams::new(1.0, h).unwrap()).unwrap()
    }

    #[test]
    fn fidelity_examples() {
        let s = Label::Singlet.state::<f64>();
        assert!((fidelity(&s.density(), &s).unwrap() - 1.0).abs() < 1e-15);
        assert!((fidelity(&psi_star().density(), &s).unwrap() - 0.5).abs() < 1e-15);
        let mm = DensityMatrix::maximally_mixed(4).unwrap();
        assert!((fidelity(&mm, &s).unwrap() - 0.25).abs() < 1e-15);
        assert!(fidelity(&mm, &StateVector::basis(1, 0).unwrap()).is_err());
    }

    #[test]
    fn purity_and_projection() {
        let s = Label::Singlet.state::<f64>();
        let (q, p) = purity_projection(&psi_star().density(), Some(&s)).unwrap();
        assert!((q - 1.0).abs() < 1e-15);
        assert!((p.unwrap() - 0.5).abs() < 1e-15);
        let mm = DensityMatrix::<f64>::maximally_mixed(4).unwrap();
        assert!((purity_projection(&mm, None).unwrap().0 - 0.25).abs() < 1e-15);

        // 0.9|S⟩⟨S| + 0.1·I/4 has eigenvalues 0.925, 0.025 (×3)
        let rho = s.density().mix(&mm, 0.9).unwrap();
        let (q, p) = purity_projection(&rho, Some(&s)).unwrap();
        let q_expect = 0.925f64.powi(2) + 3.0 * 0.025f64.powi(2);
        assert!((q - q_expect).abs() < 1e-14);
        assert!((p.unwrap() - 0.925 / q_expect.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn magnetization_examples() {
        assert!(magnetization(&Label::Singlet.state::<f64>().density()).unwrap().abs() < 1e-15);
        assert!((magnetization(&Label::TripletMinus.state::<f64>().density()).unwrap() + 1.0).abs() < 1e-15);
        assert!((magnetization(&psi_star().density()).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn trial_state_weights() {
        let w = spectral_weights(&psi_star().density(), &table(0.0)).unwrap();
        assert!((w[&Label::Singlet] - 0.5).abs() < 1e-12);
        assert!((w[&Label::TripletMinus] - 0.5).abs() < 1e-12);
        assert!(w[&Label::TripletZero].abs() < 1e-12);
        assert!(w[&Label::TripletPlus].abs() < 1e-12);
    }

    #[test]
    fn report_exports() {
        let r = StateReport::new(&psi_star().density(), &table(0.0)).unwrap();
        assert!((r.projection - r.fidelity / r.purity.sqrt()).abs() < 1e-12);
        let csv = r.weights_csv();
        assert_eq!(csv.lines().next(), Some("label,weight"));
        assert!(csv.contains("T-1,"));
        let back: StateReport<f64> = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn unit_trace_weights() {
        let rho = DensityMatrix::maximally_mixed(4).unwrap().evolve(&OperatorMatrix::identity(4)).unwrap();
        let total: f64 = spectral_weights(&rho, &table(0.4)).unwrap().values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
