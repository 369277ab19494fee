//! Single-probe phase estimation.
//!
//! The probe starts in `(|0⟩ + |1⟩)/√2` and controls `U(t) = e^{-iHt}` on its
//! `|1⟩` branch, so eigenstate `k` picks up `e^{-iE_k t}` there and the probe
//! coherence `⟨0|ρ|1⟩` equals `½ Σ_k |a_k|² e^{+iE_k t}`. A discrete Fourier
//! transform of that coherence over a uniform time grid peaks at the `E_k`.

use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{cis, Real};
use crate::qcore::{expm_hermitian, OperatorMatrix, SpectralGenerator, StateVector, Tensor};

/// Default number of time samples per spectrum.
pub const DEFAULT_POINTS: usize = 128;
/// Default sampling step in units of `1/J`.
pub const DEFAULT_DT_J: f64 = 0.8;
/// Peaks below this fraction of the spectrum maximum are ignored.
pub const PEAK_THRESHOLD: f64 = 0.1;

/// Probe coherence `m = ⟨0|ρ_probe|1⟩` at evolution time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ProbeRecord<T> {
    pub t: T,
    pub m: Complex<T>,
}

/// Runs the probe circuit for an arbitrary system unitary and returns the
/// probe coherence. `u` acts on the system register only.
pub fn probe_coherence<T: Real>(system: &StateVector<T>, u: &OperatorMatrix<T>) -> Result<Complex<T>> {
    if u.dim() != system.dim() {
        return Err(Error::DimensionMismatch { expected: system.dim(), got: u.dim() });
    }
    let r = T::FRAC_1_SQRT_2();
    let plus = StateVector::new(vec![Complex::new(r, T::zero()), Complex::new(r, T::zero())])?;
    let joint = system.tensor(&plus)?;
    let out = joint.apply(&u.controlled_by_last(1))?;
    let probe = out.density().partial_trace(&[system.n_qubits()])?;
    Ok(probe.get(0, 1))
}

/// Probe record for the exact propagator `e^{-iHt}` on a two-spin system.
pub fn evolve_probe<T: Real>(system: &StateVector<T>, h: &OperatorMatrix<T>, t: T) -> Result<ProbeRecord<T>> {
    check_two_spin(system, h)?;
    let u = expm_hermitian(h, t)?;
    Ok(ProbeRecord { t, m: probe_coherence(system, &u)? })
}

/// Records at `t = 0, dt, …, (n-1)dt`, rejecting grids whose Nyquist window
/// cannot hold every eigenvalue of `h`.
pub fn sample_series<T: Real>(
    system: &StateVector<T>,
    h: &OperatorMatrix<T>,
    dt: T,
    n: usize,
) -> Result<Vec<ProbeRecord<T>>> {
    check_two_spin(system, h)?;
    let generator = SpectralGenerator::new(h)?;
    let max_energy = generator.eigenvalues().iter().map(|e| e.abs()).fold(T::zero(), T::max);
    if max_energy * dt >= T::PI() {
        return Err(Error::Nyquist {
            max_energy: max_energy.as_f64(),
            dt: dt.as_f64(),
            product: (max_energy * dt).as_f64(),
        });
    }
    sample_with(system, dt, n, |t| Ok(generator.propagator(t)))
}

/// Samples the probe coherence on a uniform grid with a caller-supplied
/// propagator `t ↦ U(t)`.
pub fn sample_with<T: Real, F>(system: &StateVector<T>, dt: T, n: usize, propagator: F) -> Result<Vec<ProbeRecord<T>>>
where
    F: Fn(T) -> Result<OperatorMatrix<T>>,
{
    if !(dt > T::zero()) {
        return Err(Error::InvalidParameter(format!("sampling step must be positive, got {dt}")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {n}")));
    }
    (0..n)
        .map(|k| {
            let t = dt * T::lit(k as f64);
            Ok(ProbeRecord { t, m: probe_coherence(system, &propagator(t)?)? })
        })
        .collect()
}

fn check_two_spin<T: Real>(system: &StateVector<T>, h: &OperatorMatrix<T>) -> Result<()> {
    if system.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: system.dim() });
    }
    if h.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: h.dim() });
    }
    Ok(())
}

/// Which `n` consecutive DFT frequencies make up the spectrum grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window<T> {
    /// `(-1/(2·dt·J), 1/(2·dt·J)]` in units of `2πJ`.
    Centered,
    /// `[lower, lower + 1/(dt·J))` in units of `2πJ`.
    From(T),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectrumPoint<T> {
    /// Energy in units of `2πJ`.
    pub energy: T,
    pub amplitude: Complex<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Peak<T> {
    #[serde(rename = "energy_2piJ")]
    pub energy: T,
    /// `2|g|`, the estimated `|a_k|²`.
    pub weight: T,
    /// Half the grid spacing, in units of `2πJ`.
    pub uncertainty: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SpectrumEstimate<T> {
    /// Grid spacing in units of `2πJ`.
    pub spacing: T,
    /// Points sorted by ascending energy.
    pub grid: Vec<SpectrumPoint<T>>,
    /// Peaks sorted by ascending energy.
    pub peaks: Vec<Peak<T>>,
}

impl<T: Real> SpectrumEstimate<T> {
    /// CSV with columns `energy_2piJ,re_g,im_g,abs_g`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("energy_2piJ,re_g,im_g,abs_g\n");
        for p in &self.grid {
            let _ = writeln!(out, "{},{},{},{}", p.energy, p.amplitude.re, p.amplitude.im, p.amplitude.norm());
        }
        out
    }

    pub fn peaks_json(&self) -> String {
        serde_json::to_string_pretty(&self.peaks).expect("peaks serialize")
    }

    /// Peak whose energy is closest to `target`, measuring distance around the
    /// circular frequency window.
    pub fn nearest_peak(&self, target: T) -> Option<&Peak<T>> {
        let width = self.spacing * T::lit(self.grid.len() as f64);
        self.peaks.iter().min_by(|a, b| {
            let da = circular_distance(a.energy, target, width);
            let db = circular_distance(b.energy, target, width);
            da.partial_cmp(&db).expect("finite distances")
        })
    }

    /// Lowest-energy peak.
    pub fn ground_peak(&self) -> Option<&Peak<T>> {
        self.peaks.first()
    }
}

fn circular_distance<T: Real>(a: T, b: T, width: T) -> T {
    let d = (a - b).abs() % width;
    d.min(width - d)
}

/// `g(E) = (1/n) Σ_m m_t e^{-iEt}` over the centered Nyquist window.
pub fn compute_spectrum<T: Real>(records: &[ProbeRecord<T>], j: T) -> Result<SpectrumEstimate<T>> {
    compute_spectrum_in(records, j, Window::Centered)
}

pub fn compute_spectrum_in<T: Real>(
    records: &[ProbeRecord<T>],
    j: T,
    window: Window<T>,
) -> Result<SpectrumEstimate<T>> {
    let n = records.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 records, got {n}")));
    }
    if !(j > T::zero()) {
        return Err(Error::InvalidParameter(format!("energy unit J must be positive, got {j}")));
    }
    let dt = records[1].t - records[0].t;
    if !(dt > T::zero()) {
        return Err(Error::NonUniformSpacing { index: 1 });
    }
    let span = records[n - 1].t.abs().max(T::one());
    for (index, pair) in records.windows(2).enumerate() {
        if ((pair[1].t - pair[0].t) - dt).abs() > T::tol(1e-9) * span {
            return Err(Error::NonUniformSpacing { index: index + 1 });
        }
    }

    let nf = T::lit(n as f64);
    // frequency index k ↔ energy k/(n·dt·J) in units of 2πJ
    let per_index = T::one() / (nf * dt * j);
    let first = match window {
        Window::Centered => -(n as i64 - 1) / 2,
        Window::From(lower) => (lower / per_index).ceil().to_i64().expect("finite window"),
    };

    let tau = T::TAU();
    let grid: Vec<SpectrumPoint<T>> = (0..n as i64)
        .map(|offset| {
            let k = first + offset;
            let energy = per_index * T::lit(k as f64);
            let omega = tau * j * energy;
            let sum: Complex<T> = records.iter().map(|r| r.m * cis(-omega * r.t)).sum();
            SpectrumPoint { energy, amplitude: sum / nf }
        })
        .collect();

    let peaks = find_peaks(&grid, per_index);
    Ok(SpectrumEstimate { spacing: per_index, grid, peaks })
}

fn find_peaks<T: Real>(grid: &[SpectrumPoint<T>], spacing: T) -> Vec<Peak<T>> {
    let n = grid.len();
    let mags: Vec<T> = grid.iter().map(|p| p.amplitude.norm()).collect();
    let max = mags.iter().copied().fold(T::zero(), T::max);
    let floor = max * T::lit(PEAK_THRESHOLD);
    let half = spacing / T::lit(2.0);
    (0..n)
        .filter(|&i| {
            let prev = mags[(i + n - 1) % n];
            let next = mags[(i + 1) % n];
            max > T::zero() && mags[i] >= floor && mags[i] > prev && mags[i] > next
        })
        .map(|i| Peak { energy: grid[i].energy, weight: T::lit(2.0) * mags[i], uncertainty: half })
        .collect()
}

/// Relative half-grid uncertainty `(ΔE/2)/|E₀|` of the lowest-energy peak.
pub fn peak_uncertainty<T: Real>(spectrum: &SpectrumEstimate<T>) -> Result<T> {
    let ground = spectrum.ground_peak().ok_or(Error::NoPeak)?;
    Ok(ground.uncertainty / ground.energy.abs())
}
