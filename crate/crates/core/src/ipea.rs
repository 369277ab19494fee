//! Iterative phase estimation in base 10.
//!
//! Each eigenvalue is written as `E = 2πJ · sign · 0.x₁x₂x₃…`. The first
//! iteration reads the sign and `x₁` from an ordinary probe spectrum. Iteration
//! `n` evolves `10^{n-1}` times longer, removes the phase of the digits already
//! known, and reads the next digit from the residual peak.
//!
//! Long evolutions are never simulated directly. The propagator is split as
//! `V_x(t)·V_yz(t)·L_z(t)` and every factor is reduced by its own period. Note
//! that the field term commutes with `V_x·V_yz` but not with `V_x` or `V_yz`
//! alone, so the two exchange factors must stay adjacent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, exchange_term, zeeman_term, HeisenbergParams};
use crate::num::{cis, Real};
use crate::pea::{compute_spectrum_in, probe_coherence, ProbeRecord, SpectrumEstimate, Window};
use crate::qcore::{eigh, OperatorMatrix, SpectralGenerator, StateVector};

/// Base-10 digit expansion `sign · 0.x₁x₂…` in units of `2πJ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitString {
    pub sign: i8,
    pub digits: Vec<u8>,
}

impl DigitString {
    pub fn new(sign: i8, digits: Vec<u8>) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidParameter(format!("sign must be ±1, got {sign}")));
        }
        if let Some(d) = digits.iter().find(|&&d| d > 9) {
            return Err(Error::InvalidParameter(format!("digit {d} outside 0..9")));
        }
        let s = Self { sign, digits };
        if s.value::<f64>().abs() >= 0.5 {
            return Err(Error::InvalidParameter(format!("|{s}| must stay below 0.5")));
        }
        Ok(s)
    }

    fn from_integer(sign: i8, k: u64, n_digits: usize) -> Self {
        let mut digits = vec![0u8; n_digits];
        let mut rest = k;
        for d in digits.iter_mut().rev() {
            *d = (rest % 10) as u8;
            rest /= 10;
        }
        Self { sign, digits }
    }

    /// Signed value in units of `2πJ`.
    pub fn value<T: Real>(&self) -> T {
        let mut v = T::zero();
        let mut place = T::one();
        let tenth = T::lit(0.1);
        for &d in &self.digits {
            place *= tenth;
            v += place * T::lit(d as f64);
        }
        if self.sign < 0 {
            -v
        } else {
            v
        }
    }

    /// Value in the same units as `J`.
    pub fn energy<T: Real>(&self, j: T) -> T {
        self.value::<T>() * T::TAU() * j
    }
}

impl std::fmt::Display for DigitString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = if self.sign < 0 { "-" } else { "" };
        write!(f, "{sign}0.")?;
        if self.digits.is_empty() {
            write!(f, "0")?;
        }
        for d in &self.digits {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// One factor of the split propagator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Term {
    /// `J I_x I_x`
    Xx,
    /// `J (I_y I_y + I_z I_z)`
    YyZz,
    /// `h (I_z ⊗ 1 + 1 ⊗ I_z)`
    LocalZ,
}

impl Term {
    pub const ALL: [Term; 3] = [Term::Xx, Term::YyZz, Term::LocalZ];

    pub fn generator<T: Real>(self, p: &HeisenbergParams<T>) -> Result<OperatorMatrix<T>> {
        let m = match self {
            Term::Xx => exchange_term(&[0])?.scale(p.j),
            Term::YyZz => exchange_term(&[1, 2])?.scale(p.j),
            Term::LocalZ => zeeman_term()?.scale(p.h),
        };
        m.with_role(crate::qcore::Role::Hermitian)
    }

    /// Shortest time after which the factor returns exactly to the identity,
    /// or `None` when the generator vanishes.
    pub fn period<T: Real>(self, p: &HeisenbergParams<T>) -> Option<T> {
        match self {
            // I_x I_x has eigenvalues ±1/4; I_y I_y + I_z I_z has 0 and ±1/2
            Term::Xx | Term::YyZz => Some(T::lit(8.0) * T::PI() / p.j),
            Term::LocalZ if p.h == T::zero() => None,
            Term::LocalZ => Some(T::TAU() / p.h.abs()),
        }
    }
}

/// Reduces `t` modulo the period of `term`, so `e^{-iGτ} = e^{-iGt}`.
pub fn wrap_time<T: Real>(t: T, term: Term, p: &HeisenbergParams<T>) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter(format!("evolution time must be non-negative, got {t}")));
    }
    p.validate()?;
    Ok(match term.period(p) {
        Some(period) => t % period,
        None => t,
    })
}

/// Number of whole exchange periods removed from `t`.
pub fn wrap_count<T: Real>(t: T, p: &HeisenbergParams<T>) -> u64 {
    let period = T::lit(8.0) * T::PI() / p.j;
    (t / period).floor().to_u64().unwrap_or(0)
}

/// The split propagator `V_x(τ_x)·V_yz(τ_yz)·L_z(τ_z)` with cached generators.
#[derive(Clone, Debug)]
pub struct WrappedEvolution<T> {
    params: HeisenbergParams<T>,
    factors: Vec<(Term, SpectralGenerator<T>)>,
}

impl<T: Real> WrappedEvolution<T> {
    pub fn new(p: &HeisenbergParams<T>) -> Result<Self> {
        p.validate()?;
        let factors = Term::ALL
            .iter()
            .map(|&term| Ok((term, SpectralGenerator::new(&term.generator(p)?)?)))
            .collect::<Result<_>>()?;
        Ok(Self { params: *p, factors })
    }

    pub fn params(&self) -> &HeisenbergParams<T> {
        &self.params
    }

    pub fn unitary(&self, t: T) -> Result<OperatorMatrix<T>> {
        let mut u = OperatorMatrix::identity(4);
        for (term, generator) in &self.factors {
            let tau = wrap_time(t, *term, &self.params)?;
            u = u.matmul(&generator.propagator(tau))?;
        }
        u.with_role(crate::qcore::Role::Unitary)
    }
}

/// `e^{-iHt}|system⟩` computed through the wrapped factors.
pub fn evolve_wrapped<T: Real>(system: &StateVector<T>, p: &HeisenbergParams<T>, t: T) -> Result<StateVector<T>> {
    system.apply(&WrappedEvolution::new(p)?.unitary(t)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IpeaConfig<T> {
    pub points: usize,
    /// Base sampling step, in units of `1/J`.
    pub dt_j: T,
    pub iterations: usize,
    /// Peaks of the first spectrum lighter than this are not refined.
    pub weight_threshold: T,
}

impl<T: Real> Default for IpeaConfig<T> {
    fn default() -> Self {
        Self {
            points: crate::pea::DEFAULT_POINTS,
            dt_j: T::lit(crate::pea::DEFAULT_DT_J),
            iterations: 5,
            weight_threshold: T::lit(0.05),
        }
    }
}

impl<T: Real> IpeaConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 points, got {}", self.points)));
        }
        // the residual window [(1-W)/2, (1+W)/2) must contain [0, 1)
        if !(self.dt_j > T::zero() && self.dt_j < T::one()) {
            return Err(Error::InvalidParameter(format!("J·dt must lie in (0, 1), got {}", self.dt_j)));
        }
        if self.iterations == 0 || self.iterations > 15 {
            return Err(Error::InvalidParameter(format!("iterations must lie in 1..=15, got {}", self.iterations)));
        }
        Ok(())
    }

    fn window_width(&self) -> T {
        T::one() / self.dt_j
    }
}

/// Outcome of one refinement step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IterationReport<T> {
    pub iteration: usize,
    /// Evolution time multiplier `10^{n-1}`.
    pub scale: T,
    /// Residual peak position in next-digit units.
    pub residual: T,
    pub digit: u8,
    /// Value after this iteration, in units of `2πJ`.
    pub value: T,
    /// Set when an earlier digit had to be adjusted before this one was read.
    pub corrected: bool,
    pub spectrum: SpectrumEstimate<T>,
}

impl<T: Real> IterationReport<T> {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Digit string and per-iteration history for one eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Refinement<T> {
    pub estimate: DigitString,
    pub reports: Vec<IterationReport<T>>,
}

impl<T: Real> Refinement<T> {
    /// Centre of the final digit interval, in units of `2πJ`.
    pub fn value(&self) -> T {
        let half = self.uncertainty();
        let v = self.estimate.value::<T>();
        if self.estimate.sign < 0 {
            v - half
        } else {
            v + half
        }
    }

    /// Half the width of the last digit, in units of `2πJ`.
    pub fn uncertainty(&self) -> T {
        T::lit(0.5) * T::lit(10f64.powi(-(self.estimate.digits.len() as i32)))
    }

    /// Point estimate in the same units as `J`.
    pub fn energy(&self, j: T) -> T {
        self.value() * T::TAU() * j
    }
}

/// Sign and integer prefix being refined, plus the last residual for peak tracking.
#[derive(Clone, Debug)]
struct Branch<T> {
    sign: i8,
    prefix: u64,
    n_digits: usize,
    predicted: T,
}

/// Samples the probe signal for `actual` at times `scale · k · dt`, and maps
/// it so that the branch's unknown residual appears at positive frequency.
struct Sampler<'a, T> {
    system: &'a StateVector<T>,
    evolution: WrappedEvolution<T>,
    nominal_j: T,
    dt: T,
    points: usize,
}

impl<T: Real> Sampler<'_, T> {
    fn raw(&self, scale: T) -> Result<Vec<ProbeRecord<T>>> {
        (0..self.points)
            .map(|k| {
                let t = self.dt * T::lit(k as f64);
                let u = self.evolution.unitary(t * scale)?;
                Ok(ProbeRecord { t, m: probe_coherence(self.system, &u)? })
            })
            .collect()
    }

    /// Conjugates for negative branches and removes `2πJ·prefix·t'`.
    fn demodulate(&self, raw: &[ProbeRecord<T>], scale: T, branch: &Branch<T>) -> Vec<ProbeRecord<T>> {
        let known = T::lit(branch.prefix as f64) * T::lit(10f64.powi(-(branch.n_digits as i32)));
        let omega = T::TAU() * self.nominal_j * known * scale;
        raw.iter()
            .map(|r| {
                let m = if branch.sign < 0 { r.m.conj() } else { r.m };
                ProbeRecord { t: r.t, m: m * cis(-omega * r.t) }
            })
            .collect()
    }
}

/// Reads the next digit of `branch` at iteration `iteration` (1-based, ≥ 2),
/// adjusting the prefix whenever the residual leaves `[0, 1)`.
fn refine_step<T: Real>(
    sampler: &Sampler<'_, T>,
    config: &IpeaConfig<T>,
    branch: &mut Branch<T>,
    iteration: usize,
) -> Result<IterationReport<T>> {
    let scale = T::lit(10f64.powi(iteration as i32 - 1));
    let width = config.window_width();
    let lower = (T::one() - width) / T::lit(2.0);
    let raw = sampler.raw(scale)?;
    let mut corrected = false;

    // one adjustment is enough without noise; allow a few under jitter
    for _ in 0..4 {
        let records = sampler.demodulate(&raw, scale, branch);
        let spectrum = compute_spectrum_in(&records, sampler.nominal_j, Window::From(lower))?;
        let peak = *spectrum.nearest_peak(branch.predicted).ok_or(Error::NoPeak)?;
        let r = peak.energy;
        if r < T::zero() {
            corrected = true;
            if branch.prefix == 0 {
                branch.sign = -branch.sign;
                branch.predicted = -r;
            } else {
                branch.prefix -= 1;
                branch.predicted = r + T::one();
            }
            continue;
        }
        if r >= T::one() {
            corrected = true;
            branch.prefix += 1;
            branch.predicted = r - T::one();
            continue;
        }
        let digit = (T::lit(10.0) * r - T::lit(1e-12)).floor().max(T::zero()).min(T::lit(9.0));
        let digit = digit.to_u8().expect("digit in range");
        branch.prefix = branch.prefix * 10 + digit as u64;
        branch.n_digits += 1;
        branch.predicted = T::lit(10.0) * r - T::lit(digit as f64);
        let estimate = DigitString::from_integer(branch.sign, branch.prefix, branch.n_digits);
        return Ok(IterationReport {
            iteration,
            scale,
            residual: r,
            digit,
            value: estimate.value(),
            corrected,
            spectrum,
        });
    }
    Err(Error::NoConvergence { what: "digit correction", iterations: 4 })
}

/// Refines every eigenvalue visible in the first probe spectrum.
pub fn run_ipea<T: Real>(
    system: &StateVector<T>,
    p: &HeisenbergParams<T>,
    config: &IpeaConfig<T>,
) -> Result<Vec<Refinement<T>>> {
    run_ipea_with(system, p, p, config)
}

/// As [`run_ipea`], but the circuit evolves under `actual` while digits are
/// read in units of the `nominal` coupling.
pub fn run_ipea_with<T: Real>(
    system: &StateVector<T>,
    nominal: &HeisenbergParams<T>,
    actual: &HeisenbergParams<T>,
    config: &IpeaConfig<T>,
) -> Result<Vec<Refinement<T>>> {
    config.validate()?;
    nominal.validate()?;
    if system.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: system.dim() });
    }
    let dt = config.dt_j / nominal.j;
    let max_energy = eigh(&build_hamiltonian(actual)?)?.values.iter().map(|e| e.abs()).fold(T::zero(), T::max);
    if max_energy * dt >= T::PI() {
        return Err(Error::Nyquist {
            max_energy: max_energy.as_f64(),
            dt: dt.as_f64(),
            product: (max_energy * dt).as_f64(),
        });
    }
    let sampler =
        Sampler { system, evolution: WrappedEvolution::new(actual)?, nominal_j: nominal.j, dt, points: config.points };

    let first = compute_spectrum_in(&sampler.raw(T::one())?, nominal.j, Window::Centered)?;
    let mut out = Vec::new();
    for peak in &first.peaks {
        if peak.weight < config.weight_threshold {
            log::warn!(
                "skipping eigenvalue near {} (2πJ): weight {} below {}",
                peak.energy,
                peak.weight,
                config.weight_threshold
            );
            continue;
        }
        let sign: i8 = if peak.energy < T::zero() { -1 } else { 1 };
        let magnitude = peak.energy.abs();
        let digit = (T::lit(10.0) * magnitude - T::lit(1e-12)).floor().max(T::zero()).min(T::lit(4.0));
        let digit = digit.to_u8().expect("digit in range");
        let mut branch = Branch {
            sign,
            prefix: digit as u64,
            n_digits: 1,
            predicted: T::lit(10.0) * magnitude - T::lit(digit as f64),
        };
        let mut reports = vec![IterationReport {
            iteration: 1,
            scale: T::one(),
            residual: magnitude,
            digit,
            value: DigitString::from_integer(sign, branch.prefix, 1).value(),
            corrected: false,
            spectrum: first.clone(),
        }];
        for iteration in 2..=config.iterations {
            reports.push(refine_step(&sampler, config, &mut branch, iteration)?);
        }
        let estimate = DigitString::from_integer(branch.sign, branch.prefix, branch.n_digits);
        log::info!("eigenvalue {estimate} (2πJ) = {} (J)", estimate.energy(nominal.j));
        out.push(Refinement { estimate, reports });
    }
    if out.is_empty() {
        return Err(Error::NoPeak);
    }
    Ok(out)
}

/// Accumulated phase error `8·n·π·δJ/J` after `n_wraps` exchange periods.
pub fn phase_error_bound<T: Real>(n_wraps: u64, delta_j_rel: T) -> T {
    T::lit(8.0) * T::lit(n_wraps as f64) * T::PI() * delta_j_rel
}
