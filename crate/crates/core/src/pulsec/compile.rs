use serde::{Deserialize, Serialize};

use super::{program_unitary, Axis, Pair, PulsePrimitive as P, PulseProgram, Qubit};
use crate::error::{Error, Result};
use crate::ipea::{wrap_time, Term};
use crate::model::{build_trial_state, HeisenbergParams, TrialParams};
use crate::num::{re, Real};
use crate::optim::{grid_minima, grid_points, refine_newton};
use crate::qcore::{StateVector, Tensor};

/// The two free angles of the state-preparation sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PrepAngles<T> {
    /// Coupling evolution `U^{ab}`.
    pub zz: T,
    /// Final `R_y^a`.
    pub ry_a: T,
}

impl<T: Real> PrepAngles<T> {
    /// Both angles `0.195π`. Short of unit fidelity with `U^{ab}(θ) = e^{-iθ I_z I_z}`; see [`refine_state_prep_angles`].
    pub fn printed() -> Self {
        let a = T::lit(0.195) * T::PI();
        Self { zz: a, ry_a: a }
    }
}

/// `R_y^a(π) → R_y^b(2π/3) → R_x^a(-π/2) → U^{ab}(zz) → R_x^a(π/2) → R_y^a(ry_a)`
/// followed by `R_y^c(π/2)` on the probe.
pub fn compile_state_prep<T: Real>(angles: &PrepAngles<T>) -> PulseProgram<T> {
    let pi = T::PI();
    let half = T::FRAC_PI_2();
    PulseProgram::new(vec![
        P::rot(Qubit::A, Axis::Y, pi),
        P::rot(Qubit::B, Axis::Y, T::lit(2.0) * pi / T::lit(3.0)),
        P::rot(Qubit::A, Axis::X, -half),
        P::zz(Pair::Ab, angles.zz),
        P::rot(Qubit::A, Axis::X, half),
        P::rot(Qubit::A, Axis::Y, angles.ry_a),
        P::rot(Qubit::C, Axis::Y, half),
    ])
}

/// `|⟨ψ* ⊗ +|U_prep|000⟩|²`.
pub fn state_prep_fidelity<T: Real>(angles: &PrepAngles<T>) -> Result<T> {
    let plus = StateVector::normalized(vec![re(T::one()); 2])?;
    let target = build_trial_state(&TrialParams::optimal()).tensor(&plus)?;
    let out = StateVector::basis(3, 0)?.apply(&program_unitary(&compile_state_prep(angles))?)?;
    target.overlap(&out)
}

/// Angles maximizing [`state_prep_fidelity`], searched over `(0, π]²`.
pub fn refine_state_prep_angles<T: Real>() -> Result<PrepAngles<T>> {
    let loss = |zz: T, ry_a: T| T::one() - state_prep_fidelity(&PrepAngles { zz, ry_a }).unwrap_or(T::zero());
    let xs = grid_points(T::zero(), T::PI(), 48);
    let best = grid_minima(&loss, &xs, &xs, T::tol(1e-12))[0].0;
    let [zz, ry_a] = refine_newton(&loss, best, 200)?;
    Ok(PrepAngles { zz: super::canonical_angle(zz), ry_a: super::canonical_angle(ry_a) })
}

/// `e^{-iπ I_α^b}` (or its inverse) on spin `b`, active when the probe is `|0⟩`.
/// Only `α = x, y` are available.
pub fn compile_controlled_w<T: Real>(axis: Axis, inverse: bool) -> Result<PulseProgram<T>> {
    let half = T::FRAC_PI_2();
    let sign = if inverse { -T::one() } else { T::one() };
    // R_y(π/2)·U^{bc}(±π)·R_y(-π/2) = e^{∓iπ I_x^b I_z^c}, i.e. e^{∓iπ I_x^b/2} on
    // probe |0⟩ and the opposite on |1⟩; the trailing R_x fixes |1⟩ to the identity
    let core = vec![
        P::rot(Qubit::B, Axis::Y, -half),
        P::zz(Pair::Bc, sign * T::PI()),
        P::rot(Qubit::B, Axis::Y, half),
        P::rot(Qubit::B, Axis::X, sign * half),
    ];
    let steps = match axis {
        Axis::X => core,
        Axis::Y => {
            let mut s = vec![P::rot(Qubit::B, Axis::Z, -half)];
            s.extend(core);
            s.push(P::rot(Qubit::B, Axis::Z, half));
            s
        }
        Axis::Z => return Err(Error::InvalidParameter("controlled W is compiled for x and y only".into())),
    };
    Ok(PulseProgram::new(steps))
}

/// Exchange blocks that have a controlled lowering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VTerm {
    /// `J I_x I_x`
    Xx,
    /// `J (I_y I_y + I_z I_z)`
    YyZz,
}

impl VTerm {
    fn flip_axis(self) -> Axis {
        match self {
            VTerm::Xx => Axis::Y,
            VTerm::YyZz => Axis::X,
        }
    }

    fn term(self) -> Term {
        match self {
            VTerm::Xx => Term::Xx,
            VTerm::YyZz => Term::YyZz,
        }
    }
}

impl std::str::FromStr for VTerm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xx" => Ok(VTerm::Xx),
            "yz" | "yyzz" | "yy_zz" => Ok(VTerm::YyZz),
            other => Err(Error::InvalidParameter(format!("unsupported exchange term {other:?}"))),
        }
    }
}

/// Uncontrolled `V(t/2)` on the system pair.
pub fn compile_v_half<T: Real>(term: VTerm, t: T, p: &HeisenbergParams<T>) -> PulseProgram<T> {
    let half = T::FRAC_PI_2();
    let angle = p.j * t / T::lit(2.0);
    let steps = match term {
        VTerm::Xx => vec![
            P::rot(Qubit::A, Axis::Y, -half),
            P::rot(Qubit::B, Axis::Y, -half),
            P::zz(Pair::Ab, angle),
            P::rot(Qubit::A, Axis::Y, half),
            P::rot(Qubit::B, Axis::Y, half),
        ],
        VTerm::YyZz => vec![
            P::rot(Qubit::A, Axis::X, half),
            P::rot(Qubit::B, Axis::X, half),
            P::zz(Pair::Ab, angle),
            P::rot(Qubit::A, Axis::X, -half),
            P::rot(Qubit::B, Axis::X, -half),
            P::zz(Pair::Ab, angle),
        ],
    };
    PulseProgram::new(steps)
}

/// `V(t)` on the system, active when the probe is `|1⟩`, as
/// `ctrl-W → V(t/2) → ctrl-W† → V(t/2)`. On probe `|0⟩` the flip turns the
/// second half-step into the inverse of the first.
pub fn compile_controlled_v<T: Real>(term: VTerm, t: T, p: &HeisenbergParams<T>) -> Result<PulseProgram<T>> {
    check_time(t)?;
    let axis = term.flip_axis();
    let v = compile_v_half(term, t, p);
    Ok(compile_controlled_w(axis, false)?.then(v.clone()).then(compile_controlled_w(axis, true)?).then(v))
}

/// `(h·t) mod 2π`.
fn field_angle<T: Real>(t: T, p: &HeisenbergParams<T>) -> T {
    let x = p.h * t;
    let tau = T::TAU();
    x - tau * (x / tau).floor()
}

/// `L_z(t) = e^{-ih(I_z^a + I_z^b)t}` as two `z` rotations.
pub fn compile_local_field<T: Real>(t: T, p: &HeisenbergParams<T>) -> Result<PulseProgram<T>> {
    check_time(t)?;
    let phi = field_angle(t, p);
    Ok(PulseProgram::new(vec![P::rot(Qubit::A, Axis::Z, phi), P::rot(Qubit::B, Axis::Z, phi)]))
}

/// `L_z(t)` active when the probe is `|1⟩`:
/// `e^{-iφ I_z^j (1/2 - I_z^c)} = R_z^j(φ/2)·U^{jc}(-φ)` for each system spin.
pub fn compile_controlled_local_field<T: Real>(t: T, p: &HeisenbergParams<T>) -> Result<PulseProgram<T>> {
    check_time(t)?;
    let phi = field_angle(t, p);
    let half = phi / T::lit(2.0);
    Ok(PulseProgram::new(vec![
        P::rot(Qubit::A, Axis::Z, half),
        P::zz(Pair::Ac, -phi),
        P::rot(Qubit::B, Axis::Z, half),
        P::zz(Pair::Bc, -phi),
    ]))
}

/// Controlled `e^{-iHt}` with each factor's time wrapped to its period.
pub fn compile_controlled_evolution<T: Real>(t: T, p: &HeisenbergParams<T>) -> Result<PulseProgram<T>> {
    check_time(t)?;
    let mut prog = compile_controlled_local_field(t, p)?;
    for term in [VTerm::YyZz, VTerm::Xx] {
        let tau = wrap_time(t, term.term(), p)?;
        prog = prog.then(compile_controlled_v(term, tau, p)?);
    }
    Ok(prog)
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter(format!("evolution time must be non-negative, got {t}")));
    }
    Ok(())
}
