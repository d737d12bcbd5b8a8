//! Running a parsed circuit on each engine.

use thiserror::Error;

use super::{validate, AmpExpr, Circuit, Element, PhaseExpr, ValidationError};
use crate::fock::{bs_transform, phase_transform, FockError, FockState, DEFAULT_CUTOFF};
use crate::numerics::{
    bs_matrix, cis, compose, phase_matrix, ComplexAmp, Convention, ElementMatrix, FieldVector,
    NumericsError, PortSlot,
};
use crate::phase_basis::{
    superposed_matrix, BasisCase, BasisRelation, Combination, PhaseBasisError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("invalid circuit: {0}")]
    Invalid(#[from] ValidationError),
    #[error("parameter '{0}' has no value")]
    UnboundParameter(String),
    #[error("{engine} engine cannot evaluate element {index}: {reason}")]
    Unsupported {
        engine: &'static str,
        index: usize,
        reason: String,
    },
    #[error("input on port '{port}' has |amp|² = {value}, not a photon count")]
    NotPhotonCount { port: char, value: f64 },
    #[error(transparent)]
    Fock(#[from] FockError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    PhaseBasis(#[from] PhaseBasisError),
}

/// Values for the free phase parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Bindings {
    pub theta: Option<f64>,
    pub zeta: Option<f64>,
}

impl Bindings {
    pub fn new(theta: Option<f64>, zeta: Option<f64>) -> Self {
        Bindings { theta, zeta }
    }

    pub fn get(&self, name: &str) -> Result<f64, EvalError> {
        let v = match name {
            "theta" => self.theta,
            "zeta" => self.zeta,
            _ => None,
        };
        v.ok_or_else(|| EvalError::UnboundParameter(name.to_string()))
    }
}

impl PhaseExpr {
    pub fn eval(&self, b: &Bindings) -> Result<f64, EvalError> {
        match self {
            PhaseExpr::Literal(v) => Ok(*v),
            PhaseExpr::Param { name, negated } => {
                let v = b.get(name)?;
                Ok(if *negated { -v } else { v })
            }
        }
    }
}

impl AmpExpr {
    pub fn eval(&self, b: &Bindings) -> Result<ComplexAmp, EvalError> {
        Ok(cis(self.phase.eval(b)?) * self.magnitude)
    }
}

fn input_vector(c: &Circuit, b: &Bindings) -> Result<FieldVector, EvalError> {
    let mut v = FieldVector::zero();
    for input in &c.inputs {
        v.amps[input.port.slot().index()] = input.amp.eval(b)?;
    }
    Ok(v)
}

fn propagate(
    c: &Circuit,
    b: &Bindings,
    splitter: impl Fn(usize, &Element) -> Result<ElementMatrix, EvalError>,
) -> Result<FieldVector, EvalError> {
    validate(c)?;
    let mut mats = Vec::with_capacity(c.elements.len());
    for (index, e) in c.elements.iter().enumerate() {
        let m = match e {
            Element::Phase { port, phase } => phase_matrix(port.slot(), phase.eval(b)?)?,
            other => splitter(index, other)?,
        };
        mats.push(m);
    }
    mats.reverse();
    let total = compose(&mats)?;
    let (d1, d2) = c.detectors;
    let out = total.apply(&input_vector(c, b)?);
    Ok(FieldVector::new(
        out.amps[d1.slot().index()],
        out.amps[d2.slot().index()],
    ))
}

/// Field amplitudes at the two detectors, coherence-optics engine.
pub fn run_wave(c: &Circuit, b: &Bindings) -> Result<FieldVector, EvalError> {
    propagate(c, b, |index, e| match e {
        Element::Bs(sign) => Ok(bs_matrix(*sign, Convention::Unitary)),
        _ => Err(EvalError::Unsupported {
            engine: "wave",
            index,
            reason: "superposed splitters need the phase_basis engine".into(),
        }),
    })
}

/// Field amplitudes at the two detectors when every splitter is a
/// phase-basis mixture; a plain `bs s` is the same/symmetric mixture in
/// basis `s`. Also reports whether any non-unitary mixture was used.
pub fn run_phase_basis(c: &Circuit, b: &Bindings) -> Result<(FieldVector, bool), EvalError> {
    let mut non_unitary = false;
    let out = propagate(c, b, |_, e| {
        let case = match e {
            Element::Bs(sign) => BasisCase::new(BasisRelation::Same, Combination::Symmetric, *sign),
            Element::BsSuperposed(case) => *case,
            Element::Phase { .. } => unreachable!("phase shifters handled by propagate"),
        };
        Ok(superposed_matrix(case, Convention::Unitary)?)
    })?;
    for e in &c.elements {
        if let Element::BsSuperposed(case) = e {
            non_unitary |= case.relation == BasisRelation::Opposite;
        }
    }
    Ok((out, non_unitary))
}

/// Output Fock state over the two detector modes.
///
/// Each input's `|amp|²` is read as its photon count and must be a
/// non-negative integer; the amplitude's phase multiplies every photon.
pub fn run_fock(c: &Circuit, b: &Bindings) -> Result<FockState, EvalError> {
    validate(c)?;
    let mut counts = [0u32; 2];
    for input in &c.inputs {
        let value = input.amp.magnitude * input.amp.magnitude;
        let n = value.round();
        if (value - n).abs() > 1e-9 || n > f64::from(DEFAULT_CUTOFF) {
            return Err(EvalError::NotPhotonCount {
                port: input.port.letter(),
                value,
            });
        }
        counts[input.port.slot().index()] = n as u32;
    }
    let mut state = FockState::basis(counts[0], counts[1])?;
    for input in &c.inputs {
        if input.amp.magnitude < 0.0 {
            state = phase_transform(&state, input.port.slot(), std::f64::consts::PI)?;
        }
        state = phase_transform(&state, input.port.slot(), input.amp.phase.eval(b)?)?;
    }
    for (index, e) in c.elements.iter().enumerate() {
        state = match e {
            Element::Bs(sign) => bs_transform(&state, *sign)?,
            Element::Phase { port, phase } => phase_transform(&state, port.slot(), phase.eval(b)?)?,
            Element::BsSuperposed(_) => {
                return Err(EvalError::Unsupported {
                    engine: "fock",
                    index,
                    reason: "superposed splitters are not unitary".into(),
                })
            }
        };
    }
    if c.detectors.0.slot() == PortSlot::Second {
        state = swap_modes(&state)?;
    }
    Ok(state)
}

fn swap_modes(state: &FockState) -> Result<FockState, EvalError> {
    let swapped = state
        .iter()
        .map(|(o, a)| (crate::fock::OccPair::new(o.n_second, o.n_first), *a));
    Ok(FockState::from_amplitudes(swapped, state.cutoff())?)
}
