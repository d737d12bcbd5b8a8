//! Line-oriented description format for two-port interferometer circuits.
//!
//! ```text
//! file   = header stmt+
//! header = "circuit" NAME
//! stmt   = input | elem | detect
//! input  = "in" PORT AMPEXPR
//! elem   = "bs" SIGN | "bs" "superposed" CASE | "phase" PORT PHEXPR
//! detect = "detect" PORT PORT
//! ```
//!
//! `#` starts a comment. Ports are single letters; every beam splitter
//! advances to the next pair of letters, so inputs live on `a`/`b`, the
//! ports after the first splitter are `c`/`d`, after the second `e`/`f`,
//! and so on. `SIGN` is `+` or `-`. `CASE` is
//! `(same|opposite) (symmetric|antisymmetric) SIGN`.
//!
//! Phases are a literal (`0.3`, `pi`, `-pi/2`, `2pi`, `3*pi/4`) or one of
//! the parameters `theta`/`zeta`, optionally negated. Amplitudes are a real
//! number, `exp(i*PHASE)`, or `NUMBER*exp(i*PHASE)`.
//!
//! ```text
//! circuit mzi
//! in a 1
//! bs +
//! phase d zeta
//! bs +
//! detect e f
//! ```

mod eval;
mod lexer;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::numerics::{BasisSign, PortSlot};
use crate::phase_basis::{BasisCase, BasisRelation, Combination};

pub use eval::{run_fock, run_phase_basis, run_wave, Bindings, EvalError};
pub use parser::{parse, parse_angle};

/// Free phase parameters a circuit may reference.
pub const PARAMETERS: [&str; 2] = ["theta", "zeta"];

/// Names accepted by [`builtin`].
pub const BUILTINS: [&str; 3] = ["hom", "mzi", "one_input_bs"];

/// Highest usable layer: letters `a`..`z` give 13 port pairs.
const MAX_LAYER: usize = 12;

const HOM_SOURCE: &str = "\
# two photons on one balanced splitter, b delayed by theta
circuit hom
in a 1
in b exp(i*theta)
bs +
detect c d
";

const MZI_SOURCE: &str = "\
# single input through splitter, path phase zeta on d, splitter
circuit mzi
in a 1
bs +
phase d zeta
bs +
detect e f
";

const ONE_INPUT_SOURCE: &str = "\
circuit one_input_bs
in a 1
bs +
detect c d
";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    /// The offending source line.
    pub snippet: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("element {index}: {message}")]
    Element { index: usize, message: String },
    #[error("{0}")]
    Circuit(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown builtin circuit '{0}' (expected one of hom, mzi, one_input_bs)")]
pub struct UnknownBuiltin(pub String);

/// A port letter `a`..`z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Port(u8);

impl Port {
    pub fn from_letter(c: char) -> Option<Port> {
        c.is_ascii_lowercase().then(|| Port(c as u8 - b'a'))
    }

    pub fn letter(self) -> char {
        (b'a' + self.0) as char
    }

    /// Index of the port pair: 0 for `a`/`b`, 1 for `c`/`d`, …
    pub fn layer(self) -> usize {
        usize::from(self.0 / 2)
    }

    pub fn slot(self) -> PortSlot {
        if self.0.is_multiple_of(2) {
            PortSlot::First
        } else {
            PortSlot::Second
        }
    }

    pub fn at(layer: usize, slot: PortSlot) -> Option<Port> {
        let idx = layer * 2 + slot.index();
        (idx < 26).then_some(Port(idx as u8))
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseExpr {
    /// Radians.
    Literal(f64),
    Param {
        name: String,
        negated: bool,
    },
}

impl PhaseExpr {
    pub fn param_name(&self) -> Option<&str> {
        match self {
            PhaseExpr::Param { name, .. } => Some(name),
            PhaseExpr::Literal(_) => None,
        }
    }
}

impl fmt::Display for PhaseExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseExpr::Literal(v) => f.write_str(&format_angle(*v)),
            PhaseExpr::Param { name, negated } => {
                if *negated {
                    f.write_str("-")?;
                }
                f.write_str(name)
            }
        }
    }
}

/// Renders an angle so that [`parse_angle`] reads back the identical value,
/// preferring `kpi/d` forms when one matches bit-for-bit.
pub fn format_angle(v: f64) -> String {
    if v != 0.0 {
        for d in [1u32, 2, 3, 4, 6, 8, 12] {
            let k = (v * f64::from(d) / std::f64::consts::PI).round();
            if k != 0.0 && k.abs() <= 1000.0 && parser::pi_multiple(k, f64::from(d)) == v {
                let mut s = match k as i64 {
                    1 => "pi".to_string(),
                    -1 => "-pi".to_string(),
                    k => format!("{k}pi"),
                };
                if d != 1 {
                    s.push_str(&format!("/{d}"));
                }
                return s;
            }
        }
    }
    format!("{v:?}")
}

/// `magnitude · e^{i·phase}` in units of `E_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmpExpr {
    pub magnitude: f64,
    pub phase: PhaseExpr,
}

impl fmt::Display for AmpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.phase == PhaseExpr::Literal(0.0) {
            return write!(f, "{:?}", self.magnitude);
        }
        if self.magnitude == 1.0 {
            write!(f, "exp(i*{})", self.phase)
        } else if self.magnitude == -1.0 {
            write!(f, "-exp(i*{})", self.phase)
        } else {
            write!(f, "{:?}*exp(i*{})", self.magnitude, self.phase)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Input {
    pub port: Port,
    pub amp: AmpExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Bs(BasisSign),
    BsSuperposed(BasisCase),
    Phase { port: Port, phase: PhaseExpr },
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Bs(s) => write!(f, "bs {s}"),
            Element::BsSuperposed(case) => {
                let rel = match case.relation {
                    BasisRelation::Same => "same",
                    BasisRelation::Opposite => "opposite",
                };
                let comb = match case.combination {
                    Combination::Symmetric => "symmetric",
                    Combination::Antisymmetric => "antisymmetric",
                };
                write!(f, "bs superposed {rel} {comb} {}", case.primary_sign)
            }
            Element::Phase { port, phase } => write!(f, "phase {port} {phase}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub name: String,
    pub inputs: Vec<Input>,
    pub elements: Vec<Element>,
    pub detectors: (Port, Port),
}

impl Circuit {
    /// Number of splitters, which is also the index of the output layer.
    pub fn splitter_count(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e, Element::Bs(_) | Element::BsSuperposed(_)))
            .count()
    }

    /// Parameter names referenced anywhere in the circuit.
    pub fn params_used(&self) -> BTreeSet<String> {
        let from_inputs = self.inputs.iter().filter_map(|i| i.amp.phase.param_name());
        let from_elements = self.elements.iter().filter_map(|e| match e {
            Element::Phase { phase, .. } => phase.param_name(),
            _ => None,
        });
        from_inputs
            .chain(from_elements)
            .map(str::to_string)
            .collect()
    }

    pub fn uses_param(&self, name: &str) -> bool {
        self.params_used().contains(name)
    }

    pub fn has_superposed_splitter(&self) -> bool {
        self.elements
            .iter()
            .any(|e| matches!(e, Element::BsSuperposed(_)))
    }
}

/// Canonical source text of the circuit.
pub fn render(c: &Circuit) -> String {
    let mut out = format!("circuit {}\n", c.name);
    for input in &c.inputs {
        out.push_str(&format!("in {} {}\n", input.port, input.amp));
    }
    for e in &c.elements {
        out.push_str(&format!("{e}\n"));
    }
    out.push_str(&format!("detect {} {}\n", c.detectors.0, c.detectors.1));
    out
}

pub fn builtin_source(name: &str) -> Result<&'static str, UnknownBuiltin> {
    match name {
        "hom" => Ok(HOM_SOURCE),
        "mzi" => Ok(MZI_SOURCE),
        "one_input_bs" => Ok(ONE_INPUT_SOURCE),
        other => Err(UnknownBuiltin(other.to_string())),
    }
}

/// The two-input splitter (`hom`), the interferometer (`mzi`) and the
/// single-input splitter (`one_input_bs`).
pub fn builtin(name: &str) -> Result<Circuit, UnknownBuiltin> {
    let src = builtin_source(name)?;
    Ok(parse(src).expect("builtin sources are valid"))
}

/// Checks port continuity through the layers, detector placement and
/// parameter closure.
pub fn validate(c: &Circuit) -> Result<(), ValidationError> {
    if c.inputs.is_empty() {
        return Err(ValidationError::Circuit(
            "circuit declares no inputs".into(),
        ));
    }
    if c.elements.is_empty() {
        return Err(ValidationError::Circuit("circuit has no elements".into()));
    }
    let mut seen = BTreeSet::new();
    for input in &c.inputs {
        if input.port.layer() != 0 {
            return Err(ValidationError::Circuit(format!(
                "input port '{}' is not an input port (expected a or b)",
                input.port
            )));
        }
        if !seen.insert(input.port) {
            return Err(ValidationError::Circuit(format!(
                "duplicate input port '{}'",
                input.port
            )));
        }
        check_param(&input.amp.phase).map_err(ValidationError::Circuit)?;
        if !input.amp.magnitude.is_finite() {
            return Err(ValidationError::Circuit(format!(
                "non-finite amplitude on port '{}'",
                input.port
            )));
        }
    }
    let mut layer = 0;
    for (index, e) in c.elements.iter().enumerate() {
        match e {
            Element::Bs(_) | Element::BsSuperposed(_) => {
                layer += 1;
                if layer > MAX_LAYER {
                    return Err(ValidationError::Element {
                        index,
                        message: "too many splitters: ports run past 'z'".into(),
                    });
                }
            }
            Element::Phase { port, phase } => {
                if port.layer() != layer {
                    return Err(ValidationError::Element {
                        index,
                        message: format!(
                            "port '{port}' does not exist here (current ports are {})",
                            layer_ports(layer)
                        ),
                    });
                }
                check_param(phase)
                    .map_err(|message| ValidationError::Element { index, message })?;
            }
        }
    }
    let (d1, d2) = c.detectors;
    for d in [d1, d2] {
        if d.layer() != layer {
            return Err(ValidationError::Circuit(format!(
                "detector port '{d}' is not an output port (outputs are {})",
                layer_ports(layer)
            )));
        }
    }
    if d1 == d2 {
        return Err(ValidationError::Circuit(format!(
            "duplicate detector port '{d1}'"
        )));
    }
    Ok(())
}

fn layer_ports(layer: usize) -> String {
    let a = Port::at(layer, PortSlot::First).map_or('?', Port::letter);
    let b = Port::at(layer, PortSlot::Second).map_or('?', Port::letter);
    format!("{a}/{b}")
}

fn check_param(p: &PhaseExpr) -> Result<(), String> {
    match p {
        PhaseExpr::Param { name, .. } if !PARAMETERS.contains(&name.as_str()) => Err(format!(
            "unbound parameter '{name}' (expected theta or zeta)"
        )),
        PhaseExpr::Literal(v) if !v.is_finite() => Err(format!("non-finite phase {v}")),
        _ => Ok(()),
    }
}
