//! Phase-basis superposition of beam-splitter matrices.
//!
//! A splitter is allowed to act in either phase basis (`+π/2` or `−π/2`)
//! with equal probability, and the transfer matrix seen by a photon pair is
//! the amplitude-level average of the two basis matrices. Depending on
//! whether the two photons see the same or opposite bases, and whether the
//! matrices are added or subtracted, the mixture is:
//!
//! | relation | combination   | result                        |
//! |----------|---------------|-------------------------------|
//! | same     | symmetric     | `U_s` itself                  |
//! | same     | antisymmetric | zero matrix (degenerate)      |
//! | opposite | symmetric     | diagonal, ∝ identity          |
//! | opposite | antisymmetric | anti-diagonal, ∝ port swap    |
//!
//! [`classify_all`] checks each mixture against two requirements: zero
//! coincidence for the two-input splitter at quadrature, and the
//! interferometer's directionality (all light in `f` at `ζ = 0`, all light
//! in `e` at `ζ = π`). Only the same-basis symmetric mixtures pass.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{
    bs_matrix, cis, phase_matrix, BasisSign, Convention, ElementMatrix, FieldVector, NumericsError,
    PortSlot,
};
use crate::wave::{coincidence_normalized, WaveError};

/// Threshold below which an intensity or coincidence counts as zero.
pub const ZERO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseBasisError {
    #[error("{0} superposition cancels to the zero matrix")]
    Degenerate(BasisCase),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisRelation {
    Same,
    Opposite,
}

/// Whether the two basis matrices are added (`+`) or subtracted (`−`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Combination {
    Symmetric,
    Antisymmetric,
}

impl Combination {
    fn factor(self) -> f64 {
        match self {
            Combination::Symmetric => 1.0,
            Combination::Antisymmetric => -1.0,
        }
    }
}

/// One phase-basis superposition rule.
///
/// For `Same`, `primary_sign` is the shared basis; for `Opposite` it is the
/// basis of the first (un-negated) matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisCase {
    pub relation: BasisRelation,
    pub combination: Combination,
    pub primary_sign: BasisSign,
}

impl BasisCase {
    pub fn new(relation: BasisRelation, combination: Combination, primary_sign: BasisSign) -> Self {
        BasisCase {
            relation,
            combination,
            primary_sign,
        }
    }

    /// All eight rules, degenerate ones included.
    pub fn all() -> Vec<BasisCase> {
        let mut out = Vec::with_capacity(8);
        for relation in [BasisRelation::Same, BasisRelation::Opposite] {
            for combination in [Combination::Symmetric, Combination::Antisymmetric] {
                for sign in BasisSign::ALL {
                    out.push(BasisCase::new(relation, combination, sign));
                }
            }
        }
        out
    }

    pub fn is_degenerate(&self) -> bool {
        self.relation == BasisRelation::Same && self.combination == Combination::Antisymmetric
    }

    pub fn second_sign(&self) -> BasisSign {
        match self.relation {
            BasisRelation::Same => self.primary_sign,
            BasisRelation::Opposite => self.primary_sign.negate(),
        }
    }
}

impl fmt::Display for BasisCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            BasisRelation::Same => "same",
            BasisRelation::Opposite => "opposite",
        };
        let comb = match self.combination {
            Combination::Symmetric => "symmetric",
            Combination::Antisymmetric => "antisymmetric",
        };
        write!(f, "{rel}/{comb}/{}", self.primary_sign)
    }
}

/// `(U_p ± U_q) / 2` for the case's bases `p`, `q`.
///
/// Opposite-basis mixtures are flagged `non_unitary`; they are never
/// renormalized.
pub fn superposed_matrix(
    case: BasisCase,
    conv: Convention,
) -> Result<ElementMatrix, PhaseBasisError> {
    let first = bs_matrix(case.primary_sign, conv);
    let second =
        bs_matrix(case.second_sign(), conv).scale(Complex64::new(case.combination.factor(), 0.0));
    let m = first.add(&second).scale(Complex64::new(0.5, 0.0));
    if m.is_zero() {
        return Err(PhaseBasisError::Degenerate(case));
    }
    Ok(match case.relation {
        BasisRelation::Same => m,
        BasisRelation::Opposite => m.flagged_non_unitary(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomCaseOutput {
    pub i_c: f64,
    pub i_d: f64,
    pub r: f64,
}

/// Two-input splitter `[E_0, E_0·e^{iθ}]` through the case's mixture
/// (unitary convention).
pub fn evaluate_hom_case(case: BasisCase, theta: f64) -> Result<HomCaseOutput, PhaseBasisError> {
    let m = superposed_matrix(case, Convention::Unitary)?;
    let out = m.apply(&FieldVector::new(Complex64::new(1.0, 0.0), cis(theta)));
    let [i_c, i_d] = out.intensities();
    let r = coincidence_normalized(i_c, i_d)?.r_value;
    Ok(HomCaseOutput { i_c, i_d, r })
}

/// Output of the mixture `(U_+ ± U_−)/2` for a single photon `[E_0, 0]`.
///
/// The symmetric mixture leaves all light in port `c`; the antisymmetric one
/// moves it all to port `d`.
pub fn one_input_bs_case(combination: Combination, conv: Convention) -> FieldVector {
    let case = BasisCase::new(BasisRelation::Opposite, combination, BasisSign::Plus);
    superposed_matrix(case, conv)
        .expect("opposite-basis mixtures are never zero")
        .apply(&FieldVector::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ))
}

/// How the first splitter of the interferometer is modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bs1Rule {
    /// An ordinary unitary splitter in the given basis.
    Unitary(BasisSign),
    /// The one-input mixture of [`one_input_bs_case`]. With
    /// `phase_before_split` the ζ shifter acts before the mixture instead of
    /// after it.
    Superposed {
        combination: Combination,
        phase_before_split: bool,
    },
}

impl fmt::Display for Bs1Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bs1Rule::Unitary(s) => write!(f, "unitary({s})"),
            Bs1Rule::Superposed {
                combination,
                phase_before_split,
            } => {
                let c = match combination {
                    Combination::Symmetric => '+',
                    Combination::Antisymmetric => '-',
                };
                let order = if *phase_before_split {
                    "phase-first"
                } else {
                    "phase-after"
                };
                write!(f, "superposed({c},{order})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MziCaseOutput {
    pub i_e: f64,
    pub i_f: f64,
    pub r_ef: f64,
}

/// Single input `[E_0, 0]` through BS1, the ζ shifter on arm `d`, and the
/// case's mixture as BS2 (unitary convention).
pub fn evaluate_mzi_case(
    bs1_rule: Bs1Rule,
    bs2_case: BasisCase,
    zeta: f64,
) -> Result<MziCaseOutput, PhaseBasisError> {
    let bs2 = superposed_matrix(bs2_case, Convention::Unitary)?;
    let shifter = phase_matrix(PortSlot::Second, zeta)?;
    let input = FieldVector::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let mid = match bs1_rule {
        Bs1Rule::Unitary(sign) => {
            shifter.apply(&bs_matrix(sign, Convention::Unitary).apply(&input))
        }
        Bs1Rule::Superposed {
            combination,
            phase_before_split,
        } => {
            let case = BasisCase::new(BasisRelation::Opposite, combination, BasisSign::Plus);
            let mix = superposed_matrix(case, Convention::Unitary)?;
            if phase_before_split {
                mix.apply(&shifter.apply(&input))
            } else {
                shifter.apply(&mix.apply(&input))
            }
        }
    };
    let [i_e, i_f] = bs2.apply(&mid).intensities();
    let r_ef = coincidence_normalized(i_e, i_f)?.r_value;
    Ok(MziCaseOutput { i_e, i_f, r_ef })
}

/// Verdict for one superposition rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseVerdict {
    pub case: BasisCase,
    /// `None` for degenerate cases.
    pub hom_r_at_quadrature: Option<f64>,
    pub mzi_directional: bool,
    pub degenerate: bool,
    pub allowed: bool,
    pub notes: String,
}

/// BS1 models paired with a BS2 rule. Same-basis rules follow the ordinary
/// interferometer; opposite-basis rules are checked against every
/// composition that could pair with them.
pub fn bs1_rules_for(case: BasisCase) -> Vec<Bs1Rule> {
    match case.relation {
        BasisRelation::Same => vec![Bs1Rule::Unitary(case.primary_sign)],
        BasisRelation::Opposite => vec![
            Bs1Rule::Unitary(case.primary_sign),
            Bs1Rule::Superposed {
                combination: case.combination,
                phase_before_split: false,
            },
            Bs1Rule::Superposed {
                combination: case.combination,
                phase_before_split: true,
            },
        ],
    }
}

fn short(x: f64) -> f64 {
    (x * 1e9).round() / 1e9 + 0.0
}

fn classify(case: BasisCase) -> Result<CaseVerdict, PhaseBasisError> {
    if case.is_degenerate() {
        return Ok(CaseVerdict {
            case,
            hom_r_at_quadrature: None,
            mzi_directional: false,
            degenerate: true,
            allowed: false,
            notes: "degenerate: matrix cancellation leaves no action".to_string(),
        });
    }
    let hom_r = evaluate_hom_case(case, FRAC_PI_2)?.r;
    let mut notes = Vec::new();
    if hom_r >= ZERO_TOL {
        notes.push(format!("HOM R={} at theta=pi/2", short(hom_r)));
    }
    let mut directional = true;
    for rule in bs1_rules_for(case) {
        let at_zero = evaluate_mzi_case(rule, case, 0.0)?;
        let at_pi = evaluate_mzi_case(rule, case, PI)?;
        if at_zero.i_e >= ZERO_TOL || at_pi.i_f >= ZERO_TOL {
            directional = false;
            notes.push(format!(
                "MZI not directional under {rule} (I_e(0)={}, I_f(pi)={}, R_ef(0)={})",
                short(at_zero.i_e),
                short(at_pi.i_f),
                short(at_zero.r_ef)
            ));
        }
    }
    let allowed = hom_r < ZERO_TOL && directional;
    if allowed {
        notes.push("quantum feature reproduced".to_string());
    }
    Ok(CaseVerdict {
        case,
        hom_r_at_quadrature: Some(hom_r),
        mzi_directional: directional,
        degenerate: false,
        allowed,
        notes: notes.join("; "),
    })
}

/// Verdicts for all eight rules in [`BasisCase::all`] order.
pub fn classify_all() -> Result<Vec<CaseVerdict>, PhaseBasisError> {
    BasisCase::all().into_iter().map(classify).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn case(r: BasisRelation, k: Combination, s: BasisSign) -> BasisCase {
        BasisCase::new(r, k, s)
    }

    #[test]
    fn superposed_literal_examples() {
        use BasisRelation::*;
        use Combination::*;
        let same = superposed_matrix(
            case(Same, Symmetric, BasisSign::Plus),
            Convention::PaperLiteral,
        )
        .unwrap();
        assert_eq!(
            same.entries,
            [[c(1.0, 0.0), c(0.0, 1.0)], [c(0.0, 1.0), c(1.0, 0.0)]]
        );
        assert!(!same.non_unitary);

        let opp = superposed_matrix(
            case(Opposite, Symmetric, BasisSign::Plus),
            Convention::PaperLiteral,
        )
        .unwrap();
        assert_eq!(
            opp.entries,
            [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
        );
        assert!(opp.non_unitary);

        // (U_+ − U_−)/2 = +i·swap; the printed result carries −i
        let anti = superposed_matrix(
            case(Opposite, Antisymmetric, BasisSign::Plus),
            Convention::PaperLiteral,
        )
        .unwrap();
        assert_eq!(
            anti.entries,
            [[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, 1.0), c(0.0, 0.0)]]
        );
    }

    #[test]
    fn degenerate_cases_error() {
        for s in BasisSign::ALL {
            for conv in [Convention::Unitary, Convention::PaperLiteral] {
                let k = case(BasisRelation::Same, Combination::Antisymmetric, s);
                assert_eq!(
                    superposed_matrix(k, conv),
                    Err(PhaseBasisError::Degenerate(k))
                );
                assert!(evaluate_hom_case(k, 0.3).is_err());
            }
        }
    }

    #[test]
    fn hom_case_examples() {
        let same = evaluate_hom_case(
            case(BasisRelation::Same, Combination::Symmetric, BasisSign::Plus),
            FRAC_PI_2,
        )
        .unwrap();
        assert_eq!(same.r, 0.0);
        let opp = evaluate_hom_case(
            case(
                BasisRelation::Opposite,
                Combination::Symmetric,
                BasisSign::Plus,
            ),
            0.77,
        )
        .unwrap();
        assert!((opp.r - 1.0).abs() < 1e-15);
        let anti = evaluate_hom_case(
            case(
                BasisRelation::Opposite,
                Combination::Antisymmetric,
                BasisSign::Plus,
            ),
            1.234,
        )
        .unwrap();
        assert!((anti.r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_input_examples() {
        let plus = one_input_bs_case(Combination::Symmetric, Convention::PaperLiteral);
        assert_eq!(plus.amps, [c(1.0, 0.0), c(0.0, 0.0)]);
        let minus = one_input_bs_case(Combination::Antisymmetric, Convention::PaperLiteral);
        assert_eq!(minus.amps, [c(0.0, 0.0), c(0.0, 1.0)]);
        let unit = one_input_bs_case(Combination::Symmetric, Convention::Unitary);
        assert!((unit.amps[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert_eq!(unit.amps[1], c(0.0, 0.0));
    }

    #[test]
    fn mzi_case_examples() {
        let same = case(BasisRelation::Same, Combination::Symmetric, BasisSign::Plus);
        let z0 = evaluate_mzi_case(Bs1Rule::Unitary(BasisSign::Plus), same, 0.0).unwrap();
        assert_eq!(z0.i_e, 0.0);
        assert!(z0.i_f > 0.99);
        let zpi = evaluate_mzi_case(Bs1Rule::Unitary(BasisSign::Plus), same, PI).unwrap();
        assert_eq!(zpi.i_f, 0.0);
        assert!(zpi.i_e > 0.99);

        // with an ordinary BS1 both opposite mixtures give R_ef = 1 for every ζ
        for comb in [Combination::Symmetric, Combination::Antisymmetric] {
            let opp = case(BasisRelation::Opposite, comb, BasisSign::Plus);
            for zeta in [0.0, 0.4, PI, 5.0] {
                let out = evaluate_mzi_case(Bs1Rule::Unitary(BasisSign::Plus), opp, zeta).unwrap();
                assert!((out.r_ef - 1.0).abs() < 1e-15);
            }
        }

        // the literal (U_+ + U_-)/2 first splitter keeps the photon in c, so
        // an identity-like BS2 sends everything to e whatever ζ is
        let opp = case(
            BasisRelation::Opposite,
            Combination::Symmetric,
            BasisSign::Plus,
        );
        for phase_before_split in [false, true] {
            let rule = Bs1Rule::Superposed {
                combination: Combination::Symmetric,
                phase_before_split,
            };
            for zeta in [0.0, 0.4, PI, 5.0] {
                let out = evaluate_mzi_case(rule, opp, zeta).unwrap();
                assert!((out.i_e - 0.25).abs() < 1e-15);
                assert_eq!(out.i_f, 0.0);
                assert_eq!(out.r_ef, 0.0);
            }
        }
    }

    #[test]
    fn mzi_degenerate_bs2_errors() {
        let k = case(
            BasisRelation::Same,
            Combination::Antisymmetric,
            BasisSign::Plus,
        );
        assert_eq!(
            evaluate_mzi_case(Bs1Rule::Unitary(BasisSign::Plus), k, 0.0),
            Err(PhaseBasisError::Degenerate(k))
        );
    }

    #[test]
    fn classification() {
        let verdicts = classify_all().unwrap();
        assert_eq!(verdicts.len(), 8);
        for v in &verdicts {
            let expect_allowed = v.case.relation == BasisRelation::Same
                && v.case.combination == Combination::Symmetric;
            assert_eq!(v.allowed, expect_allowed, "{}", v.case);
            assert_eq!(v.degenerate, v.case.is_degenerate());
            if v.case.relation == BasisRelation::Opposite {
                assert!(v.notes.contains("HOM R=1"), "{}", v.notes);
                assert!(!v.mzi_directional);
            }
        }
    }

    #[test]
    fn display_labels() {
        let k = case(
            BasisRelation::Opposite,
            Combination::Antisymmetric,
            BasisSign::Minus,
        );
        assert_eq!(k.to_string(), "opposite/antisymmetric/-");
    }
}
