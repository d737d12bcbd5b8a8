//! Complex 2×2 transfer-matrix primitives for two-port optical circuits.
//!
//! Amplitudes are measured in units of the single-photon amplitude `E_0`, so
//! intensities come out in units of `I_0 = |E_0|²`. Every beam-splitter
//! matrix carries a [`Convention`] tag: `Unitary` scales the balanced
//! splitter by `1/√2` so that energy is conserved, `PaperLiteral` keeps the
//! bare `[[1, ±i], [±i, 1]]` entries.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, TAU};
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Field amplitude in units of `√I_0`.
pub type ComplexAmp = Complex64;

/// Tolerance used when classifying a matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-12;

/// Two objects are equal up to global phase when [`global_phase_distance`]
/// falls below this.
pub const GLOBAL_PHASE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("non-finite phase {0}")]
    NonFinitePhase(f64),
    #[error("cannot compose matrices in mixed conventions ({0} and {1})")]
    MixedConventions(Convention, Convention),
    #[error("cannot compose an empty sequence of matrices")]
    EmptySequence,
}

/// Scaling convention of a beam-splitter matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Convention {
    #[default]
    Unitary,
    PaperLiteral,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Convention::Unitary => f.write_str("unitary"),
            Convention::PaperLiteral => f.write_str("paper-literal"),
        }
    }
}

/// The two phase bases of a balanced beam splitter, `φ = +π/2` and `φ = −π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisSign {
    Plus,
    Minus,
}

impl BasisSign {
    pub const ALL: [BasisSign; 2] = [BasisSign::Plus, BasisSign::Minus];

    pub fn negate(self) -> BasisSign {
        match self {
            BasisSign::Plus => BasisSign::Minus,
            BasisSign::Minus => BasisSign::Plus,
        }
    }

    /// `+1.0` or `-1.0`.
    pub fn factor(self) -> f64 {
        match self {
            BasisSign::Plus => 1.0,
            BasisSign::Minus => -1.0,
        }
    }

    /// The basis phase in radians.
    pub fn phase(self) -> f64 {
        self.factor() * FRAC_PI_2
    }

    pub fn symbol(self) -> char {
        match self {
            BasisSign::Plus => '+',
            BasisSign::Minus => '-',
        }
    }
}

impl fmt::Display for BasisSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Position of a port inside its two-port layer (`a`/`c`/`e` are `First`,
/// `b`/`d`/`f` are `Second`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PortSlot {
    First,
    Second,
}

impl PortSlot {
    pub fn index(self) -> usize {
        match self {
            PortSlot::First => 0,
            PortSlot::Second => 1,
        }
    }
}

/// `e^{iφ}`, exact at integer multiples of `π/2`.
///
/// `sin(π)` in floating point is `1.2e-16` rather than zero; snapping the
/// quadrant points keeps destructive interference at quadrature exactly dark.
pub fn cis(phi: f64) -> ComplexAmp {
    let reduced = phi.rem_euclid(TAU);
    let quarter = (reduced / FRAC_PI_2).round();
    let tol = 4.0 * f64::EPSILON * reduced.max(1.0);
    if (reduced - quarter * FRAC_PI_2).abs() <= tol {
        return match quarter as i64 % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, phi)
}

/// Complex amplitudes on an ordered pair of ports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldVector {
    pub amps: [ComplexAmp; 2],
}

impl FieldVector {
    pub fn new(first: ComplexAmp, second: ComplexAmp) -> Self {
        FieldVector {
            amps: [first, second],
        }
    }

    pub fn zero() -> Self {
        FieldVector::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    /// Per-port `|amp|²` in units of `I_0`.
    pub fn intensities(&self) -> [f64; 2] {
        [self.amps[0].norm_sqr(), self.amps[1].norm_sqr()]
    }

    pub fn total_intensity(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&self, factor: ComplexAmp) -> Self {
        FieldVector::new(self.amps[0] * factor, self.amps[1] * factor)
    }

    pub fn add(&self, other: &FieldVector) -> Self {
        FieldVector::new(self.amps[0] + other.amps[0], self.amps[1] + other.amps[1])
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|a| a.is_finite())
    }
}

/// Free function form of [`FieldVector::intensities`].
pub fn intensities(v: &FieldVector) -> [f64; 2] {
    v.intensities()
}

/// A 2×2 complex transfer matrix acting on a [`FieldVector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementMatrix {
    pub entries: [[ComplexAmp; 2]; 2],
    pub convention: Convention,
    /// Set on amplitude mixtures of beam-splitter matrices, which need not
    /// conserve energy.
    pub non_unitary: bool,
    // Phase shifters and the identity read the same in every convention and
    // compose with either.
    neutral: bool,
}

impl ElementMatrix {
    pub fn from_entries(entries: [[ComplexAmp; 2]; 2], convention: Convention) -> Self {
        ElementMatrix {
            entries,
            convention,
            non_unitary: false,
            neutral: false,
        }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        ElementMatrix {
            entries: [[one, zero], [zero, one]],
            convention: Convention::Unitary,
            non_unitary: false,
            neutral: true,
        }
    }

    /// Marks the matrix as a non-unitary mixture.
    pub fn flagged_non_unitary(mut self) -> Self {
        self.non_unitary = true;
        self
    }

    /// True for elements whose entries do not depend on the convention.
    pub fn is_convention_neutral(&self) -> bool {
        self.neutral
    }

    pub fn get(&self, row: usize, col: usize) -> ComplexAmp {
        self.entries[row][col]
    }

    pub fn scale(&self, factor: ComplexAmp) -> Self {
        let mut out = *self;
        for row in out.entries.iter_mut() {
            for e in row.iter_mut() {
                *e *= factor;
            }
        }
        out
    }

    /// Entrywise sum; the result keeps `self`'s convention.
    pub fn add(&self, other: &ElementMatrix) -> Self {
        let mut out = *self;
        for r in 0..2 {
            for c in 0..2 {
                out.entries[r][c] += other.entries[r][c];
            }
        }
        out.neutral = false;
        out
    }

    pub fn sub(&self, other: &ElementMatrix) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Plain matrix product `self · rhs`, ignoring convention tags.
    pub fn matmul(&self, rhs: &ElementMatrix) -> Self {
        let a = &self.entries;
        let b = &rhs.entries;
        let mut entries = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (r, row) in entries.iter_mut().enumerate() {
            for (c, e) in row.iter_mut().enumerate() {
                *e = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        ElementMatrix {
            entries,
            convention: if self.neutral {
                rhs.convention
            } else {
                self.convention
            },
            non_unitary: self.non_unitary || rhs.non_unitary,
            neutral: self.neutral && rhs.neutral,
        }
    }

    pub fn dagger(&self) -> Self {
        let e = &self.entries;
        let mut out = *self;
        out.entries = [
            [e[0][0].conj(), e[1][0].conj()],
            [e[0][1].conj(), e[1][1].conj()],
        ];
        out
    }

    pub fn apply(&self, v: &FieldVector) -> FieldVector {
        let e = &self.entries;
        FieldVector::new(
            e[0][0] * v.amps[0] + e[0][1] * v.amps[1],
            e[1][0] * v.amps[0] + e[1][1] * v.amps[1],
        )
    }

    /// Largest entrywise modulus difference.
    pub fn max_abs_diff(&self, other: &ElementMatrix) -> f64 {
        self.flat()
            .iter()
            .zip(other.flat().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.flat().iter().all(|e| *e == Complex64::new(0.0, 0.0))
    }

    /// Checks `M†M = I` entrywise within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.dagger()
            .matmul(self)
            .max_abs_diff(&ElementMatrix::identity())
            < tol
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        // Eigenvalues of the Hermitian M†M are real; take the larger root.
        let g = self.dagger().matmul(self).entries;
        let tr = g[0][0].re + g[1][1].re;
        let det = (g[0][0] * g[1][1] - g[0][1] * g[1][0]).re;
        let disc = (tr * tr / 4.0 - det).max(0.0);
        (tr / 2.0 + disc.sqrt()).sqrt()
    }

    pub fn flat(&self) -> [ComplexAmp; 4] {
        let e = &self.entries;
        [e[0][0], e[0][1], e[1][0], e[1][1]]
    }
}

/// Balanced beam splitter `[[1, s·i], [s·i, 1]]`, scaled by `1/√2` under the
/// unitary convention.
pub fn bs_matrix(sign: BasisSign, conv: Convention) -> ElementMatrix {
    let scale = match conv {
        Convention::Unitary => FRAC_1_SQRT_2,
        Convention::PaperLiteral => 1.0,
    };
    let diag = Complex64::new(scale, 0.0);
    let off = Complex64::new(0.0, sign.factor() * scale);
    ElementMatrix::from_entries([[diag, off], [off, diag]], conv)
}

/// Phase shifter: `e^{iφ}` on `port`, 1 on the other.
pub fn phase_matrix(port: PortSlot, phi: f64) -> Result<ElementMatrix, NumericsError> {
    if !phi.is_finite() {
        return Err(NumericsError::NonFinitePhase(phi));
    }
    let mut m = ElementMatrix::identity();
    m.entries[port.index()][port.index()] = cis(phi);
    Ok(m)
}

/// Product `mats[0] · mats[1] · … · mats[n-1]`.
///
/// The last matrix acts on the field first, so a circuit listed in
/// propagation order must be reversed before composing.
pub fn compose(mats: &[ElementMatrix]) -> Result<ElementMatrix, NumericsError> {
    let first = mats.first().ok_or(NumericsError::EmptySequence)?;
    let mut tagged = mats.iter().filter(|m| !m.neutral).map(|m| m.convention);
    if let Some(conv) = tagged.next() {
        if let Some(other) = tagged.find(|c| *c != conv) {
            return Err(NumericsError::MixedConventions(conv, other));
        }
    }
    Ok(mats[1..].iter().fold(*first, |acc, m| acc.matmul(m)))
}

/// Free function form of [`ElementMatrix::apply`].
pub fn apply(m: &ElementMatrix, v: &FieldVector) -> FieldVector {
    m.apply(v)
}

/// `min_{|λ|=1} ‖a − λ·b‖` in the Euclidean norm.
///
/// Slices must have equal length.
pub fn global_phase_distance(a: &[ComplexAmp], b: &[ComplexAmp]) -> f64 {
    assert_eq!(a.len(), b.len(), "global_phase_distance: length mismatch");
    let overlap: ComplexAmp = b.iter().zip(a).map(|(y, x)| y.conj() * x).sum();
    let lambda = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - lambda * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn matrices_equal_up_to_phase(a: &ElementMatrix, b: &ElementMatrix) -> bool {
    global_phase_distance(&a.flat(), &b.flat()) < GLOBAL_PHASE_TOL
}

pub fn vectors_equal_up_to_phase(a: &FieldVector, b: &FieldVector) -> bool {
    global_phase_distance(&a.amps, &b.amps) < GLOBAL_PHASE_TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> ComplexAmp {
        Complex64::new(re, im)
    }

    #[test]
    fn bs_unitary_plus() {
        let m = bs_matrix(BasisSign::Plus, Convention::Unitary);
        let s = FRAC_1_SQRT_2;
        assert_eq!(m.entries, [[c(s, 0.0), c(0.0, s)], [c(0.0, s), c(s, 0.0)]]);
        assert!(m.is_unitary(UNITARY_TOL));
    }

    #[test]
    fn bs_paper_literal_minus() {
        let m = bs_matrix(BasisSign::Minus, Convention::PaperLiteral);
        assert_eq!(
            m.entries,
            [[c(1.0, 0.0), c(0.0, -1.0)], [c(0.0, -1.0), c(1.0, 0.0)]]
        );
        assert_eq!(m.convention, Convention::PaperLiteral);
    }

    #[test]
    fn phase_matrix_examples() {
        let id = phase_matrix(PortSlot::Second, 0.0).unwrap();
        assert_eq!(id.entries, ElementMatrix::identity().entries);
        let pi = phase_matrix(PortSlot::Second, PI).unwrap();
        assert_eq!(pi.entries[1][1], c(-1.0, 0.0));
        assert_eq!(pi.entries[0][0], c(1.0, 0.0));
        let half = phase_matrix(PortSlot::Second, FRAC_PI_2).unwrap();
        assert_eq!(half.entries[1][1], c(0.0, 1.0));
        assert!(phase_matrix(PortSlot::First, f64::NAN).is_err());
        assert!(phase_matrix(PortSlot::First, f64::INFINITY).is_err());
    }

    #[test]
    fn cis_snaps_quadrants_only() {
        assert_eq!(cis(-FRAC_PI_2), c(0.0, -1.0));
        assert_eq!(cis(3.0 * FRAC_PI_2), c(0.0, -1.0));
        assert_eq!(cis(2.0 * PI), c(1.0, 0.0));
        assert_eq!(cis(PI), c(-1.0, 0.0));
        let z = cis(FRAC_PI_4);
        assert!((z.re - FRAC_1_SQRT_2).abs() < 1e-15 && (z.im - FRAC_1_SQRT_2).abs() < 1e-15);
        let near = cis(FRAC_PI_2 + 1e-9);
        assert!(near.re != 0.0);
    }

    #[test]
    fn compose_identity_pair() {
        let m = compose(&[ElementMatrix::identity(), ElementMatrix::identity()]).unwrap();
        assert_eq!(m.entries, ElementMatrix::identity().entries);
    }

    #[test]
    fn compose_mzi_at_zero_is_swap_up_to_phase() {
        let bs = bs_matrix(BasisSign::Plus, Convention::Unitary);
        let m = compose(&[bs, phase_matrix(PortSlot::Second, 0.0).unwrap(), bs]).unwrap();
        let i = c(0.0, 1.0);
        let swap = ElementMatrix::from_entries(
            [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
            Convention::Unitary,
        )
        .scale(i);
        assert!(matrices_equal_up_to_phase(&m, &swap));
        assert!(m.max_abs_diff(&swap) < 1e-15);
    }

    #[test]
    fn compose_mzi_at_pi_keeps_port_e() {
        let bs = bs_matrix(BasisSign::Plus, Convention::Unitary);
        let m = compose(&[bs, phase_matrix(PortSlot::Second, PI).unwrap(), bs]).unwrap();
        let out = m.apply(&FieldVector::new(c(1.0, 0.0), c(0.0, 0.0)));
        let expected = FieldVector::new(c(1.0, 0.0), c(0.0, 0.0));
        assert!(vectors_equal_up_to_phase(&out, &expected));
    }

    #[test]
    fn compose_rejects_mixed_conventions() {
        let a = bs_matrix(BasisSign::Plus, Convention::Unitary);
        let b = bs_matrix(BasisSign::Plus, Convention::PaperLiteral);
        let p = phase_matrix(PortSlot::Second, 1.0).unwrap();
        assert!(matches!(
            compose(&[a, p, b]),
            Err(NumericsError::MixedConventions(
                Convention::Unitary,
                Convention::PaperLiteral
            ))
        ));
        assert_eq!(compose(&[]), Err(NumericsError::EmptySequence));
        // phase shifters adopt the convention of the splitters around them
        assert_eq!(
            compose(&[p, b, p]).unwrap().convention,
            Convention::PaperLiteral
        );
    }

    #[test]
    fn non_unitary_flag_propagates() {
        let bs = bs_matrix(BasisSign::Plus, Convention::Unitary);
        let mix = bs.flagged_non_unitary();
        assert!(compose(&[bs, mix]).unwrap().non_unitary);
        assert!(!compose(&[bs, bs]).unwrap().non_unitary);
    }

    #[test]
    fn apply_examples() {
        let e0 = c(1.0, 0.0);
        let v = FieldVector::new(e0, c(0.0, 0.0));
        assert_eq!(ElementMatrix::identity().apply(&v), v);

        let bs = bs_matrix(BasisSign::Plus, Convention::Unitary);
        let s = FRAC_1_SQRT_2;
        let split = bs.apply(&v);
        assert_eq!(split.amps, [c(s, 0.0), c(0.0, s)]);

        let theta = 0.3;
        let e = cis(theta);
        let out = bs.apply(&FieldVector::new(e0, e));
        let i = c(0.0, 1.0);
        let expected = [(e0 + i * e) * s, (i + e) * s];
        assert!((out.amps[0] - expected[0]).norm() < 1e-15);
        assert!((out.amps[1] - expected[1]).norm() < 1e-15);
    }

    #[test]
    fn intensities_examples() {
        let bs = bs_matrix(BasisSign::Plus, Convention::Unitary);
        let v = FieldVector::new(c(1.0, 0.0), c(0.0, 0.0));
        assert_eq!(intensities(&v), [1.0, 0.0]);
        let quad = bs
            .apply(&FieldVector::new(c(1.0, 0.0), cis(FRAC_PI_2)))
            .intensities();
        assert_eq!(quad[0], 0.0);
        assert!((quad[1] - 2.0).abs() < 1e-15);
        let zero = bs
            .apply(&FieldVector::new(c(1.0, 0.0), c(1.0, 0.0)))
            .intensities();
        assert!((zero[0] - 1.0).abs() < 1e-15 && (zero[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conjugate_splitters_cancel() {
        let p = bs_matrix(BasisSign::Plus, Convention::Unitary);
        let m = bs_matrix(BasisSign::Minus, Convention::Unitary);
        let prod = compose(&[p, m]).unwrap();
        assert!(matrices_equal_up_to_phase(
            &prod,
            &ElementMatrix::identity()
        ));
    }

    #[test]
    fn operator_norm_of_mixture() {
        let p = bs_matrix(BasisSign::Plus, Convention::Unitary);
        let m = bs_matrix(BasisSign::Minus, Convention::Unitary);
        let mix = p.add(&m).scale(c(0.5, 0.0));
        assert!((mix.operator_norm() - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((p.operator_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn global_phase_distance_basics() {
        let a = [c(1.0, 0.0), c(0.0, 1.0)];
        let b = [c(0.0, 1.0), c(-1.0, 0.0)];
        assert!(global_phase_distance(&a, &b) < 1e-15);
        let d = global_phase_distance(&a, &[c(1.0, 0.0), c(0.0, -1.0)]);
        assert!(d > 1.0);
        assert_eq!(global_phase_distance(&[c(0.0, 0.0)], &[c(0.0, 0.0)]), 0.0);
    }

    #[test]
    fn basis_sign_negation_is_involution() {
        for s in BasisSign::ALL {
            assert_ne!(s.negate(), s);
            assert_eq!(s.negate().negate(), s);
        }
        assert_eq!(BasisSign::Minus.phase(), -FRAC_PI_2);
    }
}
