//! Two-mode occupation-number states and linear-optical transforms.
//!
//! A beam splitter acts on Fock states by substituting each input creation
//! operator with a combination of output creation operators taken from the
//! columns of the field transfer matrix, e.g. `â† → (ĉ† + i·d̂†)/√2` and
//! `b̂† → (i·ĉ† + d̂†)/√2` for the `+` basis. Expanding the products and
//! restoring the `√n!` factors gives the output state.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{
    bs_matrix, cis, global_phase_distance, BasisSign, ComplexAmp, Convention, ElementMatrix,
    NumericsError, PortSlot, UNITARY_TOL,
};

pub const DEFAULT_CUTOFF: u32 = 4;

/// Amplitudes with modulus below this are dropped after every transform.
pub const PRUNE_TOL: f64 = 1e-14;

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FockError {
    #[error("{photons} photons exceed the cutoff of {cutoff}")]
    CutoffExceeded { photons: u32, cutoff: u32 },
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("state has no non-zero amplitudes")]
    Empty,
    #[error("non-finite amplitude or phase")]
    NonFinite,
    #[error("transform is not unitary")]
    NonUnitary,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Occupation numbers `|n_first⟩|n_second⟩` of the two modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccPair {
    pub n_first: u32,
    pub n_second: u32,
}

impl OccPair {
    pub fn new(n_first: u32, n_second: u32) -> Self {
        OccPair { n_first, n_second }
    }

    pub fn total(&self) -> u32 {
        self.n_first + self.n_second
    }

    pub fn get(&self, mode: PortSlot) -> u32 {
        match mode {
            PortSlot::First => self.n_first,
            PortSlot::Second => self.n_second,
        }
    }
}

impl fmt::Display for OccPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}⟩", self.n_first, self.n_second)
    }
}

/// Normalized superposition over two-mode occupation pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amps: BTreeMap<OccPair, ComplexAmp>,
    cutoff: u32,
}

impl FockState {
    /// The basis state `|n_first, n_second⟩` with the default cutoff.
    pub fn basis(n_first: u32, n_second: u32) -> Result<Self, FockError> {
        Self::basis_with_cutoff(n_first, n_second, DEFAULT_CUTOFF)
    }

    pub fn basis_with_cutoff(n_first: u32, n_second: u32, cutoff: u32) -> Result<Self, FockError> {
        Self::from_amplitudes(
            [(OccPair::new(n_first, n_second), Complex64::new(1.0, 0.0))],
            cutoff,
        )
    }

    pub fn vacuum() -> Self {
        Self::basis(0, 0).expect("vacuum is within any cutoff")
    }

    /// Builds a state from explicit amplitudes, which must already be
    /// normalized to within `1e-12`.
    pub fn from_amplitudes<I>(amps: I, cutoff: u32) -> Result<Self, FockError>
    where
        I: IntoIterator<Item = (OccPair, ComplexAmp)>,
    {
        let mut map = BTreeMap::new();
        for (occ, a) in amps {
            if !a.is_finite() {
                return Err(FockError::NonFinite);
            }
            if occ.total() > cutoff {
                return Err(FockError::CutoffExceeded {
                    photons: occ.total(),
                    cutoff,
                });
            }
            *map.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        map.retain(|_, a| a.norm() >= PRUNE_TOL);
        let state = FockState { amps: map, cutoff };
        state.check_normalized()?;
        Ok(state)
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn amplitude(&self, occ: OccPair) -> ComplexAmp {
        self.amps
            .get(&occ)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn probability(&self, occ: OccPair) -> f64 {
        self.amplitude(occ).norm_sqr()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OccPair, &ComplexAmp)> {
        self.amps.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Expected photon number in `mode`.
    pub fn mean_photons(&self, mode: PortSlot) -> f64 {
        self.amps
            .iter()
            .map(|(o, a)| o.get(mode) as f64 * a.norm_sqr())
            .sum()
    }

    /// `⟨n_first · n_second⟩`.
    pub fn mean_photon_product(&self) -> f64 {
        self.amps
            .iter()
            .map(|(o, a)| (o.n_first * o.n_second) as f64 * a.norm_sqr())
            .sum()
    }

    /// Distance to `other` minimised over a global phase.
    pub fn global_phase_distance(&self, other: &FockState) -> f64 {
        let keys: Vec<OccPair> = self
            .amps
            .keys()
            .chain(other.amps.keys())
            .copied()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let a: Vec<_> = keys.iter().map(|k| self.amplitude(*k)).collect();
        let b: Vec<_> = keys.iter().map(|k| other.amplitude(*k)).collect();
        global_phase_distance(&a, &b)
    }

    fn check_normalized(&self) -> Result<(), FockError> {
        if self.amps.is_empty() {
            return Err(FockError::Empty);
        }
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(FockError::NotNormalized(n));
        }
        Ok(())
    }

    fn pruned_and_renormalized(mut self) -> Result<Self, FockError> {
        self.amps.retain(|_, a| a.norm() >= PRUNE_TOL);
        if self.amps.is_empty() {
            return Err(FockError::Empty);
        }
        let norm = self.norm_sqr().sqrt();
        if norm != 1.0 {
            for a in self.amps.values_mut() {
                *a /= norm;
            }
        }
        Ok(self)
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (occ, a) in &self.amps {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, occ)?;
        }
        Ok(())
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Applies a unitary single-particle transfer matrix to every photon.
///
/// Input mode `j` maps to `Σ_k M[k][j]·(output mode k)†`.
pub fn mode_transform(state: &FockState, m: &ElementMatrix) -> Result<FockState, FockError> {
    if m.non_unitary || !m.is_unitary(UNITARY_TOL) {
        return Err(FockError::NonUnitary);
    }
    state.check_normalized()?;
    let col = |j: usize| [m.get(0, j), m.get(1, j)];
    let mut out: BTreeMap<OccPair, ComplexAmp> = BTreeMap::new();
    for (occ, amp) in &state.amps {
        if occ.total() > state.cutoff {
            return Err(FockError::CutoffExceeded {
                photons: occ.total(),
                cutoff: state.cutoff,
            });
        }
        // polynomial in (ĉ†, d̂†): exponent pair → coefficient
        let mut poly: BTreeMap<(u32, u32), ComplexAmp> = BTreeMap::new();
        poly.insert((0, 0), Complex64::new(1.0, 0.0));
        let factors = std::iter::repeat_n(col(0), occ.n_first as usize)
            .chain(std::iter::repeat_n(col(1), occ.n_second as usize));
        for [to_first, to_second] in factors {
            let mut next = BTreeMap::new();
            for ((p, q), c) in poly {
                *next.entry((p + 1, q)).or_insert(Complex64::new(0.0, 0.0)) += c * to_first;
                *next.entry((p, q + 1)).or_insert(Complex64::new(0.0, 0.0)) += c * to_second;
            }
            poly = next;
        }
        let norm_in = (factorial(occ.n_first) * factorial(occ.n_second)).sqrt();
        for ((p, q), c) in poly {
            let norm_out = (factorial(p) * factorial(q)).sqrt();
            *out.entry(OccPair::new(p, q))
                .or_insert(Complex64::new(0.0, 0.0)) += amp * c * (norm_out / norm_in);
        }
    }
    FockState {
        amps: out,
        cutoff: state.cutoff,
    }
    .pruned_and_renormalized()
}

/// Balanced beam splitter in the given phase basis.
pub fn bs_transform(state: &FockState, sign: BasisSign) -> Result<FockState, FockError> {
    mode_transform(state, &bs_matrix(sign, Convention::Unitary))
}

/// Each term picks up `e^{i·n·φ}`, `n` being its occupation of `port`.
pub fn phase_transform(
    state: &FockState,
    port: PortSlot,
    phi: f64,
) -> Result<FockState, FockError> {
    if !phi.is_finite() {
        return Err(FockError::NonFinite);
    }
    state.check_normalized()?;
    let amps = state
        .amps
        .iter()
        .map(|(occ, a)| (*occ, a * cis(occ.get(port) as f64 * phi)))
        .collect();
    FockState {
        amps,
        cutoff: state.cutoff,
    }
    .pruned_and_renormalized()
}

/// Probability of exactly one photon in each mode.
pub fn coincidence_prob(state: &FockState) -> f64 {
    state.probability(OccPair::new(1, 1))
}

/// `(P(2,0), P(0,2))`.
pub fn bunching_probs(state: &FockState) -> (f64, f64) {
    (
        state.probability(OccPair::new(2, 0)),
        state.probability(OccPair::new(0, 2)),
    )
}

/// Output probabilities `(P_e, P_f)` of one photon entering port `a` of the
/// interferometer `BS(+) → phase(ζ on d) → BS(+)`.
pub fn single_photon_mzi(zeta: f64) -> Result<(f64, f64), FockError> {
    let s = FockState::basis(1, 0)?;
    let s = bs_transform(&s, BasisSign::Plus)?;
    let s = phase_transform(&s, PortSlot::Second, zeta)?;
    let s = bs_transform(&s, BasisSign::Plus)?;
    Ok((
        s.probability(OccPair::new(1, 0)),
        s.probability(OccPair::new(0, 1)),
    ))
}
