//! Classical coherence-optics evaluation of the beam-splitter and
//! Mach-Zehnder scenarios, including Monte Carlo averaging over the
//! inter-photon phase.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::numerics::{
    bs_matrix, cis, compose, phase_matrix, BasisSign, Convention, ElementMatrix, FieldVector,
    NumericsError, PortSlot,
};

/// Samples drawn from one RNG stream. Fixed so that results do not depend on
/// how batches are spread over worker threads.
pub const ENSEMBLE_BATCH: usize = 8192;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("coincidence undefined for zero total intensity")]
    UndefinedCoincidence,
    #[error("unknown scenario '{0}' (expected hom or mzi)")]
    UnknownScenario(String),
    #[error("ensemble needs at least one sample")]
    NoSamples,
    #[error("fringe grid is empty")]
    EmptyGrid,
    #[error("non-finite input {0}")]
    NonFinite(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Phase of input `b` relative to `a` (θ) and MZI path difference (ζ),
/// each reduced to `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RelativePhase {
    pub theta: Option<f64>,
    pub zeta: Option<f64>,
}

impl RelativePhase {
    pub fn new(theta: Option<f64>, zeta: Option<f64>) -> Self {
        RelativePhase {
            theta: theta.map(reduce_angle),
            zeta: zeta.map(reduce_angle),
        }
    }
}

fn reduce_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Normalized two-detector coincidence `R`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CoincidenceStat {
    pub r_value: f64,
}

/// Output intensities `(I_c, I_d)` of the two-input splitter with inputs
/// `[E_0, E_0·e^{iθ}]`, in units of `I_0`.
pub fn hom_outputs(theta: f64, sign: BasisSign) -> (f64, f64) {
    let input = FieldVector::new(Complex64::new(1.0, 0.0), cis(theta));
    let [ic, id] = bs_matrix(sign, Convention::Unitary)
        .apply(&input)
        .intensities();
    debug_assert!({
        let s = sign.factor() * theta.sin();
        (ic - (1.0 - s)).abs() < 1e-12 && (id - (1.0 + s)).abs() < 1e-12
    });
    (ic, id)
}

/// `R = I_1·I_2 / Ī²` with `Ī = (I_1 + I_2)/2`.
///
/// Applied to the splitter outputs this is exactly `cos²θ`, and it does not
/// depend on the overall intensity scale.
pub fn coincidence_normalized(i1: f64, i2: f64) -> Result<CoincidenceStat, WaveError> {
    for x in [i1, i2] {
        if !x.is_finite() {
            return Err(WaveError::NonFinite(x));
        }
    }
    let mean = (i1 + i2) / 2.0;
    if mean <= 0.0 {
        return Err(WaveError::UndefinedCoincidence);
    }
    Ok(CoincidenceStat {
        r_value: (i1 * i2) / (mean * mean),
    })
}

/// `BS(+) · P_d(ζ) · BS(+)` in the requested convention.
pub fn mzi_transfer(zeta: f64, conv: Convention) -> Result<ElementMatrix, WaveError> {
    let bs = bs_matrix(BasisSign::Plus, conv);
    Ok(compose(&[bs, phase_matrix(PortSlot::Second, zeta)?, bs])?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringePoint {
    pub zeta: f64,
    pub i_e: f64,
    pub i_f: f64,
}

/// Single-input MZI output intensities over a grid of ζ values.
pub fn mzi_fringe(zeta_grid: &[f64]) -> Result<Vec<FringePoint>, WaveError> {
    if zeta_grid.is_empty() {
        return Err(WaveError::EmptyGrid);
    }
    let input = FieldVector::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    zeta_grid
        .iter()
        .map(|&zeta| {
            let [i_e, i_f] = mzi_transfer(zeta, Convention::Unitary)?
                .apply(&input)
                .intensities();
            Ok(FringePoint { zeta, i_e, i_f })
        })
        .collect()
}

/// Scenarios the ensemble sampler knows how to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Two inputs on one splitter, random θ.
    Hom,
    /// One input through the interferometer, random ζ.
    Mzi,
}

impl FromStr for Scenario {
    type Err = WaveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hom" => Ok(Scenario::Hom),
            "mzi" => Ok(Scenario::Mzi),
            other => Err(WaveError::UnknownScenario(other.to_string())),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::Hom => f.write_str("hom"),
            Scenario::Mzi => f.write_str("mzi"),
        }
    }
}

/// Distribution of the scenario's free phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhaseDistribution {
    /// Uniform on `[0, 2π)`.
    Uniform,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleStats {
    pub n_samples: usize,
    pub mean_intensity: [f64; 2],
    pub mean_r: f64,
    /// Unbiased sample variance of the per-sample `R`; zero for one sample.
    pub var_r: f64,
    pub seed: u64,
}

impl EnsembleStats {
    /// Standard error of `mean_r`.
    pub fn stderr(&self) -> f64 {
        (self.var_r / self.n_samples as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Partial {
    count: usize,
    mean_i: [f64; 2],
    mean_r: f64,
    m2_r: f64,
}

impl Partial {
    fn push(&mut self, i: [f64; 2], r: f64) {
        self.count += 1;
        let n = self.count as f64;
        for (m, x) in self.mean_i.iter_mut().zip(i) {
            *m += (x - *m) / n;
        }
        let delta = r - self.mean_r;
        self.mean_r += delta / n;
        self.m2_r += delta * (r - self.mean_r);
    }

    // Chan et al. pairwise merge
    fn merge(self, other: Partial) -> Partial {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let mean_i: [f64; 2] =
            std::array::from_fn(|k| self.mean_i[k] + (other.mean_i[k] - self.mean_i[k]) * nb / n);
        let delta = other.mean_r - self.mean_r;
        Partial {
            count: self.count + other.count,
            mean_i,
            mean_r: self.mean_r + delta * nb / n,
            m2_r: self.m2_r + other.m2_r + delta * delta * na * nb / n,
        }
    }
}

fn sample_scenario(scenario: Scenario, phase: f64) -> Result<([f64; 2], f64), WaveError> {
    let i = match scenario {
        Scenario::Hom => {
            let (ic, id) = hom_outputs(phase, BasisSign::Plus);
            [ic, id]
        }
        Scenario::Mzi => {
            let input = FieldVector::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
            mzi_transfer(phase, Convention::Unitary)?
                .apply(&input)
                .intensities()
        }
    };
    let r = coincidence_normalized(i[0], i[1])?.r_value;
    Ok((i, r))
}

/// Ensemble statistics over `n` draws of the scenario's free phase.
///
/// Samples are split into fixed batches of [`ENSEMBLE_BATCH`]; batch `k`
/// draws from ChaCha8 stream `k` seeded with `seed`, and partial results are
/// merged in batch order. The output is therefore bit-identical for a given
/// `(scenario, dist, n, seed)` regardless of the number of worker threads.
pub fn ensemble_average(
    scenario: Scenario,
    dist: PhaseDistribution,
    n: usize,
    seed: u64,
) -> Result<EnsembleStats, WaveError> {
    if n == 0 {
        return Err(WaveError::NoSamples);
    }
    if let PhaseDistribution::Fixed(phase) = dist {
        if !phase.is_finite() {
            return Err(WaveError::NonFinite(phase));
        }
    }
    let batches = n.div_ceil(ENSEMBLE_BATCH);
    let partials = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let len = ENSEMBLE_BATCH.min(n - b * ENSEMBLE_BATCH);
            let mut acc = Partial::default();
            for _ in 0..len {
                let phase = match dist {
                    PhaseDistribution::Uniform => rng.random::<f64>() * TAU,
                    PhaseDistribution::Fixed(p) => p,
                };
                let (i, r) = sample_scenario(scenario, phase)?;
                acc.push(i, r);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<Partial>, WaveError>>()?;
    let total = partials
        .into_iter()
        .fold(Partial::default(), Partial::merge);
    let var_r = if total.count > 1 {
        (total.m2_r / (total.count - 1) as f64).max(0.0)
    } else {
        0.0
    };
    Ok(EnsembleStats {
        n_samples: total.count,
        mean_intensity: total.mean_i,
        mean_r: total.mean_r,
        var_r,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn hom_outputs_examples() {
        let (ic, id) = hom_outputs(FRAC_PI_2, BasisSign::Plus);
        assert_eq!(ic, 0.0);
        assert!((id - 2.0).abs() < 1e-15);
        let (ic, id) = hom_outputs(0.0, BasisSign::Plus);
        assert!((ic - 1.0).abs() < 1e-15 && (id - 1.0).abs() < 1e-15);
        let (ic, id) = hom_outputs(-FRAC_PI_2, BasisSign::Plus);
        assert!((ic - 2.0).abs() < 1e-15);
        assert_eq!(id, 0.0);
    }

    #[test]
    fn coincidence_examples() {
        assert_eq!(coincidence_normalized(1.0, 1.0).unwrap().r_value, 1.0);
        assert_eq!(coincidence_normalized(0.0, 2.0).unwrap().r_value, 0.0);
        // I_0(1 - √2/2), I_0(1 + √2/2) → 1 - 1/2 = 1/2
        let (ic, id) = hom_outputs(FRAC_PI_4, BasisSign::Plus);
        let r = coincidence_normalized(ic, id).unwrap().r_value;
        assert!((r - 0.5).abs() < 1e-15);
        assert_eq!(
            coincidence_normalized(0.0, 0.0),
            Err(WaveError::UndefinedCoincidence)
        );
        assert!(coincidence_normalized(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn relative_phase_is_reduced() {
        let p = RelativePhase::new(Some(-FRAC_PI_2), Some(5.0 * PI));
        assert!((p.theta.unwrap() - 1.5 * PI).abs() < 1e-15);
        assert!((p.zeta.unwrap() - PI).abs() < 1e-14);
        assert_eq!(RelativePhase::new(Some(-1e-300), None).theta, Some(0.0));
    }

    #[test]
    fn mzi_transfer_examples() {
        let input = FieldVector::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let out = mzi_transfer(0.0, Convention::Unitary)
            .unwrap()
            .apply(&input);
        assert_eq!(out.amps[0], Complex64::new(0.0, 0.0));
        assert!((out.amps[1] - Complex64::new(0.0, 1.0)).norm() < 1e-15);

        let rev = mzi_transfer(PI, Convention::Unitary)
            .unwrap()
            .apply(&input)
            .intensities();
        assert!((rev[0] - 1.0).abs() < 1e-15);
        assert_eq!(rev[1], 0.0);

        let half = mzi_transfer(FRAC_PI_2, Convention::Unitary)
            .unwrap()
            .apply(&input)
            .intensities();
        assert!((half[0] - 0.5).abs() < 1e-15 && (half[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mzi_transfer_closed_form() {
        for k in 0..50 {
            let zeta = k as f64 * 0.137 - 2.0;
            let m = mzi_transfer(zeta, Convention::Unitary).unwrap();
            let e = cis(zeta);
            let one = Complex64::new(1.0, 0.0);
            let i = Complex64::new(0.0, 1.0);
            let expected = ElementMatrix::from_entries(
                [
                    [(one - e) * 0.5, i * (one + e) * 0.5],
                    [i * (one + e) * 0.5, -(one - e) * 0.5],
                ],
                Convention::Unitary,
            );
            assert!(m.max_abs_diff(&expected) < 1e-15);
        }
    }

    #[test]
    fn fringe_examples() {
        let pts = mzi_fringe(&[0.0, PI, 2.0 * PI / 3.0]).unwrap();
        assert_eq!(pts[0].i_e, 0.0);
        assert!((pts[0].i_f - 1.0).abs() < 1e-15);
        assert!((pts[1].i_e - 1.0).abs() < 1e-15);
        assert_eq!(pts[1].i_f, 0.0);
        assert!((pts[2].i_e - 0.75).abs() < 1e-15);
        assert!((pts[2].i_f - 0.25).abs() < 1e-15);
        assert_eq!(mzi_fringe(&[]), Err(WaveError::EmptyGrid));
    }

    #[test]
    fn ensemble_uniform_hits_classical_bound() {
        let stats =
            ensemble_average(Scenario::Hom, PhaseDistribution::Uniform, 100_000, 7).unwrap();
        assert_eq!(stats.n_samples, 100_000);
        assert!((stats.mean_r - 0.5).abs() < 0.01);
        assert!((stats.mean_intensity[0] - 1.0).abs() < 0.01);
        assert!((stats.mean_intensity[1] - 1.0).abs() < 0.01);
        // Var(cos²θ) = 1/8 for uniform θ
        assert!((stats.var_r - 0.125).abs() < 0.005);
    }

    #[test]
    fn ensemble_fixed_phases() {
        let q =
            ensemble_average(Scenario::Hom, PhaseDistribution::Fixed(FRAC_PI_2), 10, 1).unwrap();
        assert_eq!(q.mean_r, 0.0);
        assert_eq!(q.var_r, 0.0);
        let z = ensemble_average(Scenario::Hom, PhaseDistribution::Fixed(0.0), 10, 1).unwrap();
        assert!((z.mean_r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ensemble_mzi_uniform() {
        // R_ef = sin²ζ, mean 1/2
        let s = ensemble_average(Scenario::Mzi, PhaseDistribution::Uniform, 50_000, 3).unwrap();
        assert!((s.mean_r - 0.5).abs() < 0.01);
        assert!((s.mean_intensity[0] - 0.5).abs() < 0.01);
    }

    #[test]
    fn ensemble_errors() {
        assert_eq!(
            ensemble_average(Scenario::Hom, PhaseDistribution::Uniform, 0, 1),
            Err(WaveError::NoSamples)
        );
        assert_eq!(
            "triangle".parse::<Scenario>(),
            Err(WaveError::UnknownScenario("triangle".into()))
        );
        assert!(ensemble_average(Scenario::Hom, PhaseDistribution::Fixed(f64::NAN), 3, 1).is_err());
    }

    #[test]
    fn ensemble_single_sample_is_reproducible() {
        let a = ensemble_average(Scenario::Hom, PhaseDistribution::Uniform, 1, 99).unwrap();
        let b = ensemble_average(Scenario::Hom, PhaseDistribution::Uniform, 1, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.var_r, 0.0);
    }

    #[test]
    fn partial_merge_matches_sequential() {
        let data: Vec<f64> = (0..1000).map(|k| ((k * 37) % 101) as f64 / 101.0).collect();
        let mut seq = Partial::default();
        for &x in &data {
            seq.push([x, 1.0 - x], x);
        }
        let mut left = Partial::default();
        let mut right = Partial::default();
        for &x in &data[..313] {
            left.push([x, 1.0 - x], x);
        }
        for &x in &data[313..] {
            right.push([x, 1.0 - x], x);
        }
        let merged = left.merge(right);
        assert_eq!(merged.count, seq.count);
        assert!((merged.mean_r - seq.mean_r).abs() < 1e-14);
        assert!((merged.m2_r - seq.m2_r).abs() < 1e-10);
    }
}
