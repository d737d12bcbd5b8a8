//! Subcommand implementations. Each returns rows; writing them is left to
//! [`crate::rows::emit`].

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::PathBuf;

use rayon::prelude::*;
use thiserror::Error;

use homsim_core::circuit::{
    self, builtin, parse, run_fock, run_phase_basis, run_wave, Bindings, Circuit, EvalError,
    ParseError, BUILTINS,
};
use homsim_core::fock::{bunching_probs, coincidence_prob, FockState, OccPair};
use homsim_core::phase_basis::{classify_all, evaluate_hom_case, PhaseBasisError};
use homsim_core::wave::{
    coincidence_normalized, ensemble_average, PhaseDistribution, Scenario, WaveError,
};
use homsim_core::{FieldVector, PortSlot};

use crate::rows::{fmt_float, Format, ResultRow};

/// Largest disagreement tolerated between engines in `all` mode.
pub const CROSS_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{origin}:{}:{}: {}\n    {}", error.line, error.column, error.message, error.snippet)]
    Parse { origin: String, error: ParseError },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error(transparent)]
    PhaseBasis(#[from] PhaseBasisError),
    #[error("cross-engine mismatch: {0}")]
    CrossCheck(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Engine {
    Wave,
    Fock,
    #[value(name = "phase_basis")]
    PhaseBasis,
    All,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Wave => "wave",
            Engine::Fock => "fock",
            Engine::PhaseBasis => "phase_basis",
            Engine::All => "all",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Param {
    Theta,
    Zeta,
}

impl Param {
    fn name(self) -> &'static str {
        match self {
            Param::Theta => "theta",
            Param::Zeta => "zeta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CircuitSource {
    Builtin(String),
    File(PathBuf),
}

impl CircuitSource {
    /// Builtin names win over files of the same name.
    pub fn resolve(text: &str) -> Self {
        if BUILTINS.contains(&text) {
            CircuitSource::Builtin(text.to_string())
        } else {
            CircuitSource::File(PathBuf::from(text))
        }
    }

    pub fn load(&self) -> Result<Circuit, CliError> {
        match self {
            CircuitSource::Builtin(name) => {
                builtin(name).map_err(|e| CliError::Config(e.to_string()))
            }
            CircuitSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
                    path: path.clone(),
                    source,
                })?;
                parse(&text).map_err(|error| CliError::Parse {
                    origin: path.display().to_string(),
                    error,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub circuit: CircuitSource,
    pub engine: Engine,
    pub params: Bindings,
    pub ensemble: Option<EnsembleSpec>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(circuit: CircuitSource, engine: Engine) -> Self {
        RunConfig {
            circuit,
            engine,
            params: Bindings::default(),
            ensemble: None,
            format: Format::Csv,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.ensemble.is_some() && self.engine != Engine::Wave {
            return Err(CliError::Config(format!(
                "ensembles run on the wave engine only, not '{}'",
                self.engine
            )));
        }
        if let Some(spec) = self.ensemble {
            if spec.n == 0 {
                return Err(CliError::Config("ensemble needs n >= 1".into()));
            }
        }
        for (name, v) in [("theta", self.params.theta), ("zeta", self.params.zeta)] {
            if let Some(v) = v.filter(|v| !v.is_finite()) {
                return Err(CliError::Config(format!("{name} = {v} is not finite")));
            }
        }
        Ok(())
    }
}

/// Bindings actually used for a circuit: parameters it references but
/// the user left unset default to zero.
fn effective_bindings(c: &Circuit, b: Bindings) -> Bindings {
    let fill = |name: &str, v: Option<f64>| c.uses_param(name).then(|| v.unwrap_or(0.0)).or(v);
    Bindings::new(fill("theta", b.theta), fill("zeta", b.zeta))
}

fn columns(c: &Circuit, b: &Bindings) -> (Option<f64>, Option<f64>) {
    let shown = |name: &str, v: Option<f64>| v.filter(|_| c.uses_param(name));
    (shown("theta", b.theta), shown("zeta", b.zeta))
}

fn field_row(c: &Circuit, b: &Bindings, engine: &str, out: FieldVector) -> ResultRow {
    let (theta, zeta) = columns(c, b);
    let [i1, i2] = out.intensities();
    let row = ResultRow::new(&c.name, engine, theta, zeta);
    match coincidence_normalized(i1, i2) {
        Ok(stat) => row.with_values(i1, i2, stat.r_value),
        Err(_) => row.with_values(i1, i2, 0.0).note("r_undefined", true),
    }
}

fn fock_row(c: &Circuit, b: &Bindings, state: &FockState) -> ResultRow {
    let (theta, zeta) = columns(c, b);
    let n1 = state.mean_photons(PortSlot::First);
    let n2 = state.mean_photons(PortSlot::Second);
    let mean = (n1 + n2) / 2.0;
    let r = if mean > 0.0 {
        state.mean_photon_product() / (mean * mean)
    } else {
        0.0
    };
    let (p20, p02) = bunching_probs(state);
    ResultRow::new(&c.name, "fock", theta, zeta)
        .with_values(n1, n2, r)
        .note("p11", fmt_float(coincidence_prob(state)))
        .note("p20", fmt_float(p20))
        .note("p02", fmt_float(p02))
        .note("p10", fmt_float(state.probability(OccPair::new(1, 0))))
        .note("p01", fmt_float(state.probability(OccPair::new(0, 1))))
}

fn wave_eval(c: &Circuit, b: &Bindings) -> Result<ResultRow, EvalError> {
    Ok(field_row(c, b, "wave", run_wave(c, b)?))
}

fn phase_basis_eval(c: &Circuit, b: &Bindings) -> Result<ResultRow, EvalError> {
    let (out, non_unitary) = run_phase_basis(c, b)?;
    Ok(field_row(c, b, "phase_basis", out).note("non_unitary", non_unitary))
}

fn fock_eval(c: &Circuit, b: &Bindings) -> Result<ResultRow, EvalError> {
    Ok(fock_row(c, b, &run_fock(c, b)?))
}

/// Engines that cannot represent a circuit are skipped in `all` mode.
fn skippable(e: &EvalError) -> bool {
    matches!(
        e,
        EvalError::Unsupported { .. } | EvalError::NotPhotonCount { .. }
    )
}

fn single_photon(c: &Circuit) -> bool {
    let total: f64 = c
        .inputs
        .iter()
        .map(|i| i.amp.magnitude * i.amp.magnitude)
        .sum();
    (total - 1.0).abs() < 1e-12
}

fn cross_check(c: &Circuit, rows: &[ResultRow]) -> Result<(), CliError> {
    let find = |e: &str| rows.iter().find(|r| r.engine == e);
    let point = |r: &ResultRow| {
        format!(
            "theta={:?} zeta={:?}",
            r.theta.map(circuit::format_angle),
            r.zeta.map(circuit::format_angle)
        )
    };
    if let (Some(w), Some(p)) = (find("wave"), find("phase_basis")) {
        let diffs = [
            w.i_port1 - p.i_port1,
            w.i_port2 - p.i_port2,
            w.r_norm - p.r_norm,
        ];
        if diffs.iter().any(|d| d.abs() > CROSS_TOL) {
            return Err(CliError::CrossCheck(format!(
                "wave and phase_basis disagree at {}: wave ({}, {}, {}) vs phase_basis ({}, {}, {})",
                point(w), w.i_port1, w.i_port2, w.r_norm, p.i_port1, p.i_port2, p.r_norm
            )));
        }
    }
    if let (Some(w), Some(f)) = (find("wave"), find("fock")) {
        if single_photon(c) {
            let diffs = [w.i_port1 - f.i_port1, w.i_port2 - f.i_port2];
            if diffs.iter().any(|d| d.abs() > CROSS_TOL) {
                return Err(CliError::CrossCheck(format!(
                    "wave and fock disagree at {}: wave ({}, {}) vs fock ({}, {})",
                    point(w),
                    w.i_port1,
                    w.i_port2,
                    f.i_port1,
                    f.i_port2
                )));
            }
        }
    }
    Ok(())
}

/// Rows for one parameter binding.
pub fn eval_point(c: &Circuit, engine: Engine, b: &Bindings) -> Result<Vec<ResultRow>, CliError> {
    let b = effective_bindings(c, *b);
    match engine {
        Engine::Wave => Ok(vec![wave_eval(c, &b)?]),
        Engine::Fock => Ok(vec![fock_eval(c, &b)?]),
        Engine::PhaseBasis => Ok(vec![phase_basis_eval(c, &b)?]),
        Engine::All => {
            let mut rows = Vec::new();
            for eval in [wave_eval, fock_eval, phase_basis_eval] {
                match eval(c, &b) {
                    Ok(row) => rows.push(row),
                    Err(e) if skippable(&e) => {}
                    Err(e) => return Err(e.into()),
                }
            }
            if rows.is_empty() {
                return Err(CliError::Config(format!(
                    "no engine can evaluate circuit '{}'",
                    c.name
                )));
            }
            cross_check(c, &rows)?;
            Ok(rows)
        }
    }
}

pub fn cmd_run(config: &RunConfig) -> Result<Vec<ResultRow>, CliError> {
    config.validate()?;
    let c = config.circuit.load()?;
    eval_point(&c, config.engine, &config.params)
}

/// `steps` evenly spaced points from `from` to `to`, both included.
pub fn sweep_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 2 {
        return Err(CliError::Config(format!(
            "sweep needs at least 2 steps, got {steps}"
        )));
    }
    if !from.is_finite() || !to.is_finite() {
        return Err(CliError::Config("sweep bounds must be finite".into()));
    }
    if from > to {
        return Err(CliError::Config(format!(
            "reversed sweep range {from} > {to}"
        )));
    }
    let last = steps - 1;
    let mut grid: Vec<f64> = (0..steps)
        .map(|k| from + (to - from) * (k as f64 / last as f64))
        .collect();
    grid[last] = to;
    Ok(grid)
}

pub fn cmd_sweep(
    config: &RunConfig,
    param: Param,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<Vec<ResultRow>, CliError> {
    config.validate()?;
    let grid = sweep_grid(from, to, steps)?;
    let c = config.circuit.load()?;
    if !c.uses_param(param.name()) {
        return Err(CliError::Config(format!(
            "circuit '{}' does not use parameter {}",
            c.name,
            param.name()
        )));
    }
    let per_point = grid
        .par_iter()
        .map(|&x| {
            let mut b = config.params;
            match param {
                Param::Theta => b.theta = Some(x),
                Param::Zeta => b.zeta = Some(x),
            }
            eval_point(&c, config.engine, &b)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

/// One row per phase-basis rule. Intensities and `r_norm` are the HOM
/// outputs at `θ = π/2`; degenerate rules report zeros.
pub fn cmd_classify() -> Result<Vec<ResultRow>, CliError> {
    classify_all()?
        .into_iter()
        .map(|v| {
            let row = ResultRow::new("classify", "phase_basis", Some(FRAC_PI_2), None);
            let row = if v.degenerate {
                row
            } else {
                let hom = evaluate_hom_case(v.case, FRAC_PI_2)?;
                row.with_values(hom.i_c, hom.i_d, hom.r)
            };
            Ok(row
                .note("case", v.case)
                .note("allowed", v.allowed)
                .note("degenerate", v.degenerate)
                .note("mzi_directional", v.mzi_directional)
                .note("notes", &v.notes))
        })
        .collect()
}

pub fn cmd_ensemble(config: &RunConfig) -> Result<Vec<ResultRow>, CliError> {
    config.validate()?;
    let spec = config
        .ensemble
        .ok_or_else(|| CliError::Config("ensemble settings missing".into()))?;
    let scenario = match &config.circuit {
        CircuitSource::Builtin(name) => name.parse::<Scenario>().ok(),
        CircuitSource::File(_) => None,
    }
    .ok_or_else(|| CliError::Config("ensembles support the builtin hom and mzi circuits".into()))?;
    let fixed = match scenario {
        Scenario::Hom => config.params.theta,
        Scenario::Mzi => config.params.zeta,
    };
    let dist = fixed.map_or(PhaseDistribution::Uniform, PhaseDistribution::Fixed);
    let stats = ensemble_average(scenario, dist, spec.n, spec.seed)?;
    let (theta, zeta) = match scenario {
        Scenario::Hom => (fixed, None),
        Scenario::Mzi => (None, fixed),
    };
    let row = ResultRow::new(&scenario.to_string(), "wave", theta, zeta)
        .with_values(
            stats.mean_intensity[0],
            stats.mean_intensity[1],
            stats.mean_r,
        )
        .note("n", stats.n_samples)
        .note("seed", stats.seed)
        .note("var_r", fmt_float(stats.var_r))
        .note("stderr", fmt_float(stats.stderr()))
        .note(
            "distribution",
            if fixed.is_some() { "fixed" } else { "uniform" },
        );
    Ok(vec![row])
}

/// Parses and validates a circuit, returning its canonical text.
pub fn cmd_parse_check(source: &CircuitSource) -> Result<String, CliError> {
    let c = source.load()?;
    circuit::validate(&c).map_err(EvalError::from)?;
    Ok(circuit::render(&c))
}
