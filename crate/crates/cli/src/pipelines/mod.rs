//! One pipeline per experiment kind: build the problem from the config,
//! run it, emit report + artifacts + manifest, and record the declared
//! checks whose conjunction decides the exit code.

mod audit;
mod capacity;
mod decay;
mod exponents;
mod klt;
mod mms;
mod solve;
mod uniqueness;

use crate::config::{ExperimentConfig, Kind, ReferenceKind};
use crate::manifest::RunManifest;
use ma_core::density::{algebraic_density, normalize, Density, DensityError};
use ma_core::capacity::CapacityError;
use ma_core::field::io as field_io;
use ma_core::field::PeriodicField;
use ma_core::solver::SolveError;
use ma_core::{GridSpec, ReferenceForm};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Exit codes: 0 all checks pass, 1 a declared check failed, then one code
/// per error family.
pub mod exit_codes {
    pub const CHECKS_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const SOLVER: i32 = 3;
    pub const CAPACITY: i32 = 4;
    pub const DENSITY: i32 = 5;
    pub const INCONCLUSIVE: i32 = 6;
    pub const IO: i32 = 7;
}

mod thiserror_shim {
    use super::*;

    #[derive(Debug)]
    pub enum PipelineError {
        Config(String),
        Solve(SolveError),
        Capacity(CapacityError),
        Density(DensityError),
        Io(std::io::Error),
    }

    impl std::fmt::Display for PipelineError {
        fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            match self {
                PipelineError::Config(m) => write!(f, "config: {m}"),
                PipelineError::Solve(e) => write!(f, "solver: {e}"),
                PipelineError::Capacity(e) => write!(f, "capacity: {e}"),
                PipelineError::Density(e) => write!(f, "density: {e}"),
                PipelineError::Io(e) => write!(f, "io: {e}"),
            }
        }
    }

    impl std::error::Error for PipelineError {}

    impl PipelineError {
        pub fn exit_code(&self) -> i32 {
            match self {
                PipelineError::Config(_) => exit_codes::CONFIG,
                PipelineError::Solve(SolveError::Density(DensityError::Inconclusive(_))) => {
                    exit_codes::INCONCLUSIVE
                }
                PipelineError::Solve(SolveError::Density(_)) => exit_codes::DENSITY,
                PipelineError::Solve(SolveError::Config(m)) => {
                    let _ = m;
                    exit_codes::CONFIG
                }
                PipelineError::Solve(_) => exit_codes::SOLVER,
                PipelineError::Capacity(CapacityError::Density(
                    DensityError::Inconclusive(_),
                )) => exit_codes::INCONCLUSIVE,
                PipelineError::Capacity(CapacityError::Density(_)) => exit_codes::DENSITY,
                PipelineError::Capacity(_) => exit_codes::CAPACITY,
                PipelineError::Density(DensityError::Inconclusive(_)) => {
                    exit_codes::INCONCLUSIVE
                }
                PipelineError::Density(_) => exit_codes::DENSITY,
                PipelineError::Io(_) => exit_codes::IO,
            }
        }
    }

    impl From<SolveError> for PipelineError {
        fn from(e: SolveError) -> Self {
            PipelineError::Solve(e)
        }
    }
    impl From<CapacityError> for PipelineError {
        fn from(e: CapacityError) -> Self {
            PipelineError::Capacity(e)
        }
    }
    impl From<DensityError> for PipelineError {
        fn from(e: DensityError) -> Self {
            PipelineError::Density(e)
        }
    }
    impl From<std::io::Error> for PipelineError {
        fn from(e: std::io::Error) -> Self {
            PipelineError::Io(e)
        }
    }
    impl From<ma_core::field::FieldError> for PipelineError {
        fn from(e: ma_core::field::FieldError) -> Self {
            match e {
                ma_core::field::FieldError::Io(io) => PipelineError::Io(io),
                other => PipelineError::Config(other.to_string()),
            }
        }
    }
}

pub use thiserror_shim::PipelineError as Error;

/// Row of the cross-experiment comparison table. The column set is fixed;
/// kinds without gap data leave those cells empty.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct TableRow {
    pub case_id: String,
    pub grid_m: usize,
    pub eps: f64,
    pub residual_sup: f64,
    pub sup_norm: f64,
    pub l2_gap: Option<f64>,
    pub sup_gap: Option<f64>,
}

#[derive(Serialize)]
struct ReportEnvelope<T: Serialize> {
    kind: &'static str,
    case_id: String,
    seed: u64,
    payload: T,
    table_rows: Vec<TableRow>,
}

pub struct RunOutcome {
    pub manifest_path: PathBuf,
    pub all_passed: bool,
}

struct Emitter<'a> {
    dir: &'a Path,
    manifest: RunManifest,
}

impl<'a> Emitter<'a> {
    fn new(cfg: &ExperimentConfig, dir: &'a Path) -> Result<Self, Error> {
        std::fs::create_dir_all(dir)?;
        Ok(Emitter {
            dir,
            manifest: RunManifest::new(cfg.kind.as_str(), &cfg.case_id, cfg.seed, cfg.raw.clone()),
        })
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.manifest.check(name, pass, detail);
    }

    fn report<T: Serialize>(
        &mut self,
        cfg: &ExperimentConfig,
        payload: T,
        table_rows: Vec<TableRow>,
    ) -> Result<(), Error> {
        let envelope = ReportEnvelope {
            kind: cfg.kind.as_str(),
            case_id: cfg.case_id.clone(),
            seed: cfg.seed,
            payload,
            table_rows: table_rows.clone(),
        };
        let path = self.dir.join("report.json");
        let bytes = crate::json::to_vec_pretty17(&envelope)
            .map_err(|e| Error::Config(format!("report serialization: {e}")))?;
        std::fs::write(&path, bytes)?;
        self.manifest.artifact(&path).map_err(io_shim)?;

        let table_path = self.dir.join("table.csv");
        let mut out = Vec::new();
        crate::table::write_rows(&mut out, &table_rows, ',').map_err(Error::Io)?;
        std::fs::write(&table_path, out)?;
        self.manifest.artifact(&table_path).map_err(io_shim)?;
        Ok(())
    }

    fn field(&mut self, name: &str, field: &PeriodicField) -> Result<(), Error> {
        let path = self.dir.join(name);
        field_io::save_field(&path, field)?;
        self.manifest.artifact(&path).map_err(io_shim)?;
        Ok(())
    }

    fn text(&mut self, name: &str, contents: &[u8]) -> Result<(), Error> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        self.manifest.artifact(&path).map_err(io_shim)?;
        Ok(())
    }

    fn finish(mut self, wall_ms: u64) -> Result<RunOutcome, Error> {
        self.manifest.wall_ms = wall_ms;
        let manifest_path = self.manifest.write(self.dir).map_err(io_shim)?;
        Ok(RunOutcome {
            manifest_path,
            all_passed: self.manifest.all_passed,
        })
    }
}

fn io_shim(e: anyhow::Error) -> Error {
    Error::Config(e.to_string())
}

/// Execute a parsed experiment config end to end.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome, Error> {
    let clock = Instant::now();
    let dir = cfg.output_dir.clone();
    let mut emitter = Emitter::new(cfg, &dir)?;

    match cfg.kind {
        Kind::Solve => solve::run(cfg, &mut emitter)?,
        Kind::Mms => mms::run(cfg, &mut emitter)?,
        Kind::DecayLemma => decay::run(cfg, &mut emitter)?,
        Kind::Klt => klt::run(cfg, &mut emitter)?,
        Kind::Capacity => capacity::run(cfg, &mut emitter)?,
        Kind::Stability => exponents::run_stability(cfg, &mut emitter)?,
        Kind::Holder => exponents::run_holder(cfg, &mut emitter)?,
        Kind::Uniqueness => uniqueness::run(cfg, &mut emitter)?,
        Kind::Audit => audit::run(cfg, &mut emitter)?,
    }

    emitter.finish(clock.elapsed().as_millis() as u64)
}

fn build_form(cfg: &ExperimentConfig) -> Result<ReferenceForm, Error> {
    let grid = required_grid(cfg)?;
    match cfg.reference {
        ReferenceKind::Flat => Ok(ReferenceForm::flat(grid)),
        ReferenceKind::DegenerateHyperplane => {
            ReferenceForm::degenerate_hyperplane(grid, cfg.reference_delta).map_err(Into::into)
        }
    }
}

fn required_grid(cfg: &ExperimentConfig) -> Result<GridSpec, Error> {
    cfg.grid
        .ok_or_else(|| Error::Config(format!("kind {} needs a [grid]", cfg.kind.as_str())))
}

/// Build the configured density on the given grid, normalized to unit
/// mass. The uniform density goes through the algebraic constructor so it
/// carries a generator for refinement studies.
fn build_density(cfg: &ExperimentConfig, grid: GridSpec) -> Result<Density, Error> {
    let spec = cfg.density.algebraic.clone().unwrap_or_default();
    let f = algebraic_density(&spec, grid)?;
    Ok(normalize(&f, 1.0)?)
}
