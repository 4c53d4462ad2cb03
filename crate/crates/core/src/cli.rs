//! The `bunchlab` command line.
//!
//! Exit codes: 0 success (or conjecture not violated), 1 a numerical check
//! failed, 2 I/O failure, 3 validation or malformed input, 4 size cap
//! exceeded, 10 conjecture violated.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::conjectures::{check_m1_with, check_m2_with, theorem1_b};
use crate::distinguishability::{
    bunching_probability, directions_from_f, epsilon_scan, linear_grid, InternalStateFamily,
    ScanMetadata,
};
use crate::error::{BunchError, Result};
use crate::interferometry::{
    clements_decompose, clements_reconstruct, drury_gram, drury_matrix, drury_setup,
    extend_counterexample, h_matrix, BunchingSetup, Interferometer,
};
use crate::io::{
    matrix_to_value, read_matrix, scan_to_csv, vector_to_matrix, write_atomic, write_json,
    write_matrix,
};
use crate::matcore::{CVector, ComplexMatrix, GramMatrix, Tolerances};
use crate::oracle::fock_bunching_oracle;
use crate::permanent::f_matrix;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_VIOLATION: i32 = 10;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BUNCHLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "bunchlab", version, about = "Multimode boson bunching with partially distinguishable photons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the 8-photon, 10-mode Drury setup and write its matrices.
    Drury(RunConfig),
    /// Scan the bunching ratio over the perturbation strength.
    Scan(RunConfig),
    /// Check perm(A⊙B) ≤ perm(A)∏B_ii.
    CheckM1(RunConfig),
    /// Check that perm(A) is the top eigenvalue of F.
    CheckM2(RunConfig),
    /// Compare the Fock-space oracle with the permanent formula.
    OracleCompare(RunConfig),
    /// Decompose a unitary into a coupler mesh and verify the round trip.
    Clements(RunConfig),
    /// Embed a setup into a larger two-stage circuit and verify H survives.
    Extend(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Max,
    Min,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Hom,
    HomDistinguishable,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Input matrix file(s).
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// Output file or directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon_min: f64,
    #[arg(long, default_value_t = 2.5)]
    pub epsilon_max: f64,
    #[arg(long, default_value_t = 51)]
    pub steps: usize,
    /// Single perturbation strength (check-m1 builds B(ε) from it).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative violation tolerance for conjecture checks.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output modes, 1-based, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub subset: Vec<usize>,
    /// Photon count for setups read from a unitary.
    #[arg(long)]
    pub photons: Option<usize>,
    #[arg(long, value_enum, default_value_t = Direction::Max)]
    pub direction: Direction,
    /// Direction vector file (n×1 matrix) for `--direction custom`.
    #[arg(long)]
    pub vector: Option<PathBuf>,
    /// Perturbation Gram matrix file; all ones when absent.
    #[arg(long)]
    pub delta: Option<PathBuf>,
    /// Use the built-in Drury setup.
    #[arg(long)]
    pub drury: bool,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Draw a random instance from the seed.
    #[arg(long)]
    pub random: bool,
    /// Photon count of a random oracle instance.
    #[arg(long)]
    pub n: Option<usize>,
    /// Mode count of a random instance.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Second-stage unitary file for `extend`.
    #[arg(long)]
    pub second_stage: Option<PathBuf>,
    /// Mode count of a seeded random second stage for `extend`.
    #[arg(long)]
    pub second_modes: Option<usize>,
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon_min.is_finite() && self.epsilon_max.is_finite()) {
            return Err(BunchError::Validation("epsilon bounds must be finite".into()));
        }
        if self.epsilon_min > self.epsilon_max {
            return Err(BunchError::Validation(format!(
                "epsilon-min {} exceeds epsilon-max {}",
                self.epsilon_min, self.epsilon_max
            )));
        }
        if self.steps == 0 {
            return Err(BunchError::Validation("steps must be at least 1".into()));
        }
        if self.subset.contains(&0) {
            return Err(BunchError::Validation("subset indices are 1-based".into()));
        }
        Ok(())
    }

    fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(t) = self.tol {
            tol.violation = t;
        }
        tol
    }

    fn grid(&self) -> Vec<f64> {
        linear_grid(self.epsilon_min, self.epsilon_max, self.steps)
    }

    fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn zero_based_subset(&self) -> Vec<usize> {
        self.subset.iter().map(|&k| k - 1).collect()
    }
}

/// Result of one command: an exit code and the text for stdout.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: EXIT_OK, stdout }
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// its report to `out`. Errors go to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(err, "{e}");
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => 3,
            };
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            let _ = out.write_all(outcome.stdout.as_bytes());
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Caps the global worker pool at `BUNCHLAB_THREADS` when set.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Drury(c) => cmd_drury(c),
        Command::Scan(c) => cmd_scan(c),
        Command::CheckM1(c) => cmd_check_m1(c),
        Command::CheckM2(c) => cmd_check_m2(c),
        Command::OracleCompare(c) => cmd_oracle_compare(c),
        Command::Clements(c) => cmd_clements(c),
        Command::Extend(c) => cmd_extend(c),
    }
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json values serialize") + "\n"
}

fn tolerances_json(tol: &Tolerances) -> serde_json::Value {
    json!({
        "hermitian": tol.hermitian,
        "psd": tol.psd,
        "unit_diagonal": tol.unit_diagonal,
        "unit_norm": tol.unit_norm,
        "rank": tol.rank,
        "unitary": tol.unitary,
        "violation": tol.violation,
    })
}

/// Writes the Drury matrices and a summary into the output directory.
pub fn cmd_drury(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let dir = cfg.output_dir();
    std::fs::create_dir_all(&dir).map_err(|source| BunchError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let tol = cfg.tolerances();
    let drury = drury_setup(cfg.seed)?;
    let h = &drury.setup.h;
    let f = f_matrix(h)?;
    let dirs = directions_from_f(&f)?;
    let m2 = check_m2_with(&drury_gram(), &tol)?;

    write_matrix(&dir.join("drury_M.json"), &drury_matrix())?;
    write_matrix(&dir.join("drury_A.json"), &drury_gram())?;
    write_matrix(&dir.join("drury_U.json"), drury.setup.interferometer.unitary())?;
    write_matrix(&dir.join("drury_H.json"), h)?;
    write_matrix(&dir.join("drury_F.json"), &f.matrix)?;
    write_matrix(&dir.join("drury_v_max.json"), &vector_to_matrix(&dirs.v_max))?;

    let summary = json!({
        "ratio": dirs.lambda_max / dirs.perm_h,
        "perm_H": dirs.perm_h,
        "lambda_max": dirs.lambda_max,
        "lambda_min": dirs.lambda_min,
        "m2_ratio_unscaled": m2.ratio,
        "alpha": drury.alpha,
        "photons": drury.setup.n,
        "modes": drury.setup.interferometer.modes(),
        "subset": drury.setup.subset.iter().map(|k| k + 1).collect::<Vec<_>>(),
        "unitarity_defect": drury.setup.interferometer.unitary().unitarity_defect(),
        "metadata": { "seed": cfg.seed, "tolerances": tolerances_json(&tol) },
    });
    write_json(&dir.join("drury_summary.json"), &summary)?;
    Ok(Outcome::ok(pretty(&summary)))
}

/// Either the built-in Drury setup or `H` read from `--input`.
fn load_h(cfg: &RunConfig) -> Result<(ComplexMatrix, String)> {
    if cfg.drury {
        let d = drury_setup(cfg.seed)?;
        return Ok((d.setup.h, format!("drury (seed {}, alpha {:e})", cfg.seed, d.alpha)));
    }
    let [path] = cfg.input.as_slice() else {
        return Err(BunchError::Validation("scan needs --drury or exactly one --input H".into()));
    };
    Ok((read_matrix(path)?, path.display().to_string()))
}

fn read_vector(path: &Path) -> Result<CVector> {
    let m = read_matrix(path)?;
    if m.cols() != 1 {
        return Err(BunchError::Dimension(format!("{} is not a column vector", path.display())));
    }
    Ok(m.column(0))
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let (h, source) = load_h(cfg)?;
    let n = h.rows();
    let delta = match &cfg.delta {
        Some(p) => GramMatrix::new(read_matrix(p)?)?,
        None => GramMatrix::ones(n),
    };
    let (v, provenance) = match cfg.direction {
        Direction::Custom => {
            let path = cfg.vector.as_ref().ok_or_else(|| {
                BunchError::Validation("--direction custom needs --vector".into())
            })?;
            (read_vector(path)?, format!("custom ({})", path.display()))
        }
        dir => {
            let d = directions_from_f(&f_matrix(&h)?)?;
            if dir == Direction::Max {
                (d.v_max, "v_max".to_string())
            } else {
                (d.v_min, "v_min".to_string())
            }
        }
    };
    let mut scan = epsilon_scan(&h, &v, &delta, &cfg.grid())?;
    scan.metadata = ScanMetadata { setup: source, direction: provenance, seed: Some(cfg.seed) };
    let csv = scan_to_csv(&scan);
    match &cfg.output {
        Some(path) => {
            write_atomic(path, &csv)?;
            let peak = scan.peak();
            Ok(Outcome::ok(pretty(&json!({
                "output": path.display().to_string(),
                "argmax_epsilon": peak.epsilon,
                "max_ratio": peak.ratio,
                "perm_H": scan.perm_h,
                "metadata": scan.metadata,
            }))))
        }
        None => Ok(Outcome::ok(csv)),
    }
}

fn verdict_outcome(cfg: &RunConfig, value: serde_json::Value, violated: bool) -> Result<Outcome> {
    if let Some(path) = &cfg.output {
        write_json(path, &value)?;
    }
    Ok(Outcome {
        code: if violated { EXIT_VIOLATION } else { EXIT_OK },
        stdout: pretty(&value),
    })
}

pub fn cmd_check_m2(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let a = match (cfg.drury, cfg.input.as_slice()) {
        (true, _) => drury_gram(),
        (false, [path]) => read_matrix(path)?,
        _ => return Err(BunchError::Validation("check-m2 needs exactly one --input".into())),
    };
    let verdict = check_m2_with(&a, &cfg.tolerances())?;
    let mut value = serde_json::to_value(&verdict).expect("verdict serializes");
    value["metadata"] = json!({ "seed": cfg.seed });
    verdict_outcome(cfg, value, verdict.violated)
}

pub fn cmd_check_m1(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let tol = cfg.tolerances();
    let (a, b, how) = match (cfg.input.as_slice(), cfg.epsilon) {
        ([pa, pb], None) => (read_matrix(pa)?, read_matrix(pb)?, "B from file".to_string()),
        ([pa], Some(eps)) => {
            let a = read_matrix(pa)?;
            let m2 = check_m2_with(&a, &tol)?;
            let v = m2.witness_vector.expect("M2 verdicts carry a vector");
            (a, theorem1_b(&v, eps), format!("B(ε = {eps}) along the top eigenvector of F"))
        }
        _ => {
            return Err(BunchError::Validation(
                "check-m1 needs --input A --input B, or --input A --epsilon ε".into(),
            ))
        }
    };
    let verdict = check_m1_with(&a, &b, &tol)?;
    let mut value = serde_json::to_value(&verdict).expect("verdict serializes");
    value["metadata"] = json!({ "seed": cfg.seed, "b_source": how });
    if cfg.epsilon.is_some() {
        value["b_matrix"] = matrix_to_value(&b);
    }
    verdict_outcome(cfg, value, verdict.violated)
}

/// Random internal states: unit Gaussian vectors of dimension `n`.
fn random_states(n: usize, rng: &mut ChaCha8Rng) -> Result<InternalStateFamily> {
    let vectors = (0..n)
        .map(|_| {
            let v = crate::interferometry::gaussian_vector(n, rng);
            let norm = v.norm();
            v / Complex64::new(norm, 0.0)
        })
        .collect();
    InternalStateFamily::new(vectors)
}

/// A seeded oracle instance: unitary, 0-based subset and internal states.
pub fn random_oracle_instance(
    n: usize,
    modes: usize,
    seed: u64,
) -> Result<(Interferometer, Vec<usize>, InternalStateFamily)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Interferometer::random_with(modes, &mut rng);
    let size = rng.random_range(1..=modes);
    let mut subset: Vec<usize> = (0..modes).collect();
    for i in 0..size {
        let j = rng.random_range(i..modes);
        subset.swap(i, j);
    }
    subset.truncate(size);
    subset.sort_unstable();
    let states = random_states(n, &mut rng)?;
    Ok((u, subset, states))
}

pub fn cmd_oracle_compare(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let (u, subset, states, label) = if cfg.random {
        let n = cfg.n.unwrap_or(3);
        let modes = cfg.modes.unwrap_or(n + 2);
        if n > crate::oracle::MAX_ORACLE_PHOTONS || modes > crate::oracle::MAX_ORACLE_MODES {
            return Err(BunchError::Size(format!(
                "oracle comparison limited to 4 photons in 6 modes, got {n} in {modes}"
            )));
        }
        if n == 0 || modes < n {
            return Err(BunchError::Validation(format!("cannot place {n} photons in {modes} modes")));
        }
        let (u, s, st) = random_oracle_instance(n, modes, cfg.seed)?;
        (u, s, st, format!("random (seed {}, n {n}, m {modes})", cfg.seed))
    } else {
        let preset = cfg.preset.unwrap_or(Preset::Hom);
        let states = match preset {
            Preset::Hom => InternalStateFamily::identical(CVector::from_element(1, 1.0.into()), 2)?,
            Preset::HomDistinguishable => InternalStateFamily::orthogonal(2),
        };
        let label = format!("{preset:?}");
        (Interferometer::balanced_coupler(), vec![0], states, label)
    };
    let oracle = fock_bunching_oracle(&u, &subset, &states)?;
    let setup = h_matrix(&u, &subset, states.photons())?;
    let formula = bunching_probability(&setup.h, &states.gram()?)?;
    let diff = (oracle - formula).abs();
    let report = json!({
        "instance": label,
        "subset": subset.iter().map(|k| k + 1).collect::<Vec<_>>(),
        "oracle": oracle,
        "permanent_formula": formula,
        "abs_difference": diff,
        "metadata": { "seed": cfg.seed },
    });
    if let Some(path) = &cfg.output {
        write_json(path, &report)?;
    }
    Ok(Outcome {
        code: if diff <= 1e-9 { EXIT_OK } else { EXIT_CHECK_FAILED },
        stdout: pretty(&report),
    })
}

pub fn cmd_clements(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let (u, label) = if cfg.drury {
        (drury_setup(cfg.seed)?.setup.interferometer, format!("drury (seed {})", cfg.seed))
    } else if cfg.random {
        let m = cfg.modes.unwrap_or(6);
        (Interferometer::random(m, cfg.seed), format!("random {m}x{m} (seed {})", cfg.seed))
    } else {
        let [path] = cfg.input.as_slice() else {
            return Err(BunchError::Validation(
                "clements needs --input U, --drury or --random".into(),
            ));
        };
        (Interferometer::with_tolerance(read_matrix(path)?, 1e-8)?, path.display().to_string())
    };
    let mesh = clements_decompose(&u)?;
    let back = clements_reconstruct(&mesh)?;
    let err = back.unitary().max_abs_diff(u.unitary());
    let m = u.modes();
    let report = json!({
        "instance": label,
        "modes": m,
        "element_count": mesh.couplers.len(),
        "max_elements": m * (m - 1) / 2,
        "nontrivial_count": mesh.nontrivial_count(1e-12),
        "round_trip_error": err,
        "mesh": mesh,
        "metadata": { "seed": cfg.seed },
    });
    if let Some(path) = &cfg.output {
        write_json(path, &report)?;
    }
    Ok(Outcome {
        code: if err <= 1e-9 { EXIT_OK } else { EXIT_CHECK_FAILED },
        stdout: pretty(&json!({
            "instance": report["instance"],
            "element_count": report["element_count"],
            "nontrivial_count": report["nontrivial_count"],
            "round_trip_error": err,
        })),
    })
}

pub fn cmd_extend(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    let base: BunchingSetup = if cfg.drury {
        drury_setup(cfg.seed)?.setup
    } else {
        let [path] = cfg.input.as_slice() else {
            return Err(BunchError::Validation("extend needs --drury or --input U1".into()));
        };
        let u = Interferometer::with_tolerance(read_matrix(path)?, 1e-8)?;
        let n = cfg
            .photons
            .ok_or_else(|| BunchError::Validation("--photons is required with --input".into()))?;
        if cfg.subset.is_empty() {
            return Err(BunchError::Validation("--subset is required with --input".into()));
        }
        h_matrix(&u, &cfg.zero_based_subset(), n)?
    };
    let k1 = base.subset.len();
    let (u2, stage) = match (&cfg.second_stage, cfg.second_modes) {
        (Some(path), _) => (
            Interferometer::with_tolerance(read_matrix(path)?, 1e-8)?,
            path.display().to_string(),
        ),
        (None, Some(m2)) => (
            Interferometer::random(m2, cfg.seed.wrapping_add(1)),
            format!("random {m2}-mode (seed {})", cfg.seed.wrapping_add(1)),
        ),
        (None, None) => (Interferometer::identity(k1), format!("identity on {k1} modes")),
    };
    let composite = extend_counterexample(&base, &u2, 0)?;
    let h_error = composite.h.max_abs_diff(&base.h);

    let directions = directions_from_f(&f_matrix(&base.h)?)?;
    let ones = GramMatrix::ones(base.n);
    let grid = cfg.grid();
    let base_scan = epsilon_scan(&base.h, &directions.v_max, &ones, &grid)?;
    let comp_scan = epsilon_scan(&composite.h, &directions.v_max, &ones, &grid)?;
    let ratio_diff = base_scan
        .rows
        .iter()
        .zip(&comp_scan.rows)
        .map(|(a, b)| (a.ratio - b.ratio).abs())
        .fold(0.0, f64::max);

    let preserved = h_error <= 1e-10;
    let report = json!({
        "second_stage": stage,
        "composite_modes": composite.interferometer.modes(),
        "k2": composite.subset.iter().map(|k| k + 1).collect::<Vec<_>>(),
        "k2_size": composite.subset.len(),
        "photons": composite.n,
        "h_max_abs_error": h_error,
        "scan_max_ratio_difference": ratio_diff,
        "composite_max_ratio": comp_scan.peak().ratio,
        "preserved": preserved,
        "metadata": { "seed": cfg.seed },
    });
    if let Some(dir) = &cfg.output {
        std::fs::create_dir_all(dir).map_err(|source| BunchError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        write_matrix(&dir.join("composite_U.json"), composite.interferometer.unitary())?;
        write_matrix(&dir.join("composite_H.json"), &composite.h)?;
        write_json(&dir.join("extend_report.json"), &report)?;
    }
    Ok(Outcome {
        code: if preserved { EXIT_OK } else { EXIT_CHECK_FAILED },
        stdout: pretty(&report),
    })
}
