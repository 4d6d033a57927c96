//! `hlab`: batch front end for attractor rendering, Hutchinson measures,
//! and operator identity verification.
//!
//! Subcommands write their artifacts under `--out` and print a short
//! summary; `verify` streams one DefectReport per check as JSON lines and
//! exits 0 iff every emitted report passes.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;

use hlab_core::export::{
    basis_to_json, cdf_to_csv, cloud_to_csv, cloud_to_pgm, cloud_to_ppm, measure_sidecar,
    measure_to_csv, operator_to_csv, operator_to_json,
};
use hlab_core::suite::{run_check, run_full_suite, CHECK_NAMES};
use hlab_core::{
    attractor_chaos_game, attractor_deterministic, cell_space, covariance_defect, cylinder_basis,
    integrate, invariance_defect, open_set_condition_check, pou_basis, self_similar_measure,
    self_similarity_defect, weak_distance, Ambient, AtomicMeasure, DefectReport, Error,
    MeasureKind, OpenSet, Point, RunReport, System64,
};

#[derive(Parser)]
#[command(
    name = "hlab",
    version,
    about = "Numerical laboratory for self-similar sets and their operator algebras"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Ppm,
}

#[derive(Args)]
struct Common {
    /// Built-in system (tent, cantor[:ratio], shift:n, sierpinski) or a JSON file path
    #[arg(long, default_value = "tent")]
    system: String,

    /// Word depth N; cell spaces have n^N cells (capped by HLAB_BUDGET_CELLS)
    #[arg(long, default_value_t = 6)]
    depth: usize,

    /// RNG seed for all randomized checks and the chaos game
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output directory for artifact files
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Artifact format for structured exports
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Cmd {
    /// Render the attractor as a point CSV plus a 1-D/2-D density raster
    Attractor {
        #[command(flatten)]
        common: Common,
        /// Use the chaos game with this many samples instead of the word cloud
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Build the self-similar measure and export atoms, sidecar, and CDF
    Measure {
        #[command(flatten)]
        common: Common,
        /// Also print the k-th moment of the first coordinate
        #[arg(long)]
        moment: Option<u32>,
    },
    /// Run named checks; one DefectReport JSON line each, exit 0 iff all pass
    Verify {
        #[command(flatten)]
        common: Common,
        /// Checks to run (see `hlab verify --help` for the list)
        #[arg(required = true, value_name = "CHECK")]
        checks: Vec<String>,
        /// Per-check tolerance override, repeatable: --tol check=value
        #[arg(long = "tol", value_name = "CHECK=VALUE")]
        tol: Vec<String>,
        /// Open set for the osc check: lo1,hi1[,lo2,hi2...][;box2...]
        #[arg(long = "open-set", value_name = "BOXES")]
        open_set: Option<String>,
        /// Symbol for the covariance check:
        /// identity | indicator:<word> | lipschitz:<slope> | custom:<file>
        #[arg(long = "fn", value_name = "SPEC")]
        symbol: Option<String>,
    },
    /// Export operator matrices and basis families for inspection
    Export {
        #[command(flatten)]
        common: Common,
        /// What to export: comp | transfer | basis | pou
        #[arg(required = true, value_name = "WHAT")]
        what: String,
    },
    /// Aggregate DefectReports into one JSON document
    Report {
        #[command(flatten)]
        common: Common,
        /// Run the full check suite instead of collecting prior verify output
        #[arg(long = "run-all")]
        run_all: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Attractor { common, samples } => cmd_attractor(&common, samples),
        Cmd::Measure { common, moment } => cmd_measure(&common, moment),
        Cmd::Verify { common, checks, tol, open_set, symbol } => {
            cmd_verify(&common, &checks, &tol, open_set.as_deref(), symbol.as_deref())
        }
        Cmd::Export { common, what } => cmd_export(&common, &what),
        Cmd::Report { common, run_all } => cmd_report(&common, run_all),
    }
}

fn resolve_system(spec: &str) -> Result<Arc<System64>> {
    let sys = if spec.ends_with(".json") || Path::new(spec).is_file() {
        let text = fs::read_to_string(spec).with_context(|| format!("reading system file {spec}"))?;
        hlab_core::from_json::<f64>(&text)?
    } else {
        hlab_core::builtin::<f64>(spec)?
    };
    Ok(Arc::new(sys))
}

fn file_stem(sys: &System64) -> String {
    sys.name.replace([':', '/', '\\'], "-")
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn cmd_attractor(common: &Common, samples: Option<usize>) -> Result<ExitCode> {
    let sys = resolve_system(&common.system)?;
    let stem = file_stem(&sys);
    let cloud = match samples {
        Some(k) => attractor_chaos_game(&sys, k, 100, common.seed)?,
        None => {
            let seed_point = sys.seed_point()?;
            attractor_deterministic(&sys, common.depth, &seed_point)?
        }
    };
    write_artifact(&common.out, &format!("{stem}_attractor.csv"), &cloud_to_csv(&cloud))?;
    if let Ambient::Euclidean { bounds } = &sys.ambient {
        match bounds.len() {
            1 => {
                let pgm = cloud_to_pgm(&cloud, 512)?;
                write_artifact(&common.out, &format!("{stem}_attractor.pgm"), &pgm)?;
            }
            2 => {
                let ppm = cloud_to_ppm(&cloud, 256, 256)?;
                write_artifact(&common.out, &format!("{stem}_attractor.ppm"), &ppm)?;
            }
            _ => {}
        }
    }
    let defect = self_similarity_defect(&sys, common.depth)?;
    println!("points = {}", cloud.len());
    println!("self_similarity_defect = {defect:e}");
    Ok(ExitCode::SUCCESS)
}

/// Midpoint discretization of Lebesgue measure on [0, 1] at 2^depth atoms,
/// the reference for the tent system's Hutchinson measure.
fn lebesgue_atoms(depth: usize) -> AtomicMeasure<f64> {
    let m = 1usize << depth.min(22);
    let w = 1.0 / m as f64;
    let atoms = (0..m)
        .map(|k| (Point::euclid(&[(k as f64 + 0.5) * w]), w))
        .collect();
    AtomicMeasure { atoms, depth, kind: MeasureKind::Deterministic }
}

fn cmd_measure(common: &Common, moment: Option<u32>) -> Result<ExitCode> {
    let sys = resolve_system(&common.system)?;
    let stem = file_stem(&sys);
    let mu = self_similar_measure(&sys, common.depth)?;
    write_artifact(&common.out, &format!("{stem}_measure.csv"), &measure_to_csv(&mu))?;
    let sidecar = serde_json::to_string_pretty(&measure_sidecar(&sys.name, &mu))?;
    write_artifact(&common.out, &format!("{stem}_measure.json"), &sidecar)?;
    if matches!(&sys.ambient, Ambient::Euclidean { bounds } if bounds.len() == 1) {
        write_artifact(&common.out, &format!("{stem}_cdf.csv"), &cdf_to_csv(&mu)?)?;
    }
    println!("atoms = {}", mu.atoms.len());
    let defect = invariance_defect(&sys, &mu)?;
    println!("invariance_defect = {defect:e}");
    if sys.name == "tent" {
        let w1 = weak_distance(&mu, &lebesgue_atoms(common.depth))?;
        println!("wasserstein_to_lebesgue = {w1:e}");
    }
    if let Some(k) = moment {
        let m = integrate(&mu, |p| {
            let x = p.as_coords().map(|c| c[0]).unwrap_or(0.0);
            Complex::new(x.powi(k as i32), 0.0)
        });
        println!("moment_{k} = {}", m.re);
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_tols(specs: &[String]) -> Result<HashMap<String, f64>> {
    let mut map = HashMap::new();
    for s in specs {
        let (check, value) = s
            .split_once('=')
            .ok_or_else(|| anyhow!("bad --tol {s:?}; expected check=value"))?;
        if !CHECK_NAMES.contains(&check) {
            bail!("unknown check {check:?} in --tol; expected one of {CHECK_NAMES:?}");
        }
        let v: f64 = value.parse().with_context(|| format!("bad tolerance value {value:?}"))?;
        map.insert(check.to_string(), v);
    }
    Ok(map)
}

fn parse_open_set(spec: &str, dim: usize) -> Result<OpenSet<f64>> {
    let mut boxes = Vec::new();
    for part in spec.split(';') {
        let vals: Vec<f64> = part
            .split(',')
            .map(|t| t.trim().parse().with_context(|| format!("bad open-set number {t:?}")))
            .collect::<Result<_>>()?;
        if vals.len() != 2 * dim {
            bail!("open-set box {part:?} needs {} numbers for dimension {dim}", 2 * dim);
        }
        boxes.push(vals.chunks(2).map(|c| (c[0], c[1])).collect());
    }
    let set = OpenSet { boxes };
    set.validate(dim)?;
    Ok(set)
}

type Symbol = Box<dyn Fn(&Point<f64>) -> Complex<f64>>;

/// Build the verification symbol a(x) named by a `--fn` spec.
fn parse_symbol(spec: &str, sys: &Arc<System64>) -> Result<Symbol> {
    if spec == "identity" {
        return Ok(Box::new(|p: &Point<f64>| {
            let v = match p {
                Point::Euclidean(v) => v.iter().sum(),
                Point::Word(w) => {
                    if w.first() == Some(&1) {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
            Complex::new(v, 0.0)
        }));
    }
    if let Some(word) = spec.strip_prefix("indicator:") {
        let prefix: Vec<u8> = word
            .split('-')
            .map(|t| t.parse().with_context(|| format!("bad symbol {t:?} in indicator word")))
            .collect::<Result<_>>()?;
        if prefix.is_empty() || prefix.iter().any(|&s| s < 1 || s as usize > sys.n_branches()) {
            bail!("indicator word symbols must lie in 1..={}", sys.n_branches());
        }
        match &sys.ambient {
            Ambient::Sequence { .. } => Ok(Box::new(move |p: &Point<f64>| {
                let hit = matches!(p, Point::Word(w) if w.starts_with(&prefix));
                Complex::new(if hit { 1.0 } else { 0.0 }, 0.0)
            })),
            Ambient::Euclidean { bounds } => {
                // bounding box of gamma_w applied to the ambient box corners
                let dim = bounds.len();
                let mut lo = vec![f64::INFINITY; dim];
                let mut hi = vec![f64::NEG_INFINITY; dim];
                for mask in 0..(1usize << dim) {
                    let corner: Vec<f64> = bounds
                        .iter()
                        .enumerate()
                        .map(|(k, &(a, b))| if mask >> k & 1 == 0 { a } else { b })
                        .collect();
                    let image = sys.apply_word(&prefix, &Point::Euclidean(corner))?;
                    for (k, &x) in image.as_coords()?.iter().enumerate() {
                        lo[k] = lo[k].min(x);
                        hi[k] = hi[k].max(x);
                    }
                }
                Ok(Box::new(move |p: &Point<f64>| {
                    let inside = p
                        .as_coords()
                        .map(|c| {
                            c.iter().enumerate().all(|(k, &x)| {
                                x >= lo[k] - 1e-12 && x <= hi[k] + 1e-12
                            })
                        })
                        .unwrap_or(false);
                    Complex::new(if inside { 1.0 } else { 0.0 }, 0.0)
                }))
            }
        }
    } else if let Some(slope) = spec.strip_prefix("lipschitz:") {
        let s: f64 = slope.parse().with_context(|| format!("bad slope {slope:?}"))?;
        let anchor = match &sys.ambient {
            Ambient::Euclidean { bounds } => {
                Point::Euclidean(bounds.iter().map(|&(lo, _)| lo).collect())
            }
            Ambient::Sequence { .. } => Point::Word(vec![1; 32]),
        };
        Ok(Box::new(move |p: &Point<f64>| {
            let d = hlab_core::distance(p, &anchor).unwrap_or(0.0);
            Complex::new(s * d, 0.0)
        }))
    } else if let Some(path) = spec.strip_prefix("custom:") {
        if !sys.ambient.is_euclidean() || sys.ambient.dim() != 1 {
            bail!("custom symbol tables apply to 1-D Euclidean systems only");
        }
        let text = fs::read_to_string(path).with_context(|| format!("reading symbol table {path}"))?;
        let mut table: Vec<(f64, f64)> = serde_json::from_str::<Vec<(f64, f64)>>(&text)
            .with_context(|| format!("{path}: expected a JSON array of [x, value] pairs"))?;
        if table.len() < 2 {
            bail!("{path}: need at least two table points");
        }
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Box::new(move |p: &Point<f64>| {
            let x = p.as_coords().map(|c| c[0]).unwrap_or(0.0);
            let i = table.partition_point(|&(t, _)| t < x).clamp(1, table.len() - 1);
            let ((x0, y0), (x1, y1)) = (table[i - 1], table[i]);
            let t = if x1 > x0 { ((x - x0) / (x1 - x0)).clamp(0.0, 1.0) } else { 0.0 };
            Complex::new(y0 + t * (y1 - y0), 0.0)
        }))
    } else {
        bail!("bad --fn {spec:?}; expected identity | indicator:<word> | lipschitz:<slope> | custom:<file>");
    }
}

fn cmd_verify(
    common: &Common,
    checks: &[String],
    tol_specs: &[String],
    open_set: Option<&str>,
    symbol: Option<&str>,
) -> Result<ExitCode> {
    let sys = resolve_system(&common.system)?;
    let tols = parse_tols(tol_specs)?;
    let mut lines = Vec::new();
    let mut all_pass = true;
    for check in checks {
        let check = check.as_str();
        let over = tols.get(check).copied();
        let mut report = match (check, open_set, symbol) {
            ("osc", Some(spec), _) => {
                let set = parse_open_set(spec, sys.ambient.dim())?;
                let mut rep = open_set_condition_check(&sys, &set, 4096, common.seed)?;
                if let Some(t) = over {
                    rep.tolerance = t;
                    rep.pass = rep.defect <= t;
                }
                rep
            }
            ("covariance", _, Some(spec)) => {
                let a = parse_symbol(spec, &sys)?;
                let depth = common.depth.max(2);
                let d = covariance_defect(|p| a(p), &sys, depth)?;
                // discretization of a general Lipschitz symbol resolves at
                // the cell width; cell-constant symbols come out exact
                let tol = over.unwrap_or(2.0 * 2f64.powi(-(depth as i32)));
                DefectReport::new(
                    "covariance",
                    sys.name.clone(),
                    serde_json::json!({"depth": depth, "symbol": spec}),
                    d,
                    tol,
                )
            }
            _ => run_check(&sys, common.depth, common.seed, check, over)?,
        };
        if report.wall_time_ms == 0.0 {
            report.wall_time_ms = f64::MIN_POSITIVE; // streamed reports always carry a time
        }
        all_pass &= report.pass;
        let line = serde_json::to_string(&report)?;
        println!("{line}");
        lines.push(line);
    }
    fs::create_dir_all(&common.out)?;
    let tag = checks.join("+");
    let path = common.out.join(format!("{}_{}_verify.jsonl", file_stem(&sys), tag));
    fs::write(&path, lines.join("\n") + "\n")?;
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_export(common: &Common, what: &str) -> Result<ExitCode> {
    let sys = resolve_system(&common.system)?;
    let stem = file_stem(&sys);
    let space = cell_space(&sys, common.depth)?;
    match what {
        "comp" | "transfer" => {
            let op = if what == "comp" {
                hlab_core::comp_op(&space)?
            } else {
                hlab_core::transfer_op(&space)?
            };
            if common.format == Format::Json {
                let text = serde_json::to_string_pretty(&operator_to_json(&op))?;
                write_artifact(&common.out, &format!("{stem}_{what}.json"), &text)?;
            } else {
                write_artifact(&common.out, &format!("{stem}_{what}.csv"), &operator_to_csv(&op))?;
            }
        }
        "basis" | "pou" => {
            let basis = if what == "basis" {
                cylinder_basis(&space)?
            } else {
                let est = hlab_core::branch_sets(&sys, 4096, 1e-10)?;
                pou_basis(&space, &est, common.depth.saturating_sub(4).clamp(1, 6))?
            };
            let text = serde_json::to_string_pretty(&basis_to_json(&basis))?;
            write_artifact(&common.out, &format!("{stem}_{what}.json"), &text)?;
        }
        other => bail!("unknown export {other:?}; expected comp | transfer | basis | pou"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_report(common: &Common, run_all: bool) -> Result<ExitCode> {
    let sys = resolve_system(&common.system)?;
    let report = if run_all {
        run_full_suite(&sys, common.depth, common.seed)?
    } else {
        // aggregate prior verify output found in the output directory
        let mut reports = Vec::new();
        if common.out.is_dir() {
            let mut paths: Vec<PathBuf> = fs::read_dir(&common.out)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            paths.sort();
            for path in paths {
                for line in fs::read_to_string(&path)?.lines() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let rep: DefectReport = serde_json::from_str(line)
                        .with_context(|| format!("bad report line in {}", path.display()))?;
                    reports.push(rep);
                }
            }
        }
        if reports.is_empty() {
            return Err(Error::Precondition(
                "no prior verify output found; rerun with --run-all or point --out at verify results"
                    .into(),
            )
            .into());
        }
        RunReport::new(&sys.name, common.depth, common.seed, reports)
    };
    let text = serde_json::to_string_pretty(&report)?;
    write_artifact(&common.out, "report.json", &text)?;
    for rep in &report.reports {
        println!(
            "{:16} defect {:>12.3e}  tol {:>9.0e}  {}",
            rep.check,
            rep.defect,
            rep.tolerance,
            if rep.pass { "pass" } else { "FAIL" }
        );
    }
    println!("all_pass = {}", report.all_pass);
    Ok(if report.all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
