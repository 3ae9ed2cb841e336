//! `robinson-lab`: command-line front end for the robinson-core library.
//!
//! Exit codes: 0 on success, 1 on bad input, 2 on an internal failure.

mod selftest;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use robinson_core::io::{load_graphon, save_graphon};
use robinson_core::render::{heatmap_svg, regions_svg, write_svg};
use robinson_core::synth::{add_noise, generate, permute_scramble, GeneratorSpec, NoiseSpec};
use robinson_core::{
    compute_regions, cut_norm, gamma_estimate, lambda_exact, lambda_heuristic, recover, recover_bounded,
    robinson_approx, verify_partition, CutNormBudget, Error, RecoveryConfig, RecoveryReport, SearchMode,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const SCHEMA: &str = "robinson-lab/1";

#[derive(Parser, Debug)]
#[command(name = "robinson-lab", version, about = "Robinson structure of step graphons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Io {
    /// Input matrix (first line n, then n rows).
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Output file; JSON results go to stdout when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// JSON parameter blob; unknown keys are rejected.
    #[arg(long, value_name = "JSON")]
    params: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Λ of the input on the r-refined grid, with its witness triples.
    ///
    /// Params: {"refinement": 1, "mode": "auto"|"exact"|"heuristic", "restarts": 50, "seed": 0}.
    /// "auto" runs the exact search when n·refinement ≤ 15 and the heuristic otherwise.
    Lambda(Io),
    /// The Γ estimate with its witness set.
    ///
    /// Params: {"refinement": 1, "mode": "auto"|"exact"|"heuristic", "seed": 0}.
    Gamma(Io),
    /// Cut norm with witnesses.
    ///
    /// Params: {"exactCap": 24, "restarts": 50, "seed": 0}. Exact up to exactCap cells.
    Cutnorm(Io),
    /// The α-Robinson approximation, written as a matrix to --out.
    ///
    /// Params: {"alpha": required, "gridN": n, "mode": "auto"|"exact"|"heuristic"}.
    Approx(Io),
    /// Full recovery pipeline; the JSON report goes to --out.
    ///
    /// Params: {"refinement": 1, "restarts": 50, "seed": 0, "cutnormCap": 24, "gridN": n,
    /// "timings": false}. A "p" key is accepted as an alternative to --p.
    Recover {
        #[command(flatten)]
        io: Io,
        /// Integrability exponent, > 5; "inf" runs the bounded path.
        #[arg(long, default_value = "inf")]
        p: String,
        /// Also write the report as CSV (header plus one row) to this file.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        /// Also write the approximation matrix here.
        #[arg(long, value_name = "PATH")]
        approx_out: Option<PathBuf>,
    },
    /// Region diagnostics; --out receives the label SVG, a summary goes to stdout.
    ///
    /// Params: {"m": 4, "alpha": required, "raster": 128, "title": "regions"}.
    Regions(Io),
    /// Generate a matrix. --out receives the matrix, a summary goes to stdout.
    ///
    /// Params: {"generator": {"kind": "toeplitzDecay", "n": 10, ...}, "noise": {"model": ..., "seed": 0},
    /// "scramble": seed}. Only "generator" is required.
    Synth {
        /// Output matrix.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// JSON parameter blob; unknown keys are rejected.
        #[arg(long, value_name = "JSON")]
        params: String,
    },
    /// Grayscale SVG heatmap of a matrix.
    ///
    /// Params: {"title": file name}.
    Render(Io),
    /// Runs small exact-oracle invariant suites and prints a pass/fail table.
    Selftest {
        /// Base seed for the generated instances.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase")]
enum ModeChoice {
    #[default]
    Auto,
    Exact,
    Heuristic,
}

fn one() -> usize {
    1
}
fn fifty() -> usize {
    50
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct LambdaParams {
    #[serde(default = "one")]
    refinement: usize,
    #[serde(default)]
    mode: ModeChoice,
    #[serde(default = "fifty")]
    restarts: usize,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct GammaParams {
    #[serde(default = "one")]
    refinement: usize,
    #[serde(default)]
    mode: ModeChoice,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ApproxParams {
    alpha: f64,
    grid_n: Option<usize>,
    #[serde(default)]
    mode: ModeChoice,
}

fn four() -> usize {
    4
}
fn raster() -> usize {
    128
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RegionParams {
    #[serde(default = "four")]
    m: usize,
    alpha: f64,
    #[serde(default = "raster")]
    raster: usize,
    title: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SynthParams {
    generator: GeneratorSpec,
    noise: Option<NoiseSpec>,
    scramble: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RenderParams {
    title: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors are bad input; help and version are not errors.
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 only for library errors that are not the caller's fault.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(lib) if !lib.is_validation() => 2,
        _ => 1,
    }
}

/// Missing params mean `{}`, so every default comes from the serde attributes.
fn params<T: DeserializeOwned>(blob: Option<&str>) -> anyhow::Result<T> {
    serde_json::from_str(blob.unwrap_or("{}")).context("invalid --params")
}

fn required_params<T: DeserializeOwned>(blob: Option<&str>) -> anyhow::Result<T> {
    let s = blob.ok_or_else(|| anyhow!("--params is required for this command"))?;
    serde_json::from_str(s).context("invalid --params")
}

fn envelope(command: &str, input: Option<&Path>, result: impl Serialize) -> anyhow::Result<String> {
    let mut v = json!({
        "schema": SCHEMA,
        "command": command,
        "result": serde_json::to_value(result)?,
    });
    if let Some(p) = input {
        v["input"] = Value::String(p.display().to_string());
    }
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })?,
        None => print!("{text}"),
    }
    Ok(())
}

fn need_out(io: &Io) -> anyhow::Result<&Path> {
    io.out.as_deref().ok_or_else(|| anyhow!("--out is required for this command"))
}

/// Exact first; falls back to the heuristic when the instance is over the cap.
fn with_mode<T>(
    mode: ModeChoice,
    mut f: impl FnMut(SearchMode) -> robinson_core::Result<T>,
) -> robinson_core::Result<T> {
    match mode {
        ModeChoice::Exact => f(SearchMode::Exact),
        ModeChoice::Heuristic => f(SearchMode::Heuristic),
        ModeChoice::Auto => match f(SearchMode::Exact) {
            Err(Error::CapExceeded { .. }) => f(SearchMode::Heuristic),
            other => other,
        },
    }
}

fn parse_p(s: &str) -> anyhow::Result<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        other => other.parse().map_err(|_| anyhow!("--p expects a number or \"inf\", got {s:?}")),
    }
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Lambda(io) => {
            let w = load_graphon(&io.input)?;
            let p: LambdaParams = params(io.params.as_deref())?;
            let cert = with_mode(p.mode, |m| match m {
                SearchMode::Exact => lambda_exact(&w, p.refinement),
                SearchMode::Heuristic => lambda_heuristic(&w, p.refinement, p.restarts, p.seed),
            })?;
            emit(&envelope("lambda", Some(&io.input), &cert)?, io.out.as_deref())
        }
        Command::Gamma(io) => {
            let w = load_graphon(&io.input)?;
            let p: GammaParams = params(io.params.as_deref())?;
            let est = with_mode(p.mode, |m| gamma_estimate(&w, p.refinement, m, p.seed))?;
            emit(&envelope("gamma", Some(&io.input), &est)?, io.out.as_deref())
        }
        Command::Cutnorm(io) => {
            let w = load_graphon(&io.input)?;
            let budget: CutNormBudget = params(io.params.as_deref())?;
            let res = cut_norm(&w, &budget);
            emit(&envelope("cutnorm", Some(&io.input), &res)?, io.out.as_deref())
        }
        Command::Approx(io) => {
            let out = need_out(&io)?;
            let w = load_graphon(&io.input)?;
            let p: ApproxParams = required_params(io.params.as_deref())?;
            let grid = p.grid_n.unwrap_or(w.n());
            let approx = with_mode(p.mode, |m| robinson_approx(&w, p.alpha, grid, m))?;
            save_graphon(&approx.values, out)?;
            let summary = json!({
                "alpha": approx.alpha,
                "gridN": approx.grid_n,
                "mode": approx.mode,
                "robinsonValidated": approx.robinson_validated,
                "output": out.display().to_string(),
            });
            emit(&envelope("approx", Some(&io.input), summary)?, None)
        }
        Command::Recover {
            io,
            p,
            csv,
            approx_out,
        } => {
            let w = load_graphon(&io.input)?;
            let mut p = parse_p(&p)?;
            let mut blob: Value = match io.params.as_deref() {
                Some(s) => serde_json::from_str(s).context("invalid --params")?,
                None => json!({}),
            };
            if let Some(obj) = blob.as_object_mut() {
                if let Some(v) = obj.remove("p") {
                    p = match v {
                        Value::Number(n) => n.as_f64().ok_or_else(|| anyhow!("bad p"))?,
                        Value::String(s) => parse_p(&s)?,
                        _ => bail!("\"p\" must be a number or \"inf\""),
                    };
                }
            }
            let cfg: RecoveryConfig = serde_json::from_value(blob).context("invalid --params")?;
            let (approx, report) = if p.is_infinite() {
                recover_bounded(&w, &cfg)?
            } else {
                recover(&w, p, &cfg)?
            };
            emit(&envelope("recover", Some(&io.input), &report)?, io.out.as_deref())?;
            if let Some(path) = csv {
                let text = format!("{}\n{}\n", RecoveryReport::CSV_HEADER, report.csv_row());
                emit(&text, Some(&path))?;
            }
            if let Some(path) = approx_out {
                save_graphon(&approx.values, &path)?;
            }
            Ok(())
        }
        Command::Regions(io) => {
            let out = need_out(&io)?;
            let w = load_graphon(&io.input)?;
            let p: RegionParams = required_params(io.params.as_deref())?;
            let rm = compute_regions(&w, p.m, p.alpha, p.raster)?;
            let title = p.title.unwrap_or_else(|| format!("regions, m = {}, alpha = {}", p.m, p.alpha));
            write_svg(&regions_svg(&rm, &title), out)?;
            let levels = rm.levels();
            let summary = json!({
                "m": rm.m,
                "M": rm.big_m,
                "alpha": rm.alpha,
                "raster": rm.raster,
                "partitionVerified": verify_partition(&rm),
                "strataPixels": (0..levels).map(|k| rm.strata[k].count()).collect::<Vec<_>>(),
                "greyPixels": rm.grey.iter().map(|g| g.count()).collect::<Vec<_>>(),
                "largestGreySquare": (0..=levels)
                    .map(|k| robinson_core::regions::largest_grey_square(&rm, k))
                    .collect::<Vec<_>>(),
                "output": out.display().to_string(),
            });
            emit(&envelope("regions", Some(&io.input), summary)?, None)
        }
        Command::Synth { out, params: blob } => {
            let p: SynthParams = required_params(Some(&blob))?;
            let mut w = generate(&p.generator)?;
            let mut summary = json!({ "generator": serde_json::to_value(&p.generator)? });
            if let Some(spec) = p.noise {
                let noisy = add_noise(&w, &spec)?;
                summary["noise"] = serde_json::to_value(&noisy.report)?;
                w = noisy.graphon;
            }
            if let Some(seed) = p.scramble {
                let (scrambled, perm) = permute_scramble(&w, seed);
                summary["permutation"] = serde_json::to_value(perm)?;
                w = scrambled;
            }
            summary["n"] = json!(w.n());
            summary["output"] = json!(out.display().to_string());
            save_graphon(&w, &out)?;
            emit(&envelope("synth", None, summary)?, None)
        }
        Command::Render(io) => {
            let out = need_out(&io)?;
            let w = load_graphon(&io.input)?;
            let p: RenderParams = params(io.params.as_deref())?;
            let title = p.title.unwrap_or_else(|| default_title(&io.input));
            write_svg(&heatmap_svg(&w, &title), out)?;
            Ok(())
        }
        Command::Selftest { seed } => {
            let rows = selftest::run(seed);
            let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
            let mut failed = 0;
            for r in &rows {
                let mark = if r.pass { "PASS" } else { "FAIL" };
                println!("{:<width$}  {mark}  {}", r.name, r.detail);
                failed += usize::from(!r.pass);
            }
            println!("selftest: {}/{} passed", rows.len() - failed, rows.len());
            if failed > 0 {
                return Err(Error::Internal(format!("{failed} selftest suite(s) failed")).into());
            }
            Ok(())
        }
    }
}

fn default_title(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graphon".into())
}
