mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use triperc::connectivity::{Adjacency, Axis};
use triperc::event::EventSpec;
use triperc::exploration::{explore, LazySource};
use triperc::harness::{self, CrossingMethod, FkgScenario, Verdict};
use triperc::lattice::{to_text, Color, ColorConfig, DiagonalConfig, RectDomain, SamplerKey};
use triperc::oracle::{self, format_rational};
use triperc::pivotal::DEFAULT_CAP_FACTOR;

use output::{num, Format, Outcome, Table};

#[derive(Parser)]
#[command(name = "triperc", version, about = "Percolation on the square lattice with random diagonals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize, Clone, Debug)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; all cores by default. Output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Write the result here (and the manifest next to it) instead of stdout/stderr.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// Rectangle in cells: `--cells-w`/`--cells-h`, or `--n` with `--aspect` (aspect·n × n).
#[derive(Args, Serialize, Clone, Debug)]
struct Dims {
    #[arg(long, requires = "cells_h", conflicts_with = "n")]
    cells_w: Option<usize>,
    #[arg(long, requires = "cells_w")]
    cells_h: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    aspect: usize,
}

impl Dims {
    fn resolve(&self, default: (usize, usize)) -> Result<RectDomain> {
        let (w, h) = match (self.cells_w, self.cells_h, self.n) {
            (Some(w), Some(h), _) => (w, h),
            (_, _, Some(n)) => (self.aspect * n, n),
            _ => default,
        };
        Ok(RectDomain::new(w, h)?)
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ColorArg {
    Red,
    Blue,
}

impl From<ColorArg> for Color {
    fn from(c: ColorArg) -> Self {
        match c {
            ColorArg::Red => Color::Red,
            ColorArg::Blue => Color::Blue,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum AxisArg {
    Lr,
    Tb,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Lr => Axis::LeftRight,
            AxisArg::Tb => Axis::TopBottom,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Eager,
    Exploration,
}

impl From<MethodArg> for CrossingMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Eager => CrossingMethod::Eager,
            MethodArg::Exploration => CrossingMethod::Exploration,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ScenarioArg {
    Overlapping,
    Identical,
    Duality,
}

impl From<ScenarioArg> for FkgScenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Overlapping => FkgScenario::OverlappingCrossings,
            ScenarioArg::Identical => FkgScenario::Identical,
            ScenarioArg::Duality => FkgScenario::DualityPair,
        }
    }
}

#[derive(Subcommand, Serialize, Clone, Debug)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Estimate one crossing probability.
    Crossing {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, value_enum, default_value = "red")]
        color: ColorArg,
        #[arg(long, value_enum, default_value = "lr")]
        axis: AxisArg,
        #[arg(long, value_enum, default_value = "eager")]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Red left-right crossing of aspect·n × n cells over a grid of (p, n).
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        aspect: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, value_enum, default_value = "eager")]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Long-way crossings of aspect·n × n cells at p = 1/2 against a lower bound.
    Rsw {
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        aspect: usize,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        /// Defaults to 1/16 for aspect 2 and 0.01 otherwise.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_enum, default_value = "eager")]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Red circuits in the 4n/6n annulus.
    Annulus {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, default_value_t = harness::DEFAULT_DELTA0)]
        delta0: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Pivotal counts of the blue top-bottom crossing of 2n × n cells, given the crossing.
    Pivotal {
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Accepted configurations per size.
        #[arg(long, default_value_t = 2000)]
        reps: u64,
        /// Give up after cap·reps draws.
        #[arg(long, default_value_t = DEFAULT_CAP_FACTOR)]
        cap: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Off-critical decay of crossings of 2^(k+1) × 2^k cells.
    Decay {
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, value_delimiter = ',', default_value = "3,4,5,6")]
        k: Vec<u32>,
        /// Red left-right crossings of 2^k × 2^(k+1) cells at p = 1/2 − ε instead.
        #[arg(long)]
        mirror: bool,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, value_enum, default_value = "exploration")]
        method: MethodArg,
        #[command(flatten)]
        common: Common,
    },
    /// Bisection for the p at which the square crossing probability is 1/2.
    Pc {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 20_000)]
        reps: u64,
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo FKG margin of two events on a 3n × n strip.
    Fkg {
        #[arg(long, value_enum, default_value = "overlapping")]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Mass check of the red left-right / blue top-bottom exclusion.
    Duality {
        /// Sizes as WxH in cells.
        #[arg(long, value_delimiter = ',', default_value = "4x2,16x8,64x32")]
        sizes: Vec<String>,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Configurations per size.
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, hide = true)]
        square_only: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Exact probability and hypothesis checks by exhaustive enumeration.
    Enumerate {
        #[command(flatten)]
        dims: Dims,
        /// Event expression, e.g. `red-lr`, `!blue-tb`, `connect-red:0,0>2,2`.
        #[arg(long, default_value = "red-lr")]
        event: String,
        /// Rational such as 1/2 or 0.25.
        #[arg(long, default_value = "1/2")]
        p: String,
        #[command(flatten)]
        common: Common,
    },
    /// Run the interface exploration on one sampled configuration.
    Explore {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Dump one sampled configuration as text.
    Sample {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Crossing { .. } => "crossing",
            Command::Sweep { .. } => "sweep",
            Command::Rsw { .. } => "rsw",
            Command::Annulus { .. } => "annulus",
            Command::Pivotal { .. } => "pivotal",
            Command::Decay { .. } => "decay",
            Command::Pc { .. } => "pc",
            Command::Fkg { .. } => "fkg",
            Command::Duality { .. } => "duality",
            Command::Enumerate { .. } => "enumerate",
            Command::Explore { .. } => "explore",
            Command::Sample { .. } => "sample",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Crossing { common, .. }
            | Command::Sweep { common, .. }
            | Command::Rsw { common, .. }
            | Command::Annulus { common, .. }
            | Command::Pivotal { common, .. }
            | Command::Decay { common, .. }
            | Command::Pc { common, .. }
            | Command::Fkg { common, .. }
            | Command::Duality { common, .. }
            | Command::Enumerate { common, .. }
            | Command::Explore { common, .. }
            | Command::Sample { common, .. } => common,
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Enumerate { .. } => Format::Json,
            Command::Explore { .. } | Command::Sample { .. } => Format::Text,
            _ => Format::Csv,
        }
    }
}

fn estimate_cols(e: &triperc::stats::Estimate) -> [String; 3] {
    [num(e.value), num(e.stderr), e.reps.to_string()]
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once('x')
        .with_context(|| format!("size {s:?} is not of the form WxH"))?;
    Ok((w.trim().parse()?, h.trim().parse()?))
}

fn run(cmd: &Command) -> Result<Outcome> {
    let seed = cmd.common().seed;
    match cmd {
        Command::Crossing {
            dims,
            p,
            reps,
            color,
            axis,
            method,
            ..
        } => {
            let d = dims.resolve((16, 16))?;
            let e = harness::crossing_experiment(&d, *p, (*color).into(), (*axis).into(), *reps, seed, (*method).into())?;
            let mut t = Table::new(&["cells_w", "cells_h", "p", "estimate", "stderr", "reps"]);
            let [v, s, r] = estimate_cols(&e);
            t.push(vec![d.cells_w().to_string(), d.cells_h().to_string(), num(*p), v, s, r]);
            Ok(Outcome::new(json!({ "cells_w": d.cells_w(), "cells_h": d.cells_h(), "p": p, "estimate": e }))?.table(t))
        }
        Command::Sweep {
            p,
            n,
            aspect,
            reps,
            method,
            ..
        } => {
            let rows = harness::sweep(p, n, *aspect, *reps, seed, (*method).into())?;
            let mut t = Table::new(&["p", "n", "aspect", "estimate", "stderr"]);
            for r in &rows {
                t.push(vec![num(r.p), r.n.to_string(), r.aspect.to_string(), num(r.estimate), num(r.stderr)]);
            }
            Ok(Outcome::new(&rows)?.table(t))
        }
        Command::Rsw {
            n,
            aspect,
            reps,
            threshold,
            method,
            ..
        } => {
            let threshold = threshold.unwrap_or(if *aspect == 2 {
                harness::RSW_BOUND
            } else {
                harness::DEFAULT_DELTA0
            });
            let r = harness::rsw_check(n, *aspect, *reps, seed, threshold, (*method).into())?;
            Ok(bound_outcome(&r)?)
        }
        Command::Annulus { n, p, reps, delta0, .. } => {
            let r = harness::annulus_check(n, *p, *reps, seed, *delta0)?;
            Ok(bound_outcome(&r)?)
        }
        Command::Pivotal { n, p, reps, cap, .. } => {
            let r = harness::pivotal_scaling(n, *p, *reps, seed, *cap)?;
            let mut t = Table::new(&[
                "n",
                "cells_w",
                "cells_h",
                "mean",
                "stderr",
                "accepted",
                "attempts",
                "acceptance_rate",
            ]);
            for row in &r.rows {
                let e = &row.mean.estimate;
                t.push(vec![
                    row.n.to_string(),
                    row.cells_w.to_string(),
                    row.cells_h.to_string(),
                    num(e.value),
                    num(e.stderr),
                    e.accepted.to_string(),
                    row.mean.attempts.to_string(),
                    num(row.acceptance_rate),
                ]);
            }
            let beta = match r.beta_hat {
                Some(b) => format!("beta_hat: {b}"),
                None => "beta_hat: n/a (single size)".to_string(),
            };
            Ok(Outcome::new(&r)?.table(t).note(beta).verdict(r.verdict))
        }
        Command::Decay {
            epsilon,
            k,
            mirror,
            reps,
            method,
            ..
        } => {
            let r = harness::decay_check(*epsilon, k, *reps, seed, *mirror, (*method).into())?;
            let mut t = Table::new(&["k", "cells_w", "cells_h", "p", "estimate", "stderr", "reps"]);
            for row in &r.rows {
                let [v, s, n] = estimate_cols(&row.estimate);
                t.push(vec![row.k.to_string(), row.cells_w.to_string(), row.cells_h.to_string(), num(r.p), v, s, n]);
            }
            Ok(Outcome::new(&r)?.table(t).verdict(r.verdict))
        }
        Command::Pc { n, reps, tolerance, .. } => {
            let r = harness::pc_estimate(*n, *reps, *tolerance, seed)?;
            let mut t = Table::new(&["p", "estimate", "stderr", "reps"]);
            for pr in &r.probes {
                let [v, s, n] = estimate_cols(&pr.estimate);
                t.push(vec![num(pr.p), v, s, n]);
            }
            let note = format!("p_c estimate: {} in [{}, {}]", r.estimate.value, r.lo, r.hi);
            Ok(Outcome::new(&r)?.table(t).note(note))
        }
        Command::Fkg { scenario, n, p, reps, .. } => {
            let r = harness::fkg_mc_check((*scenario).into(), *n, *p, *reps, seed)?;
            let mut t = Table::new(&["p", "p1", "p2", "p12", "margin", "stderr", "reps"]);
            t.push(vec![
                num(r.p),
                num(r.p1),
                num(r.p2),
                num(r.p12),
                num(r.margin),
                num(r.stderr),
                r.reps.to_string(),
            ]);
            Ok(Outcome::new(&r)?.table(t).verdict(r.verdict))
        }
        Command::Duality {
            sizes,
            p,
            reps,
            square_only,
            ..
        } => {
            let sizes = sizes.iter().map(|s| parse_size(s)).collect::<Result<Vec<_>>>()?;
            let adjacency = if *square_only {
                Adjacency::SquareOnly
            } else {
                Adjacency::Triangulated
            };
            let r = harness::duality_mass_check(&sizes, *p, *reps, seed, adjacency)?;
            let mut t = Table::new(&["cells_w", "cells_h", "reps", "violations"]);
            for row in &r.rows {
                t.push(vec![
                    row.cells_w.to_string(),
                    row.cells_h.to_string(),
                    row.reps.to_string(),
                    row.violations.to_string(),
                ]);
            }
            let mut out = Outcome::new(&r)?.table(t);
            if let Some(c) = &r.counterexample {
                out = out.note(format!("counterexample:\n{c}"));
            }
            Ok(out.verdict(r.verdict))
        }
        Command::Enumerate { dims, event, p, .. } => enumerate(dims, event, p),
        Command::Explore { dims, p, replicate, .. } => {
            let d = dims.resolve((8, 4))?;
            let mut src = LazySource::new(d, SamplerKey::new(seed, *replicate), *p);
            let r = explore(&d, &mut src)?;
            let mut text = format!(
                "exit={:?} steps={} sites={} cells={}\n",
                r.exit_side,
                r.step_count,
                r.revealed_sites.len(),
                r.revealed_cells.len()
            );
            let mut t = Table::new(&["step", "red", "blue", "apex", "color", "revealed_cell"]);
            for (i, s) in r.trace.iter().enumerate() {
                if let Some((c, o)) = s.revealed_cell {
                    text.push_str(&format!("cell {c}={}\n", o.glyph()));
                }
                text.push_str(&format!("{}-{} apex={} color={}\n", s.red, s.blue, s.apex, s.apex_color.glyph()));
                let cell = s
                    .revealed_cell
                    .map(|(c, o)| format!("\"{c}={}\"", o.glyph()))
                    .unwrap_or_default();
                t.push(vec![
                    i.to_string(),
                    format!("\"{}\"", s.red),
                    format!("\"{}\"", s.blue),
                    format!("\"{}\"", s.apex),
                    s.apex_color.glyph().to_string(),
                    cell,
                ]);
            }
            Ok(Outcome::new(&r)?.text(text).table(t))
        }
        Command::Sample { dims, p, replicate, .. } => {
            let d = dims.resolve((8, 4))?;
            let key = SamplerKey::new(seed, *replicate);
            let text = to_text(&DiagonalConfig::sample(d, key), &ColorConfig::sample(d, key, *p));
            Ok(Outcome::new(json!({ "cells_w": d.cells_w(), "cells_h": d.cells_h(), "text": text }))?.text(text))
        }
    }
}

fn bound_outcome(r: &harness::BoundReport) -> Result<Outcome> {
    let mut t = Table::new(&["n", "cells_w", "cells_h", "estimate", "stderr", "reps", "lower", "upper"]);
    for row in &r.rows {
        let [v, s, n] = estimate_cols(&row.estimate);
        t.push(vec![
            row.n.to_string(),
            row.cells_w.to_string(),
            row.cells_h.to_string(),
            v,
            s,
            n,
            num(row.lower),
            num(row.upper),
        ]);
    }
    Ok(Outcome::new(r)?
        .table(t)
        .note(format!("threshold: {}", r.threshold))
        .verdict(r.verdict))
}

fn enumerate(dims: &Dims, event: &str, p: &str) -> Result<Outcome> {
    let d = dims.resolve((1, 1))?;
    let spec = EventSpec::parse(d, event)?;
    let p = oracle::parse_rational(p)?;
    let exact = oracle::enumerate_prob(&spec, &p)?;
    let mono = oracle::verify_increasing(&spec)?;
    let russo = match oracle::russo_exact(&spec, &p) {
        Ok(r) => Some(json!({
            "derivative": format_rational(&r.derivative),
            "pivotal_expectation": format_rational(&r.pivotal_expectation),
            "monotonicity": r.monotonicity,
            "identity_holds": r.identity_holds(),
        })),
        Err(triperc::Error::Refused(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let poly = &exact.polynomial;
    let mut t = Table::new(&["red", "satisfying", "configurations"]);
    let mut coefficients = Vec::with_capacity(poly.counts.len());
    for (r, &c) in poly.counts.iter().enumerate() {
        let total = poly.configurations_with_red(r as u32);
        t.push(vec![r.to_string(), c.to_string(), total.to_string()]);
        coefficients.push(json!({ "red": r, "satisfying": c, "configurations": total }));
    }
    let identity_ok = russo
        .as_ref()
        .is_none_or(|r| r["identity_holds"].as_bool() == Some(true));
    let doc = json!({
        "event": spec.event().to_string(),
        "domain": { "cells_w": d.cells_w(), "cells_h": d.cells_h(), "sites": d.site_count(), "cells": d.cell_count() },
        "p": format_rational(&p),
        "probability": format_rational(&exact.probability),
        "probability_f64": exact.probability_f64(),
        "coefficients": coefficients,
        "verdicts": {
            "robust": mono.robust,
            "increasing_in_colors": mono.increasing_in_colors,
            "increasing_in_diagonals": mono.increasing_in_diagonals,
            "russo": russo,
        },
    });
    let out = Outcome::new(doc)?
        .table(t)
        .note(format!("probability: {}", format_rational(&exact.probability)));
    Ok(if identity_ok { out } else { out.verdict(Verdict::Fail) })
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<triperc::Error>() {
        Some(triperc::Error::Estimation(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cmd = &cli.command;
    let common = cmd.common();
    let start = Instant::now();
    let result = triperc::par::with_workers(common.workers, || run(cmd)).and_then(|outcome| {
        let body = outcome.render(common.format.unwrap_or(cmd.default_format()))?;
        output::emit(
            cmd.name(),
            cmd,
            common.seed,
            common.out.as_deref(),
            &body,
            outcome.verdict,
            start.elapsed(),
        )?;
        for line in &outcome.notes {
            eprintln!("{line}");
        }
        Ok(outcome.verdict)
    });
    match result {
        Ok(Some(Verdict::Fail)) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
