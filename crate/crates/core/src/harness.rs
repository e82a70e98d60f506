//! Monte Carlo experiments with verdicts.
//!
//! Replicate `r` of an experiment with seed `s` always uses the configuration sampled
//! under `SamplerKey::new(s, r)`, so estimates at different `p` or `n` share random
//! numbers and every result is a pure function of its arguments.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::connectivity::{check_duality_with, has_circuit, Adjacency, Annulus, Axis};
use crate::error::{Error, Result};
use crate::event::{Event, EventSpec, SubRect};
use crate::exploration::{explore, ExitSide, LazySource};
use crate::lattice::{derive_seed, to_text, Color, ColorConfig, DiagonalConfig, RectDomain, SamplerKey};
use crate::oracle;
use crate::par;
use crate::pivotal::{conditional_pivotal_mean, ConditionalMean};
use crate::stats::{ols, strictly_decreasing, strictly_increasing, Estimate, Z_99_ONE_SIDED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
    #[serde(rename = "N/A")]
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::NotApplicable => "N/A",
        })
    }
}

/// PASS when every lower bound clears `threshold`, FAIL when some upper bound is
/// below it, INCONCLUSIVE otherwise.
fn bound_verdict<'a>(estimates: impl IntoIterator<Item = &'a Estimate>, threshold: f64) -> Verdict {
    let mut all_clear = true;
    for e in estimates {
        if e.upper(Z_99_ONE_SIDED) < threshold {
            return Verdict::Fail;
        }
        all_clear &= e.lower(Z_99_ONE_SIDED) > threshold;
    }
    if all_clear {
        Verdict::Pass
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CrossingMethod {
    /// Sample the whole configuration and label clusters.
    #[default]
    Eager,
    /// Run the interface exploration. Only decides red left-right and blue top-bottom
    /// crossings.
    Exploration,
}

fn check_reps(reps: u64) -> Result<()> {
    if reps == 0 {
        return Err(Error::domain("reps must be at least 1"));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Indicator of one crossing on replicate `r`.
fn crossing_indicator(
    d: &RectDomain,
    p: f64,
    color: Color,
    axis: Axis,
    key: SamplerKey,
    method: CrossingMethod,
) -> bool {
    match method {
        CrossingMethod::Eager => {
            let omega = DiagonalConfig::sample(*d, key);
            let sigma = ColorConfig::sample(*d, key, p);
            crate::connectivity::crossing_unchecked(&omega, &sigma, d, color, axis, Adjacency::Triangulated)
        }
        CrossingMethod::Exploration => {
            let mut src = LazySource::new(*d, key, p);
            let right = explore(d, &mut src).map(|r| r.exit_side == ExitSide::Right).unwrap_or(false);
            // red left-right is `right`; blue top-bottom is its complement
            if color == Color::Red {
                right
            } else {
                !right
            }
        }
    }
}

/// Monte Carlo estimate of the probability of a `color` crossing of `d` along `axis`.
pub fn crossing_experiment(
    d: &RectDomain,
    p: f64,
    color: Color,
    axis: Axis,
    reps: u64,
    seed: u64,
    method: CrossingMethod,
) -> Result<Estimate> {
    check_reps(reps)?;
    check_p(p)?;
    if method == CrossingMethod::Exploration
        && !matches!((color, axis), (Color::Red, Axis::LeftRight) | (Color::Blue, Axis::TopBottom))
    {
        return Err(Error::domain(format!(
            "exploration decides red left-right and blue top-bottom crossings, not {color} {axis:?}"
        )));
    }
    let hits = par::map_indices(reps, |r| {
        crossing_indicator(d, p, color, axis, SamplerKey::new(seed, r), method)
    });
    Ok(Estimate::from_indicators(&hits, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: f64,
    /// Cells along the short side.
    pub n: usize,
    /// Long side over short side.
    pub aspect: usize,
    pub estimate: f64,
    pub stderr: f64,
}

/// Red left-right crossing of `aspect·n × n` cells for every `(p, n)`.
pub fn sweep(
    ps: &[f64],
    ns: &[usize],
    aspect: usize,
    reps: u64,
    seed: u64,
    method: CrossingMethod,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(ps.len() * ns.len());
    for &n in ns {
        let d = RectDomain::new(aspect * n, n)?;
        for &p in ps {
            let e = crossing_experiment(&d, p, Color::Red, Axis::LeftRight, reps, seed, method)?;
            rows.push(SweepRow {
                p,
                n,
                aspect,
                estimate: e.value,
                stderr: e.stderr,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub cells_w: usize,
    pub cells_h: usize,
    pub estimate: Estimate,
    /// One-sided 99% bounds.
    pub lower: f64,
    pub upper: f64,
}

impl BoundRow {
    fn new(n: usize, d: &RectDomain, estimate: Estimate) -> Self {
        BoundRow {
            n,
            cells_w: d.cells_w(),
            cells_h: d.cells_h(),
            estimate,
            lower: estimate.lower(Z_99_ONE_SIDED),
            upper: estimate.upper(Z_99_ONE_SIDED),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub p: f64,
    pub threshold: f64,
    pub rows: Vec<BoundRow>,
    pub verdict: Verdict,
}

/// Lower bound of the long-way crossings in two-by-one rectangles.
pub const RSW_BOUND: f64 = 1.0 / 16.0;

/// Red left-right crossing of `aspect·n × n` cells at `p = ½`, compared with
/// `threshold` through one-sided 99% bounds.
pub fn rsw_check(
    ns: &[usize],
    aspect: usize,
    reps: u64,
    seed: u64,
    threshold: f64,
    method: CrossingMethod,
) -> Result<BoundReport> {
    if ns.is_empty() {
        return Err(Error::domain("no sizes given"));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let d = RectDomain::new(aspect * n, n)?;
        let e = crossing_experiment(&d, 0.5, Color::Red, Axis::LeftRight, reps, seed, method)?;
        rows.push(BoundRow::new(n, &d, e));
    }
    let verdict = bound_verdict(rows.iter().map(|r| &r.estimate), threshold);
    Ok(BoundReport {
        p: 0.5,
        threshold,
        rows,
        verdict,
    })
}

pub const DEFAULT_DELTA0: f64 = 0.01;

/// Red circuits in the `4n`/`6n` annulus filling a `6n × 6n` domain.
pub fn annulus_check(ns: &[usize], p: f64, reps: u64, seed: u64, delta0: f64) -> Result<BoundReport> {
    check_reps(reps)?;
    check_p(p)?;
    if ns.is_empty() {
        return Err(Error::domain("no sizes given"));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let ann = Annulus::centered(n)?;
        let d = Annulus::ambient(n)?;
        let hits = par::map_indices(reps, |r| {
            let key = SamplerKey::new(seed, r);
            let omega = DiagonalConfig::sample(d, key);
            let sigma = ColorConfig::sample(d, key, p);
            has_circuit(&omega, &sigma, &d, &ann, Color::Red)
        });
        let hits = hits.into_iter().collect::<Result<Vec<bool>>>()?;
        rows.push(BoundRow::new(n, &d, Estimate::from_indicators(&hits, seed)));
    }
    let verdict = bound_verdict(rows.iter().map(|r| &r.estimate), delta0);
    Ok(BoundReport {
        p,
        threshold: delta0,
        rows,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PivotalRow {
    pub n: usize,
    pub cells_w: usize,
    pub cells_h: usize,
    pub mean: ConditionalMean,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotalScalingReport {
    pub p: f64,
    pub rows: Vec<PivotalRow>,
    /// Slope of the mean against `log₂ n`; `None` with fewer than two sizes.
    pub beta_hat: Option<f64>,
    pub verdict: Verdict,
}

/// Mean number of pivotal sites for the blue top-bottom crossing of `2n × n` cells,
/// conditioned on that crossing.
pub fn pivotal_scaling(
    ns: &[usize],
    p: f64,
    reps: u64,
    seed: u64,
    cap_factor: u64,
) -> Result<PivotalScalingReport> {
    check_p(p)?;
    if p < 0.5 {
        return Err(Error::domain(format!("pivotal scaling needs p ≥ 1/2, got {p}")));
    }
    if ns.is_empty() || !ns.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::domain("sizes must be nonempty and strictly increasing"));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let d = RectDomain::new(2 * n, n)?;
        let event = EventSpec::crossing(d, Color::Blue, Axis::TopBottom);
        let mean = conditional_pivotal_mean(&d, p, &event, reps, seed, cap_factor)?;
        rows.push(PivotalRow {
            n,
            cells_w: d.cells_w(),
            cells_h: d.cells_h(),
            acceptance_rate: mean.acceptance_rate(),
            mean,
        });
    }
    let means: Vec<f64> = rows.iter().map(|r| r.mean.estimate.value).collect();
    let logs: Vec<f64> = ns.iter().map(|&n| (n as f64).log2()).collect();
    let beta_hat = ols(&logs, &means).map(|(_, slope)| slope);
    let verdict = match beta_hat {
        None => Verdict::NotApplicable,
        Some(b) if b > 0.0 && strictly_increasing(&means) => Verdict::Pass,
        Some(_) => Verdict::Fail,
    };
    Ok(PivotalScalingReport {
        p,
        rows,
        beta_hat,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub k: u32,
    pub cells_w: usize,
    pub cells_h: usize,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub epsilon: f64,
    pub p: f64,
    /// `blue-tb` above criticality, `red-lr` for the mirrored run below it.
    pub event: String,
    pub rows: Vec<DecayRow>,
    pub verdict: Verdict,
}

/// Off-critical decay of crossings.
///
/// Above criticality (`mirror = false`): blue top-bottom crossing of `2^(k+1) × 2^k`
/// cells at `p = ½ + ε`. Mirrored: red left-right crossing of `2^k × 2^(k+1)` cells at
/// `p = ½ − ε`, the same law after a color swap and a quarter turn.
pub fn decay_check(
    epsilon: f64,
    ks: &[u32],
    reps: u64,
    seed: u64,
    mirror: bool,
    method: CrossingMethod,
) -> Result<DecayReport> {
    if !(0.0..=0.5).contains(&epsilon) {
        return Err(Error::domain(format!("epsilon {epsilon} outside [0, 1/2]")));
    }
    if ks.is_empty() {
        return Err(Error::domain("no scales given"));
    }
    let (p, color, axis) = if mirror {
        (0.5 - epsilon, Color::Red, Axis::LeftRight)
    } else {
        (0.5 + epsilon, Color::Blue, Axis::TopBottom)
    };
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        if k > 13 {
            return Err(Error::domain(format!("scale k = {k} too large")));
        }
        let (long, short) = (1usize << (k + 1), 1usize << k);
        let d = if mirror {
            RectDomain::new(short, long)?
        } else {
            RectDomain::new(long, short)?
        };
        let estimate = crossing_experiment(&d, p, color, axis, reps, seed, method)?;
        rows.push(DecayRow {
            k,
            cells_w: d.cells_w(),
            cells_h: d.cells_h(),
            estimate,
        });
    }
    let values: Vec<f64> = rows.iter().map(|r| r.estimate.value).collect();
    let verdict = if epsilon == 0.0 || epsilon == 0.5 || ks.len() < 2 {
        Verdict::NotApplicable
    } else if strictly_decreasing(&values) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(DecayReport {
        epsilon,
        p,
        event: if mirror { "red-lr" } else { "blue-tb" }.to_string(),
        rows,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub p: f64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcEstimate {
    /// Bracket midpoint, with half the bracket width as `stderr`.
    pub estimate: Estimate,
    pub lo: f64,
    pub hi: f64,
    pub probes: Vec<Probe>,
}

/// Bisection for the `p` at which the red left-right crossing of the `n × n` square
/// has probability ½.
pub fn pc_estimate(n: usize, reps: u64, tolerance: f64, seed: u64) -> Result<PcEstimate> {
    if n < 4 {
        return Err(Error::domain(format!("pc estimation needs n ≥ 4, got {n}")));
    }
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::domain(format!("tolerance {tolerance} outside (0, 1)")));
    }
    check_reps(reps)?;
    let d = RectDomain::square(n)?;
    let probe = |p: f64| {
        crossing_experiment(&d, p, Color::Red, Axis::LeftRight, reps, seed, CrossingMethod::Exploration)
            .map(|estimate| Probe { p, estimate })
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut probes = vec![probe(lo)?, probe(hi)?];
    if !(probes[0].estimate.value < 0.5 && probes[1].estimate.value > 0.5) {
        return Err(Error::Estimation(format!(
            "bracket [0, 1] does not enclose crossing probability 1/2: estimates {} and {} with {reps} reps",
            probes[0].estimate.value, probes[1].estimate.value
        )));
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let pr = probe(mid)?;
        if pr.estimate.value < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
        probes.push(pr);
    }
    Ok(PcEstimate {
        estimate: Estimate {
            value: 0.5 * (lo + hi),
            stderr: 0.5 * (hi - lo),
            reps,
            accepted: reps,
            seed,
        },
        lo,
        hi,
        probes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FkgScenario {
    /// Red left-right crossings of the two overlapping `2n × n` halves of a `3n × n`
    /// strip.
    OverlappingCrossings,
    /// Both events are the crossing of the left `2n × n` half.
    Identical,
    /// Red left-right and blue top-bottom crossings of the strip.
    DualityPair,
}

impl FkgScenario {
    /// The domain and the two events at scale `n`.
    pub fn events(self, n: usize) -> Result<(EventSpec, EventSpec)> {
        let d = RectDomain::new(3 * n, n)?;
        let half = |x0: usize| Event::Crossing {
            color: Color::Red,
            axis: Axis::LeftRight,
            within: Some(SubRect {
                x0,
                y0: 0,
                cells_w: 2 * n,
                cells_h: n,
            }),
        };
        Ok(match self {
            FkgScenario::OverlappingCrossings => (EventSpec::new(d, half(0))?, EventSpec::new(d, half(n))?),
            FkgScenario::Identical => (EventSpec::new(d, half(0))?, EventSpec::new(d, half(0))?),
            FkgScenario::DualityPair => (
                EventSpec::crossing(d, Color::Red, Axis::LeftRight),
                EventSpec::crossing(d, Color::Blue, Axis::TopBottom),
            ),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FkgReport {
    pub event1: String,
    pub event2: String,
    pub p: f64,
    pub reps: u64,
    pub seed: u64,
    pub p1: f64,
    pub p2: f64,
    pub p12: f64,
    pub margin: f64,
    /// Delta-method standard error of `margin`.
    pub stderr: f64,
    pub verdict: Verdict,
}

/// Refuses unless both events are robust and increasing, checked exhaustively.
pub fn validate_fkg_hypotheses(e1: &EventSpec, e2: &EventSpec) -> Result<()> {
    for (name, e) in [("first", e1), ("second", e2)] {
        let v = oracle::verify_increasing(e)?;
        let failing = if !v.robust {
            Some("not robust")
        } else if !v.increasing_in_colors {
            Some("not increasing in the colors")
        } else if v.increasing_in_diagonals != Some(true) {
            Some("not increasing in the diagonals")
        } else {
            None
        };
        if let Some(why) = failing {
            return Err(Error::Refused(format!("{name} event {} is {why}", e.event())));
        }
    }
    Ok(())
}

/// Monte Carlo FKG margin of a scenario, after validating the scenario's events at
/// scale 1 with the oracle.
pub fn fkg_mc_check(scenario: FkgScenario, n: usize, p: f64, reps: u64, seed: u64) -> Result<FkgReport> {
    let (s1, s2) = scenario.events(1)?;
    validate_fkg_hypotheses(&s1, &s2)?;
    let (e1, e2) = scenario.events(n)?;
    fkg_margin_mc(&e1, &e2, p, reps, seed)
}

/// Monte Carlo estimate of `P(e1 ∩ e2) − P(e1)·P(e2)` without any hypothesis check.
/// PASS iff the estimate exceeds `−2·stderr`.
pub fn fkg_margin_mc(e1: &EventSpec, e2: &EventSpec, p: f64, reps: u64, seed: u64) -> Result<FkgReport> {
    check_reps(reps)?;
    check_p(p)?;
    let d = e1.domain();
    if e2.domain() != d {
        return Err(Error::domain("events live on different domains"));
    }
    let pairs = par::map_indices(reps, |r| -> Result<(f64, f64)> {
        let key = SamplerKey::new(seed, r);
        let omega = DiagonalConfig::sample(d, key);
        let sigma = ColorConfig::sample(d, key, p);
        let f = e1.evaluate(&omega, &sigma)?;
        let g = e2.evaluate(&omega, &sigma)?;
        Ok((f as u8 as f64, g as u8 as f64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let n = reps as f64;
    let p1 = pairs.iter().map(|x| x.0).sum::<f64>() / n;
    let p2 = pairs.iter().map(|x| x.1).sum::<f64>() / n;
    let p12 = pairs.iter().map(|x| x.0 * x.1).sum::<f64>() / n;
    let margin = p12 - p1 * p2;
    let influence: Vec<f64> = pairs.iter().map(|&(f, g)| f * g - p2 * f - p1 * g).collect();
    let stderr = Estimate::from_samples(&influence, seed).stderr;
    let verdict = if margin >= -2.0 * stderr {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(FkgReport {
        event1: e1.to_string(),
        event2: e2.to_string(),
        p,
        reps,
        seed,
        p1,
        p2,
        p12,
        margin,
        stderr,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityRow {
    pub cells_w: usize,
    pub cells_h: usize,
    pub reps: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub p: f64,
    pub rows: Vec<DualityRow>,
    /// Text dump of the first violating configuration.
    pub counterexample: Option<String>,
    pub verdict: Verdict,
}

/// Counts configurations violating the red left-right / blue top-bottom XOR.
///
/// Each size uses its own seed derived from `seed` and the dimensions.
pub fn duality_mass_check(
    sizes: &[(usize, usize)],
    p: f64,
    reps: u64,
    seed: u64,
    adjacency: Adjacency,
) -> Result<DualityReport> {
    check_reps(reps)?;
    check_p(p)?;
    let mut rows = Vec::with_capacity(sizes.len());
    let mut counterexample = None;
    for &(w, h) in sizes {
        let d = RectDomain::new(w, h)?;
        let size_seed = derive_seed(seed, &[w as u64, h as u64]);
        let sample = |r: u64| {
            let key = SamplerKey::new(size_seed, r);
            (DiagonalConfig::sample(d, key), ColorConfig::sample(d, key, p))
        };
        let bad = par::map_indices(reps, |r| {
            let (omega, sigma) = sample(r);
            check_duality_with(&omega, &sigma, &d, adjacency).map(|ok| !ok)
        })
        .into_iter()
        .collect::<Result<Vec<bool>>>()?;
        let violations = bad.iter().filter(|&&b| b).count() as u64;
        if counterexample.is_none() {
            if let Some(r) = bad.iter().position(|&b| b) {
                let (omega, sigma) = sample(r as u64);
                counterexample = Some(to_text(&omega, &sigma));
            }
        }
        rows.push(DualityRow {
            cells_w: w,
            cells_h: h,
            reps,
            violations,
        });
    }
    let verdict = if rows.iter().any(|r| r.violations > 0) {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    Ok(DualityReport {
        p,
        rows,
        counterexample,
        verdict,
    })
}
