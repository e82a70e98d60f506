//! Pivotal sites: sites whose color flip toggles an event, diagonals frozen.

use serde::{Deserialize, Serialize};

use crate::connectivity::Axis;
use crate::error::{Error, Result};
use crate::event::{Event, EventSpec};
use crate::lattice::{
    check_dims, for_each_neighbor, Color, ColorConfig, DiagonalConfig, RectDomain, SamplerKey,
    SiteCoord,
};
use crate::par;
use crate::stats::Estimate;
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PivotalReport {
    pub event: String,
    /// Sampler key of the configuration, when it was sampled.
    pub key: Option<SamplerKey>,
    /// In row-major order.
    pub pivotal_sites: Vec<SiteCoord>,
    pub event_occurred: bool,
}

fn check_event(d: &RectDomain, event: &EventSpec) -> Result<()> {
    if event.domain() != *d {
        return Err(Error::domain(format!(
            "event is defined on {} but the domain is {d}",
            event.domain()
        )));
    }
    Ok(())
}

/// Exact pivotal set. Full-domain crossings (and their negations) go through two
/// cluster labelings; every other event is handled by [`pivotal_sites_reference`].
pub fn pivotal_sites(
    omega: &DiagonalConfig,
    sigma: &ColorConfig,
    d: &RectDomain,
    event: &EventSpec,
) -> Result<PivotalReport> {
    check_event(d, event)?;
    check_dims(omega, sigma, d)?;
    match red_crossing_form(event.event()) {
        Some(axis) => {
            let (occurred_red, sites) = crossing_pivotals(omega, sigma, d, axis);
            let negated = event_is_negated_red(event.event());
            Ok(PivotalReport {
                event: event.to_string(),
                key: None,
                pivotal_sites: sites,
                event_occurred: occurred_red != negated,
            })
        }
        None => pivotal_sites_reference(omega, sigma, d, event),
    }
}

/// Flips every site in turn and re-evaluates the event.
pub fn pivotal_sites_reference(
    omega: &DiagonalConfig,
    sigma: &ColorConfig,
    d: &RectDomain,
    event: &EventSpec,
) -> Result<PivotalReport> {
    check_event(d, event)?;
    let occurred = event.evaluate(omega, sigma)?;
    let mut work = sigma.clone();
    let mut sites = Vec::new();
    for s in d.sites() {
        work.flip(s);
        if event.evaluate(omega, &work)? != occurred {
            sites.push(s);
        }
        work.flip(s);
    }
    Ok(PivotalReport {
        event: event.to_string(),
        key: None,
        pivotal_sites: sites,
        event_occurred: occurred,
    })
}

/// Rewrites a full-domain crossing, possibly under negations, as a red crossing or
/// its complement. A blue crossing of `axis` is the complement of the red crossing of
/// the transverse axis. Returns the red axis.
fn red_crossing_form(e: &Event) -> Option<Axis> {
    match e {
        Event::Crossing {
            color,
            axis,
            within: None,
        } => Some(match color {
            Color::Red => *axis,
            Color::Blue => axis.transverse(),
        }),
        Event::Not(inner) => red_crossing_form(inner),
        _ => None,
    }
}

/// Whether `e` equals the complement of its red form.
fn event_is_negated_red(e: &Event) -> bool {
    match e {
        Event::Crossing { color, .. } => *color == Color::Blue,
        Event::Not(inner) => !event_is_negated_red(inner),
        _ => false,
    }
}

/// Union-find of one color with, per root, whether the cluster touches each arc.
struct Touching {
    uf: UnionFind,
    first: Vec<bool>,
    second: Vec<bool>,
}

impl Touching {
    fn build(
        omega: &DiagonalConfig,
        sigma: &ColorConfig,
        d: &RectDomain,
        color: Color,
        axis: Axis,
    ) -> Self {
        let n = d.site_count();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            if sigma.get_index(i) != color {
                continue;
            }
            for_each_neighbor(d.site_at(i), d, omega, |t| {
                let j = d.site_index(t);
                if j > i && sigma.get_index(j) == color {
                    uf.union(i, j);
                }
            });
        }
        let (a1, a2) = axis.arcs();
        let mut first = vec![false; n];
        let mut second = vec![false; n];
        for i in 0..n {
            if sigma.get_index(i) != color {
                continue;
            }
            let s = d.site_at(i);
            let r = uf.find(i);
            first[r] |= d.on_arc(s, a1);
            second[r] |= d.on_arc(s, a2);
        }
        Touching { uf, first, second }
    }

    /// Would `s` recolored to this labeling's color touch both arcs?
    fn joins(&mut self, s: SiteCoord, d: &RectDomain, omega: &DiagonalConfig, sigma: &ColorConfig, color: Color, axis: Axis) -> bool {
        let (a1, a2) = axis.arcs();
        let mut first = d.on_arc(s, a1);
        let mut second = d.on_arc(s, a2);
        for_each_neighbor(s, d, omega, |t| {
            let j = d.site_index(t);
            if sigma.get_index(j) == color {
                let r = self.uf.find(j);
                first |= self.first[r];
                second |= self.second[r];
            }
        });
        first && second
    }

    fn crosses(&self) -> bool {
        (0..self.first.len()).any(|r| self.first[r] && self.second[r])
    }
}

/// Pivotal sites of the red crossing of `axis`, and whether it occurs.
///
/// When the crossing fails, a blue site is pivotal iff recoloring it red merges red
/// clusters touching both arcs. When it occurs, a red site is pivotal iff recoloring
/// it blue creates a blue crossing of the transverse axis, which by duality is
/// exactly what destroys the red crossing.
fn crossing_pivotals(
    omega: &DiagonalConfig,
    sigma: &ColorConfig,
    d: &RectDomain,
    axis: Axis,
) -> (bool, Vec<SiteCoord>) {
    let red = Touching::build(omega, sigma, d, Color::Red, axis);
    let occurred = red.crosses();
    let (flip_from, mut labels, target_axis) = if occurred {
        let blue_axis = axis.transverse();
        (Color::Red, Touching::build(omega, sigma, d, Color::Blue, blue_axis), blue_axis)
    } else {
        (Color::Blue, red, axis)
    };
    let to = flip_from.swap();
    let sites = d
        .sites()
        .filter(|&s| sigma.get(s) == flip_from && labels.joins(s, d, omega, sigma, to, target_axis))
        .collect();
    (occurred, sites)
}

/// Mean pivotal count conditioned on the event, with rejection diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMean {
    /// `accepted` and `reps` are the number of configurations kept.
    pub estimate: Estimate,
    pub attempts: u64,
    pub target: u64,
}

impl ConditionalMean {
    pub fn acceptance_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.estimate.accepted as f64 / self.attempts as f64
        }
    }
}

pub const DEFAULT_CAP_FACTOR: u64 = 100;

/// Rejection-samples configurations `(seed, 0), (seed, 1), …` until `reps` satisfy
/// the event or `cap_factor · reps` have been drawn, keeping the first `reps`
/// accepted in replicate order.
pub fn conditional_pivotal_mean(
    d: &RectDomain,
    p: f64,
    event: &EventSpec,
    reps: u64,
    seed: u64,
    cap_factor: u64,
) -> Result<ConditionalMean> {
    check_event(d, event)?;
    if reps == 0 {
        return Err(Error::domain("reps must be at least 1"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability {p} outside [0, 1]")));
    }
    let cap = reps.saturating_mul(cap_factor.max(1));
    let block = reps.clamp(64, 4096);
    let mut counts = Vec::with_capacity(reps as usize);
    let mut attempts = 0u64;
    while (counts.len() as u64) < reps && attempts < cap {
        let len = block.min(cap - attempts);
        let start = attempts;
        let results = par::map_indices(len, |i| -> Result<Option<f64>> {
            let key = SamplerKey::new(seed, start + i);
            let omega = DiagonalConfig::sample(*d, key);
            let sigma = ColorConfig::sample(*d, key, p);
            let r = pivotal_sites(&omega, &sigma, d, event)?;
            Ok(r.event_occurred.then_some(r.pivotal_sites.len() as f64))
        });
        for r in results {
            attempts += 1;
            if let Some(c) = r? {
                counts.push(c);
                if counts.len() as u64 == reps {
                    break;
                }
            }
        }
    }
    if counts.is_empty() {
        return Err(Error::Estimation(format!(
            "no configuration satisfied {event} in {attempts} attempts at p = {p} (cap {cap})"
        )));
    }
    Ok(ConditionalMean {
        estimate: Estimate::from_samples(&counts, seed),
        attempts,
        target: reps,
    })
}
