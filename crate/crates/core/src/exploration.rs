//! Lazy interface exploration of a rectangle.
//!
//! The walk starts in the top-left corner between a virtual red vertex glued to the
//! whole left side and a virtual blue vertex glued to the whole top side. It moves
//! from triangle to triangle, always crossing an edge with a red endpoint and a blue
//! endpoint. Entering a cell reveals its diagonal; entering a triangle reveals the
//! color of the opposite corner. The walk stops when it would cross the right side
//! (a red left-right crossing exists) or the bottom side (a blue top-bottom crossing
//! exists).

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::connectivity::{has_crossing, Axis};
use crate::error::{Error, Result};
use crate::lattice::{
    check_dims, derive_seed, sample_color, sample_diagonal, CellCoord, Color, ColorConfig,
    DiagonalConfig, Orientation, RectDomain, SamplerKey, SiteCoord,
};

#[derive(Debug, Clone)]
enum Backing {
    Sampler { key: SamplerKey, p: f64 },
    Fixed { omega: DiagonalConfig, sigma: ColorConfig },
}

/// Reveals site colors and cell diagonals on demand and remembers them.
#[derive(Debug, Clone)]
pub struct LazySource {
    domain: RectDomain,
    backing: Backing,
    sites: Vec<Option<Color>>,
    cells: Vec<Option<Orientation>>,
    site_log: Vec<(SiteCoord, Color)>,
    cell_log: Vec<(CellCoord, Orientation)>,
}

impl LazySource {
    /// Samples from the annealed measure under `key`, red with probability `p`.
    pub fn new(domain: RectDomain, key: SamplerKey, p: f64) -> Self {
        Self::with_backing(domain, Backing::Sampler { key, p })
    }

    /// Reads from a fixed configuration.
    pub fn from_configs(omega: DiagonalConfig, sigma: ColorConfig) -> Result<Self> {
        let d = sigma.domain();
        check_dims(&omega, &sigma, &d)?;
        Ok(Self::with_backing(d, Backing::Fixed { omega, sigma }))
    }

    fn with_backing(domain: RectDomain, backing: Backing) -> Self {
        LazySource {
            domain,
            backing,
            sites: vec![None; domain.site_count()],
            cells: vec![None; domain.cell_count()],
            site_log: Vec::new(),
            cell_log: Vec::new(),
        }
    }

    pub fn domain(&self) -> RectDomain {
        self.domain
    }

    pub fn color(&mut self, s: SiteCoord) -> Color {
        let i = self.domain.site_index(s);
        if let Some(c) = self.sites[i] {
            return c;
        }
        let c = match &self.backing {
            Backing::Sampler { key, p } => sample_color(*key, *p, s),
            Backing::Fixed { sigma, .. } => sigma.get(s),
        };
        self.sites[i] = Some(c);
        self.site_log.push((s, c));
        c
    }

    /// Returns the orientation and whether this call revealed it.
    fn orientation_fresh(&mut self, c: CellCoord) -> (Orientation, bool) {
        let i = self.domain.cell_index(c);
        if let Some(o) = self.cells[i] {
            return (o, false);
        }
        let o = match &self.backing {
            Backing::Sampler { key, .. } => sample_diagonal(*key, c),
            Backing::Fixed { omega, .. } => omega.get(c),
        };
        self.cells[i] = Some(o);
        self.cell_log.push((c, o));
        (o, true)
    }

    pub fn orientation(&mut self, c: CellCoord) -> Orientation {
        self.orientation_fresh(c).0
    }

    pub fn revealed_color(&self, s: SiteCoord) -> Option<Color> {
        self.sites[self.domain.site_index(s)]
    }

    pub fn revealed_orientation(&self, c: CellCoord) -> Option<Orientation> {
        self.cells[self.domain.cell_index(c)]
    }

    pub fn revealed_sites(&self) -> &[(SiteCoord, Color)] {
        &self.site_log
    }

    pub fn revealed_cells(&self) -> &[(CellCoord, Orientation)] {
        &self.cell_log
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExitSide {
    Right,
    Bottom,
}

/// Endpoint of an interface edge: a real site or one of the two virtual boundary vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterfaceVertex {
    Site(SiteCoord),
    /// Red, attached to every site of the left side.
    VirtualLeft,
    /// Blue, attached to every site of the top side.
    VirtualTop,
}

impl fmt::Display for InterfaceVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterfaceVertex::Site(s) => write!(f, "{s}"),
            InterfaceVertex::VirtualLeft => f.write_str("L"),
            InterfaceVertex::VirtualTop => f.write_str("T"),
        }
    }
}

/// One triangle entered by the interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub red: InterfaceVertex,
    pub blue: InterfaceVertex,
    pub apex: InterfaceVertex,
    pub apex_color: Color,
    /// Cell whose diagonal was revealed when entering this triangle.
    pub revealed_cell: Option<(CellCoord, Orientation)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationResult {
    pub exit_side: ExitSide,
    pub revealed_sites: Vec<(SiteCoord, Color)>,
    pub revealed_cells: Vec<(CellCoord, Orientation)>,
    pub step_count: usize,
    pub trace: Vec<TraceStep>,
}

enum Next {
    Enter {
        apex: InterfaceVertex,
        revealed: Option<(CellCoord, Orientation)>,
    },
    Exit(ExitSide),
}

struct Walker<'a> {
    w: usize,
    h: usize,
    src: &'a mut LazySource,
}

impl Walker<'_> {
    /// Apex of the triangle of `cell` that contains the side `a`–`b`.
    fn enter_cell(&mut self, cell: CellCoord, a: SiteCoord, b: SiteCoord) -> Next {
        let (o, fresh) = self.src.orientation_fresh(cell);
        let (d1, d2) = cell.diagonal(o);
        let apex = if d1 == a || d1 == b { d2 } else { d1 };
        Next::Enter {
            apex: InterfaceVertex::Site(apex),
            revealed: fresh.then_some((cell, o)),
        }
    }

    /// The triangle across the edge `{u, v}` from the triangle whose third vertex is `from`.
    fn next(&mut self, u: InterfaceVertex, v: InterfaceVertex, from: Option<InterfaceVertex>) -> Next {
        use InterfaceVertex::{Site, VirtualLeft as L, VirtualTop as T};
        let (w, h) = (self.w, self.h);
        let enter = |s: SiteCoord| Next::Enter {
            apex: Site(s),
            revealed: None,
        };
        match (u, v) {
            (L, T) | (T, L) => enter(SiteCoord::new(0, h)),
            (L, Site(s)) | (Site(s), L) => {
                debug_assert_eq!(s.x, 0);
                let downwards = match from {
                    Some(T) => true,
                    Some(Site(f)) => f.y > s.y,
                    _ => unreachable!("virtual left edge entered from {from:?}"),
                };
                match (downwards, s.y) {
                    (true, 0) => Next::Exit(ExitSide::Bottom),
                    (true, y) => enter(SiteCoord::new(0, y - 1)),
                    (false, y) if y == h => Next::Enter { apex: T, revealed: None },
                    (false, y) => enter(SiteCoord::new(0, y + 1)),
                }
            }
            (T, Site(s)) | (Site(s), T) => {
                debug_assert_eq!(s.y, h);
                let rightwards = match from {
                    Some(L) => true,
                    Some(Site(f)) => f.x < s.x,
                    _ => unreachable!("virtual top edge entered from {from:?}"),
                };
                match (rightwards, s.x) {
                    (true, x) if x == w => Next::Exit(ExitSide::Right),
                    (true, x) => enter(SiteCoord::new(x + 1, h)),
                    (false, 0) => Next::Enter { apex: L, revealed: None },
                    (false, x) => enter(SiteCoord::new(x - 1, h)),
                }
            }
            (Site(a), Site(b)) => {
                if a.y == b.y {
                    let (x, y) = (a.x.min(b.x), a.y);
                    let from_above = match from {
                        Some(T) => true,
                        Some(Site(f)) => f.y > y,
                        _ => unreachable!("horizontal edge entered from {from:?}"),
                    };
                    if from_above {
                        if y == 0 {
                            Next::Exit(ExitSide::Bottom)
                        } else {
                            self.enter_cell(CellCoord::new(x, y - 1), a, b)
                        }
                    } else if y == h {
                        Next::Enter { apex: T, revealed: None }
                    } else {
                        self.enter_cell(CellCoord::new(x, y), a, b)
                    }
                } else if a.x == b.x {
                    let (x, y) = (a.x, a.y.min(b.y));
                    let from_left = match from {
                        Some(L) => true,
                        Some(Site(f)) => f.x < x,
                        _ => unreachable!("vertical edge entered from {from:?}"),
                    };
                    if from_left {
                        if x == w {
                            Next::Exit(ExitSide::Right)
                        } else {
                            self.enter_cell(CellCoord::new(x, y), a, b)
                        }
                    } else if x == 0 {
                        Next::Enter { apex: L, revealed: None }
                    } else {
                        self.enter_cell(CellCoord::new(x - 1, y), a, b)
                    }
                } else {
                    // diagonal: the other triangle of the same cell
                    let cell = CellCoord::new(a.x.min(b.x), a.y.min(b.y));
                    let o = self.src.orientation(cell);
                    let (o1, o2) = cell.off_diagonal(o);
                    let apex = if from == Some(Site(o1)) { o2 } else { o1 };
                    enter(apex)
                }
            }
            (L, L) | (T, T) => unreachable!("degenerate interface edge"),
        }
    }
}

/// Runs the interface walk on `d`, revealing from `src` only what it needs.
pub fn explore(d: &RectDomain, src: &mut LazySource) -> Result<ExplorationResult> {
    if src.domain() != *d {
        return Err(Error::domain(format!(
            "lazy source covers {} but exploration domain is {d}",
            src.domain()
        )));
    }
    let max_steps = 2 * d.cell_count() + d.cells_w() + d.cells_h() + 1;
    let mut walker = Walker {
        w: d.cells_w(),
        h: d.cells_h(),
        src,
    };
    let (mut red, mut blue) = (InterfaceVertex::VirtualLeft, InterfaceVertex::VirtualTop);
    let mut from = None;
    let mut trace = Vec::new();
    let exit_side = loop {
        match walker.next(red, blue, from) {
            Next::Exit(side) => break side,
            Next::Enter { apex, revealed } => {
                let apex_color = match apex {
                    InterfaceVertex::Site(s) => walker.src.color(s),
                    InterfaceVertex::VirtualLeft => Color::Red,
                    InterfaceVertex::VirtualTop => Color::Blue,
                };
                trace.push(TraceStep {
                    red,
                    blue,
                    apex,
                    apex_color,
                    revealed_cell: revealed,
                });
                assert!(trace.len() <= max_steps, "interface revisited a triangle");
                if apex_color == Color::Red {
                    from = Some(red);
                    red = apex;
                } else {
                    from = Some(blue);
                    blue = apex;
                }
            }
        }
    };
    Ok(ExplorationResult {
        exit_side,
        revealed_sites: walker.src.site_log.clone(),
        revealed_cells: walker.src.cell_log.clone(),
        step_count: trace.len(),
        trace,
    })
}

/// Resamples everything the exploration did not reveal, `resamples` times with fresh
/// keys derived from `resample_seed`, and checks that the red left-right crossing
/// verdict always agrees with the recorded exit side.
pub fn exploration_measurability_check(
    d: &RectDomain,
    result: &ExplorationResult,
    p: f64,
    resample_seed: u64,
    resamples: u64,
) -> Result<bool> {
    for i in 0..resamples {
        let key = SamplerKey::new(derive_seed(resample_seed, &[0x7265_7361_6d70, i]), 0);
        let mut omega = DiagonalConfig::sample(*d, key);
        let mut sigma = ColorConfig::sample(*d, key, p);
        for &(s, c) in &result.revealed_sites {
            d.check_site(s)?;
            sigma.set(s, c);
        }
        for &(c, o) in &result.revealed_cells {
            d.check_cell(c)?;
            omega.set(c, o);
        }
        let crosses = has_crossing(&omega, &sigma, d, Color::Red, Axis::LeftRight)?;
        if crosses != (result.exit_side == ExitSide::Right) {
            return Ok(false);
        }
    }
    Ok(true)
}
