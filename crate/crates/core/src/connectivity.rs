//! Monochromatic clusters, crossings and circuits.
//!
//! Connectivity is always computed over a set of closed cells: each included cell
//! contributes its four sides and its diagonal. For a full rectangle this is exactly
//! the triangulation restricted to the rectangle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    check_dims, Arc, CellCoord, Color, ColorConfig, DiagonalConfig, RectDomain, SiteCoord,
};
use crate::unionfind::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    LeftRight,
    TopBottom,
}

impl Axis {
    pub const fn arcs(self) -> (Arc, Arc) {
        match self {
            Axis::LeftRight => (Arc::Left, Arc::Right),
            Axis::TopBottom => (Arc::Top, Arc::Bottom),
        }
    }

    pub const fn transverse(self) -> Self {
        match self {
            Axis::LeftRight => Axis::TopBottom,
            Axis::TopBottom => Axis::LeftRight,
        }
    }
}

/// Which edges make up the graph. Anything but `Triangulated` breaks self-duality and
/// exists only to check that duality tests can fail.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjacency {
    Triangulated,
    SquareOnly,
}

/// Unions same-colored corners along the sides and diagonal of every listed cell.
fn union_cells(
    uf: &mut UnionFind,
    omega: &DiagonalConfig,
    sigma: &ColorConfig,
    color: Color,
    cells: impl Iterator<Item = CellCoord>,
    adjacency: Adjacency,
) {
    let d = sigma.domain();
    let join = |uf: &mut UnionFind, a: SiteCoord, b: SiteCoord| {
        let (ia, ib) = (d.site_index(a), d.site_index(b));
        if sigma.get_index(ia) == color && sigma.get_index(ib) == color {
            uf.union(ia, ib);
        }
    };
    for c in cells {
        join(uf, c.sw(), c.se());
        join(uf, c.sw(), c.nw());
        join(uf, c.se(), c.ne());
        join(uf, c.nw(), c.ne());
        if adjacency == Adjacency::Triangulated {
            let (a, b) = c.diagonal(omega.get(c));
            join(uf, a, b);
        }
    }
}

fn union_domain(
    omega: &DiagonalConfig,
    sigma: &ColorConfig,
    d: &RectDomain,
    color: Color,
    adjacency: Adjacency,
) -> UnionFind {
    let mut uf = UnionFind::new(d.site_count());
    union_cells(&mut uf, omega, sigma, color, d.cells(), adjacency);
    uf
}

/// Does some `color` site of `from` share a set with some `color` site of `to`?
fn sets_meet(
    uf: &mut UnionFind,
    sigma: &ColorConfig,
    color: Color,
    from: impl IntoIterator<Item = SiteCoord>,
    to: impl IntoIterator<Item = SiteCoord>,
) -> bool {
    let d = sigma.domain();
    let mut marked = vec![false; d.site_count()];
    for s in from {
        let i = d.site_index(s);
        if sigma.get_index(i) == color {
            marked[uf.find(i)] = true;
        }
    }
    to.into_iter().any(|s| {
        let i = d.site_index(s);
        sigma.get_index(i) == color && marked[uf.find(i)]
    })
}

/// Cluster ids for the sites of one color.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabeling {
    domain: RectDomain,
    color: Color,
    labels: Vec<Option<usize>>,
}

impl ClusterLabeling {
    pub fn color(&self) -> Color {
        self.color
    }

    /// Cluster id of `s`: the row-major index of the smallest site in its cluster,
    /// or `None` if `s` has the other color.
    pub fn label(&self, s: SiteCoord) -> Option<usize> {
        self.labels[self.domain.site_index(s)]
    }

    pub fn same_cluster(&self, a: SiteCoord, b: SiteCoord) -> bool {
        matches!((self.label(a), self.label(b)), (Some(x), Some(y)) if x == y)
    }

    pub fn cluster_count(&self) -> usize {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(i, l)| *l == Some(i))
            .count()
    }

    pub fn as_slice(&self) -> &[Option<usize>] {
        &self.labels
    }
}

pub fn build_clusters(
    omega: &DiagonalConfig,
    sigma: &ColorConfig,
    d: &RectDomain,
    color: Color,
) -> Result<ClusterLabeling> {
    check_dims(omega, sigma, d)?;
    let mut uf = union_domain(omega, sigma, d, color, Adjacency::Triangulated);
    Ok(labeling_from(&mut uf, sigma, *d, color))
}

pub(crate) fn labeling_from(
    uf: &mut UnionFind,
    sigma: &ColorConfig,
    d: RectDomain,
    color: Color,
) -> ClusterLabeling {
    let n = d.site_count();
    let mut smallest = vec![usize::MAX; n];
    let mut labels = vec![None; n];
    for i in 0..n {
        if sigma.get_index(i) != color {
            continue;
        }
        let r = uf.find(i);
        if smallest[r] == usize::MAX {
            smallest[r] = i;
        }
        labels[i] = Some(smallest[r]);
    }
    ClusterLabeling {
        domain: d,
        color,
        labels,
    }
}

/// Is there a `color` path inside `d` joining the two arcs of `axis`?
pub fn has_crossing(
    omega: &DiagonalConfig,
    sigma: &ColorConfig,
    d: &RectDomain,
    color: Color,
    axis: Axis,
) -> Result<bool> {
    check_dims(omega, sigma, d)?;
    Ok(crossing_unchecked(omega, sigma, d, color, axis, Adjacency::Triangulated))
}

pub(crate) fn crossing_unchecked(
    omega: &DiagonalConfig,
    sigma: &ColorConfig,
    d: &RectDomain,
    color: Color,
    axis: Axis,
    adjacency: Adjacency,
) -> bool {
    let mut uf = union_domain(omega, sigma, d, color, adjacency);
    let (a, b) = axis.arcs();
    sets_meet(&mut uf, sigma, color, d.arc_sites(a), d.arc_sites(b))
}

/// Red left-right crossing XOR blue top-bottom crossing. Always `true` on a
/// triangulation; a `false` return is a correctness failure.
pub fn check_duality(omega: &DiagonalConfig, sigma: &ColorConfig, d: &RectDomain) -> Result<bool> {
    check_duality_with(omega, sigma, d, Adjacency::Triangulated)
}

#[doc(hidden)]
pub fn check_duality_with(
    omega: &DiagonalConfig,
    sigma: &ColorConfig,
    d: &RectDomain,
    adjacency: Adjacency,
) -> Result<bool> {
    check_dims(omega, sigma, d)?;
    let red = crossing_unchecked(omega, sigma, d, Color::Red, Axis::LeftRight, adjacency);
    let blue = crossing_unchecked(omega, sigma, d, Color::Blue, Axis::TopBottom, adjacency);
    Ok(red ^ blue)
}

/// Is some `color` site of `from` joined to some `color` site of `to` by a `color` path
/// through the closed cells `cells` (all of `d` when `None`)?
pub fn connected_within(
    omega: &DiagonalConfig,
    sigma: &ColorConfig,
    d: &RectDomain,
    from: &[SiteCoord],
    to: &[SiteCoord],
    color: Color,
    cells: Option<&[CellCoord]>,
) -> Result<bool> {
    check_dims(omega, sigma, d)?;
    for &s in from.iter().chain(to) {
        d.check_site(s)?;
    }
    let mut uf = match cells {
        None => union_domain(omega, sigma, d, color, Adjacency::Triangulated),
        Some(cells) => {
            for &c in cells {
                d.check_cell(c)?;
            }
            let mut uf = UnionFind::new(d.site_count());
            union_cells(
                &mut uf,
                omega,
                sigma,
                color,
                cells.iter().copied(),
                Adjacency::Triangulated,
            );
            uf
        }
    };
    Ok(sets_meet(
        &mut uf,
        sigma,
        color,
        from.iter().copied(),
        to.iter().copied(),
    ))
}

/// Region between two co-centered squares of side `4n` and `6n` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Annulus {
    n: usize,
    origin: SiteCoord,
}

impl Annulus {
    /// `origin` is the lower-left corner of the outer square.
    pub fn new(n: usize, origin: SiteCoord) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("annulus scale n must be at least 1"));
        }
        Ok(Annulus { n, origin })
    }

    /// Annulus filling a `6n × 6n` domain.
    pub fn centered(n: usize) -> Result<Self> {
        Self::new(n, SiteCoord::new(0, 0))
    }

    /// Smallest square domain holding `centered(n)`.
    pub fn ambient(n: usize) -> Result<RectDomain> {
        RectDomain::square(6 * n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn origin(&self) -> SiteCoord {
        self.origin
    }

    pub fn outer_side(&self) -> usize {
        6 * self.n
    }

    pub fn inner_side(&self) -> usize {
        4 * self.n
    }

    pub fn check_fits(&self, d: &RectDomain) -> Result<()> {
        let s = self.outer_side();
        if self.origin.x + s > d.cells_w() || self.origin.y + s > d.cells_h() {
            return Err(Error::domain(format!(
                "annulus with outer side {s} at {} does not fit in {d}",
                self.origin
            )));
        }
        Ok(())
    }

    /// Cells of the closed annulus: inside the outer square, outside the inner one.
    pub fn cells(&self) -> Vec<CellCoord> {
        let (ox, oy, n) = (self.origin.x, self.origin.y, self.n);
        let inner = |v: usize, o: usize| v >= o + n && v < o + 5 * n;
        let mut out = Vec::with_capacity(20 * n * n);
        for y in oy..oy + 6 * n {
            for x in ox..ox + 6 * n {
                if !(inner(x, ox) && inner(y, oy)) {
                    out.push(CellCoord::new(x, y));
                }
            }
        }
        out
    }

    fn perimeter(lo_x: usize, lo_y: usize, side: usize) -> Vec<SiteCoord> {
        let mut out = Vec::with_capacity(4 * side);
        for i in 0..side {
            out.push(SiteCoord::new(lo_x + i, lo_y));
            out.push(SiteCoord::new(lo_x + side, lo_y + i));
            out.push(SiteCoord::new(lo_x + side - i, lo_y + side));
            out.push(SiteCoord::new(lo_x, lo_y + side - i));
        }
        out
    }

    pub fn inner_boundary(&self) -> Vec<SiteCoord> {
        Self::perimeter(self.origin.x + self.n, self.origin.y + self.n, self.inner_side())
    }

    pub fn outer_boundary(&self) -> Vec<SiteCoord> {
        Self::perimeter(self.origin.x, self.origin.y, self.outer_side())
    }
}

/// Is there a `color` circuit in the closed annulus surrounding the inner square?
///
/// Decided through the annulus form of self-duality: such a circuit exists iff no
/// path of the other color joins the inner boundary to the outer boundary.
pub fn has_circuit(
    omega: &DiagonalConfig,
    sigma: &ColorConfig,
    d: &RectDomain,
    ann: &Annulus,
    color: Color,
) -> Result<bool> {
    check_dims(omega, sigma, d)?;
    ann.check_fits(d)?;
    let other = color.swap();
    let mut uf = UnionFind::new(d.site_count());
    union_cells(
        &mut uf,
        omega,
        sigma,
        other,
        ann.cells().into_iter(),
        Adjacency::Triangulated,
    );
    Ok(!sets_meet(
        &mut uf,
        sigma,
        other,
        ann.inner_boundary(),
        ann.outer_boundary(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{neighbors, Orientation, SamplerKey};
    use proptest::prelude::*;
    use std::collections::{HashMap, VecDeque};

    fn dom(w: usize, h: usize) -> RectDomain {
        RectDomain::new(w, h).unwrap()
    }

    /// Depth-first labeling straight from `neighbors`.
    fn dfs_labels(omega: &DiagonalConfig, sigma: &ColorConfig, color: Color) -> Vec<Option<usize>> {
        let d = sigma.domain();
        let mut labels = vec![None; d.site_count()];
        for start in 0..d.site_count() {
            if sigma.get_index(start) != color || labels[start].is_some() {
                continue;
            }
            let mut stack = vec![start];
            labels[start] = Some(start);
            while let Some(i) = stack.pop() {
                for t in neighbors(d.site_at(i), &d, omega).unwrap() {
                    let j = d.site_index(t);
                    if sigma.get_index(j) == color && labels[j].is_none() {
                        labels[j] = Some(start);
                        stack.push(j);
                    }
                }
            }
        }
        labels
    }

    fn dfs_crossing(omega: &DiagonalConfig, sigma: &ColorConfig, color: Color, axis: Axis) -> bool {
        let d = sigma.domain();
        let labels = dfs_labels(omega, sigma, color);
        let (a, b) = axis.arcs();
        d.arc_sites(a).iter().any(|&s| {
            let la = labels[d.site_index(s)];
            la.is_some() && d.arc_sites(b).iter().any(|&t| labels[d.site_index(t)] == la)
        })
    }

    #[test]
    fn cluster_examples() {
        let d = dom(4, 3);
        let omega = DiagonalConfig::filled(d, Orientation::NwSe);
        let all_red = ColorConfig::filled(d, Color::Red);
        let l = build_clusters(&omega, &all_red, &d, Color::Red).unwrap();
        assert_eq!(l.cluster_count(), 1);
        assert!(d.sites().all(|s| l.label(s) == Some(0)));

        let mut one = ColorConfig::filled(d, Color::Blue);
        one.set(SiteCoord::new(2, 1), Color::Red);
        let l = build_clusters(&omega, &one, &d, Color::Red).unwrap();
        assert_eq!(l.cluster_count(), 1);
        assert_eq!(l.label(SiteCoord::new(2, 1)), Some(d.site_index(SiteCoord::new(2, 1))));
        assert_eq!(l.label(SiteCoord::new(0, 0)), None);
    }

    #[test]
    fn checkerboard_follows_nwse_chains() {
        let d = dom(5, 5);
        let omega = DiagonalConfig::filled(d, Orientation::NwSe);
        let sigma = ColorConfig::from_fn(d, |s| {
            if (s.x + s.y) % 2 == 0 {
                Color::Red
            } else {
                Color::Blue
            }
        });
        // red sites have even x+y; NW-SE diagonals join (x, y+1)-(x+1, y), i.e. constant x+y
        let l = build_clusters(&omega, &sigma, &d, Color::Red).unwrap();
        for a in d.sites() {
            for b in d.sites() {
                if sigma.get(a) == Color::Red && sigma.get(b) == Color::Red {
                    assert_eq!(l.same_cluster(a, b), a.x + a.y == b.x + b.y);
                }
            }
        }
        let dfs = dfs_labels(&omega, &sigma, Color::Red);
        assert_eq!(l.as_slice(), dfs.as_slice());
    }

    #[test]
    fn labels_match_dfs_on_random_instances() {
        for r in 0..1000u64 {
            let key = SamplerKey::new(123, r);
            let d = dom(1 + (r % 7) as usize, 1 + (r / 7 % 5) as usize);
            let omega = DiagonalConfig::sample(d, key);
            let sigma = ColorConfig::sample(d, key, 0.3 + 0.4 * ((r % 3) as f64 / 2.0));
            for color in [Color::Red, Color::Blue] {
                let l = build_clusters(&omega, &sigma, &d, color).unwrap();
                assert_eq!(l.as_slice(), dfs_labels(&omega, &sigma, color).as_slice());
                for axis in [Axis::LeftRight, Axis::TopBottom] {
                    assert_eq!(
                        has_crossing(&omega, &sigma, &d, color, axis).unwrap(),
                        dfs_crossing(&omega, &sigma, color, axis)
                    );
                }
            }
        }
    }

    #[test]
    fn crossing_examples() {
        let d = dom(3, 2);
        let omega = DiagonalConfig::sample(d, SamplerKey::new(1, 1));
        let red = ColorConfig::filled(d, Color::Red);
        let blue = ColorConfig::filled(d, Color::Blue);
        assert!(has_crossing(&omega, &red, &d, Color::Red, Axis::LeftRight).unwrap());
        assert!(!has_crossing(&omega, &blue, &d, Color::Red, Axis::LeftRight).unwrap());

        let d1 = dom(1, 1);
        let mut diag = ColorConfig::filled(d1, Color::Blue);
        diag.set(SiteCoord::new(0, 0), Color::Red);
        diag.set(SiteCoord::new(1, 1), Color::Red);
        let nesw = DiagonalConfig::filled(d1, Orientation::NeSw);
        let nwse = DiagonalConfig::filled(d1, Orientation::NwSe);
        assert!(has_crossing(&nesw, &diag, &d1, Color::Red, Axis::LeftRight).unwrap());
        assert!(!has_crossing(&nwse, &diag, &d1, Color::Red, Axis::LeftRight).unwrap());
    }

    #[test]
    fn duality_examples() {
        let d1 = dom(1, 1);
        let nwse = DiagonalConfig::filled(d1, Orientation::NwSe);
        assert!(check_duality(&nwse, &ColorConfig::filled(d1, Color::Red), &d1).unwrap());

        let mut sigma = ColorConfig::filled(d1, Color::Blue);
        sigma.set(SiteCoord::new(0, 0), Color::Red);
        assert!(!has_crossing(&nwse, &sigma, &d1, Color::Red, Axis::LeftRight).unwrap());
        assert!(has_crossing(&nwse, &sigma, &d1, Color::Blue, Axis::TopBottom).unwrap());
        assert!(check_duality(&nwse, &sigma, &d1).unwrap());
    }

    /// All 2^(cells + sites) configurations of a small domain.
    fn for_all_configs(d: RectDomain, mut f: impl FnMut(&DiagonalConfig, &ColorConfig)) {
        let (nc, ns) = (d.cell_count(), d.site_count());
        for wm in 0u32..1 << nc {
            let omega = DiagonalConfig::from_fn(d, |c| {
                if wm >> d.cell_index(c) & 1 == 1 {
                    Orientation::NeSw
                } else {
                    Orientation::NwSe
                }
            });
            for sm in 0u32..1 << ns {
                let sigma = ColorConfig::from_fn(d, |s| {
                    if sm >> d.site_index(s) & 1 == 1 {
                        Color::Red
                    } else {
                        Color::Blue
                    }
                });
                f(&omega, &sigma);
            }
        }
    }

    #[test]
    fn duality_exhaustive_small() {
        for (w, h) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)] {
            let d = dom(w, h);
            let mut count = 0;
            for_all_configs(d, |omega, sigma| {
                assert!(check_duality(omega, sigma, &d).unwrap());
                count += 1;
            });
            assert_eq!(count, 1 << (d.cell_count() + d.site_count()));
        }
    }

    #[test]
    fn square_only_adjacency_breaks_duality() {
        let d = dom(2, 2);
        let mut violations = 0;
        for_all_configs(d, |omega, sigma| {
            if !check_duality_with(omega, sigma, &d, Adjacency::SquareOnly).unwrap() {
                violations += 1;
            }
        });
        assert!(violations > 0);
    }

    #[test]
    fn dimension_mismatch_is_domain_error() {
        let d = dom(2, 2);
        let omega = DiagonalConfig::filled(dom(3, 2), Orientation::NwSe);
        let sigma = ColorConfig::filled(d, Color::Red);
        assert!(matches!(
            has_crossing(&omega, &sigma, &d, Color::Red, Axis::LeftRight),
            Err(Error::Domain(_))
        ));
        assert!(build_clusters(&omega, &sigma, &d, Color::Red).is_err());
    }

    #[test]
    fn connection_within_subdomain() {
        let d = dom(2, 2);
        let omega = DiagonalConfig::filled(d, Orientation::NeSw);
        let sigma = ColorConfig::filled(d, Color::Red);
        let a = [SiteCoord::new(0, 0)];
        let b = [SiteCoord::new(2, 2)];
        assert!(connected_within(&omega, &sigma, &d, &a, &b, Color::Red, None).unwrap());
        let two = [CellCoord::new(0, 0), CellCoord::new(1, 1)];
        assert!(connected_within(&omega, &sigma, &d, &a, &b, Color::Red, Some(&two)).unwrap());
        let omega_w = DiagonalConfig::filled(d, Orientation::NwSe);
        // the two cells only share the corner (1,1), still reachable through the sides
        assert!(connected_within(&omega_w, &sigma, &d, &a, &b, Color::Red, Some(&two)).unwrap());
        let one = [CellCoord::new(0, 0)];
        assert!(!connected_within(&omega, &sigma, &d, &a, &b, Color::Red, Some(&one)).unwrap());
    }

    /// Winding-number oracle: a `color` closed walk in the annulus crossing the cut
    /// ray (from the center towards +x, between rows cy and cy+1) a nonzero net
    /// number of times.
    fn winding_circuit(omega: &DiagonalConfig, sigma: &ColorConfig, ann: &Annulus, color: Color) -> bool {
        let cx = ann.origin().x + 3 * ann.n();
        let cy = ann.origin().y + 3 * ann.n();
        let mut adj: HashMap<SiteCoord, Vec<(SiteCoord, i64)>> = HashMap::new();
        let mut edge = |a: SiteCoord, b: SiteCoord| {
            if sigma.get(a) != color || sigma.get(b) != color {
                return;
            }
            let cross = |lo: SiteCoord, hi: SiteCoord| {
                lo.y == cy && hi.y == cy + 1 && (lo.x + hi.x) > 2 * cx
            };
            let delta = if cross(a, b) {
                1
            } else if cross(b, a) {
                -1
            } else {
                0
            };
            adj.entry(a).or_default().push((b, delta));
            adj.entry(b).or_default().push((a, -delta));
        };
        for c in ann.cells() {
            edge(c.sw(), c.se());
            edge(c.sw(), c.nw());
            edge(c.se(), c.ne());
            edge(c.nw(), c.ne());
            let (a, b) = c.diagonal(omega.get(c));
            edge(a, b);
        }
        let mut sheet: HashMap<SiteCoord, i64> = HashMap::new();
        for &start in adj.keys() {
            if sheet.contains_key(&start) {
                continue;
            }
            sheet.insert(start, 0);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                let su = sheet[&u];
                for &(v, delta) in &adj[&u] {
                    match sheet.get(&v) {
                        Some(&sv) if sv != su + delta => return true,
                        Some(_) => {}
                        None => {
                            sheet.insert(v, su + delta);
                            queue.push_back(v);
                        }
                    }
                }
            }
        }
        false
    }

    #[test]
    fn circuit_examples() {
        let ann = Annulus::centered(1).unwrap();
        let d = Annulus::ambient(1).unwrap();
        let omega = DiagonalConfig::sample(d, SamplerKey::new(3, 3));
        let red = ColorConfig::filled(d, Color::Red);
        let blue = ColorConfig::filled(d, Color::Blue);
        assert!(has_circuit(&omega, &red, &d, &ann, Color::Red).unwrap());
        assert!(!has_circuit(&omega, &blue, &d, &ann, Color::Red).unwrap());

        // blue radial corridor from the inner bottom side down to the outer boundary
        for seed in 0..20 {
            let omega = DiagonalConfig::sample(d, SamplerKey::new(seed, 0));
            let mut sigma = red.clone();
            for y in 0..=1 {
                sigma.set(SiteCoord::new(3, y), Color::Blue);
            }
            assert!(!has_circuit(&omega, &sigma, &d, &ann, Color::Red).unwrap());
            assert!(!winding_circuit(&omega, &sigma, &ann, Color::Red));
        }
    }

    #[test]
    fn circuit_agrees_with_winding_oracle() {
        for n in 1..=2 {
            let ann = Annulus::new(n, SiteCoord::new(1, 0)).unwrap();
            let d = dom(6 * n + 2, 6 * n + 1);
            for r in 0..500 {
                let key = SamplerKey::new(77, r);
                let omega = DiagonalConfig::sample(d, key);
                let sigma = ColorConfig::sample(d, key, 0.35 + 0.3 * ((r % 4) as f64 / 3.0));
                for color in [Color::Red, Color::Blue] {
                    assert_eq!(
                        has_circuit(&omega, &sigma, &d, &ann, color).unwrap(),
                        winding_circuit(&omega, &sigma, &ann, color),
                        "n={n} r={r} {color}"
                    );
                }
            }
        }
    }

    #[test]
    fn annulus_geometry() {
        let ann = Annulus::centered(2).unwrap();
        assert_eq!(ann.cells().len(), 144 - 64);
        assert_eq!(ann.inner_boundary().len(), 32);
        assert_eq!(ann.outer_boundary().len(), 48);
        assert!(ann.check_fits(&dom(11, 12)).is_err());
        assert!(Annulus::new(0, SiteCoord::new(0, 0)).is_err());
    }

    proptest! {
        #[test]
        fn crossing_monotone_in_colors(seed in any::<u64>(), w in 1usize..8, h in 1usize..8, p in 0.1f64..0.9) {
            let d = dom(w, h);
            let key = SamplerKey::new(seed, 0);
            let omega = DiagonalConfig::sample(d, key);
            let sigma = ColorConfig::sample(d, key, p);
            let before = has_crossing(&omega, &sigma, &d, Color::Red, Axis::LeftRight).unwrap();
            for s in d.sites() {
                if sigma.get(s) == Color::Blue {
                    let mut up = sigma.clone();
                    up.set(s, Color::Red);
                    let after = has_crossing(&omega, &up, &d, Color::Red, Axis::LeftRight).unwrap();
                    prop_assert!(!before || after);
                }
            }
        }

        #[test]
        fn crossing_monotone_in_diagonals(seed in any::<u64>(), w in 1usize..8, h in 1usize..8, p in 0.1f64..0.9) {
            use crate::lattice::{flip_effect, FlipEffect};
            let d = dom(w, h);
            let key = SamplerKey::new(seed, 1);
            let omega = DiagonalConfig::sample(d, key);
            let sigma = ColorConfig::sample(d, key, p);
            for axis in [Axis::LeftRight, Axis::TopBottom] {
                let before = has_crossing(&omega, &sigma, &d, Color::Red, axis).unwrap();
                for c in d.cells() {
                    let from = omega.get(c);
                    let effect = flip_effect(sigma.cell_type(c), from, from.flip());
                    let mut flipped = omega.clone();
                    flipped.flip(c);
                    let after = has_crossing(&flipped, &sigma, &d, Color::Red, axis).unwrap();
                    match effect {
                        FlipEffect::Increases => prop_assert!(!before || after),
                        FlipEffect::Decreases => prop_assert!(before || !after),
                        FlipEffect::Neutral => prop_assert_eq!(before, after),
                    }
                }
            }
        }

        #[test]
        fn duality_on_samples(seed in any::<u64>(), w in 1usize..20, h in 1usize..20, p in 0.0f64..=1.0) {
            let d = dom(w, h);
            let key = SamplerKey::new(seed, 2);
            let omega = DiagonalConfig::sample(d, key);
            let sigma = ColorConfig::sample(d, key, p);
            prop_assert!(check_duality(&omega, &sigma, &d).unwrap());
        }
    }
}
