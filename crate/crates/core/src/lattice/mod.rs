//! Geometry of the diagonalized square lattice.
//!
//! A finite rectangle of `cells_w × cells_h` unit cells has `(cells_w+1) × (cells_h+1)`
//! sites. Every cell carries exactly one of its two diagonals, which turns the square
//! grid into a triangulation. Sites are colored red or blue.
//!
//! Coordinates grow rightwards (`x`) and upwards (`y`); a cell is named by its
//! lower-left (south-west) corner.

mod sampling;
mod text;

pub use sampling::{derive_seed, sample_color, sample_diagonal, site_uniform, SamplerKey};
pub use text::{parse_text, to_text};

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported number of cells along one side.
pub const MAX_SIDE: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteCoord {
    pub x: usize,
    pub y: usize,
}

impl SiteCoord {
    pub const fn new(x: usize, y: usize) -> Self {
        SiteCoord { x, y }
    }
}

impl fmt::Display for SiteCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellCoord {
    pub x: usize,
    pub y: usize,
}

impl CellCoord {
    pub const fn new(x: usize, y: usize) -> Self {
        CellCoord { x, y }
    }

    pub const fn sw(self) -> SiteCoord {
        SiteCoord::new(self.x, self.y)
    }

    pub const fn se(self) -> SiteCoord {
        SiteCoord::new(self.x + 1, self.y)
    }

    pub const fn nw(self) -> SiteCoord {
        SiteCoord::new(self.x, self.y + 1)
    }

    pub const fn ne(self) -> SiteCoord {
        SiteCoord::new(self.x + 1, self.y + 1)
    }

    /// The two corners joined by the diagonal of orientation `o`.
    pub const fn diagonal(self, o: Orientation) -> (SiteCoord, SiteCoord) {
        match o {
            Orientation::NwSe => (self.nw(), self.se()),
            Orientation::NeSw => (self.sw(), self.ne()),
        }
    }

    /// The two corners left unjoined by the diagonal of orientation `o`.
    pub const fn off_diagonal(self, o: Orientation) -> (SiteCoord, SiteCoord) {
        self.diagonal(o.flip())
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Which diagonal a cell carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// Joins the north-west and south-east corners (`\`).
    NwSe,
    /// Joins the north-east and south-west corners (`/`).
    NeSw,
}

impl Orientation {
    pub const fn flip(self) -> Self {
        match self {
            Orientation::NwSe => Orientation::NeSw,
            Orientation::NeSw => Orientation::NwSe,
        }
    }

    pub const fn glyph(self) -> char {
        match self {
            Orientation::NwSe => '\\',
            Orientation::NeSw => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub const fn swap(self) -> Self {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    pub const fn glyph(self) -> char {
        match self {
            Color::Red => 'R',
            Color::Blue => 'B',
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Color::Red => "red",
            Color::Blue => "blue",
        })
    }
}

/// Classification of a cell by the colors of its four corners.
///
/// `N` cells are indifferent to their diagonal. In an `A` cell the NE–SW diagonal
/// is the better one for red (equivalently the NW–SE one is better for blue);
/// `B` is the mirror image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellType {
    N,
    A,
    B,
}

/// +1 for a red pair, -1 for a blue pair, 0 for a mixed pair.
fn pair_score(a: Color, b: Color) -> i8 {
    match (a, b) {
        (Color::Red, Color::Red) => 1,
        (Color::Blue, Color::Blue) => -1,
        _ => 0,
    }
}

pub fn classify_cell(nw: Color, ne: Color, sw: Color, se: Color) -> CellType {
    let nesw = pair_score(ne, sw);
    let nwse = pair_score(nw, se);
    match nesw.cmp(&nwse) {
        std::cmp::Ordering::Greater => CellType::A,
        std::cmp::Ordering::Less => CellType::B,
        std::cmp::Ordering::Equal => CellType::N,
    }
}

/// Effect of a diagonal flip on a robust observable that is increasing in the diagonals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlipEffect {
    Increases,
    Decreases,
    Neutral,
}

/// Direction of the partial order on diagonals induced by the cell type.
pub fn flip_effect(t: CellType, from: Orientation, to: Orientation) -> FlipEffect {
    if from == to {
        return FlipEffect::Neutral;
    }
    let towards_nesw = to == Orientation::NeSw;
    match (t, towards_nesw) {
        (CellType::N, _) => FlipEffect::Neutral,
        (CellType::A, true) | (CellType::B, false) => FlipEffect::Increases,
        (CellType::A, false) | (CellType::B, true) => FlipEffect::Decreases,
    }
}

/// One of the four boundary arcs of a rectangle. Corners belong to both incident arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arc {
    Left,
    Right,
    Top,
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RectDomain {
    cells_w: usize,
    cells_h: usize,
}

impl RectDomain {
    pub fn new(cells_w: usize, cells_h: usize) -> Result<Self> {
        if cells_w == 0 || cells_h == 0 {
            return Err(Error::domain(format!(
                "rectangle needs at least one cell per side, got {cells_w}x{cells_h}"
            )));
        }
        if cells_w > MAX_SIDE || cells_h > MAX_SIDE {
            return Err(Error::domain(format!(
                "rectangle {cells_w}x{cells_h} exceeds {MAX_SIDE} cells per side"
            )));
        }
        Ok(RectDomain { cells_w, cells_h })
    }

    /// Square of `n × n` cells.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub const fn cells_w(&self) -> usize {
        self.cells_w
    }

    pub const fn cells_h(&self) -> usize {
        self.cells_h
    }

    /// Number of site columns (`cells_w + 1`).
    pub const fn sites_w(&self) -> usize {
        self.cells_w + 1
    }

    pub const fn sites_h(&self) -> usize {
        self.cells_h + 1
    }

    pub const fn site_count(&self) -> usize {
        self.sites_w() * self.sites_h()
    }

    pub const fn cell_count(&self) -> usize {
        self.cells_w * self.cells_h
    }

    pub const fn contains_site(&self, s: SiteCoord) -> bool {
        s.x <= self.cells_w && s.y <= self.cells_h
    }

    pub const fn contains_cell(&self, c: CellCoord) -> bool {
        c.x < self.cells_w && c.y < self.cells_h
    }

    /// Row-major index, rows ordered by increasing `y`.
    #[inline]
    pub const fn site_index(&self, s: SiteCoord) -> usize {
        s.y * self.sites_w() + s.x
    }

    #[inline]
    pub const fn site_at(&self, index: usize) -> SiteCoord {
        SiteCoord::new(index % self.sites_w(), index / self.sites_w())
    }

    #[inline]
    pub const fn cell_index(&self, c: CellCoord) -> usize {
        c.y * self.cells_w + c.x
    }

    #[inline]
    pub const fn cell_at(&self, index: usize) -> CellCoord {
        CellCoord::new(index % self.cells_w, index / self.cells_w)
    }

    pub fn sites(&self) -> impl DoubleEndedIterator<Item = SiteCoord> + ExactSizeIterator + '_ {
        (0..self.site_count()).map(|i| self.site_at(i))
    }

    pub fn cells(&self) -> impl DoubleEndedIterator<Item = CellCoord> + ExactSizeIterator + '_ {
        (0..self.cell_count()).map(|i| self.cell_at(i))
    }

    pub const fn on_arc(&self, s: SiteCoord, arc: Arc) -> bool {
        match arc {
            Arc::Left => s.x == 0,
            Arc::Right => s.x == self.cells_w,
            Arc::Top => s.y == self.cells_h,
            Arc::Bottom => s.y == 0,
        }
    }

    /// Sites of an arc, in increasing index order.
    pub fn arc_sites(&self, arc: Arc) -> Vec<SiteCoord> {
        match arc {
            Arc::Left => (0..self.sites_h()).map(|y| SiteCoord::new(0, y)).collect(),
            Arc::Right => (0..self.sites_h())
                .map(|y| SiteCoord::new(self.cells_w, y))
                .collect(),
            Arc::Bottom => (0..self.sites_w()).map(|x| SiteCoord::new(x, 0)).collect(),
            Arc::Top => (0..self.sites_w())
                .map(|x| SiteCoord::new(x, self.cells_h))
                .collect(),
        }
    }

    pub(crate) fn check_site(&self, s: SiteCoord) -> Result<()> {
        if self.contains_site(s) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "site {s} outside {}x{} cell domain",
                self.cells_w, self.cells_h
            )))
        }
    }

    pub(crate) fn check_cell(&self, c: CellCoord) -> Result<()> {
        if self.contains_cell(c) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "cell {c} outside {}x{} cell domain",
                self.cells_w, self.cells_h
            )))
        }
    }
}

impl fmt::Display for RectDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.cells_w, self.cells_h)
    }
}

/// One diagonal per cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DiagonalConfig {
    domain: RectDomain,
    cells: Vec<Orientation>,
}

impl DiagonalConfig {
    pub fn filled(domain: RectDomain, o: Orientation) -> Self {
        DiagonalConfig {
            domain,
            cells: vec![o; domain.cell_count()],
        }
    }

    pub fn from_fn(domain: RectDomain, mut f: impl FnMut(CellCoord) -> Orientation) -> Self {
        let cells = domain.cells().map(&mut f).collect();
        DiagonalConfig { domain, cells }
    }

    /// Eagerly samples every cell from the fair-coin diagonal measure.
    pub fn sample(domain: RectDomain, key: SamplerKey) -> Self {
        Self::from_fn(domain, |c| sample_diagonal(key, c))
    }

    pub fn domain(&self) -> RectDomain {
        self.domain
    }

    #[inline]
    pub fn get(&self, c: CellCoord) -> Orientation {
        self.cells[self.domain.cell_index(c)]
    }

    #[inline]
    pub fn set(&mut self, c: CellCoord, o: Orientation) {
        let i = self.domain.cell_index(c);
        self.cells[i] = o;
    }

    pub fn flip(&mut self, c: CellCoord) {
        let i = self.domain.cell_index(c);
        self.cells[i] = self.cells[i].flip();
    }

    pub fn as_slice(&self) -> &[Orientation] {
        &self.cells
    }
}

/// One color per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColorConfig {
    domain: RectDomain,
    sites: Vec<Color>,
}

impl ColorConfig {
    pub fn filled(domain: RectDomain, c: Color) -> Self {
        ColorConfig {
            domain,
            sites: vec![c; domain.site_count()],
        }
    }

    pub fn from_fn(domain: RectDomain, mut f: impl FnMut(SiteCoord) -> Color) -> Self {
        let sites = domain.sites().map(&mut f).collect();
        ColorConfig { domain, sites }
    }

    /// Eagerly samples every site, red with probability `p`.
    pub fn sample(domain: RectDomain, key: SamplerKey, p: f64) -> Self {
        Self::from_fn(domain, |s| sample_color(key, p, s))
    }

    pub fn domain(&self) -> RectDomain {
        self.domain
    }

    #[inline]
    pub fn get(&self, s: SiteCoord) -> Color {
        self.sites[self.domain.site_index(s)]
    }

    #[inline]
    pub fn get_index(&self, index: usize) -> Color {
        self.sites[index]
    }

    #[inline]
    pub fn set(&mut self, s: SiteCoord, c: Color) {
        let i = self.domain.site_index(s);
        self.sites[i] = c;
    }

    #[inline]
    pub fn set_index(&mut self, index: usize, c: Color) {
        self.sites[index] = c;
    }

    pub fn flip(&mut self, s: SiteCoord) {
        let i = self.domain.site_index(s);
        self.sites[i] = self.sites[i].swap();
    }

    pub fn red_count(&self) -> usize {
        self.sites.iter().filter(|&&c| c == Color::Red).count()
    }

    pub fn as_slice(&self) -> &[Color] {
        &self.sites
    }

    /// Type of cell `c` under this coloring.
    pub fn cell_type(&self, c: CellCoord) -> CellType {
        classify_cell(self.get(c.nw()), self.get(c.ne()), self.get(c.sw()), self.get(c.se()))
    }
}

/// Checks that both configurations live on `d`.
pub(crate) fn check_dims(omega: &DiagonalConfig, sigma: &ColorConfig, d: &RectDomain) -> Result<()> {
    if omega.domain() != *d || sigma.domain() != *d {
        return Err(Error::domain(format!(
            "configuration dimensions (diagonals {}, colors {}) do not match domain {d}",
            omega.domain(),
            sigma.domain()
        )));
    }
    Ok(())
}

/// Neighbors of `s` in the triangulation restricted to `d`: the orthogonal neighbors,
/// plus the far corner of every incident cell whose diagonal touches `s`.
pub fn neighbors(s: SiteCoord, d: &RectDomain, omega: &DiagonalConfig) -> Result<Vec<SiteCoord>> {
    d.check_site(s)?;
    if omega.domain() != *d {
        return Err(Error::domain(format!(
            "diagonal configuration {} does not match domain {d}",
            omega.domain()
        )));
    }
    let mut out = Vec::with_capacity(6);
    for_each_neighbor(s, d, omega, |t| out.push(t));
    Ok(out)
}

/// Unchecked neighbor iteration used on hot paths.
#[inline]
pub(crate) fn for_each_neighbor(
    s: SiteCoord,
    d: &RectDomain,
    omega: &DiagonalConfig,
    mut f: impl FnMut(SiteCoord),
) {
    let (w, h) = (d.cells_w(), d.cells_h());
    let (x, y) = (s.x, s.y);
    if x > 0 {
        f(SiteCoord::new(x - 1, y));
    }
    if x < w {
        f(SiteCoord::new(x + 1, y));
    }
    if y > 0 {
        f(SiteCoord::new(x, y - 1));
    }
    if y < h {
        f(SiteCoord::new(x, y + 1));
    }
    // s as SW corner of cell (x, y)
    if x < w && y < h && omega.get(CellCoord::new(x, y)) == Orientation::NeSw {
        f(SiteCoord::new(x + 1, y + 1));
    }
    // s as SE corner of cell (x-1, y)
    if x > 0 && y < h && omega.get(CellCoord::new(x - 1, y)) == Orientation::NwSe {
        f(SiteCoord::new(x - 1, y + 1));
    }
    // s as NW corner of cell (x, y-1)
    if x < w && y > 0 && omega.get(CellCoord::new(x, y - 1)) == Orientation::NwSe {
        f(SiteCoord::new(x + 1, y - 1));
    }
    // s as NE corner of cell (x-1, y-1)
    if x > 0 && y > 0 && omega.get(CellCoord::new(x - 1, y - 1)) == Orientation::NeSw {
        f(SiteCoord::new(x - 1, y - 1));
    }
}
