//! Exhaustive enumeration over every (diagonals, colors) pair of a tiny domain.
//!
//! An event is first tabulated into a truth table indexed by the diagonal bits
//! (cell `j` is NE–SW iff bit `j` is set) and the color bits (site `i` is red iff bit
//! `i` is set). Probabilities, monotonicity, robustness and pivotal counts are then
//! read off the table. Probabilities are polynomials in `p` with integer
//! coefficients, so everything is exact at rational `p`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::EventSpec;
use crate::lattice::{
    classify_cell, CellCoord, CellType, Color, ColorConfig, DiagonalConfig, Orientation,
    RectDomain, SiteCoord,
};
use crate::par;

/// Largest `#cells + #sites` the oracle will enumerate.
pub const BUDGET_BITS: u32 = 26;

pub fn check_budget(d: &RectDomain) -> Result<()> {
    let required = (d.cell_count() + d.site_count()) as u32;
    if required > BUDGET_BITS {
        Err(Error::Budget {
            required,
            budget: BUDGET_BITS,
        })
    } else {
        Ok(())
    }
}

fn diagonals_from_bits(d: RectDomain, wm: u64) -> DiagonalConfig {
    DiagonalConfig::from_fn(d, |c| {
        if wm >> d.cell_index(c) & 1 == 1 {
            Orientation::NeSw
        } else {
            Orientation::NwSe
        }
    })
}

fn colors_from_bits(d: RectDomain, sm: u64) -> ColorConfig {
    ColorConfig::from_fn(d, |s| {
        if sm >> d.site_index(s) & 1 == 1 {
            Color::Red
        } else {
            Color::Blue
        }
    })
}

/// Site indices of the (nw, ne, sw, se) corners of every cell.
fn corner_indices(d: RectDomain) -> Vec<[usize; 4]> {
    d.cells()
        .map(|c| {
            [
                d.site_index(c.nw()),
                d.site_index(c.ne()),
                d.site_index(c.sw()),
                d.site_index(c.se()),
            ]
        })
        .collect()
}

fn cell_type_bits(corners: &[usize; 4], sm: u64) -> CellType {
    let col = |i: usize| {
        if sm >> i & 1 == 1 {
            Color::Red
        } else {
            Color::Blue
        }
    };
    classify_cell(col(corners[0]), col(corners[1]), col(corners[2]), col(corners[3]))
}

/// Indicator of an event on every configuration of its domain.
#[derive(Debug, Clone)]
pub struct TruthTable {
    domain: RectDomain,
    sites: u32,
    cells: u32,
    words_per_omega: usize,
    bits: Vec<u64>,
}

impl TruthTable {
    pub fn build(e: &EventSpec) -> Result<Self> {
        let d = e.domain();
        check_budget(&d)?;
        let sites = d.site_count() as u32;
        let cells = d.cell_count() as u32;
        let words_per_omega = (1usize << sites).div_ceil(64);
        let per_omega = par::map_indices(1 << cells, |wm| -> Result<Vec<u64>> {
            let omega = diagonals_from_bits(d, wm);
            let mut sigma = ColorConfig::filled(d, Color::Blue);
            let mut words = vec![0u64; words_per_omega];
            let mut prev = 0u64;
            for sm in 0..1u64 << sites {
                let mut diff = sm ^ prev;
                while diff != 0 {
                    let i = diff.trailing_zeros() as usize;
                    let c = if sm >> i & 1 == 1 { Color::Red } else { Color::Blue };
                    sigma.set_index(i, c);
                    diff &= diff - 1;
                }
                prev = sm;
                if e.evaluate(&omega, &sigma)? {
                    words[(sm / 64) as usize] |= 1 << (sm % 64);
                }
            }
            Ok(words)
        });
        let mut bits = Vec::with_capacity(words_per_omega << cells);
        for w in per_omega {
            bits.extend(w?);
        }
        Ok(TruthTable {
            domain: d,
            sites,
            cells,
            words_per_omega,
            bits,
        })
    }

    pub fn domain(&self) -> RectDomain {
        self.domain
    }

    #[inline]
    pub fn get(&self, wm: u64, sm: u64) -> bool {
        let word = self.bits[wm as usize * self.words_per_omega + (sm / 64) as usize];
        word >> (sm % 64) & 1 == 1
    }

    fn omegas(&self) -> u64 {
        1 << self.cells
    }

    fn sigmas(&self) -> u64 {
        1 << self.sites
    }

    /// Table of `a ∘ b` for a pointwise boolean `op`.
    fn combine(&self, other: &TruthTable, op: impl Fn(u64, u64) -> u64) -> Result<TruthTable> {
        if self.domain != other.domain {
            return Err(Error::domain(format!(
                "events live on different domains ({} vs {})",
                self.domain, other.domain
            )));
        }
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect();
        Ok(TruthTable {
            bits,
            ..self.clone()
        })
    }

    /// Per red-count sums of `weight(wm, sm)` over all configurations.
    fn sum_by_red<F>(&self, weight: F) -> Vec<u64>
    where
        F: Fn(u64, u64) -> u64 + Sync + Send,
    {
        let s = self.sites as usize;
        let parts = par::map_indices(self.omegas(), |wm| {
            let mut acc = vec![0u64; s + 1];
            for sm in 0..self.sigmas() {
                acc[sm.count_ones() as usize] += weight(wm, sm);
            }
            acc
        });
        parts.into_iter().fold(vec![0u64; s + 1], |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        })
    }

    pub fn polynomial(&self) -> Polynomial {
        let satisfying = self.sum_by_red(|wm, sm| self.get(wm, sm) as u64);
        Polynomial::new(self.sites, self.cells, satisfying)
    }

    /// Number of sites whose color flip toggles the event, at one configuration.
    pub fn pivotal_count(&self, wm: u64, sm: u64) -> u64 {
        let here = self.get(wm, sm);
        (0..self.sites)
            .filter(|&i| self.get(wm, sm ^ (1 << i)) != here)
            .count() as u64
    }

    /// Per red-count sums of the number of pivotal sites.
    pub fn pivotal_polynomial(&self) -> Polynomial {
        let counts = self.sum_by_red(|wm, sm| self.pivotal_count(wm, sm));
        Polynomial::new(self.sites, self.cells, counts)
    }

    fn witness(&self, wm: u64, sm: u64, at: WitnessLocation) -> Witness {
        Witness {
            omega: diagonals_from_bits(self.domain, wm),
            sigma: colors_from_bits(self.domain, sm),
            at,
        }
    }

    /// First configuration (in enumeration order) where flipping site `i` from blue to
    /// red moves the indicator in the wrong direction.
    fn color_violation(&self, increasing: bool) -> Option<Witness> {
        par::find_first(self.omegas(), |wm| {
            for sm in 0..self.sigmas() {
                for i in 0..self.sites {
                    if sm >> i & 1 == 1 {
                        continue;
                    }
                    let (lo, hi) = (self.get(wm, sm), self.get(wm, sm | 1 << i));
                    let bad = if increasing { lo && !hi } else { hi && !lo };
                    if bad {
                        let s = self.domain.site_at(i as usize);
                        return Some(self.witness(wm, sm, WitnessLocation::Site(s)));
                    }
                }
            }
            None
        })
    }

    fn robustness_violation(&self) -> Option<Witness> {
        let corners = corner_indices(self.domain);
        par::find_first(self.omegas(), |wm| {
            for sm in 0..self.sigmas() {
                for (j, cn) in corners.iter().enumerate() {
                    if cell_type_bits(cn, sm) == CellType::N
                        && self.get(wm, sm) != self.get(wm ^ 1 << j, sm)
                    {
                        let c = self.domain.cell_at(j);
                        return Some(self.witness(wm, sm, WitnessLocation::Cell(c)));
                    }
                }
            }
            None
        })
    }

    /// Flipping an A cell to NE–SW or a B cell to NW–SE must not destroy the event.
    fn diagonal_violation(&self) -> Option<Witness> {
        let corners = corner_indices(self.domain);
        par::find_first(self.omegas(), |wm| {
            for sm in 0..self.sigmas() {
                if !self.get(wm, sm) {
                    continue;
                }
                for (j, cn) in corners.iter().enumerate() {
                    let nesw = wm >> j & 1 == 1;
                    let up = match cell_type_bits(cn, sm) {
                        CellType::A if !nesw => wm | 1 << j,
                        CellType::B if nesw => wm & !(1 << j),
                        _ => continue,
                    };
                    if !self.get(up, sm) {
                        let c = self.domain.cell_at(j);
                        return Some(self.witness(wm, sm, WitnessLocation::Cell(c)));
                    }
                }
            }
            None
        })
    }
}

/// `P(p) = 2^-cells · Σ_r counts[r] · p^r (1-p)^(sites-r)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polynomial {
    pub sites: u32,
    pub cells: u32,
    /// Indexed by number of red sites.
    pub counts: Vec<u64>,
}

impl Polynomial {
    fn new(sites: u32, cells: u32, counts: Vec<u64>) -> Self {
        Polynomial {
            sites,
            cells,
            counts,
        }
    }

    /// Number of configurations (all diagonals, all colorings) with `r` red sites.
    pub fn configurations_with_red(&self, r: u32) -> u64 {
        binomial(self.sites, r) << self.cells
    }

    fn scale(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << self.cells)
    }

    pub fn eval(&self, p: &BigRational) -> BigRational {
        let q = BigRational::one() - p;
        let total = self.counts.iter().enumerate().fold(BigRational::zero(), |acc, (r, &n)| {
            let r = r as i32;
            acc + BigRational::from_integer(BigInt::from(n)) * p.pow(r) * q.pow(self.sites as i32 - r)
        });
        total * self.scale()
    }

    pub fn eval_f64(&self, p: f64) -> f64 {
        let q = 1.0 - p;
        let total: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(r, &n)| n as f64 * p.powi(r as i32) * q.powi(self.sites as i32 - r as i32))
            .sum();
        total / (1u64 << self.cells) as f64
    }

    /// `d/dp` of [`Polynomial::eval`].
    pub fn derivative(&self, p: &BigRational) -> BigRational {
        let q = BigRational::one() - p;
        let s = self.sites as i32;
        let total = self.counts.iter().enumerate().fold(BigRational::zero(), |acc, (r, &n)| {
            let r = r as i32;
            let n = BigRational::from_integer(BigInt::from(n));
            let mut term = BigRational::zero();
            if r > 0 {
                term += BigRational::from_integer(r.into()) * p.pow(r - 1) * q.pow(s - r);
            }
            if r < s {
                term -= BigRational::from_integer((s - r).into()) * p.pow(r) * q.pow(s - r - 1);
            }
            acc + n * term
        });
        total * self.scale()
    }
}

fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    (0..k.min(n - k) as u64).fold(1u64, |acc, i| acc * (n as u64 - i) / (i + 1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub p: BigRational,
    pub probability: BigRational,
    pub polynomial: Polynomial,
}

impl ExactResult {
    pub fn probability_f64(&self) -> f64 {
        self.probability.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact annealed probability of `e` at rational `p`.
pub fn enumerate_prob(e: &EventSpec, p: &BigRational) -> Result<ExactResult> {
    check_probability(p)?;
    let polynomial = TruthTable::build(e)?.polynomial();
    Ok(ExactResult {
        p: p.clone(),
        probability: polynomial.eval(p),
        polynomial,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessLocation {
    Site(SiteCoord),
    Cell(CellCoord),
}

/// A configuration together with the site or cell whose flip breaks a property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub omega: DiagonalConfig,
    pub sigma: ColorConfig,
    pub at: WitnessLocation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobustnessVerdict {
    pub robust: bool,
    pub witness: Option<Witness>,
}

/// Does flipping the diagonal of any type-N cell leave `e` unchanged everywhere?
pub fn verify_robust(e: &EventSpec) -> Result<RobustnessVerdict> {
    Ok(robustness_of(&TruthTable::build(e)?))
}

fn robustness_of(t: &TruthTable) -> RobustnessVerdict {
    let witness = t.robustness_violation();
    RobustnessVerdict {
        robust: witness.is_none(),
        witness,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicityVerdict {
    pub increasing_in_colors: bool,
    pub color_witness: Option<Witness>,
    pub robust: bool,
    /// `None` when the event is not robust and the diagonal order is meaningless.
    pub increasing_in_diagonals: Option<bool>,
    pub diagonal_witness: Option<Witness>,
}

impl MonotonicityVerdict {
    /// Robust and increasing in both colors and diagonals.
    pub fn holds(&self) -> bool {
        self.increasing_in_colors && self.increasing_in_diagonals == Some(true)
    }
}

pub fn verify_increasing(e: &EventSpec) -> Result<MonotonicityVerdict> {
    Ok(monotonicity_of(&TruthTable::build(e)?))
}

fn monotonicity_of(t: &TruthTable) -> MonotonicityVerdict {
    let color_witness = t.color_violation(true);
    let robust = t.robustness_violation().is_none();
    let (increasing_in_diagonals, diagonal_witness) = if robust {
        let w = t.diagonal_violation();
        (Some(w.is_none()), w)
    } else {
        (None, None)
    };
    MonotonicityVerdict {
        increasing_in_colors: color_witness.is_none(),
        color_witness,
        robust,
        increasing_in_diagonals,
        diagonal_witness,
    }
}

fn check_probability(p: &BigRational) -> Result<()> {
    if p.is_negative() || *p > BigRational::one() {
        return Err(Error::domain(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// `P(e1 ∩ e2) − P(e1)·P(e2)`, refusing unless both events are robust and increasing.
pub fn verify_fkg(e1: &EventSpec, e2: &EventSpec, p: &BigRational) -> Result<BigRational> {
    check_probability(p)?;
    let (t1, t2) = (TruthTable::build(e1)?, TruthTable::build(e2)?);
    for (name, e, t) in [("first", e1, &t1), ("second", e2, &t2)] {
        let v = monotonicity_of(t);
        if !v.robust {
            return Err(Error::Refused(format!(
                "{name} event {} is not robust{}",
                e.event(),
                describe(&robustness_of(t).witness)
            )));
        }
        if !v.increasing_in_colors {
            return Err(Error::Refused(format!(
                "{name} event {} is not increasing in the colors{}",
                e.event(),
                describe(&v.color_witness)
            )));
        }
        if v.increasing_in_diagonals != Some(true) {
            return Err(Error::Refused(format!(
                "{name} event {} is not increasing in the diagonals{}",
                e.event(),
                describe(&v.diagonal_witness)
            )));
        }
    }
    margin_of(&t1, &t2, p)
}

/// The FKG margin without checking any hypothesis.
pub fn fkg_margin_unchecked(e1: &EventSpec, e2: &EventSpec, p: &BigRational) -> Result<BigRational> {
    check_probability(p)?;
    margin_of(&TruthTable::build(e1)?, &TruthTable::build(e2)?, p)
}

fn margin_of(t1: &TruthTable, t2: &TruthTable, p: &BigRational) -> Result<BigRational> {
    let joint = t1.combine(t2, |a, b| a & b)?;
    Ok(joint.polynomial().eval(p) - t1.polynomial().eval(p) * t2.polynomial().eval(p))
}

fn describe(w: &Option<Witness>) -> String {
    match w {
        Some(Witness {
            at: WitnessLocation::Cell(c),
            ..
        }) => format!(" (flip at cell {c})"),
        Some(Witness {
            at: WitnessLocation::Site(s),
            ..
        }) => format!(" (flip at site {s})"),
        None => String::new(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColorMonotonicity {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RussoResult {
    pub derivative: BigRational,
    pub pivotal_expectation: BigRational,
    pub monotonicity: ColorMonotonicity,
}

impl RussoResult {
    /// `derivative = +E` (increasing) or `−E` (decreasing), exactly.
    pub fn identity_holds(&self) -> bool {
        match self.monotonicity {
            ColorMonotonicity::Increasing => self.derivative == self.pivotal_expectation,
            ColorMonotonicity::Decreasing => self.derivative == -self.pivotal_expectation.clone(),
        }
    }
}

/// Exact derivative of `P_p(e)` and exact expected number of pivotal sites.
pub fn russo_exact(e: &EventSpec, p: &BigRational) -> Result<RussoResult> {
    check_probability(p)?;
    let t = TruthTable::build(e)?;
    let monotonicity = if t.color_violation(true).is_none() {
        ColorMonotonicity::Increasing
    } else if t.color_violation(false).is_none() {
        ColorMonotonicity::Decreasing
    } else {
        return Err(Error::Refused(format!(
            "event {} is neither increasing nor decreasing in the colors",
            e.event()
        )));
    };
    Ok(RussoResult {
        derivative: t.polynomial().derivative(p),
        pivotal_expectation: t.pivotal_polynomial().eval(p),
        monotonicity,
    })
}

/// Parses `a/b`, an integer, or a finite decimal such as `0.25` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(digits, den));
    }
    Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?))
}

/// `num/den` in lowest terms.
pub fn format_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
