//! Events: finitely supported predicates on a (diagonals, colors) pair over a domain.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::connectivity::{connected_within, has_circuit, has_crossing, Annulus, Axis};
use crate::error::{Error, Result};
use crate::lattice::{
    check_dims, CellCoord, Color, ColorConfig, DiagonalConfig, RectDomain, SiteCoord,
};

/// Axis-aligned block of cells inside a domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubRect {
    pub x0: usize,
    pub y0: usize,
    pub cells_w: usize,
    pub cells_h: usize,
}

impl SubRect {
    pub fn cells(&self) -> Vec<CellCoord> {
        (self.y0..self.y0 + self.cells_h)
            .flat_map(|y| (self.x0..self.x0 + self.cells_w).map(move |x| CellCoord::new(x, y)))
            .collect()
    }

    fn arc(&self, side: crate::lattice::Arc) -> Vec<SiteCoord> {
        use crate::lattice::Arc;
        let (x1, y1) = (self.x0 + self.cells_w, self.y0 + self.cells_h);
        match side {
            Arc::Left => (self.y0..=y1).map(|y| SiteCoord::new(self.x0, y)).collect(),
            Arc::Right => (self.y0..=y1).map(|y| SiteCoord::new(x1, y)).collect(),
            Arc::Bottom => (self.x0..=x1).map(|x| SiteCoord::new(x, self.y0)).collect(),
            Arc::Top => (self.x0..=x1).map(|x| SiteCoord::new(x, y1)).collect(),
        }
    }

    fn fits(&self, d: &RectDomain) -> bool {
        self.cells_w > 0
            && self.cells_h > 0
            && self.x0 + self.cells_w <= d.cells_w()
            && self.y0 + self.cells_h <= d.cells_h()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Event {
    Always,
    /// `color` path joining the two arcs of `axis`, of the whole domain or of `within`.
    Crossing {
        color: Color,
        axis: Axis,
        within: Option<SubRect>,
    },
    Circuit {
        color: Color,
        annulus: Annulus,
    },
    /// Some site of `from` joined to some site of `to` by a `color` path through the
    /// closed cells `cells` (the whole domain when `None`).
    Connection {
        from: Vec<SiteCoord>,
        to: Vec<SiteCoord>,
        color: Color,
        cells: Option<Vec<CellCoord>>,
    },
    /// Every listed site has `color` and consecutive sites are adjacent.
    FixedPath {
        sites: Vec<SiteCoord>,
        color: Color,
    },
    Not(Box<Event>),
    And(Box<Event>, Box<Event>),
    Or(Box<Event>, Box<Event>),
}

impl Event {
    pub fn not(self) -> Event {
        Event::Not(Box::new(self))
    }

    pub fn and(self, other: Event) -> Event {
        Event::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Event) -> Event {
        Event::Or(Box::new(self), Box::new(other))
    }

    fn validate(&self, d: &RectDomain) -> Result<()> {
        match self {
            Event::Always => Ok(()),
            Event::Crossing { within, .. } => match within {
                Some(r) if !r.fits(d) => Err(Error::domain(format!("sub-rectangle {r:?} not inside {d}"))),
                _ => Ok(()),
            },
            Event::Circuit { annulus, .. } => annulus.check_fits(d),
            Event::Connection { from, to, cells, .. } => {
                for &s in from.iter().chain(to) {
                    d.check_site(s)?;
                }
                for &c in cells.iter().flatten() {
                    d.check_cell(c)?;
                }
                Ok(())
            }
            Event::FixedPath { sites, .. } => {
                if sites.is_empty() {
                    return Err(Error::domain("fixed path needs at least one site"));
                }
                for &s in sites {
                    d.check_site(s)?;
                }
                Ok(())
            }
            Event::Not(e) => e.validate(d),
            Event::And(a, b) | Event::Or(a, b) => {
                a.validate(d)?;
                b.validate(d)
            }
        }
    }

    fn holds(&self, omega: &DiagonalConfig, sigma: &ColorConfig, d: &RectDomain) -> Result<bool> {
        Ok(match self {
            Event::Always => true,
            Event::Crossing {
                color,
                axis,
                within: None,
            } => has_crossing(omega, sigma, d, *color, *axis)?,
            Event::Crossing {
                color,
                axis,
                within: Some(r),
            } => {
                let (a, b) = axis.arcs();
                connected_within(omega, sigma, d, &r.arc(a), &r.arc(b), *color, Some(&r.cells()))?
            }
            Event::Circuit { color, annulus } => has_circuit(omega, sigma, d, annulus, *color)?,
            Event::Connection {
                from,
                to,
                color,
                cells,
            } => connected_within(omega, sigma, d, from, to, *color, cells.as_deref())?,
            Event::FixedPath { sites, color } => fixed_path_holds(omega, sigma, sites, *color),
            Event::Not(e) => !e.holds(omega, sigma, d)?,
            Event::And(a, b) => a.holds(omega, sigma, d)? && b.holds(omega, sigma, d)?,
            Event::Or(a, b) => a.holds(omega, sigma, d)? || b.holds(omega, sigma, d)?,
        })
    }
}

fn adjacent(omega: &DiagonalConfig, a: SiteCoord, b: SiteCoord) -> bool {
    let (dx, dy) = (a.x.abs_diff(b.x), a.y.abs_diff(b.y));
    match (dx, dy) {
        (0, 1) | (1, 0) => true,
        (1, 1) => {
            let cell = CellCoord::new(a.x.min(b.x), a.y.min(b.y));
            let (d1, d2) = cell.diagonal(omega.get(cell));
            (d1 == a && d2 == b) || (d1 == b && d2 == a)
        }
        _ => false,
    }
}

fn fixed_path_holds(omega: &DiagonalConfig, sigma: &ColorConfig, sites: &[SiteCoord], color: Color) -> bool {
    sites.iter().all(|&s| sigma.get(s) == color)
        && sites.windows(2).all(|w| adjacent(omega, w[0], w[1]))
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sites = |v: &[SiteCoord]| {
            v.iter()
                .map(|s| format!("{},{}", s.x, s.y))
                .collect::<Vec<_>>()
                .join("/")
        };
        let axis = |a: &Axis| match a {
            Axis::LeftRight => "lr",
            Axis::TopBottom => "tb",
        };
        match self {
            Event::Always => f.write_str("true"),
            Event::Crossing { color, axis: a, within } => {
                write!(f, "{color}-{}", axis(a))?;
                if let Some(r) = within {
                    write!(f, "@{},{},{},{}", r.x0, r.y0, r.cells_w, r.cells_h)?;
                }
                Ok(())
            }
            Event::Circuit { color, annulus } => write!(
                f,
                "circuit-{color}@{},{},{}",
                annulus.origin().x,
                annulus.origin().y,
                annulus.n()
            ),
            Event::Connection {
                from,
                to,
                color,
                cells,
            } => {
                write!(f, "connect-{color}:{}>{}", sites(from), sites(to))?;
                if let Some(cells) = cells {
                    let c: Vec<_> = cells.iter().map(|c| format!("{},{}", c.x, c.y)).collect();
                    write!(f, "@{}", c.join("/"))?;
                }
                Ok(())
            }
            Event::FixedPath { sites: s, color } => write!(f, "path-{color}:{}", sites(s)),
            Event::Not(e) => write!(f, "!({e})"),
            Event::And(a, b) => write!(f, "({a} & {b})"),
            Event::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

/// An event bound to the domain it is evaluated on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSpec {
    domain: RectDomain,
    event: Event,
}

impl EventSpec {
    pub fn new(domain: RectDomain, event: Event) -> Result<Self> {
        event.validate(&domain)?;
        Ok(EventSpec { domain, event })
    }

    pub fn always(domain: RectDomain) -> Self {
        EventSpec {
            domain,
            event: Event::Always,
        }
    }

    pub fn crossing(domain: RectDomain, color: Color, axis: Axis) -> Self {
        EventSpec {
            domain,
            event: Event::Crossing {
                color,
                axis,
                within: None,
            },
        }
    }

    pub fn domain(&self) -> RectDomain {
        self.domain
    }

    pub fn event(&self) -> &Event {
        &self.event
    }

    pub fn complement(&self) -> EventSpec {
        EventSpec {
            domain: self.domain,
            event: self.event.clone().not(),
        }
    }

    /// `Some((color, axis))` for a crossing of the whole domain.
    pub fn as_full_crossing(&self) -> Option<(Color, Axis)> {
        match self.event {
            Event::Crossing {
                color,
                axis,
                within: None,
            } => Some((color, axis)),
            _ => None,
        }
    }

    pub fn evaluate(&self, omega: &DiagonalConfig, sigma: &ColorConfig) -> Result<bool> {
        check_dims(omega, sigma, &self.domain)?;
        self.event.holds(omega, sigma, &self.domain)
    }

    /// Parses the textual event syntax used on the command line:
    ///
    /// ```text
    /// expr   := term ('|' term)*
    /// term   := factor ('&' factor)*
    /// factor := '!' factor | '(' expr ')' | atom
    /// atom   := 'true'
    ///         | COLOR '-' ('lr' | 'tb') ['@' x0,y0,w,h]
    ///         | 'circuit-' COLOR ['@' x0,y0,n]
    ///         | 'connect-' COLOR ':' SITES '>' SITES ['@' CELLS]
    ///         | 'path-' COLOR ':' SITES
    /// SITES  := x,y ('/' x,y)*
    /// ```
    ///
    /// A circuit without an explicit placement uses the largest `n` with `6n` fitting
    /// the domain, anchored at the origin.
    pub fn parse(domain: RectDomain, text: &str) -> Result<Self> {
        let tokens: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut parser = Parser {
            s: tokens.as_bytes(),
            pos: 0,
            domain,
        };
        let event = parser.expr()?;
        if parser.pos != parser.s.len() {
            return Err(Error::Parse(format!(
                "unexpected trailing input at byte {} of {text:?}",
                parser.pos
            )));
        }
        Self::new(domain, event)
    }
}

impl fmt::Display for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {}", self.event, self.domain)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    domain: RectDomain,
}

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{}' at byte {}", b as char, self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Event> {
        let mut e = self.term()?;
        while self.eat(b'|') {
            e = e.or(self.term()?);
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Event> {
        let mut e = self.factor()?;
        while self.eat(b'&') {
            e = e.and(self.factor()?);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Event> {
        if self.eat(b'!') {
            return Ok(self.factor()?.not());
        }
        if self.eat(b'(') {
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        self.atom()
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<usize> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("expected a number at byte {start}")))
    }

    fn numbers(&mut self, count: usize) -> Result<Vec<usize>> {
        let mut out = vec![self.number()?];
        for _ in 1..count {
            self.expect(b',')?;
            out.push(self.number()?);
        }
        Ok(out)
    }

    fn pairs(&mut self) -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        loop {
            let v = self.numbers(2)?;
            out.push((v[0], v[1]));
            if !self.eat(b'/') {
                return Ok(out);
            }
        }
    }

    fn sites(&mut self) -> Result<Vec<SiteCoord>> {
        Ok(self.pairs()?.into_iter().map(|(x, y)| SiteCoord::new(x, y)).collect())
    }

    fn color(&mut self) -> Result<Color> {
        match self.word().as_str() {
            "red" => Ok(Color::Red),
            "blue" => Ok(Color::Blue),
            other => Err(Error::Parse(format!("unknown color {other:?}"))),
        }
    }

    fn atom(&mut self) -> Result<Event> {
        let head = self.word();
        match head.as_str() {
            "true" => Ok(Event::Always),
            "red" | "blue" => {
                let color = if head == "red" { Color::Red } else { Color::Blue };
                self.expect(b'-')?;
                let axis = match self.word().as_str() {
                    "lr" => Axis::LeftRight,
                    "tb" => Axis::TopBottom,
                    other => return Err(Error::Parse(format!("unknown axis {other:?}"))),
                };
                let within = if self.eat(b'@') {
                    let v = self.numbers(4)?;
                    Some(SubRect {
                        x0: v[0],
                        y0: v[1],
                        cells_w: v[2],
                        cells_h: v[3],
                    })
                } else {
                    None
                };
                Ok(Event::Crossing { color, axis, within })
            }
            "circuit" => {
                self.expect(b'-')?;
                let color = self.color()?;
                let annulus = if self.eat(b'@') {
                    let v = self.numbers(3)?;
                    Annulus::new(v[2], SiteCoord::new(v[0], v[1]))?
                } else {
                    let n = self.domain.cells_w().min(self.domain.cells_h()) / 6;
                    Annulus::centered(n)?
                };
                Ok(Event::Circuit { color, annulus })
            }
            "connect" => {
                self.expect(b'-')?;
                let color = self.color()?;
                self.expect(b':')?;
                let from = self.sites()?;
                self.expect(b'>')?;
                let to = self.sites()?;
                let cells = if self.eat(b'@') {
                    Some(
                        self.pairs()?
                            .into_iter()
                            .map(|(x, y)| CellCoord::new(x, y))
                            .collect(),
                    )
                } else {
                    None
                };
                Ok(Event::Connection {
                    from,
                    to,
                    color,
                    cells,
                })
            }
            "path" => {
                self.expect(b'-')?;
                let color = self.color()?;
                self.expect(b':')?;
                Ok(Event::FixedPath {
                    sites: self.sites()?,
                    color,
                })
            }
            other => Err(Error::Parse(format!("unknown event {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Orientation, SamplerKey};

    fn dom(w: usize, h: usize) -> RectDomain {
        RectDomain::new(w, h).unwrap()
    }

    #[test]
    fn parse_display_round_trip() {
        let d = dom(6, 6);
        for text in [
            "true",
            "red-lr",
            "blue-tb@1,2,3,4",
            "circuit-red@0,0,1",
            "connect-red:0,0/1,0>6,6@0,0/1,1",
            "path-blue:0,3/1,2/2,1",
            "!(red-lr)",
            "(red-lr & red-tb)",
            "((red-lr & red-tb) | !(blue-lr))",
        ] {
            let e = EventSpec::parse(d, text).unwrap();
            let again = EventSpec::parse(d, &e.event().to_string()).unwrap();
            assert_eq!(e, again, "{text}");
        }
        assert_eq!(
            EventSpec::parse(d, "red-lr & red-tb | true").unwrap().event(),
            &Event::Crossing { color: Color::Red, axis: Axis::LeftRight, within: None }
                .and(Event::Crossing { color: Color::Red, axis: Axis::TopBottom, within: None })
                .or(Event::Always)
        );
    }

    #[test]
    fn parse_errors() {
        let d = dom(2, 2);
        for bad in ["", "green-lr", "red-xy", "red-lr &", "path-red:", "red-lr@0,0,3,1", "(red-lr", "red-lr)"] {
            assert!(EventSpec::parse(d, bad).is_err(), "{bad}");
        }
        assert!(matches!(
            EventSpec::parse(d, "connect-red:0,0>5,5"),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn subrect_crossing_matches_cropped_domain() {
        let big = dom(9, 5);
        let r = SubRect { x0: 2, y0: 1, cells_w: 5, cells_h: 3 };
        let small = dom(5, 3);
        for i in 0..300 {
            let key = SamplerKey::new(31, i);
            let omega = DiagonalConfig::sample(big, key);
            let sigma = ColorConfig::sample(big, key, 0.5);
            let om = DiagonalConfig::from_fn(small, |c| omega.get(CellCoord::new(c.x + 2, c.y + 1)));
            let sm = ColorConfig::from_fn(small, |s| sigma.get(SiteCoord::new(s.x + 2, s.y + 1)));
            for axis in [Axis::LeftRight, Axis::TopBottom] {
                let e = EventSpec::new(big, Event::Crossing { color: Color::Red, axis, within: Some(r) }).unwrap();
                assert_eq!(
                    e.evaluate(&omega, &sigma).unwrap(),
                    has_crossing(&om, &sm, &small, Color::Red, axis).unwrap()
                );
            }
        }
    }

    #[test]
    fn fixed_path_needs_its_diagonals() {
        let d = dom(3, 3);
        let path = EventSpec::parse(d, "path-red:0,3/1,2/2,1/3,0").unwrap();
        let red = ColorConfig::filled(d, Color::Red);
        let nwse = DiagonalConfig::filled(d, Orientation::NwSe);
        assert!(path.evaluate(&nwse, &red).unwrap());
        let mut omega = nwse.clone();
        omega.set(CellCoord::new(1, 1), Orientation::NeSw);
        assert!(!path.evaluate(&omega, &red).unwrap());
        let mut sigma = red.clone();
        sigma.set(SiteCoord::new(2, 1), Color::Blue);
        assert!(!path.evaluate(&nwse, &sigma).unwrap());
    }
}
