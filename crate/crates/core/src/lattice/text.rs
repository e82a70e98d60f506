//! Plain-text configuration dumps.
//!
//! Site rows first, top row (`y = cells_h`) first, one `R`/`B` per site; then cell
//! rows, top row first, one `\` (NW–SE) or `/` (NE–SW) per cell. LF line endings.

use super::{CellCoord, Color, ColorConfig, DiagonalConfig, Orientation, RectDomain, SiteCoord};
use crate::error::{Error, Result};

pub fn to_text(omega: &DiagonalConfig, sigma: &ColorConfig) -> String {
    let d = sigma.domain();
    let mut out = String::with_capacity(2 * d.site_count() + 2 * d.sites_h());
    for y in (0..d.sites_h()).rev() {
        out.extend((0..d.sites_w()).map(|x| sigma.get(SiteCoord::new(x, y)).glyph()));
        out.push('\n');
    }
    for y in (0..d.cells_h()).rev() {
        out.extend((0..d.cells_w()).map(|x| omega.get(CellCoord::new(x, y)).glyph()));
        out.push('\n');
    }
    out
}

pub fn parse_text(text: &str) -> Result<(DiagonalConfig, ColorConfig)> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() < 3 || lines.len().is_multiple_of(2) {
        return Err(Error::Parse(format!(
            "expected 2h+1 non-empty lines for a domain of height h, got {}",
            lines.len()
        )));
    }
    let cells_h = (lines.len() - 1) / 2;
    let sites_w = lines[0].chars().count();
    if sites_w < 2 {
        return Err(Error::Parse("site rows need at least two sites".into()));
    }
    let d = RectDomain::new(sites_w - 1, cells_h)?;

    let mut sigma = ColorConfig::filled(d, Color::Blue);
    for (row, line) in lines[..d.sites_h()].iter().enumerate() {
        let y = d.cells_h() - row;
        let chars: Vec<char> = line.chars().collect();
        if chars.len() != d.sites_w() {
            return Err(Error::Parse(format!("site row {row} has {} entries", chars.len())));
        }
        for (x, ch) in chars.into_iter().enumerate() {
            let c = match ch {
                'R' => Color::Red,
                'B' => Color::Blue,
                other => return Err(Error::Parse(format!("bad site glyph {other:?}"))),
            };
            sigma.set(SiteCoord::new(x, y), c);
        }
    }

    let mut omega = DiagonalConfig::filled(d, Orientation::NwSe);
    for (row, line) in lines[d.sites_h()..].iter().enumerate() {
        let y = d.cells_h() - 1 - row;
        let chars: Vec<char> = line.chars().collect();
        if chars.len() != d.cells_w() {
            return Err(Error::Parse(format!("cell row {row} has {} entries", chars.len())));
        }
        for (x, ch) in chars.into_iter().enumerate() {
            let o = match ch {
                '\\' => Orientation::NwSe,
                '/' => Orientation::NeSw,
                other => return Err(Error::Parse(format!("bad cell glyph {other:?}"))),
            };
            omega.set(CellCoord::new(x, y), o);
        }
    }
    Ok((omega, sigma))
}
