//! Stateless counter-based sampling.
//!
//! Every random quantity is a hash of `(seed, replicate, stream, x, y)`, so a site or
//! cell can be sampled on demand in any order and always gets the same value as a
//! full eager sample under the same key.

use serde::{Deserialize, Serialize};

use super::{CellCoord, Color, Orientation, SiteCoord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SamplerKey {
    pub seed: u64,
    pub replicate: u64,
}

impl SamplerKey {
    pub const fn new(seed: u64, replicate: u64) -> Self {
        SamplerKey { seed, replicate }
    }
}

const COLOR_STREAM: u64 = 0x63_6f6c_6f72; // "color"
const DIAG_STREAM: u64 = 0x6469_6167; // "diag"

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of a word sequence; each word is absorbed through a full avalanche round.
#[inline]
pub(crate) fn hash_words(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |h, &w| splitmix(h ^ splitmix(w)))
}

#[inline]
fn to_unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform variate in `[0, 1)` attached to a site. A site is red iff this is `< p`,
/// so for a fixed key colorings are monotone in `p`.
#[inline]
pub fn site_uniform(key: SamplerKey, s: SiteCoord) -> f64 {
    to_unit(hash_words(&[
        key.seed,
        key.replicate,
        COLOR_STREAM,
        s.x as u64,
        s.y as u64,
    ]))
}

#[inline]
pub fn sample_color(key: SamplerKey, p: f64, s: SiteCoord) -> Color {
    if site_uniform(key, s) < p {
        Color::Red
    } else {
        Color::Blue
    }
}

#[inline]
pub fn sample_diagonal(key: SamplerKey, c: CellCoord) -> Orientation {
    let bits = hash_words(&[key.seed, key.replicate, DIAG_STREAM, c.x as u64, c.y as u64]);
    if bits >> 63 == 0 {
        Orientation::NwSe
    } else {
        Orientation::NeSw
    }
}

/// Derives an unrelated seed from a parent seed and a label.
pub fn derive_seed(seed: u64, label: &[u64]) -> u64 {
    let mut words = Vec::with_capacity(label.len() + 2);
    words.push(0x6465_7269_7665); // "derive"
    words.push(seed);
    words.extend_from_slice(label);
    hash_words(&words)
}
