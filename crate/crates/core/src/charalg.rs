//! Half-integer theta characteristics as pairs of bit-vectors over F₂.
//!
//! A coordinate value `v ∈ {0, ½}` is stored as the bit `2v`. Coordinate 1 is
//! the most significant bit of each word, so the derived ordering on
//! `(genus, top, bottom)` is the lexicographic order of the bit-strings with
//! top bits more significant than bottom bits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest genus a [`Characteristic`] can hold.
pub const MAX_GENUS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn is_even(self) -> bool {
        self == Parity::Even
    }

    fn from_bit(bit: u32) -> Self {
        if bit & 1 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl std::ops::BitXor for Parity {
    type Output = Parity;

    fn bitxor(self, rhs: Parity) -> Parity {
        if self == rhs {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// A theta characteristic δ = (δ′, δ″) ∈ ½ℤ^{2g}/ℤ^{2g}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "CharacteristicRepr", into = "CharacteristicRepr")]
pub struct Characteristic {
    genus: usize,
    top: u32,
    bottom: u32,
}

impl Characteristic {
    /// Builds a characteristic from per-coordinate bits (`true` means ½).
    pub fn from_bits(top: &[bool], bottom: &[bool]) -> Result<Self> {
        if top.len() != bottom.len() {
            return Err(Error::InvalidCharacteristic(format!(
                "top has length {} but bottom has length {}",
                top.len(),
                bottom.len()
            )));
        }
        let genus = top.len();
        check_genus(genus)?;
        Ok(Characteristic {
            genus,
            top: pack(top),
            bottom: pack(bottom),
        })
    }

    pub fn zero(genus: usize) -> Result<Self> {
        check_genus(genus)?;
        Ok(Characteristic {
            genus,
            top: 0,
            bottom: 0,
        })
    }

    fn from_words(genus: usize, top: u32, bottom: u32) -> Self {
        debug_assert!(genus <= MAX_GENUS);
        let mask = word_mask(genus);
        Characteristic {
            genus,
            top: top & mask,
            bottom: bottom & mask,
        }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    /// Bit of δ′ at coordinate `i` (0-based).
    pub fn top_bit(&self, i: usize) -> bool {
        assert!(i < self.genus, "coordinate {i} out of range for genus {}", self.genus);
        (self.top >> (self.genus - 1 - i)) & 1 == 1
    }

    /// Bit of δ″ at coordinate `i` (0-based).
    pub fn bottom_bit(&self, i: usize) -> bool {
        assert!(i < self.genus, "coordinate {i} out of range for genus {}", self.genus);
        (self.bottom >> (self.genus - 1 - i)) & 1 == 1
    }

    /// δ′ as real numbers in {0, ½}.
    pub fn top_values(&self) -> Vec<f64> {
        (0..self.genus).map(|i| half(self.top_bit(i))).collect()
    }

    /// δ″ as real numbers in {0, ½}.
    pub fn bottom_values(&self) -> Vec<f64> {
        (0..self.genus).map(|i| half(self.bottom_bit(i))).collect()
    }

    pub fn top_string(&self) -> String {
        bit_string(self.genus, self.top)
    }

    pub fn bottom_string(&self) -> String {
        bit_string(self.genus, self.bottom)
    }

    /// Even iff δ′·δ″ = 0 in F₂.
    pub fn parity(&self) -> Parity {
        Parity::from_bit((self.top & self.bottom).count_ones())
    }

    pub fn is_even(&self) -> bool {
        self.parity().is_even()
    }

    /// The characteristic on the coordinates listed in `coords`, in that order.
    pub fn restrict(&self, coords: &[usize]) -> Result<Characteristic> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("empty coordinate list".into()));
        }
        if let Some(&bad) = coords.iter().find(|&&c| c >= self.genus) {
            return Err(Error::InvalidArgument(format!(
                "coordinate {bad} out of range for genus {}",
                self.genus
            )));
        }
        let top: Vec<bool> = coords.iter().map(|&c| self.top_bit(c)).collect();
        let bottom: Vec<bool> = coords.iter().map(|&c| self.bottom_bit(c)).collect();
        Characteristic::from_bits(&top, &bottom)
    }
}

fn half(bit: bool) -> f64 {
    if bit {
        0.5
    } else {
        0.0
    }
}

fn check_genus(genus: usize) -> Result<()> {
    if genus == 0 || genus > MAX_GENUS {
        return Err(Error::InvalidCharacteristic(format!(
            "genus must lie in 1..={MAX_GENUS}, got {genus}"
        )));
    }
    Ok(())
}

fn word_mask(genus: usize) -> u32 {
    if genus >= 32 {
        u32::MAX
    } else {
        (1u32 << genus) - 1
    }
}

fn pack(bits: &[bool]) -> u32 {
    bits.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b))
}

fn bit_string(genus: usize, word: u32) -> String {
    (0..genus)
        .map(|i| if (word >> (genus - 1 - i)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn parse_bits(field: &str, s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Schema {
                field: field.to_string(),
                message: format!("unexpected character {other:?} in bit-string {s:?}"),
            }),
        })
        .collect()
}

/// Canonical text form `g=3:[110|100]`.
impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "g={}:[{}|{}]",
            self.genus,
            self.top_string(),
            self.bottom_string()
        )
    }
}

/// Accepts `g=3:[110|100]` and the compact form `[110|100]`.
impl FromStr for Characteristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (declared, body) = match s.split_once(':') {
            Some((head, body)) => {
                let g = head
                    .strip_prefix("g=")
                    .and_then(|g| g.parse::<usize>().ok())
                    .ok_or_else(|| Error::InvalidCharacteristic(format!("bad genus prefix in {s:?}")))?;
                (Some(g), body)
            }
            None => (None, s),
        };
        let inner = body
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(|| Error::InvalidCharacteristic(format!("expected [top|bottom], got {s:?}")))?;
        let (top, bottom) = inner
            .split_once('|')
            .ok_or_else(|| Error::InvalidCharacteristic(format!("missing '|' in {s:?}")))?;
        let delta = Characteristic::from_bits(&parse_bits("top", top)?, &parse_bits("bottom", bottom)?)?;
        if let Some(g) = declared {
            if g != delta.genus {
                return Err(Error::GenusMismatch {
                    expected: g,
                    actual: delta.genus,
                });
            }
        }
        Ok(delta)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CharacteristicRepr {
    genus: usize,
    top: String,
    bottom: String,
}

impl TryFrom<CharacteristicRepr> for Characteristic {
    type Error = Error;

    fn try_from(repr: CharacteristicRepr) -> Result<Self> {
        for (field, bits) in [("top", &repr.top), ("bottom", &repr.bottom)] {
            if bits.len() != repr.genus {
                return Err(Error::Schema {
                    field: field.into(),
                    message: format!("expected {} bits, found {}", repr.genus, bits.len()),
                });
            }
        }
        Characteristic::from_bits(&parse_bits("top", &repr.top)?, &parse_bits("bottom", &repr.bottom)?)
    }
}

impl From<Characteristic> for CharacteristicRepr {
    fn from(c: Characteristic) -> Self {
        CharacteristicRepr {
            genus: c.genus,
            top: c.top_string(),
            bottom: c.bottom_string(),
        }
    }
}

pub fn parity(delta: &Characteristic) -> Parity {
    delta.parity()
}

/// Concatenates tops and bottoms: δ₁ ⊕ ··· ⊕ δₙ.
pub fn direct_sum(parts: &[Characteristic]) -> Result<Characteristic> {
    if parts.is_empty() {
        return Err(Error::InvalidArgument("direct sum of an empty list".into()));
    }
    let genus: usize = parts.iter().map(|p| p.genus).sum();
    check_genus(genus)?;
    let (top, bottom) = parts.iter().fold((0u32, 0u32), |(t, b), p| {
        ((t << p.genus) | p.top, (b << p.genus) | p.bottom)
    });
    Ok(Characteristic::from_words(genus, top, bottom))
}

/// Splits δ into consecutive blocks of the given sizes.
pub fn split(delta: &Characteristic, block_sizes: &[usize]) -> Result<Vec<Characteristic>> {
    let total: usize = block_sizes.iter().sum();
    if total != delta.genus || block_sizes.contains(&0) {
        return Err(Error::BlockSizeMismatch {
            genus: delta.genus,
            sizes: block_sizes.to_vec(),
        });
    }
    let mut remaining = delta.genus;
    Ok(block_sizes
        .iter()
        .map(|&size| {
            remaining -= size;
            Characteristic::from_words(size, delta.top >> remaining, delta.bottom >> remaining)
        })
        .collect())
}

/// All 4^g characteristics of genus `genus` in lexicographic order, optionally
/// restricted to one parity.
pub fn enumerate(genus: usize, filter: Option<Parity>) -> Result<Vec<Characteristic>> {
    check_genus(genus)?;
    if genus > 8 {
        return Err(Error::InvalidArgument(format!(
            "enumeration is limited to genus 8, got {genus}"
        )));
    }
    let n = 1u32 << genus;
    Ok((0..n)
        .flat_map(|top| (0..n).map(move |bottom| Characteristic::from_words(genus, top, bottom)))
        .filter(|c| filter.is_none_or(|p| c.parity() == p))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(s: &str) -> Characteristic {
        s.parse().unwrap()
    }

    #[test]
    fn parity_examples() {
        assert_eq!(ch("[1|1]").parity(), Parity::Odd);
        assert_eq!(ch("[0|0]").parity(), Parity::Even);
        // (1,1,0)·(1,0,0) = 1
        assert_eq!(ch("[110|100]").parity(), Parity::Odd);
    }

    #[test]
    fn direct_sum_concatenates() {
        let d = direct_sum(&[ch("[1|1]"), ch("[0|0]")]).unwrap();
        assert_eq!(d, ch("[10|10]"));
        assert_eq!(d.genus(), 2);
        assert!(direct_sum(&[]).is_err());
    }

    #[test]
    fn split_examples() {
        let parts = split(&ch("[101|101]"), &[1, 1, 1]).unwrap();
        let parities: Vec<_> = parts.iter().map(|p| p.parity()).collect();
        assert_eq!(parities, vec![Parity::Odd, Parity::Even, Parity::Odd]);

        let d = ch("[011|110]");
        assert_eq!(split(&d, &[3]).unwrap(), vec![d]);

        assert!(matches!(
            split(&d, &[2, 2]),
            Err(Error::BlockSizeMismatch { genus: 3, .. })
        ));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate(3, Some(Parity::Even)).unwrap().len(), 36);
        assert_eq!(enumerate(3, Some(Parity::Odd)).unwrap().len(), 28);
        assert_eq!(enumerate(2, Some(Parity::Odd)).unwrap().len(), 6);
        assert_eq!(enumerate(1, Some(Parity::Even)).unwrap().len(), 3);
        assert_eq!(enumerate(1, Some(Parity::Odd)).unwrap().len(), 1);
    }

    #[test]
    fn enumeration_order_is_lexicographic() {
        let all = enumerate(2, None).unwrap();
        let strings: Vec<(String, String)> = all.iter().map(|c| (c.top_string(), c.bottom_string())).collect();
        let mut sorted = strings.clone();
        sorted.sort();
        assert_eq!(strings, sorted);
        assert_eq!(all[0], ch("[00|00]"));
        assert_eq!(all[1], ch("[00|01]"));
        assert_eq!(all[4], ch("[01|00]"));
    }

    #[test]
    fn parity_closed_forms_up_to_genus_five() {
        for g in 1..=5u32 {
            let even = enumerate(g as usize, Some(Parity::Even)).unwrap().len();
            let odd = enumerate(g as usize, Some(Parity::Odd)).unwrap().len();
            assert_eq!(even, (1usize << (g - 1)) * ((1usize << g) + 1));
            assert_eq!(odd, (1usize << (g - 1)) * ((1usize << g) - 1));
        }
    }

    #[test]
    fn parity_is_additive_over_blocks() {
        for g1 in 1..=2 {
            for g2 in 1..=2 {
                for a in enumerate(g1, None).unwrap() {
                    for b in enumerate(g2, None).unwrap() {
                        let s = direct_sum(&[a, b]).unwrap();
                        assert_eq!(s.parity(), a.parity() ^ b.parity());
                    }
                }
            }
        }
    }

    #[test]
    fn split_and_sum_are_inverse_up_to_genus_four() {
        fn compositions(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            (1..=n)
                .flat_map(|first| {
                    compositions(n - first).into_iter().map(move |mut rest| {
                        rest.insert(0, first);
                        rest
                    })
                })
                .collect()
        }
        for g in 1..=4 {
            for sizes in compositions(g) {
                for d in enumerate(g, None).unwrap() {
                    let parts = split(&d, &sizes).unwrap();
                    assert_eq!(direct_sum(&parts).unwrap(), d);
                    assert_eq!(split(&direct_sum(&parts).unwrap(), &sizes).unwrap(), parts);
                }
            }
        }
    }

    #[test]
    fn even_genus_three_splits_into_equal_parity_factors() {
        for d in enumerate(3, Some(Parity::Even)).unwrap() {
            let parts = split(&d, &[2, 1]).unwrap();
            assert_eq!(parts[0].parity(), parts[1].parity(), "{d}");
        }
    }

    #[test]
    fn text_and_json_forms() {
        let d = ch("g=3:[110|100]");
        assert_eq!(d.to_string(), "g=3:[110|100]");
        assert_eq!(ch("[110|100]"), d);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"genus":3,"top":"110","bottom":"100"}"#);
        let back: Characteristic = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);

        assert!("g=2:[110|100]".parse::<Characteristic>().is_err());
        assert!("[11|1]".parse::<Characteristic>().is_err());
        assert!("[1x|10]".parse::<Characteristic>().is_err());
        let err = serde_json::from_str::<Characteristic>(r#"{"genus":3,"top":"11","bottom":"100"}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("top"), "{err}");
    }

    #[test]
    fn restrict_picks_coordinates() {
        let d = ch("[101|001]");
        assert_eq!(d.restrict(&[0, 2]).unwrap(), ch("[11|01]"));
        assert_eq!(d.restrict(&[1]).unwrap(), ch("[0|0]"));
        assert!(d.restrict(&[3]).is_err());
    }
}
