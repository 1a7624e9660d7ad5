//! Signed multisets over places, object strings and the multiplicity map
//! between them.
//!
//! A [`SignedMultiset`] is an element of the free abelian group on the
//! places of a net; an [`ObjString`] is a word in the free group, i.e. an
//! object of the execution category. [`ObjString::multiplicity`] forgets
//! the order of a word and [`ObjString::section`] picks the canonical word
//! for a multiset.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Name of a place. Ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlaceId(String);

impl PlaceId {
    pub fn new(name: impl Into<String>) -> Self {
        PlaceId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlaceId {
    fn from(s: &str) -> Self {
        PlaceId(s.to_owned())
    }
}

impl From<String> for PlaceId {
    fn from(s: String) -> Self {
        PlaceId(s)
    }
}

/// True if `name` can be used as a place or transition identifier in the
/// textual formats (object strings and the term grammar).
pub fn is_identifier(name: &str) -> bool {
    !name.is_empty() && name.chars().all(is_ident_char)
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '\'' | '-' | '$')
}

/// Finitely supported map from places to integers. Zero entries are never
/// stored, so structural equality is multiset equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedMultiset {
    entries: BTreeMap<PlaceId, i64>,
}

impl SignedMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(place: impl Into<PlaceId>, count: i64) -> Self {
        let mut m = Self::new();
        m.add_count(place.into(), count);
        m
    }

    pub fn get(&self, place: &PlaceId) -> i64 {
        self.entries.get(place).copied().unwrap_or(0)
    }

    /// Adds `count` to the entry of `place`, dropping it if it becomes zero.
    pub fn add_count(&mut self, place: PlaceId, count: i64) {
        if count == 0 {
            return;
        }
        match self.entries.entry(place) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += count;
                if *e.get() == 0 {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(count);
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Iterates non-zero entries in ascending place order.
    pub fn iter(&self) -> impl Iterator<Item = (&PlaceId, i64)> + '_ {
        self.entries.iter().map(|(p, k)| (p, *k))
    }

    pub fn support(&self) -> impl Iterator<Item = &PlaceId> + '_ {
        self.entries.keys()
    }

    /// All entries are non-negative.
    pub fn is_nat(&self) -> bool {
        self.entries.values().all(|k| *k > 0)
    }

    /// Pointwise `self >= other`, over the union of both supports.
    pub fn dominates(&self, other: &SignedMultiset) -> bool {
        other.iter().all(|(p, k)| self.get(p) >= k) && self.iter().all(|(p, k)| k >= other.get(p))
    }

    /// Multiplies every entry by `factor`.
    pub fn scale(&self, factor: i64) -> SignedMultiset {
        let mut out = SignedMultiset::new();
        for (p, k) in self.iter() {
            out.add_count(p.clone(), k * factor);
        }
        out
    }

    /// Sum of absolute values of the entries.
    pub fn total_size(&self) -> u64 {
        self.entries.values().map(|k| k.unsigned_abs()).sum()
    }
}

impl FromIterator<(PlaceId, i64)> for SignedMultiset {
    fn from_iter<I: IntoIterator<Item = (PlaceId, i64)>>(iter: I) -> Self {
        let mut m = SignedMultiset::new();
        for (p, k) in iter {
            m.add_count(p, k);
        }
        m
    }
}

impl<'a> FromIterator<(&'a str, i64)> for SignedMultiset {
    fn from_iter<I: IntoIterator<Item = (&'a str, i64)>>(iter: I) -> Self {
        iter.into_iter().map(|(p, k)| (PlaceId::from(p), k)).collect()
    }
}

impl AddAssign<&SignedMultiset> for SignedMultiset {
    fn add_assign(&mut self, rhs: &SignedMultiset) {
        for (p, k) in rhs.iter() {
            self.add_count(p.clone(), k);
        }
    }
}

impl Add for &SignedMultiset {
    type Output = SignedMultiset;

    fn add(self, rhs: &SignedMultiset) -> SignedMultiset {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for SignedMultiset {
    type Output = SignedMultiset;

    fn add(mut self, rhs: SignedMultiset) -> SignedMultiset {
        self += &rhs;
        self
    }
}

impl Neg for &SignedMultiset {
    type Output = SignedMultiset;

    fn neg(self) -> SignedMultiset {
        self.scale(-1)
    }
}

impl Neg for SignedMultiset {
    type Output = SignedMultiset;

    fn neg(self) -> SignedMultiset {
        -&self
    }
}

impl Sub for &SignedMultiset {
    type Output = SignedMultiset;

    fn sub(self, rhs: &SignedMultiset) -> SignedMultiset {
        self + &(-rhs)
    }
}

impl Sub for SignedMultiset {
    type Output = SignedMultiset;

    fn sub(self, rhs: SignedMultiset) -> SignedMultiset {
        &self - &rhs
    }
}

impl fmt::Display for SignedMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, k)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}: {k}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for SignedMultiset {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SignedMultiset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<PlaceId, i64>::deserialize(deserializer)?;
        Ok(raw.into_iter().collect())
    }
}

/// A multiset with only positive entries: the interfaces of an ordinary
/// (or semi-integer) net.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct NatMultiset(SignedMultiset);

impl NatMultiset {
    pub fn as_signed(&self) -> &SignedMultiset {
        &self.0
    }

    pub fn into_signed(self) -> SignedMultiset {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("negative entry {count} for place {place}")]
pub struct NegativeEntry {
    pub place: PlaceId,
    pub count: i64,
}

impl TryFrom<SignedMultiset> for NatMultiset {
    type Error = NegativeEntry;

    fn try_from(m: SignedMultiset) -> Result<Self, NegativeEntry> {
        if let Some((p, k)) = m.iter().find(|(_, k)| *k < 0) {
            return Err(NegativeEntry {
                place: p.clone(),
                count: k,
            });
        }
        Ok(NatMultiset(m))
    }
}

impl<'de> Deserialize<'de> for NatMultiset {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let m = SignedMultiset::deserialize(deserializer)?;
        NatMultiset::try_from(m).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn value(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

/// A place or its formal inverse.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub place: PlaceId,
    pub sign: Sign,
}

impl Letter {
    pub fn pos(place: impl Into<PlaceId>) -> Self {
        Letter {
            place: place.into(),
            sign: Sign::Pos,
        }
    }

    pub fn neg(place: impl Into<PlaceId>) -> Self {
        Letter {
            place: place.into(),
            sign: Sign::Neg,
        }
    }

    pub fn inverse(&self) -> Letter {
        Letter {
            place: self.place.clone(),
            sign: self.sign.flip(),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            Sign::Pos => write!(f, "{}", self.place),
            Sign::Neg => write!(f, "{}^-1", self.place),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StringParseError {
    #[error("invalid letter `{0}`")]
    BadLetter(String),
}

impl FromStr for Letter {
    type Err = StringParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, sign) = match s.strip_suffix("^-1") {
            Some(base) => (base, Sign::Neg),
            None => (s, Sign::Pos),
        };
        if !is_identifier(name) {
            return Err(StringParseError::BadLetter(s.to_owned()));
        }
        Ok(Letter {
            place: PlaceId::new(name),
            sign,
        })
    }
}

/// A word over places and their inverses; the empty word is the monoidal
/// unit.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjString(Vec<Letter>);

impl ObjString {
    pub fn unit() -> Self {
        ObjString(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        ObjString(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &ObjString) -> ObjString {
        let mut letters = self.0.clone();
        letters.extend(other.0.iter().cloned());
        ObjString(letters)
    }

    /// Group inverse of the word: reversed, every sign flipped.
    pub fn dual(&self) -> ObjString {
        ObjString(self.0.iter().rev().map(Letter::inverse).collect())
    }

    /// Signed count of every place: occurrences of `p` minus occurrences
    /// of `p^-1`.
    pub fn multiplicity(&self) -> SignedMultiset {
        self.0
            .iter()
            .map(|l| (l.place.clone(), l.sign.value()))
            .collect()
    }

    /// The canonical word with the given multiplicity: places ascending,
    /// `k` copies of `p` for `k > 0`, `|k|` copies of `p^-1` for `k < 0`.
    pub fn section(m: &SignedMultiset) -> ObjString {
        let mut letters = Vec::new();
        for (p, k) in m.iter() {
            let sign = if k > 0 { Sign::Pos } else { Sign::Neg };
            for _ in 0..k.unsigned_abs() {
                letters.push(Letter {
                    place: p.clone(),
                    sign,
                });
            }
        }
        ObjString(letters)
    }

    pub fn split_at(&self, mid: usize) -> (ObjString, ObjString) {
        let (a, b) = self.0.split_at(mid);
        (ObjString(a.to_vec()), ObjString(b.to_vec()))
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Letter> {
        self.0.iter()
    }
}

impl FromIterator<Letter> for ObjString {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        ObjString(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ObjString {
    type Item = &'a Letter;
    type IntoIter = std::slice::Iter<'a, Letter>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for ObjString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for ObjString {
    type Err = StringParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_whitespace().map(str::parse).collect()
    }
}

impl Serialize for ObjString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ObjString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
