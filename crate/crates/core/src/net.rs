//! Petri nets in three flavors, their states, firing and net morphisms.
//!
//! One [`Net`] type covers ordinary nets (`nat`), semi-integer nets
//! (`zstate`: integer states, non-negative interfaces) and integer nets
//! (`int`: integer interfaces too). The flavor only selects which states
//! are legal and whether firing needs enough tokens; the structure is the
//! same in all three cases.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{PlaceId, SignedMultiset};
use crate::registry::{Named, Registry};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TransitionId(String);

impl TransitionId {
    pub fn new(name: impl Into<String>) -> Self {
        TransitionId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TransitionId {
    fn from(s: &str) -> Self {
        TransitionId(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Nat,
    #[serde(rename = "zstate")]
    ZState,
    Int,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Nat => "nat",
            Flavor::ZState => "zstate",
            Flavor::Int => "int",
        }
    }

    /// Interfaces must be non-negative.
    pub fn positive_interfaces(self) -> bool {
        !matches!(self, Flavor::Int)
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    #[serde(rename = "in", default)]
    pub input: SignedMultiset,
    #[serde(rename = "out", default)]
    pub output: SignedMultiset,
}

impl Transition {
    pub fn new(input: SignedMultiset, output: SignedMultiset) -> Self {
        Transition { input, output }
    }

    /// Net effect of one firing.
    pub fn delta(&self) -> SignedMultiset {
        &self.output - &self.input
    }
}

/// A Petri net. Places are kept sorted; transitions keep declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    pub flavor: Flavor,
    places: BTreeSet<PlaceId>,
    transitions: IndexMap<TransitionId, Transition>,
    duplicates: Vec<String>,
}

/// One broken invariant of a net.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("negative interface in {flavor} net: transition {transition} has {count} on {place} ({side})")]
    NegativeInterface {
        flavor: Flavor,
        transition: TransitionId,
        place: PlaceId,
        count: i64,
        side: Side,
    },
    #[error("transition {transition} mentions undeclared place {place}")]
    UnknownPlace {
        transition: TransitionId,
        place: PlaceId,
    },
    #[error("duplicate declaration of {0}")]
    Duplicate(String),
    #[error("transition {0} has empty input and output (fires as a no-op)")]
    EmptyTransition(TransitionId),
}

impl Violation {
    /// Diagnostics that are reported but do not make the net invalid.
    pub fn is_warning(&self) -> bool {
        matches!(self, Violation::EmptyTransition(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Input,
    Output,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Input => "input",
            Side::Output => "output",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetError {
    #[error("unknown transition {0}")]
    UnknownTransition(TransitionId),
    #[error("NotEnabled: transition {transition} lacks tokens{}", index.map(|i| format!(" (event {i})")).unwrap_or_default())]
    NotEnabled {
        transition: TransitionId,
        index: Option<usize>,
    },
    #[error("invalid net: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl Net {
    pub fn new(flavor: Flavor) -> Self {
        Net {
            flavor,
            places: BTreeSet::new(),
            transitions: IndexMap::new(),
            duplicates: Vec::new(),
        }
    }

    pub fn with_place(mut self, place: impl Into<PlaceId>) -> Self {
        self.add_place(place.into());
        self
    }

    pub fn with_transition(
        mut self,
        name: impl Into<TransitionId>,
        input: SignedMultiset,
        output: SignedMultiset,
    ) -> Self {
        self.add_transition(name.into(), Transition::new(input, output));
        self
    }

    pub fn add_place(&mut self, place: PlaceId) {
        if !self.places.insert(place.clone()) {
            self.duplicates.push(format!("place {place}"));
        }
    }

    pub fn add_transition(&mut self, name: TransitionId, transition: Transition) {
        if self.transitions.contains_key(&name) {
            self.duplicates.push(format!("transition {name}"));
        }
        self.transitions.insert(name, transition);
    }

    pub fn places(&self) -> &BTreeSet<PlaceId> {
        &self.places
    }

    pub fn has_place(&self, place: &PlaceId) -> bool {
        self.places.contains(place)
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&TransitionId, &Transition)> + '_ {
        self.transitions.iter()
    }

    pub fn transition(&self, t: &TransitionId) -> Result<&Transition, NetError> {
        self.transitions
            .get(t)
            .ok_or_else(|| NetError::UnknownTransition(t.clone()))
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn with_flavor(&self, flavor: Flavor) -> Net {
        Net {
            flavor,
            ..self.clone()
        }
    }

    /// Every invariant violation, plus warnings (see [`Violation::is_warning`]).
    pub fn diagnostics(&self) -> Vec<Violation> {
        let mut out: Vec<Violation> = self
            .duplicates
            .iter()
            .cloned()
            .map(Violation::Duplicate)
            .collect();
        for (name, tr) in &self.transitions {
            for (side, m) in [(Side::Input, &tr.input), (Side::Output, &tr.output)] {
                for (p, k) in m.iter() {
                    if !self.places.contains(p) {
                        out.push(Violation::UnknownPlace {
                            transition: name.clone(),
                            place: p.clone(),
                        });
                    }
                    if k < 0 && self.flavor.positive_interfaces() {
                        out.push(Violation::NegativeInterface {
                            flavor: self.flavor,
                            transition: name.clone(),
                            place: p.clone(),
                            count: k,
                            side,
                        });
                    }
                }
            }
            if tr.input.is_empty() && tr.output.is_empty() {
                out.push(Violation::EmptyTransition(name.clone()));
            }
        }
        out
    }

    /// Ok when there are no violations other than warnings.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let errors: Vec<Violation> = self
            .diagnostics()
            .into_iter()
            .filter(|v| !v.is_warning())
            .collect();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    pub fn semantics(&self) -> Arc<dyn FiringSemantics> {
        semantics_for(self.flavor)
    }

    pub fn enabled(&self, s: &State, t: &TransitionId) -> Result<bool, NetError> {
        let tr = self.transition(t)?;
        Ok(self.semantics().enabled(s, tr))
    }

    /// Fires `t` under the net's own flavor.
    pub fn fire(&self, s: &State, t: &TransitionId) -> Result<State, NetError> {
        self.fire_with(self.semantics().as_ref(), s, t)
    }

    pub fn fire_with(
        &self,
        semantics: &dyn FiringSemantics,
        s: &State,
        t: &TransitionId,
    ) -> Result<State, NetError> {
        let tr = self.transition(t)?;
        if !semantics.enabled(s, tr) {
            return Err(NetError::NotEnabled {
                transition: t.clone(),
                index: None,
            });
        }
        Ok(State(&(&s.0 - &tr.input) + &tr.output))
    }

    /// Replays `events` from `s0`, returning every state including `s0`.
    pub fn fire_sequence(&self, s0: &State, events: &[FiringEvent]) -> Result<Vec<State>, NetError> {
        let semantics = self.semantics();
        let mut states = Vec::with_capacity(events.len() + 1);
        states.push(s0.clone());
        for (i, ev) in events.iter().enumerate() {
            let next = self
                .fire_with(semantics.as_ref(), states.last().unwrap(), &ev.transition)
                .map_err(|e| match e {
                    NetError::NotEnabled { transition, .. } => NetError::NotEnabled {
                        transition,
                        index: Some(i),
                    },
                    other => other,
                })?;
            states.push(next);
        }
        Ok(states)
    }
}

#[derive(Serialize, Deserialize)]
struct NetFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flavor: Option<Flavor>,
    #[serde(default)]
    places: Vec<PlaceId>,
    #[serde(default)]
    transitions: Vec<TransitionEntry>,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct TransitionEntry {
    pub name: TransitionId,
    #[serde(rename = "in", default)]
    pub input: SignedMultiset,
    #[serde(rename = "out", default)]
    pub output: SignedMultiset,
}

impl Serialize for Net {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        NetFile {
            flavor: Some(self.flavor),
            places: self.places.iter().cloned().collect(),
            transitions: self
                .transitions
                .iter()
                .map(|(name, tr)| TransitionEntry {
                    name: name.clone(),
                    input: tr.input.clone(),
                    output: tr.output.clone(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Net {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = NetFile::deserialize(deserializer)?;
        let mut net = Net::new(file.flavor.unwrap_or(Flavor::Int));
        for p in file.places {
            net.add_place(p);
        }
        for t in file.transitions {
            net.add_transition(t.name, Transition::new(t.input, t.output));
        }
        Ok(net)
    }
}

/// A marking: absent places hold zero tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State(pub SignedMultiset);

impl State {
    pub fn new(marking: SignedMultiset) -> Self {
        State(marking)
    }

    pub fn marking(&self) -> &SignedMultiset {
        &self.0
    }

    pub fn get(&self, place: &PlaceId) -> i64 {
        self.0.get(place)
    }

    /// No place holds a negative number of tokens.
    pub fn is_legal(&self) -> bool {
        self.0.is_nat()
    }
}

impl<'a> FromIterator<(&'a str, i64)> for State {
    fn from_iter<I: IntoIterator<Item = (&'a str, i64)>>(iter: I) -> Self {
        State(iter.into_iter().collect())
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn is_legal(s: &State) -> bool {
    s.is_legal()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiringEvent {
    pub transition: TransitionId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    #[serde(default)]
    pub timestamp: i64,
}

impl FiringEvent {
    pub fn new(transition: impl Into<TransitionId>, agent: Option<&str>, timestamp: i64) -> Self {
        FiringEvent {
            transition: transition.into(),
            agent: agent.map(str::to_owned),
            timestamp,
        }
    }
}

/// When a transition may fire from a state, and which states are legal.
pub trait FiringSemantics: Named + Send + Sync {
    fn enabled(&self, s: &State, t: &Transition) -> bool;

    fn legal(&self, s: &State) -> bool;
}

/// Ordinary token game: enough tokens in every input place.
pub struct NatSemantics;

/// Integer states: a transition may always fire, borrowing tokens.
pub struct ZStateSemantics;

/// Integer states and interfaces; firing is always possible.
pub struct IntSemantics;

impl Named for NatSemantics {
    fn name(&self) -> &'static str {
        "nat"
    }
}

impl FiringSemantics for NatSemantics {
    fn enabled(&self, s: &State, t: &Transition) -> bool {
        t.input.iter().all(|(p, k)| s.get(p) >= k)
    }

    fn legal(&self, s: &State) -> bool {
        s.is_legal()
    }
}

impl Named for ZStateSemantics {
    fn name(&self) -> &'static str {
        "zstate"
    }
}

impl FiringSemantics for ZStateSemantics {
    fn enabled(&self, _s: &State, _t: &Transition) -> bool {
        true
    }

    fn legal(&self, _s: &State) -> bool {
        true
    }
}

impl Named for IntSemantics {
    fn name(&self) -> &'static str {
        "int"
    }
}

impl FiringSemantics for IntSemantics {
    fn enabled(&self, _s: &State, _t: &Transition) -> bool {
        true
    }

    fn legal(&self, _s: &State) -> bool {
        true
    }
}

/// The firing semantics registry: `nat`, `zstate`, `int`.
pub fn semantics_registry() -> &'static Registry<dyn FiringSemantics> {
    static REGISTRY: OnceLock<Registry<dyn FiringSemantics>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn FiringSemantics> = Registry::new();
        reg.register(Arc::new(ZStateSemantics));
        reg.register(Arc::new(NatSemantics));
        reg.register(Arc::new(IntSemantics));
        reg
    })
}

pub fn semantics_for(flavor: Flavor) -> Arc<dyn FiringSemantics> {
    semantics_registry()
        .get(flavor.name())
        .expect("every flavor has registered semantics")
}

/// The data of a net morphism: a transition map and the images of the
/// free generators (places) of the source group.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismMap {
    #[serde(default)]
    pub f: BTreeMap<TransitionId, TransitionId>,
    #[serde(default, with = "place_images")]
    pub g: BTreeMap<PlaceId, SignedMultiset>,
}

mod place_images {
    use super::*;

    pub fn serialize<S: Serializer>(
        g: &BTreeMap<PlaceId, SignedMultiset>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        let pairs: BTreeMap<&PlaceId, Vec<(&PlaceId, i64)>> =
            g.iter().map(|(p, m)| (p, m.iter().collect())).collect();
        pairs.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<PlaceId, SignedMultiset>, D::Error> {
        let pairs = BTreeMap::<PlaceId, Vec<(PlaceId, i64)>>::deserialize(deserializer)?;
        Ok(pairs
            .into_iter()
            .map(|(p, v)| (p, v.into_iter().collect()))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismViolation {
    #[error("f is undefined on transition {0}")]
    MissingTransitionImage(TransitionId),
    #[error("f sends {0} to {1}, which is not a transition of the target")]
    UnknownTargetTransition(TransitionId, TransitionId),
    #[error("g is undefined on place {0}")]
    MissingPlaceImage(PlaceId),
    #[error("g sends {0} to a multiset mentioning {1}, which is not a target place")]
    UnknownTargetPlace(PlaceId, PlaceId),
    #[error("g({place}) = {image} is not a monoid homomorphism image between positive nets")]
    NegativeImage {
        place: PlaceId,
        image: SignedMultiset,
    },
    #[error("{side} square fails on {transition}: g gives {mapped}, target has {expected}")]
    SquareFails {
        transition: TransitionId,
        side: Side,
        mapped: SignedMultiset,
        expected: SignedMultiset,
    },
}

impl MorphismMap {
    pub fn identity(net: &Net) -> Self {
        MorphismMap {
            f: net
                .transitions()
                .map(|(t, _)| (t.clone(), t.clone()))
                .collect(),
            g: net
                .places()
                .iter()
                .map(|p| (p.clone(), SignedMultiset::singleton(p.clone(), 1)))
                .collect(),
        }
    }

    /// Linear extension of `g`. Places without an image map to zero.
    pub fn apply(&self, m: &SignedMultiset) -> SignedMultiset {
        let mut out = SignedMultiset::new();
        for (p, k) in m.iter() {
            if let Some(img) = self.g.get(p) {
                out += &img.scale(k);
            }
        }
        out
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &MorphismMap) -> MorphismMap {
        MorphismMap {
            f: self
                .f
                .iter()
                .filter_map(|(t, u)| next.f.get(u).map(|v| (t.clone(), v.clone())))
                .collect(),
            g: self
                .g
                .iter()
                .map(|(p, img)| (p.clone(), next.apply(img)))
                .collect(),
        }
    }
}

/// A morphism between two nets, checked against both commuting squares.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetMorphism {
    pub source: Net,
    pub target: Net,
    pub map: MorphismMap,
}

impl NetMorphism {
    pub fn new(source: Net, target: Net, map: MorphismMap) -> Self {
        NetMorphism {
            source,
            target,
            map,
        }
    }

    pub fn identity(net: &Net) -> Self {
        NetMorphism::new(net.clone(), net.clone(), MorphismMap::identity(net))
    }

    pub fn check(&self) -> Result<(), Vec<MorphismViolation>> {
        let mut out = Vec::new();
        let positive = self.source.flavor.positive_interfaces() && self.target.flavor.positive_interfaces();
        for p in self.source.places() {
            match self.map.g.get(p) {
                None => out.push(MorphismViolation::MissingPlaceImage(p.clone())),
                Some(img) => {
                    for q in img.support() {
                        if !self.target.has_place(q) {
                            out.push(MorphismViolation::UnknownTargetPlace(p.clone(), q.clone()));
                        }
                    }
                    if positive && !img.is_nat() {
                        out.push(MorphismViolation::NegativeImage {
                            place: p.clone(),
                            image: img.clone(),
                        });
                    }
                }
            }
        }
        for (t, tr) in self.source.transitions() {
            let Some(ft) = self.map.f.get(t) else {
                out.push(MorphismViolation::MissingTransitionImage(t.clone()));
                continue;
            };
            let Ok(target_tr) = self.target.transition(ft) else {
                out.push(MorphismViolation::UnknownTargetTransition(t.clone(), ft.clone()));
                continue;
            };
            for (side, src, tgt) in [
                (Side::Input, &tr.input, &target_tr.input),
                (Side::Output, &tr.output, &target_tr.output),
            ] {
                let mapped = self.map.apply(src);
                if &mapped != tgt {
                    out.push(MorphismViolation::SquareFails {
                        transition: t.clone(),
                        side,
                        mapped,
                        expected: tgt.clone(),
                    });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// `self` followed by `next`; `next.source` is assumed to be `self.target`.
    pub fn compose(&self, next: &NetMorphism) -> NetMorphism {
        NetMorphism::new(
            self.source.clone(),
            next.target.clone(),
            self.map.then(&next.map),
        )
    }
}
