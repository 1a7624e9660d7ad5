//! Small nets and traces used throughout the tests and the CLI examples.

use crate::algebra::SignedMultiset;
use crate::net::{FiringEvent, Flavor, Net, State};

fn ms(entries: &[(&str, i64)]) -> SignedMultiset {
    entries.iter().copied().collect()
}

/// An assembly-line net with five places and four transitions.
pub fn figure1_net() -> Net {
    let mut net = Net::new(Flavor::Nat);
    for p in ["p2a", "p2b", "p2c", "p4a", "p4b"] {
        net = net.with_place(p);
    }
    net.with_transition("1b", ms(&[]), ms(&[("p2a", 2), ("p2b", 1), ("p2c", 3)]))
        .with_transition(
            "3a",
            ms(&[("p2a", 1), ("p2b", 2), ("p2c", 1)]),
            ms(&[("p4a", 1), ("p4b", 1)]),
        )
        .with_transition("5a", ms(&[("p4a", 1), ("p4b", 4)]), ms(&[]))
        .with_transition("5b", ms(&[("p4a", 4)]), ms(&[]))
}

/// One place holding a single token and two consumers racing for it.
pub fn race_net() -> Net {
    Net::new(Flavor::ZState)
        .with_place("p1")
        .with_transition("t1", ms(&[("p1", 1)]), ms(&[]))
        .with_transition("t2", ms(&[("p1", 1)]), ms(&[]))
}

pub fn race_initial() -> State {
    State::new(ms(&[("p1", 1)]))
}

/// `tau: X -> Y`, `nu: X -> Z`, `mu: Y -> X`.
pub fn resolution_net() -> Net {
    Net::new(Flavor::ZState)
        .with_place("X")
        .with_place("Y")
        .with_place("Z")
        .with_transition("tau", ms(&[("X", 1)]), ms(&[("Y", 1)]))
        .with_transition("nu", ms(&[("X", 1)]), ms(&[("Z", 1)]))
        .with_transition("mu", ms(&[("Y", 1)]), ms(&[("X", 1)]))
}

pub fn resolution_initial() -> State {
    State::new(ms(&[("X", 1)]))
}

/// `nu` fires on borrowed credit before `mu` repays it.
pub fn resolution_trace() -> Vec<FiringEvent> {
    vec![
        FiringEvent::new("tau", Some("U1"), 1),
        FiringEvent::new("nu", Some("U2"), 2),
        FiringEvent::new("mu", Some("U1"), 3),
    ]
}
