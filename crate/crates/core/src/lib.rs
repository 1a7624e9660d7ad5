//! Petri nets with integer states, their free compact closed categories
//! as string diagrams, and tools to replay and reorder concurrent traces.

pub mod algebra;
pub mod diagrams;
pub mod execution;
pub mod fixtures;
pub mod functors;
pub mod net;
pub mod registry;
pub mod sim;
pub mod terms;

pub use algebra::{Letter, NatMultiset, ObjString, PlaceId, Sign, SignedMultiset};
pub use diagrams::{equal, Diagram};
pub use execution::{causal_order, resolve, trace_to_diagram, Resolution, Trace};
pub use functors::{fold, unfold, CategoryPresentation};
pub use net::{FiringEvent, Flavor, MorphismMap, Net, NetError, NetMorphism, State, TransitionId};
pub use sim::{simulate, SimConfig, SimReport};
pub use terms::{parse, Term};
