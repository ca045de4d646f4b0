//! Labeled generalized workflow nets: composition, abstraction morphisms and
//! soundness by construction.

pub mod compose;
pub mod corpus;
pub mod format;
pub mod iso;
pub mod labeled;
pub mod marking;
pub mod morphism;
pub mod net;
pub mod reach;
pub mod refine;
pub mod unfolding;
pub mod workflow;

pub use marking::Marking;
pub use net::{NetBuilder, NetError, PetriNet};
