pub mod axioms;
pub mod broadcast;
pub mod clone;
pub mod overlap;
pub mod species;
pub mod toy;
