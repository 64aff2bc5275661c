pub mod axioms;
pub mod classical;
pub mod error;
pub mod io;
pub mod quantum;
pub mod replication;
pub mod seed;
pub mod state;
pub mod tol;
pub mod toymodel;

pub use error::{Error, Result};
pub use state::{Backend, Channel, State};
pub use tol::Tolerances;
