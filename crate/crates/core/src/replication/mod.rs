//! Replication processes: cloning and broadcasting of a parent state into a parent–offspring
//! pair, with an auxiliary environment.
//!
//! A process is a channel `T` on system ⊗ environment whose output is split into
//! parent ⊗ offspring ⊗ remainder. The environment starts in a fixed state `ω`.

mod broadcast;
pub mod channels;
pub mod clone_search;
pub mod nelder_mead;
pub mod species;

pub use broadcast::{
    broadcast, verify_broadcast_inequalities, verify_wigner_clone, BroadcastOutcome,
    BroadcastSetup, BroadcastVerdict, ChainLink, CheckStatus, CloneVerdict, InequalityCheck,
};
pub use channels::{commuting_broadcaster, diag_broadcaster, env_copier, fixed_offspring};
pub use clone_search::{clone_objective, clone_search, CloneSearchConfig, CloneSearchResult};
pub use species::{species_simulate, EnvPolicy, SpeciesScenario, Trajectory};
