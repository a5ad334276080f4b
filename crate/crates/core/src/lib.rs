//! Exact evaluation of (twisted) Welschinger invariants of real del Pezzo
//! surfaces of degree at least 3 by a Caporaso–Harris type recursion.

pub mod engine;
pub mod error;
pub mod invariants;
pub mod picard;
pub mod surfaces;
pub mod tangency;

pub use engine::{
    totals_json, CacheFile, CacheStats, Engine, EngineOptions, EvalKey, FactorRecord, TermKind,
    TermRecord,
};
pub use error::{Error, Result};
pub use picard::{Conjugation, DivisorClass, Lattice, LatticeKind, Target};
pub use surfaces::{Model, PairItem, SurfaceSpec, Twist};
pub use tangency::{multinomial, TangencyVector};
