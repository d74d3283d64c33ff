//! Variational-principle engine over generalized distance functions.
//!
//! Distance functions here satisfy exactly one law — `d(x,y) = 0 ⟺ x = y`
//! — and may be asymmetric and non-triangular (fractional-power `ℓ^p`
//! distances, KL and Itakura-Saito divergences, arbitrary positive
//! tables). On finite point spaces the crate runs the Borwein-Preiss and
//! Ekeland minimizer constructions driven purely by such a distance, emits
//! certificates whose conclusions are re-checked by exhaustive enumeration,
//! and applies the machinery to Caristi fixed-point search and equilibrium
//! problems.
//!
//! The `problem` module defines the JSON problem/report schema consumed by
//! the `varprin` command-line tool; `generate` produces seeded random
//! instances for fuzzing the whole pipeline.

pub mod applications;
pub mod distance;
pub mod engine;
pub mod error;
pub mod ext;
pub mod generate;
pub mod problem;
pub mod runner;
pub mod sequential;
pub mod space;

pub use distance::{axiom_report, product_distance, right_ball, AxiomReport, Distance, DistanceSpec, ScanMode};
pub use engine::{
    borwein_preiss, ekeland, trace_to_family, verify_bp, verify_ekeland, weak_borwein_preiss,
    weak_ekeland, Certificate, PerturbationSchedule, Picker, ScheduleTail, Trace,
};
pub use error::{Error, Result};
pub use sequential::{
    cantor_intersect, cauchy_modulus, converges_to, sublevel_set, NestedFamily, SequenceTrace,
    Side, TailRule, Verdict,
};
pub use space::{ExtendedObjective, PointSet, PointSpace};
