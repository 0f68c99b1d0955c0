//! The explicit construction of an `A`-hypercyclic vector for a weighted
//! shift, and verification of its orbit.
//!
//! Given hitting sets `A_1, ..., A_P`, targets `z^(p)` with preimages
//! `y^(p) = phi_v^{-1}(z^(p))` supported in `[-p, p]` and bounded by `p`,
//! the vector is
//!
//! ```text
//! x = sum_p sum_{|j| <= p} y_j^(p) sum_{n in A_p} e_{n+j}
//! ```
//!
//! in the unweighted picture, delivered as `phi_v(x)`. When the family
//! satisfies the norm-form condition for `eps_p = 1 / (p (2p+1) 4^p)`,
//! every `m in A_q` brings the orbit within `2^-q` of `z^(q)`;
//! [`verify_orbit`] measures this on a finite window and bounds what the
//! window leaves out.

mod build;
mod orbit;
mod schedules;
mod targets;

pub use build::{alpha_filter, build_vector, AHCVector, Coefficient};
pub use orbit::{
    orbit_report, verify_orbit, verify_orbit_unweighted, verify_orbit_with, HitSetReport, OrbitOptions, OrbitPoint,
    OrbitReport, ORBIT_TOLERANCE,
};
pub use schedules::{default_schedules, Schedules};
pub use targets::{
    dyadic_vector, enumerate_targets, minimal_admissible_p, parse_sparse, Sparse, Target, TargetList, TargetRule,
    TargetSource,
};

#[cfg(test)]
mod tests;
