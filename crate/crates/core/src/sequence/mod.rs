//! Weight rules, the conjugating sequence, finitely supported vectors,
//! shift powers and sequence-space norms.

mod scalar;
mod space;
mod vector;
mod vseq;
mod weights;

pub use scalar::{LogScalar, Scalar};
pub(crate) use scalar::{log_sum_exp, CompensatedSum};
pub use space::{norm, triple_norm, triple_norm_by_truncations, MonotoneNorm, SpaceModel};
pub use vector::{
    apply_forward_power, apply_shift_power, apply_shift_power_cached, conjugate_phi_v, reflect_vector,
    unconjugate_phi_v, FiniteVector,
};
pub use vseq::{v_at_exact, v_at_scalar, weight_product, weight_product_exact, VSequence};
pub use weights::{Direction, Param, TableEntry, WeightFn, WeightRule, WeightSpec};
