//! Finite fields, their canonical extension towers, and truncated Puiseux
//! series in u = 1/theta with exact valuations.

mod embed;
mod field;
pub(crate) mod fp_poly;
mod rational;
mod series;
mod theta;

pub use embed::{canonical_inclusion, compositum, fq_embed, to_canonical, EmbeddingMap};
pub use field::{same_field, FieldDescriptor, FieldError, FieldSpec, FqElement, MAX_FIELD_SIZE};
pub use rational::{ceil_units, floor_units, parse_q, q_str, serde_q, serde_q_opt, serde_q_vec, Q};
pub use series::{Puiseux, SeriesError, SeriesJson, Valuation, HARD_MAX_RAMIFICATION};
pub use theta::{series_from_rational, ThetaPoly};

/// Limits on how far representations may grow before an operation gives up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Caps {
    /// Largest ramification (denominator of exponents) a representation may use.
    pub max_e: u32,
    /// Largest residue degree over the base field F_q.
    pub max_s: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_e: 2048,
            max_s: 16,
        }
    }
}
