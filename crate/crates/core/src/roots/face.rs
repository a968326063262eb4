//! Exhaustive root search for face polynomials over small canonical fields.

use std::sync::Arc;

use num_integer::Integer;

use super::RootError;
use crate::field_tower::{FieldDescriptor, MAX_FIELD_SIZE};
use crate::newton_polygon::FacePoly;

/// Nonzero roots of a face polynomial in one field, with multiplicities,
/// in increasing code order.
#[derive(Debug, Clone)]
pub struct FaceRoots {
    pub field: Arc<FieldDescriptor>,
    pub roots: Vec<(u32, u64)>,
}

impl FaceRoots {
    pub fn count_with_multiplicity(&self) -> u64 {
        self.roots.iter().map(|r| r.1).sum()
    }
}

/// Which extension of F_q to search in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Want {
    /// Smallest extension containing at least one root.
    AnyRoot,
    /// Smallest extension over which the polynomial splits.
    Split,
}

/// Search F_{q^s} for s = 1, 2, ... up to `max_s`, where q = p^base_degree.
pub fn find_roots(
    face: &FacePoly,
    base_degree: u32,
    max_s: u32,
    want: Want,
) -> Result<FaceRoots, RootError> {
    let p = face.field.p();
    let deg = face.degree();
    for s in 1..=max_s {
        let k = (base_degree * s).lcm(&face.field.degree());
        if (p as f64).powi(k as i32) > MAX_FIELD_SIZE as f64 {
            return Err(RootError::ResidueCap {
                needed: s,
                cap: max_s,
            });
        }
        let field = FieldDescriptor::canonical(p, k)?;
        let lifted = face.lift(&field);
        let roots = roots_in(&lifted);
        let found = FaceRoots { field, roots };
        let done = match want {
            Want::AnyRoot => !found.roots.is_empty(),
            Want::Split => found.count_with_multiplicity() == deg,
        };
        if done {
            return Ok(found);
        }
    }
    Err(RootError::ResidueCap {
        needed: max_s + 1,
        cap: max_s,
    })
}

fn roots_in(face: &FacePoly) -> Vec<(u32, u64)> {
    let f = &face.field;
    let mut dense = vec![0u32; face.degree() as usize + 1];
    for &(k, c) in &face.terms {
        dense[k as usize] = c;
    }
    (1..f.size())
        .filter(|&z| face.eval(z) == 0)
        .map(|z| (z, multiplicity(f, &dense, z)))
        .collect()
}

/// Multiplicity of the root z by repeated synthetic division.
fn multiplicity(f: &FieldDescriptor, dense: &[u32], z: u32) -> u64 {
    let mut cur = dense.to_vec();
    let mut m = 0;
    while cur.len() > 1 {
        // divide by (T - z), coefficients low degree first
        let n = cur.len() - 1;
        let mut quot = vec![0u32; n];
        let mut carry = cur[n];
        for i in (0..n).rev() {
            quot[i] = carry;
            carry = f.add(cur[i], f.mul(carry, z));
        }
        if carry != 0 {
            break;
        }
        m += 1;
        cur = quot;
    }
    m
}
