//! The skew polynomial ring K{tau} with tau a = a^q tau, Drinfeld modules
//! phi: F_q[theta] -> K{tau}, and additive polynomials.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::field_tower::{FieldDescriptor, Puiseux, SeriesError, ThetaPoly, Valuation, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkewError {
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("leading coefficient a_r is zero")]
    ZeroLeading,
    #[error("coefficient a_{0} lies in the wrong characteristic")]
    WrongField(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// sum coeffs[i] tau^i over the series field, tau the q-power Frobenius.
#[derive(Clone)]
pub struct SkewPoly {
    q: u64,
    coeffs: Vec<Puiseux>,
}

impl SkewPoly {
    pub fn new(q: u64, mut coeffs: Vec<Puiseux>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        SkewPoly { q, coeffs }
    }

    pub fn constant(q: u64, c: Puiseux) -> Self {
        Self::new(q, vec![c])
    }

    pub fn tau(q: u64, field: &Arc<FieldDescriptor>) -> Self {
        Self::new(q, vec![Puiseux::zero(field), Puiseux::one(field)])
    }

    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn coeffs(&self) -> &[Puiseux] {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.q, other.q);
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (self.coeffs.get(i), other.coeffs.get(i)) {
                (Some(a), Some(b)) => a.add(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        Self::new(self.q, coeffs)
    }

    pub fn neg(&self) -> Self {
        Self::new(self.q, self.coeffs.iter().map(Puiseux::neg).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Left multiplication by a series scalar.
    pub fn scale(&self, c: &Puiseux) -> Self {
        Self::new(self.q, self.coeffs.iter().map(|x| c.mul(x)).collect())
    }

    pub fn skew_mul(&self, other: &Self) -> Self {
        skew_mul(self, other)
    }
}

/// Coefficient of tau^k in f*g is sum_{i+j=k} f_i * g_j^(q^i).
pub fn skew_mul(f: &SkewPoly, g: &SkewPoly) -> SkewPoly {
    assert_eq!(f.q, g.q);
    if f.is_zero() || g.is_zero() {
        return SkewPoly::new(f.q, Vec::new());
    }
    let n = f.coeffs.len() + g.coeffs.len() - 1;
    let mut out: Vec<Option<Puiseux>> = vec![None; n];
    for (i, fi) in f.coeffs.iter().enumerate() {
        if fi.is_exact_zero() {
            continue;
        }
        let qi = f.q.pow(i as u32);
        for (j, gj) in g.coeffs.iter().enumerate() {
            let t = fi.mul(&gj.frobenius(qi));
            let slot = &mut out[i + j];
            *slot = Some(match slot.take() {
                Some(acc) => acc.add(&t),
                None => t,
            });
        }
    }
    let field = f.coeffs[0].field().clone();
    SkewPoly::new(
        f.q,
        out.into_iter()
            .map(|c| c.unwrap_or_else(|| Puiseux::zero(&field)))
            .collect(),
    )
}

impl fmt::Debug for SkewPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SkewPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*tau^{i}")?;
        }
        Ok(())
    }
}

/// phi_theta = theta + a_1 tau + ... + a_r tau^r over F_q.
#[derive(Clone, Debug)]
pub struct DrinfeldModule {
    base: Arc<FieldDescriptor>,
    a: Vec<Puiseux>,
}

impl DrinfeldModule {
    /// `base` is F_q; the coefficients are series over extensions of it.
    pub fn new(base: &Arc<FieldDescriptor>, a: Vec<Puiseux>) -> Result<Self, SkewError> {
        if a.is_empty() {
            return Err(SkewError::ZeroRank);
        }
        for (i, c) in a.iter().enumerate() {
            if c.field().p() != base.p() || c.field().degree() % base.degree() != 0 {
                return Err(SkewError::WrongField(i + 1));
            }
        }
        if !a.last().unwrap().is_nonzero() {
            return Err(SkewError::ZeroLeading);
        }
        let base =
            FieldDescriptor::canonical(base.p(), base.degree()).map_err(SeriesError::from)?;
        Ok(DrinfeldModule { base, a })
    }

    /// The Carlitz module phi_theta = theta + tau.
    pub fn carlitz(base: &Arc<FieldDescriptor>) -> Self {
        Self::new(base, vec![Puiseux::one(base)]).expect("valid")
    }

    pub fn q(&self) -> u64 {
        self.base.size() as u64
    }
    pub fn base(&self) -> &Arc<FieldDescriptor> {
        &self.base
    }
    pub fn rank(&self) -> usize {
        self.a.len()
    }
    /// a_1, ..., a_r.
    pub fn a(&self) -> &[Puiseux] {
        &self.a
    }

    /// v(a_i), 1-based; infinite for a_i = 0.
    pub fn valuation_of(&self, i: usize) -> Valuation {
        self.a[i - 1].valuation()
    }

    pub fn phi_theta(&self) -> SkewPoly {
        let mut c = vec![Puiseux::theta(&self.base)];
        c.extend(self.a.iter().cloned());
        SkewPoly::new(self.q(), c)
    }

    pub fn phi_image(&self, a: &ThetaPoly) -> SkewPoly {
        phi_image(self, a)
    }
}

/// phi_a by Horner's scheme in the skew ring.
pub fn phi_image(d: &DrinfeldModule, a: &ThetaPoly) -> SkewPoly {
    let q = d.q();
    let pt = d.phi_theta();
    let mut acc = SkewPoly::new(q, Vec::new());
    for c in a.coeffs().iter().rev() {
        acc = skew_mul(&acc, &pt).add(&SkewPoly::constant(q, Puiseux::constant(c)));
    }
    acc
}

/// sum c_i X^(q^i) + constant.
#[derive(Clone, Debug)]
pub struct AdditivePoly {
    q: u64,
    c: Vec<Puiseux>,
    constant: Puiseux,
}

impl AdditivePoly {
    pub fn new(q: u64, mut c: Vec<Puiseux>, constant: Puiseux) -> Self {
        while c.last().is_some_and(|x| x.is_exact_zero()) {
            c.pop();
        }
        AdditivePoly { q, c, constant }
    }

    pub fn q(&self) -> u64 {
        self.q
    }
    /// c_i, the coefficient of X^(q^i).
    pub fn coeffs(&self) -> &[Puiseux] {
        &self.c
    }
    pub fn constant(&self) -> &Puiseux {
        &self.constant
    }
    pub fn is_homogeneous(&self) -> bool {
        self.constant.is_exact_zero()
    }
    pub fn homogeneous(&self) -> Self {
        let field = self.constant.field().clone();
        AdditivePoly {
            q: self.q,
            c: self.c.clone(),
            constant: Puiseux::zero(&field),
        }
    }
    /// Same homogeneous part, new constant.
    pub fn with_constant(&self, constant: Puiseux) -> Self {
        AdditivePoly {
            q: self.q,
            c: self.c.clone(),
            constant,
        }
    }
    /// Largest i with c_i nonzero, i.e. log_q of the X-degree.
    pub fn top(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn eval(&self, x: &Puiseux) -> Puiseux {
        eval_additive(self, x)
    }

    /// Evaluation discarding everything at or above `bound`.
    pub fn eval_below(&self, x: &Puiseux, bound: Q) -> Puiseux {
        eval_additive_below(self, x, Some(bound))
    }
}

pub fn to_additive(f: &SkewPoly, shift: &Puiseux) -> AdditivePoly {
    AdditivePoly::new(f.q, f.coeffs.clone(), shift.neg())
}

pub fn eval_additive(f: &AdditivePoly, x: &Puiseux) -> Puiseux {
    eval_additive_below(f, x, None)
}

fn eval_additive_below(f: &AdditivePoly, x: &Puiseux, bound: Option<Q>) -> Puiseux {
    let mut acc = f.constant.clone();
    let mut qi = 1u64;
    for ci in &f.c {
        if !ci.is_exact_zero() {
            // x^(q^i) is only needed below bound - v(c_i)
            let cap = match (bound, ci.valuation().lower_bound()) {
                (Some(b), Some(v)) => Some(b - v),
                _ => None,
            };
            let mut t = ci.mul(&x.frobenius_capped(qi, cap));
            if let Some(b) = bound {
                t = t.truncate(b);
            }
            acc = acc.add(&t);
        }
        qi = qi.saturating_mul(f.q);
    }
    // on the combined grid, so an off-grid bound costs as little as possible
    match bound {
        Some(b) => acc.truncate(b),
        None => acc,
    }
}
