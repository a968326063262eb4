//! Truncated Puiseux series in the uniformizer u = 1/theta.
//!
//! An element is a finite sparse sum `sum c_k u^(k/e)` over a canonical finite
//! field, together with an absolute precision: every term with exponent below
//! the precision is known. Exact elements (finite sums such as polynomials in
//! theta) carry no precision bound at all.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::embed::{canonical_inclusion, compositum, to_canonical};
use super::field::{same_field, FieldDescriptor, FieldSpec, FqElement};
use super::rational::{ceil_units, floor_units, q_str, Q};

/// Hard ceiling on the ramification of a single representation. Configurable
/// caps are enforced by the solver well below this.
pub const HARD_MAX_RAMIFICATION: u32 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("ramification {0} exceeds the cap {1}")]
    RamificationCap(u64, u32),
    #[error("residue degree {0} exceeds the cap {1}")]
    ResidueCap(u32, u32),
    #[error(transparent)]
    Field(#[from] super::field::FieldError),
}

/// Valuation of a series element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    /// Nonzero element with known leading term.
    Finite(Q),
    /// Zero up to the known precision: the true valuation is at least this.
    AtLeast(Q),
    /// The exact zero element.
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<Q> {
        match self {
            Valuation::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// True when the valuation is provably at least `bound`.
    pub fn at_least(self, bound: Q) -> bool {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => v >= bound,
            Valuation::Infinite => true,
        }
    }

    /// A lower bound for the valuation (infinite as `None`).
    pub fn lower_bound(self) -> Option<Q> {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{}", q_str(*v)),
            Valuation::AtLeast(v) => write!(f, ">={}", q_str(*v)),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone)]
pub struct Puiseux {
    e: u32,
    field: Arc<FieldDescriptor>,
    terms: Vec<(i64, u32)>,
    prec: Option<i64>,
}

fn canonicalize(c: &FqElement) -> FqElement {
    if c.field().is_canonical() {
        c.clone()
    } else {
        to_canonical(c.field())
            .expect("field of supported size")
            .apply(c)
    }
}

impl Puiseux {
    fn from_raw(
        e: u32,
        field: Arc<FieldDescriptor>,
        mut terms: Vec<(i64, u32)>,
        prec: Option<i64>,
    ) -> Self {
        terms.retain(|&(k, c)| c != 0 && prec.is_none_or(|p| k < p));
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        Puiseux {
            e,
            field,
            terms,
            prec,
        }
    }

    pub fn zero(field: &Arc<FieldDescriptor>) -> Self {
        Self::constant(&FqElement::zero(field))
    }

    pub fn one(field: &Arc<FieldDescriptor>) -> Self {
        Self::constant(&FqElement::one(field))
    }

    pub fn constant(c: &FqElement) -> Self {
        Self::monomial(c, Q::zero())
    }

    /// `c * u^exponent`, exact.
    pub fn monomial(c: &FqElement, exponent: Q) -> Self {
        let c = canonicalize(c);
        let e = *exponent.denom() as u32;
        Self::from_raw(
            e,
            c.field().clone(),
            vec![(*exponent.numer(), c.code())],
            None,
        )
    }

    /// theta = u^-1.
    pub fn theta(field: &Arc<FieldDescriptor>) -> Self {
        Self::monomial(&FqElement::one(field), Q::from_integer(-1))
    }

    /// Exact element from a polynomial in theta, coefficients low degree first.
    pub fn from_theta_poly(coeffs: &[FqElement], field: &Arc<FieldDescriptor>) -> Self {
        let canon = canonicalize(&FqElement::zero(field)).field().clone();
        let mut terms: Vec<(i64, u32)> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (-(i as i64), canonicalize(c).code()))
            .collect();
        terms.reverse();
        Self::from_raw(1, canon, terms, None)
    }

    /// An element known to be zero below `bound`.
    pub fn zero_to_precision(field: &Arc<FieldDescriptor>, bound: Q) -> Self {
        let field = canonicalize(&FqElement::zero(field)).field().clone();
        let e = *bound.denom() as u32;
        Self::from_raw(e, field, Vec::new(), Some(*bound.numer()))
    }

    /// Build from exponent numerators over `e` and codes in the canonical `field`.
    pub fn from_terms(
        e: u32,
        field: &Arc<FieldDescriptor>,
        terms: Vec<(i64, u32)>,
        prec: Option<i64>,
    ) -> Self {
        assert!(field.is_canonical());
        let mut terms = terms;
        terms.sort_by_key(|t| t.0);
        Self::from_raw(e, field.clone(), merge_sorted(field, terms), prec)
    }

    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn field(&self) -> &Arc<FieldDescriptor> {
        &self.field
    }
    /// Sparse terms: exponent numerators over `e()` with field codes.
    pub fn terms(&self) -> &[(i64, u32)] {
        &self.terms
    }
    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }
    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_none()
    }
    pub fn is_zero_to_precision(&self) -> bool {
        self.terms.is_empty() && self.prec.is_some()
    }
    pub fn is_nonzero(&self) -> bool {
        !self.terms.is_empty()
    }

    pub fn abs_precision(&self) -> Option<Q> {
        self.prec.map(|p| Q::new(p, self.e as i64))
    }

    /// Number of known term slots at the current ramification, from the leading term.
    pub fn precision(&self) -> Option<i64> {
        let p = self.prec?;
        Some(p - self.val_units())
    }

    fn val_units(&self) -> i64 {
        match (self.terms.first(), self.prec) {
            (Some(t), _) => t.0,
            (None, Some(p)) => p,
            (None, None) => i64::MAX,
        }
    }

    pub fn valuation(&self) -> Valuation {
        match (self.terms.first(), self.prec) {
            (Some(t), _) => Valuation::Finite(Q::new(t.0, self.e as i64)),
            (None, Some(p)) => Valuation::AtLeast(Q::new(p, self.e as i64)),
            (None, None) => Valuation::Infinite,
        }
    }

    pub fn leading_coeff(&self) -> Option<FqElement> {
        self.terms
            .first()
            .map(|t| FqElement::new(self.field.clone(), t.1))
    }

    /// Leading monomial as (coefficient, exponent).
    pub fn leading_term(&self) -> Option<(FqElement, Q)> {
        self.terms.first().map(|t| {
            (
                FqElement::new(self.field.clone(), t.1),
                Q::new(t.0, self.e as i64),
            )
        })
    }

    /// Terms as (exponent, coefficient).
    pub fn iter_terms(&self) -> impl Iterator<Item = (Q, FqElement)> + '_ {
        self.terms.iter().map(move |&(k, c)| {
            (
                Q::new(k, self.e as i64),
                FqElement::new(self.field.clone(), c),
            )
        })
    }

    /// Coefficient of u^exponent (zero if absent).
    pub fn coeff_at(&self, exponent: Q) -> FqElement {
        let k = exponent * Q::from_integer(self.e as i64);
        let code = if k.is_integer() {
            self.terms
                .binary_search_by_key(k.numer(), |t| t.0)
                .map(|i| self.terms[i].1)
                .unwrap_or(0)
        } else {
            0
        };
        FqElement::new(self.field.clone(), code)
    }

    /// Re-express over ramification `e` (a multiple of the current one) and the
    /// canonical field `field` (an extension of the current one).
    pub fn lift(&self, e: u32, field: &Arc<FieldDescriptor>) -> Self {
        assert!(
            e.is_multiple_of(self.e),
            "cannot lift ramification {} to {}",
            self.e,
            e
        );
        let s = (e / self.e) as i64;
        let map = if same_field(&self.field, field) {
            None
        } else {
            Some(canonical_inclusion(&self.field, field).expect("field extension"))
        };
        let terms = self
            .terms
            .iter()
            .map(|&(k, c)| (k * s, map.as_ref().map_or(c, |m| m.apply_code(c))))
            .collect();
        Puiseux {
            e,
            field: field.clone(),
            terms,
            prec: self.prec.map(|p| p * s),
        }
    }

    pub fn lift_field(&self, field: &Arc<FieldDescriptor>) -> Self {
        self.lift(self.e, field)
    }

    /// Reduce the ramification to the smallest one the exponents allow.
    pub fn normalize_e(&self) -> Self {
        let mut g = self.e as i64;
        for &(k, _) in &self.terms {
            g = g.gcd(&k);
        }
        if let Some(p) = self.prec {
            g = g.gcd(&p);
        }
        if g <= 1 {
            return self.clone();
        }
        Puiseux {
            e: self.e / g as u32,
            field: self.field.clone(),
            terms: self.terms.iter().map(|&(k, c)| (k / g, c)).collect(),
            prec: self.prec.map(|p| p / g),
        }
    }

    /// Bring two elements to a common ramification and residue field.
    pub fn align(&self, other: &Self) -> (Self, Self) {
        let e64 = (self.e as u64).lcm(&(other.e as u64));
        assert!(
            e64 <= HARD_MAX_RAMIFICATION as u64,
            "ramification {e64} beyond the hard ceiling"
        );
        let e = e64 as u32;
        let field = if same_field(&self.field, &other.field) {
            self.field.clone()
        } else {
            compositum(&self.field, &other.field).expect("supported compositum")
        };
        let a = if e == self.e && same_field(&field, &self.field) {
            self.clone()
        } else {
            self.lift(e, &field)
        };
        let b = if e == other.e && same_field(&field, &other.field) {
            other.clone()
        } else {
            other.lift(e, &field)
        };
        (a, b)
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        Puiseux {
            e: self.e,
            field: f.clone(),
            terms: self.terms.iter().map(|&(k, c)| (k, f.neg(c))).collect(),
            prec: self.prec,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.align(other);
        let f = a.field.clone();
        let prec = min_opt(a.prec, b.prec);
        let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < a.terms.len() || j < b.terms.len() {
            let next = match (a.terms.get(i), b.terms.get(j)) {
                (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                    Ordering::Less => {
                        i += 1;
                        *x
                    }
                    Ordering::Greater => {
                        j += 1;
                        *y
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (x.0, f.add(x.1, y.1))
                    }
                },
                (Some(x), None) => {
                    i += 1;
                    *x
                }
                (None, Some(y)) => {
                    j += 1;
                    *y
                }
                (None, None) => unreachable!(),
            };
            if prec.is_some_and(|p| next.0 >= p) {
                break;
            }
            if next.1 != 0 {
                out.push(next);
            }
        }
        Puiseux {
            e: a.e,
            field: f,
            terms: out,
            prec,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.align(other);
        let f = a.field.clone();
        if a.is_exact_zero() || b.is_exact_zero() {
            return Puiseux {
                e: a.e,
                field: f,
                terms: Vec::new(),
                prec: None,
            };
        }
        let (va, vb) = (a.val_units(), b.val_units());
        let prec = match (a.prec, b.prec) {
            (None, None) => None,
            (Some(pa), None) => Some(vb + pa),
            (None, Some(pb)) => Some(va + pb),
            (Some(pa), Some(pb)) => Some((va + pb).min(vb + pa)),
        };
        let mut prods: Vec<(i64, u32)> = Vec::with_capacity(a.terms.len() * b.terms.len().min(64));
        for &(ka, ca) in &a.terms {
            for &(kb, cb) in &b.terms {
                let k = ka + kb;
                if prec.is_some_and(|p| k >= p) {
                    break;
                }
                prods.push((k, f.mul(ca, cb)));
            }
        }
        prods.sort_unstable_by_key(|t| t.0);
        Puiseux {
            e: a.e,
            terms: merge_sorted(&f, prods),
            field: f,
            prec,
        }
    }

    /// Multiply by a finite-field scalar.
    pub fn scale(&self, c: &FqElement) -> Self {
        let c = canonicalize(c);
        if !same_field(c.field(), &self.field) {
            return self.mul(&Self::constant(&c));
        }
        let f = &self.field;
        Self::from_raw(
            self.e,
            f.clone(),
            self.terms
                .iter()
                .map(|&(k, x)| (k, f.mul(x, c.code())))
                .collect(),
            self.prec,
        )
    }

    /// Multiply by u^shift.
    pub fn shift(&self, shift: Q) -> Self {
        let m = Self::monomial(&FqElement::one(&self.field), shift);
        self.mul(&m)
    }

    /// Multiplicative inverse. Exact non-monomial inputs are expanded to
    /// `default_rel` valuation units beyond the leading term.
    pub fn inv(&self, default_rel: Q) -> Result<Self, SeriesError> {
        let Some(&(v, c)) = self.terms.first() else {
            return Err(if self.is_exact_zero() {
                SeriesError::DivisionByZero
            } else {
                SeriesError::PrecisionExhausted(
                    "inverse of an element that is zero to precision".into(),
                )
            });
        };
        let f = &self.field;
        let c_inv = f.inv(c).expect("leading coefficient is nonzero");
        if self.prec.is_none() && self.terms.len() == 1 {
            return Ok(Self::from_raw(self.e, f.clone(), vec![(-v, c_inv)], None));
        }
        let rel = match self.prec {
            Some(p) => p - v,
            None => ceil_units(default_rel, self.e).max(1),
        };
        let w: Vec<(usize, u32)> = self.terms[1..]
            .iter()
            .map(|&(k, x)| ((k - v) as usize, f.mul(x, c_inv)))
            .take_while(|&(k, _)| (k as i64) < rel)
            .collect();
        let n = rel as usize;
        let mut y = vec![0u32; n];
        y[0] = 1;
        for k in 1..n {
            let mut acc = 0u32;
            for &(j, wj) in &w {
                if j > k {
                    break;
                }
                let t = y[k - j];
                if t != 0 {
                    acc = f.add(acc, f.mul(wj, t));
                }
            }
            y[k] = f.neg(acc);
        }
        let terms = y
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c != 0)
            .map(|(k, x)| (k as i64 - v, f.mul(x, c_inv)))
            .collect();
        Ok(Self::from_raw(self.e, f.clone(), terms, Some(rel - v)))
    }

    /// `self / other`. When `other` is exact its inverse is expanded to the
    /// relative precision of `self` (or `default_rel` when both are exact).
    pub fn div(&self, other: &Self, default_rel: Q) -> Result<Self, SeriesError> {
        let rel = match (self.abs_precision(), self.valuation()) {
            (Some(p), Valuation::Finite(v)) => p - v,
            (Some(_), _) => default_rel,
            (None, _) => default_rel,
        };
        Ok(self.mul(&other.inv(rel)?))
    }

    /// The q-power Frobenius x -> x^q (q a power of the characteristic).
    pub fn frobenius(&self, q: u64) -> Self {
        self.frobenius_capped(q, None)
    }

    /// Frobenius, discarding everything at or above `cap`.
    pub fn frobenius_capped(&self, q: u64, cap: Option<Q>) -> Self {
        let p = self.field.p() as u64;
        let mut j = 0u32;
        let mut t = 1u64;
        while t < q {
            t *= p;
            j += 1;
        }
        assert_eq!(t, q, "Frobenius exponent {q} is not a power of {p}");
        let qi = q as i64;
        let cap_units = cap.map(|c| ceil_units(c, self.e));
        let prec = min_opt(self.prec.map(|x| x.saturating_mul(qi)), cap_units);
        let f = &self.field;
        let terms = self
            .terms
            .iter()
            .map(|&(k, c)| (k * qi, f.frobenius(c, j)))
            .take_while(|&(k, _)| prec.is_none_or(|p| k < p))
            .collect();
        Puiseux {
            e: self.e,
            field: f.clone(),
            terms,
            prec,
        }
    }

    /// Forget everything at or above `abs`. When `abs` is off the exponent
    /// grid the precision drops to the grid point below it.
    pub fn truncate(&self, abs: Q) -> Self {
        let cap = floor_units(abs, self.e);
        let prec = min_opt(self.prec, Some(cap));
        Self::from_raw(self.e, self.field.clone(), self.terms.clone(), prec)
    }

    /// The known terms as an exact element.
    pub fn as_exact(&self) -> Self {
        Self::from_raw(self.e, self.field.clone(), self.terms.clone(), None)
    }

    /// Agreement up to the smaller of the two precisions.
    pub fn eq_to_precision(&self, other: &Self) -> bool {
        let d = self.sub(other);
        d.terms.is_empty()
    }

    /// Agreement of the two elements at least up to valuation `bound`.
    pub fn agrees_to(&self, other: &Self, bound: Q) -> bool {
        let d = self.sub(other);
        d.valuation().at_least(bound)
    }

    /// Smallest d such that every coefficient lies in F_{q^d}, where q = p^base_degree.
    pub fn residue_degree(&self, base_degree: u32) -> u32 {
        let dp = self
            .terms
            .iter()
            .map(|&(_, c)| self.field.subfield_degree(c))
            .fold(1u32, |acc, d| acc.lcm(&d));
        dp / dp.gcd(&base_degree)
    }

    /// Deterministic total order: higher valuation first (exact zero first), then
    /// term by term on (exponent, coefficient code).
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        let (a, b) = self.align(other);
        for (x, y) in a.terms.iter().zip(&b.terms) {
            let o = y.0.cmp(&x.0).then(x.1.cmp(&y.1));
            if o != Ordering::Equal {
                return o;
            }
        }
        a.terms.len().cmp(&b.terms.len())
    }

    pub fn to_json(&self) -> SeriesJson {
        let val = self.terms.first().map(|t| t.0);
        SeriesJson {
            e: self.e,
            field: self.field.spec(),
            val_offset: val,
            terms: self
                .terms
                .iter()
                .map(|&(k, c)| (k - val.unwrap_or(0), c))
                .collect(),
            precision: self.prec,
            valuation: self.valuation().to_string(),
        }
    }
}

fn merge_sorted(f: &FieldDescriptor, sorted: Vec<(i64, u32)>) -> Vec<(i64, u32)> {
    let mut out: Vec<(i64, u32)> = Vec::with_capacity(sorted.len());
    for (k, c) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 = f.add(last.1, c),
            _ => out.push((k, c)),
        }
        if out.last().is_some_and(|t| t.1 == 0) {
            out.pop();
        }
    }
    out
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl fmt::Debug for Puiseux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Puiseux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() && self.prec.is_none() {
            return write!(f, "0");
        }
        for (i, &(k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let coeffs = self.field.coeffs(c);
            let cs = if self.field.degree() == 1 {
                coeffs[0].to_string()
            } else {
                format!("{coeffs:?}")
            };
            write!(f, "{}*u^({})", cs, q_str(Q::new(k, self.e as i64)))?;
        }
        if let Some(p) = self.prec {
            if !self.terms.is_empty() {
                write!(f, " + ")?;
            }
            write!(f, "O(u^({}))", q_str(Q::new(p, self.e as i64)))?;
        }
        Ok(())
    }
}

/// Plain serialized form of a series element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub e: u32,
    pub field: FieldSpec,
    /// Numerator (over e) of the leading exponent; absent for zero.
    pub val_offset: Option<i64>,
    /// (k, code): coefficient `code` at exponent (val_offset + k)/e.
    pub terms: Vec<(i64, u32)>,
    /// Absolute precision numerator over e; absent when exact.
    pub precision: Option<i64>,
    pub valuation: String,
}

impl std::ops::Add for &Puiseux {
    type Output = Puiseux;
    fn add(self, rhs: &Puiseux) -> Puiseux {
        Puiseux::add(self, rhs)
    }
}
impl std::ops::Sub for &Puiseux {
    type Output = Puiseux;
    fn sub(self, rhs: &Puiseux) -> Puiseux {
        Puiseux::sub(self, rhs)
    }
}
impl std::ops::Mul for &Puiseux {
    type Output = Puiseux;
    fn mul(self, rhs: &Puiseux) -> Puiseux {
        Puiseux::mul(self, rhs)
    }
}
impl std::ops::Neg for &Puiseux {
    type Output = Puiseux;
    fn neg(self) -> Puiseux {
        Puiseux::neg(self)
    }
}
