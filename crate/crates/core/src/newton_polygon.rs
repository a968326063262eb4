//! Newton polygons of additive polynomials.
//!
//! Points are (X-degree, valuation of the coefficient). A segment of slope s
//! and length l accounts for l roots of valuation -s (root valuation is minus
//! the slope).

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field_tower::{
    canonical_inclusion, compositum, q_str, same_field, FieldDescriptor, FieldSpec, Puiseux,
    Valuation, Q,
};
use crate::skew::AdditivePoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolygonError {
    #[error("all coefficients are zero")]
    AllZero,
    #[error("cannot divide by X: the constant term is nonzero")]
    ConstantTerm,
    #[error("degenerate polygon (a single point)")]
    Degenerate,
    #[error("coefficient of X^{0} is zero only to precision {1}, too close to the hull")]
    Ambiguous(u64, String),
}

/// Face polynomial sum coeff_k T^k over a finite field (sparse, k ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacePoly {
    pub field: Arc<FieldDescriptor>,
    pub terms: Vec<(u64, u32)>,
}

impl FacePoly {
    pub fn degree(&self) -> u64 {
        self.terms.last().map_or(0, |t| t.0)
    }

    pub fn eval(&self, z: u32) -> u32 {
        let f = &self.field;
        self.terms
            .iter()
            .fold(0, |acc, &(k, c)| f.add(acc, f.mul(c, f.pow(z, k))))
    }

    /// The same polynomial over a canonical extension.
    pub fn lift(&self, field: &Arc<FieldDescriptor>) -> FacePoly {
        if same_field(field, &self.field) {
            return self.clone();
        }
        let m = canonical_inclusion(&self.field, field).expect("field extension");
        FacePoly {
            field: field.clone(),
            terms: self
                .terms
                .iter()
                .map(|&(k, c)| (k, m.apply_code(c)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub slope: Q,
    pub length: u64,
    pub start: (u64, Q),
    pub end: (u64, Q),
    pub face_poly: FacePoly,
}

impl Segment {
    /// Valuation of the roots this segment accounts for.
    pub fn root_valuation(&self) -> Q {
        -self.slope
    }
}

#[derive(Debug, Clone)]
pub struct NewtonPolygon {
    pub points: Vec<(u64, Q)>,
    pub segments: Vec<Segment>,
    /// True for the polygon of f(X)/X.
    pub divided: bool,
}

/// Indices of the vertices of the lower convex hull of points sorted by x
/// (distinct x). Collinear interior points are not vertices.
pub fn lower_hull(points: &[(u64, Q)]) -> Vec<usize> {
    let slope = |a: usize, b: usize| {
        let (xa, ya) = points[a];
        let (xb, yb) = points[b];
        (yb - ya) / Q::from_integer(xb as i64 - xa as i64)
    };
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..points.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if slope(a, b) >= slope(b, i) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

fn x_of(q: u64, i: usize, divided: bool) -> u64 {
    let x = q.pow(i as u32);
    if divided {
        x - 1
    } else {
        x
    }
}

/// Coefficients of f indexed by polygon x-coordinate (constant at x = 0 when
/// not dividing by X).
fn indexed_coeffs(
    f: &AdditivePoly,
    divide_by_x: bool,
) -> Result<Vec<(u64, &Puiseux)>, PolygonError> {
    let mut out = Vec::new();
    if divide_by_x {
        if !f.constant().is_exact_zero() {
            return Err(PolygonError::ConstantTerm);
        }
    } else {
        out.push((0, f.constant()));
    }
    for (i, c) in f.coeffs().iter().enumerate() {
        out.push((x_of(f.q(), i, divide_by_x), c));
    }
    Ok(out)
}

pub fn polygon_of(f: &AdditivePoly, divide_by_x: bool) -> Result<NewtonPolygon, PolygonError> {
    let coeffs = indexed_coeffs(f, divide_by_x)?;
    let points: Vec<(u64, Q)> = coeffs
        .iter()
        .filter_map(|(x, c)| c.valuation().finite().map(|v| (*x, v)))
        .collect();
    if points.is_empty() {
        return Err(PolygonError::AllZero);
    }
    let hull = lower_hull(&points);
    let mut segments = Vec::with_capacity(hull.len().saturating_sub(1));
    for w in hull.windows(2) {
        let (start, end) = (points[w[0]], points[w[1]]);
        let length = end.0 - start.0;
        let slope = (end.1 - start.1) / Q::from_integer(length as i64);
        segments.push(Segment {
            slope,
            length,
            start,
            end,
            face_poly: face_from_coeffs(&coeffs, start, end.0, slope),
        });
    }
    let poly = NewtonPolygon {
        points,
        segments,
        divided: divide_by_x,
    };
    // coefficients known only to be zero below some bound must not be able to
    // touch the hull
    for (x, c) in &coeffs {
        if let Valuation::AtLeast(b) = c.valuation() {
            match poly.hull_value(*x) {
                Some(h) if b > h => {}
                _ => return Err(PolygonError::Ambiguous(*x, q_str(b))),
            }
        }
    }
    Ok(poly)
}

impl NewtonPolygon {
    /// Height of the hull at x, if x lies within its horizontal range.
    pub fn hull_value(&self, x: u64) -> Option<Q> {
        if self.segments.is_empty() {
            let p = self.points.first()?;
            return (p.0 == x).then_some(p.1);
        }
        self.segments
            .iter()
            .find(|s| s.start.0 <= x && x <= s.end.0)
            .map(|s| s.start.1 + s.slope * Q::from_integer(x as i64 - s.start.0 as i64))
    }

    pub fn to_json(&self) -> PolygonJson {
        PolygonJson {
            divided_by_x: self.divided,
            points: self.points.iter().map(|&(x, y)| (x, q_str(y))).collect(),
            segments: self
                .segments
                .iter()
                .map(|s| SegmentJson {
                    slope: q_str(s.slope),
                    length: s.length,
                    start: (s.start.0, q_str(s.start.1)),
                    end: (s.end.0, q_str(s.end.1)),
                    root_valuation: q_str(s.root_valuation()),
                    face_field: s.face_poly.field.spec(),
                    face_terms: s.face_poly.terms.clone(),
                })
                .collect(),
        }
    }
}

/// (valuation, multiplicity) per segment.
pub fn root_valuations(p: &NewtonPolygon) -> Result<Vec<(Q, u64)>, PolygonError> {
    if p.segments.is_empty() {
        return Err(PolygonError::Degenerate);
    }
    Ok(p.segments
        .iter()
        .map(|s| (s.root_valuation(), s.length))
        .collect())
}

/// Leading coefficients of the terms of f lying on s, as a polynomial in T
/// with exponents relative to the segment start.
pub fn face_polynomial(
    p: &NewtonPolygon,
    s: &Segment,
    f: &AdditivePoly,
) -> Result<FacePoly, PolygonError> {
    let coeffs = indexed_coeffs(f, p.divided)?;
    Ok(face_from_coeffs(&coeffs, s.start, s.end.0, s.slope))
}

fn face_from_coeffs(coeffs: &[(u64, &Puiseux)], start: (u64, Q), end_x: u64, slope: Q) -> FacePoly {
    let on: Vec<(u64, &Puiseux)> = coeffs
        .iter()
        .filter(|(x, c)| {
            *x >= start.0
                && *x <= end_x
                && c.valuation().finite()
                    == Some(start.1 + slope * Q::from_integer(*x as i64 - start.0 as i64))
        })
        .map(|(x, c)| (*x, *c))
        .collect();
    let mut field = on[0].1.field().clone();
    for (_, c) in &on[1..] {
        if !same_field(&field, c.field()) {
            field = compositum(&field, c.field()).expect("supported compositum");
        }
    }
    let terms = on
        .iter()
        .map(|(x, c)| {
            let lc = c.leading_coeff().expect("nonzero on the hull");
            let code = if same_field(lc.field(), &field) {
                lc.code()
            } else {
                canonical_inclusion(lc.field(), &field)
                    .expect("extension")
                    .apply_code(lc.code())
            };
            (x - start.0, code)
        })
        .collect();
    FacePoly { field, terms }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonJson {
    pub divided_by_x: bool,
    pub points: Vec<(u64, String)>,
    pub segments: Vec<SegmentJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentJson {
    pub slope: String,
    pub length: u64,
    pub start: (u64, String),
    pub end: (u64, String),
    pub root_valuation: String,
    pub face_field: FieldSpec,
    pub face_terms: Vec<(u64, u32)>,
}
