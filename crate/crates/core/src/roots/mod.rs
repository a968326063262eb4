//! Roots of additive polynomials over the Puiseux field.
//!
//! Leading terms come from face polynomials of the Newton polygon. For an
//! additive g and the equation g(Z) = b, substituting Z = zeta u^nu + Z'
//! leaves g(Z') = b - g(zeta u^nu), so the expansion is a loop on the
//! residual. Once the remaining root is separated from every kernel element
//! (its valuation exceeds the largest kernel valuation) plain Newton steps
//! x <- x - (g(x) - b)/c_0 take over.

mod face;

use std::sync::Arc;

use num_integer::Integer;
use thiserror::Error;

pub use face::{find_roots, FaceRoots, Want};

use crate::exec::{par_map, par_range, Mode};
use crate::field_tower::{
    canonical_inclusion, Caps, FieldDescriptor, FieldError, FqElement, Puiseux, SeriesError,
    Valuation, Q,
};
use crate::newton_polygon::{polygon_of, PolygonError, Segment};
use crate::skew::AdditivePoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootError {
    #[error("linear coefficient c_0 is zero: the polynomial is not separable")]
    NotSeparable,
    #[error("residue extension of degree {needed} over F_q exceeds the cap {cap}")]
    ResidueCap { needed: u32, cap: u32 },
    #[error("initial approximation is not separated from the other roots")]
    NonSeparated,
    #[error("no convergence after {0} iterations")]
    Stagnation(usize),
    #[error("found {found} roots of valuation {valuation}, the polygon predicts {expected}")]
    CountMismatch {
        valuation: String,
        found: u64,
        expected: u64,
    },
    #[error("kernel basis is not linearly independent over F_q")]
    Dependent,
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl From<FieldError> for RootError {
    fn from(e: FieldError) -> Self {
        RootError::Series(SeriesError::Field(e))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub caps: Caps,
    /// Number of exponent slots (at the leading term's denominator) to compute.
    pub terms: u32,
    pub max_iter: usize,
    pub mode: Mode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            caps: Caps::default(),
            terms: 64,
            max_iter: 4096,
            mode: Mode::Parallel,
        }
    }
}

impl SolverConfig {
    /// Absolute precision aimed for, given the leading valuation.
    pub fn target(&self, lead: Q) -> Q {
        lead + Q::new(self.terms as i64, *lead.denom())
    }
}

/// One step of the leading-term expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub valuation: Q,
    /// Multiplicity of the chosen face root.
    pub multiplicity: u64,
    /// Degree over F_q of the smallest field holding the chosen face root.
    pub residue_degree: u32,
    /// Newton iteration finished the root from here.
    pub newton: bool,
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub root: Puiseux,
    pub steps: Vec<Step>,
    /// The expansion stopped at the ramification cap (wild root).
    pub capped: bool,
}

/// A leading monomial coeff * u^exponent of some roots on a segment.
#[derive(Debug, Clone)]
pub struct LeadingTerm {
    pub coeff: FqElement,
    pub exponent: Q,
    pub multiplicity: u64,
}

#[derive(Debug, Clone)]
pub struct RootBatch {
    pub roots: Vec<Puiseux>,
    /// Segment of the polygon the roots belong to; `None` for the root 0.
    pub segment: Option<Segment>,
    pub residue_degree: u32,
    pub ramification: u32,
}

fn base_degree(g: &AdditivePoly) -> u32 {
    let q = g.q();
    let p = g.constant().field().p() as u64;
    let mut k = 0;
    let mut t = 1u64;
    while t < q {
        t *= p;
        k += 1;
    }
    k
}

fn base_field(g: &AdditivePoly) -> Arc<FieldDescriptor> {
    FieldDescriptor::canonical(g.constant().field().p(), base_degree(g)).expect("base field")
}

/// v(c_i) as (i, valuation) for the nonzero coefficients.
fn coeff_vals(g: &AdditivePoly) -> Vec<(usize, Q)> {
    g.coeffs()
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.valuation().finite().map(|v| (i, v)))
        .collect()
}

/// Largest valuation of a nonzero root of the homogeneous part.
pub fn max_kernel_valuation(g: &AdditivePoly) -> Result<Option<Q>, RootError> {
    let p = polygon_of(&g.homogeneous(), true)?;
    Ok(p.segments.first().map(|s| s.root_valuation()))
}

/// Largest valuation of a solution of g(Z) = r, for r of valuation >= bound.
fn nu_of(vals: &[(usize, Q)], q: u64, bound: Q) -> Q {
    vals.iter()
        .map(|&(i, v)| (bound - v) / Q::from_integer(q.pow(i as u32) as i64))
        .max()
        .expect("nonzero polynomial")
}

/// Residual precision needed for a root known to `target`.
fn residual_bound(vals: &[(usize, Q)], q: u64, target: Q) -> Q {
    vals.iter()
        .map(|&(i, v)| target * Q::from_integer(q.pow(i as u32) as i64) + v)
        .min()
        .expect("nonzero polynomial")
}

fn linear_coeff(g: &AdditivePoly) -> Result<&Puiseux, RootError> {
    match g.coeffs().first() {
        Some(c) if c.is_nonzero() => Ok(c),
        _ => Err(RootError::NotSeparable),
    }
}

/// Leading monomials of the roots on segment `s` of f's polygon, over the
/// smallest extension of F_q where the face polynomial splits.
pub fn initial_terms(
    f: &AdditivePoly,
    s: &Segment,
    caps: Caps,
) -> Result<Vec<LeadingTerm>, RootError> {
    let found = find_roots(&s.face_poly, base_degree(f), caps.max_s, Want::Split)?;
    let nu = s.root_valuation();
    if *nu.denom() as u32 > caps.max_e {
        return Err(SeriesError::RamificationCap(*nu.denom() as u64, caps.max_e).into());
    }
    Ok(found
        .roots
        .iter()
        .map(|&(z, m)| LeadingTerm {
            coeff: FqElement::new(found.field.clone(), z),
            exponent: nu,
            multiplicity: m,
        })
        .collect())
}

/// The solution of g(Z) = b of largest valuation, lexicographically first
/// among those, to the precision `cfg.terms` allows. `g` must be homogeneous.
pub fn particular_root(
    g: &AdditivePoly,
    b: &Puiseux,
    cfg: &SolverConfig,
) -> Result<Solved, RootError> {
    particular_root_to(g, b, None, cfg)
}

/// As `particular_root`, with an explicit absolute target precision.
pub fn particular_root_to(
    g: &AdditivePoly,
    b: &Puiseux,
    target: Option<Q>,
    cfg: &SolverConfig,
) -> Result<Solved, RootError> {
    debug_assert!(g.is_homogeneous());
    let c0 = linear_coeff(g)?.clone();
    let q = g.q();
    let k = base_degree(g);
    let vals = coeff_vals(g);
    let rho_max = max_kernel_valuation(g)?;
    let field = b.field().clone();
    let mut x = Puiseux::zero(&field);
    let mut steps = Vec::new();
    let mut target = target;
    let mut b_cur = b.clone();
    let mut residual_cap: Option<Q> = target.map(|t| residual_bound(&vals, q, t));
    if let Some(rb) = residual_cap.filter(|_| !b.is_exact_zero()) {
        b_cur = b_cur.truncate(rb);
    }
    for _ in 0..cfg.max_iter {
        match b_cur.valuation() {
            Valuation::Infinite => {
                return Ok(Solved {
                    root: x,
                    steps,
                    capped: false,
                })
            }
            Valuation::AtLeast(bound) => {
                let known = nu_of(&vals, q, bound);
                return Ok(Solved {
                    root: x.truncate(known),
                    steps,
                    capped: false,
                });
            }
            Valuation::Finite(_) => {}
        }
        let poly = polygon_of(&g.with_constant(b_cur.neg()), false)?;
        let seg = &poly.segments[0];
        let nu = seg.root_valuation();
        if target.is_none() {
            let t = cfg.target(nu);
            target = Some(t);
            let rb = residual_bound(&vals, q, t);
            residual_cap = Some(rb);
            b_cur = b_cur.truncate(rb);
            continue;
        }
        let t = target.unwrap();
        if nu >= t {
            return Ok(Solved {
                root: x.truncate(t),
                steps,
                capped: false,
            });
        }
        let e_new = (x.e() as u64)
            .lcm(&(b_cur.e() as u64))
            .lcm(&(*nu.denom() as u64));
        if e_new > cfg.caps.max_e as u64 {
            return Ok(Solved {
                root: x.truncate(nu),
                steps,
                capped: true,
            });
        }
        let found = find_roots(&seg.face_poly, k, cfg.caps.max_s, Want::AnyRoot)?;
        let (z, m) = found.roots[0];
        let zeta = FqElement::new(found.field.clone(), z);
        let rdeg = found.field.subfield_degree(z);
        let mono = Puiseux::monomial(&zeta, nu);
        let separated = rho_max.is_none_or(|r| nu > r);
        steps.push(Step {
            valuation: nu,
            multiplicity: m,
            residue_degree: rdeg.lcm(&k) / k,
            newton: separated,
        });
        x = x.add(&mono);
        if separated {
            let root = newton(g, b, x, &c0, t, residual_cap.unwrap(), &vals, cfg)?;
            return Ok(Solved {
                root,
                steps,
                capped: false,
            });
        }
        b_cur = b_cur.sub(&g.eval_below(&mono, residual_cap.unwrap()));
    }
    Err(RootError::Stagnation(cfg.max_iter))
}

#[allow(clippy::too_many_arguments)]
fn newton(
    g: &AdditivePoly,
    b: &Puiseux,
    mut x: Puiseux,
    c0: &Puiseux,
    target: Q,
    residual_cap: Q,
    vals: &[(usize, Q)],
    cfg: &SolverConfig,
) -> Result<Puiseux, RootError> {
    let q = g.q();
    let b = b.truncate(residual_cap);
    let v0 = c0.valuation().finite().expect("nonzero c_0");
    let mut last: Option<Q> = None;
    for _ in 0..cfg.max_iter {
        let r = g.eval_below(&x, residual_cap).sub(&b);
        match r.valuation() {
            Valuation::Infinite => return Ok(x),
            Valuation::AtLeast(bound) => return Ok(x.truncate(nu_of(vals, q, bound).min(target))),
            Valuation::Finite(vr) => {
                if last.is_some_and(|l| vr <= l) {
                    return Err(RootError::NonSeparated);
                }
                last = Some(vr);
                let dv = vr - v0;
                let delta = r.mul(&c0.inv(target - dv)?).truncate(target);
                x = x.sub(&delta).truncate(target);
            }
        }
    }
    Err(RootError::Stagnation(cfg.max_iter))
}

/// Newton lifting of an approximate root x0 of f (f(X) = sum c_i X^(q^i) + constant).
pub fn lift_root(f: &AdditivePoly, x0: &Puiseux, cfg: &SolverConfig) -> Result<Puiseux, RootError> {
    let g = f.homogeneous();
    let c0 = linear_coeff(&g)?.clone();
    let b = f.constant().neg();
    let r = f.eval(&x0.as_exact());
    let vr = match r.valuation() {
        Valuation::Finite(v) => v,
        _ => return Ok(x0.clone()),
    };
    let v0 = c0.valuation().finite().expect("nonzero c_0");
    let rho = max_kernel_valuation(&g)?;
    if rho.is_some_and(|rm| vr - v0 <= rm) {
        return Err(RootError::NonSeparated);
    }
    let lead = match x0.valuation() {
        Valuation::Finite(v) => v,
        _ => vr - v0,
    };
    let target = cfg.target(lead);
    let vals = coeff_vals(&g);
    let rb = residual_bound(&vals, g.q(), target);
    newton(
        &g,
        &b,
        x0.truncate(target).as_exact(),
        &c0,
        target,
        rb,
        &vals,
        cfg,
    )
}

/// F_q-basis of the kernel of g, grouped by segment of the polygon of g(X)/X
/// (segments in polygon order). Deterministic: within a segment the
/// lexicographically first independent face roots are used.
pub fn kernel_basis(
    g: &AdditivePoly,
    cfg: &SolverConfig,
) -> Result<Vec<(Segment, Vec<Puiseux>)>, RootError> {
    let g = g.homogeneous();
    linear_coeff(&g)?;
    let poly = polygon_of(&g, true)?;
    let k = base_degree(&g);
    let base = base_field(&g);
    let mut out = Vec::new();
    for seg in &poly.segments {
        let found = find_roots(&seg.face_poly, k, cfg.caps.max_s, Want::Split)?;
        let zetas = independent_roots(&found, &base)?;
        let nu = seg.root_valuation();
        if *nu.denom() as u32 > cfg.caps.max_e {
            return Err(SeriesError::RamificationCap(*nu.denom() as u64, cfg.caps.max_e).into());
        }
        let items: Vec<u32> = zetas;
        let field = found.field.clone();
        let results = par_map(cfg.mode, &items, |&z| -> Result<Puiseux, RootError> {
            let mono = Puiseux::monomial(&FqElement::new(field.clone(), z), nu);
            let t = cfg.target(nu);
            let rest = particular_root_to(&g, &g.eval(&mono).neg(), Some(t), cfg)?;
            Ok(mono.add(&rest.root))
        });
        let basis = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        out.push((seg.clone(), basis));
    }
    Ok(out)
}

/// Greedy lexicographically-first F_q-basis of the distinct face roots
/// together with 0 (an F_q-space for additive face polynomials).
fn independent_roots(
    found: &FaceRoots,
    base: &Arc<FieldDescriptor>,
) -> Result<Vec<u32>, RootError> {
    let f = &found.field;
    let incl = canonical_inclusion(base, f)?;
    let scalars: Vec<u32> = (0..base.size()).map(|c| incl.apply_code(c)).collect();
    let mut span: Vec<u32> = vec![0];
    let mut basis = Vec::new();
    for &(z, _) in &found.roots {
        if span.contains(&z) {
            continue;
        }
        let mut next = Vec::with_capacity(span.len() * scalars.len());
        for &s in &span {
            for &a in &scalars {
                next.push(f.add(s, f.mul(a, z)));
            }
        }
        span = next;
        basis.push(z);
    }
    let distinct = found.roots.len() as u64 + 1;
    if span.len() as u64 != distinct {
        return Err(RootError::Dependent);
    }
    Ok(basis)
}

/// All F_q-combinations sum alpha_j w_j, in lexicographic order of the
/// coefficient vectors (alpha codes, first basis element most significant).
pub fn span(basis: &[Puiseux], base: &Arc<FieldDescriptor>, mode: Mode) -> Vec<Puiseux> {
    let qn = base.size() as usize;
    let n = basis.len();
    let total = qn.pow(n as u32);
    let field = basis.first().map_or(base.clone(), |b| b.field().clone());
    par_range(mode, total, |idx| {
        let mut acc = Puiseux::zero(&field);
        let mut rest = idx;
        for j in (0..n).rev() {
            let a = (rest % qn) as u32;
            rest /= qn;
            if a != 0 {
                acc = acc.add(&basis[j].scale(&FqElement::new(base.clone(), a)));
            }
        }
        acc
    })
}

/// All roots of f, grouped by segment and checked against the polygon.
pub fn all_roots(f: &AdditivePoly, cfg: &SolverConfig) -> Result<Vec<RootBatch>, RootError> {
    let g = f.homogeneous();
    let base = base_field(f);
    let kb = kernel_basis(&g, cfg)?;
    let basis: Vec<Puiseux> = kb.iter().flat_map(|(_, b)| b.iter().cloned()).collect();
    let kernel = span(&basis, &base, cfg.mode);
    let (roots, poly) = if f.is_homogeneous() {
        (kernel, polygon_of(f, true)?)
    } else {
        let xp = particular_root(&g, &f.constant().neg(), cfg)?.root;
        let all = par_map(cfg.mode, &kernel, |w| xp.add(w));
        (all, polygon_of(f, false)?)
    };
    let mut batches = Vec::new();
    let (zeros, mut rest): (Vec<Puiseux>, Vec<Puiseux>) =
        roots.into_iter().partition(|r| !r.is_nonzero());
    if !zeros.is_empty() {
        batches.push(RootBatch {
            roots: zeros,
            segment: None,
            residue_degree: 1,
            ramification: 1,
        });
    }
    rest.sort_by(|a, b| a.lex_cmp(b));
    for seg in &poly.segments {
        let nu = seg.root_valuation();
        let (mine, others): (Vec<Puiseux>, Vec<Puiseux>) = rest
            .into_iter()
            .partition(|r| r.valuation().finite() == Some(nu));
        rest = others;
        if mine.len() as u64 != seg.length {
            return Err(RootError::CountMismatch {
                valuation: crate::field_tower::q_str(nu),
                found: mine.len() as u64,
                expected: seg.length,
            });
        }
        let k = base_degree(f);
        let residue_degree = mine
            .iter()
            .map(|r| r.residue_degree(k))
            .fold(1, |a, d| a.lcm(&d));
        let ramification = mine
            .iter()
            .map(|r| r.normalize_e().e())
            .fold(1, |a, d| a.lcm(&d));
        batches.push(RootBatch {
            roots: mine,
            segment: Some(seg.clone()),
            residue_degree,
            ramification,
        });
    }
    if let Some(r) = rest.first() {
        return Err(RootError::CountMismatch {
            valuation: r.valuation().to_string(),
            found: rest.len() as u64,
            expected: 0,
        });
    }
    Ok(batches)
}

/// The residual f(r) vanishes below the bound the precision of r allows:
/// an error of valuation P in r moves f(r) by at least min_i v(c_i) + q^i P.
pub fn residual_ok(f: &AdditivePoly, r: &Puiseux) -> bool {
    let res = f.eval(r).valuation();
    match r.abs_precision() {
        None => res == Valuation::Infinite,
        Some(p) => {
            let vals = coeff_vals(f);
            vals.is_empty() || res.at_least(residual_bound(&vals, f.q(), p))
        }
    }
}

#[cfg(test)]
mod tests;
