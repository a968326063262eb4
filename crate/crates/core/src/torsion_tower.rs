//! Division towers e_0, e_1, ... with phi_theta(e_i) = e_{i-1}, the rank-2
//! case analysis on v(a_1), v(a_2) and the degree certificates it yields.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::par_map;
use crate::field_tower::{
    q_str, serde_q, serde_q_opt, FieldDescriptor, Puiseux, SeriesJson, Valuation, Q,
};
use crate::newton_polygon::{polygon_of, root_valuations};
use crate::roots::{kernel_basis, particular_root, span, RootError, SolverConfig};
use crate::skew::{to_additive, AdditivePoly, DrinfeldModule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("level {level}: measured valuation {measured} differs from the predicted {predicted}")]
    PredictionMismatch {
        level: u32,
        measured: String,
        predicted: String,
    },
    #[error("level {level}: the root is zero to its precision")]
    LostPrecision { level: u32 },
    #[error("level {level}: phi_theta(e_i) does not reproduce e_(i-1) to precision")]
    NotAPreimage { level: u32 },
    #[error("e_0 is not a nonzero theta-torsion point")]
    NotTorsion,
    #[error("v(e_0) = {0} matches no branch of the case analysis")]
    UnknownBranch(String),
    #[error("stabilization at level {measured}, expected {expected}")]
    StabilizationMismatch { measured: u32, expected: u32 },
    #[error("tower depth {depth} does not exceed n = {n}")]
    InsufficientDepth { depth: u32, n: u32 },
    #[error("torsion basis is not independent over F_q")]
    Dependent,
    #[error("level {level}: {source}")]
    Solver {
        level: u32,
        #[source]
        source: RootError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseClassification {
    pub q: u64,
    pub case: Case,
    /// Depth parameter, case B only.
    pub n: Option<u32>,
    /// `None` when a_1 = 0.
    #[serde(with = "serde_q_opt")]
    pub v_a1: Option<Q>,
    #[serde(with = "serde_q")]
    pub v_a2: Q,
    /// (v(a_2) - q)/(q + 1)
    #[serde(with = "serde_q")]
    pub threshold: Q,
}

fn qi(x: u64) -> Q {
    Q::from_integer(x as i64)
}

pub fn classify(q: u64, v_a1: Option<Q>, v_a2: Q) -> CaseClassification {
    let threshold = (v_a2 - qi(q)) / qi(q + 1);
    let (case, n) = match v_a1 {
        Some(v1) if v1 < threshold => {
            let bound = |j: u32| (v_a2 - qi(q.pow(j + 1))) / qi(q + 1);
            let mut n = 0u32;
            while v1 < bound(n + 1) {
                n += 1;
            }
            (Case::B, Some(n))
        }
        _ => (Case::A, None),
    };
    CaseClassification {
        q,
        case,
        n,
        v_a1,
        v_a2,
        threshold,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub upper_divisor: u64,
    pub lower_divisor: Option<u64>,
    pub prime_to_q: bool,
    pub note: Option<String>,
}

pub fn degree_bounds(c: &CaseClassification) -> BoundCertificate {
    let q = c.q;
    match c.case {
        Case::A => BoundCertificate {
            upper_divisor: (q * q - 1) * (q * q - q),
            lower_divisor: None,
            prime_to_q: false,
            note: None,
        },
        Case::B => {
            let n = c.n.expect("case B has n");
            let qn1 = q.pow(n + 1);
            let diff = c.v_a1.expect("case B has a_1") - c.v_a2;
            let (prime_to_q, note) = if diff.is_integer() {
                let d = diff.numer().unsigned_abs();
                (d.gcd(&q) == 1, None)
            } else {
                (
                    false,
                    Some(
                        "lower bound not certified: v(a_1) - v(a_2) is not an integer".to_string(),
                    ),
                )
            };
            BoundCertificate {
                upper_divisor: (q - 1) * (q - 1) * qn1,
                lower_divisor: prime_to_q.then_some(qn1),
                prime_to_q,
                note,
            }
        }
    }
}

/// Which family of theta-torsion points a tower starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Rank 2, case a.
    A,
    /// Rank 2, case b, v(e_0) = -(v(a_1)+1)/(q-1).
    Shallow,
    /// Rank 2, case b, v(e_0) = (v(a_1)-v(a_2))/(q(q-1)).
    Steep,
    /// Rank 1.
    Rank1,
    /// No closed form (rank 3 and up).
    Unpredicted,
}

/// v(e_0), ..., v(e_depth) along a branch.
pub fn predicted_valuations(c: &CaseClassification, branch: Branch, depth: u32) -> Vec<Q> {
    let q = c.q;
    let one = Q::from_integer(1);
    let steps_from = |v0: Q| (0..=depth).map(|i| v0 + qi(i as u64)).collect::<Vec<_>>();
    match branch {
        Branch::A => steps_from(-(c.v_a2 + one) / qi(q * q - 1)),
        Branch::Shallow => steps_from(-(c.v_a1.expect("a_1 nonzero") + one) / qi(q - 1)),
        Branch::Steep => {
            let v1 = c.v_a1.expect("a_1 nonzero");
            let n = c.n.unwrap_or(0);
            let mut out = Vec::with_capacity(depth as usize + 1);
            for i in 0..=depth {
                let v = if i <= n {
                    let qi1 = qi(q.pow(i + 1));
                    (v1 * (one + qi(q) - qi1) - c.v_a2) / (qi1 * qi(q - 1))
                } else {
                    out[i as usize - 1] + one
                };
                out.push(v);
            }
            out
        }
        Branch::Rank1 | Branch::Unpredicted => Vec::new(),
    }
}

/// Rank 1: v(e_i) = -(v(a_1)+1)/(q-1) + i.
pub fn predicted_rank1(q: u64, v_a1: Q, depth: u32) -> Vec<Q> {
    let v0 = -(v_a1 + Q::from_integer(1)) / qi(q - 1);
    (0..=depth).map(|i| v0 + qi(i as u64)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerLevel {
    pub index: u32,
    pub root: SeriesJson,
    #[serde(with = "serde_q")]
    pub measured: Q,
    #[serde(with = "serde_q_opt")]
    pub predicted: Option<Q>,
    /// Absolute precision of the computed root.
    #[serde(with = "serde_q_opt")]
    pub precision: Option<Q>,
    /// lcm of the valuation denominators of e_0, ..., e_i.
    pub ramification: u32,
    /// lcm of the residue degrees over F_q of e_0, ..., e_i.
    pub residue_degree: u32,
    /// e_i was found without enlarging the field generated so far.
    pub in_previous_field: bool,
    /// The expansion of e_i stopped at the ramification cap.
    pub capped: bool,
    /// Valuations of all solutions of phi_theta(X) = e_(i-1), with counts.
    pub fiber: Vec<(String, u64)>,
    /// The fiber agrees with the polygon of phi_theta(X) - e_(i-1).
    pub fiber_matches_polygon: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerReport {
    pub branch: Branch,
    pub classification: Option<CaseClassification>,
    pub bounds: Option<BoundCertificate>,
    pub levels: Vec<TowerLevel>,
    pub stabilization_level: Option<u32>,
    /// lcm of the exponent denominators used to represent the elements.
    pub series_ramification: u32,
}

impl TowerReport {
    pub fn ramification(&self) -> u32 {
        self.levels.last().map_or(1, |l| l.ramification)
    }
    pub fn residue_degree(&self) -> u32 {
        self.levels.last().map_or(1, |l| l.residue_degree)
    }
    pub fn measured(&self) -> Vec<Q> {
        self.levels.iter().map(|l| l.measured).collect()
    }
}

/// A tower together with its elements.
#[derive(Debug, Clone)]
pub struct Tower {
    pub report: TowerReport,
    pub elements: Vec<Puiseux>,
}

fn base_degree(d: &DrinfeldModule) -> u32 {
    d.base().degree()
}

fn phi_theta_additive(d: &DrinfeldModule) -> AdditivePoly {
    to_additive(&d.phi_theta(), &Puiseux::zero(d.base()))
}

/// Case analysis for rank 2 (None otherwise).
pub fn classify_module(d: &DrinfeldModule) -> Option<CaseClassification> {
    if d.rank() != 2 {
        return None;
    }
    let v2 = d.valuation_of(2).finite()?;
    let v1 = d.valuation_of(1).finite();
    Some(classify(d.q(), v1, v2))
}

/// r roots of phi_theta, linearly independent over F_q (lexicographic-first
/// choice per polygon segment, largest valuation first).
pub fn theta_torsion_basis(
    d: &DrinfeldModule,
    cfg: &SolverConfig,
) -> Result<Vec<Puiseux>, TowerError> {
    let g = phi_theta_additive(d);
    let kb = kernel_basis(&g, cfg).map_err(|source| TowerError::Solver { level: 0, source })?;
    let basis: Vec<Puiseux> = kb.into_iter().flat_map(|(_, b)| b).collect();
    let all = span(&basis, d.base(), cfg.mode);
    // differences of span elements lie in the span: only the empty combination may vanish
    if all.iter().filter(|x| !x.is_nonzero()).count() != 1 {
        return Err(TowerError::Dependent);
    }
    Ok(basis)
}

fn branch_of(
    d: &DrinfeldModule,
    c: Option<&CaseClassification>,
    v0: Q,
) -> Result<Branch, TowerError> {
    if d.rank() == 1 {
        return Ok(Branch::Rank1);
    }
    let Some(c) = c else {
        return Ok(Branch::Unpredicted);
    };
    let candidates: &[Branch] = match c.case {
        Case::A => &[Branch::A],
        Case::B => &[Branch::Steep, Branch::Shallow],
    };
    candidates
        .iter()
        .copied()
        .find(|&b| predicted_valuations(c, b, 0)[0] == v0)
        .ok_or_else(|| TowerError::UnknownBranch(q_str(v0)))
}

fn fiber_valuations(e_i: &Puiseux, kernel: &[Puiseux]) -> Vec<(String, u64)> {
    let mut counts: BTreeMap<(u8, Q), u64> = BTreeMap::new();
    for t in kernel {
        let key = match e_i.add(t).valuation() {
            Valuation::Finite(v) => (0, v),
            Valuation::AtLeast(v) => (1, v),
            Valuation::Infinite => (2, Q::from_integer(0)),
        };
        *counts.entry(key).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|((kind, v), n)| {
            let s = match kind {
                0 => q_str(v),
                1 => format!(">={}", q_str(v)),
                _ => "inf".to_string(),
            };
            (s, n)
        })
        .collect()
}

/// Build e_1, ..., e_depth above the theta-torsion point e0.
pub fn build_tower(
    d: &DrinfeldModule,
    e0: &Puiseux,
    depth: u32,
    cfg: &SolverConfig,
) -> Result<Tower, TowerError> {
    let g = phi_theta_additive(d);
    let v0 = e0.valuation().finite().ok_or(TowerError::NotTorsion)?;
    if !crate::roots::residual_ok(&g, e0) {
        return Err(TowerError::NotTorsion);
    }
    let basis = theta_torsion_basis(d, cfg)?;
    let kernel = span(&basis, d.base(), cfg.mode);
    let classification = classify_module(d);
    let bounds = classification.as_ref().map(degree_bounds);
    let branch = branch_of(d, classification.as_ref(), v0)?;
    let predicted = match (branch, &classification) {
        (Branch::Rank1, _) => predicted_rank1(
            d.q(),
            d.valuation_of(1).finite().expect("a_1 nonzero"),
            depth,
        ),
        (Branch::Unpredicted, _) => Vec::new(),
        (b, Some(c)) => predicted_valuations(c, b, depth),
        (_, None) => Vec::new(),
    };
    let k = base_degree(d);
    let check = |level: u32, measured: Q| -> Result<(), TowerError> {
        match predicted.get(level as usize) {
            Some(&p) if p != measured => Err(TowerError::PredictionMismatch {
                level,
                measured: q_str(measured),
                predicted: q_str(p),
            }),
            _ => Ok(()),
        }
    };
    check(0, v0)?;
    let mut ram = *v0.denom() as u32;
    let mut res = e0.residue_degree(k);
    let mut series_e = e0.normalize_e().e();
    let mut levels = vec![TowerLevel {
        index: 0,
        root: e0.to_json(),
        measured: v0,
        predicted: predicted.first().copied(),
        precision: e0.abs_precision(),
        ramification: ram,
        residue_degree: res,
        in_previous_field: true,
        capped: false,
        fiber: Vec::new(),
        fiber_matches_polygon: true,
    }];
    let mut elements = vec![e0.clone()];
    for level in 1..=depth {
        let prev = elements.last().unwrap().clone();
        let solved = particular_root(&g, &prev, cfg)
            .map_err(|source| TowerError::Solver { level, source })?;
        let e_i = solved.root;
        let measured = e_i
            .valuation()
            .finite()
            .ok_or(TowerError::LostPrecision { level })?;
        check(level, measured)?;
        // phi_theta(e_i) - e_(i-1) must vanish to the precision of both
        let inh = g.with_constant(prev.neg());
        if !crate::roots::residual_ok(&inh, &e_i) {
            return Err(TowerError::NotAPreimage { level });
        }
        let in_prev = !solved.capped
            && solved.steps.iter().all(|s| {
                s.multiplicity == 1
                    && res.is_multiple_of(s.residue_degree)
                    && ram as i64 % *s.valuation.denom() == 0
            });
        ram = ram.lcm(&(*measured.denom() as u32));
        res = res.lcm(&e_i.residue_degree(k));
        series_e = series_e.lcm(&e_i.normalize_e().e());
        let fiber = fiber_valuations(&e_i, &kernel);
        let fiber_matches_polygon = match polygon_of(&inh, false)
            .ok()
            .and_then(|p| root_valuations(&p).ok())
        {
            Some(mut want) => {
                want.sort();
                let mut got: Vec<(Q, u64)> = Vec::new();
                for t in &kernel {
                    match e_i.add(t).valuation().finite() {
                        Some(v) => match got.iter_mut().find(|x| x.0 == v) {
                            Some(x) => x.1 += 1,
                            None => got.push((v, 1)),
                        },
                        None => got.push((Q::from_integer(i64::MAX), 1)),
                    }
                }
                got.sort();
                got == want
            }
            None => false,
        };
        levels.push(TowerLevel {
            index: level,
            root: e_i.to_json(),
            measured,
            predicted: predicted.get(level as usize).copied(),
            precision: e_i.abs_precision(),
            ramification: ram,
            residue_degree: res,
            in_previous_field: in_prev,
            capped: solved.capped,
            fiber,
            fiber_matches_polygon,
        });
        elements.push(e_i);
    }
    let stabilization_level = Some(
        levels
            .iter()
            .rposition(|l| !l.in_previous_field)
            .map_or(0, |i| i as u32),
    );
    Ok(Tower {
        report: TowerReport {
            branch,
            classification,
            bounds,
            levels,
            stabilization_level,
            series_ramification: series_e,
        },
        elements,
    })
}

/// The level after which no level enlarges the field, checked against the
/// level the case analysis predicts (n on the steep branch, else 0).
pub fn stabilization_check(report: &TowerReport) -> Result<u32, TowerError> {
    let measured = report.stabilization_level.unwrap_or(0);
    let depth = report.levels.len().saturating_sub(1) as u32;
    let expected = match (report.branch, &report.classification) {
        (Branch::Steep, Some(c)) => c.n.unwrap_or(0),
        (Branch::Unpredicted, _) => return Ok(measured),
        _ => 0,
    };
    if depth <= expected {
        return Err(TowerError::InsufficientDepth { depth, n: expected });
    }
    if measured != expected {
        return Err(TowerError::StabilizationMismatch { measured, expected });
    }
    Ok(measured)
}

/// Towers over every basis element of phi[theta], built concurrently.
pub fn build_basis_towers(
    d: &DrinfeldModule,
    depth: u32,
    cfg: &SolverConfig,
) -> Result<Vec<Tower>, TowerError> {
    let basis = theta_torsion_basis(d, cfg)?;
    par_map(cfg.mode, &basis, |e0| build_tower(d, e0, depth, cfg))
        .into_iter()
        .collect()
}

/// Extension-degree surrogate of the compositum of several towers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSurrogate {
    pub ramification: u32,
    pub residue_degree: u32,
    pub degree: u64,
}

pub fn field_surrogate(towers: &[Tower]) -> FieldSurrogate {
    let e = towers
        .iter()
        .fold(1u32, |a, t| a.lcm(&t.report.ramification()));
    let f = towers
        .iter()
        .fold(1u32, |a, t| a.lcm(&t.report.residue_degree()));
    FieldSurrogate {
        ramification: e,
        residue_degree: f,
        degree: e as u64 * f as u64,
    }
}

/// |phi[theta^k]| for k = 1..=depth, each found by solving phi_(theta^k)(X) = 0.
pub fn torsion_counts(
    d: &DrinfeldModule,
    depth: u32,
    cfg: &SolverConfig,
) -> Result<Vec<u64>, TowerError> {
    let base: Arc<FieldDescriptor> = d.base().clone();
    (1..=depth)
        .map(|k| {
            let a = crate::field_tower::ThetaPoly::theta_pow(&base, k as usize);
            let g = to_additive(&d.phi_image(&a), &Puiseux::zero(&base));
            let batches = crate::roots::all_roots(&g, cfg)
                .map_err(|source| TowerError::Solver { level: k, source })?;
            Ok(batches.iter().map(|b| b.roots.len() as u64).sum())
        })
        .collect()
}

#[cfg(test)]
mod tests;
