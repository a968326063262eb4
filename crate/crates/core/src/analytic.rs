//! Truncated exponential and logarithm of a Drinfeld module, and periods
//! recovered from division towers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field_tower::{
    serde_q, serde_q_opt, Puiseux, SeriesError, SeriesJson, ThetaPoly, Valuation, Q,
};
use crate::skew::{to_additive, AdditivePoly, DrinfeldModule};
use crate::torsion_tower::Tower;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyticError {
    #[error("count must be at least 1")]
    EmptySeries,
    #[error("log does not converge at any tower level (need a deeper tower)")]
    NoConvergence,
    #[error("truncation inadequate: term valuations still below {0} at the cutoff")]
    Truncation(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Coefficients of exp (alpha) and log (beta), both starting with 1.
#[derive(Debug, Clone)]
pub struct ExpLogSeries {
    pub alpha: Vec<Puiseux>,
    pub beta: Vec<Puiseux>,
    pub count: usize,
    /// Relative precision each coefficient is expanded to.
    pub rel: Q,
    q: u64,
}

impl ExpLogSeries {
    pub fn new(d: &DrinfeldModule, count: usize, rel: Q) -> Result<Self, AnalyticError> {
        if count == 0 {
            return Err(AnalyticError::EmptySeries);
        }
        let mut s = ExpLogSeries {
            alpha: vec![Puiseux::one(d.base())],
            beta: vec![Puiseux::one(d.base())],
            count: 1,
            rel,
            q: d.q(),
        };
        s.extend_to(d, count)?;
        Ok(s)
    }

    pub fn extend_to(&mut self, d: &DrinfeldModule, count: usize) -> Result<(), AnalyticError> {
        while self.count < count {
            let k = self.count;
            let a = exp_step(d, &self.alpha, k, self.rel)?;
            self.alpha.push(a);
            let b = log_step(self.q, &self.alpha, &self.beta, k);
            self.beta.push(b);
            self.count += 1;
        }
        Ok(())
    }

    pub fn exp_poly(&self) -> AdditivePoly {
        AdditivePoly::new(
            self.q,
            self.alpha.clone(),
            Puiseux::zero(self.alpha[0].field()),
        )
    }

    pub fn log_poly(&self) -> AdditivePoly {
        AdditivePoly::new(
            self.q,
            self.beta.clone(),
            Puiseux::zero(self.beta[0].field()),
        )
    }
}

fn theta_q_pow_minus_theta(d: &DrinfeldModule, qk: u64) -> Puiseux {
    let f = d.base();
    Puiseux::monomial(
        &crate::field_tower::FqElement::one(f),
        Q::from_integer(-(qk as i64)),
    )
    .sub(&Puiseux::theta(f))
}

/// alpha_k (theta^(q^k) - theta) = sum_{i=1}^{min(r,k)} a_i alpha_(k-i)^(q^i)
fn exp_step(
    d: &DrinfeldModule,
    alpha: &[Puiseux],
    k: usize,
    rel: Q,
) -> Result<Puiseux, AnalyticError> {
    let q = d.q();
    let mut num = Puiseux::zero(d.base());
    let mut qi = 1u64;
    for (i, a) in d.a().iter().enumerate().take(k) {
        qi *= q;
        if !a.is_exact_zero() {
            num = num.add(&a.mul(&alpha[k - 1 - i].frobenius(qi)));
        }
    }
    if num.is_exact_zero() {
        return Ok(num);
    }
    let den = theta_q_pow_minus_theta(d, q.pow(k as u32));
    let num = if num.is_exact() {
        match num.valuation() {
            Valuation::Finite(v) => num.truncate(v + rel),
            _ => num,
        }
    } else {
        num
    };
    Ok(num.div(&den, rel)?)
}

/// beta_n = -sum_{k=1}^n alpha_k beta_(n-k)^(q^k)
fn log_step(q: u64, alpha: &[Puiseux], beta: &[Puiseux], n: usize) -> Puiseux {
    let mut acc = Puiseux::zero(alpha[0].field());
    let mut qk = 1u64;
    for k in 1..=n {
        qk *= q;
        if !alpha[k].is_exact_zero() && !beta[n - k].is_exact_zero() {
            acc = acc.add(&alpha[k].mul(&beta[n - k].frobenius(qk)));
        }
    }
    acc.neg()
}

pub fn exp_coefficients(
    d: &DrinfeldModule,
    count: usize,
    rel: Q,
) -> Result<ExpLogSeries, AnalyticError> {
    ExpLogSeries::new(d, count, rel)
}

pub fn log_coefficients(
    d: &DrinfeldModule,
    count: usize,
    rel: Q,
) -> Result<ExpLogSeries, AnalyticError> {
    ExpLogSeries::new(d, count, rel)
}

/// v(c_k) + q^k v(y) for the nonzero coefficients, in order.
pub fn term_valuations(coeffs: &[Puiseux], q: u64, y: &Puiseux) -> Option<Vec<Q>> {
    let vy = y.valuation().finite()?;
    let mut out = Vec::new();
    let mut qk = 1i64;
    for c in coeffs {
        if let Some(vc) = c.valuation().finite() {
            out.push(vc + vy * Q::from_integer(qk));
        }
        qk = qk.saturating_mul(q as i64);
    }
    Some(out)
}

/// Term valuations of log at y strictly increase and the last one exceeds
/// `bound`, so the dropped tail lies beyond it.
pub fn convergence_ok(series: &ExpLogSeries, y: &Puiseux, bound: Q) -> bool {
    if y.is_exact_zero() {
        return true;
    }
    let Some(t) = term_valuations(&series.beta, series.q, y) else {
        return false;
    };
    t.windows(2).all(|w| w[0] < w[1]) && t.last().is_some_and(|&l| l > bound)
}

/// Last term valuation of exp at x exceeds `bound` and is still increasing.
fn exp_tail_ok(series: &ExpLogSeries, x: &Puiseux, bound: Q) -> bool {
    if x.is_exact_zero() {
        return true;
    }
    let Some(t) = term_valuations(&series.alpha, series.q, x) else {
        return false;
    };
    match t.as_slice() {
        [.., a, b] => a < b && *b > bound,
        [b] => *b > bound,
        [] => true,
    }
}

pub fn exp_eval(series: &ExpLogSeries, x: &Puiseux, bound: Q) -> Puiseux {
    series.exp_poly().eval_below(x, bound)
}

pub fn log_eval(series: &ExpLogSeries, y: &Puiseux, bound: Q) -> Puiseux {
    series.log_poly().eval_below(y, bound)
}

/// exp(theta x) - phi_theta(exp x), computed below `bound`.
pub fn functional_equation_residual(
    d: &DrinfeldModule,
    series: &ExpLogSeries,
    x: &Puiseux,
    bound: Q,
) -> Puiseux {
    let theta = Puiseux::theta(d.base());
    let lhs = exp_eval(series, &theta.mul(x), bound);
    let phi = to_additive(&d.phi_theta(), &Puiseux::zero(d.base()));
    let lowest = phi
        .coeffs()
        .iter()
        .filter_map(|c| c.valuation().lower_bound())
        .fold(Q::from_integer(0), Q::min);
    let e = exp_eval(series, x, bound - lowest);
    lhs.sub(&phi.eval_below(&e, bound))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodCandidate {
    pub lambda: SeriesJson,
    #[serde(with = "serde_q")]
    pub valuation: Q,
    /// Tower level n of the element e_n the period came from.
    pub level: u32,
    /// Lower bound for v(exp(lambda)) at the working truncation.
    #[serde(with = "serde_q_opt")]
    pub residual: Option<Q>,
    #[serde(with = "serde_q")]
    pub bound: Q,
    pub certified: bool,
    pub terms_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyticConfig {
    /// Initial number of exp/log coefficients.
    pub count: usize,
    /// Upper limit for the adaptive coefficient count.
    pub max_count: usize,
    /// Certification demands v(exp(lambda)) >= v(lambda) + cert_rel.
    #[serde(with = "serde_q")]
    pub cert_rel: Q,
    /// Relative precision of each coefficient.
    #[serde(with = "serde_q")]
    pub rel: Q,
}

impl Default for AnalyticConfig {
    fn default() -> Self {
        AnalyticConfig {
            count: 4,
            max_count: 14,
            cert_rel: Q::from_integer(8),
            rel: Q::from_integer(128),
        }
    }
}

/// Lower bound on the valuation (None for exact zero).
fn val_lower(x: &Puiseux) -> Option<Q> {
    match x.valuation() {
        Valuation::Finite(v) | Valuation::AtLeast(v) => Some(v),
        Valuation::Infinite => None,
    }
}

/// lambda = theta^(n+1) log(e_n) at the first tower level where log converges.
pub fn reconstruct_period(
    d: &DrinfeldModule,
    tower: &Tower,
    series: &mut ExpLogSeries,
    cfg: &AnalyticConfig,
) -> Result<(PeriodCandidate, Puiseux), AnalyticError> {
    for (n, e_n) in tower.elements.iter().enumerate() {
        let Some(prec) = e_n.abs_precision() else {
            continue;
        };
        // grow the log until its tail is below the precision of e_n
        while !convergence_ok(series, e_n, prec) && series.count < cfg.max_count {
            let t = term_valuations(&series.beta, series.q, e_n).unwrap_or_default();
            if t.windows(2).any(|w| w[0] >= w[1]) {
                break;
            }
            series.extend_to(d, series.count + 1)?;
        }
        if !convergence_ok(series, e_n, prec) {
            continue;
        }
        let log = log_eval(series, e_n, prec);
        let shift = Q::from_integer(-(n as i64) - 1);
        let lambda = log.shift(shift);
        let vl = lambda
            .valuation()
            .finite()
            .ok_or(AnalyticError::NoConvergence)?;
        let bound = vl + cfg.cert_rel;
        let work = lambda.abs_precision().unwrap_or(bound).max(bound);
        while !exp_tail_ok(series, &lambda, work) && series.count < cfg.max_count {
            series.extend_to(d, series.count + 1)?;
        }
        if !exp_tail_ok(series, &lambda, work) {
            return Err(AnalyticError::Truncation(crate::field_tower::q_str(work)));
        }
        let ex = exp_eval(series, &lambda, work);
        let residual = val_lower(&ex);
        let certified = residual.is_none_or(|r| r >= bound);
        let cand = PeriodCandidate {
            lambda: lambda.to_json(),
            valuation: vl,
            level: n as u32,
            residual,
            bound,
            certified,
            terms_used: series.count,
        };
        return Ok((cand, lambda));
    }
    Err(AnalyticError::NoConvergence)
}

/// exp(theta^(-n) lambda), and whether phi_(theta^n) kills it to precision.
pub fn verify_torsion_from_period(
    d: &DrinfeldModule,
    lambda: &Puiseux,
    n: u32,
    series: &mut ExpLogSeries,
    cfg: &AnalyticConfig,
) -> Result<(bool, Puiseux), AnalyticError> {
    let x = lambda.shift(Q::from_integer(n as i64));
    let work = x
        .abs_precision()
        .ok_or(AnalyticError::Truncation("exact input".into()))?;
    while !exp_tail_ok(series, &x, work) && series.count < cfg.max_count {
        series.extend_to(d, series.count + 1)?;
    }
    if !exp_tail_ok(series, &x, work) {
        return Err(AnalyticError::Truncation(crate::field_tower::q_str(work)));
    }
    let z = exp_eval(series, &x, work);
    let a = ThetaPoly::theta_pow(d.base(), n as usize);
    let g = to_additive(&d.phi_image(&a), &Puiseux::zero(d.base()));
    Ok((crate::roots::residual_ok(&g, &z), z))
}
