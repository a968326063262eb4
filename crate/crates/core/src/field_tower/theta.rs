use std::fmt;
use std::sync::Arc;

use super::field::{FieldDescriptor, FqElement};
use super::rational::Q;
use super::series::{Puiseux, SeriesError};

/// A polynomial in theta over a finite field, coefficients low degree first.
#[derive(Clone, PartialEq, Eq)]
pub struct ThetaPoly {
    field: Arc<FieldDescriptor>,
    coeffs: Vec<FqElement>,
}

impl ThetaPoly {
    pub fn new(field: &Arc<FieldDescriptor>, coeffs: Vec<FqElement>) -> Self {
        let mut p = ThetaPoly {
            field: field.clone(),
            coeffs,
        };
        p.trim();
        p
    }

    /// From integer coefficients reduced mod p.
    pub fn from_ints(field: &Arc<FieldDescriptor>, ints: &[i64]) -> Self {
        let p = field.p() as i64;
        let coeffs = ints
            .iter()
            .map(|&c| FqElement::new(field.clone(), c.rem_euclid(p) as u32))
            .collect();
        Self::new(field, coeffs)
    }

    pub fn zero(field: &Arc<FieldDescriptor>) -> Self {
        Self::new(field, Vec::new())
    }

    pub fn constant(c: FqElement) -> Self {
        let f = c.field().clone();
        Self::new(&f, vec![c])
    }

    /// theta^k
    pub fn theta_pow(field: &Arc<FieldDescriptor>, k: usize) -> Self {
        let mut coeffs = vec![FqElement::zero(field); k + 1];
        coeffs[k] = FqElement::one(field);
        Self::new(field, coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn field(&self) -> &Arc<FieldDescriptor> {
        &self.field
    }
    pub fn coeffs(&self) -> &[FqElement] {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let z = FqElement::zero(&self.field);
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&z);
                let b = other.coeffs.get(i).unwrap_or(&z);
                a + b
            })
            .collect();
        Self::new(&self.field, coeffs)
    }

    pub fn neg(&self) -> Self {
        Self::new(&self.field, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(&self.field);
        }
        let mut out =
            vec![FqElement::zero(&self.field); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self::new(&self.field, out)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(FqElement::one(&self.field));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact series of this polynomial (valuation = -degree).
    pub fn to_series(&self) -> Puiseux {
        Puiseux::from_theta_poly(&self.coeffs, &self.field)
    }
}

impl fmt::Debug for ThetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ThetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let cs = if self.field.degree() == 1 {
                c.code().to_string()
            } else {
                format!("{:?}", c.coeffs())
            };
            match i {
                0 => write!(f, "{cs}")?,
                1 => write!(f, "{cs}*theta")?,
                _ => write!(f, "{cs}*theta^{i}")?,
            }
        }
        Ok(())
    }
}

/// Laurent expansion of num/den in u = 1/theta with `precision` known terms
/// beyond the leading one. Monomial denominators give exact results.
pub fn series_from_rational(
    num: &ThetaPoly,
    den: &ThetaPoly,
    precision: u32,
) -> Result<Puiseux, SeriesError> {
    if den.is_zero() {
        return Err(SeriesError::DivisionByZero);
    }
    let n = num.to_series();
    let d = den.to_series();
    let rel = Q::from_integer(precision as i64);
    let inv = d.inv(rel)?;
    Ok(n.mul(&inv))
}
