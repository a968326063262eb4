//! Rational functions in theta with integer coefficients: `+ - * / ^`,
//! parentheses, integers and the variable `theta`.

use std::sync::Arc;

use thiserror::Error;

use crate::field_tower::{FieldDescriptor, ThetaPoly};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at position {pos} in {input:?}")]
pub struct ExprError {
    pub input: String,
    pub pos: usize,
    pub message: String,
}

/// numerator / denominator, not reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction {
    pub num: ThetaPoly,
    pub den: ThetaPoly,
}

impl RationalFunction {
    fn poly(p: ThetaPoly) -> Self {
        let den = ThetaPoly::from_ints(p.field(), &[1]);
        RationalFunction { num: p, den }
    }
    fn add(&self, o: &Self) -> Self {
        RationalFunction {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
    }
    fn neg(&self) -> Self {
        RationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
    fn mul(&self, o: &Self) -> Self {
        RationalFunction {
            num: self.num.mul(&o.num),
            den: self.den.mul(&o.den),
        }
    }
    fn div(&self, o: &Self) -> Option<Self> {
        (!o.num.is_zero()).then(|| RationalFunction {
            num: self.num.mul(&o.den),
            den: self.den.mul(&o.num),
        })
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    field: Arc<FieldDescriptor>,
}

pub fn parse_rational(
    src: &str,
    field: &Arc<FieldDescriptor>,
) -> Result<RationalFunction, ExprError> {
    let mut p = Parser {
        src,
        bytes: src.as_bytes(),
        pos: 0,
        field: field.clone(),
    };
    let r = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected character"));
    }
    Ok(r)
}

impl Parser<'_> {
    fn err(&self, message: &str) -> ExprError {
        ExprError {
            input: self.src.to_string(),
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RationalFunction, ExprError> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == b'+' {
                acc.add(&t)
            } else {
                acc.add(&t.neg())
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RationalFunction, ExprError> {
        let mut acc = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let at = self.pos;
            let f = self.unary()?;
            acc = if c == b'*' {
                acc.mul(&f)
            } else {
                acc.div(&f).ok_or_else(|| ExprError {
                    input: self.src.to_string(),
                    pos: at,
                    message: "division by zero".into(),
                })?
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RationalFunction, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<RationalFunction, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.integer()?;
            let k = u32::try_from(k).map_err(|_| self.err("exponent too large"))?;
            return Ok(RationalFunction {
                num: base.num.pow(k),
                den: base.den.pow(k),
            });
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<u64, ExprError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        self.src[start..self.pos].parse().map_err(|_| ExprError {
            input: self.src.to_string(),
            pos: start,
            message: "integer out of range".into(),
        })
    }

    fn atom(&mut self) -> Result<RationalFunction, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let r = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(r)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let p = self.field.p() as u64;
                Ok(RationalFunction::poly(ThetaPoly::from_ints(
                    &self.field,
                    &[(n % p) as i64],
                )))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                match &self.src[start..self.pos] {
                    "theta" | "t" => {
                        Ok(RationalFunction::poly(ThetaPoly::theta_pow(&self.field, 1)))
                    }
                    _ => Err(ExprError {
                        input: self.src.to_string(),
                        pos: start,
                        message: "unknown identifier (use theta)".into(),
                    }),
                }
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}
