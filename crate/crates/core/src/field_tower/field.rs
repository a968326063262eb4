//! Finite fields F_{p^k} with log/antilog tables.
//!
//! Elements are encoded as integers `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` where
//! `c_i` are the coefficients of the residue modulo the defining polynomial. The
//! natural integer order on codes is the deterministic order used everywhere a
//! "smallest" element is chosen (coefficient sequences read from the top degree).

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::fp_poly::{self, Poly};

/// Largest supported field size; tables are dense.
pub const MAX_FIELD_SIZE: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("degree must be positive")]
    ZeroDegree,
    #[error("modulus has degree {got:?}, expected {expected}")]
    WrongDegree { expected: u32, got: Option<usize> },
    #[error("modulus is not monic")]
    NotMonic,
    #[error("modulus is reducible over F_{0}")]
    Reducible(u32),
    #[error("field F_{p}^{degree} exceeds the supported size {max}")]
    TooLarge { p: u32, degree: u32, max: u64 },
    #[error("no embedding of a degree-{src} field into a degree-{dst} field")]
    NoEmbedding { src: u32, dst: u32 },
    #[error("fields have different characteristic ({0} vs {1})")]
    CharacteristicMismatch(u32, u32),
}

/// A finite field F_p[x]/(modulus).
pub struct FieldDescriptor {
    p: u32,
    degree: u32,
    modulus: Poly,
    size: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    canonical: bool,
}

impl fmt::Debug for FieldDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}{:?}", self.p, self.degree, self.modulus)
    }
}

impl PartialEq for FieldDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}
impl Eq for FieldDescriptor {}

/// Serializable description of a field: characteristic and modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub degree: u32,
    pub modulus: Vec<u32>,
}

fn check_size(p: u32, degree: u32) -> Result<u32, FieldError> {
    let size = (p as u64)
        .checked_pow(degree)
        .filter(|&s| s <= MAX_FIELD_SIZE);
    size.map(|s| s as u32).ok_or(FieldError::TooLarge {
        p,
        degree,
        max: MAX_FIELD_SIZE,
    })
}

fn poly_to_code(a: &[u32], p: u32) -> u32 {
    a.iter().rev().fold(0u32, |acc, &c| acc * p + c)
}

fn code_to_poly(mut code: u32, p: u32, k: u32) -> Poly {
    let mut out = Vec::with_capacity(k as usize);
    for _ in 0..k {
        out.push(code % p);
        code /= p;
    }
    fp_poly::trim(out)
}

fn is_primitive(g: &[u32], modulus: &[u32], p: u32, order: u64) -> bool {
    if order == 1 {
        return !g.is_empty();
    }
    fp_poly::prime_factors(order).into_iter().all(|r| {
        let t = fp_poly::pow_poly_mod(g, order / r, modulus, p);
        t != vec![1]
    })
}

impl FieldDescriptor {
    fn build(p: u32, modulus: Poly, canonical: bool) -> Result<Self, FieldError> {
        let degree = fp_poly::degree(&modulus).ok_or(FieldError::ZeroDegree)? as u32;
        let size = check_size(p, degree)?;
        let order = (size - 1) as u64;
        // Canonical moduli are primitive by construction; otherwise search for a generator.
        let generator: Poly = if canonical {
            fp_poly::rem(&[0, 1], &modulus, p)
        } else {
            (1..size)
                .map(|c| code_to_poly(c, p, degree))
                .find(|g| is_primitive(g, &modulus, p, order))
                .expect("multiplicative group of a finite field is cyclic")
        };
        let mut exp = Vec::with_capacity(order as usize);
        let mut log = vec![0u32; size as usize];
        let mut cur: Poly = vec![1];
        for i in 0..order as u32 {
            let code = poly_to_code(&cur, p);
            exp.push(code);
            log[code as usize] = i;
            cur = fp_poly::mul_mod(&cur, &generator, &modulus, p);
        }
        Ok(FieldDescriptor {
            p,
            degree,
            modulus,
            size,
            exp,
            log,
            canonical,
        })
    }

    /// `fq_make`: a field of order p^m. With no modulus the canonical
    /// (compatible, primitive) modulus of degree m is used.
    pub fn new(p: u32, m: u32, modulus: Option<Vec<u32>>) -> Result<Arc<Self>, FieldError> {
        if !fp_poly::is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if m == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let Some(modulus) = modulus else {
            return Self::canonical(p, m);
        };
        let modulus: Poly = fp_poly::trim(modulus.into_iter().map(|c| c % p).collect());
        let got = fp_poly::degree(&modulus);
        if got != Some(m as usize) {
            return Err(FieldError::WrongDegree { expected: m, got });
        }
        if modulus[m as usize] != 1 {
            return Err(FieldError::NotMonic);
        }
        if !fp_poly::is_irreducible(&modulus, p) {
            return Err(FieldError::Reducible(p));
        }
        check_size(p, m)?;
        let canon = Self::canonical(p, m)?;
        if canon.modulus == modulus {
            return Ok(canon);
        }
        Ok(Arc::new(Self::build(p, modulus, false)?))
    }

    /// The canonical field of degree k over F_p.
    ///
    /// Its modulus is the first monic polynomial (in code order of the lower
    /// coefficients) that is irreducible, has x primitive, and whose root x has
    /// norm to every proper subfield F_{p^d} equal to the canonical generator
    /// there. The norm condition makes inclusions between canonical fields
    /// commute, so elements may be moved along any chain of extensions.
    pub fn canonical(p: u32, k: u32) -> Result<Arc<Self>, FieldError> {
        if !fp_poly::is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k == 0 {
            return Err(FieldError::ZeroDegree);
        }
        let size = check_size(p, k)?;
        if let Some(f) = registry().lock().unwrap().get(&(p, k)) {
            return Ok(f.clone());
        }
        let sub: Vec<(u32, Arc<FieldDescriptor>)> = (1..k)
            .filter(|d| k.is_multiple_of(*d))
            .map(|d| Self::canonical(p, d).map(|f| (d, f)))
            .collect::<Result<_, _>>()?;
        let order = (size - 1) as u64;
        let mut found = None;
        for lower in 0..size {
            let mut cand = code_to_poly(lower, p, k);
            cand.resize(k as usize, 0);
            cand.push(1);
            if cand[0] == 0 || !fp_poly::is_irreducible(&cand, p) {
                continue;
            }
            let x: Poly = fp_poly::rem(&[0, 1], &cand, p);
            if !is_primitive(&x, &cand, p, order) {
                continue;
            }
            let compatible = sub.iter().all(|(d, f)| {
                let e = order / ((p as u64).pow(*d) - 1);
                let norm = fp_poly::pow_poly_mod(&x, e, &cand, p);
                fp_poly::compose_mod(&f.modulus, &norm, &cand, p).is_empty()
            });
            if compatible {
                found = Some(cand);
                break;
            }
        }
        let modulus = found.expect("compatible primitive polynomials exist in every degree");
        let field = Arc::new(Self::build(p, modulus, true)?);
        let mut reg = registry().lock().unwrap();
        Ok(reg.entry((p, k)).or_insert(field).clone())
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn size(&self) -> u32 {
        self.size
    }
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec {
            p: self.p,
            degree: self.degree,
            modulus: self.modulus.clone(),
        }
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        while a > 0 || b > 0 {
            let d = (a % self.p + b % self.p) % self.p;
            out += d * place;
            place *= self.p;
            a /= self.p;
            b /= self.p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        let mut a = a;
        let mut out = 0u32;
        let mut place = 1u32;
        while a > 0 {
            let d = (self.p - a % self.p) % self.p;
            out += d * place;
            place *= self.p;
            a /= self.p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let order = self.size - 1;
        let s = self.log[a as usize] as u64 + self.log[b as usize] as u64;
        self.exp[(s % order as u64) as usize]
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let order = self.size - 1;
        let l = self.log[a as usize];
        Some(self.exp[((order - l) % order) as usize])
    }

    pub fn pow(&self, a: u32, n: u64) -> u32 {
        if n == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.size - 1) as u128;
        let e = (self.log[a as usize] as u128 * (n as u128 % order)) % order;
        self.exp[e as usize]
    }

    /// a^(p^j), the j-fold absolute Frobenius.
    pub fn frobenius(&self, a: u32, j: u32) -> u32 {
        if a == 0 {
            return 0;
        }
        let order = (self.size - 1) as u64;
        let pj = fp_poly::pow_mod(self.p as u64, j as u64, order);
        let e = (self.log[a as usize] as u64 * pj) % order;
        self.exp[e as usize]
    }

    /// Smallest d dividing the degree with a in F_{p^d}.
    pub fn subfield_degree(&self, a: u32) -> u32 {
        (1..=self.degree)
            .filter(|d| self.degree.is_multiple_of(*d))
            .find(|&d| self.frobenius(a, d) == a)
            .unwrap_or(self.degree)
    }

    pub fn coeffs(&self, a: u32) -> Vec<u32> {
        let mut out = code_to_poly(a, self.p, self.degree);
        out.resize(self.degree as usize, 0);
        out
    }

    pub fn from_coeffs(&self, c: &[u32]) -> u32 {
        let reduced: Poly = fp_poly::rem(
            &c.iter().map(|&x| x % self.p).collect::<Vec<_>>(),
            &self.modulus,
            self.p,
        );
        poly_to_code(&reduced, self.p)
    }

    /// The code of the class of x.
    pub fn generator_code(&self) -> u32 {
        self.from_coeffs(&[0, 1])
    }

    /// Evaluate a polynomial with F_p coefficients at a field element.
    pub fn eval_fp_poly(&self, f: &[u32], at: u32) -> u32 {
        f.iter()
            .rev()
            .fold(0u32, |acc, &c| self.add(self.mul(acc, at), c % self.p))
    }
}

fn registry() -> &'static Mutex<HashMap<(u32, u32), Arc<FieldDescriptor>>> {
    type Registry = Mutex<HashMap<(u32, u32), Arc<FieldDescriptor>>>;
    static REG: OnceLock<Registry> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

/// An element of a finite field together with its field.
#[derive(Clone)]
pub struct FqElement {
    field: Arc<FieldDescriptor>,
    code: u32,
}

impl fmt::Debug for FqElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?}@F_{}^{}",
            self.field.coeffs(self.code),
            self.field.p,
            self.field.degree
        )
    }
}

impl PartialEq for FqElement {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code && same_field(&self.field, &other.field)
    }
}
impl Eq for FqElement {}

pub fn same_field(a: &Arc<FieldDescriptor>, b: &Arc<FieldDescriptor>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl FqElement {
    pub fn new(field: Arc<FieldDescriptor>, code: u32) -> Self {
        assert!(code < field.size, "code {code} out of range for {field:?}");
        FqElement { field, code }
    }
    pub fn zero(field: &Arc<FieldDescriptor>) -> Self {
        Self::new(field.clone(), 0)
    }
    pub fn one(field: &Arc<FieldDescriptor>) -> Self {
        Self::new(field.clone(), 1)
    }
    pub fn from_coeffs(field: &Arc<FieldDescriptor>, c: &[u32]) -> Self {
        Self::new(field.clone(), field.from_coeffs(c))
    }
    pub fn generator(field: &Arc<FieldDescriptor>) -> Self {
        Self::new(field.clone(), field.generator_code())
    }
    pub fn field(&self) -> &Arc<FieldDescriptor> {
        &self.field
    }
    pub fn code(&self) -> u32 {
        self.code
    }
    pub fn is_zero(&self) -> bool {
        self.code == 0
    }
    pub fn coeffs(&self) -> Vec<u32> {
        self.field.coeffs(self.code)
    }
    pub fn inv(&self) -> Option<Self> {
        self.field
            .inv(self.code)
            .map(|c| Self::new(self.field.clone(), c))
    }
    pub fn pow(&self, n: u64) -> Self {
        Self::new(self.field.clone(), self.field.pow(self.code, n))
    }
    fn check(&self, other: &Self) {
        assert!(
            same_field(&self.field, &other.field),
            "mixed-field arithmetic: {:?} vs {:?}",
            self.field,
            other.field
        );
    }
}

macro_rules! fq_binop {
    ($tr:ident, $m:ident, $op:ident) => {
        impl std::ops::$tr for &FqElement {
            type Output = FqElement;
            fn $m(self, rhs: &FqElement) -> FqElement {
                self.check(rhs);
                FqElement::new(self.field.clone(), self.field.$op(self.code, rhs.code))
            }
        }
        impl std::ops::$tr for FqElement {
            type Output = FqElement;
            fn $m(self, rhs: FqElement) -> FqElement {
                (&self).$m(&rhs)
            }
        }
    };
}
fq_binop!(Add, add, add);
fq_binop!(Sub, sub, sub);
fq_binop!(Mul, mul, mul);

impl std::ops::Neg for &FqElement {
    type Output = FqElement;
    fn neg(self) -> FqElement {
        FqElement::new(self.field.clone(), self.field.neg(self.code))
    }
}
