//! Dense polynomials over a prime field F_p, coefficient vectors stored low degree first.
//!
//! Only what field construction needs: reduction, modular powering, gcd and the
//! Ben-Or irreducibility test.

pub(crate) type Poly = Vec<u32>;

pub(crate) fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub(crate) fn degree(a: &[u32]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a as u64, (p - 2) as u64, p as u64) as u32
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of `n`.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub(crate) fn sub(a: &[u32], b: &[u32], p: u32) -> Poly {
    let n = a.len().max(b.len());
    let mut out = vec![0u32; n];
    for (i, o) in out.iter_mut().enumerate() {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        *o = (x + p - y) % p;
    }
    trim(out)
}

pub(crate) fn mul(a: &[u32], b: &[u32], p: u32) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
        }
    }
    trim(out.into_iter().map(|c| c as u32).collect())
}

/// Remainder of `a` modulo `m` (m nonzero).
pub(crate) fn rem(a: &[u32], m: &[u32], p: u32) -> Poly {
    let dm = degree(m).expect("division by zero polynomial");
    let lead_inv = inv_mod(m[dm], p) as u64;
    let mut r = trim(a.to_vec());
    while let Some(dr) = degree(&r) {
        if dr < dm {
            break;
        }
        let factor = r[dr] as u64 * lead_inv % p as u64;
        let shift = dr - dm;
        for (i, &c) in m.iter().enumerate().take(dm + 1) {
            let t = factor * c as u64 % p as u64;
            r[shift + i] = ((r[shift + i] as u64 + p as u64 - t) % p as u64) as u32;
        }
        r = trim(r);
    }
    r
}

pub(crate) fn mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Poly {
    rem(&mul(a, b, p), m, p)
}

pub(crate) fn pow_poly_mod(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Poly {
    let mut r: Poly = rem(&[1], m, p);
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(&r, &b, m, p);
        }
        b = mul_mod(&b, &b, m, p);
        e >>= 1;
    }
    r
}

pub(crate) fn gcd(a: &[u32], b: &[u32], p: u32) -> Poly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// Ben-Or test: `f` of degree m is irreducible iff gcd(x^{p^i} - x, f) = 1 for i <= m/2.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let Some(m) = degree(f) else { return false };
    if m == 0 {
        return false;
    }
    if m == 1 {
        return true;
    }
    let x: Poly = vec![0, 1];
    let mut xp = x.clone();
    for _ in 1..=m / 2 {
        xp = pow_poly_mod(&xp, p as u64, f, p);
        let g = gcd(f, &sub(&xp, &x, p), p);
        if degree(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// Evaluate `f` (coefficients in F_p) at a point of the field defined by `modulus`,
/// the point itself given as a polynomial residue.
pub(crate) fn compose_mod(f: &[u32], point: &[u32], modulus: &[u32], p: u32) -> Poly {
    let mut acc: Poly = Vec::new();
    for &c in f.iter().rev() {
        acc = mul_mod(&acc, point, modulus, p);
        acc = trim({
            let mut a = acc;
            if a.is_empty() {
                a.push(0);
            }
            a[0] = (a[0] + c) % p;
            a
        });
    }
    acc
}
