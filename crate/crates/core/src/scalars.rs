//! Finite fields F_q = F_p[x]/(f) with q <= 81, table driven.
//!
//! An element is stored as the integer sum c_i p^i of its coefficient vector.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// An element of F_q, encoded as sum c_i p^i.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fq(pub u8);

impl Fq {
    pub const ZERO: Fq = Fq(0);
    pub const ONE: Fq = Fq(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Fq {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.0)
    }
}

struct Tables {
    p: u32,
    n: u32,
    q: u32,
    modulus: Vec<u32>,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    exp: Vec<u8>,
    log: Vec<u32>,
    frob: Vec<u8>,
}

/// Shared handle to the arithmetic tables of one finite field.
#[derive(Clone)]
pub struct Field(Arc<Tables>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.0.q)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.0.p == other.0.p && self.0.n == other.0.n
    }
}
impl Eq for Field {}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut m: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            out.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

// Polynomials over F_p as little-endian coefficient vectors of length n.
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let n = modulus.len();
    let mut prod = vec![0u32; 2 * n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // x^n = -sum modulus[i] x^i
    for k in (n..2 * n).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for i in 0..n {
            prod[k - n + i] = (prod[k - n + i] + (p - modulus[i]) * c) % p;
        }
    }
    prod.truncate(n);
    prod
}

fn encode(c: &[u32], p: u32) -> u32 {
    c.iter().rev().fold(0, |acc, &x| acc * p + x)
}

fn decode(mut v: u32, p: u32, n: usize) -> Vec<u32> {
    let mut c = vec![0; n];
    for x in c.iter_mut() {
        *x = v % p;
        v /= p;
    }
    c
}

/// Whether the residue of x modulo the monic polynomial with low coefficients
/// `modulus` has exact multiplicative order q-1. For n = 1 "x" means the root g.
fn x_is_primitive(modulus: &[u32], p: u32, q: u32) -> bool {
    let n = modulus.len();
    let mut x = vec![0u32; n];
    if n == 1 {
        x[0] = (p - modulus[0]) % p;
    } else {
        x[1] = 1;
    }
    let pow = |e: u32| {
        let mut acc = vec![0u32; n];
        acc[0] = 1;
        let mut base = x.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_mulmod(&acc, &base, modulus, p);
            }
            base = poly_mulmod(&base, &base, modulus, p);
            e >>= 1;
        }
        acc
    };
    let one = {
        let mut o = vec![0u32; n];
        o[0] = 1;
        o
    };
    if pow(q - 1) != one {
        return false;
    }
    prime_factors(q - 1).into_iter().all(|l| pow((q - 1) / l) != one)
}

impl Field {
    /// Builds F_{p^n} with the canonical modulus and generator.
    pub fn new(p: u32, n: u32) -> Result<Field> {
        if !is_prime(p) {
            return Err(Error::CompositeP(p));
        }
        if n == 0 || n > 4 || p.checked_pow(n).map_or(true, |q| q > 81) {
            return Err(Error::UnsupportedSize { p, n });
        }
        let q = p.pow(n);
        let nu = n as usize;
        let modulus = if n == 1 {
            let g = (1..p.max(2))
                .find(|&g| x_is_primitive(&[(p - g) % p], p, q))
                .unwrap_or(1);
            vec![(p - g) % p]
        } else {
            (0..q)
                .map(|code| decode(code, p, nu))
                .find(|m| x_is_primitive(m, p, q))
                .expect("a primitive polynomial exists")
        };
        let qs = q as usize;
        let mut add = vec![0u8; qs * qs];
        let mut mul = vec![0u8; qs * qs];
        let mut neg = vec![0u8; qs];
        for a in 0..q {
            let ca = decode(a, p, nu);
            neg[a as usize] = encode(&ca.iter().map(|&x| (p - x) % p).collect::<Vec<_>>(), p) as u8;
            for b in 0..q {
                let cb = decode(b, p, nu);
                let s: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
                add[a as usize * qs + b as usize] = encode(&s, p) as u8;
                mul[a as usize * qs + b as usize] = encode(&poly_mulmod(&ca, &cb, &modulus, p), p) as u8;
            }
        }
        let gen = if n == 1 { (p - modulus[0]) % p } else { p };
        let gen = if q == 2 { 1 } else { gen };
        let mut exp = vec![0u8; qs - 1];
        let mut log = vec![u32::MAX; qs];
        let mut cur = 1u32;
        for (k, slot) in exp.iter_mut().enumerate() {
            *slot = cur as u8;
            log[cur as usize] = k as u32;
            cur = mul[cur as usize * qs + gen as usize] as u32;
        }
        let mut inv = vec![0u8; qs];
        for a in 1..qs {
            let l = log[a];
            inv[a] = exp[((q - 1 - l) % (q - 1)) as usize];
        }
        let mut frob = vec![0u8; qs];
        for a in 1..qs {
            let l = log[a] as u64 * p as u64 % (q as u64 - 1);
            frob[a] = exp[l as usize];
        }
        Ok(Field(Arc::new(Tables { p, n, q, modulus, add, mul, neg, inv, exp, log, frob })))
    }

    pub fn p(&self) -> u32 {
        self.0.p
    }
    pub fn n(&self) -> u32 {
        self.0.n
    }
    pub fn q(&self) -> u32 {
        self.0.q
    }
    /// Low coefficients c_0..c_{n-1} of the monic modulus.
    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }
    pub fn generator(&self) -> Fq {
        self.0.exp[if self.0.q > 2 { 1 } else { 0 }].into()
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        (0..self.0.q).map(|x| Fq(x as u8))
    }
    pub fn units(&self) -> impl Iterator<Item = Fq> {
        (1..self.0.q).map(|x| Fq(x as u8))
    }
    /// The F_p-basis 1, x, ..., x^{n-1}.
    pub fn prime_basis(&self) -> Vec<Fq> {
        (0..self.0.n).map(|i| Fq(self.0.p.pow(i) as u8)).collect()
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.0.add[a.0 as usize * self.0.q as usize + b.0 as usize])
    }
    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        Fq(self.0.neg[a.0 as usize])
    }
    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }
    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        Fq(self.0.mul[a.0 as usize * self.0.q as usize + b.0 as usize])
    }
    pub fn inv(&self, a: Fq) -> Result<Fq> {
        if a.is_zero() {
            Err(Error::ZeroArgument)
        } else {
            Ok(Fq(self.0.inv[a.0 as usize]))
        }
    }
    pub fn div(&self, a: Fq, b: Fq) -> Result<Fq> {
        Ok(self.mul(a, self.inv(b)?))
    }
    /// a^e for any integer e; 0^e = 0 for e > 0 and 0^0 = 1.
    pub fn pow(&self, a: Fq, e: i64) -> Fq {
        if e == 0 {
            return Fq::ONE;
        }
        if a.is_zero() {
            return Fq::ZERO;
        }
        let m = self.0.q as i64 - 1;
        let l = (self.0.log[a.0 as usize] as i64 * e).rem_euclid(m);
        Fq(self.0.exp[l as usize])
    }
    /// g^k for the fixed generator g.
    pub fn gpow(&self, k: i64) -> Fq {
        let m = self.0.q as i64 - 1;
        Fq(self.0.exp[k.rem_euclid(m) as usize])
    }
    pub fn dlog(&self, a: Fq) -> Result<u32> {
        if a.is_zero() {
            Err(Error::ZeroArgument)
        } else {
            Ok(self.0.log[a.0 as usize])
        }
    }
    pub fn frobenius(&self, a: Fq) -> Fq {
        Fq(self.0.frob[a.0 as usize])
    }
    pub fn frobenius_pow(&self, a: Fq, i: u32) -> Fq {
        (0..i % self.0.n).fold(a, |x, _| self.frobenius(x))
    }
    /// Image of an integer in the prime field.
    pub fn from_int(&self, k: i64) -> Fq {
        Fq(k.rem_euclid(self.0.p as i64) as u8)
    }
    pub fn sum<I: IntoIterator<Item = Fq>>(&self, it: I) -> Fq {
        it.into_iter().fold(Fq::ZERO, |a, b| self.add(a, b))
    }
    /// Coefficient vector over F_p.
    pub fn coefficients(&self, a: Fq) -> Vec<u32> {
        decode(a.0 as u32, self.0.p, self.0.n as usize)
    }
    pub fn from_coefficients(&self, c: &[u32]) -> Fq {
        Fq(encode(c, self.0.p) as u8)
    }
}

impl From<u8> for Fq {
    fn from(x: u8) -> Self {
        Fq(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent polynomial arithmetic: schoolbook product then long division.
    fn naive_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let n = m.len();
        let mut full = vec![0u32; a.len() + b.len()];
        for i in 0..a.len() {
            for j in 0..b.len() {
                full[i + j] = (full[i + j] + a[i] * b[j]) % p;
            }
        }
        let mut monic = m.to_vec();
        monic.push(1);
        while full.len() > n {
            let lead = full.pop().unwrap();
            let shift = full.len() - n;
            for i in 0..n {
                full[shift + i] = (full[shift + i] + p * p - lead * monic[i]) % p;
            }
        }
        full
    }

    #[test]
    fn f9_modulus_and_generator_order() {
        let f = Field::new(3, 2).unwrap();
        // brute force: first monic quadratic (ordered by encoding) whose x has order 8
        let mut found = None;
        'outer: for code in 0..9u32 {
            let m = vec![code % 3, code / 3];
            let mut acc = vec![1, 0];
            for k in 1..=8u32 {
                acc = naive_mulmod(&acc, &[0, 1], &m, 3);
                if acc == vec![1, 0] {
                    if k == 8 {
                        found = Some(m);
                        break 'outer;
                    }
                    break;
                }
            }
        }
        assert_eq!(f.modulus(), found.unwrap().as_slice());
        assert_eq!(f.modulus(), &[2, 1]);
        let g = f.generator();
        let order = (1..=8).find(|&k| f.pow(g, k) == Fq::ONE).unwrap();
        assert_eq!(order, 8);
    }

    #[test]
    fn f5_generator_is_two() {
        let f = Field::new(5, 1).unwrap();
        let smallest = (2..5u32).find(|&g| (1..4).all(|k| g.pow(k) % 5 != 1)).unwrap();
        assert_eq!(f.generator(), Fq(smallest as u8));
        assert_eq!(f.generator(), Fq(2));
    }

    #[test]
    fn f2_generator() {
        let f = Field::new(2, 1).unwrap();
        assert_eq!(f.generator(), Fq::ONE);
        assert_eq!(f.dlog(Fq::ONE).unwrap(), 0);
    }

    #[test]
    fn errors() {
        assert_eq!(Field::new(4, 1).unwrap_err(), Error::CompositeP(4));
        assert_eq!(Field::new(1, 1).unwrap_err(), Error::CompositeP(1));
        assert!(matches!(Field::new(3, 5), Err(Error::UnsupportedSize { .. })));
        assert!(matches!(Field::new(11, 2), Err(Error::UnsupportedSize { .. })));
        assert!(matches!(Field::new(2, 0), Err(Error::UnsupportedSize { .. })));
        let f = Field::new(3, 1).unwrap();
        assert_eq!(f.dlog(Fq::ZERO), Err(Error::ZeroArgument));
        assert_eq!(f.inv(Fq::ZERO), Err(Error::ZeroArgument));
    }

    #[test]
    fn frobenius_of_g_in_f9_is_cube() {
        let f = Field::new(3, 2).unwrap();
        let g = f.generator();
        let gc = f.coefficients(g);
        let cube = naive_mulmod(&naive_mulmod(&gc, &gc, f.modulus(), 3), &gc, f.modulus(), 3);
        assert_eq!(f.frobenius(g), f.from_coefficients(&cube));
        assert_eq!(f.frobenius(Fq::ZERO), Fq::ZERO);
    }

    #[test]
    fn mul_table_matches_naive() {
        for (p, n) in [(2, 2), (2, 3), (3, 2), (2, 4), (3, 3), (3, 4), (7, 2)] {
            let f = Field::new(p, n).unwrap();
            for a in f.elements() {
                for b in f.elements() {
                    let want = naive_mulmod(&f.coefficients(a), &f.coefficients(b), f.modulus(), p);
                    assert_eq!(f.mul(a, b), f.from_coefficients(&want));
                }
            }
        }
    }

    #[test]
    fn axioms_by_enumeration() {
        for (p, n) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)] {
            let f = Field::new(p, n).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), Fq::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Fq::ONE);
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
                    }
                }
            }
        }
    }

    #[test]
    fn dlog_is_bijective_homomorphism() {
        for (p, n) in [(2, 2), (3, 2), (5, 1), (7, 1), (2, 3)] {
            let f = Field::new(p, n).unwrap();
            let mut seen = vec![false; f.q() as usize - 1];
            for a in f.units() {
                let l = f.dlog(a).unwrap() as usize;
                assert!(!seen[l]);
                seen[l] = true;
                assert_eq!(f.gpow(l as i64), a);
                for b in f.units() {
                    let s = (f.dlog(a).unwrap() + f.dlog(b).unwrap()) % (f.q() - 1);
                    assert_eq!(f.dlog(f.mul(a, b)).unwrap(), s);
                }
            }
            assert_eq!(f.dlog(f.generator()).unwrap(), if f.q() > 2 { 1 } else { 0 });
        }
    }

    #[test]
    fn frobenius_fixes_exactly_prime_field() {
        for (p, n) in [(2, 2), (3, 2), (2, 3), (5, 2)] {
            let f = Field::new(p, n).unwrap();
            let fixed: Vec<_> = f.elements().filter(|&a| f.frobenius(a) == a).collect();
            assert_eq!(fixed, (0..p).map(|x| Fq(x as u8)).collect::<Vec<_>>());
            for a in f.elements() {
                assert_eq!(f.frobenius_pow(a, n), a);
                for b in f.elements() {
                    assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
                    assert_eq!(f.frobenius(f.mul(a, b)), f.mul(f.frobenius(a), f.frobenius(b)));
                }
            }
        }
    }

    #[test]
    fn modulus_is_irreducible() {
        // no roots, and for degree 4 no monic quadratic factor
        for (p, n) in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4), (5, 2), (7, 2)] {
            let f = Field::new(p, n).unwrap();
            let mut m: Vec<u32> = f.modulus().to_vec();
            m.push(1);
            for x in 0..p {
                let v = m.iter().rev().fold(0, |acc, &c| (acc * x + c) % p);
                assert_ne!(v, 0);
            }
            if n == 4 {
                for c0 in 0..p {
                    for c1 in 0..p {
                        // remainder of m mod x^2 + c1 x + c0
                        let mut rem = m.clone();
                        while rem.len() > 2 {
                            let lead = rem.pop().unwrap();
                            let s = rem.len() - 2;
                            rem[s] = (rem[s] + p * p - lead * c0) % p;
                            rem[s + 1] = (rem[s + 1] + p * p - lead * c1) % p;
                        }
                        assert!(rem.iter().any(|&x| x != 0));
                    }
                }
            }
        }
    }
}
