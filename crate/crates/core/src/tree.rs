//! Arithmetic in F_q((t)), 2x2 matrices over it, and the Bruhat-Tits tree of
//! GL2: lattice classes are column spans, G acts by left multiplication.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rand::Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::gamma::GammaElement;
use crate::scalars::{Field, Fq};

pub const DEFAULT_PRECISION: usize = 64;
static PRECISION: AtomicUsize = AtomicUsize::new(DEFAULT_PRECISION);

/// Relative precision used when inverting non-monomial series.
pub fn precision() -> usize {
    PRECISION.load(AtomicOrdering::Relaxed)
}

pub fn set_precision(n: usize) {
    PRECISION.store(n.max(1), AtomicOrdering::Relaxed);
}

/// Σ_i coeffs[i] t^{val+i} + O(t^prec); `prec = None` means exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentSeries {
    pub val: i64,
    pub coeffs: Vec<Fq>,
    pub prec: Option<i64>,
}

impl LaurentSeries {
    pub fn zero() -> LaurentSeries {
        LaurentSeries { val: 0, coeffs: Vec::new(), prec: None }
    }

    pub fn constant(c: Fq) -> LaurentSeries {
        LaurentSeries::monomial(c, 0)
    }

    pub fn one() -> LaurentSeries {
        LaurentSeries::constant(Fq::ONE)
    }

    /// c t^e.
    pub fn monomial(c: Fq, e: i64) -> LaurentSeries {
        LaurentSeries { val: e, coeffs: vec![c], prec: None }.normalized()
    }

    pub fn t_pow(e: i64) -> LaurentSeries {
        LaurentSeries::monomial(Fq::ONE, e)
    }

    /// Exact Laurent polynomial from (exponent, coefficient) terms.
    pub fn from_terms(terms: &[(i64, Fq)]) -> LaurentSeries {
        let Some(lo) = terms.iter().map(|t| t.0).min() else {
            return LaurentSeries::zero();
        };
        let hi = terms.iter().map(|t| t.0).max().unwrap_or(lo);
        let mut coeffs = vec![Fq::ZERO; (hi - lo + 1) as usize];
        for &(e, c) in terms {
            coeffs[(e - lo) as usize] = c;
        }
        LaurentSeries { val: lo, coeffs, prec: None }.normalized()
    }

    /// Exact polynomial Σ c_i t^i.
    pub fn poly(coeffs: &[Fq]) -> LaurentSeries {
        LaurentSeries { val: 0, coeffs: coeffs.to_vec(), prec: None }.normalized()
    }

    fn normalized(mut self) -> LaurentSeries {
        if let Some(p) = self.prec {
            let keep = (p - self.val).max(0) as usize;
            self.coeffs.truncate(keep);
        }
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(i) => {
                self.coeffs.drain(..i);
                self.val += i as i64;
                while self.coeffs.last().is_some_and(|c| c.is_zero()) {
                    self.coeffs.pop();
                }
            }
            None => {
                self.coeffs.clear();
                self.val = self.prec.unwrap_or(0);
            }
        }
        self
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// Exactly zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec.is_none()
    }

    /// Valuation; errors if no nonzero term is known.
    pub fn valuation(&self) -> Result<i64> {
        if self.coeffs.is_empty() {
            return if self.is_exact() { Err(Error::DivisionByZero) } else { Err(Error::PrecisionExhausted) };
        }
        Ok(self.val)
    }

    /// Coefficient of t^e; errors if it is beyond the known precision.
    pub fn coeff(&self, e: i64) -> Result<Fq> {
        if self.prec.is_some_and(|p| e >= p) {
            return Err(Error::PrecisionExhausted);
        }
        if e < self.val || e >= self.val + self.coeffs.len() as i64 {
            return Ok(Fq::ZERO);
        }
        Ok(self.coeffs[(e - self.val) as usize])
    }

    /// Leading coefficient.
    pub fn lead(&self) -> Result<Fq> {
        self.valuation()?;
        Ok(self.coeffs[0])
    }

    fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    pub fn add(&self, f: &Field, o: &LaurentSeries) -> LaurentSeries {
        let prec = Self::min_prec(self.prec, o.prec);
        let lo = match (self.coeffs.is_empty(), o.coeffs.is_empty()) {
            (true, true) => return LaurentSeries { val: 0, coeffs: Vec::new(), prec }.normalized(),
            (true, false) => o.val,
            (false, true) => self.val,
            (false, false) => self.val.min(o.val),
        };
        let mut hi = (self.val + self.coeffs.len() as i64).max(o.val + o.coeffs.len() as i64);
        if let Some(p) = prec {
            hi = hi.min(p);
        }
        let coeffs = (lo..hi.max(lo))
            .map(|e| {
                let x = self.coeff(e).unwrap_or(Fq::ZERO);
                let y = o.coeff(e).unwrap_or(Fq::ZERO);
                f.add(x, y)
            })
            .collect();
        LaurentSeries { val: lo, coeffs, prec }.normalized()
    }

    pub fn neg(&self, f: &Field) -> LaurentSeries {
        LaurentSeries { val: self.val, coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect(), prec: self.prec }
    }

    pub fn sub(&self, f: &Field, o: &LaurentSeries) -> LaurentSeries {
        self.add(f, &o.neg(f))
    }

    pub fn scale(&self, f: &Field, c: Fq) -> LaurentSeries {
        LaurentSeries { val: self.val, coeffs: self.coeffs.iter().map(|&x| f.mul(x, c)).collect(), prec: self.prec }
            .normalized()
    }

    /// Multiplication by t^e.
    pub fn shift(&self, e: i64) -> LaurentSeries {
        LaurentSeries { val: self.val + e, coeffs: self.coeffs.clone(), prec: self.prec.map(|p| p + e) }
    }

    pub fn mul(&self, f: &Field, o: &LaurentSeries) -> LaurentSeries {
        if self.is_zero() || o.is_zero() {
            return LaurentSeries::zero();
        }
        let val = self.val + o.val;
        // each factor's unknown tail times the other's leading term
        let prec = Self::min_prec(
            self.prec.map(|p| p + o.val),
            o.prec.map(|p| p + self.val),
        );
        let mut len = self.coeffs.len() + o.coeffs.len();
        if let Some(p) = prec {
            len = len.min((p - val).max(0) as usize);
        }
        let mut coeffs = vec![Fq::ZERO; len];
        for (i, &x) in self.coeffs.iter().enumerate() {
            if i >= len || x.is_zero() {
                continue;
            }
            for (j, &y) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                coeffs[i + j] = f.add(coeffs[i + j], f.mul(x, y));
            }
        }
        LaurentSeries { val, coeffs, prec }.normalized()
    }

    /// Inverse; exact only for monomials, otherwise to the working relative precision.
    pub fn inv(&self, f: &Field) -> Result<LaurentSeries> {
        let v = self.valuation()?;
        let lead_inv = f.inv(self.coeffs[0])?;
        if self.is_exact() && self.coeffs.len() == 1 {
            return Ok(LaurentSeries::monomial(lead_inv, -v));
        }
        let rel = match self.prec {
            Some(p) => (p - v) as usize,
            None => precision(),
        };
        // unit part w = 1 + w_1 t + ..., inverse by the recursion x_k = -Σ_{j>=1} w_j x_{k-j}
        let w: Vec<Fq> = (0..rel).map(|i| f.mul(self.coeff(v + i as i64).unwrap_or(Fq::ZERO), lead_inv)).collect();
        let mut x = vec![Fq::ZERO; rel];
        x[0] = Fq::ONE;
        for k in 1..rel {
            let mut s = Fq::ZERO;
            for j in 1..=k {
                s = f.add(s, f.mul(w[j], x[k - j]));
            }
            x[k] = f.neg(s);
        }
        let coeffs = x.into_iter().map(|c| f.mul(c, lead_inv)).collect();
        Ok(LaurentSeries { val: -v, coeffs, prec: Some(-v + rel as i64) }.normalized())
    }

    /// Exact Laurent polynomial of the terms with exponent < m.
    pub fn truncate_below(&self, m: i64) -> Result<Vec<(i64, Fq)>> {
        if self.prec.is_some_and(|p| p < m) {
            return Err(Error::PrecisionExhausted);
        }
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (self.val + i as i64, c))
            .filter(|&(e, c)| e < m && !c.is_zero())
            .collect())
    }

    /// Residue class mod t of an integral series.
    pub fn constant_term(&self) -> Result<Fq> {
        self.coeff(0)
    }

    /// True if the series has no negative-exponent terms.
    pub fn is_integral(&self) -> Result<bool> {
        if self.coeffs.is_empty() {
            return if self.is_exact() || self.val >= 0 { Ok(true) } else { Err(Error::PrecisionExhausted) };
        }
        Ok(self.val >= 0)
    }
}

/// A 2x2 matrix over F_q((t)), entries [a, b, c, d] row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GL2Local {
    pub e: [LaurentSeries; 4],
}

impl GL2Local {
    pub fn new(a: LaurentSeries, b: LaurentSeries, c: LaurentSeries, d: LaurentSeries) -> GL2Local {
        GL2Local { e: [a, b, c, d] }
    }

    pub fn identity() -> GL2Local {
        GL2Local::scalar_t(0)
    }

    /// t^a times the identity.
    pub fn scalar_t(a: i64) -> GL2Local {
        GL2Local::new(LaurentSeries::t_pow(a), LaurentSeries::zero(), LaurentSeries::zero(), LaurentSeries::t_pow(a))
    }

    /// Π = [[0, 1], [t, 0]].
    pub fn pi() -> GL2Local {
        GL2Local::new(LaurentSeries::zero(), LaurentSeries::one(), LaurentSeries::t_pow(1), LaurentSeries::zero())
    }

    /// Π^{-1} = [[0, t^{-1}], [1, 0]].
    pub fn pi_inv() -> GL2Local {
        GL2Local::new(LaurentSeries::zero(), LaurentSeries::t_pow(-1), LaurentSeries::one(), LaurentSeries::zero())
    }

    /// Constant lift of an element of Γ.
    pub fn lift(g: &GammaElement) -> GL2Local {
        GL2Local::new(
            LaurentSeries::constant(g.a),
            LaurentSeries::constant(g.b),
            LaurentSeries::constant(g.c),
            LaurentSeries::constant(g.d),
        )
    }

    pub fn n_s(f: &Field) -> GL2Local {
        GL2Local::lift(&GammaElement::n_s(f))
    }

    pub fn upper(x: Fq) -> GL2Local {
        GL2Local::lift(&GammaElement::upper(x))
    }

    /// [[t^m, u], [0, 1]].
    pub fn vertex_matrix(v: &Vertex) -> GL2Local {
        GL2Local::new(LaurentSeries::t_pow(v.m), LaurentSeries::from_terms(&v.u), LaurentSeries::zero(), LaurentSeries::one())
    }

    /// Exact inverse of [[t^m, u], [0, 1]].
    pub fn vertex_matrix_inv(f: &Field, v: &Vertex) -> GL2Local {
        let u = LaurentSeries::from_terms(&v.u);
        GL2Local::new(LaurentSeries::t_pow(-v.m), u.neg(f).shift(-v.m), LaurentSeries::zero(), LaurentSeries::one())
    }

    pub fn mul(&self, f: &Field, o: &GL2Local) -> GL2Local {
        let [a, b, c, d] = &self.e;
        let [x, y, z, w] = &o.e;
        GL2Local::new(
            a.mul(f, x).add(f, &b.mul(f, z)),
            a.mul(f, y).add(f, &b.mul(f, w)),
            c.mul(f, x).add(f, &d.mul(f, z)),
            c.mul(f, y).add(f, &d.mul(f, w)),
        )
    }

    pub fn det(&self, f: &Field) -> LaurentSeries {
        let [a, b, c, d] = &self.e;
        a.mul(f, d).sub(f, &b.mul(f, c))
    }

    pub fn inverse(&self, f: &Field) -> Result<GL2Local> {
        let di = self.det(f).inv(f)?;
        let [a, b, c, d] = &self.e;
        Ok(GL2Local::new(d.mul(f, &di), b.neg(f).mul(f, &di), c.neg(f).mul(f, &di), a.mul(f, &di)))
    }

    pub fn scale_t(&self, a: i64) -> GL2Local {
        GL2Local { e: self.e.clone().map(|x| x.shift(a)) }
    }

    /// True if all entries are integral and the determinant is a unit.
    pub fn in_k(&self, f: &Field) -> Result<bool> {
        for x in &self.e {
            if !x.is_integral()? {
                return Ok(false);
            }
        }
        Ok(self.det(f).valuation()? == 0)
    }

    /// Reduction mod t of an element of K.
    pub fn residue(&self, f: &Field) -> Result<GammaElement> {
        let [a, b, c, d] = &self.e;
        GammaElement::new(f, a.constant_term()?, b.constant_term()?, c.constant_term()?, d.constant_term()?)
    }

    pub fn in_iwahori(&self, f: &Field) -> Result<bool> {
        Ok(self.in_k(f)? && self.residue(f)?.c.is_zero())
    }

    pub fn in_i1(&self, f: &Field) -> Result<bool> {
        if !self.in_iwahori(f)? {
            return Ok(false);
        }
        let r = self.residue(f)?;
        Ok(r.a == Fq::ONE && r.d == Fq::ONE)
    }

    pub fn in_k1(&self, f: &Field) -> Result<bool> {
        Ok(self.in_k(f)? && self.residue(f)? == GammaElement::identity())
    }
}

/// Lattice class of the columns of [[t^m, u], [0, 1]], with all exponents of u below m.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub m: i64,
    pub u: Vec<(i64, Fq)>,
}

impl Vertex {
    pub fn sigma0() -> Vertex {
        Vertex { m: 0, u: Vec::new() }
    }

    /// Π σ_0.
    pub fn sigma0_pi() -> Vertex {
        Vertex { m: -1, u: Vec::new() }
    }

    pub fn new(m: i64, mut u: Vec<(i64, Fq)>) -> Vertex {
        u.retain(|&(e, c)| e < m && !c.is_zero());
        u.sort();
        Vertex { m, u }
    }

    pub fn parent(&self) -> Vertex {
        Vertex::new(self.m - 1, self.u.clone())
    }

    pub fn children(&self, f: &Field) -> Vec<Vertex> {
        f.elements()
            .map(|c| {
                let mut u = self.u.clone();
                u.push((self.m, c));
                Vertex::new(self.m + 1, u)
            })
            .collect()
    }

    /// Coefficient of t^{m-1} in u, the child label of this vertex under its parent.
    pub fn top_coeff(&self) -> Fq {
        self.u.iter().find(|t| t.0 == self.m - 1).map_or(Fq::ZERO, |t| t.1)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "m": self.m, "u": self.u.iter().map(|&(e, c)| json!([e, c.0])).collect::<Vec<_>>() })
    }
}

/// The vertex spanned by the columns of g.
pub fn vertex_normalize(f: &Field, g: &GL2Local) -> Result<Vertex> {
    let [a, b, c, d] = g.e.clone();
    if g.det(f).valuation().is_err() {
        return Err(if g.det(f).is_exact() { Error::Singular } else { Error::PrecisionExhausted });
    }
    // second column gets the bottom entry of least valuation
    let swap = match (c.is_zero(), d.is_zero()) {
        (_, true) => true,
        (true, false) => false,
        (false, false) => c.valuation()? < d.valuation()?,
    };
    let (a, b, c, d) = if swap { (b, a, d, c) } else { (a, b, c, d) };
    let a = if c.is_zero() {
        a
    } else {
        let ratio = c.mul(f, &d.inv(f)?);
        a.sub(f, &ratio.mul(f, &b))
    };
    let k = d.valuation()?;
    let dunit = d.shift(-k).inv(f)?;
    let b = b.mul(f, &dunit);
    let j = a.valuation()?;
    let m = j - k;
    let u = b.shift(-k).truncate_below(m)?;
    Ok(Vertex::new(m, u))
}

pub fn act_on_vertex(f: &Field, g: &GL2Local, v: &Vertex) -> Result<Vertex> {
    vertex_normalize(f, &g.mul(f, &GL2Local::vertex_matrix(v)))
}

/// The q+1 neighbors: the q children, then the parent.
pub fn neighbors(f: &Field, v: &Vertex) -> Vec<Vertex> {
    let mut out = v.children(f);
    out.push(v.parent());
    out
}

pub fn are_adjacent(a: &Vertex, b: &Vertex) -> bool {
    a.parent() == *b || b.parent() == *a
}

/// Unique shortest path from v to w.
pub fn geodesic(v: &Vertex, w: &Vertex) -> Vec<Vertex> {
    let (mut x, mut y) = (v.clone(), w.clone());
    let (mut left, mut right) = (vec![x.clone()], vec![y.clone()]);
    while x != y {
        match x.m.cmp(&y.m) {
            Ordering::Greater => {
                x = x.parent();
                left.push(x.clone());
            }
            Ordering::Less => {
                y = y.parent();
                right.push(y.clone());
            }
            Ordering::Equal => {
                x = x.parent();
                y = y.parent();
                left.push(x.clone());
                right.push(y.clone());
            }
        }
    }
    right.pop();
    left.extend(right.into_iter().rev());
    left
}

pub fn distance(v: &Vertex, w: &Vertex) -> usize {
    geodesic(v, w).len() - 1
}

/// Distance from the elementary divisors of g_v^{-1} g_w.
pub fn distance_by_divisors(f: &Field, v: &Vertex, w: &Vertex) -> Result<usize> {
    let m = GL2Local::vertex_matrix_inv(f, v).mul(f, &GL2Local::vertex_matrix(w));
    let dv = m.det(f).valuation()?;
    let mut lo = i64::MAX;
    for x in &m.e {
        if !x.is_zero() {
            lo = lo.min(x.valuation()?);
        }
    }
    Ok((dv - 2 * lo) as usize)
}

/// Vertices within distance `radius` of v.
pub fn ball(f: &Field, v: &Vertex, radius: usize) -> Vec<Vertex> {
    let mut seen: BTreeSet<Vertex> = BTreeSet::new();
    let mut frontier = vec![v.clone()];
    seen.insert(v.clone());
    for _ in 0..radius {
        let mut next = Vec::new();
        for x in &frontier {
            for y in neighbors(f, x) {
                if seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    seen.into_iter().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Simplex {
    Sigma0,
    Sigma1,
}

/// g = Π^eps t^a k with k in K (σ_0) or in I (σ_1); `residue` is k mod t.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabFactor {
    pub a: i64,
    pub eps: u8,
    pub residue: GammaElement,
}

fn factor_k(f: &Field, g: &GL2Local) -> Result<(i64, GammaElement)> {
    let dv = g.det(f).valuation()?;
    if dv % 2 != 0 {
        return Err(Error::NotInStabilizer);
    }
    let a = dv / 2;
    let k = g.scale_t(-a);
    if !k.in_k(f)? {
        return Err(Error::NotInStabilizer);
    }
    Ok((a, k.residue(f)?))
}

pub fn factor_in_stabilizer(f: &Field, g: &GL2Local, which: Simplex) -> Result<StabFactor> {
    let s0 = Vertex::sigma0();
    let s1 = Vertex::sigma0_pi();
    let g0 = vertex_normalize(f, g)?;
    match which {
        Simplex::Sigma0 => {
            if g0 != s0 {
                return Err(Error::NotInStabilizer);
            }
            let (a, residue) = factor_k(f, g)?;
            Ok(StabFactor { a, eps: 0, residue })
        }
        Simplex::Sigma1 => {
            let g1 = act_on_vertex(f, g, &s1)?;
            let (eps, x) = if g0 == s0 && g1 == s1 {
                (0, g.clone())
            } else if g0 == s1 && g1 == s0 {
                (1, GL2Local::pi_inv().mul(f, g))
            } else {
                return Err(Error::NotInStabilizer);
            };
            let (a, residue) = factor_k(f, &x)?;
            if !residue.c.is_zero() {
                return Err(Error::NotInStabilizer);
            }
            Ok(StabFactor { a, eps, residue })
        }
    }
}

/// Breadth-first count of distinct vertices by distance from v (a tree has 1, q+1, (q+1)q, ...).
pub fn sphere_sizes(f: &Field, v: &Vertex, radius: usize) -> Vec<usize> {
    let mut by_dist: BTreeMap<usize, usize> = BTreeMap::new();
    for w in ball(f, v, radius) {
        *by_dist.entry(distance(v, &w)).or_default() += 1;
    }
    (0..=radius).map(|r| by_dist.get(&r).copied().unwrap_or(0)).collect()
}

/// Random Laurent polynomial with terms t^low .. t^{low+deg}.
pub fn random_laurent_poly<R: Rng>(rng: &mut R, f: &Field, deg: usize, low: i64) -> LaurentSeries {
    let terms: Vec<(i64, Fq)> = (0..=deg).map(|i| (low + i as i64, Fq(rng.gen_range(0..f.q()) as u8))).collect();
    LaurentSeries::from_terms(&terms)
}

/// Random element of K: a constant lift of an element of Γ plus t times a polynomial matrix.
pub fn random_k<R: Rng>(rng: &mut R, f: &Field) -> GL2Local {
    let all = GammaElement::all(f);
    let g = all[rng.gen_range(0..all.len())];
    let e = GL2Local::lift(&g).e.map(|x| x.add(f, &random_laurent_poly(rng, f, 2, 1)));
    GL2Local { e }
}

/// Random word k_1 Π^{e_1} k_2 Π^{e_2} k_3 Π^{e_3} in G.
pub fn random_g<R: Rng>(rng: &mut R, f: &Field) -> GL2Local {
    let mut g = GL2Local::identity();
    for _ in 0..3 {
        g = g.mul(f, &random_k(rng, f));
        if rng.gen_bool(0.5) {
            g = g.mul(f, &GL2Local::pi());
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, f: &Field, deg: usize, low: i64) -> LaurentSeries {
        random_laurent_poly(rng, f, deg, low)
    }

    fn f3() -> Field {
        Field::new(3, 1).unwrap()
    }

    #[test]
    fn laurent_basics() {
        let f = f3();
        let t = LaurentSeries::t_pow(1);
        assert_eq!(t.mul(&f, &t.inv(&f).unwrap()), LaurentSeries::one());
        let one_plus_t = LaurentSeries::poly(&[Fq(1), Fq(1)]);
        let inv = one_plus_t.inv(&f).unwrap();
        for i in 0..DEFAULT_PRECISION as i64 {
            let want = if i % 2 == 0 { Fq(1) } else { Fq(2) };
            assert_eq!(inv.coeff(i).unwrap(), want);
        }
        assert_eq!(inv.coeff(DEFAULT_PRECISION as i64), Err(Error::PrecisionExhausted));
        let prod = one_plus_t.mul(&f, &inv);
        assert_eq!(prod.coeff(0).unwrap(), Fq(1));
        for i in 1..DEFAULT_PRECISION as i64 {
            assert_eq!(prod.coeff(i).unwrap(), Fq(0));
        }
        assert_eq!(LaurentSeries::zero().inv(&f), Err(Error::DivisionByZero));
    }

    #[test]
    fn valuation_is_additive() {
        let f = Field::new(5, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let lo = rng.gen_range(-3..3);
            let a = random_poly(&mut rng, &f, 4, lo);
            let lo = rng.gen_range(-3..3);
            let b = random_poly(&mut rng, &f, 4, lo);
            if a.is_zero() || b.is_zero() {
                continue;
            }
            assert_eq!(a.mul(&f, &b).valuation().unwrap(), a.valuation().unwrap() + b.valuation().unwrap());
            let ai = a.inv(&f).unwrap();
            assert_eq!(ai.valuation().unwrap(), -a.valuation().unwrap());
            assert!(a.mul(&f, &b).is_exact());
        }
    }

    #[test]
    fn normal_forms() {
        let f = f3();
        assert_eq!(vertex_normalize(&f, &GL2Local::identity()).unwrap(), Vertex::sigma0());
        assert_eq!(vertex_normalize(&f, &GL2Local::pi()).unwrap(), Vertex::new(-1, vec![]));
        let v = Vertex::new(-1, vec![]);
        assert_eq!(act_on_vertex(&f, &GL2Local::pi(), &v).unwrap(), Vertex::sigma0());
        let pi2 = GL2Local::pi().mul(&f, &GL2Local::pi());
        assert_eq!(act_on_vertex(&f, &pi2, &Vertex::sigma0()).unwrap(), Vertex::sigma0());
        let ns_inv = GL2Local::n_s(&f).inverse(&f).unwrap();
        for x in f.elements() {
            let g = GL2Local::upper(x).mul(&f, &ns_inv);
            assert_eq!(act_on_vertex(&f, &g, &Vertex::sigma0()).unwrap(), Vertex::sigma0());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let k = random_k(&mut rng, &f);
            assert!(k.in_k(&f).unwrap());
            assert_eq!(vertex_normalize(&f, &k).unwrap(), Vertex::sigma0());
        }
    }

    #[test]
    fn vertex_matrices_round_trip() {
        let f = Field::new(2, 2).unwrap();
        for v in ball(&f, &Vertex::sigma0(), 3) {
            assert_eq!(vertex_normalize(&f, &GL2Local::vertex_matrix(&v)).unwrap(), v);
            let id = GL2Local::vertex_matrix_inv(&f, &v).mul(&f, &GL2Local::vertex_matrix(&v));
            assert_eq!(id, GL2Local::identity());
        }
    }

    #[test]
    fn neighbor_structure() {
        for f in [Field::new(2, 1).unwrap(), f3(), Field::new(2, 2).unwrap()] {
            let q = f.q() as usize;
            let s0 = Vertex::sigma0();
            let nb = neighbors(&f, &s0);
            assert_eq!(nb.len(), q + 1);
            assert!(nb.contains(&Vertex::sigma0_pi()));
            for w in &nb {
                assert!(neighbors(&f, w).contains(&s0));
                assert!(are_adjacent(&s0, w));
            }
            assert_eq!(sphere_sizes(&f, &s0, 3), vec![1, q + 1, (q + 1) * q, (q + 1) * q * q]);
        }
    }

    #[test]
    fn geodesic_examples() {
        let f = f3();
        let v = Vertex::new(2, vec![]);
        assert_eq!(geodesic(&v, &v), vec![v.clone()]);
        assert_eq!(geodesic(&v, &Vertex::sigma0()), vec![v.clone(), Vertex::new(1, vec![]), Vertex::sigma0()]);
        assert_eq!(distance_by_divisors(&f, &v, &Vertex::sigma0()).unwrap(), 2);
        let ball2 = ball(&f, &Vertex::sigma0(), 2);
        for a in &ball2 {
            for b in &ball2 {
                let path = geodesic(a, b);
                assert_eq!(path.len() - 1, distance_by_divisors(&f, a, b).unwrap());
                for w in path.windows(2) {
                    assert!(are_adjacent(&w[0], &w[1]));
                }
            }
        }
    }

    #[test]
    fn action_is_isometric_and_multiplicative() {
        let f = f3();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ball2 = ball(&f, &Vertex::sigma0(), 2);
        for _ in 0..20 {
            let g = random_g(&mut rng, &f);
            let h = random_g(&mut rng, &f);
            let v = &ball2[rng.gen_range(0..ball2.len())];
            let w = &ball2[rng.gen_range(0..ball2.len())];
            let gv = act_on_vertex(&f, &g, v).unwrap();
            let gw = act_on_vertex(&f, &g, w).unwrap();
            assert_eq!(distance(&gv, &gw), distance(v, w));
            let ghv = act_on_vertex(&f, &g.mul(&f, &h), v).unwrap();
            assert_eq!(ghv, act_on_vertex(&f, &g, &act_on_vertex(&f, &h, v).unwrap()).unwrap());
        }
    }

    #[test]
    fn stabilizer_factorizations() {
        let f = f3();
        let t3 = GL2Local::scalar_t(3);
        let s = factor_in_stabilizer(&f, &t3, Simplex::Sigma0).unwrap();
        assert_eq!((s.a, s.residue), (3, GammaElement::identity()));
        let p = factor_in_stabilizer(&f, &GL2Local::pi(), Simplex::Sigma1).unwrap();
        assert_eq!((p.eps, p.residue), (1, GammaElement::identity()));
        assert_eq!(factor_in_stabilizer(&f, &GL2Local::pi(), Simplex::Sigma0), Err(Error::NotInStabilizer));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let k = random_k(&mut rng, &f);
            let fac = factor_in_stabilizer(&f, &k, Simplex::Sigma0).unwrap();
            assert_eq!(fac.residue, k.residue(&f).unwrap());
            let in_i = k.in_iwahori(&f).unwrap();
            assert_eq!(factor_in_stabilizer(&f, &k, Simplex::Sigma1).is_ok(), in_i);
            if in_i {
                assert!(factor_in_stabilizer(&f, &k, Simplex::Sigma1).unwrap().residue.c.is_zero());
            }
        }
    }

    #[test]
    fn pi_normalizes_i1() {
        let f = Field::new(5, 1).unwrap();
        for x in f.elements() {
            let c = GL2Local::pi().mul(&f, &GL2Local::upper(x)).mul(&f, &GL2Local::pi_inv());
            assert!(c.in_i1(&f).unwrap());
            let back = GL2Local::pi_inv().mul(&f, &GL2Local::upper(x)).mul(&f, &GL2Local::pi());
            assert!(back.in_i1(&f).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn k_fixes_sigma0(seed in 0u64..10_000) {
            let f = Field::new(2, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_k(&mut rng, &f);
            prop_assert_eq!(vertex_normalize(&f, &k).unwrap(), Vertex::sigma0());
        }

        #[test]
        fn normal_form_ignores_right_k(seed in 0u64..10_000) {
            let f = f3();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = random_g(&mut rng, &f);
            let k = random_k(&mut rng, &f);
            let a = rng.gen_range(-2..3);
            let gk = g.mul(&f, &k).scale_t(a);
            prop_assert_eq!(vertex_normalize(&f, &g).unwrap(), vertex_normalize(&f, &gk).unwrap());
        }
    }
}
