//! The spaces R_r ⊂ V_{p-1-r} ⊗ V_{p-1}, their Frobenius-twisted tensors R_r⃗,
//! the U-invariant basis b_ε, injective envelopes and the induced Hecke modules.

use serde_json::json;

use crate::error::{Error, Result};
use crate::gamma::{
    binom_mod_p, carter_lusztig_irrep, dictionary, symmetric_power_rep, undigits, GammaElement, GammaRep, Irrep,
    IrrepLabel, TorusChar,
};
use crate::hecke::{self, make_l_gamma, make_m_gamma, module_iso, CharOrbit, HModule};
use crate::linalg::{self, LinearBasis, Matrix, Subspace, Vector};
use crate::scalars::{Field, Fq};

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut out = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            out = out * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    out
}

/// Coefficients a_0..a_{p-r-1} of Z, as residues mod p.
pub fn a_coefficients(p: u32, r: u32) -> Result<Vec<u32>> {
    if !crate::scalars::is_prime(p) {
        return Err(Error::CompositeP(p));
    }
    if r + 2 > p {
        return Err(Error::InvalidLabel(format!("r = {r} needs r <= p - 2")));
    }
    let pm = p as u64;
    let len = (p - r) as usize;
    let a1 = (1..=(p - r - 2) as u64).fold(1, |acc, x| acc * x % pm);
    let mut a = vec![0u64, a1];
    let (mut num, mut den) = (1u64, 1u64);
    for i in 1..len as u64 - 1 {
        num = num * ((r as u64 + i) % pm) % pm;
        let factor = (pm - r as u64 - 1 - i) % pm;
        if factor == 0 {
            return Err(Error::DenominatorVanishes(i as u32));
        }
        den = den * factor % pm;
        let term = num * pow_mod(den, pm - 2, pm) % pm * ((a[1] + pm - a[0]) % pm) % pm;
        let next = if i % 2 == 0 { (a[i as usize] + term) % pm } else { (a[i as usize] + pm - term) % pm };
        a.push(next);
    }
    a.truncate(len);
    Ok(a.into_iter().map(|x| x as u32).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Letter {
    E,
    F,
}

/// e^k/k! or f^k/k!.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DividedPower {
    pub letter: Letter,
    pub k: u32,
}

impl DividedPower {
    pub fn new(letter: Letter, k: u32) -> DividedPower {
        DividedPower { letter, k }
    }

    /// Matrix on V_d (column convention).
    pub fn on_sym(&self, f: &Field, d: u32) -> Matrix {
        let p = f.p() as u64;
        let (d, k) = (d as usize, self.k as usize);
        let mut m = Matrix::zero(d + 1, d + 1);
        for i in 0..=d {
            match self.letter {
                Letter::F if i + k <= d => {
                    m.set(i + k, i, f.from_int(binom_mod_p((i + k) as u64, i as u64, p) as i64));
                }
                Letter::E if i >= k => {
                    m.set(i - k, i, f.from_int(binom_mod_p((d - i + k) as u64, (d - i) as u64, p) as i64));
                }
                _ => {}
            }
        }
        m
    }

    /// Matrix on V_{d1} ⊗ V_{d2} by the Leibniz rule.
    pub fn on_tensor(&self, f: &Field, d1: u32, d2: u32) -> Matrix {
        let n = ((d1 + 1) * (d2 + 1)) as usize;
        let mut out = Matrix::zero(n, n);
        for j in 0..=self.k {
            let a = DividedPower::new(self.letter, j).on_sym(f, d1);
            let b = DividedPower::new(self.letter, self.k - j).on_sym(f, d2);
            out = out.add(f, &a.kron(f, &b));
        }
        out
    }
}

/// R_r with its labeled basis E_0.., Z, fZ, .., f^rZ/r!.
#[derive(Clone, Debug)]
pub struct RSpace {
    pub r: u32,
    /// Coefficients of Z (empty when r = p - 1).
    pub a: Vec<Fq>,
    pub labels: Vec<String>,
    /// Basis in the coordinates of V_{p-1-r} ⊗ V_{p-1}.
    pub vectors: Vec<Vector>,
    pub ambient: GammaRep,
    /// Action on the labeled basis.
    pub rep: GammaRep,
}

impl RSpace {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Number of E_i.
    pub fn e_count(&self, p: u32) -> usize {
        if self.r == p - 1 {
            p as usize
        } else {
            (2 * p - 1 - self.r) as usize
        }
    }

    /// E_i in labeled coordinates.
    pub fn e(&self, i: usize) -> Vector {
        linalg::unit_vector(self.dim(), i)
    }

    /// Labeled-basis vectors of W_r = ⟨E_{p-r-1}, .., E_{p-1}⟩.
    pub fn w_basis(&self, p: u32) -> Vec<Vector> {
        ((p - 1 - self.r) as usize..p as usize).map(|i| self.e(i)).collect()
    }
}

/// Builds R_r for 0 <= r <= p - 1.
pub fn build_r(f: &Field, r: u32) -> Result<RSpace> {
    let p = f.p();
    if r >= p {
        return Err(Error::InvalidLabel(format!("r = {r} needs r <= p - 1")));
    }
    let d1 = p - 1 - r;
    let ambient = symmetric_power_rep(f, d1).tensor(&symmetric_power_rep(f, p - 1));
    let n = ambient.dim;
    let idx = |k: u32, l: u32| (k * p + l) as usize;
    let mut vectors = Vec::new();
    let mut labels = Vec::new();
    let top = if r == p - 1 { p - 1 } else { 2 * p - 2 - r };
    for i in 0..=top {
        let mut v = vec![Fq::ZERO; n];
        for k in 0..=d1.min(i) {
            if i - k < p {
                v[idx(k, i - k)] = Fq::ONE;
            }
        }
        vectors.push(v);
        labels.push(format!("E{i}"));
    }
    let mut a = Vec::new();
    if r < p - 1 {
        a = a_coefficients(p, r)?.into_iter().map(|x| f.from_int(x as i64)).collect();
        let mut z = vec![Fq::ZERO; n];
        for (i, &ai) in a.iter().enumerate() {
            z[idx(i as u32, p - r - 1 - i as u32)] = ai;
        }
        for k in 0..=r {
            vectors.push(DividedPower::new(Letter::F, k).on_tensor(f, d1, p - 1).apply(f, &z));
            labels.push(format!("Z{k}"));
        }
    }
    let basis = LinearBasis::new(f, n, &vectors)?;
    let rep = ambient.restrict_with(vectors.len(), &vectors, |v| basis.coords(f, v))?;
    Ok(RSpace { r, a, labels, vectors, ambient, rep })
}

/// Character of H on an H-eigenvector.
pub fn torus_character(rep: &GammaRep, v: &[Fq]) -> Option<TorusChar> {
    let f = &rep.field;
    let g = f.generator();
    let i = v.iter().position(|x| !x.is_zero())?;
    let mut exps = [0i64; 2];
    for (slot, h) in [GammaElement::diag(g, Fq::ONE), GammaElement::diag(Fq::ONE, g)].iter().enumerate() {
        let w = rep.act(h, v);
        let ratio = f.div(w[i], v[i]).ok()?;
        if w != linalg::vec_scale(f, v, ratio) {
            return None;
        }
        exps[slot] = f.dlog(ratio).ok()? as i64;
    }
    Some(TorusChar::new(f, exps[0], exps[1]))
}

/// R_r⃗ ⊗ det^twist.
#[derive(Clone, Debug)]
pub struct RTuple {
    pub r: Vec<u32>,
    pub twist: i64,
    pub components: Vec<RSpace>,
    pub rep: GammaRep,
}

/// Closed-form and brute-force T_{n_s} on b_ε.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TnsCheck {
    pub brute: Vector,
    pub closed: Vector,
    pub agree: bool,
}

impl RTuple {
    pub fn dim(&self) -> usize {
        self.rep.dim
    }

    pub fn p(&self) -> u32 {
        self.rep.field.p()
    }

    /// |r⃗| = Σ r_i p^i.
    pub fn r_int(&self) -> u32 {
        undigits(&self.rep.field, &self.r)
    }

    /// δ_i = 1 iff r_i ≠ p - 1.
    pub fn delta(&self) -> Vec<u8> {
        let p = self.p();
        self.r.iter().map(|&x| u8::from(x != p - 1)).collect()
    }

    /// Σ_r⃗ in lexicographic order.
    pub fn sigma(&self) -> Vec<Vec<u8>> {
        let n = self.r.len();
        let delta = self.delta();
        (0..1u32 << n)
            .map(|m| (0..n).map(|i| ((m >> (n - 1 - i)) & 1) as u8).collect::<Vec<u8>>())
            .filter(|e| e.iter().zip(&delta).all(|(&x, &d)| x <= d))
            .collect()
    }

    /// Σ'_r⃗ = Σ_r⃗ \ {0⃗, δ}.
    pub fn sigma_prime(&self) -> Vec<Vec<u8>> {
        let zero = vec![0u8; self.r.len()];
        let delta = self.delta();
        self.sigma().into_iter().filter(|e| *e != zero && *e != delta).collect()
    }

    /// The representative of ε in Σ_r⃗ giving the same b_ε.
    pub fn reduce(&self, eps: &[u8]) -> Vec<u8> {
        eps.iter().zip(self.delta()).map(|(&e, d)| e & d).collect()
    }

    fn tensor_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.components).fold(0, |acc, (&i, c)| acc * c.dim() + i)
    }

    /// b_ε for any ε ∈ {0,1}^n.
    pub fn b(&self, eps: &[u8]) -> Vector {
        let p = self.p();
        let idx: Vec<usize> =
            eps.iter().zip(&self.r).map(|(&e, &r)| ((1 - e as u32) * (p - 1 - r)) as usize).collect();
        linalg::unit_vector(self.dim(), self.tensor_index(&idx))
    }

    /// Label of a tensor basis vector, e.g. "E3⊗Z1".
    pub fn label(&self, mut index: usize) -> String {
        let mut parts = Vec::new();
        for c in self.components.iter().rev() {
            parts.push(c.labels[index % c.dim()].clone());
            index /= c.dim();
        }
        parts.reverse();
        parts.join("⊗")
    }

    /// Character of H on b_ε from the closed formula.
    pub fn b_character(&self, eps: &[u8]) -> TorusChar {
        let f = &self.rep.field;
        let p = self.p() as i64;
        let e: i64 = eps
            .iter()
            .zip(&self.r)
            .enumerate()
            .map(|(i, (&x, &r))| x as i64 * (p - 1 - r as i64) * p.pow(i as u32))
            .sum();
        let r = self.r_int() as i64;
        TorusChar::new(f, e + self.twist, -r - e + self.twist)
    }

    /// W_r⃗ = ⊗ W_{r_i}.
    pub fn w_subspace(&self) -> Subspace {
        let f = &self.rep.field;
        let p = self.p();
        let mut vecs: Vec<Vector> = vec![vec![Fq::ONE]];
        for c in &self.components {
            let w = c.w_basis(p);
            vecs = vecs.iter().flat_map(|a| w.iter().map(move |b| vec_kron(f, a, b))).collect();
        }
        Subspace::span(f, self.dim(), &vecs)
    }

    /// Σ_{u ∈ U} u n_s^{-1} b_ε by enumeration and by the case formula.
    pub fn tns_on_socle_basis(&self, eps: &[u8]) -> Result<TnsCheck> {
        let f = &self.rep.field;
        let p = self.p();
        let n = self.r.len();
        if eps.len() != n || !self.sigma().iter().any(|e| e == eps) {
            return Err(Error::EpsilonOutOfSigma);
        }
        let v = self.b(eps);
        let brute = self.rep.tns_unchecked(&v);
        let vanishing = eps.iter().zip(&self.r).any(|(&e, &r)| e == 0 && r != p - 1);
        let ones = vec![1u8; n];
        let closed = if vanishing {
            vec![Fq::ZERO; self.dim()]
        } else if self.r.iter().any(|&r| r != 0) {
            let sign = if (1 + self.r_int()) % 2 == 0 { Fq::ONE } else { f.neg(Fq::ONE) };
            linalg::vec_scale(f, &self.b(&vec![0; n]), sign)
        } else {
            linalg::vec_neg(f, &linalg::vec_add(f, &self.b(&vec![0; n]), &self.b(&ones)))
        };
        let agree = brute == closed;
        Ok(TnsCheck { brute, closed, agree })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let sigma: Vec<String> = self.sigma().iter().map(|e| eps_string(e)).collect();
        json!({ "r": self.r, "twist": self.twist, "dim": self.dim(), "sigma": sigma })
    }
}

fn vec_kron(f: &Field, a: &[Fq], b: &[Fq]) -> Vector {
    a.iter().flat_map(|&x| b.iter().map(move |&y| f.mul(x, y))).collect()
}

pub fn eps_string(e: &[u8]) -> String {
    e.iter().map(|x| x.to_string()).collect()
}

/// R_r⃗ ⊗ det^twist, component i twisted by Fr^i.
pub fn build_r_tuple(f: &Field, r: &[u32], twist: i64) -> Result<RTuple> {
    if r.len() != f.n() as usize {
        return Err(Error::InvalidLabel(format!("tuple {r:?} has the wrong length")));
    }
    let components: Vec<RSpace> = r.iter().map(|&x| build_r(f, x)).collect::<Result<_>>()?;
    let mut rep = GammaRep::trivial(f);
    for (i, c) in components.iter().enumerate() {
        rep = rep.tensor(&c.rep.frobenius_twist(i as u32));
    }
    let m = f.q() as i64 - 1;
    let twist = twist.rem_euclid(m.max(1));
    Ok(RTuple { r: r.to_vec(), twist, components, rep: rep.det_twist(twist) })
}

/// Size of Σ_r⃗.
pub fn sigma_size(f: &Field, r: &[u32]) -> usize {
    1 << r.iter().filter(|&&x| x != f.p() - 1).count()
}

/// An injective envelope with its socle embedding.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub chi: TorusChar,
    pub j_is_s: bool,
    pub bn: IrrepLabel,
    pub tuple: RTuple,
    /// True when the tuple is R_0⃗ ⊗ det^a, the joint envelope of ρ_{χ,S} and ρ_{χ,∅}.
    pub joint: bool,
    /// dim inj ρ_{χ,J}.
    pub dim: usize,
    pub socle_generator: Vector,
    pub irrep: Irrep,
    /// Columns are the images of the irrep basis.
    pub embedding: Matrix,
}

fn bn_parts(label: &IrrepLabel) -> (u32, Vec<u32>) {
    match label {
        IrrepLabel::BrauerNesbitt { a, r } => (*a, r.clone()),
        IrrepLabel::CarterLusztig { .. } => unreachable!("dictionary returns the other form"),
    }
}

/// dim inj ρ_{χ,J} read off the tuple data, without building anything.
pub fn envelope_dim(f: &Field, chi: TorusChar, j_is_s: bool) -> Result<usize> {
    let (_, r) = bn_parts(&dictionary(f, &IrrepLabel::CarterLusztig { chi, j_is_s })?);
    let q = f.q() as usize;
    Ok(if chi.is_regular() {
        sigma_size(f, &r) * q
    } else if j_is_s {
        (sigma_size(f, &r) - 1) * q
    } else {
        q
    })
}

pub fn identify_injective_envelope(f: &Field, chi: TorusChar, j_is_s: bool) -> Result<Envelope> {
    let bn = dictionary(f, &IrrepLabel::CarterLusztig { chi, j_is_s })?;
    let (a, r) = bn_parts(&bn);
    let n = f.n() as usize;
    let q = f.q() as usize;
    let (tuple, generator, joint) = if chi.is_regular() {
        let t = build_r_tuple(f, &r, a as i64 + undigits(f, &r) as i64)?;
        let g = t.b(&vec![0; n]);
        (t, g, false)
    } else {
        let t = build_r_tuple(f, &vec![0; n], a as i64)?;
        let b0 = t.b(&vec![0; n]);
        let g = if j_is_s { b0 } else { linalg::vec_add(f, &b0, &t.b(&vec![1; n])) };
        (t, g, true)
    };
    let irrep = carter_lusztig_irrep(f, chi, j_is_s)?;
    let (sub_rep, sub) = tuple.rep.generated_subrep(std::slice::from_ref(&generator));
    let iso = irrep
        .rep
        .isomorphism(&sub_rep)
        .ok_or_else(|| Error::AmbientMismatch(format!("socle of the envelope of {chi:?} is not the expected irreducible")))?;
    let inclusion = Matrix::from_cols(tuple.dim(), &sub.basis);
    let embedding = inclusion.mul(f, &iso);
    let dim = if !joint {
        tuple.dim()
    } else if j_is_s {
        tuple.dim() - q
    } else {
        q
    };
    Ok(Envelope { chi, j_is_s, bn, tuple, joint, dim, socle_generator: generator, irrep, embedding })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Supersingular(CharOrbit),
    L(CharOrbit),
}

/// A summand of the extended module with its expected isomorphism type.
#[derive(Clone, Debug)]
pub struct Block {
    pub kind: BlockKind,
    pub basis: Vec<Vector>,
}

/// The H-module on the U-invariants of the envelope(s) attached to γ.
#[derive(Clone, Debug)]
pub struct FullHecke {
    pub gamma: CharOrbit,
    pub tuples: Vec<RTuple>,
    pub labels: Vec<String>,
    pub module: HModule,
    pub blocks: Vec<Block>,
}

impl FullHecke {
    pub fn supersingular_count(&self) -> usize {
        self.blocks.iter().filter(|b| matches!(b.kind, BlockKind::Supersingular(_))).count()
    }

    /// Each block is a submodule of the expected type and the blocks span the module.
    pub fn verify_blocks(&self) -> Result<bool> {
        let f = &self.module.field;
        let mut all = Vec::new();
        for b in &self.blocks {
            if !self.module.is_stable(&b.basis) {
                return Ok(false);
            }
            let sub = self.module.submodule(&b.basis)?;
            let model = match b.kind {
                BlockKind::Supersingular(g) => make_m_gamma(f, g, Fq::ONE)?,
                BlockKind::L(g) => make_l_gamma(f, g, Fq::ONE)?,
            };
            if module_iso(&sub, &model).is_none() {
                return Ok(false);
            }
            all.extend(b.basis.iter().cloned());
        }
        Ok(all.len() == self.module.dim && Subspace::span(f, self.module.dim, &all).dim() == self.module.dim)
    }

    /// Expected number of supersingular summands.
    pub fn expected_supersingular_count(&self) -> usize {
        let f = &self.module.field;
        let p = f.p();
        let n = f.n();
        if !self.gamma.is_regular() {
            return 1 << (n - 1);
        }
        let r = &self.tuples[0].r;
        let c = r.iter().filter(|&&x| x != p - 1).count() as u32;
        let d = r.iter().filter(|&&x| x != 0).count() as u32;
        (1usize << (c - 1)) + (1usize << (d - 1)) - 2
    }
}

struct Side<'a> {
    tuple: &'a RTuple,
    offset: usize,
    sigma: Vec<Vec<u8>>,
}

impl Side<'_> {
    fn pos(&self, eps: &[u8]) -> usize {
        let e = self.tuple.reduce(eps);
        self.offset + self.sigma.iter().position(|s| *s == e).expect("reduced ε lies in Σ")
    }
}

/// Extends the H_K-action on the envelope invariants to H via the T_Π pairing.
pub fn extend_to_full_hecke(f: &Field, gamma: CharOrbit) -> Result<FullHecke> {
    let chi = gamma.chi;
    let n = f.n() as usize;
    let zero = vec![0u8; n];
    let ones = vec![1u8; n];
    let tuples = if chi.is_regular() {
        let (a, r) = bn_parts(&dictionary(f, &IrrepLabel::CarterLusztig { chi, j_is_s: false })?);
        let rr = undigits(f, &r) as i64;
        let rbar: Vec<u32> = r.iter().map(|&x| f.p() - 1 - x).collect();
        vec![build_r_tuple(f, &r, a as i64 + rr)?, build_r_tuple(f, &rbar, a as i64)?]
    } else {
        let (a, _) = bn_parts(&dictionary(f, &IrrepLabel::CarterLusztig { chi, j_is_s: true })?);
        vec![build_r_tuple(f, &vec![0; n], a as i64)?]
    };
    let mut sides = Vec::new();
    let mut offset = 0;
    for t in &tuples {
        let sigma = t.sigma();
        let len = sigma.len();
        sides.push(Side { tuple: t, offset, sigma });
        offset += len;
    }
    let dim = offset;
    let mut labels = Vec::new();
    let mut chars = Vec::new();
    let mut tns = Matrix::zero(dim, dim);
    for (si, side) in sides.iter().enumerate() {
        let t = side.tuple;
        let vecs: Vec<Vector> = side.sigma.iter().map(|e| t.b(e)).collect();
        let lb = LinearBasis::new(f, t.dim(), &vecs)?;
        for (i, e) in side.sigma.iter().enumerate() {
            labels.push(format!("{}({})", if si == 0 { "b" } else { "bbar" }, eps_string(e)));
            let v = &vecs[i];
            chars.push(torus_character(&t.rep, v).ok_or(Error::NotUInvariant)?);
            let image = t.rep.tns_unchecked(v);
            let c = lb.coords(f, &image).ok_or(Error::NotUInvariant)?;
            for (j, x) in c.into_iter().enumerate() {
                tns.set(side.offset + i, side.offset + j, x);
            }
        }
    }
    let mut tpi = Matrix::zero(dim, dim);
    let mut blocks = Vec::new();
    let unit = |i: usize| linalg::unit_vector(dim, i);
    let pair_sigma_prime = |side: &Side, tpi: &mut Matrix, blocks: &mut Vec<Block>| {
        let mut seen = Vec::new();
        for e in side.tuple.sigma_prime() {
            let comp: Vec<u8> = e.iter().map(|x| 1 - x).collect();
            let (i, j) = (side.pos(&e), side.pos(&comp));
            tpi.set(i, j, Fq::ONE);
            if !seen.contains(&j) {
                seen.push(i);
                let orbit = CharOrbit::new(chars[i]);
                blocks.push(Block { kind: BlockKind::Supersingular(orbit), basis: vec![unit(i), unit(j)] });
            }
        }
    };
    if chi.is_regular() {
        let (a, b) = (&sides[0], &sides[1]);
        let pairs = [(a.pos(&zero), b.pos(&zero)), (a.pos(&ones), b.pos(&ones))];
        for (i, j) in pairs {
            tpi.set(i, j, Fq::ONE);
            tpi.set(j, i, Fq::ONE);
        }
        blocks.push(Block { kind: BlockKind::L(gamma), basis: vec![unit(pairs[0].0), unit(pairs[1].0), unit(pairs[0].1), unit(pairs[1].1)] });
        pair_sigma_prime(a, &mut tpi, &mut blocks);
        pair_sigma_prime(b, &mut tpi, &mut blocks);
    } else {
        let s = &sides[0];
        let (i0, i1) = (s.pos(&zero), s.pos(&ones));
        // b_0 ↦ b_0 + b_1, b_1 ↦ -b_1
        tpi.set(i0, i0, Fq::ONE);
        tpi.set(i0, i1, Fq::ONE);
        tpi.set(i1, i1, f.neg(Fq::ONE));
        let main = linalg::vec_add(f, &unit(i0), &unit(i1));
        blocks.push(Block { kind: BlockKind::Supersingular(gamma), basis: vec![main, unit(i0)] });
        pair_sigma_prime(s, &mut tpi, &mut blocks);
    }
    let module = HModule::from_parts(f, tns, tpi, hecke::diagonal_idempotents(&chars))?;
    Ok(FullHecke { gamma, tuples, labels, module, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::{build_v_tuple, Gen};
    use crate::hecke::{hk_module_of_rep, orbits, restrict_to_hk, HKLabel};
    use proptest::prelude::*;

    fn f(p: u32, n: u32) -> Field {
        Field::new(p, n).unwrap()
    }

    fn small_fields() -> Vec<Field> {
        vec![f(2, 1), f(3, 1), f(5, 1), f(2, 2), f(3, 2)]
    }

    #[test]
    fn sigma_prime_characters_are_regular() {
        for f in small_fields() {
            for label in crate::gamma::all_cl_labels(&f) {
                let crate::gamma::IrrepLabel::CarterLusztig { chi, j_is_s } = label else { unreachable!() };
                let env = identify_injective_envelope(&f, chi, j_is_s).unwrap();
                for e in env.tuple.sigma_prime() {
                    assert!(env.tuple.b_character(&e).is_regular(), "q={} {label:?} eps={}", f.q(), eps_string(&e));
                }
            }
        }
    }

    // integer recursion with exact rationals, reduced mod p at the end
    fn a_oracle(p: i64, r: i64) -> Vec<i64> {
        use num_rational::Rational64;
        let len = (p - r) as usize;
        let a1: i64 = (1..=p - r - 2).product();
        let mut a = vec![Rational64::from_integer(0), Rational64::from_integer(a1)];
        for i in 1..len as i64 - 1 {
            let num: i64 = (1..=i).map(|j| r + j).product();
            let den: i64 = (1..=i).map(|j| p - r - 1 - j).product();
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let next = a[i as usize] + Rational64::new(sign * num, den) * (a[1] - a[0]);
            a.push(next);
        }
        a.truncate(len);
        a.into_iter()
            .map(|x| {
                let (nu, de) = (x.numer().rem_euclid(p), x.denom().rem_euclid(p));
                let inv = (1..p).find(|k| k * de % p == 1).unwrap();
                nu * inv % p
            })
            .collect()
    }

    #[test]
    fn a_coefficient_examples() {
        assert_eq!(a_coefficients(5, 1).unwrap(), vec![0, 2, 0, 1]);
        for p in [2u32, 3, 5, 7] {
            for r in 0..p - 1 {
                let a = a_coefficients(p, r).unwrap();
                assert_eq!(a.len(), (p - r) as usize);
                assert_eq!(a[0], 0);
                let want: Vec<u32> = a_oracle(p as i64, r as i64).into_iter().map(|x| x as u32).collect();
                assert_eq!(a, want, "p={p} r={r}");
            }
            assert!(a_coefficients(p, p - 1).is_err());
        }
        assert_eq!(a_coefficients(4, 0), Err(Error::CompositeP(4)));
    }

    #[test]
    fn divided_powers_reproduce_unipotents() {
        for fld in small_fields() {
            for d in 0..2 * fld.p() {
                let v = symmetric_power_rep(&fld, d);
                for x in fld.elements() {
                    let mut xu = Matrix::zero(d as usize + 1, d as usize + 1);
                    let mut yl = xu.clone();
                    for k in 0..=d {
                        let lk = fld.pow(x, k as i64);
                        let lk = if k == 0 { Fq::ONE } else { lk };
                        xu = xu.add(&fld, &DividedPower::new(Letter::E, k).on_sym(&fld, d).scale(&fld, lk));
                        yl = yl.add(&fld, &DividedPower::new(Letter::F, k).on_sym(&fld, d).scale(&fld, lk));
                    }
                    assert_eq!(&xu, v.gen_matrix(Gen::Upper(x)));
                    assert_eq!(&yl, v.gen_matrix(Gen::Lower(x)));
                }
            }
        }
    }

    #[test]
    fn r_space_dimensions() {
        let f3 = f(3, 1);
        assert_eq!(build_r(&f3, 0).unwrap().dim(), 6);
        assert_eq!(build_r(&f3, 2).unwrap().dim(), 3);
        for fld in [f(2, 1), f(3, 1), f(5, 1), f(7, 1)] {
            let p = fld.p();
            for r in 0..p {
                let rs = build_r(&fld, r).unwrap();
                assert_eq!(rs.dim(), if r == p - 1 { p as usize } else { 2 * p as usize });
            }
        }
        assert!(build_r(&f3, 3).is_err());
    }

    #[test]
    fn e_span_is_a_symmetric_power() {
        for fld in [f(3, 1), f(5, 1), f(3, 2)] {
            let p = fld.p();
            for r in 0..p - 1 {
                let rs = build_r(&fld, r).unwrap();
                let count = rs.e_count(p);
                let es: Vec<Vector> = rs.vectors[..count].to_vec();
                let lb = LinearBasis::new(&fld, rs.ambient.dim, &es).unwrap();
                let sub = rs.ambient.restrict_with(count, &es, |v| lb.coords(&fld, v)).unwrap();
                let target = symmetric_power_rep(&fld, 2 * p - r - 2);
                assert_eq!(sub.generator_matrices(), target.generator_matrices(), "p={p} r={r}");
            }
        }
    }

    #[test]
    fn divided_powers_on_e_middle() {
        for fld in [f(3, 1), f(5, 1), f(7, 1)] {
            let p = fld.p();
            for r in 0..p - 1 {
                let rs = build_r(&fld, r).unwrap();
                let v = &rs.vectors[(p - r - 1) as usize];
                for k in 0..=2 * p {
                    let fk = DividedPower::new(Letter::F, k).on_tensor(&fld, p - 1 - r, p - 1).apply(&fld, v);
                    assert_eq!(linalg::is_zero_vec(&fk), k > r, "p={p} r={r} k={k}");
                    if k >= 1 {
                        let ek = DividedPower::new(Letter::E, k).on_tensor(&fld, p - 1 - r, p - 1).apply(&fld, v);
                        assert!(linalg::is_zero_vec(&ek));
                    }
                }
            }
        }
    }

    #[test]
    fn w_space_structure() {
        for fld in [f(3, 1), f(5, 1)] {
            let p = fld.p();
            for r in 0..p {
                let rs = build_r(&fld, r).unwrap();
                let w = rs.w_basis(p);
                let sub = Subspace::span(&fld, rs.dim(), &w);
                let wr = rs.rep.restrict(&sub).unwrap();
                assert_eq!(wr.u_fixed().dim(), 1);
                assert!(rs.rep.is_u_invariant(&rs.e((p - r - 1) as usize)));
                let target = build_v_tuple(&fld, &[r], (p - r - 1) as i64).unwrap();
                assert!(wr.isomorphism(&target).is_some(), "p={p} r={r}");
            }
        }
    }

    #[test]
    fn tuple_examples() {
        let f9 = f(3, 2);
        let t = build_r_tuple(&f9, &[1, 1], 0).unwrap();
        assert_eq!(t.sigma().len(), 4);
        assert_eq!(t.dim(), 36);
        let top = build_r_tuple(&f9, &[2, 2], 0).unwrap();
        assert_eq!(top.sigma(), vec![vec![0, 0]]);
        assert_eq!(top.dim(), 9);
        assert_eq!(top.delta(), vec![0, 0]);
        let mixed = build_r_tuple(&f9, &[2, 0], 0).unwrap();
        assert_eq!(mixed.delta(), vec![0, 1]);
        assert_eq!(mixed.sigma_prime(), Vec::<Vec<u8>>::new());
        assert_eq!(mixed.b(&[1, 1]), mixed.b(&mixed.delta()));
        assert!(t.label(0).contains('⊗'));
        for c in &t.components {
            assert!(c.rep.is_u_invariant(&c.e(0)));
        }
    }

    #[test]
    fn tuple_invariants_and_characters() {
        for fld in small_fields() {
            let p = fld.p();
            let n = fld.n() as usize;
            let q = fld.q() as usize;
            let tuples: Vec<Vec<u32>> = (0..p.pow(n as u32)).map(|x| crate::gamma::digits(&fld, x)).collect();
            for r in tuples {
                let t = build_r_tuple(&fld, &r, 1).unwrap();
                let sigma = t.sigma();
                assert_eq!(t.dim(), sigma.len() * q);
                let bs: Vec<Vector> = sigma.iter().map(|e| t.b(e)).collect();
                let inv = t.rep.u_fixed();
                assert_eq!(inv.dim(), sigma.len());
                assert!(inv.equals(&Subspace::span(&fld, t.dim(), &bs)).unwrap());
                for e in &sigma {
                    let direct = torus_character(&t.rep, &t.b(e)).unwrap();
                    assert_eq!(direct, t.b_character(e), "r={r:?} e={e:?}");
                    let comp: Vec<u8> = e.iter().map(|x| 1 - x).collect();
                    assert_eq!(t.b_character(e).s(), t.b_character(&comp));
                }
                let delta = t.delta();
                let zero = vec![0u8; n];
                for e in t.sigma_prime() {
                    assert!(e != zero && e != delta);
                    if fld.q() > 2 {
                        assert!(t.b_character(&e).is_regular(), "r={r:?} e={e:?}");
                    }
                }
                assert_eq!(t.b(&vec![1; n]), t.b(&delta));
            }
        }
    }

    #[test]
    fn hardcore_agreement_everywhere() {
        for fld in small_fields() {
            let n = fld.n() as usize;
            for x in 0..fld.p().pow(n as u32) {
                let r = crate::gamma::digits(&fld, x);
                let t = build_r_tuple(&fld, &r, 0).unwrap();
                for e in t.sigma() {
                    let c = t.tns_on_socle_basis(&e).unwrap();
                    assert!(c.agree, "q={} r={r:?} e={e:?}", fld.q());
                }
            }
        }
        let t = build_r_tuple(&f(3, 1), &[2], 0).unwrap();
        assert_eq!(t.tns_on_socle_basis(&[1]), Err(Error::EpsilonOutOfSigma));
    }

    #[test]
    fn hardcore_cases() {
        let f5 = f(5, 1);
        let t = build_r_tuple(&f5, &[0], 0).unwrap();
        let c = t.tns_on_socle_basis(&[1]).unwrap();
        let want = linalg::vec_neg(&f5, &linalg::vec_add(&f5, &t.b(&[0]), &t.b(&[1])));
        assert_eq!(c.brute, want);
        assert!(linalg::is_zero_vec(&t.tns_on_socle_basis(&[0]).unwrap().brute));
        let t2 = build_r_tuple(&f5, &[2], 0).unwrap();
        assert_eq!(t2.tns_on_socle_basis(&[1]).unwrap().brute, linalg::vec_neg(&f5, &t2.b(&[0])));
    }

    #[test]
    fn socle_of_b_zero() {
        for fld in [f(3, 1), f(5, 1), f(2, 2)] {
            let n = fld.n() as usize;
            for x in 0..fld.p().pow(n as u32) {
                let r = crate::gamma::digits(&fld, x);
                let t = build_r_tuple(&fld, &r, 0).unwrap();
                let (sub, _) = t.rep.generated_subrep(&[t.b(&vec![0; n])]);
                assert!(sub.is_irreducible().unwrap());
                let rr = undigits(&fld, &r) as i64;
                let target = build_v_tuple(&fld, &r, fld.q() as i64 - 1 - rr).unwrap();
                assert!(sub.isomorphism(&target).is_some());
                assert!(t.w_subspace().contains(&fld, &t.b(&vec![0; n])));
            }
        }
    }

    #[test]
    fn envelopes_at_q_equals_p() {
        let f5 = f(5, 1);
        for chi in TorusChar::all(&f5) {
            let js: &[bool] = if chi.is_regular() { &[false] } else { &[false, true] };
            for &j in js {
                let env = identify_injective_envelope(&f5, chi, j).unwrap();
                assert_eq!(env.dim, if chi.is_regular() { 10 } else { 5 });
                assert_eq!(envelope_dim(&f5, chi, j).unwrap(), env.dim);
                let gens = env.irrep.rep.generator_matrices();
                let big = env.tuple.rep.generator_matrices();
                for (g, b) in gens.iter().zip(&big) {
                    assert_eq!(env.embedding.mul(&f5, g), b.mul(&f5, &env.embedding));
                }
                assert_eq!(env.embedding.rank(&f5), env.irrep.rep.dim);
            }
        }
        assert!(identify_injective_envelope(&f5, TorusChar::new(&f5, 1, 2), true).is_err());
    }

    #[test]
    fn trivial_and_steinberg_in_r_zero() {
        for fld in [f(3, 1), f(2, 2), f(3, 2)] {
            let triv = TorusChar::trivial();
            let a = identify_injective_envelope(&fld, triv, true).unwrap();
            let b = identify_injective_envelope(&fld, triv, false).unwrap();
            assert!(a.joint && b.joint);
            assert_eq!(a.tuple.r, b.tuple.r);
            assert_eq!(a.irrep.rep.dim, 1);
            assert_eq!(b.irrep.rep.dim, fld.q() as usize);
        }
    }

    #[test]
    fn global_dimension_count() {
        for fld in small_fields() {
            let q = fld.q() as usize;
            let mut total = 0;
            for label in crate::gamma::all_cl_labels(&fld) {
                let IrrepLabel::CarterLusztig { chi, j_is_s } = label else { unreachable!() };
                let (_, r) = bn_parts(&dictionary(&fld, &label).unwrap());
                let dim_rho: usize = r.iter().map(|&x| x as usize + 1).product();
                total += dim_rho * envelope_dim(&fld, chi, j_is_s).unwrap();
            }
            assert_eq!(total, (q * q - 1) * (q * q - q));
        }
    }

    #[test]
    fn full_hecke_extensions() {
        for fld in small_fields() {
            for g in orbits(&fld) {
                let full = extend_to_full_hecke(&fld, g).unwrap();
                assert!(full.module.check_relations().all_pass(), "{:?}", full.module.check_relations());
                assert!(full.verify_blocks().unwrap(), "q={} {:?}", fld.q(), g);
                assert_eq!(full.supersingular_count(), full.expected_supersingular_count());
                if fld.n() == 1 {
                    if g.is_regular() {
                        assert_eq!(full.blocks.len(), 1);
                        assert!(matches!(full.blocks[0].kind, BlockKind::L(_)));
                    } else {
                        assert_eq!(full.blocks.len(), 1);
                        assert_eq!(full.blocks[0].kind, BlockKind::Supersingular(g));
                    }
                }
            }
        }
    }

    #[test]
    fn regular_q9_example() {
        let f9 = f(3, 2);
        // r⃗ = (1, 0) means c - d = 1
        let chi = TorusChar::new(&f9, 2, 1);
        let full = extend_to_full_hecke(&f9, CharOrbit::new(chi)).unwrap();
        assert_eq!(full.module.dim, 6);
        assert_eq!(full.supersingular_count(), 1);
        assert_eq!(full.blocks.len(), 2);
    }

    #[test]
    fn restriction_matches_envelope_invariants() {
        fn sorted(mut v: Vec<HKLabel>) -> Vec<String> {
            let mut s: Vec<String> = v.drain(..).map(|l| format!("{l:?}")).collect();
            s.sort();
            s
        }
        for fld in [f(3, 1), f(5, 1), f(2, 2), f(3, 2)] {
            for g in orbits(&fld) {
                let full = extend_to_full_hecke(&fld, g).unwrap();
                let ours = sorted(restrict_to_hk(&full.module.restrict_to_hk()).into_iter().map(|s| s.label).collect());
                let mut theirs = Vec::new();
                for t in &full.tuples {
                    let (m, _) = hk_module_of_rep(&t.rep);
                    assert!(m.check_relations().all_pass());
                    theirs.extend(restrict_to_hk(&m).into_iter().map(|s| s.label));
                }
                assert_eq!(ours, sorted(theirs));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn characters_match_closed_form(x in 0u32..9, twist in 0i64..8) {
            let fld = f(3, 2);
            let r = crate::gamma::digits(&fld, x);
            let t = build_r_tuple(&fld, &r, twist).unwrap();
            for e in t.sigma() {
                prop_assert_eq!(torus_character(&t.rep, &t.b(&e)), Some(t.b_character(&e)));
            }
        }
    }
}
