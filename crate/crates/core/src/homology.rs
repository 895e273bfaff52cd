//! Diagrams (D0, D1, r), the coefficient systems they induce on the tree,
//! finitely supported chains, the boundary map and the class calculus of H_0.
//!
//! A value x stored at vertex v means the vector (g_v)_{σ0} x; a value stored
//! under the key v₊ of the edge {v₊, parent(v₊)} means ω((v₊, v₋)) = (g_{v₊})_{σ1} x.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use serde_json::json;

use crate::error::{Error, Result};
use crate::gamma::{carter_lusztig_irrep, GammaElement, GammaRep, TorusChar};
use crate::hecke::HModule;
use crate::linalg::{self, LinearBasis, Matrix, Subspace, Vector};
use crate::scalars::{Field, Fq};
use crate::tree::{self, act_on_vertex, factor_in_stabilizer, GL2Local, Simplex, Vertex};

/// D0 is a representation of F^×K through K → Γ with t acting trivially; D1 carries the
/// action of F^×I through I → H (U and t trivial) and P = ρ1(Π) = ρ1(Π^{-1}).
#[derive(Clone, Debug)]
pub struct Diagram {
    pub field: Field,
    pub d0: GammaRep,
    pub dim1: usize,
    /// ρ1(diag(g^i, g^j)) at index i (q-1) + j.
    h1: Vec<Matrix>,
    pub r: Matrix,
    pub p: Matrix,
    pub r_rank: usize,
    /// Image of the push map at a vertex whose σ0-ward neighbor is its parent.
    up: Subspace,
    /// Push maps -ρ0([[c,1],[1,0]]) r P indexed by c, with their images.
    down: Vec<(Matrix, Subspace)>,
}

fn h_index(f: &Field, h: &GammaElement) -> Result<usize> {
    let m = f.q() as usize - 1;
    Ok(f.dlog(h.a)? as usize * m + f.dlog(h.d)? as usize)
}

impl Diagram {
    /// Validates and assembles a diagram from ρ0, the two torus generators on D1, r and P.
    pub fn new(f: &Field, d0: GammaRep, d1_gens: [Matrix; 2], r: Matrix, p: Matrix) -> Result<Diagram> {
        let dim1 = p.rows;
        if r.rows != d0.dim || r.cols != dim1 || !p.is_square() || d1_gens.iter().any(|m| m.rows != dim1 || !m.is_square())
        {
            return Err(Error::InvalidDiagram("shapes".into()));
        }
        let m = f.q() as u64 - 1;
        let mut h1 = Vec::with_capacity((m * m) as usize);
        for i in 0..m {
            let a = d1_gens[0].pow(f, i);
            for j in 0..m {
                h1.push(a.mul(f, &d1_gens[1].pow(f, j)));
            }
        }
        let mut d = Diagram {
            field: f.clone(),
            d0,
            dim1,
            h1,
            r,
            p,
            r_rank: 0,
            up: Subspace::zero(0),
            down: Vec::new(),
        };
        d.validate()?;
        d.r_rank = d.r.rank(f);
        d.up = Subspace::span(f, d.d0.dim, &d.r.transpose().row_vectors());
        d.down = f
            .elements()
            .map(|c| {
                let t = d.push_down(c);
                let img = Subspace::span(f, d.d0.dim, &t.transpose().row_vectors());
                (t, img)
            })
            .collect();
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        let f = &self.field;
        let bad = |s: &str| Err(Error::InvalidDiagram(s.into()));
        if self.p.mul(f, &self.p) != Matrix::identity(self.dim1) {
            return bad("P^2 is not the identity");
        }
        let m = f.q() as i64 - 1;
        for (i, j) in [(1, 0), (0, 1)] {
            let h = GammaElement::diag(f.gpow(i), f.gpow(j));
            let hs = GammaElement::diag(f.gpow(j), f.gpow(i));
            let rho1 = self.rho1_h(&h)?;
            if self.r.mul(f, rho1) != self.d0.matrix(&h).mul(f, &self.r) {
                return bad("r is not H-equivariant");
            }
            if self.p.mul(f, rho1) != self.rho1_h(&hs)?.mul(f, &self.p) {
                return bad("P does not conjugate h to s h s");
            }
            if m == 1 {
                break;
            }
        }
        for x in f.prime_basis() {
            if self.d0.matrix(&GammaElement::upper(x)).mul(f, &self.r) != self.r {
                return bad("image of r is not U-invariant");
            }
        }
        Ok(())
    }

    /// -ρ0([[c,1],[1,0]]) r P: the contribution at v₋ of an edge value, c the label of v₊.
    fn push_down(&self, c: Fq) -> Matrix {
        let f = &self.field;
        let kappa = GammaElement { a: c, b: Fq::ONE, c: Fq::ONE, d: Fq::ZERO };
        self.d0.matrix(&kappa).mul(f, &self.r).mul(f, &self.p).scale(f, f.neg(Fq::ONE))
    }

    pub fn dim0(&self) -> usize {
        self.d0.dim
    }

    pub fn rho1_h(&self, h: &GammaElement) -> Result<&Matrix> {
        Ok(&self.h1[h_index(&self.field, h)?])
    }

    pub fn is_injective(&self) -> bool {
        self.r_rank == self.dim1
    }

    pub fn is_bijective(&self) -> bool {
        self.is_injective() && self.dim1 == self.d0.dim
    }

    /// D_γ for the orbit of χ: D0 = ρ_{χ,J} ⊕ ρ_{χ^s,J̄}, D1 = its two distinguished lines, P the swap.
    pub fn d_gamma(f: &Field, chi: TorusChar, j_is_s: bool) -> Result<Diagram> {
        let jbar = !chi.is_regular() && !j_is_s;
        let a = carter_lusztig_irrep(f, chi, j_is_s).map_err(|_| Error::InvalidLabel(format!("{chi:?}")))?;
        let b = carter_lusztig_irrep(f, chi.s(), jbar)?;
        let d0 = a.rep.direct_sum(&b.rep);
        let mut v1 = a.generator.clone();
        v1.extend(vec![Fq::ZERO; b.rep.dim]);
        let mut v2 = vec![Fq::ZERO; a.rep.dim];
        v2.extend(b.generator.iter().copied());
        let r = Matrix::from_cols(d0.dim, &[v1, v2]);
        let gens = [(1, 0), (0, 1)].map(|(i, j)| {
            let h = (f.gpow(i), f.gpow(j));
            let mut m = Matrix::zero(2, 2);
            m.set(0, 0, chi.eval(f, h.0, h.1));
            m.set(1, 1, chi.s().eval(f, h.0, h.1));
            m
        });
        let p = Matrix::from_rows(&[vec![Fq::ZERO, Fq::ONE], vec![Fq::ONE, Fq::ZERO]]);
        Diagram::new(f, d0, gens, r, p)
    }

    /// The diagram of the constant system on the character det^a of G (t acting trivially).
    pub fn constant(f: &Field, a: i64) -> Result<Diagram> {
        let d0 = GammaRep::det_char(f, a);
        let gens = [(1, 0), (0, 1)].map(|(i, j)| Matrix::scalar(1, f.pow(f.gpow(i + j), a)));
        let sign = if a.rem_euclid(2) == 1 { f.neg(Fq::ONE) } else { Fq::ONE };
        Diagram::new(f, d0, gens, Matrix::identity(1), Matrix::scalar(1, sign))
    }

    /// det^a ⊕ det^a on both sides, r the identity and P the swap.
    pub fn iso_pair(f: &Field, a: i64) -> Result<Diagram> {
        let d0 = GammaRep::det_char(f, a).direct_sum(&GammaRep::det_char(f, a));
        let gens = [(1, 0), (0, 1)].map(|(i, j)| Matrix::scalar(2, f.pow(f.gpow(i + j), a)));
        let p = Matrix::from_rows(&[vec![Fq::ZERO, Fq::ONE], vec![Fq::ONE, Fq::ZERO]]);
        Diagram::new(f, d0, gens, Matrix::identity(2), p)
    }

    /// The chains at σ0 carrying r of the standard basis of D1.
    pub fn seeds(&self) -> Vec<ZeroChain> {
        (0..self.dim1).map(|i| ZeroChain::single(Vertex::sigma0(), self.r.col(i))).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "dim0": self.d0.dim,
            "dim1": self.dim1,
            "r": self.r.to_json(),
            "P": self.p.to_json(),
        })
    }
}

fn prune(map: BTreeMap<Vertex, Vector>) -> BTreeMap<Vertex, Vector> {
    map.into_iter().filter(|(_, v)| !linalg::is_zero_vec(v)).collect()
}

fn add_into(f: &Field, map: &mut BTreeMap<Vertex, Vector>, key: Vertex, x: &[Fq]) {
    match map.get_mut(&key) {
        Some(y) => *y = linalg::vec_add(f, y, x),
        None => {
            map.insert(key, x.to_vec());
        }
    }
}

/// A finitely supported 0-chain; no zero values are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ZeroChain {
    pub values: BTreeMap<Vertex, Vector>,
}

/// A finitely supported oriented 1-chain keyed by the far endpoint v₊ of each edge.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OneChain {
    pub values: BTreeMap<Vertex, Vector>,
}

macro_rules! chain_ops {
    ($t:ty) => {
        impl $t {
            pub fn new() -> Self {
                Self::default()
            }

            pub fn single(v: Vertex, x: Vector) -> Self {
                let mut c = Self::default();
                c.values.insert(v, x);
                c.values = prune(c.values);
                c
            }

            pub fn from_map(values: BTreeMap<Vertex, Vector>) -> Self {
                Self { values: prune(values) }
            }

            pub fn is_zero(&self) -> bool {
                self.values.is_empty()
            }

            pub fn add(&self, f: &Field, o: &Self) -> Self {
                let mut m = self.values.clone();
                for (k, x) in &o.values {
                    add_into(f, &mut m, k.clone(), x);
                }
                Self::from_map(m)
            }

            pub fn scale(&self, f: &Field, c: Fq) -> Self {
                Self::from_map(self.values.iter().map(|(k, x)| (k.clone(), linalg::vec_scale(f, x, c))).collect())
            }

            pub fn sub(&self, f: &Field, o: &Self) -> Self {
                self.add(f, &o.scale(f, f.neg(Fq::ONE)))
            }

            pub fn to_json(&self) -> serde_json::Value {
                serde_json::Value::Array(
                    self.values
                        .iter()
                        .map(|(v, x)| json!({ "vertex": v.to_json(), "vector": x.iter().map(|c| c.0).collect::<Vec<_>>() }))
                        .collect(),
                )
            }
        }
    };
}

chain_ops!(ZeroChain);
chain_ops!(OneChain);

/// One leaf-peeling step: the value pushed off `vertex` through the edge keyed by `edge`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeelStep {
    pub vertex: Vertex,
    pub toward: Vertex,
    pub edge: Vertex,
    pub value: Vector,
}

impl PeelStep {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "vertex": self.vertex.to_json(),
            "toward": self.toward.to_json(),
            "edge": self.edge.to_json(),
            "value": self.value.iter().map(|c| c.0).collect::<Vec<_>>(),
        })
    }
}

/// ω = `chain` + ∂`witness`, with `chain` the canonical representative of the class.
#[derive(Clone, Debug)]
pub struct NormalForm {
    pub chain: ZeroChain,
    pub witness: OneChain,
    pub trace: Vec<PeelStep>,
}

/// Generators of the window: T_{n_s}, T_Π, T_{Π^{-1}} and e_χ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeckeGen {
    Tns,
    TPi,
    TPiInv,
    E(TorusChar),
}

impl Diagram {
    pub fn boundary(&self, w: &OneChain) -> ZeroChain {
        let f = &self.field;
        let mut out = BTreeMap::new();
        for (vp, x) in &w.values {
            add_into(f, &mut out, vp.clone(), &self.r.apply(f, x));
            let (t, _) = &self.down[vp.top_coeff().0 as usize];
            add_into(f, &mut out, vp.parent(), &t.apply(f, x));
        }
        ZeroChain::from_map(out)
    }

    fn rho0_of(&self, k: &GL2Local) -> Result<Matrix> {
        let fac = factor_in_stabilizer(&self.field, k, Simplex::Sigma0)?;
        Ok(self.d0.matrix(&fac.residue))
    }

    fn rho1_of(&self, k: &GL2Local) -> Result<Matrix> {
        let f = &self.field;
        let fac = factor_in_stabilizer(f, k, Simplex::Sigma1)?;
        let diag = GammaElement::diag(fac.residue.a, fac.residue.d);
        let m = self.rho1_h(&diag)?.clone();
        Ok(if fac.eps == 1 { self.p.mul(f, &m) } else { m })
    }

    pub fn act_zero(&self, g: &GL2Local, w: &ZeroChain) -> Result<ZeroChain> {
        let f = &self.field;
        let mut out = BTreeMap::new();
        for (v, x) in &w.values {
            let gv = act_on_vertex(f, g, v)?;
            let k = GL2Local::vertex_matrix_inv(f, &gv).mul(f, g).mul(f, &GL2Local::vertex_matrix(v));
            add_into(f, &mut out, gv, &self.rho0_of(&k)?.apply(f, x));
        }
        Ok(ZeroChain::from_map(out))
    }

    pub fn act_one(&self, g: &GL2Local, w: &OneChain) -> Result<OneChain> {
        let f = &self.field;
        let mut out = BTreeMap::new();
        for (vp, x) in &w.values {
            let a = act_on_vertex(f, g, vp)?;
            let b = act_on_vertex(f, g, &vp.parent())?;
            let (key, flip) = if a.parent() == b {
                (a, false)
            } else if b.parent() == a {
                (b, true)
            } else {
                return Err(Error::NotInStabilizer);
            };
            let k = GL2Local::vertex_matrix_inv(f, &key).mul(f, g).mul(f, &GL2Local::vertex_matrix(vp));
            let mut y = self.rho1_of(&k)?.apply(f, x);
            if flip {
                y = linalg::vec_neg(f, &y);
            }
            add_into(f, &mut out, key, &y);
        }
        Ok(OneChain::from_map(out))
    }

    /// Canonical representative of the class of ω: every vertex other than σ0 keeps only the
    /// part of its value outside the image of the edge toward σ0, processed farthest first.
    pub fn normal_form(&self, w: &ZeroChain) -> Result<NormalForm> {
        if !self.is_injective() {
            return Err(Error::NotInjectiveRestriction);
        }
        let f = &self.field;
        let s0 = Vertex::sigma0();
        let mut queue: BTreeMap<(Reverse<usize>, Vertex), Vector> = BTreeMap::new();
        for (v, x) in &w.values {
            queue.insert((Reverse(tree::distance(v, &s0)), v.clone()), x.clone());
        }
        let mut out = BTreeMap::new();
        let mut witness = BTreeMap::new();
        let mut trace = Vec::new();
        while let Some(((Reverse(d), v), y)) = queue.pop_first() {
            if d == 0 {
                add_into(f, &mut out, v, &y);
                continue;
            }
            let next = tree::geodesic(&v, &s0)[1].clone();
            let (toward, edge, t_here, t_there) = if next == v.parent() {
                let (t, _) = &self.down[v.top_coeff().0 as usize];
                (next, v.clone(), (&self.r, &self.up), t)
            } else {
                let (t, img) = &self.down[next.top_coeff().0 as usize];
                (next.clone(), next, (t, img), &self.r)
            };
            let (_, residual) = t_here.1.reduce(f, &y);
            let pushed = linalg::vec_sub(f, &y, &residual);
            if !linalg::is_zero_vec(&residual) {
                add_into(f, &mut out, v.clone(), &residual);
            }
            if linalg::is_zero_vec(&pushed) {
                continue;
            }
            let z = linalg::solve(f, t_here.0, &pushed).expect("pushed part lies in the image");
            add_into(f, &mut witness, edge.clone(), &z);
            let moved = linalg::vec_neg(f, &t_there.apply(f, &z));
            let key = (Reverse(d - 1), toward.clone());
            match queue.get_mut(&key) {
                Some(acc) => *acc = linalg::vec_add(f, acc, &moved),
                None => {
                    queue.insert(key, moved);
                }
            }
            trace.push(PeelStep { vertex: v, toward, edge, value: z });
        }
        Ok(NormalForm { chain: ZeroChain::from_map(out), witness: OneChain::from_map(witness), trace })
    }

    /// Some 1-chain with ∂η = ω when ω is a boundary.
    pub fn is_boundary(&self, w: &ZeroChain) -> Result<Option<OneChain>> {
        let nf = self.normal_form(w)?;
        Ok(nf.chain.is_zero().then_some(nf.witness))
    }

    /// The D0-vector v with ω homologous to v placed at σ0.
    pub fn class_reduce_to_base(&self, w: &ZeroChain) -> Result<Vector> {
        if !self.is_bijective() {
            return Err(Error::NotIsoRestriction);
        }
        let nf = self.normal_form(w)?;
        let s0 = Vertex::sigma0();
        debug_assert!(nf.chain.values.keys().all(|v| *v == s0));
        Ok(nf.chain.values.get(&s0).cloned().unwrap_or_else(|| vec![Fq::ZERO; self.d0.dim]))
    }

    pub fn homologous(&self, a: &ZeroChain, b: &ZeroChain) -> Result<bool> {
        Ok(self.normal_form(&a.sub(&self.field, b))?.chain.is_zero())
    }

    /// Elements whose invariance is audited for I1-invariant classes.
    pub fn i1_generators(&self) -> Vec<GL2Local> {
        let f = &self.field;
        let mut g: Vec<GL2Local> = f.prime_basis().into_iter().map(GL2Local::upper).collect();
        for x in f.prime_basis() {
            let c = tree::LaurentSeries::monomial(x, 1);
            g.push(GL2Local::new(tree::LaurentSeries::one(), tree::LaurentSeries::zero(), c, tree::LaurentSeries::one()));
        }
        let one_t = tree::LaurentSeries::poly(&[Fq::ONE, Fq::ONE]);
        g.push(GL2Local::new(one_t.clone(), tree::LaurentSeries::zero(), tree::LaurentSeries::zero(), tree::LaurentSeries::one()));
        g.push(GL2Local::new(tree::LaurentSeries::one(), tree::LaurentSeries::zero(), tree::LaurentSeries::zero(), one_t));
        g
    }

    pub fn is_i1_invariant(&self, c: &ZeroChain) -> Result<bool> {
        for g in self.i1_generators() {
            if !self.homologous(&self.act_zero(&g, c)?, c)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The image of the class of c under one Hecke generator, in normal form.
    pub fn hecke_on_class(&self, c: &ZeroChain, gen: HeckeGen) -> Result<ZeroChain> {
        if !self.is_i1_invariant(c)? {
            return Err(Error::NotInvariantClass);
        }
        self.hecke_unchecked(c, gen)
    }

    fn hecke_unchecked(&self, c: &ZeroChain, gen: HeckeGen) -> Result<ZeroChain> {
        let f = &self.field;
        let raw = match gen {
            HeckeGen::Tns => {
                let ns_inv = GL2Local::lift(&GammaElement::n_s(f).inv(f));
                let mut acc = ZeroChain::new();
                for x in f.elements() {
                    let g = GL2Local::upper(x).mul(f, &ns_inv);
                    acc = acc.add(f, &self.act_zero(&g, c)?);
                }
                acc
            }
            HeckeGen::TPi => self.act_zero(&GL2Local::pi_inv(), c)?,
            HeckeGen::TPiInv => self.act_zero(&GL2Local::pi(), c)?,
            HeckeGen::E(chi) => {
                let mut acc = ZeroChain::new();
                for (i, j, h) in torus(f) {
                    let g = GL2Local::lift(&h.inv(f));
                    acc = acc.add(f, &self.act_zero(&g, c)?.scale(f, chi.eval_log(f, i, j)));
                }
                acc
            }
        };
        Ok(self.normal_form(&raw)?.chain)
    }

    /// Closes the span of the seed classes under the Hecke generators.
    pub fn window_module(&self, seeds: &[ZeroChain]) -> Result<Window> {
        let f = &self.field;
        let mut basis: Vec<ZeroChain> = Vec::new();
        let mut queue: Vec<ZeroChain> = Vec::new();
        for s in seeds {
            if !self.is_i1_invariant(s)? {
                return Err(Error::NotInvariantClass);
            }
            queue.push(self.normal_form(s)?.chain);
        }
        let chars = TorusChar::all(f);
        let mut images: Vec<BTreeMap<String, ZeroChain>> = Vec::new();
        let mut done = 0;
        loop {
            while let Some(c) = queue.pop() {
                if is_independent(f, self.d0.dim, &basis, &c) {
                    basis.push(c);
                    if basis.len() > self.d0.dim {
                        return Err(Error::NonClosing(format!("dimension exceeds {}", self.d0.dim)));
                    }
                }
            }
            if done == basis.len() {
                break;
            }
            for b in &basis[done..] {
                let mut im = BTreeMap::new();
                im.insert("Tns".to_string(), self.hecke_unchecked(b, HeckeGen::Tns)?);
                im.insert("TPi".to_string(), self.hecke_unchecked(b, HeckeGen::TPi)?);
                im.insert("TPiInv".to_string(), self.hecke_unchecked(b, HeckeGen::TPiInv)?);
                let translates = self.torus_translates(b)?;
                for &chi in &chars {
                    let mut acc = ZeroChain::new();
                    for ((i, j), t) in &translates {
                        acc = acc.add(f, &t.scale(f, chi.eval_log(f, *i, *j)));
                    }
                    im.insert(chi.key(), self.normal_form(&acc)?.chain);
                }
                queue.extend(im.values().cloned());
                images.push(im);
                done += 1;
            }
        }
        let mut all: Vec<&ZeroChain> = basis.iter().collect();
        for im in &images {
            all.extend(im.values());
        }
        let dense = flatten(self.d0.dim, &all);
        let n = basis.len();
        let lin = LinearBasis::new(f, dense[0].len(), &dense[..n])?;
        let coords = |c: &ZeroChain| -> Result<Vector> {
            let v = &dense[all.iter().position(|x| std::ptr::eq(*x, c)).expect("listed")];
            lin.coords(f, v).ok_or_else(|| Error::NonClosing("image leaves the window".into()))
        };
        let matrix = |key: &str| -> Result<Matrix> {
            let rows: Result<Vec<Vector>> = images.iter().map(|im| coords(&im[key])).collect();
            Ok(if n == 0 { Matrix::zero(0, 0) } else { Matrix::from_rows(&rows?) })
        };
        let tns = matrix("Tns")?;
        let tpi = matrix("TPi")?;
        let tpi_inv = matrix("TPiInv")?;
        let mut e = BTreeMap::new();
        for &chi in &chars {
            e.insert(chi, matrix(&chi.key())?);
        }
        let module = HModule::from_parts(f, tns, tpi, e)?;
        let tpi_inverse_agrees = module.tpi_inv == tpi_inv;
        Ok(Window { basis, module, tpi_inverse_agrees })
    }

    fn torus_translates(&self, c: &ZeroChain) -> Result<Vec<((i64, i64), ZeroChain)>> {
        let f = &self.field;
        torus(f)
            .into_iter()
            .map(|(i, j, h)| Ok(((i, j), self.act_zero(&GL2Local::lift(&h.inv(f)), c)?)))
            .collect()
    }
}

/// Elements diag(g^i, g^j) of H with their exponents.
fn torus(f: &Field) -> Vec<(i64, i64, GammaElement)> {
    let m = f.q() as i64 - 1;
    (0..m).flat_map(|i| (0..m).map(move |j| (i, j, GammaElement::diag(f.gpow(i), f.gpow(j))))).collect()
}

/// Dense coordinates over the union of supports, in a fixed key order.
fn flatten(dim: usize, chains: &[&ZeroChain]) -> Vec<Vector> {
    let mut keys: BTreeMap<&Vertex, usize> = BTreeMap::new();
    for c in chains {
        for v in c.values.keys() {
            keys.insert(v, 0);
        }
    }
    for (i, slot) in keys.values_mut().enumerate() {
        *slot = i * dim;
    }
    let len = keys.len() * dim;
    chains
        .iter()
        .map(|c| {
            let mut out = vec![Fq::ZERO; len.max(1)];
            for (v, x) in &c.values {
                let o = keys[v];
                out[o..o + dim].copy_from_slice(x);
            }
            out
        })
        .collect()
}

fn is_independent(f: &Field, dim: usize, basis: &[ZeroChain], c: &ZeroChain) -> bool {
    if c.is_zero() {
        return false;
    }
    let mut all: Vec<&ZeroChain> = basis.iter().collect();
    all.push(c);
    let dense = flatten(dim, &all);
    Matrix::from_rows(&dense).rank(f) == all.len()
}

/// The window spanned by the seeds, with its H-module structure on the listed basis.
#[derive(Clone, Debug)]
pub struct Window {
    pub basis: Vec<ZeroChain>,
    pub module: HModule,
    pub tpi_inverse_agrees: bool,
}

impl Window {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "basis": self.basis.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "module": self.module.to_json(),
            "tpi_inverse_agrees": self.tpi_inverse_agrees,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hecke::{make_m_gamma, module_iso, orbits};
    use crate::tree::{ball, random_g, random_k};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, f: &Field, n: usize) -> Vector {
        (0..n).map(|_| Fq(rng.gen_range(0..f.q()) as u8)).collect()
    }

    fn random_one_chain(rng: &mut ChaCha8Rng, d: &Diagram, radius: usize) -> OneChain {
        let f = &d.field;
        let verts = ball(f, &Vertex::sigma0(), radius);
        let mut m = BTreeMap::new();
        for _ in 0..4 {
            let v = verts[rng.gen_range(0..verts.len())].clone();
            m.insert(v, random_vec(rng, f, d.dim1));
        }
        OneChain::from_map(m)
    }

    fn random_zero_chain(rng: &mut ChaCha8Rng, d: &Diagram, radius: usize) -> ZeroChain {
        let f = &d.field;
        let verts = ball(f, &Vertex::sigma0(), radius);
        let mut m = BTreeMap::new();
        for _ in 0..4 {
            let v = verts[rng.gen_range(0..verts.len())].clone();
            m.insert(v, random_vec(rng, f, d.dim0()));
        }
        ZeroChain::from_map(m)
    }

    fn f3() -> Field {
        Field::new(3, 1).unwrap()
    }

    #[test]
    fn diagram_shapes() {
        let f = f3();
        let d = Diagram::d_gamma(&f, TorusChar::trivial(), false).unwrap();
        assert_eq!((d.dim0(), d.dim1), (4, 2));
        assert!(d.is_injective() && !d.is_bijective());
        let chi = TorusChar::new(&f, 1, 0);
        let d = Diagram::d_gamma(&f, chi, false).unwrap();
        for h in GammaElement::all(&f).into_iter().filter(|g| g.b.is_zero() && g.c.is_zero()) {
            let m = d.rho1_h(&h).unwrap();
            assert_eq!(m.get(0, 0), chi.eval(&f, h.a, h.d));
            assert_eq!(m.get(1, 1), chi.s().eval(&f, h.a, h.d));
        }
        let c = Diagram::constant(&f, 0).unwrap();
        assert_eq!((c.dim0(), c.dim1, c.r.clone(), c.p.clone()), (1, 1, Matrix::identity(1), Matrix::identity(1)));
        assert!(Diagram::d_gamma(&f, chi, true).is_err());
    }

    #[test]
    fn corrupted_diagram_is_rejected() {
        let f = f3();
        let d = Diagram::d_gamma(&f, TorusChar::new(&f, 1, 0), false).unwrap();
        let gens = [(1, 0), (0, 1)].map(|(i, j)| d.rho1_h(&GammaElement::diag(f.gpow(i), f.gpow(j))).unwrap().clone());
        let bad_p = Matrix::identity(2);
        assert!(matches!(Diagram::new(&f, d.d0.clone(), gens, d.r.clone(), bad_p), Err(Error::InvalidDiagram(_))));
    }

    #[test]
    fn single_edge_boundary() {
        let f = f3();
        let d = Diagram::d_gamma(&f, TorusChar::new(&f, 1, 0), false).unwrap();
        assert!(d.boundary(&OneChain::new()).is_zero());
        let x = vec![Fq(1), Fq(2)];
        let b = d.boundary(&OneChain::single(Vertex::sigma0(), x.clone()));
        assert_eq!(b.values.len(), 2);
        assert_eq!(b.values[&Vertex::sigma0()], d.r.apply(&f, &x));
        let s = d.d0.matrix(&GammaElement::s());
        let want = linalg::vec_neg(&f, &s.mul(&f, &d.r).mul(&f, &d.p).apply(&f, &x));
        assert_eq!(b.values[&Vertex::sigma0_pi()], want);
    }

    #[test]
    fn boundary_is_linear_and_equivariant() {
        let f = f3();
        let d = Diagram::d_gamma(&f, TorusChar::new(&f, 1, 0), false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let a = random_one_chain(&mut rng, &d, 2);
            let b = random_one_chain(&mut rng, &d, 2);
            assert_eq!(d.boundary(&a.add(&f, &b)), d.boundary(&a).add(&f, &d.boundary(&b)));
            let g = random_g(&mut rng, &f);
            let lhs = d.boundary(&d.act_one(&g, &a).unwrap());
            let rhs = d.act_zero(&g, &d.boundary(&a)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn action_basics() {
        let f = f3();
        let d = Diagram::d_gamma(&f, TorusChar::trivial(), true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let w = random_zero_chain(&mut rng, &d, 2);
        assert_eq!(d.act_zero(&GL2Local::identity(), &w).unwrap(), w);
        assert_eq!(d.act_zero(&GL2Local::scalar_t(1), &w).unwrap(), w);
        let g = random_g(&mut rng, &f);
        let h = random_g(&mut rng, &f);
        let gh = d.act_zero(&g.mul(&f, &h), &w).unwrap();
        assert_eq!(gh, d.act_zero(&g, &d.act_zero(&h, &w).unwrap()).unwrap());
    }

    #[test]
    fn boundary_decision() {
        for (p, chi) in [(3, (1, 0)), (3, (0, 0)), (2, (0, 0)), (5, (2, 1))] {
            let f = Field::new(p, 1).unwrap();
            let d = Diagram::d_gamma(&f, TorusChar::new(&f, chi.0, chi.1), false).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            assert!(d.is_boundary(&ZeroChain::new()).unwrap().is_some());
            for _ in 0..10 {
                let w = random_one_chain(&mut rng, &d, 2);
                let b = d.boundary(&w);
                let witness = d.is_boundary(&b).unwrap().expect("a boundary");
                assert_eq!(d.boundary(&witness), b);
                assert_eq!(witness, w);
                let x = random_vec(&mut rng, &f, d.dim0());
                let verts = ball(&f, &Vertex::sigma0(), 2);
                let v = verts[rng.gen_range(0..verts.len())].clone();
                let single = ZeroChain::single(v, x);
                if !single.is_zero() {
                    assert!(d.is_boundary(&single).unwrap().is_none());
                }
            }
        }
    }

    #[test]
    fn normal_form_is_linear_and_homologous() {
        let f = f3();
        let d = Diagram::d_gamma(&f, TorusChar::new(&f, 1, 0), false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10 {
            let a = random_zero_chain(&mut rng, &d, 2);
            let b = random_zero_chain(&mut rng, &d, 2);
            let na = d.normal_form(&a).unwrap();
            let nb = d.normal_form(&b).unwrap();
            let nab = d.normal_form(&a.add(&f, &b)).unwrap();
            assert_eq!(nab.chain, na.chain.add(&f, &nb.chain));
            assert_eq!(na.chain.add(&f, &d.boundary(&na.witness)), a);
            let noise = d.boundary(&random_one_chain(&mut rng, &d, 3));
            assert_eq!(d.normal_form(&a.add(&f, &noise)).unwrap().chain, na.chain);
        }
    }

    #[test]
    fn restriction_requirements() {
        let f = f3();
        let d = Diagram::d_gamma(&f, TorusChar::trivial(), false).unwrap();
        assert_eq!(d.class_reduce_to_base(&ZeroChain::new()), Err(Error::NotIsoRestriction));
        let z = Matrix::zero(1, 1);
        let bad = Diagram::new(&f, GammaRep::trivial(&f), [Matrix::identity(1), Matrix::identity(1)], z, Matrix::identity(1))
            .unwrap();
        assert!(matches!(bad.normal_form(&ZeroChain::new()), Err(Error::NotInjectiveRestriction)));
    }

    #[test]
    fn constant_reduction_is_evaluation() {
        let f = Field::new(5, 1).unwrap();
        for a in 0..4 {
            let d = Diagram::constant(&f, a).unwrap();
            let w = ZeroChain::from_map(BTreeMap::from([
                (Vertex::sigma0(), vec![Fq(2)]),
                (Vertex::new(2, vec![(1, Fq(3))]), vec![Fq(4)]),
            ]));
            assert_eq!(d.class_reduce_to_base(&w).unwrap(), vec![Fq(1)]);
        }
    }

    #[test]
    fn reduction_of_k_translates_and_pi_square() {
        let f = f3();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [Diagram::constant(&f, 1).unwrap(), Diagram::iso_pair(&f, 1).unwrap()] {
            for _ in 0..20 {
                let w = random_zero_chain(&mut rng, &d, 2);
                let v = d.class_reduce_to_base(&w).unwrap();
                let k = random_k(&mut rng, &f);
                let kw = d.act_zero(&k, &w).unwrap();
                let want = d.d0.matrix(&k.residue(&f).unwrap()).apply(&f, &v);
                assert_eq!(d.class_reduce_to_base(&kw).unwrap(), want);
            }
            let y = random_vec(&mut rng, &f, d.dim1);
            let w0 = ZeroChain::single(Vertex::sigma0(), d.r.apply(&f, &y));
            let moved = d.act_zero(&GL2Local::pi_inv(), &w0).unwrap();
            assert_eq!(d.class_reduce_to_base(&moved).unwrap(), d.r.apply(&f, &d.p.apply(&f, &y)));
        }
    }

    #[test]
    fn seeds_swap_under_tpi() {
        let f = f3();
        for j in [false, true] {
            let d = Diagram::d_gamma(&f, TorusChar::trivial(), j).unwrap();
            let s = d.seeds();
            assert_eq!(d.hecke_on_class(&s[0], HeckeGen::TPi).unwrap(), s[1]);
            assert_eq!(d.hecke_on_class(&s[1], HeckeGen::TPi).unwrap(), s[0]);
        }
        let d = Diagram::d_gamma(&f, TorusChar::trivial(), false).unwrap();
        let s = d.seeds();
        assert_eq!(d.hecke_on_class(&s[0], HeckeGen::Tns).unwrap(), s[0].scale(&f, f.neg(Fq::ONE)));
        assert!(d.hecke_on_class(&s[1], HeckeGen::Tns).unwrap().is_zero());
        let off = ZeroChain::single(Vertex::sigma0(), vec![Fq(0), Fq(1), Fq(0), Fq(0)]);
        if !d.is_i1_invariant(&off).unwrap() {
            assert_eq!(d.hecke_on_class(&off, HeckeGen::Tns), Err(Error::NotInvariantClass));
        }
    }

    #[test]
    fn windows_are_supersingular() {
        for (p, n) in [(2, 1), (3, 1)] {
            let f = Field::new(p, n).unwrap();
            for g in orbits(&f) {
                let d = Diagram::d_gamma(&f, g.chi, false).unwrap();
                let w = d.window_module(&d.seeds()).unwrap();
                assert_eq!(w.module.dim, 2);
                assert!(w.tpi_inverse_agrees);
                assert!(w.module.check_relations().all_pass());
                let m = make_m_gamma(&f, g, Fq::ONE).unwrap();
                assert!(module_iso(&w.module, &m).is_some(), "{:?}", g.chi);
                let rev: Vec<ZeroChain> = d.seeds().into_iter().rev().collect();
                assert_eq!(d.window_module(&rev).unwrap().module.dim, 2);
            }
        }
    }

    #[test]
    fn constant_window_and_fixed_class() {
        let f = f3();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for a in 0..2 {
            let d = Diagram::constant(&f, a).unwrap();
            let w = d.window_module(&d.seeds()).unwrap();
            assert_eq!(w.module.dim, 1);
            assert!(w.module.tns.is_zero());
            let seed = &d.seeds()[0];
            for _ in 0..10 {
                let g = random_g(&mut rng, &f);
                let det = g.det(&f);
                let unit = det.shift(-det.valuation().unwrap()).lead().unwrap();
                let want = f.pow(unit, a);
                assert_eq!(d.class_reduce_to_base(&d.act_zero(&g, seed).unwrap()).unwrap(), vec![want]);
            }
        }
    }
}
