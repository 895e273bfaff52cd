//! Finite right modules over the pro-p Iwahori-Hecke algebra and over its
//! finite part H_K. Row-vector convention: the matrix of an operator has the
//! image of basis vector i in row i, so the matrix of T_1 T_2 is M_1 M_2.

use std::collections::BTreeMap;

use serde_json::json;

use crate::error::{Error, Result};
use crate::gamma::{GammaRep, TorusChar};
use crate::linalg::{self, projective_points, Matrix, Subspace, Vector};
use crate::scalars::{Field, Fq};

/// An orbit {χ, χ^s}, stored by its smaller member.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CharOrbit {
    pub chi: TorusChar,
}

impl CharOrbit {
    pub fn new(chi: TorusChar) -> CharOrbit {
        CharOrbit { chi: chi.min(chi.s()) }
    }
    pub fn is_regular(self) -> bool {
        self.chi.is_regular()
    }
    pub fn members(self) -> Vec<TorusChar> {
        if self.is_regular() {
            vec![self.chi, self.chi.s()]
        } else {
            vec![self.chi]
        }
    }
    pub fn contains(self, chi: TorusChar) -> bool {
        chi == self.chi || chi == self.chi.s()
    }
    pub fn to_json(self) -> serde_json::Value {
        json!([[self.chi.c, self.chi.d], [self.chi.d, self.chi.c]])
    }
}

/// All orbits, q(q-1)/2 of them.
pub fn orbits(f: &Field) -> Vec<CharOrbit> {
    let mut out: Vec<CharOrbit> = TorusChar::all(f).into_iter().map(CharOrbit::new).collect();
    out.sort();
    out.dedup();
    out
}

/// A module over H_K: T_{n_s} and the idempotents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HKModule {
    pub field: Field,
    pub dim: usize,
    pub tns: Matrix,
    pub e: BTreeMap<TorusChar, Matrix>,
}

/// A module over H: T_{n_s}, T_Π, T_{Π^{-1}} and the idempotents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HModule {
    pub field: Field,
    pub dim: usize,
    pub tns: Matrix,
    pub tpi: Matrix,
    pub tpi_inv: Matrix,
    pub e: BTreeMap<TorusChar, Matrix>,
}

fn e_matrix(e: &BTreeMap<TorusChar, Matrix>, chi: TorusChar, dim: usize) -> Matrix {
    e.get(&chi).cloned().unwrap_or_else(|| Matrix::zero(dim, dim))
}

fn prune(e: BTreeMap<TorusChar, Matrix>) -> BTreeMap<TorusChar, Matrix> {
    e.into_iter().filter(|(_, m)| !m.is_zero()).collect()
}

/// Idempotent matrices for a basis of H-eigenvectors with the given characters.
pub fn diagonal_idempotents(chars: &[TorusChar]) -> BTreeMap<TorusChar, Matrix> {
    let n = chars.len();
    let mut e: BTreeMap<TorusChar, Matrix> = BTreeMap::new();
    for (i, &c) in chars.iter().enumerate() {
        e.entry(c).or_insert_with(|| Matrix::zero(n, n)).set(i, i, Fq::ONE);
    }
    e
}

impl HKModule {
    pub fn e_chi(&self, chi: TorusChar) -> Matrix {
        e_matrix(&self.e, chi, self.dim)
    }

    /// Relation sublist that only involves T_{n_s} and the idempotents.
    pub fn check_relations(&self) -> RelationAudit {
        let mut audit = RelationAudit::default();
        audit_idempotents(&self.field, self.dim, &self.e, &mut audit);
        audit_tns(&self.field, self.dim, &self.tns, &self.e, &mut audit);
        audit
    }

    pub fn to_json(&self) -> serde_json::Value {
        let e: serde_json::Map<String, serde_json::Value> =
            self.e.iter().map(|(c, m)| (c.key(), m.to_json())).collect();
        json!({ "dim": self.dim, "Tns": self.tns.to_json(), "e": e })
    }
}

/// The H_K-module on ρ^U, in the echelon basis of ρ^U.
pub fn hk_module_of_rep(rep: &GammaRep) -> (HKModule, Subspace) {
    let f = &rep.field;
    let inv = rep.u_fixed();
    let k = inv.dim();
    let image_rows = |op: &dyn Fn(&[Fq]) -> Vector| {
        let rows: Vec<Vector> =
            inv.basis.iter().map(|b| inv.coords(f, &op(b)).expect("U-invariants are preserved")).collect();
        if rows.is_empty() {
            Matrix::zero(0, 0)
        } else {
            Matrix::from_rows(&rows)
        }
    };
    let tns = image_rows(&|v| rep.tns_unchecked(v));
    let mut e = BTreeMap::new();
    for chi in TorusChar::all(f) {
        e.insert(chi, image_rows(&|v| rep.e_chi_unchecked(v, chi)));
    }
    (HKModule { field: f.clone(), dim: k, tns, e: prune(e) }, inv)
}

/// Pass/fail per named relation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationAudit {
    pub checks: Vec<(String, bool)>,
}

impl RelationAudit {
    fn push(&mut self, name: &str, ok: bool) {
        if let Some(entry) = self.checks.iter_mut().find(|(n, _)| n == name) {
            entry.1 &= ok;
        } else {
            self.checks.push((name.to_string(), ok));
        }
    }
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }
    pub fn get(&self, name: &str) -> Option<bool> {
        self.checks.iter().find(|(n, _)| n == name).map(|(_, ok)| *ok)
    }
    pub fn first_failure(&self) -> Option<&str> {
        self.checks.iter().find(|(_, ok)| !ok).map(|(n, _)| n.as_str())
    }
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.checks.iter().map(|(n, ok)| json!({ "name": n, "pass": ok })).collect())
    }
}

fn audit_idempotents(f: &Field, dim: usize, e: &BTreeMap<TorusChar, Matrix>, audit: &mut RelationAudit) {
    let mut total = Matrix::zero(dim, dim);
    audit.push("e_idempotent", true);
    audit.push("e_orthogonal", true);
    for (chi, m) in e {
        audit.push("e_idempotent", m.mul(f, m) == *m);
        for (chi2, m2) in e {
            if chi != chi2 {
                audit.push("e_orthogonal", m.mul(f, m2).is_zero());
            }
        }
        total = total.add(f, m);
    }
    audit.push("e_complete", total == Matrix::identity(dim));
}

fn audit_tns(f: &Field, dim: usize, tns: &Matrix, e: &BTreeMap<TorusChar, Matrix>, audit: &mut RelationAudit) {
    audit.push("tns_e_conjugation", true);
    audit.push("quadratic", true);
    for chi in TorusChar::all(f) {
        let m = e_matrix(e, chi, dim);
        let ms = e_matrix(e, chi.s(), dim);
        audit.push("tns_e_conjugation", tns.mul(f, &m) == ms.mul(f, tns));
        let te = tns.mul(f, &m);
        let tte = tns.mul(f, &te);
        let want = if chi.is_regular() { Matrix::zero(dim, dim) } else { te.scale(f, f.neg(Fq::ONE)) };
        audit.push("quadratic", tte == want);
    }
}

impl HModule {
    pub fn e_chi(&self, chi: TorusChar) -> Matrix {
        e_matrix(&self.e, chi, self.dim)
    }

    /// Builds a module from T_{n_s}, T_Π and the idempotents; T_{Π^{-1}} is the inverse of T_Π.
    pub fn from_parts(f: &Field, tns: Matrix, tpi: Matrix, e: BTreeMap<TorusChar, Matrix>) -> Result<HModule> {
        let dim = tns.rows;
        if !tns.is_square() || tpi.rows != dim || !tpi.is_square() {
            return Err(Error::AmbientMismatch("operator shapes".into()));
        }
        let tpi_inv = tpi.inverse(f)?;
        Ok(HModule { field: f.clone(), dim, tns, tpi, tpi_inv, e: prune(e) })
    }

    pub fn check_relations(&self) -> RelationAudit {
        let f = &self.field;
        let dim = self.dim;
        let mut audit = RelationAudit::default();
        audit_idempotents(f, dim, &self.e, &mut audit);
        audit_tns(f, dim, &self.tns, &self.e, &mut audit);
        audit.push("tpi_e_conjugation", true);
        for chi in TorusChar::all(f) {
            let m = self.e_chi(chi);
            let ms = self.e_chi(chi.s());
            audit.push("tpi_e_conjugation", self.tpi.mul(f, &m) == ms.mul(f, &self.tpi));
        }
        let id = Matrix::identity(dim);
        audit.push(
            "tpi_inverse",
            self.tpi.mul(f, &self.tpi_inv) == id && self.tpi_inv.mul(f, &self.tpi) == id,
        );
        let sq = self.tpi.mul(f, &self.tpi);
        let mut central = sq.mul(f, &self.tns) == self.tns.mul(f, &sq);
        for m in self.e.values() {
            central &= sq.mul(f, m) == m.mul(f, &sq);
        }
        audit.push("tpi_square_central", central);
        audit
    }

    pub fn restrict_to_hk(&self) -> HKModule {
        HKModule { field: self.field.clone(), dim: self.dim, tns: self.tns.clone(), e: self.e.clone() }
    }

    fn all_generators(&self, chars: &[TorusChar]) -> Vec<Matrix> {
        let mut g = vec![self.tns.clone(), self.tpi.clone(), self.tpi_inv.clone()];
        g.extend(chars.iter().map(|&c| self.e_chi(c)));
        g
    }

    /// Restriction to the span of the given row vectors, which must be stable.
    pub fn submodule(&self, basis: &[Vector]) -> Result<HModule> {
        let f = &self.field;
        let lin = linalg::LinearBasis::new(f, self.dim, basis)?;
        let restrict = |m: &Matrix| -> Result<Matrix> {
            let rows: Result<Vec<Vector>> = basis
                .iter()
                .map(|b| lin.coords(f, &m.apply_right(f, b)).ok_or(Error::AmbientMismatch("not stable".into())))
                .collect();
            Ok(Matrix::from_rows(&rows?))
        };
        let mut e = BTreeMap::new();
        for (chi, m) in &self.e {
            e.insert(*chi, restrict(m)?);
        }
        Ok(HModule {
            field: f.clone(),
            dim: basis.len(),
            tns: restrict(&self.tns)?,
            tpi: restrict(&self.tpi)?,
            tpi_inv: restrict(&self.tpi_inv)?,
            e: prune(e),
        })
    }

    pub fn is_stable(&self, basis: &[Vector]) -> bool {
        let f = &self.field;
        let sub = Subspace::span(f, self.dim, basis);
        let mut ops = vec![&self.tns, &self.tpi, &self.tpi_inv];
        ops.extend(self.e.values());
        basis.iter().all(|b| ops.iter().all(|m| sub.contains(f, &m.apply_right(f, b))))
    }

    /// One-dimensional submodules, found by enumerating lines in each e_χ-eigenspace.
    pub fn stable_lines(&self) -> Vec<Vector> {
        let f = &self.field;
        let mut out = Vec::new();
        for m in self.e.values() {
            let eig = Subspace::span(f, self.dim, &m.row_vectors());
            for coef in projective_points(f, eig.dim()) {
                let v = combine(f, self.dim, &coef, &eig.basis);
                if self.is_stable(std::slice::from_ref(&v)) {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Scalar by which T_Π^2 acts, if it is one.
    pub fn tpi_square_scalar(&self) -> Option<Fq> {
        let f = &self.field;
        let sq = self.tpi.mul(f, &self.tpi);
        let c = if self.dim == 0 { Fq::ONE } else { sq.get(0, 0) };
        (sq == Matrix::scalar(self.dim, c)).then_some(c)
    }

    /// Characters χ with e_χ ≠ 0.
    pub fn support(&self) -> Vec<TorusChar> {
        self.e.keys().copied().collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let e: serde_json::Map<String, serde_json::Value> =
            self.e.iter().map(|(c, m)| (c.key(), m.to_json())).collect();
        json!({ "dim": self.dim, "Tns": self.tns.to_json(), "TPi": self.tpi.to_json(), "e": e })
    }
}

pub(crate) fn combine(f: &Field, dim: usize, coef: &[Fq], basis: &[Vector]) -> Vector {
    let mut v = vec![Fq::ZERO; dim];
    for (c, b) in coef.iter().zip(basis) {
        if !c.is_zero() {
            v = linalg::vec_add(f, &v, &linalg::vec_scale(f, b, *c));
        }
    }
    v
}

/// The one-dimensional H_K-module M_{χ,J}.
pub fn make_m_chi_j(f: &Field, chi: TorusChar, j_is_s: bool) -> Result<HKModule> {
    if j_is_s && chi.is_regular() {
        return Err(Error::InvalidJ);
    }
    let t = if chi.is_regular() || j_is_s { Fq::ZERO } else { f.neg(Fq::ONE) };
    let mut e = BTreeMap::new();
    e.insert(chi, Matrix::identity(1));
    Ok(HKModule { field: f.clone(), dim: 1, tns: Matrix::scalar(1, t), e })
}

/// M_γ^λ on v_1, v_2.
pub fn make_m_gamma(f: &Field, gamma: CharOrbit, lambda: Fq) -> Result<HModule> {
    if lambda.is_zero() {
        return Err(Error::ZeroLambda);
    }
    let chi = gamma.chi;
    let mut tns = Matrix::zero(2, 2);
    let mut e = BTreeMap::new();
    if chi.is_regular() {
        e = diagonal_idempotents(&[chi, chi.s()]);
    } else {
        tns.set(0, 0, f.neg(Fq::ONE));
        e.insert(chi, Matrix::identity(2));
    }
    let tpi = Matrix::from_rows(&[vec![Fq::ZERO, Fq::ONE], vec![lambda, Fq::ZERO]]);
    HModule::from_parts(f, tns, tpi, e)
}

/// L_γ^λ on the images of e_χ, e_χ T_Π, e_χ T_{n_s}, e_χ T_{n_s} T_Π.
pub fn make_l_gamma(f: &Field, gamma: CharOrbit, lambda: Fq) -> Result<HModule> {
    if !gamma.is_regular() {
        return Err(Error::IwahoriOrbit(format!("{:?} is fixed by s", gamma.chi)));
    }
    if lambda.is_zero() {
        return Err(Error::ZeroLambda);
    }
    let chi = gamma.chi;
    let (o, z) = (Fq::ONE, Fq::ZERO);
    let tpi = Matrix::from_rows(&[
        vec![z, o, z, z],
        vec![lambda, z, z, z],
        vec![z, z, z, o],
        vec![z, z, lambda, z],
    ]);
    let tns = Matrix::from_rows(&[vec![z, z, o, z], vec![z, z, z, o], vec![z; 4], vec![z; 4]]);
    let e = diagonal_idempotents(&[chi, chi.s(), chi.s(), chi]);
    HModule::from_parts(f, tns, tpi, e)
}

/// Invertible Φ with M_g Φ = Φ M'_g for every generator, if one exists.
pub fn module_iso(m: &HModule, m2: &HModule) -> Option<Matrix> {
    if m.dim != m2.dim || m.field != m2.field {
        return None;
    }
    if m.dim == 0 {
        return Some(Matrix::zero(0, 0));
    }
    let f = &m.field;
    let mut chars: Vec<TorusChar> = m.e.keys().chain(m2.e.keys()).copied().collect();
    chars.sort();
    chars.dedup();
    let a: Vec<Matrix> = m.all_generators(&chars).iter().map(|x| x.transpose()).collect();
    let b: Vec<Matrix> = m2.all_generators(&chars).iter().map(|x| x.transpose()).collect();
    let homs = linalg::hom_space(f, &a, &b).ok()?;
    linalg::find_invertible(f, &homs).map(|x| x.transpose())
}

/// T_Π ↦ ξ^{-1} T_Π, T_{Π^{-1}} ↦ ξ T_{Π^{-1}}.
pub fn twist_unramified(m: &HModule, xi: Fq) -> Result<HModule> {
    let f = &m.field;
    let xi_inv = f.inv(xi).map_err(|_| Error::ZeroXi)?;
    let mut out = m.clone();
    out.tpi = m.tpi.scale(f, xi_inv);
    out.tpi_inv = m.tpi_inv.scale(f, xi);
    Ok(out)
}

/// Label of an indecomposable H_K-summand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HKLabel {
    /// M_{χ,J}
    Character { chi: TorusChar, j_is_s: bool },
    /// The 2-dim block (Ind_I^K χ)^{I_1}: v with character χ^s and v T_{n_s} ≠ 0 with character χ.
    Induced { chi: TorusChar },
}

#[derive(Clone, Debug)]
pub struct HKSummand {
    pub label: HKLabel,
    pub basis: Vec<Vector>,
}

/// Decomposes the underlying space into indecomposable H_K-summands.
pub fn restrict_to_hk(m: &HKModule) -> Vec<HKSummand> {
    let f = &m.field;
    let dim = m.dim;
    let space = |chi: TorusChar| Subspace::span(f, dim, &m.e_chi(chi).row_vectors());
    let mut out = Vec::new();
    let mut done: Vec<TorusChar> = Vec::new();
    for &chi in m.e.keys() {
        if done.contains(&chi) {
            continue;
        }
        done.push(chi);
        if !chi.is_regular() {
            // T^2 = -T on V_χ: split into the eigenvalues -1 and 0
            let v = space(chi);
            let imgs: Vec<Vector> = v.basis.iter().map(|b| m.tns.apply_right(f, b)).collect();
            let img = Subspace::span(f, dim, &imgs);
            let ker = kernel_in(f, dim, &v, &m.tns);
            for b in &img.basis {
                out.push(HKSummand { label: HKLabel::Character { chi, j_is_s: false }, basis: vec![b.clone()] });
            }
            for b in &ker.basis {
                out.push(HKSummand { label: HKLabel::Character { chi, j_is_s: true }, basis: vec![b.clone()] });
            }
            continue;
        }
        done.push(chi.s());
        for (src, dst) in [(chi.s(), chi), (chi, chi.s())] {
            // blocks (v, vT) with v ∈ V_src outside ker T
            let vs = space(src);
            let ker = kernel_in(f, dim, &vs, &m.tns);
            let mut acc = ker.clone();
            for b in &vs.basis {
                if acc.insert(f, b) {
                    out.push(HKSummand {
                        label: HKLabel::Induced { chi: dst },
                        basis: vec![b.clone(), m.tns.apply_right(f, b)],
                    });
                }
            }
        }
        for c in [chi, chi.s()] {
            // simple summands: ker T on V_c modulo the image of T from the partner space
            let vc = space(c);
            let ker = kernel_in(f, dim, &vc, &m.tns);
            let partner = space(c.s());
            let mut acc = Subspace::span(
                f,
                dim,
                &partner.basis.iter().map(|b| m.tns.apply_right(f, b)).collect::<Vec<_>>(),
            );
            for b in &ker.basis {
                if acc.insert(f, b) {
                    out.push(HKSummand { label: HKLabel::Character { chi: c, j_is_s: false }, basis: vec![b.clone()] });
                }
            }
        }
    }
    out
}

fn kernel_in(f: &Field, dim: usize, v: &Subspace, t: &Matrix) -> Subspace {
    if v.dim() == 0 {
        return Subspace::zero(dim);
    }
    let imgs = Matrix::from_rows(&v.basis.iter().map(|b| t.apply_right(f, b)).collect::<Vec<_>>());
    // c · imgs = 0
    let ker = linalg::kernel(f, &imgs.transpose());
    Subspace::span(f, dim, &ker.iter().map(|c| combine(f, dim, c, &v.basis)).collect::<Vec<_>>())
}

/// Classification tag of a finite H-module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tag {
    Supersingular { gamma: CharOrbit, lambda: Fq },
    L { gamma: CharOrbit, lambda: Fq },
    TrivialType,
    HKCharacter { chi: TorusChar, tns: Fq, tpi: Fq },
    Other,
}

impl Tag {
    pub fn name(&self) -> String {
        match self {
            Tag::Supersingular { gamma, lambda } => format!("supersingular({:?},{})", gamma.chi, lambda.0),
            Tag::L { gamma, lambda } => format!("L({:?},{})", gamma.chi, lambda.0),
            Tag::TrivialType => "trivial-type".into(),
            Tag::HKCharacter { chi, .. } => format!("HK-character({chi:?})"),
            Tag::Other => "other".into(),
        }
    }
}

pub fn classify(m: &HModule) -> Tag {
    let support = m.support();
    if m.dim == 1 && support.len() == 1 {
        let chi = support[0];
        let (t, p) = (m.tns.get(0, 0), m.tpi.get(0, 0));
        if chi == TorusChar::trivial() && t.is_zero() && p == Fq::ONE {
            return Tag::TrivialType;
        }
        return Tag::HKCharacter { chi, tns: t, tpi: p };
    }
    let Some(lambda) = m.tpi_square_scalar() else {
        return Tag::Other;
    };
    let Some(&first) = support.first() else {
        return Tag::Other;
    };
    let gamma = CharOrbit::new(first);
    if !support.iter().all(|&c| gamma.contains(c)) {
        return Tag::Other;
    }
    match m.dim {
        2 if m.stable_lines().is_empty() => match make_m_gamma(&m.field, gamma, lambda) {
            Ok(mg) if module_iso(m, &mg).is_some() => Tag::Supersingular { gamma, lambda },
            _ => Tag::Other,
        },
        4 if gamma.is_regular() => match make_l_gamma(&m.field, gamma, lambda) {
            Ok(l) if module_iso(m, &l).is_some() => Tag::L { gamma, lambda },
            _ => Tag::Other,
        },
        _ => Tag::Other,
    }
}
