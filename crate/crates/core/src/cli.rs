//! Batch commands behind the `gl2modp` binary; every command returns a JSON
//! report plus the list of checks that decide the exit status.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::acceptance;
use crate::error::{Error, Result};
use crate::gamma::{
    all_cl_labels, build_v_tuple, carter_lusztig_irrep, dictionary, GammaElement, IrrepLabel,
};
use crate::hecke::{self, make_l_gamma, make_m_chi_j, make_m_gamma, module_iso, orbits};
use crate::homology::Diagram;
use crate::injective::{extend_to_full_hecke, identify_injective_envelope, BlockKind, eps_string};
use crate::linalg;
use crate::scalars::{Field, Fq};
use crate::tree::{self, GL2Local, LaurentSeries, Vertex};

pub const SCHEMA: &str = "v1";
pub const COMMANDS: [&str; 7] = ["irreps", "envelopes", "hecke", "injmod", "tree", "supermod", "acceptance"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub p: Option<u32>,
    pub n: u32,
    pub command: String,
    pub precision: Option<usize>,
    pub trace: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig { p: None, n: 1, command: "acceptance".into(), precision: None, trace: false, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct CommandReport {
    pub checks: Vec<(String, bool)>,
    pub data: Value,
    pub config: RunConfig,
}

impl CommandReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    pub fn first_failure(&self) -> Option<&str> {
        self.checks.iter().find(|c| !c.1).map(|c| c.0.as_str())
    }

    pub fn to_json(&self) -> Value {
        let c = &self.config;
        json!({
            "schema": SCHEMA,
            "command": c.command,
            "p": c.p,
            "n": c.n,
            "seed": c.seed,
            "precision": c.precision.unwrap_or(tree::DEFAULT_PRECISION),
            "pass": self.pass(),
            "first_failure": self.first_failure(),
            "checks": self.checks.iter().map(|(k, v)| json!({ "name": k, "pass": v })).collect::<Vec<_>>(),
            "data": self.data,
        })
    }
}

struct Checks(Vec<(String, bool)>);

impl Checks {
    fn push(&mut self, name: impl Into<String>, pass: bool) {
        self.0.push((name.into(), pass));
    }
}

fn field_of(c: &RunConfig) -> Result<Field> {
    let p = c.p.ok_or_else(|| Error::InvalidLabel(format!("command {} needs --p", c.command)))?;
    Field::new(p, c.n)
}

fn vec_json(v: &[Fq]) -> Value {
    json!(v.iter().map(|x| x.0).collect::<Vec<_>>())
}

pub fn run(config: &RunConfig) -> Result<CommandReport> {
    if let Some(n) = config.precision {
        tree::set_precision(n);
    }
    let mut checks = Checks(Vec::new());
    let data = match config.command.as_str() {
        "irreps" => irreps(&field_of(config)?, &mut checks)?,
        "envelopes" => envelopes(&field_of(config)?, &mut checks)?,
        "hecke" => hecke_cmd(&field_of(config)?, &mut checks)?,
        "injmod" => injmod(&field_of(config)?, &mut checks)?,
        "tree" => tree_cmd(&field_of(config)?, config, &mut checks)?,
        "supermod" => supermod(&field_of(config)?, config, &mut checks)?,
        "acceptance" => acceptance_cmd(config, &mut checks)?,
        other => return Err(Error::InvalidLabel(format!("unknown command {other}"))),
    };
    Ok(CommandReport { checks: checks.0, data, config: config.clone() })
}

fn irreps(f: &Field, checks: &mut Checks) -> Result<Value> {
    let labels = all_cl_labels(f);
    let q = f.q() as usize;
    checks.push("label count q(q-1)", labels.len() == q * (q - 1));
    let mut rows = Vec::new();
    let mut round_trip = true;
    let mut certified = true;
    for label in &labels {
        let bn = dictionary(f, label)?;
        let back = dictionary(f, &bn)?;
        round_trip &= back == *label;
        let IrrepLabel::CarterLusztig { chi, j_is_s } = *label else { unreachable!() };
        let IrrepLabel::BrauerNesbitt { a, r } = &bn else { unreachable!() };
        let rho = carter_lusztig_irrep(f, chi, j_is_s)?.rep;
        let v = build_v_tuple(f, r, *a as i64)?;
        let homs = linalg::hom_space(f, &rho.generator_matrices(), &v.generator_matrices())?;
        let iso = homs.len() == 1 && linalg::find_invertible(f, &homs).is_some();
        certified &= iso;
        rows.push(json!({ "cl": label.to_json(), "bn": bn.to_json(), "dim": rho.dim, "hom_dim": homs.len(), "iso": iso }));
    }
    checks.push("dictionary round trip", round_trip);
    checks.push("hom certificates", certified);
    Ok(json!({ "q": q, "labels": rows }))
}

fn envelopes(f: &Field, checks: &mut Checks) -> Result<Value> {
    let q = f.q() as usize;
    let mut rows = Vec::new();
    let mut total = 0;
    let mut agree = true;
    for label in all_cl_labels(f) {
        let IrrepLabel::CarterLusztig { chi, j_is_s } = label else { unreachable!() };
        let env = identify_injective_envelope(f, chi, j_is_s)?;
        total += env.irrep.rep.dim * env.dim;
        let mut table = Vec::new();
        for e in env.tuple.sigma() {
            let c = env.tuple.tns_on_socle_basis(&e)?;
            agree &= c.agree;
            table.push(json!({
                "eps": eps_string(&e),
                "character": env.tuple.b_character(&e).key(),
                "tns_brute": vec_json(&c.brute),
                "agree": c.agree,
            }));
        }
        rows.push(json!({
            "cl": label.to_json(),
            "bn": env.bn.to_json(),
            "tuple": env.tuple.to_json(),
            "joint": env.joint,
            "dim_rho": env.irrep.rep.dim,
            "dim_inj": env.dim,
            "socle": table,
        }));
    }
    let order = (q * q - 1) * (q * q - q);
    checks.push("sum dim rho * dim inj rho = |GL2(F_q)|", total == order);
    checks.push("T_ns on b_eps matches closed form", agree);
    Ok(json!({ "q": q, "group_order": order, "envelopes": rows }))
}

fn hecke_cmd(f: &Field, checks: &mut Checks) -> Result<Value> {
    let os = orbits(f);
    let mut mods = Vec::new();
    let mut ms = Vec::new();
    for &g in &os {
        let m = make_m_gamma(f, g, Fq::ONE)?;
        let audit = m.check_relations();
        checks.push(format!("M{} relations", g.chi.key()), audit.all_pass());
        let mut entry = json!({ "gamma": g.to_json(), "M": m.to_json(), "audit": audit.to_json() });
        if g.is_regular() {
            let l = make_l_gamma(f, g, Fq::ONE)?;
            let la = l.check_relations();
            checks.push(format!("L{} relations", g.chi.key()), la.all_pass());
            entry["L"] = l.to_json();
            entry["L_audit"] = la.to_json();
        }
        mods.push(entry);
        ms.push(m);
    }
    let mut hk = Vec::new();
    for label in all_cl_labels(f) {
        let IrrepLabel::CarterLusztig { chi, j_is_s } = label else { unreachable!() };
        let m = make_m_chi_j(f, chi, j_is_s)?;
        let ok = m.check_relations().all_pass();
        checks.push(format!("M{},{} relations", chi.key(), if j_is_s { "S" } else { "0" }), ok);
        hk.push(json!({ "label": label.to_json(), "Tns": m.tns.to_json() }));
    }
    let mut matrix = Vec::new();
    let mut diagonal_only = true;
    for (i, a) in ms.iter().enumerate() {
        let row: Vec<bool> = ms.iter().map(|b| module_iso(a, b).is_some()).collect();
        for (j, &x) in row.iter().enumerate() {
            diagonal_only &= x == (i == j);
        }
        matrix.push(row);
    }
    checks.push("M_gamma pairwise non-isomorphic", diagonal_only);
    Ok(json!({ "orbits": os.len(), "modules": mods, "hk_characters": hk, "iso_matrix": matrix }))
}

fn injmod(f: &Field, checks: &mut Checks) -> Result<Value> {
    let mut rows = Vec::new();
    for g in orbits(f) {
        let full = extend_to_full_hecke(f, g)?;
        let audit = full.module.check_relations();
        let blocks_ok = full.verify_blocks()?;
        let count_ok = full.supersingular_count() == full.expected_supersingular_count();
        checks.push(format!("gamma={} relations", g.chi.key()), audit.all_pass());
        checks.push(format!("gamma={} decomposition", g.chi.key()), blocks_ok && count_ok);
        let blocks: Vec<Value> = full
            .blocks
            .iter()
            .map(|b| {
                let (kind, o) = match &b.kind {
                    BlockKind::L(o) => ("L", o),
                    BlockKind::Supersingular(o) => ("M", o),
                };
                json!({ "kind": kind, "gamma": o.to_json(), "basis": b.basis.iter().map(|v| vec_json(v)).collect::<Vec<_>>() })
            })
            .collect();
        rows.push(json!({
            "gamma": g.to_json(),
            "labels": full.labels,
            "module": full.module.to_json(),
            "blocks": blocks,
            "supersingular": full.supersingular_count(),
            "expected_supersingular": full.expected_supersingular_count(),
        }));
    }
    Ok(json!({ "extensions": rows }))
}

fn tree_cmd(f: &Field, c: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let q = f.q() as usize;
    let s0 = Vertex::sigma0();
    let pi_s0 = tree::vertex_normalize(f, &GL2Local::pi())?;
    checks.push("Pi sigma0 = (-1,0)", pi_s0 == Vertex::sigma0_pi());
    let nb = tree::neighbors(f, &s0);
    checks.push("q+1 neighbors", nb.len() == q + 1);
    let spheres = tree::sphere_sizes(f, &s0, 3);
    checks.push("no cycles to radius 3", spheres == vec![1, q + 1, (q + 1) * q, (q + 1) * q * q]);
    let v2 = Vertex::new(2, vec![]);
    let path = tree::geodesic(&v2, &s0);
    checks.push("distance((2,0),(0,0)) = 2", path.len() == 3 && path[1] == Vertex::new(1, vec![]));
    checks.push("elementary divisors agree", tree::distance_by_divisors(f, &v2, &s0)? == 2);
    let inv = LaurentSeries::poly(&[Fq::ONE, Fq::ONE]).inv(f)?;
    let prec = tree::precision() as i64;
    let minus_one = f.neg(Fq::ONE);
    let geometric = (0..prec).all(|i| inv.coeff(i) == Ok(if i % 2 == 0 { Fq::ONE } else { minus_one }));
    checks.push("(1+t)^-1 is the geometric series", geometric);
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let ball = tree::ball(f, &s0, 2);
    let mut isometric = true;
    let mut k_fixes = true;
    for _ in 0..20 {
        let g = tree::random_g(&mut rng, f);
        let a = &ball[rand::Rng::gen_range(&mut rng, 0..ball.len())];
        let b = &ball[rand::Rng::gen_range(&mut rng, 0..ball.len())];
        let (ga, gb) = (tree::act_on_vertex(f, &g, a)?, tree::act_on_vertex(f, &g, b)?);
        isometric &= tree::distance(&ga, &gb) == tree::distance(a, b);
        k_fixes &= tree::vertex_normalize(f, &tree::random_k(&mut rng, f))? == s0;
    }
    checks.push("G acts by isometries", isometric);
    checks.push("K fixes sigma0", k_fixes);
    let mut i1 = true;
    for x in f.elements() {
        let conj = GL2Local::pi().mul(f, &GL2Local::upper(x)).mul(f, &GL2Local::pi_inv());
        i1 &= conj.in_i1(f)?;
    }
    checks.push("Pi normalizes I1", i1);
    let stab = tree::factor_in_stabilizer(f, &GL2Local::pi(), tree::Simplex::Sigma1)?;
    checks.push("Pi factors in the edge stabilizer", stab.eps == 1 && stab.residue == GammaElement::identity());
    Ok(json!({
        "pi_sigma0": pi_s0.to_json(),
        "neighbors": nb.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
        "spheres": spheres,
        "geodesic": path.iter().map(|v| v.to_json()).collect::<Vec<_>>(),
        "precision": prec,
    }))
}

fn supermod(f: &Field, c: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let os = orbits(f);
    let q = f.q() as usize;
    checks.push("orbit count q(q-1)/2", os.len() == q * (q - 1) / 2);
    let mut rows = Vec::new();
    for g in os {
        let d = Diagram::d_gamma(f, g.chi, false)?;
        let seeds = d.seeds();
        let moved = d.act_zero(&GL2Local::pi_inv(), &seeds[0])?;
        let nf = d.normal_form(&moved)?;
        let w = d.window_module(&seeds)?;
        let iso = module_iso(&w.module, &make_m_gamma(f, g, Fq::ONE)?).is_some();
        checks.push(format!("gamma={} window = M_gamma", g.chi.key()), iso && nf.chain == seeds[1]);
        let mut row = json!({
            "gamma": g.to_json(),
            "diagram": d.to_json(),
            "window": w.to_json(),
            "tag": hecke::classify(&w.module).name(),
            "iso_to_M_gamma": iso,
        });
        if c.trace {
            row["tpi_trace"] = json!({
                "moved": moved.to_json(),
                "steps": nf.trace.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
                "reduced": nf.chain.to_json(),
            });
        }
        rows.push(row);
    }
    Ok(json!({ "windows": rows }))
}

fn acceptance_cmd(c: &RunConfig, checks: &mut Checks) -> Result<Value> {
    let reports = match c.p {
        Some(_) => acceptance::run_at(&field_of(c)?, c.seed),
        None => acceptance::run_all(c.seed),
    };
    let mut by_id = BTreeMap::new();
    for r in &reports {
        checks.push(r.id, r.pass());
        let mut j = r.to_json();
        if !c.trace {
            for check in j["checks"].as_array_mut().into_iter().flatten() {
                check.as_object_mut().map(|o| o.remove("detail"));
            }
        }
        by_id.insert(r.id.to_string(), j);
    }
    let lines: Vec<String> = reports.iter().map(|r| r.line()).collect();
    Ok(json!({ "criteria": by_id, "lines": lines }))
}
