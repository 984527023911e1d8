//! Shared test support: seeded generators for well-typed terms, surface
//! files, attack graphs, pushout instances, and view-finding toys, plus the
//! independent oracles the generated suites check against.
//!
//! Oracles here deliberately avoid the implementation paths they judge:
//! labelings are enumerated over all 3^n assignments (the engine enumerates
//! IN-sets), view candidates over the raw assignment product (the engine
//! backtracks), and mediating morphisms over all constant maps.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::rngs::StdRng;
use rand::Rng;

use cg::argue::Label;
use cg::graph::{AttackEdge, AttackProvenance, ContextGraph, Morphism};
use cg::kernel::{alpha_eq, shift, QName, Signature, Term};
use cg::span::Span;
use cg::syntax::{
    AssignEntry, AttackItem, DeclItem, Expr, Fixity, ImportItem, IncludeEntry, Item, PushoutItem,
    SourceFile, TheoryEntry, TheoryItem, ViewItem,
};

// ---------------------------------------------------------------------------
// Well-typed kernel terms
// ---------------------------------------------------------------------------

/// A fixed signature rich enough for interesting terms: two base types, a
/// dependent family over one of them, constructors, and dependent functions.
pub struct GenSig {
    types: BTreeMap<QName, Term>,
}

fn q(name: &str) -> QName {
    QName::new("gen", name)
}

pub fn c(name: &str) -> Term {
    Term::Const(q(name))
}

impl GenSig {
    pub fn new() -> Self {
        let iota = c("iota");
        let omic = c("omic");
        let fam = c("fam");
        let f = c("f");
        let mut types = BTreeMap::new();
        types.insert(q("iota"), Term::Type);
        types.insert(q("omic"), Term::Type);
        types.insert(q("a"), iota.clone());
        types.insert(q("b"), iota.clone());
        types.insert(q("u"), omic.clone());
        types.insert(q("f"), Term::arrow(iota.clone(), iota.clone()));
        types.insert(
            q("g"),
            Term::arrow(iota.clone(), Term::arrow(iota.clone(), iota.clone())),
        );
        types.insert(q("h"), Term::arrow(iota.clone(), omic.clone()));
        types.insert(q("fam"), Term::arrow(iota.clone(), Term::Type));
        // w : (x : iota) fam x
        types.insert(
            q("w"),
            Term::pi(
                "x",
                iota.clone(),
                Term::app(shift(&fam, 1, 0), Term::Var(0)),
                false,
            ),
        );
        // s : (x : iota) fam x → fam (f x)
        types.insert(
            q("s"),
            Term::pi(
                "x",
                iota.clone(),
                Term::arrow(
                    Term::app(shift(&fam, 1, 0), Term::Var(0)),
                    Term::app(shift(&fam, 1, 0), Term::app(shift(&f, 1, 0), Term::Var(0))),
                ),
                false,
            ),
        );
        GenSig { types }
    }
}

impl Signature for GenSig {
    fn const_type(&self, name: &QName) -> Option<Term> {
        self.types.get(name).cloned()
    }
    fn const_definiens(&self, _q: &QName) -> Option<&Term> {
        None
    }
}

/// A random type over the generator signature.
pub fn gen_type(rng: &mut StdRng, depth: u32) -> Term {
    match if depth == 0 {
        rng.gen_range(0..3)
    } else {
        rng.gen_range(0..6)
    } {
        0 | 3 => c("iota"),
        1 => c("omic"),
        2 => Term::app(
            c("fam"),
            gen_term_locals(rng, &mut Vec::new(), &c("iota"), depth),
        ),
        4 => Term::arrow(gen_type(rng, depth - 1), gen_type(rng, depth - 1)),
        _ => Term::arrow(c("iota"), gen_type(rng, depth - 1)),
    }
}

/// A random well-typed closed term of the given type.
pub fn gen_term(rng: &mut StdRng, ty: &Term, depth: u32) -> Term {
    gen_term_locals(rng, &mut Vec::new(), ty, depth)
}

/// As [`gen_term`] but under a stack of binder types.
pub fn gen_term_locals(rng: &mut StdRng, locals: &mut Vec<Term>, ty: &Term, depth: u32) -> Term {
    // Sometimes wrap in a beta redex to exercise normalization.
    let base = gen_core(rng, locals, ty, depth);
    if depth > 0 && rng.gen_bool(0.3) {
        if rng.gen_bool(0.5) {
            // identity redex: ([z : ty] z) base
            Term::app(Term::lambda("z", Some(ty.clone()), Term::Var(0)), base)
        } else {
            // constant redex: ([z : iota] base↑) filler
            let filler = gen_core(rng, locals, &c("iota"), depth.saturating_sub(1));
            Term::app(
                Term::lambda("z", Some(c("iota")), shift(&base, 1, 0)),
                filler,
            )
        }
    } else {
        base
    }
}

fn gen_core(rng: &mut StdRng, locals: &mut Vec<Term>, ty: &Term, depth: u32) -> Term {
    // A matching local wins some of the time.
    let hits: Vec<usize> = (0..locals.len())
        .filter(|&i| {
            let idx = locals.len() - 1 - i;
            alpha_eq(&shift(&locals[i], idx + 1, 0), ty)
        })
        .map(|i| locals.len() - 1 - i)
        .collect();
    if !hits.is_empty() && rng.gen_bool(0.4) {
        return Term::Var(hits[rng.gen_range(0..hits.len())]);
    }

    if let Term::Pi {
        domain, codomain, ..
    } = ty
    {
        locals.push((**domain).clone());
        let body = gen_term_locals(rng, locals, codomain, depth.saturating_sub(1));
        locals.pop();
        return Term::lambda("v", Some((**domain).clone()), body);
    }

    let (head, args) = ty.spine();
    if alpha_eq(head, &c("fam")) && args.len() == 1 {
        // w t : fam t for any t.
        return Term::app(c("w"), args[0].clone());
    }
    if alpha_eq(ty, &c("omic")) {
        if depth > 0 && rng.gen_bool(0.5) {
            let arg = gen_term_locals(rng, locals, &c("iota"), depth - 1);
            return Term::app(c("h"), arg);
        }
        return c("u");
    }
    // iota
    if depth == 0 {
        return if rng.gen_bool(0.5) { c("a") } else { c("b") };
    }
    match rng.gen_range(0..4) {
        0 => c("a"),
        1 => c("b"),
        2 => Term::app(c("f"), gen_term_locals(rng, locals, &c("iota"), depth - 1)),
        _ => Term::apps(
            c("g"),
            [
                gen_term_locals(rng, locals, &c("iota"), depth - 1),
                gen_term_locals(rng, locals, &c("iota"), depth - 1),
            ],
        ),
    }
}

// ---------------------------------------------------------------------------
// Surface files for round-trip checks
// ---------------------------------------------------------------------------

const NAME_POOL: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "veg", "klaus", "rho", "sigma", "entry", "node",
];

fn sp() -> Span {
    Span::default()
}

fn fresh_name(rng: &mut StdRng, counter: &mut u32) -> String {
    let base = NAME_POOL[rng.gen_range(0..NAME_POOL.len())];
    *counter += 1;
    format!("{base}{counter}")
}

struct ExprGen {
    /// Operators declared so far, with their fixities.
    ops: Vec<(String, Fixity)>,
    atoms: Vec<String>,
}

impl ExprGen {
    fn gen(&self, rng: &mut StdRng, depth: u32) -> Expr {
        let infix: Vec<&(String, Fixity)> = self
            .ops
            .iter()
            .filter(|(_, f)| !matches!(f, Fixity::Prefix(_)))
            .collect();
        let prefix: Vec<&(String, Fixity)> = self
            .ops
            .iter()
            .filter(|(_, f)| matches!(f, Fixity::Prefix(_)))
            .collect();
        let choice = if depth == 0 {
            rng.gen_range(0..2)
        } else {
            rng.gen_range(0..10)
        };
        match choice {
            0 => Expr::Name(self.atoms[rng.gen_range(0..self.atoms.len())].clone(), sp()),
            1 => {
                if rng.gen_bool(0.2) {
                    Expr::TypeSort(sp())
                } else {
                    Expr::Name(self.atoms[rng.gen_range(0..self.atoms.len())].clone(), sp())
                }
            }
            2 | 3 => {
                // application chain
                let mut e = self.gen(rng, depth - 1);
                for _ in 0..rng.gen_range(1..=2) {
                    e = Expr::app(e, self.gen(rng, depth - 1));
                }
                e
            }
            4 if !infix.is_empty() => {
                let (op, _) = infix[rng.gen_range(0..infix.len())];
                Expr::app(
                    Expr::app(Expr::Name(op.clone(), sp()), self.gen(rng, depth - 1)),
                    self.gen(rng, depth - 1),
                )
            }
            5 if !prefix.is_empty() => {
                let (op, _) = prefix[rng.gen_range(0..prefix.len())];
                Expr::app(Expr::Name(op.clone(), sp()), self.gen(rng, depth - 1))
            }
            6 => {
                let names = rng.gen_range(1..=2);
                let ann = if rng.gen_bool(0.4) {
                    Some(Box::new(self.gen(rng, depth - 1)))
                } else {
                    None
                };
                let mut body = self.gen(rng, depth - 1);
                for i in (0..names).rev() {
                    body = Expr::Lambda {
                        name: format!("v{i}"),
                        ann: ann.clone(),
                        body: Box::new(body),
                        span: sp(),
                    };
                }
                body
            }
            7 => {
                let names = rng.gen_range(1..=2);
                let domain = self.gen(rng, depth - 1);
                let mut body = self.gen(rng, depth - 1);
                for i in (0..names).rev() {
                    body = Expr::Pi {
                        name: format!("p{i}"),
                        domain: Box::new(domain.clone()),
                        body: Box::new(body),
                        span: sp(),
                    };
                }
                body
            }
            8 => Expr::Arrow(
                Box::new(self.gen(rng, depth - 1)),
                Box::new(self.gen(rng, depth - 1)),
            ),
            _ => {
                if rng.gen_bool(0.15) {
                    Expr::Hole(sp())
                } else {
                    Expr::Name(self.atoms[rng.gen_range(0..self.atoms.len())].clone(), sp())
                }
            }
        }
    }
}

/// A random source file: a few theories with declarations (operator
/// declarations included, used by later expressions), and occasionally a
/// view, pushout directive, or attack assertion.
pub fn gen_source_file(rng: &mut StdRng) -> SourceFile {
    let mut counter = 0;
    let mut items = Vec::new();
    if rng.gen_bool(0.2) {
        items.push(Item::Import(ImportItem {
            name: "folnd".into(),
            span: sp(),
        }));
    }
    let mut gen = ExprGen {
        ops: Vec::new(),
        atoms: vec!["x".into(), "y".into(), "zed".into(), "konst".into()],
    };
    let theory_count = rng.gen_range(1..=3);
    let mut theory_names: Vec<String> = Vec::new();
    for t in 0..theory_count {
        let tname = format!("T{t}");
        let mut entries = Vec::new();
        for prev in theory_names
            .iter()
            .take(rng.gen_range(0..=theory_names.len()))
        {
            entries.push(TheoryEntry::Include(IncludeEntry {
                name: prev.clone(),
                span: sp(),
            }));
        }
        for _ in 0..rng.gen_range(1..=5) {
            let name = fresh_name(rng, &mut counter);
            let fixity = if rng.gen_bool(0.25) {
                let prec = [10, 20, 30][rng.gen_range(0..3)];
                Some(match rng.gen_range(0..3) {
                    0 => Fixity::Infixl(prec),
                    1 => Fixity::Infixr(prec),
                    _ => Fixity::Prefix(prec),
                })
            } else {
                None
            };
            let ty = if fixity.is_some() || rng.gen_bool(0.7) {
                Some(gen.gen(rng, 3))
            } else {
                None
            };
            let def = if ty.is_none() || rng.gen_bool(0.4) {
                Some(gen.gen(rng, 3))
            } else {
                None
            };
            if let Some(fx) = fixity {
                gen.ops.push((name.clone(), fx));
            } else if rng.gen_bool(0.3) {
                gen.atoms.push(name.clone());
            }
            entries.push(TheoryEntry::Decl(DeclItem {
                name,
                fixity,
                ty,
                def,
                span: sp(),
            }));
        }
        theory_names.push(tname.clone());
        items.push(Item::Theory(TheoryItem {
            name: tname,
            meta: if rng.gen_bool(0.15) {
                Some("T0".into())
            } else {
                None
            },
            entries,
            span: sp(),
        }));
    }
    if rng.gen_bool(0.5) {
        let assignments = (0..rng.gen_range(1..=2))
            .map(|_| AssignEntry {
                constant: fresh_name(rng, &mut counter),
                value: gen.gen(rng, 2),
                span: sp(),
            })
            .collect();
        items.push(Item::View(ViewItem {
            name: fresh_name(rng, &mut counter),
            domain: "T0".into(),
            codomain: theory_names.last().cloned().unwrap_or_else(|| "T0".into()),
            assignments,
            span: sp(),
        }));
    }
    if rng.gen_bool(0.3) {
        let renaming = (0..rng.gen_range(0..=2))
            .map(|_| (fresh_name(rng, &mut counter), fresh_name(rng, &mut counter)))
            .collect();
        items.push(Item::Pushout(PushoutItem {
            name: fresh_name(rng, &mut counter),
            rule: "T0".into(),
            view: fresh_name(rng, &mut counter),
            renaming,
            span: sp(),
        }));
    }
    if rng.gen_bool(0.3) {
        items.push(Item::Attack(AttackItem {
            attacker: "T0".into(),
            target: theory_names.last().cloned().unwrap_or_else(|| "T0".into()),
            witness: gen.gen(rng, 2),
            span: sp(),
        }));
    }
    SourceFile { items }
}

// ---------------------------------------------------------------------------
// Attack graphs and the exhaustive labeling oracle
// ---------------------------------------------------------------------------

pub fn synthetic_edge(from: &str, to: &str) -> AttackEdge {
    AttackEdge {
        attacker: from.to_string(),
        target: to.to_string(),
        witness: Term::Type,
        provenance: AttackProvenance::Asserted,
        verified: true,
    }
}

/// A random attack graph over at most `max_nodes` nodes; self-loops allowed.
pub fn gen_attack_graph(rng: &mut StdRng, max_nodes: usize) -> (Vec<String>, Vec<AttackEdge>) {
    let n = rng.gen_range(1..=max_nodes);
    let nodes: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let p = if i == j { 0.08 } else { 0.25 };
            if rng.gen_bool(p) {
                edges.push(synthetic_edge(&nodes[i], &nodes[j]));
            }
        }
    }
    (nodes, edges)
}

/// All complete labelings by brute force over every assignment in
/// {IN, OUT, UNDEC}^n, checked directly against the definition: a node is IN
/// iff all its attackers are OUT, and OUT iff some attacker is IN.
pub fn oracle_complete_labelings(
    nodes: &[String],
    edges: &[AttackEdge],
) -> Vec<BTreeMap<String, Label>> {
    let n = nodes.len();
    let index: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let mut attackers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in edges {
        if let (Some(&a), Some(&t)) = (index.get(e.attacker.as_str()), index.get(e.target.as_str()))
        {
            if !attackers[t].contains(&a) {
                attackers[t].push(a);
            }
        }
    }
    let mut out = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut labels = Vec::with_capacity(n);
        let mut x = code;
        for _ in 0..n {
            labels.push(match x % 3 {
                0 => Label::In,
                1 => Label::Out,
                _ => Label::Undec,
            });
            x /= 3;
        }
        let legal = (0..n).all(|i| {
            let all_out = attackers[i].iter().all(|&a| labels[a] == Label::Out);
            let some_in = attackers[i].iter().any(|&a| labels[a] == Label::In);
            match labels[i] {
                Label::In => all_out,
                Label::Out => some_in,
                Label::Undec => !all_out && !some_in,
            }
        });
        if legal {
            out.push(
                nodes
                    .iter()
                    .cloned()
                    .zip(labels.iter().copied())
                    .collect::<BTreeMap<_, _>>(),
            );
        }
    }
    out
}

/// The minimal-IN complete labeling, asserted unique.
pub fn oracle_grounded(nodes: &[String], edges: &[AttackEdge]) -> BTreeMap<String, Label> {
    let all = oracle_complete_labelings(nodes, edges);
    fn in_set(l: &BTreeMap<String, Label>) -> BTreeSet<&String> {
        l.iter()
            .filter(|(_, v)| **v == Label::In)
            .map(|(k, _)| k)
            .collect()
    }
    let minimal: Vec<&BTreeMap<String, Label>> = all
        .iter()
        .filter(|l| {
            let ins = in_set(l);
            all.iter().all(|other| ins.is_subset(&in_set(other)))
        })
        .collect();
    assert_eq!(
        minimal.len(),
        1,
        "the minimal-IN complete labeling is unique"
    );
    minimal[0].clone()
}

// ---------------------------------------------------------------------------
// Pushout instances and the brute-force mediator oracle
// ---------------------------------------------------------------------------

pub struct PushoutInstance {
    pub source: String,
    /// Pool of same-type alternatives for negative (incompatible) cocones.
    pub alt_assignment: Option<(String, String)>,
}

/// A small random pushout instance as source text: base types, condition
/// theory A, rule theory B over it, case theory C, cocone target D ⊇ C, the
/// application view `phi : A → C`, a compatible `psi : B → D`, and the
/// pushout directive.
pub fn gen_pushout_instance(rng: &mut StdRng, seed_tag: usize) -> PushoutInstance {
    let ty = |rng: &mut StdRng| if rng.gen_bool(0.5) { "t1" } else { "t2" };
    let mut src = String::new();
    src.push_str("theory base { t1 : type\n t2 : type }\n");

    let a_count = rng.gen_range(1..=3);
    let a_types: Vec<&str> = (0..a_count).map(|_| ty(rng)).collect();
    src.push_str("theory A { include base\n");
    for (i, t) in a_types.iter().enumerate() {
        src.push_str(&format!(" a{i} : {t}\n"));
    }
    src.push_str("}\n");

    let b_count = rng.gen_range(1..=3);
    let mut b_defined = Vec::new();
    src.push_str("theory B { include A\n");
    for i in 0..b_count {
        if !a_types.is_empty() && rng.gen_bool(0.4) {
            let j = rng.gen_range(0..a_types.len());
            src.push_str(&format!(" b{i} : {} = a{j}\n", a_types[j]));
            b_defined.push(true);
        } else {
            src.push_str(&format!(" b{i} : {}\n", ty(rng)));
            b_defined.push(false);
        }
    }
    src.push_str("}\n");

    // C needs at least one constant per base type so phi can always land.
    let extra_c = rng.gen_range(0..=2);
    let mut c_consts: Vec<(String, String)> =
        vec![("c0".into(), "t1".into()), ("c1".into(), "t2".into())];
    for i in 0..extra_c {
        c_consts.push((format!("c{}", i + 2), ty(rng).to_string()));
    }
    src.push_str("theory C { include base\n");
    for (n, t) in &c_consts {
        src.push_str(&format!(" {n} : {t}\n"));
    }
    src.push_str("}\n");

    let extra_d = rng.gen_range(0..=2);
    let mut d_consts = Vec::new();
    src.push_str("theory D { include C\n");
    for i in 0..extra_d {
        let t = ty(rng).to_string();
        let n = format!("d{i}");
        src.push_str(&format!(" {n} : {t}\n"));
        d_consts.push((n, t));
    }
    src.push_str(&format!(" dpad{seed_tag} : t1\n"));
    d_consts.push((format!("dpad{seed_tag}"), "t1".into()));
    src.push_str("}\n");

    let pick = |rng: &mut StdRng, pool: &[(String, String)], want: &str| -> String {
        let fits: Vec<&(String, String)> = pool.iter().filter(|(_, t)| t == want).collect();
        fits[rng.gen_range(0..fits.len())].0.clone()
    };

    src.push_str("view phi : A -> C {\n");
    let mut phi: Vec<(String, String)> = Vec::new();
    for (i, t) in a_types.iter().enumerate() {
        let target = pick(rng, &c_consts, t);
        src.push_str(&format!(" a{i} := {target}\n"));
        phi.push((format!("a{i}"), target));
    }
    src.push_str("}\n");

    // psi agrees with phi on A; B-locals (undefined ones) map anywhere
    // type-correct in D.
    let d_pool: Vec<(String, String)> = c_consts
        .iter()
        .cloned()
        .chain(d_consts.iter().cloned())
        .collect();
    src.push_str("view psi : B -> D {\n");
    for (name, target) in &phi {
        src.push_str(&format!(" {name} := {target}\n"));
    }
    let b_types: Vec<Option<String>> = {
        // reparse what we wrote: undefined b{i} keep their written type
        let mut v = Vec::new();
        for (i, defined) in b_defined.iter().enumerate() {
            if *defined {
                v.push(None);
            } else {
                // recover the type from the source line
                let line = src
                    .lines()
                    .find(|l| l.trim_start().starts_with(&format!("b{i} :")))
                    .expect("b decl exists");
                let t = line.split(':').nth(1).expect("typed").trim().to_string();
                v.push(Some(t));
            }
        }
        v
    };
    for (i, t) in b_types.iter().enumerate() {
        if let Some(t) = t {
            let target = pick(rng, &d_pool, t);
            src.push_str(&format!(" b{i} := {target}\n"));
        }
    }
    src.push_str("}\n");
    src.push_str("pushout P = apply B along phi\n");

    // A same-type alternative for breaking compatibility on A.
    let alt = phi.iter().enumerate().find_map(|(i, (name, target))| {
        let want = &a_types[i];
        c_consts
            .iter()
            .find(|(n, t)| t == *want && n != target)
            .map(|(n, _)| (name.clone(), n.clone()))
    });

    PushoutInstance {
        source: src,
        alt_assignment: alt,
    }
}

/// Brute-force the mediating morphism: every map from P's undefined local
/// constants to type-matching D constants, counting those that are valid
/// morphisms and commute with the cocone.
pub fn oracle_mediators(
    graph: &ContextGraph,
    pushout: &str,
    psi: &Morphism,
    c_leg: &Morphism,
) -> Vec<BTreeMap<QName, QName>> {
    let record = graph.pushout(pushout).expect("pushout exists");
    let target = &psi.codomain;
    let slots: Vec<(QName, Term)> = record
        .provenance
        .keys()
        .filter(|copy| graph.declaration(copy).unwrap().def.is_none())
        .map(|copy| {
            (
                copy.clone(),
                graph.declaration(copy).unwrap().ty.clone().unwrap(),
            )
        })
        .collect();
    let candidates: Vec<(QName, Term)> = graph
        .flatten(target)
        .unwrap()
        .into_iter()
        .map(|e| {
            let d = graph.declaration(&e.qname).unwrap();
            (e.qname, d.ty.clone().unwrap())
        })
        .collect();

    let mut found = Vec::new();
    let mut choice = vec![0usize; slots.len()];
    'outer: loop {
        // materialize this choice if every slot picks a type-matching target
        let mut assignment: BTreeMap<QName, Term> = c_leg.assignment.clone();
        let mut readable = BTreeMap::new();
        let mut ok = true;
        for (s, (slot, slot_ty)) in slots.iter().enumerate() {
            let (cand, cand_ty) = &candidates[choice[s]];
            if !alpha_eq(cand_ty, slot_ty) {
                ok = false;
                break;
            }
            assignment.insert(slot.clone(), Term::Const(cand.clone()));
            readable.insert(slot.clone(), cand.clone());
        }
        if ok {
            let m = Morphism {
                name: "oracle".into(),
                kind: cg::graph::MorphismKind::View,
                domain: record.name.clone(),
                codomain: target.clone(),
                assignment,
                status: cg::graph::MorphismStatus::Unchecked,
            };
            let valid = cg::graph::check_view(graph, &m)
                .map(|r| r.is_total())
                .unwrap_or(false)
                && commutes(graph, record, &m, psi);
            if valid {
                found.push(readable);
            }
        }
        // next choice vector
        for slot in choice.iter_mut().take(slots.len()) {
            *slot += 1;
            if *slot < candidates.len() {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    if slots.is_empty() {
        // the single empty assignment was already evaluated once above
        found.dedup();
    }
    found
}

fn commutes(
    graph: &ContextGraph,
    record: &cg::graph::PushoutRecord,
    mediator: &Morphism,
    psi: &Morphism,
) -> bool {
    let induced = graph.view(&record.induced).expect("induced morphism");
    let shared = graph.include_closure(&psi.codomain).unwrap();
    for entry in graph.flatten(&record.rule).unwrap() {
        if shared.contains(&entry.qname.theory) {
            continue;
        }
        if graph.declaration(&entry.qname).unwrap().def.is_some() {
            continue;
        }
        let through_p = cg::graph::translate(graph, induced, &Term::Const(entry.qname.clone()))
            .and_then(|t| cg::graph::translate(graph, mediator, &t));
        let direct = cg::graph::translate(graph, psi, &Term::Const(entry.qname.clone()));
        match (through_p, direct) {
            (Ok(a), Ok(b)) if alpha_eq(&a, &b) => {}
            _ => return false,
        }
    }
    true
}

// ---------------------------------------------------------------------------
// View-finding toys and the enumeration oracle
// ---------------------------------------------------------------------------

pub struct ViewToy {
    pub source: String,
    pub domain: String,
    pub codomain: String,
}

/// A small pair of theories over shared base types; sometimes with a
/// judgment-typed axiom so proof-term matching is exercised.
pub fn gen_view_toy(rng: &mut StdRng) -> ViewToy {
    let mut src = String::new();
    let with_axiom = rng.gen_bool(0.4);
    src.push_str("theory vbase { s1 : type\n s2 : type }\n");
    let ty = |rng: &mut StdRng| if rng.gen_bool(0.5) { "s1" } else { "s2" };

    let dom_consts = rng.gen_range(1..=if with_axiom { 2 } else { 4 });
    src.push_str("theory vdom { include vbase\n");
    for i in 0..dom_consts {
        src.push_str(&format!(" x{i} : {}\n", ty(rng)));
    }
    if with_axiom {
        src.push_str(" xp : bool\n xax : ⊢ xp\n");
    }
    src.push_str("}\n");

    let cod_consts = rng.gen_range(1..=4);
    src.push_str("theory vcod { include vbase\n");
    for i in 0..cod_consts {
        src.push_str(&format!(" y{i} : {}\n", ty(rng)));
    }
    if with_axiom {
        src.push_str(" yp : bool\n yq : bool\n yprf : ⊢ yp\n");
    }
    src.push_str("}\n");
    ViewToy {
        source: src,
        domain: "vdom".into(),
        codomain: "vcod".into(),
    }
}

/// Candidates by raw enumeration over (targets + skip)^units with a
/// standalone validity check: replace assigned constants in each unit's type
/// and compare alpha-equal against the target's type; a type mentioning an
/// unassigned unit invalidates the whole map. Maximality, scoring, and
/// ordering mirror the specification.
pub fn oracle_find_views(
    graph: &ContextGraph,
    domain: &str,
    codomain: &str,
    allow_partial: bool,
) -> Vec<(BTreeMap<QName, QName>, usize, usize)> {
    let closure = graph.include_closure(codomain).unwrap();
    let units: Vec<(QName, Term)> = graph
        .flatten(domain)
        .unwrap()
        .into_iter()
        .filter(|e| !closure.contains(&e.qname.theory))
        .filter(|e| graph.declaration(&e.qname).unwrap().def.is_none())
        .map(|e| {
            let ty = graph.declaration(&e.qname).unwrap().ty.clone().unwrap();
            (e.qname, ty)
        })
        .collect();
    let targets: Vec<(QName, Term)> = graph
        .flatten(codomain)
        .unwrap()
        .into_iter()
        .map(|e| {
            let ty = graph.declaration(&e.qname).unwrap().ty.clone().unwrap();
            (e.qname, ty)
        })
        .collect();

    fn subst_consts(t: &Term, map: &BTreeMap<QName, QName>) -> Term {
        match t {
            Term::Const(qn) => match map.get(qn) {
                Some(to) => Term::Const(to.clone()),
                None => t.clone(),
            },
            Term::Var(_) | Term::Type | Term::Meta(_) => t.clone(),
            Term::App(f, a) => Term::app(subst_consts(f, map), subst_consts(a, map)),
            Term::Lambda { name, ann, body } => Term::Lambda {
                name: name.clone(),
                ann: ann.as_ref().map(|a| Box::new(subst_consts(a, map))),
                body: Box::new(subst_consts(body, map)),
            },
            Term::Pi {
                name,
                domain,
                codomain,
                implicit,
            } => Term::Pi {
                name: name.clone(),
                domain: Box::new(subst_consts(domain, map)),
                codomain: Box::new(subst_consts(codomain, map)),
                implicit: *implicit,
            },
        }
    }

    fn mentions_unassigned(t: &Term, units: &[QName], map: &BTreeMap<QName, QName>) -> bool {
        let mut consts = Vec::new();
        t.constants(&mut consts);
        consts
            .iter()
            .any(|qn| units.contains(qn) && !map.contains_key(qn))
    }

    let unit_names: Vec<QName> = units.iter().map(|(qn, _)| qn.clone()).collect();
    // options per unit: targets.len() == "assign to that target", last = skip
    let radix = targets.len() + 1;
    let mut valid: Vec<BTreeMap<QName, QName>> = Vec::new();
    let mut code = vec![0usize; units.len()];
    loop {
        let mut map = BTreeMap::new();
        let mut is_partial = false;
        for (u, pick) in code.iter().enumerate() {
            if *pick == targets.len() {
                is_partial = true;
            } else {
                map.insert(units[u].0.clone(), targets[*pick].0.clone());
            }
        }
        if !(is_partial && !allow_partial) {
            let ok = units.iter().all(|(qn, ty)| match map.get(qn) {
                None => true,
                Some(target_qn) => {
                    if mentions_unassigned(ty, &unit_names, &map) {
                        return false;
                    }
                    let translated = subst_consts(ty, &map);
                    let target_ty = &targets
                        .iter()
                        .find(|(t, _)| t == target_qn)
                        .expect("target exists")
                        .1;
                    alpha_eq(&translated, target_ty)
                }
            });
            if ok && !valid.contains(&map) {
                valid.push(map);
            }
        }
        let mut u = 0;
        loop {
            if u == code.len() {
                // exhausted
                let maximal: Vec<&BTreeMap<QName, QName>> = valid
                    .iter()
                    .filter(|m| {
                        !valid.iter().any(|other| {
                            other.len() > m.len() && m.iter().all(|(k, v)| other.get(k) == Some(v))
                        })
                    })
                    .collect();
                let total = units.len();
                let mut scored: Vec<(BTreeMap<QName, QName>, usize, usize)> = maximal
                    .into_iter()
                    .map(|m| (m.clone(), m.len(), total))
                    .collect();
                scored.sort_by(|a, b| {
                    let sa = if a.2 == 0 {
                        1.0
                    } else {
                        a.1 as f64 / a.2 as f64
                    };
                    let sb = if b.2 == 0 {
                        1.0
                    } else {
                        b.1 as f64 / b.2 as f64
                    };
                    sb.partial_cmp(&sa).unwrap().then_with(|| {
                        let ka: Vec<(String, String)> =
                            a.0.iter()
                                .map(|(k, v)| (k.to_string(), v.to_string()))
                                .collect();
                        let kb: Vec<(String, String)> =
                            b.0.iter()
                                .map(|(k, v)| (k.to_string(), v.to_string()))
                                .collect();
                        ka.cmp(&kb)
                    })
                });
                return scored;
            }
            code[u] += 1;
            if code[u] < radix {
                break;
            }
            code[u] = 0;
            u += 1;
        }
    }
}
