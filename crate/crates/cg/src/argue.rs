//! Assumption-based attack detection, attack inheritance along includes, and
//! argumentation labelings over the context graph.
//!
//! An attack is witnessed by a proposition: the attacker's flattening proves
//! `⊢ w` while the target holds an assumption whose contrary is `w`. No proof
//! search happens here; only declarations whose stated type is the required
//! judgment count. Detected edges are attributed to the theories that locally
//! declare the witness proof and the assumption; inheritance then lifts an
//! edge to pairs of proper extensions of both endpoints.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{AttackEdge, AttackProvenance, ContextGraph, DeclKind, GraphError};
use crate::kernel::{alpha_eq, QName, Term, TypingContext};

/// Largest attack graph the exhaustive semantics will enumerate.
pub const ENUMERATION_BOUND: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    In,
    Out,
    Undec,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::In => write!(f, "IN"),
            Label::Out => write!(f, "OUT"),
            Label::Undec => write!(f, "UNDEC"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Grounded,
    Complete,
    Preferred,
}

impl std::str::FromStr for Semantics {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grounded" => Ok(Semantics::Grounded),
            "complete" => Ok(Semantics::Complete),
            "preferred" => Ok(Semantics::Preferred),
            other => Err(format!("unknown semantics `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    pub semantics: Semantics,
    pub labels: BTreeMap<String, Label>,
}

impl Labeling {
    pub fn label(&self, node: &str) -> Label {
        self.labels.get(node).copied().unwrap_or(Label::Undec)
    }

    pub fn out_nodes(&self) -> Vec<String> {
        self.labels
            .iter()
            .filter(|(_, l)| **l == Label::Out)
            .map(|(n, _)| n.clone())
            .collect()
    }
}

/// All assumptions visible in a theory's flattening, with their propositions
/// in normal form.
pub fn assumptions_of(
    graph: &ContextGraph,
    theory: &str,
) -> Result<Vec<(QName, Term)>, GraphError> {
    let ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
    let mut out = Vec::new();
    for entry in graph.flatten(theory)? {
        let decl = graph
            .declaration(&entry.qname)
            .expect("flattened declaration exists");
        if decl.kind != DeclKind::Assumption {
            continue;
        }
        let ty = decl.ty.as_ref().expect("checked declaration has a type");
        let nf = ctx.normalize(ty)?;
        if let (Term::Const(_), args) = nf.spine() {
            if args.len() == 1 {
                out.push((entry.qname, args[0].clone()));
                continue;
            }
        }
        out.push((entry.qname, nf));
    }
    Ok(out)
}

/// The contrary of a proposition: strip one negation, else negate. This makes
/// `contrary` an involution.
pub fn contrary(graph: &ContextGraph, p: &Term) -> Result<Term, GraphError> {
    let neg = graph
        .prelude_const("¬")
        .ok_or_else(|| GraphError::UnknownTheory("prelude with `¬`".into()))?;
    let ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
    let nf = ctx.normalize(p)?;
    if let (Term::Const(head), args) = nf.spine() {
        if *head == neg && args.len() == 1 {
            return Ok(args[0].clone());
        }
    }
    Ok(Term::app(Term::Const(neg), nf))
}

/// Outcome of checking one attack edge: whether the elaboration pattern is
/// satisfied, and by what.
#[derive(Debug, Clone)]
pub struct AttackWitness {
    pub holds: bool,
    /// Declaration of type `⊢ w` in the attacker.
    pub proof: Option<QName>,
    /// Assumption in the target whose contrary is `w`.
    pub assumption: Option<QName>,
    /// Assignments of the defeater-side view (kernel `Prop`, `Proof`).
    pub defeater_view: BTreeMap<String, Term>,
    /// Assignments of the assumption-side view (kernel `Prop`, `Ass`).
    pub assumption_view: BTreeMap<String, Term>,
    pub diagnosis: String,
}

/// Verify an attack by elaborating it into the defeater/kernel/assumption
/// pattern: the attacker must prove `⊢ w` and the target must assume a
/// proposition whose contrary is `w`. The two pattern views are returned as
/// assignment maps. The assumption side is checked up to the involution of
/// `contrary`, so non-negated assumptions fit the pattern too.
pub fn verify_attack(
    graph: &ContextGraph,
    attacker: &str,
    target: &str,
    witness: &Term,
) -> Result<AttackWitness, GraphError> {
    let judge = graph
        .prelude_const("⊢")
        .ok_or_else(|| GraphError::UnknownTheory("prelude with `⊢`".into()))?;
    let ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
    let w = ctx.normalize(witness)?;

    let mut proof = None;
    for entry in graph.flatten(attacker)? {
        let decl = graph
            .declaration(&entry.qname)
            .expect("flattened declaration exists");
        let ty = decl.ty.as_ref().expect("checked declaration has a type");
        let nf = ctx.normalize(ty)?;
        if let (Term::Const(head), args) = nf.spine() {
            if *head == judge && args.len() == 1 && alpha_eq(args[0], &w) {
                proof = Some(entry.qname);
                break;
            }
        }
    }

    let mut assumption = None;
    for (q, prop) in assumptions_of(graph, target)? {
        let contra = contrary(graph, &prop)?;
        if alpha_eq(&ctx.normalize(&contra)?, &w) {
            assumption = Some(q);
            break;
        }
    }

    let holds = proof.is_some() && assumption.is_some();
    let diagnosis = match (&proof, &assumption) {
        (Some(_), Some(_)) => "attack pattern satisfied".to_string(),
        (None, _) => format!("`{attacker}` proves no declaration of type ⊢ {w}"),
        (_, None) => format!("`{target}` has no assumption whose contrary is {w}"),
    };
    let mut defeater_view = BTreeMap::new();
    let mut assumption_view = BTreeMap::new();
    if holds {
        defeater_view.insert("Prop".to_string(), w.clone());
        defeater_view.insert(
            "Proof".to_string(),
            Term::Const(proof.clone().expect("checked above")),
        );
        assumption_view.insert("Prop".to_string(), w.clone());
        assumption_view.insert(
            "Ass".to_string(),
            Term::Const(assumption.clone().expect("checked above")),
        );
    }
    Ok(AttackWitness {
        holds,
        proof,
        assumption,
        defeater_view,
        assumption_view,
        diagnosis,
    })
}

fn witness_key(w: &Term) -> String {
    w.to_string()
}

/// Scan ordered pairs of scope theories for attacks. For every assumption of
/// a scope theory whose contrary is proved in another (or the same) scope
/// theory, one verified edge is emitted, attributed to the origin theories of
/// the proof and of the assumption, then deduplicated.
pub fn detect_attacks(
    graph: &ContextGraph,
    scope: &[String],
) -> Result<Vec<AttackEdge>, GraphError> {
    let Some(judge) = graph.prelude_const("⊢") else {
        return Ok(Vec::new());
    };
    let ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
    let mut seen: BTreeSet<(String, String, String)> = BTreeSet::new();
    let mut edges = Vec::new();
    for target in scope {
        for (aq, prop) in assumptions_of(graph, target)? {
            let w = ctx.normalize(&contrary(graph, &prop)?)?;
            for attacker in scope {
                for entry in graph.flatten(attacker)? {
                    let decl = graph
                        .declaration(&entry.qname)
                        .expect("flattened declaration exists");
                    let ty = decl.ty.as_ref().expect("checked declaration has a type");
                    let nf = ctx.normalize(ty)?;
                    let (head, args) = nf.spine();
                    let is_proof = matches!(head, Term::Const(h) if *h == judge)
                        && args.len() == 1
                        && alpha_eq(args[0], &w);
                    if !is_proof {
                        continue;
                    }
                    // Attribute the edge to the declaring theories.
                    let from = entry.qname.theory.clone();
                    let to = aq.theory.clone();
                    if seen.insert((from.clone(), to.clone(), witness_key(&w))) {
                        edges.push(AttackEdge {
                            attacker: from,
                            target: to,
                            witness: w.clone(),
                            provenance: AttackProvenance::Detected,
                            verified: true,
                        });
                    }
                }
            }
        }
    }
    edges.sort_by(|a, b| {
        (&a.attacker, &a.target, witness_key(&a.witness)).cmp(&(
            &b.attacker,
            &b.target,
            witness_key(&b.witness),
        ))
    });
    Ok(edges)
}

/// Lift base edges along includes: an edge survives unchanged, and for every
/// pair of proper extensions of attacker and target it lifts, provided the
/// attacked assumption survives in the extension. An extension that itself
/// proves the contrary discharges the assumption internally; the lift is
/// suppressed and a self-edge on the extension is emitted instead.
pub fn inherit_attacks(
    graph: &ContextGraph,
    base: &[AttackEdge],
) -> Result<Vec<AttackEdge>, GraphError> {
    let judge = graph.prelude_const("⊢");
    let ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
    let mut seen: BTreeSet<(String, String, String)> = BTreeSet::new();
    let mut edges = Vec::new();
    for e in base {
        if seen.insert((
            e.attacker.clone(),
            e.target.clone(),
            witness_key(&e.witness),
        )) {
            edges.push(e.clone());
        }
    }
    for e in base {
        let attackers: Vec<String> = graph
            .includers(&e.attacker)
            .into_iter()
            .filter(|t| t != &e.attacker)
            .collect();
        let targets: Vec<String> = graph
            .includers(&e.target)
            .into_iter()
            .filter(|t| t != &e.target)
            .collect();
        for t2 in &targets {
            // Does the extension prove the witness itself?
            let mut discharged = false;
            if let Some(judge) = &judge {
                for entry in graph.flatten(t2)? {
                    let decl = graph
                        .declaration(&entry.qname)
                        .expect("flattened declaration exists");
                    let ty = decl.ty.as_ref().expect("checked declaration has a type");
                    let nf = ctx.normalize(ty)?;
                    let (head, args) = nf.spine();
                    if matches!(head, Term::Const(h) if h == judge)
                        && args.len() == 1
                        && alpha_eq(args[0], &e.witness)
                    {
                        discharged = true;
                        break;
                    }
                }
            }
            if discharged {
                if seen.insert((t2.clone(), t2.clone(), witness_key(&e.witness))) {
                    edges.push(AttackEdge {
                        attacker: t2.clone(),
                        target: t2.clone(),
                        witness: e.witness.clone(),
                        provenance: AttackProvenance::Inherited {
                            base_attacker: e.attacker.clone(),
                            base_target: e.target.clone(),
                        },
                        verified: true,
                    });
                }
                continue;
            }
            for t1 in &attackers {
                if seen.insert((t1.clone(), t2.clone(), witness_key(&e.witness))) {
                    edges.push(AttackEdge {
                        attacker: t1.clone(),
                        target: t2.clone(),
                        witness: e.witness.clone(),
                        provenance: AttackProvenance::Inherited {
                            base_attacker: e.attacker.clone(),
                            base_target: e.target.clone(),
                        },
                        verified: true,
                    });
                }
            }
        }
    }
    edges.sort_by(|a, b| {
        (&a.attacker, &a.target, witness_key(&a.witness)).cmp(&(
            &b.attacker,
            &b.target,
            witness_key(&b.witness),
        ))
    });
    Ok(edges)
}

fn attacker_map(nodes: &[String], edges: &[AttackEdge]) -> BTreeMap<String, Vec<usize>> {
    let index: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut map: BTreeMap<String, Vec<usize>> =
        nodes.iter().map(|n| (n.clone(), Vec::new())).collect();
    for e in edges {
        if let (Some(&ai), Some(list)) = (index.get(e.attacker.as_str()), map.get_mut(&e.target)) {
            if !list.contains(&ai) {
                list.push(ai);
            }
        }
    }
    map
}

/// Grounded labeling: least fixed point of "IN when all attackers are OUT,
/// OUT when some attacker is IN"; the rest stays UNDEC.
pub fn grounded_labeling(nodes: &[String], edges: &[AttackEdge]) -> Labeling {
    let attackers = attacker_map(nodes, edges);
    let mut labels: BTreeMap<String, Label> = BTreeMap::new();
    let mut state: Vec<Option<Label>> = vec![None; nodes.len()];
    loop {
        let mut changed = false;
        for (i, node) in nodes.iter().enumerate() {
            if state[i].is_some() {
                continue;
            }
            let atk = &attackers[node];
            if atk.iter().all(|&a| state[a] == Some(Label::Out)) {
                state[i] = Some(Label::In);
                changed = true;
            } else if atk.iter().any(|&a| state[a] == Some(Label::In)) {
                state[i] = Some(Label::Out);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for (i, node) in nodes.iter().enumerate() {
        labels.insert(node.clone(), state[i].unwrap_or(Label::Undec));
    }
    Labeling {
        semantics: Semantics::Grounded,
        labels,
    }
}

/// Every complete labeling, by exhaustive enumeration over IN-sets.
///
/// Every complete labeling agrees with the grounded one wherever the latter
/// is decided, so enumeration runs only over the grounded-UNDEC (contested)
/// part; the node bound applies to that part. A complete labeling of the
/// contested subgraph is determined by its IN-set: OUT is whatever the
/// IN-set attacks, the rest is UNDEC, subject to the legality conditions.
pub fn complete_labelings(
    nodes: &[String],
    edges: &[AttackEdge],
) -> Result<Vec<Labeling>, GraphError> {
    let grounded = grounded_labeling(nodes, edges);
    let contested: Vec<String> = nodes
        .iter()
        .filter(|n| grounded.label(n) == Label::Undec)
        .cloned()
        .collect();
    if contested.len() > ENUMERATION_BOUND {
        return Err(GraphError::SemanticsTooLarge(
            contested.len(),
            ENUMERATION_BOUND,
        ));
    }
    let contested_set: BTreeSet<&String> = contested.iter().collect();
    let sub_edges: Vec<AttackEdge> = edges
        .iter()
        .filter(|e| contested_set.contains(&e.attacker) && contested_set.contains(&e.target))
        .cloned()
        .collect();
    let completions = enumerate_complete(&contested, &sub_edges);
    let mut out = Vec::new();
    for completion in completions {
        let mut labels = grounded.labels.clone();
        labels.extend(completion.labels);
        out.push(Labeling {
            semantics: Semantics::Complete,
            labels,
        });
    }
    Ok(out)
}

fn enumerate_complete(nodes: &[String], edges: &[AttackEdge]) -> Vec<Labeling> {
    let attackers = attacker_map(nodes, edges);
    let atk: Vec<Vec<usize>> = nodes.iter().map(|n| attackers[n].clone()).collect();
    let n = nodes.len();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let in_set = |i: usize| mask & (1 << i) != 0;
        let out_set: Vec<bool> = (0..n).map(|i| atk[i].iter().any(|&a| in_set(a))).collect();
        let mut legal = true;
        for i in 0..n {
            if in_set(i) {
                // IN requires every attacker OUT (in particular, not itself IN).
                if !atk[i].iter().all(|&a| out_set[a]) || out_set[i] {
                    legal = false;
                    break;
                }
            } else if !out_set[i] {
                // UNDEC: must not qualify as IN, and no attacker may be IN
                // (no attacker IN holds by !out_set[i]).
                if atk[i].iter().all(|&a| out_set[a]) {
                    legal = false;
                    break;
                }
            }
        }
        if !legal {
            continue;
        }
        let mut labels = BTreeMap::new();
        for i in 0..n {
            let l = if in_set(i) {
                Label::In
            } else if out_set[i] {
                Label::Out
            } else {
                Label::Undec
            };
            labels.insert(nodes[i].clone(), l);
        }
        out.push(Labeling {
            semantics: Semantics::Complete,
            labels,
        });
    }
    out
}

/// Label the attack graph under the requested semantics. Grounded is the
/// deterministic fixed point; complete returns the grounded labeling (the
/// minimal complete one); preferred returns the first maximal-IN complete
/// labeling in canonical order.
pub fn label(
    nodes: &[String],
    edges: &[AttackEdge],
    semantics: Semantics,
) -> Result<Labeling, GraphError> {
    match semantics {
        Semantics::Grounded => Ok(grounded_labeling(nodes, edges)),
        Semantics::Complete => {
            let mut l = grounded_labeling(nodes, edges);
            l.semantics = Semantics::Complete;
            Ok(l)
        }
        Semantics::Preferred => {
            let all = complete_labelings(nodes, edges)?;
            let max_in = all
                .iter()
                .map(|l| l.labels.values().filter(|v| **v == Label::In).count())
                .max()
                .unwrap_or(0);
            let mut best: Vec<&Labeling> = all
                .iter()
                .filter(|l| {
                    let ins: BTreeSet<&String> = l
                        .labels
                        .iter()
                        .filter(|(_, v)| **v == Label::In)
                        .map(|(k, _)| k)
                        .collect();
                    // maximal: no other complete labeling strictly extends it
                    !all.iter().any(|other| {
                        let oins: BTreeSet<&String> = other
                            .labels
                            .iter()
                            .filter(|(_, v)| **v == Label::In)
                            .map(|(k, _)| k)
                            .collect();
                        ins.is_subset(&oins) && ins != oins
                    })
                })
                .collect();
            best.sort_by_key(|l| {
                l.labels
                    .iter()
                    .map(|(k, v)| (k.clone(), *v))
                    .collect::<Vec<_>>()
            });
            let chosen = best.first().expect("the grounded labeling always exists");
            let mut l = (*chosen).clone();
            l.semantics = Semantics::Preferred;
            let _ = max_in;
            Ok(l)
        }
    }
}

/// The defeat report: OUT theories, rule applications whose view targets an
/// OUT theory (the precedent is distinguished), and self-attacking theories.
#[derive(Debug, Clone)]
pub struct DefeatReport {
    pub defeated: Vec<String>,
    pub distinguished: Vec<String>,
    pub inconsistent: Vec<String>,
}

pub fn defeated_report(
    graph: &ContextGraph,
    labeling: &Labeling,
    edges: &[AttackEdge],
) -> DefeatReport {
    let defeated = labeling.out_nodes();
    let mut distinguished = Vec::new();
    for record in &graph.pushouts {
        if labeling.label(&record.case) == Label::Out {
            distinguished.push(record.name.clone());
        }
    }
    let mut inconsistent: Vec<String> = edges
        .iter()
        .filter(|e| e.attacker == e.target)
        .map(|e| e.attacker.clone())
        .collect();
    inconsistent.sort();
    inconsistent.dedup();
    DefeatReport {
        defeated,
        distinguished,
        inconsistent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(from: &str, to: &str) -> AttackEdge {
        AttackEdge {
            attacker: from.to_string(),
            target: to.to_string(),
            witness: Term::Type,
            provenance: AttackProvenance::Asserted,
            verified: true,
        }
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn no_edges_all_in() {
        let nodes = names(&["a", "b"]);
        let l = grounded_labeling(&nodes, &[]);
        assert!(nodes.iter().all(|n| l.label(n) == Label::In));
    }

    #[test]
    fn chain_labels_alternate() {
        let nodes = names(&["a", "b", "c"]);
        let edges = vec![edge("a", "b"), edge("b", "c")];
        let l = grounded_labeling(&nodes, &edges);
        assert_eq!(l.label("a"), Label::In);
        assert_eq!(l.label("b"), Label::Out);
        assert_eq!(l.label("c"), Label::In);
        // Against the exhaustive oracle: grounded is the minimal-IN complete.
        let all = complete_labelings(&nodes, &edges).unwrap();
        assert_eq!(all.len(), 1);
        let mut g = l.clone();
        g.semantics = Semantics::Complete;
        assert_eq!(all[0], g);
    }

    #[test]
    fn self_attacker_stays_undec() {
        let nodes = names(&["a"]);
        let edges = vec![edge("a", "a")];
        let l = grounded_labeling(&nodes, &edges);
        assert_eq!(l.label("a"), Label::Undec);
        for c in complete_labelings(&nodes, &edges).unwrap() {
            assert_ne!(c.label("a"), Label::In);
        }
    }

    #[test]
    fn even_cycle_has_three_complete_labelings() {
        let nodes = names(&["a", "b"]);
        let edges = vec![edge("a", "b"), edge("b", "a")];
        let all = complete_labelings(&nodes, &edges).unwrap();
        assert_eq!(all.len(), 3);
        let grounded = grounded_labeling(&nodes, &edges);
        assert_eq!(grounded.label("a"), Label::Undec);
        let preferred = label(&nodes, &edges, Semantics::Preferred).unwrap();
        let ins = preferred
            .labels
            .values()
            .filter(|l| **l == Label::In)
            .count();
        assert_eq!(ins, 1);
    }

    #[test]
    fn enumeration_bound_applies_to_the_contested_part() {
        // 21 self-attackers stay UNDEC under grounded, so all are contested.
        let nodes: Vec<String> = (0..21).map(|i| format!("n{i}")).collect();
        let edges: Vec<AttackEdge> = nodes.iter().map(|n| edge(n, n)).collect();
        let err = complete_labelings(&nodes, &edges).unwrap_err();
        assert!(matches!(err, GraphError::SemanticsTooLarge(21, _)));
        // The same node count with no edges is fully decided and fine.
        let all = complete_labelings(&nodes, &[]).unwrap();
        assert_eq!(all.len(), 1);
    }
}
