//! Heuristic view finding between theories and the operational checks for
//! analogical rule application: is there a (partial) view, does it cover the
//! rule's conditions, and does anything in the surrounding graph defeat it.
//!
//! The search fragment is deliberately small: undefined domain constants map
//! to visible codomain constants with translation-compatible types. Axioms
//! (judgment-typed constants) therefore match declared proof terms only; the
//! finder never synthesizes proofs.

use std::collections::{BTreeMap, BTreeSet};

use crate::argue::{contrary, Label, Labeling};
use crate::graph::{
    morphism::translate_with, AttackEdge, ContextGraph, DeclKind, GraphError, Morphism,
    MorphismKind, MorphismStatus,
};
use crate::kernel::{alpha_eq, QName, Term, TypingContext};

pub const DEFAULT_SEARCH_BUDGET: u64 = 100_000;

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub max_results: usize,
    pub allow_partial: bool,
    pub budget: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_results: usize::MAX,
            allow_partial: false,
            budget: DEFAULT_SEARCH_BUDGET,
        }
    }
}

/// One found view: a constant-to-constant assignment with its coverage score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewCandidate {
    pub assignment: BTreeMap<QName, QName>,
    pub mapped: usize,
    /// Number of undefined, non-shared domain constants.
    pub total: usize,
    /// Domain axioms discharged by declared proof terms.
    pub obligations: Vec<(QName, QName)>,
}

impl ViewCandidate {
    pub fn score(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.mapped as f64 / self.total as f64
        }
    }

    pub fn is_total(&self) -> bool {
        self.mapped == self.total
    }

    /// Materialize as a morphism (for verification or pushout use).
    pub fn to_morphism(&self, name: &str, domain: &str, codomain: &str) -> Morphism {
        let assignment = self
            .assignment
            .iter()
            .map(|(k, v)| (k.clone(), Term::Const(v.clone())))
            .collect();
        Morphism {
            name: name.to_string(),
            kind: MorphismKind::View,
            domain: domain.to_string(),
            codomain: codomain.to_string(),
            assignment,
            status: if self.is_total() {
                MorphismStatus::Verified
            } else {
                MorphismStatus::Partial {
                    unmapped: Vec::new(), // filled by check_view when needed
                }
            },
        }
    }
}

struct Search<'g> {
    graph: &'g ContextGraph,
    closure: BTreeSet<String>,
    units: Vec<(QName, Term)>,
    targets: Vec<(QName, Term)>,
    judge: Option<QName>,
    allow_partial: bool,
    budget: u64,
    found: Vec<BTreeMap<QName, Term>>,
}

impl Search<'_> {
    fn run(&mut self) -> Result<(), GraphError> {
        let mut partial = BTreeMap::new();
        self.step(0, &mut partial)
    }

    fn step(&mut self, i: usize, partial: &mut BTreeMap<QName, Term>) -> Result<(), GraphError> {
        if self.budget == 0 {
            return Err(GraphError::SearchBudgetExceeded(0));
        }
        self.budget -= 1;
        if i == self.units.len() {
            self.found.push(partial.clone());
            return Ok(());
        }
        let (q, ty) = self.units[i].clone();
        let ctx = TypingContext::with_unfold_bound(self.graph, self.graph.unfold_bound);
        // The translated expected type may mention earlier, skipped units;
        // then this constant cannot be mapped either.
        if let Ok(expected) = translate_with(self.graph, partial, &self.closure, &ty) {
            let expected = ctx.normalize(&expected)?;
            for (tq, tty) in self.targets.clone() {
                if alpha_eq(&tty, &expected) {
                    partial.insert(q.clone(), Term::Const(tq));
                    self.step(i + 1, partial)?;
                    partial.remove(&q);
                }
            }
        }
        if self.allow_partial {
            self.step(i + 1, partial)?;
        }
        Ok(())
    }
}

/// Search for views from `domain` to `codomain`. Results are complete for
/// the constants-to-constants fragment, deduplicated, restricted to maximal
/// assignments, and ranked by score then lexicographic assignment.
pub fn find_views(
    graph: &ContextGraph,
    domain: &str,
    codomain: &str,
    options: SearchOptions,
) -> Result<Vec<ViewCandidate>, GraphError> {
    for t in [domain, codomain] {
        if !graph.expect_theory(t)?.checked {
            return Err(GraphError::Unchecked(t.to_string()));
        }
    }
    let closure = graph.include_closure(codomain)?;
    let ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
    let mut units = Vec::new();
    for entry in graph.flatten(domain)? {
        let q = entry.qname;
        if closure.contains(&q.theory) {
            continue;
        }
        let decl = graph.declaration(&q).expect("flattened declaration exists");
        if decl.def.is_some() {
            continue;
        }
        units.push((q, decl.ty.clone().expect("checked declaration has a type")));
    }
    let mut targets = Vec::new();
    for entry in graph.flatten(codomain)? {
        let decl = graph
            .declaration(&entry.qname)
            .expect("flattened declaration exists");
        let ty = decl.ty.clone().expect("checked declaration has a type");
        targets.push((entry.qname, ctx.normalize(&ty)?));
    }

    let total = units.len();
    let mut search = Search {
        graph,
        closure,
        units,
        targets,
        judge: graph.prelude_const("⊢"),
        allow_partial: options.allow_partial,
        budget: options.budget,
        found: Vec::new(),
    };
    let budget = options.budget;
    search.run().map_err(|e| match e {
        GraphError::SearchBudgetExceeded(_) => GraphError::SearchBudgetExceeded(budget),
        other => other,
    })?;

    // Deduplicate and keep only maximal assignments.
    let mut unique: Vec<BTreeMap<QName, Term>> = Vec::new();
    for a in search.found {
        if !unique.contains(&a) {
            unique.push(a);
        }
    }
    let maximal: Vec<&BTreeMap<QName, Term>> = unique
        .iter()
        .filter(|a| {
            !unique
                .iter()
                .any(|b| b.len() > a.len() && a.iter().all(|(k, v)| b.get(k) == Some(v)))
        })
        .collect();

    let judge = search.judge.clone();
    let mut candidates: Vec<ViewCandidate> = maximal
        .into_iter()
        .map(|a| {
            let assignment: BTreeMap<QName, QName> = a
                .iter()
                .map(|(k, v)| match v {
                    Term::Const(c) => (k.clone(), c.clone()),
                    _ => unreachable!("search assigns constants only"),
                })
                .collect();
            let obligations = assignment
                .iter()
                .filter(|(k, _)| {
                    let Some(j) = &judge else { return false };
                    let Some(ty) = graph.declaration(k).and_then(|d| d.ty.clone()) else {
                        return false;
                    };
                    let Ok(nf) = ctx.whnf(&ty) else { return false };
                    matches!(nf.spine(), (Term::Const(h), args) if h == j && args.len() == 1)
                })
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            ViewCandidate {
                mapped: assignment.len(),
                total,
                assignment,
                obligations,
            }
        })
        .collect();

    candidates.sort_by(|a, b| {
        b.score()
            .partial_cmp(&a.score())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| assignment_key(a).cmp(&assignment_key(b)))
    });
    candidates.truncate(options.max_results);
    Ok(candidates)
}

fn assignment_key(c: &ViewCandidate) -> Vec<(String, String)> {
    c.assignment
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// A1 — is the present case legally similar to the precedent: does any
/// partial view from the present case into the precedent's formalization
/// map something?
#[derive(Debug, Clone)]
pub struct A1Verdict {
    pub holds: bool,
    pub best: Option<ViewCandidate>,
}

pub fn check_a1(
    graph: &ContextGraph,
    precedent: &str,
    present: &str,
) -> Result<A1Verdict, GraphError> {
    match find_views(
        graph,
        present,
        precedent,
        SearchOptions {
            allow_partial: true,
            ..Default::default()
        },
    ) {
        Ok(candidates) => {
            let best = candidates.into_iter().find(|c| c.score() > 0.0);
            Ok(A1Verdict {
                holds: best.is_some(),
                best,
            })
        }
        // The similarity question only needs a witness; when exhaustive
        // search is too large, one greedy pass still produces a sound
        // (if not necessarily best) candidate.
        Err(GraphError::SearchBudgetExceeded(_)) => {
            let best = greedy_candidate(graph, present, precedent)?.filter(|c| c.score() > 0.0);
            Ok(A1Verdict {
                holds: best.is_some(),
                best,
            })
        }
        Err(other) => Err(other),
    }
}

/// One left-to-right pass assigning each undefined domain constant its first
/// type-compatible target, skipping constants with none. Every entry is
/// individually type-correct, so the result is a valid partial view.
fn greedy_candidate(
    graph: &ContextGraph,
    domain: &str,
    codomain: &str,
) -> Result<Option<ViewCandidate>, GraphError> {
    let closure = graph.include_closure(codomain)?;
    let ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
    let mut targets = Vec::new();
    for entry in graph.flatten(codomain)? {
        let decl = graph
            .declaration(&entry.qname)
            .expect("flattened declaration exists");
        let ty = decl.ty.clone().expect("checked declaration has a type");
        targets.push((entry.qname, ctx.normalize(&ty)?));
    }
    let mut assignment: BTreeMap<QName, Term> = BTreeMap::new();
    let mut total = 0usize;
    for entry in graph.flatten(domain)? {
        let q = entry.qname;
        if closure.contains(&q.theory) {
            continue;
        }
        let decl = graph.declaration(&q).expect("flattened declaration exists");
        if decl.def.is_some() {
            continue;
        }
        total += 1;
        let ty = decl.ty.clone().expect("checked declaration has a type");
        let Ok(expected) = translate_with(graph, &assignment, &closure, &ty) else {
            continue;
        };
        let expected = ctx.normalize(&expected)?;
        if let Some((tq, _)) = targets.iter().find(|(_, tty)| alpha_eq(tty, &expected)) {
            assignment.insert(q, Term::Const(tq.clone()));
        }
    }
    let mapped = assignment.len();
    let assignment: BTreeMap<QName, QName> = assignment
        .into_iter()
        .map(|(k, v)| match v {
            Term::Const(c) => (k, c),
            _ => unreachable!("greedy assigns constants only"),
        })
        .collect();
    Ok(Some(ViewCandidate {
        assignment,
        mapped,
        total,
        obligations: Vec::new(),
    }))
}

/// A2 — does the view cover every condition of the rule being applied.
#[derive(Debug, Clone)]
pub struct A2Verdict {
    pub holds: bool,
    pub missing: Vec<QName>,
}

pub fn check_a2(
    graph: &ContextGraph,
    view: &Morphism,
    condition: &str,
) -> Result<A2Verdict, GraphError> {
    let (holds, missing) = crate::graph::is_total(graph, view, condition)?;
    Ok(A2Verdict { holds, missing })
}

/// A3 — is the application undefeated: nothing in its ancestry is labeled
/// OUT, and no assumption its proof terms rely on has a verified attacker
/// labeled IN.
#[derive(Debug, Clone)]
pub struct A3Verdict {
    pub holds: bool,
    pub out_ancestors: Vec<String>,
    pub attacked_assumptions: Vec<QName>,
}

pub fn check_a3(
    graph: &ContextGraph,
    application: &str,
    labeling: &Labeling,
    edges: &[AttackEdge],
) -> Result<A3Verdict, GraphError> {
    let record = graph
        .pushout(application)
        .ok_or_else(|| GraphError::UnknownTheory(application.to_string()))?;
    let mut ancestry = graph.include_closure(&record.name)?;
    ancestry.extend(graph.include_closure(&record.rule)?);
    let out_ancestors: Vec<String> = ancestry
        .iter()
        .filter(|t| labeling.label(t) == Label::Out)
        .cloned()
        .collect();

    // Assumptions the generated proof terms depend on, transitively through
    // definientia.
    let theory = graph.expect_theory(&record.name)?;
    let mut stack: Vec<QName> = Vec::new();
    for d in &theory.decls {
        if let Some(def) = &d.def {
            def.constants(&mut stack);
        }
    }
    let mut visited: BTreeSet<QName> = BTreeSet::new();
    let mut used_assumptions: Vec<QName> = Vec::new();
    while let Some(q) = stack.pop() {
        if !visited.insert(q.clone()) {
            continue;
        }
        let Some(decl) = graph.declaration(&q) else {
            continue;
        };
        if decl.kind == DeclKind::Assumption {
            used_assumptions.push(q.clone());
        }
        if let Some(def) = &decl.def {
            def.constants(&mut stack);
        }
    }
    used_assumptions.sort();

    let ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
    let mut attacked = Vec::new();
    for q in &used_assumptions {
        let decl = graph.declaration(q).expect("assumption exists");
        let ty = decl.ty.as_ref().expect("checked declaration has a type");
        let prop = match ctx.normalize(ty)?.spine() {
            (Term::Const(_), args) if args.len() == 1 => args[0].clone(),
            _ => continue,
        };
        let w = ctx.normalize(&contrary(graph, &prop)?)?;
        for e in edges {
            if !e.verified || labeling.label(&e.attacker) != Label::In {
                continue;
            }
            if !alpha_eq(&e.witness, &w) {
                continue;
            }
            let target_holds_it = graph
                .flatten(&e.target)?
                .iter()
                .any(|entry| &entry.qname == q);
            if target_holds_it {
                attacked.push(q.clone());
                break;
            }
        }
    }

    Ok(A3Verdict {
        holds: out_ancestors.is_empty() && attacked.is_empty(),
        out_ancestors,
        attacked_assumptions: attacked,
    })
}

/// The combined report for one rule application. A4 (legally relevant
/// differences, value-based reasoning) is reported as unsupported.
#[derive(Debug, Clone)]
pub struct AnalogyReport {
    pub application: String,
    pub a1: A1Verdict,
    pub a2: A2Verdict,
    pub a3: A3Verdict,
    pub a4: &'static str,
}

pub const A4_NOTE: &str = "unsupported (future work)";

pub fn analogy_report(
    graph: &ContextGraph,
    application: &str,
    labeling: &Labeling,
    edges: &[AttackEdge],
) -> Result<AnalogyReport, GraphError> {
    let record = graph
        .pushout(application)
        .ok_or_else(|| GraphError::UnknownTheory(application.to_string()))?
        .clone();
    let view = graph.expect_view(&record.view)?.clone();
    let mut a1 = check_a1(graph, &record.condition, &record.case)?;
    let a2 = check_a2(graph, &view, &record.condition)?;
    // A total application view is itself evidence of similarity.
    if a2.holds && !a1.holds {
        a1.holds = true;
    }
    let a3 = check_a3(graph, application, labeling, edges)?;
    Ok(AnalogyReport {
        application: application.to_string(),
        a1,
        a2,
        a3,
        a4: A4_NOTE,
    })
}
