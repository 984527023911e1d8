//! Morphism application: translation, verification, composition, totality.

use std::collections::BTreeSet;

use crate::graph::{ContextGraph, GraphError, Morphism, MorphismKind, MorphismStatus};
use crate::kernel::{QName, Term, TypingContext};

/// Apply a morphism to a term: homomorphic replacement of constants.
///
/// A constant is translated by, in order: its explicit assignment; identity,
/// when its theory is visible in the codomain (shared background and meta
/// content); its definiens, translated recursively, when it is defined.
/// Anything else is an unmapped constant — the totality failure signal.
pub fn translate(graph: &ContextGraph, m: &Morphism, t: &Term) -> Result<Term, GraphError> {
    let shared = graph.include_closure(&m.codomain)?;
    translate_with(graph, &m.assignment, &shared, t)
}

pub(crate) fn translate_with(
    graph: &ContextGraph,
    assignment: &std::collections::BTreeMap<QName, Term>,
    codomain_closure: &BTreeSet<String>,
    t: &Term,
) -> Result<Term, GraphError> {
    Ok(match t {
        Term::Const(q) => {
            if let Some(image) = assignment.get(q) {
                // Assignment targets are closed codomain terms; no shifting
                // is needed as they cross binders.
                image.clone()
            } else if codomain_closure.contains(&q.theory) {
                t.clone()
            } else if let Some(def) = graph.declaration(q).and_then(|d| d.def.as_ref()) {
                translate_with(graph, assignment, codomain_closure, def)?
            } else {
                return Err(GraphError::UnmappedConstant(q.clone()));
            }
        }
        Term::Var(_) | Term::Type | Term::Meta(_) => t.clone(),
        Term::App(f, a) => Term::app(
            translate_with(graph, assignment, codomain_closure, f)?,
            translate_with(graph, assignment, codomain_closure, a)?,
        ),
        Term::Lambda { name, ann, body } => Term::Lambda {
            name: name.clone(),
            ann: match ann {
                Some(a) => Some(Box::new(translate_with(
                    graph,
                    assignment,
                    codomain_closure,
                    a,
                )?)),
                None => None,
            },
            body: Box::new(translate_with(graph, assignment, codomain_closure, body)?),
        },
        Term::Pi {
            name,
            domain,
            codomain,
            implicit,
        } => Term::Pi {
            name: name.clone(),
            domain: Box::new(translate_with(graph, assignment, codomain_closure, domain)?),
            codomain: Box::new(translate_with(
                graph,
                assignment,
                codomain_closure,
                codomain,
            )?),
            implicit: *implicit,
        },
    })
}

/// The result of verifying a view: which obligations were discharged (each
/// undefined domain constant with its translated type) and which constants
/// remain unmapped.
#[derive(Debug, Clone)]
pub struct ViewReport {
    pub discharged: Vec<(QName, Term)>,
    pub unmapped: Vec<QName>,
    pub consistent_definitions: usize,
}

impl ViewReport {
    pub fn is_total(&self) -> bool {
        self.unmapped.is_empty()
    }
}

/// Verify a morphism against its domain: every undefined, non-shared domain
/// constant `c : T` must be assigned a codomain term of type `translate(T)`.
/// Axioms (constants of judgment type) thus demand proof terms. Defined
/// constants need no assignment; when they have one anyway it must agree
/// with the translated definiens.
pub fn check_view(graph: &ContextGraph, m: &Morphism) -> Result<ViewReport, GraphError> {
    let shared = graph.include_closure(&m.codomain)?;
    let mut discharged = Vec::new();
    let mut unmapped = Vec::new();
    let mut consistent = 0usize;
    for entry in graph.flatten(&m.domain)? {
        let q = entry.qname;
        if shared.contains(&q.theory) {
            continue;
        }
        let decl = graph
            .declaration(&q)
            .ok_or_else(|| GraphError::UnknownTheory(q.theory.clone()))?;
        let ty = decl
            .ty
            .clone()
            .ok_or_else(|| GraphError::Unchecked(q.theory.clone()))?;
        match (m.assignment.get(&q), &decl.def) {
            (Some(image), maybe_def) => {
                let expected = translate(graph, m, &ty)?;
                let mut ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
                ctx.check(image, &expected)
                    .map_err(|e| GraphError::ObligationFailed {
                        constant: q.clone(),
                        reason: e.to_string(),
                    })?;
                if let Some(def) = maybe_def {
                    let translated = translate(graph, m, def)?;
                    if !ctx.equal(image, &translated)? {
                        return Err(GraphError::ObligationFailed {
                            constant: q.clone(),
                            reason: "assignment disagrees with the translated definiens".into(),
                        });
                    }
                    consistent += 1;
                }
                discharged.push((q, expected));
            }
            (None, Some(_)) => {}
            (None, None) => unmapped.push(q),
        }
    }
    Ok(ViewReport {
        discharged,
        unmapped,
        consistent_definitions: consistent,
    })
}

/// Compose two morphisms. The assignment maps every undefined, non-shared
/// constant of the first domain through both morphisms; verification is
/// preserved by construction (and re-checked in tests).
pub fn compose(
    graph: &ContextGraph,
    first: &Morphism,
    second: &Morphism,
) -> Result<Morphism, GraphError> {
    if first.codomain != second.domain {
        return Err(GraphError::EndpointMismatch(
            first.name.clone(),
            first.codomain.clone(),
            second.name.clone(),
            second.domain.clone(),
        ));
    }
    let shared = graph.include_closure(&second.codomain)?;
    let mut assignment = std::collections::BTreeMap::new();
    for entry in graph.flatten(&first.domain)? {
        let q = entry.qname;
        if shared.contains(&q.theory) {
            continue;
        }
        let decl = graph
            .declaration(&q)
            .ok_or_else(|| GraphError::UnknownTheory(q.theory.clone()))?;
        if decl.def.is_some() && !first.assignment.contains_key(&q) {
            continue;
        }
        let once = translate(graph, first, &Term::Const(q.clone()))?;
        let twice = translate(graph, second, &once)?;
        assignment.insert(q, twice);
    }
    let status = match (&first.status, &second.status) {
        (MorphismStatus::Verified, MorphismStatus::Verified) => MorphismStatus::Verified,
        _ => MorphismStatus::Unchecked,
    };
    Ok(Morphism {
        name: format!("{};{}", first.name, second.name),
        kind: MorphismKind::View,
        domain: first.domain.clone(),
        codomain: second.codomain.clone(),
        assignment,
        status,
    })
}

/// Is the view total on the given sub-theory: every undefined, non-shared
/// constant of its flattening mapped? Returns the missing constants.
pub fn is_total(
    graph: &ContextGraph,
    m: &Morphism,
    subtheory: &str,
) -> Result<(bool, Vec<QName>), GraphError> {
    let shared = graph.include_closure(&m.codomain)?;
    let mut missing = Vec::new();
    for entry in graph.flatten(subtheory)? {
        let q = entry.qname;
        if shared.contains(&q.theory) {
            continue;
        }
        let decl = graph
            .declaration(&q)
            .ok_or_else(|| GraphError::UnknownTheory(q.theory.clone()))?;
        if decl.def.is_some() {
            continue;
        }
        if !m.assignment.contains_key(&q) {
            missing.push(q);
        }
    }
    Ok((missing.is_empty(), missing))
}
