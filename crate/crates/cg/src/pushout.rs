//! Pushouts of an include against a view: mechanized rule and precedent
//! application.
//!
//! Given a condition theory `A`, a rule theory `B` that includes it, and a
//! verified view `φ : A → C` total on `A`, the pushout is the minimal theory
//! `P` that includes `C` and contains, for every `B`-local declaration, a
//! copy translated along `φ` (extended with the copies made so far). The
//! construction also yields the induced morphism `φ* : B → P`, which is the
//! other leg of the square.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{
    is_total, translate, ContextGraph, DeclKind, DeclOrigin, Declaration, GraphError, Morphism,
    MorphismKind, MorphismStatus, PushoutRecord, Theory,
};
use crate::kernel::{QName, Term, TypingContext};

/// What a pushout directive asks for.
#[derive(Debug, Clone)]
pub struct PushoutRequest {
    /// Name of the generated theory.
    pub name: String,
    /// B: the rule/consequence theory being applied.
    pub rule: String,
    /// φ: a verified view from B's condition sub-theory into the case theory.
    pub view: String,
    /// Presentation names for generated declarations, replacing the default
    /// `P/d` scheme.
    pub renaming: BTreeMap<String, String>,
}

/// The generated theory and induced morphism, by name, plus provenance.
#[derive(Debug, Clone)]
pub struct PushoutOutcome {
    pub theory: String,
    pub induced: String,
    pub provenance: BTreeMap<QName, QName>,
}

/// Compute a pushout and insert the generated theory and induced morphism
/// into the graph. The generated theory is re-checked declaration by
/// declaration; on any failure the graph is left unchanged.
pub fn compute_pushout(
    graph: &mut ContextGraph,
    request: &PushoutRequest,
) -> Result<PushoutOutcome, GraphError> {
    let view = graph.expect_view(&request.view)?.clone();
    let condition = view.domain.clone();
    let case = view.codomain.clone();
    let rule = graph.expect_theory(&request.rule)?;
    if !rule.checked {
        return Err(GraphError::Unchecked(request.rule.clone()));
    }
    if !graph.expect_theory(&case)?.checked {
        return Err(GraphError::Unchecked(case.clone()));
    }
    // The include leg: B must see A (reflexively; B = A is the degenerate
    // pushout with nothing to copy).
    if !graph.include_closure(&request.rule)?.contains(&condition) {
        return Err(GraphError::EndpointMismatch(
            condition.clone(),
            condition.clone(),
            request.rule.clone(),
            request.rule.clone(),
        ));
    }
    if !matches!(view.status, MorphismStatus::Verified) {
        return Err(GraphError::Unchecked(view.name.clone()));
    }
    let (total, missing) = is_total(graph, &view, &condition)?;
    if !total {
        return Err(GraphError::UnmappedConstant(missing[0].clone()));
    }
    if graph.theory(&request.name).is_some() {
        return Err(GraphError::NameClash(request.name.clone()));
    }

    let rule_meta = graph.expect_theory(&request.rule)?.meta.clone();
    let mut generated = Theory::new(request.name.clone(), rule_meta);
    generated.includes.push(case.clone());
    generated.generated_by = Some(request.name.clone());

    // Names already visible in P's context; copies must not collide.
    let mut taken: BTreeSet<String> = graph
        .flatten(&case)?
        .into_iter()
        .map(|e| e.qname.name)
        .collect();
    let mut closure = graph.include_closure(&case)?;
    closure.insert(request.name.clone());

    let mut assignment = view.assignment.clone();
    let mut provenance = BTreeMap::new();
    let condition_part: BTreeSet<QName> = graph
        .flatten(&condition)?
        .into_iter()
        .map(|e| e.qname)
        .collect();
    let rule_decls: Vec<Declaration> = graph.expect_theory(&request.rule)?.decls.clone();
    for decl in &rule_decls {
        if condition_part.contains(&QName::new(request.rule.clone(), decl.name.clone())) {
            continue;
        }
        let fresh = match request.renaming.get(&decl.name) {
            Some(wanted) => {
                if taken.contains(wanted) {
                    return Err(GraphError::NameClash(wanted.clone()));
                }
                wanted.clone()
            }
            None => {
                let base = format!("{}/{}", request.name, decl.name);
                let mut candidate = base.clone();
                let mut k = 1;
                while taken.contains(&candidate) {
                    candidate = format!("{base}${k}");
                    k += 1;
                }
                candidate
            }
        };
        taken.insert(fresh.clone());
        let original = QName::new(request.rule.clone(), decl.name.clone());
        let copy = QName::new(request.name.clone(), fresh.clone());
        let ty = decl
            .ty
            .as_ref()
            .ok_or_else(|| GraphError::Unchecked(request.rule.clone()))?;
        let ty = crate::graph::morphism::translate_with(graph, &assignment, &closure, ty)?;
        let def = match &decl.def {
            Some(d) => Some(crate::graph::morphism::translate_with(
                graph,
                &assignment,
                &closure,
                d,
            )?),
            None => None,
        };
        generated.push_decl(Declaration {
            name: fresh,
            ty: Some(ty),
            def,
            kind: DeclKind::Plain, // reclassified below, once the theory is in the graph
            origin: DeclOrigin::Generated {
                pushout: request.name.clone(),
                from: original.clone(),
            },
            fixity: decl.fixity,
            span: None,
        });
        assignment.insert(original.clone(), Term::Const(copy.clone()));
        provenance.insert(copy, original);
    }
    generated.checked = false;
    graph.insert_theory(generated)?;

    // Reclassify assumption declarations and re-check the construction.
    let assume = graph.prelude_const("⊦~");
    let names: Vec<String> = graph
        .expect_theory(&request.name)?
        .decls
        .iter()
        .map(|d| d.name.clone())
        .collect();
    for dname in &names {
        let ty = graph
            .declaration(&QName::new(request.name.clone(), dname.clone()))
            .and_then(|d| d.ty.clone());
        let mut kind = DeclKind::Plain;
        if let (Some(ty), Some(assume)) = (&ty, &assume) {
            let ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
            let nf = match ctx.whnf(ty) {
                Ok(t) => t,
                Err(e) => {
                    graph.pop_theory(&request.name);
                    return Err(e.into());
                }
            };
            if let (Term::Const(head), args) = nf.spine() {
                if head == assume && args.len() == 1 {
                    kind = DeclKind::Assumption;
                }
            }
        }
        if let Some(t) = graph.theory_mut(&request.name) {
            if let Some(d) = t.decls.iter_mut().find(|d| &d.name == dname) {
                d.kind = kind;
            }
        }
    }
    let diags = graph.recheck_theory(&request.name);
    if let Some(d) = diags.into_iter().next() {
        graph.pop_theory(&request.name);
        return Err(GraphError::ObligationFailed {
            constant: QName::new(request.name.clone(), d.declaration.unwrap_or_default()),
            reason: d.message,
        });
    }

    let induced = Morphism {
        name: format!("{}/induced", request.name),
        kind: MorphismKind::View,
        domain: request.rule.clone(),
        codomain: request.name.clone(),
        assignment,
        status: MorphismStatus::Verified,
    };
    let induced_name = induced.name.clone();
    graph.insert_view(induced)?;
    graph.pushouts.push(PushoutRecord {
        name: request.name.clone(),
        condition,
        rule: request.rule.clone(),
        view: request.view.clone(),
        case,
        induced: induced_name.clone(),
        provenance: provenance.clone(),
    });
    Ok(PushoutOutcome {
        theory: request.name.clone(),
        induced: induced_name,
        provenance,
    })
}

/// Rule application: apply `consequence` (which includes `condition`) along a
/// verified, total view from `condition` into the case theory. Sugar over
/// `compute_pushout` with the endpoints spelled out.
pub fn apply_rule(
    graph: &mut ContextGraph,
    condition: &str,
    consequence: &str,
    view: &str,
    name: &str,
) -> Result<PushoutOutcome, GraphError> {
    let v = graph.expect_view(view)?;
    if v.domain != condition {
        return Err(GraphError::EndpointMismatch(
            view.to_string(),
            v.domain.clone(),
            condition.to_string(),
            condition.to_string(),
        ));
    }
    compute_pushout(
        graph,
        &PushoutRequest {
            name: name.to_string(),
            rule: consequence.to_string(),
            view: view.to_string(),
            renaming: BTreeMap::new(),
        },
    )
}

/// Check the universal property against a candidate cocone: `psi : B → D`
/// agreeing with `φ` on `A`, and `c_leg : C → D`. Returns the unique
/// mediating morphism `m : P → D` with `m ∘ φ* = psi` and `m ∘ (C ↪ P) =
/// c_leg`; it is forced constant by constant.
pub fn verify_universal_property(
    graph: &ContextGraph,
    pushout: &str,
    psi: &Morphism,
    c_leg: &Morphism,
) -> Result<Morphism, GraphError> {
    let record = graph
        .pushout(pushout)
        .ok_or_else(|| GraphError::UnknownTheory(pushout.to_string()))?;
    let phi = graph.expect_view(&record.view)?;
    if psi.domain != record.rule {
        return Err(GraphError::NoMediator(format!(
            "candidate leg starts at `{}`, expected `{}`",
            psi.domain, record.rule
        )));
    }
    if c_leg.domain != record.case || c_leg.codomain != psi.codomain {
        return Err(GraphError::NoMediator(
            "cocone legs do not share endpoints".into(),
        ));
    }
    let target = &psi.codomain;
    let ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
    let shared_d = graph.include_closure(target)?;

    // The cocone must commute on A.
    for entry in graph.flatten(&record.condition)? {
        let q = entry.qname;
        if shared_d.contains(&q.theory) {
            continue;
        }
        if graph.declaration(&q).and_then(|d| d.def.as_ref()).is_some() {
            continue;
        }
        let through_c = translate(
            graph,
            c_leg,
            &translate(graph, phi, &Term::Const(q.clone()))?,
        )?;
        let through_b = translate(graph, psi, &Term::Const(q.clone()))?;
        if !ctx.equal(&through_c, &through_b)? {
            return Err(GraphError::NoMediator(format!(
                "legs disagree on `{q}`: `{through_c}` vs `{through_b}`"
            )));
        }
    }

    // m is forced: C-part through c_leg, copies through psi.
    let mut assignment = c_leg.assignment.clone();
    for (copy, original) in &record.provenance {
        let decl = graph
            .declaration(copy)
            .expect("generated declaration exists");
        if decl.def.is_some() {
            continue;
        }
        let image = translate(graph, psi, &Term::Const(original.clone()))?;
        assignment.insert(copy.clone(), image);
    }
    let mediator = Morphism {
        name: format!("{pushout}->{target}"),
        kind: MorphismKind::View,
        domain: record.name.clone(),
        codomain: target.clone(),
        assignment,
        status: MorphismStatus::Unchecked,
    };
    let report = crate::graph::check_view(graph, &mediator)?;
    if !report.is_total() {
        return Err(GraphError::NoMediator(format!(
            "mediator misses {} constants",
            report.unmapped.len()
        )));
    }
    let mut mediator = mediator;
    mediator.status = MorphismStatus::Verified;
    Ok(mediator)
}
