//! Rendering kernel terms and checked theories back to surface syntax.
//!
//! Implicit arguments are elided (the elaborator re-solves them), binder
//! hints are freshened against constants occurring under them, and constants
//! print as base names, which must resolve back to the same declaration in
//! the target scope.

use crate::graph::{ContextGraph, DeclOrigin, Declaration, GraphError, Morphism, Theory};
use crate::kernel::{try_shift_down, QName, Signature, Term, TypingContext};
use crate::span::Span;
use crate::syntax::{
    print_expr, AssignEntry, DeclItem, Expr, IncludeEntry, TheoryEntry, TheoryItem, ViewItem,
};

/// Convert a kernel term to surface syntax, valid in the given theory scope.
pub fn term_to_expr(graph: &ContextGraph, scope: &str, term: &Term) -> Result<Expr, GraphError> {
    let visible = graph.visible_names(scope)?;
    let mut binders = Vec::new();
    convert(graph, &visible, &mut binders, term)
}

/// Render a kernel term as text in the given theory scope.
pub fn print_term(graph: &ContextGraph, scope: &str, term: &Term) -> Result<String, GraphError> {
    let expr = term_to_expr(graph, scope, term)?;
    Ok(print_expr(&expr, &graph.fixities()))
}

fn convert(
    graph: &ContextGraph,
    visible: &std::collections::BTreeMap<String, QName>,
    binders: &mut Vec<String>,
    term: &Term,
) -> Result<Expr, GraphError> {
    let sp = Span::default();
    Ok(match term {
        Term::Type => Expr::TypeSort(sp),
        Term::Meta(_) => Expr::Hole(sp),
        Term::Var(i) => {
            let pos = binders
                .len()
                .checked_sub(i + 1)
                .ok_or_else(|| GraphError::Shadowed(QName::new("<local>", i.to_string())))?;
            Expr::Name(binders[pos].clone(), sp)
        }
        Term::Const(q) => {
            if binders.iter().any(|b| b == &q.name) || visible.get(&q.name) != Some(q) {
                return Err(GraphError::Shadowed(q.clone()));
            }
            Expr::Name(q.name.clone(), sp)
        }
        Term::App(_, _) => {
            let (head, mut args) = term.spine();
            if let Term::Const(q) = head {
                let implicits = leading_implicits(graph, q)?;
                if implicits > 0 && args.len() >= implicits {
                    args.drain(..implicits);
                }
            }
            let mut expr = convert(graph, visible, binders, head)?;
            for a in args {
                expr = Expr::app(expr, convert(graph, visible, binders, a)?);
            }
            expr
        }
        Term::Lambda { name, ann, body } => {
            let fresh = fresh_binder(name, body, binders);
            let ann_expr = match ann {
                Some(a) => Some(Box::new(convert(graph, visible, binders, a)?)),
                None => None,
            };
            binders.push(fresh.clone());
            let body_expr = convert(graph, visible, binders, body);
            binders.pop();
            Expr::Lambda {
                name: fresh,
                ann: ann_expr,
                body: Box::new(body_expr?),
                span: sp,
            }
        }
        Term::Pi {
            name,
            domain,
            codomain,
            implicit,
        } => {
            let dom_expr = convert(graph, visible, binders, domain)?;
            if !*implicit {
                if let Some(lowered) = try_shift_down(codomain, 1, 0) {
                    let cod_expr = convert(graph, visible, binders, &lowered)?;
                    return Ok(Expr::Arrow(Box::new(dom_expr), Box::new(cod_expr)));
                }
            }
            let fresh = fresh_binder(name, codomain, binders);
            binders.push(fresh.clone());
            let cod_expr = convert(graph, visible, binders, codomain);
            binders.pop();
            Expr::Pi {
                name: fresh,
                domain: Box::new(dom_expr),
                body: Box::new(cod_expr?),
                span: sp,
            }
        }
    })
}

/// Pick a binder name that captures neither a constant used in the body nor
/// an enclosing binder: the hint, primed until free.
fn fresh_binder(hint: &str, body: &Term, binders: &[String]) -> String {
    let hint = if hint.is_empty() { "x" } else { hint };
    let mut used: Vec<QName> = Vec::new();
    body.constants(&mut used);
    let clashes = |candidate: &str| {
        binders.iter().any(|b| b == candidate) || used.iter().any(|q| q.name == candidate)
    };
    let mut candidate = hint.to_string();
    while clashes(&candidate) {
        candidate.push('\'');
    }
    candidate
}

/// Number of leading implicit Pi binders in a constant's type.
fn leading_implicits(graph: &ContextGraph, q: &QName) -> Result<usize, GraphError> {
    let Some(ty) = graph.const_type(q) else {
        return Ok(0);
    };
    let ctx = TypingContext::with_unfold_bound(graph, graph.unfold_bound);
    let mut count = 0;
    let mut ty = ctx.whnf(&ty)?;
    while let Term::Pi {
        codomain,
        implicit: true,
        ..
    } = ty
    {
        count += 1;
        ty = ctx.whnf(&codomain)?;
    }
    Ok(count)
}

/// Render one stored declaration as a surface item (type always shown).
pub fn print_declaration(
    graph: &ContextGraph,
    scope: &str,
    decl: &Declaration,
) -> Result<String, GraphError> {
    let item = decl_to_item(graph, scope, decl)?;
    let mut out = String::new();
    if let Some(fx) = item.fixity {
        out.push_str(&format!("{fx} "));
    }
    out.push_str(&item.name);
    let env = graph.fixities();
    if let Some(ty) = &item.ty {
        out.push_str(&format!(" : {}", print_expr(ty, &env)));
    }
    if let Some(def) = &item.def {
        out.push_str(&format!(" = {}", print_expr(def, &env)));
    }
    Ok(out)
}

fn decl_to_item(
    graph: &ContextGraph,
    scope: &str,
    decl: &Declaration,
) -> Result<DeclItem, GraphError> {
    Ok(DeclItem {
        name: decl.name.clone(),
        fixity: decl.fixity,
        ty: match &decl.ty {
            Some(t) => Some(term_to_expr(graph, scope, t)?),
            None => None,
        },
        def: match &decl.def {
            Some(t) => Some(term_to_expr(graph, scope, t)?),
            None => None,
        },
        span: Span::default(),
    })
}

/// Materialize a checked theory as a surface item (used when dumping
/// elaborated graphs). The meta-theory is spelled out only when it differs
/// from the graph's prelude default.
pub fn theory_to_item(graph: &ContextGraph, theory: &Theory) -> Result<TheoryItem, GraphError> {
    let mut entries: Vec<TheoryEntry> = theory
        .includes
        .iter()
        .map(|i| {
            TheoryEntry::Include(IncludeEntry {
                name: i.clone(),
                span: Span::default(),
            })
        })
        .collect();
    for d in &theory.decls {
        entries.push(TheoryEntry::Decl(decl_to_item(graph, &theory.name, d)?));
    }
    let default_meta = graph.prelude.clone().filter(|p| p != &theory.name);
    let meta = if theory.meta == default_meta {
        None
    } else {
        theory.meta.clone()
    };
    Ok(TheoryItem {
        name: theory.name.clone(),
        meta,
        entries,
        span: Span::default(),
    })
}

/// Materialize a view as a surface item; assignments print in the codomain
/// scope and in the domain's dependency order.
pub fn view_to_item(graph: &ContextGraph, view: &Morphism) -> Result<ViewItem, GraphError> {
    let mut assignments = Vec::new();
    for entry in graph.flatten(&view.domain)? {
        if let Some(value) = view.assignment.get(&entry.qname) {
            assignments.push(AssignEntry {
                constant: entry.qname.name.clone(),
                value: term_to_expr(graph, &view.codomain, value)?,
                span: Span::default(),
            });
        }
    }
    Ok(ViewItem {
        name: view.name.clone(),
        domain: view.domain.clone(),
        codomain: view.codomain.clone(),
        assignments,
        span: Span::default(),
    })
}

/// True for declarations copied in by a pushout.
pub fn is_generated(decl: &Declaration) -> bool {
    matches!(decl.origin, DeclOrigin::Generated { .. })
}
