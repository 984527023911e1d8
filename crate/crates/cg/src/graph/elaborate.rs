//! Name resolution and elaboration of surface syntax into kernel terms,
//! plus theory and view construction with checking.

use std::collections::BTreeMap;

use crate::graph::{
    morphism, ContextGraph, DeclKind, DeclOrigin, Declaration, GraphError, Morphism, MorphismKind,
    MorphismStatus, StagedTheory, Theory,
};
use crate::kernel::{solve_implicits, QName, Signature, Term, TypingContext};
use crate::span::Span;
use crate::syntax::{Expr, TheoryEntry, TheoryItem, ViewItem};

/// A check-time problem, attributed to a theory and declaration.
#[derive(Debug, Clone)]
pub struct Diagnostic {
    pub theory: Option<String>,
    pub declaration: Option<String>,
    pub span: Option<Span>,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if let Some(t) = &self.theory {
            write!(f, "{t}")?;
            if let Some(d) = &self.declaration {
                write!(f, ".{d}")?;
            }
            write!(f, ": ")?;
        }
        if let Some(s) = &self.span {
            write!(f, "{s}: ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl Diagnostic {
    fn new(theory: &str, decl: Option<&str>, span: Option<Span>, message: String) -> Self {
        Diagnostic {
            theory: Some(theory.to_string()),
            declaration: decl.map(|s| s.to_string()),
            span,
            message,
        }
    }
}

/// Placeholder type for binders whose annotation is unknown during
/// elaboration; inference through such a binder fails cleanly.
const UNKNOWN_LOCAL: Term = Term::Meta(u32::MAX);

/// Elaborates surface expressions in the scope of one theory.
pub struct Elaborator<'s> {
    sig: &'s dyn Signature,
    resolve: BTreeMap<String, QName>,
    locals: Vec<(String, Term)>,
    unfold_bound: u64,
    next_hole: u32,
}

impl<'s> Elaborator<'s> {
    /// Scope of an existing, checked theory.
    pub fn for_theory(graph: &'s ContextGraph, theory: &str) -> Result<Self, GraphError> {
        Ok(Elaborator {
            sig: graph,
            resolve: graph.visible_names(theory)?,
            locals: Vec::new(),
            unfold_bound: graph.unfold_bound,
            next_hole: 0,
        })
    }

    /// Scope of a theory under construction: its imports' flattenings plus
    /// the declarations staged so far.
    pub fn for_staged(staged: &'s StagedTheory<'s>) -> Result<Self, GraphError> {
        let mut resolve = BTreeMap::new();
        for dep in staged.theory.imports() {
            for entry in staged.graph.flatten(dep)? {
                resolve.insert(entry.qname.name.clone(), entry.qname);
            }
        }
        for d in &staged.theory.decls {
            resolve.insert(
                d.name.clone(),
                QName::new(staged.theory.name.clone(), d.name.clone()),
            );
        }
        Ok(Elaborator {
            sig: staged,
            resolve,
            locals: Vec::new(),
            unfold_bound: staged.graph.unfold_bound,
            next_hole: 0,
        })
    }

    pub fn typing_context(&self) -> TypingContext<'_> {
        let mut ctx = TypingContext::with_unfold_bound(self.sig, self.unfold_bound);
        for (name, ty) in &self.locals {
            ctx.push_local(name.clone(), ty.clone());
        }
        ctx
    }

    /// Elaborate an expression, resolving names and filling implicit
    /// arguments. `expected` guides lambda binders and implicit solving; the
    /// caller still re-checks the result.
    pub fn elaborate(&mut self, expr: &Expr, expected: Option<&Term>) -> Result<Term, GraphError> {
        match expr {
            Expr::TypeSort(_) => Ok(Term::Type),
            Expr::Hole(_) => {
                let h = self.next_hole;
                self.next_hole += 1;
                Ok(Term::Meta(h))
            }
            Expr::Name(_, _) | Expr::App(_, _) => self.spine(expr, expected),
            Expr::Arrow(dom, cod) => {
                let d = self.elaborate(dom, None)?;
                let c = self.elaborate(cod, None)?;
                Ok(Term::arrow(d, c))
            }
            Expr::Pi {
                name, domain, body, ..
            } => {
                let d = self.elaborate(domain, None)?;
                self.locals.push((name.clone(), d.clone()));
                let c = self.elaborate(body, None);
                self.locals.pop();
                Ok(Term::pi(name.clone(), d, c?, true))
            }
            Expr::Lambda {
                name,
                ann,
                body,
                span: _,
            } => {
                let ann_term = match ann {
                    Some(a) => Some(self.elaborate(a, None)?),
                    None => None,
                };
                // Pull the binder type and body expectation from the
                // expected Pi when we have one.
                let mut body_expected = None;
                let mut binder_ty = ann_term.clone();
                if let Some(exp) = expected {
                    let ctx = self.typing_context();
                    if let Term::Pi {
                        domain, codomain, ..
                    } = ctx.whnf(exp)?
                    {
                        if binder_ty.is_none() {
                            binder_ty = Some((*domain).clone());
                        }
                        body_expected = Some(*codomain);
                    }
                }
                self.locals
                    .push((name.clone(), binder_ty.clone().unwrap_or(UNKNOWN_LOCAL)));
                let body_term = self.elaborate(body, body_expected.as_ref());
                self.locals.pop();
                // Store the resolved annotation: translated copies of the
                // definiens must stay inferable on their own.
                Ok(Term::Lambda {
                    name: name.clone(),
                    ann: binder_ty.map(Box::new),
                    body: Box::new(body_term?),
                })
            }
        }
    }

    fn resolve_name(&self, name: &str, span: Span) -> Result<Term, GraphError> {
        if let Some(pos) = self.locals.iter().rposition(|(n, _)| n == name) {
            return Ok(Term::Var(self.locals.len() - 1 - pos));
        }
        if let Some(q) = self.resolve.get(name) {
            return Ok(Term::Const(q.clone()));
        }
        Err(GraphError::UnknownName {
            name: name.to_string(),
            span,
        })
    }

    fn spine(&mut self, expr: &Expr, expected: Option<&Term>) -> Result<Term, GraphError> {
        let (head_expr, arg_exprs) = expr.spine();
        let head = match head_expr {
            Expr::Name(n, span) => {
                if n == "_" {
                    let h = self.next_hole;
                    self.next_hole += 1;
                    Term::Meta(h)
                } else {
                    self.resolve_name(n, *span)?
                }
            }
            other => self.elaborate(other, None)?,
        };
        let mut args = Vec::with_capacity(arg_exprs.len());
        for a in &arg_exprs {
            args.push(self.elaborate(a, None)?);
        }
        let needs_solver = self.head_takes_implicits(&head)?
            || args.iter().any(|a| a.contains_meta())
            || (args.is_empty() && head.contains_meta());
        if needs_solver && matches!(head, Term::Const(_)) {
            let mut ctx = self.typing_context();
            Ok(solve_implicits(&mut ctx, head, &args, expected)?)
        } else {
            Ok(Term::apps(head, args))
        }
    }

    fn head_takes_implicits(&self, head: &Term) -> Result<bool, GraphError> {
        let Term::Const(q) = head else {
            return Ok(false);
        };
        let Some(ty) = self.sig.const_type(q) else {
            return Ok(false);
        };
        let ctx = self.typing_context();
        let mut ty = ctx.whnf(&ty)?;
        while let Term::Pi {
            codomain, implicit, ..
        } = ty
        {
            if implicit {
                return Ok(true);
            }
            ty = ctx.whnf(&codomain)?;
        }
        Ok(false)
    }
}

impl ContextGraph {
    /// Elaborate and check a parsed theory, inserting it on success. The
    /// meta-theory defaults to the loaded prelude. Fails with the first
    /// offending declaration's diagnostic.
    pub fn add_theory_item(&mut self, item: &TheoryItem) -> Result<(), Vec<Diagnostic>> {
        let diag = |decl: Option<&str>, span: Option<Span>, msg: String| {
            vec![Diagnostic::new(&item.name, decl, span, msg)]
        };
        if self.theory(&item.name).is_some() {
            return Err(diag(
                None,
                Some(item.span),
                format!("theory `{}` already defined", item.name),
            ));
        }
        let meta = item
            .meta
            .clone()
            .or_else(|| self.prelude.clone().filter(|p| p != &item.name));
        let mut staged = Theory::new(item.name.clone(), meta);
        staged.generated_by = None;
        for entry in &item.entries {
            if let TheoryEntry::Include(inc) = entry {
                if self.theory(&inc.name).is_none() {
                    return Err(diag(
                        None,
                        Some(inc.span),
                        format!("unknown theory `{}`", inc.name),
                    ));
                }
                if inc.name == item.name {
                    return Err(diag(
                        None,
                        Some(inc.span),
                        "a theory cannot include itself".into(),
                    ));
                }
                if !staged.includes.contains(&inc.name) {
                    staged.includes.push(inc.name.clone());
                }
            }
        }
        if let Some(m) = &staged.meta {
            if self.theory(m).is_none() {
                return Err(diag(
                    None,
                    Some(item.span),
                    format!("unknown meta-theory `{m}`"),
                ));
            }
        }

        for entry in &item.entries {
            let TheoryEntry::Decl(d) = entry else {
                continue;
            };
            let mk = |msg: String| diag(Some(&d.name), Some(d.span), msg);
            if staged.decl(&d.name).is_some() {
                return Err(mk(format!(
                    "`{}` is already declared in this theory",
                    d.name
                )));
            }
            let (ty, def) = {
                let scope = StagedTheory {
                    graph: self,
                    theory: &staged,
                };
                let mut elab = Elaborator::for_staged(&scope).map_err(|e| mk(e.to_string()))?;
                let ty = match &d.ty {
                    Some(e) => {
                        let t = elab.elaborate(e, None).map_err(|e| mk(e.to_string()))?;
                        let mut ctx = elab.typing_context();
                        ctx.check_classifier(&t).map_err(|e| mk(e.to_string()))?;
                        Some(t)
                    }
                    None => None,
                };
                let def = match &d.def {
                    Some(e) => Some(
                        elab.elaborate(e, ty.as_ref())
                            .map_err(|e| mk(e.to_string()))?,
                    ),
                    None => None,
                };
                (ty, def)
            };
            let scope = StagedTheory {
                graph: self,
                theory: &staged,
            };
            let mut ctx = TypingContext::with_unfold_bound(&scope, self.unfold_bound);
            let ty = match (&ty, &def) {
                (Some(t), Some(dtm)) => {
                    if dtm.contains_meta() {
                        return Err(mk("unsolved `_` in definiens".into()));
                    }
                    ctx.check(dtm, t).map_err(|e| mk(e.to_string()))?;
                    t.clone()
                }
                (Some(t), None) => t.clone(),
                (None, Some(dtm)) => {
                    if dtm.contains_meta() {
                        return Err(mk("unsolved `_` in definiens".into()));
                    }
                    ctx.infer(dtm).map_err(|e| mk(e.to_string()))?
                }
                (None, None) => return Err(mk("a declaration needs a type or a definiens".into())),
            };
            if ty.contains_meta() {
                return Err(mk("unsolved `_` in type".into()));
            }
            let kind = self
                .classify_kind(&scope, &ty)
                .map_err(|e| mk(e.to_string()))?;
            staged.push_decl(Declaration {
                name: d.name.clone(),
                ty: Some(ty),
                def,
                kind,
                origin: DeclOrigin::Local,
                fixity: d.fixity,
                span: Some(d.span),
            });
        }
        staged.checked = true;
        self.insert_theory(staged)
            .map_err(|e| diag(None, Some(item.span), e.to_string()))
    }

    /// A declaration is an assumption when its type normalizes to `⊦~ p`.
    fn classify_kind(&self, sig: &dyn Signature, ty: &Term) -> Result<DeclKind, GraphError> {
        let Some(assume) = self.prelude_const("⊦~") else {
            return Ok(DeclKind::Plain);
        };
        let ctx = TypingContext::with_unfold_bound(sig, self.unfold_bound);
        let nf = ctx.whnf(ty)?;
        if let (Term::Const(head), args) = nf.spine() {
            if *head == assume && args.len() == 1 {
                return Ok(DeclKind::Assumption);
            }
        }
        Ok(DeclKind::Plain)
    }

    /// Re-check every local declaration of an existing theory against its
    /// flattened context, setting the checked flag. Returns all diagnostics.
    #[allow(clippy::type_complexity)]
    pub fn recheck_theory(&mut self, name: &str) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let Some(theory) = self.theory(name) else {
            return vec![Diagnostic::new(name, None, None, "unknown theory".into())];
        };
        let decls: Vec<(String, Option<Term>, Option<Term>, Option<Span>)> = theory
            .decls
            .iter()
            .map(|d| (d.name.clone(), d.ty.clone(), d.def.clone(), d.span))
            .collect();
        for (dname, ty, def, span) in decls {
            let mut ctx = TypingContext::with_unfold_bound(self, self.unfold_bound);
            let Some(ty) = ty else {
                diags.push(Diagnostic::new(
                    name,
                    Some(&dname),
                    span,
                    "missing type".into(),
                ));
                continue;
            };
            if let Err(e) = ctx.check_classifier(&ty) {
                diags.push(Diagnostic::new(name, Some(&dname), span, e.to_string()));
                continue;
            }
            if let Some(def) = def {
                if let Err(e) = ctx.check(&def, &ty) {
                    diags.push(Diagnostic::new(name, Some(&dname), span, e.to_string()));
                }
            }
        }
        if diags.is_empty() {
            if let Some(t) = self.theory_mut(name) {
                t.checked = true;
            }
        }
        diags
    }

    /// Elaborate and verify a parsed view. Obligations are processed in
    /// dependency order, so later constants' types may mention earlier ones.
    /// With `allow_partial`, missing assignments downgrade the view to
    /// partial instead of erroring.
    pub fn add_view_item(
        &mut self,
        item: &ViewItem,
        allow_partial: bool,
    ) -> Result<(), Vec<Diagnostic>> {
        let diag = |decl: Option<&str>, span: Option<Span>, msg: String| {
            vec![Diagnostic::new(&item.name, decl, span, msg)]
        };
        if self.view(&item.name).is_some() {
            return Err(diag(
                None,
                Some(item.span),
                format!("view `{}` already defined", item.name),
            ));
        }
        for t in [&item.domain, &item.codomain] {
            match self.theory(t) {
                None => return Err(diag(None, Some(item.span), format!("unknown theory `{t}`"))),
                Some(th) if !th.checked => {
                    return Err(diag(
                        None,
                        Some(item.span),
                        format!("theory `{t}` is unchecked"),
                    ))
                }
                _ => {}
            }
        }

        // Resolve assignment keys against the domain's visible names.
        let domain_names = self
            .visible_names(&item.domain)
            .map_err(|e| diag(None, Some(item.span), e.to_string()))?;
        let mut pending: BTreeMap<QName, (&Expr, Span)> = BTreeMap::new();
        for a in &item.assignments {
            let Some(q) = domain_names.get(&a.constant) else {
                return Err(diag(
                    Some(&a.constant),
                    Some(a.span),
                    format!("`{}` is not visible in `{}`", a.constant, item.domain),
                ));
            };
            if pending.insert(q.clone(), (&a.value, a.span)).is_some() {
                return Err(diag(
                    Some(&a.constant),
                    Some(a.span),
                    format!("`{}` is assigned twice", a.constant),
                ));
            }
        }

        let shared = self
            .include_closure(&item.codomain)
            .map_err(|e| diag(None, Some(item.span), e.to_string()))?;
        let mut view = Morphism {
            name: item.name.clone(),
            kind: MorphismKind::View,
            domain: item.domain.clone(),
            codomain: item.codomain.clone(),
            assignment: BTreeMap::new(),
            status: MorphismStatus::Unchecked,
        };
        let mut unmapped = Vec::new();
        let flat = self
            .flatten(&item.domain)
            .map_err(|e| diag(None, Some(item.span), e.to_string()))?;
        for entry in flat {
            let q = entry.qname;
            let decl = self.declaration(&q).expect("flattened declaration exists");
            if shared.contains(&q.theory) {
                if pending.contains_key(&q) {
                    return Err(diag(
                        Some(&q.name),
                        Some(item.span),
                        format!("`{q}` is shared with the codomain and cannot be reassigned"),
                    ));
                }
                continue;
            }
            let given = pending.remove(&q);
            let declared_ty = decl.ty.clone().expect("checked declaration has a type");
            let definiens = decl.def.clone();
            match (given, definiens) {
                (Some((expr, span)), maybe_def) => {
                    let expected = translate_or(self, &view, &declared_ty).map_err(|e| {
                        diag(
                            Some(&q.name),
                            Some(span),
                            format!("obligation for `{q}`: {e}"),
                        )
                    })?;
                    let mut elab = Elaborator::for_theory(self, &item.codomain)
                        .map_err(|e| diag(Some(&q.name), Some(span), e.to_string()))?;
                    let value = elab
                        .elaborate(expr, Some(&expected))
                        .map_err(|e| diag(Some(&q.name), Some(span), e.to_string()))?;
                    let mut ctx = elab.typing_context();
                    ctx.check(&value, &expected).map_err(|e| {
                        diag(
                            Some(&q.name),
                            Some(span),
                            GraphError::ObligationFailed {
                                constant: q.clone(),
                                reason: e.to_string(),
                            }
                            .to_string(),
                        )
                    })?;
                    if let Some(def) = maybe_def {
                        // Mapping a defined constant is allowed when it
                        // agrees with the translated definiens.
                        let translated = translate_or(self, &view, &def).map_err(|e| {
                            diag(
                                Some(&q.name),
                                Some(span),
                                format!("definiens of `{q}`: {e}"),
                            )
                        })?;
                        let agreed = ctx
                            .equal(&value, &translated)
                            .map_err(|e| diag(Some(&q.name), Some(span), e.to_string()))?;
                        if !agreed {
                            return Err(diag(
                                Some(&q.name),
                                Some(span),
                                format!(
                                    "assignment for defined `{q}` disagrees with its definiens"
                                ),
                            ));
                        }
                    }
                    view.assignment.insert(q, value);
                }
                (None, Some(_)) => {} // defined: translates through its definiens
                (None, None) => unmapped.push(q),
            }
        }
        view.status = if unmapped.is_empty() {
            MorphismStatus::Verified
        } else if allow_partial {
            MorphismStatus::Partial { unmapped }
        } else {
            return Err(diag(
                None,
                Some(item.span),
                format!(
                    "view does not map: {}",
                    unmapped
                        .iter()
                        .map(|q| q.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            ));
        };
        self.insert_view(view)
            .map_err(|e| diag(None, Some(item.span), e.to_string()))
    }
}

fn translate_or(graph: &ContextGraph, view: &Morphism, t: &Term) -> Result<Term, GraphError> {
    morphism::translate(graph, view, t)
}

/// Parse and elaborate a single term in a theory's scope. The entry point
/// for programmatic term construction (and for tests quoting terms).
pub fn parse_term(
    graph: &ContextGraph,
    scope: &str,
    source: &str,
    expected: Option<&Term>,
) -> Result<Term, GraphError> {
    let tokens = crate::syntax::tokenize(source).map_err(|e| GraphError::Syntax(e.to_string()))?;
    let env = graph.fixities();
    let expr = crate::syntax::parse_expr_with_env(&tokens, &env)
        .map_err(|e| GraphError::Syntax(e.to_string()))?;
    let mut elab = Elaborator::for_theory(graph, scope)?;
    let term = elab.elaborate(&expr, expected)?;
    let mut ctx = elab.typing_context();
    match expected {
        Some(exp) => ctx.check(&term, exp)?,
        None => {
            if term.contains_meta() {
                return Err(GraphError::Kernel(crate::kernel::KernelError::CannotInfer(
                    "_".to_string(),
                )));
            }
        }
    }
    Ok(term)
}
