//! Bidirectional type checking and implicit-argument solving.

use std::collections::BTreeMap;

use crate::kernel::normalize::{alpha_eq, normalize, whnf, Definitions};
use crate::kernel::{shift, substitute, try_shift_down, KernelError, QName, Term};

pub const DEFAULT_UNFOLD_BOUND: u64 = 10_000;

/// What the checker needs to know about declared constants.
pub trait Signature {
    /// Declared (or previously inferred and stored) type of a constant.
    fn const_type(&self, q: &QName) -> Option<Term>;
    /// Definiens, when the constant is defined.
    fn const_definiens(&self, q: &QName) -> Option<&Term>;
}

struct SigDefs<'s>(&'s dyn Signature);

impl Definitions for SigDefs<'_> {
    fn definiens(&self, q: &QName) -> Option<&Term> {
        self.0.const_definiens(q)
    }
}

/// A checking scope: a signature plus a stack of local binders. All
/// operations are read-only over the signature; contexts are cheap to build
/// per theory or per term.
pub struct TypingContext<'s> {
    sig: &'s dyn Signature,
    /// Binder stack, innermost last. Each type is expressed relative to the
    /// binders below it.
    locals: Vec<(String, Term)>,
    unfold_bound: u64,
}

impl<'s> TypingContext<'s> {
    pub fn new(sig: &'s dyn Signature) -> Self {
        TypingContext {
            sig,
            locals: Vec::new(),
            unfold_bound: DEFAULT_UNFOLD_BOUND,
        }
    }

    pub fn with_unfold_bound(sig: &'s dyn Signature, bound: u64) -> Self {
        TypingContext {
            sig,
            locals: Vec::new(),
            unfold_bound: bound,
        }
    }

    pub fn unfold_bound(&self) -> u64 {
        self.unfold_bound
    }

    pub fn normalize(&self, t: &Term) -> Result<Term, KernelError> {
        normalize(&SigDefs(self.sig), t, self.unfold_bound)
    }

    pub fn whnf(&self, t: &Term) -> Result<Term, KernelError> {
        whnf(&SigDefs(self.sig), t, self.unfold_bound)
    }

    /// Definitional equality: beta-delta normal forms identical up to
    /// bound-variable renaming. No eta.
    pub fn equal(&self, a: &Term, b: &Term) -> Result<bool, KernelError> {
        if alpha_eq(a, b) {
            return Ok(true);
        }
        Ok(alpha_eq(&self.normalize(a)?, &self.normalize(b)?))
    }

    pub fn push_local(&mut self, name: impl Into<String>, ty: Term) {
        self.locals.push((name.into(), ty));
    }

    pub fn pop_local(&mut self) {
        self.locals.pop();
    }

    pub fn local_depth(&self) -> usize {
        self.locals.len()
    }

    fn local_type(&self, index: usize) -> Option<Term> {
        let pos = self.locals.len().checked_sub(index + 1)?;
        // Shift across the binders between declaration and use site.
        Some(shift(&self.locals[pos].1, index + 1, 0))
    }

    /// Infer a type for `t`. `type` itself has no type; unannotated lambdas
    /// cannot be inferred, only checked.
    pub fn infer(&mut self, t: &Term) -> Result<Term, KernelError> {
        match t {
            Term::Type => Err(KernelError::TypeSortHasNoType),
            Term::Meta(_) => Err(KernelError::CannotInfer("_".to_string())),
            Term::Var(i) => self
                .local_type(*i)
                .ok_or_else(|| KernelError::UnknownConstant(QName::new("<local>", i.to_string()))),
            Term::Const(q) => self
                .sig
                .const_type(q)
                .ok_or_else(|| KernelError::UnknownConstant(q.clone())),
            Term::App(f, a) => {
                let f_ty = self.infer(f)?;
                match self.whnf(&f_ty)? {
                    Term::Pi {
                        domain, codomain, ..
                    } => {
                        self.check(a, &domain)?;
                        Ok(substitute(&codomain, a))
                    }
                    other => Err(KernelError::NotAFunction {
                        head: f.to_string(),
                        ty: other.to_string(),
                    }),
                }
            }
            Term::Lambda { name, ann, body } => {
                let Some(ann) = ann else {
                    return Err(KernelError::Unannotated(name.clone()));
                };
                self.check_classifier(ann)?;
                self.push_local(name.clone(), (**ann).clone());
                let body_ty = self.infer(body);
                self.pop_local();
                Ok(Term::pi(name.clone(), (**ann).clone(), body_ty?, false))
            }
            Term::Pi {
                name,
                domain,
                codomain,
                ..
            } => {
                self.check_classifier(domain)?;
                self.push_local(name.clone(), (**domain).clone());
                let r = self.check_classifier(codomain);
                self.pop_local();
                r?;
                Ok(Term::Type)
            }
        }
    }

    /// Check `t` against `expected` (a well-formed classifier). Unannotated
    /// lambdas check against Pi types; everything else goes through
    /// inference plus definitional equality.
    pub fn check(&mut self, t: &Term, expected: &Term) -> Result<(), KernelError> {
        if let Term::Lambda { name, ann, body } = t {
            if let Term::Pi {
                domain, codomain, ..
            } = self.whnf(expected)?
            {
                if let Some(ann) = ann {
                    self.check_classifier(ann)?;
                    if !self.equal(ann, &domain)? {
                        return Err(KernelError::TypeMismatch {
                            expected: domain.to_string(),
                            actual: ann.to_string(),
                        });
                    }
                }
                self.push_local(name.clone(), (*domain).clone());
                let r = self.check(body, &codomain);
                self.pop_local();
                return r;
            }
        }
        let actual = self.infer(t)?;
        if self.equal(&actual, expected)? {
            Ok(())
        } else {
            Err(KernelError::TypeMismatch {
                expected: expected.to_string(),
                actual: actual.to_string(),
            })
        }
    }

    /// A classifier is something a declaration may have as its type: the sort
    /// `type` itself, a function type between classifiers (this admits
    /// type-valued families like `bool → type`), or any term of type `type`.
    pub fn check_classifier(&mut self, t: &Term) -> Result<(), KernelError> {
        if matches!(t, Term::Type) {
            return Ok(());
        }
        if let Term::Pi {
            name,
            domain,
            codomain,
            ..
        } = self.whnf(t)?
        {
            self.check_classifier(&domain)?;
            self.push_local(name, (*domain).clone());
            let r = self.check_classifier(&codomain);
            self.pop_local();
            return r;
        }
        let ty = self.infer(t)?;
        if self.equal(&ty, &Term::Type)? {
            Ok(())
        } else {
            Err(KernelError::TypeMismatch {
                expected: "type".to_string(),
                actual: ty.to_string(),
            })
        }
    }
}

/// Elaborate an application spine whose head may take implicit arguments.
///
/// Leading implicit Pi binders of the head's type are filled with fresh
/// metavariables; each explicit argument's inferred type is then matched
/// first-order against the instantiated domain, solving metavariables as it
/// goes. Arguments that are themselves `Term::Meta` are `_` holes and
/// contribute no constraints beyond their later occurrences. After the last
/// argument, `expected` (when given) is matched against the residual type.
/// Any metavariable still unsolved is reported as `CannotInfer`.
pub fn solve_implicits(
    ctx: &mut TypingContext,
    head: Term,
    args: &[Term],
    expected: Option<&Term>,
) -> Result<Term, KernelError> {
    let head_ty = ctx.infer(&head)?;
    let mut solver = Matcher {
        solutions: BTreeMap::new(),
        hints: BTreeMap::new(),
    };
    let mut next_meta: u32 = 0;
    let mut term = head;
    let mut ty = head_ty;

    for arg in args {
        // Fill implicit positions until an explicit Pi surfaces.
        loop {
            match ctx.whnf(&ty)? {
                Term::Pi {
                    name,
                    codomain,
                    implicit: true,
                    ..
                } => {
                    let m = Term::Meta(next_meta);
                    solver.hints.insert(next_meta, name);
                    next_meta += 1;
                    term = Term::app(term, m.clone());
                    ty = substitute(&codomain, &m);
                }
                other => {
                    ty = other;
                    break;
                }
            }
        }
        match ty.clone() {
            Term::Pi {
                domain, codomain, ..
            } => {
                if let Term::Meta(h) = arg {
                    // A `_` hole: solvable only through later occurrences.
                    solver
                        .hints
                        .entry(*h + 1_000_000)
                        .or_insert_with(|| "_".to_string());
                    term = Term::app(term, Term::Meta(*h + 1_000_000));
                    ty = substitute(&codomain, &Term::Meta(*h + 1_000_000));
                    continue;
                }
                let arg_ty = ctx.infer(arg)?;
                let pattern = ctx.normalize(&solver.resolve(&domain))?;
                let concrete = ctx.normalize(&arg_ty)?;
                if !solver.match_terms(&pattern, &concrete, 0) {
                    return Err(KernelError::TypeMismatch {
                        expected: pattern.to_string(),
                        actual: concrete.to_string(),
                    });
                }
                term = Term::app(term, arg.clone());
                ty = substitute(&codomain, arg);
            }
            other => {
                return Err(KernelError::NotAFunction {
                    head: term.to_string(),
                    ty: other.to_string(),
                })
            }
        }
    }

    if let Some(exp) = expected {
        if term.contains_meta() {
            let pattern = ctx.normalize(&solver.resolve(&ty))?;
            let concrete = ctx.normalize(exp)?;
            // Best effort; the final check against `expected` is the caller's.
            let _ = solver.match_terms(&pattern, &concrete, 0);
        }
    }

    solver.zonk(&term, 0)
}

struct Matcher {
    solutions: BTreeMap<u32, Term>,
    hints: BTreeMap<u32, String>,
}

impl Matcher {
    /// Replace solved metavariables (at binder depth 0).
    fn resolve(&self, t: &Term) -> Term {
        self.zonk_lenient(t, 0)
    }

    fn zonk_lenient(&self, t: &Term, depth: usize) -> Term {
        match t {
            Term::Meta(m) => match self.solutions.get(m) {
                Some(s) => shift(s, depth, 0),
                None => t.clone(),
            },
            Term::Var(_) | Term::Const(_) | Term::Type => t.clone(),
            Term::App(f, a) => Term::app(self.zonk_lenient(f, depth), self.zonk_lenient(a, depth)),
            Term::Lambda { name, ann, body } => Term::Lambda {
                name: name.clone(),
                ann: ann.as_ref().map(|a| Box::new(self.zonk_lenient(a, depth))),
                body: Box::new(self.zonk_lenient(body, depth + 1)),
            },
            Term::Pi {
                name,
                domain,
                codomain,
                implicit,
            } => Term::Pi {
                name: name.clone(),
                domain: Box::new(self.zonk_lenient(domain, depth)),
                codomain: Box::new(self.zonk_lenient(codomain, depth + 1)),
                implicit: *implicit,
            },
        }
    }

    /// First-order matching: metavariables occur in `pat` only. Both sides
    /// are in normal form. `depth` counts binders crossed; a metavariable can
    /// only be solved by a term that does not capture locally bound
    /// variables.
    fn match_terms(&mut self, pat: &Term, t: &Term, depth: usize) -> bool {
        match (pat, t) {
            (Term::Meta(m), _) => {
                let Some(home) = try_shift_down(t, depth, 0) else {
                    return false;
                };
                match self.solutions.get(m) {
                    Some(prev) => alpha_eq(prev, &home),
                    None => {
                        self.solutions.insert(*m, home);
                        true
                    }
                }
            }
            (Term::Const(p), Term::Const(q)) => p == q,
            (Term::Var(i), Term::Var(j)) => i == j,
            (Term::Type, Term::Type) => true,
            (Term::App(f1, a1), Term::App(f2, a2)) => {
                self.match_terms(f1, f2, depth) && self.match_terms(a1, a2, depth)
            }
            (Term::Lambda { body: b1, .. }, Term::Lambda { body: b2, .. }) => {
                self.match_terms(b1, b2, depth + 1)
            }
            (
                Term::Pi {
                    domain: d1,
                    codomain: c1,
                    implicit: i1,
                    ..
                },
                Term::Pi {
                    domain: d2,
                    codomain: c2,
                    implicit: i2,
                    ..
                },
            ) => i1 == i2 && self.match_terms(d1, d2, depth) && self.match_terms(c1, c2, depth + 1),
            _ => false,
        }
    }

    /// Replace every metavariable by its solution, shifting across binders;
    /// unsolved metavariables are an error.
    fn zonk(&self, t: &Term, depth: usize) -> Result<Term, KernelError> {
        Ok(match t {
            Term::Meta(m) => match self.solutions.get(m) {
                Some(s) => shift(s, depth, 0),
                None => {
                    let hint = self
                        .hints
                        .get(m)
                        .cloned()
                        .unwrap_or_else(|| "_".to_string());
                    return Err(KernelError::CannotInfer(hint));
                }
            },
            Term::Var(_) | Term::Const(_) | Term::Type => t.clone(),
            Term::App(f, a) => Term::app(self.zonk(f, depth)?, self.zonk(a, depth)?),
            Term::Lambda { name, ann, body } => Term::Lambda {
                name: name.clone(),
                ann: match ann {
                    Some(a) => Some(Box::new(self.zonk(a, depth)?)),
                    None => None,
                },
                body: Box::new(self.zonk(body, depth + 1)?),
            },
            Term::Pi {
                name,
                domain,
                codomain,
                implicit,
            } => Term::Pi {
                name: name.clone(),
                domain: Box::new(self.zonk(domain, depth)?),
                codomain: Box::new(self.zonk(codomain, depth + 1)?),
                implicit: *implicit,
            },
        })
    }
}
