//! The logical-framework core: terms, substitution, normalization, and
//! bidirectional type checking.
//!
//! Terms use de Bruijn indices for bound variables; binder names are carried
//! only as printing hints and are ignored by equality. There is a single sort
//! `type`; propositions are `bool`-valued objects and judgments are types
//! built from them (`⊢ p` is the type of proofs of `p`).

mod normalize;
mod typing;

pub use normalize::{alpha_eq, equal, normalize, whnf, Definitions};
pub use typing::{solve_implicits, Signature, TypingContext, DEFAULT_UNFOLD_BOUND};

use std::fmt;

use thiserror::Error;

/// A constant's fully qualified name: the declaring theory plus the local
/// name. Two occurrences are the same constant exactly when both parts agree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QName {
    pub theory: String,
    pub name: String,
}

impl QName {
    pub fn new(theory: impl Into<String>, name: impl Into<String>) -> Self {
        QName {
            theory: theory.into(),
            name: name.into(),
        }
    }
}

impl fmt::Display for QName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.theory, self.name)
    }
}

#[derive(Debug, Clone)]
pub enum Term {
    Const(QName),
    /// De Bruijn index into the enclosing binder stack.
    Var(usize),
    App(Box<Term>, Box<Term>),
    Lambda {
        name: String,
        ann: Option<Box<Term>>,
        body: Box<Term>,
    },
    Pi {
        name: String,
        domain: Box<Term>,
        codomain: Box<Term>,
        implicit: bool,
    },
    /// The sort of types; it has no type itself.
    Type,
    /// Metavariable used while solving implicit arguments; never stored.
    Meta(u32),
}

impl Term {
    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn lambda(name: impl Into<String>, ann: Option<Term>, body: Term) -> Term {
        Term::Lambda {
            name: name.into(),
            ann: ann.map(Box::new),
            body: Box::new(body),
        }
    }

    pub fn pi(name: impl Into<String>, domain: Term, codomain: Term, implicit: bool) -> Term {
        Term::Pi {
            name: name.into(),
            domain: Box::new(domain),
            codomain: Box::new(codomain),
            implicit,
        }
    }

    /// Non-dependent function type.
    pub fn arrow(domain: Term, codomain: Term) -> Term {
        Term::pi("_", domain, shift(&codomain, 1, 0), false)
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut head = self;
        let mut args = Vec::new();
        while let Term::App(f, a) = head {
            args.push(a.as_ref());
            head = f;
        }
        args.reverse();
        (head, args)
    }

    pub fn contains_meta(&self) -> bool {
        match self {
            Term::Meta(_) => true,
            Term::Const(_) | Term::Var(_) | Term::Type => false,
            Term::App(f, a) => f.contains_meta() || a.contains_meta(),
            Term::Lambda { ann, body, .. } => {
                ann.as_ref().is_some_and(|a| a.contains_meta()) || body.contains_meta()
            }
            Term::Pi {
                domain, codomain, ..
            } => domain.contains_meta() || codomain.contains_meta(),
        }
    }

    /// All constants referenced anywhere in the term.
    pub fn constants(&self, out: &mut Vec<QName>) {
        match self {
            Term::Const(q) => out.push(q.clone()),
            Term::Var(_) | Term::Type | Term::Meta(_) => {}
            Term::App(f, a) => {
                f.constants(out);
                a.constants(out);
            }
            Term::Lambda { ann, body, .. } => {
                if let Some(a) = ann {
                    a.constants(out);
                }
                body.constants(out);
            }
            Term::Pi {
                domain, codomain, ..
            } => {
                domain.constants(out);
                codomain.constants(out);
            }
        }
    }
}

/// Alpha-equality (binder hints and lambda annotations ignored).
impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        alpha_eq(self, other)
    }
}

impl Eq for Term {}

/// Add `by` to every variable at or above `cutoff`.
pub fn shift(t: &Term, by: usize, cutoff: usize) -> Term {
    match t {
        Term::Var(i) if *i >= cutoff => Term::Var(i + by),
        Term::Var(_) | Term::Const(_) | Term::Type | Term::Meta(_) => t.clone(),
        Term::App(f, a) => Term::app(shift(f, by, cutoff), shift(a, by, cutoff)),
        Term::Lambda { name, ann, body } => Term::Lambda {
            name: name.clone(),
            ann: ann.as_ref().map(|a| Box::new(shift(a, by, cutoff))),
            body: Box::new(shift(body, by, cutoff + 1)),
        },
        Term::Pi {
            name,
            domain,
            codomain,
            implicit,
        } => Term::Pi {
            name: name.clone(),
            domain: Box::new(shift(domain, by, cutoff)),
            codomain: Box::new(shift(codomain, by, cutoff + 1)),
            implicit: *implicit,
        },
    }
}

/// Subtract `by` from every variable at or above `cutoff`, failing if a
/// variable inside the window would escape.
pub fn try_shift_down(t: &Term, by: usize, cutoff: usize) -> Option<Term> {
    Some(match t {
        Term::Var(i) if *i >= cutoff && *i < cutoff + by => return None,
        Term::Var(i) if *i >= cutoff => Term::Var(i - by),
        Term::Var(_) | Term::Const(_) | Term::Type | Term::Meta(_) => t.clone(),
        Term::App(f, a) => Term::app(
            try_shift_down(f, by, cutoff)?,
            try_shift_down(a, by, cutoff)?,
        ),
        Term::Lambda { name, ann, body } => Term::Lambda {
            name: name.clone(),
            ann: match ann {
                Some(a) => Some(Box::new(try_shift_down(a, by, cutoff)?)),
                None => None,
            },
            body: Box::new(try_shift_down(body, by, cutoff + 1)?),
        },
        Term::Pi {
            name,
            domain,
            codomain,
            implicit,
        } => Term::Pi {
            name: name.clone(),
            domain: Box::new(try_shift_down(domain, by, cutoff)?),
            codomain: Box::new(try_shift_down(codomain, by, cutoff + 1)?),
            implicit: *implicit,
        },
    })
}

/// Capture-avoiding substitution of `value` for the innermost binder of
/// `body`. Variables pointing past the binder are adjusted down; `value` is
/// shifted as it crosses binders, so none of its free variables are captured.
pub fn substitute(body: &Term, value: &Term) -> Term {
    subst_at(body, 0, value)
}

fn subst_at(t: &Term, depth: usize, value: &Term) -> Term {
    match t {
        Term::Var(i) if *i == depth => shift(value, depth, 0),
        Term::Var(i) if *i > depth => Term::Var(i - 1),
        Term::Var(_) | Term::Const(_) | Term::Type | Term::Meta(_) => t.clone(),
        Term::App(f, a) => Term::app(subst_at(f, depth, value), subst_at(a, depth, value)),
        Term::Lambda { name, ann, body } => Term::Lambda {
            name: name.clone(),
            ann: ann.as_ref().map(|a| Box::new(subst_at(a, depth, value))),
            body: Box::new(subst_at(body, depth + 1, value)),
        },
        Term::Pi {
            name,
            domain,
            codomain,
            implicit,
        } => Term::Pi {
            name: name.clone(),
            domain: Box::new(subst_at(domain, depth, value)),
            codomain: Box::new(subst_at(codomain, depth + 1, value)),
            implicit: *implicit,
        },
    }
}

#[derive(Debug, Clone, Error)]
pub enum KernelError {
    #[error("unknown constant `{0}`")]
    UnknownConstant(QName),
    #[error("not a function: `{head}` has type `{ty}`")]
    NotAFunction { head: String, ty: String },
    #[error("binder `{0}` needs a type annotation here")]
    Unannotated(String),
    #[error("type mismatch: expected `{expected}`, found `{actual}`")]
    TypeMismatch { expected: String, actual: String },
    #[error("unfolding exceeded {0} steps (cyclic definition?)")]
    DepthExceeded(u64),
    #[error("cannot infer implicit argument `{0}`; supply the `_` positions explicitly")]
    CannotInfer(String),
    #[error("`type` has no type")]
    TypeSortHasNoType,
}

// Debug-grade rendering: prefix applications, binder hints resolved against a
// name stack. The surface printer owns the readable notation.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &Term, names: &mut Vec<String>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                Term::Const(q) => write!(f, "{}", q.name),
                Term::Var(i) => match names.iter().rev().nth(*i) {
                    Some(n) => write!(f, "{n}"),
                    None => write!(f, "#{i}"),
                },
                Term::Type => write!(f, "type"),
                Term::Meta(m) => write!(f, "?{m}"),
                Term::App(_, _) => {
                    let (head, args) = t.spine();
                    write!(f, "(")?;
                    go(head, names, f)?;
                    for a in args {
                        write!(f, " ")?;
                        go(a, names, f)?;
                    }
                    write!(f, ")")
                }
                Term::Lambda { name, body, .. } => {
                    write!(f, "[{name}] ")?;
                    names.push(name.clone());
                    let r = go(body, names, f);
                    names.pop();
                    r
                }
                Term::Pi {
                    name,
                    domain,
                    codomain,
                    implicit,
                } => {
                    let (open, close) = if *implicit { ("{", "}") } else { ("(", ")") };
                    write!(f, "{open}{name} : ")?;
                    go(domain, names, f)?;
                    write!(f, "{close} ")?;
                    names.push(name.clone());
                    let r = go(codomain, names, f);
                    names.pop();
                    r
                }
            }
        }
        go(self, &mut Vec::new(), f)
    }
}
