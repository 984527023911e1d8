//! Beta-delta normalization and definitional equality.

use crate::kernel::{substitute, KernelError, QName, Term};

/// Supplies definientia for delta-unfolding.
pub trait Definitions {
    fn definiens(&self, q: &QName) -> Option<&Term>;
}

/// No definitions at all; beta only.
impl Definitions for () {
    fn definiens(&self, _q: &QName) -> Option<&Term> {
        None
    }
}

struct Fuel {
    left: u64,
    bound: u64,
}

impl Fuel {
    fn spend(&mut self) -> Result<(), KernelError> {
        if self.left == 0 {
            return Err(KernelError::DepthExceeded(self.bound));
        }
        self.left -= 1;
        Ok(())
    }
}

/// Weak-head normal form: unfold definitions and contract head redexes until
/// the head is a variable, an undefined constant, a binder, or `type`.
pub fn whnf(defs: &dyn Definitions, t: &Term, bound: u64) -> Result<Term, KernelError> {
    let mut fuel = Fuel { left: bound, bound };
    whnf_inner(defs, t.clone(), &mut fuel)
}

fn whnf_inner(defs: &dyn Definitions, mut t: Term, fuel: &mut Fuel) -> Result<Term, KernelError> {
    loop {
        match t {
            Term::App(f, a) => {
                let fw = whnf_inner(defs, *f, fuel)?;
                if let Term::Lambda { body, .. } = fw {
                    fuel.spend()?;
                    t = substitute(&body, &a);
                } else {
                    return Ok(Term::App(Box::new(fw), a));
                }
            }
            Term::Const(q) => match defs.definiens(&q) {
                Some(d) => {
                    fuel.spend()?;
                    t = d.clone();
                }
                None => return Ok(Term::Const(q)),
            },
            other => return Ok(other),
        }
    }
}

/// Full beta-delta normal form: no beta redex remains and every defined
/// constant is unfolded. `bound` caps the number of contraction/unfolding
/// steps; exceeding it reports a `DepthExceeded` diagnostic rather than
/// looping on a cyclic definition.
pub fn normalize(defs: &dyn Definitions, t: &Term, bound: u64) -> Result<Term, KernelError> {
    let mut fuel = Fuel { left: bound, bound };
    nf(defs, t.clone(), &mut fuel)
}

fn nf(defs: &dyn Definitions, t: Term, fuel: &mut Fuel) -> Result<Term, KernelError> {
    let t = whnf_inner(defs, t, fuel)?;
    Ok(match t {
        Term::App(f, a) => {
            // Head is stuck; normalize the pieces.
            Term::app(nf(defs, *f, fuel)?, nf(defs, *a, fuel)?)
        }
        Term::Lambda { name, ann, body } => Term::Lambda {
            name,
            ann: match ann {
                Some(a) => Some(Box::new(nf(defs, *a, fuel)?)),
                None => None,
            },
            body: Box::new(nf(defs, *body, fuel)?),
        },
        Term::Pi {
            name,
            domain,
            codomain,
            implicit,
        } => Term::Pi {
            name,
            domain: Box::new(nf(defs, *domain, fuel)?),
            codomain: Box::new(nf(defs, *codomain, fuel)?),
            implicit,
        },
        atom => atom,
    })
}

/// Syntactic equality modulo bound-variable renaming. Lambda annotations are
/// ignored (they are recoverable from types); Pi domains and implicit flags
/// are compared. There is no eta rule: `[x] f x` and `f` are distinct.
pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    match (a, b) {
        (Term::Const(p), Term::Const(q)) => p == q,
        (Term::Var(i), Term::Var(j)) => i == j,
        (Term::Type, Term::Type) => true,
        (Term::Meta(m), Term::Meta(n)) => m == n,
        (Term::App(f1, a1), Term::App(f2, a2)) => alpha_eq(f1, f2) && alpha_eq(a1, a2),
        (Term::Lambda { body: b1, .. }, Term::Lambda { body: b2, .. }) => alpha_eq(b1, b2),
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
        ) => i1 == i2 && alpha_eq(d1, d2) && alpha_eq(c1, c2),
        _ => false,
    }
}

/// Definitional equality: normal forms identical up to renaming.
pub fn equal(defs: &dyn Definitions, a: &Term, b: &Term, bound: u64) -> Result<bool, KernelError> {
    if alpha_eq(a, b) {
        return Ok(true);
    }
    Ok(alpha_eq(
        &normalize(defs, a, bound)?,
        &normalize(defs, b, bound)?,
    ))
}
