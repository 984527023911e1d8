//! Theories, morphisms, and the context graph.
//!
//! A theory is an ordered list of declarations over a meta-theory plus
//! include edges; a context graph is a diagram of theories connected by
//! includes and views, extended with attack edges. Everything here is built
//! single-threaded during loading and immutable afterwards.

mod elaborate;
pub(crate) mod morphism;
mod printing;

pub use elaborate::{parse_term, Diagnostic, Elaborator};
pub use morphism::{check_view, compose, is_total, translate, ViewReport};
pub use printing::{
    is_generated, print_declaration, print_term, term_to_expr, theory_to_item, view_to_item,
};

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::kernel::{KernelError, QName, Signature, Term, DEFAULT_UNFOLD_BOUND};
use crate::span::Span;
use crate::syntax::Fixity;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Plain,
    /// The declared type is `⊦~ p`: a defeasible premise.
    Assumption,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeclOrigin {
    Local,
    /// Copied into a pushout-generated theory from `from`.
    Generated {
        pushout: String,
        from: QName,
    },
}

#[derive(Debug, Clone)]
pub struct Declaration {
    pub name: String,
    /// Declared or inferred type; always present once the theory is checked.
    pub ty: Option<Term>,
    pub def: Option<Term>,
    pub kind: DeclKind,
    pub origin: DeclOrigin,
    pub fixity: Option<Fixity>,
    pub span: Option<Span>,
}

#[derive(Debug, Clone)]
pub struct Theory {
    pub name: String,
    /// Meta-theory edge; behaves like an include.
    pub meta: Option<String>,
    pub includes: Vec<String>,
    pub decls: Vec<Declaration>,
    pub checked: bool,
    pub generated_by: Option<String>,
    decl_index: BTreeMap<String, usize>,
}

impl Theory {
    pub fn new(name: impl Into<String>, meta: Option<String>) -> Self {
        Theory {
            name: name.into(),
            meta,
            includes: Vec::new(),
            decls: Vec::new(),
            checked: false,
            generated_by: None,
            decl_index: BTreeMap::new(),
        }
    }

    pub fn push_decl(&mut self, decl: Declaration) {
        self.decl_index.insert(decl.name.clone(), self.decls.len());
        self.decls.push(decl);
    }

    pub fn decl(&self, name: &str) -> Option<&Declaration> {
        self.decl_index.get(name).map(|&i| &self.decls[i])
    }

    /// Edges this theory imports from directly: meta first, then includes.
    pub fn imports(&self) -> impl Iterator<Item = &String> {
        self.meta.iter().chain(self.includes.iter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphismKind {
    Include,
    View,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MorphismStatus {
    Unchecked,
    Verified,
    /// Covers only part of the undefined domain constants; the covered part
    /// is verified, the rest is listed.
    Partial {
        unmapped: Vec<QName>,
    },
}

/// A theory morphism. Includes have the identity assignment; views map each
/// undefined domain constant to a codomain expression. Constants of theories
/// visible in the codomain (the shared background and the meta-theory) are
/// always mapped to themselves and need no entry.
#[derive(Debug, Clone)]
pub struct Morphism {
    pub name: String,
    pub kind: MorphismKind,
    pub domain: String,
    pub codomain: String,
    pub assignment: BTreeMap<QName, Term>,
    pub status: MorphismStatus,
}

impl Morphism {
    pub fn include(from: &str, to: &str) -> Self {
        Morphism {
            name: format!("{from}<={to}"),
            kind: MorphismKind::Include,
            domain: from.to_string(),
            codomain: to.to_string(),
            assignment: BTreeMap::new(),
            status: MorphismStatus::Verified,
        }
    }
}

/// An attack between knowledge contexts, witnessed by the proposition the
/// attacker proves against one of the target's assumptions.
#[derive(Debug, Clone)]
pub struct AttackEdge {
    pub attacker: String,
    pub target: String,
    pub witness: Term,
    pub provenance: AttackProvenance,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttackProvenance {
    Asserted,
    Detected,
    Inherited {
        base_attacker: String,
        base_target: String,
    },
}

/// Record of a computed pushout: the generated theory, the morphism induced
/// on the rule theory, and where each generated declaration came from.
#[derive(Debug, Clone)]
pub struct PushoutRecord {
    pub name: String,
    /// A: the condition sub-theory (domain of the view).
    pub condition: String,
    /// B: the rule/consequence theory that was applied.
    pub rule: String,
    /// The view A → C used for the application.
    pub view: String,
    /// C: the case theory the rule was applied to.
    pub case: String,
    /// Name of the induced morphism B → P.
    pub induced: String,
    /// generated declaration → its original in B.
    pub provenance: BTreeMap<QName, QName>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("include cycle: {}", .0.join(" -> "))]
    IncludeCycle(Vec<String>),
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("unknown view `{0}`")]
    UnknownView(String),
    #[error("theory `{0}` has not been checked")]
    Unchecked(String),
    #[error("`{0}` is not mapped by the view")]
    UnmappedConstant(QName),
    #[error("obligation for `{constant}` failed: {reason}")]
    ObligationFailed { constant: QName, reason: String },
    #[error("morphisms do not compose: `{0}` ends at `{1}` but `{2}` starts at `{3}`")]
    EndpointMismatch(String, String, String, String),
    #[error("name `{0}` already in scope")]
    NameClash(String),
    #[error("{span}: unknown name `{name}`")]
    UnknownName { name: String, span: Span },
    #[error("{0}")]
    Syntax(String),
    #[error("no mediating morphism: {0}")]
    NoMediator(String),
    #[error("graph too large for exhaustive labeling ({0} nodes; bound {1})")]
    SemanticsTooLarge(usize, usize),
    #[error("view search exceeded its node budget of {0}")]
    SearchBudgetExceeded(u64),
    #[error("cannot print `{0}`: shadowed in the target scope")]
    Shadowed(QName),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// One entry of a flattened theory: where the declaration lives and, when it
/// was imported, through which direct edge it arrived.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatEntry {
    pub qname: QName,
    pub included_from: Option<String>,
}

#[derive(Debug, Default)]
pub struct ContextGraph {
    theories: Vec<Theory>,
    theory_index: BTreeMap<String, usize>,
    views: Vec<Morphism>,
    view_index: BTreeMap<String, usize>,
    /// Attack assertions from source files, verified at load time.
    pub asserted_attacks: Vec<AttackEdge>,
    pub pushouts: Vec<PushoutRecord>,
    /// The meta-theory new theories default to.
    pub prelude: Option<String>,
    pub unfold_bound: u64,
}

impl ContextGraph {
    pub fn new() -> Self {
        ContextGraph {
            unfold_bound: DEFAULT_UNFOLD_BOUND,
            ..Default::default()
        }
    }

    pub fn theories(&self) -> &[Theory] {
        &self.theories
    }

    pub fn theory(&self, name: &str) -> Option<&Theory> {
        self.theory_index.get(name).map(|&i| &self.theories[i])
    }

    pub fn theory_mut(&mut self, name: &str) -> Option<&mut Theory> {
        let i = *self.theory_index.get(name)?;
        Some(&mut self.theories[i])
    }

    pub fn expect_theory(&self, name: &str) -> Result<&Theory, GraphError> {
        self.theory(name)
            .ok_or_else(|| GraphError::UnknownTheory(name.to_string()))
    }

    pub fn insert_theory(&mut self, theory: Theory) -> Result<(), GraphError> {
        if self.theory_index.contains_key(&theory.name) {
            return Err(GraphError::NameClash(theory.name));
        }
        for dep in theory.imports() {
            if !self.theory_index.contains_key(dep) {
                return Err(GraphError::UnknownTheory(dep.clone()));
            }
        }
        self.theory_index
            .insert(theory.name.clone(), self.theories.len());
        self.theories.push(theory);
        Ok(())
    }

    /// Drop the most recently inserted theory (used to back out of a failed
    /// pushout).
    pub fn pop_theory(&mut self, name: &str) {
        if self.theories.last().is_some_and(|t| t.name == name) {
            self.theories.pop();
            self.theory_index.remove(name);
        }
    }

    pub fn views(&self) -> &[Morphism] {
        &self.views
    }

    pub fn view(&self, name: &str) -> Option<&Morphism> {
        self.view_index.get(name).map(|&i| &self.views[i])
    }

    pub fn expect_view(&self, name: &str) -> Result<&Morphism, GraphError> {
        self.view(name)
            .ok_or_else(|| GraphError::UnknownView(name.to_string()))
    }

    pub fn insert_view(&mut self, view: Morphism) -> Result<(), GraphError> {
        if self.view_index.contains_key(&view.name) {
            return Err(GraphError::NameClash(view.name));
        }
        self.expect_theory(&view.domain)?;
        self.expect_theory(&view.codomain)?;
        self.view_index.insert(view.name.clone(), self.views.len());
        self.views.push(view);
        Ok(())
    }

    pub fn pushout(&self, name: &str) -> Option<&PushoutRecord> {
        self.pushouts.iter().find(|p| p.name == name)
    }

    pub fn declaration(&self, q: &QName) -> Option<&Declaration> {
        self.theory(&q.theory)?.decl(&q.name)
    }

    /// Every theory whose flattening contains `name` (reflexively).
    pub fn includers(&self, name: &str) -> Vec<String> {
        self.theories
            .iter()
            .filter(|t| {
                self.include_closure(&t.name)
                    .map(|c| c.contains(name))
                    .unwrap_or(false)
            })
            .map(|t| t.name.clone())
            .collect()
    }

    /// The set of theories visible from `name`: itself, its meta, and its
    /// includes, transitively.
    pub fn include_closure(&self, name: &str) -> Result<BTreeSet<String>, GraphError> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![name.to_string()];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.clone()) {
                continue;
            }
            let theory = self.expect_theory(&t)?;
            for dep in theory.imports() {
                stack.push(dep.clone());
            }
        }
        Ok(seen)
    }

    /// Flatten a theory: the topological concatenation of its imports'
    /// flattenings followed by its own declarations, with diamond imports
    /// appearing once (first occurrence wins). Order is deterministic.
    pub fn flatten(&self, name: &str) -> Result<Vec<FlatEntry>, GraphError> {
        let mut out = Vec::new();
        let mut seen: BTreeSet<QName> = BTreeSet::new();
        let mut visiting: Vec<String> = Vec::new();
        self.flatten_into(name, None, &mut out, &mut seen, &mut visiting)?;
        Ok(out)
    }

    fn flatten_into(
        &self,
        name: &str,
        via: Option<&str>,
        out: &mut Vec<FlatEntry>,
        seen: &mut BTreeSet<QName>,
        visiting: &mut Vec<String>,
    ) -> Result<(), GraphError> {
        if visiting.iter().any(|v| v == name) {
            let mut path = visiting.clone();
            path.push(name.to_string());
            return Err(GraphError::IncludeCycle(path));
        }
        visiting.push(name.to_string());
        let theory = self.expect_theory(name)?;
        for dep in theory.imports() {
            // The direct edge a declaration arrived through, seen from the
            // flattening root.
            let edge = via.unwrap_or(dep.as_str());
            self.flatten_into(dep, Some(edge), out, seen, visiting)?;
        }
        for decl in &theory.decls {
            let qname = QName::new(name, decl.name.clone());
            if seen.insert(qname.clone()) {
                out.push(FlatEntry {
                    qname,
                    included_from: via.map(|s| s.to_string()),
                });
            }
        }
        visiting.pop();
        Ok(())
    }

    /// Base-name resolution map over a theory's flattening: later
    /// declarations shadow earlier ones.
    pub fn visible_names(&self, theory: &str) -> Result<BTreeMap<String, QName>, GraphError> {
        let mut map = BTreeMap::new();
        for entry in self.flatten(theory)? {
            map.insert(entry.qname.name.clone(), entry.qname);
        }
        Ok(map)
    }

    /// Look up a prelude constant such as `⊢`, `⊦~`, or `¬`.
    pub fn prelude_const(&self, name: &str) -> Option<QName> {
        let prelude = self.prelude.as_ref()?;
        let theory = self.theory(prelude)?;
        theory
            .decl(name)
            .map(|d| QName::new(prelude.clone(), d.name.clone()))
    }

    /// All fixity declarations in the graph, for printing.
    pub fn fixities(&self) -> crate::syntax::FixityEnv {
        let mut env = crate::syntax::FixityEnv::new();
        for t in &self.theories {
            for d in &t.decls {
                if let Some(fx) = d.fixity {
                    env.declare(&d.name, fx);
                }
            }
        }
        env
    }

    /// The include morphism `from ↪ to`; `from` must be visible in `to`.
    pub fn include_morphism(&self, from: &str, to: &str) -> Result<Morphism, GraphError> {
        let closure = self.include_closure(to)?;
        if !closure.contains(from) {
            return Err(GraphError::EndpointMismatch(
                from.to_string(),
                from.to_string(),
                to.to_string(),
                to.to_string(),
            ));
        }
        Ok(Morphism::include(from, to))
    }
}

impl Signature for ContextGraph {
    fn const_type(&self, q: &QName) -> Option<Term> {
        self.declaration(q)?.ty.clone()
    }

    fn const_definiens(&self, q: &QName) -> Option<&Term> {
        self.declaration(q)?.def.as_ref()
    }
}

/// A graph extended with a theory still under construction; lets declarations
/// of the new theory see their predecessors while checking.
pub struct StagedTheory<'g> {
    pub graph: &'g ContextGraph,
    pub theory: &'g Theory,
}

impl Signature for StagedTheory<'_> {
    fn const_type(&self, q: &QName) -> Option<Term> {
        if q.theory == self.theory.name {
            return self.theory.decl(&q.name)?.ty.clone();
        }
        self.graph.const_type(q)
    }

    fn const_definiens(&self, q: &QName) -> Option<&Term> {
        if q.theory == self.theory.name {
            return self.theory.decl(&q.name)?.def.as_ref();
        }
        self.graph.const_definiens(q)
    }
}
