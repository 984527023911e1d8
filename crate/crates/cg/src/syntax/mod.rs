//! Surface syntax: tokens, AST, parser, and pretty-printer.
//!
//! The concrete grammar is block-structured and LL(1) at the item level:
//!
//! ```text
//! file    ::= item*
//! item    ::= "import" NAME
//!           | "theory" NAME (":" NAME)? "{" entry* "}"
//!           | "view" NAME ":" NAME "->" NAME "{" (NAME ":=" expr)* "}"
//!           | "pushout" NAME "=" "apply" NAME "along" NAME
//!             ("renaming" "{" (NAME ":=" NAME)* "}")?
//!           | "attack" NAME "->" NAME "on" "(" expr ")"
//! entry   ::= "include" "?"? NAME
//!           | fixity? NAME (":" expr)? ("=" expr)?
//! fixity  ::= ("infixl" | "infixr" | "prefix") NUMBER
//! ```
//!
//! Expressions are Pratt-parsed. Application is juxtaposition and binds
//! tightest; `[x,y] t` and `[x : A] t` are lambdas, `{x : A} B` is a
//! dependent function type whose argument is implicit, and `A → B` the plain
//! function type. Infix and prefix operators take their binding power from
//! earlier `infixl`/`infixr`/`prefix` declarations in scope. Declarations end
//! at a newline or `;` unless the line is visibly incomplete (an operator or
//! `:`/`=` still wants an operand), so multi-line declarations break after
//! operators.

mod lexer;
mod parser;
mod printer;

pub use lexer::{tokenize, Token, TokenKind, ARROW};
pub use parser::{parse_expr_with_env, parse_graph, parse_graph_with_env, parse_next_item};
pub use printer::{print_expr, print_graph, print_graph_with_env};

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::span::Span;

#[derive(Debug, Error)]
pub enum SyntaxError {
    #[error("{span}: illegal character `{ch}`")]
    IllegalCharacter { ch: char, span: Span },
    #[error("{span}: expected {expected}, found `{found}`")]
    Parse {
        span: Span,
        expected: String,
        found: String,
    },
    #[error("{span}: `{name}` is already declared in this theory")]
    DuplicateName { name: String, span: Span },
}

impl SyntaxError {
    pub fn span(&self) -> Span {
        match self {
            SyntaxError::IllegalCharacter { span, .. }
            | SyntaxError::Parse { span, .. }
            | SyntaxError::DuplicateName { span, .. } => *span,
        }
    }
}

/// Operator binding. Printed back as `infixl n` / `infixr n` / `prefix n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixity {
    Infixl(u32),
    Infixr(u32),
    Prefix(u32),
}

impl fmt::Display for Fixity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fixity::Infixl(p) => write!(f, "infixl {p}"),
            Fixity::Infixr(p) => write!(f, "infixr {p}"),
            Fixity::Prefix(p) => write!(f, "prefix {p}"),
        }
    }
}

/// Binding powers seen so far, keyed by canonical constant name. The function
/// arrow is built in below every declarable operator.
#[derive(Debug, Clone, Default)]
pub struct FixityEnv {
    map: BTreeMap<String, Fixity>,
}

pub const ARROW_PREC: u32 = 3;

impl FixityEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, fixity: Fixity) {
        self.map.insert(name.to_string(), fixity);
    }

    pub fn get(&self, name: &str) -> Option<Fixity> {
        self.map.get(name).copied()
    }
}

/// A parsed `.cg` file: ordered top-level items, each carrying its span.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceFile {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Import(ImportItem),
    Theory(TheoryItem),
    View(ViewItem),
    Pushout(PushoutItem),
    Attack(AttackItem),
}

impl Item {
    pub fn name(&self) -> &str {
        match self {
            Item::Import(i) => &i.name,
            Item::Theory(t) => &t.name,
            Item::View(v) => &v.name,
            Item::Pushout(p) => &p.name,
            Item::Attack(a) => &a.attacker,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Item::Import(i) => i.span,
            Item::Theory(t) => t.span,
            Item::View(v) => v.span,
            Item::Pushout(p) => p.span,
            Item::Attack(a) => a.span,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImportItem {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct TheoryItem {
    pub name: String,
    pub meta: Option<String>,
    pub entries: Vec<TheoryEntry>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TheoryEntry {
    Include(IncludeEntry),
    Decl(DeclItem),
}

#[derive(Debug, Clone)]
pub struct IncludeEntry {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct DeclItem {
    pub name: String,
    pub fixity: Option<Fixity>,
    pub ty: Option<Expr>,
    pub def: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct ViewItem {
    pub name: String,
    pub domain: String,
    pub codomain: String,
    pub assignments: Vec<AssignEntry>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct AssignEntry {
    pub constant: String,
    pub value: Expr,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct PushoutItem {
    pub name: String,
    /// The rule/consequence theory being applied.
    pub rule: String,
    /// The view from its condition sub-theory into the case theory.
    pub view: String,
    /// Presentation names for generated declarations.
    pub renaming: Vec<(String, String)>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct AttackItem {
    pub attacker: String,
    pub target: String,
    pub witness: Expr,
    pub span: Span,
}

/// Surface expressions. Operator applications are resolved to plain
/// application spines at parse time; `Arrow` is kept distinct from `Pi` so
/// printing is faithful.
#[derive(Debug, Clone)]
pub enum Expr {
    Name(String, Span),
    Hole(Span),
    TypeSort(Span),
    App(Box<Expr>, Box<Expr>),
    Lambda {
        name: String,
        ann: Option<Box<Expr>>,
        body: Box<Expr>,
        span: Span,
    },
    Pi {
        name: String,
        domain: Box<Expr>,
        body: Box<Expr>,
        span: Span,
    },
    Arrow(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Name(_, s) | Expr::Hole(s) | Expr::TypeSort(s) => *s,
            Expr::App(f, a) => f.span().merge(a.span()),
            Expr::Lambda { span, .. } | Expr::Pi { span, .. } => *span,
            Expr::Arrow(d, c) => d.span().merge(c.span()),
        }
    }

    pub fn app(f: Expr, a: Expr) -> Expr {
        Expr::App(Box::new(f), Box::new(a))
    }

    /// Flatten an application spine into head and arguments.
    pub fn spine(&self) -> (&Expr, Vec<&Expr>) {
        let mut args = Vec::new();
        let mut head = self;
        while let Expr::App(f, a) = head {
            args.push(a.as_ref());
            head = f;
        }
        args.reverse();
        (head, args)
    }
}

// Structural equality, spans ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Name(a, _), Expr::Name(b, _)) => a == b,
            (Expr::Hole(_), Expr::Hole(_)) => true,
            (Expr::TypeSort(_), Expr::TypeSort(_)) => true,
            (Expr::App(f1, a1), Expr::App(f2, a2)) => f1 == f2 && a1 == a2,
            (
                Expr::Lambda {
                    name: n1,
                    ann: t1,
                    body: b1,
                    ..
                },
                Expr::Lambda {
                    name: n2,
                    ann: t2,
                    body: b2,
                    ..
                },
            ) => n1 == n2 && t1 == t2 && b1 == b2,
            (
                Expr::Pi {
                    name: n1,
                    domain: d1,
                    body: b1,
                    ..
                },
                Expr::Pi {
                    name: n2,
                    domain: d2,
                    body: b2,
                    ..
                },
            ) => n1 == n2 && d1 == d2 && b1 == b2,
            (Expr::Arrow(d1, c1), Expr::Arrow(d2, c2)) => d1 == d2 && c1 == c2,
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl PartialEq for ImportItem {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl PartialEq for TheoryItem {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.meta == other.meta && self.entries == other.entries
    }
}

impl PartialEq for IncludeEntry {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl PartialEq for DeclItem {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.fixity == other.fixity
            && self.ty == other.ty
            && self.def == other.def
    }
}

impl PartialEq for ViewItem {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.domain == other.domain
            && self.codomain == other.codomain
            && self.assignments == other.assignments
    }
}

impl PartialEq for AssignEntry {
    fn eq(&self, other: &Self) -> bool {
        self.constant == other.constant && self.value == other.value
    }
}

impl PartialEq for PushoutItem {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.rule == other.rule
            && self.view == other.view
            && self.renaming == other.renaming
    }
}

impl PartialEq for AttackItem {
    fn eq(&self, other: &Self) -> bool {
        self.attacker == other.attacker
            && self.target == other.target
            && self.witness == other.witness
    }
}
