//! Canonical pretty-printer. Re-parsing printed output reproduces the AST.

use std::fmt::Write;

use crate::syntax::{
    DeclItem, Expr, Fixity, FixityEnv, Item, SourceFile, TheoryEntry, ARROW, ARROW_PREC,
};

const APP_PREC: u32 = 100;
const ATOM_PREC: u32 = u32::MAX;

/// Render a file in canonical layout: one declaration per line, two-space
/// indent, blank line between items. The operator table grows in file order,
/// exactly as the parser's does, so fixities apply only after their
/// declaration.
pub fn print_graph(file: &SourceFile) -> String {
    print_graph_with_env(file, FixityEnv::new())
}

/// Like [`print_graph`], starting from an ambient operator table (for files
/// whose operators come from an imported prelude).
pub fn print_graph_with_env(file: &SourceFile, mut env: FixityEnv) -> String {
    let mut out = String::new();
    for (i, item) in file.items.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_item(item, &mut env, &mut out);
    }
    out
}

fn print_item(item: &Item, env: &mut FixityEnv, out: &mut String) {
    match item {
        Item::Import(im) => {
            let _ = writeln!(out, "import {}", im.name);
        }
        Item::Theory(t) => {
            match &t.meta {
                Some(m) => {
                    let _ = writeln!(out, "theory {} : {} {{", t.name, m);
                }
                None => {
                    let _ = writeln!(out, "theory {} {{", t.name);
                }
            }
            for entry in &t.entries {
                match entry {
                    TheoryEntry::Include(inc) => {
                        let _ = writeln!(out, "  include {}", inc.name);
                    }
                    TheoryEntry::Decl(d) => {
                        out.push_str("  ");
                        print_decl(d, env, out);
                        out.push('\n');
                    }
                }
            }
            out.push_str("}\n");
        }
        Item::View(v) => {
            let _ = writeln!(out, "view {} : {} -> {} {{", v.name, v.domain, v.codomain);
            for a in &v.assignments {
                let _ = writeln!(out, "  {} := {}", a.constant, print_prec(&a.value, 0, env));
            }
            out.push_str("}\n");
        }
        Item::Pushout(p) => {
            let _ = write!(
                out,
                "pushout {} = apply {} along {}",
                p.name, p.rule, p.view
            );
            if !p.renaming.is_empty() {
                out.push_str(" renaming { ");
                for (i, (from, to)) in p.renaming.iter().enumerate() {
                    if i > 0 {
                        out.push_str("; ");
                    }
                    let _ = write!(out, "{from} := {to}");
                }
                out.push_str(" }");
            }
            out.push('\n');
        }
        Item::Attack(a) => {
            let _ = writeln!(
                out,
                "attack {} -> {} on ({})",
                a.attacker,
                a.target,
                print_prec(&a.witness, 0, env)
            );
        }
    }
}

fn print_decl(d: &DeclItem, env: &mut FixityEnv, out: &mut String) {
    if let Some(fx) = d.fixity {
        let _ = write!(out, "{fx} ");
    }
    out.push_str(&d.name);
    if let Some(ty) = &d.ty {
        let _ = write!(out, " : {}", print_prec(ty, 0, env));
    }
    if let Some(def) = &d.def {
        let _ = write!(out, " = {}", print_prec(def, 0, env));
    }
    // Effective from the next declaration on, mirroring the parser.
    if let Some(fx) = d.fixity {
        env.declare(&d.name, fx);
    }
}

/// Render a single expression at top-level precedence.
pub fn print_expr(expr: &Expr, env: &FixityEnv) -> String {
    print_prec(expr, 0, env)
}

fn print_prec(expr: &Expr, ambient: u32, env: &FixityEnv) -> String {
    print_in(expr, ambient, Parent::Other, env)
}

/// What sits immediately around a subexpression, for the equal-precedence
/// cases: only a same-operator chain (or an application spine on its
/// function side) may stay flat at equal binding power; a prefix operand may
/// hold another prefix form.
#[derive(Clone, Copy, PartialEq)]
enum Parent<'a> {
    SameOp(&'a str),
    AppHead,
    PrefixOperand,
    Other,
}

enum Form {
    Atom,
    AppSpine,
    Infix(String),
    Prefix,
    Binder,
}

fn print_in(expr: &Expr, ambient: u32, parent: Parent, env: &FixityEnv) -> String {
    let (body, prec, form) = render(expr, env);
    let bare = if prec > ambient {
        true
    } else if prec < ambient {
        false
    } else {
        // Equal binding power: flat only when re-parsing regroups into the
        // same tree.
        match (&form, parent) {
            (Form::Atom, _) => true,
            (Form::AppSpine, Parent::AppHead) => true,
            (Form::Infix(op), Parent::SameOp(p)) => op == p,
            (Form::Prefix, Parent::PrefixOperand) => true,
            (Form::Binder, _) => ambient == 0,
            _ => false,
        }
    };
    if bare {
        body
    } else {
        format!("({body})")
    }
}

/// Render without outer parens, returning the form's binding power and shape.
fn render(expr: &Expr, env: &FixityEnv) -> (String, u32, Form) {
    match expr {
        Expr::Name(n, _) => (n.clone(), ATOM_PREC, Form::Atom),
        Expr::Hole(_) => ("_".to_string(), ATOM_PREC, Form::Atom),
        Expr::TypeSort(_) => ("type".to_string(), ATOM_PREC, Form::Atom),
        Expr::Arrow(dom, cod) => {
            let s = format!(
                "{} {} {}",
                print_in(dom, ARROW_PREC + 1, Parent::Other, env),
                ARROW,
                print_in(cod, ARROW_PREC, Parent::SameOp(ARROW), env)
            );
            (s, ARROW_PREC, Form::Infix(ARROW.to_string()))
        }
        Expr::Lambda { .. } => {
            let mut groups: Vec<(Vec<&str>, Option<&Expr>)> = Vec::new();
            let mut cur = expr;
            while let Expr::Lambda {
                name, ann, body, ..
            } = cur
            {
                let ann = ann.as_deref();
                match groups.last_mut() {
                    Some((names, prev)) if *prev == ann => names.push(name),
                    _ => groups.push((vec![name], ann)),
                }
                cur = body;
            }
            let mut s = String::new();
            for (names, ann) in &groups {
                s.push('[');
                s.push_str(&names.join(", "));
                if let Some(a) = ann {
                    let _ = write!(s, " : {}", print_prec(a, 0, env));
                }
                s.push_str("] ");
            }
            s.push_str(&print_prec(cur, 0, env));
            (s, 0, Form::Binder)
        }
        Expr::Pi { .. } => {
            let mut groups: Vec<(Vec<&str>, &Expr)> = Vec::new();
            let mut cur = expr;
            while let Expr::Pi {
                name, domain, body, ..
            } = cur
            {
                match groups.last_mut() {
                    Some((names, prev)) if *prev == domain.as_ref() => names.push(name),
                    _ => groups.push((vec![name], domain)),
                }
                cur = body;
            }
            let mut s = String::new();
            for (names, domain) in &groups {
                let _ = write!(
                    s,
                    "{{{} : {}}} ",
                    names.join(", "),
                    print_prec(domain, 0, env)
                );
            }
            s.push_str(&print_prec(cur, 0, env));
            (s, 0, Form::Binder)
        }
        Expr::App(f, a) => {
            let (head, args) = expr.spine();
            if let Expr::Name(op, _) = head {
                match env.get(op) {
                    Some(Fixity::Infixl(p)) if args.len() == 2 => {
                        let s = format!(
                            "{} {} {}",
                            print_in(args[0], p, Parent::SameOp(op), env),
                            op,
                            print_in(args[1], p + 1, Parent::Other, env)
                        );
                        return (s, p, Form::Infix(op.clone()));
                    }
                    Some(Fixity::Infixr(p)) if args.len() == 2 => {
                        let s = format!(
                            "{} {} {}",
                            print_in(args[0], p + 1, Parent::Other, env),
                            op,
                            print_in(args[1], p, Parent::SameOp(op), env)
                        );
                        return (s, p, Form::Infix(op.clone()));
                    }
                    Some(Fixity::Prefix(p)) if args.len() == 1 => {
                        let s = format!(
                            "{} {}",
                            op,
                            print_in(args[0], p, Parent::PrefixOperand, env)
                        );
                        return (s, p, Form::Prefix);
                    }
                    _ => {}
                }
            }
            let s = format!(
                "{} {}",
                print_in(f, APP_PREC, Parent::AppHead, env),
                print_in(a, APP_PREC + 1, Parent::Other, env)
            );
            (s, APP_PREC, Form::AppSpine)
        }
    }
}
