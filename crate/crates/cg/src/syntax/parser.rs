//! Recursive-descent item parser with a Pratt expression core.

use std::collections::HashSet;

use crate::span::Span;
use crate::syntax::lexer::{Token, TokenKind, ARROW};
use crate::syntax::{
    AssignEntry, AttackItem, DeclItem, Expr, Fixity, FixityEnv, ImportItem, IncludeEntry, Item,
    PushoutItem, SourceFile, SyntaxError, TheoryEntry, TheoryItem, ViewItem, ARROW_PREC,
};

/// Binding power of application (juxtaposition); above every operator.
const APP_PREC: u32 = 100;

/// Parse a token stream into a source file, with a fresh operator table.
pub fn parse_graph(tokens: &[Token]) -> Result<SourceFile, SyntaxError> {
    let mut env = FixityEnv::new();
    parse_graph_with_env(tokens, &mut env)
}

/// Parse with an ambient operator table (already-loaded files feed it), which
/// grows as fixity declarations are encountered.
pub fn parse_graph_with_env(
    tokens: &[Token],
    env: &mut FixityEnv,
) -> Result<SourceFile, SyntaxError> {
    let mut items = Vec::new();
    let mut pos = 0;
    while let Some(item) = parse_next_item(tokens, &mut pos, env)? {
        items.push(item);
    }
    Ok(SourceFile { items })
}

/// Parse a standalone expression (the whole token stream must be consumed).
pub fn parse_expr_with_env(tokens: &[Token], env: &FixityEnv) -> Result<Expr, SyntaxError> {
    let mut env = env.clone();
    let mut p = Parser {
        tokens,
        pos: 0,
        env: &mut env,
        depth: 0,
    };
    let expr = p.expr(0)?;
    if !p.at_end() {
        return Err(p.err_here("end of expression"));
    }
    Ok(expr)
}

/// Parse one item starting at `*pos`, advancing it. Lets a loader process an
/// `import` (which may add operator fixities) before the following items are
/// parsed.
pub fn parse_next_item(
    tokens: &[Token],
    pos: &mut usize,
    env: &mut FixityEnv,
) -> Result<Option<Item>, SyntaxError> {
    if *pos >= tokens.len() {
        return Ok(None);
    }
    let mut p = Parser {
        tokens,
        pos: *pos,
        env,
        depth: 0,
    };
    let item = p.item()?;
    *pos = p.pos;
    Ok(Some(item))
}

enum Lead {
    /// Infix operator: canonical name, left and right binding power.
    Infix {
        name: String,
        lbp: u32,
        rbp: u32,
        arrow: bool,
    },
    /// Starts an operand (name, paren, binder, `type`, `_`, prefix operator).
    Operand,
    /// Cannot continue an expression.
    Stop,
}

struct Parser<'t, 'e> {
    tokens: &'t [Token],
    pos: usize,
    env: &'e mut FixityEnv,
    /// Bracket nesting; newlines only terminate expressions at depth 0.
    depth: u32,
}

impl<'t, 'e> Parser<'t, 'e> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn last_span(&self) -> Span {
        if self.pos == 0 {
            Span::default()
        } else {
            self.tokens[self.pos - 1].span
        }
    }

    fn err_here(&self, expected: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => SyntaxError::Parse {
                span: t.span,
                expected: expected.to_string(),
                found: t.text.clone(),
            },
            None => SyntaxError::Parse {
                span: self.last_span(),
                expected: expected.to_string(),
                found: "end of input".to_string(),
            },
        }
    }

    fn is_symbol(&self, sym: &str) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Symbol && t.text == sym)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Keyword && t.text == kw)
    }

    fn eat_symbol(&mut self, sym: &str) -> bool {
        if self.is_symbol(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_symbol(&mut self, sym: &str) -> Result<Span, SyntaxError> {
        if self.is_symbol(sym) {
            Ok(self.bump().span)
        } else {
            Err(self.err_here(&format!("`{sym}`")))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Span, SyntaxError> {
        if self.is_keyword(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.err_here(&format!("`{kw}`")))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Span), SyntaxError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => {
                let t = self.bump();
                Ok((t.text.clone(), t.span))
            }
            _ => Err(self.err_here(what)),
        }
    }

    /// A declaration or assignment name: an identifier or an operator glyph.
    fn expect_name(&mut self, what: &str) -> Result<(String, Span), SyntaxError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => {
                let t = self.bump();
                Ok((t.text.clone(), t.span))
            }
            Some(t) if t.kind == TokenKind::Op && t.canon.as_deref() != Some(ARROW) => {
                let t = self.bump();
                Ok((t.canon.clone().unwrap(), t.span))
            }
            _ => Err(self.err_here(what)),
        }
    }

    fn expect_arrow(&mut self) -> Result<(), SyntaxError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Op && t.canon.as_deref() == Some(ARROW) => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err_here("`->`")),
        }
    }

    fn is_assign(&self, text: &str) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Assign && t.text_is(text))
    }

    // ----- items --------------------------------------------------------

    fn item(&mut self) -> Result<Item, SyntaxError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword => match t.text.as_str() {
                "import" => self.import_item(),
                "theory" => self.theory_item(),
                "view" => self.view_item(),
                "pushout" => self.pushout_item(),
                "attack" => self.attack_item(),
                _ => Err(self.err_here("`import`, `theory`, `view`, `pushout`, or `attack`")),
            },
            _ => Err(self.err_here("`import`, `theory`, `view`, `pushout`, or `attack`")),
        }
    }

    fn import_item(&mut self) -> Result<Item, SyntaxError> {
        let kw = self.expect_keyword("import")?;
        let (name, nspan) = self.expect_ident("a file name to import")?;
        Ok(Item::Import(ImportItem {
            name,
            span: kw.merge(nspan),
        }))
    }

    fn theory_item(&mut self) -> Result<Item, SyntaxError> {
        let kw = self.expect_keyword("theory")?;
        let (name, _) = self.expect_ident("a theory name")?;
        let meta = if self.peek().is_some_and(|t| t.kind == TokenKind::Colon) {
            self.bump();
            Some(self.expect_ident("a meta-theory name")?.0)
        } else {
            None
        };
        self.expect_symbol("{")?;
        let mut entries = Vec::new();
        let mut locals: HashSet<String> = HashSet::new();
        loop {
            while self.eat_symbol(";") {}
            if self.is_symbol("}") {
                break;
            }
            if self.at_end() {
                return Err(self.err_here("`}`"));
            }
            if self.is_keyword("include") {
                self.bump();
                self.eat_symbol("?");
                let (inc, ispan) = self.expect_ident("an included theory name")?;
                entries.push(TheoryEntry::Include(IncludeEntry {
                    name: inc,
                    span: ispan,
                }));
                continue;
            }
            let decl = self.decl()?;
            if !locals.insert(decl.name.clone()) {
                return Err(SyntaxError::DuplicateName {
                    name: decl.name,
                    span: decl.span,
                });
            }
            entries.push(TheoryEntry::Decl(decl));
        }
        let close = self.expect_symbol("}")?;
        Ok(Item::Theory(TheoryItem {
            name,
            meta,
            entries,
            span: kw.merge(close),
        }))
    }

    fn decl(&mut self) -> Result<DeclItem, SyntaxError> {
        let fixity = self.fixity_marker()?;
        let (name, nspan) = self.expect_name("a declaration name")?;
        let mut span = nspan;
        let ty = if self.peek().is_some_and(|t| t.kind == TokenKind::Colon) {
            self.bump();
            let e = self.expr(0)?;
            span = span.merge(e.span());
            Some(e)
        } else {
            None
        };
        let def = if self.is_assign("=") {
            self.bump();
            let e = self.expr(0)?;
            span = span.merge(e.span());
            Some(e)
        } else {
            None
        };
        if ty.is_none() && def.is_none() {
            return Err(SyntaxError::Parse {
                span: nspan,
                expected: "`:` or `=` (a declaration needs a type or a definiens)".to_string(),
                found: name,
            });
        }
        if let Some(fx) = fixity {
            self.env.declare(&name, fx);
        }
        Ok(DeclItem {
            name,
            fixity,
            ty,
            def,
            span,
        })
    }

    fn fixity_marker(&mut self) -> Result<Option<Fixity>, SyntaxError> {
        let kind = match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword => match t.text.as_str() {
                "infixl" | "infixr" | "prefix" => t.text.clone(),
                _ => return Ok(None),
            },
            _ => return Ok(None),
        };
        self.bump();
        let (digits, dspan) = self.expect_ident("a precedence number")?;
        let prec: u32 = digits.parse().map_err(|_| SyntaxError::Parse {
            span: dspan,
            expected: "a precedence number".to_string(),
            found: digits.clone(),
        })?;
        Ok(Some(match kind.as_str() {
            "infixl" => Fixity::Infixl(prec),
            "infixr" => Fixity::Infixr(prec),
            _ => Fixity::Prefix(prec),
        }))
    }

    fn view_item(&mut self) -> Result<Item, SyntaxError> {
        let kw = self.expect_keyword("view")?;
        let (name, _) = self.expect_ident("a view name")?;
        if !self.peek().is_some_and(|t| t.kind == TokenKind::Colon) {
            return Err(self.err_here("`:`"));
        }
        self.bump();
        let (domain, _) = self.expect_ident("a domain theory name")?;
        self.expect_arrow()?;
        let (codomain, _) = self.expect_ident("a codomain theory name")?;
        self.expect_symbol("{")?;
        let mut assignments = Vec::new();
        loop {
            while self.eat_symbol(";") {}
            if self.is_symbol("}") {
                break;
            }
            if self.at_end() {
                return Err(self.err_here("`}`"));
            }
            let (constant, cspan) = self.expect_name("a domain constant name")?;
            if !self.is_assign(":=") {
                return Err(self.err_here("`:=`"));
            }
            self.bump();
            let value = self.expr(0)?;
            let span = cspan.merge(value.span());
            assignments.push(AssignEntry {
                constant,
                value,
                span,
            });
        }
        let close = self.expect_symbol("}")?;
        Ok(Item::View(ViewItem {
            name,
            domain,
            codomain,
            assignments,
            span: kw.merge(close),
        }))
    }

    fn pushout_item(&mut self) -> Result<Item, SyntaxError> {
        let kw = self.expect_keyword("pushout")?;
        let (name, _) = self.expect_ident("a pushout name")?;
        if !self.is_assign("=") {
            return Err(self.err_here("`=`"));
        }
        self.bump();
        self.expect_keyword("apply")?;
        let (rule, _) = self.expect_ident("a rule theory name")?;
        self.expect_keyword("along")?;
        let (view, mut end) = self.expect_ident("a view name")?;
        let mut renaming = Vec::new();
        if self.is_keyword("renaming") {
            self.bump();
            self.expect_symbol("{")?;
            loop {
                while self.eat_symbol(";") {}
                if self.is_symbol("}") {
                    break;
                }
                let (from, _) = self.expect_name("a generated declaration name")?;
                if !self.is_assign(":=") {
                    return Err(self.err_here("`:=`"));
                }
                self.bump();
                let (to, _) = self.expect_name("a presentation name")?;
                renaming.push((from, to));
            }
            end = self.expect_symbol("}")?;
        }
        Ok(Item::Pushout(PushoutItem {
            name,
            rule,
            view,
            renaming,
            span: kw.merge(end),
        }))
    }

    fn attack_item(&mut self) -> Result<Item, SyntaxError> {
        let kw = self.expect_keyword("attack")?;
        let (attacker, _) = self.expect_ident("an attacker theory name")?;
        self.expect_arrow()?;
        let (target, _) = self.expect_ident("a target theory name")?;
        self.expect_keyword("on")?;
        self.expect_symbol("(")?;
        self.depth += 1;
        let witness = self.expr(0)?;
        self.depth -= 1;
        let close = self.expect_symbol(")")?;
        Ok(Item::Attack(AttackItem {
            attacker,
            target,
            witness,
            span: kw.merge(close),
        }))
    }

    // ----- expressions ---------------------------------------------------

    /// How the next token may continue an expression at the current depth.
    fn lead(&self) -> Lead {
        let Some(t) = self.peek() else {
            return Lead::Stop;
        };
        if t.newline_before && self.depth == 0 {
            return Lead::Stop;
        }
        match t.kind {
            TokenKind::Ident => match self.env.get(&t.text) {
                Some(Fixity::Infixl(p)) => Lead::Infix {
                    name: t.text.clone(),
                    lbp: p,
                    rbp: p + 1,
                    arrow: false,
                },
                Some(Fixity::Infixr(p)) => Lead::Infix {
                    name: t.text.clone(),
                    lbp: p,
                    rbp: p,
                    arrow: false,
                },
                Some(Fixity::Prefix(_)) | None => Lead::Operand,
            },
            TokenKind::Op => {
                let canon = t.canon.as_deref().unwrap_or(&t.text);
                if canon == ARROW {
                    return Lead::Infix {
                        name: ARROW.to_string(),
                        lbp: ARROW_PREC,
                        rbp: ARROW_PREC,
                        arrow: true,
                    };
                }
                match self.env.get(canon) {
                    Some(Fixity::Infixl(p)) => Lead::Infix {
                        name: canon.to_string(),
                        lbp: p,
                        rbp: p + 1,
                        arrow: false,
                    },
                    Some(Fixity::Infixr(p)) => Lead::Infix {
                        name: canon.to_string(),
                        lbp: p,
                        rbp: p,
                        arrow: false,
                    },
                    Some(Fixity::Prefix(_)) | None => Lead::Operand,
                }
            }
            TokenKind::Keyword if t.text == "type" => Lead::Operand,
            TokenKind::Symbol if t.text == "(" || t.text == "{" => Lead::Operand,
            TokenKind::BinderOpen => Lead::Operand,
            _ => Lead::Stop,
        }
    }

    /// True when the next token can begin an application argument.
    /// Prefix operators and binders are excluded: arguments built from them
    /// must be parenthesized, as in `MP gray_rule (∧Er Fact2)`.
    fn starts_atom(&self) -> bool {
        let Some(t) = self.peek() else { return false };
        if t.newline_before && self.depth == 0 {
            return false;
        }
        match t.kind {
            TokenKind::Ident => self.env.get(&t.text).is_none(),
            TokenKind::Op => {
                let canon = t.canon.as_deref().unwrap_or(&t.text);
                canon != ARROW && self.env.get(canon).is_none()
            }
            TokenKind::Keyword => t.text == "type",
            TokenKind::Symbol => t.text == "(",
            _ => false,
        }
    }

    fn expr(&mut self, min_bp: u32) -> Result<Expr, SyntaxError> {
        let mut lhs = self.operand()?;
        loop {
            match self.lead() {
                Lead::Infix {
                    name,
                    lbp,
                    rbp,
                    arrow,
                } if lbp >= min_bp => {
                    let op_span = self.bump().span;
                    let rhs = self.expr(rbp)?;
                    lhs = if arrow {
                        Expr::Arrow(Box::new(lhs), Box::new(rhs))
                    } else {
                        Expr::app(Expr::app(Expr::Name(name, op_span), lhs), rhs)
                    };
                }
                Lead::Operand if APP_PREC >= min_bp && self.starts_atom() => {
                    let arg = self.atom()?;
                    lhs = Expr::app(lhs, arg);
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn operand(&mut self) -> Result<Expr, SyntaxError> {
        let Some(t) = self.peek() else {
            return Err(self.err_here("an expression"));
        };
        match t.kind {
            TokenKind::BinderOpen => self.lambda(),
            TokenKind::Symbol if t.text == "{" => self.pi(),
            TokenKind::Op => {
                let canon = t.canon.clone().unwrap_or_else(|| t.text.clone());
                if canon == ARROW {
                    return Err(self.err_here("an expression"));
                }
                match self.env.get(&canon) {
                    Some(Fixity::Prefix(p)) => {
                        let span = self.bump().span;
                        let arg = self.expr(p)?;
                        Ok(Expr::app(Expr::Name(canon, span), arg))
                    }
                    Some(_) => Err(self.err_here("an expression")),
                    None => {
                        let span = self.bump().span;
                        Ok(Expr::Name(canon, span))
                    }
                }
            }
            TokenKind::Ident => match self.env.get(&t.text) {
                Some(Fixity::Prefix(p)) => {
                    let t = self.bump();
                    let (name, span) = (t.text.clone(), t.span);
                    let arg = self.expr(p)?;
                    Ok(Expr::app(Expr::Name(name, span), arg))
                }
                Some(_) => Err(self.err_here("an expression")),
                None => self.atom(),
            },
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        let Some(t) = self.peek() else {
            return Err(self.err_here("an expression"));
        };
        match t.kind {
            TokenKind::Ident => {
                let t = self.bump();
                if t.text == "_" {
                    Ok(Expr::Hole(t.span))
                } else {
                    Ok(Expr::Name(t.text.clone(), t.span))
                }
            }
            TokenKind::Op => {
                // An operator with no declared fixity is a plain constant.
                let t = self.bump();
                Ok(Expr::Name(
                    t.canon.clone().unwrap_or_else(|| t.text.clone()),
                    t.span,
                ))
            }
            TokenKind::Keyword if t.text == "type" => {
                let t = self.bump();
                Ok(Expr::TypeSort(t.span))
            }
            TokenKind::Symbol if t.text == "(" => {
                self.bump();
                self.depth += 1;
                let e = self.expr(0)?;
                self.depth -= 1;
                self.expect_symbol(")")?;
                Ok(e)
            }
            _ => Err(self.err_here("an expression")),
        }
    }

    /// `[x, y] body` or `[x, y : A] body`; expands to nested lambdas.
    fn lambda(&mut self) -> Result<Expr, SyntaxError> {
        let open = self.bump().span; // `[`
        self.depth += 1;
        let mut names = vec![self.expect_ident("a binder name")?];
        while self.eat_symbol(",") {
            names.push(self.expect_ident("a binder name")?);
        }
        let ann = if self.peek().is_some_and(|t| t.kind == TokenKind::Colon) {
            self.bump();
            Some(self.expr(0)?)
        } else {
            None
        };
        self.depth -= 1;
        match self.peek() {
            Some(t) if t.kind == TokenKind::BinderClose => {
                self.bump();
            }
            _ => return Err(self.err_here("`]`")),
        }
        let body = self.expr(0)?;
        let span = open.merge(body.span());
        let mut expr = body;
        for (name, _) in names.into_iter().rev() {
            expr = Expr::Lambda {
                name,
                ann: ann.clone().map(Box::new),
                body: Box::new(expr),
                span,
            };
        }
        Ok(expr)
    }

    /// `{x, y : A} B`; a dependent function type with implicit arguments.
    fn pi(&mut self) -> Result<Expr, SyntaxError> {
        let open = self.bump().span; // `{`
        self.depth += 1;
        let mut names = vec![self.expect_ident("a binder name")?];
        while self.eat_symbol(",") {
            names.push(self.expect_ident("a binder name")?);
        }
        if !self.peek().is_some_and(|t| t.kind == TokenKind::Colon) {
            return Err(self.err_here("`:`"));
        }
        self.bump();
        let domain = self.expr(0)?;
        self.depth -= 1;
        self.expect_symbol("}")?;
        let body = self.expr(0)?;
        let span = open.merge(body.span());
        let mut expr = body;
        for (name, _) in names.into_iter().rev() {
            expr = Expr::Pi {
                name,
                domain: Box::new(domain.clone()),
                body: Box::new(expr),
                span,
            };
        }
        Ok(expr)
    }
}

impl Token {
    fn text_is(&self, s: &str) -> bool {
        self.text == s || self.canon.as_deref() == Some(s)
    }
}
