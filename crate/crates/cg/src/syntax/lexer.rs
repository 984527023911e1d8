//! Tokenizer for the `.cg` surface language.
//!
//! Lexical sketch:
//!
//! * identifiers: XID start (plus `_`, digits, or a connective glyph followed
//!   by further identifier characters, so `∧El` and `Π` are names), continued
//!   by XID chars, `'`, `$`, an interior `-` not followed by `>`, or an
//!   interior `/` not followed by `/` or `\`;
//! * connective glyphs standing alone are operator tokens, each with an ASCII
//!   alias: `⊢`/`|-`, `⊦~`/`|~`, `∧`/`/\`, `¬`/`~`, `⇒`/`=>`, `→`/`->`,
//!   `∀`/`forall`;
//! * `//` starts a comment running to end of line;
//! * declarations are separated by newlines or `;`, so each token records
//!   whether a line break precedes it.
//!
//! A glyph followed directly by an identifier character is absorbed into the
//! identifier (that is what makes `∧El` a name), so object-level operators
//! want surrounding spaces: `a ∧ b`, not `a∧b` with a Unicode glyph.

use unicode_ident::{is_xid_continue, is_xid_start};

use crate::span::Span;
use crate::syntax::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    Symbol,
    BinderOpen,
    BinderClose,
    Assign,
    Colon,
    Op,
}

/// Canonical spelling of the function-type arrow; not a declarable constant.
pub const ARROW: &str = "→";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Source text, verbatim.
    pub text: String,
    /// For `Op` tokens, the canonical spelling (aliases collapsed).
    pub canon: Option<String>,
    pub span: Span,
    /// True when at least one line break separates this token from the
    /// previous one. Used for declaration separation.
    pub newline_before: bool,
}

const KEYWORDS: &[&str] = &[
    "theory", "view", "pushout", "attack", "include", "import", "apply", "along", "renaming", "on",
    "infixl", "infixr", "prefix", "type",
];

fn is_glyph(c: char) -> bool {
    matches!(c, '∧' | '¬' | '⇒' | '→' | '⊢' | '∀')
}

fn is_ident_start(c: char) -> bool {
    is_xid_start(c) || c == '_' || c.is_ascii_digit()
}

fn is_ident_continue(c: char) -> bool {
    is_xid_continue(c) || c == '\'' || c == '$'
}

struct Lexer<'s> {
    src: &'s str,
    chars: Vec<(usize, char)>,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'s> Lexer<'s> {
    fn new(src: &'s str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().collect(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).map(|&(_, c)| c)
    }

    fn byte_offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.src.len(), |&(i, _)| i)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span_from(&self, start: usize, line: u32, col: u32) -> Span {
        Span::new(start, self.byte_offset(), line, col)
    }
}

/// Split source text into tokens. Whitespace and `//` comments are skipped;
/// concatenating token texts with the skipped material restores the input.
pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut lx = Lexer::new(source);
    let mut tokens = Vec::new();
    let mut newline_pending = false;

    loop {
        // Skip whitespace and comments, tracking line breaks.
        loop {
            match lx.peek() {
                Some(c) if c.is_whitespace() => {
                    if c == '\n' {
                        newline_pending = true;
                    }
                    lx.bump();
                }
                Some('/') if lx.peek_at(1) == Some('/') => {
                    while let Some(c) = lx.peek() {
                        if c == '\n' {
                            break;
                        }
                        lx.bump();
                    }
                }
                _ => break,
            }
        }

        let start = lx.byte_offset();
        let (line, col) = (lx.line, lx.col);
        let Some(c) = lx.peek() else { break };

        let mut push = |lx: &Lexer, kind: TokenKind, canon: Option<&str>| {
            let span = lx.span_from(start, line, col);
            tokens.push(Token {
                kind,
                text: source[span.start..span.end].to_string(),
                canon: canon.map(|s| s.to_string()),
                span,
                newline_before: std::mem::take(&mut newline_pending),
            });
        };

        match c {
            '(' | ')' | ',' | ';' | '?' | '{' | '}' => {
                lx.bump();
                push(&lx, TokenKind::Symbol, None);
            }
            '[' => {
                lx.bump();
                push(&lx, TokenKind::BinderOpen, None);
            }
            ']' => {
                lx.bump();
                push(&lx, TokenKind::BinderClose, None);
            }
            ':' => {
                lx.bump();
                if lx.peek() == Some('=') {
                    lx.bump();
                    push(&lx, TokenKind::Assign, None);
                } else {
                    push(&lx, TokenKind::Colon, None);
                }
            }
            '=' => {
                lx.bump();
                if lx.peek() == Some('>') {
                    lx.bump();
                    push(&lx, TokenKind::Op, Some("⇒"));
                } else {
                    push(&lx, TokenKind::Assign, None);
                }
            }
            '-' => {
                lx.bump();
                if lx.peek() == Some('>') {
                    lx.bump();
                    push(&lx, TokenKind::Op, Some(ARROW));
                } else {
                    return Err(SyntaxError::IllegalCharacter {
                        ch: '-',
                        span: lx.span_from(start, line, col),
                    });
                }
            }
            '|' => {
                lx.bump();
                match lx.peek() {
                    Some('-') => {
                        lx.bump();
                        push(&lx, TokenKind::Op, Some("⊢"));
                    }
                    Some('~') => {
                        lx.bump();
                        push(&lx, TokenKind::Op, Some("⊦~"));
                    }
                    _ => {
                        return Err(SyntaxError::IllegalCharacter {
                            ch: '|',
                            span: lx.span_from(start, line, col),
                        })
                    }
                }
            }
            '/' => {
                // `//` was handled above, so this is `/\` or an error.
                lx.bump();
                if lx.peek() == Some('\\') {
                    lx.bump();
                    push(&lx, TokenKind::Op, Some("∧"));
                } else {
                    return Err(SyntaxError::IllegalCharacter {
                        ch: '/',
                        span: lx.span_from(start, line, col),
                    });
                }
            }
            '~' => {
                lx.bump();
                push(&lx, TokenKind::Op, Some("¬"));
            }
            '⊦' => {
                lx.bump();
                if lx.peek() == Some('~') {
                    lx.bump();
                    push(&lx, TokenKind::Op, Some("⊦~"));
                } else {
                    return Err(SyntaxError::IllegalCharacter {
                        ch: '⊦',
                        span: lx.span_from(start, line, col),
                    });
                }
            }
            g if is_glyph(g) => {
                lx.bump();
                if lx.peek().is_some_and(is_ident_start_or_continue) {
                    lex_ident_tail(&mut lx);
                    push(&lx, TokenKind::Ident, None);
                } else {
                    let canon = g.to_string();
                    push(&lx, TokenKind::Op, Some(&canon));
                }
            }
            c if is_ident_start(c) => {
                lx.bump();
                lex_ident_tail(&mut lx);
                let span = lx.span_from(start, line, col);
                let text = &source[span.start..span.end];
                if text == "forall" {
                    push(&lx, TokenKind::Op, Some("∀"));
                } else if KEYWORDS.contains(&text) {
                    push(&lx, TokenKind::Keyword, None);
                } else {
                    push(&lx, TokenKind::Ident, None);
                }
            }
            other => {
                lx.bump();
                return Err(SyntaxError::IllegalCharacter {
                    ch: other,
                    span: lx.span_from(start, line, col),
                });
            }
        }
    }

    Ok(tokens)
}

fn is_ident_start_or_continue(c: char) -> bool {
    is_ident_start(c) || is_ident_continue(c)
}

fn lex_ident_tail(lx: &mut Lexer) {
    loop {
        match lx.peek() {
            Some(c) if is_ident_continue(c) => {
                lx.bump();
            }
            // Interior `-` stays in the name unless it opens an arrow, so
            // `PvH-Asp-Gray` is one identifier but `lperson->thing` splits.
            Some('-')
                if lx.peek_at(1).is_some_and(is_ident_start_or_continue)
                    && lx.peek_at(1) != Some('>') =>
            {
                lx.bump();
            }
            // Interior `/` stays unless it opens a comment or `/\`; generated
            // names like `PvH-Alt/ruling` round-trip through this.
            Some('/')
                if lx.peek_at(1).is_some_and(is_ident_start_or_continue)
                    && lx.peek_at(1) != Some('/')
                    && lx.peek_at(1) != Some('\\') =>
            {
                lx.bump();
            }
            _ => break,
        }
    }
}
