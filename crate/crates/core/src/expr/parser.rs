//! Recursive-descent parser.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' integer)?
//! integer := ['-'] DIGITS | '(' ['-'] DIGITS ')'
//! primary := NUMBER | VAR | CONST | FUNC '(' sum ')' | '(' sum ')'
//! ```

use super::{Expr, ExprError, Func};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
    text: String,
}

/// `x1`, `x2`, `x3` map to 0, 1, 2.
pub(crate) fn variable_index(name: &str) -> Option<usize> {
    match name {
        "x1" => Some(0),
        "x2" => Some(1),
        "x3" => Some(2),
        _ => None,
    }
}

fn looks_like_variable(name: &str) -> bool {
    name.len() > 1 && name.starts_with('x') && name[1..].bytes().all(|b| b.is_ascii_digit())
}

fn syntax(offset: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s = &text[start..i];
            let v: f64 = s
                .parse()
                .map_err(|_| syntax(start, format!("malformed number `{s}`")))?;
            out.push(Token {
                tok: Tok::Num(v),
                offset: start,
                text: s.to_string(),
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let s = &text[start..i];
            out.push(Token {
                tok: Tok::Ident(s.to_string()),
                offset: start,
                text: s.to_string(),
            });
        } else if b"+-*/^()".contains(&c) {
            i += 1;
            out.push(Token {
                tok: Tok::Sym(c as char),
                offset: start,
                text: (c as char).to_string(),
            });
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(syntax(start, format!("unexpected character `{ch}`")));
        }
    }
    out.push(Token {
        tok: Tok::End,
        offset: text.len(),
        text: "end of input".into(),
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            let t = self.peek();
            Err(syntax(t.offset, format!("expected `{c}`, found `{}`", t.text)))
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            if self.eat('+') {
                lhs = Expr::add(lhs, self.product()?);
            } else if self.eat('-') {
                lhs = Expr::sub(lhs, self.product()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::mul(lhs, self.unary()?);
            } else if self.eat('/') {
                lhs = Expr::div(lhs, self.unary()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.eat('^') {
            let n = self.integer()?;
            Ok(Expr::Pow(Box::new(base), n))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i32, ExprError> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let t = self.bump();
        let n = match (&t.tok, t.text.bytes().all(|b| b.is_ascii_digit())) {
            (Tok::Num(v), true) if *v <= i32::MAX as f64 => *v as i32,
            _ => {
                return Err(syntax(
                    t.offset,
                    format!("exponent must be an integer literal, found `{}`", t.text),
                ))
            }
        };
        if paren {
            self.expect(')')?;
        }
        Ok(if neg { -n } else { n })
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Sym('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    if self.peek().tok != Tok::Sym('(') {
                        return Err(syntax(
                            self.peek().offset,
                            format!("expected `(` after function `{name}`"),
                        ));
                    }
                    self.bump();
                    let arg = self.sum()?;
                    self.expect(')')?;
                    Ok(Expr::call(f, arg))
                } else if let Some(v) = variable_index(&name) {
                    Ok(Expr::Var(v))
                } else if looks_like_variable(&name) || self.peek().tok == Tok::Sym('(') {
                    Err(ExprError::UnknownIdentifier(name))
                } else {
                    Ok(Expr::Const(name))
                }
            }
            Tok::End => Err(syntax(t.offset, "unexpected end of input")),
            Tok::Sym(c) => Err(syntax(t.offset, format!("unexpected `{c}`"))),
        }
    }
}

/// Parse an expression. Names other than variables and functions become
/// late-bound constants; see [`parse_bound`] to reject unknown names up front.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    if text.trim().is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let e = p.sum()?;
    let t = p.peek();
    if t.tok != Tok::End {
        return Err(syntax(t.offset, format!("unexpected `{}`", t.text)));
    }
    Ok(e)
}

/// Parse and require every constant to be a key of `bindings` (or `pi`).
pub fn parse_bound(text: &str, bindings: &super::Bindings) -> Result<Expr, ExprError> {
    let e = parse(text)?;
    if let Some(name) = e
        .constants()
        .into_iter()
        .find(|n| n != "pi" && !bindings.contains_key(n))
    {
        return Err(ExprError::UnknownIdentifier(name));
    }
    Ok(e)
}
