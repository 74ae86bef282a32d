//! Infix expression grammar shared by relation and differential files.
//!
//! ```text
//! chain  := expr ('=' expr)*
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? INT)?
//! atom   := INT | IDENT | '(' expr ')'
//! IDENT  := letter (letter | digit | '_' | combining mark)*
//! ```

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Sym(String, Pos),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i64, Pos),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Op(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_cont(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || ('\u{0300}'..='\u{036f}').contains(&c)
}

fn lex(src: &str, line0: usize) -> Result<Lexer, ParseError> {
    let mut toks = Vec::new();
    let mut line = line0;
    let mut col = 1;
    let mut it = src.chars().peekable();
    while let Some(&c) = it.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            it.next();
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            it.next();
            col += 1;
        } else if c.is_ascii_digit() {
            let mut v: i64 = 0;
            while let Some(&d) = it.peek() {
                let Some(dv) = d.to_digit(10) else { break };
                v = v
                    .checked_mul(10)
                    .and_then(|v| v.checked_add(dv as i64))
                    .ok_or_else(|| ParseError {
                        pos,
                        msg: "integer literal too large".into(),
                    })?;
                it.next();
                col += 1;
            }
            toks.push((Tok::Int(v), pos));
        } else if is_ident_start(c) {
            let mut s = String::new();
            while let Some(&d) = it.peek() {
                if !is_ident_cont(d) {
                    break;
                }
                s.push(d);
                it.next();
                col += 1;
            }
            toks.push((Tok::Ident(s), pos));
        } else if "+-*^()=".contains(c) {
            it.next();
            col += 1;
            toks.push((Tok::Op(c), pos));
        } else {
            return Err(ParseError {
                pos,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    toks.push((Tok::End, Pos { line, col }));
    Ok(Lexer { toks, i: 0 })
}

impl Lexer {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.next();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.next();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op('*') = self.peek() {
            self.next();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Tok::Op('-') = self.peek() {
            self.next();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Tok::Op('^') = self.peek() {
            let (_, pos) = self.next();
            let neg = if let Tok::Op('-') = self.peek() {
                self.next();
                true
            } else {
                false
            };
            match self.next() {
                (Tok::Int(k), _) => Ok(Expr::Pow(Box::new(base), if neg { -k } else { k }, pos)),
                (_, p) => Err(ParseError {
                    pos: p,
                    msg: "expected integer exponent".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            (Tok::Int(v), _) => Ok(Expr::Int(v)),
            (Tok::Ident(s), pos) => Ok(Expr::Sym(s, pos)),
            (Tok::Op('('), _) => {
                let e = self.expr()?;
                match self.next() {
                    (Tok::Op(')'), _) => Ok(e),
                    (_, pos) => Err(ParseError {
                        pos,
                        msg: "expected ')'".into(),
                    }),
                }
            }
            (Tok::End, pos) => Err(ParseError {
                pos,
                msg: "unexpected end of input".into(),
            }),
            (t, pos) => Err(ParseError {
                pos,
                msg: format!("unexpected token {t:?}"),
            }),
        }
    }
}

/// Parse a single expression. `line` is the 1-based line used in diagnostics.
pub fn parse_expr(src: &str, line: usize) -> Result<Expr, ParseError> {
    let mut lx = lex(src, line)?;
    let e = lx.expr()?;
    if *lx.peek() != Tok::End {
        return lx.err("trailing input");
    }
    Ok(e)
}

/// Parse `e0 = e1 = ... = ek`.
pub fn parse_chain(src: &str, line: usize) -> Result<Vec<Expr>, ParseError> {
    let mut lx = lex(src, line)?;
    let mut out = vec![lx.expr()?];
    while let Tok::Op('=') = lx.peek() {
        lx.next();
        out.push(lx.expr()?);
    }
    if *lx.peek() != Tok::End {
        return lx.err("expected '=' or end of relation");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chains() {
        let c = parse_chain("eta*nu = 2*nu^2 = nu^4 = 0", 1).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c[3], Expr::Int(0));
        let c = parse_chain("c4^3 - c6^2 = (12)^3*D", 1).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn unicode_names() {
        let e = parse_expr("κ̄*η^3*Δ^-1", 1).unwrap();
        match e {
            Expr::Mul(a, _) => match *a {
                Expr::Mul(k, _) => assert_eq!(*k, Expr::Sym("κ̄".into(), Pos { line: 1, col: 1 })),
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn error_positions() {
        let err = parse_chain("eta*nu = 2*nu^ = 0", 7).unwrap_err();
        assert_eq!(err.pos, Pos { line: 7, col: 16 });
        let err = parse_expr("eta $ nu", 3).unwrap_err();
        assert_eq!(err.pos, Pos { line: 3, col: 5 });
        assert!(parse_expr("(eta", 1).is_err());
    }
}
