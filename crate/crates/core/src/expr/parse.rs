use super::{BinOp, Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    Eof,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn peek_byte(&self, off: usize) -> Option<u8> {
        self.bytes.get(self.pos + off).copied()
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>> {
        let mut out = Vec::new();
        loop {
            while self.peek_byte(0).is_some_and(|b| b.is_ascii_whitespace()) {
                self.pos += 1;
            }
            let start = self.pos;
            let Some(b) = self.peek_byte(0) else {
                out.push((Tok::Eof, start));
                return Ok(out);
            };
            let tok = match b {
                b'0'..=b'9' | b'.' => self.number()?,
                b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                    while self
                        .peek_byte(0)
                        .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_')
                    {
                        self.pos += 1;
                    }
                    Tok::Ident(self.src[start..self.pos].to_string())
                }
                b'+' | b'-' | b'*' | b'/' | b'^' => {
                    self.pos += 1;
                    Tok::Op(b as char)
                }
                b'(' => {
                    self.pos += 1;
                    Tok::LParen
                }
                b')' => {
                    self.pos += 1;
                    Tok::RParen
                }
                b',' => {
                    self.pos += 1;
                    Tok::Comma
                }
                _ => {
                    let ch = self.src[start..].chars().next().unwrap_or('?');
                    return Err(Error::Syntax {
                        pos: start,
                        msg: format!("unexpected character `{ch}`"),
                    });
                }
            };
            out.push((tok, start));
        }
    }

    fn number(&mut self) -> Result<Tok> {
        let start = self.pos;
        let mut digits = 0;
        while self.peek_byte(0).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
            digits += 1;
        }
        if self.peek_byte(0) == Some(b'.') {
            self.pos += 1;
            while self.peek_byte(0).is_some_and(|b| b.is_ascii_digit()) {
                self.pos += 1;
                digits += 1;
            }
        }
        if digits == 0 {
            return Err(Error::Syntax {
                pos: start,
                msg: "malformed number".into(),
            });
        }
        if matches!(self.peek_byte(0), Some(b'e' | b'E')) {
            let sign = usize::from(matches!(self.peek_byte(1), Some(b'+' | b'-')));
            if self.peek_byte(1 + sign).is_some_and(|b| b.is_ascii_digit()) {
                self.pos += 1 + sign;
                while self.peek_byte(0).is_some_and(|b| b.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        // `2i`, `1.5i`: imaginary literals are not part of the language
        if self.peek_byte(0) == Some(b'i')
            && !self
                .peek_byte(1)
                .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_')
        {
            return Err(Error::Syntax {
                pos: start,
                msg: "complex literals are not supported".into(),
            });
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>().map(Tok::Num).map_err(|_| Error::Syntax {
            pos: start,
            msg: format!("malformed number `{text}`"),
        })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    cursor: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.cursor].0
    }

    fn peek_at(&self, off: usize) -> &Tok {
        let idx = (self.cursor + off).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    fn pos(&self) -> usize {
        self.toks[self.cursor].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.cursor].0.clone();
        if self.cursor + 1 < self.toks.len() {
            self.cursor += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.bump();
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.bump();
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            // A bare literal under the minus is a negative constant; `-2^2` is still -(2^2).
            if let Tok::Num(v) = *self.peek() {
                if *self.peek_at(1) != Tok::Op('^') {
                    self.bump();
                    return Ok(Expr::Const(-v));
                }
            }
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    // power := atom ('^' unary)?
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Ident(name) => {
                if *self.peek() != Tok::LParen {
                    return Ok(Expr::Var(name));
                }
                let func = Func::from_name(&name).ok_or(Error::UnknownFunction {
                    name: name.clone(),
                    pos,
                })?;
                self.bump();
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                if args.len() != 1 {
                    return Err(Error::Syntax {
                        pos,
                        msg: format!("`{name}` takes 1 argument, got {}", args.len()),
                    });
                }
                Ok(Expr::apply(func, args.pop().unwrap()))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Eof => Err(Error::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            other => Err(Error::Syntax {
                pos,
                msg: format!("unexpected token {other:?}"),
            }),
        }
    }
}

/// Parses an expression.
///
/// Precedence from loosest to tightest: `+ -`, `* /`, unary minus, `^`.
/// `^` is right-associative and its exponent may carry a leading minus.
pub fn parse(text: &str) -> Result<Expr> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, cursor: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}
