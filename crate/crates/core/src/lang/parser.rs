//! Recursive-descent parser for priority expressions.
//!
//! ```text
//! expr  := cmp
//! cmp   := sum (("<" | "<=" | ">" | ">=" | "==") sum)?
//! sum   := prod (("+" | "-") prod)*
//! prod  := unary (("*" | "/") unary)*
//! unary := "-" unary | atom
//! atom  := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
//! ```

use thiserror::Error;

use super::ast::{BinOp, CmpOp, Expr, Feature, Func, MAX_NODES};

/// Nesting limit; keeps recursion bounded for adversarial input.
const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at {position}")]
    UnknownIdentifier { position: usize, name: String },
    #[error("program has {nodes} nodes, limit is {limit}")]
    TooLarge { nodes: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(&'static str),
    LParen,
    RParen,
    Comma,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek_byte(&self, offset: usize) -> Option<u8> {
        self.src.as_bytes().get(self.pos + offset).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        while self.peek_byte(0).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(b) = self.peek_byte(0) else {
            return Ok((Tok::End, start));
        };
        let two = |lx: &Self, second: u8| lx.peek_byte(1) == Some(second);
        let tok = match b {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'+' => Tok::Op("+"),
            b'-' => Tok::Op("-"),
            b'*' => Tok::Op("*"),
            b'/' => Tok::Op("/"),
            b'<' if two(self, b'=') => Tok::Op("<="),
            b'<' => Tok::Op("<"),
            b'>' if two(self, b'=') => Tok::Op(">="),
            b'>' => Tok::Op(">"),
            b'=' if two(self, b'=') => Tok::Op("=="),
            b'0'..=b'9' | b'.' => return self.number(start),
            b if b.is_ascii_alphabetic() || b == b'_' => {
                while self
                    .peek_byte(0)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    self.pos += 1;
                }
                return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(ParseError::Syntax {
                    position: start,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        self.pos += match tok {
            Tok::Op(s) => s.len(),
            _ => 1,
        };
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let digits = |lx: &mut Self| {
            let from = lx.pos;
            while lx.peek_byte(0).is_some_and(|c| c.is_ascii_digit()) {
                lx.pos += 1;
            }
            lx.pos - from
        };
        let mut count = digits(self);
        if self.peek_byte(0) == Some(b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return Err(ParseError::Syntax {
                position: start,
                message: "malformed number".into(),
            });
        }
        if matches!(self.peek_byte(0), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek_byte(0), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = &self.src[start..self.pos];
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((Tok::Num(v), start)),
            _ => Err(ParseError::Syntax {
                position: start,
                message: format!("number `{text}` out of range"),
            }),
        }
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn position(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        tok
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            position: self.position(),
            message: message.into(),
        })
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.error(format!(
                "expected {what}, found {}",
                Self::describe(self.peek())
            ))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.error("expression nested too deeply");
        }
        let lhs = self.sum()?;
        let op = match self.peek() {
            Tok::Op("<") => CmpOp::Lt,
            Tok::Op("<=") => CmpOp::Le,
            Tok::Op(">") => CmpOp::Gt,
            Tok::Op(">=") => CmpOp::Ge,
            Tok::Op("==") => CmpOp::Eq,
            _ => {
                self.depth -= 1;
                return Ok(lhs);
            }
        };
        self.bump();
        let rhs = self.sum()?;
        self.depth -= 1;
        Ok(Expr::Compare(op, Box::new(lhs), Box::new(rhs)))
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.prod()?;
        loop {
            let op = match self.peek() {
                Tok::Op("+") => BinOp::Add,
                Tok::Op("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.prod()?);
        }
    }

    fn prod(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op("*") => BinOp::Mul,
                Tok::Op("/") => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        let mut negations = 0;
        while *self.peek() == Tok::Op("-") {
            self.bump();
            negations += 1;
            if negations > MAX_DEPTH {
                return self.error("expression nested too deeply");
            }
        }
        let mut e = self.atom()?;
        for _ in 0..negations {
            e = Expr::Neg(Box::new(e));
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let position = self.position();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    self.call(func)
                } else if let Some(feat) = Feature::from_name(&name) {
                    Ok(Expr::Feature(feat))
                } else {
                    Err(ParseError::UnknownIdentifier { position, name })
                }
            }
            tok => Err(ParseError::Syntax {
                position,
                message: format!("expected an operand, found {}", Self::describe(&tok)),
            }),
        }
    }

    fn call(&mut self, func: Func) -> Result<Expr, ParseError> {
        self.expect(Tok::LParen, &format!("`(` after `{}`", func.name()))?;
        let mut args = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr()?);
        }
        if args.len() != func.arity() {
            return self.error(format!(
                "`{}` takes {} argument(s), got {}",
                func.name(),
                func.arity(),
                args.len()
            ));
        }
        self.expect(Tok::RParen, "`)` or `,`")?;
        Ok(Expr::Call(func, args))
    }
}

/// Parses `source` into an expression tree, enforcing the node cap.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::tokens(source)?;
    let mut p = Parser {
        toks,
        at: 0,
        depth: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error(format!("unexpected {}", Parser::describe(p.peek())));
    }
    let nodes = e.node_count();
    if nodes > MAX_NODES {
        return Err(ParseError::TooLarge {
            nodes,
            limit: MAX_NODES,
        });
    }
    Ok(e)
}
