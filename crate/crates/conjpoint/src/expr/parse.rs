//! Recursive-descent parser for the expression grammar.

use super::{expression_from_parts, BinOp, Expression, Func, NamedConst, Node, NodeKind};

/// Syntax or lookup failure at a byte position in the source.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at position {position}: {message} (expected {expected})")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
    /// Human-readable set of tokens that would have been accepted.
    pub expected: String,
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

pub fn parse(source: &str) -> Result<Expression, ParseError> {
    let mut p = Parser {
        src: source,
        bytes: source.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.pos >= p.bytes.len() {
        return Err(ParseError {
            position: 0,
            message: "empty expression".into(),
            expected: "a term".into(),
        });
    }
    let root = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.err("unexpected trailing input", "end of input or an operator"));
    }
    Ok(expression_from_parts(root, source.to_string()))
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str, expected: &str) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.into(),
            expected: expected.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Node {
                        span: (start, self.pos),
                        kind: NodeKind::Binary(BinOp::Add, Box::new(lhs), Box::new(rhs)),
                    };
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Node {
                        span: (start, self.pos),
                        kind: NodeKind::Binary(BinOp::Sub, Box::new(lhs), Box::new(rhs)),
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Node {
                        span: (start, self.pos),
                        kind: NodeKind::Binary(BinOp::Mul, Box::new(lhs), Box::new(rhs)),
                    };
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Node {
                        span: (start, self.pos),
                        kind: NodeKind::Binary(BinOp::Div, Box::new(lhs), Box::new(rhs)),
                    };
                }
                _ => return Ok(lhs),
            }
        }
    }

    // factor := '-' factor | power  (so -x^2 parses as -(x^2))
    fn factor(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.factor()?;
            return Ok(Node {
                span: (start, self.pos),
                kind: NodeKind::Neg(Box::new(inner)),
            });
        }
        self.power()
    }

    // power := atom ('^' factor)?   right-associative via factor recursion
    fn power(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.factor()?;
            return Ok(Node {
                span: (start, self.pos),
                kind: NodeKind::Binary(BinOp::Pow, Box::new(base), Box::new(exp)),
            });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            None => Err(self.err("unexpected end of input", "a number, name, or '('")),
            Some(b'(') => {
                let start = self.pos;
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("unbalanced parenthesis", "')'"));
                }
                self.pos += 1;
                Ok(Node {
                    span: (start, self.pos),
                    kind: inner.kind,
                })
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.err("unexpected character", "a number, name, or '('")),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            let frac_start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == frac_start {
                return Err(self.err("malformed number", "digits after '.'"));
            }
        }
        if self.pos < self.bytes.len() && (self.bytes[self.pos] | 0x20) == b'e' {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.bytes.len() && (self.bytes[self.pos] == b'+' || self.bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            let exp_start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == exp_start {
                // not an exponent after all; "2e" could be "2*e" mistyped, reject clearly
                self.pos = mark;
                return Err(ParseError {
                    position: mark,
                    message: "malformed exponent".into(),
                    expected: "digits after 'e'".into(),
                });
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text.parse().map_err(|_| ParseError {
            position: start,
            message: format!("cannot parse number `{text}`"),
            expected: "a numeric literal".into(),
        })?;
        Ok(Node {
            span: (start, self.pos),
            kind: NodeKind::Number(value),
        })
    }

    fn ident(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        match name {
            "r" => Ok(Node {
                span: (start, self.pos),
                kind: NodeKind::Var,
            }),
            "pi" => Ok(Node {
                span: (start, self.pos),
                kind: NodeKind::Const(NamedConst::Pi),
            }),
            "e" => Ok(Node {
                span: (start, self.pos),
                kind: NodeKind::Const(NamedConst::E),
            }),
            _ => {
                if let Some(func) = Func::from_name(name) {
                    if self.peek() != Some(b'(') {
                        return Err(self.err("function call needs parentheses", "'('"));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    if self.peek() != Some(b')') {
                        return Err(self.err("unbalanced parenthesis", "')'"));
                    }
                    self.pos += 1;
                    Ok(Node {
                        span: (start, self.pos),
                        kind: NodeKind::Call(func, Box::new(arg)),
                    })
                } else {
                    Err(ParseError {
                        position: start,
                        message: format!("unknown identifier `{name}`"),
                        expected: "r, pi, e, or a function name".into(),
                    })
                }
            }
        }
    }
}
