//! Closed-form expressions of one variable `r`, with exact derivatives.
//!
//! The grammar covers `+ - * / ^`, unary minus, the functions
//! sin cos tan sinh cosh tanh exp ln sqrt abs, the constants `pi` and `e`,
//! numeric literals, and the variable `r`. Evaluation propagates a
//! fourth-order jet through the tree, so quantities like G''''(0) come out
//! exact rather than finite-differenced.

mod jet;
mod parse;

pub use jet::{Jet4, JetError, JET_LEN};
pub use parse::{parse, ParseError};

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedConst {
    Pi,
    E,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum NodeKind {
    Number(f64),
    Const(NamedConst),
    Var,
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub(crate) kind: NodeKind,
    /// Byte span in the original source, for diagnostics.
    pub(crate) span: (usize, usize),
}

// Structural equality only; spans shift under print/reparse.
impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

/// A parsed, immutable expression of the variable `r`.
#[derive(Debug, Clone)]
pub struct Expression {
    root: Node,
    source: String,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

/// Evaluation failure, pointing at the offending subexpression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("domain error in `{subexpr}`: {kind}")]
pub struct EvalError {
    pub kind: JetError,
    /// Rendered source of the subexpression that failed.
    pub subexpr: String,
}

impl Expression {
    /// Parse from text. See [`parse`].
    pub fn parse(source: &str) -> Result<Expression, ParseError> {
        parse(source)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluate the expression and its derivatives at `r`.
    ///
    /// `order` bounds the derivatives the caller intends to use; it must be
    /// at most 4. The full jet is propagated either way since the cost is
    /// flat.
    pub fn eval_jet(&self, r: f64, order: usize) -> Result<Jet4, EvalError> {
        assert!(order < JET_LEN, "jet order must be at most 4");
        self.eval_node(&self.root, Jet4::variable(r))
    }

    /// Plain value at `r`.
    pub fn eval(&self, r: f64) -> Result<f64, EvalError> {
        Ok(self.eval_jet(r, 0)?.value())
    }

    fn eval_node(&self, node: &Node, var: Jet4) -> Result<Jet4, EvalError> {
        let fail = |kind: JetError| EvalError {
            kind,
            subexpr: self.snippet(node),
        };
        match &node.kind {
            NodeKind::Number(x) => Ok(Jet4::constant(*x)),
            NodeKind::Const(NamedConst::Pi) => Ok(Jet4::constant(std::f64::consts::PI)),
            NodeKind::Const(NamedConst::E) => Ok(Jet4::constant(std::f64::consts::E)),
            NodeKind::Var => Ok(var),
            NodeKind::Neg(inner) => Ok(-self.eval_node(inner, var)?),
            NodeKind::Binary(op, lhs, rhs) => {
                let a = self.eval_node(lhs, var)?;
                let b = self.eval_node(rhs, var)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => a.try_div(b).map_err(fail),
                    BinOp::Pow => a.pow(b).map_err(fail),
                }
            }
            NodeKind::Call(func, arg) => {
                let a = self.eval_node(arg, var)?;
                match func {
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Tan => a.tan().map_err(fail),
                    Func::Sinh => Ok(a.sinh()),
                    Func::Cosh => Ok(a.cosh()),
                    Func::Tanh => a.tanh().map_err(fail),
                    Func::Exp => Ok(a.exp()),
                    Func::Ln => a.ln().map_err(fail),
                    Func::Sqrt => a.sqrt().map_err(fail),
                    Func::Abs => a.abs().map_err(fail),
                }
            }
        }
    }

    /// Original source text of a subexpression, for diagnostics.
    fn snippet(&self, node: &Node) -> String {
        let (a, b) = node.span;
        match self.source.get(a..b) {
            Some(s) => s.trim().to_string(),
            None => {
                let mut out = String::new();
                render_node(node, 0, &mut out);
                out
            }
        }
    }
}

fn precedence(kind: &NodeKind) -> u8 {
    match kind {
        NodeKind::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        NodeKind::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
        NodeKind::Neg(..) => 3,
        NodeKind::Binary(BinOp::Pow, ..) => 4,
        _ => 5,
    }
}

fn render_node(node: &Node, min_prec: u8, out: &mut String) {
    let prec = precedence(&node.kind);
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match &node.kind {
        NodeKind::Number(x) => {
            out.push_str(&format!("{x}"));
        }
        NodeKind::Const(NamedConst::Pi) => out.push_str("pi"),
        NodeKind::Const(NamedConst::E) => out.push('e'),
        NodeKind::Var => out.push('r'),
        NodeKind::Neg(inner) => {
            out.push('-');
            render_node(inner, prec + 1, out);
        }
        NodeKind::Binary(op, lhs, rhs) => {
            let (sym, lp, rp) = match op {
                BinOp::Add => (" + ", prec, prec),
                BinOp::Sub => (" - ", prec, prec + 1),
                BinOp::Mul => ("*", prec, prec),
                BinOp::Div => ("/", prec, prec + 1),
                BinOp::Pow => ("^", prec + 1, prec),
            };
            render_node(lhs, lp, out);
            out.push_str(sym);
            render_node(rhs, rp, out);
        }
        NodeKind::Call(func, arg) => {
            out.push_str(func.name());
            out.push('(');
            render_node(arg, 0, out);
            out.push(')');
        }
    }
    if parens {
        out.push(')');
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        render_node(&self.root, 0, &mut out);
        f.write_str(&out)
    }
}

pub(crate) fn expression_from_parts(root: Node, source: String) -> Expression {
    Expression { root, source }
}
