//! The sentence-generation template language.
//!
//! Templates are plain text with three constructs:
//!
//! * `{path}` / `{fn(args)}` — interpolation of a context binding or builtin
//! * `#if(expr)` ... `#elif(expr)` ... `#else` ... `#end` — conditionals
//! * `{{` and `##` — escapes for literal `{` and `#`
//!
//! Expressions support dotted paths, integer and double-quoted string
//! literals, the comparisons `== != < <= > >=`, `&&` / `||`, and parentheses.
//! Builtins: `ordinal(n)` ("1st", "2nd", ..., with the 11/12/13 exceptions)
//! and `minute(n)` (plain decimal text). There are no loops: repetition lives
//! in the host generator, so rendering always terminates.
//!
//! A [`TemplateBank`] maps generation keys to one or more alternative
//! templates; [`TemplateBank::select`] picks one uniformly from a
//! [`SplitMix64`](crate::rng::SplitMix64) stream so identical seeds give
//! identical articles.

mod bank;
mod parser;
mod render;
mod source;

pub use bank::TemplateBank;
pub use parser::parse_template;
pub use render::render;

use std::collections::BTreeMap;

use thiserror::Error;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl Pos {
    pub fn new(line: u32, column: u32) -> Self {
        Self { line, column }
    }
}

/// Comparison operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

/// Expression tree. Positions live on the enclosing [`Node`]; expressions are
/// compared structurally with derived equality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// Dotted context path, e.g. `prior.home`.
    Path(Vec<String>),
    Int(i64),
    Str(String),
    /// Builtin call; names are validated at parse time.
    Call {
        name: String,
        args: Vec<Expr>,
    },
    Compare {
        op: CmpOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

/// One `#if` / `#elif` arm.
#[derive(Debug, Clone)]
pub struct IfBranch {
    pub condition: Expr,
    pub body: Vec<Node>,
}

/// Template AST node.
#[derive(Debug, Clone)]
pub enum Node {
    Text {
        literal: String,
        pos: Pos,
    },
    Interp {
        expr: Expr,
        pos: Pos,
    },
    If {
        branches: Vec<IfBranch>,
        else_body: Option<Vec<Node>>,
        pos: Pos,
    },
}

impl Node {
    pub fn pos(&self) -> Pos {
        match self {
            Node::Text { pos, .. } | Node::Interp { pos, .. } | Node::If { pos, .. } => *pos,
        }
    }

    /// Equality ignoring source positions.
    pub fn structural_eq(&self, other: &Node) -> bool {
        match (self, other) {
            (Node::Text { literal: a, .. }, Node::Text { literal: b, .. }) => a == b,
            (Node::Interp { expr: a, .. }, Node::Interp { expr: b, .. }) => a == b,
            (
                Node::If {
                    branches: ba,
                    else_body: ea,
                    ..
                },
                Node::If {
                    branches: bb,
                    else_body: eb,
                    ..
                },
            ) => {
                ba.len() == bb.len()
                    && ba.iter().zip(bb).all(|(x, y)| {
                        x.condition == y.condition && nodes_structural_eq(&x.body, &y.body)
                    })
                    && match (ea, eb) {
                        (None, None) => true,
                        (Some(x), Some(y)) => nodes_structural_eq(x, y),
                        _ => false,
                    }
            }
            _ => false,
        }
    }
}

pub(crate) fn nodes_structural_eq(a: &[Node], b: &[Node]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.structural_eq(y))
}

/// A parsed template.
#[derive(Debug, Clone)]
pub struct TemplateProgram {
    pub nodes: Vec<Node>,
    pub source_name: String,
}

impl TemplateProgram {
    /// Equality ignoring source positions and the template name.
    pub fn structural_eq(&self, other: &TemplateProgram) -> bool {
        nodes_structural_eq(&self.nodes, &other.nodes)
    }
}

/// Scalar values a context can bind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Text(String),
    Int(i64),
    Bool(bool),
}

impl Value {
    pub(crate) fn kind(&self) -> &'static str {
        match self {
            Value::Text(_) => "text",
            Value::Int(_) => "integer",
            Value::Bool(_) => "boolean",
        }
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

/// Bindings plus the seed of the random stream used for template selection.
/// Looking up an unbound path is a hard render error, never silent empty text.
#[derive(Debug, Clone, Default)]
pub struct RenderContext {
    pub bindings: BTreeMap<String, Value>,
    pub rng_seed: u64,
}

impl RenderContext {
    pub fn new(rng_seed: u64) -> Self {
        Self {
            bindings: BTreeMap::new(),
            rng_seed,
        }
    }

    pub fn bind(mut self, path: &str, value: impl Into<Value>) -> Self {
        self.bindings.insert(path.to_string(), value.into());
        self
    }

    pub fn insert(&mut self, path: &str, value: impl Into<Value>) {
        self.bindings.insert(path.to_string(), value.into());
    }

    pub fn lookup(&self, path: &str) -> Option<&Value> {
        self.bindings.get(path)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TemplateError {
    #[error("{name}:{line}:{column}: syntax error: {message}")]
    Syntax {
        name: String,
        line: u32,
        column: u32,
        message: String,
    },
    #[error("{name}:{line}:{column}: unbound path {path:?}")]
    UnboundPath {
        name: String,
        line: u32,
        column: u32,
        path: String,
    },
    #[error("{name}:{line}:{column}: type mismatch: {message}")]
    TypeMismatch {
        name: String,
        line: u32,
        column: u32,
        message: String,
    },
    #[error("no templates under key {key:?}")]
    MissingKey { key: String },
    #[error("template bank {name:?} line {line}: {message}")]
    Bank {
        name: String,
        line: usize,
        message: String,
    },
}
