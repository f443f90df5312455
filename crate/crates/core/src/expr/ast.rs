use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn join(self, other: Span) -> Span {
        Span { start: self.start.min(other.start), end: self.end.max(other.end) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AstKind {
    Literal(f64),
    Variable(String),
    Neg(Box<Ast>),
    Binary(BinaryOp, Box<Ast>, Box<Ast>),
    Call(Func, Box<Ast>),
}

/// Expression tree. Equality compares structure only, never spans.
#[derive(Clone, Debug)]
pub struct Ast {
    pub kind: AstKind,
    pub span: Span,
}

impl PartialEq for Ast {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Ast {
    pub fn new(kind: AstKind, span: Span) -> Self {
        Self { kind, span }
    }

    /// Free variable names in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        fn walk(ast: &Ast, out: &mut Vec<String>) {
            match &ast.kind {
                AstKind::Literal(_) => {}
                AstKind::Variable(v) => {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                AstKind::Neg(a) | AstKind::Call(_, a) => walk(a, out),
                AstKind::Binary(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

/// Fully parenthesized rendering; re-parsing it yields an equal tree.
impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            AstKind::Literal(v) if *v < 0.0 => write!(f, "(-{:?})", -v),
            AstKind::Literal(v) => write!(f, "{v:?}"),
            AstKind::Variable(name) => f.write_str(name),
            AstKind::Neg(a) => write!(f, "(-{a})"),
            AstKind::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            AstKind::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
