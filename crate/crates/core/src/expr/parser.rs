use super::ast::{Ast, AstKind, BinaryOp, Func, Span};
use super::lexer::{tokenize, Token, TokenKind};
use super::ExprError;

/// Binding power of unary minus; sits between `* /` and `^`.
const UNARY_BP: u8 = 5;

fn infix(kind: &TokenKind) -> Option<(BinaryOp, u8, u8)> {
    Some(match kind {
        TokenKind::Plus => (BinaryOp::Add, 1, 2),
        TokenKind::Minus => (BinaryOp::Sub, 1, 2),
        TokenKind::Star => (BinaryOp::Mul, 3, 4),
        TokenKind::Slash => (BinaryOp::Div, 3, 4),
        // Right associative; the right operand is parsed at unary level.
        TokenKind::Caret => (BinaryOp::Pow, 8, UNARY_BP),
        _ => return None,
    })
}

const OPERAND: &[&str] = &["number", "identifier", "`(`", "`-`"];

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: Vec<&'static str>) -> ExprError {
        let t = self.peek();
        ExprError::Syntax { offset: t.start, expected, found: t.kind.describe() }
    }

    fn expect_rparen(&mut self) -> Result<Token, ExprError> {
        if self.peek().kind == TokenKind::RParen {
            Ok(self.bump())
        } else {
            Err(self.error(vec!["operator", "`)`"]))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Ast, ExprError> {
        let mut lhs = self.prefix()?;
        while let Some((op, lbp, rbp)) = infix(&self.peek().kind) {
            if lbp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.expr(rbp)?;
            let span = lhs.span.join(rhs.span);
            lhs = Ast::new(AstKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Ast, ExprError> {
        let tok = self.peek().clone();
        let span = Span { start: tok.start, end: tok.end };
        match tok.kind {
            TokenKind::Number(v) => {
                self.bump();
                Ok(Ast::new(AstKind::Literal(v), span))
            }
            TokenKind::Minus => {
                self.bump();
                let operand = self.expr(UNARY_BP)?;
                let span = span.join(operand.span);
                Ok(Ast::new(AstKind::Neg(Box::new(operand)), span))
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.nested()?;
                self.expect_rparen()?;
                // Parentheses only group; the inner node keeps its own span.
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    if self.peek().kind != TokenKind::LParen {
                        return Err(self.error(vec!["`(`"]));
                    }
                    self.bump();
                    let arg = self.nested()?;
                    let close = self.expect_rparen()?;
                    let span = Span { start: tok.start, end: close.end };
                    Ok(Ast::new(AstKind::Call(func, Box::new(arg)), span))
                } else if name == "pi" {
                    Ok(Ast::new(AstKind::Literal(std::f64::consts::PI), span))
                } else {
                    Ok(Ast::new(AstKind::Variable(name), span))
                }
            }
            _ => Err(self.error(OPERAND.to_vec())),
        }
    }

    fn nested(&mut self) -> Result<Ast, ExprError> {
        self.depth += 1;
        if self.depth > 256 {
            return Err(self.error(vec!["shallower nesting"]));
        }
        let out = self.expr(0);
        self.depth -= 1;
        out
    }
}

/// Parse a complete expression.
pub fn parse(src: &str) -> Result<Ast, ExprError> {
    let mut p = Parser { tokens: tokenize(src)?, pos: 0, depth: 0 };
    let ast = p.expr(0)?;
    if p.peek().kind == TokenKind::Eof {
        Ok(ast)
    } else {
        Err(p.error(vec!["operator", "end of input"]))
    }
}
