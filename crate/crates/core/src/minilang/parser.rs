//! Recursive-descent parser producing a `Program` with pre-order ids
//! already assigned. Parse failures are reported as diagnostics with byte
//! offsets; the parser never panics on malformed input.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::typecheck::{Diagnostic, DiagnosticKind, Location};

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

fn parse_error(offset: usize, message: String) -> Diagnostic {
    Diagnostic {
        kind: DiagnosticKind::ParseError,
        location: Location::Offset(offset),
        message,
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> PResult<Token> {
        if self.peek().tok == want {
            Ok(self.advance())
        } else {
            let got = self.peek();
            Err(parse_error(got.offset, format!("expected '{}', found '{}'", want, got.tok)))
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<(String, usize)> {
        match &self.peek().tok {
            Tok::Ident(name) => {
                let name = name.clone();
                let offset = self.peek().offset;
                self.advance();
                Ok((name, offset))
            }
            other => Err(parse_error(self.peek().offset, format!("expected {}, found '{}'", what, other))),
        }
    }

    // -- types --------------------------------------------------------------

    fn parse_type(&mut self) -> PResult<StaticType> {
        match &self.peek().tok {
            Tok::Ident(name) => {
                let ty = match name.as_str() {
                    "int" => StaticType::Int,
                    "bool" => StaticType::Bool,
                    "str" => StaticType::Str,
                    other => {
                        return Err(parse_error(
                            self.peek().offset,
                            format!("unknown type '{}' (expected int, bool, str, or [T])", other),
                        ))
                    }
                };
                self.advance();
                Ok(ty)
            }
            Tok::LBracket => {
                self.advance();
                let inner = self.parse_type()?;
                self.expect(Tok::RBracket)?;
                Ok(StaticType::list_of(inner))
            }
            other => Err(parse_error(self.peek().offset, format!("expected a type, found '{}'", other))),
        }
    }

    // -- expressions --------------------------------------------------------

    fn parse_expr(&mut self) -> PResult<Expr> {
        self.parse_or()
    }

    fn parse_or(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_and()?;
        while self.peek().tok == Tok::OrOr {
            self.advance();
            let rhs = self.parse_and()?;
            lhs = Expr::Binary { op: BinaryOp::Or, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_equality()?;
        while self.peek().tok == Tok::AndAnd {
            self.advance();
            let rhs = self.parse_equality()?;
            lhs = Expr::Binary { op: BinaryOp::And, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_equality(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_comparison()?;
        loop {
            let op = match self.peek().tok {
                Tok::EqEq => BinaryOp::Eq,
                Tok::NotEq => BinaryOp::Ne,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_comparison()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_comparison(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_additive()?;
        loop {
            let op = match self.peek().tok {
                Tok::Lt => BinaryOp::Lt,
                Tok::Le => BinaryOp::Le,
                Tok::Gt => BinaryOp::Gt,
                Tok::Ge => BinaryOp::Ge,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_additive()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_multiplicative()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                Tok::Percent => BinaryOp::Rem,
                _ => break,
            };
            self.advance();
            let rhs = self.parse_unary()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        match self.peek().tok {
            Tok::Minus => {
                self.advance();
                let operand = self.parse_unary()?;
                Ok(Expr::Unary { op: UnaryOp::Neg, operand: Box::new(operand) })
            }
            Tok::Bang => {
                self.advance();
                let operand = self.parse_unary()?;
                Ok(Expr::Unary { op: UnaryOp::Not, operand: Box::new(operand) })
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> PResult<Expr> {
        let token = self.peek().clone();
        match token.tok {
            Tok::Int(v) => {
                self.advance();
                Ok(Expr::IntLit(v))
            }
            Tok::True => {
                self.advance();
                Ok(Expr::BoolLit(true))
            }
            Tok::False => {
                self.advance();
                Ok(Expr::BoolLit(false))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::StrLit(s))
            }
            Tok::LBracket => {
                self.advance();
                let mut items = Vec::new();
                if self.peek().tok != Tok::RBracket {
                    loop {
                        items.push(self.parse_expr()?);
                        if self.peek().tok == Tok::Comma {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket)?;
                Ok(Expr::ListLit(items))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.advance();
                if self.peek().tok == Tok::LParen {
                    self.advance();
                    let mut args = Vec::new();
                    if self.peek().tok != Tok::RParen {
                        loop {
                            args.push(self.parse_expr()?);
                            if self.peek().tok == Tok::Comma {
                                self.advance();
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    if let Some(builtin) = Builtin::from_name(&name) {
                        Ok(Expr::BuiltinCall { builtin, args })
                    } else {
                        Ok(Expr::Call { function: name, args })
                    }
                } else {
                    Ok(Expr::Var(name))
                }
            }
            other => Err(parse_error(token.offset, format!("expected an expression, found '{}'", other))),
        }
    }

    // -- statements ---------------------------------------------------------

    fn parse_block(&mut self) -> PResult<Block> {
        self.expect(Tok::LBrace)?;
        let mut statements = Vec::new();
        while self.peek().tok != Tok::RBrace {
            if self.peek().tok == Tok::Eof {
                return Err(parse_error(self.peek().offset, "unexpected end of input inside block".into()));
            }
            statements.push(self.parse_statement()?);
        }
        self.expect(Tok::RBrace)?;
        Ok(Block { statements })
    }

    fn parse_statement(&mut self) -> PResult<Statement> {
        let token = self.peek().clone();
        let kind = match token.tok {
            Tok::Let => {
                self.advance();
                let (name, _) = self.expect_ident("a variable name after 'let'")?;
                self.expect(Tok::Colon)?;
                let declared_type = self.parse_type()?;
                self.expect(Tok::Assign)?;
                let init = self.parse_expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Let { name, declared_type, init }
            }
            Tok::If => {
                self.advance();
                let cond = self.parse_expr()?;
                let then_block = self.parse_block()?;
                let else_block = if self.peek().tok == Tok::Else {
                    self.advance();
                    Some(self.parse_block()?)
                } else {
                    None
                };
                StmtKind::If { cond, then_block, else_block }
            }
            Tok::While => {
                self.advance();
                let cond = self.parse_expr()?;
                let body = self.parse_block()?;
                StmtKind::While { cond, body }
            }
            Tok::Return => {
                self.advance();
                if self.peek().tok == Tok::Semi {
                    self.advance();
                    StmtKind::Return(None)
                } else {
                    let value = self.parse_expr()?;
                    self.expect(Tok::Semi)?;
                    StmtKind::Return(Some(value))
                }
            }
            Tok::LBrace => {
                let inner = self.parse_block()?;
                StmtKind::Block(inner)
            }
            Tok::Ident(ref name) if self.tokens[self.pos + 1].tok == Tok::Assign => {
                let target = name.clone();
                self.advance();
                self.advance();
                let value = self.parse_expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Assign { target, value }
            }
            _ => {
                let expr = self.parse_expr()?;
                self.expect(Tok::Semi)?;
                StmtKind::Expr(expr)
            }
        };
        Ok(Statement::new(kind))
    }

    fn parse_function(&mut self) -> PResult<Function> {
        self.expect(Tok::Fn)?;
        let (name, _) = self.expect_ident("a function name after 'fn'")?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if self.peek().tok != Tok::RParen {
            loop {
                let (pname, _) = self.expect_ident("a parameter name")?;
                self.expect(Tok::Colon)?;
                let ty = self.parse_type()?;
                params.push(Param { name: pname, ty });
                if self.peek().tok == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let return_type = if self.peek().tok == Tok::Arrow {
            self.advance();
            self.parse_type()?
        } else {
            StaticType::Void
        };
        let body = self.parse_block()?;
        Ok(Function { name, params, return_type, body })
    }

    fn parse_program(&mut self) -> PResult<Program> {
        let mut functions = Vec::new();
        while self.peek().tok != Tok::Eof {
            functions.push(self.parse_function()?);
        }
        Ok(Program { functions })
    }
}

/// Parses a full compilation unit. On success the returned program already
/// carries pre-order statement ids.
pub fn parse_program(source: &str) -> Result<Program, Vec<Diagnostic>> {
    let tokens = match lex(source) {
        Ok(t) => t,
        Err(e) => {
            return Err(vec![parse_error(e.offset, e.message)]);
        }
    };
    let mut parser = Parser { tokens, pos: 0 };
    match parser.parse_program() {
        Ok(mut program) => {
            program.renumber();
            Ok(program)
        }
        Err(diag) => Err(vec![diag]),
    }
}
