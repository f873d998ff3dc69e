//! Canonical source rendering. `parse(pretty_print(t))` reproduces `t`
//! exactly, ids included, because ids are a pure function of tree shape.
//!
//! Format: four-space indent, one statement per line, functions separated
//! by a blank line, parentheses only where precedence demands them.

use super::ast::*;

fn precedence(op: BinaryOp) -> u8 {
    match op {
        BinaryOp::Or => 1,
        BinaryOp::And => 2,
        BinaryOp::Eq | BinaryOp::Ne => 3,
        BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
        BinaryOp::Add | BinaryOp::Sub => 5,
        BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 6,
    }
}

const UNARY_PREC: u8 = 7;

fn expr_prec(expr: &Expr) -> u8 {
    match expr {
        Expr::Binary { op, .. } => precedence(*op),
        Expr::Unary { .. } => UNARY_PREC,
        _ => u8::MAX,
    }
}

pub fn escape_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            other => out.push(other),
        }
    }
    out.push('"');
    out
}

fn write_expr(out: &mut String, expr: &Expr) {
    match expr {
        Expr::IntLit(v) => out.push_str(&v.to_string()),
        Expr::BoolLit(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::StrLit(s) => out.push_str(&escape_str(s)),
        Expr::ListLit(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, item);
            }
            out.push(']');
        }
        Expr::Var(name) => out.push_str(name),
        Expr::Unary { op, operand } => {
            out.push(match op {
                UnaryOp::Neg => '-',
                UnaryOp::Not => '!',
            });
            if expr_prec(operand) < UNARY_PREC {
                out.push('(');
                write_expr(out, operand);
                out.push(')');
            } else {
                write_expr(out, operand);
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let prec = precedence(*op);
            if expr_prec(lhs) < prec {
                out.push('(');
                write_expr(out, lhs);
                out.push(')');
            } else {
                write_expr(out, lhs);
            }
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            // Binary operators are left-associative, so an equal-precedence
            // right child needs parentheses to reparse identically.
            if expr_prec(rhs) <= prec {
                out.push('(');
                write_expr(out, rhs);
                out.push(')');
            } else {
                write_expr(out, rhs);
            }
        }
        Expr::Call { function, args } => {
            out.push_str(function);
            write_args(out, args);
        }
        Expr::BuiltinCall { builtin, args } => {
            out.push_str(builtin.name());
            write_args(out, args);
        }
    }
}

fn write_args(out: &mut String, args: &[Expr]) {
    out.push('(');
    for (i, arg) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, arg);
    }
    out.push(')');
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn write_block_body(out: &mut String, block: &Block, level: usize) {
    out.push_str("{\n");
    for stmt in &block.statements {
        write_stmt(out, stmt, level + 1);
    }
    indent(out, level);
    out.push('}');
}

fn write_stmt(out: &mut String, stmt: &Statement, level: usize) {
    indent(out, level);
    match &stmt.kind {
        StmtKind::Let { name, declared_type, init } => {
            out.push_str("let ");
            out.push_str(name);
            out.push_str(": ");
            out.push_str(&declared_type.to_string());
            out.push_str(" = ");
            write_expr(out, init);
            out.push_str(";\n");
        }
        StmtKind::Assign { target, value } => {
            out.push_str(target);
            out.push_str(" = ");
            write_expr(out, value);
            out.push_str(";\n");
        }
        StmtKind::Expr(e) => {
            write_expr(out, e);
            out.push_str(";\n");
        }
        StmtKind::If { cond, then_block, else_block } => {
            out.push_str("if ");
            write_expr(out, cond);
            out.push(' ');
            write_block_body(out, then_block, level);
            if let Some(els) = else_block {
                out.push_str(" else ");
                write_block_body(out, els, level);
            }
            out.push('\n');
        }
        StmtKind::While { cond, body } => {
            out.push_str("while ");
            write_expr(out, cond);
            out.push(' ');
            write_block_body(out, body, level);
            out.push('\n');
        }
        StmtKind::Return(value) => {
            out.push_str("return");
            if let Some(e) = value {
                out.push(' ');
                write_expr(out, e);
            }
            out.push_str(";\n");
        }
        StmtKind::Block(inner) => {
            write_block_body(out, inner, level);
            out.push('\n');
        }
    }
}

/// Renders a single statement at indent level zero, without trailing
/// newline. Used by diff-friendly logs and tests.
pub fn pretty_statement(stmt: &Statement) -> String {
    let mut out = String::new();
    write_stmt(&mut out, stmt, 0);
    out.trim_end().to_string()
}

/// Canonical rendering of the whole program, LF newlines throughout.
pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for (i, func) in program.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str("fn ");
        out.push_str(&func.name);
        out.push('(');
        for (j, p) in func.params.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str(&p.name);
            out.push_str(": ");
            out.push_str(&p.ty.to_string());
        }
        out.push(')');
        if !func.return_type.is_void() {
            out.push_str(" -> ");
            out.push_str(&func.return_type.to_string());
        }
        out.push(' ');
        write_block_body(&mut out, &func.body, 0);
        out.push('\n');
    }
    out
}
