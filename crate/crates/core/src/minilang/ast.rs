//! Abstract syntax for MiniLang programs.
//!
//! A program is a flat list of functions; every statement carries a
//! `StatementId` assigned by pre-order traversal over the whole program.
//! Ids are recomputed after every structural edit so that a tree and its
//! pretty-printed/reparsed form always agree.

use std::fmt;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Static type of a MiniLang expression or variable.
///
/// `Void` is only legal as a function return type; it has no surface syntax
/// (a function with no `->` clause returns `Void`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StaticType {
    Int,
    Bool,
    Str,
    List(Box<StaticType>),
    Void,
}

impl fmt::Display for StaticType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StaticType::Int => write!(f, "int"),
            StaticType::Bool => write!(f, "bool"),
            StaticType::Str => write!(f, "str"),
            StaticType::List(inner) => write!(f, "[{}]", inner),
            StaticType::Void => write!(f, "void"),
        }
    }
}

impl StaticType {
    pub fn list_of(inner: StaticType) -> StaticType {
        StaticType::List(Box::new(inner))
    }

    pub fn is_void(&self) -> bool {
        matches!(self, StaticType::Void)
    }
}

// ---------------------------------------------------------------------------
// Statement identity
// ---------------------------------------------------------------------------

/// Index of a statement in the pre-order enumeration of the whole program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct StatementId(pub usize);

impl fmt::Display for StatementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Coarse statement classification, used by transformation preconditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StmtClass {
    Let,
    Assign,
    Expr,
    If,
    While,
    Return,
    Block,
}

impl StmtClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StmtClass::Let => "let",
            StmtClass::Assign => "assign",
            StmtClass::Expr => "expr",
            StmtClass::If => "if",
            StmtClass::While => "while",
            StmtClass::Return => "return",
            StmtClass::Block => "block",
        }
    }
}

impl fmt::Display for StmtClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(&self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }
}

/// The fixed builtin set. Builtin names are reserved: user code may not
/// declare functions, parameters, or variables with these names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Print,
    Assert,
    Len,
    Push,
    Get,
    Set,
    Concat,
    ToStr,
    Uuid,
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Print => "print",
            Builtin::Assert => "assert",
            Builtin::Len => "len",
            Builtin::Push => "push",
            Builtin::Get => "get",
            Builtin::Set => "set",
            Builtin::Concat => "concat",
            Builtin::ToStr => "to_str",
            Builtin::Uuid => "uuid",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Some(match name {
            "print" => Builtin::Print,
            "assert" => Builtin::Assert,
            "len" => Builtin::Len,
            "push" => Builtin::Push,
            "get" => Builtin::Get,
            "set" => Builtin::Set,
            "concat" => Builtin::Concat,
            "to_str" => Builtin::ToStr,
            "uuid" => Builtin::Uuid,
            _ => return None,
        })
    }

    pub const ALL: [Builtin; 9] = [
        Builtin::Print,
        Builtin::Assert,
        Builtin::Len,
        Builtin::Push,
        Builtin::Get,
        Builtin::Set,
        Builtin::Concat,
        Builtin::ToStr,
        Builtin::Uuid,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    IntLit(i64),
    BoolLit(bool),
    StrLit(String),
    ListLit(Vec<Expr>),
    Var(String),
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        function: String,
        args: Vec<Expr>,
    },
    BuiltinCall {
        builtin: Builtin,
        args: Vec<Expr>,
    },
}

// ---------------------------------------------------------------------------
// Statements, blocks, functions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Statement {
    pub id: StatementId,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StmtKind {
    Let {
        name: String,
        declared_type: StaticType,
        init: Expr,
    },
    Assign {
        target: String,
        value: Expr,
    },
    Expr(Expr),
    If {
        cond: Expr,
        then_block: Block,
        else_block: Option<Block>,
    },
    While {
        cond: Expr,
        body: Block,
    },
    Return(Option<Expr>),
    Block(Block),
}

impl Statement {
    pub fn new(kind: StmtKind) -> Statement {
        Statement { id: StatementId(0), kind }
    }

    pub fn class(&self) -> StmtClass {
        match self.kind {
            StmtKind::Let { .. } => StmtClass::Let,
            StmtKind::Assign { .. } => StmtClass::Assign,
            StmtKind::Expr(_) => StmtClass::Expr,
            StmtKind::If { .. } => StmtClass::If,
            StmtKind::While { .. } => StmtClass::While,
            StmtKind::Return(_) => StmtClass::Return,
            StmtKind::Block(_) => StmtClass::Block,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Block {
    pub statements: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Param {
    pub name: String,
    pub ty: StaticType,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Function {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: StaticType,
    pub body: Block,
}

impl Function {
    /// Test functions are exactly those named `test_*` with no parameters
    /// and a `Void` return type.
    pub fn is_test(&self) -> bool {
        self.name.starts_with("test_") && self.params.is_empty() && self.return_type.is_void()
    }

    /// Rendered signature, as logged in call traces: `name(int,str)->bool`.
    pub fn signature(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|p| p.ty.to_string()).collect();
        format!("{}({})->{}", self.name, params.join(","), self.return_type)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Program {
    pub functions: Vec<Function>,
}

// ---------------------------------------------------------------------------
// Enumeration and id maintenance
// ---------------------------------------------------------------------------

/// One row of the pre-order statement listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatementEntry {
    pub id: StatementId,
    pub class: StmtClass,
    pub function: String,
}

fn walk_block<'a, F: FnMut(&'a Statement)>(block: &'a Block, f: &mut F) {
    for stmt in &block.statements {
        f(stmt);
        match &stmt.kind {
            StmtKind::If { then_block, else_block, .. } => {
                walk_block(then_block, f);
                if let Some(els) = else_block {
                    walk_block(els, f);
                }
            }
            StmtKind::While { body, .. } => walk_block(body, f),
            StmtKind::Block(inner) => walk_block(inner, f),
            _ => {}
        }
    }
}

fn walk_block_mut<F: FnMut(&mut Statement)>(block: &mut Block, f: &mut F) {
    for stmt in &mut block.statements {
        f(stmt);
        match &mut stmt.kind {
            StmtKind::If { then_block, else_block, .. } => {
                walk_block_mut(then_block, f);
                if let Some(els) = else_block {
                    walk_block_mut(els, f);
                }
            }
            StmtKind::While { body, .. } => walk_block_mut(body, f),
            StmtKind::Block(inner) => walk_block_mut(inner, f),
            _ => {}
        }
    }
}

impl Program {
    /// Reassigns every `StatementId` by pre-order traversal. Must be called
    /// after any structural edit; parsing does it automatically.
    pub fn renumber(&mut self) {
        let mut next = 0usize;
        for func in &mut self.functions {
            walk_block_mut(&mut func.body, &mut |stmt| {
                stmt.id = StatementId(next);
                next += 1;
            });
        }
    }

    /// Pre-order listing of every statement with its class and enclosing
    /// function. Stable across pretty-print/reparse round trips.
    pub fn enumerate_statements(&self) -> Vec<StatementEntry> {
        let mut out = Vec::new();
        for func in &self.functions {
            walk_block(&func.body, &mut |stmt| {
                out.push(StatementEntry {
                    id: stmt.id,
                    class: stmt.class(),
                    function: func.name.clone(),
                });
            });
        }
        out
    }

    pub fn statement_count(&self) -> usize {
        let mut n = 0usize;
        for func in &self.functions {
            walk_block(&func.body, &mut |_| n += 1);
        }
        n
    }

    pub fn find_function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn find_statement(&self, id: StatementId) -> Option<&Statement> {
        let mut found: Option<&Statement> = None;
        for func in &self.functions {
            walk_block(&func.body, &mut |stmt| {
                if stmt.id == id && found.is_none() {
                    found = Some(stmt);
                }
            });
        }
        found
    }

    /// Name of the function enclosing `id`, if the id exists.
    pub fn enclosing_function(&self, id: StatementId) -> Option<&Function> {
        for func in &self.functions {
            let mut hit = false;
            walk_block(&func.body, &mut |stmt| {
                if stmt.id == id {
                    hit = true;
                }
            });
            if hit {
                return Some(func);
            }
        }
        None
    }

    pub fn test_functions(&self) -> Vec<&Function> {
        self.functions.iter().filter(|f| f.is_test()).collect()
    }

    /// Ids of statements belonging to non-test (application) functions.
    /// Transformations draw both points and transplants from this set.
    pub fn application_statements(&self) -> Vec<StatementId> {
        let mut out = Vec::new();
        for func in &self.functions {
            if func.is_test() {
                continue;
            }
            walk_block(&func.body, &mut |stmt| out.push(stmt.id));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Structural edits
// ---------------------------------------------------------------------------

/// Outcome of a block-level edit attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOutcome {
    Done,
    NotFound,
}

fn edit_in_block<F>(block: &mut Block, id: StatementId, action: &mut F) -> bool
where
    F: FnMut(&mut Vec<Statement>, usize),
{
    if let Some(pos) = block.statements.iter().position(|s| s.id == id) {
        action(&mut block.statements, pos);
        return true;
    }
    for stmt in &mut block.statements {
        let hit = match &mut stmt.kind {
            StmtKind::If { then_block, else_block, .. } => {
                edit_in_block(then_block, id, action)
                    || else_block
                        .as_mut()
                        .map(|els| edit_in_block(els, id, action))
                        .unwrap_or(false)
            }
            StmtKind::While { body, .. } => edit_in_block(body, id, action),
            StmtKind::Block(inner) => edit_in_block(inner, id, action),
            _ => false,
        };
        if hit {
            return true;
        }
    }
    false
}

impl Program {
    /// Removes the statement with the given id. Ids are not renumbered here;
    /// callers renumber once all edits are in.
    pub fn remove_statement(&mut self, id: StatementId) -> EditOutcome {
        for func in &mut self.functions {
            if edit_in_block(&mut func.body, id, &mut |stmts, pos| {
                stmts.remove(pos);
            }) {
                return EditOutcome::Done;
            }
        }
        EditOutcome::NotFound
    }

    /// Inserts `new_stmt` immediately after the statement with the given id,
    /// in the same block. Insertion at the very beginning of a block is
    /// impossible by construction.
    pub fn insert_after(&mut self, id: StatementId, new_stmt: Statement) -> EditOutcome {
        let mut slot = Some(new_stmt);
        for func in &mut self.functions {
            if edit_in_block(&mut func.body, id, &mut |stmts, pos| {
                if let Some(s) = slot.take() {
                    stmts.insert(pos + 1, s);
                }
            }) {
                return EditOutcome::Done;
            }
        }
        EditOutcome::NotFound
    }

    /// Replaces the statement with the given id by `new_stmt`.
    pub fn replace_statement(&mut self, id: StatementId, new_stmt: Statement) -> EditOutcome {
        let mut slot = Some(new_stmt);
        for func in &mut self.functions {
            if edit_in_block(&mut func.body, id, &mut |stmts, pos| {
                if let Some(s) = slot.take() {
                    stmts[pos] = s;
                }
            }) {
                return EditOutcome::Done;
            }
        }
        EditOutcome::NotFound
    }
}

// ---------------------------------------------------------------------------
// Name scanning helpers
// ---------------------------------------------------------------------------

fn expr_var_names<'a>(expr: &'a Expr, out: &mut Vec<&'a str>) {
    match expr {
        Expr::Var(name) => out.push(name),
        Expr::Unary { operand, .. } => expr_var_names(operand, out),
        Expr::Binary { lhs, rhs, .. } => {
            expr_var_names(lhs, out);
            expr_var_names(rhs, out);
        }
        Expr::Call { args, .. } | Expr::BuiltinCall { args, .. } => {
            for a in args {
                expr_var_names(a, out);
            }
        }
        Expr::ListLit(items) => {
            for i in items {
                expr_var_names(i, out);
            }
        }
        Expr::IntLit(_) | Expr::BoolLit(_) | Expr::StrLit(_) => {}
    }
}

/// Every variable name mentioned anywhere in the statement: reads, assign
/// targets, and let binders, nested statements included.
pub fn names_used(stmt: &Statement) -> std::collections::BTreeSet<String> {
    let mut names: Vec<&str> = Vec::new();
    collect_names(stmt, &mut names);
    names.into_iter().map(|s| s.to_string()).collect()
}

fn collect_names<'a>(stmt: &'a Statement, out: &mut Vec<&'a str>) {
    match &stmt.kind {
        StmtKind::Let { name, init, .. } => {
            out.push(name);
            expr_var_names(init, out);
        }
        StmtKind::Assign { target, value } => {
            out.push(target);
            expr_var_names(value, out);
        }
        StmtKind::Expr(e) => expr_var_names(e, out),
        StmtKind::If { cond, then_block, else_block } => {
            expr_var_names(cond, out);
            for s in &then_block.statements {
                collect_names(s, out);
            }
            if let Some(els) = else_block {
                for s in &els.statements {
                    collect_names(s, out);
                }
            }
        }
        StmtKind::While { cond, body } => {
            expr_var_names(cond, out);
            for s in &body.statements {
                collect_names(s, out);
            }
        }
        StmtKind::Return(Some(e)) => expr_var_names(e, out),
        StmtKind::Return(None) => {}
        StmtKind::Block(inner) => {
            for s in &inner.statements {
                collect_names(s, out);
            }
        }
    }
}

/// Names declared by `let` anywhere inside the statement, the statement's own
/// binder included. Used to detect capture when rewriting variable names.
pub fn internal_binders(stmt: &Statement) -> std::collections::BTreeSet<String> {
    let mut out = std::collections::BTreeSet::new();
    collect_binders(stmt, &mut out);
    out
}

fn collect_binders(stmt: &Statement, out: &mut std::collections::BTreeSet<String>) {
    match &stmt.kind {
        StmtKind::Let { name, .. } => {
            out.insert(name.clone());
        }
        StmtKind::If { then_block, else_block, .. } => {
            for s in &then_block.statements {
                collect_binders(s, out);
            }
            if let Some(els) = else_block {
                for s in &els.statements {
                    collect_binders(s, out);
                }
            }
        }
        StmtKind::While { body, .. } => {
            for s in &body.statements {
                collect_binders(s, out);
            }
        }
        StmtKind::Block(inner) => {
            for s in &inner.statements {
                collect_binders(s, out);
            }
        }
        _ => {}
    }
}

// ---------------------------------------------------------------------------
// Free-occurrence renaming
// ---------------------------------------------------------------------------

fn rename_in_expr(expr: &mut Expr, mapping: &std::collections::BTreeMap<String, String>, bound: &[String]) {
    match expr {
        Expr::Var(name) => {
            if !bound.iter().any(|b| b == name) {
                if let Some(new) = mapping.get(name) {
                    *name = new.clone();
                }
            }
        }
        Expr::Unary { operand, .. } => rename_in_expr(operand, mapping, bound),
        Expr::Binary { lhs, rhs, .. } => {
            rename_in_expr(lhs, mapping, bound);
            rename_in_expr(rhs, mapping, bound);
        }
        Expr::Call { args, .. } | Expr::BuiltinCall { args, .. } => {
            for a in args {
                rename_in_expr(a, mapping, bound);
            }
        }
        Expr::ListLit(items) => {
            for i in items {
                rename_in_expr(i, mapping, bound);
            }
        }
        Expr::IntLit(_) | Expr::BoolLit(_) | Expr::StrLit(_) => {}
    }
}

fn rename_in_block(block: &mut Block, mapping: &std::collections::BTreeMap<String, String>, bound: &mut Vec<String>) {
    let depth = bound.len();
    for stmt in &mut block.statements {
        rename_free_inner(stmt, mapping, bound);
    }
    bound.truncate(depth);
}

fn rename_free_inner(stmt: &mut Statement, mapping: &std::collections::BTreeMap<String, String>, bound: &mut Vec<String>) {
    match &mut stmt.kind {
        StmtKind::Let { name, init, .. } => {
            rename_in_expr(init, mapping, bound);
            bound.push(name.clone());
        }
        StmtKind::Assign { target, value } => {
            rename_in_expr(value, mapping, bound);
            if !bound.iter().any(|b| b == target) {
                if let Some(new) = mapping.get(target) {
                    *target = new.clone();
                }
            }
        }
        StmtKind::Expr(e) => rename_in_expr(e, mapping, bound),
        StmtKind::If { cond, then_block, else_block } => {
            rename_in_expr(cond, mapping, bound);
            rename_in_block(then_block, mapping, bound);
            if let Some(els) = else_block {
                rename_in_block(els, mapping, bound);
            }
        }
        StmtKind::While { cond, body } => {
            rename_in_expr(cond, mapping, bound);
            rename_in_block(body, mapping, bound);
        }
        StmtKind::Return(Some(e)) => rename_in_expr(e, mapping, bound),
        StmtKind::Return(None) => {}
        StmtKind::Block(inner) => rename_in_block(inner, mapping, bound),
    }
}

/// Renames free variable occurrences per `mapping`, leaving let binders and
/// occurrences bound by them untouched. Scope-aware: a name declared part-way
/// through a block is bound only from its declaration onward.
pub fn rename_free_occurrences(stmt: &mut Statement, mapping: &std::collections::BTreeMap<String, String>) {
    let mut bound = Vec::new();
    rename_free_inner(stmt, mapping, &mut bound);
}
