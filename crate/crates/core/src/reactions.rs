//! Per-statement typing contexts and transplant-candidate accounting.
//!
//! Every statement gets a `Reaction`: the multiset of static types of the
//! variables it reads or writes (multiplicity = number of distinct names of
//! that type) plus an output type, which is non-void exactly when the
//! statement is, or unconditionally ends in, a `return` carrying a value.
//! A transplant fits a point when its input multiset is contained in the
//! point's and the outputs are equal.

use std::collections::{BTreeMap, BTreeSet};

use crate::minilang::ast::*;
use crate::minilang::typecheck::{function_table, FunctionTable};
use crate::minilang::{expr_type, stmt_definitely_returns};
use crate::transforms::TransformationKind;

// ---------------------------------------------------------------------------
// Reaction
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reaction {
    /// Static type -> number of distinct free variable names of that type.
    pub input: BTreeMap<StaticType, usize>,
    pub output: StaticType,
}

impl Reaction {
    pub fn render(&self) -> String {
        let mut types = Vec::new();
        for (ty, count) in &self.input {
            for _ in 0..*count {
                types.push(ty.to_string());
            }
        }
        format!("[{}] -> {}", types.join(", "), self.output)
    }
}

/// True when the transplant's input multiset is contained in the point's
/// input multiset and the output types agree (void matches only void).
pub fn compatible(transplant: &Reaction, point: &Reaction) -> bool {
    transplant.output == point.output
        && transplant
            .input
            .iter()
            .all(|(ty, need)| point.input.get(ty).copied().unwrap_or(0) >= *need)
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Everything the transformations need to know about one statement.
#[derive(Debug, Clone)]
pub struct StatementInfo {
    pub id: StatementId,
    pub class: StmtClass,
    pub function: String,
    /// True when the enclosing function is a test; such statements are part
    /// of the oracle, not of the program under transformation.
    pub in_test: bool,
    pub reaction: Reaction,
    /// Free variable name -> declared type, for the statement as a snippet.
    pub free_vars: BTreeMap<String, StaticType>,
    /// Every name occurring anywhere in the statement, binders included.
    pub names_used: BTreeSet<String>,
    /// Names declared by `let` bindings inside the statement (nested included).
    pub internal_binders: BTreeSet<String>,
    /// Binder and declared type when the statement is a `let`.
    pub declared: Option<(String, StaticType)>,
    /// For `return e;` the type of `e`; for a bare `return;` Void; otherwise None.
    pub returned: Option<StaticType>,
}

/// Immutable per-program index: one entry per statement, in id order.
#[derive(Debug, Clone)]
pub struct ReactionIndex {
    infos: Vec<StatementInfo>,
    by_id: BTreeMap<StatementId, usize>,
}

impl ReactionIndex {
    pub fn build(program: &Program) -> ReactionIndex {
        let table = function_table(program);
        let mut infos = Vec::new();
        for func in &program.functions {
            let mut scopes: Vec<Vec<(String, StaticType)>> = Vec::new();
            scopes.push(func.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect());
            catalog_block(&func.body, func, &table, &mut scopes, &mut infos);
        }
        infos.sort_by_key(|info| info.id);
        let by_id = infos.iter().enumerate().map(|(i, info)| (info.id, i)).collect();
        ReactionIndex { infos, by_id }
    }

    pub fn info(&self, id: StatementId) -> Option<&StatementInfo> {
        self.by_id.get(&id).map(|&i| &self.infos[i])
    }

    pub fn reaction(&self, id: StatementId) -> Option<&Reaction> {
        self.info(id).map(|info| &info.reaction)
    }

    /// All statements, id order.
    pub fn infos(&self) -> &[StatementInfo] {
        &self.infos
    }

    /// Statements of non-test functions: the transplant donor universe and
    /// the universe transformation points are drawn from.
    pub fn application_infos(&self) -> impl Iterator<Item = &StatementInfo> {
        self.infos.iter().filter(|info| !info.in_test)
    }

    /// Distinct reactions over the application statements.
    pub fn distinct_application_reactions(&self) -> BTreeSet<&Reaction> {
        self.application_infos().map(|info| &info.reaction).collect()
    }

    /// True when some other application statement has a compatible reaction.
    pub fn has_compatible_donor(&self, point: &StatementInfo) -> bool {
        self.application_infos()
            .any(|t| t.id != point.id && compatible(&t.reaction, &point.reaction))
    }

    /// One JSON object per statement, newline separated, stable key order.
    /// Type names never need escaping, so the lines are written directly.
    pub fn dump_lines(&self) -> String {
        let mut out = String::new();
        for info in &self.infos {
            let mut types = Vec::new();
            for (ty, count) in &info.reaction.input {
                for _ in 0..*count {
                    types.push(format!("\"{}\"", ty));
                }
            }
            out.push_str(&format!(
                "{{\"stmt_id\":{},\"input\":[{}],\"output\":\"{}\"}}\n",
                info.id.0,
                types.join(","),
                info.reaction.output
            ));
        }
        out
    }
}

fn catalog_block(
    block: &Block,
    func: &Function,
    table: &FunctionTable,
    scopes: &mut Vec<Vec<(String, StaticType)>>,
    out: &mut Vec<StatementInfo>,
) {
    scopes.push(Vec::new());
    for stmt in &block.statements {
        let env: BTreeMap<String, StaticType> = scopes
            .iter()
            .flat_map(|scope| scope.iter().cloned())
            .collect();
        out.push(statement_info(stmt, func, table, &env));
        match &stmt.kind {
            StmtKind::Let { name, declared_type, .. } => {
                scopes.last_mut().unwrap().push((name.clone(), declared_type.clone()));
            }
            StmtKind::If { then_block, else_block, .. } => {
                catalog_block(then_block, func, table, scopes, out);
                if let Some(els) = else_block {
                    catalog_block(els, func, table, scopes, out);
                }
            }
            StmtKind::While { body, .. } => catalog_block(body, func, table, scopes, out),
            StmtKind::Block(inner) => catalog_block(inner, func, table, scopes, out),
            _ => {}
        }
    }
    scopes.pop();
}

fn statement_info(
    stmt: &Statement,
    func: &Function,
    table: &FunctionTable,
    env: &BTreeMap<String, StaticType>,
) -> StatementInfo {
    let free_vars = free_variables(stmt, env);
    let mut input: BTreeMap<StaticType, usize> = BTreeMap::new();
    for ty in free_vars.values() {
        *input.entry(ty.clone()).or_insert(0) += 1;
    }
    let output = if stmt_definitely_returns(stmt) {
        func.return_type.clone()
    } else {
        StaticType::Void
    };
    let returned = match &stmt.kind {
        StmtKind::Return(Some(e)) => expr_type(table, env, e),
        StmtKind::Return(None) => Some(StaticType::Void),
        _ => None,
    };
    let declared = match &stmt.kind {
        StmtKind::Let { name, declared_type, .. } => Some((name.clone(), declared_type.clone())),
        _ => None,
    };
    StatementInfo {
        id: stmt.id,
        class: stmt.class(),
        function: func.name.clone(),
        in_test: func.is_test(),
        reaction: Reaction { input, output },
        free_vars,
        names_used: names_used(stmt),
        internal_binders: internal_binders(stmt),
        declared,
        returned,
    }
}

// ---------------------------------------------------------------------------
// Free variables
// ---------------------------------------------------------------------------

/// Names free in the statement viewed as a snippet: read or written, not
/// bound by a `let` inside the snippet before the occurrence.
pub fn free_variables(stmt: &Statement, env: &BTreeMap<String, StaticType>) -> BTreeMap<String, StaticType> {
    let mut out = BTreeMap::new();
    let mut bound: Vec<Vec<String>> = vec![Vec::new()];
    free_in_stmt(stmt, env, &mut bound, &mut out);
    out
}

fn is_bound(bound: &[Vec<String>], name: &str) -> bool {
    bound.iter().any(|frame| frame.iter().any(|n| n == name))
}

fn note(name: &str, env: &BTreeMap<String, StaticType>, bound: &[Vec<String>], out: &mut BTreeMap<String, StaticType>) {
    if is_bound(bound, name) {
        return;
    }
    if let Some(ty) = env.get(name) {
        out.insert(name.to_string(), ty.clone());
    }
}

fn free_in_stmt(
    stmt: &Statement,
    env: &BTreeMap<String, StaticType>,
    bound: &mut Vec<Vec<String>>,
    out: &mut BTreeMap<String, StaticType>,
) {
    match &stmt.kind {
        StmtKind::Let { name, init, .. } => {
            free_in_expr(init, env, bound, out);
            bound.last_mut().unwrap().push(name.clone());
        }
        StmtKind::Assign { target, value } => {
            note(target, env, bound, out);
            free_in_expr(value, env, bound, out);
        }
        StmtKind::Expr(e) => free_in_expr(e, env, bound, out),
        StmtKind::If { cond, then_block, else_block } => {
            free_in_expr(cond, env, bound, out);
            free_in_block(then_block, env, bound, out);
            if let Some(els) = else_block {
                free_in_block(els, env, bound, out);
            }
        }
        StmtKind::While { cond, body } => {
            free_in_expr(cond, env, bound, out);
            free_in_block(body, env, bound, out);
        }
        StmtKind::Return(value) => {
            if let Some(e) = value {
                free_in_expr(e, env, bound, out);
            }
        }
        StmtKind::Block(inner) => free_in_block(inner, env, bound, out),
    }
}

fn free_in_block(
    block: &Block,
    env: &BTreeMap<String, StaticType>,
    bound: &mut Vec<Vec<String>>,
    out: &mut BTreeMap<String, StaticType>,
) {
    bound.push(Vec::new());
    for s in &block.statements {
        free_in_stmt(s, env, bound, out);
    }
    bound.pop();
}

fn free_in_expr(
    expr: &Expr,
    env: &BTreeMap<String, StaticType>,
    bound: &[Vec<String>],
    out: &mut BTreeMap<String, StaticType>,
) {
    match expr {
        Expr::IntLit(_) | Expr::BoolLit(_) | Expr::StrLit(_) => {}
        Expr::ListLit(items) => {
            for item in items {
                free_in_expr(item, env, bound, out);
            }
        }
        Expr::Var(name) => note(name, env, bound, out),
        Expr::Unary { operand, .. } => free_in_expr(operand, env, bound, out),
        Expr::Binary { lhs, rhs, .. } => {
            free_in_expr(lhs, env, bound, out);
            free_in_expr(rhs, env, bound, out);
        }
        Expr::Call { args, .. } | Expr::BuiltinCall { args, .. } => {
            for arg in args {
                free_in_expr(arg, env, bound, out);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Candidate counts
// ---------------------------------------------------------------------------

/// Theoretical transplant-candidate counts per transformation kind, summed
/// over the given points. The add and replace flavors of one strategy share
/// a formula; saturating arithmetic guards the steroid products.
pub fn count_candidates(kind: TransformationKind, points: &[StatementId], index: &ReactionIndex) -> u64 {
    let universe: Vec<&StatementInfo> = index.application_infos().collect();
    let point_infos: Vec<&StatementInfo> = points
        .iter()
        .filter_map(|id| index.info(*id))
        .collect();
    match kind {
        TransformationKind::Delete => point_infos.len() as u64,
        TransformationKind::AddRandom | TransformationKind::ReplaceRandom => {
            (point_infos.len() as u64).saturating_mul(universe.len() as u64)
        }
        TransformationKind::AddWittgenstein | TransformationKind::ReplaceWittgenstein => {
            let mut total: u64 = 0;
            for point in &point_infos {
                let fitting = universe
                    .iter()
                    .filter(|t| t.free_vars.keys().all(|n| point.names_used.contains(n)))
                    .count();
                total = total.saturating_add(fitting as u64);
            }
            total
        }
        TransformationKind::AddReaction | TransformationKind::ReplaceReaction => {
            let shapes = index.distinct_application_reactions();
            let mut total: u64 = 0;
            for point in &point_infos {
                let fitting = shapes.iter().filter(|r| compatible(r, &point.reaction)).count();
                total = total.saturating_add(fitting as u64);
            }
            total
        }
        TransformationKind::AddSteroid | TransformationKind::ReplaceSteroid => {
            let shapes = index.distinct_application_reactions();
            let mut total: u64 = 0;
            for point in &point_infos {
                for shape in &shapes {
                    if !compatible(shape, &point.reaction) {
                        continue;
                    }
                    total = total.saturating_add(mapping_count(shape, &point.reaction));
                }
            }
            total
        }
    }
}

/// Number of type-valid variable mappings for a transplant of the given
/// reaction at the given point: each free variable picks independently
/// among the point's same-typed variables.
pub fn mapping_count(transplant: &Reaction, point: &Reaction) -> u64 {
    let mut total: u64 = 1;
    for (ty, need) in &transplant.input {
        let choices = point.input.get(ty).copied().unwrap_or(0) as u64;
        for _ in 0..*need {
            total = total.saturating_mul(choices);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parser::parse_program;
    use crate::minilang::typecheck;

    fn indexed(src: &str) -> (Program, ReactionIndex) {
        let prog = parse_program(src).unwrap();
        assert!(typecheck(&prog).is_empty());
        let index = ReactionIndex::build(&prog);
        (prog, index)
    }

    fn reaction(input: &[(StaticType, usize)], output: StaticType) -> Reaction {
        Reaction {
            input: input.iter().cloned().collect(),
            output,
        }
    }

    #[test]
    fn assignment_joins_written_variable_to_input() {
        let (prog, index) = indexed(
            "fn bar(s: str, n: int) -> bool { return n > len(s); }\n\
             fn caller(var_a: str, i: int) {\n\
               let flag: bool = false;\n\
               flag = bar(var_a, 10 + i);\n\
             }\n",
        );
        let entries = prog.enumerate_statements();
        let assign = entries.iter().find(|e| e.class == StmtClass::Assign).unwrap();
        let info = index.info(assign.id).unwrap();
        assert_eq!(
            info.reaction,
            reaction(
                &[(StaticType::Str, 1), (StaticType::Int, 1), (StaticType::Bool, 1)],
                StaticType::Void
            )
        );
        assert_eq!(info.free_vars.len(), 3);
    }

    #[test]
    fn return_with_expression_has_value_output() {
        let (prog, index) = indexed("fn inc(x: int) -> int { return x + 1; }");
        let id = prog.enumerate_statements()[0].id;
        let info = index.info(id).unwrap();
        assert_eq!(info.reaction, reaction(&[(StaticType::Int, 1)], StaticType::Int));
        assert_eq!(info.returned, Some(StaticType::Int));
    }

    #[test]
    fn internal_binders_are_not_free() {
        let (prog, index) = indexed(
            "fn f(x: int) -> int {\n\
               let y: int = 0;\n\
               {\n\
                 let t: int = x;\n\
                 y = t + x;\n\
               }\n\
               return y;\n\
             }\n",
        );
        let entries = prog.enumerate_statements();
        let block = entries.iter().find(|e| e.class == StmtClass::Block).unwrap();
        let info = index.info(block.id).unwrap();
        let names: Vec<&str> = info.free_vars.keys().map(|s| s.as_str()).collect();
        assert_eq!(names, vec!["x", "y"]);
        assert_eq!(info.internal_binders.iter().collect::<Vec<_>>(), vec!["t"]);
        // Two distinct ints, not three occurrences.
        assert_eq!(info.reaction.input.get(&StaticType::Int), Some(&2));
    }

    #[test]
    fn branch_that_always_returns_gets_function_output() {
        let (prog, index) = indexed(
            "fn pick(flag: bool) -> int {\n\
               if flag { return 1; } else { return 2; }\n\
             }\n",
        );
        let entries = prog.enumerate_statements();
        let iff = entries.iter().find(|e| e.class == StmtClass::If).unwrap();
        assert_eq!(index.reaction(iff.id).unwrap().output, StaticType::Int);
        // A lone then-branch does not return unconditionally.
        let (prog2, index2) = indexed(
            "fn maybe(flag: bool) -> int {\n\
               if flag { return 1; }\n\
               return 2;\n\
             }\n",
        );
        let iff2 = prog2
            .enumerate_statements()
            .into_iter()
            .find(|e| e.class == StmtClass::If)
            .unwrap();
        assert_eq!(index2.reaction(iff2.id).unwrap().output, StaticType::Void);
    }

    #[test]
    fn compatibility_is_multiset_containment_plus_equal_output() {
        let small = reaction(&[(StaticType::Int, 1)], StaticType::Void);
        let big = reaction(&[(StaticType::Int, 2), (StaticType::Bool, 1)], StaticType::Void);
        assert!(compatible(&small, &big));
        assert!(!compatible(&big, &small));
        let typed = reaction(&[(StaticType::Int, 1)], StaticType::Int);
        assert!(!compatible(&small, &typed));
        assert!(!compatible(&typed, &small));
        let strs = reaction(&[(StaticType::Str, 1)], StaticType::Void);
        assert!(!compatible(&strs, &small));
        // Reflexive by construction.
        assert!(compatible(&big, &big));
    }

    #[test]
    fn index_is_total_over_all_statements() {
        let (prog, index) = indexed(
            "fn f(x: int) -> int { if x > 0 { return x; } return 0; }\n\
             fn test_f() { assert(f(2) == 2); }\n",
        );
        let entries = prog.enumerate_statements();
        assert_eq!(index.infos().len(), entries.len());
        for entry in &entries {
            assert!(index.info(entry.id).is_some());
        }
        let in_test: Vec<bool> = index.infos().iter().map(|i| i.in_test).collect();
        assert!(in_test.iter().any(|b| *b) && in_test.iter().any(|b| !*b));
    }

    #[test]
    fn mapping_counts_multiply_per_variable_choices() {
        let transplant = reaction(&[(StaticType::Int, 2)], StaticType::Void);
        let point = reaction(&[(StaticType::Int, 3), (StaticType::Str, 1)], StaticType::Void);
        assert_eq!(mapping_count(&transplant, &point), 9);
        let empty = reaction(&[], StaticType::Void);
        assert_eq!(mapping_count(&empty, &point), 1);
        assert_eq!(
            mapping_count(&reaction(&[(StaticType::Str, 2)], StaticType::Void), &point),
            1
        );
    }

    #[test]
    fn dump_lines_are_stable_json() {
        let (_, index) = indexed("fn f(x: int) -> int { return x; }");
        let dump = index.dump_lines();
        assert_eq!(dump, "{\"stmt_id\":0,\"input\":[\"int\"],\"output\":\"int\"}\n");
    }

    #[test]
    fn counts_follow_the_footnote_formulas_on_a_tiny_program() {
        // Application part: three statements in one void function, all with
        // int-only contexts, plus one bool-context statement.
        let (prog, index) = indexed(
            "fn f(a: int, b: int, flag: bool) {\n\
               let c: int = a + b;\n\
               c = c + a;\n\
               flag = !flag;\n\
             }\n\
             fn test_f() { f(1, 2, true); assert(true); }\n",
        );
        let app: Vec<StatementId> = prog.application_statements();
        assert_eq!(app.len(), 3);
        let points = app.clone();
        assert_eq!(count_candidates(TransformationKind::Delete, &points, &index), 3);
        assert_eq!(count_candidates(TransformationKind::AddRandom, &points, &index), 9);
        // Shapes: let {int:2}/void, assign {int:2}/void -> same shape {int:2};
        // flag-assign {bool:1}/void. Wait: the assign writes c and reads c,a.
        let shapes = index.distinct_application_reactions();
        assert_eq!(shapes.len(), 2);
        let reaction_count = count_candidates(TransformationKind::AddReaction, &points, &index);
        // Points 1,2 accept only the {int:2} shape; point 3 only {bool:1}.
        assert_eq!(reaction_count, 3);
        let steroid = count_candidates(TransformationKind::AddSteroid, &points, &index);
        // {int:2} shape at an {int:2} point: 2^2 mappings; bool shape at the
        // bool point: 1.
        assert_eq!(steroid, 2 * 2 + 2 * 2 + 1);
    }
}
