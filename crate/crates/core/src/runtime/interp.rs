//! Tree-walking interpreter with deterministic fuel accounting.
//!
//! One unit of fuel is charged per statement executed and per expression
//! node evaluated, so runtimes are comparable across variants. The only
//! nondeterministic builtin is `uuid()`; everything else is a pure function
//! of the program text and the test being run.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::minilang::ast::*;
use super::trace::ExecutionTrace;
use super::value::Value;

pub const DEFAULT_FUEL: u64 = 1_000_000;

/// Recursion guard: transformed variants can introduce unbounded recursion
/// that would overflow the host stack long before fuel runs out.
const MAX_CALL_DEPTH: usize = 200;

// ---------------------------------------------------------------------------
// Outcomes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestStatus {
    Pass,
    AssertFail,
    RuntimeError,
    Timeout,
}

impl TestStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TestStatus::Pass => "pass",
            TestStatus::AssertFail => "assert-fail",
            TestStatus::RuntimeError => "runtime-error",
            TestStatus::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestOutcome {
    pub name: String,
    pub status: TestStatus,
    pub detail: Option<String>,
    pub steps_used: u64,
}

impl TestOutcome {
    pub fn passed(&self) -> bool {
        self.status == TestStatus::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub outcomes: Vec<TestOutcome>,
    pub warnings: Vec<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed())
    }

    pub fn failing_tests(&self) -> Vec<String> {
        self.outcomes.iter().filter(|o| !o.passed()).map(|o| o.name.clone()).collect()
    }

    pub fn total_steps(&self) -> u64 {
        self.outcomes.iter().map(|o| o.steps_used).sum()
    }
}

/// Per-test and union statement coverage, computed by running the suite.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoverageMap {
    pub per_test: BTreeMap<String, BTreeSet<StatementId>>,
    pub all: BTreeSet<StatementId>,
}

impl CoverageMap {
    pub fn covers(&self, id: StatementId) -> bool {
        self.all.contains(&id)
    }

    /// Names of tests whose execution reaches the given statement.
    pub fn tests_covering(&self, id: StatementId) -> Vec<String> {
        self.per_test
            .iter()
            .filter(|(_, hits)| hits.contains(&id))
            .map(|(name, _)| name.clone())
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Interpreter core
// ---------------------------------------------------------------------------

enum Abort {
    Assert(String),
    Runtime(String),
    Fuel,
}

enum Flow {
    Normal,
    Return(Option<Value>),
}

type Scopes = Vec<Vec<(String, Value)>>;

struct Interp<'p> {
    functions: HashMap<&'p str, &'p Function>,
    fuel_left: u64,
    fuel_budget: u64,
    trace: Option<ExecutionTrace>,
    coverage: Option<BTreeSet<StatementId>>,
    printed: Vec<String>,
    depth: usize,
    current_stmt: StatementId,
}

impl<'p> Interp<'p> {
    fn new(program: &'p Program, fuel: u64, trace: bool, coverage: bool) -> Interp<'p> {
        let mut functions = HashMap::new();
        for f in &program.functions {
            functions.entry(f.name.as_str()).or_insert(f);
        }
        Interp {
            functions,
            fuel_left: fuel,
            fuel_budget: fuel,
            trace: if trace { Some(ExecutionTrace::default()) } else { None },
            coverage: if coverage { Some(BTreeSet::new()) } else { None },
            printed: Vec::new(),
            depth: 0,
            current_stmt: StatementId(0),
        }
    }

    fn charge(&mut self) -> Result<(), Abort> {
        if self.fuel_left == 0 {
            return Err(Abort::Fuel);
        }
        self.fuel_left -= 1;
        Ok(())
    }

    /// Extra fuel for operations whose cost grows with the data they copy
    /// (string concatenation, list copies). Without this, a synthesized
    /// variant that makes a value grow inside a loop could copy quadratic
    /// amounts of data while staying under a per-node step budget.
    fn charge_data(&mut self, units: usize) -> Result<(), Abort> {
        let cost = (units / 16) as u64;
        if self.fuel_left < cost {
            self.fuel_left = 0;
            return Err(Abort::Fuel);
        }
        self.fuel_left -= cost;
        Ok(())
    }

    fn steps_used(&self) -> u64 {
        self.fuel_budget - self.fuel_left
    }

    fn runtime_error(&self, message: &str) -> Abort {
        Abort::Runtime(format!("{} (stmt {})", message, self.current_stmt))
    }

    // -- variables ----------------------------------------------------------

    fn lookup<'s>(&self, scopes: &'s Scopes, name: &str) -> Option<&'s Value> {
        for scope in scopes.iter().rev() {
            for (n, v) in scope.iter().rev() {
                if n == name {
                    return Some(v);
                }
            }
        }
        None
    }

    fn assign(&mut self, scopes: &mut Scopes, name: &str, value: Value) -> Result<(), Abort> {
        for scope in scopes.iter_mut().rev() {
            for (n, v) in scope.iter_mut().rev() {
                if n == name {
                    *v = value;
                    return Ok(());
                }
            }
        }
        Err(self.runtime_error(&format!("assignment to unknown variable '{}'", name)))
    }

    fn snapshot(&self, scopes: &Scopes) -> BTreeMap<String, String> {
        let mut snap = BTreeMap::new();
        for scope in scopes {
            for (n, v) in scope {
                snap.insert(n.clone(), v.render());
            }
        }
        snap
    }

    // -- calls --------------------------------------------------------------

    fn call_function(&mut self, name: &str, args: Vec<Value>) -> Result<Value, Abort> {
        let func = *self
            .functions
            .get(name)
            .ok_or_else(|| self.runtime_error(&format!("unknown function '{}'", name)))?;
        if self.depth >= MAX_CALL_DEPTH {
            return Err(self.runtime_error("call depth limit exceeded"));
        }
        self.depth += 1;
        if let Some(trace) = &mut self.trace {
            trace.record_call(func.signature());
        }
        let mut scopes: Scopes = vec![Vec::new()];
        for (param, value) in func.params.iter().zip(args) {
            scopes[0].push((param.name.clone(), value));
        }
        let flow = self.exec_block(&func.body, &mut scopes)?;
        self.depth -= 1;
        match flow {
            Flow::Return(Some(v)) => Ok(v),
            Flow::Return(None) => Ok(Value::default_for(&func.return_type)),
            Flow::Normal => {
                if func.return_type.is_void() {
                    Ok(Value::default_for(&StaticType::Void))
                } else {
                    Err(self.runtime_error(&format!("function '{}' finished without returning", name)))
                }
            }
        }
    }

    // -- statements ---------------------------------------------------------

    fn exec_block(&mut self, block: &Block, scopes: &mut Scopes) -> Result<Flow, Abort> {
        scopes.push(Vec::new());
        for stmt in &block.statements {
            match self.exec_stmt(stmt, scopes) {
                Ok(Flow::Normal) => {}
                other => {
                    scopes.pop();
                    return other;
                }
            }
        }
        scopes.pop();
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, stmt: &Statement, scopes: &mut Scopes) -> Result<Flow, Abort> {
        self.charge()?;
        self.current_stmt = stmt.id;
        if let Some(cov) = &mut self.coverage {
            cov.insert(stmt.id);
        }
        match &stmt.kind {
            StmtKind::Let { name, init, .. } => {
                let value = self.eval(init, scopes)?;
                scopes.last_mut().unwrap().push((name.clone(), value));
                Ok(Flow::Normal)
            }
            StmtKind::Assign { target, value } => {
                let value = self.eval(value, scopes)?;
                self.assign(scopes, target, value)?;
                Ok(Flow::Normal)
            }
            StmtKind::Expr(e) => {
                self.eval(e, scopes)?;
                Ok(Flow::Normal)
            }
            StmtKind::If { cond, then_block, else_block } => {
                let taken = self.eval_condition(stmt.id, cond, scopes)?;
                if taken {
                    self.exec_block(then_block, scopes)
                } else if let Some(els) = else_block {
                    self.exec_block(els, scopes)
                } else {
                    Ok(Flow::Normal)
                }
            }
            StmtKind::While { cond, body } => {
                loop {
                    if !self.eval_condition(stmt.id, cond, scopes)? {
                        return Ok(Flow::Normal);
                    }
                    match self.exec_block(body, scopes)? {
                        Flow::Normal => {}
                        ret => return Ok(ret),
                    }
                }
            }
            StmtKind::Return(value) => match value {
                Some(e) => {
                    let v = self.eval(e, scopes)?;
                    Ok(Flow::Return(Some(v)))
                }
                None => Ok(Flow::Return(None)),
            },
            StmtKind::Block(inner) => self.exec_block(inner, scopes),
        }
    }

    /// Evaluates an `if`/`while` condition, logging a data snapshot of the
    /// lexically visible variables first.
    fn eval_condition(&mut self, control_point: StatementId, cond: &Expr, scopes: &mut Scopes) -> Result<bool, Abort> {
        if self.trace.is_some() {
            let snap = self.snapshot(scopes);
            self.trace.as_mut().unwrap().record_data(control_point, snap);
        }
        match self.eval(cond, scopes)? {
            Value::Bool(b) => Ok(b),
            other => Err(self.runtime_error(&format!("condition evaluated to {}", other.type_name()))),
        }
    }

    // -- expressions --------------------------------------------------------

    fn eval(&mut self, expr: &Expr, scopes: &mut Scopes) -> Result<Value, Abort> {
        self.charge()?;
        match expr {
            Expr::IntLit(v) => Ok(Value::Int(*v)),
            Expr::BoolLit(b) => Ok(Value::Bool(*b)),
            Expr::StrLit(s) => Ok(Value::Str(s.clone())),
            Expr::ListLit(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(self.eval(item, scopes)?);
                }
                Ok(Value::List(out))
            }
            Expr::Var(name) => match self.lookup(scopes, name) {
                Some(v) => {
                    let v = v.clone();
                    self.charge_data(shallow_size(&v))?;
                    Ok(v)
                }
                None => Err(self.runtime_error(&format!("unknown variable '{}'", name))),
            },
            Expr::Unary { op, operand } => {
                let v = self.eval(operand, scopes)?;
                match (op, v) {
                    (UnaryOp::Neg, Value::Int(i)) => i
                        .checked_neg()
                        .map(Value::Int)
                        .ok_or_else(|| self.runtime_error("integer overflow in negation")),
                    (UnaryOp::Not, Value::Bool(b)) => Ok(Value::Bool(!b)),
                    (op, v) => Err(self.runtime_error(&format!("bad operand {} for {:?}", v.type_name(), op))),
                }
            }
            Expr::Binary { op, lhs, rhs } => self.eval_binary(*op, lhs, rhs, scopes),
            Expr::Call { function, args } => {
                let mut values = Vec::with_capacity(args.len());
                for arg in args {
                    values.push(self.eval(arg, scopes)?);
                }
                self.call_function(function, values)
            }
            Expr::BuiltinCall { builtin, args } => {
                let mut values = Vec::with_capacity(args.len());
                for arg in args {
                    values.push(self.eval(arg, scopes)?);
                }
                self.eval_builtin(*builtin, values)
            }
        }
    }

    fn eval_binary(&mut self, op: BinaryOp, lhs: &Expr, rhs: &Expr, scopes: &mut Scopes) -> Result<Value, Abort> {
        // Short-circuit forms first; their right operand may never run.
        if matches!(op, BinaryOp::And | BinaryOp::Or) {
            let l = match self.eval(lhs, scopes)? {
                Value::Bool(b) => b,
                other => return Err(self.runtime_error(&format!("bad operand {} for logic", other.type_name()))),
            };
            let shortcut = match op {
                BinaryOp::And => !l,
                _ => l,
            };
            if shortcut {
                return Ok(Value::Bool(l));
            }
            return match self.eval(rhs, scopes)? {
                Value::Bool(b) => Ok(Value::Bool(b)),
                other => Err(self.runtime_error(&format!("bad operand {} for logic", other.type_name()))),
            };
        }

        let l = self.eval(lhs, scopes)?;
        let r = self.eval(rhs, scopes)?;
        match op {
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => {
                let (a, b) = match (l, r) {
                    (Value::Int(a), Value::Int(b)) => (a, b),
                    (l, r) => {
                        return Err(self.runtime_error(&format!(
                            "arithmetic on {} and {}",
                            l.type_name(),
                            r.type_name()
                        )))
                    }
                };
                let result = match op {
                    BinaryOp::Add => a.checked_add(b),
                    BinaryOp::Sub => a.checked_sub(b),
                    BinaryOp::Mul => a.checked_mul(b),
                    BinaryOp::Div => {
                        if b == 0 {
                            return Err(self.runtime_error("division by zero"));
                        }
                        a.checked_div(b)
                    }
                    BinaryOp::Rem => {
                        if b == 0 {
                            return Err(self.runtime_error("remainder by zero"));
                        }
                        a.checked_rem(b)
                    }
                    _ => unreachable!(),
                };
                result
                    .map(Value::Int)
                    .ok_or_else(|| self.runtime_error("integer overflow"))
            }
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                let (a, b) = match (l, r) {
                    (Value::Int(a), Value::Int(b)) => (a, b),
                    (l, r) => {
                        return Err(self.runtime_error(&format!(
                            "comparison on {} and {}",
                            l.type_name(),
                            r.type_name()
                        )))
                    }
                };
                Ok(Value::Bool(match op {
                    BinaryOp::Lt => a < b,
                    BinaryOp::Le => a <= b,
                    BinaryOp::Gt => a > b,
                    BinaryOp::Ge => a >= b,
                    _ => unreachable!(),
                }))
            }
            BinaryOp::Eq => Ok(Value::Bool(l == r)),
            BinaryOp::Ne => Ok(Value::Bool(l != r)),
            BinaryOp::And | BinaryOp::Or => unreachable!(),
        }
    }

    fn eval_builtin(&mut self, builtin: Builtin, mut args: Vec<Value>) -> Result<Value, Abort> {
        match builtin {
            Builtin::Print => {
                let s = match args.pop() {
                    Some(Value::Str(s)) => s,
                    _ => return Err(self.runtime_error("print expects a str")),
                };
                self.printed.push(s);
                Ok(Value::default_for(&StaticType::Void))
            }
            Builtin::Assert => match args.pop() {
                Some(Value::Bool(true)) => Ok(Value::default_for(&StaticType::Void)),
                Some(Value::Bool(false)) => {
                    Err(Abort::Assert(format!("assertion failed (stmt {})", self.current_stmt)))
                }
                _ => Err(self.runtime_error("assert expects a bool")),
            },
            Builtin::Len => match args.pop() {
                Some(Value::Str(s)) => Ok(Value::Int(s.chars().count() as i64)),
                Some(Value::List(items)) => Ok(Value::Int(items.len() as i64)),
                _ => Err(self.runtime_error("len expects str or a list")),
            },
            Builtin::Push => {
                let elem = args.pop();
                let list = args.pop();
                match (list, elem) {
                    (Some(Value::List(mut items)), Some(v)) => {
                        items.push(v);
                        Ok(Value::List(items))
                    }
                    _ => Err(self.runtime_error("push expects (list, element)")),
                }
            }
            Builtin::Get => {
                let idx = args.pop();
                let list = args.pop();
                match (list, idx) {
                    (Some(Value::List(items)), Some(Value::Int(i))) => {
                        if i < 0 || i as usize >= items.len() {
                            Err(self.runtime_error(&format!("index {} out of bounds (len {})", i, items.len())))
                        } else {
                            Ok(items[i as usize].clone())
                        }
                    }
                    _ => Err(self.runtime_error("get expects (list, int)")),
                }
            }
            Builtin::Set => {
                let value = args.pop();
                let idx = args.pop();
                let list = args.pop();
                match (list, idx, value) {
                    (Some(Value::List(mut items)), Some(Value::Int(i)), Some(v)) => {
                        if i < 0 || i as usize >= items.len() {
                            Err(self.runtime_error(&format!("index {} out of bounds (len {})", i, items.len())))
                        } else {
                            items[i as usize] = v;
                            Ok(Value::List(items))
                        }
                    }
                    _ => Err(self.runtime_error("set expects (list, int, element)")),
                }
            }
            Builtin::Concat => {
                let b = args.pop();
                let a = args.pop();
                match (a, b) {
                    (Some(Value::Str(mut a)), Some(Value::Str(b))) => {
                        self.charge_data(a.len() + b.len())?;
                        a.push_str(&b);
                        Ok(Value::Str(a))
                    }
                    _ => Err(self.runtime_error("concat expects (str, str)")),
                }
            }
            Builtin::ToStr => match args.pop() {
                Some(Value::Int(i)) => Ok(Value::Str(i.to_string())),
                Some(Value::Bool(b)) => Ok(Value::Str(if b { "true" } else { "false" }.to_string())),
                _ => Err(self.runtime_error("to_str expects int or bool")),
            },
            Builtin::Uuid => {
                let token: u128 = rand::random();
                Ok(Value::Str(format!("{:032x}", token)))
            }
        }
    }
}

/// Approximate bytes copied when a value is cloned, ignoring nesting.
fn shallow_size(v: &Value) -> usize {
    match v {
        Value::Str(s) => s.len(),
        Value::List(items) => items.len() * 8,
        _ => 0,
    }
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

/// Result of one instrumented test run.
#[derive(Debug, Clone)]
pub struct TestRun {
    pub outcome: TestOutcome,
    pub trace: Option<ExecutionTrace>,
    pub hits: Option<BTreeSet<StatementId>>,
    pub printed: Vec<String>,
}

/// Runs a single test function to completion, failure, or fuel exhaustion.
pub fn run_test(program: &Program, test_name: &str, fuel: u64, trace: bool, coverage: bool) -> TestRun {
    let mut interp = Interp::new(program, fuel, trace, coverage);
    let result = interp.call_function(test_name, Vec::new());
    let status = match &result {
        Ok(_) => TestStatus::Pass,
        Err(Abort::Assert(_)) => TestStatus::AssertFail,
        Err(Abort::Runtime(_)) => TestStatus::RuntimeError,
        Err(Abort::Fuel) => TestStatus::Timeout,
    };
    let detail = match result {
        Ok(_) => None,
        Err(Abort::Assert(m)) | Err(Abort::Runtime(m)) => Some(m),
        Err(Abort::Fuel) => Some(format!("fuel exhausted after {} steps", interp.fuel_budget)),
    };
    TestRun {
        outcome: TestOutcome {
            name: test_name.to_string(),
            status,
            detail,
            steps_used: interp.steps_used(),
        },
        trace: interp.trace,
        hits: interp.coverage,
        printed: interp.printed,
    }
}

fn sorted_test_names(program: &Program) -> Vec<String> {
    let mut names: Vec<String> = program.test_functions().iter().map(|f| f.name.clone()).collect();
    names.sort();
    names
}

/// Runs every test function in name order. An empty suite passes vacuously
/// and is flagged with a warning.
pub fn run_suite(program: &Program, fuel: u64) -> SuiteResult {
    run_suite_selected(program, fuel, None, false)
}

/// Suite runner with an optional test subset and early exit. `selected`
/// restricts execution to the named tests (callers are responsible for the
/// soundness of the restriction); `fail_fast` stops at the first failure.
pub fn run_suite_selected(
    program: &Program,
    fuel: u64,
    selected: Option<&BTreeSet<String>>,
    fail_fast: bool,
) -> SuiteResult {
    let mut outcomes = Vec::new();
    let mut warnings = Vec::new();
    let names = sorted_test_names(program);
    if names.is_empty() {
        warnings.push("test suite is empty; it passes vacuously".to_string());
    }
    for name in names {
        if let Some(sel) = selected {
            if !sel.contains(&name) {
                continue;
            }
        }
        let run = run_test(program, &name, fuel, false, false);
        let failed = !run.outcome.passed();
        outcomes.push(run.outcome);
        if failed && fail_fast {
            break;
        }
    }
    SuiteResult { outcomes, warnings }
}

/// Runs the suite with coverage instrumentation.
pub fn coverage_of_suite(program: &Program, fuel: u64) -> (SuiteResult, CoverageMap) {
    let mut outcomes = Vec::new();
    let mut warnings = Vec::new();
    let mut map = CoverageMap::default();
    let names = sorted_test_names(program);
    if names.is_empty() {
        warnings.push("test suite is empty; it passes vacuously".to_string());
    }
    for name in names {
        let run = run_test(program, &name, fuel, false, true);
        let hits = run.hits.unwrap_or_default();
        map.all.extend(hits.iter().copied());
        map.per_test.insert(name.clone(), hits);
        outcomes.push(run.outcome);
    }
    (SuiteResult { outcomes, warnings }, map)
}

/// Captures one execution trace per test, keyed by test name. Failing tests
/// contribute their trace up to the failure point.
pub fn capture_traces(program: &Program, fuel: u64) -> BTreeMap<String, (TestOutcome, ExecutionTrace)> {
    let mut traces = BTreeMap::new();
    for name in sorted_test_names(program) {
        let run = run_test(program, &name, fuel, true, false);
        traces.insert(name, (run.outcome, run.trace.unwrap_or_default()));
    }
    traces
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parser::parse_program;
    use crate::minilang::typecheck;

    fn checked(src: &str) -> Program {
        let prog = parse_program(src).unwrap();
        let diags = typecheck(&prog);
        assert!(diags.is_empty(), "fixture does not typecheck: {:?}", diags);
        prog
    }

    #[test]
    fn passing_and_failing_tests_are_distinguished() {
        let prog = checked(
            "fn double(x: int) -> int { return x * 2; }\n\
             fn test_ok() { assert(double(4) == 8); }\n\
             fn test_bad() { assert(double(4) == 9); }\n",
        );
        let suite = run_suite(&prog, DEFAULT_FUEL);
        assert!(!suite.passed());
        assert_eq!(suite.failing_tests(), vec!["test_bad".to_string()]);
        let bad = suite.outcomes.iter().find(|o| o.name == "test_bad").unwrap();
        assert_eq!(bad.status, TestStatus::AssertFail);
        let ok = suite.outcomes.iter().find(|o| o.name == "test_ok").unwrap();
        assert_eq!(ok.status, TestStatus::Pass);
    }

    #[test]
    fn runtime_errors_are_not_assert_failures() {
        let prog = checked("fn test_div() { let x: int = 1 / 0; assert(x == x); }");
        let suite = run_suite(&prog, DEFAULT_FUEL);
        assert_eq!(suite.outcomes[0].status, TestStatus::RuntimeError);
        assert!(suite.outcomes[0].detail.as_ref().unwrap().contains("division by zero"));
    }

    #[test]
    fn overflow_is_checked() {
        let prog = checked(
            "fn test_overflow() { let big: int = 9223372036854775807; big = big + 1; assert(true); }",
        );
        assert_eq!(run_suite(&prog, DEFAULT_FUEL).outcomes[0].status, TestStatus::RuntimeError);
    }

    #[test]
    fn infinite_loop_times_out() {
        let prog = checked("fn test_spin() { while true { let x: int = 1; x = x; } }");
        let suite = run_suite(&prog, 10_000);
        assert_eq!(suite.outcomes[0].status, TestStatus::Timeout);
        assert_eq!(suite.outcomes[0].steps_used, 10_000);
    }

    #[test]
    fn fuel_is_monotone() {
        let prog = checked(
            "fn gauss(n: int) -> int {\n\
               let total: int = 0;\n\
               let i: int = 0;\n\
               while i <= n { total = total + i; i = i + 1; }\n\
               return total;\n\
             }\n\
             fn test_gauss() { assert(gauss(10) == 55); }\n",
        );
        let tight = run_suite(&prog, 5_000);
        assert!(tight.passed());
        let steps = tight.outcomes[0].steps_used;
        let loose = run_suite(&prog, 50_000);
        assert!(loose.passed());
        assert_eq!(loose.outcomes[0].steps_used, steps);
    }

    #[test]
    fn empty_suite_passes_with_warning() {
        let prog = checked("fn f() -> int { return 1; }");
        let suite = run_suite(&prog, DEFAULT_FUEL);
        assert!(suite.passed());
        assert_eq!(suite.warnings.len(), 1);
    }

    #[test]
    fn coverage_excludes_untaken_branches() {
        let prog = checked(
            "fn pick(flag: bool) -> int { if flag { return 1; } else { return 2; } }\n\
             fn test_pick() { assert(pick(true) == 1); }\n",
        );
        let (_, cov) = coverage_of_suite(&prog, DEFAULT_FUEL);
        let entries = prog.enumerate_statements();
        // if, then-return covered; else-return not.
        assert!(cov.covers(entries[0].id));
        assert!(cov.covers(entries[1].id));
        assert!(!cov.covers(entries[2].id));
        assert_eq!(cov.tests_covering(entries[1].id), vec!["test_pick".to_string()]);
    }

    #[test]
    fn traces_log_calls_in_invocation_order() {
        let prog = checked(
            "fn f() -> int { return 1; }\n\
             fn g() -> int { return f() + 1; }\n\
             fn test_fg() { assert(g() == 2); assert(f() == 1); }\n",
        );
        let traces = capture_traces(&prog, DEFAULT_FUEL);
        let (outcome, trace) = &traces["test_fg"];
        assert!(outcome.passed());
        assert_eq!(
            trace.call_events,
            vec!["test_fg()->void", "g()->int", "f()->int", "f()->int"]
        );
    }

    #[test]
    fn while_condition_snapshots_every_evaluation() {
        let prog = checked(
            "fn count(n: int) -> int {\n\
               let i: int = 0;\n\
               while i < n { i = i + 1; }\n\
               return i;\n\
             }\n\
             fn test_count() { assert(count(3) == 3); }\n",
        );
        let traces = capture_traces(&prog, DEFAULT_FUEL);
        let (_, trace) = &traces["test_count"];
        // Three true evaluations plus the final false one.
        assert_eq!(trace.data_events.len(), 4);
        let values: Vec<&str> = trace
            .data_events
            .iter()
            .map(|e| e.snapshot.get("i").unwrap().as_str())
            .collect();
        assert_eq!(values, vec!["0", "1", "2", "3"]);
        // Loop-local declarations are out of scope at the condition.
        assert!(trace.data_events[0].snapshot.contains_key("n"));
    }

    #[test]
    fn deterministic_traces_without_uuid() {
        let prog = checked(
            "fn fizz(n: int) -> str {\n\
               if n % 3 == 0 { return \"fizz\"; }\n\
               return to_str(n);\n\
             }\n\
             fn test_fizz() { assert(fizz(3) == \"fizz\"); assert(fizz(4) == \"4\"); }\n",
        );
        let a = capture_traces(&prog, DEFAULT_FUEL);
        let b = capture_traces(&prog, DEFAULT_FUEL);
        assert_eq!(a, b);
    }

    #[test]
    fn uuid_differs_across_runs() {
        let prog = checked("fn fresh() -> str { return uuid(); }\nfn test_fresh() { assert(len(fresh()) == 32); }");
        let a = run_test(&prog, "test_fresh", DEFAULT_FUEL, false, false);
        assert!(a.outcome.passed());
        let prog2 = checked("fn test_ne() { assert(!(uuid() == uuid())); }");
        assert!(run_suite(&prog2, DEFAULT_FUEL).passed());
    }

    #[test]
    fn deep_recursion_is_cut_off() {
        let prog = checked("fn down(n: int) -> int { return down(n - 1); }\nfn test_down() { down(5); }");
        let suite = run_suite(&prog, DEFAULT_FUEL);
        assert_eq!(suite.outcomes[0].status, TestStatus::RuntimeError);
        assert!(suite.outcomes[0].detail.as_ref().unwrap().contains("depth"));
    }

    #[test]
    fn print_is_captured_not_emitted() {
        let prog = checked("fn test_p() { print(\"hello\"); assert(true); }");
        let run = run_test(&prog, "test_p", DEFAULT_FUEL, false, false);
        assert_eq!(run.printed, vec!["hello".to_string()]);
    }

    #[test]
    fn short_circuit_skips_the_right_operand() {
        let prog = checked("fn test_sc() { let xs: [int] = []; assert(!(len(xs) > 0 && get(xs, 0) == 1)); }");
        // get(xs, 0) would be out of bounds; && must not evaluate it.
        assert!(run_suite(&prog, DEFAULT_FUEL).passed());
    }
}
