//! Computational-diversity measurement between a program and its sosies.
//!
//! Two observation channels: the sequence of function calls, and variable
//! snapshots at every `if`/`while` condition evaluation. Nondeterministic
//! observations (the `uuid()` builtin) are filtered by a noise mask built
//! from repeated runs of the original program alone; whatever still differs
//! afterwards is genuine behavioral diversity.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::minilang::ast::{Program, StatementId};
use crate::runtime::{capture_traces, ExecutionTrace};
use crate::search::campaign::{classify_variant, VariantClass};
use crate::search::persist::PoolEntry;

// ---------------------------------------------------------------------------
// Noise mask
// ---------------------------------------------------------------------------

/// Noisy observation points for one test: call-sequence positions and
/// (control point, variable) pairs that vary across runs of the original.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TestMask {
    pub call_positions: BTreeSet<usize>,
    pub data_vars: BTreeSet<(StatementId, String)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NoiseMask {
    pub per_test: BTreeMap<String, TestMask>,
}

impl NoiseMask {
    pub fn is_empty(&self) -> bool {
        self.per_test
            .values()
            .all(|m| m.call_positions.is_empty() && m.data_vars.is_empty())
    }

    fn for_test(&self, test: &str) -> TestMask {
        self.per_test.get(test).cloned().unwrap_or_default()
    }
}

/// Runs the original `runs` times and marks every observation that is not
/// identical across all runs. Two runs are the minimum; more runs can only
/// grow the mask. Sosie traces are never consulted.
pub fn build_noise_mask(original: &Program, fuel: u64, runs: usize) -> NoiseMask {
    assert!(runs >= 2, "a noise mask needs at least two runs");
    let captures: Vec<BTreeMap<String, ExecutionTrace>> = (0..runs)
        .map(|_| {
            capture_traces(original, fuel)
                .into_iter()
                .map(|(name, (_, trace))| (name, trace))
                .collect()
        })
        .collect();
    let mut mask = NoiseMask::default();
    let test_names: BTreeSet<&String> = captures.iter().flat_map(|c| c.keys()).collect();
    for test in test_names {
        let traces: Vec<&ExecutionTrace> = captures.iter().filter_map(|c| c.get(test)).collect();
        let mut test_mask = TestMask::default();

        let max_calls = traces.iter().map(|t| t.call_events.len()).max().unwrap_or(0);
        for pos in 0..max_calls {
            let first = traces[0].call_events.get(pos);
            if traces.iter().any(|t| t.call_events.get(pos) != first) {
                test_mask.call_positions.insert(pos);
            }
        }

        let max_events = traces.iter().map(|t| t.data_events.len()).max().unwrap_or(0);
        for pos in 0..max_events {
            let events: Vec<_> = traces.iter().map(|t| t.data_events.get(pos)).collect();
            let Some(first) = events[0] else {
                mask_whole_events(&events, &mut test_mask);
                continue;
            };
            if events.iter().any(|e| e.map(|e| e.control_point) != Some(first.control_point)) {
                mask_whole_events(&events, &mut test_mask);
                continue;
            }
            let mut names: BTreeSet<&String> = BTreeSet::new();
            for event in events.iter().flatten() {
                names.extend(event.snapshot.keys());
            }
            for name in names {
                let value = first.snapshot.get(name);
                let varies = events
                    .iter()
                    .any(|e| e.map(|e| e.snapshot.get(name)) != Some(value));
                if varies {
                    test_mask.data_vars.insert((first.control_point, name.clone()));
                }
            }
        }
        mask.per_test.insert(test.clone(), test_mask);
    }
    mask
}

fn mask_whole_events(events: &[Option<&crate::runtime::DataEvent>], test_mask: &mut TestMask) {
    for event in events.iter().flatten() {
        for name in event.snapshot.keys() {
            test_mask.data_vars.insert((event.control_point, name.clone()));
        }
    }
}

// ---------------------------------------------------------------------------
// Trace comparison
// ---------------------------------------------------------------------------

/// Compares two traces of the same test after masking. Any difference in
/// length or content counts: there is no alignment heuristic.
pub fn compare_traces(a: &ExecutionTrace, b: &ExecutionTrace, mask: &TestMask) -> (bool, bool) {
    let calls = |t: &ExecutionTrace| -> Vec<String> {
        t.call_events
            .iter()
            .enumerate()
            .filter(|(pos, _)| !mask.call_positions.contains(pos))
            .map(|(_, sig)| sig.clone())
            .collect()
    };
    let call_diff = calls(a) != calls(b);

    fn kept_data<'t>(
        t: &'t ExecutionTrace,
        mask: &TestMask,
    ) -> Vec<(StatementId, BTreeMap<&'t String, &'t String>)> {
        t.data_events
            .iter()
            .map(|event| {
                let kept: BTreeMap<&String, &String> = event
                    .snapshot
                    .iter()
                    .filter(|(name, _)| {
                        !mask.data_vars.contains(&(event.control_point, (*name).clone()))
                    })
                    .collect();
                (event.control_point, kept)
            })
            .collect()
    }
    let data_diff = kept_data(a, mask) != kept_data(b, mask);
    (call_diff, data_diff)
}

// ---------------------------------------------------------------------------
// Pool-level measurement
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DiversityVerdict {
    /// `<kind>/<n>` of the pool entry.
    pub sosie: String,
    pub call_diversity: bool,
    pub variable_diversity: bool,
    pub diverse_tests_by_call: u64,
    pub diverse_tests_by_data: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DiversityReport {
    pub pool_size: u64,
    /// Pool entries that no longer verify as sosies, with reasons.
    pub excluded: Vec<String>,
    pub any_diversity: u64,
    pub any_diversity_pct: f64,
    pub call_diversity: u64,
    pub call_diversity_pct: f64,
    pub variable_diversity: u64,
    pub variable_diversity_pct: f64,
    pub mean_diverse_tests_by_call: f64,
    pub mean_diverse_tests_by_data: f64,
    pub verdicts: Vec<DiversityVerdict>,
}

pub fn diversity_json(report: &DiversityReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Re-verifies each pool entry, then measures per-test diversity of every
/// verified sosie against the original under a fresh noise mask.
pub fn measure_diversity(
    pool: &[PoolEntry],
    original: &Program,
    fuel: u64,
    runs: usize,
    parallel: bool,
) -> DiversityReport {
    let mask = build_noise_mask(original, fuel, runs);
    let reference: BTreeMap<String, ExecutionTrace> = capture_traces(original, fuel)
        .into_iter()
        .map(|(name, (_, trace))| (name, trace))
        .collect();

    let mut excluded = Vec::new();
    let mut verified: Vec<(String, Program)> = Vec::new();
    for entry in pool {
        let id = format!("{}/{}", entry.kind, entry.n);
        match entry.parse_source() {
            Err(reason) => excluded.push(format!("{}: {}", id, reason)),
            Ok(program) => {
                let check = classify_variant(&program, fuel);
                if check.class == VariantClass::Sosie {
                    verified.push((id, program));
                } else {
                    excluded.push(format!("{}: reclassified as {}", id, check.class.as_str()));
                }
            }
        }
    }

    let verdict_of = |(id, program): &(String, Program)| -> DiversityVerdict {
        let traces = capture_traces(program, fuel);
        let mut by_call = 0;
        let mut by_data = 0;
        for (test, baseline) in &reference {
            let Some((_, sosie_trace)) = traces.get(test) else { continue };
            let (call_diff, data_diff) = compare_traces(baseline, sosie_trace, &mask.for_test(test));
            if call_diff {
                by_call += 1;
            }
            if data_diff {
                by_data += 1;
            }
        }
        DiversityVerdict {
            sosie: id.clone(),
            call_diversity: by_call > 0,
            variable_diversity: by_data > 0,
            diverse_tests_by_call: by_call,
            diverse_tests_by_data: by_data,
        }
    };
    let verdicts: Vec<DiversityVerdict> = if parallel {
        verified.par_iter().map(verdict_of).collect()
    } else {
        verified.iter().map(verdict_of).collect()
    };

    let size = verdicts.len() as u64;
    let pct = |count: u64| if size == 0 { 0.0 } else { count as f64 / size as f64 * 100.0 };
    let mean = |total: u64| if size == 0 { 0.0 } else { total as f64 / size as f64 };
    let call_count = verdicts.iter().filter(|v| v.call_diversity).count() as u64;
    let var_count = verdicts.iter().filter(|v| v.variable_diversity).count() as u64;
    let any_count = verdicts
        .iter()
        .filter(|v| v.call_diversity || v.variable_diversity)
        .count() as u64;
    DiversityReport {
        pool_size: size,
        excluded,
        any_diversity: any_count,
        any_diversity_pct: pct(any_count),
        call_diversity: call_count,
        call_diversity_pct: pct(call_count),
        variable_diversity: var_count,
        variable_diversity_pct: pct(var_count),
        mean_diverse_tests_by_call: mean(verdicts.iter().map(|v| v.diverse_tests_by_call).sum()),
        mean_diverse_tests_by_data: mean(verdicts.iter().map(|v| v.diverse_tests_by_data).sum()),
        verdicts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parser::parse_program;
    use crate::minilang::typecheck;
    use crate::runtime::DEFAULT_FUEL;

    fn checked(src: &str) -> Program {
        let prog = parse_program(src).unwrap();
        assert!(typecheck(&prog).is_empty(), "{:?}", typecheck(&prog));
        prog
    }

    const LOOPY: &str = "\
fn total(n: int) -> int {
    let sum: int = 0;
    let i: int = 0;
    while i < n {
        sum = sum + i;
        i = i + 1;
    }
    return sum;
}

fn test_total() {
    assert(total(4) == 6);
}
";

    #[test]
    fn deterministic_program_has_an_empty_mask() {
        let prog = checked(LOOPY);
        let mask = build_noise_mask(&prog, DEFAULT_FUEL, 2);
        assert!(mask.is_empty());
        let mask10 = build_noise_mask(&prog, DEFAULT_FUEL, 10);
        assert_eq!(mask, mask10);
    }

    const NOISY: &str = "\
fn audit(n: int) -> int {
    let token: str = uuid();
    let i: int = 0;
    while i < n {
        i = i + 1;
    }
    return len(token);
}

fn test_audit() {
    assert(audit(2) == 32);
}
";

    #[test]
    fn uuid_observations_are_masked() {
        let prog = checked(NOISY);
        let mask = build_noise_mask(&prog, DEFAULT_FUEL, 2);
        let test_mask = mask.for_test("test_audit");
        assert!(test_mask.call_positions.is_empty());
        assert!(!test_mask.data_vars.is_empty());
        for (_, name) in &test_mask.data_vars {
            assert_eq!(name, "token");
        }
    }

    #[test]
    fn masked_noise_is_not_diversity() {
        let prog = checked(NOISY);
        let mask = build_noise_mask(&prog, DEFAULT_FUEL, 2);
        let a = capture_traces(&prog, DEFAULT_FUEL);
        let b = capture_traces(&prog, DEFAULT_FUEL);
        let (ta, tb) = (&a["test_audit"].1, &b["test_audit"].1);
        // Unmasked, the two runs differ in the token value...
        assert_ne!(compare_traces(ta, tb, &TestMask::default()), (false, false));
        // ...masked, they do not.
        assert_eq!(compare_traces(ta, tb, &mask.for_test("test_audit")), (false, false));
    }

    #[test]
    fn comparison_is_symmetric_and_reflexive() {
        let prog = checked(LOOPY);
        let traces = capture_traces(&prog, DEFAULT_FUEL);
        let t = &traces["test_total"].1;
        let mask = TestMask::default();
        assert_eq!(compare_traces(t, t, &mask), (false, false));
        let noisy = checked(NOISY);
        let other = capture_traces(&noisy, DEFAULT_FUEL);
        let o = &other["test_audit"].1;
        assert_eq!(compare_traces(t, o, &mask), compare_traces(o, t, &mask));
    }

    #[test]
    fn extra_call_is_call_diversity() {
        let mut a = ExecutionTrace::default();
        a.record_call("f(int)->int".to_string());
        let mut b = ExecutionTrace::default();
        b.record_call("f(int)->int".to_string());
        b.record_call("g()->void".to_string());
        let (call_diff, data_diff) = compare_traces(&a, &b, &TestMask::default());
        assert!(call_diff);
        assert!(!data_diff);
    }

    #[test]
    fn changed_loop_bound_is_variable_diversity() {
        let original = checked(LOOPY);
        // Same result, different intermediate values: sum counts down
        // differently by iterating one extra time with a zero increment.
        let variant = checked(
            "fn total(n: int) -> int {\n\
                 let sum: int = 0;\n\
                 let i: int = 0;\n\
                 while i < n {\n\
                     sum = sum + i;\n\
                     i = i + 1;\n\
                 }\n\
                 sum = sum + 0;\n\
                 return sum;\n\
             }\n\
             fn test_total() {\n\
                 assert(total(4) == 6);\n\
             }\n",
        );
        let mask = build_noise_mask(&original, DEFAULT_FUEL, 2);
        let a = capture_traces(&original, DEFAULT_FUEL);
        let b = capture_traces(&variant, DEFAULT_FUEL);
        let (call_diff, data_diff) = compare_traces(
            &a["test_total"].1,
            &b["test_total"].1,
            &mask.for_test("test_total"),
        );
        // The appended no-op executes after the last condition check and
        // changes no logged value: no diversity either way.
        assert!(!call_diff);
        assert!(!data_diff);

        let swapped = checked(
            "fn total(n: int) -> int {\n\
                 let sum: int = 0;\n\
                 let i: int = 0;\n\
                 while i < n {\n\
                     i = i + 1;\n\
                     sum = sum + i;\n\
                 }\n\
                 return sum;\n\
             }\n\
             fn test_total() {\n\
                 assert(total(4) == 10);\n\
             }\n",
        );
        let c = capture_traces(&swapped, DEFAULT_FUEL);
        let (_, swapped_data_diff) = compare_traces(
            &a["test_total"].1,
            &c["test_total"].1,
            &mask.for_test("test_total"),
        );
        assert!(swapped_data_diff);
    }
}
