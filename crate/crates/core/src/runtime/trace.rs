//! Execution traces: the per-test observation record used to compare a
//! variant against its original.
//!
//! Two event families are captured:
//! - call events: one entry per function invocation, carrying the callee's
//!   rendered signature, in invocation order (the test function included);
//! - data events: one snapshot per `if`/`while` condition evaluation,
//!   holding the rendered value of every variable lexically in scope at
//!   that control point.

use std::collections::BTreeMap;

use crate::minilang::StatementId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataEvent {
    pub control_point: StatementId,
    /// Variable name -> canonical value rendering, sorted by name.
    pub snapshot: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExecutionTrace {
    pub call_events: Vec<String>,
    pub data_events: Vec<DataEvent>,
    /// Pre-rendered dump lines in exact capture order, interleaving both
    /// event families.
    ordered: Vec<String>,
}

impl ExecutionTrace {
    pub fn record_call(&mut self, signature: String) {
        self.ordered.push(format!("CALL {}", signature));
        self.call_events.push(signature);
    }

    pub fn record_data(&mut self, control_point: StatementId, snapshot: BTreeMap<String, String>) {
        let joined: Vec<String> = snapshot.iter().map(|(k, v)| format!("{}={}", k, v)).collect();
        self.ordered.push(format!("DATA {} {}", control_point, joined.join(";")));
        self.data_events.push(DataEvent { control_point, snapshot });
    }

    /// Line-oriented dump: `CALL <signature>` and
    /// `DATA <stmt-id> <name>=<render>;...` records, one per line, in
    /// capture order.
    pub fn to_dump_text(&self) -> String {
        let mut out = String::new();
        for line in &self.ordered {
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}
