//! Python bindings: parse and inspect MiniLang programs, run their test
//! suites, synthesize variants with a seeded campaign, and replay stored
//! transformation records.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sosieforge::corpus;
use sosieforge::minilang::{parse_program, pretty_print, typecheck, Program};
use sosieforge::reactions::ReactionIndex;
use sosieforge::runtime::{run_suite, DEFAULT_FUEL};
use sosieforge::search::{
    build_report, classify_variant, report_json, run_campaign, CampaignConfig,
};
use sosieforge::transforms::{apply, TransformationKind, TransformationRecord};

/// A parsed MiniLang program (application functions plus tests).
#[pyclass(frozen, module = "sosieforge_py")]
pub struct MiniProgram {
    program: Program,
    content_hash: String,
}

fn content_hash(source: &str) -> String {
    corpus::source_hash(source)
}

#[pymethods]
impl MiniProgram {
    /// Canonical pretty-printed source.
    fn pretty(&self) -> String {
        pretty_print(&self.program)
    }

    /// Static diagnostics; empty means the program typechecks.
    fn typecheck(&self) -> Vec<String> {
        typecheck(&self.program).iter().map(|d| d.to_string()).collect()
    }

    fn statement_count(&self) -> usize {
        self.program.statement_count()
    }

    fn test_names(&self) -> Vec<String> {
        self.program.test_functions().iter().map(|f| f.name.clone()).collect()
    }

    /// Runs every test; returns (name, status, detail) triples.
    #[pyo3(signature = (fuel = None))]
    fn run_suite(&self, fuel: Option<u64>) -> Vec<(String, String, Option<String>)> {
        run_suite(&self.program, fuel.unwrap_or(DEFAULT_FUEL))
            .outcomes
            .into_iter()
            .map(|o| (o.name, o.status.as_str().to_string(), o.detail))
            .collect()
    }

    /// One JSON line per statement: its id and typed I/O shape.
    fn reactions_dump(&self) -> String {
        ReactionIndex::build(&self.program).dump_lines()
    }

    /// Classifies this program as a variant: "sosie", "degenerated", or
    /// "ill_formed".
    #[pyo3(signature = (fuel = None))]
    fn classify(&self, fuel: Option<u64>) -> String {
        classify_variant(&self.program, fuel.unwrap_or(DEFAULT_FUEL))
            .class
            .as_str()
            .to_string()
    }

    /// Replays a transformation record (JSON) against this program.
    fn apply_record(&self, record_json: &str) -> PyResult<MiniProgram> {
        let record: TransformationRecord = serde_json::from_str(record_json)
            .map_err(|e| PyValueError::new_err(format!("bad record: {}", e)))?;
        let applied = apply(&self.program, &record)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let source = pretty_print(&applied.program);
        Ok(MiniProgram { program: applied.program, content_hash: content_hash(&source) })
    }

    /// Runs a seeded synthesis campaign. Returns a summary whose
    /// `report_json` is byte-stable for a fixed program, seed, and budget.
    #[pyo3(signature = (seed, budget, kinds = None, fuel = None))]
    fn campaign(
        &self,
        seed: u64,
        budget: u64,
        kinds: Option<Vec<String>>,
        fuel: Option<u64>,
    ) -> PyResult<CampaignSummary> {
        let kinds = match kinds {
            Some(names) => {
                let mut parsed = Vec::new();
                for name in &names {
                    parsed.push(
                        name.parse::<TransformationKind>().map_err(PyValueError::new_err)?,
                    );
                }
                parsed
            }
            None => TransformationKind::ALL.to_vec(),
        };
        let config = CampaignConfig {
            seed,
            budget,
            kinds,
            fuel: fuel.unwrap_or(DEFAULT_FUEL),
            parallel: false,
        };
        let output = run_campaign(&self.program, &config)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let index = ReactionIndex::build(&self.program);
        let (report, _timing) =
            build_report("program", &self.program, &index, &output, &self.content_hash);
        let mut classes = Vec::new();
        let mut sosie_records = Vec::new();
        for outcome in &output.outcomes {
            classes.push((outcome.record.kind.to_string(), outcome.class.as_str().to_string()));
            if outcome.class == sosieforge::search::VariantClass::Sosie {
                sosie_records.push(
                    serde_json::to_string(&outcome.record)
                        .map_err(|e| PyValueError::new_err(e.to_string()))?,
                );
            }
        }
        let stats = &output.stats;
        Ok(CampaignSummary {
            attempts: stats.values().map(|s| s.attempts).sum(),
            variants: stats.values().map(|s| s.variants).sum(),
            sosies: stats.values().map(|s| s.sosies).sum(),
            eligible_points: output.eligible.len() as u64,
            classes,
            sosie_records,
            report_json: report_json(&report),
        })
    }
}

/// Aggregate outcome of one campaign run.
#[pyclass(frozen, module = "sosieforge_py")]
pub struct CampaignSummary {
    #[pyo3(get)]
    pub attempts: u64,
    #[pyo3(get)]
    pub variants: u64,
    #[pyo3(get)]
    pub sosies: u64,
    #[pyo3(get)]
    pub eligible_points: u64,
    /// (kind, class) per unique evaluated variant, in draw order.
    #[pyo3(get)]
    pub classes: Vec<(String, String)>,
    /// Replayable record JSON for each sosie, in draw order.
    #[pyo3(get)]
    pub sosie_records: Vec<String>,
    /// Deterministic campaign report (JSON text).
    #[pyo3(get)]
    pub report_json: String,
}

/// Parses MiniLang source text into a program.
#[pyfunction]
fn parse(source: &str) -> PyResult<MiniProgram> {
    match parse_program(source) {
        Ok(program) => Ok(MiniProgram { program, content_hash: content_hash(source) }),
        Err(diags) => {
            let lines: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
            Err(PyValueError::new_err(lines.join("\n")))
        }
    }
}

/// Loads a corpus program directory (src/ + tests/); returns (name, program).
#[pyfunction]
fn load_corpus(path: &str) -> PyResult<(String, MiniProgram)> {
    let corpus = corpus::load_corpus(std::path::Path::new(path))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let hash = corpus::corpus_hash(&corpus);
    Ok((corpus.name.clone(), MiniProgram { program: corpus.program, content_hash: hash }))
}

#[pymodule]
fn sosieforge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MiniProgram>()?;
    m.add_class::<CampaignSummary>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(load_corpus, m)?)?;
    Ok(())
}
