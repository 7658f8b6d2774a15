use ccd_core::diagnostics::Diagnostic;
use ccd_core::montecarlo::PRNG;
use serde::Serialize;
use serde_json::Value;

/// Machine-readable result of one command; see `docs/report.schema.json`.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub model: Option<String>,
    /// closed, oracle, mcs, or all for the multi-route reports.
    pub method: Option<&'static str>,
    pub t_years: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub prng: Option<&'static str>,
    pub results: Value,
    pub diagnostics: Vec<Diagnostic>,
}

impl RunReport {
    pub fn new(command: &'static str) -> Self {
        Self {
            tool: "ccd",
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            model: None,
            method: None,
            t_years: None,
            seed: None,
            samples: None,
            prng: None,
            results: Value::Null,
            diagnostics: Vec::new(),
        }
    }

    pub fn set_sampling(&mut self, method: &'static str, samples: usize, seed: u64) {
        self.method = Some(method);
        self.samples = Some(samples);
        self.seed = Some(seed);
        self.prng = Some(PRNG);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
