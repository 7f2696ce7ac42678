use serde::Serialize;
use serde_json::Value;

/// Machine-readable record of one analysis run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub operation: String,
    pub inputs: Value,
    pub outputs: Value,
    pub tolerances: Value,
    /// Outcome of any check carried by the run; `None` for plain computations.
    pub pass: Option<bool>,
}

impl AnalysisReport {
    pub fn new(operation: &str, inputs: Value, outputs: Value) -> Self {
        Self { operation: operation.into(), inputs, outputs, tolerances: Value::Null, pass: None }
    }

    pub fn with_check(mut self, tolerances: Value, pass: bool) -> Self {
        self.tolerances = tolerances;
        self.pass = Some(pass);
        self
    }
}
