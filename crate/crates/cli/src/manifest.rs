use std::path::{Path, PathBuf};
use std::time::Instant;

use lamp::LampError;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Provenance of one command run. Everything that varies between identical
/// reruns (wall time, block timings) lives here and nowhere else.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub wall_time_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Value>,
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Lamp(LampError::Io { path: path.display().to_string(), source })
}

/// JSON with non-finite numbers spelled out as strings, since JSON has no
/// infinity.
pub fn number(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v.is_nan() {
        Value::from("nan")
    } else if v > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

/// Collects inputs and outputs of a run and writes its manifest.
pub struct Run {
    command: &'static str,
    out_dir: PathBuf,
    inputs: Vec<InputHash>,
    outputs: Vec<String>,
    started: Instant,
}

impl Run {
    pub fn start(command: &'static str, out_dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(out_dir).map_err(|e| io_error(out_dir, e))?;
        Ok(Self {
            command,
            out_dir: out_dir.to_path_buf(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        })
    }

    /// Records the hash of an input file. Missing files surface later, from
    /// the loader, with a data error.
    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        std::fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        self.outputs.push(path.display().to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(LampError::from)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    /// Records a file written by the library under `name`.
    pub fn record(&mut self, name: &str) -> PathBuf {
        let path = self.path(name);
        self.outputs.push(path.display().to_string());
        path
    }

    pub fn finish<C: Serialize>(
        self,
        config: &C,
        seed: Option<u64>,
        threads: usize,
        timings: Option<Value>,
    ) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: self.command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: serde_json::to_value(config).map_err(LampError::from)?,
            inputs: self.inputs,
            outputs: self.outputs,
            seed,
            threads,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            timings,
        };
        let path = self.out_dir.join(format!("manifest.{}.json", self.command));
        let mut text = serde_json::to_string_pretty(&manifest).map_err(LampError::from)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| io_error(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_numbers_become_strings() {
        assert_eq!(number(1.5), Value::from(1.5));
        assert_eq!(number(f64::INFINITY), Value::from("inf"));
        assert_eq!(number(f64::NEG_INFINITY), Value::from("-inf"));
    }

    #[test]
    fn manifest_lists_hashed_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        std::fs::write(&input, "abc").unwrap();
        let mut run = Run::start("test", &dir.path().join("out")).unwrap();
        run.input(&input).unwrap();
        run.write_json("x.json", &serde_json::json!({"a": 1})).unwrap();
        run.finish(&serde_json::json!({}), Some(7), 1, None).unwrap();
        let text = std::fs::read_to_string(dir.path().join("out/manifest.test.json")).unwrap();
        let m: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(
            m["inputs"][0]["sha256"],
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(m["seed"], 7);
        assert!(m["outputs"][0].as_str().unwrap().ends_with("x.json"));
    }
}
