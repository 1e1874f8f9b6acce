use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::args::Cli;
use crate::CliResult;

/// Run record written next to every command's outputs. Only `timings`
/// changes between identical runs.
pub struct Recorder {
    started: Instant,
    timings: BTreeMap<String, f64>,
    artifacts: Vec<PathBuf>,
    extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a Cli,
    seed: u64,
    versions: BTreeMap<&'static str, &'static str>,
    artifacts: &'a [PathBuf],
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    results: &'a BTreeMap<String, serde_json::Value>,
    timings: &'a BTreeMap<String, f64>,
}

impl Recorder {
    pub fn new() -> Self {
        Self { started: Instant::now(), timings: BTreeMap::new(), artifacts: Vec::new(), extra: BTreeMap::new() }
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.insert(format!("{stage}_s"), start.elapsed().as_secs_f64());
        out
    }

    pub fn artifact(&mut self, path: &Path) {
        self.artifacts.push(path.to_path_buf());
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) -> CliResult<()> {
        self.extra.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn finish(mut self, cli: &Cli, command: &str, primary: &Path) -> CliResult<()> {
        self.timings.insert("total_s".into(), self.started.elapsed().as_secs_f64());
        let path = cli.manifest.clone().unwrap_or_else(|| {
            let mut p = primary.as_os_str().to_owned();
            p.push(".manifest.json");
            PathBuf::from(p)
        });
        let versions = BTreeMap::from([
            ("spectral-topics", env!("CARGO_PKG_VERSION")),
            ("manifest", "1"),
        ]);
        let manifest = Manifest {
            command,
            config: cli,
            seed: cli.seed,
            versions,
            artifacts: &self.artifacts,
            results: &self.extra,
            timings: &self.timings,
        };
        let mut w = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}
