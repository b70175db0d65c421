//! Run directories and manifests.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::CliError;

pub struct RunDir {
    pub path: PathBuf,
    files: Vec<String>,
    started: Instant,
    started_unix: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    seed: Option<u64>,
    threads: usize,
    /// The resolved configuration; rerunning with it as `--config` regenerates every file.
    config: &'a str,
    config_source: Option<String>,
    files: &'a [String],
    started_unix: u64,
    wall_seconds: f64,
}

impl RunDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(path)?;
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(RunDir { path: path.to_path_buf(), files: Vec::new(), started: Instant::now(), started_unix })
    }

    pub fn write_with(&mut self, name: &str, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), CliError> {
        let mut w = BufWriter::new(fs::File::create(self.path.join(name))?);
        f(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).expect("serializable");
        self.write_with(name, |w| writeln!(w, "{text}"))
    }

    pub fn finish(mut self, command: &str, seed: Option<u64>, threads: usize, config: &str, source: Option<&Path>) -> Result<PathBuf, CliError> {
        self.write_with("config.toml", |w| w.write_all(config.as_bytes()))?;
        let m = Manifest {
            tool: "hexwalk",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            threads: if threads == 0 { rayon::current_num_threads() } else { threads },
            config,
            config_source: source.map(|p| p.display().to_string()),
            files: &self.files,
            started_unix: self.started_unix,
            wall_seconds: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&m).expect("serializable");
        fs::write(self.path.join("manifest.json"), text + "\n")?;
        Ok(self.path)
    }
}
