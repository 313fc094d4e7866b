use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::Format;
use cfclock::Result;

/// Collects artifacts of one run. All writes go through here, on one thread.
pub struct Output {
    dir: PathBuf,
    formats: Vec<Format>,
    written: Vec<String>,
}

impl Output {
    pub fn new(dir: &Path, formats: Vec<Format>) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), formats, written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn csv(&mut self, name: &str, body: &str) -> Result<()> {
        if self.wants(Format::Csv) {
            self.raw(name, body.as_bytes())?;
        }
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        if self.wants(Format::Json) {
            self.raw(name, pretty(value).as_bytes())?;
        }
        Ok(())
    }

    /// Written whatever the requested formats.
    pub fn raw(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

pub fn pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub cli_version: &'static str,
    pub core_version: &'static str,
    pub experiment: &'static str,
    pub config_path: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub outputs: &'a [String],
    pub started_unix_s: f64,
    pub wall_time_s: f64,
}
