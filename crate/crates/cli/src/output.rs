use std::fmt::Display;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::CliError;

/// CSV writer whose first line is `# config_sha256=<hash> seed=<seed>`.
pub struct CsvFile {
    path: PathBuf,
    out: BufWriter<fs::File>,
}

impl CsvFile {
    pub fn create(dir: &Path, name: &str, hash: &str, seed: u64, columns: &[&str]) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let path = dir.join(name);
        let file = fs::File::create(&path).map_err(|e| io_error(&path, e))?;
        let mut f = CsvFile {
            path,
            out: BufWriter::new(file),
        };
        f.line(&format!("# config_sha256={hash} seed={seed}"))?;
        f.line(&columns.join(","))?;
        Ok(f)
    }

    fn line(&mut self, s: &str) -> Result<(), CliError> {
        writeln!(self.out, "{s}").map_err(|e| io_error(&self.path, e))
    }

    pub fn row(&mut self, fields: &[&dyn Display]) -> Result<(), CliError> {
        let s: Vec<String> = fields.iter().map(|f| f.to_string()).collect();
        self.line(&s.join(","))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.out.flush().map_err(|e| io_error(&self.path, e))?;
        Ok(self.path)
    }
}

/// Empty cell for absent values.
pub fn opt<T: Display>(v: Option<T>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}
