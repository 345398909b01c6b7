use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Full double precision, 17 significant digits.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// A set of files committed together: nothing lands in `dir` until every
/// file has been rendered.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn commit(self) -> Result<Vec<PathBuf>, CliError> {
        let fail = |path: &Path, e: std::io::Error| CliError::Write {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        std::fs::create_dir_all(&self.dir).map_err(|e| fail(&self.dir, e))?;
        let mut staged = Vec::new();
        for (name, bytes) in &self.files {
            let tmp = self.dir.join(format!(".{name}.partial"));
            std::fs::write(&tmp, bytes).map_err(|e| fail(&tmp, e))?;
            staged.push((tmp, self.dir.join(name)));
        }
        let mut written = Vec::new();
        for (tmp, dest) in staged {
            std::fs::rename(&tmp, &dest).map_err(|e| fail(&dest, e))?;
            written.push(dest);
        }
        Ok(written)
    }
}

pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Write {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    };
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Write {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    })
}
