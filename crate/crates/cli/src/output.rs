//! Output directory with JSON reports and CSV tables. Floats are written in
//! shortest round-trip form, so identical runs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use transseries::formal_series::{MatSeries, MultiIndex, Series};
use transseries::C64;

use crate::CliError;

pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<(), CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// Write `header` and `rows`; a header-only file when `rows` is empty.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn re_im(z: C64) -> [String; 2] {
    [num(z.re), num(z.im)]
}

pub fn index(p: &MultiIndex) -> String {
    p.entries().iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
}

/// `(prefix…, power, re, im)` for the nonzero coefficients of `s`.
pub fn series_rows(prefix: &[String], s: &Series<f64>, rows: &mut Vec<Vec<String>>) {
    for (m, c) in s.coeffs().iter().enumerate() {
        if c.norm() != 0.0 {
            let mut r = prefix.to_vec();
            r.push(m.to_string());
            r.extend(re_im(*c));
            rows.push(r);
        }
    }
}

/// `(kind, power, row, col, re, im)` for the nonzero entries of `m`.
pub fn matrix_rows(kind: &str, m: &MatSeries<f64>, rows: &mut Vec<Vec<String>>) {
    for (power, c) in m.coeffs().iter().enumerate() {
        for i in 0..c.rows() {
            for j in 0..c.cols() {
                let z = c[(i, j)];
                if z.norm() != 0.0 {
                    let [re, im] = re_im(z);
                    rows.push(vec![kind.into(), power.to_string(), i.to_string(), j.to_string(), re, im]);
                }
            }
        }
    }
}
