use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Per-iteration history for one solver. Optional columns are emitted only
/// when present; a cell stays empty where the column has no value yet.
#[derive(Debug, Clone, Default)]
pub struct History {
    pub rel_residual: Vec<f64>,
    pub rel_residual_explicit: Option<Vec<f64>>,
    /// Estimates and the iteration of the first one.
    pub error_estimate: Option<(usize, Vec<f64>)>,
}

impl History {
    pub fn rows(&self) -> usize {
        self.rel_residual.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,rel_residual");
        if self.rel_residual_explicit.is_some() {
            out.push_str(",rel_residual_explicit");
        }
        if self.error_estimate.is_some() {
            out.push_str(",error_estimate");
        }
        out.push('\n');
        for (i, r) in self.rel_residual.iter().enumerate() {
            let k = i + 1;
            write!(out, "{k},{}", num(*r)).unwrap();
            if let Some(ex) = &self.rel_residual_explicit {
                out.push(',');
                if let Some(v) = ex.get(i) {
                    out.push_str(&num(*v));
                }
            }
            if let Some((first, est)) = &self.error_estimate {
                out.push(',');
                if let Some(v) = k.checked_sub(*first).and_then(|j| est.get(j)) {
                    out.push_str(&num(*v));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Long-format CSV of several residual histories.
pub fn combined_csv<'a>(histories: impl IntoIterator<Item = (&'a str, &'a [f64])>) -> String {
    let mut out = String::from("solver,iter,rel_residual\n");
    for (solver, hist) in histories {
        for (i, r) in hist.iter().enumerate() {
            writeln!(out, "{solver},{},{}", i + 1, num(*r)).unwrap();
        }
    }
    out
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_text(dir, name, &(text + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.5e-300, -7.0e12, f64::MIN_POSITIVE] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn optional_columns() {
        let h = History {
            rel_residual: vec![0.5, 0.25, 0.125],
            rel_residual_explicit: Some(vec![0.5, 0.25, 0.125]),
            error_estimate: Some((2, vec![0.01, 0.001])),
        };
        let csv = h.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "iter,rel_residual,rel_residual_explicit,error_estimate");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(','));
        assert!(lines[2].starts_with("2,"));
        assert_eq!(lines[3].split(',').count(), 4);

        let plain = History {
            rel_residual: vec![1.0],
            ..History::default()
        };
        assert_eq!(plain.to_csv().lines().next(), Some("iter,rel_residual"));
    }

    #[test]
    fn combined_layout() {
        let a = [1.0, 0.5];
        let b = [0.25];
        let csv = combined_csv([("x", &a[..]), ("y", &b[..])]);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().nth(3).unwrap().starts_with("y,1,"));
    }
}
