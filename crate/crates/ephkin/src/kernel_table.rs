//! Text format for per-channel kernel overrides.
//!
//! One channel per line, `#` starts a comment:
//!
//! ```text
//! ep <lower> <upper> <branch> <mode index> <K>
//! pp <branch> <index> <branch> <index> <branch> <index> <K>
//! ```
//!
//! Mode indices are grid indices, so a mode's energy is `index * delta`. A pp
//! line lists the parent first.

use std::path::Path;

use ephkin_core::KernelEntry;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("cannot read kernel table {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("kernel table line {line}: {message}")]
    Syntax { line: usize, message: String },
}

pub fn read_table(path: &Path) -> Result<Vec<KernelEntry>, TableError> {
    let text = std::fs::read_to_string(path).map_err(|source| TableError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_table(&text)
}

pub fn parse_table(text: &str) -> Result<Vec<KernelEntry>, TableError> {
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let syntax = |message: String| TableError::Syntax { line, message };
        let expected = match fields[0] {
            "ep" => 6,
            "pp" => 8,
            other => {
                return Err(syntax(format!(
                    "unknown channel kind `{other}`, expected `ep` or `pp`"
                )))
            }
        };
        if fields.len() != expected {
            return Err(syntax(format!(
                "`{}` needs {} fields, found {}",
                fields[0],
                expected - 1,
                fields.len() - 1
            )));
        }
        let index = |k: usize| -> Result<usize, TableError> {
            fields[k].parse().map_err(|_| {
                syntax(format!(
                    "field {k} `{}` is not a non-negative integer",
                    fields[k]
                ))
            })
        };
        let kernel: f64 = fields[expected - 1]
            .parse()
            .map_err(|_| syntax(format!("kernel `{}` is not a number", fields[expected - 1])))?;
        if !kernel.is_finite() || kernel < 0.0 {
            return Err(syntax(format!(
                "kernel must be finite and non-negative, got {kernel}"
            )));
        }
        entries.push(if fields[0] == "ep" {
            KernelEntry::Ep {
                lower: index(1)?,
                upper: index(2)?,
                branch: index(3)?,
                mode_index: index(4)?,
                kernel,
            }
        } else {
            KernelEntry::Pp {
                parent: (index(1)?, index(2)?),
                first: (index(3)?, index(4)?),
                second: (index(5)?, index(6)?),
                kernel,
            }
        });
    }
    Ok(entries)
}
