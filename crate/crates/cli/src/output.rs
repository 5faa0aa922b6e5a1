use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

use crate::config::Format;

/// Writes `name.csv` and/or `name.json` under `dir`, or prints them to
/// stdout when no directory is configured.
pub fn emit(dir: Option<&Path>, format: Format, name: &str, csv: &str, json: &str) -> Result<()> {
    let parts = [(format.csv(), "csv", csv), (format.json(), "json", json)];
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for (enabled, ext, body) in parts {
                if enabled {
                    let path = dir.join(format!("{name}.{ext}"));
                    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
                }
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for (enabled, _, body) in parts {
                if enabled {
                    stdout.write_all(body.as_bytes())?;
                }
            }
        }
    }
    Ok(())
}
