use std::fs;
use std::io::Write;
use std::path::Path;

use super::aggregate::AggregateResult;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "state,score,score_err,final_score,final_score_err";

pub fn write_json(result: &AggregateResult, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(result)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json(path: &Path) -> Result<AggregateResult> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Per-level table, one row per level in id order.
pub fn write_csv(result: &AggregateResult, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in &result.per_level {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.state, row.score, row.score_err, row.final_score, row.final_score_err
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// `timestep<TAB>score` lines.
pub fn write_curve_tsv(points: &[(u64, f64)], path: &Path) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut text = String::from("timestep\tscore\n");
    for (t, v) in points {
        text.push_str(&format!("{t}\t{v}\n"));
    }
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
