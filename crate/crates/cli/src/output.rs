//! Result records, tables and plot data.

use std::io::Write;
use std::path::Path;

use entrolab::report::BoundKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TOOL: &str = "entrolab";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    CertificationUnavailable,
}

/// One reported number. `value_nats` is `None` when nothing qualified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub label: String,
    pub size: usize,
    pub value_nats: Option<f64>,
    pub value_bits: Option<f64>,
    pub bound_kind: BoundKind,
    /// Running minimum along the schedule, for schedule tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub running_min_nats: Option<f64>,
}

impl Item {
    pub fn new(
        label: impl Into<String>,
        size: usize,
        value_nats: Option<f64>,
        bound_kind: BoundKind,
    ) -> Self {
        Item {
            label: label.into(),
            size,
            value_nats,
            value_bits: value_nats.map(|v| v / std::f64::consts::LN_2),
            bound_kind,
            running_min_nats: None,
        }
    }

    pub fn with_running_min(mut self, running_min: f64) -> Self {
        self.running_min_nats = Some(running_min);
        self
    }
}

/// Everything a run reports, minus wall time, so identical configs give
/// identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub tool: String,
    pub version: String,
    pub task: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub status: Status,
    pub items: Vec<Item>,
    pub details: serde_json::Value,
}

/// Hex sha256 of the canonical config followed by each input file.
pub fn config_hash(canonical_config: &str, inputs: &[(String, String)]) -> String {
    let mut h = Sha256::new();
    h.update(canonical_config.as_bytes());
    for (name, body) in inputs {
        h.update([0u8]);
        h.update(name.as_bytes());
        h.update([0u8]);
        h.update(body.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn number(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn csv_table(record: &ResultRecord) -> String {
    let mut out = String::from("F_label,|F|,value_nats,value_bits,bound_kind\n");
    for item in &record.items {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&item.label),
            item.size,
            number(item.value_nats),
            number(item.value_bits),
            item.bound_kind
        ));
    }
    out
}

/// Two-column TSVs `(|F|, value)` and, when the record has one, `(|F|, running min)`.
pub fn plot_series(record: &ResultRecord) -> Result<(String, Option<String>), CliError> {
    let points: Vec<(usize, f64)> = record
        .items
        .iter()
        .filter_map(|i| i.value_nats.map(|v| (i.size, v)))
        .collect();
    if points.is_empty() {
        return Err(CliError::Plot(format!(
            "{} produced an empty series",
            record.task
        )));
    }
    let tsv = |header: &str, rows: &mut dyn Iterator<Item = (usize, f64)>| {
        let mut out = format!("size\t{header}\n");
        for (x, y) in rows {
            out.push_str(&format!("{x}\t{y}\n"));
        }
        out
    };
    let values = tsv("value_nats", &mut points.into_iter());
    let mins: Vec<(usize, f64)> = record
        .items
        .iter()
        .filter_map(|i| i.running_min_nats.map(|v| (i.size, v)))
        .collect();
    let running = (!mins.is_empty()).then(|| tsv("running_min_nats", &mut mins.into_iter()));
    Ok((values, running))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.join(name).display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(dir.join(name)).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(items: Vec<Item>) -> ResultRecord {
        ResultRecord {
            tool: TOOL.into(),
            version: "0".into(),
            task: "t".into(),
            config_hash: String::new(),
            seed: None,
            status: Status::Ok,
            items,
            details: serde_json::Value::Null,
        }
    }

    #[test]
    fn constant_series_gives_identical_rows() {
        let items = (0..3)
            .map(|r| Item::new(format!("B{r}"), r + 1, Some(2f64.ln()), BoundKind::Exact))
            .collect();
        let (tsv, running) = plot_series(&record(items)).unwrap();
        let ys: Vec<&str> = tsv
            .lines()
            .skip(1)
            .map(|l| l.split('\t').nth(1).unwrap())
            .collect();
        assert_eq!(ys.len(), 3);
        assert!(ys.iter().all(|y| *y == ys[0]));
        assert!(running.is_none());
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(plot_series(&record(vec![])).is_err());
        let none = vec![Item::new("n=4", 4, None, BoundKind::Lower)];
        assert!(plot_series(&record(none)).is_err());
    }

    #[test]
    fn labels_with_commas_are_quoted() {
        let csv = csv_table(&record(vec![Item::new(
            "{e,a}",
            2,
            Some(1.0),
            BoundKind::Upper,
        )]));
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "\"{e,a}\",2,1,1.4426950408889634,upper"
        );
    }
}
