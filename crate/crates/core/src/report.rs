use serde::{Deserialize, Serialize};

/// How a reported number relates to the quantity it estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Exact,
    Upper,
    Lower,
    /// Neither a certified upper nor lower bound.
    Heuristic,
    /// Maximum over a finite tail standing in for a limsup.
    LimsupSurrogate,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::Exact => "exact",
            BoundKind::Upper => "upper",
            BoundKind::Lower => "lower",
            BoundKind::Heuristic => "heuristic",
            BoundKind::LimsupSurrogate => "limsup-surrogate",
        }
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One finite set of a schedule together with its normalized value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub label: String,
    pub size: usize,
    /// Normalized value in nats.
    pub value: f64,
    pub running_min: f64,
    pub bound: BoundKind,
}

/// Running minima of `values`, in schedule order.
pub fn running_min(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut cur = f64::INFINITY;
    values
        .into_iter()
        .map(|v| {
            cur = cur.min(v);
            cur
        })
        .collect()
}
