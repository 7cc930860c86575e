//! Structured series reports with raw certified partial sums, dyadic block
//! sums, and the shared trend classifier.
//!
//! Divergence of an infinite series is not decidable numerically. The
//! classifier is a labeled heuristic over dyadic block contributions and the
//! report always carries the raw sums so the label can be audited.

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::certified::{big_rational, decimal_string, rational_string, CertifiedReal};

/// Trend label for a partial-sum sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    #[serde(rename = "diverging-trend")]
    Diverging,
    #[serde(rename = "converging-trend")]
    Converging,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl std::fmt::Display for Trend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Trend::Diverging => "diverging-trend",
            Trend::Converging => "converging-trend",
            Trend::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Classify from certified dyadic block sums (lo, hi enclosures).
///
/// - diverging-trend: the last two block-to-block ratios are certified
///   at least 0.8.
/// - converging-trend: the last four ratios are certified at most 0.95 and
///   the total decay across that five-block window is certified at most 0.5;
///   or, with at least three blocks, the last two ratios are certified at
///   most 0.25 (fast collapse).
/// - otherwise inconclusive (including too little data).
pub fn classify_blocks(blocks: &[(BigRational, BigRational)]) -> Trend {
    let n = blocks.len();
    if n < 3 {
        return Trend::Inconclusive;
    }
    for (lo, _) in blocks.iter() {
        if !lo.is_positive() {
            return Trend::Inconclusive;
        }
    }
    let ratio_lo = |i: usize| &blocks[i].0 / &blocks[i - 1].1;
    let ratio_hi = |i: usize| &blocks[i].1 / &blocks[i - 1].0;

    let c_div = big_rational(4, 5);
    if ratio_lo(n - 1) >= c_div && ratio_lo(n - 2) >= c_div {
        return Trend::Diverging;
    }

    let c_fast = big_rational(1, 4);
    if ratio_hi(n - 1) <= c_fast && ratio_hi(n - 2) <= c_fast {
        return Trend::Converging;
    }

    if n >= 5 {
        let c_step = big_rational(19, 20);
        let c_total = big_rational(1, 2);
        let steps_ok = (n - 4..n).all(|i| ratio_hi(i) <= c_step);
        let total_hi = &blocks[n - 1].1 / &blocks[n - 5].0;
        if steps_ok && total_hi <= c_total {
            return Trend::Converging;
        }
    }
    Trend::Inconclusive
}

/// Serializable view of a certified value: decimal with error bar, plus the
/// exact rational when the value is exact.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertValue {
    pub value: String,
    pub error: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

impl CertValue {
    pub fn from_certified(c: &CertifiedReal) -> Self {
        CertValue {
            value: decimal_string(c.value(), 12),
            error: decimal_string(c.error(), 3),
            exact: if c.is_exact() { Some(rational_string(c.value())) } else { None },
        }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        CertValue {
            value: decimal_string(r, 12),
            error: "0".to_string(),
            exact: Some(rational_string(r)),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesRow {
    pub index: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<CertValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<CertValue>,
    pub term: CertValue,
    pub partial_sum: CertValue,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockSum {
    /// Block covers indices in (from, to].
    pub from: u64,
    pub to: u64,
    pub sum: CertValue,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub index: u64,
    pub partial_sum: CertValue,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesReport {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    pub index_max: u64,
    pub precision_note: String,
    pub classification: Trend,
    pub checkpoints: Vec<Checkpoint>,
    pub blocks: Vec<BlockSum>,
    /// Per-index rows; elided for reports over very long index ranges.
    pub rows: Vec<SeriesRow>,
}

impl SeriesReport {
    /// CSV with the columns k, q_k, ratio, phi_qk, term, partial_sum.
    /// Reports without per-index rows emit one line per checkpoint.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,q_k,ratio,phi_qk,term,partial_sum\n");
        if self.rows.is_empty() {
            for cp in &self.checkpoints {
                out.push_str(&format!("{},,,,,{}\n", cp.index, cp.partial_sum.value));
            }
        } else {
            for r in &self.rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.index,
                    r.q.as_deref().unwrap_or(""),
                    r.ratio.as_ref().map(|c| c.value.as_str()).unwrap_or(""),
                    r.phi.as_ref().map(|c| c.value.as_str()).unwrap_or(""),
                    r.term.value,
                    r.partial_sum.value,
                ));
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}
