//! The divergence criterion series and the side conditions on the
//! convergent denominators.
//!
//! The central series has terms log(min(phi(q_k), q_{k+1}/q_k)) / phi(q_k);
//! its shifted variant divides by phi(q_{k+1}) instead. Divergence of either
//! is equivalent, so the two classifications must never contradict.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::certified::{
    big_rational, decimal_string, rat_from_biguint, CertifiedReal, DyadicAccumulator,
};
use crate::cf::{ConvergentTable, IrrationalSpec};
use crate::error::Error;
use crate::phi::PhiSpec;
use crate::report::{classify_blocks, BlockSum, CertValue, Checkpoint, SeriesReport, SeriesRow};
use crate::Result;

/// Which phi argument sits in the denominator of the series term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Denominator {
    AtQk,
    AtQkPlus1,
}

fn phi_certified(phi: &PhiSpec, q: &BigUint, rel_bits: u32) -> Result<CertifiedReal> {
    let coarse = phi.eval(q, &BigRational::one())?;
    let scale = coarse.hi().max(big_rational(1, 1 << 20));
    let tol = scale / rat_from_biguint(&(BigUint::one() << rel_bits));
    phi.eval(q, &tol)
}

fn render_big(q: &BigUint) -> String {
    if q.bits() <= 80 {
        q.to_string()
    } else {
        decimal_string(&rat_from_biguint(q), 12)
    }
}

/// Dyadic blocks (2^j, 2^{j+1}] over the index k, starting at (2, 4].
fn index_blocks(k_max: u64, terms: &[(u64, CertifiedReal)]) -> Vec<BlockSum> {
    let mut out = Vec::new();
    let mut j = 1u32;
    while (1u64 << (j + 1)) <= k_max {
        let (a, b) = (1u64 << j, 1u64 << (j + 1));
        let mut acc = DyadicAccumulator::new(192);
        for (k, t) in terms.iter() {
            if *k > a && *k <= b {
                acc.add_certified(t);
            }
        }
        let c = acc.to_certified();
        out.push(BlockSum { from: a, to: b, sum: CertValue::from_certified(&c) });
        j += 1;
    }
    out
}

fn block_bounds(blocks: &[BlockSum], terms: &[(u64, CertifiedReal)]) -> Vec<(BigRational, BigRational)> {
    // recompute exact bounds from terms; BlockSum only carries strings
    let mut out = Vec::new();
    for b in blocks {
        let mut acc = DyadicAccumulator::new(192);
        for (k, t) in terms.iter() {
            if *k > b.from && *k <= b.to {
                acc.add_certified(t);
            }
        }
        out.push(acc.bounds());
    }
    out
}

fn series_from_terms(
    label: &str,
    theta: &IrrationalSpec,
    phi: Option<&PhiSpec>,
    k_max: u64,
    rows_data: Vec<(u64, Option<String>, Option<CertifiedReal>, Option<CertifiedReal>, CertifiedReal)>,
) -> SeriesReport {
    let mut acc = DyadicAccumulator::new(192);
    let mut rows = Vec::with_capacity(rows_data.len());
    let mut terms: Vec<(u64, CertifiedReal)> = Vec::new();
    let mut checkpoints = Vec::new();
    for (k, q_str, ratio, phi_v, term) in rows_data {
        acc.add_certified(&term);
        let partial = acc.to_certified();
        terms.push((k, term.clone()));
        rows.push(SeriesRow {
            index: k,
            q: q_str,
            ratio: ratio.map(|c| CertValue::from_certified(&c)),
            phi: phi_v.map(|c| CertValue::from_certified(&c)),
            term: CertValue::from_certified(&term),
            partial_sum: CertValue::from_certified(&partial),
        });
        if k.is_power_of_two() || k == k_max {
            checkpoints.push(Checkpoint {
                index: k,
                partial_sum: CertValue::from_certified(&partial),
            });
        }
    }
    let blocks = index_blocks(k_max, &terms);
    let classification = classify_blocks(&block_bounds(&blocks, &terms));
    SeriesReport {
        label: label.to_string(),
        theta: Some(theta.describe()),
        phi: phi.map(|p| p.describe()),
        index_max: k_max,
        precision_note: "certified terms, 192-bit dyadic partial sums".to_string(),
        classification,
        checkpoints,
        blocks,
        rows,
    }
}

fn criterion_series(
    theta: &IrrationalSpec,
    phi: &PhiSpec,
    k_max: u64,
    denom: Denominator,
    cap_k: usize,
) -> Result<SeriesReport> {
    if k_max < 1 {
        return Err(Error::validation("k_max must be at least 1"));
    }
    phi.validate()?;
    let mut table = ConvergentTable::new(theta.clone());
    table.extend_to(k_max as usize + 1, cap_k)?;

    let mut rows_data = Vec::new();
    for k in 0..=k_max as usize {
        let ratio_rat = BigRational::new(
            rat_from_biguint(table.q(k + 1)).numer().clone(),
            rat_from_biguint(table.q(k)).numer().clone(),
        );
        let ratio = CertifiedReal::exact(ratio_rat);
        let phi_qk = phi_certified(phi, table.q(k), 80)?;
        let phi_denom = match denom {
            Denominator::AtQk => phi_qk.clone(),
            Denominator::AtQkPlus1 => phi_certified(phi, table.q(k + 1), 80)?,
        };
        // interval min: exact on enclosures, no tie-breaking needed
        let mn = phi_qk.min_with(&ratio);
        if !mn.lo().is_positive() {
            return Err(Error::precision(format!(
                "cannot certify positivity of min(phi(q_k), ratio) at k = {k}"
            )));
        }
        let term = mn.ln(160)?.div(&phi_denom)?;
        rows_data.push((
            k as u64,
            Some(render_big(table.q(k))),
            Some(ratio),
            Some(phi_qk),
            term,
        ));
    }
    let label = match denom {
        Denominator::AtQk => "criterion_main",
        Denominator::AtQkPlus1 => "criterion_shifted",
    };
    Ok(series_from_terms(label, theta, Some(phi), k_max, rows_data))
}

/// Terms log(min(phi(q_k), q_{k+1}/q_k)) / phi(q_k) for k = 0..k_max.
pub fn main_series(
    theta: &IrrationalSpec,
    phi: &PhiSpec,
    k_max: u64,
    cap_k: usize,
) -> Result<SeriesReport> {
    criterion_series(theta, phi, k_max, Denominator::AtQk, cap_k)
}

/// Same terms with denominator phi(q_{k+1}).
pub fn shifted_series(
    theta: &IrrationalSpec,
    phi: &PhiSpec,
    k_max: u64,
    cap_k: usize,
) -> Result<SeriesReport> {
    criterion_series(theta, phi, k_max, Denominator::AtQkPlus1, cap_k)
}

/// Terms 1/log(q_k) for k = 2..k_max.
pub fn prop2_series(theta: &IrrationalSpec, k_max: u64, cap_k: usize) -> Result<SeriesReport> {
    if k_max < 2 {
        return Err(Error::validation("k_max must be at least 2"));
    }
    let mut table = ConvergentTable::new(theta.clone());
    table.extend_to(k_max as usize, cap_k)?;
    let mut rows_data = Vec::new();
    for k in 2..=k_max as usize {
        let q = rat_from_biguint(table.q(k));
        let lnq = CertifiedReal::exact(q).ln(160)?;
        let term = CertifiedReal::exact(BigRational::one()).div(&lnq)?;
        rows_data.push((k as u64, Some(render_big(table.q(k))), None, None, term));
    }
    Ok(series_from_terms("log_denominator_series", theta, None, k_max, rows_data))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthTrend {
    #[serde(rename = "bounded")]
    Bounded,
    #[serde(rename = "growing")]
    Growing,
    #[serde(rename = "unclear")]
    Unclear,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentialGrowthReport {
    pub theta: String,
    pub k_max: u64,
    /// max over 1 <= k <= k_max of q_k^(1/k)
    pub fitted_c: CertValue,
    /// true by definition of the fitted constant
    pub holds_up_to_k: bool,
    pub trend: GrowthTrend,
    /// q_k^(1/k) at dyadic checkpoints
    pub samples: Vec<(u64, CertValue)>,
}

/// Fit the smallest C with q_k <= C^k over the window, and report whether
/// the k-th roots look bounded or growing.
pub fn condition_i_check(
    theta: &IrrationalSpec,
    k_max: u64,
    cap_k: usize,
) -> Result<ExponentialGrowthReport> {
    if k_max < 2 {
        return Err(Error::validation("k_max must be at least 2"));
    }
    let mut table = ConvergentTable::new(theta.clone());
    table.extend_to(k_max as usize, cap_k)?;
    let root = |k: usize| -> Result<CertifiedReal> {
        let lnq = CertifiedReal::exact(table.q_rat(k)).ln(128)?;
        lnq.scale(&big_rational(1, k as i64)).exp(128)
    };
    let mut fitted: Option<CertifiedReal> = None;
    let mut samples = Vec::new();
    for k in 1..=k_max as usize {
        let r = root(k)?;
        fitted = Some(match fitted {
            None => r.clone(),
            Some(f) => f.max_with(&r),
        });
        if (k as u64).is_power_of_two() || k as u64 == k_max {
            samples.push((k as u64, CertValue::from_certified(&r)));
        }
    }
    let half = root((k_max / 2) as usize)?;
    let last = root(k_max as usize)?;
    let grow = half.scale(&big_rational(21, 20));
    let flat = half.scale(&big_rational(51, 50));
    let trend = if last.lo() >= grow.hi() {
        GrowthTrend::Growing
    } else if last.hi() <= flat.lo() {
        GrowthTrend::Bounded
    } else {
        GrowthTrend::Unclear
    };
    Ok(ExponentialGrowthReport {
        theta: theta.describe(),
        k_max,
        fitted_c: CertValue::from_certified(&fitted.expect("k_max >= 1")),
        holds_up_to_k: true,
        trend,
        samples,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LogRatioReport {
    pub theta: String,
    pub k_max: u64,
    /// max over k in [k_max/2, k_max] of (q_{k+1}/q_k) / log q_k
    pub fitted_d: CertValue,
    /// k skipped because log q_k <= 0
    pub skipped: Vec<u64>,
    /// k in the window whose ratio certifiably exceeds the supplied D
    pub violations: Vec<u64>,
    pub rows: Vec<(u64, CertValue)>,
}

/// Fit D in q_{k+1}/q_k <= D log q_k over the upper half window; report
/// violations against a user-supplied D if given.
pub fn condition_ii_check(
    theta: &IrrationalSpec,
    k_max: u64,
    user_d: Option<&BigRational>,
    cap_k: usize,
) -> Result<LogRatioReport> {
    if k_max < 3 {
        return Err(Error::validation("k_max must be at least 3"));
    }
    let mut table = ConvergentTable::new(theta.clone());
    table.extend_to(k_max as usize + 1, cap_k)?;
    let mut fitted: Option<CertifiedReal> = None;
    let mut skipped = Vec::new();
    let mut violations = Vec::new();
    let mut rows = Vec::new();
    for k in (k_max / 2) as usize..=k_max as usize {
        if table.q(k).is_one() {
            skipped.push(k as u64);
            continue;
        }
        let ratio = CertifiedReal::exact(BigRational::new(
            rat_from_biguint(table.q(k + 1)).numer().clone(),
            rat_from_biguint(table.q(k)).numer().clone(),
        ));
        let lnq = CertifiedReal::exact(table.q_rat(k)).ln(128)?;
        let r = ratio.div(&lnq)?;
        if let Some(d) = user_d {
            if r.lo() > *d {
                violations.push(k as u64);
            }
        }
        rows.push((k as u64, CertValue::from_certified(&r)));
        fitted = Some(match fitted {
            None => r,
            Some(f) => f.max_with(&r),
        });
    }
    let fitted = fitted.ok_or_else(|| Error::validation("window contained no usable k"))?;
    Ok(LogRatioReport {
        theta: theta.describe(),
        k_max,
        fitted_d: CertValue::from_certified(&fitted),
        skipped,
        violations,
        rows,
    })
}
