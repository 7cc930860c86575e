//! Monotone increasing positive test functions phi(n), extended to reals by
//! phi(x) = phi(floor(x)), with certified evaluation and a divergence
//! estimator for sum 1/(n phi(n)).

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::certified::{
    big_rational, ln_enclosure, rat_from_biguint, CertifiedReal, DyadicAccumulator,
};
use crate::error::Error;
use crate::report::{classify_blocks, BlockSum, CertValue, Checkpoint, SeriesReport};
use crate::Result;

/// Onset indices where the innermost log first exceeds 1; below them the
/// value is clamped to the onset value, keeping the function monotone.
/// depth 1: ln 3 > 1 >= ln 2; depth 2: lnln 16 > 1 >= lnln 15;
/// depth 3: lnlnln 3814280 > 1 >= lnlnln 3814279 (e^(e^e) = 3814279.104...).
const LOG_STACK_ONSET: [u64; 3] = [3, 16, 3_814_280];

#[derive(Clone, Debug)]
pub enum PhiSpec {
    /// phi(n) = c with c > 0.
    Constant(BigRational),
    /// Stacked logs: depth 1 = ln n, 2 = ln n * lnln n, 3 adds lnlnln n.
    /// Clamped below the onset index (see `LOG_STACK_ONSET`).
    LogStack { depth: u8 },
    /// phi(n) = n^exponent with rational exponent > 0.
    Power { exponent: BigRational },
    /// Explicit monotone values for n = 1.. with final-value extension.
    Table { values: Vec<BigRational> },
    /// Pointwise max(base, floor).
    Shifted { base: Box<PhiSpec>, floor: BigRational },
}

impl PhiSpec {
    pub fn shifted4(base: PhiSpec) -> PhiSpec {
        PhiSpec::Shifted { base: Box::new(base), floor: big_rational(4, 1) }
    }

    pub fn describe(&self) -> String {
        match self {
            PhiSpec::Constant(c) => format!("constant({c})"),
            PhiSpec::LogStack { depth } => format!("log_stack(depth={depth})"),
            PhiSpec::Power { exponent } => format!("power({exponent})"),
            PhiSpec::Table { values } => format!("table(len={})", values.len()),
            PhiSpec::Shifted { base, floor } => {
                format!("shifted({}, floor={floor})", base.describe())
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PhiSpec::Constant(c) => {
                if !c.is_positive() {
                    return Err(Error::validation("constant phi must be positive"));
                }
            }
            PhiSpec::LogStack { depth } => {
                if !(1..=3).contains(depth) {
                    return Err(Error::validation("log stack depth must be 1, 2 or 3"));
                }
            }
            PhiSpec::Power { exponent } => {
                if !exponent.is_positive() {
                    return Err(Error::validation("power exponent must be positive"));
                }
            }
            PhiSpec::Table { values } => {
                if values.is_empty() {
                    return Err(Error::validation("table phi needs at least one value"));
                }
                if !values[0].is_positive() {
                    return Err(Error::validation("table phi values must be positive"));
                }
                for w in values.windows(2) {
                    if w[1] < w[0] {
                        return Err(Error::validation("table phi must be monotone increasing"));
                    }
                }
            }
            PhiSpec::Shifted { base, floor } => {
                base.validate()?;
                if !floor.is_positive() {
                    return Err(Error::validation("shift floor must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Certified phi(n) with error at most `tol`.
    pub fn eval(&self, n: &BigUint, tol: &BigRational) -> Result<CertifiedReal> {
        if n.is_zero() {
            return Err(Error::validation("phi is defined for n >= 1"));
        }
        if !tol.is_positive() {
            return Err(Error::validation("tolerance must be positive"));
        }
        let mut prec = 64u32;
        loop {
            let v = self.eval_prec(n, prec)?;
            if v.error() <= tol {
                return Ok(v);
            }
            prec *= 2;
            if prec > 1 << 15 {
                return Err(Error::precision(format!(
                    "phi evaluation cannot reach tolerance {tol}"
                )));
            }
        }
    }

    pub(crate) fn eval_prec(&self, n: &BigUint, prec: u32) -> Result<CertifiedReal> {
        match self {
            PhiSpec::Constant(c) => Ok(CertifiedReal::exact(c.clone())),
            PhiSpec::LogStack { depth } => {
                let onset = LOG_STACK_ONSET[(*depth - 1) as usize];
                let nn = if *n < BigUint::from(onset) { BigUint::from(onset) } else { n.clone() };
                let x = rat_from_biguint(&nn);
                let (lo, hi) = ln_enclosure(&x, prec)?;
                let mut acc = CertifiedReal::from_interval(lo, hi);
                let mut inner = acc.clone();
                for _ in 1..*depth {
                    inner = inner.ln(prec)?;
                    acc = acc.mul(&inner);
                }
                Ok(acc)
            }
            PhiSpec::Power { exponent } => {
                if exponent.denom().is_one() {
                    let e = exponent
                        .numer()
                        .to_u32()
                        .ok_or_else(|| Error::validation("integer exponent too large"))?;
                    Ok(CertifiedReal::exact(rat_from_biguint(&n.pow(e))))
                } else {
                    let x = rat_from_biguint(n);
                    let (lo, hi) = ln_enclosure(&x, prec)?;
                    let lnx = CertifiedReal::from_interval(lo, hi);
                    lnx.scale(exponent).exp(prec)
                }
            }
            PhiSpec::Table { values } => {
                let idx = (n - BigUint::one())
                    .to_usize()
                    .map(|i| i.min(values.len() - 1))
                    .unwrap_or(values.len() - 1);
                Ok(CertifiedReal::exact(values[idx].clone()))
            }
            PhiSpec::Shifted { base, floor } => {
                let v = base.eval_prec(n, prec)?;
                let lo = v.lo().max(floor.clone());
                let hi = v.hi().max(floor.clone());
                Ok(CertifiedReal::from_interval(lo, hi))
            }
        }
    }

    /// Interval for the summand 1/(n phi(n)).
    fn term_interval(&self, n: u64, prec: u32) -> Result<(BigRational, BigRational)> {
        let nb = BigUint::from(n);
        let v = self.eval_prec(&nb, prec)?;
        let n_rat = big_rational(n as i64, 1);
        let lo_d = &n_rat * v.hi();
        let hi_d = &n_rat * v.lo();
        if !hi_d.is_positive() {
            return Err(Error::validation("phi must be positive"));
        }
        Ok((lo_d.recip(), hi_d.recip()))
    }
}

/// Partial sums of sum_{n<=N} 1/(n phi(n)) with a dyadic-block transform and
/// a trend classification.
///
/// Terms up to 4096 are summed directly; beyond that each dyadic block is
/// bracketed by 256 equal chunks using monotonicity of the summand, which
/// keeps the certified width of each block well under one percent.
pub fn khinchin_divergence_report(phi: &PhiSpec, n_max: u64) -> Result<SeriesReport> {
    if n_max < 2 {
        return Err(Error::validation("n_max must be at least 2"));
    }
    phi.validate()?;
    let prec = 96u32;
    let acc_prec = 160u32;
    let exact_top = n_max.min(4096);

    // prefix sums over the exact region at power-of-two boundaries
    let mut exact_acc = DyadicAccumulator::new(acc_prec);
    let mut exact_at: Vec<(u64, (BigRational, BigRational))> = Vec::new();
    for n in 1..=exact_top {
        let (lo, hi) = phi.term_interval(n, prec)?;
        exact_acc.add_interval(&lo, &hi);
        if n.is_power_of_two() || n == exact_top {
            exact_at.push((n, exact_acc.bounds()));
        }
    }
    let exact_sum = exact_acc.bounds();

    // chunked enclosure of sum over (a, b], for 4096 <= a < b
    let chunked = |a: u64, b: u64| -> Result<(BigRational, BigRational)> {
        let chunks = 256u64.min(b - a);
        let mut acc = DyadicAccumulator::new(acc_prec);
        let mut left = a;
        for i in 1..=chunks {
            let right = a + (b - a) * i / chunks;
            if right == left {
                continue;
            }
            let count = big_rational((right - left) as i64, 1);
            // summand is decreasing: bracket by the chunk endpoints
            let (t_lo, _) = phi.term_interval(right, prec)?;
            let (_, t_hi) = phi.term_interval(left + 1, prec)?;
            acc.add_interval(&(&count * t_lo), &(&count * t_hi));
            left = right;
        }
        Ok(acc.bounds())
    };

    // full dyadic blocks (2^j, 2^{j+1}] above the exact region
    let mut blocks: Vec<(u64, u64, (BigRational, BigRational))> = Vec::new();
    let mut j = 12u32;
    while exact_top == 4096 && (1u64 << (j + 1)) <= n_max {
        let (a, b) = (1u64 << j, 1u64 << (j + 1));
        blocks.push((a, b, chunked(a, b)?));
        j += 1;
    }

    // partial sum S(N) for arbitrary N
    let partial = |n: u64| -> Result<(BigRational, BigRational)> {
        if n <= exact_top {
            let snapped = exact_at
                .iter()
                .rev()
                .find(|(m, _)| *m <= n)
                .map(|(_, s)| s.clone())
                .unwrap_or((BigRational::zero(), BigRational::zero()));
            return Ok(snapped);
        }
        let mut acc = DyadicAccumulator::new(acc_prec);
        acc.add_interval(&exact_sum.0, &exact_sum.1);
        let mut covered = exact_top;
        for (_, b, s) in &blocks {
            if *b <= n {
                acc.add_interval(&s.0, &s.1);
                covered = *b;
            }
        }
        if covered < n {
            let (lo, hi) = chunked(covered, n)?;
            acc.add_interval(&lo, &hi);
        }
        Ok(acc.bounds())
    };

    let mut checkpoints = Vec::new();
    for n in [n_max / 4, n_max / 2, n_max] {
        if n >= 1 {
            let (lo, hi) = partial(n)?;
            checkpoints.push(Checkpoint {
                index: n,
                partial_sum: CertValue::from_certified(&CertifiedReal::from_interval(lo, hi)),
            });
        }
    }

    let class_blocks: Vec<(BigRational, BigRational)> =
        blocks.iter().map(|(_, _, s)| s.clone()).collect();
    let classification = classify_blocks(&class_blocks);

    Ok(SeriesReport {
        label: "khinchin".to_string(),
        theta: None,
        phi: Some(phi.describe()),
        index_max: n_max,
        precision_note: format!(
            "terms exact-summed to {exact_top}, blocks bracketed by 256 monotone chunks"
        ),
        classification,
        checkpoints,
        blocks: blocks
            .iter()
            .map(|(a, b, s)| BlockSum {
                from: *a,
                to: *b,
                sum: CertValue::from_certified(&CertifiedReal::from_interval(
                    s.0.clone(),
                    s.1.clone(),
                )),
            })
            .collect(),
        rows: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certified::parse_rational;
    use crate::report::Trend;
    use num_bigint::BigInt;

    fn tol(shift: u32) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << shift)
    }

    #[test]
    fn constant_is_exact_at_any_n() {
        let phi = PhiSpec::Constant(big_rational(4, 1));
        let v = phi.eval(&BigUint::from(10u64).pow(9), &tol(10)).unwrap();
        assert!(v.is_exact());
        assert_eq!(*v.value(), big_rational(4, 1));
    }

    #[test]
    fn log_stack_depth2_matches_oracle() {
        // phi(1618) = ln(1618) * lnln(1618) = 14.7777821947434628309823114106...
        let phi = PhiSpec::LogStack { depth: 2 };
        let v = phi.eval(&BigUint::from(1618u32), &tol(40)).unwrap();
        let oracle = parse_rational("147777821947434628309823114106/10000000000000000000000000000").unwrap();
        assert!((v.value() - &oracle).abs() <= v.error() + big_rational(1, 1_000_000_000));
    }

    #[test]
    fn shifted_clamps_to_floor() {
        let phi = PhiSpec::shifted4(PhiSpec::LogStack { depth: 1 });
        // ln 2 < 4 so the floor dominates exactly
        let v = phi.eval(&BigUint::from(2u32), &tol(30)).unwrap();
        assert_eq!(v.lo(), big_rational(4, 1));
        // far above the crossover the log dominates
        let big = BigUint::from(10u64).pow(9);
        let v = phi.eval(&big, &tol(30)).unwrap();
        assert!(v.lo() > big_rational(20, 1));
    }

    #[test]
    fn log_stack_onsets_bracket_unit_inner_log() {
        // innermost log crosses 1 exactly between onset-1 and onset
        for (depth, onset) in [(1u8, 3u64), (2, 16), (3, 3_814_280)] {
            let inner = |n: u64| -> CertifiedReal {
                let x = big_rational(n as i64, 1);
                let (lo, hi) = ln_enclosure(&x, 96).unwrap();
                let mut v = CertifiedReal::from_interval(lo, hi);
                for _ in 1..depth {
                    v = v.ln(96).unwrap();
                }
                v
            };
            assert!(inner(onset).lo() > BigRational::one(), "depth {depth}");
            assert!(inner(onset - 1).hi() < BigRational::one(), "depth {depth}");
        }
    }

    #[test]
    fn monotone_on_samples() {
        let specs = [
            PhiSpec::Constant(big_rational(7, 2)),
            PhiSpec::LogStack { depth: 1 },
            PhiSpec::LogStack { depth: 2 },
            PhiSpec::LogStack { depth: 3 },
            PhiSpec::Power { exponent: big_rational(1, 2) },
            PhiSpec::Table {
                values: vec![big_rational(1, 2), big_rational(1, 1), big_rational(9, 1)],
            },
            PhiSpec::shifted4(PhiSpec::LogStack { depth: 2 }),
        ];
        let t = tol(50);
        for phi in &specs {
            phi.validate().unwrap();
            let mut prev: Option<CertifiedReal> = None;
            let mut n = 1u64;
            while n <= 1_000_000 {
                let v = phi.eval(&BigUint::from(n), &t).unwrap();
                assert!(v.lo().is_positive() || v.value().is_positive());
                if let Some(p) = prev {
                    assert!(
                        p.lo() <= v.hi(),
                        "monotonicity violated for {} at n = {n}",
                        phi.describe()
                    );
                }
                prev = Some(v);
                n = n * 3 + 1;
            }
        }
    }

    #[test]
    fn khinchin_constant_diverges() {
        for c in [1i64, 4, 100] {
            let phi = PhiSpec::Constant(big_rational(c, 1));
            let rep = khinchin_divergence_report(&phi, 1 << 20).unwrap();
            assert_eq!(rep.classification, Trend::Diverging, "constant {c}");
        }
    }

    #[test]
    fn khinchin_power_half_converges() {
        // sum 1/n^{3/2} converges to zeta(3/2) = 2.6123753486854883...
        let phi = PhiSpec::Power { exponent: big_rational(1, 2) };
        let rep = khinchin_divergence_report(&phi, 1 << 20).unwrap();
        assert_eq!(rep.classification, Trend::Converging);
        let last = rep.checkpoints.last().unwrap();
        let v = parse_rational(&last.partial_sum.exact.clone().unwrap_or_default())
            .unwrap_or_else(|_| big_rational(0, 1));
        // partial sums stabilize below 2.7
        let shown: f64 = last.partial_sum.value.parse().unwrap();
        assert!(shown < 2.7 && shown > 2.5, "partial sum {shown}");
        let _ = v;
    }

    #[test]
    fn khinchin_loglog_diverges_slowly() {
        // direct summation to 10^7: growth is slow but certified nonstop
        let phi = PhiSpec::LogStack { depth: 2 };
        let rep = khinchin_divergence_report(&phi, 10_000_000).unwrap();
        assert_eq!(rep.classification, Trend::Diverging);
    }

    #[test]
    fn khinchin_shifted_floor_keeps_standing_assumption() {
        let phi = PhiSpec::shifted4(PhiSpec::LogStack { depth: 1 });
        for n in [1u64, 10, 1000, 1_000_000] {
            let v = phi.eval(&BigUint::from(n), &tol(30)).unwrap();
            assert!(v.lo() >= big_rational(4, 1));
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(PhiSpec::Constant(big_rational(0, 1)).validate().is_err());
        assert!(PhiSpec::LogStack { depth: 4 }.validate().is_err());
        assert!(PhiSpec::Table {
            values: vec![big_rational(2, 1), big_rational(1, 1)]
        }
        .validate()
        .is_err());
        let phi = PhiSpec::Constant(big_rational(4, 1));
        assert!(phi.eval(&BigUint::zero(), &tol(4)).is_err());
    }
}
