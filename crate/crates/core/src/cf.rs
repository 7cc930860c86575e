//! Exact continued-fraction engine: partial-quotient rules, convergent
//! tables, and certified evaluation of ||n*theta|| and ||n*theta - s||.
//!
//! The rotation number theta in (0, 1) is represented only by the rule for
//! its partial quotients a_k (a_0 = 0 throughout). Every real computation
//! goes through a convergent p_m/q_m with the explicit error bound
//! |theta - p_m/q_m| < 1/(q_m q_{m+1}).

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::certified::{ln_enclosure, rat_from_biguint, CertifiedReal};
use crate::error::Error;
use crate::Result;

/// Rule describing the partial-quotient sequence of an irrational in (0, 1).
#[derive(Clone)]
pub enum IrrationalSpec {
    /// Explicit leading quotients, then a tail rule (indexed by the absolute
    /// position k, not the offset into the tail).
    ExplicitList { prefix: Vec<BigUint>, tail: Box<IrrationalSpec> },
    /// a_k = a for all k >= 1.
    ConstantQuotient(u64),
    /// a_k = k.
    LinearQuotient,
    /// a_k = round(k^(ln ln k)) for k >= 3, with a_1 = a_2 = 1.
    LogLogPower,
    /// Arbitrary positive-integer rule; carries a name for reports.
    Custom { name: String, rule: Arc<dyn Fn(u64) -> BigUint + Send + Sync> },
}

impl std::fmt::Debug for IrrationalSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.describe())
    }
}

impl IrrationalSpec {
    /// Golden-ratio rotation: all partial quotients 1.
    pub fn golden() -> Self {
        IrrationalSpec::ConstantQuotient(1)
    }

    pub fn describe(&self) -> String {
        match self {
            IrrationalSpec::ExplicitList { prefix, tail } => {
                format!("explicit(len={}, tail={})", prefix.len(), tail.describe())
            }
            IrrationalSpec::ConstantQuotient(a) => format!("constant({a})"),
            IrrationalSpec::LinearQuotient => "linear".to_string(),
            IrrationalSpec::LogLogPower => "loglog_power".to_string(),
            IrrationalSpec::Custom { name, .. } => format!("custom({name})"),
        }
    }

    /// Partial quotient a_k for k >= 1.
    pub fn quotient(&self, k: u64) -> Result<BigUint> {
        if k == 0 {
            return Err(Error::validation("a_0 is fixed to 0; quotients start at k = 1"));
        }
        let a = match self {
            IrrationalSpec::ExplicitList { prefix, tail } => {
                if (k as usize) <= prefix.len() {
                    prefix[k as usize - 1].clone()
                } else {
                    tail.quotient(k)?
                }
            }
            IrrationalSpec::ConstantQuotient(a) => BigUint::from(*a),
            IrrationalSpec::LinearQuotient => BigUint::from(k),
            IrrationalSpec::LogLogPower => loglog_power_quotient(k)?,
            IrrationalSpec::Custom { rule, .. } => rule(k),
        };
        if a.is_zero() {
            return Err(Error::validation(format!(
                "partial quotient a_{k} = 0; quotients must be positive"
            )));
        }
        Ok(a)
    }
}

/// round(k^(ln ln k)) for k >= 3, decided by tightening a certified
/// enclosure of exp(ln(ln k) * ln k) until the rounding is unambiguous.
fn loglog_power_quotient(k: u64) -> Result<BigUint> {
    if k < 3 {
        return Ok(BigUint::one());
    }
    let k_rat = BigRational::from_integer(BigInt::from(k));
    let mut prec = 96u32;
    loop {
        let (l_lo, l_hi) = ln_enclosure(&k_rat, prec)?;
        let lnk = CertifiedReal::from_interval(l_lo, l_hi);
        let lnlnk = lnk.ln(prec)?;
        let x = lnk.mul(&lnlnk);
        let v = x.exp(prec)?;
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let lo = (v.lo() + &half).floor();
        let hi = (v.hi() + &half).floor();
        if lo == hi {
            let n = lo.to_integer();
            return n
                .to_biguint()
                .ok_or_else(|| Error::validation("negative quotient from rounding"));
        }
        prec *= 2;
        if prec > 1 << 14 {
            return Err(Error::precision(format!(
                "cannot decide round(k^(ln ln k)) at k = {k}"
            )));
        }
    }
}

#[derive(Clone, Debug)]
struct Row {
    a: BigUint,
    p: BigUint,
    q: BigUint,
}

/// Exact table of (a_k, p_k, q_k), extended lazily from its spec.
///
/// Immutable once extended: all read methods take `&self`; extension is the
/// only `&mut` operation.
#[derive(Clone, Debug)]
pub struct ConvergentTable {
    spec: IrrationalSpec,
    rows: Vec<Row>,
}

pub const DEFAULT_CAP_K: usize = 100_000;

impl ConvergentTable {
    pub fn new(spec: IrrationalSpec) -> Self {
        // k = 0 row: a_0 = 0, p_0 = 0, q_0 = 1
        let rows = vec![Row { a: BigUint::zero(), p: BigUint::zero(), q: BigUint::one() }];
        ConvergentTable { spec, rows }
    }

    /// Build a table and extend until `pred(k, q_k)` holds, with a hard cap.
    pub fn extend_table(
        spec: IrrationalSpec,
        pred: impl Fn(usize, &BigUint) -> bool,
        cap_k: usize,
    ) -> Result<Self> {
        let mut t = ConvergentTable::new(spec);
        t.extend_until(pred, cap_k)?;
        Ok(t)
    }

    pub fn spec(&self) -> &IrrationalSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn a(&self, k: usize) -> &BigUint {
        &self.rows[k].a
    }

    pub fn p(&self, k: usize) -> &BigUint {
        &self.rows[k].p
    }

    pub fn q(&self, k: usize) -> &BigUint {
        &self.rows[k].q
    }

    pub fn q_rat(&self, k: usize) -> BigRational {
        rat_from_biguint(self.q(k))
    }

    fn push_row(&mut self) -> Result<()> {
        let k = self.rows.len() as u64;
        let a = self.spec.quotient(k)?;
        let (p, q) = if self.rows.len() == 1 {
            // p_1 = a_1 p_0 + 1, q_1 = a_1 q_0
            (BigUint::one(), a.clone())
        } else {
            let prev = &self.rows[self.rows.len() - 1];
            let prev2 = &self.rows[self.rows.len() - 2];
            (&a * &prev.p + &prev2.p, &a * &prev.q + &prev2.q)
        };
        self.rows.push(Row { a, p, q });
        Ok(())
    }

    /// Extend until the predicate over (k, q_k) first holds.
    pub fn extend_until(
        &mut self,
        pred: impl Fn(usize, &BigUint) -> bool,
        cap_k: usize,
    ) -> Result<()> {
        for k in 0..self.rows.len() {
            if pred(k, &self.rows[k].q) {
                return Ok(());
            }
        }
        loop {
            let k = self.rows.len();
            if k > cap_k {
                return Err(Error::cap("convergent table length", cap_k as u64));
            }
            self.push_row()?;
            if pred(k, &self.rows[k].q) {
                return Ok(());
            }
        }
    }

    /// Ensure rows 0..=k exist.
    pub fn extend_to(&mut self, k: usize, cap_k: usize) -> Result<()> {
        if k > cap_k {
            return Err(Error::cap("convergent table length", cap_k as u64));
        }
        while self.rows.len() <= k {
            self.push_row()?;
        }
        Ok(())
    }

    /// Check every table invariant; used by tests and the audit suite.
    pub fn verify_invariants(&self) -> Result<()> {
        for k in 1..self.rows.len() {
            if k >= 2 && self.rows[k].q <= self.rows[k - 1].q {
                return Err(Error::audit(format!("q not strictly increasing at k = {k}")));
            }
            if k >= 2 {
                let r = &self.rows[k];
                let a_q = &r.a * &self.rows[k - 1].q + &self.rows[k - 2].q;
                let a_p = &r.a * &self.rows[k - 1].p + &self.rows[k - 2].p;
                if a_q != r.q || a_p != r.p {
                    return Err(Error::audit(format!("recurrence fails at k = {k}")));
                }
                // q_{k} >= 2 q_{k-2} for all k >= 2
                let twice = &self.rows[k - 2].q << 1;
                if r.q < twice {
                    return Err(Error::audit(format!("doubling bound fails at k = {k}")));
                }
            }
            // |p_{k-1} q_k - p_k q_{k-1}| = 1
            let lhs = BigInt::from(self.rows[k - 1].p.clone())
                * BigInt::from(self.rows[k].q.clone())
                - BigInt::from(self.rows[k].p.clone())
                    * BigInt::from(self.rows[k - 1].q.clone());
            if lhs.abs() != BigInt::one() {
                return Err(Error::audit(format!("determinant != ±1 at k = {k}")));
            }
        }
        Ok(())
    }

    /// p_m/q_m with error bound 1/(q_m q_{m+1}); needs row m+1.
    pub fn theta_approx(&self, m: usize) -> Result<CertifiedReal> {
        if m + 1 >= self.rows.len() {
            return Err(Error::validation(format!(
                "theta_approx needs rows through {} but table has {}",
                m + 1,
                self.rows.len()
            )));
        }
        let value = BigRational::new(
            BigInt::from(self.rows[m].p.clone()),
            BigInt::from(self.rows[m].q.clone()),
        );
        let error = BigRational::new(
            BigInt::one(),
            BigInt::from(&self.rows[m].q * &self.rows[m + 1].q),
        );
        Ok(CertifiedReal::new(value, error))
    }

    /// Smallest m (with m+1 in the table) whose approximation error for
    /// multiples up to `n` is at most `tol`, i.e. n/(q_m q_{m+1}) <= tol.
    pub fn pick_level(&self, n: &BigUint, tol: &BigRational) -> Result<usize> {
        if !tol.is_positive() {
            return Err(Error::validation("tolerance must be positive"));
        }
        let n_rat = rat_from_biguint(n);
        for m in 0..self.rows.len().saturating_sub(1) {
            let qq = rat_from_biguint(&(&self.rows[m].q * &self.rows[m + 1].q));
            if &n_rat / qq <= *tol {
                return Ok(m);
            }
        }
        Err(Error::precision(format!(
            "table of length {} cannot certify multiples up to {n} at the requested tolerance",
            self.rows.len()
        )))
    }

    /// Extend the table until `pick_level` succeeds for (n, tol).
    pub fn ensure_tolerance(
        &mut self,
        n: &BigUint,
        tol: &BigRational,
        cap_k: usize,
    ) -> Result<()> {
        if !tol.is_positive() {
            return Err(Error::validation("tolerance must be positive"));
        }
        let n_rat = rat_from_biguint(n);
        loop {
            let last = self.rows.len() - 1;
            if last >= 1 {
                let qq = rat_from_biguint(&(&self.rows[last - 1].q * &self.rows[last].q));
                if &n_rat / qq <= *tol {
                    return Ok(());
                }
            }
            if self.rows.len() > cap_k {
                return Err(Error::cap("convergent table length", cap_k as u64));
            }
            self.push_row()?;
        }
    }

    /// ||n theta|| with error bound at most `tol`.
    pub fn dist_to_integer(&self, n: &BigUint, tol: &BigRational) -> Result<CertifiedReal> {
        let m = self.pick_level(n, tol)?;
        let u = (n * &self.rows[m].p) % &self.rows[m].q;
        let frac = BigRational::new(BigInt::from(u), BigInt::from(self.rows[m].q.clone()));
        let dist = circle_dist_to_zero(&frac);
        let err =
            rat_from_biguint(n) / rat_from_biguint(&(&self.rows[m].q * &self.rows[m + 1].q));
        Ok(CertifiedReal::new(dist, err))
    }

    /// Fractional part {n theta} in [0, 1) with error bound at most `tol`
    /// (as circle distance).
    pub fn orbit_point(&self, n: &BigUint, tol: &BigRational) -> Result<CertifiedReal> {
        let m = self.pick_level(n, tol)?;
        let u = (n * &self.rows[m].p) % &self.rows[m].q;
        let frac = BigRational::new(BigInt::from(u), BigInt::from(self.rows[m].q.clone()));
        let err =
            rat_from_biguint(n) / rat_from_biguint(&(&self.rows[m].q * &self.rows[m + 1].q));
        Ok(CertifiedReal::new(frac, err))
    }

    /// ||n theta - s|| for an exact rational target s.
    pub fn dist_to_target(
        &self,
        n: &BigUint,
        s: &BigRational,
        tol: &BigRational,
    ) -> Result<CertifiedReal> {
        let m = self.pick_level(n, tol)?;
        let nt = rat_from_biguint(n)
            * BigRational::new(
                BigInt::from(self.rows[m].p.clone()),
                BigInt::from(self.rows[m].q.clone()),
            );
        let d = nt - s;
        let frac = &d - d.floor();
        let dist = circle_dist_to_zero(&frac);
        let err =
            rat_from_biguint(n) / rat_from_biguint(&(&self.rows[m].q * &self.rows[m + 1].q));
        Ok(CertifiedReal::new(dist, err))
    }

    /// Ostrowski digits of n: the admissible (k, c_k) with n = sum c_k q_k,
    /// 0 <= c_k <= a_{k+1}, and c_{k-1} = 0 whenever c_k = a_{k+1}.
    /// Returned ascending in k, zero digits omitted.
    pub fn ostrowski_digits(&self, n: &BigUint) -> Result<Vec<(usize, BigUint)>> {
        if n.is_zero() {
            return Ok(Vec::new());
        }
        let top = self.rows.len() - 1;
        if self.rows[top].q < *n {
            return Err(Error::validation(format!(
                "table must extend past the largest q_k <= n = {n}"
            )));
        }
        let mut digits = Vec::new();
        let mut rem = n.clone();
        for k in (0..=top).rev() {
            if rem.is_zero() {
                break;
            }
            // With a_1 = 1 the slot q_1 = q_0 = 1 duplicates q_0; a final
            // unit goes to k = 0 (the canonical admissible form).
            if k == 1 && self.rows[1].q.is_one() && rem.is_one() {
                continue;
            }
            let q = &self.rows[k].q;
            if *q <= rem {
                let c = &rem / q;
                rem -= &c * q;
                digits.push((k, c));
            }
        }
        debug_assert!(rem.is_zero());
        digits.reverse();
        Ok(digits)
    }
}

/// Distance from a fractional value in [0, 1) to the nearest integer.
pub(crate) fn circle_dist_to_zero(frac: &BigRational) -> BigRational {
    let one_minus = BigRational::one() - frac;
    if *frac <= one_minus {
        frac.clone()
    } else {
        one_minus
    }
}

/// Batch evaluation of ||n theta|| via Ostrowski digits of the orbit.
///
/// Reference path: `dist_to_integer` per n. This recombines the signed
/// residues d_k = q_k theta_hat - p_k, so each n costs one digit expansion
/// plus small rational sums instead of a full multiply-mod.
#[cfg(feature = "ostrowski-accel")]
pub fn dist_batch_ostrowski(
    table: &ConvergentTable,
    ns: &[BigUint],
    tol: &BigRational,
) -> Result<Vec<CertifiedReal>> {
    let max_n = ns.iter().max().cloned().unwrap_or_else(BigUint::one);
    let m = table.pick_level(&max_n, tol)?;
    let theta = table.theta_approx(m)?;
    let mut residues: Vec<BigRational> = Vec::new();
    for k in 0..=m.min(table.len() - 1) {
        let r = rat_from_biguint(table.q(k)) * theta.value() - rat_from_biguint(table.p(k));
        residues.push(r);
    }
    let mut out = Vec::with_capacity(ns.len());
    for n in ns {
        let digits = table.ostrowski_digits(n)?;
        let mut acc = BigRational::zero();
        for (k, c) in &digits {
            if *k >= residues.len() {
                return Err(Error::validation("digit index beyond residue table"));
            }
            acc += rat_from_biguint(c) * &residues[*k];
        }
        let frac = &acc - acc.floor();
        let dist = circle_dist_to_zero(&frac);
        let err = rat_from_biguint(n) / rat_from_biguint(&(table.q(m) * table.q(m + 1)));
        out.push(CertifiedReal::new(dist, err));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certified::{big_rational, parse_rational};

    fn golden_table(rows: usize) -> ConvergentTable {
        let mut t = ConvergentTable::new(IrrationalSpec::golden());
        t.extend_to(rows, 10_000).unwrap();
        t
    }

    /// Independent straightforward recurrence used as the oracle.
    fn oracle_qs(aks: &[u64]) -> Vec<BigUint> {
        let mut q = vec![BigUint::one()];
        let mut q_prev = BigUint::zero(); // q_{-1}
        for &a in aks {
            let next = BigUint::from(a) * q.last().unwrap() + &q_prev;
            q_prev = q.last().unwrap().clone();
            q.push(next);
        }
        q
    }

    #[test]
    fn golden_denominators_are_fibonacci() {
        let t = ConvergentTable::extend_table(
            IrrationalSpec::golden(),
            |_, q| *q >= BigUint::from(13u32),
            100,
        )
        .unwrap();
        let qs: Vec<u64> = (0..t.len()).map(|k| t.q(k).try_into().unwrap()).collect();
        assert_eq!(qs, vec![1, 1, 2, 3, 5, 8, 13]);
        t.verify_invariants().unwrap();
    }

    #[test]
    fn linear_quotients_match_recurrence() {
        let mut t = ConvergentTable::new(IrrationalSpec::LinearQuotient);
        t.extend_to(4, 100).unwrap();
        let qs: Vec<u64> = (0..=4).map(|k| t.q(k).try_into().unwrap()).collect();
        assert_eq!(qs, vec![1, 1, 3, 10, 43]);
        let aks: Vec<u64> = (1..=4u64).collect();
        let oracle = oracle_qs(&aks);
        for k in 0..=4 {
            assert_eq!(t.q(k), &oracle[k]);
        }
    }

    #[test]
    fn constant_two_doubling_bound() {
        let mut t = ConvergentTable::new(IrrationalSpec::ConstantQuotient(2));
        t.extend_to(5, 100).unwrap();
        let oracle = oracle_qs(&[2, 2, 2, 2, 2]);
        for k in 0..=5 {
            assert_eq!(t.q(k), &oracle[k]);
        }
        assert_eq!(u64::try_from(t.q(5)).unwrap(), 70);
        assert_eq!(u64::try_from(t.q(3)).unwrap(), 12);
        assert!(t.q(5) >= &(t.q(3) << 1));
        t.verify_invariants().unwrap();
    }

    #[test]
    fn theta_approx_examples() {
        let t = golden_table(12);
        let a = t.theta_approx(5).unwrap();
        assert_eq!(*a.value(), big_rational(5, 8));
        assert_eq!(*a.error(), big_rational(1, 8 * 13));
        let z = t.theta_approx(0).unwrap();
        assert_eq!(*z.value(), big_rational(0, 1));
        assert_eq!(*z.error(), big_rational(1, 1));
    }

    #[test]
    fn theta_approx_matches_golden_constant() {
        // (sqrt 5 - 1)/2 truncated to 50 digits
        let theta = parse_rational(
            "61803398874989484820458683436563811772030917980576/100000000000000000000000000000000000000000000000000",
        )
        .unwrap();
        let t = golden_table(12);
        let a = t.theta_approx(10).unwrap();
        let diff = (a.value() - &theta).abs();
        assert!(diff < *a.error());
    }

    #[test]
    fn dist_to_integer_examples() {
        let t = golden_table(40);
        let tol = big_rational(1, 1_000_000);
        // n = q_6 = 13: ||13 theta|| in (1/(q_6+q_7), 1/q_7) = (1/34, 1/21)
        let d = t.dist_to_integer(&BigUint::from(13u32), &tol).unwrap();
        assert!(d.lo() > big_rational(1, 34));
        assert!(d.hi() < big_rational(1, 21));
        // high-precision oracle: ||13 theta|| = 0.0344418537486330266596288467533...
        let oracle =
            parse_rational("344418537486330266596288467533/10000000000000000000000000000000")
                .unwrap();
        assert!((d.value() - &oracle).abs() <= d.error() + big_rational(1, 1_000_000_000));

        // n = 1: ||theta|| = 1 - theta = 0.381966011250105151795413165634...
        let d1 = t.dist_to_integer(&BigUint::one(), &tol).unwrap();
        let oracle1 =
            parse_rational("381966011250105151795413165634/1000000000000000000000000000000")
                .unwrap();
        assert!((d1.value() - &oracle1).abs() <= d1.error() + big_rational(1, 1_000_000_000));

        // loose tolerance is always satisfiable
        let loose = t
            .dist_to_integer(&BigUint::from(12345u32), &big_rational(1, 2))
            .unwrap();
        assert!(loose.error() <= &big_rational(1, 2));
    }

    #[test]
    fn dist_monotone_precision() {
        let t = golden_table(60);
        let n = BigUint::from(987u32);
        let mut last_err: Option<BigRational> = None;
        for shift in [4u32, 8, 16, 32, 48] {
            let tol = BigRational::new(BigInt::one(), BigInt::one() << shift);
            let d = t.dist_to_integer(&n, &tol).unwrap();
            assert!(d.error() <= &tol);
            if let Some(prev) = last_err {
                assert!(*d.error() <= prev, "smaller tol widened the interval");
            }
            last_err = Some(d.error().clone());
        }
    }

    #[test]
    fn dist_interval_against_dyadic_backward_oracle() {
        // Backward interval evaluation of the continued fraction, an
        // independent route to theta at high precision.
        fn backward_theta(aks: &[u64]) -> (BigRational, BigRational) {
            let m = aks.len();
            let mut lo = big_rational(aks[m - 1] as i64, 1);
            let mut hi = &lo + BigRational::one();
            for idx in (0..m - 1).rev() {
                let a = big_rational(aks[idx] as i64, 1);
                // x -> a + 1/x is decreasing in x
                let new_lo = &a + hi.recip();
                let new_hi = &a + lo.recip();
                lo = new_lo;
                hi = new_hi;
            }
            (hi.recip(), lo.recip())
        }

        let specs: Vec<(IrrationalSpec, Vec<u64>)> = vec![
            (IrrationalSpec::golden(), vec![1; 80]),
            (IrrationalSpec::ConstantQuotient(2), vec![2; 60]),
            (IrrationalSpec::LinearQuotient, (1..=25).collect()),
        ];
        for (spec, aks) in specs {
            let (tlo, thi) = backward_theta(&aks);
            let mut t = ConvergentTable::new(spec);
            t.extend_to(60.min(aks.len() - 1), 10_000).unwrap();
            let tol = BigRational::new(BigInt::one(), BigInt::from(1u64 << 40));
            for n in [1u64, 2, 3, 17, 144, 999, 12345, 99_991] {
                let n_b = BigUint::from(n);
                let d = t.dist_to_integer(&n_b, &tol).unwrap();
                let n_rat = big_rational(n as i64, 1);
                let x_lo = &n_rat * &tlo;
                let x_hi = &n_rat * &thi;
                // same integer part required for a tight oracle
                if x_lo.floor() == x_hi.floor() {
                    let f_lo = &x_lo - x_lo.floor();
                    let f_hi = &x_hi - x_hi.floor();
                    let d_a = circle_dist_to_zero(&f_lo);
                    let d_b = circle_dist_to_zero(&f_hi);
                    let d_lo = d_a.clone().min(d_b.clone());
                    let d_hi = d_a.max(d_b);
                    assert!(
                        d.hi() >= d_lo && d.lo() <= d_hi,
                        "certified interval misses oracle for n = {n}"
                    );
                }
            }
        }
    }

    #[test]
    fn ostrowski_examples_and_roundtrip() {
        let t = golden_table(30);
        // n = 4 = q_3 + q_0 = 3 + 1
        let d = t.ostrowski_digits(&BigUint::from(4u32)).unwrap();
        assert_eq!(d, vec![(0, BigUint::one()), (3, BigUint::one())]);
        // n = q_7 is a single digit
        let d = t.ostrowski_digits(t.q(7)).unwrap();
        assert_eq!(d, vec![(7, BigUint::one())]);

        let mut lin = ConvergentTable::new(IrrationalSpec::LinearQuotient);
        lin.extend_to(10, 100).unwrap();
        let d = lin.ostrowski_digits(&BigUint::from(100u32)).unwrap();
        let sum: BigUint = d.iter().map(|(k, c)| c * lin.q(*k)).sum();
        assert_eq!(sum, BigUint::from(100u32));

        // round-trip and admissibility for all n <= 10^4
        for table in [&t, &lin] {
            for n in 1u64..=10_000 {
                let n_b = BigUint::from(n);
                let digits = table.ostrowski_digits(&n_b).unwrap();
                let sum: BigUint = digits.iter().map(|(k, c)| c * table.q(*k)).sum();
                assert_eq!(sum, n_b, "recombination failed at n = {n}");
                let mut dense = vec![BigUint::zero(); table.len()];
                for (k, c) in &digits {
                    dense[*k] = c.clone();
                }
                for k in 1..table.len() - 1 {
                    assert!(dense[k] <= *table.a(k + 1), "digit too large at n = {n}, k = {k}");
                    if dense[k] == *table.a(k + 1) && !dense[k].is_zero() {
                        assert!(
                            dense[k - 1].is_zero(),
                            "admissibility broken at n = {n}, k = {k}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn loglog_power_quotients() {
        // round(k^(ln ln k)) for k = 1..10
        let expect: Vec<u64> = vec![1, 1, 1, 2, 2, 3, 4, 5, 6, 7];
        let spec = IrrationalSpec::LogLogPower;
        for (i, e) in expect.iter().enumerate() {
            let a = spec.quotient(i as u64 + 1).unwrap();
            assert_eq!(u64::try_from(&a).unwrap(), *e, "at k = {}", i + 1);
        }
    }

    #[test]
    fn custom_rule_zero_is_rejected() {
        let spec = IrrationalSpec::Custom {
            name: "zero".into(),
            rule: Arc::new(|_| BigUint::zero()),
        };
        let mut t = ConvergentTable::new(spec);
        assert!(matches!(t.extend_to(3, 100), Err(Error::Validation(_))));
    }

    #[test]
    fn cap_is_enforced() {
        let r = ConvergentTable::extend_table(
            IrrationalSpec::golden(),
            |_, q| *q > BigUint::from(10u64).pow(100),
            50,
        );
        assert!(matches!(r, Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn invariants_hold_across_specs() {
        for spec in [
            IrrationalSpec::golden(),
            IrrationalSpec::ConstantQuotient(2),
            IrrationalSpec::ConstantQuotient(5),
            IrrationalSpec::LinearQuotient,
            IrrationalSpec::LogLogPower,
        ] {
            let mut t = ConvergentTable::new(spec);
            t.extend_to(40, 10_000).unwrap();
            t.verify_invariants().unwrap();
        }
    }

    #[cfg(feature = "ostrowski-accel")]
    #[test]
    fn ostrowski_batch_matches_reference() {
        let t = golden_table(40);
        let tol = big_rational(1, 1_000_000);
        let ns: Vec<BigUint> = (1u64..200).map(BigUint::from).collect();
        let fast = dist_batch_ostrowski(&t, &ns, &tol).unwrap();
        for (n, f) in ns.iter().zip(&fast) {
            let r = t.dist_to_integer(n, &tol).unwrap();
            let gap = (f.value() - r.value()).abs();
            assert!(gap <= f.error() + r.error());
        }
    }
}
