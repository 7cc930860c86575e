//! Finite unions of half-open arcs [l, r) on the unit circle with exact
//! rational endpoints. Union, intersection and measure are exact.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::certified::rational_string;

/// Normalized finite union of disjoint half-open arcs, sorted by left
/// endpoint, all endpoints in [0, 1). Adjacent arcs are merged, so the
/// representation is canonical. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircleIntervalSet {
    arcs: Vec<(BigRational, BigRational)>,
}

impl CircleIntervalSet {
    pub fn empty() -> Self {
        CircleIntervalSet { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        CircleIntervalSet { arcs: vec![(BigRational::zero(), BigRational::one())] }
    }

    /// Build from raw arcs (l, r) meaning the points swept from l to r going
    /// clockwise from {l}: length r - l, wrapped into [0, 1). A length >= 1
    /// covers the whole circle.
    pub fn from_raw_arcs(raw: impl IntoIterator<Item = (BigRational, BigRational)>) -> Self {
        let one = BigRational::one();
        let mut pieces: Vec<(BigRational, BigRational)> = Vec::new();
        for (l, r) in raw {
            let len = &r - &l;
            if !len.is_positive() {
                continue;
            }
            if len >= one {
                return CircleIntervalSet::full();
            }
            let lf = &l - l.floor();
            let rf = &lf + len;
            if rf <= one {
                pieces.push((lf, rf));
            } else {
                // wraps around 0
                pieces.push((lf, one.clone()));
                pieces.push((BigRational::zero(), rf - &one));
            }
        }
        Self::normalize(pieces)
    }

    /// A ball of the given radius around a center, as the half-open arc
    /// [c - r, c + r).
    pub fn ball(center: &BigRational, radius: &BigRational) -> Self {
        Self::from_raw_arcs([(center - radius, center + radius)])
    }

    fn normalize(mut pieces: Vec<(BigRational, BigRational)>) -> Self {
        pieces.retain(|(l, r)| r > l);
        pieces.sort();
        let mut arcs: Vec<(BigRational, BigRational)> = Vec::new();
        for (l, r) in pieces {
            if let Some(last) = arcs.last_mut() {
                if l <= last.1 {
                    if r > last.1 {
                        last.1 = r;
                    }
                    continue;
                }
            }
            arcs.push((l, r));
        }
        CircleIntervalSet { arcs }
    }

    pub fn arcs(&self) -> &[(BigRational, BigRational)] {
        &self.arcs
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty_set(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn measure(&self) -> BigRational {
        let mut m = BigRational::zero();
        for (l, r) in &self.arcs {
            m += r - l;
        }
        m
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        let xf = x - x.floor();
        // binary search on left endpoints
        let mut lo = 0usize;
        let mut hi = self.arcs.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.arcs[mid].0 <= xf {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == 0 {
            return false;
        }
        xf < self.arcs[lo - 1].1
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut pieces = self.arcs.clone();
        pieces.extend(other.arcs.iter().cloned());
        Self::normalize(pieces)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        // linear sweep over both sorted arc lists
        let mut out = Vec::new();
        let (mut i, mut j) = (0usize, 0usize);
        while i < self.arcs.len() && j < other.arcs.len() {
            let a = &self.arcs[i];
            let b = &other.arcs[j];
            let l = (&a.0).max(&b.0).clone();
            let r = (&a.1).min(&b.1).clone();
            if l < r {
                out.push((l, r));
            }
            if a.1 <= b.1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        CircleIntervalSet { arcs: out }
    }

    /// Arcs as CSV lines `left,right` with exact p/q endpoints.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("left,right\n");
        for (l, r) in &self.arcs {
            out.push_str(&format!("{},{}\n", rational_string(l), rational_string(r)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certified::big_rational as rat;
    use proptest::prelude::*;

    /// Endpoint-sweep oracle for the measure of a union of raw arcs.
    fn sweep_measure(raw: &[(BigRational, BigRational)]) -> BigRational {
        let mut events: Vec<(BigRational, i32)> = Vec::new();
        let one = BigRational::one();
        for (l, r) in raw {
            let len = r - l;
            if !len.is_positive() {
                continue;
            }
            if len >= one {
                return one;
            }
            let lf = l - l.floor();
            let rf = &lf + len;
            if rf <= one {
                events.push((lf, 1));
                events.push((rf, -1));
            } else {
                events.push((lf, 1));
                events.push((one.clone(), -1));
                events.push((BigRational::zero(), 1));
                events.push((rf - &one, -1));
            }
        }
        events.sort();
        let mut depth = 0;
        let mut measure = BigRational::zero();
        let mut last: Option<BigRational> = None;
        for (x, d) in events {
            if depth > 0 {
                if let Some(prev) = &last {
                    measure += &x - prev;
                }
            }
            depth += d;
            last = Some(x);
        }
        measure
    }

    #[test]
    fn basic_union_and_measure() {
        let s = CircleIntervalSet::from_raw_arcs([
            (rat(1, 10), rat(3, 10)),
            (rat(2, 10), rat(4, 10)),
            (rat(6, 10), rat(7, 10)),
        ]);
        assert_eq!(s.arc_count(), 2);
        assert_eq!(s.measure(), rat(4, 10));
    }

    #[test]
    fn adjacent_half_open_arcs_merge() {
        let s = CircleIntervalSet::from_raw_arcs([(rat(0, 1), rat(1, 2)), (rat(1, 2), rat(3, 4))]);
        assert_eq!(s.arc_count(), 1);
        assert_eq!(s.measure(), rat(3, 4));
    }

    #[test]
    fn wrap_around_ball() {
        // ball around 0 wraps: [1 - 1/8, 1) and [0, 1/8)
        let b = CircleIntervalSet::ball(&rat(0, 1), &rat(1, 8));
        assert_eq!(b.arc_count(), 2);
        assert_eq!(b.measure(), rat(1, 4));
        assert!(b.contains(&rat(1, 16)));
        assert!(b.contains(&rat(15, 16)));
        assert!(!b.contains(&rat(1, 2)));
        // membership respects the half-open convention
        assert!(b.contains(&rat(7, 8)));
        assert!(!b.contains(&rat(1, 8)));
    }

    #[test]
    fn whole_circle_cap() {
        let s = CircleIntervalSet::ball(&rat(1, 3), &rat(2, 3));
        assert_eq!(s.measure(), rat(1, 1));
    }

    #[test]
    fn intersection_basic() {
        let a = CircleIntervalSet::from_raw_arcs([(rat(0, 1), rat(1, 2))]);
        let b = CircleIntervalSet::from_raw_arcs([(rat(1, 4), rat(3, 4))]);
        let i = a.intersect(&b);
        assert_eq!(i.measure(), rat(1, 4));
        assert_eq!(i.arcs()[0], (rat(1, 4), rat(1, 2)));
    }

    #[test]
    fn csv_uses_exact_endpoints() {
        let s = CircleIntervalSet::from_raw_arcs([(rat(1, 3), rat(1, 2))]);
        assert_eq!(s.to_csv(), "left,right\n1/3,1/2\n");
    }

    fn arb_rational() -> impl Strategy<Value = BigRational> {
        (0i64..4096, 1i64..=4096).prop_map(|(n, d)| rat(n % d, d))
    }

    fn arb_raw_arcs() -> impl Strategy<Value = Vec<(BigRational, BigRational)>> {
        prop::collection::vec(
            (arb_rational(), (1i64..200, 200i64..=4000)).prop_map(|(l, (n, d))| {
                let len = rat(n, d * 4);
                let r = &l + len;
                (l, r)
            }),
            0..12,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn measure_matches_sweep_oracle(raw in arb_raw_arcs()) {
            let set = CircleIntervalSet::from_raw_arcs(raw.clone());
            prop_assert_eq!(set.measure(), sweep_measure(&raw));
        }

        #[test]
        fn inclusion_exclusion(a in arb_raw_arcs(), b in arb_raw_arcs()) {
            let sa = CircleIntervalSet::from_raw_arcs(a);
            let sb = CircleIntervalSet::from_raw_arcs(b);
            let u = sa.union(&sb);
            let i = sa.intersect(&sb);
            prop_assert_eq!(u.measure() + i.measure(), sa.measure() + sb.measure());
        }

        #[test]
        fn membership_agrees_with_arcs(a in arb_raw_arcs(), x in arb_rational()) {
            let sa = CircleIntervalSet::from_raw_arcs(a);
            let direct = sa.arcs().iter().any(|(l, r)| *l <= x && x < *r);
            prop_assert_eq!(sa.contains(&x), direct);
        }
    }
}
