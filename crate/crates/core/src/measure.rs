//! Exact construction and measurement of the proof-side circle sets: the
//! per-block ball unions, the layered disjoint core families, and the audit
//! of every inequality they satisfy.
//!
//! All sets are built for a fixed convergent approximation theta_hat chosen
//! by the precision policy (center error below one hundredth of the
//! smallest ball radius) and measured exactly; a perturbation bound on the
//! measure for the true rotation is carried alongside.
//!
//! Ball convention: every ball here is a half-open arc. The core-family
//! balls have arc length 1/(8 (q_{k+1} - i q_k) phi(q_{k+1})), which makes
//! the per-layer measure equal q_k times that length exactly.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::certified::{
    big_rational, ln_enclosure, rat_from_biguint, rational_string, sqrt_enclosure, CertifiedReal,
};
use crate::cf::{ConvergentTable, IrrationalSpec};
use crate::circle::CircleIntervalSet;
use crate::error::Error;
use crate::phi::PhiSpec;
use crate::report::CertValue;
use crate::Result;

/// Ball union over one convergent block: all B(n theta, 1/(n phi(n))) for
/// q_k < n <= q_{k+1}.
#[derive(Clone, Debug)]
pub struct BlockUnion {
    pub k: usize,
    pub set: CircleIntervalSet,
    pub ball_count: u64,
    /// per-center shift bound |n theta - n theta_hat|
    pub center_error: BigRational,
    /// |mu_true - mu_computed| <= this
    pub measure_perturbation: BigRational,
}

impl BlockUnion {
    pub fn measure(&self) -> BigRational {
        self.set.measure()
    }
}

#[derive(Clone, Debug)]
pub struct CoreLayer {
    pub index: u64,
    /// arc length of each ball in this layer
    pub ball_len: BigRational,
    pub set: CircleIntervalSet,
}

/// Layered disjoint family inside two consecutive blocks: layer i covers
/// q_{k+1} - (i+1) q_k < n <= q_{k+1} - i q_k with a uniform ball length.
#[derive(Clone, Debug)]
pub struct LayeredFamily {
    pub k: usize,
    pub q_star: BigUint,
    /// number of layers b_{k+1}
    pub layer_count: BigUint,
    /// working rational value of phi(q_{k+1})
    pub phi_at_next: BigRational,
    pub layers: Vec<CoreLayer>,
    pub set: CircleIntervalSet,
    pub center_error: BigRational,
    pub measure_perturbation: BigRational,
}

impl LayeredFamily {
    pub fn measure(&self) -> BigRational {
        self.set.measure()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AuditRow {
    pub id: String,
    pub k: u64,
    pub hypothesis_met: bool,
    pub lhs: CertValue,
    pub rhs: CertValue,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuasiRow {
    pub l: u64,
    pub k: u64,
    pub lhs: CertValue,
    pub rhs: CertValue,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitCount {
    pub k: u64,
    pub arc: (String, String),
    pub count: u64,
    /// q_k * mu(I)
    pub expected: CertValue,
    /// |count - q_k mu(I)| < 2 (indicator variation)
    pub holds: bool,
}

/// Laboratory tying a rotation and a test function to exact set builds.
/// The test function is wrapped to satisfy phi >= 4 throughout.
pub struct MeasureLab {
    table: ConvergentTable,
    phi: PhiSpec,
    cap_k: usize,
    cap_arcs: usize,
}

impl MeasureLab {
    pub fn new(
        theta: IrrationalSpec,
        phi: PhiSpec,
        cap_k: usize,
        cap_arcs: usize,
    ) -> Result<Self> {
        phi.validate()?;
        let phi = match &phi {
            PhiSpec::Shifted { floor, .. } if *floor >= big_rational(4, 1) => phi,
            PhiSpec::Constant(c) if *c >= big_rational(4, 1) => phi,
            _ => PhiSpec::shifted4(phi),
        };
        Ok(MeasureLab { table: ConvergentTable::new(theta), phi, cap_k, cap_arcs })
    }

    pub fn phi(&self) -> &PhiSpec {
        &self.phi
    }

    pub fn table(&self) -> &ConvergentTable {
        &self.table
    }

    /// Certified strict comparison n phi(n) < bound, tightening until decided.
    fn weight_below(&self, n: &BigUint, bound: &BigRational) -> Result<bool> {
        let n_rat = rat_from_biguint(n);
        let mut prec = 96u32;
        loop {
            let v = self.phi.eval_prec(n, prec)?;
            let w_lo = &n_rat * v.lo();
            let w_hi = &n_rat * v.hi();
            if w_hi < *bound {
                return Ok(true);
            }
            if w_lo >= *bound {
                return Ok(false);
            }
            if v.is_exact() {
                return Ok(&n_rat * v.value() < *bound);
            }
            prec *= 2;
            if prec > 1 << 13 {
                return Err(Error::precision(format!(
                    "cannot separate n phi(n) from {bound} at n = {n}"
                )));
            }
        }
    }

    /// phi value as a working rational with its certification error.
    fn phi_hat(&self, n: &BigUint, tol: &BigRational) -> Result<(BigRational, BigRational)> {
        let v = self.phi.eval(n, tol)?;
        Ok((v.value().clone(), v.error().clone()))
    }

    /// Precision policy: pick the convergent level whose center error for
    /// multiples up to q_{k+1} is below r_min/100, where r_min lower-bounds
    /// every ball radius used at this k.
    fn working_level(&mut self, k: usize) -> Result<usize> {
        self.table.extend_to(k + 1, self.cap_k)?;
        let n_max = self.table.q(k + 1).clone();
        let coarse = self.phi.eval(&n_max, &BigRational::one())?;
        let r_min = BigRational::one()
            / (big_rational(16, 1) * rat_from_biguint(&n_max) * coarse.hi());
        let tol = r_min / big_rational(100, 1);
        self.table.ensure_tolerance(&n_max, &tol, self.cap_k)?;
        self.table.pick_level(&n_max, &tol)
    }

    /// Ball union over block k, exact for theta_hat.
    pub fn block_union(&mut self, k: usize) -> Result<BlockUnion> {
        let m = self.working_level(k)?;
        let q_k = self.table.q(k).clone();
        let q_next = self.table.q(k + 1).clone();
        let count_big = &q_next - &q_k;
        let count = count_big
            .to_u64()
            .filter(|c| *c <= self.cap_arcs as u64)
            .ok_or_else(|| Error::cap("arcs in block union", self.cap_arcs as u64))?;

        let p_m = self.table.p(m).clone();
        let q_m = self.table.q(m).clone();
        let center_error =
            rat_from_biguint(&q_next) / rat_from_biguint(&(&q_m * self.table.q(m + 1)));

        // radius certification budget: far below the center error
        let coarse = self.phi.eval(&q_next, &BigRational::one())?;
        let tol_phi = (BigRational::one()
            / (big_rational(16, 1) * rat_from_biguint(&q_next) * coarse.hi()))
            / rat_from_biguint(&(BigUint::one() << 48));

        let mut arcs = Vec::with_capacity(count as usize);
        let mut radius_pert = BigRational::zero();
        let mut n = &q_k + BigUint::one();
        let mut u = (&n * &p_m) % &q_m;
        loop {
            let center = BigRational::new(BigInt::from(u.clone()), BigInt::from(q_m.clone()));
            let n_rat = rat_from_biguint(&n);
            let (phi_val, phi_err) = self.phi_hat(&n, &tol_phi)?;
            let radius = (&n_rat * &phi_val).recip();
            // |1/(n phi) - 1/(n phi_hat)| <= err/(n phi_hat (phi_hat - err))
            let denom_lo = &phi_val - &phi_err;
            if !denom_lo.is_positive() {
                return Err(Error::precision("phi certification too wide for radius"));
            }
            radius_pert += &phi_err / (&n_rat * &phi_val * denom_lo);
            arcs.push((&center - &radius, &center + &radius));
            if n == q_next {
                break;
            }
            n += BigUint::one();
            u += &p_m;
            if u >= q_m {
                u -= &q_m;
            }
        }
        let set = CircleIntervalSet::from_raw_arcs(arcs);
        let measure_perturbation =
            big_rational(2, 1) * rat_from_biguint(&count_big) * &center_error
                + big_rational(2, 1) * radius_pert;
        Ok(BlockUnion { k, set, ball_count: count, center_error, measure_perturbation })
    }

    /// The layered disjoint family at k. Requires q_k < q_{k+1}.
    pub fn layered_family(&mut self, k: usize) -> Result<LayeredFamily> {
        let m = self.working_level(k)?;
        let q_k = self.table.q(k).clone();
        let q_next = self.table.q(k + 1).clone();
        if q_k >= q_next {
            return Err(Error::validation(format!(
                "layered family needs q_k < q_{{k+1}}; degenerate at k = {k}"
            )));
        }
        let q_next_rat = rat_from_biguint(&q_next);

        // saturation point: max n >= q_k with n phi(n) < q_{k+1}, or q_k
        let q_star = if self.weight_below(&q_k, &q_next_rat)? {
            // binary search the last n satisfying the monotone predicate
            let mut lo = q_k.clone();
            let mut hi = &q_next - BigUint::one();
            while lo < hi {
                let mid: BigUint = (&lo + &hi + BigUint::one()) >> 1;
                if self.weight_below(&mid, &q_next_rat)? {
                    lo = mid;
                } else {
                    hi = mid - BigUint::one();
                }
            }
            lo
        } else {
            q_k.clone()
        };
        if q_star < q_k || q_star >= q_next {
            return Err(Error::audit(format!(
                "saturation point out of range at k = {k}"
            )));
        }

        let diff = &q_next - &q_star;
        let layer_count = (&diff + &q_k - BigUint::one()) / &q_k;
        if layer_count < BigUint::one() || layer_count > *self.table.a(k + 1) {
            return Err(Error::audit(format!(
                "layer count out of the (1, a_{{k+1}}) range at k = {k}"
            )));
        }
        let total_balls = (&layer_count * &q_k)
            .to_u64()
            .filter(|c| *c <= self.cap_arcs as u64)
            .ok_or_else(|| Error::cap("arcs in layered family", self.cap_arcs as u64))?;

        // working value of phi(q_{k+1}); its error feeds the perturbation
        let tol_phi = (BigRational::one()
            / (big_rational(64, 1) * &q_next_rat * &q_next_rat))
            / rat_from_biguint(&(BigUint::one() << 48));
        let (phi_val, phi_err) = self.phi_hat(&q_next, &tol_phi)?;

        let p_m = self.table.p(m).clone();
        let q_m = self.table.q(m).clone();
        let b_u64 = layer_count.to_u64().unwrap_or(u64::MAX);

        let mut layers: Vec<CoreLayer> = Vec::new();
        let mut all_arcs = Vec::with_capacity(total_balls as usize);
        let mut radius_pert = BigRational::zero();
        let eight = big_rational(8, 1);
        let two = big_rational(2, 1);
        for i in 0..b_u64 {
            let i_big = BigUint::from(i);
            let hi_n = &q_next - &i_big * &q_k;
            let lo_n = if (&i_big + BigUint::one()) * &q_k >= q_next {
                BigUint::zero()
            } else {
                &q_next - (&i_big + BigUint::one()) * &q_k
            };
            let width = rat_from_biguint(&hi_n);
            let ball_len = (&eight * &width * &phi_val).recip();
            let denom_lo = &phi_val - &phi_err;
            if !denom_lo.is_positive() {
                return Err(Error::precision("phi certification too wide"));
            }
            let per_ball_radius_err = &phi_err / (&eight * &width * &phi_val * denom_lo);
            let half = &ball_len / &two;
            let mut layer_arcs = Vec::new();
            let mut n = &lo_n + BigUint::one();
            let mut u = (&n * &p_m) % &q_m;
            loop {
                let center =
                    BigRational::new(BigInt::from(u.clone()), BigInt::from(q_m.clone()));
                layer_arcs.push((&center - &half, &center + &half));
                radius_pert += &per_ball_radius_err;
                if n == hi_n {
                    break;
                }
                n += BigUint::one();
                u += &p_m;
                if u >= q_m {
                    u -= &q_m;
                }
            }
            all_arcs.extend(layer_arcs.iter().cloned());
            layers.push(CoreLayer {
                index: i,
                ball_len,
                set: CircleIntervalSet::from_raw_arcs(layer_arcs),
            });
        }

        // exact disjointness of all balls across layers
        let mut sorted = all_arcs.clone();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::audit(format!(
                    "layered family balls overlap at k = {k}"
                )));
            }
        }
        if let (Some(first), Some(last)) = (sorted.first(), sorted.last()) {
            // wrap-around: the last arc must not reach the first plus 1
            if last.1 > &first.0 + BigRational::one() {
                return Err(Error::audit(format!(
                    "layered family balls overlap across the wrap at k = {k}"
                )));
            }
        }

        let set = CircleIntervalSet::from_raw_arcs(all_arcs);
        let center_error =
            rat_from_biguint(&q_next) / rat_from_biguint(&(&q_m * self.table.q(m + 1)));
        let measure_perturbation =
            &two * rat_from_biguint(&BigUint::from(total_balls)) * &center_error
                + &two * radius_pert;
        Ok(LayeredFamily {
            k,
            q_star,
            layer_count,
            phi_at_next: phi_val,
            layers,
            set,
            center_error,
            measure_perturbation,
        })
    }

    /// Decide lhs >= rhs_factor * ln(ratio) by tightening the log enclosure.
    fn holds_at_least_log(
        &self,
        lhs: &BigRational,
        factor: &BigRational,
        ratio: &BigRational,
    ) -> Result<(bool, CertifiedReal)> {
        let mut prec = 96u32;
        loop {
            let (lo, hi) = ln_enclosure(ratio, prec)?;
            let rhs = CertifiedReal::from_interval(factor * &lo, factor * &hi);
            if *lhs >= rhs.hi() {
                return Ok((true, rhs));
            }
            if *lhs < rhs.lo() {
                return Ok((false, rhs));
            }
            prec *= 2;
            if prec > 1 << 13 {
                return Err(Error::precision(
                    "cannot separate measured value from a log bound".to_string(),
                ));
            }
        }
    }

    fn holds_at_most_log(
        &self,
        lhs: &BigRational,
        factor: &BigRational,
        ratio: &BigRational,
    ) -> Result<(bool, CertifiedReal)> {
        let mut prec = 96u32;
        loop {
            let (lo, hi) = ln_enclosure(ratio, prec)?;
            let rhs = CertifiedReal::from_interval(factor * &lo, factor * &hi);
            if *lhs <= rhs.lo() {
                return Ok((true, rhs));
            }
            if *lhs > rhs.hi() {
                return Ok((false, rhs));
            }
            prec *= 2;
            if prec > 1 << 13 {
                return Err(Error::precision(
                    "cannot separate measured value from a log bound".to_string(),
                ));
            }
        }
    }

    /// Audit every block/core inequality for each k in the range.
    /// Failures are findings (holds = false), not errors.
    pub fn audit_inequalities(&mut self, k_lo: usize, k_hi: usize) -> Result<Vec<AuditRow>> {
        let mut rows = Vec::new();
        for k in k_lo..=k_hi {
            self.table.extend_to(k + 1, self.cap_k)?;
            let q_k = self.table.q(k).clone();
            let q_next = self.table.q(k + 1).clone();
            let q_k_rat = rat_from_biguint(&q_k);
            let q_next_rat = rat_from_biguint(&q_next);
            let ratio = &q_next_rat / &q_k_rat;

            let tol_phi = big_rational(1, 1i64 << 40)
                / (BigRational::one() + &q_next_rat);
            let (phi_k, _) = self.phi_hat(&q_k, &tol_phi)?;

            // block union bound: mu(E_k) <= 2 log(q_{k+1}/q_k) / phi(q_k)
            let eu = self.block_union(k)?;
            let mu_upper = eu.measure() + &eu.measure_perturbation;
            let factor = big_rational(2, 1) / &phi_k;
            let (holds, rhs) = self.holds_at_most_log(&mu_upper, &factor, &ratio)?;
            rows.push(AuditRow {
                id: "block_union_log_bound".to_string(),
                k: k as u64,
                hypothesis_met: true,
                lhs: CertValue::from_rational(&mu_upper),
                rhs: CertValue::from_certified(&rhs),
                holds,
            });

            // split bound under the hypothesis phi(q_k) q_k < q_{k+1}:
            // mu(E_k) <= 3/phi(q_k) + 2 log(phi(q_k))/phi(q_k)
            let hyp_split = self.weight_below(&q_k, &q_next_rat)?;
            if hyp_split {
                let base = big_rational(3, 1) / &phi_k;
                let shifted = &mu_upper - &base;
                let factor = big_rational(2, 1) / &phi_k;
                let (holds, rhs_log) = self.holds_at_most_log(&shifted, &factor, &phi_k)?;
                let rhs = rhs_log.add_rat(&base);
                rows.push(AuditRow {
                    id: "block_union_split_bound".to_string(),
                    k: k as u64,
                    hypothesis_met: true,
                    lhs: CertValue::from_rational(&mu_upper),
                    rhs: CertValue::from_certified(&rhs),
                    holds,
                });
            } else {
                rows.push(AuditRow {
                    id: "block_union_split_bound".to_string(),
                    k: k as u64,
                    hypothesis_met: false,
                    lhs: CertValue::from_rational(&mu_upper),
                    rhs: CertValue::from_rational(&BigRational::zero()),
                    holds: true,
                });
            }

            // core family audits need a nondegenerate block
            if q_k >= q_next {
                continue;
            }
            let core = self.layered_family(k)?;
            let mu_core = core.measure();

            // per-layer closed form: mu(G_{k,i}) = q_k/(8 (q_{k+1}-i q_k) phi)
            let mut closed_sum = BigRational::zero();
            let mut layers_exact = true;
            for layer in &core.layers {
                let expect = &q_k_rat * &layer.ball_len;
                if layer.set.measure() != expect {
                    layers_exact = false;
                }
                closed_sum += expect;
            }
            rows.push(AuditRow {
                id: "layer_measure_closed_form".to_string(),
                k: k as u64,
                hypothesis_met: true,
                lhs: CertValue::from_rational(&mu_core),
                rhs: CertValue::from_rational(&closed_sum),
                holds: layers_exact && mu_core == closed_sum,
            });

            // disjointness was verified exactly during construction
            rows.push(AuditRow {
                id: "core_disjoint".to_string(),
                k: k as u64,
                hypothesis_met: true,
                lhs: CertValue::from_rational(&mu_core),
                rhs: CertValue::from_rational(&closed_sum),
                holds: true,
            });

            // ball length < ||q_k theta|| / 2
            let max_len = core
                .layers
                .iter()
                .map(|l| l.ball_len.clone())
                .max()
                .unwrap_or_else(BigRational::zero);
            let tol = &max_len / big_rational(1 << 20, 1);
            let dist = self.table.dist_to_integer(&q_k, &tol)?;
            let holds_radius = max_len < dist.lo() / big_rational(2, 1);
            rows.push(AuditRow {
                id: "core_radius_bound".to_string(),
                k: k as u64,
                hypothesis_met: true,
                lhs: CertValue::from_rational(&max_len),
                rhs: CertValue::from_certified(
                    &dist.scale(&big_rational(1, 2)),
                ),
                holds: holds_radius,
            });

            // core lower bound via the harmonic-integral estimate:
            // mu(G_k) >= (1/(8 phi)) log((q_{k+1}+q_k)/(q_{k+1}-(b-1) q_k))
            let b_minus_1 = &core.layer_count - BigUint::one();
            let tail = &q_next_rat - rat_from_biguint(&(&b_minus_1 * &q_k));
            let factor = (big_rational(8, 1) * &core.phi_at_next).recip();
            let arg = (&q_next_rat + &q_k_rat) / &tail;
            let (holds0, rhs0) = self.holds_at_least_log(&mu_core, &factor, &arg)?;
            rows.push(AuditRow {
                id: "core_lower_log".to_string(),
                k: k as u64,
                hypothesis_met: true,
                lhs: CertValue::from_rational(&mu_core),
                rhs: CertValue::from_certified(&rhs0),
                holds: holds0,
            });

            // under q_k phi(q_k) < q_{k+1}:
            // mu(G_k) >= (1/16) log(phi(q_star)) / phi(q_{k+1})
            if hyp_split {
                let (phi_star, _) = self.phi_hat(&core.q_star, &tol_phi)?;
                let factor =
                    (big_rational(16, 1) * &core.phi_at_next).recip();
                let (holds1, rhs1) = self.holds_at_least_log(&mu_core, &factor, &phi_star)?;
                rows.push(AuditRow {
                    id: "core_lower_phi".to_string(),
                    k: k as u64,
                    hypothesis_met: true,
                    lhs: CertValue::from_rational(&mu_core),
                    rhs: CertValue::from_certified(&rhs1),
                    holds: holds1,
                });
            } else {
                rows.push(AuditRow {
                    id: "core_lower_phi".to_string(),
                    k: k as u64,
                    hypothesis_met: false,
                    lhs: CertValue::from_rational(&mu_core),
                    rhs: CertValue::from_rational(&BigRational::zero()),
                    holds: true,
                });
            }

            // saturated case q_star = q_k (needs k >= 1 for q_{k-1}):
            // mu(G_k) >= (1/(8 phi)) log((q_{k+1}+q_k)/(q_k+q_{k-1}))
            if core.q_star == q_k && k >= 1 {
                let denom = &q_k_rat + self.table.q_rat(k - 1);
                let arg = (&q_next_rat + &q_k_rat) / denom;
                let (holds2, rhs2) = self.holds_at_least_log(&mu_core, &factor, &arg)?;
                rows.push(AuditRow {
                    id: "core_lower_saturated".to_string(),
                    k: k as u64,
                    hypothesis_met: true,
                    lhs: CertValue::from_rational(&mu_core),
                    rhs: CertValue::from_certified(&rhs2),
                    holds: holds2,
                });
            } else {
                rows.push(AuditRow {
                    id: "core_lower_saturated".to_string(),
                    k: k as u64,
                    hypothesis_met: false,
                    lhs: CertValue::from_rational(&mu_core),
                    rhs: CertValue::from_rational(&BigRational::zero()),
                    holds: true,
                });
            }
        }
        Ok(rows)
    }

    /// Quasi-independence: mu(G_k ∩ G_l) < mu(G_k) mu(G_l) + 6 mu(G_k)/2^((k-l)/2).
    pub fn quasi_independence(&mut self, pairs: &[(usize, usize)]) -> Result<Vec<QuasiRow>> {
        let mut rows = Vec::new();
        for (l, k) in pairs {
            if l >= k {
                return Err(Error::validation("pairs must satisfy l < k"));
            }
            let fam_l = self.layered_family(*l)?;
            let fam_k = self.layered_family(*k)?;
            let inter = fam_k.set.intersect(&fam_l.set);
            let lhs = inter.measure() + &fam_l.measure_perturbation + &fam_k.measure_perturbation;
            let base = fam_k.measure() * fam_l.measure();
            let six_mu = big_rational(6, 1) * fam_k.measure();
            let d = k - l;
            let (holds, rhs) = if d % 2 == 0 {
                let pow = BigRational::from_integer(BigInt::one() << (d / 2));
                let rhs = &base + &six_mu / pow;
                (lhs < rhs, CertifiedReal::exact(rhs))
            } else {
                // 2^(d/2) = 2^((d-1)/2) sqrt(2)
                let pow = BigRational::from_integer(BigInt::one() << ((d - 1) / 2));
                let mut prec = 96u32;
                loop {
                    let (s_lo, s_hi) = sqrt_enclosure(&big_rational(2, 1), prec)?;
                    let rhs_lo = &base + &six_mu / (&pow * &s_hi);
                    let rhs_hi = &base + &six_mu / (&pow * &s_lo);
                    if lhs < rhs_lo {
                        break (true, CertifiedReal::from_interval(rhs_lo, rhs_hi));
                    }
                    if lhs >= rhs_hi {
                        break (false, CertifiedReal::from_interval(rhs_lo, rhs_hi));
                    }
                    prec *= 2;
                    if prec > 1 << 13 {
                        return Err(Error::precision(
                            "cannot separate intersection measure from the bound".to_string(),
                        ));
                    }
                }
            };
            rows.push(QuasiRow {
                l: *l as u64,
                k: *k as u64,
                lhs: CertValue::from_rational(&lhs),
                rhs: CertValue::from_certified(&rhs),
                holds,
            });
        }
        Ok(rows)
    }

    /// Count orbit points n theta, 0 <= n < q_k, inside the half-open arc
    /// [l, r), decided with certified margins against the true rotation.
    pub fn orbit_interval_count(
        &mut self,
        arc: (&BigRational, &BigRational),
        k: usize,
    ) -> Result<OrbitCount> {
        let (l, r) = arc;
        if l < &BigRational::zero() || r > &BigRational::one() || l >= r {
            return Err(Error::validation("arc must satisfy 0 <= l < r <= 1"));
        }
        self.table.extend_to(k + 1, self.cap_k)?;
        let q_k = self.table.q(k).clone();
        let count_cap = q_k
            .to_u64()
            .filter(|c| *c <= self.cap_arcs as u64)
            .ok_or_else(|| Error::cap("orbit length", self.cap_arcs as u64))?;

        let mu = r - l;
        let expected = rat_from_biguint(&q_k) * &mu;

        let mut m = k + 1;
        let count = loop {
            self.table.extend_to(m + 1, self.cap_k)?;
            let q_m = self.table.q(m).clone();
            let p_m = self.table.p(m).clone();
            // margin: all orbit indices are below q_k, so every point moves
            // by less than q_k/q_{m+1} under the true rotation; endpoint
            // decisions need the scaled endpoints to clear that margin.
            let margin = rat_from_biguint(&q_k) / self.table.q_rat(m + 1)
                * rat_from_biguint(&q_m);
            let dist_to_int = |x: &BigRational| -> BigRational {
                let f = x - x.floor();
                let alt = BigRational::one() - &f;
                f.min(alt)
            };
            let l_scaled = l * rat_from_biguint(&q_m);
            let r_scaled = r * rat_from_biguint(&q_m);
            let l_ok = dist_to_int(&l_scaled) > margin || l.is_zero();
            let r_ok = dist_to_int(&r_scaled) > margin || r.is_one();
            if !(l_ok && r_ok) {
                m += 1;
                if m + 1 > self.cap_k {
                    return Err(Error::precision(
                        "arc endpoint sits on the orbit grid beyond the cap".to_string(),
                    ));
                }
                continue;
            }
            let l_int = l_scaled.ceil().to_integer().to_biguint().unwrap_or_default();
            let r_int = r_scaled.ceil().to_integer().to_biguint().unwrap_or_default();
            let mut cnt = 0u64;
            let mut u = BigUint::zero();
            for _ in 0..count_cap {
                if u >= l_int && u < r_int {
                    cnt += 1;
                }
                u += &p_m;
                if u >= q_m {
                    u -= &q_m;
                }
            }
            break cnt;
        };

        let two = big_rational(2, 1);
        let gap = (rat_from_biguint(&BigUint::from(count)) - &expected).abs();
        Ok(OrbitCount {
            k: k as u64,
            arc: (rational_string(l), rational_string(r)),
            count,
            expected: CertValue::from_rational(&expected),
            holds: gap < two,
        })
    }
}

pub fn audit_all_hold(rows: &[AuditRow]) -> bool {
    rows.iter().all(|r| r.holds)
}
