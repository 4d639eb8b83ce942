//! Gapped tuple spaces: n-tuples (z_1, ..., z_n) of subsequence members
//! with z_i >= s^Delta z_{i+1} for i < n, the last coordinate running free.
//!
//! Tuples are held as subsequence indices (t_1, ..., t_n), so the gap
//! condition reads t_i >= t_{i+1} + gap with gap = Delta / step. An operator
//! tuple induces the twisted lexicographic order: at the first differing
//! coordinate, the coordinate with a positive operator sign decides upward,
//! a negative one downward. Certification checks that this order agrees
//! with the order of the dot values A_1 z_1 + ... + A_n z_n — exhaustively
//! on a window, and when the growth profile allows, asymptotically beyond it.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Cert, OperatorTuple, Sign, SignClass};
use crate::poly::Rat;
use crate::predicate::SubPredicate;

/// How far an ordering certificate reaches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertTier {
    /// Window check passed and the asymptotic domination bound holds.
    Certified,
    /// Window check passed; the asymptotic bound could not be established.
    WindowOnly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertRecord {
    pub signs: Vec<SignClass>,
    pub tier: CertTier,
    /// First-coordinate cap the window check covered.
    pub cap: usize,
}

/// Smallest certified gap for an operator tuple, with its tier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaWitness {
    pub delta: usize,
    pub tier: CertTier,
}

/// Result of an extremal-function evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PQResult {
    pub indices: Vec<usize>,
    #[serde(with = "crate::jsonint::vec")]
    pub tuple: Vec<BigInt>,
    #[serde(with = "crate::jsonint")]
    pub value: BigInt,
    /// The threshold cleared the whole space, so the answer fell back to
    /// the extreme tuple.
    pub boundary: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extremum {
    Tuple { indices: Vec<usize>, value: BigInt },
    Unbounded,
    Infeasible,
}

impl Extremum {
    pub fn tuple(self) -> Result<(Vec<usize>, BigInt)> {
        match self {
            Extremum::Tuple { indices, value } => Ok((indices, value)),
            Extremum::Unbounded => Err(Error::Precondition("extremum is unbounded".into())),
            Extremum::Infeasible => {
                Err(Error::Precondition("box constraints are infeasible".into()))
            }
        }
    }
}

type PqKey = (OperatorTuple, BigInt, bool);

pub struct TupleSpace {
    sub: SubPredicate,
    arity: usize,
    delta: usize,
    gap: usize,
    certified: RwLock<HashMap<OperatorTuple, CertRecord>>,
    members: RwLock<HashMap<usize, Arc<Vec<Vec<usize>>>>>,
    pcache: RwLock<HashMap<PqKey, PQResult>>,
}

impl std::fmt::Debug for TupleSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TupleSpace")
            .field("arity", &self.arity)
            .field("delta", &self.delta)
            .field("gap", &self.gap)
            .finish()
    }
}

impl TupleSpace {
    pub fn new(sub: SubPredicate, arity: usize, delta: usize) -> Result<Arc<Self>> {
        if arity == 0 {
            return Err(Error::BadInput("tuple arity must be >= 1".into()));
        }
        let step = sub.step();
        if delta % step != 0 {
            return Err(Error::GapNotMultiple { delta, step });
        }
        Ok(Arc::new(TupleSpace {
            sub,
            arity,
            delta,
            gap: delta / step,
            certified: RwLock::new(HashMap::new()),
            members: RwLock::new(HashMap::new()),
            pcache: RwLock::new(HashMap::new()),
        }))
    }

    pub fn sub(&self) -> &SubPredicate {
        &self.sub
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Gap in subsequence index units.
    pub fn gap(&self) -> usize {
        self.gap
    }

    /// Chain lower bound for coordinate i (0-based): (n - 1 - i) * gap.
    fn chain_low(&self, i: usize) -> usize {
        (self.arity - 1 - i) * self.gap
    }

    /// Index tuple of the least member under every twisted order whose
    /// first sign is positive: ((n-1) gap, ..., gap, 0).
    pub fn lex_min_indices(&self) -> Vec<usize> {
        (0..self.arity).map(|i| self.chain_low(i)).collect()
    }

    pub fn values(&self, indices: &[usize]) -> Result<Vec<BigInt>> {
        indices.iter().map(|&t| self.sub.nth(t)).collect()
    }

    /// Valid index tuple for the space?
    pub fn indices_valid(&self, indices: &[usize]) -> bool {
        indices.len() == self.arity
            && indices.windows(2).all(|w| w[0] >= w[1] + self.gap)
    }

    /// Member values -> index tuple, when every coordinate is a subsequence
    /// member and the gaps hold.
    pub fn index_tuple(&self, tuple: &[BigInt]) -> Result<Option<Vec<usize>>> {
        if tuple.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: tuple.len(),
            });
        }
        let mut indices = Vec::with_capacity(self.arity);
        for z in tuple {
            match self.sub.index_of(z)? {
                Some(t) => indices.push(t),
                None => return Ok(None),
            }
        }
        Ok(self.indices_valid(&indices).then_some(indices))
    }

    pub fn contains(&self, tuple: &[BigInt]) -> Result<bool> {
        Ok(self.index_tuple(tuple)?.is_some())
    }

    /// Dot value of the operator tuple at an index tuple.
    pub fn dot(&self, ops: &OperatorTuple, indices: &[usize]) -> Result<BigInt> {
        if indices.len() != ops.arity() {
            return Err(Error::ArityMismatch {
                expected: ops.arity(),
                got: indices.len(),
            });
        }
        let mut acc = BigInt::zero();
        for (op, &t) in ops.iter().zip(indices) {
            acc += op.apply_index(&self.sub, self.sub.base_index(t))?;
        }
        Ok(acc)
    }

    /// All members with t_1 <= cap, memoized.
    pub fn members_up_to(&self, cap: usize) -> Result<Arc<Vec<Vec<usize>>>> {
        if let Some(cached) = self.members.read().unwrap().get(&cap) {
            return Ok(cached.clone());
        }
        // Materialize the needed window once so enumeration cannot outrun
        // a finite predicate.
        let reach = self.sub.max_index_within(cap)?;
        let mut out = Vec::new();
        let mut current = vec![0usize; self.arity];
        self.collect_members(reach, 0, &mut current, &mut out);
        let arc = Arc::new(out);
        self.members
            .write()
            .unwrap()
            .insert(cap, arc.clone());
        Ok(arc)
    }

    fn collect_members(
        &self,
        cap: usize,
        coord: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let low = self.chain_low(coord);
        let high = if coord == 0 {
            cap
        } else {
            match current[coord - 1].checked_sub(self.gap) {
                Some(h) => h,
                None => return,
            }
        };
        if high < low {
            return;
        }
        for t in low..=high {
            current[coord] = t;
            if coord + 1 == self.arity {
                out.push(current.clone());
            } else {
                self.collect_members(cap, coord + 1, current, out);
            }
        }
    }

    /// Twisted lexicographic comparison of two index tuples under the
    /// recorded signs. Coordinates with a zero sign are skipped: they do
    /// not move the dot value.
    pub fn compare_indices(signs: &[SignClass], a: &[usize], b: &[usize]) -> Ordering {
        for (i, sc) in signs.iter().enumerate() {
            if a[i] == b[i] {
                continue;
            }
            match sc.sign {
                Sign::Positive => return a[i].cmp(&b[i]),
                Sign::Negative => return b[i].cmp(&a[i]),
                Sign::Zero => continue,
            }
        }
        Ordering::Equal
    }

    /// Certify that the twisted order matches the dot order, reusing a
    /// previous record when it covered at least this horizon.
    pub fn ensure_cert(&self, ops: &OperatorTuple, horizon: usize) -> Result<CertRecord> {
        if let Some(rec) = self.certified.read().unwrap().get(ops) {
            if rec.cap >= self.sub.max_index_within(horizon)?.min(horizon) {
                return Ok(rec.clone());
            }
        }
        let rec = self.certify(ops, horizon)?;
        Ok(rec)
    }

    pub fn cached_cert(&self, ops: &OperatorTuple) -> Option<CertRecord> {
        self.certified.read().unwrap().get(ops).cloned()
    }

    /// Window certification: sort all members with t_1 <= horizon by the
    /// twisted order and demand strictly increasing dot values. This packs
    /// both the sign rule and injectivity into one ordered sweep. On top,
    /// the asymptotic bound (n-1) U q^-(Delta-K) < L/2 upgrades the tier:
    /// U the largest coefficient norm among trailing operators, K their
    /// largest degree, q the verified tail ratio, L the least |A_1 r| / r
    /// on the window tail.
    pub fn certify(&self, ops: &OperatorTuple, horizon: usize) -> Result<CertRecord> {
        if ops.arity() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: ops.arity(),
            });
        }
        let cap = self.sub.max_index_within(horizon)?;
        if cap < (self.arity + 2) * self.gap {
            return Err(Error::HorizonTooSmall(format!(
                "window cap {cap} cannot hold {} coordinates with gap {}",
                self.arity, self.gap
            )));
        }
        let signs: Vec<SignClass> = ops
            .iter()
            .map(|op| op.sign_classify(&self.sub, horizon))
            .collect::<Result<_>>()?;

        let members = self.members_up_to(cap)?;
        let mut order: Vec<usize> = (0..members.len()).collect();
        order.sort_by(|&a, &b| Self::compare_indices(&signs, &members[a], &members[b]));
        let mut prev: Option<BigInt> = None;
        for &k in &order {
            let v = self.dot(ops, &members[k])?;
            if let Some(p) = &prev {
                if *p >= v {
                    return Err(Error::Uncertified { delta: self.delta });
                }
            }
            prev = Some(v);
        }

        let tier = if self.asymptotic_bound_holds(ops, &signs, cap)? {
            CertTier::Certified
        } else {
            CertTier::WindowOnly
        };
        let rec = CertRecord { signs, tier, cap };
        self.certified
            .write()
            .unwrap()
            .insert(ops.clone(), rec.clone());
        Ok(rec)
    }

    fn asymptotic_bound_holds(
        &self,
        ops: &OperatorTuple,
        signs: &[SignClass],
        cap: usize,
    ) -> Result<bool> {
        // The leading sign must be settled beyond the window.
        if signs[0].sign == Sign::Zero || signs[0].cert != Cert::Exact {
            return Ok(false);
        }
        let base = self.sub.base();
        let Some(tr) = base.profile().and_then(|p| p.tail_ratio.clone()) else {
            return Ok(false);
        };
        let max_deg = ops
            .iter()
            .skip(1)
            .filter_map(|op| op.degree())
            .max()
            .unwrap_or(0);
        let reach = self.sub.base_index(cap) + max_deg + self.delta;
        if base.verify_tail_ratio(reach).is_err() {
            return Ok(false);
        }
        if self.delta < max_deg {
            return Ok(false);
        }
        let u = ops
            .iter()
            .skip(1)
            .map(|op| op.coeff_norm())
            .max()
            .unwrap_or_else(BigInt::zero);
        let mut lhs = Rat::from_integer(BigInt::from(self.arity as u64 - 1) * u);
        for _ in 0..(self.delta - max_deg) {
            lhs /= &tr.ratio;
        }
        // L: least |A_1 r| / r over the window tail.
        let t_hi = cap;
        let t_lo = t_hi / 2;
        let mut l: Option<Rat> = None;
        for t in t_lo..=t_hi {
            let r = self.sub.nth(t)?;
            let v = ops.first().apply_index(&self.sub, self.sub.base_index(t))?;
            let ratio = Rat::new(v.abs(), r);
            if l.as_ref().is_none_or(|cur| ratio < *cur) {
                l = Some(ratio);
            }
        }
        let l = l.expect("window tail is nonempty");
        if l.is_zero() {
            return Ok(false);
        }
        Ok(lhs < l / Rat::from_integer(BigInt::from(2)))
    }

    /// Extreme of the dot value over members inside a per-coordinate index
    /// box. Greedy in twisted order: effective lower bounds are chained
    /// right to left, then each coordinate takes its preferred end going
    /// left to right. Sound whenever the operator order is certified.
    pub fn extreme(
        &self,
        ops: &OperatorTuple,
        signs: &[SignClass],
        maximize: bool,
        bounds: &[(Option<usize>, Option<usize>)],
    ) -> Result<Extremum> {
        if bounds.len() != self.arity || signs.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                got: bounds.len().max(signs.len()),
            });
        }
        let n = self.arity;
        let mut low = vec![0usize; n];
        for i in (0..n).rev() {
            let chain = if i + 1 == n {
                0
            } else {
                low[i + 1] + self.gap
            };
            low[i] = chain.max(bounds[i].0.unwrap_or(0)).max(self.chain_low(i));
        }
        let mut indices = vec![0usize; n];
        for i in 0..n {
            let cap_prev = if i == 0 {
                None
            } else {
                Some(indices[i - 1] - self.gap)
            };
            let upper = match (bounds[i].1, cap_prev) {
                (Some(b), Some(c)) => Some(b.min(c)),
                (Some(b), None) => Some(b),
                (None, Some(c)) => Some(c),
                (None, None) => None,
            };
            let want_high = match signs[i].sign {
                Sign::Positive => maximize,
                Sign::Negative => !maximize,
                Sign::Zero => false,
            };
            if want_high {
                match upper {
                    None => return Ok(Extremum::Unbounded),
                    Some(u) => {
                        if u < low[i] {
                            return Ok(Extremum::Infeasible);
                        }
                        indices[i] = u;
                    }
                }
            } else {
                if let Some(u) = upper {
                    if u < low[i] {
                        return Ok(Extremum::Infeasible);
                    }
                }
                indices[i] = low[i];
            }
        }
        let value = self.dot(ops, &indices)?;
        Ok(Extremum::Tuple { indices, value })
    }

    pub fn free_box(&self) -> Vec<(Option<usize>, Option<usize>)> {
        vec![(None, None); self.arity]
    }

    /// Min (or max) of the dot restricted to coordinates i.. with t_i held
    /// fixed; the earlier coordinates contribute nothing.
    pub(crate) fn suffix_extreme_given(
        &self,
        ops: &OperatorTuple,
        signs: &[SignClass],
        i: usize,
        t_i: usize,
        minimize: bool,
    ) -> Result<BigInt> {
        let n = self.arity;
        let mut acc = ops
            .get(i)
            .apply_index(&self.sub, self.sub.base_index(t_i))?;
        let mut prev = t_i;
        for j in i + 1..n {
            let lo = self.chain_low(j);
            let hi = prev - self.gap;
            let want_high = match signs[j].sign {
                Sign::Positive => !minimize,
                Sign::Negative => minimize,
                Sign::Zero => false,
            };
            let t = if want_high { hi } else { lo };
            acc += ops.get(j).apply_index(&self.sub, self.sub.base_index(t))?;
            prev = t;
        }
        Ok(acc)
    }

    /// Members in twisted order with their dot values, starting from the
    /// finite extreme end: ascending values when the leading sign is
    /// positive, descending when negative.
    pub fn enumerate_in_order(
        &self,
        ops: &OperatorTuple,
        signs: &[SignClass],
        count: usize,
    ) -> Result<Vec<(Vec<usize>, BigInt)>> {
        if signs.iter().any(|s| s.sign == Sign::Zero) {
            return Err(Error::Precondition(
                "enumeration needs every coordinate sign settled and nonzero".into(),
            ));
        }
        let ascending = signs[0].sign == Sign::Positive;
        let seed = self
            .extreme(ops, signs, !ascending, &self.free_box())?
            .tuple()?;
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        seen.insert(seed.0.clone());
        heap.push(HeapEntry {
            key: if ascending { -seed.1.clone() } else { seed.1.clone() },
            value: seed.1,
            indices: seed.0,
        });
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let Some(entry) = heap.pop() else { break };
            for next in self.order_neighbors(&entry.indices, signs, ascending) {
                if seen.insert(next.clone()) {
                    let v = self.dot(ops, &next)?;
                    heap.push(HeapEntry {
                        key: if ascending { -v.clone() } else { v.clone() },
                        value: v,
                        indices: next,
                    });
                }
            }
            out.push((entry.indices, entry.value));
        }
        Ok(out)
    }

    /// Single index steps that move the dot away from the extreme end.
    fn order_neighbors(
        &self,
        indices: &[usize],
        signs: &[SignClass],
        ascending: bool,
    ) -> Vec<Vec<usize>> {
        let n = self.arity;
        let mut out = Vec::new();
        for i in 0..n {
            let step_up = match signs[i].sign {
                Sign::Positive => ascending,
                Sign::Negative => !ascending,
                Sign::Zero => continue,
            };
            let mut cand = indices.to_vec();
            if step_up {
                cand[i] += 1;
                if i > 0 && cand[i] + self.gap > cand[i - 1] {
                    continue;
                }
            } else {
                let floor = self
                    .chain_low(i)
                    .max(if i + 1 < n { cand[i + 1] + self.gap } else { 0 });
                if cand[i] == floor {
                    continue;
                }
                cand[i] -= 1;
            }
            out.push(cand);
        }
        out
    }

    pub(crate) fn pq_cached(&self, ops: &OperatorTuple, x: &BigInt, is_q: bool) -> Option<PQResult> {
        self.pcache
            .read()
            .unwrap()
            .get(&(ops.clone(), x.clone(), is_q))
            .cloned()
    }

    pub(crate) fn pq_store(&self, ops: &OperatorTuple, x: &BigInt, is_q: bool, res: PQResult) {
        self.pcache
            .write()
            .unwrap()
            .insert((ops.clone(), x.clone(), is_q), res);
    }
}

struct HeapEntry {
    key: BigInt,
    value: BigInt,
    indices: Vec<usize>,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.indices == other.indices
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .cmp(&other.key)
            .then_with(|| self.indices.cmp(&other.indices))
    }
}

/// Smallest gap (a multiple of the subsequence step) whose window
/// certification succeeds, tagged with how far the certificate reaches.
pub fn sufficient_delta(
    sub: &SubPredicate,
    ops: &OperatorTuple,
    horizon: usize,
    max_delta: usize,
) -> Result<DeltaWitness> {
    let step = sub.step();
    let mut delta = 0;
    while delta <= max_delta {
        let ts = TupleSpace::new(sub.clone(), ops.arity(), delta)?;
        match ts.certify(ops, horizon) {
            Ok(rec) => {
                return Ok(DeltaWitness {
                    delta,
                    tier: rec.tier,
                })
            }
            Err(Error::Uncertified { .. }) => {}
            Err(e) => return Err(e),
        }
        delta += step;
    }
    Err(Error::SearchExhausted(format!(
        "no certified gap up to {max_delta}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::Predicate;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn bigs(ns: &[i64]) -> Vec<BigInt> {
        ns.iter().map(|&n| big(n)).collect()
    }

    fn space_124() -> (Arc<TupleSpace>, OperatorTuple) {
        let sub = SubPredicate::full(Predicate::power(2));
        let ts = TupleSpace::new(sub, 3, 2).unwrap();
        (ts, OperatorTuple::from_consts(&[1, 2, 4]))
    }

    #[test]
    fn membership_and_least_tuple() {
        let (ts, _) = space_124();
        assert_eq!(ts.lex_min_indices(), vec![4, 2, 0]);
        assert_eq!(ts.values(&[4, 2, 0]).unwrap(), bigs(&[16, 4, 1]));
        assert!(ts.contains(&bigs(&[32, 4, 1])).unwrap());
        assert!(!ts.contains(&bigs(&[16, 8, 1])).unwrap());
        assert!(!ts.contains(&bigs(&[16, 4, 3])).unwrap());
        // single-coordinate spaces are the subsequence itself
        let one = TupleSpace::new(SubPredicate::full(Predicate::power(2)), 1, 0).unwrap();
        assert!(one.contains(&bigs(&[8])).unwrap());
    }

    #[test]
    fn certification_tiers() {
        let (ts, ops) = space_124();
        let rec = ts.certify(&ops, 32).unwrap();
        assert_eq!(rec.tier, CertTier::WindowOnly);
        assert!(rec.signs.iter().all(|s| s.sign == Sign::Positive));

        let wide = TupleSpace::new(SubPredicate::full(Predicate::power(2)), 3, 5).unwrap();
        let rec = wide.certify(&ops, 40).unwrap();
        assert_eq!(rec.tier, CertTier::Certified);

        let tight = TupleSpace::new(SubPredicate::full(Predicate::power(2)), 3, 1).unwrap();
        assert!(matches!(
            tight.certify(&ops, 32),
            Err(Error::Uncertified { delta: 1 })
        ));
    }

    #[test]
    fn smallest_certified_gap() {
        let sub = SubPredicate::full(Predicate::power(2));
        let ops = OperatorTuple::from_consts(&[1, 2, 4]);
        let w = sufficient_delta(&sub, &ops, 32, 16).unwrap();
        assert_eq!(w.delta, 2);
        assert_eq!(w.tier, CertTier::WindowOnly);
    }

    #[test]
    fn extremes_match_hand_computation() {
        let (ts, ops) = space_124();
        let rec = ts.certify(&ops, 32).unwrap();
        let min = ts
            .extreme(&ops, &rec.signs, false, &ts.free_box())
            .unwrap()
            .tuple()
            .unwrap();
        assert_eq!(min.0, vec![4, 2, 0]);
        assert_eq!(min.1, big(28));

        let mut bounds = ts.free_box();
        bounds[0] = (None, Some(5)); // z_1 <= 32
        let max = ts
            .extreme(&ops, &rec.signs, true, &bounds)
            .unwrap()
            .tuple()
            .unwrap();
        assert_eq!(ts.values(&max.0).unwrap(), bigs(&[32, 8, 2]));
        assert_eq!(max.1, big(56));

        assert_eq!(
            ts.extreme(&ops, &rec.signs, true, &ts.free_box()).unwrap(),
            Extremum::Unbounded
        );

        let mut clash = ts.free_box();
        clash[0] = (None, Some(3));
        assert_eq!(
            ts.extreme(&ops, &rec.signs, false, &clash).unwrap(),
            Extremum::Infeasible
        );
    }

    #[test]
    fn in_order_enumeration() {
        let (ts, ops) = space_124();
        let rec = ts.certify(&ops, 32).unwrap();
        let first: Vec<BigInt> = ts
            .enumerate_in_order(&ops, &rec.signs, 4)
            .unwrap()
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        assert_eq!(first, bigs(&[28, 44, 52, 56]));
    }

    #[test]
    fn descending_enumeration_for_negative_lead() {
        let one = TupleSpace::new(SubPredicate::full(Predicate::power(2)), 1, 0).unwrap();
        let ops = OperatorTuple::from_consts(&[-1]);
        let rec = one.certify(&ops, 32).unwrap();
        let first: Vec<BigInt> = one
            .enumerate_in_order(&ops, &rec.signs, 3)
            .unwrap()
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        assert_eq!(first, bigs(&[-1, -2, -4]));
    }

    #[test]
    fn gap_must_respect_subsequence_step() {
        let sub = SubPredicate::new(Predicate::power(2), 0, 2).unwrap();
        assert!(matches!(
            TupleSpace::new(sub.clone(), 2, 3),
            Err(Error::GapNotMultiple { delta: 3, step: 2 })
        ));
        let ts = TupleSpace::new(sub, 2, 4).unwrap();
        assert_eq!(ts.gap(), 2);
    }

    #[test]
    fn member_counts_small_window() {
        let (ts, _) = space_124();
        let members = ts.members_up_to(6).unwrap();
        // t1 in 4..=6, t2 in 2..=t1-2, t3 in 0..=t2-2
        let expected: usize = (4..=6u64)
            .map(|t1| (2..=t1 - 2).map(|t2| t2 - 1).sum::<u64>())
            .sum::<u64>() as usize;
        assert_eq!(members.len(), expected);
        assert!(members.iter().all(|m| ts.indices_valid(m)));
    }
}
