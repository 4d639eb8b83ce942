//! The extremal functions over a gapped tuple space: P picks the member
//! with the largest dot value strictly below a threshold, Q the smallest
//! dot value at or above it.
//!
//! Both run a per-coordinate descent in twisted order. At each coordinate
//! the set of feasible indices is an interval — certification makes the
//! greedy suffix extremes strictly monotone in the index — so a binary
//! search (with an exponential bracket on the unbounded first coordinate)
//! finds the preferred end. A brute-force oracle over materialized windows
//! spot-checks the descent and reports dot-value collisions honestly.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{OperatorTuple, Sign};
use crate::tuplespace::{Extremum, PQResult, TupleSpace};

/// Hard stop for exponential brackets, guarding against an uncertified
/// order that fails to diverge.
const BRACKET_LIMIT: usize = 1 << 24;

/// Largest dot value strictly below x, with the tuple achieving it. When
/// every member sits at or above x the least tuple is returned with the
/// boundary flag set (positive leading sign; the negative dual never
/// bottoms out).
pub fn p_delta(
    ts: &TupleSpace,
    ops: &OperatorTuple,
    x: &BigInt,
    horizon: usize,
) -> Result<PQResult> {
    if let Some(hit) = ts.pq_cached(ops, x, false) {
        return Ok(hit);
    }
    let res = descend(ts, ops, x, false, horizon)?;
    ts.pq_store(ops, x, false, res.clone());
    Ok(res)
}

/// Smallest dot value at or above x. When every member sits below x the
/// greatest tuple is returned with the boundary flag set (negative leading
/// sign; the positive dual never tops out).
pub fn q_delta(
    ts: &TupleSpace,
    ops: &OperatorTuple,
    x: &BigInt,
    horizon: usize,
) -> Result<PQResult> {
    if let Some(hit) = ts.pq_cached(ops, x, true) {
        return Ok(hit);
    }
    let res = descend(ts, ops, x, true, horizon)?;
    ts.pq_store(ops, x, true, res.clone());
    Ok(res)
}

fn descend(
    ts: &TupleSpace,
    ops: &OperatorTuple,
    x: &BigInt,
    is_q: bool,
    horizon: usize,
) -> Result<PQResult> {
    let rec = ts.ensure_cert(ops, horizon)?;
    let n = ts.arity();
    let lead = rec.signs[0].sign;
    if lead == Sign::Zero {
        return Err(Error::Precondition(
            "extremal functions need a nonzero leading sign".into(),
        ));
    }
    let mut indices = Vec::with_capacity(n);
    let mut budget = x.clone();
    for i in 0..n {
        let lo = (n - 1 - i) * ts.gap();
        let hi = if i == 0 {
            None
        } else {
            Some(indices[i - 1] - ts.gap())
        };
        // Feasibility of t_i: some completion from here respects the
        // threshold. For P that needs the suffix minimum below the budget,
        // for Q the suffix maximum at or above it.
        let feasible = |t: usize| -> Result<bool> {
            let v = ts.suffix_extreme_given(ops, &rec.signs, i, t, !is_q)?;
            Ok(if is_q { v >= budget } else { v < budget })
        };
        // Twisted preference at this coordinate, and how feasibility moves
        // with the index: P wants the twisted-largest feasible index, Q the
        // twisted-smallest.
        let sign = rec.signs[i].sign;
        let pick = match (is_q, sign) {
            (false, Sign::Positive) => last_feasible(lo, hi, feasible)?,
            (false, Sign::Negative) => first_feasible(lo, hi, feasible)?,
            (true, Sign::Positive) => first_feasible(lo, hi, feasible)?,
            (true, Sign::Negative) => last_feasible(lo, hi, feasible)?,
            (_, Sign::Zero) => {
                // A zero sign past a certified order can only mean the
                // coordinate never moves the value; take the floor.
                feasible(lo)?.then_some(lo)
            }
        };
        let Some(t) = pick else {
            if i > 0 {
                return Err(Error::Uncertified { delta: ts.delta() });
            }
            // Nothing feasible at all: the threshold clears the space.
            let fallback = ts.extreme(ops, &rec.signs, is_q, &ts.free_box())?;
            let (indices, value) = match fallback {
                Extremum::Tuple { indices, value } => (indices, value),
                _ => return Err(Error::Uncertified { delta: ts.delta() }),
            };
            let tuple = ts.values(&indices)?;
            return Ok(PQResult {
                indices,
                tuple,
                value,
                boundary: true,
            });
        };
        budget -= ops.get(i).apply_index(ts.sub(), ts.sub().base_index(t))?;
        indices.push(t);
    }
    let value = ts.dot(ops, &indices)?;
    let ok = if is_q { value >= *x } else { value < *x };
    if !ok {
        return Err(Error::Uncertified { delta: ts.delta() });
    }
    let tuple = ts.values(&indices)?;
    Ok(PQResult {
        indices,
        tuple,
        value,
        boundary: false,
    })
}

/// Largest t in [lo, hi] (hi unbounded when None) with f true, assuming f
/// is true on a downward-closed interval.
fn last_feasible(
    lo: usize,
    hi: Option<usize>,
    f: impl Fn(usize) -> Result<bool>,
) -> Result<Option<usize>> {
    if !f(lo)? {
        return Ok(None);
    }
    let mut known = lo;
    let mut bad = match hi {
        Some(h) => {
            if f(h)? {
                return Ok(Some(h));
            }
            h
        }
        None => {
            let mut step = 1usize;
            loop {
                let probe = known + step;
                if probe > BRACKET_LIMIT {
                    return Err(Error::SearchExhausted(
                        "exponential bracket exceeded its hard limit".into(),
                    ));
                }
                if f(probe)? {
                    known = probe;
                    step *= 2;
                } else {
                    break probe;
                }
            }
        }
    };
    while bad - known > 1 {
        let mid = known + (bad - known) / 2;
        if f(mid)? {
            known = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Some(known))
}

/// Smallest t in [lo, hi] with f true, assuming f is true on an
/// upward-closed interval.
fn first_feasible(
    lo: usize,
    hi: Option<usize>,
    f: impl Fn(usize) -> Result<bool>,
) -> Result<Option<usize>> {
    if f(lo)? {
        return Ok(Some(lo));
    }
    let (mut bad, mut known) = match hi {
        Some(h) => {
            if !f(h)? {
                return Ok(None);
            }
            (lo, h)
        }
        None => {
            let mut step = 1usize;
            let mut last_bad = lo;
            loop {
                let probe = lo + step;
                if probe > BRACKET_LIMIT {
                    return Err(Error::SearchExhausted(
                        "exponential bracket exceeded its hard limit".into(),
                    ));
                }
                if f(probe)? {
                    break (last_bad, probe);
                }
                last_bad = probe;
                step *= 2;
            }
        }
    };
    while known - bad > 1 {
        let mid = bad + (known - bad) / 2;
        if f(mid)? {
            known = mid;
        } else {
            bad = mid;
        }
    }
    Ok(Some(known))
}

/// Brute-force P/Q over the materialized window with t_1 <= cap. Collisions
/// among candidate dot values are reported, and an answer that leans on the
/// window edge is refused.
pub fn pq_oracle(
    ts: &TupleSpace,
    ops: &OperatorTuple,
    x: &BigInt,
    cap: usize,
    is_q: bool,
) -> Result<PQResult> {
    let members = ts.members_up_to(cap)?;
    if members.is_empty() {
        return Err(Error::HorizonTooSmall(format!(
            "no members with first index up to {cap}"
        )));
    }
    let mut best: Option<(BigInt, &Vec<usize>, Option<&Vec<usize>>)> = None;
    let mut all_min: Option<(BigInt, &Vec<usize>)> = None;
    let mut all_max: Option<(BigInt, &Vec<usize>)> = None;
    for m in members.iter() {
        let v = ts.dot(ops, m)?;
        match &all_min {
            Some((cur, _)) if v >= *cur => {}
            _ => all_min = Some((v.clone(), m)),
        }
        match &all_max {
            Some((cur, _)) if v <= *cur => {}
            _ => all_max = Some((v.clone(), m)),
        }
        let qualifies = if is_q { v >= *x } else { v < *x };
        if !qualifies {
            continue;
        }
        match &mut best {
            None => best = Some((v, m, None)),
            Some((cur, _, tie)) => {
                if v == *cur {
                    *tie = Some(m);
                } else if if is_q { v < *cur } else { v > *cur } {
                    best = Some((v, m, None));
                }
            }
        }
    }
    // A tie matters only at the answer itself.
    if let Some((v, witness, Some(other))) = &best {
        return Err(Error::Collision {
            value: v.clone(),
            lhs: ts.values(witness)?,
            rhs: ts.values(other)?,
        });
    }
    let (value, indices) = match best {
        Some((v, m, _)) => (v, m.clone()),
        None => {
            // The threshold clears everything the window holds. That is a
            // boundary answer only on the side where the space itself ends;
            // the oracle reads the leading sign directly so it stays usable
            // on spaces that fail certification.
            let lead_positive =
                ops.first().sign_classify(ts.sub(), cap)?.sign == Sign::Positive;
            let terminal = if is_q { lead_positive } else { !lead_positive };
            if terminal {
                return Err(Error::HorizonTooSmall(format!(
                    "no qualifying member with first index up to {cap}"
                )));
            }
            let (v, m) = if is_q {
                all_max.expect("nonempty window")
            } else {
                all_min.expect("nonempty window")
            };
            let tuple = ts.values(m)?;
            return Ok(PQResult {
                indices: m.clone(),
                tuple,
                value: v,
                boundary: true,
            });
        }
    };
    if indices[0] >= cap {
        return Err(Error::HorizonTooSmall(format!(
            "answer sits on the window edge t_1 = {cap}"
        )));
    }
    let tuple = ts.values(&indices)?;
    Ok(PQResult {
        indices,
        tuple,
        value,
        boundary: false,
    })
}

/// Outcome of comparing the extremal first coordinates at two shifted
/// thresholds x - s and x - t.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum InnocuousCase {
    /// P1(x-s) sits delta successor steps above P1(x-t), delta <= Lambda.
    CaseI { delta: usize },
    /// P1(x-s) sits epsilon successor steps above P1(t-s) instead.
    CaseII { epsilon: usize },
}

/// Classify the pair (x - s, x - t), s <= t, by how far apart the extremal
/// first coordinates land. Prefers the x - t comparison on ties.
pub fn innocuous_case(
    ts: &TupleSpace,
    ops: &OperatorTuple,
    lambda: usize,
    s: &BigInt,
    t: &BigInt,
    x: &BigInt,
    horizon: usize,
) -> Result<InnocuousCase> {
    let rec = ts.ensure_cert(ops, horizon)?;
    if rec.signs[0].sign != Sign::Positive {
        return Err(Error::Precondition(
            "case classification is set up for a positive leading sign".into(),
        ));
    }
    if s > t {
        return Err(Error::Precondition("shifts must satisfy s <= t".into()));
    }
    let free = vec![(None, None); ts.arity()];
    let least_dot = match ts.extreme(ops, &rec.signs, false, &free)? {
        Extremum::Tuple { value, .. } => value,
        _ => {
            return Err(Error::Precondition(
                "the dot products must be bounded below".into(),
            ))
        }
    };
    if *t >= x - &least_dot {
        return Err(Error::Precondition(
            "the far shift must leave room above the least dot value".into(),
        ));
    }
    let near = p_delta(ts, ops, &(x - s), horizon)?.tuple[0].clone();
    let far = p_delta(ts, ops, &(x - t), horizon)?.tuple[0].clone();
    let base = ts.sub().base();
    for delta in 0..=lambda {
        if near == base.successor(&far, delta as i64)? {
            return Ok(InnocuousCase::CaseI { delta });
        }
    }
    let mid = p_delta(ts, ops, &(t - s), horizon)?.tuple[0].clone();
    for epsilon in 0..=lambda {
        if near == base.successor(&mid, epsilon as i64)? {
            return Ok(InnocuousCase::CaseII { epsilon });
        }
    }
    Err(Error::ClassificationFailed(format!(
        "first coordinate {near} is not within {lambda} steps of {far} or {mid}"
    )))
}

/// The reduction identity: stripping the first coordinate of P(a) and
/// re-solving with the residual threshold lands on the same tail.
///
/// Preconditions: a must clear the least dot value, and must not exceed
/// the largest dot over the slice pinned to the first coordinate of P(a);
/// outside that strip the identity is not claimed and the check errors
/// rather than reporting a misleading false.
pub fn reduction_check(
    ts: &TupleSpace,
    ops: &OperatorTuple,
    a: &BigInt,
    horizon: usize,
) -> Result<bool> {
    if ts.arity() < 2 {
        return Err(Error::Precondition(
            "the reduction needs at least two coordinates".into(),
        ));
    }
    let rec = ts.ensure_cert(ops, horizon)?;
    let full = p_delta(ts, ops, a, horizon)?;
    if full.boundary {
        return Err(Error::Precondition(
            "threshold does not clear the least dot value".into(),
        ));
    }
    let mut slice = ts.free_box();
    slice[0] = (Some(full.indices[0]), Some(full.indices[0]));
    let slice_max = match ts.extreme(ops, &rec.signs, true, &slice)? {
        Extremum::Tuple { value, .. } => value,
        _ => return Err(Error::Precondition("slice extremum unavailable".into())),
    };
    if *a > slice_max {
        return Err(Error::Precondition(
            "threshold overshoots the pinned first-coordinate slice".into(),
        ));
    }
    let head = ops.first().apply_index(ts.sub(), ts.sub().base_index(full.indices[0]))?;
    let residual = a - head;
    let tail_ops = ops.tail()?;
    let tail_space = TupleSpace::new(ts.sub().clone(), ts.arity() - 1, ts.delta())?;
    let tail = p_delta(&tail_space, &tail_ops, &residual, horizon)?;
    Ok(tail.indices == full.indices[1..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::{Predicate, SubPredicate};
    use std::sync::Arc;

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
    fn worked_values_three_coordinates() {
        let (ts, ops) = space_124();
        let p = p_delta(&ts, &ops, &big(47), 32).unwrap();
        assert_eq!(p.tuple, bigs(&[32, 4, 1]));
        assert_eq!(p.value, big(44));
        assert!(!p.boundary);

        let q = q_delta(&ts, &ops, &big(47), 32).unwrap();
        assert_eq!(q.tuple, bigs(&[32, 8, 1]));
        assert_eq!(q.value, big(52));

        let q = q_delta(&ts, &ops, &big(45), 32).unwrap();
        assert_eq!(q.tuple, bigs(&[32, 8, 1]));

        let q0 = q_delta(&ts, &ops, &big(0), 32).unwrap();
        assert_eq!(q0.tuple, bigs(&[16, 4, 1]));
        assert_eq!(q0.value, big(28));
        assert!(!q0.boundary);
    }

    #[test]
    fn boundary_at_the_least_value() {
        let (ts, ops) = space_124();
        for x in [28i64, 20, -3] {
            let p = p_delta(&ts, &ops, &big(x), 32).unwrap();
            assert_eq!(p.tuple, bigs(&[16, 4, 1]));
            assert_eq!(p.value, big(28));
            assert!(p.boundary);
        }
        let p = p_delta(&ts, &ops, &big(29), 32).unwrap();
        assert_eq!(p.value, big(28));
        assert!(!p.boundary);
    }

    #[test]
    fn single_coordinate_spaces() {
        let sub = SubPredicate::full(Predicate::power(2));
        let one = TupleSpace::new(sub.clone(), 1, 0).unwrap();
        let id = OperatorTuple::from_consts(&[1]);
        let p = p_delta(&one, &id, &big(5), 32).unwrap();
        assert_eq!(p.tuple, bigs(&[4]));
        let q = q_delta(&one, &id, &big(5), 32).unwrap();
        assert_eq!(q.tuple, bigs(&[8]));

        let neg = OperatorTuple::from_consts(&[-1]);
        let p = p_delta(&one, &neg, &big(-5), 32).unwrap();
        assert_eq!(p.tuple, bigs(&[8]));
        assert_eq!(p.value, big(-8));
        // every dot value sits below 3: boundary at the top of the space
        let q = q_delta(&one, &neg, &big(3), 32).unwrap();
        assert!(q.boundary);
        assert_eq!(q.tuple, bigs(&[1]));
    }

    #[test]
    fn oracle_agrees_with_descent() {
        let (ts, ops) = space_124();
        for x in -5..200i64 {
            let x = big(x);
            let fast = p_delta(&ts, &ops, &x, 32).unwrap();
            let slow = pq_oracle(&ts, &ops, &x, 20, false).unwrap();
            assert_eq!(fast, slow, "P at {x}");
            let fast = q_delta(&ts, &ops, &x, 32).unwrap();
            let slow = pq_oracle(&ts, &ops, &x, 20, true).unwrap();
            assert_eq!(fast, slow, "Q at {x}");
        }
    }

    #[test]
    fn oracle_reports_collisions() {
        let sub = SubPredicate::full(Predicate::power(2));
        let ts = TupleSpace::new(sub, 3, 1).unwrap();
        let ops = OperatorTuple::from_consts(&[1, 2, 4]);
        let err = pq_oracle(&ts, &ops, &big(100), 12, false).unwrap_err();
        match err {
            Error::Collision { value, .. } => assert_eq!(value, big(96)),
            e => panic!("expected a collision, got {e}"),
        }
    }

    #[test]
    fn oracle_refuses_window_edges() {
        let (ts, ops) = space_124();
        // large threshold: the best candidate leans on the cap
        assert!(matches!(
            pq_oracle(&ts, &ops, &big(1 << 20), 10, false),
            Err(Error::HorizonTooSmall(_))
        ));
    }

    #[test]
    fn case_classification() {
        let (ts, ops) = space_124();
        // x = 50: P(50) and P(50 - t) first coordinates stay on the grid
        let c = innocuous_case(&ts, &ops, 5, &big(0), &big(3), &big(50), 32).unwrap();
        assert_eq!(c, InnocuousCase::CaseI { delta: 0 });
        let c = innocuous_case(&ts, &ops, 5, &big(0), &big(20), &big(50), 32).unwrap();
        assert_eq!(c, InnocuousCase::CaseI { delta: 1 });
        // huge x with a far shift: P1(1040) = 1024 = sigma(P1(1000))
        let c = innocuous_case(&ts, &ops, 2, &big(0), &big(1000), &big(1040), 32).unwrap();
        assert_eq!(c, InnocuousCase::CaseII { epsilon: 1 });
    }

    #[test]
    fn reduction_identity_on_the_strip() {
        let (ts, ops) = space_124();
        assert!(reduction_check(&ts, &ops, &big(47), 32).unwrap());
        // below the least dot value the reduction is not claimed
        assert!(matches!(
            reduction_check(&ts, &ops, &big(10), 32),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn spaced_subsequence_descent() {
        // even-index powers of two, gap 4 in base units = 2 index steps
        let sub = SubPredicate::new(Predicate::power(2), 0, 2).unwrap();
        let ts = TupleSpace::new(sub, 2, 4).unwrap();
        let ops = OperatorTuple::from_consts(&[1, 1]);
        for x in 0..160i64 {
            let x = big(x);
            let fast = p_delta(&ts, &ops, &x, 24).unwrap();
            let slow = pq_oracle(&ts, &ops, &x, 12, false).unwrap();
            assert_eq!(fast, slow, "P at {x}");
        }
    }
}
