//! Canonical witness search for the two-sided condition
//! y₁ + 𝐀·z < x < y₂ + 𝐁·z inside a coordinate box.
//!
//! Whenever a witness exists in the box and the escape pattern is absent,
//! some witness falls into one of three canonical classes: a tight gap
//! (or last coordinate at its floor), a coordinate on the box boundary,
//! or one of the two extremal tuples for the threshold. The search is
//! exhaustive over the box, so a missing witness is a conclusive answer
//! when the box is finite within the index cap.

use crate::error::{Error, Result};
use crate::formula::Value;
use crate::operator::{Operator, OperatorTuple, Sign};
use crate::pdelta::p_delta;
use crate::tuplespace::TupleSpace;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CanonicalOutcome {
    /// The box holds no witness at all.
    NoWitness,
    /// v₁ = +∞ with sign pattern A₁ = 0 < B₁ or A₁ < 0 = B₁: witnesses
    /// keep appearing with unbounded first coordinate.
    Escape,
    /// Tight gap at `coord` (`coord = n` means the last coordinate sits
    /// at the space minimum).
    CaseI {
        coord: usize,
        indices: Vec<usize>,
        #[serde(with = "crate::jsonint::vec")]
        tuple: Vec<BigInt>,
    },
    /// Coordinate `coord` touches its box bound.
    CaseII {
        coord: usize,
        indices: Vec<usize>,
        #[serde(with = "crate::jsonint::vec")]
        tuple: Vec<BigInt>,
    },
    /// The witness is an extremal tuple: P_Δ(x−y₁;𝐀) or P_Δ(y₂−x;−𝐁).
    CaseIII {
        indices: Vec<usize>,
        #[serde(with = "crate::jsonint::vec")]
        tuple: Vec<BigInt>,
    },
}

fn check_bound(ts: &TupleSpace, val: &Value, upper: bool) -> Result<Option<usize>> {
    match val {
        Value::NegInf if !upper => Ok(None),
        Value::PosInf if upper => Ok(None),
        Value::Int(z) => match ts.sub().index_of(z)? {
            Some(idx) => Ok(Some(idx)),
            None => Err(Error::NotAMember(z.clone())),
        },
        other => Err(Error::BadInput(format!(
            "box bound {other:?} has the wrong infinity for this side"
        ))),
    }
}

fn box_members(
    ts: &TupleSpace,
    lo: &[Option<usize>],
    hi: &[Option<usize>],
    max_index: usize,
) -> Vec<Vec<usize>> {
    let n = ts.arity();
    let gap = ts.gap();
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    // Fill from the last coordinate upward; earlier coordinates must
    // clear the previous one by `gap`.
    fn rec(
        pos: usize,
        floor: usize,
        n: usize,
        gap: usize,
        lo: &[Option<usize>],
        hi: &[Option<usize>],
        max_index: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let i = n - 1 - pos;
        let lo_i = lo[i].unwrap_or(0).max(floor);
        let hi_i = hi[i].unwrap_or(max_index).min(max_index);
        for idx in lo_i..=hi_i {
            cur[i] = idx;
            if pos + 1 == n {
                out.push(cur.clone());
            } else {
                rec(pos + 1, idx + gap, n, gap, lo, hi, max_index, cur, out);
            }
        }
    }
    if n > 0 {
        rec(0, 0, n, gap, lo, hi, max_index, &mut cur, &mut out);
    }
    out.sort();
    out
}

/// Exhaustive canonical-witness search. `max_index` caps the first
/// coordinate's index when the box is unbounded; hitting that cap without
/// a classified witness is reported as an inconclusive error.
#[allow(clippy::too_many_arguments)]
pub fn canonical_witness(
    ts: &TupleSpace,
    ops_a: &OperatorTuple,
    ops_b: &OperatorTuple,
    x: &BigInt,
    y1: &BigInt,
    y2: &BigInt,
    u: &[Value],
    v: &[Value],
    horizon: usize,
    max_index: usize,
) -> Result<CanonicalOutcome> {
    let n = ts.arity();
    if ops_a.arity() != n || ops_b.arity() != n || u.len() != n || v.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            got: ops_a.arity().min(ops_b.arity()).min(u.len()).min(v.len()),
        });
    }
    let sub = ts.sub();
    let a1 = ops_a.first().sign_classify(sub, horizon)?;
    let b1 = ops_b.first().sign_classify(sub, horizon)?;
    if v[0] == Value::PosInf
        && ((a1.sign == Sign::Zero && b1.sign == Sign::Positive)
            || (a1.sign == Sign::Negative && b1.sign == Sign::Zero))
    {
        return Ok(CanonicalOutcome::Escape);
    }

    let lo: Vec<Option<usize>> = u
        .iter()
        .map(|val| check_bound(ts, val, false))
        .collect::<Result<_>>()?;
    let hi: Vec<Option<usize>> = v
        .iter()
        .map(|val| check_bound(ts, val, true))
        .collect::<Result<_>>()?;
    let inconclusive = hi[0].is_none_or(|h| h > max_index);

    // The two extremal tuples of class (iii), available when every
    // operator on both sides has a resolved nonzero sign.
    let signs_ok = {
        let mut ok = true;
        for op in ops_a.iter().chain(ops_b.iter()) {
            if op.sign_classify(sub, horizon)?.sign == Sign::Zero {
                ok = false;
            }
        }
        ok
    };
    let neg_b = OperatorTuple::new(
        ops_b
            .iter()
            .map(|op| Operator::new(op.coeffs().iter().map(|c| -c).collect()))
            .collect(),
    )?;
    let extremals: Vec<Vec<usize>> = if signs_ok {
        let mut es = Vec::new();
        if let Ok(p) = p_delta(ts, ops_a, &(x - y1), horizon) {
            es.push(p.indices);
        }
        if let Ok(p) = p_delta(ts, &neg_b, &(y2 - x), horizon) {
            es.push(p.indices);
        }
        es
    } else {
        Vec::new()
    };

    let gap = ts.gap();
    let mut found_any = false;
    for indices in box_members(ts, &lo, &hi, max_index) {
        let dot_a = ts.dot(ops_a, &indices)?;
        let dot_b = ts.dot(ops_b, &indices)?;
        if !(&(y1 + &dot_a) < x && x < &(y2 + &dot_b)) {
            continue;
        }
        found_any = true;
        let tuple = ts.values(&indices)?;
        for i in 0..n {
            let tight = if i + 1 < n {
                indices[i] == indices[i + 1] + gap
            } else {
                indices[i] == 0
            };
            if tight {
                return Ok(CanonicalOutcome::CaseI {
                    coord: i + 1,
                    indices,
                    tuple,
                });
            }
        }
        for i in 0..n {
            if lo[i] == Some(indices[i]) || hi[i] == Some(indices[i]) {
                return Ok(CanonicalOutcome::CaseII {
                    coord: i + 1,
                    indices,
                    tuple,
                });
            }
        }
        if extremals.iter().any(|e| e == &indices) {
            return Ok(CanonicalOutcome::CaseIII { indices, tuple });
        }
    }

    if inconclusive {
        return Err(Error::SearchExhausted(format!(
            "box search capped at first-coordinate index {max_index} without a classified witness"
        )));
    }
    if found_any {
        return Err(Error::ClassificationFailed(
            "witnesses exist in the box but none falls into a canonical class".into(),
        ));
    }
    Ok(CanonicalOutcome::NoWitness)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::{Predicate, SubPredicate};

    fn space() -> std::sync::Arc<TupleSpace> {
        TupleSpace::new(SubPredicate::full(Predicate::power(2)), 2, 1).unwrap()
    }

    fn fin(z: i64) -> Value {
        Value::Int(BigInt::from(z))
    }

    #[test]
    fn contradictory_sides_have_no_witness() {
        let ts = space();
        let ops = OperatorTuple::from_consts(&[1, 1]);
        let out = canonical_witness(
            &ts,
            &ops,
            &ops,
            &BigInt::from(40),
            &BigInt::from(5),
            &BigInt::from(5),
            &[Value::NegInf, Value::NegInf],
            &[fin(256), fin(64)],
            60,
            20,
        )
        .unwrap();
        assert_eq!(out, CanonicalOutcome::NoWitness);
    }

    #[test]
    fn unbounded_first_coordinate_with_zero_lead_escapes() {
        let ts = space();
        let zero_lead = OperatorTuple::new(vec![Operator::zero(), Operator::constant(1)]).unwrap();
        let pos_lead = OperatorTuple::from_consts(&[1, 1]);
        let out = canonical_witness(
            &ts,
            &zero_lead,
            &pos_lead,
            &BigInt::from(40),
            &BigInt::from(0),
            &BigInt::from(0),
            &[Value::NegInf, Value::NegInf],
            &[Value::PosInf, fin(64)],
            60,
            20,
        )
        .unwrap();
        assert_eq!(out, CanonicalOutcome::Escape);
    }

    #[test]
    fn least_witness_has_a_tight_gap() {
        let ts = space();
        let ops = OperatorTuple::from_consts(&[1, 1]);
        let out = canonical_witness(
            &ts,
            &ops,
            &ops,
            &BigInt::from(100),
            &BigInt::from(0),
            &BigInt::from(1000),
            &[Value::NegInf, Value::NegInf],
            &[fin(512), fin(8)],
            60,
            20,
        )
        .unwrap();
        match out {
            CanonicalOutcome::CaseI { coord, indices, tuple } => {
                assert_eq!(coord, 1);
                assert_eq!(indices, vec![1, 0]);
                assert_eq!(tuple, vec![BigInt::from(2), BigInt::from(1)]);
            }
            other => panic!("expected a tight-gap witness, got {other:?}"),
        }
    }

    #[test]
    fn capped_unbounded_search_reports_exhaustion() {
        let ts = space();
        let ops = OperatorTuple::from_consts(&[1, 1]);
        let err = canonical_witness(
            &ts,
            &ops,
            &ops,
            &BigInt::from(40),
            &BigInt::from(5),
            &BigInt::from(5),
            &[Value::NegInf, Value::NegInf],
            &[Value::PosInf, Value::PosInf],
            60,
            12,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SearchExhausted(_)), "{err:?}");
    }

    #[test]
    fn non_member_bounds_are_rejected() {
        let ts = space();
        let ops = OperatorTuple::from_consts(&[1, 1]);
        let err = canonical_witness(
            &ts,
            &ops,
            &ops,
            &BigInt::from(40),
            &BigInt::from(0),
            &BigInt::from(50),
            &[fin(3), Value::NegInf],
            &[fin(256), fin(64)],
            60,
            20,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotAMember(_)), "{err:?}");
    }

    #[test]
    fn interior_witness_is_extremal() {
        // Force the least witnesses out of reach: tight lower bounds keep
        // indices off the floor, wide upper bounds keep them off the
        // ceiling, and the sides pin z to the extremal tuple for 𝐀.
        let ts = space();
        let a = OperatorTuple::from_consts(&[1, 1]);
        let b = OperatorTuple::from_consts(&[1, 1]);
        // Members with z₂ ≥ 4, z₁ ≥ 4·z₂ keep gaps slack and floors clear.
        let out = canonical_witness(
            &ts,
            &a,
            &b,
            &BigInt::from(100),
            &BigInt::from(0),
            &BigInt::from(1000),
            &[fin(16), fin(4)],
            &[fin(4096), fin(1024)],
            60,
            20,
        )
        .unwrap();
        // Lex-least box member is (16,4): gap 16 = 2·2·4 is slack, but
        // both coordinates touch their lower bounds.
        match out {
            CanonicalOutcome::CaseII { coord, tuple, .. } => {
                assert_eq!(coord, 1);
                assert_eq!(tuple[0], BigInt::from(16));
            }
            other => panic!("expected a bound-touching witness, got {other:?}"),
        }
    }
}
