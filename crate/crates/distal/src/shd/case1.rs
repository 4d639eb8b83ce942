//! Trichotomy for the mixed-threshold family
//! φ(x;y) := [x − y₂ < 𝐁·P_Δ(x−y₁;𝐀)] when the two leading operators
//! differ on the enumerated set.
//!
//! With C := B₁ − A₁ of fixed nonzero sign and w := P_Δ(y₁−y₂;C) over
//! one-dimensional tuples, the extremal first coordinate P¹ = P¹_Δ(x−y₁;𝐀)
//! determines φ outright unless it lands within Δ successor steps of w:
//! far below (C > 0) forces φ false, far above forces φ true, and in the
//! middle band P¹ = σ^ε w for some |ε| ≤ Δ.

use crate::error::{Error, Result};
use crate::operator::{Operator, OperatorTuple, Sign};
use crate::pdelta::{p_delta, q_delta};
use crate::tuplespace::{Extremum, TupleSpace};
use num_bigint::BigInt;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum Regime {
    Bot,
    Top,
    Middle { epsilon: i64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct Case1Report {
    pub c_sign: Sign,
    #[serde(with = "crate::jsonint")]
    pub p1: BigInt,
    #[serde(with = "crate::jsonint")]
    pub w: BigInt,
    pub regime: Regime,
    /// Direct evaluation of φ at this point.
    pub phi: bool,
    /// Bot entails ¬φ, Top entails φ, Middle entails P¹ = σ^ε w with
    /// |ε| ≤ Δ; false marks a violated prediction.
    pub consistent: bool,
}

/// Classify one instance of the Case-1 family and cross-check the regime
/// prediction against direct evaluation. Preconditions: the threshold
/// x−y₁ stays strictly inside the dot range of the space, the slice
/// maximum at z₁ = P¹ is not exceeded, and B₁−A₁ has a nonzero sign.
pub fn case1_regime(
    ts: &TupleSpace,
    ops_a: &OperatorTuple,
    ops_b: &OperatorTuple,
    x: &BigInt,
    y1: &BigInt,
    y2: &BigInt,
    horizon: usize,
) -> Result<Case1Report> {
    let n = ts.arity();
    if ops_a.arity() != n || ops_b.arity() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            got: ops_a.arity().min(ops_b.arity()),
        });
    }
    let sub = ts.sub();
    let a1 = ops_a.first().coeffs();
    let b1 = ops_b.first().coeffs();
    let width = a1.len().max(b1.len());
    let c = Operator::new(
        (0..width)
            .map(|k| {
                b1.get(k).cloned().unwrap_or_default() - a1.get(k).cloned().unwrap_or_default()
            })
            .collect(),
    );
    let c_sign = c.sign_classify(sub, horizon)?.sign;
    if c_sign == Sign::Zero {
        return Err(Error::Precondition(
            "the leading operators agree on the set; this family needs A1 != B1".into(),
        ));
    }

    let threshold = x - y1;
    let p = p_delta(ts, ops_a, &threshold, horizon)?;
    if p.boundary {
        return Err(Error::Precondition(
            "threshold at or below the least dot value".into(),
        ));
    }
    if q_delta(ts, ops_a, &threshold, horizon)?.boundary {
        return Err(Error::Precondition(
            "threshold above every dot value".into(),
        ));
    }
    // The slice-maximum escape: when x−y₁ beats every dot with the same
    // first coordinate, the family reduces elsewhere.
    let rec = ts.ensure_cert(ops_a, horizon)?;
    let mut bounds = vec![(None, None); n];
    bounds[0] = (Some(p.indices[0]), Some(p.indices[0]));
    let slice_max = match ts.extreme(ops_a, &rec.signs, true, &bounds)? {
        Extremum::Tuple { value, .. } => value,
        other => {
            return Err(Error::Precondition(format!(
                "slice maximum at the extremal first coordinate is {other:?}"
            )))
        }
    };
    if threshold > slice_max {
        return Err(Error::Precondition(
            "threshold beats the slice maximum at the extremal first coordinate".into(),
        ));
    }

    let one_dim = TupleSpace::new(sub.clone(), 1, ts.delta())?;
    let w_res = p_delta(&one_dim, &OperatorTuple::new(vec![c])?, &(y1 - y2), horizon)?;
    let w = w_res.tuple[0].clone();
    let p1 = p.tuple[0].clone();
    let base = sub.base();
    let p1_base = base
        .index_of(&p1)?
        .expect("extremal coordinate is a member") as i64;
    let w_base = base.index_of(&w)?.expect("P value is a member") as i64;
    let delta = ts.delta() as i64;
    let shift = p1_base - w_base;

    let regime = if shift < -delta {
        if c_sign == Sign::Positive {
            Regime::Bot
        } else {
            Regime::Top
        }
    } else if shift > delta {
        if c_sign == Sign::Positive {
            Regime::Top
        } else {
            Regime::Bot
        }
    } else {
        Regime::Middle { epsilon: shift }
    };

    let phi = (x - y2) < ts.dot(ops_b, &p.indices)?;
    let consistent = match regime {
        Regime::Bot => !phi,
        Regime::Top => phi,
        Regime::Middle { epsilon } => {
            epsilon.unsigned_abs() <= ts.delta() as u64
                && base.nth((w_base + epsilon) as usize)? == p1
        }
    };

    Ok(Case1Report {
        c_sign,
        p1,
        w,
        regime,
        phi,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::{Predicate, SubPredicate};
    use std::sync::Arc;

    fn space() -> Arc<TupleSpace> {
        TupleSpace::new(SubPredicate::full(Predicate::power(2)), 2, 2).unwrap()
    }

    fn sweep(
        ops_a: &OperatorTuple,
        ops_b: &OperatorTuple,
        y2s: &[i64],
    ) -> (usize, usize, usize, usize) {
        let ts = space();
        let (mut bot, mut top, mut mid, mut skipped) = (0, 0, 0, 0);
        for &y2 in y2s {
            for x in (5..4000).step_by(17) {
                match case1_regime(
                    &ts,
                    ops_a,
                    ops_b,
                    &BigInt::from(x),
                    &BigInt::from(0),
                    &BigInt::from(y2),
                    96,
                ) {
                    Ok(report) => {
                        assert!(report.consistent, "x={x} y2={y2}: {report:?}");
                        match report.regime {
                            Regime::Bot => bot += 1,
                            Regime::Top => top += 1,
                            Regime::Middle { .. } => mid += 1,
                        }
                    }
                    Err(Error::Precondition(_)) => skipped += 1,
                    Err(other) => panic!("x={x} y2={y2}: {other:?}"),
                }
            }
        }
        (bot, top, mid, skipped)
    }

    #[test]
    fn positive_difference_sweep_is_consistent() {
        let a = OperatorTuple::from_consts(&[1, 1]);
        let b = OperatorTuple::from_consts(&[2, 1]);
        let (bot, top, mid, _) = sweep(&a, &b, &[-4000, -600, 0, 2000]);
        assert!(bot > 0, "no bot instances");
        assert!(top > 0, "no top instances");
        assert!(mid > 0, "no middle instances");
    }

    #[test]
    fn negative_difference_sweep_is_consistent() {
        let a = OperatorTuple::from_consts(&[3, 1]);
        let b = OperatorTuple::from_consts(&[1, 1]);
        let (bot, top, mid, _) = sweep(&a, &b, &[-4000, -600, 0, 2000]);
        assert!(bot + top > 0, "no decided instances");
        assert!(mid > 0, "no middle instances");
    }

    #[test]
    fn equal_leading_operators_are_rejected() {
        let ts = space();
        let ops = OperatorTuple::from_consts(&[1, 1]);
        let err = case1_regime(
            &ts,
            &ops,
            &ops,
            &BigInt::from(50),
            &BigInt::from(0),
            &BigInt::from(0),
            96,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn tiny_threshold_is_rejected() {
        let ts = space();
        let a = OperatorTuple::from_consts(&[1, 1]);
        let b = OperatorTuple::from_consts(&[2, 1]);
        let err = case1_regime(
            &ts,
            &a,
            &b,
            &BigInt::from(-100),
            &BigInt::from(0),
            &BigInt::from(0),
            96,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
