//! The extremal functions and their spot-check oracle.
//!
//! P(x) returns the gapped tuple with the largest dot value strictly below
//! the threshold x; Q(x) the smallest at or above it. The fast
//! implementation descends coordinate by coordinate; the oracle scans an
//! explicit member list. Run with `cargo run --example pq_functions`.

use distal::operator::{Operator, OperatorTuple};
use distal::pdelta::{p_delta, pq_oracle, q_delta};
use distal::predicate::{Predicate, SubPredicate};
use distal::tuplespace::TupleSpace;
use num_bigint::BigInt;

fn main() -> distal::Result<()> {
    let sub = SubPredicate::full(Predicate::power(2));
    let ts = TupleSpace::new(sub, 3, 2)?;
    let a = OperatorTuple::new(vec![
        Operator::new(vec![BigInt::from(1)]),
        Operator::new(vec![BigInt::from(2)]),
        Operator::new(vec![BigInt::from(4)]),
    ])?;

    // The dot values near the bottom of this space run 28, 44, 52, 56, ...
    // so a threshold of 47 is bracketed by 44 and 52.
    let x = BigInt::from(47);
    let p = p_delta(&ts, &a, &x, 96)?;
    let q = q_delta(&ts, &a, &x, 96)?;
    let fmt = |t: &[BigInt]| {
        t.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    println!("P(47) = ({}) with A.z = {}", fmt(&p.tuple), p.value);
    println!("Q(47) = ({}) with A.z = {}", fmt(&q.tuple), q.value);
    assert_eq!(p.tuple, vec![BigInt::from(32), BigInt::from(4), BigInt::from(1)]);
    assert_eq!(q.tuple, vec![BigInt::from(32), BigInt::from(8), BigInt::from(1)]);

    // Below the least dot value there is nothing strictly smaller, so P
    // falls back to the least tuple and flags the boundary.
    let p = p_delta(&ts, &a, &BigInt::from(5), 96)?;
    println!(
        "P(5)  = ({}) boundary = {} (threshold under the whole space)",
        fmt(&p.tuple),
        p.boundary
    );
    assert!(p.boundary);

    // The descent agrees with the exhaustive oracle across a threshold
    // sweep; the oracle caps the first-coordinate index instead of using
    // the growth profile.
    let mut checked = 0;
    for x in (-40..200).step_by(7) {
        let x = BigInt::from(x);
        let fast = p_delta(&ts, &a, &x, 96)?;
        let slow = pq_oracle(&ts, &a, &x, 24, false)?;
        assert_eq!(fast.tuple, slow.tuple, "P mismatch at {x}");
        let fast = q_delta(&ts, &a, &x, 96)?;
        let slow = pq_oracle(&ts, &a, &x, 24, true)?;
        assert_eq!(fast.tuple, slow.tuple, "Q mismatch at {x}");
        checked += 1;
    }
    println!("descent matches the oracle at {checked} thresholds");

    // Mixed-sign coefficients still order the space once the gap is wide
    // enough; here A = (1, -1) on pairs.
    let sub = SubPredicate::full(Predicate::power(2));
    let pairs = TupleSpace::new(sub, 2, 3)?;
    let mixed = OperatorTuple::new(vec![
        Operator::new(vec![BigInt::from(1)]),
        Operator::new(vec![BigInt::from(-1)]),
    ])?;
    let p = p_delta(&pairs, &mixed, &BigInt::from(100), 96)?;
    let q = q_delta(&pairs, &mixed, &BigInt::from(100), 96)?;
    println!(
        "mixed signs: P(100) = ({}) -> {}, Q(100) = ({}) -> {}",
        fmt(&p.tuple),
        p.value,
        fmt(&q.tuple),
        q.value
    );
    assert!(p.value < BigInt::from(100) && q.value >= BigInt::from(100));

    Ok(())
}
