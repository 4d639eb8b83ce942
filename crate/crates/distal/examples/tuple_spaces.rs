//! Gapped tuples, ordering certificates, and dot-order enumeration.
//!
//! A gapped tuple space holds descending member tuples (z_1, ..., z_n)
//! whose consecutive index gaps are at least Delta. Run with
//! `cargo run --example tuple_spaces`.

use distal::operator::{Operator, OperatorTuple};
use distal::predicate::{Predicate, SubPredicate};
use distal::tuplespace::{sufficient_delta, Extremum, TupleSpace};
use num_bigint::BigInt;

fn ops(consts: &[i64]) -> OperatorTuple {
    OperatorTuple::new(
        consts
            .iter()
            .map(|&c| Operator::new(vec![BigInt::from(c)]))
            .collect(),
    )
    .expect("constant operators are nonzero")
}

fn main() -> distal::Result<()> {
    let sub = SubPredicate::full(Predicate::power(2));
    let ts = TupleSpace::new(sub.clone(), 3, 2)?;

    // Membership asks for members of the set, descending, with index gaps
    // of at least Delta = 2.
    for z in [[32i64, 4, 1], [32, 8, 1], [32, 16, 1]] {
        let t: Vec<BigInt> = z.iter().map(|&v| BigInt::from(v)).collect();
        println!("(32,{:>2},1) gap-2 member: {}", z[1], ts.contains(&t)?);
    }
    assert!(ts.contains(&[BigInt::from(32), BigInt::from(4), BigInt::from(1)])?);
    assert!(!ts.contains(&[BigInt::from(32), BigInt::from(16), BigInt::from(1)])?);

    // The dot value of A = (1, 2, 4) against a tuple is z1 + 2 z2 + 4 z3;
    // the space works in index coordinates, here (5, 2, 0) = (32, 4, 1).
    let a = ops(&[1, 2, 4]);
    println!("\nA = (1,2,4) dot (32,4,1) = {}", ts.dot(&a, &[5, 2, 0])?);

    // How wide must the gap be before the dot order coincides with the
    // lexicographic order on index tuples? The certifier searches upward.
    let w = sufficient_delta(&sub, &a, 96, 16)?;
    println!("sufficient gap for A on 2^N: Delta = {} ({:?})", w.delta, w.tier);
    assert_eq!(w.delta, 2);

    // At the certified gap the first members in increasing dot order are
    // enumerated lazily. At Delta = 1 the order would collapse:
    // A.(32,16,8) = A.(64,8,4) = 96 collide.
    let rec = ts.ensure_cert(&a, 96)?;
    println!("\nfirst gap-2 members of 2^N^3 in A-order:");
    for (indices, value) in ts.enumerate_in_order(&a, &rec.signs, 6)? {
        let z = ts.values(&indices)?;
        let z: Vec<String> = z.iter().map(|v| v.to_string()).collect();
        println!("  ({}) -> {value}", z.join(","));
    }

    let loose = TupleSpace::new(sub, 3, 1)?;
    let z1 = vec![BigInt::from(32), BigInt::from(16), BigInt::from(8)];
    let z2 = vec![BigInt::from(64), BigInt::from(8), BigInt::from(4)];
    assert!(loose.contains(&z1)? && loose.contains(&z2)?);
    assert_eq!(loose.dot(&a, &[5, 4, 3])?, loose.dot(&a, &[6, 3, 2])?);
    println!("\nat Delta = 1 the order degenerates: A.(32,16,8) = A.(64,8,4) = 96");

    // Extremes over an index box: the largest dot value with first
    // coordinate index at most 5 (so z1 <= 32).
    let bounds = vec![(None, Some(5)), (None, None), (None, None)];
    match ts.extreme(&a, &rec.signs, true, &bounds)? {
        Extremum::Tuple { indices, value } => {
            let z = ts.values(&indices)?;
            let z: Vec<String> = z.iter().map(|v| v.to_string()).collect();
            println!("max A.z with z1 <= 32: ({}) -> {value}", z.join(","));
            assert_eq!(value, BigInt::from(56)); // (32, 8, 2)
        }
        other => panic!("expected a maximizing tuple, got {other:?}"),
    }

    Ok(())
}
