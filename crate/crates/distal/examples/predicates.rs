//! Built-in sparse sets, successors, and congruence periods.
//!
//! Run with `cargo run --example predicates`.

use distal::predicate::{Predicate, RegularVerdict, SubPredicate};
use num_bigint::BigInt;

fn main() -> distal::Result<()> {
    // The stock families: powers, Fibonacci-type recurrences, factorials.
    let pow2 = Predicate::power(2);
    let fib = Predicate::fibonacci();
    let fact = Predicate::factorial();

    println!("first eight members of each family:");
    for (name, pred) in [("2^N", &pow2), ("fibonacci", &fib), ("factorial", &fact)] {
        let row: Vec<String> = (0..8)
            .map(|i| pred.nth(i).map(|v| v.to_string()))
            .collect::<distal::Result<_>>()?;
        println!("  {name:>9}: {}", row.join(" "));
    }

    // Membership and ordinal position.
    assert!(pow2.contains(&BigInt::from(64))?);
    assert!(!pow2.contains(&BigInt::from(65))?);
    assert_eq!(pow2.index_of(&BigInt::from(64))?, Some(6));

    // The successor walks member-to-member; negative steps clamp at the
    // least member instead of leaving the set.
    let x = BigInt::from(8);
    println!("\nsuccessors of {x} in 2^N:");
    for k in [-10, -1, 0, 1, 3] {
        println!("  sigma^{k:>3}({x}) = {}", pow2.successor(&x, k)?);
    }
    assert_eq!(pow2.successor(&x, -10)?, BigInt::from(1));

    // Member sequences are eventually periodic modulo any m >= 2; the
    // library finds the preperiod and period within a finite horizon.
    println!("\ncongruence structure of 2^N:");
    for m in [3i64, 7, 10, 12] {
        let (pre, per) = pow2.congruence_period(&BigInt::from(m), 96)?;
        println!("  mod {m:>2}: preperiod {pre}, period {per}");
    }
    let (_, per7) = pow2.congruence_period(&BigInt::from(7), 96)?;
    assert_eq!(per7, 3); // 2^k mod 7 cycles 1, 2, 4

    // A custom three-term recurrence (tribonacci-like), declared the same
    // way a JSON predicate file would be.
    let trib = Predicate::recurrence(vec![1, 1, 1], vec![1, 2, 4])?;
    let row: Vec<String> = (0..8)
        .map(|i| trib.nth(i).map(|v| v.to_string()))
        .collect::<distal::Result<_>>()?;
    println!("\ncustom recurrence: {}", row.join(" "));

    // Growth-profile audit: the declared ratio limit is checked against a
    // finite window of consecutive-member ratios.
    let report = pow2.check_regular_window(96)?;
    println!(
        "\ngrowth audit of 2^N over 96 members: {:?} ({} ratios checked)",
        report.verdict,
        report.ratios.len()
    );
    assert!(matches!(report.verdict, RegularVerdict::Consistent));

    // Arithmetic subsequences restrict attention to every k-th member.
    let evens = SubPredicate::new(pow2, 0, 2)?;
    let row: Vec<String> = (0..6)
        .map(|i| evens.nth(i).map(|v| v.to_string()))
        .collect::<distal::Result<_>>()?;
    println!("even-index subsequence of 2^N: {}", row.join(" "));
    assert_eq!(evens.nth(1)?, BigInt::from(4));

    Ok(())
}
