//! Shift polynomials, sign certificates, and growth witnesses.
//!
//! An operator A = sum a_i sigma^i sends a member z to sum a_i sigma^i(z),
//! where sigma is the member-successor map. Run with
//! `cargo run --example operators`.

use distal::operator::{beats_witness, innocuous_lambda, s2_witness, Cert, Operator, Sign};
use distal::predicate::{Predicate, SubPredicate};
use num_bigint::BigInt;

fn main() -> distal::Result<()> {
    let pow2 = SubPredicate::full(Predicate::power(2));
    let fib = SubPredicate::full(Predicate::fibonacci());

    // sigma - 2*sigma^0 annihilates 2^N: sigma(z) = 2z for every power.
    let doubling_gap = Operator::new(vec![BigInt::from(-2), BigInt::from(1)]);
    println!("(sigma - 2) on 2^N:");
    for z in [1i64, 8, 1024] {
        let v = doubling_gap.apply(&pow2, &BigInt::from(z))?;
        println!("  z = {z:>5}: {v}");
        assert_eq!(v, BigInt::from(0));
    }
    let class = doubling_gap.sign_classify(&pow2, 96)?;
    println!("  eventual sign: {:?} ({:?})", class.sign, class.cert);
    assert_eq!(class.sign, Sign::Zero);
    assert_eq!(class.cert, Cert::Exact);

    // The Fibonacci recurrence makes sigma^2 - sigma - 1 vanish on the
    // shifted tail; exact classification sees through the window.
    let fib_rec = Operator::new(vec![
        BigInt::from(-1),
        BigInt::from(-1),
        BigInt::from(1),
    ]);
    let class = fib_rec.sign_classify(&fib, 96)?;
    println!("(sigma^2 - sigma - 1) on fibonacci: {:?}", class.sign);
    assert_eq!(class.sign, Sign::Zero);

    // A strictly positive residual classifies positive.
    let growth = Operator::new(vec![BigInt::from(-1), BigInt::from(1)]);
    let class = growth.sign_classify(&pow2, 96)?;
    println!("(sigma - 1) on 2^N: {:?}", class.sign);
    assert_eq!(class.sign, Sign::Positive);

    // Growth witnesses, each the least shift count with the stated
    // property across the audited window and certified beyond it when the
    // growth profile allows.
    //
    // s2: A(sigma^s z) > 2 A(z) for all later members.
    let w = s2_witness(&growth, &pow2, 96, 64)?;
    println!("\ns2 witness for (sigma - 1) on 2^N: {}", w.value);
    assert_eq!(w.value, 1);

    // beats: A(sigma^s z) > B(z).
    let one = Operator::new(vec![BigInt::from(1)]);
    let four = Operator::new(vec![BigInt::from(4)]);
    let w = beats_witness(&one, &four, &pow2, 96, 64)?;
    println!("shift for z to beat 4z on 2^N: {}", w.value);
    assert_eq!(w.value, 3); // 8z > 4z, while 4z = 4z fails strictness

    // innocuous lambda: sigma^l z dominates d consecutive A1-images.
    let w = innocuous_lambda(&one, &pow2, 96, 64)?;
    println!("innocuous shift constant for identity on 2^N: {}", w.value);
    assert_eq!(w.value, 5);

    // The same witness is heavier on Fibonacci because consecutive members
    // grow by the golden ratio rather than doubling.
    let w = innocuous_lambda(&one, &fib, 96, 64)?;
    println!("innocuous shift constant for identity on fibonacci: {}", w.value);

    Ok(())
}
