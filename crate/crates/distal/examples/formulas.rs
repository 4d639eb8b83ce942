//! The bounded formula language and atom normalization.
//!
//! Formulas combine linear terms, member-successor shifts, extremal-tuple
//! coordinates, congruences, membership atoms, and bounded quantifiers.
//! They can be built as Rust trees, parsed from s-expressions, or read
//! from their JSON form. Run with `cargo run --example formulas`.

use distal::formula::{CmpOp, EvalContext, Formula, SpaceSpec, Term};
use distal::normal::normalize_atoms;
use distal::predicate::{Predicate, SubPredicate};
use distal::sexpr::{parse_formula, parse_term};
use num_bigint::BigInt;

fn main() -> distal::Result<()> {
    let ctx = EvalContext::new(SubPredicate::full(Predicate::power(2)), 96);

    // Terms: affine combinations, shifts, extremal coordinates.
    let t = parse_term("(+ (sigma 2 x) (* 3 y1) -5)")?;
    let mut env = std::collections::BTreeMap::new();
    env.insert("x".to_string(), BigInt::from(8));
    env.insert("y1".to_string(), BigInt::from(2));
    println!("sigma^2(8) + 3*2 - 5 = {}", ctx.eval_term(&t, &env)?);
    assert_eq!(ctx.eval_term(&t, &env)?, BigInt::from(33));

    // The same term built directly.
    let built = Term::sigma(2, Term::var("x"))
        .add(Term::scale(BigInt::from(3), Term::var("y1")))
        .add(Term::int(-5));
    assert_eq!(ctx.eval_term(&built, &env)?, BigInt::from(33));

    // An extremal coordinate inside a term: the first coordinate of the
    // gap-2 triple whose (1,2,4)-dot value sits just below x.
    let p1 = parse_term("(p 1 (ops (1) (2) (4)) (space 0 1 3 2) x)")?;
    for (x, want) in [(47i64, 32i64), (53, 32), (100, 64)] {
        env.insert("x".to_string(), BigInt::from(x));
        let v = ctx.eval_term(&p1, &env)?;
        println!("P1({x}) = {v}");
        assert_eq!(v, BigInt::from(want));
    }

    // Formulas: comparisons, congruences, membership, bounded quantifiers.
    let phi = parse_formula(
        "(and (cong x 0 4)           ; x = 0 mod 4
              (in x)                 ; x a member
              (exists (w) (space 0 1 1 1) 64
                (= (+ w w) x)))      ; some member doubles to x",
    )?;
    println!("\nx = 0 mod 4, member, twice a member:");
    for x in [8i64, 16, 4, 2] {
        env.insert("x".to_string(), BigInt::from(x));
        println!("  x = {x:>2}: {}", ctx.evaluate(&phi, &env)?);
    }
    env.insert("x".to_string(), BigInt::from(8));
    assert!(ctx.evaluate(&phi, &env)?);
    env.insert("x".to_string(), BigInt::from(2));
    assert!(!ctx.evaluate(&phi, &env)?); // 2 is not 0 mod 4

    // Atom normalization rewrites every comparison into  t > 0  or
    // t = 0 shapes with affine left-hand sides, the form the honest
    // definition machinery consumes.
    let raw = Formula::cmp(
        CmpOp::Le,
        Term::var("x").add(Term::int(3)),
        Term::scale(BigInt::from(2), Term::var("y1")),
    );
    let normal = normalize_atoms(&raw)?;
    println!("\nx + 3 <= 2 y1 normalizes to: {}", serde_json::to_string(&normal.to_formula())?);

    // Membership atoms restricted to a subsequence: even-index members of
    // 2^N are the powers 4^k.
    let even = SpaceSpec::new(0, 2, 1, 1);
    let phi = Formula::exists(
        vec!["w".into()],
        even,
        Some(BigInt::from(1_000_000)),
        Formula::cmp(CmpOp::Eq, Term::var("w"), Term::var("x")),
    );
    let hits: Vec<i64> = [1i64, 2, 4, 8, 16, 64]
        .into_iter()
        .filter(|&x| {
            env.insert("x".to_string(), BigInt::from(x));
            ctx.evaluate(&phi, &env).unwrap()
        })
        .collect();
    println!("powers of four among 1,2,4,8,16,64: {hits:?}");
    assert_eq!(hits, vec![1, 4, 16, 64]);

    // Round trip: the JSON AST is the canonical interchange form.
    let json = serde_json::to_string(&phi)?;
    let back: Formula = serde_json::from_str(&json)?;
    assert_eq!(serde_json::to_string(&back)?, json);
    println!("\nJSON round trip preserved {} bytes", json.len());

    Ok(())
}
