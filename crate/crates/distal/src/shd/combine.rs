//! Collapse a multi-candidate system into one formula.
//!
//! Each candidate ψᵢ gets its own block of slots plus a pair of guard
//! slots u⁽ⁱ⁾, v⁽ⁱ⁾; the combined formula is ⋁ᵢ (u⁽ⁱ⁾ = v⁽ⁱ⁾ ∧ ψᵢ).
//! A selection that used ψᵢ sets that block's guards equal and the other
//! blocks' guards unequal, which needs at least two distinct parameters
//! available. Verification is therefore preserved whenever |B| ≥ 2.

use super::{slot_var, Candidate, System};
use crate::error::Result;
use crate::formula::{Formula, Term};

/// Rename local slots 1..=k to offset+1..=offset+k. Two-phase through
/// fresh names so overlapping source and target ranges cannot cascade.
fn remap_slots(f: &Formula, slots: usize, param_len: usize, offset: usize) -> Formula {
    let tmp = |s: usize, j: usize| format!("__blk{s}_{j}");
    let mut g = f.clone();
    for s in 1..=slots {
        for j in 1..=param_len {
            g = g.subst(&slot_var(s, j), &Term::var(tmp(s, j)));
        }
    }
    for s in 1..=slots {
        for j in 1..=param_len {
            g = g.subst(&tmp(s, j), &Term::var(slot_var(offset + s, j)));
        }
    }
    g
}

/// Build the single combined candidate. Slot count is Σᵢ(kᵢ + 2); the
/// guard slots of block i sit right after its candidate slots.
pub fn combine_system(system: &System) -> Result<Candidate> {
    let m = system.param_len();
    let mut disjuncts = Vec::new();
    let mut offset = 0usize;
    for cand in &system.candidates {
        let body = remap_slots(&cand.formula, cand.slots, m, offset);
        let u = offset + cand.slots + 1;
        let v = offset + cand.slots + 2;
        let mut conj: Vec<Formula> = (1..=m)
            .map(|j| Formula::eq(Term::var(slot_var(u, j)), Term::var(slot_var(v, j))))
            .collect();
        conj.push(body);
        disjuncts.push(Formula::and(conj));
        offset = v;
    }
    Ok(Candidate {
        formula: Formula::or(disjuncts),
        slots: offset,
        param_len: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{CmpOp, EvalContext};
    use crate::predicate::{Predicate, SubPredicate};
    use crate::shd::{verify_shd, ParamFormula, Provenance};
    use num_bigint::BigInt;

    fn lt(l: Term, r: Term) -> Formula {
        Formula::cmp(CmpOp::Lt, l, r)
    }

    fn interval_cover_system() -> System {
        // The three candidates that cover x<y over any parameter set:
        // y⁽¹⁾ ≤ x ∧ x < y⁽²⁾, x < y⁽¹⁾, y⁽¹⁾ ≤ x.
        let x = Term::var("x");
        System::new(
            vec![
                Candidate {
                    formula: Formula::and(vec![
                        Formula::le(Term::var(slot_var(1, 1)), x.clone()),
                        lt(x.clone(), Term::var(slot_var(2, 1))),
                    ]),
                    slots: 2,
                    param_len: 1,
                },
                Candidate {
                    formula: lt(x.clone(), Term::var(slot_var(1, 1))),
                    slots: 1,
                    param_len: 1,
                },
                Candidate {
                    formula: Formula::le(Term::var(slot_var(1, 1)), x),
                    slots: 1,
                    param_len: 1,
                },
            ],
            Provenance::UserSupplied,
        )
        .unwrap()
    }

    #[test]
    fn singleton_gains_two_guard_slots() {
        let sys = System::new(
            vec![Candidate {
                formula: Formula::and(vec![
                    Formula::le(Term::var(slot_var(1, 1)), Term::var("x")),
                    lt(Term::var("x"), Term::var(slot_var(2, 1))),
                ]),
                slots: 2,
                param_len: 1,
            }],
            Provenance::UserSupplied,
        )
        .unwrap();
        let combined = combine_system(&sys).unwrap();
        assert_eq!(combined.slots, 4);
        assert_eq!(combined.param_len, 1);
    }

    #[test]
    fn two_candidates_give_double_plus_four() {
        let sys = System::new(
            vec![
                Candidate {
                    formula: lt(Term::var("x"), Term::var(slot_var(1, 1))),
                    slots: 1,
                    param_len: 1,
                },
                Candidate {
                    formula: Formula::le(Term::var(slot_var(1, 1)), Term::var("x")),
                    slots: 1,
                    param_len: 1,
                },
            ],
            Provenance::UserSupplied,
        )
        .unwrap();
        let combined = combine_system(&sys).unwrap();
        assert_eq!(combined.slots, 6);
    }

    #[test]
    fn block_renaming_does_not_cascade() {
        // Second block's local p1/p2 must land on p5/p6, untouched by the
        // first block's renames.
        let sys = interval_cover_system();
        let combined = combine_system(&sys).unwrap();
        let text = serde_json::to_string(&combined.formula).unwrap();
        for var in ["p1_1", "p2_1", "p3_1", "p4_1", "p5_1", "p6_1", "p7_1", "p8_1"] {
            assert!(text.contains(var), "missing {var} in {text}");
        }
        assert!(!text.contains("__blk"), "temp names leaked: {text}");
    }

    #[test]
    fn combined_formula_still_verifies() {
        let ctx = EvalContext::new(SubPredicate::full(Predicate::power(2)), 40);
        let phi = ParamFormula::new(lt(Term::var("x"), Term::var("y1")), 1).unwrap();
        let pool: Vec<Vec<BigInt>> = vec![vec![BigInt::from(3)], vec![BigInt::from(7)]];
        let sys = interval_cover_system();
        let base = verify_shd(&ctx, &phi, &sys, &pool, (0, 10), (0, 10)).unwrap();
        assert!(base.pass);
        let combined =
            System::new(vec![combine_system(&sys).unwrap()], Provenance::UserSupplied).unwrap();
        let report = verify_shd(&ctx, &phi, &combined, &pool, (0, 10), (0, 10)).unwrap();
        assert!(report.pass, "{report:?}");
    }
}
