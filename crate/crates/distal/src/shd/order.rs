//! Base systems for conjunctions of affine inequalities: the Presburger
//! order case. Each atom with a nonzero coefficient on the point variable
//! contributes a literal pair (the atom and its negation); candidates pin
//! the point with one literal per slot on up to two slots. Congruence
//! atoms in the point variable alone are copied into every candidate in
//! both polarities.

use super::{param_var, slot_var, Candidate, ParamFormula, Provenance, System};
use crate::error::{Error, Result};
use crate::formula::{Formula, Term};
use crate::normal::LinExpr;
use num_traits::Zero;
use std::collections::HashSet;

struct Atoms {
    /// Affine atoms in x and the parameters; each yields (atom, ¬atom).
    lits: Vec<(Formula, Formula)>,
    /// x-only congruence atoms, instantiated in both polarities.
    congruences: Vec<Formula>,
}

fn collect_atoms(formula: &Formula, out: &mut Atoms) -> Result<()> {
    match formula {
        Formula::True | Formula::False => Ok(()),
        Formula::And(fs) => {
            for f in fs {
                collect_atoms(f, out)?;
            }
            Ok(())
        }
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Cmp { op, lhs, rhs } => {
                collect_atoms(&Formula::cmp(op.negate(), lhs.clone(), rhs.clone()), out)
            }
            Formula::Congruence { .. } => collect_atoms(inner, out),
            _ => Err(Error::NotAffine(
                "only atoms may be negated in the order fragment".into(),
            )),
        },
        Formula::Cmp { lhs, rhs, .. } => {
            let expr = LinExpr::from_term(&lhs.clone().sub(rhs.clone()))?;
            let x_coeff = expr.coeffs.get("x").cloned().unwrap_or_else(BigInt::zero);
            if x_coeff.is_zero() {
                // Constant in x for each parameter tuple: such atoms shift
                // which types occur but never where the type changes, so
                // they place no boundary.
                return Ok(());
            }
            out.lits.push((
                formula.clone(),
                match formula {
                    Formula::Cmp { op, lhs, rhs } => {
                        Formula::cmp(op.negate(), lhs.clone(), rhs.clone())
                    }
                    _ => unreachable!(),
                },
            ));
            Ok(())
        }
        Formula::Congruence { t, .. } => {
            let expr = LinExpr::from_term(t)?;
            if expr.coeffs.keys().any(|v| v != "x") {
                return Err(Error::Precondition(
                    "congruence atoms in the order fragment must involve only x".into(),
                ));
            }
            out.congruences.push(formula.clone());
            Ok(())
        }
        Formula::Or(_) | Formula::InSub { .. } | Formula::BoundedExists { .. } => Err(
            Error::NotAffine("the order fragment is a conjunction of affine atoms".into()),
        ),
    }
}

use num_bigint::BigInt;

/// Rename the parameter variables of an atom onto a slot.
fn at_slot(atom: &Formula, param_len: usize, slot: usize) -> Formula {
    let mut f = atom.clone();
    for j in 1..=param_len {
        f = f.subst(&param_var(j), &Term::var(slot_var(slot, j)));
    }
    f
}

/// Build the order-base system for a conjunction of affine atoms.
pub fn order_shd(phi: &ParamFormula) -> Result<System> {
    let mut atoms = Atoms {
        lits: Vec::new(),
        congruences: Vec::new(),
    };
    collect_atoms(&phi.formula, &mut atoms)?;

    // One literal list per slot: each entry is the atom or its negation.
    let mut slot_lits: Vec<Vec<Formula>> = vec![Vec::new(), Vec::new()];
    for (pos, neg) in &atoms.lits {
        for (slot, bucket) in slot_lits.iter_mut().enumerate() {
            bucket.push(at_slot(pos, phi.param_len, slot + 1));
            bucket.push(at_slot(neg, phi.param_len, slot + 1));
        }
    }

    let combos: Vec<Vec<Formula>> = (0..1usize << atoms.congruences.len())
        .map(|mask| {
            atoms
                .congruences
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if mask & (1 << i) == 0 {
                        c.clone()
                    } else {
                        Formula::not(c.clone())
                    }
                })
                .collect()
        })
        .collect();

    let mut candidates = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |candidates: &mut Vec<Candidate>, formula: Formula, slots: usize| {
        let key = serde_json::to_string(&formula).expect("formulas serialize");
        if seen.insert((key, slots)) {
            candidates.push(Candidate {
                formula,
                slots,
                param_len: phi.param_len,
            });
        }
    };

    for combo in &combos {
        for first in &slot_lits[0] {
            for second in &slot_lits[1] {
                let mut parts = vec![first.clone(), second.clone()];
                parts.extend(combo.iter().cloned());
                push(&mut candidates, Formula::and(parts), 2);
            }
        }
    }
    for combo in &combos {
        for first in &slot_lits[0] {
            let mut parts = vec![first.clone()];
            parts.extend(combo.iter().cloned());
            push(&mut candidates, Formula::and(parts), 1);
        }
    }
    for combo in &combos {
        push(&mut candidates, Formula::and(combo.clone()), 0);
    }

    System::new(candidates, Provenance::OrderBase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{CmpOp, EvalContext};
    use crate::predicate::{Predicate, SubPredicate};
    use crate::shd::verify_shd;

    fn ctx() -> EvalContext {
        EvalContext::new(SubPredicate::full(Predicate::power(2)), 64)
    }

    fn singles(vals: &[i64]) -> Vec<Vec<BigInt>> {
        vals.iter().map(|&v| vec![BigInt::from(v)]).collect()
    }

    #[test]
    fn strict_order_system_contains_the_classic_candidates() {
        let phi = ParamFormula::new(Formula::lt(Term::var("x"), Term::var("y1")), 1).unwrap();
        let system = order_shd(&phi).unwrap();
        // One atom: 4 two-sided, 2 one-sided, 1 bare.
        assert_eq!(system.candidates.len(), 7);
        let interval = Formula::and(vec![
            Formula::cmp(CmpOp::Ge, Term::var("x"), Term::var("p1_1")),
            Formula::lt(Term::var("x"), Term::var("p2_1")),
        ]);
        assert!(system.candidates.iter().any(|c| c.formula == interval));
        let report = verify_shd(
            &ctx(),
            &phi,
            &system,
            &singles(&[3, 7]),
            (0, 10),
            (0, 10),
        )
        .unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn interval_family_verifies() {
        // x > y1 ∧ x < y2 with a two-component parameter.
        let phi = ParamFormula::new(
            Formula::and(vec![
                Formula::gt(Term::var("x"), Term::var("y1")),
                Formula::lt(Term::var("x"), Term::var("y2")),
            ]),
            2,
        )
        .unwrap();
        let system = order_shd(&phi).unwrap();
        let pool = vec![
            vec![BigInt::from(-4), BigInt::from(5)],
            vec![BigInt::from(2), BigInt::from(11)],
            vec![BigInt::from(6), BigInt::from(7)],
        ];
        let report = verify_shd(&ctx(), &phi, &system, &pool, (-20, 20), (-20, 20)).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn parameter_free_congruence_pins_by_residue() {
        let phi = ParamFormula::new(
            Formula::Congruence {
                t: Term::var("x"),
                residue: BigInt::from(0),
                modulus: BigInt::from(2),
            },
            1,
        )
        .unwrap();
        let system = order_shd(&phi).unwrap();
        // No boundary atoms: both polarities of the congruence, slot-free.
        assert_eq!(system.candidates.len(), 2);
        let report = verify_shd(&ctx(), &phi, &system, &singles(&[3, 7]), (0, 12), (0, 12)).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn mixed_atoms_with_congruence_verify() {
        let phi = ParamFormula::new(
            Formula::and(vec![
                Formula::lt(Term::var("x"), Term::var("y1")),
                Formula::Congruence {
                    t: Term::var("x"),
                    residue: BigInt::from(1),
                    modulus: BigInt::from(3),
                },
            ]),
            1,
        )
        .unwrap();
        let system = order_shd(&phi).unwrap();
        let report =
            verify_shd(&ctx(), &phi, &system, &singles(&[-2, 4, 9]), (-15, 15), (-15, 15)).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn parametric_congruences_are_rejected() {
        let phi = ParamFormula::new(
            Formula::Congruence {
                t: Term::var("x").add(Term::var("y1")),
                residue: BigInt::from(0),
                modulus: BigInt::from(2),
            },
            1,
        )
        .unwrap();
        assert!(matches!(order_shd(&phi), Err(Error::Precondition(_))));
    }

    #[test]
    fn membership_atoms_are_rejected() {
        let phi = ParamFormula::new(
            Formula::InSub {
                t: Term::var("x"),
                allow_neg_inf: false,
                allow_pos_inf: false,
            },
            1,
        )
        .unwrap();
        assert!(matches!(order_shd(&phi), Err(Error::NotAffine(_))));
    }
}
