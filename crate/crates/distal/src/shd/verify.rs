//! Brute-force window verifier and deterministic parameter selection.
//!
//! The verifier checks the defining property of a strong honest definition
//! over explicit finite windows: every point in the outer window must be
//! covered by some candidate and slot assignment that pins a single φ-type
//! across the entailment window. The same machinery, restricted to one
//! point, performs parameter selection inside the constructive builders.

use super::{canonical_pool, check_pool_width, slot_var, ParamFormula, System};
use crate::error::{Error, Result};
use crate::formula::{Env, EvalContext, Formula, Value};
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// φ-types over a parameter pool for every point of a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeTable {
    pub window: (i64, i64),
    /// One row per point, one bit per pool element, pool order.
    pub rows: Vec<Vec<bool>>,
}

impl TypeTable {
    /// Evaluate φ(a;b) for every a in the window and b in the pool.
    /// Points are independent, so rows are computed in parallel.
    pub fn build(
        ctx: &EvalContext,
        phi: &ParamFormula,
        pool: &[Vec<BigInt>],
        window: (i64, i64),
    ) -> Result<TypeTable> {
        check_window(window)?;
        let rows = (window.0..=window.1)
            .into_par_iter()
            .map(|a| {
                let a = BigInt::from(a);
                pool.iter().map(|b| phi.holds(ctx, &a, b)).collect()
            })
            .collect::<Result<Vec<Vec<bool>>>>()?;
        Ok(TypeTable { window, rows })
    }

    pub fn row(&self, a: i64) -> &Vec<bool> {
        &self.rows[(a - self.window.0) as usize]
    }
}

fn check_window(window: (i64, i64)) -> Result<()> {
    if window.0 > window.1 {
        return Err(Error::BadInput(format!(
            "window [{}, {}] is empty",
            window.0, window.1
        )));
    }
    Ok(())
}

/// Two entailment-window points that satisfy the same instantiated
/// candidate but carry different φ-types.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Breach {
    #[serde(with = "crate::jsonint::vec2")]
    pub params: Vec<Vec<BigInt>>,
    pub lhs: i64,
    pub rhs: i64,
}

/// Per-candidate failure detail for an uncovered point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateDiag {
    pub candidate: usize,
    /// Assignments whose instantiation the point satisfies.
    pub satisfied: usize,
    /// First satisfied assignment that pins two conflicting types.
    pub breach: Option<Breach>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Counterexample {
    pub a: i64,
    pub diagnostics: Vec<CandidateDiag>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pass: bool,
    pub wa: (i64, i64),
    pub wa2: (i64, i64),
    pub pool_size: usize,
    pub counterexample: Option<Counterexample>,
    /// Soundness caveat: entailment was checked over wa2 only, not ℤ.
    pub note: String,
}

/// Verify a system against φ over finite windows: every a in `wa` needs a
/// candidate ψ and assignment c from the pool with a ⊨ ψ(x;c) such that
/// all points of `wa2` satisfying ψ(x;c) share one φ-type over the pool.
pub fn verify_shd(
    ctx: &EvalContext,
    phi: &ParamFormula,
    system: &System,
    pool: &[Vec<BigInt>],
    wa: (i64, i64),
    wa2: (i64, i64),
) -> Result<VerifyReport> {
    check_window(wa)?;
    check_window(wa2)?;
    if system.param_len() != phi.param_len {
        return Err(Error::ArityMismatch {
            expected: phi.param_len,
            got: system.param_len(),
        });
    }
    let pool = canonical_pool(pool.to_vec());
    check_pool_width(&pool, phi.param_len)?;
    if pool.len() < 2 {
        return Err(Error::Precondition(
            "the verifier needs at least two distinct parameter tuples".into(),
        ));
    }

    let ty = TypeTable::build(ctx, phi, &pool, wa)?;
    let ty2 = if wa2 == wa {
        None
    } else {
        Some(TypeTable::build(ctx, phi, &pool, wa2)?)
    };
    let ty2_ref = ty2.as_ref().unwrap_or(&ty);

    let n_points = ty.rows.len();
    let mut covered = vec![false; n_points];
    let mut remaining = n_points;

    'outer: for cand in &system.candidates {
        let mut walker = AssignmentWalker::new(pool.len(), cand.slots);
        while let Some(assignment) = walker.next() {
            let scan = pin_scan(ctx, &cand.formula, cand.slots, &pool, assignment, ty2_ref)?;
            let pinned = match scan {
                PinScan::Conflict { .. } => continue,
                PinScan::Pinned(row) => Some(row),
                PinScan::Vacuous => None,
            };
            // The instantiation pins one type; cover every remaining
            // point that satisfies it and carries that type.
            let mut env = Env::new();
            bind_slots(&mut env, cand.slots, phi.param_len, &pool, assignment);
            for (idx, a) in (wa.0..=wa.1).enumerate() {
                if covered[idx] {
                    continue;
                }
                env.insert("x".into(), Value::Int(BigInt::from(a)));
                if !ctx.evaluate(&cand.formula, &env)? {
                    continue;
                }
                if pinned.map(|row| row == &ty.rows[idx]).unwrap_or(true) {
                    covered[idx] = true;
                    remaining -= 1;
                }
            }
            if remaining == 0 {
                break 'outer;
            }
        }
    }

    if remaining == 0 {
        return Ok(pass_report(wa, wa2, pool.len()));
    }
    let first = covered.iter().position(|c| !c).expect("remaining > 0");
    let a = wa.0 + first as i64;
    let diagnostics = diagnose(ctx, system, &pool, a, ty2_ref)?;
    Ok(VerifyReport {
        pass: false,
        wa,
        wa2,
        pool_size: pool.len(),
        counterexample: Some(Counterexample { a, diagnostics }),
        note: NOTE.into(),
    })
}

const NOTE: &str = "entailment checked over the stamped windows only";

fn pass_report(wa: (i64, i64), wa2: (i64, i64), pool_size: usize) -> VerifyReport {
    VerifyReport {
        pass: true,
        wa,
        wa2,
        pool_size,
        counterexample: None,
        note: NOTE.into(),
    }
}

enum PinScan<'a> {
    /// No entailment-window point satisfies the instantiation.
    Vacuous,
    /// All satisfying points share this type row.
    Pinned(&'a Vec<bool>),
    /// Two satisfying points disagree.
    Conflict { lhs: i64, rhs: i64 },
}

/// Scan the entailment window for points satisfying the instantiated
/// candidate, aborting at the first pair of conflicting types.
fn pin_scan<'a>(
    ctx: &EvalContext,
    formula: &Formula,
    slots: usize,
    pool: &[Vec<BigInt>],
    assignment: &[usize],
    ty2: &'a TypeTable,
) -> Result<PinScan<'a>> {
    let width = pool.first().map(|b| b.len()).unwrap_or(0);
    let mut env = Env::new();
    bind_slots(&mut env, slots, width, pool, assignment);
    let mut seen: Option<(i64, &Vec<bool>)> = None;
    for (idx, a) in (ty2.window.0..=ty2.window.1).enumerate() {
        env.insert("x".into(), Value::Int(BigInt::from(a)));
        if !ctx.evaluate(formula, &env)? {
            continue;
        }
        match seen {
            None => seen = Some((a, &ty2.rows[idx])),
            Some((first, row)) => {
                if row != &ty2.rows[idx] {
                    return Ok(PinScan::Conflict { lhs: first, rhs: a });
                }
            }
        }
    }
    Ok(match seen {
        None => PinScan::Vacuous,
        Some((_, row)) => PinScan::Pinned(row),
    })
}

fn bind_slots(
    env: &mut Env,
    slots: usize,
    width: usize,
    pool: &[Vec<BigInt>],
    assignment: &[usize],
) {
    for slot in 1..=slots {
        let tuple = &pool[assignment[slot - 1]];
        for j in 1..=width {
            env.insert(slot_var(slot, j), Value::Int(tuple[j - 1].clone()));
        }
    }
}

/// Odometer over pool indices, slot 1 most significant, so assignments
/// come out in lexicographic order of the substituted tuples.
struct AssignmentWalker {
    base: usize,
    digits: Vec<usize>,
    started: bool,
    done: bool,
}

impl AssignmentWalker {
    fn new(base: usize, slots: usize) -> AssignmentWalker {
        AssignmentWalker {
            base,
            digits: vec![0; slots],
            started: false,
            done: base == 0 && slots > 0,
        }
    }

    fn next(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.digits);
        }
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                return None;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.base {
                break;
            }
            self.digits[i] = 0;
        }
        Some(&self.digits)
    }
}

fn diagnose(
    ctx: &EvalContext,
    system: &System,
    pool: &[Vec<BigInt>],
    a: i64,
    ty2: &TypeTable,
) -> Result<Vec<CandidateDiag>> {
    let a_big = BigInt::from(a);
    let width = pool.first().map(|b| b.len()).unwrap_or(0);
    let mut out = Vec::new();
    for (ci, cand) in system.candidates.iter().enumerate() {
        let mut satisfied = 0usize;
        let mut breach = None;
        let mut walker = AssignmentWalker::new(pool.len(), cand.slots);
        while let Some(assignment) = walker.next() {
            let mut env = Env::new();
            bind_slots(&mut env, cand.slots, width, pool, assignment);
            env.insert("x".into(), Value::Int(a_big.clone()));
            if !ctx.evaluate(&cand.formula, &env)? {
                continue;
            }
            satisfied += 1;
            if breach.is_none() {
                if let PinScan::Conflict { lhs, rhs } =
                    pin_scan(ctx, &cand.formula, cand.slots, pool, assignment, ty2)?
                {
                    breach = Some(Breach {
                        params: assignment.iter().map(|&i| pool[i].clone()).collect(),
                        lhs,
                        rhs,
                    });
                }
            }
        }
        out.push(CandidateDiag {
            candidate: ci,
            satisfied,
            breach,
        });
    }
    Ok(out)
}

/// A chosen candidate and slot assignment.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Selection {
    pub candidate: usize,
    #[serde(with = "crate::jsonint::vec2")]
    pub params: Vec<Vec<BigInt>>,
}

/// Pick the first candidate and lexicographically smallest assignment
/// whose instantiation the point satisfies and which pins the point's own
/// φ-type across the window. The pool must already be canonical.
pub fn select_with_table(
    ctx: &EvalContext,
    system: &System,
    pool: &[Vec<BigInt>],
    point: &BigInt,
    point_ty: &[bool],
    table: &TypeTable,
) -> Result<Selection> {
    let width = pool.first().map(|b| b.len()).unwrap_or(0);
    for (ci, cand) in system.candidates.iter().enumerate() {
        let mut walker = AssignmentWalker::new(pool.len(), cand.slots);
        while let Some(assignment) = walker.next() {
            let mut env = Env::new();
            bind_slots(&mut env, cand.slots, width, pool, assignment);
            env.insert("x".into(), Value::Int(point.clone()));
            if !ctx.evaluate(&cand.formula, &env)? {
                continue;
            }
            // Every window point satisfying the instantiation must agree
            // with the point's own type.
            let mut ok = true;
            for (idx, a) in (table.window.0..=table.window.1).enumerate() {
                env.insert("x".into(), Value::Int(BigInt::from(a)));
                if ctx.evaluate(&cand.formula, &env)? && table.rows[idx] != point_ty {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Selection {
                    candidate: ci,
                    params: assignment.iter().map(|&i| pool[i].clone()).collect(),
                });
            }
        }
    }
    Err(Error::SelectionFailed(format!(
        "no candidate pins the type of {point} over the window"
    )))
}

/// Convenience wrapper: build the type table, compute the point's type
/// directly (the point may sit outside the window), then select.
pub fn select_shd(
    ctx: &EvalContext,
    phi: &ParamFormula,
    system: &System,
    pool: &[Vec<BigInt>],
    point: &BigInt,
    window: (i64, i64),
) -> Result<Selection> {
    let pool = canonical_pool(pool.to_vec());
    check_pool_width(&pool, phi.param_len)?;
    let point_ty = pool
        .iter()
        .map(|b| phi.holds(ctx, point, b))
        .collect::<Result<Vec<bool>>>()?;
    let table = TypeTable::build(ctx, phi, &pool, window)?;
    select_with_table(ctx, system, &pool, point, &point_ty, &table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Term;
    use crate::predicate::{Predicate, SubPredicate};
    use crate::shd::{Candidate, Provenance};

    fn ctx() -> EvalContext {
        EvalContext::new(SubPredicate::full(Predicate::power(2)), 64)
    }

    fn x_lt_y() -> ParamFormula {
        ParamFormula::new(Formula::lt(Term::var("x"), Term::var("y1")), 1).unwrap()
    }

    /// The order system for x < y written out by hand: pin x between two
    /// parameters, or one-sidedly against a single parameter.
    fn hand_system() -> System {
        let between = Candidate {
            formula: Formula::and(vec![
                Formula::le(Term::var("p1_1"), Term::var("x")),
                Formula::lt(Term::var("x"), Term::var("p2_1")),
            ]),
            slots: 2,
            param_len: 1,
        };
        let below = Candidate {
            formula: Formula::lt(Term::var("x"), Term::var("p1_1")),
            slots: 1,
            param_len: 1,
        };
        let above = Candidate {
            formula: Formula::le(Term::var("p1_1"), Term::var("x")),
            slots: 1,
            param_len: 1,
        };
        System::new(vec![between, below, above], Provenance::UserSupplied).unwrap()
    }

    fn singles(vals: &[i64]) -> Vec<Vec<BigInt>> {
        vals.iter().map(|&v| vec![BigInt::from(v)]).collect()
    }

    #[test]
    fn order_system_passes_on_window() {
        let ctx = ctx();
        let report = verify_shd(
            &ctx,
            &x_lt_y(),
            &hand_system(),
            &singles(&[3, 7]),
            (0, 10),
            (0, 10),
        )
        .unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn constant_candidate_cannot_pin() {
        let ctx = ctx();
        let top = System::new(vec![Candidate::top(1)], Provenance::UserSupplied).unwrap();
        let report = verify_shd(&ctx, &x_lt_y(), &top, &singles(&[3, 7]), (0, 10), (0, 10)).unwrap();
        assert!(!report.pass);
        let cex = report.counterexample.unwrap();
        assert_eq!(cex.a, 0);
        let diag = &cex.diagnostics[0];
        assert_eq!(diag.satisfied, 1);
        let breach = diag.breach.as_ref().unwrap();
        assert!(breach.lhs < breach.rhs);
    }

    #[test]
    fn needs_two_parameters() {
        let ctx = ctx();
        let err = verify_shd(&ctx, &x_lt_y(), &hand_system(), &singles(&[3]), (0, 4), (0, 4));
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn selection_prefers_lexicographically_smallest() {
        let ctx = ctx();
        let pool = singles(&[3, 7]);
        let sel = select_shd(
            &ctx,
            &x_lt_y(),
            &hand_system(),
            &pool,
            &BigInt::from(5),
            (0, 10),
        )
        .unwrap();
        // Candidate 0 with params (3, 7) pins [3,7) with type (false, true).
        assert_eq!(sel.candidate, 0);
        assert_eq!(sel.params, vec![vec![BigInt::from(3)], vec![BigInt::from(7)]]);
    }

    #[test]
    fn selection_handles_points_outside_window() {
        let ctx = ctx();
        let pool = singles(&[3, 7]);
        let sel = select_shd(
            &ctx,
            &x_lt_y(),
            &hand_system(),
            &pool,
            &BigInt::from(-50),
            (0, 10),
        )
        .unwrap();
        // Below both parameters: the one-sided candidate x < p1_1 with the
        // smaller parameter pins the all-true type (window points 0..3).
        assert_eq!(sel.candidate, 1);
        assert_eq!(sel.params, vec![vec![BigInt::from(3)]]);
    }
}
