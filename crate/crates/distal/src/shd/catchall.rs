//! The pivot construction: given definitions for θ(x;y) and its shifted
//! form θ′(x;w,y) = θ(x−w;y), build a point-and-parameter-set definition
//! for φ(x;w,y) := θ(E·x − f(P¹_Δ(x−w;𝐀)); y).
//!
//! For a fixed point x₀ and parameter set S of (b,a) pairs, the output
//! formula ψ pins x₀'s φ-type over S. Far below every dot value the
//! extremal coordinate is frozen at its floor (guard branch); otherwise a
//! pivot u ∈ {b} splits S into parameters whose extremal coordinate
//! tracks x (handled through γ-selections and strata equalities) and
//! parameters where it is a constant multiple of P¹(u−b) (handled through
//! the shifted system ζ and the α-definitions ξ^ε).
//!
//! Every concrete number in ψ that came from S is also lifted to a slot,
//! yielding a reusable candidate template plus the slot assignment that
//! reproduces ψ.

use super::{
    firstcoord::{xi_phi, xi_system},
    select_shd, slot_var, Candidate, ParamFormula, Selection, System,
};
use crate::error::{Error, Result};
use crate::formula::{EvalContext, Formula, SpaceSpec, Term};
use crate::operator::{innocuous_lambda, OperatorTuple, Sign};
use crate::pdelta::p_delta;
use crate::tuplespace::Extremum;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

/// Static data shared by every (x₀;S) instance of one φ family.
pub struct CatchallInput<'a> {
    pub theta_phi: &'a ParamFormula,
    pub theta_sys: &'a System,
    pub theta2_phi: &'a ParamFormula,
    pub theta2_sys: &'a System,
    pub e_mult: BigInt,
    pub ops: &'a OperatorTuple,
    pub space: &'a SpaceSpec,
    pub f_name: &'a str,
    pub max_lambda: usize,
    /// Window over which sub-selections certify entailment.
    pub window: (i64, i64),
}

/// One element of the shifted parameter set T, with the origin that
/// produced it. `boundary` records that P¹(u−b) fell back to the least
/// tuple because u−b cleared the whole dot range.
#[derive(Clone, Debug, Serialize)]
pub struct TOrigin {
    #[serde(with = "crate::jsonint")]
    pub b: BigInt,
    #[serde(with = "crate::jsonint::vec")]
    pub a: Vec<BigInt>,
    pub epsilon: usize,
    #[serde(with = "crate::jsonint")]
    pub value: BigInt,
    pub boundary: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum Branch {
    /// x₀ at or below every dot value plus the least b: the extremal
    /// coordinate is pinned to `boundary_value` throughout.
    Guard {
        #[serde(with = "crate::jsonint")]
        cut: BigInt,
        #[serde(with = "crate::jsonint")]
        boundary_value: BigInt,
    },
    Main {
        #[serde(with = "crate::jsonint")]
        u: BigInt,
        #[serde(with = "crate::jsonint::opt")]
        k_lo: Option<BigInt>,
        #[serde(with = "crate::jsonint::opt")]
        k_hi: Option<BigInt>,
        #[serde(with = "crate::jsonint::opt")]
        k_point: Option<BigInt>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct LabeledSelection {
    pub label: String,
    pub selection: Selection,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stratum {
    pub delta: usize,
    #[serde(with = "crate::jsonint")]
    pub lo: BigInt,
    #[serde(with = "crate::jsonint")]
    pub hi: BigInt,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatchallWitness {
    pub branch: Branch,
    pub lambda: usize,
    pub t_set: Vec<TOrigin>,
    pub selections: Vec<LabeledSelection>,
    pub strata: Vec<Stratum>,
    /// The concrete definition for this (x₀;S) instance.
    pub psi: Formula,
    /// ψ with every S-derived number lifted to a slot.
    pub template: Candidate,
    /// S-elements backing the template slots, flattened as (b, a…).
    #[serde(with = "crate::jsonint::vec2")]
    pub assignment: Vec<Vec<BigInt>>,
    pub window: (i64, i64),
}

/// First-use slot numbering over canonical S indices.
struct SlotTracker {
    used: Vec<usize>,
}

impl SlotTracker {
    fn new() -> Self {
        SlotTracker { used: Vec::new() }
    }
    fn slot(&mut self, s_idx: usize) -> usize {
        if let Some(pos) = self.used.iter().position(|&i| i == s_idx) {
            pos + 1
        } else {
            self.used.push(s_idx);
            self.used.len()
        }
    }
}

fn label_err(label: &str, e: Error) -> Error {
    match e {
        Error::SelectionFailed(msg) => Error::SelectionFailed(format!("{label}: {msg}")),
        other => other,
    }
}

/// Substitute a candidate's slot variables by arbitrary terms, renaming
/// through fresh names first so the shared p{i}_{j} namespace cannot
/// cascade into the replacements.
fn instantiate(cand: &Candidate, params: &[Vec<Term>]) -> Formula {
    let tmp = |s: usize, j: usize| format!("__loc{s}_{j}");
    let mut g = cand.formula.clone();
    for s in 1..=cand.slots {
        for j in 1..=cand.param_len {
            g = g.subst(&slot_var(s, j), &Term::var(tmp(s, j)));
        }
    }
    for s in 1..=cand.slots {
        for j in 1..=cand.param_len {
            g = g.subst(&tmp(s, j), &params[s - 1][j - 1]);
        }
    }
    g
}

/// Build the (x₀;S) definition, its slot template, and the assignment.
pub fn catchall_construct(
    ctx: &EvalContext,
    input: &CatchallInput,
    x0: &BigInt,
    s_set: &[(BigInt, Vec<BigInt>)],
) -> Result<CatchallWitness> {
    let m = input.theta_phi.param_len;
    if input.theta2_phi.param_len != m + 1 {
        return Err(Error::ArityMismatch {
            expected: m + 1,
            got: input.theta2_phi.param_len,
        });
    }
    for op in input.ops.iter() {
        if op.is_zero() {
            return Err(Error::ZeroOperator);
        }
    }
    let mut s_canon: Vec<(BigInt, Vec<BigInt>)> = s_set.to_vec();
    s_canon.sort();
    s_canon.dedup();
    if s_canon.len() < 2 {
        return Err(Error::Precondition(
            "the construction needs at least two distinct (b,a) parameters".into(),
        ));
    }
    for (_, a) in &s_canon {
        if a.len() != m {
            return Err(Error::ArityMismatch {
                expected: m,
                got: a.len(),
            });
        }
    }

    let ts = ctx.space(input.space)?;
    let horizon = ctx.horizon();
    let rec = ts.ensure_cert(input.ops, horizon)?;
    if rec.signs[0].sign != Sign::Positive {
        return Err(Error::Precondition(
            "the construction is built for a positive leading sign".into(),
        ));
    }
    let sub = ts.sub();
    let base = sub.base();
    let n = ts.arity();
    let free = vec![(None, None); n];
    let inf_dot = match ts.extreme(input.ops, &rec.signs, false, &free)? {
        Extremum::Tuple { value, .. } => value,
        other => {
            return Err(Error::Precondition(format!(
                "least dot value is {other:?}; the gap certificate does not control the tail"
            )))
        }
    };
    let sup_dot = match ts.extreme(input.ops, &rec.signs, true, &free)? {
        Extremum::Tuple { value, .. } => Some(value),
        Extremum::Unbounded => None,
        Extremum::Infeasible => {
            return Err(Error::Precondition("empty tuple space".into()));
        }
    };
    let lambda = innocuous_lambda(input.ops.first(), sub, horizon, input.max_lambda)?.value;
    let bv = sub.nth((n - 1) * ts.gap())?;
    let e = &input.e_mult;
    let ex0 = e * x0;

    let p1 = |arg: Term| Term::PComp {
        coord: 1,
        ops: input.ops.clone(),
        space: input.space.clone(),
        arg: Box::new(arg),
    };
    let f_of = |v: &BigInt| ctx.apply_fn(input.f_name, v);
    let shift_member = |v: &BigInt, k: usize| -> Result<BigInt> {
        let idx = base.index_of(v)?.ok_or_else(|| Error::NotAMember(v.clone()))?;
        base.nth(idx + k)
    };

    // The y-parts of S, deduplicated in canonical order, with origins.
    let mut a_tagged: Vec<(Vec<BigInt>, usize)> = s_canon
        .iter()
        .enumerate()
        .map(|(i, (_, a))| (a.clone(), i))
        .collect();
    a_tagged.sort();
    a_tagged.dedup_by(|x, y| x.0 == y.0);
    let a_pool: Vec<Vec<BigInt>> = a_tagged.iter().map(|(v, _)| v.clone()).collect();
    let find_a = |value: &[BigInt]| -> usize {
        a_tagged
            .iter()
            .find(|(v, _)| v.as_slice() == value)
            .expect("selected parameter comes from the pool")
            .1
    };

    let mut tracker = SlotTracker::new();
    let mut selections = Vec::new();
    let slot_b = |slot: usize| Term::var(slot_var(slot, 1));
    let slot_a_terms =
        |slot: usize| -> Vec<Term> { (1..=m).map(|j| Term::var(slot_var(slot, 1 + j))).collect() };

    let min_b = s_canon[0].0.clone();
    let cut = &inf_dot + &min_b;
    if x0 <= &cut {
        // Guard branch: every P¹(x−b) is frozen at the floor value, so θ
        // at the shifted point decides everything; one selection over the
        // y-parts pins the type.
        let fbv = f_of(&bv)?;
        let point = &ex0 - &fbv;
        let sel = select_shd(
            ctx,
            input.theta_phi,
            input.theta_sys,
            &a_pool,
            &point,
            input.window,
        )
        .map_err(|err| label_err("guard-branch selection over the y-parts", err))?;
        let cut_slot = tracker.slot(0);
        let k_formula = Formula::le(
            Term::var("x"),
            Term::Affine {
                terms: vec![(BigInt::from(1), slot_b(cut_slot))],
                constant: inf_dot.clone(),
            },
        );
        let cand = &input.theta_sys.candidates[sel.candidate];
        let params: Vec<Vec<Term>> = sel
            .params
            .iter()
            .map(|pv| slot_a_terms(tracker.slot(find_a(pv))))
            .collect();
        let gamma = instantiate(cand, &params).subst(
            "x",
            &Term::Affine {
                terms: vec![(e.clone(), Term::var("x"))],
                constant: -fbv,
            },
        );
        selections.push(LabeledSelection {
            label: "guard".into(),
            selection: sel,
        });
        let template = Candidate {
            formula: Formula::and(vec![k_formula, gamma]),
            slots: tracker.used.len(),
            param_len: 1 + m,
        };
        return finish(
            ctx,
            x0,
            &s_canon,
            tracker,
            template,
            Branch::Guard {
                cut,
                boundary_value: bv,
            },
            lambda,
            Vec::new(),
            selections,
            Vec::new(),
            input.window,
        );
    }

    // Pivot: the largest b whose dot range x₀ has entered.
    let u_idx = s_canon
        .iter()
        .enumerate()
        .filter(|(_, (b, _))| x0 > &(&inf_dot + b))
        .map(|(i, _)| i)
        .last()
        .expect("x0 above the least cut implies a pivot exists");
    let u_val = s_canon[u_idx].0.clone();
    let u_slot = tracker.slot(u_idx);

    // Partition piece of x₀ among the dot-range endpoints.
    struct EndTag {
        val: BigInt,
        s_idx: usize,
        upper: bool,
    }
    let mut ends: Vec<EndTag> = Vec::new();
    for (i, (b, _)) in s_canon.iter().enumerate() {
        ends.push(EndTag {
            val: b + &inf_dot,
            s_idx: i,
            upper: false,
        });
        if let Some(sup) = &sup_dot {
            ends.push(EndTag {
                val: b + sup,
                s_idx: i,
                upper: true,
            });
        }
    }
    ends.sort_by(|a, b| (&a.val, a.upper, a.s_idx).cmp(&(&b.val, b.upper, b.s_idx)));
    ends.dedup_by(|a, b| a.val == b.val);
    let end_term = |tag: &EndTag, tracker: &mut SlotTracker| -> Term {
        let c = if tag.upper {
            sup_dot.clone().expect("upper endpoints only exist when bounded")
        } else {
            inf_dot.clone()
        };
        Term::Affine {
            terms: vec![(BigInt::from(1), slot_b(tracker.slot(tag.s_idx)))],
            constant: c,
        }
    };
    let (k_formula, k_lo, k_hi, k_point);
    if let Some(tag) = ends.iter().find(|t| &t.val == x0) {
        k_formula = Formula::eq(Term::var("x"), end_term(tag, &mut tracker));
        (k_lo, k_hi, k_point) = (None, None, Some(tag.val.clone()));
    } else {
        let lo = ends.iter().filter(|t| &t.val < x0).next_back();
        let hi = ends.iter().find(|t| &t.val > x0);
        let mut parts = Vec::new();
        if let Some(tag) = lo {
            parts.push(Formula::gt(Term::var("x"), end_term(tag, &mut tracker)));
        }
        if let Some(tag) = hi {
            parts.push(Formula::cmp(
                crate::formula::CmpOp::Lt,
                Term::var("x"),
                end_term(tag, &mut tracker),
            ));
        }
        k_formula = Formula::and(parts);
        (k_lo, k_hi, k_point) = (
            lo.map(|t| t.val.clone()),
            hi.map(|t| t.val.clone()),
            None,
        );
    }

    // T: f of the Λ-fan over P¹(u−b), tagged with origins.
    let mut t_origins = Vec::new();
    let mut t_tagged: Vec<(Vec<BigInt>, usize, usize)> = Vec::new();
    for (i, (b, a)) in s_canon.iter().enumerate() {
        let p = p_delta(&ts, input.ops, &(&u_val - b), horizon)?;
        for eps in 0..=lambda {
            let fv = f_of(&shift_member(&p.tuple[0], eps)?)?;
            t_origins.push(TOrigin {
                b: b.clone(),
                a: a.clone(),
                epsilon: eps,
                value: fv.clone(),
                boundary: p.boundary,
            });
            let mut value = vec![fv];
            value.extend(a.iter().cloned());
            t_tagged.push((value, i, eps));
        }
    }
    t_tagged.sort_by(|x, y| (&x.0, x.1, x.2).cmp(&(&y.0, y.1, y.2)));
    t_tagged.dedup_by(|x, y| x.0 == y.0);
    let t_pool: Vec<Vec<BigInt>> = t_tagged.iter().map(|(v, _, _)| v.clone()).collect();

    // ζ: the shifted system pins E·x₀ over T.
    let sel_p = select_shd(
        ctx,
        input.theta2_phi,
        input.theta2_sys,
        &t_pool,
        &ex0,
        input.window,
    )
    .map_err(|err| label_err("shifted-system selection over T", err))?;
    let zeta_cand = &input.theta2_sys.candidates[sel_p.candidate];
    let zeta_params: Vec<Vec<Term>> = sel_p
        .params
        .iter()
        .map(|pv| {
            let (_, s_idx, eps) = t_tagged
                .iter()
                .find(|(v, _, _)| v == pv)
                .expect("selected parameter comes from the pool");
            let orig = tracker.slot(*s_idx);
            let w_term = Term::DefFn {
                name: input.f_name.to_string(),
                arg: Box::new(Term::sigma(
                    *eps as i64,
                    p1(slot_b(u_slot).sub(slot_b(orig))),
                )),
            };
            let mut terms = vec![w_term];
            terms.extend(slot_a_terms(orig));
            terms
        })
        .collect();
    let zeta = instantiate(zeta_cand, &zeta_params).subst(
        "x",
        &Term::Affine {
            terms: vec![(e.clone(), Term::var("x"))],
            constant: BigInt::zero(),
        },
    );
    selections.push(LabeledSelection {
        label: "zeta".into(),
        selection: sel_p,
    });

    // γ^(δ): θ-selections at the fan over P¹(x₀−u).
    let p_x0_u = p_delta(&ts, input.ops, &(x0 - &u_val), horizon)?;
    let mut gammas = Vec::new();
    for delta in 0..=lambda {
        let fv = f_of(&shift_member(&p_x0_u.tuple[0], delta)?)?;
        let point = &ex0 - &fv;
        let sel = select_shd(
            ctx,
            input.theta_phi,
            input.theta_sys,
            &a_pool,
            &point,
            input.window,
        )
        .map_err(|err| label_err(&format!("base-system selection at shift {delta}"), err))?;
        let cand = &input.theta_sys.candidates[sel.candidate];
        let params: Vec<Vec<Term>> = sel
            .params
            .iter()
            .map(|pv| slot_a_terms(tracker.slot(find_a(pv))))
            .collect();
        let transform = Term::Affine {
            terms: vec![
                (e.clone(), Term::var("x")),
                (
                    BigInt::from(-1),
                    Term::DefFn {
                        name: input.f_name.to_string(),
                        arg: Box::new(Term::sigma(
                            delta as i64,
                            p1(Term::var("x").sub(slot_b(u_slot))),
                        )),
                    },
                ),
            ],
            constant: BigInt::zero(),
        };
        gammas.push(instantiate(cand, &params).subst("x", &transform));
        selections.push(LabeledSelection {
            label: format!("gamma_{delta}"),
            selection: sel,
        });
    }

    // ξ^(ε): the shifted-pivot definitions pin x₀ over U = {(b,u)}.
    let mut u_tagged: Vec<(Vec<BigInt>, usize)> = s_canon
        .iter()
        .enumerate()
        .map(|(i, (b, _))| (vec![b.clone(), u_val.clone()], i))
        .collect();
    u_tagged.sort();
    u_tagged.dedup_by(|x, y| x.0 == y.0);
    let u_pool: Vec<Vec<BigInt>> = u_tagged.iter().map(|(v, _)| v.clone()).collect();
    let mut xis = Vec::new();
    for eps in 0..=lambda {
        let xphi = xi_phi(input.ops, input.space, eps);
        let xsys = xi_system(ctx, input.ops, input.space, eps)?;
        let sel = select_shd(ctx, &xphi, &xsys, &u_pool, x0, input.window)
            .map_err(|err| label_err(&format!("pivot-shift selection at shift {eps}"), err))?;
        let cand = &xsys.candidates[sel.candidate];
        let params: Vec<Vec<Term>> = sel
            .params
            .iter()
            .map(|pv| {
                let (_, s_idx) = u_tagged
                    .iter()
                    .find(|(v, _)| v == pv)
                    .expect("selected parameter comes from the pool");
                vec![slot_b(tracker.slot(*s_idx)), slot_b(u_slot)]
            })
            .collect();
        xis.push(instantiate(cand, &params));
        selections.push(LabeledSelection {
            label: format!("xi_{eps}"),
            selection: sel,
        });
    }

    // Strata: group S by the shift linking P¹(x₀−b) to P¹(x₀−u); pin the
    // extremes of each group so ordering transfers the link to every b
    // in between.
    let p_u_base = base
        .index_of(&p_x0_u.tuple[0])?
        .expect("extremal coordinate is a member") as i64;
    let mut strata_sets: Vec<Vec<usize>> = vec![Vec::new(); lambda + 1];
    for (i, (b, _)) in s_canon.iter().enumerate() {
        let pb = p_delta(&ts, input.ops, &(x0 - b), horizon)?;
        let pb_base = base
            .index_of(&pb.tuple[0])?
            .expect("extremal coordinate is a member") as i64;
        let diff = pb_base - p_u_base;
        if (0..=lambda as i64).contains(&diff) {
            strata_sets[diff as usize].push(i);
        }
    }
    let mut strata = Vec::new();
    let mut strata_formulas = Vec::new();
    for (delta, set) in strata_sets.iter().enumerate() {
        let (Some(&lo_idx), Some(&hi_idx)) = (set.first(), set.last()) else {
            continue;
        };
        let rhs = Term::sigma(delta as i64, p1(Term::var("x").sub(slot_b(u_slot))));
        let mut parts = vec![Formula::eq(
            p1(Term::var("x").sub(slot_b(tracker.slot(lo_idx)))),
            rhs.clone(),
        )];
        if hi_idx != lo_idx {
            parts.push(Formula::eq(
                p1(Term::var("x").sub(slot_b(tracker.slot(hi_idx)))),
                rhs,
            ));
        }
        strata_formulas.push(Formula::and(parts));
        strata.push(Stratum {
            delta,
            lo: s_canon[lo_idx].0.clone(),
            hi: s_canon[hi_idx].0.clone(),
        });
    }

    let mut conjuncts = vec![k_formula, zeta];
    conjuncts.extend(gammas);
    conjuncts.extend(xis);
    conjuncts.extend(strata_formulas);
    let template = Candidate {
        formula: Formula::and(conjuncts),
        slots: tracker.used.len(),
        param_len: 1 + m,
    };
    finish(
        ctx,
        x0,
        &s_canon,
        tracker,
        template,
        Branch::Main {
            u: u_val,
            k_lo,
            k_hi,
            k_point,
        },
        lambda,
        t_origins,
        selections,
        strata,
        input.window,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    ctx: &EvalContext,
    x0: &BigInt,
    s_canon: &[(BigInt, Vec<BigInt>)],
    tracker: SlotTracker,
    template: Candidate,
    branch: Branch,
    lambda: usize,
    t_set: Vec<TOrigin>,
    selections: Vec<LabeledSelection>,
    strata: Vec<Stratum>,
    window: (i64, i64),
) -> Result<CatchallWitness> {
    let assignment: Vec<Vec<BigInt>> = tracker
        .used
        .iter()
        .map(|&i| {
            let (b, a) = &s_canon[i];
            let mut row = vec![b.clone()];
            row.extend(a.iter().cloned());
            row
        })
        .collect();
    let refs: Vec<&Vec<BigInt>> = assignment.iter().collect();
    if !template.holds(ctx, x0, &refs)? {
        return Err(Error::Eval(
            "constructed definition fails at its base point".into(),
        ));
    }
    let mut psi = template.formula.clone();
    for (i, row) in assignment.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            psi = psi.subst(&slot_var(i + 1, j + 1), &Term::big(v.clone()));
        }
    }
    Ok(CatchallWitness {
        branch,
        lambda,
        t_set,
        selections,
        strata,
        psi,
        template,
        assignment,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::CmpOp;
    use crate::predicate::{Predicate, SubPredicate};
    use crate::shd::order_shd;

    fn setup() -> (EvalContext, ParamFormula, System, ParamFormula, System) {
        let ctx = EvalContext::new(SubPredicate::full(Predicate::power(2)), 96);
        ctx.register_term_fn("id", "t", Term::var("t"));
        let theta = ParamFormula::new(
            Formula::cmp(CmpOp::Lt, Term::var("x"), Term::var("y1")),
            1,
        )
        .unwrap();
        let theta_sys = order_shd(&theta).unwrap();
        let theta2 = ParamFormula::new(
            Formula::cmp(
                CmpOp::Lt,
                Term::var("x").sub(Term::var("y1")),
                Term::var("y2"),
            ),
            2,
        )
        .unwrap();
        let theta2_sys = order_shd(&theta2).unwrap();
        (ctx, theta, theta_sys, theta2, theta2_sys)
    }

    fn input<'a>(
        parts: &'a (ParamFormula, System, ParamFormula, System),
        ops: &'a OperatorTuple,
        space: &'a SpaceSpec,
    ) -> CatchallInput<'a> {
        CatchallInput {
            theta_phi: &parts.0,
            theta_sys: &parts.1,
            theta2_phi: &parts.2,
            theta2_sys: &parts.3,
            e_mult: BigInt::from(1),
            ops,
            space,
            f_name: "id",
            max_lambda: 24,
            window: (-300, 400),
        }
    }

    fn phi_direct(
        ctx: &EvalContext,
        input: &CatchallInput,
        x: &BigInt,
        b: &BigInt,
        a: &[BigInt],
    ) -> bool {
        let ts = ctx.space(input.space).unwrap();
        let p = p_delta(&ts, input.ops, &(x - b), ctx.horizon()).unwrap();
        let arg = &input.e_mult * x - ctx.apply_fn(input.f_name, &p.tuple[0]).unwrap();
        input.theta_phi.holds(ctx, &arg, a).unwrap()
    }

    fn s_pairs(pairs: &[(i64, i64)]) -> Vec<(BigInt, Vec<BigInt>)> {
        pairs
            .iter()
            .map(|&(b, a)| (BigInt::from(b), vec![BigInt::from(a)]))
            .collect()
    }

    #[test]
    fn worked_instance_entails_the_type() {
        let (ctx, theta, theta_sys, theta2, theta2_sys) = setup();
        let parts = (theta, theta_sys, theta2, theta2_sys);
        let ops = OperatorTuple::from_consts(&[1]);
        let space = SpaceSpec::new(0, 1, 1, 1);
        let inp = input(&parts, &ops, &space);
        let s = s_pairs(&[(3, 50), (17, 90)]);
        let x0 = BigInt::from(100);
        let w = catchall_construct(&ctx, &inp, &x0, &s).unwrap();
        assert!(matches!(w.branch, Branch::Main { .. }));
        assert_eq!(w.lambda, 5);
        // The b=17 fan starts from the boundary fallback.
        assert!(w.t_set.iter().any(|t| t.boundary && t.b == BigInt::from(17)));
        assert!(w.t_set.iter().any(|t| !t.boundary && t.b == BigInt::from(3)));

        // Entailment of the concrete ψ over the window: every satisfying
        // point shares x₀'s type over S.
        let pf = ParamFormula::new(w.psi.clone(), 0).unwrap();
        let ty0: Vec<bool> = s
            .iter()
            .map(|(b, a)| phi_direct(&ctx, &inp, &x0, b, a))
            .collect();
        let mut hits = 0;
        for xv in -300..=400 {
            let xb = BigInt::from(xv);
            if pf.holds(&ctx, &xb, &[]).unwrap() {
                hits += 1;
                let ty: Vec<bool> = s
                    .iter()
                    .map(|(b, a)| phi_direct(&ctx, &inp, &xb, b, a))
                    .collect();
                assert_eq!(ty, ty0, "type breach at x={xv}");
            }
        }
        assert!(hits > 0, "psi satisfied nowhere on the window");
    }

    #[test]
    fn deep_negative_point_takes_the_guard_branch() {
        let (ctx, theta, theta_sys, theta2, theta2_sys) = setup();
        let parts = (theta, theta_sys, theta2, theta2_sys);
        let ops = OperatorTuple::from_consts(&[1]);
        let space = SpaceSpec::new(0, 1, 1, 1);
        let inp = input(&parts, &ops, &space);
        let s = s_pairs(&[(3, 50), (17, 90)]);
        let x0 = BigInt::from(-50);
        let w = catchall_construct(&ctx, &inp, &x0, &s).unwrap();
        match &w.branch {
            Branch::Guard { cut, boundary_value } => {
                assert_eq!(*cut, BigInt::from(4));
                assert_eq!(*boundary_value, BigInt::from(1));
            }
            other => panic!("expected the guard branch, got {other:?}"),
        }
        let pf = ParamFormula::new(w.psi.clone(), 0).unwrap();
        assert!(pf.holds(&ctx, &x0, &[]).unwrap());
    }

    #[test]
    fn template_reproduces_psi_under_its_assignment() {
        let (ctx, theta, theta_sys, theta2, theta2_sys) = setup();
        let parts = (theta, theta_sys, theta2, theta2_sys);
        let ops = OperatorTuple::from_consts(&[1]);
        let space = SpaceSpec::new(0, 1, 1, 1);
        let inp = input(&parts, &ops, &space);
        let s = s_pairs(&[(3, 50), (17, 90)]);
        let x0 = BigInt::from(100);
        let w = catchall_construct(&ctx, &inp, &x0, &s).unwrap();
        let refs: Vec<&Vec<BigInt>> = w.assignment.iter().collect();
        for xv in [-20i64, 40, 100, 250] {
            let xb = BigInt::from(xv);
            let via_template = w.template.holds(&ctx, &xb, &refs).unwrap();
            let via_psi = ParamFormula::new(w.psi.clone(), 0)
                .unwrap()
                .holds(&ctx, &xb, &[])
                .unwrap();
            assert_eq!(via_template, via_psi, "x={xv}");
        }
    }

    #[test]
    fn input_order_does_not_change_the_template() {
        let (ctx, theta, theta_sys, theta2, theta2_sys) = setup();
        let parts = (theta, theta_sys, theta2, theta2_sys);
        let ops = OperatorTuple::from_consts(&[1]);
        let space = SpaceSpec::new(0, 1, 1, 1);
        let inp = input(&parts, &ops, &space);
        let x0 = BigInt::from(100);
        let w1 = catchall_construct(&ctx, &inp, &x0, &s_pairs(&[(3, 50), (17, 90)])).unwrap();
        let w2 = catchall_construct(&ctx, &inp, &x0, &s_pairs(&[(17, 90), (3, 50)])).unwrap();
        assert_eq!(
            serde_json::to_string(&w1.template).unwrap(),
            serde_json::to_string(&w2.template).unwrap()
        );
        assert_eq!(w1.assignment, w2.assignment);
    }

    #[test]
    fn singleton_parameter_sets_are_rejected() {
        let (ctx, theta, theta_sys, theta2, theta2_sys) = setup();
        let parts = (theta, theta_sys, theta2, theta2_sys);
        let ops = OperatorTuple::from_consts(&[1]);
        let space = SpaceSpec::new(0, 1, 1, 1);
        let inp = input(&parts, &ops, &space);
        let err = catchall_construct(
            &ctx,
            &inp,
            &BigInt::from(100),
            &s_pairs(&[(3, 50), (3, 50)]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
