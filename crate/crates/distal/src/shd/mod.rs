//! Strong honest definitions: base constructors for the order and
//! first-coordinate cases, the pivot-based catch-all constructor, the
//! single-formula combiner, the canonical witness search, the brute-force
//! window verifier, and cell decomposition over finite windows.
//!
//! A *strong honest definition* for a family φ(x;y) is a small set of
//! candidate formulas with parameter slots such that for every finite
//! parameter set B and every point a there is a candidate ψ and a slot
//! assignment c from B with a ⊨ ψ(x;c), and every other point satisfying
//! ψ(x;c) has the same φ-type over B as a. Entailment here is always
//! checked over an explicit finite window, and every report is stamped
//! with the window it covered.

mod canonical;
mod case1;
mod catchall;
mod combine;
mod decompose;
mod f1;
mod firstcoord;
mod order;
mod verify;

pub use canonical::{canonical_witness, CanonicalOutcome};
pub use case1::{case1_regime, Case1Report, Regime};
pub use catchall::{
    catchall_construct, Branch, CatchallInput, CatchallWitness, LabeledSelection, Stratum, TOrigin,
};
pub use combine::combine_system;
pub use decompose::{decompose, decompose_with_system, Cell, CellDecomposition};
pub use f1::{f1_phi, f1_shd, F1Builder, F1Report};
pub use firstcoord::{firstcoord_phi, firstcoord_shd, m_term, xi_phi, xi_system};
pub use order::order_shd;
pub use verify::{
    select_shd, select_with_table, verify_shd, Counterexample, Selection, TypeTable, VerifyReport,
};

use crate::error::{Error, Result};
use crate::formula::{Env, EvalContext, Formula, Value};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// A parametrised formula: free variables are `x` and `y1..ym`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ParamFormula {
    pub formula: Formula,
    pub param_len: usize,
}

/// A candidate definition: free variables are `x` and the slot components
/// `p{i}_{j}` for slot i in 1..=slots and component j in 1..=param_len.
/// Unused trailing slots are allowed; a candidate with zero slots is a
/// parameter-free guard.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Candidate {
    pub formula: Formula,
    pub slots: usize,
    pub param_len: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    OrderBase,
    FirstCoord,
    Catchall,
    UserSupplied,
}

/// A finite set of candidate definitions sharing parameter sorts.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct System {
    pub candidates: Vec<Candidate>,
    pub provenance: Provenance,
}

pub(crate) fn param_var(j: usize) -> String {
    format!("y{j}")
}

pub(crate) fn slot_var(slot: usize, comp: usize) -> String {
    format!("p{slot}_{comp}")
}

impl ParamFormula {
    pub fn new(formula: Formula, param_len: usize) -> Result<ParamFormula> {
        let pf = ParamFormula { formula, param_len };
        pf.check_vars()?;
        Ok(pf)
    }

    fn check_vars(&self) -> Result<()> {
        let mut vars = BTreeSet::new();
        self.formula.free_vars(&mut vars);
        let mut allowed: BTreeSet<String> = (1..=self.param_len).map(param_var).collect();
        allowed.insert("x".into());
        if let Some(bad) = vars.difference(&allowed).next() {
            return Err(Error::BadInput(format!(
                "unexpected free variable {bad:?} in a {}-parameter formula",
                self.param_len
            )));
        }
        Ok(())
    }

    /// Evaluate at a point and a parameter tuple.
    pub fn holds(&self, ctx: &EvalContext, a: &BigInt, b: &[BigInt]) -> Result<bool> {
        if b.len() != self.param_len {
            return Err(Error::ArityMismatch {
                expected: self.param_len,
                got: b.len(),
            });
        }
        let mut env = Env::new();
        env.insert("x".into(), Value::Int(a.clone()));
        for (j, v) in b.iter().enumerate() {
            env.insert(param_var(j + 1), Value::Int(v.clone()));
        }
        ctx.evaluate(&self.formula, &env)
    }
}

impl Candidate {
    pub fn top(param_len: usize) -> Candidate {
        Candidate {
            formula: Formula::True,
            slots: 0,
            param_len,
        }
    }

    /// Evaluate at a point under a slot assignment (one parameter tuple
    /// per slot).
    pub fn holds(&self, ctx: &EvalContext, a: &BigInt, assignment: &[&Vec<BigInt>]) -> Result<bool> {
        if assignment.len() != self.slots {
            return Err(Error::ArityMismatch {
                expected: self.slots,
                got: assignment.len(),
            });
        }
        let mut env = Env::new();
        env.insert("x".into(), Value::Int(a.clone()));
        for (i, tuple) in assignment.iter().enumerate() {
            if tuple.len() != self.param_len {
                return Err(Error::ArityMismatch {
                    expected: self.param_len,
                    got: tuple.len(),
                });
            }
            for (j, v) in tuple.iter().enumerate() {
                env.insert(slot_var(i + 1, j + 1), Value::Int(v.clone()));
            }
        }
        ctx.evaluate(&self.formula, &env)
    }

    fn check_vars(&self) -> Result<()> {
        let mut vars = BTreeSet::new();
        self.formula.free_vars(&mut vars);
        let mut allowed = BTreeSet::new();
        allowed.insert("x".to_string());
        for i in 1..=self.slots {
            for j in 1..=self.param_len {
                allowed.insert(slot_var(i, j));
            }
        }
        if let Some(bad) = vars.difference(&allowed).next() {
            return Err(Error::BadInput(format!(
                "unexpected free variable {bad:?} in a candidate with {} slots of width {}",
                self.slots, self.param_len
            )));
        }
        Ok(())
    }
}

impl System {
    pub fn new(candidates: Vec<Candidate>, provenance: Provenance) -> Result<System> {
        if candidates.is_empty() {
            return Err(Error::BadInput("a system needs at least one candidate".into()));
        }
        let width = candidates[0].param_len;
        for c in &candidates {
            if c.param_len != width {
                return Err(Error::BadInput(
                    "candidates disagree on the parameter sort width".into(),
                ));
            }
            c.check_vars()?;
        }
        Ok(System {
            candidates,
            provenance,
        })
    }

    pub fn param_len(&self) -> usize {
        self.candidates[0].param_len
    }

    /// Largest slot count over the candidates (the c in "c ∈ B^k").
    pub fn max_slots(&self) -> usize {
        self.candidates.iter().map(|c| c.slots).max().unwrap_or(0)
    }
}

/// Sort tuples lexicographically and drop duplicates: the canonical order
/// used for parameter pools, which fixes all tie-breaking.
pub(crate) fn canonical_pool(mut pool: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    pool.sort();
    pool.dedup();
    pool
}

pub(crate) fn check_pool_width(pool: &[Vec<BigInt>], width: usize) -> Result<()> {
    for b in pool {
        if b.len() != width {
            return Err(Error::ArityMismatch {
                expected: width,
                got: b.len(),
            });
        }
    }
    Ok(())
}
