//! Cell decomposition of a finite window: the truth pattern of φ(x;b)
//! across a parameter pool is constant on each cell, and cells are the
//! maximal constant runs. When a verified system is supplied, each cell
//! additionally carries a selected definition pinning its type.

use super::{canonical_pool, check_pool_width, select_with_table, ParamFormula, Selection, System, TypeTable};
use crate::error::Result;
use crate::formula::EvalContext;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

/// A maximal run of window points sharing one truth pattern.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Cell {
    pub lo: i64,
    pub hi: i64,
    /// One truth value per pool element, pool order.
    pub bits: Vec<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Selection>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CellDecomposition {
    pub window: (i64, i64),
    #[serde(with = "crate::jsonint::vec2")]
    pub pool: Vec<Vec<BigInt>>,
    pub cells: Vec<Cell>,
}

impl CellDecomposition {
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}

fn merge_runs(table: &TypeTable) -> Vec<Cell> {
    let mut cells: Vec<Cell> = Vec::new();
    for (idx, row) in table.rows.iter().enumerate() {
        let a = table.window.0 + idx as i64;
        match cells.last_mut() {
            Some(cell) if cell.bits == *row => cell.hi = a,
            _ => cells.push(Cell {
                lo: a,
                hi: a,
                bits: row.clone(),
                witness: None,
            }),
        }
    }
    cells
}

/// Split the window into maximal runs of constant φ-type over the pool.
pub fn decompose(
    ctx: &EvalContext,
    phi: &ParamFormula,
    pool: &[Vec<BigInt>],
    window: (i64, i64),
) -> Result<CellDecomposition> {
    let pool = canonical_pool(pool.to_vec());
    check_pool_width(&pool, phi.param_len)?;
    let table = TypeTable::build(ctx, phi, &pool, window)?;
    Ok(CellDecomposition {
        window,
        pool,
        cells: merge_runs(&table),
    })
}

/// As [`decompose`], but also select, for each cell, a candidate and
/// parameters from the system that pin the cell's type; selection runs at
/// the cell's left endpoint and any failure aborts the decomposition.
pub fn decompose_with_system(
    ctx: &EvalContext,
    phi: &ParamFormula,
    system: &System,
    pool: &[Vec<BigInt>],
    window: (i64, i64),
) -> Result<CellDecomposition> {
    let pool = canonical_pool(pool.to_vec());
    check_pool_width(&pool, phi.param_len)?;
    let table = TypeTable::build(ctx, phi, &pool, window)?;
    let mut cells = merge_runs(&table);
    for cell in &mut cells {
        let point = BigInt::from(cell.lo);
        cell.witness = Some(select_with_table(
            ctx,
            system,
            &pool,
            &point,
            &cell.bits,
            &table,
        )?);
    }
    Ok(CellDecomposition {
        window,
        pool,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Env, Formula, Term, Value};
    use crate::predicate::{Predicate, SubPredicate};
    use crate::shd::order_shd;

    fn ctx() -> EvalContext {
        EvalContext::new(SubPredicate::full(Predicate::power(2)), 64)
    }

    fn x_lt_y() -> ParamFormula {
        ParamFormula::new(Formula::lt(Term::var("x"), Term::var("y1")), 1).unwrap()
    }

    fn singles(vals: &[i64]) -> Vec<Vec<BigInt>> {
        vals.iter().map(|&v| vec![BigInt::from(v)]).collect()
    }

    #[test]
    fn order_formula_splits_at_each_threshold() {
        let ctx = ctx();
        let dec = decompose(&ctx, &x_lt_y(), &singles(&[3, 7]), (0, 10)).unwrap();
        let spans: Vec<(i64, i64)> = dec.cells.iter().map(|c| (c.lo, c.hi)).collect();
        assert_eq!(spans, vec![(0, 2), (3, 6), (7, 10)]);
        assert_eq!(dec.cells[0].bits, vec![true, true]);
        assert_eq!(dec.cells[1].bits, vec![false, true]);
        assert_eq!(dec.cells[2].bits, vec![false, false]);
    }

    #[test]
    fn empty_parameter_set_gives_a_single_cell() {
        let ctx = ctx();
        let phi = ParamFormula::new(
            Formula::lt(Term::var("x"), Term::big(BigInt::from(5))),
            1,
        )
        .unwrap();
        let dec = decompose(&ctx, &phi, &[], (-20, 20)).unwrap();
        assert_eq!(dec.cell_count(), 1);
        assert_eq!((dec.cells[0].lo, dec.cells[0].hi), (-20, 20));
        assert!(dec.cells[0].bits.is_empty());
    }

    #[test]
    fn adjacent_cells_always_differ() {
        let ctx = ctx();
        let dec = decompose(&ctx, &x_lt_y(), &singles(&[2, 5, 5, 9]), (-3, 14)).unwrap();
        // The pool is canonicalized, so the duplicate threshold collapses.
        assert_eq!(dec.pool.len(), 3);
        for pair in dec.cells.windows(2) {
            assert_ne!(pair[0].bits, pair[1].bits);
            assert_eq!(pair[0].hi + 1, pair[1].lo);
        }
        assert_eq!(dec.cells.first().unwrap().lo, -3);
        assert_eq!(dec.cells.last().unwrap().hi, 14);
    }

    #[test]
    fn witnesses_hold_and_pin_each_cell() {
        let ctx = ctx();
        let phi = x_lt_y();
        let system = order_shd(&phi).unwrap();
        let pool = singles(&[3, 7]);
        let dec = decompose_with_system(&ctx, &phi, &system, &pool, (0, 10)).unwrap();
        assert_eq!(dec.cell_count(), 3);
        for cell in &dec.cells {
            let sel = cell.witness.as_ref().expect("every cell gets a witness");
            let cand = &system.candidates[sel.candidate];
            let mut env = Env::new();
            for (i, row) in sel.params.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    env.insert(
                        crate::shd::slot_var(i + 1, j + 1),
                        Value::Int(v.clone()),
                    );
                }
            }
            // The selected definition holds at the cell's left endpoint…
            env.insert("x".into(), Value::Int(BigInt::from(cell.lo)));
            assert!(ctx.evaluate(&cand.formula, &env).unwrap());
            // …and every window point satisfying it shares the cell type.
            for a in 0..=10i64 {
                env.insert("x".into(), Value::Int(BigInt::from(a)));
                if ctx.evaluate(&cand.formula, &env).unwrap() {
                    let ty: Vec<bool> = dec
                        .pool
                        .iter()
                        .map(|b| phi.holds(&ctx, &BigInt::from(a), b).unwrap())
                        .collect();
                    assert_eq!(ty, cell.bits, "a={a} cell=({},{})", cell.lo, cell.hi);
                }
            }
        }
    }
}
