//! Normalization of quantifier-free affine formulas into a disjunction of
//! constraint bundles, each bundle a set of strict inequalities together
//! with at most one congruence per variable.
//!
//! The rewrite steps: push negations to the atoms, replace every
//! comparison by strict positivity (over the integers e >= 0 is e+1 > 0),
//! expand multi-variable congruences into per-variable residue cases,
//! distribute to disjunctive normal form, then merge same-variable
//! congruences by the Chinese remainder theorem, dropping bundles whose
//! congruences are incompatible.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::formula::{CmpOp, Formula, Term};

const EXPANSION_LIMIT: usize = 100_000;

/// Linear expression over named variables with an integer constant.
/// Inside a bundle it is read as "this expression is positive".
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct LinExpr {
    pub coeffs: BTreeMap<String, BigInt>,
    pub constant: BigInt,
}

impl LinExpr {
    pub fn constant(n: BigInt) -> Self {
        LinExpr {
            coeffs: BTreeMap::new(),
            constant: n,
        }
    }

    pub fn var(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), BigInt::one());
        LinExpr {
            coeffs,
            constant: BigInt::zero(),
        }
    }

    /// Flatten a term into a linear expression; anything beyond variables,
    /// integers, and nested affine combinations is rejected.
    pub fn from_term(term: &Term) -> Result<Self> {
        let mut out = LinExpr::default();
        out.accumulate(term, &BigInt::one())?;
        out.prune();
        Ok(out)
    }

    fn accumulate(&mut self, term: &Term, scale: &BigInt) -> Result<()> {
        match term {
            Term::Var(v) => {
                *self.coeffs.entry(v.clone()).or_default() += scale;
                Ok(())
            }
            Term::Int(n) => {
                self.constant += scale * n;
                Ok(())
            }
            Term::Affine { terms, constant } => {
                self.constant += scale * constant;
                for (c, t) in terms {
                    self.accumulate(t, &(scale * c))?;
                }
                Ok(())
            }
            other => Err(Error::NotAffine(format!("{other:?}"))),
        }
    }

    fn prune(&mut self) {
        self.coeffs.retain(|_, c| !c.is_zero());
    }

    pub fn neg(&self) -> Self {
        LinExpr {
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), -c)).collect(),
            constant: -&self.constant,
        }
    }

    pub fn plus(&self, n: i64) -> Self {
        let mut out = self.clone();
        out.constant += n;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            *out.coeffs.entry(v.clone()).or_default() -= c;
        }
        out.constant -= &other.constant;
        out.prune();
        out
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_term(&self) -> Term {
        Term::Affine {
            terms: self
                .coeffs
                .iter()
                .map(|(v, c)| (c.clone(), Term::Var(v.clone())))
                .collect(),
            constant: self.constant.clone(),
        }
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if a.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{a}{v}")?;
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)?;
        } else if self.constant.is_positive() {
            write!(f, " + {}", self.constant)?;
        } else if self.constant.is_negative() {
            write!(f, " - {}", self.constant.abs())?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct LinShadow {
    coeffs: Vec<(String, String)>,
    constant: String,
}

impl Serialize for LinExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        LinShadow {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c.to_string()))
                .collect(),
            constant: self.constant.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let shadow = LinShadow::deserialize(d)?;
        let parse = |s: &str| {
            s.trim()
                .parse::<BigInt>()
                .map_err(|_| D::Error::custom(format!("not a decimal integer: {s:?}")))
        };
        let mut coeffs = BTreeMap::new();
        for (v, c) in shadow.coeffs {
            coeffs.insert(v, parse(&c)?);
        }
        let mut out = LinExpr {
            coeffs,
            constant: parse(&shadow.constant)?,
        };
        out.prune();
        Ok(out)
    }
}

/// A single-variable congruence: var is congruent to residue mod modulus.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarCongruence {
    pub var: String,
    #[serde(with = "crate::jsonint")]
    pub residue: BigInt,
    #[serde(with = "crate::jsonint")]
    pub modulus: BigInt,
}

/// One bundle of the normal form: the conjunction of its inequalities
/// (each read as "> 0") and congruences.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Disjunct {
    pub inequalities: Vec<LinExpr>,
    pub congruences: Vec<VarCongruence>,
}

/// Disjunction of bundles. No bundles at all means the formula is false;
/// a bundle with nothing in it is true.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalForm {
    pub disjuncts: Vec<Disjunct>,
}

impl NormalForm {
    pub fn is_false(&self) -> bool {
        self.disjuncts.is_empty()
    }

    pub fn is_true(&self) -> bool {
        self.disjuncts
            .iter()
            .any(|d| d.inequalities.is_empty() && d.congruences.is_empty())
    }

    /// Reassemble a formula with the same truth table, for checking the
    /// normalization against the original by evaluation.
    pub fn to_formula(&self) -> Formula {
        Formula::or(
            self.disjuncts
                .iter()
                .map(|d| {
                    let mut parts: Vec<Formula> = d
                        .inequalities
                        .iter()
                        .map(|e| Formula::gt(e.to_term(), Term::int(0)))
                        .collect();
                    parts.extend(d.congruences.iter().map(|c| Formula::Congruence {
                        t: Term::Var(c.var.clone()),
                        residue: c.residue.clone(),
                        modulus: c.modulus.clone(),
                    }));
                    Formula::and(parts)
                })
                .collect(),
        )
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.disjuncts.is_empty() {
            return write!(f, "false");
        }
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[{i}]")?;
            if d.inequalities.is_empty() && d.congruences.is_empty() {
                write!(f, " true")?;
                continue;
            }
            for e in &d.inequalities {
                write!(f, " {e} > 0;")?;
            }
            for c in &d.congruences {
                write!(f, " {} = {} (mod {});", c.var, c.residue, c.modulus)?;
            }
        }
        Ok(())
    }
}

enum Tree {
    Bool(bool),
    Ineq(LinExpr),
    Cong(String, BigInt, BigInt),
    All(Vec<Tree>),
    Any(Vec<Tree>),
}

/// Normalize a quantifier-free formula over affine atoms.
pub fn normalize_atoms(formula: &Formula) -> Result<NormalForm> {
    let tree = to_tree(formula, true)?;
    let mut bundles = Vec::new();
    for conj in dnf(&tree) {
        if let Some(d) = assemble(conj)? {
            bundles.push(d);
        }
    }
    for d in &mut bundles {
        d.inequalities.sort();
        d.inequalities.dedup();
        d.congruences.sort();
    }
    bundles.sort();
    bundles.dedup();
    // a bundle with no constraints swallows everything else
    if bundles
        .iter()
        .any(|d| d.inequalities.is_empty() && d.congruences.is_empty())
    {
        bundles = vec![Disjunct::default()];
    }
    Ok(NormalForm { disjuncts: bundles })
}

fn to_tree(formula: &Formula, positive: bool) -> Result<Tree> {
    match formula {
        Formula::True => Ok(Tree::Bool(positive)),
        Formula::False => Ok(Tree::Bool(!positive)),
        Formula::Not(g) => to_tree(g, !positive),
        Formula::And(fs) => {
            let parts: Vec<Tree> = fs
                .iter()
                .map(|f| to_tree(f, positive))
                .collect::<Result<_>>()?;
            Ok(if positive {
                Tree::All(parts)
            } else {
                Tree::Any(parts)
            })
        }
        Formula::Or(fs) => {
            let parts: Vec<Tree> = fs
                .iter()
                .map(|f| to_tree(f, positive))
                .collect::<Result<_>>()?;
            Ok(if positive {
                Tree::Any(parts)
            } else {
                Tree::All(parts)
            })
        }
        Formula::Cmp { op, lhs, rhs } => {
            let e = LinExpr::from_term(lhs)?.sub(&LinExpr::from_term(rhs)?);
            let op = if positive { *op } else { op.negate() };
            Ok(match op {
                CmpOp::Gt => Tree::Ineq(e),
                CmpOp::Lt => Tree::Ineq(e.neg()),
                CmpOp::Ge => Tree::Ineq(e.plus(1)),
                CmpOp::Le => Tree::Ineq(e.neg().plus(1)),
                CmpOp::Eq => Tree::All(vec![
                    Tree::Ineq(e.plus(1)),
                    Tree::Ineq(e.neg().plus(1)),
                ]),
                CmpOp::Ne => Tree::Any(vec![Tree::Ineq(e.clone()), Tree::Ineq(e.neg())]),
            })
        }
        Formula::Congruence {
            t,
            residue,
            modulus,
        } => {
            if *modulus < BigInt::one() {
                return Err(Error::InvalidModulus(modulus.clone()));
            }
            let mut e = LinExpr::from_term(t)?;
            e.constant -= residue;
            if positive {
                expand_congruence(&e, modulus)
            } else {
                // not divisible: the remainder is one of 1..m-1
                let mut cases = Vec::new();
                let mut b = BigInt::one();
                while b < *modulus {
                    let mut shifted = e.clone();
                    shifted.constant -= &b;
                    cases.push(expand_congruence(&shifted, modulus)?);
                    b += 1;
                }
                Ok(Tree::Any(cases))
            }
        }
        Formula::InSub { .. } | Formula::BoundedExists { .. } => {
            Err(Error::NotAffine("membership and quantifiers have no affine normal form".into()))
        }
    }
}

/// Expand "modulus divides e" into per-variable residue cases: for every
/// assignment of residues to the variables of e that satisfies the
/// congruence, a conjunction pinning each variable to its residue.
fn expand_congruence(e: &LinExpr, modulus: &BigInt) -> Result<Tree> {
    if modulus.is_one() {
        return Ok(Tree::Bool(true));
    }
    // coefficients divisible by the modulus contribute nothing
    let vars: Vec<(&String, BigInt)> = e
        .coeffs
        .iter()
        .map(|(v, c)| (v, c.mod_floor(modulus)))
        .filter(|(_, c)| !c.is_zero())
        .collect();
    if vars.is_empty() {
        return Ok(Tree::Bool(e.constant.mod_floor(modulus).is_zero()));
    }
    let m_usize: usize = modulus
        .to_string()
        .parse()
        .map_err(|_| Error::BadInput(format!("modulus {modulus} too large to expand")))?;
    let combos = m_usize
        .checked_pow(vars.len() as u32)
        .filter(|&n| n <= EXPANSION_LIMIT)
        .ok_or_else(|| {
            Error::BadInput(format!(
                "congruence expansion {}^{} exceeds the limit",
                modulus,
                vars.len()
            ))
        })?;
    let mut cases = Vec::new();
    let mut assignment = vec![BigInt::zero(); vars.len()];
    for combo in 0..combos {
        let mut rest = combo;
        for slot in assignment.iter_mut() {
            *slot = BigInt::from(rest % m_usize);
            rest /= m_usize;
        }
        let mut total = e.constant.clone();
        for ((_, c), b) in vars.iter().zip(&assignment) {
            total += c * b;
        }
        if total.mod_floor(modulus).is_zero() {
            cases.push(Tree::All(
                vars.iter()
                    .zip(&assignment)
                    .map(|((v, _), b)| Tree::Cong((*v).clone(), b.clone(), modulus.clone()))
                    .collect(),
            ));
        }
    }
    Ok(Tree::Any(cases))
}

enum Atom {
    Ineq(LinExpr),
    Cong(String, BigInt, BigInt),
}

fn dnf(tree: &Tree) -> Vec<Vec<&Tree>> {
    match tree {
        Tree::Bool(true) => vec![vec![]],
        Tree::Bool(false) => vec![],
        Tree::Ineq(_) | Tree::Cong(..) => vec![vec![tree]],
        Tree::Any(parts) => parts.iter().flat_map(dnf).collect(),
        Tree::All(parts) => {
            let mut acc: Vec<Vec<&Tree>> = vec![vec![]];
            for p in parts {
                let branches = dnf(p);
                let mut next = Vec::with_capacity(acc.len() * branches.len().max(1));
                for left in &acc {
                    for right in &branches {
                        let mut merged = left.clone();
                        merged.extend(right.iter().copied());
                        next.push(merged);
                    }
                }
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            acc
        }
    }
}

/// Turn one conjunction of atoms into a bundle; None when the bundle is
/// plainly unsatisfiable (a false constant or clashing congruences).
fn assemble(conj: Vec<&Tree>) -> Result<Option<Disjunct>> {
    let mut inequalities = Vec::new();
    let mut congruences: BTreeMap<String, (BigInt, BigInt)> = BTreeMap::new();
    for atom in conj {
        let atom = match atom {
            Tree::Ineq(e) => Atom::Ineq(e.clone()),
            Tree::Cong(v, b, m) => Atom::Cong(v.clone(), b.clone(), m.clone()),
            _ => unreachable!("dnf leaves only atoms"),
        };
        match atom {
            Atom::Ineq(e) => {
                if e.is_constant() {
                    if e.constant.is_positive() {
                        continue;
                    }
                    return Ok(None);
                }
                inequalities.push(e);
            }
            Atom::Cong(var, b, m) => {
                if m.is_one() {
                    continue;
                }
                let b = b.mod_floor(&m);
                match congruences.remove(&var) {
                    None => {
                        congruences.insert(var, (b, m));
                    }
                    Some((b0, m0)) => match crt(&b0, &m0, &b, &m) {
                        Some(merged) => {
                            congruences.insert(var, merged);
                        }
                        None => return Ok(None),
                    },
                }
            }
        }
    }
    Ok(Some(Disjunct {
        inequalities,
        congruences: congruences
            .into_iter()
            .map(|(var, (residue, modulus))| VarCongruence {
                var,
                residue,
                modulus,
            })
            .collect(),
    }))
}

/// Merge x = b1 (mod m1) with x = b2 (mod m2); None when incompatible.
fn crt(b1: &BigInt, m1: &BigInt, b2: &BigInt, m2: &BigInt) -> Option<(BigInt, BigInt)> {
    let ext = m1.extended_gcd(m2);
    let g = &ext.gcd;
    let diff = b2 - b1;
    if !diff.mod_floor(g).is_zero() {
        return None;
    }
    let l = m1 / g * m2;
    let b = (b1 + m1 * &ext.x * (diff / g)).mod_floor(&l);
    Some((b, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Env, EvalContext, Value};
    use crate::predicate::{Predicate, SubPredicate};

    fn ctx() -> EvalContext {
        EvalContext::new(SubPredicate::full(Predicate::power(2)), 30)
    }

    fn agree_on_grid(f: &Formula, vars: &[&str], lo: i64, hi: i64) {
        let n = normalize_atoms(f).unwrap();
        let g = n.to_formula();
        let ctx = ctx();
        let mut env = Env::new();
        let mut point = vec![lo; vars.len()];
        loop {
            for (v, x) in vars.iter().zip(&point) {
                env.insert(v.to_string(), Value::int(*x));
            }
            let a = ctx.evaluate(f, &env).unwrap();
            let b = ctx.evaluate(&g, &env).unwrap();
            assert_eq!(a, b, "disagree at {point:?}");
            let mut i = 0;
            loop {
                if i == point.len() {
                    return;
                }
                point[i] += 1;
                if point[i] <= hi {
                    break;
                }
                point[i] = lo;
                i += 1;
            }
        }
    }

    #[test]
    fn equality_splits_into_two_inequalities() {
        let f = Formula::eq(Term::var("x"), Term::var("y"));
        let n = normalize_atoms(&f).unwrap();
        assert_eq!(n.disjuncts.len(), 1);
        assert_eq!(n.disjuncts[0].inequalities.len(), 2);
        agree_on_grid(&f, &["x", "y"], -5, 5);
    }

    #[test]
    fn nonstrict_bounds_tighten_by_one() {
        let f = Formula::cmp(CmpOp::Ge, Term::var("x"), Term::int(3));
        let n = normalize_atoms(&f).unwrap();
        let e = &n.disjuncts[0].inequalities[0];
        // x - 3 + 1 > 0
        assert_eq!(e.constant, BigInt::from(-2));
        agree_on_grid(&f, &["x"], -2, 8);
    }

    #[test]
    fn negation_pushes_to_atoms() {
        let f = Formula::not(Formula::and(vec![
            Formula::lt(Term::var("x"), Term::int(4)),
            Formula::gt(Term::var("y"), Term::int(0)),
        ]));
        agree_on_grid(&f, &["x", "y"], -3, 7);
    }

    #[test]
    fn crt_merges_compatible_congruences() {
        let f = Formula::and(vec![
            Formula::Congruence {
                t: Term::var("x"),
                residue: BigInt::from(1),
                modulus: BigInt::from(2),
            },
            Formula::Congruence {
                t: Term::var("x"),
                residue: BigInt::from(2),
                modulus: BigInt::from(3),
            },
        ]);
        let n = normalize_atoms(&f).unwrap();
        assert_eq!(n.disjuncts.len(), 1);
        let c = &n.disjuncts[0].congruences;
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].residue, BigInt::from(5));
        assert_eq!(c[0].modulus, BigInt::from(6));
        agree_on_grid(&f, &["x"], -8, 14);
    }

    #[test]
    fn clashing_congruences_collapse_to_false() {
        let f = Formula::and(vec![
            Formula::Congruence {
                t: Term::var("x"),
                residue: BigInt::zero(),
                modulus: BigInt::from(2),
            },
            Formula::Congruence {
                t: Term::var("x"),
                residue: BigInt::one(),
                modulus: BigInt::from(2),
            },
        ]);
        let n = normalize_atoms(&f).unwrap();
        assert!(n.is_false());
    }

    #[test]
    fn multivariable_congruence_expands_per_variable() {
        // 2 | x + y
        let f = Formula::Congruence {
            t: Term::var("x").add(Term::var("y")),
            residue: BigInt::zero(),
            modulus: BigInt::from(2),
        };
        let n = normalize_atoms(&f).unwrap();
        assert_eq!(n.disjuncts.len(), 2);
        for d in &n.disjuncts {
            assert_eq!(d.congruences.len(), 2);
        }
        agree_on_grid(&f, &["x", "y"], -4, 4);
    }

    #[test]
    fn negated_congruence_expands() {
        let f = Formula::not(Formula::Congruence {
            t: Term::var("x"),
            residue: BigInt::zero(),
            modulus: BigInt::from(3),
        });
        agree_on_grid(&f, &["x"], -7, 11);
        let n = normalize_atoms(&f).unwrap();
        for d in &n.disjuncts {
            assert!(d.congruences.len() <= 1);
        }
    }

    #[test]
    fn mixed_formula_agrees_everywhere() {
        let f = Formula::or(vec![
            Formula::and(vec![
                Formula::cmp(CmpOp::Le, Term::int(0), Term::var("x")),
                Formula::cmp(CmpOp::Ne, Term::var("x"), Term::int(3)),
                Formula::Congruence {
                    t: Term::affine(vec![(2, Term::var("x")), (1, Term::var("y"))], 1),
                    residue: BigInt::zero(),
                    modulus: BigInt::from(3),
                },
            ]),
            Formula::eq(
                Term::var("y"),
                Term::affine(vec![(1, Term::var("x"))], -2),
            ),
        ]);
        agree_on_grid(&f, &["x", "y"], -4, 6);
    }

    #[test]
    fn membership_atoms_are_rejected() {
        let f = Formula::InSub {
            t: Term::var("x"),
            allow_neg_inf: false,
            allow_pos_inf: false,
        };
        assert!(matches!(normalize_atoms(&f), Err(Error::NotAffine(_))));
    }

    #[test]
    fn serde_round_trip() {
        let f = Formula::and(vec![
            Formula::gt(Term::var("x"), Term::int(0)),
            Formula::Congruence {
                t: Term::var("x"),
                residue: BigInt::one(),
                modulus: BigInt::from(4),
            },
        ]);
        let n = normalize_atoms(&f).unwrap();
        let s = serde_json::to_string(&n).unwrap();
        let back: NormalForm = serde_json::from_str(&s).unwrap();
        assert_eq!(back, n);
    }
}
