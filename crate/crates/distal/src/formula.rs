//! A small first-order formula language over a sparse predicate: affine
//! terms, successor shifts, extremal-function components, congruences,
//! membership tests with signed infinities, and bounded existentials over
//! gapped tuple spaces.
//!
//! Evaluation is total over an environment mapping variables to values in
//! Z extended by -inf and +inf. Conjunction and disjunction short-circuit
//! left to right, so guards placed before a partial term (say a membership
//! test before a successor shift) keep evaluation away from undefined
//! spots.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::OperatorTuple;
use crate::pdelta::{p_delta, q_delta};
use crate::predicate::{Predicate, SubPredicate};
use crate::tuplespace::TupleSpace;

/// Integer extended with the two signed infinities.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    NegInf,
    Int(#[serde(with = "crate::jsonint")] BigInt),
    PosInf,
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }

    pub fn finite(&self) -> Result<&BigInt> {
        match self {
            Value::Int(n) => Ok(n),
            v => Err(Error::Eval(format!("expected a finite value, got {v}"))),
        }
    }

    fn rank(&self) -> i8 {
        match self {
            Value::NegInf => -1,
            Value::Int(_) => 0,
            Value::PosInf => 1,
        }
    }

    pub fn cmp_ext(&self, other: &Value) -> std::cmp::Ordering {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::NegInf => write!(f, "-inf"),
            Value::Int(n) => write!(f, "{n}"),
            Value::PosInf => write!(f, "+inf"),
        }
    }
}

/// Identifies a tuple space relative to the context's base predicate.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub start: usize,
    pub step: usize,
    pub arity: usize,
    pub delta: usize,
}

impl SpaceSpec {
    pub fn new(start: usize, step: usize, arity: usize, delta: usize) -> Self {
        SpaceSpec {
            start,
            step,
            arity,
            delta,
        }
    }

    /// The space this subsequence itself spans with the given shape.
    pub fn over(sub: &SubPredicate, arity: usize, delta: usize) -> Self {
        SpaceSpec::new(sub.start(), sub.step(), arity, delta)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    Var(String),
    Int(#[serde(with = "crate::jsonint")] BigInt),
    /// Sum of coefficient-weighted terms plus a constant.
    Affine {
        #[serde(with = "crate::jsonint::pairs")]
        terms: Vec<(BigInt, Term)>,
        #[serde(with = "crate::jsonint")]
        constant: BigInt,
    },
    /// k-fold successor in the base predicate (negative k clamps at the
    /// least member); the argument must be a member or an infinity.
    Sigma { shift: i64, arg: Box<Term> },
    /// coord-th coordinate (1-based) of the largest tuple below the
    /// argument under the operator order.
    PComp {
        coord: usize,
        ops: OperatorTuple,
        space: SpaceSpec,
        arg: Box<Term>,
    },
    /// coord-th coordinate of the smallest tuple at or above the argument.
    QComp {
        coord: usize,
        ops: OperatorTuple,
        space: SpaceSpec,
        arg: Box<Term>,
    },
    /// Registered unary function, applied by name.
    DefFn { name: String, arg: Box<Term> },
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn int(n: i64) -> Term {
        Term::Int(BigInt::from(n))
    }

    pub fn big(n: BigInt) -> Term {
        Term::Int(n)
    }

    pub fn sigma(shift: i64, arg: Term) -> Term {
        Term::Sigma {
            shift,
            arg: Box::new(arg),
        }
    }

    pub fn affine(terms: Vec<(i64, Term)>, constant: i64) -> Term {
        Term::Affine {
            terms: terms
                .into_iter()
                .map(|(c, t)| (BigInt::from(c), t))
                .collect(),
            constant: BigInt::from(constant),
        }
    }

    pub fn add(self, other: Term) -> Term {
        Term::affine(vec![(1, self), (1, other)], 0)
    }

    pub fn sub(self, other: Term) -> Term {
        Term::affine(vec![(1, self), (-1, other)], 0)
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Int(_) => {}
            Term::Affine { terms, .. } => {
                for (_, t) in terms {
                    t.free_vars(out);
                }
            }
            Term::Sigma { arg, .. }
            | Term::PComp { arg, .. }
            | Term::QComp { arg, .. }
            | Term::DefFn { arg, .. } => arg.free_vars(out),
        }
    }

    /// Substitute `replacement` for every free occurrence of `var`.
    pub fn subst(&self, var: &str, replacement: &Term) -> Term {
        match self {
            Term::Var(v) if v == var => replacement.clone(),
            Term::Var(_) | Term::Int(_) => self.clone(),
            Term::Affine { terms, constant } => Term::Affine {
                terms: terms
                    .iter()
                    .map(|(c, t)| (c.clone(), t.subst(var, replacement)))
                    .collect(),
                constant: constant.clone(),
            },
            Term::Sigma { shift, arg } => Term::Sigma {
                shift: *shift,
                arg: Box::new(arg.subst(var, replacement)),
            },
            Term::PComp {
                coord,
                ops,
                space,
                arg,
            } => Term::PComp {
                coord: *coord,
                ops: ops.clone(),
                space: space.clone(),
                arg: Box::new(arg.subst(var, replacement)),
            },
            Term::QComp {
                coord,
                ops,
                space,
                arg,
            } => Term::QComp {
                coord: *coord,
                ops: ops.clone(),
                space: space.clone(),
                arg: Box::new(arg.subst(var, replacement)),
            },
            Term::DefFn { name, arg } => Term::DefFn {
                name: name.clone(),
                arg: Box::new(arg.subst(var, replacement)),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    pub fn apply(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        matches!(
            (self, ord),
            (CmpOp::Lt, Less)
                | (CmpOp::Le, Less | Equal)
                | (CmpOp::Gt, Greater)
                | (CmpOp::Ge, Greater | Equal)
                | (CmpOp::Eq, Equal)
                | (CmpOp::Ne, Less | Greater)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    True,
    False,
    Cmp {
        op: CmpOp,
        lhs: Term,
        rhs: Term,
    },
    /// modulus divides (t - residue); the term must come out finite.
    Congruence {
        t: Term,
        #[serde(with = "crate::jsonint")]
        residue: BigInt,
        #[serde(with = "crate::jsonint")]
        modulus: BigInt,
    },
    /// Membership in the context's working subsequence, with the two
    /// infinities admitted on request (parameter windows close up).
    InSub {
        t: Term,
        allow_neg_inf: bool,
        allow_pos_inf: bool,
    },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    /// Exists a tuple in the space, the first coordinate capped by a term
    /// (or by the context horizon when absent), satisfying the body.
    BoundedExists {
        vars: Vec<String>,
        space: SpaceSpec,
        z1_cap: Option<Box<Term>>,
        body: Box<Formula>,
    },
}

impl Formula {
    pub fn cmp(op: CmpOp, lhs: Term, rhs: Term) -> Formula {
        Formula::Cmp { op, lhs, rhs }
    }

    pub fn lt(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(CmpOp::Lt, lhs, rhs)
    }

    pub fn le(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(CmpOp::Le, lhs, rhs)
    }

    pub fn gt(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(CmpOp::Gt, lhs, rhs)
    }

    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(CmpOp::Eq, lhs, rhs)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::True,
            1 => fs.into_iter().next().unwrap(),
            _ => Formula::And(fs),
        }
    }

    pub fn or(fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::False,
            1 => fs.into_iter().next().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Cmp { lhs, rhs, .. } => {
                lhs.free_vars(out);
                rhs.free_vars(out);
            }
            Formula::Congruence { t, .. } | Formula::InSub { t, .. } => t.free_vars(out),
            Formula::Not(f) => f.free_vars(out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.free_vars(out);
                }
            }
            Formula::BoundedExists {
                vars,
                z1_cap,
                body,
                ..
            } => {
                if let Some(cap) = z1_cap {
                    cap.free_vars(out);
                }
                let mut inner = BTreeSet::new();
                body.free_vars(&mut inner);
                for v in vars {
                    inner.remove(v);
                }
                out.extend(inner);
            }
        }
    }

    /// Capture-aware substitution of a term for a free variable. Bound
    /// tuple variables that clash with the replacement's free variables
    /// are renamed first.
    pub fn subst(&self, var: &str, replacement: &Term) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Cmp { op, lhs, rhs } => Formula::Cmp {
                op: *op,
                lhs: lhs.subst(var, replacement),
                rhs: rhs.subst(var, replacement),
            },
            Formula::Congruence {
                t,
                residue,
                modulus,
            } => Formula::Congruence {
                t: t.subst(var, replacement),
                residue: residue.clone(),
                modulus: modulus.clone(),
            },
            Formula::InSub {
                t,
                allow_neg_inf,
                allow_pos_inf,
            } => Formula::InSub {
                t: t.subst(var, replacement),
                allow_neg_inf: *allow_neg_inf,
                allow_pos_inf: *allow_pos_inf,
            },
            Formula::Not(f) => Formula::not(f.subst(var, replacement)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.subst(var, replacement)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.subst(var, replacement)).collect()),
            Formula::BoundedExists {
                vars,
                space,
                z1_cap,
                body,
            } => {
                let new_cap = z1_cap
                    .as_ref()
                    .map(|c| Box::new(c.subst(var, replacement)));
                if vars.iter().any(|v| v == var) {
                    // The variable is shadowed inside; only the cap sees it.
                    return Formula::BoundedExists {
                        vars: vars.clone(),
                        space: space.clone(),
                        z1_cap: new_cap,
                        body: body.clone(),
                    };
                }
                let mut incoming = BTreeSet::new();
                replacement.free_vars(&mut incoming);
                let mut vars = vars.clone();
                let mut body = (**body).clone();
                for v in vars.iter_mut() {
                    if incoming.contains(v) {
                        let mut fresh = format!("{v}_r");
                        let mut used = BTreeSet::new();
                        body.free_vars(&mut used);
                        used.extend(incoming.iter().cloned());
                        while used.contains(&fresh) {
                            fresh.push('r');
                        }
                        body = body.subst(v, &Term::Var(fresh.clone()));
                        *v = fresh;
                    }
                }
                Formula::BoundedExists {
                    vars,
                    space: space.clone(),
                    z1_cap: new_cap,
                    body: Box::new(body.subst(var, replacement)),
                }
            }
        }
    }
}

pub type Env = HashMap<String, Value>;

/// A registered unary function: either native code or a closed term over a
/// single variable, evaluated in a fresh environment.
#[derive(Clone)]
enum FnImpl {
    Native(Arc<dyn Fn(&BigInt) -> Result<BigInt> + Send + Sync>),
    Defined { var: String, body: Term },
}

/// Definable-function bodies may call other registered functions; chains
/// deeper than this are assumed cyclic.
const MAX_FN_DEPTH: usize = 64;

/// Everything needed to evaluate formulas: the base predicate, the working
/// subsequence, a horizon bounding every search, registered functions, and
/// a registry of tuple spaces keyed by their shape.
pub struct EvalContext {
    sub: SubPredicate,
    horizon: usize,
    fns: RwLock<HashMap<String, FnImpl>>,
    spaces: RwLock<HashMap<SpaceSpec, Arc<TupleSpace>>>,
}

impl EvalContext {
    pub fn new(sub: SubPredicate, horizon: usize) -> Self {
        EvalContext {
            sub,
            horizon,
            fns: RwLock::new(HashMap::new()),
            spaces: RwLock::new(HashMap::new()),
        }
    }

    pub fn sub(&self) -> &SubPredicate {
        &self.sub
    }

    pub fn base(&self) -> &Arc<Predicate> {
        self.sub.base()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn register_fn(
        &self,
        name: impl Into<String>,
        f: impl Fn(&BigInt) -> Result<BigInt> + Send + Sync + 'static,
    ) {
        self.fns
            .write()
            .unwrap()
            .insert(name.into(), FnImpl::Native(Arc::new(f)));
    }

    /// Register a function given by a term over one variable; the body is
    /// evaluated with the argument bound and nothing else in scope.
    pub fn register_term_fn(&self, name: impl Into<String>, var: impl Into<String>, body: Term) {
        self.fns.write().unwrap().insert(
            name.into(),
            FnImpl::Defined {
                var: var.into(),
                body,
            },
        );
    }

    pub fn has_fn(&self, name: &str) -> bool {
        self.fns.read().unwrap().contains_key(name)
    }

    /// Apply a registered function to a finite value.
    pub fn apply_fn(&self, name: &str, arg: &BigInt) -> Result<BigInt> {
        self.apply_fn_at(name, arg, 0)
    }

    fn apply_fn_at(&self, name: &str, arg: &BigInt, depth: usize) -> Result<BigInt> {
        if depth >= MAX_FN_DEPTH {
            return Err(Error::Eval(format!(
                "function call chain through {name:?} exceeds depth {MAX_FN_DEPTH}"
            )));
        }
        let f = self
            .fns
            .read()
            .unwrap()
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownFunction(name.to_string()))?;
        match f {
            FnImpl::Native(f) => f(arg),
            FnImpl::Defined { var, body } => {
                let mut env = Env::new();
                env.insert(var, Value::Int(arg.clone()));
                let out = self.eval_term_at(&body, &env, depth + 1)?;
                Ok(out.finite()?.clone())
            }
        }
    }

    /// Tuple space for a shape, created on first use.
    pub fn space(&self, spec: &SpaceSpec) -> Result<Arc<TupleSpace>> {
        if let Some(ts) = self.spaces.read().unwrap().get(spec) {
            return Ok(ts.clone());
        }
        let sub = SubPredicate::new(self.base().clone(), spec.start, spec.step)?;
        let ts = TupleSpace::new(sub, spec.arity, spec.delta)?;
        self.spaces
            .write()
            .unwrap()
            .insert(spec.clone(), ts.clone());
        Ok(ts)
    }

    pub fn eval_term(&self, term: &Term, env: &Env) -> Result<Value> {
        self.eval_term_at(term, env, 0)
    }

    fn eval_term_at(&self, term: &Term, env: &Env, depth: usize) -> Result<Value> {
        match term {
            Term::Var(v) => env
                .get(v)
                .cloned()
                .ok_or_else(|| Error::Eval(format!("unbound variable {v}"))),
            Term::Int(n) => Ok(Value::Int(n.clone())),
            Term::Affine { terms, constant } => {
                let mut finite = constant.clone();
                let mut pos_inf = false;
                let mut neg_inf = false;
                for (c, t) in terms {
                    if c.is_zero() {
                        continue;
                    }
                    match self.eval_term_at(t, env, depth)? {
                        Value::Int(v) => finite += c * v,
                        Value::PosInf => {
                            if c.is_positive() {
                                pos_inf = true
                            } else {
                                neg_inf = true
                            }
                        }
                        Value::NegInf => {
                            if c.is_positive() {
                                neg_inf = true
                            } else {
                                pos_inf = true
                            }
                        }
                    }
                }
                match (pos_inf, neg_inf) {
                    (false, false) => Ok(Value::Int(finite)),
                    (true, false) => Ok(Value::PosInf),
                    (false, true) => Ok(Value::NegInf),
                    (true, true) => Err(Error::Eval(
                        "affine term mixes both infinities".into(),
                    )),
                }
            }
            Term::Sigma { shift, arg } => match self.eval_term_at(arg, env, depth)? {
                Value::Int(z) => {
                    let moved = self
                        .base()
                        .successor(&z, *shift)
                        .map_err(|e| Error::Eval(format!("shift of {z}: {e}")))?;
                    Ok(Value::Int(moved))
                }
                inf => Ok(inf),
            },
            Term::PComp {
                coord,
                ops,
                space,
                arg,
            } => {
                let x = self.eval_term_at(arg, env, depth)?;
                let x = x.finite()?;
                let ts = self.space(space)?;
                let res = p_delta(&ts, ops, x, self.horizon)?;
                pick_coord(&res.tuple, *coord)
            }
            Term::QComp {
                coord,
                ops,
                space,
                arg,
            } => {
                let x = self.eval_term_at(arg, env, depth)?;
                let x = x.finite()?;
                let ts = self.space(space)?;
                let res = q_delta(&ts, ops, x, self.horizon)?;
                pick_coord(&res.tuple, *coord)
            }
            Term::DefFn { name, arg } => {
                let v = self.eval_term_at(arg, env, depth)?;
                Ok(Value::Int(self.apply_fn_at(name, v.finite()?, depth)?))
            }
        }
    }

    pub fn evaluate(&self, formula: &Formula, env: &Env) -> Result<bool> {
        match formula {
            Formula::True => Ok(true),
            Formula::False => Ok(false),
            Formula::Cmp { op, lhs, rhs } => {
                let a = self.eval_term(lhs, env)?;
                let b = self.eval_term(rhs, env)?;
                Ok(op.apply(a.cmp_ext(&b)))
            }
            Formula::Congruence {
                t,
                residue,
                modulus,
            } => {
                if *modulus < BigInt::from(1) {
                    return Err(Error::InvalidModulus(modulus.clone()));
                }
                let v = self.eval_term(t, env)?;
                let v = v.finite()?;
                Ok((v - residue).mod_floor(modulus).is_zero())
            }
            Formula::InSub {
                t,
                allow_neg_inf,
                allow_pos_inf,
            } => match self.eval_term(t, env)? {
                Value::Int(z) => self.sub.contains(&z),
                Value::NegInf => Ok(*allow_neg_inf),
                Value::PosInf => Ok(*allow_pos_inf),
            },
            Formula::Not(f) => Ok(!self.evaluate(f, env)?),
            Formula::And(fs) => {
                for f in fs {
                    if !self.evaluate(f, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Formula::Or(fs) => {
                for f in fs {
                    if self.evaluate(f, env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::BoundedExists {
                vars,
                space,
                z1_cap,
                body,
            } => {
                let ts = self.space(space)?;
                if vars.len() != ts.arity() {
                    return Err(Error::ArityMismatch {
                        expected: ts.arity(),
                        got: vars.len(),
                    });
                }
                let cap_index = match z1_cap {
                    None => self.horizon,
                    Some(cap) => match self.eval_term(cap, env)? {
                        Value::PosInf => self.horizon,
                        Value::NegInf => return Ok(false),
                        Value::Int(v) => {
                            let mut t = 0usize;
                            let mut fits = None;
                            while t <= self.horizon {
                                match ts.sub().nth(t) {
                                    Ok(r) if r <= v => fits = Some(t),
                                    _ => break,
                                }
                                t += 1;
                            }
                            match fits {
                                Some(t) => t,
                                None => return Ok(false),
                            }
                        }
                    },
                };
                let members = ts.members_up_to(cap_index)?;
                let mut env = env.clone();
                for m in members.iter() {
                    let values = ts.values(m)?;
                    for (var, value) in vars.iter().zip(values) {
                        env.insert(var.clone(), Value::Int(value));
                    }
                    if self.evaluate(body, &env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

fn pick_coord(tuple: &[BigInt], coord: usize) -> Result<Value> {
    if coord == 0 || coord > tuple.len() {
        return Err(Error::BadInput(format!(
            "coordinate {coord} out of range 1..={}",
            tuple.len()
        )));
    }
    Ok(Value::Int(tuple[coord - 1].clone()))
}

/// The dot of an operator tuple against named variables, as an affine
/// term over successor shifts.
pub fn dot_term(ops: &OperatorTuple, vars: &[&str]) -> Term {
    let mut parts = Vec::new();
    for (op, var) in ops.iter().zip(vars) {
        for (k, c) in op.coeffs().iter().enumerate() {
            if !c.is_zero() {
                parts.push((c.clone(), Term::sigma(k as i64, Term::var(*var))));
            }
        }
    }
    Term::Affine {
        terms: parts,
        constant: BigInt::zero(),
    }
}

/// Conjunction of strict positivity constraints: every f > 0.
pub fn family_e0(fs: Vec<Term>) -> Formula {
    Formula::and(
        fs.into_iter()
            .map(|f| Formula::gt(f, Term::int(0)))
            .collect(),
    )
}

/// Exists an ungapped tuple dominated coordinate-wise by the given bounds:
/// each f_j must exceed its dot A^(j) . z.
pub fn family_en(
    space: SpaceSpec,
    bounds: Vec<(Term, OperatorTuple)>,
    z1_cap: Option<Term>,
) -> Result<Formula> {
    let arity = space.arity;
    for (_, ops) in &bounds {
        if ops.arity() != arity {
            return Err(Error::ArityMismatch {
                expected: arity,
                got: ops.arity(),
            });
        }
    }
    let vars: Vec<String> = (1..=arity).map(|i| format!("z{i}")).collect();
    let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    let body = Formula::and(
        bounds
            .into_iter()
            .map(|(f, ops)| Formula::gt(f, dot_term(&ops, &var_refs)))
            .collect(),
    );
    Ok(Formula::BoundedExists {
        vars,
        space,
        z1_cap: z1_cap.map(Box::new),
        body: Box::new(body),
    })
}

/// Compare E x - y2 with the image of the extremal tuple below x - y1
/// under a second operator tuple: E x - y2 op sum_i B_i(P_i(x - y1)).
/// The scale E must stay 1 unless the image collapses to a single
/// coordinate.
pub fn family_fn(
    scale: BigInt,
    op: CmpOp,
    ops_a: OperatorTuple,
    ops_b: OperatorTuple,
    space: SpaceSpec,
    x: &str,
    y1: &str,
    y2: &str,
) -> Result<Formula> {
    if ops_b.arity() != ops_a.arity() || space.arity != ops_a.arity() {
        return Err(Error::ArityMismatch {
            expected: ops_a.arity(),
            got: ops_b.arity().max(space.arity),
        });
    }
    let single = ops_b.iter().filter(|o| !o.is_zero()).count() <= 1;
    if scale != BigInt::from(1) && !single {
        return Err(Error::BadInput(
            "a scale other than 1 needs a single-coordinate image".into(),
        ));
    }
    let arg = Term::var(x).sub(Term::var(y1));
    let mut parts = Vec::new();
    for (i, op_b) in ops_b.iter().enumerate() {
        for (k, c) in op_b.coeffs().iter().enumerate() {
            if !c.is_zero() {
                parts.push((
                    c.clone(),
                    Term::sigma(
                        k as i64,
                        Term::PComp {
                            coord: i + 1,
                            ops: ops_a.clone(),
                            space: space.clone(),
                            arg: Box::new(arg.clone()),
                        },
                    ),
                ));
            }
        }
    }
    let rhs = Term::Affine {
        terms: parts,
        constant: BigInt::zero(),
    };
    let lhs = Term::Affine {
        terms: vec![
            (scale, Term::var(x)),
            (BigInt::from(-1), Term::var(y2)),
        ],
        constant: BigInt::zero(),
    };
    Ok(Formula::cmp(op, lhs, rhs))
}

/// Exists a boxed tuple threading the threshold: y1 + A.z < x < y2 + B.z
/// with u_i <= z_i <= v_i. Free variables: x, y1, y2, u1.., v1...
pub fn family_gn(
    ops_a: OperatorTuple,
    ops_b: OperatorTuple,
    space: SpaceSpec,
) -> Result<Formula> {
    let arity = space.arity;
    if ops_a.arity() != arity || ops_b.arity() != arity {
        return Err(Error::ArityMismatch {
            expected: arity,
            got: ops_a.arity().max(ops_b.arity()),
        });
    }
    let vars: Vec<String> = (1..=arity).map(|i| format!("z{i}")).collect();
    let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    let mut body = vec![
        Formula::lt(
            Term::var("y1").add(dot_term(&ops_a, &var_refs)),
            Term::var("x"),
        ),
        Formula::lt(
            Term::var("x"),
            Term::var("y2").add(dot_term(&ops_b, &var_refs)),
        ),
    ];
    for (i, v) in vars.iter().enumerate() {
        body.push(Formula::le(
            Term::var(format!("u{}", i + 1)),
            Term::var(v.clone()),
        ));
        body.push(Formula::le(
            Term::var(v.clone()),
            Term::var(format!("v{}", i + 1)),
        ));
    }
    Ok(Formula::BoundedExists {
        vars,
        space,
        z1_cap: Some(Box::new(Term::var("v1"))),
        body: Box::new(Formula::and(body)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predicate::Predicate;

    fn ctx2() -> EvalContext {
        EvalContext::new(SubPredicate::full(Predicate::power(2)), 40)
    }

    fn env(pairs: &[(&str, i64)]) -> Env {
        pairs
            .iter()
            .map(|&(k, v)| (k.to_string(), Value::int(v)))
            .collect()
    }

    #[test]
    fn terms_evaluate() {
        let ctx = ctx2();
        let e = env(&[("x", 4)]);
        assert_eq!(
            ctx.eval_term(&Term::sigma(2, Term::var("x")), &e).unwrap(),
            Value::int(16)
        );
        assert_eq!(
            ctx.eval_term(&Term::sigma(-3, Term::var("x")), &e).unwrap(),
            Value::int(1)
        );
        let aff = Term::affine(vec![(3, Term::var("x")), (-1, Term::int(5))], 2);
        assert_eq!(ctx.eval_term(&aff, &e).unwrap(), Value::int(9));
        assert!(ctx
            .eval_term(&Term::sigma(1, Term::int(3)), &e)
            .is_err());
    }

    #[test]
    fn infinities_compare_and_propagate() {
        let ctx = ctx2();
        let mut e = Env::new();
        e.insert("y".into(), Value::PosInf);
        let f = Formula::lt(Term::int(100), Term::var("y"));
        assert!(ctx.evaluate(&f, &e).unwrap());
        let aff = Term::affine(vec![(-2, Term::var("y"))], 7);
        assert_eq!(ctx.eval_term(&aff, &e).unwrap(), Value::NegInf);
        e.insert("z".into(), Value::NegInf);
        let clash = Term::affine(vec![(1, Term::var("y")), (1, Term::var("z"))], 0);
        assert!(ctx.eval_term(&clash, &e).is_err());
    }

    #[test]
    fn extremal_components() {
        let ctx = ctx2();
        let space = SpaceSpec::new(0, 1, 3, 2);
        let ops = OperatorTuple::from_consts(&[1, 2, 4]);
        let e = env(&[("x", 47)]);
        let p1 = Term::PComp {
            coord: 1,
            ops: ops.clone(),
            space: space.clone(),
            arg: Box::new(Term::var("x")),
        };
        assert_eq!(ctx.eval_term(&p1, &e).unwrap(), Value::int(32));
        let q2 = Term::QComp {
            coord: 2,
            ops,
            space,
            arg: Box::new(Term::var("x")),
        };
        assert_eq!(ctx.eval_term(&q2, &e).unwrap(), Value::int(8));
    }

    #[test]
    fn membership_with_infinities() {
        let ctx = ctx2();
        let mut e = env(&[("a", 8), ("b", 9)]);
        e.insert("top".into(), Value::PosInf);
        let member = |t, ninf, pinf| Formula::InSub {
            t,
            allow_neg_inf: ninf,
            allow_pos_inf: pinf,
        };
        assert!(ctx.evaluate(&member(Term::var("a"), false, false), &e).unwrap());
        assert!(!ctx.evaluate(&member(Term::var("b"), false, false), &e).unwrap());
        assert!(ctx.evaluate(&member(Term::var("top"), false, true), &e).unwrap());
        assert!(!ctx.evaluate(&member(Term::var("top"), false, false), &e).unwrap());
    }

    #[test]
    fn bounded_exists_over_tuples() {
        let ctx = ctx2();
        let space = SpaceSpec::new(0, 1, 3, 2);
        let ops = OperatorTuple::from_consts(&[1, 2, 4]);
        // exists z with dot < x, z1 <= x
        let body = Formula::lt(dot_term(&ops, &["z1", "z2", "z3"]), Term::var("x"));
        let f = Formula::BoundedExists {
            vars: vec!["z1".into(), "z2".into(), "z3".into()],
            space,
            z1_cap: Some(Box::new(Term::var("x"))),
            body: Box::new(body),
        };
        assert!(ctx.evaluate(&f, &env(&[("x", 29)])).unwrap());
        assert!(!ctx.evaluate(&f, &env(&[("x", 28)])).unwrap());
    }

    #[test]
    fn guards_shortcircuit() {
        let ctx = ctx2();
        let e = env(&[("w", 9)]);
        // without the guard the shift would error on the non-member 9
        let guarded = Formula::and(vec![
            Formula::InSub {
                t: Term::var("w"),
                allow_neg_inf: false,
                allow_pos_inf: false,
            },
            Formula::gt(Term::sigma(1, Term::var("w")), Term::int(0)),
        ]);
        assert!(!ctx.evaluate(&guarded, &e).unwrap());
    }

    #[test]
    fn substitution_respects_binders() {
        let inner = Formula::lt(Term::var("x"), Term::var("z1"));
        let f = Formula::BoundedExists {
            vars: vec!["z1".into()],
            space: SpaceSpec::new(0, 1, 1, 0),
            z1_cap: Some(Box::new(Term::var("x"))),
            body: Box::new(inner),
        };
        // substituting for the bound name touches only the cap
        let g = f.subst("z1", &Term::int(7));
        assert_eq!(g, f);
        // substituting a term mentioning the bound name forces a rename
        let h = f.subst("x", &Term::var("z1"));
        if let Formula::BoundedExists { vars, body, .. } = &h {
            assert_ne!(vars[0], "z1");
            let mut fv = BTreeSet::new();
            body.free_vars(&mut fv);
            assert!(fv.contains("z1"));
        } else {
            panic!("shape preserved");
        }
    }

    #[test]
    fn formula_json_round_trip() {
        let space = SpaceSpec::new(0, 1, 2, 2);
        let f = family_gn(
            OperatorTuple::from_consts(&[1, 2]),
            OperatorTuple::from_consts(&[2, 1]),
            space,
        )
        .unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let back: Formula = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn registered_functions_apply() {
        let ctx = ctx2();
        ctx.register_fn("twice", |n| Ok(n * 2));
        let t = Term::DefFn {
            name: "twice".into(),
            arg: Box::new(Term::int(21)),
        };
        assert_eq!(ctx.eval_term(&t, &Env::new()).unwrap(), Value::int(42));
        let missing = Term::DefFn {
            name: "nope".into(),
            arg: Box::new(Term::int(0)),
        };
        assert!(matches!(
            ctx.eval_term(&missing, &Env::new()),
            Err(Error::UnknownFunction(_))
        ));
    }
}
