//! S-expression front end for formula and term files.
//!
//! The JSON AST is the canonical interchange shape; this parser accepts a
//! terser hand-writable syntax for the same trees:
//!
//! Terms
//! * `x`, `y1`, `p2_1` — variables
//! * `42`, `-7` — integer literals (arbitrary precision)
//! * `(+ t u …)`, `(- t u …)`, `(* 3 t)` — affine arithmetic; `*` takes
//!   exactly one integer-literal factor
//! * `(sigma k t)` — k-fold successor (negative k clamps at the least
//!   member)
//! * `(p coord (ops (a0 a1 …) …) (space start step arity delta) t)` —
//!   coord-th coordinate of the largest tuple below `t`; `q` likewise for
//!   the smallest tuple at or above `t`
//! * `(fn name t)` — registered unary function
//!
//! Formulas
//! * `true`, `false`
//! * `(< t u)` `( <= )` `(> )` `(>= )` `(= )` `(!= )` — comparisons
//! * `(cong t residue modulus)` — modulus divides t − residue
//! * `(in t)` — membership in the working subsequence; add `:neg` /
//!   `:pos` to admit the matching infinity
//! * `(not f)`, `(and f …)`, `(or f …)`
//! * `(exists (v1 v2 …) (space start step arity delta) cap body)` —
//!   bounded tuple quantifier; write `_` for cap to use the context
//!   horizon
//!
//! `;` starts a comment that runs to the end of the line.

use crate::error::{Error, Result};
use crate::formula::{CmpOp, Formula, SpaceSpec, Term};
use crate::operator::{Operator, OperatorTuple};
use num_bigint::BigInt;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq)]
enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadInput(msg.into())
}

fn tokenize(input: &str) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut chars = input.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' | ')' => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
                tokens.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    Ok(tokens)
}

fn parse_sexpr(tokens: &[String], pos: &mut usize) -> Result<Sexpr> {
    match tokens.get(*pos) {
        None => Err(bad("unexpected end of input")),
        Some(t) if t == "(" => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err(bad("unbalanced parenthesis: missing ')'")),
                    Some(t) if t == ")" => {
                        *pos += 1;
                        return Ok(Sexpr::List(items));
                    }
                    _ => items.push(parse_sexpr(tokens, pos)?),
                }
            }
        }
        Some(t) if t == ")" => Err(bad("unbalanced parenthesis: stray ')'")),
        Some(t) => {
            *pos += 1;
            Ok(Sexpr::Atom(t.clone()))
        }
    }
}

fn parse_one(input: &str) -> Result<Sexpr> {
    let tokens = tokenize(input)?;
    let mut pos = 0;
    let expr = parse_sexpr(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(bad(format!(
            "trailing input after the first expression: {:?}",
            &tokens[pos..]
        )));
    }
    Ok(expr)
}

fn atom_int(s: &Sexpr) -> Option<BigInt> {
    match s {
        Sexpr::Atom(a) => a.parse::<BigInt>().ok(),
        _ => None,
    }
}

fn expect_atom<'a>(s: &'a Sexpr, what: &str) -> Result<&'a str> {
    match s {
        Sexpr::Atom(a) => Ok(a),
        Sexpr::List(_) => Err(bad(format!("expected {what}, found a list"))),
    }
}

fn expect_usize(s: &Sexpr, what: &str) -> Result<usize> {
    expect_atom(s, what)?
        .parse::<usize>()
        .map_err(|_| bad(format!("expected a nonnegative integer for {what}")))
}

/// `(space start step arity delta)`
fn space_of(s: &Sexpr) -> Result<SpaceSpec> {
    match s {
        Sexpr::List(items)
            if items.len() == 5 && items[0] == Sexpr::Atom("space".into()) =>
        {
            Ok(SpaceSpec::new(
                expect_usize(&items[1], "space start")?,
                expect_usize(&items[2], "space step")?,
                expect_usize(&items[3], "space arity")?,
                expect_usize(&items[4], "space delta")?,
            ))
        }
        _ => Err(bad("expected (space start step arity delta)")),
    }
}

/// `(ops (a0 a1 …) (b0 …) …)` — one coefficient list per operator.
fn ops_of(s: &Sexpr) -> Result<OperatorTuple> {
    let items = match s {
        Sexpr::List(items) if !items.is_empty() && items[0] == Sexpr::Atom("ops".into()) => {
            &items[1..]
        }
        _ => return Err(bad("expected (ops (coeffs…) …)")),
    };
    let mut ops = Vec::new();
    for item in items {
        let coeffs = match item {
            Sexpr::List(cs) => cs
                .iter()
                .map(|c| atom_int(c).ok_or_else(|| bad("operator coefficients must be integers")))
                .collect::<Result<Vec<BigInt>>>()?,
            Sexpr::Atom(_) => return Err(bad("each operator is a list of coefficients")),
        };
        ops.push(Operator::new(coeffs));
    }
    OperatorTuple::new(ops)
}

fn term_of(s: &Sexpr) -> Result<Term> {
    if let Some(n) = atom_int(s) {
        return Ok(Term::big(n));
    }
    match s {
        Sexpr::Atom(a) => Ok(Term::var(a.clone())),
        Sexpr::List(items) => {
            let head = items
                .first()
                .ok_or_else(|| bad("empty list is not a term"))?;
            let head = expect_atom(head, "a term head symbol")?;
            let args = &items[1..];
            match head {
                "+" => {
                    let mut terms = Vec::new();
                    let mut constant = BigInt::zero();
                    for a in args {
                        match atom_int(a) {
                            Some(n) => constant += n,
                            None => terms.push((BigInt::from(1), term_of(a)?)),
                        }
                    }
                    Ok(Term::Affine { terms, constant })
                }
                "-" => {
                    if args.is_empty() {
                        return Err(bad("(-) needs at least one argument"));
                    }
                    let mut terms = Vec::new();
                    let mut constant = BigInt::zero();
                    for (i, a) in args.iter().enumerate() {
                        // Unary minus negates; otherwise the first argument
                        // is positive and the rest are subtracted.
                        let coeff = if i == 0 && args.len() > 1 { 1 } else { -1 };
                        match atom_int(a) {
                            Some(n) => constant += coeff * n,
                            None => terms.push((BigInt::from(coeff), term_of(a)?)),
                        }
                    }
                    Ok(Term::Affine { terms, constant })
                }
                "*" => {
                    if args.len() != 2 {
                        return Err(bad("(*) takes exactly two arguments"));
                    }
                    let (c, t) = match (atom_int(&args[0]), atom_int(&args[1])) {
                        (Some(a), Some(b)) => {
                            return Ok(Term::big(a * b));
                        }
                        (Some(c), None) => (c, &args[1]),
                        (None, Some(c)) => (c, &args[0]),
                        (None, None) => {
                            return Err(bad("(*) needs one integer-literal factor"))
                        }
                    };
                    Ok(Term::Affine {
                        terms: vec![(c, term_of(t)?)],
                        constant: BigInt::zero(),
                    })
                }
                "sigma" => {
                    if args.len() != 2 {
                        return Err(bad("(sigma k t) takes exactly two arguments"));
                    }
                    let shift = expect_atom(&args[0], "a shift count")?
                        .parse::<i64>()
                        .map_err(|_| bad("sigma shift must be an integer"))?;
                    Ok(Term::sigma(shift, term_of(&args[1])?))
                }
                "p" | "q" => {
                    if args.len() != 4 {
                        return Err(bad(format!(
                            "({head} coord (ops …) (space …) t) takes four arguments"
                        )));
                    }
                    let coord = expect_usize(&args[0], "a coordinate")?;
                    let ops = ops_of(&args[1])?;
                    let space = space_of(&args[2])?;
                    let arg = Box::new(term_of(&args[3])?);
                    Ok(if head == "p" {
                        Term::PComp {
                            coord,
                            ops,
                            space,
                            arg,
                        }
                    } else {
                        Term::QComp {
                            coord,
                            ops,
                            space,
                            arg,
                        }
                    })
                }
                "fn" => {
                    if args.len() != 2 {
                        return Err(bad("(fn name t) takes exactly two arguments"));
                    }
                    Ok(Term::DefFn {
                        name: expect_atom(&args[0], "a function name")?.to_string(),
                        arg: Box::new(term_of(&args[1])?),
                    })
                }
                other => Err(bad(format!("unknown term head {other:?}"))),
            }
        }
    }
}

fn cmp_head(head: &str) -> Option<CmpOp> {
    Some(match head {
        "<" => CmpOp::Lt,
        "<=" => CmpOp::Le,
        ">" => CmpOp::Gt,
        ">=" => CmpOp::Ge,
        "=" => CmpOp::Eq,
        "!=" => CmpOp::Ne,
        _ => return None,
    })
}

fn formula_of(s: &Sexpr) -> Result<Formula> {
    match s {
        Sexpr::Atom(a) if a == "true" => Ok(Formula::True),
        Sexpr::Atom(a) if a == "false" => Ok(Formula::False),
        Sexpr::Atom(a) => Err(bad(format!("{a:?} is not a formula"))),
        Sexpr::List(items) => {
            let head = items
                .first()
                .ok_or_else(|| bad("empty list is not a formula"))?;
            let head = expect_atom(head, "a formula head symbol")?;
            let args = &items[1..];
            if let Some(op) = cmp_head(head) {
                if args.len() != 2 {
                    return Err(bad(format!("({head} t u) takes exactly two arguments")));
                }
                return Ok(Formula::cmp(op, term_of(&args[0])?, term_of(&args[1])?));
            }
            match head {
                "cong" => {
                    if args.len() != 3 {
                        return Err(bad("(cong t residue modulus) takes three arguments"));
                    }
                    let residue = atom_int(&args[1])
                        .ok_or_else(|| bad("cong residue must be an integer"))?;
                    let modulus = atom_int(&args[2])
                        .ok_or_else(|| bad("cong modulus must be an integer"))?;
                    Ok(Formula::Congruence {
                        t: term_of(&args[0])?,
                        residue,
                        modulus,
                    })
                }
                "in" => {
                    if args.is_empty() {
                        return Err(bad("(in t) needs a term"));
                    }
                    let mut allow_neg_inf = false;
                    let mut allow_pos_inf = false;
                    for flag in &args[1..] {
                        match expect_atom(flag, "an :neg/:pos flag")? {
                            ":neg" => allow_neg_inf = true,
                            ":pos" => allow_pos_inf = true,
                            other => {
                                return Err(bad(format!("unknown membership flag {other:?}")))
                            }
                        }
                    }
                    Ok(Formula::InSub {
                        t: term_of(&args[0])?,
                        allow_neg_inf,
                        allow_pos_inf,
                    })
                }
                "not" => {
                    if args.len() != 1 {
                        return Err(bad("(not f) takes exactly one argument"));
                    }
                    Ok(Formula::Not(Box::new(formula_of(&args[0])?)))
                }
                "and" | "or" => {
                    let parts = args
                        .iter()
                        .map(formula_of)
                        .collect::<Result<Vec<Formula>>>()?;
                    Ok(if head == "and" {
                        Formula::And(parts)
                    } else {
                        Formula::Or(parts)
                    })
                }
                "exists" => {
                    if args.len() != 4 {
                        return Err(bad(
                            "(exists (vars…) (space …) cap body) takes four arguments",
                        ));
                    }
                    let vars = match &args[0] {
                        Sexpr::List(vs) => vs
                            .iter()
                            .map(|v| Ok(expect_atom(v, "a variable name")?.to_string()))
                            .collect::<Result<Vec<String>>>()?,
                        Sexpr::Atom(_) => {
                            return Err(bad("exists variables must be a list"))
                        }
                    };
                    let space = space_of(&args[1])?;
                    let z1_cap = match &args[2] {
                        Sexpr::Atom(a) if a == "_" => None,
                        cap => Some(Box::new(term_of(cap)?)),
                    };
                    Ok(Formula::BoundedExists {
                        vars,
                        space,
                        z1_cap,
                        body: Box::new(formula_of(&args[3])?),
                    })
                }
                other => Err(bad(format!("unknown formula head {other:?}"))),
            }
        }
    }
}

/// Parse one term from s-expression text.
pub fn parse_term(input: &str) -> Result<Term> {
    term_of(&parse_one(input)?)
}

/// Parse one formula from s-expression text.
pub fn parse_formula(input: &str) -> Result<Formula> {
    formula_of(&parse_one(input)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Env, EvalContext, Value};
    use crate::predicate::{Predicate, SubPredicate};

    #[test]
    fn atoms_parse_to_vars_and_literals() {
        assert_eq!(parse_term("x").unwrap(), Term::var("x"));
        assert_eq!(parse_term("-42").unwrap(), Term::int(-42));
        assert_eq!(
            parse_term("123456789012345678901234567890").unwrap(),
            Term::big("123456789012345678901234567890".parse().unwrap())
        );
    }

    #[test]
    fn arithmetic_becomes_affine_nodes() {
        let t = parse_term("(- (+ x (* 3 y1) 7) y2)").unwrap();
        let ctx = EvalContext::new(SubPredicate::full(Predicate::power(2)), 32);
        let mut env = Env::new();
        env.insert("x".into(), Value::int(10));
        env.insert("y1".into(), Value::int(5));
        env.insert("y2".into(), Value::int(4));
        // 10 + 3·5 + 7 − 4 = 28
        assert_eq!(ctx.eval_term(&t, &env).unwrap(), Value::int(28));
    }

    #[test]
    fn extremal_coordinate_terms_round_trip() {
        let src = "(p 1 (ops (1) (2) (4)) (space 0 1 3 2) (- x y1))";
        let t = parse_term(src).unwrap();
        match &t {
            Term::PComp {
                coord, ops, space, ..
            } => {
                assert_eq!(*coord, 1);
                assert_eq!(ops.arity(), 3);
                assert_eq!((space.arity, space.delta), (3, 2));
            }
            other => panic!("expected a first-coordinate term, got {other:?}"),
        }
        // σ² of the same argument, exercising nesting.
        let nested = parse_term(&format!("(sigma 2 {src})")).unwrap();
        assert!(matches!(nested, Term::Sigma { shift: 2, .. }));
    }

    #[test]
    fn formulas_cover_every_connective() {
        let f = parse_formula(
            "(and (< x y1) ; comment survives\n (or (not (= x 3)) (cong x 1 4)) (in (sigma 1 x) :pos) true)",
        )
        .unwrap();
        match &f {
            Formula::And(parts) => {
                assert_eq!(parts.len(), 4);
                assert!(matches!(parts[3], Formula::True));
                assert!(matches!(
                    parts[2],
                    Formula::InSub {
                        allow_neg_inf: false,
                        allow_pos_inf: true,
                        ..
                    }
                ));
            }
            other => panic!("expected a conjunction, got {other:?}"),
        }
    }

    #[test]
    fn bounded_quantifier_parses_with_and_without_cap() {
        let f = parse_formula("(exists (z1 z2) (space 0 1 2 1) x (< z2 z1))").unwrap();
        match &f {
            Formula::BoundedExists { vars, z1_cap, .. } => {
                assert_eq!(vars, &["z1".to_string(), "z2".to_string()]);
                assert!(z1_cap.is_some());
            }
            other => panic!("expected a bounded quantifier, got {other:?}"),
        }
        let f = parse_formula("(exists (z1) (space 0 1 1 1) _ (= z1 4))").unwrap();
        assert!(matches!(
            f,
            Formula::BoundedExists { z1_cap: None, .. }
        ));
    }

    #[test]
    fn evaluation_agrees_with_directly_built_trees() {
        let ctx = EvalContext::new(SubPredicate::full(Predicate::power(2)), 64);
        let parsed = parse_formula("(= (p 1 (ops (1)) (space 0 1 1 1) x) 32)").unwrap();
        let mut env = Env::new();
        for (x, expect) in [(40i64, true), (65, false), (33, true)] {
            env.insert("x".into(), Value::int(x));
            assert_eq!(ctx.evaluate(&parsed, &env).unwrap(), expect, "x={x}");
        }
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        for src in [
            "(",
            ")",
            "(< x)",
            "(frob x y)",
            "(* x y1)",
            "(sigma x 1)",
            "(p 1 (ops) (space 0 1 1 1) x) extra",
            "",
        ] {
            assert!(
                parse_formula(src).is_err() && parse_term(src).is_err() || src == "(< x)",
                "{src:?} should not parse"
            );
        }
        // A comparison with a missing operand is a formula-level error.
        assert!(parse_formula("(< x)").is_err());
    }
}
