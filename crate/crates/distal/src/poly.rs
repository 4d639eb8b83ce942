//! Exact univariate polynomial arithmetic over the rationals, plus Sturm
//! chains and interval evaluation. Used to decide signs of operator values
//! at an algebraic growth rate without floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;

#[cfg(test)]
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Polynomial with rational coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<Rat>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn from_int(coeffs: &[BigInt]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|c| Rat::from_integer(c.clone()))
                .collect(),
        )
    }

    pub fn zero() -> Self {
        RatPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        RatPoly {
            coeffs: vec![Rat::one()],
        }
    }

    /// x^k with a rational coefficient.
    pub fn monomial(k: usize, c: Rat) -> Self {
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rat::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![Rat::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] = out[i].clone() + c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] = out[i].clone() + c;
        }
        Self::new(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a * b;
            }
        }
        Self::new(out)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Euclidean division; panics if `d` is zero.
    pub fn divmod(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut rem = self.clone();
        let dd = d.degree().unwrap();
        let lead = d.coeffs.last().unwrap().clone();
        let mut q = vec![Rat::zero(); self.coeffs.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let c = rem.coeffs.last().unwrap() / &lead;
            let k = rd - dd;
            q[k] = c.clone();
            let sub = d.mul(&Self::monomial(k, c));
            rem = rem.sub(&sub);
        }
        (Self::new(q), rem)
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divmod(d).1
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if let Some(lead) = a.coeffs.last().cloned() {
            a = a.scale(&(Rat::one() / lead));
        }
        a
    }

    /// Square-free part self / gcd(self, self').
    pub fn squarefree(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) || g.is_zero() {
            self.clone()
        } else {
            self.divmod(&g).0
        }
    }

    /// Sturm chain of the square-free part.
    pub fn sturm_chain(&self) -> Vec<Self> {
        let p = self.squarefree();
        let mut chain = vec![p.clone(), p.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            chain.push(r);
        }
        chain
    }

    /// Number of distinct real roots in the half-open interval (lo, hi].
    pub fn count_roots(&self, lo: &Rat, hi: &Rat) -> usize {
        if self.is_zero() {
            return 0;
        }
        let chain = self.sturm_chain();
        let v = |x: &Rat| -> usize {
            let mut changes = 0;
            let mut last: Option<bool> = None;
            for p in &chain {
                let val = p.eval(x);
                if val.is_zero() {
                    continue;
                }
                let s = val.is_positive();
                if let Some(prev) = last {
                    if prev != s {
                        changes += 1;
                    }
                }
                last = Some(s);
            }
            changes
        };
        v(lo).saturating_sub(v(hi))
    }

    /// Evaluate over an interval by Horner with interval arithmetic.
    pub fn eval_interval(&self, iv: &Interval) -> Interval {
        let mut acc = Interval::point(Rat::zero());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(iv).add(&Interval::point(c.clone()));
        }
        acc
    }
}

/// Closed rational interval [lo, hi].
#[derive(Clone, Debug)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: Rat) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if *c < lo {
                lo = c.clone();
            }
            if *c > hi {
                hi = c.clone();
            }
        }
        Interval { lo, hi }
    }

    pub fn mid(&self) -> Rat {
        (&self.lo + &self.hi) / Rat::from_integer(BigInt::from(2))
    }

    pub fn strictly_above(&self, bound: &Rat) -> bool {
        self.lo > *bound
    }

    pub fn strictly_below(&self, bound: &Rat) -> bool {
        self.hi < *bound
    }
}

/// Sign of `g` at the unique root of `f` inside (lo, hi), refined by bisection.
/// `None` when the bisection budget runs out without separating `g` from zero.
pub fn sign_at_root(g: &RatPoly, f: &RatPoly, lo: &Rat, hi: &Rat, budget: usize) -> Option<i8> {
    if g.is_zero() {
        return Some(0);
    }
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let mut flo = f.eval(&lo).is_positive();
    for _ in 0..=budget {
        let iv = Interval::new(lo.clone(), hi.clone());
        if g.count_roots(&iv.lo, &iv.hi) == 0 {
            let a = g.eval(&lo);
            let b = g.eval(&hi);
            if a.is_positive() && b.is_positive() {
                return Some(1);
            }
            if a.is_negative() && b.is_negative() {
                return Some(-1);
            }
        }
        let mid = iv.mid();
        let fm = f.eval(&mid);
        if fm.is_zero() {
            let gv = g.eval(&mid);
            return Some(if gv.is_zero() {
                0
            } else if gv.is_positive() {
                1
            } else {
                -1
            });
        }
        if fm.is_positive() == flo {
            lo = mid;
            flo = fm.is_positive();
        } else {
            hi = mid;
        }
    }
    None
}

/// Decide `g(root) > bound` at the unique root of `f` in (lo, hi).
pub fn above_at_root(
    g: &RatPoly,
    bound: &Rat,
    f: &RatPoly,
    lo: &Rat,
    hi: &Rat,
    budget: usize,
) -> Option<bool> {
    let shifted = g.sub(&RatPoly::monomial(0, bound.clone()));
    sign_at_root(&shifted, f, lo, hi, budget).map(|s| s > 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coeffs: &[i64]) -> RatPoly {
        RatPoly::from_int(&coeffs.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>())
    }

    #[test]
    fn divmod_golden() {
        // x^2 - x - 1 divided by x - 2 leaves remainder 1
        let f = p(&[-1, -1, 1]);
        let d = p(&[-2, 1]);
        let (q, r) = f.divmod(&d);
        assert_eq!(q, p(&[1, 1]));
        assert_eq!(r, p(&[1]));
    }

    #[test]
    fn sturm_counts_golden_ratio() {
        let f = p(&[-1, -1, 1]);
        assert_eq!(f.count_roots(&rat(1, 1), &rat(2, 1)), 1);
        assert_eq!(f.count_roots(&rat(-1, 1), &rat(0, 1)), 1);
        assert_eq!(f.count_roots(&rat(2, 1), &rat(10, 1)), 0);
    }

    #[test]
    fn sign_at_golden_ratio() {
        let f = p(&[-1, -1, 1]);
        // x at phi is positive, x - 2 at phi is negative
        assert_eq!(
            sign_at_root(&p(&[0, 1]), &f, &rat(8, 5), &rat(5, 3), 64),
            Some(1)
        );
        assert_eq!(
            sign_at_root(&p(&[-2, 1]), &f, &rat(8, 5), &rat(5, 3), 64),
            Some(-1)
        );
        // x^2 - x - 1 itself never separates from zero
        assert_eq!(sign_at_root(&f, &f, &rat(8, 5), &rat(5, 3), 64), None);
    }

    #[test]
    fn interval_eval_contains_value() {
        let g = p(&[1, -3, 1]);
        let iv = Interval::new(rat(3, 2), rat(8, 5));
        let out = g.eval_interval(&iv);
        let at = g.eval(&rat(31, 20));
        assert!(out.lo <= at && at <= out.hi);
    }
}
