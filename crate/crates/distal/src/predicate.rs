//! Sparse subsets of the naturals, materialized as strictly increasing
//! sequences r_0 < r_1 < ... with a thread-safe append-only cache.
//!
//! The successor map sends each member to the next one; iterated
//! predecessors clamp at the least member. A [`GrowthProfile`] optionally
//! certifies the limit ratio r_{n+1}/r_n, which unlocks exact sign
//! classification and asymptotic certificates elsewhere in the crate.

use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Rat, RatPoly};

/// Rule producing the members in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Generator {
    /// d^0, d^1, d^2, ... for a base d >= 2.
    Power { base: BigInt },
    /// The set {1, 2, 3, 5, 8, 13, ...} (the duplicate leading 1 is dropped).
    Fibonacci,
    /// The set of factorials {1, 2, 6, 24, ...} (0! and 1! collapse).
    Factorial,
    /// Homogeneous linear recurrence r_n = c_1 r_{n-1} + ... + c_k r_{n-k}.
    Recurrence { coeffs: Vec<BigInt>, init: Vec<BigInt> },
    /// Explicit finite list, strictly increasing.
    Explicit { terms: Vec<BigInt> },
}

/// Limit of r_{n+1}/r_n, as far as the caller is willing to certify it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Theta {
    Rational { p: BigInt, q: BigInt },
    /// Root of `minpoly` isolated inside (lo, hi), lo > 1.
    Algebraic { minpoly: Vec<BigInt>, lo: Rat, hi: Rat },
    Infinity,
    /// No claim; only window heuristics apply.
    Empirical,
}

/// Rational q > 1 with r_{m+1}/r_m >= q for all m >= from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailRatio {
    pub ratio: Rat,
    pub from: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthProfile {
    pub theta: Theta,
    pub tail_ratio: Option<TailRatio>,
}

impl GrowthProfile {
    pub fn validate(&self) -> Result<()> {
        match &self.theta {
            Theta::Rational { p, q } => {
                if q.is_zero() || !q.is_positive() {
                    return Err(Error::InvalidProfile("rational theta needs q >= 1".into()));
                }
                if BigRational::new(p.clone(), q.clone()) <= BigRational::one() {
                    return Err(Error::InvalidProfile("theta must exceed 1".into()));
                }
            }
            Theta::Algebraic { minpoly, lo, hi } => {
                let f = RatPoly::from_int(minpoly);
                match f.degree() {
                    None | Some(0) => {
                        return Err(Error::InvalidProfile("minpoly must have degree >= 1".into()))
                    }
                    _ => {}
                }
                if *lo <= Rat::one() {
                    return Err(Error::InvalidProfile("isolating interval must sit above 1".into()));
                }
                if lo >= hi {
                    return Err(Error::InvalidProfile("empty isolating interval".into()));
                }
                if f.eval(lo).is_zero() || f.eval(hi).is_zero() {
                    return Err(Error::InvalidProfile(
                        "isolating endpoints must not be roots".into(),
                    ));
                }
                if f.count_roots(lo, hi) != 1 {
                    return Err(Error::InvalidProfile(
                        "isolating interval must contain exactly one root".into(),
                    ));
                }
            }
            Theta::Infinity | Theta::Empirical => {}
        }
        if let Some(tr) = &self.tail_ratio {
            if tr.ratio <= Rat::one() {
                return Err(Error::InvalidProfile("tail ratio must exceed 1".into()));
            }
        }
        Ok(())
    }

    /// Minimal polynomial view of theta when it is finite.
    pub fn theta_poly(&self) -> Option<(RatPoly, Rat, Rat)> {
        match &self.theta {
            Theta::Rational { p, q } => {
                let f = RatPoly::from_int(&[-p.clone(), q.clone()]);
                let root = BigRational::new(p.clone(), q.clone());
                Some((f, root.clone(), root))
            }
            Theta::Algebraic { minpoly, lo, hi } => {
                Some((RatPoly::from_int(minpoly), lo.clone(), hi.clone()))
            }
            _ => None,
        }
    }
}

/// A sparse predicate with its enumeration cache.
pub struct Predicate {
    gen: Generator,
    profile: Option<GrowthProfile>,
    cache: RwLock<Vec<BigInt>>,
}

impl std::fmt::Debug for Predicate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Predicate").field("gen", &self.gen).finish()
    }
}

impl Predicate {
    pub fn new(gen: Generator, profile: Option<GrowthProfile>) -> Result<Arc<Self>> {
        match &gen {
            Generator::Power { base } => {
                if *base < BigInt::from(2) {
                    return Err(Error::InvalidPredicate("power base must be >= 2".into()));
                }
            }
            Generator::Recurrence { coeffs, init } => {
                if coeffs.is_empty() || init.len() != coeffs.len() {
                    return Err(Error::InvalidPredicate(
                        "recurrence needs init of the same length as coeffs".into(),
                    ));
                }
                let mut prev: Option<&BigInt> = None;
                for t in init {
                    if t.is_negative() {
                        return Err(Error::InvalidPredicate("negative initial term".into()));
                    }
                    if let Some(p) = prev {
                        if t <= p {
                            return Err(Error::InvalidPredicate(
                                "initial terms must strictly increase".into(),
                            ));
                        }
                    }
                    prev = Some(t);
                }
            }
            Generator::Explicit { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidPredicate("empty explicit predicate".into()));
                }
                let mut prev: Option<&BigInt> = None;
                for t in terms {
                    if t.is_negative() {
                        return Err(Error::InvalidPredicate("negative term".into()));
                    }
                    if let Some(p) = prev {
                        if t <= p {
                            return Err(Error::InvalidPredicate(
                                "terms must strictly increase".into(),
                            ));
                        }
                    }
                    prev = Some(t);
                }
            }
            _ => {}
        }
        if let Some(p) = &profile {
            p.validate()?;
        }
        Ok(Arc::new(Predicate {
            gen,
            profile,
            cache: RwLock::new(Vec::new()),
        }))
    }

    /// d^n for d >= 2, with the exact rational profile.
    pub fn power(d: i64) -> Arc<Self> {
        let base = BigInt::from(d);
        Self::new(
            Generator::Power { base: base.clone() },
            Some(GrowthProfile {
                theta: Theta::Rational {
                    p: base.clone(),
                    q: BigInt::one(),
                },
                tail_ratio: Some(TailRatio {
                    ratio: Rat::from_integer(base),
                    from: 0,
                }),
            }),
        )
        .expect("power predicate")
    }

    /// {1, 2, 3, 5, 8, ...} with theta = golden ratio certified by x^2 - x - 1.
    pub fn fibonacci() -> Arc<Self> {
        Self::new(
            Generator::Fibonacci,
            Some(GrowthProfile {
                theta: Theta::Algebraic {
                    minpoly: vec![BigInt::from(-1), BigInt::from(-1), BigInt::one()],
                    lo: Rat::new(BigInt::from(8), BigInt::from(5)),
                    hi: Rat::new(BigInt::from(5), BigInt::from(3)),
                },
                tail_ratio: Some(TailRatio {
                    ratio: Rat::new(BigInt::from(3), BigInt::from(2)),
                    from: 0,
                }),
            }),
        )
        .expect("fibonacci predicate")
    }

    /// {1, 2, 6, 24, ...} with theta = infinity.
    pub fn factorial() -> Arc<Self> {
        Self::new(
            Generator::Factorial,
            Some(GrowthProfile {
                theta: Theta::Infinity,
                tail_ratio: Some(TailRatio {
                    ratio: Rat::from_integer(BigInt::from(2)),
                    from: 0,
                }),
            }),
        )
        .expect("factorial predicate")
    }

    pub fn recurrence(coeffs: Vec<i64>, init: Vec<i64>) -> Result<Arc<Self>> {
        Self::new(
            Generator::Recurrence {
                coeffs: coeffs.into_iter().map(BigInt::from).collect(),
                init: init.into_iter().map(BigInt::from).collect(),
            },
            None,
        )
    }

    pub fn explicit(terms: Vec<BigInt>) -> Result<Arc<Self>> {
        Self::new(Generator::Explicit { terms }, None)
    }

    /// Replace the growth profile (builder style).
    pub fn with_profile(self: &Arc<Self>, profile: Option<GrowthProfile>) -> Result<Arc<Self>> {
        if let Some(p) = &profile {
            p.validate()?;
        }
        Self::new(self.gen.clone(), profile)
    }

    pub fn generator(&self) -> &Generator {
        &self.gen
    }

    pub fn profile(&self) -> Option<&GrowthProfile> {
        self.profile.as_ref()
    }

    /// Number of members for finite predicates.
    pub fn finite_len(&self) -> Option<usize> {
        match &self.gen {
            Generator::Explicit { terms } => Some(terms.len()),
            _ => None,
        }
    }

    /// Extend the cache through index `n`. Concurrent calls are safe; one
    /// writer extends at a time.
    pub fn ensure(&self, n: usize) -> Result<()> {
        {
            let cache = self.cache.read().unwrap();
            if cache.len() > n {
                return Ok(());
            }
        }
        let mut cache = self.cache.write().unwrap();
        while cache.len() <= n {
            let next = self.generate(&cache, cache.len())?;
            if let Some(last) = cache.last() {
                if next <= *last {
                    return Err(Error::InvalidPredicate(format!(
                        "sequence not strictly increasing at index {}",
                        cache.len()
                    )));
                }
            }
            if next.is_negative() {
                return Err(Error::InvalidPredicate(format!(
                    "negative term at index {}",
                    cache.len()
                )));
            }
            cache.push(next);
        }
        Ok(())
    }

    fn generate(&self, cache: &[BigInt], idx: usize) -> Result<BigInt> {
        Ok(match &self.gen {
            Generator::Power { base } => base.pow(idx as u32),
            Generator::Fibonacci => match idx {
                0 => BigInt::one(),
                1 => BigInt::from(2),
                _ => &cache[idx - 1] + &cache[idx - 2],
            },
            Generator::Factorial => match idx {
                0 => BigInt::one(),
                _ => &cache[idx - 1] * BigInt::from(idx as u64 + 1),
            },
            Generator::Recurrence { coeffs, init } => {
                if idx < init.len() {
                    init[idx].clone()
                } else {
                    let mut acc = BigInt::zero();
                    for (j, c) in coeffs.iter().enumerate() {
                        acc += c * &cache[idx - 1 - j];
                    }
                    acc
                }
            }
            Generator::Explicit { terms } => terms
                .get(idx)
                .cloned()
                .ok_or(Error::SequenceExhausted(idx))?,
        })
    }

    /// r_n.
    pub fn nth(&self, n: usize) -> Result<BigInt> {
        self.ensure(n)?;
        Ok(self.cache.read().unwrap()[n].clone())
    }

    pub fn min_element(&self) -> BigInt {
        self.nth(0).expect("a predicate has at least one member")
    }

    /// Index of `z` if it is a member.
    pub fn index_of(&self, z: &BigInt) -> Result<Option<usize>> {
        if z.is_negative() {
            return Ok(None);
        }
        let mut n = {
            let cache = self.cache.read().unwrap();
            cache.len()
        };
        if n == 0 {
            self.ensure(0)?;
            n = 1;
        }
        loop {
            {
                let cache = self.cache.read().unwrap();
                if cache.last().unwrap() >= z {
                    return Ok(cache.binary_search(z).ok());
                }
            }
            n *= 2;
            match self.ensure(n) {
                Ok(()) => {}
                Err(Error::SequenceExhausted(_)) => {
                    let cache = self.cache.read().unwrap();
                    return Ok(cache.binary_search(z).ok());
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn contains(&self, z: &BigInt) -> Result<bool> {
        Ok(self.index_of(z)?.is_some())
    }

    /// Clamped index shift: negative shifts stop at 0.
    pub fn shift_index(&self, idx: usize, k: i64) -> usize {
        if k >= 0 {
            idx + k as usize
        } else {
            idx.saturating_sub((-k) as usize)
        }
    }

    /// k-fold successor of a member (k may be negative; predecessors clamp
    /// at the least member).
    pub fn successor(&self, z: &BigInt, k: i64) -> Result<BigInt> {
        let idx = self
            .index_of(z)?
            .ok_or_else(|| Error::NotAMember(z.clone()))?;
        self.nth(self.shift_index(idx, k))
    }

    /// Minimal (start, period) of the residues mod m: residues repeat with
    /// period d from index N on, with at least two full periods visible.
    /// Minimizes d first, then N.
    pub fn congruence_period(&self, m: &BigInt, horizon: usize) -> Result<(usize, usize)> {
        if *m < BigInt::one() {
            return Err(Error::InvalidModulus(m.clone()));
        }
        self.ensure_available(horizon)?;
        let cache = self.cache.read().unwrap();
        let h = horizon.min(cache.len() - 1);
        let res: Vec<BigInt> = cache[..=h].iter().map(|r| r.mod_floor(m)).collect();
        for d in 1..=h / 2 {
            let mut start = 0;
            for n in (0..=h.saturating_sub(d)).rev() {
                if res[n + d] != res[n] {
                    start = n + 1;
                    break;
                }
            }
            let verified = h.saturating_sub(start);
            if verified >= 2 * d && (start..=h - d).all(|n| res[n + d] == res[n]) {
                return Ok((start, d));
            }
        }
        Err(Error::NoCongruencePeriod {
            modulus: m.clone(),
            horizon,
        })
    }

    /// Largest materialized index not exceeding `n`; finite predicates may
    /// stop short of `n`.
    pub fn max_index_within(&self, n: usize) -> Result<usize> {
        self.ensure_available(n)?;
        Ok((self.cache.read().unwrap().len() - 1).min(n))
    }

    /// Like `ensure` but finite predicates stop quietly at their end.
    fn ensure_available(&self, n: usize) -> Result<()> {
        match self.ensure(n) {
            Ok(()) => Ok(()),
            Err(Error::SequenceExhausted(_)) => {
                let len = self.cache.read().unwrap().len();
                if len == 0 {
                    self.ensure(0)
                } else {
                    Ok(())
                }
            }
            Err(e) => Err(e),
        }
    }

    /// Check the declared growth profile against the window [0, horizon].
    pub fn check_regular_window(&self, horizon: usize) -> Result<RegularReport> {
        self.ensure_available(horizon)?;
        let cache = self.cache.read().unwrap();
        let h = horizon.min(cache.len() - 1);
        let ratios: Vec<(usize, Rat)> = (0..h)
            .map(|n| {
                (
                    n,
                    BigRational::new(cache[n + 1].clone(), cache[n].clone().max(BigInt::one())),
                )
            })
            .collect();
        let verdict = match self.profile.as_ref().map(|p| &p.theta) {
            None | Some(Theta::Empirical) => RegularVerdict::Inconclusive,
            Some(Theta::Rational { p, q }) => {
                Self::recurrence_verdict(&cache[..=h], &[-p.clone(), q.clone()])
            }
            Some(Theta::Algebraic { minpoly, .. }) => {
                Self::recurrence_verdict(&cache[..=h], minpoly)
            }
            Some(Theta::Infinity) => {
                let from = self
                    .profile
                    .as_ref()
                    .and_then(|p| p.tail_ratio.as_ref())
                    .map_or(0, |t| t.from);
                let tail: Vec<_> = ratios.iter().filter(|(n, _)| *n >= from).collect();
                if tail.windows(2).all(|w| w[0].1 <= w[1].1) {
                    RegularVerdict::Consistent
                } else {
                    RegularVerdict::Inconclusive
                }
            }
        };
        Ok(RegularReport { ratios, verdict })
    }

    fn recurrence_verdict(window: &[BigInt], coeffs: &[BigInt]) -> RegularVerdict {
        let deg = coeffs.len() - 1;
        if window.len() <= deg {
            return RegularVerdict::Inconclusive;
        }
        for n in 0..window.len() - deg {
            let mut acc = BigInt::zero();
            for (i, c) in coeffs.iter().enumerate() {
                acc += c * &window[n + i];
            }
            if !acc.is_zero() {
                return RegularVerdict::Refuted {
                    index: n,
                    residual: acc,
                };
            }
        }
        RegularVerdict::Consistent
    }

    /// Re-verify the declared tail ratio bound on the cached window.
    pub fn verify_tail_ratio(&self, horizon: usize) -> Result<()> {
        let Some(tr) = self.profile.as_ref().and_then(|p| p.tail_ratio.as_ref()) else {
            return Err(Error::InvalidProfile("no tail ratio bound declared".into()));
        };
        self.ensure_available(horizon)?;
        let cache = self.cache.read().unwrap();
        let h = horizon.min(cache.len() - 1);
        for m in tr.from..h {
            let ratio = BigRational::new(cache[m + 1].clone(), cache[m].clone().max(BigInt::one()));
            if ratio < tr.ratio {
                return Err(Error::TailRatioViolated {
                    index: m,
                    ratio: ratio.to_string(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegularVerdict {
    /// The window does not refute the declared growth profile.
    Consistent,
    /// The declared recurrence fails at `index` with this nonzero residual.
    Refuted { index: usize, residual: BigInt },
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct RegularReport {
    pub ratios: Vec<(usize, Rat)>,
    pub verdict: RegularVerdict,
}

/// Arithmetic subsequence r_N, r_{N+d}, r_{N+2d}, ... of a base predicate.
#[derive(Clone, Debug)]
pub struct SubPredicate {
    base: Arc<Predicate>,
    start: usize,
    step: usize,
}

impl SubPredicate {
    pub fn new(base: Arc<Predicate>, start: usize, step: usize) -> Result<Self> {
        if step == 0 {
            return Err(Error::InvalidPredicate("subsequence step must be >= 1".into()));
        }
        Ok(SubPredicate { base, start, step })
    }

    /// The whole predicate as a trivial subsequence.
    pub fn full(base: Arc<Predicate>) -> Self {
        SubPredicate {
            base,
            start: 0,
            step: 1,
        }
    }

    /// Build from the congruence period of the base mod m.
    pub fn from_congruence_period(
        base: Arc<Predicate>,
        m: &BigInt,
        horizon: usize,
    ) -> Result<Self> {
        let (start, step) = base.congruence_period(m, horizon)?;
        SubPredicate::new(base, start, step.max(1))
    }

    pub fn base(&self) -> &Arc<Predicate> {
        &self.base
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Base enumeration index of the t-th subsequence member.
    pub fn base_index(&self, t: usize) -> usize {
        self.start + self.step * t
    }

    /// t-th member: r_{start + step * t} of the base.
    pub fn nth(&self, t: usize) -> Result<BigInt> {
        self.base.nth(self.base_index(t))
    }

    /// Largest subsequence index whose member is materializable within base
    /// index `horizon`.
    pub fn max_index_within(&self, horizon: usize) -> Result<usize> {
        let m = self.base.max_index_within(self.start + self.step * horizon)?;
        if m < self.start {
            return Err(Error::HorizonTooSmall(format!(
                "base predicate ends at index {m}, before the subsequence start {}",
                self.start
            )));
        }
        Ok((m - self.start) / self.step)
    }

    pub fn min_element(&self) -> BigInt {
        self.nth(0).expect("nonempty")
    }

    /// Subsequence index of `z`, if a member.
    pub fn index_of(&self, z: &BigInt) -> Result<Option<usize>> {
        match self.base.index_of(z)? {
            Some(i) if i >= self.start && (i - self.start) % self.step == 0 => {
                Ok(Some((i - self.start) / self.step))
            }
            _ => Ok(None),
        }
    }

    pub fn contains(&self, z: &BigInt) -> Result<bool> {
        Ok(self.index_of(z)?.is_some())
    }

    /// k-fold successor inside the subsequence (clamping at its least member).
    pub fn successor(&self, z: &BigInt, k: i64) -> Result<BigInt> {
        let t = self
            .index_of(z)?
            .ok_or_else(|| Error::NotAMember(z.clone()))?;
        let t2 = if k >= 0 {
            t + k as usize
        } else {
            t.saturating_sub((-k) as usize)
        };
        self.nth(t2)
    }

    /// Membership of a base member via the congruence shape: z >= r_N and
    /// the first `step` successors of z match those of r_N mod m.
    pub fn congruence_membership(&self, z: &BigInt, m: &BigInt) -> Result<bool> {
        if *m < BigInt::one() {
            return Err(Error::InvalidModulus(m.clone()));
        }
        let anchor = self.min_element();
        if z < &anchor {
            return Ok(false);
        }
        if self.base.index_of(z)?.is_none() {
            return Ok(false);
        }
        for p in 0..self.step {
            let a = self.base.successor(z, p as i64)?;
            let b = self.base.successor(&anchor, p as i64)?;
            if a.mod_floor(m) != b.mod_floor(m) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Serialization shape for predicates (decimal-string integers accepted too).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredicateSpec {
    Power {
        #[serde(with = "crate::jsonint")]
        base: BigInt,
    },
    Fibonacci,
    Factorial,
    Recurrence {
        #[serde(with = "crate::jsonint::vec")]
        coeffs: Vec<BigInt>,
        #[serde(with = "crate::jsonint::vec")]
        init: Vec<BigInt>,
    },
    Explicit {
        #[serde(with = "crate::jsonint::vec")]
        terms: Vec<BigInt>,
    },
}

/// Serialization shape for growth profiles.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "theta", rename_all = "snake_case")]
pub enum ProfileSpec {
    Rational {
        #[serde(with = "crate::jsonint")]
        p: BigInt,
        #[serde(with = "crate::jsonint")]
        q: BigInt,
    },
    Algebraic {
        #[serde(with = "crate::jsonint::vec")]
        minpoly: Vec<BigInt>,
        /// Isolating interval endpoints as "num/den" strings.
        interval: [String; 2],
    },
    Infinity,
    Empirical,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PredicateFile {
    #[serde(flatten)]
    pub spec: PredicateSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    /// Optional "num/den" tail ratio with its verified-from index.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_ratio: Option<(String, usize)>,
}

fn parse_rat(s: &str) -> Result<Rat> {
    let parts: Vec<&str> = s.split('/').collect();
    let bad = || Error::BadInput(format!("cannot parse rational {s:?}"));
    match parts.as_slice() {
        [n] => Ok(Rat::from_integer(n.trim().parse().map_err(|_| bad())?)),
        [n, d] => Ok(Rat::new(
            n.trim().parse().map_err(|_| bad())?,
            d.trim().parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

impl PredicateFile {
    pub fn build(&self) -> Result<Arc<Predicate>> {
        let gen = match &self.spec {
            PredicateSpec::Power { base } => Generator::Power { base: base.clone() },
            PredicateSpec::Fibonacci => Generator::Fibonacci,
            PredicateSpec::Factorial => Generator::Factorial,
            PredicateSpec::Recurrence { coeffs, init } => Generator::Recurrence {
                coeffs: coeffs.clone(),
                init: init.clone(),
            },
            PredicateSpec::Explicit { terms } => Generator::Explicit {
                terms: terms.clone(),
            },
        };
        let tail_ratio = match &self.tail_ratio {
            Some((r, from)) => Some(TailRatio {
                ratio: parse_rat(r)?,
                from: *from,
            }),
            None => None,
        };
        let profile = match &self.profile {
            None => {
                // Fall back to the built-in defaults for the stock generators.
                let default = match &gen {
                    Generator::Power { base } => {
                        let mut d = 0i64;
                        if let Ok(v) = i64::try_from(base.clone()) {
                            d = v;
                        }
                        if d >= 2 {
                            Predicate::power(d).profile.clone()
                        } else {
                            None
                        }
                    }
                    Generator::Fibonacci => Predicate::fibonacci().profile.clone(),
                    Generator::Factorial => Predicate::factorial().profile.clone(),
                    _ => None,
                };
                match (default, tail_ratio) {
                    (Some(mut p), Some(tr)) => {
                        p.tail_ratio = Some(tr);
                        Some(p)
                    }
                    (p, None) => p,
                    (None, Some(tr)) => Some(GrowthProfile {
                        theta: Theta::Empirical,
                        tail_ratio: Some(tr),
                    }),
                }
            }
            Some(spec) => {
                let theta = match spec {
                    ProfileSpec::Rational { p, q } => Theta::Rational {
                        p: p.clone(),
                        q: q.clone(),
                    },
                    ProfileSpec::Algebraic { minpoly, interval } => Theta::Algebraic {
                        minpoly: minpoly.clone(),
                        lo: parse_rat(&interval[0])?,
                        hi: parse_rat(&interval[1])?,
                    },
                    ProfileSpec::Infinity => Theta::Infinity,
                    ProfileSpec::Empirical => Theta::Empirical,
                };
                Some(GrowthProfile { theta, tail_ratio })
            }
        };
        Predicate::new(gen, profile)
    }

    pub fn from_predicate(p: &Predicate) -> Self {
        let spec = match p.generator() {
            Generator::Power { base } => PredicateSpec::Power { base: base.clone() },
            Generator::Fibonacci => PredicateSpec::Fibonacci,
            Generator::Factorial => PredicateSpec::Factorial,
            Generator::Recurrence { coeffs, init } => PredicateSpec::Recurrence {
                coeffs: coeffs.clone(),
                init: init.clone(),
            },
            Generator::Explicit { terms } => PredicateSpec::Explicit {
                terms: terms.clone(),
            },
        };
        PredicateFile {
            spec,
            profile: None,
            tail_ratio: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn nth_builtins() {
        assert_eq!(Predicate::power(2).nth(5).unwrap(), big(32));
        assert_eq!(Predicate::fibonacci().nth(4).unwrap(), big(8));
        // factorial as a set: 1, 2, 6, 24
        let f = Predicate::factorial();
        assert_eq!(f.nth(2).unwrap(), big(6));
        assert_eq!(f.nth(3).unwrap(), big(24));
    }

    #[test]
    fn explicit_out_of_range() {
        let p = Predicate::explicit(vec![big(1), big(4), big(9)]).unwrap();
        assert_eq!(p.nth(2).unwrap(), big(9));
        assert!(matches!(p.nth(3), Err(Error::SequenceExhausted(3))));
    }

    #[test]
    fn successor_clamps_at_minimum() {
        let p = Predicate::power(2);
        assert_eq!(p.successor(&big(8), 1).unwrap(), big(16));
        assert_eq!(p.successor(&big(8), -2).unwrap(), big(2));
        assert_eq!(p.successor(&big(1), -1).unwrap(), big(1));
        assert_eq!(p.successor(&big(2), -5).unwrap(), big(1));
        assert!(matches!(
            p.successor(&big(3), 1),
            Err(Error::NotAMember(_))
        ));
    }

    #[test]
    fn congruence_periods() {
        let p2 = Predicate::power(2);
        assert_eq!(p2.congruence_period(&big(3), 50).unwrap(), (0, 2));
        assert_eq!(p2.congruence_period(&big(2), 50).unwrap(), (1, 1));
        // factorial set residues mod 6: 1, 2, 0, 0, ...
        let f = Predicate::factorial();
        assert_eq!(f.congruence_period(&big(6), 50).unwrap(), (2, 1));
    }

    #[test]
    fn regular_window_verdicts() {
        assert_eq!(
            Predicate::fibonacci()
                .check_regular_window(40)
                .unwrap()
                .verdict,
            RegularVerdict::Consistent
        );
        assert_eq!(
            Predicate::power(2).check_regular_window(40).unwrap().verdict,
            RegularVerdict::Consistent
        );
        assert_eq!(
            Predicate::factorial()
                .check_regular_window(40)
                .unwrap()
                .verdict,
            RegularVerdict::Consistent
        );
        // 2^n + 1 does not satisfy the power-of-two recurrence: refuted at 0.
        let p = Predicate::recurrence(vec![3, -2], vec![2, 3]).unwrap();
        let claimed = p
            .with_profile(Some(GrowthProfile {
                theta: Theta::Rational {
                    p: big(2),
                    q: big(1),
                },
                tail_ratio: None,
            }))
            .unwrap();
        match claimed.check_regular_window(40).unwrap().verdict {
            RegularVerdict::Refuted { index, residual } => {
                assert_eq!(index, 0);
                assert_eq!(residual, big(-1));
            }
            v => panic!("expected refutation, got {v:?}"),
        }
    }

    #[test]
    fn subsequence_membership_matches_congruence_shape() {
        let p2 = Predicate::power(2);
        let sub = SubPredicate::from_congruence_period(p2.clone(), &big(3), 50).unwrap();
        assert_eq!((sub.start(), sub.step()), (0, 2));
        assert_eq!(sub.nth(0).unwrap(), big(1));
        assert_eq!(sub.nth(2).unwrap(), big(16));
        for idx in 0..14usize {
            let z = p2.nth(idx).unwrap();
            assert_eq!(
                sub.contains(&z).unwrap(),
                sub.congruence_membership(&z, &big(3)).unwrap(),
                "mismatch at index {idx}"
            );
        }
    }

    #[test]
    fn tail_ratio_verification() {
        Predicate::power(2).verify_tail_ratio(64).unwrap();
        Predicate::fibonacci().verify_tail_ratio(64).unwrap();
        Predicate::factorial().verify_tail_ratio(30).unwrap();
        let lying = Predicate::fibonacci()
            .with_profile(Some(GrowthProfile {
                theta: Theta::Empirical,
                tail_ratio: Some(TailRatio {
                    ratio: Rat::new(big(17), big(10)),
                    from: 0,
                }),
            }))
            .unwrap();
        assert!(matches!(
            lying.verify_tail_ratio(30),
            Err(Error::TailRatioViolated { .. })
        ));
    }
}
