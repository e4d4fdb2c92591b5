//! Exact rational arithmetic for the regularity bootstrap: gain factors, admissible ranges,
//! ε-conditions, integrability targets, iteration schedules, the high-α branch and the
//! modified-SQG range. No floating point enters any decision here; `decimal` fields are
//! renderings of exact values.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Reduced fraction with positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn integer(n: i64) -> Self {
        Self(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Nearest `f64`, for consumers outside this module.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn recip(&self) -> Self {
        Self(self.0.recip())
    }

    pub fn pow(&self, k: i32) -> Self {
        Self(num_traits::pow::Pow::pow(&self.0, k))
    }

    /// Smallest integer `≥ self`.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Exact decimal rendering with `digits` fractional digits, rounded half away from zero,
    /// trailing zeros trimmed.
    pub fn decimal(&self, digits: u32) -> String {
        let scale = num_traits::pow::pow(BigInt::from(10), digits as usize);
        let scaled = &self.0 * BigRational::from_integer(scale.clone());
        let rounded = scaled.round().to_integer();
        let negative = rounded.is_negative();
        let (int, frac) = rounded.abs().div_rem(&scale);
        let mut frac = format!("{:0>width$}", frac.to_string(), width = digits as usize);
        while frac.ends_with('0') {
            frac.pop();
        }
        let sign = if negative { "-" } else { "" };
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"a/b"` or an integer, with optional sign and surrounding whitespace.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("{s:?} is not a rational of the form a/b"));
        let s_trim = s.trim();
        let (num, den) = match s_trim.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s_trim, "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Self(BigRational::new(num, den)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Rational", 3)?;
        st.serialize_field("num", &self.0.numer().to_string())?;
        st.serialize_field("den", &self.0.denom().to_string())?;
        st.serialize_field("decimal", &self.decimal(15))?;
        st.end()
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational(std::ops::$tr::$m(&self.0, &rhs.0))
            }
        }
        impl std::ops::$tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(std::ops::$tr::$m(self.0, rhs.0))
            }
        }
        impl std::ops::$tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational(std::ops::$tr::$m(self.0, &rhs.0))
            }
        }
        impl std::ops::$tr<Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(std::ops::$tr::$m(&self.0, rhs.0))
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl std::ops::Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl std::ops::Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn int(n: i64) -> Rational {
    Rational::integer(n)
}

fn min(a: Rational, b: Rational) -> Rational {
    if a <= b {
        a
    } else {
        b
    }
}

fn low_alpha_domain(alpha: &Rational) -> Result<()> {
    if alpha.is_positive() && *alpha < q(1, 2) {
        Ok(())
    } else {
        let hint = if *alpha == q(1, 2) {
            " (α = 1/2 reduces through effective_alpha)"
        } else {
            ""
        };
        Err(Error::Domain(format!("α = {alpha} is outside (0, 1/2){hint}")))
    }
}

fn dimension(d: u32) -> Result<Rational> {
    if d == 2 || d == 3 {
        Ok(int(d as i64))
    } else {
        Err(Error::Domain(format!("dimension d = {d} is not 2 or 3")))
    }
}

/// `m_α = (1 − α)/(1 − 2α)` for `α ∈ (0, 1/2)`; always `> 1`.
pub fn gain_factor(alpha: &Rational) -> Result<Rational> {
    low_alpha_domain(alpha)?;
    let m = (int(1) - alpha) / (int(1) - int(2) * alpha);
    debug_assert!(m > int(1));
    Ok(m)
}

/// The open interval `(p, m_α p)` of admissible `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QRange {
    pub alpha: Rational,
    pub p: Rational,
    pub m_alpha: Rational,
    pub lower: Rational,
    pub upper: Rational,
}

/// Exponents governing the paraproduct bounds at a given `(α, p, q)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignChain {
    pub q: Rational,
    /// `1 − p/q − α(1 − p/q)`: low-frequency sum exponent, positive iff `q > p`.
    pub low_sum: Rational,
    /// `1 − α − p/q − α(1 − p/q)`: high-frequency sum exponent.
    pub high_sum: Rational,
    /// `−α(1 − p/q)`.
    pub first_term: Rational,
    /// `1 − α(1 − p/q)`.
    pub first_term_shifted: Rational,
    /// `3 − α − p/q − α(1 − p/q)`.
    pub forcing_shifted: Rational,
    /// `−α < high_sum < 0`.
    pub chain_holds: bool,
    /// `first_term < 0`, `first_term_shifted > 0`, `high_sum < 0`, `forcing_shifted > 0`.
    pub four_signs: [bool; 4],
}

impl SignChain {
    pub fn all_hold(&self) -> bool {
        self.chain_holds && self.four_signs.iter().all(|b| *b)
    }
}

impl QRange {
    pub fn contains(&self, q_val: &Rational) -> bool {
        *q_val > self.lower && *q_val < self.upper
    }

    /// Evaluates the sign conditions at `q`; they all hold exactly when `q ∈ (p, m_α p)`.
    pub fn sign_chain(&self, q_val: &Rational) -> SignChain {
        sign_chain(&self.alpha, &self.p, q_val)
    }

    /// Like [`QRange::sign_chain`] but errors with the violated inequality when `q` is outside.
    pub fn require(&self, q_val: &Rational) -> Result<SignChain> {
        let chain = self.sign_chain(q_val);
        if self.contains(q_val) && chain.all_hold() {
            Ok(chain)
        } else {
            Err(Error::Precondition(format!(
                "q = {q_val} outside ({}, {}): −α < 1−α−p/q−α(1−p/q) < 0 fails with \
                 1−α−p/q−α(1−p/q) = {} at α = {}, p = {}",
                self.lower, self.upper, chain.high_sum, self.alpha, self.p
            )))
        }
    }
}

pub fn sign_chain(alpha: &Rational, p: &Rational, q_val: &Rational) -> SignChain {
    let r = p / q_val;
    let one = int(1);
    let gap = &one - &r;
    let low_sum = &gap - alpha * &gap;
    let high_sum = &low_sum - alpha;
    let first_term = -(alpha * &gap);
    let first_term_shifted = &one - alpha * &gap;
    let forcing_shifted = &high_sum + int(2);
    let chain_holds = -alpha.clone() < high_sum && high_sum < Rational::zero();
    SignChain {
        q: q_val.clone(),
        four_signs: [
            first_term.is_negative(),
            first_term_shifted.is_positive(),
            high_sum.is_negative(),
            forcing_shifted.is_positive(),
        ],
        chain_holds,
        low_sum,
        high_sum,
        first_term,
        first_term_shifted,
        forcing_shifted,
    }
}

/// `(p, m_α p)` for `α ∈ (0, 1/2)` and `p ≥ 2`.
pub fn q_range(alpha: &Rational, p: &Rational) -> Result<QRange> {
    let m = gain_factor(alpha)?;
    if *p < int(2) {
        return Err(Error::Domain(format!("p = {p} is below 2")));
    }
    Ok(QRange {
        alpha: alpha.clone(),
        p: p.clone(),
        upper: &m * p,
        lower: p.clone(),
        m_alpha: m,
    })
}

/// One ε-condition evaluated at `ε = ε_α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonCondition {
    pub name: &'static str,
    /// Left-hand expression value at `ε_α`.
    pub value: Rational,
    /// Required sign: `"< 0"` or `"> 0"`.
    pub requirement: &'static str,
    pub holds: bool,
    /// Distance from the equivalent bound on `ε`; positive means strict with room to spare.
    pub margin: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub alpha: Rational,
    pub m_alpha: Rational,
    /// `α²/(2 − 3α)`.
    pub bound_first: Rational,
    /// `(1 − 2α)(2 − 3α − α²)/((1 − α)(2 − 3α))`.
    pub bound_third: Rational,
    /// `ε_α = min{bound_first, bound_third}/2`.
    pub value: Rational,
    /// The four conditions in the form that yields the closed-form bounds above.
    pub conditions: Vec<EpsilonCondition>,
    /// The third and fourth conditions re-derived with `p/q = 2/(1+m_α)` in every slot.
    pub rederived: Vec<EpsilonCondition>,
}

/// `ε_α` and the four conditions at `ε = ε_α`.
pub fn epsilon_alpha(alpha: &Rational) -> Result<EpsilonReport> {
    let m = gain_factor(alpha)?;
    let one = int(1);
    let two = int(2);
    let a = alpha;
    let a2 = a * a;
    let d = &two - int(3) * a;
    let bound_first = &a2 / &d;
    let bound_third = ((&one - &two * a) * (&d - &a2)) / ((&one - a) * &d);
    let value = min(bound_first.clone(), bound_third.clone()) / &two;
    assert!(value.is_positive(), "ε_α must be positive on (0, 1/2)");

    let r = &two / (&one + &m);
    let damping = a * (&one - &r);
    let forcing = a * (&two - &r);
    let e = &value;
    let lower_second = -((&d - &a2) / &d);
    let lower_fourth = -((&d + &a2 - &two * &a2 * a) / ((&one - a) * &d));
    let cond = |name, value: Rational, requirement, margin: Rational| EpsilonCondition {
        name,
        holds: if requirement == "< 0" {
            value.is_negative()
        } else {
            value.is_positive()
        },
        value,
        requirement,
        margin,
    };
    let conditions = vec![
        cond("first", e - &damping, "< 0", &bound_first - e),
        cond("second", &one + e - &damping, "> 0", e - &lower_second),
        cond(
            "third",
            e + &one - &two / &m - &forcing,
            "< 0",
            &bound_third - e,
        ),
        cond(
            "fourth",
            e + int(3) - &two / &m - &forcing,
            "> 0",
            e - &lower_fourth,
        ),
    ];
    let third_rederived = e + &one - &r - &forcing;
    let fourth_rederived = e + int(3) - &r - &forcing;
    let rederived = vec![
        cond("third", third_rederived.clone(), "< 0", -third_rederived),
        cond("fourth", fourth_rederived.clone(), "> 0", fourth_rederived),
    ];
    Ok(EpsilonReport {
        alpha: a.clone(),
        m_alpha: m,
        bound_first,
        bound_third,
        value,
        conditions,
        rederived,
    })
}

/// `p* = 2d/(ε_α(1 + m_α))`, checked to satisfy `p* ≥ 4d`.
pub fn p_star(alpha: &Rational, d: u32) -> Result<Rational> {
    let dd = dimension(d)?;
    let m = gain_factor(alpha)?;
    let eps = epsilon_alpha(alpha)?.value;
    let p = (int(2) * &dd) / (eps * (int(1) + m));
    if p < int(4) * &dd {
        return Err(Error::Domain(format!(
            "p* = {p} fell below 4d = {} at α = {alpha}",
            int(4) * &dd
        )));
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    LowAlpha,
    HighAlpha,
    Mqg,
}

/// `α ↦ α` below and above `1/2`; `1/2 ↦ 1/2 − 1/64`.
pub fn effective_alpha(alpha: &Rational) -> Result<(Rational, Branch)> {
    let half = q(1, 2);
    if !alpha.is_positive() || *alpha >= int(1) {
        return Err(Error::Domain(format!("α = {alpha} is outside (0, 1)")));
    }
    Ok(match alpha.cmp(&half) {
        Ordering::Less => (alpha.clone(), Branch::LowAlpha),
        Ordering::Equal => (half - q(1, 64), Branch::LowAlpha),
        Ordering::Greater => (alpha.clone(), Branch::HighAlpha),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleStep {
    pub p: Rational,
    pub q: Rational,
}

/// Parameters of the `α > 1/2` argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighAlphaPlan {
    /// `(4 + d)/(2α − 1)`.
    pub threshold: Rational,
    /// Least even integer strictly above the threshold.
    pub p: Rational,
    /// `α_p = (1 − 2/p)α`.
    pub alpha_p: Rational,
    /// `ε_p = (4α + d)/p`.
    pub epsilon_p: Rational,
    /// `2α − ε_p`, asserted `> 1`.
    pub target: Rational,
    /// `α + α_p`, asserted `> 1`.
    pub alpha_plus_alpha_p: Rational,
}

/// A full plan for one `(α, d)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapPlan {
    pub branch: Branch,
    pub alpha_input: Rational,
    pub alpha: Rational,
    pub d: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_alpha: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<EpsilonReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_star: Option<Rational>,
    /// Ratio `q_k/p_k = (1 + m_α)/2` used at every step.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_factor: Option<Rational>,
    pub schedule: Vec<ScheduleStep>,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub high_alpha: Option<HighAlphaPlan>,
    /// Regularity index reached: `1 + ε_α` (low branch) or `2α − ε_p` (high branch).
    pub target_index: Rational,
}

impl BootstrapPlan {
    /// Every `q_k ∈ (p_k, m_α p_k)` and the last exponent reaches `p*` (low branch only).
    pub fn is_sound(&self) -> bool {
        match (&self.m_alpha, &self.p_star) {
            (Some(m), Some(ps)) => {
                self.schedule
                    .iter()
                    .all(|s| s.q > s.p && s.q < m * &s.p)
                    && self.schedule.last().is_some_and(|s| s.q >= *ps)
                    && self.schedule.len() == self.iterations
            }
            _ => self.schedule.is_empty(),
        }
    }
}

/// Smallest `k` with `2·f^k ≥ target`, by exact repeated comparison.
fn iterations_needed(factor: &Rational, target: &Rational) -> usize {
    let goal = target / int(2);
    let mut power = Rational::one();
    let mut k = 0;
    while power < goal {
        power = &power * factor;
        k += 1;
    }
    k
}

/// Starting from `p₀ = 2`, `q_k = p_k(1 + m_α)/2`, `p_{k+1} = q_k`, until `p_k ≥ p*`.
pub fn bootstrap_schedule(alpha: &Rational, d: u32) -> Result<BootstrapPlan> {
    let m = gain_factor(alpha)?;
    let eps = epsilon_alpha(alpha)?;
    let ps = p_star(alpha, d)?;
    let factor = (int(1) + &m) / int(2);
    let mut schedule = Vec::new();
    let mut p = int(2);
    while p < ps {
        let q_next = &p * &factor;
        let range = q_range(alpha, &p)?;
        if !range.contains(&q_next) {
            return Err(Error::Domain(format!(
                "schedule step q = {q_next} left ({}, {})",
                range.lower, range.upper
            )));
        }
        schedule.push(ScheduleStep {
            p: p.clone(),
            q: q_next.clone(),
        });
        p = q_next;
    }
    let iterations = iterations_needed(&factor, &ps);
    if iterations != schedule.len() {
        return Err(Error::Domain(format!(
            "iteration count {iterations} disagrees with schedule length {}",
            schedule.len()
        )));
    }
    Ok(BootstrapPlan {
        branch: Branch::LowAlpha,
        alpha_input: alpha.clone(),
        alpha: alpha.clone(),
        d,
        target_index: int(1) + &eps.value,
        m_alpha: Some(m),
        epsilon: Some(eps),
        p_star: Some(ps),
        step_factor: Some(factor),
        schedule,
        iterations,
        high_alpha: None,
    })
}

/// The `α ∈ (1/2, 1)` branch: least even `p > (4 + d)/(2α − 1)` and the induced exponents.
pub fn high_alpha_plan(alpha: &Rational, d: u32) -> Result<HighAlphaPlan> {
    let dd = dimension(d)?;
    if *alpha <= q(1, 2) || *alpha >= int(1) {
        let hint = if *alpha == q(1, 2) {
            " (use effective_alpha for α = 1/2)"
        } else {
            ""
        };
        return Err(Error::Domain(format!(
            "α = {alpha} is outside (1/2, 1){hint}"
        )));
    }
    let one = int(1);
    let two = int(2);
    let threshold = (int(4) + &dd) / (&two * alpha - &one);
    let mut p = threshold.ceil();
    if Rational(BigRational::from_integer(p.clone())) == threshold {
        p += 1;
    }
    if p.is_odd() {
        p += 1;
    }
    let p = Rational(BigRational::from_integer(p));
    let alpha_p = (&one - &two / &p) * alpha;
    let epsilon_p = (int(4) * alpha + &dd) / &p;
    let target = &two * alpha - &epsilon_p;
    let alpha_plus_alpha_p = alpha + &alpha_p;
    if target <= one || alpha_plus_alpha_p <= one {
        return Err(Error::Domain(format!(
            "high-α plan at α = {alpha} failed: 2α − ε_p = {target}, α + α_p = {alpha_plus_alpha_p}"
        )));
    }
    Ok(HighAlphaPlan {
        threshold,
        p,
        alpha_p,
        epsilon_p,
        target,
        alpha_plus_alpha_p,
    })
}

/// Dispatches on `effective_alpha`: low branch schedule or high branch plan.
pub fn plan(alpha: &Rational, d: u32) -> Result<BootstrapPlan> {
    let (eff, branch) = effective_alpha(alpha)?;
    match branch {
        Branch::HighAlpha => {
            let high = high_alpha_plan(&eff, d)?;
            Ok(BootstrapPlan {
                branch,
                alpha_input: alpha.clone(),
                alpha: eff,
                d,
                m_alpha: None,
                epsilon: None,
                p_star: None,
                step_factor: None,
                schedule: Vec::new(),
                iterations: 0,
                target_index: high.target.clone(),
                high_alpha: Some(high),
            })
        }
        _ => {
            let mut plan = bootstrap_schedule(&eff, d)?;
            plan.alpha_input = alpha.clone();
            Ok(plan)
        }
    }
}

/// Admissible `q/p` window for the modified SQG equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MqgPlan {
    pub branch: Branch,
    pub alpha: Rational,
    pub beta: Rational,
    pub p: Rational,
    /// `min{(2 − β)/2, (β − 1)/2}`.
    pub threshold: Rational,
    pub above_threshold: bool,
    /// `(β/2 − α)/(β − 1 − α)`, when its denominator is positive.
    pub ratio_lower: Option<Rational>,
    /// `(β/2 − α)/(β/2 − 2α)`, when its denominator is positive.
    pub ratio_upper: Option<Rational>,
    /// `p·ratio_lower`, `p·ratio_upper`.
    pub q_lower: Option<Rational>,
    pub q_upper: Option<Rational>,
    /// Sign of `β − 1 − α`.
    pub lower_denominator_positive: bool,
    /// Sign of `β/2 − 2α` (positive iff `α < β/4`).
    pub upper_denominator_positive: bool,
    pub nonempty: bool,
    pub valid: bool,
    /// `"prior_criterion"` when `α > (β − 1)/2`, else `"extended_range"`.
    pub subcase: &'static str,
}

pub fn mqg_plan(alpha: &Rational, beta: &Rational, p: &Rational) -> Result<MqgPlan> {
    let one = int(1);
    let two = int(2);
    if *beta <= one || *beta >= two {
        return Err(Error::Domain(format!("β = {beta} is outside (1, 2)")));
    }
    if *p < two {
        return Err(Error::Domain(format!("p = {p} is below 2")));
    }
    let threshold = min((&two - beta) / &two, (beta - &one) / &two);
    let above_threshold = *alpha > threshold && *alpha < one;
    let num = beta / &two - alpha;
    let den_lower = beta - &one - alpha;
    let den_upper = beta / &two - &two * alpha;
    let lower_pos = den_lower.is_positive();
    let upper_pos = den_upper.is_positive();
    let ratio_lower = lower_pos.then(|| &num / &den_lower);
    let ratio_upper = upper_pos.then(|| &num / &den_upper);
    let nonempty = match (&ratio_lower, &ratio_upper) {
        (Some(l), Some(u)) => l < u,
        _ => false,
    };
    let subcase = if *alpha > (beta - &one) / &two {
        "prior_criterion"
    } else {
        "extended_range"
    };
    Ok(MqgPlan {
        branch: Branch::Mqg,
        alpha: alpha.clone(),
        beta: beta.clone(),
        p: p.clone(),
        q_lower: ratio_lower.as_ref().map(|r| r * p),
        q_upper: ratio_upper.as_ref().map(|r| r * p),
        threshold,
        above_threshold,
        ratio_lower,
        ratio_upper,
        lower_denominator_positive: lower_pos,
        upper_denominator_positive: upper_pos,
        nonempty,
        valid: above_threshold && nonempty,
        subcase,
    })
}

/// Exponent `1 − α − α_p` of the high-frequency tail in the `α > 1/2` argument.
pub fn tail_exponent(alpha: &Rational, p: &Rational) -> Rational {
    let alpha_p = (int(1) - int(2) / p) * alpha;
    int(1) - alpha - alpha_p
}

/// Prefactor exponents `(1 − α, 2 − α − p/q − α(1 − p/q), 1)` of the three `J` envelopes.
pub fn envelope_prefactors(alpha: &Rational, p: &Rational, q_val: &Rational) -> [Rational; 3] {
    let chain = sign_chain(alpha, p, q_val);
    [int(1) - alpha, chain.high_sum + int(1), int(1)]
}
