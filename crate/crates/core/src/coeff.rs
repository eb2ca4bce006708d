//! Exact scalar arithmetic for the engine.
//!
//! Every quantity is exact; no floating point anywhere.
//!
//! * [`Rat`]: machine-word rationals with checked (panicking) overflow.
//! * [`LaurentQ`]: sparse Laurent objects in the deformation parameter `q`
//!   with rational exponents and rational coefficients.
//! * [`RatQ`]: reduced fractions of two [`LaurentQ`] values. The canonical
//!   form has a gcd-free numerator/denominator pair and a denominator whose
//!   lowest exponent is `0` with coefficient `1`.
//! * [`Coeff`]: finite sums of phase monomials `p^g` (with `p = e^{i pi}`,
//!   so `p^(g+1) = -p^g` and the exponent is kept in `[0,1)`) times [`RatQ`]
//!   values. Phases arise from cocycle factors acting on weights.
//! * [`qint`]: the balanced q-integer `[m] = (q^m - q^-m)/(q - q^-1)`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let s = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << s;
        }
    }
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
        return gcd_u64(a as u64, b as u64) as u128;
    }
    let s = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << s;
        }
    }
}

/// Exact rational scalar backed by `i128` words, kept in lowest terms with a
/// positive denominator. All arithmetic is overflow-checked and panics
/// rather than wrapping, so results are exact or loudly absent.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rat {
    num: i128,
    den: i128,
}

impl Default for Rat {
    fn default() -> Self {
        Rat::zero()
    }
}

impl Rat {
    /// The reduced fraction `num/den`.
    ///
    /// # Panics
    /// Panics if `den == 0`.
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        if den == 1 {
            return Rat { num, den };
        }
        if num == 0 {
            return Rat { num: 0, den: 1 };
        }
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd_u128(num.unsigned_abs(), den.unsigned_abs()).max(1);
        if g == 1 {
            return Rat { num: sign * num, den: den.abs() };
        }
        let num = sign * (num / g as i128);
        let den = (den / g as i128).abs();
        Rat { num, den }
    }

    /// The integer `n` as a rational.
    pub fn from_integer(n: i128) -> Self {
        Rat { num: n, den: 1 }
    }

    /// The zero element.
    pub fn zero() -> Self {
        Rat { num: 0, den: 1 }
    }

    /// The unit.
    pub fn one() -> Self {
        Rat { num: 1, den: 1 }
    }

    /// Reduced numerator (sign-carrying).
    pub fn numer(&self) -> i128 {
        self.num
    }

    /// Reduced denominator (always positive).
    pub fn denom(&self) -> i128 {
        self.den
    }

    /// Whether this is `0`.
    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Whether this is `1`.
    pub fn is_one(&self) -> bool {
        self.num == 1 && self.den == 1
    }

    /// Whether this is strictly negative.
    pub fn is_negative(&self) -> bool {
        self.num < 0
    }

    /// Whether this is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    /// Whether the denominator is `1`.
    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    /// Truncating conversion to an integer (exact when [`is_integer`] holds).
    ///
    /// [`is_integer`]: Rat::is_integer
    pub fn to_integer(&self) -> i128 {
        self.num / self.den
    }

    /// Absolute value.
    pub fn abs(&self) -> Self {
        Rat { num: self.num.abs(), den: self.den }
    }

    /// Largest integer not exceeding the value, as a rational.
    pub fn floor(&self) -> Self {
        Rat::from_integer(self.num.div_euclid(self.den))
    }
}

fn rat_add(a: &Rat, b: &Rat) -> Rat {
    if a.den == b.den {
        let num = a.num.checked_add(b.num).expect("rational overflow");
        if a.den == 1 {
            return Rat { num, den: 1 };
        }
        return Rat::new(num, a.den);
    }
    let g = gcd_u128(a.den.unsigned_abs(), b.den.unsigned_abs()) as i128;
    let lhs = a
        .num
        .checked_mul(b.den / g)
        .and_then(|x| b.num.checked_mul(a.den / g).and_then(|y| x.checked_add(y)))
        .expect("rational overflow");
    let den = (a.den / g).checked_mul(b.den).expect("rational overflow");
    Rat::new(lhs, den)
}

fn rat_mul(a: &Rat, b: &Rat) -> Rat {
    if a.den == 1 && b.den == 1 {
        return Rat { num: a.num.checked_mul(b.num).expect("rational overflow"), den: 1 };
    }
    if a.num == 0 || b.num == 0 {
        return Rat { num: 0, den: 1 };
    }
    // Cross-reduce before multiplying to keep the factors small.
    let g1 = gcd_u128(a.num.unsigned_abs(), b.den.unsigned_abs()).max(1) as i128;
    let g2 = gcd_u128(b.num.unsigned_abs(), a.den.unsigned_abs()).max(1) as i128;
    if g1 == 1 && g2 == 1 {
        let num = a.num.checked_mul(b.num).expect("rational overflow");
        let den = a.den.checked_mul(b.den).expect("rational overflow");
        return Rat { num, den };
    }
    let num = (a.num / g1).checked_mul(b.num / g2).expect("rational overflow");
    let den = (a.den / g2).checked_mul(b.den / g1).expect("rational overflow");
    Rat { num, den }
}

fn rat_div(a: &Rat, b: &Rat) -> Rat {
    assert!(b.num != 0, "division by zero");
    rat_mul(a, &Rat { num: b.den * b.num.signum(), den: b.num.abs() })
}

macro_rules! impl_rat_binop {
    ($trait:ident, $method:ident, $f:ident) => {
        impl std::ops::$trait<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                $f(&self, &rhs)
            }
        }
        impl std::ops::$trait<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                $f(&self, rhs)
            }
        }
        impl std::ops::$trait<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                $f(self, &rhs)
            }
        }
        impl std::ops::$trait<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                $f(self, rhs)
            }
        }
    };
}

fn rat_sub(a: &Rat, b: &Rat) -> Rat {
    rat_add(a, &Rat { num: -b.num, den: b.den })
}

impl_rat_binop!(Add, add, rat_add);
impl_rat_binop!(Sub, sub, rat_sub);
impl_rat_binop!(Mul, mul, rat_mul);
impl_rat_binop!(Div, div, rat_div);

impl std::ops::Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat { num: -self.num, den: self.den }
    }
}

impl std::ops::Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat { num: -self.num, den: self.den }
    }
}

impl std::ops::AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        *self = rat_add(self, &rhs);
    }
}

impl std::ops::AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        *self = rat_add(self, rhs);
    }
}

impl std::ops::SubAssign<Rat> for Rat {
    fn sub_assign(&mut self, rhs: Rat) {
        *self = rat_sub(self, &rhs);
    }
}

impl std::ops::DivAssign<&Rat> for Rat {
    fn div_assign(&mut self, rhs: &Rat) {
        *self = rat_div(self, rhs);
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.num.checked_mul(other.den).expect("rational overflow");
        let rhs = other.num.checked_mul(self.den).expect("rational overflow");
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |_| format!("invalid rational `{s}`");
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i128 = n.trim().parse().map_err(bad)?;
                let d: i128 = d.trim().parse().map_err(bad)?;
                if d == 0 {
                    return Err(format!("invalid rational `{s}`: zero denominator"));
                }
                Ok(Rat::new(n, d))
            }
            None => {
                let n: i128 = s.trim().parse().map_err(bad)?;
                Ok(Rat::from_integer(n))
            }
        }
    }
}

/// Shorthand for an integer as a [`Rat`].
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(n as i128)
}

/// Shorthand for the fraction `n/d` as a [`Rat`].
///
/// # Panics
/// Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(n as i128, d as i128)
}

/// Errors produced by scalar arithmetic.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoeffError {
    /// Division by an exact zero.
    #[error("division by zero")]
    DivisionByZero,
    /// `eval_at_q1` hit a genuine pole after cancelling all common `(q-1)` factors.
    #[error("pole at q = 1")]
    PoleAtOne,
    /// Division of a multi-phase value; only single-phase values are invertible here.
    #[error("divisor mixes distinct phase monomials")]
    MixedPhaseDivisor,
}

/// Sparse Laurent object in `q`: a list of `(exponent, coefficient)` pairs
/// kept sorted by exponent. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LaurentQ {
    terms: Vec<(Rat, Rat)>,
}

impl LaurentQ {
    /// The zero element (empty term list).
    pub fn zero() -> Self {
        LaurentQ { terms: Vec::new() }
    }

    /// The multiplicative unit `1 = q^0`.
    pub fn one() -> Self {
        LaurentQ::constant(Rat::one())
    }

    /// A constant `c q^0`.
    pub fn constant(c: Rat) -> Self {
        LaurentQ::monomial(c, Rat::zero())
    }

    /// The monomial `c q^e`.
    pub fn monomial(c: Rat, e: Rat) -> Self {
        let mut terms = Vec::new();
        if !c.is_zero() {
            terms.push((e, c));
        }
        LaurentQ { terms }
    }

    /// The monomial `q^e`.
    pub fn qpow(e: Rat) -> Self {
        LaurentQ::monomial(Rat::one(), e)
    }

    /// Whether this is the zero element.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether this equals `1`.
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_zero() && self.terms[0].1.is_one()
    }

    /// Iterator over `(exponent, coefficient)` pairs in increasing exponent order.
    pub fn iter(&self) -> impl Iterator<Item = (&Rat, &Rat)> {
        self.terms.iter().map(|(e, c)| (e, c))
    }

    /// Lowest exponent, or `None` for zero.
    pub fn lowest_exp(&self) -> Option<&Rat> {
        self.terms.first().map(|(e, _)| e)
    }

    /// Highest exponent, or `None` for zero.
    pub fn highest_exp(&self) -> Option<&Rat> {
        self.terms.last().map(|(e, _)| e)
    }

    fn insert_add(&mut self, e: Rat, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.binary_search_by(|(k, _)| k.cmp(&e)) {
            Ok(i) => {
                self.terms[i].1 += c;
                if self.terms[i].1.is_zero() {
                    self.terms.remove(i);
                }
            }
            Err(i) => self.terms.insert(i, (e, c)),
        }
    }

    /// Sum of two Laurent objects (merge of two sorted term lists).
    pub fn add(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp(&other.terms[j].0) {
                Ordering::Less => {
                    out.push(self.terms[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.terms[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let c = self.terms[i].1 + other.terms[j].1;
                    if !c.is_zero() {
                        out.push((self.terms[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        LaurentQ { terms: out }
    }

    /// Difference `self - other`.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        LaurentQ {
            terms: self.terms.iter().map(|&(e, c)| (e, -c)).collect(),
        }
    }

    /// Product of two Laurent objects.
    pub fn mul(&self, other: &Self) -> Self {
        if self.terms.is_empty() || other.terms.is_empty() {
            return LaurentQ::zero();
        }
        if self.terms.len() == 1 {
            let (e, c) = self.terms[0];
            return LaurentQ {
                terms: other.terms.iter().map(|&(e2, c2)| (e + e2, c * c2)).collect(),
            };
        }
        if other.terms.len() == 1 {
            return other.mul(self);
        }
        let mut prods: Vec<(Rat, Rat)> =
            Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(e1, c1) in &self.terms {
            for &(e2, c2) in &other.terms {
                prods.push((e1 + e2, c1 * c2));
            }
        }
        prods.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Rat, Rat)> = Vec::with_capacity(prods.len());
        for (e, c) in prods {
            match out.last_mut() {
                Some((le, lc)) if *le == e => {
                    *lc += c;
                    if lc.is_zero() {
                        out.pop();
                    }
                }
                _ => {
                    if !c.is_zero() {
                        out.push((e, c));
                    }
                }
            }
        }
        LaurentQ { terms: out }
    }

    /// Scale by a rational constant.
    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return LaurentQ::zero();
        }
        LaurentQ {
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    /// Multiply every exponent by `q^shift` (i.e. add `shift` to all exponents).
    pub fn shift_exp(&self, shift: &Rat) -> Self {
        LaurentQ {
            terms: self.terms.iter().map(|(e, c)| (e + shift, c.clone())).collect(),
        }
    }

    /// Substitute `q -> q^-1` (negate every exponent, reversing the order).
    pub fn invert_q(&self) -> Self {
        let mut terms: Vec<(Rat, Rat)> = self.terms.iter().map(|&(e, c)| (-e, c)).collect();
        terms.reverse();
        LaurentQ { terms }
    }

    /// Evaluate at `q = 1` (always finite for a Laurent object).
    pub fn eval_at_one(&self) -> Rat {
        let mut acc = Rat::zero();
        for (_, c) in &self.terms {
            acc += c;
        }
        acc
    }

    /// Render with terms in increasing exponent order, e.g. `q^-1 + 2 + q^1`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            if e.is_zero() {
                let _ = write!(out, "{mag}");
            } else {
                if !mag.is_one() {
                    let _ = write!(out, "{mag} ");
                }
                let _ = write!(out, "q^{e}");
            }
        }
        out
    }
}

/// The balanced q-integer `[m] = (q^m - q^-m)/(q - q^-1)`.
///
/// `[0] = 0`, `[-m] = -[m]`, and for `m > 0` this is
/// `q^{m-1} + q^{m-3} + ... + q^{-(m-1)}`.
pub fn qint(m: i64) -> LaurentQ {
    if m == 0 {
        return LaurentQ::zero();
    }
    if m < 0 {
        return qint(-m).neg();
    }
    let mut out = LaurentQ::zero();
    let mut e = m - 1;
    while e >= -(m - 1) {
        out.insert_add(rat(e), Rat::one());
        e -= 2;
    }
    out
}

/// `q^m - q^-m` as a Laurent object.
pub fn qpow_diff(m: i64) -> LaurentQ {
    LaurentQ::qpow(rat(m)).sub(&LaurentQ::qpow(rat(-m)))
}

// ---------------------------------------------------------------------------
// Dense polynomial helpers used by the gcd reduction (integer exponents only).
// ---------------------------------------------------------------------------

fn dense_trim(v: &mut Vec<Rat>) {
    while v.last().map(|c| c.is_zero()).unwrap_or(false) {
        v.pop();
    }
}

fn dense_is_zero(v: &[Rat]) -> bool {
    v.is_empty()
}

/// Exact polynomial quotient `a / b`; panics if the division is not exact.
fn dense_div_exact(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let mut r: Vec<Rat> = a.to_vec();
    dense_trim(&mut r);
    let db = b.len() - 1;
    let lead_b = b.last().unwrap().clone();
    if dense_is_zero(&r) {
        return Vec::new();
    }
    let mut quot = vec![Rat::zero(); r.len().saturating_sub(db)];
    while !dense_is_zero(&r) && r.len() - 1 >= db {
        let dr = r.len() - 1;
        let f = r.last().unwrap() / &lead_b;
        quot[dr - db] = f.clone();
        for k in 0..=db {
            let idx = dr - db + k;
            let delta = &f * &b[k];
            r[idx] -= delta;
        }
        dense_trim(&mut r);
    }
    assert!(dense_is_zero(&r), "inexact polynomial division");
    quot
}

/// Primitive integer image of a rational polynomial: denominators cleared,
/// content divided out, leading coefficient positive.
fn int_primitive(a: &[Rat]) -> Vec<i128> {
    let mut l: i128 = 1;
    for c in a {
        let d = c.denom();
        l = l / gcd_u128(l.unsigned_abs(), d.unsigned_abs()) as i128 * d;
    }
    let mut v: Vec<i128> = a
        .iter()
        .map(|c| c.numer().checked_mul(l / c.denom()).expect("rational overflow"))
        .collect();
    let mut g: u128 = 0;
    for c in &v {
        g = gcd_u128(g, c.unsigned_abs());
    }
    if g > 1 {
        for c in &mut v {
            *c /= g as i128;
        }
    }
    if v.last().map(|c| *c < 0).unwrap_or(false) {
        for c in &mut v {
            *c = -*c;
        }
    }
    v
}

/// Pseudo-remainder of two primitive integer polynomials, reduced to its own
/// primitive part. Working over the integers with per-step content stripping
/// keeps intermediate coefficients small, unlike the rational remainder
/// cascade whose numerators grow explosively.
fn int_prem_primitive(a: &[i128], b: &[i128]) -> Vec<i128> {
    let db = b.len() - 1;
    let lb = *b.last().unwrap();
    let mut r: Vec<i128> = a.to_vec();
    while !r.is_empty() && r.len() - 1 >= db {
        let dr = r.len() - 1;
        let lr = *r.last().unwrap();
        for c in r.iter_mut() {
            *c = c.checked_mul(lb).expect("rational overflow");
        }
        for k in 0..=db {
            let idx = dr - db + k;
            let delta = lr.checked_mul(b[k]).expect("rational overflow");
            r[idx] = r[idx].checked_sub(delta).expect("rational overflow");
        }
        while r.last() == Some(&0) {
            r.pop();
        }
        let mut g: u128 = 0;
        for c in &r {
            g = gcd_u128(g, c.unsigned_abs());
        }
        if g > 1 {
            for c in &mut r {
                *c /= g as i128;
            }
        }
    }
    r
}

/// Modulus for the modular gcd image: the Mersenne prime `2^61 - 1`, small
/// enough that products fit in `i128`.
const GCD_PRIME: i128 = (1 << 61) - 1;

fn pmod(a: i128) -> i128 {
    a.rem_euclid(GCD_PRIME)
}

fn pmul(a: i128, b: i128) -> i128 {
    ((a as u128 * b as u128) % GCD_PRIME as u128) as i128
}

fn ppow(mut b: i128, mut e: u64) -> i128 {
    let mut acc = 1i128;
    while e > 0 {
        if e & 1 == 1 {
            acc = pmul(acc, b);
        }
        b = pmul(b, b);
        e >>= 1;
    }
    acc
}

fn pinv(a: i128) -> i128 {
    ppow(a, (GCD_PRIME - 2) as u64)
}

/// Monic gcd of two integer polynomials reduced mod [`GCD_PRIME`].
fn mod_gcd(a: &[i128], b: &[i128]) -> Vec<i128> {
    let reduce = |v: &[i128]| -> Vec<i128> {
        let mut w: Vec<i128> = v.iter().map(|c| pmod(*c)).collect();
        while w.last() == Some(&0) {
            w.pop();
        }
        w
    };
    let mut x = reduce(a);
    let mut y = reduce(b);
    while !y.is_empty() {
        let db = y.len() - 1;
        let linv = pinv(*y.last().unwrap());
        let mut r = x;
        while !r.is_empty() && r.len() - 1 >= db {
            let dr = r.len() - 1;
            let f = pmul(*r.last().unwrap(), linv);
            for k in 0..=db {
                let idx = dr - db + k;
                r[idx] = pmod(r[idx] - pmul(f, y[k]));
            }
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        x = y;
        y = r;
    }
    if let Some(l) = x.last().copied() {
        let linv = pinv(l);
        for c in &mut x {
            *c = pmul(*c, linv);
        }
    }
    x
}

/// Exact quotient of two primitive integer polynomials, or `None` when the
/// division is inexact (or would overflow).
fn int_div_exact_opt(a: &[i128], b: &[i128]) -> Option<Vec<i128>> {
    let db = b.len() - 1;
    let lb = *b.last().unwrap();
    let mut r: Vec<i128> = a.to_vec();
    if r.len() < b.len() {
        return None;
    }
    let mut quot = vec![0i128; r.len() - db];
    while !r.is_empty() && r.len() - 1 >= db {
        let dr = r.len() - 1;
        let lr = *r.last().unwrap();
        if lr % lb != 0 {
            return None;
        }
        let f = lr / lb;
        quot[dr - db] = f;
        for k in 0..=db {
            let idx = dr - db + k;
            r[idx] = r[idx].checked_sub(f.checked_mul(b[k])?)?;
        }
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    if r.is_empty() {
        Some(quot)
    } else {
        None
    }
}

/// Exact product of two dense integer polynomials.
fn int_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == 0 {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j]
                .checked_add(x.checked_mul(*y).expect("rational overflow"))
                .expect("rational overflow");
        }
    }
    out
}

static CYCLOTOMICS: OnceLock<Mutex<Vec<Arc<Vec<i128>>>>> = OnceLock::new();

/// The `k`-th cyclotomic polynomial as a dense integer vector, cached.
fn cyclotomic(k: usize) -> Arc<Vec<i128>> {
    let tab = CYCLOTOMICS.get_or_init(|| Mutex::new(Vec::new()));
    let mut tab = tab.lock().unwrap();
    while tab.len() < k {
        let next = tab.len() + 1;
        // (x^next - 1) divided by the product of all proper-divisor factors.
        let mut p = vec![0i128; next + 1];
        p[0] = -1;
        p[next] = 1;
        for d in 1..next {
            if next % d == 0 {
                p = int_div_exact_opt(&p, &tab[d - 1]).expect("cyclotomic ladder");
            }
        }
        tab.push(Arc::new(p));
    }
    tab[k - 1].clone()
}

/// Cached factorization of a denominator into cyclotomic factors (in the
/// integer-scaled exponent variable). `full` records whether the cofactor
/// left after stripping all cyclotomic factors is a constant.
struct DenFactors {
    factors: Vec<(Arc<Vec<i128>>, u32)>,
    full: bool,
}

static DEN_FACTORS: OnceLock<Mutex<HashMap<Vec<i128>, Arc<DenFactors>>>> = OnceLock::new();

const CYC_ORDER_LIMIT: usize = 256;

fn factor_den(den: &[i128]) -> Arc<DenFactors> {
    let cache = DEN_FACTORS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(den) {
        return hit.clone();
    }
    let mut rem = den.to_vec();
    let mut factors: Vec<(Arc<Vec<i128>>, u32)> = Vec::new();
    let mut k = 1;
    while rem.len() > 1 && k <= CYC_ORDER_LIMIT {
        let phi = cyclotomic(k);
        k += 1;
        if phi.len() > rem.len() {
            continue;
        }
        let mut mult = 0u32;
        while let Some(qt) = int_div_exact_opt(&rem, &phi) {
            rem = qt;
            mult += 1;
        }
        if mult > 0 {
            factors.push((phi, mult));
        }
    }
    let out = Arc::new(DenFactors { factors, full: rem.len() <= 1 });
    cache.lock().unwrap().insert(den.to_vec(), out.clone());
    out
}

/// Monic gcd of two dense rational polynomials.
///
/// The second argument is a denominator in reduced position: in this crate
/// denominators are products of balanced `q`-integers, so they factor into
/// cyclotomics of the scaled exponent variable. The factorization is cached
/// per denominator and the gcd is assembled by exact trial division of the
/// numerator, which avoids any general polynomial gcd in the hot path. A
/// modular-image gcd with exact confirmation remains as the fallback for
/// denominators outside that shape.
fn dense_gcd(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    {
        let ia = int_primitive(a);
        let ib = int_primitive(b);
        if ia.len() <= 1 || ib.len() <= 1 {
            return vec![Rat::one()];
        }
        let den = factor_den(&ib);
        if den.full {
            let mut g: Vec<i128> = vec![1];
            let mut num = ia;
            for (phi, den_mult) in &den.factors {
                for _ in 0..*den_mult {
                    match int_div_exact_opt(&num, phi) {
                        Some(qt) => {
                            num = qt;
                            g = int_mul(&g, phi);
                        }
                        None => break,
                    }
                }
            }
            let mut out: Vec<Rat> = g.iter().map(|c| Rat::from_integer(*c)).collect();
            if let Some(lead) = out.last().cloned() {
                for c in &mut out {
                    *c /= &lead;
                }
            }
            return out;
        }
    }
    let ia = int_primitive(a);
    let ib = int_primitive(b);
    let gp = mod_gcd(&ia, &ib);
    if gp.len() <= 1 {
        return vec![Rat::one()];
    }
    // Lift gamma * g_p symmetrically, where gamma is the gcd of the leading
    // coefficients (an integer multiple of the true gcd's leading term).
    let gamma = gcd_u128(
        ia.last().unwrap().unsigned_abs(),
        ib.last().unwrap().unsigned_abs(),
    ) as i128;
    let mut cand: Vec<i128> = gp
        .iter()
        .map(|c| {
            let v = pmul(pmod(gamma), *c);
            if v > GCD_PRIME / 2 {
                v - GCD_PRIME
            } else {
                v
            }
        })
        .collect();
    let mut g: u128 = 0;
    for c in &cand {
        g = gcd_u128(g, c.unsigned_abs());
    }
    if g > 1 {
        for c in &mut cand {
            *c /= g as i128;
        }
    }
    let confirmed = int_div_exact_opt(&ia, &cand).is_some() && int_div_exact_opt(&ib, &cand).is_some();
    let x = if confirmed {
        cand
    } else {
        let mut x = ia;
        let mut y = ib;
        while !y.is_empty() {
            let r = int_prem_primitive(&x, &y);
            x = y;
            y = r;
        }
        x
    };
    let mut out: Vec<Rat> = x.iter().map(|c| Rat::from_integer(*c)).collect();
    if let Some(lead) = out.last().cloned() {
        for c in &mut out {
            *c /= &lead;
        }
    }
    out
}

fn exp_denom_lcm(p: &LaurentQ, acc: &mut i128) {
    for (e, _) in &p.terms {
        let d = e.denom();
        *acc = *acc / gcd_u128(acc.unsigned_abs(), d.unsigned_abs()) as i128 * d;
    }
}

/// Convert to a dense vector after scaling exponents by `scale` and shifting by `shift`.
fn to_dense(p: &LaurentQ, scale: i128, shift: &Rat) -> Vec<Rat> {
    let mut out: Vec<Rat> = Vec::new();
    for (e, c) in &p.terms {
        let idx = (e - shift) * Rat::from_integer(scale);
        assert!(idx.is_integer() && !idx.is_negative(), "dense conversion out of range");
        let i: usize = idx.to_integer().try_into().expect("exponent fits in usize");
        if out.len() <= i {
            out.resize(i + 1, Rat::zero());
        }
        out[i] = c.clone();
    }
    out
}

fn from_dense(v: &[Rat], scale: i128, shift: &Rat) -> LaurentQ {
    let mut out = LaurentQ::zero();
    for (i, c) in v.iter().enumerate() {
        if !c.is_zero() {
            out.insert_add(Rat::new(i as i128, scale) + shift, c.clone());
        }
    }
    out
}

/// Reduced fraction of two [`LaurentQ`] values.
///
/// Canonical form: numerator and denominator share no polynomial factor, the
/// denominator's lowest exponent is `0`, and its lowest coefficient is `1`.
/// The numerator may still be a genuine Laurent object (negative exponents).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatQ {
    num: LaurentQ,
    den: LaurentQ,
}

impl Default for RatQ {
    fn default() -> Self {
        RatQ::zero()
    }
}

impl RatQ {
    /// The zero element `0/1`.
    pub fn zero() -> Self {
        RatQ { num: LaurentQ::zero(), den: LaurentQ::one() }
    }

    /// The unit `1/1`.
    pub fn one() -> Self {
        RatQ { num: LaurentQ::one(), den: LaurentQ::one() }
    }

    /// Wrap a Laurent object as a fraction with denominator `1`.
    pub fn from_laurent(num: LaurentQ) -> Self {
        RatQ { num, den: LaurentQ::one() }
    }

    /// A rational constant.
    pub fn constant(c: Rat) -> Self {
        RatQ::from_laurent(LaurentQ::constant(c))
    }

    /// The monomial `q^e`.
    pub fn qpow(e: Rat) -> Self {
        RatQ::from_laurent(LaurentQ::qpow(e))
    }

    /// Build `num/den` in canonical reduced form.
    ///
    /// # Panics
    /// Panics if `den` is zero.
    pub fn new(num: LaurentQ, den: LaurentQ) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return RatQ::zero();
        }
        // Shift the denominator's lowest exponent to zero; the same common
        // factor q^{-s} is applied to the numerator, preserving the value.
        let s = den.lowest_exp().unwrap().clone();
        let den = den.shift_exp(&(-s.clone()));
        let num = num.shift_exp(&(-s));
        // A shifted monomial denominator is a nonzero constant: divide through.
        if den.terms.len() == 1 {
            let c = &den.terms[0].1;
            let num = if c.is_one() { num } else { num.scale(&(Rat::one() / c)) };
            return RatQ { num, den: LaurentQ::one() };
        }
        // A monomial numerator is coprime to a denominator whose constant
        // term is nonzero, so only the monic normalization remains.
        if num.terms.len() == 1 {
            let c = den.terms[0].1;
            if c.is_one() {
                return RatQ { num, den };
            }
            let inv = Rat::one() / c;
            return RatQ { num: num.scale(&inv), den: den.scale(&inv) };
        }
        // Work with integer exponents: scale all exponents by their lcm of
        // denominators (a substitution q -> q^{1/L} that is undone at the end).
        let mut l: i128 = 1;
        exp_denom_lcm(&num, &mut l);
        exp_denom_lcm(&den, &mut l);
        let num_shift = num.lowest_exp().unwrap().clone().min(Rat::zero());
        let dnum = to_dense(&num, l, &num_shift);
        let dden = to_dense(&den, l, &Rat::zero());
        let g = dense_gcd(&dnum, &dden);
        let (dnum, dden) = if g.len() > 1 {
            (dense_div_exact(&dnum, &g), dense_div_exact(&dden, &g))
        } else {
            (dnum, dden)
        };
        let mut num = from_dense(&dnum, l, &num_shift);
        let mut den = from_dense(&dden, l, &Rat::zero());
        // The gcd quotient can reintroduce a positive lowest exponent in the
        // denominator only via an exact monomial factor; renormalize.
        let s2 = den.lowest_exp().unwrap().clone();
        if !s2.is_zero() {
            den = den.shift_exp(&(-s2.clone()));
            num = num.shift_exp(&(-s2));
        }
        // Make the denominator's lowest coefficient 1.
        let c = den.terms[0].1;
        if !c.is_one() {
            let inv = Rat::one() / c;
            den = den.scale(&inv);
            num = num.scale(&inv);
        }
        RatQ { num, den }
    }

    /// Numerator of the canonical form.
    pub fn numer(&self) -> &LaurentQ {
        &self.num
    }

    /// Denominator of the canonical form.
    pub fn denom(&self) -> &LaurentQ {
        &self.den
    }

    /// Whether this is zero.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Whether this equals `1`.
    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    /// Sum.
    pub fn add(&self, other: &Self) -> Self {
        if self.den.is_one() && other.den.is_one() {
            return RatQ { num: self.num.add(&other.num), den: LaurentQ::one() };
        }
        if self.den == other.den {
            return RatQ::new(self.num.add(&other.num), self.den.clone());
        }
        RatQ::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        RatQ { num: self.num.neg(), den: self.den.clone() }
    }

    /// Product.
    pub fn mul(&self, other: &Self) -> Self {
        if self.num.is_zero() || other.num.is_zero() {
            return RatQ::zero();
        }
        if self.den.is_one() && other.den.is_one() {
            return RatQ { num: self.num.mul(&other.num), den: LaurentQ::one() };
        }
        RatQ::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    /// Scale by a rational constant.
    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return RatQ::zero();
        }
        RatQ { num: self.num.scale(c), den: self.den.clone() }
    }

    /// Reciprocal.
    pub fn inv(&self) -> Result<Self, CoeffError> {
        if self.is_zero() {
            return Err(CoeffError::DivisionByZero);
        }
        Ok(RatQ::new(self.den.clone(), self.num.clone()))
    }

    /// Quotient.
    pub fn div(&self, other: &Self) -> Result<Self, CoeffError> {
        Ok(self.mul(&other.inv()?))
    }

    /// Substitute `q -> q^-1`.
    pub fn invert_q(&self) -> Self {
        RatQ::new(self.num.invert_q(), self.den.invert_q())
    }

    /// Evaluate at `q = 1`, cancelling any common `(q-1)` factors first.
    pub fn eval_at_q1(&self) -> Result<Rat, CoeffError> {
        if self.num.is_zero() {
            return Ok(Rat::zero());
        }
        let mut l: i128 = 1;
        exp_denom_lcm(&self.num, &mut l);
        exp_denom_lcm(&self.den, &mut l);
        // Independent monomial shifts are harmless at q = 1.
        let ns = self.num.lowest_exp().unwrap().clone();
        let mut dnum = to_dense(&self.num, l, &ns);
        let mut dden = to_dense(&self.den, l, &Rat::zero());
        let eval1 = |v: &[Rat]| -> Rat {
            let mut acc = Rat::zero();
            for c in v {
                acc += c;
            }
            acc
        };
        let qm1 = vec![-Rat::one(), Rat::one()];
        loop {
            let d1 = eval1(&dden);
            if !d1.is_zero() {
                return Ok(eval1(&dnum) / d1);
            }
            if !eval1(&dnum).is_zero() {
                return Err(CoeffError::PoleAtOne);
            }
            dnum = dense_div_exact(&dnum, &qm1);
            dden = dense_div_exact(&dden, &qm1);
        }
    }

    /// Render as `(num)` or `(num)/(den)`.
    pub fn render(&self) -> String {
        if self.den.is_one() {
            format!("({})", self.num.render())
        } else {
            format!("({})/({})", self.num.render(), self.den.render())
        }
    }
}

/// Reduce a phase exponent to `[0,1)`, returning the sign picked up along the
/// way: `p^(g+2) = p^g` and `p^(g+1) = -p^g`.
fn reduce_phase(g: &Rat) -> (i8, Rat) {
    let two = rat(2);
    let mut g = g.clone();
    // Bring into [0,2).
    let k = (g.clone() / two.clone()).floor();
    g -= k * two;
    if g >= Rat::one() {
        (-1, g - Rat::one())
    } else {
        (1, g)
    }
}

/// Finite sum of phase monomials times [`RatQ`] coefficients.
///
/// The phase `p = e^{i pi}` satisfies `p^1 = -1`; exponents are kept in
/// `[0,1)` with the sign folded into the coefficient. Weight components that
/// are quarter-integers therefore produce exact eighth-root phases, and all
/// integer-weight cocycle actions collapse to signs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Coeff {
    terms: Vec<(Rat, RatQ)>,
}

impl Coeff {
    /// Zero.
    pub fn zero() -> Self {
        Coeff { terms: Vec::new() }
    }

    /// One (phase exponent `0`, coefficient `1`).
    pub fn one() -> Self {
        Coeff::from_ratq(RatQ::one())
    }

    /// Phase-free value.
    pub fn from_ratq(r: RatQ) -> Self {
        if r.is_zero() {
            return Coeff::zero();
        }
        Coeff { terms: vec![(Rat::zero(), r)] }
    }

    /// Phase-free Laurent value.
    pub fn from_laurent(l: LaurentQ) -> Self {
        Coeff::from_ratq(RatQ::from_laurent(l))
    }

    /// Rational constant.
    pub fn constant(c: Rat) -> Self {
        Coeff::from_ratq(RatQ::constant(c))
    }

    /// Integer constant.
    pub fn int(n: i64) -> Self {
        Coeff::constant(rat(n))
    }

    /// `q^e`.
    pub fn qpow(e: Rat) -> Self {
        Coeff::from_ratq(RatQ::qpow(e))
    }

    /// The phase monomial `p^g`, reduced.
    pub fn phase(g: &Rat) -> Self {
        let (sign, g) = reduce_phase(g);
        let mut r = RatQ::one();
        if sign < 0 {
            r = r.neg();
        }
        Coeff { terms: vec![(g, r)] }
    }

    /// Whether this is zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether this equals `1`.
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_zero() && self.terms[0].1.is_one()
    }

    /// Iterator over `(phase exponent, coefficient)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (&Rat, &RatQ)> {
        self.terms.iter().map(|(g, r)| (g, r))
    }

    fn insert_add(&mut self, g: Rat, r: RatQ) {
        if r.is_zero() {
            return;
        }
        match self.terms.binary_search_by(|(e, _)| e.cmp(&g)) {
            Ok(idx) => {
                let next = self.terms[idx].1.add(&r);
                if next.is_zero() {
                    self.terms.remove(idx);
                } else {
                    self.terms[idx].1 = next;
                }
            }
            Err(idx) => self.terms.insert(idx, (g, r)),
        }
    }

    /// Sum.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (g, r) in &other.terms {
            out.insert_add(g.clone(), r.clone());
        }
        out
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        Coeff {
            terms: self.terms.iter().map(|(g, r)| (g.clone(), r.neg())).collect(),
        }
    }

    /// Product (phase exponents add and reduce).
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let mut out = Coeff::zero();
        for (g1, r1) in &self.terms {
            for (g2, r2) in &other.terms {
                let (sign, g) = reduce_phase(&(g1 + g2));
                let mut r = r1.mul(r2);
                if sign < 0 {
                    r = r.neg();
                }
                out.insert_add(g, r);
            }
        }
        out
    }

    /// Multiply by a [`RatQ`].
    pub fn mul_ratq(&self, r: &RatQ) -> Self {
        if r.is_zero() {
            return Coeff::zero();
        }
        Coeff {
            terms: self.terms.iter().map(|(g, s)| (g.clone(), s.mul(r))).collect(),
        }
    }

    /// Multiply by the phase monomial `p^g`.
    pub fn mul_phase(&self, g: &Rat) -> Self {
        self.mul(&Coeff::phase(g))
    }

    /// Division; the divisor must consist of a single phase monomial.
    pub fn div(&self, other: &Self) -> Result<Self, CoeffError> {
        if other.terms.is_empty() {
            return Err(CoeffError::DivisionByZero);
        }
        if other.terms.len() != 1 {
            return Err(CoeffError::MixedPhaseDivisor);
        }
        let (g, r) = other.terms.iter().next().unwrap();
        let rinv = r.inv()?;
        // p^{-g} = p^{2-g} up to the reduction rule.
        Ok(self.mul_ratq(&rinv).mul_phase(&(-g.clone())))
    }

    /// Evaluate each phase component at `q = 1`.
    pub fn eval_at_q1(&self) -> Result<BTreeMap<Rat, Rat>, CoeffError> {
        let mut out = BTreeMap::new();
        for (g, r) in &self.terms {
            let v = r.eval_at_q1()?;
            if !v.is_zero() {
                out.insert(g.clone(), v);
            }
        }
        Ok(out)
    }

    /// Render as ` + `-joined terms; phase-free terms render as `(num)/(den)`,
    /// phased terms as `[p^(g)] (num)/(den)`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (g, r) in &self.terms {
            if g.is_zero() {
                parts.push(r.render());
            } else {
                parts.push(format!("[p^({})] {}", g, r.render()));
            }
        }
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(e: i64) -> LaurentQ {
        LaurentQ::qpow(rat(e))
    }

    #[test]
    fn qint_small_values() {
        assert!(qint(0).is_zero());
        assert_eq!(qint(1), LaurentQ::one());
        assert_eq!(qint(2), qp(1).add(&qp(-1)));
        assert_eq!(qint(3), qp(2).add(&LaurentQ::one()).add(&qp(-2)));
        assert_eq!(qint(-3), qint(3).neg());
    }

    #[test]
    fn qint_defining_identity() {
        // [m] (q - q^-1) = q^m - q^-m for |m| <= 20.
        let qdiff = qpow_diff(1);
        for m in -20..=20 {
            assert_eq!(qint(m).mul(&qdiff), qpow_diff(m), "m = {m}");
        }
    }

    #[test]
    fn qint_eval_at_one_is_m() {
        for m in -12..=12 {
            assert_eq!(qint(m).eval_at_one(), rat(m));
        }
    }

    #[test]
    fn ratq_reduction_cancels_common_factor() {
        // (q^2 - q^-2)/(q - q^-1) = [2] = q + q^-1.
        let r = RatQ::new(qpow_diff(2), qpow_diff(1));
        assert_eq!(r, RatQ::from_laurent(qint(2)));
        assert!(r.denom().is_one());
    }

    #[test]
    fn ratq_denominator_normalization() {
        // 1/(q^-1 + q) has canonical denominator 1 + q^2 (lowest exponent 0,
        // lowest coefficient 1) and numerator q.
        let r = RatQ::new(LaurentQ::one(), qint(2));
        assert_eq!(r.denom().lowest_exp(), Some(&rat(0)));
        assert_eq!(r.denom().iter().next().unwrap().1, &Rat::one());
        let back = r.mul(&RatQ::from_laurent(qint(2)));
        assert!(back.is_one());
    }

    #[test]
    fn ratq_eval_at_q1_cancels_poles() {
        // [m] = (q^m - q^-m)/(q - q^-1) evaluates to m at q = 1.
        for m in 1..=8 {
            let r = RatQ::new(qpow_diff(m), qpow_diff(1));
            assert_eq!(r.eval_at_q1().unwrap(), rat(m));
        }
        // 1/(q-1) is a genuine pole.
        let pole = RatQ::new(LaurentQ::one(), qp(1).sub(&LaurentQ::one()));
        assert_eq!(pole.eval_at_q1(), Err(CoeffError::PoleAtOne));
    }

    #[test]
    fn rational_exponents_roundtrip() {
        let half = LaurentQ::qpow(ratio(1, 2));
        let q = half.mul(&half);
        assert_eq!(q, qp(1));
        let r = RatQ::new(qp(1).sub(&LaurentQ::one()), half.clone());
        let again = r.mul(&RatQ::from_laurent(half));
        assert_eq!(again, RatQ::from_laurent(qp(1).sub(&LaurentQ::one())));
    }

    #[test]
    fn phase_reduction_rules() {
        // p^g * p^(2-g) = p^2 = 1.
        let g = ratio(3, 4);
        let a = Coeff::phase(&g);
        let b = Coeff::phase(&(rat(2) - g.clone()));
        assert_eq!(a.mul(&b), Coeff::one());
        // p^g * p^1 = -p^g.
        let c = a.mul(&Coeff::phase(&rat(1)));
        assert_eq!(c, a.neg());
        // Integer weights give bare signs.
        assert_eq!(Coeff::phase(&rat(3)), Coeff::int(-1));
        assert_eq!(Coeff::phase(&rat(-2)), Coeff::one());
    }

    #[test]
    fn coeff_division_single_phase() {
        let a = Coeff::phase(&ratio(1, 2)).mul_ratq(&RatQ::from_laurent(qint(2)));
        let b = Coeff::phase(&ratio(1, 2));
        let q = a.div(&b).unwrap();
        assert_eq!(q, Coeff::from_laurent(qint(2)));
        let mixed = a.add(&Coeff::one());
        assert_eq!(a.div(&mixed), Err(CoeffError::MixedPhaseDivisor));
    }

    #[test]
    fn render_contract_samples() {
        assert_eq!(qint(2).add(&LaurentQ::constant(rat(2))).render(), "q^-1 + 2 + q^1");
        assert_eq!(qint(3).neg().render(), "-q^-2 - 1 - q^2");
        assert_eq!(
            LaurentQ::monomial(rat(2), ratio(1, 2)).render(),
            "2 q^1/2"
        );
        let r = RatQ::new(LaurentQ::one(), qint(2));
        assert_eq!(r.render(), "(q^1)/(1 + q^2)");
        let c = Coeff::phase(&ratio(1, 2));
        assert_eq!(c.render(), "[p^(1/2)] (1)");
        assert_eq!(Coeff::zero().render(), "0");
    }

    #[test]
    fn eval_at_q1_of_qint_fraction() {
        // [6]/[2] at q = 1 is 3.
        let r = RatQ::new(qint(6), qint(2));
        assert_eq!(r.eval_at_q1().unwrap(), rat(3));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_rat() -> impl Strategy<Value = Rat> {
            (-6i64..=6, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
        }

        fn arb_laurent() -> impl Strategy<Value = LaurentQ> {
            proptest::collection::vec(((-4i64..=4, 1i64..=2), -5i64..=5), 0..5).prop_map(|v| {
                let mut out = LaurentQ::zero();
                for ((en, ed), c) in v {
                    out = out.add(&LaurentQ::monomial(rat(c), ratio(en, ed)));
                }
                out
            })
        }

        fn arb_laurent_nonzero() -> impl Strategy<Value = LaurentQ> {
            arb_laurent().prop_map(|l| if l.is_zero() { LaurentQ::one() } else { l })
        }

        fn arb_coeff() -> impl Strategy<Value = Coeff> {
            proptest::collection::vec((arb_rat(), arb_laurent()), 0..3).prop_map(|v| {
                let mut out = Coeff::zero();
                for (g, l) in v {
                    out = out.add(&Coeff::phase(&g).mul_ratq(&RatQ::from_laurent(l)));
                }
                out
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn coeff_ring_axioms(a in arb_coeff(), b in arb_coeff(), c in arb_coeff()) {
                prop_assert_eq!(a.add(&b), b.add(&a));
                prop_assert_eq!(a.mul(&b), b.mul(&a));
                prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
                prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
                prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
                prop_assert_eq!(a.mul(&Coeff::one()), a.clone());
                prop_assert!(a.sub(&a).is_zero());
            }

            #[test]
            fn ratq_canonical_form_idempotent(n in arb_laurent(), d in arb_laurent_nonzero()) {
                let r = RatQ::new(n, d);
                let again = RatQ::new(r.numer().clone(), r.denom().clone());
                prop_assert_eq!(r.clone(), again);
                if !r.is_zero() {
                    prop_assert_eq!(r.denom().lowest_exp(), Some(&Rat::zero()));
                    prop_assert!(r.denom().iter().next().unwrap().1.is_one());
                }
            }

            #[test]
            fn ratq_field_axioms(n in arb_laurent_nonzero(), d in arb_laurent_nonzero(), m in arb_laurent()) {
                let r = RatQ::new(n, d.clone());
                let rinv = r.inv().unwrap();
                prop_assert!(r.mul(&rinv).is_one());
                let s = RatQ::new(m, d);
                prop_assert_eq!(r.add(&s).sub(&s), r.clone());
            }
        }
    }
}
