//! Interval branch-and-bound certificates for five small polynomial systems
//! in `x, y, z, ζ, β` (with `γ = 4/3 − β`), plus a grid scan for sanity.
//!
//! Arithmetic is generic over [`Scalar`]; certificates are produced with
//! exact rationals only. Strict inequalities `g > 0` are tightened to
//! `g ≥ μ`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

/// Numbers the interval machinery can run on.
pub trait Scalar:
    Clone + PartialOrd + fmt::Debug + fmt::Display + Send + Sync + num_traits::Num + Signed
{
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Largest multiple of `2^-bits` that is `<= self`.
    fn floor_to(&self, bits: u32) -> Self;
    /// Smallest multiple of `2^-bits` that is `>= self`.
    fn ceil_to(&self, bits: u32) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn to_rational(&self) -> BigRational;
}

impl Scalar for f64 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn floor_to(&self, _bits: u32) -> Self {
        *self
    }
    fn ceil_to(&self, _bits: u32) -> Self {
        *self
    }
    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).expect("finite float")
    }
}

impl Scalar for BigRational {
    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(num.into(), den.into())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn floor_to(&self, bits: u32) -> Self {
        let scale = BigRational::from_integer(BigInt::one() << bits);
        (self * &scale).floor() / scale
    }
    fn ceil_to(&self, bits: u32) -> Self {
        let scale = BigRational::from_integer(BigInt::one() << bits);
        (self * &scale).ceil() / scale
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

fn min2<S: Scalar>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

fn max2<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Interval<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Interval<S> {
    pub fn new(lo: S, hi: S) -> Self {
        Self { lo, hi }
    }

    pub fn point(v: S) -> Self {
        Self {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn width(&self) -> S {
        self.hi.clone() - self.lo.clone()
    }

    pub fn midpoint(&self) -> S {
        (self.lo.clone() + self.hi.clone()) / S::ratio(2, 1)
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= S::zero() && self.hi >= S::zero()
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self {
            lo: max2(self.lo.clone(), other.lo.clone()),
            hi: min2(self.hi.clone(), other.hi.clone()),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            lo: self.lo.clone() + o.lo.clone(),
            hi: self.hi.clone() + o.hi.clone(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            lo: self.lo.clone() - o.hi.clone(),
            hi: self.hi.clone() - o.lo.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let c = [
            self.lo.clone() * o.lo.clone(),
            self.lo.clone() * o.hi.clone(),
            self.hi.clone() * o.lo.clone(),
            self.hi.clone() * o.hi.clone(),
        ];
        let lo = c
            .iter()
            .skip(1)
            .fold(c[0].clone(), |a, b| min2(a, b.clone()));
        let hi = c
            .iter()
            .skip(1)
            .fold(c[0].clone(), |a, b| max2(a, b.clone()));
        Self { lo, hi }
    }

    pub fn scale(&self, s: &S) -> Self {
        let (a, b) = (self.lo.clone() * s.clone(), self.hi.clone() * s.clone());
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn powi(&self, e: u32) -> Self {
        if e == 0 {
            return Self::point(S::one());
        }
        let p = |v: &S| (0..e).fold(S::one(), |acc, _| acc * v.clone());
        if e % 2 == 1 || self.lo >= S::zero() {
            Self {
                lo: p(&self.lo),
                hi: p(&self.hi),
            }
        } else if self.hi <= S::zero() {
            Self {
                lo: p(&self.hi),
                hi: p(&self.lo),
            }
        } else {
            Self {
                lo: S::zero(),
                hi: max2(p(&self.lo), p(&self.hi)),
            }
        }
    }
}

impl<S: Scalar> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl<S: Scalar> Serialize for Interval<S> {
    fn serialize<Z: Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
        [self.lo.to_string(), self.hi.to_string()].serialize(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Var {
    X,
    Y,
    Z,
    Zeta,
    Beta,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::X, Var::Y, Var::Z, Var::Zeta, Var::Beta];

    pub fn idx(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["x", "y", "z", "zeta", "beta"][self.idx()]
    }
}

/// Boxes over the five variables; `None` marks a variable the system lacks.
#[derive(Clone, Debug, PartialEq)]
pub struct VarBox<S> {
    pub iv: [Option<Interval<S>>; 5],
}

impl<S: Scalar> VarBox<S> {
    pub fn get(&self, v: Var) -> Option<&Interval<S>> {
        self.iv[v.idx()].as_ref()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        Var::ALL.into_iter().filter(|v| self.iv[v.idx()].is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.iv.iter().flatten().any(Interval::is_empty)
    }

    /// Widest variable, ties broken by the order x, y, z, ζ, β.
    pub fn widest(&self) -> Var {
        let mut best: Option<(Var, S)> = None;
        for v in self.vars() {
            let w = self.iv[v.idx()].as_ref().unwrap().width();
            if best.as_ref().map_or(true, |(_, bw)| w > *bw) {
                best = Some((v, w));
            }
        }
        best.expect("box has a variable").0
    }

    pub fn bisect(&self, v: Var) -> (Self, Self) {
        let iv = self.get(v).expect("variable present");
        let mid = iv.midpoint();
        let (mut a, mut b) = (self.clone(), self.clone());
        a.iv[v.idx()] = Some(Interval::new(iv.lo.clone(), mid.clone()));
        b.iv[v.idx()] = Some(Interval::new(mid, iv.hi.clone()));
        (a, b)
    }

    pub fn midpoint(&self) -> [Option<S>; 5] {
        self.iv.clone().map(|i| i.map(|i| i.midpoint()))
    }

    pub fn convert<T: Scalar>(&self) -> VarBox<T> {
        VarBox {
            iv: self.iv.clone().map(|i| {
                i.map(|i| {
                    Interval::new(
                        T::from_rational(&i.lo.to_rational()),
                        T::from_rational(&i.hi.to_rational()),
                    )
                })
            }),
        }
    }
}

impl<S: Scalar> Serialize for VarBox<S> {
    fn serialize<Z: Serializer>(&self, s: Z) -> Result<Z::Ok, Z::Error> {
        let map: BTreeMap<&str, &Interval<S>> = self
            .vars()
            .map(|v| (v.name(), self.iv[v.idx()].as_ref().unwrap()))
            .collect();
        map.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InequalityError {
    #[error("unknown system {0:?} (expected B1..B5 or B1-weak)")]
    UnknownSystem(String),
    #[error("variable {0} is not in the box")]
    MissingVar(&'static str),
    #[error("depth {depth} exhausted with an undecided box {region}")]
    DepthExhausted { depth: usize, region: String },
    #[error("monotone reduction on {var} failed: derivative bound {bound} is positive")]
    Reduction { var: &'static str, bound: String },
    #[error("certificate does not re-verify: {0}")]
    BadCertificate(String),
}

/// Factored polynomial expression; constants are exact fractions.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(i64, i64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
}

pub fn c(num: i64, den: i64) -> Expr {
    Expr::Const(num, den)
}

pub fn var(v: Var) -> Expr {
    Expr::Var(v)
}

/// `γ = 4/3 − β`.
pub fn gamma() -> Expr {
    c(4, 3) - var(Var::Beta)
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(o))
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(o))
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(o))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl Expr {
    pub fn eval_interval<S: Scalar>(&self, b: &VarBox<S>) -> Result<Interval<S>, InequalityError> {
        Ok(match self {
            Expr::Const(n, d) => Interval::point(S::ratio(*n, *d)),
            Expr::Var(v) => b
                .get(*v)
                .cloned()
                .ok_or(InequalityError::MissingVar(v.name()))?,
            Expr::Add(a, c) => a.eval_interval(b)?.add(&c.eval_interval(b)?),
            Expr::Sub(a, c) => a.eval_interval(b)?.sub(&c.eval_interval(b)?),
            Expr::Mul(a, c) => a.eval_interval(b)?.mul(&c.eval_interval(b)?),
            Expr::Neg(a) => a.eval_interval(b)?.neg(),
        })
    }

    pub fn eval<S: Scalar>(&self, p: &[Option<S>; 5]) -> Result<S, InequalityError> {
        Ok(match self {
            Expr::Const(n, d) => S::ratio(*n, *d),
            Expr::Var(v) => p[v.idx()]
                .clone()
                .ok_or(InequalityError::MissingVar(v.name()))?,
            Expr::Add(a, c) => a.eval(p)? + c.eval(p)?,
            Expr::Sub(a, c) => a.eval(p)? - c.eval(p)?,
            Expr::Mul(a, c) => a.eval(p)? * c.eval(p)?,
            Expr::Neg(a) => -a.eval(p)?,
        })
    }

    pub fn expand<S: Scalar>(&self) -> Poly<S> {
        match self {
            Expr::Const(n, d) => Poly::constant(S::ratio(*n, *d)),
            Expr::Var(v) => Poly::var(*v),
            Expr::Add(a, b) => a.expand().add(&b.expand()),
            Expr::Sub(a, b) => a.expand().add(&b.expand().scale(&-S::one())),
            Expr::Mul(a, b) => a.expand().mul(&b.expand()),
            Expr::Neg(a) => a.expand().scale(&-S::one()),
        }
    }
}

type Exponents = [u8; 5];

/// Expanded polynomial: exponent vector → coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    pub terms: BTreeMap<Exponents, S>,
}

impl<S: Scalar> Poly<S> {
    pub fn constant(v: S) -> Self {
        let mut terms = BTreeMap::new();
        if !v.is_zero() {
            terms.insert([0; 5], v);
        }
        Self { terms }
    }

    pub fn var(v: Var) -> Self {
        let mut e = [0; 5];
        e[v.idx()] = 1;
        Self {
            terms: BTreeMap::from([(e, S::one())]),
        }
    }

    fn insert(&mut self, e: Exponents, c: S) {
        let slot = self.terms.entry(e).or_insert_with(S::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.insert(*e, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self {
            terms: BTreeMap::new(),
        };
        for (e, c) in &self.terms {
            out.insert(*e, c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self {
            terms: BTreeMap::new(),
        };
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let mut e = *e1;
                e.iter_mut().zip(e2).for_each(|(a, b)| *a += b);
                out.insert(e, c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn degree_in(&self, v: Var) -> u8 {
        self.terms.keys().map(|e| e[v.idx()]).max().unwrap_or(0)
    }

    /// `self = a·v + b` for a polynomial of degree at most one in `v`.
    pub fn split_linear(&self, v: Var) -> (Self, Self) {
        let (mut a, mut b) = (
            Self {
                terms: BTreeMap::new(),
            },
            Self {
                terms: BTreeMap::new(),
            },
        );
        for (e, coef) in &self.terms {
            match e[v.idx()] {
                0 => b.insert(*e, coef.clone()),
                1 => {
                    let mut e2 = *e;
                    e2[v.idx()] = 0;
                    a.insert(e2, coef.clone());
                }
                _ => panic!("split_linear on a nonlinear variable"),
            }
        }
        (a, b)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&d| d as u32).sum())
            .max()
            .unwrap_or(0)
    }

    /// Partial derivative in `v`.
    pub fn derivative(&self, v: Var) -> Self {
        let mut out = Self {
            terms: BTreeMap::new(),
        };
        for (e, coef) in &self.terms {
            if e[v.idx()] > 0 {
                let mut e2 = *e;
                e2[v.idx()] -= 1;
                out.insert(e2, coef.clone() * S::ratio(e[v.idx()] as i64, 1));
            }
        }
        out
    }

    pub fn eval_interval(&self, b: &VarBox<S>) -> Result<Interval<S>, InequalityError> {
        let mut acc = Interval::point(S::zero());
        for (e, coef) in &self.terms {
            let mut term = Interval::point(coef.clone());
            for v in Var::ALL {
                if e[v.idx()] > 0 {
                    let iv = b.get(v).ok_or(InequalityError::MissingVar(v.name()))?;
                    term = term.mul(&iv.powi(e[v.idx()] as u32));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    pub fn eval(&self, p: &[Option<S>; 5]) -> Result<S, InequalityError> {
        let mut acc = S::zero();
        for (e, coef) in &self.terms {
            let mut term = coef.clone();
            for v in Var::ALL {
                for _ in 0..e[v.idx()] {
                    term = term
                        * p[v.idx()]
                            .clone()
                            .ok_or(InequalityError::MissingVar(v.name()))?;
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }
}

/// `expr ≥ 0`, or `expr > 0` when `strict`.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub label: String,
    pub expr: Expr,
    pub strict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum SystemId {
    B1,
    B2,
    B3,
    B4,
    B5,
    /// B1 with `y ≥ 1/2` relaxed to `y ≥ 0`; feasible, used as a control.
    B1Weak,
}

impl SystemId {
    pub const PAPER: [SystemId; 5] = [
        SystemId::B1,
        SystemId::B2,
        SystemId::B3,
        SystemId::B4,
        SystemId::B5,
    ];
}

impl FromStr for SystemId {
    type Err = InequalityError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "B1" => SystemId::B1,
            "B2" => SystemId::B2,
            "B3" => SystemId::B3,
            "B4" => SystemId::B4,
            "B5" => SystemId::B5,
            "B1-WEAK" | "B1WEAK" => SystemId::B1Weak,
            _ => return Err(InequalityError::UnknownSystem(s.to_string())),
        })
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SystemId::B1 => "B1",
            SystemId::B2 => "B2",
            SystemId::B3 => "B3",
            SystemId::B4 => "B4",
            SystemId::B5 => "B5",
            SystemId::B1Weak => "B1-weak",
        };
        f.write_str(s)
    }
}

/// Replaces an unbounded variable by a bounded range: the constraint
/// `constraint` is nonincreasing in `var` over the whole region, and `var`
/// only appears elsewhere through `var ≥ floor_expr`, so any solution can
/// move `var` down to `floor_expr`, whose range is `range`.
#[derive(Clone, Debug)]
pub struct MonotoneReduction {
    pub var: Var,
    pub constraint: usize,
    pub range: (BigRational, BigRational),
}

#[derive(Clone, Debug)]
pub struct LemmaSystem {
    pub id: SystemId,
    pub constraints: Vec<Constraint>,
    /// Box containing every solution (after the reduction, if any).
    pub root: VarBox<BigRational>,
    pub reduction: Option<MonotoneReduction>,
}

fn ge(label: &str, expr: Expr) -> Constraint {
    Constraint {
        label: label.to_string(),
        expr,
        strict: false,
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::ratio(n, d)
}

fn rbox(bounds: &[(Var, (i64, i64), (i64, i64))]) -> VarBox<BigRational> {
    let mut iv: [Option<Interval<BigRational>>; 5] = Default::default();
    for &(v, lo, hi) in bounds {
        iv[v.idx()] = Some(Interval::new(rat(lo.0, lo.1), rat(hi.0, hi.1)));
    }
    VarBox { iv }
}

/// The constraint system for `id` with its root box. Every bound of the root
/// box follows from the constraints: lower bounds are stated directly (with
/// `β ≥ 1/2`), upper bounds come from `x + y + z < 1` and the other lower
/// bounds.
pub fn lemma_system(id: SystemId) -> LemmaSystem {
    use Var::*;
    let (x, y, z, zeta, beta) = (var(X), var(Y), var(Z), var(Zeta), var(Beta));
    let sum = Constraint {
        label: "1 > x + y + z".into(),
        expr: c(1, 1) - x.clone() - y.clone() - z.clone(),
        strict: true,
    };
    let beta_range = ge(
        "1/2 <= beta <= 2/3",
        (beta.clone() - c(1, 2)) * (c(2, 3) - beta.clone()),
    );
    let x_lo = ge("x >= 1/3", x.clone() - c(1, 3));
    let z_lo = ge("z >= beta - 1/2", z.clone() - beta.clone() + c(1, 2));
    let one_minus_gamma = c(1, 1) - gamma();
    let b1_main = ge(
        "(1-gamma)(z-beta+1/2) >= (1/2-z)(beta-x)",
        one_minus_gamma.clone() * (z.clone() - beta.clone() + c(1, 2))
            - (c(1, 2) - z.clone()) * (beta.clone() - x.clone()),
    );
    let b2_main = ge(
        "(1-gamma)(1-z) >= (1-x)(beta-z)",
        one_minus_gamma.clone() * (c(1, 1) - z.clone())
            - (c(1, 1) - x.clone()) * (beta.clone() - z.clone()),
    );
    let beta_box = (Beta, (1, 2), (2, 3));
    let (constraints, root, reduction) = match id {
        SystemId::B1 => (
            vec![
                sum,
                x_lo,
                ge("y >= 1/2", y.clone() - c(1, 2)),
                z_lo,
                b1_main,
                beta_range,
            ],
            rbox(&[
                (X, (1, 3), (1, 2)),
                (Y, (1, 2), (2, 3)),
                (Z, (0, 1), (1, 6)),
                beta_box,
            ]),
            None,
        ),
        SystemId::B1Weak => (
            vec![
                sum,
                x_lo,
                ge("y >= 0", y.clone()),
                z_lo,
                b1_main,
                beta_range,
            ],
            rbox(&[
                (X, (1, 3), (1, 1)),
                (Y, (0, 1), (2, 3)),
                (Z, (0, 1), (2, 3)),
                beta_box,
            ]),
            None,
        ),
        SystemId::B2 => (
            vec![
                sum,
                x_lo,
                ge("y >= 5/12", y.clone() - c(5, 12)),
                z_lo,
                b2_main,
                beta_range,
            ],
            rbox(&[
                (X, (1, 3), (7, 12)),
                (Y, (5, 12), (2, 3)),
                (Z, (0, 1), (1, 4)),
                beta_box,
            ]),
            None,
        ),
        SystemId::B3 => {
            let first = ge(
                "(1-gamma)(z-beta+1/2) >= (beta-z)(1/2-y)",
                one_minus_gamma.clone() * (z.clone() - beta.clone() + c(1, 2))
                    - (beta.clone() - z.clone()) * (c(1, 2) - y.clone()),
            );
            let second = ge(
                "(1-gamma)(z-beta+1/2) >= (beta-x)(1/2-z)",
                one_minus_gamma.clone() * (z.clone() - beta.clone() + c(1, 2))
                    - (beta.clone() - x.clone()) * (c(1, 2) - z.clone()),
            );
            (
                vec![
                    sum,
                    x_lo,
                    ge("y >= 1/3", y.clone() - c(1, 3)),
                    z_lo,
                    first,
                    second,
                    b2_main,
                    beta_range,
                ],
                rbox(&[
                    (X, (1, 3), (2, 3)),
                    (Y, (1, 3), (2, 3)),
                    (Z, (0, 1), (1, 3)),
                    beta_box,
                ]),
                None,
            )
        }
        SystemId::B4 => {
            let main = ge(
                "(1-beta)(y-gamma+1/2) >= (gamma-y)(1/2-z)",
                (c(1, 1) - beta.clone()) * (y.clone() - gamma() + c(1, 2))
                    - (gamma() - y.clone()) * (c(1, 2) - z.clone()),
            );
            (
                vec![
                    sum,
                    x_lo,
                    ge("y <= 1/3", c(1, 3) - y.clone()),
                    ge("y >= gamma - 1/2", y.clone() - gamma() + c(1, 2)),
                    z_lo,
                    main,
                    beta_range,
                ],
                rbox(&[
                    (X, (1, 3), (5, 6)),
                    (Y, (1, 6), (1, 3)),
                    (Z, (0, 1), (1, 2)),
                    beta_box,
                ]),
                None,
            )
        }
        SystemId::B5 => {
            let main = ge(
                "(1-y-2zeta)(beta-x) <= 2(1-beta)(1-gamma-zeta)",
                c(2, 1) * (c(1, 1) - beta.clone()) * (c(1, 1) - gamma() - zeta.clone())
                    - (c(1, 1) - y.clone() - c(2, 1) * zeta.clone()) * (beta.clone() - x.clone()),
            );
            (
                vec![
                    sum,
                    x_lo,
                    ge("y <= 1/3", c(1, 3) - y.clone()),
                    ge("y >= gamma - 1/2", y.clone() - gamma() + c(1, 2)),
                    ge("z >= beta - 1/4", z.clone() - beta.clone() + c(1, 4)),
                    ge("zeta >= 1/2 - y", zeta.clone() - c(1, 2) + y.clone()),
                    main,
                    beta_range,
                ],
                rbox(&[
                    (X, (1, 3), (7, 12)),
                    (Y, (1, 6), (1, 3)),
                    (Z, (1, 4), (1, 2)),
                    (Zeta, (1, 6), (1, 3)),
                    beta_box,
                ]),
                Some(MonotoneReduction {
                    var: Zeta,
                    constraint: 6,
                    range: (rat(1, 6), rat(1, 3)),
                }),
            )
        }
    };
    LemmaSystem {
        id,
        constraints,
        root,
        reduction,
    }
}

impl LemmaSystem {
    pub fn vars(&self) -> Vec<Var> {
        self.root.vars().collect()
    }

    pub fn polys<S: Scalar>(&self) -> Vec<Poly<S>> {
        self.constraints.iter().map(|c| c.expr.expand()).collect()
    }

    pub fn compiled<S: Scalar>(&self) -> Vec<Compiled<S>> {
        self.polys().into_iter().map(Compiled::new).collect()
    }

    /// Right-hand side a constraint must reach: `μ` for strict ones, else 0.
    pub fn required<S: Scalar>(&self, i: usize, margin: &S) -> S {
        if self.constraints[i].strict {
            margin.clone()
        } else {
            S::zero()
        }
    }

    /// Checks the original system (strict means `> 0`) at a point.
    pub fn satisfied_at<S: Scalar>(&self, p: &[Option<S>; 5]) -> Result<bool, InequalityError> {
        for c in &self.constraints {
            let v = c.expr.eval(p)?;
            if v < S::zero() || (c.strict && v.is_zero()) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A polynomial with its gradient, for mean-value enclosures.
#[derive(Clone, Debug)]
pub struct Compiled<S> {
    pub poly: Poly<S>,
    grads: Vec<(Var, Poly<S>)>,
}

impl<S: Scalar> Compiled<S> {
    pub fn new(poly: Poly<S>) -> Self {
        let grads = Var::ALL
            .into_iter()
            .filter(|&v| poly.degree_in(v) > 0)
            .map(|v| (v, poly.derivative(v)))
            .collect();
        Self { poly, grads }
    }

    /// Natural enclosure intersected with the mean-value form around the
    /// midpoint; the latter overestimates quadratically in the box width.
    pub fn enclose(&self, b: &VarBox<S>) -> Result<Interval<S>, InequalityError> {
        let natural = self.poly.eval_interval(b)?;
        let mid = b.midpoint();
        let mut centered = Interval::point(self.poly.eval(&mid)?);
        for (v, d) in &self.grads {
            let x = b.get(*v).ok_or(InequalityError::MissingVar(v.name()))?;
            let offset = x.sub(&Interval::point(mid[v.idx()].clone().expect("present")));
            centered = centered.add(&d.eval_interval(b)?.mul(&offset));
        }
        Ok(natural.intersect(&centered))
    }
}

/// Enclosure of a constraint: factored, expanded and mean-value forms intersected.
pub fn interval_eval<S: Scalar>(
    expr: &Expr,
    comp: &Compiled<S>,
    b: &VarBox<S>,
) -> Result<Interval<S>, InequalityError> {
    Ok(expr.eval_interval(b)?.intersect(&comp.enclose(b)?))
}

/// Fourier–Motzkin step on `var`: with `p = a·var + bp` (`a ≥ 0`) and
/// `s = c·var + ds` (`c ≤ 0`), every solution satisfies
/// `q = a·(ds − r_s) − c·(bp − r_p) ≥ 0`.
#[derive(Clone, Debug)]
struct Elimination {
    positive: usize,
    negative: usize,
    var: Var,
    a: Compiled<BigRational>,
    c: Compiled<BigRational>,
    q: Compiled<BigRational>,
}

fn elimination(
    sys: &LemmaSystem,
    polys: &[Compiled<BigRational>],
    positive: usize,
    negative: usize,
    var: Var,
    margin: &BigRational,
) -> Option<Elimination> {
    let (pp, sp) = (&polys[positive].poly, &polys[negative].poly);
    if positive == negative || pp.degree_in(var) != 1 || sp.degree_in(var) != 1 {
        return None;
    }
    // two linear constraints give a linear combination, which contraction already covers
    if pp.total_degree() < 2 && sp.total_degree() < 2 {
        return None;
    }
    let (a, bp) = pp.split_linear(var);
    let (c, ds) = sp.split_linear(var);
    let rp = Poly::constant(-sys.required(positive, margin));
    let rs = Poly::constant(-sys.required(negative, margin));
    let minus_one = -BigRational::one();
    let q = a
        .mul(&ds.add(&rs))
        .add(&c.mul(&bp.add(&rp)).scale(&minus_one));
    Some(Elimination {
        positive,
        negative,
        var,
        a: Compiled::new(a),
        c: Compiled::new(c),
        q: Compiled::new(q),
    })
}

impl Elimination {
    /// Upper bound of `q` over the box when the sign conditions hold there.
    fn bound(
        &self,
        b: &VarBox<BigRational>,
    ) -> Result<Option<Interval<BigRational>>, InequalityError> {
        let zero = BigRational::zero();
        if self.a.enclose(b)?.lo < zero || self.c.enclose(b)?.hi > zero {
            return Ok(None);
        }
        Ok(Some(self.q.enclose(b)?))
    }
}

/// Outward rounding grid for contracted bounds.
const GRID_BITS: u32 = 40;

/// One narrowing of `var` using `constraint - required ≥ 0`, linear in `var`.
/// Returns `true` if the box changed.
fn contract_step(
    poly: &Poly<BigRational>,
    required: &BigRational,
    v: Var,
    b: &mut VarBox<BigRational>,
) -> Result<bool, InequalityError> {
    let (a, rest) = poly.split_linear(v);
    let a_iv = a.eval_interval(b)?;
    let r_iv = rest
        .eval_interval(b)?
        .sub(&Interval::point(required.clone()));
    let cur = b.iv[v.idx()].clone().expect("variable present");
    let zero = BigRational::zero();
    // a·v + r ≥ 0 with a, r ranging over their enclosures
    let candidates = |den: &[BigRational]| -> Vec<BigRational> {
        den.iter().map(|d| -r_iv.hi.clone() / d.clone()).collect()
    };
    let mut next = cur.clone();
    if a_iv.lo > zero {
        let lo = candidates(&[a_iv.lo.clone(), a_iv.hi.clone()])
            .into_iter()
            .reduce(min2)
            .unwrap();
        next.lo = max2(cur.lo.clone(), lo.floor_to(GRID_BITS));
    } else if a_iv.hi < zero {
        let hi = candidates(&[a_iv.lo.clone(), a_iv.hi.clone()])
            .into_iter()
            .reduce(max2)
            .unwrap();
        next.hi = min2(cur.hi.clone(), hi.ceil_to(GRID_BITS));
    } else {
        return Ok(false);
    }
    if next == cur {
        return Ok(false);
    }
    // ignore tiny gains unless they empty the box
    let gain = cur.width() - next.width().max(zero.clone());
    let meaningful = next.is_empty() || gain * BigRational::from_integer(100.into()) >= cur.width();
    if meaningful {
        b.iv[v.idx()] = Some(next);
    }
    Ok(meaningful)
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractStep {
    pub constraint: usize,
    pub var: Var,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// Constraint `constraint` has enclosure `bound` with `bound.hi < required`.
    Violated {
        constraint: usize,
        bound: Interval<BigRational>,
    },
    /// Contraction emptied `var`.
    Emptied {
        var: Var,
    },
    /// The combination of `positive` and `negative` eliminating `var` has
    /// enclosure `bound` with `bound.hi < 0`.
    Eliminated {
        positive: usize,
        negative: usize,
        var: Var,
        bound: Interval<BigRational>,
    },
    Split {
        var: Var,
        children: Vec<CertNode>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct CertNode {
    #[serde(rename = "box")]
    pub region: VarBox<BigRational>,
    pub contractions: Vec<ContractStep>,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionRecord {
    pub var: Var,
    pub constraint: usize,
    pub derivative_bound: Interval<BigRational>,
    pub range: Interval<BigRational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub system: SystemId,
    pub margin: String,
    pub constraints: Vec<String>,
    pub reduction: Option<ReductionRecord>,
    pub max_depth: usize,
    pub leaf_count: usize,
    pub millis: u64,
    pub tree: CertNode,
}

#[derive(Clone, Debug, Serialize)]
pub struct FeasiblePoint {
    pub system: SystemId,
    pub point: BTreeMap<&'static str, String>,
}

#[derive(Clone, Debug)]
pub enum Certification {
    Infeasible(Certificate),
    Feasible(FeasiblePoint),
}

enum Abort {
    Feasible([Option<BigRational>; 5]),
    Undecided(VarBox<BigRational>, usize),
}

struct Certifier<'s> {
    sys: &'s LemmaSystem,
    polys: Vec<Compiled<BigRational>>,
    linear: Vec<(usize, Var)>,
    eliminations: Vec<Elimination>,
    margin: BigRational,
    max_depth: usize,
}

impl Certifier<'_> {
    fn contract(
        &self,
        b: &mut VarBox<BigRational>,
        steps: &mut Vec<ContractStep>,
    ) -> Result<Option<Var>, InequalityError> {
        for _ in 0..8 {
            let mut changed = false;
            for &(ci, v) in &self.linear {
                let req = self.sys.required(ci, &self.margin);
                if contract_step(&self.polys[ci].poly, &req, v, b)? {
                    steps.push(ContractStep {
                        constraint: ci,
                        var: v,
                    });
                    changed = true;
                    if b.get(v).unwrap().is_empty() {
                        return Ok(Some(v));
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Ok(None)
    }

    fn violated(
        &self,
        b: &VarBox<BigRational>,
    ) -> Result<Option<(usize, Interval<BigRational>)>, InequalityError> {
        for (i, c) in self.sys.constraints.iter().enumerate() {
            let iv = interval_eval(&c.expr, &self.polys[i], b)?;
            if iv.hi < self.sys.required(i, &self.margin) {
                return Ok(Some((i, iv)));
            }
        }
        Ok(None)
    }

    fn solve(
        &self,
        region: VarBox<BigRational>,
        depth: usize,
    ) -> Result<Result<CertNode, Abort>, InequalityError> {
        let mut b = region.clone();
        let mut contractions = Vec::new();
        if let Some(v) = self.contract(&mut b, &mut contractions)? {
            return Ok(Ok(CertNode {
                region,
                contractions,
                outcome: Outcome::Emptied { var: v },
            }));
        }
        if let Some((constraint, bound)) = self.violated(&b)? {
            return Ok(Ok(CertNode {
                region,
                contractions,
                outcome: Outcome::Violated { constraint, bound },
            }));
        }
        for e in &self.eliminations {
            if let Some(bound) = e.bound(&b)? {
                if bound.hi < BigRational::zero() {
                    let outcome = Outcome::Eliminated {
                        positive: e.positive,
                        negative: e.negative,
                        var: e.var,
                        bound,
                    };
                    return Ok(Ok(CertNode {
                        region,
                        contractions,
                        outcome,
                    }));
                }
            }
        }
        for p in probe_points(&b) {
            if self.sys.satisfied_at(&p)? {
                return Ok(Err(Abort::Feasible(p)));
            }
        }
        if depth >= self.max_depth {
            return Ok(Err(Abort::Undecided(b, depth)));
        }
        let v = b.widest();
        let (left, right) = b.bisect(v);
        let (l, r) = if depth < 48 {
            rayon::join(
                || self.solve(left, depth + 1),
                || self.solve(right, depth + 1),
            )
        } else {
            (self.solve(left, depth + 1), self.solve(right, depth + 1))
        };
        let (l, r) = (l?, r?);
        Ok(match (l, r) {
            (Ok(a), Ok(b2)) => Ok(CertNode {
                region,
                contractions,
                outcome: Outcome::Split {
                    var: v,
                    children: vec![a, b2],
                },
            }),
            (Err(e), _) | (_, Err(e)) => Err(e),
        })
    }
}

/// Midpoint and corners of a box: cheap places to look for a solution.
fn probe_points<S: Scalar>(b: &VarBox<S>) -> Vec<[Option<S>; 5]> {
    let vars: Vec<Var> = b.vars().collect();
    let mut out = vec![b.midpoint()];
    for mask in 0..1usize << vars.len() {
        let mut p: [Option<S>; 5] = Default::default();
        for (bit, v) in vars.iter().enumerate() {
            let iv = b.get(*v).unwrap();
            p[v.idx()] = Some(if mask >> bit & 1 == 1 {
                iv.hi.clone()
            } else {
                iv.lo.clone()
            });
        }
        out.push(p);
    }
    out
}

fn linear_pairs(sys: &LemmaSystem, polys: &[Compiled<BigRational>]) -> Vec<(usize, Var)> {
    let vars = sys.vars();
    let mut out = Vec::new();
    for (i, p) in polys.iter().enumerate() {
        for &v in &vars {
            if p.poly.degree_in(v) == 1 {
                out.push((i, v));
            }
        }
    }
    out
}

fn check_reduction(
    sys: &LemmaSystem,
    polys: &[Compiled<BigRational>],
) -> Result<Option<ReductionRecord>, InequalityError> {
    let Some(red) = &sys.reduction else {
        return Ok(None);
    };
    let d = polys[red.constraint].poly.derivative(red.var);
    if d.degree_in(red.var) > 0 {
        return Err(InequalityError::Reduction {
            var: red.var.name(),
            bound: "derivative depends on the variable".into(),
        });
    }
    let mut whole = sys.root.clone();
    whole.iv[red.var.idx()] = None;
    let bound = d.eval_interval(&whole)?;
    if bound.hi > BigRational::zero() {
        return Err(InequalityError::Reduction {
            var: red.var.name(),
            bound: bound.to_string(),
        });
    }
    Ok(Some(ReductionRecord {
        var: red.var,
        constraint: red.constraint,
        derivative_bound: bound,
        range: Interval::new(red.range.0.clone(), red.range.1.clone()),
    }))
}

fn depth_and_leaves(n: &CertNode) -> (usize, usize) {
    match &n.outcome {
        Outcome::Split { children, .. } => {
            let parts: Vec<(usize, usize)> = children.iter().map(depth_and_leaves).collect();
            (
                1 + parts.iter().map(|p| p.0).max().unwrap_or(0),
                parts.iter().map(|p| p.1).sum(),
            )
        }
        _ => (0, 1),
    }
}

fn point_map(p: &[Option<BigRational>; 5]) -> BTreeMap<&'static str, String> {
    Var::ALL
        .iter()
        .filter_map(|v| p[v.idx()].as_ref().map(|x| (v.name(), x.to_string())))
        .collect()
}

/// Certifies that the tightened system has no solution, or reports an exact
/// feasible point.
pub fn certify_infeasible(
    id: SystemId,
    max_depth: usize,
    margin: &BigRational,
) -> Result<Certification, InequalityError> {
    let started = Instant::now();
    let sys = lemma_system(id);
    let polys = sys.compiled::<BigRational>();
    let reduction = check_reduction(&sys, &polys)?;
    let mut eliminations = Vec::new();
    for p in 0..polys.len() {
        for s2 in 0..polys.len() {
            for v in sys.vars() {
                eliminations.extend(elimination(&sys, &polys, p, s2, v, margin));
            }
        }
    }
    let certifier = Certifier {
        sys: &sys,
        linear: linear_pairs(&sys, &polys),
        eliminations,
        polys,
        margin: margin.clone(),
        max_depth,
    };
    match certifier.solve(sys.root.clone(), 0)? {
        Ok(tree) => {
            let (depth, leaves) = depth_and_leaves(&tree);
            Ok(Certification::Infeasible(Certificate {
                system: id,
                margin: margin.to_string(),
                constraints: sys.constraints.iter().map(|c| c.label.clone()).collect(),
                reduction,
                max_depth: depth,
                leaf_count: leaves,
                millis: started.elapsed().as_millis() as u64,
                tree,
            }))
        }
        Err(Abort::Feasible(p)) => Ok(Certification::Feasible(FeasiblePoint {
            system: id,
            point: point_map(&p),
        })),
        Err(Abort::Undecided(b, depth)) => Err(InequalityError::DepthExhausted {
            depth,
            region: serde_json::to_string(&b).unwrap_or_default(),
        }),
    }
}

/// Replays a certificate: every contraction, every leaf bound and every split
/// is recomputed from the system and compared.
pub fn verify_certificate(cert: &Certificate) -> Result<(), InequalityError> {
    let sys = lemma_system(cert.system);
    let polys = sys.compiled::<BigRational>();
    let margin: BigRational = cert
        .margin
        .parse()
        .map_err(|_| InequalityError::BadCertificate(format!("margin {}", cert.margin)))?;
    let bad = |m: String| InequalityError::BadCertificate(m);
    let recorded = check_reduction(&sys, &polys)?;
    if recorded.is_some() != cert.reduction.is_some() {
        return Err(bad("reduction record mismatch".into()));
    }
    if cert.tree.region != sys.root {
        return Err(bad("tree does not start at the root box".into()));
    }
    let mut stack = vec![&cert.tree];
    while let Some(node) = stack.pop() {
        let mut b = node.region.clone();
        for s in &node.contractions {
            if polys[s.constraint].poly.degree_in(s.var) != 1 {
                return Err(bad(format!("contraction on nonlinear {}", s.var.name())));
            }
            contract_step(
                &polys[s.constraint].poly,
                &sys.required(s.constraint, &margin),
                s.var,
                &mut b,
            )?;
        }
        match &node.outcome {
            Outcome::Emptied { var } => {
                if !b.get(*var).is_some_and(Interval::is_empty) {
                    return Err(bad(format!("{} not emptied", var.name())));
                }
            }
            Outcome::Violated { constraint, bound } => {
                let iv =
                    interval_eval(&sys.constraints[*constraint].expr, &polys[*constraint], &b)?;
                if &iv != bound || iv.hi >= sys.required(*constraint, &margin) {
                    return Err(bad(format!(
                        "leaf bound {bound} does not reproduce (got {iv})"
                    )));
                }
            }
            Outcome::Eliminated {
                positive,
                negative,
                var,
                bound,
            } => {
                let e = elimination(&sys, &polys, *positive, *negative, *var, &margin).ok_or_else(
                    || {
                        bad(format!(
                            "no elimination of {} from ({positive}, {negative})",
                            var.name()
                        ))
                    },
                )?;
                match e.bound(&b)? {
                    Some(iv) if &iv == bound && iv.hi < BigRational::zero() => {}
                    other => {
                        return Err(bad(format!(
                            "elimination bound {bound} does not reproduce (got {other:?})"
                        )))
                    }
                }
            }
            Outcome::Split { var, children } => {
                let (l, r) = b.bisect(*var);
                if children.len() != 2 || children[0].region != l || children[1].region != r {
                    return Err(bad("split children do not halve the box".into()));
                }
                stack.extend(children);
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct GridResult {
    pub system: SystemId,
    pub resolution: usize,
    pub point: BTreeMap<&'static str, String>,
    /// Maximum violation at `point`, recomputed exactly.
    pub violation: String,
    pub violation_f64: f64,
    pub nodes: u64,
}

/// `max_i max(0, required_i − g_i)` at a point.
pub fn violation<S: Scalar>(
    sys: &LemmaSystem,
    polys: &[Poly<S>],
    p: &[Option<S>; 5],
    margin: &S,
) -> Result<S, InequalityError> {
    let mut worst = S::zero();
    for (i, poly) in polys.iter().enumerate() {
        let gap = sys.required(i, margin) - poly.eval(p)?;
        worst = max2(worst, gap);
    }
    Ok(worst)
}

struct GridSearch<'s, S> {
    sys: &'s LemmaSystem,
    polys: Vec<Compiled<S>>,
    points: Vec<Poly<S>>,
    root: VarBox<S>,
    res: usize,
    margin: S,
    best: Option<(S, [usize; 5])>,
    nodes: u64,
}

impl<S: Scalar> GridSearch<'_, S> {
    fn value(&self, v: Var, i: usize) -> S {
        let iv = self.root.get(v).unwrap();
        let t = S::ratio(i as i64, self.res as i64 - 1);
        iv.lo.clone() + (iv.hi.clone() - iv.lo.clone()) * t
    }

    fn region(&self, ranges: &[(usize, usize); 5]) -> VarBox<S> {
        let mut b = self.root.clone();
        for v in Var::ALL {
            if b.iv[v.idx()].is_some() {
                let (a, z) = ranges[v.idx()];
                b.iv[v.idx()] = Some(Interval::new(self.value(v, a), self.value(v, z)));
            }
        }
        b
    }

    fn lower_bound(&self, b: &VarBox<S>) -> Result<S, InequalityError> {
        let mut worst = S::zero();
        for (i, c) in self.sys.constraints.iter().enumerate() {
            let iv = interval_eval(&c.expr, &self.polys[i], b)?;
            worst = max2(worst, self.sys.required(i, &self.margin) - iv.hi);
        }
        Ok(worst)
    }

    fn run(&mut self, ranges: [(usize, usize); 5]) -> Result<(), InequalityError> {
        self.nodes += 1;
        let b = self.region(&ranges);
        let lb = self.lower_bound(&b)?;
        if self.best.as_ref().is_some_and(|(best, _)| lb >= *best) {
            return Ok(());
        }
        let widest = Var::ALL
            .into_iter()
            .filter(|v| b.iv[v.idx()].is_some())
            .max_by_key(|v| {
                (
                    ranges[v.idx()].1 - ranges[v.idx()].0,
                    std::cmp::Reverse(v.idx()),
                )
            })
            .unwrap();
        let (a, z) = ranges[widest.idx()];
        if a == z {
            let p = b.midpoint();
            let val = violation(self.sys, &self.points, &p, &self.margin)?;
            if self.best.as_ref().map_or(true, |(best, _)| val < *best) {
                self.best = Some((val, ranges.map(|r| r.0)));
            }
            return Ok(());
        }
        let mid = (a + z) / 2;
        let mut left = ranges;
        left[widest.idx()] = (a, mid);
        let mut right = ranges;
        right[widest.idx()] = (mid + 1, z);
        let (lb_l, lb_r) = (
            self.lower_bound(&self.region(&left))?,
            self.lower_bound(&self.region(&right))?,
        );
        if lb_r < lb_l {
            self.run(right)?;
            self.run(left)
        } else {
            self.run(left)?;
            self.run(right)
        }
    }
}

/// Minimises the maximum constraint violation over a grid of `resolution`
/// points per axis spanning the root box. The search prunes grid blocks by
/// interval bounds in `S`, and the winning point is re-evaluated exactly.
pub fn grid_scan<S: Scalar>(
    id: SystemId,
    resolution: usize,
    margin: &BigRational,
) -> Result<GridResult, InequalityError> {
    let resolution = resolution.max(2);
    let sys = lemma_system(id);
    let mut search = GridSearch::<S> {
        sys: &sys,
        polys: sys.compiled(),
        points: sys.polys(),
        root: sys.root.convert(),
        res: resolution,
        margin: S::from_rational(margin),
        best: None,
        nodes: 0,
    };
    let full = [(0, resolution - 1); 5];
    search.run(full)?;
    let (_, idx) = search.best.clone().expect("grid is non-empty");
    let exact: [Option<BigRational>; 5] = Var::ALL.map(|v| {
        sys.root.get(v).map(|iv| {
            iv.lo.clone()
                + iv.width() * BigRational::ratio(idx[v.idx()] as i64, resolution as i64 - 1)
        })
    });
    let v = violation(&sys, &sys.polys::<BigRational>(), &exact, margin)?;
    Ok(GridResult {
        system: id,
        resolution,
        point: point_map(&exact),
        violation_f64: Scalar::to_f64(&v),
        violation: v.to_string(),
        nodes: search.nodes,
    })
}

/// Default margin `μ = 10⁻⁶`.
pub fn default_margin() -> BigRational {
    BigRational::ratio(1, 1_000_000)
}
