//! Exact rationals with an `i64` fast path. Values that fit are always kept
//! small, so the representation is canonical and derived equality and
//! hashing are sound.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Rat {
    /// numerator, denominator > 0, coprime, numerator != i64::MIN
    S(i64, i64),
    B(BigRational),
}

fn fit(n: i128, d: i128) -> Rat {
    // d > 0 and gcd(n, d) = 1 assumed
    if n > i64::MIN as i128 && n <= i64::MAX as i128 && d <= i64::MAX as i128 {
        Rat::S(n as i64, d as i64)
    } else {
        Rat::B(BigRational::new_raw(BigInt::from(n), BigInt::from(d)))
    }
}

fn norm(mut n: i128, mut d: i128) -> Rat {
    if d < 0 {
        n = -n;
        d = -d;
    }
    let g = n.gcd(&d);
    if g > 1 {
        n /= g;
        d /= g;
    }
    fit(n, d)
}

fn from_big(b: BigRational) -> Rat {
    match (b.numer().to_i64(), b.denom().to_i64()) {
        (Some(n), Some(d)) if n != i64::MIN => Rat::S(n, d),
        _ => Rat::B(b),
    }
}

impl Rat {
    pub fn new(n: BigInt, d: BigInt) -> Rat {
        from_big(BigRational::new(n, d))
    }

    pub fn from_integer(n: BigInt) -> Rat {
        from_big(BigRational::from_integer(n))
    }

    pub fn small(n: i64, d: i64) -> Rat {
        assert!(d != 0, "zero denominator");
        norm(n as i128, d as i128)
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rat::S(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Rat::B(b) => b.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Rat::S(n, _) => BigInt::from(*n),
            Rat::B(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Rat::S(_, d) => BigInt::from(*d),
            Rat::B(b) => b.denom().clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rat::S(_, d) => *d == 1,
            Rat::B(b) => b.is_integer(),
        }
    }

    pub fn recip(&self) -> Rat {
        match self {
            Rat::S(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                norm(*d as i128, *n as i128)
            }
            Rat::B(b) => from_big(b.recip()),
        }
    }

    pub fn floor(&self) -> Rat {
        match self {
            Rat::S(n, d) => Rat::S(Integer::div_floor(n, d), 1),
            Rat::B(b) => from_big(b.floor()),
        }
    }

    pub fn ceil(&self) -> Rat {
        match self {
            Rat::S(n, d) => fit(-Integer::div_floor(&-(*n as i128), &(*d as i128)), 1),
            Rat::B(b) => from_big(b.ceil()),
        }
    }

    pub fn to_integer(&self) -> BigInt {
        match self {
            Rat::S(n, d) => BigInt::from(n / d),
            Rat::B(b) => b.to_integer(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rat::S(n, d) => *n as f64 / *d as f64,
            Rat::B(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl Default for Rat {
    fn default() -> Rat {
        Rat::S(0, 1)
    }
}

impl Zero for Rat {
    fn zero() -> Rat {
        Rat::S(0, 1)
    }
    fn is_zero(&self) -> bool {
        matches!(self, Rat::S(0, _))
    }
}

impl One for Rat {
    fn one() -> Rat {
        Rat::S(1, 1)
    }
    fn is_one(&self) -> bool {
        matches!(self, Rat::S(1, 1))
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, o: &Rat) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Rat {
    fn cmp(&self, o: &Rat) -> Ordering {
        match (self, o) {
            (Rat::S(a, b), Rat::S(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&o.to_big()),
        }
    }
}

fn add_ref(a: &Rat, b: &Rat) -> Rat {
    match (a, b) {
        (Rat::S(0, _), x) | (x, Rat::S(0, _)) => x.clone(),
        (Rat::S(an, ad), Rat::S(bn, bd)) => {
            if ad == bd {
                norm(*an as i128 + *bn as i128, *ad as i128)
            } else {
                norm(*an as i128 * *bd as i128 + *bn as i128 * *ad as i128, *ad as i128 * *bd as i128)
            }
        }
        _ => from_big(a.to_big() + b.to_big()),
    }
}

fn mul_ref(a: &Rat, b: &Rat) -> Rat {
    match (a, b) {
        (Rat::S(0, _), _) | (_, Rat::S(0, _)) => Rat::zero(),
        (Rat::S(1, 1), x) | (x, Rat::S(1, 1)) => x.clone(),
        (Rat::S(an, ad), Rat::S(bn, bd)) => {
            let g1 = (*an as i128).gcd(&(*bd as i128)).max(1);
            let g2 = (*bn as i128).gcd(&(*ad as i128)).max(1);
            fit((*an as i128 / g1) * (*bn as i128 / g2), (*ad as i128 / g2) * (*bd as i128 / g1))
        }
        _ => from_big(a.to_big() * b.to_big()),
    }
}

fn neg_ref(a: &Rat) -> Rat {
    match a {
        Rat::S(n, d) => Rat::S(-n, *d),
        Rat::B(b) => from_big(-b.clone()),
    }
}

fn div_ref(a: &Rat, b: &Rat) -> Rat {
    mul_ref(a, &b.recip())
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:expr) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, o: &Rat) -> Rat {
                $f(self, o)
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                $f(&self, &o)
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: &Rat) -> Rat {
                $f(&self, o)
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                $f(self, &o)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Mul, mul, mul_ref);
binop!(Div, div, div_ref);
binop!(Sub, sub, |a: &Rat, b: &Rat| add_ref(a, &neg_ref(b)));

macro_rules! assignop {
    ($tr:ident, $m:ident, $f:expr) => {
        impl $tr<&Rat> for Rat {
            fn $m(&mut self, o: &Rat) {
                *self = $f(&*self, o);
            }
        }
        impl $tr<Rat> for Rat {
            fn $m(&mut self, o: Rat) {
                *self = $f(&*self, &o);
            }
        }
    };
}

assignop!(AddAssign, add_assign, add_ref);
assignop!(MulAssign, mul_assign, mul_ref);
assignop!(DivAssign, div_assign, div_ref);
assignop!(SubAssign, sub_assign, |a: &Rat, b: &Rat| add_ref(a, &neg_ref(b)));

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        neg_ref(&self)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        neg_ref(self)
    }
}

impl Signed for Rat {
    fn abs(&self) -> Rat {
        if self.is_negative() {
            neg_ref(self)
        } else {
            self.clone()
        }
    }
    fn abs_sub(&self, o: &Rat) -> Rat {
        if self <= o {
            Rat::zero()
        } else {
            self - o
        }
    }
    fn signum(&self) -> Rat {
        if self.is_zero() {
            Rat::zero()
        } else if self.is_negative() {
            Rat::S(-1, 1)
        } else {
            Rat::one()
        }
    }
    fn is_positive(&self) -> bool {
        match self {
            Rat::S(n, _) => *n > 0,
            Rat::B(b) => b.is_positive(),
        }
    }
    fn is_negative(&self) -> bool {
        match self {
            Rat::S(n, _) => *n < 0,
            Rat::B(b) => b.is_negative(),
        }
    }
}

impl num_traits::Num for Rat {
    type FromStrRadixErr = num_rational::ParseRatioError;
    fn from_str_radix(s: &str, r: u32) -> Result<Rat, Self::FromStrRadixErr> {
        BigRational::from_str_radix(s, r).map(from_big)
    }
}

impl std::ops::Rem for Rat {
    type Output = Rat;
    fn rem(self, o: Rat) -> Rat {
        from_big(self.to_big() % o.to_big())
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::S(n, 1) => write!(f, "{n}"),
            Rat::S(n, d) => write!(f, "{n}/{d}"),
            Rat::B(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
