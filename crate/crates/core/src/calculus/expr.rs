//! Nice functions: the closure of `x` and rational constants under `+`,
//! `-`, `*` and `exp`.

use std::fmt;
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Expression tree over `x`. Subtrees are shared, so cloning is cheap.
///
/// The smart constructors fold constant arithmetic and the identities
/// `0 + e`, `e - 0`, `1 * e`, `0 * e` and `exp(0)`; nothing else is
/// simplified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NiceExpr {
    X,
    Const(BigRational),
    Add(Rc<NiceExpr>, Rc<NiceExpr>),
    Sub(Rc<NiceExpr>, Rc<NiceExpr>),
    Mul(Rc<NiceExpr>, Rc<NiceExpr>),
    Exp(Rc<NiceExpr>),
}

impl NiceExpr {
    pub fn x() -> NiceExpr {
        NiceExpr::X
    }

    pub fn int(n: i64) -> NiceExpr {
        NiceExpr::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(numer: i64, denom: i64) -> NiceExpr {
        NiceExpr::Const(BigRational::new(numer.into(), denom.into()))
    }

    pub fn constant(q: BigRational) -> NiceExpr {
        NiceExpr::Const(q)
    }

    fn as_const(&self) -> Option<&BigRational> {
        match self {
            NiceExpr::Const(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_const(&self, q: i64) -> bool {
        self.as_const()
            .is_some_and(|c| *c == BigRational::from_integer(q.into()))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: NiceExpr, b: NiceExpr) -> NiceExpr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => NiceExpr::Const(p + q),
            (Some(p), _) if p.is_zero() => b,
            (_, Some(q)) if q.is_zero() => a,
            _ => NiceExpr::Add(Rc::new(a), Rc::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: NiceExpr, b: NiceExpr) -> NiceExpr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => NiceExpr::Const(p - q),
            (_, Some(q)) if q.is_zero() => a,
            _ => NiceExpr::Sub(Rc::new(a), Rc::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: NiceExpr, b: NiceExpr) -> NiceExpr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => NiceExpr::Const(p * q),
            (Some(p), _) | (_, Some(p)) if p.is_zero() => NiceExpr::int(0),
            (Some(p), _) if p.is_one() => b,
            (_, Some(q)) if q.is_one() => a,
            _ => NiceExpr::Mul(Rc::new(a), Rc::new(b)),
        }
    }

    pub fn exp(a: NiceExpr) -> NiceExpr {
        match a.as_const() {
            Some(p) if p.is_zero() => NiceExpr::int(1),
            _ => NiceExpr::Exp(Rc::new(a)),
        }
    }

    pub fn sum(terms: impl IntoIterator<Item = NiceExpr>) -> NiceExpr {
        terms.into_iter().fold(NiceExpr::int(0), NiceExpr::add)
    }

    pub fn product(factors: impl IntoIterator<Item = NiceExpr>) -> NiceExpr {
        factors.into_iter().fold(NiceExpr::int(1), NiceExpr::mul)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            NiceExpr::X => x,
            NiceExpr::Const(q) => q.to_f64().expect("rational converts to f64"),
            NiceExpr::Add(a, b) => a.eval(x) + b.eval(x),
            NiceExpr::Sub(a, b) => a.eval(x) - b.eval(x),
            NiceExpr::Mul(a, b) => a.eval(x) * b.eval(x),
            NiceExpr::Exp(a) => a.eval(x).exp(),
        }
    }

    /// Visits every node, parents before children.
    pub fn walk(&self, f: &mut impl FnMut(&NiceExpr)) {
        f(self);
        match self {
            NiceExpr::X | NiceExpr::Const(_) => {}
            NiceExpr::Add(a, b) | NiceExpr::Sub(a, b) | NiceExpr::Mul(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            NiceExpr::Exp(a) => a.walk(f),
        }
    }

    /// Number of nodes with shared subtrees counted once per occurrence.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    fn precedence(&self) -> u8 {
        match self {
            NiceExpr::Add(..) | NiceExpr::Sub(..) => 1,
            NiceExpr::Mul(..) => 2,
            NiceExpr::Const(q) if q.is_negative() || !q.is_integer() => 2,
            _ => 3,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, right: bool) -> fmt::Result {
        match self {
            NiceExpr::X => f.write_str("x"),
            NiceExpr::Const(q) if right && q.is_negative() => write!(f, "({q})"),
            NiceExpr::Const(q) => write!(f, "{q}"),
            NiceExpr::Add(a, b) => {
                a.write(f, false)?;
                f.write_str("+")?;
                b.write(f, true)
            }
            NiceExpr::Sub(a, b) => {
                a.write(f, false)?;
                f.write_str("-")?;
                wrap(f, b, b.precedence() <= 1, true)
            }
            NiceExpr::Mul(a, b) => {
                wrap(f, a, a.precedence() < 2, false)?;
                f.write_str("*")?;
                let ratio = matches!(**b, NiceExpr::Const(ref q) if !q.is_integer());
                wrap(f, b, b.precedence() < 2 || ratio, true)
            }
            NiceExpr::Exp(a) => {
                f.write_str("exp(")?;
                a.write(f, false)?;
                f.write_str(")")
            }
        }
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &NiceExpr, parens: bool, right: bool) -> fmt::Result {
    if parens {
        f.write_str("(")?;
        e.write(f, false)?;
        f.write_str(")")
    } else {
        e.write(f, right)
    }
}

impl fmt::Display for NiceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, false)
    }
}
