use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::term::Term;

/// An affine integer expression `c · x + d`.
///
/// Coefficients are stored densely by variable index with trailing zeros
/// trimmed, so two expressions denoting the same function compare equal
/// regardless of the dimension they were built in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinExpr {
    coeffs: Vec<BigInt>,
    offset: BigInt,
}

impl LinExpr {
    pub fn new(coeffs: Vec<BigInt>, offset: BigInt) -> Self {
        let mut e = LinExpr { coeffs, offset };
        e.trim();
        e
    }

    pub fn from_i64s(coeffs: &[i64], offset: i64) -> Self {
        LinExpr::new(coeffs.iter().map(|&c| BigInt::from(c)).collect(), BigInt::from(offset))
    }

    pub fn zero() -> Self {
        LinExpr::default()
    }

    pub fn constant(d: impl Into<BigInt>) -> Self {
        LinExpr { coeffs: Vec::new(), offset: d.into() }
    }

    pub fn var(i: usize) -> Self {
        LinExpr::scaled_var(i, BigInt::one())
    }

    pub fn scaled_var(i: usize, c: impl Into<BigInt>) -> Self {
        let mut coeffs = vec![BigInt::zero(); i + 1];
        coeffs[i] = c.into();
        LinExpr::new(coeffs, BigInt::zero())
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn offset(&self) -> &BigInt {
        &self.offset
    }

    /// One past the largest variable index with a nonzero coefficient.
    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn set_coeff(&mut self, i: usize, c: BigInt) {
        if self.coeffs.len() <= i {
            if c.is_zero() {
                return;
            }
            self.coeffs.resize(i + 1, BigInt::zero());
        }
        self.coeffs[i] = c;
        self.trim();
    }

    pub fn set_offset(&mut self, d: BigInt) {
        self.offset = d;
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn mentions(&self, i: usize) -> bool {
        self.coeffs.get(i).is_some_and(|c| !c.is_zero())
    }

    /// Indices of variables with a nonzero coefficient.
    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, _)| i)
    }

    pub fn eval(&self, vals: &[BigInt]) -> BigInt {
        let mut acc = self.offset.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc += c * vals.get(i).cloned().unwrap_or_default();
            }
        }
        acc
    }

    pub fn scale(&self, k: &BigInt) -> LinExpr {
        if k.is_zero() {
            return LinExpr::zero();
        }
        LinExpr { coeffs: self.coeffs.iter().map(|c| c * k).collect(), offset: &self.offset * k }
    }

    pub fn add_constant(&self, d: &BigInt) -> LinExpr {
        LinExpr { coeffs: self.coeffs.clone(), offset: &self.offset + d }
    }

    /// Simultaneously replaces every variable `i < images.len()` by
    /// `images[i]`; variables beyond the slice are left in place.
    pub fn compose(&self, images: &[LinExpr]) -> LinExpr {
        let mut out = LinExpr::constant(self.offset.clone());
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match images.get(i) {
                Some(img) => out = &out + &img.scale(c),
                None => out = &out + &LinExpr::scaled_var(i, c.clone()),
            }
        }
        out
    }

    /// Replaces variable `i` by `image`.
    pub fn substitute(&self, i: usize, image: &LinExpr) -> LinExpr {
        let c = self.coeff(i);
        if c.is_zero() {
            return self.clone();
        }
        let mut rest = self.clone();
        rest.set_coeff(i, BigInt::zero());
        &rest + &image.scale(&c)
    }

    /// Gcd of all variable coefficients (zero for a constant).
    pub fn coeff_gcd(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn to_term(&self) -> Term {
        let mut acc: Option<Term> = None;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            acc = Some(match acc {
                None => scaled_var_term(c, i),
                Some(prev) if c.is_negative() => Term::Add(
                    Box::new(prev),
                    Box::new(Term::Mul(BigInt::from(-1), Box::new(scaled_var_term(&-c, i)))),
                ),
                Some(prev) => Term::Add(Box::new(prev), Box::new(scaled_var_term(c, i))),
            });
        }
        match acc {
            None => Term::Const(self.offset.clone()),
            Some(t) if self.offset.is_zero() => t,
            Some(t) if self.offset.is_negative() => Term::Add(
                Box::new(t),
                Box::new(Term::Mul(BigInt::from(-1), Box::new(Term::Const(-&self.offset)))),
            ),
            Some(t) => Term::Add(Box::new(t), Box::new(Term::Const(self.offset.clone()))),
        }
    }

    pub fn display_with<'a>(&'a self, names: &'a dyn Fn(usize) -> String) -> impl fmt::Display + 'a {
        struct D<'a>(&'a LinExpr, &'a dyn Fn(usize) -> String);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let mut first = true;
                for i in self.0.vars() {
                    let c = &self.0.coeffs[i];
                    let name = (self.1)(i);
                    if first {
                        if c.is_one() {
                            write!(f, "{name}")?;
                        } else if *c == BigInt::from(-1) {
                            write!(f, "-{name}")?;
                        } else {
                            write!(f, "{c}*{name}")?;
                        }
                    } else if c.is_negative() {
                        let m = -c;
                        if m.is_one() {
                            write!(f, " - {name}")?;
                        } else {
                            write!(f, " - {m}*{name}")?;
                        }
                    } else if c.is_one() {
                        write!(f, " + {name}")?;
                    } else {
                        write!(f, " + {c}*{name}")?;
                    }
                    first = false;
                }
                if first {
                    write!(f, "{}", self.0.offset)
                } else if self.0.offset.is_negative() {
                    write!(f, " - {}", -&self.0.offset)
                } else if !self.0.offset.is_zero() {
                    write!(f, " + {}", self.0.offset)
                } else {
                    Ok(())
                }
            }
        }
        D(self, names)
    }
}

fn scaled_var_term(c: &BigInt, i: usize) -> Term {
    if c.is_one() {
        Term::Var(i)
    } else {
        Term::Mul(c.clone(), Box::new(Term::Var(i)))
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |i: usize| format!("x{i}");
        let shown = self.display_with(&names);
        write!(f, "{shown}")
    }
}

impl Add for &LinExpr {
    type Output = LinExpr;
    fn add(self, rhs: &LinExpr) -> LinExpr {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        LinExpr::new(coeffs, &self.offset + &rhs.offset)
    }
}

impl Sub for &LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: &LinExpr) -> LinExpr {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        LinExpr::new(coeffs, &self.offset - &rhs.offset)
    }
}

impl Neg for &LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        LinExpr { coeffs: self.coeffs.iter().map(|c| -c).collect(), offset: -&self.offset }
    }
}

impl Mul<&BigInt> for &LinExpr {
    type Output = LinExpr;
    fn mul(self, k: &BigInt) -> LinExpr {
        self.scale(k)
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(self, rhs: LinExpr) -> LinExpr {
        &self + &rhs
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(self, rhs: LinExpr) -> LinExpr {
        &self - &rhs
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn trailing_zeros_do_not_affect_equality() {
        let a = LinExpr::from_i64s(&[1, 0, 0], 2);
        let b = LinExpr::from_i64s(&[1], 2);
        assert_eq!(a, b);
        assert_eq!(a.support_len(), 1);
    }

    #[test]
    fn arithmetic_is_closed() {
        let x = LinExpr::var(0);
        let y = LinExpr::var(1);
        let e = &(&x - &y) + &LinExpr::constant(3);
        assert_eq!(e.eval(&[b(5), b(2)]), b(6));
        assert_eq!((&e - &e), LinExpr::zero());
        assert_eq!(e.scale(&b(2)).eval(&[b(5), b(2)]), b(12));
    }

    #[test]
    fn compose_substitutes_simultaneously() {
        // x0 + 2*x1 with x0 := x1, x1 := x0 + 1
        let e = LinExpr::from_i64s(&[1, 2], 0);
        let out = e.compose(&[LinExpr::var(1), LinExpr::from_i64s(&[1], 1)]);
        assert_eq!(out, LinExpr::from_i64s(&[2, 1], 2));
    }

    #[test]
    fn to_term_evaluates_identically() {
        let e = LinExpr::from_i64s(&[1, -1, 3], -4);
        let t = e.to_term();
        let vals = [b(2), b(7), b(-1)];
        assert_eq!(t.eval(&vals).unwrap(), e.eval(&vals));
    }

    #[test]
    fn display_reads_naturally() {
        assert_eq!(LinExpr::from_i64s(&[1, -1], 0).to_string(), "x0 - x1");
        assert_eq!(LinExpr::from_i64s(&[0, 2], -3).to_string(), "2*x1 - 3");
        assert_eq!(LinExpr::constant(5).to_string(), "5");
    }
}
