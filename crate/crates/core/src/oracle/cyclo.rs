//! Exact elements of the cyclotomic fields `Q(zeta_N)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::groups::PhaseQZ;

/// Integer coefficients of the `n`-th cyclotomic polynomial, lowest first.
pub fn cyclotomic_polynomial(n: u64) -> Vec<i64> {
    // x^n - 1 divided by every Phi_d with d | n, d < n
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = divide_exact(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn divide_exact(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![0i64; a.len() - db];
    for i in (0..q.len()).rev() {
        let c = r[i + db] / b[db];
        q[i] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[i + j] -= c * bj;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0));
    q
}

/// `sum_k c_k zeta_N^k`, kept reduced modulo `Phi_N`, so equal values have
/// equal coefficient vectors once brought to a common `N`.
#[derive(Clone, Debug)]
pub struct Cyclo {
    order: u64,
    coeffs: Vec<BigRational>,
}

impl Cyclo {
    pub fn zero() -> Self {
        Cyclo { order: 1, coeffs: vec![BigRational::zero()] }
    }

    pub fn rational(r: BigRational) -> Self {
        Cyclo { order: 1, coeffs: vec![r] }
    }

    pub fn integer(n: i64) -> Self {
        Cyclo::rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `c e^(2 pi i phase)`.
    pub fn root(phase: PhaseQZ, c: BigRational) -> Self {
        let n = phase.denominator();
        let mut raw = vec![BigRational::zero(); n as usize];
        raw[phase.numerator() as usize] = c;
        Cyclo::reduce(n, raw)
    }

    fn reduce(order: u64, mut raw: Vec<BigRational>) -> Self {
        let phi = cyclotomic_polynomial(order);
        let deg = phi.len() - 1;
        for i in (deg..raw.len()).rev() {
            let c = raw[i].clone();
            if c.is_zero() {
                continue;
            }
            for (j, &p) in phi.iter().enumerate() {
                let t = &c * BigRational::from_integer(BigInt::from(p));
                raw[i - deg + j] -= t;
            }
        }
        raw.truncate(deg.max(1));
        raw.resize(deg.max(1), BigRational::zero());
        Cyclo { order, coeffs: raw }
    }

    fn lift(&self, order: u64) -> Vec<BigRational> {
        let m = (order / self.order) as usize;
        let mut raw = vec![BigRational::zero(); order as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            raw[(k * m) % order as usize] += c;
        }
        raw
    }

    pub fn add(&self, other: &Cyclo) -> Cyclo {
        let n = self.order.lcm(&other.order);
        let a = self.lift(n);
        let b = other.lift(n);
        Cyclo::reduce(n, a.into_iter().zip(b).map(|(x, y)| x + y).collect())
    }

    pub fn neg(&self) -> Cyclo {
        Cyclo { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, other: &Cyclo) -> Cyclo {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Cyclo) -> Cyclo {
        let n = self.order.lcm(&other.order);
        let a = self.lift(n);
        let b = other.lift(n);
        let mut raw = vec![BigRational::zero(); n as usize];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
                raw[(i + j) % n as usize] += x * y;
            }
        }
        Cyclo::reduce(n, raw)
    }

    pub fn scale(&self, r: &BigRational) -> Cyclo {
        Cyclo { order: self.order, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The value when it lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        self.as_rational().filter(|r| r.is_integer()).and_then(|r| r.to_integer().to_i64())
    }

    /// Whether the value is `e^(2 pi i phase)`.
    pub fn is_root(&self, phase: PhaseQZ) -> bool {
        *self == Cyclo::root(phase, BigRational::one())
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let n = self.order as f64;
        self.coeffs.iter().enumerate().fold((0.0, 0.0), |(re, im), (k, c)| {
            let a = std::f64::consts::TAU * k as f64 / n;
            let v = c.to_f64().unwrap_or(f64::NAN);
            (re + v * a.cos(), im + v * a.sin())
        })
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Cyclo) -> bool {
        self.sub(other).is_zero()
    }
}

impl Eq for Cyclo {}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{r}");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            write!(f, "{sign}{}", c.abs())?;
            if k > 0 {
                write!(f, "*z{}^{k}", self.order)?;
            }
            first = false;
        }
        Ok(())
    }
}
