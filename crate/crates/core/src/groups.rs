//! Finite abelian coefficient groups `Z_{d1} x ... x Z_{dk}`, their duals and
//! the Q/Z valued pairing.
//!
//! The dual group is identified with the group itself factor by factor: the
//! character `chi` acts on `g` by `sum chi_i g_i / d_i mod 1`.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduce a signed integer into `[0, d)`.
pub fn residue(x: i128, d: u64) -> u64 {
    x.rem_euclid(d as i128) as u64
}

/// Multiplicative inverse of `a` modulo `d`, if it exists.
pub fn inverse_mod(a: u64, d: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(d as i128));
    if g.gcd != 1 {
        return None;
    }
    Some(residue(g.x, d))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct AbelianCoefficients {
    orders: Vec<u64>,
    exponent: u64,
}

impl AbelianCoefficients {
    pub fn new(orders: Vec<u64>) -> Result<Self> {
        if orders.is_empty() {
            return Err(Error::Argument("coefficient group needs at least one factor".into()));
        }
        if let Some(d) = orders.iter().find(|&&d| d < 2) {
            return Err(Error::Argument(format!("cyclic factor order {d} is below 2")));
        }
        let exponent = orders.iter().fold(1u64, |acc, &d| acc.lcm(&d));
        Ok(AbelianCoefficients { orders, exponent })
    }

    pub fn cyclic(d: u64) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Group order `|G|`.
    pub fn order(&self) -> u128 {
        self.orders.iter().map(|&d| d as u128).product()
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement { group: self.clone(), residues: vec![0; self.rank()] }
    }

    pub fn element(&self, values: &[i64]) -> Result<GroupElement> {
        if values.len() != self.rank() {
            return Err(Error::Structural(format!(
                "element has {} components, group has {}",
                values.len(),
                self.rank()
            )));
        }
        let residues = values.iter().zip(&self.orders).map(|(&v, &d)| residue(v as i128, d)).collect();
        Ok(GroupElement { group: self.clone(), residues })
    }

    /// The element that is `1` in factor `i` and zero elsewhere.
    pub fn unit(&self, i: usize) -> GroupElement {
        let mut e = self.zero();
        e.residues[i] = 1;
        e
    }

    /// Reduce raw residues in place.
    pub fn reduce(&self, raw: &[i128]) -> Vec<u64> {
        raw.iter().zip(&self.orders).map(|(&v, &d)| residue(v, d)).collect()
    }

    /// Numerator of the pairing over the common denominator `exponent`.
    pub fn pair_numerator(&self, chi: &[u64], g: &[u64]) -> u64 {
        let e = self.exponent as u128;
        let mut acc: u128 = 0;
        for ((&c, &x), &d) in chi.iter().zip(g).zip(&self.orders) {
            let scale = e / d as u128;
            acc = (acc + (c as u128 * x as u128 % d as u128) * scale) % e;
        }
        acc as u64
    }

    /// Every element in lexicographic order of residues.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &d in &self.orders {
            let mut next = Vec::with_capacity(out.len() * d as usize);
            for prefix in &out {
                for r in 0..d {
                    let mut v = prefix.clone();
                    v.push(r);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }
}

impl TryFrom<Vec<u64>> for AbelianCoefficients {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AbelianCoefficients> for Vec<u64> {
    fn from(g: AbelianCoefficients) -> Vec<u64> {
        g.orders
    }
}

impl fmt::Display for AbelianCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orders.iter().map(|d| format!("Z{d}")).collect();
        write!(f, "{}", parts.join("x"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    group: AbelianCoefficients,
    residues: Vec<u64>,
}

impl GroupElement {
    pub fn from_residues(group: &AbelianCoefficients, residues: Vec<u64>) -> Result<Self> {
        if residues.len() != group.rank() {
            return Err(Error::Structural("residue count differs from factor count".into()));
        }
        if residues.iter().zip(group.orders()).any(|(&r, &d)| r >= d) {
            return Err(Error::Argument("residue out of range".into()));
        }
        Ok(GroupElement { group: group.clone(), residues })
    }

    pub fn group(&self) -> &AbelianCoefficients {
        &self.group
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    pub fn is_zero(&self) -> bool {
        self.residues.iter().all(|&r| r == 0)
    }

    fn check(&self, other: &GroupElement) -> Result<()> {
        if self.group != other.group {
            return Err(Error::Structural(format!("groups {} and {} differ", self.group, other.group)));
        }
        Ok(())
    }

    pub fn add(&self, other: &GroupElement) -> Result<GroupElement> {
        self.check(other)?;
        let residues = self
            .residues
            .iter()
            .zip(&other.residues)
            .zip(self.group.orders())
            .map(|((&a, &b), &d)| (a + b) % d)
            .collect();
        Ok(GroupElement { group: self.group.clone(), residues })
    }

    pub fn neg(&self) -> GroupElement {
        let residues =
            self.residues.iter().zip(self.group.orders()).map(|(&a, &d)| (d - a) % d).collect();
        GroupElement { group: self.group.clone(), residues }
    }

    pub fn sub(&self, other: &GroupElement) -> Result<GroupElement> {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: i64) -> GroupElement {
        let residues = self
            .residues
            .iter()
            .zip(self.group.orders())
            .map(|(&a, &d)| residue(a as i128 * k as i128, d))
            .collect();
        GroupElement { group: self.group.clone(), residues }
    }
}

/// `chi(g) = sum_i chi_i g_i / d_i mod 1`.
pub fn character_pair(chi: &GroupElement, g: &GroupElement) -> Result<PhaseQZ> {
    if chi.group.orders != g.group.orders {
        return Err(Error::Structural("character and element come from different groups".into()));
    }
    let num = chi.group.pair_numerator(&chi.residues, &g.residues);
    Ok(PhaseQZ::new(num as i128, chi.group.exponent()))
}

/// An element of Q/Z stored as a reduced fraction in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseQZ {
    num: u64,
    den: u64,
}

impl PhaseQZ {
    pub const ZERO: PhaseQZ = PhaseQZ { num: 0, den: 1 };

    /// `num / den mod 1`, reduced. Panics if `den == 0`.
    pub fn new(num: i128, den: u64) -> Self {
        assert!(den > 0, "phase denominator must be positive");
        let r = residue(num, den);
        if r == 0 {
            return PhaseQZ::ZERO;
        }
        let g = r.gcd(&den);
        PhaseQZ { num: r / g, den: den / g }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn add(self, other: PhaseQZ) -> PhaseQZ {
        let den = self.den.lcm(&other.den);
        let a = self.num as i128 * (den / self.den) as i128;
        let b = other.num as i128 * (den / other.den) as i128;
        PhaseQZ::new(a + b, den)
    }

    pub fn neg(self) -> PhaseQZ {
        PhaseQZ::new(-(self.num as i128), self.den)
    }

    pub fn sub(self, other: PhaseQZ) -> PhaseQZ {
        self.add(other.neg())
    }

    pub fn scale(self, k: i64) -> PhaseQZ {
        PhaseQZ::new(self.num as i128 * k as i128, self.den)
    }

    /// The phase as a real number in `[0, 1)`.
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for PhaseQZ {
    fn default() -> Self {
        PhaseQZ::ZERO
    }
}

impl std::iter::Sum for PhaseQZ {
    fn sum<I: Iterator<Item = PhaseQZ>>(iter: I) -> PhaseQZ {
        iter.fold(PhaseQZ::ZERO, PhaseQZ::add)
    }
}

impl fmt::Display for PhaseQZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for PhaseQZ {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (p, q) = s.split_once('/').ok_or_else(|| Error::Parse(format!("phase `{s}` is not p/q")))?;
        let p: i128 = p.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
        let q: u64 = q.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
        if q == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(PhaseQZ::new(p, q))
    }
}

impl Serialize for PhaseQZ {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PhaseQZ {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
