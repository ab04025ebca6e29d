//! Finitely supported and eventually periodic (co)chains.
//!
//! Chains carry coefficients in the dual group, cochains in the group itself;
//! both are stored as residue tuples keyed by cell label. A locally finite
//! (co)chain on an ended complex is a finite part on the truncation `T_m` plus,
//! per end, a level tail `a` (on `s x {j}`) and a slab tail `b` (on
//! `t x [j-1, j]`) repeated for every `j > m`.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use serde::{Deserialize, Serialize};

use crate::complex::{level_label, slab_label, CellOrigin, EndedComplex, FiniteComplex};
use crate::error::{Error, Result};
use crate::groups::{residue, AbelianCoefficients, PhaseQZ};

pub trait Variance: Clone + Copy + fmt::Debug + Default + PartialEq + Eq + Send + Sync + 'static {
    const COCHAIN: bool;
}

/// Marker for chains (faces direction).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Ho;

/// Marker for cochains (cofaces direction).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Co;

impl Variance for Ho {
    const COCHAIN: bool = false;
}

impl Variance for Co {
    const COCHAIN: bool = true;
}

/// Finitely supported (co)chain. No zero coefficient is ever stored.
#[derive(Clone, PartialEq, Eq)]
pub struct FinVec<K: Variance> {
    dim: usize,
    group: AbelianCoefficients,
    coeffs: BTreeMap<String, Vec<u64>>,
    kind: PhantomData<K>,
}

pub type Chain = FinVec<Ho>;
pub type Cochain = FinVec<Co>;

impl<K: Variance> fmt::Debug for FinVec<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if K::COCHAIN { "Cochain" } else { "Chain" };
        write!(f, "{tag}[{}]{:?}", self.dim, self.coeffs)
    }
}

fn is_zero(v: &[u64]) -> bool {
    v.iter().all(|&x| x == 0)
}

impl<K: Variance> FinVec<K> {
    pub fn zero(group: &AbelianCoefficients, dim: usize) -> Self {
        FinVec { dim, group: group.clone(), coeffs: BTreeMap::new(), kind: PhantomData }
    }

    /// Sum of `value * label` over the terms; repeated labels accumulate.
    pub fn from_terms<S: Into<String>>(
        group: &AbelianCoefficients,
        dim: usize,
        terms: impl IntoIterator<Item = (S, Vec<i64>)>,
    ) -> Result<Self> {
        let mut v = Self::zero(group, dim);
        for (label, value) in terms {
            let g = group.element(&value)?;
            v.add_term(&label.into(), 1, g.residues());
        }
        Ok(v)
    }

    /// `sum_k n_k * label_k * g` for an integer combination of cells and one
    /// group element.
    pub fn from_integer_combination<S: AsRef<str>>(
        group: &AbelianCoefficients,
        dim: usize,
        cells: impl IntoIterator<Item = (S, i64)>,
        g: &[u64],
    ) -> Self {
        let mut v = Self::zero(group, dim);
        for (label, n) in cells {
            v.add_term(label.as_ref(), n, g);
        }
        v
    }

    pub fn single(group: &AbelianCoefficients, dim: usize, label: &str, value: &[i64]) -> Result<Self> {
        Self::from_terms(group, dim, [(label.to_string(), value.to_vec())])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn group(&self) -> &AbelianCoefficients {
        &self.group
    }

    pub fn coeffs(&self) -> &BTreeMap<String, Vec<u64>> {
        &self.coeffs
    }

    pub fn get(&self, label: &str) -> Option<&[u64]> {
        self.coeffs.get(label).map(Vec::as_slice)
    }

    pub fn support(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn support_size(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `n * g` at `label`.
    pub fn add_term(&mut self, label: &str, n: i64, g: &[u64]) {
        if n == 0 || is_zero(g) {
            return;
        }
        let orders = self.group.orders();
        let entry = self.coeffs.entry(label.to_string()).or_insert_with(|| vec![0; orders.len()]);
        for ((e, &x), &d) in entry.iter_mut().zip(g).zip(orders) {
            *e = residue(*e as i128 + n as i128 * x as i128, d);
        }
        if is_zero(entry) {
            self.coeffs.remove(label);
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(Error::Structural(format!("groups {} and {} differ", self.group, other.group)));
        }
        if self.dim != other.dim {
            return Err(Error::Structural(format!("dimensions {} and {} differ", self.dim, other.dim)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (l, g) in &other.coeffs {
            out.add_term(l, 1, g);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn scale(&self, n: i64) -> Self {
        let mut out = Self::zero(&self.group, self.dim);
        for (l, g) in &self.coeffs {
            out.add_term(l, n, g);
        }
        out
    }

    pub fn map_labels(&self, f: impl Fn(&str) -> String) -> Self {
        let mut out = Self::zero(&self.group, self.dim);
        for (l, g) in &self.coeffs {
            out.add_term(&f(l), 1, g);
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&str) -> bool) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|l, _| keep(l));
        out
    }

    /// Same coefficients read with a different dimension tag.
    pub(crate) fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    /// Deepest truncation level touched by the support.
    pub fn depth(&self) -> usize {
        self.coeffs.keys().map(|l| CellOrigin::parse(l).depth()).max().unwrap_or(0)
    }

    /// Checks that every supported cell exists in `c` with the right dimension.
    pub fn check_cells(&self, c: &FiniteComplex) -> Result<()> {
        for l in self.coeffs.keys() {
            match c.lookup(l) {
                Some(r) if r.dim == self.dim => {}
                Some(r) => {
                    return Err(Error::Structural(format!("cell `{l}` has dimension {}, expected {}", r.dim, self.dim)))
                }
                None => return Err(Error::UnknownCell(l.clone())),
            }
        }
        Ok(())
    }

    /// Boundary for chains, coboundary for cochains, inside `c`.
    pub fn differential(&self, c: &FiniteComplex) -> Result<Self> {
        self.check_cells(c)?;
        let out_dim = if K::COCHAIN {
            self.dim + 1
        } else {
            self.dim.checked_sub(1).ok_or_else(|| Error::Argument("boundary of a 0-chain".into()))?
        };
        let mut out = Self::zero(&self.group, out_dim);
        for (l, g) in &self.coeffs {
            let r = c.lookup(l).expect("checked");
            let adj = if K::COCHAIN { c.cofaces(r.dim, r.index) } else { c.faces(r.dim, r.index) };
            for &(o, d) in adj {
                out.add_term(&c.cells(out_dim)[o], d, g);
            }
        }
        Ok(out)
    }

    /// As [`FinVec::differential`], treating a chain of dimension 0 as having
    /// zero boundary (returned with dimension 0).
    fn differential_or_empty(&self, c: &FiniteComplex) -> Result<Self> {
        if !K::COCHAIN && self.dim == 0 {
            self.check_cells(c)?;
            return Ok(Self::zero(&self.group, 0));
        }
        self.differential(c)
    }

    /// Differential on an ended complex, computed on a large enough truncation.
    pub fn differential_in(&self, e: &EndedComplex) -> Result<Self> {
        let depth = self.depth().max(1) + usize::from(K::COCHAIN);
        self.differential(e.truncation(depth)?.complex())
    }
}

impl Chain {
    pub fn boundary(&self, c: &FiniteComplex) -> Result<Chain> {
        self.differential(c)
    }
}

impl Cochain {
    pub fn coboundary(&self, c: &FiniteComplex) -> Result<Cochain> {
        self.differential(c)
    }
}

fn pair_sum<'a>(
    group: &AbelianCoefficients,
    terms: impl Iterator<Item = (&'a [u64], &'a [u64])>,
) -> PhaseQZ {
    let e = group.exponent();
    let mut acc: u128 = 0;
    for (chi, g) in terms {
        acc = (acc + group.pair_numerator(chi, g) as u128) % e as u128;
    }
    PhaseQZ::new(acc as i128, e)
}

/// `<b, a> = sum_alpha chi_alpha(g_alpha)` for finite arguments.
pub fn pair(b: &Chain, a: &Cochain) -> Result<PhaseQZ> {
    if b.group != a.group {
        return Err(Error::Structural(format!("groups {} and {} differ", b.group, a.group)));
    }
    if b.dim != a.dim {
        return Err(Error::Structural(format!("pairing a {}-chain with a {}-cochain", b.dim, a.dim)));
    }
    let (small, large, flip) =
        if b.coeffs.len() <= a.coeffs.len() { (&b.coeffs, &a.coeffs, false) } else { (&a.coeffs, &b.coeffs, true) };
    let terms = small.iter().filter_map(|(l, x)| {
        large.get(l).map(|y| if flip { (y.as_slice(), x.as_slice()) } else { (x.as_slice(), y.as_slice()) })
    });
    Ok(pair_sum(&b.group, terms))
}

/// Periodic part of a locally finite (co)chain on one end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tail<K: Variance> {
    /// Coefficients on `s x {j}`, a (co)chain of the same dimension on the
    /// cross-section.
    pub level: FinVec<K>,
    /// Coefficients on `t x [j-1, j]`, one dimension lower on the
    /// cross-section.
    pub slab: FinVec<K>,
}

impl<K: Variance> Tail<K> {
    pub fn zero(group: &AbelianCoefficients, dim: usize) -> Self {
        Tail { level: FinVec::zero(group, dim), slab: FinVec::zero(group, dim.saturating_sub(1)) }
    }

    pub fn is_zero(&self) -> bool {
        self.level.is_zero() && self.slab.is_zero()
    }
}

/// Eventually periodic locally finite (co)chain.
#[derive(Clone, PartialEq, Eq)]
pub struct LfVec<K: Variance> {
    dim: usize,
    depth: usize,
    finite: FinVec<K>,
    tails: Vec<Tail<K>>,
}

pub type LfChain = LfVec<Ho>;
pub type LfCochain = LfVec<Co>;

impl<K: Variance> fmt::Debug for LfVec<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct(if K::COCHAIN { "LfCochain" } else { "LfChain" })
            .field("depth", &self.depth)
            .field("finite", &self.finite)
            .field("tails", &self.tails)
            .finish()
    }
}

impl<K: Variance> LfVec<K> {
    /// Validates cells against `T_depth` and the cross-sections.
    pub fn new(e: &EndedComplex, depth: usize, finite: FinVec<K>, tails: Vec<Tail<K>>) -> Result<Self> {
        if depth < 1 {
            return Err(Error::Argument("depth must be at least 1".into()));
        }
        if tails.len() != e.num_ends() {
            return Err(Error::Structural(format!("{} tails for {} ends", tails.len(), e.num_ends())));
        }
        let dim = finite.dim;
        finite.check_cells(e.truncation(depth)?.complex())?;
        for (i, t) in tails.iter().enumerate() {
            if t.level.group != finite.group || t.slab.group != finite.group {
                return Err(Error::Structural("tail coefficient group differs".into()));
            }
            if t.level.dim != dim || (dim > 0 && t.slab.dim != dim - 1) || (dim == 0 && !t.slab.is_zero()) {
                return Err(Error::Structural(format!("tail dimensions on end {i} do not match {dim}")));
            }
            t.level.check_cells(e.cross_section(i))?;
            t.slab.check_cells(e.cross_section(i))?;
        }
        Ok(LfVec { dim, depth, finite, tails })
    }

    pub fn zero(e: &EndedComplex, group: &AbelianCoefficients, dim: usize) -> Self {
        LfVec {
            dim,
            depth: 1,
            finite: FinVec::zero(group, dim),
            tails: (0..e.num_ends()).map(|_| Tail::zero(group, dim)).collect(),
        }
    }

    /// A finite (co)chain viewed as locally finite.
    pub fn from_finite(e: &EndedComplex, v: FinVec<K>) -> Result<Self> {
        let depth = v.depth().max(1);
        let group = v.group.clone();
        let dim = v.dim;
        Self::new(e, depth, v, (0..e.num_ends()).map(|_| Tail::zero(&group, dim)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn group(&self) -> &AbelianCoefficients {
        &self.finite.group
    }

    pub fn finite(&self) -> &FinVec<K> {
        &self.finite
    }

    pub fn tails(&self) -> &[Tail<K>] {
        &self.tails
    }

    pub fn has_tails(&self) -> bool {
        self.tails.iter().any(|t| !t.is_zero())
    }

    /// The finite (co)chain, if there are no tails.
    pub fn as_finite(&self) -> Option<&FinVec<K>> {
        (!self.has_tails()).then_some(&self.finite)
    }

    pub fn coefficient_at(&self, label: &str) -> Option<&[u64]> {
        match CellOrigin::parse(label) {
            CellOrigin::Level { end, level, cell } if level > self.depth => {
                self.tails.get(end).and_then(|t| t.level.get(cell))
            }
            CellOrigin::Slab { end, level, cell } if level > self.depth => {
                self.tails.get(end).and_then(|t| t.slab.get(cell))
            }
            _ => self.finite.get(label),
        }
    }

    /// Same (co)chain with the junction moved out to depth `m`.
    pub fn rebase(&self, m: usize) -> Self {
        if m <= self.depth {
            return self.clone();
        }
        let mut finite = self.finite.clone();
        for (e, t) in self.tails.iter().enumerate() {
            for j in self.depth + 1..=m {
                for (l, g) in &t.level.coeffs {
                    finite.add_term(&level_label(e, j, l), 1, g);
                }
                for (l, g) in &t.slab.coeffs {
                    finite.add_term(&slab_label(e, j, l), 1, g);
                }
            }
        }
        LfVec { dim: self.dim, depth: m, finite, tails: self.tails.clone() }
    }

    /// Values on `T_m`.
    pub fn restrict(&self, m: usize) -> FinVec<K> {
        self.rebase(m).finite.filter(|l| CellOrigin::parse(l).depth() <= m)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&FinVec<K>, &FinVec<K>) -> Result<FinVec<K>>) -> Result<Self> {
        if self.tails.len() != other.tails.len() {
            return Err(Error::Structural("locally finite (co)chains on different complexes".into()));
        }
        let m = self.depth.max(other.depth);
        let (a, b) = (self.rebase(m), other.rebase(m));
        let finite = f(&a.finite, &b.finite)?;
        let tails = a
            .tails
            .iter()
            .zip(&b.tails)
            .map(|(x, y)| Ok(Tail { level: f(&x.level, &y.level)?, slab: f(&x.slab, &y.slab)? }))
            .collect::<Result<Vec<_>>>()?;
        Ok(LfVec { dim: self.dim, depth: m, finite, tails })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, FinVec::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, FinVec::sub)
    }

    pub fn add_finite(&self, v: &FinVec<K>) -> Result<Self> {
        let m = self.depth.max(v.depth());
        let mut out = self.rebase(m);
        out.finite = out.finite.add(v)?;
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn scale(&self, n: i64) -> Self {
        LfVec {
            dim: self.dim,
            depth: self.depth,
            finite: self.finite.scale(n),
            tails: self.tails.iter().map(|t| Tail { level: t.level.scale(n), slab: t.slab.scale(n) }).collect(),
        }
    }

    /// Boundary (chains) or coboundary (cochains) as a locally finite object.
    pub fn differential(&self, e: &EndedComplex) -> Result<Self> {
        let m = self.depth;
        let r = self.rebase(m + 1);
        let t = e.truncation(m + 1)?;
        let d = r.finite.differential(t.complex())?;
        let (depth, finite) = if K::COCHAIN {
            (m + 1, d)
        } else {
            (m, d.filter(|l| CellOrigin::parse(l).depth() <= m))
        };
        let mut tails = Vec::with_capacity(self.tails.len());
        for (i, tail) in self.tails.iter().enumerate() {
            let sigma = e.cross_section(i);
            let level = tail.level.differential_or_empty(sigma)?;
            let slab = if (!K::COCHAIN && self.dim <= 1) || (K::COCHAIN && self.dim == 0) {
                FinVec::zero(&tail.slab.group, 0)
            } else {
                tail.slab.differential_or_empty(sigma)?
            };
            tails.push(Tail { level, slab });
        }
        Ok(LfVec { dim: finite.dim, depth, finite, tails })
    }

    /// The differential when it is finitely supported, else an error naming
    /// the first end whose tails are not closed.
    pub fn finite_differential(&self, e: &EndedComplex) -> Result<FinVec<K>> {
        let d = self.differential(e)?;
        if let Some(end) = d.tails.iter().position(|t| !t.is_zero()) {
            return Err(Error::InfiniteBoundary { end });
        }
        Ok(d.finite)
    }

    pub fn is_closed(&self, e: &EndedComplex) -> Result<bool> {
        let d = self.differential(e)?;
        Ok(d.finite.is_zero() && !d.has_tails())
    }
}

fn tails_overlap<K: Variance, L: Variance>(a: &Tail<K>, b: &Tail<L>) -> bool {
    a.level.coeffs.keys().any(|k| b.level.coeffs.contains_key(k))
        || a.slab.coeffs.keys().any(|k| b.slab.coeffs.contains_key(k))
}

/// Pairing of locally finite arguments. In strict mode at most one argument
/// may have tails; otherwise tails are allowed as long as their supports are
/// disjoint on every end, which keeps the sum finite.
pub fn pair_lf(b: &LfChain, a: &LfCochain, strict: bool) -> Result<PhaseQZ> {
    if b.tails.len() != a.tails.len() {
        return Err(Error::Structural("arguments live on different complexes".into()));
    }
    if b.has_tails() && a.has_tails() {
        let clash = if strict {
            true
        } else {
            b.tails.iter().zip(&a.tails).any(|(x, y)| tails_overlap(x, y))
        };
        if clash {
            return Err(Error::UndefinedPairing("both arguments have infinite support".into()));
        }
    }
    let m = b.depth.max(a.depth);
    pair(&b.rebase(m).finite, &a.rebase(m).finite)
}

/// `<d, dT a> - <dd, a>` for a chain `d` with finite boundary and a cochain
/// `a` one dimension lower with finite coboundary.
pub fn pair_at_infinity(e: &EndedComplex, d: &LfChain, a: &LfCochain) -> Result<PhaseQZ> {
    if d.dim != a.dim + 1 {
        return Err(Error::Structural(format!("pairing a {}-chain at infinity with a {}-cochain", d.dim, a.dim)));
    }
    let da = a.finite_differential(e)?;
    let dd = d.finite_differential(e)?;
    let first = pair_lf(d, &LfVec::from_finite(e, da)?, true)?;
    let second = pair_lf(&LfVec::from_finite(e, dd)?, a, true)?;
    Ok(first.sub(second))
}

/// Serialized form: `{"dim", "coeffs", "depth", "tails"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainBlob {
    pub dim: usize,
    pub coeffs: BTreeMap<String, Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tails: BTreeMap<String, TailBlob>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TailBlob {
    pub level: BTreeMap<String, Vec<u64>>,
    pub slab: BTreeMap<String, Vec<u64>>,
}

impl<K: Variance> FinVec<K> {
    pub fn to_blob(&self) -> ChainBlob {
        ChainBlob { dim: self.dim, coeffs: self.coeffs.clone(), depth: None, tails: BTreeMap::new() }
    }

    pub fn from_coeffs(group: &AbelianCoefficients, dim: usize, coeffs: &BTreeMap<String, Vec<u64>>) -> Result<Self> {
        let mut v = Self::zero(group, dim);
        for (l, g) in coeffs {
            let signed: Vec<i64> = g.iter().map(|&x| x as i64).collect();
            let g = group.element(&signed)?;
            v.add_term(l, 1, g.residues());
        }
        Ok(v)
    }
}

impl<K: Variance> LfVec<K> {
    pub fn to_blob(&self) -> ChainBlob {
        let tails = self
            .tails
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_zero())
            .map(|(i, t)| (i.to_string(), TailBlob { level: t.level.coeffs.clone(), slab: t.slab.coeffs.clone() }))
            .collect();
        ChainBlob { dim: self.dim, coeffs: self.finite.coeffs.clone(), depth: Some(self.depth), tails }
    }

    pub fn from_blob(e: &EndedComplex, group: &AbelianCoefficients, blob: &ChainBlob) -> Result<Self> {
        let finite = FinVec::from_coeffs(group, blob.dim, &blob.coeffs)?;
        let depth = blob.depth.unwrap_or_else(|| finite.depth().max(1));
        let mut tails: Vec<Tail<K>> = (0..e.num_ends()).map(|_| Tail::zero(group, blob.dim)).collect();
        for (k, t) in &blob.tails {
            let i: usize = k.parse().map_err(|_| Error::Parse(format!("bad end key `{k}`")))?;
            let slot = tails.get_mut(i).ok_or_else(|| Error::Parse(format!("no end {i}")))?;
            slot.level = FinVec::from_coeffs(group, blob.dim, &t.level)?;
            slot.slab = FinVec::from_coeffs(group, blob.dim.saturating_sub(1), &t.slab)?;
        }
        Self::new(e, depth, finite, tails)
    }
}

impl<K: Variance> Serialize for FinVec<K> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_blob().serialize(s)
    }
}

impl<K: Variance> Serialize for LfVec<K> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_blob().serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::catalog;

    fn z(d: u64) -> AbelianCoefficients {
        AbelianCoefficients::cyclic(d).unwrap()
    }

    #[test]
    fn edge_boundary_and_cycle() {
        let p = catalog::path(2);
        let e = Chain::single(&z(2), 1, "d1:e0", &[1]).unwrap();
        let b = e.boundary(&p).unwrap();
        assert_eq!(b.support().cloned().collect::<Vec<_>>(), vec!["d0:v0", "d0:v1"]);
        let c = catalog::cycle(4);
        let all = Chain::from_integer_combination(&z(2), 1, c.cells(1).iter().map(|l| (l, 1)), &[1]);
        assert!(all.boundary(&c).unwrap().is_zero());
        assert!(Chain::zero(&z(2), 0).boundary(&c).is_err());
    }

    #[test]
    fn star_of_a_lattice_vertex() {
        let t = catalog::torus(4);
        let v = Cochain::single(&z(2), 0, "d0:x1.y1", &[1]).unwrap();
        let star = v.coboundary(&t).unwrap();
        assert_eq!(star.support_size(), 4);
        assert!(star.coboundary(&t).unwrap().is_zero());
    }

    #[test]
    fn single_cell_pairing() {
        let b = Chain::single(&z(2), 0, "x", &[1]).unwrap();
        let a = Cochain::single(&z(2), 0, "x", &[1]).unwrap();
        assert_eq!(pair(&b, &a).unwrap(), PhaseQZ::new(1, 2));
        assert_eq!(pair(&Chain::zero(&z(2), 0), &a).unwrap(), PhaseQZ::ZERO);
    }

    #[test]
    fn ray_tail_has_single_vertex_boundary() {
        let e = catalog::ray();
        let g = z(2);
        let slab = Chain::single(&g, 0, "p", &[1]).unwrap();
        let finite = Chain::single(&g, 1, "end0:slab1:p", &[1]).unwrap();
        let ray = LfChain::new(&e, 1, finite, vec![Tail { level: Chain::zero(&g, 1), slab }]).unwrap();
        let b = ray.finite_differential(&e).unwrap();
        assert_eq!(b.support().cloned().collect::<Vec<_>>(), vec!["d0:o"]);
        assert_eq!(ray.rebase(4).finite_differential(&e).unwrap(), b);
    }

    #[test]
    fn open_tail_is_an_infinite_boundary() {
        let e = catalog::plane(1);
        let g = z(2);
        let level = Chain::single(&g, 1, "d1:x0.y0.h", &[1]).unwrap();
        let lf = LfChain::new(&e, 1, Chain::zero(&g, 1), vec![Tail { level, slab: Chain::zero(&g, 0) }]).unwrap();
        assert_eq!(lf.finite_differential(&e).unwrap_err(), Error::InfiniteBoundary { end: 0 });
    }

    #[test]
    fn both_infinite_pairing_is_refused() {
        let e = catalog::ray();
        let g = z(2);
        let b = LfChain::new(
            &e,
            1,
            Chain::zero(&g, 0),
            vec![Tail { level: Chain::single(&g, 0, "p", &[1]).unwrap(), slab: Chain::zero(&g, 0) }],
        )
        .unwrap();
        let a = LfCochain::new(
            &e,
            1,
            Cochain::zero(&g, 0),
            vec![Tail { level: Cochain::single(&g, 0, "p", &[1]).unwrap(), slab: Cochain::zero(&g, 0) }],
        )
        .unwrap();
        assert_eq!(pair_lf(&b, &a, true).unwrap_err().kind(), "undefined_pairing");
        assert_eq!(pair_lf(&b, &a, false).unwrap_err().kind(), "undefined_pairing");
    }

    #[test]
    fn blob_round_trip() {
        let e = catalog::ray();
        let g = z(3);
        let lf = LfChain::new(
            &e,
            2,
            Chain::single(&g, 1, "end0:slab2:p", &[2]).unwrap(),
            vec![Tail { level: Chain::zero(&g, 1), slab: Chain::single(&g, 0, "p", &[2]).unwrap() }],
        )
        .unwrap();
        let back = LfChain::from_blob(&e, &g, &lf.to_blob()).unwrap();
        assert_eq!(back, lf);
        let json = serde_json::to_string(&lf).unwrap();
        assert!(json.contains("\"tails\""));
    }
}
