//! The six (co)homology groups of an ended complex with explicit generators,
//! canonical coordinates and bounding witnesses, plus the maps of the two long
//! exact sequences.
//!
//! Finite chains and arbitrary cochains are computed on a truncation `T_m`;
//! locally finite chains and finite cochains on the pair `(T_m, collar)`;
//! the groups at infinity on the disjoint union of the cross-sections.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::chains::{Chain, Cochain, FinVec, LfChain, LfCochain, Tail, Variance};
use crate::complex::{
    level_label, slab_label, split_union_label, union_label, CellOrigin, EndedComplex, FiniteComplex,
};
use crate::error::{Error, Result};
use crate::groups::{residue, AbelianCoefficients};
use crate::linalg::{mod_floor_u64, smith, to_u64, IntMatrix};
use crate::reduce::{CyclicHomology, ModComplex};

pub const DEFAULT_DEPTH: usize = 3;
pub const MAX_DEPTH: usize = 8;

fn sign(k: usize) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

/// (Co)homology of a finite complex relative to a subcomplex (possibly
/// empty), in one dimension, with coefficients in a finite abelian group.
#[derive(Clone)]
pub struct FinitePresentation<K: Variance> {
    complex: FiniteComplex,
    dim: usize,
    group: AbelianCoefficients,
    top: Vec<String>,
    mid: Vec<String>,
    mid_index: HashMap<String, usize>,
    excluded: BTreeSet<String>,
    engines: Vec<CyclicHomology>,
    /// `(group factor, engine factor)` for every cyclic summand.
    summands: Vec<(usize, usize)>,
    combine_u: IntMatrix,
    combine_index: Vec<usize>,
    factors: Vec<u64>,
    generators: Vec<FinVec<K>>,
}

impl<K: Variance> fmt::Debug for FinitePresentation<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FinitePresentation(dim {}, factors {:?})", self.dim, self.factors)
    }
}

pub type FiniteHomology = FinitePresentation<crate::chains::Ho>;
pub type FiniteCohomology = FinitePresentation<crate::chains::Co>;

impl<K: Variance> FinitePresentation<K> {
    /// Cells in `excluded` span the subcomplex we quotient by (chains) or on
    /// which cochains vanish.
    pub fn compute(
        complex: &FiniteComplex,
        excluded: &BTreeSet<String>,
        dim: usize,
        group: &AbelianCoefficients,
    ) -> Self {
        let cells_of = |d: Option<usize>| -> Vec<String> {
            match d {
                Some(d) => complex.cells(d).iter().filter(|l| !excluded.contains(*l)).cloned().collect(),
                None => Vec::new(),
            }
        };
        let below = dim.checked_sub(1);
        let (top_dim, bot_dim) = if K::COCHAIN { (below, Some(dim + 1)) } else { (Some(dim + 1), below) };
        let top = cells_of(top_dim);
        let mid = cells_of(Some(dim));
        let bot = cells_of(bot_dim);
        let mid_index: HashMap<String, usize> = mid.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let bot_index: HashMap<&str, usize> = bot.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();

        let adjacent = |label: &str| -> Vec<(String, i64)> {
            let r = complex.lookup(label).expect("cell of the complex");
            let (adj, other) = if K::COCHAIN {
                (complex.cofaces(r.dim, r.index), r.dim + 1)
            } else {
                (complex.faces(r.dim, r.index), r.dim.wrapping_sub(1))
            };
            adj.iter().map(|&(o, d)| (complex.cells(other)[o].clone(), d)).collect()
        };
        let d2_int: Vec<Vec<(usize, i64)>> = top
            .iter()
            .map(|x| adjacent(x).into_iter().filter_map(|(l, d)| mid_index.get(&l).map(|&i| (i, d))).collect())
            .collect();
        let d1_int: Vec<Vec<(usize, i64)>> = mid
            .iter()
            .map(|y| {
                if bot.is_empty() {
                    return Vec::new();
                }
                adjacent(y).into_iter().filter_map(|(l, d)| bot_index.get(l.as_str()).map(|&i| (i, d))).collect()
            })
            .collect();

        let mut engines = Vec::new();
        let mut summands = Vec::new();
        for (f, &d) in group.orders().iter().enumerate() {
            let conv = |cols: &Vec<Vec<(usize, i64)>>| -> Vec<Vec<(usize, u64)>> {
                cols.iter().map(|c| c.iter().map(|&(i, x)| (i, residue(x as i128, d))).collect()).collect()
            };
            let eng = CyclicHomology::compute(&ModComplex {
                modulus: d,
                n2: top.len(),
                n1: mid.len(),
                n0: bot.len(),
                d2: conv(&d2_int),
                d1: conv(&d1_int),
            });
            for j in 0..eng.factors().len() {
                summands.push((f, j));
            }
            engines.push(eng);
        }

        let k = summands.len();
        let mut diag = IntMatrix::zeros(k, k);
        for (s, &(f, j)) in summands.iter().enumerate() {
            diag.set(s, s, BigInt::from(engines[f].factors()[j]));
        }
        let snf = smith(&diag);
        let mut combine_index = Vec::new();
        let mut factors = Vec::new();
        for (i, s) in snf.diag.iter().enumerate() {
            if !s.is_one() {
                combine_index.push(i);
                factors.push(to_u64(s));
            }
        }
        let mut generators = Vec::new();
        for &i in &combine_index {
            let mut g = FinVec::<K>::zero(group, dim);
            for (s, &(f, j)) in summands.iter().enumerate() {
                let c = snf.u_inv.get(s, i);
                if c.is_zero() {
                    continue;
                }
                let d = group.orders()[f];
                let c = mod_floor_u64(c, d) as i64;
                let mut unit = vec![0u64; group.rank()];
                for (y, &x) in engines[f].generators()[j].iter().enumerate() {
                    if x != 0 {
                        unit[f] = x;
                        g.add_term(&mid[y], c, &unit);
                    }
                }
            }
            generators.push(g);
        }

        FinitePresentation {
            complex: complex.clone(),
            dim,
            group: group.clone(),
            top,
            mid,
            mid_index,
            excluded: excluded.clone(),
            engines,
            summands,
            combine_u: snf.u,
            combine_index,
            factors,
            generators,
        }
    }

    pub fn absolute(complex: &FiniteComplex, dim: usize, group: &AbelianCoefficients) -> Self {
        Self::compute(complex, &BTreeSet::new(), dim, group)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn order(&self) -> u128 {
        self.factors.iter().map(|&f| f as u128).product()
    }

    pub fn generators(&self) -> &[FinVec<K>] {
        &self.generators
    }

    pub fn complex(&self) -> &FiniteComplex {
        &self.complex
    }

    fn vectors(&self, z: &FinVec<K>) -> Result<Vec<Vec<u64>>> {
        if z.group() != &self.group || z.dim() != self.dim {
            return Err(Error::Structural(format!(
                "expected a {}-dimensional element over {}, got dimension {} over {}",
                self.dim,
                self.group,
                z.dim(),
                z.group()
            )));
        }
        let mut out = vec![vec![0u64; self.mid.len()]; self.group.rank()];
        for (l, g) in z.coeffs() {
            let i = match self.mid_index.get(l) {
                Some(&i) => i,
                None if self.excluded.contains(l) => continue,
                None => return Err(Error::UnknownCell(l.clone())),
            };
            for (f, &x) in g.iter().enumerate() {
                out[f][i] = x;
            }
        }
        Ok(out)
    }

    pub fn is_cycle(&self, z: &FinVec<K>) -> Result<bool> {
        let v = self.vectors(z)?;
        Ok(self.engines.iter().zip(&v).all(|(e, x)| e.is_cycle(x)))
    }

    /// Canonical coordinates of the class of `z`.
    pub fn coordinates(&self, z: &FinVec<K>) -> Result<Vec<u64>> {
        let v = self.vectors(z)?;
        if !self.engines.iter().zip(&v).all(|(e, x)| e.is_cycle(x)) {
            return Err(Error::NotCycle(format!("{}-element is not closed", self.dim)));
        }
        let per: Vec<Vec<u64>> = self.engines.iter().zip(&v).map(|(e, x)| e.coordinates(x)).collect();
        let c: Vec<BigInt> = self.summands.iter().map(|&(f, j)| BigInt::from(per[f][j])).collect();
        let y = self.combine_u.mul_vec(&c);
        Ok(self.combine_index.iter().zip(&self.factors).map(|(&i, &s)| mod_floor_u64(&y[i], s)).collect())
    }

    /// A (co)chain bounding `z` when its class is zero.
    pub fn witness(&self, z: &FinVec<K>) -> Result<Option<FinVec<K>>> {
        let v = self.vectors(z)?;
        if !self.engines.iter().zip(&v).all(|(e, x)| e.is_cycle(x)) {
            return Err(Error::NotCycle(format!("{}-element is not closed", self.dim)));
        }
        let wdim = if K::COCHAIN { self.dim.wrapping_sub(1) } else { self.dim + 1 };
        let mut w = FinVec::<K>::zero(&self.group, if self.top.is_empty() { 0 } else { wdim });
        for (f, (e, x)) in self.engines.iter().zip(&v).enumerate() {
            let Some(sol) = e.witness(x) else {
                return Ok(None);
            };
            let mut unit = vec![0u64; self.group.rank()];
            for (i, &s) in sol.iter().enumerate() {
                if s != 0 {
                    unit.iter_mut().for_each(|u| *u = 0);
                    unit[f] = s;
                    w.add_term(&self.top[i], 1, &unit);
                }
            }
        }
        Ok(Some(w))
    }

    /// `sum_i c_i g_i`.
    pub fn combination(&self, coords: &[u64]) -> FinVec<K> {
        let mut out = FinVec::<K>::zero(&self.group, self.dim);
        for (g, &c) in self.generators.iter().zip(coords) {
            for (l, x) in g.coeffs() {
                out.add_term(l, c as i64, x);
            }
        }
        out
    }
}

/// Which of the six groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKind {
    /// `H_i(E)`, finite chains.
    Homology,
    /// `H^i(E)`, arbitrary cochains.
    Cohomology,
    /// `H^lf_i(E)`, locally finite chains.
    LfHomology,
    /// `H^i_lf(E)`, finite cochains.
    LfCohomology,
    /// `H^inf_i(E)`.
    HomologyAtInfinity,
    /// `H^i_inf(E)`.
    CohomologyAtInfinity,
}

impl GroupKind {
    pub const ALL: [GroupKind; 6] = [
        GroupKind::Homology,
        GroupKind::Cohomology,
        GroupKind::LfHomology,
        GroupKind::LfCohomology,
        GroupKind::HomologyAtInfinity,
        GroupKind::CohomologyAtInfinity,
    ];

    pub fn is_cohomology(self) -> bool {
        matches!(self, GroupKind::Cohomology | GroupKind::LfCohomology | GroupKind::CohomologyAtInfinity)
    }

    fn depends_on_depth(self) -> bool {
        !matches!(self, GroupKind::HomologyAtInfinity | GroupKind::CohomologyAtInfinity)
    }
}

impl GroupKind {
    /// Symbol with the degree attached, e.g. `H^inf_0` or `H_lf^2`.
    pub fn symbol(self, dim: usize) -> String {
        match self {
            GroupKind::Homology => format!("H_{dim}"),
            GroupKind::LfHomology | GroupKind::HomologyAtInfinity => format!("{self}_{dim}"),
            _ => format!("{self}{dim}"),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            GroupKind::Homology => "H",
            GroupKind::Cohomology => "H^",
            GroupKind::LfHomology => "H^lf",
            GroupKind::LfCohomology => "H_lf^",
            GroupKind::HomologyAtInfinity => "H^inf",
            GroupKind::CohomologyAtInfinity => "H_inf^",
        };
        f.write_str(s)
    }
}

/// A representative of a class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Representative {
    Chain(LfChain),
    Cochain(LfCochain),
    /// Cycle on the disjoint union of cross-sections.
    ChainAtInfinity(Chain),
    /// Cocycle on the disjoint union of cross-sections.
    CochainAtInfinity(Cochain),
}

impl Representative {
    pub fn as_chain(&self) -> Option<&LfChain> {
        match self {
            Representative::Chain(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_cochain(&self) -> Option<&LfCochain> {
        match self {
            Representative::Cochain(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyClass {
    pub kind: GroupKind,
    pub dim: usize,
    pub factors: Vec<u64>,
    pub coordinates: Vec<u64>,
}

impl HomologyClass {
    pub fn is_zero(&self) -> bool {
        self.coordinates.iter().all(|&c| c == 0)
    }
}

enum Engine {
    Chains(FiniteHomology),
    Cochains(FiniteCohomology),
}

/// One of the six groups of an ended complex in one dimension.
pub struct Presentation {
    complex: EndedComplex,
    kind: GroupKind,
    dim: usize,
    group: AbelianCoefficients,
    depth: usize,
    engine: Engine,
    generators: Vec<Representative>,
}

impl fmt::Debug for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}{:?} (depth {})", self.kind, self.dim, self.factors(), self.depth)
    }
}

/// Maps `s x {m}` in the collar of `T_m` to `end{e}:s` on the union.
fn collar_to_union<K: Variance>(v: &FinVec<K>, m: usize) -> FinVec<K> {
    let mut out = FinVec::zero(v.group(), v.dim());
    for (l, g) in v.coeffs() {
        if let CellOrigin::Level { end, level, cell } = CellOrigin::parse(l) {
            if level == m {
                out.add_term(&union_label(end, cell), 1, g);
            }
        }
    }
    out
}

/// Splits a union (co)chain into per-end cross-section (co)chains.
fn split_union<K: Variance>(v: &FinVec<K>, ends: usize) -> Vec<FinVec<K>> {
    let mut out: Vec<FinVec<K>> = (0..ends).map(|_| FinVec::zero(v.group(), v.dim())).collect();
    for (l, g) in v.coeffs() {
        if let Some((e, cell)) = split_union_label(l) {
            out[e].add_term(cell, 1, g);
        }
    }
    out
}

fn join_union<K: Variance>(parts: impl Iterator<Item = FinVec<K>>, group: &AbelianCoefficients, dim: usize) -> FinVec<K> {
    let mut out = FinVec::zero(group, dim);
    for (e, p) in parts.enumerate() {
        for (l, g) in p.coeffs() {
            out.add_term(&union_label(e, l), 1, g);
        }
    }
    out
}

/// Retraction of a finite chain onto `T_m`: levels beyond `m` collapse onto
/// level `m`, slabs beyond `m` vanish.
pub fn retract<K: Variance>(z: &FinVec<K>, m: usize) -> FinVec<K> {
    let mut out = FinVec::zero(z.group(), z.dim());
    for (l, g) in z.coeffs() {
        match CellOrigin::parse(l) {
            CellOrigin::Level { end, level, cell } if level > m => out.add_term(&level_label(end, m, cell), 1, g),
            CellOrigin::Slab { level, .. } if level > m => {}
            _ => out.add_term(l, 1, g),
        }
    }
    out
}

/// Chain homotopy between the identity and [`retract`].
fn retraction_homotopy(z: &Chain, m: usize) -> Chain {
    let mut out = Chain::zero(z.group(), z.dim() + 1);
    let s = sign(z.dim());
    for (l, g) in z.coeffs() {
        if let CellOrigin::Level { end, level, cell } = CellOrigin::parse(l) {
            for k in m + 1..=level {
                out.add_term(&slab_label(end, k, cell), s, g);
            }
        }
    }
    out
}

/// The pull-back of a cochain on `T_m` along the retraction.
fn pull_back(e: &EndedComplex, phi: &Cochain, m: usize) -> Result<LfCochain> {
    let level = split_union(&collar_to_union(phi, m), e.num_ends());
    let tails = level
        .into_iter()
        .map(|level| Tail { level, slab: Cochain::zero(phi.group(), phi.dim().saturating_sub(1)) })
        .collect();
    LfCochain::new(e, m, phi.clone(), tails)
}

impl Presentation {
    /// Builds the group at truncation depth `m` (ignored for groups at
    /// infinity and complexes without ends).
    pub fn at_depth(
        e: &EndedComplex,
        kind: GroupKind,
        dim: usize,
        group: &AbelianCoefficients,
        m: usize,
    ) -> Result<Self> {
        let m = m.max(1);
        let t = e.truncation(m)?;
        let none = BTreeSet::new();
        let engine = match kind {
            GroupKind::Homology => Engine::Chains(FiniteHomology::compute(t.complex(), &none, dim, group)),
            GroupKind::Cohomology => Engine::Cochains(FiniteCohomology::compute(t.complex(), &none, dim, group)),
            GroupKind::LfHomology => Engine::Chains(FiniteHomology::compute(t.complex(), t.collar(), dim, group)),
            GroupKind::LfCohomology => {
                Engine::Cochains(FiniteCohomology::compute(t.complex(), t.collar(), dim, group))
            }
            GroupKind::HomologyAtInfinity => {
                Engine::Chains(FiniteHomology::compute(e.cross_section_union(), &none, dim, group))
            }
            GroupKind::CohomologyAtInfinity => {
                Engine::Cochains(FiniteCohomology::compute(e.cross_section_union(), &none, dim, group))
            }
        };
        let mut p = Presentation {
            complex: e.clone(),
            kind,
            dim,
            group: group.clone(),
            depth: m,
            engine,
            generators: Vec::new(),
        };
        p.generators = p.make_generators()?;
        Ok(p)
    }

    /// Builds the group at the default depth, checking that it agrees with
    /// the next depth and moving deeper (up to `max_depth`) otherwise.
    pub fn stable(
        e: &EndedComplex,
        kind: GroupKind,
        dim: usize,
        group: &AbelianCoefficients,
        depth: usize,
        max_depth: usize,
    ) -> Result<Self> {
        let here = Self::at_depth(e, kind, dim, group, depth)?;
        if !kind.depends_on_depth() || e.num_ends() == 0 {
            return Ok(here);
        }
        let mut m = depth.max(1);
        let mut cur = here;
        let mut last = String::new();
        while m < max_depth {
            let next = Self::at_depth(e, kind, dim, group, m + 1)?;
            match cur.agrees_with(&next) {
                Ok(()) => return Ok(cur),
                Err(detail) => last = detail,
            }
            m += 1;
            cur = next;
        }
        Err(Error::Unstable { max_depth, detail: format!("{kind}_{dim}: {last}") })
    }

    /// Same orders, and our generators generate the other group.
    fn agrees_with(&self, other: &Presentation) -> std::result::Result<(), String> {
        if self.factors() != other.factors() {
            return Err(format!("orders {:?} vs {:?}", self.factors(), other.factors()));
        }
        let k = other.factors().len();
        let mut cols = Vec::new();
        for g in &self.generators {
            let c = other.reduce(g).map_err(|e| e.to_string())?;
            cols.push(c.coordinates);
        }
        let mut m = IntMatrix::zeros(k, cols.len() + k);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..k {
                m.set(i, j, BigInt::from(c[i]));
            }
        }
        for (i, &f) in other.factors().iter().enumerate() {
            m.set(i, cols.len() + i, BigInt::from(f));
        }
        if smith(&m).diag.iter().all(One::is_one) {
            Ok(())
        } else {
            Err("generators do not carry over".into())
        }
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn group(&self) -> &AbelianCoefficients {
        &self.group
    }

    pub fn complex(&self) -> &EndedComplex {
        &self.complex
    }

    pub fn factors(&self) -> &[u64] {
        match &self.engine {
            Engine::Chains(p) => p.factors(),
            Engine::Cochains(p) => p.factors(),
        }
    }

    pub fn order(&self) -> u128 {
        self.factors().iter().map(|&f| f as u128).product()
    }

    pub fn generators(&self) -> &[Representative] {
        &self.generators
    }

    fn chains(&self) -> &FiniteHomology {
        match &self.engine {
            Engine::Chains(p) => p,
            Engine::Cochains(_) => unreachable!("chain engine"),
        }
    }

    fn cochains(&self) -> &FiniteCohomology {
        match &self.engine {
            Engine::Cochains(p) => p,
            Engine::Chains(_) => unreachable!("cochain engine"),
        }
    }

    fn make_generators(&self) -> Result<Vec<Representative>> {
        let e = &self.complex;
        let m = self.depth;
        let mut out = Vec::new();
        match self.kind {
            GroupKind::Homology => {
                for g in self.chains().generators() {
                    out.push(Representative::Chain(LfChain::from_finite(e, g.clone())?));
                }
            }
            GroupKind::Cohomology => {
                for g in self.cochains().generators() {
                    out.push(Representative::Cochain(pull_back(e, g, m)?));
                }
            }
            GroupKind::LfHomology => {
                let t = e.truncation(m)?;
                for z in self.chains().generators() {
                    let mut tails: Vec<Tail<crate::chains::Ho>> =
                        (0..e.num_ends()).map(|_| Tail::zero(&self.group, self.dim)).collect();
                    if self.dim > 0 {
                        let dz = z.boundary(t.complex())?;
                        let parts = split_union(&collar_to_union(&dz, m), e.num_ends());
                        for (tail, b) in tails.iter_mut().zip(parts) {
                            tail.slab = b.scale(sign(self.dim - 1));
                        }
                    }
                    out.push(Representative::Chain(LfChain::new(e, m, z.clone(), tails)?));
                }
            }
            GroupKind::LfCohomology => {
                for g in self.cochains().generators() {
                    out.push(Representative::Cochain(LfCochain::from_finite(e, g.clone())?));
                }
            }
            GroupKind::HomologyAtInfinity => {
                out.extend(self.chains().generators().iter().cloned().map(Representative::ChainAtInfinity));
            }
            GroupKind::CohomologyAtInfinity => {
                out.extend(self.cochains().generators().iter().cloned().map(Representative::CochainAtInfinity));
            }
        }
        Ok(out)
    }

    fn class(&self, coordinates: Vec<u64>) -> HomologyClass {
        HomologyClass { kind: self.kind, dim: self.dim, factors: self.factors().to_vec(), coordinates }
    }

    fn wrong(&self, what: &str) -> Error {
        Error::Structural(format!("{what} does not represent an element of {}_{}", self.kind, self.dim))
    }

    /// Peels the outer levels of a finite cocycle until it lives on `T_m`
    /// and vanishes on the collar; returns the cocycle and the correction
    /// `eta` with `psi = psi_rel + d eta`.
    fn peel(&self, psi: &Cochain) -> Result<(Cochain, Cochain)> {
        let e = &self.complex;
        let m = self.depth;
        let mut psi = psi.clone();
        let mut eta_total = Cochain::zero(&self.group, self.dim.saturating_sub(1));
        let top = psi.depth().max(m + 1);
        if self.dim == 0 {
            // A finite 0-cocycle is constant along every end, hence zero there.
            return Ok((psi, eta_total));
        }
        for l in (m + 1..=top).rev() {
            let mut eta = Cochain::zero(&self.group, self.dim - 1);
            for (label, g) in psi.coeffs() {
                if let CellOrigin::Slab { end, level, cell } = CellOrigin::parse(label) {
                    if level == l {
                        eta.add_term(&e.level_cell(end, l - 1, cell), -sign(self.dim - 1), g);
                    }
                }
            }
            if eta.is_zero() {
                continue;
            }
            psi = psi.sub(&eta.differential_in(e)?)?;
            eta_total = eta_total.add(&eta)?;
        }
        Ok((psi, eta_total))
    }

    fn to_model_chain(&self, rep: &Representative) -> Result<Chain> {
        let e = &self.complex;
        let m = self.depth;
        match (self.kind, rep) {
            (GroupKind::Homology, Representative::Chain(c)) => {
                let z = c.as_finite().ok_or_else(|| self.wrong("an infinite chain"))?;
                if z.dim() != self.dim {
                    return Err(self.wrong("a chain of another dimension"));
                }
                if self.dim > 0 && !z.differential_in(e)?.is_zero() {
                    return Err(Error::NotCycle("finite chain has nonzero boundary".into()));
                }
                Ok(retract(z, m))
            }
            (GroupKind::LfHomology, Representative::Chain(c)) => {
                if c.dim() != self.dim {
                    return Err(self.wrong("a chain of another dimension"));
                }
                if self.dim > 0 && !c.is_closed(e)? {
                    return Err(Error::NotCycle("locally finite chain has nonzero boundary".into()));
                }
                let t = e.truncation(m)?;
                Ok(c.restrict(m).filter(|l| !t.is_collar(l)))
            }
            (GroupKind::HomologyAtInfinity, Representative::ChainAtInfinity(c)) => Ok(c.clone()),
            (GroupKind::HomologyAtInfinity, Representative::Chain(c)) => {
                if c.dim() != self.dim + 1 {
                    return Err(self.wrong("a chain of another dimension"));
                }
                c.finite_differential(e)?;
                Ok(join_union(c.tails().iter().map(|t| t.slab.clone()), &self.group, self.dim))
            }
            _ => Err(self.wrong("this representative")),
        }
    }

    fn to_model_cochain(&self, rep: &Representative) -> Result<Cochain> {
        let e = &self.complex;
        let m = self.depth;
        match (self.kind, rep) {
            (GroupKind::Cohomology, Representative::Cochain(c)) => {
                if c.dim() != self.dim {
                    return Err(self.wrong("a cochain of another dimension"));
                }
                if !c.is_closed(e)? {
                    return Err(Error::NotCycle("cochain has nonzero coboundary".into()));
                }
                Ok(c.restrict(m))
            }
            (GroupKind::LfCohomology, Representative::Cochain(c)) => {
                let psi = c.as_finite().ok_or_else(|| self.wrong("an infinite cochain"))?;
                if psi.dim() != self.dim {
                    return Err(self.wrong("a cochain of another dimension"));
                }
                if !psi.differential_in(e)?.is_zero() {
                    return Err(Error::NotCycle("finite cochain has nonzero coboundary".into()));
                }
                Ok(self.peel(psi)?.0)
            }
            (GroupKind::CohomologyAtInfinity, Representative::CochainAtInfinity(c)) => Ok(c.clone()),
            (GroupKind::CohomologyAtInfinity, Representative::Cochain(c)) => {
                if c.dim() != self.dim {
                    return Err(self.wrong("a cochain of another dimension"));
                }
                c.finite_differential(e)?;
                Ok(join_union(c.tails().iter().map(|t| t.level.clone()), &self.group, self.dim))
            }
            _ => Err(self.wrong("this representative")),
        }
    }

    /// Canonical coordinates of the class of `rep`.
    pub fn reduce(&self, rep: &Representative) -> Result<HomologyClass> {
        let coords = if self.kind.is_cohomology() {
            self.cochains().coordinates(&self.to_model_cochain(rep)?)?
        } else {
            self.chains().coordinates(&self.to_model_chain(rep)?)?
        };
        Ok(self.class(coords))
    }

    /// A representative of the class with the given coordinates.
    pub fn representative(&self, coordinates: &[u64]) -> Result<Representative> {
        if coordinates.len() != self.factors().len() {
            return Err(Error::Structural("coordinate vector has the wrong length".into()));
        }
        let e = &self.complex;
        let mut acc: Option<Representative> = None;
        for (g, &c) in self.generators.iter().zip(coordinates) {
            let term = scale_rep(g, c as i64);
            acc = Some(match acc {
                None => term,
                Some(a) => add_rep(e, &a, &term)?,
            });
        }
        match acc {
            Some(a) => Ok(a),
            None => Ok(self.zero_representative()),
        }
    }

    fn zero_representative(&self) -> Representative {
        let e = &self.complex;
        match self.kind {
            GroupKind::Homology | GroupKind::LfHomology => {
                Representative::Chain(LfChain::zero(e, &self.group, self.dim))
            }
            GroupKind::Cohomology | GroupKind::LfCohomology => {
                Representative::Cochain(LfCochain::zero(e, &self.group, self.dim))
            }
            GroupKind::HomologyAtInfinity => Representative::ChainAtInfinity(Chain::zero(&self.group, self.dim)),
            GroupKind::CohomologyAtInfinity => {
                Representative::CochainAtInfinity(Cochain::zero(&self.group, self.dim))
            }
        }
    }

    /// Locally finite realization of a representative of a group at
    /// infinity: a cycle is put on every slab, a cocycle on every level.
    pub fn realize(&self, rep: &Representative) -> Result<Representative> {
        realize(&self.complex, rep)
    }

    /// `None` when the class is nonzero; otherwise a bounding witness.
    pub fn is_boundary(&self, rep: &Representative) -> Result<Option<Representative>> {
        let e = &self.complex;
        let m = self.depth;
        match self.kind {
            GroupKind::Homology => {
                let z = self.to_model_chain(rep)?;
                let Some(w) = self.chains().witness(&z)? else {
                    return Ok(None);
                };
                let full = rep.as_chain().and_then(LfChain::as_finite).expect("checked");
                let w = w.with_dim_of(self.dim + 1).add(&retraction_homotopy(full, m))?;
                Ok(Some(Representative::Chain(LfChain::from_finite(e, w)?)))
            }
            GroupKind::Cohomology => {
                let phi_m = self.to_model_cochain(rep)?;
                let Some(psi) = self.cochains().witness(&phi_m)? else {
                    return Ok(None);
                };
                let phi = rep.as_cochain().expect("checked");
                self.cohomology_witness(phi, &phi_m, psi).map(|w| Some(Representative::Cochain(w)))
            }
            GroupKind::LfHomology => {
                let z = self.to_model_chain(rep)?;
                let Some(w) = self.chains().witness(&z)? else {
                    return Ok(None);
                };
                let gamma = rep.as_chain().expect("checked");
                self.lf_homology_witness(gamma, w.with_dim_of(self.dim + 1)).map(|w| Some(Representative::Chain(w)))
            }
            GroupKind::LfCohomology => {
                let psi = rep.as_cochain().and_then(LfCochain::as_finite).ok_or_else(|| self.wrong("this"))?;
                let (rel, eta) = self.peel(psi)?;
                let Some(xi) = self.cochains().witness(&rel)? else {
                    return Ok(None);
                };
                let w = if self.dim == 0 { xi } else { xi.with_dim_of(self.dim - 1).add(&eta)? };
                Ok(Some(Representative::Cochain(LfCochain::from_finite(e, w)?)))
            }
            GroupKind::HomologyAtInfinity => {
                let z = self.to_model_chain(rep)?;
                Ok(self.chains().witness(&z)?.map(|w| Representative::ChainAtInfinity(w.with_dim_of(self.dim + 1))))
            }
            GroupKind::CohomologyAtInfinity => {
                let z = self.to_model_cochain(rep)?;
                Ok(self.cochains().witness(&z)?.map(Representative::CochainAtInfinity))
            }
        }
    }

    /// Given a cocycle `phi`, its restriction `phi_m` and `psi` on `T_m` with
    /// `d psi = phi_m`, integrates the rest of `phi` along the ends.
    fn cohomology_witness(&self, phi: &LfCochain, phi_m: &Cochain, psi: Cochain) -> Result<LfCochain> {
        let e = &self.complex;
        let m = self.depth;
        let i = self.dim;
        if i == 0 {
            // A 0-cocycle that vanishes on T_m is zero everywhere on E.
            return Ok(LfCochain::zero(e, &self.group, 0));
        }
        let base = pull_back(e, &psi.with_dim_of(i - 1), m)?;
        let theta = phi.sub(&pull_back(e, phi_m, m)?)?;
        let big = theta.depth().max(m);
        let theta = theta.rebase(big);
        let mut finite = Cochain::zero(&self.group, i - 1);
        let mut tails = Vec::new();
        for (end, tail) in theta.tails().iter().enumerate() {
            let sigma = e.cross_section(end);
            let v = &tail.slab;
            let cap = if i == 1 {
                if !v.is_zero() {
                    return Err(Error::NonPeriodicWitness { end });
                }
                Cochain::zero(&self.group, 0)
            } else {
                let p = FiniteCohomology::absolute(sigma, i - 1, &self.group);
                p.witness(v)?.ok_or(Error::NonPeriodicWitness { end })?.with_dim_of(i - 2)
            };
            let mut x: BTreeMap<String, Vec<u64>> = BTreeMap::new();
            let mut level = Cochain::zero(&self.group, i - 1);
            for j in m + 1..=big {
                for cell in sigma.cells(i - 1) {
                    if let Some(g) = theta.finite().get(&slab_label(end, j, cell)) {
                        let cur = x.entry(cell.clone()).or_insert_with(|| vec![0; self.group.rank()]);
                        for ((c, &gv), &d) in cur.iter_mut().zip(g).zip(self.group.orders()) {
                            *c = residue(*c as i128 + sign(i - 1) as i128 * gv as i128, d);
                        }
                    }
                }
                for (cell, g) in &x {
                    finite.add_term(&level_label(end, j, cell), 1, g);
                }
            }
            for (cell, g) in &x {
                level.add_term(cell, 1, g);
            }
            tails.push(Tail { level, slab: cap });
        }
        let xi = LfCochain::new(e, big, finite, tails)?;
        base.add(&xi)
    }

    /// Given an lf cycle `gamma` and `w` on `T_m` with `gamma - dw` supported
    /// beyond the collar, extends `w` outwards.
    fn lf_homology_witness(&self, gamma: &LfChain, w: Chain) -> Result<LfChain> {
        let e = &self.complex;
        let m = self.depth;
        let i = self.dim;
        let t = e.truncation(m)?;
        let dw = if w.is_zero() { Chain::zero(&self.group, i) } else { w.boundary(t.complex())? };
        let big = gamma.depth().max(m);
        let r = gamma.rebase(big).add_finite(&dw.neg())?;
        let mut finite = w.clone();
        let mut tails = Vec::new();
        for (end, tail) in r.tails().iter().enumerate() {
            let sigma = e.cross_section(end);
            let a = &tail.level;
            let cap = if a.is_zero() {
                Chain::zero(&self.group, i + 1)
            } else {
                let p = FiniteHomology::absolute(sigma, i, &self.group);
                p.witness(a)?.ok_or(Error::NonPeriodicWitness { end })?.with_dim_of(i + 1)
            };
            let mut b = Chain::zero(&self.group, i);
            for j in m..=big {
                let mut rj = Chain::zero(&self.group, i);
                for cell in sigma.cells(i) {
                    if let Some(g) = r.coefficient_at(&e.level_cell(end, j, cell)) {
                        rj.add_term(cell, 1, g);
                    }
                }
                b = b.sub(&rj.scale(sign(i)))?;
                for (cell, g) in b.coeffs() {
                    finite.add_term(&slab_label(end, j + 1, cell), 1, g);
                }
            }
            for (cell, g) in cap.coeffs() {
                finite.add_term(&level_label(end, big + 1, cell), 1, g);
            }
            tails.push(Tail { level: cap, slab: b });
        }
        LfChain::new(e, big + 1, finite, tails)
    }
}

impl<K: Variance> FinVec<K> {
    fn with_dim_of(self, dim: usize) -> Self {
        if self.is_zero() {
            FinVec::zero(self.group(), dim)
        } else {
            self.with_dim(dim)
        }
    }
}

fn scale_rep(r: &Representative, n: i64) -> Representative {
    match r {
        Representative::Chain(c) => Representative::Chain(c.scale(n)),
        Representative::Cochain(c) => Representative::Cochain(c.scale(n)),
        Representative::ChainAtInfinity(c) => Representative::ChainAtInfinity(c.scale(n)),
        Representative::CochainAtInfinity(c) => Representative::CochainAtInfinity(c.scale(n)),
    }
}

pub fn add_rep(_e: &EndedComplex, a: &Representative, b: &Representative) -> Result<Representative> {
    Ok(match (a, b) {
        (Representative::Chain(x), Representative::Chain(y)) => Representative::Chain(x.add(y)?),
        (Representative::Cochain(x), Representative::Cochain(y)) => Representative::Cochain(x.add(y)?),
        (Representative::ChainAtInfinity(x), Representative::ChainAtInfinity(y)) => {
            Representative::ChainAtInfinity(x.add(y)?)
        }
        (Representative::CochainAtInfinity(x), Representative::CochainAtInfinity(y)) => {
            Representative::CochainAtInfinity(x.add(y)?)
        }
        _ => return Err(Error::Structural("adding representatives of different kinds".into())),
    })
}

/// Locally finite realization of a cross-section cycle or cocycle.
pub fn realize(e: &EndedComplex, rep: &Representative) -> Result<Representative> {
    match rep {
        Representative::ChainAtInfinity(c) => {
            let parts = split_union(c, e.num_ends());
            let mut finite = Chain::zero(c.group(), c.dim() + 1);
            let mut tails = Vec::new();
            for (end, p) in parts.into_iter().enumerate() {
                for (l, g) in p.coeffs() {
                    finite.add_term(&slab_label(end, 1, l), 1, g);
                }
                tails.push(Tail { level: Chain::zero(c.group(), c.dim() + 1), slab: p });
            }
            Ok(Representative::Chain(LfChain::new(e, 1, finite, tails)?))
        }
        Representative::CochainAtInfinity(u) => {
            let parts = split_union(u, e.num_ends());
            let mut finite = Cochain::zero(u.group(), u.dim());
            let mut tails = Vec::new();
            for (end, p) in parts.into_iter().enumerate() {
                for (l, g) in p.coeffs() {
                    finite.add_term(&level_label(end, 1, l), 1, g);
                }
                tails.push(Tail { level: p, slab: Cochain::zero(u.group(), u.dim().saturating_sub(1)) });
            }
            Ok(Representative::Cochain(LfCochain::new(e, 1, finite, tails)?))
        }
        other => Ok(other.clone()),
    }
}

/// Maps of the long exact sequences
/// `H_i -> H^lf_i -> H^inf_{i-1} -> H_{i-1}` and
/// `H^i_lf -> H^i -> H^i_inf -> H^{i+1}_lf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LesMap {
    /// `H_i -> H^lf_i`
    Inclusion,
    /// `H^lf_i -> H^inf_{i-1}`
    Restriction,
    /// `H^inf_{i-1} -> H_{i-1}`
    Connecting,
    /// `H^i_lf -> H^i`
    CoInclusion,
    /// `H^i -> H^i_inf`
    CoRestriction,
    /// `H^i_inf -> H^{i+1}_lf`
    CoConnecting,
}

impl LesMap {
    pub const ALL: [LesMap; 6] = [
        LesMap::Inclusion,
        LesMap::Restriction,
        LesMap::Connecting,
        LesMap::CoInclusion,
        LesMap::CoRestriction,
        LesMap::CoConnecting,
    ];

    /// `(domain kind, codomain kind, codomain dim)` for a domain of dim `i`.
    pub fn signature(self, i: usize) -> Option<(GroupKind, GroupKind, usize)> {
        use GroupKind::*;
        Some(match self {
            LesMap::Inclusion => (Homology, LfHomology, i),
            LesMap::Restriction => (LfHomology, HomologyAtInfinity, i.checked_sub(1)?),
            LesMap::Connecting => (HomologyAtInfinity, Homology, i),
            LesMap::CoInclusion => (LfCohomology, Cohomology, i),
            LesMap::CoRestriction => (Cohomology, CohomologyAtInfinity, i),
            LesMap::CoConnecting => (CohomologyAtInfinity, LfCohomology, i + 1),
        })
    }
}

/// Computes and caches presentations of one ended complex and group.
pub struct HomologyContext {
    complex: EndedComplex,
    group: AbelianCoefficients,
    depth: usize,
    max_depth: usize,
    cache: Mutex<BTreeMap<(GroupKind, usize), Arc<Presentation>>>,
}

impl HomologyContext {
    pub fn new(complex: &EndedComplex, group: &AbelianCoefficients) -> Self {
        Self::with_depth(complex, group, DEFAULT_DEPTH, MAX_DEPTH)
    }

    pub fn with_depth(complex: &EndedComplex, group: &AbelianCoefficients, depth: usize, max_depth: usize) -> Self {
        HomologyContext {
            complex: complex.clone(),
            group: group.clone(),
            depth: depth.max(1),
            max_depth: max_depth.max(depth + 1),
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn complex(&self) -> &EndedComplex {
        &self.complex
    }

    pub fn group(&self) -> &AbelianCoefficients {
        &self.group
    }

    pub fn presentation(&self, kind: GroupKind, dim: usize) -> Result<Arc<Presentation>> {
        if let Some(p) = self.cache.lock().expect("cache").get(&(kind, dim)) {
            return Ok(p.clone());
        }
        let p = Arc::new(Presentation::stable(&self.complex, kind, dim, &self.group, self.depth, self.max_depth)?);
        self.cache.lock().expect("cache").insert((kind, dim), p.clone());
        Ok(p)
    }

    /// Image of a representative under one of the exact-sequence maps, as a
    /// representative of the codomain.
    pub fn les_map_rep(&self, which: LesMap, rep: &Representative) -> Result<Representative> {
        let e = &self.complex;
        Ok(match (which, rep) {
            (LesMap::Inclusion, Representative::Chain(_)) | (LesMap::CoInclusion, Representative::Cochain(_)) => {
                rep.clone()
            }
            (LesMap::Restriction, Representative::Chain(c)) => {
                c.finite_differential(e)?;
                Representative::ChainAtInfinity(join_union(
                    c.tails().iter().map(|t| t.slab.clone()),
                    &self.group,
                    c.dim().saturating_sub(1),
                ))
            }
            (LesMap::CoRestriction, Representative::Cochain(c)) => {
                c.finite_differential(e)?;
                Representative::CochainAtInfinity(join_union(
                    c.tails().iter().map(|t| t.level.clone()),
                    &self.group,
                    c.dim(),
                ))
            }
            (LesMap::Connecting, Representative::ChainAtInfinity(c)) => {
                let parts = split_union(c, e.num_ends());
                let mut out = Chain::zero(&self.group, c.dim());
                for (end, p) in parts.into_iter().enumerate() {
                    for (l, g) in p.coeffs() {
                        out.add_term(&level_label(end, 1, l), 1, g);
                    }
                }
                Representative::Chain(LfChain::from_finite(e, out)?)
            }
            (LesMap::CoConnecting, Representative::CochainAtInfinity(u)) => {
                let parts = split_union(u, e.num_ends());
                let tails = parts
                    .into_iter()
                    .map(|p| Tail { level: p, slab: Cochain::zero(&self.group, u.dim().saturating_sub(1)) })
                    .collect();
                let beyond = LfCochain::new(e, 1, Cochain::zero(&self.group, u.dim()), tails)?;
                Representative::Cochain(LfCochain::from_finite(e, beyond.finite_differential(e)?)?)
            }
            _ => return Err(Error::Structural(format!("{which:?} does not apply to this representative"))),
        })
    }

    /// Image of a class of `H(domain)_i` under the map.
    pub fn les_map(&self, which: LesMap, class: &HomologyClass) -> Result<HomologyClass> {
        let (dom, cod, cdim) = which
            .signature(class.dim)
            .ok_or_else(|| Error::Argument(format!("{which:?} is not defined in dimension {}", class.dim)))?;
        if class.kind != dom {
            return Err(Error::Structural(format!("{which:?} expects a class of {dom}, got {}", class.kind)));
        }
        let src = self.presentation(dom, class.dim)?;
        if src.factors() != class.factors.as_slice() {
            return Err(Error::Structural("class does not belong to this group".into()));
        }
        let rep = src.representative(&class.coordinates)?;
        let image = self.les_map_rep(which, &rep)?;
        self.presentation(cod, cdim)?.reduce(&image)
    }

    /// Matrix of a map in coordinates: column `j` is the image of generator `j`.
    pub fn les_matrix(&self, which: LesMap, dim: usize) -> Result<Vec<Vec<u64>>> {
        let (dom, _, _) = which
            .signature(dim)
            .ok_or_else(|| Error::Argument(format!("{which:?} is not defined in dimension {dim}")))?;
        let src = self.presentation(dom, dim)?;
        let mut cols = Vec::new();
        for k in 0..src.factors().len() {
            let mut unit = vec![0u64; src.factors().len()];
            unit[k] = 1;
            let c = HomologyClass { kind: dom, dim, factors: src.factors().to_vec(), coordinates: unit };
            cols.push(self.les_map(which, &c)?.coordinates);
        }
        Ok(cols)
    }
}

/// Report shape used by the command line.
#[derive(Clone, Debug, Serialize)]
pub struct PresentationReport {
    pub kind: GroupKind,
    pub dim: usize,
    pub group: Vec<u64>,
    pub depth: usize,
    pub generators: Vec<Representative>,
}

impl Presentation {
    pub fn report(&self) -> PresentationReport {
        PresentationReport {
            kind: self.kind,
            dim: self.dim,
            group: self.factors().to_vec(),
            depth: self.depth,
            generators: self.generators.clone(),
        }
    }
}
