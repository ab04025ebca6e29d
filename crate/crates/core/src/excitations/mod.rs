//! Excited states `omega_0 o rho_(gamma, delta)`: energies, ground-state
//! tests, state and sector comparison, polarization, charge transporters,
//! braiding and twist phases.

pub mod planar;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::chains::{pair, pair_at_infinity, pair_lf, Chain, Cochain, FinVec, LfChain, LfCochain, Tail, Variance};
use crate::complex::{EndedComplex, FiniteComplex};
use crate::error::{Error, Result};
use crate::groups::{AbelianCoefficients, PhaseQZ};
use crate::homology::{
    realize, FiniteCohomology, FiniteHomology, GroupKind, HomologyClass, HomologyContext, Representative,
};
use crate::reduce::{CyclicHomology, ModComplex};

pub const DEFAULT_BUDGET: usize = 4;
/// Largest number of candidate defect patterns examined per radius.
pub const CANDIDATE_LIMIT: u128 = 1 << 18;

/// A pair `(gamma, delta)` of a locally finite `n`-chain and an `n`-cochain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Excitation {
    pub gamma: LfChain,
    pub delta: LfCochain,
}

impl Excitation {
    pub fn new(gamma: LfChain, delta: LfCochain) -> Result<Self> {
        if gamma.dim() != delta.dim() {
            return Err(Error::Structural(format!(
                "chain of dimension {} with cochain of dimension {}",
                gamma.dim(),
                delta.dim()
            )));
        }
        if gamma.group() != delta.group() {
            return Err(Error::Structural("chain and cochain use different groups".into()));
        }
        Ok(Excitation { gamma, delta })
    }

    pub fn zero(e: &EndedComplex, group: &AbelianCoefficients, n: usize) -> Self {
        Excitation { gamma: LfChain::zero(e, group, n), delta: LfCochain::zero(e, group, n) }
    }

    pub fn from_chain(e: &EndedComplex, gamma: LfChain) -> Self {
        let delta = LfCochain::zero(e, gamma.group(), gamma.dim());
        Excitation { gamma, delta }
    }

    pub fn from_cochain(e: &EndedComplex, delta: LfCochain) -> Self {
        let gamma = LfChain::zero(e, delta.group(), delta.dim());
        Excitation { gamma, delta }
    }

    pub fn n(&self) -> usize {
        self.gamma.dim()
    }

    pub fn group(&self) -> &AbelianCoefficients {
        self.gamma.group()
    }

    pub fn add(&self, other: &Excitation) -> Result<Excitation> {
        Excitation::new(self.gamma.add(&other.gamma)?, self.delta.add(&other.delta)?)
    }

    /// `supp d gamma`, the violated plaquette-type checks on `(n-1)`-cells.
    pub fn z_defects(&self, e: &EndedComplex) -> Result<Chain> {
        if self.n() == 0 {
            return Ok(Chain::zero(self.group(), 0));
        }
        self.gamma.finite_differential(e)
    }

    /// `supp dT delta`, the violated star-type checks on `(n+1)`-cells.
    pub fn x_defects(&self, e: &EndedComplex) -> Result<Cochain> {
        self.delta.finite_differential(e)
    }

    pub fn energy(&self, e: &EndedComplex) -> Result<usize> {
        Ok(self.z_defects(e)?.support_size() + self.x_defects(e)?.support_size())
    }

    pub fn is_frustration_free(&self, e: &EndedComplex) -> Result<bool> {
        let z = self.n() == 0 || self.gamma.is_closed(e)?;
        Ok(z && self.delta.is_closed(e)?)
    }
}

fn lf_is_zero<K: Variance>(v: &crate::chains::LfVec<K>) -> bool {
    v.finite().is_zero() && !v.has_tails()
}

// ---------------------------------------------------------------------------
// Ground-state test

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroundCertificate {
    pub radius: usize,
    pub z_region: usize,
    pub x_region: usize,
    pub candidates: u128,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GroundVerdict {
    Yes { certificate: GroundCertificate },
    No { witness: Representative, before: usize, after: usize },
    Unknown { budget: usize, reason: String },
}

/// Cells of `c` within `r` hops of `start` in the incidence graph.
fn ball(c: &FiniteComplex, start: &BTreeSet<String>, r: usize) -> BTreeSet<String> {
    let mut seen: BTreeSet<String> = start.clone();
    let mut queue: VecDeque<(String, usize)> = start.iter().map(|s| (s.clone(), 0)).collect();
    while let Some((l, d)) = queue.pop_front() {
        if d == r {
            continue;
        }
        let Some(cell) = c.lookup(&l) else { continue };
        let mut next = Vec::new();
        if cell.dim > 0 {
            next.extend(c.faces(cell.dim, cell.index).iter().map(|&(f, _)| c.cells(cell.dim - 1)[f].clone()));
        }
        if cell.dim + 1 < c.dim_count() {
            next.extend(c.cofaces(cell.dim, cell.index).iter().map(|&(f, _)| c.cells(cell.dim + 1)[f].clone()));
        }
        for n in next {
            if seen.insert(n.clone()) {
                queue.push_back((n, d + 1));
            }
        }
    }
    seen
}

/// Solver for `D x = z` where `D` maps chosen `n`-cells to neighbouring
/// cells (faces for chains, cofaces for cochains).
struct LocalSolver {
    group: AbelianCoefficients,
    unknowns: Vec<String>,
    targets: Vec<String>,
    index: BTreeMap<String, usize>,
    engines: Vec<CyclicHomology>,
}

impl LocalSolver {
    fn new(
        c: &FiniteComplex,
        group: &AbelianCoefficients,
        unknowns: Vec<String>,
        targets: Vec<String>,
        upward: bool,
    ) -> Self {
        let index: BTreeMap<String, usize> = targets.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let cols: Vec<Vec<(usize, i64)>> = unknowns
            .iter()
            .map(|u| {
                let r = c.lookup(u).expect("cell of the truncation");
                let (adj, dim) = if upward {
                    (c.cofaces(r.dim, r.index), r.dim + 1)
                } else {
                    (c.faces(r.dim, r.index), r.dim - 1)
                };
                adj.iter().filter_map(|&(o, d)| index.get(&c.cells(dim)[o]).map(|&i| (i, d))).collect()
            })
            .collect();
        let engines = group
            .orders()
            .iter()
            .map(|&d| {
                CyclicHomology::compute(&ModComplex {
                    modulus: d,
                    n2: unknowns.len(),
                    n1: targets.len(),
                    n0: 0,
                    d2: cols
                        .iter()
                        .map(|col| col.iter().map(|&(i, x)| (i, crate::groups::residue(x as i128, d))).collect())
                        .collect(),
                    d1: vec![Vec::new(); targets.len()],
                })
            })
            .collect();
        LocalSolver { group: group.clone(), unknowns, targets, index, engines }
    }

    /// Some `x` on the unknowns with `D x = z`, as `(label, value)` pairs.
    fn solve(&self, z: &BTreeMap<String, Vec<u64>>) -> Option<Vec<(String, Vec<u64>)>> {
        let rank = self.group.rank();
        let mut out: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        for (f, eng) in self.engines.iter().enumerate() {
            let mut v = vec![0u64; self.targets.len()];
            for (l, g) in z {
                v[*self.index.get(l)?] = g[f];
            }
            let sol = eng.witness(&v)?;
            for (i, s) in sol.into_iter().enumerate() {
                if s != 0 {
                    out.entry(self.unknowns[i].clone()).or_insert_with(|| vec![0; rank])[f] = s;
                }
            }
        }
        Some(out.into_iter().collect())
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    r
}

/// Enumerates all assignments of nonzero group elements to subsets of
/// `cells` of size `< bound`, smallest first, stopping at the first hit.
fn search_smaller<T>(
    cells: &[String],
    group: &AbelianCoefficients,
    bound: usize,
    mut test: impl FnMut(&BTreeMap<String, Vec<u64>>) -> Option<T>,
) -> Option<T> {
    let nonzero: Vec<Vec<u64>> = group.elements().into_iter().filter(|g| g.iter().any(|&x| x != 0)).collect();
    for size in 0..bound {
        let mut pick: Vec<usize> = (0..size).collect();
        loop {
            let mut vals = vec![0usize; size];
            loop {
                let m: BTreeMap<String, Vec<u64>> =
                    pick.iter().zip(&vals).map(|(&i, &v)| (cells[i].clone(), nonzero[v].clone())).collect();
                if let Some(t) = test(&m) {
                    return Some(t);
                }
                let mut k = 0;
                while k < size {
                    vals[k] += 1;
                    if vals[k] < nonzero.len() {
                        break;
                    }
                    vals[k] = 0;
                    k += 1;
                }
                if k == size {
                    break;
                }
            }
            // next combination
            let mut i = size;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if pick[i] < cells.len() - size + i {
                    pick[i] += 1;
                    for j in i + 1..size {
                        pick[j] = pick[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if size == 0 || i == usize::MAX {
                break;
            }
        }
    }
    None
}

fn count_candidates(cells: usize, group: &AbelianCoefficients, bound: usize) -> u128 {
    let nz = group.order() - 1;
    (0..bound).map(|s| binomial(cells, s).saturating_mul(nz.saturating_pow(s as u32))).fold(0u128, u128::saturating_add)
}

/// Decides whether some finite modification within `budget` hops of the
/// defects lowers the number of violated checks. "Yes" additionally needs
/// every defect type to be at its homological minimum.
pub fn is_ground(e: &EndedComplex, x: &Excitation, budget: usize) -> Result<GroundVerdict> {
    let n = x.n();
    let group = x.group().clone();
    let zd = x.z_defects(e)?;
    let xd = x.x_defects(e)?;
    let depth = zd.depth().max(xd.depth()).max(x.gamma.depth()).max(1);
    let t = e.truncation(depth + budget + 2)?;
    let c = t.complex();
    let mut total: u128 = 0;
    let mut last = GroundCertificate { radius: 0, z_region: 0, x_region: 0, candidates: 0 };
    for r in 1..=budget {
        let mut cert = GroundCertificate { radius: r, z_region: 0, x_region: 0, candidates: 0 };
        if !zd.is_zero() {
            let start: BTreeSet<String> = zd.support().cloned().collect();
            let near = ball(c, &start, r);
            let unknowns: Vec<String> = c.cells(n).iter().filter(|l| near.contains(*l)).cloned().collect();
            let mut targets: BTreeSet<String> = start.clone();
            for u in &unknowns {
                let rr = c.lookup(u).expect("cell");
                targets.extend(c.faces(rr.dim, rr.index).iter().map(|&(f, _)| c.cells(n - 1)[f].clone()));
            }
            let targets: Vec<String> = targets.into_iter().collect();
            let bound = zd.support_size();
            let count = count_candidates(targets.len(), &group, bound);
            if count > CANDIDATE_LIMIT {
                return Ok(GroundVerdict::Unknown {
                    budget,
                    reason: format!("{count} candidate defect patterns at radius {r}"),
                });
            }
            cert.z_region = unknowns.len();
            cert.candidates += count;
            let solver = LocalSolver::new(c, &group, unknowns, targets.clone(), false);
            let hit = search_smaller(&targets, &group, bound, |target| {
                let mut z = Chain::from_coeffs(&group, n - 1, target).ok()?;
                z = z.sub(&zd).ok()?;
                solver.solve(z.coeffs()).map(|b| (b, target.len()))
            });
            if let Some((b, after)) = hit {
                let mut w = Chain::zero(&group, n);
                for (l, g) in &b {
                    w.add_term(l, 1, g);
                }
                return Ok(GroundVerdict::No {
                    witness: Representative::Chain(LfChain::from_finite(e, w)?),
                    before: bound,
                    after,
                });
            }
        }
        if !xd.is_zero() {
            let start: BTreeSet<String> = xd.support().cloned().collect();
            let near = ball(c, &start, r);
            let unknowns: Vec<String> = c.cells(n).iter().filter(|l| near.contains(*l)).cloned().collect();
            let mut targets: BTreeSet<String> = start.clone();
            for u in &unknowns {
                let rr = c.lookup(u).expect("cell");
                targets.extend(c.cofaces(rr.dim, rr.index).iter().map(|&(f, _)| c.cells(n + 1)[f].clone()));
            }
            let targets: Vec<String> = targets.into_iter().collect();
            let bound = xd.support_size();
            let count = count_candidates(targets.len(), &group, bound);
            if count > CANDIDATE_LIMIT {
                return Ok(GroundVerdict::Unknown {
                    budget,
                    reason: format!("{count} candidate defect patterns at radius {r}"),
                });
            }
            cert.x_region = unknowns.len();
            cert.candidates += count;
            let solver = LocalSolver::new(c, &group, unknowns, targets.clone(), true);
            let hit = search_smaller(&targets, &group, bound, |target| {
                let mut z = Cochain::from_coeffs(&group, n + 1, target).ok()?;
                z = z.sub(&xd).ok()?;
                solver.solve(z.coeffs()).map(|a| (a, target.len()))
            });
            if let Some((a, after)) = hit {
                let mut w = Cochain::zero(&group, n);
                for (l, g) in &a {
                    w.add_term(l, 1, g);
                }
                return Ok(GroundVerdict::No {
                    witness: Representative::Cochain(LfCochain::from_finite(e, w)?),
                    before: bound,
                    after,
                });
            }
        }
        total += cert.candidates;
        last = cert;
    }
    last.candidates = total;
    last.radius = budget;
    // Reachable defect patterns are the finite cycles homologous to the
    // current ones, so one defect is optimal exactly when the class is
    // nonzero. More defects than that cannot be certified by a local search.
    let ctx = HomologyContext::new(e, &group);
    let mut floor = (0, 0);
    if !zd.is_zero() {
        let h = ctx.presentation(GroupKind::Homology, n - 1)?;
        floor.0 = usize::from(!h.reduce(&Representative::Chain(LfChain::from_finite(e, zd.clone())?))?.is_zero());
    }
    if !xd.is_zero() {
        let h = ctx.presentation(GroupKind::LfCohomology, n + 1)?;
        floor.1 = usize::from(!h.reduce(&Representative::Cochain(LfCochain::from_finite(e, xd.clone())?))?.is_zero());
    }
    let (wz, wx) = (zd.support_size(), xd.support_size());
    if (wz, wx) != floor {
        return Ok(GroundVerdict::Unknown {
            budget,
            reason: format!(
                "no improvement within radius {budget}, but only ({}, {}) defects are certified minimal against ({wz}, {wx})",
                floor.0, floor.1
            ),
        });
    }
    Ok(GroundVerdict::Yes { certificate: last })
}

/// Checks a "no" verdict: applying the witness lowers the defect count.
pub fn verify_ground_witness(e: &EndedComplex, x: &Excitation, witness: &Representative) -> Result<bool> {
    let y = match witness {
        Representative::Chain(b) => Excitation::new(x.gamma.add(b)?, x.delta.clone())?,
        Representative::Cochain(a) => Excitation::new(x.gamma.clone(), x.delta.add(a)?)?,
        _ => return Ok(false),
    };
    Ok(y.energy(e)? < x.energy(e)?)
}

// ---------------------------------------------------------------------------
// States and sectors

/// Whether the two excitations define the same state for every frustration
/// free ground state.
pub fn same_state(ctx: &HomologyContext, x1: &Excitation, x2: &Excitation) -> Result<bool> {
    let e = ctx.complex();
    let n = x1.n();
    let dg = x2.gamma.sub(&x1.gamma)?;
    let dd = x2.delta.sub(&x1.delta)?;
    if n > 0 && !dg.is_closed(e)? {
        return Ok(false);
    }
    if !dd.is_closed(e)? {
        return Ok(false);
    }
    for a in ctx.presentation(GroupKind::LfCohomology, n)?.generators() {
        let a = a.as_cochain().expect("cochain generator");
        if !pair_lf(&dg, a, true)?.is_zero() {
            return Ok(false);
        }
    }
    for b in ctx.presentation(GroupKind::Homology, n)?.generators() {
        let b = b.as_chain().expect("chain generator");
        if !pair_lf(b, &dd, true)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChargeClasses {
    /// `[gamma]` in `H^inf_{n-1}`; absent for `n = 0`.
    pub gamma: Option<HomologyClass>,
    /// `[delta]` in `H^n_inf`.
    pub delta: HomologyClass,
}

pub fn classes_at_infinity(ctx: &HomologyContext, x: &Excitation) -> Result<ChargeClasses> {
    let n = x.n();
    let gamma = if n == 0 {
        None
    } else {
        Some(ctx.presentation(GroupKind::HomologyAtInfinity, n - 1)?.reduce(&Representative::Chain(x.gamma.clone()))?)
    };
    let delta = ctx.presentation(GroupKind::CohomologyAtInfinity, n)?.reduce(&Representative::Cochain(x.delta.clone()))?;
    Ok(ChargeClasses { gamma, delta })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SectorVerdict {
    /// Equal classes at infinity; a transporter exists.
    Equivalent,
    /// Some polarization test class sees different phases.
    Distinguishable { test: String, phases: (PhaseQZ, PhaseQZ) },
    /// Classes differ but no test class separates them.
    Undetermined,
}

/// Test classes for polarization: generators of `H^inf_n` and `H^{n-1}_inf`,
/// realized as locally finite objects.
pub fn polarization_tests(ctx: &HomologyContext, n: usize) -> Result<(Vec<LfChain>, Vec<LfCochain>)> {
    let e = ctx.complex();
    let mut ds = Vec::new();
    for g in ctx.presentation(GroupKind::HomologyAtInfinity, n)?.generators() {
        if let Representative::Chain(c) = realize(e, g)? {
            ds.push(c);
        }
    }
    let mut cs = Vec::new();
    if n > 0 {
        for g in ctx.presentation(GroupKind::CohomologyAtInfinity, n - 1)?.generators() {
            if let Representative::Cochain(c) = realize(e, g)? {
                cs.push(c);
            }
        }
    }
    Ok((ds, cs))
}

pub fn equivalent_sectors(ctx: &HomologyContext, x1: &Excitation, x2: &Excitation) -> Result<SectorVerdict> {
    let e = ctx.complex();
    let (c1, c2) = (classes_at_infinity(ctx, x1)?, classes_at_infinity(ctx, x2)?);
    if c1 == c2 {
        return Ok(SectorVerdict::Equivalent);
    }
    let (ds, cs) = polarization_tests(ctx, x1.n())?;
    for (i, d) in ds.iter().enumerate() {
        let a = polarization_phase(e, x1, Some(d), None)?;
        let b = polarization_phase(e, x2, Some(d), None)?;
        if a != b {
            return Ok(SectorVerdict::Distinguishable { test: format!("H^inf_{} generator {i}", x1.n()), phases: (a, b) });
        }
    }
    for (i, c) in cs.iter().enumerate() {
        let a = polarization_phase(e, x1, None, Some(c))?;
        let b = polarization_phase(e, x2, None, Some(c))?;
        if a != b {
            return Ok(SectorVerdict::Distinguishable {
                test: format!("H^{}_inf generator {i}", x1.n() - 1),
                phases: (a, b),
            });
        }
    }
    Ok(SectorVerdict::Undetermined)
}

/// `<[gamma], [c]> + <[d], [delta]>` at infinity.
pub fn polarization_phase(
    e: &EndedComplex,
    x: &Excitation,
    d: Option<&LfChain>,
    c: Option<&LfCochain>,
) -> Result<PhaseQZ> {
    let mut out = PhaseQZ::ZERO;
    if let Some(c) = c {
        out = out.add(pair_at_infinity(e, &x.gamma, c)?);
    }
    if let Some(d) = d {
        out = out.add(pair_at_infinity(e, d, &x.delta)?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expectation {
    Zero,
    Phase { value: PhaseQZ },
}

/// `omega_(gamma, delta)(X^a Z^b)` for finite `a`, `b`, relative to a
/// frustration free ground state whose value on `X^a Z^b` does not depend on
/// the logical state.
pub fn expectation(ctx: &HomologyContext, x: &Excitation, a: &Cochain, b: &Chain) -> Result<Expectation> {
    let e = ctx.complex();
    let n = x.n();
    let a_closed = a.differential_in(e)?.is_zero();
    let b_closed = n == 0 || b.differential_in(e)?.is_zero();
    if !a_closed || !b_closed {
        return Ok(Expectation::Zero);
    }
    let a_rep = Representative::Cochain(LfCochain::from_finite(e, a.clone())?);
    let b_rep = Representative::Chain(LfChain::from_finite(e, b.clone())?);
    let a_trivial = ctx.presentation(GroupKind::LfCohomology, n)?.reduce(&a_rep)?.is_zero();
    let b_trivial = ctx.presentation(GroupKind::Homology, n)?.reduce(&b_rep)?.is_zero();
    if !a_trivial || !b_trivial {
        return Err(Error::LogicalStateDependent("observable carries a nontrivial logical class".into()));
    }
    let af = LfCochain::from_finite(e, a.clone())?;
    let bf = LfChain::from_finite(e, b.clone())?;
    let value = pair_lf(&x.gamma, &af, true)?.sub(pair_lf(&bf, &x.delta, true)?);
    Ok(Expectation::Phase { value })
}

// ---------------------------------------------------------------------------
// Transporters and braiding

/// `(gamma^, delta^, p, q)` with `gamma' = gamma - gamma^ + dp` and
/// `delta' = delta - delta^ + dT q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransportData {
    pub gamma_hat: Chain,
    pub delta_hat: Cochain,
    pub p: LfChain,
    pub q: LfCochain,
}

impl TransportData {
    pub fn zero(e: &EndedComplex, group: &AbelianCoefficients, n: usize) -> Self {
        TransportData {
            gamma_hat: Chain::zero(group, n),
            delta_hat: Cochain::zero(group, n),
            p: LfChain::zero(e, group, n + 1),
            q: LfCochain::zero(e, group, n.saturating_sub(1)),
        }
    }

    /// The excitation this data transports `x` to.
    pub fn target(&self, e: &EndedComplex, x: &Excitation) -> Result<Excitation> {
        let gamma = x.gamma.add_finite(&self.gamma_hat.neg())?.add(&self.p.differential(e)?)?;
        let mut delta = x.delta.add_finite(&self.delta_hat.neg())?;
        if x.n() > 0 {
            delta = delta.add(&self.q.differential(e)?)?;
        }
        Excitation::new(gamma, delta)
    }

    pub fn links(&self, e: &EndedComplex, from: &Excitation, to: &Excitation) -> Result<bool> {
        let t = self.target(e, from)?;
        Ok(lf_is_zero(&t.gamma.sub(&to.gamma)?) && lf_is_zero(&t.delta.sub(&to.delta)?))
    }
}

/// Transport data from `x1` to `x2` when their classes at infinity agree.
pub fn find_transporter(ctx: &HomologyContext, x1: &Excitation, x2: &Excitation) -> Result<Option<TransportData>> {
    let e = ctx.complex();
    let group = ctx.group();
    let n = x1.n();
    if classes_at_infinity(ctx, x1)? != classes_at_infinity(ctx, x2)? {
        return Ok(None);
    }
    let mut data = TransportData::zero(e, group, n);

    // chains: kill the slab tails, then the level tails, keep the rest finite
    let d = x2.gamma.sub(&x1.gamma)?;
    let mut slab_caps = Vec::new();
    let mut level_caps = Vec::new();
    for (end, tail) in d.tails().iter().enumerate() {
        let sigma = e.cross_section(end);
        let b = if n == 0 {
            Chain::zero(group, n + 1)
        } else if tail.slab.is_zero() {
            Chain::zero(group, n)
        } else {
            FiniteHomology::absolute(sigma, n - 1, group)
                .witness(&tail.slab)?
                .ok_or_else(|| Error::Certificate("slab tail is not a boundary".into()))?
        };
        slab_caps.push(if n == 0 { Chain::zero(group, 0) } else { b });
        level_caps.push(tail.level.clone());
    }
    let mut p = LfChain::zero(e, group, n + 1);
    if n > 0 {
        let p1 = LfChain::new(
            e,
            1,
            Chain::zero(group, n + 1),
            slab_caps.into_iter().map(|b| Tail { level: Chain::zero(group, n + 1), slab: fix_dim(b, n) }).collect(),
        )?;
        p = p.add(&p1)?;
    }
    let rest = d.sub(&p.differential(e)?)?;
    let mut level_fix = Vec::new();
    for (end, tail) in rest.tails().iter().enumerate() {
        if !tail.slab.is_zero() {
            return Err(Error::Certificate("slab tail survived".into()));
        }
        let a = &tail.level;
        let cap = if a.is_zero() {
            Chain::zero(group, n + 1)
        } else {
            FiniteHomology::absolute(e.cross_section(end), n, group)
                .witness(a)?
                .ok_or(Error::NonPeriodicWitness { end })?
        };
        level_fix.push(Tail { level: fix_dim(cap, n + 1), slab: Chain::zero(group, n) });
    }
    let p2 = LfChain::new(e, 1, Chain::zero(group, n + 1), level_fix)?;
    p = p.add(&p2)?;
    let rest = d.sub(&p.differential(e)?)?;
    let gamma_hat = rest.as_finite().ok_or_else(|| Error::Certificate("chain remainder is infinite".into()))?.neg();
    data.gamma_hat = gamma_hat;
    data.p = p;
    drop(level_caps);

    // cochains: kill the level tails, then the slab tails
    let d = x2.delta.sub(&x1.delta)?;
    let mut q = LfCochain::zero(e, group, n.saturating_sub(1));
    if n > 0 {
        let mut fix = Vec::new();
        for (end, tail) in d.tails().iter().enumerate() {
            let u = &tail.level;
            let cap = if u.is_zero() {
                Cochain::zero(group, n - 1)
            } else {
                FiniteCohomology::absolute(e.cross_section(end), n, group)
                    .witness(u)?
                    .ok_or_else(|| Error::Certificate("level tail is not a coboundary".into()))?
            };
            fix.push(Tail { level: fix_dim(cap, n - 1), slab: Cochain::zero(group, (n - 1).saturating_sub(1)) });
        }
        q = q.add(&LfCochain::new(e, 1, Cochain::zero(group, n - 1), fix)?)?;
        let rest = d.sub(&q.differential(e)?)?;
        let mut fix = Vec::new();
        for (end, tail) in rest.tails().iter().enumerate() {
            let v = &tail.slab;
            let cap = if v.is_zero() || n == 1 {
                if !v.is_zero() {
                    return Err(Error::NonPeriodicWitness { end });
                }
                Cochain::zero(group, (n - 1).saturating_sub(1))
            } else {
                FiniteCohomology::absolute(e.cross_section(end), n - 1, group)
                    .witness(v)?
                    .ok_or(Error::NonPeriodicWitness { end })?
            };
            fix.push(Tail { level: Cochain::zero(group, n - 1), slab: fix_dim(cap, (n - 1).saturating_sub(1)) });
        }
        q = q.add(&LfCochain::new(e, 1, Cochain::zero(group, n - 1), fix)?)?;
    }
    let rest = if n > 0 { d.sub(&q.differential(e)?)? } else { d };
    data.delta_hat = rest.as_finite().ok_or_else(|| Error::Certificate("cochain remainder is infinite".into()))?.neg();
    data.q = q;
    if !data.links(e, x1, x2)? {
        return Err(Error::Certificate("transport data does not reproduce the target".into()));
    }
    Ok(Some(data))
}

fn fix_dim<K: Variance>(v: FinVec<K>, dim: usize) -> FinVec<K> {
    if v.dim() == dim {
        v
    } else if v.is_zero() {
        FinVec::zero(v.group(), dim)
    } else {
        v.with_dim(dim)
    }
}

fn named(term: &str, r: Result<PhaseQZ>) -> Result<PhaseQZ> {
    r.map_err(|err| match err {
        Error::UndefinedPairing(m) => Error::UndefinedPairing(format!("{term}: {m}")),
        other => other,
    })
}

fn fin_chain(e: &EndedComplex, c: &Chain) -> Result<LfChain> {
    LfChain::from_finite(e, c.clone())
}

fn fin_cochain(e: &EndedComplex, c: &Cochain) -> Result<LfCochain> {
    LfCochain::from_finite(e, c.clone())
}

/// One half of the general exponent: the terms with `gamma_2` moving past
/// the transporter of `1`.
fn general_half(
    e: &EndedComplex,
    xi: &Excitation,
    ti: &TransportData,
    xj: &Excitation,
    tj: &TransportData,
) -> Result<PhaseQZ> {
    // <g_i, d^_j> + <g^_i, d_j> - <g^_i, d^_j> + <dg^_i, q_j> - <dg_i, q_j> + <p_i, dT d^_j> - <p_i, dT d_j>
    let n = xi.n();
    let mut s = named("<gamma, delta_hat>", pair_lf(&xi.gamma, &fin_cochain(e, &tj.delta_hat)?, true))?;
    s = s.add(named("<gamma_hat, delta>", pair_lf(&fin_chain(e, &ti.gamma_hat)?, &xj.delta, true))?);
    s = s.sub(named("<gamma_hat, delta_hat>", pair(&ti.gamma_hat, &tj.delta_hat))?);
    if n > 0 {
        let dgh = fin_chain(e, &ti.gamma_hat.differential_in(e)?)?;
        s = s.add(named("<d gamma_hat, q>", pair_lf(&dgh, &tj.q, true))?);
        let dg = fin_chain(e, &xi.z_defects(e)?)?;
        s = s.sub(named("<d gamma, q>", pair_lf(&dg, &tj.q, true))?);
    }
    let ddh = fin_cochain(e, &tj.delta_hat.differential_in(e)?)?;
    s = s.add(named("<p, dT delta_hat>", pair_lf(&ti.p, &ddh, true))?);
    let dd = fin_cochain(e, &xj.x_defects(e)?)?;
    s = s.sub(named("<p, dT delta>", pair_lf(&ti.p, &dd, true))?);
    Ok(s)
}

/// Exponent of the braiding for explicit transport data.
pub fn braiding_phase_general(
    e: &EndedComplex,
    x1: &Excitation,
    x2: &Excitation,
    t1: &TransportData,
    t2: &TransportData,
) -> Result<PhaseQZ> {
    x1.z_defects(e)?;
    x1.x_defects(e)?;
    x2.z_defects(e)?;
    x2.x_defects(e)?;
    let general = general_half(e, x2, t2, x1, t1)?.sub(general_half(e, x1, t1, x2, t2)?);
    if let Some(alt) = braiding_phase_alternative(e, x1, x2, t1, t2)? {
        if alt != general {
            return Err(Error::Certificate(format!("alternative braiding formula gives {alt}, general gives {general}")));
        }
    }
    Ok(general)
}

fn alternative_half(
    e: &EndedComplex,
    xi: &Excitation,
    ti: &TransportData,
    xj: &Excitation,
    tj: &TransportData,
) -> Result<Option<PhaseQZ>> {
    let yi = ti.target(e, xi)?;
    let yj = tj.target(e, xj)?;
    let n = xi.n();
    let dpi = ti.p.differential(e)?;
    let mut terms = vec![
        pair_lf(&xi.gamma, &xj.delta, false),
        pair_lf(&yi.gamma, &yj.delta, false).map(PhaseQZ::neg),
        pair_lf(&dpi, &yj.delta, false),
        yj.delta.finite_differential(e).and_then(|d| pair_lf(&ti.p, &fin_cochain(e, &d)?, false)).map(PhaseQZ::neg),
    ];
    if n > 0 {
        let dq = tj.q.differential(e)?;
        terms.push(pair_lf(&yi.gamma, &dq, false));
        terms.push(yi.gamma.finite_differential(e).and_then(|d| pair_lf(&fin_chain(e, &d)?, &tj.q, false)).map(PhaseQZ::neg));
    }
    let mut s = PhaseQZ::ZERO;
    for t in terms {
        match t {
            Ok(v) => s = s.add(v),
            Err(Error::UndefinedPairing(_)) | Err(Error::InfiniteBoundary { .. }) => return Ok(None),
            Err(other) => return Err(other),
        }
    }
    Ok(Some(s))
}

/// The alternative form of the braiding exponent, defined when all the
/// pairings it needs have finitely many common cells.
pub fn braiding_phase_alternative(
    e: &EndedComplex,
    x1: &Excitation,
    x2: &Excitation,
    t1: &TransportData,
    t2: &TransportData,
) -> Result<Option<PhaseQZ>> {
    let a = alternative_half(e, x2, t2, x1, t1)?;
    let b = alternative_half(e, x1, t1, x2, t2)?;
    Ok(match (a, b) {
        (Some(a), Some(b)) => Some(a.sub(b)),
        _ => None,
    })
}

/// `-(<[p2], [delta1]> + <[gamma1], [q2]>)`.
pub fn braiding_phase_at_infinity(
    e: &EndedComplex,
    x1: &Excitation,
    p2: &LfChain,
    q2: &LfCochain,
) -> Result<PhaseQZ> {
    let mut s = pair_at_infinity(e, p2, &x1.delta)?;
    if x1.n() > 0 {
        s = s.add(pair_at_infinity(e, &x1.gamma, q2)?);
    }
    Ok(s.neg())
}

/// Symmetrized variant: subtracts the terms with `1` and `2` exchanged.
pub fn braiding_phase_at_infinity_symmetric(
    e: &EndedComplex,
    x1: &Excitation,
    x2: &Excitation,
    p1: &LfChain,
    q1: &LfCochain,
    p2: &LfChain,
    q2: &LfCochain,
) -> Result<PhaseQZ> {
    Ok(braiding_phase_at_infinity(e, x1, p2, q2)?.sub(braiding_phase_at_infinity(e, x2, p1, q1)?))
}

/// Same, taking classes at infinity for `p2` (in `H^inf_n`) and `q2` (in
/// `H^{n-1}_inf`).
pub fn braiding_phase_at_infinity_classes(
    ctx: &HomologyContext,
    x1: &Excitation,
    p2: &HomologyClass,
    q2: Option<&HomologyClass>,
) -> Result<PhaseQZ> {
    let e = ctx.complex();
    let n = x1.n();
    let rp = ctx.presentation(GroupKind::HomologyAtInfinity, n)?.representative(&p2.coordinates)?;
    let Representative::Chain(p) = realize(e, &rp)? else {
        return Err(Error::Structural("expected a chain class".into()));
    };
    let q = match (q2, n) {
        (Some(c), n) if n > 0 => {
            let rq = ctx.presentation(GroupKind::CohomologyAtInfinity, n - 1)?.representative(&c.coordinates)?;
            match realize(e, &rq)? {
                Representative::Cochain(q) => q,
                _ => return Err(Error::Structural("expected a cochain class".into())),
            }
        }
        _ => LfCochain::zero(e, ctx.group(), n.saturating_sub(1)),
    };
    braiding_phase_at_infinity(e, x1, &p, &q)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwistRoute {
    /// `p` is the rotation class, `q = 0`.
    P,
    /// `p = 0`, `q` is the rotation class.
    Q,
}

/// Exponent of the self-braiding of `x` along the chosen route, where `p`
/// and `q` are the rotation classes.
pub fn twist_phase(e: &EndedComplex, x: &Excitation, route: TwistRoute, p: &LfChain, q: &LfCochain) -> Result<PhaseQZ> {
    let n = x.n();
    match route {
        TwistRoute::P => braiding_phase_at_infinity(e, x, p, &LfCochain::zero(e, x.group(), n.saturating_sub(1))),
        TwistRoute::Q => braiding_phase_at_infinity(e, x, &LfChain::zero(e, x.group(), n + 1), q),
    }
}
