//! Brute-force model on the full state space `G^N` of a small finite complex,
//! used to check the homological predictions.

pub mod cyclo;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::chains::{Chain, Cochain};
use crate::complex::FiniteComplex;
use crate::error::{Error, Result};
use crate::groups::{residue, AbelianCoefficients, PhaseQZ};

pub use cyclo::Cyclo;

/// Largest state space built without an override.
pub const DEFAULT_CAP: u128 = 1 << 14;
pub const CAP_ENV: &str = "CWTORIC_ORACLE_CAP";

/// The cap, honouring `CWTORIC_ORACLE_CAP` when it parses.
pub fn cap_from_env() -> u128 {
    std::env::var(CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_CAP)
}

/// State space dimension `|G|^N` of the degree-`n` model on `c`.
pub fn state_count(c: &FiniteComplex, n: usize, g: &AbelianCoefficients) -> u128 {
    let cells = if n < c.dim_count() { c.num_cells(n) } else { 0 };
    g.order().checked_pow(cells as u32).unwrap_or(u128::MAX)
}

/// A vector with exact coefficients, keyed by basis index.
pub type StateVec = BTreeMap<usize, Cyclo>;

#[derive(Clone, Debug)]
pub struct DenseModel {
    group: AbelianCoefficients,
    n: usize,
    qudits: Vec<String>,
    /// Cofaces of each `(n-1)`-cell among the qudits.
    stars: Vec<Vec<(usize, i64)>>,
    /// Faces of each `(n+1)`-cell among the qudits.
    plaquettes: Vec<Vec<(usize, i64)>>,
    states: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommutationReport {
    pub pairs_checked: usize,
    pub failures: Vec<(String, String)>,
}

impl DenseModel {
    pub fn new(c: &FiniteComplex, n: usize, g: &AbelianCoefficients, cap: u128) -> Result<Self> {
        if n >= c.dim_count() {
            return Err(Error::Argument(format!("no {n}-cells in the complex")));
        }
        let states = state_count(c, n, g);
        if states > cap {
            return Err(Error::CapExceeded { states, cap });
        }
        let stars = if n == 0 { Vec::new() } else { (0..c.num_cells(n - 1)).map(|i| c.cofaces(n - 1, i).to_vec()).collect() };
        let plaquettes =
            if n + 1 < c.dim_count() { (0..c.num_cells(n + 1)).map(|i| c.faces(n + 1, i).to_vec()).collect() } else { Vec::new() };
        Ok(DenseModel { group: g.clone(), n, qudits: c.cells(n).to_vec(), stars, plaquettes, states: states as usize })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_stars(&self) -> usize {
        self.stars.len()
    }

    pub fn num_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    /// The lowest possible energy `-(#stars + #plaquettes)`.
    pub fn frustration_free_energy(&self) -> i64 {
        -((self.stars.len() + self.plaquettes.len()) as i64)
    }

    fn orders(&self) -> &[u64] {
        self.group.orders()
    }

    /// Configuration `h`: one group element per qudit.
    pub fn decode(&self, mut index: usize) -> Vec<Vec<u64>> {
        let mut h = Vec::with_capacity(self.qudits.len());
        for _ in &self.qudits {
            let mut v = Vec::with_capacity(self.orders().len());
            for &d in self.orders() {
                v.push((index % d as usize) as u64);
                index /= d as usize;
            }
            h.push(v);
        }
        h
    }

    pub fn encode(&self, h: &[Vec<u64>]) -> usize {
        let mut index = 0usize;
        let mut scale = 1usize;
        for v in h {
            for (x, &d) in v.iter().zip(self.orders()) {
                index += *x as usize * scale;
                scale *= d as usize;
            }
        }
        index
    }

    fn field(&self, v: &BTreeMap<String, Vec<u64>>) -> Result<Vec<Vec<u64>>> {
        let mut out = vec![vec![0u64; self.orders().len()]; self.qudits.len()];
        for (l, x) in v {
            let i = self.qudits.binary_search(l).map_err(|_| Error::UnknownCell(l.clone()))?;
            out[i] = x.clone();
        }
        Ok(out)
    }

    /// `X^a |h> = |h + a>`.
    pub fn shift(&self, index: usize, a: &[Vec<u64>]) -> usize {
        let h = self.decode(index);
        let moved: Vec<Vec<u64>> = h
            .iter()
            .zip(a)
            .map(|(x, y)| x.iter().zip(y).zip(self.orders()).map(|((p, q), &d)| (p + q) % d).collect())
            .collect();
        self.encode(&moved)
    }

    /// Phase of `Z^b |h> = e^(2 pi i <b, h>) |h>`.
    pub fn z_phase(&self, index: usize, b: &[Vec<u64>]) -> PhaseQZ {
        let h = self.decode(index);
        let num: u128 = h.iter().zip(b).map(|(x, y)| self.group.pair_numerator(y, x) as u128).sum();
        PhaseQZ::new(num as i128, self.group.exponent())
    }

    /// `dT(g e_alpha)` on the qudits.
    pub fn star_shift(&self, alpha: usize, g: &[u64]) -> Vec<Vec<u64>> {
        let mut a = vec![vec![0u64; self.orders().len()]; self.qudits.len()];
        for &(c, d) in &self.stars[alpha] {
            for (f, &m) in self.orders().iter().enumerate() {
                a[c][f] = (a[c][f] + residue(d as i128 * g[f] as i128, m)) % m;
            }
        }
        a
    }

    fn flux(&self, beta: usize, index: usize) -> bool {
        let h = self.decode(index);
        self.orders().iter().enumerate().all(|(f, &m)| {
            self.plaquettes[beta].iter().fold(0u64, |s, &(c, d)| (s + residue(d as i128 * h[c][f] as i128, m)) % m) == 0
        })
    }

    /// `B_beta |h>` is `|h>` or `0`.
    pub fn plaquette_holds(&self, beta: usize, index: usize) -> bool {
        self.flux(beta, index)
    }

    /// `|G| A_alpha |h>` as multiplicities of the shifted states.
    fn star_terms(&self, alpha: usize, index: usize) -> BTreeMap<usize, u64> {
        let mut out = BTreeMap::new();
        for g in self.group.elements() {
            *out.entry(self.shift(index, &self.star_shift(alpha, &g))).or_insert(0) += 1;
        }
        out
    }

    /// Exact `[A_alpha, B_beta] = 0` for all pairs, on every basis state.
    pub fn check_commutation(&self) -> CommutationReport {
        let mut failures = Vec::new();
        for alpha in 0..self.stars.len() {
            for beta in 0..self.plaquettes.len() {
                let ok = (0..self.states).all(|h| {
                    let terms = self.star_terms(alpha, h);
                    let b_h = self.plaquette_holds(beta, h);
                    // A B |h> has every term iff B|h> = |h>; B A |h> keeps terms whose target holds
                    terms.keys().all(|&t| self.plaquette_holds(beta, t) == b_h)
                });
                if !ok {
                    failures.push((format!("star {alpha}"), format!("plaquette {beta}")));
                }
            }
        }
        CommutationReport { pairs_checked: self.stars.len() * self.plaquettes.len(), failures }
    }

    /// `A_alpha^2 = A_alpha` and `B_beta^2 = B_beta` on every basis state.
    pub fn check_projections(&self) -> bool {
        let order = self.group.order() as u64;
        for alpha in 0..self.stars.len() {
            for h in 0..self.states {
                let once = self.star_terms(alpha, h);
                let mut twice: BTreeMap<usize, u64> = BTreeMap::new();
                for (&t, &m) in &once {
                    for (u, k) in self.star_terms(alpha, t) {
                        *twice.entry(u).or_insert(0) += m * k;
                    }
                }
                // |G|^2 A^2 = |G| (|G| A)
                if once.iter().any(|(t, &m)| twice.get(t) != Some(&(m * order))) || twice.len() != once.len() {
                    return false;
                }
            }
        }
        // B is diagonal with entries 0 and 1
        true
    }

    /// Flat basis states grouped into orbits of the star shifts.
    pub fn ground_orbits(&self) -> Vec<Vec<usize>> {
        let flat: Vec<usize> = (0..self.states).filter(|&h| (0..self.plaquettes.len()).all(|b| self.flux(b, h))).collect();
        let gens: Vec<Vec<Vec<u64>>> = (0..self.stars.len())
            .flat_map(|a| (0..self.orders().len()).map(move |f| (a, f)))
            .map(|(a, f)| self.star_shift(a, self.group.unit(f).residues()))
            .collect();
        let mut seen = BTreeSet::new();
        let mut orbits = Vec::new();
        for &h in &flat {
            if !seen.insert(h) {
                continue;
            }
            let mut orbit = vec![h];
            let mut i = 0;
            while i < orbit.len() {
                let s = orbit[i];
                for g in &gens {
                    let t = self.shift(s, g);
                    if seen.insert(t) {
                        orbit.push(t);
                    }
                }
                i += 1;
            }
            orbit.sort_unstable();
            orbits.push(orbit);
        }
        orbits
    }

    /// `H psi` for `H = -sum A - sum B`.
    pub fn apply_hamiltonian(&self, psi: &StateVec) -> StateVec {
        let mut out: StateVec = BTreeMap::new();
        let inv = BigRational::new(BigInt::one(), BigInt::from(self.group.order()));
        for (&h, c) in psi {
            for alpha in 0..self.stars.len() {
                for (t, m) in self.star_terms(alpha, h) {
                    let w = c.scale(&(&inv * BigRational::from_integer(BigInt::from(m))));
                    add_into(&mut out, t, &w.neg());
                }
            }
            for beta in 0..self.plaquettes.len() {
                if self.plaquette_holds(beta, h) {
                    add_into(&mut out, h, &c.neg());
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Dimension of the eigenspace of `H` at the frustration free energy:
    /// the orbit indicators are checked to be eigenvectors; they span the
    /// joint fixed space of the commuting projections.
    pub fn ground_space_dimension(&self) -> Result<usize> {
        let orbits = self.ground_orbits();
        let e0 = Cyclo::integer(self.frustration_free_energy());
        for o in &orbits {
            let psi: StateVec = o.iter().map(|&h| (h, Cyclo::integer(1))).collect();
            let hpsi = self.apply_hamiltonian(&psi);
            let expect: StateVec = psi.iter().map(|(&h, c)| (h, c.mul(&e0))).filter(|(_, c)| !c.is_zero()).collect();
            if hpsi != expect {
                return Err(Error::Certificate("orbit state is not a ground state".into()));
            }
        }
        Ok(orbits.len())
    }

    /// The ground state supported on the orbit of the zero configuration,
    /// normalized so that every amplitude is `1` with weight `1/|orbit|`.
    fn reference_orbit(&self) -> Vec<usize> {
        self.ground_orbits().into_iter().find(|o| o.contains(&0)).expect("zero configuration is flat")
    }

    /// `psi = Z^(-gamma) X^(-delta) psi_0` as amplitudes of unit modulus on a
    /// support of size `|orbit|`.
    fn excited(&self, gamma: &Chain, delta: &Cochain) -> Result<Vec<(usize, PhaseQZ)>> {
        let b = self.field(gamma.coeffs())?;
        let a = self.field(delta.neg().coeffs())?;
        let mut out: Vec<(usize, PhaseQZ)> = self
            .reference_orbit()
            .into_iter()
            .map(|h| {
                let t = self.shift(h, &a);
                (t, self.z_phase(t, &b).neg())
            })
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// `<psi| X^a Z^b |psi>` in the excited state `(gamma, delta)` built on
    /// the reference ground state.
    pub fn expectation(&self, gamma: &Chain, delta: &Cochain, a: &Cochain, b: &Chain) -> Result<Cyclo> {
        let psi = self.excited(gamma, delta)?;
        let amp: BTreeMap<usize, PhaseQZ> = psi.iter().copied().collect();
        let av = self.field(a.coeffs())?;
        let bv = self.field(b.coeffs())?;
        let w = BigRational::new(BigInt::one(), BigInt::from(psi.len()));
        let mut total = Cyclo::zero();
        for &(h, p) in &psi {
            // X^a Z^b |h> = e^(2 pi i <b,h>) |h + a>
            let t = self.shift(h, &av);
            if let Some(&q) = amp.get(&t) {
                total = total.add(&Cyclo::root(p.add(self.z_phase(h, &bv)).sub(q), w.clone()));
            }
        }
        Ok(total)
    }

    /// `<psi|H|psi> - E_0` for the excited state; an exact integer.
    pub fn excitation_energy(&self, gamma: &Chain, delta: &Cochain) -> Result<i64> {
        let psi = self.excited(gamma, delta)?;
        let amp: BTreeMap<usize, PhaseQZ> = psi.iter().copied().collect();
        let w = BigRational::new(BigInt::one(), BigInt::from(psi.len() as u128 * self.group.order()));
        let mut stars = Cyclo::zero();
        for &(h, p) in &psi {
            for alpha in 0..self.stars.len() {
                for (t, m) in self.star_terms(alpha, h) {
                    if let Some(&q) = amp.get(&t) {
                        let c = &w * BigRational::from_integer(BigInt::from(m));
                        stars = stars.add(&Cyclo::root(p.sub(q), c));
                    }
                }
            }
        }
        let held = psi.iter().map(|&(h, _)| (0..self.plaquettes.len()).filter(|&b| self.plaquette_holds(b, h)).count()).sum::<usize>();
        let plaq = BigRational::new(BigInt::from(held), BigInt::from(psi.len()));
        let e = Cyclo::integer(self.stars.len() as i64 + self.plaquettes.len() as i64)
            .sub(&stars)
            .sub(&Cyclo::rational(plaq));
        e.as_integer().ok_or_else(|| Error::Certificate(format!("energy {e} is not an integer")))
    }

    /// Checks `X^a Z^b = e^(-2 pi i <b,a>) Z^b X^a` on every basis state.
    pub fn check_weyl_relation(&self, a: &Cochain, b: &Chain) -> Result<bool> {
        let av = self.field(a.coeffs())?;
        let bv = self.field(b.coeffs())?;
        let ba = crate::chains::pair(b, a)?;
        Ok((0..self.states).all(|h| {
            let t = self.shift(h, &av);
            // X^a Z^b |h> = e(<b,h>) |t>,  Z^b X^a |h> = e(<b,t>) |t>
            self.z_phase(h, &bv) == self.z_phase(t, &bv).sub(ba)
        }))
    }
}

fn add_into(v: &mut StateVec, k: usize, c: &Cyclo) {
    let e = v.entry(k).or_insert_with(Cyclo::zero);
    *e = e.add(c);
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleSummary {
    pub states: usize,
    pub ground_dimension: usize,
    pub stabilizer_dimension: u128,
    pub homology_order: u128,
    pub commutation_pairs: usize,
    pub commutation_failures: usize,
    pub projections: bool,
}

impl OracleSummary {
    pub fn consistent(&self) -> bool {
        self.ground_dimension as u128 == self.stabilizer_dimension
            && self.stabilizer_dimension == self.homology_order
            && self.commutation_failures == 0
            && self.projections
    }
}

/// Ground dimension three ways plus the operator checks.
pub fn summarize(c: &FiniteComplex, n: usize, g: &AbelianCoefficients, cap: u128) -> Result<OracleSummary> {
    let m = DenseModel::new(c, n, g, cap)?;
    let s = crate::css::stabilizers(c, n, g)?;
    let comm = m.check_commutation();
    Ok(OracleSummary {
        states: m.states(),
        ground_dimension: m.ground_space_dimension()?,
        stabilizer_dimension: s.code_dimension(),
        homology_order: crate::homology::FiniteHomology::absolute(c, n, g).order(),
        commutation_pairs: comm.pairs_checked,
        commutation_failures: comm.failures.len(),
        projections: m.check_projections(),
    })
}
