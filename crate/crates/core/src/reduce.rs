//! Homology of a three-term complex `C2 -> C1 -> C0` over `Z_d`.
//!
//! Unit pivots are eliminated first (Gaussian elimination of the chain
//! complex, which preserves homology and records the chain maps both ways);
//! the small remainder is handled with Smith normal forms over `Z`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::groups::{inverse_mod, residue};
use crate::linalg::{mod_floor_u64, smith, to_u64, IntMatrix};

/// Sparse columns: `d2[x]` lists `(row in C1, entry)` for `x` in `C2`, and
/// `d1[y]` lists `(row in C0, entry)` for `y` in `C1`. Entries are reduced mod
/// `modulus`; repeated rows are summed.
#[derive(Clone, Debug)]
pub struct ModComplex {
    pub modulus: u64,
    pub n2: usize,
    pub n1: usize,
    pub n0: usize,
    pub d2: Vec<Vec<(usize, u64)>>,
    pub d1: Vec<Vec<(usize, u64)>>,
}

#[derive(Clone, Debug)]
struct Sparse {
    cols: Vec<BTreeMap<usize, u64>>,
    rows: Vec<BTreeMap<usize, u64>>,
}

impl Sparse {
    fn new(nrows: usize, columns: &[Vec<(usize, u64)>], d: u64) -> Self {
        let mut cols = vec![BTreeMap::new(); columns.len()];
        let mut rows = vec![BTreeMap::new(); nrows];
        for (j, col) in columns.iter().enumerate() {
            for &(i, x) in col {
                let e: &mut u64 = cols[j].entry(i).or_insert(0);
                *e = (*e + x % d) % d;
            }
            cols[j].retain(|_, v| *v != 0);
            for (&i, &x) in &cols[j] {
                rows[i].insert(j, x);
            }
        }
        Sparse { cols, rows }
    }

    fn set(&mut self, i: usize, j: usize, x: u64) {
        if x == 0 {
            self.cols[j].remove(&i);
            self.rows[i].remove(&j);
        } else {
            self.cols[j].insert(i, x);
            self.rows[i].insert(j, x);
        }
    }

    fn remove_row(&mut self, i: usize) {
        for j in std::mem::take(&mut self.rows[i]).into_keys() {
            self.cols[j].remove(&i);
        }
    }

    fn remove_col(&mut self, j: usize) {
        for i in std::mem::take(&mut self.cols[j]).into_keys() {
            self.rows[i].remove(&j);
        }
    }

    /// Unit pivot in column `j` with the fewest row entries.
    fn pivot_in(&self, j: usize, d: u64) -> Option<(usize, u64)> {
        self.cols[j]
            .iter()
            .filter_map(|(&i, &x)| inverse_mod(x, d).map(|inv| (self.rows[i].len(), i, inv)))
            .min()
            .map(|(_, i, inv)| (i, inv))
    }

    /// Eliminates the pivot `(b, a)`: `M[y][x] -= M[y][a] * inv * M[b][x]`.
    fn eliminate(&mut self, a: usize, b: usize, inv: u64, d: u64) -> (Vec<(usize, u64)>, Vec<(usize, u64)>) {
        let col_a: Vec<(usize, u64)> = self.cols[a].iter().filter(|(&i, _)| i != b).map(|(&i, &x)| (i, x)).collect();
        let row_b: Vec<(usize, u64)> = self.rows[b].iter().filter(|(&j, _)| j != a).map(|(&j, &x)| (j, x)).collect();
        for &(y, g) in &col_a {
            let f = (g as u128 * inv as u128 % d as u128) as u64;
            for &(x, beta) in &row_b {
                let cur = self.cols[x].get(&y).copied().unwrap_or(0);
                let delta = (f as u128 * beta as u128 % d as u128) as u64;
                self.set(y, x, (cur + d - delta) % d);
            }
        }
        self.remove_col(a);
        self.remove_row(b);
        (col_a, row_b)
    }
}

#[derive(Clone, Debug)]
enum Step {
    /// Pair `a` in `C2` with `b` in `C1`.
    Top { b: usize, a: usize, inv: u64, col_a: Vec<(usize, u64)>, row_b: Vec<(usize, u64)> },
    /// Pair `a` in `C1` with `b` in `C0`.
    Bottom { a: usize, inv: u64, row_b: Vec<(usize, u64)> },
}

/// `H_1` of a [`ModComplex`], with generators, canonical coordinates and
/// bounding witnesses.
#[derive(Clone, Debug)]
pub struct CyclicHomology {
    modulus: u64,
    n2: usize,
    n1: usize,
    d1: Vec<Vec<(usize, u64)>>,
    n0: usize,
    steps: Vec<Step>,
    keep1: Vec<usize>,
    keep2: Vec<usize>,
    /// Kernel lattice data: `K^-1 = diag(1/t) * v_inv`.
    v_inv: IntMatrix,
    t: Vec<BigInt>,
    k: IntMatrix,
    /// Smith form of the relation matrix in kernel coordinates.
    rel_u: IntMatrix,
    rel_v: IntMatrix,
    rel_diag: Vec<BigInt>,
    factor_index: Vec<usize>,
    factors: Vec<u64>,
    generators: Vec<Vec<u64>>,
}

impl CyclicHomology {
    pub fn compute(c: &ModComplex) -> Self {
        let d = c.modulus;
        let mut m2 = Sparse::new(c.n1, &c.d2, d);
        let mut m1 = Sparse::new(c.n0, &c.d1, d);
        let mut alive1 = vec![true; c.n1];
        let mut alive2 = vec![true; c.n2];
        let mut steps = Vec::new();
        loop {
            let mut changed = false;
            for a in 0..c.n2 {
                if !alive2[a] {
                    continue;
                }
                if let Some((b, inv)) = m2.pivot_in(a, d) {
                    let (col_a, row_b) = m2.eliminate(a, b, inv, d);
                    m1.remove_col(b);
                    alive2[a] = false;
                    alive1[b] = false;
                    steps.push(Step::Top { b, a, inv, col_a, row_b });
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        loop {
            let mut changed = false;
            for a in 0..c.n1 {
                if !alive1[a] {
                    continue;
                }
                if let Some((b, inv)) = m1.pivot_in(a, d) {
                    let (_, row_b) = m1.eliminate(a, b, inv, d);
                    m2.remove_row(a);
                    alive1[a] = false;
                    steps.push(Step::Bottom { a, inv, row_b });
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let keep1: Vec<usize> = (0..c.n1).filter(|&i| alive1[i]).collect();
        let keep2: Vec<usize> = (0..c.n2).filter(|&i| alive2[i]).collect();
        let pos1: BTreeMap<usize, usize> = keep1.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let live0: Vec<usize> = (0..c.n0).filter(|&i| !m1.rows[i].is_empty()).collect();
        let (n1r, n2r) = (keep1.len(), keep2.len());

        let mut d1r = IntMatrix::zeros(live0.len(), n1r);
        for (r, &i) in live0.iter().enumerate() {
            for (&j, &x) in &m1.rows[i] {
                d1r.set(r, pos1[&j], BigInt::from(x));
            }
        }
        let mut d2r = IntMatrix::zeros(n1r, n2r);
        for (col, &x) in keep2.iter().enumerate() {
            for (&i, &v) in &m2.cols[x] {
                d2r.set(pos1[&i], col, BigInt::from(v));
            }
        }

        let big_d = BigInt::from(d);
        let s1 = smith(&d1r);
        let t: Vec<BigInt> = (0..n1r)
            .map(|j| {
                let s = s1.diag.get(j).cloned().unwrap_or_else(BigInt::zero);
                &big_d / s.gcd(&big_d)
            })
            .collect();
        let mut k = s1.v.clone();
        for row in &mut k.data {
            for (x, tj) in row.iter_mut().zip(&t) {
                *x *= tj;
            }
        }
        let rel = {
            let mut gens = d2r.hstack(&{
                let mut di = IntMatrix::identity(n1r);
                for i in 0..n1r {
                    di.set(i, i, big_d.clone());
                }
                di
            });
            gens = s1.v_inv.mul(&gens);
            for (row, tj) in gens.data.iter_mut().zip(&t) {
                for x in row.iter_mut() {
                    debug_assert!(x.is_multiple_of(tj));
                    *x = &*x / tj;
                }
            }
            gens
        };
        let s2 = smith(&rel);
        let mut factor_index = Vec::new();
        let mut factors = Vec::new();
        for (i, s) in s2.diag.iter().enumerate() {
            if !s.is_one() {
                factor_index.push(i);
                factors.push(to_u64(s));
            }
        }

        let mut out = CyclicHomology {
            modulus: d,
            n2: c.n2,
            n1: c.n1,
            d1: c.d1.clone(),
            n0: c.n0,
            steps,
            keep1,
            keep2,
            v_inv: s1.v_inv,
            t,
            k,
            rel_u: s2.u,
            rel_v: s2.v,
            rel_diag: s2.diag,
            factor_index,
            factors,
            generators: Vec::new(),
        };
        out.generators = out
            .factor_index
            .iter()
            .map(|&i| {
                let col = s2.u_inv.column(i);
                let red: Vec<u64> = out.k.mul_vec(&col).iter().map(|x| mod_floor_u64(x, d)).collect();
                out.include(&red)
            })
            .collect();
        out
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Nontrivial invariant factors, each dividing the next.
    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    /// One cycle per factor, in the original `C1` indexing.
    pub fn generators(&self) -> &[Vec<u64>] {
        &self.generators
    }

    pub fn order(&self) -> u128 {
        self.factors.iter().map(|&f| f as u128).product()
    }

    pub fn is_cycle(&self, z: &[u64]) -> bool {
        let d = self.modulus;
        let mut acc = vec![0u64; self.n0];
        for (y, col) in self.d1.iter().enumerate() {
            let zy = z[y] % d;
            if zy == 0 {
                continue;
            }
            for &(i, x) in col {
                acc[i] = ((acc[i] as u128 + zy as u128 * x as u128) % d as u128) as u64;
            }
        }
        acc.iter().all(|&x| x == 0)
    }

    /// Chain map to the reduced complex; also returns the pivot values needed
    /// to lift a bounding chain back.
    fn project(&self, z: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let d = self.modulus;
        let mut z: Vec<u64> = z.iter().map(|&x| x % d).collect();
        let mut pivots = Vec::new();
        for step in &self.steps {
            match step {
                Step::Top { b, inv, col_a, .. } => {
                    let xb = z[*b];
                    pivots.push(xb);
                    if xb != 0 {
                        let f = (xb as u128 * *inv as u128 % d as u128) as u64;
                        for &(y, g) in col_a {
                            let delta = (f as u128 * g as u128 % d as u128) as u64;
                            z[y] = (z[y] + d - delta) % d;
                        }
                    }
                    z[*b] = 0;
                }
                Step::Bottom { a, .. } => {
                    pivots.push(0);
                    z[*a] = 0;
                }
            }
        }
        (self.keep1.iter().map(|&i| z[i]).collect(), pivots)
    }

    /// Chain map from the reduced complex back to the original one.
    fn include(&self, reduced: &[u64]) -> Vec<u64> {
        let d = self.modulus as i128;
        let mut g = vec![0u64; self.n1];
        for (&i, &x) in self.keep1.iter().zip(reduced) {
            g[i] = x;
        }
        for step in self.steps.iter().rev() {
            if let Step::Bottom { a, inv, row_b } = step {
                let s: i128 = row_b.iter().map(|&(y, x)| g[y] as i128 * x as i128 % d).sum();
                g[*a] = residue(-(s % d) * *inv as i128, self.modulus);
            }
        }
        g
    }

    /// Coordinates of `K^-1 z` for a reduced cycle `z`.
    fn kernel_coords(&self, z: &[u64]) -> Vec<BigInt> {
        let zb: Vec<BigInt> = z.iter().map(|&x| BigInt::from(x)).collect();
        let y = self.v_inv.mul_vec(&zb);
        y.into_iter()
            .zip(&self.t)
            .map(|(x, t)| {
                debug_assert!(x.is_multiple_of(t), "not a cycle of the reduced complex");
                x / t
            })
            .collect()
    }

    /// Canonical coordinates of the class of a cycle (caller checks cycles).
    pub fn coordinates(&self, z: &[u64]) -> Vec<u64> {
        let (zr, _) = self.project(z);
        let c = self.kernel_coords(&zr);
        let y = self.rel_u.mul_vec(&c);
        self.factor_index.iter().zip(&self.factors).map(|(&i, &f)| mod_floor_u64(&y[i], f)).collect()
    }

    /// A `w` in `C2` with `d2 w = z`, when `z` is a boundary.
    pub fn witness(&self, z: &[u64]) -> Option<Vec<u64>> {
        let d = self.modulus;
        let (zr, pivots) = self.project(z);
        let c = self.kernel_coords(&zr);
        let y = self.rel_u.mul_vec(&c);
        let mut v = Vec::with_capacity(y.len());
        for (yi, si) in y.iter().zip(&self.rel_diag) {
            if !yi.is_multiple_of(si) {
                return None;
            }
            v.push(yi / si);
        }
        v.resize(self.rel_v.cols, BigInt::zero());
        let sol = self.rel_v.mul_vec(&v);
        let mut w = vec![0u64; self.n2];
        for (k, &x) in self.keep2.iter().enumerate() {
            w[x] = mod_floor_u64(&sol[k], d);
        }
        for (step, &f) in self.steps.iter().zip(&pivots).rev() {
            if let Step::Top { a, inv, row_b, .. } = step {
                let s: u128 = row_b.iter().map(|&(x, beta)| w[x] as u128 * beta as u128 % d as u128).sum();
                let rhs = (f as u128 + d as u128 - s % d as u128) % d as u128;
                w[*a] = (rhs * *inv as u128 % d as u128) as u64;
            }
        }
        Some(w)
    }
}
