//! Star and plaquette checks of the model on a finite complex, as parity-check
//! matrices over each cyclic factor.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use crate::complex::{CellOrigin, EndedComplex, FiniteComplex};
use crate::error::{Error, Result};
use crate::groups::{residue, AbelianCoefficients};
use crate::homology::FiniteHomology;
use crate::linalg::{smith, to_u64, IntMatrix};

/// Dense matrix over `Z_modulus`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckMatrix {
    pub modulus: u64,
    pub cols: usize,
    pub rows: Vec<Vec<u64>>,
}

impl CheckMatrix {
    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.iter().filter(|&&x| x != 0).count()).collect()
    }

    /// Order of the subgroup of `Z_d^cols` spanned by the rows.
    pub fn span_order(&self) -> u128 {
        if self.rows.is_empty() || self.cols == 0 {
            return 1;
        }
        let mut a = IntMatrix::zeros(self.rows.len(), self.cols);
        for (i, r) in self.rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                if x != 0 {
                    a.set(i, j, BigInt::from(x));
                }
            }
        }
        let d = BigInt::from(self.modulus);
        smith(&a)
            .diag
            .iter()
            .filter(|s| **s != BigInt::from(0))
            .map(|s| to_u64(&(&d / s.gcd(&d))) as u128)
            .product()
    }

    /// `rows cols modulus` header followed by one line per row.
    pub fn to_pcm(&self) -> String {
        let mut out = format!("{} {} {}\n", self.rows.len(), self.cols, self.modulus);
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilizerSet {
    pub n: usize,
    pub group: Vec<u64>,
    /// Column labels: the `n`-cells.
    pub qudits: Vec<String>,
    /// Row labels of the star checks: the `(n-1)`-cells.
    pub x_rows: Vec<String>,
    /// Row labels of the plaquette checks: the `(n+1)`-cells.
    pub z_rows: Vec<String>,
    pub x_checks: Vec<CheckMatrix>,
    pub z_checks: Vec<CheckMatrix>,
}

fn incidence_rows(c: &FiniteComplex, dim: usize, upward: bool, d: u64) -> Vec<Vec<u64>> {
    let n = if upward { dim + 1 } else { dim - 1 };
    (0..c.num_cells(dim))
        .map(|i| {
            let mut row = vec![0u64; c.num_cells(n)];
            let adj = if upward { c.cofaces(dim, i) } else { c.faces(dim, i) };
            for &(j, x) in adj {
                row[j] = (row[j] + residue(x as i128, d)) % d;
            }
            row
        })
        .collect()
}

pub fn stabilizers(c: &FiniteComplex, n: usize, g: &AbelianCoefficients) -> Result<StabilizerSet> {
    if n >= c.dim_count() {
        return Err(Error::Argument(format!("no {n}-cells in a complex of dimension {:?}", c.top_dim())));
    }
    let qudits = c.cells(n).to_vec();
    let x_rows = if n == 0 { Vec::new() } else { c.cells(n - 1).to_vec() };
    let z_rows = if n + 1 < c.dim_count() { c.cells(n + 1).to_vec() } else { Vec::new() };
    let mut x_checks = Vec::new();
    let mut z_checks = Vec::new();
    for &d in g.orders() {
        let x = if n == 0 { Vec::new() } else { incidence_rows(c, n - 1, true, d) };
        let z = if z_rows.is_empty() { Vec::new() } else { incidence_rows(c, n + 1, false, d) };
        x_checks.push(CheckMatrix { modulus: d, cols: qudits.len(), rows: x });
        z_checks.push(CheckMatrix { modulus: d, cols: qudits.len(), rows: z });
    }
    let s = StabilizerSet { n, group: g.orders().to_vec(), qudits, x_rows, z_rows, x_checks, z_checks };
    if !s.is_orthogonal() {
        return Err(Error::Certificate("star and plaquette checks are not orthogonal".into()));
    }
    Ok(s)
}

impl StabilizerSet {
    /// `x . z^T = 0` over every factor.
    pub fn is_orthogonal(&self) -> bool {
        self.x_checks.iter().zip(&self.z_checks).all(|(x, z)| {
            x.rows.iter().all(|a| {
                z.rows.iter().all(|b| a.iter().zip(b).fold(0u128, |s, (&p, &q)| (s + p as u128 * q as u128) % x.modulus as u128) == 0)
            })
        })
    }

    /// `|S|`, the order of the group generated by all checks.
    pub fn stabilizer_order(&self) -> u128 {
        self.x_checks.iter().chain(&self.z_checks).map(CheckMatrix::span_order).product()
    }

    /// `|G|^N / |S|`.
    pub fn code_dimension(&self) -> u128 {
        let n = self.qudits.len() as u32;
        let total: u128 = self.group.iter().map(|&d| (d as u128).pow(n)).product();
        total / self.stabilizer_order()
    }

    /// Maximum star and plaquette weights.
    pub fn max_weights(&self) -> (usize, usize) {
        let w = |ms: &[CheckMatrix]| ms.iter().flat_map(|m| m.row_weights()).max().unwrap_or(0);
        (w(&self.x_checks), w(&self.z_checks))
    }
}

/// Code dimension, checked against `|H_n|`.
pub fn code_dimension(c: &FiniteComplex, n: usize, g: &AbelianCoefficients) -> Result<u128> {
    let s = stabilizers(c, n, g)?;
    let dim = s.code_dimension();
    let h = FiniteHomology::absolute(c, n, g).order();
    if dim != h {
        return Err(Error::Certificate(format!("code dimension {dim} differs from |H_{n}| = {h}")));
    }
    Ok(dim)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DynamicsReport {
    pub well_defined: bool,
    pub max_star_weight: usize,
    pub max_plaquette_weight: usize,
}

/// Star and plaquette supports over the whole infinite complex. Cells past the
/// first two slabs repeat, so a truncation of depth three sees every pattern.
pub fn dynamics_well_defined(e: &EndedComplex, n: usize, g: &AbelianCoefficients) -> Result<DynamicsReport> {
    let t = e.truncation(3)?;
    let c = t.complex();
    let nonzero = |x: i64| g.orders().iter().any(|&d| residue(x as i128, d) != 0);
    let inner = |l: &str| CellOrigin::parse(l).depth() <= 2;
    let mut star = 0;
    let mut plaq = 0;
    if n >= 1 && n < c.dim_count() {
        for (i, l) in c.cells(n - 1).iter().enumerate() {
            if inner(l) {
                star = star.max(c.cofaces(n - 1, i).iter().filter(|&&(_, x)| nonzero(x)).count());
            }
        }
    }
    if n + 1 < c.dim_count() {
        for (i, l) in c.cells(n + 1).iter().enumerate() {
            if inner(l) {
                plaq = plaq.max(c.faces(n + 1, i).iter().filter(|&&(_, x)| nonzero(x)).count());
            }
        }
    }
    Ok(DynamicsReport { well_defined: true, max_star_weight: star, max_plaquette_weight: plaq })
}
