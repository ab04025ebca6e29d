//! Point charges on `F x plane`: the excitations `(f (x) Gamma, g (x) Delta)`
//! and their rotation classes `p`, `q`.

use std::collections::BTreeMap;

use crate::chains::{Chain, Cochain, FinVec, LfVec, Tail, Variance};
use crate::complex::catalog::{self, hedge, rectangle_cycle, square, vertex};
use crate::complex::{level_label, product_label, slab_label, tensor_label, EndedComplex, FiniteComplex};
use crate::error::{Error, Result};
use crate::excitations::Excitation;

/// Integer locally finite (co)chain on a plane with a single end.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntLf {
    pub dim: usize,
    pub depth: usize,
    pub finite: BTreeMap<String, i64>,
    pub level: BTreeMap<String, i64>,
    pub slab: BTreeMap<String, i64>,
}

fn boundary_cycle(s: usize) -> Vec<(String, i64)> {
    rectangle_cycle(0, 0, s, s).1
}

/// Closed 2-chain filling the whole plane.
pub fn plane_p(s: usize) -> IntLf {
    let mut p = IntLf { dim: 2, depth: 1, ..Default::default() };
    for x in 0..s {
        for y in 0..s {
            p.finite.insert(square(x, y), -1);
        }
    }
    for (e, z) in boundary_cycle(s) {
        p.finite.insert(slab_label(0, 1, &e), z);
        p.slab.insert(e, z);
    }
    p
}

/// The constant 0-cocycle `-1`.
pub fn plane_q(s: usize) -> IntLf {
    let mut q = IntLf { dim: 0, depth: 1, ..Default::default() };
    for x in 0..=s {
        for y in 0..=s {
            q.finite.insert(vertex(x, y), -1);
        }
    }
    let (cells, _) = rectangle_cycle(0, 0, s, s);
    for v in cells.iter().filter(|c| c.starts_with("d0:")) {
        q.finite.insert(level_label(0, 1, v), -1);
        q.level.insert(v.clone(), -1);
    }
    q
}

/// Ray from the corner vertex out to infinity, with boundary `-corner`.
pub fn plane_gamma() -> IntLf {
    let v = vertex(0, 0);
    let mut g = IntLf { dim: 1, depth: 1, ..Default::default() };
    g.finite.insert(slab_label(0, 1, &v), 1);
    g.slab.insert(v, 1);
    g
}

/// Dual ray through the bottom corner edge, with coboundary the corner square.
pub fn plane_delta() -> IntLf {
    let e = hedge(0, 0);
    let mut d = IntLf { dim: 1, depth: 1, ..Default::default() };
    d.finite.insert(e.clone(), 1);
    d.finite.insert(level_label(0, 1, &e), 1);
    d.level.insert(e, 1);
    d
}

fn tensor<K: Variance>(e: &EndedComplex, f: &FinVec<K>, x: &IntLf, sign: i64) -> Result<LfVec<K>> {
    let g = f.group();
    let dim = f.dim() + x.dim;
    let mut finite = FinVec::<K>::zero(g, dim);
    let mut level = FinVec::<K>::zero(g, dim);
    let mut slab = FinVec::<K>::zero(g, dim.saturating_sub(1));
    for (a, c) in f.coeffs() {
        for (l, n) in &x.finite {
            finite.add_term(&tensor_label(a, l), sign * n, c);
        }
        for (l, n) in &x.level {
            level.add_term(&product_label(a, l), sign * n, c);
        }
        for (l, n) in &x.slab {
            slab.add_term(&product_label(a, l), sign * n, c);
        }
    }
    LfVec::new(e, x.depth, finite, vec![Tail { level, slab }])
}

/// `F x plane(s)` with its charges.
#[derive(Clone, Debug)]
pub struct PlanarModel {
    factor: FiniteComplex,
    size: usize,
    complex: EndedComplex,
}

impl PlanarModel {
    pub fn new(factor: &FiniteComplex, size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Argument("plane size must be positive".into()));
        }
        let complex = EndedComplex::product_left(factor, &catalog::plane(size))?;
        Ok(PlanarModel { factor: factor.clone(), size, complex })
    }

    pub fn complex(&self) -> &EndedComplex {
        &self.complex
    }

    pub fn factor(&self) -> &FiniteComplex {
        &self.factor
    }

    fn check_closed<K: Variance>(&self, v: &FinVec<K>) -> Result<()> {
        v.check_cells(&self.factor)?;
        let closed = if K::COCHAIN || v.dim() > 0 { v.differential(&self.factor)?.is_zero() } else { true };
        if !closed {
            return Err(Error::Argument("charge label must be closed on the factor".into()));
        }
        Ok(())
    }

    fn sign(&self, dim: usize) -> i64 {
        if dim % 2 == 0 { 1 } else { -1 }
    }

    /// Charge with electric label `f` (an `(n-1)`-cycle) and magnetic label
    /// `g` (an `(n-1)`-cocycle) at the corner of the plane.
    pub fn charge(&self, f: &Chain, g: &Cochain) -> Result<Excitation> {
        self.check_closed(f)?;
        self.check_closed(g)?;
        let e = &self.complex;
        Excitation::new(tensor(e, f, &plane_gamma(), 1)?, tensor(e, g, &plane_delta(), 1)?)
    }

    /// Rotation class `(-1)^(n-1) f (x) P` in dimension `n+1`.
    pub fn rotation_chain(&self, f: &Chain) -> Result<LfVec<crate::chains::Ho>> {
        self.check_closed(f)?;
        tensor(&self.complex, f, &plane_p(self.size), self.sign(f.dim()))
    }

    /// Rotation class `(-1)^(n-1) g (x) Q` in dimension `n-1`.
    pub fn rotation_cochain(&self, g: &Cochain) -> Result<LfVec<crate::chains::Co>> {
        self.check_closed(g)?;
        tensor(&self.complex, g, &plane_q(self.size), self.sign(g.dim()))
    }
}
