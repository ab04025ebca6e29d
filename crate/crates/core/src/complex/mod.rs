//! Finite CW complexes given by cell lists and integer incidence degrees, and
//! infinite complexes built from a compact core with product ends.

pub mod catalog;
mod ended;
mod io;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub use catalog::{build_named, Built, CatalogSpec};
pub use ended::{
    level_label, slab_label, split_union_label, tensor_label, union_label, CellOrigin, End, EndedComplex, Truncation,
};
pub use io::{ComplexFile, EndFile};

/// Identifies a cell by dimension and position in the sorted cell list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellRef {
    pub dim: usize,
    pub index: usize,
}

#[derive(Debug)]
struct ComplexData {
    cells: Vec<Vec<String>>,
    index: HashMap<String, CellRef>,
    faces: Vec<Vec<Vec<(usize, i64)>>>,
    cofaces: Vec<Vec<Vec<(usize, i64)>>>,
}

/// A finite CW complex. Cells of each dimension are sorted lexicographically by
/// label; that order is used for every tie-break downstream. Cloning is cheap.
#[derive(Clone)]
pub struct FiniteComplex(Arc<ComplexData>);

impl fmt::Debug for FiniteComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let counts: Vec<usize> = self.0.cells.iter().map(Vec::len).collect();
        write!(f, "FiniteComplex{counts:?}")
    }
}

impl PartialEq for FiniteComplex {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.cells == other.0.cells && self.0.faces == other.0.faces)
    }
}

/// Collects cells and incidence degrees; repeated incidences are summed.
#[derive(Clone, Debug, Default)]
pub struct ComplexBuilder {
    cells: BTreeMap<String, usize>,
    incidence: BTreeMap<(String, String), i64>,
}

impl ComplexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cell(&mut self, label: impl Into<String>, dim: usize) -> Result<&mut Self> {
        let label = label.into();
        if let Some(&d) = self.cells.get(&label) {
            if d != dim {
                return Err(Error::InvalidComplex(format!(
                    "cell `{label}` declared with dimensions {d} and {dim}"
                )));
            }
        }
        self.cells.insert(label, dim);
        Ok(self)
    }

    /// Adds `degree` to the incidence of face `beta` in cell `alpha`.
    pub fn incidence(&mut self, alpha: impl Into<String>, beta: impl Into<String>, degree: i64) -> &mut Self {
        *self.incidence.entry((alpha.into(), beta.into())).or_insert(0) += degree;
        self
    }

    pub fn build(&self) -> Result<FiniteComplex> {
        let top = self.cells.values().copied().max();
        let ndims = top.map_or(0, |t| t + 1);
        let mut cells: Vec<Vec<String>> = vec![Vec::new(); ndims];
        for (label, &dim) in &self.cells {
            cells[dim].push(label.clone());
        }
        let mut index = HashMap::new();
        for (dim, list) in cells.iter().enumerate() {
            for (i, label) in list.iter().enumerate() {
                index.insert(label.clone(), CellRef { dim, index: i });
            }
        }
        let mut faces: Vec<Vec<Vec<(usize, i64)>>> = cells.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        let mut cofaces = faces.clone();
        for ((alpha, beta), &deg) in &self.incidence {
            if deg == 0 {
                continue;
            }
            let a = *index.get(alpha).ok_or_else(|| Error::UnknownCell(alpha.clone()))?;
            let b = *index.get(beta).ok_or_else(|| Error::UnknownCell(beta.clone()))?;
            if a.dim != b.dim + 1 {
                return Err(Error::InvalidComplex(format!(
                    "incidence `{alpha}` (dim {}) -> `{beta}` (dim {}) skips a dimension",
                    a.dim, b.dim
                )));
            }
            faces[a.dim][a.index].push((b.index, deg));
            cofaces[b.dim][b.index].push((a.index, deg));
        }
        Ok(FiniteComplex(Arc::new(ComplexData { cells, index, faces, cofaces })))
    }
}

/// One failed check found by [`FiniteComplex::validate`] or
/// [`EndedComplex::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: String,
    pub cells: Vec<String>,
    pub value: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub(crate) fn from_violations(violations: Vec<Violation>) -> Self {
        ValidationReport { valid: violations.is_empty(), violations }
    }

    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidComplex(format!(
                "{} violation(s), first: {} at {:?} (value {})",
                self.violations.len(),
                v.kind,
                v.cells,
                v.value
            ))),
        }
    }
}

impl FiniteComplex {
    pub fn builder() -> ComplexBuilder {
        ComplexBuilder::new()
    }

    /// Number of dimension slots, i.e. top dimension + 1 (0 when empty).
    pub fn dim_count(&self) -> usize {
        self.0.cells.len()
    }

    /// Top cell dimension, if the complex is non-empty.
    pub fn top_dim(&self) -> Option<usize> {
        self.dim_count().checked_sub(1)
    }

    pub fn cells(&self, dim: usize) -> &[String] {
        self.0.cells.get(dim).map_or(&[], Vec::as_slice)
    }

    pub fn num_cells(&self, dim: usize) -> usize {
        self.cells(dim).len()
    }

    pub fn total_cells(&self) -> usize {
        self.0.cells.iter().map(Vec::len).sum()
    }

    pub fn lookup(&self, label: &str) -> Option<CellRef> {
        self.0.index.get(label).copied()
    }

    pub fn label(&self, cell: CellRef) -> &str {
        &self.0.cells[cell.dim][cell.index]
    }

    /// Faces of a cell as `(index in dim-1, degree)`.
    pub fn faces(&self, dim: usize, index: usize) -> &[(usize, i64)] {
        &self.0.faces[dim][index]
    }

    /// Cofaces of a cell as `(index in dim+1, degree)`.
    pub fn cofaces(&self, dim: usize, index: usize) -> &[(usize, i64)] {
        match self.0.cofaces.get(dim) {
            Some(c) => &c[index],
            None => &[],
        }
    }

    pub fn incidence(&self, alpha: &str, beta: &str) -> i64 {
        match (self.lookup(alpha), self.lookup(beta)) {
            (Some(a), Some(b)) if a.dim == b.dim + 1 => self
                .faces(a.dim, a.index)
                .iter()
                .find(|(f, _)| *f == b.index)
                .map_or(0, |&(_, d)| d),
            _ => 0,
        }
    }

    /// Every `(alpha, beta, degree)` triple in a fixed order.
    pub fn incidences(&self) -> Vec<(String, String, i64)> {
        let mut out = Vec::new();
        for dim in 1..self.dim_count() {
            for (i, label) in self.cells(dim).iter().enumerate() {
                let mut fs = self.faces(dim, i).to_vec();
                fs.sort();
                for (f, d) in fs {
                    out.push((label.clone(), self.cells(dim - 1)[f].clone(), d));
                }
            }
        }
        out
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..self.dim_count()).map(|d| if d % 2 == 0 { 1 } else { -1 } * self.num_cells(d) as i64).sum()
    }

    /// Checks that the boundary squares to zero over Z and lists every
    /// offending `(alpha, gamma)` pair.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for dim in 2..self.dim_count() {
            for a in 0..self.num_cells(dim) {
                let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
                for &(b, d1) in self.faces(dim, a) {
                    for &(c, d2) in self.faces(dim - 1, b) {
                        *acc.entry(c).or_insert(0) += d1 * d2;
                    }
                }
                for (c, v) in acc {
                    if v != 0 {
                        violations.push(Violation {
                            kind: "boundary_squared".into(),
                            cells: vec![self.cells(dim)[a].clone(), self.cells(dim - 2)[c].clone()],
                            value: v,
                        });
                    }
                }
            }
        }
        ValidationReport::from_violations(violations)
    }

    /// Cellular product with labels `"a*b"` and boundary
    /// `d(s x t) = ds x t + (-1)^|s| s x dt`.
    pub fn product(&self, other: &FiniteComplex) -> FiniteComplex {
        let mut b = ComplexBuilder::new();
        for p in 0..self.dim_count() {
            for q in 0..other.dim_count() {
                let sign = if p % 2 == 0 { 1 } else { -1 };
                for (i, s) in self.cells(p).iter().enumerate() {
                    for (j, t) in other.cells(q).iter().enumerate() {
                        let label = product_label(s, t);
                        b.cell(label.clone(), p + q).expect("product labels are unique");
                        if p > 0 {
                            for &(f, d) in self.faces(p, i) {
                                b.incidence(label.clone(), product_label(&self.cells(p - 1)[f], t), d);
                            }
                        }
                        if q > 0 {
                            for &(f, d) in other.faces(q, j) {
                                b.incidence(label.clone(), product_label(s, &other.cells(q - 1)[f]), sign * d);
                            }
                        }
                    }
                }
            }
        }
        b.build().expect("product of valid complexes is well formed")
    }

    /// Subcomplex on the given labels (which must be closed under faces).
    pub fn subcomplex<'a>(&self, labels: impl IntoIterator<Item = &'a str>) -> Result<FiniteComplex> {
        let mut b = ComplexBuilder::new();
        let mut keep = Vec::new();
        for l in labels {
            let c = self.lookup(l).ok_or_else(|| Error::UnknownCell(l.to_string()))?;
            b.cell(l, c.dim)?;
            keep.push(c);
        }
        for c in &keep {
            if c.dim == 0 {
                continue;
            }
            for &(f, d) in self.faces(c.dim, c.index) {
                let face = &self.cells(c.dim - 1)[f];
                if !b.cells.contains_key(face) {
                    return Err(Error::InvalidComplex(format!(
                        "subcomplex is not closed: `{}` has face `{face}`",
                        self.label(*c)
                    )));
                }
                b.incidence(self.label(*c), face.clone(), d);
            }
        }
        b.build()
    }

    /// Copy with every label passed through `f` (which must be injective).
    pub fn relabel(&self, f: impl Fn(&str) -> String) -> FiniteComplex {
        let mut b = ComplexBuilder::new();
        for dim in 0..self.dim_count() {
            for l in self.cells(dim) {
                b.cell(f(l), dim).expect("relabel keeps dimensions");
            }
        }
        for (a, c, d) in self.incidences() {
            b.incidence(f(&a), f(&c), d);
        }
        b.build().expect("relabeling preserves structure")
    }

    pub(crate) fn extend_builder(&self, b: &mut ComplexBuilder, f: impl Fn(&str) -> String) {
        for dim in 0..self.dim_count() {
            for l in self.cells(dim) {
                b.cell(f(l), dim).expect("disjoint labels");
            }
        }
        for (a, c, d) in self.incidences() {
            b.incidence(f(&a), f(&c), d);
        }
    }
}

pub fn product_label(a: &str, b: &str) -> String {
    format!("{a}*{b}")
}
