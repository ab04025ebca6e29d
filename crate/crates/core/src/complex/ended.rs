use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use super::{product_label, ComplexBuilder, FiniteComplex, ValidationReport, Violation};
use crate::error::{Error, Result};

/// A product end `Sigma x [0, inf)` glued to the core along `attachment`,
/// which maps each cross-section cell to a core cell of the same dimension.
#[derive(Clone, Debug)]
pub struct End {
    pub cross_section: FiniteComplex,
    pub attachment: BTreeMap<String, String>,
}

impl End {
    /// An end whose cross-section is the subcomplex of `core` on `labels`,
    /// attached by the identity.
    pub fn from_core_subcomplex<'a>(core: &FiniteComplex, labels: impl IntoIterator<Item = &'a str>) -> Result<End> {
        let cross_section = core.subcomplex(labels)?;
        let attachment = (0..cross_section.dim_count())
            .flat_map(|d| cross_section.cells(d).iter().map(|l| (l.clone(), l.clone())))
            .collect();
        Ok(End { cross_section, attachment })
    }
}

/// `end{e}:lvl{j}:{cell}` is the copy of a cross-section cell at level `j`.
pub fn level_label(end: usize, level: usize, cell: &str) -> String {
    format!("end{end}:lvl{level}:{cell}")
}

/// `end{e}:slab{j}:{cell}` is `cell x [j-1, j]`.
pub fn slab_label(end: usize, level: usize, cell: &str) -> String {
    format!("end{end}:slab{level}:{cell}")
}

/// Where a truncation cell comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellOrigin<'a> {
    Core(&'a str),
    Level { end: usize, level: usize, cell: &'a str },
    Slab { end: usize, level: usize, cell: &'a str },
}

impl<'a> CellOrigin<'a> {
    pub fn parse(label: &'a str) -> CellOrigin<'a> {
        Self::try_parse(label).unwrap_or(CellOrigin::Core(label))
    }

    fn try_parse(label: &'a str) -> Option<CellOrigin<'a>> {
        let rest = label.strip_prefix("end")?;
        let (end, rest) = rest.split_once(':')?;
        let end: usize = digits(end)?;
        let (kind, rest) = rest.split_once(':')?;
        if let Some(j) = kind.strip_prefix("lvl") {
            Some(CellOrigin::Level { end, level: digits(j)?, cell: rest })
        } else if let Some(j) = kind.strip_prefix("slab") {
            Some(CellOrigin::Slab { end, level: digits(j)?, cell: rest })
        } else {
            None
        }
    }

    /// Deepest level this cell touches (0 for core cells).
    pub fn depth(&self) -> usize {
        match *self {
            CellOrigin::Core(_) => 0,
            CellOrigin::Level { level, .. } | CellOrigin::Slab { level, .. } => level,
        }
    }
}

fn digits(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// The finite complex made of the core plus `depth` levels and slabs of every
/// end. The collar is the set of level-`depth` cells.
#[derive(Debug)]
pub struct Truncation {
    depth: usize,
    complex: FiniteComplex,
    collar: BTreeSet<String>,
}

impl Truncation {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn complex(&self) -> &FiniteComplex {
        &self.complex
    }

    pub fn collar(&self) -> &BTreeSet<String> {
        &self.collar
    }

    pub fn is_collar(&self, label: &str) -> bool {
        self.collar.contains(label)
    }
}

struct EndedData {
    core: FiniteComplex,
    ends: Vec<End>,
    truncations: Mutex<BTreeMap<usize, Arc<Truncation>>>,
    union: OnceLock<FiniteComplex>,
}

/// A compact core with finitely many product ends. Cloning is cheap.
#[derive(Clone)]
pub struct EndedComplex(Arc<EndedData>);

impl fmt::Debug for EndedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EndedComplex").field("core", &self.0.core).field("ends", &self.0.ends.len()).finish()
    }
}

impl EndedComplex {
    /// Checks that attachments are total, injective and dimension preserving.
    /// Incidence compatibility is reported by [`EndedComplex::validate`].
    pub fn new(core: FiniteComplex, ends: Vec<End>) -> Result<Self> {
        for dim in 0..core.dim_count() {
            for l in core.cells(dim) {
                if !matches!(CellOrigin::parse(l), CellOrigin::Core(_)) {
                    return Err(Error::InvalidComplex(format!("core label `{l}` collides with end labels")));
                }
            }
        }
        for (e, end) in ends.iter().enumerate() {
            let sigma = &end.cross_section;
            let mut seen = HashSet::new();
            for dim in 0..sigma.dim_count() {
                for s in sigma.cells(dim) {
                    let target = end.attachment.get(s).ok_or_else(|| {
                        Error::InvalidComplex(format!("end {e}: cross-section cell `{s}` is not attached"))
                    })?;
                    let t = core.lookup(target).ok_or_else(|| Error::UnknownCell(target.clone()))?;
                    if t.dim != dim {
                        return Err(Error::InvalidComplex(format!(
                            "end {e}: `{s}` (dim {dim}) attached to `{target}` (dim {})",
                            t.dim
                        )));
                    }
                    if !seen.insert(target.clone()) {
                        return Err(Error::InvalidComplex(format!("end {e}: attachment is not injective at `{target}`")));
                    }
                }
            }
            if end.attachment.len() != sigma.total_cells() {
                return Err(Error::InvalidComplex(format!("end {e}: attachment names unknown cross-section cells")));
            }
        }
        Ok(EndedComplex(Arc::new(EndedData {
            core,
            ends,
            truncations: Mutex::new(BTreeMap::new()),
            union: OnceLock::new(),
        })))
    }

    /// A finite complex viewed as an ended complex without ends.
    pub fn from_finite(core: FiniteComplex) -> Self {
        Self::new(core, Vec::new()).expect("a complex without ends is always well formed")
    }

    pub fn core(&self) -> &FiniteComplex {
        &self.0.core
    }

    pub fn ends(&self) -> &[End] {
        &self.0.ends
    }

    pub fn num_ends(&self) -> usize {
        self.0.ends.len()
    }

    pub fn cross_section(&self, end: usize) -> &FiniteComplex {
        &self.0.ends[end].cross_section
    }

    /// Label of `cell x {level}`; level 0 is the attached core cell.
    pub fn level_cell(&self, end: usize, level: usize, cell: &str) -> String {
        if level == 0 {
            self.0.ends[end].attachment[cell].clone()
        } else {
            level_label(end, level, cell)
        }
    }

    pub fn top_dim(&self) -> Option<usize> {
        let mut top = self.core().top_dim();
        for end in self.ends() {
            if let Some(d) = end.cross_section.top_dim() {
                top = Some(top.map_or(d + 1, |t| t.max(d + 1)));
            }
        }
        top
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = self.core().validate().violations;
        let mut owner: BTreeMap<&str, usize> = BTreeMap::new();
        for (e, end) in self.ends().iter().enumerate() {
            let sigma = &end.cross_section;
            violations.extend(sigma.validate().violations);
            for dim in 0..sigma.dim_count() {
                for (i, s) in sigma.cells(dim).iter().enumerate() {
                    let target = end.attachment[s].as_str();
                    if let Some(prev) = owner.insert(target, e) {
                        violations.push(Violation {
                            kind: "attachments_overlap".into(),
                            cells: vec![target.to_string(), format!("end{prev}"), format!("end{e}")],
                            value: 0,
                        });
                    }
                    if dim == 0 {
                        continue;
                    }
                    let mut expected: BTreeMap<String, i64> = BTreeMap::new();
                    for &(f, d) in sigma.faces(dim, i) {
                        expected.insert(end.attachment[&sigma.cells(dim - 1)[f]].clone(), d);
                    }
                    let t = self.core().lookup(target).expect("checked in new");
                    let mut actual: BTreeMap<String, i64> = BTreeMap::new();
                    for &(f, d) in self.core().faces(t.dim, t.index) {
                        actual.insert(self.core().cells(dim - 1)[f].clone(), d);
                    }
                    if expected != actual {
                        let keys: BTreeSet<&String> = expected.keys().chain(actual.keys()).collect();
                        for k in keys {
                            let (x, y) = (expected.get(k).copied().unwrap_or(0), actual.get(k).copied().unwrap_or(0));
                            if x != y {
                                violations.push(Violation {
                                    kind: "attachment_incidence".into(),
                                    cells: vec![target.to_string(), k.clone()],
                                    value: y - x,
                                });
                            }
                        }
                    }
                }
            }
        }
        ValidationReport::from_violations(violations)
    }

    /// Truncation at depth `m >= 1`, cached.
    pub fn truncation(&self, m: usize) -> Result<Arc<Truncation>> {
        if m < 1 {
            return Err(Error::Argument("truncation depth must be at least 1".into()));
        }
        let mut cache = self.0.truncations.lock().expect("truncation cache poisoned");
        if let Some(t) = cache.get(&m) {
            return Ok(t.clone());
        }
        let t = Arc::new(self.build_truncation(m)?);
        cache.insert(m, t.clone());
        Ok(t)
    }

    fn build_truncation(&self, m: usize) -> Result<Truncation> {
        let mut b = ComplexBuilder::new();
        self.core().extend_builder(&mut b, str::to_string);
        let mut collar = BTreeSet::new();
        for (e, end) in self.ends().iter().enumerate() {
            let sigma = &end.cross_section;
            for j in 1..=m {
                for dim in 0..sigma.dim_count() {
                    let sign = if dim % 2 == 0 { 1 } else { -1 };
                    for (i, s) in sigma.cells(dim).iter().enumerate() {
                        let lvl = level_label(e, j, s);
                        let slab = slab_label(e, j, s);
                        b.cell(lvl.clone(), dim)?;
                        b.cell(slab.clone(), dim + 1)?;
                        if j == m {
                            collar.insert(lvl.clone());
                        }
                        if dim > 0 {
                            for &(f, d) in sigma.faces(dim, i) {
                                let face = &sigma.cells(dim - 1)[f];
                                b.incidence(lvl.clone(), level_label(e, j, face), d);
                                b.incidence(slab.clone(), slab_label(e, j, face), d);
                            }
                        }
                        b.incidence(slab.clone(), lvl, sign);
                        b.incidence(slab, self.level_cell(e, j - 1, s), -sign);
                    }
                }
            }
        }
        Ok(Truncation { depth: m, complex: b.build()?, collar })
    }

    /// Disjoint union of all cross-sections, labelled `end{e}:{cell}`.
    pub fn cross_section_union(&self) -> &FiniteComplex {
        self.0.union.get_or_init(|| {
            let mut b = ComplexBuilder::new();
            for (e, end) in self.ends().iter().enumerate() {
                end.cross_section.extend_builder(&mut b, |l| union_label(e, l));
            }
            b.build().expect("disjoint union of valid complexes")
        })
    }

    /// `F x E`: core `F x core`, cross-sections `F x Sigma`, attachment `id x phi`.
    pub fn product_left(f: &FiniteComplex, e: &EndedComplex) -> Result<EndedComplex> {
        let core = f.product(e.core());
        let mut ends = Vec::new();
        for end in e.ends() {
            let cross_section = f.product(&end.cross_section);
            let mut attachment = BTreeMap::new();
            for dim in 0..f.dim_count() {
                for a in f.cells(dim) {
                    for (s, t) in &end.attachment {
                        attachment.insert(product_label(a, s), product_label(a, t));
                    }
                }
            }
            ends.push(End { cross_section, attachment });
        }
        EndedComplex::new(core, ends)
    }
}

pub fn union_label(end: usize, cell: &str) -> String {
    format!("end{end}:{cell}")
}

/// Splits a union label back into `(end, cell)`.
pub fn split_union_label(label: &str) -> Option<(usize, &str)> {
    let rest = label.strip_prefix("end")?;
    let (e, cell) = rest.split_once(':')?;
    Some((digits(e)?, cell))
}

/// Label in `F x E` of the product of an `F` cell with a cell of `E`'s
/// truncation.
pub fn tensor_label(f: &str, cell: &str) -> String {
    match CellOrigin::parse(cell) {
        CellOrigin::Core(c) => product_label(f, c),
        CellOrigin::Level { end, level, cell } => level_label(end, level, &product_label(f, cell)),
        CellOrigin::Slab { end, level, cell } => slab_label(end, level, &product_label(f, cell)),
    }
}
