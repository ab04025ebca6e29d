//! Named complexes.
//!
//! Labelling scheme:
//! - grids (disk, torus, plane, sigma_k): vertices `d0:x{i}.y{j}`, edges
//!   `d1:x{i}.y{j}.h` (towards `x+1`) and `d1:x{i}.y{j}.v` (towards `y+1`),
//!   squares `d2:x{i}.y{j}` oriented counterclockwise;
//! - paths and cycles: `d0:v{i}` and `d1:e{i}` with `e{i}: v{i} -> v{i+1}`;
//! - genus g: one corner vertex `d0:w`, a centre `d0:c`, word edges
//!   `d1:a{i}`, `d1:b{i}`, spokes `d1:s{k}` and triangles `d2:t{k}`;
//! - sphere: the boundary of the cube `I^3`, labels `x*y*z` over `0`, `1`, `i`;
//! - ising_star: centre `d0:c`, arms `d1:e{i}: c -> a{i}`, finite components
//!   `d0:f{j}.0`, `d0:f{j}.1`, `d1:f{j}.e`;
//! - products use `a*b`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ComplexBuilder, End, EndedComplex, FiniteComplex};
use crate::error::{Error, Result};

/// Names and size parameters of a catalog entry. Unset sizes use defaults.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogSpec {
    pub name: String,
    #[serde(default)]
    pub size: Option<usize>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub g: Option<usize>,
    #[serde(default)]
    pub ends: Option<usize>,
    #[serde(default)]
    pub finite_components: Option<usize>,
    #[serde(default)]
    pub length: Option<usize>,
    /// Factor `F` for `product_with_plane`.
    #[serde(default)]
    pub factor: Option<Box<CatalogSpec>>,
}

impl CatalogSpec {
    pub fn named(name: &str) -> Self {
        CatalogSpec { name: name.to_string(), ..Default::default() }
    }

    pub fn with_size(mut self, size: usize) -> Self {
        self.size = Some(size);
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_g(mut self, g: usize) -> Self {
        self.g = Some(g);
        self
    }

    pub fn with_factor(mut self, f: CatalogSpec) -> Self {
        self.factor = Some(Box::new(f));
        self
    }
}

pub const FINITE_NAMES: &[&str] = &["point", "interval", "path", "cycle", "disk", "torus", "sphere", "genus"];
pub const ENDED_NAMES: &[&str] = &["line", "ray", "plane", "sigma_k", "ising_star", "product_with_plane"];

#[derive(Clone, Debug)]
pub enum Built {
    Finite(FiniteComplex),
    Ended(EndedComplex),
}

impl Built {
    /// Finite complexes become ended complexes without ends.
    pub fn into_ended(self) -> EndedComplex {
        match self {
            Built::Finite(c) => EndedComplex::from_finite(c),
            Built::Ended(e) => e,
        }
    }

    pub fn as_finite(&self) -> Option<&FiniteComplex> {
        match self {
            Built::Finite(c) => Some(c),
            Built::Ended(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Built::Finite(_))
    }
}

pub fn build_named(spec: &CatalogSpec) -> Result<Built> {
    let size = |default: usize| spec.size.unwrap_or(default);
    let built = match spec.name.as_str() {
        "point" => Built::Finite(point()),
        "interval" => Built::Finite(path(1)),
        "path" => Built::Finite(path(spec.length.or(spec.size).unwrap_or(2))),
        "cycle" => Built::Finite(cycle(at_least(size(4), 2, "cycle size")?)),
        "disk" => Built::Finite(disk(at_least(size(3), 1, "disk size")?)),
        "torus" => Built::Finite(torus(at_least(size(4), 2, "torus size")?)),
        "sphere" => Built::Finite(sphere()),
        "genus" => Built::Finite(genus(at_least(spec.g.unwrap_or(1), 1, "genus")?)),
        "line" => Built::Ended(line()),
        "ray" => Built::Ended(ray()),
        "plane" => Built::Ended(plane(at_least(size(2), 1, "plane size")?)),
        "sigma_k" => Built::Ended(sigma_k(at_least(spec.k.unwrap_or(3), 1, "k")?)),
        "ising_star" => Built::Ended(ising_star(spec.ends.unwrap_or(4), spec.finite_components.unwrap_or(1))),
        "product_with_plane" => {
            let f = spec.factor.as_deref().cloned().unwrap_or_else(|| CatalogSpec::named("cycle"));
            let f = match build_named(&f)? {
                Built::Finite(c) => c,
                Built::Ended(_) => {
                    return Err(Error::Argument(format!("product factor `{}` must be finite", f.name)))
                }
            };
            Built::Ended(EndedComplex::product_left(&f, &plane(at_least(size(2), 1, "plane size")?))?)
        }
        other => {
            return Err(Error::Argument(format!(
                "unknown catalog entry `{other}` (known: {}, {})",
                FINITE_NAMES.join(", "),
                ENDED_NAMES.join(", ")
            )))
        }
    };
    Ok(built)
}

fn at_least(v: usize, min: usize, what: &str) -> Result<usize> {
    if v < min {
        return Err(Error::Argument(format!("{what} must be at least {min}, got {v}")));
    }
    Ok(v)
}

pub fn vertex(x: usize, y: usize) -> String {
    format!("d0:x{x}.y{y}")
}

pub fn hedge(x: usize, y: usize) -> String {
    format!("d1:x{x}.y{y}.h")
}

pub fn vedge(x: usize, y: usize) -> String {
    format!("d1:x{x}.y{y}.v")
}

pub fn square(x: usize, y: usize) -> String {
    format!("d2:x{x}.y{y}")
}

/// Counterclockwise boundary of the square at `(x, y)`.
pub fn square_boundary(x: usize, y: usize, wrap: Option<usize>) -> [(String, i64); 4] {
    let n = |v: usize| wrap.map_or(v + 1, |s| (v + 1) % s);
    [(hedge(x, y), 1), (vedge(n(x), y), 1), (hedge(x, n(y)), -1), (vedge(x, y), -1)]
}

pub fn point() -> FiniteComplex {
    let mut b = ComplexBuilder::new();
    b.cell("d0:p", 0).expect("fresh");
    b.build().expect("point")
}

pub fn path(length: usize) -> FiniteComplex {
    let mut b = ComplexBuilder::new();
    b.cell("d0:v0", 0).expect("fresh");
    for i in 0..length {
        b.cell(format!("d0:v{}", i + 1), 0).expect("fresh");
        b.cell(format!("d1:e{i}"), 1).expect("fresh");
        b.incidence(format!("d1:e{i}"), format!("d0:v{}", i + 1), 1);
        b.incidence(format!("d1:e{i}"), format!("d0:v{i}"), -1);
    }
    b.build().expect("path")
}

pub fn cycle(m: usize) -> FiniteComplex {
    let mut b = ComplexBuilder::new();
    for i in 0..m {
        b.cell(format!("d0:v{i}"), 0).expect("fresh");
        b.cell(format!("d1:e{i}"), 1).expect("fresh");
        b.incidence(format!("d1:e{i}"), format!("d0:v{}", (i + 1) % m), 1);
        b.incidence(format!("d1:e{i}"), format!("d0:v{i}"), -1);
    }
    b.build().expect("cycle")
}

fn grid_builder(w: usize, h: usize, wrap: Option<usize>, holes: &[(usize, usize)]) -> ComplexBuilder {
    let mut b = ComplexBuilder::new();
    let (vw, vh) = if wrap.is_some() { (w, h) } else { (w + 1, h + 1) };
    let n = |v: usize| wrap.map_or(v + 1, |s| (v + 1) % s);
    for x in 0..vw {
        for y in 0..vh {
            b.cell(vertex(x, y), 0).expect("fresh");
            if wrap.is_some() || x < w {
                b.cell(hedge(x, y), 1).expect("fresh");
                b.incidence(hedge(x, y), vertex(n(x), y), 1);
                b.incidence(hedge(x, y), vertex(x, y), -1);
            }
            if wrap.is_some() || y < h {
                b.cell(vedge(x, y), 1).expect("fresh");
                b.incidence(vedge(x, y), vertex(x, n(y)), 1);
                b.incidence(vedge(x, y), vertex(x, y), -1);
            }
        }
    }
    for x in 0..w {
        for y in 0..h {
            if holes.contains(&(x, y)) {
                continue;
            }
            b.cell(square(x, y), 2).expect("fresh");
            for (e, d) in square_boundary(x, y, wrap) {
                b.incidence(square(x, y), e, d);
            }
        }
    }
    b
}

pub fn disk(s: usize) -> FiniteComplex {
    grid_builder(s, s, None, &[]).build().expect("disk")
}

pub fn torus(s: usize) -> FiniteComplex {
    grid_builder(s, s, Some(s), &[]).build().expect("torus")
}

pub fn sphere() -> FiniteComplex {
    let mut b = ComplexBuilder::new();
    b.cell("0", 0).expect("fresh").cell("1", 0).expect("fresh").cell("i", 1).expect("fresh");
    b.incidence("i", "1", 1).incidence("i", "0", -1);
    let i = b.build().expect("interval");
    let cube = i.product(&i).product(&i);
    let labels: Vec<&str> = (0..3).flat_map(|d| cube.cells(d).iter().map(String::as_str)).collect();
    cube.subcomplex(labels).expect("2-skeleton is closed")
}

/// `4g`-gon with word `a1 b1 a1^-1 b1^-1 ...`, coned off at a centre vertex.
pub fn genus(g: usize) -> FiniteComplex {
    let mut b = ComplexBuilder::new();
    b.cell("d0:c", 0).expect("fresh").cell("d0:w", 0).expect("fresh");
    let mut word = Vec::new();
    for i in 0..g {
        let (a, bb) = (format!("d1:a{i}"), format!("d1:b{i}"));
        b.cell(a.clone(), 1).expect("fresh").cell(bb.clone(), 1).expect("fresh");
        word.extend([(a.clone(), 1), (bb.clone(), 1), (a, -1), (bb, -1)]);
    }
    let n = word.len();
    for k in 0..n {
        b.cell(format!("d1:s{k}"), 1).expect("fresh");
        b.incidence(format!("d1:s{k}"), "d0:w", 1).incidence(format!("d1:s{k}"), "d0:c", -1);
    }
    for (k, (w, eps)) in word.into_iter().enumerate() {
        let t = format!("d2:t{k}");
        b.cell(t.clone(), 2).expect("fresh");
        b.incidence(t.clone(), w, eps);
        b.incidence(t.clone(), format!("d1:s{k}"), 1);
        b.incidence(t, format!("d1:s{}", (k + 1) % n), -1);
    }
    b.build().expect("genus")
}

fn point_end(at: &str) -> End {
    let mut b = ComplexBuilder::new();
    b.cell("p", 0).expect("fresh");
    End { cross_section: b.build().expect("point"), attachment: BTreeMap::from([("p".into(), at.to_string())]) }
}

/// The real line: a single edge with a ray at each endpoint.
pub fn line() -> EndedComplex {
    let mut b = ComplexBuilder::new();
    b.cell("d0:x0", 0).expect("fresh").cell("d0:x1", 0).expect("fresh").cell("d1:e0", 1).expect("fresh");
    b.incidence("d1:e0", "d0:x1", 1).incidence("d1:e0", "d0:x0", -1);
    EndedComplex::new(b.build().expect("edge"), vec![point_end("d0:x0"), point_end("d0:x1")]).expect("line")
}

pub fn ray() -> EndedComplex {
    let mut b = ComplexBuilder::new();
    b.cell("d0:o", 0).expect("fresh");
    EndedComplex::new(b.build().expect("point"), vec![point_end("d0:o")]).expect("ray")
}

/// Cells of the boundary of the `w x h` grid rectangle with lower-left corner
/// `(x0, y0)`, with the counterclockwise signs of its edges.
pub fn rectangle_cycle(x0: usize, y0: usize, w: usize, h: usize) -> (Vec<String>, Vec<(String, i64)>) {
    let mut cells = Vec::new();
    let mut edges = Vec::new();
    for x in x0..x0 + w {
        edges.push((hedge(x, y0), 1));
        edges.push((hedge(x, y0 + h), -1));
    }
    for y in y0..y0 + h {
        edges.push((vedge(x0 + w, y), 1));
        edges.push((vedge(x0, y), -1));
    }
    for x in x0..=x0 + w {
        for y in y0..=y0 + h {
            if x == x0 || x == x0 + w || y == y0 || y == y0 + h {
                cells.push(vertex(x, y));
            }
        }
    }
    cells.extend(edges.iter().map(|(e, _)| e.clone()));
    edges.sort();
    (cells, edges)
}

/// Square-lattice plane: an `s x s` grid with one end along its boundary.
pub fn plane(s: usize) -> EndedComplex {
    let core = disk(s);
    let (cells, _) = rectangle_cycle(0, 0, s, s);
    let end = End::from_core_subcomplex(&core, cells.iter().map(String::as_str)).expect("boundary is closed");
    EndedComplex::new(core, vec![end]).expect("plane")
}

/// Holes of `sigma_k`: squares `(2i+1, 1)` for `i < k-1`.
pub fn sigma_k_holes(k: usize) -> Vec<(usize, usize)> {
    (0..k.saturating_sub(1)).map(|i| (2 * i + 1, 1)).collect()
}

/// Sphere with `k` disks removed, each boundary circle continued as a
/// cylinder. End 0 is the outer boundary; end `i >= 1` is hole `i-1`.
pub fn sigma_k(k: usize) -> EndedComplex {
    let (w, h) = (2 * k - 1, 3);
    let holes = sigma_k_holes(k);
    let core = grid_builder(w, h, None, &holes).build().expect("sigma_k core");
    let (outer, _) = rectangle_cycle(0, 0, w, h);
    let mut ends = vec![End::from_core_subcomplex(&core, outer.iter().map(String::as_str)).expect("closed")];
    for &(x, y) in &holes {
        let (cells, _) = rectangle_cycle(x, y, 1, 1);
        ends.push(End::from_core_subcomplex(&core, cells.iter().map(String::as_str)).expect("closed"));
    }
    EndedComplex::new(core, ends).expect("sigma_k")
}

/// Star graph with `ends` rays from a centre plus `finite` isolated edges.
pub fn ising_star(ends: usize, finite: usize) -> EndedComplex {
    let mut b = ComplexBuilder::new();
    b.cell("d0:c", 0).expect("fresh");
    let mut list = Vec::new();
    for i in 0..ends {
        let (a, e) = (format!("d0:a{i}"), format!("d1:e{i}"));
        b.cell(a.clone(), 0).expect("fresh").cell(e.clone(), 1).expect("fresh");
        b.incidence(e.clone(), a.clone(), 1).incidence(e, "d0:c", -1);
        list.push(point_end(&a));
    }
    for j in 0..finite {
        let (u, v, e) = (format!("d0:f{j}.0"), format!("d0:f{j}.1"), format!("d1:f{j}.e"));
        b.cell(u.clone(), 0).expect("fresh").cell(v.clone(), 0).expect("fresh").cell(e.clone(), 1).expect("fresh");
        b.incidence(e.clone(), v, 1).incidence(e, u, -1);
    }
    EndedComplex::new(b.build().expect("star"), list).expect("ising_star")
}
