//! Randomized property checks shared by the core test suites and the
//! acceptance runner. Every check takes a seed and reports the first
//! violated assertion as an error string.

#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use cwtoric_core::chains::{pair_at_infinity, Chain, Co, Cochain, FinVec, Ho, LfChain, LfCochain, LfVec, Tail, Variance};
use cwtoric_core::complex::catalog;
use cwtoric_core::excitations::planar::PlanarModel;
use cwtoric_core::excitations::{
    braiding_phase_general, classes_at_infinity, find_transporter, polarization_phase, Excitation, TransportData,
};
use cwtoric_core::homology::{realize, FiniteCohomology, FiniteHomology, GroupKind, HomologyContext, LesMap, Representative};
use cwtoric_core::{AbelianCoefficients, EndedComplex, FiniteComplex};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn err<E: std::fmt::Display>(what: &'static str) -> impl Fn(E) -> String {
    move |e| format!("{what}: {e}")
}

pub fn cyclic(d: u64) -> AbelianCoefficients {
    AbelianCoefficients::cyclic(d).expect("cyclic")
}

/// Catalog complexes used by the randomized suites, with a short name.
pub fn complexes() -> Vec<(&'static str, EndedComplex)> {
    vec![
        ("line", catalog::line()),
        ("ray", catalog::ray()),
        ("plane(1)", catalog::plane(1)),
        ("plane(2)", catalog::plane(2)),
        ("sigma_k(2)", catalog::sigma_k(2)),
        ("sigma_k(3)", catalog::sigma_k(3)),
        ("ising_star(4)", catalog::ising_star(4, 1)),
        ("C4 x plane", EndedComplex::product_left(&catalog::cycle(4), &catalog::plane(1)).expect("product")),
        ("torus(3)", EndedComplex::from_finite(catalog::torus(3))),
        ("sphere", EndedComplex::from_finite(catalog::sphere())),
    ]
}

pub const ORDERS: [u64; 3] = [2, 3, 4];

thread_local! {
    static CONTEXTS: RefCell<BTreeMap<(usize, u64), Rc<HomologyContext>>> = RefCell::new(BTreeMap::new());
    static COMPLEXES: Vec<(&'static str, EndedComplex)> = complexes();
}

/// Cached context for catalog entry `i` with coefficients `Z_d`.
pub fn context(i: usize, d: u64) -> Rc<HomologyContext> {
    CONTEXTS.with(|c| {
        c.borrow_mut()
            .entry((i, d))
            .or_insert_with(|| COMPLEXES.with(|cs| Rc::new(HomologyContext::new(&cs[i].1, &cyclic(d)))))
            .clone()
    })
}

pub fn complex_name(i: usize) -> &'static str {
    COMPLEXES.with(|cs| cs[i].0)
}

pub fn num_complexes() -> usize {
    COMPLEXES.with(Vec::len)
}

pub fn random_element(rng: &mut StdRng, g: &AbelianCoefficients) -> Vec<u64> {
    g.orders().iter().map(|&d| rng.gen_range(0..d)).collect()
}

pub fn random_fin<K: Variance>(
    rng: &mut StdRng,
    c: &FiniteComplex,
    dim: usize,
    g: &AbelianCoefficients,
    density: f64,
) -> FinVec<K> {
    let mut v = FinVec::<K>::zero(g, dim);
    if dim >= c.dim_count() {
        return v;
    }
    for l in c.cells(dim) {
        if rng.gen_bool(density) {
            v.add_term(l, 1, &random_element(rng, g));
        }
    }
    v
}

pub fn random_lf<K: Variance>(
    rng: &mut StdRng,
    e: &EndedComplex,
    dim: usize,
    g: &AbelianCoefficients,
    tails: bool,
) -> LfVec<K> {
    let depth = rng.gen_range(1..=3);
    let t = e.truncation(depth).expect("truncation");
    let finite = random_fin::<K>(rng, t.complex(), dim, g, 0.3);
    let tails = (0..e.num_ends())
        .map(|i| {
            let s = e.cross_section(i);
            if !tails {
                return Tail::zero(g, dim);
            }
            let level = random_fin::<K>(rng, s, dim, g, 0.4);
            let slab = if dim == 0 { FinVec::zero(g, 0) } else { random_fin::<K>(rng, s, dim - 1, g, 0.4) };
            Tail { level, slab }
        })
        .collect();
    LfVec::new(e, depth, finite, tails).expect("random lf vector")
}

fn lf_zero<K: Variance>(v: &LfVec<K>) -> bool {
    v.finite().is_zero() && !v.has_tails()
}

fn lf_eq<K: Variance>(a: &LfVec<K>, b: &LfVec<K>) -> bool {
    a.sub(b).map(|d| lf_zero(&d)).unwrap_or(false)
}

/// Locally finite chain of dimension `dim` with finite boundary, in a random
/// class at infinity.
pub fn rel_chain(rng: &mut StdRng, ctx: &HomologyContext, dim: usize) -> Result<LfChain, String> {
    let e = ctx.complex();
    let g = ctx.group();
    let mut v = random_lf::<Ho>(rng, e, dim, g, false);
    if dim >= 1 {
        let p = ctx.presentation(GroupKind::HomologyAtInfinity, dim - 1).map_err(err("H^inf"))?;
        for (gen, &f) in p.generators().iter().zip(p.factors()) {
            let Representative::Chain(c) = realize(e, gen).map_err(err("realize"))? else {
                return Err("realized class is not a chain".into());
            };
            v = v.add(&c.scale(rng.gen_range(0..f) as i64)).map_err(err("add"))?;
        }
    }
    let w = random_lf::<Ho>(rng, e, dim + 1, g, true);
    v.add(&w.differential(e).map_err(err("boundary"))?).map_err(err("add"))
}

/// Locally finite cochain of dimension `dim` with finite coboundary, in a
/// random class at infinity.
pub fn rel_cochain(rng: &mut StdRng, ctx: &HomologyContext, dim: usize) -> Result<LfCochain, String> {
    let e = ctx.complex();
    let g = ctx.group();
    let mut v = random_lf::<Co>(rng, e, dim, g, false);
    let p = ctx.presentation(GroupKind::CohomologyAtInfinity, dim).map_err(err("H_inf"))?;
    for (gen, &f) in p.generators().iter().zip(p.factors()) {
        let Representative::Cochain(c) = realize(e, gen).map_err(err("realize"))? else {
            return Err("realized class is not a cochain".into());
        };
        v = v.add(&c.scale(rng.gen_range(0..f) as i64)).map_err(err("add"))?;
    }
    if dim >= 1 {
        let w = random_lf::<Co>(rng, e, dim - 1, g, true);
        v = v.add(&w.differential(e).map_err(err("coboundary"))?).map_err(err("add"))?;
    }
    Ok(v)
}

pub fn random_excitation(rng: &mut StdRng, ctx: &HomologyContext, n: usize) -> Result<Excitation, String> {
    Excitation::new(rel_chain(rng, ctx, n)?, rel_cochain(rng, ctx, n)?).map_err(err("excitation"))
}

/// Shifts an excitation within its classes at infinity.
pub fn same_class_shift(rng: &mut StdRng, ctx: &HomologyContext, x: &Excitation) -> Result<Excitation, String> {
    let e = ctx.complex();
    let g = ctx.group();
    let n = x.n();
    let dg = random_lf::<Ho>(rng, e, n, g, false).add(
        &random_lf::<Ho>(rng, e, n + 1, g, true).differential(e).map_err(err("boundary"))?,
    );
    let mut dd = random_lf::<Co>(rng, e, n, g, false);
    if n >= 1 {
        dd = dd.add(&random_lf::<Co>(rng, e, n - 1, g, true).differential(e).map_err(err("coboundary"))?).map_err(err("add"))?;
    }
    Excitation::new(x.gamma.add(&dg.map_err(err("add"))?).map_err(err("add"))?, x.delta.add(&dd).map_err(err("add"))?)
        .map_err(err("excitation"))
}

fn pick(rng: &mut StdRng) -> (usize, u64, Rc<HomologyContext>) {
    let i = rng.gen_range(0..num_complexes());
    let d = ORDERS[rng.gen_range(0..ORDERS.len())];
    (i, d, context(i, d))
}

// d^2 = 0

pub fn differential_squares(seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let (i, _, ctx) = pick(&mut rng);
    let e = ctx.complex();
    let g = ctx.group();
    let top = e.top_dim().unwrap_or(0);
    if top < 2 {
        return Ok(());
    }
    let dim = rng.gen_range(0..=top - 2);
    let tails = rng.gen_bool(0.7);
    let c = random_lf::<Ho>(&mut rng, e, dim + 2, g, tails);
    let dd = c.differential(e).and_then(|d| d.differential(e)).map_err(err("boundary"))?;
    ensure!(lf_zero(&dd), "{}: boundary of boundary of a {}-chain is {dd:?}", complex_name(i), dim + 2);
    let a = random_lf::<Co>(&mut rng, e, dim, g, tails);
    let dd = a.differential(e).and_then(|d| d.differential(e)).map_err(err("coboundary"))?;
    ensure!(lf_zero(&dd), "{}: coboundary of coboundary of a {dim}-cochain is {dd:?}", complex_name(i));
    let t = e.truncation(rng.gen_range(1..=3)).map_err(err("truncation"))?;
    let f = random_fin::<Ho>(&mut rng, t.complex(), dim + 2, g, 0.5);
    let ff = f.boundary(t.complex()).and_then(|b| b.boundary(t.complex())).map_err(err("boundary"))?;
    ensure!(ff.is_zero(), "{}: finite boundary squared nonzero", complex_name(i));
    let f = random_fin::<Co>(&mut rng, t.complex(), dim, g, 0.5);
    let ff = f.coboundary(t.complex()).and_then(|b| b.coboundary(t.complex())).map_err(err("coboundary"))?;
    ensure!(ff.is_zero(), "{}: finite coboundary squared nonzero", complex_name(i));
    Ok(())
}

// long exact sequences

fn elements(factors: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &f in factors {
        out = out.into_iter().flat_map(|v| (0..f).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

fn apply(cols: &[Vec<u64>], x: &[u64], cod: &[u64]) -> Vec<u64> {
    let mut y = vec![0u64; cod.len()];
    for (c, &k) in cols.iter().zip(x) {
        for (j, &v) in c.iter().enumerate() {
            y[j] = (y[j] + k * v) % cod[j];
        }
    }
    y
}

#[derive(Clone, Copy, Debug)]
struct Node {
    kind: GroupKind,
    dim: usize,
}

/// The two sequences as lists of nodes with the map leaving each node.
fn sequences(top: usize) -> Vec<Vec<(Node, Option<LesMap>)>> {
    use GroupKind::*;
    let mut hom = vec![(Node { kind: HomologyAtInfinity, dim: top }, Some(LesMap::Connecting))];
    for i in (0..=top).rev() {
        hom.push((Node { kind: Homology, dim: i }, Some(LesMap::Inclusion)));
        if i == 0 {
            hom.push((Node { kind: LfHomology, dim: 0 }, None));
        } else {
            hom.push((Node { kind: LfHomology, dim: i }, Some(LesMap::Restriction)));
            hom.push((Node { kind: HomologyAtInfinity, dim: i - 1 }, Some(LesMap::Connecting)));
        }
    }
    let mut co = Vec::new();
    for i in 0..=top {
        co.push((Node { kind: LfCohomology, dim: i }, Some(LesMap::CoInclusion)));
        co.push((Node { kind: Cohomology, dim: i }, Some(LesMap::CoRestriction)));
        co.push((Node { kind: CohomologyAtInfinity, dim: i }, if i < top { Some(LesMap::CoConnecting) } else { None }));
    }
    vec![hom, co]
}

type Exactness = BTreeMap<(usize, u64, usize, usize), Result<(), String>>;

thread_local! {
    static EXACT: RefCell<Exactness> = RefCell::new(BTreeMap::new());
}

fn image(ctx: &HomologyContext, node: Node, map: Option<LesMap>) -> Result<(Vec<u64>, BTreeSet<Vec<u64>>), String> {
    let src = ctx.presentation(node.kind, node.dim).map_err(err("presentation"))?;
    let Some(map) = map else {
        return Ok((Vec::new(), BTreeSet::from([Vec::new()])));
    };
    let (_, cod, cdim) = map.signature(node.dim).ok_or("map undefined")?;
    let target = ctx.presentation(cod, cdim).map_err(err("presentation"))?;
    let cols = ctx.les_matrix(map, node.dim).map_err(err("les matrix"))?;
    let set = elements(src.factors()).iter().map(|x| apply(&cols, x, target.factors())).collect();
    Ok((target.factors().to_vec(), set))
}

/// `im(incoming) = ker(outgoing)` at node `k` of sequence `s`, by enumeration.
fn exact_at(ctx: &HomologyContext, seq: &[(Node, Option<LesMap>)], k: usize) -> Check {
    let (node, out) = seq[k];
    let here = ctx.presentation(node.kind, node.dim).map_err(err("presentation"))?;
    ensure!(here.order() <= 1 << 14, "group too large to enumerate");
    let im: BTreeSet<Vec<u64>> = if k == 0 {
        BTreeSet::from([vec![0; here.factors().len()]])
    } else {
        let (_, set) = image(ctx, seq[k - 1].0, seq[k - 1].1)?;
        set
    };
    let ker: BTreeSet<Vec<u64>> = match out {
        None => elements(here.factors()).into_iter().collect(),
        Some(map) => {
            let (_, cod, cdim) = map.signature(node.dim).ok_or("map undefined")?;
            let target = ctx.presentation(cod, cdim).map_err(err("presentation"))?;
            let cols = ctx.les_matrix(map, node.dim).map_err(err("les matrix"))?;
            elements(here.factors())
                .into_iter()
                .filter(|x| apply(&cols, x, target.factors()).iter().all(|&v| v == 0))
                .collect()
        }
    };
    ensure!(
        im == ker,
        "not exact at {} (image has {} elements, kernel {})",
        node.kind.symbol(node.dim),
        im.len(),
        ker.len()
    );
    Ok(())
}

/// A representative of a random class with random boundary noise added.
fn noisy_rep(rng: &mut StdRng, ctx: &HomologyContext, node: Node) -> Result<(Vec<u64>, Representative), String> {
    let e = ctx.complex();
    let g = ctx.group();
    let p = ctx.presentation(node.kind, node.dim).map_err(err("presentation"))?;
    let coords: Vec<u64> = p.factors().iter().map(|&f| rng.gen_range(0..f)).collect();
    let rep = p.representative(&coords).map_err(err("representative"))?;
    let rep = match (node.kind, rep) {
        (GroupKind::Homology | GroupKind::LfHomology, Representative::Chain(c)) => {
            let w = random_lf::<Ho>(rng, e, node.dim + 1, g, node.kind == GroupKind::LfHomology);
            Representative::Chain(c.add(&w.differential(e).map_err(err("boundary"))?).map_err(err("add"))?)
        }
        (GroupKind::Cohomology | GroupKind::LfCohomology, Representative::Cochain(c)) if node.dim >= 1 => {
            let w = random_lf::<Co>(rng, e, node.dim - 1, g, node.kind == GroupKind::Cohomology);
            Representative::Cochain(c.add(&w.differential(e).map_err(err("coboundary"))?).map_err(err("add"))?)
        }
        (_, r) => r,
    };
    Ok((coords, rep))
}

pub fn les_exactness(seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let (i, d, ctx) = pick(&mut rng);
    let name = complex_name(i);
    let top = ctx.complex().top_dim().unwrap_or(0);
    let seqs = sequences(top);
    let s = rng.gen_range(0..seqs.len());
    let seq = &seqs[s];
    let k = rng.gen_range(0..seq.len());
    // full exactness at the node, memoized per (complex, group, node)
    let verdict = EXACT.with(|m| m.borrow().get(&(i, d, s, k)).cloned());
    let verdict = match verdict {
        Some(v) => v,
        None => {
            let v = exact_at(&ctx, seq, k);
            EXACT.with(|m| m.borrow_mut().insert((i, d, s, k), v.clone()));
            v
        }
    };
    verdict.map_err(|m| format!("{name}, Z{d}: {m}"))?;
    // composite of consecutive maps on a noisy representative
    if k + 1 < seq.len() {
        if let (Some(f), Some(g)) = (seq[k].1, seq[k + 1].1) {
            let (coords, rep) = noisy_rep(&mut rng, &ctx, seq[k].0)?;
            let once = ctx.les_map_rep(f, &rep).map_err(err("first map"))?;
            let (_, cod, cdim) = f.signature(seq[k].0.dim).ok_or("map undefined")?;
            let class = ctx.presentation(cod, cdim).and_then(|p| p.reduce(&once)).map_err(err("reduce"))?;
            let expect = ctx
                .les_map(
                    f,
                    &cwtoric_core::HomologyClass {
                        kind: seq[k].0.kind,
                        dim: seq[k].0.dim,
                        factors: ctx.presentation(seq[k].0.kind, seq[k].0.dim).map_err(err("p"))?.factors().to_vec(),
                        coordinates: coords,
                    },
                )
                .map_err(err("class map"))?;
            ensure!(class == expect, "{name}, Z{d}: map {f:?} depends on the representative");
            let twice = ctx.les_map_rep(g, &once).map_err(err("second map"))?;
            let (_, cod2, cdim2) = g.signature(cdim).ok_or("map undefined")?;
            let c2 = ctx.presentation(cod2, cdim2).and_then(|p| p.reduce(&twice)).map_err(err("reduce"))?;
            ensure!(c2.is_zero(), "{name}, Z{d}: {g:?} after {f:?} is nonzero");
        }
    }
    Ok(())
}

// pairing at infinity

pub fn pairing_at_infinity_independence(seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let (i, d, ctx) = pick(&mut rng);
    let e = ctx.complex();
    let g = ctx.group();
    let top = e.top_dim().unwrap_or(0);
    if top == 0 {
        return Ok(());
    }
    let k = rng.gen_range(0..top);
    let dc = rel_chain(&mut rng, &ctx, k + 1)?;
    let a = rel_cochain(&mut rng, &ctx, k)?;
    let v = pair_at_infinity(e, &dc, &a).map_err(err("pairing"))?;
    let dc2 = dc
        .add(&random_lf::<Ho>(&mut rng, e, k + 1, g, false))
        .and_then(|x| x.add(&random_lf::<Ho>(&mut rng, e, k + 2, g, true).differential(e)?))
        .map_err(err("shift chain"))?;
    let mut a2 = a.add(&random_lf::<Co>(&mut rng, e, k, g, false)).map_err(err("shift cochain"))?;
    if k >= 1 {
        a2 = a2.add(&random_lf::<Co>(&mut rng, e, k - 1, g, true).differential(e).map_err(err("cob"))?).map_err(err("add"))?;
    }
    let w = pair_at_infinity(e, &dc2, &a2).map_err(err("pairing"))?;
    ensure!(v == w, "{}, Z{d}: pairing at infinity {v} changed to {w}", complex_name(i));
    // value through the canonical representatives of the classes
    let pc = ctx.presentation(GroupKind::HomologyAtInfinity, k).map_err(err("H^inf"))?;
    let pa = ctx.presentation(GroupKind::CohomologyAtInfinity, k).map_err(err("H_inf"))?;
    let cc = pc.reduce(&Representative::Chain(dc)).map_err(err("reduce"))?;
    let ca = pa.reduce(&Representative::Cochain(a)).map_err(err("reduce"))?;
    let rc = realize(e, &pc.representative(&cc.coordinates).map_err(err("rep"))?).map_err(err("realize"))?;
    let ra = realize(e, &pa.representative(&ca.coordinates).map_err(err("rep"))?).map_err(err("realize"))?;
    let u = pair_at_infinity(e, rc.as_chain().ok_or("chain")?, ra.as_cochain().ok_or("cochain")?).map_err(err("pairing"))?;
    ensure!(u == v, "{}, Z{d}: canonical representatives pair to {u}, random ones to {v}", complex_name(i));
    Ok(())
}

// polarization

pub fn polarization_independence(seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let (i, d, ctx) = pick(&mut rng);
    let e = ctx.complex();
    let g = ctx.group();
    let top = e.top_dim().unwrap_or(0);
    let n = rng.gen_range(0..=top);
    let x = random_excitation(&mut rng, &ctx, n)?;
    let dd = rel_chain(&mut rng, &ctx, n + 1)?;
    let c = if n >= 1 { Some(rel_cochain(&mut rng, &ctx, n - 1)?) } else { None };
    let v = polarization_phase(e, &x, Some(&dd), c.as_ref()).map_err(err("polarization"))?;
    let dd2 = dd
        .add(&random_lf::<Ho>(&mut rng, e, n + 1, g, false))
        .and_then(|y| y.add(&random_lf::<Ho>(&mut rng, e, n + 2, g, true).differential(e)?))
        .map_err(err("shift d"))?;
    let c2 = match &c {
        None => None,
        Some(c) => {
            let mut c2 = c.add(&random_lf::<Co>(&mut rng, e, n - 1, g, false)).map_err(err("shift c"))?;
            if n >= 2 {
                c2 = c2
                    .add(&random_lf::<Co>(&mut rng, e, n - 2, g, true).differential(e).map_err(err("cob"))?)
                    .map_err(err("add"))?;
            }
            Some(c2)
        }
    };
    let w = polarization_phase(e, &x, Some(&dd2), c2.as_ref()).map_err(err("polarization"))?;
    ensure!(v == w, "{}, Z{d}, n={n}: polarization {v} changed to {w}", complex_name(i));
    // the excitation may move within its sector as well
    let y = same_class_shift(&mut rng, &ctx, &x)?;
    let u = polarization_phase(e, &y, Some(&dd2), c2.as_ref()).map_err(err("polarization"))?;
    ensure!(u == v, "{}, Z{d}, n={n}: polarization changed under a sector-preserving shift", complex_name(i));
    Ok(())
}

// transporters

pub fn transporter_round_trip(seed: u64) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let (i, d, ctx) = pick(&mut rng);
    let e = ctx.complex();
    let top = e.top_dim().unwrap_or(0);
    let n = rng.gen_range(0..=top);
    let x1 = random_excitation(&mut rng, &ctx, n)?;
    let x2 = if rng.gen_bool(0.7) { same_class_shift(&mut rng, &ctx, &x1)? } else { random_excitation(&mut rng, &ctx, n)? };
    let same = classes_at_infinity(&ctx, &x1).map_err(err("classes"))? == classes_at_infinity(&ctx, &x2).map_err(err("classes"))?;
    let t = find_transporter(&ctx, &x1, &x2).map_err(err("transporter"))?;
    match t {
        Some(t) => {
            ensure!(same, "{}, Z{d}: transporter between different sectors", complex_name(i));
            ensure!(
                t.links(e, &x1, &x2).map_err(err("links"))?,
                "{}, Z{d}, n={n}: transport equations fail on reconstruction",
                complex_name(i)
            );
            ensure!(t.gamma_hat.dim() == n && t.delta_hat.dim() == n, "wrong dimensions");
        }
        None => ensure!(!same, "{}, Z{d}, n={n}: no transporter although the classes agree", complex_name(i)),
    }
    Ok(())
}

// freedom in braiding

fn random_cycle(rng: &mut StdRng, f: &FiniteComplex, dim: usize, g: &AbelianCoefficients) -> Result<Chain, String> {
    let h = FiniteHomology::absolute(f, dim, g);
    let mut z = Chain::zero(g, dim);
    for (gen, &o) in h.generators().iter().zip(h.factors()) {
        z = z.add(&gen.scale(rng.gen_range(0..o) as i64)).map_err(err("add"))?;
    }
    let w = random_fin::<Ho>(rng, f, dim + 1, g, 0.3);
    z.add(&w.boundary(f).map_err(err("boundary"))?).map_err(err("add"))
}

fn random_cocycle(rng: &mut StdRng, f: &FiniteComplex, dim: usize, g: &AbelianCoefficients) -> Result<Cochain, String> {
    let h = FiniteCohomology::absolute(f, dim, g);
    let mut z = Cochain::zero(g, dim);
    for (gen, &o) in h.generators().iter().zip(h.factors()) {
        z = z.add(&gen.scale(rng.gen_range(0..o) as i64)).map_err(err("add"))?;
    }
    if dim >= 1 {
        let w = random_fin::<Co>(rng, f, dim - 1, g, 0.3);
        z = z.add(&w.coboundary(f).map_err(err("coboundary"))?).map_err(err("add"))?;
    }
    Ok(z)
}

/// Planar model `F x plane`, two charges and canonical transport data.
pub struct BraidInstance {
    pub model: PlanarModel,
    pub x: [Excitation; 2],
    pub t: [TransportData; 2],
}

thread_local! {
    static MODELS: RefCell<BTreeMap<(usize, usize), Rc<PlanarModel>>> = RefCell::new(BTreeMap::new());
}

fn factor(i: usize) -> (FiniteComplex, usize) {
    match i {
        0 => (catalog::cycle(4), 1),
        1 => (catalog::cycle(3), 1),
        2 => (catalog::point(), 1),
        _ => (catalog::torus(2), 2),
    }
}

fn model(i: usize, size: usize) -> Rc<PlanarModel> {
    MODELS.with(|m| {
        m.borrow_mut()
            .entry((i, size))
            .or_insert_with(|| Rc::new(PlanarModel::new(&factor(i).0, size).expect("planar model")))
            .clone()
    })
}

pub fn braid_instance(rng: &mut StdRng) -> Result<BraidInstance, String> {
    let fi = rng.gen_range(0..4);
    let (f, n) = factor(fi);
    let m = model(fi, rng.gen_range(1..=2));
    let d = ORDERS[rng.gen_range(0..ORDERS.len())];
    let g = cyclic(if fi == 3 { 2 } else { d });
    let e = m.complex();
    let mut xs = Vec::new();
    let mut ts = Vec::new();
    for k in 0..2 {
        let fc = random_cycle(rng, &f, n - 1, &g)?;
        let gc = random_cocycle(rng, &f, n - 1, &g)?;
        xs.push(m.charge(&fc, &gc).map_err(err("charge"))?);
        let mut t = TransportData::zero(e, &g, n);
        if k == 1 {
            t.p = m.rotation_chain(&fc).map_err(err("rotation"))?;
            t.q = m.rotation_cochain(&gc).map_err(err("rotation"))?;
        }
        ts.push(t);
    }
    let model = (*m).clone();
    let [x1, x2]: [Excitation; 2] = xs.try_into().map_err(|_| "two charges")?;
    let [t1, t2]: [TransportData; 2] = ts.try_into().map_err(|_| "two transports")?;
    Ok(BraidInstance { model, x: [x1, x2], t: [t1, t2] })
}

fn support_within<K: Variance>(v: &LfVec<K>, m: usize) -> BTreeSet<String> {
    v.restrict(m).support().cloned().collect()
}

/// Random finite vector on `T_m` avoiding the given cells.
fn avoiding<K: Variance>(
    rng: &mut StdRng,
    e: &EndedComplex,
    m: usize,
    dim: usize,
    g: &AbelianCoefficients,
    avoid: &BTreeSet<String>,
) -> FinVec<K> {
    let t = e.truncation(m).expect("truncation");
    random_fin::<K>(rng, t.complex(), dim, g, 0.3).filter(|l| !avoid.contains(l))
}

/// Applies one of the four transformations to side `i`; returns its name.
fn transform(rng: &mut StdRng, b: &mut BraidInstance, which: usize, i: usize) -> Result<&'static str, String> {
    let e = b.model.complex().clone();
    let j = 1 - i;
    let n = b.x[i].n();
    let g = b.x[i].group().clone();
    let m = rng.gen_range(1..=3);
    match which {
        0 => {
            let t = e.truncation(m).map_err(err("truncation"))?;
            let ph = random_fin::<Ho>(rng, t.complex(), n + 1, &g, 0.3);
            let ei = random_lf::<Ho>(rng, &e, n + 2, &g, true);
            let ti = &mut b.t[i];
            ti.p = ti.p.add_finite(&ph).and_then(|p| p.add(&ei.differential(&e)?)).map_err(err("p"))?;
            ti.gamma_hat = ti.gamma_hat.add(&ph.differential_in(&e).map_err(err("d"))?).map_err(err("gamma_hat"))?;
            Ok("p += p^ + d e, gamma^ += d p^")
        }
        1 => {
            let t = e.truncation(m).map_err(err("truncation"))?;
            let qh = if n >= 1 { random_fin::<Co>(rng, t.complex(), n - 1, &g, 0.3) } else { Cochain::zero(&g, 0) };
            let fi = if n >= 2 { Some(random_lf::<Co>(rng, &e, n - 2, &g, true)) } else { None };
            let ti = &mut b.t[i];
            if n >= 1 {
                ti.q = ti.q.add_finite(&qh).map_err(err("q"))?;
                ti.delta_hat = ti.delta_hat.add(&qh.differential_in(&e).map_err(err("d"))?).map_err(err("delta_hat"))?;
            }
            if let Some(f) = fi {
                ti.q = ti.q.add(&f.differential(&e).map_err(err("d"))?).map_err(err("q"))?;
            }
            Ok("q += q^ + dT f, delta^ += dT q^")
        }
        2 => {
            // p_i += p' off dT(delta^_j - delta_j), gamma^_i += g' off delta_j - delta^_j + dT q_j
            let xj = &b.x[j];
            let tj = &b.t[j];
            let dd = LfVec::from_finite(&e, tj.delta_hat.clone())
                .map_err(err("lift"))?
                .sub(&xj.delta)
                .and_then(|v| v.differential(&e))
                .map_err(err("dT"))?;
            let mm = m.max(dd.depth()) + 1;
            let pp = avoiding::<Ho>(rng, &e, mm, n + 1, &g, &support_within(&dd, mm + 1));
            let mut s = xj.delta.add_finite(&tj.delta_hat.neg()).map_err(err("s"))?;
            if n >= 1 {
                s = s.add(&tj.q.differential(&e).map_err(err("dT q"))?).map_err(err("s"))?;
            }
            let gh = avoiding::<Ho>(rng, &e, mm, n, &g, &support_within(&s, mm + 1));
            let ti = &mut b.t[i];
            ti.p = ti.p.add_finite(&pp).map_err(err("p"))?;
            ti.gamma_hat = ti.gamma_hat.add(&gh).map_err(err("gamma_hat"))?;
            Ok("p += p', gamma^ += gamma'")
        }
        _ => {
            if n == 0 {
                return Ok("none");
            }
            let xj = &b.x[j];
            let tj = &b.t[j];
            let dg = LfVec::from_finite(&e, tj.gamma_hat.clone())
                .map_err(err("lift"))?
                .sub(&xj.gamma)
                .and_then(|v| v.differential(&e))
                .map_err(err("d"))?;
            let mm = m.max(dg.depth()) + 1;
            let qq = avoiding::<Co>(rng, &e, mm, n - 1, &g, &support_within(&dg, mm + 1));
            let s = xj
                .gamma
                .add_finite(&tj.gamma_hat.neg())
                .and_then(|v| v.add(&tj.p.differential(&e)?))
                .map_err(err("s"))?;
            let dh = avoiding::<Co>(rng, &e, mm, n, &g, &support_within(&s, mm + 1));
            let ti = &mut b.t[i];
            ti.q = ti.q.add_finite(&qq).map_err(err("q"))?;
            ti.delta_hat = ti.delta_hat.add(&dh).map_err(err("delta_hat"))?;
            Ok("q += q', delta^ += delta'")
        }
    }
}

/// Braiding is unchanged by the four transformations. With `which` set only
/// that transformation is applied, otherwise a random sequence.
pub fn freedom_in_braiding(seed: u64, which: Option<usize>) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut b = braid_instance(&mut rng)?;
    let e = b.model.complex().clone();
    let v = braiding_phase_general(&e, &b.x[0], &b.x[1], &b.t[0], &b.t[1]).map_err(err("braiding"))?;
    let steps = if which.is_some() { 1 } else { rng.gen_range(1..=3) };
    let mut applied = Vec::new();
    for _ in 0..steps {
        let w = which.unwrap_or_else(|| rng.gen_range(0..4));
        let i = rng.gen_range(0..2);
        applied.push(format!("{} on {}", transform(&mut rng, &mut b, w, i)?, i + 1));
    }
    let u = braiding_phase_general(&e, &b.x[0], &b.x[1], &b.t[0], &b.t[1])
        .map_err(|er| format!("braiding after [{}]: {er}", applied.join("; ")))?;
    ensure!(u == v, "braiding {v} changed to {u} after [{}]", applied.join("; "));
    Ok(())
}

/// Runs `check` on seeds `base..base+cases`; returns the failures.
pub fn run_cases(cases: u64, base: u64, check: impl Fn(u64) -> Check) -> Vec<(u64, String)> {
    (base..base + cases).filter_map(|s| check(s).err().map(|m| (s, m))).collect()
}

// exact values

fn same_factors(what: &str, got: &[u64], want: &[u64]) -> Check {
    ensure!(got == want, "{what}: got {got:?}, expected {want:?}");
    Ok(())
}

fn factors_of(ctx: &HomologyContext, kind: GroupKind, dim: usize) -> Result<Vec<u64>, String> {
    Ok(ctx.presentation(kind, dim).map_err(err("presentation"))?.factors().to_vec())
}

fn logical(ctx: &HomologyContext, n: usize) -> Result<cwtoric_core::LogicalReport, String> {
    cwtoric_core::logical::logical_report_in(ctx, n).map_err(err("logical"))
}

fn bits(what: &str, r: &cwtoric_core::LogicalReport, c: f64, q: f64) -> Check {
    ensure!(r.c == c && r.q == q, "{what}: (c, q) = ({}, {}), expected ({c}, {q})", r.c, r.q);
    Ok(())
}

fn log2(order: u128) -> f64 {
    (order as f64).log2()
}

fn plane_golden() -> Check {
    let ctx = HomologyContext::new(&catalog::plane(2), &cyclic(2));
    same_factors("plane H^inf_0", &factors_of(&ctx, GroupKind::HomologyAtInfinity, 0)?, &[2])?;
    same_factors("plane H^inf_1", &factors_of(&ctx, GroupKind::HomologyAtInfinity, 1)?, &[2])?;
    bits("plane", &logical(&ctx, 1)?, 0.0, 0.0)
}

fn sigma_golden(k: usize) -> Check {
    let ctx = HomologyContext::new(&catalog::sigma_k(k), &cyclic(2));
    let r = logical(&ctx, 1)?;
    same_factors(&format!("sigma_{k} H_1"), &r.homology, &vec![2; k - 1])?;
    same_factors(&format!("sigma_{k} H^1_lf"), &r.lf_cohomology, &vec![2; k - 1])?;
    ensure!(r.pairing_matrix.iter().flatten().all(|p| p.is_zero()), "sigma_{k}: pairing is not zero");
    bits(&format!("sigma_{k}"), &r, (2 * k - 2) as f64, 0.0)?;
    same_factors(&format!("sigma_{k} H^inf_0"), &factors_of(&ctx, GroupKind::HomologyAtInfinity, 0)?, &vec![2; k])?;
    same_factors(&format!("sigma_{k} H^inf_1"), &factors_of(&ctx, GroupKind::HomologyAtInfinity, 1)?, &vec![2; k])
}

fn genus_golden(g: usize) -> Check {
    let e = EndedComplex::from_finite(catalog::genus(g));
    let ctx = HomologyContext::new(&e, &cyclic(2));
    bits(&format!("genus {g}"), &logical(&ctx, 1)?, 0.0, (2 * g) as f64)
}

fn ising_golden() -> Check {
    let (ends, finite) = (4, 1);
    let ctx = HomologyContext::new(&catalog::ising_star(ends, finite), &cyclic(2));
    same_factors("ising H^inf_0", &factors_of(&ctx, GroupKind::HomologyAtInfinity, 0)?, &[2; 4])?;
    same_factors("ising H_inf^0", &factors_of(&ctx, GroupKind::CohomologyAtInfinity, 0)?, &[2; 4])?;
    // one bit per infinite component, one qubit per finite component
    let components = 1 + finite;
    bits("ising star", &logical(&ctx, 0)?, (components - finite) as f64, finite as f64)
}

fn product_golden(name: &str, f: &FiniteComplex, n: usize) -> Check {
    let g = cyclic(2);
    let e = EndedComplex::product_left(f, &catalog::plane(1)).map_err(err("product"))?;
    let ctx = HomologyContext::new(&e, &g);
    let h = |i: usize| FiniteHomology::absolute(f, i, &g);
    let hn = h(n).order();
    let hc = if n >= 2 { FiniteCohomology::absolute(f, n - 2, &g).order() } else { 1 };
    bits(&format!("{name} x plane, n={n}"), &logical(&ctx, n)?, log2(hn) + log2(hc), 0.0)?;
    let mut want: Vec<u64> = h(n - 1).factors().to_vec();
    if n >= 2 {
        want.extend(h(n - 2).factors());
    }
    want.sort_unstable();
    let mut got = factors_of(&ctx, GroupKind::HomologyAtInfinity, n - 1)?;
    got.sort_unstable();
    same_factors(&format!("{name} x plane H^inf_{}", n - 1), &got, &want)
}

/// Exact values for the named example spaces.
pub fn goldens() -> Vec<(String, Check)> {
    let mut out = vec![("plane".to_string(), plane_golden())];
    for k in [2, 3, 5] {
        out.push((format!("sigma_{k}"), sigma_golden(k)));
    }
    for g in [1, 2] {
        out.push((format!("genus {g}"), genus_golden(g)));
    }
    out.push(("ising star, 4 ends".to_string(), ising_golden()));
    for (name, f) in [("C4", catalog::cycle(4)), ("torus", catalog::torus(2))] {
        for n in [1, 2] {
            out.push((format!("{name} x plane, n={n}"), product_golden(name, &f, n)));
        }
    }
    out
}

// brute-force oracle

/// Finite catalog instances `(name, complex, n, group)` within the cap.
pub fn oracle_instances(cap: u128) -> Vec<(String, FiniteComplex, usize, AbelianCoefficients)> {
    let spaces = [
        ("point", catalog::point()),
        ("interval", catalog::path(1)),
        ("path(3)", catalog::path(3)),
        ("cycle(3)", catalog::cycle(3)),
        ("cycle(4)", catalog::cycle(4)),
        ("disk(1)", catalog::disk(1)),
        ("disk(2)", catalog::disk(2)),
        ("torus(2)", catalog::torus(2)),
        ("sphere", catalog::sphere()),
        ("genus(1)", catalog::genus(1)),
        ("genus(2)", catalog::genus(2)),
    ];
    let mut out = Vec::new();
    for (name, c) in spaces {
        for n in 0..c.dim_count() {
            for d in [2, 3] {
                let g = cyclic(d);
                if cwtoric_core::oracle::state_count(&c, n, &g) <= cap {
                    out.push((format!("{name}, n={n}, Z{d}"), c.clone(), n, g));
                }
            }
        }
    }
    out
}

pub fn oracle_instance(c: &FiniteComplex, n: usize, g: &AbelianCoefficients, cap: u128) -> Check {
    let s = cwtoric_core::oracle::summarize(c, n, g, cap).map_err(err("oracle"))?;
    ensure!(s.consistent(), "{s:?}");
    Ok(())
}

/// Energy of a random finite excitation measured on the dense model equals
/// the defect count.
pub fn oracle_energy(seed: u64, cap: u128) -> Check {
    let mut rng = StdRng::seed_from_u64(seed);
    let inst: Vec<_> = oracle_instances(cap).into_iter().filter(|(_, c, n, _)| c.num_cells(*n) > 0).collect();
    let (name, c, n, g) = &inst[rng.gen_range(0..inst.len())];
    let m = cwtoric_core::DenseModel::new(c, *n, g, cap).map_err(err("model"))?;
    let e = EndedComplex::from_finite(c.clone());
    let gamma = random_fin::<Ho>(&mut rng, c, *n, g, 0.4);
    let delta = random_fin::<Co>(&mut rng, c, *n, g, 0.4);
    let x = Excitation::new(
        LfChain::from_finite(&e, gamma.clone()).map_err(err("lift"))?,
        LfCochain::from_finite(&e, delta.clone()).map_err(err("lift"))?,
    )
    .map_err(err("excitation"))?;
    let want = x.energy(&e).map_err(err("energy"))? as i64;
    let got = m.excitation_energy(&gamma, &delta).map_err(err("oracle energy"))?;
    ensure!(got == want, "{name}: oracle energy {got}, defect count {want}");
    Ok(())
}
