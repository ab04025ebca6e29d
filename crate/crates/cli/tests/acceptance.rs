//! Acceptance suite: one PASS/FAIL line per criterion.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::process::Command;
use std::time::{Duration, Instant};

use cwtoric_core::chains::{pair, pair_at_infinity, pair_lf, Chain, Cochain, LfChain, LfCochain, Tail};
use cwtoric_core::complex::{catalog, level_label, slab_label};
use cwtoric_core::excitations::planar::PlanarModel;
use cwtoric_core::excitations::{
    braiding_phase_at_infinity, braiding_phase_general, is_ground, twist_phase, verify_ground_witness, Excitation,
    GroundVerdict, TransportData, TwistRoute,
};
use cwtoric_core::homology::{realize, FiniteCohomology, FiniteHomology, GroupKind, HomologyContext};
use cwtoric_core::oracle::DEFAULT_CAP;
use cwtoric_core::{FiniteComplex, PhaseQZ};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn half() -> PhaseQZ {
    PhaseQZ::new(1, 2)
}

fn e<T: std::fmt::Display>(what: &str) -> impl Fn(T) -> String + '_ {
    move |x| format!("{what}: {x}")
}

// 1

fn goldens() -> Outcome {
    let start = Instant::now();
    let results = support::goldens();
    let elapsed = start.elapsed();
    let failed: Vec<String> =
        results.iter().filter_map(|(n, r)| r.as_ref().err().map(|m| format!("{n}: {m}"))).collect();
    if !failed.is_empty() {
        return Err(failed.join("; "));
    }
    if elapsed > Duration::from_secs(10) {
        return Err(format!("all values exact but took {:.1} s", elapsed.as_secs_f64()));
    }
    Ok(format!("{} example spaces exact in {:.2} s", results.len(), elapsed.as_secs_f64()))
}

// 2

fn line_counterexample() -> Outcome {
    let line = catalog::line();
    let g = support::cyclic(2);
    // x0 = 0, x1 = 1; end 1 runs through 2, 3, ... and end 0 through -1, -2, ...
    let a = LfCochain::new(
        &line,
        1,
        Cochain::from_integer_combination(
            &g,
            0,
            [("d0:x0".to_string(), 1), ("d0:x1".to_string(), 1), (level_label(1, 1, "p"), 1)],
            &[1],
        ),
        vec![Tail::zero(&g, 0), Tail { level: Cochain::single(&g, 0, "p", &[1]).map_err(e("cochain"))?, slab: Cochain::zero(&g, 0) }],
    )
    .map_err(e("a"))?;
    let b = LfChain::new(
        &line,
        1,
        Chain::from_integer_combination(
            &g,
            1,
            [("d1:e0".to_string(), 1), (slab_label(0, 1, "p"), 1), (slab_label(1, 1, "p"), 1)],
            &[1],
        ),
        (0..2)
            .map(|_| Ok(Tail { level: Chain::zero(&g, 1), slab: Chain::single(&g, 0, "p", &[1])? }))
            .collect::<cwtoric_core::Result<Vec<_>>>()
            .map_err(e("tails"))?,
    )
    .map_err(e("b"))?;
    let da = a.finite_differential(&line).map_err(e("coboundary"))?;
    let edge = Cochain::single(&g, 1, &slab_label(0, 1, "p"), &[1]).map_err(e("edge"))?;
    if da != edge {
        return Err(format!("coboundary of a is {da:?}, not the edge from -1 to 0"));
    }
    let db = b.finite_differential(&line).map_err(e("boundary"))?;
    if !db.is_zero() {
        return Err("b is not a cycle".into());
    }
    let left = pair_lf(&b, &LfCochain::from_finite(&line, da).map_err(e("lift"))?, true).map_err(e("pair"))?;
    let right = pair_lf(&LfChain::from_finite(&line, db).map_err(e("lift"))?, &a, true).map_err(e("pair"))?;
    let gap = pair_at_infinity(&line, &b, &a).map_err(e("pair at infinity"))?;
    if left == half() && right.is_zero() && gap == half() {
        Ok(format!("<b, dT a> = {left}, <d b, a> = {right}"))
    } else {
        Err(format!("<b, dT a> = {left}, <d b, a> = {right}, difference {gap}"))
    }
}

// 3

fn oracle() -> Outcome {
    let inst = support::oracle_instances(DEFAULT_CAP);
    let mut pairs = 0;
    for (name, c, n, g) in &inst {
        let s = cwtoric_core::oracle::summarize(c, *n, g, DEFAULT_CAP).map_err(e("oracle"))?;
        if !s.consistent() {
            return Err(format!("{name}: {s:?}"));
        }
        pairs += s.commutation_pairs;
    }
    let failures = support::run_cases(20, 0, |s| support::oracle_energy(s, DEFAULT_CAP));
    if let Some((seed, m)) = failures.first() {
        return Err(format!("energy, seed {seed}: {m}"));
    }
    Ok(format!("{} instances, 20 random energies, {pairs} commuting star/plaquette pairs", inst.len()))
}

// 4

struct Charge {
    name: String,
    f: Chain,
    g: Cochain,
}

fn basis_charges(factor: &FiniteComplex, n: usize, d: u64) -> Vec<Charge> {
    let grp = support::cyclic(d);
    let fs = FiniteHomology::absolute(factor, n - 1, &grp).generators().to_vec();
    let gs = FiniteCohomology::absolute(factor, n - 1, &grp).generators().to_vec();
    let (zf, zg) = (Chain::zero(&grp, n - 1), Cochain::zero(&grp, n - 1));
    let mut out = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        out.push(Charge { name: format!("e{i}"), f: f.clone(), g: zg.clone() });
    }
    for (j, g) in gs.iter().enumerate() {
        out.push(Charge { name: format!("m{j}"), f: zf.clone(), g: g.clone() });
    }
    for (i, f) in fs.iter().enumerate() {
        for (j, g) in gs.iter().enumerate() {
            out.push(Charge { name: format!("e{i}m{j}"), f: f.clone(), g: g.clone() });
        }
    }
    out
}

/// Braiding of every ordered pair and the twist of every charge on
/// `factor x plane`, against `-(<f2,g1> + <f1,g2>)` and `<f,g>`.
fn product_phases(factor: &FiniteComplex, n: usize, d: u64) -> Result<usize, String> {
    let m = PlanarModel::new(factor, 2).map_err(e("model"))?;
    let ec = m.complex();
    let grp = support::cyclic(d);
    let charges = basis_charges(factor, n, d);
    let mut checked = 0;
    for a in &charges {
        let xa = m.charge(&a.f, &a.g).map_err(e("charge"))?;
        for b in &charges {
            let xb = m.charge(&b.f, &b.g).map_err(e("charge"))?;
            let mut tb = TransportData::zero(ec, &grp, n);
            tb.p = m.rotation_chain(&b.f).map_err(e("rotation"))?;
            tb.q = m.rotation_cochain(&b.g).map_err(e("rotation"))?;
            let ta = TransportData::zero(ec, &grp, n);
            let general = braiding_phase_general(ec, &xa, &xb, &ta, &tb).map_err(e("general"))?;
            let inf = braiding_phase_at_infinity(ec, &xa, &tb.p, &tb.q).map_err(e("at infinity"))?;
            let expected = pair(&b.f, &a.g).map_err(e("pair"))?.add(pair(&a.f, &b.g).map_err(e("pair"))?).neg();
            if general != inf || inf != expected {
                return Err(format!(
                    "({}, {}): general {general}, at infinity {inf}, expected {expected}",
                    a.name, b.name
                ));
            }
            checked += 1;
        }
        let p = m.rotation_chain(&a.f).map_err(e("rotation"))?;
        let q = m.rotation_cochain(&a.g).map_err(e("rotation"))?;
        let tp = twist_phase(ec, &xa, TwistRoute::P, &p, &q).map_err(e("twist"))?;
        let tq = twist_phase(ec, &xa, TwistRoute::Q, &p, &q).map_err(e("twist"))?;
        let expected = pair(&a.f, &a.g).map_err(e("pair"))?;
        if tp != expected || tq != expected {
            return Err(format!("twist of {}: routes give {tp} and {tq}, expected {expected}", a.name));
        }
        checked += 1;
    }
    Ok(checked)
}

fn braiding() -> Outcome {
    let c4 = product_phases(&catalog::cycle(4), 1, 2)?;
    // the plane itself: one electric and one magnetic charge
    let m = PlanarModel::new(&catalog::point(), 2).map_err(e("model"))?;
    let grp = support::cyclic(2);
    let one_f = Chain::single(&grp, 0, "d0:p", &[1]).map_err(e("chain"))?;
    let one_g = Cochain::single(&grp, 0, "d0:p", &[1]).map_err(e("cochain"))?;
    let em = m.charge(&one_f, &Cochain::zero(&grp, 0)).map_err(e("charge"))?;
    let mm = m.charge(&Chain::zero(&grp, 0), &one_g).map_err(e("charge"))?;
    let ec = m.complex();
    let mut t2 = TransportData::zero(ec, &grp, 1);
    t2.q = m.rotation_cochain(&one_g).map_err(e("rotation"))?;
    let general = braiding_phase_general(ec, &em, &mm, &TransportData::zero(ec, &grp, 1), &t2).map_err(e("general"))?;
    let inf = braiding_phase_at_infinity(ec, &em, &t2.p, &t2.q).map_err(e("at infinity"))?;
    if general != half() || inf != half() {
        return Err(format!("plane e-m: general {general}, at infinity {inf}"));
    }
    Ok(format!("C4 x plane: {c4} braidings and twists exact; plane e-m exponent {general} on both routes"))
}

// 5

fn properties(cases: u64) -> Outcome {
    let suites: Vec<(&str, Box<dyn Fn(u64) -> support::Check>)> = vec![
        ("d^2 = 0", Box::new(support::differential_squares)),
        ("exact sequences", Box::new(support::les_exactness)),
        ("pairing at infinity", Box::new(support::pairing_at_infinity_independence)),
        ("polarization", Box::new(support::polarization_independence)),
        ("braiding, p + p^ + d e", Box::new(|s| support::freedom_in_braiding(s, Some(0)))),
        ("braiding, q + q^ + dT f", Box::new(|s| support::freedom_in_braiding(s, Some(1)))),
        ("braiding, p + p'", Box::new(|s| support::freedom_in_braiding(s, Some(2)))),
        ("braiding, q + q'", Box::new(|s| support::freedom_in_braiding(s, Some(3)))),
        ("transporters", Box::new(support::transporter_round_trip)),
    ];
    let mut bad = Vec::new();
    for (name, check) in &suites {
        let failures = support::run_cases(cases, 1 << 20, check);
        if let Some((seed, m)) = failures.first() {
            bad.push(format!("{name}: {} failures, first at seed {seed}: {m}", failures.len()));
        }
    }
    if bad.is_empty() {
        Ok(format!("{} suites x {cases} cases", suites.len()))
    } else {
        Err(bad.join("; "))
    }
}

// 6

fn defect_floor(v: usize) -> usize {
    // over Z2 on the plane the reachable minimum is the parity of the count
    v % 2
}

fn ground_soundness() -> Outcome {
    let plane = catalog::plane(2);
    let grp = support::cyclic(2);
    let ctx = HomologyContext::new(&plane, &grp);
    let ray = realize(&plane, &ctx.presentation(GroupKind::HomologyAtInfinity, 0).map_err(e("H^inf"))?.generators()[0])
        .map_err(e("realize"))?;
    let ray = ray.as_chain().cloned().ok_or("ray")?;
    let dual = realize(&plane, &ctx.presentation(GroupKind::CohomologyAtInfinity, 1).map_err(e("H_inf"))?.generators()[0])
        .map_err(e("realize"))?;
    let dual = dual.as_cochain().cloned().ok_or("dual ray")?;
    for (what, x) in [
        ("single Z defect", Excitation::from_chain(&plane, ray.clone())),
        ("single X defect", Excitation::from_cochain(&plane, dual.clone())),
    ] {
        match is_ground(&plane, &x, 4).map_err(e("is_ground"))? {
            GroundVerdict::Yes { certificate } if certificate.radius == 4 => {}
            other => return Err(format!("{what}: {other:?}")),
        }
    }
    let edge = Chain::single(&grp, 1, &catalog::hedge(0, 0), &[1]).map_err(e("edge"))?;
    let open = Excitation::from_chain(&plane, LfChain::from_finite(&plane, edge).map_err(e("lift"))?);
    match is_ground(&plane, &open, 4).map_err(e("is_ground"))? {
        GroundVerdict::No { witness, before: 2, after: 0 } if verify_ground_witness(&plane, &open, &witness).map_err(e("witness"))? => {}
        other => return Err(format!("open string: {other:?}")),
    }
    // random sparse excitations against the parity floor
    let t = plane.truncation(1).map_err(e("truncation"))?;
    let edges = t.complex().cells(1).to_vec();
    let (mut yes, mut no, mut unknown) = (0, 0, 0);
    for seed in 0..200u64 {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut gamma = if rng.gen_bool(0.5) { ray.clone() } else { LfChain::zero(&plane, &grp, 1) };
        let mut delta = if rng.gen_bool(0.5) { dual.clone() } else { LfCochain::zero(&plane, &grp, 1) };
        for _ in 0..rng.gen_range(0..3) {
            let l = &edges[rng.gen_range(0..edges.len())];
            gamma = gamma.add_finite(&Chain::single(&grp, 1, l, &[1]).map_err(e("edge"))?).map_err(e("add"))?;
        }
        for _ in 0..rng.gen_range(0..3) {
            let l = &edges[rng.gen_range(0..edges.len())];
            delta = delta.add_finite(&Cochain::single(&grp, 1, l, &[1]).map_err(e("edge"))?).map_err(e("add"))?;
        }
        let x = Excitation::new(gamma, delta).map_err(e("excitation"))?;
        let wz = x.z_defects(&plane).map_err(e("defects"))?.support_size();
        let wx = x.x_defects(&plane).map_err(e("defects"))?.support_size();
        let minimal = wz == defect_floor(wz) && wx == defect_floor(wx);
        match is_ground(&plane, &x, 4).map_err(e("is_ground"))? {
            GroundVerdict::Yes { .. } if minimal => yes += 1,
            GroundVerdict::No { witness, before, after }
                if !minimal && after < before && verify_ground_witness(&plane, &x, &witness).map_err(e("witness"))? =>
            {
                no += 1
            }
            GroundVerdict::Unknown { .. } if !minimal => unknown += 1,
            other => return Err(format!("seed {seed}, defects ({wz}, {wx}): {other:?}")),
        }
    }
    Ok(format!("single defects yes at radius 4, open string no; random: {yes} yes, {no} no, {unknown} unknown, all sound"))
}

// 7

const GOLDEN_COMMANDS: &[&[&str]] = &[
    &["logical", "--catalog", "sigma_k", "--k", "3", "--n", "1", "--G", "2"],
    &["homology", "--catalog", "plane", "--dim-at-infinity", "0", "--G", "2"],
    &["verify", "--catalog", "torus", "--size", "2", "--G", "2"],
    &["homology", "--catalog", "sigma_k", "--k", "5", "--format", "table"],
    &["logical", "--catalog", "genus", "--genus", "2", "--n", "1"],
    &["logical", "--catalog", "ising_star", "--ends", "4", "--n", "0"],
    &["homology", "--catalog", "product_with_plane", "--factor", "torus", "--factor-size", "2", "--size", "1", "--kind", "at-infinity"],
    &["braid", "--catalog", "product_with_plane", "--factor", "cycle", "--factor-size", "4", "--n", "1"],
    &["stabilizers", "--catalog", "torus", "--size", "3", "--format", "table"],
    &["charges", "--catalog", "plane", "--n", "1"],
    &["validate", "--catalog", "sigma_k", "--k", "2"],
];

fn run_cli(args: &[&str]) -> Result<(bool, Vec<u8>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cwtoric")).args(args).output().map_err(e("spawn"))?;
    Ok((out.status.success(), [out.stdout, out.stderr].concat()))
}

fn determinism() -> Outcome {
    for args in GOLDEN_COMMANDS {
        let (ok1, a) = run_cli(args)?;
        let (ok2, b) = run_cli(args)?;
        if !ok1 || !ok2 {
            return Err(format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&a)));
        }
        if a != b {
            return Err(format!("`{}` differs between runs", args.join(" ")));
        }
    }
    let json = |args: &[&str]| -> Result<serde_json::Value, String> {
        let (_, out) = run_cli(args)?;
        serde_json::from_slice(&out).map_err(e("json"))
    };
    let l = json(GOLDEN_COMMANDS[0])?;
    if l["c"] != 4.0 || l["q"] != 0.0 {
        return Err(format!("sigma_3 logical gives c = {}, q = {}", l["c"], l["q"]));
    }
    let h = json(GOLDEN_COMMANDS[1])?;
    if h["groups"][0]["group"] != serde_json::json!([2]) {
        return Err(format!("plane H^inf_0 reported as {}", h["groups"][0]["group"]));
    }
    let v = json(GOLDEN_COMMANDS[2])?;
    if v["all_pass"] != true {
        return Err("verify on the 2x2 torus reports a failure".into());
    }
    Ok(format!("{} commands byte-identical across two runs", GOLDEN_COMMANDS.len()))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("example spaces", goldens),
        ("line counterexample", line_counterexample),
        ("oracle equivalence", oracle),
        ("product braiding and twist", braiding),
        ("property suites", || properties(1000)),
        ("ground-state decision", ground_soundness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {} {name}: {msg} [{secs:.1} s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg} [{secs:.1} s]", i + 1)
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
