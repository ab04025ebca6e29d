use std::path::Path;

use cwtoric_core::chains::{pair, Chain, ChainBlob, Cochain, FinVec, LfChain, LfCochain};
use cwtoric_core::complex::{Built, EndedComplex, FiniteComplex};
use cwtoric_core::excitations::planar::PlanarModel;
use cwtoric_core::excitations::{
    braiding_phase_alternative, braiding_phase_at_infinity, braiding_phase_general, classes_at_infinity, is_ground,
    polarization_phase, polarization_tests, twist_phase, Excitation, GroundVerdict, TransportData, TwistRoute,
};
use cwtoric_core::homology::{FiniteCohomology, FiniteHomology, GroupKind, HomologyContext};
use cwtoric_core::{css, logical, oracle, AbelianCoefficients, PhaseQZ};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::source::{read_json, CliError, CliResult};
use crate::table::{factors, Table};
use crate::{
    BraidArgs, ChargeArgs, Common, Format, HomologyArgs, KindArg, LogicalArgs, StabilizerArgs, ValidateArgs, VerifyArgs,
};

pub struct Output {
    pub text: String,
    pub success: bool,
}

fn ok(text: String) -> CliResult<Output> {
    Ok(Output { text, success: true })
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn group(c: &Common) -> CliResult<AbelianCoefficients> {
    Ok(AbelianCoefficients::new(c.group.clone())?)
}

fn ended(b: Built) -> EndedComplex {
    b.into_ended()
}

fn context(c: &Common) -> CliResult<(EndedComplex, AbelianCoefficients, HomologyContext)> {
    let e = ended(c.source.load_valid()?);
    let g = group(c)?;
    if c.depth < 1 || c.max_depth < c.depth {
        return Err(CliError::Usage(format!("need 1 <= depth <= max-depth, got {} and {}", c.depth, c.max_depth)));
    }
    let ctx = HomologyContext::with_depth(&e, &g, c.depth, c.max_depth);
    Ok((e, g, ctx))
}

pub fn validate(a: &ValidateArgs) -> CliResult<Output> {
    let b = a.source.load()?;
    let (report, core, ends) = match &b {
        Built::Finite(c) => (c.validate(), c.clone(), 0),
        Built::Ended(e) => (e.validate(), e.core().clone(), e.num_ends()),
    };
    let cells: Vec<usize> = (0..core.dim_count()).map(|d| core.num_cells(d)).collect();
    let text = match a.format {
        Format::Json => to_json(&json!({
            "complex": a.source.describe(),
            "cells": cells,
            "ends": ends,
            "euler_characteristic": core.euler_characteristic(),
            "valid": report.valid,
            "violations": report.violations,
        })),
        Format::Table => {
            let mut t = Table::new(["field", "value"]);
            t.row(["complex".to_string(), a.source.describe()]);
            t.row(["cells per dimension".to_string(), format!("{cells:?}")]);
            t.row(["ends".to_string(), ends.to_string()]);
            t.row(["valid".to_string(), report.valid.to_string()]);
            for v in &report.violations {
                t.row(["violation".to_string(), format!("{} {:?} = {}", v.kind, v.cells, v.value)]);
            }
            t.render()
        }
    };
    Ok(Output { text, success: report.valid })
}

fn kind_of(k: KindArg) -> GroupKind {
    match k {
        KindArg::Homology => GroupKind::Homology,
        KindArg::Cohomology => GroupKind::Cohomology,
        KindArg::LfHomology => GroupKind::LfHomology,
        KindArg::LfCohomology => GroupKind::LfCohomology,
        KindArg::AtInfinity => GroupKind::HomologyAtInfinity,
        KindArg::CohomologyAtInfinity => GroupKind::CohomologyAtInfinity,
    }
}

pub fn homology(a: &HomologyArgs) -> CliResult<Output> {
    let (e, _g, ctx) = context(&a.common)?;
    let top = e.top_dim().unwrap_or(0);
    let (kinds, dims): (Vec<GroupKind>, Vec<usize>) = match (a.dim_at_infinity, a.kind, a.dim) {
        (Some(d), _, _) => (vec![GroupKind::HomologyAtInfinity], vec![d]),
        (None, k, d) => (
            k.map_or_else(|| GroupKind::ALL.to_vec(), |k| vec![kind_of(k)]),
            d.map_or_else(|| (0..=top).collect(), |d| vec![d]),
        ),
    };
    let mut groups = Vec::new();
    for &kind in &kinds {
        for &dim in &dims {
            let p = ctx.presentation(kind, dim)?;
            let mut entry = json!({
                "kind": kind,
                "symbol": kind.symbol(dim),
                "dim": dim,
                "group": p.factors(),
                "order": p.order().to_string(),
                "depth": p.depth(),
            });
            if a.generators {
                entry["generators"] = serde_json::to_value(p.generators()).expect("json");
            }
            groups.push(entry);
        }
    }
    let text = match a.common.format {
        Format::Json => to_json(&json!({
            "complex": a.common.source.describe(),
            "coefficients": a.common.group,
            "groups": groups,
        })),
        Format::Table => {
            let mut t = Table::new(["group", "invariant factors", "order", "depth"]);
            for g in &groups {
                let f: Vec<u64> = serde_json::from_value(g["group"].clone()).expect("factors");
                t.row([
                    g["symbol"].as_str().unwrap_or("").to_string(),
                    factors(&f),
                    g["order"].as_str().unwrap_or("").to_string(),
                    g["depth"].to_string(),
                ]);
            }
            t.render()
        }
    };
    ok(text)
}

pub fn logical(a: &LogicalArgs) -> CliResult<Output> {
    let (_e, _g, ctx) = context(&a.common)?;
    let r = logical::logical_report_in(&ctx, a.n)?;
    let text = match a.common.format {
        Format::Json => to_json(&r),
        Format::Table => {
            let mut t = Table::new(["quantity", "value"]);
            t.row(["n".to_string(), r.n.to_string()]);
            t.row(["coefficients".to_string(), factors(&r.group)]);
            t.row([format!("H_{}", r.n), factors(&r.homology)]);
            t.row([format!("H^{}_lf", r.n), factors(&r.lf_cohomology)]);
            t.row(["|H|".to_string(), r.total_order.to_string()]);
            t.row(["|H_0| (radical)".to_string(), r.radical_order.to_string()]);
            t.row(["radical method".to_string(), format!("{:?}", r.radical_method).to_lowercase()]);
            t.row(["classical bits c".to_string(), format!("{}", r.c)]);
            t.row(["qubits q".to_string(), format!("{}", r.q)]);
            t.row(["structure".to_string(), r.structure.clone()]);
            let mut out = t.render();
            out += "\npairing matrix\n";
            for row in &r.pairing_matrix {
                let cells: Vec<String> = row.iter().map(PhaseQZ::to_string).collect();
                out += &format!("  {}\n", cells.join(" "));
            }
            out
        }
    };
    ok(text)
}

pub fn stabilizers(a: &StabilizerArgs) -> CliResult<Output> {
    let b = a.common.source.load_valid()?;
    let g = group(&a.common)?;
    let (complex, truncation, dynamics) = match &b {
        Built::Finite(c) => (c.clone(), None, None),
        Built::Ended(e) => {
            let t = e.truncation(a.common.depth)?;
            (t.complex().clone(), Some(a.common.depth), Some(css::dynamics_well_defined(e, a.n, &g)?))
        }
    };
    let s = css::stabilizers(&complex, a.n, &g)?;
    let dim = css::code_dimension(&complex, a.n, &g)?;
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.display().to_string(), message: e.to_string() })?;
        for (i, (x, z)) in s.x_checks.iter().zip(&s.z_checks).enumerate() {
            write_file(&dir.join(format!("x_{i}_Z{}.pcm", x.modulus)), &x.to_pcm())?;
            write_file(&dir.join(format!("z_{i}_Z{}.pcm", z.modulus)), &z.to_pcm())?;
        }
    }
    let (wx, wz) = s.max_weights();
    let text = match a.common.format {
        Format::Json => to_json(&json!({
            "complex": a.common.source.describe(),
            "truncation_depth": truncation,
            "n": a.n,
            "qudits": s.qudits.len(),
            "max_star_weight": wx,
            "max_plaquette_weight": wz,
            "stabilizer_order": s.stabilizer_order().to_string(),
            "code_dimension": dim.to_string(),
            "orthogonal": s.is_orthogonal(),
            "dynamics": dynamics,
            "stabilizers": s,
        })),
        Format::Table => {
            let mut t = Table::new(["quantity", "value"]);
            t.row(["qudits".to_string(), s.qudits.len().to_string()]);
            t.row(["star checks".to_string(), s.x_rows.len().to_string()]);
            t.row(["plaquette checks".to_string(), s.z_rows.len().to_string()]);
            t.row(["max weights".to_string(), format!("({wx}, {wz})")]);
            t.row(["code dimension".to_string(), dim.to_string()]);
            if let Some(d) = &dynamics {
                t.row(["dynamics well defined".to_string(), d.well_defined.to_string()]);
            }
            let mut out = t.render();
            for (x, z) in s.x_checks.iter().zip(&s.z_checks) {
                out += &format!("\nstar checks over Z{}\n{}", x.modulus, x.to_pcm());
                out += &format!("\nplaquette checks over Z{}\n{}", z.modulus, z.to_pcm());
            }
            out
        }
    };
    ok(text)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

#[derive(Deserialize)]
struct ExcitationFile {
    gamma: ChainBlob,
    delta: ChainBlob,
}

#[derive(Deserialize)]
struct TransportFile {
    gamma_hat: ChainBlob,
    delta_hat: ChainBlob,
    p: ChainBlob,
    q: ChainBlob,
}

#[derive(Deserialize)]
struct BraidFile {
    x1: ExcitationFile,
    x2: ExcitationFile,
    t1: TransportFile,
    t2: TransportFile,
}

fn excitation(e: &EndedComplex, g: &AbelianCoefficients, f: &ExcitationFile) -> CliResult<Excitation> {
    Ok(Excitation::new(LfChain::from_blob(e, g, &f.gamma)?, LfCochain::from_blob(e, g, &f.delta)?)?)
}

fn transport(e: &EndedComplex, g: &AbelianCoefficients, f: &TransportFile) -> CliResult<TransportData> {
    let finite = |b: &ChainBlob| !b.tails.is_empty();
    if finite(&f.gamma_hat) || finite(&f.delta_hat) {
        return Err(CliError::Usage("gamma_hat and delta_hat must be finite".into()));
    }
    Ok(TransportData {
        gamma_hat: Chain::from_coeffs(g, f.gamma_hat.dim, &f.gamma_hat.coeffs)?,
        delta_hat: Cochain::from_coeffs(g, f.delta_hat.dim, &f.delta_hat.coeffs)?,
        p: LfChain::from_blob(e, g, &f.p)?,
        q: LfCochain::from_blob(e, g, &f.q)?,
    })
}

fn cells<K: cwtoric_core::chains::Variance>(v: &FinVec<K>) -> Vec<String> {
    v.support().cloned().collect()
}

pub fn charges(a: &ChargeArgs) -> CliResult<Output> {
    let (e, g, ctx) = context(&a.common)?;
    let n = a.n;
    let gamma_sector = if n >= 1 { Some(ctx.presentation(GroupKind::HomologyAtInfinity, n - 1)?) } else { None };
    let delta_sector = ctx.presentation(GroupKind::CohomologyAtInfinity, n)?;
    let mut report = json!({
        "complex": a.common.source.describe(),
        "n": n,
        "electric_sectors": gamma_sector.as_ref().map(|p| p.factors().to_vec()),
        "magnetic_sectors": delta_sector.factors(),
    });
    let mut t = Table::new(["quantity", "value"]);
    t.row([
        format!("H^inf_{}", n as i64 - 1),
        gamma_sector.as_ref().map_or("-".to_string(), |p| factors(p.factors())),
    ]);
    t.row([format!("H^{n}_inf"), factors(delta_sector.factors())]);
    if let Some(path) = &a.excitation {
        let x = excitation(&e, &g, &read_json::<ExcitationFile>(path)?)?;
        if x.n() != n {
            return Err(CliError::Usage(format!("excitation has dimension {}, expected {n}", x.n())));
        }
        let zd = x.z_defects(&e)?;
        let xd = x.x_defects(&e)?;
        let classes = classes_at_infinity(&ctx, &x)?;
        let verdict = is_ground(&e, &x, a.budget)?;
        let (ds, cs) = polarization_tests(&ctx, n)?;
        let mut pol = Vec::new();
        for (i, d) in ds.iter().enumerate() {
            pol.push(json!({ "test": format!("H^inf_{n} generator {i}"), "phase": polarization_phase(&e, &x, Some(d), None)? }));
        }
        for (i, c) in cs.iter().enumerate() {
            pol.push(json!({ "test": format!("H^{}_inf generator {i}", n - 1), "phase": polarization_phase(&e, &x, None, Some(c))? }));
        }
        let energy = zd.support_size() + xd.support_size();
        t.row(["energy".to_string(), energy.to_string()]);
        t.row(["star defects".to_string(), cells(&zd).join(" ")]);
        t.row(["plaquette defects".to_string(), cells(&xd).join(" ")]);
        t.row(["frustration free".to_string(), x.is_frustration_free(&e)?.to_string()]);
        if let Some(c) = &classes.gamma {
            t.row(["[gamma] at infinity".to_string(), format!("{:?}", c.coordinates)]);
        }
        t.row(["[delta] at infinity".to_string(), format!("{:?}", classes.delta.coordinates)]);
        let v = match &verdict {
            GroundVerdict::Yes { certificate } => format!("yes (radius {})", certificate.radius),
            GroundVerdict::No { before, after, .. } => format!("no ({before} -> {after} defects)"),
            GroundVerdict::Unknown { reason, .. } => format!("unknown ({reason})"),
        };
        t.row(["ground".to_string(), v]);
        for p in &pol {
            t.row([format!("polarization {}", p["test"].as_str().unwrap_or("")), p["phase"].as_str().unwrap_or("").to_string()]);
        }
        report["excitation"] = json!({
            "energy": energy,
            "star_defects": cells(&zd),
            "plaquette_defects": cells(&xd),
            "frustration_free": x.is_frustration_free(&e)?,
            "classes_at_infinity": classes,
            "ground": verdict,
            "polarization": pol,
        });
    }
    let text = match a.common.format {
        Format::Json => to_json(&report),
        Format::Table => t.render(),
    };
    ok(text)
}

#[derive(Serialize)]
struct PairRow {
    x1: String,
    x2: String,
    at_infinity: PhaseQZ,
    general: PhaseQZ,
    alternative: Option<PhaseQZ>,
    expected: PhaseQZ,
}

#[derive(Serialize)]
struct TwistRow {
    charge: String,
    p_route: PhaseQZ,
    q_route: PhaseQZ,
    expected: PhaseQZ,
}

pub fn braid(a: &BraidArgs) -> CliResult<Output> {
    let g = group(&a.common)?;
    if let Some(path) = &a.data {
        let e = ended(a.common.source.load_valid()?);
        let f: BraidFile = read_json(path)?;
        let x1 = excitation(&e, &g, &f.x1)?;
        let x2 = excitation(&e, &g, &f.x2)?;
        let t1 = transport(&e, &g, &f.t1)?;
        let t2 = transport(&e, &g, &f.t2)?;
        let y1 = t1.target(&e, &x1)?;
        let y2 = t2.target(&e, &x2)?;
        y1.energy(&e)?;
        y2.energy(&e)?;
        let general = braiding_phase_general(&e, &x1, &x2, &t1, &t2)?;
        let alt = braiding_phase_alternative(&e, &x1, &x2, &t1, &t2)?;
        let text = match a.common.format {
            Format::Json => to_json(&json!({ "exponent": general, "alternative": alt })),
            Format::Table => {
                let mut t = Table::new(["quantity", "value"]);
                t.row(["braiding exponent".to_string(), general.to_string()]);
                t.row(["alternative form".to_string(), alt.map_or("undefined".to_string(), |p| p.to_string())]);
                t.render()
            }
        };
        return ok(text);
    }
    let spec = a.common.source.spec();
    if spec.as_ref().map(|s| s.name.as_str()) != Some("product_with_plane") {
        return Err(CliError::Usage(
            "braiding needs explicit transport data (--data) outside the product_with_plane catalog".into(),
        ));
    }
    let spec = spec.expect("checked");
    let fspec = spec.factor.as_deref().cloned().unwrap_or_else(|| cwtoric_core::CatalogSpec::named("cycle"));
    let factor = match cwtoric_core::complex::build_named(&fspec)? {
        Built::Finite(c) => c,
        Built::Ended(_) => return Err(CliError::Usage("the factor must be finite".into())),
    };
    let (pairs, twists) = planar_phases(&factor, spec.size.unwrap_or(2), a.n, &g)?;
    let text = match a.common.format {
        Format::Json => to_json(&json!({
            "complex": a.common.source.describe(),
            "n": a.n,
            "braiding": pairs,
            "twist": twists,
        })),
        Format::Table => {
            let mut t = Table::new(["x1", "x2", "at infinity", "general", "alternative", "<f2,g1>+<f1,g2>"]);
            for r in &pairs {
                t.row([
                    r.x1.clone(),
                    r.x2.clone(),
                    r.at_infinity.to_string(),
                    r.general.to_string(),
                    r.alternative.map_or("-".to_string(), |p| p.to_string()),
                    r.expected.to_string(),
                ]);
            }
            let mut out = t.render();
            let mut t = Table::new(["charge", "twist (p route)", "twist (q route)", "<f,g>"]);
            for r in &twists {
                t.row([r.charge.clone(), r.p_route.to_string(), r.q_route.to_string(), r.expected.to_string()]);
            }
            out += "\n";
            out += &t.render();
            out
        }
    };
    ok(text)
}

/// Basis charges `(f_i, 0)`, `(0, g_j)` and dyons `(f_i, g_j)` on
/// `F x plane` with their canonical rotation data.
fn planar_phases(
    factor: &FiniteComplex,
    size: usize,
    n: usize,
    g: &AbelianCoefficients,
) -> CliResult<(Vec<PairRow>, Vec<TwistRow>)> {
    if n == 0 {
        return Err(CliError::Usage("point charges on F x plane need n >= 1".into()));
    }
    let m = PlanarModel::new(factor, size)?;
    let e = m.complex();
    let fs: Vec<Chain> = FiniteHomology::absolute(factor, n - 1, g).generators().to_vec();
    let gs: Vec<Cochain> = FiniteCohomology::absolute(factor, n - 1, g).generators().to_vec();
    let zc = Chain::zero(g, n - 1);
    let zk = Cochain::zero(g, n - 1);
    let mut basis: Vec<(String, Chain, Cochain)> = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        basis.push((format!("e{i}"), f.clone(), zk.clone()));
    }
    for (j, c) in gs.iter().enumerate() {
        basis.push((format!("m{j}"), zc.clone(), c.clone()));
    }
    let mut pairs = Vec::new();
    for (n1, f1, g1) in &basis {
        for (n2, f2, g2) in &basis {
            let x1 = m.charge(f1, g1)?;
            let x2 = m.charge(f2, g2)?;
            let t1 = TransportData::zero(e, g, n);
            let mut t2 = TransportData::zero(e, g, n);
            t2.p = m.rotation_chain(f2)?;
            t2.q = m.rotation_cochain(g2)?;
            pairs.push(PairRow {
                x1: n1.clone(),
                x2: n2.clone(),
                at_infinity: braiding_phase_at_infinity(e, &x1, &t2.p, &t2.q)?,
                general: braiding_phase_general(e, &x1, &x2, &t1, &t2)?,
                alternative: braiding_phase_alternative(e, &x1, &x2, &t1, &t2)?,
                expected: pair(f2, g1)?.add(pair(f1, g2)?),
            });
        }
    }
    let mut twists = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        for (j, c) in gs.iter().enumerate() {
            let x = m.charge(f, c)?;
            let p = m.rotation_chain(f)?;
            let q = m.rotation_cochain(c)?;
            twists.push(TwistRow {
                charge: format!("e{i}m{j}"),
                p_route: twist_phase(e, &x, TwistRoute::P, &p, &q)?,
                q_route: twist_phase(e, &x, TwistRoute::Q, &p, &q)?,
                expected: pair(f, c)?,
            });
        }
    }
    Ok((pairs, twists))
}

#[derive(Serialize)]
struct Check {
    name: String,
    expected: String,
    observed: String,
    pass: bool,
}

fn check(name: impl Into<String>, expected: impl ToString, observed: impl ToString) -> Check {
    let (expected, observed) = (expected.to_string(), observed.to_string());
    Check { name: name.into(), pass: expected == observed, expected, observed }
}

pub fn verify(a: &VerifyArgs) -> CliResult<Output> {
    let b = a.common.source.load_valid()?;
    let Built::Finite(c) = b else {
        return Err(CliError::Usage("verify needs a finite complex".into()));
    };
    let g = group(&a.common)?;
    let n = a.n;
    let cap = oracle::cap_from_env();
    let summary = oracle::summarize(&c, n, &g, cap)?;
    let model = oracle::DenseModel::new(&c, n, &g, cap)?;
    let e = EndedComplex::from_finite(c.clone());
    let mut checks = vec![
        check("ground dimension = |G|^N/|S|", summary.stabilizer_dimension, summary.ground_dimension),
        check("|G|^N/|S| = |H_n|", summary.homology_order, summary.stabilizer_dimension),
        check(
            format!("[A, B] = 0 over {} pairs", summary.commutation_pairs),
            0,
            summary.commutation_failures,
        ),
        check("A^2 = A, B^2 = B", true, summary.projections),
    ];
    let unit: Vec<i64> = std::iter::once(1).chain(std::iter::repeat(0)).take(g.rank()).collect();
    let qudits = c.cells(n);
    for l in qudits.iter().take(4) {
        let gamma = Chain::single(&g, n, l, &unit)?;
        let x = Excitation::from_chain(&e, LfChain::from_finite(&e, gamma.clone())?);
        checks.push(check(
            format!("energy of Z string on {l}"),
            x.energy(&e)?,
            model.excitation_energy(&gamma, &Cochain::zero(&g, n))?,
        ));
        let delta = Cochain::single(&g, n, l, &unit)?;
        let x = Excitation::from_cochain(&e, LfCochain::from_finite(&e, delta.clone())?);
        checks.push(check(
            format!("energy of X string on {l}"),
            x.energy(&e)?,
            model.excitation_energy(&Chain::zero(&g, n), &delta)?,
        ));
    }
    if let (Some(first), Some(last)) = (qudits.first(), qudits.last()) {
        let a_ = Cochain::single(&g, n, first, &unit)?;
        let b_ = Chain::single(&g, n, last, &unit)?;
        checks.push(check("X^a Z^b = e(-<b,a>) Z^b X^a", true, model.check_weyl_relation(&a_, &b_)?));
    }
    if n >= 1 {
        if let Some(v) = c.cells(n - 1).first() {
            let stab = Cochain::single(&g, n - 1, v, &unit)?.coboundary(&c)?;
            let z = Chain::zero(&g, n);
            let k = Cochain::zero(&g, n);
            let val = model.expectation(&z, &k, &stab, &z)?;
            checks.push(check(format!("<X^(dT {v})> in the ground state"), 1, val));
        }
    }
    let success = checks.iter().all(|c| c.pass);
    let text = match a.common.format {
        Format::Json => to_json(&json!({
            "complex": a.common.source.describe(),
            "n": n,
            "states": summary.states,
            "checks": checks,
            "all_pass": success,
        })),
        Format::Table => {
            let mut t = Table::new(["check", "expected", "observed", "result"]);
            for ch in &checks {
                t.row([ch.name.clone(), ch.expected.clone(), ch.observed.clone(), if ch.pass { "PASS" } else { "FAIL" }.to_string()]);
            }
            t.render()
        }
    };
    Ok(Output { text, success })
}
