//! Logical information of the ground states: the pairing between
//! `H_n(E; G^)` and `H^n_lf(E; G)`, its radical, and the resulting counts of
//! classical bits and qubits.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::chains::pair;
use crate::complex::EndedComplex;
use crate::error::{Error, Result};
use crate::groups::{AbelianCoefficients, PhaseQZ};
use crate::homology::{GroupKind, HomologyContext, Presentation};
use crate::linalg::{smith, IntMatrix};

/// Above this many elements the radical is found by linear algebra only.
pub const ENUMERATION_LIMIT: u128 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadicalMethod {
    Enumeration,
    Annihilators,
}

#[derive(Clone, Debug, Serialize)]
pub struct LogicalReport {
    pub n: usize,
    pub group: Vec<u64>,
    pub homology: Vec<u64>,
    pub lf_cohomology: Vec<u64>,
    pub homology_order: u128,
    pub lf_cohomology_order: u128,
    pub pairing_matrix: Vec<Vec<PhaseQZ>>,
    /// `|H|` for `H = H_n x H^n_lf`.
    pub total_order: u128,
    pub radical_order: u128,
    /// `sqrt(|H| / |H_0|)`, the dimension of the matrix factor.
    pub quantum_order: u128,
    pub radical_method: RadicalMethod,
    pub c: f64,
    pub q: f64,
    pub structure: String,
}

/// Pairing of the generators of two presentations.
pub fn pairing_between(hom: &Presentation, lf: &Presentation) -> Result<Vec<Vec<PhaseQZ>>> {
    let mut rows = Vec::new();
    for a in hom.generators() {
        let a = a.as_chain().and_then(|c| c.as_finite()).ok_or_else(|| Error::Structural("expected a finite cycle".into()))?;
        let mut row = Vec::new();
        for b in lf.generators() {
            let b = b
                .as_cochain()
                .and_then(|c| c.as_finite())
                .ok_or_else(|| Error::Structural("expected a finite cocycle".into()))?;
            row.push(pair(a, b)?);
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn pairing_matrix(e: &EndedComplex, n: usize, g: &AbelianCoefficients) -> Result<Vec<Vec<PhaseQZ>>> {
    let ctx = HomologyContext::new(e, g);
    pairing_between(&*ctx.presentation(GroupKind::Homology, n)?, &*ctx.presentation(GroupKind::LfCohomology, n)?)
}

fn common_denominator(m: &[Vec<PhaseQZ>]) -> u64 {
    m.iter().flatten().fold(1u64, |acc, p| acc.lcm(&p.denominator()))
}

/// Number of `x` in `prod Z_{f_i}` with `sum_i x_i m_ij = 0` for all `j`.
fn left_annihilator_order(factors: &[u64], m: &[Vec<PhaseQZ>], cols: usize) -> u128 {
    let total: u128 = factors.iter().map(|&f| f as u128).product();
    if cols == 0 || factors.is_empty() {
        return total;
    }
    let n = common_denominator(m);
    // Subgroup of (Z_n)^cols generated by the rows; its order is the image.
    let k = factors.len();
    let mut a = IntMatrix::zeros(cols, k + cols);
    for (i, row) in m.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            a.set(j, i, BigInt::from(p.numerator() as u128 * (n / p.denominator()) as u128));
        }
    }
    for j in 0..cols {
        a.set(j, k + j, BigInt::from(n));
    }
    let coker: BigInt = smith(&a).diag.iter().product();
    let image = BigInt::from(n).pow(cols as u32) / coker;
    (BigInt::from(total) / image).to_u128().expect("annihilator order fits")
}

fn transpose(m: &[Vec<PhaseQZ>], rows: usize, cols: usize) -> Vec<Vec<PhaseQZ>> {
    (0..cols).map(|j| (0..rows).map(|i| m[i][j]).collect()).collect()
}

/// Radical of the antisymmetrized form on `H_n x H^n_lf`, by the product of
/// the two annihilators.
pub fn radical_by_annihilators(hom: &[u64], lf: &[u64], m: &[Vec<PhaseQZ>]) -> u128 {
    left_annihilator_order(hom, m, lf.len()) * left_annihilator_order(lf, &transpose(m, hom.len(), lf.len()), hom.len())
}

/// Radical by checking every element of `H` against the generators.
pub fn radical_by_enumeration(hom: &[u64], lf: &[u64], m: &[Vec<PhaseQZ>]) -> u128 {
    let factors: Vec<u64> = hom.iter().chain(lf).copied().collect();
    let a = hom.len();
    let gens = factors.len();
    // form((x,y),(x',y')) = <x, y'> - <x', y>
    let form = |x: &[u64], unit: usize| -> PhaseQZ {
        if unit < a {
            (0..lf.len()).map(|j| m[unit][j].scale(x[a + j] as i64)).sum::<PhaseQZ>().neg()
        } else {
            (0..a).map(|i| m[i][unit - a].scale(x[i] as i64)).sum()
        }
    };
    let mut count = 0u128;
    let mut x = vec![0u64; gens];
    loop {
        if (0..gens).all(|u| form(&x, u).is_zero()) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == gens {
                return count;
            }
            x[i] += 1;
            if x[i] < factors[i] {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

fn format_log(x: f64) -> String {
    if (x - x.round()).abs() < 1e-12 {
        format!("{}", x.round() as i64)
    } else {
        format!("{x:.6}")
    }
}

pub fn logical_report(e: &EndedComplex, n: usize, g: &AbelianCoefficients) -> Result<LogicalReport> {
    let ctx = HomologyContext::new(e, g);
    logical_report_in(&ctx, n)
}

pub fn logical_report_in(ctx: &HomologyContext, n: usize) -> Result<LogicalReport> {
    let hom = ctx.presentation(GroupKind::Homology, n)?;
    let lf = ctx.presentation(GroupKind::LfCohomology, n)?;
    let m = pairing_between(&hom, &lf)?;
    let total = hom.order().checked_mul(lf.order()).ok_or_else(|| Error::Argument("group order overflows".into()))?;
    let by_ann = radical_by_annihilators(hom.factors(), lf.factors(), &m);
    let (radical, method) = if total <= ENUMERATION_LIMIT {
        let by_enum = radical_by_enumeration(hom.factors(), lf.factors(), &m);
        if by_enum != by_ann {
            return Err(Error::Certificate(format!(
                "radical order {by_enum} by enumeration disagrees with {by_ann} from annihilators"
            )));
        }
        (by_enum, RadicalMethod::Enumeration)
    } else {
        (by_ann, RadicalMethod::Annihilators)
    };
    if total % radical != 0 {
        return Err(Error::Certificate(format!("radical order {radical} does not divide {total}")));
    }
    let rest = total / radical;
    let quantum = rest.sqrt();
    if quantum * quantum != rest {
        return Err(Error::Certificate(format!("|H|/|H_0| = {rest} is not a square")));
    }
    let c = (radical as f64).log2();
    let q = (quantum as f64).log2();
    Ok(LogicalReport {
        n,
        group: ctx.group().orders().to_vec(),
        homology: hom.factors().to_vec(),
        lf_cohomology: lf.factors().to_vec(),
        homology_order: hom.order(),
        lf_cohomology_order: lf.order(),
        pairing_matrix: m,
        total_order: total,
        radical_order: radical,
        quantum_order: quantum,
        radical_method: method,
        c,
        q,
        structure: format!("C^{{2^{}}} ⊗ B(C^{{2^{}}})", format_log(c), format_log(q)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::catalog;

    fn z2() -> AbelianCoefficients {
        AbelianCoefficients::cyclic(2).unwrap()
    }

    #[test]
    fn torus_is_symplectic() {
        let e = EndedComplex::from_finite(catalog::torus(3));
        let r = logical_report(&e, 1, &z2()).unwrap();
        assert_eq!(r.radical_order, 1);
        assert_eq!(r.q, 2.0);
        assert_eq!(r.c, 0.0);
    }

    #[test]
    fn sigma_k_bits() {
        let r = logical_report(&catalog::sigma_k(3), 1, &z2()).unwrap();
        assert_eq!(r.c, 4.0);
        assert_eq!(r.q, 0.0);
        assert!(r.pairing_matrix.iter().flatten().all(|p| p.is_zero()));
    }

    #[test]
    fn annihilators_match_enumeration_on_a_nondegenerate_form() {
        let h = PhaseQZ::new(1, 2);
        let m = vec![vec![h, PhaseQZ::ZERO], vec![PhaseQZ::ZERO, PhaseQZ::new(1, 4)]];
        let a = radical_by_annihilators(&[2, 4], &[2, 4], &m);
        assert_eq!(a, 1);
        assert_eq!(radical_by_enumeration(&[2, 4], &[2, 4], &m), 1);
        let m = vec![vec![PhaseQZ::new(1, 2)]];
        assert_eq!(radical_by_annihilators(&[4], &[4], &m), 4);
        assert_eq!(radical_by_enumeration(&[4], &[4], &m), 4);
    }
}
