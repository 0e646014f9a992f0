//! Data-driven verification of the transformation chain.

use serde::{Deserialize, Serialize};

use super::{gauge, mobius, power_substitute, susy_partner, GaugeFactor, MobiusMap, SusyData, TransformError};
use crate::algebra::{parse_birat, parse_ratfunc, BiRatFunc, Field, FmtVar, Poly, RatFunc, RatFuncL, Ring};
use crate::fuchsian::registry::{self, cos_four_arctan, ground_state_log_derivative, potential_v, schrod_weight};
use crate::fuchsian::{fmt_bi, ParamODE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ChainOp {
    Gauge { factors: GaugeFactor },
    Power { k: u32 },
    Mobius { map: MobiusMap, gauge: GaugeFactor },
    /// Expressions in the current variable and λ.
    Susy { w: String, shift: String, weight: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub label: String,
    pub ops: Vec<ChainOp>,
    pub expect: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainScript {
    pub start: String,
    pub stages: Vec<Stage>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub index: usize,
    pub label: String,
    pub expect: String,
    pub matches: bool,
    pub p: String,
    pub q: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difference: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub start: String,
    pub stages: Vec<StageReport>,
    pub identities: Vec<IdentityCheck>,
    pub verified: bool,
}

fn gf(items: &[(&str, &str)]) -> GaugeFactor {
    GaugeFactor::parse(items).expect("static gauge factor")
}

/// The registered chain from the spectral equation to Heun normal form.
pub fn default_chain() -> ChainScript {
    let stage = |label: &str, ops: Vec<ChainOp>, expect: &str| Stage { label: label.into(), ops, expect: expect.into() };
    ChainScript {
        start: "spec".into(),
        stages: vec![
            stage(
                "remove first-order term",
                vec![ChainOp::Gauge { factors: gf(&[("0", "-1"), ("1", "-λ/2"), ("-1", "-λ/2")]) }],
                "specg",
            ),
            stage("Schrödinger form", vec![], "Schrod"),
            stage(
                "supersymmetric partner",
                vec![
                    ChainOp::Susy {
                        w: "(2 - 3ρ^2 - ρ^4)/(ρ(1 - ρ^2)(1 + ρ^2))".into(),
                        shift: "(λ - 1)^2".into(),
                        weight: "(1 - ρ^2)^2".into(),
                    },
                    ChainOp::Gauge { factors: gf(&[("0", "1"), ("1", "λ/2 - 1"), ("-1", "λ/2 - 1")]) },
                ],
                "specss",
            ),
            stage(
                "square variable",
                vec![ChainOp::Gauge { factors: gf(&[("0", "2")]) }, ChainOp::Power { k: 2 }],
                "specssHeun0",
            ),
            stage(
                "Möbius normalization",
                vec![ChainOp::Mobius {
                    map: MobiusMap::ints(2, 0, 1, 1).expect("nondegenerate"),
                    gauge: gf(&[("2", "1 + λ/2")]),
                }],
                "specssHeun",
            ),
        ],
    }
}

fn apply(ode: &ParamODE, op: &ChainOp) -> Result<ParamODE, TransformError> {
    match op {
        ChainOp::Gauge { factors } => Ok(gauge(ode, factors)),
        ChainOp::Power { k } => power_substitute(ode, *k),
        ChainOp::Mobius { map, gauge } => mobius(ode, map, gauge),
        ChainOp::Susy { w, shift, weight } => {
            let s = SusyData {
                w: parse_birat(w, &ode.var)?,
                shift: parse_ratfunc(shift)?,
                weight: parse_birat(weight, &ode.var)?,
            };
            susy_partner(ode, &s)
        }
    }
}

fn poly_difference(got: &Poly<RatFuncL>, want: &Poly<RatFuncL>, part: &str, var: &str) -> Option<String> {
    let n = got.coeffs().len().max(want.coeffs().len());
    (0..n).find(|&k| got.coeff(k) != want.coeff(k)).map(|k| {
        format!(
            "{part} coefficient of {var}^{k}: got {}, expected {}",
            got.coeff(k).fmt_var("λ"),
            want.coeff(k).fmt_var("λ")
        )
    })
}

/// First differing coefficient of two equations, `None` when equal.
pub fn first_difference(got: &ParamODE, want: &ParamODE) -> Option<String> {
    for (name, a, b) in [("p", &got.p, &want.p), ("q", &got.q, &want.q)] {
        if a != b {
            return poly_difference(a.num(), b.num(), &format!("{name} numerator"), &got.var)
                .or_else(|| poly_difference(a.den(), b.den(), &format!("{name} denominator"), &got.var));
        }
    }
    None
}

/// Run a chain from an explicit starting equation; stops at the first
/// mismatch.
pub fn run_chain(start: &ParamODE, script: &ChainScript) -> Result<ChainReport, TransformError> {
    let mut cur = start.clone();
    let mut stages = Vec::new();
    let mut ok = true;
    for (i, st) in script.stages.iter().enumerate() {
        for op in &st.ops {
            cur = apply(&cur, op)?;
        }
        let target = registry::equation(&st.expect).ok_or_else(|| TransformError::UnknownEquation(st.expect.clone()))?;
        let difference = first_difference(&cur, &target);
        let matches = difference.is_none();
        stages.push(StageReport {
            index: i + 1,
            label: st.label.clone(),
            expect: st.expect.clone(),
            matches,
            p: fmt_bi(&cur.p, &cur.var),
            q: fmt_bi(&cur.q, &cur.var),
            difference,
        });
        if !matches {
            ok = false;
            break;
        }
        cur.name = target.name.clone();
    }
    let identities = identity_checks();
    let verified = ok && identities.iter().all(|c| c.holds);
    Ok(ChainReport { start: start.name.clone(), stages, identities, verified })
}

/// Run and turn the first mismatch into an error.
pub fn verify_chain_from(start: &ParamODE, script: &ChainScript) -> Result<ChainReport, TransformError> {
    let rep = run_chain(start, script)?;
    if let Some(s) = rep.stages.iter().find(|s| !s.matches) {
        return Err(TransformError::Mismatch {
            stage: s.index,
            label: s.label.clone(),
            expected: s.expect.clone(),
            location: s.difference.clone().unwrap_or_default(),
        });
    }
    if let Some(c) = rep.identities.iter().find(|c| !c.holds) {
        return Err(TransformError::Mismatch {
            stage: 0,
            label: c.name.clone(),
            expected: "identity".into(),
            location: c.detail.clone(),
        });
    }
    Ok(rep)
}

pub fn verify_chain(script: &ChainScript) -> Result<ChainReport, TransformError> {
    let start = registry::equation(&script.start).ok_or_else(|| TransformError::UnknownEquation(script.start.clone()))?;
    verify_chain_from(&start, script)
}

fn check(name: &str, holds: bool, detail: String) -> IdentityCheck {
    IdentityCheck { name: name.into(), holds, detail }
}

/// Exact side identities used by the chain.
pub fn identity_checks() -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    let r: BiRatFunc = RatFunc::x();
    let one = BiRatFunc::one();
    let r2 = r.mul(&r);
    let op = one.add(&r2);

    // cos 4θ = T₄(cos θ) with cos²θ = 1/(1 + tan²θ)
    let c2 = op.inv();
    let t4 = c2.mul(&c2).scale_i64(8).sub(&c2.scale_i64(8)).add(&one);
    let closed = one.sub(&r2.scale_i64(6)).add(&r2.mul(&r2)).div(&op.mul(&op));
    let exact = t4 == closed && cos_four_arctan() == closed;
    let mut worst: f64 = 0.0;
    for k in 0..=40 {
        let x = k as f64 * 0.075;
        let lhs = 2.0 * (4.0 * x.atan()).cos();
        let rhs = 2.0 * (1.0 - 6.0 * x * x + x.powi(4)) / (1.0 + x * x).powi(2);
        worst = worst.max((lhs - rhs).abs());
    }
    out.push(check(
        "2cos(4 arctan ρ) = 2(1 − 6ρ² + ρ⁴)/(1 + ρ²)²",
        exact && worst < 1e-13,
        format!("polynomial identity {exact}, float spot check max error {worst:.1e}"),
    ));

    let v_from_spec = cos_four_arctan().scale_i64(2).div(&r2.mul(&one.sub(&r2)));
    out.push(check(
        "potential of the spectral equation",
        registry::spec().same_equation(&registry::specre()) && v_from_spec == potential_v(),
        "spec and specre coincide; V = 2cos(4 arctan ρ)/(ρ²(1 − ρ²))".into(),
    ));

    let w = ground_state_log_derivative();
    let g0 = gf(&[("1", "1/2"), ("-1", "1/2"), ("0", "2"), ("i", "-1"), ("-i", "-1")]);
    let l = g0.log_derivative();
    out.push(check("(∂ − W) g₀ = 0", l == w, "g₀ = (1 − ρ²)^{1/2} ρ²/(1 + ρ²), W = g₀'/g₀".into()));
    let lhs = l.derivative().add(&l.mul(&l)).sub(&potential_v());
    out.push(check(
        "g₀'' − V g₀ = −(1 − ρ²)⁻² g₀",
        lhs == schrod_weight().inv().neg(),
        format!("(g₀'' − V g₀)/g₀ = {}", fmt_bi(&lhs, "ρ")),
    ));
    let s = SusyData { w, shift: registry::ground_state_shift(), weight: schrod_weight() };
    out.push(check("(∂ + W)(∂ − W) = ∂² − (W' + W²)", s.factorization_holds(), "operator composition".into()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::zvar;

    #[test]
    fn full_chain_verifies() {
        let rep = verify_chain(&default_chain()).unwrap();
        assert!(rep.verified);
        assert_eq!(rep.stages.len(), 5);
        assert!(rep.identities.iter().all(|c| c.holds));
        assert_eq!(verify_chain(&default_chain()).unwrap(), rep);
    }

    #[test]
    fn script_json_roundtrip() {
        let s = default_chain();
        let j = serde_json::to_string_pretty(&s).unwrap();
        let back: ChainScript = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn perturbed_potential_fails_at_stage_one() {
        let r = zvar();
        let u = cos_four_arctan().scale_i64(3).div(&r.mul(&r));
        let bad = registry::spec_with_potential("spec'", &u);
        match verify_chain_from(&bad, &default_chain()) {
            Err(TransformError::Mismatch { stage, location, .. }) => {
                assert_eq!(stage, 1);
                assert!(location.starts_with("q "), "{location}");
            }
            other => panic!("{other:?}"),
        }
    }
}
