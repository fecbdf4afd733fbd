use deficit_core::deficits::{
    acin_localisable, aharonov_quantities, classical_deficit, ghz_quantities, henderson_vedral,
    local_information, min_discord, mutual_information, oneway_classical_deficit, oneway_deficit,
    twoqubit_deficit, w_localisable, zeroway_classical, zeroway_deficit, BasisRecord, BoundKind,
    DeficitReport, Direction, MultipartyQuantities, Provenance, Quantity,
};
use deficit_core::enttools::{ipb_upper_bound, relative_entropy_of_entanglement};
use deficit_core::measure::OptimizerConfig;
use deficit_core::qmat::{information, partial_trace, von_neumann_entropy};
use deficit_core::scan::format_sig;
use deficit_core::{DensityMatrix, Error, Result};
use serde_json::Value;

use crate::input::StateInput;

/// Purity threshold for using the pure-state closed form `Δ = S(ρ_A)`.
const PURE_TOL: f64 = 1e-10;

fn unsupported(q: Quantity, what: &str) -> Error {
    Error::UnsupportedDimension(format!("{q} is not available for {what}"))
}

fn renamed(mut r: DeficitReport, q: Quantity, companion: &str) -> Result<DeficitReport> {
    let v = *r
        .companions
        .get(companion)
        .ok_or_else(|| Error::PostCheck(format!("report lacks {companion}")))?;
    r.companions.insert(r.quantity.name().to_string(), r.value);
    r.quantity = q;
    r.value = v;
    Ok(r)
}

fn bounded(q: Quantity, value: f64, kind: BoundKind) -> DeficitReport {
    let mut r = DeficitReport::exact(q, value);
    r.provenance = Provenance::Bound;
    r.bound = Some(kind);
    r
}

/// The best one-way implementable product basis, as an upper bound on `Δ`.
fn ipb_report(rho: &DensityMatrix, q: Quantity, cfg: &OptimizerConfig) -> Result<(DeficitReport, bool)> {
    let b = ipb_upper_bound(rho, cfg)?;
    let mut r = bounded(q, b.value, BoundKind::Upper);
    r.direction = Some(b.basis.direction);
    r.bases = std::iter::once(&b.basis.sender)
        .chain(&b.basis.receivers)
        .map(BasisRecord::from)
        .collect();
    Ok((r, b.converged))
}

fn bipartite(
    rho: &DensityMatrix,
    q: Quantity,
    dir: Direction,
    cfg: &OptimizerConfig,
) -> Result<(DeficitReport, bool)> {
    let s = von_neumann_entropy(rho);
    let two_qubits = rho.dims() == [2, 2];
    let pure = s < PURE_TOL;
    let with_conv = |r: DeficitReport| {
        let c = r.converged();
        Ok((r, c))
    };
    match q {
        Quantity::I => with_conv(DeficitReport::exact(q, information(rho))),
        Quantity::ILocal => with_conv(DeficitReport::exact(q, local_information(rho))),
        Quantity::IM => with_conv(DeficitReport::exact(q, mutual_information(rho)?)),
        Quantity::IlOneway => with_conv(renamed(oneway_deficit(rho, dir, cfg)?, q, "I_l_oneway")?),
        Quantity::IlZeroway => with_conv(renamed(zeroway_deficit(rho, cfg)?, q, "I_l_zeroway")?),
        Quantity::DeltaOneway => with_conv(oneway_deficit(rho, dir, cfg)?),
        Quantity::DeltaZeroway => with_conv(zeroway_deficit(rho, cfg)?),
        Quantity::Delta | Quantity::DeltaTwoqubit | Quantity::Il if pure => {
            let delta = von_neumann_entropy(&partial_trace(rho, &[0])?);
            let i = information(rho);
            let r = match q {
                Quantity::Il => DeficitReport::exact(q, i - delta).with_companion("Delta", delta),
                _ => DeficitReport::exact(q, delta).with_companion("I_l", i - delta),
            };
            with_conv(r.with_companion("I", i))
        }
        Quantity::Delta | Quantity::DeltaTwoqubit if two_qubits => {
            let mut r = twoqubit_deficit(rho, cfg)?;
            r.quantity = q;
            with_conv(r)
        }
        Quantity::Il if two_qubits => with_conv(renamed(twoqubit_deficit(rho, cfg)?, q, "I_l")?),
        Quantity::Delta | Quantity::DeltaTwoqubit => {
            let (mut r, c) = ipb_report(rho, q, cfg)?;
            r.warnings
                .push("beyond two qubits only the product-basis upper bound is available".into());
            Ok((r, c))
        }
        Quantity::Il => {
            let (b, c) = ipb_report(rho, Quantity::ErPc, cfg)?;
            let i = information(rho);
            let mut r = bounded(q, i - b.value, BoundKind::Lower)
                .with_companion("I", i)
                .with_companion("E_r_pc", b.value);
            r.bases = b.bases;
            r.direction = b.direction;
            Ok((r, c))
        }
        Quantity::DeltaC => with_conv(classical_deficit(rho, cfg)?),
        Quantity::DeltaClOneway => with_conv(oneway_classical_deficit(rho, dir, cfg)?),
        Quantity::CHv => with_conv(henderson_vedral(rho, dir, cfg)?),
        Quantity::CZero => with_conv(zeroway_classical(rho, cfg)?),
        Quantity::Discord => with_conv(min_discord(rho, dir, cfg)?),
        Quantity::Er => {
            let est = relative_entropy_of_entanglement(rho)?;
            let mut r = if est.ppt {
                DeficitReport::exact(q, 0.0)
            } else {
                bounded(q, est.value, BoundKind::Upper)
            };
            r = r.with_companion("restarts", est.restarts as f64);
            if !est.converged {
                r.warnings.push("separable-ansatz restarts did not agree".into());
            }
            Ok((r, est.converged))
        }
        Quantity::ErPc => ipb_report(rho, q, cfg),
    }
}

fn multiparty(q: Quantity, m: &MultipartyQuantities) -> Result<(DeficitReport, bool)> {
    let (value, kind) = match q {
        Quantity::I => return Ok((DeficitReport::exact(q, m.information), true)),
        Quantity::Il => (m.localisable, BoundKind::Lower),
        Quantity::Delta => (m.deficit, BoundKind::Upper),
        _ => return Err(unsupported(q, "this multiparty family")),
    };
    let mut r = if m.provenance == Provenance::Exact {
        DeficitReport::exact(q, value)
    } else {
        bounded(q, value, kind)
    };
    r = r
        .with_companion("I", m.information)
        .with_companion("I_l", m.localisable)
        .with_companion("Delta", m.deficit)
        .with_companion("single_party_entropy", m.single_party_entropy)
        .with_companion("parties", m.parties as f64);
    Ok((r, true))
}

/// Evaluates `q` on the input; the flag reports optimizer convergence.
pub fn evaluate(
    state: &StateInput,
    q: Quantity,
    dir: Direction,
    cfg: &OptimizerConfig,
) -> Result<(DeficitReport, bool)> {
    cfg.validate()?;
    match state {
        StateInput::Bipartite(rho) => bipartite(rho, q, dir, cfg),
        StateInput::Multipartite(rho) => match q {
            Quantity::I => Ok((DeficitReport::exact(q, information(rho)), true)),
            _ => Err(unsupported(q, "states with more than two factors")),
        },
        StateInput::Ghz(n) => multiparty(q, &ghz_quantities(*n)?),
        StateInput::Aharonov(n) => multiparty(q, &aharonov_quantities(*n)?),
        StateInput::Acin { params, is_w } => {
            let report = || {
                if *is_w {
                    w_localisable(cfg)
                } else {
                    acin_localisable(params, cfg)
                }
            };
            let r = match q {
                Quantity::I => DeficitReport::exact(q, 3.0),
                Quantity::Il | Quantity::IlOneway => {
                    let mut r = report()?;
                    r.quantity = q;
                    if q == Quantity::Il {
                        // one-way protocols only bound the general optimum
                        r.provenance = Provenance::Bound;
                        r.bound = Some(BoundKind::Lower);
                    }
                    r
                }
                Quantity::DeltaOneway | Quantity::Delta => {
                    let mut r = renamed(report()?, q, "Delta")?;
                    if q == Quantity::Delta {
                        r.provenance = Provenance::Bound;
                        r.bound = Some(BoundKind::Upper);
                    }
                    r
                }
                _ => return Err(unsupported(q, "three-qubit Acin states")),
            };
            let c = r.converged();
            Ok((r, c))
        }
    }
}

/// Rounds every float to 12 significant digits.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(r) = format_sig(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// The report as JSON with a top-level `converged` flag.
pub fn to_json(report: &DeficitReport, converged: bool) -> Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    if let Value::Object(map) = &mut v {
        map.insert("converged".into(), Value::Bool(converged));
    }
    round_floats(&mut v);
    v
}
