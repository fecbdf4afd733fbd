use std::path::Path;

use deficit_core::qmat::c;
use deficit_core::states::{
    bb84_mixture, bell_mixture, isotropic, mfs_state, rho_cc, sausage_mixture, singlet, AcinParams,
    BellWeights, StateFile,
};
use deficit_core::{DensityMatrix, Error, Result};

/// A state named on the command line. Multiparty families keep their
/// parameters so closed forms can be used without forming huge matrices.
#[derive(Debug, Clone)]
pub enum StateInput {
    Bipartite(DensityMatrix),
    /// A state file with more than two factors.
    Multipartite(DensityMatrix),
    Ghz(usize),
    Aharonov(usize),
    Acin { params: AcinParams, is_w: bool },
}

fn numbers<const N: usize>(name: &str, args: &str) -> Result<[f64; N]> {
    let v: Vec<f64> = args
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidParameter(format!("{name}: {e}")))?;
    v.try_into()
        .map_err(|v: Vec<f64>| Error::InvalidParameter(format!("{name} takes {N} numbers, got {}", v.len())))
}

fn count(name: &str, args: &str) -> Result<usize> {
    args.trim()
        .parse()
        .map_err(|e| Error::InvalidParameter(format!("{name}: {e}")))
}

/// Parses a state name or reads a JSON state file.
pub fn parse_state(arg: &str) -> Result<StateInput> {
    let (head, args) = match arg.split_once(':') {
        Some((h, a)) => (h.to_ascii_lowercase(), a),
        None => (arg.to_ascii_lowercase(), ""),
    };
    let bip = |rho: DensityMatrix| Ok(StateInput::Bipartite(rho));
    match (head.as_str(), args.is_empty()) {
        ("singlet", true) => bip(singlet().to_density()),
        ("mfs", true) => bip(mfs_state()),
        ("cc", true) => bip(rho_cc()),
        ("w", true) => Ok(StateInput::Acin { params: AcinParams::w_state(), is_w: true }),
        ("bell", false) => bip(bell_mixture(&BellWeights::new(numbers::<4>("bell", args)?)?)),
        ("iso", false) => {
            let [lambda, d] = numbers::<2>("iso", args)?;
            if d.fract() != 0.0 || d < 2.0 {
                return Err(Error::InvalidParameter(format!("iso dimension {d}")));
            }
            bip(isotropic(lambda, d as usize)?)
        }
        ("ghz", false) => Ok(StateInput::Ghz(count("ghz", args)?)),
        ("aharonov", false) => Ok(StateInput::Aharonov(count("aharonov", args)?)),
        ("acin", false) => {
            let v: Vec<&str> = args.split(',').collect();
            let (reals, phase) = match v.len() {
                5 => (args.to_string(), 0.0),
                6 => (
                    v[..5].join(","),
                    v[5].trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidParameter(format!("acin phase: {e}")))?,
                ),
                n => return Err(Error::InvalidParameter(format!("acin takes 5 or 6 numbers, got {n}"))),
            };
            let [a, b, cc, d, e] = numbers::<5>("acin", &reals)?;
            let params = AcinParams::new(c(a * phase.cos(), a * phase.sin()), b, cc, d, e)?;
            Ok(StateInput::Acin { params, is_w: false })
        }
        ("bb84", false) => bip(bb84_mixture(numbers::<4>("bb84", args)?)?),
        ("sausage", false) => bip(sausage_mixture(numbers::<9>("sausage", args)?)?),
        _ if Path::new(arg).is_file() => {
            let rho = StateFile::read(Path::new(arg))?;
            Ok(if rho.num_factors() == 2 {
                StateInput::Bipartite(rho)
            } else {
                StateInput::Multipartite(rho)
            })
        }
        _ => Err(Error::InvalidParameter(format!("unknown state `{arg}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse() {
        assert!(matches!(parse_state("singlet"), Ok(StateInput::Bipartite(_))));
        assert!(matches!(parse_state("bell:0.7,0.1,0.1,0.1"), Ok(StateInput::Bipartite(_))));
        assert!(matches!(parse_state("iso:0.5,3"), Ok(StateInput::Bipartite(r)) if r.dims() == [3, 3]));
        assert!(matches!(parse_state("ghz:4"), Ok(StateInput::Ghz(4))));
        assert!(matches!(parse_state("W"), Ok(StateInput::Acin { is_w: true, .. })));
        let s = 1.0 / 2f64.sqrt();
        assert!(parse_state(&format!("acin:{s},0,0,0,{s}")).is_ok());
        assert!(parse_state("bell:0.5,0.5").is_err());
        assert!(parse_state("bell:0.5,0.6,0,0").is_err());
        assert!(parse_state("nonsense").is_err());
    }
}
