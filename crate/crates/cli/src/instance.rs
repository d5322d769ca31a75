//! Instance files: JSON with rationals written as `"num/den"` strings.

use std::fmt;
use std::path::Path;

use latticekit::gauge::{Gauge, LpNorm};
use latticekit::lattice::{Lattice, Subspace};
use latticekit::rational::{parse_rational, Q, QVec};
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use crate::CliError;

/// A rational read from a JSON string or integer.
#[derive(Clone, Debug)]
pub struct Rat(pub Q);

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Rat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as \"num/den\" or an integer")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Rat, E> {
                parse_rational(s).map(Rat).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
                Ok(Rat(Q::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
                Ok(Rat(Q::from_integer(v.into())))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub dimension: usize,
    pub basis: Vec<Vec<Rat>>,
    #[serde(default)]
    pub subspace: Option<Vec<Vec<Rat>>>,
    #[serde(default)]
    pub target: Option<Vec<Rat>>,
    #[serde(default)]
    pub norm: Option<String>,
    #[serde(default)]
    pub epsilon: Option<Rat>,
    #[serde(default)]
    pub k: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum NormSpec {
    Lp(LpNorm),
    Cone(Vec<i64>),
}

impl NormSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("cone:") {
            let y = rest
                .trim_matches(|c| c == '[' || c == ']')
                .split(',')
                .map(|t| t.trim().parse::<i64>().map_err(|_| CliError::Usage(format!("bad cone entry {t:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(NormSpec::Cone(y));
        }
        LpNorm::parse(s).map(NormSpec::Lp).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn tag(&self) -> String {
        match self {
            NormSpec::Lp(p) => p.tag(),
            NormSpec::Cone(y) => format!("cone:{}", y.iter().map(i64::to_string).collect::<Vec<_>>().join(",")),
        }
    }

    pub fn gauge(&self, n: usize) -> Result<Gauge, CliError> {
        match self {
            NormSpec::Lp(p) => Ok(Gauge::lp(n, *p)),
            NormSpec::Cone(y) => {
                if y.len() != n {
                    return Err(CliError::Usage(format!("cone vector has {} entries, dimension is {n}", y.len())));
                }
                Ok(Gauge::cone(y)?)
            }
        }
    }

    pub fn lp(&self, command: &str) -> Result<LpNorm, CliError> {
        match self {
            NormSpec::Lp(p) => Ok(*p),
            NormSpec::Cone(_) => Err(CliError::Usage(format!("{command} needs an l_p norm"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub lattice: Lattice,
    pub subspace: Option<Subspace>,
    pub target: Option<QVec>,
    pub norm: NormSpec,
    pub epsilon: Option<Q>,
    pub k: Option<u64>,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.lattice.dim()
    }

    pub fn gauge(&self) -> Result<Gauge, CliError> {
        self.norm.gauge(self.n())
    }

    pub fn target(&self, command: &str) -> Result<&QVec, CliError> {
        self.target.as_ref().ok_or_else(|| CliError::Usage(format!("{command} needs a target in the instance")))
    }

    pub fn subspace(&self, command: &str) -> Result<&Subspace, CliError> {
        self.subspace.as_ref().ok_or_else(|| CliError::Usage(format!("{command} needs a subspace in the instance")))
    }
}

fn row(v: Vec<Rat>, n: usize, what: &str) -> Result<QVec, CliError> {
    if v.len() != n {
        return Err(CliError::Usage(format!("{what} has {} entries, dimension is {n}", v.len())));
    }
    Ok(v.into_iter().map(|r| r.0).collect())
}

pub fn parse_instance(text: &str, norm_override: Option<&str>) -> Result<Instance, CliError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("instance: {e}")))?;
    let n = file.dimension;
    let basis = file
        .basis
        .into_iter()
        .enumerate()
        .map(|(i, r)| row(r, n, &format!("basis row {i}")))
        .collect::<Result<Vec<_>, _>>()?;
    let lattice = Lattice::new(n, basis)?;
    if lattice.rank() == 0 {
        return Err(CliError::Usage("the basis is empty".into()));
    }
    let subspace = file
        .subspace
        .map(|rows| {
            let rows = rows.into_iter().enumerate().map(|(i, r)| row(r, n, &format!("subspace row {i}"))).collect::<Result<Vec<_>, _>>()?;
            Ok::<_, CliError>(Subspace::new(n, rows)?)
        })
        .transpose()?;
    let target = file.target.map(|t| row(t, n, "target")).transpose()?;
    let norm = NormSpec::parse(norm_override.or(file.norm.as_deref()).unwrap_or("l2"))?;
    Ok(Instance { lattice, subspace, target, norm, epsilon: file.epsilon.map(|e| e.0), k: file.k })
}

pub fn load_instance(path: &Path, norm_override: Option<&str>) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    parse_instance(&text, norm_override).map_err(|e| match e {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals_and_defaults() {
        let i = parse_instance(r#"{"dimension": 2, "basis": [["1/2", 0], ["0", "3"]], "target": ["1", "-2/3"]}"#, None).unwrap();
        assert_eq!(i.norm, NormSpec::Lp(LpNorm::L2));
        assert_eq!(i.lattice.basis()[0][0], Q::new(1.into(), 2.into()));
        assert!(i.subspace.is_none());
    }

    #[test]
    fn reports_positions() {
        let e = parse_instance("{\"dimension\": 2,\n \"basis\": [[\"1/0\"]]}", None).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = parse_instance(r#"{"dimension": 2, "basis": [["1"]]}"#, None).unwrap_err();
        assert!(e.to_string().contains("basis row 0"), "{e}");
        assert!(parse_instance(r#"{"dimension": 1, "basis": [[1]], "extra": 1}"#, None).is_err());
    }

    #[test]
    fn norm_tags() {
        assert_eq!(NormSpec::parse("lp:3").unwrap(), NormSpec::Lp(LpNorm::Finite(3)));
        assert_eq!(NormSpec::parse("cone:1,-1").unwrap(), NormSpec::Cone(vec![1, -1]));
        assert_eq!(NormSpec::parse("cone:1,-1").unwrap().tag(), "cone:1,-1");
        assert!(NormSpec::parse("l7").is_err());
    }
}
