//! Model spec grammar: `family:key=value,key=value,…`.
//!
//! | family  | keys                 | model                              |
//! |---------|----------------------|------------------------------------|
//! | poisson | m                    | Poisson with mean m                |
//! | geom    | p                    | geometric, P(0) = p                |
//! | nb      | m,k or p,k           | negative binomial                  |
//! | zip     | pi,m                 | zero-inflated Poisson              |
//! | zig     | pi,p                 | zero-inflated (or deflated) geometric |
//! | zinb    | pi,m,k or pi,p,k     | zero-inflated negative binomial    |
//! | hp      | pi,m                 | hurdle Poisson                     |
//! | hg      | pi,p                 | hurdle geometric                   |
//! | hnb     | pi,m,k or pi,p,k     | hurdle negative binomial           |
//!
//! Keys may appear in any order; each must appear exactly once.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use countfit_core::dist::{make_hurdle, make_zero_inflated};
use countfit_core::{BaseModel, CountModel, ModelError};

#[derive(Debug, Clone, PartialEq)]
pub enum SpecError {
    MissingColon(String),
    UnknownFamily(String),
    BadPair(String),
    BadNumber {
        key: String,
        value: String,
    },
    DuplicateKey(String),
    Keys {
        family: String,
        expected: &'static str,
        found: String,
    },
    Model(ModelError),
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::MissingColon(s) => write!(f, "{s:?}: expected family:key=value,…"),
            SpecError::UnknownFamily(s) => write!(
                f,
                "unknown family {s:?} (expected poisson, geom, nb, zip, zig, zinb, hp, hg or hnb)"
            ),
            SpecError::BadPair(s) => write!(f, "{s:?} is not key=value"),
            SpecError::BadNumber { key, value } => {
                write!(f, "{key} = {value:?} is not a finite number")
            }
            SpecError::DuplicateKey(k) => write!(f, "key {k} given twice"),
            SpecError::Keys {
                family,
                expected,
                found,
            } => {
                write!(f, "{family} takes {expected}, got {found:?}")
            }
            SpecError::Model(e) => write!(f, "parameter bound violated: {e}"),
        }
    }
}

impl std::error::Error for SpecError {}

impl From<ModelError> for SpecError {
    fn from(e: ModelError) -> Self {
        SpecError::Model(e)
    }
}

/// A validated model parsed from a spec string, with its canonical text.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub model: CountModel,
    pub text: String,
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Values for exactly the keys `names`, or `None` if the key set differs.
fn exact(keys: &BTreeMap<String, f64>, names: &[&str]) -> Option<Vec<f64>> {
    let matches = keys.len() == names.len() && names.iter().all(|n| keys.contains_key(*n));
    matches.then(|| names.iter().map(|n| keys[*n]).collect())
}

fn base_model(
    family: &str,
    kind: &str,
    keys: &BTreeMap<String, f64>,
) -> Result<CountModel, SpecError> {
    let wrong = |expected: &'static str| SpecError::Keys {
        family: family.into(),
        expected,
        found: keys.keys().cloned().collect::<Vec<_>>().join(","),
    };
    Ok(match kind {
        "poisson" => {
            let v = exact(keys, &["m"]).ok_or_else(|| wrong("m"))?;
            CountModel::poisson(v[0])?
        }
        "geom" => {
            let v = exact(keys, &["p"]).ok_or_else(|| wrong("p"))?;
            CountModel::geometric(v[0])?
        }
        _ => {
            if let Some(v) = exact(keys, &["m", "k"]) {
                CountModel::negative_binomial_mean(v[0], v[1])?
            } else if let Some(v) = exact(keys, &["p", "k"]) {
                CountModel::negative_binomial(v[0], v[1])?
            } else {
                return Err(wrong("m,k or p,k"));
            }
        }
    })
}

impl FromStr for ModelSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        let (family, rest) = s
            .split_once(':')
            .ok_or_else(|| SpecError::MissingColon(s.into()))?;
        let family = family.trim().to_ascii_lowercase();
        let mut keys = BTreeMap::new();
        for pair in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| SpecError::BadPair(pair.into()))?;
            let k = k.trim().to_ascii_lowercase();
            let value: f64 = v
                .trim()
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite())
                .ok_or_else(|| SpecError::BadNumber {
                    key: k.clone(),
                    value: v.trim().into(),
                })?;
            if keys.insert(k.clone(), value).is_some() {
                return Err(SpecError::DuplicateKey(k));
            }
        }
        let (wrapper, base_kind) = match family.as_str() {
            "poisson" | "geom" | "nb" => (None, family.as_str()),
            "zip" => (Some(false), "poisson"),
            "zig" => (Some(false), "geom"),
            "zinb" => (Some(false), "nb"),
            "hp" => (Some(true), "poisson"),
            "hg" => (Some(true), "geom"),
            "hnb" => (Some(true), "nb"),
            _ => return Err(SpecError::UnknownFamily(family)),
        };
        let model = match wrapper {
            None => base_model(&family, base_kind, &keys)?,
            Some(hurdle) => {
                let pi = keys.remove("pi").ok_or_else(|| SpecError::Keys {
                    family: family.clone(),
                    expected: "pi plus the base parameters",
                    found: keys.keys().cloned().collect::<Vec<_>>().join(","),
                })?;
                let base = base_model(&family, base_kind, &keys)?;
                if hurdle {
                    make_hurdle(base, pi)?
                } else {
                    make_zero_inflated(base, pi)?
                }
            }
        };
        Ok(ModelSpec {
            model,
            text: canonical(&model),
        })
    }
}

/// `family:key=value,…` in the model's own parametrization (negative
/// binomial bases by `p,k`), so parsing the text gives back the same model.
pub fn canonical(model: &CountModel) -> String {
    let mut params = Vec::new();
    if let CountModel::ZeroInflated { pi, .. } | CountModel::Hurdle { pi, .. } = *model {
        params.push(format!("pi={pi}"));
    }
    match model.base() {
        BaseModel::Poisson { mean } => params.push(format!("m={mean}")),
        BaseModel::Geometric { p } => params.push(format!("p={p}")),
        BaseModel::NegBinomial { p, k } => {
            params.push(format!("p={p}"));
            params.push(format!("k={k}"));
        }
    }
    format!("{}:{}", model.family_name(), params.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<ModelSpec, SpecError> {
        s.parse()
    }

    #[test]
    fn parses_each_family() {
        for (text, family) in [
            ("poisson:m=2", "poisson"),
            ("geom:p=0.4", "geom"),
            ("nb:m=2.5,k=0.6", "nb"),
            ("nb:p=0.2,k=0.6", "nb"),
            ("zip:pi=0.2,m=3", "zip"),
            ("zig:pi=0.3,p=0.4", "zig"),
            ("zig: p = 0.4 , pi = -0.2", "zig"),
            ("zinb:pi=0.1,m=2,k=1", "zinb"),
            ("hp:pi=0.5,m=1", "hp"),
            ("hg:pi=0.5,p=0.3", "hg"),
            ("hnb:pi=0.5,p=0.3,k=2", "hnb"),
        ] {
            let spec = parse(text).unwrap_or_else(|e| panic!("{text}: {e}"));
            assert_eq!(spec.model.family_name(), family);
            assert_eq!(
                parse(&spec.text).unwrap().model,
                spec.model,
                "{}",
                spec.text
            );
        }
    }

    #[test]
    fn canonical_text() {
        assert_eq!(parse("zig:p=0.4,pi=0.3").unwrap().text, "zig:pi=0.3,p=0.4");
        assert_eq!(
            parse("nb:m=2.4,k=0.6").unwrap().text,
            "nb:p=0.19999999999999998,k=0.6"
        );
        assert_eq!(
            parse("hnb:k=2,p=0.25,pi=0.5").unwrap().text,
            "hnb:pi=0.5,p=0.25,k=2"
        );
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(matches!(parse("zig"), Err(SpecError::MissingColon(_))));
        assert!(matches!(parse("zzz:p=1"), Err(SpecError::UnknownFamily(_))));
        assert!(matches!(parse("geom:p"), Err(SpecError::BadPair(_))));
        assert!(matches!(
            parse("geom:p=abc"),
            Err(SpecError::BadNumber { .. })
        ));
        assert!(matches!(
            parse("geom:p=inf"),
            Err(SpecError::BadNumber { .. })
        ));
        assert!(matches!(
            parse("geom:p=0.1,p=0.2"),
            Err(SpecError::DuplicateKey(_))
        ));
        assert!(matches!(parse("geom:m=1"), Err(SpecError::Keys { .. })));
        assert!(matches!(
            parse("nb:m=1,p=0.3,k=2"),
            Err(SpecError::Keys { .. })
        ));
        assert!(matches!(parse("zig:p=0.3"), Err(SpecError::Keys { .. })));
    }

    #[test]
    fn enforces_parameter_bounds() {
        let err = parse("zig:pi=-5,p=0.4").unwrap_err();
        assert!(matches!(
            err,
            SpecError::Model(ModelError::PiOutOfBounds { .. })
        ));
        assert!(err.to_string().contains("bound"));
        assert!(matches!(parse("geom:p=1.5"), Err(SpecError::Model(_))));
        assert!(parse("geom:p=1.0").is_ok());
    }
}
