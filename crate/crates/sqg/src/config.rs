//! Key-value configuration.
//!
//! One `key = value` per line; blank lines and `#` comments are ignored. The
//! parameter keys are `alpha`, `beta`, `epsilon`, `delta`, `s_reg`, `m`, `T`,
//! `dt` and `seed`. Any other key is an experiment option read by the
//! subcommand that needs it. When `alpha` is set and `beta` is not, `beta`
//! defaults to `alpha/2`.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use sqg_core::galerkin::SqgParams;

use crate::error::{Error, Result};
use crate::format::fmt_f64;

pub const PARAM_KEYS: [&str; 9] = ["alpha", "beta", "epsilon", "delta", "s_reg", "m", "T", "dt", "seed"];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config {
        key: key.to_string(),
        reason: format!("cannot parse {value:?} as {}", std::any::type_name::<T>()),
    })
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                key: line.to_string(),
                reason: format!("line {} is not of the form key = value", n + 1),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config { key: String::new(), reason: format!("empty key on line {}", n + 1) });
            }
            if values.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Config { key: key.to_string(), reason: "given twice".into() });
            }
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Later values win; this is how command-line flags override a file.
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn option<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key).map(|v| parse_value(key, v)).transpose()
    }

    /// Experiment options, i.e. every key that is not a parameter.
    pub fn options(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().filter(|(k, _)| !PARAM_KEYS.contains(&k.as_str())).map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Defaults overlaid with the configured values, validated.
    pub fn params(&self) -> Result<SqgParams> {
        let mut p = SqgParams::default();
        let f = |key: &str, slot: &mut f64| -> Result<()> {
            if let Some(v) = self.get(key) {
                *slot = parse_value(key, v)?;
            }
            Ok(())
        };
        f("alpha", &mut p.alpha)?;
        p.beta = p.alpha / 2.0;
        f("beta", &mut p.beta)?;
        f("epsilon", &mut p.epsilon)?;
        f("delta", &mut p.delta)?;
        f("s_reg", &mut p.s_reg)?;
        f("T", &mut p.t_final)?;
        f("dt", &mut p.dt)?;
        if let Some(v) = self.get("m") {
            p.m = parse_value("m", v)?;
        }
        if let Some(v) = self.get("seed") {
            p.seed = parse_value("seed", v)?;
        }
        p.validate().map_err(|e| match e {
            sqg_core::Error::InvalidParameter { name, reason } => Error::Config { key: name.to_string(), reason },
            other => other.into(),
        })?;
        Ok(p)
    }
}

/// The parameter block written into trajectory and control files.
pub fn params_to_kv(p: &SqgParams) -> String {
    format!(
        "alpha = {}\nbeta = {}\nepsilon = {}\ndelta = {}\ns_reg = {}\nm = {}\nT = {}\ndt = {}\nseed = {}\n",
        fmt_f64(p.alpha),
        fmt_f64(p.beta),
        fmt_f64(p.epsilon),
        fmt_f64(p.delta),
        fmt_f64(p.s_reg),
        p.m,
        fmt_f64(p.t_final),
        fmt_f64(p.dt),
        p.seed
    )
}

/// Inverse of [`params_to_kv`]. Every key is required; nothing is validated,
/// since stored grids may be refined copies of a valid run.
pub fn params_from_kv(text: &str) -> std::result::Result<SqgParams, String> {
    let c = Config::parse(text).map_err(|e| e.to_string())?;
    let num = |key: &str| -> std::result::Result<f64, String> {
        let v = c.get(key).ok_or_else(|| format!("parameter block lacks {key:?}"))?;
        v.parse().map_err(|_| format!("bad value {v:?} for {key:?}"))
    };
    let int = |key: &str| -> std::result::Result<u64, String> {
        let v = c.get(key).ok_or_else(|| format!("parameter block lacks {key:?}"))?;
        v.parse().map_err(|_| format!("bad value {v:?} for {key:?}"))
    };
    Ok(SqgParams {
        alpha: num("alpha")?,
        beta: num("beta")?,
        epsilon: num("epsilon")?,
        delta: num("delta")?,
        s_reg: num("s_reg")?,
        m: int("m")? as usize,
        t_final: num("T")?,
        dt: num("dt")?,
        seed: int("seed")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reason(text: &str) -> (String, String) {
        match Config::parse(text).unwrap().params().unwrap_err() {
            Error::Config { key, reason } => (key, reason),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn accepts_the_fluctuation_dissipation_pair() {
        let p = Config::parse("alpha = 0.5\nbeta = 0.25 # comment\n\n").unwrap().params().unwrap();
        assert_eq!((p.alpha, p.beta), (0.5, 0.25));
    }

    #[test]
    fn rejects_beta_outside_the_admissible_set() {
        let (key, why) = reason("alpha=0.3\nbeta=0.4");
        assert_eq!(key, "beta");
        assert!(why.contains("alpha/2"), "{why}");
    }

    #[test]
    fn rejects_a_weak_regulariser() {
        let (key, why) = reason("alpha=0.5\ns_reg=1.2");
        assert_eq!(key, "s_reg");
        assert!(why.contains("1.5"), "{why}");
    }

    #[test]
    fn beta_follows_alpha_by_default() {
        let p = Config::parse("alpha = 0.3").unwrap().params().unwrap();
        assert_eq!(p.beta, 0.15);
    }

    #[test]
    fn later_values_override() {
        let mut c = Config::parse("epsilon = 0.1\nn_traj = 50").unwrap();
        c.set("epsilon", 0.2);
        assert_eq!(c.params().unwrap().epsilon, 0.2);
        assert_eq!(c.option::<usize>("n_traj").unwrap(), Some(50));
        assert_eq!(c.options().collect::<Vec<_>>(), vec![("n_traj", "50")]);
    }

    #[test]
    fn malformed_lines_are_errors() {
        assert!(Config::parse("alpha 0.5").is_err());
        assert!(Config::parse("m = 2\nm = 3").is_err());
        assert!(matches!(Config::parse("m = two").unwrap().params(), Err(Error::Config { key, .. }) if key == "m"));
    }

    #[test]
    fn parameter_block_round_trips() {
        let p = SqgParams { alpha: 0.75, beta: 0.625, epsilon: 1.0 / 3.0, seed: u64::MAX, ..SqgParams::default() };
        assert_eq!(params_from_kv(&params_to_kv(&p)).unwrap(), p);
        assert!(params_from_kv("alpha = 1").unwrap_err().contains("beta"));
    }
}
