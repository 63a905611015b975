//! Flat `key=value` configuration files.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::algebra::{CumulantSet, Rational};
use crate::density::{DistributionSpec, Grid, GridDensity};
use crate::error::{Error, Result};
use crate::mixture::MixingMeasure;

/// Parsed `key=value` pairs. `#` starts a comment; blank lines are skipped.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Parse(format!("line {}: duplicate key {key:?}", lineno + 1)));
            }
        }
        Ok(Config { entries })
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Invalid(format!("missing key {key:?}")))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| Error::Parse(format!("{key}: {e}"))),
        }
    }
}

/// Parses `p/q`, an integer or a decimal (with optional exponent) exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}0").parse().map_err(|_| bad())?;
    let digits = digits / BigInt::from(10);
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        Rational::from_integer(digits * ten.pow(scale as u32))
    } else {
        Rational::new(digits, ten.pow((-scale) as u32))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Cumulants from keys `gamma3`, `gamma4`, …; optional `max_order` pads with zeros.
pub fn cumulants_from_config(cfg: &Config) -> Result<CumulantSet> {
    let mut pairs = Vec::new();
    let mut max_order: usize = cfg.parse_or("max_order", 2)?;
    for key in cfg.keys() {
        if let Some(r) = key.strip_prefix("gamma") {
            let order: usize = r
                .parse()
                .map_err(|_| Error::Parse(format!("bad cumulant key {key:?}")))?;
            let value = parse_rational(cfg.require(key)?)?;
            if order == 1 || order == 2 {
                let expect = if order == 1 { Rational::zero() } else { Rational::one() };
                if value != expect {
                    return Err(Error::NonStandardized(format!("{key} = {value}")));
                }
                continue;
            }
            max_order = max_order.max(order);
            pairs.push((order, value));
        } else if key != "max_order" {
            return Err(Error::Parse(format!("unknown key {key:?}")));
        }
    }
    CumulantSet::from_pairs(max_order, &pairs)
}

fn parse_tuple_list(text: &str, arity: usize) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|item| {
            let v: Vec<f64> = item
                .split(':')
                .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{x:?}: {e}"))))
                .collect::<Result<_>>()?;
            if v.len() != arity {
                return Err(Error::Parse(format!(
                    "expected {arity} fields separated by ':' in {item:?}"
                )));
            }
            Ok(v)
        })
        .collect()
}

/// Mixing measure from `mixing=atoms` + `atoms=σ:w;…`, `mixing=two_point` +
/// `sigma=…`, or `mixing=heavy_tail` + `s`, `eta`, `tail_mass`.
pub fn mixing_from_config(cfg: &Config) -> Result<MixingMeasure> {
    match cfg.get("mixing").unwrap_or("atoms") {
        "atoms" => {
            let atoms = parse_tuple_list(cfg.require("atoms")?, 2)?
                .into_iter()
                .map(|v| (v[0], v[1]))
                .collect();
            MixingMeasure::atoms(atoms)
        }
        "two_point" => MixingMeasure::two_point(cfg.parse_or("sigma", 0.8)?),
        "heavy_tail" => MixingMeasure::heavy_tail(
            cfg.parse_or("s", 3.0)?,
            cfg.parse_or("eta", 1.5)?,
            cfg.parse_or("tail_mass", 0.05)?,
        ),
        other => Err(Error::UnsupportedFamily(format!("mixing measure {other:?}"))),
    }
}

/// Summand law from `family=…` and its parameters.
pub fn spec_from_config(cfg: &Config, base_dir: Option<&Path>) -> Result<DistributionSpec> {
    let family = cfg.require("family")?;
    match family {
        "gaussian" => Ok(DistributionSpec::Gaussian),
        "uniform" => Ok(DistributionSpec::Uniform),
        "centered_exponential" | "exponential" => Ok(DistributionSpec::CenteredExponential),
        "laplace" => Ok(DistributionSpec::Laplace),
        "gaussian_mixture" => match cfg.get("components") {
            Some("zero_kurtosis") | None => Ok(DistributionSpec::zero_kurtosis_mixture()),
            Some(text) => DistributionSpec::gaussian_mixture(
                parse_tuple_list(text, 3)?
                    .into_iter()
                    .map(|v| (v[0], v[1], v[2]))
                    .collect(),
            ),
        },
        "normal_scale_mixture" => Ok(DistributionSpec::NormalScaleMixture(Arc::new(mixing_from_config(cfg)?))),
        "table" => {
            let rel = Path::new(cfg.require("path")?);
            let path = match base_dir {
                Some(d) if rel.is_relative() => d.join(rel),
                _ => rel.to_path_buf(),
            };
            let file = std::fs::File::open(&path)?;
            let g = GridDensity::read_text(std::io::BufReader::new(file))?;
            DistributionSpec::table(g)
        }
        other => Err(Error::UnsupportedFamily(other.to_string())),
    }
}

/// Grid from `L=…,N=…` (either part optional) or `lo=…,hi=…,N=…`.
pub fn parse_grid(text: &str, n: u64) -> Result<Grid> {
    let default = Grid::default_for(n);
    let mut half = None;
    let mut lo = None;
    let mut hi = None;
    let mut points = default.n_points;
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad grid field {part:?}")))?;
        let f = || v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{k}: {e}")));
        match k.trim() {
            "L" => half = Some(f()?),
            "lo" => lo = Some(f()?),
            "hi" => hi = Some(f()?),
            "N" => points = v.trim().parse().map_err(|e| Error::Parse(format!("N: {e}")))?,
            other => return Err(Error::Parse(format!("unknown grid field {other:?}"))),
        }
    }
    if !points.is_power_of_two() || points < 2 {
        return Err(Error::Invalid(format!("N = {points} must be a power of two")));
    }
    let (lo, hi) = match (half, lo, hi) {
        (Some(l), None, None) => (-l, l),
        (None, Some(a), Some(b)) => (a, b),
        (None, None, None) => (default.lo(), default.hi()),
        _ => return Err(Error::Invalid("give either L or both lo and hi".into())),
    };
    if !(lo < hi) {
        return Err(Error::Invalid(format!("empty grid [{lo}, {hi}]")));
    }
    Ok(Grid::new(lo, hi, points))
}

/// Comma-separated list of positive integers.
pub fn parse_n_list(text: &str) -> Result<Vec<u64>> {
    let list: Vec<u64> = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<u64>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
        .collect::<Result<_>>()?;
    if list.is_empty() || list.contains(&0) {
        return Err(Error::Invalid("n-list needs positive entries".into()));
    }
    if list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("n-list must be strictly ascending".into()));
    }
    Ok(list)
}

/// Powers of two `2^a … 2^b`.
pub fn powers_of_two(a: u32, b: u32) -> Vec<u64> {
    (a..=b).map(|k| 1u64 << k).collect()
}
