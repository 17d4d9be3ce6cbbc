//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, and unknown or repeated
//! keys are errors. Lists are comma separated. Scales accept `2^-k`, `a/b`
//! or a plain decimal and are kept as exact rationals.
//!
//! ```text
//! n = 4
//! p = 4
//! grid = 3
//! epsilon = 0.05
//! delta_ladder = 2^-4, 2^-8, 2^-12
//! depth = 2
//! seed = 7
//! output = out
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lambdap;
use crate::rational::{self, Q};
use crate::sidon::ENUM_BUDGET;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n: u64,
    pub p: f64,
    pub grid: Option<u64>,
    pub epsilon: f64,
    #[serde(serialize_with = "rational::vec::ser")]
    pub delta_ladder: Vec<Q>,
    pub depth: u32,
    pub seed: u64,
    pub enum_budget: u128,
    pub sweep_budget: u128,
    pub kernel_deltas: Vec<f64>,
    pub alpha: f64,
    pub kernel_max_side: usize,
    pub probe_trials: usize,
    pub probe_levels: u32,
    pub probe_q: f64,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 4,
            p: 4.0,
            grid: Some(3),
            epsilon: 0.05,
            delta_ladder: vec![dyadic(4), dyadic(8), dyadic(12)],
            depth: 2,
            seed: 0,
            enum_budget: ENUM_BUDGET,
            sweep_budget: crate::energy::SWEEP_BUDGET,
            kernel_deltas: vec![0.125, 0.0625, 0.03125],
            alpha: 0.3,
            kernel_max_side: 1 << 11,
            probe_trials: 4,
            probe_levels: 2,
            probe_q: 4.0,
            output: PathBuf::from("out"),
        }
    }
}

fn dyadic(k: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << k)
}

/// Parses `2^-k`, `a/b` or a decimal into an exact rational.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a number: {s:?}"));
    if let Some(e) = s.strip_prefix("2^") {
        let e: i32 = e.parse().map_err(|_| bad())?;
        let two = Q::from_integer(BigInt::from(2));
        return Ok(if e >= 0 {
            rational::pow(&two, e as u32)
        } else {
            rational::pow(&two, (-e) as u32).recip()
        });
    }
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(a, b));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let q = Q::new(digits, BigInt::from(10u32).pow(frac.len() as u32));
    Ok(if neg { -q } else { q })
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn real(key: &str, v: &str) -> Result<f64> {
    Ok(rational::to_f64(&parse_rational(v).map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))?))
}

fn list<T>(v: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| f(s.trim())).collect()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let k = k.trim().to_string();
            if seen.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key {k}")));
            }
        }
        let mut c = ExperimentConfig::default();
        let mut grid_set = false;
        for (k, v) in &seen {
            let v = v.as_str();
            match k.as_str() {
                "n" => c.n = num(k, v)?,
                "p" => c.p = real(k, v)?,
                "m" => c.p = 2.0 * num::<u32>(k, v)? as f64,
                "grid" => {
                    grid_set = true;
                    c.grid = if v == "auto" { None } else { Some(num(k, v)?) };
                }
                "epsilon" => c.epsilon = real(k, v)?,
                "delta_ladder" => c.delta_ladder = list(v, parse_rational)?,
                "depth" => c.depth = num(k, v)?,
                "seed" => c.seed = num(k, v)?,
                "enum_budget" => c.enum_budget = num(k, v)?,
                "sweep_budget" => c.sweep_budget = num(k, v)?,
                "kernel_deltas" => c.kernel_deltas = list(v, |s| real(k, s))?,
                "alpha" => c.alpha = real(k, v)?,
                "kernel_max_side" => c.kernel_max_side = num(k, v)?,
                "probe_trials" => c.probe_trials = num(k, v)?,
                "probe_levels" => c.probe_levels = num(k, v)?,
                "probe_q" => c.probe_q = real(k, v)?,
                "output" => c.output = PathBuf::from(v),
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }
        if seen.contains_key("p") && seen.contains_key("m") {
            return Err(Error::Config("give either p or m, not both".into()));
        }
        if !grid_set && (seen.contains_key("n") || seen.contains_key("p") || seen.contains_key("m")) {
            c.grid = None;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n < 2 {
            return fail(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.p > 2.0 && self.p.is_finite()) {
            return fail(format!("p must exceed 2, got {}", self.p));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return fail("epsilon must be positive".into());
        }
        if self.delta_ladder.is_empty() {
            return fail("delta_ladder is empty".into());
        }
        let half = rational::half();
        for w in self.delta_ladder.windows(2) {
            if w[1] >= w[0] {
                return fail("delta_ladder must be strictly decreasing".into());
            }
        }
        if self.delta_ladder.iter().any(|d| *d <= Q::zero() || *d >= half) {
            return fail("delta_ladder entries must lie in (0, 1/2)".into());
        }
        if self.depth == 0 {
            return fail("depth must be at least 1".into());
        }
        if self.kernel_deltas.iter().any(|d| !(*d > 0.0 && *d < 0.5)) || self.alpha < 0.0 {
            return fail("kernel_deltas must lie in (0, 1/2) and alpha must be nonnegative".into());
        }
        if !self.kernel_max_side.is_power_of_two() {
            return fail("kernel_max_side must be a power of two".into());
        }
        if self.probe_q < 2.0 {
            return fail("probe_q must be at least 2".into());
        }
        Ok(())
    }

    /// Whether the seed grid can hold N points: (N_p, N_p ≥ N − 1).
    pub fn feasibility(&self) -> (u64, bool) {
        let np = self.grid.unwrap_or_else(|| lambdap::grid_size(self.n, self.p));
        (np, np + 1 >= self.n)
    }

    /// Canonical text form; parsing it yields an equal config.
    pub fn to_text(&self) -> String {
        let join = |v: Vec<String>| v.join(", ");
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("n", self.n.to_string());
        put("p", self.p.to_string());
        put("grid", self.grid.map_or("auto".into(), |g| g.to_string()));
        put("epsilon", self.epsilon.to_string());
        put("delta_ladder", join(self.delta_ladder.iter().map(|d| d.to_string()).collect()));
        put("depth", self.depth.to_string());
        put("seed", self.seed.to_string());
        put("enum_budget", self.enum_budget.to_string());
        put("sweep_budget", self.sweep_budget.to_string());
        put("kernel_deltas", join(self.kernel_deltas.iter().map(|d| d.to_string()).collect()));
        put("alpha", self.alpha.to_string());
        put("kernel_max_side", self.kernel_max_side.to_string());
        put("probe_trials", self.probe_trials.to_string());
        put("probe_levels", self.probe_levels.to_string());
        put("probe_q", self.probe_q.to_string());
        put("output", self.output.display().to_string());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("2^-4").unwrap(), rational::frac(1, 16));
        assert_eq!(parse_rational("3/12").unwrap(), rational::frac(1, 4));
        assert_eq!(parse_rational("0.0625").unwrap(), rational::frac(1, 16));
        assert_eq!(parse_rational("-1.5").unwrap(), rational::frac(-3, 2));
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn parse_and_round_trip() {
        let c = ExperimentConfig::parse("n = 16\nm = 2 # even\ndelta_ladder = 2^-3, 1/64\nseed = 9\n").unwrap();
        assert_eq!((c.n, c.p, c.seed, c.grid), (16, 4.0, 9, None));
        assert_eq!(c.delta_ladder, vec![rational::frac(1, 8), rational::frac(1, 64)]);
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
        assert_eq!(c.feasibility(), (16, true));
        assert_eq!(ExperimentConfig::parse("n = 6").unwrap().feasibility(), (3, false));
        assert!(ExperimentConfig::default().feasibility().1);
    }

    #[test]
    fn rejections() {
        for bad in [
            "nn = 4",
            "n = 4\nn = 5",
            "n = 1",
            "p = 2",
            "p = 4\nm = 2",
            "delta_ladder = 2^-4, 2^-3",
            "delta_ladder = 1/2",
            "epsilon = 0",
            "n 4",
            "kernel_max_side = 100",
        ] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
