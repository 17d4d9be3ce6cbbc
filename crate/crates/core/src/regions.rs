//! Bochner–Riesz exponent thresholds for the four region families, in the
//! variable x = 1/q so that q = ∞ is just x = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn inv(self) -> f64 {
        match self {
            Exponent::Finite(q) => 1.0 / q,
            Exponent::Infinity => 0.0,
        }
    }

    fn at_least_four(self) -> bool {
        match self {
            Exponent::Finite(q) => q >= 4.0,
            Exponent::Infinity => true,
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|q| q.is_finite())
                .map(Exponent::Finite)
                .ok_or_else(|| Error::invalid(format!("bad exponent {t:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "theorem", rename_all = "snake_case")]
pub enum Region {
    SeegerZiesler { kappa: f64 },
    Cladek { m: u32, kappa: f64 },
    Main { m: u32, kappa: f64, eps: f64 },
    LambdaP { p: f64, eps: f64 },
}

impl Region {
    pub fn name(&self) -> &'static str {
        match self {
            Region::SeegerZiesler { .. } => "sz",
            Region::Cladek { .. } => "cladek",
            Region::Main { .. } => "main",
            Region::LambdaP { .. } => "lambda_p",
        }
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            Region::SeegerZiesler { kappa } | Region::Cladek { kappa, .. } | Region::Main { kappa, .. } => kappa,
            Region::LambdaP { p, .. } => 1.0 / p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Region::SeegerZiesler { kappa } => (0.0..=0.5).contains(&kappa),
            Region::Cladek { m, kappa } => {
                let m = m as f64;
                m >= 2.0 && kappa > 1.0 / (4.0 * m + 2.0) && kappa <= 1.0 / (4.0 * m - 2.0)
            }
            Region::Main { m, kappa, eps } => {
                let m = m as f64;
                m >= 2.0 && kappa > 1.0 / (2.0 * m + 2.0) && kappa <= 1.0 / (2.0 * m) && eps >= 0.0
            }
            Region::LambdaP { p, eps } => p > 2.0 && p.is_finite() && eps >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("parameters out of range: {self:?}")))
        }
    }

    /// Values of x = 1/q where the formula changes branch, descending.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Region::SeegerZiesler { .. } => vec![],
            Region::Cladek { m, .. } => vec![1.0 / (2.0 * m as f64)],
            Region::Main { m, .. } => vec![1.0 / (2.0 * m as f64), 1.0 / (6.0 * m as f64)],
            Region::LambdaP { p, .. } => vec![1.0 / (3.0 * p)],
        }
    }

    /// Threshold for branch `b` (0-based from small q) at x = 1/q.
    pub fn branch(&self, b: usize, x: f64) -> f64 {
        let k = self.kappa();
        match (*self, b) {
            (Region::SeegerZiesler { .. }, _) => k * (1.0 - 4.0 * x),
            (Region::Cladek { .. }, 0) => k * (0.5 - 2.0 * x),
            (Region::Cladek { m, .. }, _) => k * (1.0 - (m as f64 + 2.0) * x),
            (Region::Main { eps, .. }, 0) => k * (0.5 - 2.0 * x) + eps,
            (Region::Main { m, eps, .. }, 1) => k * (0.5 - 2.5 * x + 0.25 / m as f64) + eps,
            (Region::Main { m, eps, .. }, _) => k * (1.0 - (3.0 * m as f64 + 1.0) * x) + eps,
            (Region::LambdaP { p, eps }, 0) => {
                let r = 1.0 / (3.0 * p);
                k * (0.5 - r) * (0.25 - x) / (0.25 - r) + eps
            }
            (Region::LambdaP { p, eps }, _) => k * (1.0 - (1.5 * p + 1.0) * x) + eps,
        }
    }

    fn branch_index(&self, x: f64) -> usize {
        self.breakpoints().iter().filter(|&&b| x <= b).count()
    }
}

/// Smallest α (exclusive) for which the region asserts L^q boundedness.
pub fn region_boundary(region: &Region, q: Exponent) -> Result<f64> {
    region.validate()?;
    if !q.at_least_four() {
        return Err(Error::invalid("q must be at least 4"));
    }
    let x = q.inv();
    Ok(region.branch(region.branch_index(x), x))
}

/// Largest disagreement between adjacent branches at their shared q.
pub fn continuity_defect(region: &Region) -> f64 {
    region
        .breakpoints()
        .iter()
        .enumerate()
        .map(|(i, &x)| (region.branch(i, x) - region.branch(i + 1, x)).abs())
        .fold(0.0, f64::max)
}

/// Vertices (x = 1/q, α) of the piecewise-linear boundary over x ∈ [0, 1/4].
pub fn polyline(region: &Region) -> Result<Vec<(f64, f64)>> {
    region.validate()?;
    let mut xs = vec![0.25];
    xs.extend(region.breakpoints().into_iter().filter(|&x| x < 0.25));
    xs.push(0.0);
    Ok(xs
        .into_iter()
        .map(|x| {
            let q = if x == 0.0 { Exponent::Infinity } else { Exponent::Finite(1.0 / x) };
            (x, region_boundary(region, q).expect("validated"))
        })
        .collect())
}

/// The three-region comparison at κ = 1/(4m − 2): Seeger–Ziesler, Cladek
/// with m, and the main family with 2m − 1.
pub fn comparison(m: u32, eps: f64) -> Result<[Region; 3]> {
    if m < 2 {
        return Err(Error::invalid("comparison needs m >= 2"));
    }
    let kappa = 1.0 / (4.0 * m as f64 - 2.0);
    let out = [
        Region::SeegerZiesler { kappa },
        Region::Cladek { m, kappa },
        Region::Main { m: 2 * m - 1, kappa, eps },
    ];
    for r in &out {
        r.validate()?;
    }
    Ok(out)
}

/// max over `samples` q in [4, ∞) of Main(2m−1) − SZ at ε = 0; ≤ 0 means the
/// main boundary never lies above.
pub fn dominance_gap(m: u32, samples: usize) -> Result<f64> {
    let [sz, _, main] = comparison(m, 0.0)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples {
        let x = 0.25 * (1.0 - i as f64 / samples as f64);
        let q = Exponent::Finite(1.0 / x);
        worst = worst.max(region_boundary(&main, q)? - region_boundary(&sz, q)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fixed_values() {
        let sz = Region::SeegerZiesler { kappa: 0.25 };
        assert_eq!(region_boundary(&sz, Exponent::Finite(8.0)).unwrap(), 0.125);
        assert_eq!(region_boundary(&sz, Exponent::Infinity).unwrap(), 0.25);
        let lp = Region::LambdaP { p: 3.0, eps: 0.01 };
        assert!((region_boundary(&lp, Exponent::Finite(4.0)).unwrap() - 0.01).abs() < 1e-15);
        let main = Region::Main { m: 2, kappa: 0.25, eps: 0.02 };
        let v = region_boundary(&main, Exponent::Finite(4.0)).unwrap();
        assert!((v - (0.25 * (0.5 - 0.5) + 0.02)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_queries() {
        assert!(region_boundary(&Region::SeegerZiesler { kappa: 0.25 }, Exponent::Finite(3.0)).is_err());
        assert!(region_boundary(&Region::Cladek { m: 2, kappa: 0.5 }, Exponent::Infinity).is_err());
        assert!(region_boundary(&Region::LambdaP { p: 2.0, eps: 0.1 }, Exponent::Infinity).is_err());
        assert!("x".parse::<Exponent>().is_err());
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinity);
    }

    #[test]
    fn comparison_polylines() {
        let rs = comparison(3, 0.0).unwrap();
        let lines: Vec<_> = rs.iter().map(|r| polyline(r).unwrap()).collect();
        assert_eq!(lines[0].len(), 2);
        assert_eq!(lines[1].len(), 3);
        assert_eq!(lines[2].len(), 4);
        assert!(lines.iter().all(|l| l[0].0 == 0.25 && l.last().unwrap().0 == 0.0));
        assert!(dominance_gap(3, 100).unwrap() <= 1e-15);
        assert_eq!(polyline(&comparison(2, 0.0).unwrap()[1]).unwrap().len(), 2);
    }

    proptest! {
        #[test]
        fn branches_meet(m in 2u32..40, t in 0.0f64..1.0, eps in 0.0f64..0.1, p in 2.01f64..50.0) {
            let mf = m as f64;
            let main = Region::Main { m, kappa: 1.0 / (2.0 * mf + 2.0) + t * (1.0 / (2.0 * mf) - 1.0 / (2.0 * mf + 2.0)), eps };
            let clad = Region::Cladek { m, kappa: 1.0 / (4.0 * mf - 2.0) };
            let lp = Region::LambdaP { p, eps };
            for r in [main, clad, lp] {
                prop_assert!(continuity_defect(&r) <= 1e-12);
            }
            prop_assert!(dominance_gap(m, 100).unwrap() <= 1e-15);
        }
    }
}
