//! Seed interval family, iterated Cantor levels and the scale partition I(δ).
//!
//! All endpoints are exact rationals. For even p they are the true values;
//! for other p the base length N^{−p/2} is the exact value of its f64
//! rounding and everything downstream is exact relative to that length.

use std::sync::{Arc, RwLock};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};
use crate::lambdap::{self, PointSet};
use crate::par;
use crate::rational::{self, Q};

/// Hard cap on the number of intervals in one level.
pub const LEVEL_BUDGET: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    #[serde(serialize_with = "rational::ser", deserialize_with = "rational::de")]
    pub lo: Q,
    #[serde(serialize_with = "rational::ser", deserialize_with = "rational::de")]
    pub hi: Q,
}

impl Interval {
    pub fn new(lo: Q, hi: Q) -> Result<Self> {
        if lo >= hi {
            return Err(Error::invalid("interval needs lo < hi"));
        }
        Ok(Interval { lo, hi })
    }

    /// [−1/2, 1/2].
    pub fn unit() -> Self {
        Interval {
            lo: -rational::half(),
            hi: rational::half(),
        }
    }

    pub fn len(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn center(&self) -> Q {
        (&self.lo + &self.hi) / rational::int(2)
    }

    pub fn lo_f64(&self) -> f64 {
        rational::to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        rational::to_f64(&self.hi)
    }

    pub fn len_f64(&self) -> f64 {
        rational::to_f64(&self.len())
    }

    pub fn center_f64(&self) -> f64 {
        rational::to_f64(&self.center())
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// L_I^{−1}: the image of J ⊆ [−1/2, 1/2] under the increasing affine map
    /// from [−1/2, 1/2] onto self.
    pub fn embed(&self, j: &Interval) -> Interval {
        let len = self.len();
        let half = rational::half();
        Interval {
            lo: &self.lo + (&j.lo + &half) * &len,
            hi: &self.lo + (&j.hi + &half) * &len,
        }
    }

    /// L_I: the inverse of [`Interval::embed`].
    pub fn normalize(&self, j: &Interval) -> Interval {
        let len = self.len();
        let half = rational::half();
        Interval {
            lo: (&j.lo - &self.lo) / &len - &half,
            hi: (&j.hi - &self.lo) / &len - &half,
        }
    }
}

/// The seed family I(N;p) and the point set it came from.
#[derive(Clone, Debug, Serialize)]
pub struct SeedFamily {
    pub n: u64,
    pub p: f64,
    pub intervals: Vec<Interval>,
    pub source: PointSet,
    /// Certified B_m^* level of the source (even p).
    pub g: Option<u64>,
    pub seed: u64,
}

impl SeedFamily {
    /// N^{−p/2}.
    pub fn unit_length(&self) -> Q {
        lambdap::unit_length(self.n, self.p)
    }

    /// Gaps between consecutive intervals.
    pub fn gaps(&self) -> Vec<Interval> {
        self.intervals
            .windows(2)
            .map(|w| Interval {
                lo: w[0].hi.clone(),
                hi: w[1].lo.clone(),
            })
            .collect()
    }

    /// Checks lengths, separation and the two end intervals exactly.
    pub fn verify(&self) -> Result<()> {
        let u = self.unit_length();
        if self.intervals.len() as u64 != self.n {
            return Err(Error::Certification("seed family size differs from N".into()));
        }
        if let Some(bad) = self.intervals.iter().find(|i| i.len() != u) {
            return Err(Error::Certification(format!(
                "seed interval [{}, {}] has the wrong length",
                bad.lo, bad.hi
            )));
        }
        let sep = rational::from_f64(self.p) / rational::int(4) * &u;
        if self.gaps().iter().any(|g| g.len() < sep) {
            return Err(Error::Certification("seed gap below (p/4)N^{-p/2}".into()));
        }
        let half = rational::half();
        let first = &self.intervals[0];
        let last = self.intervals.last().unwrap();
        if first.lo != -half.clone() || first.hi != -half.clone() + &u {
            return Err(Error::Certification("leftmost seed interval is not I^-".into()));
        }
        if last.hi != half || last.lo != half.clone() - &u {
            return Err(Error::Certification("rightmost seed interval is not I^+".into()));
        }
        Ok(())
    }
}

/// Builds I(N;p) around the points of P(N;p), rescaled into [−1/2, 1/2].
pub fn build_seed(n: u64, p: f64, seed: u64, grid: Option<u64>) -> Result<SeedFamily> {
    let source = lambdap::build_p(n, p, seed, grid)?;
    seed_from_points(source)
}

pub fn seed_from_points(source: PointSet) -> Result<SeedFamily> {
    let np = rational::int(source.grid as i64);
    let d = source.d_p.clone();
    let half = rational::half();
    let intervals = source
        .set
        .elements()
        .iter()
        .map(|&x| {
            let x = rational::int(x as i64);
            let (lo, hi) = if x.is_zero() {
                (Q::zero(), d.clone())
            } else if x == np {
                (&np - &d, np.clone())
            } else {
                (&x - &d / rational::int(2), &x + &d / rational::int(2))
            };
            Interval {
                lo: lo / &np - &half,
                hi: hi / &np - &half,
            }
        })
        .collect();
    let fam = SeedFamily {
        n: source.n,
        p: source.p,
        g: source.g_star(),
        seed: source.seed,
        intervals,
        source,
    };
    fam.verify()?;
    Ok(fam)
}

/// The seed together with lazily materialized levels 𝕀_k.
#[derive(Debug)]
pub struct CantorSystem {
    pub seed: SeedFamily,
    levels: RwLock<Vec<Arc<Vec<Interval>>>>,
}

impl CantorSystem {
    pub fn new(seed: SeedFamily) -> Self {
        let level1 = Arc::new(seed.intervals.clone());
        CantorSystem {
            seed,
            levels: RwLock::new(vec![Arc::new(vec![Interval::unit()]), level1]),
        }
    }

    pub fn n(&self) -> u64 {
        self.seed.n
    }

    pub fn p(&self) -> f64 {
        self.seed.p
    }

    /// Length of every level-k interval, N^{−pk/2}.
    pub fn level_length(&self, k: u32) -> Q {
        rational::pow(&self.seed.unit_length(), k)
    }

    pub fn materialized_depth(&self) -> u32 {
        self.levels.read().unwrap().len() as u32 - 1
    }

    /// 𝕀_k (level 0 is [−1/2, 1/2], level 1 the seed family).
    pub fn level(&self, k: u32) -> Result<Arc<Vec<Interval>>> {
        if let Some(l) = self.levels.read().unwrap().get(k as usize) {
            return Ok(l.clone());
        }
        let size = (self.n() as u128).checked_pow(k).unwrap_or(u128::MAX);
        check_budget("cantor level", size, LEVEL_BUDGET)?;
        let mut levels = self.levels.write().unwrap();
        while levels.len() <= k as usize {
            let prev = levels.last().unwrap().clone();
            let seed = &self.seed.intervals;
            let children: Vec<Vec<Interval>> =
                par::map(&prev, |parent| seed.iter().map(|j| parent.embed(j)).collect());
            levels.push(Arc::new(children.into_iter().flatten().collect()));
        }
        Ok(levels[k as usize].clone())
    }

    /// Connected components of C_{k−1} \ C_k, in increasing order.
    pub fn removed(&self, k: u32) -> Result<Vec<Interval>> {
        if k == 0 {
            return Err(Error::invalid("removed intervals start at generation 1"));
        }
        let parents = self.level(k - 1)?;
        let gaps = self.seed.gaps();
        let out: Vec<Vec<Interval>> =
            par::map(&parents, |parent| gaps.iter().map(|g| parent.embed(g)).collect());
        Ok(out.into_iter().flatten().collect())
    }

    /// K(δ): the smallest k with N^{−pk/2} < δ^{1/2}, compared exactly.
    pub fn k_delta(&self, delta: &Q) -> Result<u32> {
        if !delta.is_positive() || *delta >= rational::half() {
            return Err(Error::invalid("delta must lie in (0, 1/2)"));
        }
        let u2 = rational::pow(&self.seed.unit_length(), 2);
        let mut k = 1u32;
        let mut len2 = u2.clone();
        while len2 >= *delta {
            len2 *= &u2;
            k += 1;
        }
        Ok(k)
    }

    pub fn scale_partition(&self, delta: &Q) -> Result<ScalePartition> {
        let k = self.k_delta(delta)?;
        let leaves = self.level(k)?.as_ref().clone();
        let removed = (1..=k).map(|j| self.removed(j)).collect::<Result<Vec<_>>>()?;
        Ok(ScalePartition {
            delta: delta.clone(),
            k,
            leaves,
            removed,
        })
    }
}

/// I(δ): the leaves 𝕀_{K(δ)} and the removed generations 1..=K(δ).
#[derive(Clone, Debug, Serialize)]
pub struct ScalePartition {
    #[serde(serialize_with = "rational::ser")]
    pub delta: Q,
    pub k: u32,
    pub leaves: Vec<Interval>,
    /// `removed[j]` holds generation j + 1.
    pub removed: Vec<Vec<Interval>>,
}

impl ScalePartition {
    pub fn card(&self) -> usize {
        self.leaves.len() + self.removed.iter().map(Vec::len).sum::<usize>()
    }

    pub fn removed_count(&self) -> usize {
        self.removed.iter().map(Vec::len).sum()
    }

    /// Classes 𝕀'_0 (leaves), 𝕀'_1, …, 𝕀'_K.
    pub fn classes(&self) -> Vec<&[Interval]> {
        let mut out: Vec<&[Interval]> = vec![&self.leaves];
        out.extend(self.removed.iter().map(Vec::as_slice));
        out
    }

    /// Every part, sorted by left endpoint, tagged with its class index.
    pub fn sorted_parts(&self) -> Vec<(usize, &Interval)> {
        let mut all: Vec<(usize, &Interval)> = self
            .classes()
            .into_iter()
            .enumerate()
            .flat_map(|(c, xs)| xs.iter().map(move |i| (c, i)))
            .collect();
        all.sort_by(|a, b| a.1.lo.cmp(&b.1.lo));
        all
    }

    /// True when the parts tile [−1/2, 1/2] with shared endpoints only.
    pub fn tiles_unit(&self) -> bool {
        let parts = self.sorted_parts();
        let mut at = -rational::half();
        for (_, i) in parts {
            if i.lo != at {
                return false;
            }
            at = i.hi.clone();
        }
        at == rational::half()
    }
}

/// w_Q(x) = (1 + |x − c_Q|/|Q|)^{−10}.
pub fn weight_w(q: &Interval, x: f64) -> f64 {
    weight(q.center_f64(), q.len_f64(), x)
}

pub fn weight(center: f64, len: f64, x: f64) -> f64 {
    (1.0 + (x - center).abs() / len).powi(-10)
}

/// Smallest k with len_k² < δ for a base length `unit`; used where only the
/// length law matters.
pub fn k_for_length(unit: &Q, delta: &Q) -> u32 {
    let u2 = rational::pow(unit, 2);
    let mut k = 1;
    let mut l = u2.clone();
    while l >= *delta {
        l *= &u2;
        k += 1;
    }
    k
}

/// Checks N^{K−1} ≤ δ^{−1/p} < N^K in floating point with a relative guard.
pub fn k_delta_envelope_holds(n: u64, p: f64, delta: f64, k: u32) -> bool {
    let t = delta.powf(-1.0 / p);
    let lo = (n as f64).powi(k as i32 - 1);
    let hi = (n as f64).powi(k as i32);
    lo <= t * (1.0 + 1e-12) && t < hi * (1.0 + 1e-12)
}
