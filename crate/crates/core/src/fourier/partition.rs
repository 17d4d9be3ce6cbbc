//! Dyadic subdivision of I(δ) and the smooth partition of unity over it.

use serde::Serialize;

use super::bump::{BumpProfile, ORDERS};
use crate::cantor::{Interval, ScalePartition};
use crate::error::{Error, Result};
use crate::par;
use crate::rational::{self, Q};

/// One subinterval J of 𝒥(δ).
#[derive(Clone, Debug, Serialize)]
pub struct Piece {
    pub interval: Interval,
    /// Index of the parent part in position order.
    pub parent: usize,
    /// Class of the parent (0 = leaf, j = removed generation j).
    pub class: usize,
    #[serde(skip)]
    pub center: f64,
    #[serde(skip)]
    pub len: f64,
}

/// j_I: the smallest j ≥ 1 with 2^{−j}|I| < δ.
pub fn j_index(len: &Q, delta: &Q) -> u32 {
    let mut j = 1;
    let mut l = len / rational::int(2);
    while l >= *delta {
        l /= rational::int(2);
        j += 1;
    }
    j
}

/// Splits every part I into 2·j_I pieces symmetric about c_I: on each side
/// lengths 2^{−2}|I|, …, 2^{−j_I}|I| moving outward, then one more 2^{−j_I}|I|.
pub fn subdivide_caps(part: &ScalePartition) -> Vec<Piece> {
    let mut out = Vec::new();
    for (pi, (class, iv)) in part.sorted_parts().into_iter().enumerate() {
        let len = iv.len();
        let j = j_index(&len, &part.delta);
        let c = iv.center();
        // Right-side breakpoints c = a_0 < a_1 < … < a_{j} = r.
        let mut right = vec![c.clone()];
        let mut step = &len / rational::int(4);
        for _ in 1..j {
            let next = right.last().unwrap() + &step;
            right.push(next);
            step /= rational::int(2);
        }
        right.push(iv.hi.clone());
        let left: Vec<Q> = right.iter().map(|a| &c * rational::int(2) - a).collect();
        let mut pts: Vec<Q> = left.into_iter().rev().collect();
        pts.pop();
        pts.extend(right);
        for w in pts.windows(2) {
            let interval = Interval {
                lo: w[0].clone(),
                hi: w[1].clone(),
            };
            out.push(Piece {
                center: interval.center_f64(),
                len: interval.len_f64(),
                interval,
                parent: pi,
                class,
            });
        }
    }
    out
}

/// True when every consecutive length ratio lies in [1/2, 2], exactly.
pub fn consecutive_ratios_ok(pieces: &[Piece]) -> bool {
    pieces.windows(2).all(|w| {
        let a = w[0].interval.len();
        let b = w[1].interval.len();
        &a * rational::int(2) >= b && &b * rational::int(2) >= a
    })
}

/// True when the pieces tile [−1/2, 1/2] exactly.
pub fn tiles_unit(pieces: &[Piece]) -> bool {
    let mut at = -rational::half();
    for p in pieces {
        if p.interval.lo != at {
            return false;
        }
        at = p.interval.hi.clone();
    }
    at == rational::half()
}

/// Taylor coefficients (value, f', f''/2, …) of order < ORDERS.
type Jet = [f64; ORDERS];

fn jet_div(num: &Jet, den: &Jet) -> Jet {
    let mut q = [0.0; ORDERS];
    for k in 0..ORDERS {
        let mut s = num[k];
        for i in 1..=k {
            s -= den[i] * q[k - i];
        }
        q[k] = s / den[0];
    }
    q
}

const FACT: [f64; ORDERS] = [1.0, 1.0, 2.0, 6.0, 24.0];

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub samples: usize,
    /// max |Σ β̃_J − 1| over the sample.
    pub sum_error: f64,
    pub sum_bar_min: f64,
    pub sum_bar_max: f64,
    pub ratios_ok: bool,
    /// Largest (2|J|)^k·|β̃_J^{(k)}|/c over the certification sample.
    pub class_b_max: f64,
}

/// β̄_J(t) = β((t − c_J)/|2J|), β̃_J = β̄_J/Σβ̄, β_J = β̃_J/c.
#[derive(Clone, Debug, Serialize)]
pub struct PartitionOfUnity {
    pub pieces: Vec<Piece>,
    /// Power of two dominating (2|J|)^k·|β̃_J^{(k)}| for k ≤ 4.
    pub c: f64,
    pub bump: BumpProfile,
    pub report: PartitionReport,
    #[serde(skip)]
    supp_lo_suffix_min: Vec<f64>,
    #[serde(skip)]
    supp_hi_prefix_max: Vec<f64>,
}

pub const CHECK_SAMPLES: usize = 1 << 14;
const C_SAMPLES_PER_PIECE: usize = 128;
const CERT_SAMPLES_PER_PIECE: usize = 509;

impl PartitionOfUnity {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::invalid("empty subdivision"));
        }
        if !tiles_unit(&pieces) {
            return Err(Error::Certification("subdivision does not tile [-1/2, 1/2]".into()));
        }
        let bump = BumpProfile::partition();
        let r = bump.support_radius();
        let mut supp_hi_prefix_max: Vec<f64> =
            pieces.iter().map(|p| p.center + 2.0 * r * p.len).collect();
        for i in 1..supp_hi_prefix_max.len() {
            supp_hi_prefix_max[i] = supp_hi_prefix_max[i].max(supp_hi_prefix_max[i - 1]);
        }
        let mut supp_lo_suffix_min: Vec<f64> =
            pieces.iter().map(|p| p.center - 2.0 * r * p.len).collect();
        for i in (0..supp_lo_suffix_min.len() - 1).rev() {
            supp_lo_suffix_min[i] = supp_lo_suffix_min[i].min(supp_lo_suffix_min[i + 1]);
        }
        let mut pu = PartitionOfUnity {
            pieces,
            c: 1.0,
            bump,
            report: PartitionReport {
                samples: 0,
                sum_error: 0.0,
                sum_bar_min: 0.0,
                sum_bar_max: 0.0,
                ratios_ok: false,
                class_b_max: 0.0,
            },
            supp_lo_suffix_min,
            supp_hi_prefix_max,
        };
        pu.c = pu.normalizing_constant();
        pu.report = pu.check()?;
        Ok(pu)
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Indices of pieces whose β̄ support may contain t.
    fn candidates(&self, t: f64) -> std::ops::Range<usize> {
        let a = self.supp_hi_prefix_max.partition_point(|&x| x <= t);
        let b = self.supp_lo_suffix_min.partition_point(|&x| x < t);
        a..b.max(a)
    }

    fn bar_jet(&self, j: usize, t: f64) -> Jet {
        let p = &self.pieces[j];
        let s = 2.0 * p.len;
        let u = (t - p.center) / s;
        let mut jet = [0.0; ORDERS];
        for (k, v) in jet.iter_mut().enumerate() {
            *v = self.bump.deriv(u, k) / s.powi(k as i32) / FACT[k];
        }
        jet
    }

    pub fn bar(&self, j: usize, t: f64) -> f64 {
        let p = &self.pieces[j];
        self.bump.eval((t - p.center) / (2.0 * p.len))
    }

    fn sum_bar_jet(&self, t: f64) -> Jet {
        let mut s = [0.0; ORDERS];
        for j in self.candidates(t) {
            let b = self.bar_jet(j, t);
            for k in 0..ORDERS {
                s[k] += b[k];
            }
        }
        s
    }

    pub fn sum_bar(&self, t: f64) -> f64 {
        self.candidates(t).map(|j| self.bar(j, t)).sum()
    }

    /// Derivatives of orders 0..=4 of β̃_J at t.
    pub fn tilde_derivatives(&self, j: usize, t: f64) -> [f64; ORDERS] {
        let q = jet_div(&self.bar_jet(j, t), &self.sum_bar_jet(t));
        let mut d = [0.0; ORDERS];
        for k in 0..ORDERS {
            d[k] = q[k] * FACT[k];
        }
        d
    }

    pub fn tilde(&self, j: usize, t: f64) -> f64 {
        let b = self.bar(j, t);
        if b == 0.0 {
            0.0
        } else {
            b / self.sum_bar(t)
        }
    }

    /// β_J(t) = β̃_J(t)/c.
    pub fn beta(&self, j: usize, t: f64) -> f64 {
        self.tilde(j, t) / self.c
    }

    /// Nonzero (J, β_J(t)) pairs.
    pub fn weights_at(&self, t: f64) -> Vec<(usize, f64)> {
        let s = self.sum_bar(t);
        self.candidates(t)
            .filter_map(|j| {
                let b = self.bar(j, t);
                (b != 0.0).then(|| (j, b / s / self.c))
            })
            .collect()
    }

    /// Sample points of piece j's support inside [−1/2, 1/2].
    fn support_samples(&self, j: usize, count: usize) -> Vec<f64> {
        let p = &self.pieces[j];
        let r = 2.0 * self.bump.support_radius() * p.len;
        let lo = (p.center - r).max(-0.5);
        let hi = (p.center + r).min(0.5);
        (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect()
    }

    /// max_k (2|J|)^k·|β̃_J^{(k)}| over a sample of J's support.
    fn scaled_sup(&self, j: usize, count: usize) -> f64 {
        let s = 2.0 * self.pieces[j].len;
        self.support_samples(j, count)
            .into_iter()
            .map(|t| {
                let d = self.tilde_derivatives(j, t);
                (0..ORDERS)
                    .map(|k| s.powi(k as i32) * d[k].abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    fn normalizing_constant(&self) -> f64 {
        let idx: Vec<usize> = (0..self.pieces.len()).collect();
        let sup = par::map(&idx, |&j| self.scaled_sup(j, C_SAMPLES_PER_PIECE))
            .into_iter()
            .fold(0.0, f64::max);
        let mut c = 1.0;
        while c < sup {
            c *= 2.0;
        }
        c
    }

    fn check(&self) -> Result<PartitionReport> {
        let pts: Vec<f64> = (0..CHECK_SAMPLES)
            .map(|i| -0.5 + i as f64 / (CHECK_SAMPLES - 1) as f64)
            .collect();
        let sums = par::map(&pts, |&t| {
            let tilde: f64 = self.candidates(t).map(|j| self.tilde(j, t)).sum();
            (tilde, self.sum_bar(t))
        });
        let sum_error = sums.iter().map(|s| (s.0 - 1.0).abs()).fold(0.0, f64::max);
        let sum_bar_min = sums.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        let sum_bar_max = sums.iter().map(|s| s.1).fold(0.0, f64::max);
        let idx: Vec<usize> = (0..self.pieces.len()).collect();
        let class_b_max = par::map(&idx, |&j| self.scaled_sup(j, CERT_SAMPLES_PER_PIECE))
            .into_iter()
            .fold(0.0, f64::max)
            / self.c;
        let report = PartitionReport {
            samples: CHECK_SAMPLES,
            sum_error,
            sum_bar_min,
            sum_bar_max,
            ratios_ok: consecutive_ratios_ok(&self.pieces),
            class_b_max,
        };
        if sum_error > 1e-10 {
            return Err(Error::Certification(format!(
                "partition of unity sums deviate from 1 by {sum_error:e}"
            )));
        }
        if class_b_max > 1.0 {
            return Err(Error::Certification(format!(
                "rescaled window derivatives reach {class_b_max} > 1"
            )));
        }
        Ok(report)
    }
}

/// 𝒥(δ) and its partition of unity.
pub fn partition_of_unity(part: &ScalePartition) -> Result<PartitionOfUnity> {
    PartitionOfUnity::new(subdivide_caps(part))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::{build_seed, CantorSystem};

    fn coarse() -> CantorSystem {
        CantorSystem::new(build_seed(2, 4.0, 0, None).unwrap())
    }

    #[test]
    fn j_index_example() {
        let d = rational::frac(1, 64);
        assert_eq!(j_index(&(&d * rational::int(8)), &d), 4);
        assert_eq!(j_index(&rational::frac(1, 100), &d), 1);
    }

    #[test]
    fn subdivision_tiles_and_grades() {
        let s = coarse();
        let part = s.scale_partition(&rational::frac(1, 32)).unwrap();
        let pieces = subdivide_caps(&part);
        assert!(tiles_unit(&pieces));
        assert!(consecutive_ratios_ok(&pieces));
        let count: u32 = part
            .sorted_parts()
            .iter()
            .map(|(_, i)| 2 * j_index(&i.len(), &part.delta))
            .sum();
        assert_eq!(pieces.len() as u32, count);
        let delta = rational::to_f64(&part.delta);
        assert!(pieces.first().unwrap().len < delta);
    }

    #[test]
    fn partition_sums_to_one() {
        let s = coarse();
        let part = s.scale_partition(&rational::frac(1, 64)).unwrap();
        let pu = partition_of_unity(&part).unwrap();
        assert!(pu.report.sum_error <= 1e-10);
        assert!(pu.report.sum_bar_min >= 1.0 - 1e-12 && pu.report.sum_bar_max <= 4.0);
        assert!(pu.report.class_b_max <= 1.0);
        assert!(pu.c >= 1.0 && pu.c.log2().fract() == 0.0);
        // The center of the widest piece sees no neighbour.
        let (j, p) = pu
            .pieces
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.len.total_cmp(&b.1.len))
            .unwrap();
        assert_eq!(pu.tilde(j, p.center), 1.0);
    }

    #[test]
    fn jets_match_finite_differences() {
        let s = coarse();
        let part = s.scale_partition(&rational::frac(1, 16)).unwrap();
        let pu = partition_of_unity(&part).unwrap();
        let j = pu.len() / 2;
        let p = &pu.pieces[j];
        let t = p.center + 0.6 * p.len;
        let h = 1e-6 * p.len;
        let d = pu.tilde_derivatives(j, t);
        let fd = (pu.tilde(j, t + h) - pu.tilde(j, t - h)) / (2.0 * h);
        assert!((d[0] - pu.tilde(j, t)).abs() < 1e-12);
        assert!((fd - d[1]).abs() < 1e-4 * (1.0 + d[1].abs()), "{fd} vs {}", d[1]);
    }
}
