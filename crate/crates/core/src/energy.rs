//! Sweep-line overlap counts of m-fold interval sums and the additive-energy
//! bookkeeping of the cap partition.

use std::ops::Add;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::cantor::{CantorSystem, Interval, ScalePartition};
use crate::error::{check_budget, Error, Result};
use crate::par;
use crate::rational::{self, Q};

/// Default cap on ordered tuples per sweep.
pub const SWEEP_BUDGET: u128 = 10_000_000;

/// Stored witness tuples are capped at this many.
pub const WITNESS_CAP: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapWitness {
    /// Smallest point of maximal multiplicity.
    #[serde(serialize_with = "rational::ser")]
    pub y: Q,
    pub multiplicity: u64,
    /// Ordered index tuples whose sum interval contains y.
    pub tuples: Vec<Vec<usize>>,
}

/// Visits every nondecreasing index tuple of length m over 0..n.
fn for_each_sorted_tuple(n: usize, m: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; m];
    loop {
        f(&idx);
        let mut pos = m;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] + 1 < n {
                let v = idx[pos] + 1;
                idx[pos..].iter_mut().for_each(|x| *x = v);
                break;
            }
        }
    }
}

fn for_each_tuple(n: usize, m: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; m];
    loop {
        f(&idx);
        let mut pos = 0;
        loop {
            if pos == m {
                return;
            }
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Number of distinct orderings of a sorted tuple.
fn multinomial(t: &[usize]) -> u64 {
    let mut r: u64 = (1..=t.len() as u64).product();
    let mut i = 0;
    while i < t.len() {
        let mut j = i;
        while j < t.len() && t[j] == t[i] {
            j += 1;
        }
        r /= (1..=(j - i) as u64).product::<u64>();
        i = j;
    }
    r
}

/// Maximal total weight of closed intervals over a common point; returns
/// the smallest such point. Starts sort before ends at equal coordinates.
fn sweep<T: Ord + Clone>(intervals: &[(T, T, u64)]) -> (T, u64) {
    let mut events: Vec<(T, u8, u64)> = Vec::with_capacity(2 * intervals.len());
    for (lo, hi, w) in intervals {
        events.push((lo.clone(), 0, *w));
        events.push((hi.clone(), 1, *w));
    }
    events.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut cur: u64 = 0;
    let mut best: u64 = 0;
    let mut at = events[0].0.clone();
    for (x, kind, w) in events {
        if kind == 0 {
            cur += w;
            if cur > best {
                best = cur;
                at = x;
            }
        } else {
            cur -= w;
        }
    }
    (at, best)
}

/// Integer endpoints over a common denominator.
struct Scaled<T> {
    lo: Vec<T>,
    hi: Vec<T>,
}

fn sum_intervals<T>(s: &Scaled<T>, m: usize, reduce: bool) -> Vec<(T, T, u64)>
where
    T: Clone + Zero + Add<Output = T>,
{
    let n = s.lo.len();
    let mut out = Vec::new();
    let mut push = |t: &[usize], w: u64| {
        let mut lo = T::zero();
        let mut hi = T::zero();
        for &i in t {
            lo = lo + s.lo[i].clone();
            hi = hi + s.hi[i].clone();
        }
        out.push((lo, hi, w));
    };
    if reduce {
        for_each_sorted_tuple(n, m, |t| push(t, multinomial(t)));
    } else {
        for_each_tuple(n, m, |t| push(t, 1));
    }
    out
}

fn overlap_generic<T>(s: &Scaled<T>, m: usize, reduce: bool) -> (T, u64)
where
    T: Ord + Clone + Zero + Add<Output = T>,
{
    sweep(&sum_intervals(s, m, reduce))
}

/// Exact maximal multiplicity over ℝ of the ordered m-fold sums
/// I₁ + … + I_m of the given closed intervals.
pub fn sumset_overlap(intervals: &[Interval], m: u32) -> Result<OverlapWitness> {
    sumset_overlap_with(intervals, m, true, SWEEP_BUDGET)
}

/// As [`sumset_overlap`], choosing whether sorted-tuple symmetry reduction is used.
pub fn sumset_overlap_with(intervals: &[Interval], m: u32, reduce: bool, budget: u128) -> Result<OverlapWitness> {
    if intervals.is_empty() || m == 0 {
        return Err(Error::invalid("need at least one interval and m >= 1"));
    }
    let n = intervals.len();
    check_budget(
        "sumset_overlap",
        (n as u128).checked_pow(m).unwrap_or(u128::MAX),
        budget,
    )?;
    let den = rational::common_denominator(intervals.iter().flat_map(|i| [&i.lo, &i.hi]));
    let lo: Vec<BigInt> = intervals.iter().map(|i| (&i.lo * &den).to_integer()).collect();
    let hi: Vec<BigInt> = intervals.iter().map(|i| (&i.hi * &den).to_integer()).collect();
    let limit = BigInt::from(i128::MAX) / BigInt::from(m as u64 + 1);
    let fits = lo.iter().chain(&hi).all(|x| x.magnitude() <= limit.magnitude());
    let m = m as usize;
    let y_scaled: BigInt;
    let multiplicity;
    if fits {
        let s = Scaled {
            lo: lo.iter().map(|x| x.to_i128().unwrap()).collect(),
            hi: hi.iter().map(|x| x.to_i128().unwrap()).collect(),
        };
        let (y, mult) = overlap_generic(&s, m, reduce);
        y_scaled = BigInt::from(y);
        multiplicity = mult;
    } else {
        let s = Scaled { lo, hi };
        let (y, mult) = overlap_generic(&s, m, reduce);
        y_scaled = y;
        multiplicity = mult;
    }
    let y = Q::new(y_scaled, den);
    let mut tuples = Vec::new();
    for_each_tuple(n, m, |t| {
        if tuples.len() < WITNESS_CAP {
            let lo: Q = t.iter().map(|&i| intervals[i].lo.clone()).sum();
            let hi: Q = t.iter().map(|&i| intervals[i].hi.clone()).sum();
            if lo <= y && y <= hi {
                tuples.push(t.to_vec());
            }
        }
    });
    Ok(OverlapWitness {
        y,
        multiplicity,
        tuples,
    })
}

/// Brute-force multiplicity: the maximum over `samples` uniform points and
/// every sum-interval endpoint of the number of ordered tuples covering it.
pub fn overlap_by_sampling(intervals: &[Interval], m: u32, samples: usize) -> u64 {
    let m = m as usize;
    let lo: Vec<f64> = intervals.iter().map(Interval::lo_f64).collect();
    let hi: Vec<f64> = intervals.iter().map(Interval::hi_f64).collect();
    let mut sums: Vec<(Q, Q)> = Vec::new();
    for_each_tuple(intervals.len(), m, |t| {
        let a: Q = t.iter().map(|&i| intervals[i].lo.clone()).sum();
        let b: Q = t.iter().map(|&i| intervals[i].hi.clone()).sum();
        sums.push((a, b));
    });
    let min = m as f64 * lo.iter().copied().fold(f64::INFINITY, f64::min);
    let max = m as f64 * hi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut points: Vec<Q> = (0..samples)
        .map(|i| rational::from_f64(min + (max - min) * (i as f64 + 0.5) / samples as f64))
        .collect();
    points.extend(sums.iter().flat_map(|(a, b)| [a.clone(), b.clone()]));
    let counts = par::map(&points, |y| {
        sums.iter().filter(|(a, b)| a <= y && y <= b).count() as u64
    });
    counts.into_iter().max().unwrap_or(0)
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelCheck {
    pub k: u32,
    pub m: u32,
    pub multiplicity: u64,
    /// Certified B_m^* level of the seed points.
    pub g: u64,
    /// g^k.
    #[serde(rename = "paper_bound")]
    pub bound: u128,
    pub holds: bool,
}

/// Overlap of 𝕀_k against g^k for the certified seed level g.
pub fn level_overlap_check(sys: &CantorSystem, m: u32, k: u32) -> Result<LevelCheck> {
    let g = sys
        .seed
        .g
        .ok_or_else(|| Error::invalid("seed has no B_m certificate (p not even)"))?;
    let level = sys.level(k)?;
    let w = sumset_overlap(&level, m)?;
    let bound = (g as u128).checked_pow(k).unwrap_or(u128::MAX);
    Ok(LevelCheck {
        k,
        m,
        multiplicity: w.multiplicity,
        g,
        bound,
        holds: (w.multiplicity as u128) <= bound,
    })
}

/// For the seed family: sum intervals whose point sums differ are disjoint.
/// Checked exactly by comparing hulls of the groups with equal point sum.
pub fn integer_separation_holds(sys: &CantorSystem, m: u32) -> bool {
    let pts = sys.seed.source.set.elements();
    let iv = &sys.seed.intervals;
    let mut groups: std::collections::BTreeMap<u64, (Q, Q)> = Default::default();
    for_each_sorted_tuple(pts.len(), m as usize, |t| {
        let s: u64 = t.iter().map(|&i| pts[i]).sum();
        let lo: Q = t.iter().map(|&i| iv[i].lo.clone()).sum();
        let hi: Q = t.iter().map(|&i| iv[i].hi.clone()).sum();
        let e = groups.entry(s).or_insert_with(|| (lo.clone(), hi.clone()));
        if lo < e.0 {
            e.0 = lo;
        }
        if hi > e.1 {
            e.1 = hi;
        }
    });
    let hulls: Vec<&(Q, Q)> = groups.values().collect();
    hulls.windows(2).all(|w| w[0].1 < w[1].0)
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassOverlap {
    pub class: usize,
    pub intervals: usize,
    pub m1: u128,
    /// False when the sweep exceeded its budget and `m1` is the analytic bound.
    pub measured: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeTerms {
    /// 2m·log(K+1)/log δ⁻¹.
    pub classes: f64,
    /// m·log N/log δ⁻¹.
    pub base: f64,
    /// K·log g/log δ⁻¹.
    pub growth: f64,
}

impl EnvelopeTerms {
    pub fn total(&self) -> f64 {
        self.classes + self.base + self.growth
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub delta: f64,
    pub m: u32,
    pub n: u64,
    pub g: u64,
    pub k: u32,
    pub m0: u64,
    pub classes: Vec<ClassOverlap>,
    pub xi_upper: u128,
    #[serde(rename = "paper_bound")]
    pub bound: u128,
    pub terms: EnvelopeTerms,
}

impl EnergyReport {
    pub fn all_measured(&self) -> bool {
        self.classes.iter().all(|c| c.measured)
    }

    pub fn ratio(&self) -> f64 {
        (self.xi_upper as f64).ln() / -self.delta.ln()
    }

    pub fn within_bound(&self) -> bool {
        self.xi_upper <= self.bound
    }
}

fn sat_pow(b: u128, e: u32) -> u128 {
    b.checked_pow(e).unwrap_or(u128::MAX)
}

/// (K+1)^{2m}·N^m·g^K.
pub fn bound(k: u32, m: u32, n: u64, g: u64) -> u128 {
    sat_pow(k as u128 + 1, 2 * m)
        .saturating_mul(sat_pow(n as u128, m))
        .saturating_mul(sat_pow(g as u128, k))
}

/// Overlap statistics of the cap partition by classes 𝕀'_0 (leaves), 𝕀'_1..𝕀'_K.
/// Caps are projected to their base intervals. Classes over budget fall back
/// to the bound N^m·g^K and are flagged.
pub fn energy_partition(part: &ScalePartition, m: u32, n: u64, g: u64, budget: u128) -> Result<EnergyReport> {
    let k = part.k;
    let classes: Vec<&[Interval]> = part.classes();
    let analytic = sat_pow(n as u128, m).saturating_mul(sat_pow(g as u128, k));
    let overlaps = classes
        .iter()
        .enumerate()
        .map(|(c, xs)| {
            let size = (xs.len() as u128).checked_pow(m).unwrap_or(u128::MAX);
            if size <= budget {
                let w = sumset_overlap_with(xs, m, true, budget)?;
                Ok(ClassOverlap {
                    class: c,
                    intervals: xs.len(),
                    m1: w.multiplicity as u128,
                    measured: true,
                })
            } else {
                Ok(ClassOverlap {
                    class: c,
                    intervals: xs.len(),
                    m1: analytic,
                    measured: false,
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let m0 = k as u64 + 1;
    let max_m1 = overlaps.iter().map(|c| c.m1).max().unwrap_or(0);
    let delta = rational::to_f64(&part.delta);
    Ok(EnergyReport {
        delta,
        m,
        n,
        g,
        k,
        m0,
        xi_upper: sat_pow(m0 as u128, 2 * m).saturating_mul(max_m1),
        bound: bound(k, m, n, g),
        terms: envelope_terms(k, m, n, g, delta),
        classes: overlaps,
    })
}

pub fn envelope_terms(k: u32, m: u32, n: u64, g: u64, delta: f64) -> EnvelopeTerms {
    let l = -delta.ln();
    EnvelopeTerms {
        classes: 2.0 * m as f64 * (k as f64 + 1.0).ln() / l,
        base: m as f64 * (n as f64).ln() / l,
        growth: k as f64 * (g as f64).ln() / l,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentRow {
    pub delta: f64,
    pub k: u32,
    pub xi_upper: u128,
    #[serde(rename = "paper_bound")]
    pub bound: u128,
    pub ratio: f64,
    pub envelope: f64,
    pub measured: bool,
}

/// log Ξ_upper / log δ⁻¹ along a ladder, with g the overlap level used in
/// the analytic fallback and the envelope.
pub fn energy_exponent_table(
    sys: &CantorSystem,
    m: u32,
    ladder: &[Q],
    g: u64,
    budget: u128,
) -> Result<Vec<ExponentRow>> {
    if ladder.is_empty() {
        return Err(Error::invalid("empty delta ladder"));
    }
    ladder
        .iter()
        .map(|delta| {
            let k = sys.k_delta(delta)?;
            let size = (sys.n() as u128).checked_pow(k).unwrap_or(u128::MAX);
            let r = if size.saturating_pow(m) <= budget {
                let part = sys.scale_partition(delta)?;
                energy_partition(&part, m, sys.n(), g, budget)?
            } else {
                bound_only_report(delta, k, m, sys.n(), g)
            };
            Ok(ExponentRow {
                delta: r.delta,
                k: r.k,
                xi_upper: r.xi_upper,
                bound: r.bound,
                ratio: r.ratio(),
                envelope: r.terms.total(),
                measured: r.all_measured(),
            })
        })
        .collect()
}

/// Report for a δ too deep to materialize: every class takes the analytic bound.
pub fn bound_only_report(delta: &Q, k: u32, m: u32, n: u64, g: u64) -> EnergyReport {
    let analytic = sat_pow(n as u128, m).saturating_mul(sat_pow(g as u128, k));
    let m0 = k as u64 + 1;
    let d = rational::to_f64(delta);
    EnergyReport {
        delta: d,
        m,
        n,
        g,
        k,
        m0,
        classes: (0..=k as usize)
            .map(|c| ClassOverlap {
                class: c,
                intervals: 0,
                m1: analytic,
                measured: false,
            })
            .collect(),
        xi_upper: sat_pow(m0 as u128, 2 * m).saturating_mul(analytic),
        bound: bound(k, m, n, g),
        terms: envelope_terms(k, m, n, g, d),
    }
}

/// Smallest N with (1/2m)·log g/log N ≤ m·ε.
pub fn choose_n(m: u32, g: u64, epsilon: f64) -> Result<u64> {
    if epsilon <= 0.0 {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if g <= 1 {
        return Ok(2);
    }
    let need = (g as f64).ln() / (2.0 * m as f64 * m as f64 * epsilon);
    let n = need.exp().ceil() as u64;
    Ok(n.max(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::build_seed;

    fn iv(a: i64, b: i64, d: i64) -> Interval {
        Interval::new(rational::frac(a, d), rational::frac(b, d)).unwrap()
    }

    #[test]
    fn single_interval() {
        let w = sumset_overlap(&[iv(0, 1, 4)], 2).unwrap();
        assert_eq!(w.multiplicity, 1);
    }

    #[test]
    fn two_disjoint_intervals() {
        let a = iv(0, 1, 10);
        let b = iv(5, 6, 10);
        let w = sumset_overlap(&[a, b], 2).unwrap();
        assert_eq!(w.multiplicity, 2);
        assert_eq!(w.y, rational::frac(5, 10));
        assert_eq!(w.tuples.len(), 2);
    }

    #[test]
    fn touching_endpoints_count_as_overlap() {
        let w = sumset_overlap(&[iv(0, 1, 2), iv(1, 2, 2)], 1).unwrap();
        assert_eq!(w.multiplicity, 2);
    }

    #[test]
    fn reduction_matches_full_sweep() {
        let xs = vec![iv(0, 3, 20), iv(2, 5, 20), iv(7, 8, 20), iv(9, 13, 20), iv(14, 15, 20)];
        for m in 1..=3 {
            let a = sumset_overlap_with(&xs, m, true, SWEEP_BUDGET).unwrap();
            let b = sumset_overlap_with(&xs, m, false, SWEEP_BUDGET).unwrap();
            assert_eq!(a.multiplicity, b.multiplicity);
            assert_eq!(a.multiplicity, overlap_by_sampling(&xs, m, 10_000));
        }
    }

    #[test]
    fn seed_overlap_below_certified_level() {
        let sys = CantorSystem::new(build_seed(4, 4.0, 0, Some(3)).unwrap());
        assert!(integer_separation_holds(&sys, 2));
        for k in 1..=2 {
            let c = level_overlap_check(&sys, 2, k).unwrap();
            assert!(c.holds, "{c:?}");
        }
    }

    #[test]
    fn partition_report() {
        let sys = CantorSystem::new(build_seed(4, 4.0, 0, Some(3)).unwrap());
        let part = sys.scale_partition(&rational::frac(1, 16)).unwrap();
        assert_eq!(part.k, 1);
        let r = energy_partition(&part, 2, 4, 4, SWEEP_BUDGET).unwrap();
        assert_eq!(r.m0, 2);
        assert!(r.classes[0].m1 <= 4);
        assert!(r.within_bound());
    }

    #[test]
    fn n_choice() {
        let n = choose_n(2, 4, 0.05).unwrap();
        assert!((4f64).ln() / (4.0 * (n as f64).ln()) <= 2.0 * 0.05 + 1e-12);
        let n1 = n - 1;
        assert!((4f64).ln() / (4.0 * (n1 as f64).ln()) > 0.1);
    }

    #[test]
    fn growth_term_falls_with_n() {
        let d = 2f64.powi(-200);
        let k16 = envelope_terms(12, 2, 16, 4, d).growth;
        let k32 = envelope_terms(10, 2, 32, 4, d).growth;
        assert!(k32 < k16);
    }
}
