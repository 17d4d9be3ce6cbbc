//! Λ(p) norm estimates for finite frequency sets and the point set that
//! seeds the Cantor construction.

use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::bump::BumpProfile;
use crate::rational::{self, Q};
use crate::sidon::{self, IntegerSet};
use crate::{par, rng};

pub const DEFAULT_OVERSAMPLE: usize = 8;
pub const DEFAULT_RESTARTS: usize = 8;
pub const DEFAULT_ITERS: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub p: f64,
    pub lower: f64,
    pub upper: Option<f64>,
    pub method: String,
    pub seed: u64,
}

/// `Some(m)` when p = 2m for an integer m ≥ 1.
pub fn even_half(p: f64) -> Option<u32> {
    if p.is_finite() && p >= 2.0 && p.fract() == 0.0 && (p as u64).is_multiple_of(2) {
        Some((p as u64 / 2) as u32)
    } else {
        None
    }
}

fn check_coeffs(a: &IntegerSet, coeffs: &[Complex64]) -> Result<()> {
    if coeffs.len() != a.card() {
        return Err(Error::invalid(format!(
            "{} coefficients for {} frequencies",
            coeffs.len(),
            a.card()
        )));
    }
    Ok(())
}

/// ‖Σ a_n e(nx)‖_{L^p[0,1]}. Even p goes through the ℓ² norm of the m-fold
/// coefficient self-convolution; other p through uniform quadrature.
pub fn trig_norm(a: &IntegerSet, coeffs: &[Complex64], p: f64, oversample: usize) -> Result<f64> {
    if p.is_nan() || p < 2.0 {
        return Err(Error::invalid(format!("p = {p} must be >= 2")));
    }
    if oversample < 4 {
        return Err(Error::invalid("oversample must be >= 4"));
    }
    check_coeffs(a, coeffs)?;
    match even_half(p) {
        Some(m) => Ok(norm_by_convolution(a, coeffs, m)),
        None => Ok(Quadrature::new(a, p, oversample).norm(coeffs).0),
    }
}

/// Even-p norm through Parseval: ‖f‖_{2m}^{2m} = Σ_n |b_n|² with b the m-fold
/// self-convolution of the coefficients.
pub fn norm_by_convolution(a: &IntegerSet, coeffs: &[Complex64], m: u32) -> f64 {
    let base = a.min();
    let offs: Vec<usize> = a.elements().iter().map(|&x| (x - base) as usize).collect();
    let d = *offs.last().unwrap();
    let mut cur = vec![Complex64::new(0.0, 0.0); d + 1];
    for (&o, &c) in offs.iter().zip(coeffs) {
        cur[o] = c;
    }
    for step in 2..=m as usize {
        let mut next = vec![Complex64::new(0.0, 0.0); step * d + 1];
        for (i, &v) in cur.iter().enumerate() {
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (&o, &c) in offs.iter().zip(coeffs) {
                next[i + o] += v * c;
            }
        }
        cur = next;
    }
    let s: f64 = cur.iter().map(|z| z.norm_sqr()).sum();
    s.powf(1.0 / (2.0 * m as f64))
}

/// Uniform-grid evaluator for ‖f‖_p and its gradient in the coefficients.
pub struct Quadrature {
    offs: Vec<usize>,
    nodes: usize,
    p: f64,
    inv: Arc<dyn Fft<f64>>,
    fwd: Arc<dyn Fft<f64>>,
}

impl Quadrature {
    pub fn new(a: &IntegerSet, p: f64, oversample: usize) -> Self {
        let base = a.min();
        let offs: Vec<usize> = a.elements().iter().map(|&x| (x - base) as usize).collect();
        let d = *offs.last().unwrap();
        let m = (p / 2.0).ceil() as usize;
        let nodes = oversample * (m * d + 1);
        let mut planner = FftPlanner::new();
        Quadrature {
            offs,
            nodes,
            p,
            inv: planner.plan_fft_inverse(nodes),
            fwd: planner.plan_fft_forward(nodes),
        }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Returns the norm and the sampled function.
    pub fn norm(&self, coeffs: &[Complex64]) -> (f64, Vec<Complex64>) {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.nodes];
        for (&o, &c) in self.offs.iter().zip(coeffs) {
            buf[o] = c;
        }
        self.inv.process(&mut buf);
        let s: f64 = buf.iter().map(|z| z.norm().powf(self.p)).sum();
        ((s / self.nodes as f64).powf(1.0 / self.p), buf)
    }

    /// Direction of steepest ascent of ∫|f|^p in the coefficients.
    fn gradient(&self, samples: &[Complex64]) -> Vec<Complex64> {
        let mut w: Vec<Complex64> = samples
            .iter()
            .map(|&z| {
                let r = z.norm();
                if r == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    z * r.powf(self.p - 2.0)
                }
            })
            .collect();
        self.fwd.process(&mut w);
        let scale = 1.0 / self.nodes as f64;
        self.offs.iter().map(|&o| w[o] * scale).collect()
    }
}

fn normalize(v: &mut [Complex64]) {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
}

fn gaussian_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Projected gradient ascent on the unit sphere, halving the step on failure.
fn ascend(quad: &Quadrature, start: Vec<Complex64>, iters: usize) -> (f64, Vec<Complex64>) {
    let mut a = start;
    normalize(&mut a);
    let (mut val, mut samples) = quad.norm(&a);
    let mut eta = 0.5;
    for _ in 0..iters {
        let g = quad.gradient(&samples);
        let dot: Complex64 = g.iter().zip(&a).map(|(x, y)| x * y.conj()).sum();
        let tangent: Vec<Complex64> = g.iter().zip(&a).map(|(x, y)| x - y * dot.re).collect();
        let tn = tangent.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if tn < 1e-14 {
            break;
        }
        let mut improved = false;
        while eta > 1e-12 {
            let mut cand: Vec<Complex64> =
                a.iter().zip(&tangent).map(|(x, t)| x + t * (eta / tn)).collect();
            normalize(&mut cand);
            let (v, s) = quad.norm(&cand);
            if v > val {
                a = cand;
                val = v;
                samples = s;
                eta = (eta * 2.0).min(1.0);
                improved = true;
                break;
            }
            eta *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (val, a)
}

/// Best ‖f‖_p over unit-ℓ² coefficient vectors found by restarted projected
/// gradient ascent. Restart 0 starts from flat coefficients.
pub fn lambda_lower_opt(
    a: &IntegerSet,
    p: f64,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> Result<LambdaEstimate> {
    if p.is_nan() || p <= 2.0 {
        return Err(Error::invalid(format!("p = {p} must be > 2")));
    }
    let (value, _) = lambda_lower_witness(a, p, restarts, iters, seed)?;
    let even = even_half(p);
    let upper = match even {
        Some(m) => Some(lambda_upper_even(a, m)?),
        None => None,
    };
    Ok(LambdaEstimate {
        p,
        lower: value,
        upper,
        method: if even.is_some() { "pga+convolution" } else { "pga" }.into(),
        seed,
    })
}

/// The optimizer's best value together with its coefficient witness.
pub fn lambda_lower_witness(
    a: &IntegerSet,
    p: f64,
    restarts: usize,
    iters: usize,
    seed: u64,
) -> Result<(f64, Vec<Complex64>)> {
    let n = a.card();
    let quad = Quadrature::new(a, p, DEFAULT_OVERSAMPLE);
    let runs = par::map_range(restarts.max(1), |r| {
        let start = if r == 0 {
            vec![Complex64::new(1.0, 0.0); n]
        } else {
            gaussian_vector(&mut rng::stream(seed, r as u64), n)
        };
        ascend(&quad, start, iters)
    });
    let (_, best) = runs
        .into_iter()
        .fold((f64::NEG_INFINITY, Vec::new()), |acc, run| if run.0 > acc.0 { run } else { acc });
    let value = trig_norm(a, &best, p, DEFAULT_OVERSAMPLE)?;
    // A single frequency is always a witness of value exactly 1.
    Ok((value.max(1.0), best))
}

/// (max ordered m-fold representation count)^{1/(2m)}.
pub fn lambda_upper_even(a: &IntegerSet, m: u32) -> Result<f64> {
    let g = sidon::rep_counts(a, m, true)?.max_count;
    Ok((g as f64).powf(1.0 / (2.0 * m as f64)))
}

/// (1, card^{1/2 − 1/p}); p may be infinite.
pub fn trivial_bounds(a: &IntegerSet, p: f64) -> Result<(f64, f64)> {
    if p.is_nan() || p < 2.0 {
        return Err(Error::invalid(format!("p = {p} must be >= 2")));
    }
    Ok((1.0, (a.card() as f64).powf(0.5 - 1.0 / p)))
}

/// ⌈x⌉ for a float that may be an integer up to rounding noise.
fn robust_ceil(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// ⌈(4pN)^{2/p}⌉, exact for even p.
pub fn candidate_size(n: u64, p: f64) -> u64 {
    match even_half(p) {
        Some(m) => {
            let target = 4 * (2 * m as u128) * n as u128;
            let mut r: u128 = 1;
            while r.pow(m) < target {
                r += 1;
            }
            r as u64
        }
        None => robust_ceil((4.0 * p * n as f64).powf(2.0 / p)),
    }
}

/// Uniform random subset of [1, N] of size ⌈(4pN)^{2/p}⌉ with its Λ(p) estimates.
pub fn random_lambda_candidate(n: u64, p: f64, seed: u64) -> Result<(IntegerSet, LambdaEstimate)> {
    let size = candidate_size(n, p);
    if size > n {
        return Err(Error::invalid(format!(
            "candidate size {size} exceeds N = {n} at p = {p}"
        )));
    }
    let mut r = rng::stream(seed, u64::MAX);
    let el: Vec<u64> = sample(&mut r, n as usize, size as usize)
        .into_iter()
        .map(|i| i as u64 + 1)
        .collect();
    let set = IntegerSet::from_unsorted(el, n)?;
    let est = estimate(&set, p, seed)?;
    Ok((set, est))
}

/// Optimizer lower bound plus the best available upper bound.
pub fn estimate(set: &IntegerSet, p: f64, seed: u64) -> Result<LambdaEstimate> {
    let mut est = lambda_lower_opt(set, p, DEFAULT_RESTARTS, DEFAULT_ITERS, seed)?;
    if est.upper.is_none() {
        est.upper = Some(trivial_bounds(set, p)?.1);
        est.method = "pga+trivial".into();
    }
    Ok(est)
}

/// N^{−p/2}: exact for even p, the exact value of its f64 rounding otherwise.
pub fn unit_length(n: u64, p: f64) -> Q {
    match even_half(p) {
        Some(m) => Q::new(BigInt::from(1), BigInt::from(n).pow(m)),
        None => rational::from_f64((n as f64).powf(-p / 2.0)),
    }
}

/// ⌈N^{p/2}/(4p)⌉.
pub fn grid_size(n: u64, p: f64) -> u64 {
    match even_half(p) {
        Some(m) => {
            let num = BigInt::from(n).pow(m);
            let q = Q::new(num, BigInt::from(4 * 2 * m as u64));
            rational::ceil(&q).to_u64().unwrap_or(u64::MAX)
        }
        None => robust_ceil((n as f64).powf(p / 2.0) / (4.0 * p)),
    }
}

/// The point set P(N;p) ⊆ [0, N_p] with its provenance.
#[derive(Clone, Debug, Serialize)]
pub struct PointSet {
    pub n: u64,
    pub p: f64,
    /// N_p.
    pub grid: u64,
    pub grid_override: bool,
    /// d_p = N^{−p/2}·N_p.
    #[serde(serialize_with = "rational::ser")]
    pub d_p: Q,
    pub set: IntegerSet,
    /// Bose–Chowla block parameters (q, blocks) used for the interior, if any.
    pub blocks: Option<(u64, u64)>,
    /// Predicted B_m^* levels after each single-element extension.
    pub predicted_g: Vec<u64>,
    pub lambda: Option<LambdaEstimate>,
    pub seed: u64,
}

impl PointSet {
    pub fn m(&self) -> Option<u32> {
        even_half(self.p)
    }

    /// Certified B_m^* level (even p only).
    pub fn g_star(&self) -> Option<u64> {
        self.m().and_then(|m| self.set.certificate(m)).map(|c| c.g_star)
    }
}

fn check_grid(n: u64, p: f64, grid: u64, d_p: &Q) -> Result<()> {
    if n < 2 || grid + 1 < n {
        return Err(Error::Infeasible {
            n,
            p,
            grid,
            need: n.saturating_sub(2),
        });
    }
    // Gap next to an endpoint interval is 1 − 3d_p/2 and must be ≥ (p/4)d_p.
    let pq = rational::from_f64(p);
    let lhs = d_p * (rational::frac(3, 2) + &pq / rational::int(4));
    if lhs > rational::int(1) {
        return Err(Error::invalid(format!(
            "grid N_p = {grid} too coarse for separation at N = {n}, p = {p}"
        )));
    }
    Ok(())
}

/// P(N;p) = P' ∪ {0, N_p}. Even p: glued Bose–Chowla blocks padded greedily,
/// certified as B_m^*[g]. Other p: a random Λ(p) candidate trimmed or padded.
///
/// `grid` replaces the default N_p = ⌈N^{p/2}/(4p)⌉ when given.
pub fn build_p(n: u64, p: f64, seed: u64, grid: Option<u64>) -> Result<PointSet> {
    if p.is_nan() || p < 2.0 {
        return Err(Error::invalid(format!("p = {p} must be >= 2")));
    }
    let np = grid.unwrap_or_else(|| grid_size(n, p));
    let d_p = unit_length(n, p) * rational::int(np as i64);
    check_grid(n, p, np, &d_p)?;
    let need = (n - 2) as usize;
    let mut out = PointSet {
        n,
        p,
        grid: np,
        grid_override: grid.is_some(),
        d_p,
        set: IntegerSet::new(vec![0, np], np)?,
        blocks: None,
        predicted_g: Vec::new(),
        lambda: None,
        seed,
    };
    match even_half(p) {
        Some(m) => {
            let (interior, blocks) = glued_interior(np, m, need)?;
            out.blocks = blocks;
            let mut start = interior.clone();
            start.push(0);
            start.push(np);
            start.sort_unstable();
            let g0 = sidon::certify(&IntegerSet::new(start.clone(), np)?, m)?.g_star;
            let mut g = g0;
            let full = loop {
                let s = sidon::greedy_extend(&start, 1..np, m, g, true, np, n as usize);
                if s.len() == n as usize {
                    break s;
                }
                g += 1;
            };
            // Replay the construction one element at a time to record the
            // predicted levels of each single-element extension.
            let mut order: Vec<u64> = interior.clone();
            order.extend([0, np]);
            order.extend(full.iter().copied().filter(|x| !start.contains(x)));
            let mut cur = IntegerSet::new(vec![order[0]], np)?.certified(m)?;
            let first = if interior.is_empty() { 1 } else { interior.len() };
            if first > 1 {
                let mut block = interior.clone();
                block.sort_unstable();
                cur = IntegerSet::new(block, np)?.certified(m)?;
            }
            for &b in &order[first..] {
                let (next, predicted) = sidon::extend_by_element(&cur, m, b)?;
                out.predicted_g.push(predicted);
                cur = next;
            }
            out.set = IntegerSet::new(full, np)?.certified(m)?;
        }
        None => {
            let interior = random_interior(np, p, need, seed)?;
            let mut full = interior.clone();
            full.extend([0, np]);
            full.sort_unstable();
            if need > 0 {
                let iset = IntegerSet::new(interior, np)?;
                out.lambda = Some(estimate(&iset, p, seed)?);
            }
            out.set = IntegerSet::new(full, np)?;
        }
    }
    Ok(out)
}

/// Bose–Chowla blocks glued with period q^m inside [1, N_p − 1], choosing the
/// prime q that yields the most points (ties to larger q), truncated to `need`.
type Interior = (Vec<u64>, Option<(u64, u64)>);

fn glued_interior(np: u64, m: u32, need: usize) -> Result<Interior> {
    let room = np - 1;
    let mut best: Option<(usize, u64, u64)> = None;
    let mut q = 2u64;
    while q.checked_pow(m).is_some_and(|v| v <= room) {
        if sidon::field::is_prime(q) {
            let k = room / q.pow(m);
            let pts = ((k * q) as usize).min(need);
            if best.is_none_or(|(b, _, _)| pts >= b) {
                best = Some((pts, q, k));
            }
        }
        q += 1;
    }
    match best {
        Some((pts, q, k)) if pts > 0 => {
            let s = sidon::bose_chowla(q, m)?;
            let s = IntegerSet::new(s.elements().to_vec(), q.pow(m))?;
            let glued = sidon::glue_translates(&s, q.pow(m), k)?;
            let mut el = glued.elements().to_vec();
            el.truncate(need);
            Ok((el, Some((q, k))))
        }
        _ => Ok((Vec::new(), None)),
    }
}

fn random_interior(np: u64, p: f64, need: usize, seed: u64) -> Result<Vec<u64>> {
    let room = np - 1;
    if need == 0 {
        return Ok(Vec::new());
    }
    let mut r = rng::stream(seed, u64::MAX - 1);
    let mut el: Vec<u64> = match random_lambda_candidate(room, p, seed) {
        Ok((s, _)) => s.elements().to_vec(),
        Err(_) => Vec::new(),
    };
    if el.len() > need {
        let keep = sample(&mut r, el.len(), need);
        let mut kept: Vec<u64> = keep.into_iter().map(|i| el[i]).collect();
        kept.sort_unstable();
        el = kept;
    } else if el.len() < need {
        let rest: Vec<u64> = (1..=room).filter(|x| el.binary_search(x).is_err()).collect();
        let extra = sample(&mut r, rest.len(), need - el.len());
        el.extend(extra.into_iter().map(|i| rest[i]));
        el.sort_unstable();
    }
    Ok(el)
}

/// Precomputed inverse transform of the bump on a set of unit intervals.
struct CellProfile {
    /// Sample points x and φ(x) for each unit interval.
    cells: Vec<(Vec<f64>, Vec<f64>)>,
    l2: f64,
}

const PROBE_OFFSETS: [f64; 9] = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0];

impl CellProfile {
    fn new(bump: &BumpProfile, samples: usize) -> Self {
        // φ(x) = ∫ β(ξ) cos(2πxξ) dξ by composite Simpson on the support.
        let r = bump.support_radius();
        let k = 2048;
        let h = 2.0 * r / k as f64;
        let weights: Vec<(f64, f64)> = (0..=k)
            .map(|i| {
                let xi = -r + i as f64 * h;
                let w = if i == 0 || i == k {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                (xi, w * h / 3.0 * bump.eval(xi))
            })
            .collect();
        let phi = |x: f64| -> f64 {
            weights
                .iter()
                .map(|&(xi, w)| w * (2.0 * std::f64::consts::PI * x * xi).cos())
                .sum()
        };
        let l2 = weights
            .iter()
            .map(|&(xi, w)| w * bump.eval(xi))
            .sum::<f64>()
            .sqrt();
        let cells = PROBE_OFFSETS
            .iter()
            .map(|&c| {
                let xs: Vec<f64> = (0..samples)
                    .map(|j| c - 0.5 + (j as f64 + 0.5) / samples as f64)
                    .collect();
                let ph: Vec<f64> = xs.iter().map(|&x| phi(x)).collect();
                (xs, ph)
            })
            .collect();
        CellProfile { cells, l2 }
    }

    /// max over cells of ‖f‖_{L^p(I)}/‖f‖_{L²(ℝ)} with f̂ = Σ c_n β(· − n).
    fn ratio(&self, freqs: &[u64], coeffs: &[Complex64], p: f64) -> f64 {
        let base = freqs[0];
        let norm2 = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() * self.l2;
        let mut best = 0.0f64;
        for (xs, ph) in &self.cells {
            let mut s = 0.0;
            for (&x, &f) in xs.iter().zip(ph) {
                let mut t = Complex64::new(0.0, 0.0);
                for (&n, &c) in freqs.iter().zip(coeffs) {
                    let arg = 2.0 * std::f64::consts::PI * ((n - base) as f64) * x;
                    t += c * Complex64::from_polar(1.0, arg);
                }
                s += (f.abs() * t.norm()).powf(p);
            }
            let lp = (s / xs.len() as f64).powf(1.0 / p);
            best = best.max(lp / norm2);
        }
        best
    }
}

/// Result of [`local_embedding_probe`].
#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingProbe {
    pub max_ratio: f64,
    /// The same ratio for a single frequency cell.
    pub cell_ratio: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Max over random trials and unit intervals I of ‖f‖_{L^p(I)}/‖f‖_{L²(ℝ)}
/// for f with Fourier support in A + [−1/2, 1/2].
pub fn local_embedding_probe(a: &IntegerSet, p: f64, trials: usize, seed: u64) -> Result<EmbeddingProbe> {
    if p.is_nan() || p <= 2.0 {
        return Err(Error::invalid(format!("p = {p} must be > 2")));
    }
    let bump = BumpProfile::partition();
    let d = (a.max() - a.min()) as usize;
    let samples = (32 * (d + 1)).max(256);
    let prof = CellProfile::new(&bump, samples);
    let freqs = a.elements();
    let ratios = par::map_range(trials.max(1), |t| {
        let c = gaussian_vector(&mut rng::stream(seed, t as u64), freqs.len());
        prof.ratio(freqs, &c, p)
    });
    let max_ratio = ratios.into_iter().fold(0.0, f64::max);
    let cell_ratio = prof.ratio(&[0], &[Complex64::new(1.0, 0.0)], p);
    Ok(EmbeddingProbe {
        max_ratio,
        cell_ratio,
        trials,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[u64]) -> IntegerSet {
        IntegerSet::new(xs.to_vec(), *xs.last().unwrap()).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_frequency_norm_is_one() {
        let s = set(&[5]);
        for p in [2.0, 3.0, 4.0, 7.5] {
            assert!((trig_norm(&s, &[c(1.0)], p, 8).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_and_three_term_norms() {
        let h = 0.5f64.sqrt();
        let v = trig_norm(&set(&[0, 1]), &[c(h), c(h)], 4.0, 8).unwrap();
        assert!((v - 1.5f64.powf(0.25)).abs() < 1e-12);
        let t = 1.0 / 3f64.sqrt();
        let v = trig_norm(&set(&[0, 1, 2]), &[c(t), c(t), c(t)], 4.0, 8).unwrap();
        assert!((v - (19.0f64 / 9.0).powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn quadrature_agrees_with_convolution_for_even_p() {
        let s = set(&[0, 3, 4, 9, 20]);
        let mut r = rng::stream(3, 0);
        let a = gaussian_vector(&mut r, 5);
        let exact = norm_by_convolution(&s, &a, 3);
        let quad = Quadrature::new(&s, 6.0, 8).norm(&a).0;
        assert!((exact - quad).abs() <= 1e-10 * exact);
    }

    #[test]
    fn optimizer_two_point_optimum() {
        let est = lambda_lower_opt(&set(&[0, 1]), 4.0, 8, 500, 1).unwrap();
        assert!((est.lower - 1.5f64.powf(0.25)).abs() < 1e-6);
        assert!(est.lower <= est.upper.unwrap() + 1e-6);
        assert_eq!(lambda_lower_opt(&set(&[0]), 4.0, 2, 10, 1).unwrap().lower, 1.0);
    }

    #[test]
    fn upper_bounds() {
        let v = lambda_upper_even(&set(&[1, 2, 5, 11]), 2).unwrap();
        assert!((v - 2f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(lambda_upper_even(&set(&[4]), 3).unwrap(), 1.0);
        let s: IntegerSet = IntegerSet::new((0..16).collect(), 15).unwrap();
        assert_eq!(trivial_bounds(&s, 4.0).unwrap(), (1.0, 2.0));
        assert_eq!(trivial_bounds(&s, f64::INFINITY).unwrap().1, 4.0);
    }

    #[test]
    fn candidate_sizes() {
        assert_eq!(candidate_size(256, 4.0), 64);
        assert_eq!(candidate_size(16, 4.0), 16);
        let (s, e) = random_lambda_candidate(16, 4.0, 9).unwrap();
        assert_eq!(s.elements(), (1..=16).collect::<Vec<_>>().as_slice());
        assert!(e.lower <= trivial_bounds(&s, 4.0).unwrap().1 + 1e-6);
        assert!(random_lambda_candidate(8, 4.0, 1).is_err());
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(grid_size(16, 4.0), 16);
        assert_eq!(grid_size(6, 4.0), 3);
        assert_eq!(grid_size(8, 6.0), 22);
        assert_eq!(unit_length(4, 4.0), rational::frac(1, 16));
    }

    #[test]
    fn build_p_even() {
        let ps = build_p(16, 4.0, 0, None).unwrap();
        assert_eq!(ps.set.card(), 16);
        assert_eq!((ps.set.min(), ps.set.max()), (0, 16));
        let g = ps.g_star().unwrap();
        assert!(g <= *ps.predicted_g.last().unwrap());
        match build_p(6, 4.0, 0, None).unwrap_err() {
            Error::Infeasible { grid, need, .. } => assert_eq!((grid, need), (3, 4)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn build_p_grid_override() {
        let ps = build_p(4, 4.0, 0, Some(3)).unwrap();
        assert_eq!(ps.set.elements(), &[0, 1, 2, 3]);
        assert_eq!(ps.g_star(), Some(4));
        assert!(build_p(4, 4.0, 0, Some(2)).is_err());
    }

    #[test]
    fn build_p_general_exponent() {
        let ps = build_p(8, 5.0, 4, None).unwrap();
        assert_eq!(ps.set.card(), 8);
        assert_eq!(ps.set.min(), 0);
        assert_eq!(ps.set.max(), ps.grid);
        let est = ps.lambda.unwrap();
        assert!(est.lower >= 1.0 && est.lower <= est.upper.unwrap() + 1e-6);
    }

    #[test]
    fn embedding_probe_ceilings() {
        let a = set(&[0, 2, 7]);
        let pr = local_embedding_probe(&a, 4.0, 6, 11).unwrap();
        assert!(pr.max_ratio <= (3f64).sqrt() * pr.cell_ratio * (1.0 + 1e-9));
        let single = local_embedding_probe(&set(&[4]), 4.0, 3, 2).unwrap();
        assert!((single.max_ratio - single.cell_ratio).abs() < 1e-9 * single.cell_ratio);
        let shifted = local_embedding_probe(&a.translate(5), 4.0, 6, 11).unwrap();
        assert!((shifted.max_ratio - pr.max_ratio).abs() < 1e-9);
    }
}
