//! Empirical decoupling probes in one and two dimensions.
//!
//! Both probes draw random complex Gaussian coefficients, so the maxima they
//! return are lower-bound witnesses for the decoupling constants, never
//! certificates of an upper bound.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::bump::BumpProfile;
use super::grid::Fft2;
use crate::cantor::{weight, Interval};
use crate::error::{check_budget, Error, Result};
use crate::{par, rng};

/// Largest number of samples a probe grid may hold.
pub const GRID_BUDGET: u128 = 1 << 24;

/// θ_J = {ξ₁ ∈ J, |ξ₂ − 2c(ξ₁ − c) − c²| ≤ |J|²/2} with c the center of J.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Parallelogram {
    pub lo: f64,
    pub hi: f64,
}

impl Parallelogram {
    pub fn new(j: &Interval) -> Self {
        Parallelogram { lo: j.lo_f64(), hi: j.hi_f64() }
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let c = self.center();
        let l = self.len();
        x >= self.lo && x <= self.hi && (y - 2.0 * c * (x - c) - c * c).abs() <= 0.5 * l * l
    }
}

/// Physical window for the one-dimensional probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeWindow {
    /// The full period, with unit weight.
    Whole,
    /// An interval of the given length centred in the period; the
    /// denominators use w_Q.
    Finite { len: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeResult {
    pub pieces: usize,
    pub trials: usize,
    pub seed: u64,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Grid shape (rows, cols); rows = 1 in one dimension.
    pub grid: (usize, usize),
}

impl ProbeResult {
    pub fn within_ceiling(&self) -> bool {
        self.max_ratio <= (self.pieces as f64).sqrt() * (1.0 + 1e-12)
    }
}

fn gaussian(r: &mut impl Rng) -> Complex64 {
    Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

fn lp(values: &[Complex64], weights: Option<&[f64]>, p: f64, cell: f64) -> f64 {
    let s: f64 = match weights {
        None => values.iter().map(|z| z.norm().powf(p)).sum(),
        Some(w) => values.iter().zip(w).map(|(z, w)| w * z.norm().powf(p)).sum(),
    };
    (s * cell).powf(1.0 / p)
}

fn summarize(ratios: Vec<f64>, pieces: usize, seed: u64, grid: (usize, usize)) -> ProbeResult {
    ProbeResult {
        pieces,
        trials: ratios.len(),
        seed,
        max_ratio: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_ratio: ratios.iter().copied().fold(f64::INFINITY, f64::min),
        grid,
    }
}

/// ‖Σ f_I‖_{L^p(Q)} / (Σ‖f_I‖²_{L^p(w_Q)})^{1/2} maximized over random trials.
///
/// Each f_I is a trigonometric polynomial with frequencies k/T inside I,
/// coefficients a_k·β((k/T − c_I)/|I|) with complex Gaussian a_k and the
/// partition bump β. The period is T ≥ 8/min|I| and samples sit at spacing
/// T/M with M ≥ 4T.
pub fn decoupling_probe_1d(family: &[Interval], p: f64, window: ProbeWindow, trials: usize, seed: u64) -> Result<ProbeResult> {
    if family.is_empty() || trials == 0 {
        return Err(Error::invalid("probe needs at least one interval and one trial"));
    }
    if p.is_nan() || p < 2.0 {
        return Err(Error::invalid(format!("probe needs p >= 2, got {p}")));
    }
    let min_len = family.iter().map(|i| i.len_f64()).fold(f64::INFINITY, f64::min);
    let span = family.iter().map(|i| i.lo_f64().abs().max(i.hi_f64().abs())).fold(0.0, f64::max);
    let t = ((8.0 / min_len).ceil() as usize).next_power_of_two();
    let m = ((4.0 * span.max(0.5) * t as f64).ceil() as usize).next_power_of_two();
    check_budget("probe grid", m as u128, GRID_BUDGET)?;
    let tf = t as f64;
    let cell = tf / m as f64;
    let (q_mask, w): (Vec<f64>, Vec<f64>) = match window {
        ProbeWindow::Whole => (vec![1.0; m], vec![1.0; m]),
        ProbeWindow::Finite { len } => {
            if !(len > 0.0 && len < tf) {
                return Err(Error::invalid("window must fit inside the period"));
            }
            let c = 0.5 * tf;
            (0..m)
                .map(|i| {
                    let x = i as f64 * cell;
                    let inside = ((x - c).abs() <= 0.5 * len) as u8 as f64;
                    (inside, weight(c, len, x))
                })
                .unzip()
        }
    };
    let bump = BumpProfile::partition();
    let plan = FftPlanner::new().plan_fft_inverse(m);
    let pieces: Vec<Vec<(usize, f64)>> = family
        .iter()
        .map(|i| {
            let (c, l) = (i.center_f64(), i.len_f64());
            let k0 = (i.lo_f64() * tf).ceil() as i64;
            let k1 = (i.hi_f64() * tf).floor() as i64;
            (k0..=k1)
                .filter_map(|k| {
                    let b = bump.eval((k as f64 / tf - c) / l);
                    (b > 0.0).then(|| (k.rem_euclid(m as i64) as usize, b))
                })
                .collect()
        })
        .collect();
    let ratios = par::map_range(trials, |trial| {
        let mut r = rng::stream(seed, trial as u64);
        let mut total = vec![Complex64::new(0.0, 0.0); m];
        let mut denom = 0.0;
        for modes in &pieces {
            let mut f = vec![Complex64::new(0.0, 0.0); m];
            for &(idx, b) in modes {
                f[idx] = gaussian(&mut r) * b;
            }
            plan.process(&mut f);
            denom += lp(&f, Some(&w), p, cell).powi(2);
            for (a, b) in total.iter_mut().zip(&f) {
                *a += b;
            }
        }
        lp(&total, Some(&q_mask), p, cell) / denom.sqrt()
    });
    Ok(summarize(ratios, family.len(), seed, (1, m)))
}

/// Parabolic rescaling taking the hull of `level` to [−1/2, 1/2].
pub fn normalize_frame(level: &[Interval]) -> Result<Vec<Interval>> {
    let lo = level.iter().map(|i| i.lo.clone()).min().ok_or_else(|| Error::invalid("empty level"))?;
    let hi = level.iter().map(|i| i.hi.clone()).max().unwrap();
    let hull = Interval::new(lo, hi)?;
    Ok(level.iter().map(|j| hull.normalize(j)).collect())
}

/// ‖Σ f_θ‖_{L^q} / (Σ‖f_θ‖²_{L^q})^{1/2} maximized over random trials, with
/// each f_θ carrying Gaussian coefficients on the lattice points inside the
/// parallelogram θ_J. The level is first rescaled so its hull is [−1/2, 1/2].
pub fn decoupling_probe_2d(level: &[Interval], q: f64, trials: usize, seed: u64) -> Result<ProbeResult> {
    if level.is_empty() || trials == 0 {
        return Err(Error::invalid("probe needs at least one interval and one trial"));
    }
    if q.is_nan() || q < 2.0 {
        return Err(Error::invalid(format!("probe needs q >= 2, got {q}")));
    }
    let frame = normalize_frame(level)?;
    let thetas: Vec<Parallelogram> = frame.iter().map(Parallelogram::new).collect();
    let min_len = thetas.iter().map(|t| t.len()).fold(f64::INFINITY, f64::min);
    let t1 = ((8.0 / min_len).ceil() as usize).next_power_of_two();
    let t2 = ((8.0 / (min_len * min_len)).ceil() as usize).next_power_of_two();
    let (cols, rows) = (2 * t1, 2 * t2);
    check_budget("probe grid", (rows * cols) as u128, GRID_BUDGET)?;
    let (t1f, t2f) = (t1 as f64, t2 as f64);
    let lattice: Vec<Vec<usize>> = thetas
        .iter()
        .map(|th| {
            let c = th.center();
            let h = 0.5 * th.len() * th.len();
            let mut pts = Vec::new();
            for k1 in (th.lo * t1f).ceil() as i64..=(th.hi * t1f).floor() as i64 {
                let x = k1 as f64 / t1f;
                let yc = 2.0 * c * (x - c) + c * c;
                for k2 in ((yc - h) * t2f).ceil() as i64..=((yc + h) * t2f).floor() as i64 {
                    if th.contains(x, k2 as f64 / t2f) {
                        let r = k2.rem_euclid(rows as i64) as usize;
                        let cidx = k1.rem_euclid(cols as i64) as usize;
                        pts.push(r * cols + cidx);
                    }
                }
            }
            pts
        })
        .collect();
    if lattice.iter().any(|p| p.is_empty()) {
        return Err(Error::invalid("parallelogram holds no lattice point"));
    }
    let fft = Fft2::rect(rows, cols);
    let cell = 1.0 / (rows * cols) as f64;
    let mut ratios = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut r = rng::stream(seed, trial as u64);
        let coeffs: Vec<Vec<Complex64>> = lattice.iter().map(|pts| pts.iter().map(|_| gaussian(&mut r)).collect()).collect();
        let mut total = vec![Complex64::new(0.0, 0.0); rows * cols];
        let mut denom = 0.0;
        for (pts, cs) in lattice.iter().zip(&coeffs) {
            let mut f = vec![Complex64::new(0.0, 0.0); rows * cols];
            for (&i, &a) in pts.iter().zip(cs) {
                f[i] = a;
            }
            fft.transform(&mut f, true);
            denom += lp(&f, None, q, cell).powi(2);
            for (a, b) in total.iter_mut().zip(&f) {
                *a += b;
            }
        }
        ratios.push(lp(&total, None, q, cell) / denom.sqrt());
    }
    Ok(summarize(ratios, level.len(), seed, (rows, cols)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub level: u32,
    pub q: f64,
    pub trials: usize,
    pub max_ratio: f64,
    pub ref_exponent: f64,
}

/// d^k comparison: the level-1 witness raised to the level.
pub fn growth_reference(rows: &[ProbeRow]) -> Vec<f64> {
    let d = rows.iter().find(|r| r.level == 1).map(|r| r.max_ratio).unwrap_or(1.0);
    rows.iter().map(|r| d.powi(r.level as i32)).collect()
}
