//! The shell multiplier m_{δ,α}, its windowed kernels and L¹ norms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bump::BumpProfile;
use super::grid::{signed, Fft2, GridFunction2D, GridSpace};
use super::partition::PartitionOfUnity;
use crate::domain::ConvexDomain;
use crate::error::{Error, Result};

/// ξ = SCALE·η keeps {ρ ≤ 1 + δ} inside the sampled box for δ ≤ 1/8.
pub const SCALE: f64 = 1.25;
/// Largest grid side allowed by default.
pub const MAX_SIDE: usize = 1 << 12;
/// Outer annulus share below which the L¹ sum is considered converged.
pub const TAIL_TOLERANCE: f64 = 0.05;

/// m_{δ,α}(ξ) = δ^α β((1 − ρ(ξ))/(2δ)).
pub fn multiplier_eval(dom: &ConvexDomain, bump: &BumpProfile, delta: f64, alpha: f64, x: f64, y: f64) -> f64 {
    let u = (1.0 - dom.rho(x, y)) / (2.0 * delta);
    if u.abs() >= bump.support_radius() {
        return 0.0;
    }
    delta.powf(alpha) * bump.eval(u)
}

/// Which part of the multiplier a kernel carries.
#[derive(Clone, Copy)]
pub enum Window<'a> {
    Whole,
    /// m(ξ)·β_J(clamp(ξ₁, ±1/2)).
    Piece(&'a PartitionOfUnity, usize),
}

impl Window<'_> {
    pub fn id(&self) -> String {
        match self {
            Window::Whole => "whole".into(),
            Window::Piece(_, j) => j.to_string(),
        }
    }
}

/// Frequency samples of the (windowed) multiplier.
pub fn sample_multiplier(
    dom: &ConvexDomain,
    delta: f64,
    alpha: f64,
    window: Window,
    side: usize,
    scale: f64,
) -> Result<GridFunction2D> {
    let bump = BumpProfile::partition();
    GridFunction2D::sample_frequency(side, scale, |x, y| {
        let m = multiplier_eval(dom, &bump, delta, alpha, x, y);
        let w = match window {
            Window::Whole => 1.0,
            Window::Piece(pu, j) if m != 0.0 => pu.beta(j, x.clamp(-0.5, 0.5)),
            Window::Piece(..) => 0.0,
        };
        Complex64::new(m * w, 0.0)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelResult {
    pub side: usize,
    pub scale: f64,
    /// (1/M)·Σ|K_n|, the Riemann sum of ‖K‖_{L¹}.
    pub l1: f64,
    /// Share of the sum coming from the outer 10% Chebyshev annulus.
    pub tail_share: f64,
    /// The multiplier at ξ = 0, which equals ∫K.
    pub dc: f64,
    /// sup |m·window| over the grid.
    pub sup_m: f64,
    /// Grid doublings performed to push the tail share below tolerance.
    pub refinements: u32,
    pub tail_converged: bool,
}

fn summarize(kernel: &GridFunction2D, freq_sup: f64, dc: f64, refinements: u32) -> KernelResult {
    let m = kernel.side;
    let cut = (0.9 * (m / 2) as f64).ceil() as i64;
    let mut total = 0.0;
    let mut tail = 0.0;
    for (i, z) in kernel.data.iter().enumerate() {
        let a = z.norm();
        total += a;
        let (r, c) = (signed(i / m, m).abs(), signed(i % m, m).abs());
        if r.max(c) >= cut {
            tail += a;
        }
    }
    let tail_share = if total > 0.0 { tail / total } else { 0.0 };
    KernelResult {
        side: m,
        scale: kernel.scale,
        l1: total / m as f64,
        tail_share,
        dc,
        sup_m: freq_sup,
        refinements,
        tail_converged: tail_share < TAIL_TOLERANCE,
    }
}

/// Kernel of the windowed multiplier on a fixed side-M grid.
pub fn kernel_at(
    dom: &ConvexDomain,
    delta: f64,
    alpha: f64,
    window: Window,
    side: usize,
) -> Result<(KernelResult, GridFunction2D)> {
    let mut g = sample_multiplier(dom, delta, alpha, window, side, SCALE)?;
    let sup = g.sup();
    let dc = g.data[0].re;
    g.inverse(&Fft2::new(side))?;
    Ok((summarize(&g, sup, dc, 0), g))
}

/// Smallest admissible side for δ: a power of two ≥ max(64, 8/δ).
pub fn initial_side(delta: f64) -> usize {
    ((8.0 / delta).ceil() as usize).max(64).next_power_of_two()
}

/// Kernel L¹ with grid doubling until the tail share drops below 5% or the
/// side budget is reached.
pub fn kernel(dom: &ConvexDomain, delta: f64, alpha: f64, window: Window, max_side: usize) -> Result<KernelResult> {
    if !(delta > 0.0 && delta < 0.5) || alpha < 0.0 {
        return Err(Error::invalid("need 0 < delta < 1/2 and alpha >= 0"));
    }
    let mut side = initial_side(delta);
    if side > max_side {
        return Err(Error::Budget {
            what: "kernel grid side",
            needed: side as u128,
            budget: max_side as u128,
        });
    }
    let mut refinements = 0;
    loop {
        let (mut r, _) = kernel_at(dom, delta, alpha, window, side)?;
        r.refinements = refinements;
        if r.tail_converged || side * 2 > max_side {
            return Ok(r);
        }
        side *= 2;
        refinements += 1;
    }
}

/// Applies the windowed multiplier to physical samples f by pointwise
/// multiplication in frequency.
pub fn apply_multiplier(
    f: &GridFunction2D,
    dom: &ConvexDomain,
    delta: f64,
    alpha: f64,
    window: Window,
) -> Result<GridFunction2D> {
    if f.space != GridSpace::Physical {
        return Err(Error::invalid("apply_multiplier needs physical samples"));
    }
    let m = sample_multiplier(dom, delta, alpha, window, f.side, f.scale)?;
    let fft = Fft2::new(f.side);
    let mut g = f.clone();
    g.forward(&fft)?;
    for (v, w) in g.data.iter_mut().zip(&m.data) {
        *v *= w;
    }
    g.inverse(&fft)?;
    Ok(g)
}

#[derive(Clone, Debug, Serialize)]
pub struct EndpointCheck {
    /// ‖Tf‖₂ ≤ sup|m|·‖f‖₂.
    pub l2_holds: bool,
    /// ‖Tf‖_∞ ≤ l1·‖f‖_∞.
    pub linf_holds: bool,
    pub l2_ratio: f64,
    pub linf_ratio: f64,
}

/// Both endpoint contracts with a relative rounding allowance of 1e-12.
pub fn endpoint_check(f: &GridFunction2D, tf: &GridFunction2D, kernel: &KernelResult) -> Result<EndpointCheck> {
    if !f.same_grid(tf) || f.side != kernel.side || f.scale != kernel.scale {
        return Err(Error::invalid("grid mismatch"));
    }
    let l2_ratio = tf.l2() / (kernel.sup_m * f.l2());
    let linf_ratio = tf.sup() / (kernel.l1 * f.sup());
    Ok(EndpointCheck {
        l2_holds: tf.l2() <= kernel.sup_m * f.l2() * (1.0 + 1e-12),
        linf_holds: tf.sup() <= kernel.l1 * f.sup() * (1.0 + 1e-12),
        l2_ratio,
        linf_ratio,
    })
}

/// ‖K − c·Σ_J K^J‖₁ relative to ‖K‖₁, all on one side-M grid, summing
/// kernels in physical space.
pub fn reconstruction_error(dom: &ConvexDomain, pu: &PartitionOfUnity, delta: f64, alpha: f64, side: usize) -> Result<f64> {
    let (_, whole) = kernel_at(dom, delta, alpha, Window::Whole, side)?;
    let mut acc = vec![Complex64::new(0.0, 0.0); side * side];
    for j in 0..pu.len() {
        let (_, kj) = kernel_at(dom, delta, alpha, Window::Piece(pu, j), side)?;
        for (a, b) in acc.iter_mut().zip(&kj.data) {
            *a += b;
        }
    }
    let diff: f64 = whole
        .data
        .iter()
        .zip(&acc)
        .map(|(k, s)| (k - s * pu.c).norm())
        .sum();
    Ok(diff / whole.l1_sum())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    /// max_i |y_i − (a + b·x_i)|/y_i.
    pub residual: f64,
}

/// Least-squares fit of y = l1/δ^α against x = log δ⁻¹.
pub fn fit_log_scaling(deltas: &[f64], l1: &[f64], alpha: f64) -> Result<LogFit> {
    if deltas.len() < 2 || deltas.len() != l1.len() {
        return Err(Error::invalid("need at least two matched samples"));
    }
    let xs: Vec<f64> = deltas.iter().map(|d| -d.ln()).collect();
    let ys: Vec<f64> = deltas.iter().zip(l1).map(|(d, l)| l / d.powf(alpha)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (a + b * x)).abs() / y)
        .fold(0.0, f64::max);
    Ok(LogFit { a, b, residual })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelScanRow {
    pub delta: f64,
    pub alpha: f64,
    #[serde(rename = "J_id")]
    pub j_id: String,
    pub l1: f64,
    pub tail_share: f64,
    pub fit_a: f64,
    pub fit_b: f64,
    pub residual: f64,
}

/// Whole-kernel L¹ across a δ list with the log-scaling fit attached to every row.
pub fn kernel_scan(dom: &ConvexDomain, deltas: &[f64], alpha: f64, max_side: usize) -> Result<(Vec<KernelScanRow>, LogFit)> {
    let results = deltas
        .iter()
        .map(|&d| kernel(dom, d, alpha, Window::Whole, max_side))
        .collect::<Result<Vec<_>>>()?;
    let l1: Vec<f64> = results.iter().map(|r| r.l1).collect();
    let fit = fit_log_scaling(deltas, &l1, alpha)?;
    let rows = deltas
        .iter()
        .zip(&results)
        .map(|(&d, r)| KernelScanRow {
            delta: d,
            alpha,
            j_id: "whole".into(),
            l1: r.l1,
            tail_share: r.tail_share,
            fit_a: fit.a,
            fit_b: fit.b,
            residual: fit.residual,
        })
        .collect();
    Ok((rows, fit))
}
