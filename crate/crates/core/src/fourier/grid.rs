//! Uniform 2-D grids and unitary transforms.
//!
//! Convention: a side-M grid samples frequencies η ∈ [−1/2, 1/2)² at spacing
//! 1/M in standard FFT order (index i ↔ i/M for i < M/2, (i − M)/M
//! otherwise); the physical grid is Z_M². The forward transform is
//! f̂(k) = M⁻¹ Σ_n f(n) e^{−2πi n·k/M} and the inverse carries the opposite
//! sign, so both are unitary. Multipliers m(ξ) are sampled at ξ = s·η for a
//! declared scale s.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpace {
    Physical,
    Frequency,
}

#[derive(Clone, Debug)]
pub struct GridFunction2D {
    pub side: usize,
    /// ξ = scale·η.
    pub scale: f64,
    pub space: GridSpace,
    /// Row-major, row index = second coordinate.
    pub data: Vec<Complex64>,
}

/// Signed index of position i on a side-M grid.
pub fn signed(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

/// η coordinate of index i.
pub fn eta(i: usize, m: usize) -> f64 {
    signed(i, m) as f64 / m as f64
}

impl GridFunction2D {
    pub fn zeros(side: usize, scale: f64, space: GridSpace) -> Result<Self> {
        if !side.is_power_of_two() || side < 2 {
            return Err(Error::invalid(format!("grid side {side} must be a power of two")));
        }
        Ok(GridFunction2D {
            side,
            scale,
            space,
            data: vec![Complex64::new(0.0, 0.0); side * side],
        })
    }

    /// Samples f(ξ₁, ξ₂) at ξ = scale·η on the frequency grid.
    pub fn sample_frequency(side: usize, scale: f64, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Result<Self> {
        let mut g = Self::zeros(side, scale, GridSpace::Frequency)?;
        par::for_each_row(&mut g.data, side, |r, row| {
            let x2 = scale * eta(r, side);
            for (c, v) in row.iter_mut().enumerate() {
                *v = f(scale * eta(c, side), x2);
            }
        });
        Ok(g)
    }

    pub fn l2(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn l1_sum(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).sum()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.side == other.side && self.scale == other.scale
    }

    pub fn forward(&mut self, fft: &Fft2) -> Result<()> {
        if self.space != GridSpace::Physical {
            return Err(Error::invalid("forward transform needs physical samples"));
        }
        fft.transform(&mut self.data, false);
        self.space = GridSpace::Frequency;
        Ok(())
    }

    pub fn inverse(&mut self, fft: &Fft2) -> Result<()> {
        if self.space != GridSpace::Frequency {
            return Err(Error::invalid("inverse transform needs frequency samples"));
        }
        fft.transform(&mut self.data, true);
        self.space = GridSpace::Physical;
        Ok(())
    }
}

/// Planned unitary 2-D FFT on a rows×cols grid.
pub struct Fft2 {
    rows: usize,
    cols: usize,
    row_plans: [Arc<dyn Fft<f64>>; 2],
    col_plans: [Arc<dyn Fft<f64>>; 2],
}

impl Fft2 {
    pub fn new(side: usize) -> Self {
        Self::rect(side, side)
    }

    pub fn rect(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            rows,
            cols,
            row_plans: [planner.plan_fft_forward(cols), planner.plan_fft_inverse(cols)],
            col_plans: [planner.plan_fft_forward(rows), planner.plan_fft_inverse(rows)],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn transpose(data: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
        par::for_each_row(&mut out, rows, |c, row| {
            for (r, v) in row.iter_mut().enumerate() {
                *v = data[r * cols + c];
            }
        });
        out
    }

    pub fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (rows, cols) = (self.rows, self.cols);
        assert_eq!(data.len(), rows * cols, "grid size mismatch");
        let i = inverse as usize;
        let rp = &self.row_plans[i];
        par::for_each_row(data, cols, |_, row| rp.process(row));
        let mut t = Self::transpose(data, rows, cols);
        let cp = &self.col_plans[i];
        par::for_each_row(&mut t, rows, |_, col| cp.process(col));
        let back = Self::transpose(&t, cols, rows);
        let scale = 1.0 / ((rows * cols) as f64).sqrt();
        for (d, b) in data.iter_mut().zip(back) {
            *d = b * scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn random(side: usize, seed: u64) -> GridFunction2D {
        let mut r = rng::stream(seed, 0);
        let mut g = GridFunction2D::zeros(side, 1.0, GridSpace::Physical).unwrap();
        for v in g.data.iter_mut() {
            *v = Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5);
        }
        g
    }

    #[test]
    fn round_trip_and_parseval() {
        let fft = Fft2::new(64);
        let g = random(64, 1);
        let mut h = g.clone();
        h.forward(&fft).unwrap();
        assert!((h.l2() - g.l2()).abs() <= 1e-10 * g.l2());
        h.inverse(&fft).unwrap();
        let err = g
            .data
            .iter()
            .zip(&h.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10 * g.sup());
    }

    #[test]
    fn rectangular_round_trip() {
        let fft = Fft2::rect(8, 32);
        let mut r = rng::stream(3, 0);
        let orig: Vec<Complex64> = (0..256).map(|_| Complex64::new(r.random(), r.random())).collect();
        let mut d = orig.clone();
        fft.transform(&mut d, false);
        let e0: f64 = orig.iter().map(|z| z.norm_sqr()).sum();
        let e1: f64 = d.iter().map(|z| z.norm_sqr()).sum();
        assert!((e0 - e1).abs() <= 1e-10 * e0);
        fft.transform(&mut d, true);
        assert!(orig.iter().zip(&d).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn delta_transforms_to_constant() {
        let fft = Fft2::new(16);
        let mut g = GridFunction2D::zeros(16, 1.0, GridSpace::Physical).unwrap();
        g.data[0] = Complex64::new(16.0, 0.0);
        g.forward(&fft).unwrap();
        assert!(g.data.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn grid_coordinates() {
        assert_eq!(eta(0, 8), 0.0);
        assert_eq!(eta(4, 8), -0.5);
        assert_eq!(eta(7, 8), -0.125);
        assert!(GridFunction2D::zeros(12, 1.0, GridSpace::Physical).is_err());
    }
}
