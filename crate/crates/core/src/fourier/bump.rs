//! Even C⁴ bump built from a degree-9 smoothstep, with certified derivative bounds.

use serde::Serialize;

/// Coefficients of u^5..u^9 in the smoothstep whose first four derivatives
/// vanish at both ends.
const SMOOTHSTEP: [f64; 5] = [126.0, -420.0, 540.0, -315.0, 70.0];

/// Derivative orders carried by jets and certificates.
pub const ORDERS: usize = 5;

const CERT_GRID: usize = 1 << 16;

fn falling(i: usize, k: usize) -> f64 {
    (0..k).map(|j| (i - j) as f64).product()
}

/// k-th derivative of the smoothstep at u ∈ [0, 1].
pub fn smoothstep(u: f64, k: usize) -> f64 {
    let mut s = 0.0;
    for (j, &c) in SMOOTHSTEP.iter().enumerate() {
        let i = j + 5;
        if i >= k {
            s += c * falling(i, k) * u.powi((i - k) as i32);
        }
    }
    s
}

/// sup over [0,1] of |S^{(k)}| for k = 0..=9, certified by grid maxima plus
/// the mean-value slack (h/2)·sup|S^{(k+1)}|, seeded by the constant 9th derivative.
fn smoothstep_bounds() -> [f64; 10] {
    let mut b = [0.0; 10];
    b[9] = SMOOTHSTEP[4] * falling(9, 9);
    let h = 1.0 / CERT_GRID as f64;
    for k in (0..9).rev() {
        let grid_max = (0..=CERT_GRID)
            .map(|i| smoothstep(i as f64 * h, k).abs())
            .fold(0.0, f64::max);
        b[k] = grid_max + 0.5 * h * b[k + 1];
    }
    b
}

/// β(t) = scale·h(|t|) with h = 1 on [0, plateau], the smoothstep down to 0
/// on [plateau, edge] and 0 beyond.
#[derive(Clone, Debug, Serialize)]
pub struct BumpProfile {
    pub plateau: f64,
    pub edge: f64,
    pub scale: f64,
    /// Certified sup|β^{(k)}| for k = 0..=4.
    pub bounds: [f64; ORDERS],
}

impl BumpProfile {
    /// Equal to 1 on [−1/4, 1/4], supported in (−15/32, 15/32), values in [0, 1].
    pub fn partition() -> Self {
        Self::with_shape(0.25, 15.0 / 32.0, 1.0)
    }

    /// The partition bump scaled by the largest power of two 2^{−e} that puts
    /// every certified derivative bound at or below 1.
    pub fn class_b() -> Self {
        let base = Self::partition();
        let worst = base.bounds.iter().copied().fold(0.0, f64::max);
        let mut scale = 1.0;
        while scale * worst > 1.0 {
            scale *= 0.5;
        }
        Self::with_shape(base.plateau, base.edge, scale)
    }

    fn with_shape(plateau: f64, edge: f64, scale: f64) -> Self {
        let w = edge - plateau;
        let s = smoothstep_bounds();
        let mut bounds = [0.0; ORDERS];
        bounds[0] = scale;
        for k in 1..ORDERS {
            bounds[k] = scale * s[k] / w.powi(k as i32);
        }
        BumpProfile {
            plateau,
            edge,
            scale,
            bounds,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.deriv(t, 0)
    }

    /// k-th derivative at t.
    pub fn deriv(&self, t: f64, k: usize) -> f64 {
        let r = t.abs();
        let sign = if t < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
        let v = if r >= self.edge {
            0.0
        } else if r <= self.plateau {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            let w = self.edge - self.plateau;
            let u = (self.edge - r) / w;
            (-1.0 / w).powi(k as i32) * smoothstep(u, k)
        };
        sign * self.scale * v
    }

    /// Derivatives of orders 0..=4 at t.
    pub fn jet(&self, t: f64) -> [f64; ORDERS] {
        let mut j = [0.0; ORDERS];
        for (k, v) in j.iter_mut().enumerate() {
            *v = self.deriv(t, k);
        }
        j
    }

    pub fn support_radius(&self) -> f64 {
        self.edge
    }

    /// True when every certified bound is at most 1 and the support lies
    /// strictly inside (−1/2, 1/2).
    pub fn is_class_b(&self) -> bool {
        self.edge < 0.5 && self.bounds.iter().all(|&b| b <= 1.0)
    }
}
