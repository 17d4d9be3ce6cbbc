//! The convex domain over a finite-depth Cantor level: boundary graph γ,
//! gauge ρ, supporting lines, δ-cap coverings and the dimension table.
//!
//! γ lives in parabola coordinates (γ(b) = b² at breakpoints). The geometric
//! domain is {(t, y) : γ(t) − 1/8 ≤ y ≤ 1/8}, so the origin is interior.

use num_traits::{Signed, Zero};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cantor::{CantorSystem, Interval, ScalePartition};
use crate::error::{Error, Result};
use crate::par;
use crate::rational::{self, Q};

/// Height of the top edge in offset coordinates.
pub const TOP: f64 = 0.125;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceKind {
    /// Inside a level-depth interval.
    Leaf,
    /// A removed interval of the given generation.
    Removed { generation: u32 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvexDomain {
    pub depth: u32,
    #[serde(serialize_with = "rational::vec::ser")]
    pub breakpoints: Vec<Q>,
    /// Slope of γ on [b_i, b_{i+1}], equal to b_i + b_{i+1}.
    #[serde(serialize_with = "rational::vec::ser")]
    pub slopes: Vec<Q>,
    pub pieces: Vec<PieceKind>,
    /// sha256 of the seed family JSON.
    pub provenance: String,
    #[serde(skip)]
    bf: Vec<f64>,
    #[serde(skip)]
    sf: Vec<f64>,
    #[serde(skip)]
    gauge: Gauge,
}

/// Polygon edges in angular order around the origin, for ρ queries.
#[derive(Clone, Debug, Default)]
struct Gauge {
    /// Unwrapped polar angle of each vertex, increasing.
    angles: Vec<f64>,
    /// Edge i runs from vertex i to i+1 (the last edge closes the polygon);
    /// stored as outward normal n and offset c with n·x = c > 0.
    normals: Vec<(f64, f64, f64)>,
}

impl Gauge {
    fn new(vertices: &[(f64, f64)]) -> Self {
        let v = vertices.len();
        let mut angles = Vec::with_capacity(v);
        let mut prev = f64::NEG_INFINITY;
        for &(x, y) in vertices {
            let mut a = y.atan2(x);
            while a <= prev {
                a += std::f64::consts::TAU;
            }
            angles.push(a);
            prev = a;
        }
        let normals = (0..v)
            .map(|i| {
                let (x0, y0) = vertices[i];
                let (x1, y1) = vertices[(i + 1) % v];
                let (nx, ny) = (y1 - y0, -(x1 - x0));
                (nx, ny, nx * x0 + ny * y0)
            })
            .collect();
        Gauge { angles, normals }
    }

    fn rho(&self, x: f64, y: f64) -> f64 {
        if x == 0.0 && y == 0.0 {
            return 0.0;
        }
        let a0 = self.angles[0];
        let mut a = y.atan2(x);
        while a < a0 {
            a += std::f64::consts::TAU;
        }
        while a >= a0 + std::f64::consts::TAU {
            a -= std::f64::consts::TAU;
        }
        // Edge i covers angles [angles[i], angles[i+1]); the closing edge the rest.
        let i = self.angles.partition_point(|&t| t <= a) - 1;
        let (nx, ny, c) = self.normals[i];
        (nx * x + ny * y) / c
    }
}

fn hash_json<T: Serialize>(x: &T) -> String {
    let bytes = serde_json::to_vec(x).expect("serializable");
    hex::encode(Sha256::digest(&bytes))
}

/// γ over the level-`depth` intervals and all removed generations up to depth.
pub fn build_domain(sys: &CantorSystem, depth: u32) -> Result<ConvexDomain> {
    if depth == 0 {
        return Err(Error::invalid("depth must be >= 1"));
    }
    let leaves = sys.level(depth)?;
    let mut parts: Vec<(PieceKind, Interval)> =
        leaves.iter().map(|i| (PieceKind::Leaf, i.clone())).collect();
    for g in 1..=depth {
        parts.extend(
            sys.removed(g)?
                .into_iter()
                .map(|i| (PieceKind::Removed { generation: g }, i)),
        );
    }
    parts.sort_by(|a, b| a.1.lo.cmp(&b.1.lo));
    let mut breakpoints = Vec::with_capacity(parts.len() + 1);
    breakpoints.push(-rational::half());
    for (_, i) in &parts {
        if *breakpoints.last().unwrap() != i.lo {
            return Err(Error::Certification("Cantor parts do not tile the unit interval".into()));
        }
        breakpoints.push(i.hi.clone());
    }
    if *breakpoints.last().unwrap() != rational::half() {
        return Err(Error::Certification("Cantor parts do not reach 1/2".into()));
    }
    let slopes: Vec<Q> = breakpoints.windows(2).map(|w| &w[0] + &w[1]).collect();
    let pieces = parts.into_iter().map(|(k, _)| k).collect();
    let bf: Vec<f64> = breakpoints.iter().map(rational::to_f64).collect();
    let sf: Vec<f64> = slopes.iter().map(rational::to_f64).collect();
    let vertices: Vec<(f64, f64)> = bf.iter().map(|&b| (b, b * b - TOP)).collect();
    let dom = ConvexDomain {
        depth,
        provenance: hash_json(&sys.seed),
        gauge: Gauge::new(&vertices),
        breakpoints,
        slopes,
        pieces,
        bf,
        sf,
    };
    if dom.gamma(0.0) - TOP >= 0.0 {
        return Err(Error::Certification("origin is not interior to the domain".into()));
    }
    Ok(dom)
}

impl ConvexDomain {
    /// Index of the piece containing t (right-continuous, clamped).
    fn piece_of(&self, t: f64) -> usize {
        let i = self.bf.partition_point(|&b| b <= t);
        i.clamp(1, self.sf.len()) - 1
    }

    fn piece_of_exact(&self, t: &Q) -> usize {
        let i = self.breakpoints.partition_point(|b| b <= t);
        i.clamp(1, self.slopes.len()) - 1
    }

    pub fn gamma(&self, t: f64) -> f64 {
        let i = self.piece_of(t);
        let b = self.bf[i];
        b * b + self.sf[i] * (t - b)
    }

    pub fn gamma_exact(&self, t: &Q) -> Q {
        let i = self.piece_of_exact(t);
        let b = &self.breakpoints[i];
        b * b + &self.slopes[i] * (t - b)
    }

    /// Left one-sided slope γ'_L(t); at −1/2 the first slope.
    pub fn slope_left(&self, t: &Q) -> Q {
        let i = self.breakpoints.partition_point(|b| b < t);
        self.slopes[i.clamp(1, self.slopes.len()) - 1].clone()
    }

    /// Right one-sided slope γ'_R(t); at 1/2 the last slope.
    pub fn slope_right(&self, t: &Q) -> Q {
        self.slopes[self.piece_of_exact(t)].clone()
    }

    pub fn vertex_count(&self) -> usize {
        self.bf.len()
    }

    /// Hull vertices in offset coordinates.
    pub fn vertices(&self) -> Vec<(f64, f64)> {
        self.bf.iter().map(|&b| (b, b * b - TOP)).collect()
    }

    /// (t − s)(γ'_L(t) − γ'_R(s)) for s < t, exact.
    pub fn slope_gap(&self, s: &Q, t: &Q) -> Q {
        (t - s) * (self.slope_left(t) - self.slope_right(s))
    }

    /// Minkowski functional of the offset domain.
    pub fn rho(&self, x: f64, y: f64) -> f64 {
        self.gauge.rho(x, y)
    }
}

/// Supporting line through (t₀, γ(t₀)) with slope σ.
#[derive(Clone, Debug, Serialize)]
pub struct SupportLine {
    #[serde(serialize_with = "rational::ser")]
    pub t0: Q,
    #[serde(serialize_with = "rational::ser")]
    pub slope: Q,
}

/// Signed distance from (t, γ(t)) to the line, via the graph formula.
pub fn dist_to_line(dom: &ConvexDomain, t: f64, line: &SupportLine) -> f64 {
    let t0 = rational::to_f64(&line.t0);
    let s = rational::to_f64(&line.slope);
    (dom.gamma(t) - dom.gamma(t0) - s * (t - t0)) / (1.0 + s * s).sqrt()
}

/// Exact numerator γ(t) − γ(t₀) − σ(t − t₀) of the distance formula.
pub fn dist_numerator(dom: &ConvexDomain, t: &Q, line: &SupportLine) -> Q {
    dom.gamma_exact(t) - dom.gamma_exact(&line.t0) - &line.slope * (t - &line.t0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CapKind {
    Leaf,
    Removed { generation: u32 },
    Top,
}

#[derive(Clone, Debug, Serialize)]
pub struct Cap {
    pub kind: CapKind,
    pub line: SupportLine,
    pub base: Interval,
}

#[derive(Clone, Debug, Serialize)]
pub struct CapCover {
    #[serde(serialize_with = "rational::ser")]
    pub delta: Q,
    pub k: u32,
    pub caps: Vec<Cap>,
    /// Leaf endpoints whose distance exceeds (3/4)|I|² or reaches δ.
    pub endpoint_failures: usize,
    /// Removed caps with a nonzero chord distance.
    pub chord_failures: usize,
    /// Dense samples at distance ≥ δ from the assigned line.
    pub sample_failures: usize,
    pub samples: usize,
    pub max_sample_distance: f64,
}

impl CapCover {
    pub fn card(&self) -> usize {
        self.caps.len()
    }

    pub fn verified(&self) -> bool {
        self.endpoint_failures == 0 && self.chord_failures == 0 && self.sample_failures == 0
    }
}

pub const SAMPLES_PER_CAP: usize = 1000;

/// One cap per part of I(δ) plus one for the top edge, verified analytically
/// at leaf endpoints and by dense sampling everywhere.
pub fn cap_cover(dom: &ConvexDomain, sys: &CantorSystem, delta: &Q) -> Result<CapCover> {
    let part = sys.scale_partition(delta)?;
    cap_cover_for(dom, &part)
}

pub fn cap_cover_for(dom: &ConvexDomain, part: &ScalePartition) -> Result<CapCover> {
    if dom.depth < part.k {
        return Err(Error::invalid(format!(
            "domain depth {} below K(delta) = {}",
            dom.depth, part.k
        )));
    }
    let delta = &part.delta;
    let mut caps: Vec<Cap> = Vec::with_capacity(part.card() + 1);
    for i in &part.leaves {
        let c = i.center();
        caps.push(Cap {
            kind: CapKind::Leaf,
            line: SupportLine {
                slope: dom.slope_left(&c),
                t0: c,
            },
            base: i.clone(),
        });
    }
    for (g, gen) in part.removed.iter().enumerate() {
        for i in gen {
            caps.push(Cap {
                kind: CapKind::Removed {
                    generation: g as u32 + 1,
                },
                line: SupportLine {
                    t0: i.lo.clone(),
                    slope: &i.lo + &i.hi,
                },
                base: i.clone(),
            });
        }
    }
    caps.push(Cap {
        kind: CapKind::Top,
        line: SupportLine {
            t0: Q::zero(),
            slope: Q::zero(),
        },
        base: Interval::unit(),
    });

    let three_quarters = rational::frac(3, 4);
    let checks = par::map(&caps, |cap| -> (usize, usize, usize, f64) {
        let (mut ep, mut ch) = (0, 0);
        match cap.kind {
            CapKind::Leaf => {
                let bound = &three_quarters * rational::pow(&cap.base.len(), 2);
                let s2 = rational::int(1) + rational::pow(&cap.line.slope, 2);
                for t in [&cap.base.lo, &cap.base.hi] {
                    let num = dist_numerator(dom, t, &cap.line);
                    // dist ≤ bound ⇔ num² ≤ bound²·(1 + σ²), with num ≥ 0.
                    let ok = !num.is_negative()
                        && &num * &num <= &bound * &bound * &s2
                        && bound < *delta;
                    if !ok {
                        ep += 1;
                    }
                }
            }
            CapKind::Removed { .. } => {
                for t in [&cap.base.lo, &cap.base.hi] {
                    if !dist_numerator(dom, t, &cap.line).is_zero() {
                        ch += 1;
                    }
                }
            }
            CapKind::Top => {}
        }
        let (mut sf, mut worst) = (0, 0.0f64);
        if cap.kind != CapKind::Top {
            let (lo, hi) = (cap.base.lo_f64(), cap.base.hi_f64());
            let d = rational::to_f64(delta);
            for j in 0..SAMPLES_PER_CAP {
                let t = lo + (hi - lo) * j as f64 / (SAMPLES_PER_CAP - 1) as f64;
                let dist = dist_to_line(dom, t, &cap.line).abs();
                worst = worst.max(dist);
                if dist >= d {
                    sf += 1;
                }
            }
        }
        (ep, ch, sf, worst)
    });
    let mut cover = CapCover {
        delta: delta.clone(),
        k: part.k,
        endpoint_failures: 0,
        chord_failures: 0,
        sample_failures: 0,
        samples: (caps.len() - 1) * SAMPLES_PER_CAP,
        max_sample_distance: 0.0,
        caps,
    };
    for (ep, ch, sf, w) in checks {
        cover.endpoint_failures += ep;
        cover.chord_failures += ch;
        cover.sample_failures += sf;
        cover.max_sample_distance = cover.max_sample_distance.max(w);
    }
    Ok(cover)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationStatus {
    Passed,
    Failed,
    /// Fewer than ⌈N^p⌉ removed intervals at this δ.
    Insufficient,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub status: SeparationStatus,
    /// Index offset between the paired removed intervals.
    pub span: usize,
    pub pairs: usize,
    pub min_distance: f64,
    /// Smallest (1/√2)(l₂ − r₁)² over the pairs.
    pub min_quadratic_bound: f64,
}

/// For removed intervals I₁ ≺ I₂ that are ⌈N^p⌉ apart in the ordered list
/// (first and last of ⌈N^p⌉ consecutive ones), the distance of P_{l₂} to ℓ_{I₁}
/// must exceed δ.
pub fn cap_separation_check(dom: &ConvexDomain, part: &ScalePartition, n: u64, p: f64) -> SeparationReport {
    let mut removed: Vec<&Interval> = part.removed.iter().flatten().collect();
    removed.sort_by(|a, b| a.lo.cmp(&b.lo));
    let count = (n as f64).powf(p).ceil() as usize;
    let span = count.saturating_sub(1).max(1);
    if removed.len() < count {
        return SeparationReport {
            status: SeparationStatus::Insufficient,
            span,
            pairs: 0,
            min_distance: f64::NAN,
            min_quadratic_bound: f64::NAN,
        };
    }
    let d = rational::to_f64(&part.delta);
    let idx: Vec<usize> = (0..removed.len() - span).collect();
    let res = par::map(&idx, |&i| {
        let (a, b) = (removed[i], removed[i + span]);
        let line = SupportLine {
            t0: a.lo.clone(),
            slope: &a.lo + &a.hi,
        };
        let dist = dist_to_line(dom, b.lo_f64(), &line);
        let gap = b.lo_f64() - a.hi_f64();
        (dist, gap * gap / 2f64.sqrt())
    });
    let min_distance = res.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let min_q = res.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    SeparationReport {
        status: if min_distance > d {
            SeparationStatus::Passed
        } else {
            SeparationStatus::Failed
        },
        span,
        pairs: res.len(),
        min_distance,
        min_quadratic_bound: min_q,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionRow {
    pub delta: f64,
    pub k: u32,
    pub caps: usize,
    pub ratio: f64,
    pub envelope: f64,
    pub within: bool,
    /// Cover verification failures (all tiers), when the cover was checked.
    pub cover_failures: Option<usize>,
}

/// Cap counts and log-ratios along a δ-ladder, optionally verifying each cover.
pub fn dimension_table(sys: &CantorSystem, ladder: &[Q], verify: bool) -> Result<Vec<DimensionRow>> {
    if ladder.is_empty() {
        return Err(Error::invalid("empty delta ladder"));
    }
    let ks = ladder.iter().map(|d| sys.k_delta(d)).collect::<Result<Vec<_>>>()?;
    let depth = *ks.iter().max().unwrap();
    let dom = build_domain(sys, depth)?;
    let n = sys.n() as f64;
    let p = sys.p();
    ladder
        .iter()
        .map(|delta| {
            let part = sys.scale_partition(delta)?;
            let (caps, failures) = if verify {
                let c = cap_cover_for(&dom, &part)?;
                let f = c.endpoint_failures + c.chord_failures + c.sample_failures;
                (c.card(), Some(f))
            } else {
                (part.card() + 1, None)
            };
            let d = rational::to_f64(delta);
            let l = -d.log2();
            let ratio = (caps as f64).log2() / l;
            let envelope = ((2.0 * n).log2() + 1.0) / l;
            Ok(DimensionRow {
                delta: d,
                k: part.k,
                caps,
                ratio,
                envelope,
                within: (ratio - 1.0 / p).abs() <= envelope,
                cover_failures: failures,
            })
        })
        .collect()
}
