//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::HashMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cbr_core::cantor::{build_seed, CantorSystem, Interval};
use cbr_core::domain::{build_domain, dimension_table};
use cbr_core::energy::{
    energy_exponent_table, integer_separation_holds, level_overlap_check, overlap_by_sampling, sumset_overlap,
    SWEEP_BUDGET,
};
use cbr_core::fourier::grid::{GridFunction2D, GridSpace};
use cbr_core::fourier::kernel::{apply_multiplier, endpoint_check, kernel, kernel_at, kernel_scan, Window, SCALE};
use cbr_core::fourier::partition::{consecutive_ratios_ok, partition_of_unity, subdivide_caps};
use cbr_core::fourier::probe::{decoupling_probe_1d, decoupling_probe_2d, ProbeResult, ProbeWindow};
use cbr_core::lambdap::{self, build_p, lambda_lower_opt, norm_by_convolution, trig_norm};
use cbr_core::rational::{self, Q};
use cbr_core::regions::{continuity_defect, region_boundary, Exponent, Region};
use cbr_core::sidon::{bose_chowla, certify, extend_by_element, glue_translates, greedy_bm, IntegerSet};

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

/// Nondecreasing m-fold representation counts by direct recursion.
fn brute_counts(a: &[u64], m: u32, ordered: bool) -> HashMap<u64, u64> {
    fn rec(a: &[u64], m: u32, from: usize, sum: u64, ordered: bool, out: &mut HashMap<u64, u64>) {
        if m == 0 {
            *out.entry(sum).or_default() += 1;
            return;
        }
        let start = if ordered { 0 } else { from };
        for i in start..a.len() {
            rec(a, m - 1, i, sum + a[i], ordered, out);
        }
    }
    let mut out = HashMap::new();
    rec(a, m, 0, 0, ordered, &mut out);
    out
}

fn brute_max(a: &[u64], m: u32, ordered: bool) -> u64 {
    brute_counts(a, m, ordered).into_values().max().unwrap_or(0)
}

fn c1_bose_chowla() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for (q, m) in [(2u64, 2u32), (3, 2), (5, 2), (7, 2), (5, 3)] {
        let s = bose_chowla(q, m).unwrap();
        let top = q.pow(m) - 1;
        let range = s.elements().iter().all(|&x| (1..=top).contains(&x));
        let g = brute_max(s.elements(), m, false);
        ok &= s.card() as u64 == q && range && g == 1;
        detail.push(format!("({q},{m}):card={} g={g}", s.card()));
    }
    let secs = t.elapsed().as_secs_f64();
    ok &= secs < 5.0;
    (ok, format!("{} in {secs:.3} s", detail.join(" ")))
}

/// Every set produced by the constructions plus random certified subsets.
fn corpus() -> Vec<(IntegerSet, u32)> {
    let mut out = Vec::new();
    for (q, m) in [(2u64, 2u32), (3, 2), (5, 2), (7, 2), (11, 2), (13, 2), (2, 3), (3, 3), (5, 3), (7, 3), (2, 4), (3, 4)] {
        let s = bose_chowla(q, m).unwrap();
        for k in 1..=3 {
            out.push((glue_translates(&s, q.pow(m), k).unwrap(), m));
        }
    }
    for n in [20u64, 40, 60] {
        for m in [2u32, 3] {
            for g in 1..=3 {
                out.push((greedy_bm(n, m, g).unwrap(), m));
            }
        }
    }
    for (n, p, grid) in [(4u64, 4.0, Some(3u64)), (16, 4.0, None), (20, 4.0, None), (8, 6.0, None), (6, 6.0, None)] {
        let ps = build_p(n, p, 0, grid).unwrap();
        out.push((ps.set.translate(1), ps.m().unwrap()));
    }
    let mut r = ChaCha8Rng::seed_from_u64(2);
    while out.len() < 240 {
        let size = r.random_range(3..=12);
        let xs: Vec<u64> = (0..size).map(|_| r.random_range(1..=50)).collect();
        let m = r.random_range(2..=3);
        out.push((IntegerSet::from_unsorted(xs, 50).unwrap(), m));
    }
    out
}

fn c2_counting_bound() -> Outcome {
    let sets = corpus();
    let mut bad = 0;
    for (s, m) in &sets {
        let shift = s.min() - 1;
        let xs: Vec<u64> = s.elements().iter().map(|x| x - shift).collect();
        let n = *xs.last().unwrap() as u128;
        let g = brute_max(&xs, *m, true) as u128;
        let cert = certify(s, *m).unwrap();
        let card = xs.len() as u128;
        if cert.g_star as u128 != g || card.pow(*m) > *m as u128 * g * n {
            bad += 1;
        }
    }
    (sets.len() >= 200 && bad == 0, format!("{} sets, {bad} violations", sets.len()))
}

fn c3_extension() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    let mut worst = 0i64;
    for _ in 0..100 {
        let m = r.random_range(2..=3u32);
        let size = r.random_range(2..=8);
        let xs: Vec<u64> = (0..size).map(|_| r.random_range(0..=40)).collect();
        let a = IntegerSet::from_unsorted(xs, 40).unwrap();
        let b = loop {
            let b = r.random_range(0..=60);
            if !a.contains(b) {
                break b;
            }
        };
        let g = brute_max(a.elements(), m, true) as i64;
        let (ab, _) = extend_by_element(&a, m, b).unwrap();
        let g2 = brute_max(ab.elements(), m, true) as i64;
        let limit = 1 + m as i64 + (m as i64 - 1) * g;
        worst = worst.max(g2 - limit);
        if g2 > limit {
            bad += 1;
        }
    }
    (bad == 0, format!("100 extensions, {bad} violations, max(g' - bound) = {worst}"))
}

fn c4_lambda() -> Outcome {
    let pair = IntegerSet::new(vec![0, 1], 1).unwrap();
    let est = lambda_lower_opt(&pair, 4.0, 8, 500, 0).unwrap();
    let target = 1.5f64.powf(0.25);
    let exact_ok = (est.lower - target).abs() <= 1e-6;

    let mut r = ChaCha8Rng::seed_from_u64(4);
    let sets = [
        bose_chowla(5, 2).unwrap(),
        bose_chowla(3, 3).unwrap(),
        greedy_bm(30, 2, 2).unwrap(),
        IntegerSet::new(vec![0, 1, 2, 3, 7, 11], 11).unwrap(),
    ];
    let mut worst_rel: f64 = 0.0;
    for i in 0..50 {
        let s = &sets[i % sets.len()];
        let m = 2 + (i % 2) as u32;
        let c: Vec<Complex64> = (0..s.card()).map(|_| Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5)).collect();
        let conv = norm_by_convolution(s, &c, m);
        let quad = trig_norm(s, &c, 2.0 * m as f64, lambdap::DEFAULT_OVERSAMPLE).unwrap();
        worst_rel = worst_rel.max((conv - quad).abs() / conv);
    }
    let mut sandwich_bad = 0;
    let sets = corpus();
    for (j, (s, m)) in sets.iter().enumerate().step_by(6) {
        let p = 2.0 * *m as f64;
        let e = lambda_lower_opt(s, p, 2, 60, j as u64).unwrap();
        let (_, triv) = lambdap::trivial_bounds(s, p).unwrap();
        let up = e.upper.unwrap().min(triv);
        if e.lower > up * (1.0 + 1e-9) {
            sandwich_bad += 1;
        }
    }
    (
        exact_ok && worst_rel <= 1e-8 && sandwich_bad == 0,
        format!(
            "lower({{0,1}},4) = {:.9} vs {target:.9}; conv/quad max rel {worst_rel:.2e}; sandwich violations {sandwich_bad}",
            est.lower
        ),
    )
}

fn c5_seed() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (n, p) in [(16u64, 4.0), (8, 6.0)] {
        let fam = build_seed(n, p, 0, None).unwrap();
        let verified = fam.verify().is_ok();
        let m = lambdap::even_half(p).unwrap();
        let g = fam.g.unwrap();
        let w = sumset_overlap(&fam.intervals, m).unwrap();
        let sys = CantorSystem::new(fam);
        let sep = integer_separation_holds(&sys, m);
        ok &= verified && sep && w.multiplicity <= g;
        detail.push(format!("(N={n},p={p}): exact checks {verified}, overlap {} <= g {g}, separated {sep}", w.multiplicity));
    }
    (ok, detail.join("; "))
}

fn c6_levels() -> Outcome {
    let sys = CantorSystem::new(build_seed(4, 4.0, 0, Some(3)).unwrap());
    let mut ok = true;
    let mut detail = Vec::new();
    for k in 1..=3 {
        let c = level_overlap_check(&sys, 2, k).unwrap();
        ok &= c.holds;
        detail.push(format!("k={k}: {} <= {}", c.multiplicity, c.bound));
    }
    let mut instances = 0;
    let mut disagree = 0;
    let l1 = sys.level(1).unwrap();
    for mask in 1u32..(1 << l1.len()) {
        let xs: Vec<Interval> = (0..l1.len()).filter(|i| mask >> i & 1 == 1).map(|i| l1[i].clone()).collect();
        for m in [2, 3] {
            instances += 1;
            if sumset_overlap(&xs, m).unwrap().multiplicity != overlap_by_sampling(&xs, m, 10_000) {
                disagree += 1;
            }
        }
    }
    let l2 = sys.level(2).unwrap();
    for w in 1..=6 {
        for start in (0..=l2.len() - w).step_by(3) {
            let xs = &l2[start..start + w];
            instances += 1;
            if sumset_overlap(xs, 2).unwrap().multiplicity != overlap_by_sampling(xs, 2, 10_000) {
                disagree += 1;
            }
        }
    }
    ok &= disagree == 0;
    (ok, format!("{}; sweep vs sampling: {disagree}/{instances} disagree", detail.join(", ")))
}

fn geometric_ladder(step: u32, count: u32) -> Vec<Q> {
    (1..=count).map(|j| config_pow2(step * j)).collect()
}

fn config_pow2(k: u32) -> Q {
    rational::pow(&rational::frac(1, 2), k)
}

fn c7_dimension() -> Outcome {
    let sys = CantorSystem::new(build_seed(4, 4.0, 0, Some(3)).unwrap());
    let ladder = geometric_ladder(4, 6);
    let rows = dimension_table(&sys, &ladder, true).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for r in &rows {
        let l = -r.delta.ln();
        let ratio = (r.caps as f64).ln() / l;
        let env = ((8.0f64).ln() + 1.0) / l;
        let within = (ratio - 0.25).abs() <= env;
        ok &= within && r.cover_failures == Some(0);
        detail.push(format!("K={} caps={} |r-1/4|={:.3}<={env:.3}", r.k, r.caps, (ratio - 0.25).abs()));
    }
    (ok, detail.join(" "))
}

fn c8_energy() -> Outcome {
    let sys = CantorSystem::new(build_seed(4, 4.0, 0, Some(3)).unwrap());
    let g = sys.seed.g.unwrap();
    let ladder = geometric_ladder(4, 6);
    let rows = energy_exponent_table(&sys, 2, &ladder, g, SWEEP_BUDGET).unwrap();
    let all_within = rows.iter().all(|r| r.xi_upper <= r.bound);
    let measured: Vec<String> = rows.iter().filter(|r| r.measured).map(|r| format!("K={}:{:.3}", r.k, r.ratio)).collect();
    let deep: Vec<Q> = [16u32, 24, 32, 48, 64, 75].iter().map(|&j| config_pow2(4 * j)).collect();
    let g1 = energy_exponent_table(&sys, 2, &deep, 1, SWEEP_BUDGET).unwrap();
    let g1_within = g1.iter().all(|r| r.xi_upper <= r.bound);
    let end = g1.last().unwrap();
    (
        all_within && g1_within && end.ratio <= 0.1,
        format!(
            "certified g={g}: Xi_upper <= bound on all {} rows (measured ratios {}); g=1 ladder (bound-only rows: {}) end delta=2^-300 K={} ratio {:.4}",
            rows.len(),
            measured.join(" "),
            g1.iter().filter(|r| !r.measured).count(),
            end.k,
            end.ratio
        ),
    )
}

fn c9_kernel() -> Outcome {
    let sys = CantorSystem::new(build_seed(2, 4.0, 0, None).unwrap());
    let dom = build_domain(&sys, 4).unwrap();
    let deltas: Vec<f64> = (3..=7).map(|k| 0.5f64.powi(k)).collect();
    let (rows, fit) = kernel_scan(&dom, &deltas, 0.3, 1 << 13).unwrap();
    let mut dc_ok = true;
    for &d in &deltas {
        dc_ok &= kernel(&dom, d, 0.3, Window::Whole, 1 << 13).unwrap().dc == 0.0;
    }
    let tails: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.tail_share)).collect();
    let side = 256;
    let (k, _) = kernel_at(&dom, 0.0625, 0.3, Window::Whole, side).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let mut l2_ok = 0;
    let mut linf_ok = 0;
    for _ in 0..50 {
        let mut f = GridFunction2D::zeros(side, SCALE, GridSpace::Physical).unwrap();
        for v in f.data.iter_mut() {
            *v = Complex64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5);
        }
        let tf = apply_multiplier(&f, &dom, 0.0625, 0.3, Window::Whole).unwrap();
        let c = endpoint_check(&f, &tf, &k).unwrap();
        l2_ok += c.l2_holds as u32;
        linf_ok += c.linf_holds as u32;
    }
    (
        fit.residual < 0.2 && fit.b >= 0.0 && dc_ok && l2_ok == 50 && linf_ok == 50,
        format!(
            "fit a={:.4} b={:.4} residual {:.3}; tail shares [{}]; DC zero {dc_ok}; q=2 {l2_ok}/50, q=inf {linf_ok}/50",
            fit.a,
            fit.b,
            fit.residual,
            tails.join(",")
        ),
    )
}

fn c10_partition() -> Outcome {
    let sys = CantorSystem::new(build_seed(2, 4.0, 0, None).unwrap());
    let mut ok = true;
    let mut detail = Vec::new();
    for k in [3i64, 5, 7] {
        let delta = rational::frac(1, 1 << k);
        let part = sys.scale_partition(&delta).unwrap();
        let pieces = subdivide_caps(&part);
        let ratios = consecutive_ratios_ok(&pieces);
        let pu = partition_of_unity(&part).unwrap();
        let rep = &pu.report;
        let pass = rep.samples == 1 << 14 && rep.sum_error <= 1e-10 && ratios && rep.class_b_max <= 1.0;
        ok &= pass;
        detail.push(format!(
            "delta=2^-{k}: {} pieces, sum err {:.1e}, ratios {ratios}, class-B max {:.3} (c={})",
            pu.len(),
            rep.sum_error,
            rep.class_b_max,
            pu.c
        ));
    }
    (ok, detail.join("; "))
}

fn c11_probes() -> Outcome {
    let sys = CantorSystem::new(build_seed(4, 4.0, 0, Some(3)).unwrap());
    let l1 = sys.level(1).unwrap();
    let mut all: Vec<ProbeResult> = Vec::new();
    let single2 = decoupling_probe_2d(&l1[..1], 4.0, 4, 1).unwrap();
    let single1 = decoupling_probe_1d(&l1[..1], 4.0, ProbeWindow::Whole, 4, 1).unwrap();
    let single_ok = [&single1, &single2].iter().all(|r| (r.max_ratio - 1.0).abs() <= 1e-12 && (r.min_ratio - 1.0).abs() <= 1e-12);
    let q2a = decoupling_probe_2d(&l1, 2.0, 8, 2).unwrap();
    let q2b = decoupling_probe_1d(&sys.level(2).unwrap(), 2.0, ProbeWindow::Whole, 8, 2).unwrap();
    let q2_ok = q2a.max_ratio <= 1.0 + 1e-6 && q2b.max_ratio <= 1.0 + 1e-6;
    for q in [3.0, 4.0, 6.0, 8.0] {
        all.push(decoupling_probe_2d(&l1, q, 8, 3).unwrap());
        all.push(decoupling_probe_1d(&l1, q, ProbeWindow::Whole, 8, 3).unwrap());
        all.push(decoupling_probe_1d(&sys.level(2).unwrap(), q, ProbeWindow::Whole, 8, 3).unwrap());
    }
    all.extend([single1, single2, q2a.clone(), q2b.clone()]);
    let ceiling_ok = all.iter().all(|r| r.within_ceiling());
    let mut worst: f64 = 0.0;
    let l2 = sys.level(2).unwrap();
    for parent in [&l1[0], &l1[l1.len() - 1]] {
        let kids: Vec<Interval> = l2.iter().filter(|j| parent.contains(j)).cloned().collect();
        for q in [4.0, 6.0] {
            let a = decoupling_probe_2d(&l1, q, 4, 11).unwrap();
            let b = decoupling_probe_2d(&kids, q, 4, 11).unwrap();
            worst = worst.max((a.max_ratio - b.max_ratio).abs());
        }
    }
    (
        single_ok && q2_ok && ceiling_ok && worst <= 1e-8,
        format!(
            "single piece = 1: {single_ok}; q=2 max {:.2e} over 1; ceiling held on {} probes: {ceiling_ok}; rescaling gap {worst:.1e}",
            q2a.max_ratio.max(q2b.max_ratio) - 1.0,
            all.len()
        ),
    )
}

fn c12_regions() -> Outcome {
    let mut worst: f64 = 0.0;
    let eps = 0.01;
    for m in 2u32..=12 {
        let mf = m as f64;
        let main = Region::Main { m, kappa: 1.0 / (2.0 * mf), eps };
        let a = main.branch(0, 1.0 / (2.0 * mf));
        let b = main.branch(1, 1.0 / (2.0 * mf));
        worst = worst.max((a - b).abs()).max((a - (1.0 / (2.0 * mf)) * (0.5 - 1.0 / mf) - eps).abs());
        worst = worst.max(continuity_defect(&main));
        worst = worst.max(continuity_defect(&Region::Cladek { m, kappa: 1.0 / (4.0 * mf - 2.0) }));
    }
    for p in [2.5, 3.0, 4.0, 5.5, 8.0, 13.0] {
        let lp = Region::LambdaP { p, eps };
        worst = worst.max(continuity_defect(&lp));
        worst = worst.max((region_boundary(&lp, Exponent::Finite(4.0)).unwrap() - eps).abs());
    }
    let sz = region_boundary(&Region::SeegerZiesler { kappa: 0.25 }, Exponent::Finite(8.0)).unwrap();
    worst = worst.max(continuity_defect(&Region::SeegerZiesler { kappa: 0.25 }));
    (worst <= 1e-12 && sz == 0.125, format!("max branch defect {worst:.1e}; SZ(1/4, 8) = {sz}"))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("1 Bose-Chowla certification", c1_bose_chowla),
        ("2 counting bound over corpus", c2_counting_bound),
        ("3 single-element extension", c3_extension),
        ("4 Lambda(4) exactness and sandwich", c4_lambda),
        ("5 seed family exact checks", c5_seed),
        ("6 level overlap and sweep oracle", c6_levels),
        ("7 dimension envelope and cap cover", c7_dimension),
        ("8 energy bound", c8_energy),
        ("9 kernel scaling and endpoints", c9_kernel),
        ("10 partition of unity", c10_partition),
        ("11 decoupling probe sanity", c11_probes),
        ("12 region calculator", c12_regions),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let (ok, detail) = f();
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] {name} ({:.1} s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
