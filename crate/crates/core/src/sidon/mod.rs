//! B_m and B_m^*[g] integer sets: construction, gluing, extension and
//! brute-force certification of representation counts.

pub mod field;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_budget, Error, Result};
use crate::par;

/// Default cap on tuple visits for enumeration.
pub const ENUM_BUDGET: u128 = 100_000_000;

/// Sorted, distinct, nonnegative integers inside `[0, ambient_max]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawIntegerSet")]
pub struct IntegerSet {
    elements: Vec<u64>,
    ambient_max: u64,
    #[serde(default)]
    certificates: Vec<BmCertificate>,
}

#[derive(Deserialize)]
struct RawIntegerSet {
    elements: Vec<u64>,
    ambient_max: u64,
    #[serde(default)]
    certificates: Vec<BmCertificate>,
}

impl TryFrom<RawIntegerSet> for IntegerSet {
    type Error = Error;

    fn try_from(r: RawIntegerSet) -> Result<Self> {
        let mut s = IntegerSet::new(r.elements, r.ambient_max)?;
        s.certificates = r.certificates;
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BmCertificate {
    pub m: u32,
    /// Maximal nondecreasing representation count.
    pub g: u64,
    /// Maximal ordered representation count.
    pub g_star: u64,
}

impl IntegerSet {
    /// Sorts and deduplicates nothing: the input must already be strictly increasing.
    pub fn new(elements: Vec<u64>, ambient_max: u64) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::invalid("integer set must be nonempty"));
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("elements must be strictly increasing"));
        }
        if *elements.last().unwrap() > ambient_max {
            return Err(Error::invalid(format!(
                "element {} exceeds ambient_max {}",
                elements.last().unwrap(),
                ambient_max
            )));
        }
        Ok(IntegerSet {
            elements,
            ambient_max,
            certificates: Vec::new(),
        })
    }

    /// Builds from arbitrary input, sorting and deduplicating.
    pub fn from_unsorted(mut elements: Vec<u64>, ambient_max: u64) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        Self::new(elements, ambient_max)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn ambient_max(&self) -> u64 {
        self.ambient_max
    }

    pub fn card(&self) -> usize {
        self.elements.len()
    }

    pub fn min(&self) -> u64 {
        self.elements[0]
    }

    pub fn max(&self) -> u64 {
        *self.elements.last().unwrap()
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    pub fn certificates(&self) -> &[BmCertificate] {
        &self.certificates
    }

    pub fn certificate(&self, m: u32) -> Option<BmCertificate> {
        self.certificates.iter().copied().find(|c| c.m == m)
    }

    /// Computes and attaches the certificate for `m` (replacing any previous one).
    pub fn certified(mut self, m: u32) -> Result<Self> {
        let c = certify(&self, m)?;
        self.certificates.retain(|x| x.m != m);
        self.certificates.push(c);
        self.certificates.sort_by_key(|x| x.m);
        Ok(self)
    }

    /// `n + A`, dropping certificates' dependence on position (counts translate).
    pub fn translate(&self, n: u64) -> Self {
        IntegerSet {
            elements: self.elements.iter().map(|x| x + n).collect(),
            ambient_max: self.ambient_max + n,
            certificates: self.certificates.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationProfile {
    pub m: u32,
    pub counts: BTreeMap<u64, u64>,
    pub max_count: u64,
    pub ordered: bool,
}

impl RepresentationProfile {
    fn from_dense(m: u32, dense: &[u64], ordered: bool) -> Self {
        let counts: BTreeMap<u64, u64> = dense
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(n, &c)| (n as u64, c))
            .collect();
        let max_count = counts.values().copied().max().unwrap_or(0);
        RepresentationProfile {
            m,
            counts,
            max_count,
            ordered,
        }
    }

    pub fn total(&self) -> u128 {
        self.counts.values().map(|&c| c as u128).sum()
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Ordered counts by m-fold convolution of the indicator vector.
fn ordered_by_convolution(a: &[u64], m: u32) -> Vec<u64> {
    let max = *a.last().unwrap() as usize;
    let mut cur: Vec<u64> = vec![0; max + 1];
    for &x in a {
        cur[x as usize] = 1;
    }
    for step in 2..=m as usize {
        let len = step * max + 1;
        let prev = cur;
        cur = par::map_range(len, |n| {
            let mut s = 0u64;
            for &x in a {
                let x = x as usize;
                if x > n {
                    break;
                }
                if let Some(&c) = prev.get(n - x) {
                    s += c;
                }
            }
            s
        });
    }
    cur
}

/// Ordered counts by visiting all card^m tuples.
pub fn ordered_by_enumeration(a: &[u64], m: u32) -> Vec<u64> {
    let max = *a.last().unwrap() as usize;
    let mut dense = vec![0u64; m as usize * max + 1];
    let mut idx = vec![0usize; m as usize];
    loop {
        let s: u64 = idx.iter().map(|&i| a[i]).sum();
        dense[s as usize] += 1;
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return dense;
            }
            idx[pos] += 1;
            if idx[pos] < a.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Nondecreasing counts by visiting every multiset of size m once.
fn nondecreasing_by_enumeration(a: &[u64], m: u32) -> Vec<u64> {
    let max = *a.last().unwrap() as usize;
    let mut dense = vec![0u64; m as usize * max + 1];
    let m = m as usize;
    let mut idx = vec![0usize; m];
    loop {
        let s: u64 = idx.iter().map(|&i| a[i]).sum();
        dense[s as usize] += 1;
        // Advance the rightmost index that can still grow, then reset the tail.
        let mut pos = m;
        loop {
            if pos == 0 {
                return dense;
            }
            pos -= 1;
            if idx[pos] + 1 < a.len() {
                let v = idx[pos] + 1;
                for x in idx[pos..].iter_mut() {
                    *x = v;
                }
                break;
            }
        }
    }
}

/// Representation counts of `A` as sums of m elements, ordered or nondecreasing.
pub fn rep_counts(a: &IntegerSet, m: u32, ordered: bool) -> Result<RepresentationProfile> {
    rep_counts_with_budget(a, m, ordered, ENUM_BUDGET)
}

pub fn rep_counts_with_budget(
    a: &IntegerSet,
    m: u32,
    ordered: bool,
    budget: u128,
) -> Result<RepresentationProfile> {
    if m < 1 {
        return Err(Error::invalid("m must be >= 1"));
    }
    let el = a.elements();
    let card = el.len() as u128;
    let dense = if ordered {
        let conv_cost = card * m as u128 * (a.max() as u128 + 1);
        let enum_cost = card.saturating_pow(m);
        if conv_cost <= budget {
            ordered_by_convolution(el, m)
        } else if enum_cost <= budget {
            ordered_by_enumeration(el, m)
        } else {
            check_budget("rep_counts", conv_cost.min(enum_cost), budget)?;
            unreachable!()
        }
    } else {
        let multisets = binomial(card + m as u128 - 1, m as u128);
        check_budget("rep_counts", multisets, budget)?;
        nondecreasing_by_enumeration(el, m)
    };
    Ok(RepresentationProfile::from_dense(m, &dense, ordered))
}

fn factorial(m: u32) -> u64 {
    (1..=m as u64).product()
}

/// Certified B_m[g] and B_m^*[g_star] levels.
pub fn certify(a: &IntegerSet, m: u32) -> Result<BmCertificate> {
    let g_star = rep_counts(a, m, true)?.max_count;
    let g = rep_counts(a, m, false)?.max_count;
    if !(g <= g_star && g_star <= g.saturating_mul(factorial(m))) {
        return Err(Error::Certification(format!(
            "g = {g}, g_star = {g_star} violate g <= g_star <= g*m!"
        )));
    }
    Ok(BmCertificate { m, g, g_star })
}

/// Bose–Chowla set {a ∈ [1, q^m − 1] : θ^a − θ ∈ GF(q)} for a primitive θ.
pub fn bose_chowla(q: u64, m: u32) -> Result<IntegerSet> {
    if m < 2 {
        return Err(Error::invalid("Bose-Chowla needs m >= 2"));
    }
    let size = (q as u128)
        .checked_pow(m)
        .ok_or_else(|| Error::invalid("q^m overflows"))?;
    check_budget("bose_chowla", size, ENUM_BUDGET)?;
    let f = field::Field::new(q, m as usize)?;
    let theta = f.primitive_element()?;
    let top = f.order() - 1;
    let mut out = Vec::with_capacity(q as usize);
    let mut pow = theta.clone();
    for a in 1..=top {
        if f.in_prime_field(&f.sub(&pow, &theta)) {
            out.push(a);
        }
        pow = f.mul(&pow, &theta);
    }
    if out.len() as u64 != q {
        return Err(Error::Certification(format!(
            "Bose-Chowla produced {} elements, expected {q}",
            out.len()
        )));
    }
    IntegerSet::new(out, top)
}

/// ∪_{j=1}^{k} ((j−1)q + S).
pub fn glue_translates(s: &IntegerSet, q: u64, k: u64) -> Result<IntegerSet> {
    if k < 1 {
        return Err(Error::invalid("k must be >= 1"));
    }
    if s.min() < 1 || s.max() > q {
        return Err(Error::invalid(format!("S must lie in [1, {q}]")));
    }
    let mut out = Vec::with_capacity(s.card() * k as usize);
    for j in 0..k {
        out.extend(s.elements().iter().map(|x| x + j * q));
    }
    IntegerSet::new(out, k * q)
}

/// Predicted level after adjoining one element to a B_m^*[g] set.
pub fn predicted_extension_level(m: u32, g: u64) -> u64 {
    1 + m as u64 + (m as u64 - 1) * g
}

/// A ∪ {b} with the predicted B_m^*[·] level; the actual level is certified
/// and must not exceed the prediction.
pub fn extend_by_element(a: &IntegerSet, m: u32, b: u64) -> Result<(IntegerSet, u64)> {
    if a.contains(b) {
        return Err(Error::invalid(format!("{b} is already in the set")));
    }
    let g = match a.certificate(m) {
        Some(c) => c.g_star,
        None => certify(a, m)?.g_star,
    };
    let predicted = predicted_extension_level(m, g);
    let mut el = a.elements().to_vec();
    el.push(b);
    let ext = IntegerSet::from_unsorted(el, a.ambient_max().max(b))?.certified(m)?;
    let actual = ext.certificate(m).unwrap().g_star;
    if actual > predicted {
        return Err(Error::Certification(format!(
            "extension level {actual} exceeds predicted {predicted}"
        )));
    }
    Ok((ext, predicted))
}

/// Incrementally maintained representation counts for greedy scans.
///
/// `levels[r][s]` counts r-tuples (ordered or nondecreasing) with sum s.
struct Counter {
    m: usize,
    ordered: bool,
    levels: Vec<Vec<u64>>,
    binom: Vec<Vec<u64>>,
}

impl Counter {
    fn new(m: u32, ordered: bool, max: u64) -> Self {
        let m = m as usize;
        let len = m * max as usize + 1;
        let mut levels = vec![vec![0u64; len]; m + 1];
        levels[0][0] = 1;
        let mut binom = vec![vec![0u64; m + 1]; m + 1];
        for n in 0..=m {
            binom[n][0] = 1;
            for k in 1..=n {
                binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0 };
            }
        }
        Counter {
            m,
            ordered,
            levels,
            binom,
        }
    }

    fn weight(&self, r: usize, j: usize) -> u64 {
        if self.ordered {
            self.binom[r][j]
        } else {
            1
        }
    }

    /// Top-level counts after adding x, restricted to sums touched by x.
    fn max_after(&self, x: u64) -> u64 {
        let m = self.m;
        let x = x as usize;
        let len = self.levels[0].len();
        let mut best = 0;
        for s in x..len {
            let mut c = self.levels[m][s];
            for j in 1..=m {
                if j * x > s {
                    break;
                }
                c += self.weight(m, j) * self.levels[m - j][s - j * x];
            }
            best = best.max(c);
        }
        best
    }

    fn add(&mut self, x: u64) {
        let x = x as usize;
        let old = self.levels.clone();
        for r in 1..=self.m {
            for s in 0..old[r].len() {
                let mut c = old[r][s];
                for j in 1..=r {
                    if j * x > s {
                        break;
                    }
                    c += self.weight(r, j) * old[r - j][s - j * x];
                }
                self.levels[r][s] = c;
            }
        }
    }
}

/// Greedy scan of `candidates` in order, accepting x whenever the running set
/// keeps its maximal count at most g. Starts from `start`.
pub fn greedy_extend(
    start: &[u64],
    candidates: impl IntoIterator<Item = u64>,
    m: u32,
    g: u64,
    ordered: bool,
    max_value: u64,
    limit: usize,
) -> Vec<u64> {
    let mut counter = Counter::new(m, ordered, max_value);
    let mut set: Vec<u64> = Vec::new();
    for &x in start {
        counter.add(x);
        set.push(x);
    }
    for x in candidates {
        if set.len() >= limit {
            break;
        }
        if set.contains(&x) {
            continue;
        }
        if counter.max_after(x) <= g {
            counter.add(x);
            set.push(x);
        }
    }
    set.sort_unstable();
    set
}

/// Greedy B_m[g] set in [1, N] (nondecreasing counts).
pub fn greedy_bm(n: u64, m: u32, g: u64) -> Result<IntegerSet> {
    if n < 1 || m < 1 || g < 1 {
        return Err(Error::invalid("N, m, g must be >= 1"));
    }
    check_budget(
        "greedy_bm",
        (n as u128) * (m as u128).pow(2) * (m as u128 * n as u128 + 1),
        ENUM_BUDGET * 100,
    )?;
    let el = greedy_extend(&[], 1..=n, m, g, false, n, usize::MAX);
    IntegerSet::new(el, n)
}

/// m^{1/m}(gN)^{1/m}: the largest possible B_m^*[g] subset of [N].
pub fn f_upper_bound(m: u32, g: u64, n: u64) -> f64 {
    let m = m as f64;
    m.powf(1.0 / m) * ((g as f64) * (n as f64)).powf(1.0 / m)
}

/// True when `card` is admissible under the counting bound, compared in
/// integers: card^m ≤ m·g·N.
pub fn within_counting_bound(card: usize, m: u32, g: u64, n: u64) -> bool {
    let lhs = (card as u128).checked_pow(m);
    let rhs = m as u128 * g as u128 * n as u128;
    matches!(lhs, Some(l) if l <= rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[u64]) -> IntegerSet {
        IntegerSet::new(xs.to_vec(), *xs.last().unwrap()).unwrap()
    }

    #[test]
    fn two_point_profile() {
        let p = rep_counts(&set(&[0, 1]), 2, true).unwrap();
        assert_eq!(p.counts, BTreeMap::from([(0, 1), (1, 2), (2, 1)]));
        assert_eq!(p.max_count, 2);
        assert_eq!(p.total(), 4);
    }

    #[test]
    fn singleton_profile() {
        let p = rep_counts(&set(&[7]), 3, true).unwrap();
        assert_eq!(p.counts, BTreeMap::from([(21, 1)]));
    }

    #[test]
    fn sidon_example_certificates() {
        let c = certify(&set(&[1, 2, 5, 11]), 2).unwrap();
        assert_eq!((c.g, c.g_star), (1, 2));
        assert_eq!(certify(&set(&[0, 1, 2]), 2).unwrap().g_star, 3);
        assert_eq!(certify(&set(&[0]), 4).unwrap(), BmCertificate { m: 4, g: 1, g_star: 1 });
    }

    #[test]
    fn convolution_matches_enumeration() {
        let a = [1u64, 4, 9, 10, 17, 30];
        for m in 1..=4 {
            assert_eq!(ordered_by_convolution(&a, m), ordered_by_enumeration(&a, m));
        }
    }

    #[test]
    fn budget_is_enforced() {
        let a = IntegerSet::new((0..40).collect(), 39).unwrap();
        let err = rep_counts_with_budget(&a, 3, false, 100).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn bose_chowla_small() {
        assert_eq!(bose_chowla(2, 2).unwrap().elements(), &[1, 2]);
        for (q, m) in [(3, 2), (5, 2), (7, 2), (5, 3), (3, 3)] {
            let s = bose_chowla(q, m).unwrap();
            assert_eq!(s.card() as u64, q);
            assert!(s.min() >= 1 && s.max() < q.pow(m));
            assert_eq!(certify(&s, m).unwrap().g, 1);
        }
        assert!(bose_chowla(4, 2).is_err());
    }

    #[test]
    fn gluing() {
        let s = set(&[1, 2]);
        assert_eq!(glue_translates(&s, 3, 2).unwrap().elements(), &[1, 2, 4, 5]);
        assert_eq!(glue_translates(&s, 3, 1).unwrap().elements(), s.elements());
        let g = glue_translates(&s, 3, 3).unwrap();
        assert_eq!((g.card(), g.ambient_max()), (6, 9));
        assert!(glue_translates(&set(&[0, 2]), 3, 2).is_err());
    }

    #[test]
    fn extension_examples() {
        let (e, p) = extend_by_element(&set(&[0, 3]), 2, 1).unwrap();
        assert_eq!(p, 5);
        assert_eq!(e.elements(), &[0, 1, 3]);
        assert_eq!(e.certificate(2).unwrap().g_star, 2);
        let (e, p) = extend_by_element(&set(&[0]), 2, 5).unwrap();
        assert_eq!((p, e.certificate(2).unwrap().g_star), (4, 2));
        let (e, p) = extend_by_element(&set(&[0]), 3, 1).unwrap();
        assert_eq!((p, e.certificate(3).unwrap().g_star), (6, 3));
        assert!(extend_by_element(&set(&[0, 3]), 2, 3).is_err());
    }

    #[test]
    fn greedy_small_cases() {
        assert_eq!(greedy_bm(20, 2, 1).unwrap().elements(), &[1, 2, 4, 8, 13]);
        assert_eq!(greedy_bm(2, 2, 1).unwrap().elements(), &[1, 2]);
        let s = greedy_bm(60, 3, 2).unwrap();
        assert!(certify(&s, 3).unwrap().g <= 2);
    }

    #[test]
    fn counting_bound_values() {
        assert!((f_upper_bound(2, 1, 16) - 32f64.sqrt()).abs() < 1e-12);
        assert!((f_upper_bound(2, 2, 8) - 32f64.sqrt()).abs() < 1e-12);
        assert!(3.0 <= f_upper_bound(2, 1, 8));
        assert!(within_counting_bound(5, 2, 1, 16));
        assert!(!within_counting_bound(6, 2, 1, 16));
    }

    #[test]
    fn json_shape() {
        let s = set(&[1, 2]).certified(2).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(
            j,
            r#"{"elements":[1,2],"ambient_max":2,"certificates":[{"m":2,"g":1,"g_star":2}]}"#
        );
        assert_eq!(serde_json::from_str::<IntegerSet>(&j).unwrap(), s);
    }
}
