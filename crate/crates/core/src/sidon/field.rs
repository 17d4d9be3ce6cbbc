//! Arithmetic in GF(q^m) for prime q, as polynomials over Z_q reduced modulo a
//! monic irreducible of degree m.

use crate::error::{Error, Result};

/// Trial division primality; inputs here are tiny.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn inv_mod(a: u64, q: u64) -> u64 {
    // q is prime, so a^(q-2) is the inverse.
    let mut r = 1u64;
    let mut b = a % q;
    let mut e = q - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % q;
        }
        b = b * b % q;
        e >>= 1;
    }
    r
}

/// Dense polynomial over Z_q, lowest degree first, no trailing zeros.
type Poly = Vec<u64>;

fn trim(mut p: Poly) -> Poly {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn poly_rem(a: &[u64], b: &[u64], q: u64) -> Poly {
    let mut r: Poly = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = inv_mod(b[db], q);
    while r.len() > db {
        let top = r.len() - 1;
        let coef = r[top] * lead_inv % q;
        if coef != 0 {
            let shift = top - db;
            for (i, &bi) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + q - coef * bi % q) % q;
            }
        }
        r.pop();
        r = trim(r);
    }
    trim(r)
}

/// Digits of `index` in base q, least significant first, padded to `len`.
fn digits(mut index: u64, q: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = index % q;
        index /= q;
    }
    out
}

fn is_irreducible(f: &[u64], q: u64) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        let count = q.pow(d as u32);
        for idx in 0..count {
            let mut g = digits(idx, q, d);
            g.push(1);
            if poly_rem(f, &g, q).is_empty() {
                return false;
            }
        }
    }
    true
}

/// The field GF(q^m). Elements are coefficient vectors of length m.
#[derive(Clone, Debug)]
pub struct Field {
    pub q: u64,
    pub m: usize,
    /// Monic modulus, lowest degree first, length m + 1.
    pub modulus: Vec<u64>,
}

impl Field {
    /// Uses the first monic irreducible of degree m in lexicographic order of
    /// its lower coefficients (read as base-q digits, constant term least
    /// significant).
    pub fn new(q: u64, m: usize) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::invalid(format!("q = {q} is not prime")));
        }
        if m < 1 {
            return Err(Error::invalid("extension degree must be >= 1"));
        }
        let count = q
            .checked_pow(m as u32)
            .ok_or_else(|| Error::invalid("q^m overflows"))?;
        for idx in 0..count {
            let mut f = digits(idx, q, m);
            f.push(1);
            if (m == 1 || f[0] != 0) && is_irreducible(&f, q) {
                return Ok(Field { q, m, modulus: f });
            }
        }
        Err(Error::Certification(format!(
            "no irreducible polynomial of degree {m} over GF({q})"
        )))
    }

    pub fn order(&self) -> u64 {
        self.q.pow(self.m as u32)
    }

    pub fn one(&self) -> Vec<u64> {
        let mut e = vec![0; self.m];
        e[0] = 1;
        e
    }

    /// The element with base-q digit expansion `index`.
    pub fn element(&self, index: u64) -> Vec<u64> {
        digits(index, self.q, self.m)
    }

    pub fn sub(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x + self.q - y) % self.q)
            .collect()
    }

    pub fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let q = self.q;
        let mut prod = vec![0u64; 2 * self.m - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % q;
            }
        }
        let mut r = poly_rem(&trim(prod), &self.modulus, q);
        r.resize(self.m, 0);
        r
    }

    pub fn pow(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut result = self.one();
        let mut base = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        result
    }

    /// True when `a` lies in the prime subfield (all non-constant coefficients vanish).
    pub fn in_prime_field(&self, a: &[u64]) -> bool {
        a[1..].iter().all(|&c| c == 0)
    }

    /// Smallest-index element of multiplicative order q^m − 1.
    pub fn primitive_element(&self) -> Result<Vec<u64>> {
        let n = self.order() - 1;
        let factors = prime_factors(n);
        let one = self.one();
        for idx in 2..self.order() {
            let a = self.element(idx);
            if factors.iter().all(|&r| self.pow(&a, n / r) != one) {
                return Ok(a);
            }
        }
        if n == 1 {
            return Ok(one);
        }
        Err(Error::Certification(format!(
            "no primitive element in GF({}^{})",
            self.q, self.m
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf4_modulus_and_generator() {
        let f = Field::new(2, 2).unwrap();
        assert_eq!(f.modulus, vec![1, 1, 1]);
        let theta = f.primitive_element().unwrap();
        assert_eq!(theta, vec![0, 1]);
        // θ² = θ + 1
        assert_eq!(f.mul(&theta, &theta), vec![1, 1]);
        assert_eq!(f.pow(&theta, 3), f.one());
    }

    #[test]
    fn multiplicative_group_is_cyclic_of_full_order() {
        for (q, m) in [(3u64, 2usize), (5, 2), (2, 3), (5, 3), (3, 3)] {
            let f = Field::new(q, m).unwrap();
            let g = f.primitive_element().unwrap();
            let n = f.order() - 1;
            let mut seen = std::collections::HashSet::new();
            let mut x = f.one();
            for _ in 0..n {
                assert!(seen.insert(x.clone()));
                x = f.mul(&x, &g);
            }
            assert_eq!(x, f.one());
        }
    }

    #[test]
    fn rejects_composite() {
        assert!(Field::new(4, 2).is_err());
        assert!(Field::new(1, 2).is_err());
    }

    #[test]
    fn factorization() {
        assert_eq!(prime_factors(124), vec![2, 31]);
        assert_eq!(prime_factors(48), vec![2, 3]);
        assert!(is_prime(31) && !is_prime(33));
    }
}
