//! Arithmetic in the Galois field `GF(p^m)` for odd primes `p`.
//!
//! Elements are identified with the integers `0..d` through their base-`p`
//! digit expansion `g = g_0 + g_1 p + ... + g_{m-1} p^{m-1}`, where the digit
//! tuple holds the coefficients of the element's polynomial representative.
//! Addition is digit-wise mod `p`; multiplication is polynomial multiplication
//! reduced by a fixed monic irreducible of degree `m`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported extension degree.
pub const MAX_DEGREE: usize = 12;

/// Largest supported field order.
pub const MAX_ORDER: usize = 1 << 20;

/// A concrete finite field `GF(p^m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    p: u32,
    m: u32,
    d: usize,
    /// `m + 1` coefficients, constant term first, monic.
    irreducible: Vec<u32>,
}

/// An element of `GF(p^m)`, held both as its integer index and its digit tuple.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    index: usize,
    len: u8,
    digits: [u32; MAX_DEGREE],
}

impl FieldElement {
    pub fn index(&self) -> usize {
        self.index
    }

    /// Base-`p` digits `(g_0, ..., g_{m-1})`, lowest first.
    pub fn digits(&self) -> &[u32] {
        &self.digits[..self.len as usize]
    }

    /// The constant-term digit `g_0`.
    pub fn first_digit(&self) -> u32 {
        self.digits[0]
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.index, self.digits())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut i = 2u64;
    while i * i <= n {
        if n % i == 0 {
            return false;
        }
        i += 1;
    }
    true
}

/// Splits `n` into `(p, m)` with `n = p^m` by trial factorization.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    if n < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= n && n % p != 0 {
        p += 1;
    }
    if n % p != 0 {
        // no factor up to sqrt(n): n itself is prime
        return Some((n, 1));
    }
    let mut rest = n;
    let mut m = 0;
    while rest % p == 0 {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

/// Like [`prime_power`], but rejects powers of two.
pub fn odd_prime_power(n: u64) -> Result<(u32, u32)> {
    match prime_power(n) {
        Some((p, m)) if p != 2 && p <= u32::MAX as u64 => Ok((p as u32, m)),
        _ => Err(Error::NotOddPrimePower(n)),
    }
}

/// Remainder of `num` modulo the monic polynomial `den` over `GF(p)`.
/// Coefficients are lowest degree first.
fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let p64 = p as u64;
    let dm = den.len() - 1;
    let mut r: Vec<u64> = num.iter().map(|&c| c as u64).collect();
    if r.len() <= dm {
        return num.to_vec();
    }
    for i in (dm..r.len()).rev() {
        let c = r[i] % p64;
        if c == 0 {
            continue;
        }
        for (j, &f) in den.iter().enumerate() {
            let idx = i - dm + j;
            r[idx] = (r[idx] + (p64 - c) * f as u64) % p64;
        }
    }
    r.truncate(dm);
    r.into_iter().map(|c| (c % p64) as u32).collect()
}

fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let m = poly.len() - 1;
    // every reducible polynomial has a monic factor of degree <= m/2
    for deg in 1..=m / 2 {
        let count = (p as u64).pow(deg as u32);
        for n in 0..count {
            let mut factor = digits_of(n as usize, p, deg);
            factor.push(1);
            if poly_rem(poly, &factor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn digits_of(mut n: usize, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((n % p as usize) as u32);
        n /= p as usize;
    }
    out
}

/// The monic irreducible polynomial of degree `m` over `GF(p)` whose
/// non-leading coefficients, read as base-`p` digits (constant term lowest),
/// form the smallest integer. Returns `m + 1` coefficients, constant term first.
pub fn find_irreducible(p: u32, m: u32) -> Result<Vec<u32>> {
    check_prime(p)?;
    if m < 2 {
        return Err(Error::InvalidDegree(m));
    }
    let count = (p as u64)
        .checked_pow(m)
        .filter(|&c| c <= MAX_ORDER as u64)
        .ok_or(Error::FieldTooLarge { p, m, max: MAX_ORDER })?;
    for n in 0..count {
        let mut poly = digits_of(n as usize, p, m as usize);
        poly.push(1);
        if is_irreducible(&poly, p) {
            return Ok(poly);
        }
    }
    unreachable!("irreducible polynomials of every degree exist over GF(p)")
}

fn check_prime(p: u32) -> Result<()> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p));
    }
    if p == 2 {
        return Err(Error::EvenCharacteristic);
    }
    Ok(())
}

impl FieldSpec {
    /// Builds `GF(p^m)` for an odd prime `p`. For `m = 1` the reduction is
    /// plain mod `p` and the stored polynomial is `x`.
    pub fn new(p: u32, m: u32) -> Result<Self> {
        check_prime(p)?;
        if m < 1 {
            return Err(Error::InvalidDegree(m));
        }
        if m as usize > MAX_DEGREE {
            return Err(Error::FieldTooLarge { p, m, max: MAX_ORDER });
        }
        let d = (p as u64)
            .checked_pow(m)
            .filter(|&d| d <= MAX_ORDER as u64)
            .ok_or(Error::FieldTooLarge { p, m, max: MAX_ORDER })? as usize;
        let irreducible = if m == 1 {
            vec![0, 1]
        } else {
            find_irreducible(p, m)?
        };
        Ok(FieldSpec { p, m, d, irreducible })
    }

    /// Builds the field of order `d`, which must be an odd prime power.
    pub fn with_order(d: usize) -> Result<Self> {
        let (p, m) = odd_prime_power(d as u64)?;
        Self::new(p, m)
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Field order `d = p^m`.
    pub fn order(&self) -> usize {
        self.d
    }

    pub fn irreducible(&self) -> &[u32] {
        &self.irreducible
    }

    /// Decodes an integer index into an element.
    pub fn element(&self, index: usize) -> Result<FieldElement> {
        if index >= self.d {
            return Err(Error::ElementOutOfRange { index, order: self.d });
        }
        Ok(self.decode(index))
    }

    fn decode(&self, index: usize) -> FieldElement {
        let mut digits = [0u32; MAX_DEGREE];
        let mut n = index;
        for slot in digits.iter_mut().take(self.m as usize) {
            *slot = (n % self.p as usize) as u32;
            n /= self.p as usize;
        }
        FieldElement { index, len: self.m as u8, digits }
    }

    /// Builds an element from its digit tuple.
    pub fn from_digits(&self, digits: &[u32]) -> Result<FieldElement> {
        if digits.len() != self.m as usize || digits.iter().any(|&g| g >= self.p) {
            return Err(Error::ForeignElement);
        }
        let index = digits
            .iter()
            .rev()
            .fold(0usize, |acc, &g| acc * self.p as usize + g as usize);
        Ok(self.decode(index))
    }

    pub fn zero(&self) -> FieldElement {
        self.decode(0)
    }

    pub fn one(&self) -> FieldElement {
        self.decode(1)
    }

    /// Iterates over all elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.d).map(|i| self.decode(i))
    }

    pub(crate) fn check(&self, a: &FieldElement) -> Result<()> {
        if a.index >= self.d {
            return Err(Error::ElementOutOfRange { index: a.index, order: self.d });
        }
        if a.len as u32 != self.m || a.digits() != self.decode(a.index).digits() {
            return Err(Error::ForeignElement);
        }
        Ok(())
    }

    fn encode(&self, digits: &[u32]) -> FieldElement {
        let mut out = [0u32; MAX_DEGREE];
        out[..digits.len()].copy_from_slice(digits);
        let index = digits
            .iter()
            .rev()
            .fold(0usize, |acc, &g| acc * self.p as usize + g as usize);
        FieldElement { index, len: self.m as u8, digits: out }
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(&a)?;
        self.check(&b)?;
        Ok(self.add_unchecked(a, b))
    }

    fn add_unchecked(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let m = self.m as usize;
        let mut sum = [0u32; MAX_DEGREE];
        for n in 0..m {
            sum[n] = (a.digits[n] + b.digits[n]) % self.p;
        }
        self.encode(&sum[..m])
    }

    pub fn neg(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(&a)?;
        Ok(self.neg_unchecked(a))
    }

    fn neg_unchecked(&self, a: FieldElement) -> FieldElement {
        let m = self.m as usize;
        let mut out = [0u32; MAX_DEGREE];
        for n in 0..m {
            out[n] = (self.p - a.digits[n]) % self.p;
        }
        self.encode(&out[..m])
    }

    /// `a ⊖ b`.
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(&a)?;
        self.check(&b)?;
        Ok(self.add_unchecked(a, self.neg_unchecked(b)))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement> {
        self.check(&a)?;
        self.check(&b)?;
        Ok(self.mul_unchecked(a, b))
    }

    fn mul_unchecked(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let m = self.m as usize;
        let p = self.p as u64;
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..m {
            if a.digits[i] == 0 {
                continue;
            }
            for j in 0..m {
                prod[i + j] = (prod[i + j] + a.digits[i] as u64 * b.digits[j] as u64) % p;
            }
        }
        // x^m = -(f_0 + f_1 x + ... + f_{m-1} x^{m-1})
        for i in (m..2 * m - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..m {
                let f = self.irreducible[j] as u64;
                prod[i - m + j] = (prod[i - m + j] + (p - c) * f) % p;
            }
        }
        let mut out = [0u32; MAX_DEGREE];
        for n in 0..m {
            out[n] = prod[n] as u32;
        }
        self.encode(&out[..m])
    }

    pub fn pow(&self, a: FieldElement, mut e: u64) -> Result<FieldElement> {
        self.check(&a)?;
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_unchecked(acc, base);
            }
            base = self.mul_unchecked(base, base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Multiplicative inverse, computed as `a^(d-2)`.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(&a)?;
        if a.index == 0 {
            return Err(Error::ZeroInverse);
        }
        self.pow(a, self.d as u64 - 2)
    }

    // Index-level shorthands for table construction; callers guarantee range.

    pub(crate) fn add_idx(&self, a: usize, b: usize) -> usize {
        self.add_unchecked(self.decode(a), self.decode(b)).index
    }

    pub(crate) fn neg_idx(&self, a: usize) -> usize {
        self.neg_unchecked(self.decode(a)).index
    }

    pub(crate) fn sub_idx(&self, a: usize, b: usize) -> usize {
        self.add_idx(a, self.neg_idx(b))
    }

    pub(crate) fn mul_idx(&self, a: usize, b: usize) -> usize {
        self.mul_unchecked(self.decode(a), self.decode(b)).index
    }

    pub(crate) fn first_digit_idx(&self, a: usize) -> u32 {
        (a % self.p as usize) as u32
    }

    /// Full `d × d` addition table, entry `[a][b] = a ⊕ b`.
    pub fn addition_table(&self) -> Vec<Vec<usize>> {
        (0..self.d)
            .map(|a| (0..self.d).map(|b| self.add_idx(a, b)).collect())
            .collect()
    }

    /// Full `d × d` multiplication table, entry `[a][b] = a ⊙ b`.
    pub fn multiplication_table(&self) -> Vec<Vec<usize>> {
        (0..self.d)
            .map(|a| (0..self.d).map(|b| self.mul_idx(a, b)).collect())
            .collect()
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.m)?;
        if self.m > 1 {
            let terms: Vec<String> = self
                .irreducible
                .iter()
                .enumerate()
                .rev()
                .filter(|(_, &c)| c != 0)
                .map(|(i, &c)| match (i, c) {
                    (0, c) => c.to_string(),
                    (1, 1) => "x".into(),
                    (1, c) => format!("{c}x"),
                    (i, 1) => format!("x^{i}"),
                    (i, c) => format!("{c}x^{i}"),
                })
                .collect();
            write!(f, " mod {}", terms.join(" + "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(f: &FieldSpec, i: usize) -> FieldElement {
        f.element(i).unwrap()
    }

    // Brute-force irreducibility scan, independent of poly_rem: a monic
    // polynomial of degree 2 or 3 is irreducible iff it has no root.
    fn rootless_scan(p: u32, m: u32) -> Vec<u32> {
        let count = (p as usize).pow(m);
        for n in 0..count {
            let coeffs = digits_of(n, p, m as usize);
            let has_root = (0..p as u64).any(|x| {
                let mut v = x.pow(m);
                for (i, &c) in coeffs.iter().enumerate() {
                    v += c as u64 * x.pow(i as u32);
                }
                v % p as u64 == 0
            });
            if !has_root {
                let mut out = coeffs;
                out.push(1);
                return out;
            }
        }
        unreachable!()
    }

    #[test]
    fn make_field_prime() {
        let f = FieldSpec::new(3, 1).unwrap();
        assert_eq!(f.order(), 3);
        assert_eq!(f.irreducible(), &[0, 1]);
    }

    #[test]
    fn make_field_gf9_polynomial() {
        let f = FieldSpec::new(3, 2).unwrap();
        assert_eq!(f.irreducible(), &[1, 0, 1]);
        assert_eq!(f.to_string(), "GF(3^2) mod x^2 + 1");
    }

    #[test]
    fn make_field_errors() {
        assert_eq!(FieldSpec::new(4, 1), Err(Error::NotPrime(4)));
        assert_eq!(FieldSpec::new(2, 3), Err(Error::EvenCharacteristic));
        assert_eq!(FieldSpec::new(3, 0), Err(Error::InvalidDegree(0)));
        assert!(matches!(FieldSpec::new(3, 40), Err(Error::FieldTooLarge { .. })));
    }

    #[test]
    fn irreducible_matches_root_scan() {
        for (p, m) in [(3, 2), (3, 3), (5, 2), (7, 2), (5, 3), (11, 2)] {
            assert_eq!(find_irreducible(p, m).unwrap(), rootless_scan(p, m), "p={p} m={m}");
        }
        assert_eq!(find_irreducible(3, 2).unwrap(), vec![1, 0, 1]);
        assert_eq!(find_irreducible(5, 2).unwrap(), vec![2, 0, 1]);
        assert_eq!(find_irreducible(3, 3).unwrap(), vec![1, 2, 0, 1]);
    }

    #[test]
    fn irreducible_degree_four_has_no_quadratic_factor() {
        // x^4 + 1 over GF(3) has no root but factors as (x^2+x+2)(x^2+2x+2)
        assert!(!is_irreducible(&[1, 0, 0, 0, 1], 3));
        let poly = find_irreducible(3, 4).unwrap();
        assert_eq!(poly.len(), 5);
        let f = FieldSpec::new(3, 4).unwrap();
        let g = el(&f, 3);
        // the multiplicative group is cyclic of order 80
        assert_eq!(f.pow(g, 80).unwrap(), f.one());
    }

    #[test]
    fn addition_examples() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        assert_eq!(f3.add(el(&f3, 1), el(&f3, 2)).unwrap().index(), 0);
        let f9 = FieldSpec::new(3, 2).unwrap();
        let s = f9.add(el(&f9, 4), el(&f9, 4)).unwrap();
        assert_eq!(s.index(), 8);
        assert_eq!(s.digits(), &[2, 2]);
        for a in f9.elements() {
            assert_eq!(f9.add(f9.zero(), a).unwrap(), a);
        }
    }

    #[test]
    fn negation_examples() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        assert_eq!(f3.neg(el(&f3, 1)).unwrap().index(), 2);
        assert_eq!(f3.neg(el(&f3, 0)).unwrap().index(), 0);
        let f9 = FieldSpec::new(3, 2).unwrap();
        let n = f9.neg(el(&f9, 5)).unwrap();
        assert_eq!(n.index(), 7);
        assert_eq!(n.digits(), &[1, 2]);
        for a in f9.elements() {
            assert_eq!(f9.add(a, f9.neg(a).unwrap()).unwrap(), f9.zero());
        }
    }

    #[test]
    fn multiplication_examples() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        assert_eq!(f3.mul(el(&f3, 2), el(&f3, 2)).unwrap().index(), 1);
        let f9 = FieldSpec::new(3, 2).unwrap();
        assert_eq!(f9.mul(el(&f9, 3), el(&f9, 3)).unwrap().index(), 2);
        for a in f9.elements() {
            assert_eq!(f9.mul(f9.one(), a).unwrap(), a);
        }
    }

    #[test]
    fn inverse_examples() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        assert_eq!(f3.inv(el(&f3, 2)).unwrap().index(), 2);
        let f9 = FieldSpec::new(3, 2).unwrap();
        assert_eq!(f9.inv(el(&f9, 3)).unwrap().index(), 6);
        assert_eq!(f9.inv(f9.zero()), Err(Error::ZeroInverse));
        // exhaustive search oracle
        for a in f9.elements().skip(1) {
            let found = f9
                .elements()
                .find(|&b| f9.mul(a, b).unwrap() == f9.one())
                .unwrap();
            assert_eq!(f9.inv(a).unwrap(), found);
        }
    }

    #[test]
    fn out_of_range_and_foreign_elements() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        let f9 = FieldSpec::new(3, 2).unwrap();
        let f5 = FieldSpec::new(5, 1).unwrap();
        assert!(matches!(f3.element(3), Err(Error::ElementOutOfRange { .. })));
        assert!(matches!(f3.add(el(&f9, 7), f3.one()), Err(Error::ElementOutOfRange { .. })));
        assert_eq!(f3.add(el(&f9, 1), f3.one()), Err(Error::ForeignElement));
        assert_eq!(f5.from_digits(&[1, 1]), Err(Error::ForeignElement));
    }

    #[test]
    fn codec_round_trip() {
        for (p, m) in [(3, 1), (3, 2), (3, 3), (5, 2), (7, 2)] {
            let f = FieldSpec::new(p, m).unwrap();
            for i in 0..f.order() {
                let e = el(&f, i);
                let index: usize = e
                    .digits()
                    .iter()
                    .enumerate()
                    .map(|(n, &g)| g as usize * (p as usize).pow(n as u32))
                    .sum();
                assert_eq!(index, i);
                assert_eq!(f.from_digits(e.digits()).unwrap(), e);
            }
        }
    }

    #[test]
    fn prime_power_factorization() {
        assert_eq!(prime_power(49), Some((7, 2)));
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(13), Some((13, 1)));
        assert_eq!(prime_power(15), None);
        assert_eq!(prime_power(1), None);
        assert_eq!(odd_prime_power(8), Err(Error::NotOddPrimePower(8)));
        assert_eq!(odd_prime_power(25), Ok((5, 2)));
    }
}
