//! The complete set of `d + 1` mutually unbiased bases for odd prime power `d`.
//!
//! Basis `0` is the computational basis. For `k = 1..=d` and `t ∈ GF(d)`,
//!
//! ```text
//! |v_t^k> = d^{-1/2} Σ_q  ω^{⊖q⊙t} · (ω^{(k-1)⊙q⊙q})^{1/2} |q>
//! ```
//!
//! where `ω = exp(2πi/p)` and `ω^g` means `ω^{g_0}` for the first digit of `g`.
//! The square root is taken as `ω^{g_0 · 2^{-1} mod p}`, which is again a
//! `p`-th root of unity. Basis `1` (the quadratic phase vanishes) is the dual,
//! Fourier-like basis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

/// `exp(2πi·g_0/p)`.
pub fn omega_power(spec: &FieldSpec, g: FieldElement) -> Result<Complex64> {
    spec.check(&g)?;
    Ok(root_of_unity(spec.p(), g.first_digit() as u64))
}

/// `exp(2πi·(g_0·2^{-1} mod p)/p)`; its square is [`omega_power`] of `g`.
pub fn half_omega_power(spec: &FieldSpec, g: FieldElement) -> Result<Complex64> {
    spec.check(&g)?;
    let p = spec.p() as u64;
    if p % 2 == 0 {
        return Err(Error::EvenCharacteristic);
    }
    let inv2 = p.div_ceil(2);
    Ok(root_of_unity(spec.p(), g.first_digit() as u64 * inv2 % p))
}

fn root_of_unity(p: u32, e: u64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (e % p as u64) as f64 / p as f64)
}

/// All `d + 1` bases stored as `(d + 1) × d` amplitude vectors of length `d`.
#[derive(Debug, Clone)]
pub struct MubTable {
    spec: FieldSpec,
    d: usize,
    amplitudes: Vec<Complex64>,
}

impl MubTable {
    pub fn build(spec: &FieldSpec) -> Result<Self> {
        build_mub(spec)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Borrowed view of `|v_t^k>`.
    ///
    /// # Panics
    /// When `k > d` or `t >= d`; use [`MubTable::basis_vector`] for a checked copy.
    pub fn vector(&self, k: usize, t: usize) -> &[Complex64] {
        assert!(k <= self.d && t < self.d, "basis index out of range");
        let start = (k * self.d + t) * self.d;
        &self.amplitudes[start..start + self.d]
    }

    /// Checked copy of `|v_t^k>`.
    pub fn basis_vector(&self, k: usize, t: usize) -> Result<Vec<Complex64>> {
        if k > self.d || t >= self.d {
            return Err(Error::BasisIndex { k, t, d: self.d });
        }
        Ok(self.vector(k, t).to_vec())
    }

    /// Overwrites one stored vector. Only useful for exercising the
    /// certification against deliberately broken tables.
    pub fn set_vector(&mut self, k: usize, t: usize, amps: &[Complex64]) -> Result<()> {
        if k > self.d || t >= self.d {
            return Err(Error::BasisIndex { k, t, d: self.d });
        }
        if amps.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, actual: amps.len() });
        }
        let start = (k * self.d + t) * self.d;
        self.amplitudes[start..start + self.d].copy_from_slice(amps);
        Ok(())
    }

    /// Worst-case deviation from the MUB conditions; see [`mub_deviation`].
    pub fn deviation(&self) -> f64 {
        mub_deviation(self)
    }
}

/// `<a|b>` with the conjugate on the left.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn build_mub(spec: &FieldSpec) -> Result<MubTable> {
    let d = spec.order();
    let p = spec.p() as u64;
    let inv2 = p.div_ceil(2);
    let roots: Vec<Complex64> = (0..p).map(|e| root_of_unity(spec.p(), e)).collect();
    let scale = 1.0 / (d as f64).sqrt();

    let mut amplitudes = vec![Complex64::new(0.0, 0.0); (d + 1) * d * d];
    for t in 0..d {
        amplitudes[t * d + t] = Complex64::new(1.0, 0.0);
    }
    let squares: Vec<usize> = (0..d).map(|q| spec.mul_idx(q, q)).collect();
    for k in 1..=d {
        // exponent of ω for the square-root factor, already halved mod p
        let half_quad: Vec<u64> = squares
            .iter()
            .map(|&qq| spec.first_digit_idx(spec.mul_idx(k - 1, qq)) as u64 * inv2 % p)
            .collect();
        for t in 0..d {
            let base = (k * d + t) * d;
            for q in 0..d {
                let lin = spec.first_digit_idx(spec.neg_idx(spec.mul_idx(q, t))) as u64;
                let e = (lin + half_quad[q]) % p;
                amplitudes[base + q] = roots[e as usize] * scale;
            }
        }
    }
    Ok(MubTable { spec: spec.clone(), d, amplitudes })
}

/// Maximum cross-basis violation `| |<v_t^k|v_s^l>| - 1/√d |` over distinct
/// bases, plus the maximum within-basis violation `|<v_t^k|v_s^k> - δ_ts|`.
pub fn mub_deviation(table: &MubTable) -> f64 {
    let d = table.d;
    let target = 1.0 / (d as f64).sqrt();
    let (cross, within) = (0..=d)
        .into_par_iter()
        .map(|k| {
            let mut cross = 0.0f64;
            let mut within = 0.0f64;
            for l in k..=d {
                for t in 0..d {
                    let a = table.vector(k, t);
                    for s in 0..d {
                        let ip = inner(a, table.vector(l, s));
                        if l == k {
                            let delta = if s == t { 1.0 } else { 0.0 };
                            within = within.max((ip - delta).norm());
                        } else {
                            cross = cross.max((ip.norm() - target).abs());
                        }
                    }
                }
            }
            (cross, within)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    cross + within
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn omega_examples() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        let f9 = FieldSpec::new(3, 2).unwrap();
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!((omega_power(&f3, f3.zero()).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((omega_power(&f3, f3.one()).unwrap() - w).norm() < 1e-15);
        assert!((omega_power(&f9, f9.element(3).unwrap()).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn half_omega_examples() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        assert!((half_omega_power(&f3, f3.zero()).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        let expect = Complex64::from_polar(1.0, 2.0 * PI * 2.0 / 3.0);
        assert!((half_omega_power(&f3, f3.one()).unwrap() - expect).norm() < 1e-15);
        for (p, m) in [(3, 2), (5, 1), (7, 2), (3, 3)] {
            let f = FieldSpec::new(p, m).unwrap();
            for g in f.elements() {
                let h = half_omega_power(&f, g).unwrap();
                assert!((h * h - omega_power(&f, g).unwrap()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn d3_vectors() {
        let t = build_mub(&FieldSpec::new(3, 1).unwrap()).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!(close(t.vector(0, 1), &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], 1e-15));
        assert!(close(t.vector(1, 0), &[c(s, 0.0); 3], 1e-15));
        // term by term: q=0 -> 1, q=1 -> ω^{-1} = ω², q=2 -> ω^{-2} = ω
        assert!(close(t.vector(1, 1), &[c(s, 0.0), w * w * s, w * s], 1e-12));
    }

    #[test]
    fn basis_vector_lookup() {
        let t = build_mub(&FieldSpec::new(3, 1).unwrap()).unwrap();
        let v = t.basis_vector(0, 2).unwrap();
        assert!(close(&v, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-15));
        assert_eq!(t.basis_vector(4, 0), Err(Error::BasisIndex { k: 4, t: 0, d: 3 }));
        assert!(t.basis_vector(0, 3).is_err());
    }

    #[test]
    fn certification_small() {
        for (p, m) in [(3, 1), (3, 2), (5, 1), (7, 1)] {
            let t = build_mub(&FieldSpec::new(p, m).unwrap()).unwrap();
            assert!(t.deviation() < 1e-10, "p={p} m={m}: {}", t.deviation());
        }
    }

    #[test]
    fn zeroed_vector_is_detected() {
        let mut t = build_mub(&FieldSpec::new(3, 1).unwrap()).unwrap();
        t.set_vector(2, 1, &[c(0.0, 0.0); 3]).unwrap();
        assert!(t.deviation() >= 1.0 / 3f64.sqrt());
    }

    #[test]
    fn bases_are_unitary() {
        let t = build_mub(&FieldSpec::new(3, 2).unwrap()).unwrap();
        let d = t.dim();
        for k in 0..=d {
            // rows of U U† for U with the basis vectors as columns
            for i in 0..d {
                for j in 0..d {
                    let s: Complex64 = (0..d).map(|v| t.vector(k, v)[i] * t.vector(k, v)[j].conj()).sum();
                    let delta = if i == j { 1.0 } else { 0.0 };
                    assert!((s - delta).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn dual_basis_expansion_reproduces_vectors() {
        let t = build_mub(&FieldSpec::new(5, 1).unwrap()).unwrap();
        let d = t.dim();
        for k in 0..=d {
            for s in 0..d {
                let v = t.vector(k, s);
                let mut acc = vec![c(0.0, 0.0); d];
                for h in 0..d {
                    let coeff = inner(t.vector(1, h), v);
                    for (a, b) in acc.iter_mut().zip(t.vector(1, h)) {
                        *a += coeff * b;
                    }
                }
                assert!(close(&acc, v, 1e-12));
            }
        }
    }
}
