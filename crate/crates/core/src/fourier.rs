//! Discrete Fourier transforms used as classifier inputs.
//!
//! Both transforms are direct summations; `N = 400` makes an FFT pointless
//! and the non-uniform transform has no fast path anyway.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_finite(samples: &[f64]) -> Result<()> {
    if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("sample {i} is not finite")));
    }
    Ok(())
}

/// `X_k = Σ_n x_n e^{−2πikn/N}` for `k = 0..N`.
pub fn dft(samples: &[f64]) -> Result<Vec<Complex64>> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::Domain("DFT of an empty signal".into()));
    }
    check_finite(samples)?;
    // e^{−2πim/N}; the exponent kn is reduced mod N exactly in integers
    let twiddle: Vec<Complex64> = (0..n)
        .map(|m| {
            let (s, c) = (-TAU * m as f64 / n as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect();
    Ok((0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for &x in samples {
                acc += twiddle[idx] * x;
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            acc
        })
        .collect())
}

/// Inverse of [`dft`]: `x_n = (1/N) Σ_k X_k e^{2πikn/N}`.
pub fn inverse_dft(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    (0..n)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &x) in coeffs.iter().enumerate() {
                let m = (k * j) % n;
                let (s, c) = (TAU * m as f64 / n as f64).sin_cos();
                acc += x * Complex64::new(c, s);
            }
            acc / n as f64
        })
        .collect()
}

/// `2π · frac(k p)` with the product's rounding error folded back in.
#[inline]
fn reduced_phase(k: f64, p: f64) -> f64 {
    let prod = k * p;
    let err = k.mul_add(p, -prod);
    TAU * ((prod - prod.floor()) + err)
}

/// Grid indices `n` with `p_i == n / d` exactly in floating point, if every
/// position is of that form.
fn grid_indices(positions: &[f64], d: usize) -> Option<Vec<usize>> {
    positions
        .iter()
        .map(|&p| {
            let n = (p * d as f64).round() as usize;
            (n < d && index_position(n, d) == p).then_some(n)
        })
        .collect()
}

/// `X_k = Σ_j x_j e^{−2πik n_j/N}` with the exponent reduced mod `N` in
/// integers.
fn grid_sum(samples: &[f64], indices: &[usize], n_full: usize, n_out: usize) -> Vec<Complex64> {
    let twiddle: Vec<Complex64> = (0..n_full)
        .map(|m| {
            let (s, c) = (-TAU * m as f64 / n_full as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect();
    (0..n_out)
        .map(|k| {
            let kr = k % n_full;
            let mut acc = Complex64::new(0.0, 0.0);
            for (&x, &n) in samples.iter().zip(indices) {
                acc += twiddle[(kr * n) % n_full] * x;
            }
            acc
        })
        .collect()
}

fn check_positions(positions: &[f64]) -> Result<()> {
    if let Some(i) = positions.iter().position(|p| !(0.0..1.0).contains(p)) {
        return Err(Error::Domain(format!(
            "position {i} = {} outside [0, 1)",
            positions[i]
        )));
    }
    if let Some(i) = positions.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!(
            "positions must be strictly increasing (index {})",
            i + 1
        )));
    }
    Ok(())
}

/// `X_k = Σ_n x_n e^{−2πik p_n}` for `k = 0..M`, positions in `[0, 1)`.
///
/// Positions that are exactly the doubles nearest `n/M` are treated as the
/// rationals `n/M`, so a uniform grid reproduces [`dft`] to rounding.
pub fn nudft(samples: &[f64], positions: &[f64]) -> Result<Vec<Complex64>> {
    let m = samples.len();
    if m == 0 {
        return Err(Error::Domain("NUDFT of an empty signal".into()));
    }
    if positions.len() != m {
        return Err(Error::Domain(format!(
            "{} samples but {} positions",
            m,
            positions.len()
        )));
    }
    check_finite(samples)?;
    check_positions(positions)?;
    if let Some(idx) = grid_indices(positions, m) {
        return Ok(grid_sum(samples, &idx, m, m));
    }
    Ok((0..m)
        .map(|k| {
            let kf = k as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for (&x, &p) in samples.iter().zip(positions) {
                let (s, c) = reduced_phase(kf, p).sin_cos();
                acc += Complex64::new(c, -s) * x;
            }
            acc
        })
        .collect())
}

/// [`nudft`] at positions `n_j / n_full` given by grid indices.
pub fn nudft_on_grid(samples: &[f64], indices: &[usize], n_full: usize) -> Result<Vec<Complex64>> {
    if samples.is_empty() {
        return Err(Error::Domain("NUDFT of an empty signal".into()));
    }
    if indices.len() != samples.len() {
        return Err(Error::Domain(format!(
            "{} samples but {} indices",
            samples.len(),
            indices.len()
        )));
    }
    check_finite(samples)?;
    if let Some(&n) = indices.iter().find(|&&n| n >= n_full) {
        return Err(Error::Domain(format!("index {n} outside a {n_full}-point grid")));
    }
    if let Some(i) = indices.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!(
            "indices must be strictly increasing (index {})",
            i + 1
        )));
    }
    Ok(grid_sum(samples, indices, n_full, samples.len()))
}

/// Network input: `[Re X₀ … Re X_{M−1} | Im X₀ … Im X_{M−1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

pub fn to_features(coeffs: &[Complex64]) -> FeatureVector {
    let mut v = Vec::with_capacity(2 * coeffs.len());
    v.extend(coeffs.iter().map(|c| c.re));
    v.extend(coeffs.iter().map(|c| c.im));
    FeatureVector(v)
}

/// Maps sample times on the uniform grid `t_min + n (t_max − t_min)/N` to
/// `p = n / N`. Times off that grid are rejected.
pub fn position_scaling(selected: &[f64], t_min: f64, t_max: f64, n_full: usize) -> Result<Vec<f64>> {
    let span = t_max - t_min;
    if !(span > 0.0) || n_full == 0 {
        return Err(Error::Domain(format!(
            "invalid window [{t_min}, {t_max}] with {n_full} points"
        )));
    }
    selected
        .iter()
        .map(|&t| {
            if !(t >= t_min && t < t_max) {
                return Err(Error::Domain(format!(
                    "time {t} outside [{t_min}, {t_max})"
                )));
            }
            let n = ((t - t_min) / span * n_full as f64).round();
            let on_grid = t_min + span * n / n_full as f64;
            if (on_grid - t).abs() > 1e-9 * span || n as usize >= n_full {
                return Err(Error::Domain(format!("time {t} is not on the sampling grid")));
            }
            Ok(index_position(n as usize, n_full))
        })
        .collect()
}

/// Position of grid index `n` out of `n_full`.
#[inline]
pub fn index_position(n: usize, n_full: usize) -> f64 {
    n as f64 / n_full as f64
}

/// DFT features of a uniformly sampled trajectory.
pub fn dft_features(samples: &[f64]) -> Result<FeatureVector> {
    Ok(to_features(&dft(samples)?))
}

/// NUDFT features of the samples at grid indices `indices` (ascending) out
/// of an `n_full`-point uniform grid.
pub fn nudft_features(samples: &[f64], indices: &[usize], n_full: usize) -> Result<FeatureVector> {
    let picked: Vec<f64> = indices
        .iter()
        .map(|&i| {
            samples
                .get(i)
                .copied()
                .ok_or_else(|| Error::Domain(format!("index {i} outside a {}-point trajectory", samples.len())))
        })
        .collect::<Result<_>>()?;
    Ok(to_features(&nudft_on_grid(&picked, indices, n_full)?))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn max_abs(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn constant_and_impulse() {
        let c = 0.7;
        let x = dft(&[c; 16]).unwrap();
        assert!((x[0].re - 16.0 * c).abs() < 1e-12 && x[0].im.abs() < 1e-12);
        assert!(x[1..].iter().all(|v| v.norm() < 1e-10 * 16.0 * c));
        let mut imp = vec![0.0; 9];
        imp[0] = 1.0;
        assert!(dft(&imp).unwrap().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        assert!(dft(&[]).is_err());
        assert!(dft(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn nudft_reductions() {
        let x = nudft(&[0.4], &[0.0]).unwrap();
        assert_eq!(x, vec![Complex64::new(0.4, 0.0)]);
        // direct summation in a different order, with the phase built from
        // the exact rational k·n/M
        let samples = [0.3, -1.2, 0.8];
        let pos = [0.1, 0.45, 0.9];
        let got = nudft(&samples, &pos).unwrap();
        for (k, g) in got.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in (0..3).rev() {
                let ang = -TAU * (k as f64 * pos[n]);
                acc += Complex64::from_polar(samples[n], ang);
            }
            assert!((g - acc).norm() < 1e-13);
        }
    }

    #[test]
    fn nudft_rejects_bad_positions() {
        assert!(nudft(&[1.0, 2.0], &[0.5, 0.2]).is_err());
        assert!(nudft(&[1.0, 2.0], &[0.5, 1.0]).is_err());
        assert!(nudft(&[1.0, 2.0], &[-0.1, 0.2]).is_err());
        assert!(nudft(&[1.0], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn feature_layout() {
        assert_eq!(to_features(&[Complex64::new(1.0, 2.0)]).0, vec![1.0, 2.0]);
        let f = to_features(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]);
        assert_eq!(f.0, vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn position_scaling_examples() {
        let grid = crate::timeseries::uniform_grid(0.0, 10.0, 400);
        let p = position_scaling(&grid, 0.0, 10.0, 400).unwrap();
        for (n, &v) in p.iter().enumerate() {
            assert_eq!(v, n as f64 / 400.0);
        }
        let every_other: Vec<f64> = grid.iter().step_by(2).copied().collect();
        let p = position_scaling(&every_other, 0.0, 10.0, 400).unwrap();
        assert_eq!(p[0], 0.0);
        assert_eq!(p[1], 2.0 / 400.0);
        assert_eq!(p[2], 4.0 / 400.0);
        assert!(position_scaling(&[10.0], 0.0, 10.0, 400).is_err());
        assert!(position_scaling(&[0.0101], 0.0, 10.0, 400).is_err());
    }

    #[test]
    fn grid_and_generic_paths_agree() {
        let x: Vec<f64> = (0..50).map(|i| ((i * 7 % 13) as f64 / 13.0) - 0.4).collect();
        let idx: Vec<usize> = (0..50).map(|i| 3 * i + (i % 2)).collect();
        let exact = nudft_on_grid(&x, &idx, 400).unwrap();
        // multiples of 1/400 are not on the 1/50 grid, so this takes the generic path
        let pos: Vec<f64> = idx.iter().map(|&n| index_position(n, 400)).collect();
        assert!(grid_indices(&pos, 50).is_none());
        let generic = nudft(&x, &pos).unwrap();
        assert!(max_abs(&exact, &generic) < 1e-11, "{}", max_abs(&exact, &generic));
        assert!(nudft_on_grid(&x[..2], &[3, 3], 400).is_err());
        assert!(nudft_on_grid(&x[..1], &[400], 400).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_and_symmetries(x in prop::collection::vec(-1.0f64..1.0, 1..64)) {
            let n = x.len();
            let coeffs = dft(&x).unwrap();
            let back = inverse_dft(&coeffs);
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b.re).abs() < 1e-10 && b.im.abs() < 1e-10);
            }
            for k in 1..n {
                prop_assert!((coeffs[n - k] - coeffs[k].conj()).norm() < 1e-10);
            }
            let energy: f64 = x.iter().map(|v| v * v).sum();
            let spec: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / n as f64;
            prop_assert!((energy - spec).abs() <= 1e-9 * energy.max(1e-300));
            prop_assert_eq!(to_features(&coeffs).len(), 2 * n);
        }

        #[test]
        fn nudft_on_uniform_grid_is_dft(x in prop::collection::vec(-1.0f64..1.0, 1..401)) {
            let n = x.len();
            let pos: Vec<f64> = (0..n).map(|i| index_position(i, n)).collect();
            let a = nudft(&x, &pos).unwrap();
            let b = dft(&x).unwrap();
            prop_assert!(max_abs(&a, &b) < 1e-12, "{}", max_abs(&a, &b));
        }

        #[test]
        fn full_index_set_reproduces_dft(x in prop::collection::vec(-1.0f64..1.0, 400)) {
            let idx: Vec<usize> = (0..400).collect();
            let a = nudft_features(&x, &idx, 400).unwrap();
            let b = dft_features(&x).unwrap();
            let d = a.0.iter().zip(&b.0).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
            prop_assert!(d < 1e-12, "{}", d);
        }
    }
}
