//! Uniform frequency grids, their DFT-conjugate time grids, and the quadrature
//! used for every spectral integral in the crate.
//!
//! A [`FrequencyGrid`] is a midpoint grid `ω_i = ω_min + (i + 1/2)·Δω`; each
//! bin carries weight `Δω`. The conjugate [`TimeGrid`] has spacing
//! `Δt = 2π / (N·Δω)` and points `t_k = (k − ⌊N/2⌋)·Δt`, so the discrete
//! Fourier transform between the two is unitary with respect to the
//! quadrature weights. That unitarity is what turns the continuum identity
//! resolutions of the time and energy+time measurements into exact discrete
//! identities.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Relative tolerance used to decide whether a frequency or time sits on a lattice point.
pub const LATTICE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    omega_min: f64,
    delta_omega: f64,
    n_points: usize,
}

impl FrequencyGrid {
    /// Midpoint grid with `n_points` bins covering `[omega_min, omega_max]`.
    pub fn new(omega_min: f64, omega_max: f64, n_points: usize) -> Result<Self> {
        if !(omega_min >= 0.0) {
            return Err(Error::NegativeFrequency { omega_min });
        }
        if n_points < 2 {
            return Err(Error::TooFewPoints { n_points });
        }
        if !(omega_max > omega_min) || !omega_max.is_finite() {
            return Err(Error::EmptyInterval {
                omega_min,
                omega_max,
            });
        }
        Ok(Self {
            omega_min,
            delta_omega: (omega_max - omega_min) / n_points as f64,
            n_points,
        })
    }

    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_min + self.delta_omega * self.n_points as f64
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        self.omega_min + (i as f64 + 0.5) * self.delta_omega
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Total quadrature weight, `N·Δω`.
    pub fn total_weight(&self) -> f64 {
        self.delta_omega * self.n_points as f64
    }

    /// Fractional bin index of `omega` (bin centers sit at integers).
    pub fn fractional_index(&self, omega: f64) -> f64 {
        (omega - self.omega_min) / self.delta_omega - 0.5
    }

    /// Index of the bin centered on `omega`, if `omega` is a grid point.
    pub fn index_of(&self, omega: f64) -> Option<usize> {
        let x = self.fractional_index(omega);
        let r = x.round();
        if (x - r).abs() <= LATTICE_TOLERANCE && r >= 0.0 && (r as usize) < self.n_points {
            Some(r as usize)
        } else {
            None
        }
    }

    /// Integer index shift `s` with `other.point(i) == self.point(i + s)`,
    /// when both grids share the spacing and their lattices coincide.
    pub fn lattice_offset(&self, other: &FrequencyGrid) -> Option<isize> {
        if (self.delta_omega - other.delta_omega).abs() > LATTICE_TOLERANCE * self.delta_omega {
            return None;
        }
        let shift = (other.omega_min - self.omega_min) / self.delta_omega;
        let r = shift.round();
        ((shift - r).abs() <= LATTICE_TOLERANCE).then_some(r as isize)
    }

    pub fn conjugate_time_grid(&self) -> TimeGrid {
        TimeGrid {
            n_points: self.n_points,
            delta_t: 2.0 * PI / (self.n_points as f64 * self.delta_omega),
        }
    }

    /// Probability mass of a normal distribution `N(center, std²)` that falls
    /// outside `[omega_min, omega_max]`.
    pub fn gaussian_tail_mass(&self, center: f64, std: f64) -> f64 {
        let s = std * std::f64::consts::SQRT_2;
        0.5 * erfc((center - self.omega_min) / s) + 0.5 * erfc((self.omega_max() - center) / s)
    }
}

impl fmt::Display for FrequencyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}] rad/s, {} points, dω = {}",
            self.omega_min,
            self.omega_max(),
            self.n_points,
            self.delta_omega
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    n_points: usize,
    delta_t: f64,
}

impl TimeGrid {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn delta_t(&self) -> f64 {
        self.delta_t
    }

    /// Index of the `t = 0` sample.
    pub fn center_index(&self) -> usize {
        self.n_points / 2
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        (k as f64 - self.center_index() as f64) * self.delta_t
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    /// Length of one DFT period, `N·Δt = 2π/Δω`.
    pub fn span(&self) -> f64 {
        self.delta_t * self.n_points as f64
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = t / self.delta_t + self.center_index() as f64;
        let r = x.round();
        if (x - r).abs() <= LATTICE_TOLERANCE && r >= 0.0 && (r as usize) < self.n_points {
            Some(r as usize)
        } else {
            None
        }
    }
}

/// Quadrature inner product `⟨a|b⟩ = Σ conj(a_i)·b_i·Δω`.
pub fn inner_product(a: &[Complex64], b: &[Complex64], grid: &FrequencyGrid) -> Result<Complex64> {
    let n = grid.n_points();
    for len in [a.len(), b.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    let sum: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    Ok(sum * grid.delta_omega())
}

/// Squared quadrature norm `Σ |a_i|²·Δω`.
pub fn norm_sqr(a: &[Complex64], grid: &FrequencyGrid) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>() * grid.delta_omega()
}

/// Phased discrete Fourier sums between a frequency grid and its conjugate time grid.
///
/// The core primitive is [`Fourier::phased_sum`], which evaluates
/// `Σ_m v_m·exp(−i(ω_base + m·Δω)·t_k)` for every `t_k` with one FFT. Any
/// arithmetic progression of frequencies with spacing `Δω` and at most `N`
/// terms (a full grid, or a zero-padded diagonal of the two-photon lattice)
/// goes through it.
#[derive(Clone)]
pub struct Fourier {
    grid: FrequencyGrid,
    time: TimeGrid,
    fft: Arc<dyn Fft<f64>>,
    pre: Vec<Complex64>,
}

impl fmt::Debug for Fourier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fourier")
            .field("grid", &self.grid)
            .field("time", &self.time)
            .finish()
    }
}

impl Fourier {
    pub fn new(grid: &FrequencyGrid) -> Self {
        let n = grid.n_points();
        let time = grid.conjugate_time_grid();
        let fft = FftPlanner::new().plan_fft_forward(n);
        let h = time.center_index() as f64;
        let pre = (0..n)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * (m as f64) * h / n as f64))
            .collect();
        Self {
            grid: *grid,
            time,
            fft,
            pre,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time
    }

    /// `out[k] = Σ_m values[m]·exp(−i(base_omega + m·Δω)·t_k)`, `values.len() ≤ N`.
    pub fn phased_sum(&self, values: &[Complex64], base_omega: f64, out: &mut [Complex64]) {
        let post = self.base_phases(base_omega);
        let mut scratch = self.scratch();
        self.phased_sum_with(values, &post, out, &mut scratch);
    }

    /// `exp(−i·base_omega·t_k)` for every time point.
    pub fn base_phases(&self, base_omega: f64) -> Vec<Complex64> {
        (0..self.grid.n_points())
            .map(|k| Complex64::from_polar(1.0, -base_omega * self.time.point(k)))
            .collect()
    }

    /// Scratch buffer sized for [`phased_sum_with`](Self::phased_sum_with).
    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()]
    }

    /// [`phased_sum`](Self::phased_sum) with precomputed [`base_phases`](Self::base_phases).
    pub fn phased_sum_with(
        &self,
        values: &[Complex64],
        post: &[Complex64],
        out: &mut [Complex64],
        scratch: &mut [Complex64],
    ) {
        let n = self.grid.n_points();
        assert!(values.len() <= n, "phased_sum input longer than the grid");
        assert_eq!(out.len(), n, "phased_sum output must span the time grid");
        for (m, slot) in out.iter_mut().enumerate() {
            *slot = match values.get(m) {
                Some(v) => v * self.pre[m],
                None => Complex64::new(0.0, 0.0),
            };
        }
        self.fft.process_with_scratch(out, scratch);
        for (slot, p) in out.iter_mut().zip(post) {
            *slot *= p;
        }
    }

    /// Unitary image on the time grid:
    /// `f̃(t_k) = (1/√2π)·Σ_i f(ω_i)·exp(−iω_i t_k)·Δω`.
    pub fn forward(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.n_points();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        self.phased_sum(spectrum, self.grid.point(0), &mut out);
        let scale = self.grid.delta_omega() / (2.0 * PI).sqrt();
        out.iter_mut().for_each(|x| *x *= scale);
        out
    }
}
