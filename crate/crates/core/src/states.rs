//! Single-photon wave packets and the Gaussian energy-time entangled biphoton.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{inner_product, norm_sqr, Fourier, FrequencyGrid};

/// Largest spectral mass allowed to fall outside a grid.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Normalized spectral amplitude `f(ω)` of one photon on a frequency grid.
///
/// The emission time `t0` is folded into the phases when the packet is
/// built, so the packet is fully described by its amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    grid: FrequencyGrid,
    amplitudes: Vec<Complex64>,
}

impl WavePacket {
    /// `f(ω) ∝ exp(−(ω−center)²/(4·width²))·exp(−iωt0)`, so `|f|²` is a
    /// normal density with standard deviation `width`. With the `e^{−iωt}`
    /// evolution the time-domain packet is centered at `t = −t0`.
    pub fn gaussian(center: f64, width: f64, t0: f64, grid: &FrequencyGrid) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidParameter {
                name: "width",
                reason: format!("must be positive, got {width}"),
            });
        }
        if !(center > grid.omega_min() && center < grid.omega_max()) {
            return Err(Error::InvalidParameter {
                name: "center",
                reason: format!("{center} is outside the grid interior"),
            });
        }
        let mass = grid.gaussian_tail_mass(center, width);
        if mass > TAIL_TOLERANCE {
            return Err(Error::MassOutsideGrid {
                mass,
                limit: TAIL_TOLERANCE,
            });
        }
        let amplitudes: Vec<Complex64> = grid
            .points()
            .into_iter()
            .map(|w| {
                let env = (-(w - center).powi(2) / (4.0 * width * width)).exp();
                Complex64::from_polar(env, -w * t0)
            })
            .collect();
        normalize(&amplitudes, grid)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes, &self.grid)
    }

    /// `⟨self|other⟩`; both packets must share a grid.
    pub fn overlap(&self, other: &WavePacket) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        inner_product(&self.amplitudes, &other.amplitudes, &self.grid)
    }

    /// Mean and variance of the spectral density `|f(ω)|²`.
    pub fn spectral_moments(&self) -> (f64, f64) {
        let weights: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        weighted_moments(&self.grid.points(), &weights)
    }

    /// L2 distance after removing the relative global phase,
    /// `min_φ ‖a − e^{iφ}b‖`, evaluated pointwise.
    pub fn phase_aligned_distance(&self, other: &WavePacket) -> Result<f64> {
        let s = self.overlap(other)?;
        let phase = if s.norm() > 0.0 { s.conj() / s.norm() } else { Complex64::new(1.0, 0.0) };
        let diff: Vec<Complex64> = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a - b * phase)
            .collect();
        Ok(norm_sqr(&diff, &self.grid).sqrt())
    }
}

/// Overlap of two packets on grids that share spacing and lattice, summing
/// over the frequencies the two grids have in common.
pub fn aligned_overlap(a: &WavePacket, b: &WavePacket) -> Result<Complex64> {
    if a.grid == b.grid {
        return a.overlap(b);
    }
    let shift = a.grid.lattice_offset(&b.grid).ok_or(Error::GridMismatch)?;
    let sum: Complex64 = b
        .amplitudes
        .iter()
        .enumerate()
        .filter_map(|(j, y)| {
            let i = j as isize + shift;
            (i >= 0 && (i as usize) < a.amplitudes.len()).then(|| a.amplitudes[i as usize].conj() * y)
        })
        .sum();
    Ok(sum * a.grid.delta_omega())
}

/// Scale `f` to unit quadrature norm.
pub fn normalize(f: &[Complex64], grid: &FrequencyGrid) -> Result<WavePacket> {
    if f.len() != grid.n_points() {
        return Err(Error::LengthMismatch {
            expected: grid.n_points(),
            actual: f.len(),
        });
    }
    let n2 = norm_sqr(f, grid);
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::ZeroVector);
    }
    let scale = 1.0 / n2.sqrt();
    Ok(WavePacket {
        grid: *grid,
        amplitudes: f.iter().map(|x| x * scale).collect(),
    })
}

pub(crate) fn weighted_moments(x: &[f64], w: &[f64]) -> (f64, f64) {
    let total: f64 = w.iter().sum();
    let mean = x.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / total;
    let var = x
        .iter()
        .zip(w)
        .map(|(x, w)| (x - mean).powi(2) * w)
        .sum::<f64>()
        / total;
    (mean, var)
}

/// Parameters of the Gaussian joint spectral amplitude.
///
/// `|F|²` is a bivariate normal density with marginal standard deviations
/// `sigma` and correlation `mu`; `mu → −1` is frequency anticorrelation,
/// the ideal EPR limit for this source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianEprParams {
    mu: f64,
    sigma: f64,
    omega1_center: f64,
    omega2_center: f64,
}

impl GaussianEprParams {
    pub fn new(mu: f64, sigma: f64, omega1_center: f64, omega2_center: f64) -> Result<Self> {
        if !(mu.abs() < 1.0) {
            return Err(Error::DegenerateCorrelation { mu });
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("must be positive, got {sigma}"),
            });
        }
        for (name, c) in [("omega1", omega1_center), ("omega2", omega2_center)] {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("center frequency must be positive, got {c}"),
                });
            }
        }
        Ok(Self {
            mu,
            sigma,
            omega1_center,
            omega2_center,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn omega1_center(&self) -> f64 {
        self.omega1_center
    }

    pub fn omega2_center(&self) -> f64 {
        self.omega2_center
    }

    /// Pump frequency `Ω0 = Ω1 + Ω2`.
    pub fn omega0(&self) -> f64 {
        self.omega1_center + self.omega2_center
    }

    /// Ideality parameter `σ²(1 − μ²)`; zero is the perfectly correlated source.
    pub fn ideality(&self) -> f64 {
        self.sigma * self.sigma * (1.0 - self.mu * self.mu)
    }

    /// Continuum amplitude `F(ω, ω')` before any discrete renormalization.
    pub fn amplitude(&self, omega: f64, omega_prime: f64) -> f64 {
        let x = omega - self.omega1_center;
        let y = omega_prime - self.omega2_center;
        let q = x * x + y * y - 2.0 * self.mu * x * y;
        let p = q / (2.0 * self.ideality());
        let prefactor = 1.0 / (2.0 * PI * self.sigma * self.sigma * (1.0 - self.mu * self.mu).sqrt()).sqrt();
        prefactor * (-p / 2.0).exp()
    }
}

/// Joint spectral amplitude `F(ω1, ω2)` of the photon pair; rows follow the
/// photon-1 grid, columns the photon-2 grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BiphotonAmplitude {
    grid1: FrequencyGrid,
    grid2: FrequencyGrid,
    values: DMatrix<Complex64>,
    params: Option<GaussianEprParams>,
    norm_correction: f64,
}

impl BiphotonAmplitude {
    /// Samples the Gaussian amplitude on `grid1 × grid2` and rescales it to
    /// unit discrete norm. The rescaling factor is kept as
    /// [`norm_correction`](Self::norm_correction).
    pub fn gaussian_epr(
        params: GaussianEprParams,
        grid1: &FrequencyGrid,
        grid2: &FrequencyGrid,
    ) -> Result<Self> {
        let mass = Self::model_tail_mass(&params, grid1, grid2);
        if mass > TAIL_TOLERANCE {
            return Err(Error::MassOutsideGrid {
                mass,
                limit: TAIL_TOLERANCE,
            });
        }
        let p1 = grid1.points();
        let p2 = grid2.points();
        let values = DMatrix::from_fn(p1.len(), p2.len(), |i, j| {
            Complex64::new(params.amplitude(p1[i], p2[j]), 0.0)
        });
        let mut out = Self::from_values(values, grid1, grid2)?;
        out.params = Some(params);
        Ok(out)
    }

    /// Union bound on the `|F|²` mass outside `grid1 × grid2`, from the two
    /// normal marginals.
    pub fn model_tail_mass(
        params: &GaussianEprParams,
        grid1: &FrequencyGrid,
        grid2: &FrequencyGrid,
    ) -> f64 {
        grid1.gaussian_tail_mass(params.omega1_center, params.sigma)
            + grid2.gaussian_tail_mass(params.omega2_center, params.sigma)
    }

    /// Wraps raw sampled values, normalizing them to unit discrete norm.
    pub fn from_values(
        values: DMatrix<Complex64>,
        grid1: &FrequencyGrid,
        grid2: &FrequencyGrid,
    ) -> Result<Self> {
        if values.nrows() != grid1.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid1.n_points(),
                actual: values.nrows(),
            });
        }
        if values.ncols() != grid2.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid2.n_points(),
                actual: values.ncols(),
            });
        }
        let raw = values.iter().map(|v| v.norm_sqr()).sum::<f64>()
            * grid1.delta_omega()
            * grid2.delta_omega();
        if !(raw > 0.0) || !raw.is_finite() {
            return Err(Error::ZeroVector);
        }
        let norm_correction = 1.0 / raw.sqrt();
        Ok(Self {
            grid1: *grid1,
            grid2: *grid2,
            values: values * Complex64::new(norm_correction, 0.0),
            params: None,
            norm_correction,
        })
    }

    pub fn grid1(&self) -> &FrequencyGrid {
        &self.grid1
    }

    pub fn grid2(&self) -> &FrequencyGrid {
        &self.grid2
    }

    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    pub fn params(&self) -> Option<&GaussianEprParams> {
        self.params.as_ref()
    }

    /// Factor applied to the sampled values to reach unit discrete norm.
    pub fn norm_correction(&self) -> f64 {
        self.norm_correction
    }

    /// Model tail mass outside the grids; `None` for raw amplitudes.
    pub fn tail_mass(&self) -> Option<f64> {
        self.params
            .as_ref()
            .map(|p| Self::model_tail_mass(p, &self.grid1, &self.grid2))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
            * self.grid1.delta_omega()
            * self.grid2.delta_omega()
    }

    /// Schmidt coefficients (singular values in orthonormal bin coordinates),
    /// sorted descending; their squares sum to one. More than one nonzero
    /// coefficient means the pair is entangled.
    pub fn schmidt_coefficients(&self) -> Vec<f64> {
        let w = (self.grid1.delta_omega() * self.grid2.delta_omega()).sqrt();
        let m = &self.values * Complex64::new(w, 0.0);
        let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Two-dimensional unitary Fourier image
    /// `F(t1, t2) = (1/2π) Σ F(ω, ω')·exp(−i(ω t1 + ω' t2))·Δω·Δω'`,
    /// rows indexed by `t1`, columns by `t2`.
    pub fn time_domain_amplitude(&self) -> DMatrix<Complex64> {
        let f1 = Fourier::new(&self.grid1);
        let f2 = Fourier::new(&self.grid2);
        let (n1, n2) = self.values.shape();
        let mut half = DMatrix::zeros(n1, n2);
        for j in 0..n2 {
            let col: Vec<Complex64> = self.values.column(j).iter().copied().collect();
            let t = f1.forward(&col);
            half.column_mut(j).copy_from_slice(&t);
        }
        let mut out = DMatrix::zeros(n1, n2);
        for k in 0..n1 {
            let row: Vec<Complex64> = half.row(k).iter().copied().collect();
            let t = f2.forward(&row);
            for (j, v) in t.into_iter().enumerate() {
                out[(k, j)] = v;
            }
        }
        out
    }
}
