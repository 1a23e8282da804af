//! The three measurements of the protocol as exact discrete identity resolutions.
//!
//! * energy: orthogonal projectors onto single frequency bins;
//! * time: rank-one elements `(1/N)|u_t⟩⟨u_t|` with `u_t = Σ_ω e^{iωt}|ω⟩`,
//!   complete by DFT unitarity;
//! * entangled energy+time on photons 1 and 3: outcomes `(t, Ω−)`.
//!
//! For the entangled measurement the two-photon lattice `(i1, i3)` is split
//! into diagonals `d = i1 − i3`, with `Ω− = d·Δω/2`. Along a diagonal the sum
//! frequency `Ω+ = (ω1 + ω3)/2` steps by `Δω`, and the element for outcome
//! `(t_k, d)` is `M = (1/N)|u⟩⟨u|` with `u = Σ_{Ω+} e^{iΩ+ t_k}|Ω+ + Ω−⟩₁|Ω+ − Ω−⟩₃`.
//! Summing over the `N` time outcomes of a sector gives the identity on that
//! sector (a zero-padded DFT), and every lattice pair belongs to exactly one
//! sector, so the elements sum to `I₁ ⊗ I₃` exactly.
//!
//! Outcome densities are per unit `dt·dΩ−` with cell size `Δt × Δω/2`. The
//! change of variables `(ω1, ω3) → (Ω+, Ω−)` has Jacobian 2, so the density
//! is `2·‖ψ₂‖²/(2π)`, where `ψ₂` is the conditional amplitude of photon 2.

use std::f64::consts::PI;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{norm_sqr, Fourier, FrequencyGrid, TimeGrid, LATTICE_TOLERANCE};
use crate::states::{BiphotonAmplitude, WavePacket};

/// Largest grid for which [`completeness_residual`] builds the dense `N² × N²` sum.
pub const DENSE_COMPLETENESS_MAX_POINTS: usize = 32;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `|f(ω_i)|²`: the outcome density of the energy measurement.
pub fn energy_distribution(f: &WavePacket) -> Vec<f64> {
    f.amplitudes().iter().map(|a| a.norm_sqr()).collect()
}

/// `|f̃(t_k)|²` on the conjugate time grid: the outcome density of the time measurement.
pub fn time_distribution(f: &WavePacket) -> Vec<f64> {
    Fourier::new(f.grid())
        .forward(f.amplitudes())
        .iter()
        .map(|a| a.norm_sqr())
        .collect()
}

/// `|F(ω1, ω2)|²`.
pub fn joint_energy_distribution(f: &BiphotonAmplitude) -> DMatrix<f64> {
    f.values().map(|v| v.norm_sqr())
}

/// `|F(t1, t2)|²` on the conjugate time grids.
pub fn joint_time_distribution(f: &BiphotonAmplitude) -> DMatrix<f64> {
    f.time_domain_amplitude().map(|v| v.norm_sqr())
}

/// Means and variances of the sum and difference of two jointly distributed variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSpread {
    pub mean_sum: f64,
    pub var_sum: f64,
    pub mean_diff: f64,
    pub var_diff: f64,
}

/// Moments of `ω1 + ω2` and `ω1 − ω2` under a joint frequency density.
pub fn frequency_spread(dist: &DMatrix<f64>, g1: &FrequencyGrid, g2: &FrequencyGrid) -> JointSpread {
    let p1 = g1.points();
    let p2 = g2.points();
    let mut sums = Vec::with_capacity(dist.len());
    let mut diffs = Vec::with_capacity(dist.len());
    let mut w = Vec::with_capacity(dist.len());
    for j in 0..dist.ncols() {
        for i in 0..dist.nrows() {
            sums.push(p1[i] + p2[j]);
            diffs.push(p1[i] - p2[j]);
            w.push(dist[(i, j)]);
        }
    }
    let (mean_sum, var_sum) = crate::states::weighted_moments(&sums, &w);
    let (mean_diff, var_diff) = crate::states::weighted_moments(&diffs, &w);
    JointSpread {
        mean_sum,
        var_sum,
        mean_diff,
        var_diff,
    }
}

/// Mean and variance of `t1 − t2` under a joint time density on one DFT period.
/// Differences are wrapped into `[−span/2, span/2)`.
pub fn time_difference_moments(dist: &DMatrix<f64>, time: &TimeGrid) -> (f64, f64) {
    let n = time.n_points() as isize;
    let mut x = Vec::with_capacity(dist.len());
    let mut w = Vec::with_capacity(dist.len());
    for k2 in 0..dist.ncols() {
        for k1 in 0..dist.nrows() {
            let d = (k1 as isize - k2 as isize + n / 2).rem_euclid(n) - n / 2;
            x.push(d as f64 * time.delta_t());
            w.push(dist[(k1, k2)]);
        }
    }
    crate::states::weighted_moments(&x, &w)
}

/// One diagonal `i1 − i3 = d` of the two-photon lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sector {
    pub offset: isize,
    pub len: usize,
    i3_start: usize,
}

impl Sector {
    /// Lattice pair `(i1, i3)` at position `m` along the diagonal.
    #[inline]
    pub fn pair(&self, m: usize) -> (usize, usize) {
        let i3 = self.i3_start + m;
        ((i3 as isize + self.offset) as usize, i3)
    }
}

/// Position of one outcome on the outcome lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutcomeIndex {
    /// Time-grid index.
    pub k: usize,
    /// Lattice offset `i1 − i3`.
    pub d: isize,
}

/// One result of the entangled measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementOutcome {
    pub t: f64,
    pub omega_minus: f64,
    /// Probability per unit `dt·dΩ−`.
    pub probability_density: f64,
}

/// The `(t, Ω−)` outcome set of the entangled measurement on a photon-1/photon-3 grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeGrid {
    grid: FrequencyGrid,
    time: TimeGrid,
    time_range: Range<usize>,
}

impl OutcomeGrid {
    pub fn new(grid: &FrequencyGrid) -> Self {
        let time = grid.conjugate_time_grid();
        Self {
            grid: *grid,
            time,
            time_range: 0..time.n_points(),
        }
    }

    /// Keeps only the central `fraction` of the time outcomes. Anything below
    /// one leaves the resolution incomplete; used to exercise the
    /// completeness diagnostics.
    pub fn with_time_fraction(mut self, fraction: f64) -> Self {
        let n = self.time.n_points();
        let count = ((fraction.clamp(0.0, 1.0) * n as f64).round() as usize).clamp(1, n);
        let start = (self.time.center_index() + 1).saturating_sub(count.div_ceil(2)).min(n - count);
        self.time_range = start..start + count;
        self
    }

    pub fn frequency_grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time
    }

    /// Time indices that are part of this outcome set.
    pub fn time_indices(&self) -> Range<usize> {
        self.time_range.clone()
    }

    pub fn is_time_complete(&self) -> bool {
        self.time_range == (0..self.time.n_points())
    }

    pub fn n_sectors(&self) -> usize {
        2 * self.grid.n_points() - 1
    }

    pub fn offsets(&self) -> impl Iterator<Item = isize> {
        let n = self.grid.n_points() as isize;
        -(n - 1)..n
    }

    pub fn sector(&self, offset: isize) -> Sector {
        let n = self.grid.n_points();
        assert!(offset.unsigned_abs() < n, "sector offset {offset} outside lattice");
        Sector {
            offset,
            len: n - offset.unsigned_abs(),
            i3_start: if offset < 0 { offset.unsigned_abs() } else { 0 },
        }
    }

    pub fn sectors(&self) -> impl Iterator<Item = Sector> + '_ {
        self.offsets().map(|d| self.sector(d))
    }

    pub fn omega_minus(&self, offset: isize) -> f64 {
        offset as f64 * self.delta_omega_minus()
    }

    pub fn delta_omega_minus(&self) -> f64 {
        0.5 * self.grid.delta_omega()
    }

    /// Sum frequency at position `m` of a sector.
    pub fn omega_plus(&self, sector: &Sector, m: usize) -> f64 {
        let (i1, i3) = sector.pair(m);
        0.5 * (self.grid.point(i1) + self.grid.point(i3))
    }

    /// Outcome cell area `Δt·ΔΩ−`.
    pub fn cell_area(&self) -> f64 {
        self.time.delta_t() * self.delta_omega_minus()
    }

    pub fn n_outcomes(&self) -> usize {
        self.time_range.len() * self.n_sectors()
    }

    /// Number of two-photon lattice pairs covered by the sectors (always `N²`).
    pub fn lattice_pairs(&self) -> usize {
        self.sectors().map(|s| s.len).sum()
    }

    pub fn outcome(&self, index: OutcomeIndex) -> (f64, f64) {
        (self.time.point(index.k), self.omega_minus(index.d))
    }

    /// Snaps `(t, Ω−)` onto the outcome lattice.
    pub fn locate(&self, t: f64, omega_minus: f64) -> Result<OutcomeIndex> {
        let off = Error::OffGridOutcome { t, omega_minus };
        let k = self.time.index_of(t).ok_or(off.clone())?;
        if !self.time_range.contains(&k) {
            return Err(off);
        }
        let x = omega_minus / self.delta_omega_minus();
        let r = x.round();
        let n = self.grid.n_points() as f64;
        if (x - r).abs() > LATTICE_TOLERANCE || r.abs() >= n {
            return Err(off);
        }
        Ok(OutcomeIndex { k, d: r as isize })
    }

    /// Vector `u` (length `N²`, index `i1·N + i3`) with `M(t_k, d) = u·u†`.
    pub fn element_vector(&self, index: OutcomeIndex) -> Vec<Complex64> {
        let n = self.grid.n_points();
        let t = self.time.point(index.k);
        let sector = self.sector(index.d);
        let scale = 1.0 / (n as f64).sqrt();
        let mut u = vec![ZERO; n * n];
        for m in 0..sector.len {
            let (i1, i3) = sector.pair(m);
            u[i1 * n + i3] = Complex64::from_polar(scale, self.omega_plus(&sector, m) * t);
        }
        u
    }
}

fn check_measured_pair(f: &BiphotonAmplitude, input: &WavePacket) -> Result<()> {
    if f.grid1() != input.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Unnormalized conditional amplitude of photon 2 for outcome `(t, Ω−)`:
/// `ψ₂(ω2) = Σ_{Ω+} e^{−iΩ+ t}·F(Ω+ + Ω−, ω2)·f(Ω+ − Ω−)·Δω`,
/// summed over the lattice pairs with both arguments on the positive grid.
pub fn entangled_outcome_amplitude(
    f: &BiphotonAmplitude,
    input: &WavePacket,
    t: f64,
    omega_minus: f64,
) -> Result<Vec<Complex64>> {
    check_measured_pair(f, input)?;
    let outcomes = OutcomeGrid::new(input.grid());
    let index = outcomes.locate(t, omega_minus)?;
    let (t, _) = outcomes.outcome(index);
    let sector = outcomes.sector(index.d);
    let dw = input.grid().delta_omega();
    let n2 = f.grid2().n_points();
    let mut psi = vec![ZERO; n2];
    for m in 0..sector.len {
        let (i1, i3) = sector.pair(m);
        let w = Complex64::from_polar(dw, -outcomes.omega_plus(&sector, m) * t) * input.amplitudes()[i3];
        for (j, slot) in psi.iter_mut().enumerate() {
            *slot += w * f.values()[(i1, j)];
        }
    }
    Ok(psi)
}

/// Converts a conditional amplitude into the outcome density per `dt·dΩ−`.
pub fn density_from_amplitude(psi: &[Complex64], grid2: &FrequencyGrid) -> f64 {
    2.0 * norm_sqr(psi, grid2) / (2.0 * PI)
}

/// Outcome density of `(t, Ω−)` per unit `dt·dΩ−`.
pub fn outcome_density(
    f: &BiphotonAmplitude,
    input: &WavePacket,
    t: f64,
    omega_minus: f64,
) -> Result<f64> {
    let psi = entangled_outcome_amplitude(f, input, t, omega_minus)?;
    Ok(density_from_amplitude(&psi, f.grid2()))
}

/// Conditional amplitudes for every time outcome of one sector, computed
/// with one FFT per photon-2 frequency. Row `k` is `ψ₂` for `t_k`.
pub fn sector_amplitudes(
    f: &BiphotonAmplitude,
    input: &WavePacket,
    outcomes: &OutcomeGrid,
    fourier: &Fourier,
    offset: isize,
) -> DMatrix<Complex64> {
    let sector = outcomes.sector(offset);
    let n = outcomes.frequency_grid().n_points();
    let n2 = f.grid2().n_points();
    let dw = outcomes.frequency_grid().delta_omega();
    let base = outcomes.omega_plus(&sector, 0);
    let mut out = DMatrix::zeros(n, n2);
    let mut line = vec![ZERO; sector.len];
    let mut spectrum = vec![ZERO; n];
    let post = fourier.base_phases(base);
    let mut scratch = fourier.scratch();
    for j in 0..n2 {
        for (m, slot) in line.iter_mut().enumerate() {
            let (i1, i3) = sector.pair(m);
            *slot = f.values()[(i1, j)] * input.amplitudes()[i3] * dw;
        }
        fourier.phased_sum_with(&line, &post, &mut spectrum, &mut scratch);
        out.column_mut(j).copy_from_slice(&spectrum);
    }
    out
}

/// Operator norm of `Σ M(t, Ω−) − I` on the two-photon space, from the
/// explicit dense sum of all elements (`N ≤ 32`).
pub fn completeness_residual(outcomes: &OutcomeGrid) -> Result<f64> {
    let n = outcomes.frequency_grid().n_points();
    if n > DENSE_COMPLETENESS_MAX_POINTS {
        return Err(Error::InvalidParameter {
            name: "n_points",
            reason: format!("dense completeness check limited to {DENSE_COMPLETENESS_MAX_POINTS} points"),
        });
    }
    let dim = n * n;
    let mut sum = DMatrix::<Complex64>::zeros(dim, dim);
    for d in outcomes.offsets() {
        for k in outcomes.time_indices() {
            let u = outcomes.element_vector(OutcomeIndex { k, d });
            let support: Vec<usize> = (0..dim).filter(|&a| u[a] != ZERO).collect();
            for &a in &support {
                for &b in &support {
                    sum[(a, b)] += u[a] * u[b].conj();
                }
            }
        }
    }
    for a in 0..dim {
        sum[(a, a)] -= Complex64::new(1.0, 0.0);
    }
    Ok(hermitian_operator_norm(sum))
}

/// `‖Σ M v − v‖ / ‖v‖` for a pseudo-random two-photon vector `v`; usable on grids
/// too large for [`completeness_residual`].
pub fn completeness_probe(outcomes: &OutcomeGrid, seed: u64) -> f64 {
    let n = outcomes.frequency_grid().n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Complex64> = (0..n * n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut w = vec![ZERO; n * n];
    let inv_n = 1.0 / n as f64;
    for sector in outcomes.sectors() {
        let plus: Vec<f64> = (0..sector.len).map(|m| outcomes.omega_plus(&sector, m)).collect();
        for k in outcomes.time_indices() {
            let t = outcomes.time_grid().point(k);
            let phases: Vec<Complex64> = plus.iter().map(|p| Complex64::from_polar(1.0, p * t)).collect();
            let mut proj = ZERO;
            for (m, ph) in phases.iter().enumerate() {
                let (i1, i3) = sector.pair(m);
                proj += ph.conj() * v[i1 * n + i3];
            }
            proj *= inv_n;
            for (m, ph) in phases.iter().enumerate() {
                let (i1, i3) = sector.pair(m);
                w[i1 * n + i3] += ph * proj;
            }
        }
    }
    let err: f64 = w.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum();
    let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    (err / norm).sqrt()
}

/// Operator norm of `Σ_i |i⟩⟨i| − I` for the single-photon energy measurement.
pub fn energy_completeness_residual(grid: &FrequencyGrid) -> f64 {
    let n = grid.n_points();
    let mut sum = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        sum[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let residual = sum - DMatrix::identity(n, n);
    residual.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Operator norm of `Σ_k (1/N)|u_k⟩⟨u_k| − I` for the single-photon time
/// measurement, `u_k = Σ_i e^{iω_i t_k}|i⟩`.
pub fn time_completeness_residual(grid: &FrequencyGrid) -> f64 {
    let n = grid.n_points();
    let time = grid.conjugate_time_grid();
    let mut sum = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let u = DVector::from_iterator(
            n,
            (0..n).map(|i| Complex64::from_polar(1.0 / (n as f64).sqrt(), grid.point(i) * time.point(k))),
        );
        sum += &u * u.adjoint();
    }
    hermitian_operator_norm(sum - DMatrix::identity(n, n))
}

pub(crate) fn hermitian_operator_norm(m: DMatrix<Complex64>) -> f64 {
    m.symmetric_eigenvalues().iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::GaussianEprParams;
    use approx::assert_abs_diff_eq;

    fn small() -> (FrequencyGrid, BiphotonAmplitude, WavePacket) {
        let g = FrequencyGrid::new(0.0, 24.0, 24).unwrap();
        let p = GaussianEprParams::new(-0.6, 2.0, 12.0, 12.0).unwrap();
        let f = BiphotonAmplitude::gaussian_epr(p, &g, &g).unwrap();
        let input = WavePacket::gaussian(11.0, 1.5, 0.2, &g).unwrap();
        (g, f, input)
    }

    #[test]
    fn energy_distribution_of_single_bin_packet() {
        let g = FrequencyGrid::new(0.0, 8.0, 16).unwrap();
        let mut v = vec![ZERO; 16];
        v[5] = Complex64::new(1.0 / g.delta_omega().sqrt(), 0.0);
        let f = crate::states::normalize(&v, &g).unwrap();
        let e = energy_distribution(&f);
        assert_abs_diff_eq!(e[5], 1.0 / g.delta_omega(), epsilon = 1e-12);
        assert!(e.iter().enumerate().all(|(i, x)| i == 5 || *x == 0.0));
        // perfectly defined energy, fully undefined time
        let t = time_distribution(&f);
        let (lo, hi) = t.iter().fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(*x), b.max(*x)));
        assert!(hi - lo < 1e-14);
        let dt = g.conjugate_time_grid().delta_t();
        assert_abs_diff_eq!(t.iter().sum::<f64>() * dt, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn energy_resolution_is_exact() {
        let g = FrequencyGrid::new(0.0, 8.0, 16).unwrap();
        assert_eq!(energy_completeness_residual(&g), 0.0);
        assert!(time_completeness_residual(&g) < 1e-12);
    }

    #[test]
    fn sector_bookkeeping_covers_lattice() {
        let g = FrequencyGrid::new(1.0, 11.0, 10).unwrap();
        let o = OutcomeGrid::new(&g);
        assert_eq!(o.n_sectors(), 19);
        assert_eq!(o.lattice_pairs(), 100);
        let mut seen = vec![false; 100];
        for s in o.sectors() {
            for m in 0..s.len {
                let (i1, i3) = s.pair(m);
                assert_eq!(i1 as isize - i3 as isize, s.offset);
                assert!(!seen[i1 * 10 + i3]);
                seen[i1 * 10 + i3] = true;
                let (w1, w3) = (g.point(i1), g.point(i3));
                assert_abs_diff_eq!(o.omega_plus(&s, m), 0.5 * (w1 + w3), epsilon = 1e-12);
                assert_abs_diff_eq!(o.omega_minus(s.offset), 0.5 * (w1 - w3), epsilon = 1e-12);
            }
        }
        assert!(seen.into_iter().all(|x| x));
    }

    #[test]
    fn locate_rejects_off_lattice_outcomes() {
        let g = FrequencyGrid::new(0.0, 16.0, 16).unwrap();
        let o = OutcomeGrid::new(&g);
        let dt = o.time_grid().delta_t();
        assert_eq!(o.locate(2.0 * dt, 1.5).unwrap(), OutcomeIndex { k: 10, d: 3 });
        assert!(matches!(o.locate(0.3 * dt, 0.0), Err(Error::OffGridOutcome { .. })));
        assert!(matches!(o.locate(0.0, 0.2), Err(Error::OffGridOutcome { .. })));
        assert!(matches!(o.locate(0.0, 8.0), Err(Error::OffGridOutcome { .. })));
        let half = o.clone().with_time_fraction(0.5);
        assert_eq!(half.time_indices().len(), 8);
        assert!(half.time_indices().contains(&o.time_grid().center_index()));
        assert!(half.locate(-8.0 * dt, 0.0).is_err());
    }

    #[test]
    fn dense_completeness_and_truncation() {
        let g = FrequencyGrid::new(0.0, 12.0, 12).unwrap();
        let o = OutcomeGrid::new(&g);
        assert!(completeness_residual(&o).unwrap() <= 1e-9);
        assert!(completeness_probe(&o, 7) <= 1e-9);
        let half = o.with_time_fraction(0.5);
        assert!(completeness_residual(&half).unwrap() > 0.1);
        assert!(completeness_probe(&half, 7) > 0.1);
    }

    #[test]
    fn elements_are_positive_rank_one() {
        let g = FrequencyGrid::new(0.0, 6.0, 6).unwrap();
        let o = OutcomeGrid::new(&g);
        let u = DVector::from_vec(o.element_vector(OutcomeIndex { k: 2, d: -1 }));
        let m = &u * u.adjoint();
        let eig = m.symmetric_eigenvalues();
        assert!(eig.iter().all(|x| *x >= -1e-12));
        assert_abs_diff_eq!(eig.iter().sum::<f64>(), 5.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn fft_and_direct_amplitudes_agree() {
        let (g, f, input) = small();
        let o = OutcomeGrid::new(&g);
        let four = Fourier::new(&g);
        for d in [-7, 0, 3, 23] {
            let batch = sector_amplitudes(&f, &input, &o, &four, d);
            for k in [0, 5, 12, 23] {
                let (t, om) = o.outcome(OutcomeIndex { k, d });
                let direct = entangled_outcome_amplitude(&f, &input, t, om).unwrap();
                for j in 0..g.n_points() {
                    assert_abs_diff_eq!((batch[(k, j)] - direct[j]).norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn outcome_probabilities_sum_to_one() {
        let (g, f, input) = small();
        let o = OutcomeGrid::new(&g);
        let mut total = 0.0;
        for d in o.offsets() {
            for k in o.time_indices() {
                let (t, om) = o.outcome(OutcomeIndex { k, d });
                let p = outcome_density(&f, &input, t, om).unwrap();
                assert!(p >= 0.0);
                total += p * o.cell_area();
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn amplitude_requires_matched_grids() {
        let (g, f, _) = small();
        let other = FrequencyGrid::new(0.0, 24.0, 48).unwrap();
        let input = WavePacket::gaussian(12.0, 1.5, 0.0, &other).unwrap();
        assert_eq!(
            entangled_outcome_amplitude(&f, &input, 0.0, 0.0),
            Err(Error::GridMismatch)
        );
        let _ = g;
    }

    #[test]
    fn joint_time_distribution_sums_to_one() {
        let (g, f, _) = small();
        let dt = g.conjugate_time_grid().delta_t();
        let total: f64 = joint_time_distribution(&f).iter().sum::<f64>() * dt * dt;
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        let dw = g.delta_omega();
        let total: f64 = joint_energy_distribution(&f).iter().sum::<f64>() * dw * dw;
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }
}
