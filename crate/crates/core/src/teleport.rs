//! The teleportation protocol: condition photon 2 on an entangled-measurement
//! outcome, undo the classically known frequency mirror for scoring, and
//! aggregate fidelity and efficiency over the outcome map.
//!
//! For a perfectly anticorrelated pair, outcome `(t, Ω−)` leaves photon 2 in
//! `g(ω) ∝ e^{iωt}·f(c − ω)` with mirror center `c = Ω0 − 2Ω−` (with
//! `Ω− = (ω1 − ω3)/2`). The mirror is not a physical operation on photon 2;
//! [`reconstruction_map`] applies it numerically so that fidelity can be
//! scored against the input.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Fourier, FrequencyGrid, LATTICE_TOLERANCE};
use crate::povm::{
    density_from_amplitude, entangled_outcome_amplitude, sector_amplitudes, MeasurementOutcome,
    OutcomeGrid, OutcomeIndex,
};
use crate::states::{aligned_overlap, normalize, BiphotonAmplitude, WavePacket, TAIL_TOLERANCE};

/// Densities below this are treated as impossible outcomes.
pub const MIN_CONDITIONING_DENSITY: f64 = 1e-300;

/// Which mirror center the reconstruction uses for outcome `Ω−`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MirrorConvention {
    /// `c = Ω0 − 2Ω−`, what the measurement actually produces.
    #[default]
    Doubled,
    /// `c = Ω0 − Ω−`.
    Printed,
}

impl MirrorConvention {
    pub fn mirror_center(self, omega0: f64, omega_minus: f64) -> f64 {
        match self {
            MirrorConvention::Doubled => omega0 - 2.0 * omega_minus,
            MirrorConvention::Printed => omega0 - omega_minus,
        }
    }

    pub fn other(self) -> Self {
        match self {
            MirrorConvention::Doubled => MirrorConvention::Printed,
            MirrorConvention::Printed => MirrorConvention::Doubled,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MirrorConvention::Doubled => "doubled",
            MirrorConvention::Printed => "printed",
        }
    }
}

/// Classically communicated data the receiver uses to undo the mirror.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionParams {
    pub mirror_center: f64,
    pub phase_time: f64,
}

impl ReconstructionParams {
    pub fn from_outcome(t: f64, omega_minus: f64, omega0: f64, convention: MirrorConvention) -> Self {
        Self {
            mirror_center: convention.mirror_center(omega0, omega_minus),
            phase_time: t,
        }
    }
}

/// Sparse linear map `g ↦ h(ω) = e^{iωt}·g(c − ω)` from a source grid onto a
/// target grid, with linear interpolation when `c − ω` misses the source lattice.
#[derive(Debug, Clone)]
struct MirrorMap {
    taps: Vec<[(usize, f64); 2]>,
    phases: Vec<Complex64>,
    interpolated: bool,
}

impl MirrorMap {
    fn new(source: &FrequencyGrid, target: &FrequencyGrid, r: &ReconstructionParams) -> Self {
        let n = source.n_points();
        let mut interpolated = false;
        let taps = target
            .points()
            .into_iter()
            .map(|w| {
                let x = source.fractional_index(r.mirror_center - w);
                let rounded = x.round();
                if (x - rounded).abs() <= LATTICE_TOLERANCE {
                    let j = rounded as isize;
                    if j >= 0 && (j as usize) < n {
                        return [(j as usize, 1.0), (0, 0.0)];
                    }
                    return [(0, 0.0), (0, 0.0)];
                }
                interpolated = true;
                let lo = x.floor();
                let frac = x - lo;
                let lo = lo as isize;
                let tap = |j: isize, w: f64| {
                    if j >= 0 && (j as usize) < n {
                        (j as usize, w)
                    } else {
                        (0, 0.0)
                    }
                };
                [tap(lo, 1.0 - frac), tap(lo + 1, frac)]
            })
            .collect();
        let phases = target
            .points()
            .into_iter()
            .map(|w| Complex64::from_polar(1.0, w * r.phase_time))
            .collect();
        Self {
            taps,
            phases,
            interpolated,
        }
    }

    #[inline]
    fn sample(&self, g: &[Complex64], i: usize) -> Complex64 {
        let [(a, wa), (b, wb)] = self.taps[i];
        g[a] * wa + g[b] * wb
    }

    fn apply(&self, g: &[Complex64]) -> Vec<Complex64> {
        (0..self.taps.len())
            .map(|i| self.phases[i] * self.sample(g, i))
            .collect()
    }
}

/// Result of [`reconstruction_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    /// Normalized `e^{iωt}·g(c − ω)`.
    pub state: WavePacket,
    /// Squared norm of the mirrored packet before renormalization; below one
    /// when part of `g` maps off the grid.
    pub retained_norm: f64,
    /// Set when the mirror center is off the lattice and linear
    /// interpolation was used.
    pub interpolated: bool,
}

/// Applies the classically informed inverse of the frequency mirror,
/// `h(ω) = e^{iωt}·g(c − ω)`, on `g`'s own grid.
pub fn reconstruction_map(g: &WavePacket, r: &ReconstructionParams) -> Result<Reconstruction> {
    let map = MirrorMap::new(g.grid(), g.grid(), r);
    let h = map.apply(g.amplitudes());
    let retained_norm = crate::grid::norm_sqr(&h, g.grid());
    Ok(Reconstruction {
        state: normalize(&h, g.grid())?,
        retained_norm,
        interpolated: map.interpolated,
    })
}

/// Reference state of the ideal channel, `g(ω) ∝ e^{iωt}·f(c − ω)` on the
/// input's grid, `c` from `convention`.
pub fn ideal_limit_state(
    input: &WavePacket,
    t: f64,
    omega_minus: f64,
    omega0: f64,
    convention: MirrorConvention,
) -> Result<WavePacket> {
    let r = ReconstructionParams::from_outcome(t, omega_minus, omega0, convention);
    let map = MirrorMap::new(input.grid(), input.grid(), &r);
    let off = Error::MirrorOffGrid {
        mirror_center: r.mirror_center,
    };
    if map.interpolated {
        return Err(off);
    }
    let h = map.apply(input.amplitudes());
    if crate::grid::norm_sqr(&h, input.grid()) < 1.0 - TAIL_TOLERANCE {
        return Err(off);
    }
    normalize(&h, input.grid())
}

/// Pure-state fidelity `|⟨a|b⟩|²`.
pub fn fidelity(a: &WavePacket, b: &WavePacket) -> Result<f64> {
    Ok(a.overlap(b)?.norm_sqr().min(1.0))
}

/// One run of the protocol for a fixed outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportResult {
    pub outcome: MeasurementOutcome,
    /// Normalized state of photon 2 after the measurement.
    pub conditional_state: WavePacket,
    /// `|⟨f_in|ψ₂⟩|²` with no correction.
    pub fidelity_raw: f64,
    /// `|⟨f_in|h⟩|²` where `h` is the mirrored conditional state; mass that
    /// maps off the grid counts as lost.
    pub fidelity_corrected: f64,
    pub reconstruction: ReconstructionParams,
    pub interpolated: bool,
}

/// Acceptance window for the efficiency figure: `t_width` seconds by
/// `omega_width` rad/s of `Ω−`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptanceWindow {
    pub t_width: f64,
    pub omega_width: f64,
}

impl AcceptanceWindow {
    /// Window size in outcome cells `(time, Ω−)`, rounded to the nearest
    /// whole cell and at least one.
    pub fn cells(&self, outcomes: &OutcomeGrid) -> Result<(usize, usize)> {
        let exceeds = Error::WindowExceedsGrid {
            t_width: self.t_width,
            omega_width: self.omega_width,
        };
        if !(self.t_width > 0.0 && self.omega_width > 0.0) {
            return Err(exceeds);
        }
        let nt = ((self.t_width / outcomes.time_grid().delta_t()).round() as usize).max(1);
        let nw = ((self.omega_width / outcomes.delta_omega_minus()).round() as usize).max(1);
        if nt > outcomes.time_indices().len() || nw > outcomes.n_sectors() {
            return Err(exceeds);
        }
        Ok((nt, nw))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelMetrics {
    pub avg_fidelity_raw: f64,
    pub avg_fidelity_corrected: f64,
    pub efficiency: f64,
    pub total_probability: f64,
}

/// EPR pair, input packet and measurement wired together.
///
/// Photon 1 and the input (photon 3) must share one grid; photon 2 may use
/// another grid with the same spacing and lattice.
#[derive(Debug, Clone)]
pub struct Protocol<'a> {
    pair: &'a BiphotonAmplitude,
    input: &'a WavePacket,
    omega0: f64,
    convention: MirrorConvention,
    outcomes: OutcomeGrid,
    fourier: Fourier,
}

impl<'a> Protocol<'a> {
    /// Takes `Ω0` from the pair's model parameters.
    pub fn new(
        pair: &'a BiphotonAmplitude,
        input: &'a WavePacket,
        convention: MirrorConvention,
    ) -> Result<Self> {
        let omega0 = pair
            .params()
            .map(|p| p.omega0())
            .ok_or(Error::InvalidParameter {
                name: "omega0",
                reason: "raw joint amplitudes need an explicit pump frequency".into(),
            })?;
        Self::with_omega0(pair, input, omega0, convention)
    }

    pub fn with_omega0(
        pair: &'a BiphotonAmplitude,
        input: &'a WavePacket,
        omega0: f64,
        convention: MirrorConvention,
    ) -> Result<Self> {
        if pair.grid1() != input.grid() || pair.grid1().lattice_offset(pair.grid2()).is_none() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            pair,
            input,
            omega0,
            convention,
            outcomes: OutcomeGrid::new(input.grid()),
            fourier: Fourier::new(input.grid()),
        })
    }

    pub fn with_outcomes(mut self, outcomes: OutcomeGrid) -> Self {
        self.outcomes = outcomes;
        self
    }

    pub fn outcomes(&self) -> &OutcomeGrid {
        &self.outcomes
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn convention(&self) -> MirrorConvention {
        self.convention
    }

    fn mirror_map(&self, t: f64, omega_minus: f64) -> (ReconstructionParams, MirrorMap) {
        let r = ReconstructionParams::from_outcome(t, omega_minus, self.omega0, self.convention);
        (r, MirrorMap::new(self.pair.grid2(), self.input.grid(), &r))
    }

    pub fn teleport_once(&self, t: f64, omega_minus: f64) -> Result<TeleportResult> {
        let index = self.outcomes.locate(t, omega_minus)?;
        let (t, omega_minus) = self.outcomes.outcome(index);
        let psi = entangled_outcome_amplitude(self.pair, self.input, t, omega_minus)?;
        let density = density_from_amplitude(&psi, self.pair.grid2());
        if !(density >= MIN_CONDITIONING_DENSITY) {
            return Err(Error::ZeroProbabilityOutcome { density });
        }
        let conditional_state = normalize(&psi, self.pair.grid2())?;
        let fidelity_raw = aligned_overlap(self.input, &conditional_state)?.norm_sqr().min(1.0);
        let (reconstruction, map) = self.mirror_map(t, omega_minus);
        let h = map.apply(conditional_state.amplitudes());
        let fidelity_corrected = crate::grid::inner_product(self.input.amplitudes(), &h, self.input.grid())?
            .norm_sqr()
            .min(1.0);
        Ok(TeleportResult {
            outcome: MeasurementOutcome {
                t,
                omega_minus,
                probability_density: density,
            },
            conditional_state,
            fidelity_raw,
            fidelity_corrected,
            reconstruction,
            interpolated: map.interpolated,
        })
    }

    /// Density and fidelities for every outcome. Sectors are evaluated in
    /// parallel; results are assembled in lattice order, so the map does not
    /// depend on the thread count.
    pub fn outcome_map(&self) -> OutcomeMap {
        let offsets: Vec<isize> = self.outcomes.offsets().collect();
        let grid3 = self.input.grid();
        let time = self.outcomes.time_grid();
        let n3 = grid3.n_points();
        let phases: Vec<Complex64> = self
            .outcomes
            .time_indices()
            .flat_map(|k| {
                let t = time.point(k);
                (0..n3).map(move |i| Complex64::from_polar(1.0, grid3.point(i) * t))
            })
            .collect();
        let columns: Vec<SectorColumn> = offsets
            .par_iter()
            .map(|&d| self.sector_column(d, &phases))
            .collect();
        let rows = self.outcomes.time_indices().len();
        let cols = columns.len();
        let mut density = DMatrix::zeros(rows, cols);
        let mut fidelity_raw = DMatrix::zeros(rows, cols);
        let mut fidelity_corrected = DMatrix::zeros(rows, cols);
        let mut interpolated = false;
        for (c, col) in columns.into_iter().enumerate() {
            density.column_mut(c).copy_from_slice(&col.density);
            fidelity_raw.column_mut(c).copy_from_slice(&col.fidelity_raw);
            fidelity_corrected.column_mut(c).copy_from_slice(&col.fidelity_corrected);
            interpolated |= col.interpolated;
        }
        OutcomeMap {
            outcomes: self.outcomes.clone(),
            density,
            fidelity_raw,
            fidelity_corrected,
            interpolated,
        }
    }

    /// `phases` holds `e^{iω_i t_k}` row-major over `(k, i)` for the kept time range.
    fn sector_column(&self, d: isize, phases: &[Complex64]) -> SectorColumn {
        let amps = sector_amplitudes(self.pair, self.input, &self.outcomes, &self.fourier, d);
        let grid2 = self.pair.grid2();
        let grid3 = self.input.grid();
        let dw3 = grid3.delta_omega();
        let shift = grid3.lattice_offset(grid2).expect("aligned grids checked on construction");
        let omega_minus = self.outcomes.omega_minus(d);
        let (_, map) = self.mirror_map(0.0, omega_minus);
        let input = self.input.amplitudes();
        let range = self.outcomes.time_indices();
        let mut col = SectorColumn {
            density: Vec::with_capacity(range.len()),
            fidelity_raw: Vec::with_capacity(range.len()),
            fidelity_corrected: Vec::with_capacity(range.len()),
            interpolated: map.interpolated,
        };
        let mut psi = vec![Complex64::new(0.0, 0.0); grid2.n_points()];
        let start = range.start;
        for k in range {
            let row = &phases[(k - start) * input.len()..(k - start + 1) * input.len()];
            for (j, slot) in psi.iter_mut().enumerate() {
                *slot = amps[(k, j)];
            }
            let n2 = crate::grid::norm_sqr(&psi, grid2);
            col.density.push(density_from_amplitude(&psi, grid2));
            if !(n2 > 0.0) {
                col.fidelity_raw.push(0.0);
                col.fidelity_corrected.push(0.0);
                continue;
            }
            let mut raw = Complex64::new(0.0, 0.0);
            for (j, y) in psi.iter().enumerate() {
                let i = j as isize + shift;
                if i >= 0 && (i as usize) < input.len() {
                    raw += input[i as usize].conj() * y;
                }
            }
            let mut corr = Complex64::new(0.0, 0.0);
            for (i, (f, phase)) in input.iter().zip(row).enumerate() {
                corr += f.conj() * phase * map.sample(&psi, i);
            }
            col.fidelity_raw.push(((raw * dw3).norm_sqr() / n2).min(1.0));
            col.fidelity_corrected.push(((corr * dw3).norm_sqr() / n2).min(1.0));
        }
        col
    }

    pub fn channel_metrics(&self, window: &AcceptanceWindow) -> Result<ChannelMetrics> {
        let map = self.outcome_map();
        Ok(ChannelMetrics {
            avg_fidelity_raw: map.average_fidelity_raw(),
            avg_fidelity_corrected: map.average_fidelity_corrected(),
            efficiency: map.efficiency(window)?,
            total_probability: map.total_probability(),
        })
    }
}

struct SectorColumn {
    density: Vec<f64>,
    fidelity_raw: Vec<f64>,
    fidelity_corrected: Vec<f64>,
    interpolated: bool,
}

/// Outcome densities and per-outcome fidelities over the whole `(t, Ω−)` lattice.
/// Rows follow the retained time indices, columns the sector offsets from
/// `−(N−1)` to `N−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeMap {
    outcomes: OutcomeGrid,
    density: DMatrix<f64>,
    fidelity_raw: DMatrix<f64>,
    fidelity_corrected: DMatrix<f64>,
    interpolated: bool,
}

/// One row of an [`OutcomeMap`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeRecord {
    pub index: OutcomeIndex,
    pub t: f64,
    pub omega_minus: f64,
    pub density: f64,
    pub fidelity_raw: f64,
    pub fidelity_corrected: f64,
}

impl OutcomeMap {
    pub fn outcomes(&self) -> &OutcomeGrid {
        &self.outcomes
    }

    pub fn density(&self) -> &DMatrix<f64> {
        &self.density
    }

    /// True if any sector needed interpolation to undo the mirror.
    pub fn interpolated(&self) -> bool {
        self.interpolated
    }

    fn index_at(&self, row: usize, col: usize) -> OutcomeIndex {
        let n = self.outcomes.frequency_grid().n_points() as isize;
        OutcomeIndex {
            k: self.outcomes.time_indices().start + row,
            d: col as isize - (n - 1),
        }
    }

    fn position(&self, index: OutcomeIndex) -> Option<(usize, usize)> {
        let n = self.outcomes.frequency_grid().n_points() as isize;
        let range = self.outcomes.time_indices();
        (range.contains(&index.k) && index.d.abs() < n)
            .then(|| (index.k - range.start, (index.d + n - 1) as usize))
    }

    pub fn record(&self, index: OutcomeIndex) -> Option<OutcomeRecord> {
        let (r, c) = self.position(index)?;
        let (t, omega_minus) = self.outcomes.outcome(index);
        Some(OutcomeRecord {
            index,
            t,
            omega_minus,
            density: self.density[(r, c)],
            fidelity_raw: self.fidelity_raw[(r, c)],
            fidelity_corrected: self.fidelity_corrected[(r, c)],
        })
    }

    /// Records ordered by `Ω−` (outer) then `t` (inner).
    pub fn records(&self) -> impl Iterator<Item = OutcomeRecord> + '_ {
        let (rows, cols) = self.density.shape();
        (0..cols).flat_map(move |c| {
            (0..rows).map(move |r| {
                self.record(self.index_at(r, c))
                    .expect("index within map")
            })
        })
    }

    pub fn total_probability(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.outcomes.cell_area()
    }

    /// Outcome with the largest density; ties go to the first in record order.
    pub fn max_density_index(&self) -> OutcomeIndex {
        let (rows, cols) = self.density.shape();
        let mut best = (0, 0);
        for c in 0..cols {
            for r in 0..rows {
                if self.density[(r, c)] > self.density[best] {
                    best = (r, c);
                }
            }
        }
        self.index_at(best.0, best.1)
    }

    fn weighted_average(&self, values: &DMatrix<f64>) -> f64 {
        let total: f64 = self.density.iter().sum();
        self.density.iter().zip(values.iter()).map(|(p, v)| p * v).sum::<f64>() / total
    }

    pub fn average_fidelity_raw(&self) -> f64 {
        self.weighted_average(&self.fidelity_raw)
    }

    pub fn average_fidelity_corrected(&self) -> f64 {
        self.weighted_average(&self.fidelity_corrected)
    }

    /// Largest probability inside any axis-aligned window of the given size.
    pub fn efficiency(&self, window: &AcceptanceWindow) -> Result<f64> {
        let (rows, cols) = self.density.shape();
        let (nt, nw) = window.cells(&self.outcomes)?;
        // summed-area table
        let mut sat = vec![0.0; (rows + 1) * (cols + 1)];
        let at = |r: usize, c: usize| r * (cols + 1) + c;
        for r in 0..rows {
            for c in 0..cols {
                sat[at(r + 1, c + 1)] =
                    self.density[(r, c)] + sat[at(r, c + 1)] + sat[at(r + 1, c)] - sat[at(r, c)];
            }
        }
        let mut best = 0.0f64;
        for r in 0..=rows - nt {
            for c in 0..=cols - nw {
                let s = sat[at(r + nt, c + nw)] - sat[at(r, c + nw)] - sat[at(r + nt, c)] + sat[at(r, c)];
                best = best.max(s);
            }
        }
        Ok((best * self.outcomes.cell_area()).min(1.0))
    }

    /// Densities along `t` at a fixed `Ω−` sector.
    pub fn density_at_offset(&self, d: isize) -> Vec<f64> {
        let n = self.outcomes.frequency_grid().n_points() as isize;
        self.density.column((d + n - 1) as usize).iter().copied().collect()
    }
}

/// Runs [`Protocol::teleport_once`] with `Ω0` taken from the pair's parameters.
pub fn teleport_once(
    pair: &BiphotonAmplitude,
    input: &WavePacket,
    t: f64,
    omega_minus: f64,
    convention: MirrorConvention,
) -> Result<TeleportResult> {
    Protocol::new(pair, input, convention)?.teleport_once(t, omega_minus)
}

/// Runs [`Protocol::channel_metrics`] with `Ω0` taken from the pair's parameters.
pub fn channel_metrics(
    pair: &BiphotonAmplitude,
    input: &WavePacket,
    window: &AcceptanceWindow,
    convention: MirrorConvention,
) -> Result<ChannelMetrics> {
    Protocol::new(pair, input, convention)?.channel_metrics(window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::GaussianEprParams;
    use approx::assert_abs_diff_eq;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(0.0, 64.0, 64).unwrap()
    }

    #[test]
    fn fidelity_basics() {
        let g = grid();
        let a = WavePacket::gaussian(32.0, 2.0, 0.0, &g).unwrap();
        assert_abs_diff_eq!(fidelity(&a, &a).unwrap(), 1.0, epsilon = 1e-12);
        let mut left = vec![Complex64::new(0.0, 0.0); 64];
        let mut right = left.clone();
        left[..32].iter_mut().for_each(|x| *x = Complex64::new(1.0, 0.0));
        right[32..].iter_mut().for_each(|x| *x = Complex64::new(0.0, 1.0));
        let l = normalize(&left, &g).unwrap();
        let r = normalize(&right, &g).unwrap();
        assert!(fidelity(&l, &r).unwrap() <= 1e-12);
        let other = WavePacket::gaussian(16.0, 2.0, 0.0, &FrequencyGrid::new(0.0, 32.0, 64).unwrap()).unwrap();
        assert_eq!(fidelity(&a, &other), Err(Error::GridMismatch));
    }

    #[test]
    fn mirror_center_conventions() {
        assert_eq!(MirrorConvention::Doubled.mirror_center(10.0, 1.5), 7.0);
        assert_eq!(MirrorConvention::Printed.mirror_center(10.0, 1.5), 8.5);
        assert_eq!(MirrorConvention::default(), MirrorConvention::Doubled);
        assert_eq!(MirrorConvention::Printed.other(), MirrorConvention::Doubled);
    }

    #[test]
    fn ideal_state_fixed_point_and_involution() {
        let g = grid();
        let f = WavePacket::gaussian(32.0, 2.0, 0.0, &g).unwrap();
        // symmetric about c/2 = 32 at t = 0
        let same = ideal_limit_state(&f, 0.0, 0.0, 64.0, MirrorConvention::Doubled).unwrap();
        assert!(fidelity(&same, &f).unwrap() > 1.0 - 1e-12);

        let skewed = WavePacket::gaussian(29.0, 2.0, 0.31, &g).unwrap();
        let t = 3.0 * g.conjugate_time_grid().delta_t();
        let once = ideal_limit_state(&skewed, t, 1.0, 64.0, MirrorConvention::Doubled).unwrap();
        assert!(fidelity(&once, &skewed).unwrap() < 0.5);
        let twice = ideal_limit_state(&once, t, 1.0, 64.0, MirrorConvention::Doubled).unwrap();
        assert!(fidelity(&twice, &skewed).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn ideal_state_rejects_off_grid_mirror() {
        let g = grid();
        let f = WavePacket::gaussian(32.0, 2.0, 0.0, &g).unwrap();
        assert!(matches!(
            ideal_limit_state(&f, 0.0, 0.0, 64.3, MirrorConvention::Doubled),
            Err(Error::MirrorOffGrid { .. })
        ));
        // mirrored support falls off the top of the grid
        assert!(matches!(
            ideal_limit_state(&f, 0.0, -20.0, 64.0, MirrorConvention::Doubled),
            Err(Error::MirrorOffGrid { .. })
        ));
    }

    #[test]
    fn reconstruction_inverts_ideal_state() {
        let g = grid();
        let f = WavePacket::gaussian(30.0, 2.5, 0.7, &g).unwrap();
        let dt = g.conjugate_time_grid().delta_t();
        let (t, om) = (-5.0 * dt, 1.5);
        let ideal = ideal_limit_state(&f, t, om, 64.0, MirrorConvention::Doubled).unwrap();
        let r = ReconstructionParams::from_outcome(t, om, 64.0, MirrorConvention::Doubled);
        let back = reconstruction_map(&ideal, &r).unwrap();
        assert!(!back.interpolated);
        assert_abs_diff_eq!(back.retained_norm, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(back.state.norm_sqr(), 1.0, epsilon = 1e-12);
        assert!(fidelity(&back.state, &f).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn zero_probability_outcome_is_rejected() {
        let g = FrequencyGrid::new(0.0, 8.0, 8).unwrap();
        let mut values = DMatrix::from_element(8, 8, Complex64::new(1.0, 0.0));
        values.row_mut(0).fill(Complex64::new(0.0, 0.0));
        let pair = BiphotonAmplitude::from_values(values, &g, &g).unwrap();
        let mut spike = vec![Complex64::new(0.0, 0.0); 8];
        spike[7] = Complex64::new(1.0, 0.0);
        let f = normalize(&spike, &g).unwrap();
        assert!(Protocol::new(&pair, &f, MirrorConvention::Doubled).is_err());
        let proto = Protocol::with_omega0(&pair, &f, 8.0, MirrorConvention::Doubled).unwrap();
        // only lattice pair of sector d = -7 is (i1, i3) = (0, 7)
        let err = proto.teleport_once(0.0, -3.5).unwrap_err();
        assert!(matches!(err, Error::ZeroProbabilityOutcome { .. }), "{err:?}");
    }

    #[test]
    fn full_window_efficiency_is_one() {
        let g = FrequencyGrid::new(0.0, 32.0, 32).unwrap();
        let p = GaussianEprParams::new(-0.8, 2.5, 16.0, 16.0).unwrap();
        let pair = BiphotonAmplitude::gaussian_epr(p, &g, &g).unwrap();
        let f = WavePacket::gaussian(16.0, 1.5, 0.0, &g).unwrap();
        let proto = Protocol::new(&pair, &f, MirrorConvention::Doubled).unwrap();
        let map = proto.outcome_map();
        let full = AcceptanceWindow {
            t_width: proto.outcomes().time_grid().span(),
            omega_width: proto.outcomes().n_sectors() as f64 * proto.outcomes().delta_omega_minus(),
        };
        assert_abs_diff_eq!(map.efficiency(&full).unwrap(), 1.0, epsilon = 1e-9);
        let too_big = AcceptanceWindow {
            t_width: 2.0 * full.t_width,
            omega_width: 1.0,
        };
        assert!(matches!(map.efficiency(&too_big), Err(Error::WindowExceedsGrid { .. })));
        let small = AcceptanceWindow {
            t_width: 1.0,
            omega_width: 4.0,
        };
        let e = map.efficiency(&small).unwrap();
        assert!(e > 0.0 && e < 1.0);
    }

    #[test]
    fn map_agrees_with_single_outcome_path() {
        let g = FrequencyGrid::new(0.0, 32.0, 32).unwrap();
        let p = GaussianEprParams::new(-0.8, 2.5, 16.0, 16.0).unwrap();
        let pair = BiphotonAmplitude::gaussian_epr(p, &g, &g).unwrap();
        let f = WavePacket::gaussian(15.0, 1.5, 0.1, &g).unwrap();
        let proto = Protocol::new(&pair, &f, MirrorConvention::Doubled).unwrap();
        let map = proto.outcome_map();
        for index in [
            OutcomeIndex { k: 16, d: 0 },
            OutcomeIndex { k: 3, d: -4 },
            OutcomeIndex { k: 29, d: 5 },
        ] {
            let rec = map.record(index).unwrap();
            let once = proto.teleport_once(rec.t, rec.omega_minus).unwrap();
            assert_abs_diff_eq!(once.outcome.probability_density, rec.density, epsilon = 1e-12);
            assert_abs_diff_eq!(once.fidelity_raw, rec.fidelity_raw, epsilon = 1e-10);
            assert_abs_diff_eq!(once.fidelity_corrected, rec.fidelity_corrected, epsilon = 1e-10);
            assert_abs_diff_eq!(once.conditional_state.norm_sqr(), 1.0, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(map.total_probability(), 1.0, epsilon = 1e-9);
    }
}
