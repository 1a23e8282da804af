//! Small-grid oracles that evaluate the protocol with explicit density matrices.
//!
//! These build the full three-photon density matrix and the dense
//! measurement operator, then take the partial trace over photons 1 and 3
//! directly. They scale as `O(N⁶)` per outcome and exist only to cross-check
//! the pure-state pipeline.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::povm::{entangled_outcome_amplitude, OutcomeGrid, OutcomeIndex};
use crate::states::{BiphotonAmplitude, WavePacket};

/// Largest grid the explicit three-photon density matrix is built for.
pub const DENSE_MAX_POINTS: usize = 12;

/// Largest grid for the no-signaling mixture check.
pub const NO_SIGNALING_MAX_POINTS: usize = 16;

/// Conditional state of photon 2 from the dense evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseConditional {
    /// Outcome probability `Tr{ρ_EPR ⊗ ρ3 · M}` for one lattice cell.
    pub probability: f64,
    /// `ρ(2)` in orthonormal bin coordinates, unit trace.
    pub state: DMatrix<Complex64>,
}

fn three_photon_state(pair: &BiphotonAmplitude, input: &WavePacket) -> DVector<Complex64> {
    let n = input.grid().n_points();
    let n2 = pair.grid2().n_points();
    let w = (pair.grid1().delta_omega() * pair.grid2().delta_omega() * input.grid().delta_omega()).sqrt();
    DVector::from_fn(n * n2 * n, |idx, _| {
        let (i1, rest) = (idx / (n2 * n), idx % (n2 * n));
        let (j, i3) = (rest / n, rest % n);
        pair.values()[(i1, j)] * input.amplitudes()[i3] * w
    })
}

/// Evaluates `ρ(2) = Tr₁₃{ρ_EPR(1,2) ⊗ ρ(3) · M} / Pr` with every operator stored densely.
pub fn dense_conditional_state(
    pair: &BiphotonAmplitude,
    input: &WavePacket,
    outcomes: &OutcomeGrid,
    index: OutcomeIndex,
) -> Result<DenseConditional> {
    let rho = dense_total_density(pair, input)?;
    Ok(conditional_from_total(&rho, pair, outcomes, index))
}

fn dense_total_density(pair: &BiphotonAmplitude, input: &WavePacket) -> Result<DMatrix<Complex64>> {
    let n = input.grid().n_points();
    if pair.grid1() != input.grid() {
        return Err(Error::GridMismatch);
    }
    if n > DENSE_MAX_POINTS || pair.grid2().n_points() > DENSE_MAX_POINTS {
        return Err(Error::InvalidParameter {
            name: "n_points",
            reason: format!("dense three-photon evaluation limited to {DENSE_MAX_POINTS} points"),
        });
    }
    let psi = three_photon_state(pair, input);
    Ok(&psi * psi.adjoint())
}

fn conditional_from_total(
    rho: &DMatrix<Complex64>,
    pair: &BiphotonAmplitude,
    outcomes: &OutcomeGrid,
    index: OutcomeIndex,
) -> DenseConditional {
    let n = outcomes.frequency_grid().n_points();
    let n2 = pair.grid2().n_points();
    let u = DVector::from_vec(outcomes.element_vector(index));
    let m = &u * u.adjoint();
    let at = |a: usize, j: usize| {
        let (i1, i3) = (a / n, a % n);
        i1 * n2 * n + j * n + i3
    };
    let mut out = DMatrix::zeros(n2, n2);
    for j in 0..n2 {
        for jp in 0..n2 {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..n * n {
                for ap in 0..n * n {
                    let mv = m[(ap, a)];
                    if mv != Complex64::new(0.0, 0.0) {
                        acc += rho[(at(a, j), at(ap, jp))] * mv;
                    }
                }
            }
            out[(j, jp)] = acc;
        }
    }
    let probability = out.trace().re;
    let state = if probability > 0.0 {
        out / Complex64::new(probability, 0.0)
    } else {
        out
    };
    DenseConditional { probability, state }
}

/// Worst disagreement between the dense evaluation and the pure-state
/// pipeline over every outcome: `(max |ΔPr|, max trace distance of ρ(2))`.
pub fn dense_cross_check(pair: &BiphotonAmplitude, input: &WavePacket) -> Result<(f64, f64)> {
    let rho = dense_total_density(pair, input)?;
    let outcomes = OutcomeGrid::new(input.grid());
    let grid2 = pair.grid2();
    let mut worst_p: f64 = 0.0;
    let mut worst_state: f64 = 0.0;
    for d in outcomes.offsets() {
        for k in outcomes.time_indices() {
            let index = OutcomeIndex { k, d };
            let dense = conditional_from_total(&rho, pair, &outcomes, index);
            let (t, om) = outcomes.outcome(index);
            let psi = entangled_outcome_amplitude(pair, input, t, om)?;
            let p_fast = crate::povm::density_from_amplitude(&psi, grid2) * outcomes.cell_area();
            worst_p = worst_p.max((p_fast - dense.probability).abs());
            if p_fast > 1e-12 {
                let v = DVector::from_iterator(psi.len(), psi.iter().copied());
                let v = &v / Complex64::new(v.norm(), 0.0);
                let fast = &v * v.adjoint();
                worst_state = worst_state.max(trace_distance(&fast, &dense.state));
            }
        }
    }
    Ok((worst_p, worst_state))
}

/// Trace distance between the outcome-weighted mixture of conditional
/// photon-2 states and the reduced state `Tr₁ ρ_EPR`.
pub fn no_signaling_distance(pair: &BiphotonAmplitude, input: &WavePacket) -> Result<f64> {
    let n = input.grid().n_points();
    if n > NO_SIGNALING_MAX_POINTS {
        return Err(Error::InvalidParameter {
            name: "n_points",
            reason: format!("no-signaling mixture limited to {NO_SIGNALING_MAX_POINTS} points"),
        });
    }
    let outcomes = OutcomeGrid::new(input.grid());
    let n2 = pair.grid2().n_points();
    let scale = (pair.grid2().delta_omega() / n as f64).sqrt();
    let mut mixture = DMatrix::<Complex64>::zeros(n2, n2);
    for d in outcomes.offsets() {
        for k in outcomes.time_indices() {
            let (t, om) = outcomes.outcome(OutcomeIndex { k, d });
            let psi = entangled_outcome_amplitude(pair, input, t, om)?;
            let phi = DVector::from_iterator(n2, psi.iter().map(|x| x * scale));
            mixture += &phi * phi.adjoint();
        }
    }
    Ok(trace_distance(&mixture, &reduced_state(pair)))
}

/// `Tr₁ ρ_EPR` in orthonormal bin coordinates of photon 2.
pub fn reduced_state(pair: &BiphotonAmplitude) -> DMatrix<Complex64> {
    let w = pair.grid1().delta_omega() * pair.grid2().delta_omega();
    let v = pair.values();
    v.transpose() * v.map(|x| x.conj()) * Complex64::new(w, 0.0)
}

/// `½‖a − b‖₁` for Hermitian `a`, `b`.
pub fn trace_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let diff = a - b;
    0.5 * diff.symmetric_eigenvalues().iter().map(|x| x.abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrequencyGrid;
    use crate::states::GaussianEprParams;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reduced_state_has_unit_trace() {
        let g = FrequencyGrid::new(0.0, 8.0, 8).unwrap();
        let p = GaussianEprParams::new(-0.4, 0.6, 4.0, 4.0).unwrap();
        let pair = BiphotonAmplitude::gaussian_epr(p, &g, &g).unwrap();
        let r = reduced_state(&pair);
        assert_abs_diff_eq!(r.trace().re, 1.0, epsilon = 1e-12);
        assert!((&r - r.adjoint()).camax() < 1e-14);
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states() {
        let mut a = DMatrix::<Complex64>::zeros(3, 3);
        let mut b = a.clone();
        a[(0, 0)] = Complex64::new(1.0, 0.0);
        b[(2, 2)] = Complex64::new(1.0, 0.0);
        assert_abs_diff_eq!(trace_distance(&a, &b), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(&a, &a), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn dense_limits_enforced() {
        let g = FrequencyGrid::new(0.0, 20.0, 20).unwrap();
        let p = GaussianEprParams::new(-0.4, 1.5, 10.0, 10.0).unwrap();
        let pair = BiphotonAmplitude::gaussian_epr(p, &g, &g).unwrap();
        let f = WavePacket::gaussian(10.0, 1.5, 0.0, &g).unwrap();
        assert!(dense_cross_check(&pair, &f).is_err());
        assert!(no_signaling_distance(&pair, &f).is_err());
    }
}
