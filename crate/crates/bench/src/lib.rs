//! Shared fixtures for the benchmarks.

use photon_teleport_core::{BiphotonAmplitude, FrequencyGrid, GaussianEprParams, SweepConfig, WavePacket};

pub struct Fixture {
    pub grid: FrequencyGrid,
    pub pair: BiphotonAmplitude,
    pub input: WavePacket,
    pub config: SweepConfig,
}

/// Default configuration on an `n`-point grid, at its most ideal sweep point.
pub fn fixture(n: usize) -> Fixture {
    let mut config = SweepConfig::default();
    config.grid.n_points = n;
    let grid = config.frequency_grid().expect("valid grid");
    let (mu, sigma) = *config.points().last().expect("non-empty sweep");
    let params = GaussianEprParams::new(mu, sigma, config.epr.omega1, config.epr.omega2).expect("valid pair");
    let pair = BiphotonAmplitude::gaussian_epr(params, &grid, &grid).expect("pair on grid");
    let input = WavePacket::gaussian(config.input.center, config.input.width, config.input.t0, &grid).expect("input on grid");
    Fixture { grid, pair, input, config }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_builds_on_bench_sizes() {
        for n in [128, 256, 512] {
            let f = fixture(n);
            assert_eq!(f.grid.n_points(), n);
            assert!((f.input.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}
