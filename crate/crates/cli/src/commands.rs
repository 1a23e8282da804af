use serde::Serialize;

use photon_teleport_core::sweep::zero_correlation_independence;
use photon_teleport_core::{
    ideal_limit_state, fidelity, run_sweep, BiphotonAmplitude, Error, GaussianEprParams, Protocol,
    RecordFlag, SweepConfig, SweepRecord, VerificationReport, WavePacket,
};

use crate::load::{load_config, Overrides};
use crate::output::{emit, json, num, opt, CsvDoc};
use crate::{CliError, CommonArgs, Format};

pub const OUTCOME_COLUMNS: [&str; 5] = ["t", "omega_minus", "density", "fidelity_raw", "fidelity_corrected"];

pub const SWEEP_COLUMNS: [&str; 9] = [
    "mu",
    "sigma",
    "sigma2_1mu2",
    "avg_fid_raw",
    "avg_fid_corr",
    "efficiency",
    "completeness_residual",
    "tail_mass",
    "flag",
];

fn load(a: &CommonArgs) -> Result<SweepConfig, CliError> {
    load_config(a.config.as_deref(), Overrides::from(a))
}

fn numerical(e: Error) -> CliError {
    CliError::Failed(e.to_string())
}

#[derive(Debug, Serialize)]
struct SimulateSummary {
    mu: f64,
    sigma: f64,
    sigma2_1mu2: f64,
    mirror: &'static str,
    t: f64,
    omega_minus: f64,
    density: f64,
    fidelity_raw: f64,
    fidelity_corrected: f64,
    ideal_limit_fidelity: Option<f64>,
    mirror_center: f64,
    phase_time: f64,
    interpolated: bool,
    total_probability: f64,
    avg_fid_raw: f64,
    avg_fid_corr: f64,
    efficiency: f64,
    tail_mass: f64,
    input_independence: Option<f64>,
}

impl SimulateSummary {
    fn lines(&self) -> Vec<String> {
        let mut v = vec![
            format!("mu = {}, sigma = {}, sigma2_1mu2 = {}", self.mu, self.sigma, num(self.sigma2_1mu2)),
            format!("mirror = {}", self.mirror),
            format!(
                "outcome: t = {}, omega_minus = {}, density = {}",
                num(self.t),
                num(self.omega_minus),
                num(self.density)
            ),
            format!(
                "fidelity_raw = {}, fidelity_corrected = {}, ideal_limit_fidelity = {}",
                num(self.fidelity_raw),
                num(self.fidelity_corrected),
                opt(self.ideal_limit_fidelity)
            ),
            format!(
                "reconstruction: mirror_center = {}, phase_time = {}, interpolated = {}",
                num(self.mirror_center),
                num(self.phase_time),
                self.interpolated
            ),
            format!(
                "total_probability = {}, avg_fid_raw = {}, avg_fid_corr = {}, efficiency = {}",
                num(self.total_probability),
                num(self.avg_fid_raw),
                num(self.avg_fid_corr),
                num(self.efficiency)
            ),
            format!("tail_mass = {}", num(self.tail_mass)),
        ];
        if let Some(d) = self.input_independence {
            v.push(format!(
                "mu = 0: the conditional state does not depend on the input; \
                 distance between orthogonal inputs and to the photon-2 marginal = {}",
                num(d)
            ));
        }
        v
    }
}

#[derive(Serialize)]
struct OutcomeRow {
    t: f64,
    omega_minus: f64,
    density: f64,
    fidelity_raw: f64,
    fidelity_corrected: f64,
}

#[derive(Serialize)]
struct SimulateJson<'a> {
    config: &'a SweepConfig,
    summary: &'a SimulateSummary,
    outcomes: Vec<OutcomeRow>,
}

pub fn simulate(a: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(a)?;
    let grid = cfg.frequency_grid().map_err(|e| CliError::Usage(e.to_string()))?;
    let outcomes = cfg.outcome_grid().map_err(|e| CliError::Usage(e.to_string()))?;
    let (mu, sigma) = cfg.points()[0];
    let params = GaussianEprParams::new(mu, sigma, cfg.epr.omega1, cfg.epr.omega2).map_err(numerical)?;
    let tail_mass = BiphotonAmplitude::model_tail_mass(&params, &grid, &grid)
        + grid.gaussian_tail_mass(cfg.input.center, cfg.input.width);
    let input = WavePacket::gaussian(cfg.input.center, cfg.input.width, cfg.input.t0, &grid)
        .map_err(|e| CliError::Failed(format!("input packet: {e}")))?;
    let pair = BiphotonAmplitude::gaussian_epr(params, &grid, &grid)
        .map_err(|e| CliError::Failed(format!("EPR pair (mu = {mu}, sigma = {sigma}): {e}")))?;
    let proto = Protocol::new(&pair, &input, cfg.mirror)
        .map_err(numerical)?
        .with_outcomes(outcomes.clone());
    let map = proto.outcome_map();
    let index = match (cfg.simulate.t, cfg.simulate.omega_minus) {
        (Some(t), Some(om)) => outcomes.locate(t, om).map_err(|e| CliError::Usage(e.to_string()))?,
        _ => map.max_density_index(),
    };
    let (t, om) = outcomes.outcome(index);
    let result = proto.teleport_once(t, om).map_err(numerical)?;
    let ideal = ideal_limit_state(&input, t, om, params.omega0(), cfg.mirror)
        .ok()
        .map(|s| fidelity(&s, &result.conditional_state))
        .transpose()
        .map_err(numerical)?;
    let independence = if mu == 0.0 {
        Some(zero_correlation_independence(&cfg, &grid, &input).map_err(numerical)?)
    } else {
        None
    };
    let summary = SimulateSummary {
        mu,
        sigma,
        sigma2_1mu2: params.ideality(),
        mirror: cfg.mirror.name(),
        t,
        omega_minus: om,
        density: result.outcome.probability_density,
        fidelity_raw: result.fidelity_raw,
        fidelity_corrected: result.fidelity_corrected,
        ideal_limit_fidelity: ideal,
        mirror_center: result.reconstruction.mirror_center,
        phase_time: result.reconstruction.phase_time,
        interpolated: result.interpolated,
        total_probability: map.total_probability(),
        avg_fid_raw: map.average_fidelity_raw(),
        avg_fid_corr: map.average_fidelity_corrected(),
        efficiency: map.efficiency(&cfg.window).map_err(numerical)?,
        tail_mass,
        input_independence: independence,
    };
    let lines = summary.lines();
    let bytes = match a.format {
        Format::Csv => {
            let mut doc = CsvDoc::new(&OUTCOME_COLUMNS);
            for r in map.records() {
                doc.row([num(r.t), num(r.omega_minus), num(r.density), num(r.fidelity_raw), num(r.fidelity_corrected)]);
            }
            doc.finish(&lines)
        }
        Format::Json => json(&SimulateJson {
            config: &cfg,
            summary: &summary,
            outcomes: map
                .records()
                .map(|r| OutcomeRow {
                    t: r.t,
                    omega_minus: r.omega_minus,
                    density: r.density,
                    fidelity_raw: r.fidelity_raw,
                    fidelity_corrected: r.fidelity_corrected,
                })
                .collect(),
        }),
    };
    emit(a.out.as_deref(), &bytes)?;
    if a.out.is_some() {
        for l in &lines {
            eprintln!("{l}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow {
    mu: f64,
    sigma: f64,
    sigma2_1mu2: f64,
    avg_fid_raw: Option<f64>,
    avg_fid_corr: Option<f64>,
    efficiency: Option<f64>,
    completeness_residual: Option<f64>,
    tail_mass: f64,
    flag: RecordFlag,
}

impl From<&SweepRecord> for SweepRow {
    fn from(r: &SweepRecord) -> Self {
        Self {
            mu: r.mu,
            sigma: r.sigma,
            sigma2_1mu2: r.sigma2_1_minus_mu2,
            avg_fid_raw: r.avg_fidelity_raw,
            avg_fid_corr: r.avg_fidelity_corrected,
            efficiency: r.efficiency,
            completeness_residual: r.completeness_residual,
            tail_mass: r.tail_mass,
            flag: r.flag,
        }
    }
}

#[derive(Serialize)]
struct SweepJson<'a> {
    config: &'a SweepConfig,
    records: Vec<SweepRow>,
}

pub fn sweep(a: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(a)?;
    let records = run_sweep(&cfg).map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;
    let bytes = match a.format {
        Format::Csv => {
            let mut doc = CsvDoc::new(&SWEEP_COLUMNS);
            for r in &records {
                doc.row([
                    num(r.mu),
                    num(r.sigma),
                    num(r.sigma2_1_minus_mu2),
                    opt(r.avg_fidelity_raw),
                    opt(r.avg_fidelity_corrected),
                    opt(r.efficiency),
                    opt(r.completeness_residual),
                    num(r.tail_mass),
                    r.flag.as_str().to_string(),
                ]);
            }
            doc.finish(&[])
        }
        Format::Json => json(&SweepJson {
            config: &cfg,
            records: records.iter().map(SweepRow::from).collect(),
        }),
    };
    emit(a.out.as_deref(), &bytes)?;
    let flagged = records.iter().filter(|r| r.flag != RecordFlag::Ok).count();
    eprintln!("{} records, {} flagged", records.len(), flagged);
    Ok(())
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    config: &'a SweepConfig,
    passed: bool,
    report: &'a VerificationReport,
}

pub fn verify(a: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(a)?;
    let report = photon_teleport_core::verify(&cfg).map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;
    println!("{report}");
    if let Some(path) = a.out.as_deref() {
        let bytes = match a.format {
            Format::Csv => {
                let mut doc = CsvDoc::new(&["check", "measured", "tolerance", "passed", "detail"]);
                for c in &report.checks {
                    doc.row([c.name.to_string(), num(c.measured), num(c.tolerance), c.passed.to_string(), c.detail.clone()]);
                }
                doc.finish(&report.warnings.iter().map(|w| format!("warning: {w}")).collect::<Vec<_>>())
            }
            Format::Json => json(&VerifyJson {
                config: &cfg,
                passed: report.all_passed(),
                report: &report,
            }),
        };
        emit(Some(path), &bytes)?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(CliError::Failed(format!("failed checks: {}", failed.join(", "))))
    }
}
