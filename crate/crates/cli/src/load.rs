use std::path::Path;

use photon_teleport_core::config::Pairing;
use photon_teleport_core::SweepConfig;

use crate::{CliError, CommonArgs};

/// Command-line replacements applied on top of the file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub n_points: Option<usize>,
}

impl From<&CommonArgs> for Overrides {
    fn from(a: &CommonArgs) -> Self {
        Self {
            mu: a.mu,
            sigma: a.sigma,
            n_points: a.n_points,
        }
    }
}

/// Reads, overrides and validates a configuration. Nothing is computed here.
pub fn load_config(path: Option<&Path>, overrides: Overrides) -> Result<SweepConfig, CliError> {
    let mut cfg = match path {
        None => SweepConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
    };
    if let Some(mu) = overrides.mu {
        cfg.epr.mu = vec![mu];
    }
    if let Some(sigma) = overrides.sigma {
        cfg.epr.sigma = vec![sigma];
    }
    if let Some(n) = overrides.n_points {
        cfg.grid.n_points = n;
    }
    if cfg.epr.pairing == Pairing::Zip && cfg.epr.mu.len() != cfg.epr.sigma.len() && (overrides.mu.is_some() || overrides.sigma.is_some()) {
        cfg.epr.pairing = Pairing::Product;
    }
    cfg.validate()
        .map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn default_without_file() {
        assert_eq!(load_config(None, Overrides::default()).unwrap(), SweepConfig::default());
    }

    #[test]
    fn overrides_replace_lists() {
        let o = Overrides {
            mu: Some(-0.5),
            sigma: None,
            n_points: Some(128),
        };
        let cfg = load_config(None, o).unwrap();
        assert_eq!(cfg.points(), vec![(-0.5, 3.0), (-0.5, 3.5), (-0.5, 4.0)]);
        assert_eq!(cfg.grid.n_points, 128);
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        let f = write("[grid]\nomega_min = 0.0\nomega_max = = 3\n");
        let CliError::Usage(msg) = load_config(Some(f.path()), Overrides::default()).unwrap_err() else {
            panic!("expected usage error")
        };
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let mut text = toml::to_string(&SweepConfig::default()).unwrap();
        text = text.replace("[input]", "[input]\nwidht = 2.0");
        let f = write(&text);
        let CliError::Usage(msg) = load_config(Some(f.path()), Overrides::default()).unwrap_err() else {
            panic!("expected usage error")
        };
        assert!(msg.contains("widht"), "{msg}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let f = write(&toml::to_string(&SweepConfig::default()).unwrap());
        let o = Overrides {
            mu: Some(1.5),
            ..Overrides::default()
        };
        let CliError::Usage(msg) = load_config(Some(f.path()), o).unwrap_err() else {
            panic!("expected usage error")
        };
        assert!(msg.contains("epr.mu[0]"), "{msg}");
    }
}
