use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use shardmatch_core::matching::MatchParams;
use shardmatch_core::partial::GapParams;
use shardmatch_core::Error;

use crate::args::ParamArgs;

/// Version of every JSON report and CSV table the CLI writes.
pub const REPORT_FORMAT_VERSION: u32 = 1;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(Error::InvalidWeights(_)) => EXIT_USAGE,
            CliError::Core(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Core(_) => EXIT_DATA,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Turns a validation failure into a usage error.
pub fn usage<T>(r: shardmatch_core::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

/// Effective scoring parameters: defaults, then `--params`, then flags.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunParams {
    pub matching: MatchParams,
    pub gap: GapParams,
}

impl RunParams {
    pub fn resolve(args: &ParamArgs) -> CliResult<Self> {
        let mut p = match &args.params {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            None => RunParams::default(),
        };
        if let Some(w) = &args.weights {
            p.matching.weights = [w[0], w[1], w[2]];
        }
        if let Some(step) = args.sweep_step_deg {
            if !(step.is_finite() && step > 0.0 && step <= 360.0) {
                return Err(CliError::Usage(format!("--sweep-step-deg {step} must lie in (0, 360]")));
            }
            p.matching.sweep_step = step.to_radians();
            p.gap.step_deg = step;
        }
        usage(p.matching.validate())?;
        usage(p.gap.validate())?;
        Ok(p)
    }
}

/// Envelope shared by every JSON report.
#[derive(Debug, Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub format_version: u32,
    pub command: &'a str,
    pub config: C,
    pub result: R,
}

pub fn report_json<C: Serialize, R: Serialize>(command: &str, config: C, result: R) -> CliResult<String> {
    let r = Report {
        format_version: REPORT_FORMAT_VERSION,
        command,
        config,
        result,
    };
    let mut text = serde_json::to_string_pretty(&r).map_err(Error::from)?;
    text.push('\n');
    Ok(text)
}

pub fn ensure_dir(p: &Path) -> CliResult<()> {
    fs::create_dir_all(p).map_err(|e| Error::io(p, e).into())
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

pub fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// Rejects an output directory that is one of the inputs.
pub fn distinct_out(out: &Path, inputs: &[&Path]) -> CliResult<()> {
    let canon = |p: &Path| fs::canonicalize(p).ok();
    if let Some(o) = canon(out) {
        if inputs.iter().any(|i| canon(i).as_ref() == Some(&o)) {
            return Err(CliError::Usage(format!("--out {} must differ from the inputs", out.display())));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_defaults() {
        let args = ParamArgs {
            params: None,
            weights: Some(vec![0.5, 0.25, 0.25]),
            sweep_step_deg: Some(4.0),
        };
        let p = RunParams::resolve(&args).unwrap();
        assert_eq!(p.matching.weights, [0.5, 0.25, 0.25]);
        assert_eq!(p.gap.step_deg, 4.0);
        assert!((p.matching.sweep_step - 4f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn invalid_overrides_are_usage_errors() {
        let bad = |weights: Option<Vec<f64>>, step: Option<f64>| {
            RunParams::resolve(&ParamArgs {
                params: None,
                weights,
                sweep_step_deg: step,
            })
            .unwrap_err()
            .exit_code()
        };
        assert_eq!(bad(Some(vec![0.6, 0.6, -0.2]), None), EXIT_USAGE);
        assert_eq!(bad(None, Some(0.0)), EXIT_USAGE);
        assert_eq!(bad(None, Some(f64::NAN)), EXIT_USAGE);
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(CliError::from(Error::IllConditioned(1e20)).exit_code(), EXIT_NUMERIC);
        assert_eq!(CliError::from(Error::Empty("x")).exit_code(), EXIT_DATA);
        assert_eq!(CliError::from(Error::InvalidWeights([1.0; 3])).exit_code(), EXIT_USAGE);
    }
}
