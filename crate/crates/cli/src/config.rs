//! Flat `key=value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Keys use the long
//! flag names with `-` replaced by `_`. Values given on the command line
//! override values read from a file.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

macro_rules! run_config {
    ($($field:ident : $ty:ty),* $(,)?) => {
        /// Every tunable of a run. Unset fields fall back to command defaults.
        #[derive(Debug, Clone, Default, PartialEq)]
        pub struct RunConfig {
            $(pub $field: Option<$ty>,)*
        }

        impl RunConfig {
            /// Keys accepted in a config file.
            pub const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
                match key {
                    $(stringify!($field) => {
                        self.$field = Some(value.parse::<$ty>().map_err(|e| {
                            CliError::Validation(format!("config key `{key}`: cannot parse `{value}`: {e}"))
                        })?);
                    })*
                    other => {
                        return Err(CliError::Validation(format!("unknown config key `{other}`")));
                    }
                }
                Ok(())
            }

            /// Fields set in `other` replace those in `self`.
            pub fn overlay(mut self, other: &RunConfig) -> RunConfig {
                $(if other.$field.is_some() {
                    self.$field = other.$field.clone();
                })*
                self
            }

            /// `(key, value)` pairs of the set fields, in declaration order.
            pub fn entries(&self) -> Vec<(&'static str, String)> {
                let mut out = Vec::new();
                $(if let Some(v) = &self.$field {
                    out.push((stringify!($field), ConfigValue::render(v)));
                })*
                out
            }
        }
    };
}

run_config! {
    n: u64,
    alpha: f64,
    beta: f64,
    from: f64,
    to: f64,
    lower: u64,
    c: f64,
    eps: f64,
    delta: f64,
    m: u64,
    t: f64,
    horizon: f64,
    replicas: usize,
    seed: u64,
    cap: f64,
    eps_min: f64,
    eps_max: f64,
    step: f64,
    svg: PathBuf,
    format: Format,
    output: PathBuf,
}

trait ConfigValue {
    fn render(&self) -> String;
}

macro_rules! plain_value {
    ($($ty:ty),*) => {$(
        impl ConfigValue for $ty {
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

plain_value!(u64, usize, f64, Format);

impl ConfigValue for PathBuf {
    fn render(&self) -> String {
        self.display().to_string()
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Validation(format!("config line {}: expected key=value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.entries() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_and_blanks() {
        let cfg = RunConfig::parse("# run\n\nn = 40\nalpha=1.5\nformat=json\n").unwrap();
        assert_eq!(cfg.n, Some(40));
        assert_eq!(cfg.alpha, Some(1.5));
        assert_eq!(cfg.format, Some(Format::Json));
        assert_eq!(cfg.beta, None);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(RunConfig::parse("colour=red").is_err());
        assert!(RunConfig::parse("n").is_err());
        assert!(RunConfig::parse("n=forty").is_err());
        assert!(RunConfig::parse("format=xml").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::parse("n=40\nseed=3\n").unwrap();
        let flags = RunConfig {
            seed: Some(9),
            ..Default::default()
        };
        let merged = file.overlay(&flags);
        assert_eq!((merged.n, merged.seed), (Some(40), Some(9)));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), -1e6f64..1e6]
    }

    prop_compose! {
        fn configs()(
            n in proptest::option::of(any::<u64>()),
            alpha in proptest::option::of(finite()),
            c in proptest::option::of(finite()),
            t in proptest::option::of(finite()),
            replicas in proptest::option::of(any::<usize>()),
            seed in proptest::option::of(any::<u64>()),
            cap in proptest::option::of(prop_oneof![finite(), Just(f64::INFINITY)]),
            json in proptest::option::of(any::<bool>()),
            output in proptest::option::of("[a-zA-Z0-9_./-]{1,24}"),
        ) -> RunConfig {
            RunConfig {
                n, alpha, c, t, replicas, seed, cap,
                format: json.map(|j| if j { Format::Json } else { Format::Csv }),
                output: output.map(PathBuf::from),
                ..Default::default()
            }
        }
    }

    proptest! {
        #[test]
        fn round_trips_through_text(cfg in configs()) {
            let text = cfg.to_string();
            prop_assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        }
    }
}
