//! Run configuration: per-command parameter blocks shared between clap and
//! config files. Every field is optional so that a flag can be laid over a
//! file value, which in turn is laid over the built-in default.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Prior width: a positive number, or `inf` / `uniform` for a flat prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Width(pub f64);

impl FromStr for Width {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "uniform" => Ok(Width(f64::INFINITY)),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0)
                .map(Width)
                .ok_or_else(|| format!("'{s}' is not a positive width or 'inf'")),
        }
    }
}

impl Serialize for Width {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrText {
    Num(f64),
    Text(String),
}

impl<'de> Deserialize<'de> for Width {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match NumOrText::deserialize(d)? {
            NumOrText::Num(v) if v > 0.0 => Ok(Width(v)),
            NumOrText::Num(v) => Err(serde::de::Error::custom(format!("width {v} must be positive"))),
            NumOrText::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Prior policy of the receiver sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaChoice {
    Uniform,
    Optimize,
    Fixed(f64),
}

impl FromStr for SigmaChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "optimize" | "opt" => Ok(SigmaChoice::Optimize),
            other => match other.parse::<Width>()? {
                Width(v) if v.is_infinite() => Ok(SigmaChoice::Uniform),
                Width(v) => Ok(SigmaChoice::Fixed(v)),
            },
        }
    }
}

impl Serialize for SigmaChoice {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SigmaChoice::Uniform => s.serialize_str("uniform"),
            SigmaChoice::Optimize => s.serialize_str("optimize"),
            SigmaChoice::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for SigmaChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match NumOrText::deserialize(d)? {
            NumOrText::Num(v) => format!("{v}").parse().map_err(serde::de::Error::custom),
            NumOrText::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

macro_rules! params {
    ($(#[$sm:meta])* $name:ident { $( $(#[$m:meta])* $field:ident : $ty:ty ),* $(,)? }) => {
        $(#[$sm])*
        #[derive(Debug, Clone, Default, PartialEq, clap::Args, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $(
                $(#[$m])*
                #[arg(long)]
                #[serde(default, skip_serializing_if = "Option::is_none")]
                pub $field: Option<$ty>,
            )*
            /// Config file (TOML; JSON when the name ends in .json).
            #[arg(long)]
            #[serde(skip)]
            pub config: Option<PathBuf>,
            /// Master seed [default: $GB_SEED or built-in].
            #[arg(long)]
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub seed: Option<u64>,
            /// Worker threads (results do not depend on it).
            #[arg(long)]
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub threads: Option<usize>,
            /// Write CSV here instead of stdout.
            #[arg(long)]
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub out: Option<PathBuf>,
        }

        impl $name {
            /// Values set here win over values in `file`.
            pub fn overlay(self, file: Self) -> Self {
                $name {
                    $( $field: self.$field.or(file.$field), )*
                    config: self.config,
                    seed: self.seed.or(file.seed),
                    threads: self.threads.or(file.threads),
                    out: self.out.or(file.out),
                }
            }

            /// The parameters that determine the output; seed, threads and
            /// destination are dropped.
            pub fn for_hash(&self) -> Self {
                $name {
                    config: None,
                    seed: None,
                    threads: None,
                    out: None,
                    ..self.clone()
                }
            }
        }

        impl Overlay for $name {
            fn config_path(&self) -> Option<&Path> {
                self.config.as_deref()
            }

            fn overlay_file(self, file: Self) -> Self {
                self.overlay(file)
            }
        }
    };
}

pub trait Overlay: Sized + for<'de> Deserialize<'de> {
    fn config_path(&self) -> Option<&Path>;
    fn overlay_file(self, file: Self) -> Self;
}

params! {
    CapacityParams {
        /// Pure-loss/thermal-loss channel with transmittance ETA.
        loss: f64,
        /// Amplifier with gain G.
        amp: f64,
        /// Generic channel gain (use with --m).
        tau: f64,
        /// Generic channel added noise.
        m: f64,
        /// Thermal photons of the environment (with --loss / --amp) [default: 0].
        nth: f64,
        /// Input mean photon numbers, comma separated.
        #[arg(value_delimiter = ',')]
        nbar: Vec<f64>,
    }
}

params! {
    GridParams {
        /// Channel gain; < 1 loss, > 1 amplifier [default: 0.7].
        tau: f64,
        /// [default: 0.01]
        nbar_min: f64,
        /// [default: 10000]
        nbar_max: f64,
        /// [default: 0.001]
        nth_min: f64,
        /// [default: 1000]
        nth_max: f64,
        /// Points per axis [default: 40].
        resolution: usize,
        /// Axis spacing, log or linear [default: log].
        spacing: String,
        /// Also write the crossover locus (n_th, n_bar_c) to this file.
        crossover_out: PathBuf,
    }
}

params! {
    WaterfillParams {
        /// Noise eigenvalues, comma separated.
        #[arg(value_delimiter = ',')]
        lambdas: Vec<f64>,
        /// Total signal power.
        budget: f64,
    }
}

params! {
    AdditivityParams {
        /// Random scenarios [default: 10000].
        trials: usize,
        /// Fixed number of modes N (overrides the 1..=max range).
        modes: usize,
        /// [default: 4]
        max_modes: usize,
        /// Bound on each squeezing parameter [default: 2].
        max_squeezing: f64,
        /// Gap below -tolerance counts as a violation [default: 1e-9].
        tolerance: f64,
    }
}

params! {
    BecerraParams {
        /// QAM order 4, 16 or 64 [default: 4].
        order: usize,
        /// Receiver stages L [default: 64].
        stages: usize,
        /// Channel transmittances, comma separated [default: 0.7].
        #[arg(value_delimiter = ',')]
        eta: Vec<f64>,
        /// Input mean photon numbers, comma separated.
        #[arg(value_delimiter = ',')]
        nbar: Vec<f64>,
        /// Prior: uniform, optimize, or a width [default: uniform].
        sigma: SigmaChoice,
        /// Monte-Carlo trials per symbol [default: 200000].
        trials: u64,
        /// Trials per symbol during the sigma scan [default: 20000].
        scan_trials: u64,
        /// Detector efficiency [default: 1].
        detector_efficiency: f64,
        /// Dark-count probability per stage [default: 0].
        dark_count: f64,
    }
}

params! {
    HeterodyneParams {
        /// QAM order 4, 16 or 64 [default: 64].
        order: usize,
        /// Channel transmittance [default: 0.5].
        eta: f64,
        /// Transmitted prior widths (inf = uniform), comma separated [default: inf].
        #[arg(value_delimiter = ',')]
        sigma: Vec<Width>,
        /// Input mean photon numbers, comma separated.
        #[arg(value_delimiter = ',')]
        nbar: Vec<f64>,
    }
}

params! {
    SelftestParams {
        /// Scale of the randomized checks [default: 1].
        scale: f64,
    }
}

/// Reads `path` as TOML, or JSON if it ends in `.json`.
pub fn read_file<P: for<'de> Deserialize<'de>>(path: &Path) -> Result<P, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Flags over file over defaults.
pub fn resolve<P: Overlay>(flags: P) -> Result<P, CliError> {
    match flags.config_path().map(Path::to_path_buf) {
        Some(path) => {
            let file: P = read_file(&path)?;
            Ok(flags.overlay_file(file))
        }
        None => Ok(flags),
    }
}

/// Seed precedence: flag/file, then `GB_SEED`, then the built-in default.
pub fn master_seed(explicit: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var("GB_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("GB_SEED='{v}' is not an unsigned integer"))),
        Err(_) => Ok(gaussbench::rng::DEFAULT_SEED),
    }
}

/// SHA-256 over the command name, the seed and the resolved parameters in
/// canonical JSON.
pub fn config_hash<T: Serialize>(command: &str, seed: u64, resolved: &T) -> String {
    let body = serde_json::json!({
        "command": command,
        "seed": seed,
        "params": resolved,
    });
    let digest = Sha256::digest(body.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
