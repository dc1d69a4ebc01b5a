//! Flat key-value configuration file: one `key = value` pair per line,
//! `#` comments, keys namespaced as `plant.*`, `controller.*`,
//! `disturbance.*`, `sim.*`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Every key the configuration file accepts, with its CLI equivalent where
/// one exists.
pub const KNOWN_KEYS: &[&str] = &[
    "plant.kind",             // --plant
    "controller.kind",        // --controller
    "controller.alpha",
    "controller.t_c",
    "controller.beta0",
    "controller.epsilon",
    "controller.barrier",     // psd | pd
    "controller.beta_bar",
    "controller.k_bar",
    "controller.k0",
    "disturbance.rho",        // --rho
    "disturbance.a1",
    "disturbance.b1",
    "disturbance.omega1",
    "disturbance.omega2",
    "disturbance.rho_schedule",
    "disturbance.rescale_bias",
    "sim.dt",                 // --dt
    "sim.t_end",              // --t-end
    "sim.stride",             // --stride
    "sim.deadzone",
    "sim.sigma0_n",           // --sigma0-n
    "sim.sigma0_b",           // --sigma0-b
];

/// Parsed configuration document plus the resolved-value record that ends up
/// in the run manifest.
#[derive(Debug, Default, Clone)]
pub struct FlatConfig {
    values: BTreeMap<String, String>,
}

impl FlatConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError(format!("line {}: unknown key `{key}`", lineno + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| ConfigError(format!("key `{key}`: `{v}` is not a number")))
            })
            .transpose()
    }

    pub fn get_i32(&self, key: &str) -> Result<Option<i32>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| ConfigError(format!("key `{key}`: `{v}` is not an integer")))
            })
            .transpose()
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| ConfigError(format!("key `{key}`: `{v}` is not a count")))
            })
            .transpose()
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.get(key)
            .map(|v| match v {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(ConfigError(format!("key `{key}`: `{v}` is not true/false"))),
            })
            .transpose()
    }

}

/// Parse a schedule literal `t0:v0,t1:v1,...`.
pub fn parse_schedule(text: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
    text.split(',')
        .map(|seg| {
            let (t, v) = seg
                .split_once(':')
                .ok_or_else(|| ConfigError(format!("schedule segment `{seg}`: expected `t:value`")))?;
            let t = t
                .trim()
                .parse()
                .map_err(|_| ConfigError(format!("schedule time `{t}` is not a number")))?;
            let v = v
                .trim()
                .parse()
                .map_err(|_| ConfigError(format!("schedule value `{v}` is not a number")))?;
            Ok((t, v))
        })
        .collect()
}
