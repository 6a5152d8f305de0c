//! Flat `key=value` parameter files.
//!
//! One assignment per line. Blank lines and lines starting with `#` are ignored, and
//! whitespace around keys and values is trimmed. A key may appear only once.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rwqda_core::arw::ArwParams;
use rwqda_core::precision::PcsConfig;

use crate::error::{LabError, Result};

/// Keys that describe a model parameter point.
pub const ARW_KEYS: [&str; 9] = [
    "p", "delta", "zeta", "theta", "alpha", "beta", "gamma", "q", "seed",
];

/// Keys read by [`pcs_config`].
pub const PCS_KEYS: [&str; 4] = ["q1", "q2", "delta_screen", "L"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvFile {
    origin: String,
    entries: BTreeMap<String, (String, usize)>,
}

impl KvFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(parse_err(
                    origin,
                    k + 1,
                    1,
                    format!("expected key=value, got {line:?}"),
                ));
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(parse_err(origin, k + 1, 1, "empty key"));
            }
            if entries
                .insert(key.to_string(), (value.trim().to_string(), k + 1))
                .is_some()
            {
                return Err(parse_err(
                    origin,
                    k + 1,
                    1,
                    format!("duplicate key {key:?}"),
                ));
            }
        }
        Ok(KvFile {
            origin: origin.to_string(),
            entries,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Set or replace a value, as a command-line override would.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (value.into(), 0));
    }

    /// Parse a value with `FromStr`, reporting the line on failure.
    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| parse_err(&self.origin, *line, 1, format!("{key}: {e}"))),
        }
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.parsed(key)?
            .ok_or_else(|| LabError::data(format!("{}: missing key {key:?}", self.origin)))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<T>()
                        .map_err(|e| parse_err(&self.origin, *line, 1, format!("{key}: {e}")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    /// Reject keys outside `allowed`, which usually means a typo.
    pub fn check_known(&self, allowed: &[&str]) -> Result<()> {
        for (key, (_, line)) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(parse_err(
                    &self.origin,
                    *line,
                    1,
                    format!("unknown key {key:?}"),
                ));
            }
        }
        Ok(())
    }
}

fn parse_err(origin: &str, line: usize, column: usize, message: impl Into<String>) -> LabError {
    LabError::Parse {
        path: origin.to_string(),
        line,
        column,
        message: message.into(),
    }
}

/// Read a validated parameter point.
pub fn arw_params(kv: &KvFile) -> Result<ArwParams> {
    let mut params = ArwParams::new(
        kv.required("p")?,
        kv.required("delta")?,
        kv.required("zeta")?,
        kv.required("theta")?,
        kv.required("alpha")?,
        kv.required("beta")?,
        kv.required("gamma")?,
    )?;
    if let Some(q) = kv.parsed::<f64>("q")? {
        params = params.with_q(q)?;
    }
    Ok(params)
}

pub fn seed(kv: &KvFile) -> Result<Option<u64>> {
    kv.parsed("seed")
}

/// Overlay the screening keys on `base`.
pub fn pcs_config(kv: &KvFile, base: PcsConfig) -> Result<PcsConfig> {
    let mut c = base;
    if let Some(v) = kv.parsed("q1")? {
        c.q1 = v;
    }
    if let Some(v) = kv.parsed("q2")? {
        c.q2 = v;
    }
    if let Some(v) = kv.parsed("delta_screen")? {
        c.delta_screen = v;
    }
    if let Some(v) = kv.parsed("L")? {
        c.l = v;
    }
    c.validate()?;
    Ok(c)
}

/// An exponent that a grid axis can sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamName {
    Delta,
    Zeta,
    Theta,
    Alpha,
    Beta,
    Gamma,
}

impl ParamName {
    pub const ALL: [ParamName; 6] = [
        ParamName::Delta,
        ParamName::Zeta,
        ParamName::Theta,
        ParamName::Alpha,
        ParamName::Beta,
        ParamName::Gamma,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ParamName::Delta => "delta",
            ParamName::Zeta => "zeta",
            ParamName::Theta => "theta",
            ParamName::Alpha => "alpha",
            ParamName::Beta => "beta",
            ParamName::Gamma => "gamma",
        }
    }

    pub fn get(&self, p: &ArwParams) -> f64 {
        match self {
            ParamName::Delta => p.delta,
            ParamName::Zeta => p.zeta,
            ParamName::Theta => p.theta,
            ParamName::Alpha => p.alpha,
            ParamName::Beta => p.beta,
            ParamName::Gamma => p.gamma,
        }
    }

    /// Set without validation; callers validate the finished point.
    pub fn set(&self, p: &mut ArwParams, v: f64) {
        match self {
            ParamName::Delta => p.delta = v,
            ParamName::Zeta => p.zeta = v,
            ParamName::Theta => p.theta = v,
            ParamName::Alpha => p.alpha = v,
            ParamName::Beta => p.beta = v,
            ParamName::Gamma => p.gamma = v,
        }
    }
}

impl FromStr for ParamName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ParamName::ALL
            .iter()
            .copied()
            .find(|n| n.name() == s)
            .ok_or_else(|| format!("unknown axis parameter {s:?}"))
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `name:min:max:steps`, e.g. `zeta:0.05:0.95:19`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub name: ParamName,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(
        name: ParamName,
        min: f64,
        max: f64,
        steps: usize,
    ) -> std::result::Result<Self, String> {
        if steps < 2 {
            return Err(format!("axis {name} needs at least 2 steps"));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(format!("axis {name}: need finite min < max"));
        }
        Ok(Axis {
            name,
            min,
            max,
            steps,
        })
    }

    /// Evenly spaced values from `min` to `max` inclusive.
    pub fn values(&self) -> Vec<f64> {
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + h * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [name, min, max, steps] = parts[..] else {
            return Err(format!("axis {s:?} is not name:min:max:steps"));
        };
        let num = |v: &str| v.parse::<f64>().map_err(|e| format!("axis {s:?}: {e}"));
        let steps = steps
            .parse::<usize>()
            .map_err(|e| format!("axis {s:?}: {e}"))?;
        Axis::new(name.parse()?, num(min)?, num(max)?, steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_params_file() {
        let kv = KvFile::parse(
            "# point\np = 1000\ndelta=0.7\nzeta=0.3\ntheta=0.2\nalpha=0.3\nbeta=1.2\ngamma=0.6\nseed=9\n",
            "t",
        )
        .unwrap();
        let p = arw_params(&kv).unwrap();
        assert_eq!(p.p, 1000);
        assert_eq!(p.q, 0.5);
        assert_eq!(seed(&kv).unwrap(), Some(9));
        kv.check_known(&ARW_KEYS).unwrap();
    }

    #[test]
    fn reports_line_numbers() {
        let e = KvFile::parse("p=1\n\nnonsense\n", "f.txt").unwrap_err();
        assert!(matches!(e, LabError::Parse { line: 3, .. }), "{e}");
        let e = KvFile::parse("p=1\np=2\n", "f.txt").unwrap_err();
        assert!(e.to_string().contains("duplicate"));
        let kv = KvFile::parse("p=1\ndelta=abc\n", "f.txt").unwrap();
        let e = kv.parsed::<f64>("delta").unwrap_err();
        assert!(e.to_string().starts_with("f.txt:2:"), "{e}");
        assert!(kv.check_known(&["p"]).is_err());
    }

    #[test]
    fn axis_spec() {
        let a: Axis = "zeta:0.05:0.95:19".parse().unwrap();
        let v = a.values();
        assert_eq!(v.len(), 19);
        assert_eq!(v[0], 0.05);
        assert_eq!(v[18], 0.95);
        assert!((v[1] - 0.1).abs() < 1e-15);
        assert!("zeta:0:1:1".parse::<Axis>().is_err());
        assert!("kappa:0:1:3".parse::<Axis>().is_err());
        assert!("zeta:1:0:3".parse::<Axis>().is_err());
    }

    #[test]
    fn pcs_overlay() {
        let kv = KvFile::parse("q1=0.3\nL=12\n", "t").unwrap();
        let c = pcs_config(&kv, PcsConfig::default()).unwrap();
        assert_eq!((c.q1, c.q2, c.l), (0.3, 0.5, 12));
        let bad = KvFile::parse("q1=0\n", "t").unwrap();
        assert!(pcs_config(&bad, PcsConfig::default()).is_err());
    }
}
