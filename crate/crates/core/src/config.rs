//! Flat key-value parameter files.
//!
//! ```text
//! lambda = 0.1
//! r = 1.0
//! theta = 10
//! alpha = 4      # or: delta = 0.5
//! p = 0.3
//! mu = 0.1
//! seed = 7
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NetworkParams;

/// Every recognised key, each optional so files can be partial and
/// command-line flags can fill the gaps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub lambda: Option<f64>,
    pub r: Option<f64>,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub p: Option<f64>,
    pub mu: Option<f64>,
    pub seed: Option<u64>,
}

impl ParamFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if file.alpha.is_some() && file.delta.is_some() {
            return Err(Error::Config("give either alpha or delta, not both".into()));
        }
        Ok(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Keys set in `other` win.
    pub fn overlay(self, other: &Self) -> Self {
        // An explicit alpha or delta replaces both of the file's keys.
        let (alpha, delta) = if other.alpha.is_some() || other.delta.is_some() {
            (other.alpha, other.delta)
        } else {
            (self.alpha, self.delta)
        };
        Self {
            lambda: other.lambda.or(self.lambda),
            r: other.r.or(self.r),
            theta: other.theta.or(self.theta),
            alpha,
            delta,
            p: other.p.or(self.p),
            mu: other.mu.or(self.mu),
            seed: other.seed.or(self.seed),
        }
    }

    pub fn delta_value(&self) -> Option<f64> {
        self.delta.or(self.alpha.map(|a| 2.0 / a))
    }

    /// Fills unset keys from `defaults` and validates.
    pub fn network(&self, defaults: &NetworkParams) -> Result<NetworkParams> {
        if let Some(a) = self.alpha {
            if !(a > 2.0) {
                return Err(Error::Domain(format!("path-loss exponent must exceed 2, got {a}")));
            }
        }
        NetworkParams::new(
            self.lambda.unwrap_or(defaults.lambda),
            self.r.unwrap_or(defaults.r),
            self.theta.unwrap_or(defaults.theta),
            self.delta_value().unwrap_or(defaults.delta),
            self.p.unwrap_or(defaults.p),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overlays() {
        let f = ParamFile::parse("lambda = 0.1\nalpha = 4\np = 0.3\nseed = 9\n").unwrap();
        assert_eq!(f.delta_value(), Some(0.5));
        let flags = ParamFile {
            delta: Some(0.8),
            p: Some(0.4),
            ..Default::default()
        };
        let merged = f.overlay(&flags);
        assert_eq!(merged.delta_value(), Some(0.8));
        assert_eq!(merged.alpha, None);
        assert_eq!(merged.p, Some(0.4));
        assert_eq!(merged.seed, Some(9));
        let defaults = NetworkParams::new(1.0, 1.0, 1.0, 0.5, 0.5).unwrap();
        let n = merged.network(&defaults).unwrap();
        assert_eq!((n.lambda, n.r, n.theta, n.delta, n.p), (0.1, 1.0, 1.0, 0.8, 0.4));
    }

    #[test]
    fn rejects_unknown_and_conflicting_keys() {
        assert!(ParamFile::parse("lambda = 1\nbogus = 2\n").is_err());
        assert!(ParamFile::parse("alpha = 4\ndelta = 0.5\n").is_err());
        assert!(ParamFile::parse("lambda = \"x\"").is_err());
    }
}
