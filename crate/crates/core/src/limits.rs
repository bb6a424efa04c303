//! Resource caps shared by the exponential parts of the toolkit.
//!
//! Defaults can be overridden through the `NMLKIT_LIMITS` environment
//! variable, a comma separated `key=value` list, e.g.
//! `NMLKIT_LIMITS="atoms=20,dp_width=10"`. Recognised keys:
//!
//! | key            | default     | meaning                                          |
//! |----------------|-------------|--------------------------------------------------|
//! | `atoms`        | 24          | atoms enumerated by truth-table oracles          |
//! | `exact_tw`     | 24          | kernel vertices for exact treewidth              |
//! | `dp_width`     | 14          | decomposition width accepted by the DP           |
//! | `dl_rules`     | 20          | defaults enumerated by `extension_exists`        |
//! | `ae_beliefs`   | 20          | L-subformulas enumerated by `expansion_exists`   |
//! | `mso_single`   | 22          | universe size under one SO quantifier            |
//! | `mso_nested`   | 16          | universe size under nested SO quantifiers        |
//! | `mso_steps`    | 400000000   | node evaluations per MSO check                   |
//! | `pseudo_lb`    | 64          | vertices for `pseudo_clique_lower_bound`         |

use serde::Serialize;

use crate::error::{Error, Result};

pub const ENV_VAR: &str = "NMLKIT_LIMITS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Limits {
    pub atoms: usize,
    pub exact_tw: usize,
    pub dp_width: usize,
    pub dl_rules: usize,
    pub ae_beliefs: usize,
    pub mso_single: usize,
    pub mso_nested: usize,
    pub mso_steps: u64,
    pub pseudo_lb: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            atoms: 24,
            exact_tw: 24,
            dp_width: 14,
            dl_rules: 20,
            ae_beliefs: 20,
            mso_single: 22,
            mso_nested: 16,
            mso_steps: 400_000_000,
            pseudo_lb: 64,
        }
    }
}

impl Limits {
    /// Defaults overridden by `NMLKIT_LIMITS`, if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(ENV_VAR) {
            Ok(spec) => Limits::default().with_overrides(&spec),
            Err(_) => Ok(Limits::default()),
        }
    }

    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("{ENV_VAR}: expected key=value, got `{item}`")))?;
            let value: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("{ENV_VAR}: `{value}` is not a number")))?;
            let v = value as usize;
            match key.trim() {
                "atoms" => self.atoms = v,
                "exact_tw" => self.exact_tw = v,
                "dp_width" => self.dp_width = v,
                "dl_rules" => self.dl_rules = v,
                "ae_beliefs" => self.ae_beliefs = v,
                "mso_single" => self.mso_single = v,
                "mso_nested" => self.mso_nested = v,
                "mso_steps" => self.mso_steps = value,
                "pseudo_lb" => self.pseudo_lb = v,
                other => return Err(Error::Invalid(format!("{ENV_VAR}: unknown key `{other}`"))),
            }
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse() {
        let l = Limits::default().with_overrides("atoms=10, dp_width=3").unwrap();
        assert_eq!(l.atoms, 10);
        assert_eq!(l.dp_width, 3);
        assert_eq!(l.exact_tw, 24);
    }

    #[test]
    fn bad_override_rejected() {
        assert!(Limits::default().with_overrides("atoms").is_err());
        assert!(Limits::default().with_overrides("bogus=1").is_err());
        assert!(Limits::default().with_overrides("atoms=x").is_err());
    }
}
