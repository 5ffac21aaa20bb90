use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serrin::forward::GridSpec;

/// Settings of a branch run. File values are overridden by flags.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: u32,
    pub m: usize,
    pub degree: u32,
    pub nr: usize,
    pub nt: usize,
    pub s_max: f64,
    pub ds: f64,
    pub tol: f64,
    pub output_dir: PathBuf,
}

/// Optional values, one per configurable key.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<u32>,
    pub m: Option<usize>,
    pub degree: Option<u32>,
    pub nr: Option<usize>,
    pub nt: Option<usize>,
    pub s_max: Option<f64>,
    pub ds: Option<f64>,
    pub tol: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    /// Reads `key = value` lines. `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config file {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Overrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", lineno + 1);
            };
            let (key, value) = (key.trim(), value.trim());
            let bad = || format!("line {}: bad value `{value}` for `{key}`", lineno + 1);
            match key {
                "n" => out.n = Some(value.parse().with_context(bad)?),
                "m" => out.m = Some(value.parse().with_context(bad)?),
                "K" | "degree" => out.degree = Some(value.parse().with_context(bad)?),
                "Nr" | "nr" => out.nr = Some(value.parse().with_context(bad)?),
                "Nt" | "nt" => out.nt = Some(value.parse().with_context(bad)?),
                "s_max" => out.s_max = Some(value.parse().with_context(bad)?),
                "ds" => out.ds = Some(value.parse().with_context(bad)?),
                "tol" => out.tol = Some(value.parse().with_context(bad)?),
                "output_dir" => out.output_dir = Some(PathBuf::from(value)),
                _ => bail!("line {}: unknown key `{key}`", lineno + 1),
            }
        }
        Ok(out)
    }

    /// `self` where set, otherwise `base`.
    pub fn over(self, base: Overrides) -> Overrides {
        Overrides {
            n: self.n.or(base.n),
            m: self.m.or(base.m),
            degree: self.degree.or(base.degree),
            nr: self.nr.or(base.nr),
            nt: self.nt.or(base.nt),
            s_max: self.s_max.or(base.s_max),
            ds: self.ds.or(base.ds),
            tol: self.tol.or(base.tol),
            output_dir: self.output_dir.or(base.output_dir),
        }
    }

    /// Fills gaps with defaults and validates.
    pub fn resolve(self) -> Result<RunConfig> {
        let n = self.n.unwrap_or(2);
        let m = self.m.unwrap_or(1);
        let grid = GridSpec::default_for(n, m);
        let cfg = RunConfig {
            n,
            m,
            degree: self.degree.unwrap_or(grid.degree),
            nr: self.nr.unwrap_or(grid.nr),
            nt: self.nt.unwrap_or(grid.nt),
            s_max: self.s_max.unwrap_or(0.2),
            ds: self.ds.unwrap_or(0.02),
            tol: self.tol.unwrap_or(1e-9),
            output_dir: self.output_dir.unwrap_or_else(|| PathBuf::from(".")),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.n, self.m, self.degree, self.nr, self.nt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.degree == 0 {
            bail!("n, m and K must be positive");
        }
        if !(self.ds > 0.0) || !(self.tol > 0.0) || !(self.s_max >= 0.0) {
            bail!("ds and tol must be positive and s_max non-negative");
        }
        if !(self.ds.is_finite() && self.tol.is_finite() && self.s_max.is_finite()) {
            bail!("ds, tol and s_max must be finite");
        }
        self.grid().validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file = Overrides::parse("n = 3\n# comment\nK = 4  # trailing\nNt = 18\nds = 0.05\n").unwrap();
        let flags = Overrides {
            n: Some(1),
            ..Default::default()
        };
        let cfg = flags.over(file).resolve().unwrap();
        assert_eq!(cfg.n, 1);
        assert_eq!(cfg.degree, 4);
        assert_eq!(cfg.nt, 18);
        assert_eq!(cfg.ds, 0.05);
        assert_eq!(cfg.nr, 24);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Overrides::parse("n 3").is_err());
        assert!(Overrides::parse("q = 1").is_err());
        assert!(Overrides::parse("n = -1").is_err());
        let under = Overrides {
            degree: Some(8),
            nt: Some(20),
            ..Default::default()
        };
        assert!(under.resolve().is_err());
    }
}
