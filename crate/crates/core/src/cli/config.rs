//! Tool configuration: defaults, a flat `key=value` file, then flags.

use std::path::Path;

use crate::denoise::{DenoiseConfig, Method};
use crate::error::{Error, Result};
use crate::hamiltonian::LaplacianMode;
use crate::image::SmoothingSpec;

/// Every knob of the pipeline plus the noise seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CliConfig {
    pub laplacian_mode: LaplacianMode,
    pub alpha: f64,
    pub mass: f64,
    pub threshold_multiplier: f64,
    pub bin_count: usize,
    pub smoothing: SmoothingSpec,
    pub max_dim: usize,
    pub seed: u64,
}

impl Default for CliConfig {
    fn default() -> Self {
        let d = DenoiseConfig::default();
        Self {
            laplacian_mode: d.laplacian_mode,
            alpha: d.alpha,
            mass: d.mass,
            threshold_multiplier: d.threshold_multiplier,
            bin_count: d.bin_count,
            smoothing: d.smoothing,
            max_dim: d.max_dim,
            seed: 0,
        }
    }
}

/// Values given on the command line; `None` leaves the file or default value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub laplacian_mode: Option<LaplacianMode>,
    pub alpha: Option<f64>,
    pub mass: Option<f64>,
    pub threshold_multiplier: Option<f64>,
    pub bin_count: Option<usize>,
    pub smoothing_sigma: Option<f64>,
    pub smoothing_radius: Option<usize>,
    pub no_smoothing: bool,
    pub max_dim: Option<usize>,
    pub seed: Option<u64>,
}

fn parse_value<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean `{value}` for `{key}`"))),
    }
}

impl CliConfig {
    /// Applies `key=value` lines. Blank lines and `#` comments are skipped;
    /// unknown keys are errors.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut radius_given = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "laplacian_mode" => self.laplacian_mode = value.parse()?,
                "alpha" => self.alpha = parse_value(key, value)?,
                "mass" => self.mass = parse_value(key, value)?,
                "threshold_multiplier" | "c" => self.threshold_multiplier = parse_value(key, value)?,
                "bin_count" | "bins" => self.bin_count = parse_value(key, value)?,
                "smoothing" => self.smoothing.enabled = parse_bool(key, value)?,
                "smoothing_sigma" => {
                    self.smoothing.sigma = parse_value(key, value)?;
                    if !radius_given {
                        self.smoothing.kernel_radius = SmoothingSpec::with_sigma(self.smoothing.sigma).kernel_radius;
                    }
                }
                "smoothing_radius" => {
                    self.smoothing.kernel_radius = parse_value(key, value)?;
                    radius_given = true;
                }
                "max_dim" => self.max_dim = parse_value(key, value)?,
                "seed" => self.seed = parse_value(key, value)?,
                other => return Err(Error::Config(format!("line {}: unknown key `{other}`", lineno + 1))),
            }
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    /// A given sigma turns smoothing on; `no_smoothing` wins over both.
    pub fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(v) = o.laplacian_mode {
            self.laplacian_mode = v;
        }
        if let Some(v) = o.alpha {
            self.alpha = v;
        }
        if let Some(v) = o.mass {
            self.mass = v;
        }
        if let Some(v) = o.threshold_multiplier {
            self.threshold_multiplier = v;
        }
        if let Some(v) = o.bin_count {
            self.bin_count = v;
        }
        if let Some(sigma) = o.smoothing_sigma {
            self.smoothing = SmoothingSpec::with_sigma(sigma);
        }
        if let Some(r) = o.smoothing_radius {
            self.smoothing.kernel_radius = r;
        }
        if o.no_smoothing {
            self.smoothing.enabled = false;
        }
        if let Some(v) = o.max_dim {
            self.max_dim = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
    }

    pub fn denoise_config(&self, method: Method) -> Result<DenoiseConfig> {
        let config = DenoiseConfig {
            laplacian_mode: self.laplacian_mode,
            alpha: self.alpha,
            mass: self.mass,
            threshold_multiplier: self.threshold_multiplier,
            bin_count: self.bin_count,
            smoothing: self.smoothing,
            max_dim: self.max_dim,
            method,
        };
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = CliConfig::default();
        assert_eq!(c.alpha, 1.0);
        assert_eq!(c.threshold_multiplier, 1.0);
        assert_eq!(c.bin_count, 64);
        assert!(!c.smoothing.enabled);
        assert!(c.denoise_config(Method::SelectedModes).is_ok());
    }

    #[test]
    fn file_then_flags() {
        let mut c = CliConfig::default();
        c.apply_text(
            "# comment\nalpha = 2\nc=1.5\nbins=32\nlaplacian_mode=no_row_wrap\n\nsmoothing=on\nsmoothing_sigma=2 # trailing\nseed=9\n",
        )
        .unwrap();
        assert_eq!(c.alpha, 2.0);
        assert_eq!(c.threshold_multiplier, 1.5);
        assert_eq!(c.bin_count, 32);
        assert_eq!(c.laplacian_mode, LaplacianMode::NoRowWrap);
        assert!(c.smoothing.enabled);
        assert_eq!(c.smoothing.kernel_radius, 6);
        assert_eq!(c.seed, 9);

        c.apply_overrides(&Overrides {
            alpha: Some(0.5),
            no_smoothing: true,
            ..Overrides::default()
        });
        assert_eq!(c.alpha, 0.5);
        assert_eq!(c.threshold_multiplier, 1.5);
        assert!(!c.smoothing.enabled);
    }

    #[test]
    fn bad_lines_are_rejected() {
        for text in [
            "alpha",
            "gamma=1",
            "alpha=abc",
            "smoothing=maybe",
            "laplacian_mode=torus",
        ] {
            assert!(CliConfig::default().apply_text(text).is_err(), "{text}");
        }
    }

    #[test]
    fn invalid_values_fail_validation() {
        let mut c = CliConfig::default();
        c.apply_overrides(&Overrides {
            alpha: Some(-1.0),
            ..Overrides::default()
        });
        assert!(c.denoise_config(Method::AllModes).is_err());
    }
}
