//! TOML configuration files. Unknown keys are rejected.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::SenseConfig;
use crate::scene::{RadioConfig, Scene};

/// Contents of a `simulate --scene` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Packets to synthesize, including the reference packet 0.
    pub packets: usize,
    /// When set, overrides `scene.noise_power` relative to the strongest
    /// target path.
    #[serde(default)]
    pub snr_db: Option<f64>,
    pub radio: RadioConfig,
    pub scene: Scene,
}

impl SimulationConfig {
    pub fn resolved_scene(&self) -> Scene {
        match self.snr_db {
            Some(db) => self.scene.clone().with_snr_db(db),
            None => self.scene.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.packets < 2 {
            return Err(Error::config("packets must be at least 2"));
        }
        self.radio.validate()?;
        self.scene.validate()
    }
}

pub fn parse_toml<T: DeserializeOwned>(text: &str, origin: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_toml(&text, path)
}

pub fn load_simulation_config(path: &Path) -> Result<SimulationConfig> {
    let cfg: SimulationConfig = load(path)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_sense_config(path: &Path) -> Result<SenseConfig> {
    load(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::doppler::Taper;

    const SCENE: &str = r#"
packets = 129
snr_db = 20.0

[radio]
carrier_frequency = 4.85e9
bandwidth = 12.24e6
subcarrier_spacing = 30e3
num_subcarriers = 408
packet_period = 0.005
array_rows = 4
array_cols = 4
element_spacing = 0.5

[scene]
tx_position = { x = -80.0, y = 60.0, z = 0.0 }

[scene.sync]
enabled = true

[[scene.target]]
initial_position = { x = 50.0, y = -10.0, z = 0.0 }
velocity = { x = 0.0, y = 3.0, z = 0.0 }
reflectivity = 1.0

[[scene.clutter]]
delay = 4.0e-7
amplitude = 3.0
azimuth = 0.2
elevation = 0.0
"#;

    #[test]
    fn parses_scene_file() {
        let cfg: SimulationConfig = parse_toml(SCENE, Path::new("scene.toml")).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.radio, RadioConfig::desk_scale());
        assert_eq!(cfg.scene.targets.len(), 1);
        assert_eq!(cfg.scene.clutter_paths.len(), 1);
        assert!(cfg.scene.sync.enabled);
        assert!((cfg.scene.sync.timing_spread - 0.1).abs() < 1e-15);
        assert!((cfg.resolved_scene().noise_power - 0.01).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_fail_fast() {
        let bad = SCENE.replace("reflectivity = 1.0", "reflectivity = 1.0\nrcs = 2.0");
        assert!(matches!(
            parse_toml::<SimulationConfig>(&bad, Path::new("s.toml")),
            Err(Error::Parse { .. })
        ));
        let bad = format!("{SCENE}\n[extra]\nx = 1\n");
        assert!(parse_toml::<SimulationConfig>(&bad, Path::new("s.toml")).is_err());
    }

    #[test]
    fn sense_config_defaults_and_overrides() {
        let text = r#"
[geometry]
tx_position = { x = -80.0, y = 60.0, z = 0.0 }

[preprocess]
truncation = 128

[doppler]
window = 32
taper = "hann"

[detect]
region_count = 8
"#;
        let cfg: SenseConfig = parse_toml(text, Path::new("sense.toml")).unwrap();
        assert_eq!(cfg.preprocess.truncation, 128);
        assert_eq!(cfg.preprocess.ifft_size, 4096);
        assert_eq!(cfg.doppler.window, 32);
        assert_eq!(cfg.doppler.hop(), 32);
        assert_eq!(cfg.doppler.taper, Taper::Hann);
        assert_eq!(cfg.detect.region_count, 8);
        assert_eq!(cfg.track.confirm_count, 4);
        let bad = text.replace("window = 32", "window = 32\nwidth = 3");
        assert!(parse_toml::<SenseConfig>(&bad, Path::new("sense.toml")).is_err());
    }
}
