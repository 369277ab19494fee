use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use gsd_core::ipea::IpeaConfig;
use gsd_core::model::{critical_field, HeisenbergParams, Label};
use gsd_core::noise::NoiseConfig;
use gsd_core::pulsec::Qubit;
use gsd_core::{Noise, Params};

/// One magnetic field, absolute or relative to the level crossing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Field {
    Absolute { h: f64 },
    Relative { h_over_hc: f64 },
}

impl Field {
    pub fn resolve(self, j: f64) -> Result<Params> {
        Ok(match self {
            Field::Absolute { h } => HeisenbergParams::new(j, h)?,
            Field::Relative { h_over_hc } => HeisenbergParams::at_critical_ratio(j, h_over_hc)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid {
    pub points: usize,
    /// Sampling step in units of `1/J`.
    pub dt: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self { points: gsd_core::pea::DEFAULT_POINTS, dt: gsd_core::pea::DEFAULT_DT_J }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IpeaSection {
    pub iterations: usize,
}

impl Default for IpeaSection {
    fn default() -> Self {
        Self { iterations: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "J")]
    pub j: f64,
    pub fields: Vec<Field>,
    pub grid: Grid,
    pub ipea: IpeaSection,
    /// Absent means a noiseless run.
    pub noise: Option<Noise>,
    /// Use this eigenstate instead of the variational trial state.
    pub eigenstate: Option<Label>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            j: 1.0,
            fields: [0.0, 0.75, 1.25].map(|r| Field::Relative { h_over_hc: r }).to_vec(),
            grid: Grid::default(),
            ipea: IpeaSection::default(),
            noise: None,
            eigenstate: None,
            output: None,
        }
    }
}

/// Flag values that replace config entries when given.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub j: Option<f64>,
    pub h: Vec<f64>,
    pub h_over_hc: Vec<f64>,
    pub iterations: Option<usize>,
    pub points: Option<usize>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub noise_t2_ms: Option<f64>,
    pub delta_j_rel: Option<f64>,
    pub eigenstate: Option<Label>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(j) = o.j {
            self.j = j;
        }
        if !o.h.is_empty() || !o.h_over_hc.is_empty() {
            self.fields =
                o.h.into_iter()
                    .map(|h| Field::Absolute { h })
                    .chain(o.h_over_hc.into_iter().map(|h_over_hc| Field::Relative { h_over_hc }))
                    .collect();
        }
        if let Some(n) = o.iterations {
            self.ipea.iterations = n;
        }
        if let Some(n) = o.points {
            self.grid.points = n;
        }
        if let Some(dt) = o.dt {
            self.grid.dt = dt;
        }
        if o.seed.is_some() || o.noise_t2_ms.is_some() || o.delta_j_rel.is_some() {
            let noise = self.noise.get_or_insert_with(NoiseConfig::noiseless);
            if let Some(seed) = o.seed {
                noise.seed = seed;
            }
            if let Some(ms) = o.noise_t2_ms {
                noise.t2 = [Qubit::A, Qubit::B, Qubit::C].into_iter().map(|q| (q, ms * 1e-3)).collect();
            }
            if let Some(d) = o.delta_j_rel {
                noise.delta_j_rel = d;
            }
        }
        if o.eigenstate.is_some() {
            self.eigenstate = o.eigenstate;
        }
        if o.out.is_some() {
            self.output = o.out;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let base = HeisenbergParams::new(self.j, 0.0)?;
        if self.fields.is_empty() {
            bail!("no field configured");
        }
        for f in &self.fields {
            f.resolve(self.j)?;
        }
        critical_field(&base)?;
        if self.grid.points < 2 {
            bail!("grid needs at least 2 points, got {}", self.grid.points);
        }
        if self.grid.dt.is_nan() || self.grid.dt <= 0.0 {
            bail!("dt must be positive, got {}", self.grid.dt);
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        Ok(())
    }

    pub fn params(&self) -> Result<Vec<Params>> {
        self.fields.iter().map(|f| f.resolve(self.j)).collect()
    }

    pub fn ipea_config(&self) -> IpeaConfig<f64> {
        IpeaConfig {
            points: self.grid.points,
            dt_j: self.grid.dt,
            iterations: self.ipea.iterations,
            ..IpeaConfig::default()
        }
    }

    pub fn noise_or_noiseless(&self) -> Noise {
        self.noise.clone().unwrap_or_else(NoiseConfig::noiseless)
    }
}
