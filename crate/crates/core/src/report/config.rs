use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cycle::{tile_potential, CycleOptions};
use crate::eigen::VerifyOptions;
use crate::error::{Error, Result};
use crate::graph::{
    complete, cycle, localized_example, n_lift, petersen, wheel, LiftSource, PotentialGraph,
};
use crate::green::{BandOptions, BoundaryOptions, Ladder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Bands,
    Metrics,
    Verify,
    Cycle,
    LiftSweep,
    CtCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Bands => "bands",
            Command::Metrics => "metrics",
            Command::Verify => "verify",
            Command::Cycle => "cycle",
            Command::LiftSweep => "lift-sweep",
            Command::CtCheck => "ct-check",
        }
    }
}

/// A generated graph. Potentials `w` are tiled over the vertex ids; an empty
/// list means `W ≡ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Cycle {
        n: usize,
        #[serde(default)]
        w: Vec<f64>,
    },
    Complete {
        n: usize,
        #[serde(default)]
        w: Vec<f64>,
    },
    Petersen {
        #[serde(default)]
        w: Vec<f64>,
    },
    Wheel {
        #[serde(default)]
        w: Vec<f64>,
    },
    Localized {
        m: usize,
    },
    Lift {
        base: PathBuf,
        n: usize,
        seed: u64,
    },
}

/// Reads a graph file, naming the path in I/O and parse errors.
pub fn read_graph(path: &Path) -> Result<PotentialGraph> {
    PotentialGraph::read_json(path).map_err(|e| match e {
        Error::Io(_) | Error::Json(_) => bad(format!("{}: {e}", path.display())),
        e => e,
    })
}

fn tiled(w: &[f64], n: usize) -> Vec<f64> {
    if w.is_empty() {
        vec![0.0; n]
    } else {
        tile_potential(w, n)
    }
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<PotentialGraph> {
        match self {
            GeneratorSpec::Cycle { n, w } => cycle(*n, &tiled(w, *n)),
            GeneratorSpec::Complete { n, w } => complete(*n, &tiled(w, *n)),
            GeneratorSpec::Petersen { w } => petersen(&tiled(w, 10)),
            GeneratorSpec::Wheel { w } => wheel(&tiled(w, 5)),
            GeneratorSpec::Localized { m } => localized_example(*m),
            GeneratorSpec::Lift { base, n, seed } => {
                let base = read_graph(base)?;
                Ok(n_lift(&base, *n, LiftSource::Seed(*seed))?.lift)
            }
        }
    }
}

/// Everything one run needs. Missing fields take their defaults; unknown
/// fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub graph: Option<PathBuf>,
    pub generator: Option<GeneratorSpec>,
    /// Lift base for `lift-sweep`.
    pub base: Option<PathBuf>,
    pub lift_orders: Vec<usize>,
    pub cycle_n: Option<usize>,
    /// Cycle potential pattern, tiled to `cycle_n`.
    pub cycle_w: Vec<f64>,
    pub period: Option<usize>,
    pub compare_bands: bool,
    pub lambda: Vec<f64>,
    pub grid_step: f64,
    pub eta_start: f64,
    pub eta_min: f64,
    pub eps_band: f64,
    pub eps_gap: f64,
    pub support_tol: f64,
    pub slack: f64,
    pub p: Vec<f64>,
    pub s: Vec<f64>,
    pub n_max: usize,
    pub rotations: usize,
    pub seed: u64,
    pub report: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let b = BoundaryOptions::default();
        Self {
            command: None,
            graph: None,
            generator: None,
            base: None,
            lift_orders: Vec::new(),
            cycle_n: None,
            cycle_w: Vec::new(),
            period: None,
            compare_bands: false,
            lambda: Vec::new(),
            grid_step: BandOptions::default().grid_step,
            eta_start: b.ladder.eta_start,
            eta_min: b.ladder.eta_min,
            eps_band: b.eps_band,
            eps_gap: b.eps_gap,
            support_tol: 1e-7,
            slack: 1e-9,
            p: vec![5.0, 6.0, 8.0],
            s: crate::metrics::DEFAULT_S.to_vec(),
            n_max: 10,
            rotations: 20,
            seed: 0,
            report: None,
            summary: None,
            workers: None,
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn command(&self) -> Result<Command> {
        self.command.ok_or_else(|| bad("config has no command"))
    }

    /// Schema checks that do not touch the file system.
    pub fn validate(&self) -> Result<()> {
        let cmd = self.command()?;
        for (name, v) in [
            ("grid_step", self.grid_step),
            ("eta_start", self.eta_start),
            ("eta_min", self.eta_min),
            ("eps_band", self.eps_band),
            ("eps_gap", self.eps_gap),
            ("support_tol", self.support_tol),
            ("slack", self.slack),
        ] {
            positive(name, v)?;
        }
        if self.eta_min >= self.eta_start {
            return Err(bad("eta_min must be below eta_start"));
        }
        if let Some(&p) = self.p.iter().find(|&&p| !(p > 4.0 && p.is_finite())) {
            return Err(bad(format!("p-norm exponents must exceed 4, got {p}")));
        }
        if let Some(&s) = self.s.iter().find(|&&s| !(s > 1.0 && s.is_finite())) {
            return Err(bad(format!("moment exponents s must exceed 1, got {s}")));
        }
        if self.lambda.iter().any(|l| !l.is_finite()) {
            return Err(bad("lambda values must be finite"));
        }
        if self.cycle_w.iter().any(|w| !w.is_finite()) {
            return Err(bad("cycle potential values must be finite"));
        }
        if self.workers == Some(0) {
            return Err(bad("workers must be at least 1"));
        }
        let has_graph = self.graph.is_some() || self.generator.is_some();
        if self.graph.is_some() && self.generator.is_some() {
            return Err(bad("give either graph or generator, not both"));
        }
        match cmd {
            Command::Bands | Command::Verify if !has_graph => {
                Err(bad(format!("{} needs a graph", cmd.name())))
            }
            Command::Metrics => {
                if !has_graph {
                    return Err(bad("metrics needs a graph"));
                }
                if self.lambda.len() != 1 {
                    return Err(bad("metrics needs exactly one lambda"));
                }
                Ok(())
            }
            Command::CtCheck if !has_graph => Err(bad("ct-check needs a graph")),
            Command::Cycle => {
                let n = self.cycle_n.ok_or_else(|| bad("cycle needs n"))?;
                if n < 3 {
                    return Err(bad(format!("cycle needs n >= 3, got {n}")));
                }
                if self.cycle_w.len() > n {
                    return Err(bad("cycle potential pattern is longer than n"));
                }
                Ok(())
            }
            Command::LiftSweep => {
                if self.base.is_none() {
                    return Err(bad("lift-sweep needs a base graph"));
                }
                if self.lift_orders.is_empty() || self.lift_orders.contains(&0) {
                    return Err(bad("lift-sweep needs lift orders >= 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn load_graph(&self) -> Result<PotentialGraph> {
        match (&self.graph, &self.generator) {
            (Some(path), _) => read_graph(path),
            (None, Some(spec)) => spec.build(),
            (None, None) => Err(bad("no graph given")),
        }
    }

    pub fn boundary(&self) -> BoundaryOptions {
        BoundaryOptions {
            ladder: Ladder {
                eta_start: self.eta_start,
                eta_min: self.eta_min,
            },
            eps_band: self.eps_band,
            eps_gap: self.eps_gap,
            ..BoundaryOptions::default()
        }
    }

    pub fn band_options(&self) -> BandOptions {
        BandOptions {
            grid_step: self.grid_step,
            boundary: self.boundary(),
            ..BandOptions::default()
        }
    }

    pub fn verify_options(&self) -> VerifyOptions {
        VerifyOptions {
            p_list: self.p.clone(),
            support_tol: self.support_tol,
            rotations: self.rotations,
            seed: self.seed,
            boundary: self.boundary(),
            slack: self.slack,
            ..VerifyOptions::for_grid_step(self.grid_step)
        }
    }

    pub fn cycle_options(&self) -> CycleOptions {
        CycleOptions {
            support_tol: self.support_tol,
            rotations: self.rotations,
            seed: self.seed,
            boundary: self.boundary(),
            slack: self.slack,
            ..CycleOptions::default()
        }
    }

    pub fn cycle_potential(&self) -> Vec<f64> {
        tiled(&self.cycle_w, self.cycle_n.unwrap_or(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_fields_and_bad_tolerances() {
        assert!(RunConfig::from_json(r#"{"command":"bands","colour":1}"#).is_err());
        let c = RunConfig::from_json(r#"{"command":"bands","generator":{"kind":"petersen"},"grid_step":0}"#).unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::from_json(r#"{"command":"bands","generator":{"kind":"petersen"}}"#).unwrap();
        c.validate().unwrap();
        assert_eq!(c.load_graph().unwrap().vertex_count(), 10);
    }

    #[test]
    fn command_requirements() {
        let c = RunConfig {
            command: Some(Command::Metrics),
            generator: Some(GeneratorSpec::Petersen { w: vec![] }),
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        let c = RunConfig {
            lambda: vec![0.5],
            ..c
        };
        c.validate().unwrap();
        let c = RunConfig {
            command: Some(Command::Cycle),
            cycle_n: Some(2),
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn generators_tile_potentials() {
        let g = GeneratorSpec::Cycle { n: 6, w: vec![1.0, -1.0] }.build().unwrap();
        assert_eq!(g.potentials(), &[1.0, -1.0, 1.0, -1.0, 1.0, -1.0]);
        let g = GeneratorSpec::Localized { m: 3 }.build().unwrap();
        assert_eq!(g.vertex_count(), 14);
    }
}
