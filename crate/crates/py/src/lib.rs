//! Python bindings: load and validate worlds, run episodes, transform
//! worlds, compare traces and run the test-state agent.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use worldsim::agent::{run_agent_replay, AgentSpec, AgentSpecFile, ReportMeta, TheoryReport};
use worldsim::chance::Seeds as CoreSeeds;
use worldsim::history::{parse_log, write_log};
use worldsim::run::run_episode;
use worldsim::theory::TheoryConfig;
use worldsim::transform::{
    def3_to_def2, def4_to_def3_capped, trace_distance, Def1Family, EpisodeSource, FlattenOptions, TraceOptions,
};
use worldsim::worldfile::{parse_world, write_world, AnyWorld};
use worldsim::{with_world, FileError, WorldError};

create_exception!(pyworldsim, CapExceeded, PyRuntimeError, "A state or rule cap was exceeded.");

fn file_err(e: FileError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn world_err(e: WorldError) -> PyErr {
    match e {
        WorldError::CapExceeded { .. } => CapExceeded::new_err(e.to_string()),
        WorldError::SignatureMismatch(_) => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Seeds of the four chance channels.
#[pyclass(module = "pyworldsim", from_py_object)]
#[derive(Clone, Copy)]
struct Seeds {
    #[pyo3(get, set)]
    predictable: u64,
    #[pyo3(get, set)]
    unpredictable: u64,
    #[pyo3(get, set)]
    noise: u64,
    #[pyo3(get, set)]
    policy: u64,
}

#[pymethods]
impl Seeds {
    #[new]
    fn new(predictable: u64, unpredictable: u64, noise: u64, policy: u64) -> Self {
        Seeds {
            predictable,
            unpredictable,
            noise,
            policy,
        }
    }

    /// All four channels derived from one seed.
    #[staticmethod]
    fn uniform(seed: u64) -> Self {
        CoreSeeds::uniform(seed).into()
    }

    fn __repr__(&self) -> String {
        format!(
            "Seeds(predictable={}, unpredictable={}, noise={}, policy={})",
            self.predictable, self.unpredictable, self.noise, self.policy
        )
    }
}

impl From<CoreSeeds> for Seeds {
    fn from(s: CoreSeeds) -> Self {
        Seeds::new(s.predictable, s.unpredictable, s.noise, s.policy)
    }
}

impl From<Seeds> for CoreSeeds {
    fn from(s: Seeds) -> Self {
        CoreSeeds {
            predictable: s.predictable,
            unpredictable: s.unpredictable,
            noise: s.noise,
            policy: s.policy,
        }
    }
}

fn pick_seeds(seed: u64, seeds: Option<Seeds>) -> CoreSeeds {
    seeds.map_or_else(|| CoreSeeds::uniform(seed), Into::into)
}

/// A world loaded from its JSON file form.
#[pyclass(module = "pyworldsim")]
struct World {
    inner: AnyWorld,
}

#[pymethods]
impl World {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(World {
            inner: parse_world(text).map_err(file_err)?,
        })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path)?;
        World::parse(&text)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind()
    }

    /// `(name, values)` for every action coordinate.
    #[getter]
    fn actions(&self) -> Vec<(String, Vec<String>)> {
        coords(&self.inner.signature().actions)
    }

    #[getter]
    fn observations(&self) -> Vec<(String, Vec<String>)> {
        coords(&self.inner.signature().observations)
    }

    fn to_json(&self) -> String {
        write_world(&self.inner)
    }

    /// One line per distribution that breaks a constraint.
    fn validate(&self) -> Vec<String> {
        self.inner.validate().iter().map(ToString::to_string).collect()
    }

    /// History log of `episodes` runs under the uniform policy.
    #[pyo3(signature = (horizon = 100, episodes = 1, seed = 0, seeds = None))]
    fn run(&self, horizon: usize, episodes: usize, seed: u64, seeds: Option<Seeds>) -> PyResult<String> {
        let s = pick_seeds(seed, seeds);
        let hs = (0..episodes)
            .map(|k| with_world!(&self.inner, w => run_episode(w, &s.for_episode(k as u64), horizon)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(world_err)?;
        Ok(write_log(&hs))
    }

    /// Lowers a def4 world to def3 or def2, or a def3 world to def2.
    #[pyo3(signature = (to, cap = 1_000_000, reach_bound = None))]
    fn transform(&self, to: &str, cap: usize, reach_bound: Option<usize>) -> PyResult<World> {
        let def3 = match (&self.inner, to) {
            (AnyWorld::Def4(w), "def3" | "def2") => def4_to_def3_capped(w, cap).map_err(world_err)?.world,
            (AnyWorld::Def3(w) | AnyWorld::Doors(_, w), "def2") => w.clone(),
            _ => {
                return Err(PyValueError::new_err(format!(
                    "cannot transform a {} world to {to}",
                    self.inner.kind()
                )))
            }
        };
        let inner = if to == "def3" {
            AnyWorld::Def3(def3)
        } else {
            let flat = def3_to_def2(&def3, FlattenOptions { reach_bound, cap }).map_err(world_err)?;
            AnyWorld::Def2(flat.world)
        };
        Ok(World { inner })
    }

    /// Total-variation distance between this world's traces and `other`'s.
    /// With `determinize`, `other` must be def2 and runs as its determinized
    /// family.
    #[pyo3(signature = (other, episodes = 10_000, horizon = 5, seed = 0, determinize = false))]
    fn trace_distance<'py>(
        &self,
        py: Python<'py>,
        other: &World,
        episodes: usize,
        horizon: usize,
        seed: u64,
        determinize: bool,
    ) -> PyResult<Bound<'py, PyDict>> {
        let family;
        let b: &dyn EpisodeSource = match (&other.inner, determinize) {
            (AnyWorld::Def2(w), true) => {
                family = Def1Family { base: w.clone() };
                &family
            }
            (_, true) => return Err(PyValueError::new_err("determinize needs a def2 world")),
            (w, false) => with_world!(w, w => w as &dyn EpisodeSource),
        };
        let a: &dyn EpisodeSource = with_world!(&self.inner, w => w as &dyn EpisodeSource);
        let r = trace_distance(a, b, TraceOptions { episodes, horizon, seed }).map_err(world_err)?;
        let d = PyDict::new(py);
        d.set_item("episodes", r.episodes)?;
        d.set_item("horizon", r.horizon)?;
        d.set_item("distance", r.distance)?;
        d.set_item("per_step", r.per_step)?;
        d.set_item("distinct_traces", r.distinct_traces)?;
        Ok(d)
    }

    /// Runs the agent described by `spec` (agent file JSON) live, or over
    /// `log` when given.
    #[pyo3(signature = (spec, episodes = 1, horizon = 100, seed = 0, seeds = None, c0 = None, half_life = None, log = None))]
    #[allow(clippy::too_many_arguments)]
    fn agent(
        &self,
        spec: &str,
        episodes: usize,
        horizon: usize,
        seed: u64,
        seeds: Option<Seeds>,
        c0: Option<f64>,
        half_life: Option<f64>,
        log: Option<&str>,
    ) -> PyResult<Report> {
        let sig = self.inner.signature();
        let file: AgentSpecFile = serde_json::from_str(spec).map_err(|e| file_err(e.into()))?;
        let mut agent_spec = AgentSpec::from_file(&file, sig).map_err(file_err)?;
        if file.grouping.is_none() {
            agent_spec.grouping = self
                .inner
                .default_grouping()
                .map_err(|e| PyValueError::new_err(e.to_string()))?;
        }
        let defaults = TheoryConfig::default();
        let config = TheoryConfig {
            c0: c0.unwrap_or(defaults.c0),
            half_life: half_life.unwrap_or(defaults.half_life),
        };
        let mut meta = ReportMeta {
            world: self.inner.kind().to_string(),
            ..ReportMeta::default()
        };
        let agent = match log {
            Some(text) => {
                let hs = parse_log(text, sig).map_err(|e| PyValueError::new_err(e.to_string()))?;
                run_agent_replay(&hs, agent_spec, config)
            }
            None => {
                let s = pick_seeds(seed, seeds);
                meta.seeds = Some(s);
                meta.horizon = Some(horizon);
                with_world!(&self.inner, w => worldsim::agent::run_agent_live(w, agent_spec, config, &s, episodes, horizon))
                    .map_err(world_err)?
                    .1
            }
        };
        Ok(Report {
            inner: agent.report(meta),
        })
    }

    fn __repr__(&self) -> String {
        format!("World(kind={:?})", self.inner.kind())
    }
}

fn coords(cs: &[worldsim::signature::Coordinate]) -> Vec<(String, Vec<String>)> {
    cs.iter().map(|c| (c.name.clone(), c.values.clone())).collect()
}

/// Per-test, per-group statistics and estimates.
#[pyclass(module = "pyworldsim")]
struct Report {
    inner: TheoryReport,
}

#[pymethods]
impl Report {
    #[getter]
    fn steps(&self) -> u64 {
        self.inner.steps
    }

    #[getter]
    fn episodes(&self) -> u64 {
        self.inner.episodes
    }

    #[getter]
    fn tests(&self) -> Vec<String> {
        self.inner.tests.iter().map(|t| t.name.clone()).collect()
    }

    fn groups(&self, test: &str) -> PyResult<Vec<String>> {
        Ok(self.line(test)?.groups.iter().map(|g| g.group.clone()).collect())
    }

    /// `(prediction, confidence)` of `test` in `group`.
    fn estimate(&self, test: &str, group: &str) -> PyResult<(f64, f64)> {
        let g = self.group(test, group)?;
        Ok((g.estimate.prediction, g.estimate.confidence))
    }

    /// `(n, m)` counts of every experiment of `test` in `group`.
    fn records(&self, test: &str, group: &str) -> PyResult<Vec<(String, u64, u64)>> {
        let g = self.group(test, group)?;
        Ok(g.experiments.iter().map(|e| (e.experiment.clone(), e.n, e.m)).collect())
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }
}

impl Report {
    fn line(&self, test: &str) -> PyResult<&worldsim::agent::TestLine> {
        self.inner
            .test(test)
            .ok_or_else(|| PyValueError::new_err(format!("no test named `{test}`")))
    }

    fn group(&self, test: &str, group: &str) -> PyResult<&worldsim::agent::GroupLine> {
        self.line(test)?
            .group(group)
            .ok_or_else(|| PyValueError::new_err(format!("test `{test}` has no group `{group}`")))
    }
}

#[pymodule]
fn pyworldsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Seeds>()?;
    m.add_class::<World>()?;
    m.add_class::<Report>()?;
    m.add("CapExceeded", m.py().get_type::<CapExceeded>())?;
    Ok(())
}
