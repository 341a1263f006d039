//! The statistics-collecting agent.
//!
//! The agent watches a stream of step letters, live from a world or replayed
//! from a log, and at every moment checks which experiments and test
//! conditions hold. It counts test results per (experiment, test, group),
//! remembers each test's latest value per group, and at the end turns all of
//! that into per-group (prediction, confidence) estimates.
//!
//! Each moment `q` is judged on the whole past (steps `1..=q`, so kind-B
//! events apply) and on a future window as long as the longest future any
//! event looks at. Moments near the end of an episode see a clipped future.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::chance::Seeds;
use crate::error::{EventError, FileError, WorldError};
use crate::event::EventPattern;
use crate::history::History;
use crate::run::run_episode_with;
use crate::signature::ScalarSignature;
use crate::theory::{
    combine_predictions, predict_from_experiment, predict_test_state, GroupingAutomaton, GroupingSpec,
    StabilityTracker, StatRecord, StatStore, Test, TestStateEstimate, TheoryConfig, TheoryOutput,
};
use crate::world::{StepLetter, WorldModel};

/// Tests, experiments and the grouping automaton an agent works with.
#[derive(Clone, Debug)]
pub struct AgentSpec {
    pub tests: Vec<Test>,
    pub experiments: Vec<EventPattern>,
    pub grouping: GroupingAutomaton,
}

/// File form of [`AgentSpec`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpecFile {
    pub tests: Vec<TestSpec>,
    pub experiments: Vec<String>,
    #[serde(default)]
    pub grouping: Option<GroupingSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSpec {
    pub name: String,
    pub condition: String,
    pub result: String,
}

impl AgentSpec {
    pub fn from_file(file: &AgentSpecFile, signature: &ScalarSignature) -> Result<Self, FileError> {
        let ev = |path: String| move |e: EventError| FileError::at(path, e);
        let mut tests = Vec::with_capacity(file.tests.len());
        for (i, t) in file.tests.iter().enumerate() {
            if file.tests[..i].iter().any(|u| u.name == t.name) {
                return Err(FileError::at(format!("tests[{i}].name"), format!("duplicate test `{}`", t.name)));
            }
            tests.push(Test::parse(&t.name, &t.condition, &t.result, signature).map_err(ev(format!("tests[{i}]")))?);
        }
        let experiments = file
            .experiments
            .iter()
            .enumerate()
            .map(|(i, e)| EventPattern::parse(e, signature).map_err(ev(format!("experiments[{i}]"))))
            .collect::<Result<Vec<_>, _>>()?;
        let grouping = match &file.grouping {
            Some(g) => GroupingAutomaton::from_spec(g, signature).map_err(ev("grouping".into()))?,
            None => GroupingAutomaton::single(),
        };
        Ok(AgentSpec {
            tests,
            experiments,
            grouping,
        })
    }

    pub fn parse(text: &str, signature: &ScalarSignature) -> Result<Self, FileError> {
        let file: AgentSpecFile = serde_json::from_str(text)?;
        AgentSpec::from_file(&file, signature)
    }

    pub fn to_file(&self, signature: &ScalarSignature) -> AgentSpecFile {
        AgentSpecFile {
            tests: self
                .tests
                .iter()
                .map(|t| TestSpec {
                    name: t.name.clone(),
                    condition: t.condition.to_string(),
                    result: t.result_text().to_string(),
                })
                .collect(),
            experiments: self.experiments.iter().map(ToString::to_string).collect(),
            grouping: Some(self.grouping.to_spec(signature)),
        }
    }
}

/// A moment waiting for its future window.
#[derive(Clone, Debug)]
struct Pending {
    q: usize,
    past_ok: Vec<bool>,
    group: usize,
}

pub struct Agent {
    spec: AgentSpec,
    config: TheoryConfig,
    /// Experiments first, then test conditions not already among them.
    events: Vec<EventPattern>,
    experiment_of: Vec<usize>,
    condition_of: Vec<usize>,
    lag: usize,
    store: StatStore,
    /// `stability[test][group]`, reset at every episode.
    stability: Vec<Vec<StabilityTracker>>,
    defined: Vec<u64>,
    steps: Vec<StepLetter>,
    trackers: Vec<u32>,
    group: usize,
    pending: VecDeque<Pending>,
    final_holds: Vec<bool>,
    /// Length of the current or most recent episode.
    now: u64,
    total_steps: u64,
    episodes: u64,
}

impl Agent {
    pub fn new(spec: AgentSpec, config: TheoryConfig) -> Self {
        let mut events: Vec<EventPattern> = Vec::new();
        let index_of = |e: &EventPattern, events: &mut Vec<EventPattern>| {
            let key = e.to_string();
            match events.iter().position(|x| x.to_string() == key) {
                Some(i) => i,
                None => {
                    events.push(e.clone());
                    events.len() - 1
                }
            }
        };
        let experiment_of = spec.experiments.iter().map(|e| index_of(e, &mut events)).collect();
        let condition_of = spec.tests.iter().map(|t| index_of(&t.condition, &mut events)).collect();
        let lag = events.iter().map(EventPattern::future_len).max().unwrap_or(0);
        let groups = spec.grouping.group_count();
        Agent {
            stability: vec![vec![StabilityTracker::default(); groups]; spec.tests.len()],
            defined: vec![0; spec.tests.len()],
            trackers: vec![0; events.len()],
            final_holds: vec![false; events.len()],
            group: spec.grouping.initial(),
            experiment_of,
            condition_of,
            lag,
            events,
            spec,
            config,
            store: StatStore::new(),
            steps: Vec::new(),
            pending: VecDeque::new(),
            now: 0,
            total_steps: 0,
            episodes: 0,
        }
    }

    pub fn spec(&self) -> &AgentSpec {
        &self.spec
    }

    pub fn store(&self) -> &StatStore {
        &self.store
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    /// Starts a new episode; an unfinished one is finished first.
    pub fn begin_episode(&mut self) {
        if !self.steps.is_empty() {
            self.end_episode();
        }
        for row in &mut self.stability {
            row.iter_mut().for_each(|t| *t = StabilityTracker::default());
        }
        self.trackers.iter_mut().for_each(|s| *s = 0);
        self.group = self.spec.grouping.initial();
        self.episodes += 1;
    }

    pub fn push(&mut self, letter: &StepLetter) {
        if self.steps.is_empty() && self.episodes == 0 {
            self.episodes = 1;
        }
        self.steps.push(letter.clone());
        self.now = self.steps.len() as u64;
        self.total_steps += 1;
        let past_ok = self
            .events
            .iter()
            .zip(&mut self.trackers)
            .map(|(e, s)| {
                *s = e.past_dfa().step(*s, e.class(letter));
                e.past_dfa().is_accepting(*s)
            })
            .collect();
        self.group = self.spec.grouping.step(self.group, letter);
        self.pending.push_back(Pending {
            q: self.steps.len(),
            past_ok,
            group: self.group,
        });
        while self
            .pending
            .front()
            .is_some_and(|p| p.q + self.lag <= self.steps.len())
        {
            let p = self.pending.pop_front().expect("non-empty");
            self.process(p);
        }
    }

    /// Processes the moments still waiting for future steps and keeps the
    /// episode's final state for the estimate.
    pub fn end_episode(&mut self) {
        while let Some(p) = self.pending.pop_front() {
            self.process(p);
        }
        self.steps.clear();
    }

    fn process(&mut self, p: Pending) {
        let end = (p.q + self.lag).min(self.steps.len());
        let future = &self.steps[p.q..end];
        let holds: Vec<bool> = self
            .events
            .iter()
            .zip(&p.past_ok)
            .map(|(e, ok)| *ok && e.future_accepts(future))
            .collect();
        let present = &self.steps[p.q - 1];
        for (t, test) in self.spec.tests.iter().enumerate() {
            if !holds[self.condition_of[t]] {
                continue;
            }
            let value = test.read(present);
            self.defined[t] += 1;
            self.stability[t][p.group].record(value, p.q as u64);
            for (e, i) in self.spec.experiments.iter().zip(&self.experiment_of) {
                if holds[*i] {
                    self.store.add(e, test, p.group, value);
                }
            }
        }
        if p.q == self.steps.len() {
            self.final_holds = holds;
        }
    }

    /// Test-state estimate for test `t` from the experiments that hold at
    /// the final moment and the stability trackers.
    pub fn estimate(&self, t: usize) -> TestStateEstimate {
        let test = &self.spec.tests[t];
        let holding: Vec<&EventPattern> = self
            .spec
            .experiments
            .iter()
            .zip(&self.experiment_of)
            .filter(|(_, i)| self.final_holds[**i])
            .map(|(e, _)| e)
            .collect();
        let records: Vec<Vec<StatRecord>> = (0..self.spec.grouping.group_count())
            .map(|g| holding.iter().map(|e| self.store.get(e, test, g)).collect())
            .collect();
        predict_test_state(&records, &self.stability[t], self.now, self.group, &self.config)
    }

    pub fn report(&self, meta: ReportMeta) -> TheoryReport {
        let groups = self.spec.grouping.groups();
        let tests = self
            .spec
            .tests
            .iter()
            .enumerate()
            .map(|(t, test)| {
                let estimate = self.estimate(t);
                let per_group = groups
                    .iter()
                    .enumerate()
                    .map(|(g, name)| {
                        let experiments = self
                            .spec
                            .experiments
                            .iter()
                            .map(|e| {
                                let r = self.store.get(e, test, g);
                                ExperimentLine {
                                    experiment: e.to_string(),
                                    n: r.n,
                                    m: r.m,
                                    output: predict_from_experiment(&r, self.config.c0),
                                }
                            })
                            .collect();
                        let tracker = self.stability[t][g];
                        GroupLine {
                            group: name.clone(),
                            experiments,
                            last_value: tracker.last().map(|(v, _)| v),
                            last_moment: tracker.last().map(|(_, at)| at),
                            stability: tracker.predict(self.now, self.config.half_life),
                            estimate: estimate.groups[g],
                        }
                    })
                    .collect();
                TestLine {
                    name: test.name.clone(),
                    condition: test.condition.to_string(),
                    result: test.result_text().to_string(),
                    defined_moments: self.defined[t],
                    current_group: groups[estimate.current].clone(),
                    groups: per_group,
                }
            })
            .collect();
        TheoryReport {
            config: ReportConfig {
                c0: self.config.c0,
                half_life: self.config.half_life,
                meta,
            },
            episodes: self.episodes,
            steps: self.total_steps,
            tests,
        }
    }
}

/// Where the letters came from, echoed in the report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub world: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Seeds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    /// World parameters worth echoing, such as noise volumes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub c0: f64,
    pub half_life: f64,
    #[serde(flatten)]
    pub meta: ReportMeta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentLine {
    pub experiment: String,
    pub n: u64,
    pub m: u64,
    #[serde(flatten)]
    pub output: TheoryOutput,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupLine {
    pub group: String,
    pub experiments: Vec<ExperimentLine>,
    pub last_value: Option<bool>,
    pub last_moment: Option<u64>,
    pub stability: TheoryOutput,
    pub estimate: TheoryOutput,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestLine {
    pub name: String,
    pub condition: String,
    pub result: String,
    pub defined_moments: u64,
    pub current_group: String,
    pub groups: Vec<GroupLine>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub config: ReportConfig,
    pub episodes: u64,
    pub steps: u64,
    pub tests: Vec<TestLine>,
}

impl TheoryReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn test(&self, name: &str) -> Option<&TestLine> {
        self.tests.iter().find(|t| t.name == name)
    }
}

impl TestLine {
    pub fn group(&self, name: &str) -> Option<&GroupLine> {
        self.groups.iter().find(|g| g.group == name)
    }
}

impl GroupLine {
    pub fn experiment(&self, canonical: &str) -> Option<&ExperimentLine> {
        self.experiments.iter().find(|e| e.experiment == canonical)
    }
}

/// Runs `episodes` episodes of `world` under the uniform policy and feeds
/// every letter to a fresh agent. Returns the histories and the agent.
pub fn run_agent_live<W: WorldModel>(
    world: &W,
    spec: AgentSpec,
    config: TheoryConfig,
    seeds: &Seeds,
    episodes: usize,
    horizon: usize,
) -> Result<(Vec<History>, Agent), WorldError> {
    let mut agent = Agent::new(spec, config);
    let mut histories = Vec::with_capacity(episodes);
    for k in 0..episodes {
        agent.begin_episode();
        let h = run_episode_with(world, &seeds.for_episode(k as u64), horizon, |l| agent.push(l))?;
        agent.end_episode();
        histories.push(h);
    }
    Ok((histories, agent))
}

/// Feeds recorded histories to a fresh agent.
pub fn run_agent_replay(histories: &[History], spec: AgentSpec, config: TheoryConfig) -> Agent {
    let mut agent = Agent::new(spec, config);
    for h in histories {
        agent.begin_episode();
        for l in h.steps() {
            agent.push(l);
        }
        agent.end_episode();
    }
    agent
}

/// Combined output of every experiment record of one test in one group,
/// without the stability term.
pub fn experiments_only(line: &GroupLine) -> TheoryOutput {
    let outputs: Vec<TheoryOutput> = line.experiments.iter().map(|e| e.output).collect();
    combine_predictions(&outputs)
}
