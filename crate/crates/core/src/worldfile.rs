//! JSON world files.
//!
//! A file names its `kind` (`def2`, `def3`, `def4`, `chess` or `doors`).
//! Table worlds spell values, states and variables by name, write action
//! patterns as arrays of value names with `*` as a wildcard, and give
//! probabilities as integer hundredths or as `"n/d"` strings. Variables of
//! Def3 and Def4 worlds are addressed as `state.variable`.
//!
//! ```json
//! {
//!   "kind": "def2",
//!   "signature": {
//!     "actions": [{"name": "cmd", "values": ["Nothing", "Go"]}],
//!     "observations": [{"name": "x", "values": ["Off", "On"]}]
//!   },
//!   "states": ["a", "b"],
//!   "initial": "a",
//!   "views": {"a": ["Off"], "b": ["On"]},
//!   "transitions": [
//!     {"from": "a", "action": ["Go"], "outcomes": [["a", 50, 50], ["b", 50, 50]]}
//!   ]
//! }
//! ```

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{EventError, FileError};
use crate::interval::{IntervalDistribution, IntervalOutcome};
use crate::noise::NoiseDescriptor;
use crate::prob::{self, Prob};
use crate::signature::{Action, Coordinate, MoveGroup, Observation, ScalarSignature};
use crate::world::{
    CumulativeState, Def3Rule, Finding, NoiseRule, RuleOutcome, StateId, VarRef, WorldDef2, WorldDef3, WorldDef4,
    WorldModel,
};
use crate::theory::GroupingAutomaton;
use crate::worlds::chess::{chess_grouping, ChessConfig, ChessWorld};
use crate::worlds::doors::{doors_grouping, doors_world, DoorsConfig};

/// Any world a file can describe.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum AnyWorld {
    Def2(WorldDef2),
    Def3(WorldDef3),
    Def4(WorldDef4),
    Chess(ChessWorld),
    Doors(DoorsConfig, WorldDef3),
}

/// Runs `$body` with `$w` bound to the concrete world inside an [`AnyWorld`].
#[macro_export]
macro_rules! with_world {
    ($any:expr, $w:ident => $body:expr) => {
        match $any {
            $crate::worldfile::AnyWorld::Def2($w) => $body,
            $crate::worldfile::AnyWorld::Def3($w) => $body,
            $crate::worldfile::AnyWorld::Def4($w) => $body,
            $crate::worldfile::AnyWorld::Chess($w) => $body,
            $crate::worldfile::AnyWorld::Doors(_, $w) => $body,
        }
    };
}

impl AnyWorld {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyWorld::Def2(_) => "def2",
            AnyWorld::Def3(_) => "def3",
            AnyWorld::Def4(_) => "def4",
            AnyWorld::Chess(_) => "chess",
            AnyWorld::Doors(..) => "doors",
        }
    }

    pub fn signature(&self) -> &ScalarSignature {
        with_world!(self, w => w.signature())
    }

    /// Grouping an agent uses when its file names none: the built-in one for
    /// chess and doors, a single group otherwise.
    pub fn default_grouping(&self) -> Result<GroupingAutomaton, EventError> {
        match self {
            AnyWorld::Chess(_) => chess_grouping(),
            AnyWorld::Doors(c, _) => doors_grouping(c.schedules.len()),
            _ => Ok(GroupingAutomaton::single()),
        }
    }

    /// Distributions that break a constraint. Programmatic worlds have none.
    pub fn validate(&self) -> Vec<Finding> {
        match self {
            AnyWorld::Def2(w) => w.validate(),
            AnyWorld::Def3(w) | AnyWorld::Doors(_, w) => w.validate(),
            AnyWorld::Def4(w) => w.validate(),
            AnyWorld::Chess(_) => Vec::new(),
        }
    }
}

pub fn parse_world(text: &str) -> Result<AnyWorld, FileError> {
    let root: Value = serde_json::from_str(text)?;
    world_from_value(&root)
}

pub fn world_from_value(root: &Value) -> Result<AnyWorld, FileError> {
    let obj = as_object(root, "")?;
    let kind = as_str(field(obj, "", "kind")?, "kind")?;
    match kind {
        "chess" => {
            let config: ChessConfig = match obj.get("config") {
                Some(v) => serde_json::from_value(v.clone()).map_err(|e| FileError::at("config", e))?,
                None => ChessConfig::default(),
            };
            Ok(AnyWorld::Chess(ChessWorld::new(config).map_err(|e| FileError::at("config", e))?))
        }
        "doors" => {
            let config: DoorsConfig = serde_json::from_value(field(obj, "", "config")?.clone())
                .map_err(|e| FileError::at("config", e))?;
            let world = doors_world(&config).map_err(|e| FileError::at("config", e))?;
            Ok(AnyWorld::Doors(config, world))
        }
        "def2" => Ok(AnyWorld::Def2(read_def2(obj)?)),
        "def3" => Ok(AnyWorld::Def3(read_def3(obj)?)),
        "def4" => {
            let base = read_def3(obj)?;
            Ok(AnyWorld::Def4(read_noise(obj, base)?))
        }
        other => Err(FileError::at(
            "kind",
            format!("unknown kind `{other}`; expected def2, def3, def4, chess or doors"),
        )),
    }
}

pub fn world_to_value(world: &AnyWorld) -> Value {
    match world {
        AnyWorld::Def2(w) => write_def2(w),
        AnyWorld::Def3(w) => write_def3(w, "def3"),
        AnyWorld::Def4(w) => {
            let mut v = write_def3(w.base(), "def4");
            v["noise"] = write_noise(w);
            v
        }
        AnyWorld::Chess(w) => json!({"kind": "chess", "config": w.config()}),
        AnyWorld::Doors(c, _) => json!({"kind": "doors", "config": c}),
    }
}

pub fn write_world(world: &AnyWorld) -> String {
    serde_json::to_string_pretty(&world_to_value(world)).expect("values serialize")
}

// ---- reading helpers ----

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, FileError> {
    v.as_object().ok_or_else(|| FileError::at(path, "expected an object"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, FileError> {
    v.as_array().ok_or_else(|| FileError::at(path, "expected an array"))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str, FileError> {
    v.as_str().ok_or_else(|| FileError::at(path, "expected a string"))
}

fn field<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, FileError> {
    obj.get(key)
        .ok_or_else(|| FileError::at(join(path, key), "missing field"))
}

fn read_prob(v: &Value, path: &str) -> Result<Prob, FileError> {
    let p = match v {
        Value::Number(n) => {
            let h = n
                .as_u64()
                .filter(|h| *h <= 100)
                .ok_or_else(|| FileError::at(path, "integer probabilities are hundredths in 0..=100"))?;
            prob::hundredths(h as u32)
        }
        Value::String(s) => prob::parse(s).map_err(|e| FileError::at(path, e))?,
        _ => return Err(FileError::at(path, "expected hundredths or an \"n/d\" string")),
    };
    if p < prob::zero() || p > prob::one() {
        return Err(FileError::at(path, format!("{} is not a probability", prob::format(&p))));
    }
    Ok(p)
}

fn write_prob(p: &Prob) -> Value {
    match prob::as_hundredths(p) {
        Some(h) => json!(h),
        None => json!(prob::format(p)),
    }
}

fn read_coordinate(v: &Value, path: &str) -> Result<Coordinate, FileError> {
    let obj = as_object(v, path)?;
    let name = as_str(field(obj, path, "name")?, &join(path, "name"))?;
    let vp = join(path, "values");
    let values = as_array(field(obj, path, "values")?, &vp)?
        .iter()
        .enumerate()
        .map(|(i, x)| as_str(x, &format!("{vp}[{i}]")).map(str::to_string))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Coordinate::new(name, values))
}

fn read_coordinates(obj: &Map<String, Value>, path: &str, key: &str) -> Result<Vec<Coordinate>, FileError> {
    let p = join(path, key);
    match obj.get(key) {
        None => Ok(Vec::new()),
        Some(v) => as_array(v, &p)?
            .iter()
            .enumerate()
            .map(|(i, c)| read_coordinate(c, &format!("{p}[{i}]")))
            .collect(),
    }
}

fn read_value(coord: &Coordinate, v: &Value, path: &str) -> Result<u32, FileError> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(FileError::at(path, "expected a value name")),
    };
    coord
        .value_index(&text)
        .ok_or_else(|| FileError::at(path, format!("`{text}` is not a value of `{}`", coord.name)))
}

/// An action pattern: `"*"` or an array of value names and `*`.
fn read_pattern(sig: &ScalarSignature, v: &Value, path: &str) -> Result<Vec<Option<u32>>, FileError> {
    if v.as_str() == Some("*") {
        return Ok(vec![None; sig.action_dims()]);
    }
    let items = as_array(v, path)?;
    if items.len() != sig.action_dims() {
        return Err(FileError::at(
            path,
            format!("expected {} action values, found {}", sig.action_dims(), items.len()),
        ));
    }
    items
        .iter()
        .zip(&sig.actions)
        .enumerate()
        .map(|(i, (x, c))| {
            if x.as_str() == Some("*") {
                Ok(None)
            } else {
                read_value(c, x, &format!("{path}[{i}]")).map(Some)
            }
        })
        .collect()
}

fn write_pattern(sig: &ScalarSignature, pattern: &[Option<u32>]) -> Value {
    Value::Array(
        pattern
            .iter()
            .zip(&sig.actions)
            .map(|(p, c)| json!(p.map_or("*", |v| c.value_name(v))))
            .collect(),
    )
}

fn read_signature(obj: &Map<String, Value>) -> Result<ScalarSignature, FileError> {
    let sv = field(obj, "", "signature")?;
    let so = as_object(sv, "signature")?;
    let actions = read_coordinates(so, "signature", "actions")?;
    let observations = read_coordinates(so, "signature", "observations")?;
    let sig = ScalarSignature::new(actions, observations).map_err(|e| FileError::at("signature", e))?;
    let mut groups = Vec::new();
    if let Some(gv) = so.get("groups") {
        for (i, g) in as_array(gv, "signature.groups")?.iter().enumerate() {
            let p = format!("signature.groups[{i}]");
            let go = as_object(g, &p)?;
            groups.push(MoveGroup {
                name: as_str(field(go, &p, "name")?, &join(&p, "name"))?.to_string(),
                pattern: read_pattern(&sig, field(go, &p, "pattern")?, &join(&p, "pattern"))?,
            });
        }
    }
    sig.with_groups(groups).map_err(|e| FileError::at("signature.groups", e))
}

fn write_signature(sig: &ScalarSignature) -> Value {
    let groups: Vec<Value> = sig
        .groups
        .iter()
        .map(|g| json!({"name": g.name, "pattern": write_pattern(sig, &g.pattern)}))
        .collect();
    json!({
        "actions": sig.actions,
        "observations": sig.observations,
        "groups": groups,
    })
}

fn read_states(obj: &Map<String, Value>) -> Result<(Vec<String>, usize), FileError> {
    let names = as_array(field(obj, "", "states")?, "states")?
        .iter()
        .enumerate()
        .map(|(i, s)| as_str(s, &format!("states[{i}]")).map(str::to_string))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(FileError::at(format!("states[{i}]"), format!("duplicate state `{n}`")));
        }
    }
    let initial = as_str(field(obj, "", "initial")?, "initial")?;
    let index = names
        .iter()
        .position(|n| n == initial)
        .ok_or_else(|| FileError::at("initial", format!("unknown state `{initial}`")))?;
    Ok((names, index))
}

fn state_index(names: &[String], v: &Value, path: &str) -> Result<usize, FileError> {
    let name = as_str(v, path)?;
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| FileError::at(path, format!("unknown state `{name}`")))
}

fn expand(sig: &ScalarSignature, pattern: &[Option<u32>]) -> Vec<Action> {
    sig.all_actions()
        .filter(|a| pattern.iter().zip(&a.0).all(|(p, v)| p.is_none_or(|p| p == *v)))
        .collect()
}

// ---- Def2 ----

fn read_def2(obj: &Map<String, Value>) -> Result<WorldDef2, FileError> {
    let sig = read_signature(obj)?;
    let (names, initial) = read_states(obj)?;
    let views_obj = as_object(field(obj, "", "views")?, "views")?;
    let mut views = Vec::with_capacity(names.len());
    for name in &names {
        let p = format!("views.{name}");
        let v = views_obj
            .get(name)
            .ok_or_else(|| FileError::at(&p, "missing view"))?;
        let items = as_array(v, &p)?;
        if items.len() != sig.obs_dims() {
            return Err(FileError::at(&p, format!("expected {} values", sig.obs_dims())));
        }
        let values = items
            .iter()
            .zip(&sig.observations)
            .enumerate()
            .map(|(i, (x, c))| read_value(c, x, &format!("{p}[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        views.push(Observation(values));
    }
    if let Some(extra) = views_obj.keys().find(|k| !names.contains(k)) {
        return Err(FileError::at(format!("views.{extra}"), "not a state"));
    }
    let mut world = WorldDef2::new(sig.clone(), names.clone(), StateId(initial), views)
        .map_err(|e| FileError::at("", e))?;
    let mut defined = std::collections::HashSet::new();
    if let Some(tv) = obj.get("transitions") {
        for (i, t) in as_array(tv, "transitions")?.iter().enumerate() {
            let p = format!("transitions[{i}]");
            let to = as_object(t, &p)?;
            let from = state_index(&names, field(to, &p, "from")?, &join(&p, "from"))?;
            let pattern = read_pattern(&sig, field(to, &p, "action")?, &join(&p, "action"))?;
            let op = join(&p, "outcomes");
            let mut outcomes = Vec::new();
            for (j, o) in as_array(field(to, &p, "outcomes")?, &op)?.iter().enumerate() {
                let q = format!("{op}[{j}]");
                let (target, lo, hi) = match o {
                    Value::Array(xs) if xs.len() == 3 => (&xs[0], &xs[1], &xs[2]),
                    Value::Object(m) => (field(m, &q, "to")?, field(m, &q, "lo")?, field(m, &q, "hi")?),
                    _ => return Err(FileError::at(&q, "expected [target, lo, hi]")),
                };
                outcomes.push(IntervalOutcome::new(
                    StateId(state_index(&names, target, &q)?),
                    read_prob(lo, &q)?,
                    read_prob(hi, &q)?,
                ));
            }
            let dist = IntervalDistribution::new(outcomes).map_err(|e| FileError::at(&op, e))?;
            for action in expand(&sig, &pattern) {
                if !defined.insert((from, action.clone())) {
                    return Err(FileError::at(
                        &p,
                        format!(
                            "transition from `{}` on {} is defined twice",
                            names[from],
                            sig.format_action(&action)
                        ),
                    ));
                }
                world
                    .set_transition(StateId(from), &action, dist.clone())
                    .map_err(|e| FileError::at(&p, e))?;
            }
        }
    }
    Ok(world)
}

fn write_def2(w: &WorldDef2) -> Value {
    let sig = w.signature();
    let names = w.state_names();
    let views: Map<String, Value> = names
        .iter()
        .enumerate()
        .map(|(s, n)| {
            let vals: Vec<&str> = w
                .view(StateId(s))
                .0
                .iter()
                .zip(&sig.observations)
                .map(|(v, c)| c.value_name(*v))
                .collect();
            (n.clone(), json!(vals))
        })
        .collect();
    let transitions: Vec<Value> = w
        .transitions()
        .map(|(s, a, d)| {
            let pattern: Vec<Option<u32>> = a.0.iter().copied().map(Some).collect();
            let outcomes: Vec<Value> = d
                .outcomes()
                .map(|o| json!([names[o.target.0], write_prob(&o.lo), write_prob(&o.hi)]))
                .collect();
            json!({"from": names[s.0], "action": write_pattern(sig, &pattern), "outcomes": outcomes})
        })
        .collect();
    json!({
        "kind": "def2",
        "signature": write_signature(sig),
        "states": names,
        "initial": names[w.initial_state().0],
        "views": views,
        "transitions": transitions,
    })
}

// ---- Def3 ----

fn read_varref(w: &WorldDef3, key: &str, path: &str) -> Result<VarRef, FileError> {
    let (state, var) = key
        .rsplit_once('.')
        .ok_or_else(|| FileError::at(path, format!("`{key}` is not of the form state.variable")))?;
    let state = w
        .state_by_name(state)
        .ok_or_else(|| FileError::at(path, format!("unknown state `{state}`")))?;
    let slot = w
        .slot_by_name(var)
        .ok_or_else(|| FileError::at(path, format!("unknown variable `{var}`")))?;
    Ok(VarRef { state, slot })
}

fn read_assignments(w: &WorldDef3, v: Option<&Value>, path: &str) -> Result<Vec<(VarRef, u32)>, FileError> {
    let Some(v) = v else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for (key, value) in as_object(v, path)? {
        let p = join(path, key);
        let r = read_varref(w, key, &p)?;
        out.push((r, read_value(w.var_domain(r.slot), value, &p)?));
    }
    Ok(out)
}

fn write_assignments(w: &WorldDef3, items: &[(VarRef, u32)]) -> Value {
    // Effects apply in order, so the last write to a variable wins.
    let mut map = Map::new();
    for (r, v) in items {
        let key = format!("{}.{}", w.state_names()[r.state], w.var_domain(r.slot).name);
        map.insert(key, json!(w.var_domain(r.slot).value_name(*v)));
    }
    Value::Object(map)
}

fn read_def3(obj: &Map<String, Value>) -> Result<WorldDef3, FileError> {
    let sig = read_signature(obj)?;
    let (names, initial) = read_states(obj)?;
    let invisible = read_coordinates(obj, "", "invisible")?;
    let width = sig.obs_dims() + invisible.len();
    let blank = CumulativeState {
        standard: initial,
        assignment: vec![0; width * names.len()],
    };
    // Resolves names before the initial state is known.
    let probe = WorldDef3::new(sig.clone(), names.clone(), invisible.clone(), blank).map_err(|e| FileError::at("", e))?;
    // Initial values: `values.state.variable`, everything else starts at index 0.
    let mut assignment = vec![0u32; width * names.len()];
    if let Some(vv) = obj.get("values") {
        for (state, vars) in as_object(vv, "values")? {
            let p = join("values", state);
            let s = probe
                .state_by_name(state)
                .ok_or_else(|| FileError::at(&p, format!("unknown state `{state}`")))?;
            for (var, value) in as_object(vars, &p)? {
                let q = join(&p, var);
                let slot = probe
                    .slot_by_name(var)
                    .ok_or_else(|| FileError::at(&q, format!("unknown variable `{var}`")))?;
                assignment[s * width + slot] = read_value(probe.var_domain(slot), value, &q)?;
            }
        }
    }
    let initial_state = CumulativeState {
        standard: initial,
        assignment,
    };
    let mut world =
        WorldDef3::new(sig.clone(), names.clone(), invisible, initial_state).map_err(|e| FileError::at("values", e))?;
    if let Some(rv) = obj.get("rules") {
        for (i, r) in as_array(rv, "rules")?.iter().enumerate() {
            let p = format!("rules[{i}]");
            let ro = as_object(r, &p)?;
            let from = state_index(&names, field(ro, &p, "from")?, &join(&p, "from"))?;
            let pattern = read_pattern(&sig, field(ro, &p, "action")?, &join(&p, "action"))?;
            let guard = read_assignments(&world, ro.get("guard"), &join(&p, "guard"))?;
            let op = join(&p, "outcomes");
            let mut outcomes = Vec::new();
            for (j, o) in as_array(field(ro, &p, "outcomes")?, &op)?.iter().enumerate() {
                let q = format!("{op}[{j}]");
                let oo = as_object(o, &q)?;
                outcomes.push(RuleOutcome {
                    target: state_index(&names, field(oo, &q, "to")?, &join(&q, "to"))?,
                    effects: read_assignments(&world, oo.get("set"), &join(&q, "set"))?,
                    lo: read_prob(field(oo, &q, "lo")?, &join(&q, "lo"))?,
                    hi: read_prob(field(oo, &q, "hi")?, &join(&q, "hi"))?,
                });
            }
            let rule = Def3Rule::new(from, pattern, guard, outcomes).map_err(|e| FileError::at(&op, e))?;
            world.push_rule(rule).map_err(|e| FileError::at(&p, e))?;
        }
    }
    Ok(world)
}

fn write_def3(w: &WorldDef3, kind: &str) -> Value {
    let sig = w.signature();
    let names = w.state_names();
    let init = w.initial();
    let mut values = Map::new();
    for (s, n) in names.iter().enumerate() {
        let vars: Map<String, Value> = w
            .variables_of(init, s)
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0)
            .map(|(slot, v)| {
                let d = w.var_domain(slot);
                (d.name.clone(), json!(d.value_name(*v)))
            })
            .collect();
        if !vars.is_empty() {
            values.insert(n.clone(), Value::Object(vars));
        }
    }
    let rules: Vec<Value> = w
        .rules()
        .iter()
        .map(|r| {
            let outcomes: Vec<Value> = r
                .outcomes()
                .iter()
                .map(|o| {
                    json!({
                        "to": names[o.target],
                        "lo": write_prob(&o.lo),
                        "hi": write_prob(&o.hi),
                        "set": write_assignments(w, &o.effects),
                    })
                })
                .collect();
            json!({
                "from": names[r.from],
                "action": write_pattern(sig, &r.action),
                "guard": write_assignments(w, &r.guard),
                "outcomes": outcomes,
            })
        })
        .collect();
    json!({
        "kind": kind,
        "signature": write_signature(sig),
        "states": names,
        "initial": names[init.standard],
        "invisible": w.invisible(),
        "values": values,
        "rules": rules,
    })
}

// ---- Def4 ----

fn read_noise(obj: &Map<String, Value>, base: WorldDef3) -> Result<WorldDef4, FileError> {
    let names = base.state_names().to_vec();
    let sig = base.signature().clone();
    let mut world = WorldDef4::new(base);
    let Some(nv) = obj.get("noise") else {
        return Ok(world);
    };
    for (i, n) in as_array(nv, "noise")?.iter().enumerate() {
        let p = format!("noise[{i}]");
        let no = as_object(n, &p)?;
        let state = state_index(&names, field(no, &p, "state")?, &join(&p, "state"))?;
        let var = as_str(field(no, &p, "variable")?, &join(&p, "variable"))?;
        let coord = sig
            .obs_coord(var)
            .ok_or_else(|| FileError::at(join(&p, "variable"), format!("`{var}` is not a visible variable")))?;
        let domain = &sig.observations[coord];
        let when = match no.get("when") {
            None | Some(Value::Null) => None,
            Some(v) => Some(read_value(domain, v, &join(&p, "when"))?),
        };
        let volume = read_prob(field(no, &p, "volume")?, &join(&p, "volume"))?;
        let sp = join(&p, "spectrum");
        let mut spectrum = vec![prob::zero(); domain.values.len()];
        for (value, weight) in as_object(field(no, &p, "spectrum")?, &sp)? {
            let q = join(&sp, value);
            let k = read_value(domain, &Value::String(value.clone()), &q)?;
            spectrum[k as usize] = read_prob(weight, &q)?;
        }
        let descriptor = NoiseDescriptor::new(volume, spectrum).map_err(|e| FileError::at(&p, e))?;
        world
            .push_noise(NoiseRule {
                state,
                coord,
                when,
                descriptor,
            })
            .map_err(|e| FileError::at(&p, e))?;
    }
    Ok(world)
}

fn write_noise(w: &WorldDef4) -> Value {
    let sig = w.signature();
    let names = w.base().state_names();
    Value::Array(
        w.noise_rules()
            .iter()
            .map(|r| {
                let domain = &sig.observations[r.coord];
                let spectrum: BTreeMap<&str, Value> = r
                    .descriptor
                    .spectrum()
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| **p != prob::zero())
                    .map(|(k, p)| (domain.value_name(k as u32), write_prob(p)))
                    .collect();
                let mut v = json!({
                    "state": names[r.state],
                    "variable": domain.name,
                    "volume": write_prob(r.descriptor.volume()),
                    "spectrum": spectrum,
                });
                if let Some(when) = r.when {
                    v["when"] = json!(domain.value_name(when));
                }
                v
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const COIN: &str = r#"{
      "kind": "def2",
      "signature": {
        "actions": [{"name": "cmd", "values": ["Nothing", "Go"]}],
        "observations": [{"name": "x", "values": ["Off", "On"]}],
        "groups": [{"name": "go", "pattern": ["Go"]}]
      },
      "states": ["a", "b"],
      "initial": "a",
      "views": {"a": ["Off"], "b": ["On"]},
      "transitions": [
        {"from": "a", "action": "*", "outcomes": [["a", 50, 50], ["b", 50, 50]]},
        {"from": "b", "action": ["Nothing"], "outcomes": [["b", "1/1", 100]]}
      ]
    }"#;

    const LAMP: &str = r#"{
      "kind": "def4",
      "signature": {
        "actions": [{"name": "cmd", "values": ["Nothing", "Flip"]}],
        "observations": [{"name": "lamp", "values": ["Nothing", "On"]}]
      },
      "states": ["room"],
      "initial": "room",
      "invisible": [{"name": "fuse", "values": ["ok", "blown"]}],
      "values": {"room": {"lamp": "On"}},
      "rules": [
        {"from": "room", "action": ["Flip"], "guard": {"room.lamp": "On"},
         "outcomes": [{"to": "room", "lo": 100, "hi": 100, "set": {"room.lamp": "Nothing"}}]},
        {"from": "room", "action": ["Flip"],
         "outcomes": [{"to": "room", "lo": 90, "hi": 90, "set": {"room.lamp": "On"}},
                      {"to": "room", "lo": 10, "hi": 10, "set": {"room.fuse": "blown"}}]},
        {"from": "room", "action": ["Nothing"], "outcomes": [{"to": "room", "lo": 100, "hi": 100}]}
      ],
      "noise": [{"state": "room", "variable": "lamp", "when": "On", "volume": "1/3",
                 "spectrum": {"Nothing": 100}}]
    }"#;

    #[test]
    fn def2_round_trip() {
        let w = parse_world(COIN).unwrap();
        assert_eq!(w.kind(), "def2");
        let AnyWorld::Def2(d) = &w else { panic!() };
        assert_eq!(d.transition_count(), 3);
        assert!(w.validate().is_empty());
        let again = parse_world(&write_world(&w)).unwrap();
        assert_eq!(world_to_value(&again), world_to_value(&w));
    }

    #[test]
    fn def4_round_trip() {
        let w = parse_world(LAMP).unwrap();
        let AnyWorld::Def4(d) = &w else { panic!() };
        assert_eq!(d.noise_rules().len(), 1);
        assert_eq!(d.base().rules().len(), 3);
        let text = write_world(&w);
        let again = parse_world(&text).unwrap();
        assert_eq!(world_to_value(&again), world_to_value(&w));
        assert!(text.contains("\"1/3\""));
    }

    #[test]
    fn programmatic_kinds() {
        let chess = parse_world(r#"{"kind": "chess", "config": {"move_cap": 50}}"#).unwrap();
        assert_eq!(chess.signature().action_count(), 36);
        let doors = parse_world(r#"{"kind": "doors", "config": {"schedules": ["L", "U"]}}"#).unwrap();
        assert_eq!(write_world(&doors), write_world(&parse_world(&write_world(&doors)).unwrap()));
    }

    #[test]
    fn errors_point_at_the_problem() {
        match parse_world("{\n  \"kind\": \"def2\",\n  oops\n}") {
            Err(FileError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let bad = COIN.replace("[\"b\", 50, 50]", "[\"c\", 50, 50]");
        match parse_world(&bad) {
            Err(FileError::Schema { path, message }) => {
                assert_eq!(path, "transitions[0].outcomes[1]");
                assert!(message.contains("`c`"));
            }
            other => panic!("{other:?}"),
        }
        let dup = COIN.replace("\"action\": [\"Nothing\"]", "\"action\": [\"Go\"]").replace("\"from\": \"b\"", "\"from\": \"a\"");
        assert!(matches!(parse_world(&dup), Err(FileError::Schema { .. })));
        let over = COIN.replace("[\"a\", 50, 50]", "[\"a\", 150, 50]");
        assert!(parse_world(&over).is_err());
        assert!(parse_world(r#"{"kind": "def9"}"#).is_err());
    }
}
