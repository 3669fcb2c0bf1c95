//! TextHouse: a small, fully deterministic household world.
//!
//! Observation grammar:
//!
//! ```text
//! You are at the middle of the room. You see: cabinet 1, countertop 1, fridge 1.
//! You are at countertop 2. You see: apple 1, bowl 1.
//! You are at cabinet 2. Cabinet 2 is closed.
//! You open cabinet 2. You see: cup 1.
//! You close cabinet 2.
//! You pick up apple 1 from countertop 2.
//! You put apple 1 in/on fridge 1.
//! You clean apple 1 using sinkbasin 1.   (heat / cool likewise)
//! You turn on desklamp 1.
//! ```
//!
//! Actions: `look`, `go to R`, `open R`, `close R`, `take O from R`,
//! `put O in/on R`, `clean O with R`, `heat O with R`, `cool O with R`,
//! `use desklamp N`. Contents of a closed receptacle are never shown.

use std::any::Any;

use serde::{Deserialize, Serialize};

use super::{EnvError, Environment, Observation, StepOutcome, TaskFamily};

pub(crate) const MAX_ITEMS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receptacle {
    pub name: String,
    pub kind: String,
    pub openable: bool,
    pub lamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Appliance {
    Sink,
    Microwave,
    Fridge,
}

impl Receptacle {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        let kind = kind_of(&name);
        let openable = matches!(kind.as_str(), "cabinet" | "drawer" | "fridge" | "microwave" | "safe");
        Receptacle {
            name,
            kind,
            openable,
            lamp: false,
        }
    }

    pub fn with_lamp(mut self) -> Self {
        self.lamp = true;
        self
    }

    pub(crate) fn appliance(&self) -> Option<Appliance> {
        match self.kind.as_str() {
            "sinkbasin" => Some(Appliance::Sink),
            "microwave" => Some(Appliance::Microwave),
            "fridge" => Some(Appliance::Fridge),
            _ => None,
        }
    }
}

/// `"cabinet 12"` -> `"cabinet"`.
pub(crate) fn kind_of(name: &str) -> String {
    match name.rsplit_once(' ') {
        Some((head, tail)) if tail.chars().all(|c| c.is_ascii_digit()) => head.to_string(),
        _ => name.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectDef {
    pub name: String,
    pub kind: String,
}

impl ObjectDef {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        ObjectDef {
            kind: kind_of(&name),
            name,
        }
    }
}

/// Static world description plus initial placement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub receptacles: Vec<Receptacle>,
    pub objects: Vec<ObjectDef>,
    /// Receptacle index holding each object at reset.
    pub placement: Vec<usize>,
    /// Open state of each receptacle at reset (always `true` for non-openable ones).
    pub open: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub family: TaskFamily,
    pub object_kind: String,
    /// Receptacle kind the object must end up in; `None` for examine tasks.
    pub target_kind: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub seed: u64,
    pub family: TaskFamily,
    pub instruction: String,
    pub goal: Goal,
    pub layout: Layout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Place {
    In(u8),
    Held,
}

/// Mutable part of the world; the breadth-first planner searches over this.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct WorldState {
    pub agent: Option<u8>,
    pub open: u32,
    pub place: Vec<Place>,
    pub clean: u32,
    pub hot: u32,
    pub cold: u32,
    pub examined: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Action {
    Look,
    GoTo(u8),
    Open(u8),
    Close(u8),
    Take(u8, u8),
    Put(u8, u8),
    Clean(u8, u8),
    Heat(u8, u8),
    Cool(u8, u8),
    UseLamp(u8),
}

fn bit(i: u8) -> u32 {
    1u32 << i
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

impl TaskSpec {
    pub fn validate(&self) -> Result<(), EnvError> {
        let l = &self.layout;
        let bad = |m: String| Err(EnvError::InvalidTask(m));
        if l.receptacles.is_empty() {
            return bad("layout has no receptacles".into());
        }
        if l.receptacles.len() > MAX_ITEMS || l.objects.len() > MAX_ITEMS {
            return bad(format!("at most {MAX_ITEMS} receptacles and objects are supported"));
        }
        if l.placement.len() != l.objects.len() || l.open.len() != l.receptacles.len() {
            return bad("placement/open vectors do not match the layout".into());
        }
        let mut names = std::collections::BTreeSet::new();
        for n in l
            .receptacles
            .iter()
            .map(|r| &r.name)
            .chain(l.objects.iter().map(|o| &o.name))
        {
            if n.trim().is_empty() || n.contains(['\n', ',', ':']) {
                return bad(format!("invalid name `{n}`"));
            }
            if !names.insert(n.as_str()) {
                return bad(format!("duplicate name `{n}`"));
            }
        }
        if let Some(&p) = l.placement.iter().find(|&&p| p >= l.receptacles.len()) {
            return bad(format!("placement index {p} out of range"));
        }
        for (r, &open) in l.receptacles.iter().zip(&l.open) {
            if !r.openable && !open {
                return bad(format!("{} cannot be closed", r.name));
            }
        }
        let g = &self.goal;
        if g.family != self.family {
            return bad("goal family differs from task family".into());
        }
        if !l.objects.iter().any(|o| o.kind == g.object_kind) {
            return bad(format!("no `{}` object in layout", g.object_kind));
        }
        let needed = if self.family == TaskFamily::PutTwo { 2 } else { 1 };
        if l.objects.iter().filter(|o| o.kind == g.object_kind).count() < needed {
            return bad(format!("need {needed} `{}` objects", g.object_kind));
        }
        match (self.family, &g.target_kind) {
            (TaskFamily::Examine, _) => {
                if !l.receptacles.iter().any(|r| r.lamp) {
                    return bad("examine task needs a desklamp".into());
                }
            }
            (_, None) => return bad("task needs a target receptacle kind".into()),
            (_, Some(t)) => {
                if !l.receptacles.iter().any(|r| &r.kind == t) {
                    return bad(format!("no `{t}` receptacle in layout"));
                }
            }
        }
        let need_appliance = match self.family {
            TaskFamily::Clean => Some(Appliance::Sink),
            TaskFamily::Heat => Some(Appliance::Microwave),
            TaskFamily::Cool => Some(Appliance::Fridge),
            _ => None,
        };
        if let Some(a) = need_appliance {
            if !l.receptacles.iter().any(|r| r.appliance() == Some(a)) {
                return bad(format!("{} task needs a {a:?}", self.family));
            }
        }
        Ok(())
    }

    pub(crate) fn initial_state(&self) -> WorldState {
        let l = &self.layout;
        let open = l
            .open
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &o)| if o { acc | bit(i as u8) } else { acc });
        WorldState {
            agent: None,
            open,
            place: l.placement.iter().map(|&p| Place::In(p as u8)).collect(),
            clean: 0,
            hot: 0,
            cold: 0,
            examined: 0,
        }
    }

    fn receptacle(&self, r: u8) -> &Receptacle {
        &self.layout.receptacles[r as usize]
    }

    fn object(&self, o: u8) -> &ObjectDef {
        &self.layout.objects[o as usize]
    }

    pub(crate) fn is_target(&self, o: u8) -> bool {
        self.object(o).kind == self.goal.object_kind
    }

    fn in_target(&self, state: &WorldState, o: u8) -> bool {
        match (state.place[o as usize], &self.goal.target_kind) {
            (Place::In(r), Some(t)) => &self.receptacle(r).kind == t,
            _ => false,
        }
    }

    fn lamp_name(&self, r: u8) -> String {
        let n = self.layout.receptacles[..=r as usize]
            .iter()
            .filter(|x| x.lamp)
            .count();
        format!("desklamp {n}")
    }

    fn accessible(&self, state: &WorldState, r: u8) -> bool {
        state.open & bit(r) != 0
    }

    fn held(&self, state: &WorldState) -> impl Iterator<Item = u8> + '_ {
        let place = state.place.clone();
        (0..place.len() as u8).filter(move |&o| place[o as usize] == Place::Held)
    }

    pub(crate) fn goal_met(&self, state: &WorldState) -> bool {
        let targets = (0..self.layout.objects.len() as u8).filter(|&o| self.is_target(o));
        match self.family {
            TaskFamily::Put => targets.filter(|&o| self.in_target(state, o)).count() >= 1,
            TaskFamily::PutTwo => targets.filter(|&o| self.in_target(state, o)).count() >= 2,
            TaskFamily::Clean => targets
                .filter(|&o| state.clean & bit(o) != 0 && self.in_target(state, o))
                .count()
                >= 1,
            TaskFamily::Heat => targets
                .filter(|&o| state.hot & bit(o) != 0 && self.in_target(state, o))
                .count()
                >= 1,
            TaskFamily::Cool => targets
                .filter(|&o| state.cold & bit(o) != 0 && self.in_target(state, o))
                .count()
                >= 1,
            TaskFamily::Examine => targets.filter(|&o| state.examined & bit(o) != 0).count() >= 1,
        }
    }

    /// Legal actions in canonical order.
    pub(crate) fn legal_actions(&self, state: &WorldState) -> Vec<Action> {
        let n_rec = self.layout.receptacles.len() as u8;
        let mut out = Vec::new();
        for r in 0..n_rec {
            if state.agent != Some(r) {
                out.push(Action::GoTo(r));
            }
        }
        if let Some(r) = state.agent {
            let rec = self.receptacle(r);
            let accessible = self.accessible(state, r);
            if rec.openable {
                out.push(if accessible { Action::Close(r) } else { Action::Open(r) });
            }
            let held: Vec<u8> = self.held(state).collect();
            if accessible {
                if held.len() < self.family.capacity() {
                    for o in 0..state.place.len() as u8 {
                        if state.place[o as usize] == Place::In(r) {
                            out.push(Action::Take(o, r));
                        }
                    }
                }
                for &o in &held {
                    out.push(Action::Put(o, r));
                }
            }
            for &o in &held {
                match rec.appliance() {
                    Some(Appliance::Sink) => out.push(Action::Clean(o, r)),
                    Some(Appliance::Microwave) => out.push(Action::Heat(o, r)),
                    Some(Appliance::Fridge) => out.push(Action::Cool(o, r)),
                    None => {}
                }
            }
            if rec.lamp {
                out.push(Action::UseLamp(r));
            }
        }
        out.push(Action::Look);
        out
    }

    pub(crate) fn action_text(&self, action: Action) -> String {
        let r = |i: u8| &self.receptacle(i).name;
        let o = |i: u8| &self.object(i).name;
        match action {
            Action::Look => "look".to_string(),
            Action::GoTo(x) => format!("go to {}", r(x)),
            Action::Open(x) => format!("open {}", r(x)),
            Action::Close(x) => format!("close {}", r(x)),
            Action::Take(ob, x) => format!("take {} from {}", o(ob), r(x)),
            Action::Put(ob, x) => format!("put {} in/on {}", o(ob), r(x)),
            Action::Clean(ob, x) => format!("clean {} with {}", o(ob), r(x)),
            Action::Heat(ob, x) => format!("heat {} with {}", o(ob), r(x)),
            Action::Cool(ob, x) => format!("cool {} with {}", o(ob), r(x)),
            Action::UseLamp(x) => format!("use {}", self.lamp_name(x)),
        }
    }

    pub(crate) fn apply(&self, state: &WorldState, action: Action) -> WorldState {
        let mut s = state.clone();
        match action {
            Action::Look => {}
            Action::GoTo(r) => s.agent = Some(r),
            Action::Open(r) => s.open |= bit(r),
            Action::Close(r) => s.open &= !bit(r),
            Action::Take(o, _) => s.place[o as usize] = Place::Held,
            Action::Put(o, r) => s.place[o as usize] = Place::In(r),
            Action::Clean(o, _) => s.clean |= bit(o),
            Action::Heat(o, _) => {
                s.hot |= bit(o);
                s.cold &= !bit(o);
            }
            Action::Cool(o, _) => {
                s.cold |= bit(o);
                s.hot &= !bit(o);
            }
            Action::UseLamp(_) => {
                for o in self.held(state) {
                    s.examined |= bit(o);
                }
            }
        }
        s
    }

    /// Objects currently shown to the agent.
    pub(crate) fn visible(&self, state: &WorldState) -> Vec<u8> {
        match state.agent {
            Some(r) if self.accessible(state, r) => (0..state.place.len() as u8)
                .filter(|&o| state.place[o as usize] == Place::In(r))
                .collect(),
            _ => Vec::new(),
        }
    }

    fn contents_text(&self, state: &WorldState, r: u8) -> String {
        let mut items: Vec<String> = self
            .visible(state)
            .into_iter()
            .map(|o| self.object(o).name.clone())
            .collect();
        if self.receptacle(r).lamp {
            items.push(self.lamp_name(r));
        }
        if items.is_empty() {
            "You see: nothing.".to_string()
        } else {
            format!("You see: {}.", items.join(", "))
        }
    }

    pub(crate) fn describe(&self, state: &WorldState) -> String {
        match state.agent {
            None => {
                let names: Vec<&str> = self.layout.receptacles.iter().map(|r| r.name.as_str()).collect();
                format!("You are at the middle of the room. You see: {}.", names.join(", "))
            }
            Some(r) => {
                let name = &self.receptacle(r).name;
                if self.accessible(state, r) {
                    format!("You are at {name}. {}", self.contents_text(state, r))
                } else {
                    format!("You are at {name}. {} is closed.", capitalize(name))
                }
            }
        }
    }

    fn feedback(&self, after: &WorldState, action: Action) -> String {
        let r = |i: u8| self.receptacle(i).name.clone();
        let o = |i: u8| self.object(i).name.clone();
        match action {
            Action::Look | Action::GoTo(_) => self.describe(after),
            Action::Open(x) => format!("You open {}. {}", r(x), self.contents_text(after, x)),
            Action::Close(x) => format!("You close {}.", r(x)),
            Action::Take(ob, x) => format!("You pick up {} from {}.", o(ob), r(x)),
            Action::Put(ob, x) => format!("You put {} in/on {}.", o(ob), r(x)),
            Action::Clean(ob, x) => format!("You clean {} using {}.", o(ob), r(x)),
            Action::Heat(ob, x) => format!("You heat {} using {}.", o(ob), r(x)),
            Action::Cool(ob, x) => format!("You cool {} using {}.", o(ob), r(x)),
            Action::UseLamp(x) => format!("You turn on {}.", self.lamp_name(x)),
        }
    }
}

/// Live TextHouse episode.
#[derive(Debug, Clone)]
pub struct TextHouse {
    task: TaskSpec,
    state: WorldState,
    seen: u32,
    lamp_seen: bool,
}

impl TextHouse {
    pub fn new(task: TaskSpec) -> Result<Self, EnvError> {
        task.validate()?;
        let state = task.initial_state();
        let mut env = TextHouse {
            task,
            state,
            seen: 0,
            lamp_seen: false,
        };
        env.note_visible();
        Ok(env)
    }

    pub fn task(&self) -> &TaskSpec {
        &self.task
    }

    pub(crate) fn state(&self) -> &WorldState {
        &self.state
    }

    /// Hash of the full world state (not the seen-set), for external search.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.state.hash(&mut h);
        h.finish()
    }

    pub fn available(&self) -> Vec<String> {
        self.task
            .legal_actions(&self.state)
            .into_iter()
            .map(|a| self.task.action_text(a))
            .collect()
    }

    pub fn describe(&self) -> String {
        self.task.describe(&self.state)
    }

    /// Names of every object that has appeared in an observation so far.
    pub fn seen_objects(&self) -> Vec<&str> {
        (0..self.task.layout.objects.len() as u8)
            .filter(|&o| self.seen & bit(o) != 0)
            .map(|o| self.task.object(o).name.as_str())
            .collect()
    }

    pub fn held_objects(&self) -> Vec<&str> {
        self.task
            .held(&self.state)
            .map(|o| self.task.object(o).name.as_str())
            .collect()
    }

    /// Object name -> holder (`None` when held), for conservation checks.
    pub fn object_locations(&self) -> Vec<(&str, Option<&str>)> {
        self.state
            .place
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let name = self.task.layout.objects[i].name.as_str();
                match p {
                    Place::Held => (name, None),
                    Place::In(r) => (name, Some(self.task.receptacle(*r).name.as_str())),
                }
            })
            .collect()
    }

    fn note_visible(&mut self) {
        for o in self.task.visible(&self.state) {
            self.seen |= bit(o);
        }
        for o in self.task.held(&self.state).collect::<Vec<_>>() {
            self.seen |= bit(o);
        }
        if let Some(r) = self.state.agent {
            if self.task.receptacle(r).lamp {
                self.lamp_seen = true;
            }
        }
    }

    /// Which of the task family's ordered milestones currently hold, in the
    /// same order as the built-in milestone profile for the family.
    pub fn milestones(&self) -> Vec<bool> {
        let t = &self.task;
        let s = &self.state;
        let targets: Vec<u8> = (0..t.layout.objects.len() as u8).filter(|&o| t.is_target(o)).collect();
        let seen = targets.iter().filter(|&&o| self.seen & bit(o) != 0).count();
        let held_or_placed = targets
            .iter()
            .filter(|&&o| s.place[o as usize] == Place::Held || t.in_target(s, o))
            .count();
        let goal = t.goal_met(s);
        let flag = |mask: u32| targets.iter().any(|&o| mask & bit(o) != 0);
        match t.family {
            TaskFamily::Put => vec![seen >= 1, held_or_placed >= 1, goal],
            TaskFamily::Examine => {
                let at_lamp = s.agent.is_some_and(|r| t.receptacle(r).lamp);
                let holding = targets.iter().any(|&o| s.place[o as usize] == Place::Held);
                vec![seen >= 1 && self.lamp_seen, holding && at_lamp, goal]
            }
            TaskFamily::Clean => vec![held_or_placed >= 1, flag(s.clean), goal, goal],
            TaskFamily::Heat => vec![held_or_placed >= 1, flag(s.hot), goal, goal],
            TaskFamily::Cool => vec![held_or_placed >= 1, flag(s.cold), goal, goal],
            TaskFamily::PutTwo => vec![
                seen >= 1,
                held_or_placed >= 1,
                seen >= 2,
                held_or_placed >= 2,
                goal,
            ],
        }
    }
}

impl Environment for TextHouse {
    fn reset(&mut self) -> Observation {
        self.state = self.task.initial_state();
        self.seen = 0;
        self.lamp_seen = false;
        self.note_visible();
        Observation {
            text: self.describe(),
            available: self.available(),
        }
    }

    fn step(&mut self, action: &str) -> Result<StepOutcome, EnvError> {
        let chosen = self
            .task
            .legal_actions(&self.state)
            .into_iter()
            .find(|a| self.task.action_text(*a) == action)
            .ok_or_else(|| EnvError::IllegalAction {
                action: action.to_string(),
            })?;
        let was_done = self.task.goal_met(&self.state);
        self.state = self.task.apply(&self.state, chosen);
        self.note_visible();
        let done = self.task.goal_met(&self.state);
        Ok(StepOutcome {
            observation: self.task.feedback(&self.state, chosen),
            reward: if done && !was_done { 1.0 } else { 0.0 },
            done,
            available: self.available(),
        })
    }

    fn goal_satisfied(&self) -> bool {
        self.task.goal_met(&self.state)
    }

    fn instruction(&self) -> &str {
        &self.task.instruction
    }

    fn task_type(&self) -> &str {
        self.task.family.as_str()
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
