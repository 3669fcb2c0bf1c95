//! Breadth-first planner over the full TextHouse state.
//!
//! Search ignores actions that can never shorten a plan (`look`, `close`,
//! handling of non-target objects, placing into non-target receptacles), so
//! the returned plan is still a shortest one.

use std::collections::{HashMap, VecDeque};

use super::texthouse::{Action, TaskSpec, WorldState};
use super::{EnvError, TaskFamily, TextHouse};

const NODE_LIMIT: usize = 1_000_000;

fn relevant(task: &TaskSpec, state: &WorldState, action: Action) -> bool {
    let target_kind = task.goal.target_kind.as_deref();
    let rec_kind = |r: u8| task.layout.receptacles[r as usize].kind.as_str();
    match action {
        Action::Look | Action::Close(_) => false,
        Action::GoTo(_) => true,
        Action::Open(r) => {
            Some(rec_kind(r)) == target_kind
                || state.place.iter().enumerate().any(|(o, p)| {
                    *p == super::texthouse::Place::In(r) && task.is_target(o as u8)
                })
        }
        Action::Take(o, _) => task.is_target(o),
        Action::Put(o, r) => task.is_target(o) && Some(rec_kind(r)) == target_kind,
        Action::Clean(o, _) => task.family == TaskFamily::Clean && task.is_target(o),
        Action::Heat(o, _) => task.family == TaskFamily::Heat && task.is_target(o),
        Action::Cool(o, _) => task.family == TaskFamily::Cool && task.is_target(o),
        Action::UseLamp(_) => task.family == TaskFamily::Examine,
    }
}

pub(crate) fn search(task: &TaskSpec, start: &WorldState) -> Result<Vec<Action>, EnvError> {
    if task.goal_met(start) {
        return Ok(Vec::new());
    }
    // node index -> (state, parent index, action from parent)
    let mut nodes: Vec<(WorldState, usize, Option<Action>)> = vec![(start.clone(), 0, None)];
    let mut index: HashMap<WorldState, usize> = HashMap::new();
    index.insert(start.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let state = nodes[i].0.clone();
        for action in task.legal_actions(&state) {
            if !relevant(task, &state, action) {
                continue;
            }
            let next = task.apply(&state, action);
            if index.contains_key(&next) {
                continue;
            }
            let done = task.goal_met(&next);
            let id = nodes.len();
            index.insert(next.clone(), id);
            nodes.push((next, i, Some(action)));
            if done {
                let mut plan = Vec::new();
                let mut cur = id;
                while let Some(a) = nodes[cur].2 {
                    plan.push(a);
                    cur = nodes[cur].1;
                }
                plan.reverse();
                return Ok(plan);
            }
            if nodes.len() > NODE_LIMIT {
                return Err(EnvError::Unsolvable(format!(
                    "search exceeded {NODE_LIMIT} states"
                )));
            }
            queue.push_back(id);
        }
    }
    Err(EnvError::Unsolvable("goal unreachable".into()))
}

/// Shortest action sequence from the task's initial state.
pub fn oracle_plan(task: &TaskSpec) -> Result<Vec<String>, EnvError> {
    task.validate()?;
    let plan = search(task, &task.initial_state())?;
    Ok(plan.into_iter().map(|a| task.action_text(a)).collect())
}

/// Shortest action sequence from the environment's current state.
pub fn plan_from(env: &TextHouse) -> Result<Vec<String>, EnvError> {
    let task = env.task();
    let plan = search(task, env.state())?;
    Ok(plan.into_iter().map(|a| task.action_text(a)).collect())
}

#[cfg(test)]
mod tests {
    use super::super::texthouse::tests::small_put;
    use super::super::Environment;
    use super::*;

    #[test]
    fn one_hop_put_is_four_steps() {
        let plan = oracle_plan(&small_put()).unwrap();
        assert_eq!(
            plan,
            [
                "go to countertop 1",
                "take apple 1 from countertop 1",
                "go to fridge 1",
                "put apple 1 in/on fridge 1"
            ]
        );
    }

    #[test]
    fn already_at_goal_is_empty() {
        let mut t = small_put();
        t.layout.placement[0] = 2;
        assert!(oracle_plan(&t).unwrap().is_empty());
        let mut env = TextHouse::new(t).unwrap();
        env.reset();
        assert!(env.goal_satisfied());
    }

    #[test]
    fn closed_target_needs_open() {
        let mut t = small_put();
        t.layout.open[2] = false;
        let plan = oracle_plan(&t).unwrap();
        assert_eq!(plan.len(), 5);
        assert!(plan.contains(&"open fridge 1".to_string()));
    }

    #[test]
    fn plan_from_midway() {
        let mut env = TextHouse::new(small_put()).unwrap();
        env.reset();
        env.step("go to countertop 1").unwrap();
        assert_eq!(plan_from(&env).unwrap().len(), 3);
    }
}
