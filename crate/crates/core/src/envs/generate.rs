use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::planner::search;
use super::texthouse::{Goal, Layout, ObjectDef, Receptacle, TaskSpec};
use super::{EnvError, TaskFamily};

const MAX_ATTEMPTS: u32 = 64;

const FILLER_RECEPTACLES: &[&str] = &[
    "cabinet",
    "drawer",
    "countertop",
    "shelf",
    "diningtable",
    "sidetable",
    "dresser",
    "garbagecan",
    "safe",
    "stoveburner",
    "coffeemachine",
    "toaster",
];

const DISTRACTORS: &[&str] = &[
    "apple", "book", "bowl", "bread", "butterknife", "candle", "cd", "cellphone", "creditcard",
    "cup", "dishsponge", "egg", "fork", "keychain", "knife", "lettuce", "mug", "newspaper", "pan",
    "pen", "pencil", "peppershaker", "plate", "potato", "remotecontrol", "saltshaker", "soapbar",
    "spatula", "spoon", "spraybottle", "tomato", "vase", "watch", "winebottle",
];

fn family_objects(family: TaskFamily) -> &'static [&'static str] {
    match family {
        TaskFamily::Put => &["saltshaker", "pencil", "cd", "keychain", "spraybottle", "candle", "vase", "soapbar"],
        TaskFamily::Examine => &["book", "cd", "pen", "pencil", "watch", "keychain", "creditcard", "mug"],
        TaskFamily::Clean => &["apple", "mug", "plate", "bowl", "cup", "lettuce", "spoon", "knife", "pan"],
        TaskFamily::Heat => &["apple", "potato", "egg", "mug", "plate", "bread", "tomato", "cup"],
        TaskFamily::Cool => &["apple", "potato", "tomato", "lettuce", "bread", "mug", "plate", "pan"],
        TaskFamily::PutTwo => &["soapbar", "cd", "pencil", "book", "candle", "keychain", "creditcard", "spraybottle"],
    }
}

fn family_targets(family: TaskFamily) -> &'static [&'static str] {
    match family {
        TaskFamily::Put => &["cabinet", "drawer", "countertop", "shelf", "sidetable", "dresser", "safe"],
        TaskFamily::Examine => &[],
        TaskFamily::Clean | TaskFamily::Heat | TaskFamily::Cool => {
            &["cabinet", "countertop", "diningtable", "shelf", "drawer"]
        }
        TaskFamily::PutTwo => &["cabinet", "drawer", "shelf", "sidetable", "dresser", "safe", "garbagecan"],
    }
}

/// Smallest plan length a generated task of this family must need.
pub fn min_plan_length(family: TaskFamily) -> usize {
    match family {
        TaskFamily::Put => 4,
        TaskFamily::Examine => 3,
        TaskFamily::Clean | TaskFamily::Heat | TaskFamily::Cool => 6,
        TaskFamily::PutTwo => 6,
    }
}

pub(crate) fn instruction(family: TaskFamily, object: &str, target: Option<&str>) -> String {
    let target = target.unwrap_or("");
    match family {
        TaskFamily::Put => format!("put some {object} on {target}"),
        TaskFamily::Examine => format!("look at {object} under the desklamp"),
        TaskFamily::Clean => format!("clean some {object} and put it in {target}"),
        TaskFamily::Heat => format!("heat some {object} and put it in {target}"),
        TaskFamily::Cool => format!("cool some {object} and put it in {target}"),
        TaskFamily::PutTwo => format!("put two {object} in {target}"),
    }
}

fn numbered(kind: &str, counts: &mut std::collections::BTreeMap<String, usize>) -> String {
    let n = counts.entry(kind.to_string()).or_insert(0);
    *n += 1;
    format!("{kind} {n}")
}

fn candidate(seed: u64, attempt: u32, family: TaskFamily) -> TaskSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(attempt) << 48) ^ (family as u64 * 0x9E37_79B9));
    let object_kind = *family_objects(family).choose(&mut rng).unwrap();
    let target_kind = family_targets(family).choose(&mut rng).copied();

    let mut counts = std::collections::BTreeMap::new();
    let lamp_kind = if rng.random_bool(0.5) { "desk" } else { "sidetable" };
    let mut kinds: Vec<&str> = vec!["fridge", "microwave", "sinkbasin", lamp_kind];
    if let Some(t) = target_kind {
        kinds.push(t);
    }
    let total = rng.random_range(8..=14);
    while kinds.len() < total {
        let k = *FILLER_RECEPTACLES.choose(&mut rng).unwrap();
        kinds.push(k);
    }
    kinds.shuffle(&mut rng);
    let mut lamp_placed = false;
    let receptacles: Vec<Receptacle> = kinds
        .iter()
        .map(|k| {
            let r = Receptacle::new(numbered(k, &mut counts));
            if *k == lamp_kind && !lamp_placed {
                lamp_placed = true;
                r.with_lamp()
            } else {
                r
            }
        })
        .collect();
    let open: Vec<bool> = receptacles
        .iter()
        .map(|r| !r.openable || rng.random_bool(0.3))
        .collect();

    let n_targets = if family == TaskFamily::PutTwo { 2 } else { 1 };
    let n_objects = rng.random_range(6..=12);
    let mut obj_counts = std::collections::BTreeMap::new();
    let mut objects = Vec::new();
    for _ in 0..n_targets {
        objects.push(ObjectDef::new(numbered(object_kind, &mut obj_counts)));
    }
    let pool: Vec<&str> = DISTRACTORS.iter().copied().filter(|k| *k != object_kind).collect();
    while objects.len() < n_objects {
        let k = *pool.choose(&mut rng).unwrap();
        objects.push(ObjectDef::new(numbered(k, &mut obj_counts)));
    }

    // Targets avoid target-kind receptacles; PutTwo targets start apart.
    let allowed: Vec<usize> = (0..receptacles.len())
        .filter(|&i| Some(receptacles[i].kind.as_str()) != target_kind)
        .collect();
    let mut placement = Vec::with_capacity(objects.len());
    let mut used = Vec::new();
    for i in 0..objects.len() {
        let p = if i < n_targets {
            let free: Vec<usize> = allowed.iter().copied().filter(|p| !used.contains(p)).collect();
            let p = *free.choose(&mut rng).unwrap();
            used.push(p);
            p
        } else {
            rng.random_range(0..receptacles.len())
        };
        placement.push(p);
    }
    // Canonical object order (by holder) so the task file form round-trips.
    let mut order: Vec<usize> = (0..objects.len()).collect();
    order.sort_by_key(|&i| placement[i]);
    let objects: Vec<ObjectDef> = order.iter().map(|&i| objects[i].clone()).collect();
    let placement: Vec<usize> = order.iter().map(|&i| placement[i]).collect();

    TaskSpec {
        seed,
        family,
        instruction: instruction(family, object_kind, target_kind),
        goal: Goal {
            family,
            object_kind: object_kind.to_string(),
            target_kind: target_kind.map(str::to_string),
        },
        layout: Layout {
            receptacles,
            objects,
            placement,
            open,
        },
    }
}

/// Deterministic solvable task for `(seed, family)`.
pub fn generate_task(seed: u64, family: TaskFamily) -> Result<TaskSpec, EnvError> {
    for attempt in 0..MAX_ATTEMPTS {
        let task = candidate(seed, attempt, family);
        if task.validate().is_err() {
            continue;
        }
        match search(&task, &task.initial_state()) {
            Ok(plan) if plan.len() >= min_plan_length(family) => return Ok(task),
            _ => continue,
        }
    }
    Err(EnvError::InvalidTask(format!(
        "no solvable {family} task for seed {seed} after {MAX_ATTEMPTS} attempts"
    )))
}

/// `per_family` tasks of every family, seeds `base_seed + i`.
pub fn generate_tasks(base_seed: u64, per_family: usize) -> Result<Vec<TaskSpec>, EnvError> {
    let mut out = Vec::with_capacity(per_family * TaskFamily::ALL.len());
    for family in TaskFamily::ALL {
        for i in 0..per_family {
            out.push(generate_task(base_seed + i as u64, family)?);
        }
    }
    Ok(out)
}
