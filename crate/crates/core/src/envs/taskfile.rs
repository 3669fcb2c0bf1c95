//! Plain-text task files.
//!
//! ```text
//! # comment
//! seed: 7
//! type: put
//! object: saltshaker
//! target: cabinet
//! instruction: put some saltshaker on cabinet
//! receptacle: countertop 1 : saltshaker 1, apple 1
//! receptacle: cabinet 1 (closed)
//! receptacle: desk 1 (lamp) : pen 1
//! ```
//!
//! Without `receptacle:` lines the layout is generated from `seed` and `type`.

use std::path::Path;

use super::generate::{generate_task, instruction};
use super::texthouse::{Goal, Layout, ObjectDef, Receptacle, TaskSpec};
use super::{EnvError, TaskFamily};

fn err(line: usize, message: impl Into<String>) -> EnvError {
    EnvError::TaskFile {
        line,
        message: message.into(),
    }
}

struct RecLine {
    rec: Receptacle,
    open: bool,
    contents: Vec<String>,
}

fn parse_receptacle(line: usize, value: &str) -> Result<RecLine, EnvError> {
    let (head, contents) = match value.split_once(':') {
        Some((h, c)) => (h.trim(), c.trim()),
        None => (value.trim(), ""),
    };
    let (name, flags) = match head.split_once('(') {
        Some((n, rest)) => {
            let flags = rest
                .strip_suffix(')')
                .ok_or_else(|| err(line, "unterminated `(` in receptacle flags"))?;
            (n.trim(), flags.split(',').map(str::trim).collect::<Vec<_>>())
        }
        None => (head, Vec::new()),
    };
    if name.is_empty() {
        return Err(err(line, "receptacle name is empty"));
    }
    let mut rec = Receptacle::new(name);
    let mut open = true;
    for f in flags {
        match f {
            "open" => open = true,
            "closed" => {
                if !rec.openable {
                    return Err(err(line, format!("{name} cannot be closed")));
                }
                open = false;
            }
            "lamp" => rec.lamp = true,
            "" => {}
            other => return Err(err(line, format!("unknown receptacle flag `{other}`"))),
        }
    }
    let contents = contents
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    Ok(RecLine {
        rec,
        open,
        contents,
    })
}

pub fn parse_task_file(text: &str) -> Result<TaskSpec, EnvError> {
    let mut seed = None;
    let mut family = None;
    let mut object = None;
    let mut target = None;
    let mut instr = None;
    let mut recs: Vec<RecLine> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| err(n, "expected `key: value`"))?;
        let value = value.trim();
        match key.trim() {
            "seed" => {
                seed = Some(value.parse::<u64>().map_err(|_| err(n, format!("bad seed `{value}`")))?)
            }
            "type" => {
                family = Some(value.parse::<TaskFamily>().map_err(|e| err(n, e.to_string()))?)
            }
            "object" => object = Some(value.to_string()),
            "target" => target = Some(value.to_string()),
            "instruction" => instr = Some(value.to_string()),
            "receptacle" => recs.push(parse_receptacle(n, value)?),
            other => return Err(err(n, format!("unknown key `{other}`"))),
        }
    }
    let family = family.ok_or_else(|| err(0, "missing `type:`"))?;
    let seed = seed.unwrap_or(0);

    if recs.is_empty() {
        if object.is_some() || target.is_some() {
            return Err(err(0, "`object:`/`target:` need an explicit layout"));
        }
        let mut task = generate_task(seed, family)?;
        if let Some(text) = instr {
            task.instruction = text;
        }
        return Ok(task);
    }

    let object = object.ok_or_else(|| err(0, "explicit layout needs `object:`"))?;
    if family != TaskFamily::Examine && target.is_none() {
        return Err(err(0, "explicit layout needs `target:`"));
    }
    let mut objects = Vec::new();
    let mut placement = Vec::new();
    for (ri, r) in recs.iter().enumerate() {
        for o in &r.contents {
            objects.push(ObjectDef::new(o.as_str()));
            placement.push(ri);
        }
    }
    let task = TaskSpec {
        seed,
        family,
        instruction: instr.unwrap_or_else(|| instruction(family, &object, target.as_deref())),
        goal: Goal {
            family,
            object_kind: object,
            target_kind: target,
        },
        layout: Layout {
            open: recs.iter().map(|r| r.open).collect(),
            receptacles: recs.into_iter().map(|r| r.rec).collect(),
            objects,
            placement,
        },
    };
    task.validate()?;
    Ok(task)
}

pub fn load_task_file(path: &Path) -> Result<TaskSpec, EnvError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(0, format!("cannot read {}: {e}", path.display())))?;
    parse_task_file(&text)
}

impl TaskSpec {
    /// Task file text with an explicit layout; parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "seed: {}\ntype: {}\nobject: {}\n",
            self.seed, self.family, self.goal.object_kind
        );
        if let Some(t) = &self.goal.target_kind {
            out.push_str(&format!("target: {t}\n"));
        }
        out.push_str(&format!("instruction: {}\n", self.instruction));
        let l = &self.layout;
        for (ri, r) in l.receptacles.iter().enumerate() {
            let mut flags = Vec::new();
            if !l.open[ri] {
                flags.push("closed");
            }
            if r.lamp {
                flags.push("lamp");
            }
            let mut line = format!("receptacle: {}", r.name);
            if !flags.is_empty() {
                line.push_str(&format!(" ({})", flags.join(", ")));
            }
            let contents: Vec<&str> = l
                .placement
                .iter()
                .enumerate()
                .filter(|(_, &p)| p == ri)
                .map(|(o, _)| l.objects[o].name.as_str())
                .collect();
            if !contents.is_empty() {
                line.push_str(&format!(" : {}", contents.join(", ")));
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}
