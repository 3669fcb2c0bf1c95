//! Built-in prompt templates and baseline exemplars.

pub const HOLISTIC: &str = "You are a strategic planner. Given a task instruction, past exploration
history, and current holistic strategy, generate a refined high-level plan.

Task: {task_instruction}
Previous Strategy: {holistic_strategy}
Exploration History: {window}
Strategy Fitness Score: {prev_score}

Generate a holistic strategy that:
1. Decomposes the task into ordered sub-goals
2. Accounts for progress indicated by the fitness score
3. Revises the plan if stagnation (score=0) or advances if milestone achieved (50 <= score <= 99)

Answer with the ordered sub-goals as a numbered list, one per line.
";

pub const LOCAL: &str = "You are a local executor. Given current observation, holistic strategy,
and exploration history, generate immediate action guidance.

Observation: {observation}
Holistic Strategy: {holistic_strategy}
Exploration History: {window}

Generate a local strategy that:
1. Identifies feasible next actions
2. Evaluates alignment with holistic goals
3. Provides context-aware execution guidance

Answer with one \"Action: <action>\" line per feasible action, then one \"Alignment: <note>\" line and one \"Guidance: <text>\" line.
";

pub const SCORE: &str = "Evaluate the Strategy Fitness Score based on:
- Current observation: {observation}
- Last action: {action}
- Reward signal: {reward}
- Recent history: {window}
- Holistic strategy: {holistic_strategy}

Assign numerical score (0-100):
- 0: No progress (stagnation, repeated actions, no state change)
- 1-49: Approaching sub-goal (relevant elements found, ongoing exploration)
- 50-99: Significant advancement or sub-goal completed (milestone achieved)
- 100: Task completed (overall goal reached)

Task milestones:
{milestones}

Answer with the score as a single integer.
";

/// Decision template. There is no published body for this role; it is
/// assembled from the integration rule and the action-selection contract.
pub const DECISION: &str = "You are a decision maker. Select the next action by integrating the holistic strategy and the local strategy.

Holistic Strategy: {holistic_strategy}
Local Strategy: {local_strategy}
Observation: {observation}
Available Actions:
{available_actions}

{integration_rule}
Choose exactly one action from Available Actions and answer with that action only, copied verbatim.
";

pub const PRIORITY_RULE: &str = "Integration prioritizes the Holistic Strategy when aligned with local context; otherwise it defers to the Local Strategy for grounded adaptation.";

pub const CONCAT_RULE: &str = "Use both strategies above.";

pub const REACT: &str = "Interact with a household to solve a task. Here are two examples.

{exemplars}

Here is your task.
Your task is to: {task_instruction}
History: {window}
Observation: {observation}
Available Actions:
{available_actions}

Answer with one \"think: <reasoning>\" line, then one \"act: <action>\" line naming exactly one available action.
";

pub const RETRY_ACTION: &str = "Your previous answer did not name an available action. Choose exactly one of:";

pub const RETRY_SCORE: &str = "Your previous answer did not contain a score. Reply with a single integer 0-100.";

/// Two fixed exemplar transcripts per task family for the reasoning-acting baseline.
pub fn react_exemplars(task_type: &str) -> &'static str {
    match task_type {
        "put" => PUT_EXEMPLARS,
        "examine" => EXAMINE_EXEMPLARS,
        "clean" => CLEAN_EXEMPLARS,
        "heat" => HEAT_EXEMPLARS,
        "cool" => COOL_EXEMPLARS,
        "puttwo" => PUTTWO_EXEMPLARS,
        _ => PUT_EXEMPLARS,
    }
}

const PUT_EXEMPLARS: &str = "You are at the middle of the room. You see: cabinet 1, cabinet 2, cabinet 3, cabinet 4, countertop 1, garbagecan 1, shelf 1, sinkbasin 1, toilet 1.
Your task is to: put some spraybottle on toilet.
> think: To solve the task, I need to find and take a spraybottle, then put it on toilet. A spraybottle is more likely to appear in cabinet (1-4), countertop (1), sinkbasin (1), shelf (1). I can check one by one, starting with cabinet 1.
OK.
> go to cabinet 1
You are at cabinet 1. You see: cloth 1, soapbar 1, soapbottle 1.
> go to cabinet 2
You are at cabinet 2. Cabinet 2 is closed.
> open cabinet 2
You open cabinet 2. You see: candle 1, spraybottle 2.
> think: Now I find a spraybottle (2). Next, I need to take it.
OK.
> take spraybottle 2 from cabinet 2
You pick up spraybottle 2 from cabinet 2.
> think: Now I take a spraybottle (2). Next, I need to put it in/on toilet 1.
OK.
> go to toilet 1
You are at toilet 1. You see: soapbottle 2.
> put spraybottle 2 in/on toilet 1
You put spraybottle 2 in/on toilet 1.

You are at the middle of the room. You see: cabinet 1, cabinet 2, countertop 1, countertop 2, countertop 3, drawer 1, drawer 2, fridge 1, microwave 1, shelf 1, sinkbasin 1.
Your task is to: put some saltshaker on cabinet.
> think: To solve the task, I need to find and take a saltshaker, then put it in/on a cabinet. A saltshaker is more likely to appear in countertop (1-3), shelf (1), drawer (1-2). I can check one by one, starting with countertop 1.
OK.
> go to countertop 1
You are at countertop 1. You see: mug 1, soapbottle 1.
> go to countertop 2
You are at countertop 2. You see: apple 1, bowl 1.
> go to countertop 3
You are at countertop 3. You see: bread 1, saltshaker 1.
> think: Now I find a saltshaker (1). Next, I need to take it.
OK.
> take saltshaker 1 from countertop 3
You pick up saltshaker 1 from countertop 3.
> think: Now I take a saltshaker (1). Next, I need to put it in/on a cabinet. Cabinet 1 is the closest.
OK.
> go to cabinet 1
You are at cabinet 1. Cabinet 1 is closed.
> open cabinet 1
You open cabinet 1. You see: glassbottle 1.
> put saltshaker 1 in/on cabinet 1
You put saltshaker 1 in/on cabinet 1.";

const EXAMINE_EXEMPLARS: &str = "You are at the middle of the room. You see: bed 1, desk 1, drawer 1, drawer 2, drawer 3, garbagecan 1, shelf 1, shelf 2, sidetable 1.
Your task is to: look at bowl under the desklamp.
> think: To solve the task, I need to find and take a bowl, then find and use a desklamp. A bowl is more likely to appear in drawer (1-3), desk (1), sidetable (1), shelf (1-2). A desklamp is more likely to appear in desk (1), sidetable (1). I can check one by one, starting with drawer 1.
OK.
> go to drawer 1
You are at drawer 1. Drawer 1 is closed.
> open drawer 1
You open drawer 1. You see: nothing.
> go to shelf 1
You are at shelf 1. You see: pen 1.
> go to shelf 2
You are at shelf 2. You see: bowl 1.
> think: Now I find a bowl (1). Next, I need to take it.
OK.
> take bowl 1 from shelf 2
You pick up bowl 1 from shelf 2.
> think: Now I take a bowl (1). Next, I need to find a desklamp. A desklamp is more likely to appear in desk (1), sidetable (1). I can check one by one, starting with desk 1.
OK.
> go to desk 1
You are at desk 1. You see: alarmclock 1, creditcard 1.
> go to sidetable 1
You are at sidetable 1. You see: cd 1, desklamp 1.
> think: Now I find a desklamp (1). Next, I need to use it.
OK.
> use desklamp 1
You turn on desklamp 1.

You are at the middle of the room. You see: bed 1, desk 1, desk 2, drawer 1, drawer 2, garbagecan 1, safe 1, shelf 1, sidetable 1.
Your task is to: examine the pen with the desklamp.
> think: To solve the task, I need to find and take a pen, then find and use a desklamp. A pen is more likely to appear in drawer (1-2), desk (1-2), shelf (1), sidetable (1). I can check one by one, starting with drawer 1.
OK.
> go to drawer 1
You are at drawer 1. Drawer 1 is closed.
> open drawer 1
You open drawer 1. You see: keychain 1.
> go to drawer 2
You are at drawer 2. Drawer 2 is closed.
> open drawer 2
You open drawer 2. You see: pen 2, pencil 1.
> think: Now I find a pen (2). Next, I need to take it.
OK.
> take pen 2 from drawer 2
You pick up pen 2 from drawer 2.
> think: Now I take a pen (2). Next, I need to find a desklamp, starting with desk 1.
OK.
> go to desk 1
You are at desk 1. You see: desklamp 1, laptop 1.
> use desklamp 1
You turn on desklamp 1.";

const CLEAN_EXEMPLARS: &str = "You are at the middle of the room. You see: cabinet 1, cabinet 2, countertop 1, countertop 2, diningtable 1, drawer 1, fridge 1, garbagecan 1, microwave 1, shelf 1, sinkbasin 1.
Your task is to: put a clean lettuce in diningtable.
> think: To solve the task, I need to find and take a lettuce, then clean it with sinkbasin, then put it in diningtable. A lettuce is more likely to appear in fridge (1), diningtable (1), sinkbasin (1), countertop (1-2). I can check one by one, starting with fridge 1.
OK.
> go to fridge 1
You are at fridge 1. Fridge 1 is closed.
> open fridge 1
You open fridge 1. You see: cup 3, egg 2, potato 3.
> go to diningtable 1
You are at diningtable 1. You see: apple 1, bread 1, fork 2, lettuce 1, spatula 1.
> think: Now I find a lettuce (1). Next, I need to take it.
OK.
> take lettuce 1 from diningtable 1
You pick up lettuce 1 from diningtable 1.
> think: Now I take a lettuce (1). Next, I need to go to sinkbasin (1) and clean it.
OK.
> go to sinkbasin 1
You are at sinkbasin 1. You see: apple 2, spoon 1.
> clean lettuce 1 with sinkbasin 1
You clean lettuce 1 using sinkbasin 1.
> think: Now I clean a lettuce (1). Next, I need to put it in/on diningtable 1.
OK.
> go to diningtable 1
You are at diningtable 1. You see: apple 1, bread 1, fork 2, spatula 1.
> put lettuce 1 in/on diningtable 1
You put lettuce 1 in/on diningtable 1.

You are at the middle of the room. You see: cabinet 1, cabinet 2, cabinet 3, countertop 1, drawer 1, drawer 2, fridge 1, microwave 1, shelf 1, sinkbasin 1.
Your task is to: clean some egg and put it in microwave.
> think: To solve the task, I need to find and take an egg, then clean it with sinkbasin, then put it in microwave. An egg is more likely to appear in fridge (1), countertop (1), sinkbasin (1). I can check one by one, starting with fridge 1.
OK.
> go to fridge 1
You are at fridge 1. Fridge 1 is closed.
> open fridge 1
You open fridge 1. You see: lettuce 2, mug 2.
> go to countertop 1
You are at countertop 1. You see: egg 1, knife 1, peppershaker 1.
> think: Now I find an egg (1). Next, I need to take it.
OK.
> take egg 1 from countertop 1
You pick up egg 1 from countertop 1.
> go to sinkbasin 1
You are at sinkbasin 1. You see: nothing.
> clean egg 1 with sinkbasin 1
You clean egg 1 using sinkbasin 1.
> think: Now I clean an egg (1). Next, I need to put it in/on microwave 1.
OK.
> go to microwave 1
You are at microwave 1. Microwave 1 is closed.
> open microwave 1
You open microwave 1. You see: nothing.
> put egg 1 in/on microwave 1
You put egg 1 in/on microwave 1.";

const HEAT_EXEMPLARS: &str = "You are at the middle of the room. You see: cabinet 1, cabinet 2, cabinet 3, countertop 1, countertop 2, diningtable 1, drawer 1, fridge 1, garbagecan 1, microwave 1, sinkbasin 1.
Your task is to: heat some egg and put it in diningtable.
> think: To solve the task, I need to find and take an egg, then heat it with microwave, then put it in diningtable. An egg is more likely to appear in fridge (1), countertop (1-2), diningtable (1), sinkbasin (1). I can check one by one, starting with fridge 1.
OK.
> go to fridge 1
You are at fridge 1. Fridge 1 is closed.
> open fridge 1
You open fridge 1. You see: lettuce 2, mug 2, potato 3.
> go to countertop 1
You are at countertop 1. You see: bread 1, fork 1, saltshaker 1.
> go to countertop 2
You are at countertop 2. You see: cup 1, egg 1, knife 1.
> think: Now I find an egg (1). Next, I need to take it.
OK.
> take egg 1 from countertop 2
You pick up egg 1 from countertop 2.
> think: Now I take an egg (1). Next, I need to go to microwave (1) and heat it.
OK.
> go to microwave 1
You are at microwave 1. Microwave 1 is closed.
> heat egg 1 with microwave 1
You heat egg 1 using microwave 1.
> think: Now I heat an egg (1). Next, I need to put it in/on diningtable 1.
OK.
> go to diningtable 1
You are at diningtable 1. You see: apple 2, bread 2, pan 1.
> put egg 1 in/on diningtable 1
You put egg 1 in/on diningtable 1.

You are at the middle of the room. You see: cabinet 1, cabinet 2, coffeemachine 1, countertop 1, fridge 1, garbagecan 1, microwave 1, shelf 1, sinkbasin 1.
Your task is to: put a hot mug in cabinet.
> think: To solve the task, I need to find and take a mug, then heat it with microwave, then put it in a cabinet. A mug is more likely to appear in countertop (1), coffeemachine (1), cabinet (1-2), shelf (1), sinkbasin (1). I can check one by one, starting with countertop 1.
OK.
> go to countertop 1
You are at countertop 1. You see: knife 1, pan 2, spatula 1.
> go to coffeemachine 1
You are at coffeemachine 1. You see: mug 2.
> think: Now I find a mug (2). Next, I need to take it.
OK.
> take mug 2 from coffeemachine 1
You pick up mug 2 from coffeemachine 1.
> go to microwave 1
You are at microwave 1. Microwave 1 is closed.
> heat mug 2 with microwave 1
You heat mug 2 using microwave 1.
> think: Now I heat a mug (2). Next, I need to put it in/on a cabinet, starting with cabinet 1.
OK.
> go to cabinet 1
You are at cabinet 1. Cabinet 1 is closed.
> open cabinet 1
You open cabinet 1. You see: nothing.
> put mug 2 in/on cabinet 1
You put mug 2 in/on cabinet 1.";

const COOL_EXEMPLARS: &str = "You are at the middle of the room. You see: cabinet 1, cabinet 2, countertop 1, countertop 2, diningtable 1, drawer 1, fridge 1, garbagecan 1, microwave 1, sinkbasin 1.
Your task is to: cool some pan and put it in countertop.
> think: To solve the task, I need to find and take a pan, then cool it with fridge, then put it in countertop. A pan is more likely to appear in cabinet (1-2), countertop (1-2), diningtable (1). I can check one by one, starting with cabinet 1.
OK.
> go to cabinet 1
You are at cabinet 1. Cabinet 1 is closed.
> open cabinet 1
You open cabinet 1. You see: bowl 1, plate 2.
> go to cabinet 2
You are at cabinet 2. Cabinet 2 is closed.
> open cabinet 2
You open cabinet 2. You see: pan 1.
> think: Now I find a pan (1). Next, I need to take it.
OK.
> take pan 1 from cabinet 2
You pick up pan 1 from cabinet 2.
> think: Now I take a pan (1). Next, I need to go to fridge (1) and cool it.
OK.
> go to fridge 1
You are at fridge 1. Fridge 1 is closed.
> cool pan 1 with fridge 1
You cool pan 1 using fridge 1.
> think: Now I cool a pan (1). Next, I need to put it in/on countertop 1.
OK.
> go to countertop 1
You are at countertop 1. You see: apple 1, knife 2.
> put pan 1 in/on countertop 1
You put pan 1 in/on countertop 1.

You are at the middle of the room. You see: cabinet 1, cabinet 2, cabinet 3, countertop 1, drawer 1, fridge 1, garbagecan 1, microwave 1, shelf 1, sinkbasin 1.
Your task is to: put a cool potato in cabinet.
> think: To solve the task, I need to find and take a potato, then cool it with fridge, then put it in a cabinet. A potato is more likely to appear in countertop (1), sinkbasin (1), garbagecan (1), shelf (1). I can check one by one, starting with countertop 1.
OK.
> go to countertop 1
You are at countertop 1. You see: bread 1, spoon 2.
> go to sinkbasin 1
You are at sinkbasin 1. You see: potato 2.
> think: Now I find a potato (2). Next, I need to take it.
OK.
> take potato 2 from sinkbasin 1
You pick up potato 2 from sinkbasin 1.
> go to fridge 1
You are at fridge 1. Fridge 1 is closed.
> cool potato 2 with fridge 1
You cool potato 2 using fridge 1.
> think: Now I cool a potato (2). Next, I need to put it in/on a cabinet, starting with cabinet 1.
OK.
> go to cabinet 1
You are at cabinet 1. Cabinet 1 is closed.
> open cabinet 1
You open cabinet 1. You see: glassbottle 1.
> put potato 2 in/on cabinet 1
You put potato 2 in/on cabinet 1.";

const PUTTWO_EXEMPLARS: &str = "You are at the middle of the room. You see: cabinet 1, cabinet 2, countertop 1, drawer 1, garbagecan 1, shelf 1, sinkbasin 1, toilet 1.
Your task is to: put two soapbar in garbagecan.
> think: To solve the task, I need to find and take the first soapbar, then find and take the second soapbar, then put both in garbagecan. A soapbar is more likely to appear in toilet (1), sinkbasin (1), cabinet (1-2), countertop (1). I can check one by one, starting with toilet 1.
OK.
> go to toilet 1
You are at toilet 1. You see: soapbar 1, toiletpaper 1.
> think: Now I find the first soapbar (1). Next, I need to take it.
OK.
> take soapbar 1 from toilet 1
You pick up soapbar 1 from toilet 1.
> think: Now I take the first soapbar (1). Next, I need to find the second soapbar, starting with sinkbasin 1.
OK.
> go to sinkbasin 1
You are at sinkbasin 1. You see: nothing.
> go to cabinet 1
You are at cabinet 1. Cabinet 1 is closed.
> open cabinet 1
You open cabinet 1. You see: soapbar 2, spraybottle 1.
> think: Now I find the second soapbar (2). Next, I need to take it.
OK.
> take soapbar 2 from cabinet 1
You pick up soapbar 2 from cabinet 1.
> think: Now I hold both soapbars. Next, I need to put them in/on garbagecan 1.
OK.
> go to garbagecan 1
You are at garbagecan 1. You see: nothing.
> put soapbar 1 in/on garbagecan 1
You put soapbar 1 in/on garbagecan 1.
> put soapbar 2 in/on garbagecan 1
You put soapbar 2 in/on garbagecan 1.

You are at the middle of the room. You see: cabinet 1, cabinet 2, countertop 1, countertop 2, diningtable 1, drawer 1, fridge 1, shelf 1, shelf 2, sinkbasin 1.
Your task is to: find two cd and put them in shelf.
> think: To solve the task, I need to find and take the first cd, then find and take the second cd, then put both in a shelf. A cd is more likely to appear in drawer (1), diningtable (1), countertop (1-2), cabinet (1-2). I can check one by one, starting with drawer 1.
OK.
> go to drawer 1
You are at drawer 1. Drawer 1 is closed.
> open drawer 1
You open drawer 1. You see: cd 1, pen 1.
> take cd 1 from drawer 1
You pick up cd 1 from drawer 1.
> think: Now I take the first cd (1). Next, I need to find the second cd, starting with diningtable 1.
OK.
> go to diningtable 1
You are at diningtable 1. You see: book 1, cd 3, mug 1.
> take cd 3 from diningtable 1
You pick up cd 3 from diningtable 1.
> think: Now I hold both cds. Next, I need to put them in/on shelf 1.
OK.
> go to shelf 1
You are at shelf 1. You see: vase 1.
> put cd 1 in/on shelf 1
You put cd 1 in/on shelf 1.
> put cd 3 in/on shelf 1
You put cd 3 in/on shelf 1.";
