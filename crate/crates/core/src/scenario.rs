//! Bug reproduction scenarios and GUI term extraction.
//!
//! A scenario directory holds, for each step `i`:
//!
//! - `step_<i>.xml`: a uiautomator hierarchy dump of the screen before the action
//! - `step_<i>.meta`: two lines, the Activity name and the Window name (`-` for
//!   none; stacked windows are comma-separated)
//!
//! plus one `actions.log` with a line `<i> <action> <resource_id|->` per
//! exercised step. Actions are `tap`, `long_touch`, `swipe`, `type_text` and
//! `back`. The last step is the buggy screen and usually has no action.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    pub left: i32,
    pub top: i32,
    pub right: i32,
    pub bottom: i32,
}

impl FromStr for Bounds {
    type Err = String;

    /// Parses the uiautomator form `[l,t][r,b]`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let nums: Vec<i32> = s
            .split(['[', ']', ','])
            .filter(|p| !p.is_empty())
            .map(|p| p.trim().parse::<i32>().map_err(|e| format!("bounds `{s}`: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        match nums[..] {
            [left, top, right, bottom] => Ok(Bounds {
                left,
                top,
                right,
                bottom,
            }),
            _ => Err(format!("bounds `{s}`: expected four coordinates")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComponentMeta {
    pub resource_id: Option<String>,
    pub class_name: String,
    /// Clickable, long-clickable or scrollable.
    pub interactive: bool,
    pub bounds: Bounds,
}

/// Strips the package prefix from a resource id: `com.app:id/fab` -> `fab`.
pub fn normalize_resource_id(raw: &str) -> Option<String> {
    let raw = raw.trim();
    let id = match raw.find("id/") {
        Some(pos) => &raw[pos + 3..],
        None => raw,
    };
    (!id.is_empty()).then(|| id.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Tap,
    LongTouch,
    Swipe,
    TypeText,
    Back,
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "tap" => Action::Tap,
            "long_touch" => Action::LongTouch,
            "swipe" => Action::Swipe,
            "type_text" => Action::TypeText,
            "back" => Action::Back,
            other => return Err(format!("unknown action `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExercisedAction {
    pub action: Action,
    /// Always `None` for [`Action::Back`].
    pub resource_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenObservation {
    pub step_index: u32,
    pub activity: String,
    pub window: Option<String>,
    pub components: Vec<ComponentMeta>,
    pub exercised: Option<ExercisedAction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReproductionScenario {
    pub bug_id: String,
    /// Ordered by step; the last one is the buggy screen.
    pub screens: Vec<ScreenObservation>,
}

impl ScreenObservation {
    /// Every recorded Window name; stacked windows are comma-separated.
    pub fn window_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.window
            .iter()
            .flat_map(|w| w.split(','))
            .map(str::trim)
            .filter(|w| !w.is_empty())
    }
}

impl ReproductionScenario {
    /// Checks the structural invariants: at least one screen, strictly
    /// increasing steps, and every exercised id present on its screen.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.screens.is_empty() {
            return Err("scenario has no screens".into());
        }
        if self.screens.windows(2).any(|w| w[0].step_index >= w[1].step_index) {
            return Err("step indices are not strictly increasing".into());
        }
        for s in &self.screens {
            if let Some(ex) = &s.exercised {
                match (&ex.action, &ex.resource_id) {
                    (Action::Back, Some(_)) => {
                        return Err(format!("step {}: back action carries a resource id", s.step_index))
                    }
                    (_, Some(id)) if !s.components.iter().any(|c| c.resource_id.as_ref() == Some(id)) => {
                        return Err(format!(
                            "step {}: exercised id `{id}` is not on the screen",
                            s.step_index
                        ))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

fn parse_hierarchy(xml: &str) -> std::result::Result<Vec<ComponentMeta>, String> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| e.to_string())?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for node in doc.descendants().filter(|n| n.has_tag_name("node")) {
        let flag = |name: &str| node.attribute(name) == Some("true");
        let bounds = match node.attribute("bounds") {
            Some(b) => b.parse()?,
            None => Bounds {
                left: 0,
                top: 0,
                right: 0,
                bottom: 0,
            },
        };
        let comp = ComponentMeta {
            resource_id: node.attribute("resource-id").and_then(normalize_resource_id),
            class_name: node.attribute("class").unwrap_or_default().to_string(),
            interactive: flag("clickable") || flag("long-clickable") || flag("scrollable"),
            bounds,
        };
        if seen.insert((comp.resource_id.clone(), comp.bounds)) {
            out.push(comp);
        }
    }
    Ok(out)
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses a scenario directory. The bug id is the directory name.
pub fn parse_scenario(dir: &Path) -> Result<ReproductionScenario> {
    let bug_id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_scenario_as(dir, &bug_id)
}

pub fn parse_scenario_as(dir: &Path, bug_id: &str) -> Result<ReproductionScenario> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut steps = BTreeSet::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(i) = name
            .strip_prefix("step_")
            .and_then(|r| r.strip_suffix(".xml"))
            .and_then(|n| n.parse::<u32>().ok())
        {
            steps.insert(i);
        }
    }
    if steps.is_empty() {
        return Err(Error::scenario(dir, "no step_<i>.xml dumps"));
    }

    let log_path = dir.join("actions.log");
    if !log_path.is_file() {
        return Err(Error::scenario(dir, "missing actions.log"));
    }
    let mut actions: BTreeMap<u32, ExercisedAction> = BTreeMap::new();
    for (lineno, line) in read_to_string(&log_path)?.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::scenario(dir, format!("actions.log line {}: {msg}", lineno + 1));
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [step, action, id] = fields[..] else {
            return Err(bad("expected `<i> <action> <resource_id|->`".into()));
        };
        let step: u32 = step.parse().map_err(|e| bad(format!("step `{step}`: {e}")))?;
        let action: Action = action.parse().map_err(bad)?;
        let resource_id = if id == "-" { None } else { normalize_resource_id(id) };
        if action == Action::Back && resource_id.is_some() {
            return Err(bad("back action must not name a resource id".into()));
        }
        if !steps.contains(&step) {
            return Err(bad(format!("step {step} has no hierarchy dump")));
        }
        if actions.insert(step, ExercisedAction { action, resource_id }).is_some() {
            return Err(bad(format!("duplicate action for step {step}")));
        }
    }

    let mut screens = Vec::with_capacity(steps.len());
    for step in steps {
        let xml_path = dir.join(format!("step_{step}.xml"));
        let components = parse_hierarchy(&read_to_string(&xml_path)?)
            .map_err(|e| Error::scenario(dir, format!("step {step}: malformed hierarchy: {e}")))?;
        let meta_path = dir.join(format!("step_{step}.meta"));
        if !meta_path.is_file() {
            return Err(Error::scenario(dir, format!("step {step}: missing step_{step}.meta")));
        }
        let meta = read_to_string(&meta_path)?;
        let mut lines = meta.lines().map(str::trim);
        let activity = lines.next().filter(|a| !a.is_empty() && *a != "-").ok_or_else(|| {
            Error::scenario(dir, format!("step {step}: meta has no activity name"))
        })?;
        let window = lines
            .next()
            .filter(|w| !w.is_empty() && *w != "-")
            .map(str::to_string);
        screens.push(ScreenObservation {
            step_index: step,
            activity: activity.to_string(),
            window,
            components,
            exercised: actions.remove(&step),
        });
    }

    let scenario = ReproductionScenario {
        bug_id: bug_id.to_string(),
        screens,
    };
    scenario.validate().map_err(|m| Error::scenario(dir, m))?;
    Ok(scenario)
}

/// The last `min(n, len)` screens, in order. The buggy screen is always included.
pub fn select_screens(scenario: &ReproductionScenario, n: usize) -> &[ScreenObservation] {
    let len = scenario.screens.len();
    &scenario.screens[len - n.min(len)..]
}

/// The five GUI information types studied.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GuiInfoType {
    /// Activity and Window names.
    GS,
    /// Exercised components.
    EGC,
    GS_EGC,
    /// All interactive components on the screens.
    SC,
    GS_SC,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentSource {
    None,
    Exercised,
    Screen,
}

impl GuiInfoType {
    pub const ALL: [GuiInfoType; 5] = [
        GuiInfoType::GS,
        GuiInfoType::EGC,
        GuiInfoType::GS_EGC,
        GuiInfoType::SC,
        GuiInfoType::GS_SC,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GuiInfoType::GS => "GS",
            GuiInfoType::EGC => "EGC",
            GuiInfoType::GS_EGC => "GS_EGC",
            GuiInfoType::SC => "SC",
            GuiInfoType::GS_SC => "GS_SC",
        }
    }

    pub fn uses_screens(self) -> bool {
        matches!(self, GuiInfoType::GS | GuiInfoType::GS_EGC | GuiInfoType::GS_SC)
    }

    pub fn component_source(self) -> ComponentSource {
        match self {
            GuiInfoType::GS => ComponentSource::None,
            GuiInfoType::EGC | GuiInfoType::GS_EGC => ComponentSource::Exercised,
            GuiInfoType::SC | GuiInfoType::GS_SC => ComponentSource::Screen,
        }
    }
}

impl fmt::Display for GuiInfoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GuiInfoType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GuiInfoType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown GUI information type `{s}`")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuiTermSet {
    /// Activity and Window names; mapped by file name.
    pub screen_terms: BTreeSet<String>,
    /// Resource ids; mapped by reference scan.
    pub component_ids: BTreeSet<String>,
}

impl GuiTermSet {
    pub fn is_empty(&self) -> bool {
        self.screen_terms.is_empty() && self.component_ids.is_empty()
    }

    pub fn union(mut self, other: GuiTermSet) -> GuiTermSet {
        self.screen_terms.extend(other.screen_terms);
        self.component_ids.extend(other.component_ids);
        self
    }
}

fn exercised_ids(screens: &[ScreenObservation]) -> impl Iterator<Item = &String> + '_ {
    screens
        .iter()
        .filter_map(|s| s.exercised.as_ref())
        .filter(|e| e.action != Action::Back)
        .filter_map(|e| e.resource_id.as_ref())
}

/// Reduces a runtime screen name to a simple class name:
/// `pkg/pkg.ui.MainActivity` -> `MainActivity`, `Outer$Inner` -> `Outer`.
pub fn simple_class_name(term: &str) -> &str {
    let tail = term.rsplit('/').next().unwrap_or(term);
    let tail = tail.rsplit('.').next().unwrap_or(tail);
    tail.split('$').next().unwrap_or(tail)
}

/// Collects the GUI terms of `info` from the given screens.
///
/// Screen terms are simple class names, so `pkg.ui.MainActivity` and
/// `MainActivity` are the same term.
///
/// Screen components are the ids of interactive components plus any
/// exercised ids, so exercised terms are always a subset of screen terms.
pub fn extract_terms(screens: &[ScreenObservation], info: GuiInfoType) -> GuiTermSet {
    let mut terms = GuiTermSet::default();
    if info.uses_screens() {
        for s in screens {
            terms.screen_terms.insert(simple_class_name(&s.activity).to_string());
            terms
                .screen_terms
                .extend(s.window_names().map(|w| simple_class_name(w).to_string()));
        }
    }
    match info.component_source() {
        ComponentSource::None => {}
        ComponentSource::Exercised => terms.component_ids.extend(exercised_ids(screens).cloned()),
        ComponentSource::Screen => {
            for s in screens {
                terms.component_ids.extend(
                    s.components
                        .iter()
                        .filter(|c| c.interactive)
                        .filter_map(|c| c.resource_id.clone()),
                );
            }
            terms.component_ids.extend(exercised_ids(screens).cloned());
        }
    }
    terms
}
