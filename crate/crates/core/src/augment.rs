//! Query reformulation, re-ranking and the configuration grid.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::{FileSet, GuiMapper};
use crate::preprocess::{preprocess_text, TokenList};
use crate::retrieval::{Query, RankedEntry, RankedList, Ranker, QUERY_PREFIX};
use crate::scenario::{extract_terms, select_screens, GuiInfoType, GuiTermSet, ReproductionScenario};

use GuiInfoType::*;

pub const SCREEN_COUNTS: [u8; 3] = [2, 3, 4];

/// (filter, boost) pairs where the boosted files are always a subset of the
/// filtered ones.
pub const FEASIBLE_FILTER_BOOST: [(GuiInfoType, GuiInfoType); 9] = [
    (GS_EGC, GS),
    (GS_EGC, EGC),
    (SC, GS),
    (SC, EGC),
    (SC, GS_EGC),
    (GS_SC, GS),
    (GS_SC, EGC),
    (GS_SC, GS_EGC),
    (GS_SC, SC),
];

pub fn is_feasible_filter_boost(filter: GuiInfoType, boost: GuiInfoType) -> bool {
    FEASIBLE_FILTER_BOOST.contains(&(filter, boost))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rerank {
    None,
    Filter(GuiInfoType),
    Boost(GuiInfoType),
    FilterBoost { filter: GuiInfoType, boost: GuiInfoType },
}

impl Rerank {
    pub fn filter_info(self) -> Option<GuiInfoType> {
        match self {
            Rerank::Filter(f) | Rerank::FilterBoost { filter: f, .. } => Some(f),
            _ => None,
        }
    }

    pub fn boost_info(self) -> Option<GuiInfoType> {
        match self {
            Rerank::Boost(b) | Rerank::FilterBoost { boost: b, .. } => Some(b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReformMethod {
    Expand,
    Replace,
}

impl ReformMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ReformMethod::Expand => "expand",
            ReformMethod::Replace => "replace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Reform {
    None,
    Apply(ReformMethod, GuiInfoType),
}

/// One point of the augmentation grid. Construct through [`Configuration::new`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    n_screens: u8,
    rerank: Rerank,
    reform: Reform,
}

impl Configuration {
    pub fn new(n_screens: u8, rerank: Rerank, reform: Reform) -> Result<Self> {
        if !SCREEN_COUNTS.contains(&n_screens) {
            return Err(Error::Config(format!("screen count {n_screens} not in 2..=4")));
        }
        if let Rerank::FilterBoost { filter, boost } = rerank {
            if !is_feasible_filter_boost(filter, boost) {
                return Err(Error::Config(format!(
                    "filtering with {filter} and boosting with {boost} is not a feasible combination"
                )));
            }
        }
        if rerank == Rerank::None && reform == Reform::None {
            return Err(Error::Config("no re-ranking and no reformulation is the baseline".into()));
        }
        Ok(Self {
            n_screens,
            rerank,
            reform,
        })
    }

    /// Validates the flat field layout used in reports: a re-ranking kind with
    /// optional filter/boost info, and a reformulation kind with optional info.
    pub fn from_fields(
        n_screens: u8,
        rerank: &str,
        filter_info: Option<GuiInfoType>,
        boost_info: Option<GuiInfoType>,
        reform: &str,
        reform_info: Option<GuiInfoType>,
    ) -> Result<Self> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let rerank = match (rerank, filter_info, boost_info) {
            ("none", None, None) => Rerank::None,
            ("filter", Some(f), None) => Rerank::Filter(f),
            ("boost", None, Some(b)) => Rerank::Boost(b),
            ("filter_boost", Some(filter), Some(boost)) => Rerank::FilterBoost { filter, boost },
            ("none" | "filter" | "boost" | "filter_boost", _, _) => {
                return bad("re-ranking kind and filter/boost information disagree")
            }
            _ => return bad("unknown re-ranking kind"),
        };
        let reform = match (reform, reform_info) {
            ("none", None) => Reform::None,
            ("expand", Some(i)) => Reform::Apply(ReformMethod::Expand, i),
            ("replace", Some(i)) => Reform::Apply(ReformMethod::Replace, i),
            ("none" | "expand" | "replace", _) => {
                return bad("reformulation kind and information disagree")
            }
            _ => return bad("unknown reformulation kind"),
        };
        Self::new(n_screens, rerank, reform)
    }

    pub fn n_screens(&self) -> u8 {
        self.n_screens
    }

    pub fn rerank(&self) -> Rerank {
        self.rerank
    }

    pub fn reform(&self) -> Reform {
        self.reform
    }

    pub fn family(&self) -> Family {
        match self.rerank {
            Rerank::None => Family::Reformulation,
            Rerank::Filter(_) => Family::Filtering,
            Rerank::Boost(_) => Family::Boosting,
            Rerank::FilterBoost { .. } => Family::FilterBoost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Filtering,
    Boosting,
    FilterBoost,
    Reformulation,
}

impl fmt::Display for Configuration {
    /// Canonical form `s<k>/<rerank>[:<filter>][+<boost>]/<reform>[:<info>]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}/", self.n_screens)?;
        match self.rerank {
            Rerank::None => f.write_str("none")?,
            Rerank::Filter(i) => write!(f, "f:{i}")?,
            Rerank::Boost(i) => write!(f, "b+{i}")?,
            Rerank::FilterBoost { filter, boost } => write!(f, "fb:{filter}+{boost}")?,
        }
        match self.reform {
            Reform::None => f.write_str("/none"),
            Reform::Apply(m, i) => write!(f, "/{}:{i}", m.as_str()),
        }
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("malformed configuration `{s}`"));
        let mut parts = s.split('/');
        let (Some(screens), Some(rerank), Some(reform), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad());
        };
        let n_screens: u8 = screens
            .strip_prefix('s')
            .and_then(|n| n.parse().ok())
            .ok_or_else(bad)?;
        let rerank = if rerank == "none" {
            Rerank::None
        } else if let Some(rest) = rerank.strip_prefix("fb:") {
            let (filter, boost) = rest.split_once('+').ok_or_else(bad)?;
            Rerank::FilterBoost {
                filter: filter.parse()?,
                boost: boost.parse()?,
            }
        } else if let Some(info) = rerank.strip_prefix("f:") {
            Rerank::Filter(info.parse()?)
        } else if let Some(info) = rerank.strip_prefix("b+") {
            Rerank::Boost(info.parse()?)
        } else {
            return Err(bad());
        };
        let reform = if reform == "none" {
            Reform::None
        } else {
            let (method, info) = reform.split_once(':').ok_or_else(bad)?;
            let method = match method {
                "expand" => ReformMethod::Expand,
                "replace" => ReformMethod::Replace,
                _ => return Err(bad()),
            };
            Reform::Apply(method, info.parse()?)
        };
        Configuration::new(n_screens, rerank, reform)
    }
}

impl Serialize for Configuration {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn reform_options(include_none: bool) -> Vec<Reform> {
    let mut out = Vec::with_capacity(11);
    if include_none {
        out.push(Reform::None);
    }
    for method in [ReformMethod::Expand, ReformMethod::Replace] {
        out.extend(GuiInfoType::ALL.map(|i| Reform::Apply(method, i)));
    }
    out
}

/// The full 657-point grid in a fixed order: filtering, boosting,
/// filtering+boosting, then reformulation only. Within a family the order is
/// reformulation, re-ranking information, screen count.
pub fn enumerate_configs() -> Vec<Configuration> {
    let families: [(Vec<Rerank>, bool); 4] = [
        (GuiInfoType::ALL.map(Rerank::Filter).to_vec(), true),
        (GuiInfoType::ALL.map(Rerank::Boost).to_vec(), true),
        (
            FEASIBLE_FILTER_BOOST
                .map(|(filter, boost)| Rerank::FilterBoost { filter, boost })
                .to_vec(),
            true,
        ),
        (vec![Rerank::None], false),
    ];
    let mut out = Vec::with_capacity(657);
    for (reranks, with_plain) in families {
        for reform in reform_options(with_plain) {
            for &rerank in &reranks {
                for n in SCREEN_COUNTS {
                    out.push(Configuration { n_screens: n, rerank, reform });
                }
            }
        }
    }
    out
}

/// Orders GUI terms for query text: screen names, then resource ids.
pub fn gui_terms_text(gui: &GuiTermSet) -> String {
    gui.screen_terms
        .iter()
        .chain(&gui.component_ids)
        .cloned()
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn reformulate_query(report: &TokenList, gui: &GuiTermSet, method: ReformMethod) -> TokenList {
    let gui_tokens = preprocess_text(&gui_terms_text(gui));
    match method {
        ReformMethod::Expand => {
            let mut q = report.clone();
            q.extend(gui_tokens);
            q
        }
        ReformMethod::Replace => gui_tokens,
    }
}

/// Keeps only entries in `keep`, preserving order and scores.
pub fn filter_ranking(ranked: &RankedList, keep: &FileSet) -> RankedList {
    let entries = ranked
        .entries()
        .iter()
        .filter(|e| keep.contains(&e.path))
        .cloned()
        .collect();
    RankedList::from_ordered(ranked.query_id.clone(), entries)
}

/// Moves entries in `boosted` to the front. Both blocks keep their relative order.
pub fn boost_ranking(ranked: &RankedList, boosted: &FileSet) -> RankedList {
    let (mut front, back): (Vec<RankedEntry>, Vec<RankedEntry>) = ranked
        .entries()
        .iter()
        .cloned()
        .partition(|e| boosted.contains(&e.path));
    front.extend(back);
    RankedList::from_ordered(ranked.query_id.clone(), front)
}

/// Ranker key of the original bug report query.
pub fn baseline_query_key(bug_id: &str) -> String {
    format!("{QUERY_PREFIX}{bug_id}")
}

/// Ranker key of a reformulated query, e.g. `query:b1#s3/expand:GS`.
pub fn reformulated_query_key(bug_id: &str, n_screens: u8, method: ReformMethod, info: GuiInfoType) -> String {
    format!("{QUERY_PREFIX}{bug_id}#s{n_screens}/{}:{info}", method.as_str())
}

/// Everything [`apply_config`] needs to know about one bug.
pub struct BugContext<'a> {
    pub bug_id: &'a str,
    pub report_tokens: &'a TokenList,
    pub scenario: &'a ReproductionScenario,
    pub mapper: &'a GuiMapper<'a>,
}

impl BugContext<'_> {
    pub fn baseline_query(&self) -> Query {
        Query {
            key: baseline_query_key(self.bug_id),
            tokens: self.report_tokens.clone(),
        }
    }

    /// The query a configuration ranks with.
    pub fn query_for(&self, cfg: &Configuration) -> Query {
        match cfg.reform {
            Reform::None => self.baseline_query(),
            Reform::Apply(method, info) => {
                let screens = select_screens(self.scenario, cfg.n_screens as usize);
                let gui = extract_terms(screens, info);
                Query {
                    key: reformulated_query_key(self.bug_id, cfg.n_screens, method, info),
                    tokens: reformulate_query(self.report_tokens, &gui, method),
                }
            }
        }
    }

    pub fn gui_files(&self, info: GuiInfoType, n_screens: u8) -> FileSet {
        self.mapper
            .gui_related_files(self.scenario, info, n_screens as usize)
            .0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigOutcome {
    pub ranked: RankedList,
    /// The filter set was empty, so filtering was skipped.
    pub filter_skipped: bool,
}

/// Runs one configuration: query construction, baseline ranking, then
/// filtering and boosting (filtering first).
pub fn apply_config(ranker: &dyn Ranker, cfg: &Configuration, bug: &BugContext<'_>) -> Result<ConfigOutcome> {
    let mut ranked = ranker.rank(&bug.query_for(cfg))?;
    let mut filter_skipped = false;
    if let Some(info) = cfg.rerank.filter_info() {
        let keep = bug.gui_files(info, cfg.n_screens);
        if keep.is_empty() {
            filter_skipped = true;
        } else {
            ranked = filter_ranking(&ranked, &keep);
        }
    }
    if let Some(info) = cfg.rerank.boost_info() {
        ranked = boost_ranking(&ranked, &bug.gui_files(info, cfg.n_screens));
    }
    Ok(ConfigOutcome {
        ranked,
        filter_skipped,
    })
}
