//! Rule-set and retention-table files.

use std::path::Path;

use dvdet_core::ast::{RetentionTable, VulnRuleSet};
use serde::Deserialize;

use crate::error::{AtStage, Result, Stage, StageError};

/// The shipped rule sets.
pub const DEFAULT_RULES: &str = include_str!("../data/rules.toml");

/// The shipped retention table.
pub const DEFAULT_RETENTION: &str = include_str!("../data/retention.toml");

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    rule_set: Vec<VulnRuleSet>,
}

/// Parses a TOML rule file and validates every set.
pub fn parse_rules(text: &str) -> Result<Vec<VulnRuleSet>> {
    let file: RuleFile = toml::from_str(text).map_err(|e| StageError::input(Stage::Config, format!("rule file: {e}")))?;
    let mut seen = std::collections::BTreeSet::new();
    for set in &file.rule_set {
        set.validate().at(Stage::Config)?;
        if !seen.insert(set.vuln_id.clone()) {
            return Err(StageError::input(Stage::Config, format!("rule set `{}` defined twice", set.vuln_id)));
        }
    }
    Ok(file.rule_set)
}

pub fn parse_retention(text: &str) -> Result<RetentionTable> {
    toml::from_str(text).map_err(|e| StageError::input(Stage::Config, format!("retention table: {e}")))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| StageError::io(Stage::Config, path, e))
}

/// Rule sets from `path`, or the shipped ones.
pub fn load_rules(path: Option<&Path>) -> Result<Vec<VulnRuleSet>> {
    match path {
        Some(p) => parse_rules(&read(p)?),
        None => parse_rules(DEFAULT_RULES),
    }
}

pub fn load_retention(path: Option<&Path>) -> Result<RetentionTable> {
    match path {
        Some(p) => parse_retention(&read(p)?),
        None => parse_retention(DEFAULT_RETENTION),
    }
}

/// Picks the rule set named `vuln_id`.
pub fn select_rules(sets: Vec<VulnRuleSet>, vuln_id: &str) -> Result<VulnRuleSet> {
    let names: Vec<String> = sets.iter().map(|s| s.vuln_id.clone()).collect();
    sets.into_iter().find(|s| s.vuln_id == vuln_id).ok_or_else(|| {
        StageError::input(Stage::Config, format!("no rule set `{vuln_id}` (available: {})", names.join(", ")))
    })
}
