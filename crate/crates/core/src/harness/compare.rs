//! Per-state policy table across several runs on the same MDP.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use super::RunReport;
use crate::error::{Error, Result};
use crate::mdp::ActionPair;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyCell {
    /// Distinct greedy actions across agents with how many agents chose
    /// each, ordered by action. An agent with tied minima contributes its
    /// first greedy action.
    pub choices: Vec<(ActionPair, usize)>,
    /// Every agent's greedy set meets the optimal set.
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyRow {
    pub label: String,
    pub cells: Vec<PolicyCell>,
}

/// Rows are the oracle followed by one row per report; columns are states.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyTable {
    pub states: Vec<usize>,
    pub rows: Vec<PolicyRow>,
}

fn format_pairs(pairs: &[ActionPair]) -> String {
    pairs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

impl PolicyCell {
    fn render(&self) -> String {
        let body = match self.choices.as_slice() {
            [(a, _)] => a.to_string(),
            many => many
                .iter()
                .map(|(a, c)| format!("{a}x{c}"))
                .collect::<Vec<_>>()
                .join(" "),
        };
        if self.agrees {
            body
        } else {
            format!("{body} *")
        }
    }
}

/// Merges reports into a policy table. All reports must come from the same
/// MDP instance.
pub fn compare_reports(reports: &[RunReport]) -> Result<PolicyTable> {
    let first = reports.first().ok_or_else(|| Error::arg("nothing to compare"))?;
    for r in &reports[1..] {
        if r.mdp != first.mdp {
            return Err(Error::arg(format!(
                "reports `{}` and `{}` use different MDP instances ({} agents, costs seed {:?} vs {} agents, costs seed {:?})",
                first.name, r.name, first.mdp.n_agents, first.mdp.costs_seed, r.mdp.n_agents, r.mdp.costs_seed
            )));
        }
    }
    let states: Vec<usize> = first.policy_agreement.iter().map(|s| s.state).collect();

    let oracle_row = PolicyRow {
        label: "optimal".into(),
        cells: first
            .policy_agreement
            .iter()
            .map(|s| PolicyCell {
                choices: s.optimal.iter().map(|&a| (a, 0)).collect(),
                agrees: true,
            })
            .collect(),
    };
    let mut rows = vec![oracle_row];
    for r in reports {
        let cells = r
            .policy_agreement
            .iter()
            .map(|s| {
                let mut counts: BTreeMap<ActionPair, usize> = BTreeMap::new();
                for agent in &r.policies {
                    if let Some(&a) = agent.get(s.state - 1).and_then(|set| set.first()) {
                        *counts.entry(a).or_default() += 1;
                    }
                }
                PolicyCell {
                    choices: counts.into_iter().collect(),
                    agrees: s.disagreeing_agents.is_empty(),
                }
            })
            .collect();
        rows.push(PolicyRow {
            label: format!("{} ({})", r.name, r.algorithm),
            cells,
        });
    }
    Ok(PolicyTable { states, rows })
}

impl PolicyTable {
    /// Fixed-width text; cells marked `*` disagree with the optimal policy.
    pub fn to_text(&self) -> String {
        let mut grid: Vec<Vec<String>> = vec![std::iter::once("policy".to_string())
            .chain(self.states.iter().map(|x| format!("x={x}")))
            .collect()];
        for row in &self.rows {
            let mut line = vec![row.label.clone()];
            if row.label == "optimal" {
                line.extend(
                    row.cells
                        .iter()
                        .map(|c| format_pairs(&c.choices.iter().map(|&(a, _)| a).collect::<Vec<_>>())),
                );
            } else {
                line.extend(row.cells.iter().map(PolicyCell::render));
            }
            grid.push(line);
        }
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for (k, line) in grid.iter().enumerate() {
            let cells: Vec<String> = line.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
            if k == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        out
    }

    /// One line per row: label, then per state the actions and an agreement flag.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["row".to_string()];
        for x in &self.states {
            header.push(format!("x{x}"));
            header.push(format!("x{x}_agrees"));
        }
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.label.clone()];
            for c in &row.cells {
                rec.push(format_pairs(&c.choices.iter().map(|&(a, _)| a).collect::<Vec<_>>()));
                rec.push(c.agrees.to_string());
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::arg(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
