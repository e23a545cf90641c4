use std::fmt;

use crate::run::ResultTable;
use crate::stats::{mean, standard_error, welch_t_test, WelchTest};

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSummary {
    pub agent: String,
    pub trials: usize,
    /// Mean over trials of the final running-average reward.
    pub mean: f64,
    pub standard_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairTest {
    pub a: usize,
    pub b: usize,
    pub difference: f64,
    /// `None` when the test is undefined (too few trials, zero variance).
    pub test: Option<WelchTest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub agents: Vec<AgentSummary>,
    pub pairs: Vec<PairTest>,
}

pub fn summarize(table: &ResultTable) -> Summary {
    let finals: Vec<Vec<f64>> = (0..table.agents.len())
        .map(|a| table.final_averages(a))
        .collect();
    let agents = table
        .agents
        .iter()
        .zip(&finals)
        .map(|(spec, f)| AgentSummary {
            agent: spec.to_string(),
            trials: f.len(),
            mean: mean(f),
            standard_error: standard_error(f),
        })
        .collect();
    let mut pairs = Vec::new();
    for a in 0..finals.len() {
        for b in a + 1..finals.len() {
            pairs.push(PairTest {
                a,
                b,
                difference: mean(&finals[a]) - mean(&finals[b]),
                test: welch_t_test(&finals[a], &finals[b]),
            });
        }
    }
    Summary { agents, pairs }
}

impl Summary {
    pub fn agent(&self, name: &str) -> Option<&AgentSummary> {
        self.agents.iter().find(|a| a.agent == name)
    }

    pub fn pair(&self, a: &str, b: &str) -> Option<&PairTest> {
        let ia = self.agents.iter().position(|x| x.agent == a)?;
        let ib = self.agents.iter().position(|x| x.agent == b)?;
        self.pairs
            .iter()
            .find(|p| (p.a, p.b) == (ia, ib) || (p.a, p.b) == (ib, ia))
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "final running-average reward (mean +/- 2 SE over trials)"
        )?;
        for a in &self.agents {
            match a.standard_error {
                Some(se) => writeln!(
                    f,
                    "{}\t{:.4} +/- {:.4}\t(n={})",
                    a.agent,
                    a.mean,
                    2.0 * se,
                    a.trials
                )?,
                None => writeln!(f, "{}\t{:.4}\t(n={})", a.agent, a.mean, a.trials)?,
            }
        }
        if !self.pairs.is_empty() {
            writeln!(f, "\nWelch t-tests on final running averages")?;
        }
        for p in &self.pairs {
            let (a, b) = (&self.agents[p.a].agent, &self.agents[p.b].agent);
            match p.test {
                Some(t) => writeln!(
                    f,
                    "{a} vs {b}\tdiff {:.4}\tt {:.3}\tdf {:.1}\tp {:.3e}{}",
                    p.difference,
                    t.t,
                    t.df,
                    t.p,
                    if t.p < 0.05 {
                        "\tsignificant at 0.05"
                    } else {
                        ""
                    }
                )?,
                None => writeln!(f, "{a} vs {b}\tdiff {:.4}\tp undefined", p.difference)?,
            }
        }
        Ok(())
    }
}
