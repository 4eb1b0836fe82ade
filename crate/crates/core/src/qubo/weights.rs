use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constraint families that carry their own penalty weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    /// Pinning terminal node indicators when they are not substituted.
    Terminal,
    /// In-degree, flow conservation and source/sink flow rows.
    Flow,
    /// An edge may only leave a node that is in the tree.
    Tree,
    /// Product-variable linearisation.
    Product,
    /// Time ordering along used edges.
    Ordering,
    Capacity,
    Latency,
    Cost,
    /// Risk-group indicator lifts.
    Srg,
    /// At most one solution per risk group.
    Disjoint,
    /// Per-commodity and per-solution edge union lifts.
    Aggregate,
    /// Colour / super-channel selection per source and commodity.
    Colour,
    /// Every sink covered by exactly one coloured tree.
    Coverage,
    /// Spectral non-blocking on shared edges.
    Blocking,
    Objective,
}

impl Category {
    pub const ALL: [Category; 15] = [
        Category::Terminal,
        Category::Flow,
        Category::Tree,
        Category::Product,
        Category::Ordering,
        Category::Capacity,
        Category::Latency,
        Category::Cost,
        Category::Srg,
        Category::Disjoint,
        Category::Aggregate,
        Category::Colour,
        Category::Coverage,
        Category::Blocking,
        Category::Objective,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Terminal => "terminal",
            Category::Flow => "flow",
            Category::Tree => "tree",
            Category::Product => "product",
            Category::Ordering => "ordering",
            Category::Capacity => "capacity",
            Category::Latency => "latency",
            Category::Cost => "cost",
            Category::Srg => "srg",
            Category::Disjoint => "disjoint",
            Category::Aggregate => "aggregate",
            Category::Colour => "colour",
            Category::Coverage => "coverage",
            Category::Blocking => "blocking",
            Category::Objective => "objective",
        }
    }

    pub fn is_resource(self) -> bool {
        matches!(self, Category::Capacity | Category::Latency | Category::Cost)
    }

    pub fn is_hard(self) -> bool {
        self != Category::Objective
    }

    /// Tuned on the bundled fixtures for the default annealing schedule.
    /// Every hard weight exceeds the objective's upper bound, so no
    /// objective saving can pay for a violation.
    fn default_weight(self) -> f64 {
        match self {
            Category::Objective | Category::Ordering => 0.25,
            Category::Latency => 0.5,
            Category::Srg | Category::Disjoint => 8.0,
            _ => 2.0,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::validation("weights", format!("unknown category `{s}`")))
    }
}

/// λ per constraint category. Risk-group rows default to 8, other
/// structural and resource rows to 2, ordering to 0.25 and the latency
/// inequality to 0.5; the cost objective defaults to 0.25.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights(BTreeMap<Category, f64>);

impl Default for PenaltyWeights {
    fn default() -> Self {
        PenaltyWeights(
            Category::ALL
                .into_iter()
                .map(|c| (c, c.default_weight()))
                .collect(),
        )
    }
}

impl PenaltyWeights {
    pub fn get(&self, c: Category) -> f64 {
        self.0.get(&c).copied().unwrap_or_else(|| c.default_weight())
    }

    pub fn set(&mut self, c: Category, lambda: f64) -> Result<()> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::validation(
                format!("weights.{c}"),
                format!("λ must be positive, got {lambda}"),
            ));
        }
        self.0.insert(c, lambda);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Category, f64)> + '_ {
        self.0.iter().map(|(&c, &l)| (c, l))
    }

    /// Applies `name=value,...` overrides. `structural` and `resource`
    /// set every category in that group.
    pub fn apply_overrides(&mut self, spec: &str) -> Result<()> {
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| Error::validation("weights", format!("expected name=value, got `{item}`")))?;
            let lambda: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::validation("weights", format!("bad number in `{item}`")))?;
            match name.trim() {
                "structural" => {
                    for c in Category::ALL {
                        if c.is_hard() && !c.is_resource() {
                            self.set(c, lambda)?;
                        }
                    }
                }
                "resource" => {
                    for c in Category::ALL.into_iter().filter(|c| c.is_resource()) {
                        self.set(c, lambda)?;
                    }
                }
                other => self.set(other.parse()?, lambda)?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let w = PenaltyWeights::default();
        assert_eq!(w.get(Category::Flow), 2.0);
        assert_eq!(w.get(Category::Disjoint), 8.0);
        assert_eq!(w.get(Category::Capacity), 2.0);
        assert_eq!(w.get(Category::Objective), 0.25);
        // an objective below 1 times its weight never outweighs one violation
        let min_hard = w.iter().filter(|(c, _)| c.is_hard()).map(|(_, l)| l).fold(f64::INFINITY, f64::min);
        assert!(min_hard >= w.get(Category::Objective));
    }

    #[test]
    fn overrides() {
        let mut w = PenaltyWeights::default();
        w.apply_overrides("resource=6, flow=10").unwrap();
        assert_eq!(w.get(Category::Latency), 6.0);
        assert_eq!(w.get(Category::Flow), 10.0);
        assert_eq!(w.get(Category::Tree), 2.0);
        assert!(w.apply_overrides("flow=0").is_err());
        assert!(w.apply_overrides("nonsense=1").is_err());
        assert!(w.apply_overrides("flow").is_err());
    }
}
