//! Noncontextual 0/1 assignments by backtracking.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orthostruct::OrthogonalityGraph;
use crate::rayset::{RayId, RaySet, RAY_COUNT};

/// Which constraints a valid assignment has to meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ValidityRule {
    /// Exactly one ray valued 1 in every context.
    #[default]
    PerBasis,
    /// Additionally no two orthogonal in-scope rays are both valued 1.
    Orthogonality,
}

impl std::str::FromStr for ValidityRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-basis" => Ok(ValidityRule::PerBasis),
            "orthogonality" => Ok(ValidityRule::Orthogonality),
            _ => Err(Error::UnknownSelector(s.into())),
        }
    }
}

/// Rays valued 1 within `scope`; every other scope ray is valued 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub scope: RaySet,
    pub ones: RaySet,
}

impl Assignment {
    pub fn value(&self, id: RayId) -> Option<u8> {
        self.scope
            .contains(id)
            .then(|| self.ones.contains(id) as u8)
    }

    /// Checks the assignment against `contexts`. With `graph` given, also
    /// checks that no two orthogonal scope rays are both 1.
    pub fn validate(
        &self,
        contexts: &[RaySet],
        graph: Option<&OrthogonalityGraph>,
    ) -> std::result::Result<(), String> {
        if !self.ones.is_subset(self.scope) {
            return Err("ones outside scope".into());
        }
        for ctx in contexts {
            let n = ctx.intersection(self.ones).len();
            if n != 1 {
                return Err(format!("context {ctx:?} holds {n} ones"));
            }
        }
        if let Some(g) = graph {
            for r in self.ones {
                if !g.neighbours(r).intersection(self.ones).is_empty() {
                    return Err(format!("ray {r} is valued 1 next to an orthogonal 1"));
                }
            }
        }
        Ok(())
    }

    pub fn ones_list(&self) -> Vec<RayId> {
        self.ones.iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Colorability {
    Colorable(Assignment),
    Uncolorable,
}

impl Colorability {
    pub fn is_colorable(&self) -> bool {
        matches!(self, Colorability::Colorable(_))
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            Colorability::Colorable(a) => Some(a),
            Colorability::Uncolorable => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub rule: ValidityRule,
    pub node_budget: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            rule: ValidityRule::PerBasis,
            node_budget: 10_000_000,
        }
    }
}

struct Search<'a> {
    contexts: &'a [RaySet],
    conflict: Vec<RaySet>,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn solve(&mut self, ones: RaySet, zeros: RaySet) -> Result<Option<RaySet>> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::TimeoutExceeded { nodes: self.nodes });
        }
        // Context without a 1 and with fewest undecided rays; ties go to the lowest index.
        let mut best = None;
        let mut best_len = u32::MAX;
        for &ctx in self.contexts {
            if !ctx.intersection(ones).is_empty() {
                continue;
            }
            let open = ctx.difference(zeros);
            let n = open.len();
            if n == 0 {
                return Ok(None);
            }
            if n < best_len {
                best_len = n;
                best = Some(open);
                if n == 1 {
                    break;
                }
            }
        }
        let Some(open) = best else {
            return Ok(Some(ones));
        };
        let mut zeros = zeros;
        for r in open {
            let mut next_ones = ones;
            next_ones.insert(r);
            let next_zeros = zeros.union(self.conflict[r as usize - 1]);
            if let Some(found) = self.solve(next_ones, next_zeros)? {
                return Ok(Some(found));
            }
            zeros.insert(r);
        }
        Ok(None)
    }
}

/// Finds a valid assignment for the rays occurring in `contexts` or proves
/// none exists.
pub fn colorable(
    contexts: &[RaySet],
    graph: &OrthogonalityGraph,
    cfg: SolverConfig,
) -> Result<Colorability> {
    let scope = contexts.iter().fold(RaySet::EMPTY, |a, &c| a.union(c));
    let mut conflict = vec![RaySet::EMPTY; RAY_COUNT];
    match cfg.rule {
        ValidityRule::PerBasis => {
            for &ctx in contexts {
                for r in ctx {
                    conflict[r as usize - 1] = conflict[r as usize - 1].union(ctx);
                }
            }
            for r in scope {
                conflict[r as usize - 1].remove(r);
            }
        }
        ValidityRule::Orthogonality => {
            for r in scope {
                conflict[r as usize - 1] = graph.neighbours(r).intersection(scope);
            }
        }
    }
    let mut search = Search {
        contexts,
        conflict,
        nodes: 0,
        budget: cfg.node_budget,
    };
    Ok(match search.solve(RaySet::EMPTY, RaySet::EMPTY)? {
        Some(ones) => Colorability::Colorable(Assignment { scope, ones }),
        None => Colorability::Uncolorable,
    })
}

/// Exhaustive check over all 2^k assignments of the scope rays. Test oracle
/// for small instances only.
pub fn brute_force_colorable(
    contexts: &[RaySet],
    graph: &OrthogonalityGraph,
    rule: ValidityRule,
) -> Option<Assignment> {
    let scope = contexts.iter().fold(RaySet::EMPTY, |a, &c| a.union(c));
    let rays: Vec<RayId> = scope.iter().collect();
    assert!(rays.len() <= 24, "brute force limited to 24 rays");
    let g = (rule == ValidityRule::Orthogonality).then_some(graph);
    (0u32..1 << rays.len()).find_map(|bits| {
        let ones: RaySet = rays
            .iter()
            .enumerate()
            .filter(|(k, _)| bits >> k & 1 == 1)
            .map(|(_, &r)| r)
            .collect();
        let a = Assignment { scope, ones };
        a.validate(contexts, g).is_ok().then_some(a)
    })
}

/// Distinct rays of a context list, ascending.
pub fn scope_of(contexts: &[RaySet]) -> BTreeSet<RayId> {
    contexts.iter().flat_map(|c| c.iter()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn complete_graph() -> OrthogonalityGraph {
        // Every pair adjacent within the first 16 rays.
        let all16 = RaySet((1u128 << 16) - 1);
        OrthogonalityGraph::from_neighbours(
            (1..=120u8)
                .map(|r| {
                    if r <= 16 {
                        all16.difference(RaySet::single(r))
                    } else {
                        RaySet::EMPTY
                    }
                })
                .collect(),
        )
    }

    fn set(ids: &[u8]) -> RaySet {
        ids.iter().collect()
    }

    #[test]
    fn single_context_is_colorable() {
        let g = complete_graph();
        let res = colorable(&[set(&[1, 2, 3])], &g, SolverConfig::default()).unwrap();
        let a = *res.assignment().unwrap();
        assert_eq!(a.ones.len(), 1);
        assert!(a.validate(&[set(&[1, 2, 3])], None).is_ok());
    }

    #[test]
    fn odd_cover_by_pairs_is_uncolorable() {
        // Triangle of 2-element contexts: every ray twice, three contexts.
        let g = complete_graph();
        let ctx = [set(&[1, 2]), set(&[2, 3]), set(&[1, 3])];
        let res = colorable(&ctx, &g, SolverConfig::default()).unwrap();
        assert_eq!(res, Colorability::Uncolorable);
        assert!(brute_force_colorable(&ctx, &g, ValidityRule::PerBasis).is_none());
    }

    #[test]
    fn orthogonality_rule_is_stricter() {
        let g = complete_graph();
        // {1,2} and {3,4}: per-basis allows 1 and 3, but 1 ⊥ 3 in this graph.
        let ctx = [set(&[1, 2]), set(&[3, 4])];
        assert!(colorable(&ctx, &g, SolverConfig::default())
            .unwrap()
            .is_colorable());
        let strict = SolverConfig {
            rule: ValidityRule::Orthogonality,
            ..SolverConfig::default()
        };
        assert_eq!(
            colorable(&ctx, &g, strict).unwrap(),
            Colorability::Uncolorable
        );
    }

    #[test]
    fn budget_is_enforced() {
        let g = complete_graph();
        let ctx = [set(&[1, 2]), set(&[2, 3]), set(&[1, 3])];
        let cfg = SolverConfig {
            node_budget: 1,
            ..SolverConfig::default()
        };
        assert!(matches!(
            colorable(&ctx, &g, cfg),
            Err(Error::TimeoutExceeded { .. })
        ));
    }

    proptest! {
        #[test]
        fn agrees_with_brute_force(raw in prop::collection::vec(prop::collection::btree_set(1u8..=12, 1..5), 1..9), strict in any::<bool>()) {
            let g = complete_graph();
            let ctx: Vec<RaySet> = raw.iter().map(|s| s.iter().collect()).collect();
            let rule = if strict { ValidityRule::Orthogonality } else { ValidityRule::PerBasis };
            let cfg = SolverConfig { rule, ..SolverConfig::default() };
            let fast = colorable(&ctx, &g, cfg).unwrap();
            let slow = brute_force_colorable(&ctx, &g, rule);
            prop_assert_eq!(fast.is_colorable(), slow.is_some());
            if let Some(a) = fast.assignment() {
                prop_assert!(a.validate(&ctx, strict.then_some(&g)).is_ok());
            }
        }
    }
}
