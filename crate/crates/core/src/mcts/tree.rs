//! Per-robot search tree.
//!
//! Nodes live in an arena. Each node keeps its value `X`, its visit count
//! `n_j`, up to three children keyed by [`Action`] and the set of actions not
//! yet expanded. A parent's visit count is the `n` in the UCT score of its
//! children.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{Action, RobotState};

pub type NodeId = usize;

pub const ROOT: NodeId = 0;

/// How a rollout value is folded into the ancestors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backup {
    /// Every internal node's value is the plain mean of its children's values.
    #[default]
    ChildMean,
    /// Classical running mean over all rollouts through the node.
    VisitWeighted,
}

/// `X + 2·c_p·sqrt(2·ln n / n_j)`, or `+inf` for an unvisited node.
#[inline]
pub fn uct_score(value: f64, parent_visits: u32, visits: u32, c_p: f64) -> f64 {
    if visits == 0 {
        return f64::INFINITY;
    }
    let n = f64::from(parent_visits.max(1));
    value + 2.0 * c_p * (2.0 * n.ln() / f64::from(visits)).sqrt()
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub state: RobotState,
    pub action: Option<Action>,
    pub parent: Option<NodeId>,
    pub value: f64,
    pub visits: u32,
    pub children: [Option<NodeId>; 3],
    pub depth: u32,
    untried: u8,
}

impl TreeNode {
    fn new(
        state: RobotState,
        action: Option<Action>,
        parent: Option<NodeId>,
        depth: u32,
        horizon: u32,
    ) -> Self {
        TreeNode {
            state,
            action,
            parent,
            value: 0.0,
            visits: 0,
            children: [None; 3],
            depth,
            untried: if depth < horizon { 0b111 } else { 0 },
        }
    }

    pub fn untried(&self) -> impl Iterator<Item = Action> + '_ {
        Action::ALL
            .into_iter()
            .filter(|a| self.untried & (1 << a.index()) != 0)
    }

    pub fn untried_count(&self) -> usize {
        self.untried.count_ones() as usize
    }

    pub fn has_untried(&self) -> bool {
        self.untried != 0
    }

    pub fn child_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.children.iter().flatten().copied()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.iter().all(Option::is_none)
    }
}

#[derive(Clone, Debug)]
pub struct SearchTree {
    nodes: Vec<TreeNode>,
    horizon: u32,
}

impl SearchTree {
    pub fn new(root: RobotState, horizon: u32) -> Self {
        SearchTree {
            nodes: vec![TreeNode::new(root, None, None, 0, horizon)],
            horizon,
        }
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[ROOT]
    }

    pub fn node(&self, id: NodeId) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &TreeNode)> {
        self.nodes.iter().enumerate()
    }

    /// Descends by maximal UCT until a node with untried actions, or one at
    /// the depth limit, is reached. Ties go to the first action in
    /// `Straight, Left, Right` order.
    pub fn select(&self, c_p: f64) -> NodeId {
        let mut id = ROOT;
        loop {
            let node = &self.nodes[id];
            if node.has_untried() || node.is_leaf() {
                return id;
            }
            let mut best: Option<(NodeId, f64)> = None;
            for child in node.child_ids() {
                let c = &self.nodes[child];
                let score = uct_score(c.value, node.visits, c.visits, c_p);
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((child, score));
                }
            }
            id = best.expect("internal node has children").0;
        }
    }

    /// Removes one uniformly random untried action of `id` and adds the child.
    /// `transition` computes the child's state.
    pub fn expand<R: Rng + ?Sized>(
        &mut self,
        id: NodeId,
        rng: &mut R,
        transition: impl FnOnce(RobotState, Action) -> RobotState,
    ) -> NodeId {
        let node = &self.nodes[id];
        let options: Vec<Action> = node.untried().collect();
        assert!(
            !options.is_empty(),
            "expand on a node without untried actions"
        );
        let action = options[rng.gen_range(0..options.len())];
        let state = transition(node.state, action);
        let depth = node.depth + 1;
        let child = self.nodes.len();
        self.nodes.push(TreeNode::new(
            state,
            Some(action),
            Some(id),
            depth,
            self.horizon,
        ));
        let parent = &mut self.nodes[id];
        parent.untried &= !(1 << action.index());
        parent.children[action.index()] = Some(child);
        child
    }

    /// Actions from the root down to `id`.
    pub fn path_to(&self, mut id: NodeId) -> Vec<Action> {
        let mut out = Vec::with_capacity(self.nodes[id].depth as usize);
        while let Some(a) = self.nodes[id].action {
            out.push(a);
            id = self.nodes[id].parent.expect("non-root node has a parent");
        }
        out.reverse();
        out
    }

    /// Records rollout value `x` at `leaf` and updates every ancestor.
    pub fn backpropagate(&mut self, leaf: NodeId, x: f64, backup: Backup) {
        {
            let node = &mut self.nodes[leaf];
            node.visits += 1;
            // A childless node only sees repeated rollouts at the depth
            // limit; average those.
            node.value += (x - node.value) / f64::from(node.visits);
        }
        let mut cur = self.nodes[leaf].parent;
        while let Some(id) = cur {
            let visits = self.nodes[id].visits + 1;
            let value = match backup {
                Backup::ChildMean => {
                    let (sum, n) = self.nodes[id]
                        .child_ids()
                        .fold((0.0, 0u32), |(s, n), c| (s + self.nodes[c].value, n + 1));
                    sum / f64::from(n)
                }
                Backup::VisitWeighted => {
                    let v = self.nodes[id].value;
                    v + (x - v) / f64::from(visits)
                }
            };
            let node = &mut self.nodes[id];
            node.visits = visits;
            node.value = value;
            cur = node.parent;
        }
    }

    /// Child of `id` with the largest value; ties to the earlier action.
    pub fn best_child(&self, id: NodeId) -> Option<NodeId> {
        let mut best: Option<NodeId> = None;
        for c in self.nodes[id].child_ids() {
            if self.nodes[c].visits == 0 {
                continue;
            }
            if best.is_none_or(|b| self.nodes[c].value > self.nodes[b].value) {
                best = Some(c);
            }
        }
        best
    }

    /// Greedy value descent from the root, stopping at the first node with
    /// no visited child. At most `horizon` actions.
    pub fn best_path(&self) -> Vec<Action> {
        let mut out = Vec::new();
        let mut id = ROOT;
        while let Some(c) = self.best_child(id) {
            out.push(self.nodes[c].action.expect("child has an action"));
            id = c;
        }
        out
    }

    /// Values of the root's children indexed by action.
    pub fn root_values(&self) -> [Option<f64>; 3] {
        let mut out = [None; 3];
        for a in Action::ALL {
            if let Some(c) = self.nodes[ROOT].children[a.index()] {
                if self.nodes[c].visits > 0 {
                    out[a.index()] = Some(self.nodes[c].value);
                }
            }
        }
        out
    }

    /// The subtree under the root's `action` child as a new tree, or `None`
    /// if that child does not exist.
    pub fn into_subtree(self, action: Action) -> Option<SearchTree> {
        let new_root = self.nodes[ROOT].children[action.index()]?;
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        let mut stack = vec![new_root];
        while let Some(old) = stack.pop() {
            map[old] = nodes.len();
            nodes.push(old);
            stack.extend(self.nodes[old].children.iter().rev().flatten());
        }
        let horizon = self.horizon;
        let out: Vec<TreeNode> = nodes
            .iter()
            .map(|&old| {
                let n = &self.nodes[old];
                let depth = n.depth - 1;
                let mut node = TreeNode {
                    state: n.state,
                    action: if old == new_root { None } else { n.action },
                    parent: if old == new_root {
                        None
                    } else {
                        n.parent.map(|p| map[p])
                    },
                    value: n.value,
                    visits: n.visits,
                    children: n.children.map(|c| c.map(|c| map[c])),
                    depth,
                    untried: n.untried,
                };
                // nodes that sat on the old depth limit may grow again
                if n.depth == horizon && depth < horizon {
                    node.untried = 0b111;
                }
                node
            })
            .collect();
        Some(SearchTree {
            nodes: out,
            horizon,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Cell, Heading};
    use crate::rng::rng_from;

    fn state() -> RobotState {
        RobotState::new(Cell::new(2, 2), Heading::East)
    }

    /// Root with fully expanded children carrying the given values/visits.
    fn root_with(children: &[(f64, u32)]) -> SearchTree {
        let mut t = SearchTree::new(state(), 5);
        let mut rng = rng_from(0);
        let mut ids = Vec::new();
        for _ in children {
            ids.push(t.expand(ROOT, &mut rng, |s, _| s));
        }
        // order children by action so the fixture is predictable
        ids.sort_by_key(|id| t.node(*id).action);
        for (id, &(v, n)) in ids.iter().zip(children) {
            t.nodes[*id].value = v;
            t.nodes[*id].visits = n;
        }
        t.nodes[ROOT].visits = children.iter().map(|c| c.1).sum();
        t
    }

    #[test]
    fn uct_examples() {
        let got = uct_score(0.5, 10, 2, 1.0);
        let direct = 0.5 + 2.0 * (2.0 * 10f64.ln() / 2.0).sqrt();
        assert!((got - direct).abs() < 1e-12);
        assert!((got - 3.534_854).abs() < 1e-5);
        assert_eq!(uct_score(-3.0, 10, 0, 1.0), f64::INFINITY);
        assert_eq!(uct_score(0.7, 1, 1, 1.0), 0.7);
    }

    #[test]
    fn fresh_root_selects_itself() {
        let t = SearchTree::new(state(), 5);
        assert_eq!(t.select(1.0), ROOT);
        assert_eq!(t.root().untried_count(), 3);
    }

    #[test]
    fn select_prefers_value_at_equal_visits() {
        let t = root_with(&[(0.1, 5), (0.9, 5), (0.1, 5)]);
        let picked = t.select(1.0);
        assert_eq!(t.node(picked).action, Some(Action::Left));
    }

    #[test]
    fn select_enters_unvisited_child_first() {
        let t = root_with(&[(0.9, 3), (0.9, 3), (-5.0, 0)]);
        let picked = t.select(1.0);
        assert_eq!(t.node(picked).action, Some(Action::Right));
    }

    #[test]
    fn expand_consumes_one_untried() {
        let mut t = SearchTree::new(state(), 5);
        let mut rng = rng_from(3);
        let c = t.expand(ROOT, &mut rng, |s, _| s);
        assert_eq!(t.root().untried_count(), 2);
        assert_eq!(t.root().child_ids().count(), 1);
        assert_eq!(t.node(c).visits, 0);
        assert_eq!(t.node(c).depth, 1);
    }

    #[test]
    fn expand_is_reproducible() {
        let seq = |seed| {
            let mut t = SearchTree::new(state(), 5);
            let mut rng = rng_from(seed);
            (0..3)
                .map(|_| {
                    let c = t.expand(ROOT, &mut rng, |s, _| s);
                    t.node(c).action.unwrap()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(seq(9), seq(9));
    }

    #[test]
    fn child_mean_backup() {
        let mut t = SearchTree::new(state(), 5);
        let mut rng = rng_from(1);
        let a = t.expand(ROOT, &mut rng, |s, _| s);
        t.backpropagate(a, 0.4, Backup::ChildMean);
        assert!((t.root().value - 0.4).abs() < 1e-12);
        let b = t.expand(ROOT, &mut rng, |s, _| s);
        t.nodes[a].value = 0.2;
        t.backpropagate(b, 0.6, Backup::ChildMean);
        assert!((t.root().value - 0.4).abs() < 1e-12);
        assert_eq!(t.root().visits, 2);
    }

    #[test]
    fn three_level_chain_means() {
        let mut t = SearchTree::new(state(), 5);
        let mut rng = rng_from(2);
        let a = t.expand(ROOT, &mut rng, |s, _| s);
        t.backpropagate(a, 1.0, Backup::ChildMean);
        let b = t.expand(ROOT, &mut rng, |s, _| s);
        t.backpropagate(b, 0.0, Backup::ChildMean);
        let aa = t.expand(a, &mut rng, |s, _| s);
        t.backpropagate(aa, 0.3, Backup::ChildMean);
        let ab = t.expand(a, &mut rng, |s, _| s);
        t.backpropagate(ab, 0.5, Backup::ChildMean);
        // recompute bottom-up by hand
        let a_mean = (0.3 + 0.5) / 2.0;
        assert!((t.node(a).value - a_mean).abs() < 1e-12);
        assert!((t.root().value - (a_mean + 0.0) / 2.0).abs() < 1e-12);
        assert_eq!(t.root().visits, 4);
        assert_eq!(t.node(a).visits, 3);
    }

    #[test]
    fn visit_weighted_backup_is_running_mean() {
        let mut t = SearchTree::new(state(), 5);
        let mut rng = rng_from(2);
        let a = t.expand(ROOT, &mut rng, |s, _| s);
        t.backpropagate(a, 1.0, Backup::VisitWeighted);
        let b = t.expand(ROOT, &mut rng, |s, _| s);
        t.backpropagate(b, 0.0, Backup::VisitWeighted);
        let aa = t.expand(a, &mut rng, |s, _| s);
        t.backpropagate(aa, 0.5, Backup::VisitWeighted);
        assert!((t.root().value - 0.5).abs() < 1e-12);
        assert!((t.node(a).value - 0.75).abs() < 1e-12);
    }

    #[test]
    fn depth_limit_stops_expansion() {
        let mut t = SearchTree::new(state(), 1);
        let mut rng = rng_from(4);
        let c = t.expand(ROOT, &mut rng, |s, _| s);
        assert!(!t.node(c).has_untried());
    }

    #[test]
    fn subtree_keeps_stats_and_reindexes() {
        let mut t = SearchTree::new(state(), 2);
        let mut rng = rng_from(5);
        for _ in 0..3 {
            let c = t.expand(ROOT, &mut rng, |s, _| s);
            t.backpropagate(c, 0.1, Backup::ChildMean);
        }
        let left = t.root().children[Action::Left.index()].unwrap();
        let g = t.expand(left, &mut rng, |s, _| s);
        t.backpropagate(g, 0.8, Backup::ChildMean);
        let g_action = t.node(g).action.unwrap();
        let sub = t.into_subtree(Action::Left).unwrap();
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.root().visits, 2);
        assert_eq!(sub.root().action, None);
        assert_eq!(sub.root().depth, 0);
        let child = sub.root().children[g_action.index()].unwrap();
        assert_eq!(sub.node(child).parent, Some(ROOT));
        assert_eq!(sub.node(child).depth, 1);
        // the old depth-2 node is now at depth 1 under horizon 2 and can grow
        assert!(sub.node(child).has_untried());
    }
}
