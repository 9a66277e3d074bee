use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::rc::Rc;

use rand::Rng;

use super::tree::PathKey;
use crate::interp::PickValue;
use crate::syntax::ClauseKey;

/// A branch direction to reach, with the picks that led to its parent.
#[derive(Clone, Debug)]
pub struct Target {
    pub path: PathKey,
    /// Picks of the discovering run made before the branch.
    pub base: Rc<[(ClauseKey, PickValue)]>,
}

impl Target {
    pub fn depth(&self) -> usize {
        self.path.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Horizon {
    DepthFirst,
    BreadthFirst,
    Random,
}

/// Three views over the same targets. Popping from one leaves stale copies
/// in the others; the caller skips targets that are no longer open.
#[derive(Debug, Default)]
pub struct TargetQueues {
    store: Vec<Target>,
    seq: u64,
    /// Deepest first, newest first among equals.
    dfs: BinaryHeap<(usize, u64, usize)>,
    /// Shallowest first, oldest first among equals.
    bfs: BinaryHeap<Reverse<(usize, u64, usize)>>,
    random: Vec<usize>,
    seen: HashSet<PathKey>,
}

impl TargetQueues {
    pub fn new() -> Self {
        TargetQueues::default()
    }

    /// Adds a target to all three queues unless it was pushed before.
    pub fn push(&mut self, t: Target) -> bool {
        if !self.seen.insert(t.path.clone()) {
            return false;
        }
        let id = self.store.len();
        let d = t.depth();
        self.store.push(t);
        self.seq += 1;
        self.dfs.push((d, self.seq, id));
        self.bfs.push(Reverse((d, self.seq, id)));
        self.random.push(id);
        true
    }

    pub fn pop(&mut self, h: Horizon, rng: &mut impl Rng) -> Option<Target> {
        let id = match h {
            Horizon::DepthFirst => self.dfs.pop().map(|(_, _, id)| id),
            Horizon::BreadthFirst => self.bfs.pop().map(|Reverse((_, _, id))| id),
            Horizon::Random if self.random.is_empty() => None,
            Horizon::Random => {
                let i = rng.random_range(0..self.random.len());
                Some(self.random.swap_remove(i))
            }
        }?;
        Some(self.store[id].clone())
    }

    /// Entries per queue, stale ones included.
    pub fn sizes(&self) -> [usize; 3] {
        [self.dfs.len(), self.bfs.len(), self.random.len()]
    }

    pub fn is_empty(&self) -> bool {
        self.dfs.is_empty() && self.bfs.is_empty() && self.random.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn target(path: &[(&str, bool)]) -> Target {
        Target {
            path: path
                .iter()
                .map(|(s, d)| (ClauseKey::new(&(*s).into(), 0), *d))
                .collect(),
            base: Rc::from(Vec::new()),
        }
    }

    #[test]
    fn duplicates_are_dropped() {
        let mut q = TargetQueues::new();
        assert!(q.push(target(&[("a$1", true)])));
        assert!(!q.push(target(&[("a$1", true)])));
        assert_eq!(q.sizes(), [1, 1, 1]);
    }

    #[test]
    fn horizons_order_by_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut q = TargetQueues::new();
        q.push(target(&[("a$1", true)]));
        q.push(target(&[("a$1", false), ("b$2", true)]));
        q.push(target(&[("a$1", false), ("b$2", false), ("c$3", true)]));
        assert_eq!(q.pop(Horizon::DepthFirst, &mut rng).unwrap().depth(), 3);
        assert_eq!(q.pop(Horizon::BreadthFirst, &mut rng).unwrap().depth(), 1);
        assert!(q.pop(Horizon::Random, &mut rng).is_some());
    }
}
