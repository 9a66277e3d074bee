use crate::interp::SymSession;
use crate::solver::{Formula, Term};
use crate::syntax::ClauseKey;

/// What the search knows about one direction of a branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Not yet reached and not yet tried.
    Unsolved,
    /// The solver could not decide it, or its model missed it.
    Unknown,
    Unsatisfiable,
    Hit,
}

/// A branch direction named by the branches leading to it.
pub type PathKey = Vec<(ClauseKey, bool)>;

#[derive(Clone, Debug)]
pub struct Child {
    pub status: Status,
    node: Option<usize>,
}

#[derive(Clone, Debug)]
struct BranchNode {
    key: ClauseKey,
    cond: Term,
    /// Formulas recorded since the previous branch on the path.
    formulas: Vec<Formula>,
    children: [Child; 2],
}

#[derive(Clone, Debug, Default)]
struct Node {
    /// Usually one. More than one when runs that agree on every symbolic
    /// branch so far still reach different next branches.
    branches: Vec<BranchNode>,
}

#[derive(Debug, thiserror::Error)]
#[error("branch {key} dir {dir} was proven unsatisfiable but a run took it")]
pub struct Contradiction {
    pub key: ClauseKey,
    pub dir: bool,
}

/// Every symbolic branch outcome explored so far.
#[derive(Clone, Debug)]
pub struct PathTree {
    nodes: Vec<Node>,
}

impl Default for PathTree {
    fn default() -> Self {
        PathTree::new()
    }
}

fn slot(dir: bool) -> usize {
    usize::from(dir)
}

impl PathTree {
    pub fn new() -> Self {
        PathTree {
            nodes: vec![Node::default()],
        }
    }

    /// Number of nodes, the root included.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1 && self.nodes[0].branches.is_empty()
    }

    /// Marks every branch of the run as hit, growing the tree as needed.
    pub fn merge(&mut self, session: &SymSession) -> Result<(), Contradiction> {
        let mut node = 0;
        let mut prev = 0;
        for b in &session.path {
            let bi = match self.nodes[node].branches.iter().position(|x| x.key == b.key) {
                Some(i) => i,
                None => {
                    let fresh = Child {
                        status: Status::Unsolved,
                        node: None,
                    };
                    self.nodes[node].branches.push(BranchNode {
                        key: b.key.clone(),
                        cond: b.cond.clone(),
                        formulas: session.formulas[prev..b.prefix].to_vec(),
                        children: [fresh.clone(), fresh],
                    });
                    self.nodes[node].branches.len() - 1
                }
            };
            let next = self.nodes.len();
            let child = &mut self.nodes[node].branches[bi].children[slot(b.dir)];
            if child.status == Status::Unsatisfiable {
                return Err(Contradiction {
                    key: b.key.clone(),
                    dir: b.dir,
                });
            }
            child.status = Status::Hit;
            node = match child.node {
                Some(n) => n,
                None => {
                    child.node = Some(next);
                    self.nodes.push(Node::default());
                    next
                }
            };
            prev = b.prefix;
        }
        Ok(())
    }

    fn branch(&self, node: usize, key: &ClauseKey) -> Option<&BranchNode> {
        self.nodes[node].branches.iter().find(|b| b.key == *key)
    }

    fn child(&self, path: &[(ClauseKey, bool)]) -> Option<&Child> {
        let ((last, dir), prefix) = path.split_last()?;
        let mut node = 0;
        for (k, d) in prefix {
            node = self.branch(node, k)?.children[slot(*d)].node?;
        }
        Some(&self.branch(node, last)?.children[slot(*dir)])
    }

    pub fn status(&self, path: &[(ClauseKey, bool)]) -> Option<Status> {
        self.child(path).map(|c| c.status)
    }

    /// Records a solver verdict for a child not yet hit. Hit children keep
    /// their status.
    pub fn resolve(&mut self, path: &[(ClauseKey, bool)], status: Status) {
        let Some(((last, dir), prefix)) = path.split_last() else {
            return;
        };
        let mut node = 0;
        for (k, d) in prefix {
            let Some(n) = self.branch(node, k).and_then(|b| b.children[slot(*d)].node) else {
                return;
            };
            node = n;
        }
        if let Some(b) = self.nodes[node].branches.iter_mut().find(|b| b.key == *last) {
            let c = &mut b.children[slot(*dir)];
            if c.status != Status::Hit {
                c.status = status;
            }
        }
    }

    /// Formulas of every node along the path, the conditions of the
    /// branches taken, and the target direction's condition.
    pub fn query(&self, path: &[(ClauseKey, bool)]) -> Option<Vec<Formula>> {
        let mut fs = Vec::new();
        let mut node = Some(0);
        for (k, d) in path {
            let b = self.branch(node?, k)?;
            fs.extend(b.formulas.iter().cloned());
            fs.push(Formula::Assert(Term::eq(b.cond.clone(), Term::Bool(*d))));
            node = b.children[slot(*d)].node;
        }
        Some(fs)
    }

    /// Unsolved siblings of the branches along a merged run.
    pub fn open_siblings(&self, session: &SymSession) -> Vec<(PathKey, usize)> {
        let mut out = Vec::new();
        let mut node = 0;
        let mut path: PathKey = Vec::new();
        for (i, b) in session.path.iter().enumerate() {
            let Some(br) = self.branch(node, &b.key) else { break };
            if br.children[slot(!b.dir)].status == Status::Unsolved {
                let mut p = path.clone();
                p.push((b.key.clone(), !b.dir));
                out.push((p, i));
            }
            path.push((b.key.clone(), b.dir));
            match br.children[slot(b.dir)].node {
                Some(n) => node = n,
                None => break,
            }
        }
        out
    }

    /// Counts of children by status.
    pub fn census(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for n in &self.nodes {
            for b in &n.branches {
                for ch in &b.children {
                    c[ch.status as usize] += 1;
                }
            }
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::SymBranch;
    use crate::solver::{Sort, Var};

    fn session(dirs: &[(&str, bool)]) -> SymSession {
        let mut s = SymSession::new(10);
        for (i, (site, dir)) in dirs.iter().enumerate() {
            let v = Var::new(ClauseKey::new(&format!("c${i}").into(), 0), Sort::Bool);
            s.path.push(SymBranch {
                key: ClauseKey::new(&(*site).into(), 0),
                dir: *dir,
                cond: Term::var(&v),
                prefix: 0,
                picks: 0,
            });
        }
        s
    }

    #[test]
    fn merging_marks_the_path_hit() {
        let mut t = PathTree::new();
        let s = session(&[("a$1", true), ("b$2", false)]);
        t.merge(&s).unwrap();
        let a = (ClauseKey::new(&"a$1".into(), 0), true);
        let b = (ClauseKey::new(&"b$2".into(), 0), false);
        assert_eq!(t.status(&[a.clone()]), Some(Status::Hit));
        assert_eq!(t.status(&[a.clone(), b.clone()]), Some(Status::Hit));
        assert_eq!(t.open_siblings(&s).len(), 2);
        let q = t.query(&[a, (b.0, true)]).unwrap();
        assert_eq!(q.len(), 2);
    }

    #[test]
    fn proven_unsatisfiable_children_cannot_be_hit() {
        let mut t = PathTree::new();
        t.merge(&session(&[("a$1", true)])).unwrap();
        let other = [(ClauseKey::new(&"a$1".into(), 0), false)];
        t.resolve(&other, Status::Unsatisfiable);
        assert!(t.merge(&session(&[("a$1", false)])).is_err());
    }
}
