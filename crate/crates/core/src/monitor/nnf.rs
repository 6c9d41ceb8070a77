//! Hash-consed negation normal form with a weak next operator.
//!
//! `!X φ` has no dual in the surface syntax but does internally: it holds at
//! the last position and otherwise behaves like `X !φ`.

use rustc_hash::FxHashMap;

use crate::formula::Formula;

pub(crate) type NodeId = u32;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub(crate) enum Node {
    True,
    False,
    /// Atom index into [`Nnf::atoms`] and polarity.
    Lit(u32, bool),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    /// `weak == true` is the weak next.
    Next { weak: bool, body: NodeId },
    Until(NodeId, NodeId),
    Release(NodeId, NodeId),
    Eventually(NodeId),
    Always(NodeId),
}

#[derive(Clone, Debug)]
pub(crate) struct Nnf {
    pub nodes: Vec<Node>,
    ids: FxHashMap<Node, NodeId>,
    pub atoms: Vec<String>,
}

impl Nnf {
    /// `atoms` must be sorted and contain every atom that will be built.
    pub fn new(atoms: Vec<String>) -> Self {
        Nnf {
            nodes: Vec::new(),
            ids: FxHashMap::default(),
            atoms,
        }
    }

    /// Value-preserving rewrites with constants and idempotence, applied
    /// before interning.
    fn simplify(&mut self, n: Node) -> Result<Node, NodeId> {
        use Node::*;
        let (t, f) = (self.intern_raw(True), self.intern_raw(False));
        Ok(match n {
            And(a, b) if a == t || a == b => return Err(b),
            And(a, b) if b == t => return Err(a),
            And(a, b) if a == f || b == f => False,
            Or(a, b) if a == f || a == b => return Err(b),
            Or(a, b) if b == f => return Err(a),
            Or(a, b) if a == t || b == t => True,
            Until(a, b) | Release(a, b) if a == b || b == t || b == f => return Err(b),
            Until(a, b) if a == f => return Err(b),
            Until(a, b) if a == t => return self.simplify(Eventually(b)),
            Release(a, b) if a == t => return Err(b),
            Release(a, b) if a == f => return self.simplify(Always(b)),
            Eventually(a) | Always(a) if a == t || a == f => return Err(a),
            Eventually(a) if matches!(self.node(a), Eventually(_)) => return Err(a),
            Always(a) if matches!(self.node(a), Always(_)) => return Err(a),
            Next { weak: true, body } if body == t => True,
            Next { weak: false, body } if body == f => False,
            other => other,
        })
    }

    fn intern(&mut self, n: Node) -> NodeId {
        match self.simplify(n) {
            Ok(n) => self.intern_raw(n),
            Err(id) => id,
        }
    }

    fn intern_raw(&mut self, n: Node) -> NodeId {
        if let Some(&id) = self.ids.get(&n) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(n);
        self.ids.insert(n, id);
        id
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id as usize]
    }

    fn atom_index(&self, p: &str) -> u32 {
        self.atoms
            .binary_search_by(|a| a.as_str().cmp(p))
            .expect("atom registered before building") as u32
    }

    /// Build `f` (or `!f` when `negated`) in normal form.
    pub fn build(&mut self, f: &Formula, negated: bool) -> NodeId {
        use Formula as F;
        let n = match (f, negated) {
            (F::True, false) | (F::False, true) => Node::True,
            (F::False, false) | (F::True, true) => Node::False,
            (F::Atom(p), neg) => Node::Lit(self.atom_index(p), !neg),
            (F::Not(a), neg) => return self.build(a, !neg),
            (F::And(a, b), false) | (F::Or(a, b), true) => {
                Node::And(self.build(a, negated), self.build(b, negated))
            }
            (F::Or(a, b), false) | (F::And(a, b), true) => {
                Node::Or(self.build(a, negated), self.build(b, negated))
            }
            (F::Next(a), neg) => Node::Next {
                weak: neg,
                body: self.build(a, neg),
            },
            (F::Until(a, b), false) | (F::Release(a, b), true) => {
                Node::Until(self.build(a, negated), self.build(b, negated))
            }
            (F::Release(a, b), false) | (F::Until(a, b), true) => {
                Node::Release(self.build(a, negated), self.build(b, negated))
            }
            (F::Eventually(a), false) | (F::Always(a), true) => {
                Node::Eventually(self.build(a, negated))
            }
            (F::Always(a), false) | (F::Eventually(a), true) => {
                Node::Always(self.build(a, negated))
            }
        };
        self.intern(n)
    }

    /// Concrete syntax of a node, with `Xw` for the weak next.
    #[cfg(test)]
    pub fn render(&self, id: NodeId) -> String {
        let r = |x: NodeId| self.render_paren(x);
        match self.node(id) {
            Node::True => "true".into(),
            Node::False => "false".into(),
            Node::Lit(a, true) => self.atoms[a as usize].clone(),
            Node::Lit(a, false) => format!("!{}", self.atoms[a as usize]),
            Node::And(a, b) => format!("{} & {}", r(a), r(b)),
            Node::Or(a, b) => format!("{} | {}", r(a), r(b)),
            Node::Next { weak, body } => format!("{} {}", if weak { "Xw" } else { "X" }, r(body)),
            Node::Until(a, b) => format!("{} U {}", r(a), r(b)),
            Node::Release(a, b) => format!("{} R {}", r(a), r(b)),
            Node::Eventually(a) => format!("F {}", r(a)),
            Node::Always(a) => format!("G {}", r(a)),
        }
    }

    #[cfg(test)]
    fn render_paren(&self, id: NodeId) -> String {
        match self.node(id) {
            Node::True | Node::False | Node::Lit(..) => self.render(id),
            _ => format!("({})", self.render(id)),
        }
    }
}
