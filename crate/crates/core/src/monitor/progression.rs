//! Register programs for temporal formulas by symbolic progression.
//!
//! The value of a formula on the rest of a trace is kept in max-min normal
//! form: a max over terms `min(c, o₁, …, oₖ)` where each `oᵢ` is an
//! obligation "ψ holds from the next position" (strong: false if the trace
//! ends now; weak: true if it ends now) and `c` is a coefficient computed
//! from the labels seen so far. Reading a letter rewrites each obligation
//! with the one-step unfolding of its formula (`a U b = b ∨ (a ∧ X(a U b))`,
//! and so on), which only depends on the current labels. The set of terms
//! that can occur is finite, so the sequence of term sets forms a lasso and
//! every coefficient becomes a register.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use super::lasso::Lasso;
use super::nnf::{Node, NodeId, Nnf};
use super::{Expr, MonitorError, RegId, Register, UpdateInstr};
use crate::formula::Formula;
use crate::scalar::Scalar;

/// Obligation: node id shifted left, low bit set for weak.
type Obl = u32;
type Mono = Vec<Obl>;

fn obl(node: NodeId, weak: bool) -> Obl {
    node << 1 | weak as u32
}

fn obl_node(o: Obl) -> NodeId {
    o >> 1
}

fn obl_weak(o: Obl) -> bool {
    o & 1 == 1
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Ce {
    Label(u32),
    NotLabel(u32),
    /// Register value before the current step.
    Prev(RegId),
    Min(Vec<u32>),
    Max(Vec<u32>),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
enum Coef {
    One,
    E(u32),
}

type Dnf = BTreeMap<Mono, Coef>;

/// A term set with `true` marking coefficients known to be 1.
type Shape = Vec<(Mono, bool)>;

pub(crate) struct Progressed<S> {
    pub atoms: Vec<String>,
    pub registers: Vec<Register<S>>,
    /// Program executed at each position of `lasso`.
    pub programs: Vec<Vec<UpdateInstr<S>>>,
    pub lasso: Lasso,
    pub reward: RegId,
}

struct Engine {
    nnf: Nnf,
    exprs: Vec<Ce>,
    expr_ids: FxHashMap<Ce, u32>,
    templates: FxHashMap<NodeId, Dnf>,
    term_limit: usize,
    /// Set once some normal form would exceed `term_limit` terms; the
    /// results computed after that are meaningless.
    overflow: bool,
}

impl Engine {
    fn new(f: &Formula, term_limit: usize) -> (Engine, NodeId) {
        let atoms = f.atoms().into_iter().map(String::from).collect();
        let mut nnf = Nnf::new(atoms);
        let root = nnf.build(f, false);
        let e = Engine {
            nnf,
            exprs: Vec::new(),
            expr_ids: FxHashMap::default(),
            templates: FxHashMap::default(),
            term_limit,
            overflow: false,
        };
        (e, root)
    }

    fn ce(&mut self, e: Ce) -> Coef {
        if let Some(&id) = self.expr_ids.get(&e) {
            return Coef::E(id);
        }
        let id = self.exprs.len() as u32;
        self.exprs.push(e.clone());
        self.expr_ids.insert(e, id);
        Coef::E(id)
    }

    fn operands(&self, id: u32, min: bool) -> Vec<u32> {
        self.operand_slice(&id, min).to_vec()
    }

    fn operand_slice<'a>(&'a self, id: &'a u32, min: bool) -> &'a [u32] {
        match (&self.exprs[*id as usize], min) {
            (Ce::Min(v), true) | (Ce::Max(v), false) => v,
            _ => std::slice::from_ref(id),
        }
    }

    fn lattice(&mut self, a: Coef, b: Coef, min: bool) -> Coef {
        let (x, y) = match (a, b) {
            (Coef::One, other) | (other, Coef::One) => {
                return if min { other } else { Coef::One };
            }
            (Coef::E(x), Coef::E(y)) => (x, y),
        };
        if x == y {
            return a;
        }
        let mut ops = self.operands(x, min);
        ops.extend(self.operands(y, min));
        ops.sort_unstable();
        ops.dedup();
        // min(x, max(x, ..)) = x and dually.
        let snapshot = ops.clone();
        ops.retain(|&o| {
            let inner = match (&self.exprs[o as usize], min) {
                (Ce::Max(v), true) | (Ce::Min(v), false) => v,
                _ => return true,
            };
            !snapshot.iter().any(|p| *p != o && inner.contains(p))
        });
        if ops.len() == 1 {
            return Coef::E(ops[0]);
        }
        self.ce(if min { Ce::Min(ops) } else { Ce::Max(ops) })
    }

    fn cmin(&mut self, a: Coef, b: Coef) -> Coef {
        self.lattice(a, b, true)
    }

    fn cmax(&mut self, a: Coef, b: Coef) -> Coef {
        self.lattice(a, b, false)
    }

    /// Sufficient syntactic test for `a >= b` under every valuation.
    fn dominates(&self, a: Coef, b: Coef) -> bool {
        match (a, b) {
            (Coef::One, _) => true,
            (_, Coef::One) => false,
            (Coef::E(x), Coef::E(y)) => {
                if x == y {
                    return true;
                }
                let mins_y = self.operand_slice(&y, true);
                if self.operand_slice(&x, true).iter().all(|o| mins_y.contains(o)) {
                    return true;
                }
                self.operand_slice(&x, false).contains(&y)
            }
        }
    }

    fn merge(a: &Mono, b: &Mono) -> Mono {
        let mut m: Mono = a.iter().chain(b).copied().collect();
        m.sort_unstable();
        m.dedup();
        // A strong obligation implies the weak one on the same node.
        m.dedup_by(|later, earlier| obl_node(*later) == obl_node(*earlier));
        m
    }

    /// `sub`'s obligations are all implied by `sup`'s.
    fn implied_by(sub: &Mono, sup: &Mono) -> bool {
        sub.iter().all(|&o| {
            sup.contains(&o) || (obl_weak(o) && sup.contains(&obl(obl_node(o), false)))
        })
    }

    fn or(&mut self, mut a: Dnf, b: Dnf) -> Dnf {
        if self.overflow || a.len() + b.len() > self.term_limit {
            self.overflow = true;
            return Dnf::new();
        }
        for (m, c) in b {
            match a.get(&m).copied() {
                Some(old) => {
                    let v = self.cmax(old, c);
                    a.insert(m, v);
                }
                None => {
                    a.insert(m, c);
                }
            }
        }
        a
    }

    fn and(&mut self, a: &Dnf, b: &Dnf) -> Dnf {
        if self.overflow || a.len() * b.len() > self.term_limit {
            self.overflow = true;
            return Dnf::new();
        }
        let mut out = Dnf::new();
        for (ma, ca) in a {
            for (mb, cb) in b {
                let m = Self::merge(ma, mb);
                let c = self.cmin(*ca, *cb);
                match out.get(&m).copied() {
                    Some(old) => {
                        let v = self.cmax(old, c);
                        out.insert(m, v);
                    }
                    None => {
                        out.insert(m, c);
                    }
                }
            }
        }
        self.normalize(out)
    }

    fn scale(&mut self, d: Dnf, c: Coef) -> Dnf {
        d.into_iter().map(|(m, x)| (m, self.cmin(x, c))).collect()
    }

    /// Drop terms that can never exceed another term.
    fn normalize(&self, d: Dnf) -> Dnf {
        let mut entries: Vec<(Mono, Coef)> = d.into_iter().collect();
        entries.sort_by_key(|(m, _)| m.len());
        let mut kept: Vec<(Mono, Coef)> = Vec::with_capacity(entries.len());
        for (m, c) in entries {
            let absorbed = kept
                .iter()
                .any(|(k, kc)| Self::implied_by(k, &m) && self.dominates(*kc, c));
            if !absorbed {
                // Same-length terms can absorb each other in either order
                // (a weak obligation absorbs the strong one).
                kept.retain(|(k, kc)| !(Self::implied_by(&m, k) && self.dominates(c, *kc)));
                kept.push((m, c));
            }
        }
        kept.into_iter().collect()
    }

    fn single(&self, node: NodeId, weak: bool) -> Dnf {
        match (self.nnf.node(node), weak) {
            // Xw true is always 1; X false is always 0.
            (Node::True, true) => Dnf::from([(Vec::new(), Coef::One)]),
            (Node::False, false) => Dnf::new(),
            _ => Dnf::from([(vec![obl(node, weak)], Coef::One)]),
        }
    }

    /// One-step unfolding of `node` on the current letter.
    fn template(&mut self, node: NodeId) -> Dnf {
        if let Some(t) = self.templates.get(&node) {
            return t.clone();
        }
        let t = match self.nnf.node(node) {
            Node::True => Dnf::from([(Vec::new(), Coef::One)]),
            Node::False => Dnf::new(),
            Node::Lit(a, pos) => {
                let c = self.ce(if pos { Ce::Label(a) } else { Ce::NotLabel(a) });
                Dnf::from([(Vec::new(), c)])
            }
            Node::And(a, b) => {
                let (ta, tb) = (self.template(a), self.template(b));
                self.and(&ta, &tb)
            }
            Node::Or(a, b) => {
                let (ta, tb) = (self.template(a), self.template(b));
                let d = self.or(ta, tb);
                self.normalize(d)
            }
            Node::Next { weak, body } => self.single(body, weak),
            Node::Until(a, b) => {
                let (ta, tb) = (self.template(a), self.template(b));
                let stay = self.and(&ta, &self.single(node, false));
                let d = self.or(tb, stay);
                self.normalize(d)
            }
            Node::Release(a, b) => {
                let (ta, tb) = (self.template(a), self.template(b));
                let wait = self.single(node, true);
                let guard = self.or(ta, wait);
                let guard = self.normalize(guard);
                self.and(&tb, &guard)
            }
            Node::Eventually(a) => {
                let ta = self.template(a);
                let d = self.or(ta, self.single(node, false));
                self.normalize(d)
            }
            Node::Always(a) => {
                let ta = self.template(a);
                self.and(&ta, &self.single(node, true))
            }
        };
        self.templates.insert(node, t.clone());
        t
    }

    fn successor(&mut self, shape: &Shape, regs: &FxHashMap<Mono, RegId>) -> Dnf {
        let mut acc = Dnf::new();
        for (m, one) in shape {
            let coef = if *one {
                Coef::One
            } else {
                self.ce(Ce::Prev(regs[m]))
            };
            let mut prod = Dnf::from([(Vec::new(), Coef::One)]);
            for &o in m {
                let t = self.template(obl_node(o));
                prod = self.and(&prod, &t);
            }
            let scaled = self.scale(prod, coef);
            acc = self.or(acc, scaled);
        }
        self.normalize(acc)
    }

    fn reads(&self, id: u32, out: &mut Vec<RegId>) {
        match &self.exprs[id as usize] {
            Ce::Prev(r) => out.push(*r),
            Ce::Min(v) | Ce::Max(v) => {
                for &x in v {
                    self.reads(x, out);
                }
            }
            _ => {}
        }
    }

    fn to_expr<S: Scalar>(&self, id: u32, renamed: &FxHashMap<RegId, RegId>) -> Expr<S> {
        let fold = |v: &Vec<u32>, min: bool| {
            let mut it = v.iter().map(|&x| self.to_expr(x, renamed));
            let first = it.next().expect("non-empty lattice operands");
            it.fold(first, |acc, e| if min { Expr::min(acc, e) } else { Expr::max(acc, e) })
        };
        match &self.exprs[id as usize] {
            Ce::Label(a) => Expr::Label(*a as usize),
            Ce::NotLabel(a) => Expr::complement(Expr::Label(*a as usize)),
            Ce::Prev(r) => Expr::Reg(*renamed.get(r).unwrap_or(r)),
            Ce::Min(v) => fold(v, true),
            Ce::Max(v) => fold(v, false),
        }
    }

    /// Value of the normal form if the trace ends now.
    fn end_value<S: Scalar>(&self, d: &Dnf, reg: impl Fn(&Mono, u32) -> Expr<S>) -> Expr<S> {
        let mut acc: Option<Expr<S>> = None;
        for (m, c) in d {
            if !m.iter().all(|&o| obl_weak(o)) {
                continue;
            }
            let e = match c {
                Coef::One => return Expr::Const(S::one()),
                Coef::E(id) => reg(m, *id),
            };
            acc = Some(match acc {
                None => e,
                Some(prev) => Expr::max(prev, e),
            });
        }
        acc.unwrap_or(Expr::Const(S::zero()))
    }

}

/// Order updates so that no register is overwritten before every other
/// update of the same step has read its old value, saving old values into
/// scratch registers when the dependencies are cyclic.
fn schedule<S: Scalar>(
    eng: &Engine,
    mut pending: Vec<(RegId, u32)>,
    temp_for: &mut dyn FnMut(usize) -> RegId,
) -> Vec<UpdateInstr<S>> {
    let mut out = Vec::new();
    let mut renamed: FxHashMap<RegId, RegId> = FxHashMap::default();
    let mut temps_used = 0;
    let mut read_sets: Vec<Vec<RegId>> = pending
        .iter()
        .map(|(_, e)| {
            let mut r = Vec::new();
            eng.reads(*e, &mut r);
            r.sort_unstable();
            r.dedup();
            r
        })
        .collect();
    while !pending.is_empty() {
        let still_read = |target: RegId, skip: usize| {
            !renamed.contains_key(&target)
                && read_sets
                    .iter()
                    .enumerate()
                    .any(|(j, r)| j != skip && r.binary_search(&target).is_ok())
        };
        let ready = (0..pending.len()).find(|&i| !still_read(pending[i].0, i));
        match ready {
            Some(i) => {
                let (target, e) = pending.remove(i);
                read_sets.remove(i);
                out.push(UpdateInstr {
                    target,
                    expr: eng.to_expr(e, &renamed),
                });
            }
            None => {
                let target = pending[0].0;
                let t = temp_for(temps_used);
                temps_used += 1;
                out.push(UpdateInstr {
                    target: t,
                    expr: Expr::Reg(target),
                });
                renamed.insert(target, t);
            }
        }
    }
    out
}

struct Builder<S> {
    registers: Vec<Register<S>>,
    tag: usize,
    temps: Vec<RegId>,
}

impl<S: Scalar> Builder<S> {
    fn fresh(&mut self, name: String) -> RegId {
        self.registers.push(Register {
            name: format!("{name}#{}", self.tag),
            init: S::zero(),
        });
        self.registers.len() - 1
    }

    fn temp(&mut self, i: usize) -> RegId {
        while self.temps.len() <= i {
            let r = self.fresh(format!("tmp{}", self.temps.len()));
            self.temps.push(r);
        }
        self.temps[i]
    }

    fn finish(
        mut self,
        atoms: Vec<String>,
        mut programs: Vec<Vec<UpdateInstr<S>>>,
        rewards: Vec<Expr<S>>,
        lasso: Lasso,
        reward_name: String,
    ) -> Progressed<S> {
        let shared = match rewards.first() {
            Some(Expr::Reg(r)) if rewards.iter().all(|e| *e == Expr::Reg(*r)) => Some(*r),
            _ => None,
        };
        let reward = match shared {
            Some(r) => r,
            None => {
                let r = self.fresh(reward_name);
                for (p, e) in programs.iter_mut().zip(rewards) {
                    p.push(UpdateInstr { target: r, expr: e });
                }
                r
            }
        };
        Progressed {
            atoms,
            registers: self.registers,
            programs,
            lasso,
            reward,
        }
    }
}

/// Register programs for `f` following its progression shapes.
pub(crate) fn progress<S: Scalar>(
    f: &Formula,
    tag: usize,
    limit: usize,
    term_limit: usize,
) -> Result<Progressed<S>, MonitorError> {
    let (mut eng, root) = Engine::new(f, term_limit);
    let name = f.to_string();
    let mut b = Builder {
        registers: Vec::new(),
        tag,
        temps: Vec::new(),
    };
    // Registers are assigned per shape; terms that are never live at the
    // same time share a register.
    let mut pool: Vec<RegId> = Vec::new();
    let mut seen: FxHashMap<Shape, (usize, FxHashMap<Mono, RegId>)> = FxHashMap::default();
    let mut shape: Shape = vec![(vec![obl(root, false)], true)];
    let mut regs: FxHashMap<Mono, RegId> = FxHashMap::default();
    seen.insert(shape.clone(), (0, regs.clone()));
    let mut programs = Vec::new();
    let mut rewards = Vec::new();

    let lasso = loop {
        let d = eng.successor(&shape, &regs);
        if eng.overflow {
            return Err(MonitorError::TooManyTerms {
                formula: name,
                limit: term_limit,
            });
        }
        let next_shape: Shape = d
            .iter()
            .map(|(m, c)| (m.clone(), *c == Coef::One))
            .collect();
        let known = seen.get(&next_shape).cloned();
        let target = match &known {
            Some((_, asg)) => asg.clone(),
            None => {
                let mut asg: FxHashMap<Mono, RegId> = FxHashMap::default();
                let mut used = Vec::new();
                for (m, one) in &next_shape {
                    if let (false, Some(&r)) = (*one, regs.get(m)) {
                        asg.insert(m.clone(), r);
                        used.push(r);
                    }
                }
                for (m, one) in &next_shape {
                    if *one || asg.contains_key(m) {
                        continue;
                    }
                    let r = match pool.iter().find(|r| !used.contains(r)) {
                        Some(&r) => r,
                        None => {
                            let r = b.fresh(format!("{name}.{}", pool.len()));
                            pool.push(r);
                            r
                        }
                    };
                    asg.insert(m.clone(), r);
                    used.push(r);
                }
                asg
            }
        };
        let pending: Vec<(RegId, u32)> = d
            .iter()
            .filter_map(|(m, c)| match c {
                Coef::E(e) if eng.exprs[*e as usize] != Ce::Prev(target[m]) => Some((target[m], *e)),
                _ => None,
            })
            .collect();
        programs.push(schedule(&eng, pending, &mut |i| b.temp(i)));
        rewards.push(eng.end_value(&d, |m, _| Expr::Reg(target[m])));

        if let Some((j, _)) = known {
            break Lasso::new(j, programs.len() - j);
        }
        if seen.len() >= limit {
            return Err(MonitorError::TooLarge {
                formula: name,
                limit,
            });
        }
        seen.insert(next_shape.clone(), (programs.len(), target.clone()));
        shape = next_shape;
        regs = target;
    };

    let atoms = eng.nnf.atoms.clone();
    Ok(b.finish(atoms, programs, rewards, lasso, format!("reward[{name}]")))
}

/// A stateless program whose reward is the value of `psi` on a trace that
/// ends at the current letter. `F G psi` and `G F psi` both equal this.
pub(crate) fn last_value<S: Scalar>(
    psi: &Formula,
    label: String,
    tag: usize,
    term_limit: usize,
) -> Result<Progressed<S>, MonitorError> {
    let (mut eng, root) = Engine::new(psi, term_limit);
    let d = eng.template(root);
    if eng.overflow {
        return Err(MonitorError::TooManyTerms {
            formula: psi.to_string(),
            limit: term_limit,
        });
    }
    let empty = FxHashMap::default();
    let e = eng.end_value(&d, |_, id| eng.to_expr(id, &empty));
    let b = Builder {
        registers: Vec::new(),
        tag,
        temps: Vec::new(),
    };
    let atoms = eng.nnf.atoms.clone();
    Ok(b.finish(atoms, vec![Vec::new()], vec![e], Lasso::POINT, label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn atom_needs_one_register() {
        let p = progress::<f64>(&parse("p").unwrap(), 0, 64, 64).unwrap();
        assert_eq!(p.registers.len(), 1);
        assert_eq!(p.lasso, Lasso::new(1, 1));
        assert_eq!(p.programs[0], vec![UpdateInstr { target: 0, expr: Expr::Label(0) }]);
        assert!(p.programs[1].is_empty());
    }

    #[test]
    fn eventually_keeps_a_running_max() {
        let p = progress::<f64>(&parse("F b").unwrap(), 0, 64, 64).unwrap();
        assert_eq!(p.registers.len(), 1);
        assert_eq!(p.lasso, Lasso::new(1, 1));
        assert_eq!(
            p.programs[1],
            vec![UpdateInstr {
                target: 0,
                expr: Expr::max(Expr::Label(0), Expr::Reg(0))
            }]
        );
    }

    #[test]
    fn true_obligations_are_dropped() {
        let p = progress::<f64>(&parse("G true").unwrap(), 0, 64, 64).unwrap();
        assert_eq!(p.registers.len(), 1);
        assert_eq!(p.programs[1], vec![UpdateInstr { target: 0, expr: Expr::Const(1.0) }]);
    }

    #[test]
    fn last_value_of_until() {
        let p = last_value::<f64>(&parse("a U b").unwrap(), "x".into(), 0, 64).unwrap();
        assert_eq!(p.registers.len(), 1);
        assert_eq!(p.programs[0][0].expr, Expr::Label(1));
    }
}
