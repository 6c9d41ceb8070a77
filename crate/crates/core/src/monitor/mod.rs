//! Register monitors: finite control with a bank of `[0, 1]` registers.
//!
//! A [`Qrm`] reads one labelling per step, runs the update program attached
//! to its current control state, moves to the successor state and exposes
//! the reward register. [`synth`] builds one from a formula so that after `n`
//! letters the reward register equals the formula's value on that prefix.

mod boolean;
mod export;
mod lasso;
pub(crate) mod nnf;
mod progression;
mod synth;

use std::collections::{BTreeSet, HashMap};

use crate::formula::Formula;
use crate::scalar::Scalar;
use crate::semantics::{Labels, Trace};

pub use boolean::{BooleanMonitor, BrmState};
pub use lasso::Lasso;
pub use synth::{synth, Synthesizer, DEFAULT_SHAPE_LIMIT, DEFAULT_TERM_LIMIT};

pub type RegId = usize;
pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MonitorError {
    #[error("no label for atom '{0}'")]
    MissingLabel(String),
    #[error("label for '{atom}' is {value}, outside [0, 1]")]
    LabelOutOfRange { atom: String, value: String },
    #[error("label for '{atom}' is {value}; Boolean monitors need 0 or 1")]
    NonCrispLabel { atom: String, value: String },
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("malformed monitor: {0}")]
    Invalid(String),
    #[error("monitor for '{formula}' exceeds {limit} control shapes")]
    TooLarge { formula: String, limit: usize },
    #[error("progression of '{formula}' exceeds {limit} terms per step")]
    TooManyTerms { formula: String, limit: usize },
}

/// Right-hand side of a register update.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<S> {
    Const(S),
    /// Label of the atom with this index in [`Qrm::atoms`].
    Label(usize),
    Reg(RegId),
    Complement(Box<Expr<S>>),
    Min(Box<Expr<S>>, Box<Expr<S>>),
    Max(Box<Expr<S>>, Box<Expr<S>>),
}

impl<S: Scalar> Expr<S> {
    pub fn min(a: Expr<S>, b: Expr<S>) -> Self {
        Expr::Min(Box::new(a), Box::new(b))
    }

    pub fn max(a: Expr<S>, b: Expr<S>) -> Self {
        Expr::Max(Box::new(a), Box::new(b))
    }

    pub fn complement(a: Expr<S>) -> Self {
        Expr::Complement(Box::new(a))
    }

    fn remap(&self, labels: &[usize], reg_offset: usize) -> Expr<S> {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Label(i) => Expr::Label(labels[*i]),
            Expr::Reg(r) => Expr::Reg(r + reg_offset),
            Expr::Complement(a) => Expr::complement(a.remap(labels, reg_offset)),
            Expr::Min(a, b) => Expr::min(a.remap(labels, reg_offset), b.remap(labels, reg_offset)),
            Expr::Max(a, b) => Expr::max(a.remap(labels, reg_offset), b.remap(labels, reg_offset)),
        }
    }

    fn visit(&self, f: &mut impl FnMut(&Expr<S>)) {
        f(self);
        match self {
            Expr::Complement(a) => a.visit(f),
            Expr::Min(a, b) | Expr::Max(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    fn compile(&self, out: &mut Vec<Code<S>>) {
        match self {
            Expr::Const(c) => out.push(Code::Const(*c)),
            Expr::Label(i) => out.push(Code::Label(*i as u32)),
            Expr::Reg(r) => out.push(Code::Reg(*r as u32)),
            Expr::Complement(a) => {
                a.compile(out);
                out.push(Code::Compl);
            }
            Expr::Min(a, b) => {
                a.compile(out);
                b.compile(out);
                out.push(Code::Min);
            }
            Expr::Max(a, b) => {
                a.compile(out);
                b.compile(out);
                out.push(Code::Max);
            }
        }
    }

    /// Render with atom and register names, e.g. `max(V(t), L(b))`.
    pub fn render(&self, atoms: &[String], regs: &[Register<S>]) -> String {
        match self {
            Expr::Const(c) => c.to_string(),
            Expr::Label(i) => format!("L({})", atoms[*i]),
            Expr::Reg(r) => format!("V({})", regs[*r].name),
            Expr::Complement(a) => format!("1 - {}", a.render(atoms, regs)),
            Expr::Min(a, b) => format!("min({}, {})", a.render(atoms, regs), b.render(atoms, regs)),
            Expr::Max(a, b) => format!("max({}, {})", a.render(atoms, regs), b.render(atoms, regs)),
        }
    }
}

/// `target ← expr`. Updates in a program run in order, so later updates see
/// earlier writes of the same step.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateInstr<S> {
    pub target: RegId,
    pub expr: Expr<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Register<S> {
    pub name: String,
    pub init: S,
}

/// Postfix form of a state's program.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Code<S> {
    Label(u32),
    Reg(u32),
    Const(S),
    Compl,
    Min,
    Max,
    Store(u32),
}

/// A quantitative reward monitor.
#[derive(Debug, Clone)]
pub struct Qrm<S> {
    formula: Option<Formula>,
    atoms: Vec<String>,
    registers: Vec<Register<S>>,
    next: Vec<StateId>,
    programs: Vec<Vec<UpdateInstr<S>>>,
    reward: RegId,
    weight: S,
    code: Vec<Vec<Code<S>>>,
}

/// Runtime configuration of a [`Qrm`]: control state, register values and
/// the number of letters consumed.
#[derive(Debug, Clone)]
pub struct MonitorState<S> {
    pub state: StateId,
    pub registers: Vec<S>,
    pub steps: usize,
    stack: Vec<S>,
}

impl<S: PartialEq> PartialEq for MonitorState<S> {
    fn eq(&self, other: &Self) -> bool {
        self.state == other.state && self.registers == other.registers && self.steps == other.steps
    }
}

impl<S: Scalar> Qrm<S> {
    /// Assemble a monitor from its parts. State 0 is initial.
    pub fn from_parts(
        atoms: Vec<String>,
        registers: Vec<Register<S>>,
        next: Vec<StateId>,
        programs: Vec<Vec<UpdateInstr<S>>>,
        reward: RegId,
    ) -> Result<Self, MonitorError> {
        let mut m = Qrm {
            formula: None,
            atoms,
            registers,
            next,
            programs,
            reward,
            weight: S::one(),
            code: Vec::new(),
        };
        m.validate()?;
        m.compile();
        Ok(m)
    }

    fn validate(&self) -> Result<(), MonitorError> {
        let bad = |s: String| Err(MonitorError::Invalid(s));
        if self.next.is_empty() {
            return bad("no control states".into());
        }
        if self.next.len() != self.programs.len() {
            return bad(format!(
                "{} successor entries for {} programs",
                self.next.len(),
                self.programs.len()
            ));
        }
        if let Some(q) = self.next.iter().find(|&&q| q >= self.next.len()) {
            return bad(format!("successor {q} is not a state"));
        }
        if self.reward >= self.registers.len() {
            return bad(format!("reward register {} does not exist", self.reward));
        }
        if self.atoms.windows(2).any(|w| w[0] >= w[1]) {
            return bad("atoms must be sorted and distinct".into());
        }
        let mut names = BTreeSet::new();
        for r in &self.registers {
            if !names.insert(r.name.as_str()) {
                return bad(format!("duplicate register name '{}'", r.name));
            }
            if !r.init.in_unit() {
                return bad(format!("register '{}' starts outside [0, 1]", r.name));
            }
        }
        for (q, prog) in self.programs.iter().enumerate() {
            for ins in prog {
                if ins.target >= self.registers.len() {
                    return bad(format!("state {q} writes unknown register {}", ins.target));
                }
                let mut err = None;
                ins.expr.visit(&mut |e| match e {
                    Expr::Reg(r) if *r >= self.registers.len() => {
                        err = Some(format!("state {q} reads unknown register {r}"))
                    }
                    Expr::Label(i) if *i >= self.atoms.len() => {
                        err = Some(format!("state {q} reads unknown atom {i}"))
                    }
                    Expr::Const(c) if !c.in_unit() => {
                        err = Some(format!("state {q} uses constant {c} outside [0, 1]"))
                    }
                    _ => {}
                });
                if let Some(e) = err {
                    return bad(e);
                }
            }
        }
        Ok(())
    }

    fn compile(&mut self) {
        self.code = self
            .programs
            .iter()
            .map(|prog| {
                let mut out = Vec::new();
                for ins in prog {
                    ins.expr.compile(&mut out);
                    out.push(Code::Store(ins.target as u32));
                }
                out
            })
            .collect();
    }

    pub fn formula(&self) -> Option<&Formula> {
        self.formula.as_ref()
    }

    pub(crate) fn set_formula(&mut self, f: Formula) {
        self.formula = Some(f);
    }

    /// Atoms read by the monitor, sorted. Label slices follow this order.
    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn registers(&self) -> &[Register<S>] {
        &self.registers
    }

    pub fn num_states(&self) -> usize {
        self.next.len()
    }

    pub fn initial_state(&self) -> StateId {
        0
    }

    /// Successor of control state `q`.
    pub fn successor(&self, q: StateId) -> StateId {
        self.next[q]
    }

    pub fn program(&self, q: StateId) -> &[UpdateInstr<S>] {
        &self.programs[q]
    }

    pub fn reward_register(&self) -> RegId {
        self.reward
    }

    pub fn weight(&self) -> S {
        self.weight
    }

    pub fn with_weight(mut self, weight: S) -> Self {
        self.weight = weight;
        self
    }

    /// Control states and the register count, the two size measures used
    /// for the linear-size bound.
    pub fn size(&self) -> (usize, usize) {
        (self.num_states(), self.registers.len())
    }

    pub fn lasso(&self) -> Lasso {
        Lasso::of_successors(&self.next)
    }

    fn check_slice(&self, labels: &[S]) -> Result<(), MonitorError> {
        if labels.len() != self.atoms.len() {
            return Err(MonitorError::LabelCount {
                expected: self.atoms.len(),
                got: labels.len(),
            });
        }
        if let Some(i) = labels.iter().position(|v| !v.in_unit()) {
            return Err(MonitorError::LabelOutOfRange {
                atom: self.atoms[i].clone(),
                value: labels[i].to_string(),
            });
        }
        Ok(())
    }

    /// Collect the labels this monitor reads, in [`Qrm::atoms`] order.
    pub fn gather<L: Labels<S> + ?Sized>(&self, labels: &L) -> Result<Vec<S>, MonitorError> {
        self.atoms
            .iter()
            .map(|a| labels.label(a).ok_or_else(|| MonitorError::MissingLabel(a.clone())))
            .collect()
    }

    /// Load the initial register values and consume the first letter.
    pub fn init_slice(&self, labels: &[S]) -> Result<MonitorState<S>, MonitorError> {
        let mut st = MonitorState {
            state: 0,
            registers: self.registers.iter().map(|r| r.init).collect(),
            steps: 0,
            stack: Vec::with_capacity(8),
        };
        self.step_slice(&mut st, labels)?;
        Ok(st)
    }

    pub fn init<L: Labels<S> + ?Sized>(&self, labels: &L) -> Result<MonitorState<S>, MonitorError> {
        self.init_slice(&self.gather(labels)?)
    }

    /// Run the current state's program on `labels` and move to its successor.
    pub fn step_slice(&self, st: &mut MonitorState<S>, labels: &[S]) -> Result<(), MonitorError> {
        self.check_slice(labels)?;
        self.exec(st, labels);
        Ok(())
    }

    pub fn step<L: Labels<S> + ?Sized>(
        &self,
        st: &mut MonitorState<S>,
        labels: &L,
    ) -> Result<(), MonitorError> {
        let row = self.gather(labels)?;
        self.step_slice(st, &row)
    }

    #[inline]
    pub(crate) fn exec(&self, st: &mut MonitorState<S>, labels: &[S]) {
        let stack = &mut st.stack;
        stack.clear();
        for c in &self.code[st.state] {
            match *c {
                Code::Label(i) => stack.push(labels[i as usize]),
                Code::Reg(r) => stack.push(st.registers[r as usize]),
                Code::Const(v) => stack.push(v),
                Code::Compl => {
                    let x = stack.last_mut().expect("operand");
                    *x = x.complement();
                }
                Code::Min => {
                    let b = stack.pop().expect("operand");
                    let a = stack.last_mut().expect("operand");
                    *a = a.min_of(b);
                }
                Code::Max => {
                    let b = stack.pop().expect("operand");
                    let a = stack.last_mut().expect("operand");
                    *a = a.max_of(b);
                }
                Code::Store(r) => st.registers[r as usize] = stack.pop().expect("operand"),
            }
        }
        st.state = self.next[st.state];
        st.steps += 1;
    }

    /// Unweighted value of the reward register.
    pub fn value(&self, st: &MonitorState<S>) -> S {
        st.registers[self.reward]
    }

    /// Weighted reward `ρ · V(t_reward)`.
    pub fn reward(&self, st: &MonitorState<S>) -> S {
        self.weight * st.registers[self.reward]
    }

    /// Reward register value after each prefix of `trace`.
    pub fn run(&self, trace: &Trace<S>) -> Result<Vec<S>, MonitorError> {
        let mut out = Vec::with_capacity(trace.len());
        let mut st: Option<MonitorState<S>> = None;
        for letter in trace.letters() {
            let row = self.gather(&letter)?;
            match st.as_mut() {
                None => st = Some(self.init_slice(&row)?),
                Some(s) => self.step_slice(s, &row)?,
            }
            out.push(self.value(st.as_ref().expect("initialised")));
        }
        Ok(out)
    }

    fn renamed(&self, tag: usize) -> Qrm<S> {
        let mut m = self.clone();
        for r in &mut m.registers {
            r.name = format!("{}~{tag}", r.name);
        }
        m
    }

    pub(crate) fn constant(value: S, name: String) -> Qrm<S> {
        Qrm::from_parts(
            Vec::new(),
            vec![Register { name, init: value }],
            vec![0],
            vec![Vec::new()],
            0,
        )
        .expect("constant monitor is well formed")
    }

    /// Append `t ← 1 - V(reward)` to every program.
    pub(crate) fn complemented(&self, name: String) -> Qrm<S> {
        let mut m = self.clone();
        let r = m.registers.len();
        m.registers.push(Register {
            name,
            init: m.registers[m.reward].init.complement(),
        });
        let src = m.reward;
        for p in &mut m.programs {
            p.push(UpdateInstr {
                target: r,
                expr: Expr::complement(Expr::Reg(src)),
            });
        }
        m.reward = r;
        m.formula = None;
        m.weight = S::one();
        m.compile();
        m
    }

    /// Synchronous product whose reward is the min (`conjunction`) or max of
    /// the operands' rewards.
    pub(crate) fn product(
        a: &Qrm<S>,
        b: &Qrm<S>,
        conjunction: bool,
        name: String,
        fresh_tag: usize,
    ) -> Qrm<S> {
        let a_names: BTreeSet<&str> = a.registers.iter().map(|r| r.name.as_str()).collect();
        let clash = b.registers.iter().any(|r| a_names.contains(r.name.as_str()));
        let b_owned;
        let b = if clash {
            b_owned = b.renamed(fresh_tag);
            &b_owned
        } else {
            b
        };

        let atoms: Vec<String> = a
            .atoms
            .iter()
            .chain(&b.atoms)
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index_in = |src: &[String]| -> Vec<usize> {
            src.iter()
                .map(|x| atoms.binary_search(x).expect("atom in union"))
                .collect()
        };
        let (amap, bmap) = (index_in(&a.atoms), index_in(&b.atoms));

        let off = a.registers.len();
        let mut registers = a.registers.clone();
        registers.extend(b.registers.iter().cloned());
        let comb = registers.len();
        let (ia, ib) = (a.registers[a.reward].init, b.registers[b.reward].init);
        registers.push(Register {
            name,
            init: if conjunction { ia.min_of(ib) } else { ia.max_of(ib) },
        });

        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut order = vec![(0, 0)];
        index.insert((0, 0), 0);
        let mut next = Vec::new();
        let mut programs = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let (qa, qb) = order[i];
            let mut prog: Vec<UpdateInstr<S>> = a.programs[qa]
                .iter()
                .map(|u| UpdateInstr {
                    target: u.target,
                    expr: u.expr.remap(&amap, 0),
                })
                .collect();
            prog.extend(b.programs[qb].iter().map(|u| UpdateInstr {
                target: u.target + off,
                expr: u.expr.remap(&bmap, off),
            }));
            let (ra, rb) = (Expr::Reg(a.reward), Expr::Reg(b.reward + off));
            prog.push(UpdateInstr {
                target: comb,
                expr: if conjunction { Expr::min(ra, rb) } else { Expr::max(ra, rb) },
            });
            programs.push(prog);
            let succ = (a.next[qa], b.next[qb]);
            let n = order.len();
            let id = *index.entry(succ).or_insert_with(|| {
                order.push(succ);
                n
            });
            next.push(id);
            i += 1;
        }
        Qrm::from_parts(atoms, registers, next, programs, comb).expect("product is well formed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regs(names: &[&str]) -> Vec<Register<f64>> {
        names
            .iter()
            .map(|n| Register {
                name: n.to_string(),
                init: 0.0,
            })
            .collect()
    }

    #[test]
    fn hand_built_running_max() {
        let m = Qrm::from_parts(
            vec!["b".into()],
            regs(&["t"]),
            vec![1, 1],
            vec![
                vec![UpdateInstr { target: 0, expr: Expr::Label(0) }],
                vec![UpdateInstr {
                    target: 0,
                    expr: Expr::max(Expr::Reg(0), Expr::Label(0)),
                }],
            ],
            0,
        )
        .unwrap();
        let mut st = m.init_slice(&[0.3]).unwrap();
        assert_eq!(m.value(&st), 0.3);
        m.step_slice(&mut st, &[0.1]).unwrap();
        assert_eq!(m.value(&st), 0.3);
        m.step_slice(&mut st, &[0.9]).unwrap();
        assert_eq!(m.value(&st), 0.9);
        assert_eq!(st.state, 1);
        assert_eq!(st.steps, 3);
    }

    #[test]
    fn rejects_malformed_parts() {
        let e = Qrm::<f64>::from_parts(vec![], regs(&["t"]), vec![3], vec![vec![]], 0);
        assert!(matches!(e, Err(MonitorError::Invalid(_))));
        let e = Qrm::<f64>::from_parts(vec![], regs(&["t", "t"]), vec![0], vec![vec![]], 0);
        assert!(matches!(e, Err(MonitorError::Invalid(_))));
        let e = Qrm::<f64>::from_parts(
            vec![],
            regs(&["t"]),
            vec![0],
            vec![vec![UpdateInstr { target: 0, expr: Expr::Label(0) }]],
            0,
        );
        assert!(matches!(e, Err(MonitorError::Invalid(_))));
    }

    #[test]
    fn label_errors() {
        let m = Qrm::from_parts(
            vec!["b".into()],
            regs(&["t"]),
            vec![0],
            vec![vec![UpdateInstr { target: 0, expr: Expr::Label(0) }]],
            0,
        )
        .unwrap();
        assert_eq!(
            m.init_slice(&[1.2]).unwrap_err(),
            MonitorError::LabelOutOfRange {
                atom: "b".into(),
                value: "1.2".into()
            }
        );
        let empty: std::collections::BTreeMap<String, f64> = Default::default();
        assert_eq!(
            m.init(&empty).unwrap_err(),
            MonitorError::MissingLabel("b".into())
        );
    }
}
