//! Several weighted specifications combined into one reward signal, with a
//! veto that pins the reward to a constant penalty once a safety
//! specification is violated.

use std::sync::Arc;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::formula::{parse, Formula, ParseError};
use crate::monitor::{BooleanMonitor, BrmState, MonitorError, MonitorState, Qrm, Synthesizer};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Boolean,
    Quantitative,
}

/// A specification with the reward weight attached to it.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecRewardPair<S> {
    pub formula: Formula,
    pub weight: S,
    pub mode: Mode,
    safety: bool,
}

impl<S: Scalar> SpecRewardPair<S> {
    pub fn new(formula: Formula, weight: S, mode: Mode) -> Self {
        let safety = formula.is_safe();
        SpecRewardPair {
            formula,
            weight,
            mode,
            safety,
        }
    }

    pub fn parse(src: &str, weight: S, mode: Mode) -> Result<Self, ParseError> {
        Ok(Self::new(parse(src)?, weight, mode))
    }

    /// Whether the formula lies in the safety fragment; violations of such
    /// specifications trigger the veto.
    pub fn is_safety(&self) -> bool {
        self.safety
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComposeError {
    #[error("at least one specification is required")]
    Empty,
    #[error("veto penalty must be <= 0, got {0}")]
    PositiveZeta(String),
    #[error("atom '{atom}' of '{formula}' is not provided by the environment")]
    UnknownAtom { atom: String, formula: String },
    #[error(transparent)]
    Monitor(#[from] MonitorError),
}

#[derive(Debug, Clone)]
enum Runner<S> {
    Quant {
        qrm: Arc<Qrm<S>>,
        st: Option<MonitorState<S>>,
    },
    Bool {
        brm: BooleanMonitor,
        st: Option<BrmState>,
    },
}

#[derive(Debug, Clone)]
struct Component<S> {
    runner: Runner<S>,
    weight: S,
    safety: bool,
    /// Positions of the component's atoms in the environment's atom list.
    columns: Vec<usize>,
    scratch: Vec<S>,
}

impl<S: Scalar> Component<S> {
    fn advance(&mut self, crisp: &[S], quant: &[S]) -> Result<(), MonitorError> {
        let Component {
            runner,
            columns,
            scratch,
            ..
        } = self;
        let src = match runner {
            Runner::Quant { .. } => quant,
            Runner::Bool { .. } => crisp,
        };
        for (dst, &c) in scratch.iter_mut().zip(columns.iter()) {
            *dst = src[c];
        }
        match runner {
            Runner::Quant { qrm, st } => match st {
                Some(s) => qrm.step_slice(s, scratch)?,
                None => *st = Some(qrm.init_slice(scratch)?),
            },
            Runner::Bool { brm, st } => match st {
                Some(s) => brm.step_slice(s, scratch)?,
                None => *st = Some(brm.init_slice(scratch)?),
            },
        }
        Ok(())
    }

    /// Unweighted output.
    fn value(&self) -> S {
        match &self.runner {
            Runner::Quant { qrm, st } => st.as_ref().map_or(S::zero(), |s| qrm.value(s)),
            Runner::Bool { brm, st } => match st {
                Some(s) if brm.output(s) => S::one(),
                _ => S::zero(),
            },
        }
    }

    fn violated(&self, threshold: S) -> bool {
        if !self.safety {
            return false;
        }
        match &self.runner {
            Runner::Quant { qrm, st } => st.as_ref().is_some_and(|s| qrm.value(s) <= threshold),
            Runner::Bool { brm, st } => st.as_ref().is_some_and(|s| brm.is_violated(s)),
        }
    }

    fn control_state(&self) -> u32 {
        match &self.runner {
            Runner::Quant { st, .. } => st.as_ref().map_or(u32::MAX, |s| s.state as u32),
            Runner::Bool { st, .. } => st.as_ref().map_or(u32::MAX, |s| s.state),
        }
    }

    fn clear(&mut self) {
        match &mut self.runner {
            Runner::Quant { st, .. } => *st = None,
            Runner::Bool { st, .. } => *st = None,
        }
    }
}

/// Runtime composite of spec-reward monitors over a fixed atom universe.
///
/// Label slices passed to [`reset`](Self::reset) and [`step`](Self::step) are
/// ordered like the `atoms` given to [`compose`]: one slice of crisp labels
/// (read by Boolean components) and one of quantitative labels.
#[derive(Debug, Clone)]
pub struct CompositeMonitor<S> {
    atoms: Vec<String>,
    components: Vec<Component<S>>,
    zeta: S,
    veto_threshold: S,
    violated: bool,
    tuples: FxHashMap<Vec<u32>, u32>,
    tuple_buf: Vec<u32>,
}

/// Default register value at or below which a quantitative safety
/// specification counts as violated.
pub const DEFAULT_VETO_THRESHOLD: f64 = 1e-9;

/// Build the composite monitor for `pairs` over the environment atoms
/// `atoms`. Subformulas shared between quantitative specifications are
/// synthesised once.
pub fn compose<S: Scalar>(
    pairs: &[SpecRewardPair<S>],
    zeta: S,
    atoms: &[String],
) -> Result<CompositeMonitor<S>, ComposeError> {
    if pairs.is_empty() {
        return Err(ComposeError::Empty);
    }
    if zeta > S::zero() {
        return Err(ComposeError::PositiveZeta(zeta.to_string()));
    }
    let mut synth = Synthesizer::<S>::new();
    let mut components = Vec::with_capacity(pairs.len());
    for p in pairs {
        let (runner, own_atoms) = match p.mode {
            Mode::Quantitative => {
                let q = synth.synth(&p.formula)?;
                let a = q.atoms().to_vec();
                (Runner::Quant { qrm: Arc::new(q), st: None }, a)
            }
            Mode::Boolean => {
                let b = BooleanMonitor::new(&p.formula)?;
                let a = b.atoms().to_vec();
                (Runner::Bool { brm: b, st: None }, a)
            }
        };
        let columns = own_atoms
            .iter()
            .map(|a| {
                atoms
                    .iter()
                    .position(|x| x == a)
                    .ok_or_else(|| ComposeError::UnknownAtom {
                        atom: a.clone(),
                        formula: p.formula.to_string(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        components.push(Component {
            runner,
            weight: p.weight,
            safety: p.is_safety(),
            scratch: vec![S::zero(); columns.len()],
            columns,
        });
    }
    Ok(CompositeMonitor {
        atoms: atoms.to_vec(),
        components,
        zeta,
        veto_threshold: S::from_f64(DEFAULT_VETO_THRESHOLD).unwrap_or_else(S::zero),
        violated: false,
        tuples: FxHashMap::default(),
        tuple_buf: Vec::new(),
    })
}

impl<S: Scalar> CompositeMonitor<S> {
    pub fn with_veto_threshold(mut self, threshold: S) -> Self {
        self.veto_threshold = threshold;
        self
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn zeta(&self) -> S {
        self.zeta
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn is_violated(&self) -> bool {
        self.violated
    }

    fn check(&self, labels: &[S]) -> Result<(), MonitorError> {
        if labels.len() != self.atoms.len() {
            return Err(MonitorError::LabelCount {
                expected: self.atoms.len(),
                got: labels.len(),
            });
        }
        Ok(())
    }

    fn absorb(&mut self, crisp: &[S], quant: &[S]) -> Result<(), MonitorError> {
        self.check(crisp)?;
        self.check(quant)?;
        for c in &mut self.components {
            c.advance(crisp, quant)?;
        }
        if !self.violated {
            let t = self.veto_threshold;
            self.violated = self.components.iter().any(|c| c.violated(t));
        }
        Ok(())
    }

    /// Start a new episode on the labels of the initial state.
    pub fn reset(&mut self, crisp: &[S], quant: &[S]) -> Result<(), MonitorError> {
        self.violated = false;
        for c in &mut self.components {
            c.clear();
        }
        self.absorb(crisp, quant)
    }

    /// Consume the labels of one transition and return the reward for it:
    /// `ζ` once any safety specification has been violated, otherwise the
    /// weighted sum of the components' outputs.
    pub fn step(&mut self, crisp: &[S], quant: &[S]) -> Result<S, MonitorError> {
        self.absorb(crisp, quant)?;
        Ok(self.reward())
    }

    /// Reward for the prefix read so far.
    pub fn reward(&self) -> S {
        if self.violated {
            return self.zeta;
        }
        self.components
            .iter()
            .fold(S::zero(), |acc, c| acc + c.weight * c.value())
    }

    /// Unweighted output of each component.
    pub fn values(&self) -> Vec<S> {
        self.components.iter().map(Component::value).collect()
    }

    /// Control states of the components plus the veto flag.
    pub fn state_tuple(&self) -> Vec<u32> {
        let mut t: Vec<u32> = self.components.iter().map(Component::control_state).collect();
        t.push(self.violated as u32);
        t
    }

    /// Dense id of the current [`state_tuple`](Self::state_tuple), assigned
    /// in order of first appearance.
    pub fn state_index(&mut self) -> u32 {
        self.tuple_buf.clear();
        for c in &self.components {
            self.tuple_buf.push(c.control_state());
        }
        self.tuple_buf.push(self.violated as u32);
        if let Some(&i) = self.tuples.get(&self.tuple_buf) {
            return i;
        }
        let i = self.tuples.len() as u32;
        self.tuples.insert(self.tuple_buf.clone(), i);
        i
    }
}
