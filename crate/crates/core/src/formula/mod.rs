//! LTLf formulas with `F` and `G` kept as primitives.
//!
//! Implication and equivalence only exist in the surface syntax; the parser
//! rewrites them into `!`, `&` and `|`.

mod parse;

use std::collections::BTreeSet;
use std::fmt;

pub use parse::{parse, parse_with_atoms, ParseError};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, rhs: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn next(self) -> Self {
        Formula::Next(Box::new(self))
    }

    pub fn until(self, rhs: Formula) -> Self {
        Formula::Until(Box::new(self), Box::new(rhs))
    }

    pub fn release(self, rhs: Formula) -> Self {
        Formula::Release(Box::new(self), Box::new(rhs))
    }

    pub fn eventually(self) -> Self {
        Formula::Eventually(Box::new(self))
    }

    pub fn always(self) -> Self {
        Formula::Always(Box::new(self))
    }

    /// `self -> rhs`, desugared to `!self | rhs`.
    pub fn implies(self, rhs: Formula) -> Self {
        self.not().or(rhs)
    }

    /// `self <-> rhs`, desugared to `(self -> rhs) & (rhs -> self)`.
    pub fn iff(self, rhs: Formula) -> Self {
        self.clone().implies(rhs.clone()).and(rhs.implies(self))
    }

    pub fn children(&self) -> Vec<&Formula> {
        use Formula::*;
        match self {
            True | False | Atom(_) => vec![],
            Not(a) | Next(a) | Eventually(a) | Always(a) => vec![a],
            And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => vec![a, b],
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }

    /// Atom names occurring in the formula, sorted.
    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        if let Formula::Atom(p) = self {
            out.insert(p.as_str());
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    pub fn is_temporal(&self) -> bool {
        matches!(
            self,
            Formula::Next(_)
                | Formula::Until(..)
                | Formula::Release(..)
                | Formula::Eventually(_)
                | Formula::Always(_)
        )
    }

    /// Negation normal form. Negation is pushed to atoms through the dualities
    /// `U`/`R`, `F`/`G`, `&`/`|`; a negated `X` is left in place since `X` is
    /// strong on finite traces and has no dual in this syntax.
    pub fn to_nnf(&self) -> Formula {
        use Formula::*;
        match self {
            True | False | Atom(_) => self.clone(),
            Not(a) => a.negated_nnf(),
            And(a, b) => a.to_nnf().and(b.to_nnf()),
            Or(a, b) => a.to_nnf().or(b.to_nnf()),
            Next(a) => a.to_nnf().next(),
            Until(a, b) => a.to_nnf().until(b.to_nnf()),
            Release(a, b) => a.to_nnf().release(b.to_nnf()),
            Eventually(a) => a.to_nnf().eventually(),
            Always(a) => a.to_nnf().always(),
        }
    }

    fn negated_nnf(&self) -> Formula {
        use Formula::*;
        match self {
            True => False,
            False => True,
            Atom(_) => self.clone().not(),
            Not(a) => a.to_nnf(),
            And(a, b) => a.negated_nnf().or(b.negated_nnf()),
            Or(a, b) => a.negated_nnf().and(b.negated_nnf()),
            Next(a) => a.to_nnf().next().not(),
            Until(a, b) => a.negated_nnf().release(b.negated_nnf()),
            Release(a, b) => a.negated_nnf().until(b.negated_nnf()),
            Eventually(a) => a.negated_nnf().always(),
            Always(a) => a.negated_nnf().eventually(),
        }
    }

    /// Whether the formula is in the syntactic safety fragment
    /// `⊤ | ⊥ | p | ¬p | φ∧φ | φ∨φ | Xφ | φRφ | Gφ` after NNF conversion.
    ///
    /// `⊥` is admitted because `G φ` abbreviates `⊥ R φ`. A negated `X` is
    /// rejected.
    pub fn is_safe(&self) -> bool {
        self.to_nnf().is_safe_nnf()
    }

    fn is_safe_nnf(&self) -> bool {
        use Formula::*;
        match self {
            True | False | Atom(_) => true,
            Not(a) => matches!(**a, Atom(_)),
            And(a, b) | Or(a, b) | Release(a, b) => a.is_safe_nnf() && b.is_safe_nnf(),
            Next(a) | Always(a) => a.is_safe_nnf(),
            Until(..) | Eventually(_) => false,
        }
    }

    fn precedence(&self) -> u8 {
        use Formula::*;
        match self {
            Or(..) => 1,
            And(..) => 2,
            Until(..) | Release(..) => 3,
            Not(_) | Next(_) | Eventually(_) | Always(_) => 4,
            True | False | Atom(_) => 5,
        }
    }
}

impl fmt::Display for Formula {
    /// ASCII concrete syntax with the minimal parentheses needed for
    /// `parse(f.to_string()) == f`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        let paren = |f: &mut fmt::Formatter<'_>, child: &Formula, min: u8| {
            if child.precedence() < min {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        };
        match self {
            True => write!(f, "true"),
            False => write!(f, "false"),
            Atom(p) => write!(f, "{p}"),
            Not(a) | Next(a) | Eventually(a) | Always(a) => {
                let op = match self {
                    Not(_) => "!",
                    Next(_) => "X ",
                    Eventually(_) => "F ",
                    _ => "G ",
                };
                write!(f, "{op}")?;
                paren(f, a, 4)
            }
            And(a, b) | Or(a, b) => {
                let (op, p) = if matches!(self, And(..)) { ("&", 2) } else { ("|", 1) };
                paren(f, a, p)?;
                write!(f, " {op} ")?;
                paren(f, b, p + 1)
            }
            Until(a, b) | Release(a, b) => {
                let op = if matches!(self, Until(..)) { "U" } else { "R" };
                paren(f, a, 4)?;
                write!(f, " {op} ")?;
                paren(f, b, 3)
            }
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
