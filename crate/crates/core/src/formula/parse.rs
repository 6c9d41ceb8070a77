//! Recursive-descent parser for the concrete syntax.
//!
//! Precedence, loosest first: `<->`, `->` (right), `|`, `&`, `U`/`R` (right),
//! then the prefix operators `! X F G`. Unicode `¬ ∧ ∨ → ↔` are accepted as
//! aliases.

use std::collections::BTreeSet;

use super::Formula;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("column {column}: unexpected {found}, expected one of: {}", expected.join(" "))]
    Unexpected {
        column: usize,
        found: String,
        expected: Vec<String>,
    },
    #[error("column {column}: unknown operator '{symbol}'")]
    UnknownOperator { column: usize, symbol: String },
    #[error("column {column}: unknown atom '{name}'")]
    UnknownAtom { column: usize, name: String },
}

impl ParseError {
    /// 1-based character column of the offending token.
    pub fn column(&self) -> usize {
        match self {
            ParseError::Unexpected { column, .. }
            | ParseError::UnknownOperator { column, .. }
            | ParseError::UnknownAtom { column, .. } => *column,
        }
    }

    pub fn expected(&self) -> &[String] {
        match self {
            ParseError::Unexpected { expected, .. } => expected,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Next,
    Until,
    Release,
    Eventually,
    Always,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("atom '{s}'"),
            Tok::Eof => "end of input".to_string(),
            other => format!("'{}'", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Ident(_) => "atom",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Not => "!",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::Implies => "->",
            Tok::Iff => "<->",
            Tok::Next => "X",
            Tok::Until => "U",
            Tok::Release => "R",
            Tok::Eventually => "F",
            Tok::Always => "G",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Eof => "end of input",
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '!' | '¬' => Some(Tok::Not),
            '&' | '∧' => Some(Tok::And),
            '|' | '∨' => Some(Tok::Or),
            '→' => Some(Tok::Implies),
            '↔' => Some(Tok::Iff),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            'X' => Some(Tok::Next),
            'U' => Some(Tok::Until),
            'R' => Some(Tok::Release),
            'F' => Some(Tok::Eventually),
            'G' => Some(Tok::Always),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, col));
            i += 1;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        if rest.starts_with("->") {
            out.push((Tok::Implies, col));
            i += 2;
        } else if rest.starts_with("<->") {
            out.push((Tok::Iff, col));
            i += 3;
        } else if c.is_ascii_lowercase() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_lowercase() || chars[i].is_ascii_digit() || chars[i] == '_')
            {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let t = match word.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Ident(word),
            };
            out.push((t, col));
        } else {
            return Err(ParseError::UnknownOperator {
                column: col,
                symbol: c.to_string(),
            });
        }
    }
    out.push((Tok::Eof, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    atoms: Option<&'a BTreeSet<String>>,
}

const PRIMARY_START: &[&str] = &["(", "!", "F", "G", "X", "atom", "false", "true"];

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn column(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        ParseError::Unexpected {
            column: self.column(),
            found: self.peek().describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implies()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implies()?;
            lhs = lhs.iff(rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = lhs.or(self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.binary_temporal()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = lhs.and(self.binary_temporal()?);
        }
        Ok(lhs)
    }

    fn binary_temporal(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        match self.peek() {
            Tok::Until => {
                self.bump();
                Ok(lhs.until(self.binary_temporal()?))
            }
            Tok::Release => {
                self.bump();
                Ok(lhs.release(self.binary_temporal()?))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(self.unary()?.not())
            }
            Tok::Next => {
                self.bump();
                Ok(self.unary()?.next())
            }
            Tok::Eventually => {
                self.bump();
                Ok(self.unary()?.eventually())
            }
            Tok::Always => {
                self.bump();
                Ok(self.unary()?.always())
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let col = self.column();
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(name) => {
                if let Some(known) = self.atoms {
                    if !known.contains(&name) {
                        return Err(ParseError::UnknownAtom { column: col, name });
                    }
                }
                self.bump();
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.iff()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected(&[")", "&", "|", "->", "<->", "U", "R"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.unexpected(PRIMARY_START)),
        }
    }
}

/// Parse a formula in the ASCII (or Unicode-alias) concrete syntax.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    run(src, None)
}

/// Parse and reject atoms that are not in `atoms`.
pub fn parse_with_atoms(src: &str, atoms: &BTreeSet<String>) -> Result<Formula, ParseError> {
    run(src, Some(atoms))
}

fn run(src: &str, atoms: Option<&BTreeSet<String>>) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        atoms,
    };
    let f = p.iff()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected(&["&", "|", "->", "<->", "U", "R", "end of input"]));
    }
    Ok(f)
}
