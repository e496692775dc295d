//! Text format for process trees.
//!
//! ```text
//! tree    := node (':' weight)?
//! node    := op '(' tree (',' tree)* ')' | label | 'tau'
//! op      := '->' | 'X' | '+' | '*'
//! label   := '\'' chars '\''          (use \' and \\ inside labels)
//! weight  := non-negative decimal integer
//! ```
//!
//! `->` is sequence, `X` exclusive choice, `+` parallel, `*` loop (first
//! child is the do part). Whitespace between tokens is ignored. Either all
//! nodes carry a weight or none do.

use std::fmt;

use thiserror::Error;

use super::{Operator, ProcessTree, TreeError, SILENT_TOKEN};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {position}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unterminated activity label")]
    UnterminatedLabel,
    #[error("negative weight")]
    NegativeWeight,
    #[error("weight out of range")]
    WeightOverflow,
    #[error("trailing input after tree")]
    Trailing,
    #[error(transparent)]
    Invalid(#[from] TreeError),
}

pub fn parse_tree(text: &str) -> Result<ProcessTree, ParseError> {
    let mut p = Parser {
        src: text,
        pos: 0,
        annotations: Vec::new(),
    };
    let tree = p.tree()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error(ParseErrorKind::Trailing));
    }
    let root_annotated = tree.is_annotated();
    if let Some(&(pos, _)) = p.annotations.iter().find(|(_, w)| *w != root_annotated) {
        return Err(ParseError {
            position: pos,
            kind: TreeError::MixedAnnotation.into(),
        });
    }
    Ok(tree)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    // (start offset, has weight) for every node, used for the mixed-annotation check
    annotations: Vec<(usize, bool)>,
}

impl Parser<'_> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position: self.pos,
            kind,
        }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(c) => self.error(ParseErrorKind::UnexpectedChar(c)),
            None => self.error(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn tree(&mut self) -> Result<ProcessTree, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let rest = self.rest();
        let op = if rest.starts_with("->") {
            Some((Operator::Sequence, 2))
        } else if rest.starts_with('X') {
            Some((Operator::Xor, 1))
        } else if rest.starts_with('+') {
            Some((Operator::Parallel, 1))
        } else if rest.starts_with('*') {
            Some((Operator::Loop, 1))
        } else {
            None
        };
        let mut tree = if let Some((op, len)) = op {
            self.pos += len;
            self.expect('(')?;
            let mut children = vec![self.tree()?];
            loop {
                self.skip_ws();
                match self.peek() {
                    Some(',') => {
                        self.pos += 1;
                        children.push(self.tree()?);
                    }
                    Some(')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return Err(self.unexpected()),
                }
            }
            if op == Operator::Loop && children.len() < 2 {
                return Err(ParseError {
                    position: start,
                    kind: TreeError::LoopArity(children.len()).into(),
                });
            }
            ProcessTree::operator(op, children)
        } else if rest.starts_with('\'') {
            let label = self.label()?;
            if label.is_empty() {
                return Err(ParseError {
                    position: start,
                    kind: TreeError::EmptyLabel.into(),
                });
            }
            if label == SILENT_TOKEN {
                return Err(ParseError {
                    position: start,
                    kind: TreeError::ReservedLabel(label).into(),
                });
            }
            ProcessTree::activity(label)
        } else if rest.starts_with(SILENT_TOKEN)
            && !rest[SILENT_TOKEN.len()..].starts_with(|c: char| c.is_alphanumeric() || c == '_')
        {
            self.pos += SILENT_TOKEN.len();
            ProcessTree::silent()
        } else {
            return Err(self.unexpected());
        };

        self.skip_ws();
        let weighted = if self.peek() == Some(':') {
            self.pos += 1;
            tree = tree.with_weight(self.weight()?);
            true
        } else {
            false
        };
        self.annotations.push((start, weighted));
        Ok(tree)
    }

    fn label(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        let mut chars = self.rest().char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\'' => {
                    self.pos += i + 1;
                    return Ok(out);
                }
                '\\' => match chars.next() {
                    Some((_, e)) => out.push(e),
                    None => break,
                },
                c => out.push(c),
            }
        }
        Err(ParseError {
            position: start,
            kind: ParseErrorKind::UnterminatedLabel,
        })
    }

    fn weight(&mut self) -> Result<u64, ParseError> {
        self.skip_ws();
        if self.peek() == Some('-') {
            return Err(self.error(ParseErrorKind::NegativeWeight));
        }
        let digits = self
            .rest()
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(self.rest().len());
        if digits == 0 {
            return Err(self.unexpected());
        }
        let value = self.rest()[..digits]
            .parse::<u64>()
            .map_err(|_| self.error(ParseErrorKind::WeightOverflow))?;
        self.pos += digits;
        Ok(value)
    }
}

pub(crate) fn write_label(f: &mut fmt::Formatter<'_>, label: &str) -> fmt::Result {
    f.write_str("'")?;
    for c in label.chars() {
        if c == '\'' || c == '\\' {
            f.write_str("\\")?;
        }
        write!(f, "{c}")?;
    }
    f.write_str("'")
}
