//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! formula := iff
//! iff     := impl ("<->" impl)*      right-associative
//! impl    := or ("->" or)*           right-associative
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "!" unary | "(" formula ")" | IDENT
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Unknown atoms are
//! declared in the supplied [`AtomTable`] on first use.

use super::formula::{AtomTable, Formula};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Not => "`!`".into(),
            Token::And => "`&`".into(),
            Token::Or => "`|`".into(),
            Token::Implies => "`->`".into(),
            Token::Iff => "`<->`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: String| ParseError {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '!' => {
                out.push(Spanned {
                    token: Token::Not,
                    line: tl,
                    column: tc,
                });
                advance(1, &mut i, &mut col);
            }
            '&' => {
                out.push(Spanned {
                    token: Token::And,
                    line: tl,
                    column: tc,
                });
                advance(1, &mut i, &mut col);
            }
            '|' => {
                out.push(Spanned {
                    token: Token::Or,
                    line: tl,
                    column: tc,
                });
                advance(1, &mut i, &mut col);
            }
            '(' => {
                out.push(Spanned {
                    token: Token::LParen,
                    line: tl,
                    column: tc,
                });
                advance(1, &mut i, &mut col);
            }
            ')' => {
                out.push(Spanned {
                    token: Token::RParen,
                    line: tl,
                    column: tc,
                });
                advance(1, &mut i, &mut col);
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push(Spanned {
                        token: Token::Implies,
                        line: tl,
                        column: tc,
                    });
                    advance(2, &mut i, &mut col);
                } else {
                    return Err(err(tl, tc, "expected `->`".into()));
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
                    out.push(Spanned {
                        token: Token::Iff,
                        line: tl,
                        column: tc,
                    });
                    advance(3, &mut i, &mut col);
                } else {
                    return Err(err(tl, tc, "expected `<->`".into()));
                }
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                let name: String = chars[start..i].iter().collect();
                out.push(Spanned {
                    token: Token::Ident(name),
                    line: tl,
                    column: tc,
                });
            }
            other => return Err(err(tl, tc, format!("unexpected character `{other}`"))),
        }
    }
    out.push(Spanned {
        token: Token::End,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser<'t> {
    tokens: Vec<Spanned>,
    pos: usize,
    atoms: &'t mut AtomTable,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].token
    }

    fn bump(&mut self) -> &Spanned {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> ParseError {
        let t = &self.tokens[self.pos];
        ParseError {
            line: t.line,
            column: t.column,
            message: format!("expected {expected}, found {}", t.token.describe()),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.implication()?;
        if *self.peek() == Token::Iff {
            self.bump();
            let rhs = self.iff()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Token::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while *self.peek() == Token::Or {
            self.bump();
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Token::And {
            self.bump();
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Token::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Token::LParen => {
                self.bump();
                let f = self.formula()?;
                if *self.peek() != Token::RParen {
                    return Err(self.error_here("`)`"));
                }
                self.bump();
                Ok(f)
            }
            Token::Ident(name) => {
                self.bump();
                Ok(Formula::atom(self.atoms.intern(&name)))
            }
            _ => Err(self.error_here("a formula")),
        }
    }
}

/// Parses a single formula, declaring unknown atoms in `atoms`.
pub fn parse_formula(text: &str, atoms: &mut AtomTable) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    // Parse against a scratch table so a failed parse leaves `atoms` untouched.
    let mut scratch = atoms.clone();
    let mut p = Parser {
        tokens,
        pos: 0,
        atoms: &mut scratch,
    };
    let f = p.formula()?;
    if *p.peek() != Token::End {
        return Err(p.error_here("end of input"));
    }
    *atoms = scratch;
    Ok(f)
}
