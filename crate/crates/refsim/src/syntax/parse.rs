use thiserror::Error;

use super::formula::{AgentName, AtomName, Formula};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: u32,
        col: u32,
        message: String,
    },
    #[error("unknown token at {line}:{col}: {found:?}")]
    UnknownToken { line: u32, col: u32, found: char },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    Iff,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LAngle,
    RAngle,
}

#[derive(Debug)]
struct Lexed {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(text: &str) -> Result<Vec<Lexed>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let tok = match c {
            '~' => {
                bump(&mut chars);
                Tok::Tilde
            }
            '&' => {
                bump(&mut chars);
                Tok::Amp
            }
            '|' => {
                bump(&mut chars);
                Tok::Pipe
            }
            '(' => {
                bump(&mut chars);
                Tok::LParen
            }
            ')' => {
                bump(&mut chars);
                Tok::RParen
            }
            '[' => {
                bump(&mut chars);
                Tok::LBracket
            }
            ']' => {
                bump(&mut chars);
                Tok::RBracket
            }
            '>' => {
                bump(&mut chars);
                Tok::RAngle
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    Tok::Arrow
                } else {
                    return Err(ParseError::Syntax {
                        line: tline,
                        col: tcol,
                        message: "expected '->'".into(),
                    });
                }
            }
            '<' => {
                bump(&mut chars);
                if chars.peek() == Some(&'-') {
                    bump(&mut chars);
                    if chars.peek() == Some(&'>') {
                        bump(&mut chars);
                        Tok::Iff
                    } else {
                        return Err(ParseError::Syntax {
                            line: tline,
                            col: tcol,
                            message: "expected '<->'".into(),
                        });
                    }
                } else {
                    Tok::LAngle
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        ident.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                match ident.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(ident),
                }
            }
            other => {
                return Err(ParseError::UnknownToken {
                    line: tline,
                    col: tcol,
                    found: other,
                })
            }
        };
        out.push(Lexed {
            tok,
            line: tline,
            col: tcol,
        });
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    end_line: u32,
    end_col: u32,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .map(|l| (l.line, l.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Option<Tok> {
        let tok = self.toks.get(self.pos).map(|l| l.tok.clone());
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    // iff := imp ('<->' iff)?    (right associative)
    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.imp()?;
        if self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            let rhs = self.iff()?;
            Ok(Formula::iff(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    // imp := or ('->' imp)?      (right associative)
    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.imp()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.and()?];
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            items.push(self.and()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::or(items)
        })
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Formula::and(items)
        })
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::LBracket) => {
                self.pos += 1;
                let name = self.modality_name()?;
                self.expect(Tok::RBracket, "']'")?;
                let body = self.unary()?;
                Ok(match name.as_str() {
                    "ref" => Formula::ref_box(body),
                    "sim" => Formula::sim_box(body),
                    "orig" => Formula::origin(body),
                    _ => Formula::box_(self.agent(name)?, body),
                })
            }
            Some(Tok::LAngle) => {
                self.pos += 1;
                let name = self.modality_name()?;
                self.expect(Tok::RAngle, "'>'")?;
                let body = self.unary()?;
                Ok(match name.as_str() {
                    "ref" => Formula::ref_dia(body),
                    "sim" => Formula::sim_dia(body),
                    "orig" => {
                        return Err(self.err("the origin modality has no diamond form: use [orig]"))
                    }
                    _ => Formula::dia(self.agent(name)?, body),
                })
            }
            _ => self.primary(),
        }
    }

    fn modality_name(&mut self) -> Result<String, ParseError> {
        match self.next() {
            Some(Tok::Ident(name)) => Ok(name),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.err("expected an agent name or one of 'ref', 'sim', 'orig'"))
            }
        }
    }

    fn agent(&self, name: String) -> Result<AgentName, ParseError> {
        AgentName::new(name).map_err(|e| self.err(e.to_string()))
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.next() {
            Some(Tok::True) => Ok(Formula::True),
            Some(Tok::False) => Ok(Formula::False),
            Some(Tok::Ident(name)) => match AtomName::new(name) {
                Ok(p) => Ok(Formula::Atom(p)),
                Err(e) => {
                    self.pos -= 1;
                    Err(self.err(e.to_string()))
                }
            },
            Some(Tok::LParen) => {
                let inner = self.iff()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(_) => {
                self.pos -= 1;
                Err(self.err("expected a formula"))
            }
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parse a formula in the concrete grammar. Precedence, loose to tight:
/// `<->`, `->`, `|`, `&`, prefix operators. `->` and `<->` are desugared
/// into the core connectives.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let lines = text.lines().count().max(1) as u32;
    let end_col = text.lines().last().map(|l| l.len() + 1).unwrap_or(1) as u32;
    let mut parser = Parser {
        toks,
        pos: 0,
        end_line: lines,
        end_col,
    };
    let formula = parser.iff()?;
    if parser.peek().is_some() {
        return Err(parser.err("trailing input"));
    }
    Ok(formula)
}
