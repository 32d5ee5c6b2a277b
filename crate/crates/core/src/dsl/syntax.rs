//! Generic syntax tree: blocks of pairs, values are numbers, strings,
//! identifiers, calls with named arguments, or `+`-sums of those.

use super::lexer::{tokenize, Pos, Tok, Token};
use super::ParseError;

/// Deepest allowed nesting of blocks and calls.
const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub(super) enum ValueKind {
    Number(f64),
    Str(String),
    Ident(String),
    Call { name: String, args: Vec<Arg> },
    Sum(Vec<Value>),
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Value {
    pub pos: Pos,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Arg {
    pub name: String,
    pub pos: Pos,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Item {
    Pair { key: String, pos: Pos, value: Value },
    Block(Block),
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Block {
    pub name: String,
    pub pos: Pos,
    pub items: Vec<Item>,
    /// Position of the closing brace (end of input for the document).
    pub end: Pos,
}

pub(super) fn parse_document(text: &str) -> Result<Block, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, at: 0 };
    let items = p.items(0, true)?;
    let end = p.peek().pos;
    Ok(Block {
        name: String::new(),
        pos: Pos { line: 1, column: 1 },
        items,
        end,
    })
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError::new(
            t.pos.line,
            t.pos.column,
            format!("unexpected {}", t.tok.describe()),
            expected,
        )
    }

    fn items(&mut self, depth: usize, top: bool) -> Result<Vec<Item>, ParseError> {
        let closer = if top { "end of input" } else { "`}`" };
        let mut items = Vec::new();
        loop {
            match self.peek().tok.clone() {
                Tok::Eof if top => return Ok(items),
                Tok::RBrace if !top => return Ok(items),
                Tok::Ident(name) => {
                    let pos = self.bump().pos;
                    match self.peek().tok {
                        Tok::Eq => {
                            self.bump();
                            let value = self.value(depth)?;
                            items.push(Item::Pair { key: name, pos, value });
                        }
                        Tok::LBrace => {
                            if depth >= MAX_DEPTH {
                                let t = self.peek();
                                return Err(ParseError::new(t.pos.line, t.pos.column, "blocks nested too deeply", &[]));
                            }
                            self.bump();
                            let inner = self.items(depth + 1, false)?;
                            let end = self.bump().pos;
                            items.push(Item::Block(Block {
                                name,
                                pos,
                                items: inner,
                                end,
                            }));
                        }
                        _ => return Err(self.error(&["`=`", "`{`"])),
                    }
                }
                _ => return Err(self.error(&["identifier", closer])),
            }
        }
    }

    fn value(&mut self, depth: usize) -> Result<Value, ParseError> {
        let first = self.atom(depth)?;
        if self.peek().tok != Tok::Plus {
            return Ok(first);
        }
        let pos = first.pos;
        let mut parts = vec![first];
        while self.peek().tok == Tok::Plus {
            self.bump();
            parts.push(self.atom(depth)?);
        }
        Ok(Value {
            pos,
            kind: ValueKind::Sum(parts),
        })
    }

    fn atom(&mut self, depth: usize) -> Result<Value, ParseError> {
        let token = self.peek().clone();
        let pos = token.pos;
        let kind = match token.tok {
            Tok::Number(x) => {
                self.bump();
                ValueKind::Number(x)
            }
            Tok::Str(s) => {
                self.bump();
                ValueKind::Str(s)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek().tok == Tok::LParen {
                    if depth >= MAX_DEPTH {
                        return Err(ParseError::new(pos.line, pos.column, "calls nested too deeply", &[]));
                    }
                    self.bump();
                    let args = self.args(depth + 1)?;
                    ValueKind::Call { name, args }
                } else {
                    ValueKind::Ident(name)
                }
            }
            _ => return Err(self.error(&["number", "string", "identifier"])),
        };
        Ok(Value { pos, kind })
    }

    fn args(&mut self, depth: usize) -> Result<Vec<Arg>, ParseError> {
        let mut args = Vec::new();
        loop {
            match self.peek().tok.clone() {
                Tok::RParen => {
                    self.bump();
                    return Ok(args);
                }
                Tok::Ident(name) => {
                    let pos = self.bump().pos;
                    if self.peek().tok != Tok::Eq {
                        return Err(self.error(&["`=`"]));
                    }
                    self.bump();
                    let value = self.value(depth)?;
                    args.push(Arg { name, pos, value });
                    match self.peek().tok {
                        Tok::Comma => {
                            self.bump();
                        }
                        Tok::RParen => {}
                        _ => return Err(self.error(&["`,`", "`)`"])),
                    }
                }
                _ => return Err(self.error(&["argument name", "`)`"])),
            }
        }
    }
}
