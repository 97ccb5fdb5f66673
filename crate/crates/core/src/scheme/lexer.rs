use serde::{Deserialize, Serialize};

use super::ast::Position;

/// Single-character delimiters. `->` is the only two-character one.
pub const DELIMITERS: &[char] = &[
    '~', '=', ';', '.', '+', '?', '!', '|', ',', '*', ':', '&', '(', ')', '<', '>',
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TokenKind {
    Ident,
    Delimiter,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub pos: Position,
}

impl Token {
    pub fn is_delim(&self, d: &str) -> bool {
        self.kind == TokenKind::Delimiter && self.text == d
    }
}

pub fn is_delimiter(c: char) -> bool {
    DELIMITERS.contains(&c)
}

/// Splits scheme text into identifiers and delimiters. Never fails: any run
/// of characters that are neither whitespace nor delimiters is an identifier,
/// so `Pythagorean-identity-test` is one token while `A->B` is three.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut column = 1;
    let mut chars = text.chars().peekable();
    let mut ident = String::new();
    let mut ident_pos = Position::new(1, 1);

    fn flush(ident: &mut String, pos: Position, tokens: &mut Vec<Token>) {
        if !ident.is_empty() {
            tokens.push(Token {
                kind: TokenKind::Ident,
                text: std::mem::take(ident),
                pos,
            });
        }
    }

    while let Some(c) = chars.next() {
        let here = Position::new(line, column);
        if c == '\n' {
            line += 1;
            column = 1;
        } else {
            column += 1;
        }

        if c.is_whitespace() {
            flush(&mut ident, ident_pos, &mut tokens);
        } else if c == '-' && chars.peek() == Some(&'>') {
            flush(&mut ident, ident_pos, &mut tokens);
            chars.next();
            column += 1;
            tokens.push(Token {
                kind: TokenKind::Delimiter,
                text: "->".into(),
                pos: here,
            });
        } else if is_delimiter(c) {
            flush(&mut ident, ident_pos, &mut tokens);
            tokens.push(Token {
                kind: TokenKind::Delimiter,
                text: c.to_string(),
                pos: here,
            });
        } else {
            if ident.is_empty() {
                ident_pos = here;
            }
            ident.push(c);
        }
    }
    flush(&mut ident, ident_pos, &mut tokens);
    tokens
}
