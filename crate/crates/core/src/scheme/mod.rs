//! Module scheme syntax: tokens, AST, parser and canonical printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use ast::*;
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, SyntaxError};
pub use printer::{pretty_print, print_class};

/// Tokenizes and parses scheme text in one step.
pub fn parse_text(text: &str) -> Result<Scheme, SyntaxError> {
    parse(&tokenize(text))
}
