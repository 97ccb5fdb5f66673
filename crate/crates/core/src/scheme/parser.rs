//! Recursive-descent parser for channel and process definitions.

use thiserror::Error;

use super::ast::*;
use super::lexer::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: expected {}, found {found}", expected.join(" or "))]
pub struct SyntaxError {
    pub pos: Position,
    pub expected: Vec<String>,
    pub found: String,
}

type PResult<T> = Result<T, SyntaxError>;

struct Parser<'t> {
    tokens: &'t [Token],
    at: usize,
    /// Position reported for errors at end of input.
    end: Position,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.at)
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.tokens.get(self.at + n)
    }

    fn is(&self, d: &str) -> bool {
        self.peek().is_some_and(|t| t.is_delim(d))
    }

    fn is_at(&self, n: usize, d: &str) -> bool {
        self.peek_at(n).is_some_and(|t| t.is_delim(d))
    }

    fn is_ident_at(&self, n: usize) -> bool {
        self.peek_at(n).is_some_and(|t| t.kind == TokenKind::Ident)
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let (pos, found) = match self.peek() {
            Some(t) => (t.pos, format!("'{}'", t.text)),
            None => (self.end, "end of scheme".to_owned()),
        };
        Err(SyntaxError {
            pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        })
    }

    fn eat(&mut self, d: &str) -> bool {
        if self.is(d) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, d: &str) -> PResult<()> {
        if self.eat(d) {
            Ok(())
        } else {
            self.error(&[&format!("'{d}'")])
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => {
                self.at += 1;
                Ok(Ident::at(t.text.clone(), t.pos))
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn scheme(&mut self) -> PResult<Scheme> {
        let mut classes = Vec::new();
        while self.peek().is_some() {
            if self.eat("~") {
                classes.push(ClassDef::Channel(self.channel()?));
            } else if self.eat("*") {
                classes.push(ClassDef::Process(self.process()?));
            } else {
                return self.error(&["'~'", "'*'"]);
            }
        }
        Ok(Scheme { classes })
    }

    fn params(&mut self) -> PResult<Vec<Ident>> {
        let mut params = Vec::new();
        if self.eat("<") {
            params.push(self.ident()?);
            while self.eat(",") {
                params.push(self.ident()?);
            }
            self.expect(">")?;
        }
        Ok(params)
    }

    fn channel(&mut self) -> PResult<ChannelDef> {
        let name = self.ident()?;
        let params = self.params()?;
        let mut states = Vec::new();
        if self.eat("=") {
            states.push(self.state()?);
            while self.eat(";") {
                states.push(self.state()?);
            }
        }
        if !self.eat(".") {
            return if states.is_empty() {
                self.error(&["'='", "'.'"])
            } else {
                self.error(&["';'", "'.'"])
            };
        }
        Ok(ChannelDef {
            name,
            params,
            states,
        })
    }

    fn state(&mut self) -> PResult<StateDef> {
        let initial = self.eat("+");
        let name = self.ident()?;
        let direction = if self.eat("?") {
            Direction::Question
        } else if self.eat("!") {
            Direction::Answer
        } else {
            Direction::Unmarked
        };
        let mut rules = Vec::new();
        if direction != Direction::Unmarked && self.is_ident_at(0) {
            rules.push(self.rule()?);
            while self.eat("|") {
                rules.push(self.rule()?);
            }
        }
        Ok(StateDef {
            name,
            initial,
            direction,
            rules,
        })
    }

    fn rule(&mut self) -> PResult<Rule> {
        let mut messages = vec![self.ident()?];
        while self.eat(",") {
            messages.push(self.ident()?);
        }
        self.expect("->")?;
        let target = self.ident()?;
        Ok(Rule { messages, target })
    }

    fn process(&mut self) -> PResult<ProcessDef> {
        let name = self.ident()?;
        let params = self.params()?;
        let mut ports = Vec::new();
        let mut actions = Vec::new();
        if self.eat("=") {
            loop {
                if self.starts_port() {
                    if !actions.is_empty() {
                        return self.error(&["action"]);
                    }
                    ports.push(self.port()?);
                } else {
                    actions.push(self.action()?);
                }
                if !self.eat(";") {
                    break;
                }
            }
        }
        if !self.eat(".") {
            return if ports.is_empty() && actions.is_empty() {
                self.error(&["'='", "'.'"])
            } else {
                self.error(&["';'", "'.'"])
            };
        }
        Ok(ProcessDef {
            name,
            params,
            ports,
            actions,
        })
    }

    /// `ident ':' ident ('?'|'!')` starts a port; a labeled action has `(`
    /// after the second identifier.
    fn starts_port(&self) -> bool {
        self.is_ident_at(0)
            && self.is_at(1, ":")
            && self.is_ident_at(2)
            && (self.is_at(3, "?") || self.is_at(3, "!"))
    }

    fn side(&mut self) -> PResult<Side> {
        if self.eat("?") {
            Ok(Side::Server)
        } else if self.eat("!") {
            Ok(Side::Client)
        } else {
            self.error(&["'?'", "'!'"])
        }
    }

    fn port(&mut self) -> PResult<PortDef> {
        let name = self.ident()?;
        self.expect(":")?;
        let channel = self.ident()?;
        let side = self.side()?;
        let mut rules = Vec::new();
        let mut default_action = None;
        if self.eat("->") {
            default_action = Some(self.ident()?);
        } else if self.is_ident_at(0) {
            rules.push(self.rule()?);
            while self.eat("|") {
                if self.eat("->") {
                    default_action = Some(self.ident()?);
                    break;
                }
                rules.push(self.rule()?);
            }
        }
        Ok(PortDef {
            name,
            channel,
            side,
            rules,
            default_action,
        })
    }

    fn action(&mut self) -> PResult<ActionDef> {
        let initial = self.eat("+");
        let label = if self.is_ident_at(0) && self.is_at(1, ":") {
            let l = self.ident()?;
            self.expect(":")?;
            Some(l)
        } else {
            None
        };
        let mut body = vec![self.conjunction()?];
        while self.eat("|") {
            body.push(self.conjunction()?);
        }
        let (mut on_success, mut on_failure) = (None, None);
        if self.eat("->") {
            if self.eat("|") {
                on_failure = Some(self.ident()?);
            } else {
                on_success = Some(self.ident()?);
                if self.eat("|") {
                    on_failure = Some(self.ident()?);
                }
            }
        }
        Ok(ActionDef {
            initial,
            label,
            body,
            on_success,
            on_failure,
        })
    }

    fn conjunction(&mut self) -> PResult<Vec<Call>> {
        let mut calls = vec![self.call()?];
        while self.eat("&") {
            calls.push(self.call()?);
        }
        Ok(calls)
    }

    fn call(&mut self) -> PResult<Call> {
        let name = self.ident()?;
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.eat(")") {
            loop {
                let port = self.ident()?;
                let mode = if self.eat("?") {
                    Mode::Read
                } else if self.eat("!") {
                    Mode::Write
                } else {
                    return self.error(&["'?'", "'!'"]);
                };
                let message = self.ident()?;
                args.push(Arg {
                    port,
                    mode,
                    message,
                });
                if self.eat(")") {
                    break;
                }
                if !self.eat(",") {
                    return self.error(&["','", "')'"]);
                }
            }
        }
        Ok(Call { name, args })
    }
}

pub fn parse(tokens: &[Token]) -> Result<Scheme, SyntaxError> {
    let end = tokens
        .last()
        .map(|t| Position::new(t.pos.line, t.pos.column + t.text.chars().count()))
        .unwrap_or(Position::new(1, 1));
    Parser {
        tokens,
        at: 0,
        end,
    }
    .scheme()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::parse_text;

    #[test]
    fn request_response_link() {
        let s = parse_text("~Link = +BEGIN? Request -> PROCESSING; PROCESSING! Response -> BEGIN.")
            .unwrap();
        let ClassDef::Channel(c) = &s.classes[0] else {
            panic!()
        };
        assert_eq!(c.states.len(), 2);
        assert!(c.states[0].initial);
        assert_eq!(c.states[0].direction, Direction::Question);
        assert_eq!(c.states[1].direction, Direction::Answer);
        assert!(!c.states[1].initial);
        assert_eq!(c.states[1].rules[0].target, "BEGIN");
    }

    #[test]
    fn master_process() {
        let s = parse_text(
            "*Master = p1:Link ! Sin2 -> join; p2:Link ! Cos2 -> join; +fork(p1!ArgSin,p2!ArgCos); join(p1?Sin2,p2?Cos2).",
        )
        .unwrap();
        let ClassDef::Process(p) = &s.classes[0] else {
            panic!()
        };
        assert_eq!(p.ports.len(), 2);
        assert!(p.ports.iter().all(|p| p.side == Side::Client));
        assert_eq!(p.actions.len(), 2);
        assert!(p.actions[0].initial);
        assert_eq!(p.actions[0].id(), "fork");
        assert_eq!(p.actions[1].body[0][0].args[1].mode, Mode::Read);
    }

    #[test]
    fn conjunction_with_both_labels() {
        let s = parse_text("*P = a() & b() -> C|D.").unwrap();
        let ClassDef::Process(p) = &s.classes[0] else {
            panic!()
        };
        let a = &p.actions[0];
        assert_eq!(a.body.len(), 1);
        assert_eq!(a.body[0].len(), 2);
        assert_eq!(a.on_success.as_ref().unwrap(), "C");
        assert_eq!(a.on_failure.as_ref().unwrap(), "D");
    }

    #[test]
    fn precedence_and_over_or() {
        let s = parse_text("*P = a()&b()|c().").unwrap();
        let ClassDef::Process(p) = &s.classes[0] else {
            panic!()
        };
        let names: Vec<Vec<&str>> = p.actions[0]
            .body
            .iter()
            .map(|c| c.iter().map(|c| c.name.as_str()).collect())
            .collect();
        assert_eq!(names, vec![vec!["a", "b"], vec!["c"]]);
    }

    #[test]
    fn action_label_forms() {
        let s = parse_text("*P = x() -> |F; y() -> S; L:z().").unwrap();
        let ClassDef::Process(p) = &s.classes[0] else {
            panic!()
        };
        assert!(p.actions[0].on_success.is_none());
        assert_eq!(p.actions[0].on_failure.as_ref().unwrap(), "F");
        assert_eq!(p.actions[1].on_success.as_ref().unwrap(), "S");
        assert!(p.actions[1].on_failure.is_none());
        assert_eq!(p.actions[2].id(), "L");
    }

    #[test]
    fn port_forms() {
        let s = parse_text("~C. *P = a:C ? -> x; b:C ! m, n -> y | o -> z | -> w; x(); y(); z(); w().")
            .unwrap();
        let ClassDef::Process(p) = &s.classes[1] else {
            panic!()
        };
        assert_eq!(p.ports[0].default_action.as_ref().unwrap(), "x");
        assert!(p.ports[0].rules.is_empty());
        assert_eq!(p.ports[1].rules.len(), 2);
        assert_eq!(p.ports[1].rules[0].messages.len(), 2);
        assert_eq!(p.ports[1].default_action.as_ref().unwrap(), "w");
    }

    #[test]
    fn labeled_action_is_not_a_port() {
        let s = parse_text("~Link. *W = p : Link ? -> DO; DO:sin2(p?ArgSin,p!Sin2)->|cos2; cos2(p?ArgCos,p!Cos2).")
            .unwrap();
        let ClassDef::Process(p) = &s.classes[1] else {
            panic!()
        };
        assert_eq!(p.ports.len(), 1);
        assert_eq!(p.actions.len(), 2);
        assert_eq!(p.actions[0].label.as_ref().unwrap(), "DO");
    }

    #[test]
    fn errors_carry_position_and_expectations() {
        let e = parse_text("~Link = +BEGIN ? A -> ;").unwrap_err();
        assert_eq!(e.pos, Position::new(1, 23));
        assert_eq!(e.expected, vec!["identifier"]);

        let e = parse_text("*P = a()").unwrap_err();
        assert_eq!(e.found, "end of scheme");

        let e = parse_text("~C. *P = x(); p:C ?.").unwrap_err();
        assert_eq!(e.expected, vec!["action"]);

        assert!(parse_text("~C <>.").is_err());
        assert!(parse_text("foo").is_err());
        assert!(parse_text("*P = .").is_err());
    }
}
