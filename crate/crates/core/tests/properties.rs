use proptest::prelude::*;

use templet::scheme::{
    tokenize, ActionDef, Arg, Call, ChannelDef, ClassDef, Direction, Ident, Mode, PortDef,
    ProcessDef, Rule, Side, StateDef, TokenKind,
};
use templet::source::{render, scan, user_blocks, BlockKind, SignatureSet};
use templet::{parse_text, pretty_print, Scheme};

fn ident() -> impl Strategy<Value = Ident> {
    "[A-Za-z][A-Za-z0-9_-]{0,5}".prop_map(Ident::new)
}

fn idents(max: usize) -> impl Strategy<Value = Vec<Ident>> {
    prop::collection::vec(ident(), 0..=max)
}

fn rule() -> impl Strategy<Value = Rule> {
    (prop::collection::vec(ident(), 1..=2), ident())
        .prop_map(|(messages, target)| Rule { messages, target })
}

fn state() -> impl Strategy<Value = StateDef> {
    (
        ident(),
        any::<bool>(),
        prop_oneof![
            Just(Direction::Question),
            Just(Direction::Answer),
            Just(Direction::Unmarked)
        ],
        prop::collection::vec(rule(), 0..=2),
    )
        .prop_map(|(name, initial, direction, rules)| StateDef {
            name,
            initial,
            direction,
            rules: if direction == Direction::Unmarked {
                Vec::new()
            } else {
                rules
            },
        })
}

fn channel() -> impl Strategy<Value = ClassDef> {
    (ident(), idents(2), prop::collection::vec(state(), 0..=3)).prop_map(
        |(name, params, states)| {
            ClassDef::Channel(ChannelDef {
                name,
                params,
                states,
            })
        },
    )
}

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Server), Just(Side::Client)]
}

fn port() -> impl Strategy<Value = PortDef> {
    (
        ident(),
        ident(),
        side(),
        prop::collection::vec(rule(), 0..=2),
        prop::option::of(ident()),
    )
        .prop_map(|(name, channel, side, rules, default_action)| PortDef {
            name,
            channel,
            side,
            rules,
            default_action,
        })
}

fn call() -> impl Strategy<Value = Call> {
    let arg = (
        ident(),
        prop_oneof![Just(Mode::Read), Just(Mode::Write)],
        ident(),
    )
        .prop_map(|(port, mode, message)| Arg {
            port,
            mode,
            message,
        });
    (ident(), prop::collection::vec(arg, 0..=2)).prop_map(|(name, args)| Call { name, args })
}

fn action() -> impl Strategy<Value = ActionDef> {
    (
        any::<bool>(),
        prop::option::of(ident()),
        prop::collection::vec(prop::collection::vec(call(), 1..=2), 1..=2),
        prop::option::of(ident()),
        prop::option::of(ident()),
    )
        .prop_map(|(initial, label, body, on_success, on_failure)| ActionDef {
            initial,
            label,
            body,
            on_success,
            on_failure,
        })
}

fn process() -> impl Strategy<Value = ClassDef> {
    (
        ident(),
        idents(2),
        prop::collection::vec(port(), 0..=2),
        prop::collection::vec(action(), 0..=2),
    )
        .prop_map(|(name, params, ports, actions)| {
            ClassDef::Process(ProcessDef {
                name,
                params,
                ports,
                actions,
            })
        })
}

fn scheme() -> impl Strategy<Value = Scheme> {
    prop::collection::vec(prop_oneof![channel(), process()], 0..=4)
        .prop_map(|classes| Scheme { classes })
}

/// Base text that cannot open a block.
fn base_text() -> impl Strategy<Value = String> {
    "[a-su-z /*$\n{}();]{0,12}".prop_filter("no openers", |s| {
        !s.contains("/*templet*") && !s.contains("/*templet$")
    })
}

fn key() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[A-Za-z0-9_]{0,4}", 1..=3)
}

/// Block content that contains neither opener nor the closer of its kind.
fn content(closer: &'static str) -> impl Strategy<Value = String> {
    "[a-su-z *$/\n]{0,12}".prop_filter("hygienic", move |s| {
        !s.contains("/*templet") && !s.contains(closer)
    })
}

#[derive(Debug, Clone)]
enum Seg {
    Base(String),
    User(Vec<String>, String),
}

fn seg() -> impl Strategy<Value = Seg> {
    prop_oneof![
        base_text().prop_map(Seg::Base),
        (key(), content("/*end*/")).prop_map(|(k, c)| Seg::User(k, c)),
    ]
}

fn module() -> impl Strategy<Value = (String, usize)> {
    (
        prop::collection::vec(seg(), 0..5),
        content("*end*/"),
        prop::collection::vec(seg(), 0..5),
    )
        .prop_map(|(before, scheme, after)| {
            let mut text = String::new();
            let mut users = 0;
            let mut push = |s: &Seg, text: &mut String| match s {
                Seg::Base(b) => text.push_str(b),
                Seg::User(k, c) => {
                    users += 1;
                    text.push_str(&format!("/*templet${}*/{c}/*end*/", k.join("$")));
                }
            };
            for s in &before {
                push(s, &mut text);
            }
            text.push_str(&format!("/*templet*{scheme}*end*/"));
            for s in &after {
                push(s, &mut text);
            }
            (text, users)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn print_then_parse_is_identity(s in scheme()) {
        let printed = pretty_print(&s);
        let back = parse_text(&printed).map_err(|e| TestCaseError::fail(format!("{e}\n{printed}")))?;
        prop_assert_eq!(back, s);
    }

    #[test]
    fn well_formed_modules_round_trip((text, users) in module()) {
        let m = scan(&text, &SignatureSet::default()).unwrap();
        prop_assert_eq!(render(&m), text.clone());
        let mut at = 0;
        for b in &m.blocks {
            prop_assert_eq!(b.span.start, at);
            at = b.span.end;
        }
        prop_assert_eq!(at, text.len());
        let n_users = m.blocks.iter().filter(|b| b.kind == BlockKind::UserBlock).count();
        prop_assert_eq!(n_users, users);
        prop_assert_eq!(user_blocks(&m).values().map(Vec::len).sum::<usize>(), users);
        for b in &m.blocks {
            prop_assert!(!b.text.contains("/*templet*") && !b.text.contains("/*templet$"));
        }
    }

    #[test]
    fn scan_accepts_only_what_it_can_render(text in "(/\\*templet[*$]|\\*end\\*/|/\\*end\\*/|\\*/|[a-z$ ]){0,12}") {
        if let Ok(m) = scan(&text, &SignatureSet::default()) {
            prop_assert_eq!(render(&m), text);
        }
    }

    #[test]
    fn tokenizer_is_total_and_stable(text in "\\PC{0,40}") {
        let tokens = tokenize(&text);
        for t in &tokens {
            prop_assert!(!t.text.is_empty());
            if t.kind == TokenKind::Ident {
                prop_assert!(!t.text.chars().any(char::is_whitespace));
            }
        }
        let joined = tokens.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
        let again = tokenize(&joined);
        let a: Vec<_> = tokens.iter().map(|t| (t.kind, t.text.clone())).collect();
        let b: Vec<_> = again.iter().map(|t| (t.kind, t.text.clone())).collect();
        prop_assert_eq!(a, b);
    }
}
