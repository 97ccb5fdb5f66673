use proptest::prelude::*;

use templet::bundled::{trig_network, WorkerVariant};
use templet::runtime::{Engine, Event, HaltReason, Value};

const PING_PONG: &str = "
~Link = +BEGIN? Request -> PROCESSING; PROCESSING! Response -> BEGIN.
*Client = p:Link ! Response -> again; +start(p!Request); again(p?Response, p!Request).
*Server = p:Link ? Request -> serve; serve(p?Request, p!Response).
";

/// `pairs` independent client/server pairs, each doing `rounds` exchanges.
fn ping_pong(pairs: usize, rounds: u32) -> Engine {
    let mut e = Engine::from_scheme_text(PING_PONG).unwrap();
    for i in 0..pairs {
        let link = e.add_channel(&format!("link{i}"), "Link").unwrap();
        let c = e.add_process(&format!("c{i}"), "Client").unwrap();
        let s = e.add_process(&format!("s{i}"), "Server").unwrap();
        e.bind_client(link, c, "p").unwrap();
        e.bind_server(link, s, "p").unwrap();
        e.set_var(c, "sent", 0.0);
        e.register(c, "start", |ctx| {
            ctx.vars_mut().insert("sent".into(), 1.0.into());
            ctx.set("p", "Request", "n", 1.0)
        });
        e.register(c, "again", move |ctx| {
            let sent = ctx.vars()["sent"].as_f64().unwrap();
            if sent >= rounds as f64 {
                return false;
            }
            ctx.vars_mut().insert("sent".into(), (sent + 1.0).into());
            ctx.set("p", "Request", "n", sent + 1.0)
        });
        e.register(s, "serve", |ctx| {
            let n = ctx.number("p", "Request", "n").unwrap();
            ctx.set("p", "Response", "n", n * 10.0)
        });
    }
    e
}

fn variant() -> impl Strategy<Value = WorkerVariant> {
    prop::sample::select(WorkerVariant::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trig_runs_are_sound(seed in any::<u64>(), x in -10.0f64..10.0, v in variant()) {
        let mut net = trig_network(v, x);
        let t = net.engine.run(seed).unwrap();
        prop_assert_eq!(t.halt_reason(), Some(HaltReason::QueueEmpty));
        prop_assert_eq!(t.check_invariants(), Vec::<String>::new());
        prop_assert_eq!(net.engine.check_protocol(&t), Vec::<String>::new());
        prop_assert!((net.result().unwrap() - 1.0).abs() < 1e-12);
        prop_assert_eq!(t.count_sends(), 4);

        let mut again = trig_network(v, x);
        prop_assert_eq!(again.engine.run(seed).unwrap().to_text(), t.to_text());
    }

    #[test]
    fn ping_pong_accounting(seed in any::<u64>(), pairs in 1usize..4, rounds in 1u32..6) {
        let mut e = ping_pong(pairs, rounds);
        let t = e.run(seed).unwrap();
        prop_assert_eq!(t.halt_reason(), Some(HaltReason::QueueEmpty));
        prop_assert_eq!(t.check_invariants(), Vec::<String>::new());
        prop_assert_eq!(e.check_protocol(&t), Vec::<String>::new());
        prop_assert_eq!(t.count_sends(), pairs * 2 * rounds as usize);
        prop_assert_eq!(t.count_delivers(), t.count_sends());
        for i in 0..pairs {
            let c = e.process_id(&format!("c{i}")).unwrap();
            prop_assert_eq!(&e.vars(c)["sent"], &Value::Number(rounds as f64));
            let link = e.channel_id(&format!("link{i}")).unwrap();
            prop_assert_eq!(e.channel(link).state.as_deref(), Some("BEGIN"));
        }
        // every send is immediately preceded by a successful call or a send
        for w in t.events.windows(2) {
            if matches!(w[1], Event::Send { .. }) {
                let ok = matches!(w[0], Event::Call { result: true, .. } | Event::Send { .. });
                prop_assert!(ok);
            }
        }
    }

    #[test]
    fn trace_json_round_trips(seed in any::<u64>()) {
        let mut net = trig_network(WorkerVariant::Chained, 0.25);
        let t = net.engine.run(seed).unwrap();
        let back = templet::Trace::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(back, t);
    }
}
