//! The trigonometric-identity example shipped with the library: scheme
//! texts, a ready-wired network with callbacks, and sample module files.

use crate::runtime::{ChannelId, Engine, EngineError, ProcessId};

pub const LINK: &str = "~Link = +BEGIN ? ArgCos -> CALCCOS | ArgSin -> CALCSIN;
        CALCCOS ! Cos2 -> END; CALCSIN ! Sin2 -> END.";

pub const REQUEST_RESPONSE_LINK: &str = "~Link = +BEGIN? Request -> PROCESSING;
        PROCESSING! Response -> BEGIN.";

pub const MASTER: &str = "*Master =
    p1:Link ! Sin2 -> join; p2:Link ! Cos2 -> join;
    +fork(p1!ArgSin,p2!ArgCos); join(p1?Sin2,p2?Cos2) .";

/// Worker dispatching by port rules.
pub const WORKER_RULES: &str = "*Worker =
    p : Link ? ArgSin -> sin2 | ArgCos -> cos2;
    sin2(p?ArgSin,p!Sin2); cos2(p?ArgCos,p!Cos2) .";

/// Worker with an explicit failure chain.
pub const WORKER_CHAINED: &str = "*Worker =
    p : Link ? -> DO;
    DO:sin2(p?ArgSin,p!Sin2)->|cos2; cos2(p?ArgCos,p!Cos2) .";

/// Worker with both calls grouped in one action.
pub const WORKER_GROUPED: &str = "*Worker =
    p : Link ? -> DO;
    DO:sin2(p?ArgSin,p!Sin2) |cos2(p?ArgCos,p!Cos2) .";

/// Link, Master and the rule-based Worker.
pub const TRIG_SCHEME: &str = "~Link = +BEGIN ? ArgCos -> CALCCOS | ArgSin -> CALCSIN;
        CALCCOS ! Cos2 -> END; CALCSIN ! Sin2 -> END.

*Master =
    p1:Link ! Sin2 -> join; p2:Link ! Cos2 -> join;
    +fork(p1!ArgSin,p2!ArgCos); join(p1?Sin2,p2?Cos2) .

*Worker =
    p : Link ? ArgSin -> sin2 | ArgCos -> cos2;
    sin2(p?ArgSin,p!Sin2); cos2(p?ArgCos,p!Cos2) .
";

pub const HELLO_MODULE: &str = "#include <runtime.h>\n\n/*templet$$include*/\n#include <iostream>\n/*end*/\n\n/*templet*\n *hello<function>.\n*end*/\n\nvoid hello(){\n/*templet$hello$*/\nstd::cout << \"hello world!!!\";\n/*end*/\n}\n";

/// Unmapped module holding the trig scheme.
pub fn trig_module() -> String {
    WorkerVariant::Rules.module()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WorkerVariant {
    Rules,
    Chained,
    Grouped,
}

impl WorkerVariant {
    pub const ALL: [WorkerVariant; 3] = [
        WorkerVariant::Rules,
        WorkerVariant::Chained,
        WorkerVariant::Grouped,
    ];

    pub fn worker_text(self) -> &'static str {
        match self {
            WorkerVariant::Rules => WORKER_RULES,
            WorkerVariant::Chained => WORKER_CHAINED,
            WorkerVariant::Grouped => WORKER_GROUPED,
        }
    }

    /// Full scheme text with this Worker.
    pub fn scheme(self) -> String {
        TRIG_SCHEME.replace(WORKER_RULES, self.worker_text())
    }

    /// Unmapped module holding the scheme with this Worker.
    pub fn module(self) -> String {
        format!(
            "#include <runtime.h>\n#include <cmath>\n\n/*templet*\n{}*end*/\n",
            self.scheme()
        )
    }

    /// Name used by the command line.
    pub fn example_name(self) -> &'static str {
        match self {
            WorkerVariant::Rules => "trig",
            WorkerVariant::Chained => "trig-chain",
            WorkerVariant::Grouped => "trig-grouped",
        }
    }

    pub fn from_example_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.example_name() == name)
    }
}

/// Master variable holding the input.
pub const INPUT_VAR: &str = "x";
/// Master variable receiving the result.
pub const RESULT_VAR: &str = "sin2x_plus_cos2x";

pub struct TrigNetwork {
    pub engine: Engine,
    pub master: ProcessId,
    pub workers: [ProcessId; 2],
    pub links: [ChannelId; 2],
}

impl TrigNetwork {
    pub fn result(&self) -> Option<f64> {
        self.engine.vars(self.master).get(RESULT_VAR)?.as_f64()
    }
}

/// The network `link1, link2, m, w1, w2` for a Worker variant, input `x`.
pub fn trig_network(variant: WorkerVariant, x: f64) -> TrigNetwork {
    trig_network_from(&variant.scheme(), x).expect("bundled scheme is valid")
}

/// Same wiring and callbacks over arbitrary scheme text that declares the
/// Link, Master and Worker classes.
pub fn trig_network_from(scheme: &str, x: f64) -> Result<TrigNetwork, EngineError> {
    let mut e = Engine::from_scheme_text(scheme)?;
    let link1 = e.add_channel("link1", "Link")?;
    let link2 = e.add_channel("link2", "Link")?;
    let m = e.add_process("m", "Master")?;
    let w1 = e.add_process("w1", "Worker")?;
    let w2 = e.add_process("w2", "Worker")?;

    e.bind_client(link1, m, "p1")?;
    e.bind_client(link2, m, "p2")?;
    e.bind_server(link1, w1, "p")?;
    e.bind_server(link2, w2, "p")?;

    e.set_var(m, INPUT_VAR, x);
    e.register(m, "fork", |ctx| {
        let Some(x) = ctx.vars().get(INPUT_VAR).and_then(|v| v.as_f64()) else {
            return false;
        };
        ctx.set("p1", "ArgSin", "x", x) && ctx.set("p2", "ArgCos", "x", x)
    });
    e.register(m, "join", |ctx| {
        let (Some(s), Some(c)) = (
            ctx.number("p1", "Sin2", "value"),
            ctx.number("p2", "Cos2", "value"),
        ) else {
            return false;
        };
        ctx.vars_mut().insert(RESULT_VAR.into(), (s + c).into());
        true
    });
    for w in [w1, w2] {
        e.register(w, "sin2", |ctx| match ctx.number("p", "ArgSin", "x") {
            Some(x) => ctx.set("p", "Sin2", "value", x.sin().powi(2)),
            None => false,
        });
        e.register(w, "cos2", |ctx| match ctx.number("p", "ArgCos", "x") {
            Some(x) => ctx.set("p", "Cos2", "value", x.cos().powi(2)),
            None => false,
        });
    }

    Ok(TrigNetwork {
        engine: e,
        master: m,
        workers: [w1, w2],
        links: [link1, link2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::HaltReason;

    #[test]
    fn scheme_contains_parts() {
        assert!(TRIG_SCHEME.contains(LINK));
        assert!(TRIG_SCHEME.contains(MASTER));
        assert!(TRIG_SCHEME.contains(WORKER_RULES));
        assert!(WorkerVariant::Grouped.scheme().contains("DO:sin2(p?ArgSin,p!Sin2) |cos2"));
    }

    #[test]
    fn identity_holds() {
        for v in WorkerVariant::ALL {
            let mut net = trig_network(v, 0.5);
            let t = net.engine.run(7).unwrap();
            assert_eq!(t.halt_reason(), Some(HaltReason::QueueEmpty), "{}", t.to_text());
            assert!((net.result().unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
