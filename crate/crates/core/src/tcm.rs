//! Two-counter machines and their encoding as pairs of indexed types that
//! are equal exactly when the machine does not halt.
//!
//! ```text
//! TEST c1 ZERO 2 DEC 1
//! HALT
//! ```

use std::fmt;
use std::str::FromStr;

use crate::ast::{ArithExpr, ArithProp, EqDecl, Instance, Name, SessionType, Signature, TypeDef};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Counter {
    C1,
    C2,
}

impl Counter {
    fn index(self) -> usize {
        match self {
            Counter::C1 => 1,
            Counter::C2 => 2,
        }
    }
}

/// Jump targets are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instruction {
    Inc {
        counter: Counter,
        goto: usize,
    },
    Test {
        counter: Counter,
        zero: usize,
        dec: usize,
    },
    Halt,
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Inc { counter, goto } => write!(f, "INC c{} GOTO {goto}", counter.index()),
            Instruction::Test { counter, zero, dec } => {
                write!(f, "TEST c{} ZERO {zero} DEC {dec}", counter.index())
            }
            Instruction::Halt => f.write_str("HALT"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("machine has no instructions")]
    Empty,
    #[error("instruction {at} jumps to {target}, outside 1..{len}")]
    Target {
        at: usize,
        target: usize,
        len: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Machine {
    instrs: Vec<Instruction>,
}

impl Machine {
    pub fn new(instrs: Vec<Instruction>) -> Result<Self, MachineError> {
        if instrs.is_empty() {
            return Err(MachineError::Empty);
        }
        let len = instrs.len();
        for (i, ins) in instrs.iter().enumerate() {
            let targets = match *ins {
                Instruction::Inc { goto, .. } => vec![goto],
                Instruction::Test { zero, dec, .. } => vec![zero, dec],
                Instruction::Halt => Vec::new(),
            };
            if let Some(&t) = targets.iter().find(|&&t| t == 0 || t > len) {
                return Err(MachineError::Target {
                    at: i + 1,
                    target: t,
                    len,
                });
            }
        }
        Ok(Machine { instrs })
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instrs
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn has_halt(&self) -> bool {
        self.instrs.contains(&Instruction::Halt)
    }
}

impl fmt::Display for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.instrs {
            writeln!(f, "{i}")?;
        }
        Ok(())
    }
}

impl FromStr for Machine {
    type Err = MachineError;

    /// One instruction per line; blank lines and `#` comments are skipped.
    fn from_str(s: &str) -> Result<Self, MachineError> {
        let mut instrs = Vec::new();
        for (n, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| MachineError::Parse {
                line: n + 1,
                message: message.to_string(),
            };
            let words: Vec<String> = line
                .split_whitespace()
                .map(|w| w.to_ascii_uppercase())
                .collect();
            let counter = |w: &str| match w {
                "C1" => Ok(Counter::C1),
                "C2" => Ok(Counter::C2),
                _ => Err(err("expected c1 or c2")),
            };
            let target = |w: &str| {
                w.parse::<usize>()
                    .map_err(|_| err("expected an instruction number"))
            };
            let words: Vec<&str> = words.iter().map(String::as_str).collect();
            let ins = match words.as_slice() {
                ["HALT"] => Instruction::Halt,
                ["INC", c, "GOTO", k] => Instruction::Inc {
                    counter: counter(c)?,
                    goto: target(k)?,
                },
                ["TEST", c, "ZERO", k, "DEC", l] => Instruction::Test {
                    counter: counter(c)?,
                    zero: target(k)?,
                    dec: target(l)?,
                },
                _ => return Err(err("expected INC cJ GOTO k, TEST cJ ZERO k DEC l, or HALT")),
            };
            instrs.push(ins);
        }
        Machine::new(instrs)
    }
}

/// `(i, c₁, c₂)` with a 1-based instruction index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub pc: usize,
    pub c1: u64,
    pub c2: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepResult {
    Next(Config),
    Halted,
}

pub fn step(m: &Machine, c: Config) -> StepResult {
    let get = |j: Counter| if j == Counter::C1 { c.c1 } else { c.c2 };
    let set = |j: Counter, v: u64, pc: usize| match j {
        Counter::C1 => Config { pc, c1: v, ..c },
        Counter::C2 => Config { pc, c2: v, ..c },
    };
    match m.instrs[c.pc - 1] {
        Instruction::Halt => StepResult::Halted,
        Instruction::Inc { counter, goto } => {
            StepResult::Next(set(counter, get(counter) + 1, goto))
        }
        Instruction::Test { counter, zero, dec } => {
            let v = get(counter);
            if v == 0 {
                StepResult::Next(Config { pc: zero, ..c })
            } else {
                StepResult::Next(set(counter, v - 1, dec))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunResult {
    /// The configuration after this many steps is at a `HALT`.
    HaltedAt(u64),
    StillRunning,
}

pub fn run(m: &Machine, c1: u64, c2: u64, max_steps: u64) -> RunResult {
    let mut c = Config { pc: 1, c1, c2 };
    for k in 0..=max_steps {
        match step(m, c) {
            StepResult::Halted => return RunResult::HaltedAt(k),
            StepResult::Next(next) => c = next,
        }
    }
    RunResult::StillRunning
}

/// The encoded signature and its two root names.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub signature: Signature,
    pub left: Name,
    pub right: Name,
}

impl Encoding {
    /// `T1[c₁][c₂]` and `T1'[c₁][c₂]` at the given initial counters.
    pub fn ground_roots(&self, c1: u64, c2: u64) -> (Instance, Instance) {
        let args = vec![ArithExpr::int(c1 as i64), ArithExpr::int(c2 as i64)];
        (
            Instance::new(&self.left, args.clone()),
            Instance::new(&self.right, args),
        )
    }

    /// The roots over variables `c1`, `c2`.
    pub fn open_roots(&self) -> (Vec<Name>, Instance, Instance) {
        let args = vec![ArithExpr::var("c1"), ArithExpr::var("c2")];
        (
            vec!["c1".to_string(), "c2".to_string()],
            Instance::new(&self.left, args.clone()),
            Instance::new(&self.right, args),
        )
    }

    /// The open root equation as a declaration.
    pub fn root_decl(&self) -> EqDecl {
        let (vars, lhs, rhs) = self.open_roots();
        EqDecl {
            vars,
            constraint: ArithProp::True,
            lhs,
            rhs,
        }
    }
}

/// Builds `T1..Tm`, `T1'..Tm'`, `Tinf`, `Tinf'`. The two families differ
/// only below a `HALT`, which becomes `+{l: Tinf}` on one side and
/// `+{l': Tinf'}` on the other. With `isorec`, every body is wrapped in
/// `+{unfold: ...}`.
pub fn encode(m: &Machine, isorec: bool) -> Encoding {
    let c1 = ArithExpr::var("c1");
    let c2 = ArithExpr::var("c2");
    let wrap = |body: SessionType| {
        if isorec {
            SessionType::plus(vec![("unfold", body)])
        } else {
            body
        }
    };
    let mut defs = Vec::new();
    for primed in [false, true] {
        let suffix = if primed { "'" } else { "" };
        let call = |k: usize, a: ArithExpr, b: ArithExpr| {
            SessionType::var(&format!("T{k}{suffix}"), vec![a, b])
        };
        let counters = |j: Counter, delta: i64| -> (ArithExpr, ArithExpr) {
            let bump = |e: &ArithExpr| {
                if delta > 0 {
                    e.clone() + ArithExpr::int(delta)
                } else {
                    e.clone() - ArithExpr::int(-delta)
                }
            };
            match j {
                Counter::C1 => (bump(&c1), c2.clone()),
                Counter::C2 => (c1.clone(), bump(&c2)),
            }
        };
        for (i, ins) in m.instrs.iter().enumerate() {
            let body = match *ins {
                Instruction::Inc { counter, goto } => {
                    let (a, b) = counters(counter, 1);
                    SessionType::plus(vec![(&format!("inc{}", counter.index()), call(goto, a, b))])
                }
                Instruction::Test { counter, zero, dec } => {
                    let cj = if counter == Counter::C1 {
                        c1.clone()
                    } else {
                        c2.clone()
                    };
                    let (a, b) = counters(counter, -1);
                    let j = counter.index();
                    SessionType::plus(vec![
                        (
                            &format!("zero{j}"),
                            SessionType::assert(
                                ArithProp::eq(cj.clone(), ArithExpr::int(0)),
                                call(zero, c1.clone(), c2.clone()),
                            ),
                        ),
                        (
                            &format!("dec{j}"),
                            SessionType::assert(
                                ArithProp::gt(cj, ArithExpr::int(0)),
                                call(dec, a, b),
                            ),
                        ),
                    ])
                }
                Instruction::Halt => SessionType::plus(vec![(
                    &format!("l{suffix}"),
                    SessionType::var(&format!("Tinf{suffix}"), vec![]),
                )]),
            };
            defs.push(TypeDef::new(
                &format!("T{}{suffix}", i + 1),
                &["c1", "c2"],
                ArithProp::True,
                wrap(body),
            ));
        }
    }
    for suffix in ["", "'"] {
        let body = SessionType::plus(vec![(
            &format!("l{suffix}"),
            SessionType::var(&format!("Tinf{suffix}"), vec![]),
        )]);
        defs.push(TypeDef::new(
            &format!("Tinf{suffix}"),
            &[],
            ArithProp::True,
            wrap(body),
        ));
    }
    Encoding {
        signature: Signature::new(defs, Vec::new()),
        left: "T1".into(),
        right: "T1'".into(),
    }
}
