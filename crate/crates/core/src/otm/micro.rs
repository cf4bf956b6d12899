//! The micro machine: a transition-table ordinal Turing machine with
//! liminf limit rules.
//!
//! Tapes: a read-only oracle and a read-only parameter track, each with its
//! own head, plus a work tape and an output tape. Only 1-cells are stored.
//! Limit stages are reached by detecting a period whose repetition is
//! forced, then applying the liminf rules to the repeating segment.

use std::collections::HashMap;
use std::fmt;

use super::{AsmError, RunResult};
use crate::ordinal::{ord_add, Ordinal};
use crate::ordset::OrdSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    L,
    R,
    S,
}

/// What to write: a fixed bit or leave the cell unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Write {
    Keep,
    Bit(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub write_work: Write,
    pub write_output: Write,
    pub move_work: Move,
    pub move_oracle: Move,
    pub move_param: Move,
    pub move_output: Move,
    pub next: usize,
}

/// A rule as written; `None` in a pattern position matches either bit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub state: usize,
    /// oracle, param, work, output
    pub pattern: [Option<bool>; 4],
    pub action: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MicroProgram {
    pub states: Vec<String>,
    pub start: usize,
    pub halt: usize,
    pub rules: Vec<Rule>,
    table: Vec<[Action; 16]>,
}

fn key(o: bool, p: bool, w: bool, out: bool) -> usize {
    (o as usize) << 3 | (p as usize) << 2 | (w as usize) << 1 | out as usize
}

impl MicroProgram {
    /// Builds the transition table; the first matching rule wins. Fails if
    /// some non-halt state lacks a transition for some read combination.
    pub fn new(
        states: Vec<String>,
        start: usize,
        halt: usize,
        rules: Vec<Rule>,
    ) -> Result<Self, String> {
        let n = states.len();
        if start >= n || halt >= n {
            return Err("start or halt state out of range".into());
        }
        let mut table: Vec<[Option<Action>; 16]> = vec![[None; 16]; n];
        for r in &rules {
            if r.state == halt {
                return Err(format!("halt state `{}` has a transition", states[halt]));
            }
            if r.state >= n || r.action.next >= n {
                return Err("state index out of range".into());
            }
            #[allow(clippy::needless_range_loop)]
            for k in 0..16usize {
                let bits = [k & 8 != 0, k & 4 != 0, k & 2 != 0, k & 1 != 0];
                let hit = r
                    .pattern
                    .iter()
                    .zip(bits)
                    .all(|(p, b)| p.is_none_or(|p| p == b));
                if hit && table[r.state][k].is_none() {
                    table[r.state][k] = Some(r.action);
                }
            }
        }
        let mut out = Vec::with_capacity(n);
        for (s, row) in table.iter().enumerate() {
            if s == halt {
                let stay = Action {
                    write_work: Write::Keep,
                    write_output: Write::Keep,
                    move_work: Move::S,
                    move_oracle: Move::S,
                    move_param: Move::S,
                    move_output: Move::S,
                    next: halt,
                };
                out.push([stay; 16]);
                continue;
            }
            let mut full = [unreachable_action(); 16];
            for k in 0..16 {
                full[k] = row[k].ok_or_else(|| {
                    format!(
                        "state `{}` has no transition for reads {:04b}",
                        states[s], k
                    )
                })?;
            }
            out.push(full);
        }
        Ok(MicroProgram {
            states,
            start,
            halt,
            rules,
            table: out,
        })
    }

    pub fn action(&self, state: usize, o: bool, p: bool, w: bool, out: bool) -> Action {
        self.table[state][key(o, p, w, out)]
    }
}

fn unreachable_action() -> Action {
    Action {
        write_work: Write::Keep,
        write_output: Write::Keep,
        move_work: Move::S,
        move_oracle: Move::S,
        move_param: Move::S,
        move_output: Move::S,
        next: 0,
    }
}

/// Head order in [`Config::heads`].
pub const WORK: usize = 0;
pub const ORACLE: usize = 1;
pub const PARAM: usize = 2;
pub const OUTPUT: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub time: Ordinal,
    pub state: usize,
    /// work, oracle, param, output
    pub heads: [Ordinal; 4],
    pub work: OrdSet,
    pub output: OrdSet,
}

impl Config {
    pub fn initial(p: &MicroProgram) -> Self {
        Config {
            time: Ordinal::ZERO,
            state: p.start,
            heads: Default::default(),
            work: OrdSet::new(),
            output: OrdSet::new(),
        }
    }
}

fn shift(pos: &Ordinal, m: Move) -> Ordinal {
    match m {
        Move::S => pos.clone(),
        Move::R => pos.succ(),
        // No immediate predecessor at 0 or at a limit: back to the start.
        Move::L => pos.pred().unwrap_or(Ordinal::ZERO),
    }
}

fn write(tape: &mut OrdSet, pos: &Ordinal, w: Write) -> bool {
    match w {
        Write::Keep => false,
        Write::Bit(true) => tape.insert(pos.clone()),
        Write::Bit(false) => {
            tape.remove(pos);
            false
        }
    }
}

/// One successor step. Returns whether a 0 cell became 1.
pub fn micro_step_counted(
    p: &MicroProgram,
    c: &mut Config,
    oracle: &OrdSet,
    param: &OrdSet,
) -> bool {
    let o = oracle.contains(&c.heads[ORACLE]);
    let q = param.contains(&c.heads[PARAM]);
    let w = c.work.contains(&c.heads[WORK]);
    let out = c.output.contains(&c.heads[OUTPUT]);
    let a = p.action(c.state, o, q, w, out);
    let mut fresh = write(&mut c.work, &c.heads[WORK].clone(), a.write_work);
    fresh |= write(&mut c.output, &c.heads[OUTPUT].clone(), a.write_output);
    c.heads[WORK] = shift(&c.heads[WORK], a.move_work);
    c.heads[ORACLE] = shift(&c.heads[ORACLE], a.move_oracle);
    c.heads[PARAM] = shift(&c.heads[PARAM], a.move_param);
    c.heads[OUTPUT] = shift(&c.heads[OUTPUT], a.move_output);
    c.state = a.next;
    c.time = c.time.succ();
    fresh
}

pub fn micro_step(p: &MicroProgram, c: &Config, oracle: &OrdSet, param: &OrdSet) -> Config {
    let mut next = c.clone();
    micro_step_counted(p, &mut next, oracle, param);
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MicroLimits {
    pub fuel: u64,
    pub max_omega_jumps: u32,
    /// How far back the period detector looks.
    pub window: usize,
}

impl MicroLimits {
    pub fn finite(fuel: u64) -> Self {
        MicroLimits {
            fuel,
            max_omega_jumps: 0,
            window: 0,
        }
    }

    pub fn with_jumps(fuel: u64, jumps: u32) -> Self {
        MicroLimits {
            fuel,
            max_omega_jumps: jumps,
            window: 4096,
        }
    }
}

/// The block `[mu, mu + omega)` containing `pos`, as `mu`.
fn block(pos: &Ordinal) -> Ordinal {
    pos.split_limit().0
}

fn next_limit(pos: &Ordinal) -> Ordinal {
    ord_add(&block(pos), &Ordinal::omega())
}

/// No 1-cell at or beyond `pos` within its omega-block.
fn blank_from(tape: &OrdSet, pos: &Ordinal) -> bool {
    let end = next_limit(pos);
    !tape.iter().any(|x| x >= pos && *x < end)
}

/// A detected repeating segment `trace[start..=end]` (end exclusive of the
/// repeat point) and the configuration the liminf rules assign to the limit.
pub struct Period {
    pub start: usize,
    pub end: usize,
    pub limit: Config,
}

/// Looks for an earlier configuration in `trace` from which the last one
/// follows by a forced repetition. All entries share the same limit part of
/// time.
pub fn find_period(trace: &[Config], oracle: &OrdSet, param: &OrdSet) -> Option<Period> {
    let last = trace.last()?;
    let t2 = trace.len() - 1;
    for t1 in (0..t2).rev() {
        let a = &trace[t1];
        if a.state != last.state || a.work != last.work || a.output != last.output {
            continue;
        }
        let mut moving = [false; 4];
        let mut ok = true;
        #[allow(clippy::needless_range_loop)]
        for h in 0..4 {
            let (la, na) = a.heads[h].split_limit();
            let (lb, nb) = last.heads[h].split_limit();
            if la != lb || nb < na {
                ok = false;
                break;
            }
            moving[h] = nb > na;
        }
        if !ok {
            continue;
        }
        // Moving heads must sit in blank territory and never fall back.
        let tapes: [&OrdSet; 4] = [&a.work, oracle, param, &a.output];
        for h in 0..4 {
            if !moving[h] {
                continue;
            }
            if !blank_from(tapes[h], &a.heads[h])
                || trace[t1..=t2].iter().any(|c| c.heads[h] < a.heads[h])
            {
                ok = false;
                break;
            }
        }
        // Stationary heads must not wander below a limit they started above
        // (a reset could not be undone within the segment anyway).
        if !ok {
            continue;
        }
        let seg = &trace[t1..t2];
        let state = seg.iter().map(|c| c.state).min().expect("nonempty");
        let mut heads: [Ordinal; 4] = Default::default();
        for h in 0..4 {
            heads[h] = if moving[h] {
                next_limit(&a.heads[h])
            } else {
                seg.iter()
                    .map(|c| c.heads[h].clone())
                    .min()
                    .expect("nonempty")
            };
        }
        let keep = |pick: fn(&Config) -> &OrdSet| -> OrdSet {
            pick(&seg[0])
                .iter()
                .filter(|x| seg.iter().all(|c| pick(c).contains(x)))
                .cloned()
                .collect()
        };
        let limit = Config {
            time: next_limit(&last.time),
            state,
            heads,
            work: keep(|c| &c.work),
            output: keep(|c| &c.output),
        };
        return Some(Period {
            start: t1,
            end: t2,
            limit,
        });
    }
    None
}

/// Runs without limit stages.
pub fn micro_run(p: &MicroProgram, oracle: &OrdSet, param: &OrdSet, fuel: u64) -> RunResult {
    micro_run_with(p, oracle, param, MicroLimits::finite(fuel))
}

pub fn micro_run_with(
    p: &MicroProgram,
    oracle: &OrdSet,
    param: &OrdSet,
    limits: MicroLimits,
) -> RunResult {
    micro_run_traced(p, oracle, param, limits, |_| {}).0
}

/// Runs and reports every limit stage taken through `on_limit`, which sees
/// the segment the jump was based on and the resulting configuration.
pub fn micro_run_traced(
    p: &MicroProgram,
    oracle: &OrdSet,
    param: &OrdSet,
    limits: MicroLimits,
    mut on_limit: impl FnMut(&[Config]),
) -> (RunResult, Config) {
    let mut c = Config::initial(p);
    let mut steps = 0u64;
    let mut jumps = 0u32;
    let mut trace: Vec<Config> = Vec::new();
    let mut by_state: HashMap<usize, usize> = HashMap::new();
    loop {
        if c.state == p.halt {
            let output_bit = c.output.contains(&Ordinal::ZERO);
            return (
                RunResult::Halted {
                    output_bit,
                    output_set: c.output.clone(),
                    steps,
                },
                c,
            );
        }
        if jumps < limits.max_omega_jumps {
            trace.push(c.clone());
            if trace.len() > limits.window.max(2) * 2 {
                trace.drain(..limits.window);
                by_state.clear();
            }
            let seen_before = by_state.insert(c.state, trace.len() - 1).is_some();
            if seen_before {
                let lo = trace.len().saturating_sub(limits.window.max(2));
                if let Some(per) = find_period(&trace[lo..], oracle, param) {
                    let mut seg = trace[lo + per.start..=lo + per.end].to_vec();
                    seg.push(per.limit.clone());
                    on_limit(&seg);
                    c = per.limit;
                    jumps += 1;
                    trace.clear();
                    by_state.clear();
                    continue;
                }
            }
        }
        if steps >= limits.fuel {
            let r = if limits.max_omega_jumps > 0 {
                RunResult::LimitUndetermined { steps }
            } else {
                RunResult::FuelExhausted { steps }
            };
            return (r, c);
        }
        micro_step_counted(p, &mut c, oracle, param);
        steps += 1;
    }
}

// ---------------------------------------------------------------------------
// Text form
//
//   micro
//   states chk cmp init halt
//   start init
//   halt halt
//   # state o p w out : write_w write_out move_w move_o move_p move_out next
//   chk * * 1 * : 0 = S S S S cmp

fn parse_bit_pat(t: &str) -> Option<Option<bool>> {
    match t {
        "0" => Some(Some(false)),
        "1" => Some(Some(true)),
        "*" => Some(None),
        _ => None,
    }
}

fn parse_write(t: &str) -> Option<Write> {
    match t {
        "0" => Some(Write::Bit(false)),
        "1" => Some(Write::Bit(true)),
        "=" => Some(Write::Keep),
        _ => None,
    }
}

fn parse_move(t: &str) -> Option<Move> {
    match t {
        "L" => Some(Move::L),
        "R" => Some(Move::R),
        "S" => Some(Move::S),
        _ => None,
    }
}

pub fn assemble_micro(text: &str) -> Result<MicroProgram, AsmError> {
    let mut states: Vec<String> = Vec::new();
    let mut start = None;
    let mut halt = None;
    let mut raw: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut seen_header = false;
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let err = |col: usize, msg: String| AsmError {
            line: line_no,
            token: col,
            msg,
        };
        if !seen_header {
            if toks != ["micro"] {
                return Err(err(1, "expected `micro` header".into()));
            }
            seen_header = true;
            continue;
        }
        match toks[0] {
            "states" => states = toks[1..].iter().map(|s| s.to_string()).collect(),
            "start" | "halt" => {
                let name = toks
                    .get(1)
                    .ok_or_else(|| err(2, "missing state name".into()))?;
                let i = states
                    .iter()
                    .position(|s| s == name)
                    .ok_or_else(|| err(2, format!("unknown state `{name}`")))?;
                if toks[0] == "start" {
                    start = Some(i);
                } else {
                    halt = Some(i);
                }
            }
            _ => raw.push((line_no, toks)),
        }
    }
    let idx = |name: &str| states.iter().position(|s| s == name);
    let mut rules = Vec::new();
    for (line, toks) in raw {
        let err = |col: usize, msg: &str| AsmError {
            line,
            token: col,
            msg: msg.to_string(),
        };
        if toks.len() != 13 || toks[5] != ":" {
            return Err(err(
                1,
                "rule needs `state o p w out : ww wo mw mo mp mout next`",
            ));
        }
        let state = idx(toks[0]).ok_or_else(|| err(1, "unknown state"))?;
        let mut pattern = [None; 4];
        for k in 0..4 {
            pattern[k] =
                parse_bit_pat(toks[1 + k]).ok_or_else(|| err(2 + k, "expected 0, 1 or *"))?;
        }
        let ww = parse_write(toks[6]).ok_or_else(|| err(7, "expected 0, 1 or ="))?;
        let wo = parse_write(toks[7]).ok_or_else(|| err(8, "expected 0, 1 or ="))?;
        let mut mv = [Move::S; 4];
        for k in 0..4 {
            mv[k] = parse_move(toks[8 + k]).ok_or_else(|| err(9 + k, "expected L, R or S"))?;
        }
        let next = idx(toks[12]).ok_or_else(|| err(13, "unknown state"))?;
        rules.push(Rule {
            state,
            pattern,
            action: Action {
                write_work: ww,
                write_output: wo,
                move_work: mv[0],
                move_oracle: mv[1],
                move_param: mv[2],
                move_output: mv[3],
                next,
            },
        });
    }
    let start = start.ok_or(AsmError {
        line: 0,
        token: 0,
        msg: "missing `start`".into(),
    })?;
    let halt = halt.ok_or(AsmError {
        line: 0,
        token: 0,
        msg: "missing `halt`".into(),
    })?;
    MicroProgram::new(states, start, halt, rules).map_err(|msg| AsmError {
        line: 0,
        token: 0,
        msg,
    })
}

impl fmt::Display for MicroProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "micro")?;
        writeln!(f, "states {}", self.states.join(" "))?;
        writeln!(f, "start {}", self.states[self.start])?;
        writeln!(f, "halt {}", self.states[self.halt])?;
        let bit = |b: Option<bool>| match b {
            None => "*",
            Some(true) => "1",
            Some(false) => "0",
        };
        let w = |w: Write| match w {
            Write::Keep => "=",
            Write::Bit(true) => "1",
            Write::Bit(false) => "0",
        };
        let m = |m: Move| match m {
            Move::L => "L",
            Move::R => "R",
            Move::S => "S",
        };
        for r in &self.rules {
            let a = &r.action;
            writeln!(
                f,
                "{} {} {} {} {} : {} {} {} {} {} {} {}",
                self.states[r.state],
                bit(r.pattern[0]),
                bit(r.pattern[1]),
                bit(r.pattern[2]),
                bit(r.pattern[3]),
                w(a.write_work),
                w(a.write_output),
                m(a.move_work),
                m(a.move_oracle),
                m(a.move_param),
                m(a.move_output),
                self.states[a.next]
            )?;
        }
        Ok(())
    }
}

/// Accepts exactly when the oracle agrees with the parameter at every
/// finite position. Work cell 0 is a flag raised after each successful
/// comparison and lowered before the next; at the first limit it reads 0
/// (liminf of a flickering cell), and the liminf state is `chk`, the lowest
/// state of the loop.
pub const EQ_CONST_MICRO: &str = "\
micro
states chk cmp init halt
start init
halt halt
chk * * 1 * : 0 = S S S S cmp
chk * * 0 * : = 1 S S S S halt
cmp 0 0 * * : 1 = S R R S chk
cmp 1 1 * * : 1 = S R R S chk
cmp 0 1 * * : = 0 S S S S halt
cmp 1 0 * * : = 0 S S S S halt
init * * * * : 1 = S S S S chk
";

/// Like [`EQ_CONST_MICRO`] but reads only the odd half of the oracle, so
/// with oracle `rel (+) cand` it accepts exactly `cand = param`.
pub const EQ_SECTION_MICRO: &str = "\
micro
states chk cmp skip init halt
start init
halt halt
chk * * 1 * : 0 = S S S S cmp
chk * * 0 * : = 1 S S S S halt
cmp 0 0 * * : = = S R R S skip
cmp 1 1 * * : = = S R R S skip
cmp 0 1 * * : = 0 S S S S halt
cmp 1 0 * * : = 0 S S S S halt
skip * * * * : 1 = S R S S chk
init * * * * : 1 = S R S S chk
";

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &str) -> OrdSet {
        t.parse().unwrap()
    }

    fn eq() -> MicroProgram {
        assemble_micro(EQ_CONST_MICRO).unwrap()
    }

    #[test]
    fn writes_then_halts() {
        let p = assemble_micro(
            "micro\nstates a b h\nstart a\nhalt h\na * * * * : = 1 S S S S b\nb * * * * : = = S S S S h\n",
        )
        .unwrap();
        match micro_run(&p, &OrdSet::new(), &OrdSet::new(), 10) {
            RunResult::Halted {
                output_set,
                steps,
                output_bit,
            } => {
                assert_eq!(steps, 2);
                assert!(output_bit);
                assert_eq!(output_set, s("{0}"));
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn head_moves() {
        assert_eq!(shift(&Ordinal::omega(), Move::L), Ordinal::ZERO);
        assert_eq!(shift(&Ordinal::Fin(5), Move::R), Ordinal::Fin(6));
        assert_eq!(shift(&Ordinal::ZERO, Move::L), Ordinal::ZERO);
        assert_eq!(shift(&Ordinal::omega().succ(), Move::L), Ordinal::omega());
    }

    #[test]
    fn eq_constant_decides() {
        let p = eq();
        let run = |o: &str| micro_run_with(&p, &s(o), &s("{2}"), MicroLimits::with_jumps(1000, 1));
        assert!(matches!(
            run("{2}"),
            RunResult::Halted {
                output_bit: true,
                ..
            }
        ));
        assert!(matches!(
            run("{3}"),
            RunResult::Halted {
                output_bit: false,
                ..
            }
        ));
        assert!(matches!(
            run("{}"),
            RunResult::Halted {
                output_bit: false,
                ..
            }
        ));
        // Without limit stages the agreeing case never halts.
        assert!(matches!(
            micro_run(&p, &s("{2}"), &s("{2}"), 100),
            RunResult::FuelExhausted { .. }
        ));
    }

    #[test]
    fn section_reads_odd_half() {
        let p = assemble_micro(EQ_SECTION_MICRO).unwrap();
        let o = crate::ordset::interleave(&s("{0, 5}"), &s("{1, 2}"));
        let r = micro_run_with(&p, &o, &s("{1, 2}"), MicroLimits::with_jumps(1000, 1));
        assert!(matches!(
            r,
            RunResult::Halted {
                output_bit: true,
                ..
            }
        ));
        let r = micro_run_with(&p, &o, &s("{0, 5}"), MicroLimits::with_jumps(1000, 1));
        assert!(matches!(
            r,
            RunResult::Halted {
                output_bit: false,
                ..
            }
        ));
    }

    #[test]
    fn loop_exhausts_fuel() {
        let p = assemble_micro(
            "micro\nstates a b h\nstart a\nhalt h\na * * * * : = = S S S S b\nb * * * * : = = S S S S a\n",
        )
        .unwrap();
        assert!(matches!(
            micro_run(&p, &OrdSet::new(), &OrdSet::new(), 100),
            RunResult::FuelExhausted { .. }
        ));
    }

    #[test]
    fn assembly_roundtrip_and_totality() {
        let p = eq();
        assert_eq!(assemble_micro(&p.to_string()).unwrap(), p);
        let partial = "micro\nstates a h\nstart a\nhalt h\na 0 * * * : = = S S S S h\n";
        assert!(assemble_micro(partial).is_err());
    }
}
