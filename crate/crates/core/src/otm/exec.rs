//! Execution of macro programs, and of either program kind through the
//! shared fuel budget.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use super::library::{self, wire};
use super::macro_vm::{Arg, Block, MacroProgram, Op};
use super::micro::{micro_run_with, MicroLimits};
use super::{Program, RunResult};
use crate::formula::{eval_bounded, Formula, FormulaError};
use crate::hfset::HfSet;
use crate::ordinal::Ordinal;
use crate::ordset::{interleave, project, OrdSet, Side};
use crate::setcode::{decode, encode, member_codes, CodeError, SetCode};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed operand: {0}")]
pub struct MalformedOperand(pub String);

/// Why a block stopped without halting normally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Stop {
    Fuel,
    Limit,
    Malformed(String),
    /// Abandon the current program with output 0.
    Reject,
}

impl From<CodeError> for Stop {
    fn from(e: CodeError) -> Self {
        Stop::Malformed(e.to_string())
    }
}

impl From<FormulaError> for Stop {
    fn from(e: FormulaError) -> Self {
        match e {
            FormulaError::FuelExhausted => Stop::Fuel,
            e => Stop::Malformed(e.to_string()),
        }
    }
}

const MAX_DEPTH: u32 = 200;
/// Limit stages a nested micro run may take.
const MICRO_JUMPS: u32 = 4;

/// One fuel budget shared by a run and everything it starts.
pub(crate) struct Vm {
    pub fuel: u64,
    pub used: u64,
    depth: u32,
}

fn bit(b: bool) -> OrdSet {
    OrdSet::bit(b)
}

fn code(s: &OrdSet) -> Result<SetCode, Stop> {
    Ok(SetCode::from_ordset(s.clone())?)
}

fn set_of(s: &OrdSet) -> Result<HfSet, Stop> {
    Ok(decode(&code(s)?)?)
}

fn formula_of(g: &OrdSet) -> Result<Formula, Stop> {
    let text =
        library::text_from_godel(g).ok_or_else(|| Stop::Malformed("not a Goedel text".into()))?;
    Ok(crate::formula::parse_formula(&text)?)
}

impl Vm {
    pub fn new(fuel: u64) -> Self {
        Vm {
            fuel,
            used: 0,
            depth: 0,
        }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        if self.used >= self.fuel {
            return Err(Stop::Fuel);
        }
        self.used += 1;
        Ok(())
    }

    fn enter(&mut self) -> Result<(), Stop> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Stop::Malformed("nesting too deep".into()));
        }
        Ok(())
    }

    /// Runs the recognizer of `prog` on `oracle`. A rejection anywhere inside
    /// counts as output 0.
    pub fn verify(
        &mut self,
        prog: &Program,
        oracle: &OrdSet,
        param: &OrdSet,
    ) -> Result<(bool, OrdSet), Stop> {
        self.enter()?;
        let r = self.verify_inner(prog, oracle, param);
        self.depth -= 1;
        match r {
            Err(Stop::Reject) => Ok((false, OrdSet::new())),
            r => r,
        }
    }

    fn verify_inner(
        &mut self,
        prog: &Program,
        oracle: &OrdSet,
        param: &OrdSet,
    ) -> Result<(bool, OrdSet), Stop> {
        match prog {
            Program::Micro(m) => {
                let left = self.fuel - self.used;
                let r =
                    micro_run_with(m, oracle, param, MicroLimits::with_jumps(left, MICRO_JUMPS));
                self.used += r.steps();
                match r {
                    RunResult::Halted {
                        output_bit,
                        output_set,
                        ..
                    } => Ok((output_bit, output_set)),
                    RunResult::FuelExhausted { .. } => Err(Stop::Fuel),
                    RunResult::LimitUndetermined { .. } => Err(Stop::Limit),
                }
            }
            Program::Macro(m) => match &m.compute {
                Some(block) => {
                    let rel = project(oracle, Side::Even);
                    let cand = project(oracle, Side::Odd);
                    let (ok, z) = self.exec(m, block, &interleave(&rel, &OrdSet::new()), param)?;
                    Ok((ok && z == cand, z))
                }
                None => self.exec(m, &m.main, oracle, param),
            },
        }
    }

    /// Runs the proposing block of `prog` relative to `rel`; `None` when
    /// there is no such block or it declines.
    pub fn propose(
        &mut self,
        prog: &Program,
        rel: &OrdSet,
        param: &OrdSet,
    ) -> Result<Option<OrdSet>, Stop> {
        let Program::Macro(m) = prog else {
            return Ok(None);
        };
        let Some(block) = m.proposer() else {
            return Ok(None);
        };
        self.enter()?;
        let r = self.exec(m, block, &interleave(rel, &OrdSet::new()), param);
        self.depth -= 1;
        match r {
            Ok((true, z)) => Ok(Some(z)),
            Ok((false, _)) | Err(Stop::Reject) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// Unpacks a serialized program-parameter realizer.
    fn progparam(x: &OrdSet) -> Option<(Arc<Program>, OrdSet)> {
        let (g, q) = wire::as_progparam(x)?;
        Some((library::program_from_godel(&g)?, q))
    }

    pub(crate) fn exec(
        &mut self,
        prog: &MacroProgram,
        block: &Block,
        oracle: &OrdSet,
        param: &OrdSet,
    ) -> Result<(bool, OrdSet), Stop> {
        let mut regs: HashMap<&str, OrdSet> = HashMap::new();
        let mut out = OrdSet::new();
        let mut pc = 0usize;
        loop {
            self.tick()?;
            let ins = block
                .instrs
                .get(pc)
                .ok_or_else(|| Stop::Malformed("fell off the end of a block".into()))?;
            pc += 1;
            let a = &ins.args;
            let get = |regs: &HashMap<&str, OrdSet>, k: usize| -> Result<OrdSet, Stop> {
                match &a[k] {
                    Arg::Lit(s) => Ok(s.clone()),
                    Arg::Reg(r) => regs
                        .get(r.as_str())
                        .cloned()
                        .ok_or_else(|| Stop::Malformed(format!("register `{r}` is unset"))),
                    other => Err(Stop::Malformed(format!("operand {other} is not a set"))),
                }
            };
            let dst = match a.first() {
                Some(Arg::Reg(r)) => r.as_str(),
                _ => "",
            };
            let value: Option<OrdSet> = match ins.op {
                Op::Oracle => Some(oracle.clone()),
                Op::Param => Some(param.clone()),
                Op::Rel => Some(project(oracle, Side::Even)),
                Op::Cand => Some(project(oracle, Side::Odd)),
                Op::Mov => Some(get(&regs, 1)?),
                Op::Proj => {
                    let side = if a[2] == Arg::Bit(1) {
                        Side::Odd
                    } else {
                        Side::Even
                    };
                    Some(project(&get(&regs, 1)?, side))
                }
                Op::Ilv => Some(interleave(&get(&regs, 1)?, &get(&regs, 2)?)),
                Op::Eq => Some(bit(get(&regs, 1)? == get(&regs, 2)?)),
                Op::CmpOrc => Some(bit(*oracle == get(&regs, 1)?)),
                Op::Below => {
                    let Arg::Ord(o) = &a[2] else { unreachable!() };
                    Some(get(&regs, 1)?.below(o))
                }
                Op::Valid => Some(bit(code(&get(&regs, 1)?)
                    .and_then(|c| Ok(decode(&c)?))
                    .is_ok())),
                Op::Canon => {
                    let s = get(&regs, 1)?;
                    Some(bit(set_of(&s)
                        .map(|x| encode(&x).code == s)
                        .unwrap_or(false)))
                }
                Op::Ceq => Some(bit(set_of(&get(&regs, 1)?)? == set_of(&get(&regs, 2)?)?)),
                Op::Cin => Some(bit(
                    set_of(&get(&regs, 2)?)?.contains(&set_of(&get(&regs, 1)?)?)
                )),
                Op::D0 => {
                    let f = match &a[1] {
                        Arg::Formula(f) => f.clone(),
                        Arg::FormulaReg(r) => {
                            formula_of(regs.get(r.as_str()).ok_or_else(|| {
                                Stop::Malformed(format!("register `{r}` is unset"))
                            })?)?
                        }
                        _ => unreachable!(),
                    };
                    let mut env = std::collections::BTreeMap::new();
                    for b in &a[2..] {
                        let Arg::Bind(v, src) = b else { unreachable!() };
                        let s = match &**src {
                            Arg::Lit(s) => s.clone(),
                            Arg::Reg(r) => regs.get(r.as_str()).cloned().ok_or_else(|| {
                                Stop::Malformed(format!("register `{r}` is unset"))
                            })?,
                            _ => unreachable!(),
                        };
                        let c = code(&s)?;
                        decode(&c)?;
                        env.insert(v.clone(), c);
                    }
                    let left = self.fuel - self.used;
                    let v = eval_bounded(&f, &env, left)?;
                    Some(bit(v))
                }
                Op::Bt => {
                    let f = formula_of(&get(&regs, 1)?)?;
                    match crate::realizability::canonical_realizer(&f) {
                        Ok(r) => Some(crate::realizability::serialize(&r)),
                        Err(_) => return Err(Stop::Reject),
                    }
                }
                Op::Subst => {
                    let f = formula_of(&get(&regs, 1)?)?;
                    let Arg::Name(v) = &a[2] else { unreachable!() };
                    let x = set_of(&get(&regs, 3)?)?;
                    Some(library::godel_text(&f.subst(v, &x).to_string()))
                }
                Op::Inst => {
                    // One instance of a universal: `(all v) B` gives B[v:=x],
                    // `(all v in T) B` gives `x in T -> B[v:=x]`.
                    let f = formula_of(&get(&regs, 1)?)?;
                    let x = set_of(&get(&regs, 2)?)?;
                    let g = match f {
                        Formula::ForAll(v, b) => b.subst(&v, &x),
                        Formula::ForAllIn(v, t, b) => Formula::implies(
                            Formula::Member(crate::formula::Term::Const(x.clone()), t),
                            b.subst(&v, &x),
                        ),
                        _ => return Err(Stop::Malformed("inst needs a universal formula".into())),
                    };
                    Some(library::godel_text(&g.to_string()))
                }
                Op::Sep => {
                    let f = formula_of(&get(&regs, 1)?)?;
                    let Arg::Name(v) = &a[2] else { unreachable!() };
                    let c = set_of(&get(&regs, 3)?)?;
                    let mut keep = Vec::new();
                    for x in c.members() {
                        let g = f.subst(v, x);
                        let left = self.fuel - self.used;
                        if eval_bounded(&g, &Default::default(), left)? {
                            keep.push(x.clone());
                        }
                    }
                    Some(encode(&HfSet::from_members(keep)).code)
                }
                Op::PairSet => Some(
                    encode(&HfSet::pair(
                        set_of(&get(&regs, 1)?)?,
                        set_of(&get(&regs, 2)?)?,
                    ))
                    .code,
                ),
                Op::KPair => Some(
                    encode(&HfSet::kpair(
                        &set_of(&get(&regs, 1)?)?,
                        &set_of(&get(&regs, 2)?)?,
                    ))
                    .code,
                ),
                Op::Union => Some(encode(&set_of(&get(&regs, 1)?)?.union_members()).code),
                Op::Tc => Some(
                    encode(&HfSet::from_members(
                        set_of(&get(&regs, 1)?)?.tc_with_self(),
                    ))
                    .code,
                ),
                Op::Members => {
                    let ms = member_codes(&code(&get(&regs, 1)?)?)?;
                    Some(wire::list(ms.into_iter().map(|c| c.code)))
                }
                Op::Elems => Some(wire::list(
                    get(&regs, 1)?.iter().map(|o| OrdSet::singleton(o.clone())),
                )),
                Op::Lnil => Some(wire::nil()),
                Op::Lcons => {
                    Some(wire::cons(&get(&regs, 1)?, &get(&regs, 2)?).ok_or(Stop::Reject)?)
                }
                Op::Lnull => {
                    let l = get(&regs, 1)?;
                    Some(bit(wire::uncons(&l).ok_or(Stop::Reject)?.is_none()))
                }
                Op::Lhead | Op::Ltail => {
                    let l = get(&regs, 1)?;
                    let (h, t) = wire::uncons(&l).flatten().ok_or(Stop::Reject)?;
                    Some(if ins.op == Op::Lhead { h } else { t })
                }
                Op::Llen => {
                    let items = wire::unlist(&get(&regs, 1)?).ok_or(Stop::Reject)?;
                    Some(OrdSet::singleton(Ordinal::Fin(items.len() as u64)))
                }
                Op::Lnth => {
                    let items = wire::unlist(&get(&regs, 1)?).ok_or(Stop::Reject)?;
                    let j = get(&regs, 2)?.as_nat().ok_or(Stop::Reject)? as usize;
                    Some(items.get(j).cloned().ok_or(Stop::Reject)?)
                }
                Op::Lfind => {
                    let items = wire::unlist(&get(&regs, 1)?).ok_or(Stop::Reject)?;
                    let key = set_of(&get(&regs, 2)?)?;
                    let mut found = None;
                    for e in items {
                        self.tick()?;
                        let k = project(&e, Side::Even);
                        if set_of(&k).map(|s| s == key).unwrap_or(false) {
                            found = Some(project(&e, Side::Odd));
                            break;
                        }
                    }
                    match found {
                        Some(v) => Some(v),
                        None => {
                            let Arg::Label(l) = &a[3] else { unreachable!() };
                            pc = block.target(l);
                            None
                        }
                    }
                }
                Op::Lkeys => {
                    let items = wire::unlist(&get(&regs, 1)?).ok_or(Stop::Reject)?;
                    Some(wire::list(items.iter().map(|e| project(e, Side::Even))))
                }
                Op::Lsorted => {
                    let items = wire::unlist(&get(&regs, 1)?).ok_or(Stop::Reject)?;
                    Some(bit(items.windows(2).all(|w| w[0] < w[1])))
                }
                Op::Quote => {
                    let Arg::Name(n) = &a[1] else { unreachable!() };
                    Some(
                        library::library_godel(n)
                            .ok_or_else(|| Stop::Malformed(format!("no library program `{n}`")))?,
                    )
                }
                Op::MkPp => Some(wire::progparam(&get(&regs, 1)?, &get(&regs, 2)?)),
                Op::MkPair => Some(wire::pair(&get(&regs, 1)?, &get(&regs, 2)?)),
                Op::MkChoice => Some(wire::choice_raw(&get(&regs, 1)?, &get(&regs, 2)?)),
                Op::MkEmpty => Some(wire::empty()),
                Op::MkLeaf => Some(wire::leaf(&get(&regs, 1)?)),
                Op::Jmp => {
                    let Arg::Label(l) = &a[0] else { unreachable!() };
                    pc = block.target(l);
                    None
                }
                Op::Jz | Op::Jnz => {
                    let v = get(&regs, 0)?;
                    if v.is_empty() == (ins.op == Op::Jz) {
                        let Arg::Label(l) = &a[1] else { unreachable!() };
                        pc = block.target(l);
                    }
                    None
                }
                Op::Call | Op::Calls => {
                    let Arg::Name(n) = &a[1] else { unreachable!() };
                    let sub = prog
                        .sub(n)
                        .ok_or_else(|| Stop::Malformed(format!("no subroutine `{n}`")))?;
                    let (o, p) = (get(&regs, 2)?, get(&regs, 3)?);
                    self.enter()?;
                    let r = self.exec(prog, sub, &o, &p);
                    self.depth -= 1;
                    let (b, s) = r?;
                    if ins.op == Op::Call {
                        Some(bit(b))
                    } else if b {
                        Some(s)
                    } else {
                        return Err(Stop::Reject);
                    }
                }
                Op::Run => {
                    let x = get(&regs, 1)?;
                    let o = interleave(&get(&regs, 2)?, &get(&regs, 3)?);
                    match Self::progparam(&x) {
                        None => Some(bit(false)),
                        Some((p, q)) => Some(bit(self.verify(&p, &o, &q)?.0)),
                    }
                }
                Op::RunO => {
                    let x = get(&regs, 1)?;
                    let o = get(&regs, 2)?;
                    match Self::progparam(&x) {
                        None => Some(bit(false)),
                        Some((p, q)) => Some(bit(self.verify(&p, &o, &q)?.0)),
                    }
                }
                Op::Solve | Op::Rho => {
                    let x = get(&regs, 1)?;
                    let rel = get(&regs, 2)?;
                    let (p, q) = Self::progparam(&x).ok_or(Stop::Reject)?;
                    let z = self.propose(&p, &rel, &q)?.ok_or(Stop::Reject)?;
                    if ins.op == Op::Rho && !self.verify(&p, &interleave(&rel, &z), &q)?.0 {
                        return Err(Stop::Reject);
                    }
                    Some(z)
                }
                Op::Out => {
                    out = get(&regs, 0)?;
                    None
                }
                Op::Halt => return Ok((get(&regs, 0)?.as_bit(), out)),
            };
            if let Some(v) = value {
                regs.insert(dst, v);
            }
        }
    }
}

fn finish(r: Result<(bool, OrdSet), Stop>, used: u64) -> Result<RunResult, MalformedOperand> {
    match r {
        Ok((output_bit, output_set)) => Ok(RunResult::Halted {
            output_bit,
            output_set,
            steps: used,
        }),
        Err(Stop::Reject) => Ok(RunResult::Halted {
            output_bit: false,
            output_set: OrdSet::new(),
            steps: used,
        }),
        Err(Stop::Fuel) => Ok(RunResult::FuelExhausted { steps: used }),
        Err(Stop::Limit) => Ok(RunResult::LimitUndetermined { steps: used }),
        Err(Stop::Malformed(m)) => Err(MalformedOperand(m)),
    }
}

/// Runs the recognizer of a macro program. Each instruction costs one unit
/// of fuel, including those of nested runs.
pub fn macro_run(
    p: &MacroProgram,
    oracle: &OrdSet,
    param: &OrdSet,
    fuel: u64,
) -> Result<RunResult, MalformedOperand> {
    run_program(&Program::Macro(p.clone()), oracle, param, fuel)
}

/// Runs the proposing block (`.synth` or `.compute`) relative to `rel`.
/// Output bit 0 means no proposal.
pub fn macro_synth(
    p: &MacroProgram,
    rel: &OrdSet,
    param: &OrdSet,
    fuel: u64,
) -> Result<RunResult, MalformedOperand> {
    synth_program(&Program::Macro(p.clone()), rel, param, fuel)
}

pub fn run_program(
    p: &Program,
    oracle: &OrdSet,
    param: &OrdSet,
    fuel: u64,
) -> Result<RunResult, MalformedOperand> {
    let mut vm = Vm::new(fuel);
    let r = vm.verify(p, oracle, param);
    finish(r, vm.used)
}

pub fn synth_program(
    p: &Program,
    rel: &OrdSet,
    param: &OrdSet,
    fuel: u64,
) -> Result<RunResult, MalformedOperand> {
    let mut vm = Vm::new(fuel);
    let r = vm.propose(p, rel, param).map(|z| match z {
        Some(z) => (true, z),
        None => (false, OrdSet::new()),
    });
    finish(r, vm.used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::otm::macro_vm::assemble_macro;

    fn s(t: &str) -> OrdSet {
        t.parse().unwrap()
    }

    fn bit_of(r: RunResult) -> bool {
        match r {
            RunResult::Halted { output_bit, .. } => output_bit,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cmporc_example() {
        let p = assemble_macro("cmporc {2}\nhalt r").unwrap();
        assert!(bit_of(macro_run(&p, &s("{2}"), &s("{}"), 100).unwrap()));
        assert!(!bit_of(macro_run(&p, &s("{3}"), &s("{}"), 100).unwrap()));
    }

    #[test]
    fn delta0_example() {
        let p =
            assemble_macro("oracle c\nd0 r \"(all y in x0)(y = O)\" x0=c O={}\nhalt r").unwrap();
        let c = encode(&"{{}}".parse().unwrap()).code;
        assert!(bit_of(macro_run(&p, &c, &s("{}"), 100).unwrap()));
        let c = encode(&"{{{}}}".parse().unwrap()).code;
        assert!(!bit_of(macro_run(&p, &c, &s("{}"), 100).unwrap()));
        // Garbage in a non-test position is reported, not guessed at.
        assert!(macro_run(&p, &s("{0}"), &s("{}"), 100).is_err());
    }

    #[test]
    fn empty_loop_runs_out() {
        let p = assemble_macro("top:\n  jmp top").unwrap();
        assert!(matches!(
            macro_run(&p, &s("{}"), &s("{}"), 1).unwrap(),
            RunResult::FuelExhausted { .. }
        ));
    }

    #[test]
    fn compute_blocks_recognize_their_output() {
        let p = assemble_macro(".compute\n  rel x\n  ilv z x x\n  out z\n  halt 1").unwrap();
        let rel = s("{1, 3}");
        let z = interleave(&rel, &rel);
        let o = interleave(&rel, &z);
        assert!(bit_of(macro_run(&p, &o, &s("{}"), 100).unwrap()));
        let o = interleave(&rel, &s("{0}"));
        assert!(!bit_of(macro_run(&p, &o, &s("{}"), 100).unwrap()));
        match macro_synth(&p, &rel, &s("{}"), 100).unwrap() {
            RunResult::Halted {
                output_bit: true,
                output_set,
                ..
            } => assert_eq!(output_set, z),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lists_and_subroutines() {
        let text = "\
  lnil l
  lcons l {3} l
  lcons l {1} l
  llen n l
  lnth x l {1}
  call b same x {3}
  lsorted t l
  ilv r b t
  halt r
.sub same
  oracle o
  param p
  eq r o p
  halt r
";
        let p = assemble_macro(text).unwrap();
        assert!(bit_of(macro_run(&p, &s("{}"), &s("{}"), 1000).unwrap()));
    }
}
