//! The macro VM: register programs over sets of ordinals with set-level
//! intrinsics.
//!
//! A program has a main block (the recognizer proper), an optional `.synth`
//! block proposing the candidate the main block is meant to accept, named
//! `.sub` blocks, or instead a single `.compute` block. A compute block
//! outputs a set from `rel`; the recognizer derived from it accepts exactly
//! that set, and it doubles as the synth block.
//!
//! Inside a run the oracle is read as `rel (+) cand`.

use std::collections::HashMap;
use std::fmt;

use super::AsmError;
use crate::formula::{parse_formula, Formula};
use crate::ordinal::Ordinal;
use crate::ordset::OrdSet;

pub use super::exec::{macro_run, macro_synth, MalformedOperand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Oracle,
    Param,
    Rel,
    Cand,
    Mov,
    Proj,
    Ilv,
    Eq,
    CmpOrc,
    Below,
    Valid,
    Canon,
    Ceq,
    Cin,
    D0,
    Bt,
    Subst,
    Inst,
    Sep,
    PairSet,
    KPair,
    Union,
    Tc,
    Members,
    Elems,
    Lnil,
    Lcons,
    Lnull,
    Lhead,
    Ltail,
    Llen,
    Lnth,
    Lfind,
    Lkeys,
    Lsorted,
    Quote,
    MkPp,
    MkPair,
    MkChoice,
    MkEmpty,
    MkLeaf,
    Jmp,
    Jz,
    Jnz,
    Call,
    Calls,
    Run,
    RunO,
    Solve,
    Rho,
    Out,
    Halt,
}

/// Operand kinds in an instruction signature:
/// `D` destination register, `S` source (register or set literal),
/// `B` bit 0/1, `L` label, `N` name, `O` ordinal, `F` formula (quoted text
/// or `@reg` holding its Goedel number), `V` zero or more `var=S` bindings,
/// `d` optional destination (defaults to `r`).
const OPS: &[(&str, Op, &str)] = &[
    ("oracle", Op::Oracle, "D"),
    ("param", Op::Param, "D"),
    ("rel", Op::Rel, "D"),
    ("cand", Op::Cand, "D"),
    ("mov", Op::Mov, "DS"),
    ("proj", Op::Proj, "DSB"),
    ("ilv", Op::Ilv, "DSS"),
    ("eq", Op::Eq, "DSS"),
    ("cmporc", Op::CmpOrc, "dS"),
    ("below", Op::Below, "DSO"),
    ("valid", Op::Valid, "DS"),
    ("canon", Op::Canon, "DS"),
    ("ceq", Op::Ceq, "DSS"),
    ("cin", Op::Cin, "DSS"),
    ("d0", Op::D0, "DFV"),
    ("bt", Op::Bt, "DS"),
    ("subst", Op::Subst, "DSNS"),
    ("inst", Op::Inst, "DSS"),
    ("sep", Op::Sep, "DSNS"),
    ("pairset", Op::PairSet, "DSS"),
    ("kpair", Op::KPair, "DSS"),
    ("union", Op::Union, "DS"),
    ("tc", Op::Tc, "DS"),
    ("members", Op::Members, "DS"),
    ("elems", Op::Elems, "DS"),
    ("lnil", Op::Lnil, "D"),
    ("lcons", Op::Lcons, "DSS"),
    ("lnull", Op::Lnull, "DS"),
    ("lhead", Op::Lhead, "DS"),
    ("ltail", Op::Ltail, "DS"),
    ("llen", Op::Llen, "DS"),
    ("lnth", Op::Lnth, "DSS"),
    ("lfind", Op::Lfind, "DSSL"),
    ("lkeys", Op::Lkeys, "DS"),
    ("lsorted", Op::Lsorted, "DS"),
    ("quote", Op::Quote, "DN"),
    ("mkpp", Op::MkPp, "DSS"),
    ("mkpair", Op::MkPair, "DSS"),
    ("mkchoice", Op::MkChoice, "DSS"),
    ("mkempty", Op::MkEmpty, "D"),
    ("mkleaf", Op::MkLeaf, "DS"),
    ("jmp", Op::Jmp, "L"),
    ("jz", Op::Jz, "SL"),
    ("jnz", Op::Jnz, "SL"),
    ("call", Op::Call, "DNSS"),
    ("calls", Op::Calls, "DNSS"),
    ("run", Op::Run, "DSSS"),
    ("runo", Op::RunO, "DSS"),
    ("solve", Op::Solve, "DSS"),
    ("rho", Op::Rho, "DSS"),
    ("out", Op::Out, "S"),
    ("halt", Op::Halt, "S"),
];

impl Op {
    pub fn name(self) -> &'static str {
        OPS.iter()
            .find(|(_, o, _)| *o == self)
            .map(|(n, _, _)| *n)
            .expect("every op is listed")
    }

    /// Operand kinds, in the letters documented on the op table.
    pub fn signature(self) -> &'static str {
        OPS.iter()
            .find(|(_, o, _)| *o == self)
            .map(|(_, _, s)| *s)
            .expect("every op is listed")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Arg {
    Reg(String),
    Lit(OrdSet),
    Bit(u8),
    Label(String),
    Name(String),
    Ord(Ordinal),
    Formula(Formula),
    FormulaReg(String),
    Bind(String, Box<Arg>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instr {
    pub op: Op,
    pub args: Vec<Arg>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Block {
    pub instrs: Vec<Instr>,
    /// Label name and the instruction index it marks.
    pub labels: Vec<(String, usize)>,
}

impl Block {
    pub fn target(&self, label: &str) -> usize {
        self.labels
            .iter()
            .find(|(n, _)| n == label)
            .map(|(_, i)| *i)
            .expect("labels are resolved at assembly")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MacroProgram {
    pub main: Block,
    pub synth: Option<Block>,
    pub compute: Option<Block>,
    pub subs: Vec<(String, Block)>,
}

impl MacroProgram {
    pub fn is_compute(&self) -> bool {
        self.compute.is_some()
    }

    pub fn sub(&self, name: &str) -> Option<&Block> {
        self.subs.iter().find(|(n, _)| n == name).map(|(_, b)| b)
    }

    /// The block that proposes a candidate, if any.
    pub fn proposer(&self) -> Option<&Block> {
        self.compute.as_ref().or(self.synth.as_ref())
    }
}

// ---------------------------------------------------------------------------
// Assembly

fn tokenize(line: &str) -> Result<Vec<(String, usize)>, usize> {
    let b = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        if b[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if b[i] == b'#' {
            break;
        }
        let start = i;
        if b[i] == b'"' {
            i += 1;
            while i < b.len() && b[i] != b'"' {
                i += 1;
            }
            if i == b.len() {
                return Err(out.len() + 1);
            }
            i += 1;
        } else {
            let mut depth = 0i32;
            while i < b.len() && (depth > 0 || !b[i].is_ascii_whitespace()) {
                match b[i] {
                    b'{' => depth += 1,
                    b'}' => depth -= 1,
                    _ => {}
                }
                i += 1;
            }
            if depth != 0 {
                return Err(out.len() + 1);
            }
        }
        out.push((line[start..i].to_string(), start));
    }
    Ok(out)
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_src(tok: &str) -> Option<Arg> {
    if tok == "0" || tok == "1" {
        Some(Arg::Lit(OrdSet::bit(tok == "1")))
    } else if tok.starts_with('{') {
        tok.parse::<OrdSet>().ok().map(Arg::Lit)
    } else if is_ident(tok) {
        Some(Arg::Reg(tok.to_string()))
    } else {
        None
    }
}

fn parse_instr(toks: &[(String, usize)], line: usize) -> Result<Instr, AsmError> {
    let err = |token: usize, msg: String| AsmError { line, token, msg };
    let (name, _) = &toks[0];
    let &(_, op, sig) = OPS
        .iter()
        .find(|(n, _, _)| n == name)
        .ok_or_else(|| err(1, format!("unknown instruction `{name}`")))?;
    let mut args = Vec::new();
    let mut k = 1;
    for kind in sig.chars() {
        let tok = toks.get(k).map(|t| t.0.as_str());
        let missing = || err(k, format!("`{name}` is missing an operand"));
        match kind {
            'D' => {
                let t = tok.ok_or_else(missing)?;
                if !is_ident(t) {
                    return Err(err(k + 1, format!("expected a register, got `{t}`")));
                }
                args.push(Arg::Reg(t.to_string()));
                k += 1;
            }
            'd' => {
                // Optional: present when followed by the required source.
                if toks.len() - k >= 2 && tok.is_some_and(is_ident) {
                    args.push(Arg::Reg(tok.unwrap().to_string()));
                    k += 1;
                } else {
                    args.push(Arg::Reg("r".into()));
                }
            }
            'S' => {
                let t = tok.ok_or_else(missing)?;
                args.push(parse_src(t).ok_or_else(|| err(k + 1, format!("bad operand `{t}`")))?);
                k += 1;
            }
            'B' => {
                let t = tok.ok_or_else(missing)?;
                let bit = match t {
                    "0" => 0,
                    "1" => 1,
                    _ => return Err(err(k + 1, "expected 0 or 1".into())),
                };
                args.push(Arg::Bit(bit));
                k += 1;
            }
            'L' | 'N' => {
                let t = tok.ok_or_else(missing)?;
                if !is_ident(t) {
                    return Err(err(k + 1, format!("expected a name, got `{t}`")));
                }
                args.push(if kind == 'L' {
                    Arg::Label(t.into())
                } else {
                    Arg::Name(t.into())
                });
                k += 1;
            }
            'O' => {
                let t = tok.ok_or_else(missing)?;
                args.push(Arg::Ord(
                    t.parse()
                        .map_err(|_| err(k + 1, format!("bad ordinal `{t}`")))?,
                ));
                k += 1;
            }
            'F' => {
                let t = tok.ok_or_else(missing)?;
                if let Some(r) = t.strip_prefix('@') {
                    if !is_ident(r) {
                        return Err(err(k + 1, "expected @register".into()));
                    }
                    args.push(Arg::FormulaReg(r.into()));
                } else if t.len() >= 2 && t.starts_with('"') && t.ends_with('"') {
                    let f =
                        parse_formula(&t[1..t.len() - 1]).map_err(|e| err(k + 1, e.to_string()))?;
                    args.push(Arg::Formula(f));
                } else {
                    return Err(err(k + 1, "expected a quoted formula or @register".into()));
                }
                k += 1;
            }
            'V' => {
                while let Some(t) = toks.get(k).map(|t| t.0.as_str()) {
                    let (v, s) = t
                        .split_once('=')
                        .ok_or_else(|| err(k + 1, "expected var=operand".into()))?;
                    if !is_ident(v) {
                        return Err(err(k + 1, "bad variable".into()));
                    }
                    let src =
                        parse_src(s).ok_or_else(|| err(k + 1, format!("bad operand `{s}`")))?;
                    args.push(Arg::Bind(v.into(), Box::new(src)));
                    k += 1;
                }
            }
            _ => unreachable!("signature alphabet"),
        }
    }
    if k < toks.len() {
        return Err(err(k + 1, "unexpected extra operand".into()));
    }
    Ok(Instr { op, args })
}

fn finish_block(b: &Block, line: usize, name: &str) -> Result<(), AsmError> {
    let err = |msg: String| AsmError {
        line,
        token: 0,
        msg,
    };
    match b.instrs.last() {
        Some(Instr {
            op: Op::Halt | Op::Jmp,
            ..
        }) => {}
        _ => return Err(err(format!("block `{name}` must end in halt or jmp"))),
    }
    for ins in &b.instrs {
        for a in &ins.args {
            if let Arg::Label(l) = a {
                if !b.labels.iter().any(|(n, _)| n == l) {
                    return Err(err(format!("unknown label `{l}` in block `{name}`")));
                }
            }
        }
    }
    for (n, i) in &b.labels {
        if *i >= b.instrs.len() {
            return Err(err(format!("label `{n}` marks no instruction")));
        }
    }
    Ok(())
}

pub fn assemble_macro(text: &str) -> Result<MacroProgram, AsmError> {
    let mut prog = MacroProgram::default();
    let mut cur = Block::default();
    let mut cur_name = String::from("main");
    let mut last_line = 0;
    let close =
        |prog: &mut MacroProgram, name: &str, b: Block, line: usize| -> Result<(), AsmError> {
            if name == "main" && b.instrs.is_empty() && b.labels.is_empty() {
                return Ok(());
            }
            finish_block(&b, line, name)?;
            match name {
                "main" => prog.main = b,
                ".synth" => prog.synth = Some(b),
                ".compute" => prog.compute = Some(b),
                sub => prog.subs.push((sub.to_string(), b)),
            }
            Ok(())
        };
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        last_line = line_no;
        let toks = tokenize(line).map_err(|t| AsmError {
            line: line_no,
            token: t,
            msg: "unterminated operand".into(),
        })?;
        if toks.is_empty() {
            continue;
        }
        let head = toks[0].0.as_str();
        if head.starts_with('.') {
            let name = match (head, toks.get(1)) {
                (".synth" | ".compute", None) => head.to_string(),
                (".sub", Some((n, _))) if is_ident(n) && toks.len() == 2 => n.clone(),
                _ => {
                    return Err(AsmError {
                        line: line_no,
                        token: 1,
                        msg: format!("bad directive `{head}`"),
                    })
                }
            };
            let done = std::mem::take(&mut cur);
            close(&mut prog, &cur_name, done, line_no)?;
            cur_name = name;
            continue;
        }
        if toks.len() == 1 && head.ends_with(':') {
            let l = &head[..head.len() - 1];
            if !is_ident(l) || cur.labels.iter().any(|(n, _)| n == l) {
                return Err(AsmError {
                    line: line_no,
                    token: 1,
                    msg: format!("bad or duplicate label `{l}`"),
                });
            }
            cur.labels.push((l.to_string(), cur.instrs.len()));
            continue;
        }
        cur.instrs.push(parse_instr(&toks, line_no)?);
    }
    close(&mut prog, &cur_name, cur, last_line)?;
    if prog.compute.is_some() && (!prog.main.instrs.is_empty() || prog.synth.is_some()) {
        return Err(AsmError {
            line: 0,
            token: 0,
            msg: "a compute program has no main or synth block".into(),
        });
    }
    if prog.compute.is_none() && prog.main.instrs.is_empty() {
        return Err(AsmError {
            line: 1,
            token: 1,
            msg: "empty program".into(),
        });
    }
    let mut names: Vec<&str> = prog.subs.iter().map(|(n, _)| n.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(AsmError {
            line: 0,
            token: 0,
            msg: "duplicate subroutine".into(),
        });
    }
    for b in std::iter::once(&prog.main)
        .chain(prog.synth.iter())
        .chain(prog.compute.iter())
        .chain(prog.subs.iter().map(|s| &s.1))
    {
        for ins in &b.instrs {
            if matches!(ins.op, Op::Call | Op::Calls) {
                if let Arg::Name(n) = &ins.args[1] {
                    if prog.sub(n).is_none() {
                        return Err(AsmError {
                            line: 0,
                            token: 0,
                            msg: format!("unknown subroutine `{n}`"),
                        });
                    }
                }
            }
        }
    }
    Ok(prog)
}

// ---------------------------------------------------------------------------
// Disassembly

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Reg(r) | Arg::Label(r) | Arg::Name(r) => f.write_str(r),
            Arg::Lit(s) => write!(f, "{}", s.to_string().replace(' ', "")),
            Arg::Bit(b) => write!(f, "{b}"),
            Arg::Ord(o) => write!(f, "{o}"),
            Arg::Formula(x) => write!(f, "\"{x}\""),
            Arg::FormulaReg(r) => write!(f, "@{r}"),
            Arg::Bind(v, a) => write!(f, "{v}={a}"),
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.op.name())?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

fn write_block(f: &mut fmt::Formatter<'_>, b: &Block) -> fmt::Result {
    let mut at: HashMap<usize, Vec<&str>> = HashMap::new();
    for (n, i) in &b.labels {
        at.entry(*i).or_default().push(n);
    }
    for (i, ins) in b.instrs.iter().enumerate() {
        for l in at.get(&i).into_iter().flatten() {
            writeln!(f, "{l}:")?;
        }
        writeln!(f, "  {ins}")?;
    }
    Ok(())
}

impl fmt::Display for MacroProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.main.instrs.is_empty() {
            write_block(f, &self.main)?;
        }
        if let Some(b) = &self.synth {
            writeln!(f, ".synth")?;
            write_block(f, b)?;
        }
        if let Some(b) = &self.compute {
            writeln!(f, ".compute")?;
            write_block(f, b)?;
        }
        for (n, b) in &self.subs {
            writeln!(f, ".sub {n}")?;
            write_block(f, b)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assemble_examples() {
        let p = assemble_macro("cmporc {2}\nhalt r").unwrap();
        assert_eq!(p.main.instrs.len(), 2);
        let e = assemble_macro("halt").unwrap_err();
        assert_eq!(e.token, 1);
        assert_eq!(e.line, 1);
    }

    #[test]
    fn roundtrip() {
        let text = "\
# comment
  rel x
loop:
  proj y x 0
  d0 t \"(all y in x0)(y = {})\" x0=y
  jz t done
  jmp loop
done:
  halt {0}
.synth
  out {1, w}
  halt 1
.sub helper
  halt 0
";
        let p = assemble_macro(text).unwrap();
        let again = assemble_macro(&p.to_string()).unwrap();
        assert_eq!(again, p);
        assert_eq!(again.to_string(), p.to_string());
    }

    #[test]
    fn rejects_bad_programs() {
        assert!(assemble_macro("jmp nowhere").is_err());
        assert!(assemble_macro("mov x {1}").is_err());
        assert!(assemble_macro("call r nosub x y\nhalt r").is_err());
        assert!(assemble_macro("frob x\nhalt 1").is_err());
        assert!(assemble_macro("halt 1\n.compute\nhalt 1").is_err());
    }
}
