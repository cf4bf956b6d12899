use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rrealize::formula::{classify, eval_bounded, eval_over_universe, parse_formula, Formula};
use rrealize::hfset::{universe, HfSet};
use rrealize::kp::{self, AxiomInstance, EmissionResult};
use rrealize::ordinal::{ord_cmp, Ordinal};
use rrealize::ordset::{project, OrdSet, Side};
use rrealize::otm::{assemble, library, run_program, Program, RunResult, DEFAULT_FUEL};
use rrealize::proofcalc::{check_proof, extract, ExtractionEnv, Proof, ProofCheck};
use rrealize::realizability::{
    canonical_realizer, check, serialize, CheckContext, CheckVerdict, Realizer,
};
use rrealize::recognizer::{
    chain_package, mutants, test_recognizer, CandidatePool, RecognitionVerdict, Recognizer,
};
use rrealize::selftest;
use rrealize::setcode::{decode, derived_code, encode, SetCode};

const OK: u8 = 0;
const REFUTED: u8 = 1;
const UNKNOWN: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rrealize",
    version,
    about = "Recognizability-based realizability on hereditarily finite sets"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Quantifiers range over the sets of rank at most this.
    #[arg(long, global = true, default_value_t = 3)]
    universe_rank: usize,
    /// Macro-step budget per run.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    fuel: u64,
    /// Extra candidates, one set per line.
    #[arg(long = "pool", global = true)]
    pools: Vec<PathBuf>,
    /// Seed recorded in the manifest of randomized commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize an ordinal expression such as `w*2 + 3`.
    Ord {
        expr: String,
        /// Compare with a second expression.
        #[arg(long)]
        cmp: Option<String>,
    },
    /// Set codes.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Ordinal machine programs.
    #[command(subcommand)]
    Otm(OtmCmd),
    /// Recognizers.
    #[command(subcommand)]
    Rec(RecCmd),
    /// Formulas of the membership language.
    #[command(subcommand)]
    Formula(FormulaCmd),
    /// Realizers.
    #[command(subcommand)]
    Realize(RealizeCmd),
    /// Realizers for the axioms of KP and choice.
    #[command(subcommand)]
    Kp(KpCmd),
    /// Hilbert-style proofs.
    #[command(subcommand)]
    Proof(ProofCmd),
    /// Run the acceptance suites.
    Selftest {
        /// Run only these criteria (1-based).
        #[arg(long)]
        only: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum CodeCmd {
    /// The canonical code of a set.
    Encode { set: String },
    /// The set a code describes.
    Decode { code: String },
    /// The code of the member at `index` of a coded set.
    Derive { code: String, index: String },
}

#[derive(Subcommand)]
enum OtmCmd {
    /// Assemble a micro program and print it back in canonical form.
    Assemble { file: String },
    /// Run a program on an oracle and report how it halted.
    Run {
        file: String,
        #[arg(long, default_value = "{}")]
        oracle: String,
        #[arg(long, default_value = "{}")]
        param: String,
    },
}

#[derive(Args)]
struct RecArgs {
    /// Program file, or `@name` for a library program.
    #[arg(long)]
    program: String,
    #[arg(long, default_value = "{}")]
    param: String,
    /// Candidates are read relative to this set.
    #[arg(long)]
    relative: Option<String>,
    /// Add this set and its mutants to the pool.
    #[arg(long)]
    around: Option<String>,
    #[arg(long, default_value_t = 8)]
    mutants: usize,
}

#[derive(Subcommand)]
enum RecCmd {
    /// Which pool candidate, if any, the program recognizes.
    Test(RecArgs),
    /// The recognition code of a program and parameter.
    Rho(RecArgs),
    /// Package a chain; each line of the file is `program param target`.
    Chain {
        file: PathBuf,
        #[arg(long)]
        base: Option<String>,
        #[arg(long, default_value_t = 8)]
        mutants: usize,
    },
}

#[derive(Args)]
struct FormulaIn {
    /// Formula text.
    text: Option<String>,
    /// Read the formula from a file instead.
    #[arg(long = "formula")]
    file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FormulaCmd {
    /// Parse and print back in normal form.
    Parse(FormulaIn),
    /// Delta0, Sigma_n or Pi_n.
    Classify(FormulaIn),
    /// Truth over the universe.
    Eval(FormulaIn),
}

#[derive(Subcommand)]
enum RealizeCmd {
    /// Decide whether a realizer realizes a sentence.
    Check {
        #[command(flatten)]
        formula: FormulaIn,
        #[arg(long)]
        realizer: PathBuf,
    },
    /// The default realizer of a true sentence.
    Canonical(FormulaIn),
    /// Print the wire form of a realizer.
    Serialize {
        #[arg(long)]
        realizer: PathBuf,
    },
}

#[derive(Subcommand)]
enum KpCmd {
    /// Emit and verify a realizer for one axiom instance.
    Emit {
        /// extensionality, pairing, empty-set, union, infinity, separation,
        /// replacement, induction or choice.
        axiom: String,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        y: Option<String>,
        #[arg(long)]
        phi: Option<String>,
        /// Formula parameter `name=set`.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Write the bundle into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ProofCmd {
    /// Check every step of a proof file.
    Check { file: PathBuf },
    /// Build a realizer for the conclusion from realized premises.
    Extract {
        file: PathBuf,
        /// Premise files: a `formula <text>` line, then the realizer.
        #[arg(long, num_args = 1..)]
        premises: Vec<PathBuf>,
    },
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Serialize)]
struct RunManifest {
    command: String,
    inputs: Vec<String>,
    universe_rank: usize,
    fuel: u64,
    pools: Vec<String>,
    seed: Option<u64>,
}

struct Report {
    manifest: RunManifest,
    fields: Vec<(String, String)>,
    json: bool,
}

impl Report {
    fn new(g: &Global, command: &str, inputs: Vec<String>) -> Self {
        Report {
            manifest: RunManifest {
                command: command.into(),
                inputs,
                universe_rank: g.universe_rank,
                fuel: g.fuel,
                pools: g.pools.iter().map(|p| p.display().to_string()).collect(),
                seed: g.seed,
            },
            fields: Vec::new(),
            json: g.json,
        }
    }

    fn put(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.fields.push((k.into(), v.to_string()));
        self
    }

    fn emit(&self) {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        if self.json {
            let fields: serde_json::Map<String, serde_json::Value> = self
                .fields
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect();
            let doc = serde_json::json!({ "generated_at": stamp, "manifest": self.manifest, "result": fields });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("reports serialize")
            );
            return;
        }
        println!("# rrealize report, generated at {stamp}");
        let m = &self.manifest;
        println!("command = {}", m.command);
        for i in &m.inputs {
            println!("input = {i}");
        }
        println!("universe-rank = {}", m.universe_rank);
        println!("fuel = {}", m.fuel);
        for p in &m.pools {
            println!("pool = {p}");
        }
        if let Some(s) = m.seed {
            println!("seed = {s}");
        }
        for (k, v) in &self.fields {
            if v.contains('\n') {
                println!("{k} =");
                for line in v.lines() {
                    println!("  {line}");
                }
            } else {
                println!("{k} = {v}");
            }
        }
    }
}

/// A failure the user can fix; reported with exit code 3.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type Outcome = Result<u8, Usage>;

fn read(path: &Path) -> Result<String, Usage> {
    fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn set(text: &str, what: &str) -> Result<OrdSet, Usage> {
    text.parse().map_err(|e| Usage(format!("{what}: {e}")))
}

fn hf(text: &str, what: &str) -> Result<HfSet, Usage> {
    text.parse().map_err(|e| Usage(format!("{what}: {e}")))
}

fn load_program(arg: &str) -> Result<Program, Usage> {
    match arg.strip_prefix('@') {
        Some(name) => library::library_program(name)
            .map(|p| (*p).clone())
            .ok_or_else(|| Usage(format!("no library program `{name}`"))),
        None => Ok(assemble(&read(Path::new(arg))?).map_err(|e| Usage(format!("{arg}: {e}")))?),
    }
}

impl FormulaIn {
    /// The file the formula came from, or its text.
    fn source(&self, f: &Formula) -> String {
        self.file
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| f.to_string())
    }
}

fn formula_of(fi: &FormulaIn) -> Result<Formula, Usage> {
    let text = match (&fi.text, &fi.file) {
        (Some(t), None) => t.clone(),
        (None, Some(p)) => read(p)?,
        _ => {
            return Err(Usage(
                "give the formula either inline or with --formula".into(),
            ))
        }
    };
    Ok(parse_formula(text.trim())?)
}

fn realizer_from(text: &str, base: &Path) -> Result<Realizer, Usage> {
    let dir = base.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut load = |p: &str| -> Result<Program, String> {
        let path = dir.join(p);
        let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        assemble(&text).map_err(|e| e.to_string())
    };
    Ok(Realizer::parse_text(text, &mut load)?)
}

/// Realizer text; programs outside the library are written next to `dir`.
fn realizer_text(r: &Realizer, dir: Option<&Path>) -> String {
    let mut n = 0;
    let mut name = |p: &rrealize::realizability::ProgRef| {
        n += 1;
        let file = format!("program{n}.otm");
        if let Some(d) = dir {
            let _ = fs::write(d.join(&file), p.program().disassemble());
        }
        file
    };
    r.to_text(&mut name)
}

fn pool(g: &Global) -> Result<CandidatePool, Usage> {
    let mut out = CandidatePool::new();
    for p in &g.pools {
        let parsed: CandidatePool = read(p)?
            .parse()
            .map_err(|e| Usage(format!("{}: {e}", p.display())))?;
        out.extend(parsed.iter().cloned());
    }
    Ok(out)
}

fn context(g: &Global) -> Result<CheckContext, Usage> {
    let mut ctx = CheckContext::new(universe(g.universe_rank), g.fuel);
    ctx.pool.extend(pool(g)?.iter().cloned());
    Ok(ctx)
}

fn verdict_code(v: &CheckVerdict) -> u8 {
    match v {
        CheckVerdict::Realized => OK,
        CheckVerdict::Refuted { .. } => REFUTED,
        CheckVerdict::Unknown { .. } => UNKNOWN,
    }
}

fn recognition_code(v: &RecognitionVerdict) -> u8 {
    match v {
        RecognitionVerdict::Recognizes(_) => OK,
        RecognitionVerdict::RejectsAll | RecognitionVerdict::Ambiguous(_) => REFUTED,
        RecognitionVerdict::Undetermined(_) => UNKNOWN,
    }
}

// ---------------------------------------------------------------------------
// Commands

fn ord(g: &Global, expr: &str, cmp: Option<&str>) -> Outcome {
    let a: Ordinal = expr.parse()?;
    let mut rep = Report::new(g, "ord", vec![expr.into()]);
    rep.put("normal-form", &a);
    if let Some(c) = cmp {
        let b: Ordinal = c.parse()?;
        let sign = match ord_cmp(&a, &b) {
            std::cmp::Ordering::Less => "<",
            std::cmp::Ordering::Equal => "=",
            std::cmp::Ordering::Greater => ">",
        };
        rep.put("compare", format!("{a} {sign} {b}"));
    }
    if g.json {
        rep.emit();
    } else {
        println!("{a}");
        if let Some((_, c)) = rep.fields.iter().find(|(k, _)| k == "compare") {
            println!("{c}");
        }
    }
    Ok(OK)
}

fn code(g: &Global, cmd: &CodeCmd) -> Outcome {
    match cmd {
        CodeCmd::Encode { set } => {
            let x = hf(set, "set")?;
            let c = encode(&x);
            let mut rep = Report::new(g, "code encode", vec![set.clone()]);
            rep.put("set", &x)
                .put("domain", &c.domain_size)
                .put("code", &c.code);
            rep.emit();
        }
        CodeCmd::Decode { code } => {
            let c = SetCode::from_ordset(set(code, "code")?)?;
            let x = decode(&c)?;
            let mut rep = Report::new(g, "code decode", vec![code.clone()]);
            rep.put("set", &x);
            rep.emit();
        }
        CodeCmd::Derive { code, index } => {
            let c = SetCode::from_ordset(set(code, "code")?)?;
            let i: Ordinal = index.parse()?;
            let d = derived_code(&c, &i)?;
            let mut rep = Report::new(g, "code derive", vec![code.clone(), index.clone()]);
            rep.put("code", &d.code)
                .put("domain", &d.domain_size)
                .put("set", decode(&d)?);
            rep.emit();
        }
    }
    Ok(OK)
}

fn otm(g: &Global, cmd: &OtmCmd) -> Outcome {
    match cmd {
        OtmCmd::Assemble { file } => {
            let p = load_program(file)?;
            let mut rep = Report::new(g, "otm assemble", vec![file.clone()]);
            rep.put("program", p.disassemble().trim_end());
            if let Some(n) = library::library_name_of(&library::program_godel(&p)) {
                rep.put("library-name", n);
            }
            rep.emit();
            Ok(OK)
        }
        OtmCmd::Run {
            file,
            oracle,
            param,
        } => {
            let p = load_program(file)?;
            let r = run_program(&p, &set(oracle, "oracle")?, &set(param, "param")?, g.fuel)?;
            let mut rep = Report::new(
                g,
                "otm run",
                vec![file.clone(), oracle.clone(), param.clone()],
            );
            rep.put("status", r.status()).put("steps", r.steps());
            if let RunResult::Halted {
                output_bit,
                output_set,
                ..
            } = &r
            {
                rep.put("output-bit", u8::from(*output_bit))
                    .put("output-set", output_set);
            }
            rep.emit();
            Ok(if r.accepted().is_some() { OK } else { UNKNOWN })
        }
    }
}

fn rec_setup(
    g: &Global,
    a: &RecArgs,
) -> Result<(Recognizer, CandidatePool, Option<OrdSet>), Usage> {
    let r = Recognizer::new(load_program(&a.program)?, set(&a.param, "param")?);
    let mut p = pool(g)?;
    if let Some(w) = &a.around {
        let w = set(w, "around")?;
        p.push(w.clone());
        p.extend(mutants(&w, a.mutants));
    }
    if p.is_empty() {
        return Err(Usage("the pool is empty; give --pool or --around".into()));
    }
    let rel = a
        .relative
        .as_deref()
        .map(|t| set(t, "relative"))
        .transpose()?;
    Ok((r, p, rel))
}

fn rec(g: &Global, cmd: &RecCmd) -> Outcome {
    match cmd {
        RecCmd::Test(a) | RecCmd::Rho(a) => {
            let (r, p, rel) = rec_setup(g, a)?;
            let v = test_recognizer(&r, &p, rel.as_ref(), g.fuel);
            let name = if matches!(cmd, RecCmd::Test(_)) {
                "rec test"
            } else {
                "rec rho"
            };
            let mut rep = Report::new(g, name, vec![a.program.clone(), a.param.clone()]);
            rep.put("pool-size", p.len()).put("verdict", &v);
            if let (RecognitionVerdict::Recognizes(z), RecCmd::Rho(_)) = (&v, cmd) {
                rep.put("rho0", project(z, Side::Even))
                    .put("rho1", project(z, Side::Odd));
            }
            rep.emit();
            if !g.json && matches!(cmd, RecCmd::Test(_)) {
                // The bare verdict closes the report, for scripts.
                println!("{v}");
            }
            Ok(recognition_code(&v))
        }
        RecCmd::Chain {
            file,
            base,
            mutants: n,
        } => {
            let mut links = Vec::new();
            for (i, line) in read(file)?.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let parts: Vec<&str> = line.splitn(3, char::is_whitespace).collect();
                let [prog, param, target] = parts[..] else {
                    return Err(Usage(format!(
                        "{}:{}: expected `program param target`",
                        file.display(),
                        i + 1
                    )));
                };
                links.push((
                    Recognizer::new(load_program(prog)?, set(param, "param")?),
                    set(target.trim(), "target")?,
                ));
            }
            let base = base.as_deref().map(|b| set(b, "base")).transpose()?;
            let (composite, z) = chain_package(&links, base.as_ref())?;
            let mut p = pool(g)?;
            p.push(z.clone());
            p.extend(mutants(&z, *n));
            let v = test_recognizer(
                &composite,
                &p,
                Some(&base.clone().unwrap_or_default()),
                g.fuel,
            );
            let mut rep = Report::new(g, "rec chain", vec![file.display().to_string()]);
            rep.put("links", links.len())
                .put("package", &z)
                .put("pool-size", p.len())
                .put("verdict", &v);
            rep.emit();
            Ok(recognition_code(&v))
        }
    }
}

fn formula(g: &Global, cmd: &FormulaCmd) -> Outcome {
    match cmd {
        FormulaCmd::Parse(fi) => {
            let f = formula_of(fi)?;
            let mut rep = Report::new(g, "formula parse", vec![f.to_string()]);
            rep.put("formula", &f)
                .put("free", format!("{:?}", f.free_vars()));
            rep.emit();
        }
        FormulaCmd::Classify(fi) => {
            let f = formula_of(fi)?;
            let mut rep = Report::new(g, "formula classify", vec![f.to_string()]);
            rep.put("class", classify(&f));
            rep.emit();
        }
        FormulaCmd::Eval(fi) => {
            let f = formula_of(fi)?;
            if !f.is_sentence() {
                return Err(Usage(format!(
                    "`{f}` has free variables {:?}",
                    f.free_vars()
                )));
            }
            let (value, how) = if f.is_delta0() {
                (eval_bounded(&f, &BTreeMap::new(), g.fuel)?, "bounded")
            } else {
                (
                    eval_over_universe(&f, &universe(g.universe_rank), &BTreeMap::new())?,
                    "universe",
                )
            };
            let mut rep = Report::new(g, "formula eval", vec![f.to_string()]);
            rep.put("evaluation", how).put("value", value);
            rep.emit();
        }
    }
    Ok(OK)
}

fn realize(g: &Global, cmd: &RealizeCmd) -> Outcome {
    match cmd {
        RealizeCmd::Check { formula, realizer } => {
            let f = formula_of(formula)?;
            let r = realizer_from(&read(realizer)?, realizer)?;
            let ctx = context(g)?;
            let v = check(&r, &f, &ctx);
            let mut rep = Report::new(
                g,
                "realize check",
                vec![formula.source(&f), realizer.display().to_string()],
            );
            rep.put("realizer", &r).put("verdict", v.label());
            if let CheckVerdict::Refuted { reason, path } | CheckVerdict::Unknown { reason, path } =
                &v
            {
                rep.put("reason", reason).put("path", path.join("/"));
            }
            rep.emit();
            Ok(verdict_code(&v))
        }
        RealizeCmd::Canonical(fi) => {
            let f = formula_of(fi)?;
            let r = canonical_realizer(&f)?;
            let mut rep = Report::new(g, "realize canonical", vec![f.to_string()]);
            rep.put("realizer", realizer_text(&r, None).trim_end());
            rep.emit();
            Ok(OK)
        }
        RealizeCmd::Serialize { realizer } => {
            let r = realizer_from(&read(realizer)?, realizer)?;
            let mut rep = Report::new(g, "realize serialize", vec![realizer.display().to_string()]);
            rep.put("serialization", serialize(&r));
            rep.emit();
            Ok(OK)
        }
    }
}

fn kp_instance(
    axiom: &str,
    x: Option<&str>,
    y: Option<&str>,
    phi: Option<&str>,
    params: &[String],
) -> Result<AxiomInstance, Usage> {
    let need = |v: Option<&str>, flag: &str| -> Result<HfSet, Usage> {
        hf(
            v.ok_or_else(|| Usage(format!("{axiom} needs --{flag}")))?,
            flag,
        )
    };
    let phi = || -> Result<Formula, Usage> {
        Ok(parse_formula(
            phi.ok_or_else(|| Usage(format!("{axiom} needs --phi")))?,
        )?)
    };
    let mut env = BTreeMap::new();
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| Usage(format!("--param expects name=set, got `{p}`")))?;
        env.insert(k.to_string(), hf(v, "param")?);
    }
    Ok(match axiom {
        "extensionality" => AxiomInstance::Extensionality(need(x, "x")?, need(y, "y")?),
        "pairing" => AxiomInstance::Pairing(need(x, "x")?, need(y, "y")?),
        "empty-set" => AxiomInstance::EmptySet,
        "union" => AxiomInstance::Union(need(x, "x")?),
        "infinity" => AxiomInstance::Infinity,
        "separation" => AxiomInstance::Delta0Separation {
            phi: phi()?,
            params: env,
            domain: need(x, "x")?,
        },
        "replacement" => AxiomInstance::Replacement {
            phi: phi()?,
            params: env,
            domain: need(x, "x")?,
        },
        "induction" => AxiomInstance::EpsilonInduction {
            phi: phi()?,
            params: env,
            target: need(x, "x")?,
        },
        "choice" => AxiomInstance::Choice(need(x, "x")?),
        other => return Err(Usage(format!("unknown axiom `{other}`"))),
    })
}

fn kp_emit(g: &Global, ax: &AxiomInstance, out: Option<&Path>) -> Outcome {
    let mut rep = Report::new(g, "kp emit", vec![ax.to_string()]);
    if *ax == AxiomInstance::Infinity {
        let (f, omega) = kp::emit_infinity();
        let windows_ok =
            (0..8).all(|n| decode(&omega.window(n)).ok() == Some(HfSet::nat(n as usize)));
        rep.put("formula", &f)
            .put("witness", "symbolic code of omega, domain w")
            .put(
                "finite-windows",
                if windows_ok {
                    "code the naturals 0..7"
                } else {
                    "MISMATCH"
                },
            )
            .put(
                "verdict",
                "unknown (the witness is not hereditarily finite)",
            );
        rep.emit();
        return Ok(if windows_ok { UNKNOWN } else { REFUTED });
    }
    let ctx = context(g)?;
    let emitted: EmissionResult = match ax {
        AxiomInstance::Replacement {
            phi,
            params,
            domain,
        } => {
            let ante = kp::replacement_antecedent(phi, params, domain, &ctx.universe).ok_or_else(
                || {
                    Usage(
                        "no witness in the universe for some member; raise --universe-rank".into(),
                    )
                },
            )?;
            kp::emit_replacement(phi, params, domain, &ante, &ctx)?.result
        }
        AxiomInstance::EpsilonInduction {
            phi,
            params,
            target,
        } => {
            let premise = kp::induction_premise(phi, params).ok_or_else(|| {
                Usage("induction premises are generated for bounded formulas only".into())
            })?;
            let ind = kp::emit_induction(phi, params, target, &premise, &ctx)?;
            rep.put("table-rows", ind.table.len());
            ind.result
        }
        AxiomInstance::Choice(family) => {
            if let Some(e) = family.members().find(|m| m.is_empty()) {
                rep.put("axiom", ax.name()).put("verdict", "refuted").put(
                    "reason",
                    format!("member {e} is empty, so the premise fails"),
                );
                rep.emit();
                return Ok(REFUTED);
            }
            let premise = kp::choice_premise(family, &ctx.universe).ok_or_else(|| {
                Usage("some member has no element in the universe; raise --universe-rank".into())
            })?;
            kp::emit_choice(family, &premise, &ctx)?
        }
        basic => kp::emit_basic(basic)?,
    };
    let mut ctx = emitted.context(g.universe_rank, g.fuel);
    ctx.pool.extend(pool(g)?.iter().cloned());
    let v = emitted.check(&ctx);
    rep.put("formula", &emitted.formula)
        .put("realizer", &emitted.realizer)
        .put("verdict", v.label());
    if let Some(y) = emitted.decoded() {
        rep.put("witness-set", y);
    }
    let mut code = verdict_code(&v);
    for (w, wv) in emitted.witness_verdicts(g.fuel) {
        let exact = wv == RecognitionVerdict::Recognizes(w.value.clone());
        rep.put(
            &format!("witness-{}", w.description),
            if exact {
                "recognized uniquely".to_string()
            } else {
                wv.to_string()
            },
        );
        if !exact {
            code = code.max(recognition_code(&wv).max(REFUTED));
        }
    }
    rep.put("pool-size", emitted.mutation_pool.len());
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join("realizer.rlz"),
            realizer_text(&emitted.realizer, Some(dir)),
        )?;
        fs::write(dir.join("formula.fml"), format!("{}\n", emitted.formula))?;
        fs::write(dir.join("pool.txt"), emitted.mutation_pool.to_string())?;
        let mut manifest =
            String::from("# check the realizer, then each witness against the pool\n");
        manifest.push_str(&format!(
            "rrealize realize check --formula formula.fml --realizer realizer.rlz --pool pool.txt --universe-rank {} --fuel {}\n",
            g.universe_rank, g.fuel
        ));
        for w in &emitted.witnesses {
            let file = format!("witness-{}.set", w.description);
            fs::write(dir.join(&file), format!("{}\n", w.value))?;
            let prog =
                match library::library_name_of(&library::program_godel(&w.recognizer.program)) {
                    Some(name) => format!("@{name}"),
                    None => {
                        let file = format!("witness-{}.otm", w.description);
                        fs::write(dir.join(&file), w.recognizer.program.disassemble())?;
                        file
                    }
                };
            let rel = w
                .relative_to
                .as_ref()
                .map(|r| format!(" --relative '{r}'"))
                .unwrap_or_default();
            manifest.push_str(&format!(
                "rrealize rec test --program {prog} --param '{}'{rel} --pool pool.txt --fuel {}  # expect {file}\n",
                w.recognizer.param, g.fuel
            ));
        }
        fs::write(dir.join("verify.manifest"), manifest)?;
        rep.put("bundle", dir.display());
    }
    rep.emit();
    Ok(code)
}

fn proof(g: &Global, cmd: &ProofCmd) -> Outcome {
    match cmd {
        ProofCmd::Check { file } => {
            let p: Proof = read(file)?.parse()?;
            let mut rep = Report::new(g, "proof check", vec![file.display().to_string()]);
            let code = match check_proof(&p) {
                ProofCheck::Valid(fs) => {
                    for (i, f) in fs.iter().enumerate() {
                        rep.put(&format!("step-{}", i + 1), f);
                    }
                    rep.put("result", "valid");
                    OK
                }
                ProofCheck::Invalid { step, reason } => {
                    rep.put("result", "invalid")
                        .put("step", step)
                        .put("reason", reason);
                    REFUTED
                }
            };
            rep.emit();
            Ok(code)
        }
        ProofCmd::Extract { file, premises } => {
            let p: Proof = read(file)?.parse()?;
            let mut env = ExtractionEnv::new(context(g)?);
            for path in premises {
                let text = read(path)?;
                let (head, body) = text.split_once('\n').unwrap_or((&text, ""));
                let f = head.trim().strip_prefix("formula ").ok_or_else(|| {
                    Usage(format!(
                        "{}: first line must be `formula <text>`",
                        path.display()
                    ))
                })?;
                env.premise_realizers
                    .insert(parse_formula(f)?, realizer_from(body, path)?);
            }
            let conclusion = match check_proof(&p) {
                ProofCheck::Valid(fs) => fs.last().cloned().expect("valid proofs are nonempty"),
                ProofCheck::Invalid { step, reason } => {
                    let mut rep = Report::new(g, "proof extract", vec![file.display().to_string()]);
                    rep.put("result", "invalid")
                        .put("step", step)
                        .put("reason", reason);
                    rep.emit();
                    return Ok(REFUTED);
                }
            };
            let mut rep = Report::new(g, "proof extract", vec![file.display().to_string()]);
            match extract(&p, &mut env) {
                Ok(r) => {
                    let v = check(&r, &conclusion, &env.ctx);
                    rep.put("conclusion", &conclusion)
                        .put("realizer", realizer_text(&r, None).trim_end())
                        .put("verdict", v.label());
                    rep.emit();
                    Ok(verdict_code(&v))
                }
                Err(e) => {
                    rep.put("conclusion", &conclusion).put("error", &e);
                    rep.emit();
                    Ok(UNKNOWN)
                }
            }
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Ord { expr, cmp } => ord(g, expr, cmp.as_deref()),
        Command::Code(c) => code(g, c),
        Command::Otm(c) => otm(g, c),
        Command::Rec(c) => rec(g, c),
        Command::Formula(c) => formula(g, c),
        Command::Realize(c) => realize(g, c),
        Command::Kp(KpCmd::Emit {
            axiom,
            x,
            y,
            phi,
            params,
            out,
        }) => {
            let ax = kp_instance(axiom, x.as_deref(), y.as_deref(), phi.as_deref(), params)?;
            kp_emit(g, &ax, out.as_deref())
        }
        Command::Proof(c) => proof(g, c),
        Command::Selftest { only } => {
            let mut all = true;
            for c in selftest::run(only) {
                println!("{c}");
                all &= c.passed;
            }
            Ok(if all { OK } else { REFUTED })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE)
        }
    }
}
