//! Goedel numbering of program texts, the program cache, the wire format
//! shared by realizers and lists, and the library of realizer programs.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{assemble, Program};
use crate::ordinal::Ordinal;
use crate::ordset::OrdSet;

/// Tagged sums over sets of ordinals: the tag sits in the even half as a
/// singleton natural, the payload in the odd half.
pub mod wire {
    use crate::ordset::{interleave, project, OrdSet, Side};

    pub fn tagged(tag: u64, payload: &OrdSet) -> OrdSet {
        interleave(&OrdSet::from_nats([tag]), payload)
    }

    /// Splits a tagged value into its tag and payload.
    pub fn untag(x: &OrdSet) -> Option<(u64, OrdSet)> {
        let t = project(x, Side::Even).as_nat()?;
        Some((t, project(x, Side::Odd)))
    }

    pub fn ilv(a: &OrdSet, b: &OrdSet) -> OrdSet {
        interleave(a, b)
    }

    pub fn halves(x: &OrdSet) -> (OrdSet, OrdSet) {
        (project(x, Side::Even), project(x, Side::Odd))
    }

    /// `x (+) {}`: the form in which realizers are handed to programs and
    /// in which programs hand them back.
    pub fn pack(x: &OrdSet) -> OrdSet {
        interleave(x, &OrdSet::new())
    }

    pub fn empty() -> OrdSet {
        tagged(0, &OrdSet::new())
    }

    pub fn leaf(s: &OrdSet) -> OrdSet {
        tagged(1, s)
    }

    pub fn pair(a: &OrdSet, b: &OrdSet) -> OrdSet {
        tagged(2, &interleave(a, b))
    }

    pub fn choice(i: u64, r: &OrdSet) -> OrdSet {
        choice_raw(&OrdSet::from_nats([i]), r)
    }

    pub fn choice_raw(i: &OrdSet, r: &OrdSet) -> OrdSet {
        tagged(3, &interleave(i, r))
    }

    pub fn progparam(g: &OrdSet, q: &OrdSet) -> OrdSet {
        tagged(4, &interleave(g, q))
    }

    pub fn as_progparam(x: &OrdSet) -> Option<(OrdSet, OrdSet)> {
        match untag(x)? {
            (4, p) => Some(halves(&p)),
            _ => None,
        }
    }

    // A list is tagged with its length and carries its items in a balanced
    // interleaving tree, so nesting depth grows with log(length) only.

    pub fn nil() -> OrdSet {
        tagged(0, &OrdSet::new())
    }

    fn tree(items: &[OrdSet]) -> OrdSet {
        match items {
            [] => OrdSet::new(),
            [x] => x.clone(),
            _ => {
                let (l, r) = items.split_at(items.len().div_ceil(2));
                interleave(&tree(l), &tree(r))
            }
        }
    }

    fn untree(t: &OrdSet, n: usize, out: &mut Vec<OrdSet>) {
        match n {
            0 => {}
            1 => out.push(t.clone()),
            _ => {
                let (l, r) = halves(t);
                let k = n.div_ceil(2);
                untree(&l, k, out);
                untree(&r, n - k, out);
            }
        }
    }

    /// `None` when `t` is not a list.
    pub fn cons(h: &OrdSet, t: &OrdSet) -> Option<OrdSet> {
        let mut items = unlist(t)?;
        items.insert(0, h.clone());
        Some(list(items))
    }

    /// `Some(None)` for nil, `Some(Some((head, tail)))` for a nonempty list,
    /// `None` for anything else.
    pub fn uncons(l: &OrdSet) -> Option<Option<(OrdSet, OrdSet)>> {
        let mut items = unlist(l)?;
        if items.is_empty() {
            return Some(None);
        }
        let h = items.remove(0);
        Some(Some((h, list(items))))
    }

    pub fn list<I: IntoIterator<Item = OrdSet>>(items: I) -> OrdSet {
        let items: Vec<OrdSet> = items.into_iter().collect();
        tagged(items.len() as u64, &tree(&items))
    }

    pub fn unlist(l: &OrdSet) -> Option<Vec<OrdSet>> {
        let (n, payload) = untag(l)?;
        if n == 0 && !payload.is_empty() {
            return None;
        }
        let mut out = Vec::with_capacity(n as usize);
        untree(&payload, n as usize, &mut out);
        Some(out)
    }
}

/// `{256*i + byte_i}`.
pub fn godel_text(text: &str) -> OrdSet {
    text.bytes()
        .enumerate()
        .map(|(i, b)| Ordinal::Fin(256 * i as u64 + u64::from(b)))
        .collect()
}

pub fn text_from_godel(g: &OrdSet) -> Option<String> {
    let mut bytes = Vec::with_capacity(g.len());
    for (i, o) in g.iter().enumerate() {
        let n = o.as_finite()?;
        if n / 256 != i as u64 {
            return None;
        }
        bytes.push((n % 256) as u8);
    }
    String::from_utf8(bytes).ok()
}

fn cache() -> &'static Mutex<HashMap<OrdSet, Option<Arc<Program>>>> {
    static CACHE: OnceLock<Mutex<HashMap<OrdSet, Option<Arc<Program>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The program whose text has Goedel number `g`, if it assembles.
pub fn program_from_godel(g: &OrdSet) -> Option<Arc<Program>> {
    if let Some(hit) = cache().lock().expect("program cache").get(g) {
        return hit.clone();
    }
    let p = text_from_godel(g)
        .and_then(|t| assemble(&t).ok())
        .map(Arc::new);
    cache()
        .lock()
        .expect("program cache")
        .insert(g.clone(), p.clone());
    p
}

/// Goedel number of a program's canonical text.
pub fn program_godel(p: &Program) -> OrdSet {
    let g = godel_text(&p.disassemble());
    cache()
        .lock()
        .expect("program cache")
        .entry(g.clone())
        .or_insert_with(|| Some(Arc::new(p.clone())));
    g
}

struct Entry {
    program: Arc<Program>,
    godel: OrdSet,
}

fn library() -> &'static HashMap<&'static str, Entry> {
    static LIB: OnceLock<HashMap<&'static str, Entry>> = OnceLock::new();
    LIB.get_or_init(|| {
        SOURCES
            .iter()
            .map(|(name, src)| {
                let program =
                    assemble(src).unwrap_or_else(|e| panic!("library program `{name}`: {e}"));
                let godel = program_godel(&program);
                (
                    *name,
                    Entry {
                        program: Arc::new(program),
                        godel,
                    },
                )
            })
            .collect()
    })
}

pub fn library_program(name: &str) -> Option<Arc<Program>> {
    library().get(name).map(|e| e.program.clone())
}

pub fn library_godel(name: &str) -> Option<OrdSet> {
    library().get(name).map(|e| e.godel.clone())
}

pub fn library_names() -> Vec<&'static str> {
    SOURCES.iter().map(|(n, _)| *n).collect()
}

/// Name of the library program with Goedel number `g`, for reports.
pub fn library_name_of(g: &OrdSet) -> Option<&'static str> {
    library()
        .iter()
        .find(|(_, e)| &e.godel == g)
        .map(|(n, _)| *n)
}

/// Realizers travel as `pack(ser r)`; programs that answer with a realizer
/// put its serialization in the even half of their output.
/// Shared ending of the set-existence programs: realize the body `f` at the
/// computed code `c` and package both.
macro_rules! witness_tail {
    () => {
        "  subst g f w c\n  bt s g\n  ilv x c s\n  ilv z x {}\n  out z\n  halt 1\n"
    };
}

const SOURCES: &[(&str, &str)] = &[
    // Recognizes its parameter, whatever the oracle.
    ("rc", ".compute\n  param q\n  out q\n  halt 1\n"),
    ("reject", ".compute\n  halt 0\n"),
    // Hands back the realizer it is given.
    ("ident", ".compute\n  rel x\n  proj s x 0\n  ilv z s {}\n  out z\n  halt 1\n"),
    // phi -> (psi -> phi): answer with "always recognize r".
    (
        "k1",
        ".compute
  rel x
  proj r x 0
  ilv pk r {}
  quote g rc
  mkpp pp g pk
  ilv z pp {}
  out z
  halt 1
",
    ),
    (
        "k2a",
        ".compute
  rel x
  proj r x 0
  quote g k2b
  mkpp pp g r
  ilv z pp {}
  out z
  halt 1
",
    ),
    (
        "k2b",
        ".compute
  param r
  rel x
  proj s x 0
  ilv q r s
  quote g k2c
  mkpp pp g q
  ilv z pp {}
  out z
  halt 1
",
    ),
    // Parameter r (+) s, input t. Works right to left: Zr = rho(r, t),
    // Zs = rho(s, t), then Zc = rho(Zr_0, Zs_0); the answer packages
    // Zc_0 (+) (Zc (+) (Zs (+) Zr)).
    (
        "k2c",
        "  param q
  proj r q 0
  proj s q 1
  rel x
  proj t x 0
  ilv tr t {}
  cand z
  proj z0 z 0
  proj w z 1
  proj zc w 0
  proj w2 w 1
  proj zs w2 0
  proj zr w2 1
  run ok r tr zr
  jz ok no
  run ok s tr zs
  jz ok no
  proj tp zr 0
  proj sp zs 0
  ilv spr sp {}
  run ok tp spr zc
  jz ok no
  proj c0 zc 0
  eq ok z0 c0
  halt ok
no:
  halt 0
.synth
  param q
  proj r q 0
  proj s q 1
  rel x
  proj t x 0
  ilv tr t {}
  rho zr r tr
  rho zs s tr
  proj tp zr 0
  proj sp zs 0
  ilv spr sp {}
  rho zc tp spr
  proj c0 zc 0
  ilv w2 zs zr
  ilv w zc w2
  ilv z c0 w
  out z
  halt 1
",
    ),
    (
        "k3a",
        ".compute
  rel x
  proj r x 0
  quote g k3b
  mkpp pp g r
  ilv z pp {}
  out z
  halt 1
",
    ),
    (
        "k3b",
        ".compute
  param r
  rel x
  proj s x 0
  mkpair p r s
  ilv z p {}
  out z
  halt 1
",
    ),
    (
        "k4l",
        ".compute
  rel x
  proj r x 0
  proj t r 0
  eq ok t {2}
  jz ok no
  proj pl r 1
  proj a pl 0
  ilv z a {}
  out z
  halt 1
no:
  halt 0
",
    ),
    (
        "k4r",
        ".compute
  rel x
  proj r x 0
  proj t r 0
  eq ok t {2}
  jz ok no
  proj pl r 1
  proj a pl 1
  ilv z a {}
  out z
  halt 1
no:
  halt 0
",
    ),
    (
        "k5l",
        ".compute
  rel x
  proj r x 0
  mkchoice c {0} r
  ilv z c {}
  out z
  halt 1
",
    ),
    (
        "k5r",
        ".compute
  rel x
  proj r x 0
  mkchoice c {1} r
  ilv z c {}
  out z
  halt 1
",
    ),
    (
        "k6a",
        ".compute
  rel x
  proj r x 0
  quote g k6b
  mkpp pp g r
  ilv z pp {}
  out z
  halt 1
",
    ),
    // Parameter: the disjunction's realizer (i, r'); input s for the left
    // case. Left: apply s to r'. Right: wait for the right-case realizer.
    (
        "k6b",
        ".compute
  param r
  rel x
  proj s x 0
  proj t r 0
  eq ok t {3}
  jz ok no
  proj pl r 1
  proj i pl 0
  proj rp pl 1
  ilv prp rp {}
  eq left i {0}
  jz left right
  ilv q s prp
  quote g app_pp
  mkpp pp g q
  ilv z pp {}
  out z
  halt 1
right:
  quote g app_op
  mkpp pp g prp
  ilv z pp {}
  out z
  halt 1
no:
  halt 0
",
    ),
    // Applications Z = rho(F, R), answered as Z_0 (+) Z. The suffix names
    // where F and R come from: p = parameter, o = oracle.
    (
        "app_pp",
        "  param q
  proj f q 0
  proj l q 1
  cand z
  proj z0 z 0
  proj zz z 1
  run ok f l zz
  jz ok no
  proj c zz 0
  eq ok z0 c
  halt ok
no:
  halt 0
.synth
  param q
  proj f q 0
  proj l q 1
  rho zz f l
  proj c zz 0
  ilv z c zz
  out z
  halt 1
",
    ),
    (
        "app_op",
        "  rel x
  proj f x 0
  param l
  cand z
  proj z0 z 0
  proj zz z 1
  run ok f l zz
  jz ok no
  proj c zz 0
  eq ok z0 c
  halt ok
no:
  halt 0
.synth
  rel x
  proj f x 0
  param l
  rho zz f l
  proj c zz 0
  ilv z c zz
  out z
  halt 1
",
    ),
    (
        "k7a",
        ".compute
  rel x
  proj r x 0
  quote g k7b
  mkpp pp g r
  ilv z pp {}
  out z
  halt 1
",
    ),
    // Given r for phi -> psi and s for phi -> not psi, a realizer of
    // not phi composes them exactly as k2c does, with the roles swapped.
    (
        "k7b",
        ".compute
  param r
  rel x
  proj s x 0
  ilv q s r
  quote g k2c
  mkpp pp g q
  ilv z pp {}
  out z
  halt 1
",
    ),
    // Universal closure. Parameter (N (+) acc) (+) (mode (+) data), where N
    // is a list as long as the number of variables still to bind and acc
    // lists the codes bound so far, latest first. Mode 0: finish with the
    // fixed realizer `data`. Mode 1: data = g (+) base, finish with
    // program g in parameter acc (+) base.
    (
        "spine",
        ".compute
  rel c
  param q
  proj h q 0
  proj n h 0
  proj acc h 1
  proj md q 1
  lcons acc2 c acc
  ltail n2 n
  lnull last n2
  jnz last fin
  ilv h2 n2 acc2
  ilv q2 h2 md
  quote g spine
  mkpp pp g q2
  ilv z pp {}
  out z
  halt 1
fin:
  proj mode md 0
  proj data md 1
  jnz mode m1
  ilv z data {}
  out z
  halt 1
m1:
  proj g data 0
  proj base data 1
  ilv p2 acc2 base
  mkpp pp g p2
  ilv z pp {}
  out z
  halt 1
",
    ),
    // Instantiation, the instance term picked from the bound codes:
    // parameter acc (+) {index}.
    (
        "q1f",
        "  param q
  proj acc q 0
  proj ix q 1
  lnth c acc ix
  rel x
  proj f x 0
  cand z
  proj z0 z 0
  proj zz z 1
  run ok f c zz
  jz ok no
  proj w zz 0
  eq ok z0 w
  halt ok
no:
  halt 0
.synth
  param q
  proj acc q 0
  proj ix q 1
  lnth c acc ix
  rel x
  proj f x 0
  rho zz f c
  proj w zz 0
  ilv z w zz
  out z
  halt 1
",
    ),
    // Existential introduction with a constant witness code as parameter.
    (
        "q2c",
        ".compute
  param c
  rel x
  proj r x 0
  ilv w c r
  ilv pw w {}
  quote g rc
  mkpp pp g pw
  ilv z pp {}
  out z
  halt 1
",
    ),
    (
        "q2f",
        ".compute
  param q
  proj acc q 0
  proj ix q 1
  lnth c acc ix
  rel x
  proj r x 0
  ilv w c r
  ilv pw w {}
  quote g rc
  mkpp pp g pw
  ilv z pp {}
  out z
  halt 1
",
    ),
    // Equality with the parameter, read off the candidate half.
    ("releq", "  cand x\n  param c\n  eq r x c\n  halt r\n"),
    // Chain composite. Parameter flag (+) links, links listing serialized
    // recognizers L_0 .. L_{k-1}; the candidate must be
    // x_0 (+) (x_1 (+) (... (+) (x_{k-1} (+) base))) with L_i accepting x_i
    // relative to x_{i+1} and base the relative set. A nonempty flag runs
    // the last link on x_{k-1} alone.
    (
        "chain",
        "  param q
  proj fl q 0
  proj links q 1
  rel b
  cand cur
loop:
  lhead l links
  ltail links links
  proj x cur 0
  proj cur cur 1
  lnull last links
  jnz last final
  proj y cur 0
  run ok l y x
  jz ok no
  jmp loop
final:
  eq ok cur b
  jz ok no
  jz fl rellast
  runo ok l x
  halt ok
rellast:
  run ok l b x
  halt ok
no:
  halt 0
",
    ),
    // Bounded truth: the canonical realizer of a true consequent.
    ("bt_imp", ".compute\n  param g\n  bt s g\n  ilv z s {}\n  out z\n  halt 1\n"),
    // The canonical realizer of each instance of a universal.
    ("bt_all", ".compute\n  param g\n  rel c\n  inst h g c\n  bt s h\n  ilv z s {}\n  out z\n  halt 1\n"),
    // Generalization: parameter R realizes (all y)(psi -> phi(y)); given a
    // realizer of psi, answer with (gen_h, R (+) r_psi).
    (
        "gen_g",
        ".compute
  param rr
  rel x
  proj r x 0
  ilv q rr r
  quote g gen_h
  mkpp pp g q
  ilv z pp {}
  out z
  halt 1
",
    ),
    (
        "gen_h",
        "  param q
  proj rr q 0
  proj r q 1
  ilv pr r {}
  rel c
  cand z
  proj z0 z 0
  proj w z 1
  proj z2 w 0
  proj z1 w 1
  run ok rr c z1
  jz ok no
  proj r1 z1 0
  run ok r1 pr z2
  jz ok no
  proj c2 z2 0
  eq ok z0 c2
  halt ok
no:
  halt 0
.synth
  param q
  proj rr q 0
  proj r q 1
  ilv pr r {}
  rel c
  rho z1 rr c
  proj r1 z1 0
  rho z2 r1 pr
  proj c2 z2 0
  ilv w z2 z1
  ilv z c2 w
  out z
  halt 1
",
    ),
    // Existential elimination: parameter R realizes (all y)(phi(y) -> psi);
    // the input u realizes (ex x) phi. Zu = rho(u, {}) gives (c, t),
    // Zr = rho(R, c), Zs = rho(Zr_0, t).
    (
        "exe_q",
        "  param rr
  rel x
  proj u x 0
  cand z
  proj z0 z 0
  proj w z 1
  proj zs w 0
  proj w2 w 1
  proj zr w2 0
  proj zu w2 1
  run ok u {} zu
  jz ok no
  proj ct zu 0
  proj c ct 0
  proj t ct 1
  run ok rr c zr
  jz ok no
  proj rp zr 0
  ilv pt t {}
  run ok rp pt zs
  jz ok no
  proj s0 zs 0
  eq ok z0 s0
  halt ok
no:
  halt 0
.synth
  param rr
  rel x
  proj u x 0
  rho zu u {}
  proj ct zu 0
  proj c ct 0
  proj t ct 1
  rho zr rr c
  proj rp zr 0
  ilv pt t {}
  rho zs rp pt
  proj s0 zs 0
  ilv w2 zr zu
  ilv w zs w2
  ilv z s0 w
  out z
  halt 1
",
    ),
    // ---- set-existence witnesses --------------------------------------
    // Each computes a code c, realizes the body f(w := c) canonically and
    // answers with the package (c, s) for an existential.
    ("kp_empty", concat!(".compute\n  param f\n  mov c {}\n", witness_tail!())),
    ("kp_pair", concat!(".compute\n  param q\n  proj f q 0\n  proj d q 1\n  proj a d 0\n  proj b d 1\n  pairset c a b\n", witness_tail!())),
    ("kp_union", concat!(".compute\n  param q\n  proj f q 0\n  proj x q 1\n  union c x\n", witness_tail!())),
    ("kp_sep", concat!(".compute\n  param q\n  proj f q 0\n  proj d q 1\n  proj h d 0\n  proj xs d 1\n  sep c h x xs\n", witness_tail!())),
    // The code inside the package the parameter recognizes.
    ("kp_code", ".compute\n  param x\n  rho z x {}\n  proj w z 0\n  proj c w 0\n  out c\n  halt 1\n"),
    // Finite lookup: parameter (table, default), table entries (key, value);
    // relative to a code, recognizes the value filed under the coded set.
    (
        "tlook",
        ".compute
  param q
  proj t q 0
  rel c
  lfind v t c miss
  ilv z v {}
  out z
  halt 1
miss:
  proj v q 1
  ilv z v {}
  out z
  halt 1
",
    ),
    // Replacement and choice. Parameter q = mode (+) (X (+) F); given a
    // realizer A of (all x in X)(ex y) phi, answer with (audit, A (+) q).
    ("audit_imp", ".compute\n  param q\n  rel x\n  proj a x 0\n  ilv p a q\n  quote g audit\n  mkpp e g p\n  ilv z e {}\n  out z\n  halt 1\n"),
    // Candidate ((Y, s), W). W lists one triple (x, y, (z1, z2, z3)) per
    // member x of X, in member order, where A relative to x recognizes z1,
    // the implication in z1 recognizes z2 from the trivial realizer of
    // x in X, and the existential in z2 recognizes z3 naming y. Pass 1
    // replays every triple; pass 2 demands that each member of the
    // canonical code Y is hit, Y collecting y (mode {}) or the pair (x, y)
    // (mode {0}). Finally s must be the canonical realizer of F(w := Y).
    (
        "audit",
        "  param p
  proj a p 0
  proj q p 1
  proj mode q 0
  proj d q 1
  proj cx d 0
  proj gf d 1
  cand z
  proj h z 0
  proj cy0 h 0
  proj s h 1
  proj wl z 1
  canon ok cy0
  jz ok no
  members ms cx
  mov rest wl
pass1:
  lnull e ms
  jnz e pass1done
  lnull e rest
  jnz e no
  lhead k ms
  ltail ms ms
  lhead t rest
  ltail rest rest
  proj kx t 0
  eq ok kx k
  jz ok no
  proj t1 t 1
  proj cy t1 0
  proj zs t1 1
  proj z1 zs 0
  proj zs2 zs 1
  proj z2 zs2 0
  proj z3 zs2 1
  run ok a k z1
  jz ok no
  proj i z1 0
  mkempty em
  ilv pe em {}
  run ok i pe z2
  jz ok no
  proj e2 z2 0
  run ok e2 {} z3
  jz ok no
  proj c3 z3 0
  proj cyy c3 0
  eq ok cyy cy
  jz ok no
  ilv qq mode k
  ilv qq qq cy
  calls el image {} qq
  cin ok el cy0
  jz ok no
  jmp pass1
pass1done:
  lnull e rest
  jz e no
  members ys cy0
pass2:
  lnull e ys
  jnz e pass2done
  lhead m ys
  ltail ys ys
  mov rest wl
hit:
  lnull e rest
  jnz e no
  lhead t rest
  ltail rest rest
  proj kx t 0
  proj t1 t 1
  proj cy t1 0
  ilv qq mode kx
  ilv qq qq cy
  calls el image {} qq
  ceq ok el m
  jz ok hit
  jmp pass2
pass2done:
  subst g gf w cy0
  bt s2 g
  eq ok s s2
  halt ok
no:
  halt 0
.synth
  param p
  proj a p 0
  proj q p 1
  proj mode q 0
  proj d q 1
  proj cx d 0
  proj gf d 1
  members ms cx
  lnil rev
  mov acc {}
step:
  lnull e ms
  jnz e stepped
  lhead k ms
  ltail ms ms
  rho z1 a k
  proj i z1 0
  mkempty em
  ilv pe em {}
  rho z2 i pe
  proj e2 z2 0
  rho z3 e2 {}
  proj c3 z3 0
  proj cy c3 0
  ilv zs2 z2 z3
  ilv zs z1 zs2
  ilv t1 cy zs
  ilv t k t1
  lcons rev t rev
  ilv qq mode k
  ilv qq qq cy
  calls el image {} qq
  pairset sg el el
  pairset u acc sg
  union acc u
  jmp step
stepped:
  lnil wl
flip:
  lnull e rev
  jnz e flipped
  lhead t rev
  ltail rev rev
  lcons wl t wl
  jmp flip
flipped:
  subst g gf w acc
  bt s g
  ilv h acc s
  ilv z h wl
  out z
  halt 1
.sub image
  param qq
  proj mk qq 0
  proj cy qq 1
  proj mode mk 0
  proj k mk 1
  jz mode value
  kpair el k cy
  out el
  halt 1
value:
  out cy
  halt 1
",
    ),
    // Epsilon-induction table check, relative to a code of y, parameter the
    // serialized premise realizer P. Candidate (c_y, (T, R)): T and R are
    // keyed by the members of tc({y}) in member order; R files
    // rho(P, x), T files (c_<x, e_x) where c_<x is the lookup realizer of
    // (all u in x) phi(u) built from the entries below x, and e_x is what
    // the implication in rho(P, x) recognizes from c_<x. c_y is the
    // realizer inside e_y.
    (
        "indchk",
        "  param pr
  rel cy
  cand z
  proj sc z 0
  proj tr z 1
  proj tt tr 0
  proj rt tr 1
  tc tcc cy
  members ks tcc
  lkeys k1 tt
  eq ok k1 ks
  jz ok no
  lkeys k2 rt
  eq ok k2 ks
  jz ok no
  mov rest tt
  mov rest2 rt
entry:
  lnull e rest
  jnz e entries
  lhead en rest
  ltail rest rest
  lhead re rest2
  ltail rest2 rest2
  proj k en 0
  proj v en 1
  proj sl v 0
  proj ex v 1
  proj px re 1
  run ok pr k px
  jz ok no
  ilv qq tt k
  calls expect below {} qq
  eq ok sl expect
  jz ok no
  proj ix px 0
  ilv psl sl {}
  run ok ix psl ex
  jz ok no
  jmp entry
entries:
  lfind v tt cy no
  proj e v 1
  proj c e 0
  eq ok c sc
  halt ok
no:
  halt 0
.sub below
  param qq
  proj tt qq 0
  proj k qq 1
  lnil acc
more:
  lnull e tt
  jnz e built
  lhead em tt
  ltail tt tt
  proj km em 0
  cin ok km k
  jz ok more
  proj vm em 1
  proj ev vm 1
  proj cm ev 0
  quote g rc
  ilv pk cm {}
  mkpp cv g pk
  ilv ent km cv
  lcons acc ent acc
  jmp more
built:
  mkempty em0
  ilv pe em0 {}
  quote g rc
  mkpp dflt g pe
  ilv tq acc dflt
  quote gl tlook
  mkpp r gl tq
  out r
  halt 1
",
    ),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn godel_roundtrip() {
        let t = "halt 1\n";
        assert_eq!(text_from_godel(&godel_text(t)).as_deref(), Some(t));
        assert_eq!(text_from_godel(&OrdSet::from_nats([300])), None);
    }

    #[test]
    fn library_assembles() {
        for n in library_names() {
            let g = library_godel(n).unwrap();
            assert_eq!(
                program_from_godel(&g).as_deref(),
                library_program(n).as_deref(),
                "{n}"
            );
        }
    }

    #[test]
    fn lists_roundtrip() {
        let items = vec![
            OrdSet::from_nats([1]),
            OrdSet::new(),
            OrdSet::from_nats([0, 5]),
        ];
        assert_eq!(wire::unlist(&wire::list(items.clone())), Some(items));
        assert_eq!(wire::unlist(&OrdSet::from_nats([1])), None);
    }
}
