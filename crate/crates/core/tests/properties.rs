//! Invariants as properties over generated inputs.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use rrealize::formula::{
    eval_bounded, eval_bounded_counted, eval_over_universe, parse_formula, Formula,
};
use rrealize::hfset::{universe, HfSet};
use rrealize::kp;
use rrealize::ordinal::{godel_pair, godel_unpair, ord_add, ord_mul, Ordinal, Term};
use rrealize::ordset::{interleave, project, OrdSet, Side};
use rrealize::otm::micro::{
    assemble_micro, micro_run_traced, Config, EQ_CONST_MICRO, EQ_SECTION_MICRO,
};
use rrealize::otm::{run_program, MicroLimits, DEFAULT_FUEL};
use rrealize::proofcalc::{check_proof, Proof, ProofCheck, Rule, Step};
use rrealize::realizability::{check, deserialize, serialize, CheckContext, Realizer};
use rrealize::recognizer::{test_recognizer, CandidatePool, RecognitionVerdict, Recognizer};
use rrealize::selftest::{proof_corpus, Delta0Gen};
use rrealize::setcode::{code_eq, decode, encode, SetCode};

// ---------------------------------------------------------------------------
// Generators

/// Ordinals below omega^4 with coefficients up to 3.
fn small_ordinal() -> impl Strategy<Value = Ordinal> {
    prop::collection::vec(0u64..4, 4).prop_map(|cs| {
        let terms = (0..4u64)
            .rev()
            .map(|k| Term {
                exp: Ordinal::Fin(k),
                coeff: cs[k as usize],
            })
            .collect();
        Ordinal::from_terms(terms).expect("decreasing exponents")
    })
}

/// Sets with elements below omega * 4.
fn limit_set() -> impl Strategy<Value = OrdSet> {
    prop::collection::btree_set((0u64..4, 0u64..10), 0..8).prop_map(|es| {
        es.into_iter()
            .map(|(k, n)| Ordinal::limit_plus(&ord_mul(&Ordinal::omega(), &Ordinal::Fin(k)), n))
            .collect()
    })
}

fn finite_set() -> impl Strategy<Value = OrdSet> {
    prop::collection::btree_set(0u64..24, 0..8).prop_map(OrdSet::from_nats)
}

/// Hereditarily finite sets of rank at most 4, as subsets of the rank-3
/// universe.
fn hf_set() -> impl Strategy<Value = HfSet> {
    let u = universe(3);
    any::<u16>().prop_map(move |mask| {
        HfSet::from_members(
            u.iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, x)| x.clone()),
        )
    })
}

fn realizer_tree() -> impl Strategy<Value = Realizer> {
    let leaf = prop_oneof![
        Just(Realizer::Empty),
        finite_set().prop_map(Realizer::Leaf),
        finite_set().prop_map(|q| Realizer::lib("rc", q)),
        Just(Realizer::p_empty()),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Realizer::pair(a, b)),
            (0u8..2, inner).prop_map(|(i, r)| Realizer::choice(i, r)),
        ]
    })
}

// ---------------------------------------------------------------------------
// Ordinals and pairing

proptest! {
    #[test]
    fn addition_is_associative(a in small_ordinal(), b in small_ordinal(), c in small_ordinal()) {
        prop_assert_eq!(ord_add(&ord_add(&a, &b), &c), ord_add(&a, &ord_add(&b, &c)));
    }

    #[test]
    fn multiplication_distributes_on_the_left(a in small_ordinal(), b in small_ordinal(), c in small_ordinal()) {
        prop_assert_eq!(ord_mul(&a, &ord_add(&b, &c)), ord_add(&ord_mul(&a, &b), &ord_mul(&a, &c)));
    }

    #[test]
    fn pairing_is_monotone_in_max_lex_order(a in 0u64..300, b in 0u64..300, c in 0u64..300, d in 0u64..300) {
        let key = |x: u64, y: u64| (x.max(y), x, y);
        let p = |x: u64, y: u64| godel_pair(&Ordinal::Fin(x), &Ordinal::Fin(y)).unwrap();
        prop_assert_eq!(key(a, b).cmp(&key(c, d)), p(a, b).cmp(&p(c, d)));
        prop_assert_eq!(godel_unpair(&p(a, b)).unwrap(), (Ordinal::Fin(a), Ordinal::Fin(b)));
    }
}

// ---------------------------------------------------------------------------
// Interleaving

proptest! {
    #[test]
    fn interleave_roundtrips_and_halves_are_disjoint(a in limit_set(), b in limit_set()) {
        let z = interleave(&a, &b);
        prop_assert_eq!(project(&z, Side::Even), a.clone());
        prop_assert_eq!(project(&z, Side::Odd), b.clone());
        let evens = interleave(&a, &OrdSet::new());
        let odds = interleave(&OrdSet::new(), &b);
        prop_assert!(evens.iter().all(|o| !odds.contains(o)));
        prop_assert_eq!(evens.union(&odds), z);
    }

    #[test]
    fn interleave_is_injective(a in limit_set(), b in limit_set(), c in limit_set(), d in limit_set()) {
        if interleave(&a, &b) == interleave(&c, &d) {
            prop_assert!(a == c && b == d);
        }
    }
}

// ---------------------------------------------------------------------------
// Set codes

/// The code of `x` under an arbitrary enumeration of `tc({x})` with `x`
/// first, built from the definition.
fn code_under(x: &HfSet, order: &[HfSet]) -> SetCode {
    let pos = |s: &HfSet| order.iter().position(|o| o == s).expect("enumerated") as u64;
    let mut code = OrdSet::new();
    for s in order {
        for m in s.members() {
            code.insert(godel_pair(&Ordinal::Fin(pos(m)), &Ordinal::Fin(pos(s))).unwrap());
        }
    }
    let _ = x;
    SetCode::new(code, Ordinal::Fin(order.len() as u64))
}

proptest! {
    #[test]
    fn decode_ignores_the_enumeration(x in hf_set(), seed in any::<u64>()) {
        let mut rest: Vec<HfSet> = x.transitive_closure().members().cloned().collect();
        // A seeded Fisher-Yates shuffle of everything below the root.
        let mut s = seed;
        for i in (1..rest.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            rest.swap(i, (s >> 33) as usize % (i + 1));
        }
        let mut order = vec![x.clone()];
        order.extend(rest);
        prop_assert_eq!(decode(&code_under(&x, &order)).unwrap(), x);
    }

    #[test]
    fn code_eq_matches_set_equality(x in hf_set(), y in hf_set(), seed in any::<u64>()) {
        let (cx, cy) = (encode(&x), encode(&y));
        prop_assert_eq!(code_eq(&cx, &cy).unwrap(), x == y);
        prop_assert!(code_eq(&cx, &cx).unwrap());
        prop_assert_eq!(code_eq(&cx, &cy).unwrap(), code_eq(&cy, &cx).unwrap());
        // Against a non-canonical code of x itself.
        let mut order = vec![x.clone()];
        let mut rest: Vec<HfSet> = x.transitive_closure().members().cloned().collect();
        let k = (seed as usize) % rest.len().max(1);
        rest.rotate_left(k);
        order.extend(rest);
        prop_assert!(code_eq(&code_under(&x, &order), &cx).unwrap());
    }
}

// ---------------------------------------------------------------------------
// Machines and recognizers

proptest! {
    #[test]
    fn runs_are_deterministic(c in finite_set(), x in finite_set()) {
        for r in [Recognizer::eq_const(c.clone()), Recognizer::eq_section(c.clone())] {
            let a = run_program(&r.program, &x, &r.param, 10_000).unwrap();
            let b = run_program(&r.program, &x, &r.param, 10_000).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn oracle_beyond_what_is_read_is_irrelevant(c in finite_set(), x in finite_set(), tail in finite_set()) {
        // EQ-constant stops at the first disagreement, so positions past it
        // are never read.
        let r = Recognizer::eq_const(c.clone());
        if let Some(first) = c.iter().chain(x.iter()).filter(|o| c.contains(o) != x.contains(o)).min().cloned() {
            let beyond = Ordinal::Fin(first.as_finite().unwrap() + 1);
            let shifted: OrdSet = tail.iter().map(|t| ord_add(&beyond, t)).collect();
            let x2 = x.below(&beyond).union(&shifted);
            let a = run_program(&r.program, &x, &c, 10_000).unwrap();
            let b = run_program(&r.program, &x2, &c, 10_000).unwrap();
            prop_assert_eq!(a.accepted(), b.accepted());
        }
    }

    #[test]
    fn omega_jumps_take_the_liminf(x in finite_set(), c in finite_set()) {
        for text in [EQ_CONST_MICRO, EQ_SECTION_MICRO] {
            let p = assemble_micro(text).unwrap();
          // With the oracle equal to the parameter every finite cell agrees,
          // so EQ-constant must reach a limit.
          for oracle in [x.clone(), c.clone()] {
            let mut segments: Vec<Vec<Config>> = Vec::new();
            micro_run_traced(&p, &oracle, &c, MicroLimits::with_jumps(100_000, 2), |seg| segments.push(seg.to_vec()));
            if text == EQ_CONST_MICRO && oracle == c {
                prop_assert!(!segments.is_empty());
            }
            for seg in segments {
                let (limit, period) = seg.split_last().unwrap();
                let period = &period[..period.len() - 1];
                // Brute force: a cell survives iff it is set throughout the
                // period; the state is the least one visited.
                let all_cells: BTreeSet<Ordinal> = period.iter().flat_map(|c| c.work.iter().cloned()).collect();
                for cell in all_cells {
                    let always = period.iter().all(|c| c.work.contains(&cell));
                    prop_assert_eq!(limit.work.contains(&cell), always);
                }
                prop_assert_eq!(limit.state, period.iter().map(|c| c.state).min().unwrap());
                prop_assert!(limit.time.is_limit());
            }
          }
        }
    }

    #[test]
    fn recognizes_means_exactly_one_acceptance(c in finite_set(), others in prop::collection::vec(finite_set(), 1..8)) {
        let r = Recognizer::eq_const(c.clone());
        let mut pool: CandidatePool = others.into_iter().collect();
        pool.push(c.clone());
        let v = test_recognizer(&r, &pool, None, 100_000);
        prop_assert_eq!(v.clone(), RecognitionVerdict::Recognizes(c.clone()));
        for x in pool.iter() {
            let bit = run_program(&r.program, x, &c, 100_000).unwrap().accepted();
            prop_assert_eq!(bit, Some(x == &c));
        }
    }
}

// ---------------------------------------------------------------------------
// Formulas

fn corpus(seed: u64, n: usize) -> Vec<Formula> {
    let mut g = Delta0Gen::new(seed, universe(2));
    (0..n).map(|_| g.sentence(4)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn printing_then_parsing_is_the_identity(seed in any::<u64>()) {
        for f in corpus(seed, 16) {
            prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn bounded_evaluation_agrees_and_is_cheap(seed in any::<u64>()) {
        let u = universe(3);
        for f in corpus(seed, 16) {
            let (v, steps) = eval_bounded_counted(&f, &BTreeMap::new(), DEFAULT_FUEL).unwrap();
            prop_assert_eq!(v, eval_over_universe(&f, &u, &BTreeMap::new()).unwrap());
            prop_assert_eq!(v, eval_bounded(&f, &BTreeMap::new(), DEFAULT_FUEL).unwrap());
            // Polynomial in the size of the sentence and its constants.
            let size = f.to_string().len() as u64;
            prop_assert!(steps <= size.pow(3) + 64, "{} steps for `{}`", steps, f);
        }
    }
}

// ---------------------------------------------------------------------------
// Realizers

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn serialization_roundtrips(r in realizer_tree()) {
        prop_assert!(r.depth() <= 5);
        prop_assert_eq!(deserialize(&serialize(&r)).unwrap(), r);
    }
}

#[test]
fn p_empty_realizes_true_atomic_universals() {
    let ctx = CheckContext::with_rank(2);
    for (text, truth) in [
        ("(all x) x = x", true),
        ("(all x) x = {}", false),
        ("(all x) {} in {{}}", true),
        ("(all x) x in x", false),
    ] {
        let v = check(&Realizer::p_empty(), &parse_formula(text).unwrap(), &ctx);
        assert_eq!(v.is_realized(), truth, "{text}: {v}");
    }
}

#[test]
fn bounded_truth_program_realizes_true_pi1_sentences() {
    let ctx = CheckContext::with_rank(2);
    for (text, truth) in [
        ("(all x)(all y)(x in y -> not y in x)", true),
        ("(all x) not x in x", true),
        ("(all x)(ex w in x) w = w", false),
    ] {
        let f = parse_formula(text).unwrap();
        let v = check(
            &Realizer::lib("bt_all", rrealize::otm::library::godel_text(text)),
            &f,
            &ctx,
        );
        assert_eq!(v.is_realized(), truth, "{text}: {v}");
    }
}

// ---------------------------------------------------------------------------
// Proofs and emissions

/// Single-step edits of a proof: swapped modus ponens operands, and a
/// generalization or elimination turned into the other rule.
fn mutations(p: &Proof) -> Vec<Proof> {
    let mut out = Vec::new();
    for (i, s) in p.steps.iter().enumerate() {
        let edited = match s {
            Step::Rule(Rule::Mp, refs, e) if refs.len() == 2 && refs[0] != refs[1] => {
                Step::Rule(Rule::Mp, vec![refs[1], refs[0]], e.clone())
            }
            Step::Rule(Rule::GenImp, refs, e) => Step::Rule(Rule::ExElim, refs.clone(), e.clone()),
            Step::Rule(Rule::ExElim, refs, e) => Step::Rule(Rule::GenImp, refs.clone(), e.clone()),
            _ => continue,
        };
        let mut q = p.clone();
        q.steps[i] = edited;
        out.push(q);
    }
    out
}

#[test]
fn check_proof_rejects_single_step_mutations() {
    let mut seen = 0;
    for (text, _) in proof_corpus() {
        let p: Proof = text.parse().unwrap();
        assert!(check_proof(&p).is_valid());
        for m in mutations(&p) {
            seen += 1;
            assert!(
                matches!(check_proof(&m), ProofCheck::Invalid { .. }),
                "accepted mutation of:\n{text}\nas\n{m}"
            );
        }
    }
    assert!(seen >= 20, "{seen} mutations");
}

#[test]
fn induction_rows_realize_phi_at_their_sets() {
    let ctx = CheckContext::with_rank(2);
    let phi = parse_formula("(all w in a)(w = w)").unwrap();
    let premise = kp::induction_premise(&phi, &BTreeMap::new()).unwrap();
    for y in universe(3) {
        let ind = kp::emit_induction(&phi, &BTreeMap::new(), &y, &premise, &ctx).unwrap();
        assert_eq!(ind.table.len(), y.tc_with_self().len());
        for row in &ind.table {
            let at = phi.subst("a", &row.set);
            let v = check(&row.realizer(), &at, &ctx);
            assert!(v.is_realized(), "{at}: {v}");
        }
    }
}
