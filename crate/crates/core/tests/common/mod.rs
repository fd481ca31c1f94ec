#![allow(dead_code)]

use std::sync::Arc;

use lvw_core::ast::{AbstractStatechart, Guard, GuardExpr, StateNode, Stereotype, TransitionNode};
use lvw_core::reduction::{FlatAutomaton, FlatTransition};
use lvw_core::semantics::{
    Alphabet, Machine, MappingSelection, Realization, RealizationTag, Unmatched,
};
use proptest::prelude::*;

pub fn arb_tag() -> impl Strategy<Value = RealizationTag> {
    prop_oneof![
        Just(RealizationTag::Enum),
        Just(RealizationTag::Pattern),
        Just(RealizationTag::Other)
    ]
}

fn arb_guard() -> impl Strategy<Value = GuardExpr> {
    prop_oneof![
        3 => Just(GuardExpr::always(lvw_core::ast::GuardLanguage::Gl0)),
        1 => Just(GuardExpr::gl1(Guard::var("g"))),
        1 => Just(GuardExpr::gl1(Guard::not(Guard::var("g")))),
    ]
}

/// Raw transition: source index, events, guard, action, target index, owner.
type RawTransition = (
    usize,
    Vec<&'static str>,
    GuardExpr,
    Option<&'static str>,
    usize,
    usize,
);

/// Well-formed statecharts with up to six states nested up to three deep,
/// multi-triggers over `e`/`f`, optional GL1 guards over `g`, transitions
/// owned by arbitrary scopes, and an optional `prio:outer` stereotype.
pub fn arb_statechart() -> impl Strategy<Value = AbstractStatechart> {
    (1usize..=6)
        .prop_flat_map(|n| {
            let parents = (0..n)
                .map(|i| {
                    if i == 0 {
                        Just(None).boxed()
                    } else {
                        proptest::option::of(0..i).boxed()
                    }
                })
                .collect::<Vec<_>>();
            let transition = (
                0..n,
                prop_oneof![
                    Just(vec!["e"]),
                    Just(vec!["f"]),
                    Just(vec!["e", "f"]),
                    Just(vec!["f", "e"])
                ],
                arb_guard(),
                proptest::option::of(prop_oneof![Just("a"), Just("b")]),
                0..n,
                0..=n,
            );
            (
                parents,
                proptest::collection::vec(transition, 0..6),
                any::<bool>(),
            )
        })
        .prop_map(|(parents, ts, prio)| build_statechart(&parents, &ts, prio))
}

fn depth_ok(parents: &[Option<usize>], i: usize) -> bool {
    let mut d = 1;
    let mut cur = parents[i];
    while let Some(p) = cur {
        d += 1;
        cur = parents[p];
    }
    d <= 3
}

fn build_statechart(
    parents: &[Option<usize>],
    ts: &[RawTransition],
    prio: bool,
) -> AbstractStatechart {
    let n = parents.len();
    // clamp nesting depth by re-parenting too-deep states to the top level
    let mut parents = parents.to_vec();
    for i in 0..n {
        if !depth_ok(&parents, i) {
            parents[i] = None;
        }
    }
    let name = |i: usize| format!("S{i}");
    let mut owned: Vec<Vec<TransitionNode>> = vec![Vec::new(); n + 1];
    for (s, evs, g, a, t, owner) in ts {
        let mut tr = TransitionNode::simple(&name(*s), evs[0], &name(*t)).with_events(evs);
        tr.guard = g.clone();
        tr.action = a.map(str::to_owned);
        owned[*owner].push(tr);
    }
    fn node(
        i: usize,
        parents: &[Option<usize>],
        owned: &mut Vec<Vec<TransitionNode>>,
        first: bool,
    ) -> StateNode {
        let children: Vec<usize> = (0..parents.len())
            .filter(|c| parents[*c] == Some(i))
            .collect();
        let kids: Vec<StateNode> = children
            .iter()
            .enumerate()
            .map(|(k, c)| node(*c, parents, owned, k == 0))
            .collect();
        let mut s = StateNode::leaf(&format!("S{i}"))
            .with_children(kids)
            .with_transitions(std::mem::take(&mut owned[i]));
        s.is_initial = first;
        s
    }
    let tops: Vec<usize> = (0..n).filter(|i| parents[*i].is_none()).collect();
    let states: Vec<StateNode> = tops
        .iter()
        .enumerate()
        .map(|(k, i)| node(*i, &parents, &mut owned, k == 0))
        .collect();
    let mut m = AbstractStatechart::new("R")
        .with_states(states)
        .with_transitions(std::mem::take(&mut owned[n]));
    m.guard_vars = vec!["g".into()];
    if prio {
        m.stereotypes.insert(Stereotype::prio_outer());
    }
    m
}

/// Flat automata whose alphabet has one or two events, at most one guard
/// variable (only with one event) and at most one action.
pub fn arb_flat(max_states: usize) -> impl Strategy<Value = FlatAutomaton> {
    (1..=max_states, 1usize..=2, any::<bool>(), any::<bool>()).prop_flat_map(
        |(n, events, guarded, action)| {
            let guarded = guarded && events == 1;
            let t = (
                0..n,
                0..events,
                if guarded {
                    arb_guard().boxed()
                } else {
                    Just(GuardExpr::always(lvw_core::ast::GuardLanguage::Gl0)).boxed()
                },
                if action {
                    proptest::option::of(Just("a")).boxed()
                } else {
                    Just(None).boxed()
                },
                0..n,
            );
            proptest::collection::vec(t, 0..5).prop_map(move |ts| {
                let names: Vec<String> = (1..=n).map(|k| format!("S{k}")).collect();
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let evs = ["e", "f"];
                let transitions = ts
                    .iter()
                    .map(|(s, e, g, a, t)| {
                        let mut ft = FlatTransition::new(refs[*s], evs[*e], *a, refs[*t]);
                        ft.guard = g.clone();
                        ft
                    })
                    .collect();
                let mut m = FlatAutomaton::new("P", &refs, transitions);
                m.declared_events = evs[..events].iter().map(|s| s.to_string()).collect();
                if action {
                    m.declared_actions = vec!["a".into()];
                }
                if guarded {
                    m.guard_vars = vec!["g".into()];
                }
                m
            })
        },
    )
}

/// Total machines over `alphabet` with up to `max_states` states.
pub fn arb_machine(alphabet: Arc<Alphabet>, max_states: usize) -> impl Strategy<Value = Machine> {
    let inputs = alphabet.input_count();
    let outputs = alphabet.output_count();
    (1..=max_states).prop_flat_map(move |n| {
        let alphabet = alphabet.clone();
        let slot = proptest::collection::vec((0..outputs, 0..n), 1..=3);
        (proptest::collection::vec(slot, n * inputs), 0..n, arb_tag()).prop_map(
            move |(slots, init, tag)| {
                let steps: Vec<(usize, usize, usize, usize)> = slots
                    .iter()
                    .enumerate()
                    .flat_map(|(k, moves)| {
                        moves
                            .iter()
                            .map(move |(o, t)| (k / inputs, k % inputs, *o, *t))
                    })
                    .collect();
                Machine::from_steps(alphabet.clone(), n, init, &steps, tag)
                    .expect("total by construction")
            },
        )
    })
}

/// A model paired with machines over its alphabet.
pub fn arb_model_and_machines(
    model_states: usize,
    machine_states: usize,
    count: usize,
) -> impl Strategy<Value = (FlatAutomaton, Vec<Machine>)> {
    arb_flat(model_states).prop_flat_map(move |m| {
        let alphabet = Arc::new(Alphabet::of(&m));
        (
            Just(m),
            proptest::collection::vec(arb_machine(alphabet, machine_states), 1..=count),
        )
    })
}

/// Conformance by brute force: some relation containing the initial pair
/// is closed under the step conditions. Tries every relation over
/// machine states x model states.
pub fn naive_conforms(s: &Machine, m: &FlatAutomaton, sel: MappingSelection) -> bool {
    let tag_ok = match sel.realization {
        Realization::Open => true,
        Realization::Enum => s.tag == RealizationTag::Enum,
        Realization::Pattern => s.tag == RealizationTag::Pattern,
    };
    if !tag_ok {
        return false;
    }
    let names: Vec<&str> = m.state_names().collect();
    let xs = names.len();
    let inputs = s.alphabet.inputs();
    let outputs = s.alphabet.outputs();
    let enabled = |x: usize, i: usize| -> Vec<(Option<String>, usize)> {
        m.transitions
            .iter()
            .filter(|t| t.source == names[x] && t.event == inputs[i].event)
            .filter(|t| t.guard.eval(&inputs[i].guard_assignment).unwrap())
            .map(|t| {
                (
                    t.action.clone(),
                    names.iter().position(|n| *n == t.target).unwrap(),
                )
            })
            .collect()
    };
    let pair_ok = |q: usize, x: usize, rel: u32| -> bool {
        (0..inputs.len()).all(|i| {
            let en = enabled(x, i);
            let moves = s.moves_of(q, i);
            if en.is_empty() {
                match sel.unmatched {
                    Unmatched::Chaos => true,
                    Unmatched::Stutter => moves
                        .iter()
                        .all(|mv| outputs[mv.output].0.is_none() && mv.to == q),
                }
            } else {
                moves.iter().all(|mv| {
                    en.iter().any(|(a, t)| {
                        *a == outputs[mv.output].0 && rel >> (mv.to * xs + t) & 1 == 1
                    })
                })
            }
        })
    };
    let init = m.state_names().position(|n| n == m.initial).unwrap();
    let pairs = s.states * xs;
    (0u32..1 << pairs).any(|rel| {
        rel >> (s.init * xs + init) & 1 == 1
            && (0..pairs)
                .filter(|k| rel >> k & 1 == 1)
                .all(|k| pair_ok(k / xs, k % xs, rel))
    })
}
