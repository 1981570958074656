from dataclasses import replace

from plansat.mutex import (
    LmgCandidate,
    Plmg,
    classify_exactly_one,
    dump_plmgs,
    generate_candidates,
    instantiate,
    verified_candidates,
    verify_fam,
    verify_mutex_exhaustive,
)
from plansat.pddl import Atom, ObjectRef, Variable


def _atom_preds(candidate):
    return tuple(sorted(a.predicate for a in candidate.atoms))


def _find_candidate(cands, preds, fix_types):
    for c in cands:
        if _atom_preds(c) == tuple(sorted(preds)) and \
                sorted(v.type for v in c.fix) == sorted(fix_types):
            yield c


def test_single_candidates_cover_parameter_subsets(transport):
    cands = generate_candidates(transport)
    at_singles = [c for c in cands if _atom_preds(c) == ("at",)]
    shapes = {(len(c.fix), len(c.cnt)) for c in at_singles}
    assert {(1, 1), (2, 0), (0, 2)} <= shapes


def test_zero_ary_candidate(blocks):
    cands = generate_candidates(blocks)
    handempty = [c for c in cands if _atom_preds(c) == ("handempty",)]
    assert any(c.fix == () and c.cnt == () for c in handempty)


def test_merged_package_candidate_generated(transport):
    cands = generate_candidates(transport)
    merged = list(_find_candidate(cands, ["at", "in"], ["package"]))
    assert merged, "package at/in merge missing"
    assert {len(c.cnt) for c in merged} == {2}


def test_verify_fam_package_group(transport):
    cands = generate_candidates(transport)
    merged = next(iter(_find_candidate(cands, ["at", "in"], ["package"])))
    assert verify_fam(merged, transport)


def test_verify_fam_rejects_all_counted_at(transport2):
    # two locatables have `at` facts in init: the all-counted candidate fails
    cands = generate_candidates(transport2)
    all_counted = [c for c in _find_candidate(cands, ["at"], [])
                   if len(c.cnt) == 2]
    assert all_counted
    assert not verify_fam(all_counted[0], transport2)


def test_verify_fam_static_single_fact(transport_road):
    # road(l1,l2) etc: static, one fact per fixed pair instantiation
    cands = generate_candidates(transport_road)
    both_fixed = [c for c in _find_candidate(cands, ["road"],
                                             ["location", "location"])]
    assert both_fixed
    assert verify_fam(both_fixed[0], transport_road)


def test_verify_fam_rejects_unbalanced_singles(transport):
    # package `at` alone is deleted by pickup but re-added by drop without a
    # same-predicate delete, so the single-predicate group must be rejected
    cands = generate_candidates(transport)
    pkg_at = [c for c in _find_candidate(cands, ["at"], ["package"])
              if len(c.cnt) == 1]
    assert pkg_at
    assert not verify_fam(pkg_at[0], transport)


def test_instantiate_per_fixed_object(transport):
    cands = verified_candidates(transport)
    merged = next(iter(_find_candidate(cands, ["at", "in"], ["package"])))
    plmgs = instantiate(merged, transport)
    assert len(plmgs) == 1  # one package
    m = plmgs[0]
    assert {v.type for v in m.cnt} == {"location", "vehicle"}
    p = transport.object_index("p")
    v = transport.object_index("v")
    l = transport.object_index("l")
    assert m.ground_facts == {("at", (p, l)), ("in", (p, v))}
    assert m.exactly_one  # p is in v initially


def test_instantiate_empty_fix(grid_visit):
    cands = verified_candidates(grid_visit)
    robot = next(iter(_find_candidate(cands, ["at-robot"], [])))
    plmgs = instantiate(robot, grid_visit)
    assert len(plmgs) == 1
    assert len(plmgs[0].ground_facts) == 3
    assert plmgs[0].exactly_one


def test_classify_not_exactly_one_without_init_fact(transport2):
    cands = verified_candidates(transport2)
    merged = next(iter(_find_candidate(cands, ["at", "in"], ["package"])))
    plmgs = instantiate(merged, transport2)
    # package starts at l2, so its group holds exactly one fact: exactly-one
    assert all(p.exactly_one for p in plmgs)


def test_classify_delete_without_add(consume):
    cands = verified_candidates(consume)
    present = [c for c in _find_candidate(cands, ["present"], ["item"])]
    assert present
    plmgs = instantiate(present[0], consume)
    assert len(plmgs) == 2
    assert not any(p.exactly_one for p in plmgs)  # consume deletes, adds nothing


def test_exhaustive_oracle_holds(transport):
    for cand in verified_candidates(transport):
        for plmg in instantiate(cand, transport):
            verdict = verify_mutex_exhaustive(plmg, transport, state_cap=5000)
            assert verdict.status == "holds", dump_plmgs([plmg], transport)


def test_exhaustive_oracle_violation_witness(transport):
    # deliberately wrong group: both at(v,l) and in(p,v) hold in init
    p = transport.object_index("p")
    v = transport.object_index("v")
    l = transport.object_index("l")
    bogus = Plmg(id=0, cnt=(), exactly_one=False,
                 atoms=(Atom("at", (ObjectRef(v), ObjectRef(l))),
                        Atom("in", (ObjectRef(p), ObjectRef(v)))),
                 ground_facts=frozenset({("at", (v, l)), ("in", (p, v))}))
    verdict = verify_mutex_exhaustive(bogus, transport, state_cap=5000)
    assert verdict.status == "violated"
    assert verdict.witness == transport.init


def test_exhaustive_oracle_cap_zero(transport):
    plmg = Plmg(id=0, cnt=(), atoms=(), exactly_one=False,
                ground_facts=frozenset())
    assert verify_mutex_exhaustive(plmg, transport, 0).status == "inconclusive"


def test_all_instances_verified_groups_hold(all_instances):
    for name, problem in all_instances:
        for cand in verified_candidates(problem):
            for plmg in instantiate(cand, problem):
                verdict = verify_mutex_exhaustive(plmg, problem, state_cap=20000)
                assert verdict.status == "holds", (name, dump_plmgs([plmg], problem))


def test_monotone_soundness_of_subgroups(all_instances):
    # dropping an atom from a verified group can only shrink the fact set,
    # so the at-most-one property must survive (checked by the oracle)
    for name, problem in all_instances:
        for cand in verified_candidates(problem):
            if len(cand.atoms) < 2:
                continue
            for drop_idx in range(len(cand.atoms)):
                kept = tuple(a for i, a in enumerate(cand.atoms) if i != drop_idx)
                kept_vars = {a.name for atom in kept for a in atom.args
                             if isinstance(a, Variable)}
                sub = LmgCandidate(
                    fix=tuple(v for v in cand.fix if v.name in kept_vars),
                    cnt=tuple(v for v in cand.cnt if v.name in kept_vars),
                    atoms=kept)
                for plmg in instantiate(sub, problem):
                    plmg = replace(plmg, exactly_one=False)
                    verdict = verify_mutex_exhaustive(plmg, problem, 20000)
                    assert verdict.status == "holds", name


def test_emptied_groups_stay_empty(consume):
    # once no fact of a verified group holds, none holds in any successor
    from plansat.mutex import grounded_transitions
    transitions = grounded_transitions(consume)
    groups = [p.ground_facts
              for c in verified_candidates(consume)
              for p in instantiate(c, consume)]
    start = frozenset(consume.init)
    seen, frontier = {start}, [start]
    while frontier:
        state = frontier.pop()
        for prec, add, dele in transitions:
            if prec <= state:
                succ = (state - dele) | add
                for g in groups:
                    if not state & g:
                        assert not succ & g
                if succ not in seen:
                    seen.add(succ)
                    frontier.append(succ)


def test_dump_format(transport):
    cands = verified_candidates(transport)
    merged = next(iter(_find_candidate(cands, ["at", "in"], ["package"])))
    plmgs = instantiate(merged, transport)
    dump = dump_plmgs(plmgs, transport)
    assert dump.startswith("EO  [p]  {")
    assert dump.endswith("2")
