from plansat.cover import (
    action_layer_statics,
    cover_report,
    prune_predicates,
    select_cover,
)
from plansat.mutex import verified_candidates
from plansat.pddl import ground_facts


def test_prune_visited(grid_visit):
    kept, pruned, exceptions = prune_predicates(grid_visit)
    assert pruned == {"visited"}
    assert kept == {"at-robot", "connected"}
    assert exceptions == grid_visit.goal


def test_prune_consumed(consume):
    _, pruned, exceptions = prune_predicates(consume)
    assert pruned == {"consumed"}
    assert len(exceptions) == 2


def test_prune_nothing(transport):
    _, pruned, exceptions = prune_predicates(transport)
    assert pruned == set()
    assert exceptions == set()


def test_cover_transport_appendix(transport):
    cover = select_cover(transport, verified_candidates(transport), pp=True)
    # the package group fully covers `in`; the vehicle groups pick up at(v,.)
    assert "in" in cover.covered_predicates
    assert cover.uncovered == set()
    atom_sets = [tuple(sorted(a.predicate for a in p.atoms))
                 for p in cover.selected]
    assert ("at", "in") in atom_sets  # package PLMG
    assert ("at",) in atom_sets       # vehicle PLMG


def test_cover_visitall_story(grid_visit):
    cover = select_cover(grid_visit, verified_candidates(grid_visit), pp=True)
    # at-robot forms a single exactly-one PLMG; only goal `visited` facts stay
    robots = [p for p in cover.selected
              if {a.predicate for a in p.atoms} == {"at-robot"}]
    assert len(robots) == 1
    assert robots[0].exactly_one
    assert len(robots[0].ground_facts) == 3
    assert cover.uncovered == cover.goal_exception_facts
    assert {f[0] for f in cover.uncovered} == {"visited"}


def test_cover_visitall_no_pp(grid_visit):
    cover = select_cover(grid_visit, verified_candidates(grid_visit), pp=False)
    # without pruning every `visited` fact needs explicit encoding
    visited = ground_facts(grid_visit.predicate("visited"), grid_visit.types)
    assert set(visited) <= cover.uncovered


def test_cover_empty_candidates_degrades(transport):
    cover = select_cover(transport, [], pp=True)
    assert cover.selected == []
    at = ground_facts(transport.predicate("at"), transport.types)
    inn = ground_facts(transport.predicate("in"), transport.types)
    assert cover.uncovered == set(at) | set(inn)


def test_cover_accounting(all_instances):
    # every non-static, non-pruned fact is covered or uncovered
    for name, problem in all_instances:
        cover = select_cover(problem, verified_candidates(problem), pp=True)
        statics = {p.name for p in problem.predicates if p.static}
        for pred in problem.predicates:
            if pred.name in statics or pred.name in cover.pruned_predicates:
                continue
            for fact in ground_facts(pred, problem.types):
                in_group = any(fact in p.ground_facts for p in cover.selected)
                assert in_group or fact in cover.uncovered, (name, fact)


def test_cover_deterministic(gripper):
    cands = verified_candidates(gripper)
    c1 = select_cover(gripper, cands, pp=True)
    c2 = select_cover(gripper, cands, pp=True)
    assert [p.atoms for p in c1.selected] == [p.atoms for p in c2.selected]
    assert c1.uncovered == c2.uncovered


def test_cover_greedy_prefers_larger_gain(transport2):
    cover = select_cover(transport2, verified_candidates(transport2), pp=True)
    # the first phase-2 pick must never cover fewer new facts than a later one
    assert cover.uncovered == set()


def test_gripper_full_cover(gripper):
    cover = select_cover(gripper, verified_candidates(gripper), pp=True)
    assert cover.uncovered == set()
    preds_covered = {a.predicate for p in cover.selected for a in p.atoms}
    assert preds_covered == {"at", "at-robby", "free", "carry"}


def test_selected_ids_dense(gripper):
    cover = select_cover(gripper, verified_candidates(gripper), pp=True)
    assert [p.id for p in cover.selected] == list(range(len(cover.selected)))


def test_action_layer_statics(transport_road, grid_visit):
    assert action_layer_statics(transport_road) == {"road"}
    assert action_layer_statics(grid_visit) == {"connected"}


def test_report_shape(grid_visit):
    cover = select_cover(grid_visit, verified_candidates(grid_visit), pp=True)
    report = cover_report(cover, grid_visit)
    assert "at-robot: covered-by-LMG" in report
    assert "visited: pruned" in report
    assert "connected: static" in report
    assert "|P|=1" in report
