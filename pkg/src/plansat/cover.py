"""Selection of the mutex-group cover used by the partially grounded encoders.

Phase 1 repeatedly selects a candidate whose full grounding covers every fact
of some predicate and retires that predicate; phase 2 grounds the remaining
predicates and greedily picks groups by newly covered facts. What is left
lands in the uncovered set and falls back to per-fact encoding.

Predicate pruning drops predicates that appear in no precondition; their goal
facts are kept as individual uncovered facts. Static predicates never join a
group: binary/unary static preconditions are enforced on the action layer,
while a static predicate used in an arity>=3 precondition is demoted to
ordinary per-fact handling.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from plansat.mutex import LmgCandidate, Plmg, instantiate
from plansat.pddl import Fact, Problem, Variable, ground_facts


@dataclass
class CoverResult:
    selected: list[Plmg]
    uncovered: set[Fact]
    covered_predicates: set[str]  # fully covered in phase 1
    pruned_predicates: set[str]
    goal_exception_facts: set[Fact]


def prune_predicates(problem: Problem) -> tuple[set[str], set[str], set[Fact]]:
    """Split predicates into (kept, pruned); pruned goal facts survive."""
    in_prec = {a.predicate for act in problem.actions for a in act.prec}
    pruned = {p.name for p in problem.predicates if p.name not in in_prec}
    kept = {p.name for p in problem.predicates} - pruned
    goal_exceptions = {f for f in problem.goal if f[0] in pruned}
    return kept, pruned, goal_exceptions


def action_layer_statics(problem: Problem) -> set[str]:
    """Static predicates whose preconditions the action layer enforces."""
    in_prec = {a.predicate for act in problem.actions for a in act.prec}
    return {p.name for p in problem.predicates
            if p.static and p.arity <= 2 and p.name in in_prec}


def demoted_statics(problem: Problem) -> set[str]:
    """Static predicates with arity>=3 precondition use: per-fact handling."""
    in_prec = {a.predicate for act in problem.actions for a in act.prec}
    return {p.name for p in problem.predicates
            if p.static and p.arity >= 3 and p.name in in_prec}


def _covers_predicate_fully(candidate: LmgCandidate, pred_name: str,
                            problem: Problem) -> bool:
    """Does the candidate's grounding contain every fact of the predicate?"""
    pred = problem.predicate(pred_name)
    for atom in candidate.atoms:
        if atom.predicate != pred_name:
            continue
        if all(isinstance(a, Variable)
               and problem.types.ranges[a.type] == problem.types.ranges[ty]
               for a, ty in zip(atom.args, pred.param_types)):
            return True
    return False


def select_cover(problem: Problem, candidates: list[LmgCandidate],
                 pp: bool = True) -> CoverResult:
    """Choose the group cover, the uncovered facts, and the pruning split."""
    statics = {p.name for p in problem.predicates if p.static}
    if pp:
        _, pruned, goal_exceptions = prune_predicates(problem)
    else:
        pruned, goal_exceptions = set(), set()
    demoted = demoted_statics(problem) - pruned

    coverable = [p for p in problem.predicates
                 if p.name not in statics and p.name not in pruned]
    universe: set[Fact] = set()
    for p in coverable:
        universe.update(ground_facts(p, problem.types))

    # All PLMGs each candidate can yield, deduplicated by instantiated atoms.
    pool: list[Plmg] = []
    pool_of: dict[int, list[Plmg]] = {}
    seen_atom_sets: dict[frozenset, Plmg] = {}
    for ci, cand in enumerate(candidates):
        plmgs = []
        for plmg in instantiate(cand, problem):
            key = frozenset(plmg.atoms)
            if key in seen_atom_sets:
                plmgs.append(seen_atom_sets[key])
                continue
            seen_atom_sets[key] = plmg
            plmgs.append(plmg)
            pool.append(plmg)
        pool_of[ci] = plmgs

    selected: list[Plmg] = []
    selected_keys: set[frozenset] = set()

    def select(plmg: Plmg) -> None:
        key = frozenset(plmg.atoms)
        if key not in selected_keys:
            selected_keys.add(key)
            selected.append(plmg)

    # Phase 1: predicates fully covered by a single candidate.
    remaining = {p.name for p in coverable}
    covered_predicates: set[str] = set()
    progress = True
    while progress:
        progress = False
        for ci, cand in enumerate(candidates):
            full = [p for p in sorted(remaining)
                    if _covers_predicate_fully(cand, p, problem)]
            if full:
                for plmg in pool_of[ci]:
                    select(plmg)
                remaining.discard(full[0])
                covered_predicates.add(full[0])
                progress = True
                break

    # Phase 2: greedy by newly covered facts.
    covered: set[Fact] = set()
    for plmg in selected:
        covered.update(plmg.ground_facts & universe)
    while True:
        best, best_rank = None, None
        for i, plmg in enumerate(pool):
            if frozenset(plmg.atoms) in selected_keys:
                continue
            gain = len((plmg.ground_facts & universe) - covered)
            if gain == 0:
                continue
            rank = (-gain, not plmg.exactly_one, len(plmg.cnt), i)
            if best_rank is None or rank < best_rank:
                best, best_rank = plmg, rank
        if best is None:
            break
        select(best)
        covered.update(best.ground_facts & universe)

    uncovered = universe - covered
    uncovered |= goal_exceptions
    for name in demoted:
        uncovered.update(ground_facts(problem.predicate(name), problem.types))
    uncovered |= {f for f in problem.goal
                  if f[0] in statics and f[0] not in demoted}

    selected = [replace(p, id=i) for i, p in enumerate(selected)]
    return CoverResult(selected=selected, uncovered=uncovered,
                       covered_predicates=covered_predicates,
                       pruned_predicates=pruned,
                       goal_exception_facts=goal_exceptions)


def cover_report(result: CoverResult, problem: Problem) -> str:
    """Per-predicate disposition plus cover sizes, one predicate per line."""
    selected_preds = {a.predicate for plmg in result.selected
                      for a in plmg.atoms}
    lines = []
    for p in problem.predicates:
        if p.name in result.pruned_predicates:
            kind = "pruned"
        elif p.static:
            kind = "static"
        elif p.name in result.covered_predicates:
            kind = "covered-by-LMG"
        elif p.name in selected_preds:
            kind = "grounded"  # partially covered in phase 2
        else:
            kind = "grounded"
        lines.append(f"{p.name}: {kind}")
    lines.append(f"|P|={len(result.selected)} |U|={len(result.uncovered)}")
    return "\n".join(lines)
