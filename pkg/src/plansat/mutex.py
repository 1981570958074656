"""Lifted mutex group inference: candidates, verification, instantiation.

A candidate is a triple (fixed variables, counted variables, atoms). Every
instantiation of the fixed variables must yield a set of facts of which at
most one holds in any reachable state. Verification uses a lifted
fact-alternation balance: an action may only add a group fact if it also
deletes one it requires (consistently on the fixed variables), and the
initial state holds at most one fact per fixed instantiation. The check is
sound but incomplete: rejecting a true group only costs encoding
compactness, never correctness, and `verify_mutex_exhaustive` provides an
independent reachability oracle for tests.

Generation enumerates, per predicate, every split of its parameters into
counted/fixed (with fixed positions optionally narrowed to subtypes), then
merges pairs of init-compatible candidates that share a fixed-variable type
signature. One merge round reaches the two-predicate groups that matter in
practice (package at/in, gripper free/carry, hand holding/handempty).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

from plansat.pddl import (
    Atom,
    Fact,
    ObjectRef,
    Problem,
    TypeTable,
    Variable,
    ground_actions,
    ground_atom,
)


@dataclass(frozen=True)
class LmgCandidate:
    fix: tuple[Variable, ...]
    cnt: tuple[Variable, ...]
    atoms: tuple[Atom, ...]


@dataclass(frozen=True)
class Plmg:
    id: int
    cnt: tuple[Variable, ...]
    atoms: tuple[Atom, ...]  # fixed variables replaced by ObjectRef
    exactly_one: bool
    ground_facts: frozenset[Fact]

    def atom_for(self, predicate: str) -> Atom:
        for atom in self.atoms:
            if atom.predicate == predicate:
                return atom
        raise KeyError(predicate)


@dataclass(frozen=True)
class MutexVerdict:
    status: str  # "holds" | "violated" | "inconclusive"
    witness: frozenset[Fact] | None = None


# ── Equation system for lifted unification ───────────────────────────────────
#
# Keys are ("param", name) for action parameters and ("fix", name) for a
# candidate's fixed variables. Each union-find class carries the intersection
# of the member ranges of all types imposed on it, plus an optional pinned
# object. Ranges of types in a tree hierarchy are nested or disjoint, so
# intersections stay intervals.

class _EqSystem:
    def __init__(self, table: TypeTable):
        self.table = table
        self.parent: dict[tuple, tuple] = {}
        self.range: dict[tuple, tuple[int, int]] = {}
        self.pin: dict[tuple, int | None] = {}
        self.ok = True

    def add_var(self, key: tuple, type_name: str) -> None:
        if key in self.parent:
            return
        self.parent[key] = key
        self.range[key] = self.table.ranges[type_name]
        self.pin[key] = None

    def find(self, key: tuple) -> tuple:
        root = key
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[key] != root:
            self.parent[key], key = root, self.parent[key]
        return root

    def _set_range(self, root: tuple, lo: int, hi: int) -> None:
        lo = max(lo, self.range[root][0])
        hi = min(hi, self.range[root][1])
        self.range[root] = (lo, hi)
        if lo >= hi:
            self.ok = False
        p = self.pin[root]
        if p is not None and not lo <= p < hi:
            self.ok = False

    def narrow(self, key: tuple, type_name: str) -> None:
        root = self.find(key)
        lo, hi = self.table.ranges[type_name]
        self._set_range(root, lo, hi)

    def pin_obj(self, key: tuple, obj: int) -> None:
        root = self.find(key)
        if self.pin[root] is not None and self.pin[root] != obj:
            self.ok = False
            return
        self.pin[root] = obj
        self._set_range(root, obj, obj + 1)

    def union(self, k1: tuple, k2: tuple) -> None:
        r1, r2 = self.find(k1), self.find(k2)
        if r1 == r2:
            return
        self.parent[r2] = r1
        lo, hi = self.range[r2]
        p2 = self.pin[r2]
        self._set_range(r1, lo, hi)
        if p2 is not None:
            self.pin_obj(r1, p2)

    # Entailment checks: do all groundings satisfying this system also
    # satisfy the queried equation?

    def _value_range(self, key: tuple) -> tuple[int, int]:
        return self.range[self.find(key)]

    def entails_eq(self, k1: tuple, k2: tuple) -> bool:
        if self.find(k1) == self.find(k2):
            return True
        lo1, hi1 = self._value_range(k1)
        lo2, hi2 = self._value_range(k2)
        return hi1 - lo1 == 1 and (lo1, hi1) == (lo2, hi2)

    def entails_pin(self, key: tuple, obj: int) -> bool:
        lo, hi = self._value_range(key)
        return (lo, hi) == (obj, obj + 1)

    def entails_member(self, key: tuple, type_name: str) -> bool:
        lo, hi = self._value_range(key)
        tlo, thi = self.table.ranges[type_name]
        return tlo <= lo and hi <= thi

    def provably_distinct(self, t1, t2) -> bool:
        """t is ("obj", index) or a variable key; true if values must differ."""
        if t1[0] == "obj" and t2[0] == "obj":
            return t1[1] != t2[1]
        if t1[0] == "obj" or t2[0] == "obj":
            obj = t1[1] if t1[0] == "obj" else t2[1]
            key = t2 if t1[0] == "obj" else t1
            lo, hi = self._value_range(key)
            return not lo <= obj < hi
        if self.find(t1) == self.find(t2):
            return False
        lo1, hi1 = self._value_range(t1)
        lo2, hi2 = self._value_range(t2)
        return hi1 <= lo2 or hi2 <= lo1


# ── Matching effects/preconditions against group atoms ───────────────────────

@dataclass
class _Match:
    """One unifiable (action atom, group atom) pair with its equations."""

    atom: Atom
    group_atom: Atom
    # equations: ("eq", key, key) | ("pin", key, obj) | ("mem", key, type)
    equations: list[tuple]


def _match_atom(action_atom: Atom, group_atom: Atom, table: TypeTable,
                fix_names: frozenset[str]) -> _Match | None:
    """Unify an action's atom with a group atom; None when infeasible."""
    if action_atom.predicate != group_atom.predicate:
        return None
    equations: list[tuple] = []
    for ea, ga in zip(action_atom.args, group_atom.args):
        if isinstance(ga, Variable) and ga.name not in fix_names:
            # counted position: only a type constraint
            if isinstance(ea, Variable):
                equations.append(("mem", ("param", ea.name), ga.type))
            elif ea.index not in table.members(ga.type):
                return None
        elif isinstance(ga, Variable):
            key = ("fix", ga.name)
            if isinstance(ea, Variable):
                equations.append(("eq", key, ("param", ea.name)))
            else:
                equations.append(("pin", key, ea.index))
        else:  # instantiated fixed position
            if isinstance(ea, Variable):
                equations.append(("pin", ("param", ea.name), ga.index))
            elif ea.index != ga.index:
                return None
    return _Match(action_atom, group_atom, equations)


def _new_system(action_params: tuple[Variable, ...], fix: tuple[Variable, ...],
                table: TypeTable) -> _EqSystem:
    sys_ = _EqSystem(table)
    for v in action_params:
        sys_.add_var(("param", v.name), v.type)
    for v in fix:
        sys_.add_var(("fix", v.name), v.type)
    return sys_


def _apply_equations(sys_: _EqSystem, equations: list[tuple]) -> None:
    for eq in equations:
        if eq[0] == "eq":
            sys_.union(eq[1], eq[2])
        elif eq[0] == "pin":
            sys_.pin_obj(eq[1], eq[2])
        else:
            sys_.narrow(eq[1], eq[2])


def _entailed(sys_: _EqSystem, equations: list[tuple]) -> bool:
    for eq in equations:
        if eq[0] == "eq" and not sys_.entails_eq(eq[1], eq[2]):
            return False
        if eq[0] == "pin" and not sys_.entails_pin(eq[1], eq[2]):
            return False
        if eq[0] == "mem" and not sys_.entails_member(eq[1], eq[2]):
            return False
    return True


def _arg_term(arg, fix_names: frozenset[str]):
    if isinstance(arg, ObjectRef):
        return ("obj", arg.index)
    return ("fix", arg.name) if arg.name in fix_names else ("param", arg.name)


def _atoms_provably_distinct(sys_: _EqSystem, a: Atom, b: Atom,
                             fix_names: frozenset[str]) -> bool:
    if a.predicate != b.predicate:
        return True
    for ea, eb in zip(a.args, b.args):
        ta, tb = _arg_term(ea, fix_names), _arg_term(eb, fix_names)
        if ta[0] != "obj" and ta not in sys_.parent:
            return False
        if tb[0] != "obj" and tb not in sys_.parent:
            return False
        if sys_.provably_distinct(ta, tb):
            return True
    return False


def _atom_key(atom: Atom) -> tuple:
    return (atom.predicate, atom.args)


# ── Verification ──────────────────────────────────────────────────────────────

def _init_at_most_one(fix_names: frozenset[str], atoms: tuple[Atom, ...],
                      problem: Problem, require_exactly_one: bool = False,
                      ) -> bool:
    """At most one group fact per fixed instantiation in the initial state."""
    table = problem.types
    by_pred: dict[str, Atom] = {a.predicate: a for a in atoms}
    counts: dict[tuple, int] = {}
    for fact in problem.init:
        atom = by_pred.get(fact[0])
        if atom is None:
            continue
        binding: dict[str, int] = {}
        in_group = True
        for obj, ga in zip(fact[1], atom.args):
            if isinstance(ga, ObjectRef):
                if ga.index != obj:
                    in_group = False
                    break
            elif ga.name in fix_names:
                if obj not in table.members(ga.type) or \
                        binding.setdefault(ga.name, obj) != obj:
                    in_group = False
                    break
            elif obj not in table.members(ga.type):
                in_group = False
                break
        if not in_group:
            continue
        sig = tuple(sorted(binding.items()))
        counts[sig] = counts.get(sig, 0) + 1
        if counts[sig] > 1:
            return False
    if require_exactly_one:
        return sum(counts.values()) == 1
    return True


def _balance_holds(fix: tuple[Variable, ...], atoms: tuple[Atom, ...],
                   problem: Problem) -> bool:
    """Every action deletes at least as many group facts as it adds."""
    table = problem.types
    fix_names = frozenset(v.name for v in fix)
    for act in problem.actions:
        add_matches = [m for e in act.add for g in atoms
                       if (m := _match_atom(e, g, table, fix_names))]
        if not add_matches:
            continue
        prec_keys = {_atom_key(a) for a in act.prec}
        del_in_prec = [d for d in act.del_ if _atom_key(d) in prec_keys]
        del_matches = [m for d in del_in_prec for g in atoms
                       if (m := _match_atom(d, g, table, fix_names))]
        for size in range(1, len(add_matches) + 1):
            for subset in itertools.combinations(add_matches, size):
                joint = _new_system(act.params, fix, table)
                for m in subset:
                    _apply_equations(joint, m.equations)
                if not joint.ok:
                    continue
                if not _injective_del_cover(joint, subset, del_matches,
                                            fix_names):
                    return False
    return True


def _injective_del_cover(joint: _EqSystem, adds, del_matches,
                         fix_names: frozenset[str]) -> bool:
    """Find |adds| entailed deletes with pairwise provably-distinct facts."""
    usable = [m for m in del_matches if _entailed(joint, m.equations)]
    need = len(adds)
    if len(usable) < need:
        return False
    if need == 1:
        return True
    for combo in itertools.combinations(usable, need):
        if all(_atoms_provably_distinct(joint, a.atom, b.atom, fix_names)
               for a, b in itertools.combinations(combo, 2)):
            return True
    return False


def verify_fam(candidate: LmgCandidate, problem: Problem) -> bool:
    """Sound lifted check that every fixed instantiation is a mutex group."""
    fix_names = frozenset(v.name for v in candidate.fix)
    if len({a.predicate for a in candidate.atoms}) != len(candidate.atoms):
        return False  # two atoms sharing a predicate: ambiguous, reject
    if not _init_at_most_one(fix_names, candidate.atoms, problem):
        return False
    return _balance_holds(candidate.fix, candidate.atoms, problem)


def classify_exactly_one(plmg: Plmg, problem: Problem) -> bool:
    """True only if exactly one group fact holds in every reachable state."""
    if not _init_at_most_one(frozenset(), plmg.atoms, problem,
                             require_exactly_one=True):
        return False
    table = problem.types
    no_fix: tuple[Variable, ...] = ()
    for act in problem.actions:
        add_matches = [m for e in act.add for g in plmg.atoms
                       if (m := _match_atom(e, g, table, frozenset()))]
        for d in act.del_:
            for g in plmg.atoms:
                dm = _match_atom(d, g, table, frozenset())
                if dm is None:
                    continue
                closure = _new_system(act.params, no_fix, table)
                _apply_equations(closure, dm.equations)
                if not closure.ok:
                    continue
                if not any(_entailed(closure, am.equations)
                           for am in add_matches):
                    return False
    return True


# ── Candidate generation ──────────────────────────────────────────────────────

def _descendant_types(table: TypeTable, type_name: str) -> list[str]:
    return [t for t in table.types if table.is_subtype(t, type_name)]


def _canonical_key(candidate: LmgCandidate) -> tuple:
    """Structure key with variables renamed by first occurrence."""
    rename: dict[str, str] = {}
    fix_names = {v.name for v in candidate.fix}
    parts = []
    for atom in sorted(candidate.atoms, key=lambda a: a.predicate):
        arg_parts = []
        for arg in atom.args:
            if isinstance(arg, ObjectRef):
                arg_parts.append(("o", arg.index))
            else:
                kind = "f" if arg.name in fix_names else "c"
                if arg.name not in rename:
                    rename[arg.name] = f"{kind}{len(rename)}"
                arg_parts.append((rename[arg.name], arg.type))
        parts.append((atom.predicate, tuple(arg_parts)))
    return tuple(parts)


def _single_candidates(problem: Problem) -> list[LmgCandidate]:
    table = problem.types
    out = []
    for pred in problem.predicates:
        positions = range(pred.arity)
        for counted_mask in range(1 << pred.arity):
            counted = [j for j in positions if counted_mask >> j & 1]
            fixed = [j for j in positions if not counted_mask >> j & 1]
            # fixed positions may be narrowed to any subtype
            specs = [_descendant_types(table, pred.param_types[j])
                     for j in fixed]
            for chosen in itertools.product(*specs):
                args: list[Variable] = []
                fix_vars, cnt_vars = [], []
                for j in positions:
                    if j in counted:
                        v = Variable(f"?c{j}", pred.param_types[j])
                        cnt_vars.append(v)
                    else:
                        v = Variable(f"?f{j}", chosen[fixed.index(j)])
                        fix_vars.append(v)
                    args.append(v)
                out.append(LmgCandidate(tuple(fix_vars), tuple(cnt_vars),
                                        (Atom(pred.name, tuple(args)),)))
    return out


def _merge(c1: LmgCandidate, c2: LmgCandidate, ordinal: int) -> LmgCandidate | None:
    """Union two singles with identical fixed type signatures."""
    sig1 = sorted(v.type for v in c1.fix)
    sig2 = sorted(v.type for v in c2.fix)
    if sig1 != sig2:
        return None
    if {a.predicate for a in c1.atoms} & {a.predicate for a in c2.atoms}:
        return None
    # canonical pairing: both sorted by (type, name)
    f1 = sorted(c1.fix, key=lambda v: (v.type, v.name))
    f2 = sorted(c2.fix, key=lambda v: (v.type, v.name))
    rename = {v2.name: v1.name for v1, v2 in zip(f1, f2)}
    # counted variables of c2 renamed apart
    cnt2 = []
    for i, v in enumerate(c2.cnt):
        fresh = Variable(f"?m{ordinal}_{i}", v.type)
        rename[v.name] = fresh.name
        cnt2.append(fresh)
    new_atoms = []
    for atom in c2.atoms:
        args = tuple(
            Variable(rename[a.name], a.type) if isinstance(a, Variable) else a
            for a in atom.args)
        new_atoms.append(Atom(atom.predicate, args))
    return LmgCandidate(c1.fix, c1.cnt + tuple(cnt2),
                        c1.atoms + tuple(new_atoms))


def generate_candidates(problem: Problem) -> list[LmgCandidate]:
    """Single-predicate candidates plus one round of pairwise merges."""
    singles = _single_candidates(problem)
    fix_names = {c: frozenset(v.name for v in c.fix) for c in singles}
    seeds = [c for c in singles
             if _init_at_most_one(fix_names[c], c.atoms, problem)]
    merged = []
    ordinal = 0
    for c1, c2 in itertools.combinations(seeds, 2):
        m = _merge(c1, c2, ordinal)
        if m is not None:
            merged.append(m)
            ordinal += 1
    out: list[LmgCandidate] = []
    seen = set()
    for cand in singles + merged:
        key = _canonical_key(cand)
        if key not in seen:
            seen.add(key)
            out.append(cand)
    return out


def verified_candidates(problem: Problem) -> list[LmgCandidate]:
    return [c for c in generate_candidates(problem) if verify_fam(c, problem)]


# ── Instantiation ─────────────────────────────────────────────────────────────

def instantiate(candidate: LmgCandidate, problem: Problem,
                start_id: int = 0) -> list[Plmg]:
    """One PLMG per assignment of the fixed variables over their types."""
    table = problem.types
    domains = [table.members(v.type) for v in candidate.fix]
    out = []
    for combo in itertools.product(*domains):
        binding = {v.name: obj for v, obj in zip(candidate.fix, combo)}
        atoms = []
        for atom in candidate.atoms:
            args = tuple(
                ObjectRef(binding[a.name])
                if isinstance(a, Variable) and a.name in binding else a
                for a in atom.args)
            atoms.append(Atom(atom.predicate, args))
        facts: set[Fact] = set()
        for atom in atoms:
            cnt_positions = [(j, a) for j, a in enumerate(atom.args)
                             if isinstance(a, Variable)]
            value_sets = [table.members(a.type) for _, a in cnt_positions]
            for values in itertools.product(*value_sets):
                arg_idx = []
                vals = dict(zip((j for j, _ in cnt_positions), values))
                for j, a in enumerate(atom.args):
                    arg_idx.append(vals[j] if j in vals else a.index)
                facts.add((atom.predicate, tuple(arg_idx)))
        plmg = Plmg(id=start_id + len(out), cnt=candidate.cnt,
                    atoms=tuple(atoms), exactly_one=False,
                    ground_facts=frozenset(facts))
        plmg = replace(plmg, exactly_one=classify_exactly_one(plmg, problem))
        out.append(plmg)
    return out


# ── Exhaustive reachability oracle ────────────────────────────────────────────

def grounded_transitions(problem: Problem) -> list[
        tuple[frozenset[Fact], frozenset[Fact], frozenset[Fact]]]:
    """(prec, add, del) fact sets for every type-valid ground action."""
    out = []
    for ga in ground_actions(problem):
        binding = {v.name: i for v, i in zip(ga.schema.params, ga.binding)}
        prec = frozenset(ground_atom(a, binding) for a in ga.schema.prec)
        add = frozenset(ground_atom(a, binding) for a in ga.schema.add)
        dele = frozenset(ground_atom(a, binding) for a in ga.schema.del_)
        out.append((prec, add, dele))
    return out


def verify_mutex_exhaustive(plmg: Plmg, problem: Problem,
                            state_cap: int) -> MutexVerdict:
    """BFS over reachable states; independent ground-truth for the group."""
    if state_cap <= 0:
        return MutexVerdict("inconclusive")
    transitions = grounded_transitions(problem)
    group = plmg.ground_facts
    start = frozenset(problem.init)
    seen = {start}
    frontier = [start]
    while frontier:
        next_frontier = []
        for state in frontier:
            true_count = len(state & group)
            if true_count >= 2 or (plmg.exactly_one and true_count == 0):
                return MutexVerdict("violated", state)
            for prec, add, dele in transitions:
                if prec <= state:
                    succ = (state - dele) | add
                    if succ not in seen:
                        if len(seen) >= state_cap:
                            return MutexVerdict("inconclusive")
                        seen.add(succ)
                        next_frontier.append(succ)
        frontier = next_frontier
    return MutexVerdict("holds")


# ── Debug dump ────────────────────────────────────────────────────────────────

def _atom_repr(atom: Atom, problem: Problem) -> str:
    parts = []
    for a in atom.args:
        parts.append(a.name if isinstance(a, Variable)
                     else problem.object_name(a.index))
    return f"{atom.predicate}({', '.join(parts)})" if parts else atom.predicate


def dump_plmgs(plmgs: list[Plmg], problem: Problem) -> str:
    """One PLMG per line: EO|AMO  fixed-binding  {atoms}  |F(M)|."""
    lines = []
    for p in plmgs:
        kind = "EO" if p.exactly_one else "AMO"
        fixed_objs = sorted({problem.object_name(a.index)
                             for atom in p.atoms for a in atom.args
                             if isinstance(a, ObjectRef)})
        binding = f"[{' '.join(fixed_objs)}]" if fixed_objs else "[]"
        atoms = "{" + ", ".join(sorted(_atom_repr(a, problem)
                                       for a in p.atoms)) + "}"
        lines.append(f"{kind}  {binding}  {atoms}  {len(p.ground_facts)}")
    return "\n".join(lines)
