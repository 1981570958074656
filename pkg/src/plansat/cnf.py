"""CNF formula container shared by all encoders.

Variables are identified by hashable key tuples whose first element is a tag
constant; the formula keeps a bijection between keys and dense DIMACS ids.
Clauses are plain lists of signed ints. `segment_marks` records the
(variables, clauses) totals at each timestep boundary so tests can check the
per-step growth is constant.

Key layouts (t is a state layer for state variables and an action step for
action/argument/helper variables):

    (ACTION, action, t)                     action executed at step t
    (ARG_EQ, slot, obj, t)                  unified argument slot = object
    (FACT, fact, t)                         grounded fact true at layer t
    (CAUSE_GROUND, action, pol, eff, fact, t)  ground cause variable
    (CNT_EQ, plmg, cnt, obj, t)             counted variable = object (one-hot)
    (LIT, plmg, pred, t)                    group literal selected (pred may be NONE_LIT)
    (IN_DOM, plmg, cnt, slot, t)            slot's object lies in cnt's type
    (CNT_EQ_ARG, plmg, cnt, slot, t, phase) counted var equals slot value;
                                            phase R: layer t-1 vs step-t args,
                                            phase W: layer t vs step-t args
    (CNT_CAUSE, plmg, cnt, action, eff, t)  counted var set by effect
    (LIT_CAUSE, plmg, pred, action, eff, t) literal set by effect
    (CNT_CHANGED, plmg, cnt, t)             counted var differs at t-1 vs t
    (ARG_BIT, slot, bit, t)                 bit of the slot's object index
    (CNT_BIT, plmg, cnt, bit, t)            bit of the counted var's object index
    (BIT_EQ, plmg, cnt, slot, bit, t, phase) per-bit equality helper
    (CNT_CHANGED_BIT, plmg, cnt, bit, t)    per-bit change helper
    (AMO_AUX, group, k, t)                  sequential-counter auxiliary
"""

from __future__ import annotations

from typing import IO, Hashable

VarKey = tuple

ACTION = "a"
ARG_EQ = "arg"
FACT = "f"
CAUSE_GROUND = "cg"
CNT_EQ = "ce"
LIT = "lit"
IN_DOM = "dom"
CNT_EQ_ARG = "eq"
CNT_CAUSE = "cc"
LIT_CAUSE = "lc"
CNT_CHANGED = "chg"
ARG_BIT = "ab"
CNT_BIT = "cb"
BIT_EQ = "be"
CNT_CHANGED_BIT = "cbb"
AMO_AUX = "amo"

NONE_LIT = "<none>"

PHASE_READ = "r"   # state layer t-1 against the args of step t
PHASE_WRITE = "w"  # state layer t against the args of step t

# Pairwise at-most-one up to this many variables, sequential counter above.
AMO_PAIRWISE_MAX = 256


class CnfError(Exception):
    pass


class DuplicateKeyError(CnfError):
    pass


class MissingVariableError(CnfError):
    pass


class CnfFormula:
    """Variable table plus clause store, serializable to DIMACS."""

    def __init__(self):
        self._ids: dict[VarKey, int] = {}
        self._keys: list[VarKey | None] = [None]  # index = var id
        self.clauses: list[list[int]] = []
        self.segment_marks: list[tuple[int, int]] = []
        self._amo_groups = 0

    @property
    def num_vars(self) -> int:
        return len(self._keys) - 1

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def new_var(self, key: VarKey) -> int:
        if key in self._ids:
            raise DuplicateKeyError(f"variable key already allocated: {key!r}")
        vid = len(self._keys)
        self._ids[key] = vid
        self._keys.append(key)
        return vid

    def var(self, key: VarKey) -> int:
        try:
            return self._ids[key]
        except KeyError:
            raise MissingVariableError(f"no variable for key {key!r}") from None

    def has_var(self, key: VarKey) -> bool:
        return key in self._ids

    def key_of(self, vid: int) -> VarKey:
        if not 1 <= vid <= self.num_vars:
            raise MissingVariableError(f"no variable with id {vid}")
        return self._keys[vid]

    def add_clause(self, lits: list[int]) -> None:
        if not lits:
            raise CnfError("refusing to emit an empty clause")
        for lit in lits:
            if not 1 <= abs(lit) <= self.num_vars:
                raise CnfError(f"literal {lit} references an unallocated variable")
        self.clauses.append(list(lits))

    def mark_segment(self) -> None:
        self.segment_marks.append((self.num_vars, self.num_clauses))

    # -- cardinality ----------------------------------------------------------

    def at_most_one(self, var_ids: list[int], t: int = 0,
                    pairwise_max: int | None = None) -> None:
        """Constrain at most one of `var_ids` to be true.

        Pairwise clauses up to `pairwise_max` variables (default 256),
        sequential-counter encoding with n-1 auxiliaries above.
        """
        n = len(var_ids)
        if n <= 1:
            return
        limit = AMO_PAIRWISE_MAX if pairwise_max is None else pairwise_max
        if n <= limit:
            for i in range(n):
                for j in range(i + 1, n):
                    self.add_clause([-var_ids[i], -var_ids[j]])
            return
        group = self._amo_groups
        self._amo_groups += 1
        aux = [self.new_var((AMO_AUX, group, k, t)) for k in range(n - 1)]
        self.add_clause([-var_ids[0], aux[0]])
        for i in range(1, n - 1):
            self.add_clause([-var_ids[i], aux[i]])
            self.add_clause([-aux[i - 1], aux[i]])
            self.add_clause([-var_ids[i], -aux[i - 1]])
        self.add_clause([-var_ids[n - 1], -aux[n - 2]])

    # -- serialization --------------------------------------------------------

    def write_dimacs(self, sink: IO[str]) -> None:
        sink.write(f"p cnf {self.num_vars} {self.num_clauses}\n")
        for clause in self.clauses:
            sink.write(" ".join(str(lit) for lit in clause) + " 0\n")

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {self.num_clauses}"]
        for clause in self.clauses:
            lines.append(" ".join(str(lit) for lit in clause) + " 0")
        return "\n".join(lines) + "\n"

    def decode_model(self, assignment: dict[int, bool]) -> dict[VarKey, bool]:
        """Map a solver assignment back onto variable keys; must be total."""
        out: dict[VarKey, bool] = {}
        for vid in range(1, self.num_vars + 1):
            if vid not in assignment:
                raise MissingVariableError(f"assignment misses variable {vid}")
            out[self._keys[vid]] = assignment[vid]
        return out

    def stats_line(self, length: int) -> str:
        return f"length={length} vars={self.num_vars} clauses={self.num_clauses}"


def implies(antecedent: list[int], consequent: int) -> list[int]:
    """Clause form of (/\\ antecedent) -> consequent."""
    return [-lit for lit in antecedent] + [consequent]
