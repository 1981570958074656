"""Reference CDCL SAT solver with a DIMACS command-line interface.

Bundled so the planner works out of the box; any solver that reads a DIMACS
file and prints SAT-competition output (`s SATISFIABLE` / `s UNSATISFIABLE`
plus `v` literal lines) can be swapped in via the planner's --solver option.

Implements the standard loop: two-watched-literal propagation, first-UIP
clause learning, VSIDS-style activities with phase saving, and Luby restarts.

Usage: python -m plansat.sat_solver FILE.cnf
Exit codes follow the competition convention: 10 satisfiable, 20 unsatisfiable.
"""

from __future__ import annotations

import sys

TRUE, FALSE, UNDEF = 1, -1, 0


def parse_dimacs(text: str) -> tuple[int, list[list[int]]]:
    num_vars = 0
    clauses: list[list[int]] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            num_vars = int(parts[2])
            continue
        lits = [int(x) for x in line.split()]
        if lits and lits[-1] == 0:
            lits.pop()
        if lits:
            clauses.append(lits)
        elif line.split() == ["0"]:
            clauses.append([])
    return num_vars, clauses


def _luby(i: int) -> int:
    # Luby sequence, 0-based: 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class Solver:
    def __init__(self, num_vars: int):
        n = num_vars
        self.num_vars = n
        self.assigns = [UNDEF] * (n + 1)
        self.level = [0] * (n + 1)
        self.reason: list[int] = [-1] * (n + 1)  # clause index or -1
        self.polarity = [False] * (n + 1)        # phase saving
        self.activity = [0.0] * (n + 1)
        self.var_inc = 1.0
        self.clauses: list[list[int]] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * n + 2)]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.ok = True

    @staticmethod
    def _widx(lit: int) -> int:
        return (abs(lit) << 1) | (lit < 0)

    def _value(self, lit: int) -> int:
        v = self.assigns[abs(lit)]
        return v if lit > 0 else -v

    def add_clause(self, lits: list[int]) -> None:
        if not self.ok:
            return
        seen = set()
        out = []
        for lit in lits:
            if -lit in seen:
                return  # tautology
            if lit not in seen:
                seen.add(lit)
                out.append(lit)
        if not out:
            self.ok = False
            return
        if len(out) == 1:
            if self._value(out[0]) == FALSE:
                self.ok = False
            elif self._value(out[0]) == UNDEF:
                self._enqueue(out[0], -1)
            return
        ci = len(self.clauses)
        self.clauses.append(out)
        self.watches[self._widx(out[0])].append(ci)
        self.watches[self._widx(out[1])].append(ci)

    def _enqueue(self, lit: int, reason_ci: int) -> None:
        v = abs(lit)
        self.assigns[v] = TRUE if lit > 0 else FALSE
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason_ci
        self.trail.append(lit)

    def _propagate(self) -> int:
        """Unit propagation; returns a conflicting clause index or -1."""
        assigns = self.assigns
        clauses = self.clauses
        watches = self.watches
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            neg = -lit
            widx = self._widx(neg)
            ws = watches[widx]
            kept: list[int] = []
            i = 0
            n_ws = len(ws)
            while i < n_ws:
                ci = ws[i]
                i += 1
                clause = clauses[ci]
                if clause[0] == neg:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                v0 = assigns[abs(first)]
                if (v0 if first > 0 else -v0) == TRUE:
                    kept.append(ci)
                    continue
                for k in range(2, len(clause)):
                    lk = clause[k]
                    vk = assigns[abs(lk)]
                    if (vk if lk > 0 else -vk) != FALSE:
                        clause[1], clause[k] = clause[k], clause[1]
                        watches[self._widx(clause[1])].append(ci)
                        break
                else:
                    kept.append(ci)
                    if (v0 if first > 0 else -v0) == FALSE:
                        kept.extend(ws[i:])
                        watches[widx] = kept
                        self.qhead = len(self.trail)
                        return ci
                    self._enqueue(first, ci)
            watches[widx] = kept
        return -1

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100

    def _analyze(self, conflict_ci: int) -> tuple[list[int], int]:
        """First-UIP analysis; returns (learnt clause, backjump level)."""
        seen = [False] * (self.num_vars + 1)
        learnt = [0]  # placeholder for the asserting literal
        counter = 0
        p = 0  # asserted literal of the reason being expanded; 0 = conflict
        ci = conflict_ci
        idx = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        while True:
            for q in self.clauses[ci]:
                if q == p:
                    continue
                v = abs(q)
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] == cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[abs(self.trail[idx])]:
                idx -= 1
            p = self.trail[idx]
            seen[abs(p)] = False
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            ci = self.reason[abs(p)]
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        back = max(self.level[abs(q)] for q in learnt[1:])
        # Put a highest-level literal second so the watches stay valid.
        for k in range(1, len(learnt)):
            if self.level[abs(learnt[k])] == back:
                learnt[1], learnt[k] = learnt[k], learnt[1]
                break
        return learnt, back

    def _cancel_until(self, target_level: int) -> None:
        while len(self.trail_lim) > target_level:
            bound = self.trail_lim.pop()
            while len(self.trail) > bound:
                lit = self.trail.pop()
                v = abs(lit)
                self.polarity[v] = lit > 0
                self.assigns[v] = UNDEF
                self.reason[v] = -1
        self.qhead = len(self.trail)

    def _decide(self) -> int:
        best, best_act = 0, -1.0
        for v in range(1, self.num_vars + 1):
            if self.assigns[v] == UNDEF and self.activity[v] > best_act:
                best, best_act = v, self.activity[v]
        if best == 0:
            return 0
        return best if self.polarity[best] else -best

    def solve(self) -> bool:
        if not self.ok:
            return False
        if self._propagate() != -1:
            self.ok = False
            return False
        conflicts_total = 0
        restart_num = 0
        budget = 100 * _luby(0)
        conflicts_here = 0
        while True:
            conflict = self._propagate()
            if conflict != -1:
                conflicts_total += 1
                conflicts_here += 1
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, back = self._analyze(conflict)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    ci = len(self.clauses)
                    self.clauses.append(learnt)
                    self.watches[self._widx(learnt[0])].append(ci)
                    self.watches[self._widx(learnt[1])].append(ci)
                    self._enqueue(learnt[0], ci)
                self.var_inc /= 0.95
            else:
                if conflicts_here >= budget:
                    restart_num += 1
                    budget = 100 * _luby(restart_num)
                    conflicts_here = 0
                    self._cancel_until(0)
                    continue
                lit = self._decide()
                if lit == 0:
                    return True
                self.trail_lim.append(len(self.trail))
                self._enqueue(lit, -1)

    def model(self) -> dict[int, bool]:
        return {v: self.assigns[v] == TRUE for v in range(1, self.num_vars + 1)}


def solve_dimacs(text: str) -> tuple[bool, dict[int, bool] | None]:
    num_vars, clauses = parse_dimacs(text)
    solver = Solver(num_vars)
    for clause in clauses:
        solver.add_clause(clause)
    if solver.solve():
        return True, solver.model()
    return False, None


def main(argv: list[str] | None = None) -> int:
    args = sys.argv[1:] if argv is None else argv
    if len(args) != 1:
        print("usage: python -m plansat.sat_solver FILE.cnf", file=sys.stderr)
        return 1
    with open(args[0]) as f:
        text = f.read()
    sat, model = solve_dimacs(text)
    if sat:
        print("s SATISFIABLE")
        lits = [v if model[v] else -v for v in sorted(model)]
        for i in range(0, len(lits), 20):
            chunk = lits[i:i + 20]
            tail = " 0" if i + 20 >= len(lits) else ""
            print("v " + " ".join(str(x) for x in chunk) + tail)
        if not lits:
            print("v 0")
        return 10
    print("s UNSATISFIABLE")
    return 20


if __name__ == "__main__":
    sys.exit(main())
