"""Typed STRIPS PDDL front end and the lifted problem representation.

Parses domain/problem pairs (requirements :strips and :typing only) into an
immutable `Problem` and provides the grounding utilities the rest of the
toolkit builds on: type flattening with contiguous object index ranges,
predicate grounding, effect achievers, ground-action enumeration and state
transition simulation.

Object indices are assigned depth-first over the type tree (a type's own
objects before its subtypes') so that every type's members form a contiguous
index range; the binary state encoding relies on that.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product


class ParseError(Exception):
    """Syntactically invalid PDDL; message carries line/column."""


class UnsupportedRequirementError(ParseError):
    """Input uses a PDDL feature outside the typed-STRIPS fragment."""

    def __init__(self, requirement: str):
        super().__init__(f"unsupported requirement: {requirement}")
        self.requirement = requirement


class TypeHierarchyError(ParseError):
    """The declared type hierarchy is not a tree."""


SUPPORTED_REQUIREMENTS = {":strips", ":typing"}

ROOT_TYPE = "object"

# A fact is a fully grounded atom: (predicate name, object index tuple).
Fact = tuple[str, tuple[int, ...]]


# ── Domain types ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Variable:
    name: str
    type: str


@dataclass(frozen=True)
class ObjectRef:
    index: int


Arg = Variable | ObjectRef


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Arg, ...]
    negated: bool = False  # only meaningful inside effect lists


@dataclass(frozen=True)
class Object:
    name: str
    index: int
    type: str


@dataclass(frozen=True)
class TypeTable:
    """Flattened type tree with contiguous member index ranges."""

    types: tuple[str, ...]
    parent: dict[str, str | None]
    ranges: dict[str, tuple[int, int]]  # type -> half-open [start, end)

    def members(self, type_name: str) -> range:
        start, end = self.ranges[type_name]
        return range(start, end)

    def is_subtype(self, sub: str, sup: str) -> bool:
        t: str | None = sub
        while t is not None:
            if t == sup:
                return True
            t = self.parent[t]
        return False


@dataclass(frozen=True)
class PredicateSchema:
    name: str
    param_types: tuple[str, ...]
    static: bool  # appears in no effect

    @property
    def arity(self) -> int:
        return len(self.param_types)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[Variable, ...]
    prec: tuple[Atom, ...]
    add: tuple[Atom, ...]
    del_: tuple[Atom, ...]


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    types: TypeTable
    objects: tuple[Object, ...]
    predicates: tuple[PredicateSchema, ...]
    actions: tuple[ActionSchema, ...]
    init: frozenset[Fact]
    goal: frozenset[Fact]

    def predicate(self, name: str) -> PredicateSchema:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def object_index(self, name: str) -> int:
        for o in self.objects:
            if o.name == name:
                return o.index
        raise KeyError(name)

    def object_name(self, index: int) -> str:
        return self.objects[index].name


@dataclass(frozen=True)
class GroundAction:
    schema: ActionSchema
    binding: tuple[int, ...]

    def name(self, problem: Problem) -> str:
        args = " ".join(problem.object_name(i) for i in self.binding)
        return f"({self.schema.name} {args})" if args else f"({self.schema.name})"


# ── Tokeniser ─────────────────────────────────────────────────────────────────

_ID_RE = re.compile(r"[a-zA-Z0-9_\-=]+")


@dataclass
class _Token:
    kind: str  # '(', ')', 'ID'
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
        else:
            prefix = ""
            if ch in "?:":
                prefix = ch
                i += 1
                col += 1
            m = _ID_RE.match(text, i)
            if not m:
                raise ParseError(f"line {line}, column {col}: unexpected character {ch!r}")
            tokens.append(_Token("ID", (prefix + m.group(0)).lower(), line, col))
            col += m.end() - i
            i = m.end()
    return tokens


# ── S-expression reader ───────────────────────────────────────────────────────

def _read_sexprs(tokens: list[_Token]):
    """Parse the token stream into nested lists of tokens."""
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok.kind == "(":
            items = []
            while True:
                if pos >= len(tokens):
                    raise ParseError(
                        f"line {tok.line}, column {tok.col}: unclosed parenthesis")
                if tokens[pos].kind == ")":
                    pos += 1
                    return items
                items.append(read())
        if tok.kind == ")":
            raise ParseError(f"line {tok.line}, column {tok.col}: unbalanced ')'")
        return tok

    exprs = []
    while pos < len(tokens):
        exprs.append(read())
    return exprs


def _head(expr) -> str:
    if isinstance(expr, list) and expr and isinstance(expr[0], _Token):
        return expr[0].value
    return ""


def _err(tok: _Token, msg: str) -> ParseError:
    return ParseError(f"line {tok.line}, column {tok.col}: {msg}")


def _parse_typed_list(items: list) -> list[tuple[str, str]]:
    """Parse `a b - t c - u d` into [(a,t),(b,t),(c,u),(d,object)] pairs."""
    out: list[tuple[str, str]] = []
    pending: list[_Token] = []
    i = 0
    while i < len(items):
        tok = items[i]
        if not isinstance(tok, _Token):
            raise ParseError("nested expression in typed list")
        if tok.value == "-":
            i += 1
            if i >= len(items) or not isinstance(items[i], _Token):
                raise _err(tok, "missing type after '-'")
            ty = items[i].value
            if ty.startswith("("):
                raise _err(items[i], "either-types are not supported")
            for p in pending:
                out.append((p.value, ty))
            pending = []
            i += 1
        else:
            pending.append(tok)
            i += 1
    for p in pending:
        out.append((p.value, ROOT_TYPE))
    return out


# ── Domain/problem assembly ───────────────────────────────────────────────────

_UNSUPPORTED_CONSTRUCTS = {
    "when": "conditional effects",
    "forall": "quantified formulas",
    "exists": "quantified formulas",
    "or": "disjunctive conditions",
    "imply": "disjunctive conditions",
    "increase": "numeric fluents",
    "decrease": "numeric fluents",
    "assign": "numeric fluents",
}


def _parse_atom_expr(expr, where: str) -> tuple[str, list[str], bool]:
    """Return (predicate, raw args, negated) for one literal expression."""
    if not isinstance(expr, list) or not expr:
        raise ParseError(f"malformed atom in {where}")
    head = _head(expr)
    negated = False
    if head == "not":
        if len(expr) != 2:
            raise _err(expr[0], "malformed (not ...)")
        negated = True
        expr = expr[1]
        head = _head(expr)
    if head in _UNSUPPORTED_CONSTRUCTS:
        raise _err(expr[0], f"{_UNSUPPORTED_CONSTRUCTS[head]} are not supported")
    if head == "=":
        raise _err(expr[0], "equality conditions are not supported")
    if not all(isinstance(t, _Token) for t in expr):
        raise _err(expr[0], f"nested expression in atom in {where}")
    return head, [t.value for t in expr[1:]], negated


def _conjunction(expr, where: str) -> list:
    """Flatten an (and ...) or single-literal condition into literal exprs."""
    if isinstance(expr, list) and _head(expr) == "and":
        return expr[1:]
    if isinstance(expr, list) and not expr:
        return []
    return [expr]


class _DomainInfo:
    def __init__(self):
        self.name = ""
        self.type_decls: list[tuple[str, str]] = []
        self.constants: list[tuple[str, str]] = []
        self.predicates: dict[str, tuple[str, ...]] = {}
        self.actions: list[dict] = []


def _parse_domain(exprs) -> _DomainInfo:
    if _head(exprs) != "define":
        raise ParseError("domain file must start with (define (domain ...))")
    info = _DomainInfo()
    for section in exprs[1:]:
        head = _head(section)
        if head == "domain":
            info.name = section[1].value
        elif head == ":requirements":
            for tok in section[1:]:
                if tok.value not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedRequirementError(tok.value)
        elif head == ":types":
            info.type_decls = _parse_typed_list(section[1:])
        elif head == ":constants":
            info.constants = _parse_typed_list(section[1:])
        elif head == ":predicates":
            for pexpr in section[1:]:
                if not isinstance(pexpr, list) or not pexpr:
                    raise ParseError("malformed predicate declaration")
                pname = pexpr[0].value
                params = _parse_typed_list(pexpr[1:])
                if pname in info.predicates:
                    raise _err(pexpr[0], f"duplicate predicate {pname}")
                info.predicates[pname] = tuple(ty for _, ty in params)
        elif head == ":action":
            info.actions.append(_parse_action_sections(section))
        elif head == ":functions":
            raise UnsupportedRequirementError(":action-costs")
        else:
            tok = section[0] if isinstance(section, list) else section
            raise _err(tok, f"unknown domain section {head!r}")
    return info


def _parse_action_sections(section) -> dict:
    name = section[1].value
    spec = {"name": name, "params": [], "prec": [], "eff": []}
    i = 2
    while i < len(section):
        key = section[i].value
        if key == ":parameters":
            spec["params"] = _parse_typed_list(section[i + 1])
        elif key == ":precondition":
            spec["prec"] = _conjunction(section[i + 1], f"action {name} precondition")
        elif key == ":effect":
            spec["eff"] = _conjunction(section[i + 1], f"action {name} effect")
        else:
            raise _err(section[i], f"unknown action section {key!r}")
        i += 2
    return spec


def flatten_types(raw_hierarchy: list[tuple[str, str]],
                  objects: list[tuple[str, str]]) -> tuple[TypeTable, tuple[Object, ...]]:
    """Flatten a declared type tree and assign contiguous object indices.

    `raw_hierarchy` is a list of (type, parent) declarations; `objects` is a
    list of (name, type) pairs in declaration order. Rejects hierarchies that
    are not trees (duplicate parents, cycles).
    """
    parent: dict[str, str | None] = {ROOT_TYPE: None}
    order: list[str] = [ROOT_TYPE]
    for ty, par in raw_hierarchy:
        if ty == ROOT_TYPE:
            if par != ROOT_TYPE:
                raise TypeHierarchyError(f"type {ROOT_TYPE!r} cannot have parent {par!r}")
            continue
        if ty in parent and parent[ty] != par:
            raise TypeHierarchyError(f"type {ty!r} declared with two parents")
        if ty not in parent:
            order.append(ty)
        parent[ty] = par
    # Parents referenced but never declared hang off the root.
    for ty, par in list(parent.items()):
        if par is not None and par not in parent:
            parent[par] = ROOT_TYPE
            order.append(par)
    # Types used only in object declarations.
    for _, ty in objects:
        if ty not in parent:
            parent[ty] = ROOT_TYPE
            order.append(ty)
    # Cycle check: every chain must terminate at the root.
    for ty in order:
        seen = set()
        t: str | None = ty
        while t is not None:
            if t in seen:
                raise TypeHierarchyError(f"type hierarchy has a cycle through {ty!r}")
            seen.add(t)
            t = parent[t]

    children: dict[str, list[str]] = {t: [] for t in order}
    for ty in order:
        par = parent[ty]
        if par is not None:
            children[par].append(ty)

    by_type: dict[str, list[str]] = {t: [] for t in order}
    for name, ty in objects:
        by_type[ty].append(name)

    object_list: list[Object] = []
    ranges: dict[str, tuple[int, int]] = {}

    def assign(ty: str):
        start = len(object_list)
        for name in by_type[ty]:
            object_list.append(Object(name, len(object_list), ty))
        for child in children[ty]:
            assign(child)
        ranges[ty] = (start, len(object_list))

    assign(ROOT_TYPE)
    table = TypeTable(types=tuple(order), parent=parent, ranges=ranges)
    return table, tuple(object_list)


def parse(domain_text: str, problem_text: str) -> Problem:
    """Parse a typed STRIPS domain/problem pair into a `Problem`."""
    dom_exprs = _read_sexprs(_tokenize(domain_text))
    prob_exprs = _read_sexprs(_tokenize(problem_text))
    if len(dom_exprs) != 1 or len(prob_exprs) != 1:
        raise ParseError("expected exactly one (define ...) form per file")
    info = _parse_domain(dom_exprs[0])

    prob = prob_exprs[0]
    if _head(prob) != "define":
        raise ParseError("problem file must start with (define (problem ...))")
    pname = ""
    objects: list[tuple[str, str]] = []
    init_exprs: list = []
    goal_exprs: list = []
    for section in prob[1:]:
        head = _head(section)
        if head == "problem":
            pname = section[1].value
        elif head == ":domain":
            if section[1].value != info.name:
                raise ParseError(
                    f"problem references domain {section[1].value!r}, "
                    f"domain file defines {info.name!r}")
        elif head == ":requirements":
            for tok in section[1:]:
                if tok.value not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedRequirementError(tok.value)
        elif head == ":objects":
            objects = _parse_typed_list(section[1:])
        elif head == ":init":
            init_exprs = section[1:]
        elif head == ":goal":
            goal_exprs = _conjunction(section[1], "goal") if len(section) > 1 else []
        else:
            tok = section[0] if isinstance(section, list) else section
            raise _err(tok, f"unknown problem section {head!r}")

    all_objects = info.constants + objects
    names = [n for n, _ in all_objects]
    if len(set(names)) != len(names):
        dup = next(n for n in names if names.count(n) > 1)
        raise ParseError(f"duplicate object name {dup!r}")
    table, object_list = flatten_types(info.type_decls, all_objects)
    obj_index = {o.name: o.index for o in object_list}
    obj_type = {o.name: o.type for o in object_list}

    # Predicate schemas; static flag filled in after actions are built.
    pred_types = dict(info.predicates)
    for ty_tuple in pred_types.values():
        for ty in ty_tuple:
            if ty not in table.ranges:
                raise ParseError(f"predicate uses undeclared type {ty!r}")

    def build_atom(expr, params: dict[str, str], where: str) -> Atom:
        pred, raw_args, negated = _parse_atom_expr(expr, where)
        if pred not in pred_types:
            raise ParseError(f"unknown predicate {pred!r} in {where}")
        types = pred_types[pred]
        if len(raw_args) != len(types):
            raise ParseError(
                f"predicate {pred!r} expects {len(types)} arguments, "
                f"got {len(raw_args)} in {where}")
        args: list[Arg] = []
        for raw, want in zip(raw_args, types):
            if raw.startswith("?"):
                if raw not in params:
                    raise ParseError(f"undeclared parameter {raw!r} in {where}")
                if not _types_intersect(table, params[raw], want):
                    raise ParseError(
                        f"parameter {raw!r} of type {params[raw]!r} cannot fill a "
                        f"{want!r} position of {pred!r} in {where}")
                args.append(Variable(raw, params[raw]))
            else:
                if raw not in obj_index:
                    raise ParseError(f"unknown object {raw!r} in {where}")
                if not table.is_subtype(obj_type[raw], want):
                    raise ParseError(
                        f"object {raw!r} is not of type {want!r} in {where}")
                args.append(ObjectRef(obj_index[raw]))
        return Atom(pred, tuple(args), negated)

    actions: list[ActionSchema] = []
    for spec in info.actions:
        where = f"action {spec['name']}"
        params = {n: t for n, t in spec["params"]}
        for _, ty in spec["params"]:
            if ty not in table.ranges:
                raise ParseError(f"{where} uses undeclared type {ty!r}")
        prec, add, dele = [], [], []
        for expr in spec["prec"]:
            atom = build_atom(expr, params, where + " precondition")
            if atom.negated:
                raise _err(expr[0], "negative preconditions are not supported")
            prec.append(atom)
        for expr in spec["eff"]:
            atom = build_atom(expr, params, where + " effect")
            (dele if atom.negated else add).append(
                Atom(atom.predicate, atom.args, atom.negated))
        actions.append(ActionSchema(
            name=spec["name"],
            params=tuple(Variable(n, t) for n, t in spec["params"]),
            prec=tuple(prec), add=tuple(add), del_=tuple(dele)))

    in_effect = {a.predicate for act in actions for a in act.add + act.del_}
    predicates = tuple(
        PredicateSchema(name, types, static=name not in in_effect)
        for name, types in pred_types.items())
    pred_by_name = {p.name: p for p in predicates}

    def build_fact(expr, where: str) -> Fact:
        pred, raw_args, negated = _parse_atom_expr(expr, where)
        if negated:
            raise ParseError(f"negative literals are not allowed in {where}")
        if pred not in pred_by_name:
            raise ParseError(f"unknown predicate {pred!r} in {where}")
        schema = pred_by_name[pred]
        if len(raw_args) != schema.arity:
            raise ParseError(f"arity mismatch for {pred!r} in {where}")
        idxs = []
        for raw, want in zip(raw_args, schema.param_types):
            if raw.startswith("?"):
                raise ParseError(f"variable {raw!r} not allowed in {where}")
            if raw not in obj_index:
                raise ParseError(f"unknown object {raw!r} in {where}")
            if not table.is_subtype(obj_type[raw], want):
                raise ParseError(f"object {raw!r} is not of type {want!r} in {where}")
            idxs.append(obj_index[raw])
        return (pred, tuple(idxs))

    init = frozenset(build_fact(e, "init") for e in init_exprs)
    goal = frozenset(build_fact(e, "goal") for e in goal_exprs)

    return Problem(
        name=pname, domain_name=info.name, types=table, objects=object_list,
        predicates=predicates, actions=tuple(actions), init=init, goal=goal)


def _types_intersect(table: TypeTable, a: str, b: str) -> bool:
    # Tree hierarchy: member ranges are nested or disjoint, so two types can
    # share objects only along an ancestor chain.
    return table.is_subtype(a, b) or table.is_subtype(b, a)


def parse_files(domain_path: str, problem_path: str) -> Problem:
    with open(domain_path) as f:
        domain_text = f.read()
    with open(problem_path) as f:
        problem_text = f.read()
    return parse(domain_text, problem_text)


# ── Pretty printer (round-trip support) ───────────────────────────────────────

def _atom_str(atom: Atom, problem: Problem) -> str:
    parts = [atom.predicate]
    for a in atom.args:
        parts.append(a.name if isinstance(a, Variable) else problem.object_name(a.index))
    body = f"({' '.join(parts)})"
    return f"(not {body})" if atom.negated else body


def fact_str(problem: Problem, fact: Fact) -> str:
    pred, args = fact
    parts = [pred] + [problem.object_name(i) for i in args]
    return f"({' '.join(parts)})"


def to_pddl(problem: Problem) -> tuple[str, str]:
    """Render a Problem back to (domain_text, problem_text)."""
    t = problem.types
    lines = [f"(define (domain {problem.domain_name})",
             "  (:requirements :strips :typing)"]
    decls = [f"{ty} - {t.parent[ty]}" for ty in t.types if t.parent[ty] is not None]
    if decls:
        lines.append(f"  (:types {' '.join(decls)})")
    preds = []
    for p in problem.predicates:
        params = " ".join(f"?x{i} - {ty}" for i, ty in enumerate(p.param_types))
        preds.append(f"({p.name}{' ' + params if params else ''})")
    lines.append(f"  (:predicates {' '.join(preds)})")
    for act in problem.actions:
        params = " ".join(f"{v.name} - {v.type}" for v in act.params)
        prec = " ".join(_atom_str(a, problem) for a in act.prec)
        effs = [_atom_str(a, problem) for a in act.add]
        effs += [_atom_str(Atom(a.predicate, a.args, True), problem) for a in act.del_]
        lines.append(f"  (:action {act.name}")
        lines.append(f"    :parameters ({params})")
        lines.append(f"    :precondition (and {prec})")
        lines.append(f"    :effect (and {' '.join(effs)}))")
    lines.append(")")
    domain_text = "\n".join(lines)

    lines = [f"(define (problem {problem.name})",
             f"  (:domain {problem.domain_name})"]
    objs = " ".join(f"{o.name} - {o.type}" for o in problem.objects)
    if objs:
        lines.append(f"  (:objects {objs})")
    init = " ".join(fact_str(problem, f) for f in sorted(problem.init))
    lines.append(f"  (:init {init})")
    goal = " ".join(fact_str(problem, f) for f in sorted(problem.goal))
    lines.append(f"  (:goal (and {goal}))")
    lines.append(")")
    return domain_text, "\n".join(lines)


# ── Grounding utilities ───────────────────────────────────────────────────────

def achievers(problem: Problem, predicate: str,
              positive: bool) -> list[tuple[ActionSchema, Atom]]:
    """All (action, effect atom) pairs with the given predicate and polarity."""
    out = []
    for act in problem.actions:
        for atom in (act.add if positive else act.del_):
            if atom.predicate == predicate:
                out.append((act, atom))
    return out


def ground_facts(pred: PredicateSchema, table: TypeTable) -> list[Fact]:
    """All facts of a predicate, in lexicographic object-index order."""
    domains = [table.members(ty) for ty in pred.param_types]
    return [(pred.name, combo) for combo in product(*domains)]


def ground_atom(atom: Atom, binding: dict[str, int]) -> Fact:
    args = tuple(binding[a.name] if isinstance(a, Variable) else a.index
                 for a in atom.args)
    return (atom.predicate, args)


def ground_action_atoms(ga: GroundAction) -> tuple[frozenset[Fact], frozenset[Fact], frozenset[Fact]]:
    """(preconditions, adds, deletes) of a ground action as fact sets."""
    binding = {v.name: i for v, i in zip(ga.schema.params, ga.binding)}
    prec = frozenset(ground_atom(a, binding) for a in ga.schema.prec)
    add = frozenset(ground_atom(a, binding) for a in ga.schema.add)
    dele = frozenset(ground_atom(a, binding) for a in ga.schema.del_)
    return prec, add, dele


def ground_actions(problem: Problem) -> list[GroundAction]:
    """Every type-valid instantiation of every action schema."""
    out = []
    for act in problem.actions:
        domains = [problem.types.members(v.type) for v in act.params]
        for combo in product(*domains):
            out.append(GroundAction(act, combo))
    return out


def applicable(state: frozenset[Fact], ga: GroundAction) -> bool:
    prec, _, _ = ground_action_atoms(ga)
    return prec <= state


def apply_action(state: frozenset[Fact], ga: GroundAction) -> frozenset[Fact]:
    _, add, dele = ground_action_atoms(ga)
    return (state - dele) | add
