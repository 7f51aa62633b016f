"""Discrete Bayesian-network sources.

A network is a list of categorical variables with dense ids 0..m-1, one
conditional probability table (CPT) per variable, and a topological order in
which parents precede children.  Parent configurations are indexed in
mixed-radix order with the *last listed parent varying fastest*, i.e. the
row for parent states (s_1, .., s_L) with cardinalities (c_1, .., c_L) is

    row = ((s_1 * c_2 + s_2) * c_3 + s_3) * ...

Joint assignments use the same convention over variable ids, so a dense joint
table laid out this way is exactly a C-order ``numpy`` array with one axis per
variable.

Networks are immutable once built; all randomness is injected through explicit
seeds, so every function here is safe to call from multiple threads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .errors import InvalidStateError, SchemaError, SizeGuardError

#: Default cap on dense table sizes (number of float entries).
DEFAULT_SIZE_GUARD = 2**24

#: Hard ceiling for user-supplied guard overrides.
MAX_SIZE_GUARD = 2**28

_ROW_SUM_TOL = 1e-12
_LOAD_RENORM_TOL = 1e-9


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    cardinality: int


@dataclass(frozen=True)
class Cpt:
    """Conditional distribution of one variable given its parents.

    ``table`` has shape (n_parent_configs, cardinality); each row is the
    distribution of the child for one parent configuration.
    """

    child: int
    parents: tuple[int, ...]
    table: np.ndarray

    def __post_init__(self):
        self.table.setflags(write=False)


@dataclass(frozen=True)
class BayesNet:
    variables: tuple[Variable, ...]
    cpts: tuple[Cpt, ...]
    order: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.variables)

    @property
    def cards(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def card(self, i: int) -> int:
        return self.variables[i].cardinality

    def parents(self, i: int) -> tuple[int, ...]:
        return self.cpts[i].parents

    def max_in_degree(self) -> int:
        return max((len(c.parents) for c in self.cpts), default=0)

    def joint_states(self) -> int:
        n = 1
        for c in self.cards:
            n *= c
        return n

    def id_of(self, name_or_id: str | int) -> int:
        """Resolve a variable name (or id passed through) to its id."""
        if isinstance(name_or_id, int):
            if not 0 <= name_or_id < self.m:
                raise InvalidStateError(f"no variable with id {name_or_id}")
            return name_or_id
        for v in self.variables:
            if v.name == name_or_id:
                return v.id
        raise InvalidStateError(f"no variable named {name_or_id!r}")

    def to_dict(self) -> dict:
        """Canonical dict form matching the JSON file schema."""
        return {
            "variables": [
                {"name": v.name, "cardinality": v.cardinality} for v in self.variables
            ],
            "edges": [
                [self.variables[p].name, self.variables[c.child].name]
                for c in self.cpts
                for p in c.parents
            ],
            "cpts": [
                {
                    "child": self.variables[c.child].name,
                    "parents": [self.variables[p].name for p in c.parents],
                    "rows": [[float(x) for x in row] for row in c.table],
                }
                for c in self.cpts
            ],
        }

    def canonical_bytes(self) -> bytes:
        """Deterministic serialization used for digests."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()

    def digest(self) -> bytes:
        """16-byte truncated SHA-256 of the canonical serialization."""
        return hashlib.sha256(self.canonical_bytes()).digest()[:16]


@dataclass(frozen=True)
class JointTable:
    """Dense probability table over an ordered subset of variables.

    ``probs`` is flat, indexed in mixed-radix order over ``scope`` with the
    last scope variable varying fastest; ``as_array`` restores one axis per
    scope variable.
    """

    scope: tuple[int, ...]
    cards: tuple[int, ...]
    probs: np.ndarray

    def __post_init__(self):
        self.probs.setflags(write=False)

    def as_array(self) -> np.ndarray:
        return self.probs.reshape(self.cards)


@dataclass(frozen=True)
class Partition:
    """Disjoint blocks of variable ids, conditionally independent given a side set."""

    side: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(self.violations)


def config_index(states: Sequence[int], cards: Sequence[int]) -> int:
    """Mixed-radix index of a parent configuration (last parent fastest)."""
    idx = 0
    for s, c in zip(states, cards):
        idx = idx * c + s
    return idx


def make_net(
    variables: Sequence[tuple[str, int]],
    cpts: Sequence[tuple[str, Sequence[str], Sequence[Sequence[float]]]],
) -> BayesNet:
    """Build a network from (name, cardinality) pairs and (child, parents, rows) CPTs.

    The topological order is computed from the parent structure; if the edges
    contain a cycle the declaration order is kept so that ``validate`` can
    report it.
    """
    vs = tuple(Variable(i, name, int(card)) for i, (name, card) in enumerate(variables))
    by_name = {v.name: v.id for v in vs}
    if len(by_name) != len(vs):
        raise SchemaError("variable names must be unique")
    cpt_map: dict[int, Cpt] = {}
    for child, parents, rows in cpts:
        for name in (child, *parents):
            if name not in by_name:
                raise SchemaError(f"cpt references unknown variable {name!r}")
        cid = by_name[child]
        pids = tuple(by_name[p] for p in parents)
        table = np.asarray(rows, dtype=float)
        if table.ndim == 1:
            table = table.reshape(1, -1)
        cpt_map[cid] = Cpt(cid, pids, table)
    ordered = tuple(cpt_map.get(i, Cpt(i, (), np.zeros((1, vs[i].cardinality)))) for i in range(len(vs)))
    return BayesNet(vs, ordered, _topo_order(ordered, len(vs)))


def _topo_order(cpts: Sequence[Cpt], m: int) -> tuple[int, ...]:
    """Kahn topological sort; falls back to id order on a cycle."""
    children: dict[int, list[int]] = {i: [] for i in range(m)}
    indeg = [0] * m
    for c in cpts:
        for p in c.parents:
            if 0 <= p < m:
                children[p].append(c.child)
                indeg[c.child] += 1
    ready = sorted(i for i in range(m) if indeg[i] == 0)
    out: list[int] = []
    while ready:
        v = ready.pop(0)
        out.append(v)
        for w in sorted(children[v]):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
        ready.sort()
    if len(out) != m:
        return tuple(range(m))
    return tuple(out)


def validate(net: BayesNet) -> ValidationReport:
    """Check structural and probabilistic invariants; never raises."""
    rep = ValidationReport()
    m = len(net.variables)
    for i, v in enumerate(net.variables):
        if v.id != i:
            rep.violations.append(f"variable ids must be dense 0..{m - 1}; got {v.id} at position {i}")
        if v.cardinality < 2:
            rep.violations.append(f"variable {v.name!r} has cardinality {v.cardinality} < 2")
    if len(net.cpts) != m:
        rep.violations.append(f"expected {m} cpts, got {len(net.cpts)}")
        return rep
    for i, c in enumerate(net.cpts):
        name = net.variables[i].name if i < m else str(i)
        if c.child != i:
            rep.violations.append(f"cpt at position {i} is for variable {c.child}")
            continue
        if len(set(c.parents)) != len(c.parents):
            rep.violations.append(f"{name!r}: duplicate parents {c.parents}")
        bad_parent = False
        for p in c.parents:
            if not 0 <= p < m:
                rep.violations.append(f"{name!r}: parent id {p} out of range")
                bad_parent = True
            elif p == i:
                rep.violations.append(f"{name!r}: variable is its own parent")
                bad_parent = True
        if bad_parent:
            continue
        n_cfg = 1
        for p in c.parents:
            n_cfg *= net.variables[p].cardinality
        if c.table.shape != (n_cfg, net.variables[i].cardinality):
            rep.violations.append(
                f"{name!r}: table shape {c.table.shape} != ({n_cfg}, {net.variables[i].cardinality})"
            )
            continue
        if np.any(c.table < 0):
            rep.violations.append(f"{name!r}: negative probability entries")
        sums = c.table.sum(axis=1)
        for cfg in np.flatnonzero(np.abs(sums - 1.0) > _ROW_SUM_TOL):
            rep.violations.append(f"{name!r}: row sum {sums[cfg]:.12g} != 1 at parent config {cfg}")
    # order / acyclicity
    if sorted(net.order) != list(range(m)):
        rep.violations.append(f"order {net.order} is not a permutation of 0..{m - 1}")
    else:
        pos = {v: k for k, v in enumerate(net.order)}
        for c in net.cpts:
            for p in c.parents:
                if 0 <= p < m and p != c.child and pos[p] > pos[c.child]:
                    rep.violations.append(
                        f"order places parent {net.variables[p].name!r} after child "
                        f"{net.variables[c.child].name!r}"
                    )
    g = nx.DiGraph()
    g.add_nodes_from(range(m))
    g.add_edges_from((p, c.child) for c in net.cpts for p in c.parents if 0 <= p < m)
    if not nx.is_directed_acyclic_graph(g):
        cyc = nx.find_cycle(g)
        rep.violations.append("cycle: " + " -> ".join(str(e[0]) for e in cyc) + f" -> {cyc[-1][1]}")
    return rep


def _check_states(net: BayesNet, assignment: Sequence[int]) -> None:
    if len(assignment) != net.m:
        raise InvalidStateError(f"assignment length {len(assignment)} != {net.m} variables")
    for i, s in enumerate(assignment):
        if not 0 <= int(s) < net.card(i):
            raise InvalidStateError(
                f"state {s} out of range for variable {net.variables[i].name!r} "
                f"(cardinality {net.card(i)})"
            )


def joint_probability(net: BayesNet, assignment: Sequence[int]) -> float:
    """Probability of a full assignment: product of CPT entries along the order."""
    _check_states(net, assignment)
    p = 1.0
    for i in net.order:
        c = net.cpts[i]
        cfg = config_index([assignment[q] for q in c.parents], [net.card(q) for q in c.parents])
        p *= c.table[cfg, int(assignment[i])]
    return p


def ancestral_closure(net: BayesNet, ids: Iterable[int]) -> set[int]:
    seen = set()
    stack = list(ids)
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(net.cpts[v].parents)
    return seen


def marginal_table(net: BayesNet, ids: Sequence[int], limit: int = DEFAULT_SIZE_GUARD) -> JointTable:
    """Exact marginal distribution over ``ids`` (in the requested order).

    Multiplies CPTs of the ancestral closure in topological order, summing out
    each variable as soon as no remaining factor mentions it, so chains and
    trees stay small even when the full joint would not fit.  Every
    intermediate table is held under ``limit`` entries.
    """
    ids = [net.id_of(i) for i in ids]
    if len(set(ids)) != len(ids) or not ids:
        raise InvalidStateError(f"ids must be a non-empty set of distinct variables, got {ids}")
    needed = ancestral_closure(net, ids)
    order_s = [v for v in net.order if v in needed]
    last = {v: k for k, v in enumerate(order_s)}
    for pos, v in enumerate(order_s):
        for p in net.cpts[v].parents:
            last[p] = max(last[p], pos)
    keep = set(ids)
    active: list[int] = []
    table = np.ones(())
    for pos, v in enumerate(order_s):
        pa = net.cpts[v].parents
        arr = net.cpts[v].table.reshape(tuple(net.card(p) for p in pa) + (net.card(v),))
        axis_of = {a: k for k, a in enumerate(active)}
        targets = [axis_of[p] for p in pa] + [len(active)]
        arr = arr.transpose(np.argsort(targets))
        shape = [1] * (len(active) + 1)
        for t, dim in zip(sorted(targets), arr.shape):
            shape[t] = dim
        table = table[..., None] * arr.reshape(shape)
        if table.size > limit:
            raise SizeGuardError(
                f"intermediate table over {len(active) + 1} variables has {table.size} entries "
                f"(> guard {limit})"
            )
        active.append(v)
        for u in [u for u in active if last[u] == pos and u not in keep]:
            ax = active.index(u)
            table = table.sum(axis=ax)
            active.pop(ax)
    table = table.transpose([active.index(i) for i in ids])
    cards = tuple(net.card(i) for i in ids)
    flat = np.ascontiguousarray(table).reshape(-1)
    return JointTable(tuple(ids), cards, flat)


def enumerate_joint(net: BayesNet, limit: int = DEFAULT_SIZE_GUARD) -> JointTable:
    """Dense joint table over all variables in id order.

    Raises a size-guard error before allocating anything when the state space
    exceeds ``limit``; the returned table sums to 1 within 1e-9.
    """
    n = net.joint_states()
    if n > limit:
        raise SizeGuardError(f"joint state space {n} exceeds guard {limit}")
    jt = marginal_table(net, list(range(net.m)), limit=limit)
    total = float(jt.probs.sum())
    if abs(total - 1.0) > 1e-9:
        raise SchemaError(f"joint table sums to {total:.12g}, not 1; network is inconsistent")
    return jt


def sample(net: BayesNet, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` ancestral samples; deterministic for a fixed seed.

    Returns an (n, m) int array of state vectors in variable-id order.
    """
    if n < 0:
        raise InvalidStateError(f"sample count must be >= 0, got {n}")
    rng = np.random.default_rng(seed)
    out = np.zeros((n, net.m), dtype=np.int64)
    for i in net.order:
        c = net.cpts[i]
        if c.parents:
            cfg = np.zeros(n, dtype=np.int64)
            for p in c.parents:
                cfg = cfg * net.card(p) + out[:, p]
        else:
            cfg = np.zeros(n, dtype=np.int64)
        cum = np.cumsum(c.table, axis=1)[cfg]
        u = rng.random(n)
        out[:, i] = np.minimum((u[:, None] >= cum).sum(axis=1), net.card(i) - 1)
    return out


def moralized_graph(net: BayesNet) -> nx.Graph:
    """Undirected moral graph: skeleton plus edges between co-parents."""
    g = nx.DiGraph()
    g.add_nodes_from(range(net.m))
    g.add_edges_from((p, c.child) for c in net.cpts for p in c.parents)
    return nx.moral_graph(g)


def conditional_partition(net: BayesNet, side: Sequence[int]) -> Partition:
    """Finest grouping of the remaining variables that is conditionally
    independent given ``side``.

    Deletes the side set from the moral graph and takes connected components.
    Because moralization of the full graph is a supergraph of the moralization
    of any ancestral subgraph, separation here implies d-separation, so blocks
    really are conditionally independent.  Blocks are sorted by smallest
    member id; members ascend within a block.
    """
    side_ids = sorted({net.id_of(s) for s in side})
    g = moralized_graph(net)
    g.remove_nodes_from(side_ids)
    blocks = sorted(tuple(sorted(comp)) for comp in nx.connected_components(g))
    return Partition(tuple(side_ids), tuple(blocks))


def resolve_size_guard(value: int | None) -> int:
    """Clamp-check a user-supplied guard override."""
    if value is None:
        return DEFAULT_SIZE_GUARD
    if not 1 <= value <= MAX_SIZE_GUARD:
        raise SizeGuardError(f"size guard {value} outside [1, {MAX_SIZE_GUARD}]")
    return value


# ---------------------------------------------------------------------------
# JSON file format
# ---------------------------------------------------------------------------
#
# {
#   "description": "optional free text",
#   "variables": [{"name": "Y", "cardinality": 2}, ...],
#   "edges":     [["Y", "X1"], ["Y", "X2"]],
#   "cpts":      [{"child": "Y", "parents": [], "rows": [[0.5, 0.5]]}, ...]
# }
#
# Variable ids are positions in the "variables" list.  "edges" must agree
# with the parent lists in "cpts"; rows off by <= 1e-9 are renormalized at
# load, anything worse is rejected.


def net_from_dict(doc: dict) -> BayesNet:
    if not isinstance(doc, dict):
        raise SchemaError("network document must be a JSON object")
    for key in ("variables", "edges", "cpts"):
        if key not in doc:
            raise SchemaError(f"missing top-level key {key!r}")
    names: list[str] = []
    cards: list[int] = []
    for k, v in enumerate(doc["variables"]):
        if not isinstance(v, dict) or "name" not in v or "cardinality" not in v:
            raise SchemaError(f"variables[{k}] must have 'name' and 'cardinality'")
        names.append(str(v["name"]))
        cards.append(int(v["cardinality"]))
    if len(set(names)) != len(names):
        raise SchemaError("variable names must be unique")
    by_name = {n: i for i, n in enumerate(names)}

    def _resolve(name, where):
        if name not in by_name:
            raise SchemaError(f"{where} references unknown variable {name!r}")
        return by_name[name]

    cpt_specs: dict[int, tuple[tuple[int, ...], np.ndarray]] = {}
    for k, c in enumerate(doc["cpts"]):
        if not isinstance(c, dict) or not {"child", "parents", "rows"} <= set(c):
            raise SchemaError(f"cpts[{k}] must have 'child', 'parents', 'rows'")
        cid = _resolve(c["child"], f"cpts[{k}]")
        if cid in cpt_specs:
            raise SchemaError(f"duplicate cpt for variable {names[cid]!r}")
        pids = tuple(_resolve(p, f"cpts[{k}].parents") for p in c["parents"])
        try:
            table = np.asarray(c["rows"], dtype=float)
        except ValueError as e:
            raise SchemaError(f"cpts[{k}].rows is ragged or non-numeric: {e}") from None
        if table.ndim != 2:
            raise SchemaError(f"cpts[{k}].rows must be a matrix")
        n_cfg = int(np.prod([cards[p] for p in pids], dtype=np.int64)) if pids else 1
        if table.shape != (n_cfg, cards[cid]):
            raise SchemaError(
                f"{names[cid]!r}: rows shape {table.shape} != ({n_cfg}, {cards[cid]})"
            )
        if np.any(table < 0):
            raise SchemaError(f"{names[cid]!r}: negative probabilities")
        sums = table.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > _LOAD_RENORM_TOL)
        if bad.size:
            raise SchemaError(
                f"{names[cid]!r}: row sum {sums[bad[0]]:.12g} != 1 at parent config {bad[0]}"
            )
        cpt_specs[cid] = (pids, table / sums[:, None])
    missing = [names[i] for i in range(len(names)) if i not in cpt_specs]
    if missing:
        raise SchemaError(f"missing cpts entry for {missing[0]!r}")

    declared = set()
    for k, e in enumerate(doc["edges"]):
        if not isinstance(e, (list, tuple)) or len(e) != 2:
            raise SchemaError(f"edges[{k}] must be a [parent, child] pair")
        declared.add((_resolve(e[0], f"edges[{k}]"), _resolve(e[1], f"edges[{k}]")))
    implied = {(p, cid) for cid, (pids, _) in cpt_specs.items() for p in pids}
    if declared != implied:
        raise SchemaError(
            f"edges disagree with cpt parent lists: declared {sorted(declared)}, "
            f"implied {sorted(implied)}"
        )

    vs = tuple(Variable(i, names[i], cards[i]) for i in range(len(names)))
    cpts = tuple(Cpt(i, *cpt_specs[i]) for i in range(len(names)))
    return BayesNet(vs, cpts, _topo_order(cpts, len(vs)))


def load_net(path) -> BayesNet:
    """Load a network from a JSON file; schema errors carry the offending key."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON at line {e.lineno} col {e.colno}: {e.msg}") from None
    net = net_from_dict(doc)
    rep = validate(net)
    if not rep.ok:
        raise SchemaError(f"{path}: {rep.violations[0]}")
    return net


def save_net(net: BayesNet, path, description: str | None = None) -> None:
    doc = net.to_dict()
    if description:
        doc = {"description": description, **doc}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
