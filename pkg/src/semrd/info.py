"""Entropy and mutual-information measures for network sources, in bits.

The joint entropy of a network factorizes over the structure,

    H(X_1..X_m) = sum_i H(X_i | Parent(X_i)),

which is what makes these quantities computable without materializing the
joint table.  ``joint_entropy_bruteforce`` is the deliberately independent
dense-table route used to cross-check the factorized one.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .bn import BayesNet, JointTable, marginal_table
from .errors import InvalidStateError

_CLAMP_TOL = 1e-9


def entropy_bits(p) -> float:
    """Shannon entropy of a distribution (any shape), with 0*log2(0) = 0."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return float(-terms.sum())


def binary_entropy(p: float) -> float:
    """h_b(p) = -p*log2(p) - (1-p)*log2(1-p)."""
    if not 0.0 <= p <= 1.0:
        raise InvalidStateError(f"binary entropy argument {p} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def node_conditional_entropy(net: BayesNet, i: int) -> float:
    """H(X_i | Parent(X_i)) = sum_pa p(pa) H(row_pa)."""
    i = net.id_of(i)
    cpt = net.cpts[i]
    if not cpt.parents:
        return entropy_bits(cpt.table[0])
    p_pa = marginal_table(net, cpt.parents).probs
    row_ent = np.array([entropy_bits(row) for row in cpt.table])
    return float(p_pa @ row_ent)


def joint_entropy_factorized(net: BayesNet) -> float:
    """Joint entropy via the factorization; never touches the joint table."""
    return sum(node_conditional_entropy(net, i) for i in range(net.m))


def joint_entropy_bruteforce(table: JointTable) -> float:
    """Joint entropy from a dense table; oracle route for cross-checks."""
    return entropy_bits(table.probs)


def marginal_entropy(net: BayesNet, i: int) -> float:
    """H(X_i) of the single-variable marginal."""
    return entropy_bits(marginal_table(net, [net.id_of(i)]).probs)


def redundancy_gap(net: BayesNet, limit: int | None = None) -> float:
    """sum_i H(X_i) - H(X_1..X_m): the rate saved by coding jointly.

    Equals the total correlation sum_i I(X_i; Parent(X_i)); nonnegative up to
    float noise.  Guarded by the joint-state-space cap like the dense routes.
    """
    from .bn import DEFAULT_SIZE_GUARD
    from .errors import SizeGuardError

    cap = DEFAULT_SIZE_GUARD if limit is None else limit
    if net.joint_states() > cap:
        raise SizeGuardError(f"joint state space {net.joint_states()} exceeds guard {cap}")
    return sum(marginal_entropy(net, i) for i in range(net.m)) - joint_entropy_factorized(net)


def _subset_entropy(arr: np.ndarray, axes_keep: Sequence[int]) -> float:
    other = tuple(a for a in range(arr.ndim) if a not in axes_keep)
    return entropy_bits(arr.sum(axis=other) if other else arr)


def conditional_mutual_information(
    table: JointTable,
    a: Sequence[int],
    b: Sequence[int],
    c: Sequence[int] = (),
    clamp: bool = True,
) -> float:
    """I(A; B | C) in bits from a dense table whose scope covers A, B, C.

    Computed as H(AC) + H(BC) - H(C) - H(ABC).  Tiny negatives from float
    cancellation are clamped to 0 unless ``clamp`` is false.
    """
    pos = {v: k for k, v in enumerate(table.scope)}
    groups = [list(a), list(b), list(c)]
    flat = [v for g in groups for v in g]
    if len(set(flat)) != len(flat):
        raise InvalidStateError(f"variable groups must be disjoint, got {groups}")
    for v in flat:
        if v not in pos:
            raise InvalidStateError(f"variable {v} not in table scope {table.scope}")
    ax = [[pos[v] for v in g] for g in groups]
    arr = table.as_array()
    val = (
        _subset_entropy(arr, ax[0] + ax[2])
        + _subset_entropy(arr, ax[1] + ax[2])
        - _subset_entropy(arr, ax[2])
        - _subset_entropy(arr, ax[0] + ax[1] + ax[2])
    )
    if clamp and val < 0:
        return 0.0
    return val


def pairwise_block_cmi(net: BayesNet, blocks, side, limit: int | None = None) -> float:
    """Max I(block_a; block_b | side) over block pairs; small means the
    partition really decomposes the source."""
    from .bn import DEFAULT_SIZE_GUARD

    cap = DEFAULT_SIZE_GUARD if limit is None else limit
    worst = 0.0
    for idx, ba in enumerate(blocks):
        for bb in blocks[idx + 1 :]:
            scope = list(ba) + list(bb) + list(side)
            jt = marginal_table(net, scope, limit=cap)
            val = conditional_mutual_information(jt, list(ba), list(bb), list(side), clamp=False)
            worst = max(worst, val)
    return worst
