"""Rate-distortion solvers for discrete sources, alone or with side information.

All rates are in bits.  The workhorse is an alternating-minimization loop at a
fixed slope s <= 0: the test channel is tilted as

    Q(xhat | x)  proportional to  q(xhat) * 2^(s * d(x, xhat)),

and the reconstruction marginal q is refreshed from Q until the classic
upper/lower bound bracket on the parametric objective closes below a
tolerance (measured in nats; see ``_ba_slope_core``).  Slopes are the
Lagrange multipliers of the distortion constraints, so target-distortion
solves run a bracketing secant on the slope; with side information the same
slope is applied to every conditional source, which is exactly the optimal
distortion allocation across side states.  Multiple per-variable constraints
get one slope each over the product reconstruction alphabet, adjusted by
coordinate sweeps (coordinate ascent on the concave Lagrange dual).

A target point is accepted when its distortion is under the target within
``dist_tol`` *and* the complementary-slackness defect (-s) * (target - D) is
below a small rate budget — the defect bounds how far the dual value can sit
from the true constrained minimum, and it is the right test at zero-rate
corners and on linear curve segments where D(s) jumps across the target.

Conventions: a 2-d conditional source is passed as ``joint[x, y]`` (side
variable last); a multi-variable source has one axis per variable with an
optional side axis *first*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .bn import DEFAULT_SIZE_GUARD
from .errors import InvalidStateError, SizeGuardError
from .info import binary_entropy

#: Stop when the bound bracket is tighter than this (nats).
GAP_TOL_NATS = 1e-9
#: Target-distortion tolerance.
DIST_TOL = 1e-6
#: Per-constraint complementary-slackness budget (bits).
SLACK_TOL = 3e-6
MAX_ITERS = 10_000
_MAX_EVALS = 48


@dataclass(frozen=True)
class RdPoint:
    """One solved point: rate, achieved distortions, and the slopes used."""

    rate: float
    distortions: tuple[float, ...]
    slopes: tuple[float, ...]
    iterations: int
    converged: bool

    @property
    def distortion(self) -> float:
        return self.distortions[0]

    @property
    def slope(self) -> float:
        return self.slopes[0]


@dataclass(frozen=True)
class RdCurve:
    points: tuple[RdPoint, ...]
    monotone: bool
    convex: bool


@dataclass(frozen=True)
class DistortionSpec:
    """Per-variable distortion matrices d_i(x_i, xhat_i)."""

    matrices: tuple[np.ndarray, ...]

    @classmethod
    def hamming(cls, cards: Sequence[int]) -> "DistortionSpec":
        return cls(tuple(hamming_distortion(k) for k in cards))

    @classmethod
    def squared_error(cls, cards: Sequence[int]) -> "DistortionSpec":
        return cls(tuple(squared_error_distortion(k) for k in cards))

    def for_var(self, i: int) -> np.ndarray:
        return self.matrices[i]


def hamming_distortion(k: int) -> np.ndarray:
    return 1.0 - np.eye(k)


def squared_error_distortion(k: int) -> np.ndarray:
    idx = np.arange(k, dtype=float)
    return (idx[:, None] - idx[None, :]) ** 2


def _check_dist(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidStateError(f"not a distribution (sum {p.sum():.12g})")
    return p


def trivial_distortion(p, d) -> float:
    """Best constant-guess distortion min_xhat E d(X, xhat): the zero-rate corner."""
    p = _check_dist(np.asarray(p, float).reshape(-1))
    return float((p @ np.asarray(d, float)).min())


def min_distortion(p, d) -> float:
    """Distortion floor sum_x p(x) min_xhat d(x, xhat); targets below it are infeasible."""
    p = np.asarray(p, float).reshape(-1)
    return float(p @ np.asarray(d, float).min(axis=1))


def _ba_slope_core(px, expo, tol_nats, max_iters, q0=None):
    """Alternating minimization at a fixed exponent matrix ``expo`` (log2 scale).

    ``expo[x, xhat] = sum_i s_i * d_i``; rows are shifted by their maximum so
    the tilt matrix keeps an exact 1 per row and never underflows to an empty
    row.  With c the multiplicative update applied to q, the parametric
    objective is bracketed by

        F(q) + 1 - max_xhat c(xhat)  <=  min F  <=  F(q) - sum qc ln c,

    and the loop stops once the bracket width drops below ``tol_nats``.  The
    bracket holds at any interior q, so plain update pairs are interleaved
    with extrapolated (Steffensen-type) steps that collapse the slow modes
    appearing at shallow slopes; an extrapolated q is kept only when it does
    not increase the convex potential -sum p ln(Aq).  Returns the source
    support, the conditional channel on it, and q.
    """
    sup = np.flatnonzero(px > 0)
    p = px[sup]
    ms = expo[sup]
    a = np.exp2(ms - ms.max(axis=1, keepdims=True))
    nh = a.shape[1]

    def step(q):
        alpha = a @ q
        c = a.T @ (p / alpha)
        qc = q * c
        pos = qc > 0
        gap = (float(c.max()) - 1.0) - float(np.sum(qc[pos] * np.log(c[pos])))
        return qc / qc.sum(), gap

    def potential(q):
        return -float(p @ np.log(a @ q))

    if q0 is not None and q0.shape == (nh,) and q0.min() >= 0.0 and q0.sum() > 0.0:
        # mild mixing keeps dead letters revivable without perturbing the
        # solution when the optimal face is degenerate
        q = 0.995 * (q0 / q0.sum()) + 0.005 / nh
    else:
        q = np.full(nh, 1.0 / nh)
    converged = False
    it = 0
    while it < max_iters:
        q1, gap = step(q)
        it += 1
        if gap < tol_nats:
            q = q1
            converged = True
            break
        q2, gap = step(q1)
        it += 1
        if gap < tol_nats:
            q = q2
            converged = True
            break
        r = q1 - q
        v = (q2 - q1) - r
        vn = float(v @ v)
        if not np.isfinite(vn) or vn <= 0.0:
            q = q2
            continue
        am = -math.sqrt(float(r @ r) / vn)
        if am > -1.0:
            am = -1.0
        qa = q - 2.0 * am * r + (am * am) * v
        np.maximum(qa, 0.0, out=qa)
        tot = float(qa.sum())
        if not np.isfinite(tot) or tot <= 0.0:
            q = q2
            continue
        qa /= tot
        floor = 1e-280 * float(qa.max())  # keep letters revivable after clipping
        if floor > 0.0:
            np.maximum(qa, floor, out=qa)
            qa /= qa.sum()
        q = qa if potential(qa) <= potential(q2) else q2
    alpha = a @ q
    channel = a * q / alpha[:, None]
    return sup, p, channel, q, it, converged


def _rate_bits(p, channel, qm) -> float:
    qb = np.broadcast_to(qm, channel.shape)
    pos = (channel > 0) & (qb > 0)  # qm can underflow below tiny channel entries
    terms = np.zeros_like(channel)
    terms[pos] = channel[pos] * np.log2(channel[pos] / qb[pos])
    return max(0.0, float(p @ terms.sum(axis=1)))


def _accept(s: float, dist: float, target: float, dist_tol: float,
            slack_tol: float = SLACK_TOL) -> bool:
    return dist <= target + dist_tol and (-s) * (target - dist) <= slack_tol


def _slope_root(ev: Callable, target: float, dist_tol: float, *, s0: float = -1.0,
                hi_point=None, max_evals: int = _MAX_EVALS,
                slack_tol: float = SLACK_TOL):
    """Drive the achieved distortion to the target by moving the slope.

    ``ev(s) -> (rate, dist, payload, iters, conv)`` with distortion
    nondecreasing in s.  ``hi_point`` optionally supplies the s = 0 endpoint
    as (rate, dist, payload) — used when evaluating at exactly 0 would be
    degenerate.  Bracketing secant (Illinois); timeshares across the bracket
    when the distortion jumps over the target, which convexity makes exact.
    Returns (rate, dist, payload, slope, total_iters, converged).
    """
    total = 0
    if hi_point is None:
        r_hi, d_hi, pay_hi, it, c_hi = ev(0.0)
        total += it
        if _accept(0.0, d_hi, target, dist_tol, slack_tol):
            return r_hi, d_hi, pay_hi, 0.0, total, c_hi
    else:
        r_hi, d_hi, pay_hi, c_hi = (*hi_point, True)
        if _accept(0.0, d_hi, target, dist_tol, slack_tol):
            return r_hi, d_hi, pay_hi, 0.0, total, True
    hi = 0.0
    s = min(s0, -1e-12)
    evals = 0
    while True:
        rate, dist, pay, it, conv = ev(s)
        total += it
        evals += 1
        if _accept(s, dist, target, dist_tol, slack_tol):
            return rate, dist, pay, s, total, conv
        if dist <= target:
            break
        hi, r_hi, d_hi, pay_hi, c_hi = s, rate, dist, pay, conv
        if -s > 1e18 or evals >= max_evals:
            return rate, dist, pay, s, total, False  # cannot reach down to target
        s *= 2.0
    lo, r_lo, d_lo, pay_lo, c_lo = s, rate, dist, pay, conv
    if hi == 0.0 and hi_point is None:
        # The probe solve concentrated the reconstruction marginal; the
        # constraint may now be slack at slope 0 exactly, where convergence is
        # clean — preferable to chasing a vanishing slope it can't resolve.
        r0, d0, p0, it, c0 = ev(0.0)
        total += it
        evals += 1
        if _accept(0.0, d0, target, dist_tol, slack_tol):
            return r0, d0, p0, 0.0, total, c0
        r_hi, d_hi, pay_hi, c_hi = r0, d0, p0, c0
    f_lo, f_hi = d_lo - target, d_hi - target
    side = 0
    while evals < max_evals and hi - lo > 1e-13 * max(1.0, -lo):
        if f_hi > f_lo:
            mid = hi - f_hi * (hi - lo) / (f_hi - f_lo)
            if not lo < mid < hi:
                mid = 0.5 * (lo + hi)
        else:
            mid = 0.5 * (lo + hi)
        rate, dist, pay, it, conv = ev(mid)
        total += it
        evals += 1
        if _accept(mid, dist, target, dist_tol, slack_tol):
            return rate, dist, pay, mid, total, conv
        if dist > target:
            hi, r_hi, d_hi, pay_hi, c_hi = mid, rate, dist, pay, conv
            f_hi = dist - target
            if side == 1:
                f_lo *= 0.5
            side = 1
        else:
            lo, r_lo, d_lo, pay_lo, c_lo = mid, rate, dist, pay, conv
            f_lo = dist - target
            if side == -1:
                f_hi *= 0.5
            side = -1
    if d_hi - d_lo > dist_tol:  # distortion jumped: linear segment, timeshare is exact
        lam = (target - d_lo) / (d_hi - d_lo)
        pay = None
        if pay_lo is not None and pay_hi is not None:
            pay = tuple((1 - lam) * a + lam * b for a, b in zip(pay_lo, pay_hi))
        ok = hi - lo <= 1e-13 * max(1.0, -lo)
        return (1 - lam) * r_lo + lam * r_hi, target, pay, lo, total, bool(ok and c_lo and c_hi)
    return r_lo, d_lo, pay_lo, lo, total, c_lo


def _single_eval(p, d, tol_nats, max_iters):
    """Evaluator closure for one unconditional source; warm-starts q across calls."""
    p = np.asarray(p, float).reshape(-1)
    d = np.asarray(d, float)
    state = {"q": None}

    def ev(s: float, iters: int | None = None):
        sup, ps, channel, q, it, conv = _ba_slope_core(
            p, s * d, tol_nats, iters or max_iters, state["q"]
        )
        state["q"] = q
        rate = _rate_bits(ps, channel, ps @ channel)
        dist = float(ps @ (channel * d[sup]).sum(axis=1))
        return rate, dist, None, it, conv

    return ev


def ba_point(p, d, slope: float, *, tol: float = GAP_TOL_NATS,
             max_iters: int = MAX_ITERS) -> RdPoint:
    """One curve point at a fixed slope for a plain source.

    ``slope == 0`` returns the zero-rate corner (best constant guess), the
    limit the iteration approaches but never reaches.
    """
    p = _check_dist(np.asarray(p, float).reshape(-1))
    d = np.asarray(d, float)
    if slope > 0:
        raise InvalidStateError(f"slope must be <= 0, got {slope}")
    if slope == 0:
        return RdPoint(0.0, (trivial_distortion(p, d),), (0.0,), 0, True)
    rate, dist, _, it, conv = _single_eval(p, d, tol, max_iters)(slope)
    return RdPoint(float(rate), (float(dist),), (float(slope),), it, conv)


def ba_target(p, d, target: float, *, dist_tol: float = DIST_TOL,
              tol: float = GAP_TOL_NATS, max_iters: int = MAX_ITERS) -> RdPoint:
    """R(D) at a target distortion for a plain source."""
    p = _check_dist(np.asarray(p, float).reshape(-1))
    d = np.asarray(d, float)
    if target < 0:
        raise InvalidStateError(f"target distortion must be >= 0, got {target}")
    floor = min_distortion(p, d)
    if target < floor - 1e-12:
        raise InvalidStateError(f"target {target} below minimum achievable distortion {floor:.12g}")
    triv = trivial_distortion(p, d)
    ev = _single_eval(p, d, tol, max_iters)
    rate, dist, _, s, it, conv = _slope_root(ev, target, dist_tol, hi_point=(0.0, triv, None))
    if not conv and s < 0:
        # shallow-slope solves close their gap slowly; retry in place with a
        # bigger budget before reporting the point unconverged
        r2, d2, _, it2, c2 = ev(s, 16 * max_iters)
        it += it2
        if c2 and _accept(s, d2, target, dist_tol):
            rate, dist, conv = r2, d2, True
    return RdPoint(float(rate), (float(dist),), (float(s),), it, conv)


def _conditional_eval(joint, d, tol_nats, max_iters):
    """Evaluator for a source with two-sided side information: same slope per
    side state, aggregate rate and distortion."""
    joint = np.asarray(joint, float)
    d = np.asarray(d, float)
    py = joint.sum(axis=0)
    ys = np.flatnonzero(py > 0)
    conds = [joint[:, y] / py[y] for y in ys]
    state = {"qs": [None] * len(ys)}

    def ev(s: float, iters: int | None = None):
        rate = dist = 0.0
        worst_it = 0
        all_conv = True
        for k, y in enumerate(ys):
            sup, ps, channel, q, it, conv = _ba_slope_core(
                conds[k], s * d, tol_nats, iters or max_iters, state["qs"][k]
            )
            state["qs"][k] = q
            rate += py[y] * _rate_bits(ps, channel, ps @ channel)
            dist += py[y] * float(ps @ (channel * d[sup]).sum(axis=1))
            worst_it = max(worst_it, it)
            all_conv = all_conv and conv
        return rate, dist, None, worst_it, all_conv

    return ev


def _conditional_triv_floor(joint, d) -> tuple[float, float]:
    joint = np.asarray(joint, float)
    d = np.asarray(d, float)
    py = joint.sum(axis=0)
    triv = floor = 0.0
    for y in np.flatnonzero(py > 0):
        pc = joint[:, y] / py[y]
        triv += py[y] * float((pc @ d).min())
        floor += py[y] * float(pc @ d.min(axis=1))
    return float(triv), float(floor)


def ba_conditional(joint, d, slope: float, *, tol: float = GAP_TOL_NATS,
                   max_iters: int = MAX_ITERS) -> RdPoint:
    """One curve point at a fixed slope when the side variable is known at
    both encoder and decoder.  ``joint[x, y]``; rate is sum_y p(y) R_y."""
    joint = np.asarray(joint, float)
    if joint.ndim != 2:
        raise InvalidStateError("conditional source must be a 2-d joint[x, y]")
    _check_dist(joint.reshape(-1))
    if slope > 0:
        raise InvalidStateError(f"slope must be <= 0, got {slope}")
    if slope == 0:
        triv, _ = _conditional_triv_floor(joint, d)
        return RdPoint(0.0, (triv,), (0.0,), 0, True)
    rate, dist, _, it, conv = _conditional_eval(joint, d, tol, max_iters)(slope)
    return RdPoint(float(rate), (float(dist),), (float(slope),), it, conv)


def ba_conditional_target(joint, d, target: float, *, dist_tol: float = DIST_TOL,
                          tol: float = GAP_TOL_NATS, max_iters: int = MAX_ITERS) -> RdPoint:
    """Conditional R(D) at a target aggregate distortion."""
    joint = np.asarray(joint, float)
    if joint.ndim != 2:
        raise InvalidStateError("conditional source must be a 2-d joint[x, y]")
    _check_dist(joint.reshape(-1))
    if target < 0:
        raise InvalidStateError(f"target distortion must be >= 0, got {target}")
    triv, floor = _conditional_triv_floor(joint, d)
    if target < floor - 1e-12:
        raise InvalidStateError(f"target {target} below minimum achievable distortion {floor:.12g}")
    ev = _conditional_eval(joint, d, tol, max_iters)
    rate, dist, _, s, it, conv = _slope_root(ev, target, dist_tol, hi_point=(0.0, triv, None))
    if not conv and s < 0:
        r2, d2, _, it2, c2 = ev(s, 16 * max_iters)
        it += it2
        if c2 and _accept(s, d2, target, dist_tol):
            rate, dist, conv = r2, d2, True
    return RdPoint(float(rate), (float(dist),), (float(s),), it, conv)


# ---------------------------------------------------------------------------
# several distortion constraints at once (product reconstruction alphabet)
# ---------------------------------------------------------------------------


class _MultiSolver:
    """Shared machinery for m per-variable constraints, optionally given a
    side variable (axis 0 of the joint array)."""

    def __init__(self, joint, dists, side, tol_nats, max_iters, limit):
        joint = np.asarray(joint, float)
        if side:
            if joint.ndim < 2:
                raise InvalidStateError("side=True needs a leading side axis")
            self.ny = joint.shape[0]
            cards = joint.shape[1:]
        else:
            self.ny = 1
            cards = joint.shape
            joint = joint[None, ...]
        self.m = len(cards)
        if len(dists) != self.m:
            raise InvalidStateError(f"{len(dists)} distortion matrices for {self.m} variables")
        _check_dist(joint.reshape(-1))
        dists = [np.asarray(d, float) for d in dists]
        for k, d in zip(cards, dists):
            if d.shape[0] != k:
                raise InvalidStateError(f"distortion rows {d.shape[0]} != cardinality {k}")
        nx = int(np.prod(cards))
        nh = int(np.prod([d.shape[1] for d in dists]))
        if nx * nh > limit:
            raise SizeGuardError(f"product test-channel table {nx}x{nh} exceeds guard {limit}")
        ix = np.unravel_index(np.arange(nx), tuple(cards))
        ih = np.unravel_index(np.arange(nh), tuple(d.shape[1] for d in dists))
        self.lifted = [d[ix[i][:, None], ih[i][None, :]] for i, d in enumerate(dists)]
        flat = joint.reshape(self.ny, nx)
        self.py = flat.sum(axis=1)
        self.ys = np.flatnonzero(self.py > 0)
        self.conds = [flat[y] / self.py[y] for y in self.ys]
        self.tol_nats = tol_nats
        self.max_iters = max_iters
        self.warm = [None] * len(self.ys)
        # per-coordinate zero-rate corner and feasibility floor, aggregated over y
        self.trivs = np.zeros(self.m)
        self.floors = np.zeros(self.m)
        for w, pc in zip(self.py[self.ys], self.conds):
            for i, d in enumerate(dists):
                marg = self._coord_marginal(pc, cards, i)
                self.trivs[i] += w * float((marg @ d).min())
                self.floors[i] += w * float(marg @ d.min(axis=1))

    @staticmethod
    def _coord_marginal(flat_p, cards, i):
        arr = flat_p.reshape(cards)
        other = tuple(a for a in range(len(cards)) if a != i)
        return arr.sum(axis=other) if other else arr

    def eval(self, slopes, iters: int | None = None) -> tuple[float, np.ndarray, int, bool]:
        """Solve at a fixed slope vector; returns (rate, D vector, iters, converged)."""
        slopes = np.asarray(slopes, float)
        if np.all(slopes == 0):
            return 0.0, self.trivs.copy(), 0, True
        expo = sum(s * lift for s, lift in zip(slopes, self.lifted))
        rate = 0.0
        dvec = np.zeros(self.m)
        worst_it = 0
        all_conv = True
        for k, pc in enumerate(self.conds):
            sup, ps, channel, q, it, conv = _ba_slope_core(
                pc, expo, self.tol_nats, iters or self.max_iters, self.warm[k]
            )
            self.warm[k] = q
            w = self.py[self.ys[k]]
            rate += w * _rate_bits(ps, channel, ps @ channel)
            for i, lift in enumerate(self.lifted):
                dvec[i] += w * float(ps @ (channel * lift[sup]).sum(axis=1))
            worst_it = max(worst_it, it)
            all_conv = all_conv and conv
        return rate, dvec, worst_it, all_conv


def ba_joint_multi(joint, dists, slopes, *, side: bool = False,
                   tol: float = GAP_TOL_NATS, max_iters: int = MAX_ITERS,
                   limit: int = DEFAULT_SIZE_GUARD) -> RdPoint:
    """One point on the multi-constraint surface at a fixed slope vector."""
    slopes = tuple(float(s) for s in slopes)
    if any(s > 0 for s in slopes):
        raise InvalidStateError(f"slopes must be <= 0, got {slopes}")
    solver = _MultiSolver(joint, dists, side, tol, max_iters, limit)
    if len(slopes) != solver.m:
        raise InvalidStateError(f"{len(slopes)} slopes for {solver.m} variables")
    rate, dvec, it, conv = solver.eval(slopes)
    return RdPoint(float(rate), tuple(float(x) for x in dvec), tuple(float(s) for s in slopes), it, conv)


def ba_joint_multi_target(joint, dists, targets, *, side: bool = False,
                          dist_tol: float = DIST_TOL, tol: float = GAP_TOL_NATS,
                          max_iters: int = MAX_ITERS, limit: int = DEFAULT_SIZE_GUARD,
                          max_sweeps: int = 12,
                          init_slopes: Sequence[float] | None = None) -> RdPoint:
    """Joint rate at per-variable distortion targets.

    Coordinate sweeps adjust one slope at a time to meet its own target (or
    park it at 0 when the constraint goes slack), holding the others — this is
    coordinate ascent on the concave Lagrange dual, warm-started between
    evaluations.  Sweeping stops once all constraints check out or the slope
    vector goes quasi-static; a final solve at the settled slopes with a
    larger iteration budget then defines the reported point.  ``init_slopes``
    can seed the sweep, e.g. with slopes from per-variable solves.
    """
    targets = np.asarray(targets, float)
    if np.any(targets < 0):
        raise InvalidStateError(f"targets must be >= 0, got {targets.tolist()}")
    solver = _MultiSolver(joint, dists, side, tol, max_iters, limit)
    if targets.shape != (solver.m,):
        raise InvalidStateError(f"{targets.size} targets for {solver.m} variables")
    for i in range(solver.m):
        if targets[i] < solver.floors[i] - 1e-12:
            raise InvalidStateError(
                f"target {targets[i]} for variable {i} below floor {solver.floors[i]:.12g}"
            )
    if np.all(targets >= solver.trivs - 1e-15):
        return RdPoint(0.0, tuple(float(t) for t in solver.trivs), (0.0,) * solver.m, 0, True)
    if init_slopes is not None:
        slopes = np.minimum(np.asarray(init_slopes, float), 0.0)
    else:
        slopes = np.array([0.0 if targets[i] >= solver.trivs[i] - 1e-15 else -1.0
                           for i in range(solver.m)])
    total_it = 0
    rate, dvec, it, conv = solver.eval(slopes)
    total_it += it
    # Coarse sweeps localize the slopes with relaxed windows (cheap, avoids
    # burning iterations deep inside jittery brackets), then a couple of
    # precise sweeps bind each constraint to dist_tol from slopes that are
    # already close.
    phases = (
        (max_sweeps, max(dist_tol, 1e-4), max(SLACK_TOL, 1e-4), None),
        (3, dist_tol, SLACK_TOL, None),
    )
    for sweeps, dtol, stol, budget in phases:
        for _ in range(sweeps):
            prev = slopes.copy()
            moved = False
            for i in range(solver.m):
                if _accept(slopes[i], dvec[i], targets[i], dtol, stol):
                    continue
                slopes[i], rate, dvec, it, conv = _coord_adjust(
                    solver, slopes, i, float(targets[i]), dtol, stol, budget
                )
                total_it += it
                moved = True
            ok = all(_accept(slopes[i], dvec[i], targets[i], dtol, stol)
                     for i in range(solver.m))
            if ok and not moved:
                break
            # capped inner solves jitter the distortions; once the slopes are
            # quasi-static the sweep has settled as far as it can
            if moved and np.all(np.abs(slopes - prev) <= 1e-6 * np.maximum(1.0, -prev)):
                break
    pre_ok = all(_accept(slopes[i], dvec[i], targets[i], dist_tol) for i in range(solver.m))
    r2, d2, it, c2 = solver.eval(slopes, iters=4 * max_iters)
    total_it += it
    ok2 = all(_accept(slopes[i], d2[i], targets[i], dist_tol) for i in range(solver.m))
    if ok2 or not pre_ok:
        # the high-budget solve at the settled slopes defines the point
        rate, dvec, conv, ok = r2, d2, c2, ok2
    else:
        ok = pre_ok  # timeshared point: no single slope meets the targets
    return RdPoint(float(rate), tuple(float(d) for d in dvec), tuple(float(s) for s in slopes),
                   total_it, bool(ok and conv))


def _coord_adjust(solver, slopes, i, target, dist_tol, slack_tol=SLACK_TOL, iters=None):
    """Move slope i so its own distortion meets the target, others fixed."""
    state = {}

    def ev(s):
        slopes[i] = s
        rate, dvec, it, conv = solver.eval(slopes, iters=iters)
        state["point"] = (rate, dvec, conv)
        return rate, dvec[i], tuple(dvec), it, conv

    s0 = slopes[i] if slopes[i] < 0 else -1.0
    rate, dist_i, pay, s, it, conv = _slope_root(ev, target, dist_tol, s0=s0,
                                                 slack_tol=slack_tol)
    if pay is not None and "point" in state and not np.array_equal(np.asarray(pay), state["point"][1]):
        dvec = np.asarray(pay)  # timeshared point
    else:
        dvec = state["point"][1] if "point" in state else np.asarray(pay)
    return s, rate, dvec, it, conv


# ---------------------------------------------------------------------------
# closed forms for the doubly symmetric binary and jointly Gaussian cases
# ---------------------------------------------------------------------------


def binary_conditional_rd(p: float, target: float) -> float:
    """h_b(p) - h_b(D) for 0 <= D <= p, else 0: the conditional rate-distortion
    function of a binary source seen through a symmetric flip channel p."""
    if not 0.0 <= p <= 0.5:
        raise InvalidStateError(f"flip probability {p} outside [0, 0.5]")
    if target < 0.0:
        raise InvalidStateError(f"target distortion must be >= 0, got {target}")
    if target >= p:
        return 0.0
    return binary_entropy(p) - binary_entropy(target)


def gaussian_conditional_rd(sigma: float, r: float, target: float) -> float:
    """(1/2) log2(sigma^2 (1 - r^2) / D), clamped at 0: conditional
    rate-distortion of a Gaussian with correlation r to the side variable."""
    if sigma <= 0.0:
        raise InvalidStateError(f"sigma must be > 0, got {sigma}")
    if not -1.0 <= r <= 1.0:
        raise InvalidStateError(f"correlation {r} outside [-1, 1]")
    if target <= 0.0:
        raise InvalidStateError(f"target distortion must be > 0, got {target}")
    ceiling = sigma * sigma * (1.0 - r * r)
    if target >= ceiling:
        return 0.0
    return 0.5 * math.log2(ceiling / target)


# ---------------------------------------------------------------------------
# curve sweeps
# ---------------------------------------------------------------------------


def _curve_from_points(points: Sequence[RdPoint]) -> RdCurve:
    pts = tuple(sorted(points, key=lambda pt: pt.distortion))
    monotone = all(
        pts[k + 1].rate <= pts[k].rate + 1e-9 for k in range(len(pts) - 1)
    )
    convex = True
    for k in range(1, len(pts) - 1):
        d0, d2 = pts[k - 1].distortion, pts[k + 1].distortion
        if d2 - d0 < 1e-12:
            continue
        lam = (pts[k].distortion - d0) / (d2 - d0)
        chord = (1 - lam) * pts[k - 1].rate + lam * pts[k + 1].rate
        if pts[k].rate > chord + 5e-6:
            convex = False
    return RdCurve(pts, monotone, convex)


def default_slope_grid(n: int = 25, lo: float = -12.0, hi: float = -0.2) -> tuple[float, ...]:
    """Geometric grid of slopes covering near-lossless to near-zero-rate."""
    return tuple(-np.geomspace(-lo, -hi, n))


def rd_curve(p, d, *, slopes: Sequence[float] | None = None,
             targets: Sequence[float] | None = None, **kw) -> RdCurve:
    """Sweep a plain source over a slope grid or a target-distortion list."""
    if (slopes is None) == (targets is None):
        raise InvalidStateError("provide exactly one of slopes= or targets=")
    if slopes is not None:
        pts = [ba_point(p, d, s, **kw) for s in slopes]
    else:
        pts = [ba_target(p, d, t, **kw) for t in targets]
    return _curve_from_points(pts)


def rd_curve_conditional(joint, d, *, slopes: Sequence[float] | None = None,
                         targets: Sequence[float] | None = None, **kw) -> RdCurve:
    """Sweep a conditional source (side known both ends) the same way."""
    if (slopes is None) == (targets is None):
        raise InvalidStateError("provide exactly one of slopes= or targets=")
    if slopes is not None:
        pts = [ba_conditional(joint, d, s, **kw) for s in slopes]
    else:
        pts = [ba_conditional_target(joint, d, t, **kw) for t in targets]
    return _curve_from_points(pts)
