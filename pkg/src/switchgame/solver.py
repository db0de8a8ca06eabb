"""Backward finite-difference solvers for the coupled obstacle systems.

Two penalized schemes are provided.  The descending scheme (solve_minmax)
keeps the switching floor of player 1 as a hard constraint, enforced by
projected Gauss-Seidel after each implicit step, and relaxes the player-2
ceiling through a reaction term

    - m * sum_{l != j} (v^{ij} - v^{il} - costs2_{jl})^+

whose strength m sweeps upward; fields decrease in m.  The ascending
scheme (solve_maxmin) mirrors this: hard ceiling, penalized floor

    + n * sum_{k != i} (v^{kj} - costs1_{ik} - v^{ij})^+

and fields increase in n.  Between them the discrete fields are sandwiched,
and as the penalty grows both converge to the same double-obstacle
solution; sup_gap measures their residual distance.

Within one time level the per-pair implicit steps are iterated to a joint
fixed point in lexicographic Gauss-Seidel order.  The reaction term is
handled semi-implicitly: the own component sits inside the tridiagonal
solve via an active-set (semismooth Newton) iteration, which keeps the
level update stable for arbitrarily large m * dt.

A third, direct clamping scheme ships as a cross-check only: one plain
implicit step followed by clamping between the two obstacles in the order
that matches the system being approximated.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConvergenceError, PreconditionError
from .expressions import EvalContext, evaluate
from .grid import Grid, GeneratorStencil, discretize_generator, solve_implicit
from .model import ProblemSpec, check_separation

_ACTIVE_SET_CAP = 64


@dataclass(frozen=True)
class PenaltySchedule:
    """Strictly increasing penalty levels plus fixed-point controls."""

    levels: tuple[float, ...] = (1.0, 4.0, 16.0, 64.0, 256.0)
    fixed_point_tol: float = 1e-10
    max_iterations: int = 500
    penalizer: str = "sum"  # or "max"

    def __post_init__(self):
        if not self.levels:
            raise ValueError("penalty schedule must be non-empty")
        if any(m <= 0 for m in self.levels):
            raise ValueError("penalty levels must be positive")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("penalty levels must be strictly increasing")
        if self.penalizer not in ("sum", "max"):
            raise ValueError("penalizer must be 'sum' or 'max'")


@dataclass(frozen=True, eq=False)
class ValueField:
    """Solution values on the grid.

    For the coupled systems mode_labels holds (i, j) pairs and values has
    shape (pairs, nt, nx).  For single-player systems mode_labels holds the
    player's own modes.  The terminal level is assigned from the terminal
    rewards, never computed.
    """

    system: str  # minmax | maxmin | single_lower | single_upper
    mode_labels: tuple
    values: np.ndarray
    grid: Grid
    penalty: float | None = None

    def index_of(self, label) -> int:
        return self.mode_labels.index(label)

    def interp_x(self, label, level: int, x: np.ndarray) -> np.ndarray:
        """Linear interpolation in x of one mode's values at a time level."""
        return np.interp(x, self.grid.xs, self.values[self.index_of(label), level, :])

    def meta_dict(self) -> dict:
        return {
            "system": self.system,
            "penalty": self.penalty,
            "mode_labels": [list(p) if isinstance(p, tuple) else p for p in self.mode_labels],
            "nt": self.grid.nt,
            "nx": self.grid.nx,
            "t_range": [float(self.grid.times[0]), float(self.grid.times[-1])],
            "x_range": [float(self.grid.xs[0]), float(self.grid.xs[-1])],
        }

    def to_csv(self, path) -> None:
        """Columns: i, j, t_index, x_index, t, x, value."""
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["i", "j", "t_index", "x_index", "t", "x", "value"])
            for m_idx, label in enumerate(self.mode_labels):
                i, j = label if isinstance(label, tuple) else (label, "")
                for t_idx in range(self.grid.nt):
                    t = self.grid.times[t_idx]
                    for x_idx in range(self.grid.nx):
                        writer.writerow([
                            i, j, t_idx, x_idx, repr(float(t)),
                            repr(float(self.grid.xs[x_idx])),
                            repr(float(self.values[m_idx, t_idx, x_idx])),
                        ])


@dataclass
class SolveReport:
    system: str
    penalty_levels: list[float] = field(default_factory=list)
    sup_deltas: list[float] = field(default_factory=list)
    penalty_excess: list[dict] = field(default_factory=list)
    iterations: list[int] = field(default_factory=list)
    monotonicity_violation: float = 0.0
    final_gap: float | None = None
    wall_time: float = 0.0
    sweep_fields: list[ValueField] = field(default_factory=list)

    def to_dict(self) -> dict:
        # wall_time deliberately excluded: persisted reports must be
        # byte-identical across reruns of the same configuration
        return {
            "system": self.system,
            "penalty_levels": self.penalty_levels,
            "sup_deltas": self.sup_deltas,
            "penalty_excess": self.penalty_excess,
            "iterations": self.iterations,
            "monotonicity_violation": self.monotonicity_violation,
            "final_gap": self.final_gap,
        }


# ---------------------------------------------------------------------------
# Per-level data cache
# ---------------------------------------------------------------------------


class _LevelCache:
    """Coefficient arrays and stencils evaluated once per time level."""

    def __init__(self, spec: ProblemSpec, grid: Grid):
        self.spec = spec
        self.grid = grid
        self.modes1 = spec.modes.modes1
        self.modes2 = spec.modes.modes2
        n1, n2, nx = len(self.modes1), len(self.modes2), grid.nx
        nt = grid.nt
        self.f = np.empty((nt, n1, n2, nx))
        self.g1 = np.empty((nt, n1, n1, nx))  # player-1 switch costs
        self.g2 = np.empty((nt, n2, n2, nx))  # player-2 switch costs
        self.stencils: list[GeneratorStencil] = []
        xs = grid.xs
        for k in range(nt):
            t = grid.times[k]
            ctx = EvalContext(t, xs)
            for a, i in enumerate(self.modes1):
                for b, j in enumerate(self.modes2):
                    self.f[k, a, b, :] = evaluate(spec.drivers.f[(i, j)], ctx)
            for a, i in enumerate(self.modes1):
                for b, k2 in enumerate(self.modes1):
                    self.g1[k, a, b, :] = evaluate(spec.costs.costs1[(i, k2)], ctx)
            for a, j in enumerate(self.modes2):
                for b, l in enumerate(self.modes2):
                    self.g2[k, a, b, :] = evaluate(spec.costs.costs2[(j, l)], ctx)
            self.stencils.append(discretize_generator(spec, grid, t))
        self.terminal = np.empty((n1, n2, nx))
        for a, i in enumerate(self.modes1):
            for b, j in enumerate(self.modes2):
                self.terminal[a, b, :] = evaluate(
                    spec.terminals.h[(i, j)], EvalContext(spec.horizon, xs)
                )


# ---------------------------------------------------------------------------
# Penalized implicit solve with an active-set handling of the reaction term
# ---------------------------------------------------------------------------


def _solve_reaction_rows(stencil, dt, rhs, thresholds, weight, side, contact, bound, w0):
    """Newton iteration on the penalty active sets with a frozen contact set.

    Contact rows are identity rows pinned to the obstacle; the remaining
    rows carry (I - dt L) w + reaction = rhs with the piecewise-linear
    reaction linearized on its current active set.  The reaction is convex
    (side "above") or concave (side "below") in w, so the active-set
    iteration is monotone and settles in a few tridiagonal solves.
    """
    nx = rhs.shape[0]
    w = w0
    prev_key = None
    for _ in range(_ACTIVE_SET_CAP):
        if side == "above":
            active = [w > c for c in thresholds]
        else:
            active = [w < d for d in thresholds]
        key = tuple(a.tobytes() for a in active)
        if key == prev_key:
            break
        prev_key = key
        diag = np.zeros(nx)
        extra = np.zeros(nx)
        for act, c in zip(active, thresholds):
            diag += dt * weight * act
            extra += dt * weight * act * c
        ab = np.zeros((3, nx))
        ab[0, 1:] = -dt * stencil.upper[:-1]
        ab[1, :] = 1.0 - dt * stencil.center + diag
        ab[2, :-1] = -dt * stencil.lower[1:]
        b = rhs + extra
        if contact is not None and np.any(contact):
            ab[0, 1:][contact[:-1]] = 0.0
            ab[1, :][contact] = 1.0
            ab[2, :-1][contact[1:]] = 0.0
            b = np.where(contact, bound, b)
        w = solve_banded((1, 1), ab, b)
    return w


def _pair_step(stencil, dt, rhs, thresholds, weight, bound, side, w0):
    """Solve one pair's implicit step with its reaction term and hard obstacle.

    side == "above" (descending scheme):
        min( w - bound,  (I - dt L) w + dt*weight * sum_c (w - c)^+ - rhs ) = 0
    side == "below" (ascending scheme):
        max( w - bound,  (I - dt L) w - dt*weight * sum_d (d - w)^+ - rhs ) = 0

    with bound the floor (resp. ceiling) built from the current iterate of
    the other mode pairs, or None in the single-pair case.  The obstacle is
    enforced row-by-row through a policy iteration on the contact set (each
    trial policy solved exactly by _solve_reaction_rows); enforcing it
    inside the rows rather than projecting afterwards is what makes the
    discrete comparison between the two schemes exact.  A visited-policy
    set guards against the rare contact/reaction cycling at large
    weight * dt.
    """
    if bound is None:
        return _solve_reaction_rows(stencil, dt, rhs, thresholds, weight, side, None, None, w0)
    w = w0
    contact = (w0 < bound) if side == "above" else (w0 > bound)
    seen = set()
    for _ in range(_ACTIVE_SET_CAP):
        w = _solve_reaction_rows(stencil, dt, rhs, thresholds, weight, side, contact, bound, w)
        reaction = np.zeros_like(rhs)
        for c in thresholds:
            if side == "above":
                reaction += dt * weight * np.maximum(w - c, 0.0)
            else:
                reaction -= dt * weight * np.maximum(c - w, 0.0)
        resid = w - dt * stencil.apply(w) + reaction - rhs
        if side == "above":
            new_contact = (w - bound) < resid
        else:
            new_contact = (w - bound) > resid
        if np.array_equal(new_contact, contact):
            break
        key = new_contact.tobytes()
        if key in seen:
            break
        seen.add(key)
        contact = new_contact
    return w


def _thresholds_minmax(cur, a, b, g2_level, penalizer):
    """Ceiling candidates for pair (a, b): cur[a, l] + costs2[b, l], l != b."""
    n2 = cur.shape[1]
    cands = [cur[a, l] + g2_level[b, l] for l in range(n2) if l != b]
    if not cands:
        return []
    if penalizer == "max":
        return [np.minimum.reduce(cands)]
    return cands


def _thresholds_maxmin(cur, a, b, g1_level, penalizer):
    """Floor candidates for pair (a, b): cur[k, b] - costs1[a, k], k != a."""
    n1 = cur.shape[0]
    cands = [cur[k, b] - g1_level[a, k] for k in range(n1) if k != a]
    if not cands:
        return []
    if penalizer == "max":
        return [np.maximum.reduce(cands)]
    return cands


def _project_floor(cur, g1_level):
    """Gauss-Seidel projection v^{ij} := max(v^{ij}, floor) until stable."""
    n1, n2 = cur.shape[0], cur.shape[1]
    for _ in range(2 * (n1 + n2) + 4):
        changed = False
        for a in range(n1):
            for b in range(n2):
                if n1 == 1:
                    continue
                floor = np.maximum.reduce([cur[k, b] - g1_level[a, k] for k in range(n1) if k != a])
                lifted = np.maximum(cur[a, b], floor)
                if np.any(lifted > cur[a, b]):
                    cur[a, b] = lifted
                    changed = True
        if not changed:
            return
    raise ConvergenceError("floor projection did not stabilize", residual=math.nan)


def _project_ceiling(cur, g2_level):
    """Gauss-Seidel projection v^{ij} := min(v^{ij}, ceiling) until stable."""
    n1, n2 = cur.shape[0], cur.shape[1]
    for _ in range(2 * (n1 + n2) + 4):
        changed = False
        for a in range(n1):
            for b in range(n2):
                if n2 == 1:
                    continue
                ceiling = np.minimum.reduce([cur[a, l] + g2_level[b, l] for l in range(n2) if l != b])
                cut = np.minimum(cur[a, b], ceiling)
                if np.any(cut < cur[a, b]):
                    cur[a, b] = cut
                    changed = True
        if not changed:
            return
    raise ConvergenceError("ceiling projection did not stabilize", residual=math.nan)


def _solve_penalized(cache: _LevelCache, penalty: float, direction: str,
                     schedule: PenaltySchedule, warm: np.ndarray | None):
    """One full backward pass at a fixed penalty level.

    Returns (values, iteration_count): values has shape (n1, n2, nt, nx).
    """
    grid = cache.grid
    n1 = len(cache.modes1)
    n2 = len(cache.modes2)
    nt, nx = grid.nt, grid.nx
    dt = grid.dt

    v = np.empty((n1, n2, nt, nx))
    v[:, :, nt - 1, :] = cache.terminal
    total_iters = 0

    for k in range(nt - 2, -1, -1):
        stencil = cache.stencils[k]
        f_k = cache.f[k]
        g1_k = cache.g1[k]
        g2_k = cache.g2[k]
        vnext = v[:, :, k + 1, :]
        cur = (warm[:, :, k, :] if warm is not None else vnext).copy()

        converged = False
        residual = math.inf
        for _ in range(schedule.max_iterations):
            total_iters += 1
            residual = 0.0
            for a in range(n1):
                for b in range(n2):
                    rhs = vnext[a, b] + dt * f_k[a, b]
                    if direction == "minmax":
                        thresholds = _thresholds_minmax(cur, a, b, g2_k, schedule.penalizer)
                        floor = (
                            np.maximum.reduce([cur[q, b] - g1_k[a, q] for q in range(n1) if q != a])
                            if n1 > 1 else None
                        )
                        w = _pair_step(
                            stencil, dt, rhs, thresholds, penalty, floor, "above", cur[a, b]
                        )
                    else:
                        thresholds = _thresholds_maxmin(cur, a, b, g1_k, schedule.penalizer)
                        ceiling = (
                            np.minimum.reduce([cur[a, l] + g2_k[b, l] for l in range(n2) if l != b])
                            if n2 > 1 else None
                        )
                        w = _pair_step(
                            stencil, dt, rhs, thresholds, penalty, ceiling, "below", cur[a, b]
                        )
                    residual = max(residual, float(np.max(np.abs(w - cur[a, b]))))
                    cur[a, b] = w
            if residual < schedule.fixed_point_tol:
                converged = True
                break
        if not converged:
            raise ConvergenceError(
                f"{direction} fixed point stalled at time level {k}", residual=residual
            )

        if direction == "minmax":
            _project_floor(cur, g1_k)
        else:
            _project_ceiling(cur, g2_k)
        v[:, :, k, :] = cur

    return v, total_iters


def _excess_by_pair(values, cache: _LevelCache, penalty: float, direction: str) -> dict:
    """Max over the grid of penalty * sum of obstacle excesses, per mode pair."""
    n1, n2 = len(cache.modes1), len(cache.modes2)
    nt = cache.grid.nt
    out = {}
    for a in range(n1):
        for b in range(n2):
            worst = 0.0
            for k in range(nt):
                if direction == "minmax":
                    terms = [
                        np.maximum(values[a, b, k] - values[a, l, k] - cache.g2[k, b, l], 0.0)
                        for l in range(n2) if l != b
                    ]
                else:
                    terms = [
                        np.maximum(values[q, b, k] - cache.g1[k, a, q] - values[a, b, k], 0.0)
                        for q in range(n1) if q != a
                    ]
                if terms:
                    worst = max(worst, penalty * float(np.max(sum(terms))))
            out[f"{cache.modes1[a]},{cache.modes2[b]}"] = worst
    return out


def _sweep(spec: ProblemSpec, grid: Grid, schedule: PenaltySchedule, direction: str):
    started = time.perf_counter()
    cache = _LevelCache(spec, grid)
    report = SolveReport(system=direction)
    prev = None
    prev_field = None
    labels = spec.modes.pairs
    for m in schedule.levels:
        values, iters = _solve_penalized(cache, m, direction, schedule, warm=prev)
        field_values = values.reshape(len(labels), grid.nt, grid.nx)
        fld = ValueField(system=direction, mode_labels=labels, values=field_values,
                         grid=grid, penalty=m)
        report.penalty_levels.append(m)
        report.iterations.append(iters)
        report.penalty_excess.append(_excess_by_pair(values, cache, m, direction))
        if prev_field is not None:
            delta = float(np.max(np.abs(field_values - prev_field.values)))
            report.sup_deltas.append(delta)
            # descending scheme must not increase, ascending must not decrease
            if direction == "minmax":
                viol = float(np.max(field_values - prev_field.values))
            else:
                viol = float(np.max(prev_field.values - field_values))
            report.monotonicity_violation = max(report.monotonicity_violation, viol)
        report.sweep_fields.append(fld)
        prev = values
        prev_field = fld
    report.wall_time = time.perf_counter() - started
    return prev_field, report


def solve_minmax(spec: ProblemSpec, grid: Grid, schedule: PenaltySchedule):
    """Descending penalized scheme: hard floor, penalized ceiling.

    Caller is responsible for having validated costs and terminal
    consistency.  Returns the field at the last penalty level and a report
    holding the whole sweep.
    """
    return _sweep(spec, grid, schedule, "minmax")


def solve_maxmin(spec: ProblemSpec, grid: Grid, schedule: PenaltySchedule):
    """Ascending penalized scheme: hard ceiling, penalized floor."""
    return _sweep(spec, grid, schedule, "maxmin")


def solve_clamped(spec: ProblemSpec, grid: Grid, order: str = "minmax") -> ValueField:
    """Direct double-obstacle cross-check: plain implicit step, then clamp.

    order == "minmax" applies v := max(min(v_step, ceiling), floor);
    order == "maxmin" applies v := min(max(v_step, floor), ceiling).
    Clamps are swept Gauss-Seidel to a fixed point at each level.
    """
    cache = _LevelCache(spec, grid)
    n1, n2 = len(cache.modes1), len(cache.modes2)
    nt, nx = grid.nt, grid.nx
    dt = grid.dt
    v = np.empty((n1, n2, nt, nx))
    v[:, :, nt - 1, :] = cache.terminal
    for k in range(nt - 2, -1, -1):
        stencil = cache.stencils[k]
        stepped = np.empty((n1, n2, nx))
        for a in range(n1):
            for b in range(n2):
                stepped[a, b] = solve_implicit(
                    stencil, dt, v[a, b, k + 1] + dt * cache.f[k, a, b]
                )
        cur = stepped.copy()
        for _ in range(4 * (n1 + n2) + 8):
            changed = False
            for a in range(n1):
                for b in range(n2):
                    floor = (
                        np.maximum.reduce([cur[q, b] - cache.g1[k, a, q] for q in range(n1) if q != a])
                        if n1 > 1 else np.full(nx, -math.inf)
                    )
                    ceiling = (
                        np.minimum.reduce([cur[a, l] + cache.g2[k, b, l] for l in range(n2) if l != b])
                        if n2 > 1 else np.full(nx, math.inf)
                    )
                    if order == "minmax":
                        new = np.maximum(np.minimum(stepped[a, b], ceiling), floor)
                    else:
                        new = np.minimum(np.maximum(stepped[a, b], floor), ceiling)
                    if np.any(new != cur[a, b]):
                        cur[a, b] = new
                        changed = True
            if not changed:
                break
        v[:, :, k, :] = cur
    return ValueField(system=f"clamped_{order}", mode_labels=spec.modes.pairs,
                      values=v.reshape(n1 * n2, nt, nx), grid=grid, penalty=None)


# ---------------------------------------------------------------------------
# Single-player systems (separated rewards)
# ---------------------------------------------------------------------------


def _grid_samples(spec: ProblemSpec, grid: Grid):
    ts = grid.times[:: max(1, grid.nt // 5)]
    xs = grid.xs[:: max(1, grid.nx // 10)]
    return [(float(t), float(x)) for t in ts for x in xs]


def solve_single_obstacle(spec: ProblemSpec, grid: Grid, which: int) -> ValueField:
    """Backward induction for one player's own switching system.

    which == 1: player 1 alone, floor obstacle with costs1, data f1/h1.
    which == 2: player 2 alone, ceiling obstacle with costs2, data f2/h2.
    Requires separated rewards; raises PreconditionError otherwise.
    """
    report, components = check_separation(spec, _grid_samples(spec, grid))
    if components is None:
        raise PreconditionError(
            "rewards are not separated across players",
            witness=report.checks["separation"].witnesses[:1],
        )
    nt, nx = grid.nt, grid.nx
    dt = grid.dt
    xs = grid.xs
    stencils = [discretize_generator(spec, grid, grid.times[k]) for k in range(nt - 1)]

    if which == 1:
        modes = spec.modes.modes1
        f_funcs = components.f1
        h_funcs = components.h1
        cost_table = spec.costs.costs1
    elif which == 2:
        modes = spec.modes.modes2
        f_funcs = components.f2
        h_funcs = components.h2
        cost_table = spec.costs.costs2
    else:
        raise ValueError("which must be 1 or 2")

    n = len(modes)
    v = np.empty((n, nt, nx))
    for a, mode in enumerate(modes):
        v[a, nt - 1, :] = np.broadcast_to(np.asarray(h_funcs[mode](xs), dtype=float), xs.shape)

    for k in range(nt - 2, -1, -1):
        t = grid.times[k]
        ctx = EvalContext(t, xs)
        costs = {
            (a, b): np.broadcast_to(
                np.asarray(evaluate(cost_table[(modes[a], modes[b])], ctx), dtype=float), xs.shape)
            for a in range(n) for b in range(n) if a != b
        }
        cur = np.empty((n, nx))
        for a, mode in enumerate(modes):
            src = np.broadcast_to(np.asarray(f_funcs[mode](t, xs), dtype=float), xs.shape)
            cur[a] = solve_implicit(stencils[k], dt, v[a, k + 1] + dt * src)
        for _ in range(2 * n + 4):
            changed = False
            for a in range(n):
                if n == 1:
                    continue
                if which == 1:
                    bound = np.maximum.reduce([cur[b] - costs[(a, b)] for b in range(n) if b != a])
                    new = np.maximum(cur[a], bound)
                else:
                    bound = np.minimum.reduce([cur[b] + costs[(a, b)] for b in range(n) if b != a])
                    new = np.minimum(cur[a], bound)
                if np.any(new != cur[a]):
                    cur[a] = new
                    changed = True
            if not changed:
                break
        v[:, k, :] = cur

    system = "single_lower" if which == 1 else "single_upper"
    return ValueField(system=system, mode_labels=tuple(modes), values=v, grid=grid)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


def sup_gap(field_a: ValueField, field_b: ValueField, region: float = 0.5) -> float:
    """Sup-norm of the difference over the central ``region`` of space,
    all time levels and all mode pairs."""
    if field_a.values.shape != field_b.values.shape:
        raise ValueError("fields have different shapes")
    if field_a.mode_labels != field_b.mode_labels:
        raise ValueError("fields have different mode labels")
    mask = field_a.grid.inner_mask(region)
    return float(np.max(np.abs(field_a.values[:, :, mask] - field_b.values[:, :, mask])))


def penalty_excess_diagnostic(field: ValueField, spec: ProblemSpec, grid: Grid,
                              penalty: float) -> dict:
    """Max over the grid of penalty * sum_l (v^{ij} - v^{il} - costs2_{jl})^+,
    per mode pair.  Bounded along the penalty sweep when the scheme behaves."""
    cache = _LevelCache(spec, grid)
    n1, n2 = len(cache.modes1), len(cache.modes2)
    values = field.values.reshape(n1, n2, grid.nt, grid.nx)
    return _excess_by_pair(values, cache, penalty, "minmax")


@dataclass
class BarrierVerdict:
    passed: bool
    max_floor_violation: float
    max_ceiling_violation: float
    witnesses: list[dict] = field(default_factory=list)


def barrier_respect_check(field: ValueField, spec: ProblemSpec, grid: Grid,
                          tol: float) -> BarrierVerdict:
    """Check floor - tol <= v <= ceiling + tol at every inner node and pair."""
    cache = _LevelCache(spec, grid)
    n1, n2 = len(cache.modes1), len(cache.modes2)
    values = field.values.reshape(n1, n2, grid.nt, grid.nx)
    mask = grid.inner_mask(0.5)
    verdict = BarrierVerdict(passed=True, max_floor_violation=0.0, max_ceiling_violation=0.0)
    for k in range(grid.nt):
        for a in range(n1):
            for b in range(n2):
                own = values[a, b, k][mask]
                if n1 > 1:
                    floor = np.maximum.reduce(
                        [values[q, b, k] - cache.g1[k, a, q] for q in range(n1) if q != a]
                    )[mask]
                    viol = float(np.max(floor - own))
                    verdict.max_floor_violation = max(verdict.max_floor_violation, viol)
                    if viol > tol:
                        verdict.passed = False
                        idx = int(np.argmax(floor - own))
                        verdict.witnesses.append(
                            {"side": "floor", "pair": [cache.modes1[a], cache.modes2[b]],
                             "t_index": k, "violation": viol, "x": float(grid.xs[mask][idx])}
                        )
                if n2 > 1:
                    ceiling = np.minimum.reduce(
                        [values[a, l, k] + cache.g2[k, b, l] for l in range(n2) if l != b]
                    )[mask]
                    viol = float(np.max(own - ceiling))
                    verdict.max_ceiling_violation = max(verdict.max_ceiling_violation, viol)
                    if viol > tol:
                        verdict.passed = False
                        idx = int(np.argmax(own - ceiling))
                        verdict.witnesses.append(
                            {"side": "ceiling", "pair": [cache.modes1[a], cache.modes2[b]],
                             "t_index": k, "violation": viol, "x": float(grid.xs[mask][idx])}
                        )
    return verdict


def decomposition_check(spec: ProblemSpec, grid: Grid, schedule: PenaltySchedule) -> float:
    """Sup over the inner half-domain and all pairs of
    |v^{ij} - (v1^i + v2^j)|, with v^{ij} the descending-scheme field at the
    largest penalty.  Requires separated rewards."""
    field1 = solve_single_obstacle(spec, grid, 1)
    field2 = solve_single_obstacle(spec, grid, 2)
    coupled, _ = solve_minmax(spec, grid, schedule)
    mask = grid.inner_mask(0.5)
    gap = 0.0
    for p_idx, (i, j) in enumerate(coupled.mode_labels):
        summed = field1.values[field1.index_of(i)] + field2.values[field2.index_of(j)]
        gap = max(gap, float(np.max(np.abs(coupled.values[p_idx][:, mask] - summed[:, mask]))))
    return gap
