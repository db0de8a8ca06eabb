"""Discrete switching game: strategies, payoffs, saddle construction and the
deterministic backward-induction oracle.

Conventions.  A switch declared at grid step k pays its cost at (t_k, X_k)
and changes the mode indicator from step k+1 on (a switch declared at the
final step changes nothing but still pays, so strategies should not do
that).  The running reward on the interval [t_k, t_{k+1}) is integrated by
left-endpoint quadrature in (t, x) using the mode pair that prevails on the
open interval, i.e. after any declaration at step k.  This aligns the
Monte Carlo payoff exactly with the backward-induction oracle on frozen
dynamics: an oracle switch at level k is a declaration at step k.

Player 1 maximizes the payoff

    h(X_T) + sum_k f(t_k, X_k) dt  -  (player-1 switch costs)
                                   +  (player-2 switch costs)

and player 2 minimizes it; player 2's own switching costs are charged
against it by entering the payoff with a plus sign.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, PreconditionError
from .expressions import EvalContext, evaluate
from .model import ProblemSpec
from .simulate import PathBundle
from .solver import ValueField

SWITCH_CAP = 64
TRIGGER_TOL = 1e-9


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RealizedStrategy:
    """A strategy materialized against one path bundle.

    modes[p, k] is the player's mode at grid step k on path p (left-limit
    convention: a switch declared at step s shows from step s+1).  The flat
    switch arrays carry every declaration, including ones at the final step
    that never show in ``modes``.
    """

    player: int
    modes: np.ndarray          # (n_paths, n_steps + 1) int
    switch_path: np.ndarray    # flat declaration records
    switch_step: np.ndarray
    switch_source: np.ndarray
    switch_target: np.ndarray

    def switches_per_path(self, n_paths: int) -> np.ndarray:
        return np.bincount(self.switch_path, minlength=n_paths)


@dataclass(frozen=True)
class SwitchingStrategy:
    """Either an explicit schedule of (step, target) declarations shared by
    every path, or a feedback rule driven by a single-player value field."""

    player: int
    start_mode: int
    schedule: tuple[tuple[int, int], ...] | None = None
    feedback_field: ValueField | None = None
    trigger_tol: float = TRIGGER_TOL
    switch_cap: int = SWITCH_CAP

    def realize(self, spec: ProblemSpec, bundle: PathBundle) -> RealizedStrategy:
        if self.feedback_field is not None:
            return _realize_feedback(self, spec, bundle)
        return _realize_explicit(self, spec, bundle)


def never_switch(player: int, start_mode: int) -> SwitchingStrategy:
    return SwitchingStrategy(player=player, start_mode=start_mode, schedule=())


def switch_at_start(spec: ProblemSpec, player: int, start_mode: int) -> SwitchingStrategy:
    """Jump to the next mode label at the first grid time, then hold."""
    modes = spec.modes.modes1 if player == 1 else spec.modes.modes2
    others = [m for m in modes if m != start_mode]
    if not others:
        return never_switch(player, start_mode)
    return SwitchingStrategy(player=player, start_mode=start_mode,
                             schedule=((0, others[0]),))


def switch_every_step(spec: ProblemSpec, player: int, start_mode: int,
                      cap: int = SWITCH_CAP) -> SwitchingStrategy:
    """Cost-bleeding challenger: alternate between two modes every step."""
    modes = spec.modes.modes1 if player == 1 else spec.modes.modes2
    others = [m for m in modes if m != start_mode]
    if not others:
        return never_switch(player, start_mode)
    schedule = []
    cur = start_mode
    for step in range(cap):
        nxt = others[0] if cur == start_mode else start_mode
        schedule.append((step, nxt))
        cur = nxt
    return SwitchingStrategy(player=player, start_mode=start_mode, schedule=tuple(schedule))


def random_switch(spec: ProblemSpec, player: int, start_mode: int, seed: int,
                  n_steps: int, rate: float = 0.05) -> SwitchingStrategy:
    """Seeded random challenger: at each step switch to a uniform other mode
    with probability ``rate``."""
    modes = spec.modes.modes1 if player == 1 else spec.modes.modes2
    others = [m for m in modes if m != start_mode]
    if not others:
        return never_switch(player, start_mode)
    rng = np.random.Generator(np.random.Philox(key=seed))
    schedule = []
    cur = start_mode
    for step in range(n_steps):
        if rng.random() < rate and len(schedule) < SWITCH_CAP:
            choices = [m for m in modes if m != cur]
            cur = choices[rng.integers(len(choices))]
            schedule.append((step, cur))
    return SwitchingStrategy(player=player, start_mode=start_mode, schedule=tuple(schedule))


def _realize_explicit(strategy: SwitchingStrategy, spec: ProblemSpec,
                      bundle: PathBundle) -> RealizedStrategy:
    n_paths = bundle.n_paths
    n_steps = bundle.n_steps
    schedule = list(strategy.schedule or ())
    if any(s2 < s1 for (s1, _), (s2, _) in zip(schedule, schedule[1:])):
        raise ValueError("switch steps must be non-decreasing")
    if len(schedule) > strategy.switch_cap:
        raise AdmissibilityError("explicit schedule exceeds switch cap", path_index=0)

    # same-step duplicates: the last declaration wins
    deduped: dict[int, int] = {}
    dupes = False
    for step, target in schedule:
        if not (0 <= step <= n_steps):
            raise ValueError(f"switch step {step} outside the simulation grid")
        if step in deduped:
            dupes = True
        deduped[step] = target
    if dupes:
        warnings.warn("multiple switches declared at one step; the last one wins")

    mode_track = np.full((n_paths, n_steps + 1), strategy.start_mode, dtype=np.int64)
    sw_steps, sw_sources, sw_targets = [], [], []
    cur = strategy.start_mode
    for step in sorted(deduped):
        target = deduped[step]
        if target == cur:
            raise ValueError(f"switch at step {step} targets the current mode {cur}")
        sw_steps.append(step)
        sw_sources.append(cur)
        sw_targets.append(target)
        if step + 1 <= n_steps:
            mode_track[:, step + 1:] = target
        cur = target

    reps = len(sw_steps)
    return RealizedStrategy(
        player=strategy.player,
        modes=mode_track,
        switch_path=np.repeat(np.arange(n_paths), reps),
        switch_step=np.tile(np.array(sw_steps, dtype=np.int64), n_paths),
        switch_source=np.tile(np.array(sw_sources, dtype=np.int64), n_paths),
        switch_target=np.tile(np.array(sw_targets, dtype=np.int64), n_paths),
    )


def _nearest_level(times: np.ndarray, t: float) -> int:
    return int(np.argmin(np.abs(times - t)))


def _realize_feedback(strategy: SwitchingStrategy, spec: ProblemSpec,
                      bundle: PathBundle) -> RealizedStrategy:
    """Vectorized rollout of the value-field trigger rule over all paths.

    At each grid step (the terminal step excluded: a switch there can only
    bleed cost) the rule fires when the current mode's value is dominated,
    within trigger_tol, by the best reachable value net of switching cost;
    the target is the smallest maximizing (player 1) or minimizing
    (player 2) mode label.  Field values are interpolated linearly in x and
    looked up at the nearest field time level.
    """
    fld = strategy.feedback_field
    player = strategy.player
    modes = spec.modes.modes1 if player == 1 else spec.modes.modes2
    cost_table = spec.costs.costs1 if player == 1 else spec.costs.costs2
    n_paths, n_steps = bundle.n_paths, bundle.n_steps

    cur = np.full(n_paths, strategy.start_mode, dtype=np.int64)
    counts = np.zeros(n_paths, dtype=np.int64)
    mode_track = np.empty((n_paths, n_steps + 1), dtype=np.int64)
    mode_track[:, 0] = cur
    sw_path, sw_step, sw_src, sw_tgt = [], [], [], []

    if len(modes) > 1:
        for k in range(n_steps):
            t = float(bundle.times[k])
            xk = bundle.states[:, k]
            level = _nearest_level(fld.grid.times, t)
            values = {m: fld.interp_x(m, level, xk) for m in modes}
            # snapshot: triggers fire at most once per grid time per path
            cur_at_step = cur.copy()
            for mode in modes:
                sel = cur_at_step == mode
                if not np.any(sel):
                    continue
                own = values[mode][sel]
                best = None
                best_target = np.full(int(sel.sum()), -1, dtype=np.int64)
                best_cost = np.zeros(int(sel.sum()))
                for other in modes:
                    if other == mode:
                        continue
                    cost = np.broadcast_to(np.asarray(
                        evaluate(cost_table[(mode, other)], EvalContext(t, xk[sel])), dtype=float
                    ), own.shape)
                    if player == 1:
                        cand = values[other][sel] - cost
                        better = cand > best if best is not None else np.ones_like(own, dtype=bool)
                    else:
                        cand = values[other][sel] + cost
                        better = cand < best if best is not None else np.ones_like(own, dtype=bool)
                    if best is None:
                        best = cand.copy()
                        best_target[:] = other
                        best_cost[:] = cost
                    else:
                        best = np.where(better, cand, best)
                        best_target = np.where(better, other, best_target)
                        best_cost = np.where(better, cost, best_cost)
                tol = strategy.trigger_tol
                # a touch with an essentially free switch is pure indifference
                # (both modes then carry the same value forever), so only a
                # strict gain or a touch backed by a real cost fires
                if player == 1:
                    touch = own <= best + tol
                    strict = own < best - tol
                else:
                    touch = own >= best - tol
                    strict = own > best + tol
                fire = touch & (strict | (best_cost > tol))
                if not np.any(fire):
                    continue
                idx = np.flatnonzero(sel)[fire]
                counts[idx] += 1
                over = idx[counts[idx] > strategy.switch_cap]
                if over.size:
                    raise AdmissibilityError(
                        "feedback strategy exceeded the switch cap", path_index=int(over[0])
                    )
                targets = best_target[fire]
                cur[idx] = targets
                sw_path.extend(idx.tolist())
                sw_step.extend([k] * idx.size)
                sw_src.extend([mode] * idx.size)
                sw_tgt.extend(targets.tolist())
            mode_track[:, k + 1] = cur
    else:
        mode_track[:, :] = strategy.start_mode

    order = np.lexsort((np.array(sw_step, dtype=np.int64), np.array(sw_path, dtype=np.int64))) \
        if sw_path else np.array([], dtype=np.int64)
    return RealizedStrategy(
        player=player,
        modes=mode_track,
        switch_path=np.array(sw_path, dtype=np.int64)[order],
        switch_step=np.array(sw_step, dtype=np.int64)[order],
        switch_source=np.array(sw_src, dtype=np.int64)[order],
        switch_target=np.array(sw_tgt, dtype=np.int64)[order],
    )


def saddle_strategy_player1(field: ValueField, spec: ProblemSpec, bundle: PathBundle,
                            start_mode: int, trigger_tol: float = TRIGGER_TOL) -> SwitchingStrategy:
    """Feedback rule that switches when player 1's own value touches its
    switching floor; built from the single_lower field."""
    if field.system != "single_lower":
        raise PreconditionError("saddle_strategy_player1 needs a single_lower field")
    return SwitchingStrategy(player=1, start_mode=start_mode, feedback_field=field,
                             trigger_tol=trigger_tol)


def saddle_strategy_player2(field: ValueField, spec: ProblemSpec, bundle: PathBundle,
                            start_mode: int, trigger_tol: float = TRIGGER_TOL) -> SwitchingStrategy:
    """Mirror rule for player 2 against its switching ceiling (single_upper)."""
    if field.system != "single_upper":
        raise PreconditionError("saddle_strategy_player2 needs a single_upper field")
    return SwitchingStrategy(player=2, start_mode=start_mode, feedback_field=field,
                             trigger_tol=trigger_tol)


# ---------------------------------------------------------------------------
# Indicator, costs, payoff
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IndicatorProcess:
    player: int
    modes: np.ndarray  # (n_paths, n_steps + 1)


def indicator_process(strategy: SwitchingStrategy, spec: ProblemSpec,
                      bundle: PathBundle) -> IndicatorProcess:
    realized = strategy.realize(spec, bundle)
    return IndicatorProcess(player=strategy.player, modes=realized.modes)


def _switch_costs(realized: RealizedStrategy, spec: ProblemSpec,
                  bundle: PathBundle) -> np.ndarray:
    """Total switching cost per path; declarations at the final step count."""
    table = spec.costs.costs1 if realized.player == 1 else spec.costs.costs2
    out = np.zeros(bundle.n_paths)
    if realized.switch_path.size == 0:
        return out
    t_at = bundle.times[realized.switch_step]
    x_at = bundle.states[realized.switch_path, realized.switch_step]
    for (src, tgt) in {(int(s), int(g)) for s, g in
                       zip(realized.switch_source, realized.switch_target)}:
        mask = (realized.switch_source == src) & (realized.switch_target == tgt)
        costs = np.asarray(
            evaluate(table[(src, tgt)], EvalContext(t_at[mask], x_at[mask])), dtype=float
        )
        np.add.at(out, realized.switch_path[mask], np.broadcast_to(costs, (int(mask.sum()),)))
    return out


def cumulative_cost(strategy: SwitchingStrategy, spec: ProblemSpec,
                    bundle: PathBundle) -> np.ndarray:
    return _switch_costs(strategy.realize(spec, bundle), spec, bundle)


@dataclass(frozen=True, eq=False)
class PayoffEstimate:
    mean: float
    stderr: float
    n_paths: int
    per_path: np.ndarray
    cost1_per_path: np.ndarray
    cost2_per_path: np.ndarray
    switches1: np.ndarray
    switches2: np.ndarray


def payoff_estimate(spec: ProblemSpec, bundle: PathBundle,
                    strategy1: SwitchingStrategy, strategy2: SwitchingStrategy) -> PayoffEstimate:
    """Monte Carlo payoff of a strategy pair on a common path bundle."""
    r1 = strategy1.realize(spec, bundle)
    r2 = strategy2.realize(spec, bundle)
    n_paths, n_steps = bundle.n_paths, bundle.n_steps
    dt = float(bundle.times[1] - bundle.times[0]) if n_steps else 0.0

    # interval modes: the pair prevailing on [t_k, t_{k+1})
    m1 = r1.modes[:, 1:]
    m2 = r2.modes[:, 1:]
    reward = np.zeros(n_paths)
    for k in range(n_steps):
        tk = float(bundle.times[k])
        xk = bundle.states[:, k]
        for (i, j) in spec.modes.pairs:
            mask = (m1[:, k] == i) & (m2[:, k] == j)
            if not np.any(mask):
                continue
            vals = np.asarray(
                evaluate(spec.drivers.f[(i, j)], EvalContext(tk, xk[mask])), dtype=float
            )
            reward[mask] += np.broadcast_to(vals, (int(mask.sum()),)) * dt

    terminal = np.zeros(n_paths)
    xT = bundle.states[:, -1]
    for (i, j) in spec.modes.pairs:
        mask = (r1.modes[:, -1] == i) & (r2.modes[:, -1] == j)
        if not np.any(mask):
            continue
        vals = np.asarray(
            evaluate(spec.terminals.h[(i, j)], EvalContext(spec.horizon, xT[mask])), dtype=float
        )
        terminal[mask] = np.broadcast_to(vals, (int(mask.sum()),))

    cost1 = _switch_costs(r1, spec, bundle)
    cost2 = _switch_costs(r2, spec, bundle)
    per_path = terminal + reward - cost1 + cost2
    mean = float(np.mean(per_path))
    stderr = float(np.std(per_path, ddof=1) / np.sqrt(n_paths)) if n_paths > 1 else 0.0
    return PayoffEstimate(
        mean=mean, stderr=stderr, n_paths=n_paths, per_path=per_path,
        cost1_per_path=cost1, cost2_per_path=cost2,
        switches1=r1.switches_per_path(n_paths), switches2=r2.switches_per_path(n_paths),
    )


# ---------------------------------------------------------------------------
# Saddle verification
# ---------------------------------------------------------------------------


@dataclass
class GameReport:
    start: dict
    z: float
    saddle_mean: float = 0.0
    saddle_stderr: float = 0.0
    pde_value: float | None = None
    pde_gap: float | None = None
    pde_tolerance: float | None = None
    pde_ok: bool | None = None
    challenger1: list[dict] = field(default_factory=list)
    challenger2: list[dict] = field(default_factory=list)
    saddle_payoff: PayoffEstimate | None = None

    def all_passed(self) -> bool:
        ok = all(c["passed"] for c in self.challenger1 + self.challenger2)
        if self.pde_ok is not None:
            ok = ok and self.pde_ok
        return ok

    def to_dict(self) -> dict:
        return {
            "start": self.start,
            "z": self.z,
            "saddle_mean": self.saddle_mean,
            "saddle_stderr": self.saddle_stderr,
            "pde_value": self.pde_value,
            "pde_gap": self.pde_gap,
            "pde_tolerance": self.pde_tolerance,
            "pde_ok": self.pde_ok,
            "challenger1": self.challenger1,
            "challenger2": self.challenger2,
            "all_passed": self.all_passed(),
        }


def verify_saddle(
    spec: ProblemSpec,
    bundle: PathBundle,
    saddle1: SwitchingStrategy,
    saddle2: SwitchingStrategy,
    challengers1: list[tuple[str, SwitchingStrategy]],
    challengers2: list[tuple[str, SwitchingStrategy]],
    start: tuple[float, float, int, int],
    pde_value: float | None = None,
    pde_allowance: float = 0.0,
    z: float = 3.0,
) -> GameReport:
    """Test the saddle inequalities under common random numbers.

    For every player-1 challenger d: J(d, s2) <= J(s1, s2), and for every
    player-2 challenger n: J(s1, s2) <= J(s1, n), each up to z standard
    errors of the per-path payoff difference.  Optionally compares the
    saddle payoff to a PDE value within z * stderr + pde_allowance.
    """
    t0, x0, i0, j0 = start
    base = payoff_estimate(spec, bundle, saddle1, saddle2)
    report = GameReport(start={"t": t0, "x": x0, "mode1": i0, "mode2": j0}, z=z)
    report.saddle_mean = base.mean
    report.saddle_stderr = base.stderr
    report.saddle_payoff = base

    def diff_entry(name, gain, attempt):
        mean = float(np.mean(gain))
        sem = float(np.std(gain, ddof=1) / np.sqrt(gain.size)) if gain.size > 1 else 0.0
        slack = z * sem if sem > 0 else 1e-9 * (1.0 + abs(base.mean))
        return {
            "name": name,
            "estimate": attempt.mean,
            "estimate_stderr": attempt.stderr,
            "mean_difference": mean,
            "stderr": sem,
            "z_score": mean / sem if sem > 0 else 0.0,
            "tolerance": slack,
            "passed": bool(mean >= -slack),
        }

    for name, challenger in challengers1:
        attempt = payoff_estimate(spec, bundle, challenger, saddle2)
        report.challenger1.append(diff_entry(name, base.per_path - attempt.per_path, attempt))
    for name, challenger in challengers2:
        attempt = payoff_estimate(spec, bundle, saddle1, challenger)
        report.challenger2.append(diff_entry(name, attempt.per_path - base.per_path, attempt))

    if pde_value is not None:
        gap = abs(base.mean - pde_value)
        tolerance = z * base.stderr + pde_allowance
        report.pde_value = float(pde_value)
        report.pde_gap = float(gap)
        report.pde_tolerance = float(tolerance)
        report.pde_ok = bool(gap <= tolerance)
    return report


def verify_saddle_from_fields(
    spec: ProblemSpec,
    bundle: PathBundle,
    field1: ValueField,
    field2: ValueField,
    challengers1: list[tuple[str, SwitchingStrategy]],
    challengers2: list[tuple[str, SwitchingStrategy]],
    start: tuple[float, float, int, int],
    pde_allowance: float = 2e-2,
    z: float = 3.0,
) -> GameReport:
    """verify_saddle with the saddle pair built from the two single-player
    fields and the PDE comparison value taken as their sum at the start."""
    t0, x0, i0, j0 = start
    saddle1 = saddle_strategy_player1(field1, spec, bundle, i0)
    saddle2 = saddle_strategy_player2(field2, spec, bundle, j0)
    level = _nearest_level(field1.grid.times, t0)
    pde_value = float(
        field1.interp_x(i0, level, np.array([x0]))[0]
        + field2.interp_x(j0, level, np.array([x0]))[0]
    )
    return verify_saddle(
        spec, bundle, saddle1, saddle2, challengers1, challengers2,
        start=start, pde_value=pde_value, pde_allowance=pde_allowance, z=z,
    )


# ---------------------------------------------------------------------------
# Deterministic backward-induction oracle (frozen state)
# ---------------------------------------------------------------------------

ORACLE_MAX_NT = 12
ORACLE_MAX_MODES = 3


def _require_frozen(spec: ProblemSpec, x: float):
    ts = np.linspace(0.0, spec.horizon, 5)
    for t in ts:
        b = float(evaluate(spec.diffusion.drift, EvalContext(float(t), x)))
        s = float(evaluate(spec.diffusion.volatility, EvalContext(float(t), x)))
        if abs(b) > 1e-14 or abs(s) > 1e-14:
            raise PreconditionError("oracle requires zero drift and volatility")


def deterministic_dp_oracle(spec: ProblemSpec, nt: int, x: float) -> dict:
    """Exact backward induction on the time grid with the state frozen at x.

    Both clamp orders are reported: the "minmax" variant applies the floor
    first then the ceiling, the "maxmin" variant the reverse, each iterated
    within the step to a fixed point because the obstacles reference the
    values being computed.
    """
    _require_frozen(spec, x)
    if nt > ORACLE_MAX_NT:
        raise PreconditionError(f"oracle limited to nt <= {ORACLE_MAX_NT}")
    if len(spec.modes.modes1) > ORACLE_MAX_MODES or len(spec.modes.modes2) > ORACLE_MAX_MODES:
        raise PreconditionError(f"oracle limited to {ORACLE_MAX_MODES} modes per player")
    out = {}
    for variant in ("minmax", "maxmin"):
        table = _oracle_tables(spec, nt, x, variant)
        out[variant] = {pair: table[0][pair] for pair in spec.modes.pairs}
    return out


def _oracle_tables(spec: ProblemSpec, nt: int, x: float, variant: str) -> list[dict]:
    """Per-level value dictionaries, terminal last."""
    times = np.linspace(0.0, spec.horizon, nt)
    dt = float(times[1] - times[0])
    pairs = spec.modes.pairs
    modes1, modes2 = spec.modes.modes1, spec.modes.modes2

    levels = [dict() for _ in range(nt)]
    for pair in pairs:
        levels[nt - 1][pair] = float(
            evaluate(spec.terminals.h[pair], EvalContext(spec.horizon, x))
        )

    for k in range(nt - 2, -1, -1):
        t = float(times[k])
        ctx = EvalContext(t, x)
        g1 = {key: float(evaluate(expr, ctx)) for key, expr in spec.costs.costs1.items()}
        g2 = {key: float(evaluate(expr, ctx)) for key, expr in spec.costs.costs2.items()}
        cont = {
            (i, j): levels[k + 1][(i, j)] + dt * float(evaluate(spec.drivers.f[(i, j)], ctx))
            for (i, j) in pairs
        }
        values = dict(cont)
        for _ in range(64):
            changed = False
            for (i, j) in pairs:
                floor = max(
                    (values[(q, j)] - g1[(i, q)] for q in modes1 if q != i),
                    default=-math.inf,
                )
                ceiling = min(
                    (values[(i, l)] + g2[(j, l)] for l in modes2 if l != j),
                    default=math.inf,
                )
                if variant == "minmax":
                    new = min(max(cont[(i, j)], floor), ceiling)
                else:
                    new = max(min(cont[(i, j)], ceiling), floor)
                if new != values[(i, j)]:
                    values[(i, j)] = new
                    changed = True
            if not changed:
                break
        levels[k] = values
    return levels


def oracle_optimal_strategies(spec: ProblemSpec, nt: int, x: float,
                              start: tuple[int, int], variant: str = "minmax"):
    """Extract the oracle's own-play schedules by walking the value tables.

    At each level the clamp that binds dictates the switch: a binding floor
    is a player-1 declaration, a binding ceiling a player-2 declaration
    (chains within one level are followed through the fixed point).
    Returns (schedule1, schedule2, value at the start pair).
    """
    _require_frozen(spec, x)
    levels = _oracle_tables(spec, nt, x, variant)
    times = np.linspace(0.0, spec.horizon, nt)
    modes1, modes2 = spec.modes.modes1, spec.modes.modes2
    i, j = start
    sched1: list[tuple[int, int]] = []
    sched2: list[tuple[int, int]] = []
    tol = 1e-11
    for k in range(nt - 1):
        values = levels[k]
        ctx = EvalContext(float(times[k]), x)
        g1 = {key: float(evaluate(expr, ctx)) for key, expr in spec.costs.costs1.items()}
        g2 = {key: float(evaluate(expr, ctx)) for key, expr in spec.costs.costs2.items()}
        for _ in range(len(modes1) + len(modes2) + 2):
            moved = False
            if _binds_floor(levels, spec, times, k, i, j, x, tol):
                floor_targets = [q for q in modes1 if q != i
                                 and abs(values[(i, j)] - (values[(q, j)] - g1[(i, q)])) <= tol]
                if floor_targets:
                    target = min(floor_targets)
                    sched1.append((k, target))
                    i = target
                    moved = True
            elif _binds_ceiling(levels, spec, times, k, i, j, x, tol):
                ceil_targets = [l for l in modes2 if l != j
                                and abs(values[(i, j)] - (values[(i, l)] + g2[(j, l)])) <= tol]
                if ceil_targets:
                    target = min(ceil_targets)
                    sched2.append((k, target))
                    j = target
                    moved = True
            if not moved:
                break
    return sched1, sched2, levels[0][start]


def _continuation(levels, spec, times, k, i, j, x) -> float:
    dt = float(times[1] - times[0])
    ctx = EvalContext(float(times[k]), x)
    return levels[k + 1][(i, j)] + dt * float(evaluate(spec.drivers.f[(i, j)], ctx))


def _binds_floor(levels, spec, times, k, i, j, x, tol) -> bool:
    return levels[k][(i, j)] > _continuation(levels, spec, times, k, i, j, x) + tol


def _binds_ceiling(levels, spec, times, k, i, j, x, tol) -> bool:
    return levels[k][(i, j)] < _continuation(levels, spec, times, k, i, j, x) - tol


def default_challengers(spec: ProblemSpec, player: int, start_mode: int, seed: int,
                        n_steps: int, frozen_start: tuple[int, int] | None = None,
                        nt_oracle: int | None = None, x: float = 0.0):
    """The stock challenger roster: never switch, switch at the start,
    seeded random switching, and (frozen dynamics only) the oracle's own play."""
    roster = [
        ("never_switch", never_switch(player, start_mode)),
        ("switch_at_start", switch_at_start(spec, player, start_mode)),
        ("random_switch", random_switch(spec, player, start_mode, seed, n_steps)),
    ]
    if frozen_start is not None and nt_oracle is not None:
        sched1, sched2, _ = oracle_optimal_strategies(spec, nt_oracle, x, frozen_start)
        sched = sched1 if player == 1 else sched2
        roster.append((
            "oracle_optimal",
            SwitchingStrategy(player=player, start_mode=start_mode, schedule=tuple(sched)),
        ))
    return roster
