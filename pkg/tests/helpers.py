"""Shared spec builders and independent reference oracles for the tests."""

from __future__ import annotations

import math

import numpy as np

from switchgame.expressions import parse_expression as pe
from switchgame.model import (
    DiffusionCoefficients,
    DriverTable,
    ModeSets,
    ProblemSpec,
    SwitchCostTable,
    TerminalTable,
)


def build_spec(
    modes1=(1, 2),
    modes2=(1, 2),
    costs1=None,
    costs2=None,
    drivers=None,
    terminals=None,
    drift="0",
    volatility="0",
    horizon=1.0,
    domain=(-1.0, 1.0),
):
    """Assemble a ProblemSpec from expression strings (constants by default)."""
    modes = ModeSets(tuple(modes1), tuple(modes2))
    costs1 = costs1 or {}
    costs2 = costs2 or {}
    c1 = {k: pe(str(v)) for k, v in costs1.items()}
    c2 = {k: pe(str(v)) for k, v in costs2.items()}
    drivers = drivers or {p: "0" for p in modes.pairs}
    terminals = terminals or {p: "0" for p in modes.pairs}
    return ProblemSpec(
        modes=modes,
        costs=SwitchCostTable.full(modes, c1, c2),
        drivers=DriverTable({p: pe(str(s)) for p, s in drivers.items()}),
        terminals=TerminalTable({p: pe(str(s)) for p, s in terminals.items()}),
        diffusion=DiffusionCoefficients(pe(str(drift)), pe(str(volatility))),
        horizon=horizon,
        domain=domain,
    )


def uniform_costs(modes1, modes2, c1, c2):
    costs1 = {(a, b): c1 for a in modes1 for b in modes1 if a != b}
    costs2 = {(a, b): c2 for a in modes2 for b in modes2 if a != b}
    return costs1, costs2


def heat_spec(nx_domain=(-4.0, 4.0)):
    """Single mode pair, pure diffusion, quadratic terminal."""
    return build_spec(
        modes1=(1,), modes2=(1,),
        drivers={(1, 1): "0"}, terminals={(1, 1): "x^2"},
        drift="0", volatility="1", horizon=1.0, domain=nx_domain,
    )


def frozen_diag_spec(c1=0.25, c2=0.45):
    """2x2 matching-reward game on frozen dynamics; loop-valid costs."""
    costs1, costs2 = uniform_costs((1, 2), (1, 2), c1, c2)
    return build_spec(
        costs1=costs1, costs2=costs2,
        drivers={(1, 1): "1", (1, 2): "0", (2, 1): "0", (2, 2): "1"},
    )


def bilevel_tree_value(spec, nt, x, start, outer, memo=False):
    """Independent game-tree oracle for frozen dynamics.

    Recursively folds the full tree of joint one-switch-per-step actions
    (every root-to-leaf path is one joint switch schedule).  outer == "p1":
    player 1 commits first each step, player 2 responds; outer == "p2" the
    reverse.  With memo=False the recursion literally enumerates all
    (|modes1|*|modes2|)^(nt-1) schedules.
    """
    from switchgame.expressions import evaluate_tx as ev

    times = np.linspace(0.0, spec.horizon, nt)
    dt = float(times[1] - times[0])
    m1, m2 = spec.modes.modes1, spec.modes.modes2
    f = {
        (i, j, k): float(ev(spec.drivers.f[(i, j)], float(times[k]), x)) * dt
        for (i, j) in spec.modes.pairs for k in range(nt - 1)
    }
    g1 = {
        (a, b, k): float(ev(spec.costs.costs1[(a, b)], float(times[k]), x))
        for a in m1 for b in m1 for k in range(nt - 1)
    }
    g2 = {
        (a, b, k): float(ev(spec.costs.costs2[(a, b)], float(times[k]), x))
        for a in m2 for b in m2 for k in range(nt - 1)
    }
    h = {(i, j): float(ev(spec.terminals.h[(i, j)], spec.horizon, x)) for (i, j) in spec.modes.pairs}

    cache: dict = {}

    def rec(i, j, k):
        if k == nt - 1:
            return h[(i, j)]
        if memo and (i, j, k) in cache:
            return cache[(i, j, k)]
        if outer == "p1":
            best = -math.inf
            for a1 in m1:
                inner = math.inf
                for a2 in m2:
                    val = -g1[(i, a1, k)] + g2[(j, a2, k)] + f[(a1, a2, k)] + rec(a1, a2, k + 1)
                    inner = min(inner, val)
                best = max(best, inner)
        else:
            best = math.inf
            for a2 in m2:
                inner = -math.inf
                for a1 in m1:
                    val = -g1[(i, a1, k)] + g2[(j, a2, k)] + f[(a1, a2, k)] + rec(a1, a2, k + 1)
                    inner = max(inner, val)
                best = min(best, inner)
        if memo:
            cache[(i, j, k)] = best
        return best

    i, j = start
    return rec(i, j, 0)


def single_player_schedule_oracle(spec, nt, x, player, start_mode, max_switches=3):
    """Exhaustive one-player value on frozen dynamics: enumerate every
    switch schedule (times x target sequences) and take the best payoff."""
    from itertools import combinations, product

    from switchgame.expressions import evaluate_tx as ev

    times = np.linspace(0.0, spec.horizon, nt)
    dt = float(times[1] - times[0])
    modes = spec.modes.modes1 if player == 1 else spec.modes.modes2
    table = spec.costs.costs1 if player == 1 else spec.costs.costs2
    sign = 1.0 if player == 1 else -1.0

    # separated reward components relative to the anchor mode of the other player
    anchor2 = spec.modes.modes2[0]
    anchor1 = spec.modes.modes1[0]

    def reward(mode, k):
        if player == 1:
            return float(ev(spec.drivers.f[(mode, anchor2)], float(times[k]), x))
        return float(
            ev(spec.drivers.f[(anchor1, mode)], float(times[k]), x)
            - ev(spec.drivers.f[(anchor1, anchor2)], float(times[k]), x)
        )

    def terminal(mode):
        if player == 1:
            return float(ev(spec.terminals.h[(mode, anchor2)], spec.horizon, x))
        return float(
            ev(spec.terminals.h[(anchor1, mode)], spec.horizon, x)
            - ev(spec.terminals.h[(anchor1, anchor2)], spec.horizon, x)
        )

    best = None
    for n_sw in range(max_switches + 1):
        for steps in combinations(range(nt - 1), n_sw):
            for targets in product(modes, repeat=n_sw):
                mode = start_mode
                ok = True
                for tgt in targets:
                    if tgt == mode:
                        ok = False
                        break
                    mode = tgt
                if not ok:
                    continue
                mode = start_mode
                total = 0.0
                sw = dict(zip(steps, targets))
                for k in range(nt - 1):
                    if k in sw:
                        cost = float(ev(table[(mode, sw[k])], float(times[k]), x))
                        total -= sign * cost
                        mode = sw[k]
                    total += reward(mode, k) * dt
                total += terminal(mode)
                value = total if player == 1 else total
                if best is None:
                    best = value
                elif player == 1:
                    best = max(best, value)
                else:
                    best = min(best, value)
    return best
