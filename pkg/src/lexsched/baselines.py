"""The three reference LexOpt methods, built on the internal exact search.

No external MILP solver: the sequential method runs one prefix-constrained
exact solve per objective, the weighting method is an exact search on the
big-M weighted sum (default B=2, lexicographic tie break), and the
highest-rank method enumerates minimum-makespan schedules into a bounded
pool and picks the lexicographically smallest.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .bnb import Limits, SolveReport, _kernel_for_instance, _lpt_schedule_from, _sorted_jobs
from .model import (
    Instance,
    InfeasibleError,
    Schedule,
    completion_vector,
    lex_less,
    weighted_value,
)

_BUDGET_CHECK_INTERVAL = 1024


@dataclass(frozen=True)
class PoolEntry:
    schedule: Schedule
    vector: tuple[int, ...]


@dataclass
class ConstrainedResult:
    value: int
    schedule: Schedule
    status: str  # "optimal" | "timeout"
    nodes: int


def solve_constrained_min(
    instance: Instance,
    objective_index: int,
    prefix: Sequence[int],
    limits: Limits | None = None,
    warm: Schedule | None = None,
) -> ConstrainedResult:
    """Minimize the i-th largest completion over schedules matching the prefix.

    The search runs the lexopt machinery with a truncated incumbent: the
    sentinel vector (v_1..v_{i-1}, best_i, -1, ...) lex-compares exactly like
    the i-component truncation, so fathoming and incumbent updates optimize
    the i-th objective and nothing beyond it.
    """
    limits = limits or Limits()
    i = objective_index
    m = instance.m
    prefix = tuple(prefix)
    if not 1 <= i <= m or len(prefix) != i - 1:
        raise ValueError(f"objective index {i} needs a prefix of length {i - 1}")
    start = time.perf_counter()
    deadline = start + limits.time_s if limits.time_s is not None else None
    jobs_sorted, ps, ids = _sorted_jobs(instance)
    n = len(ps)
    kernel = _kernel_for_instance(instance)

    big = instance.total_time + 1
    best = big
    witness: Schedule | None = None
    if warm is not None:
        wvec = completion_vector(warm)
        if wvec[: i - 1] == prefix:
            best = wvec[i - 1]
            witness = warm

    def sentinel() -> tuple[int, ...]:
        return prefix + (best,) + (-1,) * (m - i)

    nodes = 1
    if n == 0:
        return ConstrainedResult(0, Schedule(instance, {}), "optimal", nodes)

    inc = sentinel()
    loads0 = (0,) * m
    vec, prune, lnum, lden, _ = kernel.evaluate_node(loads0, ps, 0, inc)
    if lex_less(vec, inc):
        best = vec[i - 1]
        witness = _lpt_schedule_from(instance, ids, (), loads0, jobs_sorted)
        inc = sentinel()
    stack = []
    if not prune:
        stack.append((0, loads0, (), lnum, lden))

    status = "optimal"
    while stack:
        if limits.nodes is not None and nodes >= limits.nodes:
            status = "timeout"
            break
        if deadline is not None and nodes % _BUDGET_CHECK_INTERVAL == 0:
            if time.perf_counter() > deadline:
                status = "timeout"
                break
        level, loads, assignment, lnum, lden = stack.pop()
        if _sentinel_prune(inc, lnum, lden):
            continue
        p = ps[level]
        seen: dict[int, int] = {}
        for q, load in enumerate(loads):
            if load not in seen:
                seen[load] = q
        children = [(q, loads[:q] + (load + p,) + loads[q + 1 :]) for load, q in sorted(seen.items())]
        for q, new_loads in reversed(children):
            nodes += 1
            child_assignment = assignment + (q,)
            if level + 1 == n:
                leaf_vec = tuple(sorted(new_loads, reverse=True))
                if lex_less(leaf_vec, inc):
                    best = leaf_vec[i - 1]
                    witness = Schedule(instance, {ids[j]: child_assignment[j] + 1 for j in range(n)})
                    inc = sentinel()
                continue
            vec, prune, lnum_c, lden_c, _ = kernel.evaluate_node(new_loads, ps, level + 1, inc)
            if lex_less(vec, inc):
                best = vec[i - 1]
                witness = _lpt_schedule_from(instance, ids, child_assignment, new_loads, jobs_sorted)
                inc = sentinel()
            if not prune:
                stack.append((level + 1, new_loads, child_assignment, lnum_c, lden_c))

    if witness is None:
        raise InfeasibleError(f"no schedule matches the fixed prefix {prefix}")
    return ConstrainedResult(best, witness, status, nodes)


def _sentinel_prune(inc, lnum, lden) -> bool:
    for k in range(len(inc)):
        lhs = inc[k] * lden[k]
        if lhs != lnum[k]:
            return lhs < lnum[k]
    return True


def sequential_method(instance: Instance, limits: Limits | None = None) -> SolveReport:
    """Minimize C_1..C_m iteratively, warm-starting each step with the last.

    On a global timeout the witness of the last completed step is returned,
    so lower-ranked objectives stay unoptimized.
    """
    limits = limits or Limits()
    start = time.perf_counter()
    deadline = start + limits.time_s if limits.time_s is not None else None
    m = instance.m
    v_star: list[int] = []
    nodes = 0
    witness: Schedule | None = None
    last_completed: Schedule | None = None
    status = "optimal"
    for i in range(1, m + 1):
        step_limits = Limits(
            time_s=None if deadline is None else max(deadline - time.perf_counter(), 0.0),
            nodes=None if limits.nodes is None else max(limits.nodes - nodes, 0),
        )
        result = solve_constrained_min(instance, i, tuple(v_star), step_limits, warm=witness)
        nodes += result.nodes
        witness = result.schedule
        if result.status == "timeout":
            status = "timeout"
            break
        v_star.append(result.value)
        last_completed = result.schedule
    schedule = last_completed if last_completed is not None else witness
    assert schedule is not None
    vec = completion_vector(schedule)
    elapsed_ms = int((time.perf_counter() - start) * 1000)
    lower = tuple(Fraction(v) for v in v_star) + tuple(Fraction(0) for _ in range(m - len(v_star)))
    return SolveReport(
        schedule, vec, status, nodes, 0, lower, elapsed_ms,
        method="sequential", extras={"v_star": list(v_star)},
    )


def _waterfill_weight(t_desc: Sequence[int], lam: int, base: int) -> Fraction:
    """Weighted value of the fractional even fill of `lam` onto the loads.

    Every feasible completion vector below the node majorizes this fill, and
    the weighted sum is Schur-convex, so this is a valid lower bound.
    """
    m = len(t_desc)
    asc = list(reversed(t_desc))
    acc = 0
    cnt = m
    level = Fraction(0)
    for j in range(m):
        acc += asc[j]
        cnt = j + 1
        level = Fraction(acc + lam, cnt)
        if j == m - 1 or level <= asc[j + 1]:
            break
    filled_desc = sorted(asc[cnt:], reverse=True) + [level] * cnt
    total = Fraction(0)
    for pos, value in enumerate(filled_desc, start=1):
        total += base ** (m - pos) * value
    return total


class WeightIncumbent:
    """Running minimum-weight schedule with lexicographic tie resolution.

    Equal-weight, lex-distinct candidates are a documented ambiguity of the
    B=2 weighting ((5,5,0) and (6,2,2) weigh the same); when one shows up
    the tie is flagged and the lex-smaller vector wins.
    """

    def __init__(self, base: int):
        self.base = base
        self.weight: int | None = None
        self.vector: tuple[int, ...] | None = None
        self.schedule: Schedule | None = None
        self.tie_detected = False

    def consider(self, vec: tuple[int, ...], make_schedule: Callable[[], Schedule]) -> None:
        w = weighted_value(vec, self.base)
        if self.weight is None or w < self.weight:
            self.weight, self.vector, self.schedule = w, vec, make_schedule()
        elif w == self.weight and vec != self.vector:
            self.tie_detected = True
            if lex_less(vec, self.vector):
                self.vector, self.schedule = vec, make_schedule()


def weighting_method(
    instance: Instance,
    base: int = 2,
    limits: Limits | None = None,
    prune_bound: bool = True,
) -> SolveReport:
    """Exact minimization of sum(B**(m-i) * C_i) with a lex tie break.

    Pruning is strict (bound > incumbent weight) so every minimum-weight
    leaf stays reachable; among those the lexicographically smallest vector
    is kept and any observed weight tie between lex-distinct vectors is
    flagged in the report.
    """
    limits = limits or Limits()
    if base < 2:
        raise ValueError("weighting base must be >= 2")
    start = time.perf_counter()
    deadline = start + limits.time_s if limits.time_s is not None else None
    m = instance.m
    jobs_sorted, ps, ids = _sorted_jobs(instance)
    n = len(ps)
    kernel = _kernel_for_instance(instance)

    incumbent = WeightIncumbent(base)
    consider = incumbent.consider
    nodes = 1

    def elapsed_ms() -> int:
        return int((time.perf_counter() - start) * 1000)

    if n == 0:
        vec = (0,) * m
        return SolveReport(
            Schedule(instance, {}), vec, "optimal", nodes, 1,
            tuple(Fraction(0) for _ in range(m)), elapsed_ms(),
            method="weighting", extras={"weight": 0, "tie_detected": False, "base": base},
        )

    loads0 = (0,) * m
    vec0 = kernel.lpt_vector(loads0, ps, 0)
    consider(vec0, lambda: _lpt_schedule_from(instance, ids, (), loads0, jobs_sorted))
    stack = [(0, loads0, ())]
    status = "optimal"
    while stack:
        if limits.nodes is not None and nodes >= limits.nodes:
            status = "timeout"
            break
        if deadline is not None and nodes % _BUDGET_CHECK_INTERVAL == 0:
            if time.perf_counter() > deadline:
                status = "timeout"
                break
        level, loads, assignment = stack.pop()
        p = ps[level]
        seen: dict[int, int] = {}
        for q, load in enumerate(loads):
            if load not in seen:
                seen[load] = q
        children = [(q, loads[:q] + (load + p,) + loads[q + 1 :]) for load, q in sorted(seen.items())]
        for q, new_loads in reversed(children):
            nodes += 1
            child_assignment = assignment + (q,)
            if level + 1 == n:
                leaf_vec = tuple(sorted(new_loads, reverse=True))
                consider(
                    leaf_vec,
                    lambda ca=child_assignment: Schedule(
                        instance, {ids[j]: ca[j] + 1 for j in range(n)}
                    ),
                )
                continue
            lvec = kernel.lpt_vector(new_loads, ps, level + 1)
            consider(
                lvec,
                lambda ca=child_assignment, nl=new_loads: _lpt_schedule_from(
                    instance, ids, ca, nl, jobs_sorted
                ),
            )
            if prune_bound:
                t_desc = tuple(sorted(new_loads, reverse=True))
                lam = sum(ps[level + 1 :])
                if _waterfill_weight(t_desc, lam, base) > incumbent.weight:
                    continue
            stack.append((level + 1, new_loads, child_assignment))

    assert incumbent.vector is not None and incumbent.schedule is not None
    return SolveReport(
        incumbent.schedule, incumbent.vector, status, nodes, 0,
        tuple(Fraction(0) for _ in range(m)), elapsed_ms(),
        method="weighting",
        extras={"weight": incumbent.weight, "tie_detected": incumbent.tie_detected, "base": base},
    )


def enumerate_optimal_makespan(
    instance: Instance,
    optimal_makespan: int,
    visit: Callable[[Schedule, tuple[int, ...]], bool],
    limits: Limits | None = None,
) -> bool:
    """DFS all symmetry-reduced schedules with makespan == optimal_makespan.

    Subtrees whose lower bound on the largest completion exceeds the target
    are skipped.  `visit` returns False to stop early.  Returns True iff the
    enumeration ran to completion.
    """
    limits = limits or Limits()
    start = time.perf_counter()
    deadline = start + limits.time_s if limits.time_s is not None else None
    m = instance.m
    _, ps, ids = _sorted_jobs(instance)
    n = len(ps)
    kernel = _kernel_for_instance(instance)
    sentinel = (optimal_makespan + 1,) + (-1,) * (m - 1)

    if n == 0:
        visit(Schedule(instance, {}), (0,) * m)
        return True

    nodes = 1
    _, prune, _, _, _ = kernel.evaluate_node((0,) * m, ps, 0, sentinel, True, False)
    stack = [] if prune else [(0, (0,) * m, ())]
    while stack:
        if limits.nodes is not None and nodes >= limits.nodes:
            return False
        if deadline is not None and nodes % _BUDGET_CHECK_INTERVAL == 0:
            if time.perf_counter() > deadline:
                return False
        level, loads, assignment = stack.pop()
        p = ps[level]
        seen: dict[int, int] = {}
        for q, load in enumerate(loads):
            if load not in seen:
                seen[load] = q
        children = [(q, loads[:q] + (load + p,) + loads[q + 1 :]) for load, q in sorted(seen.items())]
        for q, new_loads in reversed(children):
            nodes += 1
            child_assignment = assignment + (q,)
            if max(new_loads) > optimal_makespan:
                continue
            if level + 1 == n:
                leaf_vec = tuple(sorted(new_loads, reverse=True))
                if leaf_vec[0] == optimal_makespan:
                    schedule = Schedule(instance, {ids[j]: child_assignment[j] + 1 for j in range(n)})
                    if not visit(schedule, leaf_vec):
                        return False
                continue
            _, prune, _, _, _ = kernel.evaluate_node(new_loads, ps, level + 1, sentinel, True, False)
            if not prune:
                stack.append((level + 1, new_loads, child_assignment))
    return True


def highest_rank_method(
    instance: Instance,
    pool_capacity: int = 2000,
    limits: Limits | None = None,
) -> SolveReport:
    """Two phases: minimize the makespan, then enumerate optimal-makespan
    schedules into a bounded pool and return its lexicographic minimum.

    When the pool is full the lex-greatest entry is evicted, so the pool
    always retains the lex-smallest schedules seen; with capacity 1 this
    degenerates to streaming replacement.  The result is flagged heuristic
    when the enumeration did not run to completion.
    """
    limits = limits or Limits()
    if pool_capacity < 1:
        raise ValueError("pool capacity must be >= 1")
    start = time.perf_counter()
    deadline = start + limits.time_s if limits.time_s is not None else None

    phase1 = solve_constrained_min(instance, 1, (), limits)
    v1 = phase1.value
    nodes = phase1.nodes

    pool: list[PoolEntry] = []
    overflowed = False

    def visit(schedule: Schedule, vec: tuple[int, ...]) -> bool:
        nonlocal overflowed
        pool.append(PoolEntry(schedule, vec))
        if len(pool) > pool_capacity:
            overflowed = True
            pool.sort(key=lambda e: (e.vector, _assignment_key(e.schedule)))
            pool.pop()
        return True

    phase2_limits = Limits(
        time_s=None if deadline is None else max(deadline - time.perf_counter(), 0.0),
        nodes=limits.nodes,
    )
    complete = phase1.status == "optimal" and enumerate_optimal_makespan(
        instance, v1, visit, phase2_limits
    )
    if not pool:
        pool.append(PoolEntry(phase1.schedule, completion_vector(phase1.schedule)))
    best = min(pool, key=lambda e: (e.vector, _assignment_key(e.schedule)))
    elapsed_ms = int((time.perf_counter() - start) * 1000)
    return SolveReport(
        best.schedule, best.vector, "optimal" if complete else "timeout", nodes, 0,
        (Fraction(v1),) + tuple(Fraction(0) for _ in range(instance.m - 1)), elapsed_ms,
        method="highest-rank",
        extras={
            "v1": v1,
            "pool_size": len(pool),
            "pool_overflowed": overflowed,
            "heuristic": not complete,
        },
    )


def _assignment_key(schedule: Schedule) -> tuple[int, ...]:
    return tuple(schedule.assignment[job.id] for job in schedule.instance.jobs)


def collect_solution_pool(
    instance: Instance,
    count: int,
    limits: Limits | None = None,
) -> tuple[list[PoolEntry], bool]:
    """Up to `count` distinct minimum-makespan schedules, LexOpt first.

    Enumeration continues past the first optimum in DFS order, so the pool
    spreads over weighted values.  Returns (entries, exhausted) where
    exhausted means every optimal-makespan schedule was seen.
    """
    from .bnb import solve_lexopt

    if count < 1:
        raise ValueError("pool size must be >= 1")
    limits = limits or Limits()
    lexopt = solve_lexopt(instance, limits)
    entries = [PoolEntry(lexopt.schedule, lexopt.vector)]
    seen = {_assignment_key(lexopt.schedule)}
    v1 = lexopt.vector[0] if lexopt.vector else 0

    def visit(schedule: Schedule, vec: tuple[int, ...]) -> bool:
        key = _assignment_key(schedule)
        if key not in seen:
            seen.add(key)
            entries.append(PoolEntry(schedule, vec))
        return len(entries) < count

    exhausted = enumerate_optimal_makespan(instance, v1, visit, limits)
    return entries, exhausted
