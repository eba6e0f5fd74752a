"""Exact LexOpt branch-and-bound with vectorial bounds.

Depth-first search over the job-assignment tree: jobs are pre-sorted in
nonincreasing processing-time order, the node at level l fixes machines for
the l longest jobs, and children assign the next job.  Children that would
only permute machines with equal partial loads are collapsed (identical
machines make those subtrees isomorphic).  Every expanded node runs the LPT
primal heuristic and computes interleaved per-machine lower/upper bounds; a
subtree is fathomed when the incumbent vector is lexicographically <= the
lower-bound vector.

``vectorial_lower_component`` / ``vectorial_upper_component`` are the exact
rational bound formulas (used directly by the property tests); the search
itself calls the integer kernel in ``lexsched.kernels``, which evaluates the
same formulas with outward-rounded prefix requirements.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from . import kernels
from .model import Instance, Schedule, ValidationError, lex_less, lpt

_BUDGET_CHECK_INTERVAL = 1024


@dataclass(frozen=True)
class SearchNode:
    """Partial assignment of the `level` longest jobs with partial loads."""

    level: int
    partial_assignment: tuple[int, ...]  # 0-based machine per sorted job
    partial_loads: tuple[int, ...]


@dataclass
class Limits:
    time_s: float | None = None
    nodes: int | None = None


@dataclass
class SolveReport:
    schedule: Schedule | None
    vector: tuple[int, ...]
    status: str  # "optimal" | "timeout"
    nodes: int
    leaves: int
    lower_bound: tuple[Fraction, ...]
    elapsed_ms: int
    method: str = "bnb"
    extras: dict = field(default_factory=dict)


def _sorted_jobs(instance: Instance):
    jobs = instance.sorted_desc()
    ps = tuple(job.p for job in jobs)
    ids = tuple(job.id for job in jobs)
    return jobs, ps, ids


def root_node(instance: Instance) -> SearchNode:
    return SearchNode(0, (), (0,) * instance.m)


def child_node(node: SearchNode, machine: int, p: int) -> SearchNode:
    loads = list(node.partial_loads)
    loads[machine] += p
    return SearchNode(node.level + 1, node.partial_assignment + (machine,), tuple(loads))


def symmetry_reduced_children(node: SearchNode, instance: Instance) -> list[SearchNode]:
    """One child per distinct partial load, lowest machine index representative.

    Ordered by ascending partial load of the target machine so that the
    LPT-like child comes first.
    """
    jobs, ps, _ = _sorted_jobs(instance)
    if node.level >= len(ps):
        raise ValidationError("cannot expand a leaf node")
    p = ps[node.level]
    seen: dict[int, int] = {}
    for q, load in enumerate(node.partial_loads):
        if load not in seen:
            seen[load] = q
    return [child_node(node, q, p) for load, q in sorted(seen.items())]


def vectorial_lower_component(
    node: SearchNode,
    instance: Instance,
    i: int,
    u_prefix: Sequence[Fraction | int],
) -> Fraction:
    """Exact i-th lower bound component at `node` given upper bounds U_1..U_{i-1}.

    Machine identity is irrelevant for bounding, so the node loads are taken
    in nonincreasing order.  With h the smallest index such that the longest
    unassigned jobs up to h cover the prefix requirement sum(U_q - t_q), the
    bound is the larger of min(t) + p_{h+1} and the even fill of the load
    beyond h over machines i..m (never below max(t_i..t_m)).
    """
    _, ps, _ = _sorted_jobs(instance)
    m, n, ell = instance.m, len(ps), node.level
    if not 1 <= i <= m:
        raise ValidationError(f"machine index {i} out of range 1..{m}")
    t = sorted(node.partial_loads, reverse=True)
    requirement = sum((Fraction(u) - t[q] for q, u in enumerate(u_prefix)), Fraction(0))
    if requirement <= 0:
        h = ell
    else:
        h = None
        acc = 0
        for j in range(ell, n):
            acc += ps[j]
            if acc >= requirement:
                h = j + 1
                break
        if h is None:
            h = n
    lam = sum(ps[h:])
    p_next = ps[h] if h < n else 0
    tau = t[i - 1]
    first = t[m - 1] + p_next
    spread = Fraction(sum(t[i - 1 :]) + lam, m - i + 1)
    return max(Fraction(first), Fraction(tau), spread)


def vectorial_upper_component(
    node: SearchNode,
    instance: Instance,
    i: int,
    l_prefix: Sequence[Fraction | int],
    incumbent: Sequence[int] | None = None,
) -> Fraction:
    """Exact i-th upper bound component given lower bounds L_1..L_{i-1}.

    The remaining load net of the prefix requirement is water-filled over
    the least-loaded suffix machines; the bound adds the largest unassigned
    processing time and is capped by the incumbent's i-th completion.
    """
    _, ps, _ = _sorted_jobs(instance)
    m, n, ell = instance.m, len(ps), node.level
    if not 1 <= i <= m:
        raise ValidationError(f"machine index {i} out of range 1..{m}")
    t = sorted(node.partial_loads, reverse=True)
    lam = sum(ps[ell:]) - sum((Fraction(l) - t[q] for q, l in enumerate(l_prefix)), Fraction(0))
    suffix = sorted(t[i - 1 :])  # ascending for the water fill
    mm = len(suffix)
    level = None
    for j in range(mm):
        level = Fraction(sum(suffix[: j + 1]) + lam, j + 1)
        if j == mm - 1 or level <= suffix[j + 1]:
            break
    p_rem_max = ps[ell] if ell < n else 0
    value = max(level + p_rem_max, Fraction(suffix[-1]))
    if incumbent is not None:
        value = min(value, Fraction(incumbent[i - 1]))
    return value


def fathom_test(lower: Sequence[Fraction], incumbent: Sequence[int]) -> bool:
    """True (prune) iff the incumbent vector is lexicographically <= L."""
    for c, l in zip(incumbent, lower):
        if Fraction(c) != l:
            return Fraction(c) < l
    return True


def _kernel_for_instance(instance: Instance):
    total = instance.total_time
    p_max = max((job.p for job in instance.jobs), default=0)
    return kernels.kernel_for(instance.m, total, p_max)


def _lpt_schedule_from(
    instance: Instance,
    ids: tuple[str, ...],
    assignment: tuple[int, ...],
    loads: Sequence[int],
    jobs_sorted,
) -> Schedule:
    """Complete a partial assignment with LPT (lowest-index tie break)."""
    ell = len(assignment)
    placed = {ids[j]: assignment[j] + 1 for j in range(ell)}
    extension, _ = lpt(instance, loads, jobs_sorted[ell:])
    placed.update(extension)
    return Schedule(instance, placed)


def solve_lexopt(
    instance: Instance,
    limits: Limits | None = None,
    use_bounds: bool = True,
    initial_incumbent: Sequence[int] | None = None,
    node_hook: Callable[[SearchNode], None] | None = None,
) -> SolveReport:
    """LexOpt the instance; status "optimal" unless a budget ran out.

    `initial_incumbent` seeds pruning with an externally supplied vector
    (it must be achievable or lex-greater than the optimum for the result
    to stay exact; the stale-incumbent property test relies on this).
    `node_hook` sees every evaluated node.
    """
    limits = limits or Limits()
    start = time.perf_counter()
    m = instance.m
    jobs_sorted, ps, ids = _sorted_jobs(instance)
    n = len(ps)
    kernel = _kernel_for_instance(instance)

    inc_vec: tuple[int, ...] | None = tuple(initial_incumbent) if initial_incumbent else None
    inc_schedule: Schedule | None = None
    nodes = 0
    leaves = 0
    deadline = start + limits.time_s if limits.time_s is not None else None

    def elapsed_ms() -> int:
        return int((time.perf_counter() - start) * 1000)

    root = root_node(instance)
    nodes += 1
    if node_hook:
        node_hook(root)
    if n == 0:
        vec = (0,) * m
        return SolveReport(
            Schedule(instance, {}), vec, "optimal", nodes, 1, tuple(Fraction(0) for _ in range(m)),
            elapsed_ms(),
        )

    vec, prune, lnum, lden, _ = kernel.evaluate_node(root.partial_loads, ps, 0, inc_vec, use_bounds)
    if inc_vec is None or lex_less(vec, inc_vec):
        inc_vec = vec
        inc_schedule = _lpt_schedule_from(instance, ids, (), root.partial_loads, jobs_sorted)
    # stack entries: (level, loads, assignment, lnum, lden)
    stack = []
    if not (use_bounds and prune):
        stack.append((0, root.partial_loads, (), lnum, lden))

    status = "optimal"
    open_bounds: list[tuple[tuple, tuple]] = []
    while stack:
        if limits.nodes is not None and nodes >= limits.nodes:
            status = "timeout"
            break
        if deadline is not None and nodes % _BUDGET_CHECK_INTERVAL == 0:
            if time.perf_counter() > deadline:
                status = "timeout"
                break
        level, loads, assignment, lnum, lden = stack.pop()
        # the incumbent may have improved since this node was pushed
        if use_bounds and inc_vec is not None and lnum is not None:
            if _frac_lex_prune(inc_vec, lnum, lden):
                continue
        p = ps[level]
        children = []
        seen_loads: dict[int, int] = {}
        for q, load in enumerate(loads):
            if load not in seen_loads:
                seen_loads[load] = q
        for load, q in sorted(seen_loads.items()):
            new_loads = loads[:q] + (load + p,) + loads[q + 1 :]
            children.append((q, new_loads))
        for q, new_loads in reversed(children):  # smallest-load child on top of stack
            nodes += 1
            child_assignment = assignment + (q,)
            if node_hook:
                node_hook(SearchNode(level + 1, child_assignment, new_loads))
            if level + 1 == n:
                leaves += 1
                leaf_vec = tuple(sorted(new_loads, reverse=True))
                if inc_vec is None or lex_less(leaf_vec, inc_vec):
                    inc_vec = leaf_vec
                    inc_schedule = Schedule(
                        instance, {ids[j]: child_assignment[j] + 1 for j in range(n)}
                    )
                continue
            vec, prune, lnum_c, lden_c, _ = kernel.evaluate_node(
                new_loads, ps, level + 1, inc_vec, use_bounds
            )
            if inc_vec is None or lex_less(vec, inc_vec):
                inc_vec = vec
                inc_schedule = _lpt_schedule_from(
                    instance, ids, child_assignment, new_loads, jobs_sorted
                )
            if not (use_bounds and prune):
                stack.append((level + 1, new_loads, child_assignment, lnum_c, lden_c))

    if status == "timeout":
        open_bounds = [(e[3], e[4]) for e in stack if e[3] is not None]

    assert inc_vec is not None
    lower = _global_lower_bound(inc_vec, open_bounds)
    if inc_schedule is None:
        # only possible when an initial incumbent was never improved
        status_schedule = None
    else:
        status_schedule = inc_schedule
    return SolveReport(
        status_schedule, inc_vec, status, nodes, leaves, lower, elapsed_ms()
    )


def _frac_lex_prune(inc: Sequence[int], lnum: Sequence[int], lden: Sequence[int]) -> bool:
    for k in range(len(inc)):
        lhs = inc[k] * lden[k]
        if lhs != lnum[k]:
            return lhs < lnum[k]
    return True


def _global_lower_bound(inc_vec, open_bounds) -> tuple[Fraction, ...]:
    """Lex-min of the incumbent and every open subtree's lower-bound vector."""
    best = tuple(Fraction(c) for c in inc_vec)
    for lnum, lden in open_bounds:
        cand = tuple(Fraction(a, b) for a, b in zip(lnum, lden))
        for x, y in zip(cand, best):
            if x != y:
                if x < y:
                    best = cand
                break
    return best
