"""Core domain types and operations for lexicographic makespan scheduling.

An instance is a machine count plus a list of jobs with positive integer
processing times.  A schedule assigns every job to one machine (1-based
index).  Completion vectors are plain tuples of machine loads sorted
nonincreasingly; all comparisons are exact integer arithmetic, there is no
floating tolerance anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence


class LexSchedError(Exception):
    """Base class for library errors."""


class ValidationError(LexSchedError):
    """Malformed input: broken invariants, unknown references, bad JSON."""


class SizeLimitError(LexSchedError):
    """An exhaustive computation would exceed its configured cap."""


class InfeasibleError(LexSchedError):
    """No feasible schedule exists (e.g. jobs present but no machines)."""


DEFAULT_ENUMERATION_CAP = 10**7


@dataclass(frozen=True)
class Job:
    id: str
    p: int


@dataclass(frozen=True)
class Instance:
    """m identical machines plus an ordered list of jobs.

    Invariants: m >= 1, every p >= 1 and integer, job ids pairwise distinct.
    n = 0 is legal (empty job list).
    """

    m: int
    jobs: tuple[Job, ...]

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise ValidationError(f"machine count must be a positive integer, got {self.m!r}")
        jobs = tuple(self.jobs)
        object.__setattr__(self, "jobs", jobs)
        seen = set()
        for job in jobs:
            if not isinstance(job.p, int) or isinstance(job.p, bool) or job.p < 1:
                raise ValidationError(f"processing time of {job.id!r} must be a positive integer, got {job.p!r}")
            if job.id in seen:
                raise ValidationError(f"duplicate job id {job.id!r}")
            seen.add(job.id)

    @classmethod
    def from_times(cls, m: int, times: Iterable[int], prefix: str = "J") -> "Instance":
        return cls(m, tuple(Job(f"{prefix}{i + 1}", int(p)) for i, p in enumerate(times)))

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def total_time(self) -> int:
        return sum(job.p for job in self.jobs)

    def p_of(self, job_id: str) -> int:
        for job in self.jobs:
            if job.id == job_id:
                return job.p
        raise ValidationError(f"unknown job id {job_id!r}")

    def job_ids(self) -> tuple[str, ...]:
        return tuple(job.id for job in self.jobs)

    def sorted_desc(self) -> tuple[Job, ...]:
        """Jobs in nonincreasing processing-time order (stable on ties)."""
        return tuple(sorted(self.jobs, key=lambda job: -job.p))


@dataclass(frozen=True)
class Schedule:
    """Assignment of every instance job to a machine index in {1..m}."""

    instance: Instance
    assignment: dict[str, int] = field(compare=False)

    def loads(self) -> list[int]:
        loads = [0] * self.instance.m
        for job in self.instance.jobs:
            loads[self.assignment[job.id] - 1] += job.p
        return loads

    def jobs_on(self, machine: int) -> list[Job]:
        return [job for job in self.instance.jobs if self.assignment[job.id] == machine]


def lex_compare(a: Sequence[int], b: Sequence[int]) -> int:
    """Compare equal-length completion vectors: -1 if a < b, 0 equal, 1 if a > b.

    The first differing component decides, so this is a total order.
    """
    if len(a) != len(b):
        raise ValidationError(f"cannot lex-compare vectors of lengths {len(a)} and {len(b)}")
    for x, y in zip(a, b):
        if x != y:
            return -1 if x < y else 1
    return 0


def lex_less(a: Sequence[int], b: Sequence[int]) -> bool:
    return lex_compare(a, b) < 0


def completion_vector(schedule: Schedule) -> tuple[int, ...]:
    """Machine loads sorted nonincreasingly; entries sum to the total work."""
    return tuple(sorted(schedule.loads(), reverse=True))


def makespan(schedule: Schedule) -> int:
    vec = completion_vector(schedule)
    return vec[0] if vec else 0


def weighted_value(vector: Sequence[int], base: int = 2) -> int:
    """Sum of base**(m-i) * c_i; Python integers make this overflow-free."""
    if base < 2:
        raise ValidationError(f"weighting base must be >= 2, got {base}")
    m = len(vector)
    return sum(base ** (m - i) * c for i, c in enumerate(vector, start=1))


def lpt(
    instance: Instance,
    initial_loads: Sequence[int],
    remaining: Sequence[Job],
) -> tuple[dict[str, int], tuple[int, ...]]:
    """Longest-processing-time placement of `remaining` onto partial loads.

    `remaining` must already be sorted nonincreasingly by p.  Each job goes
    to a currently least-loaded machine, ties to the lowest machine index.
    Returns the placement (job id -> 1-based machine) and the resulting
    completion vector.
    """
    m = instance.m
    if len(initial_loads) != m:
        raise ValidationError(f"expected {m} initial loads, got {len(initial_loads)}")
    loads = list(initial_loads)
    placed: dict[str, int] = {}
    for job in remaining:
        target = min(range(m), key=lambda q: (loads[q], q))
        loads[target] += job.p
        placed[job.id] = target + 1
    return placed, tuple(sorted(loads, reverse=True))


def validate_schedule(schedule: Schedule) -> list[str]:
    """Empty list iff all Schedule invariants hold, else human-readable violations."""
    violations = []
    instance = schedule.instance
    ids = set(instance.job_ids())
    for job_id, machine in schedule.assignment.items():
        if job_id not in ids:
            violations.append(f"assignment references unknown job {job_id!r}")
        elif not isinstance(machine, int) or machine < 1 or machine > instance.m:
            violations.append(f"job {job_id!r} assigned to out-of-range machine {machine!r}")
    for job_id in sorted(ids - set(schedule.assignment)):
        violations.append(f"job {job_id!r} is not assigned to any machine")
    return violations


def brute_force_lexopt(instance: Instance, cap: int = DEFAULT_ENUMERATION_CAP) -> Schedule:
    """Reference LexOpt oracle: enumerate all m**n assignments.

    Lex-equal optima are tie-broken by the lexicographically smallest
    assignment map (machine indices in job-list order).  Refuses instances
    with m**n above the cap.
    """
    m, n = instance.m, instance.n
    if m**n > cap:
        raise SizeLimitError(f"brute force would enumerate {m}**{n} > {cap} assignments")
    ids = instance.job_ids()
    ps = [job.p for job in instance.jobs]
    best_vec: tuple[int, ...] | None = None
    best_assign: tuple[int, ...] | None = None
    for assign in product(range(m), repeat=n):
        loads = [0] * m
        for q, p in zip(assign, ps):
            loads[q] += p
        vec = tuple(sorted(loads, reverse=True))
        if best_vec is None or lex_less(vec, best_vec):
            best_vec = vec
            best_assign = assign
    assert best_assign is not None or n == 0
    if n == 0:
        return Schedule(instance, {})
    return Schedule(instance, {job_id: q + 1 for job_id, q in zip(ids, best_assign)})


def brute_force_makespan(instance: Instance) -> int:
    """Minimum makespan by exhaustive search with duplicate-state collapsing.

    Independent of the branch-and-bound path: plain DFS over canonical
    (sorted) load multisets, no bounding.
    """
    if instance.n == 0:
        return 0
    if instance.m == 1:
        return instance.total_time
    ps = sorted((job.p for job in instance.jobs), reverse=True)
    m = instance.m
    n = len(ps)
    memo: dict[tuple[int, tuple[int, ...]], int] = {}

    def rec(j: int, loads: tuple[int, ...]) -> int:
        if j == n:
            return loads[-1]
        key = (j, loads)
        hit = memo.get(key)
        if hit is not None:
            return hit
        p = ps[j]
        best = None
        prev = None
        for q in range(m):
            if loads[q] == prev:
                continue
            prev = loads[q]
            child = tuple(sorted(loads[:q] + (loads[q] + p,) + loads[q + 1 :]))
            value = rec(j + 1, child)
            if best is None or value < best:
                best = value
        memo[key] = best
        return best

    return rec(0, (0,) * m)
