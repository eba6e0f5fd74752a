"""Two-stage rescheduling under perturbations.

A recovery scenario applies an ordered list of perturbations (processing
time changes, job cancellations/arrivals, machine failures/activations) to
an initial instance with an initial schedule.  Binding recovery keeps every
surviving job on its surviving machine and LPT-places the free jobs;
flexible recovery additionally migrates up to g binding jobs, minimizing
the makespan exactly.  The uncertainty characterization counts unstable
jobs against a stability boundary f and feeds the closed-form worst-case
guarantee bound, which verify_guarantee checks against the realized ratio
in exact rational arithmetic.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .bnb import Limits
from .model import (
    InfeasibleError,
    Instance,
    Job,
    Schedule,
    ValidationError,
    lpt,
    makespan,
    validate_schedule,
)

_BUDGET_CHECK_INTERVAL = 4096

PERTURBATION_KINDS = ("reduce", "augment", "cancel", "arrive", "machine_fail", "machine_activate")


@dataclass(frozen=True)
class Perturbation:
    kind: str
    job_id: str | None = None
    p: int | None = None
    machine: int | None = None

    def __post_init__(self):
        if self.kind not in PERTURBATION_KINDS:
            raise ValidationError(f"unknown perturbation kind {self.kind!r}")


def reduce_p(job_id: str, new_p: int) -> Perturbation:
    return Perturbation("reduce", job_id=job_id, p=new_p)


def augment_p(job_id: str, new_p: int) -> Perturbation:
    return Perturbation("augment", job_id=job_id, p=new_p)


def cancel(job_id: str) -> Perturbation:
    return Perturbation("cancel", job_id=job_id)


def arrive(job_id: str, p: int) -> Perturbation:
    return Perturbation("arrive", job_id=job_id, p=p)


def machine_fail(machine: int) -> Perturbation:
    return Perturbation("machine_fail", machine=machine)


def machine_activate() -> Perturbation:
    return Perturbation("machine_activate")


@dataclass(frozen=True)
class RecoveryScenario:
    init: Instance
    init_schedule: Schedule
    perturbations: tuple[Perturbation, ...]
    new: Instance
    # surviving init machine index (1-based) -> index in the new instance
    machine_map: dict[int, int] = field(compare=False)
    failed_init_machines: frozenset[int] = frozenset()

    @property
    def new_times(self) -> dict[str, int]:
        return {job.id: job.p for job in self.new.jobs}


def apply_perturbations(
    init: Instance,
    init_schedule: Schedule,
    perturbations: Sequence[Perturbation],
) -> RecoveryScenario:
    """Materialize the perturbed instance, applying the list in order.

    Machine indices inside perturbations refer to the numbering current at
    application time; surviving machines are compacted in order.  Job
    identity is the join key between the initial and perturbed instances.
    """
    problems = validate_schedule(init_schedule)
    if init_schedule.instance is not init and init_schedule.instance != init:
        raise ValidationError("initial schedule does not belong to the initial instance")
    if problems:
        raise ValidationError("invalid initial schedule: " + "; ".join(problems))

    jobs: list[Job] = list(init.jobs)
    index = {job.id: i for i, job in enumerate(jobs)}
    # machine labels: positive = surviving init index, 0 = activated machine
    machines: list[int] = list(range(1, init.m + 1))
    failed: set[int] = set()
    activated = 0

    for pert in perturbations:
        if pert.kind in ("reduce", "augment"):
            if pert.job_id not in index:
                raise ValidationError(f"{pert.kind} references missing job {pert.job_id!r}")
            old = jobs[index[pert.job_id]].p
            new_p = pert.p
            if not isinstance(new_p, int) or new_p < 1:
                raise ValidationError(f"{pert.kind} needs a positive integer time, got {new_p!r}")
            if pert.kind == "reduce" and new_p >= old:
                raise ValidationError(f"reduce must decrease {pert.job_id!r}: {old} -> {new_p}")
            if pert.kind == "augment" and new_p <= old:
                raise ValidationError(f"augment must increase {pert.job_id!r}: {old} -> {new_p}")
            jobs[index[pert.job_id]] = Job(pert.job_id, new_p)
        elif pert.kind == "cancel":
            if pert.job_id not in index:
                raise ValidationError(f"cancel references missing job {pert.job_id!r}")
            jobs.pop(index[pert.job_id])
            index = {job.id: i for i, job in enumerate(jobs)}
        elif pert.kind == "arrive":
            if pert.job_id in index:
                raise ValidationError(f"arriving job id {pert.job_id!r} already exists")
            if not isinstance(pert.p, int) or pert.p < 1:
                raise ValidationError(f"arrival needs a positive integer time, got {pert.p!r}")
            jobs.append(Job(pert.job_id, pert.p))
            index[pert.job_id] = len(jobs) - 1
        elif pert.kind == "machine_fail":
            if pert.machine is None or not 1 <= pert.machine <= len(machines):
                raise ValidationError(f"machine_fail index {pert.machine!r} out of range 1..{len(machines)}")
            if len(machines) == 1:
                raise InfeasibleError("machine failure would leave no machines")
            label = machines.pop(pert.machine - 1)
            if label > 0:
                failed.add(label)
        elif pert.kind == "machine_activate":
            activated += 1
            machines.append(0)

    new = Instance(len(machines), tuple(jobs))
    machine_map = {label: pos + 1 for pos, label in enumerate(machines) if label > 0}
    return RecoveryScenario(
        init, init_schedule, tuple(perturbations), new, machine_map, frozenset(failed)
    )


@dataclass(frozen=True)
class DecisionSplit:
    binding: frozenset[tuple[str, int]]  # (job id, machine index in the new instance)
    free: frozenset[str]


def classify_decisions(scenario: RecoveryScenario) -> DecisionSplit:
    """Binding = surviving jobs whose initial machine survives; rest are free."""
    init_ids = set(scenario.init.job_ids())
    binding = set()
    free = set()
    for job in scenario.new.jobs:
        if job.id in init_ids:
            init_machine = scenario.init_schedule.assignment[job.id]
            if init_machine in scenario.machine_map:
                binding.add((job.id, scenario.machine_map[init_machine]))
                continue
        free.add(job.id)
    return DecisionSplit(frozenset(binding), frozenset(free))


def binding_recovery(scenario: RecoveryScenario) -> Schedule:
    """Keep all binding assignments, LPT-place the free jobs on top."""
    new = scenario.new
    split = classify_decisions(scenario)
    assignment = {job_id: machine for job_id, machine in split.binding}
    loads = [0] * new.m
    times = scenario.new_times
    for job_id, machine in split.binding:
        loads[machine - 1] += times[job_id]
    free_jobs = [job for job in new.jobs if job.id in split.free]
    free_jobs.sort(key=lambda job: -job.p)
    placed, _ = lpt(new, loads, free_jobs)
    assignment.update(placed)
    return Schedule(new, assignment)


def flexible_recovery(
    scenario: RecoveryScenario,
    g: int,
    limits: Limits | None = None,
) -> tuple[Schedule, str]:
    """Minimum makespan on the new instance with at most g binding migrations.

    Exact depth-first search: binding jobs are decided first (stay home or
    migrate while budget lasts, so loads only grow and the running maximum
    prunes soundly), free jobs afterwards with equal-load machines collapsed.
    Seeded with the binding-recovery schedule; on a budget stop the best
    schedule found so far is returned with status "timeout".
    """
    if g < 0:
        raise ValidationError("migration budget must be >= 0")
    limits = limits or Limits()
    start = time.perf_counter()
    deadline = start + limits.time_s if limits.time_s is not None else None
    new = scenario.new
    m = new.m
    split = classify_decisions(scenario)
    if m == 0:
        raise InfeasibleError("no machines in the perturbed instance")

    times = scenario.new_times
    home = {job_id: machine - 1 for job_id, machine in split.binding}
    binding_jobs = sorted(
        ((times[j], j) for j, _ in split.binding), key=lambda x: (-x[0], x[1])
    )
    free_jobs = sorted(
        ((times[j], j) for j in split.free), key=lambda x: (-x[0], x[1])
    )
    order = binding_jobs + free_jobs
    n_bind = len(binding_jobs)
    total = sum(p for p, _ in order)
    suffix_total = [0] * (len(order) + 1)
    for j in range(len(order) - 1, -1, -1):
        suffix_total[j] = suffix_total[j + 1] + order[j][0]

    seed = binding_recovery(scenario)
    best_make = makespan(seed)
    best_assign = dict(seed.assignment)
    status = "optimal"
    counter = 0

    def lower_bound(loads: list[int], j: int) -> int:
        lb = max(loads)
        lb = max(lb, -(-(sum(loads) + suffix_total[j]) // m))
        if j < len(order):
            lb = max(lb, order[j][0])
        return lb

    def record(loads: list[int], assign: dict[str, int]) -> None:
        nonlocal best_make, best_assign
        mk = max(loads) if loads else 0
        if mk < best_make:
            best_make = mk
            best_assign = dict(assign)

    def rec(j: int, loads: list[int], assign: dict[str, int], budget: int) -> bool:
        nonlocal counter, status
        counter += 1
        if limits.nodes is not None and counter >= limits.nodes:
            status = "timeout"
            return False
        if deadline is not None and counter % _BUDGET_CHECK_INTERVAL == 0:
            if time.perf_counter() > deadline:
                status = "timeout"
                return False
        if j == len(order):
            record(loads, assign)
            return True
        if lower_bound(loads, j) >= best_make:
            return True
        p, job_id = order[j]
        if j < n_bind:
            if budget == 0:
                # all remaining binding jobs are forced home
                for k in range(j, n_bind):
                    pk, jk = order[k]
                    loads[home[jk]] += pk
                    assign[jk] = home[jk] + 1
                ok = rec(n_bind, loads, assign, 0)
                for k in range(j, n_bind):
                    pk, jk = order[k]
                    loads[home[jk]] -= pk
                    del assign[jk]
                return ok
            h = home[job_id]
            for q in [h] + [q for q in range(m) if q != h]:
                cost = 0 if q == h else 1
                if cost > budget:
                    continue
                loads[q] += p
                assign[job_id] = q + 1
                ok = rec(j + 1, loads, assign, budget - cost)
                loads[q] -= p
                del assign[job_id]
                if not ok:
                    return False
        else:
            seen = set()
            for q in range(m):
                if loads[q] in seen:
                    continue
                seen.add(loads[q])
                loads[q] += p
                assign[job_id] = q + 1
                ok = rec(j + 1, loads, assign, budget)
                loads[q] -= p
                del assign[job_id]
                if not ok:
                    return False
        return True

    rec(0, [0] * m, {}, g)
    return Schedule(new, best_assign), status


@dataclass(frozen=True)
class UncertaintyCharacterization:
    boundary: Fraction
    k: int
    k_reduce: int
    k_augment: int
    f_reduce: Fraction
    f_augment: Fraction
    delta: int
    delta_plus: int
    max_new_time: int
    k_exceeds_machines: bool


def characterize_uncertainty(scenario: RecoveryScenario, boundary: Fraction | int) -> UncertaintyCharacterization:
    """Count unstable jobs against the stability boundary f.

    A surviving job is stable when p/f <= p_new <= f*p.  Cancellations count
    as unstable reductions (factor -> infinity) and arrivals as unstable
    augmentations.  Per-type boundary factors are f when the type occurred
    at all and 1 (neutral) otherwise.
    """
    f = Fraction(boundary)
    if f <= 1:
        raise ValidationError(f"stability boundary must be > 1, got {f}")
    init_times = {job.id: job.p for job in scenario.init.jobs}
    new_times = scenario.new_times
    k_reduce = 0
    k_augment = 0
    any_reduce = False
    any_augment = False
    for job_id, p_init in init_times.items():
        if job_id not in new_times:
            any_reduce = True  # cancellation behaves like a reduction to zero
            k_reduce += 1
            continue
        p_new = new_times[job_id]
        if p_new == p_init:
            continue
        ratio = Fraction(max(p_new, p_init), min(p_new, p_init))
        if p_new < p_init:
            any_reduce = True
            if ratio > f:
                k_reduce += 1
        else:
            any_augment = True
            if ratio > f:
                k_augment += 1
    for job_id in new_times:
        if job_id not in init_times:
            any_augment = True  # arrivals are treated like augmentations
            k_augment += 1
    delta = scenario.new.m - scenario.init.m
    k = k_reduce + k_augment
    return UncertaintyCharacterization(
        boundary=f,
        k=k,
        k_reduce=k_reduce,
        k_augment=k_augment,
        f_reduce=f if any_reduce else Fraction(1),
        f_augment=f if any_augment else Fraction(1),
        delta=delta,
        delta_plus=max(delta, 0),
        max_new_time=max(new_times.values(), default=0),
        k_exceeds_machines=k >= scenario.init.m,
    )


@dataclass(frozen=True)
class GuaranteeReport:
    type1: Fraction  # cancellations / reductions: 2 f_r (1 + ceil(k_r/(m-k_r)))
    type2: Fraction  # augmentations: f_a + k_a
    type3: Fraction  # machine activations: 1 + ceil(delta+/m)
    type4: Fraction  # arrivals / failures: max(2, product of types 1-3)
    product: Fraction


def guarantee_bound(ch: UncertaintyCharacterization, m: int) -> GuaranteeReport:
    """Worst-case recovered/optimal ratio bound for the characterization."""
    if ch.k_reduce >= m:
        raise ValidationError(
            f"bound undefined: {ch.k_reduce} unstable reductions on {m} machines"
        )
    type1 = 2 * ch.f_reduce * (1 + math.ceil(Fraction(ch.k_reduce, m - ch.k_reduce)))
    type2 = ch.f_augment + ch.k_augment
    type3 = Fraction(1 + math.ceil(Fraction(ch.delta_plus, m)))
    rho = type1 * type2 * type3
    type4 = max(Fraction(2), rho)
    return GuaranteeReport(type1, type2, type3, type4, rho)


def tightest_boundary(scenario: RecoveryScenario, max_unstable: int) -> Fraction:
    """Smallest boundary f leaving at most `max_unstable` jobs unstable.

    Cancellations and arrivals are unstable for every f; if they alone
    exceed the budget this raises.  When every remaining deviation may be
    stable the boundary degenerates, and a value just above 1 is returned.
    """
    init_times = {job.id: job.p for job in scenario.init.jobs}
    new_times = scenario.new_times
    forced = sum(1 for j in init_times if j not in new_times)
    forced += sum(1 for j in new_times if j not in init_times)
    if forced > max_unstable:
        raise ValidationError(
            f"{forced} cancellations/arrivals exceed the unstable budget {max_unstable}"
        )
    ratios = []
    for job_id, p_init in init_times.items():
        p_new = new_times.get(job_id)
        if p_new is not None and p_new != p_init:
            ratios.append(Fraction(max(p_new, p_init), min(p_new, p_init)))
    ratios.sort(reverse=True)
    skip = max_unstable - forced
    rest = ratios[skip:]
    if rest and rest[0] > 1:
        return rest[0]
    return Fraction(101, 100)


@dataclass(frozen=True)
class GuaranteeCheck:
    ratio: Fraction | None
    bound: Fraction
    holds: bool
    degenerate: bool
    characterization: UncertaintyCharacterization


def verify_guarantee(
    scenario: RecoveryScenario,
    recovered: Schedule,
    optimal_makespan: int,
    boundary: Fraction | int | None = None,
) -> GuaranteeCheck:
    """Check recovered/optimal against the closed-form bound, exactly.

    `optimal_makespan` must come from a brute force or converged exact
    solve.  Without an explicit boundary the tightest one keeping the
    unstable count below the initial machine count is used.
    """
    if boundary is None:
        boundary = tightest_boundary(scenario, max_unstable=scenario.init.m - 1)
    ch = characterize_uncertainty(scenario, boundary)
    bound = guarantee_bound(ch, scenario.init.m).product
    rec_make = makespan(recovered)
    if optimal_makespan == 0:
        if rec_make == 0:
            return GuaranteeCheck(Fraction(1), bound, Fraction(1) <= bound, False, ch)
        return GuaranteeCheck(None, bound, False, True, ch)
    ratio = Fraction(rec_make, optimal_makespan)
    return GuaranteeCheck(ratio, bound, ratio <= bound, False, ch)
