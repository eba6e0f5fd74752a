"""Seeded benchmark-instance, perturbation, and fixture generation.

Everything is driven by a pinned 64-bit splitmix generator so equal
(spec, seed) pairs give byte-identical output on every platform; Python's
own RNG is never used.  Degenerate instances put the processing-time seed
q = 2**floor(kappa(m) * n) at the phase-transition density
kappa(m) = log2(m)/(m-1); the exponent is computed in exact integer
arithmetic, never through floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import Instance, Job, Schedule, SizeLimitError, ValidationError
from .recovery import (
    Perturbation,
    RecoveryScenario,
    apply_perturbations,
    arrive,
    augment_p,
    cancel,
    machine_activate,
    machine_fail,
    reduce_p,
)

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Pinned, portable PRNG; supports derived child streams."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _mix(self._state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection; exact, no modulo bias."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = ((1 << 64) // n) * n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        return lo + self.below(hi - lo + 1)

    def unit(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def gauss(self, mu: float, sigma: float) -> float:
        u1 = 1.0 - self.unit()  # (0, 1]: keeps log defined
        u2 = self.unit()
        return mu + sigma * math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def derive(self, index: int) -> "SplitMix64":
        return SplitMix64(_mix(self._state ^ ((index + 1) * _GOLDEN)))


DISTRIBUTIONS = ("uniform", "normal", "symmetric-normal")


@dataclass(frozen=True)
class GenSpec:
    kind: str  # "wellformed" | "degenerate"
    m: int
    n: int
    q: int | None  # supplied for wellformed, computed for degenerate
    dist: str
    seed: int

    def __post_init__(self):
        if self.kind not in ("wellformed", "degenerate"):
            raise ValidationError(f"unknown instance kind {self.kind!r}")
        if self.dist not in DISTRIBUTIONS:
            raise ValidationError(f"unknown distribution {self.dist!r}; have {DISTRIBUTIONS}")
        if self.kind == "degenerate" and self.q is not None:
            raise ValidationError("degenerate instances compute q; do not supply it")
        if self.kind == "wellformed" and (self.q is None or self.q < 1):
            raise ValidationError("wellformed instances need q >= 1")


def _sample_time(rng: SplitMix64, dist: str, q: int) -> int:
    if dist == "uniform":
        return 1 + rng.below(q)
    x = rng.gauss(q, q / 3.0)
    # clamp to [0, 2q] first, reflect for the symmetric variant, then round
    # half-up; zero rounds up to one because processing times are positive
    if x < 0.0:
        x = 0.0
    elif x > 2.0 * q:
        x = 2.0 * q
    if dist == "symmetric-normal":
        x = q - x if x <= q else 3 * q - x
    p = math.floor(x + 0.5)
    return max(p, 1)


def gen_wellformed(spec: GenSpec) -> Instance:
    """n integer processing times from the q-parameterized distribution."""
    if spec.kind != "wellformed":
        raise ValidationError("gen_wellformed needs a wellformed spec")
    rng = SplitMix64(spec.seed)
    jobs = tuple(
        Job(f"J{j + 1}", _sample_time(rng, spec.dist, spec.q)) for j in range(spec.n)
    )
    return Instance(spec.m, jobs)


def degenerate_exponent(m: int, n: int) -> int:
    """floor(n * log2(m) / (m-1)) via exact integer comparison 2**(e(m-1)) <= m**n."""
    if m < 2:
        raise ValidationError("degenerate instances need m >= 2")
    if n < 1:
        raise ValidationError("degenerate instances need n >= 1")
    target = m**n
    e = 0
    while (1 << ((e + 1) * (m - 1))) <= target:
        e += 1
    return e


def gen_degenerate(m: int, n: int, dist: str, seed: int, max_exponent: int = 31) -> Instance:
    """Phase-transition instance with q = 2**floor(kappa(m) * n)."""
    e = degenerate_exponent(m, n)
    if e > max_exponent:
        raise SizeLimitError(f"degenerate exponent {e} exceeds the cap {max_exponent}")
    spec = GenSpec("wellformed", m, n, 1 << e, dist, seed)
    return gen_wellformed(spec)


@dataclass(frozen=True)
class PerturbSpec:
    seed: int
    d_n: int | None = None  # defaults to ceil(0.2 n)
    d_m: int | None = None  # defaults to ceil(0.2 m)
    q: int | None = None  # defaults to the max processing time

    def __post_init__(self):
        for name, v in (("d_n", self.d_n), ("d_m", self.d_m)):
            if v is not None and v < 0:
                raise ValidationError(f"{name} must be >= 0, got {v}")


def default_job_disturbances(n: int) -> int:
    return -(-n // 5)  # ceil(0.2 n), exactly


def default_machine_disturbances(m: int) -> int:
    return -(-m // 5)


def gen_perturbations(instance: Instance, spec: PerturbSpec) -> tuple[Perturbation, ...]:
    """d_n job and d_m machine perturbations, reproducible from the seed.

    Job kinds are uniform over arrival/cancellation/augmentation/reduction;
    an invalid draw (no reducible job, augmentation already at 2q, no job to
    cancel) resamples the kind.  Machine failures that would leave no
    machine resample as well.  One derived stream per perturbation index.
    """
    root = SplitMix64(spec.seed)
    d_n = spec.d_n if spec.d_n is not None else default_job_disturbances(instance.n)
    d_m = spec.d_m if spec.d_m is not None else default_machine_disturbances(instance.m)
    q = spec.q if spec.q is not None else max((job.p for job in instance.jobs), default=1)

    jobs: list[Job] = list(instance.jobs)
    m_cur = instance.m
    perturbations: list[Perturbation] = []
    arrivals = 0

    for idx in range(d_n):
        rng = root.derive(idx)
        while True:
            kind = rng.below(4)
            if kind == 0:  # arrival
                arrivals += 1
                pert = arrive(f"A{arrivals}", 1 + rng.below(q))
                jobs.append(Job(pert.job_id, pert.p))
                break
            if kind == 1:  # cancellation
                if not jobs:
                    continue
                victim = jobs[rng.below(len(jobs))]
                pert = cancel(victim.id)
                jobs.remove(victim)
                break
            if kind == 2:  # augmentation, uniform on {p+1 .. 2q}
                eligible = [j for j in jobs if j.p < 2 * q]
                if not eligible:
                    continue
                target = eligible[rng.below(len(eligible))]
                new_p = rng.randint(target.p + 1, 2 * q)
                pert = augment_p(target.id, new_p)
                jobs[jobs.index(target)] = Job(target.id, new_p)
                break
            # reduction, uniform on {1 .. p-1}
            eligible = [j for j in jobs if j.p >= 2]
            if not eligible:
                continue
            target = eligible[rng.below(len(eligible))]
            new_p = 1 + rng.below(target.p - 1)
            pert = reduce_p(target.id, new_p)
            jobs[jobs.index(target)] = Job(target.id, new_p)
            break
        perturbations.append(pert)

    for idx in range(d_m):
        rng = root.derive(d_n + idx)
        while True:
            kind = rng.below(2)
            if kind == 0:
                perturbations.append(machine_activate())
                m_cur += 1
                break
            if m_cur <= 1:
                continue  # failing the last machine is rejected
            perturbations.append(machine_fail(1 + rng.below(m_cur)))
            m_cur -= 1
            break

    return tuple(perturbations)


FIXTURE_FAMILIES = ("theorem2", "single-tight", "fig5", "augment-tight", "activate-tight")


@dataclass(frozen=True)
class Fixture:
    """Adversarial scenario with its closed-form reference values."""

    scenario: RecoveryScenario
    recovered_makespan: int
    optimal_makespan: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.recovered_makespan, self.optimal_makespan)


def gen_fixture(family: str, **params) -> Fixture:
    """Construct a proof-derived recovery family with known exact ratio.

    theorem2(m, k, p):      arbitrary-optimum initial schedule, one
                            cancellation, binding ratio exactly m.
    single-tight(m, p):     LexOpt initial schedule, one cancellation,
                            ratio exactly 2.
    fig5(m, f, k):          reductions + cancellations, ratio
                            m*f / (f + m - k - 1).
    augment-tight(m, F, f, k) with F = f + m: augmentations only, ratio
                            (k*F + (m-k)*f) / (f + m + k).
    activate-tight(m, k):   k machine activations, ratio (m+k)/m.
    """
    builders = {
        "theorem2": _fixture_theorem2,
        "single-tight": _fixture_single_tight,
        "fig5": _fixture_fig5,
        "augment-tight": _fixture_augment_tight,
        "activate-tight": _fixture_activate_tight,
    }
    if family not in builders:
        raise ValidationError(f"unknown fixture family {family!r}; have {FIXTURE_FAMILIES}")
    return builders[family](**params)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


def _fixture_theorem2(m: int, k: int = 1, p: int = 1) -> Fixture:
    _require(m >= 2 and k >= 1 and p >= 1, "theorem2 needs m >= 2, k >= 1, p >= 1")
    n = k * m
    small = [Job(f"J{j + 1}", p) for j in range(n)]
    big = Job("Jbig", n * p)
    init = Instance(m, tuple(small + [big]))
    assignment = {job.id: 1 for job in small}
    assignment[big.id] = 2
    schedule = Schedule(init, assignment)
    scenario = apply_perturbations(init, schedule, [cancel(big.id)])
    return Fixture(scenario, recovered_makespan=n * p, optimal_makespan=k * p)


def _fixture_single_tight(m: int, p: int = 1) -> Fixture:
    _require(m >= 2 and p >= 1, "single-tight needs m >= 2, p >= 1")
    jobs = tuple(Job(f"J{j + 1}", p) for j in range(m + 1))
    init = Instance(m, jobs)
    assignment = {"J1": 1, "J2": 1}
    for i in range(2, m + 1):
        assignment[f"J{i + 1}"] = i
    schedule = Schedule(init, assignment)
    scenario = apply_perturbations(init, schedule, [cancel(f"J{m + 1}")])
    return Fixture(scenario, recovered_makespan=2 * p, optimal_makespan=p)


def _fixture_fig5(m: int, f: int, k: int) -> Fixture:
    _require(f >= 2 and 1 <= k <= m - 2, "fig5 needs f >= 2 and 1 <= k <= m - 2")
    jobs = []
    assignment = {}
    jid = 0
    for machine in range(1, m - k + 1):  # m jobs of length f on each
        for _ in range(m):
            jid += 1
            jobs.append(Job(f"J{jid}", f))
            assignment[f"J{jid}"] = machine
    big_ids = []
    for machine in range(m - k + 1, m + 1):
        jid += 1
        jobs.append(Job(f"J{jid}", m * f))
        assignment[f"J{jid}"] = machine
        big_ids.append(f"J{jid}")
    init = Instance(m, tuple(jobs))
    schedule = Schedule(init, assignment)
    perturbations = [
        reduce_p(job_id, 1)
        for job_id, machine in assignment.items()
        if 2 <= machine <= m - k
    ]
    perturbations += [cancel(job_id) for job_id in big_ids]
    scenario = apply_perturbations(init, schedule, perturbations)
    return Fixture(scenario, recovered_makespan=m * f, optimal_makespan=f + m - k - 1)


def _fixture_augment_tight(m: int, F: int, f: int, k: int) -> Fixture:
    _require(1 <= k < m and 1 < f < F, "augment-tight needs 1 <= k < m and 1 < f < F")
    _require(F == f + m, "augment-tight needs F = f + m for the closed form")
    jobs = tuple(Job(f"J{j + 1}", 1) for j in range(m * m))
    init = Instance(m, jobs)
    assignment = {f"J{j + 1}": (j % m) + 1 for j in range(m * m)}
    schedule = Schedule(init, assignment)
    on_m1 = [job_id for job_id, machine in assignment.items() if machine == 1]
    perturbations = [augment_p(job_id, F) for job_id in on_m1[:k]]
    perturbations += [augment_p(job_id, f) for job_id in on_m1[k:]]
    scenario = apply_perturbations(init, schedule, perturbations)
    return Fixture(
        scenario,
        recovered_makespan=k * F + (m - k) * f,
        optimal_makespan=f + m + k,
    )


def _fixture_activate_tight(m: int, k: int) -> Fixture:
    _require(m >= 1 and k >= 1, "activate-tight needs m >= 1 and k >= 1")
    jobs = tuple(Job(f"J{j + 1}", 1) for j in range(m * (m + k)))
    init = Instance(m, jobs)
    assignment = {f"J{j + 1}": (j % m) + 1 for j in range(m * (m + k))}
    schedule = Schedule(init, assignment)
    scenario = apply_perturbations(init, schedule, [machine_activate() for _ in range(k)])
    return Fixture(scenario, recovered_makespan=m + k, optimal_makespan=m)
