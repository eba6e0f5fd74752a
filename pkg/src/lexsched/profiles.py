"""Performance profiles and recovery scatter data, emitted as CSV.

A profile curve gives, for each solver, the fraction of instances on which
its metric is within a factor x of the per-instance best (Dolan-More).
Scatter rows pair the normalized weighted value of an initial schedule with
the normalized makespan of its recovered schedule.  Rationals are exact
Fractions internally; CSV carries both a 6-significant-digit decimal and
the exact p/q form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .model import ValidationError


@dataclass(frozen=True)
class ProfilePoint:
    solver: str
    x: Fraction
    fraction: Fraction


@dataclass(frozen=True)
class ScatterRow:
    instance: str
    schedule_index: int
    strategy: str
    weight: int
    weight_norm: Fraction
    makespan: int
    makespan_norm: Fraction


def performance_profile(
    records: Iterable[tuple[str, str, Fraction | int]],
) -> list[ProfilePoint]:
    """Build profile curves from (solver, instance, metric value) records.

    Requires at least two solvers sharing at least one instance; solvers may
    miss instances (their curve then tops out below 1).  Metric values must
    be positive; the per-instance best defines ratio 1.
    """
    values: dict[str, dict[str, Fraction]] = {}
    for solver, instance, value in records:
        v = Fraction(value)
        if v <= 0:
            raise ValidationError(f"profile metric must be positive, got {value} for {solver}/{instance}")
        values.setdefault(solver, {})[instance] = v
    if len(values) < 2:
        raise ValidationError("performance profiles need at least two solvers")
    common = set.intersection(*(set(per.keys()) for per in values.values()))
    if not common:
        raise ValidationError("solvers share no instances; profile undefined")
    universe = sorted(set.union(*(set(per.keys()) for per in values.values())))
    best = {
        inst: min(per[inst] for per in values.values() if inst in per) for inst in universe
    }
    ratios = {
        solver: {inst: per[inst] / best[inst] for inst in per} for solver, per in values.items()
    }
    xs = sorted({r for per in ratios.values() for r in per.values()} | {Fraction(1)})
    denom = len(universe)
    points = []
    for solver in sorted(ratios):
        per = ratios[solver]
        for x in xs:
            count = sum(1 for r in per.values() if r <= x)
            points.append(ProfilePoint(solver, x, Fraction(count, denom)))
    return points


def normalize_scatter(
    rows: Sequence[tuple[str, int, str, int, int]],
) -> list[ScatterRow]:
    """Normalize (instance, schedule index, strategy, weight, makespan) rows.

    Per instance, weights divide by the best pool weight and makespans by
    the best recovered makespan across all strategies, so the minima land
    exactly at 1.
    """
    best_w: dict[str, int] = {}
    best_c: dict[str, int] = {}
    for instance, _, _, weight, mk in rows:
        if instance not in best_w or weight < best_w[instance]:
            best_w[instance] = weight
        if instance not in best_c or mk < best_c[instance]:
            best_c[instance] = mk
    out = []
    for instance, idx, strategy, weight, mk in rows:
        wn = Fraction(weight, best_w[instance]) if best_w[instance] else Fraction(1)
        cn = Fraction(mk, best_c[instance]) if best_c[instance] else Fraction(1)
        out.append(ScatterRow(instance, idx, strategy, weight, wn, mk, cn))
    return out


def _sig6(x: Fraction) -> str:
    return f"{float(x):.6g}"


def profile_csv(points: Sequence[ProfilePoint]) -> str:
    lines = ["solver,x,x_exact,fraction,fraction_exact"]
    for p in points:
        lines.append(f"{p.solver},{_sig6(p.x)},{p.x},{_sig6(p.fraction)},{p.fraction}")
    return "\n".join(lines) + "\n"


def scatter_csv(rows: Sequence[ScatterRow]) -> str:
    lines = ["instance,schedule,strategy,weight,weight_norm,weight_norm_exact,makespan,makespan_norm,makespan_norm_exact"]
    for r in rows:
        lines.append(
            f"{r.instance},{r.schedule_index},{r.strategy},{r.weight},"
            f"{_sig6(r.weight_norm)},{r.weight_norm},{r.makespan},"
            f"{_sig6(r.makespan_norm)},{r.makespan_norm}"
        )
    return "\n".join(lines) + "\n"


def write_text(path: str | None, text: str) -> None:
    if path is None:
        print(text, end="")
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
