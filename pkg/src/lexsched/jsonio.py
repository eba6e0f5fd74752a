"""JSON wire formats: instances, schedules, scenarios, solve and recovery reports.

Integers stay integers and rationals are "p/q" strings, so every round trip
is bit-exact.  Schedule files may reference their instance by relative path
or embed it inline; scenario files embed everything.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
from typing import Any

from .bnb import SolveReport
from .model import Instance, Job, Schedule, ValidationError
from .recovery import Perturbation, RecoveryScenario, apply_perturbations


def frac_str(x: Fraction | int) -> str:
    return str(Fraction(x))


def parse_frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad rational {s!r}: {exc}") from exc


def instance_to_obj(instance: Instance) -> dict:
    return {"m": instance.m, "jobs": [{"id": job.id, "p": job.p} for job in instance.jobs]}


def instance_from_obj(obj: Any) -> Instance:
    if not isinstance(obj, dict) or "m" not in obj or "jobs" not in obj:
        raise ValidationError('instance JSON needs {"m": int, "jobs": [...]}')
    jobs = []
    for entry in obj["jobs"]:
        if not isinstance(entry, dict) or "id" not in entry or "p" not in entry:
            raise ValidationError('each job needs {"id": str, "p": int}')
        if not isinstance(entry["p"], int):
            raise ValidationError(f"processing time of {entry['id']!r} must be an integer")
        jobs.append(Job(str(entry["id"]), entry["p"]))
    return Instance(obj["m"], tuple(jobs))


def schedule_to_obj(schedule: Schedule, instance_ref: str | None = None) -> dict:
    ref: Any = instance_ref if instance_ref is not None else instance_to_obj(schedule.instance)
    return {"instance": ref, "assignment": dict(schedule.assignment)}


def schedule_from_obj(obj: Any, base_dir: str = ".", instance: Instance | None = None) -> Schedule:
    if not isinstance(obj, dict) or "assignment" not in obj:
        raise ValidationError('schedule JSON needs {"instance": ..., "assignment": {...}}')
    ref = obj.get("instance")
    if instance is None:
        if isinstance(ref, str):
            instance = load_instance(os.path.join(base_dir, ref))
        elif isinstance(ref, dict):
            instance = instance_from_obj(ref)
        else:
            raise ValidationError("schedule JSON needs an instance (path or inline)")
    assignment = {}
    for job_id, machine in obj["assignment"].items():
        if not isinstance(machine, int):
            raise ValidationError(f"machine index for {job_id!r} must be an integer")
        assignment[str(job_id)] = machine
    return Schedule(instance, assignment)


def perturbation_to_obj(pert: Perturbation) -> dict:
    obj: dict[str, Any] = {"kind": pert.kind}
    if pert.job_id is not None:
        obj["job"] = pert.job_id
    if pert.p is not None:
        obj["p"] = pert.p
    if pert.machine is not None:
        obj["machine"] = pert.machine
    return obj


def perturbation_from_obj(obj: Any) -> Perturbation:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValidationError('perturbation JSON needs {"kind": ...}')
    return Perturbation(
        obj["kind"],
        job_id=str(obj["job"]) if "job" in obj else None,
        p=obj.get("p"),
        machine=obj.get("machine"),
    )


def scenario_to_obj(scenario: RecoveryScenario) -> dict:
    return {
        "init": instance_to_obj(scenario.init),
        "init_schedule": {"assignment": dict(scenario.init_schedule.assignment)},
        "perturbations": [perturbation_to_obj(p) for p in scenario.perturbations],
    }


def scenario_from_obj(obj: Any, base_dir: str = ".") -> RecoveryScenario:
    if not isinstance(obj, dict) or "init" not in obj or "perturbations" not in obj:
        raise ValidationError('scenario JSON needs {"init", "init_schedule", "perturbations"}')
    init = instance_from_obj(obj["init"])
    schedule = schedule_from_obj(obj.get("init_schedule", {}), base_dir, instance=init)
    perturbations = [perturbation_from_obj(p) for p in obj["perturbations"]]
    return apply_perturbations(init, schedule, perturbations)


def solve_report_to_obj(report: SolveReport, instance_path: str | None = None) -> dict:
    obj = {
        "status": report.status,
        "vector": list(report.vector),
        "assignment": dict(report.schedule.assignment) if report.schedule else None,
        "nodes": report.nodes,
        "lower_bound": [frac_str(x) for x in report.lower_bound],
        "elapsed_ms": report.elapsed_ms,
        "method": report.method,
    }
    if instance_path is not None:
        obj["instance"] = instance_path
    if report.extras:
        obj["extras"] = _jsonable(report.extras)
    return obj


def _jsonable(value):
    if isinstance(value, Fraction):
        return frac_str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from exc


def dump_json(obj: Any, path: str | None) -> str:
    text = json.dumps(obj, indent=2) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return text


def load_instance(path: str) -> Instance:
    return instance_from_obj(_load_json(path))


def load_schedule(path: str) -> Schedule:
    return schedule_from_obj(_load_json(path), base_dir=os.path.dirname(path) or ".")


def load_scenario(path: str) -> RecoveryScenario:
    return scenario_from_obj(_load_json(path), base_dir=os.path.dirname(path) or ".")
