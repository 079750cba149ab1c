"""Bundled reference artifacts: a solved single-goal example on rigetti-8.

Two swaps pull states 3 and 4 onto the blue edge (n1, n2), where the goal's
phase-separation gate finishes at cycle 5 — the smallest possible makespan
for that goal on that chip.
"""

from __future__ import annotations

import json
from importlib import resources

from .instance import Instance, _instance_from_dict
from .schedule import Schedule, schedule_from_dict


def _load(name: str) -> dict:
    raw = resources.files("qcsched.data").joinpath(name).read_text()
    return json.loads(raw)


def worked_example() -> tuple[Instance, Schedule]:
    instance = _instance_from_dict(_load("example-instance.json"),
                                   label="worked-example")
    schedule = schedule_from_dict(_load("example-schedule.json"))
    return instance, schedule
