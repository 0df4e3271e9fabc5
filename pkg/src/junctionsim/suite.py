"""The built-in fifteen-scenario comparison suite.

Scenarios live in ``data/builtin_suite.yaml`` inside the package; the file
header explains how the arrival distributions were chosen.
"""

from __future__ import annotations

from importlib import resources

import yaml

from .scenario import ScenarioConfig, scenario_from_dict

SUITE_RESOURCE = "builtin_suite.yaml"


def load_suite_document() -> dict:
    text = resources.files("junctionsim").joinpath("data", SUITE_RESOURCE).read_text(encoding="utf-8")
    return yaml.safe_load(text)


def scenario_suite_paper() -> list[ScenarioConfig]:
    doc = load_suite_document()
    defaults = doc.get("defaults", {})
    return [scenario_from_dict({**defaults, **entry}) for entry in doc["scenarios"]]
