"""Python bindings for the what-if engine (offline translator only)."""

import json

from ._core import WhatIfError, canonical, catalog, drift_report, format_money
from ._core import Workspace as _Workspace

__all__ = ["Workspace", "WhatIfError", "canonical", "catalog", "drift_report", "format_money"]


class Workspace:
    """A dataset directory with its baseline plan, answering questions offline."""

    def __init__(self, dataset_dir, example_bank=None):
        self._ws = _Workspace(str(dataset_dir), None if example_bank is None else str(example_bank))

    @property
    def fingerprint(self):
        return self._ws.fingerprint()

    def baseline(self):
        return json.loads(self._ws.baseline_json())

    def ask(self, question):
        return json.loads(self._ws.ask_json(question))

    def scenario(self, dsl):
        return json.loads(self._ws.scenario_json(dsl))

    def evaluate(self, bank, supported_only=False, evaluations=0):
        return json.loads(self._ws.evaluate_json(str(bank), supported_only, evaluations))

    def validate(self):
        return [json.loads(i) for i in self._ws.validate_json()]
