"""Frozen regression constants shipped with the package."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=1)
def load_constants() -> dict:
    text = resources.files(__package__).joinpath("constants.json").read_text()
    return json.loads(text)


def constant(name: str) -> float:
    return float(load_constants()["constants"][name]["value"])
