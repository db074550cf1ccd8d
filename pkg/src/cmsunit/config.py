"""Runtime configuration: defaults ship in constants.cfg next to the package;
a user file can be pointed to by --config or the CM_SUNIT_CONFIG variable."""

from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

ENV_VAR = "CM_SUNIT_CONFIG"


@dataclass
class Config:
    precision_margin_bits: int = 64
    factor_budget: int = 200_000
    c1: float = 1.1714
    k: float = 0.0
    grid_ratio: float = 1.3335214321633240
    grid_ceiling: float = 1e100

    def validate(self) -> None:
        for name in ("precision_margin_bits", "factor_budget", "c1", "k",
                     "grid_ratio", "grid_ceiling"):
            if getattr(self, name) < 0:
                raise ValueError(f"config value {name} must be nonnegative")
        if self.grid_ratio <= 1:
            raise ValueError("grid_ratio must exceed 1")


def _parse(text: str) -> dict[str, str]:
    out = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"bad config line: {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        out[key] = val
    return out


def load_config(path: Optional[str] = None) -> Config:
    """Config from packaged defaults, overlaid with the user file if any."""
    text = resources.files("cmsunit").joinpath("constants.cfg").read_text()
    values = _parse(text)
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path:
        values.update(_parse(Path(path).read_text()))
    cfg = Config(
        precision_margin_bits=int(values["precision_margin_bits"]),
        factor_budget=int(values["factor_budget"]),
        c1=float(values["c1"]),
        k=float(values["k"]),
        grid_ratio=float(values["grid_ratio"]),
        grid_ceiling=float(values["grid_ceiling"]),
    )
    cfg.validate()
    return cfg
