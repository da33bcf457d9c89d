"""Exact parameter counts against the rounded values printed for each configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .scenarios import SENSORS, _budget_models, shallow_models


def k_format(n: int) -> str:
    """Thousands, truncated: 268,836 -> '268K'; below 10,000 one decimal: 5,771 -> '5.7K'."""
    if n >= 10_000:
        return f"{n // 1000}K"
    return f"{math.floor(n / 100) / 10:.1f}K"


@dataclass(frozen=True)
class ParamRow:
    config: str
    model: str
    exact: int | None
    printed: str
    note: str = ""

    @property
    def formatted(self) -> str:
        return k_format(self.exact) if self.exact is not None else "-"

    @property
    def match(self) -> bool | None:
        if self.exact is None:
            return None
        return self.formatted == self.printed


# second listing of the same configurations, with the other baselines
_COMPARE_TABLE = {
    "advection": {"DeepONet": "274K", "Shift": "281K", "Flex": "282K", "NOMAD": "270K", "Hyper": "268K"},
    "burgers": {"DeepONet": "115K", "Shift": "122K", "Flex": "122K", "NOMAD": "117K", "Hyper": "114K"},
    "shallow": {"DeepONet": "107K", "Shift": "111K", "NOMAD": "117K", "Hyper": "101K"},
    "shallow-small": {"DeepONet": "6.5K", "Shift": "8.5K", "NOMAD": "6.4K", "Hyper": "5.6K"},
}


def _models(config: str):
    if config in ("advection", "burgers"):
        return _budget_models(config), SENSORS[config], 1
    return shallow_models(config == "shallow-small"), SENSORS["shallow"], 3


def param_table() -> list[ParamRow]:
    rows = []
    for config in ("advection", "burgers", "shallow", "shallow-small"):
        models, m, d_y = _models(config)
        exact = {}
        for spec in models:
            exact[spec.label] = spec.build(m, d_y).n_params()
            note = ""
            if spec.label == "c-Hyper":
                note = f"chunk size {spec.chunk[0]}, latent width {spec.chunk[1]}"
            rows.append(ParamRow(config, spec.label, exact[spec.label], spec.printed_params, note))
        for label, printed in _COMPARE_TABLE[config].items():
            if label in exact:
                if printed != next(r.printed for r in rows if r.config == config and r.model == label):
                    rows.append(ParamRow(config, label, exact[label], printed,
                                         "second listing prints a different value for this configuration"))
            else:
                rows.append(ParamRow(config, label, None, printed, "architecture not stated"))
    return rows


def format_param_table(rows=None) -> str:
    rows = rows if rows is not None else param_table()
    lines = [f"{'config':<14}{'model':<10}{'exact':>10}{'rounded':>9}{'printed':>9}  match  note"]
    for r in rows:
        exact = f"{r.exact:,}" if r.exact is not None else "-"
        match = {True: "yes", False: "NO", None: "n/a"}[r.match]
        lines.append(f"{r.config:<14}{r.model:<10}{exact:>10}{r.formatted:>9}{r.printed:>9}  {match:<5}  {r.note}")
    return "\n".join(lines)
