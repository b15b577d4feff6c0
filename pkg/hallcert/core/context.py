"""
Run context: budgets and defaults shared by the engines and the CLI.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

from .models import RunConfig

logger = logging.getLogger(__name__)

DEFAULT_CAP = 2_000_000


@dataclass(frozen=True)
class RunContext:
    """Budgets for one run. CLI flags and config files override the defaults."""

    cap: int = DEFAULT_CAP
    seed: int = 0
    witness_kmax: int = 4
    base_kmax: int = 5
    reg_m: int = 5
    # Nodes of the stabilizer-chain tree visited by an exact Reg count.
    reg_node_budget: int = 200_000
    search_budget: int = 200_000
    hall_budget: int = 50_000

    @classmethod
    def from_config(cls, config: Optional[RunConfig]) -> "RunContext":
        ctx = cls()
        if config is None:
            return ctx
        overrides = {"seed": config.seed}
        if config.cap is not None:
            overrides["cap"] = config.cap
        if config.kmax is not None:
            overrides["witness_kmax"] = config.kmax
            overrides["base_kmax"] = config.kmax
        if config.m is not None:
            overrides["reg_m"] = config.m
        ctx = replace(ctx, **overrides)
        logger.debug(f"Run context: {ctx}")
        return ctx
