"""Group enumeration and the Hall, witness and base-size engines."""

from .basesize import base_size, coset_action, reg_count, theorem_check
from .classical import build_group, group_order
from .engine import ElementTable, SubgroupHandle, closure, find_hall_pi
from .hall import epi_condition, hall_candidate
from .witnesses import replay_certificate, search_witnesses, sp4_witnesses, verify_witnesses

__all__ = [
    "ElementTable",
    "SubgroupHandle",
    "base_size",
    "build_group",
    "closure",
    "coset_action",
    "epi_condition",
    "find_hall_pi",
    "group_order",
    "hall_candidate",
    "reg_count",
    "replay_certificate",
    "search_witnesses",
    "sp4_witnesses",
    "theorem_check",
    "verify_witnesses",
]
