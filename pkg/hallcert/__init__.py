"""
hallcert - Hall subgroups of finite classical groups.

Builds GL, GU, GSp and GO groups over small finite fields by exhaustive
enumeration, locates Hall pi-subgroups from their structural containers,
and certifies that a few conjugates of a Hall subgroup meet in the center.
Base size and regular-orbit counts of the coset action come alongside.
"""

__version__ = "0.1.0"
__author__ = "hallcert contributors"

from .core.field import FieldSpec, make_field
from .core.loader import ManifestLoader
from .core.models import Certificate, GroupSpec, TheoremReport

__all__ = ["Certificate", "FieldSpec", "GroupSpec", "ManifestLoader", "TheoremReport", "make_field", "__version__"]
