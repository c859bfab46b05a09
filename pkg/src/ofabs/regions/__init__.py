"""Exact set domains: explicit finite sets, indexed families and diagonal boxes."""

from .base import (
    AlgebraReport,
    Region,
    SymbolicSystem,
    post,
    region_algebra,
    restrict_output,
    stable_subset,
    union_all,
)
from .finite import FiniteRegion, FiniteSymbolic, as_symbolic
from .geo import GeoRegion, TranslationSystem
from .indexed import IndexedRegion, IndexedSystem, IndexSet, Rule

__all__ = [
    "AlgebraReport", "Region", "SymbolicSystem", "post", "region_algebra",
    "restrict_output", "stable_subset", "union_all", "FiniteRegion",
    "FiniteSymbolic", "as_symbolic", "GeoRegion", "TranslationSystem",
    "IndexedRegion", "IndexedSystem", "IndexSet", "Rule",
]
