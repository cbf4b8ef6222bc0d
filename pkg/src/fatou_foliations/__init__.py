"""Fatou-set certification for the linear foliations F_alpha of C^2 and G_alpha of CP^2."""

from .charts import AffinePoint2, ChartId, ProjectivePoint, ReferenceMetricId
from .errors import FatouError
from .foliation import Ambient, LinearFoliation
from .kernels import BACKEND
from .regions import RegionKind, RegionSpec
from .verifier import (
    CheckParams,
    FatouSubset,
    Inconclusive,
    check_thm26,
    check_thm212,
    counterexample_suite,
    known_classification,
)

__all__ = [
    "AffinePoint2",
    "Ambient",
    "BACKEND",
    "ChartId",
    "CheckParams",
    "FatouError",
    "FatouSubset",
    "Inconclusive",
    "LinearFoliation",
    "ProjectivePoint",
    "ReferenceMetricId",
    "RegionKind",
    "RegionSpec",
    "check_thm26",
    "check_thm212",
    "counterexample_suite",
    "known_classification",
]
