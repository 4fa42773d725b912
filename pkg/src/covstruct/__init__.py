"""Tests for structured covariance and correlation matrices."""

from .engine import TestResult, hotelling_t2, make_spec, run_structure_test, test_from_moments
from .exceptions import CovStructError
from .hypotheses import HypothesisSpec, build_hypothesis
from .matrix import dvech, dvech_inv, vech
from .mctp import MCTPResult, combined_mctp
from .moments import MomentBundle, compute_moments
from .simulation import Scenario, preset, run_scenario
from .structures import StructureKind, make_structure

__all__ = [
    "CovStructError", "HypothesisSpec", "MCTPResult", "MomentBundle", "Scenario", "StructureKind",
    "TestResult", "build_hypothesis", "combined_mctp", "compute_moments", "dvech", "dvech_inv",
    "hotelling_t2", "make_spec", "make_structure", "preset", "run_scenario", "run_structure_test",
    "test_from_moments", "vech",
]
