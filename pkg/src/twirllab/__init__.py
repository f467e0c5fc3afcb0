"""Verification laboratory for moment properties of random circuit ensembles
over matrix subgroups (Clifford, orthogonal, unitary-symplectic, matchgate).
"""

from .experiments import EXPERIMENTS, ExperimentReport

__all__ = ["EXPERIMENTS", "ExperimentReport"]
__version__ = "0.1.0"
