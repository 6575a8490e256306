"""Exact partial Markov kernels, empirical sampling of sequences, and Monte Carlo
checks of the associated limit theorems."""

__version__ = "0.1.0"

from .kernel import (  # noqa: E402
    FiniteSpace,
    PartialKernel,
    compose,
    domain_of,
    extends,
    structural,
    tensor,
)
from .sequences import CylinderState, FinitePermutation, MixtureModel, mixture_state, resample_truncated  # noqa: E402
from .empirical import (  # noqa: E402
    EmpiricalMeasure,
    EmpiricalVerdict,
    HorizonSchedule,
    SequencePrefix,
    classify,
    empirical_measure,
)
from .cumulants import sixth_moment_oracle  # noqa: E402
from .verify import TrialPlan, VerificationReport  # noqa: E402

__all__ = [
    "CylinderState",
    "EmpiricalMeasure",
    "EmpiricalVerdict",
    "FiniteSpace",
    "FinitePermutation",
    "HorizonSchedule",
    "MixtureModel",
    "PartialKernel",
    "SequencePrefix",
    "TrialPlan",
    "VerificationReport",
    "classify",
    "compose",
    "domain_of",
    "empirical_measure",
    "extends",
    "mixture_state",
    "resample_truncated",
    "sixth_moment_oracle",
    "structural",
    "tensor",
]
