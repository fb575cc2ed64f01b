"""Dimensionless representation and similarity-based transfer of feedback policies."""

__version__ = "0.1.0"

from .dims import (DIMENSIONLESS, DimVec, PiGroupSet, ProblemSignature, QuantitySpec,
                   ScalingTransforms, build_transforms, is_similar, solve_pi_exponents,
                   transforms_for)
from .errors import (DimpolError, DomainError, NonFiniteDynamics, NonFiniteScale, NotSimilar,
                     OutOfDomain, PolicyUndefined, RankDeficient, SignatureMismatch,
                     UnreachableDimension, ZeroRepeatedVariable)
from .grid import Axis, Grid
from .policy import (DimensionlessPolicy, FunctionLaw, TabularPolicy, evaluate,
                     from_dimensionless, resample, to_dimensionless, transfer)
from .solver import DPConfig, ValueIterationResult, bellman_backup, rollout, solve
from .systems import (CAR_CONTEXTS, PENDULUM_CONTEXTS, CarContext, CarModel, PendulumContext,
                      PendulumModel, make_model)

__all__ = [
    "__version__", "DIMENSIONLESS", "DimVec", "PiGroupSet", "ProblemSignature",
    "QuantitySpec", "ScalingTransforms", "build_transforms", "is_similar",
    "solve_pi_exponents", "transforms_for", "DimpolError", "DomainError",
    "NonFiniteDynamics", "NonFiniteScale", "NotSimilar", "OutOfDomain", "PolicyUndefined",
    "RankDeficient", "SignatureMismatch", "UnreachableDimension", "ZeroRepeatedVariable",
    "Axis", "Grid", "DimensionlessPolicy", "FunctionLaw", "TabularPolicy", "evaluate",
    "from_dimensionless", "resample", "to_dimensionless", "transfer", "DPConfig",
    "ValueIterationResult", "bellman_backup", "rollout", "solve", "CarContext", "CarModel",
    "PendulumContext", "PendulumModel", "make_model", "CAR_CONTEXTS", "PENDULUM_CONTEXTS",
]
