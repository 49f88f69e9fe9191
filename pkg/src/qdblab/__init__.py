"""Finite-dimensional open quantum dynamics with detailed balance checks
and energy-exchange fluctuation ratios."""

from . import balance, cli, dynamics, errors, examples, fluctuation, matlin, states
from .balance import TimeReversal, WeightedSpace, adjoint, check_qdb1, check_qdb2, inner
from .dynamics import (
    KrausChannel,
    LindbladGenerator,
    SuperOperator,
    apply,
    channel_from_superop,
    dual_superop,
    evolve,
    is_cptp,
    lindblad_superop,
    superop_from_channel,
)
from .fluctuation import (
    Classification,
    EnergyExchangeDistribution,
    classify,
    exchange_distribution,
    qfr_ratio,
    transition_matrix,
)
from .states import BlochVector, DensityMatrix, HamiltonianSpec, gibbs, infer_beta, populations

__version__ = "0.1.0"
