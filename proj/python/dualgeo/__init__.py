"""Statistical manifolds with dual connections: geodesics, transport and canonical divergences.

Points and tangent vectors are 1-d numpy arrays in the model's chart.
"""

import json

from ._dualgeo import (
    BaseMismatch,
    DomainExit,
    DualgeoError,
    IntegrationFailure,
    InvalidConfig,
    InvalidModelSpec,
    Model,
    OracleUnavailable,
    PointOutOfDomain,
    QuadratureFailure,
    ShootingNoConvergence,
    StencilOutOfDomain,
    Tolerances,
    catalog,
    classify,
    divergence,
    divergence_gradient,
    exp_map,
    geodesic,
    log_map,
    path_functional,
    recover_structure,
    sectional_curvature,
    transport,
)
from ._dualgeo import _verify_json

__all__ = [
    "BaseMismatch",
    "DomainExit",
    "DualgeoError",
    "IntegrationFailure",
    "InvalidConfig",
    "InvalidModelSpec",
    "Model",
    "OracleUnavailable",
    "PointOutOfDomain",
    "QuadratureFailure",
    "ShootingNoConvergence",
    "StencilOutOfDomain",
    "Tolerances",
    "catalog",
    "classify",
    "divergence",
    "divergence_gradient",
    "exp_map",
    "geodesic",
    "log_map",
    "path_functional",
    "recover_structure",
    "sectional_curvature",
    "transport",
    "verify",
]


def verify(suite="all", models=(), samples=10, seed=0, threads=0, tol=None):
    """Runs a verification suite and returns the report as a dict.

    `models` holds spec strings; empty means the default builtin set.
    """
    report = _verify_json(suite, [str(m) for m in models], samples, seed, threads,
                          tol if tol is not None else Tolerances())
    return json.loads(report)
