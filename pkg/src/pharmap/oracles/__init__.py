"""Numerical checks of the inequalities the analysis relies on."""

import logging

from ..geometry import Sphere, build_manifold
from ..models import InequalityMargin, OracleSpec
from .inequalities import check_lipschitz_inequality, check_monotonicity_inequality, inequality_sweep
from .sff import (
    check_sff_inequality,
    estimate_sff_constant,
    sff_convergence_order,
    sff_finite_difference,
    sff_pair_margin,
)
from .stability import random_test_field, stability_check


logger = logging.getLogger(__name__)

REQUIRED_FD_ORDER = 1.8


def run_default_oracles(spec: OracleSpec) -> list[InequalityMargin]:
    """Vector-inequality sweep, then per target the estimate/verify split and the FD order."""
    margins = inequality_sweep(spec.dims, spec.qs, spec.samples, spec.estimate_seed)
    for target_spec in spec.sff_targets:
        m = build_manifold(target_spec)
        C = estimate_sff_constant(m, spec.samples, spec.estimate_seed)
        logger.info("%s: estimated sff constant %.6g (seed %d)", m.kind, C, spec.estimate_seed)
        margins.append(check_sff_inequality(m, C, spec.samples, spec.verify_seed, spec.headroom))
        if isinstance(m, Sphere):
            order = sff_convergence_order(m, spec.fd_steps, seed=spec.verify_seed)
            margins.append(InequalityMargin(
                name=f"sff_fd_order {m.kind}",
                lhs=REQUIRED_FD_ORDER,
                rhs=order,
                margin=order - REQUIRED_FD_ORDER,
                seed=spec.verify_seed,
                samples=20,
                witness={"hs": spec.fd_steps},
            ))
    return margins


__all__ = [
    "check_lipschitz_inequality",
    "check_monotonicity_inequality",
    "check_sff_inequality",
    "estimate_sff_constant",
    "inequality_sweep",
    "random_test_field",
    "run_default_oracles",
    "sff_convergence_order",
    "sff_finite_difference",
    "sff_pair_margin",
    "stability_check",
]
