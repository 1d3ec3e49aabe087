"""Self-check suites wired to the command line: cross-path consistency checks.

The fast level re-derives everything that has two independent computation
routes: registry conjugations and axioms, the triangular-factorization
functionals against the generic Newton-based ones, and the gamma integral
against the classical full-cone value.  The mc level checks the
factorization identity for the normalizing integral against Monte Carlo on
the low-dimensional cones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from . import cone
from .butterfly import butterfly_graph, butterfly_registry, butterfly_subgroups
from .errors import HomconeError
from .graphs import Graph, Permutation, PermutationGroup
from .invariant import build_invariant_space
from .oracle import mc_cone_integral
from .realization import (
    conjugate_space,
    full_sym_structure,
    log_gamma_v,
    ray_structure,
    validate_vstructure,
)

CROSS_PATH_RTOL = 1e-8
SIEGEL_TOL = 1e-10


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_dual_point(space, rng, scale=1.0):
    a = rng.standard_normal((space.p, space.p))
    d = a @ a.T + 0.1 * np.eye(space.p)
    return scale * space.project(d)


def _registry_models(registry_path=None):
    graph = butterfly_graph()
    subgroups = butterfly_subgroups()
    out = []
    for entry in butterfly_registry(registry_path):
        space = build_invariant_space(graph, subgroups[entry.model_id])
        out.append((entry, space))
    return out


def check_registry(registry_path=None) -> list[CheckResult]:
    """Axioms and conjugation validity of every registry entry."""
    results = []
    try:
        pairs = _registry_models(registry_path)
    except (HomconeError, ValueError, OSError, KeyError) as exc:
        return [CheckResult("registry load", False, str(exc))]
    for entry, space in pairs:
        report = validate_vstructure(entry.structure)
        if not report.passed:
            bad = [v.detail for vs in report.violations.values() for v in vs]
            results.append(
                CheckResult(f"axioms {entry.model_id}", False, "; ".join(bad))
            )
        else:
            results.append(CheckResult(f"axioms {entry.model_id}", True, "V1 V2 V3 hold"))
        try:
            conjugate_space(space, entry.u, entry.structure)
            results.append(
                CheckResult(f"conjugation {entry.model_id}", True, "block form matched")
            )
        except HomconeError as exc:
            results.append(CheckResult(f"conjugation {entry.model_id}", False, str(exc)))
    return results


def check_cross_path(registry_path=None, points: int = 3, seed: int = 20240601) -> list[CheckResult]:
    """Triangular-factorization functionals against the Newton-based route."""
    results = []
    try:
        pairs = _registry_models(registry_path)
    except (HomconeError, ValueError, OSError, KeyError) as exc:
        return [CheckResult("registry load", False, str(exc))]
    rng = np.random.default_rng(seed)
    for entry, space in pairs:
        try:
            realization = conjugate_space(space, entry.u, entry.structure)
        except HomconeError as exc:
            results.append(CheckResult(f"cross-path {entry.model_id}", False, str(exc)))
            continue
        worst = 0.0
        ok = True
        for _ in range(points):
            y = random_dual_point(space, rng)
            res = cone.psi(space, y)
            ld_num = cone.log_delta(space, y, res)
            lp_num = cone.log_phi(space, y, res)
            ld_fast, lp_fast = realization.log_delta_phi(y)
            err = max(
                abs(ld_num - ld_fast) / max(1.0, abs(ld_num)),
                abs(lp_num - lp_fast) / max(1.0, abs(lp_num)),
            )
            worst = max(worst, err)
            ok = ok and err <= CROSS_PATH_RTOL
        results.append(
            CheckResult(
                f"cross-path {entry.model_id}",
                ok,
                f"worst relative disagreement {worst:.2e} over {points} points",
            )
        )
    return results


def log_gamma_full_sym_classical(p: int, alpha: float) -> float:
    """Classical full-cone value times the trace-measure power of two."""
    n_dim = p * (p + 1) // 2
    total = 0.5 * (n_dim - p) * math.log(2.0)
    total += 0.25 * p * (p - 1) * math.log(math.pi)
    for j in range(1, p + 1):
        total += float(gammaln(alpha + (p + 1) / 2.0 - (j - 1) / 2.0))
    return total


def check_siegel() -> list[CheckResult]:
    """Gamma integral of the full cone against the classical closed form."""
    results = []
    for p in (2, 3, 4):
        structure = full_sym_structure(p)
        worst = 0.0
        for alpha in (0.0, 0.5, 1.0, 4.5):
            lhs = log_gamma_v(structure, alpha)
            rhs = log_gamma_full_sym_classical(p, alpha)
            worst = max(worst, abs(lhs - rhs))
        results.append(
            CheckResult(
                f"siegel p={p}",
                worst <= SIEGEL_TOL,
                f"worst log disagreement {worst:.2e}",
            )
        )
    return results


def mc_reference_cases():
    """(name, space, realization, y, alpha) triples for the integral identity."""
    cases = []

    k2 = Graph.build(["a", "b"], [(1, 2)])
    z2 = build_invariant_space(k2, PermutationGroup.trivial(2))
    real2 = conjugate_space(z2, np.eye(2), full_sym_structure(2))
    cases.append(("full sym p=2", z2, real2, np.eye(2), 1.0))

    empty3 = Graph.build(["a", "b", "c"], [])
    s3 = PermutationGroup.generate(
        3, [Permutation((2, 1, 3)), Permutation((2, 3, 1))]
    )
    z_ray = build_invariant_space(empty3, s3)
    real_ray = conjugate_space(z_ray, np.eye(3), ray_structure(3))
    cases.append(("ray p=3", z_ray, real_ray, 1.3 * np.eye(3), 1.0))

    graph = butterfly_graph()
    space7 = build_invariant_space(graph, butterfly_subgroups()["G7"])
    entry7 = next(e for e in butterfly_registry() if e.model_id == "G7")
    real7 = conjugate_space(space7, entry7.u, entry7.structure)
    cases.append(("hub-symmetric space", space7, real7, 0.5 * np.eye(5), 0.5))

    return cases


def check_mc(samples: int = 200_000, seed: int = 0xC0FFEE) -> list[CheckResult]:
    """Factorization identity against Monte Carlo on three small cones."""
    results = []
    for name, space, realization, y, alpha in mc_reference_cases():
        ld, lp = realization.log_delta_phi(y)
        claim = math.exp(realization.log_gamma(alpha) + lp - alpha * ld)
        est = mc_cone_integral(space, alpha, y, samples=samples, seed=seed)
        z = abs(est.value - claim) / est.std_error if est.std_error > 0 else math.inf
        results.append(
            CheckResult(
                f"mc {name}",
                z <= 3.0,
                f"claim {claim:.6g} vs estimate {est.value:.6g} "
                f"+- {est.std_error:.2g} (z = {z:.2f})",
            )
        )
    return results


def run_verification(level: str, registry_path=None, samples: int | None = None,
                     seed: int = 0xC0FFEE) -> list[CheckResult]:
    if level == "fast":
        results = check_registry(registry_path)
        results += check_cross_path(registry_path)
        results += check_siegel()
        return results
    if level == "mc":
        return check_mc(samples=samples or 200_000, seed=seed)
    raise ValueError(f"unknown verification level {level!r}")
