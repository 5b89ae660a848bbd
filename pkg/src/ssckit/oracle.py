"""Independent numerical cross-checks of the closed-form identities.

Nothing here reuses the scalar shortcuts under test.  The vector
conditioning oracle does full linear algebra on the subset covariance;
the Monte-Carlo oracle samples the joint model and measures squared
estimation error; the equivalence and Fisher-information checks exercise
the conditional-variance algebra from independent compositions.

Deterministic identities are held to 1e-12; stochastic checks pass within
four standard errors of their sample mean.  Every check yields a
:class:`CheckReport`; a run is green only if every report passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError, SingularModelError
from .gaussian import SourceModel, cond_var_given_side_info, cond_var_given_v_and_y

DETERMINISTIC_TOL = 1e-12
STOCHASTIC_SIGMAS = 4.0


@dataclass(frozen=True)
class CheckReport:
    check_id: str
    analytic_value: float
    oracle_value: float
    abs_err: float
    tolerance: float
    passed: bool
    seed: int | None = None
    applicable: bool = True

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "analytic_value": self.analytic_value,
            "oracle_value": self.oracle_value,
            "abs_err": self.abs_err,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "seed": self.seed,
            "applicable": self.applicable,
        }


def _report(check_id: str, analytic: float, oracle: float, tolerance: float,
            seed: int | None = None) -> CheckReport:
    analytic, oracle = float(analytic), float(oracle)
    err = abs(analytic - oracle)
    return CheckReport(check_id, analytic, oracle, err, float(tolerance),
                       passed=bool(err <= tolerance), seed=seed)


def _not_applicable(check_id: str) -> CheckReport:
    return CheckReport(check_id, 0.0, 0.0, 0.0, 0.0, passed=True,
                       applicable=False)


def subset_covariances(model: SourceModel, members):
    """Cross-covariance vector and observation covariance of a subset."""
    idx = sorted(members)
    noise = np.array([model.noise_vars[m - 1] for m in idx])
    k = len(idx)
    cross = np.full(k, model.sigma_x2)
    obs = np.full((k, k), model.sigma_x2) + np.diag(noise)
    return cross, obs


def vector_conditioning_oracle(model: SourceModel, members) -> float:
    """Residual variance of X by full vector Gaussian conditioning.

    Computes ``sigma_x2 - c^T Sigma_Y^{-1} c`` with dense linear algebra,
    no scalar reduction, so it can serve as ground truth for the
    aggregate-precision formula.
    """
    members = frozenset(members)
    if not members:
        raise InvalidParameterError("subset must be nonempty")
    cross, obs = subset_covariances(model, members)
    try:
        solved = np.linalg.solve(obs, cross)
    except np.linalg.LinAlgError as exc:
        raise SingularModelError("subset covariance is singular") from exc
    return float(model.sigma_x2 - cross @ solved)


def monte_carlo_mmse(model: SourceModel, members, trials: int, seed: int):
    """Sampled mean-square error of the optimal estimator of X.

    Draws ``trials`` joint samples, applies the analytic conditional mean,
    and returns ``(estimate, standard_error)``.  Reproducible under a
    fixed seed.
    """
    if trials < 10_000:
        raise InvalidParameterError("trials must be at least 10^4")
    members = frozenset(members)
    if not members:
        raise InvalidParameterError("subset must be nonempty")
    rng = np.random.default_rng(seed)
    idx = sorted(members)
    noise_sd = np.sqrt([model.noise_vars[m - 1] for m in idx])
    cross, obs = subset_covariances(model, idx)
    weights = np.linalg.solve(obs, cross)
    x = rng.normal(0.0, np.sqrt(model.sigma_x2), size=trials)
    y = x[:, None] + rng.normal(0.0, 1.0, size=(trials, len(idx))) * noise_sd
    sq_err = (x - y @ weights) ** 2
    estimate = float(sq_err.mean())
    stderr = float(sq_err.std(ddof=1) / np.sqrt(trials))
    return estimate, stderr


def helper_variance_equivalence_check(gain: float, noise_var: float, d: float,
                             helper_var_grid, sigma_x2: float = 1.0):
    """Check the distortion-to-helper-variance constraint translation.

    For each helper variance ``s`` on the grid, verifies that
    ``Var(X|V, Y) <= d`` holds exactly when ``s <= 1/(1/d - gain^2/noise_var)``,
    and that plugging the boundary value back in gives ``Var(X|V, Y) = d``
    to 1e-12.  Applicable only while ``d`` does not exceed the residual
    variance given Y alone; otherwise a single not-applicable report is
    returned.
    """
    var_given_y = (noise_var * sigma_x2) / (gain * gain * sigma_x2 + noise_var)
    if d > var_given_y:
        return [_not_applicable("helper_var_hypothesis")]
    boundary = 1.0 / (1.0 / d - gain * gain / noise_var)
    reports = []
    for s in helper_var_grid:
        s = float(s)
        lhs = cond_var_given_v_and_y(gain, noise_var, s) <= d
        rhs = s <= boundary
        reports.append(_report(f"helper_var_iff_s={s:.6g}",
                               float(lhs), float(rhs), 0.0))
    reports.append(_report(
        "helper_var_boundary",
        cond_var_given_v_and_y(gain, noise_var, boundary), d,
        DETERMINISTIC_TOL,
    ))
    return reports


def gaussian_fisher_info(variance: float) -> float:
    """Fisher information of a Gaussian location family: 1 / variance."""
    if not variance > 0:
        raise InvalidParameterError("variance must be positive")
    return 1.0 / variance


def fisher_identity_checks(grid):
    """Check the MMSE/Fisher bridge and the scaling rule on a grid.

    ``grid`` yields triples ``(helper_var, noise_var, scale)``.  For each:

    * ``noise_var - noise_var^2 * J(X + N | V)`` with
      ``J = 1/(helper_var + noise_var)`` must equal the two-observation
      residual variance with unit gain;
    * the information of the scaled variable, ``J(a X | V)``, computed as
      ``1 / Var(aX|V)`` must equal ``J(X|V) / a^2`` computed the other way.
    """
    reports = []
    for helper_var, noise_var, scale in grid:
        j = gaussian_fisher_info(helper_var + noise_var)
        lhs = noise_var - noise_var * noise_var * j
        rhs = cond_var_given_v_and_y(1.0, noise_var, helper_var)
        reports.append(_report(
            f"fisher_mmse_s={helper_var:.6g}_n={noise_var:.6g}",
            lhs, rhs, DETERMINISTIC_TOL))
        scaled_direct = gaussian_fisher_info(scale * scale * helper_var)
        scaled_rule = gaussian_fisher_info(helper_var) / (scale * scale)
        reports.append(_report(
            f"fisher_scaling_a={scale:.6g}_s={helper_var:.6g}",
            scaled_direct, scaled_rule, DETERMINISTIC_TOL))
    return reports


@dataclass
class VerificationRun:
    reports: list[CheckReport] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_dict(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "num_checks": len(self.reports),
            "reports": [r.to_dict() for r in self.reports],
        }


def run_verification(seed: int = 0, trials: int = 100_000,
                     models: int = 20, grid_points: int = 200) -> VerificationRun:
    """Default verification sweep used by the CLI ``verify`` command.

    Randomized models get their residual variances checked against the
    dense-linear-algebra oracle at 1e-12 and against the Monte-Carlo
    oracle at four standard errors; the equivalence and Fisher grids run
    at 1e-12.  Per-check seeds are spawned from the master seed.
    """
    master = np.random.SeedSequence(seed)
    rng = np.random.default_rng(master.spawn(1)[0])
    run = VerificationRun()

    for k in range(models):
        num_users = int(rng.integers(1, 9))
        model = SourceModel(
            sigma_x2=float(rng.uniform(0.2, 5.0)),
            noise_vars=tuple(rng.uniform(0.1, 10.0, size=num_users)),
        )
        size = int(rng.integers(1, num_users + 1))
        members = frozenset(rng.choice(num_users, size=size, replace=False) + 1)
        analytic = cond_var_given_side_info(model, members)
        run.reports.append(_report(
            f"vector_conditioning_model{k}", analytic,
            vector_conditioning_oracle(model, members), DETERMINISTIC_TOL))

    mc_model = SourceModel(sigma_x2=2.0, noise_vars=(1.0, 0.8, 0.9, 0.7, 0.6))
    for k, sub_seed in enumerate(master.spawn(3)):
        members = [frozenset({1}), frozenset({2, 5}),
                   frozenset(range(1, 6))][k]
        analytic = cond_var_given_side_info(mc_model, members)
        estimate, stderr = monte_carlo_mmse(
            mc_model, members, trials, np.random.default_rng(sub_seed).integers(2**31))
        run.reports.append(CheckReport(
            f"monte_carlo_mmse_{k}", float(analytic), float(estimate),
            abs(analytic - estimate), STOCHASTIC_SIGMAS * stderr,
            passed=bool(abs(analytic - estimate) <= STOCHASTIC_SIGMAS * stderr),
            seed=seed))

    grid = np.linspace(0.05, 0.6, grid_points)
    run.reports.extend(helper_variance_equivalence_check(1.0, 1.0, 0.4, grid))

    fisher_rng = np.random.default_rng(master.spawn(2)[1])
    triples = zip(fisher_rng.uniform(0.05, 10.0, grid_points),
                  fisher_rng.uniform(0.05, 10.0, grid_points),
                  fisher_rng.uniform(0.1, 10.0, grid_points))
    run.reports.extend(fisher_identity_checks(triples))
    return run
