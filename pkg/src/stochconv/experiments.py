"""Named experiment presets executed by the command-line runner.

Every preset consumes a validated ``ScenarioConfig``, writes deterministic
artifacts (a schema-versioned JSON report plus plot-ready CSV files) into an
output directory, and reports whether its invariant checks passed.  Artifacts
contain no timestamps, so identical configs reproduce identical bytes.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from . import convolution as conv
from . import measures
from .config import ScenarioConfig
from .errors import ConfigError, StochConvError
from .fubini import FubiniFamily, fubini_report, integrate_then_ito, ito_then_integrate
from .hilbert import SpectralOperator, operator_matrix, semigroup_eval
from .ito import IntegrandSpec, ito_integrate, lr_path_norm, path_sup_norms
from .noise import coarsen_increments, sample_increments
from .norms import (
    deterministic_lpq_norm,
    estimate_lpq,
    estimate_lpqr,
    singular_kernel_field,
)

__all__ = ["run_experiment", "run_convolve", "jsonify", "write_json"]


def jsonify(obj):
    """Recursively convert numpy scalars/arrays for JSON serialization."""
    if isinstance(obj, dict):
        return {str(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path: str, data: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(jsonify(data), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _envelope(cfg: ScenarioConfig) -> dict:
    return {
        "schema": "1",
        "experiment": cfg.experiment,
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
    }


def _sample_noise(cfg: ScenarioConfig, seed=None):
    return sample_increments(
        cfg.build_noise_spec(),
        cfg.grid,
        cfg.seed if seed is None else seed,
        cfg.n_paths,
        workers=cfg.workers,
    )


def _diagonal_scenario(cfg: ScenarioConfig):
    """Rates, covariance and integrand eigenvalues for mode-wise presets."""
    if cfg.semigroup_json.get("kind") != "diagonal":
        raise ConfigError("this experiment requires a diagonal semigroup")
    phi = cfg.integrand_json
    if phi.get("kind") != "constant" or phi.get("operator", {}).get("kind") != "diagonal":
        raise ConfigError("this experiment requires a constant diagonal integrand")
    if cfg.dim_u != cfg.dim_h:
        raise ConfigError("this experiment requires dims.U == dims.H")
    rates = np.asarray(cfg.semigroup_json["rates"], float)
    q_eig = np.asarray(cfg.q_eigenvalues, float)
    phi_eig = np.asarray(phi["operator"]["eigenvalues"], float)
    return rates, q_eig, phi_eig


def _mode_variance_closed_form(rates, q_eig, phi_eig, horizon: float) -> np.ndarray:
    """Stationary-integral variance of each mode of the direct convolution."""
    out = np.empty_like(q_eig)
    for k, (lam, qk, fk) in enumerate(zip(rates, q_eig, phi_eig)):
        if lam == 0.0:
            out[k] = fk * fk * qk * horizon
        else:
            out[k] = fk * fk * qk * (1.0 - math.exp(-2.0 * lam * horizon)) / (2.0 * lam)
    return out


def _variance_check(cfg: ScenarioConfig, out_dir: str):
    rates, q_eig, phi_eig = _diagonal_scenario(cfg)
    noise = _sample_noise(cfg)
    request = conv.ConvolutionRequest(
        phi=cfg.build_integrand(),
        semigroup=cfg.build_semigroup(),
        noise=noise,
        beta=cfg.beta,
        r=cfg.r,
        p=cfg.p,
        q=cfg.q,
    )
    ensemble = conv.direct_convolution(request)
    final = ensemble.values[:, -1, :]
    n = final.shape[0]
    estimates = np.var(final, axis=0, ddof=1)
    centered = final - final.mean(axis=0)
    m2 = np.mean(centered**2, axis=0)
    m4 = np.mean(centered**4, axis=0)
    ses = np.sqrt(np.maximum(m4 - m2**2, 0.0) / n)
    closed = _mode_variance_closed_form(rates, q_eig, phi_eig, cfg.grid.horizon)
    tolerances = np.maximum(4.0 * ses, 0.02 * closed)
    deviations = np.abs(estimates - closed)
    ok = bool(np.all(deviations <= tolerances))

    report = _envelope(cfg)
    report.update(
        {
            "n_paths": n,
            "dt": cfg.grid.dt,
            "modes": [
                {
                    "mode": k,
                    "rate": rates[k],
                    "q": q_eig[k],
                    "estimate": estimates[k],
                    "closed_form": closed[k],
                    "se": ses[k],
                    "tolerance": tolerances[k],
                    "ok": bool(deviations[k] <= tolerances[k]),
                }
                for k in range(len(rates))
            ],
            "all_ok": ok,
        }
    )
    write_json(os.path.join(out_dir, f"{cfg.experiment}_report.json"), report)
    _write_csv(
        os.path.join(out_dir, f"{cfg.experiment}_modes.csv"),
        ["mode", "rate", "q", "estimate", "closed_form", "se", "tolerance"],
        [
            (k, rates[k], q_eig[k], estimates[k], closed[k], ses[k], tolerances[k])
            for k in range(len(rates))
        ],
    )
    # plot-ready variance-in-time curve for the first mode
    nodes = cfg.grid.nodes
    emp_curve = np.var(ensemble.values[:, :, 0], axis=0, ddof=1)
    lam0, q0, f0 = rates[0], q_eig[0], phi_eig[0]
    if lam0 == 0.0:
        closed_curve = f0 * f0 * q0 * nodes
    else:
        closed_curve = f0 * f0 * q0 * (1.0 - np.exp(-2.0 * lam0 * nodes)) / (2.0 * lam0)
    _write_csv(
        os.path.join(out_dir, f"{cfg.experiment}_mode0_curve.csv"),
        ["t", "empirical_var", "closed_form_var"],
        zip(nodes, emp_curve, closed_curve),
    )
    return report, ok


def _build_family(cfg: ScenarioConfig) -> FubiniFamily:
    spec = cfg.options.get("family", {})
    base = cfg.build_integrand()
    kind = spec.get("kind", "scaled_constant")
    if kind != "scaled_constant":
        raise ConfigError(f"unknown family kind {kind!r}")
    if "quadrature" in spec:
        rule = spec["quadrature"]
        n_atoms = int(rule.get("n", 16))
        lo, hi = rule.get("interval", [0.0, 1.0])
        if n_atoms < 1 or hi <= lo:
            raise ConfigError("family quadrature needs n >= 1 and a proper interval")
        h = (hi - lo) / n_atoms
        name = rule.get("rule", "midpoint")
        if name == "midpoint":
            atoms = lo + (np.arange(n_atoms) + 0.5) * h
        elif name == "left":
            atoms = lo + np.arange(n_atoms) * h
        else:
            raise ConfigError(f"unknown quadrature rule {name!r}")
        weights = np.full(n_atoms, h)
    else:
        atoms = np.asarray(spec.get("atoms", [1.0]), float)
        weights = np.asarray(spec.get("weights", [1.0] * len(atoms)), float)
        if atoms.shape != weights.shape:
            raise ConfigError("family atoms and weights must align")
    return FubiniFamily.from_factory(atoms, weights, lambda y: base.scaled(float(y)))


def _run_fubini(cfg: ScenarioConfig, out_dir: str):
    family = _build_family(cfg)
    noise = _sample_noise(cfg)
    lhs = integrate_then_ito(family, noise)
    rhs = ito_then_integrate(family, noise)
    report_obj = fubini_report(family, noise)
    scale = max(
        float(np.max(np.abs(lhs.values))), float(np.max(np.abs(rhs.values))), 0.0
    )
    headline = report_obj.sup_abs
    relative = headline / scale if scale > 0.0 else 0.0
    ok = relative <= 1e-10

    report = _envelope(cfg)
    report.update(
        {
            "headline": headline,
            "per_node": list(report_obj.per_node_mean_abs),
            "seed": cfg.seed,
            "scale": scale,
            "relative": relative,
            "n_atoms": family.n_atoms,
            "all_ok": ok,
        }
    )
    write_json(os.path.join(out_dir, "fubini_report.json"), report)
    _write_csv(
        os.path.join(out_dir, "fubini_per_node.csv"),
        ["t", "mean_abs_difference"],
        zip(cfg.grid.nodes, report_obj.per_node_mean_abs),
    )
    return report, ok


def _holder_violations(rough, smoothed, semigroup, beta: float, r: float) -> int:
    """Count paths violating the exact pathwise smoothing bound."""
    bound_factor = (
        conv.c_beta(beta)
        * semigroup.bound
        * conv.smoothing_bound_factor(beta, r, rough.grid.horizon)
    )
    sups = path_sup_norms(smoothed)
    rough_norms = conv.left_lr_norm(rough, r)
    return int(np.sum(sups > bound_factor * rough_norms + 1e-10))


def _run_factorize_compare(cfg: ScenarioConfig, out_dir: str):
    factors = cfg.options.get("refinement_factors", [4, 2, 1])
    threshold = float(cfg.options.get("final_threshold", 0.05))
    if sorted(factors, reverse=True) != list(factors) or factors[-1] != 1:
        raise ConfigError("refinement_factors must decrease to 1")
    fine_noise = _sample_noise(cfg)
    semigroup = cfg.build_semigroup()
    phi = cfg.build_integrand()
    if phi.kind != "constant":
        raise ConfigError("factorize-compare requires a constant integrand")
    rows = []
    errors = []
    violations = 0
    for factor in factors:
        noise = coarsen_increments(fine_noise, factor)
        request = conv.ConvolutionRequest(
            phi=phi,
            semigroup=semigroup,
            noise=noise,
            beta=cfg.beta,
            r=cfg.r,
            p=cfg.p,
            q=cfg.q,
        )
        direct = conv.direct_convolution(request)
        rough = conv.kernel_convolution(request)
        smoothed = conv.factorization_smoothing(rough, semigroup, cfg.beta, cfg.r)
        report_obj = conv.compare(direct, smoothed, meta={"seed": cfg.seed})
        err = report_obj.max_node_mean
        errors.append(err)
        violations += _holder_violations(rough, smoothed, semigroup, cfg.beta, cfg.r)
        rows.append((noise.grid.dt, noise.grid.n_steps, err, report_obj.sup_abs))
        _write_csv(
            os.path.join(out_dir, f"factorize_per_node_N{noise.grid.n_steps}.csv"),
            ["t", "mean_abs_difference"],
            zip(noise.grid.nodes, report_obj.per_node_mean_abs),
        )
    monotone = all(errors[i + 1] < errors[i] for i in range(len(errors) - 1))
    ok = monotone and errors[-1] < threshold and violations == 0

    report = _envelope(cfg)
    report.update(
        {
            "resolutions": [
                {"dt": row[0], "n_steps": row[1], "error": row[2], "sup_abs": row[3]}
                for row in rows
            ],
            "monotone_decrease": monotone,
            "final_error": errors[-1],
            "final_threshold": threshold,
            "holder_violations": violations,
            "all_ok": ok,
        }
    )
    write_json(os.path.join(out_dir, "factorize-compare_report.json"), report)
    _write_csv(
        os.path.join(out_dir, "factorize_errors.csv"),
        ["dt", "n_steps", "error", "sup_abs"],
        rows,
    )
    return report, ok


def _run_constants(cfg: ScenarioConfig, out_dir: str):
    betas = cfg.options.get("betas", [round(0.1 * k, 1) for k in range(1, 10)])
    rows = []
    max_closed_diff = 0.0
    max_sym_diff = 0.0
    max_unit_diff = 0.0
    for beta in betas:
        quad = conv.beta_integral(beta)
        value = 1.0 / quad
        closed = math.sin(math.pi * beta) / math.pi
        partner = conv.c_beta(1.0 - beta)
        max_closed_diff = max(max_closed_diff, abs(value - closed))
        max_sym_diff = max(max_sym_diff, abs(value - partner))
        max_unit_diff = max(max_unit_diff, abs(value * quad - 1.0))
        rows.append((beta, value, closed, abs(value - closed), abs(value - partner)))
    ok = max_closed_diff <= 1e-8 and max_sym_diff <= 1e-10 and max_unit_diff <= 1e-9

    report = _envelope(cfg)
    report.update(
        {
            "values": [
                {"beta": row[0], "c_beta": row[1], "closed_form": row[2]} for row in rows
            ],
            "max_closed_form_diff": max_closed_diff,
            "max_symmetry_diff": max_sym_diff,
            "max_unit_product_diff": max_unit_diff,
            "all_ok": ok,
        }
    )
    write_json(os.path.join(out_dir, "constants_report.json"), report)
    _write_csv(
        os.path.join(out_dir, "constants_table.csv"),
        ["beta", "c_beta", "closed_form", "closed_form_diff", "symmetry_diff"],
        rows,
    )
    return report, ok


def _slice_integrand(phi, semigroup, grid, beta: float, t_index: int) -> IntegrandSpec:
    """Deterministic integrand s -> 1_{s<t} (t-s)^(-beta) S(t-s) Phi_s."""
    n_steps = grid.n_steps
    dt = grid.dt
    base = operator_matrix(phi.constant) if phi.kind == "constant" else None
    mats = np.zeros((n_steps, phi.codomain.dim, phi.domain.dim))
    for i in range(t_index):
        lag = (t_index - i) * dt
        s_mat = operator_matrix(semigroup_eval(semigroup, lag))
        phi_mat = base if base is not None else phi.node_matrices[i]
        mats[i] = lag ** (-beta) * (s_mat @ phi_mat)
    return IntegrandSpec.from_matrices(phi.domain, phi.codomain, mats)


def _run_norms(cfg: ScenarioConfig, out_dir: str):
    noise = _sample_noise(cfg)
    semigroup = cfg.build_semigroup()
    phi = cfg.build_integrand()
    weight = SpectralOperator(
        cfg.space_u(), cfg.space_u(), np.asarray(cfg.q_eigenvalues, float)
    )
    request = conv.ConvolutionRequest(
        phi=phi, semigroup=semigroup, noise=noise,
        beta=cfg.beta, r=cfg.r, p=cfg.p, q=cfg.q,
    )
    direct = conv.direct_convolution(request)
    rough = conv.kernel_convolution(request)
    smoothed = conv.factorization_smoothing(rough, semigroup, cfg.beta, cfg.r)

    direct_lpq = estimate_lpq(direct, cfg.p, cfg.q, seed=cfg.seed + 1)
    smoothed_lrr = estimate_lpq(smoothed, cfg.r, cfg.r, seed=cfg.seed + 2)
    field = singular_kernel_field(phi, semigroup, cfg.grid, cfg.beta, weight=weight)
    field_norm = estimate_lpqr(field, cfg.p, cfg.q, cfg.r, seed=cfg.seed + 3)

    # empirical norm of the integral operator over the singular slice battery
    j_estimate = 0.0
    for t_index in range(1, cfg.grid.n_steps + 1):
        slice_phi = _slice_integrand(phi, semigroup, cfg.grid, cfg.beta, t_index)
        slice_norm = deterministic_lpq_norm(slice_phi, cfg.grid, cfg.q, weight=weight)
        if slice_norm == 0.0:
            continue
        slice_paths = ito_integrate(slice_phi, noise)
        ratio = lr_path_norm(slice_paths, cfg.r).estimate / slice_norm
        j_estimate = max(j_estimate, ratio)

    bound = (
        cfg.grid.horizon ** (1.0 / cfg.r)
        * conv.c_beta(cfg.beta)
        * semigroup.bound
        * conv.smoothing_bound_factor(cfg.beta, cfg.r, cfg.grid.horizon)
        * j_estimate
    )
    ratio = (
        smoothed_lrr.estimate / field_norm.estimate if field_norm.estimate > 0 else 0.0
    )
    ok = bool(np.isfinite(smoothed_lrr.estimate)) and ratio <= bound

    report = _envelope(cfg)
    report.update(
        {
            "direct_lpq": direct_lpq.to_json(),
            "factorized_lrr": smoothed_lrr.to_json(),
            "singular_field_lpqr": field_norm.to_json(),
            "ratio": ratio,
            "bound_constant": {
                "c_beta": conv.c_beta(cfg.beta),
                "semigroup_bound": semigroup.bound,
                "time_factor": conv.smoothing_bound_factor(
                    cfg.beta, cfg.r, cfg.grid.horizon
                ),
                "integral_norm_estimate": j_estimate,
                "bound": bound,
            },
            "all_ok": ok,
        }
    )
    write_json(os.path.join(out_dir, "norms_report.json"), report)
    _write_csv(
        os.path.join(out_dir, "norms_summary.csv"),
        ["quantity", "estimate", "se"],
        [
            ("direct_lpq", direct_lpq.estimate, direct_lpq.standard_error),
            ("factorized_lrr", smoothed_lrr.estimate, smoothed_lrr.standard_error),
            ("singular_field_lpqr", field_norm.estimate, field_norm.standard_error),
            ("ratio", ratio, 0.0),
            ("bound", bound, 0.0),
        ],
    )
    return report, ok


def _random_kernel(rng) -> measures.KernelSpec:
    n1 = int(rng.integers(1, 7))
    n2 = int(rng.integers(1, 7))
    weights = rng.uniform(0.0, 2.0, n2)
    if rng.uniform() < 0.15:
        weights[rng.integers(0, n2)] = 0.0
    masses = rng.uniform(0.0, 2.0, (n2, n1))
    base = measures.DiscreteMeasureSpace(tuple(range(n2)), weights)
    return measures.KernelSpec(base, tuple(range(n1)), masses)


def _run_measure_props(cfg: ScenarioConfig, out_dir: str):
    n_cases = int(cfg.options.get("n_cases", 1000))
    rng = np.random.default_rng(cfg.seed)
    max_holder_excess = -np.inf
    max_minkowski_excess = -np.inf
    for _ in range(n_cases):
        kernel = _random_kernel(rng)
        n1, n2 = len(kernel.d1_points), len(kernel.base.points)
        f = measures.DiscreteFunction(rng.normal(0.0, 1.0, (n1, n2)))
        p = float(rng.uniform(1.0, 4.0)) if rng.uniform() > 0.2 else 1.0
        q = float(rng.uniform(1.0, 4.0)) if rng.uniform() > 0.2 else 1.0
        lhs = measures.abs_integral(f, kernel)
        rhs = measures.holder_constant(kernel, p, q) * measures.lpq_norm(f, kernel, p, q)
        max_holder_excess = max(max_holder_excess, lhs - rhs * (1.0 + 1e-12))

        n_atoms = int(rng.integers(1, 5))
        mu = rng.uniform(0.0, 2.0, n_atoms)
        g = rng.uniform(0.0, 2.0, (n1, n2, n_atoms))
        mixed = measures.DiscreteFunction(np.einsum("aby,y->ab", g, mu))
        lhs_m = measures.lpq_norm(mixed, kernel, p, q)
        rhs_m = sum(
            mu[y] * measures.lpq_norm(measures.DiscreteFunction(g[:, :, y]), kernel, p, q)
            for y in range(n_atoms)
        )
        max_minkowski_excess = max(max_minkowski_excess, lhs_m - rhs_m * (1.0 + 1e-12))
    c11 = measures.holder_constant(_random_kernel(rng), 1.0, 1.0)
    ok = max_holder_excess <= 0.0 and max_minkowski_excess <= 0.0 and c11 == 1.0

    report = _envelope(cfg)
    report.update(
        {
            "n_cases": n_cases,
            "max_holder_excess": max_holder_excess,
            "max_minkowski_excess": max_minkowski_excess,
            "c_1_1": c11,
            "all_ok": ok,
        }
    )
    write_json(os.path.join(out_dir, "measure-kernel-props_report.json"), report)
    _write_csv(
        os.path.join(out_dir, "measure-kernel-props_summary.csv"),
        ["property", "worst_excess"],
        [
            ("holder_domination", max_holder_excess),
            ("minkowski_integral", max_minkowski_excess),
        ],
    )
    return report, ok


_RUNNERS = {
    "ou-check": _variance_check,
    "heat-spde": _variance_check,
    "fubini": _run_fubini,
    "factorize-compare": _run_factorize_compare,
    "constants": _run_constants,
    "norms": _run_norms,
    "measure-kernel-props": _run_measure_props,
}


def run_experiment(cfg: ScenarioConfig, out_dir: str):
    """Run one named preset; returns (report dict, checks passed)."""
    os.makedirs(out_dir, exist_ok=True)
    runner = _RUNNERS.get(cfg.experiment)
    if runner is None:
        raise ConfigError(f"no runner for experiment {cfg.experiment!r}")
    return runner(cfg, out_dir)


def run_convolve(cfg: ScenarioConfig, method: str, out_path: str, check: bool):
    """Convolve the configured scenario and export paths as CSV.

    Returns True when all requested invariants hold (always True when
    ``check`` is False).
    """
    if method not in ("direct", "factorized", "both"):
        raise ConfigError(f"method must be direct, factorized or both, got {method!r}")
    noise = _sample_noise(cfg)
    semigroup = cfg.build_semigroup()
    request = conv.ConvolutionRequest(
        phi=cfg.build_integrand(),
        semigroup=semigroup,
        noise=noise,
        beta=cfg.beta,
        r=cfg.r,
        p=cfg.p,
        q=cfg.q,
    )
    outputs = {}
    ok = True
    if method in ("direct", "both"):
        outputs["direct"] = conv.direct_convolution(request)
    if method in ("factorized", "both"):
        if cfg.beta * cfg.r <= 1.0:
            raise StochConvError(
                f"factorized output requires beta in (1/r, 1), got beta={cfg.beta}, r={cfg.r}"
            )
        rough = conv.kernel_convolution(request)
        smoothed = conv.factorization_smoothing(rough, semigroup, cfg.beta, cfg.r)
        outputs["factorized"] = smoothed
        if check:
            ok = _holder_violations(rough, smoothed, semigroup, cfg.beta, cfg.r) == 0
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        dim = cfg.dim_h
        header = "method,path_id,t," + ",".join(f"coord_{d}" for d in range(dim))
        fh.write(header + "\n")
        nodes = cfg.grid.nodes
        for name in sorted(outputs):
            ensemble = outputs[name]
            for p_ix in range(ensemble.n_paths):
                for k, t in enumerate(nodes):
                    coords = ",".join(repr(float(v)) for v in ensemble.values[p_ix, k])
                    fh.write(f"{name},{p_ix},{float(t)!r},{coords}\n")
    return ok
