"""Batch experiment driver.

One subcommand per check or computation.  Every run prints a canonical JSON
document to stdout: ``{"command", "config", "result"}`` with sorted keys, so
reruns with the same configuration are byte-identical regardless of worker
count.  With ``--out BASE`` the same document is written to ``BASE.json``,
curve and diagram outputs additionally to ``BASE.csv``, and report figures to
``BASE.png``.

Exit codes: 0 on success, 2 on usage errors (bad flags or parameter ranges),
3 when a computation gives up (enumeration budget exceeded, eigensolver or
decoder failed to converge).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import recovery, sparse_norms, tailcheck
from .ensembles import (
    EnsembleKind,
    EnsembleSpec,
    RngStream,
    isotropy_report,
    sample_matrix,
    sample_vector,
)
from .errors import BudgetExceeded, ConvergenceFailure
from .parallel import default_workers, run_indexed

_KINDS = [k.value for k in EnsembleKind]

# ---------------------------------------------------------------------------
# Small parsing helpers
# ---------------------------------------------------------------------------


def _parse_grid(text: str) -> List[float]:
    """Parse ``lo:hi:count`` as a geometric grid, else a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"--t-grid expects lo:hi:count, got {text!r}")
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        if lo <= 0 or hi <= lo or count < 2:
            raise ValueError("grid spec needs 0 < lo < hi and count >= 2")
        return [float(v) for v in np.geomspace(lo, hi, count)]
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ValueError("empty grid")
    return values


def _parse_int_list(text: str) -> List[int]:
    values = [int(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ValueError("empty list")
    return values


def _jsonify(obj):
    """Recursively convert numpy scalars/arrays so json.dumps accepts them."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _spec(args) -> EnsembleSpec:
    return EnsembleSpec(EnsembleKind(args.kind), args.dim)


def _stream(args) -> RngStream:
    return RngStream(args.seed, args.stream)


def _echo(args, *fields: str) -> dict:
    """RunConfig echo: the semantic flags that determine the result.

    ``--workers`` and ``--out`` are execution details; they never influence
    a result, so they are excluded to keep documents byte-comparable across
    worker counts.
    """
    config = {"subcommand": args.command}
    for f in fields:
        config[f] = getattr(args, f)
    return config


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcsparse",
        description="Sparse-vector tail checks and restricted isometry "
        "experiments for isotropic log-concave ensembles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, dim=True):
        p.add_argument("--kind", choices=_KINDS, default="ExponentialProduct",
                       help="ensemble to sample (default ExponentialProduct)")
        if dim:
            p.add_argument("--N", dest="dim", type=int, required=True,
                           help="ambient dimension N")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--stream", type=int, default=0,
                       help="stream index within the seed (default 0)")
        p.add_argument("--workers", type=int, default=default_workers(),
                       help="worker threads; never changes results")
        p.add_argument("--out", default=None,
                       help="output base path; writes BASE.json/.csv/.png")

    p = sub.add_parser("sample", help="draw a vector or matrix")
    common(p)
    p.add_argument("--n", type=int, default=0,
                   help="row count; 0 draws a single vector (default)")

    p = sub.add_parser("isotropy", help="mean/covariance/psi1 diagnostics")
    common(p)
    p.add_argument("--trials", type=int, default=100000)

    p = sub.add_parser("tails-paouris", help="Euclidean norm tail check")
    common(p)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--s-grid", dest="s_grid", default="1,1.5,2,3,4,6,8",
                   help="thresholds s (norm level sqrt(N)+s*sqrt(N))")
    p.add_argument("--moments", default="2,4,8",
                   help="moment orders for the ratio diagnostics")

    p = sub.add_parser("tails-proj", help="m-sparse projection sup tail check")
    common(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--t-grid", dest="t_grid", default="1:8:12")

    p = sub.add_parser("tails-order", help="order statistic tail check")
    common(p)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--t-grid", dest="t_grid", default="1:8:12")

    p = sub.add_parser("tails-count", help="exceedance count moment check")
    common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--scale", type=float, default=1.0,
                   help="admissibility floor scale (default 1)")

    p = sub.add_parser("tails-weighted", help="weighted sum tail check")
    common(p)
    p.add_argument("--weights", required=True,
                   help="comma list; Euclidean norm at most 1")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--trials", type=int, default=20000)
    p.add_argument("--t-grid", dest="t_grid", default="1:8:10")
    p.add_argument("--directions", type=int, default=32)

    p = sub.add_parser("tails-akm", help="submatrix norm tail check")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--t-grid", dest="t_grid", default="0.5:3:6")
    p.add_argument("--pair-budget", dest="pair_budget", type=int, default=200000)
    p.add_argument("--restarts", type=int, default=8)

    p = sub.add_parser("kls-rate", help="Gram deviation rate in n")
    common(p)
    p.add_argument("--n-grid", dest="n_grid", default="8,32,128,512")
    p.add_argument("--trials", type=int, default=500)

    p = sub.add_parser("akm", help="submatrix operator norm of a sampled matrix")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--profile", action="store_true",
                   help="all k at once (exact), CSV table")
    p.add_argument("--lower", action="store_true",
                   help="alternating-maximization lower bound instead of exact")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--pair-budget", dest="pair_budget", type=int,
                   default=2000000)
    p.add_argument("--subset-budget", dest="subset_budget", type=int,
                   default=1 << 22)

    p = sub.add_parser("delta", help="restricted isometry deviation")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--exact", action="store_true", default=True)
    group.add_argument("--lower", action="store_true",
                       help="local-search lower bound instead of exact")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--subset-budget", dest="subset_budget", type=int,
                   default=1 << 22)

    p = sub.add_parser("thresholds", help="sparsity thresholds and block tables")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", dest="dim", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=float, default=None,
                   help="also evaluate the moment-threshold cut at this t")
    p.add_argument("--b", type=float, default=None,
                   help="also evaluate the secondary threshold at this b")
    p.add_argument("--C", type=float, default=1.0,
                   help="cutoff scale constant (default 1)")
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=default_workers())

    p = sub.add_parser("net-audit", help="sparse net decomposition invariants")
    common(p, dim=False)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", dest="dim", type=int, default=None,
                   help="column dimension (default: n)")
    p.add_argument("--trials", type=int, default=10000)

    p = sub.add_parser("rip-cert", help="restricted isometry certificate")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--theta", type=float, default=0.25)
    p.add_argument("--B", dest="b_level", type=float, default=None,
                   help="truncation level; default derived from the entropy budget")
    p.add_argument("--replicas", type=int, default=200)

    p = sub.add_parser("rip-admissible", help="largest admissible sparsity scan")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", dest="dim", type=int, required=True)
    p.add_argument("--theta", type=float, default=0.25)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=default_workers())

    p = sub.add_parser("recover", help="planted sparse recovery trials")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", dest="sparsity", type=int, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--rtol", type=float, default=1e-4,
                   help="relative error counted as success")

    p = sub.add_parser("phase", help="recovery phase diagram over sparsities")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s-grid", dest="s_grid", default="1,2,4,8,16",
                   help="comma list of sparsities")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--theta", type=float, default=0.25)
    p.add_argument("--rtol", type=float, default=1e-4)

    return parser


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

CsvSpec = Optional[Tuple[List[str], List[list]]]
FigSpec = Optional[Callable[[str], None]]


def _curve_csv(report_dict: dict) -> CsvSpec:
    rows = [[r["threshold"], r["survival"]] for r in report_dict["curve"]]
    return (["threshold", "survival"], rows)


def _survival_fig(report_dict: dict, title: str) -> FigSpec:
    def render(path: str) -> None:
        from .plots import plot_survival

        plot_survival(report_dict["curve"], title, path)

    return render


def _cmd_sample(args):
    spec, st = _spec(args), _stream(args)
    if args.n > 0:
        values = sample_matrix(spec, args.n, st).values
        rows = [list(map(float, row)) for row in values]
    else:
        rows = [list(map(float, sample_vector(spec, st)))]
    header = [f"c{j}" for j in range(args.dim)]
    result = {"values": rows if args.n > 0 else rows[0], "n_rows": args.n}
    return result, (header, rows), None


def _cmd_isotropy(args):
    report = isotropy_report(_spec(args), args.trials, _stream(args))
    return report.to_dict(), None, None


def _cmd_tails_paouris(args):
    report = tailcheck.check_euclid_norm(
        _spec(args),
        s_grid=np.asarray(_parse_grid(args.s_grid)),
        trials=args.trials,
        stream=_stream(args),
        moment_orders=tuple(_parse_int_list(args.moments)),
    ).to_dict()
    return report, _curve_csv(report), _survival_fig(report, "Euclidean norm tail")


def _cmd_tails_proj(args):
    report = tailcheck.check_projection_sup(
        _spec(args),
        m=args.m,
        t_grid=np.asarray(_parse_grid(args.t_grid)),
        trials=args.trials,
        stream=_stream(args),
    ).to_dict()
    return report, _curve_csv(report), _survival_fig(report, f"top-{args.m} projection tail")


def _cmd_tails_order(args):
    report = tailcheck.check_order_stat(
        _spec(args),
        ell=args.ell,
        t_grid=np.asarray(_parse_grid(args.t_grid)),
        trials=args.trials,
        stream=_stream(args),
    ).to_dict()
    return report, _curve_csv(report), _survival_fig(report, f"order statistic {args.ell} tail")


def _cmd_tails_count(args):
    result = tailcheck.check_count_moments(
        _spec(args),
        t=args.t,
        p=args.p,
        trials=args.trials,
        stream=_stream(args),
        admissibility_scale=args.scale,
    )
    return result, None, None


def _cmd_tails_weighted(args):
    weights = np.asarray(_parse_grid(args.weights))
    report = tailcheck.check_weighted_sum(
        _spec(args),
        weights=weights,
        m=args.m,
        ell=args.ell,
        t_grid=np.asarray(_parse_grid(args.t_grid)),
        trials=args.trials,
        stream=_stream(args),
        directions=args.directions,
    ).to_dict()
    return report, _curve_csv(report), _survival_fig(report, "weighted sum tail")


def _cmd_tails_akm(args):
    report = tailcheck.check_submatrix_tail(
        _spec(args),
        n_rows=args.n,
        k=args.k,
        m=args.m,
        t_grid=np.asarray(_parse_grid(args.t_grid)),
        trials=args.trials,
        stream=_stream(args),
        pair_budget=args.pair_budget,
        lower_restarts=args.restarts,
    ).to_dict()
    return report, _curve_csv(report), _survival_fig(report, "submatrix norm tail")


def _cmd_kls_rate(args):
    result = tailcheck.check_gram_convergence(
        _spec(args),
        n_grid=_parse_int_list(args.n_grid),
        trials=args.trials,
        stream=_stream(args),
    )
    per_n = {str(k): v for k, v in result["per_n"].items()}
    result["per_n"] = per_n
    header = ["n", "median", "mean", "q90"]
    rows = [
        [int(n), per_n[n]["median"], per_n[n]["mean"], per_n[n]["q90"]]
        for n in sorted(per_n, key=int)
    ]

    def render(path: str) -> None:
        from .plots import plot_gram_rate

        plot_gram_rate(per_n, "Gram deviation rate", path)

    return result, (header, rows), render


def _cmd_akm(args):
    mat = sample_matrix(_spec(args), args.n, _stream(args)).values
    if args.profile:
        profile = sparse_norms.akm_profile(mat, args.m, subset_budget=args.subset_budget)
        rows = [[k, float(v)] for k, v in enumerate(profile)]
        result = {"profile": [float(v) for v in profile], "m": args.m}
        return result, (["k", "value"], rows), None
    if args.lower:
        r = sparse_norms.akm_lower(mat, args.k, args.m, restarts=args.restarts,
                                   stream=_stream(args).offset(args.n))
    else:
        r = sparse_norms.akm_exact(mat, args.k, args.m, pair_budget=args.pair_budget)
    result = {
        "value": r.value,
        "row_subset": list(r.row_subset),
        "col_subset": list(r.col_subset),
        "evaluations": r.evaluations,
        "exact": r.exact,
    }
    return result, None, None


def _cmd_delta(args):
    mat = sample_matrix(_spec(args), args.n, _stream(args)).values
    if args.lower:
        r = sparse_norms.delta_m_lower(mat, args.m, restarts=args.restarts,
                                       stream=_stream(args).offset(args.n))
    else:
        r = sparse_norms.delta_m_exact(mat, args.m, subset_budget=args.subset_budget)
    result = {
        "value": r.value,
        "col_subset": list(r.col_subset),
        "side": r.side,
        "evaluations": r.evaluations,
        "exact": r.exact,
    }
    return result, None, None


def _cmd_thresholds(args):
    n, n_cols, m, k = args.n, args.dim, args.m, args.k
    kp = sparse_norms.k_prime(m, n, n_cols)
    result = {
        "lambda_km": sparse_norms.lambda_km(k, m, n, n_cols),
        "lambda_m": sparse_norms.lambda_m(m, n, n_cols),
        "k_prime": kp,
        "b_m": recovery._b_m(m, n, n_cols),
    }
    csv_spec = None
    try:
        sizes = sparse_norms.choose_block_sizes(k, m, n, n_cols)
        g_rows = [
            [i + 1, int(s), sparse_norms.g_function(float(s), m, n_cols)]
            for i, s in enumerate(sizes.sizes)
        ]
        result["block_sizes"] = list(sizes.sizes)
        result["block_count"] = sizes.s
        result["g_table"] = [
            {"i": r[0], "size": r[1], "g": r[2]} for r in g_rows
        ]
        csv_spec = (["i", "size", "g"], g_rows)
    except ValueError as exc:
        result["block_sizes"] = None
        result["block_sizes_error"] = str(exc)
    if args.t is not None:
        from .spectra import SigmaModel, m0_threshold, omega_cutoff

        model = SigmaModel.generic_log_concave()
        m0 = m0_threshold(model, args.t, m, n_cols)
        result["m0"] = m0.value
        result["m0_empty"] = m0.empty
        result["omega_cutoff"] = omega_cutoff(args.t, m, n_cols, scale=args.C)
    if args.b is not None:
        from .spectra import m1_threshold

        result["m1"] = m1_threshold(args.b, m, n_cols)
    return result, csv_spec, None


def _cmd_net_audit(args):
    n = args.n
    n_cols = args.dim if args.dim is not None else n
    sizes = sparse_norms.choose_block_sizes(args.k, args.m, n, n_cols)
    rng = _stream(args).generator()
    cap = args.k / (2.0 * n)
    violations = {"deviation": 0, "weight": 0, "support": 0}
    max_dev = 0.0
    max_weight = 0.0
    for _ in range(args.trials):
        support = rng.choice(n, size=args.k, replace=False)
        x = np.zeros(n)
        coefs = rng.standard_normal(args.k)
        x[support] = coefs / np.linalg.norm(coefs)
        dec = sparse_norms.sparse_net_project(x, sizes)
        dev = float(np.linalg.norm(x - dec.projection))
        weight = float(
            sum(
                c * float(np.max(np.abs(vals)) ** 2)
                for c, (_, vals) in zip(dec.cap_sizes, dec.blocks)
                if vals.size
            )
        )
        max_dev = max(max_dev, dev)
        max_weight = max(max_weight, weight)
        if dev > cap + 1e-12:
            violations["deviation"] += 1
        if weight > 4.0 + 1e-12:
            violations["weight"] += 1
        supports = [idx for idx, _ in dec.blocks]
        flat = np.concatenate(supports) if supports else np.array([], dtype=int)
        if flat.size != np.unique(flat).size or any(
            idx.size > ki for idx, ki in zip(supports, sizes.sizes)
        ):
            violations["support"] += 1
    result = {
        "trials": args.trials,
        "violations": violations,
        "max_deviation": max_dev,
        "deviation_cap": cap,
        "max_weight_sum": max_weight,
        "block_sizes": list(sizes.sizes),
        "block_count": sizes.s,
    }
    rows = [[i + 1, int(s)] for i, s in enumerate(sizes.sizes)]
    return result, (["i", "size"], rows), None


def _cmd_rip_cert(args):
    st = _stream(args)
    mat = sample_matrix(_spec(args), args.n, st)
    cert = recovery.rip_certificate(
        mat,
        m=args.m,
        theta=args.theta,
        replicas=args.replicas,
        stream=st.offset(args.n),
        b_level=args.b_level,
    )
    result = {
        "m": cert.m,
        "theta": cert.theta,
        "b_level": cert.b_level,
        "k_star": cert.k_star,
        "akm_value": cert.akm_value,
        "mean_sq_estimate": cert.mean_sq_estimate,
        "bound": cert.bound,
        "replicas": cert.replicas,
        "admissible": cert.admissible,
        "admissible_margin": cert.admissible_margin,
        "truncated_moment_estimate": cert.truncated_moment_estimate,
    }
    return result, None, None


def _cmd_rip_admissible(args):
    result = recovery.rip_admissible_m(args.n, args.dim, args.theta,
                                       c=args.c, c1=args.c1)
    return result, None, None


def _cmd_recover(args):
    spec, st = _spec(args), _stream(args)

    def one(t: int):
        return recovery.recovery_trial(
            spec, args.n, args.sparsity, st.offset(t * (args.n + 1)),
            success_rtol=args.rtol,
        )

    trials = run_indexed(args.trials, one, args.workers)
    successes = sum(t.success for t in trials)
    rel_errors = [t.rel_error for t in trials]
    result = {
        "trials": args.trials,
        "successes": successes,
        "success_rate": successes / args.trials,
        "rel_error_median": float(np.median(rel_errors)),
        "rel_error_max": float(np.max(rel_errors)),
        "all_converged": all(t.converged for t in trials),
    }
    header = ["trial", "rel_error", "iterations", "converged", "success"]
    rows = [
        [i, t.rel_error, t.iterations, int(t.converged), int(t.success)]
        for i, t in enumerate(trials)
    ]
    return result, (header, rows), None


def _cmd_phase(args):
    diagram = recovery.phase_diagram(
        _spec(args),
        n_rows=args.n,
        sparsity_grid=_parse_int_list(args.s_grid),
        trials_per_cell=args.trials,
        stream=_stream(args),
        theta=args.theta,
        success_rtol=args.rtol,
        workers=args.workers,
    )
    result = diagram.to_dict()
    header = ["sparsity", "trials", "successes", "rate", "stderr"]
    rows = [
        [c["sparsity"], c["trials"], c["successes"], c["rate"], c["stderr"]]
        for c in diagram.cells
    ]

    def render(path: str) -> None:
        from .plots import plot_phase

        plot_phase(diagram.cells, "Recovery phase diagram", path)

    return result, (header, rows), render


_DISPATCH = {
    "sample": (_cmd_sample, ("kind", "dim", "n", "seed", "stream")),
    "isotropy": (_cmd_isotropy, ("kind", "dim", "trials", "seed", "stream")),
    "tails-paouris": (
        _cmd_tails_paouris,
        ("kind", "dim", "trials", "s_grid", "moments", "seed", "stream"),
    ),
    "tails-proj": (
        _cmd_tails_proj,
        ("kind", "dim", "m", "trials", "t_grid", "seed", "stream"),
    ),
    "tails-order": (
        _cmd_tails_order,
        ("kind", "dim", "ell", "trials", "t_grid", "seed", "stream"),
    ),
    "tails-count": (
        _cmd_tails_count,
        ("kind", "dim", "t", "p", "trials", "scale", "seed", "stream"),
    ),
    "tails-weighted": (
        _cmd_tails_weighted,
        ("kind", "dim", "weights", "m", "ell", "trials", "t_grid",
         "directions", "seed", "stream"),
    ),
    "tails-akm": (
        _cmd_tails_akm,
        ("kind", "dim", "n", "k", "m", "trials", "t_grid", "pair_budget",
         "restarts", "seed", "stream"),
    ),
    "kls-rate": (
        _cmd_kls_rate,
        ("kind", "dim", "n_grid", "trials", "seed", "stream"),
    ),
    "akm": (
        _cmd_akm,
        ("kind", "dim", "n", "k", "m", "profile", "lower", "restarts",
         "pair_budget", "subset_budget", "seed", "stream"),
    ),
    "delta": (
        _cmd_delta,
        ("kind", "dim", "n", "m", "lower", "restarts", "subset_budget",
         "seed", "stream"),
    ),
    "thresholds": (_cmd_thresholds, ("n", "dim", "m", "k", "t", "b", "C")),
    "net-audit": (
        _cmd_net_audit,
        ("kind", "k", "m", "n", "dim", "trials", "seed", "stream"),
    ),
    "rip-cert": (
        _cmd_rip_cert,
        ("kind", "dim", "n", "m", "theta", "b_level", "replicas", "seed",
         "stream"),
    ),
    "rip-admissible": (_cmd_rip_admissible, ("n", "dim", "theta", "c", "c1")),
    "recover": (
        _cmd_recover,
        ("kind", "dim", "n", "sparsity", "trials", "rtol", "seed", "stream"),
    ),
    "phase": (
        _cmd_phase,
        ("kind", "dim", "n", "s_grid", "trials", "theta", "rtol", "seed",
         "stream"),
    ),
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _emit(doc: dict, csv_spec: CsvSpec, fig: FigSpec, out: Optional[str]) -> None:
    text = json.dumps(_jsonify(doc), sort_keys=True, indent=2) + "\n"
    sys.stdout.write(text)
    if out is None:
        return
    with open(out + ".json", "w", encoding="utf-8") as fh:
        fh.write(text)
    if csv_spec is not None:
        header, rows = csv_spec
        with open(out + ".csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    if fig is not None:
        fig(out + ".png")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler, fields = _DISPATCH[args.command]
    try:
        result, csv_spec, fig = handler(args)
    except (BudgetExceeded, ConvergenceFailure) as exc:
        sys.stderr.write(f"aborted: {exc}\n")
        return 3
    except ValueError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    doc = {
        "command": args.command,
        "config": _echo(args, *fields),
        "result": result,
    }
    _emit(doc, csv_spec, fig, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
