"""Monte Carlo experiments over the synthetic designs.

Each experiment draws a fresh ground-truth model and path per replication
from named substreams of one master seed, so results are reproducible and
independent of how replications are scheduled across workers. Cell functions
return plain dicts; the ``table*_rows`` wrappers arrange them like the
benchmark tables for CSV export.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .autocov import (
    band,
    bootstrap_select_band,
    bootstrap_select_threshold,
    hard_threshold,
    sample_autocov,
)
from .estimation import fit_banded_var
from .forecast import predict
from .linalg import l1_norm, spectral_norm
from .model import BandedVarModel, theoretical_autocov_var1
from .rng import substream
from .selection import (
    joint_bic_from_surface,
    rss_surface,
    select_bandwidth_from_surface,
)
from .simulate import (
    gen_coeff_mixture,
    gen_coeff_uniform,
    gen_sigma_eps_structured,
    simulate_var,
)

__all__ = [
    "selection_frequency_cell",
    "estimation_error_cell",
    "frobenius_trend_cell",
    "autocov_error_cell",
    "ordering_prediction_cell",
    "table1_rows",
    "table2_rows",
    "table3_rows",
    "table4_rows",
    "table7_rows",
    "BENCH_TABLES",
]


def _map_reps(job, reps: int, threads: int):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(job, range(reps)))
    return [job(r) for r in range(reps)]


def _draw_coeff(setting: str, p: int, k0: int, rng, target_norm=None):
    if setting == "uniform":
        return gen_coeff_uniform(p, k0, rng, target_norm)
    if setting == "mixture":
        return gen_coeff_mixture(p, k0, rng, target_norm)
    raise ValueError(f"unknown setting {setting!r}")


def _draw_and_simulate(setting, p, k0, n, seed, rep, sigma=None, target_norm=None):
    a = _draw_coeff(setting, p, k0, substream(seed, "coeffs", rep), target_norm)
    model = BandedVarModel(p, 1, k0, [a], np.eye(p) if sigma is None else sigma)
    ts = simulate_var(model, n, rng=substream(seed, "innovations", rep))
    return model, ts


def _freq(picks, k0) -> dict:
    picks = np.asarray(picks)
    total = picks.size
    return {
        "equal": 100.0 * float((picks == k0).sum()) / total,
        "over": 100.0 * float((picks > k0).sum()) / total,
        "under": 100.0 * float((picks < k0).sum()) / total,
    }


def selection_frequency_cell(
    setting: str,
    p: int,
    k0: int,
    n: int = 200,
    reps: int = 100,
    K: int = 15,
    seed: int = 0,
    include_zero: bool = False,
    with_joint: bool = True,
    threads: int = 1,
) -> dict:
    """How often the per-equation and whole-model selectors recover k0.

    Both selectors see the same replications (shared RSS surfaces), so their
    frequencies are directly comparable.
    """

    def job(rep):
        _, ts = _draw_and_simulate(setting, p, k0, n, seed, rep)
        surface = rss_surface(ts, d=1, K=K, include_zero=include_zero)
        k_marginal = select_bandwidth_from_surface(surface).k_hat
        k_joint = joint_bic_from_surface(surface)[0] if with_joint else None
        return k_marginal, k_joint

    picks = _map_reps(job, reps, threads)
    out = {"marginal": _freq([k for k, _ in picks], k0)}
    if with_joint:
        out["joint"] = _freq([kj for _, kj in picks], k0)
    return out


def estimation_error_cell(
    setting: str,
    p: int,
    k0: int,
    n: int = 200,
    reps: int = 100,
    K: int = 15,
    seed: int = 0,
    threads: int = 1,
) -> dict:
    """Coefficient-matrix errors with a selected bandwidth vs the true one."""

    def job(rep):
        model, ts = _draw_and_simulate(setting, p, k0, n, seed, rep)
        truth = model.coeffs[0].to_dense()
        surface = rss_surface(ts, d=1, K=K)
        k_hat = select_bandwidth_from_surface(surface).k_hat
        est = fit_banded_var(ts, k_hat).model.coeffs[0].to_dense() - truth
        oracle = fit_banded_var(ts, k0).model.coeffs[0].to_dense() - truth
        return (
            l1_norm(est),
            spectral_norm(est),
            l1_norm(oracle),
            spectral_norm(oracle),
            k_hat,
        )

    rows = np.array(_map_reps(job, reps, threads))
    names = ("estimated_l1", "estimated_l2", "true_l1", "true_l2")
    out = {
        name: {"mean": float(rows[:, c].mean()), "sd": float(rows[:, c].std(ddof=1)) if reps > 1 else 0.0}
        for c, name in enumerate(names)
    }
    out["k_hat_mean"] = float(rows[:, 4].mean())
    return out


def frobenius_trend_cell(
    setting: str,
    p: int,
    k0: int,
    ns=(200, 800),
    reps: int = 50,
    seed: int = 0,
    threads: int = 1,
) -> dict:
    """Frobenius error of the true-bandwidth fit at several sample sizes.

    Each replication keeps one coefficient draw across all sample sizes, so
    the error ratios isolate the effect of n.
    """

    def job(rep):
        a = _draw_coeff(setting, p, k0, substream(seed, "coeffs", rep))
        model = BandedVarModel(p, 1, k0, [a], np.eye(p))
        truth = a.to_dense()
        errs = []
        for n in ns:
            ts = simulate_var(model, n, rng=substream(seed, "innovations", rep, n))
            fit = fit_banded_var(ts, k0).model.coeffs[0].to_dense()
            errs.append(float(np.sqrt(((fit - truth) ** 2).sum())))
        return errs

    rows = np.array(_map_reps(job, reps, threads))
    return {int(n): float(rows[:, c].mean()) for c, n in enumerate(ns)}


def autocov_error_cell(
    p: int,
    n: int = 200,
    reps: int = 100,
    q: int = 100,
    seed: int = 0,
    k0: int = 3,
    target_norm: float = 0.8,
    lags=(0, 1),
    threads: int = 1,
) -> dict:
    """Matrix L1 and spectral errors of banded, thresholded and raw sample
    autocovariance estimators against the model-implied truth."""

    def job(rep):
        sigma = gen_sigma_eps_structured(p)
        model, ts = _draw_and_simulate(
            "uniform", p, k0, n, seed, rep, sigma=sigma, target_norm=target_norm
        )
        sigma0 = theoretical_autocov_var1(model, 0)
        a = model.coeffs[0].to_dense()
        out = {}
        for j in lags:
            truth = sigma0 if j == 0 else sigma0 @ np.linalg.matrix_power(a.T, j)
            sample = sample_autocov(ts, j)
            pick_r = bootstrap_select_band(
                ts, j, q=q, rng=substream(seed, "bootstrap", rep, j, "band")
            ).argmin
            pick_t = bootstrap_select_threshold(
                ts, j, q=q, rng=substream(seed, "bootstrap", rep, j, "threshold")
            ).argmin
            banded = band(sample, int(pick_r))
            thresh = hard_threshold(sample, float(pick_t))
            out[j] = {
                "banding": (l1_norm(banded - truth), spectral_norm(banded - truth)),
                "thresholding": (l1_norm(thresh - truth), spectral_norm(thresh - truth)),
                "sample": (l1_norm(sample - truth), spectral_norm(sample - truth)),
                "r": int(pick_r),
                "t": float(pick_t),
            }
        return out

    results = _map_reps(job, reps, threads)
    cell = {}
    for j in lags:
        cell[j] = {}
        for method in ("banding", "thresholding", "sample"):
            l1s = np.array([res[j][method][0] for res in results])
            l2s = np.array([res[j][method][1] for res in results])
            cell[j][method] = {
                "l1_mean": float(l1s.mean()),
                "l1_sd": float(l1s.std(ddof=1)) if reps > 1 else 0.0,
                "l2_mean": float(l2s.mean()),
                "l2_sd": float(l2s.std(ddof=1)) if reps > 1 else 0.0,
            }
        cell[j]["r_selected"] = [res[j]["r"] for res in results]
        cell[j]["t_selected"] = [res[j]["t"] for res in results]
    return cell


def _local_permutation(p: int, rng, group: int = 5) -> np.ndarray:
    perm = np.arange(p)
    for g in range(p // group):
        sl = slice(g * group, (g + 1) * group)
        perm[sl] = perm[sl][rng.permutation(group)]
    return perm


def ordering_prediction_cell(
    p: int,
    n: int = 200,
    reps: int = 20,
    seed: int = 0,
    k0: int = 2,
    K: int = 15,
    threads: int = 1,
) -> dict:
    """Criterion scores, selected bandwidths and post-sample errors when the
    series order is true, locally shuffled, or fully random.

    Each replication simulates n + 2 observations; the last two are scored by
    one-step and two-step predictions from the end of the training window.
    Selection runs with the bandwidth-0 candidate enabled, since shuffled
    orderings often leave no usable neighbourhood structure.
    """

    def job(rep):
        model, full = _draw_and_simulate("uniform", p, k0, n + 2, seed, rep)
        orderings = [
            ("true", np.arange(p)),
            ("local", _local_permutation(p, substream(seed, "perm", rep, 0))),
            ("random1", substream(seed, "perm", rep, 1).permutation(p)),
            ("random2", substream(seed, "perm", rep, 2).permutation(p)),
        ]
        out = {}
        for name, perm in orderings:
            series = full.permuted(perm)
            train = series.window(0, n)
            surface = rss_surface(train, d=1, K=K, include_zero=True)
            trace = select_bandwidth_from_surface(surface)
            fit = fit_banded_var(train, trace.k_hat)
            pred = predict(fit.model, train, h=2)
            err1 = float(np.abs(pred[:, 0] - series.values[:, n]).mean())
            err2 = float(np.abs(pred[:, 1] - series.values[:, n + 1]).mean())
            out[name] = (trace.total_bic(), trace.k_hat, err1, err2)
        return out

    results = _map_reps(job, reps, threads)
    cell = {}
    for name in ("true", "local", "random1", "random2"):
        arr = np.array([res[name] for res in results])
        cell[name] = {
            "bic_mean": float(arr[:, 0].mean()),
            "bic_sd": float(arr[:, 0].std(ddof=1)) if reps > 1 else 0.0,
            "k_mean": float(arr[:, 1].mean()),
            "k_sd": float(arr[:, 1].std(ddof=1)) if reps > 1 else 0.0,
            "one_step_mean": float(arr[:, 2].mean()),
            "one_step_sd": float(arr[:, 2].std(ddof=1)) if reps > 1 else 0.0,
            "two_step_mean": float(arr[:, 3].mean()),
            "two_step_sd": float(arr[:, 3].std(ddof=1)) if reps > 1 else 0.0,
        }
    return cell


def table1_rows(ps, k0s, n=200, reps=100, K=15, seed=0, threads=1):
    rows = []
    for p in ps:
        for k0 in k0s:
            row = {"p": p, "k0": k0}
            for tag, setting in (("i", "uniform"), ("ii", "mixture")):
                cell = selection_frequency_cell(
                    setting, p, k0, n=n, reps=reps, K=K, seed=seed,
                    with_joint=False, threads=threads,
                )["marginal"]
                row[f"{tag}_equal"] = cell["equal"]
                row[f"{tag}_over"] = cell["over"]
                row[f"{tag}_under"] = cell["under"]
            rows.append(row)
    return rows


def table2_rows(ps, k0s, n=200, reps=100, K=15, seed=0, threads=1):
    rows = []
    for p in ps:
        for k0 in k0s:
            row = {"p": p, "k0": k0}
            for tag, setting in (("i", "uniform"), ("ii", "mixture")):
                cell = selection_frequency_cell(
                    setting, p, k0, n=n, reps=reps, K=K, seed=seed, threads=threads,
                )["joint"]
                row[f"{tag}_equal"] = cell["equal"]
                row[f"{tag}_over"] = cell["over"]
                row[f"{tag}_under"] = cell["under"]
            rows.append(row)
    return rows


def table3_rows(ps, k0s, n=200, reps=100, K=15, seed=0, threads=1):
    rows = []
    for p in ps:
        for k0 in k0s:
            cell = estimation_error_cell(
                "uniform", p, k0, n=n, reps=reps, K=K, seed=seed, threads=threads
            )
            rows.append(
                {
                    "p": p,
                    "k0": k0,
                    "estimated_l1_mean": cell["estimated_l1"]["mean"],
                    "estimated_l1_sd": cell["estimated_l1"]["sd"],
                    "estimated_l2_mean": cell["estimated_l2"]["mean"],
                    "estimated_l2_sd": cell["estimated_l2"]["sd"],
                    "true_l1_mean": cell["true_l1"]["mean"],
                    "true_l1_sd": cell["true_l1"]["sd"],
                    "true_l2_mean": cell["true_l2"]["mean"],
                    "true_l2_sd": cell["true_l2"]["sd"],
                }
            )
    return rows


def table4_rows(ps, n=200, reps=100, q=100, seed=0, k0=3, target_norm=0.8, threads=1):
    rows = []
    for p in ps:
        cell = autocov_error_cell(
            p, n=n, reps=reps, q=q, seed=seed, k0=k0, target_norm=target_norm,
            threads=threads,
        )
        for j in sorted(k for k in cell if isinstance(k, int)):
            for norm in ("l1", "l2"):
                rows.append(
                    {
                        "p": p,
                        "lag": j,
                        "norm": norm,
                        "banding_mean": cell[j]["banding"][f"{norm}_mean"],
                        "banding_sd": cell[j]["banding"][f"{norm}_sd"],
                        "thresholding_mean": cell[j]["thresholding"][f"{norm}_mean"],
                        "thresholding_sd": cell[j]["thresholding"][f"{norm}_sd"],
                        "sample_mean": cell[j]["sample"][f"{norm}_mean"],
                        "sample_sd": cell[j]["sample"][f"{norm}_sd"],
                    }
                )
    return rows


def table7_rows(ps, n=200, reps=20, k0=2, K=15, seed=0, threads=1):
    rows = []
    for p in ps:
        cell = ordering_prediction_cell(
            p, n=n, reps=reps, seed=seed, k0=k0, K=K, threads=threads
        )
        for name in ("true", "local", "random1", "random2"):
            stats = cell[name]
            rows.append({"p": p, "ordering": name, **stats})
    return rows


BENCH_TABLES = {
    "t1": table1_rows,
    "t2": table2_rows,
    "t3": table3_rows,
    "t4": table4_rows,
    "t7": table7_rows,
}
