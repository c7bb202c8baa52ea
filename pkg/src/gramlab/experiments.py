"""Named experiment recipes: depth profiles, width sweeps, bulk spectra,
coupled chains, and the raw-product appendixes, with CSV/SVG persistence.

Every recipe draws from streams derived off (master seed, variant index,
trial index), so per-trial work can be farmed to worker processes and
reassembled in a fixed order: outputs are byte-identical for any worker
count.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__, thresholds
from .activations import Activation
from .chain import (INPUT_STREAM_ID, ChainConfig, NormKind, _normalized_image,
                    correlated_input, orthonormal_input, run_trial)
from .errors import NoTransient
from .linalg import sym_eig
from .meanfield import centering_basis
from .randprod import (product_chain, union_bound_curve, wishart_det_mean,
                       wishart_logdet_slope)
from .report import ExperimentReport, aggregate_series
from .rng import RngStream, derive_base, gaussian_matrix
from .spectra import (MpLaw, default_drop_top, divergence, mp_band_fraction,
                      mp_ks_distance, mp_median, mp_pdf, ratio_deviation)
from .svg import Series, histogram_chart, line_chart

_VARIANT_SALT = 0x5EED


def _variant_seed(master_seed: int, index: int) -> int:
    return derive_base(master_seed, _VARIANT_SALT + index)


def centered_reference(n: int) -> np.ndarray:
    """(n/(n-1)) (I - 11^T/n): the identity-activation centered fixed point."""
    return (n / (n - 1.0)) * (np.eye(n) - np.ones((n, n)) / n)


def reference_for(norm: NormKind, n: int) -> np.ndarray:
    if norm is NormKind.CENTERED:
        return centered_reference(n)
    return np.eye(n)


# -- mixing-rate fit ----------------------------------------------------------

@dataclass(frozen=True)
class MixingEstimate:
    """Geometric decay rate fitted to a transient-plus-plateau series."""

    alpha_hat: float
    window: tuple[int, int]
    r_squared: float
    plateau: float


def fit_mixing_rate(series) -> MixingEstimate:
    """Fit log(series - plateau) over the transient; alpha = -2 * slope.

    The plateau estimate is the median of the last quarter of layers; the
    fit window runs from layer 0 to the first layer below 1.5x plateau.
    """
    s = np.asarray(series, dtype=np.float64)
    k = s.size
    tail = max(1, k // 4)
    plateau = float(np.median(s[k - tail:]))
    if k < 2 or not (s[0] >= 3.0 * plateau):
        raise NoTransient("series starts at its plateau")
    below = np.nonzero(s < 1.5 * plateau)[0]
    end = int(below[0]) if below.size else k
    idx = np.arange(end)
    excess = s[:end] - plateau
    keep = excess > 0.0
    idx, ylog = idx[keep], np.log(excess[keep])
    if idx.size < 5:
        raise NoTransient("transient window has fewer than 5 usable layers")
    slope, intercept = np.polyfit(idx, ylog, 1)
    fit = slope * idx + intercept
    sst = float(((ylog - ylog.mean()) ** 2).sum())
    ssr = float(((ylog - fit) ** 2).sum())
    r2 = 1.0 if sst == 0.0 else 1.0 - ssr / sst
    return MixingEstimate(alpha_hat=float(-2.0 * slope),
                          window=(int(idx[0]), int(idx[-1])),
                          r_squared=float(r2), plateau=plateau)


# -- shared plumbing ----------------------------------------------------------

def _run_jobs(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _series_rows(rows, variant, metric, values):
    """Append (trials, layers) values as long-format rows in fixed order."""
    trials, layers = values.shape
    for t in range(trials):
        for l in range(layers):
            rows.append((variant, t, l, metric, values[t, l]))


def _spike_gram(n: int, strength: float) -> np.ndarray:
    """(1-s) I + s n v v^T with v = (e1 - e2)/sqrt(2): a zero-sum spike,
    so it survives centering and the decay toward G* is visible."""
    v = np.zeros(n)
    v[0], v[1] = 1.0, -1.0
    v /= math.sqrt(2.0)
    return (1.0 - strength) * np.eye(n) + strength * n * np.outer(v, v)


# -- fig1a: depth profile, no-norm vs centered --------------------------------

def _depth_profile_job(args):
    seed, norm_name, n, d, depth, trial, h0, ref = args
    cfg = ChainConfig(n=n, d=d, depth=depth, activation=Activation("identity"),
                      norm=NormKind.from_string(norm_name), trials=1,
                      master_seed=seed)
    tr = run_trial(cfg, trial, input=h0, reference=ref, record_spectra=False)
    return tr.frob_err


def run_depth_profile(report: ExperimentReport, workers: int):
    c = report.config
    n, d, depth, trials = c["n"], c["d"], c["depth"], c["trials"]
    h0 = correlated_input(n, d, RngStream(report.master_seed, INPUT_STREAM_ID),
                          _spike_gram(n, c["spike"]))
    variants = ["none", "centered"]
    jobs = []
    for vi, name in enumerate(variants):
        ref = reference_for(NormKind.from_string(name), n)
        seed = _variant_seed(report.master_seed, vi)
        for t in range(trials):
            jobs.append((seed, name, n, d, depth, t, h0, ref))
    results = _run_jobs(_depth_profile_job, jobs, workers)
    layers = np.arange(depth + 1)
    for vi, name in enumerate(variants):
        errs = np.stack(results[vi * trials:(vi + 1) * trials])
        _series_rows(report.rows, name, "frob_err", errs)
        agg = aggregate_series(errs)
        agg["layers"] = layers
        report.aggregates[name] = agg
    report.derived["reference_none"] = "identity"
    report.derived["reference_centered"] = "centered projector scaled to trace n"
    mean_c = report.aggregates["centered"]["mean"]
    mean_n = report.aggregates["none"]["mean"]
    report.derived["final_none"] = float(mean_n[-1])
    report.derived["final_centered"] = float(mean_c[-1])
    report.derived["separation_final"] = float(mean_n[-1] / mean_c[-1])
    lo, hi = thresholds.DEPTH_PROFILE_PLATEAU_WINDOW
    if depth >= hi:
        w = mean_c[lo:hi + 1]
        report.derived["plateau_cv"] = float(w.std() / w.mean())
        mid = mean_c[lo:300 + 1].mean()
        late = mean_c[300:hi + 1].mean()
        report.derived["stability_ratio"] = float(late / mid)
    try:
        fit = fit_mixing_rate(mean_c)
        report.derived.update({
            "alpha_hat": fit.alpha_hat, "fit_r_squared": fit.r_squared,
            "fit_window_lo": fit.window[0], "fit_window_hi": fit.window[1],
            "fit_plateau": fit.plateau,
        })
    except NoTransient:
        report.derived["alpha_hat"] = float("nan")

    def plots(out_dir):
        ac, an = report.aggregates["centered"], report.aggregates["none"]
        line_chart(
            os.path.join(out_dir, "plot_fig1a.svg"),
            [Series("no norm (mean)", layers, an["mean"]),
             Series("centered (mean)", layers, ac["mean"]),
             Series("centered q05", layers, ac["q05"], color="#888888",
                    dashed=True),
             Series("centered q95", layers, ac["q95"], color="#888888",
                    dashed=True)],
            title=f"Gram error vs depth (n={n}, d={d})", xlabel="layer",
            ylabel="||G - G*||_F", ylog=True)
    return [plots]


# -- fig1b: width sweep of the centered plateau -------------------------------

def _width_sweep_job(args):
    seed, n, d, depth, trial, ref = args
    cfg = ChainConfig(n=n, d=d, depth=depth, activation=Activation("identity"),
                      norm=NormKind.CENTERED, trials=1, master_seed=seed)
    tr = run_trial(cfg, trial, reference=ref, record_spectra=False)
    return tr.frob_err


def run_width_sweep(report: ExperimentReport, workers: int):
    c = report.config
    n, depth, trials = c["n"], c["depth"], c["trials"]
    widths = [int(v) for v in c["widths"]]
    ref = centered_reference(n)
    jobs = []
    for vi, d in enumerate(widths):
        seed = _variant_seed(report.master_seed, vi)
        for t in range(trials):
            jobs.append((seed, n, d, depth, t, ref))
    results = _run_jobs(_width_sweep_job, jobs, workers)
    lo, hi = thresholds.WIDTH_SWEEP_PLATEAU_WINDOW
    layers = np.arange(depth + 1)
    plateaus = []
    for vi, d in enumerate(widths):
        errs = np.stack(results[vi * trials:(vi + 1) * trials])
        name = f"d{d}"
        _series_rows(report.rows, name, "frob_err", errs)
        agg = aggregate_series(errs)
        agg["layers"] = layers
        report.aggregates[name] = agg
        window = errs[:, lo + 1:hi]
        # shallow debug runs can end before the plateau window opens
        plateau = float(window.mean()) if window.size else float("nan")
        plateaus.append(plateau)
        report.derived[f"plateau_{name}"] = plateau
        report.derived[f"ratio_{name}"] = plateau / (2.0 * n / math.sqrt(d))
    if all(math.isfinite(p) for p in plateaus):
        slope = float(np.polyfit(np.log(widths), np.log(plateaus), 1)[0])
    else:
        slope = float("nan")
    report.derived["loglog_slope"] = slope
    report.derived["predicted_plateau_d1000000"] = 2.0 * n / 1000.0

    def plots(out_dir):
        guide = np.array([2.0 * n / math.sqrt(d) for d in widths])
        line_chart(
            os.path.join(out_dir, "plot_fig1b.svg"),
            [Series("plateau", np.array(widths, float), np.array(plateaus)),
             Series("2n/sqrt(d)", np.array(widths, float), guide,
                    dashed=True)],
            title=f"Plateau vs width (n={n})", xlabel="width d",
            ylabel="plateau of ||G - G*||_F", xlog=True, ylog=True,
            markers=True)
    return [plots]


# -- mp: bulk spectrum at moderate depth --------------------------------------

def _bulk_spectrum_job(args):
    seed, n, d, depth, norm_name, act_name, trial = args
    cfg = ChainConfig(n=n, d=d, depth=depth, activation=Activation(act_name),
                      norm=NormKind.from_string(norm_name), trials=1,
                      master_seed=seed)
    tr = run_trial(cfg, trial, record_spectra=True)
    return tr.eigenvalues


def run_bulk_spectrum(report: ExperimentReport, workers: int):
    c = report.config
    n, d, depth, trials = c["n"], c["d"], c["depth"], c["trials"]
    act = Activation(c["activation"])
    drop = c["drop_top"] if c["drop_top"] is not None else default_drop_top(act)
    seed = _variant_seed(report.master_seed, 0)
    jobs = [(seed, n, d, depth, c["norm"], c["activation"], t)
            for t in range(trials)]
    results = _run_jobs(_bulk_spectrum_job, jobs, workers)
    name = c["activation"]
    for i in range(n):
        vals = np.stack([r[:, i] for r in results])
        _series_rows(report.rows, name, f"lambda_{i + 1}", vals)
    final = np.stack([r[-1] for r in results])     # (trials, n), descending
    retained = final[:, drop:] if drop else final
    pooled = retained.ravel()
    law = MpLaw(n / d)
    ks = mp_ks_distance(pooled, law, drop_top=0)
    band = mp_band_fraction(pooled, n, d, drop_top=0,
                            half_width_mult=thresholds.MP_BAND_HALF_WIDTH_MULT)
    cut = 1.0 + thresholds.MP_OUTLIER_MULT * math.sqrt(n / d)
    exactly_one = 0
    for t in range(trials):
        med = float(np.median(retained[t]))
        outliers = int((final[t] / med > cut).sum())
        exactly_one += int(outliers == 1)
    report.derived.update({
        "ks": float(ks), "band_fraction": float(band),
        "drop_top": int(drop), "bulk_count": int(pooled.size),
        "outlier_exactly_one_fraction": exactly_one / trials,
    })
    report.aggregates[name] = {"final_eigenvalues": final,
                               "layers": np.arange(depth + 1)}

    def plots(out_dir):
        norm_pool = pooled / np.median(pooled)
        med = mp_median(law)
        xs = np.linspace(law.support[0] / med, law.support[1] / med, 400)
        ys = mp_pdf(xs * med, law) * med
        histogram_chart(
            os.path.join(out_dir, f"plot_mp_{name}.svg"), norm_pool, 40,
            title=f"Bulk spectrum vs MP law ({name}, n={n}, d={d}, "
                  f"layer {depth})",
            xlabel="eigenvalue / median",
            overlay_xs=xs, overlay_ys=ys, overlay_label="MP density")
    return [plots]


# -- coupling: shared weights, two inputs -------------------------------------

def _coupling_job(args):
    seed, n, d, depth, act_name, norm_name, variant, blend, trial = args
    act = Activation(act_name)
    norm = NormKind.from_string(norm_name)
    cfg = ChainConfig(n=n, d=d, depth=depth, activation=act, norm=norm,
                      trials=1, master_seed=seed)
    h0 = orthonormal_input(n, d, RngStream(seed, INPUT_STREAM_ID))
    if variant == "identical":
        h1 = h0.copy()
    elif variant == "orthogonal":
        h1 = orthonormal_input(n, d, RngStream(seed, INPUT_STREAM_ID + 1))
    else:
        other = orthonormal_input(n, d, RngStream(seed, INPUT_STREAM_ID + 1))
        h1 = math.sqrt(1.0 - blend * blend) * h0 + blend * other
    B = centering_basis(n)
    stream = RngStream(seed, trial)
    ratio = np.empty(depth + 1)
    sqdiv = np.empty(depth + 1)
    for layer in range(depth + 1):
        x0 = _normalized_image(h0, cfg)
        x1 = _normalized_image(h1, cfg)
        G0 = (x0.T @ x0) / d
        G0 = 0.5 * (G0 + G0.T)
        G1 = (x1.T @ x1) / d
        G1 = 0.5 * (G1 + G1.T)
        if np.array_equal(G0, G1):
            ratio[layer] = 0.0
            sqdiv[layer] = 0.0
        else:
            e0 = sym_eig(G0).eigenvalues
            e1 = sym_eig(G1).eigenvalues
            ratio[layer] = ratio_deviation(e0, e1)
            sqdiv[layer] = math.sqrt(divergence(B.T @ G0 @ B, B.T @ G1 @ B))
        if layer < depth:
            W = gaussian_matrix(stream, d, d, 1.0 / d)
            h0 = W @ x0
            h1 = W @ x1
    return ratio, sqdiv


def run_coupling(report: ExperimentReport, workers: int):
    c = report.config
    n, d, depth, trials = c["n"], c["d"], c["depth"], c["trials"]
    variants = ["identical", "orthogonal", "correlated"]
    jobs = []
    for vi, name in enumerate(variants):
        seed = _variant_seed(report.master_seed, vi)
        for t in range(trials):
            jobs.append((seed, n, d, depth, c["activation"], c["norm"], name,
                         c["blend"], t))
    results = _run_jobs(_coupling_job, jobs, workers)
    lo, hi = thresholds.COUPLING_PLATEAU_WINDOW
    layers = np.arange(depth + 1)
    for vi, name in enumerate(variants):
        chunk = results[vi * trials:(vi + 1) * trials]
        ratio = np.stack([r[0] for r in chunk])
        sqdiv = np.stack([r[1] for r in chunk])
        _series_rows(report.rows, name, "ratio_dev", ratio)
        _series_rows(report.rows, name, "sqrt_div", sqdiv)
        agg = aggregate_series(ratio)
        agg["layers"] = layers
        agg["sqrt_div_mean"] = sqdiv.mean(axis=0)
        report.aggregates[name] = agg
        if depth >= hi:
            report.derived[f"plateau_{name}"] = float(
                agg["mean"][lo:hi + 1].mean())
        if name == "identical":
            report.derived["identical_max_ratio_dev"] = float(
                np.abs(ratio).max())
            report.derived["identical_max_sqrt_div"] = float(
                np.abs(sqdiv).max())
    report.derived["plateau_limit"] = thresholds.coupling_plateau_limit(n, d)

    def plots(out_dir):
        series = [Series(v, layers, report.aggregates[v]["mean"])
                  for v in variants]
        line_chart(
            os.path.join(out_dir, "plot_coupling.svg"), series,
            title=f"Coupled-chain eigenvalue ratio deviation (n={n}, d={d})",
            xlabel="layer", ylabel="max |lam_i/lam'_i - 1|", ylog=True)
    return [plots]


# -- wishart-det: determinant moment checks -----------------------------------

def run_wishart_det(report: ExperimentReport, workers: int):
    c = report.config
    replicates, spr = c["replicates"], c["samples_per_replicate"]
    idx = []
    for vi, (n, d) in enumerate(c["cases"]):
        n, d = int(n), int(d)
        name = f"n{n}d{d}"
        seed = _variant_seed(report.master_seed, vi)
        means, errs = [], []
        for r in range(replicates):
            m, se, exact = wishart_det_mean(n, d, spr, RngStream(seed, r))
            means.append(m)
            errs.append(se)
            report.rows.append((name, r, 0, "det_mean", m))
        mc = float(np.mean(means))
        stderr = float(math.sqrt(sum(e * e for e in errs)) / replicates)
        report.derived[f"mc_{name}"] = mc
        report.derived[f"stderr_{name}"] = stderr
        report.derived[f"exact_{name}"] = exact
        idx.append((name, mc, stderr, exact))

    def plots(out_dir):
        xs = np.arange(1.0, len(idx) + 1.0)
        line_chart(
            os.path.join(out_dir, "plot_wishart_det.svg"),
            [Series("MC mean", xs, np.array([v[1] for v in idx])),
             Series("exact", xs, np.array([v[3] for v in idx]), dashed=True)],
            title="Wishart determinant mean: MC vs exact",
            xlabel="case index", ylabel="E det", markers=True)
    return [plots]


# -- product-decay: logdet slope and rank collapse ----------------------------

def _emit_product_rows(report, name, traces, depth):
    for metric, attr in (("logdet", "logdet"), ("cond", "cond"),
                         ("s2_over_s1", None)):
        for tr in traces:
            values = (tr.s2 / tr.s1) if attr is None else getattr(tr, attr)
            for l in range(depth + 1):
                report.rows.append((name, tr.trial, l, metric, values[l]))


def run_product_decay(report: ExperimentReport, workers: int):
    c = report.config
    trials = c["trials"]
    n_s, d_s, depth_s = (int(v) for v in c["slope_case"])
    n_c, d_c, depth_c = (int(v) for v in c["collapse_case"])

    slope_traces = product_chain(n_s, d_s, depth_s, trials,
                                 RngStream(_variant_seed(report.master_seed, 0), 0))
    _emit_product_rows(report, "slope", slope_traces, depth_s)
    ld = np.stack([t.logdet for t in slope_traces])
    mean_ld = ld.mean(axis=0)
    slope = float(np.polyfit(np.arange(depth_s + 1), mean_ld, 1)[0])
    exact = wishart_logdet_slope(n_s, d_s)
    report.derived.update({
        "measured_slope": slope, "exact_slope": exact,
        "slope_rel_err": abs(slope - exact) / abs(exact),
    })
    report.aggregates["slope"] = {"mean_logdet": mean_ld,
                                  "layers": np.arange(depth_s + 1)}

    collapse_traces = product_chain(n_c, d_c, depth_c, trials,
                                    RngStream(_variant_seed(report.master_seed, 1), 0))
    _emit_product_rows(report, "collapse", collapse_traces, depth_c)
    finals = []
    underflows = 0
    for t in collapse_traces:
        if t.underflow_layer is not None:
            # collapsed past measurable range before the last layer
            finals.append(0.0)
            underflows += 1
        else:
            finals.append(float(t.s2[-1] / t.s1[-1]))
    report.derived["collapse_median_final"] = float(np.median(finals))
    report.derived["underflow_fraction"] = underflows / trials
    med_curve = np.nanmedian(
        np.stack([np.where(np.isnan(t.s2), 0.0, t.s2)
                  / np.where(np.isnan(t.s1), 1.0, t.s1)
                  for t in collapse_traces]), axis=0)
    report.aggregates["collapse"] = {"median_ratio": med_curve,
                                     "layers": np.arange(depth_c + 1)}

    def plots(out_dir):
        layers = np.arange(depth_s + 1)
        line_chart(
            os.path.join(out_dir, "plot_product_logdet.svg"),
            [Series("mean logdet", layers, mean_ld),
             Series("exact slope", layers, exact * layers, dashed=True)],
            title=f"Product-chain logdet decay (n={n_s}, d={d_s})",
            xlabel="layer", ylabel="log det")
        line_chart(
            os.path.join(out_dir, "plot_product_collapse.svg"),
            [Series("median s2/s1", np.arange(depth_c + 1), med_curve)],
            title=f"Rank collapse of the raw product (n={n_c}, d={d_c})",
            xlabel="layer", ylabel="s2/s1", ylog=True)
    return [plots]


# -- union-bound: op-norm deviation vs the exponential envelope ---------------

def run_union_bound(report: ExperimentReport, workers: int):
    c = report.config
    n, d, trials = c["n"], c["d"], c["trials"]
    depths = [int(v) for v in c["depths"]]
    curve = union_bound_curve(n, d, depths, trials,
                              RngStream(_variant_seed(report.master_seed, 0), 0))
    for t in range(trials):
        for j, l in enumerate(curve.depths):
            report.rows.append(("main", t, l, "op_dev", curve.values[t, j]))
    report.aggregates["main"] = {
        "layers": np.array(curve.depths, dtype=float),
        "mean": curve.mean, "median": curve.median, "bound": curve.bound,
    }
    report.derived["fraction_below_bound"] = float(
        (curve.mean <= curve.bound).mean())
    i100 = curve.depths.index(100) if 100 in curve.depths else None
    i400 = curve.depths.index(400) if 400 in curve.depths else None
    if i100 is not None and i400 is not None:
        report.derived["median_growth_400_over_100"] = float(
            curve.median[i400] / curve.median[i100])

    def plots(out_dir):
        xs = np.array(curve.depths, dtype=float)
        line_chart(
            os.path.join(out_dir, "plot_union_bound.svg"),
            [Series("mean ||G - I||_op", xs, curve.mean),
             Series("exp(3nl/2d)", xs, curve.bound, dashed=True)],
            title=f"Gram deviation vs depth, no normalization (n={n}, d={d})",
            xlabel="layer", ylabel="operator norm", ylog=True, markers=True)
    return [plots]


# -- registry and orchestration -----------------------------------------------

DEFAULTS: dict[str, dict] = {
    "fig1a": {"n": 5, "d": 1000, "depth": 600, "trials": 10, "spike": 0.9},
    "fig1b": {"n": 10, "widths": [100, 200, 400, 800, 1600], "depth": 600,
              "trials": 4},
    "mp": {"n": 20, "d": 500, "depth": 10, "trials": 120,
           "activation": "relu", "norm": "centered", "drop_top": None},
    "coupling": {"n": 10, "d": 800, "depth": 200, "trials": 6,
                 "activation": "tanh", "norm": "centered", "blend": 0.1},
    "wishart-det": {"cases": [[1, 8], [2, 4], [3, 20]], "replicates": 8,
                    "samples_per_replicate": 25000},
    "product-decay": {"slope_case": [5, 50, 200], "collapse_case": [2, 20, 500],
                      "trials": 20},
    "union-bound": {"n": 5, "d": 1000,
                    "depths": [0, 25, 50, 100, 200, 300, 400, 600],
                    "trials": 4},
}

EXPERIMENTS = {
    "fig1a": run_depth_profile,
    "fig1b": run_width_sweep,
    "mp": run_bulk_spectrum,
    "coupling": run_coupling,
    "wishart-det": run_wishart_det,
    "product-decay": run_product_decay,
    "union-bound": run_union_bound,
}


def apply_overrides(config: dict, overrides: dict[str, str]) -> dict:
    """key=value strings from the CLI; values parse as JSON when they can."""
    out = dict(config)
    for key, raw in overrides.items():
        if key not in out:
            raise ValueError(f"unknown config key {key!r}; "
                             f"valid: {sorted(out)}")
        try:
            out[key] = json.loads(raw)
        except (json.JSONDecodeError, TypeError):
            out[key] = raw
    return out


def run_experiment(name: str, config: dict | None = None, master_seed: int = 0,
                   workers: int = 1, out_dir: str | None = None
                   ) -> ExperimentReport:
    """Run one registry experiment; persist CSV/manifest/SVG when out_dir set."""
    import time

    from .report import final_manifest, initial_manifest, write_series_csv
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}; "
                         f"valid: {sorted(EXPERIMENTS)}")
    full = dict(DEFAULTS[name])
    if config:
        for key in config:
            if key not in full:
                raise ValueError(f"unknown config key {key!r}; "
                                 f"valid: {sorted(full)}")
        full.update(config)
    report = ExperimentReport(name=name, config=full,
                              master_seed=master_seed, version=__version__)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        initial_manifest(out_dir, report)
    t0 = time.perf_counter()
    plot_fns = EXPERIMENTS[name](report, workers)
    report.duration = time.perf_counter() - t0
    if out_dir is not None:
        write_series_csv(os.path.join(out_dir, "series.csv"), name,
                         report.rows)
        for fn in plot_fns:
            fn(out_dir)
        final_manifest(out_dir, report)
    return report
