"""Command-line front end.

Subcommands: simulate, estimate, asymptotics, spectrum, mc-study. Outputs are
plot-ready CSV tables plus JSON summaries; no plotting. Failures print a JSON
object {"error", "message"} to stderr and exit nonzero. A JSON file passed
via --config supplies parameter values by their dest names; flags given on
the command line take precedence, unknown config keys are rejected.
"""

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from dataclasses import replace as dc_replace

import numpy as np

from cmakit import seriesio
from cmakit.carma import CarmaModel
from cmakit.empirical import periodogram, spectrum_from_kernel, splice_spectra, structure_function, welch
from cmakit.errors import CmakitError, DomainError
from cmakit.estimators import estimate_kernel, exact_acvf, sample_acvf
from cmakit.simulate import GammaKernelModel, SimulationPlan, simulate_carma_statespace, simulate_gaussian_cma
from cmakit.spectral import c_alpha, kolmogorov_sigma2, s_p_alpha, tail_index_diagnostic
from cmakit.wold import alpha_polynomial, asymptotic_sigma2_delta, eta_of_xi

TWO_PI = 2.0 * math.pi


@dataclass
class RunConfig:
    """Validated parameter block for one subcommand invocation."""

    subcommand: str
    params: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.params[name]
        except KeyError:
            raise AttributeError(name) from None


def _parse_floats(text):
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise DomainError(f"expected a comma-separated float list, got {text!r}") from exc


def _build_model(cfg):
    kind = cfg.model
    if kind == "gamma":
        return GammaKernelModel(nu=cfg.nu, lam=cfg.lam, sigma2=cfg.sigma2)
    if kind == "carma":
        if cfg.a is None:
            raise DomainError("carma model needs --a coefficients")
        a = _parse_floats(cfg.a)
        b = _parse_floats(cfg.b) if cfg.b else [1.0]
        return CarmaModel(a=a, b=b, sigma2=cfg.sigma2)
    raise DomainError(f"unknown model kind {kind!r}")


def _simulate_series(model, cfg, stream=0):
    plan = SimulationPlan.refined(
        out_delta=cfg.delta,
        n_out=cfg.n,
        seed=cfg.seed,
        factor=cfg.refine,
        driver=cfg.driver,
        cp_rate=cfg.cp_rate,
        stream=stream,
    )
    if isinstance(model, GammaKernelModel):
        if cfg.driver != "gaussian":
            raise DomainError("gamma-kernel simulation supports the gaussian driver only")
        return simulate_gaussian_cma(model.autocovariance, plan)
    return simulate_carma_statespace(model, plan)


def _model_meta(model):
    if isinstance(model, GammaKernelModel):
        return {"kind": "gamma", "nu": model.nu, "lambda": model.lam, "sigma2": model.sigma2}
    return {"kind": "carma", "a": list(model.a), "b": list(model.b), "sigma2": model.sigma2}


def cmd_simulate(cfg):
    if cfg.n <= 0:
        raise DomainError("n must be positive")
    model = _build_model(cfg)
    series = _simulate_series(model, cfg)
    seriesio.write_series(
        cfg.out,
        series,
        fmt=cfg.format,
        extra_meta={"seed": cfg.seed, "model": _model_meta(model), "driver": cfg.driver},
    )
    return [cfg.out, cfg.out + ".json"]


def _method_name(short):
    return {"dl": "durbin-levinson", "durbin-levinson": "durbin-levinson", "innovations": "innovations"}.get(short) or short


def cmd_estimate(cfg):
    method = _method_name(cfg.method)
    if cfg.from_exact_acvf:
        model = _build_model(cfg)
        if cfg.delta is None:
            raise DomainError("--delta required with --from-exact-acvf")
        n_grid = int(round(cfg.tmax / cfg.delta))
        m = cfg.m if cfg.m is not None else 3 * n_grid
        data = exact_acvf(model, cfg.delta, m)
    else:
        if cfg.input is None:
            raise DomainError("need --input or --from-exact-acvf")
        data = seriesio.read_series(cfg.input)
    est = estimate_kernel(data, t_max=cfg.tmax, method=method, m=cfg.m, offset_h=cfg.h)

    csv_path = cfg.out + ".csv"
    if est.band is not None:
        seriesio.write_table(csv_path, [est.t, est.g_hat, est.band], ["t", "g_hat", "band"])
    else:
        seriesio.write_table(csv_path, [est.t, est.g_hat], ["t", "g_hat"])
    summary = {
        "method": est.method,
        "m": est.m_used,
        "v_hat": est.v_hat,
        "delta": est.delta,
        "offset_h": est.offset_h,
        "n_points": est.n_points,
        "n": est.n,
    }
    json_path = cfg.out + ".json"
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [csv_path, json_path]


def cmd_asymptotics(cfg):
    out = cfg.out
    if cfg.table == "c-alpha":
        alphas = np.geomspace(cfg.start, cfg.stop, cfg.points)
        if cfg.start <= 2.0 <= cfg.stop:
            # pin the known calibration point alpha=2 onto the grid
            alphas = np.unique(np.append(alphas, 2.0))
        vals = np.array([c_alpha(a) for a in alphas])
        seriesio.write_table(out, [alphas, vals], ["alpha", "c_alpha"])
    elif cfg.table == "s-alpha":
        alphas = np.geomspace(cfg.start, cfg.stop, cfg.points)
        vals = np.array([s_p_alpha(cfg.p, a) for a in alphas])
        seriesio.write_table(out, [alphas, vals], ["alpha", f"s_{cfg.p}_alpha"])
    elif cfg.table == "xi":
        if cfg.pq is None or cfg.pq < 1:
            raise DomainError("xi table needs --pq >= 1")
        poly = alpha_polynomial(cfg.pq - 1)
        xis = poly.roots
        etas = np.array([eta_of_xi(x) for x in xis])
        seriesio.write_table(out, [xis.real, etas.real], ["xi", "eta"])
    elif cfg.table == "sigma2-ratio":
        model = _build_model(cfg)
        if not isinstance(model, CarmaModel):
            raise DomainError("sigma2-ratio table needs a carma model")
        if cfg.deltas is None:
            raise DomainError("sigma2-ratio table needs --deltas")
        deltas = _parse_floats(cfg.deltas)
        asym, kolm = [], []
        for d in deltas:
            asym.append(asymptotic_sigma2_delta(model, d))
            kolm.append(kolmogorov_sigma2(lambda w: model.sampled_spectral_density(d, w)))
        asym, kolm = np.array(asym), np.array(kolm)
        seriesio.write_table(
            out,
            [np.array(deltas), asym, kolm, asym / kolm],
            ["delta", "sigma2_asymptotic", "sigma2_kolmogorov", "ratio"],
        )
    else:
        raise DomainError(f"unknown asymptotics table {cfg.table!r}")
    return [out]


def cmd_spectrum(cfg):
    series = seriesio.read_series(cfg.input)
    n = series.n
    delta = series.delta
    written = []

    acf_lags = min(n - 1, cfg.acf_lags)
    acvf = sample_acvf(series, acf_lags)
    acf_path = cfg.out + "_acf.csv"
    seriesio.write_table(
        acf_path,
        [np.arange(acf_lags + 1) * delta, acvf.gamma / acvf.gamma[0]],
        ["lag_time", "acf"],
    )
    written.append(acf_path)

    segment = min(cfg.segment, n)
    wspec = welch(series, segment, overlap=cfg.overlap).to_hz(delta)
    pspec = periodogram(series).to_hz(delta)
    spec = splice_spectra(pspec, wspec, cfg.splice_hz) if pspec.freqs[0] < cfg.splice_hz else wspec
    spec_path = cfg.out + "_spectrum.csv"
    seriesio.write_table(spec_path, [spec.freqs, spec.values], ["freq_hz", "density"])
    written.append(spec_path)

    est = estimate_kernel(series, t_max=cfg.tmax, method=_method_name(cfg.method), m=cfg.m, offset_h=cfg.h)
    kern_path = cfg.out + "_kernel.csv"
    seriesio.write_table(kern_path, [est.t, est.g_hat, est.band], ["t", "g_hat", "band"])
    written.append(kern_path)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        kspec = spectrum_from_kernel(est).to_hz()
    kspec_path = cfg.out + "_kernel_spectrum.csv"
    seriesio.write_table(kspec_path, [kspec.freqs, kspec.values], ["freq_hz", "density"])
    written.append(kspec_path)

    nyquist = 0.5 / delta
    band = tuple(_parse_floats(cfg.band)) if cfg.band else (0.02 * nyquist, 0.5 * nyquist)
    if len(band) != 2:
        raise DomainError("--band needs exactly two values lo,hi")
    summary = {
        "n": n,
        "delta": delta,
        "welch_segment": segment,
        "splice_hz": cfg.splice_hz,
        "tail_band_hz": list(band),
        "tail_index": tail_index_diagnostic(spec.freqs, spec.values, band),
        "structure_fn_delta": structure_function(series, delta),
        "kernel_m": est.m_used,
        "kernel_method": est.method,
    }
    json_path = cfg.out + ".json"
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(json_path)
    return written


def _mc_replication(payload):
    """One simulate+estimate replication; importable for process pools."""
    cfg = RunConfig(subcommand="mc-study", params=payload)
    model = _build_model(cfg)
    series = _simulate_series(model, cfg, stream=payload["rep"])
    # the model mean is exactly zero, so skip re-centering in the estimator
    series = dc_replace(series, mean_removed=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        est = estimate_kernel(series, t_max=payload["tmax"], method=payload["est_method"], m=payload["m"], offset_h=payload["h"])
    return payload["rep"], float(est(payload["t"]))


def cmd_mc_study(cfg):
    if cfg.reps < 1:
        raise DomainError("need at least one replication")
    model = _build_model(cfg)
    base = dict(cfg.params)
    base["est_method"] = _method_name(cfg.method)
    payloads = [dict(base, rep=r) for r in range(cfg.reps)]
    workers = int(os.environ.get("CMA_KERNEL_THREADS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = sorted(pool.map(_mc_replication, payloads, chunksize=8))
    else:
        results = sorted(_mc_replication(p) for p in payloads)
    reps = np.array([r for r, _ in results])
    values = np.array([v for _, v in results])

    csv_path = cfg.out + ".csv"
    seriesio.write_table(csv_path, [reps, values], ["rep", "g_hat"])
    written = [csv_path]

    j = int(math.floor(cfg.t / cfg.delta + 1e-12))
    t_eval = (j + cfg.h) * cfg.delta
    g_ref = float(model.kernel(t_eval)) if hasattr(model, "kernel") else None
    summary = {
        "t_request": cfg.t,
        "t_eval": t_eval,
        "g_ref": g_ref,
        "reps": cfg.reps,
        "n": cfg.n,
        "delta": cfg.delta,
        "m": cfg.m,
    }
    if cfg.reps > 1 and g_ref is not None:
        scaled = math.sqrt(cfg.n * cfg.delta) * (values - g_ref)
        summary["scaled_mean"] = float(np.mean(scaled))
        summary["scaled_var"] = float(np.var(scaled, ddof=1))
        if cfg.reps >= 20:
            from scipy.stats import normaltest

            summary["normality_pvalue"] = float(normaltest(scaled).pvalue)
    json_path = cfg.out + ".json"
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(json_path)
    return written


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": "UsageError", "message": message}), file=sys.stderr)
        raise SystemExit(2)


def _add_model_args(p):
    p.add_argument("--model", choices=["gamma", "carma"], default="gamma")
    p.add_argument("--nu", type=float, default=2.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--a", type=str, default=None, help="carma AR coefficients a1,..,ap")
    p.add_argument("--b", type=str, default=None, help="carma MA coefficients b0,..,bq (bq = 1)")


def _add_sim_args(p):
    p.add_argument("--delta", type=float, required=False, default=None)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--refine", type=int, default=16)
    p.add_argument("--driver", choices=["gaussian", "compound-poisson"], default="gaussian")
    p.add_argument("--cp-rate", dest="cp_rate", type=float, default=1.0)


def build_parser():
    parser = _Parser(prog="cmakit", description="kernel estimation for continuous-time moving averages")
    parser.add_argument("--config", type=str, default=None, help="JSON file with parameter values")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sim = sub.add_parser("simulate", parents=[], help="simulate a sampled CMA path")
    _add_model_args(p_sim)
    _add_sim_args(p_sim)
    p_sim.add_argument("--format", choices=["csv", "raw"], default="csv")
    p_sim.add_argument("--out", type=str, required=True)

    p_est = sub.add_parser("estimate", help="estimate the kernel from a series or exact ACVF")
    _add_model_args(p_est)
    p_est.add_argument("--input", type=str, default=None)
    p_est.add_argument("--from-exact-acvf", dest="from_exact_acvf", action="store_true")
    p_est.add_argument("--delta", type=float, default=None)
    p_est.add_argument("--tmax", type=float, default=8.0)
    p_est.add_argument("--method", choices=["innovations", "dl", "durbin-levinson"], default="innovations")
    p_est.add_argument("--m", type=int, default=None)
    p_est.add_argument("--h", type=float, default=0.5)
    p_est.add_argument("--out", type=str, required=True)

    p_asy = sub.add_parser("asymptotics", help="constants and ratio tables")
    p_asy.add_argument("table", choices=["c-alpha", "s-alpha", "xi", "sigma2-ratio"])
    _add_model_args(p_asy)
    p_asy.add_argument("--from", dest="start", type=float, default=1.1)
    p_asy.add_argument("--to", dest="stop", type=float, default=20.0)
    p_asy.add_argument("--points", type=int, default=50)
    p_asy.add_argument("--p", dest="p", type=int, default=1)
    p_asy.add_argument("--pq", type=int, default=None, help="p - q order for the xi/eta table")
    p_asy.add_argument("--deltas", type=str, default=None)
    p_asy.add_argument("--out", type=str, required=True)

    p_spec = sub.add_parser("spectrum", help="ACF, Welch/periodogram splice, kernel and its spectrum")
    p_spec.add_argument("--input", type=str, required=True)
    p_spec.add_argument("--segment", type=int, default=2**22)
    p_spec.add_argument("--overlap", type=float, default=0.5)
    p_spec.add_argument("--splice-hz", dest="splice_hz", type=float, default=1e-3)
    p_spec.add_argument("--tmax", type=float, default=8.0)
    p_spec.add_argument("--method", choices=["innovations", "dl", "durbin-levinson"], default="dl")
    p_spec.add_argument("--m", type=int, default=None)
    p_spec.add_argument("--h", type=float, default=0.5)
    p_spec.add_argument("--acf-lags", dest="acf_lags", type=int, default=512)
    p_spec.add_argument("--band", type=str, default=None, help="tail-index band lo,hi in Hz")
    p_spec.add_argument("--out", type=str, required=True)

    p_mc = sub.add_parser("mc-study", help="seeded replications of simulate + estimate")
    _add_model_args(p_mc)
    _add_sim_args(p_mc)
    p_mc.add_argument("--t", type=float, default=1.0)
    p_mc.add_argument("--reps", type=int, default=100)
    p_mc.add_argument("--tmax", type=float, default=None)
    p_mc.add_argument("--method", choices=["innovations", "dl", "durbin-levinson"], default="innovations")
    p_mc.add_argument("--m", type=int, default=None)
    p_mc.add_argument("--h", type=float, default=0.5)
    p_mc.add_argument("--out", type=str, required=True)

    return parser, sub


_COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "asymptotics": cmd_asymptotics,
    "spectrum": cmd_spectrum,
    "mc-study": cmd_mc_study,
}


def _apply_config_file(args, argv, sub):
    if not args.config:
        return
    with open(args.config) as fh:
        overrides = json.load(fh)
    chosen = sub.choices[args.subcommand]
    dest_to_opts = {
        act.dest: act.option_strings for act in chosen._actions if act.dest != "help"
    }
    for key, value in overrides.items():
        if key not in dest_to_opts:
            raise DomainError(f"unknown config key {key!r} for subcommand {args.subcommand}")
        explicit = any(opt in argv for opt in dest_to_opts[key])
        if not explicit:
            setattr(args, key, value)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub = build_parser()
    try:
        args = parser.parse_args(argv)
        _apply_config_file(args, argv, sub)
        params = {k: v for k, v in vars(args).items() if k not in ("subcommand", "config")}
        cfg = RunConfig(subcommand=args.subcommand, params=params)
        if cfg.subcommand == "mc-study" and cfg.params.get("tmax") is None:
            cfg.params["tmax"] = 2.0 * cfg.params["t"]
        _COMMANDS[cfg.subcommand](cfg)
    except SystemExit:
        raise
    except (CmakitError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
