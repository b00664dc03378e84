"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure. The worker count for sweeps is read from
``SHELVING_WORKERS`` (default 1).
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, acceptance, analytic, montecarlo, spectrum, springmodel
from .errors import ShelvingError
from .liouvillian import SystemParams, inject_fault

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
WORKERS_ENV = "SHELVING_WORKERS"
SWEEP_FIELDS = ("gamma", "gamma2", "gamma3", "a", "rabi", "delta")


class ConfigError(ValueError):
    pass


def finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return v


def _add_params(sp: argparse.ArgumentParser, delta_auto: bool = True) -> None:
    sp.add_argument("--gamma", type=finite, default=1.0, help="3->1 half width (default 1)")
    sp.add_argument("--rabi", type=finite, default=6.0, help="Rabi frequency")
    sp.add_argument("--gamma3", type=finite, default=0.005, help="3->2 half width")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--a", type=finite, help="ratio gamma2/gamma3 (default 0.3)")
    g.add_argument("--gamma2", type=finite, help="2->1 half width")
    sp.add_argument("--delta", default="0",
                    help="detuning, or 'auto' for the optimal detuning" if delta_auto else "detuning")


def params_from_args(ns) -> SystemParams:
    if ns.gamma2 is not None:
        g2 = ns.gamma2
    else:
        g2 = (0.3 if ns.a is None else ns.a) * ns.gamma3
    try:
        p = SystemParams(gamma=ns.gamma, gamma2=g2, gamma3=ns.gamma3, rabi=ns.rabi)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if ns.delta == "auto":
        return p.with_(detuning=analytic.delta_max(p))
    try:
        return p.with_(detuning=finite(ns.delta))
    except (argparse.ArgumentTypeError, ValueError) as exc:
        raise ConfigError(f"--delta: {exc}") from exc


def params_json(p: SystemParams) -> dict:
    return {"gamma": p.gamma, "gamma2": p.gamma2, "gamma3": p.gamma3,
            "rabi": p.rabi, "delta": p.detuning}


def metrics_json(m: spectrum.PeakMetrics) -> dict:
    return {"amplitude": m.amplitude, "hwhm": m.hwhm, "intensity": m.intensity}


def emit(obj) -> None:
    print(json.dumps({"version": __version__, **obj}, indent=2, sort_keys=False))


def _try(fn, *args):
    """Run one metric; returns (value, None) or (None, reason)."""
    try:
        return fn(*args), None
    except (ShelvingError, ValueError, ArithmeticError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def peak_summary(p: SystemParams) -> dict:
    """All peak descriptions side by side; failures become null plus reason."""
    out = {"params": params_json(p)}
    errors = {}
    m, err = _try(spectrum.peak_metrics_numeric, p)
    out["numeric"] = metrics_json(m) if m else None
    if err:
        errors["numeric"] = err
    for name, fn in (("secular", analytic.secular_peak), ("telegraph", analytic.telegraph_peak)):
        m, err = _try(fn, p)
        out[name] = metrics_json(m) if m else None
        if err:
            errors[name] = err
    w, err = _try(spectrum.peak_width_eigenvalue, p)
    out["eigenvalue"] = {"hwhm": w} if err is None else None
    if err:
        errors["eigenvalue"] = err
    out["elastic_intensity"], err = _try(spectrum.elastic_intensity, p)
    if err:
        errors["elastic_intensity"] = err
    out["errors"] = errors
    return out


# --- commands ---------------------------------------------------------------


def _grid(ns, p):
    if ns.grid:
        try:
            lo, hi, n = ns.grid.split(":")
            offsets = np.linspace(finite(lo), finite(hi), int(n))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"--grid expects start:stop:count, got {ns.grid!r}") from exc
        return offsets
    return spectrum.spectrum_grid(p, n_coarse=ns.n_coarse, n_fine=ns.n_fine, span=ns.span)


def cmd_spectrum(ns) -> int:
    p = params_from_args(ns)
    offsets = _grid(ns, p)
    if offsets.size == 0:
        raise ConfigError("empty frequency grid")
    curve = spectrum.spectrum_curve(p, offsets)
    if ns.output:
        spectrum.write_curve_csv(curve, ns.output)
    summary = peak_summary(p)
    summary["delta_used"] = p.detuning
    summary["points"] = int(offsets.size)
    emit(summary)
    return EXIT_OK


def cmd_peak(ns) -> int:
    emit(peak_summary(params_from_args(ns)))
    return EXIT_OK


def parse_axis(text: str) -> tuple[str, list]:
    """``name=lo:hi:n`` (inclusive linspace) or ``name=v1,v2,...``."""
    if "=" not in text:
        raise ConfigError(f"sweep axis {text!r} is not name=values")
    name, spec = text.split("=", 1)
    if name not in SWEEP_FIELDS:
        raise ConfigError(f"unknown sweep field {name!r}; choose from {', '.join(SWEEP_FIELDS)}")
    try:
        if ":" in spec:
            lo, hi, n = spec.split(":")
            values = [float(v) for v in np.linspace(finite(lo), finite(hi), int(n))]
        else:
            values = [v if v == "auto" else finite(v) for v in spec.split(",") if v]
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise ConfigError(f"bad sweep values {spec!r}") from exc
    if not values:
        raise ConfigError(f"sweep axis {name!r} is empty")
    if "auto" in values and name != "delta":
        raise ConfigError("'auto' is only valid for delta")
    return name, values


def _sweep_point(base: dict, point: dict) -> dict:
    fields = {**base, **point}
    try:
        g2 = fields["a"] * fields["gamma3"] if fields.get("a") is not None else fields["gamma2"]
        p = SystemParams(gamma=fields["gamma"], gamma2=g2, gamma3=fields["gamma3"], rabi=fields["rabi"])
        d = fields["delta"]
        p = p.with_(detuning=analytic.delta_max(p) if d == "auto" else float(d))
    except (ShelvingError, ValueError) as exc:
        return {"point": point, "params": None, "errors": {"params": f"{type(exc).__name__}: {exc}"}}
    row = peak_summary(p)
    row["point"] = point
    return row


def _row_ok(row) -> bool:
    return row.get("numeric") is not None


def _flat(row) -> dict:
    out = {k: row["point"].get(k) for k in row["point"]}
    prm = row.get("params") or {}
    for k in ("gamma", "gamma2", "gamma3", "rabi", "delta"):
        out[k] = prm.get(k)
    for method in ("numeric", "secular", "telegraph"):
        m = row.get(method) or {}
        for k in ("amplitude", "hwhm", "intensity"):
            out[f"{method}_{k}"] = m.get(k)
    out["eigenvalue_hwhm"] = (row.get("eigenvalue") or {}).get("hwhm")
    out["error"] = "; ".join(f"{k}: {v}" for k, v in row.get("errors", {}).items()) or None
    return out


def workers() -> int:
    text = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(text)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {text!r}") from None
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be at least 1")
    return n


def run_sweep(base: dict, axes: list[tuple[str, list]], n_workers: int = 1) -> list[dict]:
    names = [n for n, _ in axes]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate sweep axis")
    if "a" in names and "gamma2" in names:
        raise ConfigError("sweep over a and gamma2 together is ambiguous")
    points = [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in axes))]
    if n_workers == 1:
        return [_sweep_point(base, pt) for pt in points]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_sweep_point, itertools.repeat(base), points, chunksize=1))


def cmd_sweep(ns) -> int:
    if not ns.axis:
        raise ConfigError("sweep needs at least one --axis")
    axes = [parse_axis(t) for t in ns.axis]
    base = {"gamma": ns.gamma, "gamma3": ns.gamma3, "rabi": ns.rabi, "delta": ns.delta,
            "a": None, "gamma2": None}
    if ns.gamma2 is not None:
        base["gamma2"] = ns.gamma2
    else:
        base["a"] = 0.3 if ns.a is None else ns.a
    if any(n == "gamma2" for n, _ in axes):
        base["a"] = None
    if any(n == "a" for n, _ in axes):
        base["gamma2"] = None
    rows = run_sweep(base, axes, workers())
    flat = [_flat(r) for r in rows]
    out = open(ns.output, "w", newline="") if ns.output else sys.stdout
    try:
        if ns.format == "json":
            json.dump({"version": __version__, "rows": flat}, out, indent=2)
            out.write("\n")
        else:
            w = csv.DictWriter(out, fieldnames=list(flat[0]))
            w.writeheader()
            for r in flat:
                w.writerow({k: ("" if v is None else (f"{v:.17g}" if isinstance(v, float) else v))
                            for k, v in r.items()})
    finally:
        if out is not sys.stdout:
            out.close()
    ok = sum(_row_ok(r) for r in rows)
    if ok < 0.9 * len(rows):
        print(f"only {ok}/{len(rows)} sweep points succeeded", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_telegraph(ns) -> int:
    p = params_from_args(ns)
    if ns.duration <= 0:
        raise ConfigError("--duration must be positive")
    tb, td = analytic.tau_bright(p), analytic.tau_dark(p)
    rec = montecarlo.simulate_trajectory(p, ns.duration, ns.seed)
    if ns.jsonl:
        montecarlo.write_jsonl(rec, ns.jsonl)
    st = montecarlo.stats_from_periods(*montecarlo.classify_periods(rec))
    result = {
        "params": params_json(p),
        "duration": ns.duration,
        "seed": ns.seed,
        "tau_bright": {"est": st.tau_bright_est, "stderr": st.stderr_bright, "formula": tb,
                       "n": st.n_bright},
        "tau_dark": {"est": st.tau_dark_est, "stderr": st.stderr_dark, "formula": td,
                     "n": st.n_dark},
        "width_pred": 1 / tb + 1 / td,
        "width_from_estimates": 1 / st.tau_bright_est + 1 / st.tau_dark_est,
    }
    try:
        gb, gd = montecarlo.classify_periods_gap(rec, gamma=p.gamma)
        gap = montecarlo.stats_from_periods(gb, gd)
        result["gap_classifier"] = {"tau_bright": gap.tau_bright_est, "tau_dark": gap.tau_dark_est}
    except ShelvingError as exc:
        result["gap_classifier"] = {"error": str(exc)}
    if ns.psd:
        result["width_from_psd"] = montecarlo.telegraph_psd_hwhm(
            st.tau_bright_est, st.tau_dark_est, ns.psd_duration or 64 * (tb + td) * 32,
            ns.psd_trajectories, ns.seed)
    emit(result)
    return EXIT_OK


def cmd_modes(ns) -> int:
    p = params_from_args(ns)
    ms = springmodel.modes(p)
    ss = springmodel.spring_system(p)

    def mode(m):
        return {"eigenvalue": [m.eigenvalue.real, m.eigenvalue.imag], "naive_width": m.naive_width,
                "weighted_width": m.weighted_width, "weights": list(m.weights)}

    ang = springmodel.dressed_angle(p)
    emit({
        "params": params_json(p),
        "theta": ang.theta,
        "masses": list(ss.masses),
        "spring_constants": list(ss.constants),
        "modes": {"a": mode(ms.a), "b": mode(ms.b), "c": mode(ms.c)},
        "narrow_width_closed": springmodel.narrow_width_closed(p),
    })
    return EXIT_OK


def cmd_validate(ns) -> int:
    if ns.list:
        for c in acceptance.CRITERIA:
            print(f"{c.key:2d} {c.name}")
        return EXIT_OK
    keys = set(ns.only) if ns.only else None
    if ns.inject_fault:
        with inject_fault(ns.inject_fault):
            results = acceptance.run_all(keys)
    else:
        results = acceptance.run_all(keys)
    for r in results:
        print(acceptance.format_row(r), flush=True)
    n_ok = sum(r.passed for r in results)
    print(f"{n_ok}/{len(results)} criteria passed")
    return EXIT_OK if n_ok == len(results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shelving", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="incoherent spectrum CSV and peak summary")
    _add_params(sp)
    sp.add_argument("-o", "--output", help="CSV path (offset,s_inc,s_mollow,s_peak)")
    sp.add_argument("--grid", help="uniform grid start:stop:count instead of the default grid")
    sp.add_argument("--n-coarse", type=int, default=601)
    sp.add_argument("--n-fine", type=int, default=120)
    sp.add_argument("--span", type=finite, default=1.5)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("peak", help="narrow-peak metrics from every method")
    _add_params(sp)
    sp.set_defaults(func=cmd_peak)

    sp = sub.add_parser("sweep", help="Cartesian parameter sweep of peak metrics")
    _add_params(sp)
    sp.add_argument("--axis", action="append",
                    help="name=lo:hi:n or name=v1,v2 (fields: " + ", ".join(SWEEP_FIELDS) + ")")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("telegraph", help="Monte Carlo bright/dark statistics")
    _add_params(sp)
    sp.add_argument("--duration", type=finite, default=1e6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jsonl", help="export the jump record as JSON lines")
    sp.add_argument("--psd", action="store_true", help="also fit the telegraph power spectrum")
    sp.add_argument("--psd-duration", type=finite)
    sp.add_argument("--psd-trajectories", type=int, default=16)
    sp.set_defaults(func=cmd_telegraph)

    sp = sub.add_parser("modes", help="dressed-state spring-model modes")
    _add_params(sp)
    sp.set_defaults(func=cmd_modes)

    sp = sub.add_parser("validate", help="run the acceptance suite")
    sp.add_argument("--list", action="store_true", help="list criteria without running them")
    sp.add_argument("--only", type=int, action="append", help="run only this criterion (repeatable)")
    sp.add_argument("--inject-fault", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return ns.func(ns)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ShelvingError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
