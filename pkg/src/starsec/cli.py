"""Command-line front end.

    starsec sop-curve --axis rho_b_db 60:120:13 --methods analytic,monte-carlo -o sop.csv
    starsec asc-curve --axis rho_b_db 60:120:13 -o asc.csv
    starsec sweep-mode-param 0.05:0.95:19 --metric sop-pair -o sweep.csv
    starsec validate -o check.csv
    starsec channel-cdf --trials 100000 -o cdf.csv

Every command writes a CSV (one row per point) and a JSON sidecar with the
resolved configuration. Exit codes: 0 ok, 2 invalid configuration,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import __version__
from .analytics import (Method, Protocol, ProtocolMode, Quadrature, asc, sop, weak_error_floor)
from .fading import FadingParams, fit_user_gamma
from .geometry import ConfigError, NetworkConfig, ordered_user_cdfs, unordered_user_cdf_pair
from .mathkernel import ConvergenceError, DomainError
from .simulator import (default_workers, draw_key, empirical_channel_cdf, estimate_asc, estimate_sop,
                        simulate_channels)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
COMMANDS = ("sop-curve", "asc-curve", "sweep-mode-param", "validate", "channel-cdf")
AXES = ("rho_b_db", "N", "param_s", "R_U")
METHOD_TAGS = {"analytic": "analytic", "quadrature": "quad", "monte-carlo": "mc"}
PAIR_SOP_NOTE = ("sop_pair = P(strong or weak user in outage); Monte Carlo counts joint events, "
                 "analytic/quadrature columns use 1 - (1 - sop_s)(1 - sop_w) assuming independence")

_FLOAT_KEYS = {"l_BR", "R_U", "lambda_e", "alpha", "C_r", "eve_trunc_radius", "kappa1", "mu1", "kappa2",
               "mu2", "rho_b_db", "rho_e_db", "a_s", "a_w", "R_s", "R_w", "param_s"}
_INT_KEYS = {"N", "M"}
_BOOL_KEYS = {"shared_first_hop"}
_STR_KEYS = {"kind"}


@dataclass
class Scenario:
    cfg: NetworkConfig
    mode: ProtocolMode
    values: dict


@dataclass
class RunSpec:
    command: str
    config: str | None = None
    overrides: list = field(default_factory=list)
    axis: str = "rho_b_db"
    axis_range: tuple = (60.0, 120.0, 13)
    methods: tuple = ("analytic",)
    trials: int = 100_000
    seed: int = 1
    output: str | None = None
    metric: str = "sop-pair"
    workers: int | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.axis not in AXES:
            raise ConfigError(f"sweep axis must be one of {AXES}")
        if int(self.axis_range[2]) < 2:
            raise ConfigError("sweep steps must be >= 2")
        if not self.methods:
            raise ConfigError("at least one method must be selected")
        bad = [m for m in self.methods if m not in METHOD_TAGS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {list(METHOD_TAGS)}")


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def _coerce(key, raw):
    raw = str(raw).strip()
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _INT_KEYS:
        v = float(raw)
        if v != int(v):
            raise ConfigError(f"{key} must be an integer (got {raw})")
        return int(v)
    if key in _BOOL_KEYS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key} must be a boolean (got {raw})")
    if key in _STR_KEYS:
        return raw
    raise ConfigError(f"unknown configuration key {key!r}")


def load_values(path: str | None = None, overrides=()) -> dict:
    """Flat key -> value dict from the default file, an optional user file and key=value overrides."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser.read_string(resources.files("starsec").joinpath("default.ini").read_text())
    if path is not None:
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config file {path}: {exc}") from exc
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            values[key] = _coerce(key, raw)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        key = key.strip().split(".")[-1]
        values[key] = _coerce(key, raw)
    return values


def build_scenario(values: dict) -> Scenario:
    v = dict(values)
    try:
        fading = FadingParams(v["kappa1"], v["mu1"], v["kappa2"], v["mu2"])
    except DomainError as exc:
        raise ConfigError(f"fading parameters: {exc}") from exc
    cfg = NetworkConfig(
        l_BR=v["l_BR"], R_U=v["R_U"], lambda_e=v["lambda_e"], alpha=v["alpha"], C_r=v["C_r"],
        rho_b=db_to_linear(v["rho_b_db"]), rho_e=db_to_linear(v["rho_e_db"]),
        a_s=v["a_s"], a_w=v["a_w"], R_s=v["R_s"], R_w=v["R_w"], N=v["N"], fading=fading,
        eve_trunc_radius=v["eve_trunc_radius"], shared_first_hop=v["shared_first_hop"], M=v["M"],
    )
    kind = str(v["kind"]).upper()
    if kind not in ("TS", "ES"):
        raise ConfigError(f"protocol kind must be TS or ES (got {v['kind']})")
    return Scenario(cfg, ProtocolMode(Protocol(kind), v["param_s"]), v)


def parse_range(text: str) -> tuple:
    try:
        a, b, n = text.split(":")
        return float(a), float(b), int(n)
    except ValueError as exc:
        raise ConfigError(f"range must be start:stop:steps (got {text!r})") from exc


def _grid(rng):
    start, stop, steps = rng
    return np.linspace(start, stop, int(steps))


def _apply_axis(values: dict, axis: str, x: float) -> dict:
    v = dict(values)
    if axis == "N":
        v["N"] = int(round(x))
    else:
        v[axis] = float(x)
    return v


def fmt(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if not math.isfinite(v):
        return "NA"
    return format(v, ".10g")


# ---------------------------------------------------------------- per-point evaluation

def _mc_cache(spec: RunSpec):
    cache = {}

    def get(cfg):
        key = draw_key(cfg)
        if key not in cache:
            cache[key] = simulate_channels(cfg, spec.trials, spec.seed, spec.workers)
        return cache[key]

    return get


def _metric_row(kind: str, sc: Scenario, method: str, mc) -> dict:
    """Columns for one (metric family, method) at one scenario."""
    tag = METHOD_TAGS[method]
    cfg, mode = sc.cfg, sc.mode
    row = {}
    if kind == "sop":
        if method == "monte-carlo":
            r = estimate_sop(cfg, mode, realizations=mc(cfg))
            for name, v in (("sop_s", r.sop_strong), ("sop_w", r.sop_weak), ("sop_pair", r.sop_pair)):
                long = {"sop_s": "sop_strong", "sop_w": "sop_weak", "sop_pair": "sop_pair"}[name]
                resolved = f"{long}_unresolved" not in r.flags
                row[f"{name}_{tag}"] = v if resolved else None
                row[f"{name}_{tag}_ci"] = r.ci_halfwidth[long] if resolved else None
        else:
            m = Method.ADAPTIVE_INTEGRAL if method == "analytic" else Quadrature(cfg.M, cfg.M)
            r = sop(mode, cfg, method=m)
            row[f"sop_s_{tag}"] = r.sop_strong
            row[f"sop_w_{tag}"] = r.sop_weak
            row[f"sop_pair_{tag}"] = r.sop_pair
    else:
        if method == "monte-carlo":
            r = estimate_asc(cfg, mode, realizations=mc(cfg))
            for name, long, v in (("asc_s", "asc_strong", r.asc_strong), ("asc_w", "asc_weak", r.asc_weak),
                                  ("asc_pair", "asc_pair", r.asc_pair)):
                row[f"{name}_{tag}"] = v
                row[f"{name}_{tag}_ci"] = r.ci_halfwidth[long]
        else:
            m = Method.ADAPTIVE_INTEGRAL if method == "analytic" else Quadrature(cfg.M, cfg.M)
            r = asc(mode, cfg, method=m)
            row[f"asc_s_{tag}"] = r.asc_strong
            row[f"asc_w_{tag}"] = r.asc_weak
            row[f"asc_pair_{tag}"] = r.asc_pair
    return row


def _curve_rows(spec: RunSpec, base: dict, family: str):
    mc = _mc_cache(spec)
    rows = []
    for x in _grid(spec.axis_range):
        sc = build_scenario(_apply_axis(base, spec.axis, x))
        row = {spec.axis: int(round(x)) if spec.axis == "N" else x}
        for method in spec.methods:
            row.update(_metric_row(family, sc, method, mc))
        rows.append(row)
    return rows


def _sweep_rows(spec: RunSpec, base: dict):
    metric = spec.metric.replace("_", "-")
    families = {"sop-pair": ("sop", "sop_pair", min), "sop-s": ("sop", "sop_s", min), "sop-w": ("sop", "sop_w", min),
                "asc-pair": ("asc", "asc_pair", max), "asc-s": ("asc", "asc_s", max), "asc-w": ("asc", "asc_w", max)}
    if metric not in families:
        raise ConfigError(f"unknown metric {spec.metric!r}; choose from {sorted(families)}")
    family, col, pick = families[metric]
    mc = _mc_cache(spec)
    rows = []
    for x in _grid(spec.axis_range):
        v = _apply_axis(base, "param_s", x)
        sc = build_scenario(v)
        row = {"param_s": x}
        for method in spec.methods:
            row.update(_metric_row(family, sc, method, mc))
        rows.append(row)
    for method in spec.methods:
        key = f"{col}_{METHOD_TAGS[method]}"
        vals = [(r[key], i) for i, r in enumerate(rows) if r.get(key) is not None]
        best = pick(vals)[1] if vals else None
        flag = "argmin" if pick is min else "argmax"
        for i, r in enumerate(rows):
            r[f"{flag}_{METHOD_TAGS[method]}"] = i == best
    return rows


def _validate_rows(spec: RunSpec, base: dict):
    """Analytic vs Monte Carlo at the configured point, one row per metric."""
    sc = build_scenario(base)
    cfg, mode = sc.cfg, sc.mode
    ch = simulate_channels(cfg, spec.trials, spec.seed, spec.workers)
    a_sop, m_sop = sop(mode, cfg), estimate_sop(cfg, mode, realizations=ch)
    a_asc, m_asc = asc(mode, cfg), estimate_asc(cfg, mode, realizations=ch)
    rows = []
    pairs = [("sop_s", a_sop.sop_strong, m_sop.sop_strong, m_sop.ci_halfwidth["sop_strong"], 0.01),
             ("sop_w", a_sop.sop_weak, m_sop.sop_weak, m_sop.ci_halfwidth["sop_weak"], 0.01),
             ("asc_s", a_asc.asc_strong, m_asc.asc_strong, m_asc.ci_halfwidth["asc_strong"], 0.05),
             ("asc_w", a_asc.asc_weak, m_asc.asc_weak, m_asc.ci_halfwidth["asc_weak"], 0.02)]
    for name, a, m, ci, floor in pairs:
        tol = max(floor, 0.05 * abs(a), 2.0 * ci)
        rows.append({"metric": name, "analytic": a, "mc": m, "mc_ci": ci, "tolerance": tol,
                     "agree": abs(a - m) <= tol})
    ef = weak_error_floor(mode, cfg)
    rows.append({"metric": "weak_error_floor", "analytic": ef, "mc": None, "mc_ci": None,
                 "tolerance": None, "agree": None})
    return rows


def _channel_rows(spec: RunSpec, base: dict):
    sc = build_scenario(base)
    cfg = sc.cfg
    emp = empirical_channel_cdf(cfg, spec.trials, spec.seed, workers=spec.workers)
    stats = fit_user_gamma(cfg.fading, cfg.N)
    F, _ = unordered_user_cdf_pair(emp["x"], stats, cfg)
    Fs, Fw = ordered_user_cdfs(emp["x"], stats, cfg)
    rows = []
    for i, x in enumerate(emp["x"]):
        rows.append({"x": x, "x_db": 10.0 * math.log10(x * cfg.rho_b),
                     "f_hs_mc": emp["F_Hs"][i], "f_hw_mc": emp["F_Hw"][i], "f_hat_mc": emp["F_hat"][i],
                     "f_hs_analytic": Fs[i], "f_hw_analytic": Fw[i], "f_hat_analytic": F[i]})
    return rows


def write_csv(rows, path=None) -> str:
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in cols])
    text = buf.getvalue()
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def _sidecar(spec: RunSpec, sc: Scenario, path: str):
    meta = {
        "version": __version__,
        "command": spec.command,
        "seed": spec.seed,
        "trials": spec.trials,
        "methods": list(spec.methods),
        "axis": spec.axis if spec.command in ("sop-curve", "asc-curve") else
                ("param_s" if spec.command == "sweep-mode-param" else None),
        "range": list(spec.axis_range) if spec.command in ("sop-curve", "asc-curve", "sweep-mode-param") else None,
        "metric": spec.metric if spec.command == "sweep-mode-param" else None,
        "config_values": sc.values,
        "network": sc.cfg.as_dict(),
        "protocol": {"kind": sc.mode.kind.value, "param_s": sc.mode.param_s},
        "pair_sop": PAIR_SOP_NOTE,
        "unresolved_rule": "Monte Carlo SOP below 1e-3 written as NA",
    }
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


def run(spec: RunSpec) -> int:
    base = load_values(spec.config, spec.overrides)
    sc = build_scenario(base)     # validates before any work starts
    if spec.command == "sop-curve":
        rows = _curve_rows(spec, base, "sop")
    elif spec.command == "asc-curve":
        rows = _curve_rows(spec, base, "asc")
    elif spec.command == "sweep-mode-param":
        rows = _sweep_rows(spec, base)
    elif spec.command == "validate":
        rows = _validate_rows(spec, base)
    else:
        rows = _channel_rows(spec, base)
    write_csv(rows, spec.output)
    if spec.output not in (None, "-"):
        stem = spec.output[:-4] if spec.output.endswith(".csv") else spec.output
        _sidecar(spec, sc, stem + ".json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="starsec", description="STAR-RIS NOMA secrecy toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, methods_default="analytic"):
        sp.add_argument("-c", "--config", help="INI file layered over the built-in defaults")
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (SNRs in dB: rho_b_db, rho_e_db)")
        sp.add_argument("--methods", default=methods_default,
                        help="comma list of analytic, quadrature, monte-carlo")
        sp.add_argument("--trials", type=int, default=100_000)
        sp.add_argument("--seed", type=int, default=1)
        sp.add_argument("--workers", type=int, default=None,
                        help="Monte Carlo threads (default from STARSEC_THREADS, else 1)")
        sp.add_argument("-o", "--output", default=None, help="CSV path; '-' or omitted prints to stdout")

    for name in ("sop-curve", "asc-curve"):
        sp = sub.add_parser(name)
        sp.add_argument("--axis", nargs=2, metavar=("NAME", "START:STOP:STEPS"),
                        default=["rho_b_db", "60:120:13"])
        common(sp)
    sp = sub.add_parser("sweep-mode-param")
    sp.add_argument("range", metavar="START:STOP:STEPS")
    sp.add_argument("--metric", default="sop-pair")
    common(sp)
    sp = sub.add_parser("validate")
    common(sp, "analytic,monte-carlo")
    sp = sub.add_parser("channel-cdf")
    common(sp, "analytic,monte-carlo")
    return p


def spec_from_args(ns) -> RunSpec:
    methods = tuple(m.strip() for m in ns.methods.split(",") if m.strip())
    kw = dict(command=ns.command, config=ns.config, overrides=list(ns.overrides), methods=methods,
              trials=ns.trials, seed=ns.seed, output=ns.output,
              workers=ns.workers if ns.workers is not None else default_workers())
    if ns.command in ("sop-curve", "asc-curve"):
        kw["axis"] = ns.axis[0]
        kw["axis_range"] = parse_range(ns.axis[1])
    elif ns.command == "sweep-mode-param":
        kw["axis"] = "param_s"
        kw["axis_range"] = parse_range(ns.range)
        kw["metric"] = ns.metric
    return RunSpec(**kw)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return run(spec_from_args(ns))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, ArithmeticError, DomainError) as exc:
        print(f"numerical error in {ns.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
