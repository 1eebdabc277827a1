"""Command line front end.

Subcommands cover contour extraction, energy-bound verification, the
constant chain, exact enumeration, the contour census, Monte Carlo phase
sweeps, random-field tail checks, correlation inequalities, and the
misalignment bound. Options come from flags, optionally backed by a config
file (INI with [model]/[field]/[run] sections, or the same structure as
JSON); flags win over config values.

Every file the tool writes embeds the run manifest: JSON outputs carry a
"manifest" key, CSV outputs start with a "# manifest <hash>" comment line.
Exit status: 0 on success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import hashlib
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .bounds import compute_constants, peierls_tail, verify_energy_bound
from .contour import ContourError, MaParams, extract_contours, family_to_json
from .enumeration import (
    contour_census,
    exact_partition,
    griffiths_checks,
    peierls_comparison,
)
from .interactions import (
    CouplingKernel,
    InteractionSpec,
    is_positive_semidefinite,
    make_field,
)
from .lattice import box
from .randomfield import OrderedPartition, tail_check
from .sampler import phase_sweep
from .spin_model import ModelInstance, config_from_json


class UsageError(Exception):
    pass


# ----------------------------------------------------------- run manifest


class RunManifest:
    def __init__(self, command: str, arguments: dict, seeds: dict | None = None):
        self.command = command
        self.arguments = {k: v for k, v in sorted(arguments.items())
                          if k not in ("func", "subcommand")}
        self.seeds = seeds or {}
        self.outputs: list = []
        self._start = time.time()

    def to_dict(self) -> dict:
        body = {
            "command": self.command,
            "arguments": self.arguments,
            "version": __version__,
            "seeds": self.seeds,
            "outputs": self.outputs,
            "wall_clock_s": round(time.time() - self._start, 3),
        }
        digest = hashlib.sha256(
            json.dumps(body, sort_keys=True, default=str).encode()).hexdigest()
        body["hash"] = digest[:12]
        return body


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_json(path: str, payload: dict, manifest: RunManifest):
    manifest.outputs.append(path)
    body = _jsonable(payload)
    body["manifest"] = manifest.to_dict()
    with open(path, "w") as fh:
        json.dump(body, fh, indent=2)
        fh.write("\n")


def write_csv(path: str, fieldnames: list, rows: list, manifest: RunManifest):
    manifest.outputs.append(path)
    info = manifest.to_dict()
    with open(path, "w", newline="") as fh:
        fh.write(f"# manifest {info['hash']}\n")
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in fieldnames})


# ------------------------------------------------------- config handling


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}")
    stripped = text.lstrip()
    if path.endswith(".json") or stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"bad JSON config: {exc}")
        if not isinstance(data, dict) or not all(
                isinstance(v, dict) for v in data.values()):
            raise UsageError("JSON config must be an object of sections")
        return _lower_keys(data)
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise UsageError(f"bad config file: {exc}")
    data = {section: dict(parser.items(section)) for section in parser.sections()}
    return _lower_keys(data)


def _lower_keys(data: dict) -> dict:
    return {str(section).lower(): {str(k).lower(): v for k, v in body.items()}
            for section, body in data.items()}


class Options:
    """Flag values backed by an optional config file; flags win."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = load_config(args.config) if getattr(args, "config", None) else {}

    def get(self, section: str, key: str, cast=str, default=None, flag=None):
        flag = key if flag is None else flag
        value = getattr(self.args, flag, None)
        if value is None:
            value = self.config.get(section, {}).get(key)
        if value is None:
            return default
        try:
            return cast(value)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"bad value for {section}.{key}: {exc}")

    def require(self, section: str, key: str, cast=str, flag=None):
        value = self.get(section, key, cast=cast, flag=flag)
        if value is None:
            raise UsageError(f"missing required option {section}.{key}")
        return value


def _parse_shape(text) -> tuple:
    parts = str(text).lower().split("x")
    try:
        shape = tuple(int(p) for p in parts)
    except ValueError:
        raise UsageError(f"bad window shape {text!r} (expected like 3x3)")
    if not shape or any(s < 1 for s in shape):
        raise UsageError(f"bad window shape {text!r}")
    return shape


def _parse_alpha(text):
    if text is None:
        return None
    s = str(text).lower()
    if s in ("nn", "none", "nearest"):
        return None
    return float(text)


def _parse_grid(text) -> list:
    """Comma list ('1,2,3') or start:step:stop with both endpoints."""
    s = str(text)
    if ":" in s:
        pieces = s.split(":")
        if len(pieces) != 3:
            raise UsageError(f"bad grid {text!r} (expected start:step:stop)")
        start, step, stop = (float(p) for p in pieces)
        if step <= 0:
            raise UsageError("grid step must be positive")
        values = list(np.arange(start, stop + step / 2, step))
        return [round(v, 12) for v in values]
    try:
        return [float(p) for p in s.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}")


def _parse_int_list(text) -> list:
    try:
        return [int(p) for p in str(text).split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}")


def build_window(opts: Options):
    L = opts.get("model", "l", cast=int, flag="L")
    d = opts.get("model", "d", cast=int, default=2)
    if L is not None:
        corner = tuple(-(L // 2) for _ in range(d))
        return box(tuple(L for _ in range(d)), corner=corner)
    shape_text = opts.get("model", "window", cast=str)
    if shape_text is None:
        raise UsageError("specify a window (--window AxB or --L N)")
    shape = _parse_shape(shape_text)
    corner_text = opts.get("model", "corner", cast=str)
    corner = tuple(_parse_int_list(corner_text)) if corner_text else None
    if corner is not None and len(corner) != len(shape):
        raise UsageError("corner and window dimensions differ")
    return box(shape, corner=corner)


def build_interaction(opts: Options, q: int | None = None) -> InteractionSpec:
    if q is None:
        q = opts.require("model", "q", cast=int)
    name = opts.get("model", "interaction", cast=str, default="potts").lower()
    if name == "potts":
        return InteractionSpec.potts(q)
    if name == "clock":
        return InteractionSpec.clock(q)
    raise UsageError(f"unknown interaction {name!r} (potts or clock)")


def build_field(opts: Options, window, q: int):
    kind = opts.get("field", "kind", cast=str, default="zero", flag="field_kind")
    params = {}
    for key, cast in (("eps", float), ("seed", int), ("h_star", float),
                      ("delta", float), ("r", float), ("h", float)):
        value = opts.get("field", key, cast=cast,
                         flag=f"field_{key}" if key != "seed" else "field_seed")
        if value is not None:
            params[key if key != "r" else "R"] = value
    if kind == "scalar":
        params.setdefault("h", 0.0)
        params["phi"] = build_interaction(opts).phi
    try:
        return make_field(kind, params, window, q=q)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad field options: {exc}")


def build_model(opts: Options, beta=None, window=None) -> ModelInstance:
    if window is None:
        window = build_window(opts)
    spec = build_interaction(opts)
    alpha = _parse_alpha(opts.get("model", "alpha", cast=str))
    J = opts.get("model", "j", cast=float, default=1.0, flag="J")
    if beta is None:
        beta = opts.get("model", "beta", cast=float, default=1.0)
    try:
        kernel = CouplingKernel.build(J=J, alpha=alpha, window=window)
        field = build_field(opts, window, spec.q)
        return ModelInstance(kernel=kernel, interaction=spec, field=field,
                             beta=float(beta))
    except ValueError as exc:
        raise UsageError(str(exc))


def model_constants(opts: Options, model: ModelInstance, c1: float):
    if model.kernel.alpha is None:
        raise UsageError("bound constants require a power-law kernel (--alpha)")
    return compute_constants(model.window.dim, model.kernel.alpha,
                             model.kernel.J, model.q, model.interaction.m,
                             c1=c1)


# ------------------------------------------------------------ subcommands


def cmd_constants(args) -> int:
    opts = Options(args)
    d = opts.get("model", "d", cast=int, default=2)
    alpha = _parse_alpha(opts.require("model", "alpha", cast=str))
    if alpha is None:
        raise UsageError("constants need a finite alpha")
    J = opts.get("model", "j", cast=float, default=1.0, flag="J")
    q = opts.require("model", "q", cast=int)
    m = opts.get("model", "m", cast=float, default=1.0)
    try:
        consts = compute_constants(d, alpha, J, q, m, c1=args.c1)
    except ValueError as exc:
        raise UsageError(str(exc))
    manifest = RunManifest("constants", vars(args))
    payload = dataclasses.asdict(consts)
    payload["threshold_beta"] = (consts.c1 + math.log(q)) / consts.c2
    payload["tail_at_beta0"] = peierls_tail(consts.beta0, consts, q)
    for key, value in payload.items():
        print(f"{key:>16} = {value:.17g}")
    if args.out:
        write_json(args.out, dict(payload), manifest)
        print(f"wrote {args.out}")
    return 0


def _read_config_file(path: str):
    try:
        with open(path) as fh:
            return config_from_json(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read input: {exc}")
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad configuration JSON: {exc}")


def resolve_separation(opts: Options, d: int, q: int) -> MaParams:
    """Contour separation scales, computed from the model when not given."""
    M = opts.get("run", "m", cast=float, flag="M")
    a = opts.get("run", "a", cast=float, flag="a")
    if M is None or a is None:
        alpha = _parse_alpha(opts.get("model", "alpha", cast=str))
        if alpha is None:
            raise UsageError("pass --M and --a, or --alpha so they can "
                             "be computed")
        J = opts.get("model", "j", cast=float, default=1.0, flag="J")
        spec = build_interaction(opts, q=q)
        try:
            consts = compute_constants(d, alpha, J, q, spec.m, c1=1.0)
        except ValueError as exc:
            raise UsageError(str(exc))
        M = consts.M_min if M is None else M
        a = consts.a if a is None else a
    try:
        return MaParams(M=M, a=a)
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_contours(args) -> int:
    opts = Options(args)
    config, q = _read_config_file(args.input)
    opts_q = opts.get("model", "q", cast=int)
    if opts_q is not None and opts_q != q:
        raise UsageError("config file q differs from the model options")
    params = resolve_separation(opts, config.window.dim, q)
    manifest = RunManifest("contours", vars(args))
    try:
        family = extract_contours(config, params)
    except ContourError as exc:
        print(f"contour extraction failed: {exc}", file=sys.stderr)
        return 1
    sizes = sorted(g.size for g in family.contours)
    print(f"{len(family.contours)} contour(s), support sizes {sizes}")
    if args.out:
        payload = json.loads(family_to_json(family))
        write_json(args.out, payload, manifest)
        print(f"wrote {args.out}")
    return 0


def cmd_verify(args) -> int:
    opts = Options(args)
    manifest = RunManifest("verify", vars(args))
    if args.exhaustive:
        from ._fastverify import exhaustive_energy_check

        shape = _parse_shape(args.window or "4x4")
        if shape != (4, 4):
            raise UsageError("the exhaustive driver covers the 4x4 window")
        q = opts.require("model", "q", cast=int)
        alphas = tuple(_parse_grid(args.alpha or "2.5,3,4"))
        J = opts.get("model", "j", cast=float, default=1.0, flag="J")
        names = tuple(n.strip() for n in
                      (args.interactions or "potts,clock").split(","))
        try:
            report = exhaustive_energy_check(q, alphas=alphas, J=J,
                                             interactions=names)
        except ValueError as exc:
            raise UsageError(str(exc))
        print(f"states checked: {report['n_states']}")
        for i, name in enumerate(report["interactions"]):
            for j, alpha in enumerate(report["alphas"]):
                margin = report["min_margin"][i][j]
                print(f"  {name:8s} alpha={alpha:<4g} min margin {margin:.6f}")
        print("all hold" if report["all_hold"] else "VIOLATIONS FOUND")
        if args.out:
            write_json(args.out, dict(report), manifest)
        return 0 if report["all_hold"] else 1

    if not args.input:
        raise UsageError("pass --exhaustive or --input config.json")
    config, q = _read_config_file(args.input)
    opts_q = opts.get("model", "q", cast=int)
    if opts_q is not None and opts_q != q:
        raise UsageError("config file q differs from the model options")
    if opts_q is None:
        opts.args.q = q
    model = build_model(opts, window=config.window)
    consts = model_constants(opts, model, c1=args.c1)
    params = resolve_separation(opts, config.window.dim, q)
    try:
        family = extract_contours(config, params)
    except ContourError as exc:
        print(f"contour extraction failed: {exc}", file=sys.stderr)
        return 1
    rows = []
    all_hold = True
    for g in family.contours:
        res = verify_energy_bound(config, model, g, consts)
        rows.append({"size": g.size, "lhs": res["lhs"], "rhs": res["rhs"],
                     "margin": res["margin"], "holds": res["holds"]})
        all_hold &= res["holds"]
        print(f"  contour size {g.size}: lhs={res['lhs']:.6f} "
              f"rhs={res['rhs']:.6f} holds={res['holds']}")
    if args.out:
        write_json(args.out, {"contours": rows, "all_hold": all_hold}, manifest)
    print("all hold" if all_hold else "VIOLATIONS FOUND")
    return 0 if all_hold else 1


def cmd_enumerate(args) -> int:
    opts = Options(args)
    model = build_model(opts)
    manifest = RunManifest("enumerate", vars(args))
    try:
        result = exact_partition(model, form=args.form)
    except ValueError as exc:
        raise UsageError(str(exc))
    print(f"log_Z = {result.log_Z:.12g}  ({args.form} form)")
    print(f"mean energy = {result.expectations['energy']:.12g}")
    for i, site in enumerate(model.window.sites):
        probs = " ".join(f"{p:.6f}" for p in result.marginals[i])
        print(f"  {site}: {probs}")
    if args.out:
        payload = {
            "log_Z": result.log_Z,
            "form": args.form,
            "sites": [list(s) for s in model.window.sites],
            "marginals": result.marginals,
            "mean_energy": result.expectations["energy"],
        }
        write_json(args.out, payload, manifest)
        print(f"wrote {args.out}")
    return 0


def cmd_census(args) -> int:
    manifest = RunManifest("census", vars(args))
    try:
        report = contour_census(args.d, args.q, args.n_max, args.side, c1=args.c1)
    except ValueError as exc:
        raise UsageError(str(exc))
    print(f"window side {args.side}, {report['n_configs']} configurations")
    for n in sorted(report["counts"]):
        print(f"  size {n}: {report['counts'][n]} contours "
              f"(bound {report['bound'][n]:.3g})")
    print("bound holds" if report["holds"] else "BOUND VIOLATED")
    if args.out:
        write_json(args.out, dict(report), manifest)
    return 0 if report["holds"] else 1


def cmd_simulate(args) -> int:
    opts = Options(args)
    betas = _parse_grid(opts.require("run", "beta_grid", cast=str, flag="beta_grid"))
    usable = [b for b in betas if b > 0]
    for b in betas:
        if b <= 0:
            print(f"skipping beta={b:g} (inverse temperature must be positive)",
                  file=sys.stderr)
    if not usable:
        raise UsageError("no positive beta values in the grid")
    replicas = opts.get("run", "replicas", cast=int, default=1)
    sweeps = opts.get("run", "sweeps", cast=int, default=2000)
    burn_in = opts.get("run", "burn_in", cast=int, default=500)
    seed = opts.get("run", "seed", cast=int, default=0)
    threads = opts.get("run", "threads", cast=int, default=1)
    algorithm = opts.get("run", "algorithm", cast=str, default="heatbath")
    model = build_model(opts, beta=usable[0])
    manifest = RunManifest("simulate", vars(args), seeds={"run": seed})
    try:
        records = phase_sweep(model, usable, replicas=replicas, sweeps=sweeps,
                              burn_in=burn_in, seed=seed, algorithm=algorithm,
                              threads=threads)
    except ValueError as exc:
        raise UsageError(str(exc))
    for rec in records:
        print(f"  beta={rec['beta']:<8g} replica={rec['replica']} "
              f"mu_site={rec['mu_site']:.4f} ess={rec['ess']:.0f}")
    if args.out:
        fields = ["beta", "replica", "mu_site", "mu_site_se", "align_mean",
                  "ess", "ess_site", "acceptance_rate"]
        write_csv(args.out, fields, records, manifest)
        print(f"wrote {args.out}")
    return 0


def cmd_randomfield(args) -> int:
    opts = Options(args)
    model = build_model(opts)
    window = model.window
    if args.labels:
        labels = _parse_int_list(args.labels)
        if len(labels) != len(window):
            raise UsageError("need one label per window site")
    else:
        rng = np.random.default_rng(args.partition_seed)
        labels = rng.integers(0, model.q, len(window))
    try:
        partition = OrderedPartition.from_labels(window, labels, model.q)
    except ValueError as exc:
        raise UsageError(str(exc))
    lambdas = _parse_grid(args.lambda_grid)
    manifest = RunManifest("randomfield", vars(args),
                           seeds={"draws": args.seed,
                                  "partition": args.partition_seed})
    try:
        report = tail_check(partition, model, n_draws=args.draws,
                            lambda_grid=lambdas, eps=args.eps, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    print(f"active sites: {report['active_sites']}, "
          f"mean = {report['mean']:.5f} +- {report['mean_se']:.5f}")
    for rec in report["records"]:
        print(f"  lambda={rec['lambda']:<8g} empirical={rec['empirical']:.5f} "
              f"bound={rec['bound']:.5f} holds={rec['holds']}")
    if args.out:
        write_json(args.out, dict(report), manifest)
    return 0 if report["holds"] else 1


def cmd_griffiths(args) -> int:
    opts = Options(args)
    model = build_model(opts)
    if not is_positive_semidefinite(model.interaction.phi):
        raise UsageError("correlation inequalities need a positive "
                         "semidefinite interaction")
    manifest = RunManifest("griffiths", vars(args), seeds={"trials": args.seed})
    try:
        report = griffiths_checks(model, trials=args.trials, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    for name in ("first", "second", "field", "volume"):
        rec = report[name]
        print(f"  {name:8s} min margin {rec['min_margin']:+.3e} "
              f"violations {rec['violations']}")
    print("all hold" if report["all_hold"] else "VIOLATIONS FOUND")
    if args.out:
        write_json(args.out, dict(report), manifest)
    return 0 if report["all_hold"] else 1


def cmd_peierls(args) -> int:
    opts = Options(args)
    model = build_model(opts)
    betas = _parse_grid(opts.require("run", "beta_grid", cast=str, flag="beta_grid"))
    betas = [b for b in betas if b > 0]
    if not betas:
        raise UsageError("no positive beta values in the grid")
    manifest = RunManifest("peierls", vars(args))
    try:
        records = peierls_comparison(model, betas, c1=args.c1)
    except ValueError as exc:
        raise UsageError(str(exc))
    ok = True
    for rec in records:
        tail = rec["tail"]
        tail_text = f"{tail:.6g}" if math.isfinite(tail) else "divergent"
        print(f"  beta={rec['beta']:<10g} mu_max={rec['mu_max']:.6g} "
              f"tail={tail_text} holds={rec['holds']}")
        ok &= rec["holds"]
    if args.out:
        write_csv(args.out, ["beta", "mu_max", "tail", "convergent", "holds"],
                  records, manifest)
    print("bound holds on the grid" if ok else "BOUND VIOLATED")
    return 0 if ok else 1


# ------------------------------------------------------------- the parser


def _add_model_flags(sub, window=True):
    sub.add_argument("--config", help="INI or JSON config file")
    sub.add_argument("--q", type=int, help="number of colors")
    sub.add_argument("--alpha", help="coupling decay exponent, or 'nn'")
    sub.add_argument("--J", type=float, help="coupling strength (default 1)")
    sub.add_argument("--interaction", help="potts or clock (default potts)")
    sub.add_argument("--beta", type=float, help="inverse temperature")
    sub.add_argument("--d", type=int, help="dimension (default 2)")
    if window:
        sub.add_argument("--window", help="window shape, like 3x3")
        sub.add_argument("--corner", help="window corner, like -1,-1")
        sub.add_argument("--L", type=int, help="centered LxL (or L^d) window")
    sub.add_argument("--field-kind", dest="field_kind",
                     help="zero, decaying, truncated, gaussian, scalar")
    sub.add_argument("--field-eps", dest="field_eps", type=float,
                     help="gaussian field strength")
    sub.add_argument("--field-seed", dest="field_seed", type=int,
                     help="gaussian field seed")
    sub.add_argument("--field-h-star", dest="field_h_star", type=float)
    sub.add_argument("--field-delta", dest="field_delta", type=float)
    sub.add_argument("--field-r", dest="field_r", type=float,
                     help="truncation radius")
    sub.add_argument("--field-h", dest="field_h", type=float,
                     help="scalar field strength")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrspin",
        description="contours, energy bounds, and phase-transition checks "
                    "for long-range spin models on finite windows")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p = subs.add_parser("constants", help="evaluate the bound constant chain")
    _add_model_flags(p, window=False)
    p.add_argument("--m", type=float, help="interaction gap (default 1)")
    p.add_argument("--c1", type=float, default=1.0, help="census entropy rate")
    p.add_argument("--out", help="write the constants as JSON")
    p.set_defaults(func=cmd_constants)

    p = subs.add_parser("contours", help="extract contours from a configuration")
    _add_model_flags(p)
    p.add_argument("--input", required=True, help="configuration JSON file")
    p.add_argument("--M", type=float, help="separation scale (default: computed)")
    p.add_argument("--a", type=float, help="separation exponent (default: computed)")
    p.add_argument("--out", help="write the contour family as JSON")
    p.set_defaults(func=cmd_contours)

    p = subs.add_parser("verify", help="check the contour energy bound")
    _add_model_flags(p)
    p.add_argument("--exhaustive", action="store_true",
                   help="scan every 4x4 window state")
    p.add_argument("--interactions", help="comma list for --exhaustive "
                                          "(default potts,clock)")
    p.add_argument("--input", help="configuration JSON to verify")
    p.add_argument("--M", type=float)
    p.add_argument("--a", type=float)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--out", help="write the report as JSON")
    p.set_defaults(func=cmd_verify)

    p = subs.add_parser("enumerate", help="exact partition function and marginals")
    _add_model_flags(p)
    p.add_argument("--form", choices=("phi", "psi"), default="phi")
    p.add_argument("--out", help="write the result as JSON")
    p.set_defaults(func=cmd_enumerate)

    p = subs.add_parser("census", help="count contours through the origin")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--n-max", dest="n_max", type=int, required=True)
    p.add_argument("--side", type=int, required=True, help="window side length")
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--out", help="write the census as JSON")
    p.set_defaults(func=cmd_census)

    p = subs.add_parser("simulate", help="Monte Carlo phase sweep")
    _add_model_flags(p)
    p.add_argument("--beta-grid", dest="beta_grid",
                   help="start:step:stop or comma list")
    p.add_argument("--replicas", type=int)
    p.add_argument("--sweeps", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--algorithm", choices=("metropolis", "heatbath"))
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out", help="write per-chain records as CSV")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("randomfield", help="relabeling free-energy tails")
    _add_model_flags(p)
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--lambda-grid", dest="lambda_grid", default="0.05,0.1,0.2,0.5")
    p.add_argument("--labels", help="comma list, one part label per site")
    p.add_argument("--partition-seed", dest="partition_seed", type=int, default=0)
    p.add_argument("--seed", type=int, default=0, help="draw seed")
    p.add_argument("--out", help="write the tail report as JSON")
    p.set_defaults(func=cmd_randomfield)

    p = subs.add_parser("griffiths", help="correlation inequality spot checks")
    _add_model_flags(p)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report as JSON")
    p.set_defaults(func=cmd_griffiths)

    p = subs.add_parser("peierls", help="exact misalignment vs the tail bound")
    _add_model_flags(p)
    p.add_argument("--beta-grid", dest="beta_grid",
                   help="start:step:stop or comma list")
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--out", help="write the comparison as CSV")
    p.set_defaults(func=cmd_peierls)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
