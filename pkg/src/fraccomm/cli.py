"""Command-line front end: ``fraccomm {apply,check,sweep,weights,info}``.

Exit codes: 0 success, 1 tolerance failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import inspect
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, norms, singular, spectral, verify
from .config import ConfigError, RunConfig, load
from .grid import (
    FAMILY_TYPES,
    GridError,
    Torus,
    TruncatedLine,
    default_family,
    family_from_dict,
    make_domain,
    sample_family,
)
from .squarefn import GStarParams, g_star

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def _order(params: dict, name: str = "s", lo: float = 0.0, hi: float = 2.0) -> float:
    if name not in params:
        raise UsageError(f"missing parameter {name!r}")
    v = float(params[name])
    if not lo < v < hi:
        raise UsageError(f"parameter {name} = {v:g} must lie in ({lo:g},{hi:g})")
    return v


def _positive(params: dict, name: str) -> float:
    if name not in params:
        raise UsageError(f"missing parameter {name!r}")
    v = float(params[name])
    if not v > 0:
        raise UsageError(f"parameter {name} = {v:g} must be positive")
    return v


# operator name -> (number of inputs, evaluator)
OPERATORS = {
    "ds_spectral": (1, lambda f, p: spectral.ds(f[0], _order(p))),
    "ds_hypersingular": (1, lambda f, p: singular.hypersingular_ds(
        f[0], _order(p), singular.SingularQuadrature(form=p.get("form")))),
    "ds_free_space": (1, lambda f, p: singular.free_space_ds(f[0], _order(p))),
    "js": (1, lambda f, p: spectral.apply_multiplier(spectral.Js(float(p.get("s", 1.0))), f[0])),
    "directional": (1, lambda f, p: spectral.apply_multiplier(
        spectral.DirectionalDs(int(p.get("axis", 0)), _order(p)), f[0])),
    "poisson": (1, lambda f, p: spectral.apply_multiplier(spectral.Poisson(_positive(p, "t")), f[0])),
    "gstar": (1, lambda f, p: g_star(f[0], GStarParams(_positive(p, "lam")))),
    "dgamma": (1, lambda f, p: singular.square_fractional(f[0], _order(p, "gamma", 0.0, 1.0))),
    "commutator": (2, lambda f, p: spectral.commutator_spectral(f[0], f[1], _order(p))),
    "T": (2, lambda f, p: singular.bilinear_T(f[0], f[1], _order(p))),
    "plap": (1, lambda f, p: singular.fractional_p_laplacian(
        f[0].with_samples(f[0].real), _order(p, "s", 0.0, 1.0), float(p.get("p", 2.0)))),
}


def _domain(cfg: RunConfig, resolution: int | None = None):
    d = cfg.domain
    N = resolution or d.resolution
    if d.kind == "line":
        return make_domain(d.dim, TruncatedLine(d.extent), N)
    if d.kind == "torus":
        return make_domain(d.dim, Torus(d.extent), N)
    raise ConfigError(f"unknown domain kind {d.kind!r}")


def _families(cfg: RunConfig) -> list:
    if not cfg.families:
        return default_family(cfg.seed)
    return [family_from_dict(f) for f in cfg.families]


def _write_json(path: Path, doc: dict):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False, default=_default) + "\n", encoding="utf-8")


def _default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, (tuple, set)):
        return list(o)
    raise TypeError(type(o).__name__)


def _stamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# commands


def cmd_apply(cfg: RunConfig) -> int:
    from .grid import load as load_grid, save as save_grid

    if cfg.operator not in OPERATORS:
        raise UsageError(f"unknown operator {cfg.operator!r}; choose from {sorted(OPERATORS)}")
    arity, fn = OPERATORS[cfg.operator]
    funcs = [load_grid(p) for p in cfg.inputs]
    if len(funcs) > arity:
        raise UsageError(f"operator {cfg.operator} takes {arity} input(s), got {len(funcs)}")
    if len(funcs) < arity:
        dom = funcs[0].domain if funcs else _domain(cfg)
        fams = _families(cfg)
        for fam in fams[len(funcs):arity]:
            funcs.append(sample_family(fam, dom))
        if len(funcs) < arity:
            raise UsageError(f"operator {cfg.operator} needs {arity} inputs")
    result = fn(funcs, dict(cfg.params))
    out = _outdir(cfg)
    target = out / f"{cfg.operator}.grid"
    save_grid(result, target)
    manifest = {
        "operator": cfg.operator,
        "params": dict(cfg.params),
        "inputs": [f.label for f in funcs],
        "output": target.name,
        "domain": result.domain.header(),
        "config_hash": cfg.hash(),
        "version": __version__,
    }
    if cfg.operator in ("T", "commutator", "ds_hypersingular", "ds_free_space"):
        manifest["c"] = singular.constant_c(result.domain.dim, float(cfg.params["s"]))
    _write_json(out / f"{cfg.operator}.manifest.json", manifest)
    print(f"wrote {target}")
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    if cfg.check not in verify.CHECKS:
        raise UsageError(f"unknown check {cfg.check!r}; choose from {sorted(verify.CHECKS)}")
    fn = verify.CHECKS[cfg.check]
    kwargs = {"N": cfg.domain.resolution, "half_width": cfg.domain.extent}
    if cfg.check in cfg.tolerances:
        if "tol" not in inspect.signature(fn).parameters:
            raise UsageError(f"check {cfg.check} has no tolerance to override")
        kwargs["tol"] = float(cfg.tolerances[cfg.check])
    fams = _families(cfg)
    if cfg.check == "spectral_vs_quadrature" and not cfg.families:
        fams = [f for f in fams if type(f).__name__ in ("Gaussian", "Bump", "WavePacket")]
    res = fn(fams, **kwargs)
    out = _outdir(cfg)
    _write_json(out / f"check_{cfg.check}.json", {
        "check": res.name, "passed": res.passed, "details": res.details,
        "config_hash": cfg.hash(), "seed": cfg.seed, "version": __version__, "timestamp": _stamp(),
    })
    print(f"{res.name}: {'PASS' if res.passed else 'FAIL'}")
    return EXIT_OK if res.passed else EXIT_FAIL


def _plot_rows(report: verify.SweepReport) -> list:
    rows = []
    for item in report.summary():
        for N, v in item["max_ratio"].items():
            rows.append([item["index"], N, repr(v), "true" if item["admissible"] else "false"])
    return rows


def cmd_sweep(cfg: RunConfig) -> int:
    if cfg.inequality not in verify.INEQUALITIES:
        raise UsageError(f"unknown inequality {cfg.inequality!r}; choose from {list(verify.INEQUALITIES)}")
    if cfg.domain.kind != "line":
        raise UsageError("sweeps run on truncated-line domains")
    scfg = verify.SweepConfig(
        inequality=cfg.inequality,
        points=cfg.points,
        families=cfg.families,
        resolutions=cfg.domain.resolutions,
        dim=cfg.domain.dim,
        half_width=cfg.domain.extent,
        seed=cfg.seed,
        explore_outside=cfg.explore_outside,
        workers=cfg.workers or 1,
    )
    report = verify.sweep(scfg, cfg.hash())
    out = _outdir(cfg)
    stem = f"sweep_{cfg.inequality}"
    (out / f"{stem}.csv").write_text(report.to_csv(), encoding="utf-8", newline="")
    (out / f"{stem}.json").write_text(report.to_json(_stamp()) + "\n", encoding="utf-8")
    with open(out / f"{stem}_plot.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["index", "N", "max_ratio", "admissible"])
        w.writerows(_plot_rows(report))
    ok = True
    for r in report.rows:
        if r.admissible and not (math.isfinite(r.ratio) and r.ratio > 0):
            ok = False
    if cfg.inequality == "besov":
        for r in report.rows:
            bound = abs(singular.constant_c(r.n, r.s)) * 1.03
            if r.admissible and r.ratio > bound:
                ok = False
    for item in report.summary():
        flags = ",".join(item["flags"])
        print(f"{item['index']}: max ratio {item['max_ratio']} {flags}".rstrip())
    return EXIT_OK if ok else EXIT_FAIL


def cmd_weights(cfg: RunConfig) -> int:
    if cfg.domain.kind != "line":
        raise UsageError("power weights need a truncated-line domain")
    dom = _domain(cfg)
    for p in cfg.weight_p:
        if not p > 1:
            raise UsageError(f"A_p needs p > 1, got {p}")
    rows = []
    for a in cfg.weight_exponents:
        w = norms.make_power_weight(a, dom)
        for p in cfg.weight_p:
            rows.append({"a": a, "p": p, "ap_constant": norms.ap_constant(w, p), "admissible": w.admissible(p)})
    out = _outdir(cfg)
    with open(out / "weights.csv", "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\r\n")
        wr.writerow(["a", "p", "N", "ap_constant", "admissible"])
        for r in rows:
            wr.writerow([repr(r["a"]), repr(r["p"]), dom.points, repr(r["ap_constant"]), "true" if r["admissible"] else "false"])
    _write_json(out / "weights.json", {"domain": dom.header(), "rows": rows, "config_hash": cfg.hash()})
    for r in rows:
        print(f"a={r['a']:g} p={r['p']:g} [w]_Ap={r['ap_constant']:.6g} classical={r['admissible']}")
    return EXIT_OK


def cmd_info(cfg: RunConfig) -> int:
    info = {
        "version": __version__,
        "operators": sorted(OPERATORS),
        "checks": sorted(verify.CHECKS),
        "inequalities": list(verify.INEQUALITIES),
        "families": sorted(FAMILY_TYPES),
        "workers": cfg.workers,
        "config_hash": cfg.hash(),
    }
    print(json.dumps(info, indent=2, sort_keys=True))
    return EXIT_OK


COMMANDS = {"apply": cmd_apply, "check": cmd_check, "sweep": cmd_sweep, "weights": cmd_weights, "info": cmd_info}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="TOML run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=str, help="output directory")
    p.add_argument("--resolution", type=int, help="points per axis")
    p.add_argument("--explore-outside", action="store_true", default=None,
                   help="also run inadmissible index tuples (flagged)")


def _param(text: str) -> tuple:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k, float(v)
    except ValueError:
        return k, v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fraccomm", description="Fractional commutator toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("apply", help="apply an operator to stored or sampled grid functions")
    p.add_argument("operator", nargs="?")
    p.add_argument("--input", action="append", dest="inputs", help="grid file (repeatable)")
    p.add_argument("--param", action="append", type=_param, default=[], help="key=value (repeatable)")
    _common(p)

    p = sub.add_parser("check", help="run a named numerical check")
    p.add_argument("name", nargs="?")
    _common(p)

    p = sub.add_parser("sweep", help="ratio sweep for one inequality")
    p.add_argument("inequality", nargs="?")
    p.add_argument("--resolutions", type=lambda s: tuple(int(x) for x in s.split(",")), help="comma separated")
    _common(p)

    p = sub.add_parser("weights", help="A_p constants of power weights")
    p.add_argument("--exponents", type=lambda s: tuple(float(x) for x in s.split(",")))
    p.add_argument("--p", dest="weight_p", type=lambda s: tuple(float(x) for x in s.split(",")))
    _common(p)

    p = sub.add_parser("info", help="show version and available names")
    _common(p)
    return parser


def _workers(arg, cfg: RunConfig) -> int:
    if arg is not None:
        return arg
    if cfg.workers is not None:
        return cfg.workers
    env = os.environ.get("FRACCOMM_WORKERS")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"FRACCOMM_WORKERS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def resolve_config(args) -> RunConfig:
    cfg = load(args.config) if args.config else RunConfig()
    over = dict(command=args.command, seed=args.seed, out=args.out, explore_outside=args.explore_outside,
                resolution=args.resolution)
    if args.command == "apply":
        over.update(operator=args.operator, inputs=tuple(args.inputs) if args.inputs else None)
        if args.param:
            over["params"] = {**cfg.params, **dict(args.param)}
    elif args.command == "check":
        over["check"] = args.name
    elif args.command == "sweep":
        over.update(inequality=args.inequality, resolutions=args.resolutions)
    elif args.command == "weights":
        over.update(weight_exponents=args.exponents, weight_p=args.weight_p)
    cfg = cfg.override(**over)
    workers = _workers(args.workers, cfg)
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    return cfg.override(workers=workers)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command](cfg)
    except verify.VerificationError as exc:
        print(f"fraccomm: tolerance failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ConfigError, UsageError, GridError, ValueError, TypeError, OSError) as exc:
        print(f"fraccomm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_exit():  # console-script entry point
    sys.exit(main())
