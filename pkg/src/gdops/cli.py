"""``gd``: command-line front end to the checks and harnesses.

Every command prints a JSON envelope ``{"command", "config", "report",
"tool_version"}`` with sorted keys.  Exit status is 0 when the checked
property holds, 2 when it fails and 1 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .cones import (
    central_ray_check,
    central_ray_search,
    diagonal_basis,
    exhaustion_convexity_check,
    prelevel_harness,
    SearchError,
)
from .garding import GardingError, barrier_harness, garding_spectrum, in_garding_cone, is_hyperbolic
from .linalg import LinalgError, load_matrix
from .majorize import (
    check_basic_lemma,
    counterexample_ratio,
    counterexample_scan,
    majorization_harness,
    operator_polynomial,
    pogorelov_verify,
)
from .operators import BUILTIN_NAMES, DiagonalPoly, OperatorSpec, SpecError, builtin, load_operator
from .poly import PolyError
from .reports import jsonable, write_csv

EXIT_PASS, EXIT_USAGE, EXIT_FAIL = 0, 1, 2

CONFIG_FIELDS = {
    "spec", "matrix", "base", "builtin", "samples", "seed", "tol", "n", "N", "k", "p", "algebra",
    "eps", "s", "c", "gamma", "out", "format", "search", "restarts", "iters", "diagonal_model",
}

DEFAULTS = {"samples": 1000, "seed": 42, "tol": 1e-8, "format": "json", "algebra": "R"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser, spec: bool = True) -> None:
    if spec:
        p.add_argument("spec", nargs="?", help="operator JSON file")
        p.add_argument("--builtin", choices=BUILTIN_NAMES, help="named operator instead of a file")
        p.add_argument("--n", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--p", type=int)
        p.add_argument("--N", dest="N", type=int)
        p.add_argument("--algebra", choices=["R", "C", "H"])
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--config", help="JSON file with option values; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gd {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("check", help="central ray condition, hyperbolicity and cone membership of Id")
    _common(p)

    p = sub.add_parser("eigs", help="Garding eigenvalues of a matrix")
    _common(p)
    p.add_argument("--matrix", help="direction B (JSON matrix file)")
    p.add_argument("--base", help="base point A (default: identity)")

    p = sub.add_parser("majorize", help="determinant majorization harness")
    _common(p)
    p.add_argument("--gamma", type=float)

    p = sub.add_parser("barrier", help="log-derivative, Guler and discriminant checks")
    _common(p)

    p = sub.add_parser("central-ray", help="gradient at Id and optional central ray search")
    _common(p)
    p.add_argument("--search", action="store_true", default=None)
    p.add_argument("--diagonal-model", dest="diagonal_model", action="store_true", default=None,
                   help="search only among diagonal matrices")
    p.add_argument("--restarts", type=int)
    p.add_argument("--iters", type=int)

    p = sub.add_parser("exhaustion", help="prelevel radius bound and convexity of <y,x> - log g")
    _common(p)
    p.add_argument("--matrix", help="y (default: identity)")
    p.add_argument("--c", type=float)

    p = sub.add_parser("counterexample", help="the diagonal operators without the central ray property")
    cx = p.add_subparsers(dest="which", parser_class=_Parser)
    q = cx.add_parser("ratio")
    _common(q, spec=False)
    q.add_argument("--s", type=float)
    q = cx.add_parser("scan")
    _common(q, spec=False)
    q.add_argument("--gamma", type=float)
    q = cx.add_parser("pogorelov")
    _common(q, spec=False)
    q.add_argument("--N", dest="N", type=int)
    q.add_argument("--n", type=int)
    q.add_argument("--eps", type=float)
    return parser


def resolve_config(ns: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults, the --config file and explicit flags (in that order)."""
    cfg = dict(DEFAULTS)
    if getattr(ns, "config", None):
        try:
            data = json.loads(Path(ns.config).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{ns.config}: invalid JSON at line {exc.lineno}") from None
        if not isinstance(data, dict):
            raise UsageError(f"{ns.config}: config must be a JSON object")
        unknown = sorted(set(data) - CONFIG_FIELDS)
        if unknown:
            raise UsageError(f"{ns.config}: unknown config fields {unknown}")
        cfg.update(data)
    for key, value in vars(ns).items():
        if key in ("config", "command", "which") or value is None:
            continue
        cfg[key] = value
    if int(cfg["samples"]) < 1:
        raise UsageError("--samples must be >= 1")
    if not float(cfg["tol"]) > 0:
        raise UsageError("--tol must be positive")
    return cfg


def _operator(cfg: dict) -> OperatorSpec:
    if cfg.get("builtin"):
        return builtin(cfg["builtin"], n=cfg.get("n"), k=cfg.get("k"), p=cfg.get("p"),
                       algebra=cfg.get("algebra", "R"), big_n=cfg.get("N"))
    if not cfg.get("spec"):
        raise UsageError("give an operator file or --builtin NAME")
    return load_operator(cfg["spec"])


def _matrix(path: str | None, f: OperatorSpec, what: str) -> np.ndarray | None:
    if path is None:
        return None
    m = np.array(load_matrix(path).entries)
    if m.shape[0] != f.space.dim:
        raise UsageError(f"{path}: {what} has size {m.shape[0]}, operator acts on size {f.space.dim}")
    return m


# -- commands: each returns (passed, report dict, csv rows or None) --------

def cmd_check(cfg):
    f = _operator(cfg)
    poly = operator_polynomial(f)
    lemma = check_basic_lemma(poly) if poly is not None else None
    hyper = is_hyperbolic(f, sample_count=min(int(cfg["samples"]), 200), seed=cfg["seed"])
    cone = in_garding_cone(f, np.eye(f.space.dim))
    ok = hyper.passed and cone and (lemma is None or lemma.passed)
    # an operator read off diagonal entries has no eigenvalue polynomial; its
    # central ray test is the coefficient test on that polynomial
    report = {
        "pass": ok,
        "degree": f.degree,
        "basic_lemma": lemma.to_dict() if lemma is not None else None,
        "central_ray_hypothesis": None if lemma is None else lemma.central_ray_equal,
        "hyperbolicity": hyper.to_dict(),
        "identity_in_cone": cone,
        "diagonal_operator": isinstance(f, DiagonalPoly),
    }
    return ok, report, None


def cmd_eigs(cfg):
    f = _operator(cfg)
    b = _matrix(cfg.get("matrix"), f, "--matrix")
    if b is None:
        raise UsageError("eigs needs --matrix")
    a = _matrix(cfg.get("base"), f, "--base")
    spec = garding_spectrum(f, a, b)
    report = spec.to_dict()
    report["pass"] = True
    return True, report, [(i, v) for i, v in enumerate(spec.values)]


def cmd_majorize(cfg):
    f = _operator(cfg)
    rep = majorization_harness(f, samples=int(cfg["samples"]), seed=int(cfg["seed"]), gamma=cfg.get("gamma"))
    return rep.passed, rep.to_dict(), list(enumerate(rep.gaps))


def cmd_barrier(cfg):
    f = _operator(cfg)
    rep = barrier_harness(f, samples=int(cfg["samples"]), seed=int(cfg["seed"]))
    return rep.passed, rep.to_dict(), None


def cmd_central_ray(cfg):
    f = _operator(cfg)
    rep = central_ray_check(f, tol=float(cfg["tol"]), samples=min(int(cfg["samples"]), 50), seed=int(cfg["seed"]))
    report = rep.to_dict()
    ok = rep.passed
    if cfg.get("search"):
        basis = diagonal_basis(f.space.dim) if cfg.get("diagonal_model") else None
        res = central_ray_search(f, seed=int(cfg["seed"]), iters=int(cfg.get("iters") or 200),
                                 restarts=int(cfg.get("restarts") or 20), basis=basis)
        report["search"] = res.to_dict()
        ident = np.eye(f.space.dim) / math.sqrt(f.space.dim)
        report["search"]["angle_to_identity"] = float(np.arccos(np.clip(np.vdot(res.ray_point, ident), -1, 1)))
    report["pass"] = ok
    return ok, report, None


def cmd_exhaustion(cfg):
    f = _operator(cfg)
    y = _matrix(cfg.get("matrix"), f, "--matrix")
    y = np.eye(f.space.dim) if y is None else y
    c = float(cfg.get("c", 5.0) if cfg.get("c") is not None else 5.0)
    pre = prelevel_harness(f, y, c, samples=int(cfg["samples"]), seed=int(cfg["seed"]))
    conv = exhaustion_convexity_check(f, y, samples=min(int(cfg["samples"]), 500), seed=int(cfg["seed"]))
    ok = pre.passed and conv.passed
    return ok, {"pass": ok, "prelevel": pre.to_dict(), "convexity": conv.to_dict()}, None


def cmd_counterexample(cfg, which):
    if which == "ratio":
        s = float(cfg.get("s") if cfg.get("s") is not None else 1e-6)
        ratio = counterexample_ratio(s)
        expected = s ** (1.0 / 6.0)
        ok = abs(ratio - expected) <= 1e-12 * max(1.0, expected)
        return ok, {"pass": ok, "s": s, "ratio": ratio, "sixth_root": expected}, [(s, ratio)]
    if which == "scan":
        rep = counterexample_scan(gamma=float(cfg.get("gamma") if cfg.get("gamma") is not None else 0.5))
        rows = [(r["s"], r["ratio"]) for r in rep.details["scan"]]
        return rep.passed, rep.to_dict(), rows
    if which == "pogorelov":
        rep = pogorelov_verify(big_n=int(cfg.get("N") or 3), n=int(cfg.get("n") or 2),
                               eps=float(cfg.get("eps") if cfg.get("eps") is not None else 1e-2),
                               seed=int(cfg["seed"]), rtol=1e-3)
        return rep.passed, rep.to_dict(), None
    raise UsageError("counterexample needs one of: ratio, scan, pogorelov")


COMMANDS = {
    "check": cmd_check,
    "eigs": cmd_eigs,
    "majorize": cmd_majorize,
    "barrier": cmd_barrier,
    "central-ray": cmd_central_ray,
    "exhaustion": cmd_exhaustion,
}


def _emit(cfg: dict, envelope: dict, rows) -> None:
    out = cfg.get("out")
    if cfg.get("format") == "csv":
        if rows is None:
            raise UsageError(f"{envelope['command']} has no tabular output; use --format json")
        target = out if out else sys.stdout
        if out:
            write_csv(out, ["index", "value"], rows)
        else:
            import csv
            w = csv.writer(target)
            w.writerow(["index", "value"])
            for r in rows:
                w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
        return
    text = json.dumps(envelope, sort_keys=True, indent=2, allow_nan=False) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise UsageError("gd: a command is required (see gd --help)")
        cfg = resolve_config(ns)
        if ns.command == "counterexample":
            which = getattr(ns, "which", None)
            if which is None:
                raise UsageError("counterexample needs one of: ratio, scan, pogorelov")
            ok, report, rows = cmd_counterexample(cfg, which)
            name = f"counterexample {which}"
        else:
            ok, report, rows = COMMANDS[ns.command](cfg)
            name = ns.command
        envelope = {"tool_version": __version__, "command": name, "config": jsonable(cfg), "report": jsonable(report)}
        _emit(cfg, envelope, rows)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc.filename}: no such file", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SpecError, LinalgError, PolyError, GardingError, SearchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_PASS if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
