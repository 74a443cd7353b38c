"""Command line driver: ``bcjacobi {poly,verify,convolve}``.

Exit codes are 0 on success, 1 when a check fails or a Gram matrix is
ill-conditioned, and 2 on usage or configuration errors.  Output is written
once at the end and is byte-identical for identical configuration and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import BCJacobiError, IllConditioned
from .hypergroup import convolve
from .jacobi import jacobi_polynomial
from .matrices import RNG_NAME
from .quadrature import check_alcove
from .roots import DominantWeight, RankProfile, lower_set, weights_up_to_l1
from .suites import SUITES, SuiteSettings, run_suites

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CONFIG_KEYS = ("q", "d", "mu", "lambda", "x", "y", "grid", "samples", "seed", "suite", "format", "out")


class UsageError(Exception):
    pass


# --- serialization --------------------------------------------------------


def _num(v: float) -> str:
    if math.isnan(v):
        return '"NaN"'
    if math.isinf(v):
        return '"Infinity"' if v > 0 else '"-Infinity"'
    return format(v, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float printed to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(rows, header) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(float(v)).strip('"') if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# --- configuration --------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    q: int
    d: int
    mu: float
    lambdas: list = field(default_factory=list)
    x: list | None = None
    y: list | None = None
    grid: int = 64
    samples: int | None = None
    seed: int | None = None
    suites: list = field(default_factory=list)
    format: str = "json"
    out: str | None = None

    @property
    def profile(self) -> RankProfile:
        return RankProfile(self.q, self.d, self.mu)

    def as_dict(self) -> dict:
        out = dict(command=self.command, q=self.q, d=self.d, mu=self.mu)
        out["lambda"] = [list(l.entries) for l in self.lambdas]
        for key in ("x", "y", "grid", "samples", "seed"):
            out[key] = getattr(self, key)
        out["suite"] = list(self.suites)
        out["format"] = self.format
        return out


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse {text!r} as comma-separated numbers") from exc


def _ints(text: str) -> tuple[int, ...]:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise UsageError(f"weight {text!r} must have integer entries")
    return tuple(int(v) for v in vals)


def _listify(v):
    if v is None:
        return []
    return v if isinstance(v, list) else [v]


def build_config(args) -> RunConfig:
    """Merge ``--config`` file values with flags (flags win) and validate."""
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from exc
        unknown = set(loaded) - set(CONFIG_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys {sorted(unknown)}")
        values.update(loaded)
    for key in CONFIG_KEYS:
        flag = getattr(args, key.replace("lambda", "lambdas"), None)
        if flag not in (None, []):
            values[key] = flag
    for key in ("q", "d", "mu"):
        if key not in values:
            raise UsageError(f"--{key} is required")
    try:
        q, d, mu = int(values["q"]), int(values["d"]), float(values["mu"])
        profile = RankProfile(q, d, mu)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc

    lambdas = []
    for item in _listify(values.get("lambda")):
        entries = tuple(int(v) for v in item) if isinstance(item, (list, tuple)) else _ints(item)
        try:
            lambdas.append(DominantWeight(entries, profile.lattice_scale))
        except ValueError as exc:
            raise UsageError(f"invalid weight {item!r}: {exc}") from exc
        if len(entries) != q:
            raise UsageError(f"weight {item!r} must have {q} entries")

    def point(key):
        raw = values.get(key)
        if raw is None:
            return None
        pt = [float(v) for v in raw] if isinstance(raw, list) else _floats(raw)
        try:
            check_alcove(pt, q)
        except ValueError as exc:
            raise UsageError(f"--{key}: {exc}") from exc
        return pt

    grid = int(values.get("grid", 64))
    if not 2 <= grid <= 512:
        raise UsageError("--grid must lie in [2, 512]")
    samples = values.get("samples")
    if samples is not None and int(samples) < 1:
        raise UsageError("--samples must be positive")
    seed = values.get("seed")
    if seed is not None and int(seed) < 0:
        raise UsageError("--seed must be nonnegative")
    suites = []
    for item in _listify(values.get("suite")):
        suites.extend(s.strip() for s in str(item).split(",") if s.strip())
    if "all" in suites or (args.command == "verify" and not suites):
        suites = list(SUITES)
    bad = [s for s in suites if s not in SUITES]
    if bad:
        raise UsageError(f"unknown suite(s) {bad}; choose from {', '.join(SUITES)}")
    fmt = values.get("format", "json")
    if fmt not in ("json", "csv"):
        raise UsageError("--format must be json or csv")
    if args.command in ("verify", "convolve") and seed is None:
        raise UsageError(f"--seed is required for {args.command}")
    cfg = RunConfig(
        args.command, q, d, mu, lambdas, point("x"), point("y"), grid,
        None if samples is None else int(samples), None if seed is None else int(seed),
        suites, fmt, values.get("out"),
    )
    if args.command == "convolve" and (cfg.x is None or cfg.y is None):
        raise UsageError("convolve needs --x and --y")
    return cfg


# --- commands -------------------------------------------------------------


def _envelope(cfg, results, extra=None) -> dict:
    doc = {"config": cfg.as_dict(), "results": results}
    if extra:
        doc.update(extra)
    doc["environment"] = {"rng": RNG_NAME, "seed": cfg.seed, "version": __version__}
    return doc


def cmd_poly(cfg: RunConfig) -> tuple[str, int]:
    profile = cfg.profile
    lams = cfg.lambdas or weights_up_to_l1(cfg.q, 4, profile.lattice_scale)
    rows = []
    for lam in lams:
        poly = jacobi_polynomial(lam, profile, cfg.grid)
        rows.append({
            "lambda": list(lam.entries),
            "lower_set": [list(mu.entries) for mu in lower_set(lam, lam.scale)],
            "coefficients": [[list(mu.entries), c] for mu, c in poly.coeffs.items()],
            "c_value": poly.c_value,
            "norm_sq": poly.norm_sq,
            "plancherel_weight": poly.plancherel_weight,
            "gram_condition": poly.gram_condition,
            "R_at_zero": float(poly(np.zeros(cfg.q))),
        })
    if cfg.format == "csv":
        flat = []
        for r in rows:
            for mu, c in r["coefficients"]:
                flat.append([_wt(r["lambda"]), _wt(mu), c, r["c_value"], r["norm_sq"], r["plancherel_weight"],
                             r["gram_condition"]])
        header = ["lambda", "mu", "coefficient", "c_value", "norm_sq", "plancherel_weight", "gram_condition"]
        return _csv(flat, header), EXIT_OK
    return dumps(_envelope(cfg, rows)) + "\n", EXIT_OK


def _wt(entries) -> str:
    return " ".join(str(e) for e in entries)


def cmd_verify(cfg: RunConfig) -> tuple[str, int]:
    settings = SuiteSettings(grid_order=cfg.grid, lambdas=list(cfg.lambdas))
    if cfg.samples is not None:
        settings.product_samples = cfg.samples
    if cfg.x is not None and cfg.y is not None:
        settings.x, settings.y = np.array(cfg.x), np.array(cfg.y)
    results = run_suites(cfg.profile, cfg.suites, settings, cfg.seed)
    ok = all(r.passed for r in results)
    code = EXIT_OK if ok else EXIT_FAIL
    if cfg.format == "csv":
        header = ["suite", "name", "estimate", "reference", "std_error", "residual", "threshold", "passed", "n_samples",
                  "seed"]
        rows = [[getattr(r, h) if getattr(r, h) is not None else "" for h in header] for r in results]
        return _csv(rows, header), code
    summary = {"n_checks": len(results), "n_failed": sum(not r.passed for r in results), "passed": ok}
    return dumps(_envelope(cfg, [r.to_dict() for r in results], {"summary": summary})) + "\n", code


def cmd_convolve(cfg: RunConfig) -> tuple[str, int]:
    n = cfg.samples or 10_000
    meas = convolve(np.array(cfg.x), np.array(cfg.y), cfg.profile, n, cfg.seed)
    meta = {
        "profile": {"q": cfg.q, "d": cfg.d, "mu": cfg.mu},
        "seed": cfg.seed,
        "n": n,
        "n_atoms": len(meas),
        "method": meas.metadata.get("method"),
        "total_weight": meas.total_weight,
        "effective_sample_size": meas.effective_sample_size(),
    }
    if cfg.format == "csv":
        head = "".join(f"# {k}={v if not isinstance(v, dict) else json.dumps(v)}\n" for k, v in meta.items())
        cols = [f"z{i + 1}" for i in range(cfg.q)] + ["weight"]
        rows = [list(map(float, a)) + [float(w)] for a, w in zip(meas.atoms, meas.weights)]
        return head + _csv(rows, cols), EXIT_OK
    atoms = [{"z": a, "weight": float(w)} for a, w in zip(meas.atoms.tolist(), meas.weights)]
    return dumps(_envelope(cfg, atoms, {"metadata": meta})) + "\n", EXIT_OK


COMMANDS = {"poly": cmd_poly, "verify": cmd_verify, "convolve": cmd_convolve}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bcjacobi", description="BC-type Jacobi polynomials and their hypergroup convolution.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "poly": "coefficients, c-function, norms and Plancherel weights",
        "verify": "run verification suites",
        "convolve": "dump the empirical measure of delta_x * delta_y",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--q", type=int)
        p.add_argument("--d", type=int, choices=(1, 2, 4))
        p.add_argument("--mu", type=float)
        p.add_argument("--lambda", dest="lambdas", action="append", default=[], metavar="L1,...,Lq",
                       help="dominant weight (repeatable)")
        p.add_argument("--grid", type=int, help="quadrature nodes per dimension (default 64)")
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--out", help="write to this path instead of stdout")
        p.add_argument("--config", help="JSON file with the same keys as the flags")
        if name != "poly":
            p.add_argument("--x", help="alcove point, comma-separated")
            p.add_argument("--y", help="alcove point, comma-separated")
        if name == "verify":
            p.add_argument("--suite", action="append", default=[], help=f"one or more of {', '.join(SUITES)}, or all")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    for key in ("x", "y", "suite"):
        if not hasattr(args, key):
            setattr(args, key, None)
    try:
        cfg = build_config(args)
        text, code = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except IllConditioned as exc:
        print(f"bcjacobi: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except BCJacobiError as exc:
        print(f"bcjacobi: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
