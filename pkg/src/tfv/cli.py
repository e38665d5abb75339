"""Command-line front end.

    tfv classify  --field uhs_en
    tfv curvature --space sphere --n 3
    tfv theorem   --check torqued-obstruction --field hyp_torqued
    tfv flow      --space hyperboloid --field f_torqued --start 1,1,1 --out trace
    tfv suite     --seed 7

Every run prints (or writes to ``--out``) one JSON report with a ``checks``
array. Exit codes: 0 all expectations met, 1 a numerical check failed,
2 configuration error. Settings come from flags, then an optional
``--config`` file of ``key = value`` lines, then defaults.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, ad, catalog, classifier, spaces, suite, tensor, theorems
from .errors import ConfigError, DomainError, PreconditionError, TFVError

COMMANDS = ("classify", "curvature", "theorem", "flow", "suite")
THEOREM_CHECKS = ("curvature-identity", "torqued-obstruction", "anti-obstruction")
# catalog field used by `theorem --check curvature-identity` when only --space is given
SPACE_FIELD = {
    "uhs": "uhs_en", "hyperboloid": "hyp_torqued", "euclidean": "euclid_position",
    "sphere": "sphere_torse", "twisted_product": "twisted_torqued",
}
OBSTRUCTION_FIELD = {
    "torqued": {"default": "hyp_torqued", "hyperboloid": "hyp_torqued", "twisted_product": "twisted_torqued"},
    "anti_torqued": {"default": "uhs_en", "uhs": "uhs_en", "hyperboloid": "hyp_antitorqued"},
}
DEFAULT_TOL = {
    "classify": 1e-8, "curvature": 1e-7, "theorem": None, "flow": 1e-6, "suite": None,
}


@dataclass
class RunConfig:
    command: str
    space: str | None = None
    field: str | None = None
    n: int | None = None
    samples: int = 200
    seed: int = 42
    tol: float | None = None
    out: str | None = None
    check: str | None = None
    t_max: float = 0.5
    step: float = 1e-3
    start: tuple | None = None
    backend: str = "exact"
    timing: bool = False

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.n is not None and not 2 <= self.n <= spaces.MAX_DIM:
            raise ConfigError(f"n must be in [2, {spaces.MAX_DIM}], got {self.n}")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.tol is not None and not self.tol > 0:
            raise ConfigError("tol must be > 0")
        if not (self.step > 0 and self.t_max > 0):
            raise ConfigError("step and t-max must be > 0")
        if self.backend not in ad.BACKENDS:
            raise ConfigError(f"backend must be one of {sorted(ad.BACKENDS)}")
        if self.check is not None and self.check not in THEOREM_CHECKS:
            raise ConfigError(f"check must be one of {THEOREM_CHECKS}")
        return self

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("timing")
        if d["start"] is not None:
            d["start"] = list(d["start"])
        return d


def _parse_start(text) -> tuple:
    try:
        return tuple(float(v) for v in str(text).replace(" ", "").split(","))
    except ValueError:
        raise ConfigError(f"bad start point {text!r}") from None


FIELD_TYPES = {
    "space": str, "field": str, "n": int, "samples": int, "seed": int, "tol": float,
    "out": str, "check": str, "t_max": float, "step": float, "start": _parse_start,
    "backend": str, "timing": lambda v: str(v).lower() in ("1", "true", "yes", "on"),
}


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` comments and blank lines are ignored.
    Keys use the flag spelling with or without dashes (``t-max``, ``t_max``)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = FIELD_TYPES[key](value)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}") from None
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tfv", description="Torse-forming vector fields on model spaces.")
    p.add_argument("--version", action="version", version=f"tfv {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    S = argparse.SUPPRESS
    for name in COMMANDS:
        c = sub.add_parser(name)
        c.add_argument("--config", default=S, help="key = value file (flags win over it)")
        c.add_argument("--space", default=S, choices=sorted(spaces.SPACES))
        c.add_argument("--field", default=S, help="catalog id (flow: scalar field id)")
        c.add_argument("--n", type=int, default=S)
        c.add_argument("--samples", type=int, default=S)
        c.add_argument("--seed", type=int, default=S)
        c.add_argument("--tol", type=float, default=S)
        c.add_argument("--out", default=S, help="write the JSON report here")
        c.add_argument("--check", default=S, choices=THEOREM_CHECKS)
        c.add_argument("--t-max", dest="t_max", type=float, default=S)
        c.add_argument("--step", type=float, default=S)
        c.add_argument("--start", type=_parse_start, default=S, help="comma-separated chart point")
        c.add_argument("--backend", default=S, choices=sorted(ad.BACKENDS))
        c.add_argument("--timing", action="store_true", default=S,
                       help="add wall-clock to the report (breaks byte-stability)")
    return p


def resolve_config(argv) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    values = read_config_file(args.pop("config")) if "config" in args else {}
    values.update(args)
    return RunConfig(command=command, **values).validate()


# commands ----------------------------------------------------------------------


def _check(id, passed, max_residual, tolerance, witnesses=(), expected_negative=False, **extra):
    out = {
        "id": id,
        "pass": None if passed is None else bool(passed),
        "max_residual": None if max_residual is None else float(max_residual),
        "tolerance": tolerance,
        "witnesses": list(witnesses),
        "expected_negative": expected_negative,
    }
    out.update(extra)
    return out


def _met(check) -> bool:
    if check["pass"] is None:
        return True
    return check["pass"] != check["expected_negative"]


def _entries(cfg: RunConfig) -> list:
    if cfg.field is None:
        raise ConfigError("--field is required")
    if cfg.field == "sphere_torse":
        found = [catalog.sphere_torse(cfg.n or 3, chart) for chart in ("north", "south")]
    else:
        found = [catalog.entry(cfg.field, cfg.n)]
    if cfg.space is not None and cfg.space != found[0].space.name:
        raise ConfigError(f"{cfg.field} lives on {found[0].space.name}, not {cfg.space}")
    return found


def cmd_classify(cfg: RunConfig) -> dict:
    backend = ad.get_backend(cfg.backend)
    base = classifier.Tolerances.for_backend(backend)
    tol = classifier.Tolerances(residual=cfg.tol, zero=base.zero) if cfg.tol else base
    checks, results = [], []
    for e in _entries(cfg):
        pts = e.sample(cfg.samples, cfg.seed)
        verdict = classifier.classify_region(e.space, e.field, pts, tol, backend)
        lengths = classifier.length_and_geodesic(e.space, e.field, pts, backend=backend)
        for flag, want in sorted(e.expected.items()):
            witnesses = [{"point": [float(c) for c in p]} for p in verdict.failures.get(flag, [])[:3]]
            checks.append(_check(
                f"classify/{e.space.label}/{e.id}/{flag}", verdict.flags[flag],
                verdict.max_residual, tol.residual, witnesses, expected_negative=not want,
            ))
        results.append({
            "field": e.id, "space": e.space.label, "domain": e.domain_note,
            "verdict": verdict.summary(),
            "length": dataclasses.asdict(lengths) | {"value": lengths.length_value},
        })
    return {"checks": checks, "results": results}


def _curvature_targets(cfg):
    n = cfg.n or 3
    name = cfg.space or "hyperboloid"
    if name == "sphere":
        return [spaces.sphere(n, "north"), spaces.sphere(n, "south")]
    return [spaces.make_space(name, n)]


def cmd_curvature(cfg: RunConfig, planes: int = 3) -> dict:
    backend = ad.get_backend(cfg.backend)
    tol = cfg.tol or DEFAULT_TOL["curvature"]
    checks, results = [], []
    for sp in _curvature_targets(cfg):
        rng = np.random.default_rng(cfg.seed)
        pts = spaces.sample_points(sp, cfg.samples, cfg.seed)
        ks = []
        for p in pts:
            R = tensor.riemann_tensor(sp, p, backend)
            g = tensor.metric_at(sp, p)
            ks.append([tensor.sectional_from(R, g, *rng.normal(size=(2, sp.dim))) for _ in range(planes)])
        ks = np.array(ks)
        summary = {"space": sp.label, "K_min": float(ks.min()), "K_max": float(ks.max())}
        if sp.curvature is None:
            checks.append(_check(f"curvature/{sp.label}", None, None, tol,
                                 note="no constant curvature declared; range reported"))
        else:
            err = np.abs(ks - sp.curvature).max(axis=1)
            i = int(np.argmax(err))
            checks.append(_check(
                f"curvature/{sp.label}", err[i] < tol, err[i], tol,
                [{"point": [float(c) for c in pts[i]], "K": float(ks[i][np.argmax(np.abs(ks[i] - sp.curvature))])}],
                expected_K=sp.curvature,
            ))
        results.append(summary)
    return {"checks": checks, "results": results}


def _reports_to_checks(reports, tol):
    out = []
    for rep in reports:
        c = rep.as_check()
        if tol is not None and rep.passed is not None:
            c["tolerance"] = tol
            c["pass"] = rep.max_residual < tol
        out.append(c)
    return out


def cmd_theorem(cfg: RunConfig) -> dict:
    backend = ad.get_backend(cfg.backend)
    selected = [cfg.check] if cfg.check else list(THEOREM_CHECKS)
    reports, results = [], {}
    for name in selected:
        if name == "curvature-identity":
            if cfg.field is None:
                space_name = cfg.space or "hyperboloid"
                if space_name not in SPACE_FIELD:
                    raise ConfigError(f"unknown space {space_name!r}")
                e = catalog.entry(SPACE_FIELD[space_name], cfg.n)
            else:
                e = _entries(cfg)[0]
            negative = e.space.curvature != -1.0
            reports.append(theorems.curvature_identity_check(
                e.space, e.field, e.sample(cfg.samples, cfg.seed), seed=cfg.seed,
                expect_negative=negative, backend=backend,
            ))
            continue
        flag = "torqued" if name == "torqued-obstruction" else "anti_torqued"
        field_id = cfg.field or OBSTRUCTION_FIELD[flag].get(cfg.space or "default")
        try:
            if field_id is None:
                raise ConfigError(f"no {flag} catalog field on {cfg.space}")
            e = _entries(RunConfig(cfg.command, cfg.space, field_id, cfg.n))[0]
            if not e.expected.get(flag):
                raise ConfigError(f"{e.id} is not cataloged as {flag}")
        except ConfigError:
            if cfg.check is None:
                continue  # running every check: skip the ones that do not apply
            raise
        pts = e.sample(cfg.samples, cfg.seed)
        if name == "torqued-obstruction":
            rep = theorems.torqued_obstruction_check(e.space, e, pts, backend=backend)
            results["formula_agreement"] = rep["formula_agreement"]
        else:
            rep = theorems.antitorqued_obstruction_check(e.space, e, pts, backend=backend)
        reports.extend([rep["gradient"], rep["closed"]])
    return {"checks": _reports_to_checks(reports, cfg.tol), "results": results,
            "note": theorems.GLOBAL_NOTE}


def _default_start(sp) -> np.ndarray:
    if sp.name == "hyperboloid":
        return np.ones(sp.dim)
    x = np.zeros(sp.dim)
    if sp.name == "uhs":
        x[-1] = 1.0
    return x


def cmd_flow(cfg: RunConfig) -> dict:
    backend = ad.get_backend(cfg.backend)
    sp = spaces.make_space(cfg.space or "hyperboloid", cfg.n or 3)
    scalar_id = cfg.field or ("f_torqued" if sp.name == "hyperboloid" else f"x{sp.dim}")
    f = catalog.scalar(scalar_id, sp)
    start = np.array(cfg.start, dtype=float) if cfg.start is not None else _default_start(sp)
    if start.shape != (sp.dim,):
        raise ConfigError(f"--start needs {sp.dim} coordinates")
    if not sp.contains(start):
        raise ConfigError(f"start point {start.tolist()} outside the {sp.label} chart")
    tol = cfg.tol or DEFAULT_TOL["flow"]
    tr = theorems.gradient_flow_check(sp, f, start, cfg.t_max, cfg.step, backend)
    check = _check(f"flow/{sp.label}/{scalar_id}", tr.linearity_error < tol, tr.linearity_error, tol,
                   truncated=tr.truncated)
    return {
        "checks": [check],
        "results": {
            "space": sp.label, "scalar": scalar_id, "steps": len(tr.times) - 1,
            "t_end": float(tr.times[-1]), "end": [float(c) for c in tr.points[-1]],
            "f_start": float(tr.f_values[0]), "f_end": float(tr.f_values[-1]),
        },
        "_csv": tr.csv(),
    }


def cmd_suite(cfg: RunConfig) -> dict:
    checks = suite.run_suite(cfg.seed, cfg.tol)
    return {"checks": [c.as_dict() for c in checks]}


HANDLERS = {
    "classify": cmd_classify, "curvature": cmd_curvature, "theorem": cmd_theorem,
    "flow": cmd_flow, "suite": cmd_suite,
}


def _csv_path(out: str) -> Path:
    p = Path(out)
    return p.with_suffix(".csv") if p.suffix == ".json" else Path(out + ".csv")


def run(cfg: RunConfig) -> tuple[dict, int]:
    t0 = time.perf_counter()
    body = HANDLERS[cfg.command](cfg)
    csv = body.pop("_csv", None)
    report = {"tool": "tfv", "version": __version__, "command": cfg.command, "config": cfg.echo()}
    report.update(body)
    if csv is not None and cfg.out:
        report["csv"] = str(_csv_path(cfg.out))
        _csv_path(cfg.out).write_text(csv)
    met = [_met(c) for c in report["checks"]]
    report["all_met"] = all(met)
    if cfg.timing:
        report["wall_clock_s"] = time.perf_counter() - t0
    return report, 0 if all(met) else 1


def _dump(report) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def main(argv=None) -> int:
    try:
        cfg = resolve_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"tfv: config error: {exc}", file=sys.stderr)
        return 2
    try:
        report, code = run(cfg)
    except (ConfigError, DomainError) as exc:
        print(f"tfv: config error: {exc}", file=sys.stderr)
        return 2
    except (TFVError, ArithmeticError, PreconditionError) as exc:
        print(f"tfv: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = _dump(report)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
