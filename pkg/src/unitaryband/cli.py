"""Config-driven batch runner.

Every run reads one JSON document::

    {
      "model": {"variant": "random", "t": 0.5},
      "seed": 7,
      "params": {"n_grid": 64, "steps": 100000}
    }

and writes its artefacts plus ``manifest.json`` into the output directory.
Exit codes: 0 success, 1 numeric budget exceeded, 2 configuration error,
3 a ``verify`` check failed.

Examples
--------
.. code-block:: console

    $ unitaryband lyapunov --config run.json --out runs/lya --plotdata
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy
from threadpoolctl import threadpool_limits

from . import __version__
from .core import build_windowed_unitary
from .diagnostics import (
    empirical_independence,
    localization_profile,
    truncated_spectrum,
)
from .errors import BudgetExceededError, ConfigError, ReportMissingError, UnitaryBandError
from .halfline import discriminant_profile, find_eigenvalues, settled_index
from .lyapunov import approximant_difference, gamma_profile, gordon_ratio
from .models import (
    AlmostPeriodicPhases,
    PeriodicPhases,
    PhaseModel,
    RandomPhases,
    TwoValuedPhases,
    model_from_dict,
)
from .periodic import band_arcs, band_functions, nu_phases, two_periodic_closed_form
from .realify import verify_algebra
from .transfer import propagate, transfer_matrices

__all__ = ["COMMANDS", "RunConfig", "emit_plotdata", "load_config", "main", "run"]

COMMANDS = ("verify", "lyapunov", "bands", "halfline", "truncspec", "localize",
            "independence", "gordon")

# name -> (default, converter); None as default marks a required parameter
_PARAMS = {
    "verify": {"samples": (1000, int), "draws": (10_000, int), "window_blocks": (64, int)},
    "lyapunov": {"n_grid": (64, int), "grid": ([], list), "steps": (100_000, int),
                 "batches": (20, int)},
    "bands": {"n_x": (512, int)},
    "halfline": {"k0": (0, int), "resolution": (400, int), "n_grid": (1024, int)},
    "truncspec": {"sites": (512, int), "halfline": (False, bool), "offset": ("centre", str)},
    "localize": {"sites": (1024, int)},
    "independence": {"samples": (100_000, int), "max_harmonic": (2, int)},
    "gordon": {"approximants": (None, list), "lam": (0.0, float), "directions": (8, int)},
}
_STOCHASTIC = ("verify", "independence")


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """A validated run request.

    ``model`` is ``None`` only for ``verify`` runs without a model section.
    ``raw`` is the parsed JSON document, echoed into the manifest.
    """

    command: str
    model: PhaseModel | None
    params: dict
    seed: int | None
    out: Path
    raw: dict = dataclasses.field(default_factory=dict)


def _line_of(text: str, field: str | None):
    """Line of the first occurrence of the last key of a dotted field path."""
    if not text or not field:
        return None
    key = '"' + field.split(".")[-1] + '"'
    pos = text.find(key)
    return text.count("\n", 0, pos) + 1 if pos >= 0 else None


def _with_line(exc: ConfigError, text: str) -> ConfigError:
    if exc.line is not None:
        return exc
    msg = str(exc).split("] ", 1)[-1] if str(exc).startswith("[") else str(exc)
    return ConfigError(msg, field=exc.field, line=_line_of(text, exc.field))


def load_config(command: str, text: str, out=None, seed=None) -> RunConfig:
    """Parse and validate a JSON run configuration.

    Parameters
    ----------
    command : str
        One of :data:`COMMANDS`.
    text : str
        The JSON document.
    out : path, optional
        Output directory; overrides ``"out"`` in the document.
    seed : int, optional
        Overrides ``"seed"`` in the document.  For random models it also
        replaces the model's own seed.

    Raises
    ------
    ConfigError
        With the offending field and, when it can be located, its line.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}", field="command")
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object", line=1)
    try:
        cfg = _validate(command, doc, out, seed)
    except ConfigError as exc:
        raise _with_line(exc, text) from None
    return cfg


def _validate(command, doc, out, seed):
    if "command" in doc and doc["command"] != command:
        raise ConfigError(f"config is for {doc['command']!r}, not {command!r}", field="command")
    if seed is None and doc.get("seed") is not None:
        if not isinstance(doc["seed"], int) or isinstance(doc["seed"], bool):
            raise ConfigError("seed must be an integer", field="seed")
        seed = doc["seed"]
    out = out if out is not None else doc.get("out")
    if out is None:
        raise ConfigError("no output directory (use --out or an \"out\" field)", field="out")

    model = None
    if "model" in doc:
        mdoc = dict(doc["model"]) if isinstance(doc["model"], dict) else doc["model"]
        if isinstance(mdoc, dict) and mdoc.get("variant") == "random" and seed is not None:
            mdoc["seed"] = seed
        model = model_from_dict(mdoc, "model.")
    elif command != "verify":
        raise ConfigError("missing required field", field="model")

    raw_params = doc.get("params", {})
    if not isinstance(raw_params, dict):
        raise ConfigError("params must be an object", field="params")
    schema = _PARAMS[command]
    unknown = sorted(set(raw_params) - set(schema))
    if unknown:
        raise ConfigError(f"unknown parameter; expected one of {sorted(schema)}",
                          field=f"params.{unknown[0]}")
    params = {}
    for name, (default, conv) in schema.items():
        if name not in raw_params:
            if default is None:
                raise ConfigError("missing required parameter", field=f"params.{name}")
            params[name] = default
            continue
        value = raw_params[name]
        if conv is bool and not isinstance(value, bool):
            raise ConfigError("expected true or false", field=f"params.{name}")
        if conv is list and not isinstance(value, list):
            raise ConfigError("expected a list", field=f"params.{name}")
        try:
            params[name] = conv(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), field=f"params.{name}") from None

    stochastic = command in _STOCHASTIC or isinstance(model, RandomPhases)
    if stochastic and seed is None:
        raise ConfigError("a seed is mandatory for stochastic runs", field="seed")
    for name in ("samples", "draws", "steps", "sites", "n_grid", "n_x", "resolution", "batches"):
        if name in params and params[name] < 1:
            raise ConfigError("must be positive", field=f"params.{name}")
    return RunConfig(command, model, params, seed, Path(out), doc)


# -- writers -----------------------------------------------------------------

def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _need_model(cfg: RunConfig, *classes):
    if not isinstance(cfg.model, classes):
        names = ", ".join(c.variant for c in classes)
        raise ConfigError(f"{cfg.command} needs a model of variant {names}", field="model.variant")
    return cfg.model


# -- subcommands ---------------------------------------------------------------

def _cmd_verify(cfg: RunConfig) -> dict:
    p = cfg.params
    out = cfg.out
    alg = verify_algebra(p["samples"], cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    worst_full = worst_red = 0.0
    draws = p["draws"]
    # below t ~ 0.15 the entries grow like 1/t**2 and rounding alone exceeds 1e-12
    t = rng.uniform(0.2, 0.95, draws)
    lam = rng.uniform(0, 2 * np.pi, draws)
    for i in range(draws):
        m = RandomPhases(t=float(t[i]), seed=int(rng.integers(2**31)))
        k = np.array([int(rng.integers(-1000, 1000))])
        a, _ = transfer_matrices(k, lam[i], m, "general")
        b, _ = transfer_matrices(k, lam[i], m, "reduced")
        worst_full = max(worst_full, abs(abs(np.linalg.det(a[0])) - 1))
        worst_red = max(worst_red, abs(abs(np.linalg.det(b[0])) - 1))
    checks = {"realify_" + k: (v, 1e-12) for k, v in alg.items()}
    checks["det_general"] = (worst_full, 1e-12)
    checks["det_reduced"] = (worst_red, 1e-12)
    model = cfg.model if cfg.model is not None else RandomPhases(t=0.5, seed=cfg.seed)
    win = build_windowed_unitary(model, p["window_blocks"], -p["window_blocks"])
    checks["window_unitarity"] = (win.unitarity_defect(), 1e-12)
    report = {name: {"value": v, "tol": tol, "pass": bool(v < tol)}
              for name, (v, tol) in sorted(checks.items())}
    _write_json(out / "verify.json", report)
    failed = [k for k, v in report.items() if not v["pass"]]
    return {"files": ["verify.json"], "failed": failed}


def _grid(p):
    if p["grid"]:
        return np.asarray(p["grid"], float)
    return 2 * np.pi * np.arange(p["n_grid"]) / p["n_grid"]


def _cmd_lyapunov(cfg: RunConfig) -> dict:
    p = cfg.params
    grid = _grid(p)
    prof = gamma_profile(grid, cfg.model, p["steps"], seed=cfg.seed or 0, batches=p["batches"])
    prof.to_csv(cfg.out / "gamma_profile.csv")
    _write_json(cfg.out / "lyapunov.json", {
        "min_gamma": prof.min_gamma(), "min_lower_3se": prof.min_lower(),
        "mean_gamma": float(np.mean(prof.gamma_hat)), "steps": p["steps"], "n_grid": int(grid.size)})
    return {"files": ["gamma_profile.csv", "lyapunov.json"]}


def _cmd_bands(cfg: RunConfig) -> dict:
    model = _need_model(cfg, PeriodicPhases, TwoValuedPhases)
    nu = nu_phases(model)
    n_x = max(cfg.params["n_x"], 4 * nu.N)
    x = 2 * np.pi * np.arange(n_x) / n_x
    bands = band_functions(nu, model.coupling, x)
    arcs = band_arcs(bands, getattr(model, "a", 0.0))
    bands.to_csv(cfg.out / "band_functions.csv")
    doc = {"arcs": arcs.to_dict(), "ambiguous_points": len(bands.ambiguous),
           "unimodularity_defect": bands.unimodularity_defect()}
    if isinstance(model, TwoValuedPhases):
        closed = two_periodic_closed_form(model.delta, model.theta_sum, model.a, model.coupling)
        doc["closed_form"] = closed.to_dict()
        doc["endpoint_distance"] = arcs.endpoint_distance(closed)
    _write_json(cfg.out / "bands.json", doc)
    return {"files": ["band_functions.csv", "bands.json"]}


def _cmd_halfline(cfg: RunConfig) -> dict:
    p = cfg.params
    model = _need_model(cfg, PeriodicPhases, TwoValuedPhases)
    k0 = p["k0"] if p["k0"] > 0 else settled_index(model)
    prof = discriminant_profile(model, k0, n=p["n_grid"])
    rep = find_eigenvalues(model, k0, p["resolution"], profile=prof)
    prof.to_csv(cfg.out / "discriminant.csv")
    rep.to_json(cfg.out / "eigenvalues.json")
    return {"files": ["discriminant.csv", "eigenvalues.json"]}


def _cmd_truncspec(cfg: RunConfig) -> dict:
    p = cfg.params
    off = p["offset"]
    if off == "centre":
        offset = None
    else:
        try:
            offset = int(off)
        except ValueError:
            raise ConfigError("offset must be an integer or \"centre\"", field="params.offset") from None
    cloud = truncated_spectrum(cfg.model, p["sites"], offset=offset, halfline=p["halfline"])
    cloud.to_csv(cfg.out / "spectrum.csv")
    _write_json(cfg.out / "truncspec.json", {
        "sites": cloud.size, "start": cloud.start, "stop": cloud.stop, "edge": cloud.edge,
        "modulus_defect": cloud.modulus_defect})
    return {"files": ["spectrum.csv", "truncspec.json"]}


def _cmd_localize(cfg: RunConfig) -> dict:
    cloud = truncated_spectrum(cfg.model, cfg.params["sites"], True)
    prof = localization_profile(cloud)
    prof.to_csv(cfg.out / "localization.csv")
    j = prof.median_vector_index()
    psi = np.abs(prof.vectors[:, j])
    sites = np.arange(cloud.start, cloud.stop + 1)
    _write_rows(cfg.out / "median_vector.csv", ["site", "abs_psi"],
                ((int(s), float(a)) for s, a in zip(sites, psi)))
    _write_json(cfg.out / "localize.json", {
        "median_rate": prof.median_rate(), "positive_fraction": prof.positive_fraction(),
        "bulk_vectors": int(prof.bulk.sum()), "median_vector_angle": float(prof.angles[j])})
    return {"files": ["localization.csv", "median_vector.csv", "localize.json"]}


def _cmd_independence(cfg: RunConfig) -> dict:
    model = _need_model(cfg, RandomPhases)
    tab = empirical_independence(model, cfg.params["samples"], cfg.params["max_harmonic"])
    tab.to_json(cfg.out / "independence.json")
    return {"files": ["independence.json"]}


def _cmd_gordon(cfg: RunConfig) -> dict:
    model = _need_model(cfg, AlmostPeriodicPhases)
    p = cfg.params
    angles = np.pi * np.arange(p["directions"]) / p["directions"]
    rows = []
    for i, pq in enumerate(p["approximants"]):
        if not (isinstance(pq, list) and len(pq) == 2):
            raise ConfigError("each approximant is a [p, q] pair", field="params.approximants")
        pp, q = int(pq[0]), int(pq[1])
        if q < 1:
            raise ConfigError("q must be positive", field="params.approximants")
        ratios = [gordon_ratio(propagate(np.cos(a), np.sin(a), p["lam"], model, (-q, 2 * q),
                                         form="reduced"), q) for a in angles]
        diff = approximant_difference(model, pp, q, p["lam"], 2 * q)
        rows.append({"p": pp, "q": q, "min_ratio": min(ratios), "max_ratio": max(ratios),
                     "approximant_difference": diff, "beta_error": abs(model.beta - pp / q)})
    _write_json(cfg.out / "gordon.json", {"lam": p["lam"], "approximants": rows})
    return {"files": ["gordon.json"]}


_DISPATCH = {
    "verify": _cmd_verify, "lyapunov": _cmd_lyapunov, "bands": _cmd_bands,
    "halfline": _cmd_halfline, "truncspec": _cmd_truncspec, "localize": _cmd_localize,
    "independence": _cmd_independence, "gordon": _cmd_gordon,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run(cfg: RunConfig, threads: int | None = None) -> int:
    """Execute a validated configuration; return the exit status.

    Budget errors are not caught here; :func:`main` maps them to exit 1.
    """
    cfg.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    with threadpool_limits(limits=threads):
        result = _DISPATCH[cfg.command](cfg)
    wall = time.perf_counter() - t0
    manifest = {
        "command": cfg.command,
        "config": cfg.raw,
        "model": cfg.model.to_dict() if cfg.model is not None else None,
        "params": cfg.params,
        "seed": cfg.seed,
        "threads": threads,
        "versions": {"unitaryband": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "wall_time_s": wall,
        "outputs": {name: _sha256(cfg.out / name) for name in result["files"]},
    }
    if result.get("failed"):
        manifest["failed_checks"] = result["failed"]
    _write_json(cfg.out / "manifest.json", manifest)
    return 3 if result.get("failed") else 0


# -- plot data -----------------------------------------------------------------

def _read_csv(path: Path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _need_file(run_dir: Path, name: str) -> Path:
    path = run_dir / name
    if not path.exists():
        raise ReportMissingError(f"{path} not found")
    return path


def emit_plotdata(run_dir) -> list:
    """Flatten the reports of a run directory into whitespace-separated tables.

    Writes ``plot_*.dat`` files readable by gnuplot and most CSV tools:

    - ``lyapunov``: ``plot_gamma.dat`` with columns ``lambda gamma_hat``.
    - ``bands``: ``plot_band_<j>.dat`` with ``x angle`` per track; a blank
      ``nan nan`` row separates pieces wherever the angle wraps.
    - ``localize``: ``plot_psi.dat`` with ``site log|psi|`` for the
      eigenvector of median decay rate.
    - ``halfline``: ``plot_discriminant.dat`` with ``lambda |E1|``.

    Returns
    -------
    list of Path
        Files written.

    Raises
    ------
    ReportMissingError
        If the manifest or a report it needs is absent.
    """
    run_dir = Path(run_dir)
    manifest = json.loads(_need_file(run_dir, "manifest.json").read_text())
    command = manifest["command"]
    written = []

    def dump(name, rows):
        path = run_dir / name
        with open(path, "w") as fh:
            for a, b in rows:
                fh.write(f"{a!r} {b!r}\n")
        written.append(path)

    if command == "lyapunov":
        _, rows = _read_csv(_need_file(run_dir, "gamma_profile.csv"))
        dump("plot_gamma.dat", ((float(r[0]), float(r[1])) for r in rows))
    elif command == "bands":
        header, rows = _read_csv(_need_file(run_dir, "band_functions.csv"))
        data = np.array(rows, dtype=float)
        x = data[:, 0]
        for j in range((len(header) - 1) // 2):
            ang = np.mod(np.arctan2(data[:, 2 + 2 * j], data[:, 1 + 2 * j]), 2 * np.pi)
            out = []
            for i in range(x.size):
                if i and abs(ang[i] - ang[i - 1]) > np.pi:
                    out.append((math.nan, math.nan))
                out.append((float(x[i]), float(ang[i])))
            dump(f"plot_band_{j}.dat", out)
    elif command == "localize":
        _, rows = _read_csv(_need_file(run_dir, "median_vector.csv"))
        dump("plot_psi.dat", ((int(r[0]), math.log(max(float(r[1]), 1e-300))) for r in rows))
    elif command == "halfline":
        _, rows = _read_csv(_need_file(run_dir, "discriminant.csv"))
        dump("plot_discriminant.dat", ((float(r[0]), float(r[1])) for r in rows))
    else:
        raise ReportMissingError(f"no plot data defined for {command!r} runs")
    return written


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unitaryband",
                                     description="Spectral diagnostics for unitary band operators.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON run configuration")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--seed", type=int, help="overrides the configured seed")
        sp.add_argument("--threads", type=int, help="cap on BLAS/OpenMP threads")
        sp.add_argument("--plotdata", action="store_true", help="also write plot_*.dat tables")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text() if args.config is not None else ""
    except OSError as exc:
        print(f"config error: cannot read {args.config}: {exc.strerror}", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.command, text, out=args.out, seed=args.seed)
        status = run(cfg, args.threads)
        if args.plotdata and status == 0:
            emit_plotdata(cfg.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 1
    except UnitaryBandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return status


if __name__ == "__main__":
    sys.exit(main())
