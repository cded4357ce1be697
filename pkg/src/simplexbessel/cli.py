"""Batch experiment harness.

``simplexbessel <subcommand> --config <path> [--workers K] [--out DIR]``

The config is one strict JSON document; unknown keys anywhere are rejected.
Every artifact is written next to a ``<artifact>.manifest.json`` that records
the resolved configuration, the seed and the package build, which is enough
to re-run the artifact exactly.  ``--workers`` splits path/ball/case loops
into fixed-size blocks scheduled on a thread pool; block boundaries and
per-path streams are independent of the worker count, so results are
byte-identical for any K.

Exit codes: 0 success, 1 runtime or estimator failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    a2_ball_family,
    ball_mass_exponent,
    capacity_asymptotic,
    contraction_rate,
    dirichlet_gap_moments,
    fit_decay,
    fv_refinement_ladder,
    ibp_battery,
    ibp_residual,
    make_report,
    max_valid_radius,
    nu_mass,
    semimartingale_classify,
    wiener_classify,
)
from .dynamics import (
    AUTO,
    CoupledEnsembleResult,
    IntegratorConfig,
    coupled_ensemble,
    simulate,
    simulate_ensemble,
)
from .errors import ConfigError, EstimatorError, FitError, IntegratorError, ParameterError
from .model import ModelParams
from .sampler import RngStream, probe_points, sample_invariant
from .symmetry import ExtensionParams

#: fixed scheduling block; must not depend on the worker count
_BLOCK = 256

_SCHEMA = {
    "model": ("n", "beta"),
    "extension": ("delta",),
    "integrator": ("dt", "scheme", "min_gap", "drift_cap"),
    "run": ("t_end", "paths", "record_stride", "seed"),
    "output": ("directory", "formats"),
}


# ---------------------------------------------------------------------------
# config loading and validation


def _fail(field: str, why: str, value=None) -> ConfigError:
    suffix = "" if value is None else f", got {value!r}"
    return ConfigError(f"{field}: {why}{suffix}")


def _check_keys(doc: dict) -> None:
    for section, body in doc.items():
        if section not in _SCHEMA:
            raise _fail(section, "unknown section")
        if not isinstance(body, dict):
            raise _fail(section, "must be an object")
        for key in body:
            if key not in _SCHEMA[section]:
                raise _fail(f"{section}.{key}", "unknown key")


def _real(doc, field, default=None, *, required=False, positive=False, nonneg=False):
    section, _, key = field.partition(".")
    val = doc.get(section, {}).get(key)
    if val is None:
        if required:
            raise _fail(field, "required")
        return default
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise _fail(field, "must be a finite real", val)
    if positive and val <= 0:
        raise _fail(field, "must be a positive real", val)
    if nonneg and val < 0:
        raise _fail(field, "must be >= 0", val)
    return float(val)


def _integer(doc, field, default=None, *, required=False, minimum=None):
    section, _, key = field.partition(".")
    val = doc.get(section, {}).get(key)
    if val is None:
        if required:
            raise _fail(field, "required")
        return default
    if isinstance(val, bool) or not isinstance(val, int):
        raise _fail(field, "must be an integer", val)
    if minimum is not None and val < minimum:
        raise _fail(field, f"must be >= {minimum}", val)
    return val


@dataclass
class ResolvedConfig:
    """A validated config with defaults filled in; serialized into manifests."""

    doc: dict
    out_dir: Path
    formats: tuple[str, ...]
    seed: int

    def model(self) -> ModelParams:
        n = _integer(self.doc, "model.n", required=True, minimum=1)
        beta = _real(self.doc, "model.beta", required=True, positive=True)
        try:
            return ModelParams(n, beta)
        except ParameterError as e:
            raise ConfigError(f"model: {e}") from None

    def extension(self) -> ExtensionParams:
        params = self.model()
        bound = 1.0 / (2.0 * (params.n_particles + 2))
        delta = _real(self.doc, "extension.delta", default=0.5 * bound, positive=True)
        try:
            return ExtensionParams(params, delta)
        except ParameterError as e:
            raise ConfigError(f"extension.delta: {e}") from None

    def integrator(self) -> IntegratorConfig:
        dt = _real(self.doc, "integrator.dt", required=True, positive=True)
        scheme = self.doc.get("integrator", {}).get("scheme", "fold_em")
        min_gap = _real(self.doc, "integrator.min_gap", nonneg=True)
        raw_cap = self.doc.get("integrator", {}).get("drift_cap", AUTO)
        if raw_cap is None or raw_cap == AUTO:
            cap = raw_cap
        else:
            cap = _real(self.doc, "integrator.drift_cap", positive=True)
        try:
            return IntegratorConfig(
                dt=dt, seed=RngStream(self.seed, 0), scheme=scheme,
                min_gap=min_gap, drift_cap=cap,
            )
        except ParameterError as e:
            raise ConfigError(f"integrator: {e}") from None

    def t_end(self) -> float:
        return _real(self.doc, "run.t_end", required=True, positive=True)

    def paths(self, default=None) -> int:
        return _integer(self.doc, "run.paths", default=default,
                        required=default is None, minimum=1)

    def record_stride(self) -> int:
        return _integer(self.doc, "run.record_stride", default=1, minimum=1)

    def resolved_doc(self) -> dict:
        """Config with every default made explicit, for the manifest."""
        doc = {k: dict(v) for k, v in self.doc.items()}
        doc.setdefault("run", {})["seed"] = self.seed
        doc.setdefault("output", {})
        doc["output"]["directory"] = str(self.out_dir)
        doc["output"]["formats"] = list(self.formats)
        if "integrator" in doc and "dt" in doc["integrator"]:
            cfg = self.integrator()
            doc["integrator"] = {
                "dt": cfg.dt, "scheme": cfg.scheme,
                "min_gap": cfg.min_gap, "drift_cap": cfg.drift_cap,
            }
        return doc


def load_config(path: str, out_override: str | None) -> ResolvedConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    _check_keys(doc)

    directory = out_override or doc.get("output", {}).get("directory")
    if directory is None:
        raise _fail("output.directory", "required (or pass --out)")
    if not isinstance(directory, str):
        raise _fail("output.directory", "must be a string", directory)

    formats = doc.get("output", {}).get("formats", ["csv", "json"])
    if (not isinstance(formats, list) or not formats
            or len(set(formats)) != len(formats)
            or any(f not in ("csv", "json") for f in formats)):
        raise _fail("output.formats", "must be a nonempty subset of ['csv', 'json']", formats)

    seed = _integer(doc, "run.seed", default=0, minimum=0)
    return ResolvedConfig(doc=doc, out_dir=Path(directory), formats=tuple(formats), seed=seed)


# ---------------------------------------------------------------------------
# output plumbing


def _build_id() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=10,
            cwd=Path(__file__).parent,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return f"v{__version__}"


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


class Emitter:
    """Writes artifacts plus their manifests into the output directory."""

    def __init__(self, command: str, rc: ResolvedConfig):
        self.command = command
        self.rc = rc
        self.t0 = time.monotonic()
        rc.out_dir.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []

    def _manifest(self, name: str) -> None:
        manifest = {
            "artifact": name,
            "command": self.command,
            "config": self.rc.resolved_doc(),
            "package_version": __version__,
            "build": _build_id(),
            "seed": self.rc.seed,
            "wall_time_s": round(time.monotonic() - self.t0, 3),
        }
        path = self.rc.out_dir / f"{name}.manifest.json"
        path.write_text(_dump_json(manifest), encoding="utf-8", newline="\n")

    def csv(self, name: str, writer) -> None:
        if "csv" not in self.rc.formats:
            return
        path = self.rc.out_dir / name
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            writer(fh)
        self.written.append(name)
        self._manifest(name)

    def json(self, name: str, obj) -> None:
        if "json" not in self.rc.formats:
            return
        path = self.rc.out_dir / name
        path.write_text(_dump_json(obj), encoding="utf-8", newline="\n")
        self.written.append(name)
        self._manifest(name)


def _csv_row(cells) -> str:
    out = []
    for c in cells:
        if isinstance(c, (float, np.floating)):
            out.append(format(float(c), ".17g"))
        else:
            out.append(str(c))
    return ",".join(out) + "\n"


def _parallel(fn, n_tasks: int, workers: int) -> list:
    """Run fn(task_index) for all tasks; result order is by index always."""
    if workers <= 1 or n_tasks <= 1:
        return [fn(i) for i in range(n_tasks)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(n_tasks)))


def _path_blocks(total: int) -> list[tuple[int, int]]:
    return [(s, min(_BLOCK, total - s)) for s in range(0, total, _BLOCK)]


# ---------------------------------------------------------------------------
# subcommands


def cmd_sample(rc: ResolvedConfig, workers: int) -> int:
    params = rc.model()
    count = rc.paths()
    em = Emitter("sample", rc)
    batch = sample_invariant(params, RngStream(rc.seed, 0), count)
    em.csv("samples.csv", batch.write_csv)
    return 0


def cmd_simulate(rc: ResolvedConfig, workers: int) -> int:
    params = rc.model()
    cfg = rc.integrator()
    t_end = rc.t_end()
    paths = rc.paths(default=1)
    stride = rc.record_stride()
    em = Emitter("simulate", rc)

    if paths == 1:
        x0 = sample_invariant(params, RngStream(rc.seed, 1), 1).points[0]
        traj = simulate(params, cfg, x0, t_end, record_stride=stride)
        em.csv("trajectory.csv", traj.write_csv)
        em.json("simulate.json", make_report(
            "simulate", {"n": params.n_particles, "beta": params.beta,
                         "dt": cfg.dt, "t_end": t_end},
            estimate=float(np.abs(traj.fv_increments).sum()),
            stderr=0.0, budget=traj.times.size - 1, seed=rc.seed,
            details={"reflection_events": int(traj.reflection_events.sum()),
                     "capped_mass": float(traj.capped_mass.sum())},
        ))
        return 0

    x0 = sample_invariant(params, RngStream(rc.seed, 1), paths).points

    def run_block(i):
        start, count = _path_blocks(paths)[i]
        return simulate_ensemble(
            params, cfg, x0[start:start + count], t_end,
            path_offset=start,
        )

    results = _parallel(run_block, len(_path_blocks(paths)), workers)
    finals = np.vstack([r.final_states for r in results])
    fv = np.concatenate([r.fv_l1 for r in results])
    events = np.concatenate([r.reflection_events for r in results])
    capped = np.concatenate([r.capped_mass for r in results])

    def write_finals(fh):
        n = params.n_particles
        fh.write(",".join(
            ["path"] + [f"x{i}" for i in range(1, n + 1)] + ["fv_l1", "reflections", "capped"]
        ) + "\n")
        for p in range(paths):
            fh.write(_csv_row([p, *finals[p], fv[p], int(events[p]), capped[p]]))

    em.csv("finals.csv", write_finals)

    gaps = np.diff(finals, axis=1, prepend=0.0, append=1.0)
    mean_th, var_th = dirichlet_gap_moments(params)
    em.json("simulate.json", make_report(
        "simulate", {"n": params.n_particles, "beta": params.beta,
                     "dt": cfg.dt, "t_end": t_end},
        estimate=float(gaps.mean()), stderr=float(gaps.mean(axis=1).std(ddof=1) / math.sqrt(paths)),
        budget=paths, seed=rc.seed,
        details={"gap_mean_expected": mean_th, "gap_var": float(gaps.var(ddof=1)),
                 "gap_var_expected": var_th,
                 "mean_fv_l1": float(fv.mean()),
                 "mean_reflections": float(events.mean())},
    ))
    return 0


def cmd_couple(rc: ResolvedConfig, workers: int) -> int:
    params = rc.model()
    cfg = rc.integrator()
    t_end = rc.t_end()
    pairs = rc.paths()
    stride = rc.record_stride()
    em = Emitter("couple", rc)

    x0 = sample_invariant(params, RngStream(rc.seed, 1), pairs).points
    y0 = sample_invariant(params, RngStream(rc.seed, 2), pairs).points

    def run_block(i):
        start, count = _path_blocks(pairs)[i]
        return coupled_ensemble(
            params, cfg, x0[start:start + count], y0[start:start + count],
            "reflection", t_end, n_pairs=count, record_stride=stride,
            path_offset=start,
        )

    results = _parallel(run_block, len(_path_blocks(pairs)), workers)
    merged = CoupledEnsembleResult(
        times=results[0].times,
        distances=np.vstack([r.distances for r in results]),
        final_a=np.vstack([r.final_a for r in results]),
        final_b=np.vstack([r.final_b for r in results]),
        merged=np.concatenate([r.merged for r in results]),
        merge_tol=cfg.merge_tol,
        coupling="reflection",
    )

    mean_dist = merged.distances.mean(axis=0)
    frac_merged = (merged.distances <= cfg.merge_tol).mean(axis=0)

    def write_curve(fh):
        fh.write("t,mean_dist,frac_merged\n")
        for k, t in enumerate(merged.times):
            fh.write(_csv_row([t, mean_dist[k], frac_merged[k]]))

    em.csv("couple.csv", write_curve)

    fit = fit_decay(merged)
    theory = contraction_rate(params)
    em.json("couple.json", make_report(
        "couple", {"n": params.n_particles, "beta": params.beta,
                   "dt": cfg.dt, "t_end": t_end, "coupling": "reflection"},
        estimate=fit.rate, stderr=fit.stderr, budget=pairs, seed=rc.seed,
        details={"fitted_rate": fit.rate, "theoretical_rate": theory,
                 "rate_over_theory": fit.rate / theory if theory > 0 else None,
                 "fit_window": [float(fit.times[0]), float(fit.times[-1])],
                 "n_pairs": fit.n_pairs},
    ))
    return 0


def cmd_fvtest(rc: ResolvedConfig, workers: int) -> int:
    params = rc.model()
    cfg = rc.integrator()
    t_end = rc.t_end()
    paths = rc.paths(default=1000)
    em = Emitter("fvtest", rc)

    dts = [cfg.dt, cfg.dt / 4.0, cfg.dt / 16.0]
    factor = cfg.min_gap / math.sqrt(2.0 * cfg.dt) if "min_gap" in rc.doc.get("integrator", {}) else 1.0
    ladder = fv_refinement_ladder(
        params, dts, n_paths=paths, t_end=t_end,
        seed=RngStream(rc.seed, 0), scheme=cfg.scheme, min_gap_factor=factor,
    )
    verdict_ladder = bool(ladder.stabilizes)
    verdict_classify = semimartingale_classify(params)

    def write_levels(fh):
        fh.write("dt,estimate,stderr,ratio\n")
        for k, dt in enumerate(ladder.dts):
            ratio = ladder.ratios[k - 1] if k > 0 else float("nan")
            fh.write(_csv_row([dt, ladder.estimates[k], ladder.stderrs[k], ratio]))

    em.csv("fvtest.csv", write_levels)
    em.json("fvtest.json", make_report(
        "fvtest", {"n": params.n_particles, "beta": params.beta,
                   "dts": list(map(float, ladder.dts)), "t_end": t_end},
        estimate=float(ladder.estimates[-1]), stderr=float(ladder.stderrs[-1]),
        budget=paths, seed=rc.seed,
        flags=[] if verdict_ladder == verdict_classify else ["verdict_mismatch"],
        details={"estimates": [float(v) for v in ladder.estimates],
                 "stderrs": [float(v) for v in ladder.stderrs],
                 "ratios": [float(v) for v in ladder.ratios],
                 "stabilizes": verdict_ladder,
                 "semimartingale_classify": verdict_classify},
    ))
    return 0


def cmd_a2(rc: ResolvedConfig, workers: int) -> int:
    ep = rc.extension()
    n = ep.model.n_particles
    balls = rc.paths(default=1000)
    em = Emitter("a2", rc)

    fam = a2_ball_family(ep, n_balls=balls, mc_budget=4000,
                         seed=RngStream(rc.seed, 0))

    def write_balls(fh):
        fh.write(",".join(
            [f"c{i}" for i in range(1, n + 1)] + ["radius", "product", "stderr", "kurtosis", "heavy"]
        ) + "\n")
        for i in range(balls):
            fh.write(_csv_row([*fam.centers[i], fam.radii[i], fam.products[i],
                               fam.stderrs[i], fam.kurtoses[i], int(fam.heavy[i])]))

    em.csv("a2_balls.csv", write_balls)

    em.json("a2.json", make_report(
        "a2", {"n": n, "beta": ep.model.beta, "delta": ep.delta},
        estimate=fam.certified_max,
        stderr=0.0, budget=balls, seed=rc.seed,
        flags=(["heavy_tail"] if fam.n_heavy else []),
        details={"max_product": fam.certified_max,
                 "radius_trend_slope": fam.certified_slope,
                 "raw_max_product": fam.raw_max,
                 "raw_radius_trend_slope": fam.raw_slope,
                 "n_certified": fam.n_certified,
                 "n_heavy": fam.n_heavy,
                 "n_nonfinite": fam.n_nonfinite},
    ))
    return 0


def cmd_scaling(rc: ResolvedConfig, workers: int) -> int:
    ep = rc.extension()
    n = ep.model.n_particles
    budget = rc.paths(default=200_000)
    em = Emitter("scaling", rc)

    def run_stratum(d):
        y = probe_points(n, d, 1, RngStream(rc.seed, 40 + d))[0]
        r_max = max_valid_radius(ep, y)
        radii = r_max * 0.5 ** np.arange(1, 7)  # strictly below the validity bound
        fit = ball_mass_exponent(ep, y, radii, mc_budget=budget,
                                 seed=RngStream(rc.seed, 50 + d))
        return y, fit

    results = _parallel(run_stratum, n + 1, workers)

    def write_rows(fh):
        fh.write("d,slope,stderr,expected,rel_err\n")
        for d, (_, fit) in enumerate(results):
            rel = abs(fit.slope - fit.expected) / fit.expected
            fh.write(_csv_row([d, fit.slope, fit.stderr, fit.expected, rel]))

    em.csv("scaling.csv", write_rows)
    em.json("scaling.json", make_report(
        "scaling", {"n": n, "beta": ep.model.beta, "delta": ep.delta},
        estimate=float(results[0][1].slope), stderr=float(results[0][1].stderr),
        budget=budget, seed=rc.seed,
        details={"strata": [
            {"d": d, "slope": float(fit.slope), "stderr": float(fit.stderr),
             "expected": float(fit.expected)}
            for d, (_, fit) in enumerate(results)
        ]},
    ))
    return 0


def cmd_wiener(rc: ResolvedConfig, workers: int) -> int:
    ep = rc.extension()
    params = ep.model
    n = params.n_particles
    em = Emitter("wiener", rc)

    strata = []
    for d in range(n + 1):
        y = probe_points(n, d, 1, RngStream(rc.seed, 60 + d))[0]
        rep = wiener_classify(ep, y)
        r0 = max_valid_radius(ep, y)
        cap = capacity_asymptotic(ep, y, r0 / 100.0, r0)
        strata.append({
            "d": d, "h": rep.h, "h_prime": rep.h_prime, "branch": rep.branch,
            "regular": rep.regular, "logarithmic": rep.logarithmic,
            "capacity_at_r0_over_100": cap,
        })

    eps = ep.delta
    nu = {str(i): list(nu_mass(params, i, eps)) for i in range(1, n + 1)}
    semi = semimartingale_classify(params)

    def write_rows(fh):
        fh.write("d,h,h_prime,branch,regular,logarithmic\n")
        for s in strata:
            fh.write(_csv_row([s["d"], s["h"], s["h_prime"], s["branch"],
                               int(s["regular"]), int(s["logarithmic"])]))

    em.csv("wiener.csv", write_rows)
    em.json("wiener.json", make_report(
        "wiener", {"n": n, "beta": params.beta, "delta": ep.delta, "eps": eps},
        estimate=float(strata[-1]["h_prime"]), stderr=0.0,
        budget=n + 1, seed=rc.seed,
        details={"strata": strata, "nu_mass": nu,
                 "semimartingale": semi},
    ))
    return 0


def cmd_ibp(rc: ResolvedConfig, workers: int) -> int:
    params = rc.model()
    samples = rc.paths(default=100_000)
    em = Emitter("ibp", rc)
    battery = ibp_battery()

    def run_case(i):
        name, u, grad_u, field = battery[i]
        res = ibp_residual(params, u, field, samples,
                           RngStream(rc.seed, 70 + i), grad_u=grad_u)
        return name, res

    results = _parallel(run_case, len(battery), workers)

    def write_rows(fh):
        fh.write("case,residual,stderr,z,n_used,n_rejected\n")
        for name, res in results:
            z = res.residual / res.stderr if res.stderr > 0 else 0.0
            fh.write(_csv_row([name, res.residual, res.stderr, z,
                               res.n_used, res.n_rejected]))

    em.csv("ibp.csv", write_rows)
    worst = max(results, key=lambda kv: abs(kv[1].residual / kv[1].stderr) if kv[1].stderr > 0 else 0.0)
    em.json("ibp.json", make_report(
        "ibp", {"n": params.n_particles, "beta": params.beta},
        estimate=float(worst[1].residual), stderr=float(worst[1].stderr),
        budget=samples, seed=rc.seed,
        details={"cases": [
            {"case": name, "residual": float(r.residual), "stderr": float(r.stderr),
             "n_used": r.n_used, "n_rejected": r.n_rejected}
            for name, r in results
        ], "worst_case": worst[0]},
    ))
    return 0


def cmd_report(rc: ResolvedConfig, workers: int) -> int:
    em = Emitter("report", rc)
    rows = []
    for path in sorted(rc.out_dir.glob("*.json")):
        if path.name.endswith(".manifest.json") or path.name == "summary.json":
            continue
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            continue
        if not isinstance(doc, dict) or "name" not in doc or "estimate" not in doc:
            continue
        rows.append({
            "file": path.name,
            "name": doc["name"],
            "estimate": doc.get("estimate"),
            "stderr": doc.get("stderr"),
            "budget": doc.get("budget"),
            "seed": doc.get("seed"),
            "flags": ";".join(doc.get("flags", [])),
        })
    if not rows:
        print("no reports found", file=sys.stderr)
        return 1

    def write_rows(fh):
        fh.write("file,name,estimate,stderr,budget,seed,flags\n")
        for r in rows:
            fh.write(_csv_row([r["file"], r["name"], r["estimate"], r["stderr"],
                               r["budget"], r["seed"], r["flags"]]))

    em.csv("summary.csv", write_rows)
    em.json("summary.json", {"reports": rows})
    return 0


_COMMANDS = {
    "sample": cmd_sample,
    "simulate": cmd_simulate,
    "couple": cmd_couple,
    "fvtest": cmd_fvtest,
    "a2": cmd_a2,
    "scaling": cmd_scaling,
    "wiener": cmd_wiener,
    "ibp": cmd_ibp,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simplexbessel",
        description="Monte Carlo experiments for the ordered-simplex gap diffusion",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="path to a JSON config")
        sp.add_argument("--workers", type=int, default=1,
                        help="thread count; scheduling only, never results")
        sp.add_argument("--out", default=None, help="override output.directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = load_config(args.config, args.out)
        if args.workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {args.workers}")
        return _COMMANDS[args.command](rc, args.workers)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (EstimatorError, FitError, IntegratorError, ParameterError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
