"""Experiment orchestration: config ingestion, runs, comparisons, exports.

Config files are flat ``key = value`` text under ``[section]`` headers with
strict parsing (any unknown section or key aborts before computation).
Matrices are whitespace-separated row-major decimals; complex entries are
written as (re, im) pairs.  Every run writes a manifest (resolved config,
code version, relator residual), a result CSV whose body is byte-identical
across reruns of the same config, and a human-readable summary.

Exit codes: 0 success, 1 usage/config error, 2 validation-suite failure.
"""

from __future__ import annotations

import argparse
import datetime
import math
import os
import re
import sys
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from . import __version__
from .cocycle import Representation
from .diffusion import (
    RngStream,
    check_circle_vs_diffusion,
    check_dynkin,
    check_semigroup,
    constant_field,
    dist_squared_field,
    exp_neg_dist_field,
    heat_kernel_mass,
    real_part_field,
    sample_path,
    sample_polar_endpoints,
    smoothed_dist_field,
)
from .hypgeo import DiscPoint, GeodesicRay, dist_P, geodesic_eval, radius_for_R
from .surface import build_genus2
from .lyapunov import (
    benettin_spectrum,
    check_exp_conversion,
    diffusion_spectrum,
    direction_distribution_check,
    geodesic_spectrum,
    shadowing_report,
)

SEED_ENV_VAR = "HYPLYAP_SEED"

_METHODS = ("brownian", "geodesic", "diffusion")
_VALIDATIONS = (
    "geometry",
    "cocycle",
    "semigroup",
    "dynkin",
    "kernel",
    "circle",
    "drift",
    "shadowing",
    "uniformity",
    "conversion",
)


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configs."""


@dataclass
class ExperimentConfig:
    surface: str = "genus2-octagon"
    dim: int = 2
    rep_field: str = "real"
    matrices: tuple = ()
    method: str = "brownian"
    horizon: float = 60.0
    step: float = 0.05
    n_paths: int = 400
    n_dirs: int = 256
    n_vectors: int = 64
    seed: int = 0
    workers: int = 1
    output: str = "run"
    defaulted: tuple = ()   # keys filled by defaults, recorded in the manifest

    def validate(self):
        if self.surface != "genus2-octagon":
            raise ConfigError(f"surface must be genus2-octagon, got {self.surface!r}")
        base = self.method.split(":", 1)[0]
        if base not in _METHODS + ("validate",):
            raise ConfigError(f"unknown method {self.method!r}")
        if base == "validate":
            name = self.method.split(":", 1)[1] if ":" in self.method else ""
            if name not in _VALIDATIONS:
                raise ConfigError(
                    f"unknown validation {name!r}; choose from {', '.join(_VALIDATIONS)}"
                )
        for key in ("horizon", "step"):
            if getattr(self, key) <= 0 or not math.isfinite(getattr(self, key)):
                raise ConfigError(f"{key} must be positive and finite")
        for key in ("dim", "n_paths", "n_dirs", "n_vectors", "workers"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be >= 1")
        if self.rep_field not in ("real", "complex"):
            raise ConfigError(f"field must be real or complex, got {self.rep_field!r}")
        if self.matrices and len(self.matrices) != 4:
            raise ConfigError("representation needs exactly g1..g4")


_SECTION_KEYS = {
    "surface": {"model"},
    "representation": {"dim", "field", "g1", "g2", "g3", "g4"},
    "run": {
        "method",
        "horizon",
        "step",
        "n_paths",
        "n_dirs",
        "n_vectors",
        "seed",
        "workers",
        "output",
    },
}

_PAIR_RE = re.compile(r"\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)")


def _parse_matrix(text: str, dim: int, complex_field: bool):
    if complex_field:
        pairs = _PAIR_RE.findall(text)
        leftover = _PAIR_RE.sub("", text).strip()
        if leftover:
            raise ConfigError(
                f"complex matrix entries must all be (re, im) pairs; stray text {leftover!r}"
            )
        vals = [complex(float(a), float(b)) for a, b in pairs]
        dtype = complex
    else:
        vals = [float(tok) for tok in text.split()]
        dtype = float
    if len(vals) != dim * dim:
        raise ConfigError(f"matrix needs {dim * dim} entries, got {len(vals)}")
    return np.array(vals, dtype=dtype).reshape(dim, dim)


def parse_config_text(text: str) -> ExperimentConfig:
    section = None
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            if section not in _SECTION_KEYS:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {stripped!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _SECTION_KEYS[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        if (section, key) in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[(section, key)] = value
    return _config_from_raw(raw)


def _config_from_raw(raw: dict) -> ExperimentConfig:
    cfg = ExperimentConfig()
    provided = set()

    def take(section, key, conv, attr):
        if (section, key) in raw:
            try:
                setattr(cfg, attr, conv(raw.pop((section, key))))
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {exc}") from None
            provided.add(attr)

    take("surface", "model", str, "surface")
    take("representation", "dim", int, "dim")
    take("representation", "field", str, "rep_field")
    mats = []
    for k in range(1, 5):
        key = ("representation", f"g{k}")
        if key in raw:
            mats.append(_parse_matrix(raw.pop(key), cfg.dim, cfg.rep_field == "complex"))
    if mats:
        if len(mats) != 4:
            raise ConfigError("representation needs all of g1..g4 (or none)")
        cfg.matrices = tuple(mats)
        provided.add("matrices")
    take("run", "method", str, "method")
    take("run", "horizon", float, "horizon")
    take("run", "step", float, "step")
    take("run", "n_paths", int, "n_paths")
    take("run", "n_dirs", int, "n_dirs")
    take("run", "n_vectors", int, "n_vectors")
    take("run", "seed", int, "seed")
    take("run", "workers", int, "workers")
    take("run", "output", str, "output")
    if raw:
        (section, key), _ = raw.popitem()
        raise ConfigError(f"unknown key {key!r} in [{section}]")
    cfg.defaulted = tuple(
        f.name for f in dc_fields(ExperimentConfig)
        if f.name not in provided and f.name != "defaulted"
    )
    cfg.validate()
    return cfg


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return parse_config_text(text)


def apply_flag_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    """Flags mirror config keys; a conflicting explicit value is an error,
    never a silent precedence decision."""
    for attr in ("method", "horizon", "step", "n_paths", "n_dirs", "n_vectors",
                 "seed", "workers", "output"):
        flag_val = getattr(args, attr, None)
        if flag_val is None:
            continue
        if attr in cfg.defaulted:
            setattr(cfg, attr, flag_val)
            cfg.defaulted = tuple(k for k in cfg.defaulted if k != attr)
        elif getattr(cfg, attr) != flag_val:
            raise ConfigError(
                f"{attr} given both in the config ({getattr(cfg, attr)}) and as a "
                f"flag ({flag_val}); remove one"
            )
    cfg.validate()
    return cfg


def _default_representation(dim: int):
    eye = np.eye(dim)
    return (eye, eye, eye, eye)


def build_representation(cfg: ExperimentConfig, group):
    matrices = cfg.matrices if cfg.matrices else _default_representation(cfg.dim)
    rep = Representation.from_matrices(cfg.dim, cfg.rep_field, matrices, group)
    print(f"representation loaded: relator residual {rep.relator_residual:.3e}")
    if not rep.exact:
        raise ConfigError(
            f"representation (g1..g4) is projective-only: relator residual "
            f"{rep.relator_residual:.3e} > 1e-08"
        )
    return rep


# ------------------------------------------------------------- formatting


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def spectrum_csv(report, cfg: ExperimentConfig) -> str:
    lines = ["method,horizon,index,chi,multiplicity,ci_halfwidth,seed,n_samples"]
    n_samples = cfg.n_dirs if report.method == "geodesic" else cfg.n_paths
    for row in report.rows():
        lines.append(
            ",".join(
                [
                    report.method,
                    _fmt(float(cfg.horizon)),
                    str(row["index"]),
                    _fmt(row["chi"]),
                    str(row["multiplicity"]),
                    _fmt(row["ci_halfwidth"]),
                    str(cfg.seed),
                    str(n_samples),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def checks_csv(checks) -> str:
    lines = ["name,lhs,rhs,tolerance,passed"]
    for c in checks:
        name = c["name"].replace(",", ";")
        lines.append(
            ",".join([name, _fmt(c["lhs"]), _fmt(c["rhs"]), _fmt(c["tol"]),
                      "1" if c["passed"] else "0"])
        )
    return "\n".join(lines) + "\n"


def manifest_text(cfg: ExperimentConfig, group, extra=None) -> str:
    lines = [
        f"hyplyap {__version__}",
        f"timestamp {datetime.datetime.now(datetime.timezone.utc).isoformat()}",
        f"relator_residual {group.relator_residual():.17g}",
        f"seed_env_override {os.environ.get(SEED_ENV_VAR, '(unset)')}",
    ]
    for f in dc_fields(ExperimentConfig):
        if f.name in ("matrices", "defaulted"):
            continue
        mark = " (default)" if f.name in cfg.defaulted else ""
        lines.append(f"{f.name} {getattr(cfg, f.name)}{mark}")
    if cfg.matrices:
        for k, m in enumerate(cfg.matrices, start=1):
            flat = " ".join(_fmt(complex(v).real) if cfg.rep_field == "real"
                            else f"({_fmt(complex(v).real)}, {_fmt(complex(v).imag)})"
                            for v in np.ravel(m))
            lines.append(f"g{k} {flat}")
    else:
        lines.append("representation identity (default)")
    for k, v in (extra or {}).items():
        lines.append(f"{k} {v}")
    return "\n".join(lines) + "\n"


def _write(path: str, text: str):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# ------------------------------------------------------------ run command


def run_spectrum(cfg: ExperimentConfig, group, rep):
    rng = RngStream(cfg.seed)
    if cfg.method == "brownian":
        reorth = max(1, int(1.0 / cfg.step) // 2)
        report = benettin_spectrum(
            rep, group, cfg.horizon, cfg.step, reorth, cfg.n_paths, rng, workers=cfg.workers
        )
    elif cfg.method == "geodesic":
        report = geodesic_spectrum(rep, group, cfg.horizon, cfg.n_dirs, spacing=min(cfg.step, 0.05))
    else:
        report = diffusion_spectrum(
            rep, group, int(round(cfg.horizon)), cfg.n_paths, cfg.step, rng, workers=cfg.workers
        )
    return report


def run_validation(cfg: ExperimentConfig, group, rep):
    """Returns a list of {name, lhs, rhs, tol, passed} dicts."""
    name = cfg.method.split(":", 1)[1]
    rng = RngStream(cfg.seed)
    checks = []

    def add(nm, lhs, rhs, tol, passed):
        checks.append({"name": nm, "lhs": float(lhs), "rhs": float(rhs),
                       "tol": float(tol), "passed": bool(passed)})

    if name == "geometry":
        gen = rng.generator()
        worst = 0.0
        for _ in range(1000):
            from .hypgeo import mobius_rotation, mobius_translation

            m = mobius_translation(gen.random(), 3.0 * gen.random()) * mobius_rotation(
                2.0 * math.pi * gen.random()
            )
            z = 0.95 * math.sqrt(gen.random()) * np.exp(2j * np.pi * gen.random())
            w = 0.95 * math.sqrt(gen.random()) * np.exp(2j * np.pi * gen.random())
            worst = max(worst, abs(dist_P(m(z), m(w)) - dist_P(z, w)))
        add("isometry_invariance", worst, 0.0, 1e-10, worst <= 1e-10)
        worst = 0.0
        for theta in np.linspace(0.0, 0.9, 7):
            ray = GeodesicRay(DiscPoint.origin(), float(theta))
            for r1 in (0.5, 2.0, 5.0):
                for r2 in (1.0, 4.0):
                    d = dist_P(geodesic_eval(ray, r1), geodesic_eval(ray, r2))
                    worst = max(worst, abs(d - abs(r1 - r2)))
        add("ray_unit_speed", worst, 0.0, 1e-10, worst <= 1e-10)
        worst = max(
            abs(radius_for_R(dist_P(0j, r + 0j)) - r)
            for r in [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99]
        )
        add("radius_round_trip", worst, 0.0, 1e-12, worst <= 1e-12)
        res = group.relator_residual()
        add("octagon_relator", res, 0.0, 1e-8, res <= 1e-8)
    elif name == "cocycle":
        from .cocycle import evaluate
        from .surface import track

        worst_split = 0.0
        worst_hom = 0.0
        for i in range(100):
            path = sample_path(DiscPoint.origin(), 2.0, 0.05, rng.child(i))
            mid = len(path.points) // 2
            full_v = evaluate(rep, path, group)
            prod = evaluate(rep, path.subpath(mid, len(path.points) - 1), group) @ evaluate(
                rep, path.subpath(0, mid), group
            )
            worst_split = max(
                worst_split,
                float(np.max(np.abs(full_v.matrix - prod.matrix)))
                + abs(full_v.log_scale - prod.log_scale),
            )
            w1 = track(path, group)
            w2 = track(path, group)
            worst_hom = max(worst_hom, 0.0 if w1.letters == w2.letters else 1.0)
        ident = evaluate(rep, sample_path(DiscPoint.origin(), 0.0, 0.05, rng.child(1000)), group)
        ident_err = float(np.max(np.abs(ident.matrix - np.eye(rep.dim))))
        add("identity_law", ident_err, 0.0, 1e-10, ident_err <= 1e-10)
        add("multiplicative_law", worst_split, 0.0, 1e-10, worst_split <= 1e-10)
        add("homotopy_law", worst_hom, 0.0, 1e-10, worst_hom <= 1e-10)
    elif name == "semigroup":
        for i, (f, t, s) in enumerate(
            (
                (constant_field(1.0), 0.5, 0.5),
                (exp_neg_dist_field(), 0.5, 0.5),
                (real_part_field(), 1.0, 1.0),
            )
        ):
            r = check_semigroup(f, t, s, cfg.n_paths, rng.child(10 + i))
            add(r.name, r.lhs, r.rhs, r.tolerance, r.passed)
    elif name == "dynkin":
        for i, f in enumerate((constant_field(2.0), real_part_field(), dist_squared_field())):
            r = check_dynkin(f, 1.0, cfg.n_paths, rng.child(20 + i))
            add(r.name, r.lhs, r.rhs, r.tolerance, r.passed)
    elif name == "kernel":
        for t in (0.25, 1.0, 4.0):
            mass = heat_kernel_mass(t)
            add(f"kernel_mass(t={t})", mass, 1.0, 1e-3, 0.999 <= mass <= 1.001)
    elif name == "circle":
        r = check_circle_vs_diffusion(
            smoothed_dist_field(), [4.0, 8.0, 16.0, 32.0], cfg.n_paths, rng
        )
        add(r.name, r.slope, 0.0, r.threshold, r.passed)
    elif name == "drift":
        rho, _ = sample_polar_endpoints(cfg.n_paths, 40.0, cfg.step, rng.generator())
        med = float(np.median(rho[-1]) / 40.0)
        add("drift_median(t=40)", med, 1.0, 0.08, 0.92 <= med <= 1.08)
    elif name == "shadowing":
        r = shadowing_report(cfg.n_paths, [20.0, 40.0, 80.0], cfg.step, rng, workers=cfg.workers)
        add("shadowing_slope", r.slope_shadow_95, 0.0, 0.1, r.passed)
        i40 = r.t_values.index(40.0)
        add("drift_median(t=40)", r.drift_median[i40], 1.0, 0.08,
            0.92 <= r.drift_median[i40] <= 1.08)
    elif name == "uniformity":
        r = direction_distribution_check(cfg.n_paths, max(cfg.horizon, 40.0), cfg.step, 32, rng)
        add("direction_uniformity_p", r.p_value, 1.0, 0.001, r.passed)
    elif name == "conversion":
        eta = group.generators[0](0j)
        u = np.zeros(rep.dim)
        u[0] = 1.0
        # the diffused side runs in raw coordinates: keep this check at
        # moderate horizons regardless of the spectrum-scale default
        t = cfg.horizon if "horizon" not in cfg.defaulted else 5.0
        if t > 20.0:
            raise ConfigError("validate:conversion needs horizon <= 20")
        r = check_exp_conversion(rep, group, u, eta, max(t, 0.5), cfg.n_paths, cfg.step, rng)
        add(r.name, r.lhs, r.rhs, r.tolerance, r.passed)
    else:  # pragma: no cover - guarded by validate()
        raise ConfigError(f"unknown validation {name!r}")
    return checks


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        cfg = apply_flag_overrides(cfg, args)
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed is not None:
            cfg.seed = int(env_seed)
        group = build_genus2()
        rep = build_representation(cfg, group)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    from .cocycle import CocycleError
    from .diffusion import DiffusionError
    from .lyapunov import LyapunovError

    base = cfg.output
    if cfg.method.startswith("validate:"):
        try:
            checks = run_validation(cfg, group, rep)
        except (ConfigError, CocycleError, DiffusionError, LyapunovError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        _write(base + ".csv", checks_csv(checks))
        _write(base + ".manifest.txt", manifest_text(cfg, group))
        lines = []
        for c in checks:
            status = "pass" if c["passed"] else "FAIL"
            lines.append(
                f"[{status}] {c['name']}: lhs={c['lhs']:.6g} rhs={c['rhs']:.6g} tol={c['tol']:.3g}"
            )
        summary = "\n".join(lines) + "\n"
        _write(base + ".summary.txt", summary)
        print(summary, end="")
        return 0 if all(c["passed"] for c in checks) else 2

    try:
        report = run_spectrum(cfg, group, rep)
    except (CocycleError, DiffusionError, LyapunovError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write(base + ".csv", spectrum_csv(report, cfg))
    _write(base + ".manifest.txt", manifest_text(cfg, group, extra=report.provenance))
    lines = [f"method {report.method}  horizon {cfg.horizon}  seed {cfg.seed}"]
    for row in report.rows():
        lines.append(
            f"  chi_{row['index']} = {row['chi']:+.6f}  (multiplicity {row['multiplicity']},"
            f" ci +-{row['ci_halfwidth']:.6f})"
        )
    lines.append(f"  exponent sum {report.exponent_sum:+.3e} (ci {report.exponent_sum_ci:.3e})")
    summary = "\n".join(lines) + "\n"
    _write(base + ".summary.txt", summary)
    print(summary, end="")
    return 0


# -------------------------------------------------------- compare command


def read_spectrum_csv(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [l.strip() for l in fh if l.strip()]
    header = lines[0].split(",")
    expected = ["method", "horizon", "index", "chi", "multiplicity", "ci_halfwidth", "seed", "n_samples"]
    if header != expected:
        raise ConfigError(f"{path}: unexpected CSV header {header}")
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append(
            {
                "method": parts[0],
                "chi": float(parts[3]),
                "multiplicity": int(parts[4]),
                "ci": float(parts[5]),
            }
        )
    return rows


def _expand(rows):
    out = []
    for r in rows:
        out.extend([(r["chi"], r["ci"])] * r["multiplicity"])
    return out


def cmd_compare(args) -> int:
    try:
        a = _expand(read_spectrum_csv(args.report_a))
        b = _expand(read_spectrum_csv(args.report_b))
    except (OSError, ConfigError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if len(a) != len(b):
        print(f"error: dimension mismatch ({len(a)} vs {len(b)})", file=sys.stderr)
        return 1
    ok = True
    for i, ((xa, ca), (xb, cb)) in enumerate(zip(a, b), start=1):
        sigma = math.hypot(ca, cb) / 1.96
        tol = max(args.sigmas * sigma, args.rel * max(abs(xa), abs(xb)))
        agree = abs(xa - xb) <= tol
        ok = ok and agree
        status = "agree" if agree else "DISAGREE"
        print(f"chi_{i}: {xa:+.6f} vs {xb:+.6f}  |diff|={abs(xa - xb):.6f} tol={tol:.6f} [{status}]")
    return 0 if ok else 2


# ----------------------------------------------------------------- parser


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hyplyap", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a config file")
    run.add_argument("config")
    run.add_argument("--method", default=None)
    run.add_argument("--horizon", type=float, default=None)
    run.add_argument("--step", type=float, default=None)
    run.add_argument("--n-paths", dest="n_paths", type=int, default=None)
    run.add_argument("--n-dirs", dest="n_dirs", type=int, default=None)
    run.add_argument("--n-vectors", dest="n_vectors", type=int, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--workers", type=int, default=None)
    run.add_argument("--output", default=None)
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="compare two spectrum CSVs")
    cmp_.add_argument("report_a")
    cmp_.add_argument("report_b")
    cmp_.add_argument("--sigmas", type=float, default=3.0)
    cmp_.add_argument("--rel", type=float, default=0.05)
    cmp_.set_defaults(func=cmd_compare)

    val = sub.add_parser("validate", help="run a named validation suite")
    val.add_argument("name", choices=_VALIDATIONS)
    val.add_argument("--n-paths", dest="n_paths", type=int, default=None)
    val.add_argument("--seed", type=int, default=None)
    val.add_argument("--workers", type=int, default=None)
    val.add_argument("--output", default=None)
    val.set_defaults(func=cmd_validate)

    dump = sub.add_parser("dump-surface", help="print the generator coefficients")
    dump.set_defaults(func=cmd_dump_surface)
    return p


def cmd_validate(args) -> int:
    defaults = {
        "geometry": dict(n_paths=1000),
        "cocycle": dict(n_paths=100),
        "semigroup": dict(n_paths=800),
        "dynkin": dict(n_paths=1200),
        "kernel": dict(n_paths=100),
        "circle": dict(n_paths=3000),
        "drift": dict(n_paths=10000),
        "shadowing": dict(n_paths=10000),
        "uniformity": dict(n_paths=10000),
        "conversion": dict(n_paths=2000),
    }[args.name]
    cfg = ExperimentConfig(
        method=f"validate:{args.name}",
        n_paths=args.n_paths or defaults["n_paths"],
        seed=args.seed if args.seed is not None else 0,
        workers=args.workers or 1,
        output=args.output or f"validate_{args.name}",
        horizon=5.0 if args.name == "conversion" else 60.0,
    )
    if args.name in ("cocycle", "conversion"):
        cfg.matrices = (np.diag([2.0, 0.5]), np.eye(2), np.eye(2), np.eye(2))
    cfg.validate()
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        cfg.seed = int(env_seed)
    group = build_genus2()
    try:
        rep = build_representation(cfg, group)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    checks = run_validation(cfg, group, rep)
    _write(cfg.output + ".csv", checks_csv(checks))
    _write(cfg.output + ".manifest.txt", manifest_text(cfg, group))
    for c in checks:
        status = "pass" if c["passed"] else "FAIL"
        print(f"[{status}] {c['name']}: lhs={c['lhs']:.6g} rhs={c['rhs']:.6g} tol={c['tol']:.3g}")
    return 0 if all(c["passed"] for c in checks) else 2


def cmd_dump_surface(args) -> int:
    group = build_genus2()
    sys.stdout.write(group.export_text())
    print(f"# relator residual {group.relator_residual():.3e}")
    return 0


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
