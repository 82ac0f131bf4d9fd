"""Experiment orchestration: configs, sweeps, persistence, convergence tables.

Result bodies (CSV/JSON/SVG) are pure functions of (config, seed): rows are
emitted in sorted grid order, floats are serialized via repr, and nothing
time- or host-dependent enters them.  Timestamps and wall times live only in
the side manifest.  Long sweeps persist one small JSON per completed grid
point under <out>/cache/, so an interrupted run leaves a *_partial.csv plus
its cache and a rerun recomputes only the missing points.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__, mbrw, noise, particles, ppp, svgplot, theory
from .errors import ConfigError
from .rng import RngKey

KINDS = ("theory", "simulate", "sweep", "ppp", "mbrw", "mbrw-fit", "plot", "bench")

THEORY_HEADER = ("family,alpha,N,u_N,v_N_upper,a_N,c_alpha,predicted_speed,"
                 "follow_leader_bound,residual")
SWEEP_HEADER = ("family,alpha,N,replica,speed,stderr,v_N_upper,predicted_speed,"
                "follow_leader_bound,scaled_correction")
MBRW_HEADER = "alpha,K,M,gamma_M,stderr,gamma_K_limit,chi"


@dataclass
class ExperimentConfig:
    kind: str
    dist: str = "uniform01"
    n_list: tuple[int, ...] = (64, 256, 1024, 4096)
    replicas: int = 1
    steps: int = 200000  # post-burn-in steps
    burnin: int | None = None  # None: max(1000, 50 sqrt(N))
    batches: int = 32
    seed: int = 1
    out: str = "results"
    threads: int = 1
    stepper: str = "pruned"
    init: str = "zero"
    alpha: float = 1.0
    k: int = 64
    m_list: tuple[int, ...] = (16, 64, 256, 1024)
    samples: int = 100000
    prelimit: int | None = None
    input: str | None = None

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if any(n < 1 for n in self.n_list) or not self.n_list:
            raise ConfigError("N grid must be nonempty and positive")
        if any(m < 1 for m in self.m_list) or not self.m_list:
            raise ConfigError("M grid must be nonempty and positive")
        if self.kind in ("theory", "simulate", "sweep"):
            noise.parse_spec(self.dist)  # raises ConfigError on bad specs
        if self.kind in ("sweep", "simulate", "mbrw"):
            if self.steps < self.batches:
                raise ConfigError("steps must be at least the batch count")
            if self.steps % self.batches:
                raise ConfigError(
                    f"steps = {self.steps} must be divisible by batches = "
                    f"{self.batches}"
                )
            if self.burnin is not None and self.burnin < 1:
                raise ConfigError("burnin must be >= 1")
        if self.kind in ("ppp", "mbrw"):
            if not self.alpha > 0:
                raise ConfigError("alpha must be positive")
            if self.k < 1:
                raise ConfigError("K must be >= 1")
        if self.kind in ("plot", "mbrw-fit") and not self.input:
            raise ConfigError(f"{self.kind} requires an input CSV path")
        if self.stepper not in ("pruned", "naive"):
            raise ConfigError(f"unknown stepper {self.stepper!r}")


def config_from_dict(data: dict) -> ExperimentConfig:
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    if "kind" not in data:
        raise ConfigError("config requires a 'kind' field")
    data = dict(data)
    for key in ("n_list", "m_list"):
        if key in data:
            data[key] = tuple(int(v) for v in data[key])
    cfg = ExperimentConfig(**data)
    cfg.validate()
    return cfg


def _fam_tag(spec: str) -> str:
    return spec.replace(":", "-").replace(".", "p")


def _fnum(x) -> str:
    return repr(float(x))


def _write_text(path: str, text: str) -> str:
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def _write_json(path: str, obj) -> str:
    return _write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _manifest(cfg: ExperimentConfig, stem: str, wall: float, outputs) -> str:
    body = {
        "config": asdict(cfg),
        "seed": cfg.seed,
        "outputs": sorted(os.path.basename(p) for p in outputs),
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "frontspeed": __version__,
        },
        "wall_time_s": wall,
        "created_unix": time.time(),
    }
    path = os.path.join(cfg.out, f"{stem}_manifest.json")
    return _write_json(path, body)


# -- sweep / simulate -------------------------------------------------------

def _point_key(cfg, d, n, replica, burnin):
    fields = {
        "dist": d.spec_string(), "n": n, "replica": replica,
        "steps": cfg.steps, "burnin": burnin, "batches": cfg.batches,
        "seed": cfg.seed, "stepper": cfg.stepper, "init": cfg.init,
    }
    digest = hashlib.sha256(json.dumps(fields, sort_keys=True).encode()).hexdigest()
    return fields, digest[:12]


def _estimate_point(cfg, d, n, replica):
    burnin = cfg.burnin if cfg.burnin is not None else particles.default_burnin(n)
    fields, digest = _point_key(cfg, d, n, replica, burnin)
    cache_dir = os.path.join(cfg.out, "cache")
    os.makedirs(cache_dir, exist_ok=True)
    name = f"point_{_fam_tag(d.spec_string())}_N{n}_r{replica}_{digest}.json"
    cache_path = os.path.join(cache_dir, name)
    if os.path.exists(cache_path):
        with open(cache_path) as fh:
            payload = json.load(fh)
        return particles.SpeedEstimate(**payload["estimate"])
    est = particles.estimate_speed(
        d, n, t_total=burnin + cfg.steps, t_burnin=burnin, batches=cfg.batches,
        seed=particles.run_seed(cfg.seed, replica), stepper=cfg.stepper,
        init=cfg.init, num_threads=cfg.threads, master_seed=cfg.seed,
    )
    _write_json(cache_path, {"point": fields, "estimate": asdict(est)})
    return est


def run_sweep(cfg: ExperimentConfig) -> list[str]:
    d = noise.parse_spec(cfg.dist)
    stem = f"sweep_{_fam_tag(cfg.dist)}"
    os.makedirs(cfg.out, exist_ok=True)
    final = os.path.join(cfg.out, stem + ".csv")
    partial = os.path.join(cfg.out, stem + "_partial.csv")
    lines = [SWEEP_HEADER]
    with open(partial, "w", newline="") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for n in sorted(cfg.n_list):
            rep = theory.theory_report(d, n)
            for r in range(cfg.replicas):
                est = _estimate_point(cfg, d, n, r)
                scaled = (est.speed - d.right_endpoint) / rep.a_n
                line = ",".join([
                    d.kind, _fnum(d.tail_index), str(n), str(r),
                    _fnum(est.speed), _fnum(est.stderr), _fnum(rep.v_n_upper),
                    _fnum(rep.predicted_speed), _fnum(rep.follow_leader_bound),
                    _fnum(scaled),
                ])
                lines.append(line)
                fh.write(line + "\n")
                fh.flush()
    _write_text(final, "\n".join(lines) + "\n")
    os.remove(partial)
    return [final]


def run_simulate(cfg: ExperimentConfig) -> list[str]:
    d = noise.parse_spec(cfg.dist)
    n = cfg.n_list[0]
    est = _estimate_point(cfg, d, n, 0)
    rep = theory.theory_report(d, n) if n >= 2 else None
    body = {
        "speed": est.speed,
        "stderr": est.stderr,
        "draws_per_step": est.draws_per_step,
        "scaled_correction": (
            (est.speed - d.right_endpoint) / rep.a_n if rep else None),
        "v_N_upper": rep.v_n_upper if rep else None,
        "predicted_speed": rep.predicted_speed if rep else None,
        "follow_leader_bound": rep.follow_leader_bound if rep else None,
        "config": asdict(cfg),
    }
    stem = f"simulate_{_fam_tag(cfg.dist)}_N{n}"
    os.makedirs(cfg.out, exist_ok=True)
    return [_write_json(os.path.join(cfg.out, stem + ".json"), body)]


# -- theory -----------------------------------------------------------------

def run_theory(cfg: ExperimentConfig) -> list[str]:
    d = noise.parse_spec(cfg.dist)
    lines = [THEORY_HEADER]
    for n in sorted(cfg.n_list):
        rep = theory.theory_report(d, n)
        lines.append(",".join([
            d.kind, _fnum(d.tail_index), str(n), _fnum(rep.u_n),
            _fnum(rep.v_n_upper), _fnum(rep.a_n), _fnum(rep.c_alpha),
            _fnum(rep.predicted_speed), _fnum(rep.follow_leader_bound),
            _fnum(rep.residual),
        ]))
    os.makedirs(cfg.out, exist_ok=True)
    stem = f"theory_{_fam_tag(cfg.dist)}"
    return [_write_text(os.path.join(cfg.out, stem + ".csv"),
                        "\n".join(lines) + "\n")]


# -- ppp / mbrw -------------------------------------------------------------

def run_ppp(cfg: ExperimentConfig) -> list[str]:
    spec = ppp.PppSpec.standard(cfg.alpha)
    u_star = ppp.fixed_point_u(spec, None)
    mc = ppp.mc_lemma1(spec, cfg.k, cfg.samples, RngKey(cfg.seed), u=u_star)
    gamma_k, chi_k = ppp.gamma_and_chi(spec, cfg.k)
    body = {
        "alpha": cfg.alpha,
        "K": cfg.k,
        "u_star": u_star,
        "empirical_mean": mc["empirical_mean"],
        "analytic_value": mc["analytic_value"],
        "stderr": mc["stderr"],
        "gamma": gamma_k,
        "chi": chi_k,
        "config": asdict(cfg),
    }
    os.makedirs(cfg.out, exist_ok=True)
    stem = f"ppp_a{cfg.alpha:g}_K{cfg.k}"
    return [_write_json(os.path.join(cfg.out, stem + ".json"), body)]


def run_mbrw(cfg: ExperimentConfig) -> list[str]:
    spec = ppp.PppSpec.standard(cfg.alpha)
    gamma_k, chi_k = ppp.gamma_and_chi(spec, cfg.k)
    seed_eff = particles.run_seed(cfg.seed, 0)  # shared across M: coupled runs
    prelimit = None
    if cfg.prelimit is not None:
        prelimit = (noise.NoiseDistribution("polymax", alpha=cfg.alpha),
                    cfg.prelimit)
    lines = [MBRW_HEADER]
    for m in sorted(cfg.m_list):
        burnin = cfg.burnin if cfg.burnin is not None else particles.default_burnin(m)
        est = mbrw.estimate_gamma_M(
            spec, m, cfg.k, t_total=burnin + cfg.steps, t_burnin=burnin,
            batches=cfg.batches, seed=seed_eff, master_seed=cfg.seed,
            prelimit=prelimit,
        )
        lines.append(",".join([
            _fnum(cfg.alpha), str(cfg.k), str(m), _fnum(est.speed),
            _fnum(est.stderr), _fnum(gamma_k), _fnum(chi_k),
        ]))
    os.makedirs(cfg.out, exist_ok=True)
    stem = f"mbrw_a{cfg.alpha:g}_K{cfg.k}"
    if cfg.prelimit is not None:
        stem += f"_prelimit{cfg.prelimit}"
    return [_write_text(os.path.join(cfg.out, stem + ".csv"),
                        "\n".join(lines) + "\n")]


def run_mbrw_fit(cfg: ExperimentConfig) -> list[str]:
    rows = _read_csv(cfg.input, MBRW_HEADER)
    alpha = float(rows[0]["alpha"])
    k = int(rows[0]["K"])
    spec = ppp.PppSpec.standard(alpha)
    m_grid = [int(r["M"]) for r in rows]
    ests = [
        particles.SpeedEstimate(
            speed=float(r["gamma_M"]), stderr=float(r["stderr"]), t_total=0,
            t_burnin=0, batches=0, n=int(r["M"]), seed=cfg.seed, stepper="mbrw",
            draws_per_step=0.0,
        )
        for r in rows
    ]
    fit = mbrw.bg_correction_fit(spec, k, m_grid, ests)
    body = asdict(fit)
    body["abs_ratio_to_chi"] = (
        abs(fit.coefficient) / abs(fit.chi) if fit.chi else None)
    body["config"] = asdict(cfg)
    os.makedirs(cfg.out, exist_ok=True)
    stem = os.path.splitext(os.path.basename(cfg.input))[0] + "_fit"
    return [_write_json(os.path.join(cfg.out, stem + ".json"), body)]


# -- convergence analysis ----------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    scaled_correction: float
    stderr_scaled: float
    target: float
    ratio: float


def _read_csv(path: str, expected_header: str) -> list[dict]:
    try:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read CSV {path!r}: {exc}") from exc
    if not lines or lines[0] != expected_header:
        raise ConfigError(
            f"CSV schema mismatch in {path!r}: expected header {expected_header!r}"
        )
    cols = expected_header.split(",")
    return [dict(zip(cols, ln.split(","))) for ln in lines[1:]]


def convergence_table(rows: list[dict]) -> list[ConvergenceRow]:
    """Aggregate sweep rows per N with inverse-variance replica weights."""
    if not rows:
        raise ConfigError("sweep CSV has no data rows")
    family = rows[0]["family"]
    alpha = float(rows[0]["alpha"])
    x_xi = 1.0 if family == "uniform01" else 0.0
    c_a = theory.c_alpha(alpha)
    by_n: dict[int, list[dict]] = {}
    for r in rows:
        by_n.setdefault(int(r["N"]), []).append(r)
    if len(by_n) < 2:
        raise ConfigError("convergence table needs at least 2 distinct N")
    out = []
    for n in sorted(by_n):
        group = by_n[n]
        a_n = (x_xi - float(group[0]["predicted_speed"])) / c_a
        speeds = np.array([float(r["speed"]) for r in group])
        errs = np.array([float(r["stderr"]) for r in group])
        if np.any(errs == 0.0):
            exact = speeds[errs == 0.0]
            mean = float(exact.mean())
            se = 0.0
        else:
            w = 1.0 / errs**2
            mean = float(np.sum(w * speeds) / np.sum(w))
            se = float(1.0 / math.sqrt(np.sum(w)))
        scaled = (mean - x_xi) / a_n
        out.append(ConvergenceRow(
            n=n, scaled_correction=scaled, stderr_scaled=se / a_n,
            target=-c_a, ratio=scaled / (-c_a),
        ))
    return out


def run_plot(cfg: ExperimentConfig) -> list[str]:
    rows = _read_csv(cfg.input, SWEEP_HEADER)
    table = convergence_table(rows)
    family = rows[0]["family"]
    alpha = float(rows[0]["alpha"])
    svg = svgplot.convergence_svg(table, table[0].target, family, alpha)
    os.makedirs(cfg.out, exist_ok=True)
    stem = os.path.splitext(os.path.basename(cfg.input))[0]
    return [_write_text(os.path.join(cfg.out, stem + ".svg"), svg)]


def run_bench(cfg: ExperimentConfig) -> list[str]:
    from . import bench

    body = bench.run_benchmark(n_list=cfg.n_list, dist=cfg.dist, seed=cfg.seed,
                               steps=min(cfg.steps, 50), threads=cfg.threads)
    os.makedirs(cfg.out, exist_ok=True)
    return [_write_json(os.path.join(cfg.out, "bench.json"), body)]


_RUNNERS = {
    "theory": run_theory,
    "simulate": run_simulate,
    "sweep": run_sweep,
    "ppp": run_ppp,
    "mbrw": run_mbrw,
    "mbrw-fit": run_mbrw_fit,
    "plot": run_plot,
    "bench": run_bench,
}


def run(cfg: ExperimentConfig) -> list[str]:
    """Execute one experiment; returns written artifact paths (plus manifest)."""
    cfg.validate()
    start = time.monotonic()
    outputs = _RUNNERS[cfg.kind](cfg)
    stem = os.path.splitext(os.path.basename(outputs[0]))[0]
    manifest = _manifest(cfg, stem, time.monotonic() - start, outputs)
    return outputs + [manifest]
