"""Batch experiments that turn the stability, dimension and inverse-problem
results into one-sided numerical checks over seeded random fields.

Every experiment is a pure function of its :class:`LabConfig`: trials may run
on a thread pool, but records are folded in seed order so reports are
reproducible byte for byte.
"""

from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import __version__
from ._errors import InvalidInputError
from .barcode import (barcode_from_field, box_dimension, pers_p,
                      persistence_index, variation_index)
from .domain import ScalarField, gen_fbm, gen_random_fourier, smooth_bump
from .transport import (bottleneck, coupled_cost, mean_measure, to_measure,
                        wasserstein_between_distributions, wasserstein_p)
from .tree import (approximate_from_tree, build_merge_tree, canonical_form,
                   cascade_tree, distortion_bound, dyck_path, random_merge_tree,
                   unit_edge_tree)

EXPERIMENTS = ("stability", "dimension", "roundtrip", "discretization",
               "transport_distribution")

# Local linear contractibility constant assumed for graph domains.
LLC_CONSTANT = 1.0

# Offset separating the perturbation stream from the field stream.
_BUMP_SEED_OFFSET = 1_000_003


@dataclass
class LabConfig:
    experiment: str
    seeds: int = 20
    seed: int = 0
    n: int = 1024
    hurst: float = 0.5
    hursts: tuple[float, ...] = (0.5, 0.8)
    decay: float = 2.0
    delta: float = 0.1
    p: float = 3.0
    q: float = 2.0
    eps_grid: tuple[float, ...] | None = None
    essential: str = "clip"
    max_leaves: int = 40
    depth: int = 8
    a: float = 1.0
    lam: float = 0.25
    beta: float | None = None
    steps: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64)
    threads: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidInputError(f"unknown experiment {self.experiment!r}")
        if self.seeds < 1:
            raise InvalidInputError("seeds must be >= 1")
        if self.n < 4:
            raise InvalidInputError("n must be >= 4")
        if not (self.p >= 1 and self.q >= 1):
            raise InvalidInputError("exponents must be >= 1")
        if self.experiment == "stability" and not self.q < self.p:
            raise InvalidInputError("the stability bound needs q < p")
        if self.delta < 0:
            raise InvalidInputError("delta must be nonnegative")
        if self.threads < 1:
            raise InvalidInputError("threads must be >= 1")
        for h in (self.hurst, *self.hursts):
            if not 0 < h < 1:
                raise InvalidInputError("Hurst exponents lie in (0, 1)")
        if self.eps_grid is not None:
            self.eps_grid = tuple(float(e) for e in self.eps_grid)
        self.hursts = tuple(float(h) for h in self.hursts)
        self.steps = tuple(int(s) for s in self.steps)
        if not self.steps or min(self.steps) < 1:
            raise InvalidInputError("subsampling steps must be positive")

    def seed_list(self) -> list[int]:
        return [self.seed + i for i in range(self.seeds)]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "LabConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        for k in ("hursts", "eps_grid", "steps"):
            if data.get(k) is not None:
                data[k] = tuple(data[k])
        return cls(**data)


@dataclass
class LabReport:
    config: LabConfig
    trials: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def violations(self) -> int:
        return int(self.aggregates.get("violations", 0))

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "trials": self.trials,
                "aggregates": self.aggregates, "metadata": self.metadata}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True,
                          allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "LabReport":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"bad report JSON: {exc}") from None
        return cls(LabConfig.from_dict(data["config"]), data["trials"],
                   data["aggregates"], data["metadata"])

    def __eq__(self, other) -> bool:
        return isinstance(other, LabReport) and self.to_dict() == other.to_dict()

    def to_csv(self) -> str:
        lines = ["seed,check,lhs,rhs,pass"]
        for r in self.trials:
            lines.append(f"{r['seed']},{r['check']},{r['lhs']!r},{r['rhs']!r},"
                         f"{int(r['pass'])}")
        return "\n".join(lines) + "\n"

    def plot_csv(self) -> str:
        lines = ["x,y,series"]
        for s in self.aggregates.get("plot", []):
            lines.append(f"{s['x']!r},{s['y']!r},{s['series']}")
        return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# helpers


def _record(seed, check, lhs, rhs, slack=0.0) -> dict:
    lhs, rhs = float(lhs), float(rhs)
    return {"seed": int(seed), "check": check, "lhs": lhs, "rhs": rhs,
            "slack": float(slack), "pass": bool(lhs <= rhs + slack)}


def _map(cfg: LabConfig, func, items):
    items = list(items)
    if cfg.threads == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(func, items))


def _quantiles(x) -> dict:
    x = np.asarray(x, dtype=float)
    if not len(x):
        return {"n": 0}
    q = np.quantile(x, [0.1, 0.5, 0.9])
    return {"n": int(len(x)), "q10": float(q[0]), "median": float(q[1]),
            "q90": float(q[2]), "min": float(x.min()), "max": float(x.max())}


def _summarize(trials: list[dict]) -> dict:
    failing = sorted({r["seed"] for r in trials if not r["pass"]})
    per_check: dict[str, dict] = {}
    for r in trials:
        c = per_check.setdefault(r["check"], {"trials": 0, "violations": 0, "ratios": []})
        c["trials"] += 1
        c["violations"] += int(not r["pass"])
        if r["rhs"] > 0:
            c["ratios"].append(r["lhs"] / r["rhs"])
    for c in per_check.values():
        c["ratio"] = _quantiles(c.pop("ratios"))
    return {"violations": sum(c["violations"] for c in per_check.values()),
            "failing_seeds": failing, "trials": len(trials), "checks": per_check}


def _metadata() -> dict:
    return {"llc_constant": LLC_CONSTANT, "version": f"treepers {__version__}"}


def _perturbed(f: ScalarField, delta: float, seed: int) -> ScalarField:
    bump = smooth_bump(len(f), seed + _BUMP_SEED_OFFSET)
    return f.with_values(f.values + delta * bump)


def _report(cfg, trials, extra=None) -> LabReport:
    agg = _summarize(trials)
    if extra:
        agg.update(extra)
    return LabReport(cfg, trials, agg, _metadata())


def _require(cfg: LabConfig, name: str):
    if cfg.experiment != name:
        raise InvalidInputError(f"config is for {cfg.experiment!r}, not {name!r}")


# ----------------------------------------------------------------------------
# experiments


def _stability_trial(cfg: LabConfig, seed: int) -> list[dict]:
    f = gen_fbm(cfg.n, cfg.hurst, seed)
    g = _perturbed(f, cfg.delta, seed)
    sup = f.sup_distance(g)
    scale = max(1.0, float(np.max(np.abs(f.values))), float(np.max(np.abs(g.values))))
    slack = 1e-9 * scale
    df, dg = barcode_from_field(f), barcode_from_field(g)
    mu, nu = to_measure(df), to_measure(dg)
    p, q = cfg.p, cfg.q
    d_inf = bottleneck(mu, nu, essential=cfg.essential)
    dist = distortion_bound(f, g, seed=seed)
    d_pp = wasserstein_p(mu, nu, p, essential=cfg.essential) ** p
    bound = 2 ** q * sup ** (p - q) * (pers_p(df, q) ** q + pers_p(dg, q) ** q)
    return [_record(seed, "bottleneck", d_inf, sup, slack),
            _record(seed, "distortion", dist, 2 * sup, slack),
            _record(seed, "wasserstein", d_pp, bound, slack * max(1.0, bound))]


def run_stability(cfg: LabConfig) -> LabReport:
    """Bottleneck, tree-distortion and Wasserstein stability under a smooth
    perturbation of size ``delta``."""
    _require(cfg, "stability")
    rows = _map(cfg, lambda s: _stability_trial(cfg, s), cfg.seed_list())
    return _report(cfg, [r for block in rows for r in block])


def _dimension_trial(cfg: LabConfig, hurst: float, seed: int) -> dict:
    f = gen_fbm(cfg.n, hurst, seed)
    t = build_merge_tree(f)
    est = persistence_index(t, cfg.eps_grid)
    box = box_dimension(t, cfg.eps_grid)
    var = variation_index(f)
    return {"hurst": hurst, "seed": seed, "persistence_index": est.index,
            "ols_slope": est.slope, "r2": est.r2, "box_dimension": box["upper_est"],
            "variation_index": var}


def run_dimension(cfg: LabConfig) -> LabReport:
    """Persistence index, box dimension and variation index of fBm paths.

    The regularity bound is checked on per-Hurst medians (with slack 0.3),
    as is pairwise agreement of the three estimators.  A single-mode Fourier
    field serves as the smooth control, whose index must be 1.
    """
    _require(cfg, "dimension")
    jobs = [(h, s) for h in cfg.hursts for s in cfg.seed_list()]
    rows = _map(cfg, lambda hs: _dimension_trial(cfg, *hs), jobs)
    trials, summary, plot = [], {}, []
    names = ("persistence_index", "box_dimension", "variation_index")
    for h in cfg.hursts:
        mine = [r for r in rows if r["hurst"] == h]
        med = {k: float(np.median([r[k] for r in mine])) for k in names}
        summary[repr(h)] = {k: _quantiles([r[k] for r in mine]) for k in names}
        tag = f"H={h!r}"
        trials.append(_record(cfg.seed, f"regularity[{tag}]",
                              med["persistence_index"], 1.0 / h + 0.3))
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                trials.append(_record(cfg.seed, f"agreement[{tag},{a},{b}]",
                                      abs(med[a] - med[b]), 0.3))
        for r in mine:
            plot.append({"x": float(r["seed"]), "y": r["persistence_index"],
                         "series": f"index {tag}"})
    smooth = gen_random_fourier(cfg.n, 1, cfg.decay, cfg.seed)
    smooth_index = persistence_index(build_merge_tree(smooth)).index
    trials.append(_record(cfg.seed, "smooth_index", abs(smooth_index - 1.0), 0.0, 1e-9))
    return _report(cfg, trials, {"estimates": summary, "per_seed": rows,
                                 "smooth_index": smooth_index, "plot": plot})


def _roundtrip_trial(cfg: LabConfig, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    t = random_merge_tree(rng, int(rng.integers(1, cfg.max_leaves + 1)))
    f, _ = dyck_path(t)
    same = canonical_form(build_merge_tree(f)) == canonical_form(t)
    u = unit_edge_tree(rng, int(rng.integers(2, cfg.max_leaves + 1)))
    n_leaves = len(u.leaves)
    contour = dyck_path(u)[1].length
    return [_record(seed, "canonical", 0.0 if same else 1.0, 0.0),
            _record(seed, "contour", contour, 4 * n_leaves - 2)]


def run_roundtrip(cfg: LabConfig) -> LabReport:
    """Tree -> contour field -> tree, plus the Cauchy bound of the approximants
    of a deep binary cascade."""
    _require(cfg, "roundtrip")
    rows = _map(cfg, lambda s: _roundtrip_trial(cfg, s), cfg.seed_list())
    trials = [r for block in rows for r in block]
    cascade = cascade_tree(cfg.depth)
    fs = approximate_from_tree(cascade, cfg.a, cfg.lam, cfg.depth)
    worst = 0.0
    for i in range(len(fs)):
        for j in range(i + 1, len(fs)):
            gap = fs[i].sup_distance(fs[j])
            bound = cfg.a * 2.0 ** -(i + 1)
            trials.append(_record(cfg.seed, f"cauchy[{i + 1},{j + 1}]", gap, bound, 1e-12))
            worst = max(worst, gap / bound)
    return _report(cfg, trials, {"max_cauchy_ratio": worst})


def _interpolate(x: np.ndarray, step: int) -> np.ndarray:
    idx = np.arange(0, len(x), step)
    if idx[-1] != len(x) - 1:
        idx = np.append(idx, len(x) - 1)
    return np.interp(np.arange(len(x)), idx, x[idx])


def _holder_constant(x: np.ndarray, spacing: float, beta: float, max_lag: int) -> float:
    """Largest ``|x(i+l) - x(i)| / (l*spacing)**beta`` over all lags ``l <= max_lag``."""
    best = 0.0
    for lag in range(1, min(max_lag, len(x) - 1) + 1):
        jump = float(np.max(np.abs(x[lag:] - x[:-lag])))
        best = max(best, jump / (lag * spacing) ** beta)
    return best


def _discretization_trial(cfg: LabConfig, beta: float, seed: int) -> dict:
    f = gen_fbm(cfg.n, cfg.hurst, seed)
    x = f.values
    h = 1.0 / (cfg.n - 1)
    lam = _holder_constant(x, h, beta, max(cfg.steps))
    errs = {s: float(np.max(np.abs(x - _interpolate(x, s)))) for s in cfg.steps}
    return {"seed": seed, "holder": lam, "errors": errs,
            "coarse": _interpolate(x, max(cfg.steps)), "field": f}


def run_discretization(cfg: LabConfig) -> LabReport:
    """Subsample on a net of spacing ``eps``, interpolate back, and compare the
    error with the empirical Hoelder bound and the coupling bound."""
    _require(cfg, "discretization")
    beta = cfg.beta if cfg.beta is not None else max(cfg.hurst - 0.1, 0.05)
    if not 0 < beta <= cfg.hurst:
        raise InvalidInputError("beta must lie in (0, hurst]")
    h = 1.0 / (cfg.n - 1)
    rows = _map(cfg, lambda s: _discretization_trial(cfg, beta, s), cfg.seed_list())
    trials, plot = [], []
    for r in rows:
        for s, err in r["errors"].items():
            trials.append(_record(r["seed"], f"holder[step={s}]", err,
                                  r["holder"] * (s * h) ** beta, 1e-12))
    steps = [s for s in cfg.steps if s > 1]
    med = [float(np.median([r["errors"][s] for r in rows])) for s in steps]
    slope = None
    if len(steps) >= 2 and min(med) > 0:
        slope = float(np.polyfit(np.log(np.array(steps) * h), np.log(med), 1)[0])
        trials.append(_record(cfg.seed, "scaling_slope_low", beta - 0.2, slope))
        trials.append(_record(cfg.seed, "scaling_slope_high", slope, cfg.hurst + 0.2))
    for s, m in zip(steps, med):
        plot.append({"x": s * h, "y": m, "series": "median sup error"})
    # coupling bound: W_{p,Linf} of the two empirical laws vs the seed coupling
    p = cfg.p
    F = np.array([r["field"].values for r in rows])
    G = np.array([r["coarse"] for r in rows])
    D = np.max(np.abs(F[:, None, :] - G[None, :, :]), axis=2)
    ri, ci = linear_sum_assignment(D ** p)
    exact = float(np.mean(D[ri, ci] ** p) ** (1 / p))
    coupled = float(np.mean(np.diag(D) ** p) ** (1 / p))
    trials.append(_record(cfg.seed, "coupling", exact, coupled, 1e-12))
    return _report(cfg, trials, {"beta": beta, "regression_slope": slope,
                                 "median_errors": dict(zip(map(str, steps), med)),
                                 "w_exact": exact, "w_coupled": coupled,
                                 "holder": _quantiles([r["holder"] for r in rows]),
                                 "plot": plot})


def run_transport_distribution(cfg: LabConfig) -> LabReport:
    """Diagram laws of coupled ensembles ``g = f + delta * bump``.

    Checks the distribution-level stability bound against the seed coupling,
    and that mean measures are closer than the laws they average.
    """
    _require(cfg, "transport_distribution")
    p = cfg.p
    seeds = cfg.seed_list()

    def draw(seed):
        f = gen_fbm(cfg.n, cfg.hurst, seed)
        g = _perturbed(f, cfg.delta, seed)
        return f.sup_distance(g), to_measure(barcode_from_field(f)), \
            to_measure(barcode_from_field(g))

    drawn = _map(cfg, draw, seeds)
    sups = np.array([d[0] for d in drawn])
    A = [d[1] for d in drawn]
    B = [d[2] for d in drawn]
    ess = cfg.essential

    def row(i):
        return [(bottleneck(A[i], b, essential=ess), wasserstein_p(A[i], b, p, essential=ess))
                for b in B]

    table = np.array(_map(cfg, row, range(len(A))))
    d_inf, d_p = table[..., 0], table[..., 1]
    w_diag = wasserstein_between_distributions(A, B, p, cost_matrix=d_inf)
    w_fields = float(np.mean(sups ** p) ** (1 / p))
    w_dp = wasserstein_between_distributions(A, B, p, cost_matrix=d_p)
    mean_gap = wasserstein_p(mean_measure(A), mean_measure(B), p, essential=ess)
    trials = [_record(cfg.seed, "law_stability", w_diag, w_fields, 1e-9),
              _record(cfg.seed, "mean_measure", mean_gap, w_dp, 1e-9)]
    return _report(cfg, trials, {
        "w_diagram_laws": w_diag, "w_field_coupling": w_fields,
        "w_dp_laws": w_dp, "mean_measure_distance": mean_gap,
        "coupled_diagram_cost": coupled_cost(A, B, p, essential=ess),
        "sample_size": len(seeds)})


RUNNERS = {"stability": run_stability, "dimension": run_dimension,
           "roundtrip": run_roundtrip, "discretization": run_discretization,
           "transport_distribution": run_transport_distribution}


def run(cfg: LabConfig) -> LabReport:
    return RUNNERS[cfg.experiment](cfg)
