"""Monte Carlo size and power studies.

A :class:`Scenario` names a sampling family, its parameters, group sizes
and the tests to run.  Replication ``r`` of a scenario draws its data from
``RngStream(base_seed, r)``, so results do not depend on how replications
are spread across worker processes.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import (
    PermutationConfig,
    anderson_darling_ksample,
    kruskal_wallis,
    permutation_energy_test,
    reduce_univariate,
)
from .data import build_pooled, Sample, pairwise_distances
from .errors import ConvergenceError, DegenerateDataError, FeasibilityError, ValidationError
from .jel import jel_test
from .stats import RngStream, sample_mvexp, sample_mvnormal, sample_mvt

log = logging.getLogger(__name__)

METHODS = ("JEL-S", "ET", "AD", "KW")
_METHOD_ALIASES = {"jel": "JEL-S", "jel-s": "JEL-S", "et": "ET", "energy": "ET",
                   "ad": "AD", "kw": "KW"}


def canonical_method(name: str) -> str:
    key = name.strip().lower()
    if key in _METHOD_ALIASES:
        return _METHOD_ALIASES[key]
    raise ValidationError(f"unknown method {name!r}; expected one of {', '.join(METHODS)}")


# Normal scale parameters multiply the standard deviation (covariance
# delta**2 I); this reproduces the published power tables.  The t family
# multiplies its shape matrix by delta directly.


def _normal_scale(deltas, k, size, dim, gen):
    sd = 1.0 if k == 0 else deltas[k - 1]
    return sample_mvnormal(np.zeros(dim), sd * sd, size, gen)


def _normal_location(deltas, k, size, dim, gen):
    loc = 0.0 if k == 0 else deltas[k - 1]
    return sample_mvnormal(np.full(dim, loc), 1.0, size, gen)


def _normal_scale_location(deltas, k, size, dim, gen):
    # deltas = (locations of groups 2..K, scales of groups 2..K)
    m = len(deltas) // 2
    loc = 0.0 if k == 0 else deltas[k - 1]
    sd = 1.0 if k == 0 else deltas[m + k - 1]
    return sample_mvnormal(np.full(dim, loc), sd * sd, size, gen)


def _t5_scale(deltas, k, size, dim, gen):
    scale = 1.0 if k == 0 else deltas[k - 1]
    return sample_mvt(5, scale, dim, size, gen)


def _exp_scale(deltas, k, size, dim, gen):
    rate = 1.0 if k == 0 else deltas[k - 1]
    return sample_mvexp(rate, dim, size, gen)


# family -> (number of parameters for K groups, group sampler)
FAMILIES = {
    "normal-scale": (lambda k: k - 1, _normal_scale),
    "normal-location": (lambda k: k - 1, _normal_location),
    "normal-scale-location": (lambda k: 2 * (k - 1), _normal_scale_location),
    "t5-scale": (lambda k: k - 1, _t5_scale),
    "exp-scale": (lambda k: k - 1, _exp_scale),
}


@dataclass(frozen=True)
class Scenario:
    """One cell of a size/power table.

    ``deltas`` hold the parameters of groups 2..K (group 1 is the reference
    law): standard-deviation multipliers for the normal scale families,
    shape multipliers for ``t5-scale``, rates for ``exp-scale``, locations
    for ``normal-location``, and locations followed by standard-deviation
    multipliers for ``normal-scale-location``.
    """

    family: str
    deltas: tuple
    sizes: tuple
    dim: int = 1
    alpha_level: float = 0.05
    replications: int = 2000
    methods: tuple = ("JEL-S",)
    base_seed: int = 0
    permutations: int = 199
    reduction: str = "norm"
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "methods", tuple(canonical_method(m) for m in self.methods))
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}")
        k = len(self.sizes)
        if k < 2:
            raise ValidationError("a scenario needs at least 2 groups")
        want = FAMILIES[self.family][0](k)
        if len(self.deltas) != want:
            raise ValidationError(
                f"family {self.family!r} with K={k} takes {want} parameters, got {len(self.deltas)}"
            )
        if self.family != "normal-location":
            scales = self.deltas if self.family != "normal-scale-location" else self.deltas[k - 1:]
            if any(d <= 0 for d in scales):
                raise ValidationError("scale/rate parameters must be positive")
        if self.dim < 1:
            raise ValidationError("dim must be at least 1")
        if self.replications < 100:
            raise ValidationError("replications must be at least 100")
        if not 0 < self.alpha_level < 1:
            raise ValidationError("alpha must lie in (0, 1)")
        if not self.methods:
            raise ValidationError("no methods selected")
        if min(self.sizes) < 3:
            raise ValidationError("group sizes must be at least 3")

    @property
    def k(self) -> int:
        return len(self.sizes)

    def label(self) -> str:
        if self.name:
            return self.name
        deltas = ", ".join(f"{d:g}" for d in self.deltas)
        sizes = "/".join(str(n) for n in self.sizes)
        return f"{self.family} d={self.dim} ({deltas}) n={sizes}"


def draw_groups(s: Scenario, rng) -> list[np.ndarray]:
    sampler = FAMILIES[s.family][1]
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return [sampler(s.deltas, k, n, s.dim, gen) for k, n in enumerate(s.sizes)]


def replicate(s: Scenario, r: int) -> dict:
    """Run every selected method on replication ``r``.

    Returns ``method -> bool`` rejection indicators, with ``None`` for a
    JEL-S solver failure.
    """
    stream = RngStream(s.base_seed, r)
    groups = draw_groups(s, stream.child(0))
    pooled = build_pooled([Sample(k + 1, g) for k, g in enumerate(groups)])
    dm = pairwise_distances(pooled.points) if ("JEL-S" in s.methods or "ET" in s.methods) else None
    out = {}
    for m in s.methods:
        if m == "JEL-S":
            try:
                out[m] = jel_test(pooled, s.alpha_level, dm=dm).reject
            except (ConvergenceError, DegenerateDataError, FeasibilityError) as exc:
                log.debug("replication %d: JEL-S failed: %s", r, exc)
                out[m] = None
        elif m == "ET":
            cfg = PermutationConfig(s.permutations, stream.child(1))
            out[m] = permutation_energy_test(pooled, cfg, s.alpha_level, dm=dm).reject
        else:
            values = reduce_univariate(pooled.points, s.reduction)
            test = anderson_darling_ksample if m == "AD" else kruskal_wallis
            out[m] = test(values, pooled.labels, s.alpha_level).reject
    return out


def _run_chunk(args):
    s, start, stop = args
    return [replicate(s, r) for r in range(start, stop)]


@dataclass(frozen=True)
class MethodRate:
    rejections: int
    valid: int
    failures: int

    @property
    def rate(self) -> float:
        return self.rejections / self.valid if self.valid else float("nan")

    @property
    def se(self) -> float:
        r = self.rate
        return math.sqrt(r * (1 - r) / self.valid) if self.valid else float("nan")


@dataclass(frozen=True)
class ScenarioRow:
    scenario: Scenario
    rates: dict
    error: str | None = None
    seconds: float = 0.0


def _chunks(n, workers):
    size = max(1, math.ceil(n / (workers * 4)))
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def run_scenario(s: Scenario, workers: int = 1, executor=None) -> ScenarioRow:
    """Rejection rates of every method in a scenario.

    Solver failures are counted per method and excluded from the rate
    denominator.
    """
    t0 = time.perf_counter()
    if workers > 1 or executor is not None:
        own = executor is None
        ex = executor or ProcessPoolExecutor(max_workers=workers)
        try:
            parts = ex.map(_run_chunk, [(s, a, b) for a, b in _chunks(s.replications, workers)])
            results = [res for part in parts for res in part]
        finally:
            if own:
                ex.shutdown()
    else:
        results = [replicate(s, r) for r in range(s.replications)]
    rates = {}
    for m in s.methods:
        flags = [res[m] for res in results]
        failures = sum(f is None for f in flags)
        rates[m] = MethodRate(sum(bool(f) for f in flags if f is not None), len(flags) - failures, failures)
    return ScenarioRow(s, rates, seconds=time.perf_counter() - t0)


@dataclass
class ResultTable:
    rows: list
    metadata: dict = field(default_factory=dict)

    @property
    def methods(self) -> list:
        seen = []
        for row in self.rows:
            for m in row.scenario.methods:
                if m not in seen:
                    seen.append(m)
        return seen

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scenario", "family", "deltas", "sizes", "dim", "alpha", "replications",
                    "method", "rate", "se", "valid", "failures", "error"])
        for row in self.rows:
            s = row.scenario
            common = [s.label(), s.family, " ".join(f"{d:g}" for d in s.deltas),
                      " ".join(str(n) for n in s.sizes), s.dim, s.alpha_level, s.replications]
            if row.error:
                w.writerow(common + ["", "", "", "", "", row.error])
                continue
            for m, mr in row.rates.items():
                w.writerow(common + [m, f"{mr.rate:.4f}", f"{mr.se:.4f}", mr.valid, mr.failures, ""])
        return buf.getvalue()

    def to_markdown(self, timing: bool = False) -> str:
        """Markdown table; wall time is left out unless ``timing`` so that
        reruns with the same seed give identical files."""
        methods = self.methods
        lines = ["| scenario | " + " | ".join(methods) + " |",
                 "|---|" + "---|" * len(methods)]
        for row in self.rows:
            cells = []
            for m in methods:
                mr = row.rates.get(m)
                if row.error:
                    cells.append("error")
                elif mr is None:
                    cells.append("")
                else:
                    cells.append(f"{mr.rate:.3f} ± {mr.se:.3f}")
            lines.append(f"| {row.scenario.label()} | " + " | ".join(cells) + " |")
        meta = ", ".join(f"{k}={v}" for k, v in self.metadata.items()
                         if timing or k != "wall_seconds")
        if meta:
            lines += ["", f"_{meta}_"]
        return "\n".join(lines) + "\n"


def run_grid(scenarios, workers: int = 1, progress=None) -> ResultTable:
    """Run scenarios in order; a failing scenario is recorded, not raised."""
    scenarios = list(scenarios)
    if not scenarios:
        raise ValidationError("empty scenario list")
    t0 = time.perf_counter()
    rows = []
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for i, s in enumerate(scenarios):
            try:
                row = run_scenario(s, workers, executor)
            except Exception as exc:  # noqa: BLE001 - grid keeps going
                log.warning("scenario %s failed: %s", s.label(), exc)
                row = ScenarioRow(s, {}, error=f"{type(exc).__name__}: {exc}")
            rows.append(row)
            if progress is not None:
                progress(i, len(scenarios), row)
    finally:
        if executor is not None:
            executor.shutdown()
    seeds = sorted({s.base_seed for s in scenarios})
    meta = {"seed": seeds[0] if len(seeds) == 1 else seeds,
            "replications": max(s.replications for s in scenarios),
            "wall_seconds": round(time.perf_counter() - t0, 2)}
    return ResultTable(rows, meta)


class ConfigError(ValidationError):
    def __init__(self, message, lineno=None):
        super().__init__(f"line {lineno}: {message}" if lineno else message)
        self.lineno = lineno


_LIST_KEYS = {"deltas", "sizes", "methods"}
_KEYS = {"name", "family", "deltas", "sizes", "dim", "alpha", "reps", "replications",
         "methods", "seed", "permutations", "reduction"}


def parse_config(text: str, seed: int | None = None, reps: int | None = None) -> list[Scenario]:
    """Parse a scenario file.

    One ``key = value`` per line, ``#`` starts a comment, and blank lines
    separate scenarios (comment-only lines do not).  Keys: ``name, family, deltas, sizes, dim, alpha,
    reps, methods, seed, permutations, reduction``; lists are comma
    separated.  A block starting with a ``defaults`` line sets values for all
    later blocks.  ``seed`` and ``reps`` override every scenario.
    """
    blocks, cur = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not raw.strip():
            if cur:
                blocks.append(cur)
                cur = []
            continue
        if not line:
            continue
        if line.lower() == "defaults":
            line = "defaults ="
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {raw.strip()!r}", lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.lower()
        if key not in _KEYS and key != "defaults":
            raise ConfigError(f"unknown key {key!r}", lineno)
        cur.append((lineno, key, value))
    if cur:
        blocks.append(cur)

    defaults: dict = {}
    scenarios = []
    for block in blocks:
        entries = {}
        is_defaults = block[0][1] == "defaults"
        for lineno, key, value in block:
            if key == "defaults":
                continue
            if key == "replications":
                key = "reps"
            entries[key] = (lineno, value)
        if is_defaults:
            defaults.update(entries)
            continue
        merged = {**defaults, **entries}
        first = block[0][0]
        scenarios.append(_scenario_from_entries(merged, first, seed, reps))
    if not scenarios:
        raise ConfigError("no scenarios defined")
    return scenarios


def _scenario_from_entries(entries, first_line, seed, reps):
    def get(key, conv, default=None):
        if key not in entries:
            if default is None:
                raise ConfigError(f"missing required key {key!r}", first_line)
            return default
        lineno, value = entries[key]
        try:
            if key in _LIST_KEYS:
                return tuple(conv(v.strip()) for v in value.split(",") if v.strip())
            return conv(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r}", lineno) from exc

    kwargs = dict(
        family=get("family", str),
        deltas=get("deltas", float),
        sizes=get("sizes", int),
        dim=get("dim", int, 1),
        alpha_level=get("alpha", float, 0.05),
        replications=reps if reps is not None else get("reps", int, 2000),
        methods=get("methods", str, ("JEL-S",)),
        base_seed=seed if seed is not None else get("seed", int, 0),
        permutations=get("permutations", int, 199),
        reduction=get("reduction", str, "norm"),
        name=get("name", str, ""),
    )
    try:
        return Scenario(**kwargs)
    except ValidationError as exc:
        raise ConfigError(str(exc), first_line) from exc


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))


def with_overrides(s: Scenario, **kw) -> Scenario:
    return replace(s, **kw)
