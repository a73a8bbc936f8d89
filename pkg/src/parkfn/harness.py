"""Seeded Monte Carlo sampling of the induced parking-function measure and
goodness-of-fit against exact and limiting laws.

Samples are drawn in fixed-size chunks, chunk ``i`` using stream ``i`` of the
run seed, and the chunks are concatenated in order.  Results therefore do not
depend on how many worker threads process the chunks.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import os
import re
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import stats

from .exact import nk_bernoulli_params, nk_pmf, pi1_law
from .limits import ContinuousLaw, continuous_law, lambda_c, law_Ysum, law_Zsum
from .mallows import QSchedule, sample_mallows, sample_trunc_geom_array
from .parking import ParkingFunction, from_pair
from .pmf import DiscretePMF, poisson_pmf, tv_distance
from .rng import RandomStream, random_stream, thread_count

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

Statistic = Literal["pi1", "nk"]
KRule = Literal["fixed", "alpha", "dn", "top", "log"]
Scaling = Literal["none", "n", "n_alpha", "log_n"]

CSV_COLUMNS = ("experiment", "n", "q_resolved", "k_resolved", "N", "ks", "chi2", "dof",
               "tv", "emp_mean", "ref_mean", "seed")
CHI2_MIN_EXPECTED = 5.0
# rough cap on the number of random variates held per chunk
CHUNK_BUDGET = 4_000_000
MAX_CHUNK = 1 << 16

DISCRETE_REFS = ("exact", "poisson", "poisson_lambda_c", "poisson_L", "geometric", "zsum", "ysum")
CONTINUOUS_REFS = ("q1", "Fc", "exponential", "uniform")
MEAN_REFS = ("constant",)


# ---------------------------------------------------------------- samplers

def sample_pf(n: int, q: float, rng: RandomStream) -> ParkingFunction:
    """One draw: a Mallows permutation and an independent uniform permutation
    pushed through ``from_pair``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    sigma = sample_mallows(n, q, rng)
    tau = rng.permutation(n) + 1
    return from_pair(sigma, tau.tolist())


def sample_pf_batch(n: int, q: float, rng: RandomStream, size: int) -> np.ndarray:
    """``size`` draws as rows of an array.

    Decoding a code to ``sigma`` and re-encoding it is the identity, so the rows
    are ``code[tau_i]`` with the code drawn directly.
    """
    if n < 1 or size < 1:
        raise ValueError("need n >= 1 and size >= 1")
    codes = sample_trunc_geom_array(np.arange(1, n + 1), q, rng, size=(size, n))
    taus = rng.permuted(np.tile(np.arange(n), (size, 1)), axis=1)
    return np.take_along_axis(codes, taus, axis=1)


def sample_pi1(n: int, q: float, rng: RandomStream, size: int) -> np.ndarray:
    """``pi_1`` only: the code entry at a uniform position ``tau_1``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    tau1 = rng.integers(1, n + 1, size=size)
    return sample_trunc_geom_array(tau1, q, rng)


def sample_nk_code(n: int, q: float, k: int, rng: RandomStream, size: int) -> np.ndarray:
    """``N_k`` by drawing code entries ``j = k..n`` and counting those equal to ``k``."""
    _check_k(n, k)
    js = np.arange(k, n + 1)
    rows = max(1, min(size, CHUNK_BUDGET // len(js)))
    out = np.empty(size, dtype=np.int64)
    for start in range(0, size, rows):
        m = min(rows, size - start)
        codes = sample_trunc_geom_array(js, q, rng, size=(m, len(js)))
        out[start:start + m] = (codes == k).sum(axis=1)
    return out


@dataclass(frozen=True)
class _Superposition:
    forced: int
    cum: np.ndarray
    total: float


def _superposition(n: int, q: float, k: int) -> _Superposition:
    ps = np.asarray(nk_bernoulli_params(n, q, k), dtype=float)
    sure = ps >= 1.0
    with np.errstate(divide="ignore"):
        lam = -np.log1p(-np.where(sure, 0.0, ps))
    cum = np.cumsum(lam)
    return _Superposition(int(sure.sum()), cum, float(cum[-1]) if len(cum) else 0.0)


def sample_nk(n: int, q: float, k: int, rng: RandomStream, size: int,
              _sup: _Superposition | None = None) -> np.ndarray:
    """``N_k`` as a sum of independent Bernoulli(p_j) without touching each ``j``.

    ``1{Poisson(-log(1-p)) >= 1}`` is Bernoulli(p), and independent Poissons
    are one Poisson total scattered over ``j`` in proportion to the rates; so
    ``N_k`` is the number of distinct ``j`` hit.  Same law as
    :func:`sample_nk_code`, at a cost proportional to the number of hits.
    """
    _check_k(n, k)
    sup = _sup if _sup is not None else _superposition(n, q, k)
    counts = rng.poisson(sup.total, size=size) if sup.total > 0 else np.zeros(size, dtype=np.int64)
    total = int(counts.sum())
    out = np.full(size, sup.forced, dtype=np.int64)
    if total == 0:
        return out
    owner = np.repeat(np.arange(size, dtype=np.int64), counts)
    slot = np.searchsorted(sup.cum, rng.random(total) * sup.total, side="right")
    slot = np.minimum(slot, len(sup.cum) - 1)
    hits = np.unique(owner * len(sup.cum) + slot) // len(sup.cum)
    out += np.bincount(hits, minlength=size)
    return out


def _check_k(n: int, k: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")


# ---------------------------------------------------------------- comparisons

def empirical_pmf(samples: Iterable[int]) -> DiscretePMF:
    arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples)
    if arr.size == 0:
        raise ValueError("empirical_pmf needs at least one sample")
    vals, counts = np.unique(arr.astype(np.int64), return_counts=True)
    return DiscretePMF.from_arrays(vals, counts / counts.sum())


def ks_distance(samples, cdf: ContinuousLaw | Callable[[float], float]) -> float:
    """Sup distance between the empirical CDF and a continuous reference CDF."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("ks_distance needs at least one sample")
    vals, counts = np.unique(x, return_counts=True)
    right = np.cumsum(counts) / x.size
    left = right - counts / x.size
    if isinstance(cdf, ContinuousLaw):
        F = cdf.cdf_array(vals)
    else:
        F = np.array([cdf(float(v)) for v in vals])
    return float(min(1.0, max(np.max(right - F), np.max(F - left), 0.0)))


def ks_discrete(samples, ref: DiscretePMF) -> float:
    """Sup distance between two CDFs on the integers."""
    x = np.asarray(samples, dtype=np.int64)
    if x.size == 0:
        raise ValueError("ks_discrete needs at least one sample")
    sup = np.asarray(ref.support, dtype=np.int64)
    pts = np.union1d(np.unique(x), sup)
    emp = np.searchsorted(np.sort(x), pts, side="right") / x.size
    ref_cdf = np.cumsum(np.asarray(ref.probs, dtype=float))
    idx = np.searchsorted(sup, pts, side="right") - 1
    F = np.where(idx >= 0, ref_cdf[np.maximum(idx, 0)], 0.0)
    return float(min(1.0, np.max(np.abs(emp - F))))


@dataclass(frozen=True)
class Chi2Result:
    statistic: float
    dof: int
    pvalue: float


def chi_square(samples, ref: DiscretePMF, min_expected: float = CHI2_MIN_EXPECTED) -> Chi2Result:
    """Pearson test with bins of expected count below ``min_expected`` merged
    rightward.  Values below the support join the first bin, values above it
    (and any truncated mass) the last."""
    x = np.asarray(samples, dtype=np.int64)
    N = x.size
    if N == 0:
        raise ValueError("chi_square needs at least one sample")
    sup = np.asarray(ref.support, dtype=np.int64)
    probs = np.asarray(ref.probs, dtype=float).copy()
    probs[-1] += max(float(ref.deficit), 0.0)
    idx = np.minimum(np.searchsorted(sup, x, side="left"), len(sup) - 1)
    observed = np.bincount(idx, minlength=len(sup)).astype(float)
    expected = probs * N
    groups: list[tuple[float, float]] = []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            groups.append((acc_o, acc_e))
            acc_o = acc_e = 0.0
    if acc_e > 0 or acc_o > 0:
        if groups:
            o, e = groups.pop()
            groups.append((o + acc_o, e + acc_e))
        else:
            groups.append((acc_o, acc_e))
    if len(groups) < 2:
        return Chi2Result(0.0, 0, 1.0)
    o = np.array([g[0] for g in groups])
    e = np.array([g[1] for g in groups])
    chi2 = float(np.sum((o - e) ** 2 / e))
    dof = len(groups) - 1
    return Chi2Result(chi2, dof, float(stats.chi2.sf(chi2, dof)))


# ---------------------------------------------------------------- experiments

@dataclass(frozen=True)
class ExperimentConfig:
    """One Monte Carlo comparison.

    ``k_rule`` resolves ``k`` from ``n``: ``fixed`` uses ``k``; ``alpha`` is
    ``floor(n^k_param)``; ``dn`` is ``floor(k_param * n)``; ``top`` is
    ``n - k``; ``log`` is ``k_param * log2(n)`` rounded by ``k_round``.
    """

    name: str
    n: int
    schedule: QSchedule
    statistic: Statistic = "pi1"
    k_rule: KRule = "fixed"
    k: int = 1
    k_param: float = 1.0
    k_round: Literal["floor", "ceil"] = "floor"
    samples: int = 10_000
    seed: int = 0
    reference: str = "exact"
    ref_params: dict = field(default_factory=dict)
    scaling: Scaling = "none"
    scaling_alpha: float = 1.0
    method: Literal["fast", "full"] = "fast"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.samples < 1:
            raise ValueError(f"sample count must be >= 1, got {self.samples}")
        if self.statistic not in ("pi1", "nk"):
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if self.k_rule not in ("fixed", "alpha", "dn", "top", "log"):
            raise ValueError(f"unknown k-rule {self.k_rule!r}")
        if self.scaling not in ("none", "n", "n_alpha", "log_n"):
            raise ValueError(f"unknown scaling {self.scaling!r}")
        if self.method not in ("fast", "full"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.reference in DISCRETE_REFS:
            if self.scaling != "none":
                raise ValueError(f"discrete reference {self.reference!r} needs scaling 'none'")
        elif self.reference in CONTINUOUS_REFS:
            if self.scaling == "none":
                raise ValueError(f"continuous reference {self.reference!r} needs a scaling")
        elif self.reference not in MEAN_REFS:
            raise ValueError(f"unknown reference law {self.reference!r}")
        if self.statistic == "nk":
            self.resolve_k()

    @property
    def q(self) -> float:
        return self.schedule(self.n)

    def resolve_k(self) -> int:
        n = self.n
        if self.k_rule == "fixed":
            k = self.k
        elif self.k_rule == "alpha":
            k = math.floor(n**self.k_param)
        elif self.k_rule == "dn":
            k = math.floor(self.k_param * n)
        elif self.k_rule == "top":
            k = n - self.k
        else:
            x = self.k_param * math.log2(n)
            k = math.floor(x) if self.k_round == "floor" else math.ceil(x)
        if not 1 <= k <= n:
            raise ValueError(f"k-rule {self.k_rule} gives k={k} outside 1..{n}")
        return int(k)

    def scale(self) -> float:
        return {"none": 1.0, "n": float(self.n), "n_alpha": float(self.n) ** self.scaling_alpha,
                "log_n": math.log(self.n)}[self.scaling]

    def describe(self) -> dict:
        d = dataclasses.asdict(self)
        d["schedule"] = str(self.schedule)
        return d


@dataclass(frozen=True)
class GofReport:
    """One report row.  Distances that do not apply to the reference kind are NaN."""

    experiment: str
    statistic: str
    n: int
    q_resolved: float
    k_resolved: int | None
    N: int
    ks: float
    chi2: float
    dof: int
    chi2_pvalue: float
    tv: float
    emp_mean: float
    emp_var: float
    ref_mean: float
    seed: int

    def row(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}


def _chunk_size(cfg: ExperimentConfig, per_sample: float) -> int:
    return int(max(1, min(MAX_CHUNK, CHUNK_BUDGET // max(1.0, per_sample))))


def sample_statistic(cfg: ExperimentConfig) -> np.ndarray:
    """Raw (unscaled) statistic values, ``cfg.samples`` of them."""
    n, q = cfg.n, cfg.q
    k = cfg.resolve_k() if cfg.statistic == "nk" else None
    sup = None
    if cfg.method == "full":
        per = float(n)
    elif cfg.statistic == "pi1":
        per = 2.0
    else:
        sup = _superposition(n, q, k)
        per = 2.0 + 2.0 * sup.total

    def draw(rng: RandomStream, m: int) -> np.ndarray:
        if cfg.method == "full":
            rows = sample_pf_batch(n, q, rng, m)
            return rows[:, 0] if cfg.statistic == "pi1" else (rows == k).sum(axis=1)
        if cfg.statistic == "pi1":
            return sample_pi1(n, q, rng, m)
        return sample_nk(n, q, k, rng, m, sup)

    return chunked(draw, cfg.samples, cfg.seed, _chunk_size(cfg, per))


def chunked(draw: Callable[[RandomStream, int], np.ndarray], total: int, seed: int,
            chunk: int, threads: int | None = None) -> np.ndarray:
    """Run ``draw(stream_i, size_i)`` over chunks and concatenate in chunk order."""
    sizes = [min(chunk, total - s) for s in range(0, total, chunk)]
    jobs = list(enumerate(sizes))
    workers = min(threads or thread_count(), len(jobs))
    if workers <= 1:
        parts = [draw(random_stream(seed, i), m) for i, m in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: draw(random_stream(seed, job[0]), job[1]), jobs))
    return np.concatenate(parts)


def reference_law(cfg: ExperimentConfig) -> DiscretePMF | ContinuousLaw | float:
    p = cfg.ref_params
    n, q = cfg.n, cfg.q
    ref = cfg.reference
    if ref == "exact":
        if cfg.statistic == "pi1":
            return pi1_law(n, q)
        return nk_pmf(n, q, cfg.resolve_k()).to_float()
    if ref == "poisson":
        return poisson_pmf(float(p["lam"]))
    if ref == "poisson_lambda_c":
        return poisson_pmf(lambda_c(float(p["c"]), float(p["d"])))
    if ref == "poisson_L":
        # Poisson((1 - q) L / q) with L = n q^k
        k = cfg.resolve_k()
        L = n * q**k
        return poisson_pmf((1 - q) * L / q)
    if ref == "geometric":
        from scipy.stats import geom
        qq = float(p.get("q", q))
        hi = int(geom.isf(1e-15, 1 - qq)) + 1
        ks = np.arange(1, hi + 1)
        return DiscretePMF.from_arrays(ks, geom.pmf(ks, 1 - qq), deficit=float(geom.sf(hi, 1 - qq)))
    if ref == "zsum":
        pmf, tb = law_Zsum(float(p.get("q", q)), int(p.get("k", cfg.resolve_k())))
        return pmf
    if ref == "ysum":
        pmf, tb = law_Ysum(float(p.get("q", q)), p.get("kmax", math.inf))
        return pmf
    if ref == "constant":
        return float(p["value"])
    return continuous_law(ref, **p)


def run_experiment(cfg: ExperimentConfig, values: np.ndarray | None = None) -> GofReport:
    """Sample (unless ``values`` are supplied), scale, and compare to the reference."""
    raw = sample_statistic(cfg) if values is None else np.asarray(values)
    ref = reference_law(cfg)
    scaled = raw / cfg.scale()
    emp_mean = float(np.mean(scaled))
    emp_var = float(np.var(scaled))
    nan = math.nan
    ks = chi2 = tv = pval = nan
    dof = 0
    if isinstance(ref, DiscretePMF):
        ks = ks_discrete(raw, ref)
        res = chi_square(raw, ref)
        chi2, dof, pval = res.statistic, res.dof, res.pvalue
        tv = min(1.0, tv_distance(empirical_pmf(raw), ref))
        ref_mean = float(ref.mean())
    elif isinstance(ref, ContinuousLaw):
        ks = ks_distance(scaled, ref)
        ref_mean = _continuous_mean(ref)
    else:
        ref_mean = float(ref)
    return GofReport(
        experiment=cfg.name, statistic=cfg.statistic, n=cfg.n, q_resolved=cfg.q,
        k_resolved=cfg.resolve_k() if cfg.statistic == "nk" else None, N=int(raw.size),
        ks=ks, chi2=chi2, dof=dof, chi2_pvalue=pval, tv=tv, emp_mean=emp_mean,
        emp_var=emp_var, ref_mean=ref_mean, seed=cfg.seed,
    )


def _continuous_mean(law: ContinuousLaw) -> float:
    from scipy.integrate import quad

    # E X = int_0^upper (1 - F(x)) dx for X >= 0
    val, _ = quad(lambda x: 1.0 - law.cdf(x), 0.0, law.upper, limit=200)
    return float(val)


# ---------------------------------------------------------------- report I/O

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def reports_to_csv(reports: Sequence[GofReport], header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow([_fmt(v) for v in r.row().values()])
    return buf.getvalue()


def append_reports(path: str | os.PathLike, reports: Sequence[GofReport]) -> None:
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(reports_to_csv(reports, header=new))


# ---------------------------------------------------------------- config files

class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


_CFG_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)} - {"schedule"} | {"q"}


def load_config(text: str) -> list[ExperimentConfig]:
    """Parse ``[[experiment]]`` tables; errors carry the line of the offending table."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(str(exc), int(m.group(1)) if m else None) from exc
    header_lines = [i + 1 for i, ln in enumerate(text.splitlines())
                    if ln.strip().startswith("[[experiment]]")]
    entries = doc.get("experiment")
    if not isinstance(entries, list) or not entries:
        raise ConfigError("no [[experiment]] tables found", 1)
    defaults = doc.get("defaults", {})
    out = []
    for i, raw in enumerate(entries):
        line = header_lines[i] if i < len(header_lines) else None
        entry = {**defaults, **raw}
        unknown = set(entry) - _CFG_KEYS
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", line)
        try:
            q = entry.pop("q")
            sched = QSchedule.parse(q if str(q).startswith("q=") else f"q={q}")
            out.append(ExperimentConfig(schedule=sched, **entry))
        except KeyError as exc:
            raise ConfigError(f"missing key {exc}", line) from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), line) from None
    return out


def load_config_file(path: str | os.PathLike) -> list[ExperimentConfig]:
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read())


def default_config_path() -> str:
    return os.path.join(os.path.dirname(__file__), "data", "acceptance.toml")


__all__ = [
    "sample_pf", "sample_pf_batch", "sample_pi1", "sample_nk", "sample_nk_code",
    "empirical_pmf", "ks_distance", "ks_discrete", "chi_square", "Chi2Result", "tv_distance",
    "ExperimentConfig", "GofReport", "sample_statistic", "run_experiment", "reference_law",
    "chunked", "reports_to_csv", "append_reports", "load_config", "load_config_file",
    "ConfigError", "default_config_path", "CSV_COLUMNS",
]
