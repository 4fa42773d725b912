"""Scenario runner for type-I error and power studies.

A scenario fixes the covariance matrix under study, the tested structure and
a list of methods; rows of the output table give the empirical rejection
percentage per (distribution, N, delta, method). All methods and all mixing
weights delta of one run share the same error draws, so curves over delta
and differences between methods carry little Monte-Carlo noise.
"""

import csv
import io
import json
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np

from . import rng as _rng
from .distributions import normalize_dist, sample_errors
from .engine import make_spec, test_from_moments
from .exceptions import CovStructError, DomainError
from .hypotheses import CORRELATION
from .matrix import sqrt_psd
from .moments import compute_moments
from .structures import KIND_NAMES, AR_RHO, TOEPLITZ_BANDS, StructureKind, make_structure, mixture

ALL_DISTS = ["t9", "normal", "skew-normal", "gamma"]
SAMPLE_SIZES = [25, 50, 100, 250]
DELTAS = [round(0.1 * k, 1) for k in range(11)]

LABELS = {
    ("boot", "identity"): "ATS-Para",
    ("mc", "identity"): "ATS",
    ("boot-hstar", "h"): "ATS-Para-h*",
    ("boot-hdagger", "h"): "ATS-Para-h†",
    ("mc", "h"): "ATS-h",
    ("boot-hstar", "g"): "ATS-Para-g*",
    ("boot-hdagger", "g"): "ATS-Para-g†",
    ("mc", "g"): "ATS-g",
}
CSV_COLUMNS = ["method", "label", "dist", "N", "delta", "reject_pct", "stderr_pct", "n_sim", "excluded"]


def parse_method(entry):
    """``"boot-hstar:g"`` -> ("boot-hstar", "g"); the variant defaults to h."""
    method, _, variant = entry.partition(":")
    return method, variant or "h"


@dataclass
class Scenario:
    structure: str
    params: dict
    d: int
    N_list: List[int]
    dist: List[str]
    methods: List[str]
    n_sim: int = 1000
    n_boot: int = 1000
    n_mc: int = 10000
    alpha: float = 0.05
    seed: int = 0
    domain: Optional[str] = None
    # power designs: V_delta = (1 - delta) V_null + delta V_alt
    alternative: Optional[dict] = None
    deltas: Optional[List[float]] = None

    def __post_init__(self):
        if isinstance(self.dist, str):
            self.dist = [self.dist]
        self.dist = [normalize_dist(x) for x in self.dist]
        if self.n_sim < 1:
            raise DomainError("n_sim must be at least 1")
        if not self.methods:
            raise DomainError("methods must be non-empty")
        if self.structure not in KIND_NAMES:
            raise DomainError(f"unknown structure {self.structure!r}")
        for m in self.methods:
            parse_method(m)

    @classmethod
    def from_dict(cls, doc):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise DomainError(f"unknown scenario keys: {sorted(unknown)}")
        missing = {"structure", "params", "d", "N_list", "dist", "methods"} - set(doc)
        if missing:
            raise DomainError(f"scenario is missing keys: {sorted(missing)}")
        return cls(**doc)

    def to_dict(self):
        return asdict(self)

    def null_matrix(self):
        return make_structure(StructureKind(self.structure, self.params), self.d)

    def truth(self, delta):
        V0 = self.null_matrix()
        if self.alternative is None or delta is None:
            return V0
        alt = self.alternative
        V1 = make_structure(StructureKind(alt["structure"], alt.get("params", {})), self.d)
        return mixture(V0, V1, delta)


def _run_seed(seed, dist_index, N, run):
    ss = np.random.SeedSequence(entropy=int(seed) % 2**64, spawn_key=(_rng.DATA, dist_index, int(N), int(run)))
    return int(ss.generate_state(1, np.uint64)[0])


def _cell_task(task):
    """Simulate ``runs`` for one (dist, N) cell over all deltas and methods.

    Returns an int array (len(deltas), len(methods), 3): rejections, exclusions, degenerate.
    """
    sc, dist_index, N, runs = task
    dist = sc.dist[dist_index]
    deltas = sc.deltas if sc.deltas is not None else [None]
    roots = [sqrt_psd(sc.truth(dl)) for dl in deltas]
    specs = {}
    for m in sc.methods:
        method, variant = parse_method(m)
        specs[m] = (method, make_spec(sc.structure, sc.d, sc.domain, variant))
    need_corr = any(s.domain == CORRELATION for _, s in specs.values())
    out = np.zeros((len(deltas), len(sc.methods), 3), dtype=np.int64)
    for run in runs:
        run_seed = _run_seed(sc.seed, dist_index, N, run)
        E = sample_errors(dist, (N, sc.d), _rng.stream(run_seed, _rng.DATA))
        for i, S in enumerate(roots):
            try:
                mom = compute_moments(E @ S, correlation=need_corr)
            except CovStructError:
                out[i, :, 1] += 1
                continue
            for j, m in enumerate(sc.methods):
                method, spec = specs[m]
                reps = sc.n_mc if method == "mc" else sc.n_boot
                try:
                    res = test_from_moments(mom, spec, method, sc.alpha, reps, run_seed)
                except CovStructError:
                    out[i, j, 1] += 1
                    continue
                out[i, j, 0] += res.reject
                out[i, j, 2] += res.degenerate
    return out


def _chunks(n, k):
    size = -(-n // k)
    return [range(s, min(n, s + size)) for s in range(0, n, size)]


def run_scenario(sc, workers=1, chunks_per_cell=None):
    """Empirical rejection rates for every (dist, N, delta, method).

    Results are independent of ``workers`` because each run's randomness is
    derived from (seed, dist, N, run) alone.
    """
    workers = _rng.default_workers() if workers is None else workers
    k = chunks_per_cell or max(1, workers)
    tasks, keys = [], []
    for di in range(len(sc.dist)):
        for N in sc.N_list:
            for ch in _chunks(sc.n_sim, k):
                tasks.append((sc, di, int(N), ch))
                keys.append((di, int(N)))
    parts = _rng.parallel_map(_cell_task, tasks, workers=workers, processes=True)
    totals = {}
    for key, part in zip(keys, parts):
        totals[key] = totals.get(key, 0) + part

    rows = []
    deltas = sc.deltas if sc.deltas is not None else [None]
    for di, dist in enumerate(sc.dist):
        for N in sc.N_list:
            cnt = totals[(di, int(N))]
            for i, dl in enumerate(deltas):
                for j, m in enumerate(sc.methods):
                    method, variant = parse_method(m)
                    spec = make_spec(sc.structure, sc.d, sc.domain, variant)
                    rej, exc, deg = (int(v) for v in cnt[i, j])
                    n = sc.n_sim - exc
                    pct = 100.0 * rej / n if n else float("nan")
                    se = 100.0 * np.sqrt(rej / n * (1 - rej / n) / n) if n else float("nan")
                    rows.append(dict(method=m, label=LABELS.get((method, spec.transform), m), dist=dist,
                                     N=int(N), delta=dl, reject_pct=pct, stderr_pct=float(se),
                                     n_sim=sc.n_sim, excluded=exc, degenerate=deg))
    return rows


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in CSV_COLUMNS})
    return buf.getvalue()


def lookup(rows, **where):
    """Single row matching all given fields."""
    hits = [r for r in rows if all(r.get(k) == v for k, v in where.items())]
    if len(hits) != 1:
        raise KeyError(f"{len(hits)} rows match {where}")
    return hits[0]


# ---------------------------------------------------------------------------
# presets

_AR = dict(structure="ar", params={"rho": AR_RHO}, d=5)
_TOEP = dict(structure="toeplitz", params={"bands": list(TOEPLITZ_BANDS)}, d=5)
_ALT = {"structure": "toeplitz", "params": {"bands": list(TOEPLITZ_BANDS)}}
_H_METHODS = ["boot-hstar:h", "boot-hdagger:h", "mc:h"]
_G_METHODS = ["boot-hstar:g", "boot-hdagger:g", "mc:g"]
# The power study reuses N = 250; see README.
POWER_N = 250

PRESETS = {
    "table1": dict(_TOEP, N_list=SAMPLE_SIZES, dist=ALL_DISTS, methods=["boot", "mc"], n_sim=10000),
    "table2": dict(_AR, N_list=SAMPLE_SIZES, dist=ALL_DISTS,
                   methods=["boot-hstar:h", "mc:h", "boot-hstar:g", "mc:g"], n_sim=10000),
    "tableA1": dict(_AR, N_list=SAMPLE_SIZES, dist=ALL_DISTS, methods=_H_METHODS + _G_METHODS, n_sim=10000),
    "table3": dict(_AR, N_list=[POWER_N], dist=["normal"], methods=["boot-hstar:h", "mc:h"],
                   n_sim=1000, alternative=_ALT, deltas=DELTAS),
    "tableA2": dict(_AR, N_list=[POWER_N], dist=["normal"], methods=_H_METHODS + _G_METHODS,
                    n_sim=1000, alternative=_ALT, deltas=DELTAS),
    "tableA3": dict(_AR, N_list=[POWER_N], dist=["t9"], methods=_H_METHODS + _G_METHODS,
                    n_sim=1000, alternative=_ALT, deltas=DELTAS),
}


def preset(name, **overrides):
    if name not in PRESETS:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    doc = json.loads(json.dumps(PRESETS[name]))
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return Scenario.from_dict(doc)
