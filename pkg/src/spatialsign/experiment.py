"""Monte Carlo rejection-frequency experiments.

Replication ``r`` of a cell draws its samples from the streams documented in
:mod:`spatialsign.simgen` and its bootstrap from
``SeedSequence(seed, spawn_key=(r, delta_index, mode_index, M))``, so any
replication can be rerun alone and the worker count never changes a table.
Each finished replication is appended to ``replications.jsonl`` in the output
directory; a rerun with the same configuration skips what is already there.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import norm as _normal

from .errors import InvalidArgument
from .simgen import SimDesign, gen_samples
from .twosample import MODES, _mode, prepare_pair, run_test

log = logging.getLogger(__name__)

TABLE_COLUMNS = (
    "model", "delta", "M", "mode", "contaminated",
    "rejection_freq", "replications", "N_b", "seed",
)
EXPLAINED_COLUMNS = (
    "model", "delta", "M", "mode", "contaminated",
    "explained_fraction", "replications", "seed",
)
GAUSS_M = "G"


def size_band(N: int, alpha: float = 0.05, gamma: float = 0.01) -> tuple[float, float]:
    """``alpha -/+ z_{gamma/2} sqrt(alpha (1 - alpha) / N)``."""
    half = _normal.ppf(1 - gamma / 2) * np.sqrt(alpha * (1 - alpha) / N)
    return float(alpha - half), float(alpha + half)


def classify_size(pi_n: float, N: int, alpha: float = 0.05, gamma: float = 0.01) -> str:
    """'conservative', 'accurate' or 'liberal' relative to the binomial band around ``alpha``."""
    lo, hi = size_band(N, alpha, gamma)
    if pi_n < lo:
        return "conservative"
    if pi_n > hi:
        return "liberal"
    return "accurate"


@dataclass
class ExperimentConfig:
    """Settings for one simulation run.

    ``deltas`` defaults to ``[design.delta]``.  ``fixture='identical'`` replaces
    the second sample by a copy of the first (a harness self-check).
    """

    design: SimDesign = field(default_factory=SimDesign)
    M_list: list = field(default_factory=lambda: [3, 10, 20, 30])
    alpha: float = 0.05
    replications: int = 1000
    N_b: int = 5000
    modes: list = field(default_factory=lambda: ["sign", "classical"])
    output_dir: str | None = None
    deltas: list | None = None
    fixture: str | None = None

    def __post_init__(self):
        if isinstance(self.design, dict):
            self.design = SimDesign(**self.design)
        if not 0 < self.alpha < 1:
            raise InvalidArgument("alpha must lie in (0, 1)")
        if self.replications < 1:
            raise InvalidArgument("replications must be at least 1")
        if self.N_b < 1:
            raise InvalidArgument("N_b must be at least 1")
        self.modes = [_mode(m) for m in self.modes]
        if not self.M_list or any(int(M) != M or not 1 <= M <= self.design.m for M in self.M_list):
            raise InvalidArgument(f"every M must lie in [1, {self.design.m}]")
        self.M_list = [int(M) for M in self.M_list]
        if self.deltas is None:
            self.deltas = [self.design.delta]
        if any(d < 0 for d in self.deltas):
            raise InvalidArgument("deltas must be non-negative")
        if self.fixture not in (None, "identical"):
            raise InvalidArgument(f"unknown fixture {self.fixture!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["design"] = asdict(self.design)
        return d

    def fingerprint(self) -> str:
        d = self.to_dict()
        d.pop("output_dir")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def load_config(path) -> ExperimentConfig:
    """Read an :class:`ExperimentConfig` from a JSON or TOML file."""
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            raw = tomllib.loads(text)
        else:
            raw = json.loads(text)
    except ValueError as exc:
        raise InvalidArgument(f"cannot parse {path}: {exc}") from exc
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise InvalidArgument(f"bad configuration in {path}: {exc}") from exc


def _cells(config: ExperimentConfig):
    for mode in config.modes:
        if mode == "classical_gauss":
            yield mode, GAUSS_M
        else:
            for M in config.M_list:
                yield mode, M


def _bootstrap_seed(seed: int, rep: int, di: int, mode: str, M) -> np.ndarray:
    key = (rep, di, MODES.index(mode), 0 if M == GAUSS_M else M)
    return np.random.SeedSequence(seed, spawn_key=key).generate_state(4)


def run_replication(config: ExperimentConfig, rep: int, di: int) -> dict:
    """Run every (mode, M) cell of replication ``rep`` at ``config.deltas[di]``."""
    design = config.design.with_(delta=config.deltas[di])
    x1, x2 = gen_samples(design, rep)
    if config.fixture == "identical":
        x2 = x1
    pvalues, explained = {}, {}
    prepared = {}
    for mode, M in _cells(config):
        if mode not in prepared:
            prepared[mode] = prepare_pair(x1, x2, mode)
        res = run_test(
            x1, x2,
            M=None if M == GAUSS_M else M,
            N_b=config.N_b,
            mode=mode,
            seed=_bootstrap_seed(design.seed, rep, di, mode, M),
            prepared=prepared[mode],
        )
        pvalues[f"{mode}|{M}"] = res.p_value
        if M != GAUSS_M:
            explained[f"{mode}|{M}"] = res.explained_fraction
    return {"rep": rep, "delta_index": di, "pvalues": pvalues, "explained": explained}


def _run_job(args):
    return run_replication(*args)


@dataclass
class RejectionTable:
    rows: list
    explained_rows: list

    def to_csv(self, path) -> Path:
        return _write_rows(path, TABLE_COLUMNS, self.rows)

    def explained_to_csv(self, path) -> Path:
        return _write_rows(path, EXPLAINED_COLUMNS, self.explained_rows)

    def long_to_csv(self, path, alpha: float, gamma: float = 0.01) -> Path:
        rows = []
        for row in self.rows:
            lo, hi = size_band(row["replications"], alpha, gamma)
            rows.append({
                **row,
                "band_lower": lo,
                "band_upper": hi,
                "size_class": classify_size(row["rejection_freq"], row["replications"], alpha, gamma),
            })
        return _write_rows(path, TABLE_COLUMNS + ("band_lower", "band_upper", "size_class"), rows)

    def frequency(self, mode: str, M, delta: float | None = None) -> float:
        for row in self.rows:
            if row["mode"] == mode and row["M"] == M and (delta is None or row["delta"] == delta):
                return row["rejection_freq"]
        raise KeyError((mode, M, delta))


def _write_rows(path, columns, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    return path


def _load_checkpoint(out: Path, config: ExperimentConfig) -> dict:
    meta = out / "config.json"
    records_path = out / "replications.jsonl"
    fp = config.fingerprint()
    if meta.exists():
        old = json.loads(meta.read_text()).get("fingerprint")
        if old != fp:
            raise InvalidArgument(
                f"{out} holds results of a different configuration; use a fresh output directory"
            )
    else:
        meta.write_text(json.dumps({"fingerprint": fp, "config": config.to_dict()}, indent=2))
    done = {}
    if records_path.exists():
        for line in records_path.read_text().splitlines():
            if line.strip():
                rec = json.loads(line)
                done[(rec["rep"], rec["delta_index"])] = rec
    return done


def run_experiment(config: ExperimentConfig, threads: int = 1) -> RejectionTable:
    """Rejection frequencies ``#{p < alpha} / replications`` for every cell.

    With ``config.output_dir`` set, per-replication results are checkpointed
    and the tables written as ``rejection_table.csv``,
    ``explained_variance.csv`` and ``rejection_long.csv``.
    """
    out = Path(config.output_dir) if config.output_dir else None
    done = {}
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        done = _load_checkpoint(out, config)

    jobs = [
        (rep, di)
        for di in range(len(config.deltas))
        for rep in range(config.replications)
        if (rep, di) not in done
    ]
    if done:
        log.info("resuming: %d of %d replications already done", len(done), len(done) + len(jobs))

    records = dict(done)
    sink = (out / "replications.jsonl").open("a") if out is not None else None
    try:
        if threads > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                results = pool.map(_run_job, [(config, rep, di) for rep, di in jobs], chunksize=4)
                for rec in results:
                    _store(records, rec, sink)
        else:
            for rep, di in jobs:
                _store(records, run_replication(config, rep, di), sink)
    finally:
        if sink is not None:
            sink.close()

    table = _tabulate(config, records)
    if out is not None:
        table.to_csv(out / "rejection_table.csv")
        table.explained_to_csv(out / "explained_variance.csv")
        table.long_to_csv(out / "rejection_long.csv", config.alpha)
    return table


def _store(records: dict, rec: dict, sink) -> None:
    records[(rec["rep"], rec["delta_index"])] = rec
    if sink is not None:
        sink.write(json.dumps(rec) + "\n")
        sink.flush()


def _tabulate(config: ExperimentConfig, records: dict) -> RejectionTable:
    design = config.design
    rows, explained_rows = [], []
    for di, delta in enumerate(config.deltas):
        recs = [records[(rep, di)] for rep in range(config.replications)]
        for mode, M in _cells(config):
            key = f"{mode}|{M}"
            pvals = np.array([r["pvalues"][key] for r in recs])
            common = {
                "model": design.model,
                "delta": delta,
                "M": M,
                "mode": mode,
                "contaminated": design.contaminated,
                "replications": config.replications,
                "seed": design.seed,
            }
            rows.append({
                **common,
                "rejection_freq": float(np.mean(pvals < config.alpha)),
                "N_b": config.N_b,
            })
            if M != GAUSS_M:
                explained_rows.append({
                    **common,
                    "explained_fraction": float(np.mean([r["explained"][key] for r in recs])),
                })
    return RejectionTable(rows, explained_rows)
