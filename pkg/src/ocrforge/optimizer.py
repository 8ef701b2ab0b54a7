"""Greedy stage-wise hyperparameter search over a cost-ordered space.

Parameters are tuned one stage at a time, most expensive first: stage k tries
every value of parameter k with parameters 1..k-1 pinned at their chosen
optima and k+1..n at their defaults.  The search therefore spends at most
sum(len(values)) evaluations instead of the full cartesian product.

Evaluations are cached by a canonical config fingerprint (JSON with sorted
keys), which also makes interrupted runs resumable from their trial log.
"""

from __future__ import annotations

import itertools
import json
import time
from configparser import ConfigParser
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import ProtocolError, StageFailedError

__all__ = [
    "HyperParam",
    "HyperParamSpace",
    "TrialRecord",
    "GreedyResult",
    "fingerprint_config",
    "greedy_search",
    "grid_search",
    "builtin_search_space",
    "load_space",
    "save_space",
    "load_trial_log",
    "append_trial",
]

FAILED_SCORE = float("-inf")

Value = "int | float | str"
Config = dict


@dataclass(frozen=True)
class HyperParam:
    """One tunable parameter: its candidate values, default, and cost rank.

    cost_rank orders the greedy stages; larger rank means the parameter has a
    bigger impact on training cost and is tuned earlier.
    """

    name: str
    values: tuple
    default: "int | float | str"
    cost_rank: int

    def __post_init__(self) -> None:
        if not self.values:
            raise ValueError(f"parameter {self.name!r} has no values")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"parameter {self.name!r} has duplicate values")
        if self.default not in self.values:
            raise ValueError(f"default {self.default!r} of {self.name!r} not among its values")


@dataclass(frozen=True)
class HyperParamSpace:
    """Parameters held in strictly descending cost_rank order (stable for ties)."""

    params: tuple[HyperParam, ...]

    def __post_init__(self) -> None:
        if not self.params:
            raise ValueError("empty parameter space")
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names")
        ordered = tuple(sorted(self.params, key=lambda p: -p.cost_rank))
        object.__setattr__(self, "params", ordered)

    def default_config(self) -> Config:
        return {p.name: p.default for p in self.params}

    def grid_size(self) -> int:
        size = 1
        for p in self.params:
            size *= len(p.values)
        return size


@dataclass(frozen=True)
class TrialRecord:
    """One evaluated configuration; failed trials carry score -inf."""

    config: Config
    score: float
    duration: float
    stage: str

    def __post_init__(self) -> None:
        if self.score != FAILED_SCORE and not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")

    @property
    def failed(self) -> bool:
        return self.score == FAILED_SCORE


@dataclass(frozen=True)
class GreedyResult:
    best_config: Config
    best_score: float
    trials: tuple[TrialRecord, ...]


def fingerprint_config(config: Config) -> str:
    """Canonical serialization of a config: JSON, sorted keys, no whitespace.

    The external neural adapter computes the identical string, so caches and
    trial logs stay consistent across process boundaries.
    """
    return json.dumps(config, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _run_trial(
    evaluate: Callable[[Config], float],
    config: Config,
    stage: str,
    cache_map: dict | None,
    trials: list,
    on_trial: "Callable[[TrialRecord], None] | None",
) -> TrialRecord:
    fp = fingerprint_config(config)
    if cache_map is not None and fp in cache_map:
        return cache_map[fp]
    start = time.perf_counter()
    try:
        score = float(evaluate(config))
        if not 0.0 <= score <= 1.0:
            score = FAILED_SCORE
    except ProtocolError:
        raise
    except Exception:
        score = FAILED_SCORE
    record = TrialRecord(
        config=dict(config), score=score, duration=time.perf_counter() - start, stage=stage
    )
    trials.append(record)
    if cache_map is not None:
        cache_map[fp] = record
    if on_trial is not None:
        on_trial(record)
    return record


def greedy_search(
    space: HyperParamSpace,
    evaluate: Callable[[Config], float],
    cache: bool = True,
    seed_trials: Iterable[TrialRecord] = (),
    on_trial: "Callable[[TrialRecord], None] | None" = None,
) -> GreedyResult:
    """Stage-wise greedy maximization of evaluate over the space.

    Args:
        space: cost-ordered parameter space.
        evaluate: config -> score in [0, 1].  Exceptions mark the trial
            failed; ProtocolError aborts the whole search.
        cache: skip configs whose fingerprint was already evaluated.
        seed_trials: prior records (e.g. a resumed trial log) that prime the
            cache when caching is on.
        on_trial: callback invoked after each fresh evaluation.

    Returns:
        GreedyResult; trials holds fresh evaluations in (stage, value) order.

    Raises:
        StageFailedError: every value of some stage failed to evaluate.
    """
    cache_map: dict | None = None
    if cache:
        cache_map = {fingerprint_config(t.config): t for t in seed_trials}
    trials: list[TrialRecord] = []
    chosen: Config = {}
    defaults = space.default_config()
    final_record: TrialRecord | None = None
    for param in space.params:
        best_value = None
        best_record: TrialRecord | None = None
        for value in param.values:
            config = {
                p.name: chosen.get(p.name, defaults[p.name]) for p in space.params
            }
            config[param.name] = value
            record = _run_trial(evaluate, config, param.name, cache_map, trials, on_trial)
            if record.failed:
                continue
            if best_record is None or record.score > best_record.score:
                best_record = record
                best_value = value
        if best_record is None:
            raise StageFailedError(param.name)
        chosen[param.name] = best_value
        final_record = best_record
    best_config = {p.name: chosen[p.name] for p in space.params}
    assert final_record is not None
    return GreedyResult(
        best_config=best_config, best_score=final_record.score, trials=tuple(trials)
    )


def grid_search(
    space: HyperParamSpace,
    evaluate: Callable[[Config], float],
    cap: int = 4096,
) -> GreedyResult:
    """Exhaustive search; the oracle greedy results are judged against.

    Refuses to run when the cartesian product exceeds cap.  Ties resolve to
    the earliest config in value-declaration order.
    """
    size = space.grid_size()
    if size > cap:
        raise ValueError(f"grid of {size} configurations exceeds cap {cap}")
    trials: list[TrialRecord] = []
    best_record: TrialRecord | None = None
    names = [p.name for p in space.params]
    for combo in itertools.product(*(p.values for p in space.params)):
        config = dict(zip(names, combo))
        record = _run_trial(evaluate, config, "grid", None, trials, None)
        if record.failed:
            continue
        if best_record is None or record.score > best_record.score:
            best_record = record
    if best_record is None:
        raise StageFailedError("grid")
    return GreedyResult(
        best_config=dict(best_record.config), best_score=best_record.score, trials=tuple(trials)
    )


def builtin_search_space() -> HyperParamSpace:
    """The seven-parameter recurrent-network space with its cost ordering.

    Stage order: depth, then layer type with bidirectionality beside it, then
    dropout, units, batch size, and samples per epoch.  Defaults are the
    baseline configuration; the tuned optimum (lstm-like, depth 4,
    bidirectional, batch 256, 250k samples) lies inside the grid.
    """
    return HyperParamSpace(
        params=(
            HyperParam("depth", (2, 4), 2, cost_rank=7),
            HyperParam("layer_type", ("gru-like", "lstm-like"), "gru-like", cost_rank=6),
            HyperParam("bidirectional", ("no", "yes"), "no", cost_rank=6),
            HyperParam("dropout", (0.0, 0.2, 0.35, 0.5), 0.2, cost_rank=5),
            HyperParam("units", (200, 500, 1000), 500, cost_rank=4),
            HyperParam("batch_size", (32, 64, 100, 256, 512), 100, cost_rank=3),
            HyperParam("epoch_size", (5000, 20000, 100000, 250000), 20000, cost_rank=2),
        )
    )


# ---------------------------------------------------------------------------
# Space and trial-log files


def _coerce(text: str) -> "int | float | str":
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def load_space(path: "str | Path") -> HyperParamSpace:
    """Read a parameter space from an INI file: one section per parameter with
    keys values (comma list), default, and cost_rank."""
    parser = ConfigParser()
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise FileNotFoundError(path)
    params = []
    for section in parser.sections():
        values = tuple(_coerce(v) for v in parser.get(section, "values").split(","))
        default = _coerce(parser.get(section, "default"))
        cost_rank = parser.getint(section, "cost_rank")
        params.append(HyperParam(section, values, default, cost_rank))
    return HyperParamSpace(params=tuple(params))


def save_space(space: HyperParamSpace, path: "str | Path") -> None:
    parser = ConfigParser()
    for p in space.params:
        parser[p.name] = {
            "values": ", ".join(str(v) for v in p.values),
            "default": str(p.default),
            "cost_rank": str(p.cost_rank),
        }
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


def append_trial(record: TrialRecord, path: "str | Path") -> None:
    row = {
        "stage": record.stage,
        "config": record.config,
        "score": None if record.failed else record.score,
        "duration": record.duration,
    }
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(row, sort_keys=True) + "\n")


def load_trial_log(path: "str | Path") -> list[TrialRecord]:
    records: list[TrialRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            raw = raw.strip()
            if not raw:
                continue
            row = json.loads(raw)
            score = FAILED_SCORE if row["score"] is None else float(row["score"])
            records.append(
                TrialRecord(
                    config=row["config"],
                    score=score,
                    duration=float(row["duration"]),
                    stage=row["stage"],
                )
            )
    return records
