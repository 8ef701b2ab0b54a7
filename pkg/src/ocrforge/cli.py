"""Command line front end.

Subcommands: profile, inject, evaluate, train, correct, optimize.  Exit codes:
0 success, 2 usage or input-data errors, 3 external-evaluator protocol
failures, 1 anything else.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import shlex
import subprocess
import sys
import tempfile
from pathlib import Path

from . import __version__
from .corpus import (
    Corpus,
    build_char_frequency_table,
    iter_plain_lines,
    load_parallel_corpus,
    load_parallel_tsv,
    load_plain_corpus,
    normalize_line,
    write_parallel_tsv,
)
from .corrector import (
    TUNABLE_DOMAINS,
    CorrectorHyper,
    load_model,
    save_model,
    train_noisy_channel,
)
from .errors import CorpusError, ProtocolError, StageFailedError
from .metrics import evaluate_corrector, format_report_table, write_report_tsv
from .noise import (
    InjectionCounters,
    NoiseConfig,
    error_histogram,
    extract_confusions,
    inject_line,
    line_rng,
    load_profile,
    save_histogram,
    save_profile,
)
from .optimizer import (
    HyperParam,
    HyperParamSpace,
    append_trial,
    fingerprint_config,
    greedy_search,
    load_space,
    load_trial_log,
    builtin_search_space,
)


def _add_seed(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=42, help="RNG seed (default 42)")


def _load_pairs(args: argparse.Namespace, what: str) -> Corpus:
    if args.tsv:
        return load_parallel_tsv(args.tsv, name=what)
    if not (args.noisy and args.gold):
        raise CorpusError(f"{what}: pass either --tsv or both --noisy and --gold")
    return load_parallel_corpus(args.noisy, args.gold, name=what)


# ---------------------------------------------------------------------------
# profile


def cmd_profile(args: argparse.Namespace) -> int:
    corpus = _load_pairs(args, "profile-input")
    profile = extract_confusions(corpus, source_label=args.label)
    if not profile.entries:
        print("no substitution errors found", file=sys.stderr)
    save_profile(profile, args.out)
    if args.histogram_out:
        save_histogram(error_histogram(corpus), args.histogram_out)
    top = profile.entries[: args.top]
    if top:
        print(f"{'rank':>4}  {'error':<5} {'fix':<5} {'share':>7}")
        for rank, entry in enumerate(top, start=1):
            print(
                f"{rank:>4}  {entry.error_char:<5} {entry.correct_char:<5}"
                f" {entry.probability * 100:>6.2f}%"
            )
    print(f"profile with {len(profile.entries)} confusions written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# inject


def _inject_chunk(payload) -> tuple:
    config, indexed = payload
    counters = InjectionCounters()
    out = []
    for index, line in indexed:
        out.append(inject_line(line, config, line_rng(config.seed, index), counters))
    return out, counters


def cmd_inject(args: argparse.Namespace) -> int:
    lines = [normalize_line(ln) for ln in iter_plain_lines(args.input)]
    if not lines:
        raise CorpusError("no input lines to inject")
    freq_source = lines
    if args.freq:
        freq_source = list(iter_plain_lines(args.freq))
    table = build_char_frequency_table(freq_source)
    profile = load_profile(args.profile) if args.profile else None
    config = NoiseConfig(
        noise_ratio=args.noise_ratio,
        char_freq=table,
        profile=profile,
        seed=args.seed,
        max_swaps=args.max_swaps,
    )
    indexed = list(enumerate(lines))
    if args.jobs > 1:
        import multiprocessing as mp

        step = max(1, (len(indexed) + args.jobs - 1) // args.jobs)
        chunks = [
            (config, indexed[i : i + step]) for i in range(0, len(indexed), step)
        ]
        with mp.Pool(args.jobs) as pool:
            parts = pool.map(_inject_chunk, chunks)
        noisy: list[str] = []
        counters = InjectionCounters()
        for part_lines, part_counters in parts:
            noisy.extend(part_lines)
            counters.merge(part_counters)
    else:
        noisy, counters = _inject_chunk((config, indexed))
    corpus = Corpus.from_lines(noisy, lines, name="injected")
    write_parallel_tsv(corpus, args.out)
    print(f"lines: {counters.lines}")
    print(f"deletions: {counters.deletions} ({counters.deletion_rate:.5f}/line)")
    print(f"insertions: {counters.insertions} ({counters.insertion_rate:.5f}/line)")
    print(f"swap events: {counters.swap_events} ({counters.swap_rate:.5f}/line)")
    if profile is not None:
        print("profile confusions (eligible lines, fired, realized rate):")
        for entry in profile.entries:
            key = (entry.error_char, entry.correct_char)
            print(
                f"  {entry.correct_char}->{entry.error_char}:"
                f" eligible {counters.eligible[key]},"
                f" fired {counters.fired[key]}"
                f" ({counters.fired_rate(key):.5f})"
            )
    print(f"noisy/gold pairs written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# evaluate


def cmd_evaluate(args: argparse.Namespace) -> int:
    gold = load_plain_corpus(args.gold)
    ocr = load_plain_corpus(args.ocr)
    fixed = load_plain_corpus(args.fixed)
    result = evaluate_corrector(gold, ocr, fixed, delimiters=frozenset(args.delimiters))
    print(format_report_table(result))
    if args.out:
        write_report_tsv(result, args.out, timestamp=not args.no_timestamp)
        print(f"report written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# train


def _hyper_from_args(args: argparse.Namespace) -> CorrectorHyper:
    return CorrectorHyper(
        ngram_order=args.ngram_order,
        channel_weight=args.channel_weight,
        beam_width=args.beam_width,
        max_edits_per_word=args.max_edits,
        smoothing_k=args.smoothing_k,
    )


def cmd_train(args: argparse.Namespace) -> int:
    train = load_parallel_tsv(args.train, name="train")
    model = train_noisy_channel(train, _hyper_from_args(args))
    save_model(model, args.model_dir)
    print(
        f"model: {len(model.vocabulary)} vocabulary words,"
        f" {len(model.ngram_counts)} n-gram contexts,"
        f" {len(model.channel.entries)} channel confusions"
    )
    if args.valid:
        valid = load_parallel_tsv(args.valid, name="valid")
        print(f"validation accuracy: {model.validation_accuracy(valid):.4f}")
    print(f"model saved to {args.model_dir}")
    return 0


# ---------------------------------------------------------------------------
# correct


def cmd_correct(args: argparse.Namespace) -> int:
    model = load_model(args.model_dir)
    lines = [normalize_line(ln) for ln in iter_plain_lines(args.input)]
    fixed = model.correct(lines)
    with open(args.out, "w", encoding="utf-8") as fh:
        for line in fixed:
            fh.write(line + "\n")
    print(f"{len(fixed)} corrected lines written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# optimize


def _noisy_channel_space() -> HyperParamSpace:
    hyper = CorrectorHyper()
    ranks = {
        "ngram_order": 5,
        "max_edits_per_word": 4,
        "beam_width": 3,
        "channel_weight": 2,
        "smoothing_k": 1,
    }
    return HyperParamSpace(
        params=tuple(
            HyperParam(name, tuple(TUNABLE_DOMAINS[name]), getattr(hyper, name), rank)
            for name, rank in ranks.items()
        )
    )


def _builtin_evaluate(train: Corpus, valid: Corpus):
    def evaluate(config: dict) -> float:
        model = train_noisy_channel(train, CorrectorHyper(**config))
        return model.validation_accuracy(valid)

    return evaluate


class _ExternalEvaluator:
    """Runs one adapter process per trial, JSON request in, JSON response out.

    Transport problems (spawn failure, nonzero exit, unparseable output) raise
    ProtocolError and abort the search.  A well-formed {"status": "error"}
    response is an ordinary failed trial.
    """

    def __init__(self, command: str, train_path: str, valid_path: str,
                 work_dir: str, timeout: float) -> None:
        self.argv = shlex.split(command)
        self.train_path = train_path
        self.valid_path = valid_path
        self.work_dir = work_dir
        self.timeout = timeout

    def _call(self, request: dict) -> dict:
        try:
            proc = subprocess.run(
                self.argv,
                input=json.dumps(request).encode("utf-8"),
                capture_output=True,
                timeout=self.timeout,
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise ProtocolError(f"evaluator {self.argv[0]!r} failed to run: {exc}") from exc
        if proc.returncode != 0:
            tail = proc.stderr.decode("utf-8", "replace").strip().splitlines()[-3:]
            raise ProtocolError(
                f"evaluator exited with status {proc.returncode}: {' | '.join(tail)}"
            )
        try:
            response = json.loads(proc.stdout.decode("utf-8"))
        except ValueError as exc:
            raise ProtocolError(f"evaluator emitted invalid JSON: {exc}") from exc
        if not isinstance(response, dict) or "status" not in response:
            raise ProtocolError("evaluator response lacks a status field")
        return response

    def handshake(self, config: dict) -> None:
        response = self._call({"mode": "echo", "config": config})
        if response["status"] != "ok":
            raise ProtocolError(f"echo handshake failed: {response.get('message')}")
        expected = fingerprint_config(config)
        if response.get("fingerprint") != expected:
            raise ProtocolError(
                "fingerprint mismatch: evaluator canonicalizes configs differently"
                f" ({response.get('fingerprint')!r} != {expected!r})"
            )

    def __call__(self, config: dict) -> float:
        digest = hashlib.sha1(fingerprint_config(config).encode("utf-8")).hexdigest()[:12]
        request = {
            "mode": "train_eval",
            "config": config,
            "train_path": self.train_path,
            "valid_path": self.valid_path,
            "model_path": str(Path(self.work_dir) / f"trial_{digest}"),
        }
        response = self._call(request)
        if response["status"] != "ok":
            raise RuntimeError(f"trial failed: {response.get('message', 'no message')}")
        try:
            return float(response["score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"evaluator ok-response lacks a numeric score: {exc}") from exc


def cmd_optimize(args: argparse.Namespace) -> int:
    if args.space:
        space = load_space(args.space)
    elif args.evaluator == "builtin:noisy-channel":
        space = _noisy_channel_space()
    else:
        space = builtin_search_space()
    budget = sum(len(p.values) for p in space.params)
    print(
        f"search space: {len(space.params)} parameters,"
        f" grid {space.grid_size()} configurations"
    )
    print(f"greedy budget: at most {budget} trials")

    if args.evaluator == "builtin:noisy-channel":
        train = load_parallel_tsv(args.train, name="train")
        valid = load_parallel_tsv(args.valid, name="valid")
        evaluate = _builtin_evaluate(train, valid)
    else:
        work_dir = args.work_dir or tempfile.mkdtemp(prefix="ocrforge-trials-")
        Path(work_dir).mkdir(parents=True, exist_ok=True)
        evaluate = _ExternalEvaluator(
            args.evaluator, args.train, args.valid, work_dir, args.timeout
        )
        evaluate.handshake(space.default_config())

    seed_trials = ()
    on_trial = None
    if args.trial_log:
        log_path = Path(args.trial_log)
        if log_path.exists():
            seed_trials = load_trial_log(log_path)
            print(f"resuming: {len(seed_trials)} trials loaded from {log_path}")
        on_trial = lambda record: append_trial(record, log_path)  # noqa: E731

    result = greedy_search(space, evaluate, seed_trials=seed_trials, on_trial=on_trial)
    evaluated = len(result.trials) + len(seed_trials)
    print(f"evaluated {len(result.trials)} fresh trials ({evaluated} with resumed)")
    print(f"best score: {result.best_score:.6f}")
    print(f"best config: {fingerprint_config(result.best_config)}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(result.best_config, fh, sort_keys=True, indent=2)
            fh.write("\n")
        print(f"best config written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ocrforge",
        description="Learn OCR confusion profiles, inject calibrated noise, evaluate correctors.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="learn a confusion profile from aligned noisy/gold text")
    p.add_argument("--noisy", help="noisy side, one line per record")
    p.add_argument("--gold", help="gold side, one line per record")
    p.add_argument("--tsv", help="two-column noisy<TAB>gold file instead of --noisy/--gold")
    p.add_argument("--out", required=True, help="profile TSV to write")
    p.add_argument("--histogram-out", help="error-type histogram TSV to write")
    p.add_argument("--top", type=int, default=8, help="confusions to print (default 8)")
    p.add_argument("--label", default="", help="free-form source label stored with the profile")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("inject", help="synthesize calibrated OCR-like noise into clean text")
    p.add_argument("--input", required=True, help="clean text, one line per record")
    p.add_argument("--out", required=True, help="noisy<TAB>gold TSV to write")
    p.add_argument("--noise-ratio", type=float, required=True,
                   help="per-line event probability, 0 < NR < 1")
    p.add_argument("--profile", help="confusion profile TSV to replay")
    p.add_argument("--freq", help="reference text for character frequencies (default: --input)")
    p.add_argument("--max-swaps", type=int, default=2, help="swap burst upper bound (default 2)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    _add_seed(p)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("evaluate", help="score corrected output against gold and raw OCR")
    p.add_argument("--gold", required=True, help="ground-truth lines")
    p.add_argument("--ocr", required=True, help="uncorrected OCR lines")
    p.add_argument("--fixed", required=True, help="corrected lines")
    p.add_argument("--out", help="report TSV to write")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the generation timestamp for byte-stable reports")
    p.add_argument("--delimiters", default=" \t.,:;!?'\"()",
                   help="word-delimiter characters")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("train", help="train the built-in noisy-channel corrector")
    p.add_argument("--train", required=True, help="noisy<TAB>gold training TSV")
    p.add_argument("--valid", help="noisy<TAB>gold validation TSV")
    p.add_argument("--model-dir", required=True, help="directory to save the model into")
    p.add_argument("--ngram-order", type=int, default=3)
    p.add_argument("--channel-weight", type=float, default=1.0)
    p.add_argument("--beam-width", type=int, default=4)
    p.add_argument("--max-edits", type=int, default=1)
    p.add_argument("--smoothing-k", type=float, default=0.1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("correct", help="run a saved corrector over noisy text")
    p.add_argument("--model-dir", required=True, help="directory written by train")
    p.add_argument("--input", required=True, help="noisy lines to correct")
    p.add_argument("--out", required=True, help="file for corrected lines")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("optimize", help="greedy hyperparameter search against an evaluator")
    p.add_argument("--train", required=True, help="noisy<TAB>gold training TSV")
    p.add_argument("--valid", required=True, help="noisy<TAB>gold validation TSV")
    p.add_argument("--evaluator", default="builtin:noisy-channel",
                   help="builtin:noisy-channel or an external adapter command line")
    p.add_argument("--space", help="parameter-space INI file (default depends on evaluator)")
    p.add_argument("--trial-log", help="JSONL trial log; existing entries seed the cache")
    p.add_argument("--out", help="JSON file for the best config")
    p.add_argument("--work-dir", help="directory for per-trial model artifacts")
    p.add_argument("--timeout", type=float, default=600.0,
                   help="seconds allowed per external trial (default 600)")
    _add_seed(p)
    p.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProtocolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except StageFailedError as exc:
        print(f"error: every trial failed in stage {exc.stage!r}", file=sys.stderr)
        return 1
    except (CorpusError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
