"""Command-line interface.

Subcommands: train, compress, synth, niah, latency, bench.  Settings come
from built-in defaults, overridden by an INI config file (--config), then by
environment variables named TOKENSIEVE_<SECTION>_<KEY>.  Commands that write
outputs also write a .manifest.json recording the effective config hash and
seeds so runs can be reproduced.

Exit codes: 0 success, 1 usage/data error, 2 training diverged,
3 sequence exceeded the scorer's maximum length.
"""

from __future__ import annotations

import argparse
import configparser
import copy
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import kernels
from .core.assemble import ControlPrompt, Granularity, Query
from .core.tokenizer import Tokenizer
from .core.vocab import Vocabulary
from .datagen.bundled import bundled_corpus_dir
from .datagen.niah import build_niah_training_set, build_niah_vocabulary, load_corpus_texts
from .datagen.records import load_examples_jsonl, save_examples_jsonl
from .errors import NonFiniteLoss, SequenceTooLong, TokenSieveError
from .evalharness.niahgrid import NiahAnswerMock, NiahPipeline, grid_eval
from .evalharness.reports import latency_sweep
from .orchestrator import PRESETS, compress
from .scorer.checkpoint import load_checkpoint, save_checkpoint
from .scorer.config import ScorerConfig
from .scorer.model import init_params
from .scorer.training import train
from .selection import SelectionMode, SelectionPolicy, optimized_to_json, render_optimized

ENV_PREFIX = "TOKENSIEVE_"

DEFAULT_CONFIG: dict[str, dict[str, str]] = {
    "scorer": {
        "d_model": "64",
        "n_heads": "4",
        "n_layers": "4",
        "n_causal": "3",
        "d_ff": "256",
        "max_seq": "512",
        "seed": "0",
    },
    "train": {
        "epochs": "3",
        "lr": "3e-4",
        "batch_size": "8",
        "mask_rate": "0.5",
        "seed": "0",
        "n_examples": "200",
        "window_tokens": "256",
        "kind": "numbers",
    },
    "compress": {
        "window_tokens": str(PRESETS["desk"].window_tokens),
        "parallelism": str(PRESETS["desk"].parallelism),
        "granularity": "sentence",
        "budget_tokens": "",
    },
    "niah": {
        "lengths": "512,1024",
        "depths": "0.1,0.5,0.9",
        "trials": "5",
        "seed": "0",
        "kind": "numbers",
    },
    "latency": {
        "lengths": "512,1024,2048,4096",
        "window_tokens": "256",
        "parallelism": "1",
        "repeats": "3",
        "seed": "0",
    },
}


def load_config(path: str | None, env: dict[str, str] | None = None) -> dict[str, dict[str, str]]:
    """Defaults <- INI file <- TOKENSIEVE_<SECTION>_<KEY> environment overrides."""
    config = copy.deepcopy(DEFAULT_CONFIG)
    if path:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise TokenSieveError(f"config file not found: {path}")
        for section in parser.sections():
            config.setdefault(section.lower(), {}).update(
                {k.lower(): v for k, v in parser.items(section)}
            )
    env = os.environ if env is None else env
    for name, value in env.items():
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX) :]
        section, _, key = rest.partition("_")
        section, key = section.lower(), key.lower()
        if key and section in config:
            config[section][key] = value
    return config


def config_sha256(config: dict[str, dict[str, str]]) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode("utf-8")).hexdigest()


def write_manifest(
    out_path: str | Path,
    command: str,
    config: dict[str, dict[str, str]],
    seeds: dict[str, int],
    outputs: list[str],
    extra: dict | None = None,
) -> Path:
    manifest = {
        "command": command,
        "config_sha256": config_sha256(config),
        "config": config,
        "seeds": seeds,
        "outputs": outputs,
        "created_unix": int(time.time()),
    }
    if extra:
        manifest.update(extra)
    path = Path(str(out_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _ints(csv_text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in csv_text.split(",") if x.strip())


def _floats(csv_text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in csv_text.split(",") if x.strip())


def _scorer_config(section: dict[str, str], vocab_size: int) -> ScorerConfig:
    return ScorerConfig(
        vocab_size=vocab_size,
        d_model=int(section["d_model"]),
        n_heads=int(section["n_heads"]),
        n_layers=int(section["n_layers"]),
        n_causal=int(section["n_causal"]),
        d_ff=int(section["d_ff"]),
        max_seq=int(section["max_seq"]),
        seed=int(section["seed"]),
    )


def _vocab_path_for(model_path: str, vocab_arg: str | None) -> Path:
    if vocab_arg:
        return Path(vocab_arg)
    return Path(model_path).with_suffix(".vocab.txt")


def _load_model(model_path: str, vocab_arg: str | None):
    params, cfg = load_checkpoint(model_path)
    vocab = Vocabulary.load(_vocab_path_for(model_path, vocab_arg))
    if len(vocab) != cfg.vocab_size:
        raise TokenSieveError(
            f"vocabulary size {len(vocab)} does not match checkpoint vocab_size {cfg.vocab_size}"
        )
    return params, cfg, Tokenizer(vocab)


def _policy(budget: int | None, granularity: str) -> SelectionPolicy:
    if budget is not None:
        return SelectionPolicy(mode=SelectionMode.TOP_SCORE_BUDGET, budget_tokens=budget)
    return SelectionPolicy(mode=SelectionMode.TAG_DECODE, granularity=Granularity(granularity))


def cmd_train(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    tcfg = config["train"]
    texts = load_corpus_texts(args.corpus or bundled_corpus_dir())
    vocab = build_niah_vocabulary(texts, kind=tcfg["kind"])
    tokenizer = Tokenizer(vocab)
    cfg = _scorer_config(config["scorer"], len(vocab))
    n_examples = args.examples if args.examples is not None else int(tcfg["n_examples"])
    data_seed = args.seed if args.seed is not None else int(tcfg["seed"])
    if args.data:
        dataset = load_examples_jsonl(args.data, tokenizer)
    else:
        dataset = build_niah_training_set(
            texts,
            tokenizer,
            n_examples,
            window_tokens=int(tcfg["window_tokens"]),
            seed=data_seed,
            kind=tcfg["kind"],
        )
    print(f"training on {len(dataset)} examples (vocab {len(vocab)}, d_model {cfg.d_model})")
    params, losses = train(
        dataset,
        cfg,
        tokenizer,
        epochs=int(tcfg["epochs"]),
        lr=float(tcfg["lr"]),
        batch_size=int(tcfg["batch_size"]),
        mask_rate=float(tcfg["mask_rate"]),
        seed=data_seed,
    )
    save_checkpoint(args.out, params, cfg)
    vocab_path = _vocab_path_for(args.out, args.vocab)
    vocab.save(vocab_path)
    write_manifest(
        args.out,
        "train",
        config,
        seeds={"scorer": cfg.seed, "train": data_seed},
        outputs=[str(args.out), str(vocab_path)],
        extra={"epoch_losses": losses, "n_examples": len(dataset)},
    )
    print(f"saved model to {args.out} (epoch losses: {', '.join(f'{l:.4f}' for l in losses)})")
    return 0


def cmd_compress(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    ccfg = config["compress"]
    params, cfg, tokenizer = _load_model(args.model, args.vocab)
    text = sys.stdin.read() if args.context == "-" else Path(args.context).read_text(encoding="utf-8")
    budget = args.budget if args.budget is not None else (int(ccfg["budget_tokens"]) if ccfg["budget_tokens"] else None)
    policy = _policy(budget, args.granularity or ccfg["granularity"])
    parallelism = int(ccfg["parallelism"])
    if args.jobs is not None:
        parallelism = min(parallelism, args.jobs)
    long_seq = tokenizer.tokenize(text)
    subset = compress(
        ControlPrompt(text=args.prompt, granularity=policy.granularity),
        Query(text=args.query),
        long_seq,
        policy,
        params,
        cfg,
        tokenizer,
        window_tokens=int(ccfg["window_tokens"]),
        parallelism=parallelism,
    )
    if args.out:
        Path(args.out).write_text(optimized_to_json(subset) + "\n", encoding="utf-8")
        write_manifest(args.out, "compress", config, seeds={}, outputs=[args.out])
    print(render_optimized(subset))
    print(f"[kept {subset.token_count} of {len(long_seq)} tokens in {len(subset.spans)} spans]", file=sys.stderr)
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    tcfg = config["train"]
    texts = load_corpus_texts(args.corpus or bundled_corpus_dir())
    vocab = build_niah_vocabulary(texts, kind=tcfg["kind"])
    tokenizer = Tokenizer(vocab)
    seed = args.seed if args.seed is not None else int(tcfg["seed"])
    examples = build_niah_training_set(
        texts,
        tokenizer,
        args.n,
        window_tokens=int(tcfg["window_tokens"]),
        seed=seed,
        kind=tcfg["kind"],
    )
    count = save_examples_jsonl(args.out, examples)
    write_manifest(args.out, "synth", config, seeds={"data": seed}, outputs=[args.out])
    print(f"wrote {count} examples to {args.out}")
    return 0


def cmd_niah(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    ncfg = config["niah"]
    params, cfg, tokenizer = _load_model(args.model, args.vocab)
    lengths = _ints(args.lengths or ncfg["lengths"])
    depths = _floats(args.depths or ncfg["depths"])
    trials = args.trials if args.trials is not None else int(ncfg["trials"])
    seed = args.seed if args.seed is not None else int(ncfg["seed"])
    parallelism = int(config["compress"]["parallelism"])
    if args.jobs is not None:
        parallelism = min(parallelism, args.jobs)
    pipeline = NiahPipeline(
        params=params,
        cfg=cfg,
        tokenizer=tokenizer,
        policy=_policy(None, "sentence"),
        client=NiahAnswerMock(kind=ncfg["kind"]),
        window_tokens=int(config["compress"]["window_tokens"]),
        parallelism=parallelism,
    )
    result = grid_eval(
        pipeline, args.corpus or bundled_corpus_dir(), lengths, depths, trials, seed=seed, kind=ncfg["kind"]
    )
    csv_path = args.out or "niah_grid.csv"
    result.to_csv(csv_path)
    outputs = [csv_path]
    if args.plot:
        svg_path = str(Path(csv_path).with_suffix(".svg"))
        result.write_heatmap_svg(svg_path)
        outputs.append(svg_path)
    write_manifest(csv_path, "niah", config, seeds={"grid": seed}, outputs=outputs)
    for i, length in enumerate(result.lengths):
        row = "  ".join(f"{result.accuracy[i, j]:.2f}" for j in range(len(result.depths)))
        print(f"len {length:>6}: {row}")
    print(f"mean accuracy {result.mean_accuracy:.4f}, worst cell {result.min_cell:.4f} -> {csv_path}")
    return 0


def cmd_latency(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    lcfg = config["latency"]
    if args.model:
        params, cfg, tokenizer = _load_model(args.model, args.vocab)
    else:
        from .datagen.wordbank import FILLER_WORDS

        vocab = Vocabulary.build([" ".join(FILLER_WORDS) + " . , ? !"])
        tokenizer = Tokenizer(vocab)
        cfg = _scorer_config(config["scorer"], len(vocab))
        params = init_params(cfg)
    parallelism = int(lcfg["parallelism"])
    if args.jobs is not None:
        parallelism = min(parallelism, args.jobs)
    report = latency_sweep(
        params,
        cfg,
        tokenizer,
        lengths=_ints(args.lengths or lcfg["lengths"]),
        window_tokens=int(lcfg["window_tokens"]),
        parallelism=parallelism,
        repeats=int(lcfg["repeats"]),
        seed=int(lcfg["seed"]),
    )
    print(report.format_text())
    if args.out:
        report.to_csv(args.out)
        outputs = [args.out]
        if args.plot:
            svg_path = str(Path(args.out).with_suffix(".svg"))
            report.write_plot_svg(svg_path)
            outputs.append(svg_path)
        write_manifest(args.out, "latency", config, seeds={"timing": int(lcfg["seed"])}, outputs=outputs)
    elif args.plot:
        report.write_plot_svg("latency.svg")
    return 0


def run_backend_bench(sizes: tuple[int, ...] = (64, 128, 256), heads: int = 4, repeats: int = 5) -> str:
    """Time the hot kernels on each available backend; returns an aligned table."""
    rng = np.random.default_rng(0)
    lines = [f"{'kernel':<16} {'n':>5} " + " ".join(f"{b:>12}" for b in kernels.available_backends())]
    for n in sizes:
        scores = rng.standard_normal((heads, n, n))
        x = rng.standard_normal((n, 128))
        g = np.ones(128)
        b = np.zeros(128)
        for kernel_name in ("masked_softmax", "layer_norm"):
            row_times = []
            for backend in kernels.available_backends():
                impl = kernels.backend_impl(backend)
                if kernel_name == "masked_softmax":
                    call = lambda fn=impl["masked_softmax"]: fn(scores, True)
                else:
                    call = lambda fn=impl["layer_norm"]: fn(x, g, b)
                call()  # warm-up (numba compilation)
                best = min(_time_one(call) for _ in range(repeats))
                row_times.append(best)
            cells = " ".join(f"{t * 1e6:>10.1f}us" for t in row_times)
            lines.append(f"{kernel_name:<16} {n:>5} {cells}")
    return "\n".join(lines)


def _time_one(fn) -> float:
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def cmd_bench(args: argparse.Namespace) -> int:
    sizes = _ints(args.sizes) if args.sizes else (64, 128, 256)
    backends = kernels.available_backends()
    print(f"available backends: {', '.join(backends)} (active: {kernels.active_backend()})")
    print(run_backend_bench(sizes=sizes, repeats=args.repeats))
    if len(backends) < 2:
        print("note: numba backend unavailable; showing numpy only", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tokensieve",
        description="Query-aware token-level context compression toolkit.",
    )
    parser.add_argument("--config", help="INI config file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a scorer on synthesized needle data")
    p_train.add_argument(
        "--corpus", default=None, help="directory of *.txt filler documents (default: bundled corpus)"
    )
    p_train.add_argument("--out", required=True, help="checkpoint output path")
    p_train.add_argument("--data", help="pre-synthesized JSONL training set (skips synthesis)")
    p_train.add_argument("--vocab", help="vocabulary output path (default: <out>.vocab.txt)")
    p_train.add_argument("--examples", type=int, help="number of training examples to synthesize")
    p_train.add_argument("--seed", type=int, help="data/train seed")
    p_train.set_defaults(func=cmd_train)

    p_comp = sub.add_parser("compress", help="compress a document for a query")
    p_comp.add_argument("--model", required=True)
    p_comp.add_argument("--vocab", help="vocabulary path (default: alongside model)")
    p_comp.add_argument("--context", required=True, help="document file, or - for stdin")
    p_comp.add_argument("--query", required=True)
    p_comp.add_argument("--prompt", default="Extract the sentences relevant to the question.")
    p_comp.add_argument("--budget", type=int, help="token budget (switches to budget mode)")
    p_comp.add_argument("--granularity", choices=[g.value for g in Granularity])
    p_comp.add_argument("--jobs", type=int, help="cap window parallelism")
    p_comp.add_argument("--out", help="write span JSON here")
    p_comp.set_defaults(func=cmd_compress)

    p_synth = sub.add_parser("synth", help="synthesize a JSONL training set")
    p_synth.add_argument("--corpus", default=None, help="document directory (default: bundled corpus)")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument("--seed", type=int)
    p_synth.set_defaults(func=cmd_synth)

    p_niah = sub.add_parser("niah", help="needle-retrieval accuracy grid")
    p_niah.add_argument("--model", required=True)
    p_niah.add_argument("--vocab")
    p_niah.add_argument("--corpus", default=None, help="document directory (default: bundled corpus)")
    p_niah.add_argument("--lengths", help="comma-separated context lengths")
    p_niah.add_argument("--depths", help="comma-separated needle depths in [0,1]")
    p_niah.add_argument("--trials", type=int)
    p_niah.add_argument("--seed", type=int)
    p_niah.add_argument("--jobs", type=int)
    p_niah.add_argument("--out", help="CSV output path")
    p_niah.add_argument("--plot", action="store_true", help="also write an SVG heatmap")
    p_niah.set_defaults(func=cmd_niah)

    p_lat = sub.add_parser("latency", help="measure window-scoring latency vs predicted cost")
    p_lat.add_argument("--model", help="checkpoint (default: fresh random weights)")
    p_lat.add_argument("--vocab")
    p_lat.add_argument("--lengths")
    p_lat.add_argument("--jobs", type=int)
    p_lat.add_argument("--out", help="CSV output path")
    p_lat.add_argument("--plot", action="store_true")
    p_lat.set_defaults(func=cmd_latency)

    p_bench = sub.add_parser("bench", help="compare kernel backends")
    p_bench.add_argument("--sizes", help="comma-separated sequence lengths")
    p_bench.add_argument("--repeats", type=int, default=5)
    p_bench.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NonFiniteLoss as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return 2
    except SequenceTooLong as exc:
        print(f"error: sequence too long for the scorer: {exc}", file=sys.stderr)
        return 3
    except (TokenSieveError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
