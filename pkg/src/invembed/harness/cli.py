"""Command line interface.

Exit status: 0 on success, 1 when a check fails, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys

from ..fol.clausify import ClausifyConfig, clausify
from ..fol.deepmath import parse_deepmath
from ..fol.stats import merge_statistics, symbol_statistics
from ..fol.terms import format_cnf
from ..fol.tptp import ParseError, parse_cnf, parse_fof
from ..gnn import Dims
from ..graph import PRESETS, build_graph, dump_graph
from ..tasks.data import IGNORE_FRESH, LABEL_FRESH, build_vocab, problems_from_records
from ..tasks.data import premise_problem_from_deepmath, split_by_hash
from ..tasks.train import (
    DTYPES,
    NonFiniteLoss,
    PremiseTask,
    SymbolTask,
    TrainConfig,
    evaluate,
    init_model,
    symbol_report,
    train,
)
from ..tensor import load_checkpoint, save_checkpoint
from .datasets import deepmath_files, load_problems
from .synthetic import dumps_jsonl, gen_synthetic

log = logging.getLogger("invembed")

TASK_TYPES = {"premises": "premise", "symbols": "default"}
TRAIN_KEYS = ("epochs", "batch_size", "lr", "optimizer", "seed", "precision")
DIM_KEYS = ("L", "d_c", "d_s", "d_t")
TASK_KEYS = ("mode", "vocab_cutoff", "test_fraction", "types", "threshold")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# -- configuration ------------------------------------------------------------------------

def load_config(path) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("--config must hold a JSON object")
    unknown = sorted(set(cfg) - set(TRAIN_KEYS + DIM_KEYS + TASK_KEYS))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return cfg


def make_dims(cfg: dict) -> Dims:
    L = int(cfg.get("L", 5))
    defaults = {"d_c": (4, 32), "d_s": (1, 64), "d_t": (4, 32)}
    widths = {}
    for key, (first, rest) in defaults.items():
        v = cfg.get(key, rest)
        widths[key] = [first] + [int(v)] * L if isinstance(v, (int, float)) else list(v)
    return Dims(L, **widths)


def run_config(args, cfg: dict) -> dict:
    """Flat run description: config file values overridden by explicit flags."""
    out = dict(cfg)
    for key in ("seed", "precision", "epochs", "batch_size", "lr", "test_fraction", "mode"):
        v = getattr(args, key, None)
        if v is not None:
            out[key] = v
    out.setdefault("seed", 0)
    out.setdefault("precision", "f64")
    out.setdefault("test_fraction", 0.1)
    return out


def train_config(run: dict) -> TrainConfig:
    return TrainConfig(**{k: run[k] for k in TRAIN_KEYS if k in run})


# -- output helpers -----------------------------------------------------------------------

@contextlib.contextmanager
def _output(path):
    if path and path != "-":
        with open(path, "w", encoding="utf-8") as fh:
            yield fh
    else:
        yield sys.stdout


def _read(path) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _jsonl(fh, rec):
    fh.write(json.dumps(rec) + "\n")
    fh.flush()


# -- data ---------------------------------------------------------------------------------

def _dataset(args, run: dict):
    """(problems, train_idx, test_idx, source description)."""
    frac = float(run["test_fraction"])
    if args.synthetic is not None:
        records = gen_synthetic(args.task, args.synthetic, args.data_seed)
        problems = problems_from_records(records)
        train_idx, test_idx = split_by_hash([p.id for p in problems], frac)
        source = {"synthetic": args.synthetic, "data_seed": args.data_seed}
    elif args.data:
        cc = ClausifyConfig(int(run.get("threshold", 4)))
        problems, train_idx, test_idx = load_problems(args.data, frac, cc)
        source = {"data": args.data}
    else:
        raise UsageError("give --data PATH or --synthetic SIZE")
    kinds = {"premises": "PremiseProblem", "symbols": "SymbolProblem"}[args.task]
    if any(type(p).__name__ != kinds for p in problems):
        raise UsageError(f"dataset does not hold {args.task} problems")
    return problems, train_idx, test_idx, source


def _task(name: str, vocab=None, mode=IGNORE_FRESH):
    if name == "premises":
        return PremiseTask()
    return SymbolTask(vocab, mode)


# -- subcommands --------------------------------------------------------------------------

def cmd_clausify(args) -> int:
    text = _read(args.file)
    formulas = parse_fof(text)
    cs = clausify(formulas, ClausifyConfig(args.threshold))
    with _output(args.out) as fh:
        fh.write(format_cnf(cs))
    return 0


def _clause_set(text: str, threshold: int = 4):
    if "fof(" in text:
        return clausify(parse_fof(text), ClausifyConfig(threshold))
    return parse_cnf(text)


def cmd_graph(args) -> int:
    cs = _clause_set(_read(args.file), args.threshold)
    g = build_graph(cs, PRESETS[args.types]())
    with _output(args.out) as fh:
        fh.write(dump_graph(g) + "\n")
    return 0


def cmd_stats(args) -> int:
    tables = []
    for path in args.paths:
        files = [path] if path == "-" else deepmath_files(path)
        for f in files:
            text = _read(f)
            first = text.lstrip()[:2]
            if first in ("C ", "+ ", "- "):
                prob = parse_deepmath(text, f)
                cs = premise_problem_from_deepmath(prob, ClausifyConfig(args.threshold)).cs
            else:
                cs = _clause_set(text, args.threshold)
            tables.append(symbol_statistics(cs, collapse=not args.no_collapse))
    table = merge_statistics(tables)
    rows = list(table.items())[: args.top] if args.top else list(table.items())
    with _output(args.out) as fh:
        for label, (n, frac) in rows:
            _jsonl(fh, {"symbol": label, "count": n, "fraction": round(frac, 6)})
    return 0


def cmd_check_invariance(args) -> int:
    from .invariance import invariance_suite, negative_control

    dims = make_dims(load_config(args.config))
    tol = args.tol if args.tol is not None else (1e-9 if args.precision == "f64" else 1e-4)
    if args.control:
        reports = negative_control(args.seed, args.graphs, dims, tol)
        flagged = sum(not r.numeric for r in reports)
        ok = flagged >= 0.95 * len(reports)
        summary = {"control": "swap_arguments", "draws": len(reports), "flagged": flagged,
                   "passed": ok}
    else:
        reports = invariance_suite(args.seed, args.graphs, args.param_seeds, dims, tol=tol,
                                   dtype=DTYPES[args.precision])
        worst: dict = {}
        for r in reports:
            worst[r.kind] = max(worst.get(r.kind, 0.0), r.max_deviation)
        failed = [r.to_json() for r in reports if not r.passed]
        ok = not failed
        summary = {"checks": len(reports), "failed": len(failed), "tol": tol,
                   "max_deviation": worst, "passed": ok}
        if failed:
            summary["first_failure"] = failed[0]
    with _output(args.out) as fh:
        _jsonl(fh, summary)
    return 0 if ok else 1


def cmd_gradcheck(args) -> int:
    from .gradcheck import HEADS, gradcheck_suite

    heads = args.heads.split(",") if args.heads else list(HEADS)
    for h in heads:
        if h not in HEADS:
            raise UsageError(f"unknown head {h!r}")
    results = gradcheck_suite(args.seed, args.graphs, heads)
    worst = max(r["error"] for r in results)
    with _output(args.out) as fh:
        for r in results:
            _jsonl(fh, r)
        _jsonl(fh, {"max_error": worst, "tol": args.tol, "passed": worst <= args.tol})
    return 0 if worst <= args.tol else 1


def cmd_gen(args) -> int:
    records = gen_synthetic(args.task, args.size, args.seed)
    with _output(args.out) as fh:
        fh.write(dumps_jsonl(records))
    return 0


def cmd_train(args) -> int:
    run = run_config(args, load_config(args.config))
    cfg = train_config(run)
    dims = make_dims(run)
    types = PRESETS[run.get("types", TASK_TYPES[args.task])]()
    problems, tr, te, source = _dataset(args, run)
    train_set = [problems[i] for i in tr]
    test_set = [problems[i] for i in te]
    mode = run.get("mode", IGNORE_FRESH)
    vocab = None
    if args.task == "symbols":
        from ..tasks.data import ensure_graphs

        ensure_graphs(train_set, types)
        vocab = build_vocab(train_set, mode, int(run.get("vocab_cutoff", 10)))
    task = _task(args.task, vocab, mode)
    params = init_model(task, dims, types, cfg.seed, dtype=DTYPES[cfg.precision])
    header = {"command": "train", "task": args.task, "config": cfg.to_json(), "dims": dims.to_json(),
              "types": types.name, "test_fraction": run["test_fraction"], "mode": mode,
              "source": source, "train_size": len(train_set), "test_size": len(test_set)}
    with _output(args.out) as fh:
        if vocab is not None:
            header["vocab"] = vocab
        _jsonl(fh, {"header": header})
        train(task, train_set, test_set, params, types, dims, cfg, emit=lambda r: _jsonl(fh, r))
        if args.task == "symbols":
            for split, probs in (("train", train_set), ("test", test_set)):
                if probs:
                    _, outputs = evaluate(task, probs, params, types, dims, cfg.batch_size)
                    _jsonl(fh, {"final": True, "split": split, **symbol_report(task, outputs)})
    if args.checkpoint:
        meta = {"task": args.task, "dims": dims.to_json(), "types": types.name, "mode": mode,
                "vocab": vocab, "config": cfg.to_json()}
        save_checkpoint(args.checkpoint, params, meta)
    return 0


def cmd_eval(args) -> int:
    params, meta = load_checkpoint(args.checkpoint)
    if meta.get("task") != args.task:
        raise UsageError(f"checkpoint was trained for {meta.get('task')!r}, not {args.task!r}")
    run = run_config(args, {})
    d = meta["dims"]
    dims = Dims(d["L"], d["d_c"], d["d_s"], d["d_t"])
    types = PRESETS[meta["types"]]()
    dtype = DTYPES[run["precision"]]
    params = {k: v.astype(dtype) for k, v in params.items()}
    problems, tr, te, source = _dataset(args, run)
    pick = {"all": range(len(problems)), "train": tr, "test": te}[args.split]
    subset = [problems[i] for i in pick]
    task = _task(args.task, meta.get("vocab"), meta.get("mode", IGNORE_FRESH))
    metrics, outputs = evaluate(task, subset, params, types, dims, args.batch_size)
    rec = {"split": args.split, **metrics}
    if args.task == "symbols":
        rec.update(symbol_report(task, outputs))
    with _output(args.out) as fh:
        _jsonl(fh, {"header": {"command": "eval", "task": args.task, "split": args.split,
                               "source": source, "precision": run["precision"],
                               "test_fraction": run["test_fraction"]}})
        _jsonl(fh, rec)
    return 0


# -- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="invembed", description="Name-invariant clause embeddings.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, seed=True):
        if seed:
            sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--precision", choices=sorted(DTYPES), default=None)
        sp.add_argument("--config", default=None, help="JSON file of flat key/value settings")
        sp.add_argument("--out", default=None, help="output path (default stdout)")

    sp = sub.add_parser("clausify", help="FOF to CNF")
    sp.add_argument("file")
    sp.add_argument("--threshold", type=int, default=4, help="definitional naming threshold")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_clausify)

    sp = sub.add_parser("graph", help="CNF (or FOF) to a JSON hypergraph")
    sp.add_argument("file")
    sp.add_argument("--types", choices=sorted(PRESETS), default="default")
    sp.add_argument("--threshold", type=int, default=4)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_graph)

    sp = sub.add_parser("stats", help="symbol occurrence statistics")
    sp.add_argument("paths", nargs="+")
    sp.add_argument("--no-collapse", action="store_true", help="keep skolemN/defN names")
    sp.add_argument("--top", type=int, default=0)
    sp.add_argument("--threshold", type=int, default=4)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("check-invariance", help="run the invariance suite")
    common(sp)
    sp.add_argument("--graphs", type=int, default=100)
    sp.add_argument("--param-seeds", type=int, default=1)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--control", action="store_true", help="argument-swap negative control")
    sp.set_defaults(func=cmd_check_invariance, seed=0, precision="f64")

    sp = sub.add_parser("gradcheck", help="end-to-end gradient check")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--graphs", type=int, default=2)
    sp.add_argument("--heads", default=None, help="comma-separated subset of heads")
    sp.add_argument("--tol", type=float, default=1e-5)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_gradcheck)

    sp = sub.add_parser("gen", help="synthetic datasets as JSON lines")
    sp.add_argument("task", choices=["symbols", "premises"])
    sp.add_argument("--size", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_gen)

    for name, func in (("train", cmd_train), ("eval", cmd_eval)):
        sp = sub.add_parser(name, help=f"{name} a task model")
        sp.add_argument("task", choices=["premises", "symbols"])
        common(sp)
        src = sp.add_mutually_exclusive_group()
        src.add_argument("--data", default=None, help="JSON-lines records or a DeepMath directory")
        src.add_argument("--synthetic", type=int, default=None, help="generate SIZE problems")
        sp.add_argument("--data-seed", type=int, default=0)
        sp.add_argument("--test-fraction", dest="test_fraction", type=float, default=None)
        sp.add_argument("--mode", choices=[IGNORE_FRESH, LABEL_FRESH], default=None)
        if name == "train":
            sp.add_argument("--epochs", type=int, default=None)
            sp.add_argument("--batch-size", dest="batch_size", type=int, default=None)
            sp.add_argument("--lr", type=float, default=None)
            sp.add_argument("--checkpoint", default=None, help="write parameters here")
        else:
            sp.add_argument("--checkpoint", required=True)
            sp.add_argument("--split", choices=["all", "train", "test"], default="test")
            sp.add_argument("--batch-size", dest="batch_size", type=int, default=50)
        sp.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"invembed: error: {e}", file=sys.stderr)
        return 2
    except SystemExit as e:  # --help
        return int(e.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ParseError, OSError, json.JSONDecodeError) as e:
        print(f"invembed: error: {e}", file=sys.stderr)
        return 2
    except NonFiniteLoss as e:
        print(f"invembed: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"invembed: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
