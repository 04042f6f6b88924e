"""Dataset ingestion: DeepMath problem directories and JSON-lines records."""
from __future__ import annotations

import os

from ..fol.clausify import ClausifyConfig
from ..fol.deepmath import parse_deepmath
from ..fol.tptp import ParseError
from ..tasks.data import (
    load_jsonl,
    premise_problem_from_deepmath,
    problems_from_records,
    split_by_hash,
)


def deepmath_files(path) -> list:
    """Problem files under ``path`` (a file or a directory), sorted by name."""
    if os.path.isfile(path):
        return [path]
    if not os.path.isdir(path):
        raise FileNotFoundError(path)
    out = []
    for root, dirs, files in os.walk(path):
        dirs.sort()
        out += [os.path.join(root, f) for f in sorted(files) if not f.startswith(".")]
    return sorted(out)


def load_deepmath(path, test_fraction: float = 0.1):
    """Parse every problem file; returns ``(problems, train_idx, test_idx)``.

    The split hashes each file name, so it does not depend on directory order.
    """
    problems = []
    for f in deepmath_files(path):
        name = os.path.basename(f)
        with open(f, encoding="utf-8") as fh:
            text = fh.read()
        try:
            problems.append(parse_deepmath(text, name))
        except ParseError as e:
            raise ParseError(f"{f}: {e.msg}", e.line, e.col) from e
    train, test = split_by_hash([p.name for p in problems], test_fraction)
    return problems, train, test


def load_problems(path, test_fraction: float = 0.1, clausify_config: ClausifyConfig | None = None):
    """Task problems from a JSON-lines file or a DeepMath directory.

    Returns ``(problems, train_idx, test_idx)``; the split hashes problem ids.
    """
    if os.path.isdir(path) or not str(path).endswith((".jsonl", ".json")):
        raw, train, test = load_deepmath(path, test_fraction)
        return [premise_problem_from_deepmath(p, clausify_config) for p in raw], train, test
    problems = problems_from_records(load_jsonl(path))
    train, test = split_by_hash([p.id for p in problems], test_fraction)
    return problems, train, test
