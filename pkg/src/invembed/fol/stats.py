"""Symbol occurrence statistics over clause sets."""
from __future__ import annotations

from collections import Counter

from .clausify import DEFINITION, SKOLEM
from .terms import ClauseSet

CLASS_LABELS = {SKOLEM: "skolem", DEFINITION: "def"}


def symbol_label(cs: ClauseSet, sym, collapse: bool = True) -> str:
    """Name of ``sym``, or its fresh-symbol class label when ``collapse``."""
    if collapse and sym in cs.origins:
        return CLASS_LABELS[cs.origins[sym]]
    return sym.name


def symbol_statistics(cs: ClauseSet, collapse: bool = True) -> dict:
    """Occurrence counts and fractions per symbol label.

    Every occurrence in the printed clauses counts, shared subterms included.
    Returns ``{label: (count, fraction)}`` ordered by decreasing count, then label.
    """
    counts = Counter()
    for clause in cs.clauses:
        for sym in clause.symbols():
            counts[symbol_label(cs, sym, collapse)] += 1
    total = sum(counts.values())
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return {k: (n, n / total) for k, n in ordered}


def merge_statistics(tables) -> dict:
    counts = Counter()
    for t in tables:
        for k, (n, _) in t.items():
            counts[k] += n
    total = sum(counts.values())
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return {k: (n, n / total) for k, n in ordered}
