"""Symbol-guessing evaluation metrics."""
from __future__ import annotations


def symbol_metrics(problems) -> dict:
    """Top-1 accuracy and perfect-naming rate.

    ``problems`` is a list with one entry per problem, each a list of
    ``(ranked_labels, target, in_conjecture)`` for every scored symbol.
    A problem is perfectly named when all of its conjecture symbols are
    top-1 correct; problems without conjecture symbols are not counted.
    """
    n = correct = 0
    conj_n = conj_correct = 0
    named = perfect = 0
    for symbols in problems:
        all_ok = True
        has_conj = False
        for ranked, target, in_conj in symbols:
            hit = bool(ranked) and ranked[0] == target
            n += 1
            correct += hit
            if in_conj:
                has_conj = True
                conj_n += 1
                conj_correct += hit
                all_ok &= hit
        if has_conj:
            named += 1
            perfect += all_ok
    return {
        "top1": correct / n if n else 0.0,
        "conjecture_top1": conj_correct / conj_n if conj_n else 0.0,
        "perfect_naming": perfect / named if named else 0.0,
        "scored": n,
        "correct": correct,
        "conjecture_scored": conj_n,
        "conjecture_correct": conj_correct,
        "problems": named,
        "perfect": perfect,
    }
