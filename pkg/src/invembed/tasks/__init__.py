"""Task heads, losses and training loops."""
from .data import (
    IGNORE_FRESH,
    LABEL_FRESH,
    UNK,
    PremiseProblem,
    SymbolProblem,
    build_vocab,
    problems_from_records,
    split_by_hash,
)
from .heads import (
    head_shapes,
    init_head,
    policy_logit,
    policy_logits,
    premise_head,
    premise_probs,
    symbol_head,
    value_head,
)
from .metrics import symbol_metrics
from .optim import SGD, Adam
from .train import PremiseTask, SymbolTask, TrainConfig, evaluate, init_model, symbol_report, train
