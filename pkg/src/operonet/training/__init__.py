"""Adam training with inverse-time decay and relative L2 evaluation."""

from .optim import AdamState, adam_step, inverse_time_decay, rel_l2
from .trainer import (
    CSV_HEADER,
    DivergenceError,
    EpochRecord,
    TrainConfig,
    TrainReport,
    evaluate,
    mse_loss,
    per_function_errors,
    predict_dataset,
    train,
)

__all__ = [
    "AdamState", "adam_step", "inverse_time_decay", "rel_l2", "CSV_HEADER",
    "DivergenceError", "EpochRecord", "TrainConfig", "TrainReport", "evaluate",
    "mse_loss", "per_function_errors", "predict_dataset", "train",
]
