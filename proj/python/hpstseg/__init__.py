"""Two-view sparse event segmentation with a heterogeneous point-set transformer."""

from ._core import (
    DatasetHeader,
    Event,
    GenConfig,
    Hit,
    HyperParams,
    TrainConfig,
    View,
    checkpoint_hyper,
    dense_bytes_grid,
    evaluate,
    generate_dataset,
    generate_event,
    linear_sum_assignment,
    ovr_auc,
    predict_event,
    prong_purity_efficiency,
    read_events,
    render_event_display,
    segmentation_accuracy,
    sparse_bytes_for,
    sparse_dense_crossover,
    train,
    validate_event,
    write_events,
)

__all__ = [
    "DatasetHeader",
    "Event",
    "GenConfig",
    "Hit",
    "HyperParams",
    "TrainConfig",
    "View",
    "checkpoint_hyper",
    "dense_bytes_grid",
    "evaluate",
    "generate_dataset",
    "generate_event",
    "linear_sum_assignment",
    "ovr_auc",
    "predict_event",
    "prong_purity_efficiency",
    "read_events",
    "render_event_display",
    "segmentation_accuracy",
    "sparse_bytes_for",
    "sparse_dense_crossover",
    "train",
    "validate_event",
    "write_events",
]
