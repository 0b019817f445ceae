"""Five from-scratch regression learners with a shared predict interface."""

from __future__ import annotations

import numpy as np

from ..dataset import FeatureMatrix, TargetVector
from .boosting import (
    VARIANT_HISTOGRAM_LEAFWISE,
    VARIANT_SECOND_ORDER,
    BoostedModel,
    BoostParams,
    Histogram,
    LeafwiseParams,
    build_histogram,
    fit_boosted_leafwise,
    fit_boosted_second_order,
)
from .common import TreeNodes, predict_nodes
from .forest import ForestModel, ForestParams, fit_forest
from .linear import LinearModel, fit_linear
from .serialize import Model, deserialize_model, serialize_model
from .tree import TreeModel, TreeParams, fit_tree

__all__ = [
    "BoostedModel",
    "BoostParams",
    "ForestModel",
    "ForestParams",
    "Histogram",
    "LeafwiseParams",
    "LinearModel",
    "Model",
    "TreeModel",
    "TreeNodes",
    "TreeParams",
    "VARIANT_HISTOGRAM_LEAFWISE",
    "VARIANT_SECOND_ORDER",
    "build_histogram",
    "deserialize_model",
    "fit_boosted_leafwise",
    "fit_boosted_second_order",
    "fit_forest",
    "fit_linear",
    "fit_tree",
    "predict",
    "serialize_model",
]


def _check_columns(model: Model, X: FeatureMatrix) -> None:
    expected = len(model.feature_names)
    if X.n_cols != expected:
        raise ValueError(
            f"column-count mismatch: model was trained on {expected} features, "
            f"matrix has {X.n_cols}"
        )


def predict(model: Model, X: FeatureMatrix) -> TargetVector:
    """Predict with any fitted model kind.

    Tree routing sends a sample left iff x[feature] <= threshold. Forest
    output is the unweighted mean over member trees; boosted output is
    base_score + learning_rate * sum of tree outputs.
    """
    _check_columns(model, X)
    if isinstance(model, LinearModel):
        out = X.values @ model.weights + model.intercept
    elif isinstance(model, TreeModel):
        out = predict_nodes(model.nodes, X.values)
    elif isinstance(model, ForestModel):
        stacked = np.stack([predict_nodes(t.nodes, X.values) for t in model.trees])
        out = stacked.mean(axis=0)
    elif isinstance(model, BoostedModel):
        out = np.full(X.n_rows, model.base_score)
        for tree in model.trees:
            out = out + model.learning_rate * predict_nodes(tree.nodes, X.values)
    else:
        raise TypeError(f"not a model: {type(model).__name__}")
    return TargetVector(name="prediction", values=out)
