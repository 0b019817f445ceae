"""Versioned JSON codec for all model kinds (and the scaler used with them).

The schema is documented in docs/model_schema.md. Serialization is
deterministic: two calls on the same model produce byte-identical output, and
a serialize/deserialize round trip predicts identically to the original.
"""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from ..errors import ModelDecodeError
from .boosting import (
    VARIANT_HISTOGRAM_LEAFWISE,
    VARIANT_SECOND_ORDER,
    BoostedModel,
    BoostParams,
    LeafwiseParams,
)
from .common import TreeNodes
from .forest import ForestModel, ForestParams
from .linear import LinearModel
from .tree import TreeModel, TreeParams

FORMAT_TAG = "ranpredict.model"
SCHEMA_VERSION = 1

Model = LinearModel | TreeModel | ForestModel | BoostedModel


def _nodes_to_obj(nodes: TreeNodes) -> dict:
    return {
        "feature_index": [int(v) for v in nodes.feature_index],
        "threshold": [float(v) for v in nodes.threshold],
        "left_child": [int(v) for v in nodes.left],
        "right_child": [int(v) for v in nodes.right],
        "leaf_value": [float(v) for v in nodes.value],
        "n_samples": [int(v) for v in nodes.n_samples],
    }


def _nodes_from_obj(obj: dict) -> TreeNodes:
    try:
        arrays = {
            "feature_index": np.array(obj["feature_index"], dtype=np.int32),
            "threshold": np.array(obj["threshold"], dtype=float),
            "left": np.array(obj["left_child"], dtype=np.int32),
            "right": np.array(obj["right_child"], dtype=np.int32),
            "value": np.array(obj["leaf_value"], dtype=float),
            "n_samples": np.array(obj["n_samples"], dtype=np.int64),
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelDecodeError(f"malformed tree nodes: {exc}") from exc
    n = arrays["feature_index"].shape[0]
    if any(a.shape != (n,) for a in arrays.values()) or n == 0:
        raise ModelDecodeError("tree node arrays are empty or of unequal length")
    for key in ("left", "right"):
        child = arrays[key]
        if np.any(child >= n) or np.any((child < 0) & (child != -1)):
            raise ModelDecodeError(f"{key} child index out of range")
    return TreeNodes(**arrays)


def _tree_obj(model: TreeModel) -> dict:
    return _nodes_to_obj(model.nodes)


def serialize_model(model: Model) -> bytes:
    """Encode a fitted model as canonical (sorted-keys, compact) JSON bytes."""
    if not isinstance(model, (LinearModel, TreeModel, ForestModel, BoostedModel)):
        raise TypeError(f"not a serializable model: {type(model).__name__}")
    payload: dict = {
        "format": FORMAT_TAG,
        "version": SCHEMA_VERSION,
        "feature_names": list(model.feature_names),
    }
    if isinstance(model, LinearModel):
        payload["kind"] = "linear"
        payload["weights"] = [float(w) for w in model.weights]
        payload["intercept"] = float(model.intercept)
    elif isinstance(model, TreeModel):
        payload["kind"] = "tree"
        payload["params"] = asdict(model.params)
        payload["nodes"] = _tree_obj(model)
    elif isinstance(model, ForestModel):
        payload["kind"] = "forest"
        payload["params"] = asdict(model.params)
        payload["trees"] = [_tree_obj(t) for t in model.trees]
    elif isinstance(model, BoostedModel):
        payload["kind"] = "boosted"
        payload["variant"] = model.variant
        payload["params"] = asdict(model.params)
        payload["base_score"] = float(model.base_score)
        payload["learning_rate"] = float(model.learning_rate)
        payload["trees"] = [_tree_obj(t) for t in model.trees]
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def deserialize_model(data: bytes) -> Model:
    """Decode bytes produced by :func:`serialize_model`.

    Raises :class:`ModelDecodeError` for malformed payloads, unknown formats,
    unknown versions, and unknown model kinds.
    """
    try:
        payload = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelDecodeError(f"payload is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ModelDecodeError("payload is not a JSON object")
    if payload.get("format") != FORMAT_TAG:
        raise ModelDecodeError(f"unknown format tag: {payload.get('format')!r}")
    if payload.get("version") != SCHEMA_VERSION:
        raise ModelDecodeError(f"unsupported schema version: {payload.get('version')!r}")
    try:
        feature_names = tuple(str(s) for s in payload["feature_names"])
        kind = payload["kind"]
        if kind == "linear":
            return LinearModel(
                weights=np.array(payload["weights"], dtype=float),
                intercept=float(payload["intercept"]),
                feature_names=feature_names,
            )
        if kind == "tree":
            params = TreeParams(**payload["params"])
            return TreeModel(
                nodes=_nodes_from_obj(payload["nodes"]),
                params=params,
                feature_names=feature_names,
            )
        if kind == "forest":
            params = ForestParams(**payload["params"])
            tree_params = TreeParams(
                max_depth=params.max_depth, min_samples_leaf=params.min_samples_leaf
            )
            trees = tuple(
                TreeModel(
                    nodes=_nodes_from_obj(t), params=tree_params, feature_names=feature_names
                )
                for t in payload["trees"]
            )
            if not trees:
                raise ModelDecodeError("forest payload holds no trees")
            return ForestModel(trees=trees, params=params, feature_names=feature_names)
        if kind == "boosted":
            variant = payload["variant"]
            if variant == VARIANT_SECOND_ORDER:
                params = BoostParams(**payload["params"])
                tree_params = TreeParams(
                    max_depth=params.max_depth, min_samples_leaf=params.min_samples_leaf
                )
            elif variant == VARIANT_HISTOGRAM_LEAFWISE:
                params = LeafwiseParams(**payload["params"])
                tree_params = TreeParams(
                    max_depth=None, min_samples_leaf=params.min_samples_leaf
                )
            else:
                raise ModelDecodeError(f"unknown boosted variant: {variant!r}")
            trees = tuple(
                TreeModel(
                    nodes=_nodes_from_obj(t), params=tree_params, feature_names=feature_names
                )
                for t in payload["trees"]
            )
            return BoostedModel(
                base_score=float(payload["base_score"]),
                learning_rate=float(payload["learning_rate"]),
                trees=trees,
                variant=variant,
                params=params,
                feature_names=feature_names,
            )
        raise ModelDecodeError(f"unknown model kind: {kind!r}")
    except ModelDecodeError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelDecodeError(f"malformed model payload: {exc}") from exc
