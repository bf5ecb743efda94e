"""Python bindings for the chan video summarization core.

Array arguments accept anything numpy can convert. Commands that produce
documents (gen_data, train, summarize, evaluate, gradcheck) return dicts with
the same layout the chan CLI prints.
"""

import json as _json

from . import _chan
from ._chan import (
    FormatError,
    InvalidArgument,
    ShapeError,
    concept_iou,
    evaluate_summary,
    kts_segment,
    max_weight_matching,
    select_summary,
)

__all__ = [
    "FormatError",
    "InvalidArgument",
    "ShapeError",
    "benchmark_run_config",
    "benchmark_synth_config",
    "concept_iou",
    "evaluate",
    "evaluate_summary",
    "gen_data",
    "gradcheck",
    "kts_segment",
    "max_weight_matching",
    "select_summary",
    "summarize",
    "train",
]


def benchmark_synth_config():
    return _json.loads(_chan.benchmark_synth_config())


def benchmark_run_config():
    return _json.loads(_chan.benchmark_run_config())


def gen_data(directory, config=None):
    """Write a synthetic dataset; config keys override the generator defaults."""
    return _json.loads(_chan.gen_data(str(directory), _json.dumps(config or {})))


def train(config):
    """Run one training fold described by a run-config dict."""
    return _json.loads(_chan.train(_json.dumps(config)))


def summarize(checkpoint, dataset, video=None, query=None, threshold=None, top_k=None):
    return _json.loads(_chan.summarize(str(checkpoint), str(dataset), video, query, threshold, top_k))


def evaluate(summaries, dataset, references=None):
    refs = None if references is None else str(references)
    return _json.loads(_chan.evaluate(str(summaries), str(dataset), refs))


def gradcheck(seed=7):
    return _json.loads(_chan.gradcheck(seed))
