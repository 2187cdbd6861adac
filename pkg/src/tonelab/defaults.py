"""Packaged scale definitions and demo defaults."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .population import sample_skin_tones
from .scales import Scale, generate_cst_scale, scale_from_json

DEMO_CORPUS_SEED = 7
DEMO_CORPUS_SIZE = 600


def packaged_scale(name: str) -> Scale:
    """Load one of the scale definitions shipped with the package."""
    import json

    with resources.files("tonelab.data").joinpath(f"{name}.json").open() as fh:
        return scale_from_json(json.load(fh))


def demo_cst_scale(seed: int = DEMO_CORPUS_SEED) -> Scale:
    """A colorimetric scale generated from the synthetic population."""
    rng = np.random.default_rng(seed)
    corpus = sample_skin_tones(DEMO_CORPUS_SIZE, rng)
    scale, _, _ = generate_cst_scale(corpus)
    return scale


def default_scales() -> dict[str, Scale]:
    """Demo scale set: generated colorimetric palette, packaged MST and FST."""
    cst = demo_cst_scale()
    mst = packaged_scale("mst")
    fst = packaged_scale("fst")
    return {s.scale_id: s for s in (cst, mst, fst)}
