# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

import numpy as np

from coreason_hidldl.core.dataset import Dataset
from coreason_hidldl.core.manifest import SyntheticSpec
from coreason_hidldl.utils.logger import logger


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    """Draws a clustered dataset with low-rank label distributions.

    ``rank`` prototypes are sampled from a symmetric Dirichlet, every row is assigned one
    (each prototype used at least once when n >= rank), labels are the prototype plus
    clamped Gaussian noise renormalised to the simplex and mixed with ``label_floor`` of the uniform
    distribution, so every entry is at least ``label_floor / m``. Features are a fixed random
    linear embedding of the noiseless prototype plus Gaussian noise.
    """
    rng = np.random.default_rng(spec.seed)
    prototypes = rng.dirichlet(np.full(spec.m, spec.concentration), size=spec.rank)
    assignment = rng.permutation(np.arange(spec.n) % spec.rank)
    clean = prototypes[assignment]

    noisy = np.maximum(clean + spec.noise_label * rng.standard_normal((spec.n, spec.m)), 0.0)
    sums = noisy.sum(axis=1, keepdims=True)
    labels = np.where(sums > 0.0, noisy / np.where(sums > 0.0, sums, 1.0), clean)
    labels = (1.0 - spec.label_floor) * labels + spec.label_floor / spec.m

    embedding = rng.standard_normal((spec.m, spec.d))
    features = clean @ embedding + spec.noise_feature * rng.standard_normal((spec.n, spec.d))

    logger.debug("Generated synthetic dataset", n=spec.n, d=spec.d, m=spec.m, rank=spec.rank, seed=spec.seed)
    return Dataset(features=features, labels=labels, name="synthetic")
