# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field, model_validator

from coreason_hidldl.core.errors import DataValidationError
from coreason_hidldl.core.types import BinaryMatrix, FloatMatrix
from coreason_hidldl.utils.io import read_matrix, sha256_hex, write_matrix
from coreason_hidldl.utils.logger import logger

SIMPLEX_TOLERANCE = 1e-6
RENORMALIZE_LIMIT = 1e-3


class Dataset(BaseModel):
    """Feature matrix paired with its ground-truth label distributions.

    Attributes:
        features: The n x d feature matrix.
        labels: The n x m label distribution matrix; rows lie on the probability simplex.
        names: Optional names of the m labels.
        name: A short dataset name used in reports.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    features: FloatMatrix
    labels: FloatMatrix
    names: Optional[List[str]] = None
    name: str = "dataset"

    @model_validator(mode="after")
    def _check_invariants(self) -> "Dataset":
        n, m = self.labels.shape
        if n < 1:
            raise ValueError("dataset needs at least one row")
        if m < 2:
            raise ValueError(f"dataset needs at least two labels, got {m}")
        if self.features.shape[0] != n:
            raise ValueError(f"features have {self.features.shape[0]} rows but labels have {n}")
        if not np.isfinite(self.features).all():
            raise ValueError("features contain non-finite values")
        if self.names is not None and len(self.names) != m:
            raise ValueError(f"{len(self.names)} label names given for {m} labels")
        check_simplex_rows(self.labels, SIMPLEX_TOLERANCE)
        return self

    @property
    def n(self) -> int:
        return int(self.labels.shape[0])

    @property
    def d(self) -> int:
        return int(self.features.shape[1])

    @property
    def m(self) -> int:
        return int(self.labels.shape[1])

    def subset(self, indices: npt.NDArray[np.intp], suffix: str) -> "Dataset":
        """Returns the rows at ``indices`` as a new dataset named ``<name>[<suffix>]``."""
        return Dataset(
            features=self.features[indices],
            labels=self.labels[indices],
            names=self.names,
            name=f"{self.name}[{suffix}]",
        )


class Mask(BaseModel):
    """Binary observation mask (1 = observed, 0 = hidden).

    Attributes:
        entries: The n x m binary matrix.
        missing_rate: The requested fraction of hidden entries.
        seed: The seed the mask was drawn with.
        repaired_rows: Rows in which the repair pass un-hid an entry.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    entries: BinaryMatrix
    missing_rate: float = Field(0.0, ge=0.0, lt=1.0)
    seed: int = 0
    repaired_rows: List[int] = Field(default_factory=list)

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.entries.shape[0]), int(self.entries.shape[1]))

    @property
    def hidden_fraction(self) -> float:
        return float(1.0 - self.entries.mean())

    def fingerprint(self) -> str:
        """SHA-256 over the shape and the mask bytes."""
        n, m = self.shape
        return sha256_hex(f"{n}x{m}:".encode("utf-8") + self.entries.tobytes())

    def check_against(self, labels: npt.NDArray[np.float64]) -> None:
        """Raises if some row has no observed entry with positive ground-truth mass.

        Raises:
            DataValidationError: On a shape mismatch or an unobservable row.
        """
        if labels.shape != self.shape:
            raise DataValidationError(f"mask shape {self.shape} does not match labels shape {labels.shape}")
        observed_positive = ((self.entries == 1) & (labels > 0)).any(axis=1)
        if not observed_positive.all():
            bad = np.flatnonzero(~observed_positive).tolist()
            raise DataValidationError(f"rows without an observed positive entry: {bad}")


class HiddenView(BaseModel):
    """The renormalised partial observation D^o of a label matrix.

    Attributes:
        observed: The n x m matrix of renormalised observed degrees, exactly 0 where hidden.
        mask: The mask that produced it.
    """

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    observed: FloatMatrix
    mask: Mask

    @model_validator(mode="after")
    def _check_invariants(self) -> "HiddenView":
        if self.observed.shape != self.mask.shape:
            raise ValueError(f"observed shape {self.observed.shape} does not match mask shape {self.mask.shape}")
        if (self.observed[self.mask.entries == 0] != 0.0).any():
            raise ValueError("observed matrix is nonzero at hidden positions")
        check_simplex_rows(self.observed, SIMPLEX_TOLERANCE)
        return self

    @property
    def n(self) -> int:
        return int(self.observed.shape[0])

    @property
    def m(self) -> int:
        return int(self.observed.shape[1])


def check_simplex_rows(matrix: npt.NDArray[np.float64], tolerance: float) -> None:
    """Checks that every row is nonnegative, bounded by 1 and sums to 1.

    Raises:
        DataValidationError: Naming the first offending row.
    """
    if not np.isfinite(matrix).all():
        raise DataValidationError("matrix contains non-finite values")
    negative = np.flatnonzero((matrix < 0).any(axis=1))
    if negative.size:
        raise DataValidationError(f"row {int(negative[0])} has a negative entry")
    above = np.flatnonzero((matrix > 1.0 + tolerance).any(axis=1))
    if above.size:
        raise DataValidationError(f"row {int(above[0])} has an entry above 1")
    sums = matrix.sum(axis=1)
    off = np.flatnonzero(np.abs(sums - 1.0) > tolerance)
    if off.size:
        i = int(off[0])
        raise DataValidationError(f"row {i}: row sum {sums[i]:.6g} outside tolerance")


def load_dataset(
    features_path: str | Path,
    labels_path: str | Path,
    name: Optional[str] = None,
) -> Dataset:
    """Loads a dataset from two headerless CSV files.

    Label rows whose sum is off by more than 1e-6 but less than 1e-3 are renormalised
    with a warning; larger deviations are treated as corrupt data.

    Args:
        features_path: CSV with one instance per row.
        labels_path: CSV with one label distribution per row.
        name: Dataset name; defaults to the stem of the labels file.

    Returns:
        Dataset: The validated dataset.

    Raises:
        DataValidationError: On a row count mismatch, a negative label entry or a
            label row sum outside the tolerance band.
    """
    features = read_matrix(features_path)
    labels = read_matrix(labels_path)

    if features.shape[0] != labels.shape[0]:
        raise DataValidationError(
            f"dimension mismatch: {features.shape[0]} feature rows vs {labels.shape[0]} label rows"
        )
    if (labels < 0).any():
        row = int(np.flatnonzero((labels < 0).any(axis=1))[0])
        raise DataValidationError(f"label row {row} has a negative entry")

    sums = labels.sum(axis=1)
    deviation = np.abs(sums - 1.0)
    corrupt = np.flatnonzero(deviation >= RENORMALIZE_LIMIT)
    if corrupt.size:
        i = int(corrupt[0])
        raise DataValidationError(f"label row {i}: row sum {sums[i]:.6g} outside tolerance")

    drifted = np.flatnonzero(deviation > SIMPLEX_TOLERANCE)
    for i in drifted:
        logger.warning("Renormalizing label row", row=int(i), row_sum=float(sums[i]))
    if drifted.size:
        labels = labels.copy()
        labels[drifted] = labels[drifted] / sums[drifted, None]

    dataset_name = name or Path(labels_path).stem
    logger.info("Loaded dataset", dataset=dataset_name, n=labels.shape[0], d=features.shape[1], m=labels.shape[1])
    return Dataset(features=features, labels=labels, name=dataset_name)


def zscore(features: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Standardises each feature column to zero mean and unit sample variance.

    Constant columns (and all columns when n = 1) are centred only.
    """
    features = np.asarray(features, dtype=np.float64)
    centred = features - features.mean(axis=0)
    if features.shape[0] < 2:
        return centred
    scale = features.std(axis=0, ddof=1)
    scale[scale == 0.0] = 1.0
    return centred / scale


def generate_mask(labels: npt.NDArray[np.float64], missing_rate: float, seed: int) -> Mask:
    """Draws a random observation mask.

    Exactly ``round(missing_rate * n * m)`` positions are hidden, chosen uniformly without
    replacement. A repair pass then walks the rows in order and, for every row left without
    an observed positive entry, un-hides one positive entry chosen uniformly at random.

    Args:
        labels: The ground-truth label matrix.
        missing_rate: Target fraction of hidden entries, in [0, 1).
        seed: Seed for the generator owned by this call.

    Returns:
        Mask: The repaired mask.

    Raises:
        DataValidationError: If the rate is outside [0, 1) or some label row has no positive entry.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if not 0.0 <= missing_rate < 1.0:
        raise DataValidationError(f"missing_rate must be in [0, 1), got {missing_rate}")
    positive = labels > 0
    empty = np.flatnonzero(~positive.any(axis=1))
    if empty.size:
        raise DataValidationError(f"label row {int(empty[0])} is all zeros; no entry can stay observed")

    n, m = labels.shape
    rng = np.random.default_rng(seed)
    n_hidden = int(np.floor(missing_rate * n * m + 0.5))
    entries = np.ones(n * m, dtype=np.int8)
    entries[rng.choice(n * m, size=n_hidden, replace=False)] = 0
    entries = entries.reshape(n, m)

    repaired: List[int] = []
    for i in range(n):
        if (entries[i] * positive[i]).any():
            continue
        j = int(rng.choice(np.flatnonzero(positive[i])))
        entries[i, j] = 1
        repaired.append(i)
        logger.debug("Repaired mask row", row=i, unhidden=j)

    return Mask(entries=entries, missing_rate=missing_rate, seed=seed, repaired_rows=repaired)


def observe_incomplete(labels: npt.NDArray[np.float64], mask: Mask) -> npt.NDArray[np.float64]:
    """The non-renormalised observation D^g * M (hidden entries zeroed, mass not redistributed)."""
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != mask.shape:
        raise DataValidationError(f"mask shape {mask.shape} does not match labels shape {labels.shape}")
    return labels * mask.entries


def hide(labels: npt.NDArray[np.float64], mask: Mask) -> HiddenView:
    """Applies the mask and renormalises each row over its observed entries.

    Raises:
        DataValidationError: If some row has zero observed mass.
    """
    partial = observe_incomplete(labels, mask)
    mass = partial.sum(axis=1)
    empty = np.flatnonzero(mass <= 0.0)
    if empty.size:
        raise DataValidationError(f"row {int(empty[0])} has zero observed mass")
    return HiddenView(observed=partial / mass[:, None], mask=mask)


def split_indices(
    n: int, train_fraction: float, seed: int
) -> Tuple[npt.NDArray[np.intp], npt.NDArray[np.intp]]:
    """Shuffles ``range(n)`` and cuts it at ``round(n * train_fraction)`` (halves round up).

    Returns:
        Tuple: Sorted train indices and sorted test indices.

    Raises:
        ValueError: If the fraction is outside (0, 1) or a partition would be empty.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n_train = int(np.floor(n * train_fraction + 0.5))
    if n_train == 0 or n_train == n:
        raise ValueError(f"splitting {n} rows at {train_fraction} leaves an empty partition")
    order = np.random.default_rng(seed).permutation(n)
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def train_test_split(dataset: Dataset, train_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Partitions the rows of a dataset into disjoint train and test sets."""
    train_idx, test_idx = split_indices(dataset.n, train_fraction, seed)
    return dataset.subset(train_idx, "train"), dataset.subset(test_idx, "test")


def save_hidden_view(view: HiddenView, directory: str | Path) -> None:
    """Writes ``observed.csv`` and ``mask.csv`` into ``directory``."""
    directory = Path(directory)
    write_matrix(directory / "observed.csv", view.observed)
    write_matrix(directory / "mask.csv", view.mask.entries, integer=True)


def load_hidden_view(directory: str | Path) -> HiddenView:
    """Reads a view written by :func:`save_hidden_view` and re-validates it."""
    directory = Path(directory)
    observed = read_matrix(directory / "observed.csv")
    entries = read_matrix(directory / "mask.csv")
    rate = float(np.clip(1.0 - entries.mean(), 0.0, np.nextafter(1.0, 0.0)))
    try:
        return HiddenView(observed=observed, mask=Mask(entries=entries, missing_rate=rate))
    except ValueError as e:
        raise DataValidationError(f"{directory}: invalid hidden view: {e}") from e
