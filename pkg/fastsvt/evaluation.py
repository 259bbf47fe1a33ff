# Copyright 2026 The FastSVT Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Experiment and benchmark routines.

All functions are meant as minimal templates that demonstrate how to run the
solver on image and ratings data and how to compare backends. We encourage
users to fork this file and adapt it to their data.

We cover three scenarios:
1. Image completion: sample the pixels of a grayscale image, complete, and
  compare the recovered image with the full image (see `run_image_experiment`).
2. Rating prediction: split ratings into train and test sets, complete the
  train matrix while monitoring the test error, and detect the iteration where
  overfitting starts (see `run_ratings_experiment`).
3. Backend benchmark: per-iteration partial SVD times of several backends on
  the same synthetic instances (see `benchmark_backends`).
"""

from collections.abc import Mapping, Sequence
import csv
import dataclasses
import datetime
import io
import time
from typing import Any, Optional

from absl import logging
import dataclasses_json
from fastsvt import svt
from fastsvt.backends import backends_base
from fastsvt.core import constants
from fastsvt.core import dense
from fastsvt.core import results
from fastsvt.core import sparse
from fastsvt.core import utils
from fastsvt.datasets import images
from fastsvt.datasets import ratings as ratings_lib
from fastsvt.datasets import synthetic
import numpy as np
import tqdm


DEFAULT_PATIENCE = 10
_Backend = backends_base.BackendName | str


def full_matrix_mae(truth: np.ndarray, factors: dense.LowRankFactors) -> float:
  """Returns the mean absolute error over all entries of `truth`."""
  truth = np.asarray(truth, dtype=np.float64)
  if truth.shape != factors.shape:
    raise ValueError(
        f'Shapes differ: truth {truth.shape}, factors {factors.shape}.'
    )
  return float(np.mean(np.abs(truth - factors.to_dense())))


def relative_error(truth: np.ndarray, factors: dense.LowRankFactors) -> float:
  """Returns ||truth - U S V^T||_F / ||truth||_F."""
  truth = np.asarray(truth, dtype=np.float64)
  return float(
      np.linalg.norm(truth - factors.to_dense()) / np.linalg.norm(truth)
  )


def detect_overfitting(
    test_maes: Sequence[float], patience: int = DEFAULT_PATIENCE
) -> int | None:
  """Returns the 1-based iteration where the test error stopped improving.

  The curve overfits when its minimum is followed by at least `patience`
  iterations none of which goes below it.

  Args:
    test_maes: Test error of iterations 1, 2, ...
    patience: Number of non-improving iterations required after the minimum.
  """
  if patience < 1:
    raise ValueError(f'patience must be >= 1, got {patience}.')
  if not test_maes:
    return None
  best = int(np.argmin(test_maes))
  if len(test_maes) - 1 - best >= patience:
    return best + 1
  return None


@dataclasses.dataclass
class OverfittingDetector:
  """SVT monitor recording the test error and detecting overfitting.

  Attributes:
    test: Held-out samples on the frame of the train matrix.
    patience: Non-improving iterations after the best one that signal
      overfitting.
    stop_on_overfit: Whether to stop the run once overfitting is detected.
    best_iteration: Iteration with the lowest test error so far.
    best_test_mae: The lowest test error so far.
    best_factors: Factors of the best iteration.
    overfit_iteration: Best iteration at the time overfitting was detected.
  """

  test: sparse.SampledMatrix
  patience: int = DEFAULT_PATIENCE
  stop_on_overfit: bool = False
  best_iteration: int = 0
  best_test_mae: float = float('inf')
  best_factors: dense.LowRankFactors | None = None
  overfit_iteration: int | None = None

  def __call__(
      self, record: results.IterationRecord, factors: dense.LowRankFactors
  ) -> bool:
    record.test_mae = svt.train_mae(self.test, factors)
    if record.test_mae < self.best_test_mae:
      self.best_test_mae = record.test_mae
      self.best_iteration = record.iteration
      self.best_factors = factors
    elif (
        self.overfit_iteration is None
        and record.iteration - self.best_iteration >= self.patience
    ):
      self.overfit_iteration = self.best_iteration
      logging.info(
          'Test MAE has not improved for %d iterations since iteration %d '
          '(%.6g).', self.patience, self.best_iteration, self.best_test_mae)
    return self.stop_on_overfit and self.overfit_iteration is not None


@dataclasses_json.dataclass_json
@dataclasses.dataclass
class ExperimentSummary:
  """Outcome of an image or ratings experiment (written as summary.json).

  Attributes:
    backend: Backend name.
    iterations: Number of SVT iterations run.
    converged: Whether the run stopped before `maxit`.
    stop_reason: See `svt.SvtResult.stop_reason`.
    rank: Rank of the returned factors.
    train_mae: Sample-set error of the returned factors.
    elapsed_ms: Cumulative time of the run.
    full_mae: Full-image error (image experiments with ground truth).
    best_test_iteration: Iteration with the lowest test error (ratings).
    best_test_mae: The lowest test error (ratings).
    overfit_iteration: Iteration after which the test error stopped
      improving, if overfitting was detected (ratings).
    extra: Additional information, e.g. sizes and fractions.
  """
  # pytype: disable=wrong-arg-types
  backend: str
  iterations: int
  converged: bool
  stop_reason: str
  rank: int
  train_mae: float
  elapsed_ms: float
  full_mae: Optional[float] = None
  best_test_iteration: Optional[int] = None
  best_test_mae: Optional[float] = None
  overfit_iteration: Optional[int] = None
  extra: dict[str, Any] = dataclasses.field(default_factory=dict)
  # pytype: enable=wrong-arg-types


def _summary(
    result: svt.SvtResult, backend: _Backend, **kwargs: Any
) -> ExperimentSummary:
  last = result.trace[-1]
  return ExperimentSummary(
      backend=backends_base.BackendName(backend).value,
      iterations=result.iterations,
      converged=result.converged,
      stop_reason=result.stop_reason,
      rank=result.factors.rank,
      train_mae=(
          last.train_mae
          if result.converged
          else result.trace[result.best_iteration - 1].train_mae
      ),
      elapsed_ms=last.total_ms,
      **kwargs,
  )


def run_image_experiment(
    image: images.GrayImage,
    fraction: float,
    seed: int = 0,
    *,
    backend: _Backend = backends_base.BackendName.R4SVD,
    stop_mae: float = constants.IMAGE_STOP_MAE,
    config_overrides: Mapping[str, Any] | None = None,
    has_ground_truth: bool = True,
) -> tuple[ExperimentSummary, svt.SvtResult, images.GrayImage]:
  """Samples an image, completes it and measures the recovery error.

  Args:
    image: The full image.
    fraction: Fraction of sampled pixels.
    seed: Seed of the sample set and of the solver.
    backend: Partial SVD backend.
    stop_mae: The run stops once the sample-set MAE is below this value.
    config_overrides: `svt.SvtConfig` fields replacing the defaults.
    has_ground_truth: Whether `image` is the ground truth; if so the
      full-image MAE of the recovered (quantized) image is reported.

  Returns:
    The summary, the solver result and the recovered image.
  """
  samples = images.sample_image(image, fraction, utils.derive_seed(seed, 0))
  overrides = {'seed': seed, **(config_overrides or {})}
  cfg = svt.default_config(samples, **overrides)
  result = svt.svt_run(
      samples,
      cfg,
      svt.StoppingRule(svt.StopKind.TRAIN_MAE, stop_mae),
      backend=backend,
  )
  recovered = images.factors_to_image(result.factors)
  full_mae = None
  if has_ground_truth:
    full_mae = float(
        np.mean(np.abs(image.as_matrix() - recovered.as_matrix()))
    )
  summary = _summary(
      result,
      backend,
      full_mae=full_mae,
      extra={
          'height': image.height,
          'width': image.width,
          'fraction': fraction,
          'samples': samples.nnz,
      },
  )
  return summary, result, recovered


def run_ratings_experiment(
    dataset: ratings_lib.RatingsDataset,
    train_fraction: float = 0.8,
    seed: int = 0,
    *,
    backend: _Backend = backends_base.BackendName.R4SVD,
    stop_mae: float = constants.RATINGS_STOP_MAE,
    patience: int = DEFAULT_PATIENCE,
    stop_on_overfit: bool = False,
    config_overrides: Mapping[str, Any] | None = None,
) -> tuple[ExperimentSummary, svt.SvtResult]:
  """Completes the train ratings while monitoring the test error.

  Args:
    dataset: The ratings.
    train_fraction: Fraction of ratings used for training.
    seed: Seed of the split and of the solver.
    backend: Partial SVD backend.
    stop_mae: The run stops once the train MAE is below this value.
    patience: See `OverfittingDetector`.
    stop_on_overfit: Stop as soon as overfitting is detected.
    config_overrides: `svt.SvtConfig` fields replacing the defaults.

  Returns:
    The summary and the solver result. The trace records carry `test_mae`.
  """
  train, test = ratings_lib.split_ratings(
      dataset, train_fraction, utils.derive_seed(seed, 0)
  )
  overrides = {'seed': seed, **(config_overrides or {})}
  cfg = svt.default_config(train, **overrides)
  detector = OverfittingDetector(
      test=test, patience=patience, stop_on_overfit=stop_on_overfit
  )
  result = svt.svt_run(
      train,
      cfg,
      svt.StoppingRule(svt.StopKind.TRAIN_MAE, stop_mae),
      backend=backend,
      monitor=detector,
  )
  overfit = detector.overfit_iteration
  if overfit is None:
    overfit = detect_overfitting(
        [r.test_mae for r in result.trace], patience
    )
  summary = _summary(
      result,
      backend,
      best_test_iteration=detector.best_iteration,
      best_test_mae=detector.best_test_mae,
      overfit_iteration=overfit,
      extra={
          'users': dataset.num_users,
          'items': dataset.num_items,
          'train': train.nnz,
          'test': test.nnz,
          'rating_range': list(dataset.rating_range),
      },
  )
  return summary, result


@dataclasses.dataclass(frozen=True)
class BenchRow:
  """Partial SVD time of one iteration of one backend."""

  size: int
  iteration: int
  backend: str
  svd_ms: float
  rank: int


BENCH_COLUMNS = ('size', 'iter', 'backend', 'svd_ms', 'rank')


def bench_rows_to_csv(rows: Sequence[BenchRow]) -> str:
  buffer = io.StringIO()
  writer = csv.writer(buffer, lineterminator='\n')
  writer.writerow(BENCH_COLUMNS)
  for r in rows:
    writer.writerow([r.size, r.iteration, r.backend, repr(r.svd_ms), r.rank])
  return buffer.getvalue()


def benchmark_backends(
    *,
    sizes: Sequence[int],
    backends: Sequence[_Backend],
    fraction: float = 0.2,
    rank: int = 10,
    maxit: int = 20,
    seed: int = 0,
    print_debug: bool = False,
) -> tuple[datetime.timedelta, list[BenchRow]]:
  """Times the partial SVDs of every backend on square synthetic instances.

  Every backend runs exactly `maxit` SVT iterations (no stopping rule) on the
  same sampled n x n rank-`rank` matrix for every n in `sizes`.

  Args:
    sizes: Matrix sizes n.
    backends: Backends to compare.
    fraction: Sampling fraction.
    rank: Rank of the synthetic matrices (clamped to n).
    maxit: Number of iterations per run.
    seed: Seed of the instances and of the runs.
    print_debug: Print a summary line per run.

  Returns:
    A tuple of the benchmark duration and the rows (one per iteration, size
    and backend).
  """
  start_time = time.monotonic()
  never = svt.StoppingRule(svt.StopKind.RESIDUAL, 0.0)
  rows = []
  runs = [(n, b) for n in sizes for b in backends]
  for n, backend in tqdm.tqdm(runs, total=len(runs)):
    name = backends_base.BackendName(backend).value
    truth = synthetic.low_rank_matrix(
        n, n, min(rank, n), utils.derive_seed(seed, n)
    )
    samples = synthetic.sample_matrix(
        truth, fraction, utils.derive_seed(seed, n, 1)
    )
    cfg = svt.default_config(samples, maxit=maxit, seed=seed)
    result = svt.svt_run(samples, cfg, never, backend=backend)
    rows.extend(
        BenchRow(
            size=n,
            iteration=r.iteration,
            backend=name,
            svd_ms=r.sketch_ms,
            rank=r.sketch_rank,
        )
        for r in result.trace
    )
    if print_debug:
      tqdm.tqdm.write(
          f'size={n} backend={name} mean_svd_ms='
          f'{np.mean([r.sketch_ms for r in result.trace]):.3f}'
      )
  return datetime.timedelta(seconds=time.monotonic() - start_time), rows
