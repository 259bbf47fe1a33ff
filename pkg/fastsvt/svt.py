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

"""Singular value thresholding with recycled randomized partial SVDs.

The solver minimizes tau * ||X||_* + 1/2 ||X||_F^2 subject to P(X) = P(A),
where P keeps the entries of a sample set, with the linearized Bregman
iterations

  X(i) = shrink(partial_svd(Y(i)), tau)
  Y(i+1) = Y(i) + delta * P(A - X(i))

Every Y(i) lives on the sample set, so the partial SVDs only multiply sparse
matrices with thin dense blocks. The default backend recycles the left
singular vectors of X(i-1) to sketch Y(i), and the sketch precision
`eps_threshold` is tightened by an annealing factor whenever the residual
fails to improve.

Typical usage:
```
cfg = svt.default_config(samples)
result = svt.svt_run(
    samples, cfg, svt.StoppingRule(svt.StopKind.TRAIN_MAE, 1.0)
)
result.factors.to_dense()
```
"""

from __future__ import annotations

from collections.abc import Callable
import dataclasses
import enum
import math
from typing import Optional

from absl import logging
import dataclasses_json
from fastsvt.backends import backends_base
from fastsvt.backends import full_svd  # pylint: disable=unused-import
from fastsvt.backends import sketch_backends  # pylint: disable=unused-import
from fastsvt.core import constants
from fastsvt.core import dense
from fastsvt.core import results
from fastsvt.core import sparse
from fastsvt.core import utils
import numpy as np


_LowRankFactors = dense.LowRankFactors
_SampledMatrix = sparse.SampledMatrix
_IterationRecord = results.IterationRecord

# Called after every iteration with the record and the thresholded factors.
# The monitor may fill in extra record fields (e.g. `test_mae`) and returns
# True to stop the run.
Monitor = Callable[[_IterationRecord, _LowRankFactors], bool | None]


class ResidualSource(enum.Enum):
  """Iterate whose distance to the samples defines the residual."""

  THRESHOLDED = 'thresholded'  # X(i), the low-rank iterate.
  DUAL = 'dual'  # Y(i), the sampled dual variable.


class StopKind(enum.Enum):
  RESIDUAL = 'residual'
  TRAIN_MAE = 'train_mae'


@dataclasses.dataclass(frozen=True)
class StoppingRule:
  """Stops the run once the chosen metric drops below `tolerance`."""

  kind: StopKind
  tolerance: float

  def __post_init__(self):
    if not self.tolerance >= 0.0:
      raise ValueError(
          f'Stopping tolerance must be >= 0, got {self.tolerance}.'
      )

  def metric(self, record: _IterationRecord) -> float:
    if self.kind == StopKind.RESIDUAL:
      return record.residual
    return record.train_mae

  def is_met(self, record: _IterationRecord) -> bool:
    return self.metric(record) < self.tolerance


@dataclasses_json.dataclass_json
@dataclasses.dataclass(frozen=True)
class SvtConfig:
  """Parameters of an SVT run.

  Attributes:
    tau: Shrinkage threshold, in the units of the entries.
    delta: Step size of the Bregman update.
    maxit: Maximum number of iterations.
    dt: Number of samples added per sketch extension round.
    power_iterations: Power passes applied to fresh Gaussian sketches.
    eps_stop: Tolerance of the default (residual) stopping rule.
    eps_threshold0: Initial error-percentage target of the sketches.
    beta: Annealing factor applied to the target when the residual does not
      improve.
    t0: Initial sample count of the first (non-recycled) sketch.
    seed: Seed of the run; iteration i sketches with `[seed, i]`.
    max_rank: Optional cap on the rank revealed by the adaptive backends.
    fixed_rank: Rank of the `rsvd-fixed` backend (default 30% of min(m, n)).
    oversampling: Oversampling of the `rsvd-fixed` backend.
    residual_source: Iterate used to compute the residual.
  """
  # pytype: disable=wrong-arg-types
  tau: float
  delta: float
  maxit: int = constants.DEFAULT_MAXIT
  dt: int = constants.DEFAULT_SAMPLE_STEP
  power_iterations: int = constants.DEFAULT_POWER_ITERATIONS
  eps_stop: float = 0.0
  eps_threshold0: float = constants.DEFAULT_EPS_THRESHOLD0
  beta: float = constants.DEFAULT_ANNEALING_FACTOR
  t0: int = 1
  seed: int = 0
  max_rank: Optional[int] = None
  fixed_rank: Optional[int] = None
  oversampling: int = constants.DEFAULT_OVERSAMPLING
  residual_source: ResidualSource = ResidualSource.THRESHOLDED
  # pytype: enable=wrong-arg-types

  def __post_init__(self):
    checks = [
        (self.tau > 0.0, 'tau must be > 0'),
        (self.delta > 0.0, 'delta must be > 0'),
        (0.0 < self.beta < 1.0, 'beta must be in (0, 1)'),
        (0.0 < self.eps_threshold0 < 1.0, 'eps_threshold0 must be in (0, 1)'),
        (self.maxit >= 1, 'maxit must be >= 1'),
        (self.dt >= 1, 'dt must be >= 1'),
        (self.t0 >= 1, 't0 must be >= 1'),
        (self.power_iterations >= 0, 'power_iterations must be >= 0'),
        (self.eps_stop >= 0.0, 'eps_stop must be >= 0'),
        (self.seed >= 0, 'seed must be >= 0'),
        (self.oversampling >= 0, 'oversampling must be >= 0'),
        (
            self.max_rank is None or self.max_rank >= 1,
            'max_rank must be >= 1',
        ),
        (
            self.fixed_rank is None or self.fixed_rank >= 1,
            'fixed_rank must be >= 1',
        ),
    ]
    for ok, message in checks:
      if not ok:
        raise ValueError(f'Invalid SvtConfig: {message}. Got {self}.')
    # Also accept the plain string when the config is built from JSON or flags.
    object.__setattr__(
        self, 'residual_source', ResidualSource(self.residual_source)
    )


@dataclasses.dataclass(frozen=True)
class SvtResult:
  """Outcome of an SVT run.

  Attributes:
    factors: The thresholded factors at the stop, or those of the best
      iteration when the run did not converge.
    trace: One record per iteration.
    converged: Whether the stopping rule or the monitor ended the run.
    stop_reason: One of 'residual', 'train_mae', 'monitor' or 'maxit'.
    best_iteration: Iteration with the lowest stopping metric.
    config: The parameters of the run.
  """

  factors: _LowRankFactors
  trace: list[_IterationRecord]
  converged: bool
  stop_reason: str
  best_iteration: int
  config: SvtConfig

  @property
  def iterations(self) -> int:
    return len(self.trace)


def default_config(a: _SampledMatrix, **overrides) -> SvtConfig:
  """Returns the default parameters for completing `a`.

  tau = ||P(A)||_F, delta = sqrt(m n / ns), t0 = floor(0.05 min(m, n)) (at
  least 1), dt = 10, beta = 0.95 and eps_stop = 1e-4 * tau.

  Args:
    a: The observed samples.
    **overrides: `SvtConfig` fields replacing the computed defaults. None
      values are ignored.

  Raises:
    ValueError: If all samples are zero (tau would be 0) or an override is
      invalid.
  """
  m, n = a.shape
  fraction = constants.DEFAULT_INITIAL_SAMPLE_FRACTION
  relative_stop = constants.DEFAULT_RELATIVE_EPS_STOP
  tau = math.sqrt(sparse.sp_frob_norm_sq(a))
  if tau == 0.0:
    raise ValueError('All sampled values are zero; nothing to complete.')
  cfg = SvtConfig(
      tau=tau,
      delta=math.sqrt(m * n / a.nnz),
      t0=max(1, math.floor(fraction * min(m, n))),
      eps_stop=relative_stop * tau,
  )
  overrides = {k: v for k, v in overrides.items() if v is not None}
  if 'tau' in overrides and 'eps_stop' not in overrides:
    overrides['eps_stop'] = relative_stop * overrides['tau']
  return dataclasses.replace(cfg, **overrides)


def shrink(factors: _LowRankFactors, tau: float) -> _LowRankFactors:
  """Applies the singular value shrinkage operator.

  Keeps the triplets with sigma > tau (strictly) and subtracts tau from their
  singular values. The result may have rank 0.

  Args:
    factors: Factors sorted by non-increasing singular values.
    tau: Non-negative threshold.
  """
  if tau < 0.0:
    raise ValueError(f'tau must be >= 0, got {tau}.')
  keep = int(np.count_nonzero(factors.sigma > tau))
  if tau == 0.0 and keep == factors.rank:
    return factors
  kept = factors.truncate(keep)
  return dataclasses.replace(kept, sigma=kept.sigma - tau)


def kickstart(
    a: _SampledMatrix, tau: float, delta: float, seed: utils.Seed
) -> _SampledMatrix:
  """Returns Y(0) = k0 * delta * P(A) with k0 = ceil(tau / (delta sigma_1)).

  Starting from this multiple skips the first iterations whose thresholded
  iterate would be zero anyway.

  Args:
    a: The observed samples.
    tau: Shrinkage threshold.
    delta: Step size.
    seed: Seed of the spectral norm estimate.
  """
  sigma_1 = sparse.spectral_norm_est(
      a, iters=constants.KICKSTART_POWER_ITERATIONS, seed=seed
  )
  k0 = 1
  if sigma_1 > 0.0:
    k0 = max(1, math.ceil(tau / (delta * sigma_1)))
  logging.info('Kickstart with k0 = %d (sigma_1 estimate %.6g).', k0, sigma_1)
  return a.with_values(k0 * delta * a.values)


def residual(a: _SampledMatrix, y: _SampledMatrix) -> float:
  """Returns ||P(A) - Y||_F over the sample set of `a`.

  Raises:
    ValueError: If `a` and `y` have different patterns.
  """
  if not a.same_pattern(y):
    raise ValueError('Residual requires both matrices to share one pattern.')
  diff = a.values - y.values
  return float(np.sqrt(np.dot(diff, diff)))


def train_mae(a: _SampledMatrix, factors: _LowRankFactors) -> float:
  """Returns the mean absolute error of the factors on the samples of `a`."""
  predicted = sparse.project_low_rank(a, factors)
  return float(np.mean(np.abs(a.values - predicted.values)))


def _make_backend(
    backend: backends_base.BackendName | str | backends_base.PartialSvdBackend,
    cfg: SvtConfig,
) -> backends_base.PartialSvdBackend:
  if isinstance(backend, backends_base.PartialSvdBackend):
    return backend
  return backends_base.make_backend(
      backend,
      t0=cfg.t0,
      dt=cfg.dt,
      power_iterations=cfg.power_iterations,
      max_rank=cfg.max_rank,
      fixed_rank=cfg.fixed_rank,
      oversampling=cfg.oversampling,
  )


def svt_run(
    a: _SampledMatrix,
    cfg: SvtConfig,
    stop: StoppingRule | None = None,
    *,
    backend: (
        backends_base.BackendName | str | backends_base.PartialSvdBackend
    ) = backends_base.BackendName.R4SVD,
    monitor: Monitor | None = None,
) -> SvtResult:
  """Completes the sampled matrix `a` by singular value thresholding.

  Every iteration i runs, in this order: the partial SVD of Y(i) (recycling
  the left singular vectors kept by iteration i - 1), the shrinkage giving
  X(i), the residual, the cooling of `eps_threshold` (multiplied by `beta`
  when the residual is not below its running minimum), the stop check and
  the update of Y.

  Args:
    a: The observed samples P(A).
    cfg: Solver parameters, see `default_config`.
    stop: Stopping rule. Defaults to residual < `cfg.eps_stop`.
    backend: Partial SVD backend (name or instance).
    monitor: Optional callable invoked after every iteration.

  Returns:
    The final factors and the trace. If `cfg.maxit` is reached first, the
    factors of the iteration with the lowest stopping metric are returned and
    `converged` is False.

  Raises:
    ValueError: If the iterates diverge (a non-finite trace record).
  """
  if stop is None:
    stop = StoppingRule(StopKind.RESIDUAL, cfg.eps_stop)
  partial_svd = _make_backend(backend, cfg)
  watch = utils.Stopwatch()
  logging.info(
      'SVT on a %dx%d matrix with %d samples, backend %s, tau %.6g, '
      'delta %.6g.', a.shape[0], a.shape[1], a.nnz, partial_svd.name.value,
      cfg.tau, cfg.delta)
  with watch.phase('kickstart'):
    y = kickstart(a, cfg.tau, cfg.delta, utils.derive_seed(cfg.seed, 0))

  trace: list[_IterationRecord] = []
  eps_threshold = cfg.eps_threshold0
  best_residual = math.inf
  recycle: dense.DenseBlock | None = None
  best_metric = math.inf
  best_factors = _LowRankFactors.empty(*a.shape)
  best_iteration = 0
  stop_reason = 'maxit'

  for i in range(1, cfg.maxit + 1):
    with watch.phase('iteration'):
      with watch.phase('sketch') as sketch_phase:
        sketch = partial_svd.decompose(
            y, recycle, eps_threshold, utils.derive_seed(cfg.seed, i)
        )
      x = shrink(sketch.factors, cfg.tau)
      x_on_samples = sparse.project_low_rank(a, x)
      if cfg.residual_source == ResidualSource.DUAL:
        eps = residual(a, y)
      else:
        eps = residual(a, x_on_samples)
      if eps < best_residual:
        best_residual = eps
      else:
        eps_threshold *= cfg.beta
      mae = float(np.mean(np.abs(a.values - x_on_samples.values)))
    record = _IterationRecord(
        iteration=i,
        rank=x.rank,
        residual=eps,
        eps_threshold=eps_threshold,
        train_mae=mae,
        sketch_ms=1000.0 * sketch_phase.seconds,
        total_ms=watch.elapsed_ms('kickstart') + watch.elapsed_ms('iteration'),
        sketch_rank=sketch.rank,
        extension_rounds=sketch.rounds,
        saturated=sketch.saturated,
    )
    if not results.is_finite_record(record):
      raise ValueError(
          f'SVT diverged at iteration {i} ({record.format(color=False)}); '
          'try a smaller delta.'
      )
    trace.append(record)
    logging.info('SVT %s', record.format(color=False))

    metric = stop.metric(record)
    if metric < best_metric:
      best_metric, best_factors, best_iteration = metric, x, i
    if stop.is_met(record):
      stop_reason = stop.kind.value
    elif monitor is not None and monitor(record, x):
      stop_reason = 'monitor'
    if stop_reason != 'maxit':
      return SvtResult(
          factors=x,
          trace=trace,
          converged=True,
          stop_reason=stop_reason,
          best_iteration=best_iteration,
          config=cfg,
      )

    with watch.phase('iteration'):
      correction = a.with_values(a.values - x_on_samples.values)
      y = sparse.sp_axpy(y, cfg.delta, correction)
      # Only the columns that survived the shrinkage are recycled.
      recycle = x.u

  logging.warning(
      'SVT did not converge in %d iterations; returning iteration %d '
      '(%s %.6g).', cfg.maxit, best_iteration, stop.kind.value, best_metric)
  return SvtResult(
      factors=best_factors,
      trace=trace,
      converged=False,
      stop_reason=stop_reason,
      best_iteration=best_iteration,
      config=cfg,
  )


def svt_run_oracle(
    a: _SampledMatrix,
    cfg: SvtConfig,
    stop: StoppingRule | None = None,
    *,
    monitor: Monitor | None = None,
) -> SvtResult:
  """Same as `svt_run` with a full SVD of the densified iterate."""
  return svt_run(
      a,
      cfg,
      stop,
      backend=backends_base.BackendName.FULL_ORACLE,
      monitor=monitor,
  )
