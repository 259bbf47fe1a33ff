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

"""Randomized partial SVD engines built on an incremental QB decomposition.

Three engines are provided:

* `rsvd`: fixed-rank randomized SVD with Gaussian sampling and oversampling.
* `r3svd`: rank-revealing randomized SVD. A QB decomposition Y ~ Q @ B is
  grown by blocks of `dt` orthogonal Gaussian samples until the error
  percentage (||Y||_F^2 - ||B||_F^2) / ||Y||_F^2 drops below a threshold.
* `r4svd`: the recycling variant of `r3svd` that starts the QB decomposition
  from the left singular vectors of a previous, nearby matrix.

Since Q has orthonormal columns, ||Y - Q B||_F^2 = ||Y||_F^2 - ||B||_F^2, and
||B||_F^2 is the sum of the squared norms of the blocks appended so far, so the
error percentage is tracked incrementally at no extra cost.

Seeds: the initial block of a sketch uses `derive_seed(seed, 0)` and the j-th
extension round uses `derive_seed(seed, j)`.
"""

from __future__ import annotations

import dataclasses

from absl import logging
from fastsvt.core import constants
from fastsvt.core import dense
from fastsvt.core import sparse
from fastsvt.core import utils
import numpy as np


_DenseBlock = dense.DenseBlock
_LowRankFactors = dense.LowRankFactors
_SampledMatrix = sparse.SampledMatrix


@dataclasses.dataclass(frozen=True)
class SketchParams:
  """Parameters of the randomized SVD engines.

  Attributes:
    t: Initial sample count (rank of the initial QB decomposition).
    dt: Number of samples added per extension round.
    power_iterations: Number of power passes X <- Y (Y^T X) applied to every
      fresh Gaussian sketch.
    eps_threshold: Target error percentage in (0, 1).
    seed: Seed of the sketch; see the module docstring for the schedule.
    oversampling: Extra samples used by the fixed-rank `rsvd` only.
    max_rank: Optional cap on the revealed rank. Defaults to min(m, n).
  """

  t: int = 1
  dt: int = constants.DEFAULT_SAMPLE_STEP
  power_iterations: int = constants.DEFAULT_POWER_ITERATIONS
  eps_threshold: float = constants.DEFAULT_EPS_THRESHOLD0
  seed: utils.Seed = 0
  oversampling: int = constants.DEFAULT_OVERSAMPLING
  max_rank: int | None = None

  def __post_init__(self):
    if self.t < 1:
      raise ValueError(f't must be >= 1, got {self.t}.')
    if self.dt < 1:
      raise ValueError(f'dt must be >= 1, got {self.dt}.')
    if self.power_iterations < 0:
      raise ValueError(
          f'power_iterations must be >= 0, got {self.power_iterations}.'
      )
    if not 0.0 < self.eps_threshold < 1.0:
      raise ValueError(
          f'eps_threshold must be in (0, 1), got {self.eps_threshold}.'
      )
    if self.oversampling < 0:
      raise ValueError(
          f'oversampling must be >= 0, got {self.oversampling}.'
      )
    if self.max_rank is not None and self.max_rank < 1:
      raise ValueError(f'max_rank must be >= 1, got {self.max_rank}.')

  def rank_limit(self, y: _SampledMatrix) -> int:
    """Returns the largest rank the engines may reveal for `y`."""
    limit = min(y.shape)
    if self.max_rank is not None:
      limit = min(limit, self.max_rank)
    return limit


@dataclasses.dataclass(frozen=True)
class QBState:
  """An incrementally built decomposition Y ~ Q @ B.

  Attributes:
    q: m x r matrix with orthonormal columns.
    b: r x n matrix Q^T Y.
    norm_b: Accumulated ||B||_F^2.
    frob_y2: ||Y||_F^2 of the target matrix.
    rounds: Number of extension rounds performed so far.
    saturated: Whether an extension was requested while the rank was already
      at its limit.
  """

  q: _DenseBlock
  b: _DenseBlock
  norm_b: float
  frob_y2: float
  rounds: int = 0
  saturated: bool = False

  @property
  def rank(self) -> int:
    return self.q.shape[1]


@dataclasses.dataclass(frozen=True)
class SketchResult:
  """Output of a partial SVD engine.

  Attributes:
    factors: The low-rank factors.
    rank: The rank of the factors (revealed rank for the adaptive engines).
    saturated: Whether the rank limit was reached before the threshold.
    rounds: Number of extension rounds performed.
    error_percentage: Error percentage of the final QB decomposition (NaN
      when not tracked).
  """

  factors: _LowRankFactors
  rank: int
  saturated: bool = False
  rounds: int = 0
  error_percentage: float = float('nan')


def error_percentage(state: QBState) -> float:
  """Returns (||Y||_F^2 - ||B||_F^2) / ||Y||_F^2 clamped to [0, 1].

  Raises:
    ValueError: If the target matrix is zero (||Y||_F^2 = 0).
  """
  if state.frob_y2 <= 0.0:
    raise ValueError('Error percentage is undefined for a zero matrix.')
  eps = (state.frob_y2 - state.norm_b) / state.frob_y2
  return float(min(1.0, max(0.0, eps)))


def _power_sketch(
    y: _SampledMatrix, width: int, power_iterations: int, seed: utils.Seed
) -> _DenseBlock:
  """Returns Y @ Omega after `power_iterations` passes of X <- Y (Y^T X)."""
  omega = dense.gaussian_block(y.shape[1], width, seed)
  x = sparse.sp_mult(y, omega)
  for _ in range(power_iterations):
    # QR before every pass.
    x = dense.qr_orthonormal(x)
    x = sparse.sp_mult(y, sparse.sp_mult_t(y, x))
  return x


def _project_out(q: _DenseBlock, x: _DenseBlock) -> _DenseBlock:
  """Returns X - Q Q^T X, with a second pass if the first one left residue."""
  x = x - q @ (q.T @ x)
  x_norm = np.linalg.norm(x)
  if x_norm == 0.0:
    return x
  residue = np.linalg.norm(q.T @ x)
  if residue > constants.REORTHOGONALIZATION_RATIO * x_norm:
    x = x - q @ (q.T @ x)
  return x


def _coefficients(y: _SampledMatrix, q: _DenseBlock) -> _DenseBlock:
  """Returns B = Q^T Y computed as (Y^T Q)^T."""
  return sparse.sp_mult_t(y, q).T


def qb_init(
    y: _SampledMatrix, t: int, power_iterations: int, seed: utils.Seed
) -> QBState:
  """Builds the initial rank-t QB decomposition of Y.

  Args:
    y: The target matrix.
    t: Initial rank, 1 <= t <= min(m, n).
    power_iterations: Number of power passes on the Gaussian sketch.
    seed: Seed of the Gaussian sketch.

  Raises:
    ValueError: If t is outside [1, min(m, n)].
  """
  if not 1 <= t <= min(y.shape):
    raise ValueError(
        f'Initial sample count must be in [1, {min(y.shape)}], got {t}.'
    )
  x = _power_sketch(y, t, power_iterations, seed)
  q = dense.qr_orthonormal(x)
  b = _coefficients(y, q)
  return QBState(
      q=q,
      b=b,
      norm_b=dense.frob_norm_sq(b),
      frob_y2=sparse.sp_frob_norm_sq(y),
  )


def _recycled_state(y: _SampledMatrix, u_prev: _DenseBlock) -> QBState:
  """Builds a QB decomposition whose basis is a recycled `u_prev`."""
  q = np.asarray(u_prev, dtype=np.float64)
  drift = dense.orthonormality_error(q)
  if drift > constants.ORTHONORMALITY_TOLERANCE:
    logging.warning(
        'Recycled basis drifted from orthonormality by %.3g; '
        're-orthonormalizing.', drift)
    q = dense.qr_orthonormal(q)
  b = _coefficients(y, q)
  return QBState(
      q=q,
      b=b,
      norm_b=dense.frob_norm_sq(b),
      frob_y2=sparse.sp_frob_norm_sq(y),
  )


def qb_extend(
    state: QBState,
    y: _SampledMatrix,
    dt: int,
    power_iterations: int,
    seed: utils.Seed,
    max_rank: int | None = None,
) -> QBState:
  """Appends up to `dt` orthogonal samples to a QB decomposition.

  The new Gaussian sketch is power-iterated, orthogonalized against the
  current basis, orthonormalized, orthogonalized once more, and appended.
  The block B' = Q'^T Y is appended to B and ||B'||_F^2 added to `norm_b`, so
  the error percentage never increases.

  Args:
    state: Current decomposition of `y`.
    y: The target matrix.
    dt: Requested number of new columns; truncated to fit the rank limit.
    power_iterations: Number of power passes on the new sketch.
    seed: Seed of the new sketch.
    max_rank: Optional rank limit (defaults to min(m, n)).

  Returns:
    The extended state, or `state` flagged as saturated if the rank limit
    was already reached.
  """
  limit = min(y.shape) if max_rank is None else min(min(y.shape), max_rank)
  if state.rank >= limit:
    return dataclasses.replace(state, saturated=True)
  width = min(dt, limit - state.rank)
  x = _power_sketch(y, width, power_iterations, seed)
  x = _project_out(state.q, x)
  q_new = dense.qr_orthonormal(x)
  q_new = dense.qr_orthonormal(_project_out(state.q, q_new))
  cross = float(np.max(np.abs(state.q.T @ q_new))) if state.rank else 0.0
  if cross > constants.ORTHONORMALITY_TOLERANCE:
    logging.warning('Extension block is not orthogonal to the basis: %.3g.',
                    cross)
  b_new = _coefficients(y, q_new)
  norm_b = state.norm_b + dense.frob_norm_sq(b_new)
  logging.debug('QB extended to rank %d, captured energy %.6g of %.6g.',
                state.rank + width, norm_b, state.frob_y2)
  return QBState(
      q=np.hstack([state.q, q_new]),
      b=np.vstack([state.b, b_new]),
      norm_b=norm_b,
      frob_y2=state.frob_y2,
      rounds=state.rounds + 1,
      saturated=False,
  )


def finalize(state: QBState) -> _LowRankFactors:
  """Returns the SVD of Q @ B as factors of rank `state.rank`."""
  small = dense.small_svd(state.b)
  return _LowRankFactors(u=state.q @ small.u, sigma=small.sigma, v=small.v)


def _reveal_rank(
    state: QBState, y: _SampledMatrix, params: SketchParams
) -> SketchResult:
  """Extends `state` until its error percentage meets the threshold."""
  limit = params.rank_limit(y)
  eps = error_percentage(state)
  saturated = False
  while eps > params.eps_threshold:
    if state.rank >= limit:
      saturated = True
      logging.warning(
          'Sketch saturated at rank %d with error percentage %.3g > %.3g.',
          state.rank, eps, params.eps_threshold)
      break
    state = qb_extend(
        state,
        y,
        params.dt,
        params.power_iterations,
        utils.derive_seed(params.seed, state.rounds + 1),
        max_rank=limit,
    )
    eps = error_percentage(state)
  return SketchResult(
      factors=finalize(state),
      rank=state.rank,
      saturated=saturated,
      rounds=state.rounds,
      error_percentage=eps,
  )


def _zero_result(y: _SampledMatrix) -> SketchResult:
  return SketchResult(
      factors=_LowRankFactors.empty(*y.shape), rank=0, error_percentage=0.0
  )


def r3svd(y: _SampledMatrix, params: SketchParams) -> SketchResult:
  """Rank-revealing randomized SVD.

  Returns the factors of the smallest tried rank in {t, t + dt, t + 2 dt, ...}
  whose QB decomposition has error percentage <= `params.eps_threshold`. If
  the rank limit is reached first, the factors at the limit are returned with
  the saturation flag raised.

  Args:
    y: The target matrix.
    params: Sketch parameters (`oversampling` is not used).
  """
  if sparse.sp_frob_norm_sq(y) == 0.0:
    return _zero_result(y)
  limit = params.rank_limit(y)
  state = qb_init(
      y,
      min(params.t, limit),
      params.power_iterations,
      utils.derive_seed(params.seed, 0),
  )
  return _reveal_rank(state, y, params)


def r4svd(
    y: _SampledMatrix,
    u_prev: _DenseBlock | None,
    params: SketchParams,
) -> SketchResult:
  """Recycling rank-revealing randomized SVD.

  The QB decomposition starts from Q = `u_prev` (no power passes on the
  recycled basis) and is then extended exactly as in `r3svd`. Without a
  recycled basis this is `r3svd` with an initial sample count of `dt`.

  Args:
    y: The target matrix.
    u_prev: m x s matrix with orthonormal columns (re-orthonormalized if it
      drifted), typically the left singular vectors kept by the previous SVT
      iteration. None or s = 0 disables recycling.
    params: Sketch parameters (`t` and `oversampling` are not used).
  """
  if u_prev is None or u_prev.shape[1] == 0:
    return r3svd(y, dataclasses.replace(params, t=params.dt))
  if u_prev.shape[0] != y.shape[0]:
    raise ValueError(
        f'Recycled basis has {u_prev.shape[0]} rows, expected {y.shape[0]}.'
    )
  if sparse.sp_frob_norm_sq(y) == 0.0:
    return _zero_result(y)
  limit = params.rank_limit(y)
  state = _recycled_state(y, u_prev[:, :limit])
  return _reveal_rank(state, y, params)


def rsvd(y: _SampledMatrix, k: int, params: SketchParams) -> SketchResult:
  """Fixed-rank randomized SVD with Gaussian sampling.

  Args:
    y: The target matrix.
    k: Requested rank.
    params: Sketch parameters; `oversampling` and `power_iterations` are used.

  Raises:
    ValueError: If k < 1 or k + oversampling exceeds min(m, n).
  """
  width = k + params.oversampling
  if k < 1 or width > min(y.shape):
    raise ValueError(
        f'Need 1 <= k and k + oversampling <= {min(y.shape)}, got k={k} and '
        f'oversampling={params.oversampling}.'
    )
  x = _power_sketch(
      y, width, params.power_iterations, utils.derive_seed(params.seed, 0)
  )
  q = dense.qr_orthonormal(x)
  b = _coefficients(y, q)
  state = QBState(
      q=q,
      b=b,
      norm_b=dense.frob_norm_sq(b),
      frob_y2=sparse.sp_frob_norm_sq(y),
  )
  factors = finalize(state).truncate(k)
  captured = float(np.dot(factors.sigma, factors.sigma))
  eps = (
      max(0.0, (state.frob_y2 - captured) / state.frob_y2)
      if state.frob_y2 > 0
      else 0.0
  )
  return SketchResult(factors=factors, rank=k, error_percentage=eps)
