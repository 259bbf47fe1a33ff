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

"""Storage and kernels for matrices supported on a sample set.

Both the observed data P_Lambda(A) and the SVT iterates Y(i) live on the same
fixed pattern Lambda. A `SampledMatrix` stores that pattern once as row-major
sorted triplets with a row-offset index (CSR), and every kernel below costs
O(ns * k) for ns stored entries and blocks with k columns. Nothing in this
module densifies, except the explicit `to_dense` used by test oracles.
"""

from __future__ import annotations

import dataclasses
import functools

from absl import logging
from fastsvt.core import dense
from fastsvt.core import utils
import numpy as np
import scipy.sparse


_DenseBlock = dense.DenseBlock


def _readonly(x: np.ndarray) -> np.ndarray:
  x.flags.writeable = False
  return x


@dataclasses.dataclass(frozen=True, eq=False)
class SampledMatrix:
  """An m x n matrix whose entries are known only on a sample set.

  Instances are immutable. Use `from_triplets` to build one from unsorted
  data, and `with_values` to attach new values to an existing pattern.

  Attributes:
    shape: The pair (m, n).
    rows: Row index of every stored entry, sorted row-major.
    cols: Column index of every stored entry.
    values: Value of every stored entry.
    indptr: Row offsets: entries of row i are at positions
      `indptr[i]:indptr[i + 1]`.
  """

  shape: tuple[int, int]
  rows: np.ndarray
  cols: np.ndarray
  values: np.ndarray
  indptr: np.ndarray

  @classmethod
  def from_triplets(
      cls,
      shape: tuple[int, int],
      rows: np.ndarray,
      cols: np.ndarray,
      values: np.ndarray,
  ) -> SampledMatrix:
    """Builds a sampled matrix from (row, column, value) triplets.

    Args:
      shape: The pair (m, n).
      rows: Integer row indices in [0, m).
      cols: Integer column indices in [0, n).
      values: Finite real values.

    Returns:
      The matrix with its triplets sorted row-major.

    Raises:
      ValueError: On empty input, out-of-range or duplicate indices,
        non-finite values, or inconsistent array lengths.
    """
    m, n = (int(d) for d in shape)
    if m < 1 or n < 1:
      raise ValueError(f'Matrix dimensions must be >= 1, got ({m}, {n}).')
    rows = np.asarray(rows, dtype=np.int64).ravel()
    cols = np.asarray(cols, dtype=np.int64).ravel()
    values = np.asarray(values, dtype=np.float64).ravel()
    if not rows.shape == cols.shape == values.shape:
      raise ValueError(
          f'Triplet arrays have different lengths: {rows.shape[0]} rows, '
          f'{cols.shape[0]} cols, {values.shape[0]} values.'
      )
    if rows.shape[0] == 0:
      raise ValueError('A sampled matrix needs at least one entry.')
    if rows.min() < 0 or rows.max() >= m:
      raise ValueError(f'Row index out of range [0, {m}).')
    if cols.min() < 0 or cols.max() >= n:
      raise ValueError(f'Column index out of range [0, {n}).')
    if not np.all(np.isfinite(values)):
      raise ValueError('Sampled values must be finite.')
    order = np.lexsort((cols, rows))
    rows, cols, values = rows[order], cols[order], values[order]
    duplicated = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
    if np.any(duplicated):
      first = int(np.flatnonzero(duplicated)[0])
      raise ValueError(
          f'Duplicate entry ({rows[first]}, {cols[first]}) in sampled matrix.'
      )
    indptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=m), out=indptr[1:])
    return cls(
        shape=(m, n),
        rows=_readonly(rows),
        cols=_readonly(cols),
        values=_readonly(values),
        indptr=_readonly(indptr),
    )

  @classmethod
  def from_dense_mask(cls, a: np.ndarray, mask: np.ndarray) -> SampledMatrix:
    """Builds P_Lambda(a) where Lambda is the set of True entries of mask."""
    a = np.asarray(a, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if a.shape != mask.shape or a.ndim != 2:
      raise ValueError(
          f'Matrix and mask shapes differ: {a.shape} vs {mask.shape}.'
      )
    rows, cols = np.nonzero(mask)
    return cls.from_triplets(a.shape, rows, cols, a[rows, cols])

  @property
  def nnz(self) -> int:
    """The number ns of stored entries."""
    return self.values.shape[0]

  @functools.cached_property
  def csr(self) -> scipy.sparse.csr_array:
    """The matrix as a scipy CSR array sharing this pattern."""
    return scipy.sparse.csr_array(
        (self.values, self.cols, self.indptr), shape=self.shape
    )

  def with_values(self, values: np.ndarray) -> SampledMatrix:
    """Returns a matrix on the same pattern with new values."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape != self.values.shape:
      raise ValueError(
          f'Expected {self.nnz} values for this pattern, got {values.shape}.'
      )
    if not np.all(np.isfinite(values)):
      raise ValueError('Sampled values must be finite.')
    return SampledMatrix(
        shape=self.shape,
        rows=self.rows,
        cols=self.cols,
        values=_readonly(values.copy()),
        indptr=self.indptr,
    )

  def same_pattern(self, other: SampledMatrix) -> bool:
    """Whether both matrices have the same shape and sample set."""
    if self.shape != other.shape:
      return False
    if self.rows is other.rows and self.cols is other.cols:
      return True
    return bool(
        np.array_equal(self.rows, other.rows)
        and np.array_equal(self.cols, other.cols)
    )

  def to_dense(self) -> np.ndarray:
    """Returns the m x n dense matrix with zeros off the pattern."""
    result = np.zeros(self.shape)
    result[self.rows, self.cols] = self.values
    return result


def _check_inner(s: SampledMatrix, x: _DenseBlock, inner: int) -> _DenseBlock:
  x = np.asarray(x, dtype=np.float64)
  if x.ndim != 2 or x.shape[0] != inner:
    raise ValueError(
        f'Dimension mismatch: sampled matrix of shape {s.shape} cannot be '
        f'applied to a block of shape {x.shape}.'
    )
  return x


def sp_mult(s: SampledMatrix, x: _DenseBlock) -> _DenseBlock:
  """Returns S @ X for an n x k block X."""
  x = _check_inner(s, x, s.shape[1])
  return np.asarray(s.csr @ x)


def sp_mult_t(s: SampledMatrix, x: _DenseBlock) -> _DenseBlock:
  """Returns S.T @ X for an m x k block X."""
  x = _check_inner(s, x, s.shape[0])
  return np.asarray(s.csr.T @ x)


def project_low_rank(
    pattern: SampledMatrix, factors: dense.LowRankFactors
) -> SampledMatrix:
  """Returns P_Lambda(U diag(sigma) V^T) on the pattern of `pattern`.

  Every stored value is sum_t U[i, t] * sigma[t] * V[j, t], computed in
  O(ns * r) without forming the dense product.

  Args:
    pattern: Provides the sample set Lambda (its values are ignored).
    factors: Low-rank factors of an m x n matrix.

  Raises:
    ValueError: If the factor dimensions do not match the pattern.
  """
  if factors.shape != pattern.shape:
    raise ValueError(
        f'Factors of shape {factors.shape} do not match pattern of shape '
        f'{pattern.shape}.'
    )
  if factors.rank == 0:
    return pattern.with_values(np.zeros(pattern.nnz))
  left = factors.u[pattern.rows] * factors.sigma
  values = np.einsum('ij,ij->i', left, factors.v[pattern.cols])
  return pattern.with_values(values)


def sp_axpy(
    y: SampledMatrix, alpha: float, d: SampledMatrix
) -> SampledMatrix:
  """Returns Y + alpha * D for two matrices sharing the same pattern."""
  if not y.same_pattern(d):
    raise ValueError('sp_axpy requires both operands to share one pattern.')
  return y.with_values(y.values + alpha * d.values)


def sp_frob_norm_sq(s: SampledMatrix) -> float:
  """Returns the sum of squared stored values."""
  return float(np.dot(s.values, s.values))


def sp_max_abs(s: SampledMatrix) -> float:
  """Returns the largest absolute stored value."""
  return float(np.max(np.abs(s.values)))


def spectral_norm_est(
    s: SampledMatrix, iters: int = 20, seed: utils.Seed = 0
) -> float:
  """Estimates the largest singular value by power iteration.

  Alternates S and S^T products on a seeded Gaussian start vector,
  renormalizing at each step. The returned value is ||S^T u|| for a unit
  vector u, hence never larger than the true largest singular value.

  Args:
    s: The sampled matrix.
    iters: Number of power iterations, >= 1.
    seed: Seed of the start vector.

  Raises:
    ValueError: If `iters` < 1.
  """
  if iters < 1:
    raise ValueError(f'iters must be >= 1, got {iters}.')
  v = dense.gaussian_block(s.shape[1], 1, seed)
  v /= np.linalg.norm(v)
  estimate = 0.0
  for _ in range(iters):
    u = sp_mult(s, v)
    u_norm = np.linalg.norm(u)
    if u_norm == 0.0:
      return 0.0
    u /= u_norm
    v = sp_mult_t(s, u)
    estimate = float(np.linalg.norm(v))
    if estimate == 0.0:
      return 0.0
    v /= estimate
  logging.debug('Spectral norm estimate %g after %d iterations.', estimate,
                iters)
  return estimate
