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

"""Dense linear algebra kernels used by every sketching path.

Dense blocks are plain two-dimensional float64 `np.ndarray`s. The functions in
this module are pure: they never modify their inputs and their outputs only
depend on their arguments (and on the seed for `gaussian_block`).
"""

from __future__ import annotations

import dataclasses
from typing import TypeAlias

from absl import logging
from fastsvt.core import utils
import numpy as np
import scipy.linalg


# An m x k float64 matrix (sketch, basis, or factor block).
DenseBlock: TypeAlias = np.ndarray


def check_dense_block(x: DenseBlock, name: str = 'block') -> DenseBlock:
  """Returns `x` as a float64 matrix after checking shape and finiteness.

  Args:
    x: Array-like with two dimensions.
    name: Name used in error messages.

  Raises:
    ValueError: If `x` is not two-dimensional, has a zero dimension or
      contains NaN/Inf values.
  """
  x = np.asarray(x, dtype=np.float64)
  if x.ndim != 2:
    raise ValueError(f'{name} must be two-dimensional, got shape {x.shape}.')
  if x.shape[0] < 1 or x.shape[1] < 1:
    raise ValueError(f'{name} must have non-zero dimensions, got {x.shape}.')
  if not np.all(np.isfinite(x)):
    raise ValueError(f'{name} contains non-finite values.')
  return x


@dataclasses.dataclass(frozen=True)
class LowRankFactors:
  """Represents the matrix U @ diag(sigma) @ V.T.

  Attributes:
    u: m x r matrix with orthonormal columns.
    sigma: Length-r vector of non-negative values sorted non-increasingly.
    v: n x r matrix with orthonormal columns.
  """

  u: DenseBlock
  sigma: np.ndarray
  v: DenseBlock

  def __post_init__(self):
    if self.u.ndim != 2 or self.v.ndim != 2 or self.sigma.ndim != 1:
      raise ValueError(
          'Expected two-dimensional u, v and one-dimensional sigma, got '
          f'{self.u.shape}, {self.v.shape} and {self.sigma.shape}.'
      )
    r = self.sigma.shape[0]
    if self.u.shape[1] != r or self.v.shape[1] != r:
      raise ValueError(
          f'Inconsistent ranks: u has {self.u.shape[1]} columns, sigma has '
          f'{r} values and v has {self.v.shape[1]} columns.'
      )
    if r and np.any(self.sigma < 0):
      raise ValueError('Singular values must be non-negative.')
    if r > 1 and np.any(np.diff(self.sigma) > 0):
      raise ValueError('Singular values must be sorted non-increasingly.')

  @classmethod
  def empty(cls, m: int, n: int) -> LowRankFactors:
    """Returns rank-0 factors of an m x n matrix (the zero matrix)."""
    return cls(u=np.zeros((m, 0)), sigma=np.zeros(0), v=np.zeros((n, 0)))

  @property
  def rank(self) -> int:
    return self.sigma.shape[0]

  @property
  def shape(self) -> tuple[int, int]:
    return self.u.shape[0], self.v.shape[0]

  def truncate(self, k: int) -> LowRankFactors:
    """Returns the leading k singular triplets."""
    k = max(0, min(k, self.rank))
    return LowRankFactors(
        u=self.u[:, :k], sigma=self.sigma[:k], v=self.v[:, :k]
    )

  def to_dense(self) -> np.ndarray:
    """Returns the m x n product (for tests and small matrices only)."""
    return (self.u * self.sigma) @ self.v.T


def gaussian_block(rows: int, cols: int, seed: utils.Seed) -> DenseBlock:
  """Returns a rows x cols matrix of i.i.d. standard normal entries.

  The entries come from numpy's PCG64 bit generator seeded through a
  `SeedSequence`, transformed with the ziggurat method of
  `Generator.standard_normal`. Identical arguments give identical blocks.

  Args:
    rows: Number of rows, >= 1.
    cols: Number of columns, >= 1.
    seed: Integer seed or sequence of integers (see `utils.derive_seed`).

  Raises:
    ValueError: If a dimension is smaller than 1.
  """
  if rows < 1 or cols < 1:
    raise ValueError(
        f'Gaussian block dimensions must be >= 1, got ({rows}, {cols}).'
    )
  return utils.make_rng(seed).standard_normal((rows, cols))


def qr_orthonormal(x: DenseBlock) -> DenseBlock:
  """Returns the economy-size orthonormal factor of a Householder QR.

  All k columns are kept even when `x` is rank-deficient: the extra columns
  are orthonormal directions that carry no energy of `x`.

  Args:
    x: m x k matrix with k <= m.

  Raises:
    ValueError: If k > m or `x` contains non-finite values.
  """
  x = check_dense_block(x, 'QR input')
  m, k = x.shape
  if k > m:
    raise ValueError(f'QR input must be tall (k <= m), got shape {x.shape}.')
  q, _ = scipy.linalg.qr(x, mode='economic', check_finite=False)
  return q


def small_svd(b: DenseBlock) -> LowRankFactors:
  """Returns the thin SVD of a (typically wide) block.

  Args:
    b: r x n matrix.

  Raises:
    ValueError: If `b` contains non-finite values.
  """
  b = check_dense_block(b, 'SVD input')
  try:
    u, s, vt = scipy.linalg.svd(
        b, full_matrices=False, check_finite=False, lapack_driver='gesdd'
    )
  except np.linalg.LinAlgError:
    logging.warning('gesdd did not converge on a %s block; using gesvd.',
                    b.shape)
    u, s, vt = scipy.linalg.svd(
        b, full_matrices=False, check_finite=False, lapack_driver='gesvd'
    )
  return LowRankFactors(u=u, sigma=s, v=vt.T)


def frob_norm_sq(x: DenseBlock) -> float:
  """Returns the sum of squared entries of `x`."""
  x = np.asarray(x, dtype=np.float64)
  flat = x.ravel()
  return float(np.dot(flat, flat))


def orthonormality_error(q: DenseBlock) -> float:
  """Returns max |Q^T Q - I| (0 for a block without columns)."""
  if q.shape[1] == 0:
    return 0.0
  gram = q.T @ q
  gram[np.diag_indices_from(gram)] -= 1.0
  return float(np.max(np.abs(gram)))
