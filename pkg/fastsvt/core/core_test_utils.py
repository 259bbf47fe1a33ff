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

"""Utilities for FastSVT unit tests."""

import unittest

from fastsvt.core import dense
from fastsvt.core import sparse
from fastsvt.core import utils
import numpy as np


def random_sampled_matrix(
    m: int, n: int, density: float, seed: int = 0
) -> sparse.SampledMatrix:
  """Returns a matrix with Gaussian values on a random pattern."""
  rng = utils.make_rng([seed, 9999])
  mask = rng.random((m, n)) < density
  # At least one sample per matrix.
  mask[0, 0] = True
  return sparse.SampledMatrix.from_dense_mask(
      rng.standard_normal((m, n)), mask
  )


class MatrixAssertions(unittest.TestCase):
  """Mixin class for matrix assertions."""

  # pylint: disable=invalid-name
  def assertOrthonormalColumns(
      self, q: np.ndarray, tolerance: float = 1e-10
  ) -> None:
    error = dense.orthonormality_error(q)
    self.assertLessEqual(
        error, tolerance, f'Columns drift from orthonormality by {error}.'
    )

  def assertFactorsValid(self, factors: dense.LowRankFactors) -> None:
    self.assertOrthonormalColumns(factors.u, 1e-8)
    self.assertOrthonormalColumns(factors.v, 1e-8)
    if factors.rank:
      self.assertTrue(np.all(factors.sigma >= 0.0))
      self.assertTrue(np.all(np.diff(factors.sigma) <= 0.0))

  def assertSamePattern(
      self, first: sparse.SampledMatrix, second: sparse.SampledMatrix
  ) -> None:
    self.assertEqual(first.shape, second.shape)
    np.testing.assert_array_equal(first.rows, second.rows)
    np.testing.assert_array_equal(first.cols, second.cols)

  def assertArraysClose(
      self,
      actual: np.ndarray,
      expected: np.ndarray,
      rtol: float = 1e-10,
      atol: float = 1e-10,
  ) -> None:
    np.testing.assert_allclose(actual, expected, rtol=rtol, atol=atol)
