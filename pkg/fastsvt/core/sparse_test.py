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

from absl.testing import absltest
from absl.testing import parameterized
from fastsvt.core import core_test_utils
from fastsvt.core import dense
from fastsvt.core import sparse
import numpy as np


def _small_matrix() -> sparse.SampledMatrix:
  # [[0, 1, 0],
  #  [2, 0, 3]] with the zero at (0, 0) stored explicitly.
  return sparse.SampledMatrix.from_triplets(
      (2, 3),
      rows=[1, 0, 1, 0],
      cols=[2, 1, 0, 0],
      values=[3.0, 1.0, 2.0, 0.0],
  )


class SampledMatrixTest(
    parameterized.TestCase, core_test_utils.MatrixAssertions
):

  def test_from_triplets_sorts_row_major(self):
    s = _small_matrix()

    with self.subTest('triplets'):
      np.testing.assert_array_equal(s.rows, [0, 0, 1, 1])
      np.testing.assert_array_equal(s.cols, [0, 1, 0, 2])
      np.testing.assert_array_equal(s.values, [0.0, 1.0, 2.0, 3.0])

    with self.subTest('indptr'):
      np.testing.assert_array_equal(s.indptr, [0, 2, 4])

    with self.subTest('nnz_counts_explicit_zeros'):
      self.assertEqual(s.nnz, 4)

    with self.subTest('to_dense'):
      np.testing.assert_array_equal(
          s.to_dense(), np.array([[0.0, 1.0, 0.0], [2.0, 0.0, 3.0]])
      )

  def test_is_immutable(self):
    s = _small_matrix()
    with self.assertRaises(ValueError):
      s.values[0] = 5.0

  def test_from_dense_mask(self):
    a = np.arange(6.0).reshape(2, 3)
    mask = np.array([[True, False, True], [False, True, False]])
    s = sparse.SampledMatrix.from_dense_mask(a, mask)
    np.testing.assert_array_equal(s.values, [0.0, 2.0, 4.0])
    np.testing.assert_array_equal(s.to_dense(), np.where(mask, a, 0.0))

  @parameterized.named_parameters(
      ('duplicate', (2, 2), [0, 0], [1, 1], [1.0, 2.0], 'Duplicate'),
      ('row_out_of_range', (2, 2), [2], [0], [1.0], 'Row index'),
      ('negative_col', (2, 2), [0], [-1], [1.0], 'Column index'),
      ('nan_value', (2, 2), [0], [0], [np.nan], 'finite'),
      ('inf_value', (2, 2), [0], [0], [np.inf], 'finite'),
      ('empty', (2, 2), [], [], [], 'at least one'),
      ('length_mismatch', (2, 2), [0, 1], [0], [1.0], 'lengths'),
      ('zero_dimension', (0, 2), [0], [0], [1.0], 'dimensions'),
  )
  def test_from_triplets_rejects(self, shape, rows, cols, values, message):
    with self.assertRaisesRegex(ValueError, message):
      sparse.SampledMatrix.from_triplets(shape, rows, cols, values)

  def test_with_values_keeps_pattern(self):
    s = _small_matrix()
    t = s.with_values(np.ones(4))

    with self.subTest('same_pattern'):
      self.assertTrue(s.same_pattern(t))
      self.assertIs(t.rows, s.rows)

    with self.subTest('new_values'):
      np.testing.assert_array_equal(t.values, np.ones(4))
      np.testing.assert_array_equal(s.values, [0.0, 1.0, 2.0, 3.0])

    with self.subTest('rejects_wrong_length'):
      with self.assertRaises(ValueError):
        s.with_values(np.ones(3))

  def test_same_pattern(self):
    s = _small_matrix()
    rebuilt = sparse.SampledMatrix.from_triplets(
        (2, 3), [0, 0, 1, 1], [0, 1, 0, 2], [9.0, 9.0, 9.0, 9.0]
    )
    other = sparse.SampledMatrix.from_triplets((2, 3), [0], [0], [1.0])
    self.assertTrue(s.same_pattern(rebuilt))
    self.assertFalse(s.same_pattern(other))

  def test_csr_matches_dense(self):
    s = core_test_utils.random_sampled_matrix(7, 5, 0.4, seed=3)
    np.testing.assert_array_equal(s.csr.toarray(), s.to_dense())


class KernelsTest(parameterized.TestCase, core_test_utils.MatrixAssertions):

  @parameterized.named_parameters(
      ('sparse', 30, 20, 0.1),
      ('dense', 12, 15, 1.0),
      ('single_row', 1, 8, 0.5),
  )
  def test_products_match_dense_oracle(self, m, n, density):
    s = core_test_utils.random_sampled_matrix(m, n, density, seed=1)
    a = s.to_dense()

    with self.subTest('sp_mult'):
      x = dense.gaussian_block(n, 4, seed=2)
      self.assertArraysClose(sparse.sp_mult(s, x), a @ x, atol=1e-12)

    with self.subTest('sp_mult_t'):
      x = dense.gaussian_block(m, 3, seed=3)
      self.assertArraysClose(sparse.sp_mult_t(s, x), a.T @ x, atol=1e-12)

  def test_sp_mult_dimension_mismatch(self):
    s = _small_matrix()
    with self.assertRaisesRegex(ValueError, 'Dimension mismatch'):
      sparse.sp_mult(s, np.ones((2, 1)))
    with self.assertRaisesRegex(ValueError, 'Dimension mismatch'):
      sparse.sp_mult_t(s, np.ones((3, 1)))

  def test_project_low_rank_matches_dense_oracle(self):
    s = core_test_utils.random_sampled_matrix(20, 15, 0.3, seed=4)
    factors = dense.small_svd(dense.gaussian_block(20, 15, seed=5)).truncate(3)
    projected = sparse.project_low_rank(s, factors)

    with self.subTest('same_pattern'):
      self.assertSamePattern(projected, s)

    with self.subTest('values'):
      expected = factors.to_dense()[s.rows, s.cols]
      self.assertArraysClose(projected.values, expected, atol=1e-12)

  def test_project_low_rank_of_rank_zero_is_zero(self):
    s = _small_matrix()
    projected = sparse.project_low_rank(s, dense.LowRankFactors.empty(2, 3))
    np.testing.assert_array_equal(projected.values, np.zeros(4))

  def test_project_low_rank_rejects_wrong_shape(self):
    with self.assertRaises(ValueError):
      sparse.project_low_rank(
          _small_matrix(), dense.LowRankFactors.empty(3, 3)
      )

  def test_sp_axpy(self):
    s = _small_matrix()
    d = s.with_values(np.ones(4))
    np.testing.assert_array_equal(
        sparse.sp_axpy(s, 2.0, d).values, [2.0, 3.0, 4.0, 5.0]
    )

  def test_sp_axpy_rejects_other_pattern(self):
    s = _small_matrix()
    other = sparse.SampledMatrix.from_triplets((2, 3), [0], [0], [1.0])
    with self.assertRaisesRegex(ValueError, 'pattern'):
      sparse.sp_axpy(s, 1.0, other)

  def test_norms(self):
    s = sparse.SampledMatrix.from_triplets(
        (2, 2), [0, 1], [0, 1], [3.0, -4.0]
    )
    self.assertEqual(sparse.sp_frob_norm_sq(s), 25.0)
    self.assertEqual(sparse.sp_max_abs(s), 4.0)

  def test_spectral_norm_est(self):
    # Well separated spectrum: the power iteration converges quickly.
    factors = dense.LowRankFactors(
        u=dense.qr_orthonormal(dense.gaussian_block(30, 3, seed=6)),
        sigma=np.array([10.0, 3.0, 1.0]),
        v=dense.qr_orthonormal(dense.gaussian_block(25, 3, seed=7)),
    )
    s = sparse.SampledMatrix.from_dense_mask(
        factors.to_dense(), np.ones((30, 25), dtype=bool)
    )
    estimate = sparse.spectral_norm_est(s, iters=20, seed=0)

    with self.subTest('close_to_largest_singular_value'):
      self.assertAlmostEqual(estimate, 10.0, delta=1e-6)

    with self.subTest('never_above'):
      self.assertLessEqual(estimate, 10.0 + 1e-12)

    with self.subTest('deterministic'):
      self.assertEqual(estimate, sparse.spectral_norm_est(s, 20, seed=0))

  def test_spectral_norm_est_of_scalar(self):
    s = sparse.SampledMatrix.from_triplets((1, 1), [0], [0], [3.0])
    self.assertAlmostEqual(sparse.spectral_norm_est(s), 3.0)

  def test_spectral_norm_est_of_zero_matrix(self):
    s = sparse.SampledMatrix.from_triplets((2, 2), [0], [1], [0.0])
    self.assertEqual(sparse.spectral_norm_est(s), 0.0)

  def test_spectral_norm_est_rejects_zero_iterations(self):
    with self.assertRaises(ValueError):
      sparse.spectral_norm_est(_small_matrix(), iters=0)


if __name__ == '__main__':
  absltest.main()
