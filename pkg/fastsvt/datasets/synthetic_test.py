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
from fastsvt.datasets import synthetic
import numpy as np


class SyntheticTest(parameterized.TestCase, core_test_utils.MatrixAssertions):

  def test_geometric_spectrum(self):
    np.testing.assert_allclose(
        synthetic.geometric_spectrum(4, 0.5, scale=8.0), [8.0, 4.0, 2.0, 1.0]
    )

  @parameterized.parameters((0, 0.5), (3, 0.0), (3, 1.5))
  def test_geometric_spectrum_rejects(self, rank, ratio):
    with self.assertRaises(ValueError):
      synthetic.geometric_spectrum(rank, ratio)

  def test_random_factors(self):
    factors = synthetic.random_factors(30, 20, [3.0, 2.0, 1.0], seed=0)
    self.assertFactorsValid(factors)
    self.assertEqual(factors.shape, (30, 20))
    np.testing.assert_allclose(
        np.linalg.svd(factors.to_dense(), compute_uv=False)[:3],
        [3.0, 2.0, 1.0],
    )

  @parameterized.parameters(1, 4, 10)
  def test_low_rank_matrix_rank(self, rank):
    a = synthetic.low_rank_matrix(40, 25, rank, seed=rank)
    self.assertEqual(a.shape, (40, 25))
    self.assertEqual(np.linalg.matrix_rank(a), rank)

  def test_low_rank_matrix_with_spectrum(self):
    spectrum = synthetic.geometric_spectrum(5, 0.5, scale=10.0)
    a = synthetic.low_rank_matrix(20, 20, 5, seed=1, spectrum=spectrum)
    np.testing.assert_allclose(
        np.linalg.svd(a, compute_uv=False)[:5], spectrum
    )

  def test_low_rank_matrix_is_deterministic(self):
    np.testing.assert_array_equal(
        synthetic.low_rank_matrix(10, 8, 2, seed=[5, 1]),
        synthetic.low_rank_matrix(10, 8, 2, seed=[5, 1]),
    )

  def test_sample_matrix(self):
    a = synthetic.low_rank_matrix(20, 10, 2, seed=2)
    samples = synthetic.sample_matrix(a, 0.3, seed=3)
    self.assertEqual(samples.nnz, 60)
    np.testing.assert_array_equal(samples.values, a[samples.rows, samples.cols])

  def test_synthetic_low_rank_image(self):
    image = synthetic.synthetic_low_rank_image(64, 48, 4, seed=0)
    self.assertEqual((image.height, image.width), (64, 48))
    self.assertEqual(int(image.pixels.min()), 0)
    self.assertEqual(int(image.pixels.max()), 255)
    singular_values = np.linalg.svd(image.as_matrix(), compute_uv=False)
    # Rescaling adds a constant component and quantization a small tail.
    self.assertLess(singular_values[5], 0.05 * singular_values[0])

  def test_synthetic_ratings(self):
    dataset = synthetic.synthetic_ratings(
        40, 30, 3, density=0.25, seed=0, noise=0.1
    )
    self.assertEqual(dataset.shape, (40, 30))
    self.assertEqual(dataset.size, 300)
    self.assertEqual(dataset.user_ids[0], 1)
    low, high = dataset.rating_range
    self.assertGreaterEqual(low, 1.0)
    self.assertLessEqual(high, 5.0)

  def test_synthetic_ratings_rejects_scale(self):
    with self.assertRaises(ValueError):
      synthetic.synthetic_ratings(5, 5, 1, 0.5, seed=0, scale=(5.0, 1.0))


if __name__ == '__main__':
  absltest.main()
