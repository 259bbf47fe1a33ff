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
from fastsvt.backends import sketch_backends
from fastsvt.core import core_test_utils
from fastsvt.core import dense
from fastsvt.core import sketching
from fastsvt.core import sparse
import numpy as np


def _low_rank_samples(m, n, rank, seed):
  u = dense.qr_orthonormal(dense.gaussian_block(m, rank, [seed, 0]))
  v = dense.qr_orthonormal(dense.gaussian_block(n, rank, [seed, 1]))
  a = (u * (0.8 ** np.arange(rank))) @ v.T
  return sparse.SampledMatrix.from_dense_mask(a, np.ones((m, n), dtype=bool))


class SketchBackendsTest(
    parameterized.TestCase, core_test_utils.MatrixAssertions
):

  def test_r4svd_without_recycle_is_r3svd_with_t0(self):
    y = _low_rank_samples(40, 30, 10, seed=0)
    backend = sketch_backends.R4svdBackend(t0=3, dt=2)
    result = backend.decompose(y, None, 0.1, seed=5)
    expected = sketching.r3svd(
        y, sketching.SketchParams(t=3, dt=2, eps_threshold=0.1, seed=5)
    )
    np.testing.assert_array_equal(result.factors.u, expected.factors.u)
    np.testing.assert_array_equal(result.factors.sigma, expected.factors.sigma)

  def test_r4svd_recycles(self):
    y = _low_rank_samples(40, 30, 10, seed=1)
    basis = sketching.r3svd(
        y, sketching.SketchParams(t=10, eps_threshold=0.01, seed=0)
    ).factors.u
    backend = sketch_backends.R4svdBackend(t0=1, dt=2)
    result = backend.decompose(y, basis, 0.01, seed=2)
    expected = sketching.r4svd(
        y, basis, sketching.SketchParams(t=1, dt=2, eps_threshold=0.01, seed=2)
    )
    np.testing.assert_array_equal(result.factors.u, expected.factors.u)

  def test_r3svd_ignores_recycle(self):
    y = _low_rank_samples(30, 30, 8, seed=2)
    backend = sketch_backends.R3svdBackend(t0=2, dt=2)
    with_basis = backend.decompose(y, np.eye(30, 4), 0.05, seed=1)
    without = backend.decompose(y, None, 0.05, seed=1)
    np.testing.assert_array_equal(with_basis.factors.u, without.factors.u)

  @parameterized.named_parameters(
      ('default_rank', None, 5, (9, 5)),
      ('given_rank', 4, 5, (4, 5)),
      ('oversampling_clamped', 28, 5, (28, 2)),
      ('rank_clamped', 50, 5, (30, 0)),
  )
  def test_rsvd_fixed_resolved_rank(self, fixed_rank, oversampling, expected):
    y = _low_rank_samples(40, 30, 10, seed=3)
    backend = sketch_backends.RsvdFixedBackend(
        fixed_rank=fixed_rank, oversampling=oversampling
    )
    self.assertEqual(backend.resolved_rank(y), expected)

  def test_rsvd_fixed_decompose(self):
    y = _low_rank_samples(40, 30, 6, seed=4)
    backend = sketch_backends.RsvdFixedBackend(fixed_rank=6)
    result = backend.decompose(y, None, 0.5, seed=0)
    self.assertEqual(result.rank, 6)
    self.assertArraysClose(
        result.factors.to_dense(), y.to_dense(), atol=1e-10
    )

  def test_max_rank_is_forwarded(self):
    y = _low_rank_samples(40, 30, 20, seed=5)
    backend = sketch_backends.R3svdBackend(t0=2, dt=2, max_rank=6)
    result = backend.decompose(y, None, 1e-6, seed=0)
    self.assertEqual(result.rank, 6)
    self.assertTrue(result.saturated)


if __name__ == '__main__':
  absltest.main()
