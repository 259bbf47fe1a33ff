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

import dataclasses
import math

from absl.testing import absltest
from absl.testing import parameterized
from fastsvt import svt
from fastsvt.backends import backends_base
from fastsvt.backends import sketch_backends
from fastsvt.core import core_test_utils
from fastsvt.core import dense
from fastsvt.core import sketching
from fastsvt.core import sparse
from fastsvt.datasets import synthetic
import numpy as np


_NEVER = svt.StoppingRule(svt.StopKind.RESIDUAL, 0.0)


def _first_samples(m, n, count):
  positions = np.arange(count)
  rows, cols = np.divmod(positions, n)
  return sparse.SampledMatrix.from_triplets(
      (m, n), rows, cols, np.ones(count)
  )


def _rank_one(m, n, seed):
  u = dense.gaussian_block(m, 1, [seed, 0])
  v = dense.gaussian_block(n, 1, [seed, 1])
  return u @ v.T


def _fully_sampled(a):
  return sparse.SampledMatrix.from_dense_mask(a, np.ones(a.shape, bool))


@dataclasses.dataclass
class _RecordingBackend(sketch_backends.R4svdBackend):
  """Keeps every iterate handed to the partial SVD."""

  iterates: list[sparse.SampledMatrix] = dataclasses.field(
      default_factory=list
  )

  def decompose(self, y, recycle, eps_threshold, seed):
    self.iterates.append(y)
    return super().decompose(y, recycle, eps_threshold, seed)


@dataclasses.dataclass
class _ExplodingBackend(sketch_backends.R4svdBackend):
  """Returns a rank-one matrix too large to square."""

  def decompose(self, y, recycle, eps_threshold, seed):
    m, n = y.shape
    factors = dense.LowRankFactors(
        u=np.full((m, 1), 1.0 / math.sqrt(m)),
        sigma=np.array([1e300]),
        v=np.full((n, 1), 1.0 / math.sqrt(n)),
    )
    return sketching.SketchResult(factors=factors, rank=1)


class DefaultConfigTest(parameterized.TestCase):

  def test_step_size_and_initial_samples(self):
    samples = _first_samples(512, 512, 52429)
    cfg = svt.default_config(samples)

    with self.subTest('delta'):
      self.assertAlmostEqual(cfg.delta, 2.236, places=3)

    with self.subTest('t0'):
      self.assertEqual(cfg.t0, 25)

    with self.subTest('dt_and_beta'):
      self.assertEqual(cfg.dt, 10)
      self.assertEqual(cfg.beta, 0.95)

  def test_tau_is_frobenius_norm_of_samples(self):
    samples = sparse.SampledMatrix.from_triplets(
        (3, 3), [0, 2], [1, 0], [3.0, 4.0]
    )
    cfg = svt.default_config(samples)
    self.assertEqual(cfg.tau, 5.0)
    self.assertAlmostEqual(cfg.eps_stop, 5e-4)
    self.assertEqual(cfg.eps_threshold0, 0.5)

  def test_t0_is_at_least_one(self):
    self.assertEqual(svt.default_config(_first_samples(10, 10, 5)).t0, 1)

  def test_overrides(self):
    samples = _first_samples(20, 20, 40)

    with self.subTest('tau_rescales_eps_stop'):
      cfg = svt.default_config(samples, tau=2.0)
      self.assertEqual(cfg.tau, 2.0)
      self.assertAlmostEqual(cfg.eps_stop, 2e-4)

    with self.subTest('explicit_eps_stop'):
      cfg = svt.default_config(samples, tau=2.0, eps_stop=0.5)
      self.assertEqual(cfg.eps_stop, 0.5)

    with self.subTest('none_is_ignored'):
      cfg = svt.default_config(samples, delta=None, maxit=7)
      self.assertEqual(cfg.delta, math.sqrt(10.0))
      self.assertEqual(cfg.maxit, 7)

    with self.subTest('residual_source_from_string'):
      cfg = svt.default_config(samples, residual_source='dual')
      self.assertEqual(cfg.residual_source, svt.ResidualSource.DUAL)

  def test_rejects_zero_samples(self):
    samples = sparse.SampledMatrix.from_triplets((2, 2), [0], [0], [0.0])
    with self.assertRaisesRegex(ValueError, 'zero'):
      svt.default_config(samples)


class SvtConfigTest(parameterized.TestCase):

  @parameterized.named_parameters(
      ('zero_tau', {'tau': 0.0}),
      ('negative_delta', {'delta': -1.0}),
      ('beta_one', {'beta': 1.0}),
      ('beta_zero', {'beta': 0.0}),
      ('eps_threshold0_one', {'eps_threshold0': 1.0}),
      ('zero_maxit', {'maxit': 0}),
      ('zero_dt', {'dt': 0}),
      ('zero_t0', {'t0': 0}),
      ('negative_power_iterations', {'power_iterations': -1}),
      ('negative_eps_stop', {'eps_stop': -1.0}),
      ('zero_max_rank', {'max_rank': 0}),
      ('unknown_residual_source', {'residual_source': 'primal'}),
  )
  def test_rejects_invalid(self, overrides):
    kwargs = {'tau': 1.0, 'delta': 1.0}
    kwargs.update(overrides)
    with self.assertRaises(ValueError):
      svt.SvtConfig(**kwargs)

  def test_json_round_trip(self):
    cfg = svt.SvtConfig(
        tau=3.5,
        delta=1.25,
        max_rank=12,
        residual_source=svt.ResidualSource.DUAL,
    )
    self.assertEqual(svt.SvtConfig.from_json(cfg.to_json()), cfg)


class ShrinkTest(parameterized.TestCase):

  def _factors(self, sigma):
    k = len(sigma)
    return dense.LowRankFactors(
        u=np.eye(5, k), sigma=np.asarray(sigma, dtype=float), v=np.eye(4, k)
    )

  def test_subtracts_and_drops(self):
    shrunk = svt.shrink(self._factors([5.0, 3.0, 1.0]), 2.0)
    np.testing.assert_array_equal(shrunk.sigma, [3.0, 1.0])
    self.assertEqual(shrunk.rank, 2)
    self.assertEqual(shrunk.u.shape, (5, 2))

  @parameterized.named_parameters(
      ('above_max', 6.0),
      ('equal_to_max', 5.0),
  )
  def test_large_threshold_gives_rank_zero(self, tau):
    shrunk = svt.shrink(self._factors([5.0, 3.0]), tau)
    self.assertEqual(shrunk.rank, 0)
    self.assertEqual(shrunk.shape, (5, 4))

  def test_threshold_is_strict(self):
    shrunk = svt.shrink(self._factors([5.0, 3.0, 1.0]), 3.0)
    np.testing.assert_array_equal(shrunk.sigma, [2.0])

  def test_zero_threshold_is_identity(self):
    factors = self._factors([5.0, 3.0, 1.0])
    self.assertIs(svt.shrink(factors, 0.0), factors)

  def test_result_is_positive(self):
    sigma = np.sort(dense.gaussian_block(20, 1, seed=0)[:, 0] ** 2)[::-1]
    shrunk = svt.shrink(self._factors(sigma[:4]), float(np.median(sigma)))
    self.assertTrue(np.all(shrunk.sigma > 0.0))

  def test_rejects_negative_threshold(self):
    with self.assertRaises(ValueError):
      svt.shrink(self._factors([1.0]), -1.0)


class KickstartTest(parameterized.TestCase, core_test_utils.MatrixAssertions):

  def test_scales_by_ceiling(self):
    # The largest singular value of diag(3, 1) is 3: k0 = ceil(10 / 3) = 4.
    samples = sparse.SampledMatrix.from_triplets(
        (2, 2), [0, 1], [0, 1], [3.0, 1.0]
    )
    y = svt.kickstart(samples, tau=10.0, delta=1.0, seed=0)
    np.testing.assert_allclose(y.values, [12.0, 4.0])

  def test_small_threshold_gives_one_step(self):
    samples = core_test_utils.random_sampled_matrix(10, 8, 0.5, seed=1)
    y = svt.kickstart(samples, tau=1e-3, delta=1.5, seed=0)
    np.testing.assert_array_equal(y.values, 1.5 * samples.values)

  def test_keeps_pattern(self):
    samples = core_test_utils.random_sampled_matrix(30, 20, 0.2, seed=2)
    y = svt.kickstart(samples, tau=50.0, delta=2.0, seed=3)
    self.assertSamePattern(y, samples)


class MetricsTest(parameterized.TestCase):

  def test_residual(self):
    samples = core_test_utils.random_sampled_matrix(12, 9, 0.4, seed=0)

    with self.subTest('equal_is_zero'):
      self.assertEqual(svt.residual(samples, samples), 0.0)

    with self.subTest('single_sample'):
      a = sparse.SampledMatrix.from_triplets((2, 2), [1], [1], [3.0])
      self.assertEqual(svt.residual(a, a.with_values([0.0])), 3.0)

    with self.subTest('dense_oracle'):
      y = samples.with_values(
          dense.gaussian_block(samples.nnz, 1, seed=1)[:, 0]
      )
      self.assertAlmostEqual(
          svt.residual(samples, y),
          np.linalg.norm(samples.to_dense() - y.to_dense()),
          places=12,
      )

    with self.subTest('other_pattern'):
      other = core_test_utils.random_sampled_matrix(12, 9, 0.4, seed=5)
      with self.assertRaises(ValueError):
        svt.residual(samples, other)

  def test_train_mae(self):
    with self.subTest('exact_factors'):
      a = _rank_one(8, 6, seed=0)
      samples = _fully_sampled(a)
      factors = dense.small_svd(a).truncate(1)
      self.assertLess(svt.train_mae(samples, factors), 1e-12)

    with self.subTest('single_sample'):
      samples = sparse.SampledMatrix.from_triplets((1, 1), [0], [0], [3.0])
      factors = dense.LowRankFactors(
          u=np.ones((1, 1)), sigma=np.array([1.0]), v=np.ones((1, 1))
      )
      self.assertEqual(svt.train_mae(samples, factors), 2.0)

    with self.subTest('dense_oracle'):
      samples = core_test_utils.random_sampled_matrix(15, 10, 0.3, seed=2)
      factors = dense.small_svd(
          dense.gaussian_block(15, 10, seed=3)
      ).truncate(4)
      predicted = factors.to_dense()[samples.rows, samples.cols]
      expected = np.mean(np.abs(samples.values - predicted))
      self.assertAlmostEqual(
          svt.train_mae(samples, factors), expected, delta=1e-12
      )


class SvtRunTest(parameterized.TestCase, core_test_utils.MatrixAssertions):

  def test_scalar_matrix_passes_through_rank_zero(self):
    samples = sparse.SampledMatrix.from_triplets((1, 1), [0], [0], [3.0])
    result = svt.svt_run(samples, svt.default_config(samples))

    self.assertTrue(result.converged)
    self.assertEqual(result.stop_reason, 'residual')
    self.assertLen(result.trace, 2)
    self.assertEqual(result.trace[0].rank, 0)
    self.assertEqual(result.trace[0].residual, 3.0)
    self.assertAlmostEqual(float(result.factors.to_dense()[0, 0]), 3.0)

  @parameterized.named_parameters(
      ('r4svd', 'r4svd'),
      ('r3svd', 'r3svd'),
      ('rsvd_fixed', 'rsvd-fixed'),
      ('full_oracle', 'full-oracle'),
  )
  def test_fully_observed_rank_one(self, backend):
    a = _rank_one(20, 15, seed=1)
    samples = _fully_sampled(a)
    result = svt.svt_run(
        samples, svt.default_config(samples, maxit=20), backend=backend
    )

    self.assertTrue(result.converged)
    self.assertEqual(result.factors.rank, 1)
    self.assertLess(result.trace[-1].train_mae, 1e-8)
    self.assertArraysClose(result.factors.to_dense(), a, atol=1e-8)

  def test_fully_observed_rank_one_matches_oracle(self):
    a = _rank_one(25, 20, seed=2)
    samples = _fully_sampled(a)
    cfg = svt.default_config(samples, maxit=20)
    fast = svt.svt_run(samples, cfg)
    oracle = svt.svt_run_oracle(samples, cfg)
    self.assertArraysClose(
        fast.factors.to_dense(), oracle.factors.to_dense(), atol=1e-8
    )

  def test_recovers_low_rank_matrix(self):
    a = synthetic.low_rank_matrix(200, 200, 10, seed=3)
    samples = synthetic.sample_matrix(a, 0.4, seed=4)
    cfg = svt.default_config(samples, tau=5.0 * 200, maxit=1000, seed=5)
    stop = svt.StoppingRule(svt.StopKind.TRAIN_MAE, 1e-3)

    fast = svt.svt_run(samples, cfg, stop)
    oracle = svt.svt_run_oracle(samples, cfg, stop)

    with self.subTest('converged'):
      self.assertTrue(fast.converged)
      self.assertTrue(oracle.converged)

    with self.subTest('relative_error'):
      error = np.linalg.norm(fast.factors.to_dense() - a) / np.linalg.norm(a)
      self.assertLessEqual(error, 1e-2)

    with self.subTest('rank_close_to_oracle'):
      self.assertLessEqual(
          abs(fast.factors.rank - oracle.factors.rank), 3
      )

  def test_backend_consistency(self):
    a = synthetic.low_rank_matrix(100, 100, 5, seed=6)
    samples = synthetic.sample_matrix(a, 0.5, seed=7)
    cfg = svt.default_config(samples, maxit=50)
    fast = svt.svt_run(samples, cfg, _NEVER)
    oracle = svt.svt_run_oracle(samples, cfg, _NEVER)
    self.assertLen(fast.trace, 50)
    self.assertLen(oracle.trace, 50)
    self.assertLessEqual(
        abs(fast.trace[-1].train_mae - oracle.trace[-1].train_mae), 5e-2
    )
    self.assertLess(oracle.trace[-1].residual, oracle.trace[0].residual)

  @parameterized.parameters(range(10))
  def test_cooling_schedule(self, seed):
    a = synthetic.low_rank_matrix(60, 50, 3, seed=[seed, 10])
    samples = synthetic.sample_matrix(a, 0.3, seed=[seed, 11])
    cfg = svt.default_config(samples, maxit=40, seed=seed)
    trace = svt.svt_run(samples, cfg, _NEVER).trace

    best = math.inf
    previous = cfg.eps_threshold0
    for record in trace:
      if record.residual < best:
        expected = previous
        best = record.residual
      else:
        expected = cfg.beta * previous
      with self.subTest(f'iteration_{record.iteration}'):
        self.assertEqual(record.eps_threshold, expected)
        self.assertLessEqual(record.eps_threshold, previous)
      previous = record.eps_threshold

  def test_trace_records(self):
    a = synthetic.low_rank_matrix(40, 30, 2, seed=8)
    samples = synthetic.sample_matrix(a, 0.5, seed=9)
    result = svt.svt_run(samples, svt.default_config(samples, maxit=15))
    iterations = [r.iteration for r in result.trace]
    self.assertEqual(iterations, list(range(1, len(result.trace) + 1)))
    for record in result.trace:
      with self.subTest(f'iteration_{record.iteration}'):
        self.assertTrue(
            all(
                math.isfinite(v)
                for v in (
                    record.residual,
                    record.eps_threshold,
                    record.train_mae,
                    record.sketch_ms,
                    record.total_ms,
                )
            )
        )
        self.assertGreaterEqual(record.sketch_rank, record.rank)
    totals = [r.total_ms for r in result.trace]
    self.assertEqual(totals, sorted(totals))

  def test_maxit_returns_best_iteration(self):
    a = synthetic.low_rank_matrix(40, 40, 4, seed=10)
    samples = synthetic.sample_matrix(a, 0.3, seed=11)
    cfg = svt.default_config(samples, maxit=6)
    result = svt.svt_run(samples, cfg, _NEVER)

    self.assertFalse(result.converged)
    self.assertEqual(result.stop_reason, 'maxit')
    self.assertLen(result.trace, 6)
    residuals = [r.residual for r in result.trace]
    self.assertEqual(result.best_iteration, int(np.argmin(residuals)) + 1)
    self.assertEqual(
        result.factors.rank, result.trace[result.best_iteration - 1].rank
    )
    self.assertIs(result.config, cfg)

  def test_monitor_can_record_and_stop(self):
    a = synthetic.low_rank_matrix(30, 30, 2, seed=12)
    samples = synthetic.sample_matrix(a, 0.5, seed=13)
    seen = []

    def monitor(record, factors):
      record.test_mae = float(factors.rank)
      seen.append(record.iteration)
      return record.iteration == 3

    result = svt.svt_run(
        samples, svt.default_config(samples), _NEVER, monitor=monitor
    )
    self.assertTrue(result.converged)
    self.assertEqual(result.stop_reason, 'monitor')
    self.assertEqual(seen, [1, 2, 3])
    self.assertEqual(
        [r.test_mae for r in result.trace],
        [float(r.rank) for r in result.trace],
    )

  def test_train_mae_stop(self):
    a = _rank_one(20, 20, seed=14)
    samples = _fully_sampled(a)
    stop = svt.StoppingRule(svt.StopKind.TRAIN_MAE, 1e-6)
    result = svt.svt_run(samples, svt.default_config(samples), stop)
    self.assertEqual(result.stop_reason, 'train_mae')
    self.assertLess(result.trace[-1].train_mae, 1e-6)

  def test_is_deterministic(self):
    a = synthetic.low_rank_matrix(50, 40, 3, seed=15)
    samples = synthetic.sample_matrix(a, 0.4, seed=16)
    cfg = svt.default_config(samples, maxit=10, seed=4)
    first = svt.svt_run(samples, cfg, _NEVER)
    second = svt.svt_run(samples, cfg, _NEVER)
    for key in ('rank', 'residual', 'eps_threshold', 'train_mae'):
      with self.subTest(key):
        self.assertEqual(
            [getattr(r, key) for r in first.trace],
            [getattr(r, key) for r in second.trace],
        )

  def test_dual_residual_source(self):
    a = synthetic.low_rank_matrix(30, 20, 2, seed=17)
    samples = synthetic.sample_matrix(a, 0.5, seed=18)
    cfg = svt.default_config(samples, maxit=1, residual_source='dual')
    y0 = svt.kickstart(
        samples, cfg.tau, cfg.delta, seed=[cfg.seed, 0]
    )
    result = svt.svt_run(samples, cfg, _NEVER)
    self.assertAlmostEqual(
        result.trace[0].residual, svt.residual(samples, y0), places=10
    )

  def test_backend_instance(self):
    a = _rank_one(10, 10, seed=19)
    samples = _fully_sampled(a)
    cfg = svt.default_config(samples)
    backend = backends_base.make_backend('full-oracle')
    result = svt.svt_run(samples, cfg, backend=backend)
    self.assertTrue(result.converged)

  def test_iterates_keep_support_and_bounded_steps(self):
    a = synthetic.low_rank_matrix(40, 30, 3, seed=21)
    samples = synthetic.sample_matrix(a, 0.4, seed=22)
    cfg = svt.default_config(samples, maxit=25)
    backend = _RecordingBackend()
    result = svt.svt_run(samples, cfg, _NEVER, backend=backend)
    self.assertLen(backend.iterates, 25)

    for i, y in enumerate(backend.iterates):
      with self.subTest(f'support_{i}'):
        self.assertTrue(samples.same_pattern(y))

    steps = zip(backend.iterates, backend.iterates[1:], result.trace)
    for previous, current, record in steps:
      with self.subTest(f'step_{record.iteration}'):
        step = np.linalg.norm(current.values - previous.values)
        bound = cfg.delta * record.residual
        self.assertLessEqual(step, bound * (1.0 + 1e-9) + 1e-12)

  def test_divergence_raises(self):
    samples = _fully_sampled(_rank_one(8, 6, seed=23))
    cfg = svt.default_config(samples, maxit=5)
    with self.assertRaisesRegex(ValueError, 'diverged at iteration 1'):
      svt.svt_run(samples, cfg, _NEVER, backend=_ExplodingBackend())

  def test_stopping_rule_rejects_negative_tolerance(self):
    with self.assertRaises(ValueError):
      svt.StoppingRule(svt.StopKind.RESIDUAL, -1.0)

  def test_result_config_matches(self):
    samples = _fully_sampled(_rank_one(6, 6, seed=20))
    cfg = dataclasses.replace(svt.default_config(samples), maxit=3)
    self.assertEqual(svt.svt_run(samples, cfg).config.maxit, 3)


if __name__ == '__main__':
  absltest.main()
