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

"""Seeded synthetic data: low-rank matrices, images and ratings."""

from collections.abc import Sequence
import math

from fastsvt.core import dense
from fastsvt.core import sparse
from fastsvt.core import utils
from fastsvt.datasets import images
from fastsvt.datasets import ratings as ratings_lib
import numpy as np


def geometric_spectrum(
    rank: int, ratio: float, scale: float = 1.0
) -> np.ndarray:
  """Returns the singular values scale * ratio**j for j = 0..rank-1."""
  if rank < 1 or not 0.0 < ratio <= 1.0:
    raise ValueError(
        f'Need rank >= 1 and ratio in (0, 1], got {rank} and {ratio}.'
    )
  return scale * ratio ** np.arange(rank, dtype=np.float64)


def random_factors(
    m: int,
    n: int,
    spectrum: Sequence[float] | np.ndarray,
    seed: utils.Seed,
) -> dense.LowRankFactors:
  """Returns factors with random orthonormal bases and the given spectrum.

  The bases are the Q factors of seeded Gaussian blocks.

  Args:
    m: Number of rows.
    n: Number of columns.
    spectrum: Non-increasing, non-negative singular values; their count is the
      rank, at most min(m, n).
    seed: Seed of the bases.
  """
  sigma = np.asarray(spectrum, dtype=np.float64)
  rank = sigma.shape[0]
  if not 1 <= rank <= min(m, n):
    raise ValueError(f'Rank must be in [1, {min(m, n)}], got {rank}.')
  u = dense.qr_orthonormal(
      dense.gaussian_block(m, rank, utils.derive_seed(seed, 0))
  )
  v = dense.qr_orthonormal(
      dense.gaussian_block(n, rank, utils.derive_seed(seed, 1))
  )
  return dense.LowRankFactors(u=u, sigma=sigma, v=v)


def low_rank_matrix(
    m: int,
    n: int,
    rank: int,
    seed: utils.Seed,
    spectrum: Sequence[float] | np.ndarray | None = None,
) -> np.ndarray:
  """Returns a dense m x n matrix of the given rank.

  Without a spectrum the matrix is the product of two Gaussian factors,
  L @ R.T with L of shape (m, rank) and R of shape (n, rank).

  Args:
    m: Number of rows.
    n: Number of columns.
    rank: Rank of the matrix.
    seed: Seed of the matrix.
    spectrum: Optional singular values (length `rank`).
  """
  if spectrum is not None:
    if len(spectrum) != rank:
      raise ValueError(
          f'Spectrum has {len(spectrum)} values, expected rank {rank}.'
      )
    return random_factors(m, n, spectrum, seed).to_dense()
  if not 1 <= rank <= min(m, n):
    raise ValueError(f'Rank must be in [1, {min(m, n)}], got {rank}.')
  left = dense.gaussian_block(m, rank, utils.derive_seed(seed, 0))
  right = dense.gaussian_block(n, rank, utils.derive_seed(seed, 1))
  return left @ right.T


def sample_matrix(
    a: np.ndarray, fraction: float, seed: utils.Seed
) -> sparse.SampledMatrix:
  """Samples floor(fraction * m * n) entries of `a` uniformly."""
  a = dense.check_dense_block(a, 'matrix')
  if not 0.0 < fraction <= 1.0:
    raise ValueError(f'fraction must be in (0, 1], got {fraction}.')
  m, n = a.shape
  count = images.sample_count(fraction, m * n)
  if count < 1:
    raise ValueError(f'fraction {fraction} of {m * n} entries gives no sample.')
  positions = utils.make_rng(seed).choice(m * n, size=count, replace=False)
  rows, cols = np.divmod(positions, n)
  return sparse.SampledMatrix.from_triplets((m, n), rows, cols, a[rows, cols])


def synthetic_low_rank_image(
    height: int, width: int, rank: int, seed: utils.Seed
) -> images.GrayImage:
  """Returns a smooth image made of `rank` separable components.

  Every component is the outer product of two cosine profiles with random
  low frequencies and phases, weighted by a geometric decay. The sum is
  rescaled to [0, 255] and quantized, which perturbs the rank slightly.

  Args:
    height: Image height.
    width: Image width.
    rank: Number of components.
    seed: Seed of the frequencies, phases and weights.
  """
  if height < 1 or width < 1 or rank < 1:
    raise ValueError(
        f'Need positive height, width and rank, got {height}, {width}, '
        f'{rank}.'
    )
  rng = utils.make_rng(seed)
  rows = np.linspace(0.0, 1.0, height)
  cols = np.linspace(0.0, 1.0, width)
  values = np.zeros((height, width))
  for k in range(rank):
    f_row, f_col = rng.uniform(0.5, 1.0 + 0.5 * k, size=2)
    phase_row, phase_col = rng.uniform(0.0, 2.0 * math.pi, size=2)
    weight = 0.85**k * rng.uniform(0.5, 1.0)
    profile_row = np.cos(2.0 * math.pi * f_row * rows + phase_row)
    profile_col = np.cos(2.0 * math.pi * f_col * cols + phase_col)
    values += weight * np.outer(profile_row, profile_col)
  low, high = values.min(), values.max()
  if high > low:
    values = (values - low) / (high - low)
  else:
    values = np.full_like(values, 0.5)
  return images.GrayImage(np.rint(255.0 * values).astype(np.uint8))


def synthetic_ratings(
    num_users: int,
    num_items: int,
    rank: int,
    density: float,
    seed: utils.Seed,
    noise: float = 0.0,
    scale: tuple[float, float] = (1.0, 5.0),
) -> ratings_lib.RatingsDataset:
  """Returns ratings sampled from a noisy low-rank preference matrix.

  The preferences L @ R.T are mapped affinely onto `scale`, perturbed with
  Gaussian noise of standard deviation `noise`, clipped to `scale`, and a
  uniform `density` fraction of them is kept. Original ids are 1-based.

  Args:
    num_users: Number of users (rows).
    num_items: Number of items (columns).
    rank: Rank of the preference matrix.
    density: Fraction of observed (user, item) pairs, in (0, 1].
    seed: Seed of the dataset.
    noise: Standard deviation of the rating noise.
    scale: Lowest and highest rating.
  """
  low, high = scale
  if not low < high or noise < 0.0:
    raise ValueError(f'Need scale low < high and noise >= 0, got {scale}.')
  preferences = low_rank_matrix(
      num_users, num_items, rank, utils.derive_seed(seed, 0)
  )
  spread = preferences.std()
  centered = (preferences - preferences.mean()) / (spread if spread else 1.0)
  # Two standard deviations on each side cover the rating scale.
  values = (low + high) / 2.0 + centered * (high - low) / 4.0
  if noise > 0.0:
    values = values + noise * dense.gaussian_block(
        num_users, num_items, utils.derive_seed(seed, 1)
    )
  values = np.clip(values, low, high)
  samples = sample_matrix(values, density, utils.derive_seed(seed, 2))
  return ratings_lib.RatingsDataset(
      users=samples.rows.copy(),
      items=samples.cols.copy(),
      ratings=samples.values.copy(),
      user_ids=tuple(range(1, num_users + 1)),
      item_ids=tuple(range(1, num_items + 1)),
      source=(
          f'synthetic(users={num_users}, items={num_items}, rank={rank}, '
          f'density={density}, noise={noise}, seed={seed})'
      ),
  )
