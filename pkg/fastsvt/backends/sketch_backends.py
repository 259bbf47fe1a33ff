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

"""Partial SVD backends built on the randomized sketching engines."""

import dataclasses
import math

from fastsvt.backends import backends_base
from fastsvt.core import constants
from fastsvt.core import dense
from fastsvt.core import sketching
from fastsvt.core import sparse
from fastsvt.core import utils


_BackendName = backends_base.BackendName


@dataclasses.dataclass
class R4svdBackend(backends_base.PartialSvdBackend):
  """Recycles the previous left singular vectors (falls back to r3svd)."""

  @property
  def name(self) -> _BackendName:
    return _BackendName.R4SVD

  def decompose(
      self,
      y: sparse.SampledMatrix,
      recycle: dense.DenseBlock | None,
      eps_threshold: float,
      seed: utils.Seed,
  ) -> sketching.SketchResult:
    """See parent class."""
    params = self.sketch_params(eps_threshold, seed)
    if recycle is None:
      # First SVT iteration: nothing to recycle yet.
      return sketching.r3svd(y, params)
    return sketching.r4svd(y, recycle, params)


@dataclasses.dataclass
class R3svdBackend(backends_base.PartialSvdBackend):
  """Sketches every iterate from scratch with `t0` initial samples."""

  @property
  def name(self) -> _BackendName:
    return _BackendName.R3SVD

  def decompose(
      self,
      y: sparse.SampledMatrix,
      recycle: dense.DenseBlock | None,
      eps_threshold: float,
      seed: utils.Seed,
  ) -> sketching.SketchResult:
    """See parent class."""
    del recycle
    return sketching.r3svd(y, self.sketch_params(eps_threshold, seed))


@dataclasses.dataclass
class RsvdFixedBackend(backends_base.PartialSvdBackend):
  """Fixed-rank randomized SVD; ignores the error-percentage target."""

  @property
  def name(self) -> _BackendName:
    return _BackendName.RSVD_FIXED

  def resolved_rank(self, y: sparse.SampledMatrix) -> tuple[int, int]:
    """Returns (rank, oversampling) fitted to the shape of `y`."""
    limit = min(y.shape)
    rank = self.fixed_rank
    if rank is None:
      rank = math.floor(constants.DEFAULT_FIXED_RANK_FRACTION * limit)
    rank = max(1, min(rank, limit))
    return rank, max(0, min(self.oversampling, limit - rank))

  def decompose(
      self,
      y: sparse.SampledMatrix,
      recycle: dense.DenseBlock | None,
      eps_threshold: float,
      seed: utils.Seed,
  ) -> sketching.SketchResult:
    """See parent class."""
    del recycle
    rank, oversampling = self.resolved_rank(y)
    params = dataclasses.replace(
        self.sketch_params(eps_threshold, seed), oversampling=oversampling
    )
    return sketching.rsvd(y, rank, params)


backends_base.BACKEND_CLASS_BY_NAME[_BackendName.R4SVD] = R4svdBackend
backends_base.BACKEND_CLASS_BY_NAME[_BackendName.R3SVD] = R3svdBackend
backends_base.BACKEND_CLASS_BY_NAME[_BackendName.RSVD_FIXED] = RsvdFixedBackend
