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

"""Full deterministic SVD backend, used as test oracle and baseline."""

import dataclasses

from fastsvt.backends import backends_base
from fastsvt.core import dense
from fastsvt.core import sketching
from fastsvt.core import sparse
from fastsvt.core import utils


@dataclasses.dataclass
class FullSvdBackend(backends_base.PartialSvdBackend):
  """Computes the full SVD of the densified iterate at every iteration."""

  @property
  def name(self) -> backends_base.BackendName:
    return backends_base.BackendName.FULL_ORACLE

  def decompose(
      self,
      y: sparse.SampledMatrix,
      recycle: dense.DenseBlock | None,
      eps_threshold: float,
      seed: utils.Seed,
  ) -> sketching.SketchResult:
    """See parent class."""
    del recycle, eps_threshold, seed
    factors = dense.small_svd(y.to_dense())
    return sketching.SketchResult(
        factors=factors, rank=factors.rank, error_percentage=0.0
    )


backends_base.BACKEND_CLASS_BY_NAME[backends_base.BackendName.FULL_ORACLE] = (
    FullSvdBackend
)
