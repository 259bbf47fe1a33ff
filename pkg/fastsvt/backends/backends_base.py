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

"""Defines the base class of the partial SVD backends used by SVT."""

import abc
import dataclasses
from typing import Any

import aenum
from fastsvt.core import dense
from fastsvt.core import sketching
from fastsvt.core import sparse
from fastsvt.core import utils


@aenum.unique
class BackendName(aenum.Enum):
  """Possible backend names.

  This is an extensible Enum: other modules may add backends with
  `aenum.extend_enum` and register their class in `BACKEND_CLASS_BY_NAME`.
  """

  R4SVD = 'r4svd'  # Recycling rank-revealing randomized SVD.
  R3SVD = 'r3svd'  # Rank-revealing randomized SVD, no recycling.
  RSVD_FIXED = 'rsvd-fixed'  # Fixed-rank randomized SVD.
  FULL_ORACLE = 'full-oracle'  # Full deterministic SVD of the dense iterate.


@dataclasses.dataclass
class PartialSvdBackend(metaclass=abc.ABCMeta):
  """Interface of the partial SVD step of an SVT iteration.

  Attributes:
    t0: Initial sample count of the first sketch.
    dt: Sample increment of the adaptive sketches.
    power_iterations: Power passes applied to fresh Gaussian sketches.
    max_rank: Optional cap on the revealed rank.
    fixed_rank: Rank of the fixed-rank backend.
    oversampling: Oversampling of the fixed-rank backend.
  """

  t0: int = 1
  dt: int = 10
  power_iterations: int = 1
  max_rank: int | None = None
  fixed_rank: int | None = None
  oversampling: int = 5

  @property
  @abc.abstractmethod
  def name(self) -> BackendName:
    """Name of the backend."""

  @abc.abstractmethod
  def decompose(
      self,
      y: sparse.SampledMatrix,
      recycle: dense.DenseBlock | None,
      eps_threshold: float,
      seed: utils.Seed,
  ) -> sketching.SketchResult:
    """Returns a partial SVD of `y`.

    Args:
      y: The SVT iterate.
      recycle: Left singular vectors kept by the previous iteration, or None
        on the first iteration. Backends without recycling ignore it.
      eps_threshold: Current error-percentage target.
      seed: Seed of this iteration's sketches.
    """

  def sketch_params(
      self, eps_threshold: float, seed: utils.Seed, t: int | None = None
  ) -> sketching.SketchParams:
    """Returns the sketch parameters of one call."""
    return sketching.SketchParams(
        t=self.t0 if t is None else t,
        dt=self.dt,
        power_iterations=self.power_iterations,
        eps_threshold=eps_threshold,
        seed=seed,
        oversampling=self.oversampling,
        max_rank=self.max_rank,
    )


# Filled by the modules implementing the backends.
BACKEND_CLASS_BY_NAME: dict[BackendName, type[PartialSvdBackend]] = {}


def make_backend(
    name: BackendName | str, **options: Any
) -> PartialSvdBackend:
  """Instantiates a registered backend.

  Args:
    name: A `BackendName` or its string value (e.g. 'r4svd').
    **options: Values of the `PartialSvdBackend` attributes. None values are
      ignored so that unset command-line flags keep the defaults.

  Raises:
    ValueError: If the name is unknown or not registered.
  """
  try:
    name = BackendName(name)
  except ValueError as err:
    known = ', '.join(b.value for b in BackendName)
    raise ValueError(
        f'Unknown backend {name!r}, expected one of {known}.'
    ) from err
  backend_class = BACKEND_CLASS_BY_NAME.get(name)
  if backend_class is None:
    raise ValueError(
        f'Backend {name.value!r} is not registered; import the module that '
        'implements it.'
    )
  field_names = {f.name for f in dataclasses.fields(backend_class) if f.init}
  kwargs = {
      k: v for k, v in options.items() if k in field_names and v is not None
  }
  return backend_class(**kwargs)
