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

"""Utility functions for the fastsvt core module."""

from collections.abc import Callable, Sequence
import dataclasses
import hashlib
import time
from typing import Any, TypeAlias

import numpy as np

# A seed is either a plain integer or a path of integers, e.g. `[seed, 3, 1]`
# for the first extension round of the third SVT iteration.
Seed: TypeAlias = int | Sequence[int]


def derive_seed(seed: Seed, *path: int) -> list[int]:
  """Returns a child seed that is a deterministic function of its parent.

  Args:
    seed: Parent seed.
    *path: Non-negative integers identifying the child, e.g. an iteration
      index followed by an extension round.
  """
  if isinstance(seed, (int, np.integer)):
    base = [int(seed)]
  else:
    base = [int(s) for s in seed]
  if any(s < 0 for s in base) or any(p < 0 for p in path):
    raise ValueError(f'Seeds must be non-negative, got {base} and {path}.')
  return base + [int(p) for p in path]


def make_rng(seed: Seed) -> np.random.Generator:
  """Returns a PCG64 generator seeded through a `SeedSequence`.

  PCG64 is numpy's documented default bit generator; its output for a given
  `SeedSequence` is stable across platforms. A sequence `[s, *path]` is the
  child of `s` with spawn key `path`, so `[s, 0]` and `s` give independent
  streams (plain entropy lists would not, as they are padded with zeros).

  Args:
    seed: Integer or non-empty sequence of integers.
  """
  if isinstance(seed, (int, np.integer)):
    sequence = np.random.SeedSequence(int(seed))
  else:
    root, *path = (int(s) for s in seed)
    sequence = np.random.SeedSequence(root, spawn_key=tuple(path))
  return np.random.Generator(np.random.PCG64(sequence))


def _default_clock() -> Callable[[], float]:
  # `process_time` counts CPU time of all threads of the process, which is
  # the closest match to a cputime() measurement.
  try:
    time.process_time()
  except OSError:
    return time.monotonic
  return time.process_time


@dataclasses.dataclass
class Stopwatch:
  """Accumulates elapsed time of named phases in milliseconds.

  Usage:
  ```
  watch = Stopwatch()
  with watch.phase('sketch'):
    ...
  watch.elapsed_ms('sketch')
  ```

  Attributes:
    clock: Function returning the current time in seconds. Defaults to process
      CPU time, with monotonic wall time as fallback.
  """

  clock: Callable[[], float] = dataclasses.field(default_factory=_default_clock)
  _totals: dict[str, float] = dataclasses.field(
      init=False, default_factory=dict
  )

  def phase(self, name: str) -> '_Phase':
    return _Phase(self, name)

  def add(self, name: str, seconds: float) -> None:
    self._totals[name] = self._totals.get(name, 0.0) + seconds

  def elapsed_ms(self, name: str) -> float:
    return 1000.0 * self._totals.get(name, 0.0)


class _Phase:
  """Context manager measuring one phase of a `Stopwatch`."""

  def __init__(self, watch: Stopwatch, name: str):
    self._watch = watch
    self._name = name
    self._start = 0.0
    self.seconds = 0.0

  def __enter__(self) -> '_Phase':
    self._start = self._watch.clock()
    return self

  def __exit__(self, *unused_exc_info: Any) -> None:
    self.seconds = self._watch.clock() - self._start
    self._watch.add(self._name, self.seconds)


def _get_bytes_for_hashing(key: Any) -> bytes:
  """Best-effort conversion of key to bytes for further hashing."""
  match key:
    # The `hash` function for python `str` and `bytes` adds a random seed
    # to the hash, so we never rely on it for reproducibility checks.
    case str():
      bytes_value = key.encode('utf-8')
    case bytes():
      bytes_value = key
    case float() | int() | bool() | None:
      bytes_value = repr(key).encode('utf-8')
    case list() | tuple():
      bytes_value = b'['
      bytes_value += b','.join(_get_bytes_for_hashing(k) for k in key)
      bytes_value += b']'
    case dict():
      bytes_value = b'{'
      bytes_value += b','.join(
          _get_bytes_for_hashing(k) + b':' + _get_bytes_for_hashing(v)
          for k, v in sorted(key.items())
      )
      bytes_value += b'}'
    case _:
      if hasattr(key, 'tobytes'):
        # This handles the case of a np.ndarray.
        bytes_value = key.tobytes()
      else:
        raise ValueError(f'Unsupported key type: {type(key)}')
  return bytes_value


def get_str_hash(key: Any) -> str:
  """Returns a deterministic hash of nested lists, dicts, numbers and arrays.

  Used to fingerprint traces and factors so that two runs of the same
  manifest can be compared bit for bit.

  Args:
    key: Any object that we want to hash.
  """
  bytes_value = _get_bytes_for_hashing(key)
  return hashlib.sha224(bytes_value).hexdigest()
