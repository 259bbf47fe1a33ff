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

"""Binary that runs the `svt` command.

The thread cap of the BLAS/OpenMP kernels can only be set before numpy is
loaded, so `--threads` is read here from the raw arguments and exported to
the environment before the solver modules are imported. When a manifest is
re-executed without `--threads`, the thread count it recorded is used.
"""

from collections.abc import Sequence
import json
import os
import sys
from typing import Any


_THREAD_ENV_VARS = (
    'OMP_NUM_THREADS',
    'OPENBLAS_NUM_THREADS',
    'MKL_NUM_THREADS',
)


def _flag_value(argv: Sequence[str], flag: str) -> str | None:
  """Returns the value of `flag VALUE` or `flag=VALUE` in argv, if any."""
  for i, arg in enumerate(argv):
    if arg == flag:
      return argv[i + 1] if i + 1 < len(argv) else None
    if arg.startswith(flag + '='):
      return arg.split('=', 1)[1]
  return None


def _positive_int(value: Any) -> int | None:
  try:
    count = int(value)
  except (TypeError, ValueError):
    return None  # argparse reports the error.
  return count if count >= 1 else None


def thread_count(argv: Sequence[str]) -> int | None:
  """Returns the value of `--threads N` or `--threads=N` in argv, if any."""
  return _positive_int(_flag_value(argv, '--threads'))


def manifest_thread_count(argv: Sequence[str]) -> int | None:
  """Returns the thread count recorded by the manifest given in argv."""
  path = _flag_value(argv, '--manifest')
  if path is None:
    return None
  try:
    with open(path, 'r') as f:
      value = json.load(f)['arguments'].get('threads')
  except (OSError, ValueError, KeyError, TypeError, AttributeError):
    return None  # main reports invalid manifests.
  return _positive_int(value)


def limit_threads(count: int | None) -> None:
  if count is None:
    return
  for name in _THREAD_ENV_VARS:
    os.environ[name] = str(count)


def run(argv: Sequence[str] | None = None) -> None:
  """Entry point of the `svt` console script."""
  argv = sys.argv[1:] if argv is None else list(argv)
  limit_threads(thread_count(argv) or manifest_thread_count(argv))
  from fastsvt.cli import main  # pylint: disable=g-import-not-at-top

  sys.exit(main.main(argv))


if __name__ == '__main__':
  run()
