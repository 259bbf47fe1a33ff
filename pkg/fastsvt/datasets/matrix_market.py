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

"""Reads and writes MatrixMarket files.

Two variants of the format are supported:

* `coordinate real general` for sampled matrices: a header line, optional
  `%` comment lines, a size line `m n ns` and one `i j value` line per
  sample with 1-based indices.
* `array real general` for dense factor blocks: a header line, a size line
  `m n` and the m * n values in column-major order, one per line.

Values are written with the shortest representation that reads back to the
same float64, so a written file always reads back exactly.
"""

from collections.abc import Iterator
import os

from absl import logging
from fastsvt.core import sparse
import numpy as np


_BANNER = '%%MatrixMarket'
_COORDINATE_HEADER = '%%MatrixMarket matrix coordinate real general'
_ARRAY_HEADER = '%%MatrixMarket matrix array real general'
_FIELDS = ('real', 'integer')

Path = str | os.PathLike[str]


def _format_value(value: float) -> str:
  return repr(float(value))


def _data_lines(
    lines: list[str], start: int
) -> Iterator[tuple[int, list[str]]]:
  """Yields (1-based line number, fields) of non-comment, non-blank lines."""
  for index in range(start, len(lines)):
    text = lines[index].strip()
    if not text or text.startswith('%'):
      continue
    yield index + 1, text.split()


def _parse_header(path: Path, lines: list[str], expected_format: str) -> None:
  if not lines:
    raise ValueError(f'{path}:1: empty file, expected a MatrixMarket header.')
  fields = lines[0].split()
  if len(fields) != 5 or fields[0] != _BANNER:
    raise ValueError(f'{path}:1: malformed MatrixMarket header {lines[0]!r}.')
  obj, fmt, field, symmetry = (f.lower() for f in fields[1:])
  if obj != 'matrix' or fmt != expected_format:
    raise ValueError(
        f'{path}:1: expected a "matrix {expected_format}" file, got '
        f'"{obj} {fmt}".'
    )
  if field not in _FIELDS or symmetry != 'general':
    raise ValueError(
        f'{path}:1: only real general matrices are supported, got '
        f'"{field} {symmetry}".'
    )


def _parse_ints(
    path: Path, line_no: int, fields: list[str], count: int
) -> list[int]:
  if len(fields) != count:
    raise ValueError(
        f'{path}:{line_no}: expected {count} integers, got {fields}.'
    )
  try:
    return [int(f) for f in fields]
  except ValueError as err:
    raise ValueError(
        f'{path}:{line_no}: non-integer field in {fields}.'
    ) from err


def _parse_float(path: Path, line_no: int, text: str) -> float:
  try:
    value = float(text)
  except ValueError as err:
    raise ValueError(f'{path}:{line_no}: non-numeric value {text!r}.') from err
  if not np.isfinite(value):
    raise ValueError(f'{path}:{line_no}: non-finite value {text!r}.')
  return value


def read_matrix_market(path: Path) -> sparse.SampledMatrix:
  """Reads a sampled matrix from a coordinate MatrixMarket file.

  Args:
    path: File to read.

  Raises:
    ValueError: On a malformed header or size line, an entry count that does
      not match the size line, out-of-range or duplicate indices, or
      non-finite values. The message names the file and line.
    OSError: If the file cannot be read.
  """
  with open(path, 'r') as f:
    lines = f.read().splitlines()
  _parse_header(path, lines, 'coordinate')
  entries = _data_lines(lines, 1)
  size = next(entries, None)
  if size is None:
    raise ValueError(f'{path}: missing size line.')
  line_no, fields = size
  m, n, nnz = _parse_ints(path, line_no, fields, 3)
  if m < 1 or n < 1 or nnz < 1:
    raise ValueError(
        f'{path}:{line_no}: expected positive dimensions and entry count, got '
        f'{m} {n} {nnz}.'
    )
  rows = np.empty(nnz, dtype=np.int64)
  cols = np.empty(nnz, dtype=np.int64)
  values = np.empty(nnz, dtype=np.float64)
  seen = set()
  count = 0
  for line_no, fields in entries:
    if count == nnz:
      raise ValueError(
          f'{path}:{line_no}: more entries than the {nnz} announced.'
      )
    if len(fields) != 3:
      raise ValueError(
          f'{path}:{line_no}: expected "row col value", got {fields}.'
      )
    i, j = _parse_ints(path, line_no, fields[:2], 2)
    if not (1 <= i <= m and 1 <= j <= n):
      raise ValueError(
          f'{path}:{line_no}: index ({i}, {j}) outside the {m}x{n} matrix.'
      )
    if (i, j) in seen:
      raise ValueError(f'{path}:{line_no}: duplicate entry ({i}, {j}).')
    seen.add((i, j))
    rows[count], cols[count] = i - 1, j - 1
    values[count] = _parse_float(path, line_no, fields[2])
    count += 1
  if count != nnz:
    raise ValueError(f'{path}: expected {nnz} entries, found {count}.')
  logging.info('Read %dx%d matrix with %d samples from %s.', m, n, nnz, path)
  return sparse.SampledMatrix.from_triplets((m, n), rows, cols, values)


def write_matrix_market(
    s: sparse.SampledMatrix, path: Path, comment: str | None = None
) -> None:
  """Writes a sampled matrix as a coordinate MatrixMarket file.

  Args:
    s: Matrix to write; entries are written in row-major order.
    path: Destination file.
    comment: Optional single-line comment written after the header.
  """
  lines = [_COORDINATE_HEADER]
  if comment:
    lines.append(f'% {comment}')
  lines.append(f'{s.shape[0]} {s.shape[1]} {s.nnz}')
  lines.extend(
      f'{i + 1} {j + 1} {_format_value(v)}'
      for i, j, v in zip(s.rows.tolist(), s.cols.tolist(), s.values.tolist())
  )
  with open(path, 'w') as f:
    f.write('\n'.join(lines) + '\n')
  logging.info('Wrote %d samples to %s.', s.nnz, path)


def read_dense_matrix_market(path: Path) -> np.ndarray:
  """Reads a dense matrix from an array MatrixMarket file.

  Raises:
    ValueError: On a malformed header or size line, a wrong number of values,
      or non-finite values.
  """
  with open(path, 'r') as f:
    lines = f.read().splitlines()
  _parse_header(path, lines, 'array')
  entries = _data_lines(lines, 1)
  size = next(entries, None)
  if size is None:
    raise ValueError(f'{path}: missing size line.')
  line_no, fields = size
  m, n = _parse_ints(path, line_no, fields, 2)
  if m < 0 or n < 0:
    raise ValueError(f'{path}:{line_no}: negative dimensions {m} {n}.')
  values = []
  for line_no, fields in entries:
    if len(fields) != 1:
      raise ValueError(
          f'{path}:{line_no}: expected one value per line, got {fields}.'
      )
    values.append(_parse_float(path, line_no, fields[0]))
  if len(values) != m * n:
    raise ValueError(
        f'{path}: expected {m * n} values for a {m}x{n} array, found '
        f'{len(values)}.'
    )
  return np.asarray(values, dtype=np.float64).reshape((m, n), order='F')


def write_dense_matrix_market(x: np.ndarray, path: Path) -> None:
  """Writes a one- or two-dimensional array as an array MatrixMarket file.

  A vector of length r is written as an r x 1 matrix.
  """
  x = np.asarray(x, dtype=np.float64)
  if x.ndim == 1:
    x = x[:, np.newaxis]
  if x.ndim != 2:
    raise ValueError(f'Expected a vector or a matrix, got shape {x.shape}.')
  lines = [_ARRAY_HEADER, f'{x.shape[0]} {x.shape[1]}']
  lines.extend(_format_value(v) for v in x.ravel(order='F').tolist())
  with open(path, 'w') as f:
    f.write('\n'.join(lines) + '\n')
