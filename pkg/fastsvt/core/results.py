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

"""Data structures for storing the convergence trace of an SVT run."""

from collections.abc import Sequence
import csv
import dataclasses
import io
import json
import math
from typing import Any, Final, Optional

import dataclasses_json
from fastsvt.core import constants
import immutabledict
import termcolor


# Columns of the trace CSV, mapped to the record attribute they come from.
TRACE_COLUMNS: Final[immutabledict.immutabledict[str, str]] = (
    immutabledict.immutabledict({
        'iter': 'iteration',
        'rank': 'rank',
        'residual': 'residual',
        'eps_threshold': 'eps_threshold',
        'train_mae': 'train_mae',
        'sketch_ms': 'sketch_ms',
        'total_ms': 'total_ms',
    })
)
# Optional trailing column, present when any record has a test MAE.
TEST_MAE_COLUMN: Final[str] = 'test_mae'


def _exclude_none(x: Any) -> bool:
  """Excludes unset values (when outputting dataclass_json.to_dict)."""
  return x is None


@dataclasses_json.dataclass_json
@dataclasses.dataclass
class IterationRecord:
  """Convergence information of one SVT iteration.

  Attributes:
    iteration: 1-based iteration index.
    rank: Rank of the thresholded iterate X(i).
    residual: Sample-set residual epsilon(i).
    eps_threshold: Sketch error-percentage threshold after the cooling step
      of this iteration.
    train_mae: Mean absolute error of X(i) on the sample set.
    sketch_ms: Time spent in the partial SVD of this iteration.
    total_ms: Cumulative time of the run up to the end of this iteration.
    sketch_rank: Rank of the partial SVD before thresholding.
    extension_rounds: Number of QB extension rounds of the partial SVD.
    saturated: Whether the partial SVD hit its rank limit.
    test_mae: Mean absolute error on a held-out pattern, if monitored.
  """
  # pytype: disable=wrong-arg-types
  iteration: int
  rank: int
  residual: float
  eps_threshold: float
  train_mae: float
  sketch_ms: float
  total_ms: float
  sketch_rank: int = 0
  extension_rounds: int = 0
  saturated: bool = False
  test_mae: Optional[float] = dataclasses.field(
      default=None, metadata=dataclasses_json.config(exclude=_exclude_none)
  )
  # pytype: enable=wrong-arg-types

  def format(self, color: bool = True) -> str:
    """Returns a one-line summary of the record."""
    text = (
        f'iter {self.iteration:4d}  rank {self.rank:4d}  '
        f'residual {self.residual:.4e}  eps {self.eps_threshold:.3e}  '
        f'train_mae {self.train_mae:.4f}'
    )
    if self.test_mae is not None:
      text += f'  test_mae {self.test_mae:.4f}'
    if self.saturated:
      text += '  [saturated]'
    if color:
      return termcolor.colored(text, 'red' if self.saturated else 'blue')
    return text


def _format_value(value: Any) -> str:
  if isinstance(value, float):
    return repr(value)
  return str(value)


def trace_to_csv(records: Sequence[IterationRecord]) -> str:
  """Returns the trace as CSV text with a stable header.

  Args:
    records: The trace, one record per iteration.
  """
  with_test = any(r.test_mae is not None for r in records)
  header = list(TRACE_COLUMNS)
  if with_test:
    header.append(TEST_MAE_COLUMN)
  buffer = io.StringIO()
  writer = csv.writer(buffer, lineterminator='\n')
  writer.writerow(header)
  for record in records:
    row = [_format_value(getattr(record, a)) for a in TRACE_COLUMNS.values()]
    if with_test:
      row.append(
          '' if record.test_mae is None else _format_value(record.test_mae)
      )
    writer.writerow(row)
  return buffer.getvalue()


def trace_from_csv(text: str) -> list[IterationRecord]:
  """Parses CSV text written by `trace_to_csv`.

  Raises:
    ValueError: If the header does not match the trace schema.
  """
  reader = csv.reader(io.StringIO(text))
  header = next(reader, None)
  expected = list(TRACE_COLUMNS)
  if header is None or header[: len(expected)] != expected:
    raise ValueError(f'Unexpected trace header {header}, expected {expected}.')
  with_test = header[len(expected):] == [TEST_MAE_COLUMN]
  records = []
  for row in reader:
    values = dict(zip(header, row))
    records.append(
        IterationRecord(
            iteration=int(values['iter']),
            rank=int(values['rank']),
            residual=float(values['residual']),
            eps_threshold=float(values['eps_threshold']),
            train_mae=float(values['train_mae']),
            sketch_ms=float(values['sketch_ms']),
            total_ms=float(values['total_ms']),
            test_mae=(
                float(values[TEST_MAE_COLUMN])
                if with_test and values[TEST_MAE_COLUMN]
                else None
            ),
        )
    )
  return records


def trace_to_json(
    records: Sequence[IterationRecord], info: dict[str, Any] | None = None
) -> str:
  """Returns the full trace (all record fields) as a JSON document.

  Args:
    records: The trace.
    info: Extra top-level information, e.g. the backend name.
  """
  document = {
      'schema_version': constants.TRACE_SCHEMA_VERSION,
      'info': info or {},
      'records': [r.to_dict() for r in records],
  }
  return json.dumps(document, indent=2, sort_keys=True)


def trace_from_json(text: str) -> list[IterationRecord]:
  """Parses a JSON document written by `trace_to_json`."""
  document = json.loads(text)
  version = document.get('schema_version')
  if version != constants.TRACE_SCHEMA_VERSION:
    raise ValueError(
        f'Unsupported trace schema version {version}, expected '
        f'{constants.TRACE_SCHEMA_VERSION}.'
    )
  return [IterationRecord.from_dict(r) for r in document['records']]


def format_trace(
    records: Sequence[IterationRecord], color: bool = True, last: int = 0
) -> str:
  """Returns a pretty-formatted version of the trace.

  Args:
    records: The trace.
    color: If True, annotates the text with `termcolor` colors.
    last: If positive, only the last `last` records are shown.
  """
  shown = records[-last:] if last > 0 else records
  lines = [r.format(color=color) for r in shown]
  if color and lines:
    lines.insert(0, termcolor.colored('SVT trace', attrs=['bold']))
  return '\n'.join(lines)


def is_finite_record(record: IterationRecord) -> bool:
  """Whether all numeric fields of the record are finite."""
  values = [
      record.residual,
      record.eps_threshold,
      record.train_mae,
      record.sketch_ms,
      record.total_ms,
  ]
  if record.test_mae is not None:
    values.append(record.test_mae)
  return all(math.isfinite(v) for v in values)
