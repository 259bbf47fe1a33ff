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

"""Command-line front end of the solver.

Subcommands:

* `complete MATRIX.mtx`: completes a sampled matrix and writes the factors
  (U.mtx, sigma.mtx, V.mtx), the trace (CSV and JSON) and the manifest.
* `image [IMAGE.pgm | --synthetic]`: samples an image, completes it and
  writes the recovered image, the trace, `summary.json` and the manifest.
* `ratings [RATINGS | --synthetic]`: splits ratings into train and test sets,
  completes the train matrix while tracking the test error, and writes the
  trace, `summary.json` and the manifest.
* `bench`: per-iteration partial SVD times of several backends, as CSV.

`--manifest FILE` replaces the subcommand and re-executes a stored run.

Exit codes: 0 on success, 2 on invalid input, 3 when the solver reached
`--maxit` without meeting its stopping rule.
"""

import argparse
from collections.abc import Callable, Sequence
import dataclasses
import json
import os
import sys
from typing import Any, Optional

from absl import logging
import dataclasses_json
import fastsvt
from fastsvt import evaluation
from fastsvt import svt
from fastsvt.backends import backends_base
from fastsvt.core import constants
from fastsvt.core import results
from fastsvt.core import utils
from fastsvt.datasets import images
from fastsvt.datasets import matrix_market
from fastsvt.datasets import ratings as ratings_lib
from fastsvt.datasets import synthetic
import immutabledict


EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NOT_CONVERGED = 3

LOG_LEVEL_ENV = 'SVT_LOG'
_DEFAULT_LOG_LEVEL = 'warning'
_DEFAULT_OUT_DIR = 'svt_out'

# Flag destination -> `svt.SvtConfig` field.
_CONFIG_FLAGS = immutabledict.immutabledict({
    'tau': 'tau',
    'delta': 'delta',
    'dt': 'dt',
    'np': 'power_iterations',
    'beta': 'beta',
    'eps_threshold0': 'eps_threshold0',
    'maxit': 'maxit',
    'seed': 'seed',
    'max_rank': 'max_rank',
    'fixed_rank': 'fixed_rank',
    'residual_source': 'residual_source',
})

# Artifact file names.
_TRACE_CSV = 'trace.csv'
_TRACE_JSON = 'trace.json'
_MANIFEST = 'manifest.json'
_SUMMARY = 'summary.json'


@dataclasses_json.dataclass_json
@dataclasses.dataclass
class RunManifest:
  """Everything needed to reproduce a run.

  Attributes:
    command: Subcommand name.
    backend: Backend name (comma-separated list for `bench`).
    arguments: Parsed command-line arguments (input paths, fractions, seeds,
      stopping rule, output locations).
    config: The resolved `svt.SvtConfig` as a JSON object (absent for
      `bench`).
    outputs: Artifact name -> path.
    version: Version of fastsvt that produced the manifest.
  """
  # pytype: disable=wrong-arg-types
  command: str
  backend: str
  arguments: dict[str, Any]
  config: Optional[dict[str, Any]] = None
  outputs: dict[str, str] = dataclasses.field(default_factory=dict)
  version: str = fastsvt.__version__
  # pytype: enable=wrong-arg-types


class _Artifacts:
  """Writes output files and removes them all if the command fails."""

  def __init__(self, out_dir: str):
    self.out_dir = out_dir
    self.paths: dict[str, str] = {}
    self._created_dir = False

  def path(self, name: str, override: str | None = None) -> str:
    return override or os.path.join(self.out_dir, name)

  def _prepare(self, path: str) -> None:
    directory = os.path.dirname(path)
    if directory and not os.path.isdir(directory):
      os.makedirs(directory)
      if os.path.abspath(directory) == os.path.abspath(self.out_dir):
        self._created_dir = True

  def write_text(
      self, name: str, text: str, override: str | None = None
  ) -> str:
    path = self.path(name, override)
    self._prepare(path)
    self.paths[name] = path
    with open(path, 'w') as f:
      f.write(text)
    return path

  def write_with(
      self,
      name: str,
      writer: Callable[[str], None],
      override: str | None = None,
  ) -> str:
    """Registers `path` and calls `writer(path)`."""
    path = self.path(name, override)
    self._prepare(path)
    self.paths[name] = path
    writer(path)
    return path

  def cleanup(self) -> None:
    for path in self.paths.values():
      if os.path.exists(path):
        os.remove(path)
    if self._created_dir and not os.listdir(self.out_dir):
      os.rmdir(self.out_dir)
    self.paths.clear()


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
  """Adds the flags shared by the solving subcommands."""
  parser.add_argument(
      '--backend',
      default=backends_base.BackendName.R4SVD.value,
      choices=[b.value for b in backends_base.BackendName],
      help='Partial SVD backend.',
  )
  parser.add_argument('--tau', type=float, help='Shrinkage threshold.')
  parser.add_argument('--delta', type=float, help='Step size.')
  parser.add_argument('--dt', type=int, help='Sketch sample increment.')
  parser.add_argument(
      '--np', type=int, help='Power iterations of fresh sketches.'
  )
  parser.add_argument('--beta', type=float, help='Annealing factor.')
  parser.add_argument(
      '--eps-threshold0',
      type=float,
      help='Initial error-percentage target of the sketches.',
  )
  parser.add_argument('--maxit', type=int, help='Maximum iterations.')
  parser.add_argument(
      '--max-rank', type=int, help='Cap on the revealed sketch rank.'
  )
  parser.add_argument(
      '--fixed-rank', type=int, help='Rank of the rsvd-fixed backend.'
  )
  parser.add_argument(
      '--residual-source',
      choices=[s.value for s in svt.ResidualSource],
      help='Iterate whose sample-set error is the residual.',
  )
  stop = parser.add_mutually_exclusive_group()
  stop.add_argument(
      '--stop-mae', type=float, help='Stop once the train MAE is below this.'
  )
  stop.add_argument(
      '--stop-residual',
      type=float,
      help='Stop once the residual is below this.',
  )
  parser.add_argument(
      '--trace-out', help='Trace CSV path (default OUT_DIR/trace.csv).'
  )


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
  parser.add_argument('--seed', type=int, default=0, help='Seed of the run.')
  parser.add_argument(
      '--threads',
      type=int,
      help='Thread cap of the numerical kernels (1 is bit-reproducible).',
  )
  parser.add_argument(
      '--out-dir', default=_DEFAULT_OUT_DIR, help='Output directory.'
  )


def build_parser() -> argparse.ArgumentParser:
  """Returns the parser of the `svt` command."""
  parser = argparse.ArgumentParser(
      'svt',
      description='Matrix completion by fast singular value thresholding.',
  )
  parser.add_argument(
      '--manifest', help='Re-execute the run described by this manifest.'
  )
  parser.add_argument(
      '--threads',
      type=int,
      dest='global_threads',
      help='Thread cap of the numerical kernels, also for --manifest runs.',
  )
  subparsers = parser.add_subparsers(dest='command')

  complete = subparsers.add_parser('complete', help='Complete a matrix.')
  complete.add_argument('matrix', help='MatrixMarket coordinate file.')
  _add_solver_flags(complete)
  _add_common_flags(complete)

  image = subparsers.add_parser('image', help='Image completion experiment.')
  image.add_argument('image', nargs='?', help='PGM image (P5 or P2).')
  image.add_argument(
      '--synthetic', action='store_true', help='Use a synthetic image.'
  )
  image.add_argument('--height', type=int, default=256)
  image.add_argument('--width', type=int, default=256)
  image.add_argument('--rank', type=int, default=20)
  image.add_argument(
      '--fraction', type=float, default=0.2, help='Fraction of pixels kept.'
  )
  image.add_argument(
      '--plain-pgm', action='store_true', help='Write the P2 format.'
  )
  _add_solver_flags(image)
  _add_common_flags(image)

  ratings = subparsers.add_parser('ratings', help='Rating prediction.')
  ratings.add_argument('ratings', nargs='?', help='Ratings file.')
  ratings.add_argument('--separator', default=ratings_lib.DEFAULT_SEPARATOR)
  ratings.add_argument(
      '--synthetic', action='store_true', help='Use synthetic ratings.'
  )
  ratings.add_argument('--users', type=int, default=500)
  ratings.add_argument('--items', type=int, default=400)
  ratings.add_argument('--rank', type=int, default=5)
  ratings.add_argument('--density', type=float, default=0.2)
  ratings.add_argument('--noise', type=float, default=0.3)
  ratings.add_argument('--train-fraction', type=float, default=0.8)
  ratings.add_argument(
      '--patience',
      type=int,
      default=evaluation.DEFAULT_PATIENCE,
      help='Non-improving test iterations that signal overfitting.',
  )
  ratings.add_argument(
      '--stop-on-overfit',
      action='store_true',
      help='Stop as soon as overfitting is detected.',
  )
  _add_solver_flags(ratings)
  _add_common_flags(ratings)

  bench = subparsers.add_parser('bench', help='Backend benchmark.')
  bench.add_argument('--sizes', default='128,256', help='Comma-separated.')
  bench.add_argument(
      '--backends', default='r4svd,full-oracle', help='Comma-separated.'
  )
  bench.add_argument('--fraction', type=float, default=0.2)
  bench.add_argument('--rank', type=int, default=10)
  bench.add_argument('--maxit', type=int, default=20)
  bench.add_argument('--out', help='CSV path (default OUT_DIR/bench.csv).')
  _add_common_flags(bench)
  return parser


def _config_overrides(args: argparse.Namespace) -> dict[str, Any]:
  overrides = {
      field: getattr(args, flag)
      for flag, field in _CONFIG_FLAGS.items()
      if getattr(args, flag, None) is not None
  }
  if args.stop_residual is not None:
    overrides['eps_stop'] = args.stop_residual
  return overrides


def _stopping_rule(
    args: argparse.Namespace, default_mae: float
) -> svt.StoppingRule:
  if args.stop_mae is not None:
    return svt.StoppingRule(svt.StopKind.TRAIN_MAE, args.stop_mae)
  if args.stop_residual is not None:
    return svt.StoppingRule(svt.StopKind.RESIDUAL, args.stop_residual)
  return svt.StoppingRule(svt.StopKind.TRAIN_MAE, default_mae)


def _trace_info(result: svt.SvtResult, backend: str) -> dict[str, Any]:
  fingerprint = utils.get_str_hash(
      [[r.iteration, r.rank, r.residual, r.eps_threshold, r.train_mae]
       for r in result.trace]
  )
  return {
      'backend': backend,
      'converged': result.converged,
      'stop_reason': result.stop_reason,
      'best_iteration': result.best_iteration,
      'fingerprint': fingerprint,
  }


def _write_trace(
    artifacts: _Artifacts,
    args: argparse.Namespace,
    result: svt.SvtResult,
) -> None:
  artifacts.write_text(
      _TRACE_CSV, results.trace_to_csv(result.trace), args.trace_out
  )
  artifacts.write_text(
      _TRACE_JSON,
      results.trace_to_json(result.trace, _trace_info(result, args.backend)),
  )


def _write_manifest(
    artifacts: _Artifacts,
    args: argparse.Namespace,
    backend: str,
    config: svt.SvtConfig | None,
) -> None:
  arguments = {
      k: v for k, v in vars(args).items() if k not in ('manifest', 'command', 'global_threads')
  }
  manifest = RunManifest(
      command=args.command,
      backend=backend,
      arguments=arguments,
      config=None if config is None else json.loads(config.to_json()),
      outputs=dict(artifacts.paths, manifest=artifacts.path(_MANIFEST)),
  )
  artifacts.write_text(_MANIFEST, manifest.to_json(indent=2) + '\n')


def _report(result: svt.SvtResult) -> int:
  print(results.format_trace(result.trace, color=sys.stdout.isatty(), last=1))
  if not result.converged:
    logging.warning('No convergence in %d iterations.', result.iterations)
    return EXIT_NOT_CONVERGED
  return EXIT_OK


def cmd_complete(
    args: argparse.Namespace,
    artifacts: _Artifacts,
    config: dict[str, Any] | None = None,
) -> int:
  """Runs the `complete` subcommand."""
  samples = matrix_market.read_matrix_market(args.matrix)
  cfg = svt.default_config(samples, **(config or _config_overrides(args)))
  result = svt.svt_run(
      samples,
      cfg,
      _stopping_rule(args, constants.COMPLETE_STOP_MAE),
      backend=args.backend,
  )
  factors = result.factors
  artifacts.write_with(
      'U.mtx',
      lambda p: matrix_market.write_dense_matrix_market(factors.u, p),
  )
  artifacts.write_with(
      'sigma.mtx',
      lambda p: matrix_market.write_dense_matrix_market(factors.sigma, p),
  )
  artifacts.write_with(
      'V.mtx',
      lambda p: matrix_market.write_dense_matrix_market(factors.v, p),
  )
  _write_trace(artifacts, args, result)
  _write_manifest(artifacts, args, args.backend, result.config)
  return _report(result)


def _load_image(args: argparse.Namespace) -> images.GrayImage:
  if args.synthetic == (args.image is not None):
    raise ValueError('Give either an image file or --synthetic.')
  if args.synthetic:
    return synthetic.synthetic_low_rank_image(
        args.height, args.width, args.rank, utils.derive_seed(args.seed, 1)
    )
  return images.read_pgm(args.image)


def cmd_image(
    args: argparse.Namespace,
    artifacts: _Artifacts,
    config: dict[str, Any] | None = None,
) -> int:
  """Runs the `image` subcommand."""
  image = _load_image(args)
  stop = _stopping_rule(args, constants.IMAGE_STOP_MAE)
  if stop.kind != svt.StopKind.TRAIN_MAE:
    raise ValueError('The image experiment stops on the train MAE.')
  summary, result, recovered = evaluation.run_image_experiment(
      image,
      args.fraction,
      args.seed,
      backend=args.backend,
      stop_mae=stop.tolerance,
      config_overrides=config or _config_overrides(args),
  )
  artifacts.write_with(
      'recovered.pgm',
      lambda p: images.write_pgm(recovered, p, binary=not args.plain_pgm),
  )
  _write_trace(artifacts, args, result)
  artifacts.write_text(_SUMMARY, summary.to_json(indent=2) + '\n')
  _write_manifest(artifacts, args, args.backend, result.config)
  print(f'full-image MAE: {summary.full_mae:.4f}')
  return _report(result)


def _load_ratings(args: argparse.Namespace) -> ratings_lib.RatingsDataset:
  if args.synthetic == (args.ratings is not None):
    raise ValueError('Give either a ratings file or --synthetic.')
  if args.synthetic:
    return synthetic.synthetic_ratings(
        args.users,
        args.items,
        args.rank,
        args.density,
        utils.derive_seed(args.seed, 1),
        noise=args.noise,
    )
  return ratings_lib.read_ratings(args.ratings, args.separator)


def cmd_ratings(
    args: argparse.Namespace,
    artifacts: _Artifacts,
    config: dict[str, Any] | None = None,
) -> int:
  """Runs the `ratings` subcommand."""
  dataset = _load_ratings(args)
  stop = _stopping_rule(args, constants.RATINGS_STOP_MAE)
  if stop.kind != svt.StopKind.TRAIN_MAE:
    raise ValueError('The ratings experiment stops on the train MAE.')
  summary, result = evaluation.run_ratings_experiment(
      dataset,
      args.train_fraction,
      args.seed,
      backend=args.backend,
      stop_mae=stop.tolerance,
      patience=args.patience,
      stop_on_overfit=args.stop_on_overfit,
      config_overrides=config or _config_overrides(args),
  )
  if not args.synthetic:
    artifacts.write_with(
        'index_maps.json',
        lambda p: ratings_lib.save_index_maps(dataset, p),
    )
  _write_trace(artifacts, args, result)
  artifacts.write_text(_SUMMARY, summary.to_json(indent=2) + '\n')
  _write_manifest(artifacts, args, args.backend, result.config)
  print(
      f'best test MAE {summary.best_test_mae:.4f} at iteration '
      f'{summary.best_test_iteration}; overfitting from iteration '
      f'{summary.overfit_iteration}'
  )
  if args.stop_on_overfit and result.stop_reason == 'monitor':
    return EXIT_OK
  return _report(result)


def _parse_list(text: str, name: str) -> list[str]:
  items = [t.strip() for t in text.split(',') if t.strip()]
  if not items:
    raise ValueError(f'--{name} must not be empty.')
  return items


def cmd_bench(
    args: argparse.Namespace,
    artifacts: _Artifacts,
    config: dict[str, Any] | None = None,
) -> int:
  """Runs the `bench` subcommand."""
  del config
  try:
    sizes = [int(s) for s in _parse_list(args.sizes, 'sizes')]
  except ValueError as err:
    raise ValueError(f'Invalid --sizes {args.sizes!r}.') from err
  backends = [
      backends_base.BackendName(b).value
      for b in _parse_list(args.backends, 'backends')
  ]
  duration, rows = evaluation.benchmark_backends(
      sizes=sizes,
      backends=backends,
      fraction=args.fraction,
      rank=args.rank,
      maxit=args.maxit,
      seed=args.seed,
  )
  artifacts.write_text(
      'bench.csv', evaluation.bench_rows_to_csv(rows), args.out
  )
  _write_manifest(artifacts, args, ','.join(backends), None)
  print(f'{len(rows)} rows in {duration}')
  return EXIT_OK


_COMMANDS = immutabledict.immutabledict({
    'complete': cmd_complete,
    'image': cmd_image,
    'ratings': cmd_ratings,
    'bench': cmd_bench,
})


def _set_log_level() -> None:
  level = os.environ.get(LOG_LEVEL_ENV, _DEFAULT_LOG_LEVEL).lower()
  try:
    logging.set_verbosity(level)
  except ValueError:
    logging.set_verbosity(_DEFAULT_LOG_LEVEL)
    logging.warning('Ignoring unknown %s level %r.', LOG_LEVEL_ENV, level)


def _load_manifest(path: str) -> tuple[argparse.Namespace, dict[str, Any]]:
  with open(path, 'r') as f:
    manifest = RunManifest.from_json(f.read())
  if manifest.command not in _COMMANDS:
    raise ValueError(f'{path}: unknown command {manifest.command!r}.')
  args = argparse.Namespace(command=manifest.command, manifest=path)
  for key, value in manifest.arguments.items():
    setattr(args, key, value)
  return args, manifest.config or {}


def main(argv: Sequence[str] | None = None) -> int:
  """Runs the `svt` command and returns its exit code."""
  _set_log_level()
  parser = build_parser()
  args = parser.parse_args(argv)
  config = None
  threads = args.global_threads
  if args.manifest is not None:
    try:
      args, config = _load_manifest(args.manifest)
    except (ValueError, OSError, KeyError) as err:
      print(f'svt: invalid manifest: {err}', file=sys.stderr)
      return EXIT_INPUT_ERROR
  elif args.command is None:
    parser.print_usage(sys.stderr)
    return EXIT_INPUT_ERROR
  elif args.threads is not None:
    threads = args.threads
  if threads is not None:
    args.threads = threads
  artifacts = _Artifacts(args.out_dir)
  try:
    return _COMMANDS[args.command](args, artifacts, config)
  except (ValueError, OSError) as err:
    artifacts.cleanup()
    logging.error('%s failed: %s', args.command, err)
    print(f'svt {args.command}: {err}', file=sys.stderr)
    return EXIT_INPUT_ERROR
