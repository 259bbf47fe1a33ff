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

"""Grayscale images and their sampling.

Images are read from and written to PGM files: binary `P5` (through Pillow)
and plain `P2`, both with a maximum value of 255. An image of height m and
width n is the m x n matrix of its 8-bit pixel values.
"""

from __future__ import annotations

import dataclasses
import io
import math
import os

from absl import logging
from fastsvt.core import dense
from fastsvt.core import sparse
from fastsvt.core import utils
import numpy as np
from PIL import Image


Path = str | os.PathLike[str]

_MAXVAL = 255
_GRAY_MAGICS = (b'P2', b'P5')
_COLOR_MAGICS = (b'P3', b'P6')
# Absorbs the rounding of fraction * pixels, e.g. 0.3 * 10 = 2.9999999999999996.
_COUNT_SLACK = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class GrayImage:
  """An 8-bit grayscale image.

  Attributes:
    pixels: height x width array of values in [0, 255] (stored as uint8).
  """

  pixels: np.ndarray

  def __post_init__(self):
    pixels = np.asarray(self.pixels)
    if pixels.ndim != 2 or min(pixels.shape) < 1:
      raise ValueError(
          f'An image needs two non-zero dimensions, got {pixels.shape}.'
      )
    if not np.issubdtype(pixels.dtype, np.integer):
      if not np.all(np.isfinite(pixels)) or np.any(pixels != np.round(pixels)):
        raise ValueError('Pixel values must be integers.')
    if pixels.min() < 0 or pixels.max() > _MAXVAL:
      raise ValueError(f'Pixel values must be in [0, {_MAXVAL}].')
    object.__setattr__(self, 'pixels', pixels.astype(np.uint8))

  @property
  def height(self) -> int:
    return self.pixels.shape[0]

  @property
  def width(self) -> int:
    return self.pixels.shape[1]

  def as_matrix(self) -> np.ndarray:
    """Returns the pixels as a float64 matrix."""
    return self.pixels.astype(np.float64)


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
  """Returns the first `count` header tokens and the offset after them."""
  tokens = []
  pos = 0
  while len(tokens) < count:
    while pos < len(data) and data[pos:pos + 1].isspace():
      pos += 1
    if pos < len(data) and data[pos:pos + 1] == b'#':
      while pos < len(data) and data[pos:pos + 1] not in (b'\n', b'\r'):
        pos += 1
      continue
    start = pos
    while pos < len(data) and not data[pos:pos + 1].isspace():
      pos += 1
    if start == pos:
      break
    tokens.append(data[start:pos])
  return tokens, pos


def read_pgm(path: Path) -> GrayImage:
  """Reads a P5 (binary) or P2 (plain) PGM image with maxval 255.

  Raises:
    ValueError: For color (P3/P6) or other unsupported files, a maxval other
      than 255, or truncated pixel data.
    OSError: If the file cannot be read.
  """
  with open(path, 'rb') as f:
    data = f.read()
  magic = data[:2]
  if magic in _COLOR_MAGICS:
    raise ValueError(
        f'{path}: color PPM ({magic.decode()}) images are not supported; '
        'convert the image to 8-bit grayscale PGM first (e.g. '
        '`PIL.Image.open(path).convert("L").save(out)`).'
    )
  if magic not in _GRAY_MAGICS:
    raise ValueError(f'{path}: not a PGM file (magic {magic!r}).')
  tokens, offset = _header_tokens(data, 4)
  if len(tokens) != 4:
    raise ValueError(f'{path}: truncated PGM header.')
  try:
    width, height, maxval = (int(t) for t in tokens[1:])
  except ValueError as err:
    raise ValueError(f'{path}: malformed PGM header {tokens}.') from err
  if width < 1 or height < 1:
    raise ValueError(f'{path}: invalid image size {width}x{height}.')
  if maxval != _MAXVAL:
    raise ValueError(
        f'{path}: only maxval {_MAXVAL} is supported, got {maxval}.'
    )
  if magic == b'P5':
    if len(data) - (offset + 1) < width * height:
      raise ValueError(f'{path}: truncated pixel data.')
    with Image.open(io.BytesIO(data)) as image:
      pixels = np.asarray(image.convert('L'))
  else:
    fields = data[offset:].split()
    if len(fields) != width * height:
      raise ValueError(
          f'{path}: expected {width * height} pixel values, found '
          f'{len(fields)}.'
      )
    try:
      values = [int(v) for v in fields]
    except ValueError as err:
      raise ValueError(f'{path}: non-integer pixel value.') from err
    pixels = np.asarray(values, dtype=np.int64).reshape(height, width)
  logging.info('Read %dx%d image from %s.', width, height, path)
  return GrayImage(pixels)


def write_pgm(image: GrayImage, path: Path, binary: bool = True) -> None:
  """Writes a P5 (binary, default) or P2 (plain) PGM image."""
  if binary:
    Image.fromarray(image.pixels).save(path, format='PPM')
    return
  lines = ['P2', f'{image.width} {image.height}', str(_MAXVAL)]
  lines.extend(' '.join(str(v) for v in row) for row in image.pixels.tolist())
  with open(path, 'w') as f:
    f.write('\n'.join(lines) + '\n')


def sample_count(fraction: float, size: int) -> int:
  """Returns floor(fraction * size)."""
  return math.floor(fraction * size + _COUNT_SLACK)


def sample_image(
    image: GrayImage, fraction: float, seed: utils.Seed
) -> sparse.SampledMatrix:
  """Samples pixels uniformly without replacement.

  Args:
    image: The image to sample.
    fraction: Fraction of pixels to keep, in (0, 1].
    seed: Seed of the sample set.

  Returns:
    The height x width matrix of the sampled pixel values, with exactly
    floor(fraction * width * height) samples.

  Raises:
    ValueError: If `fraction` is outside (0, 1] or yields no sample.
  """
  if not 0.0 < fraction <= 1.0:
    raise ValueError(f'fraction must be in (0, 1], got {fraction}.')
  size = image.width * image.height
  count = sample_count(fraction, size)
  if count < 1:
    raise ValueError(
        f'fraction {fraction} of {size} pixels gives no sample.'
    )
  positions = utils.make_rng(seed).choice(size, size=count, replace=False)
  rows, cols = np.divmod(positions, image.width)
  return sparse.SampledMatrix.from_triplets(
      (image.height, image.width),
      rows,
      cols,
      image.pixels[rows, cols].astype(np.float64),
  )


def factors_to_image(factors: dense.LowRankFactors) -> GrayImage:
  """Rounds and clips a low-rank reconstruction to an 8-bit image."""
  values = np.clip(np.rint(factors.to_dense()), 0, _MAXVAL)
  return GrayImage(values.astype(np.uint8))
