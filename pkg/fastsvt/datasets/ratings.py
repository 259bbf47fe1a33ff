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

"""Rating triples (user, item, rating) and their train/test splits.

Rating files hold one `user<sep>item<sep>rating[<sep>timestamp]` record per
line, as in the MovieLens `ratings.dat` files (separator `::`). User and item
ids are remapped to dense 0-based indices in order of first appearance; the
mapping tables are kept on the dataset and can be saved as JSON.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os

from absl import logging
from fastsvt.core import sparse
from fastsvt.core import utils
import numpy as np


Path = str | os.PathLike[str]

DEFAULT_SEPARATOR = '::'
_COUNT_SLACK = 1e-9


@dataclasses.dataclass(frozen=True, eq=False)
class RatingsDataset:
  """A set of ratings with dense user and item indices.

  Attributes:
    users: User index of every rating, in [0, num_users).
    items: Item index of every rating, in [0, num_items).
    ratings: Rating values. Their scale is recorded, not enforced.
    user_ids: Original id of every user index.
    item_ids: Original id of every item index.
    source: Provenance note, e.g. the file the ratings were read from.
  """

  users: np.ndarray
  items: np.ndarray
  ratings: np.ndarray
  user_ids: tuple[int, ...]
  item_ids: tuple[int, ...]
  source: str = ''

  def __post_init__(self):
    if not self.users.shape == self.items.shape == self.ratings.shape:
      raise ValueError('users, items and ratings must have the same length.')
    if self.size == 0:
      raise ValueError('A ratings dataset needs at least one rating.')
    pairs = self.users.astype(np.int64) * self.num_items + self.items
    if np.unique(pairs).shape[0] != self.size:
      raise ValueError('Duplicate (user, item) pair in ratings dataset.')

  @property
  def num_users(self) -> int:
    return len(self.user_ids)

  @property
  def num_items(self) -> int:
    return len(self.item_ids)

  @property
  def shape(self) -> tuple[int, int]:
    return self.num_users, self.num_items

  @property
  def size(self) -> int:
    return self.ratings.shape[0]

  @property
  def rating_range(self) -> tuple[float, float]:
    return float(self.ratings.min()), float(self.ratings.max())

  def to_matrix(self, mask: np.ndarray | None = None) -> sparse.SampledMatrix:
    """Returns the num_users x num_items matrix of (a subset of) ratings."""
    if mask is None:
      mask = np.ones(self.size, dtype=bool)
    return sparse.SampledMatrix.from_triplets(
        self.shape, self.users[mask], self.items[mask], self.ratings[mask]
    )


def read_ratings(
    path: Path, separator: str = DEFAULT_SEPARATOR
) -> RatingsDataset:
  """Reads rating records, ignoring any field after the rating.

  Args:
    path: File to read.
    separator: Field separator.

  Raises:
    ValueError: If the file holds no rating, a line has fewer than three
      fields, a field is not numeric or a (user, item) pair repeats. The
      message names the file and line.
  """
  user_index: dict[int, int] = {}
  item_index: dict[int, int] = {}
  users, items, ratings = [], [], []
  seen: dict[tuple[int, int], int] = {}
  with open(path, 'r') as f:
    for line_no, line in enumerate(f, start=1):
      line = line.strip()
      if not line:
        continue
      fields = line.split(separator)
      if len(fields) < 3:
        raise ValueError(
            f'{path}:{line_no}: expected user{separator}item{separator}rating,'
            f' got {line!r}.'
        )
      try:
        user, item = int(fields[0]), int(fields[1])
        rating = float(fields[2])
      except ValueError as err:
        raise ValueError(
            f'{path}:{line_no}: non-numeric field in {line!r}.'
        ) from err
      if not math.isfinite(rating):
        raise ValueError(f'{path}:{line_no}: non-finite rating {fields[2]!r}.')
      u = user_index.setdefault(user, len(user_index))
      i = item_index.setdefault(item, len(item_index))
      if (u, i) in seen:
        raise ValueError(
            f'{path}:{line_no}: duplicate rating of item {item} by user '
            f'{user} (first on line {seen[(u, i)]}).'
        )
      seen[(u, i)] = line_no
      users.append(u)
      items.append(i)
      ratings.append(rating)
  if not ratings:
    raise ValueError(f'{path}: no ratings found.')
  dataset = RatingsDataset(
      users=np.asarray(users, dtype=np.int64),
      items=np.asarray(items, dtype=np.int64),
      ratings=np.asarray(ratings, dtype=np.float64),
      user_ids=tuple(user_index),
      item_ids=tuple(item_index),
      source=os.fspath(path),
  )
  logging.info(
      'Read %d ratings of %d users on %d items from %s (range %s).',
      dataset.size, dataset.num_users, dataset.num_items, path,
      dataset.rating_range)
  return dataset


def split_ratings(
    dataset: RatingsDataset, train_fraction: float, seed: utils.Seed
) -> tuple[sparse.SampledMatrix, sparse.SampledMatrix]:
  """Splits the ratings uniformly at random into train and test matrices.

  Both matrices share the num_users x num_items frame; their patterns are
  disjoint and their union is the whole dataset.

  Args:
    dataset: The ratings.
    train_fraction: Fraction of ratings in the train set, in (0, 1).
    seed: Seed of the split.

  Raises:
    ValueError: If `train_fraction` is outside (0, 1) or one side would be
      empty.
  """
  if not 0.0 < train_fraction < 1.0:
    raise ValueError(
        f'train_fraction must be in (0, 1), got {train_fraction}.'
    )
  train_size = math.floor(train_fraction * dataset.size + _COUNT_SLACK)
  if not 1 <= train_size < dataset.size:
    raise ValueError(
        f'Splitting {dataset.size} ratings with fraction {train_fraction} '
        'leaves an empty side.'
    )
  order = utils.make_rng(seed).permutation(dataset.size)
  train_mask = np.zeros(dataset.size, dtype=bool)
  train_mask[order[:train_size]] = True
  return dataset.to_matrix(train_mask), dataset.to_matrix(~train_mask)


def save_index_maps(dataset: RatingsDataset, path: Path) -> None:
  """Saves the dense-index to original-id tables as JSON."""
  document = {
      'source': dataset.source,
      'user_ids': list(dataset.user_ids),
      'item_ids': list(dataset.item_ids),
  }
  with open(path, 'w') as f:
    json.dump(document, f, indent=2)


def load_index_maps(path: Path) -> tuple[tuple[int, ...], tuple[int, ...]]:
  """Returns the (user_ids, item_ids) tables saved by `save_index_maps`."""
  with open(path, 'r') as f:
    document = json.load(f)
  return tuple(document['user_ids']), tuple(document['item_ids'])
