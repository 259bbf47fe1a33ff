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

"""Entry point to the FastSVT library.

```python
from fastsvt import fsvt
```
"""

from fastsvt import evaluation
from fastsvt import svt
from fastsvt.backends import backends_base
from fastsvt.core import dense
from fastsvt.core import sketching
from fastsvt.core import sparse
from fastsvt.datasets import images
from fastsvt.datasets import matrix_market
from fastsvt.datasets import ratings
from fastsvt.datasets import synthetic

BackendName = backends_base.BackendName
make_backend = backends_base.make_backend
LowRankFactors = dense.LowRankFactors
SampledMatrix = sparse.SampledMatrix
SketchParams = sketching.SketchParams
rsvd = sketching.rsvd
r3svd = sketching.r3svd
r4svd = sketching.r4svd
SvtConfig = svt.SvtConfig
StopKind = svt.StopKind
StoppingRule = svt.StoppingRule
default_config = svt.default_config
shrink = svt.shrink
svt_run = svt.svt_run
svt_run_oracle = svt.svt_run_oracle
read_matrix_market = matrix_market.read_matrix_market
write_matrix_market = matrix_market.write_matrix_market
read_pgm = images.read_pgm
write_pgm = images.write_pgm
sample_image = images.sample_image
read_ratings = ratings.read_ratings
split_ratings = ratings.split_ratings
low_rank_matrix = synthetic.low_rank_matrix
sample_matrix = synthetic.sample_matrix
run_image_experiment = evaluation.run_image_experiment
run_ratings_experiment = evaluation.run_ratings_experiment
benchmark_backends = evaluation.benchmark_backends
