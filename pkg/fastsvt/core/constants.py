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

"""Some constants used throughout the fastsvt codebase."""

from typing import Final

# Tolerance on |Q^T Q - I| above which a basis is re-orthonormalized.
ORTHONORMALITY_TOLERANCE: Final[float] = 1e-8

# Relative size of the projection onto Q that triggers a second
# Gram-Schmidt pass when extending a QB decomposition.
REORTHOGONALIZATION_RATIO: Final[float] = 1e-8

# Power-iteration count used by the SVT kickstart.
KICKSTART_POWER_ITERATIONS: Final[int] = 20

# Parameter settings used in the reference experiments.
DEFAULT_INITIAL_SAMPLE_FRACTION: Final[float] = 0.05
DEFAULT_SAMPLE_STEP: Final[int] = 10
DEFAULT_ANNEALING_FACTOR: Final[float] = 0.95
DEFAULT_EPS_THRESHOLD0: Final[float] = 0.5
DEFAULT_POWER_ITERATIONS: Final[int] = 1
DEFAULT_OVERSAMPLING: Final[int] = 5
DEFAULT_MAXIT: Final[int] = 500
# The default residual tolerance is relative to ||P_Lambda(A)||_F.
DEFAULT_RELATIVE_EPS_STOP: Final[float] = 1e-4
# Fraction of min(m, n) used as rank by the fixed-rank backend by default.
DEFAULT_FIXED_RANK_FRACTION: Final[float] = 0.3

# Default stopping tolerances on the train MAE.
IMAGE_STOP_MAE: Final[float] = 1.0
RATINGS_STOP_MAE: Final[float] = 0.1
# Used by the `complete` command when no stop flag is given.
COMPLETE_STOP_MAE: Final[float] = 1e-3

# Version of the trace CSV/JSON layout.
TRACE_SCHEMA_VERSION: Final[int] = 1
