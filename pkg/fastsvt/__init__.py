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

"""FastSVT API."""

# Do NOT add anything here !!
# Indeed, top-level `__init__.py` makes it hard to import a specific sub-module
# without triggering a full import of the codebase.
# Instead, the public API is exposed in `fsvt.py`.

# When changing this, also update the CHANGELOG.md.
__version__ = '0.1.0'
