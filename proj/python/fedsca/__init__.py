# Copyright 2026 The FedSCA Simulator Authors.
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

"""Python front end for the fedsca federated adapter simulator."""

from fedsca._fedsca import (
    ConfigError,
    FedscaError,
    canonical_config_text,
    code_version,
    config_hash,
    default_config_text,
    export,
    oracle_suite,
    run,
    simplex_project,
    solve_row,
)

__all__ = [
    "ConfigError",
    "FedscaError",
    "canonical_config_text",
    "code_version",
    "config_hash",
    "default_config_text",
    "export",
    "oracle_suite",
    "run",
    "run_file",
    "simplex_project",
    "solve_row",
]


def run_file(path, seed=None, out=None):
    with open(path, encoding="utf-8") as fh:
        return run(fh.read(), seed=seed, out=out)
