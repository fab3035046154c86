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

import pathlib

import numpy as np
import pytest

import fedsca

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_simplex_project_examples():
    assert fedsca.simplex_project([0.5, 0.5]) == [0.5, 0.5]
    assert fedsca.simplex_project([2.0, 0.0]) == [1.0, 0.0]
    w = fedsca.simplex_project([0.3, -1.0, 0.9, 0.2])
    assert min(w) >= 0.0
    assert sum(w) == pytest.approx(1.0, abs=1e-12)


def test_solve_row_alpha_zero_is_uniform():
    assert fedsca.solve_row(0.25, [0.3, -0.7, 1.0, 0.0], 0.0) == [0.25] * 4


def test_config_round_trip_and_errors():
    text = fedsca.default_config_text()
    assert fedsca.canonical_config_text(text) == text
    assert len(fedsca.config_hash(text)) == 64
    with pytest.raises(fedsca.ConfigError):
        fedsca.canonical_config_text("[experiment]\nround = 3\n")
    with pytest.raises(fedsca.FedscaError):
        fedsca.canonical_config_text("[experiment]\nrounds = 0\n")


def test_quick_run_and_export(tmp_path):
    out = tmp_path / "run"
    store = fedsca.run_file(CONFIGS / "quick.ini", seed=1, out=str(out))
    assert store["seed"] == 1
    assert len(store["rounds"]) == 3
    last = store["rounds"][-1]
    w = np.asarray(last["W"])
    assert w.shape == (3, 3)
    np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-9)
    assert 0.0 <= last["mean_iou"] <= 1.0
    files = fedsca.export(str(out), "jsonl")
    assert {pathlib.Path(f).name for f in files} >= {"metrics.jsonl", "ledger.jsonl"}
    again = fedsca.run_file(CONFIGS / "quick.ini", seed=1)
    assert again["rounds"][-1]["mean_iou"] == last["mean_iou"]


def test_oracle_suite_passes():
    results = fedsca.oracle_suite()
    assert results
    assert all(r["passed"] for r in results), [r for r in results if not r["passed"]]
