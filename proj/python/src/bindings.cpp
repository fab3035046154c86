// Copyright 2026 The FedSCA Simulator Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fedsca/errors.hpp"
#include "fedsca/numerics.hpp"
#include "fedsca/oracles.hpp"
#include "fedsca/orchestrator.hpp"
#include "fedsca/sgca_server.hpp"

namespace py = pybind11;
using namespace fedsca;

namespace {

py::dict round_dict(const RoundRecord& r) {
  py::list clients;
  for (const auto& c : r.clients) {
    clients.append(py::dict(py::arg("train_loss") = c.train_loss, py::arg("test_iou") = c.test_iou,
                            py::arg("test_dice") = c.test_dice));
  }
  py::object w = py::none();
  if (r.collaboration) {
    w = py::cast(*r.collaboration);
  }
  return py::dict(py::arg("round") = r.round, py::arg("clients") = clients,
                  py::arg("mean_iou") = r.mean_iou, py::arg("mean_dice") = r.mean_dice,
                  py::arg("W") = w, py::arg("layer_shift") = r.layer_shift,
                  py::arg("comm_total") = r.comm_total);
}

py::dict store_dict(const ResultsStore& s) {
  py::list rounds;
  for (const auto& r : s.rounds) {
    rounds.append(round_dict(r));
  }
  return py::dict(py::arg("config_hash") = s.manifest.config_hash, py::arg("seed") = s.manifest.seed,
                  py::arg("code_version") = s.manifest.code_version,
                  py::arg("config_text") = s.config_text, py::arg("rounds") = rounds,
                  py::arg("comm_total") = s.ledger.total());
}

}  // namespace

PYBIND11_MODULE(_fedsca, m) {
  m.doc() = "Native core of the fedsca simulator";

  static py::exception<Error> base_error(m, "FedscaError");
  static py::exception<ConfigError> config_error(m, "ConfigError", base_error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const Error& e) {
      base_error((std::string(to_string(e.category())) + ": " + e.what()).c_str());
    }
  });

  m.attr("code_version") = kCodeVersion;

  m.def("simplex_project", [](const std::vector<double>& c) { return simplex_project(c); }, py::arg("c"),
        "Euclidean projection onto the probability simplex.");
  m.def("solve_row", [](double m_value, const std::vector<double>& s, double alpha) {
          return solve_row(m_value, s, alpha);
        },
        py::arg("m"), py::arg("s"), py::arg("alpha"));

  m.def("default_config_text", [] { return to_config_text(default_experiment_config()); });
  m.def("canonical_config_text", [](const std::string& text) { return to_config_text(parse_config_text(text)); },
        py::arg("text"));
  m.def("config_hash", [](const std::string& text) { return config_hash(parse_config_text(text)); },
        py::arg("text"));

  m.def(
      "run",
      [](const std::string& text, std::optional<std::uint64_t> seed, std::optional<std::string> out) {
        auto cfg = parse_config_text(text);
        if (seed) {
          cfg.seed = *seed;
        }
        if (out) {
          cfg.output_dir = *out;
        }
        ResultsStore store;
        {
          py::gil_scoped_release release;
          store = run_experiment(cfg);
          if (out) {
            write_store(store, *out);
          }
        }
        return store_dict(store);
      },
      py::arg("config_text"), py::arg("seed") = py::none(), py::arg("out") = py::none(),
      "Runs one experiment from config text; writes the results store when out is given.");

  m.def(
      "export",
      [](const std::string& run_dir, const std::string& format, std::optional<std::string> out) {
        const auto store = read_store(run_dir);
        return export_results(store, parse_export_format(format), out.value_or(run_dir + "/export"));
      },
      py::arg("run_dir"), py::arg("format") = "csv", py::arg("out") = py::none());

  m.def("oracle_suite", [] {
    py::list out;
    for (const auto& r : oracle::run_oracle_suite()) {
      out.append(py::dict(py::arg("name") = r.name, py::arg("passed") = r.passed, py::arg("detail") = r.detail));
    }
    return out;
  });
}
