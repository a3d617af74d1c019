// Copyright 2026 The Authors.
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

#include "alseg/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "alseg/errors.h"
#include "json.hpp"

namespace alseg {

using nlohmann::json;

namespace {

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys = {
      "dataset",   "methods", "q",        "n_iters",  "steps",
      "particles", "batch_size", "epsilon", "alpha",   "bins",
      "mode",      "arch",    "filters",  "smoothing", "max_multiplicity",
      "seeds",     "out"};
  return keys;
}

template <typename T>
T Get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

size_t GetCount(const json& j, const char* key) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("config key '") + key +
                      "' must be a non-negative integer");
  }
  return v.get<size_t>();
}

double GetReal(const json& j, const char* key) {
  if (!j.at(key).is_number()) {
    throw ConfigError(std::string("config key '") + key +
                      "' must be a number");
  }
  return j.at(key).get<double>();
}

}  // namespace

std::string DeleteTag(bool delete_flag) {
  return delete_flag ? "delete" : "nodelete";
}

std::string RunName(const MethodSpec& spec, uint64_t seed) {
  return MethodName(spec.method) + "_" + DeleteTag(spec.delete_flag) + "_" +
         std::to_string(seed);
}

void ExperimentConfig::Validate() const {
  auto positive = [](size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(q, "q");
  positive(n_iters, "n_iters");
  positive(steps, "steps");
  positive(particles, "particles");
  positive(batch_size, "batch_size");
  positive(filters, "filters");
  if (bins < 2) throw ConfigError("bins must be at least 2");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(smoothing > 0.0)) throw ConfigError("smoothing must be positive");
  if (methods.empty()) throw ConfigError("methods must be nonempty");
  for (size_t i = 0; i < methods.size(); ++i) {
    for (size_t j = 0; j < i; ++j) {
      if (methods[i] == methods[j]) {
        throw ConfigError("duplicate method entry " +
                          MethodName(methods[i].method) + "/" +
                          DeleteTag(methods[i].delete_flag));
      }
    }
  }
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (std::set<uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
}

ExperimentConfig ParseExperimentConfig(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!KnownKeys().contains(key)) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  ExperimentConfig c;
  if (j.contains("dataset")) c.dataset = Get<std::string>(j, "dataset");
  if (j.contains("methods")) {
    if (!j["methods"].is_array()) {
      throw ConfigError("config key 'methods' must be an array");
    }
    for (const json& m : j["methods"]) {
      if (!m.is_object()) {
        throw ConfigError("each methods entry must be an object");
      }
      for (const auto& [key, value] : m.items()) {
        if (key != "method" && key != "delete") {
          throw ConfigError("unknown methods key '" + key + "'");
        }
      }
      MethodSpec spec;
      spec.method = ParseMethod(Get<std::string>(m, "method"));
      if (m.contains("delete")) spec.delete_flag = Get<bool>(m, "delete");
      c.methods.push_back(spec);
    }
  }
  if (j.contains("q")) c.q = GetCount(j, "q");
  if (j.contains("n_iters")) c.n_iters = GetCount(j, "n_iters");
  if (j.contains("steps")) c.steps = GetCount(j, "steps");
  if (j.contains("particles")) c.particles = GetCount(j, "particles");
  if (j.contains("batch_size")) c.batch_size = GetCount(j, "batch_size");
  if (j.contains("epsilon")) c.epsilon = GetReal(j, "epsilon");
  if (j.contains("alpha")) c.alpha = GetReal(j, "alpha");
  if (j.contains("bins")) c.bins = GetCount(j, "bins");
  if (j.contains("mode")) c.mode = ParseTrainerMode(Get<std::string>(j, "mode"));
  if (j.contains("arch")) c.arch = ParseArchKind(Get<std::string>(j, "arch"));
  if (j.contains("filters")) c.filters = GetCount(j, "filters");
  if (j.contains("smoothing")) c.smoothing = GetReal(j, "smoothing");
  if (j.contains("max_multiplicity")) {
    c.max_multiplicity = GetCount(j, "max_multiplicity");
  }
  if (j.contains("seeds")) {
    if (!j["seeds"].is_array()) {
      throw ConfigError("config key 'seeds' must be an array");
    }
    c.seeds.clear();
    for (const json& s : j["seeds"]) {
      if (!s.is_number_unsigned()) {
        throw ConfigError("seeds must be non-negative integers");
      }
      c.seeds.push_back(s.get<uint64_t>());
    }
  }
  if (j.contains("out")) c.out = Get<std::string>(j, "out");
  c.Validate();
  return c;
}

std::string SerializeExperimentConfig(const ExperimentConfig& c) {
  json methods = json::array();
  for (const MethodSpec& m : c.methods) {
    methods.push_back({{"method", MethodName(m.method)},
                       {"delete", m.delete_flag}});
  }
  json j = {{"dataset", c.dataset},
            {"methods", methods},
            {"q", c.q},
            {"n_iters", c.n_iters},
            {"steps", c.steps},
            {"particles", c.particles},
            {"batch_size", c.batch_size},
            {"epsilon", c.epsilon},
            {"alpha", c.alpha},
            {"bins", c.bins},
            {"mode", TrainerModeName(c.mode)},
            {"arch", ArchKindName(c.arch)},
            {"filters", c.filters},
            {"smoothing", c.smoothing},
            {"max_multiplicity", c.max_multiplicity},
            {"seeds", c.seeds},
            {"out", c.out}};
  return j.dump(2) + "\n";
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseExperimentConfig(ss.str());
}

ActiveConfig ToActiveConfig(const ExperimentConfig& c, const MethodSpec& spec) {
  ActiveConfig a;
  a.method = spec.method;
  a.delete_flag = spec.delete_flag;
  a.q = c.q;
  a.n_iters = c.n_iters;
  a.alpha = c.alpha;
  a.bins = c.bins;
  a.max_multiplicity = c.max_multiplicity;
  a.train.arch.kind = c.arch;
  a.train.arch.filters = c.filters;
  a.train.steps = c.steps;
  a.train.batch_size = c.batch_size;
  a.train.particles = c.particles;
  a.train.step_size = c.epsilon;
  a.train.mode = c.mode;
  a.train.dice.smoothing = c.smoothing;
  return a;
}

std::string RunManifestJson(const ExperimentConfig& c, const MethodSpec& spec,
                            uint64_t seed,
                            const std::vector<double>& hist_edges,
                            size_t total_available,
                            const std::string& stop_reason) {
  json j = {{"method", MethodName(spec.method)},
            {"delete", spec.delete_flag},
            {"q", c.q},
            {"n_iters", c.n_iters},
            {"steps", c.steps},
            {"M", c.particles},
            {"epsilon", c.epsilon},
            {"alpha", c.alpha},
            {"bins", c.bins},
            {"seed", seed},
            {"dataset_path", c.dataset},
            {"mode", TrainerModeName(c.mode)},
            {"batch_size", c.batch_size},
            {"total_available", total_available},
            {"hist_edges", hist_edges},
            {"stop_reason", stop_reason}};
  return j.dump(2) + "\n";
}

}  // namespace alseg
