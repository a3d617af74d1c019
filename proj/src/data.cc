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

#include "alseg/data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "alseg/errors.h"
#include "alseg/rng.h"
#include "json.hpp"

namespace alseg {

using nlohmann::ordered_json;

std::string LatentName(LatentClass c) {
  switch (c) {
    case LatentClass::kA: return "a";
    case LatentClass::kB: return "b";
    case LatentClass::kC: return "c";
  }
  return "?";
}

LatentClass ParseLatent(const std::string& name) {
  if (name == "a") return LatentClass::kA;
  if (name == "b") return LatentClass::kB;
  if (name == "c") return LatentClass::kC;
  throw FormatError("unknown latent class '" + name + "'");
}

bool Geometry::Contains(int x, int y) const {
  if (kind == ShapeKind::kDisc) {
    const int dx = x - cx, dy = y - cy;
    return dx * dx + dy * dy <= r * r;
  }
  return x >= x0 && x < x1 && y >= y0 && y < y1;
}

void GeneratorSpec::Validate() const {
  const double s = mix[0] + mix[1] + mix[2];
  if (std::abs(s - 1.0) > 1e-9) {
    throw ConfigError("mixture weights must sum to 1, got " +
                      std::to_string(s));
  }
  for (double w : mix) {
    if (w < 0.0) throw ConfigError("mixture weights must be non-negative");
  }
  if (height < 16 || width < 16) {
    throw ConfigError("image size must be at least 16x16");
  }
  if (classes != 3) throw ConfigError("generator produces exactly 3 classes");
  if (noise < 0.0) throw ConfigError("noise must be non-negative");
}

namespace {

int RandInt(Rng& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng.Below(static_cast<uint64_t>(hi - lo + 1)));
}

Sample MakeSample(const GeneratorSpec& spec, int id, Rng& rng) {
  const int h = static_cast<int>(spec.height);
  const int w = static_cast<int>(spec.width);
  Sample s;
  s.id = id;
  const double u = rng.Uniform();
  s.latent = u < spec.mix[0]                 ? LatentClass::kA
             : u < spec.mix[0] + spec.mix[1] ? LatentClass::kB
                                             : LatentClass::kC;
  double label = 1.0;
  double contrast = spec.contrast;
  double sigma = spec.noise;
  Geometry& g = s.geometry;
  switch (s.latent) {
    case LatentClass::kA: {
      g.kind = ShapeKind::kDisc;
      g.r = RandInt(rng, h / 5, (h * 9) / 32);
      g.cx = RandInt(rng, g.r + 1, w - g.r - 2);
      g.cy = RandInt(rng, g.r + 1, h - g.r - 2);
      break;
    }
    case LatentClass::kB: {
      g.kind = ShapeKind::kBar;
      label = 2.0;
      const int thick = RandInt(rng, 2, 3);
      const int len = RandInt(rng, h / 2 - 2, (h * 11) / 16);
      const bool horizontal = rng.Below(2) == 0;
      const int bw = horizontal ? len : thick;
      const int bh = horizontal ? thick : len;
      g.x0 = RandInt(rng, 1, w - bw - 1);
      g.y0 = RandInt(rng, 1, h - bh - 1);
      g.x1 = g.x0 + bw;
      g.y1 = g.y0 + bh;
      break;
    }
    case LatentClass::kC: {
      g.kind = ShapeKind::kDisc;
      g.r = RandInt(rng, 2, 3);
      g.cx = RandInt(rng, g.r + 1, w - g.r - 2);
      g.cy = RandInt(rng, g.r + 1, h - g.r - 2);
      contrast = spec.sparse_contrast;
      sigma = spec.noise * spec.sparse_noise_factor;
      break;
    }
  }
  s.image = NDArray({1, spec.height, spec.width});
  s.mask = NDArray({spec.height, spec.width});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const bool fg = g.Contains(x, y);
      const size_t i = static_cast<size_t>(y * w + x);
      s.mask[i] = fg ? label : 0.0;
      double v = spec.background + (fg ? contrast : 0.0) + sigma * rng.Normal();
      v = std::clamp(v, 0.0, 1.0);
      s.image[i] = static_cast<float>(v);
    }
  }
  return s;
}

}  // namespace

std::vector<Sample> GenerateDataset(const GeneratorSpec& spec, uint64_t seed) {
  spec.Validate();
  std::vector<Sample> out;
  out.reserve(spec.count);
  const Rng root(seed);
  for (size_t i = 0; i < spec.count; ++i) {
    // One stream per sample so samples can be generated independently.
    Rng rng = root.Split("sample" + std::to_string(i));
    out.push_back(MakeSample(spec, static_cast<int>(i), rng));
  }
  return out;
}

DatasetSplit SplitDataset(size_t n, const SplitSizes& sizes, uint64_t seed) {
  if (sizes.Total() > n) {
    throw ConfigError("split sizes sum to " + std::to_string(sizes.Total()) +
                      " but only " + std::to_string(n) + " samples exist");
  }
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  Rng rng(seed);
  for (size_t i = n; i > 1; --i) {
    std::swap(ids[i - 1], ids[rng.Below(i)]);
  }
  DatasetSplit split;
  auto take = [&, pos = size_t{0}](size_t count) mutable {
    std::vector<int> part(ids.begin() + pos, ids.begin() + pos + count);
    std::sort(part.begin(), part.end());
    pos += count;
    return part;
  };
  split.initial_train = take(sizes.initial);
  split.unlabeled = take(sizes.unlabeled);
  split.validation = take(sizes.validation);
  split.test = take(sizes.test);
  return split;
}

Dataset MakeDataset(const GeneratorSpec& spec, const SplitSizes& sizes,
                    uint64_t seed) {
  Dataset d;
  d.spec = spec;
  d.seed = seed;
  d.samples = GenerateDataset(spec, seed);
  d.split = SplitDataset(d.samples.size(), sizes, DeriveSeed(seed, "split"));
  return d;
}

namespace {

ordered_json SpecToJson(const GeneratorSpec& s) {
  return {{"height", s.height},
          {"width", s.width},
          {"classes", s.classes},
          {"mix", s.mix},
          {"count", s.count},
          {"background", s.background},
          {"contrast", s.contrast},
          {"noise", s.noise},
          {"sparse_contrast", s.sparse_contrast},
          {"sparse_noise_factor", s.sparse_noise_factor}};
}

GeneratorSpec SpecFromJson(const nlohmann::json& j) {
  GeneratorSpec s;
  s.height = j.at("height").get<size_t>();
  s.width = j.at("width").get<size_t>();
  s.classes = j.at("classes").get<size_t>();
  s.mix = j.at("mix").get<std::array<double, 3>>();
  s.count = j.at("count").get<size_t>();
  s.background = j.at("background").get<double>();
  s.contrast = j.at("contrast").get<double>();
  s.noise = j.at("noise").get<double>();
  s.sparse_contrast = j.at("sparse_contrast").get<double>();
  s.sparse_noise_factor = j.at("sparse_noise_factor").get<double>();
  return s;
}

ordered_json GeometryToJson(const Geometry& g) {
  if (g.kind == ShapeKind::kDisc) {
    return {{"kind", "disc"}, {"cx", g.cx}, {"cy", g.cy}, {"r", g.r}};
  }
  return {{"kind", "bar"}, {"x0", g.x0}, {"y0", g.y0},
          {"x1", g.x1},    {"y1", g.y1}};
}

Geometry GeometryFromJson(const nlohmann::json& j) {
  Geometry g;
  if (j.at("kind") == "disc") {
    g.kind = ShapeKind::kDisc;
    g.cx = j.at("cx").get<int>();
    g.cy = j.at("cy").get<int>();
    g.r = j.at("r").get<int>();
  } else {
    g.kind = ShapeKind::kBar;
    g.x0 = j.at("x0").get<int>();
    g.y0 = j.at("y0").get<int>();
    g.x1 = j.at("x1").get<int>();
    g.y1 = j.at("y1").get<int>();
  }
  return g;
}

}  // namespace

void SaveDataset(const std::filesystem::path& dir, const Dataset& dataset) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");
  ordered_json samples = ordered_json::array();
  for (const Sample& s : dataset.samples) {
    const std::string name = std::to_string(s.id) + ".tsr";
    WriteTsr(dir / "images" / name, s.image);
    WriteTsr(dir / "masks" / name, s.mask);
    samples.push_back({{"id", s.id},
                       {"latent", LatentName(s.latent)},
                       {"geometry", GeometryToJson(s.geometry)}});
  }
  const ordered_json meta = {
      {"format", "alseg-dataset-1"},
      {"seed", dataset.seed},
      {"spec", SpecToJson(dataset.spec)},
      {"split",
       {{"initial", dataset.split.initial_train},
        {"unlabeled", dataset.split.unlabeled},
        {"validation", dataset.split.validation},
        {"test", dataset.split.test}}},
      {"samples", samples}};
  std::ofstream out(dir / "meta.json");
  if (!out) throw FormatError((dir / "meta.json").string() + ": cannot write");
  out << meta.dump(2) << "\n";
}

Dataset LoadDataset(const std::filesystem::path& dir) {
  const auto meta_path = dir / "meta.json";
  std::ifstream in(meta_path);
  if (!in) throw FormatError(meta_path.string() + ": missing");
  Dataset d;
  try {
    const auto meta = nlohmann::json::parse(in);
    d.seed = meta.at("seed").get<uint64_t>();
    d.spec = SpecFromJson(meta.at("spec"));
    const auto& sp = meta.at("split");
    d.split.initial_train = sp.at("initial").get<std::vector<int>>();
    d.split.unlabeled = sp.at("unlabeled").get<std::vector<int>>();
    d.split.validation = sp.at("validation").get<std::vector<int>>();
    d.split.test = sp.at("test").get<std::vector<int>>();
    for (const auto& js : meta.at("samples")) {
      Sample s;
      s.id = js.at("id").get<int>();
      s.latent = ParseLatent(js.at("latent").get<std::string>());
      s.geometry = GeometryFromJson(js.at("geometry"));
      d.samples.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  std::sort(d.samples.begin(), d.samples.end(),
            [](const Sample& a, const Sample& b) { return a.id < b.id; });
  for (size_t i = 0; i < d.samples.size(); ++i) {
    Sample& s = d.samples[i];
    if (s.id != static_cast<int>(i)) {
      throw FormatError(meta_path.string() + ": sample ids are not 0..N-1");
    }
    const std::string name = std::to_string(s.id) + ".tsr";
    s.image = ReadTsr(dir / "images" / name);
    s.mask = ReadTsr(dir / "masks" / name);
    const std::vector<size_t> ishape{1, d.spec.height, d.spec.width};
    const std::vector<size_t> mshape{d.spec.height, d.spec.width};
    if (s.image.shape() != ishape || s.mask.shape() != mshape) {
      throw FormatError((dir / "images" / name).string() +
                        ": unexpected tensor shape");
    }
  }
  return d;
}

NDArray StackImages(const Dataset& dataset, const std::vector<int>& ids) {
  const size_t h = dataset.spec.height, w = dataset.spec.width;
  NDArray out({ids.size(), 1, h, w});
  for (size_t i = 0; i < ids.size(); ++i) {
    const auto src = dataset.at(ids[i]).image.data();
    std::copy(src.begin(), src.end(), out.raw() + i * h * w);
  }
  return out;
}

NDArray StackMasks(const Dataset& dataset, const std::vector<int>& ids) {
  const size_t h = dataset.spec.height, w = dataset.spec.width;
  NDArray out({ids.size(), h, w});
  for (size_t i = 0; i < ids.size(); ++i) {
    const auto src = dataset.at(ids[i]).mask.data();
    std::copy(src.begin(), src.end(), out.raw() + i * h * w);
  }
  return out;
}

}  // namespace alseg
