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

#include "alseg/pool.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

#include "alseg/errors.h"
#include "alseg/metrics.h"
#include "alseg/rng.h"

namespace alseg {

namespace {

constexpr std::pair<AcquisitionMethod, const char*> kMethods[] = {
    {AcquisitionMethod::kRandom, "random"},
    {AcquisitionMethod::kEpistemic, "epistemic"},
    {AcquisitionMethod::kEpistemicMI, "epistemic+mi"},
    {AcquisitionMethod::kJsd, "jsd"},
    {AcquisitionMethod::kVariance, "variance"},
    {AcquisitionMethod::kMaxCover, "max-cover"},
};

}  // namespace

std::string MethodName(AcquisitionMethod m) {
  for (const auto& [k, v] : kMethods) {
    if (k == m) return v;
  }
  return "?";
}

std::vector<std::string> MethodNames() {
  std::vector<std::string> out;
  for (const auto& kv : kMethods) out.emplace_back(kv.second);
  return out;
}

AcquisitionMethod ParseMethod(const std::string& name) {
  for (const auto& [k, v] : kMethods) {
    if (name == v) return k;
  }
  std::string valid;
  for (const auto& n : MethodNames()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown method '" + name + "'; valid methods: " + valid);
}

PoolState::PoolState(std::vector<int> initial_train,
                     std::vector<int> unlabeled, bool delete_flag, bool use_mi)
    : unlabeled_(std::move(unlabeled)),
      delete_flag_(delete_flag),
      use_mi_(use_mi),
      initial_training_(initial_train.size()),
      initial_unlabeled_(unlabeled_.size()) {
  for (int id : initial_train) {
    if (annotated_.contains(id)) {
      throw StateError("initial training pool has duplicate id " +
                       std::to_string(id));
    }
    training_.push_back({id, 1});
    annotated_.insert(id);
  }
  for (int id : unlabeled_) {
    if (annotated_.contains(id)) {
      throw StateError("id " + std::to_string(id) +
                       " is in both the training and unlabeled pools");
    }
  }
}

size_t PoolState::TotalMultiplicity() const {
  size_t n = 0;
  for (const auto& e : training_) n += e.multiplicity;
  return n;
}

size_t PoolState::Multiplicity(int id) const {
  for (const auto& e : training_) {
    if (e.id == id) return e.multiplicity;
  }
  return 0;
}

bool PoolState::InUnlabeled(int id) const {
  return std::find(unlabeled_.begin(), unlabeled_.end(), id) !=
         unlabeled_.end();
}

void PoolState::CheckInvariants(size_t q) const {
  auto fail = [](const std::string& msg) { throw StateError(msg); };
  for (const auto& e : training_) {
    if (!annotated_.contains(e.id)) {
      fail("training id " + std::to_string(e.id) + " was never annotated");
    }
    if (e.multiplicity < 1) fail("zero multiplicity in training pool");
  }
  std::set<int> seen;
  for (const auto& e : training_) {
    if (!seen.insert(e.id).second) {
      fail("training id " + std::to_string(e.id) + " listed twice");
    }
  }
  const size_t added = q * iterations_;
  if (UniqueTrainingCount() > initial_training_ + added) {
    fail("unique training count exceeds |T0| + q*t");
  }
  if (TotalMultiplicity() != initial_training_ + added) {
    fail("multiplicities sum to " + std::to_string(TotalMultiplicity()) +
         ", expected " + std::to_string(initial_training_ + added));
  }
  if (delete_flag_) {
    for (const auto& e : training_) {
      if (e.multiplicity != 1) fail("duplicate in training pool (delete mode)");
      if (InUnlabeled(e.id)) fail("T and U intersect (delete mode)");
    }
    if (unlabeled_.size() != initial_unlabeled_ - added) {
      fail("|U| != |U0| - q*t (delete mode)");
    }
  } else if (unlabeled_.size() != initial_unlabeled_) {
    fail("|U| changed in no-delete mode");
  }
}

PoolState ApplySelection(const PoolState& pool, std::span<const int> selected) {
  PoolState next = pool;
  for (int id : selected) {
    if (!next.InUnlabeled(id)) {
      throw StateError("selected id " + std::to_string(id) +
                       " is not in the unlabeled pool");
    }
    next.annotated_.insert(id);
    if (next.delete_flag_) {
      std::erase(next.unlabeled_, id);
      next.training_.push_back({id, 1});
      continue;
    }
    auto it = std::find_if(next.training_.begin(), next.training_.end(),
                           [id](const PoolEntry& e) { return e.id == id; });
    if (it != next.training_.end()) {
      ++it->multiplicity;
    } else {
      next.training_.push_back({id, 1});
    }
  }
  ++next.iterations_;
  return next;
}

double PercentDataUsed(const PoolState& pool, size_t total_available) {
  if (total_available == 0) {
    throw ConfigError("percent_data_used: total must be positive");
  }
  return 100.0 * static_cast<double>(pool.UniqueTrainingCount()) /
         static_cast<double>(total_available);
}

Oracle::Oracle(std::map<int, NDArray> labels,
               std::span<const int> pre_annotated)
    : labels_(std::move(labels)),
      annotated_(pre_annotated.begin(), pre_annotated.end()) {}

std::vector<std::pair<int, NDArray>> Oracle::Annotate(
    std::span<const int> ids) {
  for (int id : ids) {
    if (!labels_.contains(id)) {
      throw LookupError("oracle has no label for id " + std::to_string(id));
    }
  }
  std::vector<std::pair<int, NDArray>> out;
  for (int id : ids) {
    if (annotated_.insert(id).second) ++annotation_count_;
    out.emplace_back(id, labels_.at(id));
  }
  return out;
}

TrainingSet MakeTrainingSet(const Dataset& dataset, const PoolState& pool) {
  std::vector<int> ids;
  TrainingSet set;
  for (const auto& e : pool.training()) {
    for (size_t k = 0; k < e.multiplicity; ++k) set.entries.push_back(ids.size());
    ids.push_back(e.id);
  }
  set.images = StackImages(dataset, ids);
  set.masks = StackMasks(dataset, ids);
  return set;
}

namespace {

PredictiveStack StackFor(const std::vector<NDArray>& preds, size_t index,
                         int image_id) {
  const size_t m = preds.size(), c = preds[0].dim(1);
  const size_t h = preds[0].dim(2), w = preds[0].dim(3), chw = c * h * w;
  PredictiveStack stack{NDArray({m, c, h, w}), std::to_string(image_id)};
  for (size_t q = 0; q < m; ++q) {
    std::copy_n(preds[q].raw() + index * chw, chw, stack.probs.raw() + q * chw);
  }
  return stack;
}

struct Selection {
  std::vector<int> ids;
  std::vector<ScoreRow> rows;
};

Selection ScoreAndSelect(const Dataset& dataset, const ActiveConfig& config,
                         const ParticleSet& particles, const PoolState& pool,
                         const std::vector<int>& candidates, int iter,
                         Rng& acquire_rng) {
  const size_t n = candidates.size();
  Selection sel;
  sel.rows.resize(n);
  for (size_t j = 0; j < n; ++j) {
    sel.rows[j].iter = iter;
    sel.rows[j].image_id = candidates[j];
  }
  std::vector<size_t> picks;

  if (config.method == AcquisitionMethod::kRandom) {
    picks = RandomSelect(n, config.q, acquire_rng);
  } else {
    const NDArray images = StackImages(dataset, candidates);
    const auto preds = ParticlePredictions(config.train.arch, particles, images);
    std::vector<double> raw(n);
    for (size_t j = 0; j < n; ++j) {
      const PredictiveStack stack = StackFor(preds, j, candidates[j]);
      switch (config.method) {
        case AcquisitionMethod::kJsd: raw[j] = JsdScore(stack); break;
        case AcquisitionMethod::kVariance: raw[j] = VarianceScore(stack); break;
        default: raw[j] = EntropyScore(stack, config.entropy).total; break;
      }
    }
    const auto norm = MinMaxNormalize(raw);
    std::vector<double> mi_raw, mi_norm(n, 0.0);
    if (config.method == AcquisitionMethod::kEpistemicMI) {
      std::vector<NDArray> train_imgs, cand_imgs;
      std::vector<double> weights;
      for (const auto& e : pool.training()) {
        train_imgs.push_back(dataset.at(e.id).image);
        weights.push_back(static_cast<double>(e.multiplicity));
      }
      for (int id : candidates) cand_imgs.push_back(dataset.at(id).image);
      mi_raw = MIReduce(ComputeMIMatrix(train_imgs, cand_imgs, config.bins),
                        weights);
      mi_norm = MinMaxNormalize(mi_raw);
    }
    const ScoreVector score = CombinedScore(norm, mi_norm, config.alpha);
    if (config.method == AcquisitionMethod::kMaxCover) {
      std::vector<double> sim(n * n);
      for (size_t a = 0; a < n; ++a) {
        sim[a * n + a] = 1.0;
        for (size_t b = a + 1; b < n; ++b) {
          const double s = NormalizedMutualInformation(
              dataset.at(candidates[a]).image.data(),
              dataset.at(candidates[b]).image.data(), config.bins);
          sim[a * n + b] = s;
          sim[b * n + a] = s;
        }
      }
      picks = MaxCoverSelect(raw, sim, config.q);
    } else {
      picks = SelectQueries(score.scores, config.q);
    }
    for (size_t j = 0; j < n; ++j) {
      sel.rows[j].entropy_raw = raw[j];
      sel.rows[j].entropy_norm = norm[j];
      sel.rows[j].score = score.scores[j];
      if (!mi_raw.empty()) {
        sel.rows[j].mi_raw = mi_raw[j];
        sel.rows[j].mi_norm = mi_norm[j];
      }
    }
  }
  for (size_t p : picks) {
    sel.rows[p].selected = true;
    sel.ids.push_back(candidates[p]);
  }
  return sel;
}

}  // namespace

RunResult RunActiveLearning(const Dataset& dataset, const ActiveConfig& config,
                            uint64_t seed, const PoolObserver& observer) {
  if (config.q < 1) throw ConfigError("q must be >= 1");
  if (!(config.alpha > 0.0)) throw ConfigError("alpha must be > 0");
  config.train.arch.Validate();
  if (config.train.arch.classes != dataset.spec.classes) {
    throw ConfigError("architecture class count does not match dataset");
  }

  RunResult result{{}, {}, {}, {}, {},
                   PoolState(dataset.split.initial_train,
                             dataset.split.unlabeled, config.delete_flag,
                             config.method == AcquisitionMethod::kEpistemicMI),
                   {}};
  PoolState& pool = result.final_pool;
  std::map<int, NDArray> labels;
  for (int id : dataset.split.initial_train) labels[id] = dataset.at(id).mask;
  for (int id : dataset.split.unlabeled) labels[id] = dataset.at(id).mask;
  Oracle oracle(std::move(labels), dataset.split.initial_train);

  // Independent streams: training batches, acquisition randomness.
  const uint64_t train_seed = DeriveSeed(seed, "train");
  Rng acquire_rng(DeriveSeed(seed, "acquire"));

  const NDArray val_images = StackImages(dataset, dataset.split.validation);
  const NDArray val_masks = StackMasks(dataset, dataset.split.validation);
  const NDArray test_images = StackImages(dataset, dataset.split.test);
  const NDArray test_masks = StackMasks(dataset, dataset.split.test);
  const int first_class = config.train.dice.include_background ? 0 : 1;
  const double max_entropy =
      static_cast<double>(config.train.particles) *
      std::log(static_cast<double>(config.train.arch.classes));
  result.hist_edges = UniformEdges(0.0, max_entropy, config.hist_bins);

  for (size_t t = 1; t <= config.n_iters; ++t) {
    const int iter = static_cast<int>(t);
    std::vector<int> candidates;
    for (int id : pool.unlabeled()) {
      if (config.max_multiplicity == 0 ||
          pool.Multiplicity(id) < config.max_multiplicity) {
        candidates.push_back(id);
      }
    }
    if (candidates.size() < config.q) {
      result.stop_reason = "unlabeled pool exhausted before iteration " +
                           std::to_string(t) + " (" +
                           std::to_string(candidates.size()) +
                           " candidates, q=" + std::to_string(config.q) + ")";
      break;
    }
    const auto start = std::chrono::steady_clock::now();

    IterationRecord rec;
    rec.iter = iter;
    rec.method = MethodName(config.method);
    rec.delete_flag = config.delete_flag;
    rec.seed = seed;
    rec.unique_labels = pool.UniqueTrainingCount();
    rec.train_size = pool.TotalMultiplicity();

    const TrainingSet train = MakeTrainingSet(dataset, pool);
    ParticleSet particles = TrainParticles(train, config.train, train_seed);

    const DiceReport val = EvaluateSegmentation(
        config.train.arch, particles, val_images, val_masks, first_class);
    const DiceReport test = EvaluateSegmentation(
        config.train.arch, particles, test_images, test_masks, first_class);
    rec.val_dice = val.mean;
    rec.val_dice_per_class = val.per_class_mean;
    rec.test_dice = test.mean;
    for (size_t i = 0; i < val.volume_mean.size(); ++i) {
      result.volumes.push_back(
          {iter, "validation", dataset.split.validation[i], val.volume_mean[i]});
    }
    for (size_t i = 0; i < test.volume_mean.size(); ++i) {
      result.volumes.push_back(
          {iter, "test", dataset.split.test[i], test.volume_mean[i]});
    }
    // Each unique training image once, regardless of multiplicity.
    std::vector<int> unique_ids;
    for (const auto& e : pool.training()) unique_ids.push_back(e.id);
    rec.uncertainty_hist =
        PoolUncertaintyHistogram(config.train.arch, particles,
                                 StackImages(dataset, unique_ids),
                                 result.hist_edges)
            .counts;

    Selection sel = ScoreAndSelect(dataset, config, particles, pool,
                                   candidates, iter, acquire_rng);
    oracle.Annotate(sel.ids);
    pool = ApplySelection(pool, sel.ids);
    rec.annotations = oracle.annotation_count();
    if (observer) observer(iter, pool, oracle);

    result.scores.insert(result.scores.end(), sel.rows.begin(), sel.rows.end());
    rec.wallclock_seconds = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
    result.records.push_back(std::move(rec));
    result.final_particles = std::move(particles);
  }
  return result;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

std::string RecordsCsv(const std::vector<IterationRecord>& records,
                       size_t hist_bins) {
  std::ostringstream os;
  size_t classes = records.empty() ? 0 : records[0].val_dice_per_class.size();
  os << "iter,method,delete,seed,val_dice";
  for (size_t c = 0; c < classes; ++c) os << ",val_dice_class" << c;
  os << ",test_dice,unique_labels,train_size,annotations";
  for (size_t b = 0; b < hist_bins; ++b) os << ",hist" << b;
  os << "\n";
  for (const auto& r : records) {
    os << r.iter << "," << r.method << "," << (r.delete_flag ? 1 : 0) << ","
       << r.seed << "," << FormatDouble(r.val_dice);
    for (double d : r.val_dice_per_class) os << "," << FormatDouble(d);
    os << "," << FormatDouble(r.test_dice) << "," << r.unique_labels << ","
       << r.train_size << "," << r.annotations;
    for (size_t c : r.uncertainty_hist) os << "," << c;
    os << "\n";
  }
  return os.str();
}

std::string ScoresCsv(const std::vector<ScoreRow>& rows) {
  std::ostringstream os;
  os << "iter,image_id,entropy_raw,mi_raw,entropy_norm,mi_norm,score,"
        "selected_flag\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? FormatDouble(*v) : std::string();
  };
  for (const auto& r : rows) {
    os << r.iter << "," << r.image_id << "," << opt(r.entropy_raw) << ","
       << opt(r.mi_raw) << "," << opt(r.entropy_norm) << "," << opt(r.mi_norm)
       << "," << opt(r.score) << "," << (r.selected ? 1 : 0) << "\n";
  }
  return os.str();
}

std::string VolumesCsv(const std::vector<VolumeRow>& rows) {
  std::ostringstream os;
  os << "iter,split,image_id,dice\n";
  for (const auto& r : rows) {
    os << r.iter << "," << r.split << "," << r.image_id << ","
       << FormatDouble(r.dice) << "\n";
  }
  return os.str();
}

}  // namespace alseg
