/*
 * Copyright 2026 The hublab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hublab/web/cv.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hublab/common/error.hpp"
#include "hublab/common/rng.hpp"

namespace hublab::web {
namespace {

Sequence as_sequence(const std::vector<double>& v) {
  Sequence x(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = v[i];
  return x;
}

struct FoldOutput {
  FoldResult result;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (truth, predicted top-1)
  std::size_t hits1 = 0;
  std::size_t hits3 = 0;
};

}  // namespace

std::vector<std::size_t> top_k(const std::vector<double>& probs, std::size_t k) {
  std::vector<std::size_t> idx(probs.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return probs[a] != probs[b] ? probs[a] > probs[b] : a < b; });
  idx.resize(k);
  return idx;
}

std::vector<std::size_t> assign_folds(const LabeledDataset& data, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw DomainError("cross-validation needs k >= 2");
  const auto labels = data.labels();
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < data.size(); ++i) by_label[data.items()[i].label].push_back(i);
  std::vector<std::size_t> fold(data.size(), 0);
  for (std::size_t li = 0; li < labels.size(); ++li) {
    auto& idx = by_label[labels[li]];
    if (idx.size() < k) {
      throw DomainError("label '" + labels[li] + "' has " + std::to_string(idx.size()) + " items, need >= " +
                        std::to_string(k));
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const auto& ia = data.items()[a];
      const auto& ib = data.items()[b];
      return ia.id != ib.id ? ia.id < ib.id : ia.values < ib.values;
    });
    Rng rng(derive_seed(seed, streams::kFolds, li));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    for (std::size_t j = 0; j < idx.size(); ++j) fold[idx[j]] = j % k;
  }
  return fold;
}

CvReport cross_validate(const LabeledDataset& data, const CvConfig& cfg) {
  CvReport rep;
  rep.labels = data.labels();
  if (rep.labels.size() < 2) throw DomainError("cross-validation needs at least 2 labels");
  const auto fold_of = assign_folds(data, cfg.folds, cfg.seed);
  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < rep.labels.size(); ++i) label_index[rep.labels[i]] = static_cast<int>(i);

  // Canonical item order so training does not depend on insertion order.
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ia = data.items()[a];
    const auto& ib = data.items()[b];
    if (ia.label != ib.label) return ia.label < ib.label;
    return ia.id != ib.id ? ia.id < ib.id : ia.values < ib.values;
  });

  auto run_fold = [&](std::size_t f) {
    FoldOutput out;
    out.result.fold = f;
    std::vector<const DatasetItem*> train_items, test_items;
    for (std::size_t i : order) (fold_of[i] == f ? test_items : train_items).push_back(&data.items()[i]);
    const Normalizer z = Normalizer::fit(train_items);
    std::vector<TrainSample> train;
    train.reserve(train_items.size());
    for (const auto* it : train_items) train.push_back({as_sequence(z.apply(it->values)), label_index.at(it->label)});
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, streams::kModel, f);
    const TrainResult tr = train_bilstm(train, static_cast<int>(rep.labels.size()), tc);
    out.result.final_train_loss = tr.loss_curve.back();
    out.result.normalizer = z;
    for (const auto* it : test_items) {
      const auto probs = predict(tr.model, as_sequence(z.apply(it->values)));
      const auto best = top_k(probs, 3);
      const auto truth = static_cast<std::size_t>(label_index.at(it->label));
      out.pairs.push_back({truth, best[0]});
      out.hits1 += best[0] == truth;
      out.hits3 += std::find(best.begin(), best.end(), truth) != best.end();
      out.result.test_ids.push_back(it->id);
    }
    const auto n = static_cast<double>(test_items.size());
    out.result.top1 = static_cast<double>(out.hits1) / n;
    out.result.top3 = static_cast<double>(out.hits3) / n;
    out.result.model = tr.model;
    return out;
  };

  std::vector<FoldOutput> outs(cfg.folds);
  const std::size_t workers = std::max<std::size_t>(1, cfg.workers);
  for (std::size_t start = 0; start < cfg.folds; start += workers) {
    std::vector<std::future<FoldOutput>> jobs;
    for (std::size_t f = start; f < std::min(cfg.folds, start + workers); ++f) {
      jobs.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, run_fold, f));
    }
    for (std::size_t j = 0; j < jobs.size(); ++j) outs[start + j] = jobs[j].get();
  }

  rep.confusion.assign(rep.labels.size(), std::vector<std::size_t>(rep.labels.size(), 0));
  std::size_t hits1 = 0, hits3 = 0, total = 0;
  for (auto& o : outs) {
    for (const auto& [t, p] : o.pairs) ++rep.confusion[t][p];
    hits1 += o.hits1;
    hits3 += o.hits3;
    total += o.pairs.size();
    rep.folds.push_back(std::move(o.result));
  }
  rep.top1 = static_cast<double>(hits1) / static_cast<double>(total);
  rep.top3 = static_cast<double>(hits3) / static_cast<double>(total);
  return rep;
}

std::string format_cv_report(const CvReport& r) {
  std::ostringstream os;
  char buf[128];
  os << "fold  test  top1    top3    train_loss\n";
  for (const auto& f : r.folds) {
    std::snprintf(buf, sizeof buf, "%-4zu  %-4zu  %.4f  %.4f  %.4f\n", f.fold, f.test_ids.size(), f.top1, f.top3,
                  f.final_train_loss);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "all         %.4f  %.4f\n", r.top1, r.top3);
  os << buf;
  // Most frequent confusions, if any.
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> off;
  for (std::size_t t = 0; t < r.confusion.size(); ++t) {
    for (std::size_t p = 0; p < r.confusion[t].size(); ++p) {
      if (t != p && r.confusion[t][p] > 0) off.emplace_back(r.confusion[t][p], t, p);
    }
  }
  std::sort(off.begin(), off.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::make_pair(std::get<1>(a), std::get<2>(a)) < std::make_pair(std::get<1>(b), std::get<2>(b));
  });
  if (!off.empty()) os << "top confusions (truth -> predicted: count)\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(5, off.size()); ++i) {
    const auto& [c, t, p] = off[i];
    os << "  " << r.labels[t] << " -> " << r.labels[p] << ": " << c << '\n';
  }
  return os.str();
}

void to_json(nlohmann::json& j, const CvReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"fold", f.fold},
                     {"top1", f.top1},
                     {"top3", f.top3},
                     {"final_train_loss", f.final_train_loss},
                     {"test_ids", f.test_ids}});
  }
  j = {{"labels", r.labels}, {"top1", r.top1}, {"top3", r.top3}, {"folds", folds}, {"confusion", r.confusion}};
}

}  // namespace hublab::web
