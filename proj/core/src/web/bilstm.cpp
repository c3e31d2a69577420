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

#include "hublab/web/bilstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hublab/common/error.hpp"
#include "hublab/common/rng.hpp"

namespace hublab::web {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Mutable views of one flat parameter/gradient vector.
struct Views {
  Eigen::Map<MatrixXd> fw, bw, ow;
  Eigen::Map<VectorXd> fb, bb, ob;
};

Views views_of(double* p, int in, int h, int c) {
  const int rows = 4 * h, cols = in + h;
  double* fw = p;
  double* fb = fw + rows * cols;
  double* bw = fb + rows;
  double* bb = bw + rows * cols;
  double* ow = bb + rows;
  double* ob = ow + c * 2 * h;
  return {Eigen::Map<MatrixXd>(fw, rows, cols), Eigen::Map<MatrixXd>(bw, rows, cols),
          Eigen::Map<MatrixXd>(ow, c, 2 * h),   Eigen::Map<VectorXd>(fb, rows),
          Eigen::Map<VectorXd>(bb, rows),       Eigen::Map<VectorXd>(ob, c)};
}

struct DirCache {
  std::vector<VectorXd> z;      // [x_t; h_{t-1}]
  std::vector<VectorXd> gates;  // activated i, f, g, o
  std::vector<VectorXd> c;      // cell state after the step
  std::vector<VectorXd> tc;     // tanh(c)
  VectorXd h;                   // final hidden state
};

void run_direction(const LstmCell& cell, const Sequence& x, bool reverse, int hidden, DirCache& cache) {
  const auto steps = static_cast<std::size_t>(x.cols());
  const auto in = x.rows();
  cache.z.resize(steps);
  cache.gates.resize(steps);
  cache.c.resize(steps);
  cache.tc.resize(steps);
  VectorXd h = VectorXd::Zero(hidden);
  VectorXd c = VectorXd::Zero(hidden);
  for (std::size_t s = 0; s < steps; ++s) {
    const auto col = static_cast<Eigen::Index>(reverse ? steps - 1 - s : s);
    VectorXd& z = cache.z[s];
    z.resize(in + hidden);
    z.head(in) = x.col(col);
    z.tail(hidden) = h;
    VectorXd a = cell.w * z + cell.b;
    for (int k = 0; k < hidden; ++k) {
      a(k) = sigmoid(a(k));
      a(hidden + k) = sigmoid(a(hidden + k));
      a(2 * hidden + k) = std::tanh(a(2 * hidden + k));
      a(3 * hidden + k) = sigmoid(a(3 * hidden + k));
    }
    c = a.segment(hidden, hidden).cwiseProduct(c) +
        a.segment(0, hidden).cwiseProduct(a.segment(2 * hidden, hidden));
    VectorXd tc = c.array().tanh();
    h = a.segment(3 * hidden, hidden).cwiseProduct(tc);
    cache.gates[s] = std::move(a);
    cache.c[s] = c;
    cache.tc[s] = std::move(tc);
  }
  cache.h = h;
}

template <class W, class B>
void backprop_direction(const LstmCell& cell, const DirCache& cache, int in, int hidden, VectorXd dh,
                        W&& gw, B&& gb) {
  VectorXd dc = VectorXd::Zero(hidden);
  VectorXd dz(4 * hidden);
  for (std::size_t s = cache.z.size(); s-- > 0;) {
    const VectorXd& a = cache.gates[s];
    const auto i = a.segment(0, hidden).array();
    const auto f = a.segment(hidden, hidden).array();
    const auto g = a.segment(2 * hidden, hidden).array();
    const auto o = a.segment(3 * hidden, hidden).array();
    const auto tc = cache.tc[s].array();
    dc.array() += dh.array() * o * (1.0 - tc * tc);
    const VectorXd c_prev = s > 0 ? cache.c[s - 1] : VectorXd::Zero(hidden);
    dz.segment(0, hidden) = (dc.array() * g * i * (1.0 - i)).matrix();
    dz.segment(hidden, hidden) = (dc.array() * c_prev.array() * f * (1.0 - f)).matrix();
    dz.segment(2 * hidden, hidden) = (dc.array() * i * (1.0 - g * g)).matrix();
    dz.segment(3 * hidden, hidden) = (dh.array() * tc * o * (1.0 - o)).matrix();
    gw.noalias() += dz * cache.z[s].transpose();
    gb += dz;
    dh = (cell.w.transpose() * dz).tail(hidden);
    dc = (dc.array() * f).matrix();
  }
  (void)in;
}

void check_input(const BiLstmModel& m, const Sequence& x) {
  if (x.rows() != m.input) throw DomainError("input has " + std::to_string(x.rows()) + " features, model expects " + std::to_string(m.input));
  if (x.cols() == 0) throw DomainError("empty input sequence");
  if (m.seq_len > 0 && x.cols() != m.seq_len) {
    throw DomainError("sequence length " + std::to_string(x.cols()) + " does not match model length " +
                      std::to_string(m.seq_len));
  }
}

VectorXd softmax(const VectorXd& logits) {
  VectorXd p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

// Loss evaluated in scalar type T straight from a flat parameter vector.
// grad_check runs it in long double so the finite-difference oracle's
// rounding stays well below the gradients it is compared against.
template <class T>
T reference_loss(int in, int h, int classes, const std::vector<T>& p, const Sequence& x, int label) {
  using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
  const int rows = 4 * h, cols = in + h;
  const T* fw = p.data();
  const T* fb = fw + rows * cols;
  const T* bw = fb + rows;
  const T* bb = bw + rows * cols;
  const T* ow = bb + rows;
  const T* ob = ow + classes * 2 * h;
  auto run = [&](const T* w, const T* b, bool reverse) {
    const Eigen::Map<const Mat> W(w, rows, cols);
    const Eigen::Map<const Vec> B(b, rows);
    Vec hs = Vec::Zero(h), c = Vec::Zero(h), z(cols);
    for (Eigen::Index s = 0; s < x.cols(); ++s) {
      const Eigen::Index col = reverse ? x.cols() - 1 - s : s;
      for (int i = 0; i < in; ++i) z(i) = static_cast<T>(x(i, col));
      z.tail(h) = hs;
      const Vec a = W * z + B;
      for (int k = 0; k < h; ++k) {
        const T ig = T(1) / (T(1) + std::exp(-a(k)));
        const T fg = T(1) / (T(1) + std::exp(-a(h + k)));
        const T gg = std::tanh(a(2 * h + k));
        const T og = T(1) / (T(1) + std::exp(-a(3 * h + k)));
        c(k) = fg * c(k) + ig * gg;
        hs(k) = og * std::tanh(c(k));
      }
    }
    return hs;
  };
  Vec feat(2 * h);
  feat << run(fw, fb, false), run(bw, bb, true);
  const Vec logits = Eigen::Map<const Mat>(ow, classes, 2 * h) * feat + Eigen::Map<const Vec>(ob, classes);
  const T mx = logits.maxCoeff();
  T sum = 0;
  for (int k = 0; k < classes; ++k) sum += std::exp(logits(k) - mx);
  return -(logits(label) - mx - std::log(sum));
}

}  // namespace

void BiLstmModel::validate() const {
  if (input <= 0 || hidden <= 0 || classes <= 0) throw DomainError("model dimensions must be positive");
  const int rows = 4 * hidden, cols = input + hidden;
  for (const LstmCell* c : {&fwd, &bwd}) {
    if (c->w.rows() != rows || c->w.cols() != cols || c->b.size() != rows) {
      throw DomainError("recurrent cell shape does not match dimensions");
    }
  }
  if (out_w.rows() != classes || out_w.cols() != 2 * hidden || out_b.size() != classes) {
    throw DomainError("output layer shape does not match dimensions");
  }
  if (!flatten().allFinite()) throw DomainError("model has non-finite parameters");
}

std::size_t BiLstmModel::parameter_count() const {
  const auto rows = static_cast<std::size_t>(4 * hidden);
  const auto cols = static_cast<std::size_t>(input + hidden);
  return 2 * (rows * cols + rows) + static_cast<std::size_t>(classes) * (2 * static_cast<std::size_t>(hidden) + 1);
}

VectorXd BiLstmModel::flatten() const {
  VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Views v = views_of(flat.data(), input, hidden, classes);
  v.fw = fwd.w;
  v.fb = fwd.b;
  v.bw = bwd.w;
  v.bb = bwd.b;
  v.ow = out_w;
  v.ob = out_b;
  return flat;
}

void BiLstmModel::unflatten(const VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count()) throw DomainError("flat parameter size mismatch");
  VectorXd copy = flat;
  Views v = views_of(copy.data(), input, hidden, classes);
  fwd.w = v.fw;
  fwd.b = v.fb;
  bwd.w = v.bw;
  bwd.b = v.bb;
  out_w = v.ow;
  out_b = v.ob;
}

BiLstmModel zero_bilstm(int input, int hidden, int classes, int seq_len) {
  BiLstmModel m;
  m.input = input;
  m.hidden = hidden;
  m.classes = classes;
  m.seq_len = seq_len;
  for (LstmCell* c : {&m.fwd, &m.bwd}) {
    c->w = MatrixXd::Zero(4 * hidden, input + hidden);
    c->b = VectorXd::Zero(4 * hidden);
  }
  m.out_w = MatrixXd::Zero(classes, 2 * hidden);
  m.out_b = VectorXd::Zero(classes);
  m.validate();
  return m;
}

BiLstmModel init_bilstm(int input, int hidden, int classes, int seq_len, std::uint64_t seed) {
  BiLstmModel m = zero_bilstm(input, hidden, classes, seq_len);
  Rng rng(derive_seed(seed, streams::kModel, 0));
  const double r = 1.0 / std::sqrt(static_cast<double>(hidden));
  auto fill = [&](auto& mat) {
    for (Eigen::Index j = 0; j < mat.cols(); ++j) {
      for (Eigen::Index i = 0; i < mat.rows(); ++i) mat(i, j) = rng.uniform(-r, r);
    }
  };
  for (LstmCell* c : {&m.fwd, &m.bwd}) {
    fill(c->w);
    c->b.segment(hidden, hidden).setOnes();
  }
  fill(m.out_w);
  return m;
}

double loss_and_gradient(const BiLstmModel& m, const Sequence& x, int label, VectorXd* grad) {
  check_input(m, x);
  if (label < 0 || label >= m.classes) throw DomainError("label out of range");
  const int h = m.hidden;
  DirCache fc, bc;
  run_direction(m.fwd, x, false, h, fc);
  run_direction(m.bwd, x, true, h, bc);
  VectorXd feat(2 * h);
  feat << fc.h, bc.h;
  const VectorXd p = softmax(m.out_w * feat + m.out_b);
  const double loss = -std::log(std::max(p(label), 1e-300));
  if (!grad) return loss;

  if (static_cast<std::size_t>(grad->size()) != m.parameter_count()) {
    throw DomainError("gradient buffer size mismatch");
  }
  Views g = views_of(grad->data(), m.input, h, m.classes);
  VectorXd dlogits = p;
  dlogits(label) -= 1.0;
  g.ow.noalias() += dlogits * feat.transpose();
  g.ob += dlogits;
  const VectorXd dfeat = m.out_w.transpose() * dlogits;
  backprop_direction(m.fwd, fc, m.input, h, dfeat.head(h), g.fw, g.fb);
  backprop_direction(m.bwd, bc, m.input, h, dfeat.tail(h), g.bw, g.bb);
  return loss;
}

std::vector<double> predict(const BiLstmModel& m, const Sequence& x) {
  check_input(m, x);
  DirCache fc, bc;
  run_direction(m.fwd, x, false, m.hidden, fc);
  run_direction(m.bwd, x, true, m.hidden, bc);
  VectorXd feat(2 * m.hidden);
  feat << fc.h, bc.h;
  const VectorXd p = softmax(m.out_w * feat + m.out_b);
  return {p.data(), p.data() + p.size()};
}

double grad_check(const BiLstmModel& m, const Sequence& x, int label, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("grad_check epsilon must be > 0");
  VectorXd analytic = VectorXd::Zero(static_cast<Eigen::Index>(m.parameter_count()));
  loss_and_gradient(m, x, label, &analytic);
  const VectorXd base = m.flatten();
  std::vector<long double> p(base.data(), base.data() + base.size());
  const auto eps = static_cast<long double>(epsilon);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const long double keep = p[i];
    p[i] = keep + eps;
    const long double up = reference_loss(m.input, m.hidden, m.classes, p, x, label);
    p[i] = keep - eps;
    const long double down = reference_loss(m.input, m.hidden, m.classes, p, x, label);
    p[i] = keep;
    const auto numeric = static_cast<double>((up - down) / (2 * eps));
    const auto a = analytic(static_cast<Eigen::Index>(i));
    const double denom = std::max(std::abs(a) + std::abs(numeric), 1e-12);
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

TrainResult train_bilstm(const std::vector<TrainSample>& data, int classes, const TrainConfig& cfg) {
  if (classes < 2) throw DomainError("training needs at least 2 classes");
  if (data.empty()) throw DomainError("training set is empty");
  if (cfg.epochs <= 0 || cfg.batch_size == 0 || !(cfg.learning_rate > 0.0) || cfg.hidden <= 0) {
    throw DomainError("invalid training configuration");
  }
  const auto in = static_cast<int>(data.front().x.rows());
  const auto len = static_cast<int>(data.front().x.cols());
  for (const auto& s : data) {
    if (s.x.rows() != in || s.x.cols() != len) throw DomainError("training sequences have ragged shapes");
  }

  TrainResult res;
  res.model = init_bilstm(in, cfg.hidden, classes, len, cfg.seed);
  VectorXd params = res.model.flatten();
  const Eigen::Index np = params.size();
  VectorXd grad(np), m1 = VectorXd::Zero(np), m2 = VectorXd::Zero(np);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
  std::int64_t step = 0;

  std::vector<std::size_t> order(data.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(cfg.seed, streams::kModel, static_cast<std::uint64_t>(epoch) + 1));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      grad.setZero();
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = data[order[k]];
        epoch_loss += loss_and_gradient(res.model, s.x, s.label, &grad);
      }
      if (!std::isfinite(epoch_loss) || !grad.allFinite()) throw TrainingError("training loss diverged", epoch);
      grad /= static_cast<double>(end - start);
      const double norm = grad.norm();
      if (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) grad *= cfg.clip_norm / norm;
      if (cfg.optimizer == Optimizer::adam) {
        ++step;
        m1 = kBeta1 * m1 + (1.0 - kBeta1) * grad;
        m2 = kBeta2 * m2 + (1.0 - kBeta2) * grad.cwiseProduct(grad);
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
        params.array() -= cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + kAdamEps);
      } else {
        params -= cfg.learning_rate * grad;
      }
      res.model.unflatten(params);
    }
    res.loss_curve.push_back(epoch_loss / static_cast<double>(data.size()));
  }
  return res;
}

Optimizer parse_optimizer(const std::string& name) {
  if (name == "sgd") return Optimizer::sgd;
  if (name == "adam") return Optimizer::adam;
  throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

std::string to_string(Optimizer o) { return o == Optimizer::adam ? "adam" : "sgd"; }

void to_json(nlohmann::json& j, const BiLstmModel& m) {
  const VectorXd flat = m.flatten();
  j = {{"format", "hublab-bilstm/1"},
       {"input", m.input},
       {"hidden", m.hidden},
       {"classes", m.classes},
       {"seq_len", m.seq_len},
       {"parameters", std::vector<double>(flat.data(), flat.data() + flat.size())}};
}

void from_json(const nlohmann::json& j, BiLstmModel& m) {
  try {
    BiLstmModel out = zero_bilstm(j.at("input").get<int>(), j.at("hidden").get<int>(), j.at("classes").get<int>(),
                                  j.at("seq_len").get<int>());
    const auto p = j.at("parameters").get<std::vector<double>>();
    out.unflatten(Eigen::Map<const VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())));
    out.validate();
    m = std::move(out);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed BiLSTM model: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"hidden", c.hidden},         {"epochs", c.epochs},         {"learning_rate", c.learning_rate},
       {"batch_size", c.batch_size}, {"clip_norm", c.clip_norm},   {"optimizer", to_string(c.optimizer)},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  d.hidden = j.value("hidden", d.hidden);
  d.epochs = j.value("epochs", d.epochs);
  d.learning_rate = j.value("learning_rate", d.learning_rate);
  d.batch_size = j.value("batch_size", d.batch_size);
  d.clip_norm = j.value("clip_norm", d.clip_norm);
  d.optimizer = parse_optimizer(j.value("optimizer", to_string(d.optimizer)));
  d.seed = j.value("seed", d.seed);
  c = d;
}

}  // namespace hublab::web
