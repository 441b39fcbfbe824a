#include "hetnet/svm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "hetnet/errors.hpp"
#include "hetnet/parallel.hpp"
#include "hetnet/random.hpp"
#include "json_util.hpp"

namespace hetnet {

using detail::json;

namespace {

constexpr double kStdFloor = 1e-12;
constexpr double kTau = 1e-12;

void check_gamma(double g) {
  if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("kernel_gamma must be > 0");
}

}  // namespace

ScalingParams ScalingParams::fit(const std::vector<FeatureVector>& x) {
  ScalingParams s;
  if (x.empty()) return s;
  const double n = static_cast<double>(x.size());
  s.mean.setZero();
  for (const auto& v : x) s.mean += v;
  s.mean /= n;
  FeatureVector var = FeatureVector::Zero();
  for (const auto& v : x) var += (v - s.mean).cwiseAbs2();
  s.std = (var / n).cwiseSqrt().cwiseMax(kStdFloor);
  return s;
}

double kernel(const FeatureVector& u, const FeatureVector& v, double kernel_gamma) {
  check_gamma(kernel_gamma);
  return std::exp(-kernel_gamma * (u - v).squaredNorm());
}

SvmModel train(const TrainingSet& data, const SvmParams& params, SvmTrainReport* report) {
  check_gamma(params.kernel_gamma);
  if (!(params.c > 0.0)) throw ConfigError("c must be > 0");
  if (!(params.tol > 0.0)) throw ConfigError("tol must be > 0");
  if (params.max_passes <= 0) throw ConfigError("max_passes must be > 0");
  const std::size_t n = data.size();
  if (n == 0 || data.y.size() != n) throw DegenerateError("empty training set");
  for (int y : data.y) {
    if (y != 1 && y != -1) throw ConfigError("labels must be +1 or -1");
  }
  if (std::all_of(data.y.begin(), data.y.end(), [&](int y) { return y == data.y[0]; })) {
    throw DegenerateError("all training labels are identical");
  }

  SvmModel model;
  model.c = params.c;
  model.kernel_gamma = params.kernel_gamma;
  model.scaling = ScalingParams::fit(data.x);
  std::vector<FeatureVector> xs(n);
  for (std::size_t t = 0; t < n; ++t) xs[t] = model.scaling.apply(data.x[t]);

  const double C = params.c;
  const double gamma = params.kernel_gamma;
  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) y[t] = data.y[t];
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(params.seed);
  rng.shuffle(order.begin(), order.end());

  auto in_up = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
  };

  std::vector<double> ki(n);
  std::vector<double> kj(n);
  auto kernel_row = [&](std::size_t i, std::vector<double>& row) {
    for (std::size_t t = 0; t < n; ++t) {
      row[t] = std::exp(-gamma * (xs[i] - xs[t]).squaredNorm());
    }
  };

  const std::int64_t max_iters =
      static_cast<std::int64_t>(params.max_passes) * std::max<std::int64_t>(
          static_cast<std::int64_t>(n), 1000);
  SvmTrainReport rep;
  for (;;) {
    double g_max = -std::numeric_limits<double>::infinity();
    double g_max2 = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (auto t : order) {
      if (in_up(t) && -y[t] * grad[t] > g_max) {
        g_max = -y[t] * grad[t];
        i = t;
      }
      if (in_low(t)) g_max2 = std::max(g_max2, y[t] * grad[t]);
    }
    rep.kkt_violation = std::max(0.0, g_max + g_max2);
    if (i == n || g_max + g_max2 < params.tol) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= max_iters) break;

    kernel_row(i, ki);
    std::size_t j = n;
    double best = std::numeric_limits<double>::infinity();
    for (auto t : order) {
      if (!in_low(t)) continue;
      const double b = g_max + y[t] * grad[t];
      if (b <= 0.0) continue;
      double a = 2.0 - 2.0 * ki[t];  // K_ii = K_tt = 1
      if (a <= 0.0) a = kTau;
      const double obj = -(b * b) / a;
      if (obj < best) {
        best = obj;
        j = t;
      }
    }
    if (j == n) {
      rep.converged = true;
      break;
    }
    kernel_row(j, kj);
    ++rep.iterations;

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    const double q_ij = y[i] * y[j] * ki[j];
    if (y[i] != y[j]) {
      double quad = 2.0 + 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = 2.0 - 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double d_i = alpha[i] - old_i;
    const double d_j = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * ki[t] * d_i + y[j] * kj[t] * d_j);
    }
  }

  // Offset from the free vectors, or the middle of the feasible interval.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  int n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  model.bias = -rho;

  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0.0) {
      model.support_vectors.push_back(xs[t]);
      model.alphas.push_back(y[t] * alpha[t]);
    }
  }
  if (report) *report = rep;
  return model;
}

double decision_value(const SvmModel& model, const FeatureVector& u) {
  const FeatureVector z = model.scaling.apply(u);
  double f = 0.0;
  for (std::size_t k = 0; k < model.alphas.size(); ++k) {
    f += model.alphas[k] * std::exp(-model.kernel_gamma * (model.support_vectors[k] - z).squaredNorm());
  }
  return f + model.bias;
}

int predict(const SvmModel& model, const FeatureVector& u) {
  return decision_value(model, u) >= 0.0 ? 1 : 0;
}

double accuracy(const SvmModel& model, const TrainingSet& data) {
  if (data.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (label_of_mu(predict(model, data.x[t])) == data.y[t]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double dual_objective(const SvmModel& model) {
  double linear = 0.0;
  double quad = 0.0;
  const std::size_t m = model.alphas.size();
  for (std::size_t a = 0; a < m; ++a) {
    linear += std::abs(model.alphas[a]);
    for (std::size_t b = 0; b < m; ++b) {
      quad += model.alphas[a] * model.alphas[b] *
              std::exp(-model.kernel_gamma *
                       (model.support_vectors[a] - model.support_vectors[b]).squaredNorm());
    }
  }
  return linear - 0.5 * quad;
}

CvResult cross_validate(const TrainingSet& data,
                        const std::vector<std::pair<double, double>>& grid, int folds,
                        const SvmParams& base) {
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (grid.empty()) throw ConfigError("empty hyperparameter grid");
  const std::size_t n = data.size();
  if (n < static_cast<std::size_t>(folds)) throw ConfigError("fewer rows than folds");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(substream_seed(base.seed, "cv-folds"));
  rng.shuffle(order.begin(), order.end());
  std::vector<int> fold_of(n);
  for (std::size_t k = 0; k < n; ++k) {
    fold_of[order[k]] = static_cast<int>(k * static_cast<std::size_t>(folds) / n);
  }

  CvResult result;
  result.table.resize(grid.size());
  std::vector<double> fold_acc(grid.size() * static_cast<std::size_t>(folds), 0.0);
  parallel_for(fold_acc.size(), [&](std::size_t job) {
    const std::size_t g = job / static_cast<std::size_t>(folds);
    const int f = static_cast<int>(job % static_cast<std::size_t>(folds));
    TrainingSet fit;
    TrainingSet held;
    for (std::size_t t = 0; t < n; ++t) {
      (fold_of[t] == f ? held : fit).add(data.x[t], data.y[t]);
    }
    SvmParams p = base;
    p.c = grid[g].first;
    p.kernel_gamma = grid[g].second;
    try {
      fold_acc[job] = accuracy(train(fit, p), held);
    } catch (const DegenerateError&) {
      // Single-label fold: the constant classifier.
      std::size_t hits = 0;
      for (int yv : held.y) hits += yv == fit.y.front() ? 1 : 0;
      fold_acc[job] = static_cast<double>(hits) / static_cast<double>(held.size());
    }
  });

  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sum = 0.0;
    for (int f = 0; f < folds; ++f) sum += fold_acc[g * static_cast<std::size_t>(folds) + f];
    result.table[g] = {grid[g].first, grid[g].second, sum / folds};
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const auto& cand = result.table[g];
    const auto& cur = result.table[best];
    const bool better =
        cand.accuracy > cur.accuracy ||
        (cand.accuracy == cur.accuracy &&
         (cand.c < cur.c || (cand.c == cur.c && cand.kernel_gamma < cur.kernel_gamma)));
    if (better) best = g;
  }
  result.best_c = result.table[best].c;
  result.best_kernel_gamma = result.table[best].kernel_gamma;
  result.best_accuracy = result.table[best].accuracy;
  return result;
}

// --- serialization -----------------------------------------------------------------

namespace {

json vec_json(const FeatureVector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

FeatureVector vec_from(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 6) {
    throw ConfigError("field '" + path + "': expected an array of 6 numbers");
  }
  FeatureVector v;
  for (Eigen::Index k = 0; k < 6; ++k) v[k] = j[static_cast<std::size_t>(k)].get<double>();
  return v;
}

}  // namespace

std::string model_to_json(const SvmModel& model) {
  json j;
  j["support_vectors"] = json::array();
  for (const auto& sv : model.support_vectors) j["support_vectors"].push_back(vec_json(sv));
  j["alphas"] = model.alphas;
  j["bias"] = model.bias;
  j["kernel_gamma"] = model.kernel_gamma;
  j["c"] = model.c;
  j["scaling"] = json{{"mean", vec_json(model.scaling.mean)}, {"std", vec_json(model.scaling.std)}};
  return j.dump(1);
}

SvmModel model_from_json(std::string_view text) {
  using detail::field;
  const json j = detail::parse_json(text, "model JSON");
  SvmModel m;
  try {
    const auto& svs = j.at("support_vectors");
    for (std::size_t k = 0; k < svs.size(); ++k) {
      m.support_vectors.push_back(vec_from(svs[k], "support_vectors[" + std::to_string(k) + "]"));
    }
    m.alphas = field<std::vector<double>>(j, "alphas", "");
    m.bias = field<double>(j, "bias", "");
    m.kernel_gamma = field<double>(j, "kernel_gamma", "");
    m.c = field<double>(j, "c", "");
    m.scaling.mean = vec_from(j.at("scaling").at("mean"), "scaling.mean");
    m.scaling.std = vec_from(j.at("scaling").at("std"), "scaling.std");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model JSON: ") + e.what());
  }
  if (m.alphas.size() != m.support_vectors.size()) {
    throw ConfigError("model JSON: alphas and support_vectors differ in length");
  }
  check_gamma(m.kernel_gamma);
  return m;
}

std::string training_set_csv(const TrainingSet& data) {
  std::ostringstream out;
  out << "distance,d_th,r_th,delta_d,delta_r,snr,label\n";
  char buf[64];
  for (std::size_t t = 0; t < data.size(); ++t) {
    for (Eigen::Index k = 0; k < 6; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,", data.x[t][k]);
      out << buf;
    }
    out << data.y[t] << '\n';
  }
  return out.str();
}

TrainingSet training_set_from_csv(std::string_view text) {
  TrainingSet data;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;  // header
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (used != cell.size() && cell.find_first_not_of(" \r", used) != std::string::npos) {
          throw std::invalid_argument(cell);
        }
      } catch (const std::exception&) {
        throw ConfigError("training data line " + std::to_string(line_no) + ": bad number '" +
                          cell + "'");
      }
    }
    if (v.size() != 7) {
      throw ConfigError("training data line " + std::to_string(line_no) + ": expected 7 columns");
    }
    FeatureVector x;
    for (Eigen::Index k = 0; k < 6; ++k) x[k] = v[static_cast<std::size_t>(k)];
    const int y = v[6] > 0 ? 1 : -1;
    data.add(x, y);
  }
  return data;
}

}  // namespace hetnet
