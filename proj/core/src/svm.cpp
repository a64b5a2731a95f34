#include <algorithm>
#include <cmath>
#include <limits>

#include "sana/classifiers.hpp"
#include "sana/error.hpp"

namespace sana::classify {
namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Dense symmetric Gram matrix of the training vectors.
class Gram {
 public:
  Gram(std::span<const SparseVector> x, std::size_t dimension) : n_(x.size()), k_(n_ * n_, 0.0) {
    std::vector<double> dense(dimension, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      for (const auto& e : x[i]) dense[e.index] = e.value;
      for (std::size_t j = i; j < n_; ++j) {
        double s = 0.0;
        for (const auto& e : x[j]) s += dense[e.index] * e.value;
        k_[i * n_ + j] = s;
        k_[j * n_ + i] = s;
      }
      for (const auto& e : x[i]) dense[e.index] = 0.0;
    }
  }

  const double* row(std::size_t i) const { return k_.data() + i * n_; }
  double at(std::size_t i, std::size_t j) const { return k_[i * n_ + j]; }

 private:
  std::size_t n_;
  std::vector<double> k_;
};

double hinge_sum(std::span<const double> margins_wo_bias, std::span<const double> y, double b) {
  double sum = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    sum += std::max(0.0, 1.0 - y[t] * (margins_wo_bias[t] + b));
  }
  return sum;
}

class Smo {
 public:
  Smo(const Gram& gram, std::vector<double> y, double C)
      : q_(gram), y_(std::move(y)), c_(C), n_(y_.size()), alpha_(n_, 0.0), grad_(n_, -1.0) {}

  // Returns false when the maximal KKT violation is below `tol`.
  bool step(double tol) {
    std::size_t i = 0;
    std::size_t j = 0;
    if (!select(tol, i, j)) return false;
    update(i, j);
    return true;
  }

  double dual_objective() const {
    double f = 0.0;
    for (std::size_t t = 0; t < n_; ++t) f += alpha_[t] * (grad_[t] - 1.0);
    return 0.5 * f;
  }

  // w.x_t for every training point, recovered from the gradient.
  std::vector<double> margins() const {
    std::vector<double> s(n_);
    for (std::size_t t = 0; t < n_; ++t) s[t] = y_[t] * (grad_[t] + 1.0);
    return s;
  }

  double squared_weight_norm() const {
    double s = 0.0;
    for (std::size_t t = 0; t < n_; ++t) s += alpha_[t] * (grad_[t] + 1.0);
    return s;
  }

  // Bias from the KKT conditions (average over free vectors, else midpoint).
  double kkt_bias() const {
    double ub = kInf;
    double lb = -kInf;
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n_; ++t) {
      const double yg = y_[t] * grad_[t];
      if (alpha_[t] >= c_) {
        if (y_[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (alpha_[t] <= 0.0) {
        if (y_[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
    return std::isfinite(rho) ? -rho : 0.0;
  }

  const std::vector<double>& alpha() const { return alpha_; }
  const std::vector<double>& labels() const { return y_; }

 private:
  bool up(std::size_t t) const { return y_[t] > 0 ? alpha_[t] < c_ : alpha_[t] > 0.0; }
  bool low(std::size_t t) const { return y_[t] > 0 ? alpha_[t] > 0.0 : alpha_[t] < c_; }

  bool select(double tol, std::size_t& out_i, std::size_t& out_j) const {
    double gmax = -kInf;
    std::size_t i = n_;
    for (std::size_t t = 0; t < n_; ++t) {
      if (up(t) && -y_[t] * grad_[t] >= gmax) {
        gmax = -y_[t] * grad_[t];
        i = t;
      }
    }
    if (i == n_) return false;
    const double* ki = q_.row(i);
    double gmax2 = -kInf;
    double best = kInf;
    std::size_t j = n_;
    for (std::size_t t = 0; t < n_; ++t) {
      if (!low(t)) continue;
      const double v = y_[t] * grad_[t];  // equals -(-y_t G_t)
      gmax2 = std::max(gmax2, v);
      const double diff = gmax + v;
      if (diff > 0.0) {
        double quad = q_.at(i, i) + q_.at(t, t) - 2.0 * ki[t];
        if (quad <= 0.0) quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj <= best) {
          best = obj;
          j = t;
        }
      }
    }
    if (gmax + gmax2 < tol || j == n_) return false;
    out_i = i;
    out_j = j;
    return true;
  }

  void update(std::size_t i, std::size_t j) {
    const double old_i = alpha_[i];
    const double old_j = alpha_[j];
    const double kij = q_.at(i, j);
    double quad = q_.at(i, i) + q_.at(j, j) - 2.0 * kij;
    if (quad <= 0.0) quad = kTau;
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (y_[i] != y_[j]) {
      const double delta = (-grad_[i] - grad_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) { aj = 0.0; ai = diff; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = -diff; }
      }
      if (diff > 0.0) {
        if (ai > c_) { ai = c_; aj = c_ - diff; }
      } else {
        if (aj > c_) { aj = c_; ai = c_ + diff; }
      }
    } else {
      const double delta = (grad_[i] - grad_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > c_) {
        if (ai > c_) { ai = c_; aj = sum - c_; }
      } else {
        if (aj < 0.0) { aj = 0.0; ai = sum; }
      }
      if (sum > c_) {
        if (aj > c_) { aj = c_; ai = sum - c_; }
      } else {
        if (ai < 0.0) { ai = 0.0; aj = sum; }
      }
    }
    const double di = (ai - old_i) * y_[i];
    const double dj = (aj - old_j) * y_[j];
    const double* ki = q_.row(i);
    const double* kj = q_.row(j);
    for (std::size_t t = 0; t < n_; ++t) grad_[t] += y_[t] * (ki[t] * di + kj[t] * dj);
  }

  const Gram& q_;
  std::vector<double> y_;
  double c_;
  std::size_t n_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
};

struct Candidate {
  double objective = kInf;
  double bias = 0.0;
  std::vector<double> alpha;
};

// Primal-optimal bias for fixed w. The hinge sum is convex piecewise linear
// in b with kinks at y_t - s_t; among minimizers the one nearest the KKT
// bias is kept.
Candidate evaluate(const Smo& smo, double C) {
  const auto s = smo.margins();
  const auto& y = smo.labels();
  const double half_norm = 0.5 * smo.squared_weight_norm();
  const double kkt = smo.kkt_bias();

  double best_b = kkt;
  double best_h = hinge_sum(s, y, kkt);
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double b = y[t] - s[t];
    const double h = hinge_sum(s, y, b);
    const double slack = 1e-12 * std::max(1.0, std::abs(best_h));
    if (h < best_h - slack ||
        (h <= best_h + slack && std::abs(b - kkt) < std::abs(best_b - kkt))) {
      best_h = std::min(h, best_h);
      best_b = b;
    }
  }
  Candidate c;
  c.objective = half_norm + C * hinge_sum(s, y, best_b);
  c.bias = best_b;
  c.alpha = smo.alpha();
  return c;
}

}  // namespace

TrainedModel train_svm(std::span<const SparseVector> vectors, std::span<const Label> labels,
                       std::size_t dimension, const SvmParams& params, SvmTrace* trace) {
  if (vectors.size() != labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "vector and label counts differ");
  }
  if (!(params.C > 0.0)) throw Error(ErrorCode::InvalidArgument, "SVM C must be > 0");
  if (vectors.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training vectors");
  std::vector<double> y(labels.size());
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] == Label::Neutral) {
      throw Error(ErrorCode::InvalidArgument, "SVM training labels must be binary");
    }
    y[t] = labels[t] == Label::Positive ? 1.0 : -1.0;
    (labels[t] == Label::Positive ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::SingleClassTraining, "SVM training set contains a single class");
  }
  for (const auto& v : vectors) {
    if (!v.empty() && v.back().index >= dimension) {
      throw Error(ErrorCode::InvalidArgument, "feature index outside model dimension");
    }
  }

  const Gram gram(vectors, dimension);
  Smo smo(gram, std::move(y), params.C);
  const int checkpoint = static_cast<int>(std::max<std::size_t>(vectors.size(), 1));

  Candidate best;
  auto consider = [&] {
    Candidate c = evaluate(smo, params.C);
    if (c.objective < best.objective) best = std::move(c);
    if (trace) {
      trace->dual_objective.push_back(smo.dual_objective());
      trace->primal_objective.push_back(best.objective);
    }
  };

  int iter = 0;
  bool converged = false;
  while (true) {
    if (iter >= params.max_iter) break;
    if (!smo.step(params.tol)) {
      converged = true;
      break;
    }
    ++iter;
    if (iter % checkpoint == 0) consider();
  }
  consider();

  SvmModel model;
  model.weights.assign(dimension, 0.0);
  for (std::size_t t = 0; t < vectors.size(); ++t) {
    const double coef = best.alpha[t] * smo.labels()[t];
    if (coef == 0.0) continue;
    for (const auto& e : vectors[t]) model.weights[e.index] += coef * e.value;
  }
  model.bias = best.bias;
  model.converged = converged;
  model.iterations = iter;

  TrainedModel out{model, {}};
  if (!converged) {
    out.warnings.push_back("NonConvergence: SVM stopped after " + std::to_string(iter) +
                           " iterations without reaching tol " + std::to_string(params.tol));
  }
  return out;
}

double svm_primal_objective(const SvmModel& model, std::span<const SparseVector> vectors,
                            std::span<const Label> labels, double C) {
  double norm = 0.0;
  for (double w : model.weights) norm += w * w;
  double hinge = 0.0;
  for (std::size_t t = 0; t < vectors.size(); ++t) {
    double s = model.bias;
    for (const auto& e : vectors[t]) {
      if (e.index < model.weights.size()) s += model.weights[e.index] * e.value;
    }
    const double y = labels[t] == Label::Positive ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * s);
  }
  return 0.5 * norm + C * hinge;
}

}  // namespace sana::classify
