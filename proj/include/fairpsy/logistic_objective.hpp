#ifndef FAIRPSY_LOGISTIC_OBJECTIVE_HPP
#define FAIRPSY_LOGISTIC_OBJECTIVE_HPP

#include "fairpsy/core.hpp"

#include <cmath>

namespace fairpsy {

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/// log(1 + exp(z)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar z) {
  using std::exp;
  using std::log1p;
  return z > Scalar(0) ? z + log1p(exp(-z)) : log1p(exp(z));
}

namespace detail {

// a * ln(a / b), with the 0 * ln 0 = 0 convention.
template <typename Scalar>
Scalar xlog_ratio(Scalar a, Scalar b) {
  using std::log;
  return a == Scalar(0) ? Scalar(0) : a * log(a / b);
}

// Weighted mean score per protected group and overall.
template <typename Scalar, typename DerivedScores, typename DerivedGroups, typename DerivedWeights>
void group_means(const Eigen::MatrixBase<DerivedScores>& scores, const Eigen::MatrixBase<DerivedGroups>& groups,
                 const Eigen::MatrixBase<DerivedWeights>& weights, Scalar mass[2], Scalar mean[2], Scalar& overall) {
  Scalar sum[2] = {Scalar(0), Scalar(0)};
  mass[0] = mass[1] = Scalar(0);
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const int s = groups[i];
    mass[s] += weights[i];
    sum[s] += weights[i] * scores[i];
  }
  if (mass[0] == Scalar(0) || mass[1] == Scalar(0)) throw DataError("prejudice index needs both protected groups");
  mean[0] = sum[0] / mass[0];
  mean[1] = sum[1] / mass[1];
  overall = (sum[0] + sum[1]) / (mass[0] + mass[1]);
}

}  // namespace detail

/// Prejudice index of a score vector with respect to a binary protected
/// attribute:
///
///   PI = sum_i w_i sum_{y in {0,1}} p_i(y) ln(p(y | s_i) / p(y)),
///
/// where p_i(1) = score_i, p(y | s) is the weighted mean of p_i(y) over group s
/// and p(y) the weighted overall mean. Summing inside each group collapses the
/// expression to sum_s W_s KL(q_s || q), which is what is evaluated here.
template <typename DerivedScores, typename DerivedGroups, typename DerivedWeights>
typename DerivedScores::Scalar prejudice_index(const Eigen::MatrixBase<DerivedScores>& scores,
                                               const Eigen::MatrixBase<DerivedGroups>& protected_attr,
                                               const Eigen::MatrixBase<DerivedWeights>& weights) {
  using Scalar = typename DerivedScores::Scalar;
  if (protected_attr.size() != scores.size() || weights.size() != scores.size())
    throw DataError("prejudice_index: input lengths differ");
  Scalar mass[2], mean[2], overall;
  detail::group_means(scores, protected_attr, weights, mass, mean, overall);
  Scalar pi(0);
  for (int s = 0; s < 2; ++s)
    pi += mass[s] * (detail::xlog_ratio(mean[s], overall) +
                     detail::xlog_ratio(Scalar(1) - mean[s], Scalar(1) - overall));
  return pi;
}

/// Weighted logistic loss with L2 and prejudice-index penalties, normalized by
/// the total instance weight W:
///
///   f(beta, b) = [ sum_i w_i (softplus(z_i) - y_i z_i) + eta PI + lambda/2 |beta|^2 ] / W,
///   z = X beta + b.
///
/// Parameters are packed as [beta; b]. The intercept is not regularized.
template <typename Scalar>
class LogisticObjective {
 public:
  LogisticObjective(MatrixX<Scalar> design, VectorX<Scalar> labels, Eigen::VectorXi protected_attr,
                    VectorX<Scalar> weights, Scalar l2_lambda, Scalar eta)
      : design_(std::move(design)),
        labels_(std::move(labels)),
        protected_(std::move(protected_attr)),
        weights_(std::move(weights)),
        l2_(l2_lambda),
        eta_(eta),
        total_weight_(weights_.sum()) {
    if (labels_.size() != design_.rows() || protected_.size() != design_.rows() || weights_.size() != design_.rows())
      throw DataError("logistic objective: input lengths differ");
  }

  Eigen::Index dimension() const { return design_.cols() + 1; }

  VectorX<Scalar> scores(const VectorX<Scalar>& params) const {
    const VectorX<Scalar> z = linear(params);
    return z.unaryExpr([](Scalar v) { return sigmoid(v); });
  }

  Scalar value(const VectorX<Scalar>& params) const {
    const VectorX<Scalar> z = linear(params);
    Scalar loss(0);
    for (Eigen::Index i = 0; i < z.size(); ++i) loss += weights_[i] * (softplus(z[i]) - labels_[i] * z[i]);
    if (eta_ != Scalar(0)) {
      const VectorX<Scalar> p = z.unaryExpr([](Scalar v) { return sigmoid(v); });
      loss += eta_ * prejudice_index(p, protected_, weights_);
    }
    const auto beta = params.head(design_.cols());
    return (loss + Scalar(0.5) * l2_ * beta.squaredNorm()) / total_weight_;
  }

  Scalar value_and_gradient(const VectorX<Scalar>& params, VectorX<Scalar>& grad) const {
    using std::log;
    const Eigen::Index d = design_.cols();
    const VectorX<Scalar> z = linear(params);
    const VectorX<Scalar> p = z.unaryExpr([](Scalar v) { return sigmoid(v); });

    Scalar loss(0);
    VectorX<Scalar> residual(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      loss += weights_[i] * (softplus(z[i]) - labels_[i] * z[i]);
      residual[i] = weights_[i] * (p[i] - labels_[i]);
    }
    if (eta_ != Scalar(0)) {
      Scalar mass[2], mean[2], overall;
      detail::group_means(p, protected_, weights_, mass, mean, overall);
      // d/dq_s of W_s KL(q_s || q); the d/dq terms sum to zero across groups.
      Scalar slope[2];
      for (int s = 0; s < 2; ++s) {
        loss += eta_ * mass[s] *
                (detail::xlog_ratio(mean[s], overall) + detail::xlog_ratio(Scalar(1) - mean[s], Scalar(1) - overall));
        slope[s] = log(mean[s] / overall) - log((Scalar(1) - mean[s]) / (Scalar(1) - overall));
      }
      for (Eigen::Index i = 0; i < z.size(); ++i)
        residual[i] += eta_ * weights_[i] * p[i] * (Scalar(1) - p[i]) * slope[protected_[i]];
    }
    const auto beta = params.head(d);
    grad.resize(d + 1);
    grad.head(d) = (design_.transpose() * residual + l2_ * beta) / total_weight_;
    grad[d] = residual.sum() / total_weight_;
    return (loss + Scalar(0.5) * l2_ * beta.squaredNorm()) / total_weight_;
  }

 private:
  VectorX<Scalar> linear(const VectorX<Scalar>& params) const {
    const Eigen::Index d = design_.cols();
    return (design_ * params.head(d)).array() + params[d];
  }

  MatrixX<Scalar> design_;
  VectorX<Scalar> labels_;
  Eigen::VectorXi protected_;
  VectorX<Scalar> weights_;
  Scalar l2_;
  Scalar eta_;
  Scalar total_weight_;
};

}  // namespace fairpsy

#endif  // FAIRPSY_LOGISTIC_OBJECTIVE_HPP
