#include "csekit/losses.hpp"

#include <cmath>
#include <string>

#include "csekit/error.hpp"

namespace csekit {

void InfoNCEConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("InfoNCE temperature tau must be > 0");
}

void HTConfig::validate() const {
  if (!(m1 >= 0.0) || !(m2 >= 0.0) || !(beta >= 0.0)) throw ConfigError("HT margins m1, m2 and weight beta must be >= 0");
}

bool ContrastiveBatch::hard_negative_present(Eigen::Index i) const {
  if (!hard_negatives) return false;
  return has_hard_negative.empty() || has_hard_negative[static_cast<std::size_t>(i)];
}

bool ContrastiveBatch::ht_row(Eigen::Index i) const {
  return !has_ht_supervision.empty() && has_ht_supervision[static_cast<std::size_t>(i)];
}

void ContrastiveBatch::validate(bool check_unit_norm, double tol) const {
  const Eigen::Index b = anchors.rows();
  const Eigen::Index d = anchors.cols();
  if (b == 0) throw ArgumentError("contrastive batch is empty (B == 0)");
  if (positives.rows() != b || positives.cols() != d) throw ArgumentError("positives must be B x d like anchors");
  if (hard_negatives && (hard_negatives->rows() != b || hard_negatives->cols() != d))
    throw ArgumentError("hard_negatives must be B x d like anchors");
  if (intermediates && (intermediates->rows() != b || intermediates->cols() != d))
    throw ArgumentError("intermediates must be B x d like anchors");
  if (!has_hard_negative.empty() && static_cast<Eigen::Index>(has_hard_negative.size()) != b)
    throw ArgumentError("has_hard_negative mask must have length B");
  if (!has_ht_supervision.empty() && static_cast<Eigen::Index>(has_ht_supervision.size()) != b)
    throw ArgumentError("has_ht_supervision mask must have length B");
  for (Eigen::Index i = 0; i < b; ++i) {
    if (ht_row(i) && (!intermediates || !hard_negative_present(i)))
      throw ArgumentError("row " + std::to_string(i) + " has HT supervision but lacks an intermediate or hard negative");
  }
  if (!check_unit_norm) return;
  auto check = [&](const Eigen::MatrixXd& m, Eigen::Index i, const char* what) {
    const double n = m.row(i).norm();
    if (!(std::abs(n - 1.0) < tol))
      throw ArgumentError(std::string(what) + " row " + std::to_string(i) + " is not unit norm (|v| = " + std::to_string(n) + ")");
  };
  for (Eigen::Index i = 0; i < b; ++i) {
    check(anchors, i, "anchor");
    check(positives, i, "positive");
    if (hard_negative_present(i)) check(*hard_negatives, i, "hard negative");
    if (ht_row(i)) check(*intermediates, i, "intermediate");
  }
}

BatchGradient BatchGradient::zeros_like(const ContrastiveBatch& batch) {
  BatchGradient g;
  g.anchors = Eigen::MatrixXd::Zero(batch.anchors.rows(), batch.anchors.cols());
  g.positives = Eigen::MatrixXd::Zero(batch.positives.rows(), batch.positives.cols());
  if (batch.hard_negatives) g.hard_negatives = Eigen::MatrixXd::Zero(batch.hard_negatives->rows(), batch.hard_negatives->cols());
  if (batch.intermediates) g.intermediates = Eigen::MatrixXd::Zero(batch.intermediates->rows(), batch.intermediates->cols());
  return g;
}

BatchGradient& BatchGradient::operator+=(const BatchGradient& other) {
  anchors += other.anchors;
  positives += other.positives;
  if (hard_negatives.size()) hard_negatives += other.hard_negatives;
  if (intermediates.size()) intermediates += other.intermediates;
  return *this;
}

BatchGradient& BatchGradient::operator*=(double scale) {
  anchors *= scale;
  positives *= scale;
  hard_negatives *= scale;
  intermediates *= scale;
  return *this;
}

double info_nce_with_grad(const ContrastiveBatch& batch, const InfoNCEConfig& cfg, BatchGradient* grad) {
  cfg.validate();
  batch.validate(false);
  const Eigen::Index b = batch.size();
  const double inv_tau = 1.0 / cfg.tau;

  Eigen::MatrixXd pos_logits = batch.anchors * batch.positives.transpose() * inv_tau;
  Eigen::MatrixXd neg_logits;
  if (batch.hard_negatives) neg_logits = batch.anchors * batch.hard_negatives->transpose() * inv_tau;

  Eigen::MatrixXd pos_weights = Eigen::MatrixXd::Zero(b, b);
  Eigen::MatrixXd neg_weights = Eigen::MatrixXd::Zero(b, batch.hard_negatives ? b : 0);

  double total = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    // Max subtraction; tau = 0.05 puts logits near 20.
    double mx = pos_logits.row(i).maxCoeff();
    for (Eigen::Index j = 0; j < neg_logits.cols(); ++j)
      if (batch.hard_negative_present(j)) mx = std::max(mx, neg_logits(i, j));
    double z = 0.0;
    for (Eigen::Index j = 0; j < b; ++j) {
      pos_weights(i, j) = std::exp(pos_logits(i, j) - mx);
      z += pos_weights(i, j);
    }
    for (Eigen::Index j = 0; j < neg_logits.cols(); ++j) {
      if (!batch.hard_negative_present(j)) continue;
      neg_weights(i, j) = std::exp(neg_logits(i, j) - mx);
      z += neg_weights(i, j);
    }
    total += (mx + std::log(z)) - pos_logits(i, i);
    pos_weights.row(i) /= z;
    if (neg_weights.cols()) neg_weights.row(i) /= z;
    pos_weights(i, i) -= 1.0;
  }
  const double loss = total / static_cast<double>(b);

  if (grad) {
    const double s = inv_tau / static_cast<double>(b);
    grad->anchors.noalias() += s * (pos_weights * batch.positives);
    grad->positives.noalias() += s * (pos_weights.transpose() * batch.anchors);
    if (batch.hard_negatives) {
      grad->anchors.noalias() += s * (neg_weights * *batch.hard_negatives);
      grad->hard_negatives.noalias() += s * (neg_weights.transpose() * batch.anchors);
    }
  }
  return loss;
}

HTLoss hierarchical_triplet_with_grad(const ContrastiveBatch& batch, const HTConfig& cfg, BatchGradient* grad) {
  cfg.validate();
  batch.validate(false);
  HTLoss out;
  std::size_t rows = 0;
  for (Eigen::Index i = 0; i < batch.size(); ++i) rows += batch.ht_row(i) ? 1 : 0;
  if (rows == 0) return out;
  out.empty = false;

  const double w = 0.5 / static_cast<double>(rows);
  const auto& a = batch.anchors;
  const auto& p = batch.positives;
  const auto& m = *batch.intermediates;
  const auto& n = *batch.hard_negatives;
  double total = 0.0;
  for (Eigen::Index i = 0; i < batch.size(); ++i) {
    if (!batch.ht_row(i)) continue;
    const double ap = a.row(i).dot(p.row(i));
    const double am = a.row(i).dot(m.row(i));
    const double an = a.row(i).dot(n.row(i));
    const double upper = am - ap + cfg.m1;
    const double lower = an - am + cfg.m2;
    if (upper > 0.0) {
      total += upper;
      if (grad) {
        grad->anchors.row(i) += w * (m.row(i) - p.row(i));
        grad->intermediates.row(i) += w * a.row(i);
        grad->positives.row(i) -= w * a.row(i);
      }
    }
    if (lower > 0.0) {
      total += lower;
      if (grad) {
        grad->anchors.row(i) += w * (n.row(i) - m.row(i));
        grad->hard_negatives.row(i) += w * a.row(i);
        grad->intermediates.row(i) -= w * a.row(i);
      }
    }
  }
  out.value = w * total;
  return out;
}

CombinedLoss combined_loss_with_grad(const ContrastiveBatch& batch, const InfoNCEConfig& nce_cfg,
                                     const HTConfig& ht_cfg, BatchGradient* grad) {
  CombinedLoss out;
  out.contrastive = info_nce_with_grad(batch, nce_cfg, grad);
  const bool need_grad = grad && ht_cfg.beta != 0.0;
  BatchGradient ht_grad;
  if (need_grad) ht_grad = BatchGradient::zeros_like(batch);
  HTLoss ht = hierarchical_triplet_with_grad(batch, ht_cfg, need_grad ? &ht_grad : nullptr);
  out.ht = ht.value;
  out.ht_empty = ht.empty;
  out.total = ht_cfg.beta == 0.0 ? out.contrastive : out.contrastive + ht_cfg.beta * ht.value;
  if (need_grad && !ht.empty) {
    ht_grad *= ht_cfg.beta;
    *grad += ht_grad;
  }
  return out;
}

double info_nce(const ContrastiveBatch& batch, const InfoNCEConfig& cfg) {
  batch.validate(true);
  return info_nce_with_grad(batch, cfg, nullptr);
}

HTLoss hierarchical_triplet(const ContrastiveBatch& batch, const HTConfig& cfg) {
  batch.validate(true);
  return hierarchical_triplet_with_grad(batch, cfg, nullptr);
}

CombinedLoss combined_loss(const ContrastiveBatch& batch, const InfoNCEConfig& nce_cfg, const HTConfig& ht_cfg) {
  batch.validate(true);
  return combined_loss_with_grad(batch, nce_cfg, ht_cfg, nullptr);
}

}  // namespace csekit
