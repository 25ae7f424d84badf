#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace csekit {

struct InfoNCEConfig {
  double tau = 5e-2;
  void validate() const;
};

struct HTConfig {
  double m1 = 5e-3;
  double m2 = 1e-2;
  double beta = 1.0;
  void validate() const;
};

/// One training batch of embeddings, rows aligned by anchor index.
///
/// `hard_negatives` rows take part in the contrastive denominator of every
/// anchor when the matching `has_hard_negative` flag is set; an empty flag
/// vector means every row is present. Rows flagged in `has_ht_supervision`
/// must have both an intermediate and a hard negative.
struct ContrastiveBatch {
  Eigen::MatrixXd anchors;
  Eigen::MatrixXd positives;
  std::optional<Eigen::MatrixXd> hard_negatives;
  std::vector<bool> has_hard_negative;
  std::optional<Eigen::MatrixXd> intermediates;
  std::vector<bool> has_ht_supervision;

  Eigen::Index size() const { return anchors.rows(); }
  bool hard_negative_present(Eigen::Index i) const;
  bool ht_row(Eigen::Index i) const;

  /// Shape and supervision consistency; with `check_unit_norm`, also every
  /// used row's norm within `tol` of one.
  void validate(bool check_unit_norm, double tol = 1e-6) const;
};

/// Gradient of a loss with respect to every row of a ContrastiveBatch.
/// Matrices for absent columns stay empty.
struct BatchGradient {
  Eigen::MatrixXd anchors;
  Eigen::MatrixXd positives;
  Eigen::MatrixXd hard_negatives;
  Eigen::MatrixXd intermediates;

  static BatchGradient zeros_like(const ContrastiveBatch& batch);
  BatchGradient& operator+=(const BatchGradient& other);
  BatchGradient& operator*=(double scale);
};

struct HTLoss {
  double value = 0.0;
  /// No row carried HT supervision; `value` is then 0.
  bool empty = true;
};

struct CombinedLoss {
  double total = 0.0;
  double contrastive = 0.0;
  double ht = 0.0;
  bool ht_empty = true;
};

/// Mean InfoNCE over anchors with in-batch negatives: for anchor i the
/// candidates are p_i (target), every p_j with j != i, and every present
/// hard-negative row. Rows must be unit norm.
double info_nce(const ContrastiveBatch& batch, const InfoNCEConfig& cfg);

/// Mean over supervised rows of
///   1/2 [ max(a.m - a.p + m1, 0) + max(a.n - a.m + m2, 0) ].
HTLoss hierarchical_triplet(const ContrastiveBatch& batch, const HTConfig& cfg);

/// contrastive + beta * ht.
CombinedLoss combined_loss(const ContrastiveBatch& batch, const InfoNCEConfig& nce_cfg, const HTConfig& ht_cfg);

// Differentiable forms. These treat rows as raw vectors (the loss is a
// function of the inner products), skip the unit-norm check, and add the
// gradient into `grad` when it is non-null.
double info_nce_with_grad(const ContrastiveBatch& batch, const InfoNCEConfig& cfg, BatchGradient* grad);
HTLoss hierarchical_triplet_with_grad(const ContrastiveBatch& batch, const HTConfig& cfg, BatchGradient* grad);
CombinedLoss combined_loss_with_grad(const ContrastiveBatch& batch, const InfoNCEConfig& nce_cfg,
                                     const HTConfig& ht_cfg, BatchGradient* grad);

}  // namespace csekit
