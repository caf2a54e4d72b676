#ifndef SPADE_DATASET_HPP
#define SPADE_DATASET_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "spade/errors.hpp"

namespace spade {

// A design is a point in the (possibly logit-encoded) search space.
using Design = Eigen::VectorXd;

enum class FileFormat { csv, json };

// Per-dimension z-score statistics shared by the dataset and the surrogate.
struct NormStats {
  Eigen::VectorXd x_mean, x_std;
  double y_mean = 0.0;
  double y_std = 1.0;
};

// One-hot logit encoding for token sequences. Encoded designs have dimension
// length * vocab; the selected class gets on_logit, the rest off_logit.
struct DiscreteCodec {
  int vocab = 0;
  int length = 0;
  double on_logit = 1.0;
  double off_logit = -1.0;

  int dim() const { return vocab * length; }
  Design encode(const std::vector<int>& tokens) const;
  // Per-position argmax over each vocab block; ties break to the lowest index.
  std::vector<int> decode(const Design& x) const;
};

// Immutable offline dataset of (design, score) rows with fitted z-score
// statistics. Standard deviations below 1e-8 are clamped to 1 so constant
// columns stay finite under normalization.
class Dataset {
 public:
  static Dataset from_rows(Eigen::MatrixXd designs, Eigen::VectorXd scores);

  int size() const { return static_cast<int>(designs_.rows()); }
  int dim() const { return static_cast<int>(designs_.cols()); }
  const Eigen::MatrixXd& designs() const { return designs_; }
  const Eigen::VectorXd& scores() const { return scores_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  const NormStats& norm() const { return norm_; }

  Design normalize_x(const Design& x) const;
  Design denormalize_x(const Design& x) const;
  double normalize_y(double y) const;
  double denormalize_y(double y) const;

  // All rows mapped into normalized space (used by the support index and
  // the trainer).
  Eigen::MatrixXd normalized_designs() const;
  Eigen::VectorXd normalized_scores() const;

 private:
  Dataset() = default;

  Eigen::MatrixXd designs_;
  Eigen::VectorXd scores_;
  double y_min_ = 0.0, y_max_ = 0.0;
  NormStats norm_;
};

// CSV: header `x0,...,x{D-1},y`, one record per line. JSON: top-level array
// of objects {"x": [...], "y": number}.
Dataset load_dataset(const std::string& path, FileFormat format);

void write_dataset_csv(const Eigen::MatrixXd& designs,
                       const Eigen::VectorXd& scores, const std::string& path);

}  // namespace spade

#endif  // SPADE_DATASET_HPP
