#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "fedcpsl/objective.hpp"
#include "fedcpsl/rng.hpp"
#include "fedcpsl/types.hpp"

namespace fedcpsl {

struct LabeledDataset {
  Matrix inputs;
  std::vector<int> labels;
  int num_classes = 0;

  Eigen::Index size() const { return inputs.rows(); }
  Matrix one_hot() const;
  LabeledDataset subset(const std::vector<Eigen::Index>& rows) const;
  /// Throws when row counts disagree or a label is out of range.
  void validate() const;
};

class IdxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gaussian clusters around seeded centers drawn uniformly from [-1, 1]^dim.
/// Samples are ordered class by class.
LabeledDataset gen_synthetic_blobs(int n_classes, int dim, int n_per_class, double spread,
                                   std::uint64_t seed);

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// Pixel bytes are scaled to [0, 1]; num_classes is the largest label + 1
/// (at least 2).
LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path);

/// Inverse of load_idx for inputs in [0, 1]. Rows are written as a 1 x S
/// image unless `image_rows` divides the width.
void write_idx(const LabeledDataset& data, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, int image_rows = 1);

struct PartitionConfig {
  int n_clients = 10;
  int shards_per_client = 2;
  double epsilon = 0.9;
  double test_frac = 0.2;

  void validate() const;
};

/// Sorts by label, cuts n_clients * shards_per_client equal shards and deals
/// shards_per_client of them to each client uniformly at random.
std::vector<LabeledDataset> partition_shards(const LabeledDataset& data,
                                             const PartitionConfig& config, std::uint64_t seed);

/// A client's local data after the labeled/unlabeled/test split. Ground
/// truth for the unlabeled rows is kept out of the training path and is only
/// reachable through diagnostic_unlabeled_labels().
class ClientData {
 public:
  ClientData(LabeledDataset labeled, Matrix unlabeled, std::vector<int> unlabeled_truth,
             LabeledDataset test);

  const LabeledDataset& labeled() const { return labeled_; }
  const Matrix& labeled_one_hot() const { return labeled_one_hot_; }
  const Matrix& unlabeled() const { return unlabeled_; }
  const LabeledDataset& test() const { return test_; }
  Eigen::Index n_labeled() const { return labeled_.size(); }
  Eigen::Index n_unlabeled() const { return unlabeled_.rows(); }
  int num_classes() const { return labeled_.num_classes; }

  /// Cached full batches (see full_batch()).
  const Batch& full_semi_batch() const { return full_semi_; }
  const Batch& full_labeled_batch() const { return full_labeled_; }

  /// Diagnostics only: never feed these into training.
  const std::vector<int>& diagnostic_unlabeled_labels() const { return unlabeled_truth_; }

 private:
  LabeledDataset labeled_;
  Matrix labeled_one_hot_;
  Matrix unlabeled_;
  std::vector<int> unlabeled_truth_;
  LabeledDataset test_;
  Batch full_semi_;
  Batch full_labeled_;
};

/// Holds out floor(test_frac * n) samples for test, then moves
/// floor(epsilon * rest) of the remainder into the unlabeled pool, keeping at
/// least one labeled sample.
ClientData split_semi(const LabeledDataset& client, double epsilon, double test_frac,
                      std::uint64_t seed);

/// Draws s_l labeled and s_u unlabeled rows uniformly with replacement.
Batch sample_batch(const ClientData& data, int s_l, int s_u, Rng& rng);

/// Every labeled and unlabeled row exactly once, in storage order. With
/// `include_unlabeled` false the batch holds only the labeled rows.
Batch full_batch(const ClientData& data, bool include_unlabeled = true);

}  // namespace fedcpsl
