#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fedcpsl/data.hpp"

namespace fedcpsl {
namespace {

// Guards floor() against products such as 0.2 * 200 landing just below an integer.
Eigen::Index floor_count(double fraction, Eigen::Index n) {
  return static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

void check_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v < 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1)");
  }
}

}  // namespace

Matrix LabeledDataset::one_hot() const {
  Matrix out = Matrix::Zero(size(), num_classes);
  for (Eigen::Index i = 0; i < size(); ++i) out(i, labels[i]) = 1.0;
  return out;
}

LabeledDataset LabeledDataset::subset(const std::vector<Eigen::Index>& rows) const {
  LabeledDataset out;
  out.num_classes = num_classes;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  out.labels.reserve(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.inputs.row(static_cast<Eigen::Index>(k)) = inputs.row(rows[k]);
    out.labels.push_back(labels[rows[k]]);
  }
  return out;
}

void LabeledDataset::validate() const {
  if (static_cast<Eigen::Index>(labels.size()) != inputs.rows()) {
    throw ShapeError("dataset has " + std::to_string(inputs.rows()) + " inputs but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw std::out_of_range("label " + std::to_string(y) + " outside [0, " +
                              std::to_string(num_classes) + ")");
    }
  }
}

LabeledDataset gen_synthetic_blobs(int n_classes, int dim, int n_per_class, double spread,
                                   std::uint64_t seed) {
  if (n_classes < 2 || dim < 1 || n_per_class < 1 || spread < 0.0) {
    throw std::invalid_argument("blobs need >= 2 classes, positive sizes, spread >= 0");
  }
  Rng rng = make_stream(seed, StreamKind::blobs);
  std::uniform_real_distribution<double> center_dist(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Matrix centers(n_classes, dim);
  for (Eigen::Index k = 0; k < centers.size(); ++k) centers.data()[k] = center_dist(rng);

  LabeledDataset data;
  data.num_classes = n_classes;
  data.inputs.resize(Eigen::Index(n_classes) * n_per_class, dim);
  data.labels.reserve(data.inputs.rows());
  Eigen::Index row = 0;
  for (int c = 0; c < n_classes; ++c) {
    for (int k = 0; k < n_per_class; ++k, ++row) {
      for (int d = 0; d < dim; ++d) data.inputs(row, d) = centers(c, d) + spread * noise(rng);
      data.labels.push_back(c);
    }
  }
  return data;
}

void PartitionConfig::validate() const {
  if (n_clients < 1) throw std::invalid_argument("n_clients must be positive");
  if (shards_per_client < 1) throw std::invalid_argument("shards_per_client must be positive");
  check_fraction(epsilon, "epsilon");
  check_fraction(test_frac, "test_frac");
}

std::vector<LabeledDataset> partition_shards(const LabeledDataset& data,
                                             const PartitionConfig& config, std::uint64_t seed) {
  config.validate();
  data.validate();
  const Eigen::Index shards = Eigen::Index(config.n_clients) * config.shards_per_client;
  if (data.size() % shards != 0 || data.size() == 0) {
    std::ostringstream msg;
    msg << "dataset size " << data.size() << " must be a positive multiple of clients x "
        << "shards_per_client = " << shards;
    throw std::invalid_argument(msg.str());
  }
  const Eigen::Index shard_size = data.size() / shards;

  std::vector<Eigen::Index> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return data.labels[a] < data.labels[b]; });

  std::vector<Eigen::Index> shard_ids(shards);
  std::iota(shard_ids.begin(), shard_ids.end(), 0);
  Rng rng = make_stream(seed, StreamKind::partition);
  std::shuffle(shard_ids.begin(), shard_ids.end(), rng);

  std::vector<LabeledDataset> clients;
  clients.reserve(config.n_clients);
  for (int i = 0; i < config.n_clients; ++i) {
    std::vector<Eigen::Index> rows;
    rows.reserve(shard_size * config.shards_per_client);
    for (int s = 0; s < config.shards_per_client; ++s) {
      const Eigen::Index shard = shard_ids[Eigen::Index(i) * config.shards_per_client + s];
      for (Eigen::Index k = 0; k < shard_size; ++k) rows.push_back(order[shard * shard_size + k]);
    }
    clients.push_back(data.subset(rows));
  }
  return clients;
}

ClientData::ClientData(LabeledDataset labeled, Matrix unlabeled,
                       std::vector<int> unlabeled_truth, LabeledDataset test)
    : labeled_(std::move(labeled)),
      labeled_one_hot_(labeled_.one_hot()),
      unlabeled_(std::move(unlabeled)),
      unlabeled_truth_(std::move(unlabeled_truth)),
      test_(std::move(test)) {
  if (static_cast<Eigen::Index>(unlabeled_truth_.size()) != unlabeled_.rows()) {
    throw ShapeError("unlabeled ground truth does not match unlabeled rows");
  }
  if (unlabeled_.rows() > 0 && unlabeled_.cols() != labeled_.inputs.cols()) {
    throw ShapeError("labeled and unlabeled inputs differ in width");
  }
  full_semi_ = full_batch(*this, true);
  full_labeled_ = full_batch(*this, false);
}

ClientData split_semi(const LabeledDataset& client, double epsilon, double test_frac,
                      std::uint64_t seed) {
  check_fraction(epsilon, "epsilon");
  check_fraction(test_frac, "test_frac");
  client.validate();
  const Eigen::Index n = client.size();
  if (n < 2) throw std::invalid_argument("client needs at least 2 samples to split");

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_stream(seed, StreamKind::split);
  std::shuffle(order.begin(), order.end(), rng);

  const Eigen::Index n_test = std::min(floor_count(test_frac, n), n - 1);
  const Eigen::Index n_train = n - n_test;
  const Eigen::Index n_unlabeled = std::min(floor_count(epsilon, n_train), n_train - 1);

  auto slice = [&](Eigen::Index from, Eigen::Index to) {
    return std::vector<Eigen::Index>(order.begin() + from, order.begin() + to);
  };
  LabeledDataset test = client.subset(slice(0, n_test));
  LabeledDataset unlabeled = client.subset(slice(n_test, n_test + n_unlabeled));
  LabeledDataset labeled = client.subset(slice(n_test + n_unlabeled, n));
  return ClientData(std::move(labeled), std::move(unlabeled.inputs), std::move(unlabeled.labels),
                    std::move(test));
}

Batch sample_batch(const ClientData& data, int s_l, int s_u, Rng& rng) {
  if (s_l < 0 || s_u < 0) throw std::invalid_argument("batch sizes must be nonnegative");
  if (s_l > 0 && data.n_labeled() == 0) throw std::invalid_argument("labeled pool is empty");
  if (s_u > 0 && data.n_unlabeled() == 0) throw std::invalid_argument("unlabeled pool is empty");

  Batch batch;
  batch.inputs.resize(Eigen::Index(s_l) + s_u, data.labeled().inputs.cols());
  batch.labels.resize(s_l, data.num_classes());
  if (s_l > 0) {
    std::uniform_int_distribution<Eigen::Index> pick(0, data.n_labeled() - 1);
    for (int k = 0; k < s_l; ++k) {
      const Eigen::Index i = pick(rng);
      batch.inputs.row(k) = data.labeled().inputs.row(i);
      batch.labels.row(k) = data.labeled_one_hot().row(i);
    }
  }
  if (s_u > 0) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(data.n_unlabeled()) - 1);
    batch.nu_index.resize(s_u);
    for (int k = 0; k < s_u; ++k) {
      const int i = pick(rng);
      batch.inputs.row(s_l + k) = data.unlabeled().row(i);
      batch.nu_index[k] = i;
    }
  }
  return batch;
}

Batch full_batch(const ClientData& data, bool include_unlabeled) {
  const Eigen::Index nl = data.n_labeled();
  const Eigen::Index nu = include_unlabeled ? data.n_unlabeled() : 0;
  Batch batch;
  batch.inputs.resize(nl + nu, data.labeled().inputs.cols());
  batch.inputs.topRows(nl) = data.labeled().inputs;
  if (nu > 0) batch.inputs.bottomRows(nu) = data.unlabeled();
  batch.labels = data.labeled_one_hot();
  batch.nu_index.resize(nu);
  std::iota(batch.nu_index.begin(), batch.nu_index.end(), 0);
  return batch;
}

}  // namespace fedcpsl
