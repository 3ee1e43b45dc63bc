// Small deterministic datasets shared by the unit tests.
#pragma once

#include <memory>
#include <vector>

#include "fedcpsl/data.hpp"
#include "fedcpsl/nn.hpp"
#include "fedcpsl/trainer.hpp"

namespace fixture {

inline std::shared_ptr<const fedcpsl::ClientData> blob_client(std::uint64_t seed, int classes = 3,
                                                              int dim = 4, int per_class = 8,
                                                              double epsilon = 0.5,
                                                              double test_frac = 0.2) {
  const auto data = fedcpsl::gen_synthetic_blobs(classes, dim, per_class, 0.7, seed);
  return std::make_shared<const fedcpsl::ClientData>(
      fedcpsl::split_semi(data, epsilon, test_frac, seed));
}

struct Fleet {
  fedcpsl::ModelSpec spec;
  std::vector<std::shared_ptr<const fedcpsl::ClientData>> clients;
};

/// Non-IID fleet: blobs sharded by label across `n_clients`.
inline Fleet blob_fleet(std::uint64_t seed, int n_clients = 6, int classes = 3, int dim = 4,
                        int per_class = 20, double spread = 0.8, double epsilon = 0.5,
                        int hidden = 6) {
  const auto data = fedcpsl::gen_synthetic_blobs(classes, dim, per_class, spread, seed);
  fedcpsl::PartitionConfig part;
  part.n_clients = n_clients;
  part.shards_per_client = 2;
  part.epsilon = epsilon;
  part.test_frac = 0.2;
  Fleet fleet;
  fleet.spec = fedcpsl::ModelSpec::make({dim, hidden, classes});
  const auto shards = fedcpsl::partition_shards(data, part, seed);
  for (std::size_t i = 0; i < shards.size(); ++i) {
    fleet.clients.push_back(std::make_shared<const fedcpsl::ClientData>(
        fedcpsl::split_semi(shards[i], epsilon, 0.2, seed + 1000 + i)));
  }
  return fleet;
}

inline fedcpsl::ClientState fresh_state(const fedcpsl::ModelSpec& spec,
                                        std::shared_ptr<const fedcpsl::ClientData> data,
                                        const fedcpsl::ParamVector& theta_lc) {
  fedcpsl::ClientState s;
  s.theta_lc = theta_lc;
  s.control = fedcpsl::ParamVector::Zero(spec.param_count());
  s.nu = fedcpsl::Matrix::Constant(data->n_unlabeled(), spec.num_classes(),
                                   1.0 / spec.num_classes());
  s.data = std::move(data);
  return s;
}

}  // namespace fixture
