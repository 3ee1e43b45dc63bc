#pragma once

#include <map>
#include <span>
#include <string_view>

#include "fedcpsl/client.hpp"
#include "fedcpsl/server.hpp"

namespace fedcpsl {

enum class AlgorithmKind { fedcpsl, fedavg_ss, fedshvrp, apfl, apsfl };

inline constexpr AlgorithmKind kAllAlgorithms[] = {
    AlgorithmKind::fedcpsl, AlgorithmKind::fedavg_ss, AlgorithmKind::fedshvrp,
    AlgorithmKind::apfl, AlgorithmKind::apsfl};

AlgorithmKind parse_algorithm(std::string_view name);
std::string_view to_string(AlgorithmKind kind);

/// Whether the algorithm trains a localized model and predicts with the mixture.
bool is_personalized(AlgorithmKind kind);

/// Client-side result of the parameter-averaging baselines.
struct BaselineClientResult {
  ParamVector theta_local;  // theta_i^{r+1}
  ClientState state;
};

/// FedAvg on the semi-supervised objective: pseudo-label refresh, then plain
/// local SGD (no momentum, no control variates).
BaselineClientResult fedavg_ss_round(ClientState state, const ModelSpec& spec,
                                     const ParamVector& theta_global, const LocalPlan& plan,
                                     const ClientOptions& options, Rng& rng, int round = 0);

/// Client-side result of the SCAFFOLD-style baseline.
struct ScaffoldClientResult {
  ParamVector delta;          // theta_i^{r+1} - theta^r
  ParamVector control_delta;  // c_i^{new} - c_i
  ClientState state;
};

/// Semi-supervised SCAFFOLD with partial participation on the global model
/// only. Uses the "option II" control update
/// c_i <- c_i - c + (theta^r - theta_i) / (Q eta).
ScaffoldClientResult fedshvrp_round(ClientState state, const ModelSpec& spec,
                                    const ParamVector& theta_global, const ParamVector& c_global,
                                    const LocalPlan& plan, const ClientOptions& options, Rng& rng,
                                    int round = 0);

/// Interpolation-based personalization with plain local SGD on both the local
/// copy (f_i) and the localized model (F_i). APFL is the labeled-only
/// variant: alpha_p = alpha_r = 0 and unlabeled data is ignored.
BaselineClientResult apsfl_round(ClientState state, const ModelSpec& spec,
                                 const ParamVector& theta_global, const LocalPlan& plan,
                                 const ClientOptions& options, Rng& rng, int round = 0);
BaselineClientResult apfl_round(ClientState state, const ModelSpec& spec,
                                const ParamVector& theta_global, const LocalPlan& plan,
                                const ClientOptions& options, Rng& rng, int round = 0);

/// Client options APFL actually trains with (labeled-only objective).
ClientOptions apfl_options(ClientOptions options);

/// sum_{i in A} omega_i theta_i / sum_{i in A} omega_i.
ParamVector average_parameters(const std::map<int, ParamVector>& locals,
                               std::span<const double> weights);

/// theta + lr * weighted mean of deltas, and c + sum_{i in A} omega_i (c_i^new - c_i).
struct ScaffoldServerUpdate {
  ParamVector theta;
  ParamVector control;
};
ScaffoldServerUpdate scaffold_server_update(const ServerState& server,
                                            const std::map<int, ScaffoldClientResult>& results,
                                            std::span<const double> weights, double global_lr);

}  // namespace fedcpsl
