#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedcpsl/client.hpp"
#include "fedcpsl/rng.hpp"
#include "fedcpsl/types.hpp"

namespace fedcpsl {

struct ServerState {
  ParamVector theta;
  ParamVector control;
  int round = 0;
};

/// Reports keyed by client id. std::map keeps iteration (and therefore
/// floating-point summation) order independent of arrival order.
using ReportMap = std::map<int, ClientReport>;

/// Uniform m-subset of [0, n_clients), returned sorted.
std::vector<int> sample_participants(int n_clients, int m, Rng& rng);

/// theta + eta_g (N / m) sum_{i in A} omega_i delta_i / q_eff_i, with N the
/// number of weights and m the number of reports.
ParamVector aggregate(const ServerState& server, const ReportMap& reports,
                      std::span<const double> weights, double eta_g);

/// c - sum_{i in A} omega_i (c + delta_i / (eta q_eff_i)).
ParamVector update_server_control(const ServerState& server, const ReportMap& reports,
                                  std::span<const double> weights, double eta);

/// Mean effective step count of the reports (the automatic eta_g).
double mean_effective_steps(const ReportMap& reports);

/// Optional smoothness and discrepancy constants from the convergence analysis.
/// The simulator never estimates them.
struct TheoryConstants {
  std::optional<double> L;
  std::optional<double> L_F;
  std::optional<double> L_tilde;
  std::optional<double> L_h;
  std::optional<double> Gamma;
};

struct StepSizeInputs {
  double eta = 0.0;
  double eta_c = 0.0;
  double eta_v = 0.0;
  /// nullopt means automatic (mean effective steps of the participants).
  std::optional<double> eta_g;
  int n_clients = 1;
  int participants = 1;
  /// Smallest and largest effective step counts a client can take.
  double q_eff_min = 1.0;
  double q_eff_max = 1.0;
  std::vector<double> weights;
  std::vector<double> betas;
  TheoryConstants constants;
};

struct BoundCheck {
  std::string name;
  double value = 0.0;  // configured quantity
  double bound = 0.0;  // value must not exceed this
  bool satisfied = true;
};

struct StepSizeReport {
  std::vector<BoundCheck> checks;
  /// One entry per violated bound, or a single "conditions unchecked" entry.
  std::vector<std::string> warnings;
  /// Conditions that could not be evaluated for lack of constants.
  std::vector<std::string> notes;
};

/// Evaluates the step-size conditions of the global and personalized
/// convergence guarantees. Never throws on violations.
StepSizeReport validate_stepsizes(const StepSizeInputs& in);

}  // namespace fedcpsl
