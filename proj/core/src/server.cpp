#include "fedcpsl/server.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fedcpsl {
namespace {

void check_reports(const ServerState& server, const ReportMap& reports,
                   std::span<const double> weights) {
  if (reports.empty()) throw std::invalid_argument("aggregation needs at least one report");
  for (const auto& [id, report] : reports) {
    if (id < 0 || static_cast<std::size_t>(id) >= weights.size()) {
      throw std::out_of_range("report from unknown client " + std::to_string(id));
    }
    if (report.delta.size() != server.theta.size()) {
      throw ShapeError("report from client " + std::to_string(id) + " has the wrong size");
    }
    if (!report.delta.allFinite()) {
      throw std::domain_error("non-finite update from client " + std::to_string(id));
    }
    if (!(report.q_eff > 0.0)) {
      throw std::invalid_argument("client " + std::to_string(id) + " reported q_eff <= 0");
    }
  }
}

}  // namespace

std::vector<int> sample_participants(int n_clients, int m, Rng& rng) {
  if (m < 1 || m > n_clients) {
    throw std::invalid_argument("participant count must lie in [1, " +
                                std::to_string(n_clients) + "]");
  }
  std::vector<int> ids(n_clients);
  std::iota(ids.begin(), ids.end(), 0);
  // Partial Fisher-Yates: the first m entries form a uniform m-subset.
  for (int k = 0; k < m; ++k) {
    std::uniform_int_distribution<int> pick(k, n_clients - 1);
    std::swap(ids[k], ids[pick(rng)]);
  }
  ids.resize(m);
  std::sort(ids.begin(), ids.end());
  return ids;
}

ParamVector aggregate(const ServerState& server, const ReportMap& reports,
                      std::span<const double> weights, double eta_g) {
  check_reports(server, reports, weights);
  const double scale =
      eta_g * static_cast<double>(weights.size()) / static_cast<double>(reports.size());
  ParamVector step = ParamVector::Zero(server.theta.size());
  for (const auto& [id, report] : reports) step += (weights[id] / report.q_eff) * report.delta;
  return server.theta + scale * step;
}

ParamVector update_server_control(const ServerState& server, const ReportMap& reports,
                                  std::span<const double> weights, double eta) {
  check_reports(server, reports, weights);
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  ParamVector c = server.control;
  for (const auto& [id, report] : reports) {
    c -= weights[id] * (server.control + report.delta / (eta * report.q_eff));
  }
  return c;
}

double mean_effective_steps(const ReportMap& reports) {
  if (reports.empty()) throw std::invalid_argument("no reports");
  double sum = 0.0;
  for (const auto& entry : reports) sum += entry.second.q_eff;
  return sum / static_cast<double>(reports.size());
}

StepSizeReport validate_stepsizes(const StepSizeInputs& in) {
  StepSizeReport report;
  const auto& k = in.constants;
  if (!k.L) {
    report.warnings.push_back("conditions unchecked: L_estimate not supplied");
    return report;
  }
  const double L = *k.L;
  const double N = in.n_clients;
  const double m = in.participants;
  const double q_max = in.q_eff_max;
  const double q_min = in.q_eff_min;

  // Automatic eta_g is a participant mean, so it lies in [q_min, q_max];
  // each bound is evaluated at whichever end is tighter.
  const std::vector<double> eta_g_candidates =
      in.eta_g ? std::vector<double>{*in.eta_g} : std::vector<double>{q_min, q_max};
  auto tightest = [&](auto bound_of) {
    double best = bound_of(eta_g_candidates.front());
    for (double g : eta_g_candidates) best = std::min(best, bound_of(g));
    return best;
  };

  auto add = [&](std::string name, double value, double bound) {
    BoundCheck check{std::move(name), value, bound, value <= bound};
    if (!check.satisfied) {
      std::ostringstream msg;
      msg << "violated: " << check.name << " (value " << value << " > bound " << bound << ")";
      report.warnings.push_back(msg.str());
    }
    report.checks.push_back(std::move(check));
  };

  const double participation = std::pow(1.0 + 2.0 * N / m, -0.5);
  add("eta <= m / (48 eta_g N L)", in.eta,
      tightest([&](double g) { return m / (48.0 * g * N * L); }));
  add("eta <= 1 / (8 L Qmax)", in.eta, 1.0 / (8.0 * L * q_max));
  add("eta <= 3 eta_g N / (100 m L Qmax^2)", in.eta,
      tightest([&](double g) { return 3.0 * g * N / (100.0 * m * L * q_max * q_max); }));
  add("eta <= m / (32 eta_g N L) (1 + 2N/m)^-1/2", in.eta,
      tightest([&](double g) { return m / (32.0 * g * N * L) * participation; }));
  add("eta_v <= 1 / (4 L)", in.eta_v, 1.0 / (4.0 * L));

  if (!k.L_F) {
    report.notes.push_back("personalized-model conditions unchecked: L_F not supplied");
  } else {
    const double LF = *k.L_F;
    add("eta_c <= 1 / (2 Qmax L_F)", in.eta_c, 1.0 / (2.0 * q_max * LF));
    add("eta_c <= eta eta_g N L^2 / (Qmin m L_F^2)", in.eta_c, tightest([&](double g) {
          return in.eta * g * N * L * L / (q_min * m * LF * LF);
        }));
    add("eta_c <= eta eta_g N / (Qmin m)", in.eta_c,
        tightest([&](double g) { return in.eta * g * N / (q_min * m); }));
  }

  if (!(k.L_tilde && k.L_h && k.Gamma)) {
    report.notes.push_back("D_0 conditions unchecked: L_tilde, L_h and Gamma are required");
  } else if (in.weights.size() != in.betas.size()) {
    report.notes.push_back("D_0 conditions unchecked: weights and betas differ in length");
  } else {
    double d0 = 0.0;
    for (std::size_t i = 0; i < in.weights.size(); ++i) {
      const double b = in.betas[i];
      d0 += in.weights[i] * (1.0 - b) * (4.0 * b * *k.L_tilde * *k.L_h * *k.Gamma + 5.0 * L);
    }
    d0 /= 4.0;
    add("D_0 <= 11 L / 8 + 11 m / (2 N)", d0, 11.0 * L / 8.0 + 11.0 * m / (2.0 * N));
    if (d0 > 0.0) {
      add("eta <= m / (48 eta_g N D_0)", in.eta,
          tightest([&](double g) { return m / (48.0 * g * N * d0); }));
    }
  }
  return report;
}

}  // namespace fedcpsl
