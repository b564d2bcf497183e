#include "rolesim/market.hpp"

#include <cmath>
#include <json.hpp>

#include "rolesim/errors.hpp"

namespace rolesim {

void InteractionGraph::set_weight(AgentIndex i, AgentIndex k, double w) {
  if (i >= n_ || k >= n_) throw std::out_of_range("interaction graph index out of range");
  if (i == k) throw std::invalid_argument("self-interaction weight must stay 0");
  if (!std::isfinite(w)) throw std::invalid_argument("interaction weight must be finite");
  weights_[i * n_ + k] = std::max(w, -1.0);
}

bool InteractionGraph::symmetric() const {
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = i + 1; k < n_; ++k)
      if (weight(i, k) != weight(k, i)) return false;
  return true;
}

std::vector<std::pair<AgentIndex, AgentIndex>> InteractionGraph::conflict_pairs() const {
  std::vector<std::pair<AgentIndex, AgentIndex>> out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = i + 1; k < n_; ++k)
      if (weight(i, k) == -1.0 && weight(k, i) == -1.0) out.emplace_back(i, k);
  return out;
}

Scenario draw_scenario(std::size_t n, double p_c, double value_rate, std::uint64_t seed) {
  Rng rng(seed);
  Scenario s = draw_scenario(n, p_c, value_rate, rng);
  s.seed = seed;
  return s;
}

Scenario draw_scenario(std::size_t n, double p_c, double value_rate, Rng& rng) {
  if (n < 2) throw ConfigError("scenario needs at least 2 agents");
  if (!(p_c >= 0.0 && p_c <= 1.0)) throw ConfigError("conflict probability must be in [0, 1]");
  if (!(value_rate > 0.0) || !std::isfinite(value_rate))
    throw ConfigError("value rate must be positive");

  Scenario s;
  s.conflict_probability = p_c;
  s.value_rate = value_rate;
  s.bundles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.bundles.push_back({i, rng.exponential(value_rate)});
  s.graph = InteractionGraph(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k)
      if (rng.bernoulli(p_c)) s.graph.set_symmetric(i, k, -1.0);
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  const auto& g = s.graph;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t k = 0; k < g.size(); ++k)
      if (i != k && g.weight(i, k) != 0.0 && g.weight(i, k) != -1.0)
        throw std::invalid_argument("scenario JSON only encodes the two-point conflict scheme");
  if (!g.symmetric()) throw std::invalid_argument("scenario JSON requires a symmetric graph");

  nlohmann::json j;
  j["seed"] = s.seed;
  j["n"] = s.size();
  j["p_C"] = s.conflict_probability;
  j["lambda"] = s.value_rate;
  auto& values = j["values"] = nlohmann::json::array();
  for (const auto& b : s.bundles) values.push_back(b.base_value);
  auto& pairs = j["conflict_pairs"] = nlohmann::json::array();
  for (const auto& [i, k] : g.conflict_pairs()) pairs.push_back({i, k});
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("scenario JSON: ") + e.what());
  }
  try {
    Scenario s;
    s.seed = j.at("seed").get<std::uint64_t>();
    const auto n = j.at("n").get<std::size_t>();
    s.conflict_probability = j.at("p_C").get<double>();
    s.value_rate = j.value("lambda", 10.0);
    const auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != n) throw ConfigError("scenario JSON: values[] length differs from n");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(values[i] >= 0.0)) throw ConfigError("scenario JSON: negative bundle value");
      s.bundles.push_back({i, values[i]});
    }
    s.graph = InteractionGraph(n);
    for (const auto& p : j.at("conflict_pairs")) {
      const auto i = p.at(0).get<std::size_t>();
      const auto k = p.at(1).get<std::size_t>();
      if (i >= n || k >= n || i == k) throw ConfigError("scenario JSON: bad conflict pair");
      s.graph.set_symmetric(i, k, -1.0);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario JSON: ") + e.what());
  }
}

}  // namespace rolesim
