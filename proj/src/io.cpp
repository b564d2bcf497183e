#include "rolesim/io.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rolesim/errors.hpp"

namespace rolesim {

namespace {

double parse_number(std::string_view text, std::string_view context) {
  std::string s(text);
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) throw ConfigError(fmt::format("empty number in '{}'", context));
  s = s.substr(b, e - b + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("'{}' is not a number (in '{}')", s, context));
  }
  if (used != s.size() || !std::isfinite(v))
    throw ConfigError(fmt::format("'{}' is not a number (in '{}')", s, context));
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

// Snap to 12 decimals so 0.1 * 3 prints as 0.3.
double tidy(double x) { return std::round(x * 1e12) / 1e12; }

}  // namespace

std::vector<double> parse_grid(std::string_view spec) {
  if (spec.empty()) throw ConfigError("empty grid specification");
  if (spec.find(':') == std::string_view::npos) {
    std::vector<double> out;
    for (auto part : split(spec, ',')) out.push_back(parse_number(part, spec));
    return out;
  }
  const auto parts = split(spec, ':');
  if (parts.size() != 3)
    throw ConfigError(fmt::format("grid '{}' must look like start:stop:step", spec));
  const double start = parse_number(parts[0], spec);
  const double stop = parse_number(parts[1], spec);
  if (stop < start) throw ConfigError(fmt::format("grid '{}' has stop < start", spec));

  if (parts[2].substr(0, 3) == "log") {
    const std::string_view count_text = parts[2].substr(3);
    int count = 0;
    const auto [ptr, ec] =
        std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc() || ptr != count_text.data() + count_text.size() || count < 2)
      throw ConfigError(fmt::format("grid '{}' needs logN with N >= 2", spec));
    if (!(start > 0.0)) throw ConfigError(fmt::format("log grid '{}' needs start > 0", spec));
    std::vector<double> out;
    const double ratio = std::log(stop / start);
    for (int i = 0; i < count; ++i)
      out.push_back(i == count - 1 ? stop : start * std::exp(ratio * i / (count - 1)));
    return out;
  }

  const double step = parse_number(parts[2], spec);
  if (!(step > 0.0)) throw ConfigError(fmt::format("grid '{}' needs a positive step", spec));
  const auto steps = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  if (steps > 1'000'000) throw ConfigError(fmt::format("grid '{}' is too large", spec));
  std::vector<double> out;
  for (std::size_t i = 0; i <= steps; ++i) out.push_back(tidy(start + static_cast<double>(i) * step));
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "";
  return fmt::format("{}", x);
}

std::string metrics_csv(const MetricsSeries& m, std::size_t ma_window) {
  const auto bid_ma = moving_average(m.bid_ratio, ma_window);
  const auto rebate_ma = moving_average(m.rebate_ratio, ma_window);
  std::string out =
      "round,bid_ratio,rebate_ratio,cov_rebate,cov_gamma1,cov_gamma2,searcher_reward,"
      "builder_reward,proposer_reward,winner,bid_ratio_ma,rebate_ratio_ma\n";
  for (std::size_t t = 0; t < m.size(); ++t) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", t, format_number(m.bid_ratio[t]),
                       format_number(m.rebate_ratio[t]), format_number(m.cov_rebate[t]),
                       format_number(m.cov_gamma1[t]), format_number(m.cov_gamma2[t]),
                       format_number(m.searcher_reward[t]), format_number(m.builder_reward[t]),
                       format_number(m.proposer_reward[t]),
                       m.winner[t] < 0 ? std::string() : std::to_string(m.winner[t]),
                       format_number(bid_ma[t]), format_number(rebate_ma[t]));
  }
  return out;
}

std::string rounds_csv(const std::vector<RoundRecord>& records, std::size_t n_builders) {
  std::string out =
      "round,agent,role,strategy,rebate,gamma1,gamma2,mean_bid_ratio,included,winner,payment,"
      "payoff\n";
  for (const auto& r : records) {
    const std::string winner = r.winner ? std::to_string(*r.winner) : std::string();
    for (std::size_t a = 0; a < r.payoffs.size(); ++a) {
      const bool builder = a < n_builders;
      const bool included =
          std::find(r.included.begin(), r.included.end(), a) != r.included.end();
      std::string rebate, g1, g2, mean_bid;
      if (builder) {
        rebate = format_number(r.actions.rebates[a]);
      } else {
        const auto& p = r.actions.searcher_params[a - n_builders];
        g1 = format_number(p.gamma1);
        g2 = format_number(p.gamma2);
        const auto& row = r.bid_ratios[a - n_builders];
        double sum = 0.0;
        for (double b : row) sum += b;
        mean_bid = row.empty() ? std::string() : format_number(sum / static_cast<double>(row.size()));
      }
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.round, a,
                         builder ? "builder" : "searcher", r.strategies[a].to_string(), rebate, g1,
                         g2, mean_bid, included ? 1 : 0, winner, format_number(r.payment),
                         format_number(r.payoffs[a]));
    }
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "p_C,repetition,metric,value\n";
  for (const auto& row : rows)
    for (const auto& metric : kSweepMetrics)
      out += fmt::format("{},{},{},{}\n", format_number(row.conflict_probability), row.repetition,
                         metric, format_number(sweep_metric(row, metric)));
  return out;
}

std::string hpt_csv(const std::vector<HeuristicPayoffTable>& tables) {
  std::string out = "p_C,N1,N2,U1,U2,samples\n";
  auto opt = [](const std::optional<double>& u) { return u ? format_number(*u) : std::string(); };
  for (const auto& t : tables)
    for (const auto& r : t.rows)
      out += fmt::format("{},{},{},{},{},{}\n", format_number(t.conflict_probability),
                         r.n_building, r.n_sharing, opt(r.u_building), opt(r.u_sharing),
                         r.samples);
  return out;
}

std::vector<HeuristicPayoffTable> parse_hpt_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<HeuristicPayoffTable> tables;
  auto fail = [&](const std::string& why) {
    throw ConfigError(fmt::format("hpt line {}: {}", line_no, why));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line.rfind("p_C,N1,N2,U1,U2", 0) != 0) fail("expected header p_C,N1,N2,U1,U2,samples");
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() < 5 || cells.size() > 6) fail("expected 5 or 6 columns");
    const double p = parse_number(cells[0], line);
    HptRow row;
    const double n1 = parse_number(cells[1], line);
    const double n2 = parse_number(cells[2], line);
    if (n1 < 0 || n2 < 0 || n1 != std::floor(n1) || n2 != std::floor(n2))
      fail("N1 and N2 must be non-negative integers");
    row.n_building = static_cast<std::size_t>(n1);
    row.n_sharing = static_cast<std::size_t>(n2);
    if (!cells[3].empty()) row.u_building = parse_number(cells[3], line);
    if (!cells[4].empty()) row.u_sharing = parse_number(cells[4], line);
    row.samples = cells.size() == 6 && !cells[5].empty()
                      ? static_cast<std::size_t>(parse_number(cells[5], line))
                      : 1;
    if (tables.empty() || tables.back().conflict_probability != p) {
      tables.push_back({});
      tables.back().conflict_probability = p;
      tables.back().m = row.n_building + row.n_sharing;
    }
    if (row.n_building + row.n_sharing != tables.back().m)
      fail("N1 + N2 differs from the other rows of this p_C");
    tables.back().rows.push_back(row);
  }
  if (tables.empty()) throw ConfigError("hpt file has no rows");
  return tables;
}

std::string alpharank_csv(const std::vector<AlphaRankRow>& rows) {
  std::string out = "p_C,alpha,nu_building,nu_sharing\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{}\n", format_number(r.conflict_probability),
                       format_number(r.result.alpha), format_number(r.result.stationary(kBuilding)),
                       format_number(r.result.stationary(kSharing)));
  return out;
}

std::string pools_json(const std::vector<PoolSnapshot>& snapshots) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& snap : snapshots) {
    nlohmann::json agents = nlohmann::json::array();
    for (std::size_t a = 0; a < snap.pools.size(); ++a) {
      nlohmann::json strategies = nlohmann::json::array();
      for (const auto& c : snap.pools[a].strategies)
        strategies.push_back({{"bits", c.to_string()}, {"fitness", c.fitness}});
      agents.push_back(
          {{"agent", a}, {"role", role_name(snap.roles[a])}, {"strategies", strategies}});
    }
    j.push_back({{"round", snap.round}, {"agents", agents}});
  }
  return j.dump(1);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? ": " + ec.message() : std::string()));
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 failed");
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_text_file(path));
}

RunManifest::RunManifest(std::string command, std::uint64_t seed, std::string config_json)
    : command_(std::move(command)), seed_(seed), config_json_(std::move(config_json)) {}

void RunManifest::write_output(const std::filesystem::path& dir, const std::string& name,
                               const std::string& content, const std::string& schema) {
  write_text_file(dir / name, content);
  outputs_[name] = {sha256_hex(content), schema};
}

void RunManifest::finish(const std::filesystem::path& dir, double seconds) const {
  nlohmann::json j;
  j["version"] = kVersion;
  j["command"] = command_;
  j["master_seed"] = seed_;
  j["config"] = nlohmann::json::parse(config_json_);
  auto& outputs = j["outputs"] = nlohmann::json::object();
  for (const auto& [name, entry] : outputs_)
    outputs[name] = {{"sha256", entry.first}, {"schema", entry.second}};
  j["wall_clock_seconds"] = seconds;
  write_text_file(dir / "manifest.json", j.dump(2) + "\n");
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  const auto j = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  std::vector<std::string> bad;
  for (const auto& [name, entry] : j.at("outputs").items()) {
    std::string actual;
    try {
      actual = sha256_file(dir / name);
    } catch (const IoError&) {
      bad.push_back(name);
      continue;
    }
    if (actual != entry.at("sha256").get<std::string>()) bad.push_back(name);
  }
  return bad;
}

}  // namespace rolesim
