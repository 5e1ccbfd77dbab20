#include "mfsmd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mfsmd/errors.hpp"

namespace mfsmd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(out))
    throw ConfigError("config: " + key + " expects a real number, got '" + v + "'");
  return out;
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end)
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  return out;
}

}  // namespace

Config Config::defaults() {
  Config c;
  c.values_ = {
      {"data.radius", "1.0"},
      {"data.s", "0.1"},
      {"data.seed", "1"},
      {"data.file", ""},
      {"model.activation", "erf"},
      {"model.loss", "squared"},
      {"potential.kind", "pnorm"},
      {"potential.p", "1.5"},
      {"potential.eps", "1e-6"},
      {"init.std", "1.0"},
      {"train.n", "200"},
      {"train.tau", "0.5"},
      {"train.delta", "2"},
      {"train.stride", "20"},
      {"train.seed", "1"},
      {"flow.m", "1000"},
      {"flow.dt", "0.01"},
      {"flow.t_end", "4"},
      {"flow.domain", "dual"},
      {"flow.stride", "10"},
      {"flow.seed", "1"},
      {"velocity.mode", "closed"},
      {"velocity.batch", "1000"},
      {"velocity.gh_order", "32"},
      {"velocity.seed", "1"},
      {"converge.ladder", "50,200,800"},
      {"converge.seeds", "10"},
      {"converge.ref_m", "4000"},
      {"converge.ref_dt", "0.0025"},
      {"converge.init", "fresh"},
      {"reproduce.m", "1000"},
      {"reproduce.dt", "0.01"},
      {"reproduce.t_end", "4"},
      {"reproduce.p", "1.5"},
      {"reproduce.threshold", "0.05"},
      {"reproduce.times", "0,2,4"},
      {"verify.tolerance_scale", "1"},
      {"output.dir", "out"},
  };
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: unknown key '" + key + "'");
  it->second = value;
}

void Config::merge_text(const std::string& text, const std::string& origin) {
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    try {
      set(key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void Config::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  merge_text(buf.str(), path.string());
}

void Config::apply_overrides(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) throw ConfigError("config: unexpected argument '" + a + "'");
    const std::string body = a.substr(2);
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
      set(body.substr(0, eq), body.substr(eq + 1));
    } else {
      if (i + 1 >= args.size()) throw ConfigError("config: missing value for '" + a + "'");
      set(body, args[++i]);
    }
  }
}

const std::string& Config::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("config: unknown key '" + key + "'");
  return it->second;
}

double Config::real(const std::string& key) const { return parse_real(key, text(key)); }

std::int64_t Config::integer(const std::string& key) const {
  return parse_int(key, text(key));
}

std::size_t Config::count(const std::string& key) const {
  const auto v = integer(key);
  if (v < 0) throw ConfigError("config: " + key + " must be >= 0");
  return static_cast<std::size_t>(v);
}

std::uint64_t Config::seed(const std::string& key) const {
  return static_cast<std::uint64_t>(count(key));
}

std::vector<double> Config::real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(text(key))) out.push_back(parse_real(key, item));
  if (out.empty()) throw ConfigError("config: " + key + " must list at least one value");
  return out;
}

std::vector<std::size_t> Config::count_list(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text(key))) {
    const auto v = parse_int(key, item);
    if (v < 1) throw ConfigError("config: " + key + " entries must be >= 1");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw ConfigError("config: " + key + " must list at least one value");
  return out;
}

const std::string& Config::choice(const std::string& key,
                                  const std::vector<std::string>& choices) const {
  const std::string& v = text(key);
  for (const auto& c : choices)
    if (v == c) return v;
  std::string allowed;
  for (const auto& c : choices) allowed += (allowed.empty() ? "" : "|") + c;
  throw ConfigError("config: " + key + " must be one of " + allowed + ", got '" + v + "'");
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace mfsmd
