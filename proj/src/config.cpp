#include "lab/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace lab {

using nlohmann::json;

namespace {
std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

const std::map<std::string, std::vector<std::string>> kKnownKeys = {
    {"system", {"system", "q", "d", "shifts", "weights"}},
    {"observables", {"f0", "f1", "f2", "f", "chi", "A"}},
    {"run",
     {"seq", "Ns", "N", "eps", "eps_grid", "beta", "alpha", "p", "kmax", "ks", "v1", "v2",
      "dirs", "F", "words", "windows", "tolerance", "out"}},
};
}  // namespace

ConfigFile ConfigFile::parse_text(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = strip(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ValidationError("config line " + std::to_string(lineno) + ": malformed section");
      section = strip(s.substr(1, s.size() - 2));
      cfg.sections.try_emplace(section);
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    Entry e;
    e.key = strip(s.substr(0, eq));
    e.value = strip(s.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty())
      throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    cfg.sections[section].push_back(std::move(e));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

std::optional<std::string> ConfigFile::find(const std::string& section,
                                            const std::string& key) const {
  auto it = sections.find(section);
  if (it == sections.end()) return std::nullopt;
  for (const auto& e : it->second)
    if (e.key == key) return e.value;
  return std::nullopt;
}

std::string ConfigFile::require(const std::string& section, const std::string& key) const {
  auto v = find(section, key);
  if (!v)
    throw ValidationError("config: missing required key '" + key + "' in section [" + section +
                          "]");
  return *v;
}

std::string fnv1a_hex(const std::string& data) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

std::string ConfigFile::digest() const {
  // canonical form: sorted "section.key=value" with whitespace removed
  std::vector<std::string> lines;
  for (const auto& [section, entries] : sections) {
    for (const auto& e : entries) {
      std::string v;
      for (char c : e.value)
        if (!isspace(static_cast<unsigned char>(c))) v.push_back(c);
      lines.push_back(section + "." + e.key + "=" + v);
    }
  }
  std::sort(lines.begin(), lines.end());
  std::string joined;
  for (const auto& l : lines) {
    joined += l;
    joined += '\n';
  }
  return fnv1a_hex(joined);
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.raw = ConfigFile::parse_text(text);
  for (const auto& [section, entries] : cfg.raw.sections) {
    auto it = kKnownKeys.find(section);
    if (it == kKnownKeys.end()) throw ValidationError("config: unknown section [" + section + "]");
    for (const auto& e : entries) {
      if (std::find(it->second.begin(), it->second.end(), e.key) == it->second.end())
        throw ValidationError("config line " + std::to_string(e.line) + ": unknown key '" +
                              e.key + "' in section [" + section + "]");
    }
  }
  // early validation of parseable specs and positivity of tolerances
  if (auto seq = cfg.raw.find("run", "seq")) SequenceSpec::parse(*seq);
  if (auto eps = cfg.raw.find("run", "eps")) {
    if (std::stod(*eps) <= 0) throw ValidationError("config: eps must be positive");
  }
  if (auto tol = cfg.raw.find("run", "tolerance")) {
    if (std::stod(*tol) <= 0) throw ValidationError("config: tolerance must be positive");
  }
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

FiniteSystem ExperimentConfig::build_system() const {
  std::string kind = raw.require("system", "system");
  if (kind != "product_rotation")
    throw ValidationError("config: unsupported system '" + kind + "'");
  int q = std::stoi(raw.require("system", "q"));
  int d = std::stoi(raw.require("system", "d"));
  json sh = json::parse(raw.require("system", "shifts"));
  std::vector<std::vector<long long>> shifts;
  for (const auto& row : sh) {
    std::vector<long long> v;
    for (const auto& x : row) v.push_back(x.get<long long>());
    shifts.push_back(std::move(v));
  }
  return make_product_rotation(q, d, shifts);
}

namespace {
std::map<std::string, std::string> parse_kv(const std::string& text, size_t from) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text.substr(from));
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}
}  // namespace

Observable ExperimentConfig::build_observable(const std::string& key, const FiniteSystem& sys,
                                              uint64_t seed) const {
  std::string spec = raw.require("observables", key);
  std::istringstream in(spec);
  std::string kind;
  in >> kind;
  if (kind == "char") {
    int q = std::stoi(raw.require("system", "q"));
    int d = std::stoi(raw.require("system", "d"));
    std::vector<long long> freqs;
    long long k;
    while (in >> k) freqs.push_back(k);
    return character_observable(q, d, freqs);
  }
  if (kind == "const") {
    double re = 1, im = 0;
    in >> re >> im;
    return Observable::constant(sys.m, {re, im});
  }
  if (kind == "indicator") {
    std::string rest;
    std::getline(in, rest);
    rest = strip(rest);
    if (rest.rfind("density=", 0) == 0) {
      auto kv = parse_kv(spec, spec.find(' '));
      double density = std::stod(kv.at("density"));
      uint64_t sd = kv.count("seed") ? std::stoull(kv.at("seed")) : seed;
      Rng rng(sd, 0x696e6469);
      std::vector<int> pts;
      for (int x = 0; x < sys.m; ++x)
        if (rng.next_unit() < density) pts.push_back(x);
      return Observable::indicator(sys.m, pts);
    }
    std::vector<int> pts;
    std::string tok;
    std::istringstream items(rest);
    while (std::getline(items, tok, ',')) pts.push_back(std::stoi(strip(tok)));
    return Observable::indicator(sys.m, pts);
  }
  if (kind == "random-unimodular" || kind == "random-pm1") {
    auto kv = parse_kv(spec, kind.size());
    uint64_t sd = kv.count("seed") ? std::stoull(kv.at("seed")) : seed;
    Rng rng(sd, 0x6f627376);
    return kind == "random-unimodular" ? Observable::random_unimodular(sys.m, rng)
                                       : Observable::random_pm1(sys.m, rng);
  }
  throw ValidationError("config: unknown observable kind '" + kind + "' for " + key);
}

std::vector<uint8_t> ExperimentConfig::build_subset(const std::string& key, int m,
                                                    uint64_t seed) const {
  Observable f = build_observable(key, FiniteSystem{m, std::vector<double>(m, 1.0 / m), {}},
                                  seed);
  std::vector<uint8_t> A(m, 0);
  for (int x = 0; x < m; ++x) A[x] = std::abs(f.values[x]) > 0.5 ? 1 : 0;
  return A;
}

std::string RunManifest::core_digest() const {
  return fnv1a_hex(command_line + "\n" + config_digest + "\n" + std::to_string(seed) + "\n" +
                   version);
}

std::string RunManifest::to_json_string() const {
  json j;
  j["command_line"] = command_line;
  j["config_digest"] = config_digest;
  j["seed"] = seed;
  j["version"] = version;
  j["wall_ms"] = wall_ms;
  json t = json::object();
  for (const auto& [k, v] : timings) t[k] = v;
  j["timings"] = t;
  j["core_digest"] = core_digest();
  return j.dump();
}

std::string grid_to_json(const GridFunction& f) {
  json j;
  j["ell"] = f.ell;
  j["N"] = f.N;
  json vals = json::array();
  for (const auto& z : f.values) vals.push_back(json::array({z.real(), z.imag()}));
  j["values"] = vals;
  return j.dump();
}

GridFunction grid_from_json(const std::string& text) {
  json j = json::parse(text);
  GridFunction f = GridFunction::zeros(j.at("ell").get<int>(), j.at("N").get<int>());
  const auto& vals = j.at("values");
  if (vals.size() != f.size())
    throw ValidationError("grid json: expected " + std::to_string(f.size()) + " values, got " +
                          std::to_string(vals.size()));
  for (size_t i = 0; i < f.size(); ++i)
    f.values[i] = cplx(vals[i][0].get<double>(), vals[i][1].get<double>());
  f.refresh_sup();
  return f;
}

GridFunction grid_load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("grid: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return grid_from_json(buf.str());
}

std::string plane_to_json(const PlaneSet& L) {
  json j;
  j["q"] = L.q;
  json rows = json::array();
  for (int y = 0; y < L.q; ++y) {
    std::string row(L.q, '0');
    for (int x = 0; x < L.q; ++x)
      if (L.membership[x + L.q * y]) row[x] = '1';
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j.dump();
}

PlaneSet plane_from_json(const std::string& text) {
  json j = json::parse(text);
  PlaneSet L = PlaneSet::empty(j.at("q").get<int>());
  const auto& rows = j.at("rows");
  if (static_cast<int>(rows.size()) != L.q)
    throw ValidationError("plane json: row count mismatch");
  for (int y = 0; y < L.q; ++y) {
    std::string row = rows[y].get<std::string>();
    if (static_cast<int>(row.size()) != L.q)
      throw ValidationError("plane json: row length mismatch");
    for (int x = 0; x < L.q; ++x) L.membership[x + L.q * y] = row[x] == '1' ? 1 : 0;
  }
  return L;
}

PlaneSet plane_load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("plane set: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return plane_from_json(buf.str());
}

std::vector<uint64_t> parse_u64_list(const std::string& text) {
  std::vector<uint64_t> out;
  std::string tok;
  std::istringstream in(text);
  while (std::getline(in, tok, ',')) {
    tok = strip(tok);
    if (!tok.empty()) out.push_back(std::stoull(tok));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::string tok;
  std::istringstream in(text);
  while (std::getline(in, tok, ',')) {
    tok = strip(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

}  // namespace lab
