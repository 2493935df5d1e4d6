#include "ddbh/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ddbh {

Boundary boundary_from_string(const std::string& s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "open") return Boundary::open;
  throw ConfigError("unknown boundary '" + s + "' (expected periodic|open)");
}

Tier tier_from_string(const std::string& s) {
  if (s == "dnls") return Tier::dnls;
  if (s == "soe") return Tier::soe;
  if (s == "gutzwiller") return Tier::gutzwiller;
  throw ConfigError("unknown tier '" + s + "' (expected dnls|soe|gutzwiller)");
}

const char* to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "open";
}

const char* to_string(Tier t) {
  switch (t) {
    case Tier::dnls: return "dnls";
    case Tier::soe: return "soe";
    default: return "gutzwiller";
  }
}

void ModelParams::validate() const {
  if (n_sites < 1) throw std::invalid_argument("n_sites must be >= 1");
  if (hopping < 0) throw std::invalid_argument("hopping J must be >= 0");
  if (drive < 0) throw std::invalid_argument("drive A must be >= 0");
  if (loss < 0) throw std::invalid_argument("loss gamma must be >= 0");
  if (!std::isfinite(hopping) || !std::isfinite(interaction) ||
      !std::isfinite(drive) || !std::isfinite(detuning) || !std::isfinite(loss))
    throw std::invalid_argument("model parameters must be finite");
  if (detuning_schedule && detuning != schedule_detuning(hopping))
    throw std::invalid_argument("scheduled detuning must equal 3 + 2 J");
}

ModelParams ModelParams::at_hopping(double j) const {
  ModelParams out = *this;
  out.hopping = j;
  if (out.detuning_schedule) out.detuning = schedule_detuning(j);
  out.validate();
  return out;
}

ModelParams ModelParams::single_site() const {
  ModelParams out = *this;
  out.n_sites = 1;
  out.hopping = 0.0;
  if (out.detuning_schedule) out.detuning = schedule_detuning(0.0);
  return out;
}

ModelParams star_params(int n_sites, double hopping) {
  ModelParams p;
  p.n_sites = n_sites;
  p.hopping = hopping;
  p.interaction = -1.0;
  p.drive = 2.0;
  p.loss = 2.0;
  p.detuning_schedule = true;
  p.detuning = schedule_detuning(hopping);
  p.validate();
  return p;
}

SiteNeighbors neighbors(int site, const ModelParams& p) {
  if (site < 0 || site >= p.n_sites)
    throw std::out_of_range("site index out of range");
  SiteNeighbors nb;
  if (p.boundary == Boundary::periodic) {
    nb.left = (site + p.n_sites - 1) % p.n_sites;
    nb.right = (site + 1) % p.n_sites;
  } else {
    if (site > 0) nb.left = site - 1;
    if (site + 1 < p.n_sites) nb.right = site + 1;
  }
  return nb;
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("non-numeric value '" + value + "' for key '" + key + "'");
  }
}

bool parse_switch(const std::string& key, const std::string& value) {
  if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
  if (value == "off" || value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean '" + value + "' for key '" + key + "'");
}

}  // namespace

ModelParams build_params(const std::map<std::string, std::string>& config) {
  ModelParams p;
  auto get = [&](const char* key) -> const std::string& {
    auto it = config.find(key);
    if (it == config.end()) throw ConfigError(std::string("missing config key '") + key + "'");
    return it->second;
  };

  p.n_sites = static_cast<int>(parse_number("n_sites", get("n_sites")));
  p.hopping = parse_number("j", get("j"));
  p.interaction = parse_number("u", get("u"));
  p.drive = parse_number("a", get("a"));
  p.loss = parse_number("gamma", get("gamma"));

  if (auto it = config.find("detuning_schedule"); it != config.end())
    p.detuning_schedule = parse_switch("detuning_schedule", it->second);

  if (p.detuning_schedule) {
    p.detuning = schedule_detuning(p.hopping);
  } else {
    p.detuning = parse_number("delta_omega", get("delta_omega"));
  }

  if (auto it = config.find("boundary"); it != config.end())
    p.boundary = boundary_from_string(it->second);

  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(lineno) + " has empty key or value");
    out[key] = value;
  }
  return out;
}

void check_field(const ClassicalField& field, const ModelParams& p) {
  if (field.size() != p.n_sites)
    throw std::invalid_argument("field length does not match n_sites");
  if (!field.allFinite())
    throw std::invalid_argument("field has non-finite entries");
}

CorrelationState CorrelationState::zero(int n) {
  CorrelationState s;
  s.first = VectorXcd::Zero(n);
  s.normal = MatrixXcd::Zero(n, n);
  s.anomalous = MatrixXcd::Zero(n, n);
  return s;
}

CorrelationState CorrelationState::factorized(const VectorXcd& phi) {
  const int n = static_cast<int>(phi.size());
  CorrelationState s = zero(n);
  s.first = phi;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      s.normal(r, c) = std::conj(phi(r)) * phi(c);
      s.anomalous(r, c) = phi(r) * phi(c);
    }
  return s;
}

VectorXcd CorrelationState::pack() const {
  const int n = n_sites();
  VectorXcd v(packed_size(n));
  v.head(n) = first;
  int idx = n;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r <= c; ++r) v(idx++) = normal(r, c);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r <= c; ++r) v(idx++) = anomalous(r, c);
  return v;
}

CorrelationState CorrelationState::unpack(const VectorXcd& v, int n) {
  if (v.size() != packed_size(n))
    throw std::invalid_argument("packed state has wrong length");
  CorrelationState s = zero(n);
  s.first = v.head(n);
  int idx = n;
  for (int c = 0; c < n; ++c)
    for (int r = 0; r <= c; ++r) {
      s.normal(r, c) = v(idx);
      if (r != c) s.normal(c, r) = std::conj(v(idx));
      ++idx;
    }
  for (int c = 0; c < n; ++c)
    for (int r = 0; r <= c; ++r) {
      s.anomalous(r, c) = v(idx);
      s.anomalous(c, r) = v(idx);
      ++idx;
    }
  return s;
}

double CorrelationState::hermiticity_defect() const {
  return (normal - normal.adjoint()).cwiseAbs().maxCoeff();
}

double CorrelationState::symmetry_defect() const {
  return (anomalous - anomalous.transpose()).cwiseAbs().maxCoeff();
}

double CorrelationState::min_occupation() const {
  return normal.diagonal().real().minCoeff();
}

GutzwillerState GutzwillerState::uniform(const MatrixXcd& rho, int n_sites, int n_max) {
  if (rho.rows() != n_max + 1 || rho.cols() != n_max + 1)
    throw std::invalid_argument("density matrix dimension does not match n_max");
  GutzwillerState s;
  s.n_max = n_max;
  s.rhos.assign(n_sites, rho);
  return s;
}

VectorXcd GutzwillerState::pack() const {
  const int d = dim();
  VectorXcd v(static_cast<long>(n_sites()) * d * d);
  for (int n = 0; n < n_sites(); ++n)
    Eigen::Map<MatrixXcd>(v.data() + static_cast<long>(n) * d * d, d, d) = rhos[n];
  return v;
}

GutzwillerState GutzwillerState::unpack(const VectorXcd& v, int n_sites, int n_max) {
  const int d = n_max + 1;
  if (v.size() != static_cast<long>(n_sites) * d * d)
    throw std::invalid_argument("packed state has wrong length");
  GutzwillerState s;
  s.n_max = n_max;
  s.rhos.resize(n_sites);
  for (int n = 0; n < n_sites; ++n)
    s.rhos[n] = Eigen::Map<const MatrixXcd>(v.data() + static_cast<long>(n) * d * d, d, d);
  return s;
}

double GutzwillerState::max_trace_defect() const {
  double worst = 0;
  for (const auto& rho : rhos) worst = std::max(worst, std::abs(rho.trace() - cplx(1, 0)));
  return worst;
}

double GutzwillerState::max_hermiticity_defect() const {
  double worst = 0;
  for (const auto& rho : rhos)
    worst = std::max(worst, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
  return worst;
}

double GutzwillerState::top_level_population() const {
  double worst = 0;
  for (const auto& rho : rhos) worst = std::max(worst, rho(n_max, n_max).real());
  return worst;
}

void GutzwillerState::symmetrize() {
  for (auto& rho : rhos) rho = 0.5 * (rho + rho.adjoint()).eval();
}

}  // namespace ddbh
