#include "ddbh/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace ddbh::io {

const char* version_string() { return "ddbh 0.1.0"; }

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return nlohmann::json::parse(in);
}

void save_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(1) << "\n";
}

nlohmann::json params_to_json(const ModelParams& p) {
  return {{"n_sites", p.n_sites},
          {"j", p.hopping},
          {"u", p.interaction},
          {"a", p.drive},
          {"gamma", p.loss},
          {"delta_omega", p.detuning},
          {"detuning_schedule", p.detuning_schedule},
          {"boundary", to_string(p.boundary)}};
}

namespace {

nlohmann::json matrix_to_json(const MatrixXcd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (long r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (long c = 0; c < m.cols(); ++c)
      row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXcd matrix_from_json(const nlohmann::json& j) {
  const long rows = static_cast<long>(j.size());
  const long cols = rows ? static_cast<long>(j[0].size()) : 0;
  MatrixXcd m(rows, cols);
  for (long r = 0; r < rows; ++r)
    for (long c = 0; c < cols; ++c)
      m(r, c) = cplx(j[r][c][0].get<double>(), j[r][c][1].get<double>());
  return m;
}

nlohmann::json vector_to_json(const VectorXcd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (long i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

VectorXcd vector_from_json(const nlohmann::json& j) {
  VectorXcd v(static_cast<long>(j.size()));
  for (long i = 0; i < v.size(); ++i)
    v(i) = cplx(j[i][0].get<double>(), j[i][1].get<double>());
  return v;
}

}  // namespace

nlohmann::json correlation_state_to_json(const CorrelationState& s) {
  return {{"n_sites", s.n_sites()},
          {"first", vector_to_json(s.first)},
          {"normal", matrix_to_json(s.normal)},
          {"anomalous", matrix_to_json(s.anomalous)}};
}

CorrelationState correlation_state_from_json(const nlohmann::json& j) {
  CorrelationState s;
  s.first = vector_from_json(j.at("first"));
  s.normal = matrix_from_json(j.at("normal"));
  s.anomalous = matrix_from_json(j.at("anomalous"));
  if (s.normal.rows() != s.n_sites() || s.anomalous.rows() != s.n_sites())
    throw std::runtime_error("inconsistent snapshot dimensions");
  return s;
}

nlohmann::json gutzwiller_state_to_json(const GutzwillerState& s) {
  nlohmann::json sites = nlohmann::json::array();
  for (const auto& rho : s.rhos) sites.push_back(matrix_to_json(rho));
  return {{"n_sites", s.n_sites()}, {"n_max", s.n_max}, {"rhos", sites}};
}

GutzwillerState gutzwiller_state_from_json(const nlohmann::json& j) {
  GutzwillerState s;
  s.n_max = j.at("n_max").get<int>();
  for (const auto& item : j.at("rhos")) s.rhos.push_back(matrix_from_json(item));
  return s;
}

void write_field_trajectory_csv(const std::string& path,
                                const Trajectory& traj) {
  std::ostringstream out;
  out << "t,site,re_phi,im_phi\n";
  for (size_t i = 0; i < traj.times.size(); ++i)
    for (long n = 0; n < traj.profiles[i].size(); ++n)
      out << format_double(traj.times[i]) << ',' << n << ','
          << format_double(traj.profiles[i](n).real()) << ','
          << format_double(traj.profiles[i](n).imag()) << '\n';
  save_text(path, out.str());
}

void write_moment_trajectory_csv(const std::string& path,
                                 const Trajectory& traj) {
  std::ostringstream out;
  out << "t,site,re_a,im_a,occupation\n";
  for (size_t i = 0; i < traj.times.size(); ++i)
    for (long n = 0; n < traj.profiles[i].size(); ++n)
      out << format_double(traj.times[i]) << ',' << n << ','
          << format_double(traj.profiles[i](n).real()) << ','
          << format_double(traj.profiles[i](n).imag()) << ','
          << format_double(traj.occupations[i](n)) << '\n';
  save_text(path, out.str());
}

void write_gutzwiller_trajectory_csv(const std::string& path,
                                     const gutzwiller::Trajectory& traj) {
  std::ostringstream out;
  out << "t,site,occupation,re_a,im_a,top_population\n";
  for (size_t i = 0; i < traj.times.size(); ++i)
    for (long n = 0; n < traj.occupations[i].size(); ++n)
      out << format_double(traj.times[i]) << ',' << n << ','
          << format_double(traj.occupations[i](n)) << ','
          << format_double(traj.means[i](n).real()) << ','
          << format_double(traj.means[i](n).imag()) << ','
          << format_double(traj.top_populations[i]) << '\n';
  save_text(path, out.str());
}

void write_branch_csv(const std::string& path,
                      const dnls::StationaryBranch& branch) {
  std::ostringstream out;
  out << "j";
  if (!branch.points.empty())
    for (long n = 0; n < branch.points.front().field.size(); ++n)
      out << ",amp_" << n;
  out << ",stable,residual\n";
  for (const auto& pt : branch.points) {
    out << format_double(pt.j);
    for (long n = 0; n < pt.field.size(); ++n)
      out << ',' << format_double(std::abs(pt.field(n)));
    out << ',' << (pt.stable ? 1 : 0) << ',' << format_double(pt.residual)
        << '\n';
  }
  save_text(path, out.str());
}

void write_complex_matrix_csv(const std::string& path, const MatrixXcd& m,
                              const std::string& row_label) {
  std::ostringstream out;
  out << row_label;
  for (long c = 0; c < m.cols(); ++c) out << ",re_" << c << ",im_" << c;
  out << '\n';
  for (long r = 0; r < m.rows(); ++r) {
    out << r;
    for (long c = 0; c < m.cols(); ++c)
      out << ',' << format_double(m(r, c).real()) << ','
          << format_double(m(r, c).imag());
    out << '\n';
  }
  save_text(path, out.str());
}

}  // namespace ddbh::io
