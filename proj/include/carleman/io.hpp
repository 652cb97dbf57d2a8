#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "carleman/assembly.hpp"
#include "carleman/integrate.hpp"
#include "carleman/metrics.hpp"
#include "carleman/operator.hpp"

namespace carleman::io {

using json = nlohmann::json;

// Shortest decimal that round-trips; identical inputs give identical text.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << content;
}

// { "n": int, "P": int, "terms": [{"row": int, "exponents": [int], "coeff": float}] }
inline PolynomialOperator system_from_json(const json& j) {
  try {
    const auto n = j.at("n").get<std::size_t>();
    const auto degree = j.at("P").get<unsigned>();
    std::vector<PolynomialTerm> terms;
    for (const auto& t : j.at("terms")) {
      terms.push_back({t.at("row").get<std::size_t>(),
                       ExponentVector(t.at("exponents").get<std::vector<unsigned>>()),
                       t.at("coeff").get<double>()});
    }
    return PolynomialOperator::from_terms(n, degree, terms);
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed system definition: ") + e.what());
  }
}

inline json system_to_json(const PolynomialOperator& op) {
  json terms = json::array();
  for (const auto& t : op.terms())
    terms.push_back({{"row", t.row}, {"exponents", t.exponent.values()}, {"coeff", t.coeff}});
  return {{"n", op.dimension()}, {"P", op.degree()}, {"terms", terms}};
}

inline PolynomialOperator load_system(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
  return system_from_json(j);
}

// Header t,x1,...,xn then one row per sample.
inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t";
  for (std::size_t j = 0; j < traj.dimension(); ++j) out += ",x" + std::to_string(j + 1);
  out += '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out += format_double(traj.times[k]);
    for (double v : traj.states[k]) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

// Keeps every stride-th sample plus the last so at most max_samples remain.
inline Trajectory thin(const Trajectory& traj, std::size_t max_samples) {
  if (traj.size() <= max_samples || max_samples < 2) return traj;
  const std::size_t stride = (traj.size() - 1 + (max_samples - 2)) / (max_samples - 1);
  Trajectory out;
  out.meta = traj.meta;
  for (std::size_t k = 0; k < traj.size(); k += stride) {
    out.times.push_back(traj.times[k]);
    out.states.push_back(traj.states[k]);
  }
  if (out.times.back() != traj.times.back()) {
    out.times.push_back(traj.times.back());
    out.states.push_back(traj.states.back());
  }
  return out;
}

inline std::string matrix_market(const CsrMatrix& m) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(m.rows()) + ' ' + std::to_string(m.cols()) + ' ' + std::to_string(m.nnz()) + '\n';
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t k = m.row_ptr()[r]; k < m.row_ptr()[r + 1]; ++k)
      out += std::to_string(r + 1) + ' ' + std::to_string(m.col_idx()[k] + 1) + ' ' +
             format_double(m.values()[k]) + '\n';
  return out;
}

inline CsrMatrix read_matrix_market(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line.rfind("%%MatrixMarket matrix coordinate real general", 0) != 0)
    throw UsageError("unsupported MatrixMarket header: " + line);
  while (std::getline(in, line) && !line.empty() && line[0] == '%') {}
  std::size_t rows = 0, cols = 0, nnz = 0;
  std::istringstream(line) >> rows >> cols >> nnz;
  std::vector<Triplet> t;
  t.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    std::size_t r, c;
    double v;
    if (!(in >> r >> c >> v) || r < 1 || c < 1) throw UsageError("truncated MatrixMarket body");
    t.push_back({r - 1, c - 1, v});
  }
  return CsrMatrix::from_triplets(rows, cols, std::move(t));
}

// One value per line.
inline std::string vector_csv(std::span<const double> v) {
  std::string out;
  for (double x : v) out += format_double(x) + '\n';
  return out;
}

inline json stats_json(const AssemblyStats& s) {
  return {{"t_shift", s.t_shift}, {"t_lift", s.t_lift}, {"u_ours", s.u_ours}, {"dropped", s.dropped}};
}

inline json report_json(const ErrorReport& r) {
  return {{"dt", r.dt},
          {"n_steps", r.n_steps},
          {"max_error", r.max_error},
          {"frob_error", r.frob_error},
          {"per_state_max", r.per_state_max}};
}

inline ErrorReport report_from_json(const json& j) {
  ErrorReport r;
  r.dt = j.at("dt").get<double>();
  r.n_steps = j.at("n_steps").get<std::size_t>();
  r.max_error = j.at("max_error").get<double>();
  r.frob_error = j.at("frob_error").get<double>();
  r.per_state_max = j.at("per_state_max").get<Vector>();
  return r;
}

// "0.1,0.2" -> {0.1, 0.2}
inline Vector parse_vector(const std::string& text) {
  Vector out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError("not a number: '" + item + "'");
    }
  }
  return out;
}

}  // namespace carleman::io
