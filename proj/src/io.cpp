#include "growup/io.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace growup {

LogLevel log_level() {
  const char* v = std::getenv("GROWUP_LOG");
  if (!v) return LogLevel::Info;
  std::string s(v);
  if (s == "quiet" || s == "0") return LogLevel::Quiet;
  if (s == "debug" || s == "2") return LogLevel::Debug;
  return LogLevel::Info;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::clog << msg << '\n';
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::Debug) std::clog << msg << '\n';
}

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

namespace {

cplx parse_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(where + ": expected a number or a [re, im] pair");
}

std::vector<double> parse_vector(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

SplitSystem parse_system(const json& j) {
  require_keys(j, {"n_plus", "a_plus", "minus_rates", "norm_choice"}, "system");
  for (const char* k : {"n_plus", "a_plus", "minus_rates"})
    if (!j.contains(k)) throw ConfigError(std::string("system: missing key '") + k + "'");
  const int np = j.at("n_plus").get<int>();
  if (np < 1 || np > kMaxPlus) throw ConfigError("system: n_plus out of range");
  const json& a = j.at("a_plus");
  if (!a.is_array() || static_cast<int>(a.size()) != np) throw ConfigError("system: a_plus must have n_plus rows");
  MatP m(np, np);
  for (int r = 0; r < np; ++r) {
    std::vector<double> row = parse_vector(a[r], "system.a_plus");
    if (static_cast<int>(row.size()) != np) throw ConfigError("system: a_plus must be square");
    for (int c = 0; c < np; ++c) m(r, c) = row[c];
  }
  const json& mr = j.at("minus_rates");
  if (!mr.is_array() || mr.empty() || static_cast<int>(mr.size()) > kMaxMinus)
    throw ConfigError("system: minus_rates must be a nonempty array");
  VecM rates(static_cast<Eigen::Index>(mr.size()));
  for (std::size_t i = 0; i < mr.size(); ++i) rates(i) = parse_complex(mr[i], "system.minus_rates");
  NormChoice norm = j.contains("norm_choice") ? parse_norm_choice(j.at("norm_choice").get<std::string>())
                                              : NormChoice::Euclidean;
  return SplitSystem::make(m, rates, norm);
}

json system_to_json(const SplitSystem& sys) {
  json a = json::array();
  for (int r = 0; r < sys.n_plus(); ++r) {
    json row = json::array();
    for (int c = 0; c < sys.n_plus(); ++c) row.push_back(sys.a_plus()(r, c));
    a.push_back(row);
  }
  json mr = json::array();
  for (int j = 0; j < sys.n_minus(); ++j)
    mr.push_back(json::array({sys.minus_rates()(j).real(), sys.minus_rates()(j).imag()}));
  return {{"n_plus", sys.n_plus()}, {"a_plus", a}, {"minus_rates", mr},
          {"norm_choice", to_string(sys.norm())}};
}

State parse_state(const json& j, int n_plus, int n_minus) {
  require_keys(j, {"p", "q"}, "state");
  State u = State::zero(n_plus, n_minus);
  if (j.contains("p")) {
    std::vector<double> p = parse_vector(j.at("p"), "state.p");
    if (static_cast<int>(p.size()) != n_plus) throw ConfigError("state: p has the wrong dimension");
    for (int i = 0; i < n_plus; ++i) u.p(i) = p[i];
  }
  if (j.contains("q")) {
    const json& q = j.at("q");
    if (!q.is_array() || static_cast<int>(q.size()) != n_minus)
      throw ConfigError("state: q has the wrong dimension");
    for (int i = 0; i < n_minus; ++i) u.q(i) = parse_complex(q[i], "state.q");
  }
  return u;
}

json state_to_json(const State& u) {
  json p = json::array(), q = json::array();
  for (int i = 0; i < u.n_plus(); ++i) p.push_back(u.p(i));
  for (int j = 0; j < u.n_minus(); ++j) q.push_back(json::array({u.q(j).real(), u.q(j).imag()}));
  return {{"p", p}, {"q", q}};
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  for (double v : values) cells.push_back(fmt(v));
  row(cells);
}

void CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw ConfigError("CsvTable: row width mismatch");
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
  lines_.push_back(std::move(line));
}

std::string CsvTable::str(bool reproducible) const {
  std::ostringstream os;
  if (!reproducible) {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << "# generated " << buf << '\n';
  }
  for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
  os << '\n';
  for (const auto& l : lines_) os << l << '\n';
  return os.str();
}

void CsvTable::save(const std::filesystem::path& path, bool reproducible) const {
  write_text(path, str(reproducible));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

namespace {

std::vector<std::string> q_columns(int n_minus, bool complex_q) {
  std::vector<std::string> h;
  for (int j = 1; j <= n_minus; ++j) h.push_back("q_" + std::to_string(j));
  if (complex_q)
    for (int j = 1; j <= n_minus; ++j) h.push_back("q_" + std::to_string(j) + "_im");
  return h;
}

void append_q(std::vector<double>& row, const VecM& q, bool complex_q) {
  for (Eigen::Index j = 0; j < q.size(); ++j) row.push_back(q(j).real());
  if (complex_q)
    for (Eigen::Index j = 0; j < q.size(); ++j) row.push_back(q(j).imag());
}

}  // namespace

void write_graph_csv(const std::filesystem::path& path, const GraphFn& g, bool complex_q,
                     bool reproducible) {
  std::vector<std::string> header;
  for (int i = 1; i <= g.n_plus(); ++i) header.push_back("p_" + std::to_string(i));
  for (auto& c : q_columns(g.n_minus(), complex_q)) header.push_back(c);
  CsvTable t(header);
  for (std::size_t k = 0; k < g.size(); ++k) {
    VecP p = g.node(k);
    std::vector<double> row(p.data(), p.data() + p.size());
    append_q(row, g.value(k), complex_q);
    t.row(row);
  }
  t.save(path, reproducible);
}

json graph_to_json(const GraphFn& g) {
  const GridSpec& s = g.spec();
  json lo = json::array(), hi = json::array(), values = json::array();
  for (int i = 0; i < s.dim(); ++i) {
    lo.push_back(s.lo(i));
    hi.push_back(s.hi(i));
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    json v = json::array();
    for (int j = 0; j < g.n_minus(); ++j)
      v.push_back(json::array({g.value(k)(j).real(), g.value(k)(j).imag()}));
    values.push_back(v);
  }
  return {{"lo", lo}, {"hi", hi}, {"counts", s.counts}, {"n_minus", g.n_minus()}, {"values", values}};
}

GraphFn graph_from_json(const json& j) {
  require_keys(j, {"lo", "hi", "counts", "n_minus", "values"}, "graph");
  GridSpec s;
  std::vector<double> lo = parse_vector(j.at("lo"), "graph.lo");
  std::vector<double> hi = parse_vector(j.at("hi"), "graph.hi");
  if (lo.size() != hi.size() || lo.empty() || static_cast<int>(lo.size()) > kMaxPlus)
    throw ConfigError("graph: bad box");
  s.lo = VecP::Map(lo.data(), static_cast<Eigen::Index>(lo.size()));
  s.hi = VecP::Map(hi.data(), static_cast<Eigen::Index>(hi.size()));
  s.counts = j.at("counts").get<std::vector<int>>();
  if (s.counts.size() != lo.size()) throw ConfigError("graph: counts do not match the box");
  GraphFn g(s, j.at("n_minus").get<int>());
  const json& values = j.at("values");
  if (!values.is_array() || values.size() != g.size()) throw ConfigError("graph: wrong number of values");
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!values[k].is_array() || static_cast<int>(values[k].size()) != g.n_minus())
      throw ConfigError("graph: wrong value width");
    for (int m = 0; m < g.n_minus(); ++m) g.value(k)(m) = parse_complex(values[k][m], "graph.values");
  }
  return g;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          bool complex_q, bool reproducible) {
  if (traj.size() == 0) throw ConfigError("write_trajectory_csv: empty trajectory");
  const State& u0 = traj.states.front();
  std::vector<std::string> header = {"time"};
  for (int i = 1; i <= u0.n_plus(); ++i) header.push_back("p_" + std::to_string(i));
  for (auto& c : q_columns(u0.n_minus(), complex_q)) header.push_back(c);
  CsvTable t(header);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<double> row = {traj.times[k]};
    const State& u = traj.states[k];
    for (int i = 0; i < u.n_plus(); ++i) row.push_back(u.p(i));
    append_q(row, u.q, complex_q);
    t.row(row);
  }
  t.save(path, reproducible);
}

void write_cloud_csv(const std::filesystem::path& path, const PointCloud& cloud,
                     const std::vector<std::string>& header, bool reproducible) {
  std::vector<std::string> h = header;
  h.push_back("cluster");
  CsvTable t(h);
  for (std::size_t k = 0; k < cloud.points.size(); ++k) {
    const auto& x = cloud.points[k];
    if (static_cast<std::size_t>(x.size()) + 1 != h.size())
      throw ConfigError("write_cloud_csv: header does not match the point dimension");
    std::vector<double> row(x.data(), x.data() + x.size());
    row.push_back(k < cloud.cluster.size() ? cloud.cluster[k] : 0);
    t.row(row);
  }
  t.save(path, reproducible);
}

}  // namespace growup
