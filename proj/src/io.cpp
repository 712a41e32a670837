#include "dreamespase/io.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "dreamespase/errors.hpp"

namespace dreamespase::io {

namespace {

std::vector<std::string> split_line(const std::string& line, const std::string& where) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw ValidationError(where + ": unterminated quoted field");
  out.push_back(std::move(field));
  return out;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

int CsvTable::require_column(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw ValidationError(path + ": missing column \"" + name + "\" (found: " + join_names(header) + ")");
  return c;
}

std::string CsvTable::where(std::size_t row) const { return path + ":" + std::to_string(lines[row]); }

double CsvTable::number(std::size_t row, int col) const {
  const std::string& s = rows[row][col];
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ValidationError(where(row) + ": column \"" + header[col] + "\" is not a number: \"" + s + "\"");
  }
  return v;
}

long CsvTable::integer(std::size_t row, int col) const {
  const std::string& s = rows[row][col];
  long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ValidationError(where(row) + ": column \"" + header[col] + "\" is not an integer: \"" + s + "\"");
  }
  return v;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  t.path = path.string();
  std::string line;
  int number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string where = t.path + ":" + std::to_string(number);
    auto fields = split_line(line, where);
    for (auto& f : fields) f = trim(f);
    if (!have_header) {
      t.header = std::move(fields);
      std::set<std::string> seen;
      for (const auto& h : t.header) {
        if (!seen.insert(h).second) throw ValidationError(where + ": duplicate column \"" + h + "\"");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ValidationError(where + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                            std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(number);
  }
  if (in.bad()) throw IoError("error reading " + t.path);
  if (!have_header) throw ValidationError(t.path + ": empty file (no header)");
  return t;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  std::vector<std::string> q;
  for (auto& h : header) q.push_back(quote(h));
  text_ = fmt::format("{}\n", fmt::join(q, ","));
}

CsvWriter& CsvWriter::row(std::vector<std::string> fields) {
  if (fields.size() != width_) throw DomainError("CSV row width does not match the header");
  for (auto& f : fields) f = quote(f);
  text_ += fmt::format("{}\n", fmt::join(fields, ","));
  return *this;
}

void CsvWriter::save(const std::filesystem::path& path) const { write_text(path, text_); }

std::string CsvWriter::text() const { return text_; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw IoError("error writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

std::vector<std::pair<std::string, hsm::MarkedPattern>> read_cells(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const int c_id = t.require_column("biopsy_id");
  const int c_x = t.require_column("x");
  const int c_y = t.require_column("y");
  const int c_type = t.require_column("type");

  std::vector<std::pair<std::string, hsm::MarkedPattern>> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& id = t.rows[r][c_id];
    if (id.empty()) throw ValidationError(t.where(r) + ": empty biopsy_id");
    const hsm::Point u{t.number(r, c_x), t.number(r, c_y)};
    if (!std::isfinite(u.x) || !std::isfinite(u.y)) throw ValidationError(t.where(r) + ": non-finite coordinate");
    const std::string& type = t.rows[r][c_type];
    if (type != "1" && type != "2") {
      throw ValidationError(t.where(r) + ": unknown cell type code \"" + type + "\" (expected 1 or 2)");
    }
    auto [it, fresh] = index.emplace(id, out.size());
    if (fresh) out.emplace_back(id, hsm::MarkedPattern{});
    auto& pattern = out[it->second].second;
    (type == "1" ? pattern.points_1 : pattern.points_2).push_back(u);
  }

  for (auto& [id, pattern] : out) {
    auto& w = pattern.window;
    w.x_min = w.y_min = std::numeric_limits<double>::infinity();
    w.x_max = w.y_max = -std::numeric_limits<double>::infinity();
    for (const auto* pts : {&pattern.points_1, &pattern.points_2}) {
      for (const auto& u : *pts) {
        w.x_min = std::min(w.x_min, u.x);
        w.x_max = std::max(w.x_max, u.x);
        w.y_min = std::min(w.y_min, u.y);
        w.y_max = std::max(w.y_max, u.y);
      }
    }
    if (!(w.width() > 0.0) || !(w.height() > 0.0)) {
      throw ValidationError(t.path + ": biopsy " + id + " has a degenerate bounding box");
    }
  }
  return out;
}

std::vector<std::pair<std::string, Eigen::VectorXd>> read_outcomes(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const int c_id = t.require_column("biopsy_id");
  int c_val = t.column("y");
  if (c_val < 0) c_val = t.column("theta_mean");
  if (c_val < 0) throw ValidationError(t.path + ": missing outcome column (expected \"y\" or \"theta_mean\")");
  const int c_node = t.column("node");

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<long, double>>> values;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& id = t.rows[r][c_id];
    if (id.empty()) throw ValidationError(t.where(r) + ": empty biopsy_id");
    const double v = t.number(r, c_val);
    if (!std::isfinite(v)) throw ValidationError(t.where(r) + ": non-finite outcome");
    if (!values.count(id)) order.push_back(id);
    auto& rows = values[id];
    const long node = c_node >= 0 ? t.integer(r, c_node) : static_cast<long>(rows.size());
    rows.emplace_back(node, v);
  }

  std::vector<std::pair<std::string, Eigen::VectorXd>> out;
  for (const auto& id : order) {
    auto rows = values[id];
    std::sort(rows.begin(), rows.end());
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (rows[k].first != static_cast<long>(k)) {
        throw ValidationError(t.path + ": biopsy " + id + " node indices must be 0.." + std::to_string(rows.size() - 1) +
                              " without gaps or repeats");
      }
      y(static_cast<Eigen::Index>(k)) = rows[k].second;
    }
    out.emplace_back(id, std::move(y));
  }
  return out;
}

std::map<std::string, std::vector<spatial::Edge>> read_adjacency(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const int c_id = t.require_column("biopsy_id");
  const int c_a = t.require_column("node_a");
  const int c_b = t.require_column("node_b");
  std::map<std::string, std::vector<spatial::Edge>> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const long a = t.integer(r, c_a);
    const long b = t.integer(r, c_b);
    if (a < 0 || b < 0) throw ValidationError(t.where(r) + ": negative node index");
    if (a == b) throw ValidationError(t.where(r) + ": self loop on node " + std::to_string(a));
    out[t.rows[r][c_id]].push_back({static_cast<int>(a), static_cast<int>(b)});
  }
  return out;
}

Covariates read_covariates(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const int c_id = t.require_column("biopsy_id");
  Covariates out;
  std::vector<int> cols;
  for (int c = 0; c < static_cast<int>(t.header.size()); ++c) {
    if (c == c_id) continue;
    out.names.push_back(t.header[c]);
    cols.push_back(c);
  }
  if (cols.empty()) throw ValidationError(t.path + ": no covariate columns");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& id = t.rows[r][c_id];
    Eigen::VectorXd x(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      x(static_cast<Eigen::Index>(k)) = t.number(r, cols[k]);
      if (!std::isfinite(x(static_cast<Eigen::Index>(k)))) {
        throw ValidationError(t.where(r) + ": non-finite covariate \"" + out.names[k] + "\"");
      }
    }
    if (!out.rows.emplace(id, std::move(x)).second) throw ValidationError(t.where(r) + ": duplicate biopsy " + id);
  }
  return out;
}

std::vector<spatial::BiopsyGraph> assemble_biopsies(
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& outcomes,
    const std::map<std::string, std::vector<spatial::Edge>>& adjacency, const Covariates& covariates) {
  std::vector<spatial::BiopsyGraph> out;
  std::set<std::string> ids;
  for (const auto& [id, y] : outcomes) {
    ids.insert(id);
    const auto cov = covariates.rows.find(id);
    if (cov == covariates.rows.end()) throw ValidationError("biopsy " + id + " has outcomes but no covariate row");
    const int n = static_cast<int>(y.size());
    std::vector<spatial::Edge> edges;
    if (const auto adj = adjacency.find(id); adj != adjacency.end()) edges = adj->second;
    for (const auto& e : edges) {
      if (e.a >= n || e.b >= n) {
        throw ValidationError("biopsy " + id + ": adjacency names node " + std::to_string(std::max(e.a, e.b)) +
                              " but only " + std::to_string(n) + " sub-regions have outcomes");
      }
    }
    spatial::BiopsyGraph g;
    g.id = id;
    g.adjacency = spatial::AdjacencyMatrix(n, std::move(edges));
    g.y = y;
    g.x = cov->second;
    spatial::validate(g);
    out.push_back(std::move(g));
  }
  for (const auto& [id, edges] : adjacency) {
    if (!ids.count(id)) throw ValidationError("adjacency lists biopsy " + id + " which has no outcomes");
  }
  for (const auto& [id, x] : covariates.rows) {
    if (!ids.count(id)) spdlog::warn("covariates for biopsy {} are unused (no outcomes)", id);
  }
  if (out.empty()) throw ValidationError("no biopsies to fit");
  return out;
}

Expression read_expression(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const int c_gene = t.require_column("gene");
  const int c_group = t.require_column("group");
  Expression out;
  std::vector<int> cols;
  for (int c = 0; c < static_cast<int>(t.header.size()); ++c) {
    if (c == c_gene || c == c_group) continue;
    out.samples.push_back(t.header[c]);
    cols.push_back(c);
  }
  if (cols.empty()) throw ValidationError(t.path + ": no sample columns");
  out.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  std::set<std::string> seen;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& gene = t.rows[r][c_gene];
    if (!seen.insert(gene).second) throw ValidationError(t.where(r) + ": duplicate gene " + gene);
    out.genes.push_back(gene);
    out.groups.push_back(t.rows[r][c_group]);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double v = t.number(r, cols[k]);
      if (!std::isfinite(v)) throw ValidationError(t.where(r) + ": non-finite expression value");
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v;
    }
  }
  return out;
}

}  // namespace dreamespase::io
