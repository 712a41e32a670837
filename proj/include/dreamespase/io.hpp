#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dreamespase/hsm.hpp"
#include "dreamespase/spatial.hpp"

namespace dreamespase::io {

/// A parsed CSV file: header plus string fields, with source line numbers
/// for error messages. Fields may be double-quoted ("" escapes a quote).
struct CsvTable {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> lines;

  /// Column index, or -1.
  int column(const std::string& name) const;
  /// Column index; throws ValidationError naming the file when absent.
  int require_column(const std::string& name) const;
  double number(std::size_t row, int col) const;
  long integer(std::size_t row, int col) const;
  std::string where(std::size_t row) const;  // "path:line"
};

/// Throws IoError if the file cannot be read, ValidationError on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_number(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  CsvWriter& row(std::vector<std::string> fields);
  /// Throws IoError on failure.
  void save(const std::filesystem::path& path) const;
  std::string text() const;

 private:
  std::string text_;
  std::size_t width_;
};

/// Writes a whole file; throws IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

/// biopsy_id,x,y,type with type 1 (tumour) or 2 (immune). The window of each
/// biopsy is the bounding box of its cells. Biopsies keep file order.
std::vector<std::pair<std::string, hsm::MarkedPattern>> read_cells(const std::filesystem::path& path);

/// Outcome rows per biopsy in file order (or ordered by an optional `node`
/// column). The value column is `y`, or `theta_mean` for hsm-fit output.
std::vector<std::pair<std::string, Eigen::VectorXd>> read_outcomes(const std::filesystem::path& path);

/// biopsy_id,node_a,node_b with 0-based node indices.
std::map<std::string, std::vector<spatial::Edge>> read_adjacency(const std::filesystem::path& path);

struct Covariates {
  std::vector<std::string> names;
  std::map<std::string, Eigen::VectorXd> rows;
};

/// biopsy_id,<covariate names...>.
Covariates read_covariates(const std::filesystem::path& path);

/// Joins the three inputs into biopsy graphs, in outcome-file order. Throws
/// ValidationError on id mismatches, out-of-range nodes or non-finite values.
std::vector<spatial::BiopsyGraph> assemble_biopsies(
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& outcomes,
    const std::map<std::string, std::vector<spatial::Edge>>& adjacency, const Covariates& covariates);

/// gene,group,sample_1..sample_M.
struct Expression {
  std::vector<std::string> genes;
  std::vector<std::string> groups;
  std::vector<std::string> samples;
  Eigen::MatrixXd values;  // genes x samples
};

Expression read_expression(const std::filesystem::path& path);

}  // namespace dreamespase::io
