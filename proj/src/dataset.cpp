#include "spglm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spglm/csv.hpp"
#include "spglm/error.hpp"

namespace spglm {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

namespace {

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

NumericCsv read_numeric_csv(const std::filesystem::path& path, const std::string& stage) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Validation, stage, "cannot open '" + path.string() + "'");
  NumericCsv csv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    csv.header = split(line);
    break;
  }
  if (csv.header.empty()) fail(ErrorKind::Validation, stage, "'" + path.string() + "' has no header");
  const std::size_t ncol = csv.header.size();
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (fields.size() != ncol) {
      fail(ErrorKind::Validation, stage,
           "row at line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
               " fields, expected " + std::to_string(ncol));
    }
    std::vector<double> row(ncol);
    for (std::size_t c = 0; c < ncol; ++c) {
      const std::string& f = fields[c];
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        fail(ErrorKind::Validation, stage,
             "row at line " + std::to_string(line_no) + ", column '" + csv.header[c] +
                 "': not a finite number: '" + f + "'");
      }
      row[c] = v;
    }
    csv.rows.push_back(std::move(row));
    csv.line_numbers.push_back(line_no);
  }
  return csv;
}

std::size_t count_indexed_columns(const std::vector<std::string>& header, std::size_t offset,
                                  char prefix) {
  std::size_t n = 0;
  while (offset + n < header.size() &&
         header[offset + n] == std::string(1, prefix) + std::to_string(n + 1)) {
    ++n;
  }
  return n;
}

TrainingSet::TrainingSet(PointMatrix locations, Eigen::MatrixXd covariates, Eigen::VectorXd responses)
    : locations_(std::move(locations)), covariates_(std::move(covariates)), responses_(std::move(responses)) {
  const auto n = responses_.size();
  if (n < 1) fail(ErrorKind::Validation, "training", "training set is empty");
  if (locations_.rows() != n || covariates_.rows() != n) {
    fail(ErrorKind::Validation, "training", "locations, covariates and responses differ in length");
  }
  if (locations_.cols() < 1) fail(ErrorKind::Validation, "training", "locations need at least one coordinate");
  if (covariates_.cols() < 1) fail(ErrorKind::Validation, "training", "at least one covariate is required");
  if (!locations_.allFinite() || !all_finite(covariates_) || !responses_.allFinite()) {
    fail(ErrorKind::Validation, "training", "non-finite value in training data");
  }
}

TargetSet::TargetSet(PointMatrix locations, Eigen::MatrixXd covariates)
    : locations_(std::move(locations)), covariates_(std::move(covariates)) {
  const auto m = locations_.rows();
  if (m < 1) fail(ErrorKind::Validation, "target", "target set is empty");
  if (covariates_.rows() != m) fail(ErrorKind::Validation, "target", "locations and covariates differ in length");
  if (locations_.cols() < 1) fail(ErrorKind::Validation, "target", "locations need at least one coordinate");
  if (covariates_.cols() < 1) fail(ErrorKind::Validation, "target", "at least one covariate is required");
  if (!locations_.allFinite() || !all_finite(covariates_)) {
    fail(ErrorKind::Validation, "target", "non-finite value in target data");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < locations_.cols(); ++c) {
      if (locations_(a, c) != locations_(b, c)) return locations_(a, c) < locations_(b, c);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), row_less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!row_less(order[i - 1], order[i])) {
      fail(ErrorKind::Validation, "target",
           "duplicate target location at rows " + std::to_string(std::min(order[i - 1], order[i]) + 1) +
               " and " + std::to_string(std::max(order[i - 1], order[i]) + 1));
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(covariates_);
  if (qr.rank() < covariates_.cols()) {
    fail(ErrorKind::Validation, "target",
         "target covariate matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
             std::to_string(covariates_.cols()) + ")");
  }
}

namespace {

struct Layout {
  std::size_t d;
  std::size_t p;
};

Layout parse_header(const NumericCsv& csv, bool with_response, const std::string& stage) {
  const std::size_t d = count_indexed_columns(csv.header, 0, 's');
  const std::size_t p = count_indexed_columns(csv.header, d, 'x');
  const std::size_t expected = d + p + (with_response ? 1 : 0);
  const bool ok = d >= 1 && p >= 1 && csv.header.size() == expected &&
                  (!with_response || csv.header.back() == "y");
  if (!ok) {
    fail(ErrorKind::Validation, stage,
         std::string("header must be s1..sd,x1..xP") + (with_response ? ",y" : ""));
  }
  return {d, p};
}

void write_header(std::ostream& out, std::size_t d, std::size_t p, bool with_response) {
  for (std::size_t i = 0; i < d; ++i) out << (i ? "," : "") << 's' << (i + 1);
  for (std::size_t i = 0; i < p; ++i) out << ",x" << (i + 1);
  if (with_response) out << ",y";
  out << '\n';
}

}  // namespace

TrainingSet load_training(const std::filesystem::path& path) {
  const auto csv = read_numeric_csv(path, "load_training");
  const auto [d, p] = parse_header(csv, true, "load_training");
  const auto n = static_cast<Eigen::Index>(csv.rows.size());
  if (n == 0) fail(ErrorKind::Validation, "load_training", "'" + path.string() + "' has no data rows");
  PointMatrix s(n, static_cast<Eigen::Index>(d));
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(p));
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = csv.rows[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < d; ++c) s(r, static_cast<Eigen::Index>(c)) = row[c];
    for (std::size_t c = 0; c < p; ++c) x(r, static_cast<Eigen::Index>(c)) = row[d + c];
    y(r) = row[d + p];
  }
  return TrainingSet(std::move(s), std::move(x), std::move(y));
}

TargetSet load_target(const std::filesystem::path& path) {
  const auto csv = read_numeric_csv(path, "load_target");
  const auto [d, p] = parse_header(csv, false, "load_target");
  const auto m = static_cast<Eigen::Index>(csv.rows.size());
  if (m == 0) fail(ErrorKind::Validation, "load_target", "'" + path.string() + "' has no data rows");
  PointMatrix s(m, static_cast<Eigen::Index>(d));
  Eigen::MatrixXd x(m, static_cast<Eigen::Index>(p));
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& row = csv.rows[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < d; ++c) s(r, static_cast<Eigen::Index>(c)) = row[c];
    for (std::size_t c = 0; c < p; ++c) x(r, static_cast<Eigen::Index>(c)) = row[d + c];
  }
  try {
    return TargetSet(std::move(s), std::move(x));
  } catch (const Error& e) {
    throw Error(e.kind(), "load_target", e.what());
  }
}

void save_training(const TrainingSet& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Validation, "save_training", "cannot write '" + path.string() + "'");
  write_header(out, data.dim(), data.num_covariates(), true);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (Eigen::Index c = 0; c < data.locations().cols(); ++c) out << (c ? "," : "") << format_double(data.locations()(i, c));
    for (Eigen::Index c = 0; c < data.covariates().cols(); ++c) out << ',' << format_double(data.covariates()(i, c));
    out << ',' << format_double(data.responses()(i)) << '\n';
  }
}

void save_target(const TargetSet& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Validation, "save_target", "cannot write '" + path.string() + "'");
  write_header(out, data.dim(), data.num_covariates(), false);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    for (Eigen::Index c = 0; c < data.locations().cols(); ++c) out << (c ? "," : "") << format_double(data.locations()(i, c));
    for (Eigen::Index c = 0; c < data.covariates().cols(); ++c) out << ',' << format_double(data.covariates()(i, c));
    out << '\n';
  }
}

}  // namespace spglm
