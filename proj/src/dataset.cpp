#include "spade/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spade/num_io.hpp"

namespace spade {
namespace {

constexpr double kStdFloor = 1e-8;

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

Design DiscreteCodec::encode(const std::vector<int>& tokens) const {
  if (static_cast<int>(tokens.size()) != length) {
    throw CodecError{"expected " + std::to_string(length) + " tokens, got " +
                     std::to_string(tokens.size())};
  }
  Design x = Design::Constant(dim(), off_logit);
  for (int pos = 0; pos < length; ++pos) {
    const int tok = tokens[pos];
    if (tok < 0 || tok >= vocab) {
      throw CodecError{"token " + std::to_string(tok) + " out of range [0, " +
                       std::to_string(vocab) + ")"};
    }
    x[pos * vocab + tok] = on_logit;
  }
  return x;
}

std::vector<int> DiscreteCodec::decode(const Design& x) const {
  if (static_cast<int>(x.size()) != dim()) {
    throw CodecError{"design has dimension " + std::to_string(x.size()) +
                     ", codec expects " + std::to_string(dim())};
  }
  std::vector<int> tokens(length);
  for (int pos = 0; pos < length; ++pos) {
    int best = 0;
    double best_val = x[pos * vocab];
    for (int v = 1; v < vocab; ++v) {
      const double val = x[pos * vocab + v];
      if (val > best_val) {
        best_val = val;
        best = v;
      }
    }
    tokens[pos] = best;
  }
  return tokens;
}

Dataset Dataset::from_rows(Eigen::MatrixXd designs, Eigen::VectorXd scores) {
  if (designs.rows() != scores.size()) {
    throw DataError{"designs and scores disagree on row count"};
  }
  if (designs.rows() < 2) {
    throw DataError{"dataset needs at least 2 rows, got " +
                    std::to_string(designs.rows())};
  }
  if (!all_finite(designs) || !scores.allFinite()) {
    throw DataError{"dataset contains non-finite values"};
  }

  Dataset d;
  d.designs_ = std::move(designs);
  d.scores_ = std::move(scores);
  d.y_min_ = d.scores_.minCoeff();
  d.y_max_ = d.scores_.maxCoeff();

  const auto n = static_cast<double>(d.designs_.rows());
  d.norm_.x_mean = d.designs_.colwise().mean();
  Eigen::MatrixXd centered = d.designs_.rowwise() - d.norm_.x_mean.transpose();
  d.norm_.x_std =
      (centered.array().square().colwise().sum() / n).sqrt().transpose();
  for (int j = 0; j < d.norm_.x_std.size(); ++j) {
    if (d.norm_.x_std[j] < kStdFloor) d.norm_.x_std[j] = 1.0;
  }
  d.norm_.y_mean = d.scores_.mean();
  d.norm_.y_std =
      std::sqrt((d.scores_.array() - d.norm_.y_mean).square().sum() / n);
  if (d.norm_.y_std < kStdFloor) d.norm_.y_std = 1.0;
  return d;
}

Design Dataset::normalize_x(const Design& x) const {
  if (x.size() != designs_.cols()) {
    throw DimError{"design has dimension " + std::to_string(x.size()) +
                   ", dataset expects " + std::to_string(designs_.cols())};
  }
  return (x - norm_.x_mean).cwiseQuotient(norm_.x_std);
}

Design Dataset::denormalize_x(const Design& x) const {
  if (x.size() != designs_.cols()) {
    throw DimError{"design has dimension " + std::to_string(x.size()) +
                   ", dataset expects " + std::to_string(designs_.cols())};
  }
  return x.cwiseProduct(norm_.x_std) + norm_.x_mean;
}

double Dataset::normalize_y(double y) const { return (y - norm_.y_mean) / norm_.y_std; }

double Dataset::denormalize_y(double y) const { return y * norm_.y_std + norm_.y_mean; }

Eigen::MatrixXd Dataset::normalized_designs() const {
  Eigen::MatrixXd out = designs_.rowwise() - norm_.x_mean.transpose();
  out.array().rowwise() /= norm_.x_std.transpose().array();
  return out;
}

Eigen::VectorXd Dataset::normalized_scores() const {
  return (scores_.array() - norm_.y_mean) / norm_.y_std;
}

namespace {

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError{"cannot open " + path};

  std::string line;
  if (!std::getline(in, line)) throw ParseError{path + ": empty file"};
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_fields(line);
  if (header.size() < 2 || header.back() != "y") {
    throw ParseError{path + ": expected header x0,...,y"};
  }
  const int dim = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < dim; ++j) {
    if (header[j] != "x" + std::to_string(j)) {
      throw ParseError{path + ": unexpected header column '" + header[j] + "'"};
    }
  }

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (static_cast<int>(fields.size()) != dim + 1) {
      throw ParseError{path + ":" + std::to_string(line_no) +
                       ": expected " + std::to_string(dim + 1) + " fields, got " +
                       std::to_string(fields.size())};
    }
    std::vector<double> row(fields.size());
    for (std::size_t j = 0; j < fields.size(); ++j) {
      row[j] = parse_double(fields[j], path + ":" + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }

  Eigen::MatrixXd designs(rows.size(), dim);
  Eigen::VectorXd scores(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < dim; ++j) designs(static_cast<Eigen::Index>(i), j) = rows[i][j];
    scores[static_cast<Eigen::Index>(i)] = rows[i][dim];
  }
  return Dataset::from_rows(std::move(designs), std::move(scores));
}

Dataset load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError{"cannot open " + path};

  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError{path + ": " + e.what()};
  }
  if (!doc.is_array()) throw ParseError{path + ": expected a top-level array"};
  if (doc.empty()) throw DataError{path + ": no rows"};

  int dim = -1;
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("x") || !item.contains("y") ||
        !item["x"].is_array() || !item["y"].is_number()) {
      throw ParseError{path + ": rows must be objects with \"x\" array and \"y\" number"};
    }
    std::vector<double> row;
    for (const auto& v : item["x"]) {
      if (!v.is_number()) throw ParseError{path + ": non-numeric design entry"};
      row.push_back(v.get<double>());
    }
    if (dim < 0) dim = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != dim) {
      throw ParseError{path + ": rows of mixed design width"};
    }
    xs.push_back(std::move(row));
    ys.push_back(item["y"].get<double>());
  }

  Eigen::MatrixXd designs(xs.size(), dim);
  Eigen::VectorXd scores(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (int j = 0; j < dim; ++j) designs(static_cast<Eigen::Index>(i), j) = xs[i][j];
    scores[static_cast<Eigen::Index>(i)] = ys[i];
  }
  return Dataset::from_rows(std::move(designs), std::move(scores));
}

}  // namespace

Dataset load_dataset(const std::string& path, FileFormat format) {
  return format == FileFormat::csv ? load_csv(path) : load_json(path);
}

void write_dataset_csv(const Eigen::MatrixXd& designs,
                       const Eigen::VectorXd& scores, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError{"cannot write " + path};
  for (int j = 0; j < designs.cols(); ++j) out << 'x' << j << ',';
  out << "y\n";
  for (Eigen::Index i = 0; i < designs.rows(); ++i) {
    for (Eigen::Index j = 0; j < designs.cols(); ++j) {
      out << format_g17(designs(i, j)) << ',';
    }
    out << format_g17(scores[i]) << '\n';
  }
  if (!out) throw IoError{"failed writing " + path};
}

}  // namespace spade
