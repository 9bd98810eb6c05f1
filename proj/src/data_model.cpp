#include "metamine/data_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace metamine {

const char* to_string(EntityKind kind) {
  return kind == EntityKind::Dataset ? "dataset" : "workflow";
}

const char* to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::F1: return "f1";
    case ObjectiveKind::F2: return "f2";
    case ObjectiveKind::F3: return "f3";
    case ObjectiveKind::F4: return "f4";
  }
  return "?";
}

ObjectiveKind objective_from_string(const std::string& name) {
  if (name == "f1" || name == "F1") return ObjectiveKind::F1;
  if (name == "f2" || name == "F2") return ObjectiveKind::F2;
  if (name == "f3" || name == "F3") return ObjectiveKind::F3;
  if (name == "f4" || name == "F4") return ObjectiveKind::F4;
  throw Error("unknown objective '" + name + "'");
}

const char* to_string(InitKind kind) {
  return kind == InitKind::SeededGaussian ? "gaussian" : "svd";
}

InitKind init_from_string(const std::string& name) {
  if (name == "gaussian") return InitKind::SeededGaussian;
  if (name == "svd") return InitKind::SvdWarmStart;
  throw Error("unknown init '" + name + "'");
}

std::optional<std::size_t> DescriptorTable::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < entity_ids.size(); ++i) {
    if (entity_ids[i] == id) return i;
  }
  return std::nullopt;
}

Vector StandardizationRecord::apply(const Vector& row) const {
  if (row.size() != mean.size()) {
    throw Error("standardization: expected " + std::to_string(mean.size()) + " features, got " +
                std::to_string(row.size()));
  }
  Vector out = ((row - mean).array() / scale.array()).matrix();
  for (std::size_t j = 0; j < zero_variance.size(); ++j) {
    if (zero_variance[j]) out(static_cast<Eigen::Index>(j)) = 0.0;
  }
  return out;
}

Matrix StandardizationRecord::apply(const Matrix& rows) const {
  if (rows.cols() != mean.size()) {
    throw Error("standardization: expected " + std::to_string(mean.size()) + " features, got " +
                std::to_string(rows.cols()));
  }
  Matrix out = rows.rowwise() - mean.transpose();
  out.array().rowwise() /= scale.transpose().array();
  for (std::size_t j = 0; j < zero_variance.size(); ++j) {
    if (zero_variance[j]) out.col(static_cast<Eigen::Index>(j)).setZero();
  }
  return out;
}

DescriptorTable StandardizationRecord::apply(const DescriptorTable& table) const {
  if (table.feature_names != feature_names) {
    throw Error("standardization: feature names do not match the fitted record");
  }
  DescriptorTable out = table;
  out.features = apply(table.features);
  return out;
}

bool StandardizationRecord::is_identity() const {
  for (bool flagged : zero_variance) {
    if (flagged) return false;
  }
  return (mean.array() == 0.0).all() && (scale.array() == 1.0).all();
}

std::string Violation::to_string() const {
  std::ostringstream os;
  os << source << ": " << reason;
  if (row || col) {
    os << " at (" << (row ? std::to_string(*row) : "-") << "," << (col ? std::to_string(*col) : "-")
       << ")";
  }
  if (!detail.empty()) os << " [" << detail << "]";
  return os.str();
}

void ValidationReport::merge(const ValidationReport& other) {
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
}

std::string ValidationReport::to_string() const {
  if (ok()) return "validation passed\n";
  std::ostringstream os;
  os << "validation failed with " << violations.size() << " violation(s)\n";
  for (const auto& v : violations) os << "  " << v.to_string() << "\n";
  return os.str();
}

namespace {

void check_unique(const std::vector<std::string>& ids, const std::string& source,
                  ValidationReport& report) {
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, inserted] = seen.emplace(ids[i], i);
    if (!inserted) report.add({source, "duplicate id", i, std::nullopt, ids[i]});
  }
}

void check_finite(const Matrix& m, const std::string& source, ValidationReport& report) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        report.add({source, "non-finite value", static_cast<std::size_t>(i),
                    static_cast<std::size_t>(j), std::to_string(m(i, j))});
      }
    }
  }
}

// Ids present in `want` but absent from `have`.
void check_ids_agree(const std::vector<std::string>& have, const std::vector<std::string>& want,
                     const std::string& source, const std::string& what,
                     ValidationReport& report) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < have.size(); ++i) index.emplace(have[i], i);
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (!index.count(want[i])) report.add({source, what, i, std::nullopt, want[i]});
  }
}

}  // namespace

ValidationReport validate_descriptors(const DescriptorTable& table, const std::string& source) {
  ValidationReport report;
  if (static_cast<std::size_t>(table.features.rows()) != table.entity_ids.size()) {
    report.add({source, "row count does not match entity id count", std::nullopt, std::nullopt,
                std::to_string(table.features.rows()) + " vs " +
                    std::to_string(table.entity_ids.size())});
  }
  if (static_cast<std::size_t>(table.features.cols()) != table.feature_names.size()) {
    report.add({source, "column count does not match feature name count", std::nullopt,
                std::nullopt,
                std::to_string(table.features.cols()) + " vs " +
                    std::to_string(table.feature_names.size())});
  }
  check_unique(table.entity_ids, source, report);
  check_finite(table.features, source, report);
  return report;
}

ValidationReport validate_performance(const PerformanceMatrix& p) {
  ValidationReport report;
  if (static_cast<std::size_t>(p.values.rows()) != p.dataset_ids.size() ||
      static_cast<std::size_t>(p.values.cols()) != p.workflow_ids.size()) {
    report.add({"P", "shape does not match id lists", std::nullopt, std::nullopt,
                std::to_string(p.values.rows()) + "x" + std::to_string(p.values.cols())});
  }
  check_unique(p.dataset_ids, "P", report);
  check_unique(p.workflow_ids, "P", report);
  for (Eigen::Index i = 0; i < p.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.values.cols(); ++j) {
      const double value = p.values(i, j);
      if (!std::isfinite(value)) {
        report.add({"P", "non-finite value", static_cast<std::size_t>(i),
                    static_cast<std::size_t>(j), std::to_string(value)});
      } else if (value < 0.0 || value > 1.0) {
        report.add({"P", "out of [0,1]", static_cast<std::size_t>(i),
                    static_cast<std::size_t>(j), std::to_string(value)});
      }
    }
  }
  return report;
}

ValidationReport validate_preference(const PreferenceMatrix& r) {
  ValidationReport report;
  if (r.dataset_ids.size() != r.n() || r.workflow_ids.size() != r.m()) {
    report.add({"R", "shape does not match id lists", std::nullopt, std::nullopt, ""});
  }
  check_finite(r.scores, "R", report);
  const double m = static_cast<double>(r.m());
  const double row_total = m * (m - 1.0) / 2.0;
  for (Eigen::Index i = 0; i < r.scores.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.scores.cols(); ++j) {
      const double value = r.scores(i, j);
      if (value < 0.0 || value > m - 1.0) {
        report.add({"R", "out of [0, m-1]", static_cast<std::size_t>(i),
                    static_cast<std::size_t>(j), std::to_string(value)});
      } else if (2.0 * value != std::round(2.0 * value)) {
        report.add({"R", "not a multiple of 0.5", static_cast<std::size_t>(i),
                    static_cast<std::size_t>(j), std::to_string(value)});
      }
    }
    const double sum = r.scores.row(i).sum();
    if (sum != row_total) {
      report.add({"R", "row sum differs from m(m-1)/2", static_cast<std::size_t>(i), std::nullopt,
                  std::to_string(sum)});
    }
  }
  return report;
}

ValidationReport validate_tables(const DescriptorTable& x, const DescriptorTable& a,
                                 const PerformanceMatrix& p) {
  ValidationReport report = validate_descriptors(x, "X");
  report.merge(validate_descriptors(a, "A"));
  report.merge(validate_performance(p));
  check_ids_agree(x.entity_ids, p.dataset_ids, "P", "dataset id missing from X", report);
  check_ids_agree(p.dataset_ids, x.entity_ids, "X", "dataset id missing from P", report);
  check_ids_agree(a.entity_ids, p.workflow_ids, "P", "workflow id missing from A", report);
  check_ids_agree(p.workflow_ids, a.entity_ids, "A", "workflow id missing from P", report);
  return report;
}

StandardizationRecord fit_standardization(const DescriptorTable& table) {
  const Eigen::Index rows = table.features.rows();
  const Eigen::Index cols = table.features.cols();
  StandardizationRecord record;
  record.feature_names = table.feature_names;
  record.mean = Vector::Zero(cols);
  record.scale = Vector::Ones(cols);
  record.zero_variance.assign(static_cast<std::size_t>(cols), false);
  if (rows == 0) return record;

  for (Eigen::Index j = 0; j < cols; ++j) {
    const auto column = table.features.col(j);
    const double mean = column.mean();
    const double var = (column.array() - mean).square().mean();
    const double sd = std::sqrt(var);
    // Constant columns: the spread is pure rounding noise relative to the values.
    const double floor = 1e-12 * std::max(1.0, column.cwiseAbs().maxCoeff());
    record.mean(j) = mean;
    if (sd > floor) {
      record.scale(j) = sd;
    } else {
      record.zero_variance[static_cast<std::size_t>(j)] = true;
    }
  }
  return record;
}

std::pair<DescriptorTable, StandardizationRecord> standardize(const DescriptorTable& table) {
  StandardizationRecord record = fit_standardization(table);
  DescriptorTable out = table;
  out.features = record.apply(table.features);
  return {std::move(out), std::move(record)};
}

int numeric_rank(const Matrix& matrix, double tol_factor) {
  if (matrix.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(matrix);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double tol = tol_factor * sv(0) * static_cast<double>(std::max(matrix.rows(), matrix.cols())) *
                     std::numeric_limits<double>::epsilon();
  return static_cast<int>((sv.array() > tol).count());
}

}  // namespace metamine
