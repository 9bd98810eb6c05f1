#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace metamine {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised on contract violations (dimension mismatch, malformed input).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EntityKind { Dataset, Workflow };

const char* to_string(EntityKind kind);

/// Dense descriptor matrix for datasets (X, n x d) or workflows (A, m x l).
struct DescriptorTable {
  std::vector<std::string> entity_ids;
  Matrix features;
  std::vector<std::string> feature_names;
  EntityKind kind = EntityKind::Dataset;

  std::size_t rows() const { return entity_ids.size(); }
  std::size_t cols() const { return feature_names.size(); }
  std::optional<std::size_t> index_of(const std::string& id) const;
};

/// Estimated base-level performances (e.g. CV accuracy), n x m, entries in [0,1].
struct PerformanceMatrix {
  std::vector<std::string> dataset_ids;
  std::vector<std::string> workflow_ids;
  Matrix values;
};

/// Pairwise-comparison scores R, n x m. For tournament-derived matrices every
/// row sums to m(m-1)/2 and entries are multiples of 0.5 in [0, m-1].
struct PreferenceMatrix {
  std::vector<std::string> dataset_ids;
  std::vector<std::string> workflow_ids;
  Matrix scores;

  std::size_t n() const { return static_cast<std::size_t>(scores.rows()); }
  std::size_t m() const { return static_cast<std::size_t>(scores.cols()); }
};

/// Per-column z-score transform fitted on a training table.
struct StandardizationRecord {
  std::vector<std::string> feature_names;
  Vector mean;
  Vector scale;                      // population std; 1 for constant columns
  std::vector<bool> zero_variance;   // flagged constant columns

  Vector apply(const Vector& row) const;
  Matrix apply(const Matrix& rows) const;
  DescriptorTable apply(const DescriptorTable& table) const;
  bool is_identity() const;
};

enum class InitKind { SeededGaussian, SvdWarmStart };

enum class ObjectiveKind { F1, F2, F3, F4 };

const char* to_string(ObjectiveKind kind);
ObjectiveKind objective_from_string(const std::string& name);
const char* to_string(InitKind kind);
InitKind init_from_string(const std::string& name);

struct HyperParams {
  double mu1 = 0.5;
  double mu2 = 0.5;
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1.0;
  int n_neighbors = 5;
  int max_iters = 5000;
  double rel_tol = 1e-8;
  std::uint64_t seed = 0;
  InitKind init = InitKind::SeededGaussian;
  std::optional<int> t;  // projection dimensionality override

  bool operator==(const HyperParams&) const = default;
};

/// Learned projections. W_X = u u^T, W_A = v v^T, W = u v^T.
struct ModelParams {
  ObjectiveKind objective = ObjectiveKind::F4;
  Matrix u;  // d x t
  Matrix v;  // l x t
  int t = 0;
  HyperParams hyper;
  StandardizationRecord x_standardization;
  StandardizationRecord a_standardization;

  Matrix dataset_metric() const { return u * u.transpose(); }
  Matrix workflow_metric() const { return v * v.transpose(); }
  Matrix heterogeneous_metric() const { return u * v.transpose(); }
};

struct Violation {
  std::string source;  // "X", "A", "P", "R", ...
  std::string reason;
  std::optional<std::size_t> row;
  std::optional<std::size_t> col;
  std::string detail;  // offending id or value

  std::string to_string() const;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  void add(Violation v) { violations.push_back(std::move(v)); }
  void merge(const ValidationReport& other);
  std::string to_string() const;
};

ValidationReport validate_descriptors(const DescriptorTable& table, const std::string& source);
ValidationReport validate_performance(const PerformanceMatrix& p);

/// Checks the tournament invariants (entries in [0, m-1], multiples of 0.5,
/// row sums equal to m(m-1)/2).
ValidationReport validate_preference(const PreferenceMatrix& r);

/// Full cross-table validation: shapes, duplicate ids, non-finite values,
/// out-of-range performances and id agreement between X, A and P.
ValidationReport validate_tables(const DescriptorTable& x, const DescriptorTable& a,
                                 const PerformanceMatrix& p);

StandardizationRecord fit_standardization(const DescriptorTable& table);

/// Column z-scores with population std. Constant columns map to 0 and are flagged.
std::pair<DescriptorTable, StandardizationRecord> standardize(const DescriptorTable& table);

/// Number of singular values above tol_factor * s_max * max(rows, cols) * eps.
int numeric_rank(const Matrix& matrix, double tol_factor = 1.0);

}  // namespace metamine
