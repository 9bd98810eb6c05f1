#include "metamine/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

namespace metamine::io {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delim) {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

bool parse_double(const std::string& text, double& value) {
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  while (begin < end && (*begin == ' ')) ++begin;
  while (end > begin && (end[-1] == ' ')) --end;
  if (begin == end) return false;
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end;
}

double number(const std::string& text, const fs::path& path, std::size_t line,
              std::size_t column) {
  double v = 0.0;
  if (!parse_double(text, v)) {
    throw FormatError(path.string() + ": line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": '" + text + "' is not a number");
  }
  return v;
}

void require_header(const CsvTable& t, const fs::path& path,
                    const std::vector<std::string>& expected) {
  if (t.header.size() < expected.size()) {
    throw FormatError(path.string() + ": expected header " + [&] {
      std::string s;
      for (const auto& e : expected) s += (s.empty() ? "" : ",") + e;
      return s;
    }());
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (t.header[i] != expected[i]) {
      throw FormatError(path.string() + ": header column " + std::to_string(i + 1) + " is '" +
                        t.header[i] + "', expected '" + expected[i] + "'");
    }
  }
}

void check_width(const CsvTable& t, const fs::path& path, std::size_t width) {
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != width) {
      throw FormatError(path.string() + ": line " + std::to_string(r + 2) + " has " +
                        std::to_string(t.rows[r].size()) + " fields, expected " +
                        std::to_string(width));
    }
  }
}

std::size_t intern(std::vector<std::string>& ids, std::unordered_map<std::string, std::size_t>& index,
                   const std::string& id) {
  auto [it, inserted] = index.emplace(id, ids.size());
  if (inserted) ids.push_back(id);
  return it->second;
}

struct LongMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  Matrix values;
};

LongMatrix read_long(const fs::path& path, const std::vector<std::string>& header) {
  const CsvTable t = read_csv(path);
  require_header(t, path, header);
  check_width(t, path, 3);
  LongMatrix out;
  std::unordered_map<std::string, std::size_t> row_index, col_index;
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    const std::size_t i = intern(out.row_ids, row_index, f[0]);
    const std::size_t j = intern(out.col_ids, col_index, f[1]);
    const double v = number(f[2], path, r + 2, 3);
    if (!cells.emplace(std::make_pair(i, j), v).second) {
      throw FormatError(path.string() + ": duplicate entry for (" + f[0] + ", " + f[1] + ")");
    }
  }
  out.values = Matrix::Constant(static_cast<Eigen::Index>(out.row_ids.size()),
                                static_cast<Eigen::Index>(out.col_ids.size()),
                                std::numeric_limits<double>::quiet_NaN());
  for (const auto& [key, v] : cells) {
    out.values(static_cast<Eigen::Index>(key.first), static_cast<Eigen::Index>(key.second)) = v;
  }
  std::string missing;
  std::size_t missing_count = 0;
  for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
      if (std::isnan(out.values(i, j)) &&
          !cells.count({static_cast<std::size_t>(i), static_cast<std::size_t>(j)})) {
        if (missing_count++ < 5) {
          missing += " (" + out.row_ids[static_cast<std::size_t>(i)] + ", " +
                     out.col_ids[static_cast<std::size_t>(j)] + ")";
        }
      }
    }
  }
  if (missing_count) {
    throw FormatError(path.string() + ": " + std::to_string(missing_count) +
                      " missing entries, e.g." + missing);
  }
  return out;
}

template <typename T>
T align_impl(const T& in, const std::vector<std::string>& in_rows,
             const std::vector<std::string>& in_cols, const Matrix& values,
             const std::vector<std::string>& rows, const std::vector<std::string>& cols,
             const char* what) {
  std::unordered_map<std::string, Eigen::Index> row_index, col_index;
  for (std::size_t i = 0; i < in_rows.size(); ++i) row_index.emplace(in_rows[i], static_cast<Eigen::Index>(i));
  for (std::size_t j = 0; j < in_cols.size(); ++j) col_index.emplace(in_cols[j], static_cast<Eigen::Index>(j));
  std::string orphans;
  auto note = [&](const std::string& kind, const std::string& id) {
    orphans += "\n  " + kind + " '" + id + "'";
  };
  for (const auto& id : rows) {
    if (!row_index.count(id)) note(std::string("dataset missing from ") + what, id);
  }
  for (const auto& id : cols) {
    if (!col_index.count(id)) note(std::string("workflow missing from ") + what, id);
  }
  {
    std::unordered_map<std::string, bool> want_rows, want_cols;
    for (const auto& id : rows) want_rows[id] = true;
    for (const auto& id : cols) want_cols[id] = true;
    for (const auto& id : in_rows) {
      if (!want_rows.count(id)) note(std::string("dataset only in ") + what, id);
    }
    for (const auto& id : in_cols) {
      if (!want_cols.count(id)) note(std::string("workflow only in ") + what, id);
    }
  }
  if (!orphans.empty()) throw FormatError(std::string("mismatched ids:") + orphans);
  T out = in;
  Matrix aligned(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      aligned(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          values(row_index.at(rows[i]), col_index.at(cols[j]));
    }
  }
  if constexpr (std::is_same_v<T, PerformanceMatrix>) {
    out.values = std::move(aligned);
  } else {
    out.scores = std::move(aligned);
  }
  out.dataset_ids = rows;
  out.workflow_ids = cols;
  return out;
}

}  // namespace

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  CsvTable table;
  std::string line;
  bool have_header = false;
  char delim = path.extension() == ".tsv" ? '\t' : ',';
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
          static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
      }
      if (line.empty()) continue;
      if (delim == ',' && line.find(',') == std::string::npos && line.find('\t') != std::string::npos) {
        delim = '\t';
      }
      table.header = split_line(line, delim);
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    table.rows.push_back(split_line(line, delim));
  }
  if (!have_header) throw FormatError(path.string() + ": empty file, header row required");
  return table;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string() + ": cannot write file");
  auto emit = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << quote_if_needed(fields[i]);
    }
    out << '\n';
  };
  emit(table.header);
  for (const auto& row : table.rows) emit(row);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

DescriptorTable read_descriptors(const fs::path& path, EntityKind kind) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 2) {
    throw FormatError(path.string() + ": header row needs an id column and at least one feature");
  }
  // A header whose feature columns all parse as numbers is a data row.
  bool numeric_header = true;
  for (std::size_t c = 1; c < t.header.size(); ++c) {
    double v = 0.0;
    numeric_header = numeric_header && parse_double(t.header[c], v);
  }
  if (numeric_header) throw FormatError(path.string() + ": missing header row");
  check_width(t, path, t.header.size());

  DescriptorTable table;
  table.kind = kind;
  table.feature_names.assign(t.header.begin() + 1, t.header.end());
  table.features.resize(static_cast<Eigen::Index>(t.rows.size()),
                        static_cast<Eigen::Index>(table.feature_names.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    table.entity_ids.push_back(t.rows[r][0]);
    for (std::size_t c = 1; c < t.header.size(); ++c) {
      table.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) =
          number(t.rows[r][c], path, r + 2, c + 1);
    }
  }
  return table;
}

void write_descriptors(const fs::path& path, const DescriptorTable& table) {
  CsvTable t;
  t.header.push_back("id");
  t.header.insert(t.header.end(), table.feature_names.begin(), table.feature_names.end());
  for (std::size_t i = 0; i < table.entity_ids.size(); ++i) {
    std::vector<std::string> row{table.entity_ids[i]};
    for (Eigen::Index j = 0; j < table.features.cols(); ++j) {
      row.push_back(format_double(table.features(static_cast<Eigen::Index>(i), j)));
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

PerformanceMatrix read_performance(const fs::path& path) {
  LongMatrix m = read_long(path, {"dataset_id", "workflow_id", "performance"});
  return PerformanceMatrix{std::move(m.row_ids), std::move(m.col_ids), std::move(m.values)};
}

namespace {

void write_long(const fs::path& path, const std::string& value_name,
                const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                const Matrix& values) {
  CsvTable t;
  t.header = {"dataset_id", "workflow_id", value_name};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      t.rows.push_back({rows[i], cols[j],
                        format_double(values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))});
    }
  }
  write_csv(path, t);
}

}  // namespace

void write_performance(const fs::path& path, const PerformanceMatrix& p) {
  write_long(path, "performance", p.dataset_ids, p.workflow_ids, p.values);
}

PreferenceMatrix read_preference(const fs::path& path) {
  LongMatrix m = read_long(path, {"dataset_id", "workflow_id", "score"});
  return PreferenceMatrix{std::move(m.row_ids), std::move(m.col_ids), std::move(m.values)};
}

void write_preference(const fs::path& path, const PreferenceMatrix& r) {
  write_long(path, "score", r.dataset_ids, r.workflow_ids, r.scores);
}

OutcomeSlice read_outcomes(const fs::path& path, const std::string& dataset_id,
                           std::vector<std::string>& workflow_ids) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 2) throw FormatError(path.string() + ": need at least two workflow columns");
  if (workflow_ids.empty()) {
    workflow_ids = t.header;
  } else if (workflow_ids != t.header) {
    throw FormatError(path.string() + ": workflow columns differ from the other outcome files");
  }
  check_width(t, path, t.header.size());
  OutcomeSlice slice{dataset_id, {}};
  slice.correct.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      const std::string& v = t.rows[r][c];
      if (v != "0" && v != "1") {
        throw FormatError(path.string() + ": line " + std::to_string(r + 2) + ", column " +
                          std::to_string(c + 1) + ": expected 0 or 1, got '" + v + "'");
      }
      slice.correct(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v == "1" ? 1 : 0;
    }
  }
  if (t.rows.empty()) throw FormatError(path.string() + ": no instances");
  return slice;
}

void write_outcomes(const fs::path& path, const OutcomeSlice& slice,
                    const std::vector<std::string>& workflow_ids) {
  CsvTable t;
  t.header = workflow_ids;
  for (Eigen::Index r = 0; r < slice.correct.rows(); ++r) {
    std::vector<std::string> row;
    for (Eigen::Index c = 0; c < slice.correct.cols(); ++c) row.push_back(slice.correct(r, c) ? "1" : "0");
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

OutcomeCube read_outcome_cube(const fs::path& dir, const std::vector<std::string>& dataset_ids) {
  OutcomeCube cube;
  for (const auto& id : dataset_ids) {
    cube.datasets.push_back(read_outcomes(dir / (id + ".csv"), id, cube.workflow_ids));
  }
  return cube;
}

SignificanceTensor read_significance(const fs::path& path,
                                     const std::vector<std::string>& workflow_ids) {
  const CsvTable t = read_csv(path);
  require_header(t, path, {"dataset_id", "workflow_k", "workflow_l", "outcome"});
  check_width(t, path, 4);
  std::unordered_map<std::string, std::size_t> wf_index;
  for (std::size_t j = 0; j < workflow_ids.size(); ++j) wf_index.emplace(workflow_ids[j], j);
  const std::size_t m = workflow_ids.size();

  SignificanceTensor tensor;
  tensor.workflow_ids = workflow_ids;
  std::unordered_map<std::string, std::size_t> ds_index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    auto [it, inserted] = ds_index.emplace(f[0], tensor.datasets.size());
    if (inserted) {
      tensor.datasets.push_back({f[0], m, std::vector<PairOutcome>(m * m, PairOutcome::Tie)});
    }
    const auto k = wf_index.find(f[1]);
    const auto l = wf_index.find(f[2]);
    if (k == wf_index.end() || l == wf_index.end() || k->second == l->second) {
      throw FormatError(path.string() + ": line " + std::to_string(r + 2) +
                        ": unknown or repeated workflow pair");
    }
    PairOutcome outcome;
    try {
      outcome = pair_outcome_from_string(f[3]);
    } catch (const Error&) {
      throw FormatError(path.string() + ": line " + std::to_string(r + 2) + ": bad outcome '" +
                        f[3] + "'");
    }
    std::size_t a = k->second;
    std::size_t b = l->second;
    if (a > b) {
      std::swap(a, b);
      if (outcome == PairOutcome::KWins) {
        outcome = PairOutcome::LWins;
      } else if (outcome == PairOutcome::LWins) {
        outcome = PairOutcome::KWins;
      }
    }
    tensor.datasets[it->second].set(a, b, outcome);
  }
  return tensor;
}

void write_significance(const fs::path& path, const SignificanceTensor& tensor) {
  CsvTable t;
  t.header = {"dataset_id", "workflow_k", "workflow_l", "outcome"};
  for (const auto& table : tensor.datasets) {
    for (std::size_t k = 0; k < table.m; ++k) {
      for (std::size_t l = k + 1; l < table.m; ++l) {
        t.rows.push_back({table.dataset_id, tensor.workflow_ids[k], tensor.workflow_ids[l],
                          to_string(table.at(k, l))});
      }
    }
  }
  write_csv(path, t);
}

PerformanceMatrix align(const PerformanceMatrix& p, const std::vector<std::string>& dataset_ids,
                        const std::vector<std::string>& workflow_ids) {
  return align_impl(p, p.dataset_ids, p.workflow_ids, p.values, dataset_ids, workflow_ids,
                    "performance");
}

PreferenceMatrix align(const PreferenceMatrix& r, const std::vector<std::string>& dataset_ids,
                       const std::vector<std::string>& workflow_ids) {
  return align_impl(r, r.dataset_ids, r.workflow_ids, r.scores, dataset_ids, workflow_ids,
                    "preference");
}

}  // namespace metamine::io
