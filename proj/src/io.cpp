#include "oussm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "oussm/errors.hpp"

namespace oussm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string where(const std::string& source, std::size_t line, std::size_t col) {
  return source + ": line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "N/A";
}

bool parse_number(const std::string& raw, double& out) {
  const std::string s = trim(raw);
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  return out;
}

// Header plus data records; checks the column count of every record.
std::vector<CsvRecord> read_table(std::istream& in, const std::string& source,
                                  std::size_t min_columns) {
  std::vector<CsvRecord> records;
  try {
    records = parse_csv(in);
  } catch (const InvalidInput& e) {
    throw InvalidInput(source + ": " + e.what());
  }
  if (records.empty()) throw InvalidInput(source + ": file is empty");
  const std::size_t width = records.front().fields.size();
  if (width < min_columns) {
    throw InvalidInput(source + ": header needs at least " + std::to_string(min_columns) +
                       " columns, found " + std::to_string(width));
  }
  for (const auto& rec : records) {
    if (rec.fields.size() != width) {
      throw InvalidInput(source + ": line " + std::to_string(rec.line) + " has " +
                         std::to_string(rec.fields.size()) + " fields, expected " +
                         std::to_string(width));
    }
  }
  if (records.size() < 2) throw InvalidInput(source + ": no data rows");
  return records;
}

// Reads the observation columns of a data row. Returns false for a fully
// missing row; a partially missing row is an error.
bool read_values(const CsvRecord& rec, const std::string& source, Eigen::Ref<VectorXd> out) {
  std::size_t n_missing = 0;
  for (std::size_t c = 1; c < rec.fields.size(); ++c) {
    if (is_missing_token(trim(rec.fields[c]))) ++n_missing;
  }
  const std::size_t n_values = rec.fields.size() - 1;
  if (n_missing == n_values) {
    out.setConstant(kNaN);
    return false;
  }
  for (std::size_t c = 1; c < rec.fields.size(); ++c) {
    const std::string cell = trim(rec.fields[c]);
    if (is_missing_token(cell)) {
      throw InvalidInput(where(source, rec.line, c + 1) +
                         ": missing value in a partially observed row (rows must be "
                         "fully observed or fully empty)");
    }
    double v = 0.0;
    if (!parse_number(cell, v)) {
      throw InvalidInput(where(source, rec.line, c + 1) + ": cannot parse '" + cell +
                         "' as a finite number");
    }
    out(static_cast<Index>(c - 1)) = v;
  }
  return true;
}

std::vector<std::string> header_labels(const CsvRecord& header) {
  std::vector<std::string> labels;
  for (std::size_t c = 1; c < header.fields.size(); ++c) labels.push_back(trim(header.fields[c]));
  return labels;
}

std::vector<double> vector_from_json(const nlohmann::json& j, const std::string& name) {
  if (!j.is_array()) throw InvalidInput("'" + name + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw InvalidInput("'" + name + "' must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV

std::vector<CsvRecord> parse_csv(std::istream& in) {
  std::vector<CsvRecord> records;
  CsvRecord rec;
  std::string field;
  std::size_t line = 1;
  std::size_t col = 1;
  bool in_quotes = false;
  bool after_quote = false;  // closing quote seen, expecting separator
  bool record_started = false;
  std::size_t quote_line = 0, quote_col = 0;

  auto end_field = [&] {
    rec.fields.push_back(std::move(field));
    field.clear();
    after_quote = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) records.push_back(std::move(rec));
    rec = CsvRecord{};
    record_started = false;
  };

  char ch = 0;
  while (in.get(ch)) {
    if (!record_started) {
      rec.line = line;
      record_started = true;
    }
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
          ++col;
        } else {
          in_quotes = false;
          after_quote = true;
        }
      } else {
        field.push_back(ch);
        if (ch == '\n') {
          ++line;
          col = 0;
        }
      }
      ++col;
      continue;
    }
    if (ch == ',') {
      end_field();
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && in.peek() == '\n') in.get(ch);
      end_record();
      ++line;
      col = 0;
    } else if (ch == '"') {
      if (!field.empty() || after_quote) {
        throw InvalidInput("line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ": unexpected quote inside a field");
      }
      in_quotes = true;
      quote_line = line;
      quote_col = col;
    } else {
      if (after_quote) {
        throw InvalidInput("line " + std::to_string(line) + ", column " +
                           std::to_string(col) + ": text after closing quote");
      }
      field.push_back(ch);
    }
    ++col;
  }
  if (in_quotes) {
    throw InvalidInput("line " + std::to_string(quote_line) + ", column " +
                       std::to_string(quote_col) + ": unterminated quoted field");
  }
  if (record_started) end_record();
  return records;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Series files

std::vector<std::string> default_labels(Index p) {
  std::vector<std::string> labels;
  for (Index j = 0; j < p; ++j) labels.push_back("y" + std::to_string(j + 1));
  return labels;
}

LabeledSeries parse_series(std::istream& in, const std::string& source) {
  const auto records = read_table(in, source, 2);
  LabeledSeries out;
  out.labels = header_labels(records.front());
  const Index n = static_cast<Index>(records.size() - 1);
  const Index p = static_cast<Index>(out.labels.size());
  std::vector<double> times;
  MatrixXd values(n, p);
  std::vector<char> missing(static_cast<std::size_t>(n), 0);
  bool any_missing = false;
  for (Index i = 0; i < n; ++i) {
    const CsvRecord& rec = records[static_cast<std::size_t>(i + 1)];
    double t = 0.0;
    if (!parse_number(rec.fields[0], t)) {
      throw InvalidInput(where(source, rec.line, 1) + ": cannot parse time '" +
                         trim(rec.fields[0]) + "'");
    }
    if (!times.empty() && !(t > times.back())) {
      throw InvalidInput(where(source, rec.line, 1) + ": time " + format_double(t) +
                         " is not greater than the previous time (data row " +
                         std::to_string(i + 1) + ")");
    }
    times.push_back(t);
    VectorXd row(p);
    if (!read_values(rec, source, row)) {
      missing[static_cast<std::size_t>(i)] = 1;
      any_missing = true;
    }
    values.row(i) = row.transpose();
  }
  out.series.times = std::move(times);
  out.series.values = std::move(values);
  if (any_missing) out.series.missing = std::move(missing);
  if (out.series.observed_rows() == 0) throw InvalidInput(source + ": every row is missing");
  return out;
}

LabeledSeries read_series_labeled(const std::string& path) {
  std::ifstream in = open_input(path);
  return parse_series(in, path);
}

TimeSeries read_series(const std::string& path) { return read_series_labeled(path).series; }

void write_series(std::ostream& out, const TimeSeries& series,
                  const std::vector<std::string>& labels, const std::string& time_label) {
  const Index p = series.dim();
  const std::vector<std::string> names = labels.empty() ? default_labels(p) : labels;
  if (static_cast<Index>(names.size()) != p) {
    throw InvalidInput("label count differs from series dimension");
  }
  out << csv_escape(time_label);
  for (const auto& name : names) out << ',' << csv_escape(name);
  out << '\n';
  for (Index i = 0; i < series.rows(); ++i) {
    out << format_double(series.times[static_cast<std::size_t>(i)]);
    const bool miss = series.is_missing(i);
    for (Index j = 0; j < p; ++j) {
      out << ',';
      if (!miss) out << format_double(series.values(i, j));
    }
    out << '\n';
  }
}

void write_series(const std::string& path, const TimeSeries& series,
                  const std::vector<std::string>& labels, const std::string& time_label) {
  std::ofstream out = open_output(path);
  write_series(out, series, labels, time_label);
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json matrix_to_json(const MatrixXd& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < a.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& name) {
  if (!j.is_array() || j.empty()) {
    throw InvalidInput("'" + name + "' must be a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  MatrixXd out;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::vector<double> row = vector_from_json(j[i], name + "[" + std::to_string(i) + "]");
    if (i == 0) {
      cols = row.size();
      if (cols == 0) throw InvalidInput("'" + name + "' has an empty row");
      out.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    } else if (row.size() != cols) {
      throw InvalidInput("'" + name + "' rows have different lengths");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Index>(i), static_cast<Index>(c)) = row[c];
    }
  }
  return out;
}

nlohmann::json params_to_json(const OussmParams& params) {
  nlohmann::json j;
  j["format_version"] = kParamsFormatVersion;
  j["m"] = params.m();
  j["p"] = params.p();
  j["theta"] = matrix_to_json(params.theta);
  j["z"] = matrix_to_json(params.z);
  j["mu"] = std::vector<double>(params.mu.data(), params.mu.data() + params.mu.size());
  j["h_diag"] =
      std::vector<double>(params.h_diag.data(), params.h_diag.data() + params.h_diag.size());
  j["sigma"] = matrix_to_json(params.sigma);
  return j;
}

OussmParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidInput("parameter file must hold a JSON object");
  if (j.contains("format_version")) {
    if (!j["format_version"].is_number_integer() ||
        j["format_version"].get<int>() != kParamsFormatVersion) {
      throw InvalidInput("unsupported parameter format_version");
    }
  }
  for (const char* key : {"theta", "z", "mu", "h_diag"}) {
    if (!j.contains(key)) throw InvalidInput(std::string("parameter file lacks '") + key + "'");
  }
  OussmParams p;
  p.theta = matrix_from_json(j["theta"], "theta");
  p.z = matrix_from_json(j["z"], "z");
  const auto mu = vector_from_json(j["mu"], "mu");
  const auto h = vector_from_json(j["h_diag"], "h_diag");
  p.mu = Eigen::Map<const VectorXd>(mu.data(), static_cast<Index>(mu.size()));
  p.h_diag = Eigen::Map<const VectorXd>(h.data(), static_cast<Index>(h.size()));
  if (j.contains("sigma") && !j["sigma"].is_null()) {
    p.sigma = matrix_from_json(j["sigma"], "sigma");
  } else {
    p.sigma = MatrixXd::Identity(p.theta.rows(), p.theta.rows());
  }
  if (j.contains("m") && j["m"].is_number_integer() && j["m"].get<Index>() != p.m()) {
    throw InvalidInput("'m' does not match the size of theta");
  }
  if (j.contains("p") && j["p"].is_number_integer() && j["p"].get<Index>() != p.p()) {
    throw InvalidInput("'p' does not match the number of rows of z");
  }
  validate_model(p);
  return p;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in = open_input(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

OussmParams read_params(const std::string& path) {
  const nlohmann::json j = read_json(path);
  try {
    return params_from_json(j);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

nlohmann::json block_form_to_json(const BlockForm& bf) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : bf.blocks) {
    blocks.push_back({{"offset", b.offset}, {"size", b.size}, {"real", b.real}, {"imag", b.imag}});
  }
  return {{"transform", matrix_to_json(bf.transform)},
          {"theta_block", matrix_to_json(bf.theta_block)},
          {"z", matrix_to_json(bf.z_transformed)},
          {"sigma", matrix_to_json(bf.sigma_transformed)},
          {"blocks", blocks}};
}

nlohmann::json spectral_to_json(const SpectralSummary& s) {
  nlohmann::json eig = nlohmann::json::array();
  for (const auto& l : s.eigenvalues) eig.push_back({{"real", l.real()}, {"imag", l.imag()}});
  nlohmann::json j = {{"eigenvalues", eig},
                      {"max_modulus", s.max_modulus},
                      {"kind", to_string(s.kind)}};
  if (s.eigenvalues.size() == 2) {
    j["squared_difference"] = {{"real", s.sq_diff.real()}, {"imag", s.sq_diff.imag()}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Preprocessing

RawCounts read_counts(const std::string& path, const std::string& reference_label) {
  std::ifstream in = open_input(path);
  const auto records = read_table(in, path, 3);
  RawCounts raw;
  raw.labels = header_labels(records.front());
  const Index cols = static_cast<Index>(raw.labels.size());
  raw.reference = cols - 1;
  if (!reference_label.empty()) {
    raw.reference = -1;
    for (Index c = 0; c < cols; ++c) {
      if (raw.labels[static_cast<std::size_t>(c)] == reference_label) raw.reference = c;
    }
    if (raw.reference < 0) {
      throw InvalidInput(path + ": no column named '" + reference_label + "'");
    }
  }
  const Index n = static_cast<Index>(records.size() - 1);
  raw.counts.resize(n, cols);
  for (Index i = 0; i < n; ++i) {
    const CsvRecord& rec = records[static_cast<std::size_t>(i + 1)];
    double t = 0.0;
    if (!parse_number(rec.fields[0], t)) {
      throw InvalidInput(where(path, rec.line, 1) + ": cannot parse time '" +
                         trim(rec.fields[0]) + "'");
    }
    if (!raw.times.empty() && !(t > raw.times.back())) {
      throw InvalidInput(where(path, rec.line, 1) + ": time is not greater than the previous "
                         "time (data row " + std::to_string(i + 1) + ")");
    }
    raw.times.push_back(t);
    VectorXd row(cols);
    if (read_values(rec, path, row)) {
      for (Index c = 0; c < cols; ++c) {
        if (row(c) < 0.0) {
          throw InvalidInput(where(path, rec.line, static_cast<std::size_t>(c) + 2) +
                             ": counts must be non-negative");
        }
      }
    }
    raw.counts.row(i) = row.transpose();
  }
  return raw;
}

LabeledSeries logratio_transform(const RawCounts& raw, double pseudocount) {
  if (!(pseudocount > 0.0) || !std::isfinite(pseudocount)) {
    throw InvalidInput("pseudocount must be positive");
  }
  const Index cols = raw.counts.cols();
  if (cols < 2) throw InvalidInput("need at least one taxon besides the reference");
  if (raw.reference < 0 || raw.reference >= cols) throw InvalidInput("invalid reference column");
  if (static_cast<Index>(raw.times.size()) != raw.counts.rows()) {
    throw InvalidInput("count table has inconsistent row count");
  }
  const Index n = raw.counts.rows();
  MatrixXd y(n, cols - 1);
  LabeledSeries out;
  for (Index c = 0; c < cols; ++c) {
    if (c != raw.reference && static_cast<std::size_t>(c) < raw.labels.size()) {
      out.labels.push_back(raw.labels[static_cast<std::size_t>(c)]);
    }
  }
  for (Index i = 0; i < n; ++i) {
    const double ref = raw.counts(i, raw.reference);
    Index k = 0;
    for (Index c = 0; c < cols; ++c) {
      if (c == raw.reference) continue;
      y(i, k++) = std::log((raw.counts(i, c) + pseudocount) / (ref + pseudocount));
    }
  }
  out.series = make_series(raw.times, std::move(y));
  if (out.labels.size() != static_cast<std::size_t>(cols - 1)) {
    out.labels = default_labels(cols - 1);
  }
  validate_series(out.series);
  return out;
}

DatedSeries parse_dated_series(std::istream& in, const std::string& source) {
  const auto records = read_table(in, source, 2);
  DatedSeries out;
  out.labels = header_labels(records.front());
  const Index n = static_cast<Index>(records.size() - 1);
  const Index p = static_cast<Index>(out.labels.size());
  out.values.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    const CsvRecord& rec = records[static_cast<std::size_t>(i + 1)];
    const std::string text = trim(rec.fields[0]);
    int y = 0;
    unsigned mo = 0, d = 0;
    char tail = 0;
    const bool shape_ok = text.size() == 10 && text[4] == '-' && text[7] == '-' &&
                          std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &mo, &d, &tail) == 3;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                          std::chrono::day{d}};
    if (!shape_ok || !ymd.ok()) {
      throw InvalidInput(where(source, rec.line, 1) + ": '" + text +
                         "' is not a valid YYYY-MM-DD date");
    }
    if (!out.dates.empty() &&
        !(std::chrono::sys_days{ymd} > std::chrono::sys_days{out.dates.back()})) {
      throw InvalidInput(where(source, rec.line, 1) + ": date " + text +
                         " is not after the previous date (data row " +
                         std::to_string(i + 1) + ")");
    }
    out.dates.push_back(ymd);
    VectorXd row(p);
    read_values(rec, source, row);
    out.values.row(i) = row.transpose();
  }
  return out;
}

DatedSeries read_dated_series(const std::string& path) {
  std::ifstream in = open_input(path);
  return parse_dated_series(in, path);
}

int pooled_day_of_year(const std::chrono::year_month_day& d) {
  using namespace std::chrono;
  static constexpr int kCumulative[12] = {0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334};
  const int month = static_cast<int>(static_cast<unsigned>(d.month()));
  int day = static_cast<int>(static_cast<unsigned>(d.day()));
  if (month == 2 && day == 29) day = 28;
  return kCumulative[month - 1] + day;
}

Deseasonalized deseasonalize(const DatedSeries& series) {
  const Index n = series.values.rows();
  const Index p = series.values.cols();
  if (n == 0 || p == 0) throw InvalidInput("empty dated series");
  if (static_cast<Index>(series.dates.size()) != n) {
    throw InvalidInput("date count differs from value rows");
  }
  MatrixXd sum = MatrixXd::Zero(365, p);
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(365, p);
  std::vector<int> doy(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int d = pooled_day_of_year(series.dates[static_cast<std::size_t>(i)]) - 1;
    doy[static_cast<std::size_t>(i)] = d;
    for (Index j = 0; j < p; ++j) {
      const double v = series.values(i, j);
      if (std::isnan(v)) continue;
      sum(d, j) += v;
      count(d, j) += 1;
    }
  }
  Deseasonalized out;
  out.climatology = MatrixXd::Constant(365, p, kNaN);
  for (Index d = 0; d < 365; ++d) {
    for (Index j = 0; j < p; ++j) {
      if (count(d, j) > 0) out.climatology(d, j) = sum(d, j) / count(d, j);
    }
  }
  const std::chrono::sys_days first{series.dates.front()};
  std::vector<double> times;
  MatrixXd anomalies(n, p);
  for (Index i = 0; i < n; ++i) {
    const std::chrono::sys_days day{series.dates[static_cast<std::size_t>(i)]};
    times.push_back(static_cast<double>((day - first).count()));
    anomalies.row(i) = series.values.row(i) - out.climatology.row(doy[static_cast<std::size_t>(i)]);
  }
  const std::chrono::sys_days last{series.dates.back()};
  out.short_record = (last - first).count() < 730;
  out.anomalies.series = make_series(std::move(times), std::move(anomalies));
  out.anomalies.labels = series.labels;
  validate_series(out.anomalies.series);
  return out;
}

// ---------------------------------------------------------------------------
// Reports

void write_predictions(std::ostream& out, const std::vector<Prediction>& preds,
                       const TimeSeries& test, const std::vector<std::string>& labels) {
  if (static_cast<Index>(preds.size()) != test.rows()) {
    throw InvalidInput("prediction count differs from test rows");
  }
  const Index p = test.dim();
  const std::vector<std::string> names = labels.empty() ? default_labels(p) : labels;
  out << "time,series,observed,mean,lower95,upper95\n";
  for (Index i = 0; i < test.rows(); ++i) {
    const Prediction& pr = preds[static_cast<std::size_t>(i)];
    for (Index j = 0; j < p; ++j) {
      out << format_double(pr.time) << ',' << csv_escape(names[static_cast<std::size_t>(j)])
          << ',';
      if (!test.is_missing(i)) out << format_double(test.values(i, j));
      out << ',' << format_double(pr.mean(j)) << ',' << format_double(pr.lower95(j)) << ','
          << format_double(pr.upper95(j)) << '\n';
    }
  }
}

void write_selection_csv(std::ostream& out, const SelectionTable& table) {
  out << "m,k,n,available,loglik,aic,bic,converged,n_evals,refit,message\n";
  for (const auto& row : table.rows) {
    out << row.m << ',' << row.k << ',' << table.n << ',' << (row.available ? 1 : 0) << ',';
    if (row.available) {
      out << format_double(row.loglik) << ',' << format_double(row.aic) << ','
          << format_double(row.bic);
    } else {
      out << ",,";
    }
    out << ',' << (row.converged ? 1 : 0) << ',' << row.n_evals << ',' << (row.refit ? 1 : 0)
        << ',' << csv_escape(row.message) << '\n';
  }
}

std::string format_selection_table(const SelectionTable& table) {
  std::ostringstream os;
  os << std::setw(4) << "m" << std::setw(6) << "k" << std::setw(16) << "loglik"
     << std::setw(17) << "AIC" << std::setw(17) << "BIC" << '\n';
  os << std::fixed << std::setprecision(3);
  for (const auto& row : table.rows) {
    os << std::setw(4) << row.m << std::setw(6) << row.k;
    if (!row.available) {
      os << "  unavailable: " << row.message << '\n';
      continue;
    }
    os << std::setw(16) << row.loglik << std::setw(16) << row.aic
       << (row.m == table.argmin_aic ? '*' : ' ') << std::setw(16) << row.bic
       << (row.m == table.argmin_bic ? '*' : ' ') << '\n';
  }
  os << "n = " << table.n << " observed rows; * marks the minimum\n";
  return os.str();
}

}  // namespace oussm
