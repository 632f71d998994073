#pragma once

#include <chrono>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "oussm/canonical.hpp"
#include "oussm/kalman.hpp"
#include "oussm/modelsel.hpp"
#include "oussm/ou_core.hpp"

namespace oussm {

// ---------------------------------------------------------------------------
// CSV

struct CsvRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: comma separated, double-quoted fields may contain commas,
/// quotes ("") and newlines. Accepts LF and CRLF. Blank lines are skipped.
std::vector<CsvRecord> parse_csv(std::istream& in);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

/// Shortest form that round-trips exactly: %.17g.
std::string format_double(double x);

// ---------------------------------------------------------------------------
// Series files: header row, column 1 = time, columns 2.. = observations.
// A row whose observation cells are all empty is a missing row.

struct LabeledSeries {
  TimeSeries series;
  std::vector<std::string> labels;  // observation column names
};

LabeledSeries parse_series(std::istream& in, const std::string& source = "<stream>");
LabeledSeries read_series_labeled(const std::string& path);
TimeSeries read_series(const std::string& path);

void write_series(std::ostream& out, const TimeSeries& series,
                  const std::vector<std::string>& labels = {},
                  const std::string& time_label = "time");
void write_series(const std::string& path, const TimeSeries& series,
                  const std::vector<std::string>& labels = {},
                  const std::string& time_label = "time");

/// Default observation labels y1..yp.
std::vector<std::string> default_labels(Index p);

// ---------------------------------------------------------------------------
// Parameter files (JSON, format_version 1). Matrices are arrays of rows.

inline constexpr int kParamsFormatVersion = 1;

nlohmann::json params_to_json(const OussmParams& params);
/// Reads theta, z, mu, h_diag and optional sigma (default identity). Other
/// keys are ignored so that fit reports reload as parameter files.
OussmParams params_from_json(const nlohmann::json& j);
OussmParams read_params(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

nlohmann::json matrix_to_json(const MatrixXd& a);
MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& name);
nlohmann::json block_form_to_json(const BlockForm& bf);
nlohmann::json spectral_to_json(const SpectralSummary& s);

// ---------------------------------------------------------------------------
// Preprocessing

/// Count table: column 1 time, then p taxa, with one of the columns being the
/// reference total.
struct RawCounts {
  std::vector<double> times;
  MatrixXd counts;  // (N+1) x (p+1), reference column included
  std::vector<std::string> labels;
  Index reference = 0;  // column index of the reference inside `counts`
};

RawCounts read_counts(const std::string& path, const std::string& reference_label = "");

/// y_nj = log((c_nj + pc) / (c_n,ref + pc)) for every non-reference column.
LabeledSeries logratio_transform(const RawCounts& raw, double pseudocount = 0.3);

struct DatedSeries {
  std::vector<std::chrono::year_month_day> dates;
  MatrixXd values;  // NaN marks missing
  std::vector<std::string> labels;
};

/// Column 1 holds ISO dates (YYYY-MM-DD).
DatedSeries parse_dated_series(std::istream& in, const std::string& source = "<stream>");
DatedSeries read_dated_series(const std::string& path);

/// Day of year in 1..365 with 29 February pooled into 28 February.
int pooled_day_of_year(const std::chrono::year_month_day& d);

struct Deseasonalized {
  LabeledSeries anomalies;  // time = days since the first date
  MatrixXd climatology;     // 365 x p, NaN where a day never occurs
  bool short_record = false;  // record spans fewer than two years
};

/// Subtracts the per-column day-of-year mean computed over the whole record.
Deseasonalized deseasonalize(const DatedSeries& series);

// ---------------------------------------------------------------------------
// Reports

void write_predictions(std::ostream& out, const std::vector<Prediction>& preds,
                       const TimeSeries& test, const std::vector<std::string>& labels);

void write_selection_csv(std::ostream& out, const SelectionTable& table);

/// Fixed-width text table, one row per m, minima marked with '*'.
std::string format_selection_table(const SelectionTable& table);

}  // namespace oussm
