// Regenerates the synthetic example datasets in data/. Usage:
//   make_example_data <output-dir>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include "oussm/io.hpp"
#include "oussm/random.hpp"
#include "oussm/simulate.hpp"

using namespace oussm;
namespace fs = std::filesystem;

namespace {

MatrixXd mat(Index rows, Index cols, std::initializer_list<double> v) {
  MatrixXd a(rows, cols);
  auto it = v.begin();
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = *it++;
  return a;
}

// Mostly daily sampling with occasional gaps of two to four days.
std::vector<double> irregular_days(Index count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> t{0.0};
  while (static_cast<Index>(t.size()) < count) {
    const double gap = rng.uniform() < 0.8 ? 1.0 : 2.0 + static_cast<double>(rng.below(3));
    t.push_back(t.back() + gap);
  }
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_example_data <output-dir>\n";
    return 1;
  }
  const fs::path dir(argv[1]);
  fs::create_directories(dir);

  // Two real rates with correlated diffusion.
  OussmParams real;
  real.theta = mat(2, 2, {1.0495, 0.0, 0.0, 0.0517});
  real.z = mat(2, 2, {1.0060, 0.1381, 0.3248, 0.3095});
  real.sigma = mat(2, 2, {1.0, -0.1620, -0.1620, 1.0});
  real.mu = VectorXd::Map(std::vector<double>{-2.5, -1.5}.data(), 2);
  real.h_diag = VectorXd::Constant(2, 0.1);

  // Complex pair, unit diffusion.
  OussmParams cplx;
  cplx.theta = mat(2, 2, {0.9883, 0.1981, -0.1981, 0.6960});
  cplx.z = mat(2, 2, {0.3588, 0.6064, -0.1747, 0.6417});
  cplx.sigma = MatrixXd::Identity(2, 2);
  cplx.mu = VectorXd::Map(std::vector<double>{-3.0, -2.0}.data(), 2);
  cplx.h_diag = VectorXd::Constant(2, 0.1);

  const std::vector<double> gut_times = irregular_days(336, 11);
  const Simulation a = simulate(real, gut_times, 101);
  const Simulation b = simulate(cplx, gut_times, 202);
  write_series((dir / "gut_real_roots.csv").string(), a.series, {"genus_a", "genus_b"}, "day");
  write_series((dir / "gut_complex_roots.csv").string(), b.series, {"genus_c", "genus_d"},
               "day");
  write_json((dir / "gut_real_roots_params.json").string(), params_to_json(real));
  write_json((dir / "gut_complex_roots_params.json").string(), params_to_json(cplx));

  // Raw counts whose log-ratios against the reference follow the first model.
  {
    Rng rng(303);
    std::ofstream out(dir / "gut_counts.csv");
    out << "day,genus_a,genus_b,reference_total\n";
    for (Index i = 0; i < a.series.rows(); ++i) {
      const double ref = std::round(5000.0 * std::exp(0.3 * rng.normal()));
      out << format_double(a.series.times[static_cast<std::size_t>(i)]);
      for (Index j = 0; j < 2; ++j) {
        out << ',' << format_double(std::round(ref * std::exp(a.series.values(i, j))));
      }
      out << ',' << format_double(ref) << '\n';
    }
  }

  // Daily temperatures over five years: annual cycle plus a two-rate
  // anomaly process observed at three sites.
  {
    OussmParams sst;
    sst.theta = mat(2, 2, {0.3684, 0.0, 0.0, 0.0365});
    sst.z = mat(3, 2, {0.30, 0.25, 0.28, 0.30, 0.20, 0.35});
    sst.sigma = MatrixXd::Identity(2, 2);
    sst.mu = VectorXd::Zero(3);
    sst.h_diag = VectorXd::Constant(3, 0.01);
    using namespace std::chrono;
    const sys_days first{year{2020} / January / 1};
    const sys_days last{year{2024} / December / 31};
    const Index n = (last - first).count() + 1;
    const Simulation s = simulate(sst, regular_times(n, 1.0), 404);
    std::ofstream out(dir / "sst_daily.csv");
    out << "date,site_1,site_2,site_3\n";
    const double base[3] = {294.0, 293.2, 292.5};
    for (Index i = 0; i < n; ++i) {
      const year_month_day d{first + days{i}};
      const double phase = 2.0 * std::numbers::pi * (pooled_day_of_year(d) - 230) / 365.0;
      char date[16];
      std::snprintf(date, sizeof date, "%04d-%02u-%02u", static_cast<int>(d.year()),
                    static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
      out << date;
      for (Index j = 0; j < 3; ++j) {
        out << ',' << format_double(base[j] + 4.0 * std::cos(phase) + s.series.values(i, j));
      }
      out << '\n';
    }
  }
  std::cout << "wrote example data to " << dir.string() << "\n";
  return 0;
}
