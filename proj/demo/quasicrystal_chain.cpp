// Projects a strip of the square lattice onto an irrational line and onto a
// rational one, then contrasts the two spacing sequences: the golden slope
// never repeats, the rational slope settles into a period.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <vector>

#include "anelkin/document.hpp"
#include "anelkin/lattice.hpp"

using namespace anelkin;

namespace {

std::vector<double> spacings(const std::vector<Eigen::VectorXd>& pts) {
  std::vector<double> gaps;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    gaps.push_back(pts[i + 1](0) - pts[i](0));
  return gaps;
}

void summarize(const char* name, const std::vector<Eigen::VectorXd>& pts) {
  const auto gaps = spacings(pts);
  std::map<long long, std::size_t> histogram;
  for (double g : gaps) histogram[llround(g * 1e9)] += 1;
  std::printf("%s: %zu points, %zu distinct spacings\n", name, pts.size(),
              histogram.size());
  for (const auto& [key, count] : histogram)
    std::printf("  spacing %.9f  x%zu\n", double(key) * 1e-9, count);
}

}  // namespace

int main() {
  const double phi = 1.6180339887498949;

  Eigen::MatrixXd golden(2, 1);
  golden << phi, 1.0;
  auto [glo, ghi] = canonical_window_1d(golden);
  CutProjectSpec spec;
  spec.physical_dim = 1;
  spec.parallel_frame = golden;
  spec.window_lo = Eigen::VectorXd::Constant(1, glo);
  spec.window_hi = Eigen::VectorXd::Constant(1, ghi);
  spec.extent_lo = Eigen::VectorXd::Constant(1, 0.0);
  spec.extent_hi = Eigen::VectorXd::Constant(1, 200.0);
  const auto fib = cut_and_project(spec);
  summarize("golden slope", fib);

  const auto gaps = spacings(fib);
  const double split = 0.5 * (*std::min_element(gaps.begin(), gaps.end()) +
                              *std::max_element(gaps.begin(), gaps.end()));
  std::size_t longs = 0, shorts = 0;
  for (double g : gaps) (g > split ? longs : shorts) += 1;
  std::printf("  long/short count ratio %.6f (phi = %.6f)\n\n",
              double(longs) / double(shorts), phi);

  Eigen::MatrixXd rational(2, 1);
  rational << 2.0, 1.0;
  auto [rlo, rhi] = canonical_window_1d(rational);
  spec.parallel_frame = rational;
  spec.window_lo = Eigen::VectorXd::Constant(1, rlo);
  spec.window_hi = Eigen::VectorXd::Constant(1, rhi);
  const auto periodic = cut_and_project(spec);
  summarize("slope 1/2", periodic);
  std::printf("  first twelve gaps:");
  const auto rgaps = spacings(periodic);
  for (std::size_t i = 0; i < 12 && i < rgaps.size(); ++i)
    std::printf(" %.4f", rgaps[i]);
  std::printf("\n\n");

  std::ofstream("chain.csv", std::ios::binary) << emit_points_csv(fib);
  std::printf("wrote chain.csv (%zu points)\n", fib.size());
  return 0;
}
