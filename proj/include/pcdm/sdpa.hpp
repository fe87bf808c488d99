#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pcdm {

/// One `<matno> <blkno> <i> <j> <value>` line (1-based, upper triangle).
struct SdpaEntry {
  int matrix = 0;
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;

  auto operator<=>(const SdpaEntry&) const = default;
};

/// SDPA sparse problem: minimize c'x s.t. sum_k F_k x_k - F_0 >= 0 blockwise.
/// Negative block sizes denote diagonal (LP) blocks.
struct SdpaProblem {
  std::vector<std::string> comments;
  int variable_count = 0;
  std::vector<int> block_sizes;
  Eigen::VectorXd objective;
  std::vector<SdpaEntry> entries;
};

std::string write_sdpa(const SdpaProblem& problem);

/// Reads the ".dat-s" layout written by write_sdpa (and by other SDPA
/// writers: braces, parentheses and commas are treated as separators).
SdpaProblem parse_sdpa(std::string_view text);

/// Evaluates block `block` (1-based) of sum_k F_k x_k - F_0 at x.
Eigen::MatrixXd sdpa_block_value(const SdpaProblem& problem, int block, const Eigen::VectorXd& x);

}  // namespace pcdm
