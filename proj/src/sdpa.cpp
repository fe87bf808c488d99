#include "pcdm/sdpa.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "pcdm/errors.hpp"

namespace pcdm {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_tokens(std::string line) {
  for (char& ch : line) {
    if (ch == '{' || ch == '}' || ch == '(' || ch == ')' || ch == ',') ch = ' ';
  }
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw InputError("parse_sdpa: bad number '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const double v = to_double(s);
  if (v != static_cast<int>(v)) throw InputError("parse_sdpa: expected integer, got '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace

std::string write_sdpa(const SdpaProblem& problem) {
  std::ostringstream os;
  for (const auto& c : problem.comments) os << "* " << c << '\n';
  os << problem.variable_count << " = mDIM\n";
  os << problem.block_sizes.size() << " = nBLOCK\n";
  for (size_t b = 0; b < problem.block_sizes.size(); ++b) os << (b ? " " : "") << problem.block_sizes[b];
  os << " = bLOCKsTRUCT\n";
  for (Eigen::Index k = 0; k < problem.objective.size(); ++k) os << (k ? " " : "") << format_double(problem.objective[k]);
  os << '\n';
  for (const auto& e : problem.entries) {
    os << e.matrix << ' ' << e.block << ' ' << e.row << ' ' << e.col << ' ' << format_double(e.value) << '\n';
  }
  return os.str();
}

SdpaProblem parse_sdpa(std::string_view text) {
  SdpaProblem p;
  std::istringstream is{std::string(text)};
  std::string line;
  bool header = true;
  std::vector<std::string> pending;  // numeric tokens of the header section
  int stage = 0;
  while (std::getline(is, line)) {
    if (header && !line.empty() && (line[0] == '*' || line[0] == '"')) {
      std::string c = line.substr(1);
      if (!c.empty() && c[0] == ' ') c.erase(0, 1);
      p.comments.push_back(c);
      continue;
    }
    header = false;
    if (const auto eq = line.find('='); eq != std::string::npos) line.erase(eq);
    auto toks = split_tokens(line);
    if (toks.empty()) continue;
    if (stage == 0) {
      p.variable_count = to_int(toks[0]);
      stage = 1;
    } else if (stage == 1) {
      p.block_sizes.resize(static_cast<size_t>(to_int(toks[0])));
      stage = 2;
    } else if (stage == 2) {
      for (const auto& t : toks) pending.push_back(t);
      if (pending.size() >= p.block_sizes.size()) {
        for (size_t b = 0; b < p.block_sizes.size(); ++b) p.block_sizes[b] = to_int(pending[b]);
        pending.clear();
        stage = 3;
      }
    } else if (stage == 3) {
      for (const auto& t : toks) pending.push_back(t);
      if (static_cast<int>(pending.size()) >= p.variable_count) {
        p.objective.resize(p.variable_count);
        for (int k = 0; k < p.variable_count; ++k) p.objective[k] = to_double(pending[static_cast<size_t>(k)]);
        stage = 4;
      }
    } else {
      if (toks.size() != 5) throw InputError("parse_sdpa: entry line needs 5 fields");
      SdpaEntry e{to_int(toks[0]), to_int(toks[1]), to_int(toks[2]), to_int(toks[3]), to_double(toks[4])};
      if (e.matrix < 0 || e.matrix > p.variable_count || e.block < 1 ||
          e.block > static_cast<int>(p.block_sizes.size())) {
        throw InputError("parse_sdpa: entry index out of range");
      }
      const int size = std::abs(p.block_sizes[static_cast<size_t>(e.block - 1)]);
      if (e.row < 1 || e.col < 1 || e.row > size || e.col > size) throw InputError("parse_sdpa: entry outside block");
      p.entries.push_back(e);
    }
  }
  if (stage < 4) throw InputError("parse_sdpa: truncated header");
  return p;
}

Eigen::MatrixXd sdpa_block_value(const SdpaProblem& problem, int block, const Eigen::VectorXd& x) {
  if (block < 1 || block > static_cast<int>(problem.block_sizes.size())) throw InputError("sdpa_block_value: bad block");
  if (x.size() != problem.variable_count) throw InputError("sdpa_block_value: x has wrong length");
  const int size = std::abs(problem.block_sizes[static_cast<size_t>(block - 1)]);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size, size);
  for (const auto& e : problem.entries) {
    if (e.block != block) continue;
    const double v = e.matrix == 0 ? -e.value : e.value * x[e.matrix - 1];
    out(e.row - 1, e.col - 1) += v;
    if (e.row != e.col) out(e.col - 1, e.row - 1) += v;
  }
  return out;
}

}  // namespace pcdm
