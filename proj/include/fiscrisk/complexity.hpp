#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace fiscrisk {

// Nonnegative country x activity matrix. Construction sorts countries and
// activities lexicographically and drops all-zero rows/columns, so every
// downstream computation is independent of input ordering.
struct ActivityMatrix {
  std::vector<std::string> countries;
  std::vector<std::string> activities;
  Eigen::MatrixXd values;  // rows = countries

  ActivityMatrix() = default;
  ActivityMatrix(std::vector<std::string> countries_,
                 std::vector<std::string> activities_, Eigen::MatrixXd values_);

  // Long-form triples (country, activity, value); duplicates sum.
  static ActivityMatrix from_triples(
      const std::vector<std::tuple<std::string, std::string, double>>& triples);
  static ActivityMatrix from_csv(std::istream& in,
                                 const std::string& stream_name = "<stream>");
  static ActivityMatrix from_csv_file(const std::string& path);
};

struct EciScores {
  std::map<std::string, double> scores;  // min-max normalized to [0, 1]
  std::map<std::string, double> raw;     // standardized (mean 0, sd 1)
  std::map<std::string, int> ranks;      // 1 = most complex
  bool degenerate = false;               // all raw scores equal
};

// Balassa revealed comparative advantage:
//   R[c,p] = (X[c,p] / sum_p X[c,p]) / (sum_c X[c,p] / sum X)
Eigen::MatrixXd rca(const ActivityMatrix& m);

// M[c,p] = 1 iff R[c,p] >= threshold. Throws Error(data) naming the country
// or activity if a row or column ends up all zero.
Eigen::MatrixXi binarize(const Eigen::MatrixXd& r, double threshold = 1.0,
                         const std::vector<std::string>& row_names = {},
                         const std::vector<std::string>& col_names = {});

// (row sums, column sums) of the 0/1 specialization matrix.
std::pair<Eigen::VectorXd, Eigen::VectorXd> diversity_ubiquity(
    const Eigen::MatrixXi& m);

// Eigenvector complexity scores: second eigenvector of
//   Mtilde[c,c'] = sum_p M[c,p] M[c',p] / (diversity[c] ubiquity[p]),
// standardized, sign-fixed against diversity, min-max mapped to [0,1].
EciScores eci_eigen(const Eigen::MatrixXi& m,
                    const std::vector<std::string>& countries);

// Alternating diversity/ubiquity averaging; returns the standardized
// country vector after `iterations` (even, >= 2) rounds. All-equal vectors
// standardize to zero.
Eigen::VectorXd method_of_reflections(const Eigen::MatrixXi& m, int iterations);

// rca -> binarize -> eci_eigen.
EciScores eci_from_raw(const ActivityMatrix& m, double threshold = 1.0);

void write_eci_csv(std::ostream& out, const EciScores& scores);

}  // namespace fiscrisk
