#include "fiscrisk/complexity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <tuple>

#include "fiscrisk/csv.hpp"
#include "fiscrisk/errors.hpp"

namespace fiscrisk {

namespace {

// permutation that sorts `names` ascending; duplicates rejected
std::vector<Eigen::Index> sort_order(const std::vector<std::string>& names,
                                     const char* what) {
  std::vector<Eigen::Index> order(names.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return names[a] < names[b];
  });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (names[order[i - 1]] == names[order[i]])
      fail(ErrorCategory::data,
           std::string("duplicate ") + what + " code '" + names[order[i]] + "'");
  return order;
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd da = a.array() - a.mean();
  Eigen::VectorXd db = b.array() - b.mean();
  double na = da.norm(), nb = db.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return da.dot(db) / (na * nb);
}

}  // namespace

ActivityMatrix::ActivityMatrix(std::vector<std::string> countries_,
                               std::vector<std::string> activities_,
                               Eigen::MatrixXd values_) {
  if (static_cast<Eigen::Index>(countries_.size()) != values_.rows() ||
      static_cast<Eigen::Index>(activities_.size()) != values_.cols())
    fail(ErrorCategory::invalid, "label counts do not match matrix shape");
  if (!values_.allFinite() || (values_.array() < 0.0).any())
    fail(ErrorCategory::data, "activity matrix entries must be finite and >= 0");

  auto row_order = sort_order(countries_, "country");
  auto col_order = sort_order(activities_, "activity");

  // drop all-zero rows/columns, then reorder into canonical sorted form
  Eigen::VectorXd row_sums = values_.rowwise().sum();
  Eigen::VectorXd col_sums = values_.colwise().sum();
  std::vector<Eigen::Index> keep_rows, keep_cols;
  for (Eigen::Index r : row_order)
    if (row_sums[r] > 0.0) keep_rows.push_back(r);
  for (Eigen::Index c : col_order)
    if (col_sums[c] > 0.0) keep_cols.push_back(c);
  if (keep_rows.empty() || keep_cols.empty())
    fail(ErrorCategory::data, "activity matrix is entirely zero");

  values.resize(static_cast<Eigen::Index>(keep_rows.size()),
                static_cast<Eigen::Index>(keep_cols.size()));
  countries.reserve(keep_rows.size());
  activities.reserve(keep_cols.size());
  for (std::size_t i = 0; i < keep_rows.size(); ++i)
    countries.push_back(countries_[keep_rows[i]]);
  for (std::size_t j = 0; j < keep_cols.size(); ++j)
    activities.push_back(activities_[keep_cols[j]]);
  for (std::size_t i = 0; i < keep_rows.size(); ++i)
    for (std::size_t j = 0; j < keep_cols.size(); ++j)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          values_(keep_rows[i], keep_cols[j]);
}

ActivityMatrix ActivityMatrix::from_triples(
    const std::vector<std::tuple<std::string, std::string, double>>& triples) {
  std::map<std::string, std::size_t> cidx, aidx;
  for (const auto& [c, a, v] : triples) {
    cidx.emplace(c, cidx.size());
    aidx.emplace(a, aidx.size());
    (void)v;
  }
  // std::map iteration is already sorted; build directly in canonical order
  std::vector<std::string> countries, activities;
  std::size_t i = 0;
  for (auto& [c, idx] : cidx) { idx = i++; countries.push_back(c); }
  i = 0;
  for (auto& [a, idx] : aidx) { idx = i++; activities.push_back(a); }

  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(countries.size()),
      static_cast<Eigen::Index>(activities.size()));
  for (const auto& [c, a, v] : triples) {
    if (!std::isfinite(v) || v < 0.0)
      fail(ErrorCategory::data, "activity value for (" + c + ", " + a +
                                    ") must be finite and >= 0");
    values(static_cast<Eigen::Index>(cidx[c]),
           static_cast<Eigen::Index>(aidx[a])) += v;
  }
  return ActivityMatrix(std::move(countries), std::move(activities),
                        std::move(values));
}

ActivityMatrix ActivityMatrix::from_csv(std::istream& in,
                                        const std::string& stream_name) {
  csv::Table t = csv::read(in, stream_name);
  int c_country = t.require_column("country");
  int c_activity = t.require_column("activity");
  int c_value = t.require_column("value");
  std::vector<std::tuple<std::string, std::string, double>> triples;
  triples.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    triples.emplace_back(
        t.rows[i][c_country], t.rows[i][c_activity],
        csv::parse_double(t.rows[i][c_value], stream_name, t.line_numbers[i]));
  return from_triples(triples);
}

ActivityMatrix ActivityMatrix::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCategory::io, "cannot open '" + path + "' for reading");
  return from_csv(in, path);
}

Eigen::MatrixXd rca(const ActivityMatrix& m) {
  const Eigen::MatrixXd& x = m.values;
  double total = x.sum();
  if (total <= 0.0) fail(ErrorCategory::data, "zero global total");
  Eigen::VectorXd row_sums = x.rowwise().sum();
  Eigen::VectorXd col_sums = x.colwise().sum();
  if ((row_sums.array() <= 0.0).any() || (col_sums.array() <= 0.0).any())
    fail(ErrorCategory::data, "activity matrix has an all-zero row or column");

  Eigen::MatrixXd r(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.rows(); ++c)
    for (Eigen::Index p = 0; p < x.cols(); ++p)
      r(c, p) = (x(c, p) / row_sums[c]) / (col_sums[p] / total);
  return r;
}

Eigen::MatrixXi binarize(const Eigen::MatrixXd& r, double threshold,
                         const std::vector<std::string>& row_names,
                         const std::vector<std::string>& col_names) {
  if (threshold <= 0.0)
    fail(ErrorCategory::invalid, "binarization threshold must be > 0");
  Eigen::MatrixXi m = (r.array() >= threshold).cast<int>();

  auto name_of = [](const std::vector<std::string>& names, Eigen::Index i,
                    const char* kind) {
    if (i < static_cast<Eigen::Index>(names.size())) return names[i];
    return std::string(kind) + " #" + std::to_string(i);
  };
  for (Eigen::Index c = 0; c < m.rows(); ++c)
    if (m.row(c).sum() == 0)
      fail(ErrorCategory::data, "degenerate structure: no activity reaches the "
                                "threshold for " + name_of(row_names, c, "country"));
  for (Eigen::Index p = 0; p < m.cols(); ++p)
    if (m.col(p).sum() == 0)
      fail(ErrorCategory::data, "degenerate structure: no country reaches the "
                                "threshold for " + name_of(col_names, p, "activity"));
  return m;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> diversity_ubiquity(
    const Eigen::MatrixXi& m) {
  if (((m.array() != 0) && (m.array() != 1)).any())
    fail(ErrorCategory::data, "specialization matrix must be 0/1");
  Eigen::VectorXd diversity = m.cast<double>().rowwise().sum();
  Eigen::VectorXd ubiquity = m.cast<double>().colwise().sum();
  if ((diversity.array() == 0.0).any() || (ubiquity.array() == 0.0).any())
    fail(ErrorCategory::data, "specialization matrix has an all-zero row or column");
  return {diversity, ubiquity};
}

EciScores eci_eigen(const Eigen::MatrixXi& m,
                    const std::vector<std::string>& countries) {
  const Eigen::Index n = m.rows();
  if (n < 2) fail(ErrorCategory::data, "need at least 2 countries");
  if (static_cast<Eigen::Index>(countries.size()) != n)
    fail(ErrorCategory::invalid, "country label count does not match matrix");
  auto [diversity, ubiquity] = diversity_ubiquity(m);

  // Mtilde = Dc^-1 M Dp^-1 M^T is similar to the symmetric PSD matrix
  // A = Dc^-1/2 M Dp^-1 M^T Dc^-1/2, so solve the symmetric problem and map
  // eigenvectors back through Dc^-1/2.
  Eigen::MatrixXd md = m.cast<double>();
  Eigen::VectorXd dc_isqrt = diversity.array().rsqrt();
  Eigen::MatrixXd s = dc_isqrt.asDiagonal() * md *
                      ubiquity.array().rsqrt().matrix().asDiagonal();
  Eigen::MatrixXd a = s * s.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success)
    fail(ErrorCategory::numeric, "eigen decomposition did not converge");

  // eigenvalues ascending; second-largest is n-2
  Eigen::VectorXd v = solver.eigenvectors().col(n - 2);
  Eigen::VectorXd x = dc_isqrt.asDiagonal() * v;
  double lambda = solver.eigenvalues()[n - 2];

  // residual check against Mtilde itself
  Eigen::MatrixXd mtilde = diversity.cwiseInverse().asDiagonal() * md *
                           ubiquity.cwiseInverse().asDiagonal() *
                           md.transpose();
  double residual =
      (mtilde * x - lambda * x).lpNorm<Eigen::Infinity>() /
      std::max(1.0, x.lpNorm<Eigen::Infinity>());
  if (residual > 1e-10)
    fail(ErrorCategory::numeric, "eigenvector residual too large: " +
                                     csv::format_double(residual));

  EciScores out;
  double mean = x.mean();
  double sd = std::sqrt((x.array() - mean).square().sum() / n);
  double scale = x.lpNorm<Eigen::Infinity>();
  if (sd <= 1e-12 * std::max(1.0, scale)) {
    // all raw scores equal: report the flat result instead of erroring
    out.degenerate = true;
    for (Eigen::Index c = 0; c < n; ++c) {
      out.scores[countries[c]] = 0.5;
      out.raw[countries[c]] = 0.0;
    }
  } else {
    Eigen::VectorXd z = (x.array() - mean) / sd;
    if (pearson(z, diversity) < 0.0) z = -z;
    double lo = z.minCoeff(), hi = z.maxCoeff();
    for (Eigen::Index c = 0; c < n; ++c) {
      out.raw[countries[c]] = z[c];
      out.scores[countries[c]] = (z[c] - lo) / (hi - lo);
    }
  }

  // ranks: 1 = most complex, ties broken lexicographically by country code.
  // std::map iterates codes ascending, so a stable sort on score descending
  // leaves ties in code order.
  std::vector<std::pair<std::string, double>> items(out.raw.begin(),
                                                    out.raw.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (std::size_t i = 0; i < items.size(); ++i)
    out.ranks[items[i].first] = static_cast<int>(i) + 1;
  return out;
}

Eigen::VectorXd method_of_reflections(const Eigen::MatrixXi& m, int iterations) {
  if (iterations < 2 || iterations % 2 != 0)
    fail(ErrorCategory::invalid, "iterations must be an even integer >= 2");
  auto [diversity, ubiquity] = diversity_ubiquity(m);
  Eigen::MatrixXd md = m.cast<double>();
  const Eigen::Index n = md.rows();

  auto standardized = [n](const Eigen::VectorXd& k) -> Eigen::VectorXd {
    double mean = k.mean();
    double sd = std::sqrt((k.array() - mean).square().sum() / n);
    if (sd <= 1e-12 * std::max(1.0, k.lpNorm<Eigen::Infinity>()))
      return Eigen::VectorXd::Zero(n);
    return (k.array() - mean) / sd;
  };

  Eigen::VectorXd kc = diversity;
  Eigen::VectorXd kp = ubiquity;
  for (int step = 1; step <= iterations; ++step) {
    if (step % 2 == 1) {
      // odd steps refresh the activity side from the country side
      kp = (md.transpose() * kc).cwiseQuotient(ubiquity);
    } else {
      kc = (md * kp).cwiseQuotient(diversity);
      // re-center each country round; the update is affine in kc, so the
      // final standardized vector is unchanged while the iteration stays
      // far from losing precision as the raw values contract
      Eigen::VectorXd z = standardized(kc);
      if (z.isZero(0.0)) return z;  // all equal: degenerate from here on
      kc = z;
    }
  }
  return standardized(kc);
}

EciScores eci_from_raw(const ActivityMatrix& m, double threshold) {
  Eigen::MatrixXd r = rca(m);
  Eigen::MatrixXi bin = binarize(r, threshold, m.countries, m.activities);
  return eci_eigen(bin, m.countries);
}

void write_eci_csv(std::ostream& out, const EciScores& scores) {
  csv::write_row(out, {"country", "eci", "raw", "rank"});
  for (const auto& [country, score] : scores.scores)
    csv::write_row(out, {country, csv::format_double(score),
                         csv::format_double(scores.raw.at(country)),
                         std::to_string(scores.ranks.at(country))});
}

}  // namespace fiscrisk
