#pragma once

// Symmetric positive definite banded matrices: lower-band storage and an
// in-place Cholesky factorization.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <utility>
#include <vector>

#include "biharm/error.hpp"

namespace biharm {

class SymBandMatrix {
 public:
  SymBandMatrix(std::size_t n, std::size_t bw) : n_(n), bw_(bw), a_(n * (bw + 1), 0.0) {}

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] std::size_t bandwidth() const { return bw_; }

  /// Entry (i, j) with i >= j and i - j <= bw.
  double& at(std::size_t i, std::size_t j) { return a_[i * (bw_ + 1) + (i - j)]; }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const {
    return a_[i * (bw_ + 1) + (i - j)];
  }

  /// Adds s to (i, j) and, implicitly, (j, i).
  void add(std::size_t i, std::size_t j, double s) {
    if (i < j) std::swap(i, j);
    at(i, j) += s;
  }

  [[nodiscard]] std::vector<double> multiply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i >= bw_ ? i - bw_ : 0;
      for (std::size_t j = j0; j <= i; ++j) {
        const double v = at(i, j);
        y[i] += v * x[j];
        if (j != i) y[j] += v * x[i];
      }
    }
    return y;
  }

 private:
  std::size_t n_;
  std::size_t bw_;
  std::vector<double> a_;
};

/// A = L L^T, banded.
class BandCholesky {
 public:
  explicit BandCholesky(SymBandMatrix a) : l_(std::move(a)) {
    const std::size_t n = l_.size();
    const std::size_t bw = l_.bandwidth();
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k0 = j >= bw ? j - bw : 0;
      double d = l_.at(j, j);
      for (std::size_t k = k0; k < j; ++k) d -= l_.at(j, k) * l_.at(j, k);
      if (!(d > 0.0)) {
        std::ostringstream os;
        os << "banded Cholesky: matrix not positive definite at row " << j;
        throw Error(ErrorKind::Domain, os.str());
      }
      const double djj = std::sqrt(d);
      l_.at(j, j) = djj;
      const std::size_t i1 = std::min(n - 1, j + bw);
      for (std::size_t i = j + 1; i <= i1; ++i) {
        const std::size_t m0 = i >= bw ? i - bw : 0;
        double s = l_.at(i, j);
        for (std::size_t k = std::max(k0, m0); k < j; ++k) s -= l_.at(i, k) * l_.at(j, k);
        l_.at(i, j) = s / djj;
      }
    }
  }

  [[nodiscard]] std::vector<double> solve(std::vector<double> b) const {
    const std::size_t n = l_.size();
    const std::size_t bw = l_.bandwidth();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k0 = i >= bw ? i - bw : 0;
      double s = b[i];
      for (std::size_t k = k0; k < i; ++k) s -= l_.at(i, k) * b[k];
      b[i] = s / l_.at(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      const std::size_t k1 = std::min(n - 1, ii + bw);
      double s = b[ii];
      for (std::size_t k = ii + 1; k <= k1; ++k) s -= l_.at(k, ii) * b[k];
      b[ii] = s / l_.at(ii, ii);
    }
    return b;
  }

 private:
  SymBandMatrix l_;
};

}  // namespace biharm
