// Exhaustive best-subset search. Supports are visited in Gray-code order so
// consecutive supports differ by one index, and the inverse Gram matrix of
// the current support is carried along with bordering updates (add) and
// Schur-complement downdates (remove).
//
// Rank-deficient supports are skipped: any such S has a proper subset with
// the same column span, hence the same fit and a strictly smaller penalty
// (or, at lambda = 0, the same objective and a smaller cardinality, which
// the tie rule prefers).

#include "dfsearch/errors.hpp"
#include "dfsearch/fitters.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <sstream>

namespace dfsearch::detail {

namespace {

constexpr double kDependenceTol = 1e-10;
constexpr int kRebuildInterval = 64;

class GramWalker {
 public:
  explicit GramWalker(const Matrix& gram)
      : gram_(gram), p_(static_cast<int>(gram.rows())), inv_(static_cast<std::size_t>(p_ * p_)) {
    idx_.reserve(static_cast<std::size_t>(p_));
    work_.resize(static_cast<std::size_t>(p_));
  }

  void toggle(int j) {
    const std::uint32_t bit = 1u << j;
    const bool adding = (mask_ & bit) == 0;
    mask_ ^= bit;
    if (!full_rank_ || ++since_rebuild_ >= kRebuildInterval) {
      rebuild();
      return;
    }
    if (adding) {
      add(j);
    } else {
      remove(j);
    }
  }

  bool full_rank() const { return full_rank_; }
  std::uint32_t mask() const { return mask_; }
  int size() const { return static_cast<int>(idx_.size()); }
  int index(int a) const { return idx_[static_cast<std::size_t>(a)]; }
  double inv(int a, int b) const { return inv_[static_cast<std::size_t>(a * p_ + b)]; }

  // v' G_S^{-1} v for v indexed by position in the support.
  double quad(const double* v) const {
    const int k = size();
    double q = 0.0;
    for (int a = 0; a < k; ++a) {
      double row = 0.0;
      const double* ia = &inv_[static_cast<std::size_t>(a * p_)];
      for (int b = 0; b < k; ++b) row += ia[b] * v[b];
      q += v[a] * row;
    }
    return q;
  }

 private:
  double& at(int a, int b) { return inv_[static_cast<std::size_t>(a * p_ + b)]; }

  void add(int j) {
    const int k = size();
    const double gjj = gram_(j, j);
    double s = gjj;
    for (int a = 0; a < k; ++a) {
      double w = 0.0;
      for (int b = 0; b < k; ++b) w += at(a, b) * gram_(idx_[static_cast<std::size_t>(b)], j);
      work_[static_cast<std::size_t>(a)] = w;
      s -= w * gram_(idx_[static_cast<std::size_t>(a)], j);
    }
    if (!(gjj > 0.0) || s <= kDependenceTol * gjj) {
      full_rank_ = false;
      return;
    }
    for (int a = 0; a < k; ++a) {
      const double wa = work_[static_cast<std::size_t>(a)];
      for (int b = 0; b < k; ++b) at(a, b) += wa * work_[static_cast<std::size_t>(b)] / s;
      at(a, k) = -wa / s;
      at(k, a) = -wa / s;
    }
    at(k, k) = 1.0 / s;
    idx_.push_back(j);
  }

  void remove(int j) {
    const int k = size();
    const auto it = std::find(idx_.begin(), idx_.end(), j);
    const int pos = static_cast<int>(it - idx_.begin());
    const int last = k - 1;
    if (pos != last) {
      std::swap(idx_[static_cast<std::size_t>(pos)], idx_[static_cast<std::size_t>(last)]);
      for (int a = 0; a < k; ++a) std::swap(at(a, pos), at(a, last));
      for (int b = 0; b < k; ++b) std::swap(at(pos, b), at(last, b));
    }
    const double d = at(last, last);
    for (int a = 0; a < last; ++a) {
      const double ca = at(a, last);
      for (int b = 0; b < last; ++b) at(a, b) -= ca * at(b, last) / d;
    }
    idx_.pop_back();
  }

  void rebuild() {
    since_rebuild_ = 0;
    idx_.clear();
    full_rank_ = true;
    for (int j = 0; j < p_ && full_rank_; ++j) {
      if (mask_ & (1u << j)) add(j);
    }
  }

  const Matrix& gram_;
  int p_;
  std::vector<double> inv_;
  std::vector<int> idx_;
  std::vector<double> work_;
  std::uint32_t mask_ = 0;
  bool full_rank_ = true;
  int since_rebuild_ = 0;
};

// Lexicographic comparison of the sorted index sets encoded by two masks.
bool lex_less(std::uint32_t a, std::uint32_t b) {
  while (a != 0 && b != 0) {
    const int ia = std::countr_zero(a);
    const int ib = std::countr_zero(b);
    if (ia != ib) return ia < ib;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0 && b != 0;
}

struct Incumbent {
  double objective;
  int cardinality;
  std::uint32_t mask;

  // Candidate beats the incumbent: clearly lower objective, or tied within
  // tol and smaller / lexicographically earlier.
  bool beaten_by(double obj, int card, std::uint32_t m, double tol) const {
    if (obj < objective - tol) return true;
    if (obj > objective + tol) return false;
    if (card != cardinality) return card < cardinality;
    return lex_less(m, mask);
  }
};

void check_dimension(Eigen::Index p) {
  if (p > kMaxSubsetPredictors) {
    std::ostringstream os;
    os << "best subset enumeration supports p <= " << kMaxSubsetPredictors << ", got p = " << p;
    throw CapacityError(os.str());
  }
}

std::vector<int> mask_to_indices(std::uint32_t mask) {
  std::vector<int> out;
  while (mask != 0) {
    out.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return out;
}

}  // namespace

std::vector<int> best_subset_support(const Matrix& x, const Matrix& gram, const Vector& y,
                                     double lambda) {
  const Eigen::Index p = x.cols();
  check_dimension(p);
  const Vector xty = x.transpose() * y;
  const double yy = y.squaredNorm();
  const double tol = 1e-12 * std::max(1.0, 0.5 * yy);

  Incumbent best{0.5 * yy, 0, 0u};
  GramWalker walker(gram);
  std::vector<double> b(static_cast<std::size_t>(p));
  const std::uint64_t total = std::uint64_t{1} << p;
  for (std::uint64_t g = 1; g < total; ++g) {
    walker.toggle(std::countr_zero(g));
    if (!walker.full_rank()) continue;
    const int k = walker.size();
    for (int a = 0; a < k; ++a) b[static_cast<std::size_t>(a)] = xty[walker.index(a)];
    const double rss = std::max(0.0, yy - walker.quad(b.data()));
    const double obj = 0.5 * rss + lambda * k;
    if (best.beaten_by(obj, k, walker.mask(), tol)) best = {obj, k, walker.mask()};
  }
  return mask_to_indices(best.mask);
}

CoordinateMap best_subset_coordinate_map(const Matrix& x, const Matrix& gram, const Vector& y,
                                         int i, double lambda) {
  const Eigen::Index p = x.cols();
  check_dimension(p);

  Vector y0 = y;
  y0[i] = 0.0;
  const Vector xty0 = x.transpose() * y0;
  const double y0y0 = y0.squaredNorm();

  // Per full-rank support S, with y(s) = y0 + s e_i:
  //   ||(I - P_S) y(s)||^2 = a + 2 s b + s^2 c,   fitted_i(s) = u + s v
  // where a = ||(I-P_S) y0||^2, u = (P_S y0)_i, b = -u, v = (P_S)_ii, c = 1 - v.
  struct Table {
    std::vector<double> a, u, v;
    std::vector<int> card;
    std::vector<std::uint32_t> mask;
  };
  auto table = std::make_shared<Table>();
  table->a.push_back(y0y0);
  table->u.push_back(0.0);
  table->v.push_back(0.0);
  table->card.push_back(0);
  table->mask.push_back(0u);

  GramWalker walker(gram);
  std::vector<double> b0(static_cast<std::size_t>(p));
  std::vector<double> xi(static_cast<std::size_t>(p));
  const std::uint64_t total = std::uint64_t{1} << p;
  for (std::uint64_t g = 1; g < total; ++g) {
    walker.toggle(std::countr_zero(g));
    if (!walker.full_rank()) continue;
    const int k = walker.size();
    for (int a = 0; a < k; ++a) {
      b0[static_cast<std::size_t>(a)] = xty0[walker.index(a)];
      xi[static_cast<std::size_t>(a)] = x(i, walker.index(a));
    }
    double u = 0.0;
    double v = 0.0;
    for (int a = 0; a < k; ++a) {
      double w = 0.0;
      for (int c = 0; c < k; ++c) w += walker.inv(a, c) * xi[static_cast<std::size_t>(c)];
      v += xi[static_cast<std::size_t>(a)] * w;
      u += b0[static_cast<std::size_t>(a)] * w;
    }
    table->a.push_back(std::max(0.0, y0y0 - walker.quad(b0.data())));
    table->u.push_back(u);
    table->v.push_back(v);
    table->card.push_back(k);
    table->mask.push_back(walker.mask());
  }

  return [table, lambda, y0y0](double s) {
    const double tol = 1e-12 * std::max(1.0, 0.5 * (y0y0 + s * s));
    const Table& t = *table;
    Incumbent best{std::numeric_limits<double>::infinity(), 0, 0u};
    std::size_t winner = 0;
    for (std::size_t m = 0; m < t.a.size(); ++m) {
      const double c = 1.0 - t.v[m];
      const double rss = std::max(0.0, t.a[m] - 2.0 * s * t.u[m] + s * s * c);
      const double obj = 0.5 * rss + lambda * t.card[m];
      if (best.beaten_by(obj, t.card[m], t.mask[m], tol)) {
        best = {obj, t.card[m], t.mask[m]};
        winner = m;
      }
    }
    return t.u[winner] + s * t.v[winner];
  };
}

}  // namespace dfsearch::detail
