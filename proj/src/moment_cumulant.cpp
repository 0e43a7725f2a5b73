#include "fcs/moment_cumulant.hpp"

#include <algorithm>

#include "fcs/errors.hpp"

namespace fcs {

namespace {

void check_order(int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "order must be >= 1");
  if (k > kMaxPartitionOrder) {
    throw Error(ErrorKind::KTooLarge, "partition order capped at " +
                                          std::to_string(kMaxPartitionOrder));
  }
}

/// Walks all restricted-growth strings a[0..k-1]: a[0]=0, a[i] <= max(a[..i-1])+1.
template <typename Visit>
void walk_rgs(int k, Visit&& visit) {
  std::vector<int> a(static_cast<size_t>(k), 0);
  auto rec = [&](auto&& self, int i, int used) -> void {
    if (i == k) {
      visit(a);
      return;
    }
    for (int v = 0; v <= used; ++v) {
      a[static_cast<size_t>(i)] = v;
      self(self, i + 1, std::max(used, v + 1));
    }
  };
  rec(rec, 0, 0);
}

/// Kahan-compensated accumulator; the partition sums reach millions of terms.
class CompensatedSum {
 public:
  void add(double value) {
    const double y = value - compensation_;
    const double t = total_ + y;
    compensation_ = (t - total_) - y;
    total_ = t;
  }
  double value() const { return total_; }

 private:
  double total_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace

std::vector<SetPartition> enumerate_partitions(int k) {
  check_order(k);
  std::vector<SetPartition> out;
  out.reserve(static_cast<size_t>(bell_number(k)));
  walk_rgs(k, [&out, k](const std::vector<int>& a) {
    SetPartition p;
    const int nblocks = 1 + *std::max_element(a.begin(), a.end());
    p.blocks.resize(static_cast<size_t>(nblocks));
    for (int i = 0; i < k; ++i) {
      p.blocks[static_cast<size_t>(a[static_cast<size_t>(i)])].push_back(i + 1);
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::uint64_t bell_number(int k) {
  check_order(k);
  // Bell triangle: B_k is the last entry of row k-1 (0-indexed row {1} = B_1).
  std::vector<std::uint64_t> row{1};
  for (int n = 1; n < k; ++n) {
    std::vector<std::uint64_t> next;
    next.reserve(row.size() + 1);
    next.push_back(row.back());
    for (std::uint64_t v : row) next.push_back(next.back() + v);
    row.swap(next);
  }
  return row.back();
}

const char* cumulant_method_name(CumulantMethod method) {
  switch (method) {
    case CumulantMethod::FiniteDifference: return "finite-difference";
    case CumulantMethod::Distribution: return "distribution";
    case CumulantMethod::TraceFormula: return "trace-formula";
    case CumulantMethod::Exact: return "exact";
  }
  return "?";
}

MomentVector cumulants_to_moments(const CumulantVector& cumulants) {
  const int k_max = cumulants.order();
  check_order(k_max);
  MomentVector moments;
  moments.values.resize(static_cast<size_t>(k_max), 0.0);
  for (int k = 1; k <= k_max; ++k) {
    CompensatedSum sum;
    walk_rgs(k, [&](const std::vector<int>& a) {
      const int nblocks = 1 + *std::max_element(a.begin(), a.end());
      std::vector<int> size(static_cast<size_t>(nblocks), 0);
      for (int v : a) ++size[static_cast<size_t>(v)];
      double prod = 1.0;
      for (int s : size) prod *= cumulants[s];
      sum.add(prod);
    });
    moments.values[static_cast<size_t>(k) - 1] = sum.value();
  }
  return moments;
}

CumulantVector moments_to_cumulants(const MomentVector& moments) {
  const int k_max = moments.order();
  check_order(k_max);
  CumulantVector cumulants;
  cumulants.method = CumulantMethod::Exact;
  cumulants.values.resize(static_cast<size_t>(k_max), 0.0);
  for (int k = 1; k <= k_max; ++k) {
    CompensatedSum partial;  // partitions with more than one block
    walk_rgs(k, [&](const std::vector<int>& a) {
      const int nblocks = 1 + *std::max_element(a.begin(), a.end());
      if (nblocks == 1) return;  // the full block carries the unknown kappa_k
      std::vector<int> size(static_cast<size_t>(nblocks), 0);
      for (int v : a) ++size[static_cast<size_t>(v)];
      double prod = 1.0;
      for (int s : size) prod *= cumulants[s];
      partial.add(prod);
    });
    cumulants.values[static_cast<size_t>(k) - 1] = moments[k] - partial.value();
  }
  return cumulants;
}

}  // namespace fcs
