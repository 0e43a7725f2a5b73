#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fcs {

/// Partition of {1..k} into disjoint blocks, canonical form: blocks sorted by
/// least element, elements ascending within a block.
struct SetPartition {
  std::vector<std::vector<int>> blocks;
};

inline constexpr int kMaxPartitionOrder = 12;  // B_12 ~ 4.2M

/// All partitions of {1..k} via restricted-growth strings; count = Bell(k).
std::vector<SetPartition> enumerate_partitions(int k);

/// Bell numbers by the triangle recurrence (oracle for the enumeration).
std::uint64_t bell_number(int k);

enum class CumulantMethod { FiniteDifference, Distribution, TraceFormula, Exact };

const char* cumulant_method_name(CumulantMethod method);

struct CumulantVector {
  std::vector<double> values;  // values[k-1] = <<n^k>>
  CumulantMethod method = CumulantMethod::Exact;

  int order() const { return static_cast<int>(values.size()); }
  double operator[](int k) const { return values.at(static_cast<size_t>(k) - 1); }
};

struct MomentVector {
  std::vector<double> values;  // values[k-1] = <n^k>

  int order() const { return static_cast<int>(values.size()); }
  double operator[](int k) const { return values.at(static_cast<size_t>(k) - 1); }
};

/// <n^k> = sum over partitions P of prod_{block a in P} <<n^|a|>>.
MomentVector cumulants_to_moments(const CumulantVector& cumulants);

/// Inverse by induction on k: <<n^k>> = <n^k> - sum_{P != {full}} prod <<n^|a|>>.
CumulantVector moments_to_cumulants(const MomentVector& moments);

}  // namespace fcs
