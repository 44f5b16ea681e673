#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace geocume {

/// Subset of {1, ..., 32} as a bitmask; bit i-1 holds element i.
using IndexSet = std::uint32_t;

IndexSet make_set(std::initializer_list<int> elements);
IndexSet full_set(int p);
std::vector<int> elements_of(IndexSet set);
int smallest_element(IndexSet set);
std::string set_to_string(IndexSet set);

/// Partition of {1..p} into disjoint nonempty parts.
///
/// Canonical form: parts sorted by their smallest element. Construction from
/// an arbitrary list of parts validates and canonicalizes.
class SetPartition {
 public:
  SetPartition(int p, std::vector<IndexSet> parts);

  int ground_size() const { return p_; }
  std::size_t size() const { return parts_.size(); }
  const std::vector<IndexSet>& parts() const { return parts_; }
  IndexSet part(std::size_t i) const { return parts_[i]; }

  friend bool operator==(const SetPartition&, const SetPartition&) = default;

 private:
  int p_;
  std::vector<IndexSet> parts_;
};

inline constexpr int kMaxEnumeratedPartitions = 12;
inline constexpr int kMaxStirling = 25;

/// Calls `visit` once per partition of `set` (parts in canonical order).
void for_each_partition(IndexSet set, const std::function<void(std::span<const IndexSet>)>& visit);

/// Every partition of {1..p}, in restricted-growth-string order. 1 <= p <= 12.
std::vector<SetPartition> enumerate_partitions(int p);

/// Stirling number of the second kind S(p, i); zero for i > p. p <= 25.
std::uint64_t stirling2(int p, int i);

/// Bell number B(p) = sum_i S(p, i). p <= 25.
std::uint64_t bell(int p);

/// Touchard polynomial T_nu(s) = sum_{k=1..nu} S(nu,k) s^k, with T_0 = 1.
double touchard(int nu, double s);

/// Values m_I indexed by nonempty subsets I of {1..p}.
class SubsetTable {
 public:
  explicit SubsetTable(int p);

  int ground_size() const { return p_; }
  void set(IndexSet subset, double value);
  bool has(IndexSet subset) const;
  /// Throws missing-entry error if the subset was never set.
  double at(IndexSet subset) const;
  bool complete() const;

  static SubsetTable from_function(int p, const std::function<double(IndexSet)>& value);

 private:
  void check_subset(IndexSet subset) const;

  int p_;
  std::vector<double> values_;
  std::vector<char> present_;
};

using MomentTable = SubsetTable;

/// kappa_I = sum over partitions Pi of I of (-1)^{|Pi|-1} (|Pi|-1)! prod m_pi, for every I.
SubsetTable moments_to_cumulants(const MomentTable& moments);

/// m_I = sum over partitions Pi of I of prod kappa_pi, for every I.
MomentTable cumulants_to_moments(const SubsetTable& cumulants);

/// Partition together with an ordering tau of its parts, tau(1) = 1.
class OrderedPartition {
 public:
  /// `order` is 1-based: order[i] is the index of the part placed at position i+1.
  OrderedPartition(SetPartition base, std::vector<int> order);

  const SetPartition& base() const { return base_; }
  const std::vector<int>& order() const { return order_; }

  /// Parts listed in tau order.
  std::vector<IndexSet> sequence() const;

 private:
  SetPartition base_;
  std::vector<int> order_;
};

/// Moment cluster delta_{first, second} = m_{first u second} - m_first m_second.
struct ClusterPair {
  IndexSet first;
  IndexSet second;

  friend bool operator==(const ClusterPair&, const ClusterPair&) = default;
};

/// One summand of the clustering identity, kept symbolic.
struct SignedTerm {
  int sign = 1;
  std::vector<ClusterPair> clusters;  // D(Pi, tau)
  std::vector<IndexSet> moments;      // M(Pi, tau)
};

/// D(Pi, tau): consecutive parts with the earlier one inside `block` and the later one outside.
std::vector<ClusterPair> cluster_pairs(const OrderedPartition& ordered, IndexSet block);

/// M(Pi, tau): parts not involved in any cluster pair.
std::vector<IndexSet> moment_parts(const OrderedPartition& ordered, IndexSet block);

/// Terms of the clustering expansion of kappa_{1..p} with respect to the split {block, block^c}.
///
/// Sums over partitions refining {block, block^c} and orderings of their parts
/// that keep the part containing 1 first. Requires 1 in block and block^c nonempty.
std::vector<SignedTerm> clustering_terms(int p, IndexSet block);

/// Same as clustering_terms(m.ground_size(), block); validates the table dimension.
std::vector<SignedTerm> clustering_decomposition(const MomentTable& moments, IndexSet block);

double evaluate_term(const SignedTerm& term, const MomentTable& moments);
double evaluate_terms(const std::vector<SignedTerm>& terms, const MomentTable& moments);

struct PartitionSumAudit {
  double lhs;
  double rhs;
  bool ok;
};

/// lhs = sum_{Pi} |Pi|!^c prod |pi|!^c by enumeration, rhs = 2^p p!^{max(1,c)}. p <= 10.
PartitionSumAudit partition_sum_bound_check(int p, double c);

struct TouchardSeriesAudit {
  double series;        // truncated sum_{k=0..200} k!^a / k! k^nu s^k
  double middle_bound;  // 2 max(1, 1/s) / (1-a)^{nu+1} e^{t} T_{nu+1}(t), t = s^{1/(1-a)}
  double outer_bound;   // 2 e^{nu+1} (nu+1)! / (1-a)^{nu+1} e^{2t}
  bool tail_monotone;   // the last 20 retained terms decrease
  bool ok;
};

/// Numeric audit of the Touchard-sum bound. a in [0,1), nu >= 0, s > 0.
TouchardSeriesAudit touchard_series_check(double a, int nu, double s);

}  // namespace geocume
