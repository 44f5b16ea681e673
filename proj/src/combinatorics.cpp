#include "geocume/combinatorics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "geocume/error.hpp"

namespace geocume {

IndexSet make_set(std::initializer_list<int> elements) {
  IndexSet set = 0;
  for (int e : elements) {
    if (e < 1 || e > 32) {
      throw Error(ErrorKind::argument, "index set element out of range: " + std::to_string(e));
    }
    set |= IndexSet{1} << (e - 1);
  }
  return set;
}

IndexSet full_set(int p) {
  if (p < 0 || p > 31) {
    throw Error(ErrorKind::size, "ground set size out of range: " + std::to_string(p));
  }
  return (IndexSet{1} << p) - 1;
}

std::vector<int> elements_of(IndexSet set) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::popcount(set)));
  while (set != 0) {
    out.push_back(std::countr_zero(set) + 1);
    set &= set - 1;
  }
  return out;
}

int smallest_element(IndexSet set) { return set == 0 ? 0 : std::countr_zero(set) + 1; }

std::string set_to_string(IndexSet set) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int e : elements_of(set)) {
    os << (first ? "" : ",") << e;
    first = false;
  }
  os << '}';
  return os.str();
}

SetPartition::SetPartition(int p, std::vector<IndexSet> parts) : p_(p), parts_(std::move(parts)) {
  const IndexSet ground = full_set(p);
  IndexSet seen = 0;
  for (IndexSet part : parts_) {
    if (part == 0) {
      throw Error(ErrorKind::argument, "set partition has an empty part");
    }
    if ((part & seen) != 0) {
      throw Error(ErrorKind::argument, "set partition parts overlap");
    }
    seen |= part;
  }
  if (seen != ground) {
    throw Error(ErrorKind::argument, "set partition does not cover {1.." + std::to_string(p) + "}");
  }
  std::sort(parts_.begin(), parts_.end(),
            [](IndexSet a, IndexSet b) { return std::countr_zero(a) < std::countr_zero(b); });
}

void for_each_partition(IndexSet set, const std::function<void(std::span<const IndexSet>)>& visit) {
  const std::vector<int> elems = elements_of(set);
  if (elems.empty()) {
    visit({});
    return;
  }
  // Restricted growth strings: element j joins one of the existing blocks or opens a new one.
  // Blocks are opened in order of their smallest element, so parts come out canonical.
  std::vector<IndexSet> blocks;
  blocks.reserve(elems.size());
  std::function<void(std::size_t)> place = [&](std::size_t j) {
    if (j == elems.size()) {
      visit(blocks);
      return;
    }
    const IndexSet bit = IndexSet{1} << (elems[j] - 1);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      blocks[b] |= bit;
      place(j + 1);
      blocks[b] &= ~bit;
    }
    blocks.push_back(bit);
    place(j + 1);
    blocks.pop_back();
  };
  place(0);
}

std::vector<SetPartition> enumerate_partitions(int p) {
  if (p < 1 || p > kMaxEnumeratedPartitions) {
    throw Error(ErrorKind::size, "enumerate_partitions: p must lie in [1, 12], got " + std::to_string(p));
  }
  std::vector<SetPartition> out;
  out.reserve(static_cast<std::size_t>(bell(p)));
  for_each_partition(full_set(p), [&](std::span<const IndexSet> parts) {
    out.emplace_back(p, std::vector<IndexSet>(parts.begin(), parts.end()));
  });
  return out;
}

namespace {

const std::array<std::array<std::uint64_t, kMaxStirling + 1>, kMaxStirling + 1>& stirling_table() {
  static const auto table = [] {
    std::array<std::array<std::uint64_t, kMaxStirling + 1>, kMaxStirling + 1> t{};
    t[0][0] = 1;
    for (int p = 1; p <= kMaxStirling; ++p) {
      for (int i = 1; i <= p; ++i) {
        t[p][i] = static_cast<std::uint64_t>(i) * t[p - 1][i] + t[p - 1][i - 1];
      }
    }
    return t;
  }();
  return table;
}

double log_factorial(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

}  // namespace

std::uint64_t stirling2(int p, int i) {
  if (p < 0 || i < 0) {
    throw Error(ErrorKind::argument, "stirling2: negative argument");
  }
  if (p > kMaxStirling) {
    throw Error(ErrorKind::size, "stirling2: p > 25 overflows 64-bit arithmetic");
  }
  if (i > p) {
    return 0;
  }
  return stirling_table()[p][i];
}

std::uint64_t bell(int p) {
  if (p < 0 || p > kMaxStirling) {
    throw Error(ErrorKind::size, "bell: p must lie in [0, 25]");
  }
  std::uint64_t sum = 0;
  for (int i = 0; i <= p; ++i) {
    sum += stirling_table()[p][i];
  }
  return sum;
}

double touchard(int nu, double s) {
  if (nu < 0 || nu > kMaxStirling) {
    throw Error(ErrorKind::size, "touchard: nu must lie in [0, 25]");
  }
  if (nu == 0) {
    return 1.0;
  }
  // Horner on sum_{k=1..nu} S(nu,k) s^k.
  double acc = 0.0;
  for (int k = nu; k >= 1; --k) {
    acc = acc * s + static_cast<double>(stirling2(nu, k));
  }
  return acc * s;
}

SubsetTable::SubsetTable(int p) : p_(p) {
  if (p < 1 || p > 20) {
    throw Error(ErrorKind::size, "moment table dimension must lie in [1, 20]");
  }
  values_.assign(std::size_t{1} << p, 0.0);
  present_.assign(std::size_t{1} << p, 0);
}

void SubsetTable::check_subset(IndexSet subset) const {
  if (subset == 0 || (subset & ~full_set(p_)) != 0) {
    throw Error(ErrorKind::argument, "subset " + set_to_string(subset) + " is not a nonempty subset of {1.." +
                                         std::to_string(p_) + "}");
  }
}

void SubsetTable::set(IndexSet subset, double value) {
  check_subset(subset);
  values_[subset] = value;
  present_[subset] = 1;
}

bool SubsetTable::has(IndexSet subset) const {
  check_subset(subset);
  return present_[subset] != 0;
}

double SubsetTable::at(IndexSet subset) const {
  check_subset(subset);
  if (present_[subset] == 0) {
    throw Error(ErrorKind::missing_entry, "no value for subset " + set_to_string(subset));
  }
  return values_[subset];
}

bool SubsetTable::complete() const {
  for (IndexSet s = 1; s <= full_set(p_); ++s) {
    if (present_[s] == 0) {
      return false;
    }
  }
  return true;
}

SubsetTable SubsetTable::from_function(int p, const std::function<double(IndexSet)>& value) {
  SubsetTable table(p);
  for (IndexSet s = 1; s <= full_set(p); ++s) {
    table.set(s, value(s));
  }
  return table;
}

namespace {

void require_complete(const SubsetTable& table) {
  for (IndexSet s = 1; s <= full_set(table.ground_size()); ++s) {
    if (!table.has(s)) {
      throw Error(ErrorKind::missing_entry, "table lacks subset " + set_to_string(s));
    }
  }
}

}  // namespace

SubsetTable moments_to_cumulants(const MomentTable& moments) {
  require_complete(moments);
  const int p = moments.ground_size();
  // m_I = sum_{J subset I, min(I) in J} kappa_J m_{I\J}, solved for kappa_I in order of |I|.
  SubsetTable kappa(p);
  std::vector<IndexSet> order;
  for (IndexSet s = 1; s <= full_set(p); ++s) {
    order.push_back(s);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](IndexSet a, IndexSet b) { return std::popcount(a) < std::popcount(b); });
  for (IndexSet set : order) {
    const IndexSet low = set & (~set + 1);
    const IndexSet rest = set & ~low;
    double value = moments.at(set);
    // Proper subsets J of `set` containing `low`: low | sub for sub a proper subset of rest.
    for (IndexSet sub = (rest - 1) & rest;; sub = (sub - 1) & rest) {
      if (sub != rest) {
        const IndexSet j = low | sub;
        value -= kappa.at(j) * moments.at(set & ~j);
      }
      if (sub == 0) {
        break;
      }
    }
    kappa.set(set, value);
  }
  return kappa;
}

MomentTable cumulants_to_moments(const SubsetTable& cumulants) {
  require_complete(cumulants);
  const int p = cumulants.ground_size();
  MomentTable m(p);
  std::vector<IndexSet> order;
  for (IndexSet s = 1; s <= full_set(p); ++s) {
    order.push_back(s);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](IndexSet a, IndexSet b) { return std::popcount(a) < std::popcount(b); });
  for (IndexSet set : order) {
    const IndexSet low = set & (~set + 1);
    const IndexSet rest = set & ~low;
    double value = 0.0;
    for (IndexSet sub = rest;; sub = (sub - 1) & rest) {
      const IndexSet j = low | sub;
      const IndexSet remainder = set & ~j;
      value += cumulants.at(j) * (remainder == 0 ? 1.0 : m.at(remainder));
      if (sub == 0) {
        break;
      }
    }
    m.set(set, value);
  }
  return m;
}

OrderedPartition::OrderedPartition(SetPartition base, std::vector<int> order)
    : base_(std::move(base)), order_(std::move(order)) {
  const std::size_t k = base_.size();
  if (order_.size() != k) {
    throw Error(ErrorKind::argument, "ordering length differs from number of parts");
  }
  std::vector<int> sorted = order_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < k; ++i) {
    if (sorted[i] != static_cast<int>(i) + 1) {
      throw Error(ErrorKind::argument, "ordering is not a permutation of {1..|Pi|}");
    }
  }
  if (order_.front() != 1) {
    throw Error(ErrorKind::argument, "ordering must keep the part containing 1 first");
  }
}

std::vector<IndexSet> OrderedPartition::sequence() const {
  std::vector<IndexSet> seq;
  seq.reserve(order_.size());
  for (int idx : order_) {
    seq.push_back(base_.part(static_cast<std::size_t>(idx - 1)));
  }
  return seq;
}

namespace {

std::vector<ClusterPair> cluster_pairs_of(std::span<const IndexSet> seq, IndexSet block) {
  std::vector<ClusterPair> pairs;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    if ((seq[i] & ~block) == 0 && (seq[i + 1] & block) == 0) {
      pairs.push_back({seq[i], seq[i + 1]});
    }
  }
  return pairs;
}

std::vector<IndexSet> moment_parts_of(std::span<const IndexSet> seq, const std::vector<ClusterPair>& pairs) {
  IndexSet used = 0;
  for (const auto& pr : pairs) {
    used |= pr.first | pr.second;
  }
  std::vector<IndexSet> out;
  for (IndexSet part : seq) {
    if ((part & used) == 0) {
      out.push_back(part);
    }
  }
  std::sort(out.begin(), out.end(),
            [](IndexSet a, IndexSet b) { return std::countr_zero(a) < std::countr_zero(b); });
  return out;
}

}  // namespace

std::vector<ClusterPair> cluster_pairs(const OrderedPartition& ordered, IndexSet block) {
  const auto seq = ordered.sequence();
  return cluster_pairs_of(seq, block);
}

std::vector<IndexSet> moment_parts(const OrderedPartition& ordered, IndexSet block) {
  const auto seq = ordered.sequence();
  return moment_parts_of(seq, cluster_pairs_of(seq, block));
}

std::vector<SignedTerm> clustering_terms(int p, IndexSet block) {
  const IndexSet ground = full_set(p);
  if ((block & 1u) == 0) {
    throw Error(ErrorKind::argument, "clustering split must contain element 1");
  }
  if ((block & ~ground) != 0 || block == ground) {
    throw Error(ErrorKind::argument, "clustering split must be a proper subset of {1..p}");
  }
  const IndexSet complement = ground & ~block;

  std::vector<std::vector<IndexSet>> inner;
  std::vector<std::vector<IndexSet>> outer;
  for_each_partition(block, [&](std::span<const IndexSet> parts) { inner.emplace_back(parts.begin(), parts.end()); });
  for_each_partition(complement,
                     [&](std::span<const IndexSet> parts) { outer.emplace_back(parts.begin(), parts.end()); });

  std::vector<SignedTerm> terms;
  std::vector<IndexSet> parts;
  std::vector<IndexSet> seq;
  for (const auto& a : inner) {
    for (const auto& b : outer) {
      parts = a;
      parts.insert(parts.end(), b.begin(), b.end());
      std::sort(parts.begin(), parts.end(),
                [](IndexSet x, IndexSet y) { return std::countr_zero(x) < std::countr_zero(y); });
      const int k = static_cast<int>(parts.size());
      // tau fixes position 1; permute the remaining part indices.
      std::vector<int> tail(static_cast<std::size_t>(k - 1));
      std::iota(tail.begin(), tail.end(), 1);
      do {
        seq.clear();
        seq.push_back(parts[0]);
        for (int idx : tail) {
          seq.push_back(parts[static_cast<std::size_t>(idx)]);
        }
        SignedTerm term;
        term.clusters = cluster_pairs_of(seq, block);
        term.moments = moment_parts_of(seq, term.clusters);
        const int exponent = k + static_cast<int>(term.clusters.size()) - 1;
        term.sign = (exponent % 2 == 0) ? 1 : -1;
        terms.push_back(std::move(term));
      } while (std::next_permutation(tail.begin(), tail.end()));
    }
  }
  return terms;
}

std::vector<SignedTerm> clustering_decomposition(const MomentTable& moments, IndexSet block) {
  return clustering_terms(moments.ground_size(), block);
}

double evaluate_term(const SignedTerm& term, const MomentTable& moments) {
  double value = static_cast<double>(term.sign);
  for (const auto& pr : term.clusters) {
    value *= moments.at(pr.first | pr.second) - moments.at(pr.first) * moments.at(pr.second);
  }
  for (IndexSet part : term.moments) {
    value *= moments.at(part);
  }
  return value;
}

double evaluate_terms(const std::vector<SignedTerm>& terms, const MomentTable& moments) {
  double sum = 0.0;
  for (const auto& term : terms) {
    sum += evaluate_term(term, moments);
  }
  return sum;
}

PartitionSumAudit partition_sum_bound_check(int p, double c) {
  if (p < 1 || p > 10) {
    throw Error(ErrorKind::size, "partition_sum_bound_check: p must lie in [1, 10]");
  }
  if (!(c >= 0.0)) {
    throw Error(ErrorKind::domain, "partition_sum_bound_check: c must be non-negative");
  }
  double lhs = 0.0;
  for_each_partition(full_set(p), [&](std::span<const IndexSet> parts) {
    double log_term = c * log_factorial(static_cast<int>(parts.size()));
    for (IndexSet part : parts) {
      log_term += c * log_factorial(std::popcount(part));
    }
    lhs += std::exp(log_term);
  });
  const double rhs = std::exp(p * std::log(2.0) + std::max(1.0, c) * log_factorial(p));
  return {lhs, rhs, lhs <= rhs};
}

TouchardSeriesAudit touchard_series_check(double a, int nu, double s) {
  if (!(a >= 0.0 && a < 1.0) || nu < 0 || !(s > 0.0)) {
    throw Error(ErrorKind::domain, "touchard_series_check: need a in [0,1), nu >= 0, s > 0");
  }
  constexpr int kTerms = 200;
  std::vector<double> terms(kTerms + 1);
  for (int k = 0; k <= kTerms; ++k) {
    if (k == 0) {
      terms[0] = (nu == 0) ? 1.0 : 0.0;
      continue;
    }
    const double log_term = (a - 1.0) * log_factorial(k) + nu * std::log(static_cast<double>(k)) +
                            k * std::log(s);
    terms[static_cast<std::size_t>(k)] = std::exp(log_term);
  }
  // Accumulate smallest terms first.
  double series = 0.0;
  for (int k = kTerms; k >= 0; --k) {
    series += terms[static_cast<std::size_t>(k)];
  }
  bool monotone = true;
  for (int k = kTerms - 19; k <= kTerms; ++k) {
    if (!(terms[static_cast<std::size_t>(k)] <= terms[static_cast<std::size_t>(k - 1)])) {
      monotone = false;
    }
  }
  const double t = std::pow(s, 1.0 / (1.0 - a));
  const double scale = std::pow(1.0 - a, nu + 1);
  const double middle = 2.0 * std::max(1.0, 1.0 / s) / scale * std::exp(t) * touchard(nu + 1, t);
  const double outer = 2.0 * std::exp(nu + 1.0) * std::exp(log_factorial(nu + 1)) / scale * std::exp(2.0 * t);
  return {series, middle, outer, monotone, monotone && series <= outer};
}

}  // namespace geocume
