#include "ctmix/chain.hpp"

#include <algorithm>
#include <cmath>

#include "ctmix/errors.hpp"
#include "ctmix/mathutil.hpp"

namespace ctmix {
namespace {

// Reachability of every state from state 0 along edges selected by `fwd`.
bool spans_all(int m, const std::vector<RateEntry>& entries, bool fwd) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(m));
  for (const auto& e : entries) {
    if (fwd)
      adj[static_cast<std::size_t>(e.from)].push_back(e.to);
    else
      adj[static_cast<std::size_t>(e.to)].push_back(e.from);
  }
  std::vector<char> seen(static_cast<std::size_t>(m), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == m;
}

} // namespace

ChainSpec::ChainSpec(int states, std::vector<RateEntry> entries,
                     Connectivity conn, std::vector<std::string> labels) {
  if (states < 2)
    fail(Errc::invalid_config,
         "a chain needs at least 2 states, got " + std::to_string(states));
  states_ = states;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto& e = entries[k];
    if (e.from < 0 || e.from >= states || e.to < 0 || e.to >= states)
      fail(Errc::invalid_config, "rates[" + std::to_string(k) + "]: state index out of range");
    if (e.from == e.to)
      fail(Errc::invalid_config, "rates[" + std::to_string(k) +
                                     "]: diagonal entries are implicit, from == to == " +
                                     std::to_string(e.from));
    if (!(e.rate > 0.0) || !std::isfinite(e.rate))
      fail(Errc::invalid_config,
           "rates[" + std::to_string(k) + "]: rate must be finite and > 0, got " + fmt17(e.rate));
  }
  std::stable_sort(entries.begin(), entries.end(), [](const RateEntry& a, const RateEntry& b) {
    return a.from != b.from ? a.from < b.from : a.to < b.to;
  });
  for (std::size_t k = 1; k < entries.size(); ++k)
    if (entries[k].from == entries[k - 1].from && entries[k].to == entries[k - 1].to)
      fail(Errc::invalid_config, "duplicate rate entry for edge (" +
                                     std::to_string(entries[k].from) + ", " +
                                     std::to_string(entries[k].to) + ")");
  entries_ = std::move(entries);

  if (labels.empty()) {
    labels_.reserve(static_cast<std::size_t>(states));
    for (int i = 0; i < states; ++i) labels_.push_back(std::to_string(i));
  } else {
    if (static_cast<int>(labels.size()) != states)
      fail(Errc::invalid_config, "got " + std::to_string(labels.size()) + " labels for " +
                                     std::to_string(states) + " states");
    labels_ = std::move(labels);
  }

  exit_.assign(static_cast<std::size_t>(states), 0.0);
  for (const auto& e : entries_) {
    exit_[static_cast<std::size_t>(e.from)] += e.rate;
    max_rate_ = std::max(max_rate_, e.rate);
  }
  unif_rate_ = 0.0;
  for (double x : exit_) unif_rate_ = std::max(unif_rate_, x);

  irreducible_ = spans_all(states_, entries_, true) && spans_all(states_, entries_, false);
  if (conn == Connectivity::require_irreducible && !irreducible_)
    fail(Errc::non_irreducible, "rate graph is not strongly connected");
}

double ChainSpec::rate(int from, int to) const {
  if (from < 0 || from >= states_ || to < 0 || to >= states_)
    fail(Errc::out_of_range, "rate(" + std::to_string(from) + ", " + std::to_string(to) + ")");
  auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair<int, int>{from, to},
                             [](const RateEntry& e, const std::pair<int, int>& key) {
                               return e.from != key.first ? e.from < key.first
                                                          : e.to < key.second;
                             });
  if (it != entries_.end() && it->from == from && it->to == to) return it->rate;
  return 0.0;
}

void ChainSpec::require_irreducible_for(const char* op) const {
  if (!irreducible_)
    fail(Errc::non_irreducible, std::string(op) + " requires an irreducible chain");
}

CsrMatrix ChainSpec::generator() const {
  CsrMatrix q;
  q.n = states_;
  q.row_ptr.assign(static_cast<std::size_t>(states_) + 1, 0);
  // One diagonal slot per row plus the off-diagonal entries.
  for (const auto& e : entries_) ++q.row_ptr[static_cast<std::size_t>(e.from) + 1];
  for (int i = 0; i < states_; ++i)
    q.row_ptr[static_cast<std::size_t>(i) + 1] += q.row_ptr[static_cast<std::size_t>(i)] + 1;
  q.col.resize(static_cast<std::size_t>(q.row_ptr.back()));
  q.val.resize(static_cast<std::size_t>(q.row_ptr.back()));
  std::size_t k = 0; // cursor into entries_ (sorted by from, then to)
  for (int i = 0; i < states_; ++i) {
    std::int64_t slot = q.row_ptr[static_cast<std::size_t>(i)];
    bool placed_diag = false;
    while (k < entries_.size() && entries_[k].from == i) {
      if (!placed_diag && entries_[k].to > i) {
        q.col[static_cast<std::size_t>(slot)] = i;
        q.val[static_cast<std::size_t>(slot)] = -exit_[static_cast<std::size_t>(i)];
        ++slot;
        placed_diag = true;
      }
      q.col[static_cast<std::size_t>(slot)] = entries_[k].to;
      q.val[static_cast<std::size_t>(slot)] = entries_[k].rate;
      ++slot;
      ++k;
    }
    if (!placed_diag) {
      q.col[static_cast<std::size_t>(slot)] = i;
      q.val[static_cast<std::size_t>(slot)] = -exit_[static_cast<std::size_t>(i)];
      ++slot;
    }
  }
  return q;
}

CsrMatrix ChainSpec::generator_transpose() const { return generator().transposed(); }

} // namespace ctmix
