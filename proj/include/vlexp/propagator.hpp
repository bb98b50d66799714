#pragma once

// Diagonal linear part A of u' = Au + F(t, u): per-mode symbols d_k with
// (Au)_k = d_k u_k, plus cached tables of exp(tau d_k) and phi_l(tau d_k)
// for the node offsets tau = c*dt requested by the steppers.

#include <map>
#include <memory>
#include <utility>

#include "phi.hpp"
#include "util.hpp"

namespace vlexp {

class DiagonalPropagator {
public:
  // Tables are handed out as shared pointers so a cache prune can never
  // invalidate a table a stepper is still holding mid-step.
  using TableRef = std::shared_ptr<const State>;

  DiagonalPropagator() = default;
  explicit DiagonalPropagator(State symbols) : d_(std::move(symbols)) {}

  const State& symbols() const { return d_; }
  std::size_t size() const { return d_.size(); }

  // Table of exp(tau * d_k) over all modes.
  TableRef exp_table(double tau) {
    auto it = exp_cache_.find(tau);
    if (it != exp_cache_.end()) return it->second;
    auto tab = std::make_shared<State>(d_.size());
    for (std::size_t i = 0; i < d_.size(); ++i) (*tab)[i] = std::exp(tau * d_[i]);
    prune();
    exp_cache_.emplace(tau, tab);
    return tab;
  }

  // Table of phi_l(tau * d_k) over all modes.
  TableRef phi_table(int l, double tau) {
    auto key = std::make_pair(l, tau);
    auto it = phi_cache_.find(key);
    if (it != phi_cache_.end()) return it->second;
    auto tab = std::make_shared<State>(d_.size());
    for (std::size_t i = 0; i < d_.size(); ++i) (*tab)[i] = phi_function(l, tau * d_[i]);
    prune();
    phi_cache_.emplace(key, tab);
    return tab;
  }

  // out_k = exp(tau d_k) * in_k
  void apply_exp(double tau, const State& in, State& out) {
    const State& e = *exp_table(tau);
    out.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = e[i] * in[i];
  }

  void clear_cache() {
    exp_cache_.clear();
    phi_cache_.clear();
  }

private:
  // A fixed-size step needs only a handful of distinct tau values; adaptive
  // stepping cycles through a few more.  Once the cache outgrows that
  // working set, dropping everything and rebuilding on demand is cheaper
  // than bookkeeping.  Outstanding TableRefs stay valid.
  void prune() {
    if (exp_cache_.size() + phi_cache_.size() >= 24) clear_cache();
  }

  State d_;
  std::map<double, TableRef> exp_cache_;
  std::map<std::pair<int, double>, TableRef> phi_cache_;
};

}  // namespace vlexp
