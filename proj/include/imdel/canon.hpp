#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "imdel/errors.hpp"

namespace imdel {

// Small vertex-coloured multigraph on 0..n-1, used for canonical forms.
struct ColoredGraph {
  int n = 0;
  std::vector<int> color;
  std::vector<std::pair<int, int>> edges;
};

struct CanonicalForm {
  std::vector<int> code;   // n, colours in label order, then sorted label pairs
  std::vector<int> label;  // vertex -> canonical label
};

namespace detail {

class Canonizer {
 public:
  explicit Canonizer(const ColoredGraph& g, long budget) : g_(g), budget_(budget) {
    adj_.assign(static_cast<std::size_t>(g.n), {});
    for (auto [a, b] : g.edges) {
      adj_[static_cast<std::size_t>(a)].push_back(b);
      adj_[static_cast<std::size_t>(b)].push_back(a);
    }
  }

  CanonicalForm run() {
    std::vector<int> cell(static_cast<std::size_t>(g_.n));
    // Initial cells ordered by colour value.
    std::vector<int> cols = g_.color;
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    for (int v = 0; v < g_.n; ++v)
      cell[static_cast<std::size_t>(v)] = static_cast<int>(std::lower_bound(cols.begin(), cols.end(), g_.color[static_cast<std::size_t>(v)]) - cols.begin());
    search(refine(cell));
    return best_;
  }

 private:
  // Cell ids are 0..k-1 and every refinement step is isomorphism invariant.
  std::vector<int> refine(std::vector<int> cell) const {
    int k = count(cell);
    while (true) {
      std::vector<std::pair<std::vector<int>, int>> sig(static_cast<std::size_t>(g_.n));
      for (int v = 0; v < g_.n; ++v) {
        std::vector<int> s{cell[static_cast<std::size_t>(v)]};
        std::vector<int> nb;
        for (int w : adj_[static_cast<std::size_t>(v)]) nb.push_back(cell[static_cast<std::size_t>(w)]);
        std::sort(nb.begin(), nb.end());
        s.push_back(static_cast<int>(nb.size()));
        s.insert(s.end(), nb.begin(), nb.end());
        sig[static_cast<std::size_t>(v)] = {std::move(s), v};
      }
      std::vector<std::vector<int>> keys;
      for (auto& [s, v] : sig) keys.push_back(s);
      std::sort(keys.begin(), keys.end());
      keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
      std::vector<int> next(static_cast<std::size_t>(g_.n));
      for (int v = 0; v < g_.n; ++v)
        next[static_cast<std::size_t>(v)] = static_cast<int>(std::lower_bound(keys.begin(), keys.end(), sig[static_cast<std::size_t>(v)].first) - keys.begin());
      int k2 = static_cast<int>(keys.size());
      cell = std::move(next);
      if (k2 == k) return cell;
      k = k2;
    }
  }

  static int count(const std::vector<int>& cell) {
    int k = 0;
    for (int c : cell) k = std::max(k, c + 1);
    return k;
  }

  void search(const std::vector<int>& cell) {
    if (--budget_ < 0) throw ResourceError("canonical labelling budget exhausted");
    int k = count(cell);
    if (k == g_.n) {
      leaf(cell);
      return;
    }
    std::vector<int> size(static_cast<std::size_t>(k), 0);
    for (int c : cell) ++size[static_cast<std::size_t>(c)];
    int target = -1;
    for (int c = 0; c < k; ++c)
      if (size[static_cast<std::size_t>(c)] > 1) {
        target = c;
        break;
      }
    for (int v = 0; v < g_.n; ++v) {
      if (cell[static_cast<std::size_t>(v)] != target) continue;
      std::vector<int> ind(cell.size());
      for (int w = 0; w < g_.n; ++w) {
        int c = cell[static_cast<std::size_t>(w)];
        ind[static_cast<std::size_t>(w)] = 2 * c + ((c == target && w != v) ? 1 : 0);
      }
      search(refine(ind));
    }
  }

  void leaf(const std::vector<int>& label) {
    std::vector<int> code{g_.n};
    std::vector<int> cols(static_cast<std::size_t>(g_.n));
    for (int v = 0; v < g_.n; ++v) cols[static_cast<std::size_t>(label[static_cast<std::size_t>(v)])] = g_.color[static_cast<std::size_t>(v)];
    code.insert(code.end(), cols.begin(), cols.end());
    std::vector<std::pair<int, int>> es;
    for (auto [a, b] : g_.edges) {
      int x = label[static_cast<std::size_t>(a)], y = label[static_cast<std::size_t>(b)];
      es.push_back({std::min(x, y), std::max(x, y)});
    }
    std::sort(es.begin(), es.end());
    code.push_back(static_cast<int>(es.size()));
    for (auto [x, y] : es) {
      code.push_back(x);
      code.push_back(y);
    }
    if (!have_ || code < best_.code) {
      have_ = true;
      best_.code = std::move(code);
      best_.label = label;
    }
  }

  const ColoredGraph& g_;
  long budget_;
  std::vector<std::vector<int>> adj_;
  bool have_ = false;
  CanonicalForm best_;
};

}  // namespace detail

inline CanonicalForm canonical_form(const ColoredGraph& g, long budget = 2'000'000) {
  if (g.n == 0) return {{0, 0}, {}};
  return detail::Canonizer(g, budget).run();
}

}  // namespace imdel
