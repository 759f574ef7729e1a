#include "beamnf/multi_index.hpp"

#include <algorithm>
#include <cstdlib>

#include "beamnf/errors.hpp"

namespace beamnf {

MultiIndex::MultiIndex(std::initializer_list<Entry> entries) : e_(entries) { canonicalize(); }

MultiIndex::MultiIndex(std::vector<Entry> entries) : e_(std::move(entries)) { canonicalize(); }

MultiIndex MultiIndex::unit(int mode, int exponent) { return MultiIndex({{mode, exponent}}); }

void MultiIndex::canonicalize() {
  std::sort(e_.begin(), e_.end());
  std::vector<Entry> out;
  for (const auto& [j, k] : e_) {
    if (k < 0) throw DomainError("negative exponent in multi-index");
    if (!out.empty() && out.back().first == j)
      out.back().second += k;
    else
      out.emplace_back(j, k);
  }
  std::erase_if(out, [](const Entry& e) { return e.second == 0; });
  e_ = std::move(out);
}

int MultiIndex::operator[](int mode) const {
  auto it = std::lower_bound(e_.begin(), e_.end(), Entry{mode, 0});
  return (it != e_.end() && it->first == mode) ? it->second : 0;
}

int MultiIndex::total() const {
  int t = 0;
  for (const auto& e : e_) t += e.second;
  return t;
}

int MultiIndex::momentum() const {
  int t = 0;
  for (const auto& [j, k] : e_) t += j * k;
  return t;
}

int MultiIndex::max_abs_mode() const {
  int m = 0;
  for (const auto& e : e_) m = std::max(m, std::abs(e.first));
  return m;
}

MultiIndex MultiIndex::operator+(const MultiIndex& o) const {
  std::vector<Entry> all = e_;
  all.insert(all.end(), o.e_.begin(), o.e_.end());
  return MultiIndex(std::move(all));
}

MultiIndex MultiIndex::minus_unit(int mode) const {
  MultiIndex r = *this;
  auto it = std::lower_bound(r.e_.begin(), r.e_.end(), Entry{mode, 0});
  if (it == r.e_.end() || it->first != mode) throw DomainError("exponent already zero");
  if (--it->second == 0) r.e_.erase(it);
  return r;
}

}  // namespace beamnf
