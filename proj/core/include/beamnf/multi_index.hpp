#pragma once

#include <compare>
#include <initializer_list>
#include <utility>
#include <vector>

namespace beamnf {

// Sparse exponent vector over Fourier modes: sorted (mode, exponent) pairs,
// exponents strictly positive.
class MultiIndex {
 public:
  using Entry = std::pair<int, int>;

  MultiIndex() = default;
  MultiIndex(std::initializer_list<Entry> entries);
  explicit MultiIndex(std::vector<Entry> entries);

  static MultiIndex unit(int mode, int exponent = 1);

  int operator[](int mode) const;
  int total() const;
  bool empty() const { return e_.empty(); }
  int momentum() const;  // sum of mode * exponent
  int max_abs_mode() const;
  const std::vector<Entry>& entries() const { return e_; }

  MultiIndex operator+(const MultiIndex& o) const;
  // Subtract a unit at mode; the exponent there must be positive.
  MultiIndex minus_unit(int mode) const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

 private:
  void canonicalize();
  std::vector<Entry> e_;
};

}  // namespace beamnf
