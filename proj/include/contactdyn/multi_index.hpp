#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace contactdyn {

/// Sorted tuple of zero-based axis labels; (0,0) is d^2/dy1^2, (0,1) the mixed partial.
using MultiIndex = std::vector<std::size_t>;

MultiIndex canonical(MultiIndex a);

/// All sorted multi-indices over n axes with exactly k entries, lexicographic.
std::vector<MultiIndex> multi_indices(std::size_t n, std::size_t k);
/// Orders lo..hi inclusive, by order then lexicographic.
std::vector<MultiIndex> multi_indices_up_to(std::size_t n, std::size_t lo, std::size_t hi);

/// Number of distinct orderings of a: k! / prod(count!).
double multiplicity(const MultiIndex& a);

/// Occurrences of axis d in a.
std::size_t count_axis(const MultiIndex& a, std::size_t d);

/// a with one copy of d removed (d must occur).
MultiIndex remove_one(const MultiIndex& a, std::size_t d);

/// "(1,1)" style with one-based labels; "()" for the empty index.
std::string to_label(const MultiIndex& a);
/// Inverse of to_label; accepts "(1,2)", "1,2" or "12" for single-digit axes.
MultiIndex parse_label(const std::string& s);

double factorial(std::size_t k);

}  // namespace contactdyn
