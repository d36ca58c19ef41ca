#include "contactdyn/multi_index.hpp"

#include <algorithm>
#include <cctype>

#include "contactdyn/error.hpp"

namespace contactdyn {

MultiIndex canonical(MultiIndex a) {
  std::sort(a.begin(), a.end());
  return a;
}

namespace {

void extend(std::size_t n, std::size_t k, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (cur.size() == k) {
    out.push_back(cur);
    return;
  }
  const std::size_t start = cur.empty() ? 0 : cur.back();
  for (std::size_t d = start; d < n; ++d) {
    cur.push_back(d);
    extend(n, k, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> multi_indices(std::size_t n, std::size_t k) {
  std::vector<MultiIndex> out;
  MultiIndex cur;
  extend(n, k, cur, out);
  return out;
}

std::vector<MultiIndex> multi_indices_up_to(std::size_t n, std::size_t lo, std::size_t hi) {
  std::vector<MultiIndex> out;
  for (std::size_t k = lo; k <= hi; ++k) {
    auto part = multi_indices(n, k);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

double factorial(std::size_t k) {
  double f = 1.0;
  for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return f;
}

std::size_t count_axis(const MultiIndex& a, std::size_t d) {
  return static_cast<std::size_t>(std::count(a.begin(), a.end(), d));
}

double multiplicity(const MultiIndex& a) {
  double m = factorial(a.size());
  MultiIndex s = canonical(a);
  for (std::size_t i = 0; i < s.size();) {
    std::size_t j = i;
    while (j < s.size() && s[j] == s[i]) ++j;
    m /= factorial(j - i);
    i = j;
  }
  return m;
}

MultiIndex remove_one(const MultiIndex& a, std::size_t d) {
  MultiIndex out = a;
  auto it = std::find(out.begin(), out.end(), d);
  if (it == out.end()) throw ContractViolation("remove_one: axis not present");
  out.erase(it);
  return out;
}

std::string to_label(const MultiIndex& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(a[i] + 1);
  }
  return s + ")";
}

MultiIndex parse_label(const std::string& s) {
  MultiIndex out;
  const bool has_sep = s.find(',') != std::string::npos;
  std::string num;
  auto flush = [&] {
    if (num.empty()) return;
    const long v = std::stol(num);
    if (v < 1) throw Rejected("multi-index labels are one-based: '" + s + "'");
    out.push_back(static_cast<std::size_t>(v - 1));
    num.clear();
  };
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      num += c;
      if (!has_sep) flush();
    } else if (c == ',' || c == ')' ) {
      flush();
    } else if (c == '(' || c == ' ') {
      continue;
    } else {
      throw Rejected("bad multi-index label '" + s + "'");
    }
  }
  flush();
  return canonical(out);
}

}  // namespace contactdyn
