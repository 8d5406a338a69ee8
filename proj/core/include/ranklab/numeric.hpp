#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "ranklab/error.hpp"

namespace ranklab {

using Int = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                           boost::multiprecision::et_off>;
using Rat =
    boost::multiprecision::number<boost::multiprecision::rational_adaptor<
                                      boost::multiprecision::cpp_int_backend<>>,
                                  boost::multiprecision::et_off>;

inline Int rat_num(const Rat& r) { return numerator(r); }
inline Int rat_den(const Rat& r) { return denominator(r); }

/// Canonical "p/q" rendering (always includes the denominator) used by the
/// CSV/JSON emitters so exact values round-trip without precision loss.
std::string rat_str(const Rat& r);

/// Accepts "p", "p/q", and surrounding whitespace; throws ParseError otherwise.
Rat rat_parse(const std::string& text);

Int int_parse(const std::string& text);

/// x^e for e >= 0.
Int ipow(const Int& x, unsigned long e);
Rat rpow(const Rat& x, unsigned long e);

/// floor(x^(1/k)) for x >= 0, k >= 1, exact.
Int iroot_floor(const Int& x, unsigned long k);

/// floor(b^(p/q)) for b >= 1 and p/q >= 0, exact: floor((b^p)^(1/q)).
Int ipow_rational_floor(const Int& b, const Rat& exponent);

/// Sum of t^k for t = 0..upper, exact (Faulhaber recursion). upper may be
/// astronomically large; cost is polynomial in k only.
Int sum_powers(const Int& upper, unsigned k);

double rat_double(const Rat& r);

} // namespace ranklab
