#include "ranklab/numeric.hpp"

#include <cctype>
#include <vector>

namespace ranklab {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::InvalidDescriptor: return "InvalidDescriptor";
        case ErrorCode::StageMismatch: return "StageMismatch";
        case ErrorCode::StageUnavailable: return "StageUnavailable";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::CombinatorialBudget: return "CombinatorialBudget";
        case ErrorCode::NonmonotoneSpacers: return "NonmonotoneSpacers";
        case ErrorCode::NotExact: return "NotExact";
        case ErrorCode::NotSidon: return "NotSidon";
        case ErrorCode::TooLarge: return "TooLarge";
        case ErrorCode::Unresolvable: return "Unresolvable";
        case ErrorCode::RegionTooSmall: return "RegionTooSmall";
        case ErrorCode::InfeasibleWindow: return "InfeasibleWindow";
        case ErrorCode::PieceCollision: return "PieceCollision";
        case ErrorCode::OrbitExit: return "OrbitExit";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::InternalInvariant: return "InternalInvariant";
    }
    return "UnknownError";
}

std::string rat_str(const Rat& r) {
    return rat_num(r).str() + "/" + rat_den(r).str();
}

Rat rat_parse(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) fail(ErrorCode::ParseError, "empty rational literal");
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rat(Int(s));
        Int num(s.substr(0, slash));
        Int den(s.substr(slash + 1));
        if (den == 0) fail(ErrorCode::ParseError, "zero denominator in '" + text + "'");
        return Rat(num, den);
    } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "bad rational literal '" + text + "'");
    }
}

Int int_parse(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) fail(ErrorCode::ParseError, "empty integer literal");
    try {
        return Int(s);
    } catch (const std::exception&) {
        fail(ErrorCode::ParseError, "bad integer literal '" + text + "'");
    }
}

Int ipow(const Int& x, unsigned long e) {
    Int result = 1;
    Int base = x;
    while (e > 0) {
        if (e & 1) result *= base;
        base *= base;
        e >>= 1;
    }
    return result;
}

Rat rpow(const Rat& x, unsigned long e) {
    return Rat(ipow(rat_num(x), e), ipow(rat_den(x), e));
}

Int iroot_floor(const Int& x, unsigned long k) {
    if (x < 0) fail(ErrorCode::InvalidDescriptor, "iroot_floor of negative value");
    if (k == 0) fail(ErrorCode::InvalidDescriptor, "iroot_floor with k = 0");
    if (k == 1 || x <= 1) return x;
    // Newton iteration from an over-estimate; converges monotonically down.
    unsigned long bits = static_cast<unsigned long>(msb(x)) + 1;
    Int guess = Int(1) << (bits / k + 1);
    while (true) {
        Int next = ((k - 1) * guess + x / ipow(guess, k - 1)) / k;
        if (next >= guess) break;
        guess = next;
    }
    while (ipow(guess, k) > x) --guess;
    while (ipow(guess + 1, k) <= x) ++guess;
    return guess;
}

Int ipow_rational_floor(const Int& b, const Rat& exponent) {
    if (b < 1) fail(ErrorCode::InvalidDescriptor, "base must be >= 1");
    if (exponent < 0) fail(ErrorCode::InvalidDescriptor, "exponent must be >= 0");
    Int p = rat_num(exponent);
    Int q = rat_den(exponent);
    if (!p.is_zero() && (p > 4096 || q > 4096))
        fail(ErrorCode::CombinatorialBudget, "rational exponent too large: " + rat_str(exponent));
    return iroot_floor(ipow(b, p.convert_to<unsigned long>()), q.convert_to<unsigned long>());
}

Int sum_powers(const Int& upper, unsigned k) {
    if (upper < 0) return 0;
    // S_k(T) = ((T+1)^(k+1) - sum_{i<k} C(k+1,i) S_i(T)) / (k+1)
    std::vector<Rat> s(k + 1);
    Int t1 = upper + 1;
    for (unsigned m = 0; m <= k; ++m) {
        Rat acc = Rat(ipow(t1, m + 1));
        Int binom = 1; // C(m+1, i), starting at i = 0
        for (unsigned i = 0; i < m; ++i) {
            acc -= Rat(binom) * s[i];
            binom = binom * (Int(m) + 1 - i) / (i + 1);
        }
        s[m] = acc / Rat(m + 1);
    }
    require_internal(rat_den(s[k]) == 1, "sum_powers produced a non-integer");
    return rat_num(s[k]);
}

double rat_double(const Rat& r) {
    return r.convert_to<double>();
}

} // namespace ranklab
